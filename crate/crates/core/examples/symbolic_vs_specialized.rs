//! Evaluate a catalog side once in the Laurent ring, then compare rational
//! substitutions of that result with direct specialized evaluation.
//!
//! `cargo run --release --example symbolic_vs_specialized`

use num_rational::BigRational;
use qverify::catalog::{Assignment, Catalog, Context, ParamValue};
use qverify::coeffring::{rat, LaurentPoly};

fn main() {
    let catalog = Catalog::builtin();
    let entry = catalog.get("gen_of_garvan").unwrap();
    let order = 25;
    let sym_point = Assignment::new()
        .with("z", ParamValue::Symbolic)
        .with("c", ParamValue::Symbolic);
    let sym = Context::<LaurentPoly>::new(&sym_point, order)
        .eval_side(&entry.lhs)
        .unwrap();
    for (z, c) in [(rat(1, 2), rat(-1, 3)), (rat(7, 11), rat(2, 9))] {
        let point = Assignment::new()
            .with("z", ParamValue::Rational(z.clone()))
            .with("c", ParamValue::Rational(c.clone()));
        let direct = Context::<BigRational>::new(&point, order)
            .eval_side(&entry.lhs)
            .unwrap();
        let substituted = sym.eval_at(&z, &c).unwrap();
        println!("z={z}, c={c}: agree = {}", substituted == direct);
        println!("  q^3 coefficient {}", direct.coeff(3));
    }
}
