//! Exact bivariate Laurent polynomials in z and c over the rationals.
//!
//! `cargo run --example laurent_ring`

use qverify::coeffring::{geometric_weight, int, rat, LaurentPoly};

fn main() {
    let z = LaurentPoly::z();
    let c = LaurentPoly::c();
    let zinv = LaurentPoly::monomial(int(1), -1, 0);
    let p = z.add(&zinv).mul(&c.sub(&LaurentPoly::one()));
    println!("p = {p}");
    println!("p(2, 1/3) = {}", p.eval(&int(2), &rat(1, 3)).unwrap());
    println!("p at c = 1/3: {}", p.eval_c(&rat(1, 3)).unwrap());

    let num = z.pow(5).sub(&c.pow(5));
    let q = num.exact_div(&z.sub(&c)).unwrap();
    println!("(z^5 - c^5)/(z - c) = {q}");
    assert_eq!(q, geometric_weight(5));
    println!("(z + 1)/(z - c) is {:?}", z.add(&LaurentPoly::one()).exact_div(&z.sub(&c)).map(|_| ()));
}
