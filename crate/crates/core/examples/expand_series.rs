//! Expand DSL expressions as truncated q-series, symbolically in z and c
//! or with rational values substituted.
//!
//! `cargo run --example expand_series`

use qverify::coeffring::{rat, LaurentPoly};
use qverify::dsl::{eval_str, Env};

fn main() {
    let kluyver = "sum(n=1..inf, (-1)^(n-1)*q^(n*(n+1)/2)/((1 - q^n)*poch(q, n)))";
    let s = eval_str::<LaurentPoly>(kluyver, &Env::symbolic(12)).unwrap();
    println!("{kluyver}\n  = {s}\n");

    let garvan = "sum(n=1..inf, (-1)^(n-1)*z^n*q^(n*(n+1)/2)/((1 - c*q^n)*poch(z*q, n)))";
    let sym = eval_str::<LaurentPoly>(garvan, &Env::symbolic(5)).unwrap();
    println!("{garvan}\n  = {sym}\n");

    let spec = eval_str(garvan, &Env::specialized(5, rat(1, 3), rat(-1, 2))).unwrap();
    println!("at z = 1/3, c = -1/2:\n  = {spec}");
    assert_eq!(sym.eval_at(&rat(1, 3), &rat(-1, 2)).unwrap(), spec);
}
