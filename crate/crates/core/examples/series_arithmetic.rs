//! Truncated q-series arithmetic: Pochhammer products, Gaussian binomials,
//! inversion and exact coefficient division.
//!
//! `cargo run --example series_arithmetic`

use num_rational::BigRational;
use qverify::coeffring::{rat, LaurentPoly};
use qverify::qseries::{poch, qbin, Count, Monomial, QSeries};

fn main() {
    let n = 15;
    let q_inf = poch::<BigRational>(&Monomial::q_power(1), Count::Infinite, 1, n).unwrap();
    println!("(q;q)_inf = {q_inf}");
    let p = q_inf.invert().unwrap();
    println!("1/(q;q)_inf = {p}");

    let g = qbin::<BigRational>(5, 2, 1, n);
    println!("[5 choose 2]_q = {g}");

    let x = Monomial::new(rat(1, 2), 1);
    let finite = poch::<BigRational>(&x, Count::Finite(3), 2, n).unwrap();
    println!("(q/2; q^2)_3 = {finite}");

    let zq = Monomial::new(LaurentPoly::z(), 1);
    let sym = poch(&zq, Count::Finite(2), 1, 4).unwrap();
    println!("(zq; q)_2 = {sym}");

    let one_minus_c = LaurentPoly::one().sub(&LaurentPoly::c());
    let s = QSeries::constant(one_minus_c.mul(&LaurentPoly::z()), 0);
    println!("(z - cz)/(1 - c) = {}", s.scalar_exact_div(&one_minus_c).unwrap());
}
