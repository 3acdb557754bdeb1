//! Exact coefficient rings: arbitrary-precision rationals and sparse Laurent
//! polynomials in the two formal parameters `z` and `c`.
//!
//! [`LaurentPoly`] keeps its terms sorted by `(e_z, e_c)` with no zero
//! coefficients, so structural equality is mathematical equality.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

pub use num_rational::BigRational;

/// Exponent pair `(e_z, e_c)`.
pub type Exp = (i32, i32);

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CoeffError {
    #[error("not divisible: {dividend} is not a multiple of {divisor}")]
    NotDivisible { dividend: String, divisor: String },
    #[error("zero substituted into a negative power of {var}")]
    ZeroAtPole { var: char },
}

/// The operations a truncated q-series needs from its coefficient ring.
pub trait Coeff: Clone + PartialEq + fmt::Debug + fmt::Display + Send + Sync + 'static {
    fn zero() -> Self;
    fn one() -> Self;
    fn is_zero(&self) -> bool;
    fn from_rational(r: BigRational) -> Self;
    fn add_ref(&self, other: &Self) -> Self;
    fn sub_ref(&self, other: &Self) -> Self;
    fn mul_ref(&self, other: &Self) -> Self;
    fn neg_ref(&self) -> Self;
    /// Inverse when `self` is a unit of the ring.
    fn unit_inverse(&self) -> Option<Self>;
    /// `q` with `self = divisor * q`, if it exists in the ring.
    fn exact_div(&self, divisor: &Self) -> Result<Self, CoeffError>;

    fn from_int(n: i64) -> Self {
        Self::from_rational(BigRational::from_integer(BigInt::from(n)))
    }

    fn add_assign_ref(&mut self, other: &Self) {
        *self = self.add_ref(other);
    }

    fn sub_assign_ref(&mut self, other: &Self) {
        *self = self.sub_ref(other);
    }

    fn pow(&self, e: u32) -> Self {
        let mut acc = Self::one();
        let mut base = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul_ref(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul_ref(&base);
            }
        }
        acc
    }
}

impl Coeff for BigRational {
    fn zero() -> Self {
        Zero::zero()
    }
    fn one() -> Self {
        One::one()
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn from_rational(r: BigRational) -> Self {
        r
    }
    fn add_ref(&self, other: &Self) -> Self {
        self + other
    }
    fn sub_ref(&self, other: &Self) -> Self {
        self - other
    }
    fn mul_ref(&self, other: &Self) -> Self {
        self * other
    }
    fn neg_ref(&self) -> Self {
        -self
    }
    fn unit_inverse(&self) -> Option<Self> {
        if Zero::is_zero(self) {
            None
        } else {
            Some(self.recip())
        }
    }
    fn exact_div(&self, divisor: &Self) -> Result<Self, CoeffError> {
        if Zero::is_zero(divisor) {
            return Err(CoeffError::NotDivisible {
                dividend: fmt_rational(self),
                divisor: "0".into(),
            });
        }
        Ok(self / divisor)
    }
    fn add_assign_ref(&mut self, other: &Self) {
        *self += other;
    }
    fn sub_assign_ref(&mut self, other: &Self) {
        *self -= other;
    }
}

pub fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

pub fn int(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

/// `p/q` or `p` when the denominator is one.
pub fn fmt_rational(r: &BigRational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Parse `p` or `p/q` with optional leading minus.
pub fn parse_rational(s: &str) -> Option<BigRational> {
    let s = s.trim();
    let (n, d) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s, "1"),
    };
    let n: BigInt = n.parse().ok()?;
    let d: BigInt = d.parse().ok()?;
    if d.is_zero() {
        return None;
    }
    Some(BigRational::new(n, d))
}

fn checked_exp(a: Exp, b: Exp) -> Exp {
    (
        a.0.checked_add(b.0).expect("z exponent overflow"),
        a.1.checked_add(b.1).expect("c exponent overflow"),
    )
}

/// Sparse Laurent polynomial in `z` and `c` with rational coefficients.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct LaurentPoly {
    terms: Vec<(Exp, BigRational)>,
}

impl LaurentPoly {
    pub fn zero() -> Self {
        Self { terms: Vec::new() }
    }

    pub fn one() -> Self {
        Self::constant(<BigRational as One>::one())
    }

    pub fn constant(r: BigRational) -> Self {
        Self::monomial(r, 0, 0)
    }

    pub fn monomial(coef: BigRational, e_z: i32, e_c: i32) -> Self {
        if Zero::is_zero(&coef) {
            Self::zero()
        } else {
            Self {
                terms: vec![((e_z, e_c), coef)],
            }
        }
    }

    pub fn z() -> Self {
        Self::monomial(<BigRational as One>::one(), 1, 0)
    }

    pub fn c() -> Self {
        Self::monomial(<BigRational as One>::one(), 0, 1)
    }

    /// Build from arbitrary (possibly repeated, possibly zero) terms.
    pub fn from_terms<I: IntoIterator<Item = (Exp, BigRational)>>(iter: I) -> Self {
        let mut v: Vec<(Exp, BigRational)> = iter.into_iter().collect();
        v.sort_by_key(|a| a.0);
        let mut out: Vec<(Exp, BigRational)> = Vec::with_capacity(v.len());
        for (e, r) in v {
            match out.last_mut() {
                Some((le, lr)) if *le == e => *lr += r,
                _ => out.push((e, r)),
            }
        }
        out.retain(|(_, r)| !Zero::is_zero(r));
        Self { terms: out }
    }

    pub fn terms(&self) -> &[(Exp, BigRational)] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, e: Exp) -> BigRational {
        match self.terms.binary_search_by(|(k, _)| k.cmp(&e)) {
            Ok(i) => self.terms[i].1.clone(),
            Err(_) => <BigRational as Zero>::zero(),
        }
    }

    /// The constant value if the polynomial has no `z` or `c` dependence.
    pub fn as_constant(&self) -> Option<BigRational> {
        match self.terms.as_slice() {
            [] => Some(<BigRational as Zero>::zero()),
            [((0, 0), r)] => Some(r.clone()),
            _ => None,
        }
    }

    pub fn neg(&self) -> Self {
        Self {
            terms: self.terms.iter().map(|(e, r)| (*e, -r)).collect(),
        }
    }

    pub fn scale(&self, s: &BigRational) -> Self {
        if Zero::is_zero(s) {
            return Self::zero();
        }
        Self {
            terms: self.terms.iter().map(|(e, r)| (*e, r * s)).collect(),
        }
    }

    /// Multiply by `coef * z^e_z * c^e_c`.
    pub fn mul_monomial(&self, coef: &BigRational, e: Exp) -> Self {
        if Zero::is_zero(coef) {
            return Self::zero();
        }
        let unit = coef.is_one();
        Self {
            terms: self
                .terms
                .iter()
                .map(|(k, r)| (checked_exp(*k, e), if unit { r.clone() } else { r * coef }))
                .collect(),
        }
    }

    fn merge(&self, other: &Self, negate_other: bool) -> Self {
        let (a, b) = (&self.terms, &other.terms);
        let mut out = Vec::with_capacity(a.len() + b.len());
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            match a[i].0.cmp(&b[j].0) {
                Ordering::Less => {
                    out.push(a[i].clone());
                    i += 1;
                }
                Ordering::Greater => {
                    let r = if negate_other { -&b[j].1 } else { b[j].1.clone() };
                    out.push((b[j].0, r));
                    j += 1;
                }
                Ordering::Equal => {
                    let r = if negate_other { &a[i].1 - &b[j].1 } else { &a[i].1 + &b[j].1 };
                    if !Zero::is_zero(&r) {
                        out.push((a[i].0, r));
                    }
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&a[i..]);
        for t in &b[j..] {
            let r = if negate_other { -&t.1 } else { t.1.clone() };
            out.push((t.0, r));
        }
        Self { terms: out }
    }

    pub fn add(&self, other: &Self) -> Self {
        if self.is_zero() {
            return other.clone();
        }
        if other.is_zero() {
            return self.clone();
        }
        self.merge(other, false)
    }

    pub fn sub(&self, other: &Self) -> Self {
        if other.is_zero() {
            return self.clone();
        }
        self.merge(other, true)
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::zero();
        }
        if other.terms.len() == 1 {
            let (e, r) = &other.terms[0];
            return self.mul_monomial(r, *e);
        }
        if self.terms.len() == 1 {
            let (e, r) = &self.terms[0];
            return other.mul_monomial(r, *e);
        }
        let mut prods = Vec::with_capacity(self.terms.len() * other.terms.len());
        for (ea, ra) in &self.terms {
            for (eb, rb) in &other.terms {
                prods.push((checked_exp(*ea, *eb), ra * rb));
            }
        }
        Self::from_terms(prods)
    }

    pub fn pow(&self, e: u32) -> Self {
        Coeff::pow(self, e)
    }

    /// Lowest and highest exponent of each variable: `((min_z, max_z), (min_c, max_c))`.
    fn degree_box(&self) -> Option<((i32, i32), (i32, i32))> {
        let first = self.terms.first()?;
        let mut zb = (first.0 .0, first.0 .0);
        let mut cb = (first.0 .1, first.0 .1);
        for ((ez, ec), _) in &self.terms {
            zb = (zb.0.min(*ez), zb.1.max(*ez));
            cb = (cb.0.min(*ec), cb.1.max(*ec));
        }
        Some((zb, cb))
    }

    /// Exact quotient `self / divisor` in the Laurent ring.
    ///
    /// Leading-term division in lex order; every quotient exponent must stay
    /// inside the box fixed by the per-variable degree bounds of `self` and
    /// `divisor`, which makes the loop finite.
    pub fn exact_div(&self, divisor: &Self) -> Result<Self, CoeffError> {
        let not_div = || CoeffError::NotDivisible {
            dividend: self.to_string(),
            divisor: divisor.to_string(),
        };
        if divisor.is_zero() {
            return Err(not_div());
        }
        if self.is_zero() {
            return Ok(Self::zero());
        }
        if divisor.terms.len() == 1 {
            let (e, r) = &divisor.terms[0];
            return Ok(self.mul_monomial(&r.recip(), (-e.0, -e.1)));
        }
        let (az, ac) = self.degree_box().unwrap();
        let (bz, bc) = divisor.degree_box().unwrap();
        let zr = (az.0 - bz.0, az.1 - bz.1);
        let cr = (ac.0 - bc.0, ac.1 - bc.1);
        if zr.0 > zr.1 || cr.0 > cr.1 {
            return Err(not_div());
        }
        let (lead_e, lead_r) = divisor.terms.last().unwrap().clone();
        let mut rem = self.clone();
        let mut quot = Vec::new();
        while let Some((re, rr)) = rem.terms.last().cloned() {
            let te = (re.0 - lead_e.0, re.1 - lead_e.1);
            if te.0 < zr.0 || te.0 > zr.1 || te.1 < cr.0 || te.1 > cr.1 {
                return Err(not_div());
            }
            let tr = &rr / &lead_r;
            rem = rem.sub(&divisor.mul_monomial(&tr, te));
            quot.push((te, tr));
        }
        Ok(Self::from_terms(quot))
    }

    /// Substitute rationals for `z` and `c`.
    pub fn eval(&self, z0: &BigRational, c0: &BigRational) -> Result<BigRational, CoeffError> {
        let mut acc = <BigRational as Zero>::zero();
        for ((ez, ec), r) in &self.terms {
            acc += r * rational_pow(z0, *ez, 'z')? * rational_pow(c0, *ec, 'c')?;
        }
        Ok(acc)
    }

    /// Substitute for whichever of `z`, `c` is given.
    pub fn substitute(
        &self,
        z0: Option<&BigRational>,
        c0: Option<&BigRational>,
    ) -> Result<Self, CoeffError> {
        let mut terms = Vec::with_capacity(self.terms.len());
        for ((ez, ec), r) in &self.terms {
            let mut r = r.clone();
            let mut e = (*ez, *ec);
            if let Some(z0) = z0 {
                r *= rational_pow(z0, e.0, 'z')?;
                e.0 = 0;
            }
            if let Some(c0) = c0 {
                r *= rational_pow(c0, e.1, 'c')?;
                e.1 = 0;
            }
            terms.push((e, r));
        }
        Ok(Self::from_terms(terms))
    }

    /// Substitute for `c` only, keeping `z` symbolic.
    pub fn eval_c(&self, c0: &BigRational) -> Result<Self, CoeffError> {
        let mut terms = Vec::with_capacity(self.terms.len());
        for ((ez, ec), r) in &self.terms {
            terms.push(((*ez, 0), r * rational_pow(c0, *ec, 'c')?));
        }
        Ok(Self::from_terms(terms))
    }
}

fn rational_pow(x: &BigRational, e: i32, var: char) -> Result<BigRational, CoeffError> {
    if e == 0 {
        return Ok(<BigRational as One>::one());
    }
    if Zero::is_zero(x) {
        return if e > 0 {
            Ok(<BigRational as Zero>::zero())
        } else {
            Err(CoeffError::ZeroAtPole { var })
        };
    }
    Ok(num_traits::pow::Pow::pow(x, e))
}

/// `sum_{i=0}^{s-1} z^i c^{s-1-i}`, i.e. `(z^s - c^s)/(z - c)`.
pub fn geometric_weight(s: u32) -> LaurentPoly {
    assert!(s >= 1, "geometric_weight needs s >= 1");
    let s = s as i32;
    LaurentPoly::from_terms((0..s).map(|i| ((i, s - 1 - i), <BigRational as One>::one())))
}

impl Coeff for LaurentPoly {
    fn zero() -> Self {
        LaurentPoly::zero()
    }
    fn one() -> Self {
        LaurentPoly::one()
    }
    fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
    fn from_rational(r: BigRational) -> Self {
        LaurentPoly::constant(r)
    }
    fn add_ref(&self, other: &Self) -> Self {
        self.add(other)
    }
    fn sub_ref(&self, other: &Self) -> Self {
        self.sub(other)
    }
    fn mul_ref(&self, other: &Self) -> Self {
        self.mul(other)
    }
    fn neg_ref(&self) -> Self {
        self.neg()
    }
    fn unit_inverse(&self) -> Option<Self> {
        match self.terms.as_slice() {
            [(e, r)] => Some(LaurentPoly::monomial(r.recip(), -e.0, -e.1)),
            _ => None,
        }
    }
    fn exact_div(&self, divisor: &Self) -> Result<Self, CoeffError> {
        LaurentPoly::exact_div(self, divisor)
    }
}

impl fmt::Debug for LaurentPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "LaurentPoly({self})")
    }
}

fn var_power(name: &str, e: i32) -> Option<String> {
    match e {
        0 => None,
        1 => Some(name.to_string()),
        _ => Some(format!("{name}^{e}")),
    }
}

/// Canonical rendering: graded by total degree ascending, then `e_z` descending.
impl fmt::Display for LaurentPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut order: Vec<&(Exp, BigRational)> = self.terms.iter().collect();
        order.sort_by_key(|((ez, ec), _)| (ez + ec, -ez));
        for (i, ((ez, ec), r)) in order.into_iter().enumerate() {
            let negative = r.is_negative();
            if i == 0 {
                if negative {
                    write!(f, "-")?;
                }
            } else {
                write!(f, "{}", if negative { " - " } else { " + " })?;
            }
            let mag = r.abs();
            let mut factors: Vec<String> = Vec::new();
            if !mag.is_one() || (*ez == 0 && *ec == 0) {
                factors.push(fmt_rational(&mag));
            }
            factors.extend(var_power("z", *ez));
            factors.extend(var_power("c", *ec));
            write!(f, "{}", factors.join("*"))?;
        }
        Ok(())
    }
}

impl std::ops::Add for &LaurentPoly {
    type Output = LaurentPoly;
    fn add(self, rhs: Self) -> LaurentPoly {
        LaurentPoly::add(self, rhs)
    }
}

impl std::ops::Sub for &LaurentPoly {
    type Output = LaurentPoly;
    fn sub(self, rhs: Self) -> LaurentPoly {
        LaurentPoly::sub(self, rhs)
    }
}

impl std::ops::Mul for &LaurentPoly {
    type Output = LaurentPoly;
    fn mul(self, rhs: Self) -> LaurentPoly {
        LaurentPoly::mul(self, rhs)
    }
}

impl std::ops::Neg for &LaurentPoly {
    type Output = LaurentPoly;
    fn neg(self) -> LaurentPoly {
        LaurentPoly::neg(self)
    }
}

/// Binomial coefficient as a big integer.
pub fn binomial(n: u64, k: u64) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigInt::one();
    for i in 0..k {
        acc = acc * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(terms: &[((i32, i32), i64)]) -> LaurentPoly {
        LaurentPoly::from_terms(terms.iter().map(|(e, r)| (*e, int(*r))))
    }

    #[test]
    fn combine_examples() {
        let one_plus_z = p(&[((0, 0), 1), ((1, 0), 1)]);
        let one_minus_z = p(&[((0, 0), 1), ((1, 0), -1)]);
        assert_eq!(one_plus_z.mul(&one_minus_z), p(&[((0, 0), 1), ((2, 0), -1)]));
        let one_minus_c = p(&[((0, 0), 1), ((0, 1), -1)]);
        assert_eq!(one_minus_c.add(&LaurentPoly::c()), LaurentPoly::one());
        let zinv = p(&[((-1, 0), 1)]);
        assert_eq!(zinv.mul(&LaurentPoly::z()), LaurentPoly::one());
    }

    #[test]
    fn exact_division_examples() {
        let one_minus_c = p(&[((0, 0), 1), ((0, 1), -1)]);
        let a = p(&[((0, 0), 1), ((0, 2), -1)]);
        assert_eq!(a.exact_div(&one_minus_c).unwrap(), p(&[((0, 0), 1), ((0, 1), 1)]));
        let z2c2 = p(&[((2, 0), 1), ((0, 2), -1)]);
        let zmc = p(&[((1, 0), 1), ((0, 1), -1)]);
        assert_eq!(z2c2.exact_div(&zmc).unwrap(), p(&[((1, 0), 1), ((0, 1), 1)]));
        let one_plus_c = p(&[((0, 0), 1), ((0, 1), 1)]);
        assert!(matches!(
            one_plus_c.exact_div(&one_minus_c),
            Err(CoeffError::NotDivisible { .. })
        ));
    }

    #[test]
    fn exact_division_with_negative_exponents() {
        let a = p(&[((-2, 1), 3), ((0, -1), 1)]);
        let b = p(&[((1, 1), 1), ((-1, 0), -2), ((0, 3), 5)]);
        assert_eq!(a.mul(&b).exact_div(&b).unwrap(), a);
    }

    #[test]
    fn eval_examples() {
        let one_minus_c = p(&[((0, 0), 1), ((0, 1), -1)]);
        assert_eq!(one_minus_c.eval(&int(5), &int(1)).unwrap(), int(0));
        let zc = p(&[((1, 0), 1), ((0, 1), 1)]);
        assert_eq!(zc.eval(&rat(1, 2), &rat(1, 3)).unwrap(), rat(5, 6));
        let zinv = p(&[((-1, 0), 1)]);
        assert_eq!(zinv.eval(&int(0), &int(1)), Err(CoeffError::ZeroAtPole { var: 'z' }));
    }

    #[test]
    fn geometric_weight_examples() {
        assert_eq!(geometric_weight(1), LaurentPoly::one());
        assert_eq!(geometric_weight(2).to_string(), "z + c");
        assert_eq!(geometric_weight(3).to_string(), "z^2 + z*c + c^2");
    }

    #[test]
    fn geometric_weight_telescopes() {
        let zmc = p(&[((1, 0), 1), ((0, 1), -1)]);
        for s in 1..=50 {
            let expect = p(&[((s, 0), 1), ((0, s), -1)]);
            assert_eq!(zmc.mul(&geometric_weight(s as u32)), expect);
        }
    }

    #[test]
    fn rendering() {
        assert_eq!(p(&[((0, -1), 1)]).to_string(), "c^-1");
        assert_eq!(p(&[((0, 0), 1), ((2, 0), -1)]).to_string(), "1 - z^2");
        assert_eq!(LaurentPoly::monomial(rat(-3, 2), 1, 1).to_string(), "-3/2*z*c");
        assert_eq!(LaurentPoly::zero().to_string(), "0");
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(5, 2), BigInt::from(10));
        assert_eq!(binomial(3, 5), BigInt::from(0));
    }
}
