//! Truncated power series in `q` over an exact coefficient ring.
//!
//! A [`QSeries`] of order `N` stores the dense coefficients of `q^0..=q^N`.
//! Products skip zero coefficients, so multiplying or dividing by a sparse
//! factor such as `1 - x q^k` costs `O(N)` ring operations.

use std::fmt;

use num_traits::Signed;
use thiserror::Error;

use crate::coeffring::{fmt_rational, BigRational, Coeff, CoeffError, LaurentPoly};

/// Symbolic mode: coefficients are Laurent polynomials in `z`, `c`.
pub type SymbolicSeries = QSeries<LaurentPoly>;
/// Specialized mode: parameters replaced by rationals.
pub type RationalSeries = QSeries<BigRational>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SeriesError {
    #[error("order mismatch: {0} vs {1}")]
    OrderMismatch(usize, usize),
    #[error("mode mismatch: symbolic series combined with specialized series")]
    ModeMismatch,
    #[error("constant term {0} is not invertible")]
    NonInvertibleConstantTerm(String),
    #[error("infinite product with argument {0} does not truncate (argument has no positive q-power)")]
    NonTruncatingInfiniteProduct(String),
    #[error("coefficient of q^{power} not divisible: {source}")]
    NotDivisible { power: usize, source: CoeffError },
}

/// `coef * q^e_q`; the argument of a Pochhammer symbol.
#[derive(Debug, Clone, PartialEq)]
pub struct Monomial<R> {
    pub coef: R,
    pub e_q: i64,
}

impl<R: Coeff> Monomial<R> {
    pub fn new(coef: R, e_q: i64) -> Self {
        Self { coef, e_q }
    }

    pub fn q_power(e_q: i64) -> Self {
        Self::new(R::one(), e_q)
    }

    pub fn mul(&self, other: &Self) -> Self {
        Self::new(self.coef.mul_ref(&other.coef), self.e_q + other.e_q)
    }

    /// The monomial as a series; zero when `e_q > order`.
    pub fn to_series(&self, order: usize) -> QSeries<R> {
        assert!(self.e_q >= 0, "negative q-power in a series");
        let mut s = QSeries::zero(order);
        if (self.e_q as usize) <= order {
            s.coeffs[self.e_q as usize] = self.coef.clone();
        }
        s
    }
}

/// Length of a Pochhammer product.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Count {
    Finite(u64),
    Infinite,
}

#[derive(Clone, PartialEq)]
pub struct QSeries<R> {
    coeffs: Vec<R>,
}

impl<R: Coeff> QSeries<R> {
    pub fn zero(order: usize) -> Self {
        Self {
            coeffs: vec![R::zero(); order + 1],
        }
    }

    pub fn one(order: usize) -> Self {
        Self::constant(R::one(), order)
    }

    pub fn constant(r: R, order: usize) -> Self {
        let mut s = Self::zero(order);
        s.coeffs[0] = r;
        s
    }

    /// Takes `coeffs[0..=order]`, padding with zeros.
    pub fn from_coeffs(mut coeffs: Vec<R>, order: usize) -> Self {
        coeffs.resize(order + 1, R::zero());
        Self { coeffs }
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[R] {
        &self.coeffs
    }

    pub fn coeff(&self, k: usize) -> &R {
        &self.coeffs[k]
    }

    pub fn set_coeff(&mut self, k: usize, r: R) {
        self.coeffs[k] = r;
    }

    pub fn into_coeffs(self) -> Vec<R> {
        self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Coeff::is_zero)
    }

    /// Index of the first nonzero coefficient.
    pub fn valuation(&self) -> Option<usize> {
        self.coeffs.iter().position(|c| !c.is_zero())
    }

    fn nonzero(&self) -> Vec<(usize, &R)> {
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .collect()
    }

    fn check_order(&self, other: &Self) -> Result<(), SeriesError> {
        if self.order() != other.order() {
            Err(SeriesError::OrderMismatch(self.order(), other.order()))
        } else {
            Ok(())
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self, SeriesError> {
        self.check_order(other)?;
        Ok(self.add_unchecked(other))
    }

    pub fn sub(&self, other: &Self) -> Result<Self, SeriesError> {
        self.check_order(other)?;
        Ok(Self {
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a.sub_ref(b))
                .collect(),
        })
    }

    pub fn mul(&self, other: &Self) -> Result<Self, SeriesError> {
        self.check_order(other)?;
        Ok(self.mul_unchecked(other))
    }

    pub(crate) fn add_unchecked(&self, other: &Self) -> Self {
        Self {
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a.add_ref(b))
                .collect(),
        }
    }

    pub fn add_assign(&mut self, other: &Self) {
        for (a, b) in self.coeffs.iter_mut().zip(&other.coeffs) {
            if !b.is_zero() {
                a.add_assign_ref(b);
            }
        }
    }

    /// Truncated Cauchy product; iterates the sparser operand's support.
    pub(crate) fn mul_unchecked(&self, other: &Self) -> Self {
        let n = self.order().min(other.order());
        let a = self.nonzero();
        let b = other.nonzero();
        let mut out = Self::zero(n);
        let (outer, inner) = if a.len() <= b.len() { (a, b) } else { (b, a) };
        for (i, x) in &outer {
            for (j, y) in &inner {
                if i + j > n {
                    break;
                }
                let p = x.mul_ref(y);
                out.coeffs[i + j].add_assign_ref(&p);
            }
        }
        out
    }

    pub fn neg(&self) -> Self {
        Self {
            coeffs: self.coeffs.iter().map(Coeff::neg_ref).collect(),
        }
    }

    pub fn scale(&self, r: &R) -> Self {
        Self {
            coeffs: self
                .coeffs
                .iter()
                .map(|c| if c.is_zero() { R::zero() } else { c.mul_ref(r) })
                .collect(),
        }
    }

    /// Keep `q^0..=q^m`; `m` may exceed the current order only if the extra
    /// coefficients are known to be zero, so callers pass `m <= order`.
    pub fn truncate(&self, m: usize) -> Self {
        assert!(m <= self.order(), "cannot extend a truncated series");
        Self {
            coeffs: self.coeffs[..=m].to_vec(),
        }
    }

    /// Multiply by `q^e`, keeping or changing the order to `order`.
    pub fn shift(&self, e: usize, order: usize) -> Self {
        let mut out = Self::zero(order);
        for (k, c) in self.coeffs.iter().enumerate() {
            if k + e > order {
                break;
            }
            out.coeffs[k + e] = c.clone();
        }
        out
    }

    /// Divide by `q^e`; the lowest `e` coefficients must be zero.
    pub fn unshift(&self, e: usize) -> Self {
        debug_assert!(self.coeffs[..e.min(self.coeffs.len())].iter().all(Coeff::is_zero));
        Self {
            coeffs: self.coeffs[e..].to_vec(),
        }
    }

    /// `self * (1 - x q^k)`.
    pub fn mul_binomial(&self, x: &R, k: usize) -> Self {
        let mut out = self.clone();
        if x.is_zero() {
            return out;
        }
        for i in (k..=self.order()).rev() {
            let src = &self.coeffs[i - k];
            if !src.is_zero() {
                out.coeffs[i].sub_assign_ref(&src.mul_ref(x));
            }
        }
        out
    }

    /// `self / (1 - x q^k)` for `k >= 1`.
    pub fn div_binomial(&self, x: &R, k: usize) -> Self {
        assert!(k >= 1, "div_binomial needs a positive q-power");
        let mut out = self.clone();
        if x.is_zero() {
            return out;
        }
        for i in k..=self.order() {
            if !out.coeffs[i - k].is_zero() {
                let t = out.coeffs[i - k].mul_ref(x);
                out.coeffs[i].add_assign_ref(&t);
            }
        }
        out
    }

    /// `self / d`; the constant term of `d` must be a unit.
    pub fn div(&self, d: &Self) -> Result<Self, SeriesError> {
        self.check_order(d)?;
        let inv0 = d.coeffs[0]
            .unit_inverse()
            .ok_or_else(|| SeriesError::NonInvertibleConstantTerm(d.coeffs[0].to_string()))?;
        let tail: Vec<(usize, &R)> = d.nonzero().into_iter().filter(|(j, _)| *j > 0).collect();
        let n = self.order();
        let mut out: Vec<R> = Vec::with_capacity(n + 1);
        for i in 0..=n {
            let mut acc = self.coeffs[i].clone();
            for (j, dj) in &tail {
                if *j > i {
                    break;
                }
                let r = &out[i - j];
                if !r.is_zero() {
                    acc.sub_assign_ref(&dj.mul_ref(r));
                }
            }
            out.push(if acc.is_zero() { acc } else { acc.mul_ref(&inv0) });
        }
        Ok(Self { coeffs: out })
    }

    pub fn invert(&self) -> Result<Self, SeriesError> {
        Self::one(self.order()).div(self)
    }

    /// Substitute `q -> q^m`. Source coefficients past `order/m` are lost;
    /// the returned flag reports whether a nonzero one was dropped.
    pub fn reindex(&self, m: usize) -> (Self, Option<String>) {
        assert!(m >= 1, "reindex needs m >= 1");
        let n = self.order();
        let mut out = Self::zero(n);
        let mut warning = None;
        for (j, c) in self.coeffs.iter().enumerate() {
            if j * m <= n {
                out.coeffs[j * m] = c.clone();
            } else if !c.is_zero() && warning.is_none() {
                warning = Some(format!(
                    "source degree {j} maps to {} beyond order {n}",
                    j * m
                ));
            }
        }
        (out, warning)
    }

    /// Divide every coefficient exactly by `p`.
    pub fn scalar_exact_div(&self, p: &R) -> Result<Self, SeriesError> {
        let mut out = Vec::with_capacity(self.coeffs.len());
        for (power, c) in self.coeffs.iter().enumerate() {
            out.push(
                c.exact_div(p)
                    .map_err(|source| SeriesError::NotDivisible { power, source })?,
            );
        }
        Ok(Self { coeffs: out })
    }

    pub fn map<S: Coeff, E>(&self, f: impl Fn(&R) -> Result<S, E>) -> Result<QSeries<S>, E> {
        Ok(QSeries {
            coeffs: self.coeffs.iter().map(f).collect::<Result<_, _>>()?,
        })
    }

    /// `(power, coefficient)` pairs for nonzero coefficients.
    pub fn dump(&self) -> Vec<(usize, String)> {
        self.nonzero()
            .into_iter()
            .map(|(k, c)| (k, c.to_string()))
            .collect()
    }
}

impl SymbolicSeries {
    /// Specialize `z`, `c` to rationals.
    pub fn eval_at(&self, z0: &BigRational, c0: &BigRational) -> Result<RationalSeries, CoeffError> {
        self.map(|p| p.eval(z0, c0))
    }
}

impl RationalSeries {
    pub fn to_symbolic(&self) -> SymbolicSeries {
        self.map::<LaurentPoly, ()>(|r| Ok(LaurentPoly::constant(r.clone())))
            .expect("infallible")
    }
}

/// `prod_{j=0}^{count-1} (1 - x q^{e_q + base*j})` truncated at `order`.
pub fn poch<R: Coeff>(
    x: &Monomial<R>,
    count: Count,
    base: usize,
    order: usize,
) -> Result<QSeries<R>, SeriesError> {
    assert!(base >= 1, "Pochhammer base must be positive");
    assert!(x.e_q >= 0, "Pochhammer argument with negative q-power");
    let e0 = x.e_q as usize;
    let limit = match count {
        Count::Finite(n) => n,
        Count::Infinite => {
            if x.e_q == 0 {
                return Err(SeriesError::NonTruncatingInfiniteProduct(format!(
                    "{}",
                    x.coef
                )));
            }
            u64::MAX
        }
    };
    let mut s = QSeries::one(order);
    let mut j: u64 = 0;
    while j < limit {
        let deg = e0 + base * j as usize;
        if deg > order {
            break;
        }
        s = s.mul_binomial(&x.coef, deg);
        j += 1;
    }
    Ok(s)
}

/// Gaussian binomial `[n over k]` in `q^base`, by the q-Pascal recurrence
/// `[n k] = [n-1 k] + q^{n-k} [n-1 k-1]`.
pub fn qbin<R: Coeff>(n: i64, k: i64, base: usize, order: usize) -> QSeries<R> {
    if k < 0 || n < 0 || k > n {
        return QSeries::zero(order);
    }
    let (n, k) = (n as usize, k as usize);
    // row[j] = [i over j]
    let mut row: Vec<QSeries<R>> = vec![QSeries::one(order)];
    for i in 1..=n {
        let mut next = Vec::with_capacity(row.len() + 1);
        for j in 0..=i.min(k) {
            let left = if j < row.len() && j < i {
                row[j].clone()
            } else {
                QSeries::zero(order)
            };
            let val = if j == 0 {
                left
            } else {
                let shifted = row[j - 1].shift(base * (i - j), order);
                left.add_unchecked(&shifted)
            };
            next.push(val);
        }
        row = next;
    }
    row.swap_remove(k)
}

fn coeff_string<R: Coeff>(c: &R) -> (bool, String) {
    let s = c.to_string();
    if s.contains(' ') {
        (false, format!("({s})"))
    } else if let Some(rest) = s.strip_prefix('-') {
        (true, rest.to_string())
    } else {
        (false, s)
    }
}

/// `c0 + c1*q + c2*q^2 + ...` with multi-term coefficients parenthesized.
impl<R: Coeff> fmt::Display for QSeries<R> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (k, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let (neg, mag) = coeff_string(c);
            if first {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, "{}", if neg { " - " } else { " + " })?;
            }
            first = false;
            let qpart = match k {
                0 => String::new(),
                1 => "q".to_string(),
                _ => format!("q^{k}"),
            };
            match (k, mag.as_str()) {
                (0, m) => write!(f, "{m}")?,
                (_, "1") => write!(f, "{qpart}")?,
                (_, m) => write!(f, "{m}*{qpart}")?,
            }
        }
        if first {
            write!(f, "0")?;
        }
        write!(f, " + O(q^{})", self.order() + 1)
    }
}

impl<R: Coeff> fmt::Debug for QSeries<R> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "QSeries({self})")
    }
}

/// Either coefficient ring, for callers that pick the mode at run time.
#[derive(Debug, Clone, PartialEq)]
pub enum AnySeries {
    Symbolic(SymbolicSeries),
    Specialized(RationalSeries),
}

impl AnySeries {
    pub fn order(&self) -> usize {
        match self {
            AnySeries::Symbolic(s) => s.order(),
            AnySeries::Specialized(s) => s.order(),
        }
    }

    pub fn arith(&self, op: ArithOp, other: &AnySeries) -> Result<AnySeries, SeriesError> {
        fn go<R: Coeff>(op: ArithOp, a: &QSeries<R>, b: &QSeries<R>) -> Result<QSeries<R>, SeriesError> {
            match op {
                ArithOp::Add => a.add(b),
                ArithOp::Sub => a.sub(b),
                ArithOp::Mul => a.mul(b),
            }
        }
        match (self, other) {
            (AnySeries::Symbolic(a), AnySeries::Symbolic(b)) => Ok(AnySeries::Symbolic(go(op, a, b)?)),
            (AnySeries::Specialized(a), AnySeries::Specialized(b)) => {
                Ok(AnySeries::Specialized(go(op, a, b)?))
            }
            _ => Err(SeriesError::ModeMismatch),
        }
    }

    pub fn dump(&self) -> Vec<(usize, String)> {
        match self {
            AnySeries::Symbolic(s) => s.dump(),
            AnySeries::Specialized(s) => s.dump(),
        }
    }
}

impl fmt::Display for AnySeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AnySeries::Symbolic(s) => write!(f, "{s}"),
            AnySeries::Specialized(s) => write!(f, "{s}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
}

/// Rational as display text, re-exported for report code.
pub fn rational_text(r: &BigRational) -> String {
    if r.is_negative() {
        format!("-{}", fmt_rational(&-r))
    } else {
        fmt_rational(r)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeffring::int;

    fn rs(v: &[i64], order: usize) -> RationalSeries {
        QSeries::from_coeffs(v.iter().map(|&x| int(x)).collect(), order)
    }

    #[test]
    fn arith_examples() {
        let a = rs(&[1, 1], 3);
        let b = rs(&[1, -1], 3);
        assert_eq!(a.mul(&b).unwrap(), rs(&[1, 0, -1], 3));
        let g = rs(&[1, 1, 1, 1, 1], 4);
        let h = rs(&[1, -1, 1, -1, 1], 4);
        assert_eq!(g.add(&h).unwrap(), rs(&[2, 0, 2, 0, 2], 4));
        let q3 = rs(&[0, 0, 0, 1], 5);
        assert!(q3.mul(&q3).unwrap().is_zero());
        assert_eq!(rs(&[1], 3).add(&rs(&[1], 4)), Err(SeriesError::OrderMismatch(3, 4)));
    }

    #[test]
    fn mode_mismatch() {
        let a = AnySeries::Specialized(rs(&[1], 2));
        let b = AnySeries::Symbolic(SymbolicSeries::one(2));
        assert_eq!(a.arith(ArithOp::Add, &b), Err(SeriesError::ModeMismatch));
    }

    #[test]
    fn invert_examples() {
        assert_eq!(rs(&[1, -1], 3).invert().unwrap(), rs(&[1, 1, 1, 1], 3));
        let mut s = SymbolicSeries::one(2);
        s.set_coeff(1, LaurentPoly::c().neg());
        let inv = s.invert().unwrap();
        assert_eq!(inv.coeff(1), &LaurentPoly::c());
        assert_eq!(inv.coeff(2), &LaurentPoly::c().pow(2));
        assert!(matches!(
            rs(&[0, 1, 1], 3).invert(),
            Err(SeriesError::NonInvertibleConstantTerm(_))
        ));
        let mut t = SymbolicSeries::one(2);
        t.set_coeff(0, LaurentPoly::one().sub(&LaurentPoly::c()));
        assert!(matches!(t.invert(), Err(SeriesError::NonInvertibleConstantTerm(_))));
    }

    #[test]
    fn poch_examples() {
        let q = Monomial::<BigRational>::q_power(1);
        let e = poch(&q, Count::Infinite, 1, 6).unwrap();
        assert_eq!(e, rs(&[1, -1, -1, 0, 0, 1, 0], 6));
        assert_eq!(poch(&q, Count::Finite(0), 1, 4).unwrap(), rs(&[1], 4));
        let mq = Monomial::new(int(-1), 1);
        assert_eq!(poch(&mq, Count::Finite(2), 1, 4).unwrap(), rs(&[1, 1, 1, 1], 4));
        let c = Monomial::new(int(3), 0);
        assert!(matches!(
            poch(&c, Count::Infinite, 1, 4),
            Err(SeriesError::NonTruncatingInfiniteProduct(_))
        ));
    }

    #[test]
    fn qbin_examples() {
        assert_eq!(qbin::<BigRational>(2, 1, 1, 5), rs(&[1, 1], 5));
        assert_eq!(qbin::<BigRational>(4, 2, 1, 6), rs(&[1, 1, 2, 1, 1], 6));
        assert!(qbin::<BigRational>(3, 5, 1, 6).is_zero());
        assert_eq!(qbin::<BigRational>(2, 1, 2, 5), rs(&[1, 0, 1], 5));
    }

    #[test]
    fn reindex_examples() {
        let a = rs(&[1, 1, 1], 4);
        assert_eq!(a.reindex(2).0, rs(&[1, 0, 1, 0, 1], 4));
        assert_eq!(a.reindex(1).0, a);
        let (r, w) = rs(&[0, 0, 0, 1], 4).reindex(2);
        assert!(r.is_zero());
        assert!(w.unwrap().contains("source degree 3"));
    }

    #[test]
    fn scalar_exact_div_examples() {
        let one_minus_c = LaurentPoly::one().sub(&LaurentPoly::c());
        let base = SymbolicSeries::from_coeffs(
            vec![LaurentPoly::zero(), LaurentPoly::one(), LaurentPoly::one()],
            2,
        );
        let scaled = base.scale(&one_minus_c);
        assert_eq!(scaled.scalar_exact_div(&one_minus_c).unwrap(), base);

        // 1 - (q)_inf/(cq)_inf at order 1 is (1 - c) q; quotient is FFW(c,1) = 1
        let n = 1;
        let qinf = poch(&Monomial::<LaurentPoly>::q_power(1), Count::Infinite, 1, n).unwrap();
        let cq = poch(&Monomial::new(LaurentPoly::c(), 1), Count::Infinite, 1, n).unwrap();
        let ratio = SymbolicSeries::one(n).sub(&qinf.div(&cq).unwrap()).unwrap();
        let ffw = ratio.scalar_exact_div(&one_minus_c).unwrap();
        assert_eq!(ffw.coeff(1), &LaurentPoly::one());

        let one_plus_q = SymbolicSeries::from_coeffs(vec![LaurentPoly::one(), LaurentPoly::one()], 1);
        assert!(matches!(
            one_plus_q.scalar_exact_div(&one_minus_c),
            Err(SeriesError::NotDivisible { power: 0, .. })
        ));
    }

    #[test]
    fn display() {
        assert_eq!(rs(&[1, -1, -1, 0, 0, 1], 5).to_string(), "1 - q - q^2 + q^5 + O(q^6)");
        let mut s = SymbolicSeries::zero(2);
        s.set_coeff(2, LaurentPoly::z().add(&LaurentPoly::c()));
        assert_eq!(s.to_string(), "(z + c)*q^2 + O(q^3)");
    }
}
