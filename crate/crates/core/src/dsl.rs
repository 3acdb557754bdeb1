//! A small expression language for q-series.
//!
//! ```text
//! expr   := term (("+"|"-") term)*
//! term   := factor (("*"|"/") factor)*
//! factor := "-" factor | atom ("^" exponent)?
//! atom   := NUMBER | IDENT | "(" expr ")"
//!         | "poch(" expr "," (expr|"inf") ("," "q^" NUMBER)? ")"
//!         | "qbin(" expr "," expr ("," "q^" NUMBER)? ")"
//!         | "sum(" IDENT "=" expr ".." (expr|"inf") "," expr ")"
//!         | "chi12(" expr ")"
//! exponent := "-"? (NUMBER | IDENT | "(" expr ")")
//! ```
//!
//! Index positions (exponents, bounds, Pochhammer lengths) are evaluated as
//! exact rationals in the bound summation variables and must be integers.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive};
use thiserror::Error;

use crate::coeffring::{CoeffError, Coeff, LaurentPoly};
use crate::qseries::{Monomial, QSeries, SeriesError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}, column {col}: expected {}, found {found}", expected.join(" or "))]
pub struct SyntaxError {
    pub line: usize,
    pub col: usize,
    pub expected: Vec<String>,
    pub found: String,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DslError {
    #[error("syntax error: {0}")]
    Syntax(#[from] SyntaxError),
    #[error("unbound variable `{0}`")]
    Unbound(String),
    #[error("index `{expr}` is not an integer ({value})")]
    NonIntegerIndex { expr: String, value: String },
    #[error("sum over `{var}` did not converge within {terms} terms")]
    NonConvergent { var: String, terms: usize },
    #[error("constant term {0} is not invertible")]
    NonInvertibleConstantTerm(String),
    #[error("coefficient of q^{power} not divisible: {source}")]
    NotDivisible { power: usize, source: CoeffError },
    #[error("Pochhammer argument `{0}` is not a monomial")]
    NotMonomial(String),
    #[error("Pochhammer length {0} is negative")]
    NegativeLength(i64),
    #[error("result has negative q-valuation {0}")]
    NegativeValuation(i64),
    #[error("precision lost: only known through q^{0}")]
    PrecisionLoss(i64),
}

impl From<SeriesError> for DslError {
    fn from(e: SeriesError) -> Self {
        match e {
            SeriesError::NotDivisible { power, source } => DslError::NotDivisible { power, source },
            SeriesError::NonInvertibleConstantTerm(s) => DslError::NonInvertibleConstantTerm(s),
            other => DslError::NonInvertibleConstantTerm(other.to_string()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(BigRational),
    Var(String),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, Box<Expr>),
    /// `(arg; q^base)_count`, `count = None` for infinity.
    Poch {
        arg: Box<Expr>,
        count: Option<Box<Expr>>,
        base: u32,
    },
    QBin {
        n: Box<Expr>,
        k: Box<Expr>,
        base: u32,
    },
    Sum {
        var: String,
        lo: Box<Expr>,
        hi: Option<Box<Expr>>,
        body: Box<Expr>,
    },
    Chi12(Box<Expr>),
}

impl Expr {
    /// Free identifiers other than `q`, excluding summation variables.
    pub fn free_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_free(&mut Vec::new(), &mut out);
        out
    }

    fn collect_free(&self, bound: &mut Vec<String>, out: &mut BTreeSet<String>) {
        use Expr::*;
        match self {
            Num(_) => {}
            Var(v) => {
                if v != "q" && !bound.contains(v) {
                    out.insert(v.clone());
                }
            }
            Neg(a) | Chi12(a) => a.collect_free(bound, out),
            Add(a, b) | Sub(a, b) | Mul(a, b) | Div(a, b) | Pow(a, b) => {
                a.collect_free(bound, out);
                b.collect_free(bound, out);
            }
            Poch { arg, count, .. } => {
                arg.collect_free(bound, out);
                if let Some(c) = count {
                    c.collect_free(bound, out);
                }
            }
            QBin { n, k, .. } => {
                n.collect_free(bound, out);
                k.collect_free(bound, out);
            }
            Sum { var, lo, hi, body } => {
                lo.collect_free(bound, out);
                if let Some(h) = hi {
                    h.collect_free(bound, out);
                }
                bound.push(var.clone());
                body.collect_free(bound, out);
                bound.pop();
            }
        }
    }

    fn is_atom(&self) -> bool {
        match self {
            Expr::Num(r) => r.is_integer() && !r.is_negative(),
            Expr::Var(_)
            | Expr::Poch { .. }
            | Expr::QBin { .. }
            | Expr::Sum { .. }
            | Expr::Chi12(_) => true,
            _ => false,
        }
    }

    fn fmt_prec(&self, f: &mut fmt::Formatter<'_>, prec: u8) -> fmt::Result {
        use Expr::*;
        let own = match self {
            Add(..) | Sub(..) => 1,
            Mul(..) | Div(..) => 2,
            Neg(_) => 3,
            _ => 4,
        };
        let paren = own < prec || (matches!(self, Num(_)) && !self.is_atom());
        if paren {
            write!(f, "(")?;
        }
        match self {
            Num(r) => {
                if r.is_integer() {
                    write!(f, "{}", r.numer())?
                } else {
                    write!(f, "{}/{}", r.numer(), r.denom())?
                }
            }
            Var(v) => write!(f, "{v}")?,
            Neg(a) => {
                write!(f, "-")?;
                a.fmt_prec(f, 3)?;
            }
            Add(a, b) | Sub(a, b) => {
                a.fmt_prec(f, 1)?;
                write!(f, "{}", if matches!(self, Add(..)) { " + " } else { " - " })?;
                b.fmt_prec(f, 2)?;
            }
            Mul(a, b) | Div(a, b) => {
                a.fmt_prec(f, 2)?;
                write!(f, "{}", if matches!(self, Mul(..)) { "*" } else { "/" })?;
                b.fmt_prec(f, 3)?;
            }
            Pow(a, e) => {
                if a.is_atom() {
                    a.fmt_prec(f, 4)?;
                } else {
                    write!(f, "({a})")?;
                }
                write!(f, "^")?;
                match e.as_ref() {
                    Num(_) | Var(_) if e.is_atom() => write!(f, "{e}")?,
                    Neg(inner) if matches!(inner.as_ref(), Var(_)) || (matches!(inner.as_ref(), Num(_)) && inner.is_atom()) => {
                        write!(f, "-{inner}")?
                    }
                    _ => write!(f, "({e})")?,
                }
            }
            Poch { arg, count, base } => {
                write!(f, "poch({arg}, ")?;
                match count {
                    Some(c) => write!(f, "{c}")?,
                    None => write!(f, "inf")?,
                }
                if *base != 1 {
                    write!(f, ", q^{base}")?;
                }
                write!(f, ")")?;
            }
            QBin { n, k, base } => {
                write!(f, "qbin({n}, {k}")?;
                if *base != 1 {
                    write!(f, ", q^{base}")?;
                }
                write!(f, ")")?;
            }
            Sum { var, lo, hi, body } => {
                write!(f, "sum({var}={lo}..")?;
                match hi {
                    Some(h) => write!(f, "{h}")?,
                    None => write!(f, "inf")?,
                }
                write!(f, ", {body})")?;
            }
            Chi12(a) => write!(f, "chi12({a})")?,
        }
        if paren {
            write!(f, ")")?;
        }
        Ok(())
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_prec(f, 0)
    }
}

impl std::str::FromStr for Expr {
    type Err = SyntaxError;

    fn from_str(s: &str) -> Result<Self, SyntaxError> {
        parse(s)
    }
}

// ---------------------------------------------------------------------------
// lexer and parser

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(BigInt),
    Ident(String),
    Sym(&'static str),
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Num(n) => write!(f, "number {n}"),
            Tok::Ident(s) => write!(f, "`{s}`"),
            Tok::Sym(s) => write!(f, "`{s}`"),
            Tok::Eof => write!(f, "end of input"),
        }
    }
}

#[derive(Debug, Clone)]
struct Spanned {
    tok: Tok,
    line: usize,
    col: usize,
}

fn lex(text: &str) -> Result<Vec<Spanned>, SyntaxError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0, 1, 1);
    while i < chars.len() {
        let ch = chars[i];
        let (l0, c0) = (line, col);
        if ch == '\n' {
            line += 1;
            col = 1;
            i += 1;
            continue;
        }
        if ch.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        let start = i;
        let tok = if ch.is_ascii_digit() {
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let s: String = chars[start..i].iter().collect();
            Tok::Num(s.parse().expect("digits"))
        } else if ch.is_ascii_alphabetic() || ch == '_' {
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            Tok::Ident(chars[start..i].iter().collect())
        } else if ch == '.' && chars.get(i + 1) == Some(&'.') {
            i += 2;
            Tok::Sym("..")
        } else {
            let sym = match ch {
                '+' => "+",
                '-' => "-",
                '*' => "*",
                '/' => "/",
                '^' => "^",
                '(' => "(",
                ')' => ")",
                ',' => ",",
                '=' => "=",
                _ => {
                    return Err(SyntaxError {
                        line,
                        col,
                        expected: vec!["a token".into()],
                        found: format!("`{ch}`"),
                    })
                }
            };
            i += 1;
            Tok::Sym(sym)
        };
        col += i - start;
        out.push(Spanned { tok, line: l0, col: c0 });
    }
    out.push(Spanned {
        tok: Tok::Eof,
        line,
        col,
    });
    Ok(out)
}

const KEYWORDS: &[&str] = &["poch", "qbin", "sum", "chi12", "inf"];

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
    expected: BTreeSet<String>,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        self.expected.clear();
        t
    }

    fn check_sym(&mut self, s: &'static str) -> bool {
        self.expected.insert(format!("`{s}`"));
        self.peek() == &Tok::Sym(s)
    }

    fn eat_sym(&mut self, s: &'static str) -> bool {
        if self.check_sym(s) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect_sym(&mut self, s: &'static str) -> Result<(), SyntaxError> {
        if self.eat_sym(s) {
            Ok(())
        } else {
            Err(self.error())
        }
    }

    fn check_ident(&mut self, name: &str) -> bool {
        self.expected.insert(format!("`{name}`"));
        matches!(self.peek(), Tok::Ident(s) if s == name)
    }

    fn error(&self) -> SyntaxError {
        let sp = &self.toks[self.pos];
        SyntaxError {
            line: sp.line,
            col: sp.col,
            expected: self.expected.iter().cloned().collect(),
            found: sp.tok.to_string(),
        }
    }

    fn expr(&mut self) -> Result<Expr, SyntaxError> {
        let mut lhs = self.term()?;
        loop {
            if self.eat_sym("+") {
                lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
            } else if self.eat_sym("-") {
                lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> Result<Expr, SyntaxError> {
        let mut lhs = self.factor()?;
        loop {
            if self.eat_sym("*") {
                lhs = Expr::Mul(Box::new(lhs), Box::new(self.factor()?));
            } else if self.eat_sym("/") {
                lhs = Expr::Div(Box::new(lhs), Box::new(self.factor()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn factor(&mut self) -> Result<Expr, SyntaxError> {
        if self.eat_sym("-") {
            return Ok(Expr::Neg(Box::new(self.factor()?)));
        }
        let base = self.atom()?;
        if self.eat_sym("^") {
            let e = self.exponent()?;
            return Ok(Expr::Pow(Box::new(base), Box::new(e)));
        }
        Ok(base)
    }

    fn exponent(&mut self) -> Result<Expr, SyntaxError> {
        if self.eat_sym("-") {
            return Ok(Expr::Neg(Box::new(self.exponent_atom()?)));
        }
        self.exponent_atom()
    }

    fn exponent_atom(&mut self) -> Result<Expr, SyntaxError> {
        self.expected.insert("number".into());
        self.expected.insert("identifier".into());
        match self.peek().clone() {
            Tok::Num(n) => {
                self.bump();
                Ok(Expr::Num(BigRational::from_integer(n)))
            }
            Tok::Ident(s) if !KEYWORDS.contains(&s.as_str()) => {
                self.bump();
                Ok(Expr::Var(s))
            }
            _ => {
                if self.eat_sym("(") {
                    let e = self.expr()?;
                    self.expect_sym(")")?;
                    Ok(e)
                } else {
                    Err(self.error())
                }
            }
        }
    }

    fn count_or_inf(&mut self) -> Result<Option<Box<Expr>>, SyntaxError> {
        if self.check_ident("inf") {
            self.bump();
            Ok(None)
        } else {
            Ok(Some(Box::new(self.expr()?)))
        }
    }

    fn opt_base(&mut self) -> Result<u32, SyntaxError> {
        if !self.eat_sym(",") {
            return Ok(1);
        }
        if !self.check_ident("q") {
            return Err(self.error());
        }
        self.bump();
        self.expect_sym("^")?;
        self.expected.insert("positive integer".into());
        match self.peek().clone() {
            Tok::Num(n) => match n.to_u32() {
                Some(b) if b >= 1 => {
                    self.bump();
                    Ok(b)
                }
                _ => Err(self.error()),
            },
            _ => Err(self.error()),
        }
    }

    fn atom(&mut self) -> Result<Expr, SyntaxError> {
        self.expected.insert("number".into());
        self.expected.insert("identifier".into());
        match self.peek().clone() {
            Tok::Num(n) => {
                self.bump();
                Ok(Expr::Num(BigRational::from_integer(n)))
            }
            Tok::Ident(s) if s == "inf" => Err(self.error()),
            Tok::Ident(s) if KEYWORDS.contains(&s.as_str()) => {
                self.bump();
                self.expect_sym("(")?;
                let e = match s.as_str() {
                    "poch" => {
                        let arg = Box::new(self.expr()?);
                        self.expect_sym(",")?;
                        let count = self.count_or_inf()?;
                        let base = self.opt_base()?;
                        Expr::Poch { arg, count, base }
                    }
                    "qbin" => {
                        let n = Box::new(self.expr()?);
                        self.expect_sym(",")?;
                        let k = Box::new(self.expr()?);
                        let base = self.opt_base()?;
                        Expr::QBin { n, k, base }
                    }
                    "sum" => {
                        self.expected.insert("identifier".into());
                        let var = match self.peek().clone() {
                            Tok::Ident(v) if !KEYWORDS.contains(&v.as_str()) && v != "q" => {
                                self.bump();
                                v
                            }
                            _ => return Err(self.error()),
                        };
                        self.expect_sym("=")?;
                        let lo = Box::new(self.expr()?);
                        self.expect_sym("..")?;
                        let hi = self.count_or_inf()?;
                        self.expect_sym(",")?;
                        let body = Box::new(self.expr()?);
                        Expr::Sum { var, lo, hi, body }
                    }
                    _ => Expr::Chi12(Box::new(self.expr()?)),
                };
                self.expect_sym(")")?;
                Ok(e)
            }
            Tok::Ident(s) => {
                self.bump();
                Ok(Expr::Var(s))
            }
            _ => {
                if self.eat_sym("(") {
                    let e = self.expr()?;
                    self.expect_sym(")")?;
                    Ok(e)
                } else {
                    Err(self.error())
                }
            }
        }
    }
}

pub fn parse(text: &str) -> Result<Expr, SyntaxError> {
    let mut p = Parser {
        toks: lex(text)?,
        pos: 0,
        expected: BTreeSet::new(),
    };
    let e = p.expr()?;
    if p.peek() != &Tok::Eof {
        p.expected.insert("end of input".into());
        return Err(p.error());
    }
    Ok(e)
}

// ---------------------------------------------------------------------------
// evaluation

/// Free-variable bindings and the truncation order.
#[derive(Debug, Clone)]
pub struct Env<R> {
    bindings: BTreeMap<String, Monomial<R>>,
    pub order: usize,
}

impl<R: Coeff> Env<R> {
    pub fn new(order: usize) -> Self {
        Self {
            bindings: BTreeMap::new(),
            order,
        }
    }

    pub fn bind(mut self, name: &str, value: Monomial<R>) -> Self {
        self.bindings.insert(name.to_string(), value);
        self
    }

    pub fn bind_constant(self, name: &str, value: R) -> Self {
        self.bind(name, Monomial::new(value, 0))
    }

    pub fn get(&self, name: &str) -> Option<&Monomial<R>> {
        self.bindings.get(name)
    }

    pub fn with_order(&self, order: usize) -> Self {
        Self {
            bindings: self.bindings.clone(),
            order,
        }
    }
}

impl Env<LaurentPoly> {
    /// `z` and `c` bound to the ring variables.
    pub fn symbolic(order: usize) -> Self {
        Self::new(order)
            .bind_constant("z", LaurentPoly::z())
            .bind_constant("c", LaurentPoly::c())
    }
}

impl Env<BigRational> {
    pub fn specialized(order: usize, z: BigRational, c: BigRational) -> Self {
        Self::new(order).bind_constant("z", z).bind_constant("c", c)
    }
}

fn reduce_frac<R: Coeff>(num: R, den: R) -> (R, R) {
    if den == R::one() {
        return (num, den);
    }
    if let Some(inv) = den.unit_inverse() {
        return (num.mul_ref(&inv), R::one());
    }
    match num.exact_div(&den) {
        Ok(q) => (q, R::one()),
        Err(_) => (num, den),
    }
}

/// `(den, fa, fb)` with `den = a*fa = b*fb`.
fn common_den<R: Coeff>(a: &R, b: &R) -> (R, R, R) {
    if a == b {
        (a.clone(), R::one(), R::one())
    } else if let Ok(k) = b.exact_div(a) {
        (b.clone(), k, R::one())
    } else if let Ok(k) = a.exact_div(b) {
        (a.clone(), R::one(), k)
    } else {
        (a.mul_ref(b), b.clone(), a.clone())
    }
}

/// `q^val * (coeffs[0] + coeffs[1] q + ...) / den + O(q^{prec+1})`.
///
/// `coeffs[0]` is nonzero unless the value is zero through `prec`, in which
/// case `coeffs` is empty and `val = prec + 1`.
#[derive(Debug, Clone)]
struct Trunc<R> {
    val: i64,
    coeffs: Vec<R>,
    prec: i64,
    den: R,
}

impl<R: Coeff> Trunc<R> {
    fn zero(prec: i64) -> Self {
        Self {
            val: prec + 1,
            coeffs: Vec::new(),
            prec,
            den: R::one(),
        }
    }

    fn normalized(mut self) -> Self {
        let lead = self.coeffs.iter().position(|c| !c.is_zero());
        match lead {
            None => Self::zero(self.prec),
            Some(k) => {
                self.coeffs.drain(..k);
                self.val += k as i64;
                if self.den != R::one() {
                    if let Some(inv) = self.den.unit_inverse() {
                        for c in &mut self.coeffs {
                            *c = c.mul_ref(&inv);
                        }
                        self.den = R::one();
                    }
                }
                self
            }
        }
    }

    fn from_exact(num: &R, den: &R, e: i64, prec: i64) -> Self {
        if num.is_zero() || e > prec {
            return Self::zero(prec);
        }
        let mut coeffs = vec![R::zero(); (prec - e + 1) as usize];
        coeffs[0] = num.clone();
        Self {
            val: e,
            coeffs,
            prec,
            den: den.clone(),
        }
        .normalized()
    }

    fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    fn rel_series(&self, rel: i64) -> QSeries<R> {
        let rel = rel as usize;
        QSeries::from_coeffs(self.coeffs[..=rel].to_vec(), rel)
    }

    fn neg(mut self) -> Self {
        for c in &mut self.coeffs {
            *c = c.neg_ref();
        }
        self
    }

    fn scale(mut self, num: &R, den: &R, e: i64) -> Self {
        self.val += e;
        self.prec += e;
        if num.is_zero() {
            return Self::zero(self.prec);
        }
        if num != &R::one() {
            for c in &mut self.coeffs {
                *c = c.mul_ref(num);
            }
        }
        if den != &R::one() {
            self.den = self.den.mul_ref(den);
        }
        self.normalized()
    }

    fn add(&self, other: &Self) -> Self {
        let prec = self.prec.min(other.prec);
        let val = self.val.min(other.val);
        if val > prec {
            return Self::zero(prec);
        }
        let (den, fa, fb) = common_den(&self.den, &other.den);
        let mut coeffs = vec![R::zero(); (prec - val + 1) as usize];
        for (src, f) in [(self, &fa), (other, &fb)] {
            for (i, c) in src.coeffs.iter().enumerate() {
                let d = src.val + i as i64;
                if d > prec {
                    break;
                }
                let t = if f == &R::one() { c.clone() } else { c.mul_ref(f) };
                coeffs[(d - val) as usize].add_assign_ref(&t);
            }
        }
        Self {
            val,
            coeffs,
            prec,
            den,
        }
        .normalized()
    }

    fn mul(&self, other: &Self) -> Self {
        let prec = (self.prec + other.val).min(other.prec + self.val);
        if self.is_zero() || other.is_zero() {
            return Self::zero(prec);
        }
        let rel = prec - self.val - other.val;
        if rel < 0 {
            return Self::zero(prec);
        }
        let prod = self.rel_series(rel).mul_unchecked(&other.rel_series(rel));
        Self {
            val: self.val + other.val,
            coeffs: prod.into_coeffs(),
            prec,
            den: self.den.mul_ref(&other.den),
        }
        .normalized()
    }

    fn div(&self, d: &Self) -> Result<Self, DslError> {
        if d.is_zero() {
            return Err(DslError::NonInvertibleConstantTerm(format!(
                "0 (divisor vanishes through q^{})",
                d.prec
            )));
        }
        let rel = (self.prec - self.val).min(d.prec - d.val);
        let val = self.val - d.val;
        let prec = val + rel;
        if self.is_zero() || rel < 0 {
            return Ok(Self::zero(prec.min(self.prec - d.val)));
        }
        let lead = &d.coeffs[0];
        let mut out = if lead.unit_inverse().is_some() {
            let q = self.rel_series(rel).div(&d.rel_series(rel))?;
            Self {
                val,
                coeffs: q.into_coeffs(),
                prec,
                den: self.den.clone(),
            }
        } else if d.coeffs[1..=(rel as usize)].iter().all(Coeff::is_zero) {
            Self {
                val,
                coeffs: self.coeffs[..=(rel as usize)].to_vec(),
                prec,
                den: self.den.mul_ref(lead),
            }
        } else {
            return Err(DslError::NonInvertibleConstantTerm(lead.to_string()));
        };
        if d.den != R::one() {
            for c in &mut out.coeffs {
                *c = c.mul_ref(&d.den);
            }
        }
        Ok(out.normalized())
    }

    /// Divide by `(1 - x q^k)`, `k >= 1`.
    fn div_binomial(mut self, x: &R, k: usize) -> Self {
        for i in k..self.coeffs.len() {
            if !self.coeffs[i - k].is_zero() {
                let t = self.coeffs[i - k].mul_ref(x);
                self.coeffs[i].add_assign_ref(&t);
            }
        }
        self
    }

    fn resolve(&self, order: usize) -> Result<QSeries<R>, DslError> {
        if self.prec < order as i64 {
            return Err(DslError::PrecisionLoss(self.prec));
        }
        if !self.is_zero() && self.val < 0 {
            return Err(DslError::NegativeValuation(self.val));
        }
        let mut out = vec![R::zero(); order + 1];
        for (i, c) in self.coeffs.iter().enumerate() {
            let d = self.val + i as i64;
            if d > order as i64 {
                break;
            }
            out[d as usize] = c.clone();
        }
        let s = QSeries::from_coeffs(out, order);
        if self.den == R::one() {
            Ok(s)
        } else {
            Ok(s.scalar_exact_div(&self.den)?)
        }
    }
}

/// Either an exact `num/den * q^e` or a truncated series.
#[derive(Debug, Clone)]
enum Val<R> {
    Exact { num: R, den: R, e: i64 },
    Ser(Trunc<R>),
}

impl<R: Coeff> Val<R> {
    fn exact(num: R, e: i64) -> Self {
        Val::Exact {
            num,
            den: R::one(),
            e,
        }
    }

    fn zero() -> Self {
        Self::exact(R::zero(), 0)
    }

    fn one() -> Self {
        Self::exact(R::one(), 0)
    }

    fn is_exact_zero(&self) -> bool {
        matches!(self, Val::Exact { num, .. } if num.is_zero())
    }

    /// Lowest q-power known to be nonzero; `None` if zero through `order`.
    fn min_degree(&self, order: i64) -> Option<i64> {
        match self {
            Val::Exact { num, e, .. } => (!num.is_zero()).then_some(*e),
            Val::Ser(t) if t.is_zero() => (t.prec < order).then_some(t.prec + 1),
            Val::Ser(t) => Some(t.val),
        }
    }

    fn prec(&self) -> i64 {
        match self {
            Val::Exact { .. } => i64::MAX,
            Val::Ser(t) => t.prec,
        }
    }

    fn to_trunc(&self, prec: i64) -> Trunc<R> {
        match self {
            Val::Exact { num, den, e } => Trunc::from_exact(num, den, *e, prec),
            Val::Ser(t) => t.clone(),
        }
    }

    fn neg(self) -> Self {
        match self {
            Val::Exact { num, den, e } => Val::Exact {
                num: num.neg_ref(),
                den,
                e,
            },
            Val::Ser(t) => Val::Ser(t.neg()),
        }
    }

    fn add(&self, other: &Self, order: i64) -> Self {
        match (self, other) {
            (a, b) if a.is_exact_zero() => b.clone(),
            (a, b) if b.is_exact_zero() => a.clone(),
            (
                Val::Exact { num: na, den: da, e: ea },
                Val::Exact { num: nb, den: db, e: eb },
            ) if ea == eb => {
                let (den, fa, fb) = common_den(da, db);
                let num = na.mul_ref(&fa).add_ref(&nb.mul_ref(&fb));
                if num.is_zero() {
                    return Val::zero();
                }
                let (num, den) = reduce_frac(num, den);
                Val::Exact { num, den, e: *ea }
            }
            (Val::Ser(a), b) | (b, Val::Ser(a)) => Val::Ser(a.add(&b.to_trunc(a.prec))),
            (a, b) => Val::Ser(a.to_trunc(order).add(&b.to_trunc(order))),
        }
    }

    fn mul(&self, other: &Self) -> Self {
        match (self, other) {
            (a, _) | (_, a) if a.is_exact_zero() => Val::zero(),
            (
                Val::Exact { num: na, den: da, e: ea },
                Val::Exact { num: nb, den: db, e: eb },
            ) => {
                let (num, den) = reduce_frac(na.mul_ref(nb), da.mul_ref(db));
                Val::Exact { num, den, e: ea + eb }
            }
            (Val::Exact { num, den, e }, Val::Ser(t)) | (Val::Ser(t), Val::Exact { num, den, e }) => {
                Val::Ser(t.clone().scale(num, den, *e))
            }
            (Val::Ser(a), Val::Ser(b)) => Val::Ser(a.mul(b)),
        }
    }

    fn div(&self, d: &Self) -> Result<Self, DslError> {
        if let Val::Exact { num, den, e } = d {
            if num.is_zero() {
                return Err(DslError::NonInvertibleConstantTerm("0".into()));
            }
            let (inum, iden) = reduce_frac(den.clone(), num.clone());
            return Ok(self.mul(&Val::Exact {
                num: inum,
                den: iden,
                e: -e,
            }));
        }
        if self.is_exact_zero() {
            return Ok(Val::zero());
        }
        let Val::Ser(dt) = d else { unreachable!() };
        let a = match self {
            Val::Exact { num, den, e } => {
                Trunc::from_exact(num, den, *e, *e + (dt.prec - dt.val).max(0))
            }
            Val::Ser(t) => t.clone(),
        };
        Ok(Val::Ser(a.div(dt)?))
    }

    fn resolve(&self, order: usize) -> Result<QSeries<R>, DslError> {
        match self {
            Val::Exact { num, den, e } => {
                Trunc::from_exact(num, den, *e, order as i64).resolve(order)
            }
            Val::Ser(t) => t.resolve(order),
        }
    }
}

fn chi12(n: i64) -> i64 {
    match n.rem_euclid(12) {
        1 | 11 => 1,
        5 | 7 => -1,
        _ => 0,
    }
}

struct Evaluator<'a, R> {
    env: &'a Env<R>,
    ints: Vec<(String, i64)>,
}

const RETRIES: usize = 4;

impl<'a, R: Coeff> Evaluator<'a, R> {
    fn lookup_int(&self, name: &str) -> Option<i64> {
        self.ints.iter().rev().find(|(n, _)| n == name).map(|(_, v)| *v)
    }

    fn rational(&self, e: &Expr) -> Result<BigRational, DslError> {
        use Expr::*;
        let bad = || DslError::NonIntegerIndex {
            expr: e.to_string(),
            value: "not an index expression".into(),
        };
        Ok(match e {
            Num(r) => r.clone(),
            Var(v) => match self.lookup_int(v) {
                Some(x) => BigRational::from_integer(x.into()),
                None => return Err(DslError::Unbound(v.clone())),
            },
            Neg(a) => -self.rational(a)?,
            Add(a, b) => self.rational(a)? + self.rational(b)?,
            Sub(a, b) => self.rational(a)? - self.rational(b)?,
            Mul(a, b) => self.rational(a)? * self.rational(b)?,
            Div(a, b) => {
                let d = self.rational(b)?;
                if d == BigRational::from_integer(0.into()) {
                    return Err(bad());
                }
                self.rational(a)? / d
            }
            Pow(a, b) => {
                let base = self.rational(a)?;
                let k = self.index(b)?;
                let p = num_traits::pow(base.clone(), k.unsigned_abs() as usize);
                if k < 0 {
                    if p == BigRational::from_integer(0.into()) {
                        return Err(bad());
                    }
                    p.recip()
                } else {
                    p
                }
            }
            Chi12(a) => BigRational::from_integer(chi12(self.index(a)?).into()),
            _ => return Err(bad()),
        })
    }

    fn index(&self, e: &Expr) -> Result<i64, DslError> {
        let r = self.rational(e)?;
        if !r.is_integer() {
            return Err(DslError::NonIntegerIndex {
                expr: e.to_string(),
                value: r.to_string(),
            });
        }
        r.to_integer().to_i64().ok_or_else(|| DslError::NonIntegerIndex {
            expr: e.to_string(),
            value: "out of range".into(),
        })
    }

    /// Values representable as a single `num/den * q^e` without series work.
    fn try_exact(&mut self, e: &Expr) -> Result<Option<Val<R>>, DslError> {
        use Expr::*;
        Ok(match e {
            Num(r) => Some(Val::exact(R::from_rational(r.clone()), 0)),
            Var(v) => Some(self.var(v)?),
            Chi12(a) => Some(Val::exact(R::from_int(chi12(self.index(a)?)), 0)),
            Neg(a) => self.try_exact(a)?.map(Val::neg),
            Mul(a, b) | Div(a, b) => {
                let Some(x) = self.try_exact(a)? else { return Ok(None) };
                if matches!(e, Mul(..)) && x.is_exact_zero() {
                    return Ok(Some(x));
                }
                let Some(y) = self.try_exact(b)? else { return Ok(None) };
                Some(if matches!(e, Mul(..)) { x.mul(&y) } else { x.div(&y)? })
            }
            Add(a, b) | Sub(a, b) => {
                let Some(x) = self.try_exact(a)? else { return Ok(None) };
                let Some(mut y) = self.try_exact(b)? else { return Ok(None) };
                if matches!(e, Sub(..)) {
                    y = y.neg();
                }
                match (&x, &y) {
                    (Val::Exact { e: ea, num: na, .. }, Val::Exact { e: eb, num: nb, .. })
                        if ea == eb || na.is_zero() || nb.is_zero() =>
                    {
                        Some(x.add(&y, 0))
                    }
                    _ => None,
                }
            }
            Pow(a, k) => {
                let Some(x) = self.try_exact(a)? else { return Ok(None) };
                Some(self.pow_val(x, self.index(k)?)?)
            }
            _ => None,
        })
    }

    fn var(&self, v: &str) -> Result<Val<R>, DslError> {
        if let Some(x) = self.lookup_int(v) {
            return Ok(Val::exact(R::from_int(x), 0));
        }
        if v == "q" {
            return Ok(Val::exact(R::one(), 1));
        }
        match self.env.get(v) {
            Some(m) => Ok(Val::exact(m.coef.clone(), m.e_q)),
            None => Err(DslError::Unbound(v.to_string())),
        }
    }

    fn pow_val(&self, x: Val<R>, k: i64) -> Result<Val<R>, DslError> {
        if let Val::Exact { num, den, e } = &x {
            let p = k.unsigned_abs() as u32;
            let (n, d) = (num.pow(p), den.pow(p));
            if k >= 0 {
                return Ok(Val::Exact { num: n, den: d, e: e * k });
            }
            return Val::one().div(&Val::Exact { num: n, den: d, e: e * (-k) });
        }
        let mut acc = Val::one();
        for _ in 0..k.unsigned_abs() {
            acc = acc.mul(&x);
        }
        if k < 0 {
            acc = Val::one().div(&acc)?;
        }
        Ok(acc)
    }

    fn eval(&mut self, e: &Expr, order: i64) -> Result<Val<R>, DslError> {
        use Expr::*;
        let order = order.max(0);
        match e {
            Num(_) | Var(_) | Chi12(_) => Ok(self.try_exact(e)?.expect("exact leaf")),
            Neg(a) => Ok(self.eval(a, order)?.neg()),
            Add(a, b) | Sub(a, b) => {
                let x = self.eval(a, order)?;
                let mut y = self.eval(b, order)?;
                if matches!(e, Sub(..)) {
                    y = y.neg();
                }
                Ok(x.add(&y, order))
            }
            Mul(..) | Div(..) => self.product(e, order),
            Pow(a, k) => {
                let k = self.index(k)?;
                if let Some(x) = self.try_exact(a)? {
                    return self.pow_val(x, k);
                }
                let mut need = order;
                for _ in 0..RETRIES {
                    let x = self.eval(a, need)?;
                    let v = self.pow_val(x, k)?;
                    if v.prec() >= order {
                        return Ok(v);
                    }
                    need += order - v.prec();
                }
                Err(DslError::PrecisionLoss(order))
            }
            Poch { arg, count, base } => self.poch(arg, count.as_deref(), *base, order),
            QBin { n, k, base } => {
                let (n, k) = (self.index(n)?, self.index(k)?);
                let s = crate::qseries::qbin::<R>(n, k, *base as usize, order as usize);
                Ok(Val::Ser(
                    Trunc {
                        val: 0,
                        coeffs: s.into_coeffs(),
                        prec: order,
                        den: R::one(),
                    }
                    .normalized(),
                ))
            }
            Sum { var, lo, hi, body } => self.sum(var, lo, hi.as_deref(), body, order),
        }
    }

    /// Split a Pochhammer symbol into its exact factors (q-degree <= 0) and
    /// the binomials `(x, k)` with `k >= 1`.
    fn poch_parts(
        &mut self,
        arg: &Expr,
        count: Option<&Expr>,
        base: u32,
        order: i64,
    ) -> Result<(Val<R>, Vec<(R, usize)>, i64), DslError> {
        let (x, e0) = match self.try_exact(arg)? {
            Some(Val::Exact { num, den, e }) if den == R::one() => (num, e),
            Some(Val::Exact { num, den, e }) => match den.unit_inverse() {
                Some(inv) => (num.mul_ref(&inv), e),
                None => return Err(DslError::NotMonomial(arg.to_string())),
            },
            _ => return Err(DslError::NotMonomial(arg.to_string())),
        };
        let len = match count {
            Some(c) => {
                let n = self.index(c)?;
                if n < 0 {
                    return Err(DslError::NegativeLength(n));
                }
                Some(n)
            }
            None => None,
        };
        let base = base as i64;
        let mut exact = Val::one();
        let mut binomials = Vec::new();
        if x.is_zero() {
            return Ok((exact, binomials, order));
        }
        let mut j = 0i64;
        // exact prefix: factors with q-degree <= 0
        while len.is_none_or(|n| j < n) && e0 + base * j <= 0 {
            let d = e0 + base * j;
            if d == 0 {
                exact = exact.mul(&Val::exact(R::one().sub_ref(&x), 0));
            } else {
                // 1 - x q^d = -x q^d (1 - x^{-1} q^{-d})
                let inv = x
                    .unit_inverse()
                    .ok_or_else(|| DslError::NotMonomial(arg.to_string()))?;
                exact = exact.mul(&Val::exact(x.neg_ref(), d));
                binomials.push((inv, (-d) as usize));
            }
            j += 1;
        }
        let shift = match &exact {
            Val::Exact { num, e, .. } if !num.is_zero() => *e,
            _ => 0,
        };
        let rel = order - shift;
        while len.is_none_or(|n| j < n) {
            let d = e0 + base * j;
            if d > rel {
                break;
            }
            binomials.push((x.clone(), d as usize));
            j += 1;
        }
        Ok((exact, binomials, rel.max(0)))
    }

    fn poch(
        &mut self,
        arg: &Expr,
        count: Option<&Expr>,
        base: u32,
        order: i64,
    ) -> Result<Val<R>, DslError> {
        let (exact, binomials, rel) = self.poch_parts(arg, count, base, order)?;
        if exact.is_exact_zero() {
            return Ok(exact);
        }
        let mut s = QSeries::<R>::one(rel as usize);
        for (x, k) in &binomials {
            if *k as i64 <= rel {
                s = s.mul_binomial(x, *k);
            }
        }
        let t = Trunc {
            val: 0,
            coeffs: s.into_coeffs(),
            prec: rel,
            den: R::one(),
        }
        .normalized();
        Ok(exact.mul(&Val::Ser(t)))
    }

    fn flatten<'e>(e: &'e Expr, inv: bool, out: &mut Vec<(&'e Expr, bool)>) {
        match e {
            Expr::Mul(a, b) => {
                Self::flatten(a, inv, out);
                Self::flatten(b, inv, out);
            }
            Expr::Div(a, b) => {
                Self::flatten(a, inv, out);
                Self::flatten(b, !inv, out);
            }
            _ => out.push((e, inv)),
        }
    }

    fn product(&mut self, e: &Expr, order: i64) -> Result<Val<R>, DslError> {
        let mut factors = Vec::new();
        Self::flatten(e, false, &mut factors);
        let mut exact = Val::one();
        let mut series: Vec<&Expr> = Vec::new();
        let mut divisors: Vec<&Expr> = Vec::new();
        let mut poch_divs: Vec<&Expr> = Vec::new();
        for (f, inv) in factors {
            if let Some(x) = self.try_exact(f)? {
                exact = if inv { exact.div(&x)? } else { exact.mul(&x) };
                if exact.is_exact_zero() {
                    return Ok(exact);
                }
                continue;
            }
            match (f, inv) {
                (Expr::Poch { .. }, true) => poch_divs.push(f),
                (Expr::Pow(b, k), true) if matches!(b.as_ref(), Expr::Poch { .. }) => {
                    let k = self.index(k)?;
                    if k >= 0 {
                        poch_divs.extend(std::iter::repeat_n(b.as_ref(), k as usize));
                    } else {
                        series.extend(std::iter::repeat_n(b.as_ref(), k.unsigned_abs() as usize));
                    }
                }
                (_, true) => divisors.push(f),
                (_, false) => series.push(f),
            }
        }
        if exact.is_exact_zero() {
            return Ok(exact);
        }
        let e_exact = match &exact {
            Val::Exact { e, .. } => *e,
            Val::Ser(_) => unreachable!(),
        };
        let mut need = order - e_exact;
        for _ in 0..RETRIES {
            let mut acc = exact.clone();
            for f in &series {
                let v = self.eval(f, need)?;
                acc = acc.mul(&v);
                if acc.is_exact_zero() {
                    return Ok(acc);
                }
            }
            for f in &poch_divs {
                let Expr::Poch { arg, count, base } = f else { unreachable!() };
                let low = match &acc {
                    Val::Exact { e, .. } => *e,
                    Val::Ser(t) => t.val.min(t.prec),
                };
                let (pe, binomials, _) =
                    self.poch_parts(arg, count.as_deref(), *base, order.max(need + e_exact) - low)?;
                acc = acc.div(&pe)?;
                let mut t = acc.to_trunc(order.max(need + e_exact));
                for (x, k) in &binomials {
                    t = t.div_binomial(x, *k);
                }
                acc = Val::Ser(t);
            }
            for f in &divisors {
                let v = self.eval(f, need)?;
                acc = acc.div(&v)?;
            }
            if acc.prec() >= order {
                return Ok(acc);
            }
            need += order - acc.prec();
        }
        Err(DslError::PrecisionLoss(order))
    }

    fn sum(
        &mut self,
        var: &str,
        lo: &Expr,
        hi: Option<&Expr>,
        body: &Expr,
        order: i64,
    ) -> Result<Val<R>, DslError> {
        let lo = self.index(lo)?;
        let hi = hi.map(|h| self.index(h)).transpose()?;
        let cap = 100 + 20 * order as usize;
        let mut acc = Val::zero();
        let mut quiet = 0;
        let mut k = lo;
        let mut terms = 0usize;
        loop {
            if hi.is_some_and(|h| k > h) {
                break;
            }
            self.ints.push((var.to_string(), k));
            let t = self.eval(body, order);
            self.ints.pop();
            let t = t?;
            if hi.is_none() {
                match t.min_degree(order) {
                    Some(d) if d <= order => quiet = 0,
                    _ => quiet += 1,
                }
                terms += 1;
                if quiet >= 3 {
                    break;
                }
                if terms >= cap {
                    return Err(DslError::NonConvergent {
                        var: var.to_string(),
                        terms,
                    });
                }
            }
            acc = acc.add(&t, order);
            k += 1;
        }
        Ok(acc)
    }

    fn top(&mut self, e: &Expr, order: usize) -> Result<QSeries<R>, DslError> {
        let target = order as i64;
        let mut need = target;
        for _ in 0..RETRIES {
            let v = self.eval(e, need)?;
            if v.prec() >= target {
                return v.resolve(order);
            }
            need += target - v.prec();
        }
        Err(DslError::PrecisionLoss(target))
    }
}

/// Evaluate `e` to a series through `q^env.order`.
pub fn eval<R: Coeff>(e: &Expr, env: &Env<R>) -> Result<QSeries<R>, DslError> {
    Evaluator {
        env,
        ints: Vec::new(),
    }
    .top(e, env.order)
}

/// Evaluate with extra integer bindings (e.g. a fixed `m` for a family).
pub fn eval_with_ints<R: Coeff>(
    e: &Expr,
    env: &Env<R>,
    ints: &[(&str, i64)],
) -> Result<QSeries<R>, DslError> {
    Evaluator {
        env,
        ints: ints.iter().map(|(n, v)| (n.to_string(), *v)).collect(),
    }
    .top(e, env.order)
}

/// Parse and evaluate in one step.
pub fn eval_str<R: Coeff>(text: &str, env: &Env<R>) -> Result<QSeries<R>, DslError> {
    eval(&parse(text)?, env)
}

/// Minimum q-degree of the first terms of an infinite sum.
#[derive(Debug, Clone, PartialEq)]
pub struct Convergence {
    pub var: String,
    /// `None` when the term vanishes through the probe order.
    pub degrees: Vec<Option<i64>>,
    pub increasing: bool,
}

impl fmt::Display for Convergence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let ds: Vec<String> = self
            .degrees
            .iter()
            .map(|d| d.map_or("-".to_string(), |d| d.to_string()))
            .collect();
        write!(
            f,
            "{}: min degrees [{}] {}",
            self.var,
            ds.join(", "),
            if self.increasing { "increasing" } else { "NOT increasing" }
        )
    }
}

/// Probe the first `terms` terms of an infinite `sum(...)`; `degrees` are
/// computed at `env.order` and the sequence must be strictly increasing
/// from some point in the first half on.
pub fn check_convergence<R: Coeff>(
    e: &Expr,
    env: &Env<R>,
    terms: usize,
) -> Result<Convergence, DslError> {
    let Expr::Sum { var, lo, hi: None, body } = e else {
        return Err(DslError::NonConvergent {
            var: String::new(),
            terms: 0,
        });
    };
    let mut ev = Evaluator {
        env,
        ints: Vec::new(),
    };
    let lo = ev.index(lo)?;
    let order = env.order as i64;
    let mut degrees = Vec::with_capacity(terms);
    for k in lo..lo + terms as i64 {
        ev.ints.push((var.clone(), k));
        let t = ev.eval(body, order);
        ev.ints.pop();
        degrees.push(t?.min_degree(order).filter(|&d| d <= order));
    }
    let key = |d: &Option<i64>| d.unwrap_or(i64::MAX);
    let increasing = (0..=terms / 2).any(|start| {
        degrees[start..].windows(2).all(|w| {
            let (a, b) = (key(&w[0]), key(&w[1]));
            a < b || (a == i64::MAX && b == i64::MAX)
        })
    });
    Ok(Convergence {
        var: var.clone(),
        degrees,
        increasing,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeffring::{int, rat};

    fn sym(text: &str, order: usize) -> QSeries<LaurentPoly> {
        eval_str(text, &Env::symbolic(order)).unwrap()
    }

    fn rat_series(text: &str, order: usize) -> QSeries<BigRational> {
        eval_str(text, &Env::new(order)).unwrap()
    }

    #[test]
    fn parse_examples() {
        let e = parse("poch(q, inf)").unwrap();
        assert_eq!(
            e,
            Expr::Poch {
                arg: Box::new(Expr::Var("q".into())),
                count: None,
                base: 1
            }
        );
        let err = parse("sum(n=1..inf, q^n / (1 - q^n)").unwrap_err();
        assert_eq!(err.line, 1);
        assert!(err.expected.contains(&"`)`".to_string()), "{err}");
        assert_eq!(err.found, "end of input");
    }

    #[test]
    fn roundtrip() {
        for text in [
            "sum(n=1..inf, (-1)^(n-1)*z^n*q^(n*(n+1)/2)/((1 - c*q^n)*poch(z*q, n)))",
            "poch(q, inf)",
            "-q^2 + -3*z^-1 - (a - b)",
            "qbin(2*n, k, q^2)/poch(-q, n, q^2)",
            "chi12(6*n + 1)*q^((n^2 - 1)/24)",
            "a/(b/c) - (a - (b + c))",
        ] {
            let e = parse(text).unwrap();
            let printed = e.to_string();
            assert_eq!(parse(&printed).unwrap(), e, "{text} -> {printed}");
        }
    }

    #[test]
    fn kluyver_lhs() {
        let s = rat_series("sum(n=1..inf, (-1)^(n-1)*q^(n*(n+1)/2)/((1 - q^n)*poch(q, n)))", 6);
        assert_eq!(s.to_string(), "q + 2*q^2 + 2*q^3 + 3*q^4 + 2*q^5 + 4*q^6 + O(q^7)");
        let d = rat_series("sum(n=1..inf, q^n/(1 - q^n))", 6);
        assert_eq!(s, d);
    }

    #[test]
    fn euler_product() {
        assert_eq!(rat_series("poch(q, inf)", 5).to_string(), "1 - q - q^2 + q^5 + O(q^6)");
    }

    #[test]
    fn constant_terms_do_not_converge() {
        let err = eval_str::<BigRational>("sum(n=1..inf, q^0)", &Env::new(5)).unwrap_err();
        assert!(matches!(err, DslError::NonConvergent { .. }));
    }

    #[test]
    fn non_integer_index() {
        let err = eval_str::<BigRational>("sum(n=1..3, q^(n/2))", &Env::new(5)).unwrap_err();
        assert!(matches!(err, DslError::NonIntegerIndex { .. }));
    }

    #[test]
    fn fraction_device() {
        // (c q; q)_inf / (c; q)_inf = 1/(1-c)
        let s = sym("(1 - c)*poch(c*q, inf)/poch(c, inf)", 6);
        assert_eq!(s, QSeries::one(6));
        let s = sym("((1 - c)*q + (1 - c)^2)/(1 - c)", 3);
        assert_eq!(s.to_string(), "(1 - c) + q + O(q^4)");
        assert!(matches!(
            eval_str::<LaurentPoly>("q/(1 - c)", &Env::symbolic(3)),
            Err(DslError::NotDivisible { power: 1, .. })
        ));
    }

    #[test]
    fn negative_powers_cancel() {
        let s = rat_series("(q^2 + q^3)/q^2", 4);
        assert_eq!(s.to_string(), "1 + q + O(q^5)");
        let s = rat_series("q^-1*(q - q^2)/(1 - q)", 4);
        assert_eq!(s, QSeries::one(4));
        assert!(matches!(
            eval_str::<BigRational>("1/q", &Env::new(3)),
            Err(DslError::NegativeValuation(-1))
        ));
        // (q^{-1}; q)_2 = (1 - q^{-1})(1 - 1) = 0
        assert!(rat_series("poch(q^-1, 2)", 3).is_zero());
    }

    #[test]
    fn monomial_binding() {
        let env = Env::<BigRational>::new(4).bind("a", Monomial::new(rat(1, 2), 1));
        let s = eval_str("poch(a, 2)", &env).unwrap();
        // (1 - q/2)(1 - q^2/2)
        assert_eq!(s.to_string(), "1 - 1/2*q - 1/2*q^2 + 1/4*q^3 + O(q^5)");
        assert!(matches!(
            eval_str::<BigRational>("b", &Env::new(2)),
            Err(DslError::Unbound(_))
        ));
    }

    #[test]
    fn symbolic_matches_specialized() {
        let text = "sum(n=1..inf, (-1)^(n-1)*z^n*q^(n*(n+1)/2)/((1 - c*q^n)*poch(z*q, n)))";
        let s = sym(text, 10);
        let (z0, c0) = (rat(2, 7), rat(-3, 5));
        let r = eval_str(text, &Env::specialized(10, z0.clone(), c0.clone())).unwrap();
        assert_eq!(s.eval_at(&z0, &c0).unwrap(), r);
    }

    #[test]
    fn convergence_diagnostic() {
        let env = Env::symbolic(30);
        let lhs = parse("sum(n=1..inf, (-1)^(n-1)*z^n*q^(n*(n+1)/2)/((1 - c*q^n)*poch(z*q, n)))").unwrap();
        let d = check_convergence(&lhs, &env, 6).unwrap();
        assert_eq!(d.degrees, vec![Some(1), Some(3), Some(6), Some(10), Some(15), Some(21)]);
        assert!(d.increasing);
        let bad = parse("sum(n=1..inf, q^0)").unwrap();
        assert!(!check_convergence(&bad, &env, 6).unwrap().increasing);
    }

    #[test]
    fn chi12_values() {
        assert_eq!(
            [1, 5, 7, 11, 13, 2].map(chi12),
            [1, -1, -1, 1, 1, 0]
        );
        let s = rat_series("chi12(5)*q", 2);
        assert_eq!(s.coeff(1), &int(-1));
    }

    #[test]
    fn poch_divisor_after_negative_prefix() {
        // the numerator starts at q^(2n-1), below the q^(2n) of b^n
        let text = "poch(-a*q/b, 3)*b^3/poch(-b, 4)";
        let env = |order| {
            Env::<BigRational>::new(order)
                .bind_constant("a", rat(-2, 13))
                .bind("b", Monomial::new(rat(27, 67), 2))
        };
        let lo = eval_str(text, &env(10)).unwrap();
        let hi = eval_str(text, &env(16)).unwrap();
        assert_eq!(lo, hi.truncate(10));
    }
}
