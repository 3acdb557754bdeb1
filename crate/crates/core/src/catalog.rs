//! Identity catalog and the verification engine.
//!
//! An entry has two or more sides. Each side is DSL text, a built-in series
//! builder, a partition counter, a weighted partition sum or a named integer
//! sequence. `verify` evaluates every side to the same order and compares all
//! pairs coefficient by coefficient.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::path::Path;
use std::sync::{Mutex, OnceLock};
use std::time::Instant;

use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;
use thiserror::Error;

use crate::coeffring::{fmt_rational, int, parse_rational, rat, Coeff, LaurentPoly};
use crate::dsl::{self, DslError, Env, Expr};
use crate::partitions::{self, PartitionError, WeightDomain, COUNTERS, WEIGHTS};
use crate::qseries::{poch, Count, Monomial, QSeries, SeriesError};

/// The catalog shipped with the crate.
pub const DEFAULT_CATALOG: &str = include_str!("../data/catalog.json");

/// Environment variable naming a catalog file to use instead of the default.
pub const CATALOG_ENV: &str = "QVERIFY_CATALOG";

pub const TAGS: &[&str] = &["core", "weighted", "proof-ingredient", "remark"];

pub const BUILTINS: &[&str] = &[
    "B_RANK_GF_BILATERAL",
    "B_RANK_GF_POSITIVE",
    "B_N2_SERIES",
    "B_FINE_F",
    "B_FINE_TAIL",
    "B_ZAGIER_H",
    "B_LIMIT_C1",
];

pub const SEQUENCES: &[&str] = &[
    "n_p_n",
    "spt_rank_moment",
    "d_plus_w",
    "wnrep",
    "alladi",
    "gar_d81",
    "d_e_minus_d_o",
    "ssptd_o_minus_e",
    "ssptd_o_plus_e",
    "newdn_rep",
    "rank_gf",
];

/// Largest `n` for sides that enumerate all partitions of `n`.
pub const PARTITION_CAP: usize = 40;
/// Largest `n` for sides that enumerate overpartitions or vector partitions.
pub const SLOW_CAP: usize = 20;

#[derive(Debug, Error)]
pub enum CatalogError {
    #[error("unknown identity `{0}`")]
    UnknownIdentity(String),
    #[error("invalid catalog: {0}")]
    Invalid(String),
    #[error("catalog JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("reading {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}

/// Failure while evaluating a side.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error(transparent)]
    Dsl(#[from] DslError),
    #[error(transparent)]
    Series(#[from] SeriesError),
    #[error(transparent)]
    Partition(#[from] PartitionError),
    #[error("{0}")]
    Builtin(String),
    #[error("value depends on `{0}`, which has no rational value here")]
    Unassigned(char),
}

impl EvalError {
    /// Short name used in `ERROR(kind)` verdicts.
    pub fn kind(&self) -> &'static str {
        match self {
            EvalError::Dsl(e) => match e {
                DslError::Syntax(_) => "Syntax",
                DslError::Unbound(_) => "Unbound",
                DslError::NonIntegerIndex { .. } => "NonIntegerIndex",
                DslError::NonConvergent { .. } => "NonConvergent",
                DslError::NonInvertibleConstantTerm(_) => "NonInvertibleConstantTerm",
                DslError::NotDivisible { .. } => "NotDivisible",
                DslError::NotMonomial(_) => "NotMonomial",
                DslError::NegativeLength(_) => "NegativeLength",
                DslError::NegativeValuation(_) => "NegativeValuation",
                DslError::PrecisionLoss(_) => "PrecisionLoss",
            },
            EvalError::Series(e) => match e {
                SeriesError::OrderMismatch(..) => "OrderMismatch",
                SeriesError::ModeMismatch => "ModeMismatch",
                SeriesError::NonInvertibleConstantTerm(_) => "NonInvertibleConstantTerm",
                SeriesError::NonTruncatingInfiniteProduct(_) => "NonTruncatingInfiniteProduct",
                SeriesError::NotDivisible { .. } => "NotDivisible",
            },
            EvalError::Partition(_) => "Partition",
            EvalError::Builtin(_) => "Builtin",
            EvalError::Unassigned(_) => "Unassigned",
        }
    }
}

// ---------------------------------------------------------------------------
// data model

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Symbolic,
    Specialize,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Symbolic => "symbolic",
            Mode::Specialize => "specialize",
        })
    }
}

/// Requested mode; an entry's symbolic policy can be overridden by
/// specialization but not the other way round.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ModeRequest {
    #[default]
    Auto,
    Specialize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Domain {
    /// `z` or `c`: a ring variable in symbolic mode, a rational otherwise.
    SymbolicZc,
    /// A rational with `0 < |v| <= 1/2`.
    RationalInUnitInterval,
    /// `r * q^e` with `r` as above and `e` in {1, 2}.
    Qmonomial,
    /// Every integer of `range`; the entry is checked once per value.
    SmallPositiveInt,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(from = "ParamRepr")]
pub struct ParamSpec {
    pub domain: Domain,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub range: Option<[i64; 2]>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum ParamRepr {
    Tag(Domain),
    Full {
        domain: Domain,
        #[serde(default)]
        range: Option<[i64; 2]>,
    },
}

impl From<ParamRepr> for ParamSpec {
    fn from(r: ParamRepr) -> Self {
        match r {
            ParamRepr::Tag(domain) => ParamSpec {
                domain,
                range: None,
            },
            ParamRepr::Full { domain, range } => ParamSpec { domain, range },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Constraint {
    /// `[x, y]`: `x` must be q-adically smaller than `y`.
    pub abs_less: [String; 2],
}

#[derive(Debug, Clone, PartialEq)]
pub enum SideKind {
    Dsl(Expr),
    Builtin {
        name: String,
        args: BTreeMap<String, Expr>,
    },
    Counter(String),
    Weighted {
        id: String,
        subs: BTreeMap<char, BigRational>,
    },
    Sequence(String),
}

/// One side: `(base * scale) * times + plus`, with `constant` as the q^0
/// coefficient of counter, weighted and sequence bases.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(try_from = "serde_json::Value")]
pub struct Side {
    pub kind: SideKind,
    pub scale: Option<BigRational>,
    pub times: Option<Expr>,
    pub plus: Option<Expr>,
    pub constant: BigRational,
    pub label: Option<String>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SideObject {
    dsl: Option<String>,
    builtin: Option<String>,
    #[serde(default)]
    args: BTreeMap<String, String>,
    counter: Option<String>,
    weighted: Option<String>,
    #[serde(default)]
    subs: BTreeMap<String, String>,
    sequence: Option<String>,
    scale: Option<String>,
    times: Option<String>,
    plus: Option<String>,
    constant: Option<String>,
    label: Option<String>,
}

fn parse_expr(text: &str) -> Result<Expr, String> {
    dsl::parse(text).map_err(|e| format!("`{text}`: {e}"))
}

fn parse_rat(text: &str) -> Result<BigRational, String> {
    parse_rational(text).ok_or_else(|| format!("`{text}` is not a rational"))
}

/// A side is either DSL text or an object; going through `Value` keeps the
/// object's own error message (an untagged enum would replace it).
impl TryFrom<serde_json::Value> for Side {
    type Error = String;

    fn try_from(v: serde_json::Value) -> Result<Self, String> {
        let o: SideObject = match v {
            serde_json::Value::String(t) => {
                return Ok(Side {
                    kind: SideKind::Dsl(parse_expr(&t)?),
                    scale: None,
                    times: None,
                    plus: None,
                    constant: BigRational::zero(),
                    label: None,
                })
            }
            v @ serde_json::Value::Object(_) => serde_json::from_value(v).map_err(|e| e.to_string())?,
            _ => return Err("a side is DSL text or an object".into()),
        };
        let kinds = [&o.dsl, &o.builtin, &o.counter, &o.weighted, &o.sequence]
            .iter()
            .filter(|k| k.is_some())
            .count();
        if kinds != 1 {
            return Err("a side needs exactly one of dsl, builtin, counter, weighted, sequence".into());
        }
        let kind = if let Some(t) = o.dsl {
            SideKind::Dsl(parse_expr(&t)?)
        } else if let Some(name) = o.builtin {
            let args = o
                .args
                .iter()
                .map(|(k, v)| Ok((k.clone(), parse_expr(v)?)))
                .collect::<Result<_, String>>()?;
            SideKind::Builtin { name, args }
        } else if let Some(name) = o.counter {
            SideKind::Counter(name)
        } else if let Some(id) = o.weighted {
            let mut subs = BTreeMap::new();
            for (k, v) in &o.subs {
                let var = match k.as_str() {
                    "z" => 'z',
                    "c" => 'c',
                    _ => return Err(format!("substitution for unknown variable `{k}`")),
                };
                subs.insert(var, parse_rat(v)?);
            }
            SideKind::Weighted { id, subs }
        } else {
            SideKind::Sequence(o.sequence.unwrap())
        };
        Ok(Side {
            kind,
            scale: o.scale.as_deref().map(parse_rat).transpose()?,
            times: o.times.as_deref().map(parse_expr).transpose()?,
            plus: o.plus.as_deref().map(parse_expr).transpose()?,
            constant: o
                .constant
                .as_deref()
                .map(parse_rat)
                .transpose()?
                .unwrap_or_else(BigRational::zero),
            label: o.label,
        })
    }
}

impl Side {
    /// Largest order this side can be computed to in reasonable time.
    pub fn cap(&self) -> Option<usize> {
        match &self.kind {
            SideKind::Dsl(_) | SideKind::Builtin { .. } => None,
            SideKind::Counter(name) => match name.as_str() {
                "d" | "d_o" | "d_e" | "d81" | "rstar" => None,
                "NSC" | "pbar" => Some(SLOW_CAP),
                _ => Some(PARTITION_CAP),
            },
            SideKind::Weighted { id, .. } => match partitions::weight_domain(id) {
                Ok(WeightDomain::Divisors) => None,
                Ok(WeightDomain::Overpartitions) => Some(SLOW_CAP),
                _ => Some(PARTITION_CAP),
            },
            SideKind::Sequence(name) => match name.as_str() {
                "alladi" | "gar_d81" | "d_e_minus_d_o" => None,
                "newdn_rep" => Some(SLOW_CAP),
                _ => Some(PARTITION_CAP),
            },
        }
    }

    fn exprs(&self) -> Vec<&Expr> {
        let mut v: Vec<&Expr> = self.times.iter().chain(self.plus.iter()).collect();
        match &self.kind {
            SideKind::Dsl(e) => v.push(e),
            SideKind::Builtin { args, .. } => v.extend(args.values()),
            _ => {}
        }
        v
    }

    /// Short description for listings.
    pub fn summary(&self) -> String {
        if let Some(l) = &self.label {
            return l.clone();
        }
        match &self.kind {
            SideKind::Dsl(e) => e.to_string(),
            SideKind::Builtin { name, .. } => name.clone(),
            SideKind::Counter(n) => format!("counter {n}"),
            SideKind::Weighted { id, .. } => format!("weighted {id}"),
            SideKind::Sequence(n) => format!("sequence {n}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IdentityEntry {
    pub id: String,
    pub description: String,
    #[serde(default)]
    pub tags: Vec<String>,
    pub default_mode: Mode,
    #[serde(default)]
    pub params: BTreeMap<String, ParamSpec>,
    #[serde(default)]
    pub constraints: Vec<Constraint>,
    pub lhs: Side,
    pub rhs: Side,
    #[serde(default)]
    pub extra_sides: Vec<Side>,
    #[serde(default)]
    pub anchor: String,
    #[serde(default)]
    pub notes: Option<String>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CatalogFile {
    entries: Vec<IdentityEntry>,
}

// ---------------------------------------------------------------------------
// parameter assignments

#[derive(Debug, Clone, PartialEq)]
pub enum ParamValue {
    Symbolic,
    Rational(BigRational),
    /// `r * q^e`.
    Monomial(BigRational, i64),
    Int(i64),
}

impl fmt::Display for ParamValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParamValue::Symbolic => f.write_str("symbolic"),
            ParamValue::Rational(r) => f.write_str(&fmt_rational(r)),
            ParamValue::Monomial(r, 1) => write!(f, "{}*q", fmt_rational(r)),
            ParamValue::Monomial(r, e) => write!(f, "{}*q^{e}", fmt_rational(r)),
            ParamValue::Int(n) => write!(f, "{n}"),
        }
    }
}

impl ParamValue {
    /// Ordering key for q-adic size: smaller key means smaller value.
    fn size_key(&self) -> (i64, BigRational) {
        match self {
            ParamValue::Rational(r) => (0, r.abs()),
            ParamValue::Monomial(r, e) => (-e, r.abs()),
            _ => (0, BigRational::zero()),
        }
    }
}

/// Values for an entry's parameters at one evaluation point.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Assignment(pub BTreeMap<String, ParamValue>);

impl Assignment {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, name: &str, v: ParamValue) -> Self {
        self.0.insert(name.to_string(), v);
        self
    }

    fn rational(&self, var: char) -> Option<&BigRational> {
        match self.0.get(var.encode_utf8(&mut [0; 4]) as &str) {
            Some(ParamValue::Rational(r)) => Some(r),
            _ => None,
        }
    }

    pub fn to_strings(&self) -> BTreeMap<String, String> {
        self.0.iter().map(|(k, v)| (k.clone(), v.to_string())).collect()
    }
}

impl fmt::Display for Assignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|(k, v)| format!("{k}={v}")).collect();
        f.write_str(&parts.join(", "))
    }
}

fn fnv1a(s: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in s.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    h
}

fn sample_rational(rng: &mut ChaCha8Rng) -> BigRational {
    let half = rat(1, 2);
    loop {
        let num: i64 = rng.gen_range(-100..=100);
        let den: i64 = rng.gen_range(1..=100);
        let v = rat(num, den);
        if !v.is_zero() && v.abs() <= half {
            return v;
        }
    }
}

impl IdentityEntry {
    pub fn sides(&self) -> Vec<&Side> {
        let mut v = vec![&self.lhs, &self.rhs];
        v.extend(self.extra_sides.iter());
        v
    }

    pub fn has_tag(&self, tag: &str) -> bool {
        self.tags.iter().any(|t| t == tag)
    }

    /// `min(order, cap of every side)`.
    pub fn effective_order(&self, order: usize) -> usize {
        self.sides()
            .iter()
            .filter_map(|s| s.cap())
            .fold(order, usize::min)
    }

    pub fn resolve_mode(&self, req: ModeRequest) -> Mode {
        match req {
            ModeRequest::Auto => self.default_mode,
            ModeRequest::Specialize => Mode::Specialize,
        }
    }

    /// Evaluation points: every integer family member times `points` random
    /// draws, or a single point when nothing needs sampling.
    pub fn assignments(&self, mode: Mode, seed: u64, points: usize) -> Vec<Assignment> {
        let mut families = vec![Assignment::new()];
        for (name, spec) in &self.params {
            if spec.domain != Domain::SmallPositiveInt {
                continue;
            }
            let [lo, hi] = spec.range.unwrap_or([1, 1]);
            families = families
                .into_iter()
                .flat_map(|a| (lo..=hi).map(move |k| a.clone().with(name, ParamValue::Int(k))))
                .collect();
        }
        let sampled: Vec<(&String, Domain)> = self
            .params
            .iter()
            .filter(|(_, s)| match s.domain {
                Domain::SymbolicZc => mode == Mode::Specialize,
                Domain::RationalInUnitInterval | Domain::Qmonomial => true,
                Domain::SmallPositiveInt => false,
            })
            .map(|(n, s)| (n, s.domain))
            .collect();
        let symbolic: Vec<&String> = self
            .params
            .iter()
            .filter(|(_, s)| s.domain == Domain::SymbolicZc && mode == Mode::Symbolic)
            .map(|(n, _)| n)
            .collect();
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ fnv1a(&self.id));
        let draws = if sampled.is_empty() { 1 } else { points.max(1) };
        let mut out = Vec::new();
        for _ in 0..draws {
            let mut point = Assignment::new();
            for _attempt in 0..1000 {
                point = Assignment::new();
                for (name, dom) in &sampled {
                    let r = sample_rational(&mut rng);
                    let v = match dom {
                        Domain::Qmonomial => ParamValue::Monomial(r, rng.gen_range(1..=2)),
                        _ => ParamValue::Rational(r),
                    };
                    point.0.insert((*name).clone(), v);
                }
                if self.satisfies(&point) {
                    break;
                }
            }
            for name in &symbolic {
                point.0.insert((*name).clone(), ParamValue::Symbolic);
            }
            for fam in &families {
                let mut a = point.clone();
                a.0.extend(fam.0.clone());
                out.push(a);
            }
        }
        out
    }

    fn satisfies(&self, a: &Assignment) -> bool {
        self.constraints.iter().all(|c| {
            match (a.0.get(&c.abs_less[0]), a.0.get(&c.abs_less[1])) {
                (Some(x), Some(y)) => x.size_key() < y.size_key(),
                _ => true,
            }
        })
    }

    fn validate(&self) -> Result<(), String> {
        let sides = self.sides();
        for t in &self.tags {
            if !TAGS.contains(&t.as_str()) {
                return Err(format!("unknown tag `{t}`"));
            }
        }
        for (name, spec) in &self.params {
            if spec.domain == Domain::SmallPositiveInt {
                match spec.range {
                    Some([lo, hi]) if 1 <= lo && lo <= hi => {}
                    _ => return Err(format!("parameter `{name}` needs a range [lo, hi] with 1 <= lo <= hi")),
                }
            }
        }
        for c in &self.constraints {
            for v in &c.abs_less {
                if !self.params.contains_key(v) {
                    return Err(format!("constraint names unknown parameter `{v}`"));
                }
            }
        }
        for s in &sides {
            match &s.kind {
                SideKind::Builtin { name, .. } if !BUILTINS.contains(&name.as_str()) => {
                    return Err(format!("unknown builtin `{name}`"))
                }
                SideKind::Counter(n) if !COUNTERS.contains(&n.as_str()) || n == "N" => {
                    return Err(format!("unknown counter `{n}`"))
                }
                SideKind::Weighted { id, .. } if !WEIGHTS.contains(&id.as_str()) => {
                    return Err(format!("unknown weight `{id}`"))
                }
                SideKind::Sequence(n) if !SEQUENCES.contains(&n.as_str()) => {
                    return Err(format!("unknown sequence `{n}`"))
                }
                _ => {}
            }
            for e in s.exprs() {
                for v in e.free_vars() {
                    if v != "q" && !self.params.contains_key(&v) {
                        return Err(format!("side `{}` uses undeclared parameter `{v}`", s.summary()));
                    }
                }
            }
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// coefficient rings

/// A coefficient ring that sides can be evaluated in.
pub trait Ring: Coeff {
    /// The ring element standing for `z` or `c`, if the ring has one.
    fn symbol(name: &str) -> Option<Self>;
    /// Map a weighted-sum value into the ring, substituting rationals for
    /// the variables that have them.
    fn lift(
        p: &LaurentPoly,
        z: Option<&BigRational>,
        c: Option<&BigRational>,
    ) -> Result<Self, EvalError>;
    fn as_rational(&self) -> Option<BigRational>;
}

fn subst_err(e: crate::coeffring::CoeffError) -> EvalError {
    EvalError::Builtin(e.to_string())
}

impl Ring for LaurentPoly {
    fn symbol(name: &str) -> Option<Self> {
        match name {
            "z" => Some(LaurentPoly::z()),
            "c" => Some(LaurentPoly::c()),
            _ => None,
        }
    }

    fn lift(
        p: &LaurentPoly,
        z: Option<&BigRational>,
        c: Option<&BigRational>,
    ) -> Result<Self, EvalError> {
        p.substitute(z, c).map_err(subst_err)
    }

    fn as_rational(&self) -> Option<BigRational> {
        self.as_constant()
    }
}

impl Ring for BigRational {
    fn symbol(_: &str) -> Option<Self> {
        None
    }

    fn lift(
        p: &LaurentPoly,
        z: Option<&BigRational>,
        c: Option<&BigRational>,
    ) -> Result<Self, EvalError> {
        let s = p.substitute(z, c).map_err(subst_err)?;
        match s.as_constant() {
            Some(r) => Ok(r),
            None if s.terms().iter().any(|((ez, _), _)| *ez != 0) => Err(EvalError::Unassigned('z')),
            None => Err(EvalError::Unassigned('c')),
        }
    }

    fn as_rational(&self) -> Option<BigRational> {
        Some(self.clone())
    }
}

/// Evaluation context for one assignment.
pub struct Context<'a, R: Ring> {
    pub assignment: &'a Assignment,
    pub order: usize,
    env: Env<R>,
    ints: Vec<(String, i64)>,
}

impl<'a, R: Ring> Context<'a, R> {
    pub fn new(assignment: &'a Assignment, order: usize) -> Self {
        let mut env = Env::new(order);
        let mut ints = Vec::new();
        for (name, v) in &assignment.0 {
            match v {
                ParamValue::Symbolic => {
                    if let Some(s) = R::symbol(name) {
                        env = env.bind_constant(name, s);
                    }
                }
                ParamValue::Rational(r) => env = env.bind_constant(name, R::from_rational(r.clone())),
                ParamValue::Monomial(r, e) => {
                    env = env.bind(name, Monomial::new(R::from_rational(r.clone()), *e))
                }
                ParamValue::Int(k) => ints.push((name.clone(), *k)),
            }
        }
        Self {
            assignment,
            order,
            env,
            ints,
        }
    }

    pub fn eval(&self, e: &Expr) -> Result<QSeries<R>, EvalError> {
        self.eval_at(e, self.order)
    }

    fn eval_at(&self, e: &Expr, order: usize) -> Result<QSeries<R>, EvalError> {
        let ints: Vec<(&str, i64)> = self.ints.iter().map(|(n, v)| (n.as_str(), *v)).collect();
        Ok(dsl::eval_with_ints(e, &self.env.with_order(order), &ints)?)
    }

    fn arg_monomial(
        &self,
        args: &BTreeMap<String, Expr>,
        name: &str,
        default: &str,
    ) -> Result<Monomial<R>, EvalError> {
        let s = match args.get(name) {
            Some(e) => self.eval(e)?,
            None => self.eval(&dsl::parse(default).expect("builtin default parses"))?,
        };
        let nz: Vec<usize> = (0..=self.order).filter(|&k| !s.coeff(k).is_zero()).collect();
        match nz.as_slice() {
            [] => Ok(Monomial::new(R::zero(), 0)),
            [k] => Ok(Monomial::new(s.coeff(*k).clone(), *k as i64)),
            _ => Err(EvalError::Builtin(format!("argument `{name}` is not a monomial"))),
        }
    }

    fn arg_int(&self, args: &BTreeMap<String, Expr>, name: &str) -> Result<i64, EvalError> {
        let e = args
            .get(name)
            .ok_or_else(|| EvalError::Builtin(format!("missing argument `{name}`")))?;
        let s = self.eval_at(e, 0)?;
        s.coeff(0)
            .as_rational()
            .filter(|r| r.is_integer())
            .and_then(|r| r.to_integer().to_i64())
            .ok_or_else(|| EvalError::Builtin(format!("argument `{name}` is not an integer")))
    }

    /// Evaluate one side through `q^order`.
    pub fn eval_side(&self, side: &Side) -> Result<QSeries<R>, EvalError> {
        let order = self.order;
        let mut s = match &side.kind {
            SideKind::Dsl(e) => self.eval(e)?,
            SideKind::Builtin { name, args } => self.builtin(name, args)?,
            SideKind::Counter(name) => {
                let mut v = vec![R::from_rational(side.constant.clone())];
                for n in 1..=order {
                    v.push(R::from_int(cached_count(name, n as u32)?));
                }
                QSeries::from_coeffs(v, order)
            }
            SideKind::Weighted { id, subs } => {
                let z = subs.get(&'z').or_else(|| self.assignment.rational('z'));
                let c = subs.get(&'c').or_else(|| self.assignment.rational('c'));
                let mut v = vec![R::from_rational(side.constant.clone())];
                for n in 1..=order {
                    v.push(R::lift(&cached_weight(id, n as u32)?, z, c)?);
                }
                QSeries::from_coeffs(v, order)
            }
            SideKind::Sequence(name) => {
                let z = self.assignment.rational('z');
                let mut v = vec![R::from_rational(side.constant.clone())];
                for n in 1..=order {
                    v.push(R::lift(&sequence_value(name, n as u32)?, z, None)?);
                }
                QSeries::from_coeffs(v, order)
            }
        };
        if let Some(k) = &side.scale {
            s = s.scale(&R::from_rational(k.clone()));
        }
        if let Some(t) = &side.times {
            s = s.mul(&self.eval(t)?)?;
        }
        if let Some(p) = &side.plus {
            s = s.add(&self.eval(p)?)?;
        }
        Ok(s)
    }

    fn builtin(&self, name: &str, args: &BTreeMap<String, Expr>) -> Result<QSeries<R>, EvalError> {
        let order = self.order;
        match name {
            "B_RANK_GF_BILATERAL" => {
                let z = self.arg_monomial(args, "z", "z")?;
                rank_gf_bilateral(&unit_arg(&z)?, order)
            }
            "B_RANK_GF_POSITIVE" => {
                let z = self.arg_monomial(args, "z", "z")?;
                rank_gf_positive(&unit_arg(&z)?, order)
            }
            "B_N2_SERIES" => n2_series(order),
            "B_FINE_F" => {
                let n = self.arg_int(args, "n")?;
                let c = self.arg_monomial(args, "c", "c")?;
                fine_f(n, &c, order)
            }
            "B_FINE_TAIL" => {
                let c = self.arg_monomial(args, "c", "c")?;
                fine_tail(&c, order)
            }
            "B_ZAGIER_H" => Ok(zagier_h(order)),
            "B_LIMIT_C1" => limit_c1(order),
            _ => Err(EvalError::Builtin(format!("unknown builtin `{name}`"))),
        }
    }
}

fn unit_arg<R: Ring>(z: &Monomial<R>) -> Result<(R, R), EvalError> {
    if z.e_q != 0 {
        return Err(EvalError::Builtin("z must not carry a power of q".into()));
    }
    let inv = z
        .coef
        .unit_inverse()
        .ok_or_else(|| EvalError::Builtin(format!("z = {} is not invertible", z.coef)))?;
    Ok((z.coef.clone(), inv))
}

// ---------------------------------------------------------------------------
// built-in series

fn sign<R: Coeff>(n: i64) -> R {
    if n.rem_euclid(2) == 0 {
        R::one()
    } else {
        R::one().neg_ref()
    }
}

fn inv_q_inf<R: Coeff>(order: usize) -> Result<QSeries<R>, EvalError> {
    Ok(poch(&Monomial::<R>::q_power(1), Count::Infinite, 1, order)?.invert()?)
}

/// Jacobi character `(12/n)`.
pub fn chi12(n: i64) -> i64 {
    match n.rem_euclid(12) {
        1 | 11 => 1,
        5 | 7 => -1,
        _ => 0,
    }
}

fn rank_gf_bilateral<R: Coeff>((z, zinv): &(R, R), order: usize) -> Result<QSeries<R>, EvalError> {
    let mut s = QSeries::<R>::zero(order);
    for n in 1i64.. {
        let e = (n * (3 * n + 1) / 2) as usize;
        if e > order {
            break;
        }
        let pos = QSeries::<R>::one(order)
            .shift(e, order)
            .scale(&sign(n))
            .div_binomial(z, n as usize);
        let neg = QSeries::<R>::one(order)
            .shift(e, order)
            .scale(&sign::<R>(n + 1).mul_ref(zinv))
            .div_binomial(zinv, n as usize);
        s.add_assign(&pos);
        s.add_assign(&neg);
    }
    let one_minus_z = R::one().sub_ref(z);
    let num = QSeries::one(order).add(&s.scale(&one_minus_z))?;
    Ok(num.mul(&inv_q_inf(order)?)?)
}

fn rank_gf_positive<R: Coeff>((z, zinv): &(R, R), order: usize) -> Result<QSeries<R>, EvalError> {
    let mut den_inv = QSeries::<R>::one(order);
    let mut s = QSeries::<R>::one(order);
    for n in 1usize.. {
        if n * n > order {
            break;
        }
        den_inv = den_inv.div_binomial(z, n).div_binomial(zinv, n);
        s.add_assign(&den_inv.shift(n * n, order));
    }
    Ok(s)
}

fn n2_series<R: Coeff>(order: usize) -> Result<QSeries<R>, EvalError> {
    let mut s = QSeries::<R>::zero(order);
    for n in 1usize.. {
        let e = n * (3 * n + 1) / 2;
        if e > order {
            break;
        }
        let t = QSeries::<R>::one(order)
            .shift(e, order)
            .mul_binomial(&R::one().neg_ref(), n)
            .div_binomial(&R::one(), n)
            .div_binomial(&R::one(), n)
            .scale(&sign(n as i64));
        s.add_assign(&t);
    }
    Ok(s.mul(&inv_q_inf(order)?)?)
}

/// `sum_m (c q^n)^m / (q^{n+1}; q)_m`.
fn fine_f<R: Coeff>(n: i64, c: &Monomial<R>, order: usize) -> Result<QSeries<R>, EvalError> {
    if n < 0 {
        return Err(EvalError::Builtin(format!("B_FINE_F needs n >= 0, got {n}")));
    }
    let step = n + c.e_q;
    let mut acc = QSeries::<R>::one(order);
    if c.coef.is_zero() {
        return Ok(acc);
    }
    if step <= 0 {
        return Err(EvalError::Dsl(DslError::NonConvergent {
            var: "m".into(),
            terms: 0,
        }));
    }
    let mut term = QSeries::<R>::one(order);
    for m in 1i64.. {
        if step * m > order as i64 {
            break;
        }
        term = term
            .shift(step as usize, order)
            .scale(&c.coef)
            .div_binomial(&R::one(), (n + m) as usize);
        acc.add_assign(&term);
    }
    Ok(acc)
}

/// `sum_{n>=1} q^{n(n+1)} (q^{n+1})_inf / ((1-q^n)(q)_n) * F(0, q^n; c q^n)`.
fn fine_tail<R: Coeff>(c: &Monomial<R>, order: usize) -> Result<QSeries<R>, EvalError> {
    let mut acc = QSeries::<R>::zero(order);
    for n in 1usize.. {
        let e = n * (n + 1);
        if e > order {
            break;
        }
        let mut t = poch(&Monomial::<R>::q_power(n as i64 + 1), Count::Infinite, 1, order)?;
        t = t.div_binomial(&R::one(), n);
        for j in 1..=n {
            t = t.div_binomial(&R::one(), j);
        }
        let t = t.shift(e, order).mul(&fine_f(n as i64, c, order)?)?;
        acc.add_assign(&t);
    }
    Ok(acc)
}

/// `sum_{n>=1} n (12/n) q^{(n^2-1)/24}`.
pub fn zagier_h<R: Coeff>(order: usize) -> QSeries<R> {
    let mut s = QSeries::<R>::zero(order);
    for n in 1i64.. {
        if (n * n - 1) / 24 > order as i64 {
            break;
        }
        let ch = chi12(n);
        if ch != 0 {
            let k = ((n * n - 1) / 24) as usize;
            let v = s.coeff(k).add_ref(&R::from_int(n * ch));
            s.set_coeff(k, v);
        }
    }
    s
}

const LIMIT_C1_NUMERATOR: &str = "-c + poch(q, inf)/poch(c*q, inf)*(c + (1 - c)*sum(n=1..inf, poch(c*q, n)/poch(q, n)*q^n/(1 - q^n)))";

/// The `c -> 1` limit of `(numerator)/(1-c)^2`: the numerator's coefficients
/// are exact multiples of `(1-c)^2`; divide and set `c = 1`.
fn limit_c1<R: Coeff>(order: usize) -> Result<QSeries<R>, EvalError> {
    let num = dsl::eval_str::<LaurentPoly>(LIMIT_C1_NUMERATOR, &Env::symbolic(order))?;
    let one_minus_c = LaurentPoly::one().sub(&LaurentPoly::c());
    let q = num.scalar_exact_div(&one_minus_c.mul(&one_minus_c))?;
    let one = BigRational::one();
    q.map(|p| {
        p.eval_c(&one)
            .map_err(subst_err)?
            .as_constant()
            .map(R::from_rational)
            .ok_or_else(|| EvalError::Builtin("limit still depends on z".into()))
    })
}

// ---------------------------------------------------------------------------
// counters, weights and sequences

type Memo<V> = OnceLock<Mutex<HashMap<(String, u32), V>>>;

static COUNT_MEMO: Memo<i64> = OnceLock::new();
static WEIGHT_MEMO: Memo<LaurentPoly> = OnceLock::new();

fn memo<V: Clone, E>(
    m: &'static Memo<V>,
    name: &str,
    n: u32,
    f: impl FnOnce() -> Result<V, E>,
) -> Result<V, E> {
    let map = m.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(v) = map.lock().unwrap().get(&(name.to_string(), n)) {
        return Ok(v.clone());
    }
    let v = f()?;
    map.lock().unwrap().insert((name.to_string(), n), v.clone());
    Ok(v)
}

/// `count(name, n)` memoized across the process.
pub fn cached_count(name: &str, n: u32) -> Result<i64, PartitionError> {
    memo(&COUNT_MEMO, name, n, || partitions::count(name, n, None))
}

/// `weighted_sum(id, n)` memoized across the process.
pub fn cached_weight(id: &str, n: u32) -> Result<LaurentPoly, PartitionError> {
    memo(&WEIGHT_MEMO, id, n, || partitions::weighted_sum(id, n))
}

fn p_or_one(m: i64) -> Result<i64, PartitionError> {
    if m == 0 {
        Ok(1)
    } else {
        cached_count("p", m as u32)
    }
}

/// Value at `n >= 1` of a named sequence.
pub fn sequence_value(name: &str, n: u32) -> Result<LaurentPoly, EvalError> {
    let c = |x: i64| LaurentPoly::constant(int(x));
    let cnt = |k: &str| cached_count(k, n);
    let ni = n as i64;
    let v = match name {
        "n_p_n" => c(ni * cnt("p")?),
        "spt_rank_moment" => LaurentPoly::constant(int(ni * cnt("p")?) - rat(cnt("N2")?, 2)),
        "d_plus_w" => c(cnt("d")? + cnt("w")?),
        "wnrep" => {
            let mut acc = 0i64;
            for k in 1i64.. {
                let shift = (k * k - 1) / 24;
                if shift > ni {
                    break;
                }
                if chi12(k) != 0 {
                    acc += k * chi12(k) * p_or_one(ni - shift)?;
                }
            }
            LaurentPoly::constant(int(-2 * cnt("d")?) - rat(acc, 2))
        }
        "alladi" => {
            let r = (n as f64).sqrt().round() as i64;
            if r * r == ni {
                c(if r % 2 == 1 { 1 } else { -1 })
            } else {
                c(0)
            }
        }
        "gar_d81" => {
            let s = if (ni * (ni - 1) / 2) % 2 == 0 { 1 } else { -1 };
            c(s * cnt("d81")?)
        }
        "d_e_minus_d_o" => c(cnt("d_e")? - cnt("d_o")?),
        "ssptd_o_minus_e" => c(cnt("ssptd_o")? - cnt("ssptd_e")?),
        "ssptd_o_plus_e" => c(cnt("ssptd_o")? + cnt("ssptd_e")?),
        "newdn_rep" => cached_weight("W_NEWDN_A", n)?.sub(&cached_weight("W_NEWDN_B", n)?),
        "rank_gf" => {
            let mut acc = LaurentPoly::zero();
            for p in partitions::AllPartitions::new(n) {
                let r = p.stats().rank as i32;
                acc = acc.add(&LaurentPoly::monomial(BigRational::one(), r, 0));
            }
            acc
        }
        _ => return Err(EvalError::Builtin(format!("unknown sequence `{name}`"))),
    };
    Ok(v)
}

// ---------------------------------------------------------------------------
// reports

#[derive(Debug, Clone, PartialEq)]
pub enum Verdict {
    Pass,
    Fail,
    Error { kind: String, message: String },
}

impl Verdict {
    pub fn is_pass(&self) -> bool {
        *self == Verdict::Pass
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::Pass => f.write_str("PASS"),
            Verdict::Fail => f.write_str("FAIL"),
            Verdict::Error { kind, .. } => write!(f, "ERROR({kind})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Mismatch {
    pub power: usize,
    pub lhs: String,
    pub rhs: String,
    /// Indices of the two disagreeing sides (0 = lhs, 1 = rhs, 2.. = extras).
    pub sides: [usize; 2],
    pub params: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub id: String,
    pub verdict: Verdict,
    pub mode: Mode,
    /// Order actually compared, after side caps.
    pub order: usize,
    pub seed: u64,
    pub params: Vec<BTreeMap<String, String>>,
    pub first_mismatch: Option<Mismatch>,
    pub ms: u128,
    pub remark: bool,
}

impl Report {
    /// JSON object; `ms` is null unless `timing` so output is reproducible.
    pub fn to_json(&self, timing: bool) -> serde_json::Value {
        let error = match &self.verdict {
            Verdict::Error { message, .. } => json!(message),
            _ => serde_json::Value::Null,
        };
        json!({
            "id": self.id,
            "verdict": self.verdict.to_string(),
            "mode": self.mode,
            "order": self.order,
            "seed": self.seed,
            "params": self.params,
            "first_mismatch": self.first_mismatch,
            "ms": if timing { json!(self.ms as u64) } else { serde_json::Value::Null },
            "error": error,
            "remark": self.remark,
        })
    }

    /// One line for the text table.
    pub fn text_line(&self) -> String {
        let mut s = format!(
            "{:<10} {:<22} {:<10} N={:<4} {:>7} ms",
            self.verdict.to_string(),
            self.id,
            self.mode.to_string(),
            self.order,
            self.ms
        );
        if self.remark {
            s.push_str("  [remark]");
        }
        if let Some(m) = &self.first_mismatch {
            let p: Vec<String> = m.params.iter().map(|(k, v)| format!("{k}={v}")).collect();
            s.push_str(&format!(
                "\n    sides {} vs {} differ at q^{}: {} vs {} (seed {}{}{})",
                m.sides[0],
                m.sides[1],
                m.power,
                m.lhs,
                m.rhs,
                self.seed,
                if p.is_empty() { "" } else { ", " },
                p.join(", ")
            ));
        }
        if let Verdict::Error { message, .. } = &self.verdict {
            s.push_str(&format!("\n    {message}"));
        }
        s
    }
}

/// JSON array of reports.
pub fn reports_to_json(reports: &[Report], timing: bool) -> String {
    let v: Vec<serde_json::Value> = reports.iter().map(|r| r.to_json(timing)).collect();
    serde_json::to_string_pretty(&v).expect("reports serialize")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VerifyOptions {
    pub order: usize,
    pub mode: ModeRequest,
    pub seed: u64,
    pub points: usize,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            order: 40,
            mode: ModeRequest::Auto,
            seed: 0,
            points: 3,
        }
    }
}

enum Outcome {
    Pass,
    Fail(Mismatch),
    Error(EvalError, Assignment),
}

fn check<R: Ring>(entry: &IdentityEntry, assignments: &[Assignment], order: usize) -> Outcome {
    let sides = entry.sides();
    for a in assignments {
        let ctx = Context::<R>::new(a, order);
        let mut vals = Vec::with_capacity(sides.len());
        for s in &sides {
            match ctx.eval_side(s) {
                Ok(v) => vals.push(v),
                Err(e) => return Outcome::Error(e, a.clone()),
            }
        }
        let mut best: Option<(usize, usize, usize)> = None;
        for i in 0..vals.len() {
            for j in i + 1..vals.len() {
                let k = (0..=order).find(|&k| vals[i].coeff(k) != vals[j].coeff(k));
                if let Some(k) = k {
                    if best.is_none_or(|(bk, _, _)| k < bk) {
                        best = Some((k, i, j));
                    }
                }
            }
        }
        if let Some((k, i, j)) = best {
            return Outcome::Fail(Mismatch {
                power: k,
                lhs: vals[i].coeff(k).to_string(),
                rhs: vals[j].coeff(k).to_string(),
                sides: [i, j],
                params: a.to_strings(),
            });
        }
    }
    Outcome::Pass
}

/// Verify a single entry.
pub fn verify_entry(entry: &IdentityEntry, opts: &VerifyOptions) -> Report {
    let start = Instant::now();
    let mode = entry.resolve_mode(opts.mode);
    let assignments = entry.assignments(mode, opts.seed, opts.points);
    let order = entry.effective_order(opts.order);
    let outcome = match mode {
        Mode::Symbolic => check::<LaurentPoly>(entry, &assignments, order),
        Mode::Specialize => check::<BigRational>(entry, &assignments, order),
    };
    let (verdict, first_mismatch) = match outcome {
        Outcome::Pass => (Verdict::Pass, None),
        Outcome::Fail(m) => (Verdict::Fail, Some(m)),
        Outcome::Error(e, a) => (
            Verdict::Error {
                kind: e.kind().to_string(),
                message: if a.0.is_empty() {
                    e.to_string()
                } else {
                    format!("{e} (at {a})")
                },
            },
            None,
        ),
    };
    Report {
        id: entry.id.clone(),
        verdict,
        mode,
        order,
        seed: opts.seed,
        params: assignments.iter().map(Assignment::to_strings).collect(),
        first_mismatch,
        ms: start.elapsed().as_millis(),
        remark: entry.has_tag("remark"),
    }
}

// ---------------------------------------------------------------------------
// catalog

/// Selects entries by id or tag.
#[derive(Debug, Clone, Default)]
pub struct Filter {
    pub only: Vec<String>,
    pub skip: Vec<String>,
}

impl Filter {
    fn hits(list: &[String], e: &IdentityEntry) -> bool {
        list.iter().any(|x| *x == e.id || e.has_tag(x))
    }

    pub fn accepts(&self, e: &IdentityEntry) -> bool {
        (self.only.is_empty() || Self::hits(&self.only, e)) && !Self::hits(&self.skip, e)
    }
}

#[derive(Debug, Clone)]
pub struct Catalog {
    entries: Vec<IdentityEntry>,
}

impl Catalog {
    /// Parse and validate catalog JSON.
    pub fn from_json(text: &str) -> Result<Self, CatalogError> {
        let file: CatalogFile = serde_json::from_str(text)?;
        let mut seen = std::collections::HashSet::new();
        for e in &file.entries {
            if !seen.insert(e.id.as_str()) {
                return Err(CatalogError::Invalid(format!("duplicate id `{}`", e.id)));
            }
            e.validate()
                .map_err(|m| CatalogError::Invalid(format!("{}: {m}", e.id)))?;
        }
        Ok(Self {
            entries: file.entries,
        })
    }

    pub fn from_path(path: &Path) -> Result<Self, CatalogError> {
        let text = std::fs::read_to_string(path).map_err(|source| CatalogError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_json(&text)
    }

    /// The shipped catalog.
    pub fn builtin() -> Self {
        Self::from_json(DEFAULT_CATALOG).expect("shipped catalog is valid")
    }

    /// `path`, else `$QVERIFY_CATALOG`, else the shipped catalog.
    pub fn load(path: Option<&Path>) -> Result<Self, CatalogError> {
        if let Some(p) = path {
            return Self::from_path(p);
        }
        match std::env::var_os(CATALOG_ENV) {
            Some(p) if !p.is_empty() => Self::from_path(Path::new(&p)),
            _ => Ok(Self::builtin()),
        }
    }

    pub fn entries(&self) -> &[IdentityEntry] {
        &self.entries
    }

    pub fn get(&self, id: &str) -> Result<&IdentityEntry, CatalogError> {
        self.entries
            .iter()
            .find(|e| e.id == id)
            .ok_or_else(|| CatalogError::UnknownIdentity(id.to_string()))
    }

    pub fn verify(&self, id: &str, opts: &VerifyOptions) -> Result<Report, CatalogError> {
        Ok(verify_entry(self.get(id)?, opts))
    }

    /// One report per selected entry, in catalog order. `jobs` defaults to
    /// the available parallelism.
    pub fn verify_all(&self, opts: &VerifyOptions, filter: &Filter, jobs: Option<usize>) -> Vec<Report> {
        let selected: Vec<&IdentityEntry> = self.entries.iter().filter(|e| filter.accepts(e)).collect();
        let run = || selected.par_iter().map(|e| verify_entry(e, opts)).collect();
        match rayon::ThreadPoolBuilder::new()
            .num_threads(jobs.unwrap_or(0))
            .build()
        {
            Ok(pool) => pool.install(run),
            Err(_) => run(),
        }
    }
}
