//! The built-in series builders, exercised through one-off catalog entries.
//!
//! `cargo run --release --example builtin_series`

use num_rational::BigRational;
use qverify::catalog::{Assignment, Catalog, Context, ParamValue};

const CATALOG: &str = r#"{"entries": [
  {"id": "h", "description": "", "default_mode": "symbolic",
   "lhs": {"builtin": "B_ZAGIER_H"}, "rhs": "0"},
  {"id": "n2", "description": "", "default_mode": "symbolic",
   "lhs": {"builtin": "B_N2_SERIES"}, "rhs": {"counter": "N2", "scale": "-1/2"}},
  {"id": "fine", "description": "", "default_mode": "symbolic",
   "lhs": {"builtin": "B_FINE_F", "args": {"n": "2", "c": "1"}}, "rhs": "0"},
  {"id": "limit", "description": "", "default_mode": "symbolic",
   "lhs": {"builtin": "B_LIMIT_C1"}, "rhs": "0"},
  {"id": "rank", "description": "", "default_mode": "specialize",
   "params": {"z": "SYMBOLIC_ZC"},
   "lhs": {"builtin": "B_RANK_GF_BILATERAL"}, "rhs": {"builtin": "B_RANK_GF_POSITIVE"}}
]}"#;

fn main() {
    let catalog = Catalog::from_json(CATALOG).unwrap();
    let none = Assignment::new();
    let z = Assignment::new().with("z", ParamValue::Rational(BigRational::new(2.into(), 5.into())));
    for e in catalog.entries() {
        let point = if e.id == "rank" { &z } else { &none };
        let ctx = Context::<BigRational>::new(point, 8);
        for side in e.sides() {
            if let Ok(s) = ctx.eval_side(side) {
                if !s.is_zero() {
                    println!("{:<6} {:<22} {s}", e.id, side.summary());
                }
            }
        }
    }
}
