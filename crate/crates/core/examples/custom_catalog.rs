//! Build a catalog from JSON text, including a deliberately broken entry,
//! and run it with a tag filter.
//!
//! `cargo run --example custom_catalog`

use qverify::catalog::{Catalog, Filter, VerifyOptions};

const CATALOG: &str = r#"{
  "entries": [
    {
      "id": "euler_pentagonal",
      "description": "Euler's pentagonal number theorem",
      "tags": ["core"],
      "default_mode": "symbolic",
      "lhs": "poch(q, inf)",
      "rhs": "1 + sum(n=1..inf, (-1)^n*(q^(n*(3*n-1)/2) + q^(n*(3*n+1)/2)))",
      "anchor": "pentagonal numbers"
    },
    {
      "id": "lambert_swap",
      "description": "Swapping the two summations of a Lambert series",
      "tags": ["core"],
      "default_mode": "specialize",
      "params": { "a": "RATIONAL_IN_UNIT_INTERVAL" },
      "lhs": "sum(n=1..inf, a^n*q^n/(1 - q^n))",
      "rhs": "sum(n=1..inf, a*q^n/(1 - a*q^n))",
      "anchor": "Lambert series"
    },
    {
      "id": "broken",
      "description": "Divisor series with an extra q^3",
      "tags": ["remark"],
      "default_mode": "symbolic",
      "lhs": "sum(n=1..inf, q^n/(1 - q^n)) + q^3",
      "rhs": { "counter": "d" },
      "anchor": "negative control"
    }
  ]
}"#;

fn main() {
    let catalog = Catalog::from_json(CATALOG).unwrap();
    let opts = VerifyOptions {
        order: 30,
        ..Default::default()
    };
    for r in catalog.verify_all(&opts, &Filter::default(), Some(1)) {
        println!("{}", r.text_line());
    }
    let core_only = Filter {
        only: vec!["core".into()],
        skip: vec![],
    };
    let n = catalog.verify_all(&opts, &core_only, None).len();
    println!("core entries: {n}");
}
