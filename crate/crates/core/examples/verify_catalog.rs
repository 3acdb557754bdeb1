//! Verify every catalog entry and print one line per entry.
//!
//! `cargo run --release --example verify_catalog [order]`

use qverify::catalog::{Catalog, Filter, VerifyOptions};

fn main() {
    let order = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(40);
    let catalog = Catalog::builtin();
    let opts = VerifyOptions {
        order,
        ..Default::default()
    };
    let reports = catalog.verify_all(&opts, &Filter::default(), None);
    for r in &reports {
        println!("{}", r.text_line());
    }
    let bad = reports.iter().filter(|r| !r.verdict.is_pass()).count();
    println!("{} entries, {} not passing", reports.len(), bad);
}
