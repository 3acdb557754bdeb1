//! Verify one catalog identity and print its report as text and JSON.
//!
//! `cargo run --example verify_identity -- gen_of_garvan 30`

use qverify::catalog::{reports_to_json, Catalog, ModeRequest, VerifyOptions};

fn main() {
    let mut args = std::env::args().skip(1);
    let id = args.next().unwrap_or_else(|| "kluyver".into());
    let order = args.next().and_then(|s| s.parse().ok()).unwrap_or(40);
    let catalog = Catalog::builtin();
    let entry = catalog.get(&id).unwrap_or_else(|e| panic!("{e}"));
    println!("{}: {}", entry.id, entry.description);
    for (i, side) in entry.sides().iter().enumerate() {
        println!("  side {i}: {}", side.summary());
    }
    for mode in [ModeRequest::Auto, ModeRequest::Specialize] {
        let opts = VerifyOptions {
            order,
            mode,
            seed: 1,
            points: 2,
        };
        let report = catalog.verify(&id, &opts).unwrap();
        println!("{}", report.text_line());
        println!("{}", reports_to_json(&[report], false));
    }
}
