use std::path::PathBuf;
use std::process::{Command, Output};

fn qverify(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qverify"))
        .args(args)
        .env_remove("QVERIFY_CATALOG")
        .output()
        .expect("spawn qverify")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn tmp_file(name: &str, text: &str) -> PathBuf {
    let p = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join(name);
    std::fs::write(&p, text).unwrap();
    p
}

const SMALL_CATALOG: &str = r#"{"entries": [
  {"id": "lambert", "description": "Lambert series for d(n)", "tags": ["core"],
   "default_mode": "symbolic",
   "lhs": "sum(n=1..inf, q^n/(1 - q^n))", "rhs": {"counter": "d"}, "anchor": "divisors"},
  {"id": "broken", "description": "off by q^3", "tags": ["remark"],
   "default_mode": "symbolic",
   "lhs": "1/(1 - q)", "rhs": "1/(1 - q) + q^3", "anchor": "broken"}
]}"#;

#[test]
fn expand_divisor_series() {
    let o = qverify(&["expand", "sum(n=1..inf, q^n/(1-q^n))", "--order", "6"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).trim(), "q + 2*q^2 + 2*q^3 + 3*q^4 + 2*q^5 + 4*q^6 + O(q^7)");
}

#[test]
fn expand_with_values() {
    let o = qverify(&["expand", "poch(z*q, 2)", "--order", "3", "--z", "-1/2"]);
    assert!(o.status.success());
    // (1 + q/2)(1 + q^2/2)
    assert_eq!(stdout(&o).trim(), "1 + 1/2*q + 1/2*q^2 + 1/4*q^3 + O(q^4)");
}

#[test]
fn table_spt() {
    let o = qverify(&["table", "spt", "--max", "4"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o), "n\tspt\n1\t1\n2\t3\n3\t5\n4\t10\n");
}

#[test]
fn wtable_ranks() {
    let o = qverify(&["wtable", "W_RANKS_L", "--max", "5"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).lines().last(), Some("5\t4"));
}

#[test]
fn verify_kluyver_order_100() {
    let o = qverify(&["verify", "kluyver", "--order", "100"]);
    assert_eq!(o.status.code(), Some(0));
    let s = stdout(&o);
    assert!(s.starts_with("PASS"), "{s}");
    assert!(s.contains("N=100"), "{s}");
}

#[test]
fn usage_errors_exit_2() {
    for args in [
        &["verify", "no_such_identity"][..],
        &["expand", "1/(1-"],
        &["table", "no_such_counter"],
        &["wtable", "W_NOPE"],
        &["verify", "kluyver", "--mode", "symbolic"],
        &["expand", "q", "--z", "abc"],
        &["frobnicate"],
    ] {
        let o = qverify(args);
        assert_eq!(o.status.code(), Some(2), "{args:?}");
        assert!(!o.stderr.is_empty(), "{args:?}");
    }
}

#[test]
fn json_report_schema() {
    let o = qverify(&["verify", "gen_of_garvan", "--order", "8", "--format", "json"]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let r = &v.as_array().unwrap()[0];
    let keys: Vec<&str> = r.as_object().unwrap().keys().map(String::as_str).collect();
    assert_eq!(
        keys,
        ["id", "verdict", "mode", "order", "seed", "params", "first_mismatch", "ms", "error", "remark"]
    );
    assert_eq!(r["verdict"], "PASS");
    assert_eq!(r["mode"], "symbolic");
    assert!(r["ms"].is_null());

    let o = qverify(&["verify", "gen_of_garvan", "--order", "8", "--format", "json", "--timing"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(v[0]["ms"].is_u64());
}

#[test]
fn json_is_byte_identical_across_runs_and_jobs() {
    let args = |jobs: &'static str| {
        ["verify-all", "--order", "12", "--format", "json", "--seed", "7", "--jobs", jobs, "--only", "core"]
    };
    let a = qverify(&args("1"));
    let b = qverify(&args("1"));
    let c = qverify(&args("3"));
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(a.stdout, c.stdout);
}

#[test]
fn only_and_skip_filters() {
    let o = qverify(&["verify-all", "--order", "6", "--only", "kluyver,merca", "--format", "json"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let ids: Vec<&str> = v.as_array().unwrap().iter().map(|r| r["id"].as_str().unwrap()).collect();
    assert_eq!(ids, ["kluyver", "merca"]);

    let o = qverify(&["verify-all", "--order", "6", "--only", "weighted", "--skip", "w_ffw,w_alla", "--format", "json"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let ids: Vec<&str> = v.as_array().unwrap().iter().map(|r| r["id"].as_str().unwrap()).collect();
    assert!(ids.contains(&"w_ranks"));
    assert!(!ids.contains(&"w_ffw") && !ids.contains(&"w_alla") && !ids.contains(&"kluyver"));
}

#[test]
fn catalog_flag_and_env_override() {
    let path = tmp_file("cli_small_catalog.json", SMALL_CATALOG);
    let p = path.to_str().unwrap();

    let o = qverify(&["--catalog", p, "list"]);
    assert_eq!(stdout(&o), "lambert\tcore\tsymbolic\tdivisors\nbroken\tremark\tsymbolic\tbroken\n");

    let o = qverify(&["--catalog", p, "verify", "lambert", "--order", "30"]);
    assert_eq!(o.status.code(), Some(0));

    let o = qverify(&["--catalog", p, "verify-all", "--order", "10"]);
    assert_eq!(o.status.code(), Some(1));
    let s = stdout(&o);
    assert!(s.contains("differ at q^3"), "{s}");
    assert!(s.contains("2 checked, 1 passed, 1 not passed"), "{s}");

    let o = Command::new(env!("CARGO_BIN_EXE_qverify"))
        .args(["verify", "broken", "--order", "2"])
        .env("QVERIFY_CATALOG", &path)
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0), "q^3 lies beyond order 2");

    let o = qverify(&["--catalog", "/nonexistent/catalog.json", "list"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn every_listed_id_verifies() {
    let o = qverify(&["list"]);
    let ids: Vec<String> = stdout(&o).lines().map(|l| l.split('\t').next().unwrap().to_string()).collect();
    assert!(ids.len() >= 60, "{}", ids.len());
    for id in &ids {
        let o = qverify(&["verify", id, "--order", "6", "--points", "1"]);
        assert_eq!(o.status.code(), Some(0), "{id}: {}", stdout(&o));
    }
}
