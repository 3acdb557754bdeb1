use qverify::catalog::{Catalog, CatalogError, Filter, Mode, ModeRequest, Verdict, VerifyOptions};

const IDS: &str = "aftramfina agl_nsc agl_spt alla_series beframfina befvan berndt_constant \
    bhargava_adiga_dq binom_inv c0eqn c_eq_q_remark c_qm c_to_1 c_to_m1 cemz cemz_zm1 ceq_mz ceqq \
    cez cez_m1 cl cli entry1 entry2 entry3gen entry3gen00 fcz1 ffw_agl fifth fine163 finefeqn fott \
    g5 g5_alt g5_z1 g5_zm1 g_functional garvan2 garvan_z garvandiv gen_of_garvan guo_zhang_m0 heine \
    kluyver limic lpt_forms merca n2ne neglected new_identity newdneqn newdnrep_parts npn \
    nsc_ssptd_lemma nsceqn overp_gen preroot qbinom ramfina rank_gf sigma_c sigma_cq_prior \
    spt_identity ssptd_gen van_hamme w_alla w_cemz w_ceqmz w_cez w_cli w_clpti w_cto1 w_ctom1 w_deo \
    w_do_overp w_fcz1pi w_ffw w_ffw1 w_g5wpi w_g5z1 w_gar1 w_gar2 w_gwpi w_ranks w_rstar w_sigma \
    wnrep_seq z1_chain zagier";

fn one_entry(body: &str) -> String {
    format!(r#"{{"entries": [{{"id": "t", "description": "", "tags": ["core"], "default_mode": "symbolic", "anchor": "x", {body}}}]}}"#)
}

fn invalid(text: &str) -> String {
    match Catalog::from_json(text) {
        Err(CatalogError::Invalid(m)) => m,
        Err(CatalogError::Json(e)) => e.to_string(),
        other => panic!("expected a validation error, got {other:?}"),
    }
}

#[test]
fn shipped_catalog_has_every_identity() {
    let cat = Catalog::builtin();
    for id in IDS.split_whitespace() {
        let e = cat.get(id).unwrap_or_else(|_| panic!("missing {id}"));
        assert!(!e.anchor.is_empty(), "{id}");
        assert!(e.sides().len() >= 2, "{id}");
    }
}

#[test]
fn order_zero_passes_everywhere() {
    let opts = VerifyOptions { order: 0, points: 1, ..Default::default() };
    for r in Catalog::builtin().verify_all(&opts, &Filter::default(), None) {
        assert_eq!(r.verdict, Verdict::Pass, "{}", r.id);
    }
}

#[test]
fn rejects_malformed_entries() {
    let m = invalid(&one_entry(r#""lhs": "q", "rhs": {"builtin": "B_NOPE"}"#));
    assert!(m.contains("unknown builtin"), "{m}");
    let m = invalid(&one_entry(r#""lhs": "a*q", "rhs": "q""#));
    assert!(m.contains("undeclared parameter `a`"), "{m}");
    let m = invalid(&one_entry(r#""lhs": "q", "rhs": {"counter": "d", "colour": "red"}"#));
    assert!(m.contains("colour"), "{m}");
    let m = invalid(&one_entry(r#""lhs": "q", "rhs": {"counter": "d", "weighted": "W_FFW"}"#));
    assert!(!m.is_empty());
    let m = invalid(&one_entry(r#""lhs": "q +", "rhs": "q""#));
    assert!(!m.is_empty());
    let m = invalid(&one_entry(
        r#""params": {"m": "SMALL_POSITIVE_INT"}, "lhs": "q^m", "rhs": "q^m""#,
    ));
    assert!(m.contains("range"), "{m}");
    let m = invalid(&one_entry(r#""lhs": "q", "rhs": "q""#).replace(r#"["core"]"#, r#"["nightly"]"#));
    assert!(m.contains("unknown tag `nightly`"), "{m}");
    let dup = r#"{"entries": [
        {"id": "a", "description": "", "tags": [], "default_mode": "symbolic", "anchor": "", "lhs": "q", "rhs": "q"},
        {"id": "a", "description": "", "tags": [], "default_mode": "symbolic", "anchor": "", "lhs": "q", "rhs": "q"}]}"#;
    assert!(invalid(dup).contains("duplicate id"));
}

#[test]
fn earliest_mismatch_over_all_pairs() {
    let cat = Catalog::from_json(&one_entry(
        r#""lhs": "1/(1 - q)", "rhs": "1/(1 - q) + q^5", "extra_sides": ["1/(1 - q) - q^2"]"#,
    ))
    .unwrap();
    let r = cat.verify("t", &VerifyOptions::default()).unwrap();
    assert_eq!(r.verdict, Verdict::Fail);
    let m = r.first_mismatch.unwrap();
    assert_eq!(m.power, 2);
    assert_eq!(m.sides, [0, 2]);
    assert_eq!((m.lhs.as_str(), m.rhs.as_str()), ("1", "0"));
}

#[test]
fn evaluation_errors_are_reported() {
    let cat = Catalog::from_json(&one_entry(r#""lhs": "1/(q - q)", "rhs": "q""#)).unwrap();
    let r = cat.verify("t", &VerifyOptions::default()).unwrap();
    assert!(matches!(r.verdict, Verdict::Error { .. }), "{:?}", r.verdict);
    assert!(!r.verdict.is_pass());
}

#[test]
fn specialization_is_seeded() {
    let cat = Catalog::builtin();
    let opts = |seed| VerifyOptions { order: 10, seed, ..Default::default() };
    let a = cat.verify("entry3gen", &opts(1)).unwrap();
    let b = cat.verify("entry3gen", &opts(1)).unwrap();
    let c = cat.verify("entry3gen", &opts(2)).unwrap();
    assert_eq!(a.mode, Mode::Specialize);
    assert_eq!(a.params.len(), 3);
    assert_eq!(a.params, b.params);
    assert_ne!(a.params, c.params);
    assert!(a.verdict.is_pass() && c.verdict.is_pass());
}

#[test]
fn forced_specialization_of_symbolic_entry() {
    let cat = Catalog::builtin();
    let opts = VerifyOptions { order: 15, mode: ModeRequest::Specialize, ..Default::default() };
    let r = cat.verify("gen_of_garvan", &opts).unwrap();
    assert_eq!(r.mode, Mode::Specialize);
    assert!(r.verdict.is_pass());
    assert!(r.params.iter().all(|p| p.contains_key("z") && p.contains_key("c")));
}

#[test]
fn slow_sides_cap_the_compared_order() {
    let cat = Catalog::builtin();
    let r = cat.verify("agl_nsc", &VerifyOptions::default()).unwrap();
    assert_eq!(r.order, 20);
    let r = cat.verify("kluyver", &VerifyOptions { order: 60, ..Default::default() }).unwrap();
    assert_eq!(r.order, 60);
}

#[test]
fn filter_by_tag_and_id() {
    let cat = Catalog::builtin();
    let opts = VerifyOptions { order: 4, points: 1, ..Default::default() };
    let f = Filter { only: vec!["proof-ingredient".into()], skip: vec!["heine".into()] };
    let reports = cat.verify_all(&opts, &f, Some(2));
    assert!(!reports.is_empty());
    assert!(reports.iter().all(|r| cat.get(&r.id).unwrap().has_tag("proof-ingredient")));
    assert!(reports.iter().all(|r| r.id != "heine"));
}
