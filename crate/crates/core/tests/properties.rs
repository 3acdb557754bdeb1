use num_bigint::BigInt;
use num_rational::BigRational;
use proptest::prelude::*;

use qverify::coeffring::{Coeff, LaurentPoly};
use qverify::dsl::{self, Env};
use qverify::partitions::{self, AllPartitions, Partition, PartitionClass};
use qverify::qseries::QSeries;

fn rational() -> impl Strategy<Value = BigRational> {
    (-6i64..=6, 1i64..=5).prop_map(|(n, d)| BigRational::new(BigInt::from(n), BigInt::from(d)))
}

fn nonzero_rational() -> impl Strategy<Value = BigRational> {
    (prop_oneof![-6i64..=-1, 1i64..=6], 1i64..=5)
        .prop_map(|(n, d)| BigRational::new(BigInt::from(n), BigInt::from(d)))
}

fn laurent() -> impl Strategy<Value = LaurentPoly> {
    prop::collection::vec(((-3i32..=3, -3i32..=3), rational()), 0..5).prop_map(LaurentPoly::from_terms)
}

fn rational_series(order: usize) -> impl Strategy<Value = QSeries<BigRational>> {
    prop::collection::vec(rational(), order + 1).prop_map(move |v| QSeries::from_coeffs(v, order))
}

/// Small DSL expressions that are power series in q with Laurent coefficients.
fn expr() -> impl Strategy<Value = String> {
    let qpos = prop_oneof![
        Just("q".to_string()),
        Just("z*q".to_string()),
        Just("c*q^2".to_string()),
        Just("-q^3".to_string()),
        Just("q/z".to_string()),
    ];
    let leaf = prop_oneof![
        qpos.clone(),
        Just("z".to_string()),
        Just("c".to_string()),
        Just("3/7".to_string()),
        Just("1".to_string()),
    ];
    leaf.prop_recursive(3, 16, 2, move |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a} + {b})")),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a} - {b})")),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a})*({b})")),
            (inner.clone(), qpos.clone()).prop_map(|(a, x)| format!("({a})/(1 - {x})")),
            (qpos.clone(), 0u32..4).prop_map(|(x, k)| format!("poch({x}, {k})")),
            qpos.clone().prop_map(|x| format!("poch({x}, inf)")),
            qpos.clone().prop_map(|x| format!("sum(n=1..inf, ({x})^n/(1 - q^n))")),
        ]
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn laurent_ring_axioms(a in laurent(), b in laurent(), c in laurent()) {
        prop_assert_eq!(a.mul(&b.add(&c)), a.mul(&b).add(&a.mul(&c)));
        prop_assert_eq!(a.mul(&b).mul(&c), a.mul(&b.mul(&c)));
        prop_assert_eq!(a.mul(&b), b.mul(&a));
        prop_assert!(a.sub(&a).is_zero());
    }

    #[test]
    fn laurent_exact_division_inverts_product(a in laurent(), b in laurent()) {
        prop_assume!(!b.is_zero());
        prop_assert_eq!(a.mul(&b).exact_div(&b).unwrap(), a);
    }

    #[test]
    fn laurent_evaluation_is_a_ring_map(
        a in laurent(), b in laurent(), z in nonzero_rational(), c in nonzero_rational()
    ) {
        let ev = |p: &LaurentPoly| p.eval(&z, &c).unwrap();
        prop_assert_eq!(ev(&a.mul(&b)), ev(&a) * ev(&b));
        prop_assert_eq!(ev(&a.add(&b)), ev(&a) + ev(&b));
    }

    #[test]
    fn series_inverse(s in rational_series(12), c0 in nonzero_rational()) {
        let mut s = s;
        s.set_coeff(0, c0);
        let one = s.mul(&s.invert().unwrap()).unwrap();
        prop_assert_eq!(one, QSeries::one(12));
    }

    #[test]
    fn series_division_inverts_product(a in rational_series(10), b in rational_series(10), b0 in nonzero_rational()) {
        let mut b = b;
        b.set_coeff(0, b0);
        prop_assert_eq!(a.mul(&b).unwrap().div(&b).unwrap(), a);
    }

    #[test]
    fn dsl_display_roundtrip(text in expr()) {
        let e = dsl::parse(&text).unwrap();
        prop_assert_eq!(dsl::parse(&e.to_string()).unwrap(), e);
    }

    #[test]
    fn dsl_truncation_is_consistent(text in expr(), small in 0usize..8) {
        let big = dsl::eval_str::<LaurentPoly>(&text, &Env::symbolic(12)).unwrap();
        let low = dsl::eval_str::<LaurentPoly>(&text, &Env::symbolic(small)).unwrap();
        prop_assert_eq!(big.truncate(small), low);
    }

    #[test]
    fn dsl_addition_distributes(a in expr(), b in expr()) {
        let env = Env::<LaurentPoly>::symbolic(8);
        let sum = dsl::eval_str(&format!("({a}) + ({b})"), &env).unwrap();
        let sa = dsl::eval_str(&a, &env).unwrap();
        let sb = dsl::eval_str(&b, &env).unwrap();
        prop_assert_eq!(sum, sa.add(&sb).unwrap());
    }

    #[test]
    fn dsl_specialization_commutes(text in expr(), z in nonzero_rational(), c in nonzero_rational()) {
        let sym = dsl::eval_str::<LaurentPoly>(&text, &Env::symbolic(8)).unwrap();
        let direct = dsl::eval_str::<BigRational>(&text, &Env::specialized(8, z.clone(), c.clone())).unwrap();
        prop_assert_eq!(sym.eval_at(&z, &c).unwrap(), direct);
    }

    #[test]
    fn conjugation_is_an_involution(n in 1u32..16, pick in any::<prop::sample::Index>()) {
        let all: Vec<Partition> = AllPartitions::new(n).collect();
        let p = pick.get(&all);
        let conj = p.conjugate();
        prop_assert_eq!(conj.size(), n);
        prop_assert_eq!(conj.conjugate(), p.clone());
        prop_assert_eq!(conj.stats().rank, -p.stats().rank);
    }
}

#[test]
fn distinct_parts_equinumerous_with_odd_parts() {
    for n in 1..=30 {
        assert_eq!(
            partitions::enumerate(PartitionClass::Distinct, n).count(),
            partitions::enumerate(PartitionClass::OddParts, n).count(),
            "n = {n}"
        );
    }
}

#[test]
fn partition_counts_match_pentagonal_recurrence() {
    let p = partitions::partition_numbers_pentagonal(35);
    for n in 1..=35u32 {
        assert_eq!(AllPartitions::new(n).count() as i64, p[n as usize], "n = {n}");
    }
}

#[test]
fn coefficient_trait_unit_inverse() {
    let two = LaurentPoly::from_int(2);
    assert_eq!(two.unit_inverse().unwrap().mul(&two), LaurentPoly::one());
    let zc = LaurentPoly::z().mul(&LaurentPoly::c()).scale(&BigRational::new(3.into(), 4.into()));
    assert_eq!(zc.unit_inverse().unwrap().mul(&zc), LaurentPoly::one());
    assert!(LaurentPoly::z().add(&LaurentPoly::one()).unit_inverse().is_none());
}
