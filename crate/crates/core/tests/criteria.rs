use jacspec::criteria::*;
use jacspec::generators::*;
use jacspec::jacobi::BlockJacobiMatrix;
use jacspec::sequences::ScalarSequence as S;
use proptest::prelude::*;

fn cfg() -> CriteriaConfig {
    CriteriaConfig::default()
}

fn ev(r: &CriterionReport, k: &str) -> f64 {
    *r.evidence.get(k).unwrap_or_else(|| panic!("{} lacks evidence {k}: {:?}", r.criterion_id, r.evidence))
}

fn well_formed(r: &CriterionReport) {
    if r.verdict == Verdict::Satisfied {
        assert!(!r.evidence.is_empty(), "{} satisfied without evidence", r.criterion_id);
    }
    for (k, v) in &r.evidence {
        assert!(v.is_finite(), "{}: {k} = {v}", r.criterion_id);
    }
}

fn constant(a: f64, b: f64) -> BlockJacobiMatrix {
    scalar_family("const", move |_| a, move |_| b)
}

fn quad() -> BlockJacobiMatrix {
    scalar_family("quad", |n| ((n + 1) * (n + 1)) as f64, |n| (n + 1) as f64)
}

fn acc3() -> InteractionModel {
    InteractionModel::alpha(
        1,
        1.0,
        S::ProductWeighted { r: 5.0, c1: 1.0, exponent: 2.0 },
        BlockSequence::ConstantScalar { value: 5.0 },
    )
}

fn x0(d: S) -> InteractionModel {
    InteractionModel::alpha(1, 1.0, d, BlockSequence::Zero)
}

#[test]
fn carleman_examples() {
    let r = carleman(&make_free(1), &cfg());
    assert_eq!(r.criterion_id, "carleman");
    assert_eq!(r.verdict, Verdict::Satisfied);
    let js = make_dirac_alpha_simple(&x0(S::power(-1.0))).unwrap();
    assert_eq!(carleman(&js, &cfg()).verdict, Verdict::Satisfied);
    let jx = make_dirac_alpha(&x0(S::geometric(0.5))).unwrap();
    assert_eq!(carleman(&jx, &cfg()).verdict, Verdict::Inconclusive);
}

#[test]
fn a1a2_examples() {
    let r = selfadjoint_a1a2(&quad(), 3, &cfg());
    assert!((ev(&r, "a1") - 0.4375).abs() < 1e-12, "{:?}", r.evidence);
    assert_eq!(r.verdict, Verdict::Satisfied);
    let r = selfadjoint_a1a2(&constant(1.0, 1.0), 1, &cfg());
    assert!((ev(&r, "a1") - 2.0).abs() < 1e-12);
    assert_eq!(r.verdict, Verdict::Inconclusive);
    let r = selfadjoint_a1a2(&constant(1.0, 0.25), 1, &cfg());
    assert!((ev(&r, "a1") - 0.5).abs() < 1e-12);
    assert!((ev(&r, "a2") - 0.5).abs() < 1e-12);
    assert_eq!(r.verdict, Verdict::Satisfied);
}

#[test]
fn power_mean_examples() {
    let j = constant(1.0, 0.25);
    let r1 = selfadjoint_power_mean(&j, 1, 1.0, &cfg());
    assert_eq!(r1.verdict, Verdict::Satisfied);
    assert!((ev(&r1, "b1") - 0.5).abs() < 1e-12);
    let r2 = selfadjoint_power_mean(&j, 1, 2.0, &cfg());
    assert!(ev(&r1, "b1_normalized") <= ev(&r2, "b1_normalized") + 1e-12);
    let q = quad();
    let a = selfadjoint_power_mean(&q, 3, 1.0, &cfg());
    let b = selfadjoint_power_mean(&q, 3, 2.0, &cfg());
    assert!(ev(&a, "b1_normalized") <= ev(&b, "b1_normalized") + 1e-12);
}

#[test]
fn resolvent_examples() {
    let r = discrete_resolvent(&quad(), 3, 1.0, &cfg());
    assert_eq!(r.criterion_id, "thm3.2-resolvent");
    assert_eq!(r.verdict, Verdict::Satisfied);
    well_formed(&r);
    let r = discrete_resolvent(&constant(1.0, 1.0), 1, 1.0, &cfg());
    assert_eq!(r.verdict, Verdict::Inconclusive);
}

#[test]
fn weighted_examples() {
    let r = discrete_weighted(&quad(), &cfg());
    assert_eq!(r.verdict, Verdict::Satisfied);
    assert!(ev(&r, "t_sup") < 0.5);
    let j = make_dirac_alpha(&acc3()).unwrap();
    assert_eq!(discrete_weighted(&j, &cfg()).verdict, Verdict::Satisfied);
    let z = constant(0.0, 1.0);
    assert_eq!(discrete_weighted(&z, &cfg()).verdict, Verdict::Inconclusive);
}

#[test]
fn max_alpha_examples() {
    let r = max_index_alpha(&acc3(), &cfg());
    assert_eq!(r.verdict, Verdict::Satisfied);
    let s = ev(&r, "series.partial_sum");
    let oracle = std::f64::consts::PI.powi(2) / 6.0 - 1.0;
    let n = ev(&r, "series.n_used");
    assert!(s < oracle && oracle - s < 1.5 / n, "{s} vs {oracle} at {n}");
    assert_eq!(max_index_alpha(&x0(S::geometric(0.5)), &cfg()).verdict, Verdict::Satisfied);
    assert_eq!(max_index_alpha(&x0(S::power(-1.0)), &cfg()).verdict, Verdict::Violated);
}

#[test]
fn max_beta_examples() {
    let dyk = S::DyukarevD { c: 1.0 };
    let m = InteractionModel::beta(1, 1.0, dyk.clone(), BlockSequence::scaled_identity(-1.0, dyk));
    assert_eq!(max_index_beta(&m, &cfg()).verdict, Verdict::Satisfied);
    let m = InteractionModel::beta(1, 1.0, S::geometric(0.5), BlockSequence::Zero);
    assert_eq!(max_index_beta(&m, &cfg()).verdict, Verdict::Satisfied);
    let b = (2f64.sqrt() - 1.0) / 2.0;
    let m = InteractionModel::beta(1, 1.0, S::geometric(0.5), BlockSequence::ConstantScalar { value: b });
    let r = max_index_beta(&m, &cfg());
    assert_eq!(r.verdict, Verdict::Satisfied);
    assert_eq!(r.criterion_id, "thm5.8-max-beta");
}

#[test]
fn perturbation_examples() {
    let j = quad();
    let r = perturbation_equivalence(&j, &j, &cfg());
    assert_eq!(r.verdict, Verdict::Satisfied);
    assert_eq!(ev(&r, "a_N"), 0.0);
    assert_eq!(ev(&r, "C_A"), 0.0);
    assert_eq!(ev(&r, "C_B"), 0.0);
    let r = dyukarev_beta_route(2, 1, &cfg());
    assert!((ev(&r, "pair.a_limit") - 0.75).abs() < 1e-3, "{:?}", r.evidence);
    assert_eq!(r.verdict, Verdict::Satisfied);
}

#[test]
fn perturbation_alpha_examples() {
    let m = x0(S::geometric(0.5));
    let r = perturbation_alpha_conditions(&m, &PerturbationData::zero(), &cfg());
    assert_eq!(r.verdict, Verdict::Satisfied);
    let h = BlockSequence::ConstantScalar { value: 0.5 };
    let half = PerturbationData { a_prime: h.clone(), b_prime: h.clone() };
    let r = perturbation_alpha_conditions(&m, &half, &cfg());
    assert_eq!(r.verdict, Verdict::Satisfied);
    assert!((ev(&r, "a_N") - 0.5).abs() < 1e-9, "{:?}", r.evidence);
    for k in ["C1_B", "C2_B", "C1_A", "C2_A"] {
        assert_eq!(ev(&r, k), 0.0);
    }
    let only_b = PerturbationData { a_prime: BlockSequence::Zero, b_prime: h };
    let r = perturbation_alpha_conditions(&m, &only_b, &cfg());
    assert_eq!(r.verdict, Verdict::Violated);
}

#[test]
fn dennis_wall_examples() {
    let grow = S::Product { factors: vec![S::Geometric { ratio: 2.0, scale: 2f64.sqrt() }, S::power(-1.0)] };
    let m = InteractionModel::alpha(1, 1.0, S::geometric(0.5), BlockSequence::scaled_identity(1.0, grow.clone()));
    assert_eq!(dennis_wall(&m, &cfg()).verdict, Verdict::Satisfied);
    assert_eq!(dennis_wall(&x0(S::geometric(0.5)), &cfg()).verdict, Verdict::Violated);
    let split = BlockSequence::BlockSplit {
        p1: 1,
        upper: Box::new(BlockSequence::Zero),
        lower: Box::new(BlockSequence::scaled_identity(1.0, grow)),
    };
    let m = InteractionModel::alpha(2, 1.0, S::geometric(0.5), split);
    let r = dennis_wall(&m, &cfg());
    assert_eq!(r.verdict, Verdict::Satisfied);
    assert_eq!(ev(&r, "index"), 1.0);
}

#[test]
fn kosmir_base_and_closed_forms() {
    let m = x0(S::geometric(0.5));
    let j = make_dirac_alpha(&m).unwrap();
    let c1 = kosmir_sequence(&j, 1).unwrap();
    assert_eq!(c1.get(0, 0).re, 1.0);
    let d = |k: usize| 0.5f64.powi(k as i32);
    let c3 = kosmir_sequence(&j, 3).unwrap().get(0, 0).re;
    let direct = -(nu(d(1), 1.0) * d(2).powf(1.5)) / (nu(d(2), 1.0) * d(1).powf(1.5));
    assert!((c3 - direct).abs() < 1e-14);
    assert!((c3 + 0.65192).abs() < 1e-5, "{c3}");
    for jj in 1..=50usize {
        let sign = if jj % 2 == 0 { 1.0 } else { -1.0 };
        let even = sign * d(jj + 1).sqrt() * d(1).powf(1.5) / nu(d(1), 1.0);
        let odd = sign * nu(d(1), 1.0) * d(jj + 1).powf(1.5) / (nu(d(jj + 1), 1.0) * d(1).powf(1.5));
        let ce = kosmir_sequence(&j, 2 * jj).unwrap().get(0, 0);
        let co = kosmir_sequence(&j, 2 * jj + 1).unwrap().get(0, 0);
        assert!((ce.re - even).abs() <= 1e-12 * even.abs() && ce.im == 0.0, "j={jj}: {ce} vs {even}");
        assert!((co.re - odd).abs() <= 1e-12 * odd.abs(), "j={jj}: {co} vs {odd}");
    }
}

#[test]
fn kosmir_test_examples() {
    let jx = make_dirac_alpha(&acc3()).unwrap();
    assert_eq!(kosmir_test(&jx, &cfg()).verdict, Verdict::Violated);
    let l1 = InteractionModel::beta(1, 1.0, S::geometric(0.5), BlockSequence::scaled_identity(1.0, S::geometric(0.5)));
    assert_eq!(kosmir_test(&make_dirac_beta(&l1).unwrap(), &cfg()).verdict, Verdict::Satisfied);
    let one = InteractionModel::beta(
        1,
        1.0,
        S::Superexp { base: 2.0, exponent: 2.0 },
        BlockSequence::ConstantScalar { value: 1.0 },
    );
    assert_eq!(kosmir_test(&make_dirac_beta(&one).unwrap(), &cfg()).verdict, Verdict::Violated);
    assert_eq!(max_index_beta(&one, &cfg()).verdict, Verdict::Satisfied);
}

#[test]
fn berezansky_examples() {
    let j = make_general(1, BlockSequence::Zero, BlockSequence::scaled_identity(1.0, S::geometric(2.0))).unwrap();
    assert_eq!(berezansky_test(&j, &cfg()).verdict, Verdict::Satisfied);
    let jx = make_dirac_alpha(&acc3()).unwrap();
    assert_eq!(berezansky_test(&jx, &cfg()).verdict, Verdict::Violated);
    let b0 = InteractionModel::beta(1, 1.0, S::geometric(0.5), BlockSequence::Zero);
    assert_eq!(berezansky_test(&make_dirac_beta(&b0).unwrap(), &cfg()).verdict, Verdict::Violated);
}

fn by_condition<'a>(rs: &'a [CriterionReport], key: &str) -> Vec<&'a CriterionReport> {
    rs.iter().filter(|r| r.condition.as_deref().is_some_and(|c| c.contains(key))).collect()
}

#[test]
fn schrodinger_examples() {
    let m = InteractionModel::alpha(1, 1.0, S::power(-2.0), BlockSequence::scaled_identity(1.0, S::power(4.0)));
    let rs = schrodinger_criteria(&m, &cfg());
    assert!(rs.iter().all(|r| r.criterion_id == "schrodinger-suite"));
    assert!(rs.iter().any(|r| r.verdict == Verdict::Satisfied));
    rs.iter().for_each(well_formed);
    let m = InteractionModel::alpha(1, 1.0, S::power(-0.5), BlockSequence::ConstantScalar { value: 1.0 });
    let rs = schrodinger_criteria(&m, &cfg());
    let sq = by_condition(&rs, "d");
    assert!(sq.iter().any(|r| r.verdict == Verdict::Satisfied && r.implied_property == "selfadjoint"), "{rs:#?}");
    let m = InteractionModel::alpha(1, 1.0, S::power(-1.0), BlockSequence::Affine { slope: -2.0, intercept: -1.0 });
    let rs = schrodinger_criteria(&m, &cfg());
    for r in rs.iter().filter(|r| r.condition.as_deref().is_some_and(|c| !c.contains("d_n"))) {
        assert_eq!(r.verdict, Verdict::Inconclusive, "{r:?}");
    }
}

#[test]
fn dirac_examples() {
    let rs = dirac_criteria(&acc3(), &cfg());
    let w = rs.iter().find_map(|r| r.evidence.get("witness_sup")).copied().unwrap();
    assert!((w - 1.0 / 5f64.sqrt()).abs() < 1e-4, "{w}");
    assert!(rs.iter().any(|r| r.verdict == Verdict::Satisfied));
    let m4 = InteractionModel::alpha(
        1,
        1.0,
        S::ProductWeighted { r: 4.0, c1: 1.0, exponent: 2.0 },
        BlockSequence::ConstantScalar { value: 4.0 },
    );
    assert!(dirac_criteria(&m4, &cfg()).iter().all(|r| r.verdict == Verdict::Inconclusive));
    assert!(dirac_criteria(&x0(S::geometric(0.5)), &cfg()).iter().all(|r| r.verdict == Verdict::Inconclusive));
}

#[test]
fn evaluate_all_ids_are_stable() {
    let known = [
        "carleman",
        "thm2.2-a1a2",
        "cor2.4-power-mean",
        "thm3.2-resolvent",
        "thm3.3-weighted",
        "thm5.2-max-alpha",
        "thm5.8-max-beta",
        "thm4.2-perturbation",
        "thm6.3-perturbed-alpha",
        "dennis-wall",
        "kosmir",
        "berezansky",
        "schrodinger-suite",
        "dirac-suite",
    ];
    let m = acc3();
    let j = make_dirac_alpha(&m).unwrap();
    let rs = evaluate_all(&j, Some(&m), &cfg());
    assert!(!rs.is_empty());
    for r in &rs {
        assert!(known.contains(&r.criterion_id.as_str()), "{}", r.criterion_id);
        well_formed(r);
    }
}

fn small() -> CriteriaConfig {
    CriteriaConfig { n_max: 400, ..CriteriaConfig::default() }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn power_mean_implies_a1a2(ea in 0.5f64..3.0, eb in -0.5f64..1.5, ca in 0.5f64..4.0, cb in 0.1f64..2.0) {
        let j = scalar_family("pow", move |n| ca * ((n + 1) as f64).powf(ea), move |n| cb * ((n + 1) as f64).powf(eb));
        let c = small();
        for n0 in [1usize, 5] {
            let pm = selfadjoint_power_mean(&j, n0, 1.0, &c);
            let a = selfadjoint_a1a2(&j, n0, &c);
            well_formed(&pm);
            well_formed(&a);
            if pm.verdict == Verdict::Satisfied {
                prop_assert_eq!(a.verdict, Verdict::Satisfied);
            }
        }
    }

    #[test]
    fn scale_robust(ea in 0.5f64..3.0, eb in -0.5f64..1.5, cb in 0.1f64..2.0, lf in -20.0f64..20.0) {
        let j = scalar_family("pow", move |n| ((n + 1) as f64).powf(ea), move |n| cb * ((n + 1) as f64).powf(eb));
        let k = j.rescaled(lf);
        let c = small();
        prop_assert_eq!(selfadjoint_a1a2(&j, 2, &c).verdict, selfadjoint_a1a2(&k, 2, &c).verdict);
        prop_assert_eq!(
            selfadjoint_power_mean(&j, 2, 1.5, &c).verdict,
            selfadjoint_power_mean(&k, 2, 1.5, &c).verdict
        );
        prop_assert_eq!(discrete_weighted(&j, &c).verdict, discrete_weighted(&k, &c).verdict);
    }

    #[test]
    fn reports_are_well_formed(r in 0.0f64..8.0, ratio in 0.05f64..0.95) {
        let m = InteractionModel::alpha(2, 1.0, S::geometric(ratio), BlockSequence::ConstantScalar { value: r });
        let j = make_dirac_alpha(&m).unwrap();
        for rep in evaluate_all(&j, Some(&m), &small()) {
            well_formed(&rep);
        }
    }
}
