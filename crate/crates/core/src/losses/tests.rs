use super::*;

fn spec(family: LossFamily, variant: Variant) -> LossSpec {
    LossSpec::new(family, variant).unwrap()
}

fn full(family: LossFamily) -> LossSpec {
    spec(family, Variant::Full)
}

fn single(family: LossFamily) -> LossSpec {
    spec(family, Variant::SingleSided)
}

#[test]
fn full_m_values() {
    let m = full(LossFamily::M);
    let eps = m.eps_clamp;
    // l(1, 1-eps) = 1/(1-eps) - 1 = eps/(1-eps)
    assert!(m.eval(1.0, 1.0 - eps).unwrap().abs() < 2.0 * eps / (1.0 - eps));
    assert_eq!(m.eval(1.0, 0.5).unwrap(), 1.0);
    assert_eq!(m.grad(1.0, 0.5).unwrap(), -4.0);
}

#[test]
fn cross_entropy_values() {
    let ce = full(LossFamily::CrossEntropy);
    assert!((ce.eval(1.0, 0.5).unwrap() - std::f64::consts::LN_2).abs() < 1e-15);
    assert_eq!(ce.grad(1.0, 0.5).unwrap(), -2.0);
    // symmetric case
    assert_eq!(ce.eval(0.0, 0.5).unwrap(), ce.eval(1.0, 0.5).unwrap());
}

#[test]
fn sec_value_at_half() {
    let sec = full(LossFamily::Sec);
    let expected = 2f64.sqrt() - 1.0; // sec(pi/4) - 1
    assert!((sec.eval(0.0, 0.5).unwrap() - expected).abs() < 1e-15);
}

#[test]
fn tan_gradient_is_minus_pi_at_half() {
    let tan = full(LossFamily::Tan);
    let g = tan.grad(1.0, 0.5).unwrap();
    assert!((g + std::f64::consts::PI).abs() < 1e-12, "{g}");
    // cross-check against central differences
    let h = 1e-6;
    let fd = (tan.eval(1.0, 0.5 + h).unwrap() - tan.eval(1.0, 0.5 - h).unwrap()) / (2.0 * h);
    assert!((g - fd).abs() / g.abs() < 1e-8);
}

#[test]
fn two_param_l_specializes_to_l() {
    let l = full(LossFamily::L);
    let tpl =
        LossSpec::custom(LossFamily::TwoParamL, Variant::Full, Some(2.0), Some(0.5), 1e-7).unwrap();
    for i in 1..100 {
        let p = i as f64 / 100.0;
        let (a, b) = (l.eval(1.0, p).unwrap(), tpl.eval(1.0, p).unwrap());
        assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0), "y_hat={p}: {a} vs {b}");
    }
}

#[test]
fn single_sided_losses_vanish_at_y_zero() {
    for family in [
        LossFamily::M,
        LossFamily::L,
        LossFamily::Tan,
        LossFamily::ParamM,
        LossFamily::ParamL,
        LossFamily::TwoParamL,
        LossFamily::ParamLog,
    ] {
        let s = single(family);
        for i in 1..20 {
            let p = i as f64 / 20.0;
            assert_eq!(s.eval(0.0, p).unwrap(), 0.0);
            assert_eq!(s.grad(0.0, p).unwrap(), 0.0);
        }
        // and are exactly zero at the y=1 target as well
        assert!(s.eval(1.0, 1.0 - 1e-7).unwrap().abs() < 1e-5);
    }
}

#[test]
fn sec_single_sided_is_rejected() {
    let err = LossSpec::new(LossFamily::Sec, Variant::SingleSided).unwrap_err();
    assert!(matches!(err, LossError::InvalidSpec(_)));
    assert!(err.to_string().contains("single-sided"));
}

#[test]
fn param_log_base_validation() {
    let err = LossSpec::custom(LossFamily::ParamLog, Variant::Full, Some(1.0), None, 1e-7)
        .unwrap_err();
    assert!(err.to_string().contains("alpha must not equal 1"));
    assert!(
        LossSpec::custom(LossFamily::ParamLog, Variant::Full, Some(0.5), None, 1e-7).is_err()
    );
}

#[test]
fn bad_parameters_rejected() {
    assert!(LossSpec::custom(LossFamily::ParamM, Variant::Full, Some(-1.0), None, 1e-7).is_err());
    assert!(LossSpec::custom(LossFamily::ParamM, Variant::Full, None, None, 1e-7).is_err());
    assert!(
        LossSpec::custom(LossFamily::TwoParamL, Variant::Full, Some(2.0), Some(0.0), 1e-7)
            .is_err()
    );
    assert!(LossSpec::custom(LossFamily::M, Variant::Full, Some(2.0), None, 1e-7).is_err());
    assert!(LossSpec::custom(LossFamily::M, Variant::Full, None, None, 0.7).is_err());
}

#[test]
fn invalid_target_rejected() {
    let m = full(LossFamily::M);
    assert_eq!(m.eval(0.5, 0.5).unwrap_err(), LossError::InvalidTarget(0.5));
}

#[test]
fn clamping_is_applied() {
    let m = full(LossFamily::M);
    assert_eq!(m.eval(1.0, 0.0).unwrap(), m.eval(1.0, m.eps_clamp).unwrap());
    assert_eq!(m.eval(1.0, 1.5).unwrap(), m.eval(1.0, 1.0 - m.eps_clamp).unwrap());
}

#[test]
fn multiclass_cross_entropy_two_class() {
    let ce = full(LossFamily::CrossEntropy);
    let loss = multiclass_loss(&ce, &[1.0, 0.0], &[0.5, 0.5]).unwrap();
    assert!((loss - 2.0 * std::f64::consts::LN_2).abs() < 1e-12);
    let grad = multiclass_grad(&ce, &[1.0, 0.0], &[0.5, 0.5]).unwrap();
    assert_eq!(grad, vec![-2.0, 2.0]);
}

#[test]
fn multiclass_near_zero_at_target() {
    let ce = full(LossFamily::CrossEntropy);
    let e = ce.eps_clamp;
    let loss = multiclass_loss(&ce, &[0.0, 1.0, 0.0], &[e, 1.0 - 2.0 * e, e]).unwrap();
    assert!(loss < 1e-5, "{loss}");
}

#[test]
fn multiclass_single_sided_ignores_zero_targets() {
    let m = single(LossFamily::M);
    let loss = multiclass_loss(&m, &[1.0, 0.0], &[0.5, 0.5]).unwrap();
    assert_eq!(loss, 1.0);
    let grad = multiclass_grad(&m, &[0.0, 1.0], &[0.3, 0.7]).unwrap();
    assert_eq!(grad[0], 0.0);
}

#[test]
fn multiclass_errors() {
    let ce = full(LossFamily::CrossEntropy);
    assert!(matches!(
        multiclass_loss(&ce, &[1.0, 0.0, 0.0], &[0.5, 0.5]),
        Err(LossError::DimensionMismatch { .. })
    ));
    assert_eq!(
        multiclass_loss(&ce, &[1.0, 1.0], &[0.5, 0.5]).unwrap_err(),
        LossError::NotOneHot
    );
    assert_eq!(
        multiclass_loss(&ce, &[0.3, 0.7], &[0.5, 0.5]).unwrap_err(),
        LossError::NotOneHot
    );
}

#[test]
fn gradient_magnitudes_shrink_toward_target() {
    // at (1-eps, eps) the componentwise |grad| is no larger than at (0.5, 0.5)
    for spec in catalogue() {
        let far = multiclass_grad(&spec, &[1.0, 0.0], &[0.5, 0.5]).unwrap();
        let near = multiclass_grad(&spec, &[1.0, 0.0], &[1.0 - 1e-3, 1e-3]).unwrap();
        for (n, f) in near.iter().zip(&far) {
            assert!(n.abs() <= f.abs() + 1e-12, "{}: {n} vs {f}", spec.name());
        }
    }
}

#[test]
fn strictness_m_beats_cross_entropy_in_magnitude() {
    let region = StrictnessRegion::target_one(0.01, 0.99, 256);
    let report = compare_strictness(
        &full(LossFamily::M),
        &full(LossFamily::CrossEntropy),
        &region,
    )
    .unwrap();
    assert_eq!(report.magnitude.verdict, StrictnessVerdict::L1Stricter);
    // literal signed reading flips for y=1 (both gradients negative)
    assert_eq!(report.literal.verdict, StrictnessVerdict::L2Stricter);
}

#[test]
fn strictness_is_reflexively_equal() {
    let region = StrictnessRegion::both_targets(0.01, 0.99, 64);
    let m = full(LossFamily::M);
    let report = compare_strictness(&m, &m, &region).unwrap();
    assert_eq!(report.literal.verdict, StrictnessVerdict::Equal);
    assert_eq!(report.magnitude.verdict, StrictnessVerdict::Equal);
}

#[test]
fn strictness_param_log_base_e_equals_cross_entropy() {
    let region = StrictnessRegion::target_one(0.01, 0.99, 128);
    let pl = LossSpec::custom(
        LossFamily::ParamLog,
        Variant::SingleSided,
        Some(std::f64::consts::E),
        None,
        1e-7,
    )
    .unwrap();
    let ce = single(LossFamily::CrossEntropy);
    let report = compare_strictness(&pl, &ce, &region).unwrap();
    assert_eq!(report.literal.verdict, StrictnessVerdict::Equal);
    assert_eq!(report.magnitude.verdict, StrictnessVerdict::Equal);
}

#[test]
fn strictness_empty_region() {
    let m = full(LossFamily::M);
    let region = StrictnessRegion {
        lo: 0.1,
        hi: 0.9,
        points: 0,
        targets: vec![1.0],
    };
    assert_eq!(
        compare_strictness(&m, &m, &region).unwrap_err(),
        LossError::EmptyRegion
    );
}

#[test]
fn probe_passes_for_core_full_losses() {
    for family in [
        LossFamily::CrossEntropy,
        LossFamily::M,
        LossFamily::L,
        LossFamily::Tan,
        LossFamily::Sec,
    ] {
        let report = probe_properties(&full(family), 1024).unwrap();
        assert!(report.all_passed(), "{}: {:?}", report.loss_name, report.checks);
    }
}

#[test]
fn probe_flags_nonconvex_two_param_l() {
    let spec =
        LossSpec::custom(LossFamily::TwoParamL, Variant::Full, Some(0.5), Some(5.0), 1e-7)
            .unwrap();
    let report = probe_properties(&spec, 1024).unwrap();
    let convexity = report.checks.iter().find(|c| c.name == "convexity").unwrap();
    assert!(!convexity.passed);
    assert!(!convexity.witnesses.is_empty());
}

#[test]
fn probe_rejects_tiny_grid() {
    assert!(probe_properties(&full(LossFamily::M), 8).is_err());
}

#[test]
fn curve_midpoint_and_monotonicity() {
    let ce = full(LossFamily::CrossEntropy);
    let rows = export_loss_curve(&ce, 1.0, 3).unwrap();
    assert_eq!(rows.len(), 3);
    assert!((rows[1].y_hat - 0.5).abs() < 1e-12);
    assert!((rows[1].loss - std::f64::consts::LN_2).abs() < 1e-12);

    let m = export_loss_curve(&full(LossFamily::M), 0.0, 64).unwrap();
    for pair in m.windows(2) {
        assert!(pair[1].loss > pair[0].loss);
    }
}

#[test]
fn curve_matches_independent_l_evaluation() {
    // independent route: 1 - (1-p)^2 = p(2-p)
    let l = full(LossFamily::L);
    let rows = export_loss_curve(&l, 1.0, 1001).unwrap();
    for row in &rows {
        let oracle = 1.0 / (row.y_hat * (2.0 - row.y_hat)).sqrt() - 1.0;
        assert!(
            (row.loss - oracle).abs() <= 1e-12 * oracle.abs().max(1.0),
            "y_hat={}: {} vs {}",
            row.y_hat,
            row.loss,
            oracle
        );
    }
}

#[test]
fn curve_csv_shape() {
    let rows = export_loss_curve(&full(LossFamily::CrossEntropy), 1.0, 5).unwrap();
    let mut buf = Vec::new();
    write_curve_csv(&rows, &mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "y_hat,loss,grad");
    assert_eq!(lines.len(), 6);
}

#[test]
fn catalogue_has_sixteen_entries() {
    let cat = catalogue();
    assert_eq!(cat.len(), 16);
    assert_eq!(
        cat.iter().filter(|s| s.variant == Variant::SingleSided).count(),
        7
    );
    for spec in &cat {
        spec.validate().unwrap();
    }
}

#[test]
fn spec_serde_round_trip() {
    for spec in catalogue() {
        let json = serde_json::to_string(&spec).unwrap();
        let back: LossSpec = serde_json::from_str(&json).unwrap();
        assert_eq!(spec, back);
    }
}
