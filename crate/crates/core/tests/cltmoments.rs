use approx::assert_abs_diff_eq;
use kendall_lss::cltmoments::*;

fn cfg() -> ContourConfig {
    ContourConfig::default()
}

#[test]
fn identity_function_has_degenerate_limit() {
    let x = FunctionDescriptor::Power(1);
    for c in [0.25, 0.5, 1.0, 2.0] {
        assert!(lss_mean(&x, c, &cfg()).unwrap().abs() < 1e-8);
        assert!(lss_cov(&x, &x, c, &cfg()).unwrap().abs() < 1e-8);
    }
}

#[test]
fn square_at_half() {
    let f = FunctionDescriptor::Power(2);
    assert_abs_diff_eq!(lss_mean(&f, 0.5, &cfg()).unwrap(), 1.0 / 6.0, epsilon = 1e-6);
    assert_abs_diff_eq!(lss_cov(&f, &f, 0.5, &cfg()).unwrap(), 16.0 / 81.0, epsilon = 1e-6);
}

#[test]
fn fourth_power_at_one() {
    let f = FunctionDescriptor::Power(4);
    assert_abs_diff_eq!(lss_mean(&f, 1.0, &cfg()).unwrap(), 308.0 / 27.0, epsilon = 1e-5);
    assert_abs_diff_eq!(lss_cov(&f, &f, 1.0, &cfg()).unwrap(), q4_var(1.0), epsilon = 1e-4);
}

#[test]
fn log_at_half() {
    let m = lss_moments_vector(&[FunctionDescriptor::Log], 0.5, &cfg()).unwrap();
    assert_abs_diff_eq!(m.mean[0], log_mean(0.5).unwrap(), epsilon = 1e-5);
    assert_abs_diff_eq!(m.var(0), log_var(0.5).unwrap(), epsilon = 1e-5);
}

#[test]
fn polynomials_match_closed_forms_across_ratios() {
    for c in [0.25, 0.5, 1.0, 2.0] {
        for k in [2u32, 4] {
            let f = FunctionDescriptor::Power(k);
            let (cm, cv) = closed_form(&f, c).unwrap().unwrap();
            let m = lss_mean(&f, c, &cfg()).unwrap();
            let v = lss_cov(&f, &f, c, &cfg()).unwrap();
            assert!((m - cm).abs() <= 1e-5 * cm.abs().max(1.0), "c={c} k={k} mean {m} vs {cm}");
            assert!((v - cv).abs() <= 1e-5 * cv.abs().max(1.0), "c={c} k={k} var {v} vs {cv}");
        }
    }
}

#[test]
fn log_matches_closed_forms_for_tall_data() {
    for c in [0.25, 0.5, 1.0] {
        let f = FunctionDescriptor::Log;
        assert_abs_diff_eq!(lss_mean(&f, c, &cfg()).unwrap(), log_mean(c).unwrap(), epsilon = 1e-5);
        assert_abs_diff_eq!(lss_cov(&f, &f, c, &cfg()).unwrap(), log_var(c).unwrap(), epsilon = 1e-5);
    }
}

#[test]
fn log_variance_for_wide_data() {
    let f = FunctionDescriptor::Log;
    assert_abs_diff_eq!(lss_cov(&f, &f, 2.0, &cfg()).unwrap(), log_var(2.0).unwrap(), epsilon = 1e-5);
}

#[test]
fn doubling_nodes_is_stable() {
    let base = cfg();
    let fine = base.with_doubled_nodes();
    for c in [0.5, 2.0] {
        for f in [FunctionDescriptor::Power(4), FunctionDescriptor::Log] {
            let m0 = lss_mean(&f, c, &base).unwrap();
            let m1 = lss_mean(&f, c, &fine).unwrap();
            assert!((m0 - m1).abs() < base.tol, "{} c={c}: {m0} vs {m1}", f.name());
            let v0 = lss_cov(&f, &f, c, &base).unwrap();
            let v1 = lss_cov(&f, &f, c, &fine).unwrap();
            assert!((v0 - v1).abs() < base.tol, "{} c={c}: {v0} vs {v1}", f.name());
        }
    }
}

#[test]
fn cross_covariance_is_symmetric() {
    let (f, g) = (FunctionDescriptor::Power(2), FunctionDescriptor::Log);
    for c in [0.5, 1.0, 2.0] {
        let fg = lss_cov_detailed(&f, &g, c, &cfg()).unwrap().value;
        let gf = lss_cov_detailed(&g, &f, c, &cfg()).unwrap().value;
        assert!((fg - gf).abs() < 1e-10, "{fg} vs {gf}");
    }
}

#[test]
fn custom_function_matches_builtin() {
    let custom = FunctionDescriptor::custom("square", |z| z * z);
    let builtin = FunctionDescriptor::Power(2);
    let a = lss_mean(&custom, 0.7, &cfg()).unwrap();
    let b = lss_mean(&builtin, 0.7, &cfg()).unwrap();
    assert_abs_diff_eq!(a, b, epsilon = 1e-12);
}
