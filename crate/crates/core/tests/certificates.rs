use num_bigint::BigInt;
use num_rational::BigRational;
use poincare::certificates::{
    bisect_delta_with, certify_area_with, certify_delta_with, paper_threshold_closure, solve_quadratic_fixed_point, uv_recursion_step, AreaStatus,
    AreaSups, BaseSups, CertBudgets, CertContext, DeltaCertificate, DeltaStatus, QuadraticRecursion, RecursionMode, ThresholdChecks,
};
use poincare::Error;
use proptest::prelude::*;
use std::sync::OnceLock;

fn context(mode: RecursionMode) -> &'static CertContext {
    static DIRECT: OnceLock<CertContext> = OnceLock::new();
    static PAPER: OnceLock<CertContext> = OnceLock::new();
    let cell = match mode {
        RecursionMode::Direct => &DIRECT,
        RecursionMode::PaperInequality => &PAPER,
    };
    cell.get_or_init(|| CertContext::build(10, 0.05, CertBudgets { mode, ..CertBudgets::default() }).unwrap())
}

fn default_certificate() -> &'static DeltaCertificate {
    static CERT: OnceLock<DeltaCertificate> = OnceLock::new();
    CERT.get_or_init(|| certify_delta_with(context(RecursionMode::Direct), 1.8).unwrap())
}

fn rational(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

#[test]
fn quadratic_fixed_point_examples() {
    assert_eq!(solve_quadratic_fixed_point(1.0, 0.5, 0.0).s, Some(2.0));
    let s = solve_quadratic_fixed_point(1.0, 1.0 / 3.0, 1.0 / 36.0).s.unwrap();
    assert!((s - (12.0 - 6.0 * 3f64.sqrt())).abs() < 1e-12, "{s}");
    assert!((s - 1.6077).abs() < 1e-4);
    assert_eq!(solve_quadratic_fixed_point(1.0, 0.5, 1.0).s, None);
    assert_eq!(solve_quadratic_fixed_point(1.0, 1.0, 0.0).s, None);
}

#[test]
fn recursion_coefficient_examples() {
    let q = QuadraticRecursion::new(2.0, BaseSups::default());
    assert_eq!((q.alpha, q.beta, q.gamma), (1.0, 0.0, 0.0));
    assert_eq!(q.fixed_point().s, Some(1.0));
    let q = QuadraticRecursion::new(1.8, BaseSups { a1: 0.1, a2: 0.1, a3: 0.1, b1: 0.05, b2: 0.05, b3: 0.05 });
    assert!((q.alpha - 1.21).abs() < 1e-15, "{}", q.alpha);
    assert!((q.beta - 0.11).abs() < 1e-15, "{}", q.beta);
    assert!((q.gamma - 0.0025).abs() < 1e-15, "{}", q.gamma);
    assert!(q.invariant_interval());
}

#[test]
fn certificate_at_the_defaults() {
    let cert = default_certificate();
    assert_eq!(cert.status, DeltaStatus::Certified, "{}", cert.summary());
    assert!(cert.beta < 1.0 / 3.0, "{}", cert.beta);
    assert!((cert.beta - 0.006033).abs() < 5e-5, "{}", cert.beta);
    let s = cert.fixed_point.unwrap();
    assert!((s - 1.7809).abs() < 5e-3, "{s}");
    let q = cert.recursion().unwrap();
    assert!((q.eval(s) - s).abs() <= 1e-12 * s);
    assert!(cert.invariant_interval);
    assert_eq!(cert.inputs.len(), 6);
    assert!(cert.inputs.iter().all(|b| b.upper_bound >= b.point_estimate && b.upper_bound.is_finite()));
    assert!(cert.residual.is_some_and(f64::is_finite));
}

#[test]
fn certificate_round_trips_as_json() {
    let cert = default_certificate();
    let text = serde_json::to_string(cert).unwrap();
    for key in ["period", "c", "rho", "delta", "status", "alpha", "beta", "gamma", "fixed_point", "iterate_trace", "inputs", "config"] {
        assert!(text.contains(&format!("\"{key}\"")), "{key}");
    }
    assert!(text.contains("\"CERTIFIED\""));
    let back: DeltaCertificate = serde_json::from_str(&text).unwrap();
    assert_eq!(&back, cert);
}

#[test]
fn delta_one_is_not_certified() {
    let cert = certify_delta_with(context(RecursionMode::Direct), 1.0).unwrap();
    assert!(matches!(cert.status, DeltaStatus::InputDivergent | DeltaStatus::NoFixedPoint), "{}", cert.status);
    assert!(cert.fixed_point.is_none());
}

#[test]
fn delta_out_of_range_is_rejected() {
    let ctx = context(RecursionMode::Direct);
    assert!(matches!(certify_delta_with(ctx, 0.0), Err(Error::Range(_))));
    assert!(matches!(certify_delta_with(ctx, 2.5), Err(Error::Range(_))));
}

#[test]
fn bisection_near_one_is_uncertifiable() {
    assert!(matches!(bisect_delta_with(context(RecursionMode::Direct), (1.0, 1.01), 1e-3), Err(Error::UncertifiableRange)));
}

#[test]
fn direct_mode_is_dominated_by_paper_mode() {
    let direct = default_certificate();
    let paper = certify_delta_with(context(RecursionMode::PaperInequality), 1.8).unwrap();
    assert_eq!(paper.mode, RecursionMode::PaperInequality);
    assert!(direct.alpha <= paper.alpha, "{} > {}", direct.alpha, paper.alpha);
    assert!(direct.beta <= paper.beta, "{} > {}", direct.beta, paper.beta);
    assert!(direct.gamma <= paper.gamma, "{} > {}", direct.gamma, paper.gamma);
}

#[test]
fn area_thresholds() {
    let paper = AreaSups { s_v: 0.009, s_a: 1.0 / 16.0, s_q: 2.0, s_n: 0.009 };
    let t = ThresholdChecks::evaluate(&paper);
    assert!(t.all() && t.status() == AreaStatus::Certified, "{t:?}");
    let bad = ThresholdChecks::evaluate(&AreaSups { s_v: 0.5, ..paper });
    assert!(!bad.q1 && bad.status() == AreaStatus::Failed);
}

#[test]
fn area_recursion_step() {
    let sups = AreaSups { s_v: 0.01, s_a: 0.3, s_q: 2.0, s_n: 0.5 };
    let step = uv_recursion_step(0.0, &sups).unwrap();
    assert_eq!((step.v, step.u_next), (0.0, 0.01));
    assert!(matches!(uv_recursion_step(1.0, &sups), Err(Error::Noncontractive { .. })));
    assert!(uv_recursion_step(-0.1, &sups).is_err());
}

#[test]
fn paper_thresholds_close_the_induction() {
    for k in [rational(1, 2), rational(1, 1), rational(2, 1), rational(10, 1)] {
        let closure = paper_threshold_closure(&k, 100).unwrap();
        assert!(closure.closed, "K = {k}: {closure:?}");
        assert_eq!(closure.steps, 100);
        assert!(closure.max_u <= 0.1 && closure.max_v <= 0.25);
    }
}

#[test]
fn area_certificate_at_the_defaults() {
    let cert = certify_area_with(context(RecursionMode::Direct), 200).unwrap();
    assert_eq!(cert.status, AreaStatus::Certified, "{}", cert.summary());
    assert_eq!(cert.u_trace.len(), 201);
    assert!(cert.u_trace.iter().all(|&u| u <= cert.u_cap));
    assert!(cert.u_cap + cert.area_ratio < 1.0);
    assert!((cert.thresholds.k - 0.528).abs() < 0.01, "{}", cert.thresholds.k);
}

fn sups() -> impl Strategy<Value = BaseSups> {
    prop::array::uniform6(0.0..0.3f64).prop_map(|[a1, a2, a3, b1, b2, b3]| BaseSups { a1, a2, a3, b1, b2, b3 })
}

proptest! {
    #[test]
    fn coefficients_are_monotone_in_each_sup(base in sups(), i in 0usize..6, bump in 0.0..0.5f64) {
        let mut raised = base.as_array();
        raised[i] += bump;
        let [a1, a2, a3, b1, b2, b3] = raised;
        let lo = QuadraticRecursion::new(1.8, base);
        let hi = QuadraticRecursion::new(1.8, BaseSups { a1, a2, a3, b1, b2, b3 });
        prop_assert!(hi.alpha >= lo.alpha && hi.beta >= lo.beta && hi.gamma >= lo.gamma);
    }

    #[test]
    fn fixed_point_is_correct(alpha in 0.5..3.0f64, beta in 0.0..0.9f64, gamma in 0.0..0.5f64) {
        let sol = solve_quadratic_fixed_point(alpha, beta, gamma);
        let disc = (1.0 - beta).powi(2) - 4.0 * alpha * gamma;
        match sol.s {
            Some(s) => {
                prop_assert!(disc >= 0.0);
                let p = alpha + beta * s + gamma * s * s;
                prop_assert!((p - s).abs() <= 1e-12 * s.max(1.0), "P(s) - s = {}", p - s);
                prop_assert!(sol.trace.windows(2).all(|w| w[0] <= w[1]));
                prop_assert!(sol.trace.iter().all(|&t| t <= s * (1.0 + 1e-12)));
            }
            None => prop_assert!(disc < 0.0),
        }
    }
}
