use poincare::dynamics::UnimodalQuadratic;
use poincare::oracles::{
    box_counting_dimension, cascade_lambda_oracle, dimension_csv, escape_fraction_mc, fraction_csv, julia_escape_membership, wilson_interval,
    EscapeOutcome,
};
use poincare::renorm::{build_domain_system, cvitanovic_solve, find_superattracting_parameter, CombinatoricsSpec, DomainSystem, Seed, SolverOptions};
use poincare::series::pressure_critical_exponent;
use poincare::{Complex64, Error};
use proptest::prelude::*;
use std::sync::OnceLock;

const LADDER: [usize; 5] = [64, 128, 256, 512, 1024];

fn c_p(p: usize) -> f64 {
    find_superattracting_parameter(&CombinatoricsSpec::closest_to_chebyshev(p).unwrap(), 1e-13).unwrap()
}

fn system_10() -> &'static DomainSystem {
    static DS: OnceLock<DomainSystem> = OnceLock::new();
    DS.get_or_init(|| build_domain_system(&UnimodalQuadratic::new(c_p(10)).unwrap(), 10, 0.05).unwrap())
}

#[test]
fn escape_examples() {
    let z = |x: f64| Complex64::new(x, 0.0);
    assert_eq!(julia_escape_membership(0.0, z(2.0), 100, 3.0).unwrap(), EscapeOutcome::Escapes(1));
    assert_eq!(julia_escape_membership(2.0, z(1.0), 100, 4.0).unwrap(), EscapeOutcome::Retained);
    assert!(julia_escape_membership(2.0, z(3.0), 100, 4.0).unwrap().escapes());
    assert!(matches!(julia_escape_membership(2.0, z(1.0), 100, 3.0), Err(Error::Config(_))));
}

#[test]
fn box_counting_examples() {
    let circle = box_counting_dimension(0.0, &LADDER, 1000).unwrap();
    assert!((0.95..=1.10).contains(&circle.value), "{}", circle.value);
    let segment = box_counting_dimension(2.0, &LADDER, 1000).unwrap();
    assert!((0.90..=1.10).contains(&segment.value), "{}", segment.value);
    let csv = dimension_csv(&circle);
    assert!(csv.starts_with("resolution,box_size,count\n"));
    assert_eq!(csv.lines().count(), LADDER.len() + 1);
}

#[test]
fn box_counting_at_c_10() {
    let est = box_counting_dimension(c_p(10), &[64, 128, 256, 512, 1024, 2048, 4096], 1000).unwrap();
    assert!((1.0..=1.4).contains(&est.value), "{}", est.value);
}

#[test]
fn box_counting_rejects_bad_ladders() {
    assert!(box_counting_dimension(0.0, &[64], 100).is_err());
    assert!(box_counting_dimension(0.0, &[128, 64], 100).is_err());
    assert!(matches!(box_counting_dimension(0.0, &[4096, 8192], 100), Err(Error::Range(_))));
}

#[test]
fn cascade_examples() {
    let est = cascade_lambda_oracle(8).unwrap();
    assert!((est.lambda + 0.3995).abs() < 1e-3, "{}", est.lambda);
    assert!((est.inverse_abs - 2.5029).abs() < 1e-3, "{}", est.inverse_abs);
    assert!(est.ratios.iter().all(|&r| r < 0.0));
    let solved = cvitanovic_solve(2, 20, &Seed::Parameter(1.0), &SolverOptions::default()).unwrap();
    assert!((solved.lambda - est.lambda).abs() < 1e-3);

    let coarse = cascade_lambda_oracle(2).unwrap();
    assert!(coarse.error_bar > 1e-2, "{coarse:?}");
    assert!(cascade_lambda_oracle(11).is_err());
}

#[test]
fn escape_fraction_at_the_defaults() {
    let a = escape_fraction_mc(system_10(), 1, 100_000, 1000, 7).unwrap();
    assert!(a.fraction <= 0.2, "{}", a.fraction);
    assert!(a.ci_low <= a.fraction && a.fraction <= a.ci_high);
    assert_eq!(a.hits + a.escaped + a.unresolved, a.samples);
    let b = escape_fraction_mc(system_10(), 1, 100_000, 1000, 7).unwrap();
    assert_eq!(a.fraction.to_bits(), b.fraction.to_bits());
    assert_eq!(a, b);
    let csv = fraction_csv(&[a]);
    assert!(csv.starts_with("k,budget,"));
}

#[test]
fn escape_fraction_rejects_bad_inputs() {
    assert!(matches!(escape_fraction_mc(system_10(), 1, 0, 10, 0), Err(Error::Config(_))));
    assert!(matches!(escape_fraction_mc(system_10(), 200, 10, 10, 0), Err(Error::Range(_))));
}

#[test]
fn wilson_interval_examples() {
    assert_eq!(wilson_interval(0, 0), (0.0, 1.0));
    let (lo, hi) = wilson_interval(0, 100);
    assert_eq!(lo, 0.0);
    assert!(hi > 0.0 && hi < 0.05);
    let (lo, hi) = wilson_interval(50, 100);
    assert!((lo + hi - 1.0).abs() < 1e-12 && lo > 0.39 && hi < 0.61);
}

#[test]
fn pressure_and_box_counting_agree() {
    for (c, z) in [(0.0, 4.0), (2.0, 3.0), (c_p(8), 3.0), (c_p(10), 3.0)] {
        let f = UnimodalQuadratic::new(c).unwrap();
        let pressure = pressure_critical_exponent(&f, Complex64::new(z, 0.0), 16, (1.0, 2.0)).unwrap();
        let boxes = box_counting_dimension(c, &LADDER, 1000).unwrap();
        assert!((pressure.delta_cr - boxes.value).abs() <= 0.15, "c = {c}: pressure {} vs boxes {}", pressure.delta_cr, boxes.value);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn escape_fraction_is_monotone_in_budget(seed in any::<u64>(), b1 in 1usize..60, extra in 0usize..200) {
        let lo = escape_fraction_mc(system_10(), 1, 2000, b1, seed).unwrap();
        let hi = escape_fraction_mc(system_10(), 1, 2000, b1 + extra, seed).unwrap();
        prop_assert!(hi.hits >= lo.hits);
        prop_assert!(hi.fraction >= lo.fraction);
    }

    #[test]
    fn box_counts_are_monotone(c in 1.0..=2.0f64, levels in 2usize..5) {
        let ladder: Vec<usize> = (0..levels).map(|i| 16 << i).collect();
        let est = box_counting_dimension(c, &ladder, 200).unwrap();
        prop_assert!((0.0..=2.0).contains(&est.value));
        for w in est.ladder.windows(2) {
            prop_assert!(w[0].box_size > w[1].box_size);
            prop_assert!(w[0].count <= w[1].count);
        }
    }
}
