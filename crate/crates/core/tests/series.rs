use poincare::certificates::{CertBudgets, CertContext};
use poincare::dynamics::{Region, UnimodalQuadratic};
use poincare::renorm::{build_domain_system, find_superattracting_parameter, CombinatoricsSpec};
use poincare::series::{
    chebyshev_expansion_check, enumerate_families, enumerate_family, expansion_lemma_sweep, family_sup, geometric_tail_bound, level_sums_csv,
    measure_expansion_profile, parse_family, pressure_critical_exponent, EnumOptions, ExpansionProfile, OrbitFamily, ProfileRequest, SeriesBound,
    SourceSpec, SupOptions, SweepOptions, TerminalGrid,
};
use poincare::{Complex64, Error};
use proptest::prelude::*;
use std::sync::OnceLock;

fn cx(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn profile(k: f64, eps: f64) -> ExpansionProfile {
    ExpansionProfile { k_est: k, eps_est: eps, depth: 0, terminals: 0, sample_count: 0, min_ratio: k, envelope: Vec::new(), witness: Vec::new() }
}

fn context_8() -> &'static CertContext {
    static CTX: OnceLock<CertContext> = OnceLock::new();
    CTX.get_or_init(|| CertContext::build(8, 0.05, CertBudgets::default()).unwrap())
}

#[test]
fn enumeration_examples() {
    let ch = UnimodalQuadratic::chebyshev();
    let s = enumerate_family(&ch, &OrbitFamily::unconstrained(), cx(0.0, 0.0), 2.0, 1, &EnumOptions::default()).unwrap();
    assert!((s.sum - 1.25).abs() < 1e-15);

    let plus = OrbitFamily::new(Region::Plane, Region::Plane, Region::Plane, true, "C<-+C");
    let s = enumerate_family(&UnimodalQuadratic::new(1.7).unwrap(), &plus, cx(0.4, 0.2), 1.3, 0, &EnumOptions::default()).unwrap();
    assert_eq!(s.sum, 0.0);

    let circle = UnimodalQuadratic::new(0.0).unwrap();
    let s = enumerate_family(&circle, &OrbitFamily::unconstrained(), cx(4.0, 0.0), 1.0, 2, &EnumOptions::default()).unwrap();
    assert!((s.sum - 1.853_553_390_593_273_7).abs() < 1e-12, "{}", s.sum);
}

#[test]
fn trivial_orbit_needs_the_point_in_target_and_source() {
    let f = UnimodalQuadratic::new(1.8).unwrap();
    let unit = Region::disk(cx(0.0, 0.0), 1.0);
    let fam = OrbitFamily::new(unit.clone(), Region::Plane, unit.clone().complement(), false, "D<-E");
    let s = enumerate_family(&f, &fam, cx(0.5, 0.0), 1.5, 0, &EnumOptions::default()).unwrap();
    assert_eq!(s.sum, 0.0);
    let fam = OrbitFamily::new(unit.clone(), Region::Plane, unit, false, "D<-D");
    let s = enumerate_family(&f, &fam, cx(0.5, 0.0), 1.5, 0, &EnumOptions::default()).unwrap();
    assert_eq!(s.sum, 1.0);
}

#[test]
fn level_sums_of_the_circle_map_decay_at_the_closed_form_rate() {
    let circle = UnimodalQuadratic::new(0.0).unwrap();
    let grid = TerminalGrid::circle(4.0, 16);
    for delta in [1.5, 2.0] {
        let b = family_sup(&circle, &OrbitFamily::unconstrained(), delta, &grid, 15, &SupOptions::default()).unwrap();
        assert!(b.divergent && b.upper_bound.is_infinite());
        let expected = 2f64.powf(1.0 - delta);
        for k in 8..15 {
            let ratio = b.levels[k + 1].sum / b.levels[k].sum;
            assert!((ratio / expected - 1.0).abs() < 0.01, "delta {delta} k {k}: {ratio} vs {expected}");
        }
        for (k, level) in b.levels.iter().enumerate() {
            let closed = 2f64.powf(k as f64 * (1.0 - delta)) * 4f64.powf(-delta * (1.0 - 2f64.powi(-(k as i32))));
            assert!((level.sum / closed - 1.0).abs() < 1e-10, "k {k}");
        }
        let csv = level_sums_csv(&b.levels);
        assert!(csv.starts_with("depth,count,sum\n"));
        assert_eq!(csv.lines().count(), 17);
    }
}

#[test]
fn empty_source_gives_a_zero_bound() {
    let f = UnimodalQuadratic::new(1.9).unwrap();
    let fam = parse_family("C<-[C]-0", None).unwrap();
    let grid = TerminalGrid::circle(1.0, 8);
    let b = family_sup(&f, &fam, 1.8, &grid, 10, &SupOptions { tail: Some(profile(1.0, 0.1)), ..SupOptions::default() }).unwrap();
    assert_eq!((b.point_estimate, b.upper_bound, b.tail_bound, b.pruned_mass, b.nodes), (0.0, 0.0, 0.0, 0.0, 0));
    assert_eq!(b.terminals, 8);
}

#[test]
fn empty_grid_is_an_error() {
    let f = UnimodalQuadratic::new(1.9).unwrap();
    let fam = OrbitFamily::new(Region::Empty, Region::Plane, Region::Plane, false, "0<-C");
    assert!(matches!(family_sup(&f, &fam, 1.8, &TerminalGrid::circle(1.0, 8), 5, &SupOptions::default()), Err(Error::EmptyGrid)));
}

#[test]
fn grid_refinement_stays_within_the_margin() {
    let ctx = context_8();
    let ds = &ctx.ds;
    let fam = parse_family("A'<-[U\\V']-U\\V'", Some(ds)).unwrap();
    let opts = SupOptions { tail: Some(ctx.profile_v.clone()), postcritical: ds.postcritical_outside(), ..SupOptions::default() };
    let (rmin, _) = ds.u_prime_radii();
    let full = family_sup(&ctx.map, &fam, 1.8, &TerminalGrid::polar(rmin, ds.rho(), 8, 16), 12, &opts).unwrap();
    let half = family_sup(&ctx.map, &fam, 1.8, &TerminalGrid::polar(rmin, ds.rho(), 4, 8), 12, &opts).unwrap();
    let margin = full.distortion.max(half.distortion);
    let (lo, hi) = (full.point_estimate.min(half.point_estimate), full.point_estimate.max(half.point_estimate));
    assert!(hi <= lo * margin, "{} vs {} with margin {margin}", full.point_estimate, half.point_estimate);
    assert!(half.upper_bound >= full.point_estimate);
}

#[test]
fn series_bound_invariants_and_json() {
    let ctx = context_8();
    let fam = parse_family("A'<-[U\\V']-+A'", Some(&ctx.ds)).unwrap();
    let opts = SupOptions { tail: Some(ctx.profile_v.clone()), postcritical: ctx.ds.postcritical_outside(), ..SupOptions::default() };
    let b = family_sup(&ctx.map, &fam, 2.0, &ctx.grid_a_prime, 15, &opts).unwrap();
    assert!(b.upper_bound >= b.point_estimate && b.point_estimate >= 0.0);
    assert!(b.tail_bound >= 0.0 && b.pruned_mass >= 0.0 && b.upper_bound.is_finite());
    assert_eq!(b.family, "A'<-[U\\V']-+A'");
    let text = serde_json::to_string(&b).unwrap();
    for key in ["family", "delta", "j", "point_estimate", "upper_bound", "tail_bound", "pruned_mass", "terminals", "nodes"] {
        assert!(text.contains(&format!("\"{key}\"")), "{key}");
    }
    let back: SeriesBound = serde_json::from_str(&text).unwrap();
    assert_eq!(back, b);
}

#[test]
fn tail_bound_examples() {
    let p = profile(10.0, 0.1);
    let r = 2.0 / 3.61;
    let t0 = geometric_tail_bound(&p, 2.0, 0).unwrap();
    assert!((t0 - 0.01 * r / (1.0 - r)).abs() < 1e-15);
    assert!((t0 - 0.01242).abs() < 1e-5);
    let t1 = geometric_tail_bound(&p, 2.0, 1).unwrap();
    assert!((t1 / t0 - r).abs() < 1e-14);
    assert!(matches!(geometric_tail_bound(&p, 1.0, 3), Err(Error::DivergentTail { .. })));
}

#[test]
fn chebyshev_expansion_is_stable() {
    let r = chebyshev_expansion_check(&[6, 8, 10, 12], 0.3, 64).unwrap();
    assert!(r.stable, "{r:?}");
    assert!(r.k_spread <= 0.1);
    assert!(r.k_est.iter().all(|&k| k > 0.0));
    assert!(r.eps_est.iter().all(|&e| e <= 0.1), "{:?}", r.eps_est);
}

#[test]
fn profile_rejects_a_via_region_through_the_critical_point() {
    let ch = UnimodalQuadratic::chebyshev();
    let grid = TerminalGrid::circle(1.0, 8);
    let req = ProfileRequest {
        via: &Region::Plane,
        sources: &Region::Plane,
        terminals: &grid,
        depth: 6,
        samples: 8,
        guard_radius: 0.3,
        require_expansion: true,
    };
    assert!(measure_expansion_profile(&ch, &req).is_err());
}

#[test]
fn expansion_constant_grows_with_the_period() {
    let k_at = |p: usize| {
        let c = find_superattracting_parameter(&CombinatoricsSpec::closest_to_chebyshev(p).unwrap(), 1e-13).unwrap();
        let f = UnimodalQuadratic::new(c).unwrap();
        let ds = build_domain_system(&f, p, 0.05).unwrap();
        let s = ds.u().clone().minus(ds.v_prime().clone());
        let (rmin, rmax) = ds.u_prime_radii();
        let grid = TerminalGrid::polar(rmin, 0.05, 6, 8).filtered(ds.a_prime()).merged(&TerminalGrid::polar(0.0, rmax, 3, 8).filtered(ds.u_prime()));
        let req =
            ProfileRequest { via: &s, sources: &s, terminals: &grid, depth: 14, samples: 16, guard_radius: 0.05 * 0.999, require_expansion: true };
        let prof = measure_expansion_profile(&f, &req).unwrap();
        assert!(prof.eps_est > 0.0 && prof.eps_est < 2.0);
        prof.k_est
    };
    let (k6, k10) = (k_at(6), k_at(10));
    assert!(k10 > k6, "{k10} <= {k6}");
}

#[test]
fn pressure_examples() {
    let circle = UnimodalQuadratic::new(0.0).unwrap();
    let e = pressure_critical_exponent(&circle, cx(4.0, 0.0), 16, (1.0, 2.0)).unwrap();
    assert!((e.delta_cr - 1.0).abs() <= 0.02 && (e.raw_root - 1.0).abs() <= 0.02, "{e:?}");
    let ch = UnimodalQuadratic::chebyshev();
    let e = pressure_critical_exponent(&ch, cx(3.0, 0.0), 16, (1.0, 2.0)).unwrap();
    assert!((e.delta_cr - 1.0).abs() <= 0.05, "{e:?}");
    assert!((1.0..=2.0).contains(&e.delta_cr));
}

#[test]
fn lemma_sweep_preconditions() {
    assert!(expansion_lemma_sweep(12, 0.0, 0.3, &SweepOptions::default()).is_err());
    assert!(matches!(expansion_lemma_sweep(15, 0.3, 0.3, &SweepOptions::default()), Err(Error::Range(_))));
}

#[test]
fn critical_value_inequality_at_period_twelve() {
    let r = expansion_lemma_sweep(12, 0.3, 0.3, &SweepOptions::default()).unwrap();
    assert!(r.critical_value_pass && r.critical_value_margin() > 0.0, "{r:?}");
    assert_eq!(r.escape_samples, 100);
}

fn generic_point() -> impl Strategy<Value = Complex64> {
    (-1.8..1.8f64, 0.05..1.0f64).prop_map(|(x, y)| cx(x, y))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn tree_is_complete(c in 1.0..=2.0f64, z in generic_point(), delta in 1.0..2.0f64) {
        let f = UnimodalQuadratic::new(c).unwrap();
        let s = enumerate_family(&f, &OrbitFamily::unconstrained(), z, delta, 12, &EnumOptions::default()).unwrap();
        prop_assert_eq!(s.levels.len(), 13);
        for (k, level) in s.levels.iter().enumerate() {
            prop_assert_eq!(level.count, 1u64 << k);
        }
    }

    #[test]
    fn splitting_the_source_conserves_the_sum(c in 1.5..=2.0f64, z in generic_point(), r in 0.2..1.5f64, j in 1usize..10) {
        let f = UnimodalQuadratic::new(c).unwrap();
        let via = Region::disk(cx(0.0, 0.0), 0.1).complement();
        let e = Region::disk(cx(0.0, 0.0), 2.5);
        let e1 = e.clone().intersect(Region::disk(cx(0.3, 0.0), r));
        let e2 = e.clone().minus(Region::disk(cx(0.3, 0.0), r));
        let sources = [e.clone(), e1, e2].map(|region| region);
        let specs: Vec<SourceSpec> = sources.iter().map(|region| SourceSpec { region, nontrivial: false }).collect();
        let sums = enumerate_families(&f, z, &via, &specs, 1.7, j, &EnumOptions::default()).unwrap();
        let whole = sums[0].sum;
        prop_assert!((whole - sums[1].sum - sums[2].sum).abs() <= 1e-12 * whole.max(1.0), "{} vs {} + {}", whole, sums[1].sum, sums[2].sum);
    }

    #[test]
    fn sums_are_monotone(c in 1.5..=2.0f64, z in generic_point(), r in 0.05..0.5f64, j in 1usize..10, delta in 1.2..2.0f64) {
        let f = UnimodalQuadratic::new(c).unwrap();
        let opts = EnumOptions::default();
        let narrow = Region::disk(cx(0.0, 0.0), 2.0 * r).complement();
        let wide = Region::disk(cx(0.0, 0.0), r).complement();
        let source = Region::disk(cx(0.0, 0.0), 1.0);
        let small = enumerate_family(&f, &OrbitFamily::new(Region::Plane, narrow.clone(), source.clone(), false, "a"), z, delta, j, &opts).unwrap();
        let big_via = enumerate_family(&f, &OrbitFamily::new(Region::Plane, wide, source.clone(), false, "b"), z, delta, j, &opts).unwrap();
        let big_source = enumerate_family(&f, &OrbitFamily::new(Region::Plane, narrow.clone(), Region::Plane, false, "c"), z, delta, j, &opts).unwrap();
        let deeper = enumerate_family(&f, &OrbitFamily::new(Region::Plane, narrow, source, false, "d"), z, delta, j + 1, &opts).unwrap();
        prop_assert!(big_via.sum >= small.sum);
        prop_assert!(big_source.sum >= small.sum);
        prop_assert!(deeper.sum >= small.sum);
    }

    #[test]
    fn weights_fall_with_delta_on_expanding_orbits(z in generic_point(), j in 1usize..9, d1 in 1.0..2.0f64, dd in 0.0..0.5f64) {
        // Away from D(0, 1/2) every backward step of the Chebyshev map expands.
        let ch = UnimodalQuadratic::chebyshev();
        let via = Region::disk(cx(0.0, 0.0), 0.5).complement();
        let fam = OrbitFamily::new(Region::Plane, via.clone(), via, true, "C<-[S]-+S");
        let opts = EnumOptions::default();
        let lo = enumerate_family(&ch, &fam, z, d1, j, &opts).unwrap();
        let hi = enumerate_family(&ch, &fam, z, d1 + dd, j, &opts).unwrap();
        for (a, b) in lo.levels.iter().zip(&hi.levels) {
            prop_assert!(b.sum <= a.sum * (1.0 + 1e-12));
        }
    }

    #[test]
    fn pruning_is_sound(t in 0usize..64, j in 4usize..=12, threshold in -6.0..-2.0f64, delta in 1.5..=2.0f64) {
        let ctx = context_8();
        let grid = ctx.grid_a_prime.clone().merged(&ctx.grid_u_prime).merged(&ctx.grid_a);
        let z = grid.terminals[t % grid.len()].z;
        let rule = ctx.profile_prune.as_ref().unwrap().prune_rule(10f64.powf(threshold)).with_guard(ctx.ds.postcritical_outside(), ctx.budgets.prune_guard);
        let a_prime = ctx.ds.a_prime().clone();
        let specs = [SourceSpec { region: &ctx.s_region, nontrivial: false }, SourceSpec { region: &a_prime, nontrivial: true }];
        let exact = enumerate_families(&ctx.map, z, &ctx.s_region, &specs, delta, j, &EnumOptions { node_budget: u64::MAX, prune: None }).unwrap();
        let pruned = enumerate_families(&ctx.map, z, &ctx.s_region, &specs, delta, j, &EnumOptions { node_budget: u64::MAX, prune: Some(rule) }).unwrap();
        for (e, p) in exact.iter().zip(&pruned) {
            prop_assert!(e.sum <= (p.sum + p.pruned_mass) * (1.0 + 1e-12), "{} > {} + {}", e.sum, p.sum, p.pruned_mass);
            prop_assert!(p.sum <= e.sum * (1.0 + 1e-12));
        }
    }
}
