//! Invariants checked on generated inputs.

mod common;

use proptest::prelude::*;
use std::f64::consts::PI;
use varstab::arclen::{arc_length, ArcSpec};
use varstab::classify::{beta, classify_dirichlet, classify_neumann, destabilizing_perturbation, ClassifyOptions, Verdict};
use varstab::conjugate::{fd_negative_count, SlBc, SlProblem};
use varstab::elliptic::ellip_f;
use varstab::par::{self, Execution};
use varstab::phase::{indices, integrate_ivp, ProblemSpec, ShootOptions, Shooter, Trajectory, DEFAULT_TOL};
use varstab::potential::{stationary_points, Potential};

fn potential_strategy() -> impl Strategy<Value = Potential> {
    prop_oneof![
        (0.5f64..20.0).prop_map(|m| Potential::pendulum(m).unwrap()),
        (0.5f64..3.0, 0.5f64..3.0).prop_map(|(a, b)| Potential::double_well(a, b).unwrap()),
        (0.2f64..5.0).prop_map(|k| Potential::harmonic(k).unwrap()),
        prop::collection::vec(-2.0f64..2.0, 2..6).prop_map(|c| Potential::polynomial(c).unwrap()),
    ]
}

fn well_potential() -> impl Strategy<Value = Potential> {
    prop_oneof![
        (0.5f64..10.0).prop_map(|m| Potential::pendulum(m).unwrap()),
        (0.5f64..3.0, 0.5f64..3.0).prop_map(|(a, b)| Potential::double_well(a, b).unwrap()),
    ]
}

fn theorems() -> [&'static str; 14] {
    [
        "I=0",
        "I>=2",
        "I=1,alpha>0",
        "I=1,alpha<0",
        "I=1,alpha=0",
        "J<0",
        "J>0",
        "J=0,beta<=0",
        "J=0,beta>0",
        "J=0,beta=0",
        "constant,V''<0",
        "constant,V''>0",
        "constant,V''=0",
        "precondition",
    ]
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 100, ..ProptestConfig::default() })]

    #[test]
    fn derivatives_match_central_differences(pot in potential_strategy(), theta in -3.0f64..3.0) {
        let h = 1e-4;
        let (_, d1, d2) = pot.eval(theta);
        let fd1 = (pot.value(theta + h) - pot.value(theta - h)) / (2.0 * h);
        let fd2 = (pot.slope(theta + h) - pot.slope(theta - h)) / (2.0 * h);
        let scale = 1.0 + pot.value(theta).abs() + d1.abs() + d2.abs();
        prop_assert!((fd1 - d1).abs() <= 1e-6 * scale * 100.0);
        prop_assert!((fd2 - d2).abs() <= 1e-6 * scale * 100.0);
    }

    #[test]
    fn extrema_alternate(pot in well_potential(), lo in -8.0f64..-0.5, width in 1.0f64..12.0) {
        let set = stationary_points(&pot, lo, lo + width).unwrap();
        let merged = set.merged();
        for w in merged.windows(2) {
            prop_assert_ne!(w[0].1, w[1].1, "two {} in a row at {} and {}", if w[0].1 { "minima" } else { "maxima" }, w[0].0, w[1].0);
        }
    }

    #[test]
    fn integration_is_reversible(pot in well_potential(), t0 in -2.0f64..2.0, p0 in -2.0f64..2.0, len in 0.2f64..5.0) {
        let fwd = integrate_ivp(&pot, t0, p0, (0.0, len), DEFAULT_TOL).unwrap();
        let (t1, p1) = fwd.end_state();
        let back = integrate_ivp(&pot, t1, -p1, (0.0, len), DEFAULT_TOL).unwrap();
        let (t2, p2) = back.end_state();
        prop_assert!((t2 - t0).abs() < 1e-7 && (p2 + p0).abs() < 1e-7, "({t2}, {p2}) vs ({t0}, {p0})");
    }

    #[test]
    fn energy_is_conserved(pot in well_potential(), t0 in -2.5f64..2.5, p0 in -3.0f64..3.0, len in 0.2f64..8.0) {
        let t = integrate_ivp(&pot, t0, p0, (0.0, len), DEFAULT_TOL).unwrap();
        prop_assert!(t.max_energy_drift <= 1e-8 * (1.0 + t.energy().abs()));
    }

    #[test]
    fn indices_survive_tolerance_refinement(pot in well_potential(), t0 in -2.5f64..2.5, p0 in -3.0f64..3.0, len in 0.2f64..6.0) {
        let coarse = integrate_ivp(&pot, t0, p0, (0.0, len), DEFAULT_TOL).unwrap();
        let fine = integrate_ivp(&pot, t0, p0, (0.0, len), 0.1 * DEFAULT_TOL).unwrap();
        if let (Ok(a), Ok(b)) = (indices(&coarse), indices(&fine)) {
            prop_assert_eq!(a, b);
        }
    }

    #[test]
    fn lemma_bound_on_indices(pot in well_potential(), t0 in -2.5f64..2.5, p0 in -3.0f64..3.0, len in 0.2f64..8.0) {
        let t = integrate_ivp(&pot, t0, p0, (0.0, len), DEFAULT_TOL).unwrap();
        if let Ok(ix) = indices(&t) {
            let i = ix.i as i64;
            prop_assert!(i - 1 <= ix.j && ix.j <= i + 1 && ix.j >= -1, "I = {}, J = {}", ix.i, ix.j);
        }
    }

    #[test]
    fn every_verdict_names_one_rule(seed in 0u64..10_000) {
        let mut r = common::rng(seed);
        let pot = common::random_potential(&mut r);
        let opts = ClassifyOptions::default();
        if let Some(t) = common::random_trajectory(&mut r, &pot) {
            if let Ok(v) = classify_dirichlet(&t, &opts) {
                prop_assert!(theorems().contains(&v.theorem.as_str()), "{}", v.theorem);
            }
        }
        if let Some(t) = common::random_neumann(&mut r, &pot) {
            if let Ok(v) = classify_neumann(&t, &opts) {
                prop_assert!(theorems().contains(&v.theorem.as_str()), "{}", v.theorem);
            }
        }
    }

    #[test]
    fn elliptic_f_increases_in_phi(m in -3.0f64..0.99, a in -5.0f64..5.0, gap in 1e-6f64..1.0) {
        prop_assert!(ellip_f(a + gap, m).unwrap() > ellip_f(a, m).unwrap());
    }

    #[test]
    fn arc_length_is_additive(m in 0.5f64..10.0, t0 in 0.05f64..1.0, extra in 0.2f64..0.9, split in 0.1f64..0.9) {
        // a climb inside the well, V increasing all the way to the turn
        let pot = Potential::pendulum(m).unwrap();
        let top = t0 + extra * (PI - t0);
        let e = pot.value(top);
        let mid = t0 + split * (top - t0);
        let p_mid = (2.0 * (e - pot.value(mid))).sqrt();
        let whole = arc_length(&pot, &ArcSpec::turning(t0, e, 1.0).unwrap()).unwrap();
        let first = arc_length(&pot, &ArcSpec::new(t0, e, p_mid).unwrap()).unwrap();
        let second = arc_length(&pot, &ArcSpec::turning(mid, e, 1.0).unwrap()).unwrap();
        prop_assert!((whole - first - second).abs() < 1e-8, "{whole} vs {first} + {second}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 40, ..ProptestConfig::default() })]

    #[test]
    fn free_ends_with_zero_slope_turn_twice(m in 0.5f64..10.0, t0 in 0.1f64..3.0, horizon in 2.0f64..12.0) {
        let pot = Potential::pendulum(m).unwrap();
        let probe = integrate_ivp(&pot, t0, 0.0, (0.0, horizon), DEFAULT_TOL).unwrap();
        if let Some(&b) = probe.turning_points.iter().find(|&&s| s > 1e-3) {
            let t = integrate_ivp(&pot, t0, 0.0, (0.0, b), DEFAULT_TOL).unwrap();
            prop_assert!(indices(&t).map(|ix| ix.i >= 2).unwrap_or(true));
            prop_assert_eq!(classify_neumann(&t, &ClassifyOptions::default()).unwrap().verdict, Verdict::Unstable);
        }
    }

    #[test]
    fn concave_region_is_always_stable(m in 0.5f64..10.0, x in -0.6f64..0.6, p0 in -0.6f64..0.6, len in 0.05f64..0.4) {
        // near the top of the pendulum V'' < 0; keep the whole arc there
        let pot = Potential::pendulum(m).unwrap();
        let t = integrate_ivp(&pot, PI + x, p0, (0.0, len), DEFAULT_TOL).unwrap();
        let (lo, hi) = t.theta_range();
        prop_assume!(lo > 0.5 * PI + 0.05 && hi < 1.5 * PI - 0.05);
        if let Ok(v) = classify_dirichlet(&t, &ClassifyOptions::default()) {
            prop_assert_eq!(v.verdict, Verdict::Stable, "{}", v.theorem);
        }
    }

    #[test]
    fn concave_free_ends_are_stable(m in 0.5f64..10.0, x in 0.05f64..1.0, a in 0.1f64..3.0) {
        // crossing the top from π − x to π + x at slope a on both ends
        let pot = Potential::pendulum(m).unwrap();
        let probe = integrate_ivp(&pot, PI - x, a, (0.0, 20.0), DEFAULT_TOL).unwrap();
        let back = probe.dense().find_roots(|_, y| y[1] - a, 32, 1e-14).unwrap();
        let b = back.into_iter().find(|&s| s > 1e-6);
        prop_assume!(b.is_some());
        let t = integrate_ivp(&pot, PI - x, a, (0.0, b.unwrap()), DEFAULT_TOL).unwrap();
        let (lo, hi) = t.theta_range();
        prop_assume!(lo > 0.5 * PI && hi < 1.5 * PI);
        prop_assert_eq!(classify_neumann(&t, &ClassifyOptions::default()).unwrap().verdict, Verdict::Stable);
    }

    #[test]
    fn negative_beta_has_a_destabilizing_direction(seed in 0u64..100_000) {
        let mut r = common::rng(seed);
        let pot = common::random_potential(&mut r);
        let t = common::random_neumann(&mut r, &pot);
        prop_assume!(t.is_some());
        let t: Trajectory = t.unwrap();
        prop_assume!(beta(&t) <= -1e-8);
        let pa = t.potential().slope(t.start_state().0).abs();
        let pb = t.potential().slope(t.end_state().0).abs();
        prop_assume!(pa > 1e-6 && pb > 1e-6);
        let mut eps = 1e-3 * t.length();
        let mut found = false;
        for _ in 0..20 {
            if destabilizing_perturbation(&t, eps, eps).unwrap().second_variation < 0.0 {
                found = true;
                break;
            }
            eps *= 0.5;
        }
        prop_assert!(found, "beta = {}", beta(&t));
    }

    #[test]
    fn negative_count_grows_with_the_interval(pot in well_potential(), t0 in -2.0f64..2.0, p0 in -2.0f64..2.0, len in 1.0f64..6.0) {
        let t = integrate_ivp(&pot, t0, p0, (0.0, len), DEFAULT_TOL).unwrap();
        prop_assume!(!t.is_constant());
        let full = SlProblem::from_trajectory(&t, SlBc::Dirichlet).unwrap();
        let mut prev = 0;
        for i in 1..=8 {
            let sigma = len * i as f64 / 8.0;
            let sub = full.truncated(sigma).unwrap();
            let n = fd_negative_count(&sub, 400).unwrap();
            prop_assert!(n >= prev, "count fell from {prev} to {n} at sigma = {sigma}");
            prev = n;
        }
    }
}

#[test]
fn sequential_and_parallel_maps_agree() {
    let seq = par::map_range(Execution::Sequential, 500, |i| (i as f64).sin().to_bits());
    let par = par::map_range(Execution::Parallel, 500, |i| (i as f64).sin().to_bits());
    assert_eq!(seq, par);
    let spec = ProblemSpec::neumann(Potential::pendulum(81.0).unwrap(), 0.0, 1.0, 15.588).unwrap();
    let shooter = Shooter::new(&spec, ShootOptions::default());
    let a = shooter.scan(-PI, PI, 600, Execution::Sequential);
    let b = shooter.scan(-PI, PI, 600, Execution::Parallel);
    let xs = |o: &varstab::phase::ScanOutcome| o.solutions.iter().map(|(x, _)| x.to_bits()).collect::<Vec<_>>();
    assert_eq!(xs(&a), xs(&b));
    assert!(!a.solutions.is_empty());
}
