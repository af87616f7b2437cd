//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any fails.
//!
//! Run with `cargo test -p varstab --test acceptance`.

mod common;

use rand::Rng;
use std::f64::consts::PI;
use std::time::Instant;
use varstab::arclen::{alpha, arc_length, dlength_de, dlength_de_limit, ArcSpec};
use varstab::classify::{
    beta_scale, classify_dirichlet, classify_neumann, destabilizing_perturbation, perturbation_slope, ClassifyOptions, Verdict,
};
use varstab::conjugate::{conjugate_points, fd_lowest_extrapolated, fd_negative_count, inborn_eigenvalues, SlBc, SlProblem};
use varstab::elliptic::{ellip_f, ellip_k, jacobi_am};
use varstab::par::Execution;
use varstab::phase::{index_i, indices, integrate_ivp, Trajectory, DEFAULT_TOL};
use varstab::potential::Potential;
use varstab::rod::{enumerate_equilibria, Family, RodEquilibrium, RodParams};

type Outcome = (bool, String);

fn census(m: f64, v: f64) -> (Vec<RodEquilibrium>, f64) {
    let t = Instant::now();
    let eqs = enumerate_equilibria(&RodParams::new(m, v).unwrap(), Execution::default()).expect("enumeration");
    (eqs, t.elapsed().as_secs_f64())
}

fn stable_count(eqs: &[RodEquilibrium]) -> usize {
    eqs.iter().filter(|q| q.verdict.verdict == Verdict::Stable).count()
}

fn criterion_1(eqs: &[RodEquilibrium], secs: f64) -> Outcome {
    let stable = stable_count(eqs);
    let unstable = eqs.iter().filter(|q| q.verdict.verdict == Verdict::Unstable).count();
    let ok = eqs.len() == 11 && stable == 4 && unstable == 7 && secs < 10.0;
    (ok, format!("M=81 v=1.5: {} equilibria, {stable} stable, {unstable} unstable, {secs:.2}s", eqs.len()))
}

fn criterion_2(eqs: &[RodEquilibrium]) -> Outcome {
    let expected: [(Family, usize, f64); 11] = [
        (Family::A, 0, 11.22),
        (Family::BComplex, 0, 176.96),
        (Family::BMulti, 1, f64::NAN),
        (Family::C, 1, 14.60),
        (Family::C, 2, -5.37),
        (Family::C, 3, 0.74),
        (Family::D, 1, -11.35),
        (Family::D, 2, -16.74),
        (Family::D, 3, 0.58),
        (Family::E, 1, 18.01),
        (Family::E, 2, 3.73),
    ];
    let mut worst: f64 = 0.0;
    let mut missing = Vec::new();
    for (fam, k, want) in expected {
        if want.is_nan() {
            continue;
        }
        match eqs.iter().find(|q| q.category == fam && q.k == k) {
            Some(q) => worst = worst.max((q.energy - want).abs()),
            None => missing.push(format!("{fam} k={k}")),
        }
    }
    let argmin = eqs.iter().min_by(|a, b| a.energy.total_cmp(&b.energy)).map(|q| (q.category, q.k));
    let ok = missing.is_empty() && worst <= 0.05 && argmin == Some((Family::D, 2));
    (ok, format!("max |energy error| = {worst:.4} over 10 quoted energies, missing {missing:?}, global minimiser {argmin:?}"))
}

fn criterion_3() -> Outcome {
    let (lo, t1) = census(361.0, 1.5);
    let (hi, t2) = census(361.0, 4.0);
    let (s1, s2) = (stable_count(&lo), stable_count(&hi));
    let by_family = |eqs: &[RodEquilibrium]| {
        let mut fams: Vec<String> = Vec::new();
        for f in Family::ALL {
            let n = eqs.iter().filter(|q| q.category == f && q.verdict.verdict == Verdict::Stable).count();
            if n > 0 {
                fams.push(format!("{f}:{n}"));
            }
        }
        fams.join(" ")
    };
    let ok = s1 == 6 && s2 == 3 && t1 + t2 < 30.0;
    (ok, format!("M=361: v=1.5 -> {s1} stable [{}], v=4 -> {s2} stable [{}], {:.2}s", by_family(&lo), by_family(&hi), t1 + t2))
}

fn fd_cells(traj: &Trajectory) -> usize {
    let fmax = traj.samples(400).iter().map(|s| traj.potential().curvature(s.theta).abs()).fold(0.0, f64::max);
    (40.0 * traj.length() * fmax.sqrt().max(1.0)).ceil().max(400.0) as usize
}

fn verdict_of_count(n: usize) -> Verdict {
    if n == 0 {
        Verdict::Stable
    } else {
        Verdict::Unstable
    }
}

fn criterion_4() -> Outcome {
    let mut r = common::rng(4);
    let opts = ClassifyOptions::default();
    let (mut decisive, mut agree, mut attempts, mut excluded) = (0, 0, 0, 0);
    let (mut per_bc, mut per_pot) = ([0usize; 2], [0usize; 2]);
    let mut first_bad = None;
    while decisive < 240 && attempts < 5000 {
        attempts += 1;
        let pot = common::random_potential(&mut r);
        let neumann = r.gen_bool(0.5);
        let traj = if neumann { common::random_neumann(&mut r, &pot) } else { common::random_trajectory(&mut r, &pot) };
        let Some(traj) = traj else { continue };
        let geo = if neumann { classify_neumann(&traj, &opts) } else { classify_dirichlet(&traj, &opts) };
        let Ok(geo) = geo else { continue };
        let marginal = geo.alpha.is_some_and(|a| a.abs() < 1e-6) || geo.beta.is_some_and(|b| b.abs() < 1e-6 * beta_scale(&traj));
        if !matches!(geo.verdict, Verdict::Stable | Verdict::Unstable) || marginal {
            excluded += 1;
            continue;
        }
        let bc = if neumann { SlBc::Neumann } else { SlBc::Dirichlet };
        let problem = SlProblem::from_trajectory(&traj, bc).unwrap();
        let Ok(report) = conjugate_points(&problem) else {
            excluded += 1;
            continue;
        };
        if report.b_is_conjugate {
            excluded += 1;
            continue;
        }
        let fd = fd_negative_count(&problem, fd_cells(&traj)).expect("fd spectrum");
        decisive += 1;
        per_bc[neumann as usize] += 1;
        per_pot[(pot.descriptor().family == "pendulum") as usize] += 1;
        if geo.verdict == report.verdict() && report.verdict() == verdict_of_count(fd) && report.index == fd {
            agree += 1;
        } else if first_bad.is_none() {
            first_bad = Some(format!(
                "{:?} {} bc={bc:?} len={:.3} geo={:?}/{} oracle={} fd={fd}",
                pot.descriptor().params,
                pot.descriptor().family,
                traj.length(),
                geo.verdict,
                geo.theorem,
                report.index
            ));
        }
    }
    let ok = decisive >= 200 && agree == decisive;
    (
        ok,
        format!(
            "{agree}/{decisive} agree (dirichlet {}, neumann {}; double-well {}, pendulum {}; {excluded} excluded as marginal/inconclusive/b-conjugate){}",
            per_bc[0],
            per_bc[1],
            per_pot[0],
            per_pot[1],
            first_bad.map(|s| format!("; first disagreement: {s}")).unwrap_or_default()
        ),
    )
}

fn criterion_5(eqs: &[RodEquilibrium]) -> Outcome {
    let mut worst: f64 = 0.0;
    let mut all_negative = true;
    let mut n = 0;
    for q in eqs.iter().filter(|q| q.category == Family::C) {
        n += 1;
        let t = &q.trajectory;
        let d2 = destabilizing_perturbation(t, 1e-3, 1e-3).unwrap().second_variation;
        all_negative &= d2 < 0.0;
        let pot = t.potential();
        let expected = -(2.0 / 3.0) * (pot.slope(t.start_state().0).powi(2) + pot.slope(t.end_state().0).powi(2));
        let slope = perturbation_slope(t, &[1e-3, 5e-4, 2.5e-4]).unwrap();
        worst = worst.max((slope / expected - 1.0).abs());
    }
    let ok = n == 3 && all_negative && worst < 0.05;
    (ok, format!("{n} category-c equilibria, all d2E<0: {all_negative}, worst slope deviation {:.2e}", worst))
}

fn criterion_6(eqs: &[RodEquilibrium]) -> Outcome {
    let w = 1e-2;
    let pend = Potential::pendulum(1.0).unwrap();
    let mut problems: Vec<(String, SlProblem, bool)> = Vec::new();
    for c in [-1.0, 3.0] {
        problems.push((format!("const {c}"), SlProblem::constant(c, 0.0, w, SlBc::Dirichlet).unwrap(), true));
    }
    for t0 in [0.3, 2.5] {
        let t = integrate_ivp(&pend, t0, 0.2, (0.0, 1.0), DEFAULT_TOL).unwrap();
        problems.push((format!("pendulum theta0={t0}"), SlProblem::from_trajectory(&t, SlBc::Dirichlet).unwrap(), true));
    }
    for q in eqs {
        // the lowest free-end mode is f(a) + O(w f'), below 2% only when w|f'| << |f(a)|
        problems.push((
            format!("rod {} k={}", q.category, q.k),
            SlProblem::from_trajectory(&q.trajectory, SlBc::Dirichlet).unwrap(),
            false,
        ));
    }
    let mut worst: f64 = 0.0;
    let mut where_ = String::new();
    let mut checks = 0;
    for (name, p, with_k0) in &problems {
        for bc in [SlBc::Dirichlet, SlBc::Neumann] {
            let short = SlProblem { bc, ..p.truncated(p.a + w).unwrap() };
            let inborn = inborn_eigenvalues(short.f(short.a), w, bc, 3);
            let fd = fd_lowest_extrapolated(&short, 200, inborn.len()).unwrap();
            let k0 = if bc == SlBc::Neumann { 0 } else { 1 };
            for (i, (l, want)) in fd.iter().zip(&inborn).enumerate() {
                let k = k0 + i;
                if k == 0 && !with_k0 {
                    continue;
                }
                checks += 1;
                let rel = (l - want).abs() / want.abs().max(1e-300);
                if rel > worst {
                    worst = rel;
                    where_ = format!("{name} {bc:?} k={k}");
                }
            }
        }
    }
    (worst < 0.02, format!("{checks} eigenvalues at width 1e-2, worst relative error {worst:.2e} ({where_})"))
}

/// Distance along the integrated trajectory to the end of the arc: the crossing of θ' = P
/// nearest the turning point (last before the turn), or the first one if the arc never turns.
fn flight_time_oracle(traj: &Trajectory, p_end: f64, turn: Option<f64>) -> f64 {
    let roots: Vec<f64> =
        traj.dense().find_roots(|_, y| y[1] - p_end, 64, 1e-15).unwrap_or_default().into_iter().filter(|&s| s > 1e-9).collect();
    match turn {
        Some(t) => roots.into_iter().filter(|&s| s < t).fold(f64::NAN, f64::max),
        None => roots.first().copied().unwrap_or(f64::NAN),
    }
}

fn criterion_7() -> Outcome {
    let mut r = common::rng(7);
    let mut worst_time: f64 = 0.0;
    let mut arcs = 0;
    while arcs < 100 {
        let pot = match arcs % 3 {
            0 => Potential::pendulum(r.gen_range(0.5..5.0)).unwrap(),
            1 => Potential::double_well(r.gen_range(0.5..2.0), r.gen_range(0.5..2.0)).unwrap(),
            _ => Potential::harmonic(r.gen_range(0.5..4.0)).unwrap(),
        };
        let t0 = r.gen_range(-2.0..2.0);
        let p0: f64 = r.gen_range(0.3..3.0) * if r.gen_bool(0.5) { 1.0 } else { -1.0 };
        let probe = integrate_ivp(&pot, t0, p0, (0.0, 20.0), DEFAULT_TOL).unwrap();
        let first_turn = probe.turning_points.first().copied().unwrap_or(20.0);
        let to_turn = r.gen_bool(0.2) && first_turn < 20.0;
        let s_end = if to_turn { first_turn } else { r.gen_range(0.05..0.95) * first_turn.min(5.0) };
        let (_, p_end) = probe.state(s_end);
        let e = probe.energy();
        let spec = if to_turn { ArcSpec::turning(t0, e, p0.signum()).unwrap() } else { ArcSpec::new(t0, e, p_end).unwrap() };
        let Ok(l) = arc_length(&pot, &spec) else { continue };
        let oracle = if to_turn { first_turn } else { flight_time_oracle(&probe, p_end, probe.turning_points.first().copied()) };
        worst_time = worst_time.max((l - oracle).abs());
        arcs += 1;
    }

    let mut worst_de: f64 = 0.0;
    let mut n_de = 0;
    while n_de < 50 {
        let pot = Potential::pendulum(r.gen_range(0.5..5.0)).unwrap();
        let t0 = r.gen_range(-2.0..2.0);
        let p0: f64 = r.gen_range(0.5..3.0);
        let probe = integrate_ivp(&pot, t0, p0, (0.0, 10.0), DEFAULT_TOL).unwrap();
        let first_turn = probe.turning_points.first().copied().unwrap_or(10.0);
        let s_end = r.gen_range(0.1..0.8) * first_turn.min(3.0);
        let (_, p_end) = probe.state(s_end);
        let spec = ArcSpec::new(t0, probe.energy(), p_end).unwrap();
        let (Ok(a), Ok(f)) = (dlength_de(&pot, &spec), dlength_de_limit(&pot, &spec)) else { continue };
        worst_de = worst_de.max((a - f).abs() / f.abs().max(1e-3));
        n_de += 1;
    }

    let h = Potential::harmonic(1.0).unwrap();
    let mut worst_alpha: f64 = 0.0;
    for (t0, p0) in [(0.3, 0.7), (-0.5, 1.2), (1.0, -0.4)] {
        let t = integrate_ivp(&h, t0, p0, (0.0, PI), DEFAULT_TOL).unwrap();
        assert_eq!(index_i(&t).unwrap(), 1);
        worst_alpha = worst_alpha.max(alpha(&t).unwrap().abs());
    }
    let ok = worst_time < 1e-7 && worst_de < 1e-6 && worst_alpha < 1e-8;
    (
        ok,
        format!(
            "flight time max err {worst_time:.1e} (100 arcs), dL/dE rel err {worst_de:.1e} (50 arcs), harmonic |alpha| {worst_alpha:.1e}"
        ),
    )
}

fn criterion_8() -> Outcome {
    let mut r = common::rng(8);
    let integrand = |m: f64| move |t: f64| 1.0 / (1.0 - m * t.sin().powi(2)).sqrt();
    let f_oracle = |phi: f64, m: f64| common::simpson_oracle(&integrand(m), 0.0, phi, 1e-15);
    let (mut wk, mut wf, mut wam, mut wrt): (f64, f64, f64, f64) = (0.0, 0.0, 0.0, 0.0);
    let rel = |a: f64, b: f64| (a - b).abs() / b.abs().max(1.0);
    for i in 0..1000 {
        let m = r.gen_range(-3.0..0.95);
        wk = wk.max(rel(ellip_k(m).unwrap(), f_oracle(PI / 2.0, m)));
        let (phi, m2) = if i % 4 == 0 {
            // real branch with m > 1: m sin²φ < 1
            let m2: f64 = r.gen_range(1.0..4.0);
            (r.gen_range(-0.95..0.95) * (1.0 / m2.sqrt()).asin(), m2)
        } else {
            (r.gen_range(-4.0..4.0), m)
        };
        wf = wf.max(rel(ellip_f(phi, m2).unwrap(), f_oracle(phi, m2)));
        let u = r.gen_range(-4.0..4.0) * ellip_k(m).unwrap();
        let am = jacobi_am(u, m).unwrap();
        // oracle amplitude: bisection on the quadrature integral
        let (mut lo, mut hi) = (u - 10.0, u + 10.0);
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            if f_oracle(mid, m) < u {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        wam = wam.max(rel(am, 0.5 * (lo + hi)));
        wrt = wrt.max((ellip_f(am, m).unwrap() - u).abs());
    }
    let ok = wk < 1e-12 && wf < 1e-12 && wam < 1e-12 && wrt < 1e-11;
    (ok, format!("1000 points: K {wk:.1e}, F {wf:.1e}, am {wam:.1e}, F(am(u))-u {wrt:.1e}"))
}

fn criterion_9() -> Outcome {
    let mut r = common::rng(9);
    let (mut worst_drift, mut lemma_checked, mut lemma_bad) = (0.0f64, 0, 0);
    for _ in 0..300 {
        let pot = common::random_potential(&mut r);
        let Some(t) = common::random_trajectory(&mut r, &pot) else { continue };
        worst_drift = worst_drift.max(t.max_energy_drift / (1.0 + t.energy().abs()));
        if let Ok(ix) = indices(&t) {
            lemma_checked += 1;
            let (i, j) = (ix.i as i64, ix.j);
            if !(i - 1 <= j && j <= i + 1 && j >= -1) {
                lemma_bad += 1;
            }
        }
    }
    // Sturm separation: θ' solves the Jacobi equation, so between consecutive zeros of θ'
    // the Dirichlet solution h₁ vanishes exactly once.
    let (mut sep_checked, mut sep_bad) = (0, 0);
    while sep_checked < 50 {
        let pot = common::random_potential(&mut r);
        let t0 = r.gen_range(-1.5..1.5);
        let p0 = r.gen_range(-1.5..1.5);
        let Ok(t) = integrate_ivp(&pot, t0, p0, (0.0, r.gen_range(4.0..12.0)), DEFAULT_TOL) else { continue };
        let tps: Vec<f64> = t.turning_points.iter().copied().filter(|&s| s > 1e-6 && s < t.end() - 1e-6).collect();
        if tps.len() < 2 {
            continue;
        }
        let sol = varstab::conjugate::solve_h(&SlProblem::from_trajectory(&t, SlBc::Dirichlet).unwrap()).unwrap();
        let zeros = sol.find_roots(|_, y| y[0], 16, 1e-14).unwrap();
        sep_checked += 1;
        for w in tps.windows(2) {
            let inside = zeros.iter().filter(|&&z| z > w[0] && z < w[1]).count();
            if inside != 1 {
                sep_bad += 1;
                break;
            }
        }
    }
    let ok = worst_drift <= 1e-8 && lemma_checked >= 100 && lemma_bad == 0 && sep_bad == 0;
    (
        ok,
        format!(
            "energy drift {worst_drift:.1e}*(1+|E|); lemma holds on {}/{lemma_checked}; Sturm separation holds on {}/{sep_checked}",
            lemma_checked - lemma_bad,
            sep_checked - sep_bad
        ),
    )
}

type Check<'a> = (&'static str, Box<dyn Fn() -> Outcome + 'a>);

fn main() {
    let (eqs, secs) = census(81.0, 1.5);
    let criteria: Vec<Check> = vec![
        ("rod census", Box::new(|| criterion_1(&eqs, secs))),
        ("rod energies", Box::new(|| criterion_2(&eqs))),
        ("stable-count scaling", Box::new(criterion_3)),
        ("oracle agreement", Box::new(criterion_4)),
        ("destabilizing perturbation", Box::new(|| criterion_5(&eqs))),
        ("inborn eigenvalues", Box::new(|| criterion_6(&eqs))),
        ("arc-length fidelity", Box::new(criterion_7)),
        ("special functions", Box::new(criterion_8)),
        ("invariant suite", Box::new(criterion_9)),
    ];
    let mut failed = 0;
    for (n, (name, run)) in criteria.iter().enumerate() {
        let (ok, detail) = match std::panic::catch_unwind(std::panic::AssertUnwindSafe(run)) {
            Ok(o) => o,
            Err(_) => (false, "panicked".to_string()),
        };
        if !ok {
            failed += 1;
        }
        println!("[{}] criterion {}: {name}: {detail}", if ok { "PASS" } else { "FAIL" }, n + 1);
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
