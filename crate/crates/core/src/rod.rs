//! Equilibria of a weightless, intrinsically curved elastic rod carrying a suspended mass.
//!
//! Non-dimensional form: `∫₀¹ (θ' − A)²/2 + M cos θ ds` with `A = √(2Mv)` and free ends, so the
//! potential is the pendulum `V = −M cos θ`. Solutions are labelled by their phase-plane shape:
//!
//! * `a`: one pass over the top of the well, `θ(1) = 2π − θ(0)`;
//! * `b_*`: oscillations inside the well (`e < 1`), simple, complex or k-fold;
//! * `c`, `d`, `e`: k-looped whirls (`e > 1`) ending on the same, the next or the previous branch.

use crate::classify::{classify_neumann, ClassifyOptions, StabilityVerdict, Verdict};
use crate::conjugate::{conjugate_points, SlBc, SlProblem};
use crate::elliptic::{ellip_f, ellip_k, jacobi_am};
use crate::error::{Error, Result};
use crate::par::{self, Execution};
use crate::phase::{integrate_ivp, Guess, ProblemSpec, Sample, ShootOptions, Shooter, Trajectory};
use crate::potential::Potential;
use crate::quad;
use crate::roots;
use serde::Serialize;
use std::f64::consts::{PI, TAU};

/// Uniform e-grid nodes per family.
pub const E_GRID: usize = 256;
/// Simpson intervals for the total energy.
pub const ENERGY_INTERVALS: usize = 4096;
/// Accepted |θ'(1) − A| relative to 1 + A.
pub const RESIDUAL_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RodParams {
    pub m: f64,
    pub v: f64,
}

impl RodParams {
    pub fn new(m: f64, v: f64) -> Result<Self> {
        if !(m > 0.0 && m.is_finite() && v > 0.0 && v.is_finite()) {
            return Err(Error::InvalidParams(format!("rod needs M > 0 and v > 0, got M = {m}, v = {v}")));
        }
        Ok(RodParams { m, v })
    }

    /// End slope `A = √(2Mv)`.
    pub fn slope(&self) -> f64 {
        (2.0 * self.m * self.v).sqrt()
    }

    /// Number of turns of the unloaded ring.
    pub fn n_loop(&self) -> f64 {
        self.slope() / TAU
    }

    /// Every family is solved against this level.
    pub fn target(&self) -> f64 {
        self.m.sqrt() / 2.0
    }

    pub fn potential(&self) -> Potential {
        Potential::pendulum(self.m).expect("validated M")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    A,
    BSimple,
    BComplex,
    BMulti,
    C,
    D,
    E,
}

impl Family {
    pub const ALL: [Family; 7] = [Family::A, Family::BSimple, Family::BComplex, Family::BMulti, Family::C, Family::D, Family::E];

    pub fn name(self) -> &'static str {
        match self {
            Family::A => "a",
            Family::BSimple => "b_simple",
            Family::BComplex => "b_complex",
            Family::BMulti => "b_multi",
            Family::C => "c",
            Family::D => "d",
            Family::E => "e",
        }
    }

    /// Whether the family is indexed by a loop or oscillation count.
    pub fn has_k(self) -> bool {
        matches!(self, Family::BMulti | Family::C | Family::D | Family::E)
    }

    fn whirl(self) -> bool {
        matches!(self, Family::A | Family::C | Family::D | Family::E)
    }

    /// Open e-interval on which the family's length function is real.
    pub fn domain(self, v: f64) -> Option<(f64, f64)> {
        let (lo, hi) = if self.whirl() {
            ((v - 1.0).max(1.0), v + 1.0)
        } else {
            if self == Family::BComplex && v >= 2.0 {
                return None;
            }
            ((v - 1.0).max(-1.0), (v + 1.0).min(1.0))
        };
        (lo < hi).then_some((lo, hi))
    }

    /// Sign of θ(0) relative to `arccos(v − e)`.
    pub fn theta0_sign(self) -> f64 {
        match self {
            Family::A | Family::BComplex | Family::C | Family::D => 1.0,
            Family::BSimple | Family::BMulti | Family::E => -1.0,
        }
    }
}

impl std::fmt::Display for Family {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

fn parts(e: f64, v: f64) -> Result<(f64, f64, f64)> {
    let c = v - e;
    if !(-1.0..=1.0).contains(&c) {
        return Err(Error::DomainError(format!("e = {e} outside [v − 1, v + 1] for v = {v}")));
    }
    let m = 2.0 / (1.0 + e);
    let phi = c.acos() / 2.0;
    Ok((m, phi, ellip_f(phi, m)?))
}

fn ell_b(e: f64, v: f64) -> Result<f64> {
    let (m, _, f) = parts(e, v)?;
    Ok(m.sqrt() * f)
}

/// Scaled length of the family member with pseudo-energy `e` (per unit M). A solution exists
/// where this equals `√M/2`.
pub fn ell(family: Family, e: f64, v: f64, k: usize) -> Result<f64> {
    let (lo, hi) = family.domain(v).ok_or_else(|| Error::DomainError(format!("family {family} is empty at v = {v}")))?;
    if !(e > lo && e <= hi) && !(family == Family::BSimple && e == lo) {
        return Err(Error::DomainError(format!("e = {e} outside ({lo}, {hi}] for family {family}")));
    }
    if family.has_k() && k == 0 {
        return Err(Error::DomainError(format!("family {family} needs k ≥ 1")));
    }
    let kf = k as f64;
    match family {
        Family::BSimple => ell_b(e, v),
        Family::BComplex => Ok(2.0 * ell_b(e, 0.0)? - ell_b(e, v)?),
        Family::BMulti => Ok(2.0 * kf * ell_b(e, 0.0)?),
        _ => {
            let (m, _, f) = parts(e, v)?;
            let kk = ellip_k(m)?;
            let r = m.sqrt();
            Ok(match family {
                Family::A => r * (kk - f),
                Family::C => kf * r * kk,
                Family::D => r * ((1.0 + kf) * kk - f),
                _ => r * (kf * kk + f),
            })
        }
    }
}

/// Length needed to close a full loop at `e = v − 1`: `4K(2/v)/√(2Mv)`.
pub fn l_open(params: &RodParams) -> Result<f64> {
    if params.v <= 2.0 {
        return Err(Error::DomainError(format!("open-loop length needs v > 2, got {}", params.v)));
    }
    Ok(4.0 * ellip_k(2.0 / params.v)? / params.slope())
}

/// e-grid for root bracketing: uniform nodes plus logarithmic refinement toward e = 1.
pub fn e_grid(family: Family, v: f64) -> Vec<f64> {
    let Some((lo, hi)) = family.domain(v) else { return Vec::new() };
    let w = hi - lo;
    let mut g: Vec<f64> = (1..E_GRID).map(|i| lo + w * i as f64 / E_GRID as f64).collect();
    g.push(lo + 1e-12 * w);
    g.push(hi - 1e-12 * w);
    if family != Family::BSimple {
        g.push(hi);
    }
    for j in 1..=14 {
        let d = 10f64.powi(-j);
        for x in [1.0 + d, 1.0 - d] {
            if x > lo && x < hi {
                g.push(x);
            }
        }
    }
    g.sort_by(f64::total_cmp);
    g.dedup();
    g
}

/// Roots of `ell(family, ·, v, k) = target` located on [`e_grid`].
pub fn solve_family(family: Family, v: f64, k: usize, target: f64) -> Vec<f64> {
    let g = e_grid(family, v);
    let ys: Vec<f64> = g.iter().map(|&e| ell(family, e, v, k).map_or(f64::NAN, |l| l - target)).collect();
    let mut out = Vec::new();
    for (a, fa, b, fb) in roots::sign_change_brackets(&g, &ys) {
        let r =
            if a == b { Ok(a) } else { roots::brent_known(|e| ell(family, e, v, k).map_or(f64::NAN, |l| l - target), a, fa, b, fb, 0.0) };
        if let Ok(r) = r {
            if out.iter().all(|&x: &f64| (x - r).abs() > 1e-12) {
                out.push(r);
            }
        }
    }
    out
}

fn min_on_grid(family: Family, v: f64, k: usize) -> f64 {
    e_grid(family, v).iter().filter_map(|&e| ell(family, e, v, k).ok()).fold(f64::INFINITY, f64::min)
}

/// Largest k worth scanning: stops two counts after the minimum of ℓ exceeds the target.
pub fn k_range(family: Family, params: &RodParams) -> usize {
    if !family.has_k() || family.domain(params.v).is_none() {
        return if family.domain(params.v).is_some() { 1 } else { 0 };
    }
    let target = params.target();
    let mut misses = 0;
    let mut k = 0;
    while misses < 3 && k < 100_000 {
        k += 1;
        if min_on_grid(family, params.v, k) > target {
            misses += 1;
        } else {
            misses = 0;
        }
    }
    k
}

/// θ(0) for a family member.
pub fn theta0(family: Family, e: f64, v: f64) -> Result<f64> {
    let c = v - e;
    if !(-1.0..=1.0).contains(&c) {
        return Err(Error::DomainError(format!("e = {e} outside [v − 1, v + 1]")));
    }
    Ok(family.theta0_sign() * c.acos())
}

/// Integration tolerance for reconstructed profiles. Near e = 1 the end slope is very
/// sensitive to θ(0), so profiles are integrated tighter than the library default.
pub const RECONSTRUCT_TOL: f64 = 1e-12;

/// Integrates the equilibrium from `θ(0)` with `θ'(0) = A` over the unit length, then polishes
/// θ(0) by shooting when the end slope misses `A`.
pub fn reconstruct(params: &RodParams, family: Family, e: f64) -> Result<Trajectory> {
    let t0 = theta0(family, e, params.v)?;
    if (params.v + 1.0 - e).abs() < 1e-14 {
        return Err(Error::DomainError("e = v + 1 makes the arc degenerate".into()));
    }
    let a = params.slope();
    let traj = integrate_ivp(&params.potential(), t0, a, (0.0, 1.0), RECONSTRUCT_TOL)?;
    if (traj.end_state().1 - a).abs() <= 1e-9 * (1.0 + a) {
        return Ok(traj);
    }
    let spec = ProblemSpec::neumann(params.potential(), 0.0, 1.0, a)?;
    let shooter = Shooter::new(&spec, ShootOptions { tol: RECONSTRUCT_TOL, residual_tol: RESIDUAL_TOL, xtol: 0.0, ..Default::default() });
    let width = 1e-6 * (1.0 + t0.abs());
    match shooter.solve(Guess::Bracket(t0 - width, t0 + width)) {
        Ok((_, polished)) => Ok(polished),
        Err(_) => Ok(traj),
    }
}

/// Closed-form category-(a) profile `2·am(K(m) + √(2M(1+e))/2·(s − 1/2) | m)`, m = 2/(1+e).
pub fn closed_form_a(params: &RodParams, e: f64, s: f64) -> Result<f64> {
    if e <= 1.0 {
        return Err(Error::DomainError(format!("category (a) needs e > 1, got {e}")));
    }
    let m = 2.0 / (1.0 + e);
    let u = ellip_k(m)? + (2.0 * params.m * (1.0 + e)).sqrt() / 2.0 * (s - 0.5);
    Ok(2.0 * jacobi_am(u, m)?)
}

/// Simpson quadrature of `(θ' − A)²/2 + M cos θ` over uniform samples spanning [0, 1].
pub fn total_energy(profile: &[Sample], params: &RodParams) -> Result<f64> {
    let n = profile.len();
    if n < 3 || n.is_multiple_of(2) {
        return Err(Error::GridMismatch(format!("Simpson needs an odd number (≥ 3) of samples, got {n}")));
    }
    let h = (profile[n - 1].s - profile[0].s) / (n - 1) as f64;
    for (i, p) in profile.iter().enumerate() {
        if (p.s - (profile[0].s + h * i as f64)).abs() > 1e-9 * h.max(1e-300) * n as f64 {
            return Err(Error::GridMismatch("samples are not uniformly spaced".into()));
        }
    }
    let a = params.slope();
    let ys: Vec<f64> = profile.iter().map(|p| 0.5 * (p.p - a).powi(2) + params.m * p.theta.cos()).collect();
    quad::simpson(&ys, h)
}

#[derive(Debug, Clone)]
pub struct RodEquilibrium {
    pub category: Family,
    /// Loop or oscillation count; 0 when the family has none.
    pub k: usize,
    pub e: f64,
    pub theta0: f64,
    pub energy: f64,
    pub verdict: StabilityVerdict,
    /// |θ'(1) − A|.
    pub residual: f64,
    /// Negative-eigenvalue count from the conjugate-point oracle, when it could be evaluated.
    pub oracle_index: Option<usize>,
    pub oracle_verdict: Option<Verdict>,
    pub notes: Vec<String>,
    pub trajectory: Trajectory,
}

fn build(params: &RodParams, family: Family, k: usize, e: f64) -> Result<RodEquilibrium> {
    let traj = reconstruct(params, family, e)?;
    let residual = (traj.end_state().1 - params.slope()).abs();
    let mut notes = Vec::new();
    if residual > RESIDUAL_TOL * (1.0 + params.slope()) {
        notes.push(format!("end-slope residual {residual:e} exceeds tolerance"));
    }
    let verdict = classify_neumann(&traj, &ClassifyOptions::default())?;
    let energy = total_energy(&traj.samples(ENERGY_INTERVALS), params)?;
    let theta0 = traj.start_state().0;
    if matches!(family, Family::C | Family::BMulti) {
        notes.push(format!("mirror twin at theta0 = {:.9}", -theta0));
    }
    let (oracle_index, oracle_verdict) = match SlProblem::from_trajectory(&traj, SlBc::Neumann).and_then(|p| conjugate_points(&p)) {
        Ok(r) => (Some(r.index), Some(r.verdict())),
        Err(err) => {
            notes.push(format!("oracle: {err}"));
            (None, None)
        }
    };
    Ok(RodEquilibrium {
        category: family,
        k: if family.has_k() { k } else { 0 },
        e,
        theta0,
        energy,
        verdict,
        residual,
        oracle_index,
        oracle_verdict,
        notes,
        trajectory: traj,
    })
}

/// All catalogued equilibria, sorted by family, k and e.
pub fn enumerate_equilibria(params: &RodParams, exec: Execution) -> Result<Vec<RodEquilibrium>> {
    let mut tasks = Vec::new();
    for fam in Family::ALL {
        for k in 1..=k_range(fam, params) {
            tasks.push((fam, k));
        }
    }
    let target = params.target();
    let found = par::map(exec, &tasks, |&(fam, k)| solve_family(fam, params.v, k, target));
    let roots: Vec<(Family, usize, f64)> =
        tasks.iter().zip(found).flat_map(|(&(f, k), es)| es.into_iter().map(move |e| (f, k, e))).collect();
    let mut out = par::map(exec, &roots, |&(f, k, e)| build(params, f, k, e)).into_iter().collect::<Result<Vec<_>>>()?;
    out.sort_by(|x, y| (x.category, x.k).cmp(&(y.category, y.k)).then(x.e.total_cmp(&y.e)));
    Ok(out)
}

/// Data behind the length-vs-energy plot: one row per e, empty cells outside a curve's domain.
#[derive(Debug, Clone, PartialEq)]
pub struct CurveTable {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Option<f64>>>,
}

impl CurveTable {
    pub fn to_csv(&self) -> String {
        let mut s = self.columns.join(",");
        s.push('\n');
        for r in &self.rows {
            let cells: Vec<String> = r.iter().map(|c| c.map(|x| format!("{x:.14e}")).unwrap_or_default()).collect();
            s.push_str(&cells.join(","));
            s.push('\n');
        }
        s
    }
}

/// Uniform grid of `n` interior points of `(max(v − 1, −1), v + 1)`.
pub fn curve_grid(v: f64, n: usize) -> Vec<f64> {
    let lo = (v - 1.0).max(-1.0);
    let hi = v + 1.0;
    (1..=n).map(|i| lo + (hi - lo) * i as f64 / (n + 1) as f64).collect()
}

pub fn length_curves(v: f64, e_grid: &[f64], k_max: usize) -> CurveTable {
    let mut cols: Vec<(String, Family, usize)> = vec![("ell_a".into(), Family::A, 0), ("ell_b".into(), Family::BSimple, 0)];
    if v < 2.0 {
        cols.push(("ell_b_complex".into(), Family::BComplex, 0));
    }
    for (name, fam) in [("ell_b_multi", Family::BMulti), ("ell_c", Family::C), ("ell_d", Family::D), ("ell_e", Family::E)] {
        for k in 1..=k_max {
            cols.push((format!("{name}_k{k}"), fam, k));
        }
    }
    let rows = e_grid
        .iter()
        .map(|&e| {
            let mut r = vec![Some(e)];
            r.extend(cols.iter().map(|(_, f, k)| ell(*f, e, v, *k).ok().filter(|x| x.is_finite())));
            r
        })
        .collect();
    let mut columns = vec!["e".to_string()];
    columns.extend(cols.into_iter().map(|c| c.0));
    CurveTable { columns, rows }
}

/// A solution found by direct shooting rather than from the length functions.
#[derive(Debug, Clone)]
pub struct CensusEntry {
    pub theta0: f64,
    pub e: f64,
    pub energy: f64,
    pub verdict: StabilityVerdict,
    pub trajectory: Trajectory,
}

/// Brute-force Neumann shooting over θ(0) ∈ [−π, π) on `n` cells.
pub fn shooting_census(params: &RodParams, n: usize, exec: Execution) -> Result<Vec<CensusEntry>> {
    let spec = ProblemSpec::neumann(params.potential(), 0.0, 1.0, params.slope())?;
    let shooter = Shooter::new(&spec, ShootOptions::default());
    let scan = shooter.scan(-PI, PI, n, exec);
    let mut out = Vec::new();
    for (x, traj) in scan.solutions {
        if x >= PI - 1e-12 {
            continue;
        }
        let verdict = classify_neumann(&traj, &ClassifyOptions::default())?;
        let energy = total_energy(&traj.samples(ENERGY_INTERVALS), params)?;
        out.push(CensusEntry { theta0: x, e: params.v - x.cos(), energy, verdict, trajectory: traj });
    }
    Ok(out)
}
