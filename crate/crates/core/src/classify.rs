//! Geometric stability verdicts, the second variation, and the explicit destabilizing
//! perturbation for Neumann solutions with J = 0.

use crate::arclen::alpha;
use crate::error::{Error, Result};
use crate::phase::{index_i, index_j, Trajectory};
use crate::potential::{boundary_set_covering, Potential, DEGENERACY_TOL};
use crate::quad::{self, QuadOptions};
use crate::spline::CubicSpline;
use serde::Serialize;

/// Default half-width of the band where |α| or |β| is treated as zero.
pub const MARGINAL_BAND: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Stable,
    Unstable,
    Inconclusive,
    Degenerate,
}

impl Verdict {
    /// Process exit code used by the command-line tool.
    pub fn exit_code(self) -> i32 {
        match self {
            Verdict::Stable => 0,
            Verdict::Unstable => 1,
            Verdict::Inconclusive | Verdict::Degenerate => 2,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Stable => "stable",
            Verdict::Unstable => "unstable",
            Verdict::Inconclusive => "inconclusive",
            Verdict::Degenerate => "degenerate",
        }
    }
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A verdict with the evidence that produced it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StabilityVerdict {
    pub verdict: Verdict,
    pub theorem: String,
    #[serde(rename = "I")]
    pub i: Option<usize>,
    #[serde(rename = "J")]
    pub j: Option<i64>,
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl StabilityVerdict {
    fn new(verdict: Verdict, theorem: &str) -> Self {
        StabilityVerdict { verdict, theorem: theorem.to_string(), i: None, j: None, alpha: None, beta: None, notes: Vec::new() }
    }

    fn degenerate(reason: &Error) -> Self {
        let mut v = Self::new(Verdict::Degenerate, "precondition");
        v.notes.push(reason.to_string());
        v
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassifyOptions {
    /// Half-width of the zero band for α (absolute) and β (relative to [`beta_scale`]).
    pub marginal_band: f64,
}

impl Default for ClassifyOptions {
    fn default() -> Self {
        ClassifyOptions { marginal_band: MARGINAL_BAND }
    }
}

fn is_precondition_failure(e: &Error) -> bool {
    matches!(
        e,
        Error::TangencyAmbiguous { .. }
            | Error::EndpointOnBoundary { .. }
            | Error::ConstantTrajectory
            | Error::WrongIndex { .. }
            | Error::DivergentArc
            | Error::DegeneratePotential { .. }
    )
}

/// Stability of the constant solution θ ≡ C.
pub fn classify_constant(pot: &Potential, c: f64) -> Result<StabilityVerdict> {
    let (_, v1, v2) = pot.eval(c);
    if v1.abs() > 1e-8 * (1.0 + v2.abs()) {
        return Err(Error::NotASolution { residual: v1 });
    }
    let mut v = if v2 < -DEGENERACY_TOL {
        StabilityVerdict::new(Verdict::Stable, "constant,V''<0")
    } else if v2 > DEGENERACY_TOL {
        StabilityVerdict::new(Verdict::Unstable, "constant,V''>0")
    } else {
        StabilityVerdict::new(Verdict::Degenerate, "constant,V''=0")
    };
    v.notes.push(format!("V''(C) = {v2}"));
    Ok(v)
}

/// Table-1 verdict for fixed ends, from I and (when I = 1) the sign of α.
pub fn classify_dirichlet(traj: &Trajectory, opts: &ClassifyOptions) -> Result<StabilityVerdict> {
    if traj.is_constant() {
        return classify_constant(traj.potential(), traj.start_state().0);
    }
    let i = match index_i(traj) {
        Ok(i) => i,
        Err(e) if is_precondition_failure(&e) => return Ok(StabilityVerdict::degenerate(&e)),
        Err(e) => return Err(e),
    };
    let mut v = match i {
        0 => StabilityVerdict::new(Verdict::Stable, "I=0"),
        1 => {
            let a = match alpha(traj) {
                Ok(a) => a,
                Err(e) if is_precondition_failure(&e) => {
                    let mut v = StabilityVerdict::degenerate(&e);
                    v.i = Some(1);
                    return Ok(v);
                }
                Err(e) => return Err(e),
            };
            let mut v = if a > opts.marginal_band {
                StabilityVerdict::new(Verdict::Stable, "I=1,alpha>0")
            } else if a < -opts.marginal_band {
                StabilityVerdict::new(Verdict::Unstable, "I=1,alpha<0")
            } else {
                StabilityVerdict::new(Verdict::Inconclusive, "I=1,alpha=0")
            };
            v.alpha = Some(a);
            v
        }
        _ => StabilityVerdict::new(Verdict::Unstable, "I>=2"),
    };
    v.i = Some(i);
    Ok(v)
}

/// ξ(a) − ξ(b) with ξ = θ' V'(θ).
pub fn beta(traj: &Trajectory) -> f64 {
    let pot = traj.potential();
    let (ta, pa) = traj.start_state();
    let (tb, pb) = traj.end_state();
    pa * pot.slope(ta) - pb * pot.slope(tb)
}

/// `1 + |ξ(a)| + |ξ(b)|`, the size against which β is judged to be zero.
pub fn beta_scale(traj: &Trajectory) -> f64 {
    let pot = traj.potential();
    let (ta, pa) = traj.start_state();
    let (tb, pb) = traj.end_state();
    1.0 + (pa * pot.slope(ta)).abs() + (pb * pot.slope(tb)).abs()
}

/// Table-1 verdict for free ends, from J and (when J = 0) the sign of β.
///
/// When |β| lies in the marginal band the sign is settled constructively: the destabilizing
/// perturbation is evaluated and a negative second variation proves instability.
pub fn classify_neumann(traj: &Trajectory, opts: &ClassifyOptions) -> Result<StabilityVerdict> {
    if traj.is_constant() {
        return classify_constant(traj.potential(), traj.start_state().0);
    }
    let (lo, hi) = traj.theta_range();
    let set = boundary_set_covering(traj.potential(), lo, hi)?;
    let j = match index_j(traj, &set) {
        Ok(j) => j,
        Err(e) if is_precondition_failure(&e) => return Ok(StabilityVerdict::degenerate(&e)),
        Err(e) => return Err(e),
    };
    let mut v = if j < 0 {
        StabilityVerdict::new(Verdict::Stable, "J<0")
    } else if j > 0 {
        StabilityVerdict::new(Verdict::Unstable, "J>0")
    } else {
        let b = beta(traj);
        let band = opts.marginal_band * beta_scale(traj);
        let mut v = if b < -band {
            StabilityVerdict::new(Verdict::Unstable, "J=0,beta<=0")
        } else if b > band {
            StabilityVerdict::new(Verdict::Inconclusive, "J=0,beta>0")
        } else {
            match settle_marginal_beta(traj)? {
                Some((eps, d2)) if d2 < 0.0 => {
                    let mut v = StabilityVerdict::new(Verdict::Unstable, "J=0,beta<=0");
                    v.notes.push(format!("beta in the marginal band; perturbation with eps = {eps:e} gives d2E = {d2:e}"));
                    v
                }
                other => {
                    let mut v = StabilityVerdict::new(Verdict::Inconclusive, "J=0,beta=0");
                    if let Some((eps, d2)) = other {
                        v.notes.push(format!("perturbation with eps = {eps:e} gives d2E = {d2:e}"));
                    }
                    v
                }
            }
        };
        v.beta = Some(b);
        v
    };
    v.j = Some(j);
    v.i = index_i(traj).ok();
    Ok(v)
}

/// Halves ε = ν from 1e−3 (b − a) until the sign of δ²E repeats; returns (ε, δ²E).
fn settle_marginal_beta(traj: &Trajectory) -> Result<Option<(f64, f64)>> {
    let mut eps = 1e-3 * traj.length();
    let mut last: Option<f64> = None;
    for _ in 0..8 {
        let prof = match destabilizing_perturbation(traj, eps, eps) {
            Ok(p) => p,
            Err(Error::DegeneratePotential { .. }) => return Ok(None),
            Err(e) => return Err(e),
        };
        let d2 = prof.second_variation;
        if let Some(prev) = last {
            if prev.signum() == d2.signum() {
                return Ok(Some((eps, d2)));
            }
        }
        last = Some(d2);
        eps *= 0.5;
    }
    Ok(last.map(|d2| (eps * 2.0, d2)))
}

/// A test function τ on [a, b] with its derivative.
pub trait Perturbation {
    /// (τ(s), τ'(s)).
    fn eval(&self, s: f64) -> (f64, f64);
    /// Points where τ may fail to be smooth, including both ends.
    fn breakpoints(&self) -> Vec<f64>;
}

impl Perturbation for CubicSpline {
    fn eval(&self, s: f64) -> (f64, f64) {
        let (v, d, _) = CubicSpline::eval(self, s);
        (v, d)
    }

    fn breakpoints(&self) -> Vec<f64> {
        self.knots().to_vec()
    }
}

/// δ²E = ∫ τ'² − V''(θ) τ² ds along the trajectory.
pub fn second_variation(traj: &Trajectory, tau: &dyn Perturbation) -> Result<f64> {
    let bp = tau.breakpoints();
    let (a, b) = (traj.start().min(traj.end()), traj.start().max(traj.end()));
    let (lo, hi) = (bp[0], bp[bp.len() - 1]);
    let tol = 1e-9 * (b - a);
    if (lo - a).abs() > tol || (hi - b).abs() > tol {
        return Err(Error::GridMismatch(format!("τ lives on [{lo}, {hi}] but the trajectory on [{a}, {b}]")));
    }
    let pot = traj.potential();
    let integrand = |s: f64| {
        let (t, d) = tau.eval(s);
        d * d - pot.curvature(traj.theta(s)) * t * t
    };
    Ok(quad::integrate_pieces(integrand, &bp, QuadOptions::tight(1e-12))?.value)
}

/// The piecewise τ: quadratic blends g, h near the ends and θ' in between, with τ'(a) = τ'(b) = 0.
#[derive(Debug, Clone)]
pub struct BlendedPerturbation<'t> {
    traj: &'t Trajectory,
    a: f64,
    b: f64,
    eps: f64,
    nu: f64,
    // θ'(a+ε), θ''(a+ε), θ'(b−ν), θ''(b−ν)
    ga: (f64, f64),
    hb: (f64, f64),
}

impl<'t> BlendedPerturbation<'t> {
    pub fn new(traj: &'t Trajectory, eps: f64, nu: f64) -> Result<Self> {
        let (a, b) = (traj.start(), traj.end());
        if !(eps > 0.0 && nu > 0.0 && eps + nu < b - a) {
            return Err(Error::BadWidths(format!("need 0 < ε, 0 < ν, ε + ν < b − a; got ε = {eps}, ν = {nu}")));
        }
        let pot = traj.potential();
        let second = |s: f64| {
            let (t, p) = traj.state(s);
            (p, -pot.slope(t))
        };
        Ok(BlendedPerturbation { traj, a, b, eps, nu, ga: second(a + eps), hb: second(b - nu) })
    }
}

impl Perturbation for BlendedPerturbation<'_> {
    fn eval(&self, s: f64) -> (f64, f64) {
        let sa = self.a + self.eps;
        let sb = self.b - self.nu;
        if s < sa {
            let x = s - sa;
            let (p, q) = self.ga;
            (p + q * x + q / (2.0 * self.eps) * x * x, q + q / self.eps * x)
        } else if s > sb {
            let x = s - sb;
            let (p, q) = self.hb;
            (p + q * x - q / (2.0 * self.nu) * x * x, q - q / self.nu * x)
        } else {
            let (t, p) = self.traj.state(s);
            (p, -self.traj.potential().slope(t))
        }
    }

    fn breakpoints(&self) -> Vec<f64> {
        vec![self.a, self.a + self.eps, self.b - self.nu, self.b]
    }
}

/// The destabilizing perturbation with its second variation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PerturbationProfile {
    pub eps: f64,
    pub nu: f64,
    pub second_variation: f64,
    /// (s, τ, τ') on a uniform grid, for inspection and export.
    pub samples: Vec<(f64, f64, f64)>,
}

pub fn destabilizing_perturbation(traj: &Trajectory, eps: f64, nu: f64) -> Result<PerturbationProfile> {
    let pot = traj.potential();
    for theta in [traj.start_state().0, traj.end_state().0] {
        if pot.slope(theta).abs() < DEGENERACY_TOL {
            return Err(Error::DegeneratePotential { theta });
        }
    }
    let tau = BlendedPerturbation::new(traj, eps, nu)?;
    let second_variation = second_variation(traj, &tau)?;
    let n = 200;
    let samples = (0..=n)
        .map(|k| {
            let s = traj.start() + traj.length() * k as f64 / n as f64;
            let (t, d) = tau.eval(s);
            (s, t, d)
        })
        .collect();
    Ok(PerturbationProfile { eps, nu, second_variation, samples })
}

/// Least-squares slope of δ²E against ε (with ν = ε) over the given widths.
pub fn perturbation_slope(traj: &Trajectory, widths: &[f64]) -> Result<f64> {
    let ys: Vec<f64> = widths.iter().map(|&e| destabilizing_perturbation(traj, e, e).map(|p| p.second_variation)).collect::<Result<_>>()?;
    let n = widths.len() as f64;
    let mx = widths.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = widths.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = widths.iter().map(|x| (x - mx) * (x - mx)).sum();
    Ok(sxy / sxx)
}
