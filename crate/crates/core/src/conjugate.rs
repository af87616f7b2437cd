//! Sturm-Liouville conjugate-point oracle for `𝒮 = −d²/ds² + f(s)`, `f = −V''(θ(s))`.
//!
//! Independent of the phase-plane indices: conjugate points come from the `h₁`/`h₂`
//! initial-value problems, and a finite-difference spectrum double-checks the count.

use crate::classify::Verdict;
use crate::error::{Error, Result};
use crate::ode::{self, DenseSolution, OdeOptions};
use crate::phase::Trajectory;
use crate::spline::CubicSpline;
use crate::tridiag::SymTridiagonal;
use serde::Serialize;
use std::f64::consts::PI;

/// Relative distance (in units of b − a) under which b itself counts as conjugate.
pub const B_CONJUGATE_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SlBc {
    Dirichlet,
    Neumann,
}

impl std::str::FromStr for SlBc {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "dirichlet" => Ok(SlBc::Dirichlet),
            "neumann" => Ok(SlBc::Neumann),
            other => Err(Error::InvalidParams(format!("unknown boundary condition {other:?}"))),
        }
    }
}

/// Where f comes from.
#[derive(Debug, Clone, PartialEq)]
pub enum Coefficient {
    Constant(f64),
    /// Interpolated samples.
    Spline(CubicSpline),
    /// `−V''(θ(s))` read straight off the trajectory's dense output.
    Trajectory(Box<Trajectory>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SlProblem {
    pub coefficient: Coefficient,
    pub a: f64,
    pub b: f64,
    pub bc: SlBc,
}

impl SlProblem {
    fn checked(coefficient: Coefficient, a: f64, b: f64, bc: SlBc) -> Result<Self> {
        if !(a.is_finite() && b.is_finite() && a < b) {
            return Err(Error::InvalidParams(format!("interval [{a}, {b}] must have a < b")));
        }
        Ok(SlProblem { coefficient, a, b, bc })
    }

    pub fn constant(f: f64, a: f64, b: f64, bc: SlBc) -> Result<Self> {
        if !f.is_finite() {
            return Err(Error::InvalidParams("non-finite coefficient".into()));
        }
        Self::checked(Coefficient::Constant(f), a, b, bc)
    }

    /// Natural cubic spline through `(s_i, f_i)`; the interval is the sample span.
    pub fn tabulated(s: Vec<f64>, f: Vec<f64>, bc: SlBc) -> Result<Self> {
        let spline = CubicSpline::new(s, f)?;
        let (a, b) = spline.domain();
        Self::checked(Coefficient::Spline(spline), a, b, bc)
    }

    /// The Jacobi operator of a computed equilibrium.
    pub fn from_trajectory(traj: &Trajectory, bc: SlBc) -> Result<Self> {
        let (a, b) = (traj.start(), traj.end());
        Self::checked(Coefficient::Trajectory(Box::new(traj.clone())), a, b, bc)
    }

    /// Same operator restricted to `[a, sigma]`.
    pub fn truncated(&self, sigma: f64) -> Result<Self> {
        Self::checked(self.coefficient.clone(), self.a, sigma, self.bc)
    }

    pub fn width(&self) -> f64 {
        self.b - self.a
    }

    pub fn f(&self, s: f64) -> f64 {
        match &self.coefficient {
            Coefficient::Constant(c) => *c,
            Coefficient::Spline(sp) => sp.value(s),
            Coefficient::Trajectory(t) => -t.potential().curvature(t.theta(s)),
        }
    }
}

/// `λ_k = f(a) + k²π²/w²`, k from 1 (Dirichlet) or 0 (Neumann) up to `k_max`.
pub fn inborn_eigenvalues(f_a: f64, width: f64, bc: SlBc, k_max: usize) -> Vec<f64> {
    let k0 = match bc {
        SlBc::Dirichlet => 1,
        SlBc::Neumann => 0,
    };
    (k0..=k_max).map(|k| f_a + (k * k) as f64 * PI * PI / (width * width)).collect()
}

/// Solves `h'' = f h` on `[a, b]` from the seed matching the boundary condition:
/// `h(a)=0, h'(a)=1` (Dirichlet) or `h(a)=1, h'(a)=0` (Neumann). State is `[h, h']`.
pub fn solve_h(problem: &SlProblem) -> Result<DenseSolution<2>> {
    let seed = match problem.bc {
        SlBc::Dirichlet => [0.0, 1.0],
        SlBc::Neumann => [1.0, 0.0],
    };
    let opts = OdeOptions { rtol: 1e-11, atol: 1e-13, h_max: Some(problem.width() / 16.0), ..Default::default() };
    ode::integrate(|s, y| [y[1], problem.f(s) * y[0]], problem.a, seed, problem.b, &opts)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConjugateReport {
    pub bc: SlBc,
    /// Conjugate points in (a, b], ascending. Includes b when it is conjugate.
    pub points: Vec<f64>,
    /// Sign of f at each point (used by the Neumann count).
    pub signs_at_points: Vec<i8>,
    pub index: usize,
    pub b_is_conjugate: bool,
}

impl ConjugateReport {
    /// Stable with no negative eigenvalues, Unstable with some, Degenerate when only b
    /// is in doubt.
    pub fn verdict(&self) -> Verdict {
        if self.index > 0 {
            Verdict::Unstable
        } else if self.b_is_conjugate {
            Verdict::Degenerate
        } else {
            Verdict::Stable
        }
    }
}

fn sign(x: f64) -> i8 {
    if x > 0.0 {
        1
    } else if x < 0.0 {
        -1
    } else {
        0
    }
}

/// Locates the conjugate points and evaluates the index.
pub fn conjugate_points(problem: &SlProblem) -> Result<ConjugateReport> {
    let sol = solve_h(problem)?;
    let (a, b) = (problem.a, problem.b);
    let tol = B_CONJUGATE_TOL * problem.width();
    let fa = problem.f(a);
    let fscale = 1e-10 * (1.0 + fa.abs());

    let (mut points, end_gap) = match problem.bc {
        SlBc::Dirichlet => {
            let pts = sol.find_roots(|_, y| y[0], 8, 0.0)?;
            let [h, hp] = sol.y_end();
            (pts, if hp != 0.0 { (h / hp).abs() } else { h.abs() })
        }
        SlBc::Neumann => {
            if fa.abs() <= fscale {
                return Err(Error::SimultaneousZero { s: a });
            }
            let pts = sol.find_roots(|_, y| y[1], 8, 0.0)?;
            let [h, hp] = sol.y_end();
            let hpp = problem.f(b) * h;
            (pts, if hpp != 0.0 { (hp / hpp).abs() } else { hp.abs() })
        }
    };
    points.retain(|&p| p > a + tol);
    let b_is_conjugate = end_gap < tol || points.last().is_some_and(|&p| b - p < tol);
    points.retain(|&p| b - p >= tol);
    if b_is_conjugate {
        points.push(b);
    }

    let signs_at_points: Vec<i8> = points.iter().map(|&p| sign(problem.f(p))).collect();
    let interior = if b_is_conjugate { points.len() - 1 } else { points.len() };

    let index = match problem.bc {
        SlBc::Dirichlet => interior,
        SlBc::Neumann => {
            for (&p, &sg) in points.iter().zip(&signs_at_points).take(interior) {
                if sg == 0 || problem.f(p).abs() <= fscale {
                    return Err(Error::SimultaneousZero { s: p });
                }
            }
            let inborn = if fa < 0.0 { 1 } else { 0 };
            let sum: i64 = signs_at_points[..interior].iter().map(|&s| s as i64).sum();
            let idx = inborn - sum;
            if idx < 0 {
                return Err(Error::NoConvergence(format!("negative Neumann index {idx}; f has unresolved sign changes")));
            }
            idx as usize
        }
    };
    Ok(ConjugateReport { bc: problem.bc, points, signs_at_points, index, b_is_conjugate })
}

pub fn index_dirichlet(problem: &SlProblem) -> Result<usize> {
    conjugate_points(&SlProblem { bc: SlBc::Dirichlet, ..problem.clone() }).map(|r| r.index)
}

pub fn index_neumann(problem: &SlProblem) -> Result<usize> {
    conjugate_points(&SlProblem { bc: SlBc::Neumann, ..problem.clone() }).map(|r| r.index)
}

/// Central-difference discretisation of `𝒮` on `n` cells, symmetrised.
///
/// Dirichlet keeps the `n − 1` interior nodes; Neumann keeps all `n + 1` nodes with ghost
/// reflection, rescaled at the ends so the matrix stays symmetric.
pub fn fd_matrix(problem: &SlProblem, n: usize) -> Result<SymTridiagonal> {
    if n < 16 {
        return Err(Error::InvalidParams(format!("need at least 16 cells, got {n}")));
    }
    let h = problem.width() / n as f64;
    let ih2 = 1.0 / (h * h);
    let node = |i: usize| problem.a + h * i as f64;
    match problem.bc {
        SlBc::Dirichlet => {
            let diag = (1..n).map(|i| 2.0 * ih2 + problem.f(node(i))).collect();
            SymTridiagonal::new(diag, vec![-ih2; n - 2])
        }
        SlBc::Neumann => {
            let diag = (0..=n).map(|i| 2.0 * ih2 + problem.f(node(i))).collect();
            let mut off = vec![-ih2; n];
            off[0] = -std::f64::consts::SQRT_2 * ih2;
            off[n - 1] = -std::f64::consts::SQRT_2 * ih2;
            SymTridiagonal::new(diag, off)
        }
    }
}

/// Full FD spectrum, ascending.
pub fn fd_spectrum(problem: &SlProblem, n: usize) -> Result<Vec<f64>> {
    fd_matrix(problem, n)?.eigenvalues()
}

/// The `count` lowest eigenvalues extrapolated from grids of `n` and `2n` cells.
pub fn fd_lowest_extrapolated(problem: &SlProblem, n: usize, count: usize) -> Result<Vec<f64>> {
    let coarse = fd_matrix(problem, n)?.lowest(count)?;
    let fine = fd_matrix(problem, 2 * n)?.lowest(count)?;
    Ok(coarse.iter().zip(&fine).map(|(c, f)| (4.0 * f - c) / 3.0).collect())
}

/// Number of negative eigenvalues after Richardson extrapolation over `n` and `2n`.
pub fn fd_negative_count(problem: &SlProblem, n: usize) -> Result<usize> {
    let fine = fd_matrix(problem, 2 * n)?;
    let candidates = (fine.count_below(0.0) + 2).min(fine.dim()).min(n - 1);
    let lam = fd_lowest_extrapolated(problem, n, candidates)?;
    Ok(lam.iter().filter(|&&l| l < 0.0).count())
}
