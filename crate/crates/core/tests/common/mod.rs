//! Helpers shared by the integration tests: seeded randomness, an independent quadrature
//! oracle, and generators of random trajectories and free-end solutions.
#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use varstab::phase::{integrate_ivp, Trajectory, DEFAULT_TOL};
use varstab::potential::Potential;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Adaptive Simpson with Richardson correction; deliberately unrelated to the library's
/// Gauss-Kronrod so that it can serve as an oracle.
pub fn simpson_oracle<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    #[allow(clippy::too_many_arguments)]
    fn step<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let diff = left + right - whole;
        if depth == 0 || diff.abs() <= 15.0 * tol {
            return left + right + diff / 15.0;
        }
        step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) + step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
    }
    // split first so the recursion never sees a near-symmetric cancellation
    let n = 16;
    let h = (b - a) / n as f64;
    (0..n)
        .map(|i| {
            let (x0, x1) = (a + h * i as f64, a + h * (i + 1) as f64);
            let (f0, fm, f1) = (f(x0), f(0.5 * (x0 + x1)), f(x1));
            let whole = (x1 - x0) / 6.0 * (f0 + 4.0 * fm + f1);
            step(f, x0, x1, f0, fm, f1, whole, tol / n as f64, 40)
        })
        .sum()
}

/// Pendulum or double-well potential with random parameters.
pub fn random_potential<R: Rng>(r: &mut R) -> Potential {
    if r.gen_bool(0.5) {
        Potential::pendulum(r.gen_range(0.5..10.0)).unwrap()
    } else {
        Potential::double_well(r.gen_range(0.5..3.0), r.gen_range(0.5..3.0)).unwrap()
    }
}

/// Random trajectory on `[0, len]`; `None` when the integrator refuses the data.
pub fn random_trajectory<R: Rng>(r: &mut R, pot: &Potential) -> Option<Trajectory> {
    let t0 = r.gen_range(-2.5..2.5);
    let p0 = r.gen_range(-3.0..3.0);
    let len = r.gen_range(0.3..6.0);
    integrate_ivp(pot, t0, p0, (0.0, len), DEFAULT_TOL).ok()
}

/// A random solution with free ends: θ'(0) = θ'(b) = A, b picked among the returns of θ' to A.
pub fn random_neumann<R: Rng>(r: &mut R, pot: &Potential) -> Option<Trajectory> {
    let t0 = r.gen_range(-2.5..2.5);
    let a = r.gen_range(-3.0..3.0);
    let horizon = r.gen_range(2.0..10.0);
    let long = integrate_ivp(pot, t0, a, (0.0, horizon), DEFAULT_TOL).ok()?;
    let returns: Vec<f64> = long.dense().find_roots(|_, y| y[1] - a, 8, 1e-14).ok()?.into_iter().filter(|&s| s > 0.05).collect();
    if returns.is_empty() {
        return None;
    }
    let b = returns[r.gen_range(0..returns.len())];
    integrate_ivp(pot, t0, a, (0.0, b), DEFAULT_TOL).ok()
}
