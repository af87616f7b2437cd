//! Flight time L(T₀, E, P) along a phase-plane arc and its derivative with respect to E.

use crate::error::{Error, Result};
use crate::phase::{index_i, Trajectory};
use crate::potential::Potential;
use crate::quad::{self, QuadOptions};
use crate::roots;
use std::cell::Cell;
use std::f64::consts::SQRT_2;

/// An arc starting at T₀ with pseudo-energy E and ending with slope P.
///
/// `direction` is the sign of the motion in θ. It must agree with the sign of P when P ≠ 0
/// and is what disambiguates the turning-point limit P → 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArcSpec {
    pub t0: f64,
    pub energy: f64,
    pub p: f64,
    pub direction: f64,
}

impl ArcSpec {
    pub fn new(t0: f64, energy: f64, p: f64) -> Result<Self> {
        if p == 0.0 {
            return Err(Error::InvalidParams("P = 0 needs an explicit direction; use ArcSpec::turning".into()));
        }
        Ok(ArcSpec { t0, energy, p, direction: p.signum() })
    }

    /// The arc that ends at the turning point, travelling in `direction`.
    pub fn turning(t0: f64, energy: f64, direction: f64) -> Result<Self> {
        if direction == 0.0 || !direction.is_finite() {
            return Err(Error::InvalidParams("direction must be ±1".into()));
        }
        Ok(ArcSpec { t0, energy, p: 0.0, direction: direction.signum() })
    }

    fn validate(&self, pot: &Potential) -> Result<()> {
        if !(self.t0.is_finite() && self.energy.is_finite() && self.p.is_finite()) {
            return Err(Error::InvalidParams("non-finite arc data".into()));
        }
        if self.p != 0.0 && self.p.signum() != self.direction {
            return Err(Error::InvalidParams("P must point in the direction of motion".into()));
        }
        let gap = self.energy - pot.value(self.t0);
        if gap < -1e-12 * (1.0 + self.energy.abs()) {
            return Err(Error::InvalidParams(format!("E − V(T₀) = {gap:e} < 0")));
        }
        Ok(())
    }

    /// Slope at the start, P₀ = ±√(2(E − V(T₀))).
    pub fn p0(&self, pot: &Potential) -> f64 {
        self.direction * (2.0 * (self.energy - pot.value(self.t0)).max(0.0)).sqrt()
    }
}

#[derive(Clone, Copy)]
struct March {
    step0: f64,
    step_max: f64,
    reach: f64,
}

fn march_for(pot: &Potential) -> March {
    match pot.period() {
        Some(p) => March { step0: 1e-4 * p, step_max: 2e-3 * p, reach: 2.0 * p },
        None => March { step0: 1e-4, step_max: 1e-2, reach: 1e3 },
    }
}

enum Turn {
    At(f64),
    /// The motion creeps up to a maximum of V at height E and never turns.
    Separatrix(f64),
    Never,
}

/// Turning point θ_c: first zero of E − V in the direction of motion.
fn turning_point(pot: &Potential, spec: &ArcSpec) -> Result<Turn> {
    let d = spec.direction;
    let h = |x: f64| spec.energy - pot.value(x);
    let m = march_for(pot);
    let mut x = spec.t0;
    let mut hx = h(x).max(0.0);
    let mut step = m.step0;
    let mut travelled = 0.0;
    while travelled < m.reach {
        let nx = x + d * step;
        let hn = h(nx);
        let (s0, s1) = (pot.slope(x), pot.slope(nx));
        if s0 != 0.0 && s1 != 0.0 && s0.signum() != s1.signum() && hn > 0.0 {
            // passing over a stationary point of V: a maximum at height E is a separatrix
            let top = roots::brent_known(|y| pot.slope(y), x, s0, nx, s1, 0.0)?;
            let ht = h(top);
            if pot.curvature(top) < 0.0 && ht.abs() <= 1e-12 * (1.0 + spec.energy.abs()) {
                return Ok(Turn::Separatrix(top));
            }
            if ht < 0.0 {
                // the step jumped over a narrow cap above E; the turn is on the near side of it
                return Ok(Turn::At(roots::brent_known(h, x, hx, top, ht, 0.0)?));
            }
        }
        if hn <= 0.0 {
            if hx == 0.0 {
                return Ok(Turn::At(x));
            }
            let r = roots::brent_known(h, x, hx, nx, hn, 0.0)?;
            return Ok(Turn::At(r));
        }
        travelled += step;
        x = nx;
        hx = hn;
        step = (step * 1.25).min(m.step_max);
    }
    Ok(Turn::Never)
}

/// End abscissa T of the arc: the root of V(T) = E − P²/2 closest to the turning point.
pub fn turning_abscissa(pot: &Potential, spec: &ArcSpec) -> Result<f64> {
    spec.validate(pot)?;
    let tc = match (turning_point(pot, spec)?, spec.p == 0.0) {
        (Turn::At(t), true) => return Ok(t),
        (Turn::Separatrix(_), true) => return Err(Error::DivergentArc),
        (Turn::Never, true) => return Err(Error::NoRoot("E − V has no zero in the direction of motion".into())),
        (Turn::At(t) | Turn::Separatrix(t), false) => Some(t),
        (Turn::Never, false) => None,
    };
    let level = spec.energy - 0.5 * spec.p * spec.p;
    let g = |x: f64| level - pot.value(x);
    let d = spec.direction;
    let m = march_for(pot);
    match tc {
        Some(tc) => {
            // walk back from θ_c toward T₀ until g ≥ 0
            let mut x = tc;
            let mut gx = g(x);
            let mut step = m.step0.min(0.5 * (tc - spec.t0).abs().max(1e-300));
            loop {
                let mut nx = x - d * step;
                if (nx - spec.t0) * d <= 0.0 {
                    nx = spec.t0;
                }
                let gn = g(nx);
                if gn >= 0.0 {
                    return roots::brent_known(g, nx, gn, x, gx, 0.0);
                }
                if nx == spec.t0 {
                    return Err(Error::NoRoot(format!("V(T) = {level} has no root between T₀ and θ_c")));
                }
                x = nx;
                gx = gn;
                step = (step * 1.25).min(m.step_max);
            }
        }
        None => {
            // the arc never turns; take the first crossing of the level
            let mut x = spec.t0;
            let mut gx = g(x);
            let mut step = m.step0;
            let mut travelled = 0.0;
            while travelled < m.reach {
                let nx = x + d * step;
                let gn = g(nx);
                if gn == 0.0 || (gx != 0.0 && gn.signum() != gx.signum()) {
                    return roots::brent_known(g, x, gx, nx, gn, 0.0);
                }
                travelled += step;
                x = nx;
                gx = gn;
                step = (step * 1.25).min(m.step_max);
            }
            Err(Error::NoRoot(format!("V(T) = {level} not reached")))
        }
    }
}

fn arc_length_with(pot: &Potential, spec: &ArcSpec, opts: QuadOptions) -> Result<f64> {
    let t = turning_abscissa(pot, spec)?;
    let d = spec.direction;
    let dist = (t - spec.t0).abs();
    if dist == 0.0 {
        return Ok(0.0);
    }
    let half = 0.5 * dist;
    let gap_t = 0.5 * spec.p * spec.p;
    if gap_t < 1e-12 && pot.slope(t).abs() < 1e-9 {
        return Err(Error::DivergentArc);
    }
    let gap0 = (spec.energy - pot.value(spec.t0)).max(0.0);
    let divergent = Cell::new(false);
    let umax = half.sqrt();
    // θ = T − d u² near the end, θ = T₀ + d u² near the start; dθ = 2u du.
    // The integrand is 2/√(q/u²): only a vanishing q/u² (a double zero of E − V) diverges.
    let near_end = |u: f64| {
        let q = gap_t + pot.drop(t, -d * u * u);
        if q <= 1e-12 * u * u && u > 1e-6 {
            divergent.set(true);
        }
        if q <= 0.0 {
            return 0.0;
        }
        2.0 * u / q.sqrt()
    };
    let near_start = |u: f64| {
        let q = gap0 + pot.drop(spec.t0, d * u * u);
        if q <= 1e-12 * u * u && u > 1e-6 {
            divergent.set(true);
        }
        if q <= 0.0 {
            return 0.0;
        }
        2.0 * u / q.sqrt()
    };
    let a = quad::integrate(near_end, 0.0, umax, opts)?.value;
    let b = quad::integrate(near_start, 0.0, umax, opts)?.value;
    if divergent.get() {
        return Err(Error::DivergentArc);
    }
    Ok((a + b) / SQRT_2)
}

/// L = (1/√2) ∫ dθ / √(E − V(θ)) between T₀ and T, always non-negative.
pub fn arc_length(pot: &Potential, spec: &ArcSpec) -> Result<f64> {
    arc_length_with(pot, spec, QuadOptions::default())
}

/// ∂L/∂E. Uses the two-term closed form when P ≠ 0 and the finite-difference turning limit otherwise.
pub fn dlength_de(pot: &Potential, spec: &ArcSpec) -> Result<f64> {
    if spec.p == 0.0 {
        return dlength_de_limit(pot, spec);
    }
    let t = turning_abscissa(pot, spec)?;
    let v1 = pot.slope(t);
    let first = 1.0 / (spec.p * v1);
    let (lo, hi) = if t < spec.t0 { (t, spec.t0) } else { (spec.t0, t) };
    let integral = quad::integrate(
        |x: f64| {
            let q = spec.energy - pot.value(x);
            q.max(0.0).powf(-1.5)
        },
        lo,
        hi,
        QuadOptions::tight(1e-13),
    )?
    .value;
    let out = first - integral / (2.0 * SQRT_2);
    if !out.is_finite() {
        return Err(Error::NonFiniteDerivative);
    }
    Ok(out)
}

/// ∂L/∂E by central differences of the regularized length, Richardson-extrapolated.
/// Works for any P; at P = 0 it gives the turning-point limit.
pub fn dlength_de_limit(pot: &Potential, spec: &ArcSpec) -> Result<f64> {
    spec.validate(pot)?;
    let opts = QuadOptions::tight(1e-14);
    let room = spec.energy - 0.5 * spec.p * spec.p - pot.value(spec.t0);
    let mut h = 0.05 * room.abs().clamp(1e-6, 1.0) * (1.0 + spec.energy.abs()).min(10.0);
    if room > 0.0 {
        h = h.min(0.25 * room);
    }
    let length_at = |e: f64| arc_length_with(pot, &ArcSpec { energy: e, ..*spec }, opts);
    let central = |h: f64| -> Result<f64> { Ok((length_at(spec.energy + h)? - length_at(spec.energy - h)?) / (2.0 * h)) };
    let mut prev_d = central(h)?;
    let mut prev_r: Option<f64> = None;
    for _ in 0..14 {
        h *= 0.5;
        let d = central(h)?;
        let r = (4.0 * d - prev_d) / 3.0;
        if !r.is_finite() {
            return Err(Error::NonFiniteDerivative);
        }
        if let Some(pr) = prev_r {
            if (r - pr).abs() <= 1e-7 * r.abs().max(1e-2) {
                return Ok(r);
            }
        }
        prev_r = Some(r);
        prev_d = d;
    }
    prev_r.ok_or(Error::NonFiniteDerivative)
}

/// α: the E-derivative of the total flight time of a trajectory with exactly one turning point,
/// as the sum of the two turning-limit derivatives from θ(a) and θ(b).
pub fn alpha(traj: &Trajectory) -> Result<f64> {
    let i = index_i(traj)?;
    if i != 1 {
        return Err(Error::WrongIndex { expected: "I = 1".into(), found: format!("I = {i}") });
    }
    let (ta, pa) = traj.start_state();
    let (tb, pb) = traj.end_state();
    let tiny = 1e-8 * (1.0 + pa.abs().max(pb.abs()));
    if pa.abs() <= tiny || pb.abs() <= tiny {
        return Err(Error::WrongIndex { expected: "endpoints off the turning set".into(), found: "θ' = 0 at an endpoint".into() });
    }
    let sigma = pa.signum();
    let pot = traj.potential();
    let e = traj.energy();
    let la = dlength_de_limit(pot, &ArcSpec::turning(ta, e, sigma)?)?;
    let lb = dlength_de_limit(pot, &ArcSpec::turning(tb, e, sigma)?)?;
    Ok(la + lb)
}
