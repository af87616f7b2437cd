//! Phase-plane integration of θ'' + V'(θ) = 0, shooting for the two-point problems,
//! and the turning-point / boundary-crossing indices I and J.

use crate::error::{Error, Result};
use crate::ode::{self, DenseSolution, OdeOptions};
use crate::par::{self, Execution};
use crate::potential::{boundary_set_covering, BoundarySet, Potential};
use crate::roots;
use serde::Serialize;

/// Default integrator tolerance.
pub const DEFAULT_TOL: f64 = 1e-10;
/// Event function and its derivative both below this value make a crossing ambiguous.
pub const TANGENCY_TOL: f64 = 1e-9;
/// Sub-samples per integrator step used for event detection.
const EVENT_SUBSTEPS: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum BoundaryCondition {
    Dirichlet { ta: f64, tb: f64 },
    Neumann,
}

/// A two-point problem for the functional ∫ (θ' − A)²/2 − V(θ) ds on [a, b].
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemSpec {
    pub potential: Potential,
    pub a: f64,
    pub b: f64,
    pub bc: BoundaryCondition,
    /// The constant A; under Neumann conditions θ'(a) = θ'(b) = A.
    pub lagrangian_a: f64,
}

impl ProblemSpec {
    pub fn dirichlet(potential: Potential, a: f64, b: f64, ta: f64, tb: f64) -> Result<Self> {
        Self::checked(ProblemSpec { potential, a, b, bc: BoundaryCondition::Dirichlet { ta, tb }, lagrangian_a: 0.0 })
    }

    pub fn neumann(potential: Potential, a: f64, b: f64, lagrangian_a: f64) -> Result<Self> {
        Self::checked(ProblemSpec { potential, a, b, bc: BoundaryCondition::Neumann, lagrangian_a })
    }

    pub fn with_lagrangian_a(mut self, lagrangian_a: f64) -> Self {
        self.lagrangian_a = lagrangian_a;
        self
    }

    fn checked(spec: Self) -> Result<Self> {
        if !(spec.a < spec.b) || !spec.a.is_finite() || !spec.b.is_finite() {
            return Err(Error::InvalidParams(format!("interval [{}, {}] must satisfy a < b", spec.a, spec.b)));
        }
        if !spec.lagrangian_a.is_finite() {
            return Err(Error::InvalidParams("A must be finite".into()));
        }
        if let BoundaryCondition::Dirichlet { ta, tb } = spec.bc {
            if !(ta.is_finite() && tb.is_finite()) {
                return Err(Error::InvalidParams("boundary values must be finite".into()));
            }
        }
        Ok(spec)
    }
}

/// p²/2 + V(θ).
pub fn pseudo_energy(theta: f64, p: f64, pot: &Potential) -> f64 {
    0.5 * p * p + pot.value(theta)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TangencyKind {
    /// θ' and V'(θ) (or θ − θ* and θ') vanish together within tolerance.
    Ambiguous,
    /// θ' vanishes at an endpoint; counted in I.
    EndpointTurning,
    /// The whole trajectory is an equilibrium.
    Constant,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TangencyFlag {
    pub s: f64,
    pub kind: TangencyKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Sample {
    pub s: f64,
    pub theta: f64,
    pub p: f64,
}

/// Event lists of a trajectory, as exported to JSON.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EventList {
    pub energy: f64,
    pub turning_points: Vec<f64>,
    pub min_crossings: Vec<f64>,
    pub max_crossings: Vec<f64>,
    pub tangency_flags: Vec<TangencyFlag>,
}

/// A solution of the Euler-Lagrange equation with its events.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    potential: Potential,
    sol: DenseSolution<2>,
    energy: f64,
    constant: bool,
    pub turning_points: Vec<f64>,
    pub min_crossings: Vec<f64>,
    pub max_crossings: Vec<f64>,
    pub tangency_flags: Vec<TangencyFlag>,
    pub tolerance: f64,
    pub max_energy_drift: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct IndexReport {
    #[serde(rename = "I")]
    pub i: usize,
    #[serde(rename = "J")]
    pub j: i64,
}

fn rhs(pot: &Potential) -> impl Fn(f64, &[f64; 2]) -> [f64; 2] + '_ {
    move |_s, y| [y[1], -pot.slope(y[0])]
}

fn ode_options(tol: f64, span: f64) -> OdeOptions {
    // a quarter of the requested tolerance keeps the post-hoc energy budget comfortably met
    OdeOptions { rtol: 0.25 * tol, atol: 0.25 * tol, h_max: Some(span / 8.0), max_steps: 2_000_000 }
}

/// Long many-loop arcs accumulate global error; tighten the local tolerance this many times.
const DRIFT_RETRIES: usize = 2;

fn energy_drift(sol: &DenseSolution<2>, pot: &Potential, energy: f64) -> f64 {
    sol.fine_grid(2)
        .into_iter()
        .map(|s| {
            let [t, p] = sol.eval(s);
            (pseudo_energy(t, p, pot) - energy).abs()
        })
        .fold(0.0, f64::max)
}

/// Integrates from (θ₀, p₀) at `span.0` to `span.1` and locates all events.
pub fn integrate_ivp(pot: &Potential, theta0: f64, p0: f64, span: (f64, f64), tol: f64) -> Result<Trajectory> {
    if !(tol > 0.0) {
        return Err(Error::InvalidParams(format!("tolerance must be positive, got {tol}")));
    }
    let (s0, s1) = span;
    let len = (s1 - s0).abs();
    if !(len > 0.0) {
        return Err(Error::InvalidParams("integration span is empty".into()));
    }
    let energy = pseudo_energy(theta0, p0, pot);
    let allowed = tol * (1.0 + energy.abs()) * len.max(1.0);
    let mut local = tol;
    let (sol, drift) = loop {
        let sol = ode::integrate(rhs(pot), s0, [theta0, p0], s1, &ode_options(local, len))?;
        let drift = energy_drift(&sol, pot, energy);
        if drift <= allowed || local < tol * 10f64.powi(-(DRIFT_RETRIES as i32)) * 1.5 {
            break (sol, drift);
        }
        local *= 0.1;
    };
    let (_, v1, v2) = pot.eval(theta0);
    let constant = p0.abs() <= 1e-12 && v1.abs() <= TANGENCY_TOL * (1.0 + v2.abs()).max(1.0);
    let mut traj = Trajectory {
        potential: pot.clone(),
        sol,
        energy,
        constant,
        turning_points: Vec::new(),
        min_crossings: Vec::new(),
        max_crossings: Vec::new(),
        tangency_flags: Vec::new(),
        tolerance: tol,
        max_energy_drift: drift,
    };
    if traj.max_energy_drift > allowed {
        return Err(Error::EnergyDrift { drift: traj.max_energy_drift, allowed });
    }
    if constant {
        traj.tangency_flags.push(TangencyFlag { s: s0, kind: TangencyKind::Constant });
        return Ok(traj);
    }
    traj.locate_turning_points()?;
    let (lo, hi) = traj.theta_range();
    let set = boundary_set_covering(pot, lo, hi)?;
    let (mins, maxs) = traj.crossings(&set)?;
    traj.min_crossings = mins;
    traj.max_crossings = maxs;
    Ok(traj)
}

impl Trajectory {
    pub fn potential(&self) -> &Potential {
        &self.potential
    }

    pub fn energy(&self) -> f64 {
        self.energy
    }

    pub fn is_constant(&self) -> bool {
        self.constant
    }

    pub fn start(&self) -> f64 {
        self.sol.start()
    }

    pub fn end(&self) -> f64 {
        self.sol.end()
    }

    pub fn length(&self) -> f64 {
        (self.end() - self.start()).abs()
    }

    /// (θ, θ') at s.
    pub fn state(&self, s: f64) -> (f64, f64) {
        let y = self.sol.eval(s);
        (y[0], y[1])
    }

    pub fn theta(&self, s: f64) -> f64 {
        self.sol.eval(s)[0]
    }

    pub fn dtheta(&self, s: f64) -> f64 {
        self.sol.eval(s)[1]
    }

    pub fn start_state(&self) -> (f64, f64) {
        let y = self.sol.y_start();
        (y[0], y[1])
    }

    pub fn end_state(&self) -> (f64, f64) {
        let y = self.sol.y_end();
        (y[0], y[1])
    }

    /// Integrator step boundaries.
    pub fn nodes(&self) -> Vec<f64> {
        self.sol.nodes()
    }

    pub fn dense(&self) -> &DenseSolution<2> {
        &self.sol
    }

    /// `n + 1` uniformly spaced samples over the span.
    pub fn samples(&self, n: usize) -> Vec<Sample> {
        roots::linspace(self.start(), self.end(), n.max(1))
            .into_iter()
            .map(|s| {
                let (theta, p) = self.state(s);
                Sample { s, theta, p }
            })
            .collect()
    }

    pub fn theta_range(&self) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for s in self.sol.fine_grid(EVENT_SUBSTEPS) {
            let t = self.theta(s);
            lo = lo.min(t);
            hi = hi.max(t);
        }
        for &s in &self.turning_points {
            let t = self.theta(s);
            lo = lo.min(t);
            hi = hi.max(t);
        }
        (lo, hi)
    }

    fn p_scale(&self) -> f64 {
        (2.0 * (self.energy - self.theta_range_min_v()).max(0.0)).sqrt()
    }

    fn theta_range_min_v(&self) -> f64 {
        self.sol.fine_grid(1).into_iter().map(|s| self.potential.value(self.theta(s))).fold(f64::INFINITY, f64::min)
    }

    fn locate_turning_points(&mut self) -> Result<()> {
        let span = self.length();
        let mut tps = self.sol.find_roots(|_, y| y[1], EVENT_SUBSTEPS, 1e-14 * span.max(1.0))?;
        let zero_tol = 1e-8 * (1.0 + self.p_scale());
        let merge = 1e-8 * span;
        let (s0, s1) = (self.start(), self.end());
        if self.dtheta(s0).abs() <= zero_tol && tps.first().is_none_or(|t| (t - s0).abs() > merge) {
            tps.insert(0, s0);
            self.tangency_flags.push(TangencyFlag { s: s0, kind: TangencyKind::EndpointTurning });
        }
        if self.dtheta(s1).abs() <= zero_tol {
            match tps.last_mut() {
                Some(t) if (*t - s1).abs() <= merge => *t = s1,
                _ => tps.push(s1),
            }
            self.tangency_flags.push(TangencyFlag { s: s1, kind: TangencyKind::EndpointTurning });
        }
        for &s in &tps {
            // θ'' = −V'(θ); a turning point with vanishing θ'' is a touch, not a crossing
            if self.potential.slope(self.theta(s)).abs() < TANGENCY_TOL {
                self.tangency_flags.push(TangencyFlag { s, kind: TangencyKind::Ambiguous });
            }
        }
        self.turning_points = tps;
        Ok(())
    }

    /// Crossings of the minima and maxima of `set`, split at turning points so θ is monotone per piece.
    fn crossings(&self, set: &BoundarySet) -> Result<(Vec<f64>, Vec<f64>)> {
        let (s0, s1) = (self.start(), self.end());
        let mut cuts = vec![s0];
        for &t in &self.turning_points {
            if t != s0 && t != s1 {
                cuts.push(t);
            }
        }
        cuts.push(s1);
        let mut mins = Vec::new();
        let mut maxs = Vec::new();
        let levels = set.merged();
        for w in cuts.windows(2) {
            let (ta, tb) = (self.theta(w[0]), self.theta(w[1]));
            let (lo, hi) = if ta < tb { (ta, tb) } else { (tb, ta) };
            for &(level, is_min) in &levels {
                if !(level > lo && level < hi) {
                    continue;
                }
                // a level that only grazes a piece end belongs to a tangency, not a crossing
                if (level - lo).abs() < 1e-12 || (hi - level).abs() < 1e-12 {
                    continue;
                }
                let s = roots::brent(|s| self.theta(s) - level, w[0], w[1], 1e-14 * self.length().max(1.0))?;
                if self.dtheta(s).abs() < TANGENCY_TOL {
                    return Err(Error::TangencyAmbiguous { s });
                }
                if is_min {
                    mins.push(s);
                } else {
                    maxs.push(s);
                }
            }
        }
        let ord = |a: &f64, b: &f64| if s1 >= s0 { a.total_cmp(b) } else { b.total_cmp(a) };
        mins.sort_by(ord);
        maxs.sort_by(ord);
        Ok((mins, maxs))
    }

    pub fn events(&self) -> EventList {
        EventList {
            energy: self.energy,
            turning_points: self.turning_points.clone(),
            min_crossings: self.min_crossings.clone(),
            max_crossings: self.max_crossings.clone(),
            tangency_flags: self.tangency_flags.clone(),
        }
    }

    fn has_ambiguity(&self) -> Option<f64> {
        self.tangency_flags.iter().find(|f| f.kind == TangencyKind::Ambiguous).map(|f| f.s)
    }
}

/// Number of points of the closed interval where θ' = 0.
pub fn index_i(traj: &Trajectory) -> Result<usize> {
    if traj.is_constant() {
        return Err(Error::ConstantTrajectory);
    }
    if let Some(s) = traj.has_ambiguity() {
        return Err(Error::TangencyAmbiguous { s });
    }
    Ok(traj.turning_points.len())
}

/// (#min-boundary crossings) − (#max-boundary crossings) against `set`.
pub fn index_j(traj: &Trajectory, set: &BoundarySet) -> Result<i64> {
    if traj.is_constant() {
        return Err(Error::ConstantTrajectory);
    }
    if let Some(s) = traj.has_ambiguity() {
        return Err(Error::TangencyAmbiguous { s });
    }
    let (lo, hi) = traj.theta_range();
    if !set.covers(lo, hi) {
        return Err(Error::WindowTooSmall { lo: set.window.0, hi: set.window.1 });
    }
    for theta in [traj.start_state().0, traj.end_state().0] {
        if set.distance(theta) < TANGENCY_TOL {
            return Err(Error::EndpointOnBoundary { theta });
        }
    }
    let (mins, maxs) = traj.crossings(set)?;
    Ok(mins.len() as i64 - maxs.len() as i64)
}

/// I and J against the stationary points covering the trajectory.
pub fn indices(traj: &Trajectory) -> Result<IndexReport> {
    let i = index_i(traj)?;
    let (lo, hi) = traj.theta_range();
    let set = boundary_set_covering(traj.potential(), lo, hi)?;
    let j = index_j(traj, &set)?;
    Ok(IndexReport { i, j })
}

/// Initial guess for a shooting parameter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Guess {
    /// Search outward from a point for the nearest sign change.
    Point(f64),
    /// A bracket expected to contain a sign change.
    Bracket(f64, f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShootOptions {
    pub tol: f64,
    /// Accepted residual (relative to 1 + |target|) after root finding.
    pub residual_tol: f64,
    /// First step of the outward search from a point guess.
    pub search_step: f64,
    /// Maximum distance searched from a point guess.
    pub search_radius: f64,
    /// Root tolerance on the shooting parameter; 0 refines to machine precision.
    pub xtol: f64,
}

impl Default for ShootOptions {
    fn default() -> Self {
        ShootOptions { tol: DEFAULT_TOL, residual_tol: 1e-7, search_step: 1e-3, search_radius: 10.0, xtol: 1e-12 }
    }
}

/// Residual of the shooting map for a spec: θ(b) − T_b (Dirichlet) or θ'(b) − A (Neumann).
pub struct Shooter<'a> {
    spec: &'a ProblemSpec,
    opts: ShootOptions,
}

impl<'a> Shooter<'a> {
    pub fn new(spec: &'a ProblemSpec, opts: ShootOptions) -> Self {
        Shooter { spec, opts }
    }

    /// Initial state for the shooting parameter.
    pub fn initial(&self, x: f64) -> (f64, f64) {
        match self.spec.bc {
            BoundaryCondition::Dirichlet { ta, .. } => (ta, x),
            BoundaryCondition::Neumann => (x, self.spec.lagrangian_a),
        }
    }

    pub fn target(&self) -> f64 {
        match self.spec.bc {
            BoundaryCondition::Dirichlet { tb, .. } => tb,
            BoundaryCondition::Neumann => self.spec.lagrangian_a,
        }
    }

    /// Residual at parameter `x`; NaN when the integration fails.
    pub fn residual(&self, x: f64) -> f64 {
        let (t0, p0) = self.initial(x);
        let len = self.spec.b - self.spec.a;
        match ode::integrate(rhs(&self.spec.potential), self.spec.a, [t0, p0], self.spec.b, &ode_options(self.opts.tol, len)) {
            Ok(sol) => {
                let y = sol.y_end();
                match self.spec.bc {
                    BoundaryCondition::Dirichlet { tb, .. } => y[0] - tb,
                    BoundaryCondition::Neumann => y[1] - self.spec.lagrangian_a,
                }
            }
            Err(_) => f64::NAN,
        }
    }

    fn find_bracket(&self, guess: Guess) -> Result<(f64, f64, f64, f64)> {
        match guess {
            Guess::Bracket(lo, hi) => {
                let (flo, fhi) = (self.residual(lo), self.residual(hi));
                if flo == 0.0 || fhi == 0.0 || (flo.is_finite() && fhi.is_finite() && flo.signum() != fhi.signum()) {
                    Ok((lo, flo, hi, fhi))
                } else {
                    Err(Error::NoBracket(format!("residual has the same sign at {lo} and {hi}")))
                }
            }
            Guess::Point(g) => {
                let f0 = self.residual(g);
                if f0 == 0.0 {
                    return Ok((g, f0, g, f0));
                }
                let (mut up, mut fup) = (g, f0);
                let (mut dn, mut fdn) = (g, f0);
                let mut step = self.opts.search_step;
                let mut travelled = 0.0;
                while travelled < self.opts.search_radius {
                    travelled += step;
                    let x_up = g + travelled;
                    let f_up = self.residual(x_up);
                    if fup.is_finite() && f_up.is_finite() && (f_up == 0.0 || f_up.signum() != fup.signum()) {
                        return Ok((up, fup, x_up, f_up));
                    }
                    up = x_up;
                    fup = f_up;
                    let x_dn = g - travelled;
                    let f_dn = self.residual(x_dn);
                    if fdn.is_finite() && f_dn.is_finite() && (f_dn == 0.0 || f_dn.signum() != fdn.signum()) {
                        return Ok((x_dn, f_dn, dn, fdn));
                    }
                    dn = x_dn;
                    fdn = f_dn;
                    step *= 1.05;
                }
                Err(Error::NoBracket(format!("no sign change within {} of {g}", self.opts.search_radius)))
            }
        }
    }

    /// Root of the residual starting from `guess`, and the converged trajectory.
    pub fn solve(&self, guess: Guess) -> Result<(f64, Trajectory)> {
        let (lo, flo, hi, fhi) = self.find_bracket(guess)?;
        let x = if lo == hi { lo } else { self.refine(lo, flo, hi, fhi)? };
        self.finish(x)
    }

    fn refine(&self, lo: f64, flo: f64, hi: f64, fhi: f64) -> Result<f64> {
        roots::brent_known(|x| self.residual(x), lo, flo, hi, fhi, self.opts.xtol)
    }

    fn finish(&self, x: f64) -> Result<(f64, Trajectory)> {
        let r = self.residual(x);
        if !(r.abs() <= self.opts.residual_tol * (1.0 + self.target().abs())) {
            return Err(Error::NoConvergence(format!("shooting residual {r:e} at parameter {x}")));
        }
        let (t0, p0) = self.initial(x);
        let traj = integrate_ivp(&self.spec.potential, t0, p0, (self.spec.a, self.spec.b), self.opts.tol)?;
        Ok((x, traj))
    }

    /// All roots found from sign changes of the residual on `n` cells of `[lo, hi]`.
    pub fn scan(&self, lo: f64, hi: f64, n: usize, exec: Execution) -> ScanOutcome {
        let xs = roots::linspace(lo, hi, n.max(1));
        let ys = par::map(exec, &xs, |&x| self.residual(x));
        let brackets = roots::sign_change_brackets(&xs, &ys);
        let results = par::map(exec, &brackets, |&(a, fa, b, fb)| {
            let x = if a == b { Ok(a) } else { self.refine(a, fa, b, fb) };
            x.and_then(|x| self.finish(x)).map_err(|e| (0.5 * (a + b), e))
        });
        let mut out = ScanOutcome::default();
        for r in results {
            match r {
                Ok((x, t)) => {
                    if out.solutions.iter().all(|(y, _)| (x - y).abs() > 1e-9) {
                        out.solutions.push((x, t));
                    }
                }
                Err(e) => out.failures.push(e),
            }
        }
        out
    }
}

#[derive(Debug, Clone, Default)]
pub struct ScanOutcome {
    /// (shooting parameter, trajectory), in increasing parameter order.
    pub solutions: Vec<(f64, Trajectory)>,
    /// Brackets whose refinement failed, with the reason.
    pub failures: Vec<(f64, Error)>,
}

/// Dirichlet shooting on the initial slope p₀ = θ'(a).
pub fn shoot_dirichlet(spec: &ProblemSpec, guess: Guess, opts: ShootOptions) -> Result<Trajectory> {
    if !matches!(spec.bc, BoundaryCondition::Dirichlet { .. }) {
        return Err(Error::InvalidParams("shoot_dirichlet needs Dirichlet boundary conditions".into()));
    }
    Shooter::new(spec, opts).solve(guess).map(|(_, t)| t)
}

/// Neumann shooting on the initial angle θ(a), with θ'(a) = A.
pub fn shoot_neumann(spec: &ProblemSpec, guess: Guess, opts: ShootOptions) -> Result<Trajectory> {
    if !matches!(spec.bc, BoundaryCondition::Neumann) {
        return Err(Error::InvalidParams("shoot_neumann needs Neumann boundary conditions".into()));
    }
    Shooter::new(spec, opts).solve(guess).map(|(_, t)| t)
}
