//! Dormand-Prince 5(4) integrator with continuous (dense) output.

use crate::error::{Error, Result};
use crate::roots;

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    /// Upper bound on |h|; `None` means the full span.
    pub h_max: Option<f64>,
    pub max_steps: usize,
}

impl Default for OdeOptions {
    fn default() -> Self {
        OdeOptions { rtol: 1e-10, atol: 1e-10, h_max: None, max_steps: 1_000_000 }
    }
}

impl OdeOptions {
    pub fn with_tol(tol: f64) -> Self {
        OdeOptions { rtol: tol, atol: tol, ..Default::default() }
    }
}

#[derive(Debug, Clone, PartialEq)]
struct Step<const N: usize> {
    s0: f64,
    h: f64,
    rc: [[f64; N]; 5],
}

impl<const N: usize> Step<N> {
    fn eval(&self, s: f64) -> [f64; N] {
        let th = (s - self.s0) / self.h;
        let th1 = 1.0 - th;
        let mut y = [0.0; N];
        for (i, yi) in y.iter_mut().enumerate() {
            let r = &self.rc;
            *yi = r[0][i] + th * (r[1][i] + th1 * (r[2][i] + th * (r[3][i] + th1 * r[4][i])));
        }
        y
    }

    fn end(&self) -> f64 {
        self.s0 + self.h
    }
}

/// Piecewise quartic interpolant covering the whole integration span.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseSolution<const N: usize> {
    steps: Vec<Step<N>>,
    start: f64,
    end: f64,
    y_start: [f64; N],
    y_end: [f64; N],
    pub rejected: usize,
}

impl<const N: usize> DenseSolution<N> {
    pub fn start(&self) -> f64 {
        self.start
    }

    pub fn end(&self) -> f64 {
        self.end
    }

    pub fn y_start(&self) -> [f64; N] {
        self.y_start
    }

    pub fn y_end(&self) -> [f64; N] {
        self.y_end
    }

    pub fn forward(&self) -> bool {
        self.end >= self.start
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// Step boundaries in integration order, including both span ends.
    pub fn nodes(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(self.steps.len() + 1);
        v.push(self.start);
        for st in &self.steps {
            v.push(st.end());
        }
        if let Some(last) = v.last_mut() {
            *last = self.end;
        }
        v
    }

    fn step_index(&self, s: f64) -> usize {
        let n = self.steps.len();
        if self.forward() {
            self.steps.partition_point(|st| st.end() < s).min(n - 1)
        } else {
            self.steps.partition_point(|st| st.end() > s).min(n - 1)
        }
    }

    /// Interpolated state. Arguments outside the span are clamped to it.
    pub fn eval(&self, s: f64) -> [f64; N] {
        if self.steps.is_empty() {
            return self.y_start;
        }
        let (lo, hi) = if self.forward() { (self.start, self.end) } else { (self.end, self.start) };
        let s = s.clamp(lo, hi);
        if s == self.end {
            return self.y_end;
        }
        if s == self.start {
            return self.y_start;
        }
        self.steps[self.step_index(s)].eval(s)
    }

    /// Sample points: every step split into `sub` equal pieces, in integration order.
    pub fn fine_grid(&self, sub: usize) -> Vec<f64> {
        let nodes = self.nodes();
        let mut out = Vec::with_capacity(nodes.len() * sub);
        for w in nodes.windows(2) {
            for j in 0..sub {
                out.push(w[0] + (w[1] - w[0]) * j as f64 / sub as f64);
            }
        }
        out.push(self.end);
        out
    }

    /// Roots of `g(s, y(s))` in the open span, located by sub-sampling each step and refining with Brent.
    /// Returned in integration order.
    pub fn find_roots<G: Fn(f64, &[f64; N]) -> f64>(&self, g: G, sub: usize, xtol: f64) -> Result<Vec<f64>> {
        let grid = self.fine_grid(sub.max(1));
        let vals: Vec<f64> = grid.iter().map(|&s| g(s, &self.eval(s))).collect();
        let mut out = Vec::new();
        for i in 0..grid.len() - 1 {
            let (v0, v1) = (vals[i], vals[i + 1]);
            if v0 == 0.0 {
                if i > 0 && out.last() != Some(&grid[i]) {
                    out.push(grid[i]);
                }
                continue;
            }
            if v1 != 0.0 && v0.signum() != v1.signum() {
                let r = roots::brent_known(|s| g(s, &self.eval(s)), grid[i], v0, grid[i + 1], v1, xtol)?;
                out.push(r);
            }
        }
        Ok(out)
    }
}

/// Integrates `y' = f(s, y)` from `s0` to `s1` (either direction).
pub fn integrate<const N: usize, F>(f: F, s0: f64, y0: [f64; N], s1: f64, opts: &OdeOptions) -> Result<DenseSolution<N>>
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
{
    if !(s0.is_finite() && s1.is_finite()) || y0.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidParams("non-finite initial data".into()));
    }
    let mut sol = DenseSolution { steps: Vec::new(), start: s0, end: s1, y_start: y0, y_end: y0, rejected: 0 };
    if s0 == s1 {
        return Ok(sol);
    }
    let dir = (s1 - s0).signum();
    let span = (s1 - s0).abs();
    let h_max = opts.h_max.unwrap_or(span).min(span);
    let mut s = s0;
    let mut y = y0;
    let mut k1 = f(s, &y);
    let mut h = initial_step(&f, s, &y, &k1, dir, h_max, opts);
    let mut fac_old: f64 = 1e-4;
    let mut reject_streak = false;

    let add = |y: &[f64; N], terms: &[(f64, &[f64; N])], h: f64| -> [f64; N] {
        let mut out = *y;
        for (i, o) in out.iter_mut().enumerate() {
            let mut acc = 0.0;
            for (c, k) in terms {
                acc += c * k[i];
            }
            *o += h * acc;
        }
        out
    };

    for _ in 0..opts.max_steps {
        let remaining = (s1 - s).abs();
        let mut last = false;
        if h.abs() >= remaining * (1.0 - 1e-12) {
            h = dir * remaining;
            last = true;
        }
        if h.abs() < 1e-14 * s.abs().max(1.0) {
            return Err(Error::StepFailure { s, reason: "step size underflow".into() });
        }
        let k2 = f(s + C2 * h, &add(&y, &[(A21, &k1)], h));
        let k3 = f(s + C3 * h, &add(&y, &[(A31, &k1), (A32, &k2)], h));
        let k4 = f(s + C4 * h, &add(&y, &[(A41, &k1), (A42, &k2), (A43, &k3)], h));
        let k5 = f(s + C5 * h, &add(&y, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)], h));
        let ys = add(&y, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)], h);
        let k6 = f(s + h, &ys);
        let y1 = add(&y, &[(A71, &k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)], h);
        let k7 = f(s + h, &y1);
        if y1.iter().chain(&k7).any(|v| !v.is_finite()) {
            h *= 0.25;
            sol.rejected += 1;
            reject_streak = true;
            continue;
        }
        let mut err = 0.0;
        for i in 0..N {
            let e = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
            let sk = opts.atol + opts.rtol * y[i].abs().max(y1[i].abs());
            err += (e / sk).powi(2);
        }
        let err = (err / N as f64).sqrt();

        // Lund-stabilised step control, as in the classic DOPRI5 code.
        let fac11 = err.powf(0.2 - 0.04 * 0.75);
        let mut fac = fac11 / fac_old.powf(0.04);
        fac = (fac / 0.9).clamp(0.1, 5.0);
        let mut h_new = h / fac;
        if err <= 1.0 {
            fac_old = err.max(1e-4);
            let mut rc = [[0.0; N]; 5];
            for i in 0..N {
                let ydiff = y1[i] - y[i];
                let bspl = h * k1[i] - ydiff;
                rc[0][i] = y[i];
                rc[1][i] = ydiff;
                rc[2][i] = bspl;
                rc[3][i] = ydiff - h * k7[i] - bspl;
                rc[4][i] = h * (D1 * k1[i] + D3 * k3[i] + D4 * k4[i] + D5 * k5[i] + D6 * k6[i] + D7 * k7[i]);
            }
            sol.steps.push(Step { s0: s, h, rc });
            k1 = k7;
            y = y1;
            s = if last { s1 } else { s + h };
            if last {
                sol.y_end = y;
                return Ok(sol);
            }
            if h_new.abs() > h_max {
                h_new = dir * h_max;
            }
            if reject_streak {
                h_new = dir * h_new.abs().min(h.abs());
            }
            reject_streak = false;
            h = h_new;
        } else {
            h_new = h / (fac11 / 0.9).min(10.0);
            sol.rejected += 1;
            reject_streak = true;
            h = h_new;
        }
    }
    Err(Error::StepFailure { s, reason: format!("exceeded {} steps", opts.max_steps) })
}

fn initial_step<const N: usize, F>(f: &F, s: f64, y: &[f64; N], k1: &[f64; N], dir: f64, h_max: f64, opts: &OdeOptions) -> f64
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
{
    let mut dnf = 0.0;
    let mut dny = 0.0;
    for i in 0..N {
        let sk = opts.atol + opts.rtol * y[i].abs();
        dnf += (k1[i] / sk).powi(2);
        dny += (y[i] / sk).powi(2);
    }
    let mut h = if dnf <= 1e-10 || dny <= 1e-10 { 1e-6 } else { (dny / dnf).sqrt() * 0.01 };
    h = h.min(h_max);
    let mut y1 = *y;
    for i in 0..N {
        y1[i] += dir * h * k1[i];
    }
    let k2 = f(s + dir * h, &y1);
    let mut der2 = 0.0;
    for i in 0..N {
        let sk = opts.atol + opts.rtol * y[i].abs();
        der2 += ((k2[i] - k1[i]) / sk).powi(2);
    }
    let der2 = der2.sqrt() / h;
    let der12 = der2.abs().max(dnf.sqrt());
    let h1 = if der12 <= 1e-15 { (h * 1e-3).max(1e-6) } else { (0.01 / der12).powf(0.2) };
    dir * (100.0 * h).min(h1).min(h_max)
}
