//! The potential V(θ), its derivatives, and its stationary-point structure.

use crate::error::{Error, Result};
use crate::roots;
use crate::spline::CubicSpline;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::f64::consts::TAU;

/// Root tolerance on |V'| at a stationary point.
pub const ROOT_TOL: f64 = 1e-12;
/// Below this |V''| a stationary point is degenerate.
pub const DEGENERACY_TOL: f64 = 1e-8;
/// Default number of scan cells for [`stationary_points`].
pub const SCAN_CELLS: usize = 1024;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableData {
    pub theta: Vec<f64>,
    pub values: Vec<f64>,
}

/// Serializable name + parameters identifying a potential.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PotentialDescriptor {
    pub family: String,
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub table: Option<TableData>,
}

impl PotentialDescriptor {
    pub fn new(family: &str, params: &[(&str, f64)]) -> Self {
        PotentialDescriptor { family: family.to_string(), params: params.iter().map(|(k, v)| (k.to_string(), *v)).collect(), table: None }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("descriptor serialization cannot fail")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::InvalidParams(format!("potential descriptor: {e}")))
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Kind {
    Pendulum {
        m: f64,
    },
    /// V = Σ c_i θ^i
    Polynomial {
        coeffs: Vec<f64>,
    },
    Table(CubicSpline),
}

/// V(θ) together with exact (or spline) first and second derivatives.
#[derive(Debug, Clone, PartialEq)]
pub struct Potential {
    kind: Kind,
    descriptor: PotentialDescriptor,
}

impl Potential {
    /// V = −M cos θ.
    pub fn pendulum(m: f64) -> Result<Self> {
        if !(m > 0.0 && m.is_finite()) {
            return Err(Error::InvalidParams(format!("pendulum needs M > 0, got {m}")));
        }
        Ok(Potential { kind: Kind::Pendulum { m }, descriptor: PotentialDescriptor::new("pendulum", &[("M", m)]) })
    }

    /// V = Σ c_i θ^i with `coeffs[i] = c_i`.
    pub fn polynomial(coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.is_empty() || coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidParams("polynomial needs finite coefficients".into()));
        }
        let params = coeffs.iter().enumerate().map(|(i, c)| (format!("c{i}"), *c)).collect();
        let descriptor = PotentialDescriptor { family: "polynomial".into(), params, table: None };
        Ok(Potential { kind: Kind::Polynomial { coeffs }, descriptor })
    }

    /// V = a θ⁴/4 − b θ²/2: wells at ±√(b/a), barrier at 0.
    pub fn double_well(a: f64, b: f64) -> Result<Self> {
        if !(a > 0.0 && b > 0.0 && a.is_finite() && b.is_finite()) {
            return Err(Error::InvalidParams(format!("double_well needs a, b > 0, got a = {a}, b = {b}")));
        }
        let mut p = Self::polynomial(vec![0.0, 0.0, -0.5 * b, 0.0, 0.25 * a])?;
        p.descriptor = PotentialDescriptor::new("double_well", &[("a", a), ("b", b)]);
        Ok(p)
    }

    /// V = k θ²/2.
    pub fn harmonic(k: f64) -> Result<Self> {
        if !(k > 0.0 && k.is_finite()) {
            return Err(Error::InvalidParams(format!("harmonic needs k > 0, got {k}")));
        }
        let mut p = Self::polynomial(vec![0.0, 0.0, 0.5 * k])?;
        p.descriptor = PotentialDescriptor::new("harmonic", &[("k", k)]);
        Ok(p)
    }

    /// Natural cubic spline through `(theta[i], values[i])`.
    pub fn tabulated(theta: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        let spline = CubicSpline::new(theta.clone(), values.clone())?;
        let descriptor = PotentialDescriptor { family: "table".into(), params: BTreeMap::new(), table: Some(TableData { theta, values }) };
        Ok(Potential { kind: Kind::Table(spline), descriptor })
    }

    /// Builds a potential from a family name and its parameters.
    pub fn builtin(name: &str, params: &BTreeMap<String, f64>) -> Result<Self> {
        let get = |key: &str| -> Result<f64> {
            params.get(key).copied().ok_or_else(|| Error::InvalidParams(format!("{name} needs parameter `{key}`")))
        };
        let allow = |keys: &[&str]| -> Result<()> {
            match params.keys().find(|k| !keys.contains(&k.as_str())) {
                Some(k) => Err(Error::InvalidParams(format!("{name} does not take parameter `{k}`"))),
                None => Ok(()),
            }
        };
        match name {
            "pendulum" => {
                allow(&["M"])?;
                Self::pendulum(get("M")?)
            }
            "double_well" => {
                allow(&["a", "b"])?;
                Self::double_well(get("a")?, get("b")?)
            }
            "harmonic" => {
                allow(&["k"])?;
                Self::harmonic(get("k")?)
            }
            "polynomial" => {
                let mut coeffs = Vec::new();
                for key in params.keys() {
                    let idx = key
                        .strip_prefix('c')
                        .and_then(|d| d.parse::<usize>().ok())
                        .ok_or_else(|| Error::InvalidParams(format!("polynomial parameters are c0, c1, ..., got `{key}`")))?;
                    if idx >= coeffs.len() {
                        coeffs.resize(idx + 1, 0.0);
                    }
                    coeffs[idx] = params[key];
                }
                Self::polynomial(coeffs)
            }
            other => Err(Error::UnknownFamily(other.to_string())),
        }
    }

    pub fn from_descriptor(d: &PotentialDescriptor) -> Result<Self> {
        if d.family == "table" {
            let t = d.table.as_ref().ok_or_else(|| Error::InvalidParams("table potential needs `table` data".into()))?;
            return Self::tabulated(t.theta.clone(), t.values.clone());
        }
        Self::builtin(&d.family, &d.params)
    }

    pub fn descriptor(&self) -> &PotentialDescriptor {
        &self.descriptor
    }

    pub fn period(&self) -> Option<f64> {
        match self.kind {
            Kind::Pendulum { .. } => Some(TAU),
            _ => None,
        }
    }

    /// (V, V', V'') at θ.
    pub fn eval(&self, theta: f64) -> (f64, f64, f64) {
        match &self.kind {
            Kind::Pendulum { m } => {
                let (s, c) = theta.sin_cos();
                (-m * c, m * s, m * c)
            }
            Kind::Polynomial { coeffs } => {
                let (mut v, mut d1, mut d2) = (0.0, 0.0, 0.0);
                for c in coeffs.iter().rev() {
                    d2 = d2 * theta + 2.0 * d1;
                    d1 = d1 * theta + v;
                    v = v * theta + c;
                }
                (v, d1, d2)
            }
            Kind::Table(s) => s.eval(theta),
        }
    }

    pub fn value(&self, theta: f64) -> f64 {
        self.eval(theta).0
    }

    pub fn slope(&self, theta: f64) -> f64 {
        self.eval(theta).1
    }

    pub fn curvature(&self, theta: f64) -> f64 {
        self.eval(theta).2
    }

    /// V(x) − V(x + d), accurate for small |d| where direct subtraction cancels.
    pub fn drop(&self, x: f64, d: f64) -> f64 {
        if let Kind::Pendulum { m } = self.kind {
            // −M cos x + M cos(x+d) = −2M sin(x + d/2) sin(d/2)
            return -2.0 * m * (x + 0.5 * d).sin() * (0.5 * d).sin();
        }
        if d.abs() < 1e-5 {
            // midpoint expansion: the even term cancels, error O(d³ V''')
            return -self.slope(x + 0.5 * d) * d;
        }
        self.value(x) - self.value(x + d)
    }

    /// Errors when V' and V'' vanish together at θ.
    pub fn check_regular(&self, theta: f64) -> Result<()> {
        let (_, v1, v2) = self.eval(theta);
        if v1.abs() <= ROOT_TOL * (1.0 + v2.abs()).max(1.0) && v2.abs() < DEGENERACY_TOL {
            return Err(Error::DegeneratePotential { theta });
        }
        Ok(())
    }
}

/// Sorted minima and maxima of V inside a window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundarySet {
    pub minima: Vec<f64>,
    pub maxima: Vec<f64>,
    pub window: (f64, f64),
}

impl BoundarySet {
    pub fn covers(&self, lo: f64, hi: f64) -> bool {
        self.window.0 <= lo && hi <= self.window.1
    }

    /// All stationary points, sorted, each tagged `true` for a minimum.
    pub fn merged(&self) -> Vec<(f64, bool)> {
        let mut all: Vec<(f64, bool)> = self.minima.iter().map(|&x| (x, true)).chain(self.maxima.iter().map(|&x| (x, false))).collect();
        all.sort_by(|a, b| a.0.total_cmp(&b.0));
        all
    }

    /// Distance from θ to the nearest stationary point.
    pub fn distance(&self, theta: f64) -> f64 {
        self.minima.iter().chain(&self.maxima).map(|x| (x - theta).abs()).fold(f64::INFINITY, f64::min)
    }
}

/// Stationary points of V on `[lo, hi]` with the default scan resolution.
pub fn stationary_points(pot: &Potential, lo: f64, hi: f64) -> Result<BoundarySet> {
    stationary_points_with(pot, lo, hi, SCAN_CELLS)
}

/// Sign-change scan of V' over `cells` cells, refined by bisection.
pub fn stationary_points_with(pot: &Potential, lo: f64, hi: f64, cells: usize) -> Result<BoundarySet> {
    if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(Error::InvalidParams(format!("window [{lo}, {hi}] is empty")));
    }
    let xs = roots::linspace(lo, hi, cells.max(1));
    let ys: Vec<f64> = xs.iter().map(|&x| pot.slope(x)).collect();
    let mut found: Vec<f64> = Vec::new();
    for (a, _, b, _) in roots::sign_change_brackets(&xs, &ys) {
        let r =
            if a == b { a } else { roots::bisect(|x| pot.slope(x), a, b, 4.0 * f64::EPSILON * a.abs().max(b.abs()).max(1.0), ROOT_TOL)? };
        if found.last().is_none_or(|l| (r - l).abs() > 1e-10) {
            found.push(r);
        }
    }
    // A double zero of V' never changes sign. It sits at a local extremum of V', i.e. a root of V''.
    for i in 1..xs.len() - 1 {
        let (l, c, r) = (ys[i - 1], ys[i], ys[i + 1]);
        if l.signum() != r.signum() || c.signum() != l.signum() || c.abs() > l.abs().min(r.abs()) {
            continue;
        }
        let (c0, c1) = (pot.curvature(xs[i - 1]), pot.curvature(xs[i + 1]));
        if c0.signum() == c1.signum() {
            continue;
        }
        let t = roots::bisect(|x| pot.curvature(x), xs[i - 1], xs[i + 1], 1e-15, 0.0)?;
        if pot.slope(t).abs() < 1e-9 {
            return Err(Error::DegeneratePotential { theta: t });
        }
    }
    let mut set = BoundarySet { minima: Vec::new(), maxima: Vec::new(), window: (lo, hi) };
    for r in found {
        let v2 = pot.curvature(r);
        if v2.abs() < DEGENERACY_TOL {
            return Err(Error::DegeneratePotential { theta: r });
        }
        if v2 > 0.0 {
            set.minima.push(r);
        } else {
            set.maxima.push(r);
        }
    }
    Ok(set)
}

/// Stationary points covering `[lo, hi]`; periodic potentials are scanned over one period and replicated.
pub fn boundary_set_covering(pot: &Potential, lo: f64, hi: f64) -> Result<BoundarySet> {
    let (lo, hi) = if hi > lo { (lo, hi) } else { (lo - 0.5, lo + 0.5) };
    match pot.period() {
        Some(p) => {
            let base = stationary_points(pot, 0.0, p)?;
            let mut set = BoundarySet { minima: Vec::new(), maxima: Vec::new(), window: (lo - 1.0, hi + 1.0) };
            let k0 = ((lo - 1.0) / p).floor() as i64 - 1;
            let k1 = ((hi + 1.0) / p).ceil() as i64 + 1;
            for k in k0..=k1 {
                let shift = k as f64 * p;
                for &x in &base.minima {
                    push_unique(&mut set.minima, x + shift);
                }
                for &x in &base.maxima {
                    push_unique(&mut set.maxima, x + shift);
                }
            }
            let (wl, wh) = set.window;
            set.minima.retain(|x| *x >= wl && *x <= wh);
            set.maxima.retain(|x| *x >= wl && *x <= wh);
            set.minima.sort_by(f64::total_cmp);
            set.maxima.sort_by(f64::total_cmp);
            Ok(set)
        }
        None => {
            let margin = 1.0 + 0.1 * (hi - lo);
            stationary_points(pot, lo - margin, hi + margin)
        }
    }
}

fn push_unique(v: &mut Vec<f64>, x: f64) {
    if v.iter().all(|y| (x - y).abs() > 1e-9) {
        v.push(x);
    }
}
