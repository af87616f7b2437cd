//! Natural cubic spline interpolation on strictly increasing knots.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SplineData", into = "SplineData")]
pub struct CubicSpline {
    x: Vec<f64>,
    y: Vec<f64>,
    // second derivatives at the knots
    m: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct SplineData {
    x: Vec<f64>,
    y: Vec<f64>,
}

impl TryFrom<SplineData> for CubicSpline {
    type Error = Error;
    fn try_from(d: SplineData) -> Result<Self> {
        CubicSpline::new(d.x, d.y)
    }
}

impl From<CubicSpline> for SplineData {
    fn from(s: CubicSpline) -> Self {
        SplineData { x: s.x, y: s.y }
    }
}

impl CubicSpline {
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        let n = x.len();
        if n != y.len() {
            return Err(Error::GridMismatch(format!("{} abscissae but {} values", n, y.len())));
        }
        if n < 3 {
            return Err(Error::InvalidParams("a cubic spline needs at least 3 knots".into()));
        }
        if x.iter().chain(&y).any(|v| !v.is_finite()) {
            return Err(Error::InvalidParams("spline data must be finite".into()));
        }
        if x.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidParams("spline knots must be strictly increasing".into()));
        }
        // Thomas algorithm for the natural end conditions m[0] = m[n-1] = 0.
        let mut m = vec![0.0; n];
        let mut c = vec![0.0; n];
        let mut d = vec![0.0; n];
        for i in 1..n - 1 {
            let h0 = x[i] - x[i - 1];
            let h1 = x[i + 1] - x[i];
            let rhs = 6.0 * ((y[i + 1] - y[i]) / h1 - (y[i] - y[i - 1]) / h0);
            let diag = 2.0 * (h0 + h1) - h0 * c[i - 1];
            c[i] = h1 / diag;
            d[i] = (rhs - h0 * d[i - 1]) / diag;
        }
        for i in (1..n - 1).rev() {
            m[i] = d[i] - c[i] * m[i + 1];
        }
        Ok(CubicSpline { x, y, m })
    }

    pub fn knots(&self) -> &[f64] {
        &self.x
    }

    pub fn values(&self) -> &[f64] {
        &self.y
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.x[0], self.x[self.x.len() - 1])
    }

    fn segment(&self, t: f64) -> usize {
        let n = self.x.len();
        match self.x.partition_point(|&k| k <= t) {
            0 => 0,
            i if i >= n => n - 2,
            i => i - 1,
        }
    }

    /// Value, first and second derivative. Outside the knots the end cubics are extended.
    pub fn eval(&self, t: f64) -> (f64, f64, f64) {
        let i = self.segment(t);
        let h = self.x[i + 1] - self.x[i];
        let a = (self.x[i + 1] - t) / h;
        let b = (t - self.x[i]) / h;
        let (mi, mj) = (self.m[i], self.m[i + 1]);
        let v = a * self.y[i] + b * self.y[i + 1] + ((a * a * a - a) * mi + (b * b * b - b) * mj) * h * h / 6.0;
        let d1 = (self.y[i + 1] - self.y[i]) / h - (3.0 * a * a - 1.0) * h * mi / 6.0 + (3.0 * b * b - 1.0) * h * mj / 6.0;
        let d2 = a * mi + b * mj;
        (v, d1, d2)
    }

    pub fn value(&self, t: f64) -> f64 {
        self.eval(t).0
    }
}
