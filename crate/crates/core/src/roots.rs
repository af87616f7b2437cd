//! Scalar root finding: Brent's method, plain bisection and grid scans.

use crate::error::{Error, Result};

pub const MAX_ITER: usize = 200;

/// Brent's method on a sign-changing bracket `[a, b]`.
pub fn brent<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, xtol: f64) -> Result<f64> {
    let (mut a, mut b) = (a, b);
    let mut fa = f(a);
    let mut fb = f(b);
    brent_with_values(&mut f, &mut a, &mut b, &mut fa, &mut fb, xtol)
}

/// Brent's method reusing already-known endpoint values.
pub fn brent_known<F: FnMut(f64) -> f64>(mut f: F, a: f64, fa: f64, b: f64, fb: f64, xtol: f64) -> Result<f64> {
    let (mut a, mut b, mut fa, mut fb) = (a, b, fa, fb);
    brent_with_values(&mut f, &mut a, &mut b, &mut fa, &mut fb, xtol)
}

fn brent_with_values<F: FnMut(f64) -> f64>(f: &mut F, a: &mut f64, b: &mut f64, fa: &mut f64, fb: &mut f64, xtol: f64) -> Result<f64> {
    if *fa == 0.0 {
        return Ok(*a);
    }
    if *fb == 0.0 {
        return Ok(*b);
    }
    if !(fa.is_finite() && fb.is_finite()) {
        return Err(Error::NoConvergence("non-finite function value at bracket end".into()));
    }
    if fa.signum() == fb.signum() {
        return Err(Error::NoBracket(format!("f({a}) = {fa:e} and f({b}) = {fb:e} share a sign")));
    }
    let (mut c, mut fc) = (*a, *fa);
    let mut d = *b - *a;
    let mut e = d;
    for _ in 0..MAX_ITER {
        if fb.signum() == fc.signum() {
            c = *a;
            fc = *fa;
            d = *b - *a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            *a = *b;
            *b = c;
            c = *a;
            *fa = *fb;
            *fb = fc;
            fc = *fa;
        }
        let tol = 2.0 * f64::EPSILON * b.abs() + 0.5 * xtol;
        let m = 0.5 * (c - *b);
        if m.abs() <= tol || *fb == 0.0 {
            return Ok(*b);
        }
        if e.abs() >= tol && fa.abs() > fb.abs() {
            let s = *fb / *fa;
            let (mut p, mut q);
            if *a == c {
                p = 2.0 * m * s;
                q = 1.0 - s;
            } else {
                let qq = *fa / fc;
                let r = *fb / fc;
                p = s * (2.0 * m * qq * (qq - r) - (*b - *a) * (r - 1.0));
                q = (qq - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            } else {
                p = -p;
            }
            if 2.0 * p < (3.0 * m * q - (tol * q).abs()).min((e * q).abs()) {
                e = d;
                d = p / q;
            } else {
                d = m;
                e = m;
            }
        } else {
            d = m;
            e = m;
        }
        *a = *b;
        *fa = *fb;
        *b += if d.abs() > tol { d } else { tol.copysign(m) };
        *fb = f(*b);
        if !fb.is_finite() {
            return Err(Error::NoConvergence(format!("non-finite function value at {b}")));
        }
    }
    Err(Error::NoConvergence(format!("Brent did not converge in {MAX_ITER} iterations")))
}

/// Bisection until the bracket is narrower than `xtol` or |f| < `ftol`.
pub fn bisect<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, xtol: f64, ftol: f64) -> Result<f64> {
    let (mut lo, mut hi) = (a, b);
    let mut flo = f(lo);
    let fhi = f(hi);
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    if flo.signum() == fhi.signum() {
        return Err(Error::NoBracket(format!("f({a}) and f({b}) share a sign")));
    }
    for _ in 0..MAX_ITER {
        let mid = 0.5 * (lo + hi);
        let fm = f(mid);
        if fm.abs() < ftol || (hi - lo).abs() <= xtol || mid == lo || mid == hi {
            return Ok(mid);
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Uniform grid of `n + 1` nodes spanning `[lo, hi]`.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..=n).map(|i| lo + (hi - lo) * i as f64 / n as f64).collect()
}

/// Brackets where consecutive sampled values change sign.
/// A sample that is exactly zero is reported as a degenerate bracket `(x, x)`.
pub fn sign_change_brackets(xs: &[f64], ys: &[f64]) -> Vec<(f64, f64, f64, f64)> {
    let mut out = Vec::new();
    for i in 0..xs.len() {
        if ys[i] == 0.0 {
            out.push((xs[i], ys[i], xs[i], ys[i]));
            continue;
        }
        if i + 1 < xs.len() && ys[i + 1] != 0.0 && ys[i].is_finite() && ys[i + 1].is_finite() && ys[i].signum() != ys[i + 1].signum() {
            out.push((xs[i], ys[i], xs[i + 1], ys[i + 1]));
        }
    }
    out
}
