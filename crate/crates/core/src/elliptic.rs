//! Legendre elliptic integrals and the Jacobi amplitude, parameter convention `m = k²`.

use crate::error::{Error, Result};
use std::f64::consts::{FRAC_PI_2, PI};

/// Carlson's symmetric integral R_F(x, y, z); at most one argument may vanish.
pub fn carlson_rf(x: f64, y: f64, z: f64) -> Result<f64> {
    let clamp = |v: f64| if v < 0.0 && v > -1e-14 { 0.0 } else { v };
    let (mut x, mut y, mut z) = (clamp(x), clamp(y), clamp(z));
    if x < 0.0 || y < 0.0 || z < 0.0 || !(x.is_finite() && y.is_finite() && z.is_finite()) {
        return Err(Error::DomainError(format!("R_F({x}, {y}, {z}) needs non-negative arguments")));
    }
    let zeros = [x, y, z].iter().filter(|v| **v == 0.0).count();
    if zeros > 1 {
        return Err(Error::DomainError("R_F diverges when two arguments vanish".into()));
    }
    let a0 = (x + y + z) / 3.0;
    let mut a = a0;
    let mut q = (3.0 * f64::EPSILON).powf(-1.0 / 6.0) * (a0 - x).abs().max((a0 - y).abs()).max((a0 - z).abs());
    let (x0, y0) = (x, y);
    let mut pow4 = 1.0;
    for _ in 0..100 {
        if q < a.abs() {
            break;
        }
        let (sx, sy, sz) = (x.sqrt(), y.sqrt(), z.sqrt());
        let lam = sx * sy + sy * sz + sz * sx;
        x = 0.25 * (x + lam);
        y = 0.25 * (y + lam);
        z = 0.25 * (z + lam);
        a = 0.25 * (a + lam);
        q *= 0.25;
        pow4 *= 0.25;
    }
    let xx = (a0 - x0) * pow4 / a;
    let yy = (a0 - y0) * pow4 / a;
    let zz = -xx - yy;
    let e2 = xx * yy - zz * zz;
    let e3 = xx * yy * zz;
    Ok((1.0 - e2 / 10.0 + e3 / 14.0 + e2 * e2 / 24.0 - 3.0 * e2 * e3 / 44.0) / a.sqrt())
}

/// Complete integral K(m) for m < 1 via the arithmetic-geometric mean.
pub fn ellip_k(m: f64) -> Result<f64> {
    if !(m < 1.0) || !m.is_finite() {
        return Err(Error::DomainError(format!("K(m) requires m < 1, got {m}")));
    }
    let mut a = 1.0;
    let mut g = (1.0 - m).sqrt();
    for _ in 0..64 {
        if (a - g).abs() <= 1e-16 * a {
            break;
        }
        let an = 0.5 * (a + g);
        g = (a * g).sqrt();
        a = an;
    }
    Ok(PI / (2.0 * a))
}

/// Incomplete integral F(φ | m).
///
/// For m ≤ 1 any real φ is allowed (m = 1 needs |φ| < π/2). For m > 1 the real branch
/// requires m sin²φ ≤ 1; at equality the value is K(1/m)/√m.
pub fn ellip_f(phi: f64, m: f64) -> Result<f64> {
    if !phi.is_finite() || !m.is_finite() {
        return Err(Error::DomainError("non-finite argument".into()));
    }
    if m > 1.0 {
        let s = phi.sin();
        let lim = (1.0 / m.sqrt()).asin();
        if phi.abs() > FRAC_PI_2 || m * s * s > 1.0 + 1e-14 {
            return Err(Error::DomainError(format!("F(φ|m) with m = {m} needs |sin φ| ≤ 1/√m (|φ| ≤ {lim})")));
        }
        if m * s * s >= 1.0 - 1e-15 {
            return Ok(phi.signum() * ellip_k(1.0 / m)? / m.sqrt());
        }
        return Ok(s * carlson_rf(phi.cos().powi(2), 1.0 - m * s * s, 1.0)?);
    }
    if m == 1.0 {
        if phi.abs() >= FRAC_PI_2 {
            return Err(Error::DomainError("F(φ|1) diverges at |φ| = π/2".into()));
        }
        return Ok(phi.sin().atanh());
    }
    // periodic reduction: F(jπ + r) = 2jK + F(r), |r| ≤ π/2
    let j = (phi / PI).round();
    let r = phi - j * PI;
    let s = r.sin();
    let fr = s * carlson_rf(r.cos().powi(2), 1.0 - m * s * s, 1.0)?;
    if j == 0.0 {
        Ok(fr)
    } else {
        Ok(2.0 * j * ellip_k(m)? + fr)
    }
}

/// Jacobi amplitude: the φ with F(φ | m) = u, for m < 1.
pub fn jacobi_am(u: f64, m: f64) -> Result<f64> {
    if !u.is_finite() {
        return Err(Error::DomainError("non-finite argument".into()));
    }
    let k = ellip_k(m)?;
    let j = (u / (2.0 * k)).round();
    let r = u - 2.0 * j * k;
    // F is strictly increasing on [-π/2, π/2] with F(±π/2) = ±K, so r ∈ [-K, K] has a unique preimage.
    let (mut lo, mut hi) = (-FRAC_PI_2, FRAC_PI_2);
    let mut phi = if m.abs() < 0.9 { r / k * FRAC_PI_2 } else { r.tanh().asin().clamp(lo, hi) };
    for _ in 0..100 {
        let g = ellip_f(phi, m)? - r;
        if g.abs() < 1e-16 * (1.0 + r.abs()) {
            break;
        }
        if g > 0.0 {
            hi = phi;
        } else {
            lo = phi;
        }
        let dn = (1.0 - m * phi.sin().powi(2)).sqrt();
        let mut next = phi - g * dn;
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        if (next - phi).abs() <= 1e-16 * (1.0 + phi.abs()) {
            phi = next;
            break;
        }
        phi = next;
    }
    Ok(phi + j * PI)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn known_values() {
        // K(1/2) = Γ(1/4)² / (4√π)
        assert!((ellip_k(0.5).unwrap() - 1.854_074_677_301_372).abs() < 1e-14);
        assert!((ellip_k(0.0).unwrap() - FRAC_PI_2).abs() < 1e-15);
        assert!((ellip_f(FRAC_PI_2, 0.5).unwrap() - ellip_k(0.5).unwrap()).abs() < 1e-14);
        assert!((ellip_f(0.7, 0.0).unwrap() - 0.7).abs() < 1e-15);
        assert!((ellip_f(0.7, 1.0).unwrap() - (0.7f64.tan() + 1.0 / 0.7f64.cos()).ln()).abs() < 1e-13);
    }

    #[test]
    fn negative_parameter() {
        // K(-1) = Γ(1/4)² / (4√(2π))
        assert!((ellip_k(-1.0).unwrap() - 1.311_028_777_146_059_9).abs() < 1e-14);
    }

    #[test]
    fn reciprocal_modulus_limit() {
        let m: f64 = 2.0 / 1.7;
        let phi_max = (1.0 / m.sqrt()).asin();
        let at_edge = ellip_f(phi_max, m).unwrap();
        let expected = ellip_k(1.0 / m).unwrap() / m.sqrt();
        assert!((at_edge - expected).abs() < 1e-12);
        let near = ellip_f(phi_max * (1.0 - 1e-12), m).unwrap();
        assert!((near - expected).abs() < 1e-5);
        assert!(ellip_f(phi_max + 1e-3, m).is_err());
    }

    #[test]
    fn periodic_reduction() {
        let m = 0.8;
        let k = ellip_k(m).unwrap();
        for &phi in &[0.3, 2.0, 4.5, -7.0] {
            let a = ellip_f(phi + PI, m).unwrap();
            let b = ellip_f(phi, m).unwrap() + 2.0 * k;
            assert!((a - b).abs() < 1e-13);
        }
    }

    #[test]
    fn amplitude_inverts_f() {
        for &m in &[-3.0, 0.0, 0.3, 0.99, 0.999999] {
            for i in -20..=20 {
                let phi = i as f64 * 0.37;
                let u = ellip_f(phi, m).unwrap();
                let back = jacobi_am(u, m).unwrap();
                assert!((back - phi).abs() < 1e-12, "m = {m}, φ = {phi}: {back}");
            }
        }
    }

    #[test]
    fn domain_errors() {
        assert!(ellip_k(1.0).is_err());
        assert!(jacobi_am(1.0, 1.5).is_err());
        assert!(carlson_rf(0.0, 0.0, 1.0).is_err());
        assert!(carlson_rf(-1.0, 1.0, 1.0).is_err());
    }
}
