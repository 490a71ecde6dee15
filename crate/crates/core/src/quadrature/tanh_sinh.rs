//! Double-exponential quadrature for integrable endpoint singularities.

use std::f64::consts::FRAC_PI_2;

use super::QuadConfig;
use crate::error::{Error, Result};

/// Abscissa handed to the integrand together with its exact distances to both endpoints,
/// so integrands like 1/sqrt(b - x) stay accurate next to the endpoint.
#[derive(Clone, Copy, Debug)]
pub struct ImproperPoint {
    pub x: f64,
    pub from_left: f64,
    pub from_right: f64,
}

const T_MAX: f64 = 4.0;
const MAX_LEVEL: usize = 12;

/// Integrates `f` over (a, b) with tanh-sinh nodes; returns (value, error estimate).
pub fn tanh_sinh<F>(mut f: F, a: f64, b: f64, cfg: &QuadConfig) -> Result<(f64, f64)>
where
    F: FnMut(ImproperPoint) -> f64,
{
    if !(a < b) {
        return Err(Error::InvalidParameters(format!("tanh_sinh needs a < b, got {a}, {b}")));
    }
    let h = 0.5 * (b - a);
    let mut node = |t: f64| -> Result<f64> {
        let u = FRAC_PI_2 * t.sinh();
        let e = (-2.0 * u.abs()).exp();
        // distances to the endpoints computed without cancellation
        let near = 2.0 * h * e / (1.0 + e);
        let far = 2.0 * h / (1.0 + e);
        let (dl, dr) = if u < 0.0 { (near, far) } else { (far, near) };
        if dl <= 0.0 || dr <= 0.0 {
            return Ok(0.0);
        }
        let x = if u < 0.0 { a + dl } else { b - dr };
        let cu = 0.5 * (u.exp() + (-u).exp());
        let w = h * FRAC_PI_2 * t.cosh() / (cu * cu);
        let v = f(ImproperPoint { x, from_left: dl, from_right: dr });
        if !v.is_finite() {
            return Err(Error::NonConvergent(format!("non-finite integrand at x={x}")));
        }
        Ok(w * v)
    };
    let mut step = 1.0;
    let mut sum = node(0.0)?;
    let mut j = 1;
    while j as f64 * step <= T_MAX {
        let t = j as f64 * step;
        sum += node(t)? + node(-t)?;
        j += 1;
    }
    let mut prev = sum * step;
    for level in 1..=MAX_LEVEL {
        step *= 0.5;
        let mut k = 1;
        while k as f64 * step <= T_MAX {
            let t = k as f64 * step;
            sum += node(t)? + node(-t)?;
            k += 2;
        }
        let cur = sum * step;
        let err = (cur - prev).abs();
        if level >= 3 && (err <= cfg.abs_tol.max(cfg.rel_tol * cur.abs()) || err == 0.0) {
            return Ok((cur, err));
        }
        prev = cur;
    }
    Err(Error::NonConvergent(format!("tanh-sinh did not settle on ({a}, {b})")))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> QuadConfig {
        QuadConfig { abs_tol: 1e-14, rel_tol: 1e-12, ..Default::default() }
    }

    #[test]
    fn inverse_sqrt_at_left_endpoint() {
        let (v, _) = tanh_sinh(|p| 1.0 / p.from_left.sqrt(), 0.0, 1.0, &cfg()).unwrap();
        assert!((v - 2.0).abs() < 1e-12, "{v}");
    }

    #[test]
    fn arcsine_density() {
        let (v, _) =
            tanh_sinh(|p| 1.0 / (p.from_left * p.from_right).sqrt(), 0.0, 1.0, &cfg()).unwrap();
        assert!((v - std::f64::consts::PI).abs() < 1e-12, "{v}");
    }

    #[test]
    fn smooth_integrand() {
        let (v, _) = tanh_sinh(|p| p.x.exp(), -1.0, 2.0, &cfg()).unwrap();
        assert!((v - (2f64.exp() - (-1f64).exp())).abs() < 1e-12);
    }
}
