//! Contour integrals along surface paths, Cauchy derivatives and Laurent coefficients.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{gk_adaptive_batched, CValue, QuadConfig, QuadResult};
use crate::domain::{Domain, PathSpec, SurfacePoint};
use crate::error::Result;
use crate::linalg::CVec3;

/// Integrates `f(P) dz` along `path`, continuing the fiber coordinate on the elliptic curve.
pub fn integrate_contour<T, F>(
    domain: &Domain,
    path: &PathSpec,
    f: F,
    cfg: &QuadConfig,
) -> Result<QuadResult<T>>
where
    T: CValue,
    F: Fn(&SurfacePoint) -> T,
{
    let segs = path.resolve(domain, cfg.clearance)?;
    let intervals = vec![(0.0, 1.0); segs.len()];
    gk_adaptive_batched(
        &intervals,
        |idx, xs| {
            let seg = &segs[idx];
            Ok(xs.map(|s| f(&seg.point_at(domain, s)).cmul(seg.dz)))
        },
        cfg.abs_tol,
        cfg.rel_tol,
        cfg.max_subdivisions,
    )
}

/// f'(z0) from the trapezoid rule on |z - z0| = r; f must be holomorphic on the closed disc.
pub fn cauchy_derivative<F>(f: F, z0: Complex64, r: f64, n: usize) -> CVec3
where
    F: Fn(Complex64) -> CVec3,
{
    let mut acc = CVec3::zeros();
    for k in 0..n {
        let e = Complex64::from_polar(1.0, std::f64::consts::TAU * k as f64 / n as f64);
        let v = f(z0 + e * r);
        acc += v.map(|c| c * e.conj());
    }
    acc.map(|c| c / (r * n as f64))
}

/// Laurent coefficients c_k, k in [k_min, k_max], of a function holomorphic on 0 < |t| <= r' (r' > r).
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LaurentTable {
    pub radius: f64,
    pub k_min: i32,
    pub coeffs: Vec<CVec3>,
}

impl LaurentTable {
    pub fn coeff(&self, k: i32) -> CVec3 {
        let idx = k - self.k_min;
        if idx < 0 || idx as usize >= self.coeffs.len() {
            CVec3::zeros()
        } else {
            self.coeffs[idx as usize]
        }
    }

    pub fn k_max(&self) -> i32 {
        self.k_min + self.coeffs.len() as i32 - 1
    }

    /// Magnitude below which a coefficient counts as zero: `rel` times the largest
    /// contribution |c_k| r^k over the table.
    pub fn noise_floor(&self, rel: f64) -> f64 {
        let mut m: f64 = 0.0;
        for (i, c) in self.coeffs.iter().enumerate() {
            let k = self.k_min + i as i32;
            for j in 0..3 {
                m = m.max(c[j].norm() * self.radius.powi(k));
            }
        }
        rel * m
    }

    pub fn is_zero(&self, k: i32, j: usize, rel: f64) -> bool {
        self.coeff(k)[j].norm() * self.radius.powi(k) <= self.noise_floor(rel)
    }

    /// Pole order of component j (negative for a zero, None if the component vanishes).
    pub fn order(&self, j: usize, rel: f64) -> Option<i32> {
        (self.k_min..=self.k_max()).find(|&k| !self.is_zero(k, j, rel)).map(|k| -k)
    }
}

/// Trapezoid rule on |t| = r with `n` nodes.
pub fn laurent_coefficients<F>(f: F, r: f64, k_min: i32, k_max: i32, n: usize) -> LaurentTable
where
    F: Fn(Complex64) -> CVec3,
{
    let samples: Vec<(Complex64, CVec3)> = (0..n)
        .map(|j| {
            let e = Complex64::from_polar(1.0, std::f64::consts::TAU * j as f64 / n as f64);
            (e, f(e * r))
        })
        .collect();
    let coeffs = (k_min..=k_max)
        .map(|k| {
            let mut acc = CVec3::zeros();
            for (e, v) in &samples {
                let w = e.powi(-k) * r.powi(-k);
                acc += v.map(|c| c * w);
            }
            acc.map(|c| c / n as f64)
        })
        .collect();
    LaurentTable { radius: r, k_min, coeffs }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::cvec;

    const I: Complex64 = Complex64::new(0.0, 1.0);

    #[test]
    fn contour_residue() {
        let d = Domain::PuncturedPlane { punctures: vec![Complex64::new(0.0, 0.0)] };
        let path = PathSpec::circle(&d, Complex64::new(0.0, 0.0), 1.0, 16, 1).unwrap();
        let r = integrate_contour(&d, &path, |p| p.z.inv(), &QuadConfig::default()).unwrap();
        assert!((r.value - 2.0 * std::f64::consts::PI * I).norm() < 1e-10);
    }

    #[test]
    fn derivative_of_exp() {
        let f = |z: Complex64| cvec(z.exp(), z * z, z.inv());
        let z0 = Complex64::new(0.3, -0.2);
        let d = cauchy_derivative(f, z0, 0.1, 64);
        assert!((d[0] - z0.exp()).norm() < 1e-13);
        assert!((d[1] - 2.0 * z0).norm() < 1e-13);
        assert!((d[2] + (z0 * z0).inv()).norm() < 1e-11);
    }

    #[test]
    fn laurent_of_catenoid_component() {
        // 1/t^2 + 2/t + 0.5
        let f = |t: Complex64| cvec((t * t).inv() + 2.0 * t.inv() + 0.5, t.inv(), I * t * t);
        let tab = laurent_coefficients(f, 0.5, -6, 6, 128);
        assert!((tab.coeff(-2)[0] - 1.0).norm() < 1e-13);
        assert!((tab.coeff(-1)[0] - 2.0).norm() < 1e-13);
        assert!((tab.coeff(0)[0] - 0.5).norm() < 1e-13);
        assert_eq!(tab.order(0, 1e-8), Some(2));
        assert_eq!(tab.order(1, 1e-8), Some(1));
        assert_eq!(tab.order(2, 1e-8), Some(-2));
    }
}
