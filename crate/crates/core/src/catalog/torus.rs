//! The catenoidal torus on w^2 = (z-a)(az-1)/z and its period problem in b.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::domain::{Domain, PathSpec, SurfacePoint};
use crate::error::{Error, Result};
use crate::linalg::{cvec, CVec3};
use crate::quadrature::{brent_root, integrate_contour, tanh_sinh, QuadConfig};

const I: Complex64 = Complex64::new(0.0, 1.0);

pub fn torus_phi(b: f64, p: &SurfacePoint) -> CVec3 {
    let z = p.z;
    let w = p.w.expect("torus point without fiber coordinate");
    let z2w = z * z * w;
    cvec(I * (z * z - 1.0) / z2w, (z * z + b * z + 1.0) / z2w, z.inv())
}

pub fn torus_dphi(a: f64, b: f64, p: &SurfacePoint) -> CVec3 {
    let z = p.z;
    let w = p.w.expect("torus point without fiber coordinate");
    let zi = z.inv();
    let f = a * z - (1.0 + a * a) + a * zi;
    let fp = a - a * zi * zi;
    // w'/w = F'/(2F)
    let lw = fp / (2.0 * f);
    let u1 = I * (1.0 - zi * zi);
    let u2 = 1.0 + b * zi + zi * zi;
    cvec(
        (I * 2.0 * zi * zi * zi - u1 * lw) / w,
        ((-b * zi * zi - 2.0 * zi * zi * zi) - u2 * lw) / w,
        -zi * zi,
    )
}

fn gamma1_delta(a: f64) -> f64 {
    0.5 * a.min(1.0 / a - a)
}

/// Lift of a circle around the slit [0, a].
pub fn gamma1(a: f64) -> Result<PathSpec> {
    let d = Domain::EllipticCurve { a };
    PathSpec::circle(&d, Complex64::new(0.5 * a, 0.0), 0.5 * a + gamma1_delta(a), 256, 1)
}

/// Lift of a circle around [a, 1/a].
pub fn gamma2(a: f64) -> Result<PathSpec> {
    let d = Domain::EllipticCurve { a };
    let c = 0.5 * (a + 1.0 / a);
    PathSpec::circle(&d, Complex64::new(c, 0.0), 0.5 * (1.0 / a - a) + 0.5 * a, 512, 1)
}

/// Loop around the end over z = 0: a small circle traversed twice.
pub fn end_loop_zero(a: f64) -> Result<PathSpec> {
    let d = Domain::EllipticCurve { a };
    let r = 0.5 * a;
    let n = 128;
    let first = d.lift(Complex64::new(r, 0.0), 1)?;
    let mut pts = vec![first];
    for k in 1..2 * n {
        let th = std::f64::consts::TAU * k as f64 / n as f64;
        pts.push(SurfacePoint { z: Complex64::from_polar(r, th), w: None });
    }
    Ok(PathSpec::new(pts, true))
}

fn tight() -> QuadConfig {
    QuadConfig { abs_tol: 1e-12, rel_tol: 1e-12, ..QuadConfig::default() }
}

/// Re of the gamma_1 period of Phi_2 as a function of b.
pub fn gamma1_period(a: f64, b: f64, cfg: &QuadConfig) -> Result<f64> {
    let d = Domain::EllipticCurve { a };
    let r = integrate_contour(&d, &gamma1(a)?, |p| torus_phi(b, p)[1], cfg)?;
    Ok(r.value.re)
}

pub fn gamma2_period(a: f64, b: f64, cfg: &QuadConfig) -> Result<f64> {
    let d = Domain::EllipticCurve { a };
    let r = integrate_contour(&d, &gamma2(a)?, |p| torus_phi(b, p)[1], cfg)?;
    Ok(r.value.re)
}

/// (int_0^a dz/|w|, int_0^a dz/(z|w|)) by tanh-sinh.
pub fn slit_integrals(a: f64, cfg: &QuadConfig) -> Result<(f64, f64)> {
    // on (0,a): |w|^2 = (a - z)(1 - a z)/z
    let (j1, _) = tanh_sinh(
        |p| (p.x / (p.from_right * (1.0 - a * p.x))).sqrt(),
        0.0,
        a,
        cfg,
    )?;
    let (j2, _) = tanh_sinh(
        |p| 1.0 / (p.from_left * p.from_right * (1.0 - a * p.x)).sqrt(),
        0.0,
        a,
        cfg,
    )?;
    Ok((j1, j2))
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct TorusPeriods {
    pub a: f64,
    pub b: f64,
    /// |Re int_{gamma_1} Phi_2| at b.
    pub gamma1_residual: f64,
    /// |Re int_{gamma_2} Phi_2| at b.
    pub gamma2_real: f64,
    pub j1: f64,
    pub j2: f64,
    /// -2 j1 / j2.
    pub ratio_b: f64,
    /// -2 j2 / j1.
    pub inverse_ratio_b: f64,
}

/// The unique b in (-2, 0) for which Phi_2 has no real periods, by Brent's method on the
/// gamma_1 period over [-2, 0].
pub fn torus_period_b(a: f64, cfg: &QuadConfig) -> Result<TorusPeriods> {
    if !(a > 0.0 && a < 1.0) {
        return Err(Error::InvalidParameters(format!("torus needs a in (0,1), got {a}")));
    }
    let qc = tight().min_with(cfg);
    // both periods grow like 1/a, and so does the attainable absolute error
    let qc = QuadConfig { abs_tol: qc.abs_tol / a, ..qc };
    let b =brent_root(|b| gamma1_period(a, b, &qc), -2.0, 0.0, 1e-15, 200)?;
    let gamma1_residual = gamma1_period(a, b, &qc)?.abs();
    let gamma2_real = gamma2_period(a, b, &qc)?.abs();
    let (j1, j2) = slit_integrals(a, &qc)?;
    Ok(TorusPeriods {
        a,
        b,
        gamma1_residual,
        gamma2_real,
        j1,
        j2,
        ratio_b: -2.0 * j1 / j2,
        inverse_ratio_b: -2.0 * j2 / j1,
    })
}
