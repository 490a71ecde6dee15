//! Numerical integration: adaptive Gauss-Kronrod, tanh-sinh, surface cubature,
//! contour rules for derivatives and Laurent coefficients, root finding.

mod contour;
mod gk;
mod optimize;
mod surface;
mod tanh_sinh;

pub use contour::{cauchy_derivative, integrate_contour, laurent_coefficients, LaurentTable};
pub use gk::{gk_adaptive, gk_adaptive_batched, QuadResult};
pub use optimize::{brent_root, nelder_mead_2d};
pub use surface::{integrate_surface, integrate_surface_with, SurfacePlan, SurfaceResult};
pub use tanh_sinh::{tanh_sinh, ImproperPoint};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::linalg::CVec3;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct QuadConfig {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_subdivisions: usize,
    /// Radius factor between consecutive tail slabs of a surface integral.
    pub tail_radius_growth: f64,
    /// Minimal distance between an integration contour and a singular point.
    pub clearance: f64,
}

impl Default for QuadConfig {
    fn default() -> Self {
        QuadConfig {
            abs_tol: 1e-10,
            rel_tol: 1e-8,
            max_subdivisions: 1 << 16,
            tail_radius_growth: 2.0,
            clearance: 1e-2,
        }
    }
}

impl QuadConfig {
    pub fn validate(&self) -> crate::Result<()> {
        let ok = self.abs_tol > 0.0
            && self.rel_tol > 0.0
            && self.max_subdivisions >= 1
            && self.tail_radius_growth > 1.0
            && self.clearance >= 0.0;
        if ok {
            Ok(())
        } else {
            Err(crate::Error::InvalidParameters(format!("bad quadrature config {self:?}")))
        }
    }

    /// Tolerances no looser than `other`'s.
    pub fn min_with(&self, other: &QuadConfig) -> QuadConfig {
        QuadConfig {
            abs_tol: self.abs_tol.min(other.abs_tol),
            rel_tol: self.rel_tol.min(other.rel_tol),
            max_subdivisions: self.max_subdivisions.max(other.max_subdivisions),
            tail_radius_growth: other.tail_radius_growth,
            clearance: other.clearance,
        }
    }
}

/// Values that can be accumulated by the quadrature rules.
pub trait QValue: Copy + Send + Sync + 'static {
    fn zero() -> Self;
    fn add(self, o: Self) -> Self;
    fn scale(self, s: f64) -> Self;
    fn mag(&self) -> f64;
    fn is_finite(&self) -> bool;
}

/// Values that can also be multiplied by a complex number (contour integrands).
pub trait CValue: QValue {
    fn cmul(self, c: Complex64) -> Self;
}

impl QValue for f64 {
    fn zero() -> Self {
        0.0
    }
    fn add(self, o: Self) -> Self {
        self + o
    }
    fn scale(self, s: f64) -> Self {
        self * s
    }
    fn mag(&self) -> f64 {
        self.abs()
    }
    fn is_finite(&self) -> bool {
        f64::is_finite(*self)
    }
}

impl QValue for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn add(self, o: Self) -> Self {
        self + o
    }
    fn scale(self, s: f64) -> Self {
        self * s
    }
    fn mag(&self) -> f64 {
        self.norm()
    }
    fn is_finite(&self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }
}

impl CValue for Complex64 {
    fn cmul(self, c: Complex64) -> Self {
        self * c
    }
}

impl QValue for CVec3 {
    fn zero() -> Self {
        CVec3::zeros()
    }
    fn add(self, o: Self) -> Self {
        self + o
    }
    fn scale(self, s: f64) -> Self {
        self.map(|c| c * s)
    }
    fn mag(&self) -> f64 {
        crate::linalg::max_abs_c(self)
    }
    fn is_finite(&self) -> bool {
        self.iter().all(|c| c.re.is_finite() && c.im.is_finite())
    }
}

impl CValue for CVec3 {
    fn cmul(self, c: Complex64) -> Self {
        self.map(|x| x * c)
    }
}

impl<const N: usize> QValue for [f64; N] {
    fn zero() -> Self {
        [0.0; N]
    }
    fn add(self, o: Self) -> Self {
        let mut r = self;
        for (x, y) in r.iter_mut().zip(o) {
            *x += y;
        }
        r
    }
    fn scale(self, s: f64) -> Self {
        self.map(|x| x * s)
    }
    fn mag(&self) -> f64 {
        self.iter().fold(0.0, |m, x| m.max(x.abs()))
    }
    fn is_finite(&self) -> bool {
        self.iter().all(|x| x.is_finite())
    }
}
