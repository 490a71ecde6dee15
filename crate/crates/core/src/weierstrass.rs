//! Weierstrass data Phi = (phi_1, phi_2, phi_3) dz and the harmonic immersion X = Re int Phi.

use nalgebra::Matrix3;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::sync::Arc;

use crate::domain::{Domain, EndChart, PathSpec, SurfacePoint};
use crate::error::{Error, Result};
use crate::linalg::{apply, bilinear, herm_sq, im, re, CVec3, Vec3};
use crate::quadrature::{cauchy_derivative, integrate_contour, nelder_mead_2d, LaurentTable, QuadConfig};

/// Coefficient functions of the three holomorphic 1-forms in the z-chart.
pub trait Forms: Send + Sync {
    fn phi(&self, p: &SurfacePoint) -> CVec3;

    /// d phi / dz when known in closed form.
    fn dphi(&self, _p: &SurfacePoint) -> Option<CVec3> {
        None
    }
}

type PhiFn = dyn Fn(&SurfacePoint) -> CVec3 + Send + Sync;

/// Forms given by closures.
pub struct ClosureForms {
    phi: Box<PhiFn>,
    dphi: Option<Box<PhiFn>>,
}

impl Forms for ClosureForms {
    fn phi(&self, p: &SurfacePoint) -> CVec3 {
        (self.phi)(p)
    }
    fn dphi(&self, p: &SurfacePoint) -> Option<CVec3> {
        self.dphi.as_ref().map(|d| d(p))
    }
}

struct LinearForms {
    inner: Arc<dyn Forms>,
    m: Matrix3<f64>,
}

impl Forms for LinearForms {
    fn phi(&self, p: &SurfacePoint) -> CVec3 {
        apply(&self.m, &self.inner.phi(p))
    }
    fn dphi(&self, p: &SurfacePoint) -> Option<CVec3> {
        self.inner.dphi(p).map(|d| apply(&self.m, &d))
    }
}

#[derive(Clone)]
pub struct WeierstrassData {
    pub domain: Domain,
    pub forms: Arc<dyn Forms>,
    /// Exact Laurent tables at some ends, when the caller knows them.
    pub laurent: Vec<(EndChart, LaurentTable)>,
    pub label: String,
}

impl std::fmt::Debug for WeierstrassData {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("WeierstrassData")
            .field("label", &self.label)
            .field("domain", &self.domain)
            .finish()
    }
}

impl WeierstrassData {
    pub fn new(domain: Domain, forms: Arc<dyn Forms>, label: impl Into<String>) -> Self {
        WeierstrassData { domain, forms, laurent: Vec::new(), label: label.into() }
    }

    pub fn from_fn<F>(domain: Domain, label: impl Into<String>, phi: F) -> Self
    where
        F: Fn(&SurfacePoint) -> CVec3 + Send + Sync + 'static,
    {
        Self::new(domain, Arc::new(ClosureForms { phi: Box::new(phi), dphi: None }), label)
    }

    pub fn from_fns<F, G>(domain: Domain, label: impl Into<String>, phi: F, dphi: G) -> Self
    where
        F: Fn(&SurfacePoint) -> CVec3 + Send + Sync + 'static,
        G: Fn(&SurfacePoint) -> CVec3 + Send + Sync + 'static,
    {
        let forms = ClosureForms { phi: Box::new(phi), dphi: Some(Box::new(dphi)) };
        Self::new(domain, Arc::new(forms), label)
    }

    /// phi without the domain check.
    pub fn phi(&self, p: &SurfacePoint) -> CVec3 {
        self.forms.phi(p)
    }

    /// d phi/dz: closed form when available, otherwise a Cauchy integral on a circle of radius
    /// min(half the distance to the nearest singular point, 0.1).
    pub fn dphi(&self, p: &SurfacePoint) -> CVec3 {
        if let Some(d) = self.forms.dphi(p) {
            return d;
        }
        let r = (0.5 * self.domain.singular_distance(p.z)).min(0.1);
        cauchy_derivative(|z| self.forms.phi(&self.domain.continue_to(p, z)), p.z, r, 64)
    }

    /// Data of the immersion M X for a real linear map M.
    pub fn transformed(&self, m: &Matrix3<f64>) -> WeierstrassData {
        let forms = LinearForms { inner: self.forms.clone(), m: *m };
        let laurent = self
            .laurent
            .iter()
            .map(|(c, t)| {
                let coeffs = t.coeffs.iter().map(|v| apply(m, v)).collect();
                (*c, LaurentTable { radius: t.radius, k_min: t.k_min, coeffs })
            })
            .collect();
        WeierstrassData {
            domain: self.domain.clone(),
            forms: Arc::new(forms),
            laurent,
            label: self.label.clone(),
        }
    }

    pub fn exact_laurent(&self, chart: &EndChart) -> Option<&LaurentTable> {
        self.laurent.iter().find(|(c, _)| c == chart).map(|(_, t)| t)
    }
}

pub fn eval_phi(wd: &WeierstrassData, p: &SurfacePoint) -> Result<CVec3> {
    if !wd.domain.contains(p) {
        return Err(Error::OutsideDomain(*p));
    }
    Ok(wd.phi(p))
}

/// Hopf coefficient h = sum phi_j^2.
pub fn hopf(wd: &WeierstrassData, p: &SurfacePoint) -> Result<Complex64> {
    let phi = eval_phi(wd, p)?;
    Ok(bilinear(&phi, &phi))
}

/// ||phi||^2 = sum |phi_j|^2.
pub fn klotz_density(wd: &WeierstrassData, p: &SurfacePoint) -> Result<f64> {
    Ok(herm_sq(&eval_phi(wd, p)?))
}

/// ||phi||^2 - |h| from coefficients, evaluated as ||phi ^ conj phi||^2 / (||phi||^2 + |h|)
/// so that values near zero keep their relative accuracy.
pub fn margin_of(phi: &CVec3) -> f64 {
    let n2 = herm_sq(phi);
    let h = bilinear(phi, phi).norm();
    let wedge = 4.0 * re(phi).cross(&im(phi)).norm_squared();
    if n2 + h == 0.0 {
        0.0
    } else {
        wedge / (n2 + h)
    }
}

pub fn immersion_margin(wd: &WeierstrassData, p: &SurfacePoint) -> Result<f64> {
    Ok(margin_of(&eval_phi(wd, p)?))
}

/// Margin divided by ||phi||^2, in [0, 1].
pub fn normalized_margin(phi: &CVec3) -> f64 {
    let n2 = herm_sq(phi);
    if n2 == 0.0 {
        0.0
    } else {
        margin_of(phi) / n2
    }
}

/// Where to look for immersion failures.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Sampler {
    /// z = e^(rho + i theta) on a grid; theta is offset by half a step off the real axis.
    LogPolar { rho: (f64, f64), n_rho: usize, n_theta: usize },
    Rect { re: (f64, f64), im: (f64, f64), nx: usize, ny: usize },
    Points { points: Vec<SurfacePoint> },
    Union { parts: Vec<Sampler> },
}

impl Sampler {
    /// Sample points inside the domain (both sheets on the elliptic curve).
    pub fn points(&self, domain: &Domain) -> Vec<SurfacePoint> {
        let zs: Vec<Complex64> = match self {
            Sampler::LogPolar { rho, n_rho, n_theta } => {
                let mut v = Vec::with_capacity(n_rho * n_theta);
                for i in 0..*n_rho {
                    let r = if *n_rho == 1 {
                        rho.0
                    } else {
                        rho.0 + (rho.1 - rho.0) * i as f64 / (*n_rho - 1) as f64
                    };
                    for j in 0..*n_theta {
                        let th = std::f64::consts::TAU * (j as f64 + 0.5) / *n_theta as f64;
                        v.push(Complex64::from_polar(r.exp(), th));
                    }
                }
                v
            }
            Sampler::Rect { re, im, nx, ny } => {
                let mut v = Vec::with_capacity(nx * ny);
                for i in 0..*nx {
                    for j in 0..*ny {
                        let x = re.0 + (re.1 - re.0) * (i as f64 + 0.5) / *nx as f64;
                        let y = im.0 + (im.1 - im.0) * (j as f64 + 0.5) / *ny as f64;
                        v.push(Complex64::new(x, y));
                    }
                }
                v
            }
            Sampler::Points { points } => {
                return points.iter().copied().filter(|p| domain.contains(p)).collect();
            }
            Sampler::Union { parts } => {
                return parts.iter().flat_map(|s| s.points(domain)).collect();
            }
        };
        let mut out = Vec::with_capacity(zs.len() * domain.sheets().len());
        for z in zs {
            if domain.singular_distance(z) <= 1e-9 * (1.0 + z.norm()) {
                continue;
            }
            for &s in domain.sheets() {
                if let Ok(p) = domain.lift(z, s) {
                    out.push(p);
                }
            }
        }
        out
    }
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct ImmersionOptions {
    /// Threshold on the normalized margin.
    pub eps: f64,
    /// How many of the lowest samples are polished by local minimization.
    pub polish: usize,
}

impl Default for ImmersionOptions {
    fn default() -> Self {
        ImmersionOptions { eps: 1e-12, polish: 8 }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ImmersionReport {
    pub min_normalized_margin: f64,
    pub argmin: SurfacePoint,
    pub samples: usize,
}

/// Local minimum of the normalized margin near `seed`, staying on the seed's branch.
pub fn polish_margin(wd: &WeierstrassData, seed: &SurfacePoint) -> (SurfacePoint, f64) {
    let scale = 0.02 * seed.z.norm().max(1e-3);
    let step = scale.min(0.25 * wd.domain.singular_distance(seed.z));
    let reach = 5.0 * step;
    let eval = |x: [f64; 2]| -> (SurfacePoint, f64) {
        let z = Complex64::new(x[0], x[1]);
        // trust region: the grid already bounds where a minimum can hide
        if (z - seed.z).norm() > reach || wd.domain.singular_distance(z) <= 1e-9 * (1.0 + z.norm()) {
            return (*seed, f64::INFINITY);
        }
        let p = wd.domain.continue_to(seed, z);
        if !wd.domain.contains(&p) {
            return (*seed, f64::INFINITY);
        }
        let m = normalized_margin(&wd.phi(&p));
        (p, if m.is_finite() { m } else { f64::INFINITY })
    };
    let (x, v) = nelder_mead_2d(|x| eval(x).1, [seed.z.re, seed.z.im], step, 0.0, 400);
    let (p, _) = eval(x);
    if v.is_finite() {
        (p, v)
    } else {
        (*seed, normalized_margin(&wd.phi(seed)))
    }
}

/// Grid scan of the normalized margin followed by local polishing of the lowest samples.
pub fn verify_immersion(
    wd: &WeierstrassData,
    sampler: &Sampler,
    opts: &ImmersionOptions,
) -> Result<ImmersionReport> {
    let pts = sampler.points(&wd.domain);
    if pts.is_empty() {
        return Err(Error::InvalidParameters("sampler produced no points in the domain".into()));
    }
    let mut scored: Vec<(f64, SurfacePoint)> = pts
        .par_iter()
        .map(|p| {
            let m = normalized_margin(&wd.phi(p));
            (if m.is_nan() { f64::INFINITY } else { m }, *p)
        })
        .collect();
    scored.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(std::cmp::Ordering::Equal));
    let polished: Vec<(f64, SurfacePoint)> = scored
        .par_iter()
        .take(opts.polish)
        .map(|(_, p)| {
            let (q, v) = polish_margin(wd, p);
            (v, q)
        })
        .collect();
    let (best, arg) = polished
        .into_iter()
        .chain(std::iter::once(scored[0]))
        .min_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(std::cmp::Ordering::Equal))
        .unwrap();
    if !(best > opts.eps) {
        return Err(Error::NotImmersion { witness: arg, margin: best });
    }
    Ok(ImmersionReport { min_normalized_margin: best, argmin: arg, samples: pts.len() })
}

/// Re of the periods of Phi along closed generators.
pub fn real_periods(wd: &WeierstrassData, generators: &[PathSpec], cfg: &QuadConfig) -> Result<Vec<Vec3>> {
    generators
        .iter()
        .map(|g| {
            if !g.closed {
                return Err(Error::InvalidParameters("period generator must be closed".into()));
            }
            let r = integrate_contour(&wd.domain, g, |p| wd.phi(p), cfg)?;
            Ok(re(&r.value))
        })
        .collect()
}

/// Im of the period of Phi along a closed curve: the flux of X across it.
pub fn flux(wd: &WeierstrassData, generator: &PathSpec, cfg: &QuadConfig) -> Result<Vec3> {
    if !generator.closed {
        return Err(Error::InvalidParameters("flux needs a closed curve".into()));
    }
    let r = integrate_contour(&wd.domain, generator, |p| wd.phi(p), cfg)?;
    Ok(im(&r.value))
}

/// Periods below this magnitude count as zero.
pub const PERIOD_TOL: f64 = 1e-8;

pub fn periods_vanish(periods: &[Vec3]) -> bool {
    periods.iter().all(|v| v.amax() < PERIOD_TOL)
}

pub type ClosedForm = Arc<dyn Fn(&SurfacePoint) -> Vec3 + Send + Sync>;

/// X = base_value + Re int_basepoint Phi.
#[derive(Clone)]
pub struct Immersion {
    pub data: WeierstrassData,
    pub basepoint: SurfacePoint,
    pub base_value: Vec3,
    pub closed_form: Option<ClosedForm>,
}

impl std::fmt::Debug for Immersion {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Immersion")
            .field("data", &self.data)
            .field("basepoint", &self.basepoint)
            .field("closed_form", &self.closed_form.is_some())
            .finish()
    }
}

impl Immersion {
    /// Immersion normalized so that it matches `closed_form` at the basepoint.
    pub fn with_closed_form(data: WeierstrassData, basepoint: SurfacePoint, closed_form: ClosedForm) -> Self {
        let base_value = closed_form(&basepoint);
        Immersion { data, basepoint, base_value, closed_form: Some(closed_form) }
    }

    pub fn by_integration(data: WeierstrassData, basepoint: SurfacePoint) -> Self {
        Immersion { data, basepoint, base_value: Vec3::zeros(), closed_form: None }
    }

    pub fn closed(&self, p: &SurfacePoint) -> Option<Vec3> {
        self.closed_form.as_ref().map(|f| f(p))
    }
}

/// Integrates Phi along `path`, which must start at the basepoint; returns X at its end.
pub fn evaluate_immersion(imm: &Immersion, path: &PathSpec, cfg: &QuadConfig) -> Result<Vec3> {
    let first = path
        .first()
        .ok_or_else(|| Error::InvalidParameters("empty path".into()))?;
    let same_fiber = match (first.w, imm.basepoint.w) {
        (Some(a), Some(b)) => (a - b).norm() <= 1e-9 * (1.0 + b.norm()),
        (None, None) => true,
        _ => false,
    };
    if (first.z - imm.basepoint.z).norm() > 1e-12 * (1.0 + first.z.norm()) || !same_fiber {
        return Err(Error::InvalidParameters("path must start at the basepoint".into()));
    }
    let r = integrate_contour(&imm.data.domain, path, |p| imm.data.phi(p), cfg)?;
    Ok(imm.base_value + re(&r.value))
}
