//! Gauss map, complex Gauss map, the (lambda, eta) decomposition, Beltrami coefficient,
//! distortion and quasiconformality indices.

use nalgebra::Matrix3;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::domain::{EndChart, SurfacePoint};
use crate::error::{Error, Result};
use crate::linalg::{apply, bilinear, cvec, herm_sq, im, re, wedge_im, CVec3, Vec3};
use crate::weierstrass::{eval_phi, margin_of, WeierstrassData};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Band of |g| in which lambda is computed without rotating the frame.
pub const G_BAND: (f64, f64) = (1e-3, 1e3);

/// Unit normal Im(phi2 conj phi3, phi3 conj phi1, phi1 conj phi2) / norm, or None if it vanishes.
pub fn normal_of(phi: &CVec3) -> Option<Vec3> {
    let v = wedge_im(phi);
    let n = v.norm();
    if n > 0.0 && n.is_finite() {
        Some(v / n)
    } else {
        None
    }
}

fn degenerate(p: &SurfacePoint, phi: &CVec3) -> Error {
    Error::NotImmersion { witness: *p, margin: margin_of(phi) }
}

pub fn gauss_map(wd: &WeierstrassData, p: &SurfacePoint) -> Result<Vec3> {
    let phi = eval_phi(wd, p)?;
    normal_of(&phi).ok_or_else(|| degenerate(p, &phi))
}

/// A value of the complex Gauss map on the Riemann sphere.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum Stereo {
    Finite(Complex64),
    Infinity,
}

impl Stereo {
    pub fn finite(self) -> Option<Complex64> {
        match self {
            Stereo::Finite(g) => Some(g),
            Stereo::Infinity => None,
        }
    }
}

/// Stereographic projection from the north pole.
pub fn stereo(n: &Vec3) -> Stereo {
    if n[2] <= 0.0 {
        Stereo::Finite(Complex64::new(n[0], n[1]) / (1.0 - n[2]))
    } else {
        // (1 + n3)/(n1 - i n2) is the same value without cancellation near the pole
        let d = Complex64::new(n[0], -n[1]);
        if d.norm() == 0.0 {
            Stereo::Infinity
        } else {
            Stereo::Finite((1.0 + n[2]) / d)
        }
    }
}

pub fn complex_gauss(wd: &WeierstrassData, p: &SurfacePoint) -> Result<Stereo> {
    Ok(stereo(&gauss_map(wd, p)?))
}

/// 2 Re(g) phi1 + 2 Im(g) phi2 + (|g|^2 - 1) phi3.
pub fn gauss_identity(g: Complex64, phi: &CVec3) -> Complex64 {
    2.0 * g.re * phi[0] + 2.0 * g.im * phi[1] + (g.norm_sqr() - 1.0) * phi[2]
}

/// Rebuilds phi from (g, lambda, eta).
pub fn rebuild_phi(g: Complex64, lambda: Complex64, eta: Complex64) -> CVec3 {
    let m = g.norm();
    let q = 1.0 + m * m;
    let c = (1.0 - m * m) / (m * q);
    cvec(
        g.re * c * lambda - I * (g.im / m) * eta,
        g.im * c * lambda + I * (g.re / m) * eta,
        (2.0 * m / q) * lambda,
    )
}

/// Pointwise Gauss data, in a frame rotated by `rotation` when |g| left the band.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct GaussFrame {
    /// Normal in the original frame.
    pub normal: Vec3,
    pub rotation: Matrix3<f64>,
    pub rotated: bool,
    /// Rotated coefficients R phi.
    pub phi: CVec3,
    pub hopf: Complex64,
    pub g: Complex64,
    pub lambda: Complex64,
    pub eta: Complex64,
    pub mu: Complex64,
    pub distortion: f64,
}

impl GaussFrame {
    pub fn mu_abs(&self) -> f64 {
        ((self.lambda - self.eta) / (self.lambda + self.eta)).norm()
    }
}

fn frame_rotation(n: &Vec3) -> Option<Matrix3<f64>> {
    let g = stereo(n).finite().map(|g| g.norm()).unwrap_or(f64::INFINITY);
    if g >= G_BAND.0 && g <= G_BAND.1 {
        None
    } else {
        // send the normal to the equator, away from both poles
        let target = Vec3::new(1.0, 0.0, 0.0);
        Some(crate::linalg::rotation_onto(n, &target))
    }
}

/// Complex Gauss map of the data rotated by `r`, at a point.
fn rotated_g(wd: &WeierstrassData, r: &Matrix3<f64>, p: &SurfacePoint) -> Option<Complex64> {
    let phi = apply(r, &wd.phi(p));
    normal_of(&phi).and_then(|n| stereo(&n).finite())
}

/// Gauss frame with an explicit rotation of the data (`None` picks one automatically).
pub fn frame_with(wd: &WeierstrassData, p: &SurfacePoint, rotation: Option<Matrix3<f64>>) -> Result<GaussFrame> {
    let phi0 = eval_phi(wd, p)?;
    let n0 = normal_of(&phi0).ok_or_else(|| degenerate(p, &phi0))?;
    let (rot, rotated) = match rotation {
        Some(r) => (r, true),
        None => match frame_rotation(&n0) {
            Some(r) => (r, true),
            None => (Matrix3::identity(), false),
        },
    };
    let phi = apply(&rot, &phi0);
    let n = rot * n0;
    let g = stereo(&n).finite().ok_or_else(|| degenerate(p, &phi0))?;
    let m = g.norm();
    if m == 0.0 {
        return Err(Error::InvalidParameters("frame rotation left g at 0".into()));
    }
    let hopf = bilinear(&phi, &phi);
    let lambda = phi[2] * (1.0 + m * m) / (2.0 * m);
    // linear in phi, so no cancellation in eta^2 = lambda^2 - h where |h| ~ ||phi||^2
    let eta = -I * (g.re * phi[1] - g.im * phi[0]) / m;
    let mu = beltrami_from_frame(wd, p, &rot, g, lambda, eta);
    let a = lambda.norm_sqr() + eta.norm_sqr();
    let s = 2.0 * (lambda.conj() * eta).re;
    Ok(GaussFrame {
        normal: n0,
        rotation: rot,
        rotated,
        phi,
        hopf,
        g,
        lambda,
        eta,
        mu,
        distortion: a / s,
    })
}

pub fn frame(wd: &WeierstrassData, p: &SurfacePoint) -> Result<GaussFrame> {
    frame_with(wd, p, None)
}

/// Step for finite differences of g near `p`.
fn fd_step(wd: &WeierstrassData, p: &SurfacePoint) -> f64 {
    let scale = wd.domain.singular_distance(p.z).min(1.0 + p.z.norm());
    1e-6 * scale
}

/// (d_z g, d_zbar g) of the rotated complex Gauss map by centered differences.
pub fn gauss_derivatives(wd: &WeierstrassData, p: &SurfacePoint, rot: &Matrix3<f64>) -> Option<(Complex64, Complex64)> {
    let h = fd_step(wd, p);
    let at = |dz: Complex64| rotated_g(wd, rot, &wd.domain.continue_to(p, p.z + dz));
    let gx = (at(Complex64::new(h, 0.0))? - at(Complex64::new(-h, 0.0))?) / (2.0 * h);
    let gy = (at(Complex64::new(0.0, h))? - at(Complex64::new(0.0, -h))?) / (2.0 * h);
    Some((0.5 * (gx - I * gy), 0.5 * (gx + I * gy)))
}

fn beltrami_from_frame(
    wd: &WeierstrassData,
    p: &SurfacePoint,
    rot: &Matrix3<f64>,
    g: Complex64,
    lambda: Complex64,
    eta: Complex64,
) -> Complex64 {
    let y = -(g * (lambda - eta)) / (g.conj() * (lambda + eta));
    let phase = match gauss_derivatives(wd, p, rot) {
        Some((gz, _)) if gz.norm() > 0.0 => gz.conj() / gz,
        _ => Complex64::new(1.0, 0.0),
    };
    y * phase
}

/// Beltrami coefficient d_zbar g / d_z g computed directly by finite differences.
pub fn beltrami_numeric(wd: &WeierstrassData, p: &SurfacePoint, rot: &Matrix3<f64>) -> Option<Complex64> {
    let (gz, gzb) = gauss_derivatives(wd, p, rot)?;
    Some(gzb / gz)
}

/// (||phi||^2, |h|, sqrt(||phi||^4 - |h|^2)) with the last computed from the cross product.
fn invariants(phi: &CVec3) -> (f64, f64, f64) {
    let a = herm_sq(phi);
    let h = bilinear(phi, phi).norm();
    let s = 2.0 * re(phi).cross(&im(phi)).norm();
    (a, h, s)
}

/// |mu| = sqrt((A - s)/(A + s)), A = ||phi||^2, s = sqrt(A^2 - |h|^2).
pub fn beltrami_magnitude_of(phi: &CVec3) -> f64 {
    let (a, h, s) = invariants(phi);
    // A - s = |h|^2 / (A + s)
    h / (a + s)
}

pub fn beltrami_magnitude(wd: &WeierstrassData, p: &SurfacePoint) -> Result<f64> {
    let phi = eval_phi(wd, p)?;
    normal_of(&phi).ok_or_else(|| degenerate(p, &phi))?;
    Ok(beltrami_magnitude_of(&phi))
}

pub fn distortion_of(phi: &CVec3) -> f64 {
    let (a, _, s) = invariants(phi);
    a / s
}

pub fn distortion(wd: &WeierstrassData, p: &SurfacePoint) -> Result<f64> {
    let phi = eval_phi(wd, p)?;
    normal_of(&phi).ok_or_else(|| degenerate(p, &phi))?;
    Ok(distortion_of(&phi))
}

/// |h| / ||phi||^2.
pub fn hopf_ratio_of(phi: &CVec3) -> f64 {
    bilinear(phi, phi).norm() / herm_sq(phi)
}

/// Points on shells shrinking into an end: |t| = r for each radius, `n` angles each.
pub fn end_shells(wd: &WeierstrassData, chart: &EndChart, radii: &[f64], n: usize) -> Vec<Vec<SurfacePoint>> {
    radii
        .iter()
        .map(|&r| {
            (0..n)
                .filter_map(|k| {
                    let th = std::f64::consts::TAU * (k as f64 + 0.25) / n as f64;
                    let (p, _) = chart.eval(Complex64::from_polar(r, th));
                    wd.domain.contains(&p).then_some(p)
                })
                .collect()
        })
        .collect()
}

/// Vertical lines Re z = x for each x, sampled on Im z in `im`.
pub fn line_shells(xs: &[f64], im: (f64, f64), n: usize) -> Vec<Vec<SurfacePoint>> {
    xs.iter()
        .map(|&x| {
            (0..n)
                .map(|k| {
                    let y = im.0 + (im.1 - im.0) * (k as f64 + 0.5) / n as f64;
                    SurfacePoint::planar(Complex64::new(x, y))
                })
                .collect()
        })
        .collect()
}

/// Default shell radii 10^-0.5 .. 10^-2.5.
pub fn default_radii() -> Vec<f64> {
    (0..5).map(|k| 10f64.powf(-0.5 - 0.5 * k as f64)).collect()
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct QcIndices {
    /// sup |h|/||phi||^2 per shell, outermost first.
    pub shell_ratio: Vec<f64>,
    /// sup |mu| per shell.
    pub shell_mu: Vec<f64>,
    /// Largest ratio seen on any shell.
    pub sup_ratio: f64,
    /// Estimate of limsup |h|/||phi||^2: the deepest shell.
    pub i_upper: f64,
    /// Estimate of limsup |mu|: the deepest shell.
    pub i_lower: f64,
    pub chain_ok: bool,
}

/// Sampled quasiconformality indices over shells exhausting the ends. An optional linear map
/// is applied to phi first (normalizing an end before measuring).
pub fn qc_indices(
    wd: &WeierstrassData,
    shells: &[Vec<SurfacePoint>],
    normalization: Option<&Matrix3<f64>>,
) -> Result<QcIndices> {
    if shells.is_empty() || shells.iter().any(|s| s.is_empty()) {
        return Err(Error::InvalidParameters("empty shell sampler".into()));
    }
    let per_shell: Vec<(f64, f64)> = shells
        .par_iter()
        .map(|shell| {
            let mut sr: f64 = 0.0;
            let mut sm: f64 = 0.0;
            for p in shell {
                let mut phi = wd.phi(p);
                if let Some(m) = normalization {
                    phi = apply(m, &phi);
                }
                sr = sr.max(hopf_ratio_of(&phi));
                sm = sm.max(beltrami_magnitude_of(&phi));
            }
            (sr, sm)
        })
        .collect();
    let shell_ratio: Vec<f64> = per_shell.iter().map(|v| v.0).collect();
    let shell_mu: Vec<f64> = per_shell.iter().map(|v| v.1).collect();
    let i_upper = *shell_ratio.last().unwrap();
    let i_lower = *shell_mu.last().unwrap();
    let tol = 1e-3;
    let chain_ok = i_lower <= i_upper + tol && i_upper <= 2.0 * i_lower / (1.0 + i_lower * i_lower) + tol;
    Ok(QcIndices {
        sup_ratio: shell_ratio.iter().copied().fold(0.0, f64::max),
        shell_ratio,
        shell_mu,
        i_upper,
        i_lower,
        chain_ok,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::Domain;

    fn horn0() -> WeierstrassData {
        WeierstrassData::from_fn(
            Domain::PuncturedPlane { punctures: vec![Complex64::new(0.0, 0.0)] },
            "horn",
            |p| cvec(Complex64::new(1.0, 0.0), I, p.z.inv()),
        )
    }

    fn rot_cat(b: Complex64) -> WeierstrassData {
        WeierstrassData::from_fn(
            Domain::PuncturedPlane { punctures: vec![Complex64::new(0.0, 0.0)] },
            "rot",
            move |p| {
                let z2 = p.z * p.z;
                cvec(1.0 - b / z2, I * (1.0 + b / z2), p.z.inv())
            },
        )
    }

    #[test]
    fn horn_normal_and_g_at_one() {
        let wd = horn0();
        let p = SurfacePoint::planar(Complex64::new(1.0, 0.0));
        let n = gauss_map(&wd, &p).unwrap();
        let s = 0.5f64.sqrt();
        assert!((n - Vec3::new(s, 0.0, -s)).norm() < 1e-15);
        let g = complex_gauss(&wd, &p).unwrap().finite().unwrap();
        assert!((g - Complex64::new(2f64.sqrt() - 1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn stereo_alternate_form_agrees() {
        let n = Vec3::new(0.3, -0.4, 0.5).normalize();
        let direct = Complex64::new(n[0], n[1]) / (1.0 - n[2]);
        assert!((stereo(&n).finite().unwrap() - direct).norm() < 1e-14);
        assert_eq!(stereo(&Vec3::new(0.0, 0.0, 1.0)), Stereo::Infinity);
    }

    #[test]
    fn frame_rebuilds_phi() {
        let wd = rot_cat(Complex64::new(0.7, -0.3));
        for z in [Complex64::new(0.4, 0.9), Complex64::new(-2.0, 0.1), Complex64::new(0.01, 0.02)] {
            let p = SurfacePoint::planar(z);
            let f = frame(&wd, &p).unwrap();
            let back = rebuild_phi(f.g, f.lambda, f.eta);
            assert!((back - f.phi).norm() < 1e-12 * f.phi.norm());
            assert!((f.lambda.norm_sqr() + f.eta.norm_sqr() - herm_sq(&f.phi)).abs() < 1e-12 * herm_sq(&f.phi));
            assert!(gauss_identity(f.g, &f.phi).norm() < 1e-12 * f.phi.norm() * (1.0 + f.g.norm_sqr()));
        }
    }

    #[test]
    fn beltrami_formula_matches_finite_differences() {
        let wd = rot_cat(Complex64::new(0.7, -0.3));
        let p = SurfacePoint::planar(Complex64::new(0.8, 0.5));
        let f = frame(&wd, &p).unwrap();
        let direct = beltrami_numeric(&wd, &p, &f.rotation).unwrap();
        assert!((direct - f.mu).norm() < 1e-6, "{direct} vs {}", f.mu);
        assert!((f.mu.norm() - beltrami_magnitude(&wd, &p).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn conformal_case() {
        let wd = rot_cat(Complex64::new(0.25, 0.0));
        let p = SurfacePoint::planar(Complex64::new(0.3, 1.1));
        let f = frame(&wd, &p).unwrap();
        assert!((f.eta - f.lambda).norm() < 1e-12 * f.lambda.norm());
        assert!(f.mu.norm() < 1e-12);
        assert!((f.distortion - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rotated_frame_near_pole() {
        // near z = 0 the rotational catenoid normal approaches a pole
        let wd = rot_cat(Complex64::new(2.0, 1.0));
        let p = SurfacePoint::planar(Complex64::new(1e-5, 1e-5));
        let f = frame(&wd, &p).unwrap();
        assert!(f.rotated);
        let m = f.g.norm();
        assert!(m >= G_BAND.0 && m <= G_BAND.1);
        let other = frame_with(&wd, &p, Some(crate::linalg::rotation_onto(&f.normal, &Vec3::new(0.0, 1.0, 0.0))))
            .unwrap();
        assert!((f.mu.norm() - other.mu.norm()).abs() < 1e-9);
    }

    #[test]
    fn horn_ratio_tends_to_one() {
        let wd = horn0();
        let shells = end_shells(&wd, &EndChart::Finite { at: Complex64::new(0.0, 0.0) }, &default_radii(), 16);
        let q = qc_indices(&wd, &shells, None).unwrap();
        assert!(q.shell_ratio.windows(2).all(|w| w[1] > w[0]));
        assert!(q.i_upper >= 0.999);
        assert!(q.chain_ok);
    }
}
