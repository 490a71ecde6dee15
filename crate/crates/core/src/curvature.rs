//! Gauss and mean curvature, the squared norm of the second fundamental form, total curvature
//! and the degree of the Gauss map.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::domain::SurfacePoint;
use crate::error::{Error, Result};
use crate::gauss::normal_of;
use crate::linalg::{bilinear, im, re, real_dot, CVec3, Vec3};
use crate::quadrature::{integrate_surface, nelder_mead_2d, QuadConfig};
use crate::weierstrass::{eval_phi, margin_of, Sampler, WeierstrassData};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurvatureSample {
    #[serde(rename = "K")]
    pub k: f64,
    pub mean: f64,
    pub sigma2: f64,
    /// Coefficient of du dv in dS.
    pub area_density: f64,
    /// ||phi ^ conj phi||^2.
    pub wedge2: f64,
}

/// Curvature from phi and phi' at one point; None where phi ^ conj phi vanishes.
pub fn curvature_of(phi: &CVec3, dphi: &CVec3) -> Option<CurvatureSample> {
    let n = normal_of(phi)?;
    let w = 2.0 * re(phi).cross(&im(phi)).norm();
    let w2 = w * w;
    let h = bilinear(phi, phi);
    let np = real_dot(&n, dphi);
    let k = -4.0 * np.norm_sqr() / w2;
    let hp: Vec3 = dphi.map(|c| (h.conj() * c).re);
    let mean = -2.0 * n.dot(&hp) / w2;
    Some(CurvatureSample {
        k,
        mean,
        sigma2: 4.0 * mean * mean - 2.0 * k,
        area_density: 0.5 * w,
        wedge2: w2,
    })
}

pub fn curvature(wd: &WeierstrassData, p: &SurfacePoint) -> Result<CurvatureSample> {
    let phi = eval_phi(wd, p)?;
    let dphi = wd.dphi(p);
    curvature_of(&phi, &dphi).ok_or(Error::NotImmersion { witness: *p, margin: margin_of(&phi) })
}

/// Upper bound of sigma2 in terms of K and the Hopf coefficient.
pub fn sigma2_upper_bound(s: &CurvatureSample, hopf_abs: f64) -> f64 {
    -2.0 * s.k * (2.0 * hopf_abs * hopf_abs / s.wedge2 + 1.0)
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct TotalCurvature {
    /// Integral of K dS.
    pub value: f64,
    pub error: f64,
    /// Integral of ||sigma||^2 dS.
    pub sigma_integral: f64,
    pub rho_range: (f64, f64),
}

/// Integral of K dS over the whole surface. The tail test runs on the pair (K dS, ||sigma||^2 dS),
/// so data whose second fundamental form is not square integrable at an end is reported as
/// `TailNotDecaying` even when K dS alone converges.
pub fn total_curvature(wd: &WeierstrassData, cfg: &QuadConfig) -> Result<TotalCurvature> {
    let r = integrate_surface(
        &wd.domain,
        |p: &SurfacePoint| -> [f64; 2] {
            let phi = wd.phi(p);
            let dphi = wd.dphi(p);
            match curvature_of(&phi, &dphi) {
                Some(s) => [s.k * s.area_density, s.sigma2 * s.area_density],
                None => [f64::NAN, f64::NAN],
            }
        },
        cfg,
    )?;
    Ok(TotalCurvature {
        value: r.value[0],
        error: r.error,
        sigma_integral: r.value[1],
        rho_range: r.rho_range,
    })
}

/// Nearest integer to total / (-4 pi); the distance to it must stay below 0.05.
pub fn degree_from_total(total: f64) -> Result<(i64, f64)> {
    let x = total / (-4.0 * PI);
    let d = x.round();
    let residual = x - d;
    if residual.abs() >= 0.05 || !x.is_finite() {
        return Err(Error::NonConvergent(format!("non-integer Gauss degree {x}")));
    }
    Ok((d as i64, residual))
}

pub fn gauss_degree(wd: &WeierstrassData, cfg: &QuadConfig) -> Result<(i64, f64)> {
    degree_from_total(total_curvature(wd, cfg)?.value)
}

/// 2 deg - (2 genus - 2 + sum (I + 1)); zero when the end data and degree are consistent.
pub fn jorge_meeks_residual(genus: i64, weights: &[i64], degree: i64) -> i64 {
    2 * degree - (2 * genus - 2 + weights.iter().map(|w| w + 1).sum::<i64>())
}

/// Points where the Gauss map takes the value `target`, found from local minima of
/// |N - target| on a log-polar grid refined by Nelder-Mead.
pub fn gauss_preimages(
    wd: &WeierstrassData,
    target: &Vec3,
    rho: (f64, f64),
    n_rho: usize,
    n_theta: usize,
) -> Vec<SurfacePoint> {
    let sheets = wd.domain.sheets();
    let dist = |p: &SurfacePoint| -> f64 {
        match normal_of(&wd.phi(p)) {
            Some(n) => (n - target).norm(),
            None => f64::INFINITY,
        }
    };
    let grid: Vec<Vec<Vec<Option<(SurfacePoint, f64)>>>> = sheets
        .iter()
        .map(|&s| {
            (0..n_rho)
                .into_par_iter()
                .map(|i| {
                    let r = (rho.0 + (rho.1 - rho.0) * i as f64 / (n_rho - 1) as f64).exp();
                    (0..n_theta)
                        .map(|j| {
                            let th = std::f64::consts::TAU * (j as f64 + 0.5) / n_theta as f64;
                            let z = Complex64::from_polar(r, th);
                            if wd.domain.singular_distance(z) < 1e-9 {
                                return None;
                            }
                            wd.domain.lift(z, s).ok().map(|p| (p, dist(&p)))
                        })
                        .collect()
                })
                .collect()
        })
        .collect();
    let mut seeds = Vec::new();
    for sheet in &grid {
        for i in 0..n_rho {
            for j in 0..n_theta {
                let Some((p, v)) = sheet[i][j] else { continue };
                if v > 0.3 {
                    continue;
                }
                let mut is_min = true;
                for di in -1i64..=1 {
                    for dj in -1i64..=1 {
                        let ii = i as i64 + di;
                        if ii < 0 || ii >= n_rho as i64 || (di == 0 && dj == 0) {
                            continue;
                        }
                        let jj = (j as i64 + dj).rem_euclid(n_theta as i64) as usize;
                        if let Some((_, w)) = sheet[ii as usize][jj] {
                            if w < v {
                                is_min = false;
                            }
                        }
                    }
                }
                if is_min {
                    seeds.push(p);
                }
            }
        }
    }
    let refined: Vec<(SurfacePoint, f64)> = seeds
        .par_iter()
        .map(|seed| {
            let step = 0.05 * seed.z.norm();
            let eval = |x: [f64; 2]| {
                let z = Complex64::new(x[0], x[1]);
                if wd.domain.singular_distance(z) < 1e-12 {
                    return (*seed, f64::INFINITY);
                }
                let p = wd.domain.continue_to(seed, z);
                (p, dist(&p))
            };
            let (x, _) = nelder_mead_2d(|x| eval(x).1.powi(2), [seed.z.re, seed.z.im], step, 0.0, 2000);
            eval(x)
        })
        .collect();
    let mut found: Vec<SurfacePoint> = Vec::new();
    for (p, v) in refined {
        if v > 1e-7 {
            continue;
        }
        let dup = found.iter().any(|q| {
            let same_w = match (p.w, q.w) {
                (Some(a), Some(b)) => (a - b).norm() < 1e-5 * (1.0 + a.norm()),
                _ => true,
            };
            (q.z - p.z).norm() < 1e-6 * (1.0 + p.z.norm()) && same_w
        });
        if !dup {
            found.push(p);
        }
    }
    found
}

/// Default sampler for pointwise identity checks on a domain.
pub fn default_sampler() -> Sampler {
    Sampler::LogPolar { rho: (-4.0, 4.0), n_rho: 64, n_theta: 64 }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::Domain;
    use crate::linalg::cvec;

    const I: Complex64 = Complex64::new(0.0, 1.0);

    fn rot_cat(b: Complex64) -> WeierstrassData {
        WeierstrassData::from_fns(
            Domain::PuncturedPlane { punctures: vec![Complex64::new(0.0, 0.0)] },
            "rot",
            move |p| {
                let z2 = p.z * p.z;
                cvec(1.0 - b / z2, I * (1.0 + b / z2), p.z.inv())
            },
            move |p| {
                let z3 = p.z * p.z * p.z;
                cvec(2.0 * b / z3, -2.0 * I * b / z3, -(p.z * p.z).inv())
            },
        )
    }

    /// Classical fundamental forms from X_u = Re phi, X_v = -Im phi and second derivatives.
    fn classical(phi: &CVec3, dphi: &CVec3) -> (f64, f64) {
        let xu = re(phi);
        let xv = -im(phi);
        let xuu = re(dphi);
        let xuv = -im(dphi);
        let xvv = -re(dphi);
        let n = xu.cross(&xv).normalize();
        let (e, f, g) = (xu.dot(&xu), xu.dot(&xv), xv.dot(&xv));
        let (l, m, nn) = (n.dot(&xuu), n.dot(&xuv), n.dot(&xvv));
        let det = e * g - f * f;
        ((l * nn - m * m) / det, 0.5 * (e * nn - 2.0 * f * m + g * l) / det)
    }

    #[test]
    fn matches_classical_forms() {
        let wd = rot_cat(Complex64::new(0.6, 0.4));
        for z in [Complex64::new(0.3, 0.8), Complex64::new(-1.5, 0.2)] {
            let p = SurfacePoint::planar(z);
            let s = curvature(&wd, &p).unwrap();
            let (k, h) = classical(&wd.phi(&p), &wd.dphi(&p));
            assert!((s.k - k).abs() < 1e-10 * k.abs().max(1.0));
            assert!((s.mean - h).abs() < 1e-10 * h.abs().max(1.0));
        }
    }

    #[test]
    fn minimal_catenoid_has_zero_mean_curvature() {
        let wd = rot_cat(Complex64::new(0.25, 0.0));
        let s = curvature(&wd, &SurfacePoint::planar(Complex64::new(0.7, -0.4))).unwrap();
        assert!(s.mean.abs() < 1e-12);
        assert!(s.k < 0.0);
    }

    #[test]
    fn jorge_meeks_arithmetic() {
        assert_eq!(jorge_meeks_residual(0, &[1, 1], 1), 0);
        assert_eq!(jorge_meeks_residual(1, &[1, 1], 2), 0);
        assert_eq!(jorge_meeks_residual(0, &[1, 1, 1], 2), 0);
        assert_eq!(jorge_meeks_residual(0, &[1, 1], 2), 2);
    }

    #[test]
    fn degree_rounding() {
        assert_eq!(degree_from_total(-4.0 * PI * 1.01).unwrap().0, 1);
        assert!(degree_from_total(-4.0 * PI * 1.5).is_err());
    }

    #[test]
    fn minimal_catenoid_total_curvature() {
        let wd = rot_cat(Complex64::new(0.25, 0.0));
        let t = total_curvature(&wd, &QuadConfig::default()).unwrap();
        assert!((t.value + 4.0 * PI).abs() < 1e-6, "{}", t.value);
    }
}
