//! Integrals of densities over the whole surface in log-polar coordinates z = e^(rho + i theta).

use num_complex::Complex64;
use std::f64::consts::TAU;

use super::gk::par_nodes;
use super::{gk_adaptive, gk_adaptive_batched, QValue, QuadConfig};
use crate::domain::{torus_w_slit, Domain, SurfacePoint};
use crate::error::{Error, Result};

/// Farthest |rho| a tail is followed before giving up.
const RHO_CAP: f64 = 46.0;
/// Same for -ln(1 - |z|) towards the unit circle, where 1 - |z| still resolves in f64.
const CIRCLE_CAP: f64 = 30.0;

/// Layout of a surface integral: a core rho-band split at the radii of singular points,
/// optional tails towards rho = -inf / +inf, theta split at singular directions.
#[derive(Clone, Debug)]
pub struct SurfacePlan {
    pub core: (f64, f64),
    pub lower_tail: bool,
    pub upper_tail: bool,
    pub rho_splits: Vec<f64>,
    pub theta_splits: Vec<f64>,
    pub sheets: Vec<i8>,
    /// The upper tail approaches the circle |z| = 1 instead of infinity.
    pub boundary_circle: bool,
}

#[derive(Clone, Copy, Debug)]
pub struct SurfaceResult<T> {
    pub value: T,
    pub error: f64,
    pub rho_range: (f64, f64),
    pub slabs: usize,
}

fn add_direction(splits: &mut Vec<f64>, z: Complex64) {
    let mut t = z.arg();
    if t < 0.0 {
        t += TAU;
    }
    if t > 0.0 && t < TAU {
        splits.push(t);
    }
}

impl SurfacePlan {
    pub fn for_domain(domain: &Domain) -> SurfacePlan {
        let mut plan = SurfacePlan {
            core: (-4.0, 4.0),
            lower_tail: true,
            upper_tail: true,
            rho_splits: Vec::new(),
            theta_splits: Vec::new(),
            sheets: domain.sheets().to_vec(),
            boundary_circle: false,
        };
        match domain {
            Domain::PuncturedPlane { .. } | Domain::EllipticCurve { .. } => {
                for q in domain.singular_points() {
                    if q.norm() > 0.0 {
                        let r = q.norm().ln();
                        plan.rho_splits.push(r);
                        plan.core.0 = plan.core.0.min(r - 1.0);
                        plan.core.1 = plan.core.1.max(r + 1.0);
                        add_direction(&mut plan.theta_splits, q);
                    }
                }
            }
            Domain::Annulus { r_in, r_out } => {
                plan.upper_tail = false;
                plan.core.1 = r_out.ln();
                if *r_in > 0.0 {
                    plan.lower_tail = false;
                    plan.core.0 = r_in.ln();
                } else {
                    plan.core.0 = plan.core.0.min(plan.core.1 - 4.0);
                }
            }
            Domain::UnitDisk => {
                plan.boundary_circle = true;
                plan.core.1 = 0.5f64.ln();
            }
        }
        plan.rho_splits.sort_by(|a, b| a.partial_cmp(b).unwrap());
        plan.rho_splits.dedup();
        plan.theta_splits.sort_by(|a, b| a.partial_cmp(b).unwrap());
        plan.theta_splits.dedup();
        plan
    }

    fn theta_intervals(&self) -> Vec<(f64, f64)> {
        let mut edges = vec![0.0];
        edges.extend(self.theta_splits.iter().copied());
        edges.push(TAU);
        edges.windows(2).map(|w| (w[0], w[1])).collect()
    }

    fn rho_intervals(&self) -> Vec<(f64, f64)> {
        let mut edges = vec![self.core.0];
        edges.extend(self.rho_splits.iter().copied().filter(|r| *r > self.core.0 && *r < self.core.1));
        edges.push(self.core.1);
        edges.windows(2).map(|w| (w[0], w[1])).collect()
    }
}

/// Integral of `density` (coefficient of du dv in the z-chart) over the whole surface.
pub fn integrate_surface<T, F>(domain: &Domain, density: F, cfg: &QuadConfig) -> Result<SurfaceResult<T>>
where
    T: QValue,
    F: Fn(&SurfacePoint) -> T + Sync,
{
    integrate_surface_with(&SurfacePlan::for_domain(domain), domain, density, cfg)
}

pub fn integrate_surface_with<T, F>(
    plan: &SurfacePlan,
    domain: &Domain,
    density: F,
    cfg: &QuadConfig,
) -> Result<SurfaceResult<T>>
where
    T: QValue,
    F: Fn(&SurfacePoint) -> T + Sync,
{
    cfg.validate()?;
    let thetas = plan.theta_intervals();
    let elliptic = match domain {
        Domain::EllipticCurve { a } => Some(*a),
        _ => None,
    };
    let inner = |rho: f64| -> Result<T> {
        let r = rho.exp();
        let jac = r * r;
        let mut total = T::zero();
        for &(t0, t1) in &thetas {
            let res = gk_adaptive(
                |th: f64| {
                    let z = Complex64::from_polar(r, th);
                    let mut acc = T::zero();
                    for &sheet in &plan.sheets {
                        let p = match elliptic {
                            Some(a) => SurfacePoint { z, w: Some(torus_w_slit(a, z, sheet)) },
                            None => SurfacePoint::planar(z),
                        };
                        acc = acc.add(density(&p));
                    }
                    acc.scale(jac)
                },
                t0,
                t1,
                cfg.abs_tol * 1e-2,
                cfg.rel_tol * 0.1,
                cfg.max_subdivisions,
            );
            total = total.add(res?.value);
        }
        Ok(total)
    };
    let outer = |intervals: &[(f64, f64)], abs: f64| -> Result<(T, f64)> {
        let r = gk_adaptive_batched(
            intervals,
            |_, xs| par_nodes(xs, &inner),
            abs,
            cfg.rel_tol,
            cfg.max_subdivisions,
        )?;
        Ok((r.value, r.error))
    };

    let (mut value, mut error) = outer(&plan.rho_intervals(), cfg.abs_tol)?;
    let mut range = plan.core;
    let mut slabs = 0;
    let width = cfg.tail_radius_growth.ln();
    for dir in [-1.0f64, 1.0] {
        let enabled = if dir < 0.0 { plan.lower_tail } else { plan.upper_tail };
        if !enabled {
            continue;
        }
        let mut edge = if dir < 0.0 { plan.core.0 } else { plan.core.1 };
        let mut mags: Vec<f64> = Vec::new();
        let mut quiet = 0;
        loop {
            // towards the unit circle the slabs shrink geometrically in 1 - |z|
            let to_circle = dir > 0.0 && plan.boundary_circle;
            let depth = if to_circle { -(-edge.exp()).ln_1p() } else { edge.abs() };
            if depth > if to_circle { CIRCLE_CAP } else { RHO_CAP } {
                return Err(Error::TailNotDecaying { rho: edge });
            }
            let next = if to_circle { (-(-(depth + width)).exp()).ln_1p() } else { edge + dir * width };
            let iv = if dir < 0.0 { (next, edge) } else { (edge, next) };
            let (s, e) = match outer(&[iv], cfg.abs_tol * 0.1) {
                Ok(v) => v,
                Err(Error::NonConvergent(_)) => return Err(Error::TailNotDecaying { rho: next }),
                Err(e) => return Err(e),
            };
            value = value.add(s);
            error += e;
            slabs += 1;
            edge = next;
            let m = s.mag();
            mags.push(m);
            let n = mags.len();
            let tail = if m == 0.0 {
                0.0
            } else if n >= 2 && mags[n - 2] > 0.0 && m < mags[n - 2] {
                let q = m / mags[n - 2];
                m * q / (1.0 - q)
            } else {
                f64::INFINITY
            };
            if tail < cfg.abs_tol {
                quiet += 1;
                if quiet >= 2 {
                    break;
                }
            } else {
                quiet = 0;
            }
            if n >= 3 && m > cfg.abs_tol && m >= mags[n - 2] && mags[n - 2] >= mags[n - 3] {
                return Err(Error::TailNotDecaying { rho: edge });
            }
        }
        if dir < 0.0 {
            range.0 = edge;
        } else {
            range.1 = edge;
        }
    }
    Ok(SurfaceResult { value, error, rho_range: range, slabs })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn gaussian_over_plane() {
        let d = Domain::PuncturedPlane { punctures: vec![] };
        let r = integrate_surface(&d, |p: &SurfacePoint| (-p.z.norm_sqr()).exp(), &QuadConfig::default())
            .unwrap();
        assert!((r.value - PI).abs() < 1e-8, "{}", r.value);
    }

    #[test]
    fn sphere_area_pullback() {
        // 4/(1+|z|^2)^2 integrates to 4 pi
        let d = Domain::PuncturedPlane { punctures: vec![Complex64::new(0.0, 0.0)] };
        let r = integrate_surface(
            &d,
            |p: &SurfacePoint| 4.0 / (1.0 + p.z.norm_sqr()).powi(2),
            &QuadConfig::default(),
        )
        .unwrap();
        assert!((r.value - 4.0 * PI).abs() < 1e-8);
    }

    #[test]
    fn off_center_cusp() {
        // 1/|z-1| on the unit disc around 1 after cutoff: integrable point singularity
        let d = Domain::PuncturedPlane { punctures: vec![Complex64::new(1.0, 0.0)] };
        let r = integrate_surface(
            &d,
            |p: &SurfacePoint| {
                let s = (p.z - 1.0).norm();
                (-s * s).exp() / s
            },
            &QuadConfig { rel_tol: 1e-7, ..Default::default() },
        )
        .unwrap();
        // 2 pi * int_0^inf e^{-s^2} ds = pi^{3/2}
        assert!((r.value - PI.powf(1.5)).abs() < 1e-5, "{}", r.value);
    }

    #[test]
    fn growing_tail_detected() {
        let d = Domain::PuncturedPlane { punctures: vec![Complex64::new(0.0, 0.0)] };
        let r = integrate_surface(&d, |p: &SurfacePoint| 1.0 / p.z.norm().powi(3), &QuadConfig::default());
        assert!(matches!(r, Err(Error::TailNotDecaying { .. })));
    }
}
