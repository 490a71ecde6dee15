//! Explicit families of harmonic immersions: constructors, validity predicates, closed forms
//! and homology generators.

mod forms;
mod torus;

pub use forms::LaurentPoly;
pub use torus::{
    end_loop_zero, gamma1, gamma1_period, gamma2, gamma2_period, slit_integrals, torus_dphi, torus_period_b,
    torus_phi, TorusPeriods,
};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::sync::Arc;

use crate::domain::{Domain, EndChart, PathSpec, SurfacePoint};
use crate::error::{Error, Result};
use crate::gauss::{end_shells, line_shells};
use crate::linalg::{cvec, CVec3, Vec3};
use crate::mesh::MeshGrid;
use crate::parse::CParam;
use crate::quadrature::QuadConfig;
use crate::weierstrass::{ClosedForm, Immersion, Sampler, WeierstrassData, PERIOD_TOL};

const I: Complex64 = Complex64::new(0.0, 1.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", content = "params", rename_all = "snake_case")]
pub enum FamilySpec {
    /// Phi = (1, i, 0).
    Plane,
    /// Graph of u = Re f over the plane, f = sum coeffs[k] z^k.
    HarmonicGraph { coeffs: Vec<CParam> },
    /// Re(e^z, i e^z, i z) on the plane.
    HelicoidY1,
    /// Re(sinh z, i cosh z, i z) on Re z > 0, pulled back to the unit disc.
    HelicoidY2,
    Rotational { b: CParam },
    Horn { r1: f64, r2: f64 },
    Catenoid { alpha: CParam, beta: CParam, r1: f64, r2: f64 },
    Flujo { b: f64, c: f64 },
    /// `b` defaults to the solution of the period problem.
    Torus {
        a: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        b: Option<f64>,
    },
    NonQcY,
    RemarkContra,
}

impl FamilySpec {
    pub fn name(&self) -> &'static str {
        match self {
            FamilySpec::Plane => "plane",
            FamilySpec::HarmonicGraph { .. } => "harmonic_graph",
            FamilySpec::HelicoidY1 => "helicoid_y1",
            FamilySpec::HelicoidY2 => "helicoid_y2",
            FamilySpec::Rotational { .. } => "rotational",
            FamilySpec::Horn { .. } => "horn",
            FamilySpec::Catenoid { .. } => "catenoid",
            FamilySpec::Flujo { .. } => "flujo",
            FamilySpec::Torus { .. } => "torus",
            FamilySpec::NonQcY => "non_qc_y",
            FamilySpec::RemarkContra => "remark_contra",
        }
    }

    pub fn catenoid(alpha: Complex64, beta: Complex64, r1: f64, r2: f64) -> Self {
        FamilySpec::Catenoid { alpha: CParam(alpha), beta: CParam(beta), r1, r2 }
    }

    pub fn rotational(b: Complex64) -> Self {
        FamilySpec::Rotational { b: CParam(b) }
    }
}

/// X_b is a complete immersion iff b is not a negative real number.
pub fn rotational_valid(b: Complex64) -> bool {
    !(b.im == 0.0 && b.re < 0.0)
}

/// Membership in the parameter set of immersed catenoids.
pub fn omega_member(alpha: Complex64, beta: Complex64) -> bool {
    let (na, nb) = (alpha.norm(), beta.norm());
    !(na <= nb || (alpha.re >= 0.0 && alpha.im.abs() <= nb))
}

pub fn flujo_valid(b: f64, c: f64) -> bool {
    b > 3.0 && c < 2.0
}

/// Determinant of the linear system behind injectivity of X_{alpha,beta} on |z| = m.
pub fn catenoid_injectivity_margin(alpha: Complex64, beta: Complex64, m: f64) -> f64 {
    -alpha.re + 1.0 / (m * m) + 0.25 * m * m * (alpha.norm_sqr() - beta.norm_sqr())
}

/// X_{alpha,beta} at z = m e^{it}.
pub fn catenoid_closed_form(alpha: Complex64, beta: Complex64, r1: f64, r2: f64, m: f64, t: f64) -> Vec3 {
    let m2 = m * m;
    let (c, s) = (t.cos(), t.sin());
    let x1 = ((-2.0 + (alpha + beta).re * m2) * c + (beta - alpha).im * m2 * s + 2.0 * r1 * m * m.ln()) / (2.0 * m);
    let x2 = ((-2.0 + (alpha - beta).re * m2) * s + (alpha + beta).im * m2 * c + 2.0 * r2 * m * m.ln()) / (2.0 * m);
    Vec3::new(x1, x2, m.ln())
}

/// X of the genus-zero three-ended family, consistent with its Weierstrass data.
pub fn flujo_closed_form(b: f64, c: f64, z: Complex64) -> Vec3 {
    let q = 8.0 / (z * z - 1.0);
    Vec3::new(
        (z * (b - 2.0 - q)).im,
        (z * (c - 2.0 - q)).re,
        6.0 * ((z - 1.0) / (z + 1.0)).norm().ln(),
    )
}

fn flujo_phi(b: f64, c: f64, z: Complex64) -> CVec3 {
    let z2 = z * z;
    let d = (z2 - 1.0) * (z2 - 1.0);
    let n1 = (6.0 + b) + (12.0 - 2.0 * b) * z2 + (b - 2.0) * z2 * z2;
    let n2 = (6.0 + c) + (12.0 - 2.0 * c) * z2 + (c - 2.0) * z2 * z2;
    cvec(-I * n1 / d, n2 / d, 12.0 / (z2 - 1.0))
}

fn flujo_dphi(b: f64, c: f64, z: Complex64) -> CVec3 {
    let z2 = z * z;
    let q = z2 - 1.0;
    let n = |k: f64| (6.0 + k) + (12.0 - 2.0 * k) * z2 + (k - 2.0) * z2 * z2;
    let dn = |k: f64| 2.0 * (12.0 - 2.0 * k) * z + 4.0 * (k - 2.0) * z2 * z;
    let quot = |k: f64| (dn(k) * q - 4.0 * z * n(k)) / (q * q * q);
    cvec(-I * quot(b), quot(c), -24.0 * z / (q * q))
}

/// Cayley map from the unit disc onto Re z > 0 and its derivative.
fn cayley(zeta: Complex64) -> (Complex64, Complex64) {
    let d = ONE - zeta;
    ((ONE + zeta) / d, 2.0 / (d * d))
}

/// Laurent-polynomial data of a family that has one.
pub fn laurent_poly(spec: &FamilySpec) -> Option<LaurentPoly> {
    let lp = match spec {
        FamilySpec::Plane => LaurentPoly::new(vec![(0, cvec(ONE, I, ZERO))]),
        FamilySpec::HarmonicGraph { coeffs } => {
            let mut terms = vec![(0, cvec(ONE, -I, ZERO))];
            for (k, c) in coeffs.iter().enumerate().skip(1) {
                terms.push((k as i32 - 1, cvec(ZERO, ZERO, c.0 * k as f64)));
            }
            LaurentPoly::new(terms)
        }
        FamilySpec::Rotational { b } => LaurentPoly::new(vec![
            (0, cvec(ONE, I, ZERO)),
            (-2, cvec(-b.0, I * b.0, ZERO)),
            (-1, cvec(ZERO, ZERO, ONE)),
        ]),
        FamilySpec::Horn { r1, r2 } => LaurentPoly::new(vec![
            (0, cvec(ONE, -I, ZERO)),
            (-1, cvec(ONE * *r1, ONE * *r2, ONE)),
        ]),
        FamilySpec::Catenoid { alpha, beta, r1, r2 } => {
            let (a, b) = (alpha.0, beta.0);
            LaurentPoly::new(vec![
                (-2, cvec(ONE, I, ZERO)),
                (-1, cvec(ONE * *r1, ONE * *r2, ONE)),
                (0, cvec((a + b.conj()) / 2.0, (a - b.conj()) / (2.0 * I), ZERO)),
            ])
        }
        FamilySpec::NonQcY => LaurentPoly::new(vec![
            (1, cvec(-I, ONE * 0.0, ZERO)),
            (-3, cvec(-I, ZERO, ZERO)),
            (0, cvec(ZERO, ONE, ZERO)),
            (-2, cvec(ZERO, -ONE, ZERO)),
            (-1, cvec(ZERO, ZERO, ONE)),
        ]),
        FamilySpec::RemarkContra => LaurentPoly::new(vec![(0, cvec(ONE, I, ZERO)), (-2, cvec(ZERO, ZERO, -ONE))]),
        _ => return None,
    };
    Some(lp)
}

fn punctured(points: &[Complex64]) -> Domain {
    Domain::PuncturedPlane { punctures: points.to_vec() }
}

fn check_finite(vals: &[f64]) -> Result<()> {
    if vals.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::InvalidParameters("parameters must be finite".into()))
    }
}

/// Weierstrass data, closed form (if any) and basepoint, without the validity predicate.
/// `torus_b` supplies b for the torus when the spec leaves it open.
pub fn build_data(spec: &FamilySpec, torus_b: Option<f64>) -> Result<(WeierstrassData, Option<ClosedForm>, SurfacePoint)> {
    let label = spec.name();
    let origin = [ZERO];
    let at_one = SurfacePoint::planar(ONE);
    if let Some(lp) = laurent_poly(spec) {
        let domain = match spec {
            FamilySpec::Plane | FamilySpec::HarmonicGraph { .. } => punctured(&[]),
            _ => punctured(&origin),
        };
        let closed: ClosedForm = match spec.clone() {
            FamilySpec::Plane => Arc::new(|p: &SurfacePoint| Vec3::new(p.z.re, -p.z.im, 0.0)),
            FamilySpec::HarmonicGraph { coeffs } => {
                check_finite(&coeffs.iter().flat_map(|c| [c.0.re, c.0.im]).collect::<Vec<_>>())?;
                Arc::new(move |p: &SurfacePoint| {
                    let f: Complex64 = coeffs.iter().rev().fold(ZERO, |acc, c| acc * p.z + c.0);
                    Vec3::new(p.z.re, p.z.im, f.re)
                })
            }
            FamilySpec::Rotational { b } => {
                check_finite(&[b.0.re, b.0.im])?;
                let b = b.0;
                Arc::new(move |p: &SurfacePoint| {
                    let z = p.z;
                    Vec3::new((z + b / z).re, -(z - b / z).im, z.norm().ln())
                })
            }
            FamilySpec::Horn { r1, r2 } => {
                check_finite(&[r1, r2])?;
                Arc::new(move |p: &SurfacePoint| {
                    let l = p.z.norm().ln();
                    Vec3::new(r1 * l + p.z.re, r2 * l + p.z.im, l)
                })
            }
            FamilySpec::Catenoid { alpha, beta, r1, r2 } => {
                check_finite(&[alpha.0.re, alpha.0.im, beta.0.re, beta.0.im, r1, r2])?;
                let (a, b) = (alpha.0, beta.0);
                Arc::new(move |p: &SurfacePoint| catenoid_closed_form(a, b, r1, r2, p.z.norm(), p.z.arg()))
            }
            FamilySpec::NonQcY => Arc::new(|p: &SurfacePoint| {
                let z = p.z;
                let z2 = z * z;
                Vec3::new(((z2 * z2 - 1.0) / (2.0 * z2)).im, (z.inv() + z).re, z.norm().ln())
            }),
            FamilySpec::RemarkContra => Arc::new(|p: &SurfacePoint| {
                let z = p.z;
                Vec3::new(z.re, -z.im, z.inv().re)
            }),
            _ => unreachable!(),
        };
        let tables = lp.tables();
        let mut wd = WeierstrassData::new(domain, Arc::new(lp), label);
        wd.laurent = tables;
        return Ok((wd, Some(closed), at_one));
    }
    match spec {
        FamilySpec::HelicoidY1 => {
            let wd = WeierstrassData::from_fns(
                punctured(&[]),
                label,
                |p| {
                    let e = p.z.exp();
                    cvec(e, I * e, I)
                },
                |p| {
                    let e = p.z.exp();
                    cvec(e, I * e, ZERO)
                },
            );
            let closed: ClosedForm = Arc::new(|p: &SurfacePoint| {
                let e = p.z.exp();
                Vec3::new(e.re, (I * e).re, (I * p.z).re)
            });
            Ok((wd, Some(closed), SurfacePoint::planar(ZERO)))
        }
        FamilySpec::HelicoidY2 => {
            let wd = WeierstrassData::from_fns(
                Domain::UnitDisk,
                label,
                |p| {
                    let (z, dz) = cayley(p.z);
                    cvec(z.cosh() * dz, I * z.sinh() * dz, I * dz)
                },
                |p| {
                    let (z, dz) = cayley(p.z);
                    // d/dzeta of f(z(zeta)) z'(zeta), with z'' = 2 z'/(1 - zeta)
                    let ddz = 2.0 * dz / (ONE - p.z);
                    cvec(
                        z.sinh() * dz * dz + z.cosh() * ddz,
                        I * (z.cosh() * dz * dz + z.sinh() * ddz),
                        I * ddz,
                    )
                },
            );
            let closed: ClosedForm = Arc::new(|p: &SurfacePoint| {
                let (z, _) = cayley(p.z);
                Vec3::new(z.sinh().re, (I * z.cosh()).re, (I * z).re)
            });
            Ok((wd, Some(closed), SurfacePoint::planar(ZERO)))
        }
        FamilySpec::Flujo { b, c } => {
            check_finite(&[*b, *c])?;
            let (b, c) = (*b, *c);
            let wd = WeierstrassData::from_fns(
                punctured(&[ONE, -ONE]),
                label,
                move |p| flujo_phi(b, c, p.z),
                move |p| flujo_dphi(b, c, p.z),
            );
            let closed: ClosedForm = Arc::new(move |p: &SurfacePoint| flujo_closed_form(b, c, p.z));
            Ok((wd, Some(closed), SurfacePoint::planar(I)))
        }
        FamilySpec::Torus { a, b } => {
            check_finite(&[*a])?;
            let a = *a;
            let domain = Domain::EllipticCurve { a };
            domain.validate()?;
            let b = b.or(torus_b).ok_or_else(|| Error::InvalidParameters("torus b not resolved".into()))?;
            check_finite(&[b])?;
            let wd = WeierstrassData::from_fns(domain.clone(), label, move |p| torus_phi(b, p), move |p| {
                torus_dphi(a, b, p)
            });
            let base = domain.lift(ONE, 1)?;
            Ok((wd, None, base))
        }
        _ => unreachable!(),
    }
}

/// A catalog family ready for analysis.
#[derive(Clone, Debug)]
pub struct Family {
    pub spec: FamilySpec,
    pub immersion: Immersion,
    pub genus: i64,
    /// Closed curves generating the homology of the surface.
    pub generators: Vec<PathSpec>,
    pub sampler: Sampler,
    pub torus: Option<TorusPeriods>,
}

impl Family {
    pub fn data(&self) -> &WeierstrassData {
        &self.immersion.data
    }

    pub fn ends(&self) -> Vec<EndChart> {
        match self.spec {
            FamilySpec::HelicoidY1 | FamilySpec::HelicoidY2 => Vec::new(),
            _ => self.data().domain.ends(),
        }
    }

    /// Shells exhausting the ends, for quasiconformality indices.
    pub fn qc_shells(&self) -> Vec<Vec<SurfacePoint>> {
        let radii = crate::gauss::default_radii();
        match self.spec {
            FamilySpec::HelicoidY1 => line_shells(&[-2.0, -3.0, -4.0, -5.0, -6.0], (-4.0, 4.0), 64),
            FamilySpec::HelicoidY2 => {
                // boundary of the disc
                radii
                    .iter()
                    .map(|r| {
                        (0..64)
                            .map(|k| {
                                let th = std::f64::consts::TAU * (k as f64 + 0.5) / 64.0;
                                SurfacePoint::planar(Complex64::from_polar(1.0 - r, th))
                            })
                            .collect()
                    })
                    .collect()
            }
            _ => {
                let ends = self.ends();
                let per_end: Vec<Vec<Vec<SurfacePoint>>> =
                    ends.iter().map(|e| end_shells(self.data(), e, &radii, 64)).collect();
                (0..radii.len()).map(|k| per_end.iter().flat_map(|s| s[k].clone()).collect()).collect()
            }
        }
    }
}

fn default_sampler(spec: &FamilySpec) -> Sampler {
    let log_polar = Sampler::LogPolar { rho: (-6.0, 6.0), n_rho: 100, n_theta: 100 };
    match spec {
        FamilySpec::HelicoidY1 => Sampler::Rect { re: (-8.0, 8.0), im: (-4.0, 4.0), nx: 100, ny: 100 },
        FamilySpec::HelicoidY2 => Sampler::LogPolar { rho: (-6.0, -1e-3), n_rho: 100, n_theta: 100 },
        FamilySpec::Flujo { .. } => Sampler::Union {
            parts: vec![log_polar, Sampler::Rect { re: (-10.0, 10.0), im: (-10.0, 10.0), nx: 200, ny: 200 }],
        },
        _ => log_polar,
    }
}

/// Parameter grid used for meshes when the caller gives no ranges.
pub fn default_mesh_grid(spec: &FamilySpec, n1: usize, n2: usize) -> MeshGrid {
    let square = MeshGrid::Rect { re: (-2.0, 2.0), im: (-2.0, 2.0), nx: n1, ny: n2 };
    match spec {
        FamilySpec::Plane | FamilySpec::HarmonicGraph { .. } => square,
        FamilySpec::HelicoidY1 => MeshGrid::Rect {
            re: (-2.0, 2.0),
            im: (-std::f64::consts::PI, std::f64::consts::PI),
            nx: n1,
            ny: n2,
        },
        FamilySpec::HelicoidY2 => MeshGrid::log_polar((-4.0, -0.05), n1, n2),
        FamilySpec::Flujo { .. } => MeshGrid::Rect { re: (-3.0, 3.0), im: (-3.0, 3.0), nx: n1, ny: n2 },
        _ => MeshGrid::log_polar((-3.0, 3.0), n1, n2),
    }
}

fn check_predicate(spec: &FamilySpec) -> Result<()> {
    let fail = |why: String| Err(Error::InvalidParameters(why));
    match spec {
        FamilySpec::Rotational { b } if !rotational_valid(b.0) => {
            fail(format!("rotational family needs b outside (-inf, 0), got {}", b))
        }
        FamilySpec::Catenoid { alpha, beta, .. } if !omega_member(alpha.0, beta.0) => {
            fail(format!("(alpha, beta) = ({alpha}, {beta}) is outside the immersion set"))
        }
        FamilySpec::Flujo { b, c } if !flujo_valid(*b, *c) => fail(format!("needs b > 3 and c < 2, got b={b}, c={c}")),
        _ => Ok(()),
    }
}

fn generators(spec: &FamilySpec, domain: &Domain) -> Result<Vec<PathSpec>> {
    match spec {
        FamilySpec::Torus { a, .. } => Ok(vec![gamma1(*a)?, gamma2(*a)?]),
        _ => match domain {
            Domain::PuncturedPlane { punctures } => punctures
                .iter()
                .map(|q| {
                    let r = EndChart::Finite { at: *q }.safe_radius(domain).min(1.0);
                    PathSpec::circle(domain, *q, r, 64, 1)
                })
                .collect(),
            _ => Ok(Vec::new()),
        },
    }
}

/// Validated family. The torus solves its period problem unless `b` is given, in which case the
/// periods are checked.
pub fn make_family(spec: &FamilySpec, cfg: &QuadConfig) -> Result<Family> {
    check_predicate(spec)?;
    build_family(spec, cfg, true)
}

/// The family without its validity predicate or period check, for diagnosing invalid
/// parameters (the immersion and period checks then locate the failure).
pub fn make_family_unchecked(spec: &FamilySpec, cfg: &QuadConfig) -> Result<Family> {
    build_family(spec, cfg, false)
}

/// Result of the family's validity predicate (true for families without one).
pub fn predicate_holds(spec: &FamilySpec) -> bool {
    check_predicate(spec).is_ok()
}

fn build_family(spec: &FamilySpec, cfg: &QuadConfig, checked: bool) -> Result<Family> {
    let mut torus = None;
    let mut torus_b = None;
    if let FamilySpec::Torus { a, b } = spec {
        Domain::EllipticCurve { a: *a }.validate()?;
        let solved = torus_period_b(*a, cfg)?;
        if let (Some(b), true) = (b, checked) {
            let r1 = gamma1_period(*a, *b, cfg)?.abs();
            if r1 > PERIOD_TOL {
                return Err(Error::InvalidParameters(format!(
                    "torus with b={b} has real period {r1:e} on gamma_1 (b(a) = {})",
                    solved.b
                )));
            }
        }
        torus_b = Some(solved.b);
        torus = Some(solved);
    }
    let (wd, closed, base) = build_data(spec, torus_b)?;
    let generators = generators(spec, &wd.domain)?;
    let genus = if matches!(spec, FamilySpec::Torus { .. }) { 1 } else { 0 };
    let immersion = match closed {
        Some(c) => Immersion::with_closed_form(wd, base, c),
        None => Immersion::by_integration(wd, base),
    };
    Ok(Family { spec: spec.clone(), immersion, genus, generators, sampler: default_sampler(spec), torus })
}

/// Every family with the parameters used throughout the examples.
pub fn reference_specs() -> Vec<FamilySpec> {
    vec![
        FamilySpec::Plane,
        FamilySpec::HarmonicGraph { coeffs: vec![CParam(ZERO), CParam(ZERO), CParam(Complex64::new(0.5, 0.2)), CParam(Complex64::new(0.0, 0.1))] },
        FamilySpec::HelicoidY1,
        FamilySpec::HelicoidY2,
        FamilySpec::rotational(Complex64::new(0.25, 0.0)),
        FamilySpec::rotational(Complex64::new(-1.0, 0.5)),
        FamilySpec::Horn { r1: 2.0, r2: 0.0 },
        FamilySpec::catenoid(Complex64::new(-3.0, 3.0), Complex64::new(-1.0, -1.0), 0.0, 0.0),
        FamilySpec::catenoid(Complex64::new(-3.0, 3.0), Complex64::new(-1.0, -1.0), 2.0, 0.0),
        FamilySpec::Flujo { b: 4.0, c: 0.0 },
        FamilySpec::Torus { a: 0.5, b: None },
        FamilySpec::NonQcY,
        FamilySpec::RemarkContra,
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weierstrass::{hopf, klotz_density};

    #[test]
    fn rotational_data_at_one() {
        let (wd, _, _) = build_data(&FamilySpec::rotational(ONE), None).unwrap();
        let p = SurfacePoint::planar(ONE);
        assert!((wd.phi(&p) - cvec(ZERO, 2.0 * I, ONE)).norm() < 1e-15);
        assert!((hopf(&wd, &p).unwrap() + 3.0).norm() < 1e-14);
    }

    #[test]
    fn helicoid_y1_at_origin() {
        let (wd, _, _) = build_data(&FamilySpec::HelicoidY1, None).unwrap();
        let p = SurfacePoint::planar(ZERO);
        assert!((wd.phi(&p) - cvec(ONE, I, I)).norm() < 1e-15);
        assert!((klotz_density(&wd, &p).unwrap() - 3.0).abs() < 1e-15);
    }

    #[test]
    fn closed_forms_differentiate_to_phi() {
        // X_u = Re phi, X_v = -Im phi
        let h = 1e-6;
        for spec in reference_specs() {
            if matches!(spec, FamilySpec::Torus { .. }) {
                continue;
            }
            let (wd, closed, _) = build_data(&spec, None).unwrap();
            let x = closed.unwrap();
            for z in [Complex64::new(0.3, 0.45), Complex64::new(-0.6, 0.2)] {
                let p = SurfacePoint::planar(z);
                let xu = (x(&SurfacePoint::planar(z + h)) - x(&SurfacePoint::planar(z - h))) / (2.0 * h);
                let xv = (x(&SurfacePoint::planar(z + I * h)) - x(&SurfacePoint::planar(z - I * h))) / (2.0 * h);
                let phi = wd.phi(&p);
                let scale = 1.0 + phi.norm();
                assert!((xu - crate::linalg::re(&phi)).norm() < 1e-6 * scale, "{} X_u", spec.name());
                assert!((xv + crate::linalg::im(&phi)).norm() < 1e-6 * scale, "{} X_v", spec.name());
            }
        }
    }

    #[test]
    fn analytic_derivatives_match_cauchy() {
        for spec in reference_specs() {
            if matches!(spec, FamilySpec::Torus { .. }) {
                continue;
            }
            let (wd, _, _) = build_data(&spec, None).unwrap();
            let p = SurfacePoint::planar(Complex64::new(0.35, 0.5));
            let exact = wd.forms.dphi(&p).unwrap();
            let num = crate::quadrature::cauchy_derivative(|z| wd.phi(&SurfacePoint::planar(z)), p.z, 0.05, 64);
            assert!((exact - num).norm() < 1e-9 * (1.0 + exact.norm()), "{}", spec.name());
        }
    }

    #[test]
    fn predicates() {
        assert!(rotational_valid(ZERO));
        assert!(!rotational_valid(-ONE));
        assert!(rotational_valid(Complex64::new(-1.0, 1e-3)));
        assert!(omega_member(Complex64::new(-3.0, 3.0), Complex64::new(-1.0, -1.0)));
        assert!(!omega_member(ONE, 2.0 * ONE));
        assert!(!omega_member(ONE, ZERO));
        assert!(flujo_valid(4.0, 0.0));
        assert!(!flujo_valid(3.0, 0.0));
        assert_eq!(catenoid_injectivity_margin(Complex64::new(-3.0, 3.0), Complex64::new(-1.0, -1.0), 1.0), 8.0);
    }

    #[test]
    fn catenoid_closed_form_at_unit_point() {
        let (a, b) = (Complex64::new(-3.0, 3.0), Complex64::new(-1.0, -1.0));
        let x = catenoid_closed_form(a, b, 0.0, 0.0, 1.0, 0.0);
        assert!((x[0] - (-2.0 + (a + b).re) / 2.0).abs() < 1e-15);
        assert_eq!(x[2], 0.0);
    }

    #[test]
    fn spec_json_roundtrip() {
        let spec = FamilySpec::catenoid(Complex64::new(-3.0, 3.0), Complex64::new(-1.0, -1.0), 2.0, 0.0);
        let s = serde_json::to_string(&spec).unwrap();
        assert!(s.contains("\"family\":\"catenoid\""));
        let back: FamilySpec = serde_json::from_str(&s).unwrap();
        assert_eq!(back, spec);
        let plane: FamilySpec = serde_json::from_str(r#"{"family":"plane"}"#).unwrap();
        assert_eq!(plane, FamilySpec::Plane);
        let t: FamilySpec = serde_json::from_str(r#"{"family":"torus","params":{"a":0.5}}"#).unwrap();
        assert_eq!(t, FamilySpec::Torus { a: 0.5, b: None });
    }

    #[test]
    fn invalid_parameters_rejected() {
        let cfg = QuadConfig::default();
        assert!(matches!(make_family(&FamilySpec::rotational(-ONE), &cfg), Err(Error::InvalidParameters(_))));
        assert!(matches!(make_family(&FamilySpec::Flujo { b: 3.0, c: 0.0 }, &cfg), Err(Error::InvalidParameters(_))));
        assert!(make_family(&FamilySpec::Torus { a: 1.5, b: None }, &cfg).is_err());
    }
}
