//! Verification suites over a catalog family and the JSON report they produce.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::time::Instant;

use crate::catalog::{make_family_unchecked, predicate_holds, Family, FamilySpec, TorusPeriods};
use crate::curvature::{curvature_of, degree_from_total, jorge_meeks_residual};
use crate::domain::{Domain, SurfacePoint};
use crate::ends::{analyze_ends, flux_report, limit_normals_parallel, EndReport, EndType, FluxReport};
use crate::error::{Error, Result};
use crate::gauss::{frame, gauss_identity, qc_indices, rebuild_phi, QcIndices};
use crate::linalg::{bilinear, herm_sq, im, re, CVec3, Vec3};
use crate::quadrature::QuadConfig;
use crate::weierstrass::{real_periods, verify_immersion, ImmersionOptions, PERIOD_TOL};

pub const SCHEMA_VERSION: u32 = 1;

/// Tolerances of the pointwise identity suite.
pub const TOL_GAUSS: f64 = 1e-9;
pub const TOL_KLOTZ: f64 = 1e-10;
pub const TOL_CHAIN: f64 = 1e-9;
pub const TOL_AREA: f64 = 1e-10;
pub const TOL_K: f64 = 1e-12;
pub const TOL_SIGMA: f64 = 1e-9;
pub const TOL_W1: f64 = 1e-9;
pub const TOL_DEGREE: f64 = 0.05;
pub const TOL_PARALLEL: f64 = 1e-3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Identities,
    Ends,
    Curvature,
    All,
}

impl Suite {
    fn has(self, s: Suite) -> bool {
        self == Suite::All || self == s
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    /// Worst residual over the sample (for `beltrami_chain`, the most negative slack, negated).
    pub worst: f64,
    pub tolerance: f64,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub worst_at: Option<SurfacePoint>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct IdentityReport {
    pub points: usize,
    pub seed: u64,
    /// Points where phi ^ conj phi vanished and nothing could be checked.
    pub degenerate: usize,
    pub checks: Vec<Check>,
    pub pass: bool,
}

/// Random points of the family's domain, reproducible from `seed`.
pub fn identity_points(spec: &FamilySpec, domain: &Domain, n: usize, seed: u64) -> Vec<SurfacePoint> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let z = match (spec, domain) {
            (FamilySpec::HelicoidY1, _) => Complex64::new(rng.gen_range(-4.0..4.0), rng.gen_range(-4.0..4.0)),
            (_, Domain::UnitDisk) => Complex64::from_polar(0.95 * rng.gen::<f64>().sqrt(), rng.gen_range(0.0..std::f64::consts::TAU)),
            _ => Complex64::from_polar(rng.gen_range(-4.0f64..4.0).exp(), rng.gen_range(0.0..std::f64::consts::TAU)),
        };
        let sheet = if domain.is_elliptic() && rng.gen::<bool>() { -1 } else { 1 };
        if domain.singular_distance(z) < 1e-6 {
            continue;
        }
        if let Ok(p) = domain.lift(z, sheet) {
            out.push(p);
        }
    }
    out
}

/// Curvatures from the classical shape operator: (K, kappa1^2 + kappa2^2).
pub fn classical_curvatures(phi: &CVec3, dphi: &CVec3) -> (f64, f64) {
    let xu = re(phi);
    let xv = -im(phi);
    let xuu = re(dphi);
    let xuv = -im(dphi);
    let xvv = -xuu;
    let n = xu.cross(&xv).normalize();
    let first = nalgebra::Matrix2::new(xu.dot(&xu), xu.dot(&xv), xu.dot(&xv), xv.dot(&xv));
    let second = nalgebra::Matrix2::new(n.dot(&xuu), n.dot(&xuv), n.dot(&xuv), n.dot(&xvv));
    let shape = first.try_inverse().map(|inv| inv * second).unwrap_or_else(nalgebra::Matrix2::zeros);
    (shape.determinant(), (shape * shape).trace())
}

struct PointResiduals {
    p: SurfacePoint,
    r: [f64; 8],
}

fn residuals(fam: &Family, p: &SurfacePoint) -> Option<PointResiduals> {
    let wd = fam.data();
    let f = frame(wd, p).ok()?;
    let phi = f.phi;
    let a = herm_sq(&phi);
    let norm = a.sqrt();
    let h = bilinear(&phi, &phi).norm();
    let s = 2.0 * re(&phi).cross(&im(&phi)).norm();
    let ratio = h / a;
    let mu = f.mu.norm();
    let chain = (ratio - mu).min(2.0 * mu / (1.0 + mu * mu) - ratio);
    let dphi = wd.dphi(p);
    let c = curvature_of(&wd.phi(p), &dphi)?;
    let (k_classical, sigma_classical) = classical_curvatures(&wd.phi(p), &dphi);
    let rebuilt = rebuild_phi(f.g, f.lambda, f.eta);
    // the classical side inverts the first fundamental form; its error grows with the
    // condition number (a + h)^2 / s^2, so that much is forgiven on top of the tolerance
    let cond = (a + h) * (a + h) / (s * s);
    let slack = 1.0 + cond * f64::EPSILON / TOL_SIGMA;
    Some(PointResiduals {
        p: *p,
        r: [
            gauss_identity(f.g, &phi).norm() / norm,
            (a - f.lambda.norm_sqr() - f.eta.norm_sqr()).abs() / a,
            -chain,
            ((f.lambda.conj() * f.eta).re - 0.5 * s).abs() / (0.5 * s),
            c.k,
            (c.sigma2 - sigma_classical).abs() / sigma_classical.abs().max(f64::MIN_POSITIVE) / slack,
            (rebuilt - phi).norm() / norm,
            (c.k - k_classical).abs() / c.k.abs().max(sigma_classical.abs()).max(f64::MIN_POSITIVE) / slack,
        ],
    })
}

/// Pointwise identities of the Gauss-map representation at `points`.
pub fn identity_suite(fam: &Family, points: &[SurfacePoint], seed: u64) -> IdentityReport {
    let rows: Vec<Option<PointResiduals>> = points.par_iter().map(|p| residuals(fam, p)).collect();
    let degenerate = rows.iter().filter(|r| r.is_none()).count();
    let spec: [(&str, f64); 8] = [
        ("gauss_map_identity", TOL_GAUSS),
        ("klotz", TOL_KLOTZ),
        ("beltrami_chain", TOL_CHAIN),
        ("area", TOL_AREA),
        ("gauss_curvature_nonpositive", TOL_K),
        ("sigma2", TOL_SIGMA),
        ("w1_reconstruction", TOL_W1),
        ("gauss_curvature_classical", TOL_SIGMA),
    ];
    let checks: Vec<Check> = spec
        .iter()
        .enumerate()
        .map(|(k, (name, tol))| {
            let mut worst = f64::NEG_INFINITY;
            let mut at = None;
            for r in rows.iter().flatten() {
                let v = if r.r[k].is_nan() { f64::INFINITY } else { r.r[k] };
                if v > worst {
                    worst = v;
                    at = Some(r.p);
                }
            }
            Check { name: name.to_string(), worst, tolerance: *tol, pass: worst <= *tol, worst_at: at }
        })
        .collect();
    IdentityReport {
        points: points.len(),
        seed,
        degenerate,
        pass: degenerate == 0 && checks.iter().all(|c| c.pass),
        checks,
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ImmersionCheck {
    pub pass: bool,
    pub min_normalized_margin: f64,
    pub at: SurfacePoint,
    pub tolerance: f64,
    pub samples: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PeriodCheck {
    pub real_periods: Vec<Vec3>,
    pub tolerance: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EndsSummary {
    pub ends: Vec<EndReport>,
    /// Largest |n_i x n_j| over convergent limit normals.
    pub normals_parallel: f64,
    pub parallel_tolerance: f64,
    pub flux: FluxReport,
    pub flux_tolerance: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CurvatureSummary {
    pub total_curvature: f64,
    pub error: f64,
    pub sigma_integral: f64,
    pub degree: Option<i64>,
    pub degree_residual: f64,
    pub degree_tolerance: f64,
    pub weights: Vec<i32>,
    pub jorge_meeks_residual: Option<i64>,
    /// The curvature density tail does not decay at some end.
    pub diverges: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub failure: Option<String>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SuiteOutcome {
    pub suite: String,
    pub pass: bool,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub failures: Vec<String>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct VerificationReport {
    pub schema_version: u32,
    pub family: FamilySpec,
    pub predicate: bool,
    pub seed: u64,
    pub config: QuadConfig,
    pub immersion: ImmersionCheck,
    pub periods: PeriodCheck,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub torus: Option<TorusPeriods>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub identities: Option<IdentityReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub qc: Option<QcIndices>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ends: Option<EndsSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub curvature: Option<CurvatureSummary>,
    pub suites: Vec<SuiteOutcome>,
    pub pass: bool,
    /// Seconds per stage.
    pub timings: BTreeMap<String, f64>,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct VerifyOptions {
    pub suite: Suite,
    pub points: usize,
    pub seed: u64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions { suite: Suite::All, points: 10_000, seed: 0 }
    }
}

fn timed<T>(timings: &mut BTreeMap<String, f64>, name: &str, f: impl FnOnce() -> T) -> T {
    let t = Instant::now();
    let v = f();
    timings.insert(name.to_string(), t.elapsed().as_secs_f64());
    v
}

fn curvature_summary(fam: &Family, ends: Option<&EndsSummary>, cfg: &QuadConfig) -> CurvatureSummary {
    let weights: Vec<i32> = ends.map(|e| e.ends.iter().map(|r| r.weight).collect()).unwrap_or_default();
    let mut out = CurvatureSummary {
        total_curvature: f64::NAN,
        error: f64::NAN,
        sigma_integral: f64::NAN,
        degree: None,
        degree_residual: f64::NAN,
        degree_tolerance: TOL_DEGREE,
        weights: weights.clone(),
        jorge_meeks_residual: None,
        diverges: false,
        failure: None,
    };
    match crate::curvature::total_curvature(fam.data(), cfg) {
        Ok(t) => {
            out.total_curvature = t.value;
            out.error = t.error;
            out.sigma_integral = t.sigma_integral;
            let x = t.value / (-4.0 * std::f64::consts::PI);
            out.degree_residual = x - x.round();
            match degree_from_total(t.value) {
                Ok((d, _)) => {
                    out.degree = Some(d);
                    if ends.is_some() {
                        let w: Vec<i64> = weights.iter().map(|&w| w as i64).collect();
                        out.jorge_meeks_residual = Some(jorge_meeks_residual(fam.genus, &w, d));
                    }
                }
                Err(e) => out.failure = Some(e.to_string()),
            }
        }
        Err(e) => {
            out.diverges = matches!(e, Error::TailNotDecaying { .. });
            out.failure = Some(e.to_string());
        }
    }
    out
}

/// The curvature suite checks that the quadrature agrees with the end analysis: either every
/// end is FTC and the total is -4 pi times an integer degree satisfying Jorge-Meeks, or some
/// end is not FTC and the curvature integral diverges.
fn curvature_failures(c: &CurvatureSummary, ends: Option<&EndsSummary>) -> Vec<String> {
    let mut failures = Vec::new();
    let Some(ends) = ends else {
        failures.push("end analysis unavailable".into());
        return failures;
    };
    let ftc = !ends.ends.is_empty() && ends.ends.iter().all(|r| r.ftc);
    if ftc {
        if let Some(f) = &c.failure {
            failures.push(f.clone());
        }
        if c.jorge_meeks_residual.is_some_and(|r| r != 0) {
            failures.push("Jorge-Meeks residual is nonzero".into());
        }
    } else if c.failure.is_none() {
        failures.push(format!("curvature integral converged to {} although an end is not FTC", c.total_curvature));
    } else if !c.diverges {
        failures.push(c.failure.clone().unwrap_or_default());
    }
    failures
}

/// Runs the selected suites. Invalid parameters are diagnosed rather than rejected: the
/// predicate result is recorded and the immersion and period checks locate the failure.
pub fn verify(spec: &FamilySpec, cfg: &QuadConfig, opts: &VerifyOptions) -> Result<VerificationReport> {
    cfg.validate()?;
    let mut timings = BTreeMap::new();
    let fam = timed(&mut timings, "construct", || make_family_unchecked(spec, cfg))?;
    let wd = fam.data();
    let mut suites = Vec::new();

    let immersion = timed(&mut timings, "immersion", || {
        match verify_immersion(wd, &fam.sampler, &ImmersionOptions::default()) {
            Ok(r) => Ok(ImmersionCheck {
                pass: true,
                min_normalized_margin: r.min_normalized_margin,
                at: r.argmin,
                tolerance: ImmersionOptions::default().eps,
                samples: r.samples,
            }),
            Err(Error::NotImmersion { witness, margin }) => Ok(ImmersionCheck {
                pass: false,
                min_normalized_margin: margin,
                at: witness,
                tolerance: ImmersionOptions::default().eps,
                samples: fam.sampler.points(&wd.domain).len(),
            }),
            Err(e) => Err(e),
        }
    })?;
    let periods = timed(&mut timings, "periods", || real_periods(wd, &fam.generators, cfg))?;
    let periods = PeriodCheck {
        pass: periods.iter().all(|v| v.amax() < PERIOD_TOL),
        real_periods: periods,
        tolerance: PERIOD_TOL,
    };
    let mut base_failures = Vec::new();
    if !predicate_holds(spec) {
        base_failures.push("validity predicate fails".to_string());
    }
    if !immersion.pass {
        base_failures.push(format!("immersion fails at z={}", immersion.at.z));
    }
    if !periods.pass {
        base_failures.push("real periods do not vanish".to_string());
    }
    suites.push(SuiteOutcome { suite: "immersion".into(), pass: base_failures.is_empty(), failures: base_failures });

    let mut identities = None;
    let mut qc = None;
    if opts.suite.has(Suite::Identities) {
        let pts = identity_points(spec, &wd.domain, opts.points, opts.seed);
        let rep = timed(&mut timings, "identities", || identity_suite(&fam, &pts, opts.seed));
        let failures = rep.checks.iter().filter(|c| !c.pass).map(|c| c.name.clone()).collect();
        suites.push(SuiteOutcome { suite: "identities".into(), pass: rep.pass, failures });
        identities = Some(rep);
        qc = timed(&mut timings, "qc", || qc_indices(wd, &fam.qc_shells(), None)).ok();
    }

    let mut ends = None;
    if opts.suite.has(Suite::Ends) || opts.suite.has(Suite::Curvature) {
        let summary = timed(&mut timings, "ends", || -> Result<EndsSummary> {
            let reports = analyze_ends(&fam.immersion, &fam.ends())?;
            let flux = if periods.pass { flux_report(wd, &fam.generators, cfg)? } else {
                FluxReport { vectors: Vec::new(), vertical: false }
            };
            Ok(EndsSummary {
                normals_parallel: limit_normals_parallel(&reports),
                parallel_tolerance: TOL_PARALLEL,
                ends: reports,
                flux,
                flux_tolerance: PERIOD_TOL,
            })
        });
        match summary {
            Ok(s) => {
                let mut failures = Vec::new();
                let all_ftc = s.ends.iter().all(|e| e.ftc);
                if all_ftc && s.normals_parallel > TOL_PARALLEL {
                    failures.push("limit normals are not parallel".to_string());
                }
                for e in &s.ends {
                    if e.growth.as_ref().is_some_and(|g| !g.bounded) {
                        failures.push(format!("growth remainder unbounded at {}", e.end));
                    }
                }
                if opts.suite.has(Suite::Ends) {
                    suites.push(SuiteOutcome { suite: "ends".into(), pass: failures.is_empty(), failures });
                }
                ends = Some(s);
            }
            Err(e) => {
                suites.push(SuiteOutcome { suite: "ends".into(), pass: false, failures: vec![e.to_string()] });
            }
        }
    }

    let mut curvature = None;
    if opts.suite.has(Suite::Curvature) {
        let c = timed(&mut timings, "curvature", || curvature_summary(&fam, ends.as_ref(), cfg));
        let failures = curvature_failures(&c, ends.as_ref());
        suites.push(SuiteOutcome { suite: "curvature".into(), pass: failures.is_empty(), failures });
        curvature = Some(c);
    }

    let pass = suites.iter().all(|s| s.pass);
    Ok(VerificationReport {
        schema_version: SCHEMA_VERSION,
        family: spec.clone(),
        predicate: predicate_holds(spec),
        seed: opts.seed,
        config: *cfg,
        immersion,
        periods,
        torus: fam.torus,
        identities,
        qc,
        ends,
        curvature,
        suites,
        pass,
        timings,
    })
}

/// Human-readable summary of a report.
pub fn summarize(r: &VerificationReport) -> String {
    let mut s = format!("family {} ({})\n", r.family.name(), if r.pass { "PASS" } else { "FAIL" });
    s += &format!(
        "  immersion: min normalized margin {:.3e} at z={} ({})\n",
        r.immersion.min_normalized_margin,
        crate::parse::format_complex(r.immersion.at.z),
        if r.immersion.pass { "ok" } else { "fails" }
    );
    if let Some(t) = &r.torus {
        s += &format!("  torus: b(a={}) = {:.12} (gamma1 residual {:.1e})\n", t.a, t.b, t.gamma1_residual);
    }
    if let Some(q) = &r.qc {
        s += &format!("  qc: sup |h|/|phi|^2 = {:.6}, deepest shell {:.6}\n", q.sup_ratio, q.i_upper);
    }
    if let Some(e) = &r.ends {
        for end in &e.ends {
            let kind = match &end.end_type {
                EndType::Catenoidal { log_growth, .. } => format!("catenoidal, growth {log_growth:+}"),
                EndType::Planar { riemann_type } => format!("planar, riemann type {riemann_type}"),
                EndType::NotFtc { reason } => format!("not FTC: {reason}"),
            };
            s += &format!("  end {}: orders {:?}, weight {}, {}\n", end.end, end.pole_orders, end.weight, kind);
        }
        s += &format!("  flux vertical: {}\n", e.flux.vertical);
    }
    if let Some(c) = &r.curvature {
        s += &format!("  total curvature {:.9} (+- {:.1e}), degree {:?}\n", c.total_curvature, c.error, c.degree);
    }
    for su in &r.suites {
        s += &format!("  [{}] {}", if su.pass { "ok" } else { "FAIL" }, su.suite);
        if !su.failures.is_empty() {
            s += &format!(": {}", su.failures.join("; "));
        }
        s += "\n";
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_points_are_reproducible() {
        let spec = FamilySpec::Torus { a: 0.5, b: None };
        let d = Domain::EllipticCurve { a: 0.5 };
        let a = identity_points(&spec, &d, 20, 7);
        let b = identity_points(&spec, &d, 20, 7);
        assert_eq!(a, b);
        assert!(a.iter().any(|p| p.w != d.lift(p.z, 1).unwrap().w));
    }
}
