//! End diagnostics from Laurent expansions: pole orders and weights, the finite total curvature
//! criterion, catenoidal/planar classification, limit normals and flux.

use nalgebra::Matrix3;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

use crate::domain::{EndChart, PathSpec};
use crate::error::{Error, Result};
use crate::gauss::normal_of;
use crate::linalg::{apply, im, re, rotation_onto, wedge_im, CVec3, Vec3};
use crate::quadrature::{gk_adaptive, laurent_coefficients, LaurentTable, QuadConfig};
use crate::weierstrass::{flux, Immersion, WeierstrassData, PERIOD_TOL};

/// Extracted coefficient range when no exact table is attached.
pub const K_RANGE: (i32, i32) = (-6, 2);
/// Relative noise floor for pole order detection.
pub const ORDER_NOISE: f64 = 1e-8;
/// Largest angular spread of the Gauss map on the deepest shell still counted as convergent.
pub const LIMIT_SPREAD: f64 = 1e-3;
const LIMIT_RADII: [f64; 4] = [1e-1, 1e-2, 1e-3, 1e-4];
const LIMIT_ANGLES: usize = 32;
const GROWTH_RAYS: usize = 8;
const GROWTH_SAMPLES: usize = 12;
const GROWTH_RADII: (f64, f64) = (1e-3, 1e-6);
const GROWTH_SLOPE: f64 = 1e-3;

/// Phi in the chart coordinate t.
pub fn chart_phi(wd: &WeierstrassData, chart: &EndChart, t: Complex64) -> CVec3 {
    let (p, dz) = chart.eval(t);
    wd.phi(&p).map(|c| c * dz)
}

/// Laurent table of Phi at an end: the exact one if the data carry it, else extracted.
pub fn end_table(wd: &WeierstrassData, chart: &EndChart) -> LaurentTable {
    if let Some(t) = wd.exact_laurent(chart) {
        return t.clone();
    }
    let r = chart.safe_radius(&wd.domain);
    laurent_coefficients(|t| chart_phi(wd, chart, t), r, K_RANGE.0, K_RANGE.1, 256)
}

fn rotate_table(t: &LaurentTable, m: &Matrix3<f64>) -> LaurentTable {
    LaurentTable { radius: t.radius, k_min: t.k_min, coeffs: t.coeffs.iter().map(|c| apply(m, c)).collect() }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PoleOrders {
    /// Pole order per component; negative for a zero, None for a vanishing component.
    pub orders: [Option<i32>; 3],
    /// max order - 1.
    pub weight: i32,
}

pub fn pole_orders_of(table: &LaurentTable) -> Result<PoleOrders> {
    let mut orders = [None; 3];
    for (j, o) in orders.iter_mut().enumerate() {
        *o = table.order(j, ORDER_NOISE);
        if *o == Some(-table.k_min) {
            return Err(Error::OrderOutOfRange { k_min: table.k_min });
        }
    }
    let max = orders
        .iter()
        .flatten()
        .max()
        .copied()
        .ok_or_else(|| Error::InvalidParameters("Weierstrass data vanish at the end".into()))?;
    Ok(PoleOrders { orders, weight: max - 1 })
}

pub fn pole_orders(wd: &WeierstrassData, chart: &EndChart) -> Result<PoleOrders> {
    pole_orders_of(&end_table(wd, chart))
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LimitNormal {
    /// Mean normal on the deepest shell when it converged.
    pub normal: Option<Vec3>,
    /// Largest deviation from the shell mean, per shell, outermost first.
    pub shell_spread: Vec<f64>,
    pub spread: f64,
}

impl LimitNormal {
    pub fn converged(&self) -> bool {
        self.normal.is_some()
    }
}

/// Gauss map sampled on shells |t| = 1e-1 .. 1e-4 of the end chart.
pub fn limit_normal(wd: &WeierstrassData, chart: &EndChart) -> LimitNormal {
    let scale = (chart.safe_radius(&wd.domain) / 0.1).min(1.0);
    let shells: Vec<(Vec3, f64)> = LIMIT_RADII
        .par_iter()
        .map(|r| {
            let ns: Vec<Vec3> = (0..LIMIT_ANGLES)
                .filter_map(|k| {
                    let t = Complex64::from_polar(r * scale, TAU * (k as f64 + 0.25) / LIMIT_ANGLES as f64);
                    let (p, _) = chart.eval(t);
                    normal_of(&wd.phi(&p))
                })
                .collect();
            if ns.len() < LIMIT_ANGLES {
                return (Vec3::zeros(), f64::INFINITY);
            }
            let mean = ns.iter().sum::<Vec3>();
            if mean.norm() < 1e-12 {
                return (Vec3::zeros(), 2.0);
            }
            let mean = mean.normalize();
            let spread = ns.iter().map(|n| (n - mean).norm()).fold(0.0, f64::max);
            (mean, spread)
        })
        .collect();
    let (mean, spread) = *shells.last().unwrap();
    LimitNormal {
        normal: (spread < LIMIT_SPREAD).then_some(mean),
        shell_spread: shells.iter().map(|s| s.1).collect(),
        spread,
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FtcVerdict {
    pub ftc: bool,
    pub orders: PoleOrders,
    /// Rotation applied before reading the criterion; maps the limit normal to (0,0,1).
    pub rotation: Matrix3<f64>,
    pub rotated_orders: [Option<i32>; 3],
    /// Leading coefficient ratio (R Phi)_2 / (R Phi)_1.
    pub ratio: Option<Complex64>,
    pub limit_normal: LimitNormal,
    pub reason: Option<String>,
}

fn leading_normal(c: &CVec3) -> Option<Vec3> {
    let n = wedge_im(c);
    (n.norm() > 1e-8 * c.norm_squared()).then(|| n.normalize())
}

/// Finite total curvature test at one end. The rotation comes from the limit normal, refined
/// by the normal of the leading Laurent coefficient; `reference` fixes the sign of the normal
/// so that several ends share one frame.
pub fn ftc_criterion(wd: &WeierstrassData, chart: &EndChart, reference: Option<&Vec3>) -> Result<FtcVerdict> {
    let table = end_table(wd, chart);
    ftc_with_table(wd, chart, &table, reference)
}

fn ftc_with_table(
    wd: &WeierstrassData,
    chart: &EndChart,
    table: &LaurentTable,
    reference: Option<&Vec3>,
) -> Result<FtcVerdict> {
    let orders = pole_orders_of(table)?;
    let ln = limit_normal(wd, chart);
    let Some(mut nu) = ln.normal else {
        return Err(Error::LimitNormalDiverges { spread: ln.spread });
    };
    if let Some(r) = reference {
        if nu.dot(r) < 0.0 {
            nu = -nu;
        }
    }
    let lead_k = -(orders.weight + 1);
    if let Some(n) = leading_normal(&table.coeff(lead_k)) {
        nu = if n.dot(&nu) < 0.0 { -n } else { n };
    }
    let rotation = rotation_onto(&nu, &Vec3::z());
    let rt = rotate_table(table, &rotation);
    let rotated_orders = [0, 1, 2].map(|j| rt.order(j, ORDER_NOISE));
    let top = Some(orders.weight + 1);
    let c = rt.coeff(lead_k);
    let ratio = (c[0].norm() > 0.0).then(|| c[1] / c[0]);
    let reason = if orders.weight < 1 {
        Some(format!("weight {} < 1", orders.weight))
    } else if rotated_orders[0] != top || rotated_orders[1] != top {
        Some(format!("horizontal orders {:?} differ from {}", &rotated_orders[..2], orders.weight + 1))
    } else if rotated_orders[2].is_some_and(|o| o >= orders.weight + 1) {
        Some("vertical component has a pole of top order".into())
    } else if ratio.is_some_and(|q| q.im.abs() <= 1e-8 * q.norm()) {
        Some("leading ratio is real".into())
    } else {
        None
    };
    Ok(FtcVerdict {
        ftc: reason.is_none(),
        orders,
        rotation,
        rotated_orders,
        ratio,
        limit_normal: ln,
        reason,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EndType {
    /// Logarithmic growth along the axis (a1, a2, 1) of the rotated frame; `log_growth` is the
    /// sign of the third rotated coordinate as the end is approached.
    Catenoidal { axis: [f64; 3], log_growth: i8 },
    Planar { riemann_type: bool },
    NotFtc { reason: String },
}

/// Boundedness of the remainder in the normalized expansion of an embedded end.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GrowthCheck {
    pub max_remainder: f64,
    /// Largest Theil-Sen slope of the remainder against log10(1/|t|) over the rays.
    pub slope: f64,
    pub bounded: bool,
    /// Limit of the rotated third coordinate at a planar end (closed-form families only).
    pub limit_height: Option<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EndReport {
    pub end: String,
    pub chart: EndChart,
    pub pole_orders: [Option<i32>; 3],
    pub weight: i32,
    pub limit_normal: LimitNormal,
    pub ftc: bool,
    pub rotation: Matrix3<f64>,
    pub end_type: EndType,
    /// Residue of the rotated third form.
    pub phi3_residue: Complex64,
    /// Im of the period of Phi around the puncture, counterclockwise in the chart.
    pub flux_contribution: Vec3,
    pub growth: Option<GrowthCheck>,
}

/// Median of pairwise slopes.
pub fn theil_sen(xs: &[f64], ys: &[f64]) -> f64 {
    let mut s = Vec::new();
    for i in 0..xs.len() {
        for j in i + 1..xs.len() {
            if xs[j] != xs[i] {
                s.push((ys[j] - ys[i]) / (xs[j] - xs[i]));
            }
        }
    }
    if s.is_empty() {
        return 0.0;
    }
    s.sort_by(|a, b| a.total_cmp(b));
    let n = s.len();
    if n % 2 == 1 {
        s[n / 2]
    } else {
        0.5 * (s[n / 2 - 1] + s[n / 2])
    }
}

/// Linear map normalizing the leading coefficient c of a weight-one end to (1, i, 0):
/// the inverse of [Re c | Im c | n].
pub fn end_normalization(table: &LaurentTable, third: Vec3) -> Option<Matrix3<f64>> {
    let c = table.coeff(-2);
    Matrix3::from_columns(&[re(&c), im(&c), third]).try_inverse()
}

/// Normalization of a weight-one end with `third` chosen from the leading coefficient's normal.
pub fn leading_normalization(table: &LaurentTable) -> Option<Matrix3<f64>> {
    let n = leading_normal(&table.coeff(-2))?;
    end_normalization(table, n)
}

fn segment_x(wd: &WeierstrassData, chart: &EndChart, t0: Complex64, t1: Complex64) -> Result<Vec3> {
    let d = t1 - t0;
    let r = gk_adaptive(
        |s: f64| {
            let v = chart_phi(wd, chart, t0 + d * s).map(|c| c * d);
            [v[0].re, v[1].re, v[2].re]
        },
        0.0,
        1.0,
        1e-12,
        1e-10,
        1 << 12,
    )?;
    Ok(Vec3::from(r.value))
}

fn arc_x(wd: &WeierstrassData, chart: &EndChart, r0: f64, theta: f64) -> Result<Vec3> {
    if theta == 0.0 {
        return Ok(Vec3::zeros());
    }
    let v = gk_adaptive(
        |s: f64| {
            let t = Complex64::from_polar(r0, s);
            let v = chart_phi(wd, chart, t).map(|c| c * t * Complex64::i());
            [v[0].re, v[1].re, v[2].re]
        },
        0.0,
        theta,
        1e-12,
        1e-10,
        1 << 12,
    )?;
    Ok(Vec3::from(v.value))
}

fn growth_check(
    imm: &Immersion,
    chart: &EndChart,
    table: &LaurentTable,
    rotation: &Matrix3<f64>,
    end_type: &EndType,
) -> Result<Option<GrowthCheck>> {
    let wd = &imm.data;
    let rt = rotate_table(table, rotation);
    let third = match end_type {
        EndType::Catenoidal { .. } => Vec3::z() * -rt.coeff(-1)[2].re,
        EndType::Planar { .. } => Vec3::z(),
        EndType::NotFtc { .. } => return Ok(None),
    };
    let Some(l) = end_normalization(&rt, third) else { return Ok(None) };
    let m = l * rotation;
    let scale = (chart.safe_radius(&wd.domain) / 0.1).min(1.0);
    let radii: Vec<f64> = (0..GROWTH_SAMPLES)
        .map(|i| {
            let f = i as f64 / (GROWTH_SAMPLES - 1) as f64;
            scale * GROWTH_RADII.0.powf(1.0 - f) * GROWTH_RADII.1.powf(f)
        })
        .collect();
    // X relative to the chart point radii[0], integrated along arcs and rays
    let rays: Vec<Vec<(Complex64, Vec3)>> = (0..GROWTH_RAYS)
        .into_par_iter()
        .map(|j| -> Result<Vec<(Complex64, Vec3)>> {
            let th = TAU * (j as f64 + 0.125) / GROWTH_RAYS as f64;
            let mut x = arc_x(wd, chart, radii[0], th)?;
            let mut prev = Complex64::from_polar(radii[0], th);
            let mut out = vec![(prev, x)];
            for r in &radii[1..] {
                let t = Complex64::from_polar(*r, th);
                x += segment_x(wd, chart, prev, t)?;
                out.push((t, x));
                prev = t;
            }
            Ok(out)
        })
        .collect::<Result<_>>()?;
    // constant term of the expansion, from the deepest samples
    let expansion = |t: Complex64| -> Vec3 {
        let mut acc = re(&table.coeff(-1)) * t.norm().ln();
        // orders below the leading one are noise in extracted tables
        for k in -2..=table.k_max() {
            if k != -1 {
                let tk = t.powi(k + 1) / (k + 1) as f64;
                acc += re(&table.coeff(k).map(|c| c * tk));
            }
        }
        acc
    };
    let xc = rays.iter().map(|ray| {
        let (t, x) = ray.last().unwrap();
        x - expansion(*t)
    });
    let xc = xc.sum::<Vec3>() / GROWTH_RAYS as f64;
    let res = m * re(&table.coeff(-1));
    let mut max_remainder: f64 = 0.0;
    let mut slope: f64 = 0.0;
    for ray in &rays {
        let (xs, ys): (Vec<f64>, Vec<f64>) = ray
            .iter()
            .map(|(t, x)| {
                let y = m * (x - xc);
                let v = match end_type {
                    EndType::Catenoidal { .. } => {
                        let a = (res[0] / res[2], res[1] / res[2]);
                        y[2].exp() - ((y[0] - a.0 * y[2]).powi(2) + (y[1] - a.1 * y[2]).powi(2)).sqrt()
                    }
                    _ => (y[0] * y[0] + y[1] * y[1]).sqrt() * y[2].abs(),
                };
                (-t.norm().log10(), v)
            })
            .unzip();
        max_remainder = ys.iter().fold(max_remainder, |m, v| m.max(v.abs()));
        slope = slope.max(theil_sen(&xs, &ys).abs());
    }
    let limit_height = match (end_type, &imm.closed_form) {
        (EndType::Planar { .. }, Some(f)) => {
            let deepest = *radii.last().unwrap();
            let hs: Vec<f64> = (0..GROWTH_RAYS)
                .map(|j| {
                    let t = Complex64::from_polar(deepest, TAU * (j as f64 + 0.125) / GROWTH_RAYS as f64);
                    (rotation * f(&chart.eval(t).0))[2]
                })
                .collect();
            let mean = hs.iter().sum::<f64>() / hs.len() as f64;
            hs.iter().all(|h| (h - mean).abs() < 1e-4).then_some(mean)
        }
        _ => None,
    };
    Ok(Some(GrowthCheck {
        max_remainder,
        slope,
        bounded: max_remainder.is_finite() && slope < GROWTH_SLOPE,
        limit_height,
    }))
}

/// Full report for one end.
pub fn analyze_end(imm: &Immersion, chart: &EndChart, reference: Option<&Vec3>) -> Result<EndReport> {
    let wd = &imm.data;
    let table = end_table(wd, chart);
    let orders = pole_orders_of(&table)?;
    let flux_contribution = re(&table.coeff(-1)) * TAU;
    let verdict = match ftc_with_table(wd, chart, &table, reference) {
        Ok(v) => v,
        Err(Error::LimitNormalDiverges { spread }) => {
            return Ok(EndReport {
                end: chart.label(),
                chart: *chart,
                pole_orders: orders.orders,
                weight: orders.weight,
                limit_normal: limit_normal(wd, chart),
                ftc: false,
                rotation: Matrix3::identity(),
                end_type: EndType::NotFtc { reason: format!("limit normal diverges (spread {spread:.3e})") },
                phi3_residue: table.coeff(-1)[2],
                flux_contribution,
                growth: None,
            })
        }
        Err(e) => return Err(e),
    };
    let rt = rotate_table(&table, &verdict.rotation);
    let r = rt.coeff(-1);
    let end_type = match &verdict.reason {
        Some(reason) => EndType::NotFtc { reason: reason.clone() },
        None if !rt.is_zero(-1, 2, ORDER_NOISE) => EndType::Catenoidal {
            axis: [r[0].re / r[2].re, r[1].re / r[2].re, 1.0],
            log_growth: if r[2].re > 0.0 { -1 } else { 1 },
        },
        None => EndType::Planar { riemann_type: verdict.rotated_orders[2] == Some(0) },
    };
    let growth = if orders.weight == 1 {
        growth_check(imm, chart, &table, &verdict.rotation, &end_type)?
    } else {
        None
    };
    Ok(EndReport {
        end: chart.label(),
        chart: *chart,
        pole_orders: orders.orders,
        weight: orders.weight,
        limit_normal: verdict.limit_normal,
        ftc: verdict.ftc,
        rotation: verdict.rotation,
        end_type,
        phi3_residue: r[2],
        flux_contribution,
        growth,
    })
}

/// Reports for several ends in a common frame: the first convergent limit normal fixes the
/// orientation of the others.
pub fn analyze_ends(imm: &Immersion, charts: &[EndChart]) -> Result<Vec<EndReport>> {
    let reference = charts.iter().find_map(|c| limit_normal(&imm.data, c).normal);
    charts.iter().map(|c| analyze_end(imm, c, reference.as_ref())).collect()
}

/// Largest |n_i x n_j| over pairs of convergent limit normals.
pub fn limit_normals_parallel(reports: &[EndReport]) -> f64 {
    let ns: Vec<Vec3> = reports.iter().filter_map(|r| r.limit_normal.normal).collect();
    let mut worst: f64 = 0.0;
    for i in 0..ns.len() {
        for j in i + 1..ns.len() {
            worst = worst.max(ns[i].cross(&ns[j]).norm());
        }
    }
    worst
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FluxReport {
    pub vectors: Vec<Vec3>,
    /// First two components vanish on every generator.
    pub vertical: bool,
}

pub fn flux_report(wd: &WeierstrassData, generators: &[PathSpec], cfg: &QuadConfig) -> Result<FluxReport> {
    let vectors = generators.iter().map(|g| flux(wd, g, cfg)).collect::<Result<Vec<_>>>()?;
    let vertical = vectors.iter().all(|v| v[0].abs() < PERIOD_TOL && v[1].abs() < PERIOD_TOL);
    Ok(FluxReport { vectors, vertical })
}

/// Integral of the conormal along a closed curve, sum of T x N with T the tangent of X along
/// the curve. Diagnostic only: it agrees with the flux for conformal data.
pub fn conormal_flux(wd: &WeierstrassData, path: &PathSpec, cfg: &QuadConfig) -> Result<Vec3> {
    let segs = path.resolve(&wd.domain, cfg.clearance)?;
    let mut total = Vec3::zeros();
    for seg in &segs {
        let r = gk_adaptive(
            |s: f64| {
                let p = seg.point_at(&wd.domain, s);
                let phi = wd.phi(&p);
                // dX = Re(phi dz)
                let tangent = re(&phi.map(|c| c * seg.dz));
                match normal_of(&phi) {
                    Some(n) => {
                        let v = tangent.cross(&n);
                        [v[0], v[1], v[2]]
                    }
                    None => [f64::NAN; 3],
                }
            },
            0.0,
            1.0,
            cfg.abs_tol,
            cfg.rel_tol,
            cfg.max_subdivisions,
        )?;
        total += Vec3::from(r.value);
    }
    Ok(total)
}
