//! Riemann surfaces carrying the Weierstrass data, points on them, ends and paths.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// A point of the surface. `w` is the fiber coordinate on the elliptic curve and `None` elsewhere.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SurfacePoint {
    pub z: Complex64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub w: Option<Complex64>,
}

impl SurfacePoint {
    pub fn planar(z: Complex64) -> Self {
        SurfacePoint { z, w: None }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Domain {
    /// The plane with finitely many points removed; infinity is always an end.
    PuncturedPlane { punctures: Vec<Complex64> },
    Annulus { r_in: f64, r_out: f64 },
    UnitDisk,
    /// w^2 = (z-a)(az-1)/z with the two points over z=0 and z=infinity removed.
    EllipticCurve { a: f64 },
}

/// Right-hand side of the torus curve.
pub fn torus_rhs(a: f64, z: Complex64) -> Complex64 {
    (z - a) * (z * a - 1.0) / z
}

/// sqrt with its cut on the positive real axis.
fn sqrt_cut_positive(x: Complex64) -> Complex64 {
    I * (-x).sqrt()
}

/// Branch of w continuous on the plane slit along [0,a] and [1/a,inf).
pub fn torus_w_slit(a: f64, z: Complex64, sheet: i8) -> Complex64 {
    let w = a.sqrt() * sqrt_cut_positive(z - a) * sqrt_cut_positive(z - 1.0 / a)
        / sqrt_cut_positive(z);
    if sheet < 0 {
        -w
    } else {
        w
    }
}

impl Domain {
    pub fn is_elliptic(&self) -> bool {
        matches!(self, Domain::EllipticCurve { .. })
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Domain::Annulus { r_in, r_out } if !(*r_in >= 0.0 && r_in < r_out) => Err(
                Error::InvalidParameters(format!("annulus needs 0 <= r_in < r_out, got {r_in}, {r_out}")),
            ),
            Domain::EllipticCurve { a } if !(*a > 0.0 && *a < 1.0) => Err(Error::InvalidParameters(
                format!("elliptic curve needs a in (0,1), got {a}"),
            )),
            _ => Ok(()),
        }
    }

    pub fn contains(&self, p: &SurfacePoint) -> bool {
        let z = p.z;
        if !(z.re.is_finite() && z.im.is_finite()) {
            return false;
        }
        match self {
            Domain::PuncturedPlane { punctures } => {
                p.w.is_none() && punctures.iter().all(|q| *q != z)
            }
            Domain::Annulus { r_in, r_out } => {
                p.w.is_none() && z.norm() > *r_in && z.norm() < *r_out
            }
            Domain::UnitDisk => p.w.is_none() && z.norm() < 1.0,
            Domain::EllipticCurve { a } => match p.w {
                None => false,
                Some(w) => {
                    if z == Complex64::new(0.0, 0.0) || !w.re.is_finite() || !w.im.is_finite() {
                        return false;
                    }
                    let f = torus_rhs(*a, z);
                    (w * w - f).norm() <= 1e-8 * (w.norm_sqr() + f.norm() + 1e-300)
                }
            },
        }
    }

    /// Point over `z`. On the elliptic curve `sheet` (+1/-1) selects the slit-plane branch.
    pub fn lift(&self, z: Complex64, sheet: i8) -> Result<SurfacePoint> {
        let p = match self {
            Domain::EllipticCurve { a } => SurfacePoint { z, w: Some(torus_w_slit(*a, z, sheet)) },
            _ => SurfacePoint::planar(z),
        };
        if self.contains(&p) {
            Ok(p)
        } else {
            Err(Error::OutsideDomain(p))
        }
    }

    /// Finite points where the z-chart is singular (punctures and branch points).
    pub fn singular_points(&self) -> Vec<Complex64> {
        match self {
            Domain::PuncturedPlane { punctures } => punctures.clone(),
            Domain::Annulus { .. } | Domain::UnitDisk => Vec::new(),
            Domain::EllipticCurve { a } => vec![
                Complex64::new(0.0, 0.0),
                Complex64::new(*a, 0.0),
                Complex64::new(1.0 / a, 0.0),
            ],
        }
    }

    /// Distance from `z` to the singular set, including domain boundaries.
    pub fn singular_distance(&self, z: Complex64) -> f64 {
        let mut d = self
            .singular_points()
            .iter()
            .map(|q| (z - q).norm())
            .fold(f64::INFINITY, f64::min);
        match self {
            Domain::Annulus { r_in, r_out } => {
                d = d.min(z.norm() - r_in).min(r_out - z.norm());
            }
            Domain::UnitDisk => d = d.min(1.0 - z.norm()),
            _ => {}
        }
        d
    }

    pub fn ends(&self) -> Vec<EndChart> {
        match self {
            Domain::PuncturedPlane { punctures } => {
                let mut v: Vec<EndChart> = punctures.iter().map(|p| EndChart::Finite { at: *p }).collect();
                v.push(EndChart::Infinity);
                v
            }
            Domain::Annulus { .. } | Domain::UnitDisk => Vec::new(),
            Domain::EllipticCurve { a } => {
                vec![EndChart::TorusZero { a: *a }, EndChart::TorusInfinity { a: *a }]
            }
        }
    }

    pub fn sheets(&self) -> &'static [i8] {
        if self.is_elliptic() {
            &[1, -1]
        } else {
            &[1]
        }
    }

    /// Point over `z` on the branch nearest to `from` (identity off the elliptic curve).
    pub fn continue_to(&self, from: &SurfacePoint, z: Complex64) -> SurfacePoint {
        match (self, from.w) {
            (Domain::EllipticCurve { a }, Some(w0)) => {
                let r = torus_rhs(*a, z).sqrt();
                let w = if (r - w0).norm() <= (r + w0).norm() { r } else { -r };
                SurfacePoint { z, w: Some(w) }
            }
            _ => SurfacePoint::planar(z),
        }
    }
}

/// Local chart t -> point around an end, t = 0 being the puncture.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EndChart {
    Finite { at: Complex64 },
    Infinity,
    /// End over z = 0 of the torus, local coordinate u = 1/w.
    TorusZero { a: f64 },
    /// End over z = infinity of the torus, local coordinate u = 1/w.
    TorusInfinity { a: f64 },
}

impl EndChart {
    pub fn label(&self) -> String {
        match self {
            EndChart::Finite { at } => format!("z={}", crate::parse::format_complex(*at)),
            EndChart::Infinity => "z=inf".into(),
            EndChart::TorusZero { .. } => "(0,inf)".into(),
            EndChart::TorusInfinity { .. } => "(inf,inf)".into(),
        }
    }

    /// Point at chart value `t` together with dz/dt.
    pub fn eval(&self, t: Complex64) -> (SurfacePoint, Complex64) {
        match self {
            EndChart::Finite { at } => (SurfacePoint::planar(at + t), Complex64::new(1.0, 0.0)),
            EndChart::Infinity => (SurfacePoint::planar(t.inv()), -(t * t).inv()),
            EndChart::TorusZero { a } | EndChart::TorusInfinity { a } => {
                let a = *a;
                let w = t.inv();
                let s = w * w + 1.0 + a * a;
                let mut sq = (s * s - 4.0 * a * a).sqrt();
                if (sq * s.conj()).re < 0.0 {
                    sq = -sq;
                }
                let z = if matches!(self, EndChart::TorusZero { .. }) {
                    2.0 * a / (s + sq)
                } else {
                    (s + sq) / (2.0 * a)
                };
                let dzdt = 2.0 * z * w / (t * t * (w * w - 2.0 * a * z + 1.0 + a * a));
                (SurfacePoint { z, w: Some(w) }, dzdt)
            }
        }
    }

    /// Radius of a punctured disc in the chart free of other singularities, halved.
    pub fn safe_radius(&self, domain: &Domain) -> f64 {
        match self {
            EndChart::Finite { at } => {
                let d = domain
                    .singular_points()
                    .iter()
                    .filter(|q| *q != at)
                    .map(|q| (at - q).norm())
                    .fold(f64::INFINITY, f64::min);
                (0.5 * d).min(0.5)
            }
            EndChart::Infinity => {
                let m = domain.singular_points().iter().map(|q| q.norm()).fold(0.0, f64::max);
                if m > 0.0 {
                    (0.5 / m).min(0.5)
                } else {
                    0.5
                }
            }
            EndChart::TorusZero { a } | EndChart::TorusInfinity { a } => 0.5 / (1.0 + a),
        }
    }
}

/// Polyline on the surface. Only the first point's fiber coordinate is used; the rest is continued.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PathSpec {
    pub points: Vec<SurfacePoint>,
    pub closed: bool,
}

/// Straight piece z(s) = start.z + s dz, s in [0,1], with a branch anchor at s = 0.
#[derive(Clone, Copy, Debug)]
pub struct Segment {
    pub start: SurfacePoint,
    pub dz: Complex64,
}

impl Segment {
    pub fn point_at(&self, domain: &Domain, s: f64) -> SurfacePoint {
        domain.continue_to(&self.start, self.start.z + self.dz * s)
    }
}

fn dist_to_segment(q: Complex64, a: Complex64, b: Complex64) -> f64 {
    let d = b - a;
    let l2 = d.norm_sqr();
    if l2 == 0.0 {
        return (q - a).norm();
    }
    let s = (((q - a) * d.conj()).re / l2).clamp(0.0, 1.0);
    (q - (a + d * s)).norm()
}

impl PathSpec {
    pub fn new(points: Vec<SurfacePoint>, closed: bool) -> Self {
        PathSpec { points, closed }
    }

    /// Closed polygon with `n` vertices on the circle |z - center| = radius, starting at angle 0.
    pub fn circle(domain: &Domain, center: Complex64, radius: f64, n: usize, sheet: i8) -> Result<Self> {
        let mut pts = Vec::with_capacity(n);
        let first = domain.lift(center + radius, sheet)?;
        pts.push(first);
        for k in 1..n {
            let th = std::f64::consts::TAU * k as f64 / n as f64;
            pts.push(SurfacePoint { z: center + Complex64::from_polar(radius, th), w: None });
        }
        if !domain.is_elliptic() {
            for p in pts.iter_mut() {
                p.w = None;
            }
        }
        Ok(PathSpec { points: pts, closed: true })
    }

    pub fn first(&self) -> Option<&SurfacePoint> {
        self.points.first()
    }

    /// Splits the path into segments short enough for nearest-root branch continuation.
    pub fn resolve(&self, domain: &Domain, clearance: f64) -> Result<Vec<Segment>> {
        if self.points.len() < 2 {
            return Err(Error::InvalidParameters("path needs at least two points".into()));
        }
        let start = self.points[0];
        if !domain.contains(&start) {
            return Err(Error::OutsideDomain(start));
        }
        let mut zs: Vec<Complex64> = self.points.iter().map(|p| p.z).collect();
        if self.closed && zs.last() != zs.first() {
            zs.push(zs[0]);
        }
        let singular = domain.singular_points();
        for pair in zs.windows(2) {
            for q in &singular {
                if dist_to_segment(*q, pair[0], pair[1]) < clearance {
                    return Err(Error::InvalidParameters(format!(
                        "path passes within {clearance:e} of singular point {q}"
                    )));
                }
            }
        }
        let mut segs = Vec::new();
        let mut cur = start;
        for pair in zs.windows(2) {
            let (a, b) = (pair[0], pair[1]);
            if !domain.is_elliptic() {
                segs.push(Segment { start: SurfacePoint::planar(a), dz: b - a });
                continue;
            }
            let total = (b - a).norm();
            let mut done = 0.0;
            while done < total {
                let here = cur.z;
                let step = (0.25 * domain.singular_distance(here)).min(total - done);
                if step <= 0.0 || !step.is_finite() {
                    return Err(Error::BranchTrackingFailed { z: here });
                }
                let next_z = if done + step >= total { b } else { a + (b - a) * ((done + step) / total) };
                let next = domain.continue_to(&cur, next_z);
                let (w0, w1) = (cur.w.unwrap(), next.w.unwrap());
                if (w1 - w0).norm() >= w1.norm().max(w0.norm()) {
                    return Err(Error::BranchTrackingFailed { z: next_z });
                }
                segs.push(Segment { start: cur, dz: next_z - here });
                cur = next;
                done += step;
            }
        }
        if self.closed && domain.is_elliptic() {
            let (w0, w1) = (start.w.unwrap(), cur.w.unwrap());
            let mismatch = (w1 - w0).norm() / w0.norm().max(1e-300);
            if mismatch > 1e-6 {
                return Err(Error::PathNotClosed { mismatch });
            }
        }
        Ok(segs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slit_branch_squares_to_curve() {
        let a = 0.5;
        for &(x, y) in &[(0.3, 0.2), (-1.0, -0.7), (3.0, 0.01), (0.7, -2.0)] {
            let z = Complex64::new(x, y);
            let w = torus_w_slit(a, z, 1);
            assert!((w * w - torus_rhs(a, z)).norm() < 1e-13);
        }
    }

    #[test]
    fn slit_branch_continuous_across_middle_interval() {
        // (a, 1/a) is not a cut
        let a = 0.5;
        let up = torus_w_slit(a, Complex64::new(1.0, 1e-12), 1);
        let down = torus_w_slit(a, Complex64::new(1.0, -1e-12), 1);
        assert!((up - down).norm() < 1e-9);
        // (0, a) is a cut
        let up = torus_w_slit(a, Complex64::new(0.2, 1e-12), 1);
        let down = torus_w_slit(a, Complex64::new(0.2, -1e-12), 1);
        assert!((up + down).norm() < 1e-9);
    }

    #[test]
    fn loop_around_one_branch_point_does_not_close() {
        let d = Domain::EllipticCurve { a: 0.5 };
        let path = PathSpec::circle(&d, Complex64::new(0.5, 0.0), 0.1, 64, 1).unwrap();
        assert!(matches!(path.resolve(&d, 1e-2), Err(Error::PathNotClosed { .. })));
        let path = PathSpec::circle(&d, Complex64::new(0.25, 0.0), 0.35, 64, 1).unwrap();
        assert!(path.resolve(&d, 1e-2).is_ok());
    }

    #[test]
    fn torus_end_charts_land_on_curve() {
        for chart in [EndChart::TorusZero { a: 0.4 }, EndChart::TorusInfinity { a: 0.4 }] {
            for &t in &[Complex64::new(0.1, 0.05), Complex64::new(-0.01, 0.02)] {
                let (p, dzdt) = chart.eval(t);
                let w = p.w.unwrap();
                assert!((w * w - torus_rhs(0.4, p.z)).norm() < 1e-9 * w.norm_sqr());
                // dz/dt against a centered difference
                let h = 1e-7;
                let fd = (chart.eval(t + h).0.z - chart.eval(t - h).0.z) / (2.0 * h);
                assert!((fd - dzdt).norm() < 1e-5 * dzdt.norm());
            }
        }
        let (p, _) = EndChart::TorusZero { a: 0.4 }.eval(Complex64::new(1e-3, 0.0));
        assert!(p.z.norm() < 1e-5);
        let (p, _) = EndChart::TorusInfinity { a: 0.4 }.eval(Complex64::new(1e-3, 0.0));
        assert!(p.z.norm() > 1e5);
    }

    #[test]
    fn contains_checks() {
        let d = Domain::PuncturedPlane { punctures: vec![Complex64::new(1.0, 0.0)] };
        assert!(!d.contains(&SurfacePoint::planar(Complex64::new(1.0, 0.0))));
        assert!(d.contains(&SurfacePoint::planar(Complex64::new(1.0, 1e-9))));
        let e = Domain::EllipticCurve { a: 0.5 };
        let mut p = e.lift(Complex64::new(0.3, 0.4), 1).unwrap();
        assert!(e.contains(&p));
        p.w = Some(p.w.unwrap() * 1.1);
        assert!(!e.contains(&p));
        assert!(Domain::UnitDisk.lift(Complex64::new(1.0, 0.0), 1).is_err());
    }
}
