//! Small helpers for real and complex 3-vectors.

use nalgebra::{Matrix3, Rotation3, Unit, Vector3};
use num_complex::Complex64;

pub type Vec3 = Vector3<f64>;
pub type CVec3 = Vector3<Complex64>;

pub fn cvec(a: Complex64, b: Complex64, c: Complex64) -> CVec3 {
    Vector3::new(a, b, c)
}

/// Complex bilinear pairing, no conjugation.
pub fn bilinear(a: &CVec3, b: &CVec3) -> Complex64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub fn herm_sq(a: &CVec3) -> f64 {
    a[0].norm_sqr() + a[1].norm_sqr() + a[2].norm_sqr()
}

pub fn re(a: &CVec3) -> Vec3 {
    a.map(|c| c.re)
}

pub fn im(a: &CVec3) -> Vec3 {
    a.map(|c| c.im)
}

pub fn real_dot(n: &Vec3, a: &CVec3) -> Complex64 {
    a[0] * n[0] + a[1] * n[1] + a[2] * n[2]
}

pub fn apply(m: &Matrix3<f64>, a: &CVec3) -> CVec3 {
    let mut out = CVec3::zeros();
    for i in 0..3 {
        out[i] = a[0] * m[(i, 0)] + a[1] * m[(i, 1)] + a[2] * m[(i, 2)];
    }
    out
}

/// Im(a2 conj a3, a3 conj a1, a1 conj a2), equal to Re a x Im a up to sign.
pub fn wedge_im(a: &CVec3) -> Vec3 {
    Vec3::new(
        (a[1] * a[2].conj()).im,
        (a[2] * a[0].conj()).im,
        (a[0] * a[1].conj()).im,
    )
}

/// Rotation taking the unit vector `from` onto `to`.
pub fn rotation_onto(from: &Vec3, to: &Vec3) -> Matrix3<f64> {
    let f = from.normalize();
    let t = to.normalize();
    match Rotation3::rotation_between(&f, &t) {
        Some(r) => *r.matrix(),
        None => {
            // antiparallel: half turn about any axis orthogonal to f
            let seed = if f[0].abs() < 0.9 { Vec3::x() } else { Vec3::y() };
            let axis = Unit::new_normalize(f.cross(&seed));
            *Rotation3::from_axis_angle(&axis, std::f64::consts::PI).matrix()
        }
    }
}

pub fn max_abs_c(a: &CVec3) -> f64 {
    a.iter().map(|c| c.norm()).fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wedge_matches_cross_of_parts() {
        let a = cvec(
            Complex64::new(1.0, 2.0),
            Complex64::new(-0.5, 0.3),
            Complex64::new(0.7, -1.1),
        );
        let w = wedge_im(&a);
        let c = re(&a).cross(&im(&a));
        assert!((w + c).norm() < 1e-14);
    }

    #[test]
    fn rotation_onto_handles_antiparallel() {
        let r = rotation_onto(&Vec3::z(), &(-Vec3::z()));
        assert!((r * Vec3::z() + Vec3::z()).norm() < 1e-14);
        let v = Vec3::new(0.3, -0.4, 0.866);
        let r = rotation_onto(&v, &Vec3::z());
        assert!((r * v.normalize() - Vec3::z()).norm() < 1e-14);
    }
}
