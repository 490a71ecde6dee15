//! Weierstrass data given by finite Laurent polynomials in z, with exact tables at 0 and infinity.

use num_complex::Complex64;

use crate::domain::{EndChart, SurfacePoint};
use crate::linalg::CVec3;
use crate::quadrature::LaurentTable;
use crate::weierstrass::Forms;

/// Radius attached to exact tables; only used to scale the noise floor.
const TABLE_RADIUS: f64 = 0.5;

/// phi(z) = sum c_k z^k over finitely many k.
#[derive(Clone, Debug)]
pub struct LaurentPoly {
    pub terms: Vec<(i32, CVec3)>,
}

impl LaurentPoly {
    pub fn new(terms: Vec<(i32, CVec3)>) -> Self {
        let mut merged: Vec<(i32, CVec3)> = Vec::new();
        for (k, c) in terms {
            match merged.iter_mut().find(|(j, _)| *j == k) {
                Some((_, d)) => *d += c,
                None => merged.push((k, c)),
            }
        }
        merged.sort_by_key(|(k, _)| *k);
        LaurentPoly { terms: merged }
    }

    pub fn eval(&self, z: Complex64) -> CVec3 {
        let mut acc = CVec3::zeros();
        for (k, c) in &self.terms {
            let zk = z.powi(*k);
            acc += c.map(|x| x * zk);
        }
        acc
    }

    pub fn derivative(&self, z: Complex64) -> CVec3 {
        let mut acc = CVec3::zeros();
        for (k, c) in &self.terms {
            if *k != 0 {
                let f = *k as f64 * z.powi(k - 1);
                acc += c.map(|x| x * f);
            }
        }
        acc
    }

    fn table(&self, coeff: impl Fn(i32) -> CVec3, k_min: i32, k_max: i32) -> LaurentTable {
        LaurentTable { radius: TABLE_RADIUS, k_min, coeffs: (k_min..=k_max).map(coeff).collect() }
    }

    fn coeff(&self, k: i32) -> CVec3 {
        self.terms.iter().find(|(j, _)| *j == k).map(|(_, c)| *c).unwrap_or_else(CVec3::zeros)
    }

    /// Table in the chart t = z.
    pub fn table_at_zero(&self, k_min: i32, k_max: i32) -> LaurentTable {
        self.table(|k| self.coeff(k), k_min, k_max)
    }

    /// Table of phi(1/t) (-1/t^2) in the chart t = 1/z.
    pub fn table_at_infinity(&self, k_min: i32, k_max: i32) -> LaurentTable {
        self.table(|k| -self.coeff(-k - 2), k_min, k_max)
    }

    /// Exact tables at 0 and infinity for k in [-8, 4].
    pub fn tables(&self) -> Vec<(EndChart, LaurentTable)> {
        vec![
            (EndChart::Finite { at: Complex64::new(0.0, 0.0) }, self.table_at_zero(-8, 4)),
            (EndChart::Infinity, self.table_at_infinity(-8, 4)),
        ]
    }
}

impl Forms for LaurentPoly {
    fn phi(&self, p: &SurfacePoint) -> CVec3 {
        self.eval(p.z)
    }
    fn dphi(&self, p: &SurfacePoint) -> Option<CVec3> {
        Some(self.derivative(p.z))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::cvec;
    use crate::quadrature::laurent_coefficients;

    #[test]
    fn exact_tables_match_extraction() {
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        let lp = LaurentPoly::new(vec![
            (-2, cvec(one, Complex64::new(0.0, 1.0), zero)),
            (-1, cvec(2.0 * one, zero, one)),
            (0, cvec(Complex64::new(-1.0, 1.0), Complex64::new(0.5, 0.0), zero)),
        ]);
        let at_inf = laurent_coefficients(
            |t| {
                let dz = -(t * t).inv();
                lp.eval(t.inv()).map(|c| c * dz)
            },
            0.5,
            -8,
            4,
            128,
        );
        let exact = lp.table_at_infinity(-8, 4);
        for k in -8..=4 {
            assert!((exact.coeff(k) - at_inf.coeff(k)).norm() < 1e-12, "k={k}");
        }
    }
}
