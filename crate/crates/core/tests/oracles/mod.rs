//! Reference computations used by the integration tests. Nothing here calls the numerical
//! routines under test beyond evaluating the Weierstrass data itself.
#![allow(dead_code)]

use harmonica::domain::SurfacePoint;
use harmonica::weierstrass::WeierstrassData;
use num_complex::Complex64;

/// |Re phi x Im phi| / ||phi||^2, zero exactly where the immersion degenerates.
pub fn wedge_ratio(phi: &[Complex64; 3]) -> f64 {
    let re = [phi[0].re, phi[1].re, phi[2].re];
    let im = [phi[0].im, phi[1].im, phi[2].im];
    let c = [
        re[1] * im[2] - re[2] * im[1],
        re[2] * im[0] - re[0] * im[2],
        re[0] * im[1] - re[1] * im[0],
    ];
    let n2: f64 = phi.iter().map(|p| p.norm_sqr()).sum();
    (c[0] * c[0] + c[1] * c[1] + c[2] * c[2]).sqrt() / n2
}

fn phi_at(wd: &WeierstrassData, z: Complex64) -> [Complex64; 3] {
    let v = wd.phi(&SurfacePoint::planar(z));
    [v[0], v[1], v[2]]
}

/// Region of the z-plane scanned by `min_wedge`.
#[derive(Clone, Copy, Debug)]
pub enum Scan {
    /// log|z| in rho, arg z over the full circle.
    LogPolar { rho: (f64, f64), n: usize },
    Rect { half: f64, n: usize },
}

/// Smallest wedge ratio over a grid, refined by 9x9 pattern search from the grid's local minima.
/// Planar domains only; points within `avoid` of a puncture in `punctures` are skipped.
pub fn min_wedge(wd: &WeierstrassData, scan: Scan, punctures: &[Complex64], avoid: f64) -> f64 {
    // coordinates (x, y) -> z
    let (to_z, lo, hi, n): (Box<dyn Fn(f64, f64) -> Complex64>, [f64; 2], [f64; 2], usize) = match scan {
        Scan::LogPolar { rho, n } => (
            Box::new(|x: f64, y: f64| Complex64::from_polar(x.exp(), y)),
            [rho.0, 0.0],
            [rho.1, std::f64::consts::TAU],
            n,
        ),
        Scan::Rect { half, n } => (Box::new(|x: f64, y: f64| Complex64::new(x, y)), [-half, -half], [half, half], n),
    };
    let f = |x: f64, y: f64| -> f64 {
        let z = to_z(x, y);
        if punctures.iter().any(|q| (z - q).norm() < avoid) {
            return f64::INFINITY;
        }
        let w = wedge_ratio(&phi_at(wd, z));
        if w.is_nan() {
            f64::INFINITY
        } else {
            w
        }
    };
    let h = [(hi[0] - lo[0]) / n as f64, (hi[1] - lo[1]) / n as f64];
    let mut grid = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            grid[i * n + j] = f(lo[0] + (i as f64 + 0.5) * h[0], lo[1] + (j as f64 + 0.5) * h[1]);
        }
    }
    // zoom seeds: discrete local minima, so one broad valley cannot crowd out a narrow zero
    let mut nodes = Vec::new();
    for i in 0..n {
        for j in 0..n {
            let v = grid[i * n + j];
            let mut low = v.is_finite();
            for (di, dj) in [(-1i64, -1i64), (-1, 0), (-1, 1), (0, -1), (0, 1), (1, -1), (1, 0), (1, 1)] {
                let (a, b) = (i as i64 + di, j as i64 + dj);
                if a >= 0 && b >= 0 && (a as usize) < n && (b as usize) < n && grid[a as usize * n + b as usize] < v {
                    low = false;
                }
            }
            if low {
                nodes.push((v, lo[0] + (i as f64 + 0.5) * h[0], lo[1] + (j as f64 + 0.5) * h[1]));
            }
        }
    }
    nodes.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut best = grid.iter().copied().fold(f64::INFINITY, f64::min);
    for &(v0, x0, y0) in nodes.iter().take(16) {
        let (mut cx, mut cy, mut v) = (x0, y0, v0);
        let mut half = [h[0], h[1]];
        for _ in 0..40 {
            // walk at this scale until the stencil stops improving, then shrink
            for _ in 0..100 {
                let (mut bx, mut by, mut bv) = (cx, cy, v);
                for a in -4..=4 {
                    for b in -4..=4 {
                        let (x, y) = (cx + half[0] * a as f64 / 4.0, cy + half[1] * b as f64 / 4.0);
                        let w = f(x, y);
                        if w < bv {
                            (bx, by, bv) = (x, y, w);
                        }
                    }
                }
                if bv >= v {
                    break;
                }
                (cx, cy, v) = (bx, by, bv);
            }
            half = [half[0] / 3.0, half[1] / 3.0];
        }
        best = best.min(v);
    }
    best
}

/// Complete elliptic integrals K(k), E(k) by the arithmetic-geometric mean.
pub fn elliptic_ke(k: f64) -> (f64, f64) {
    let (mut a, mut b) = (1.0f64, (1.0 - k * k).sqrt());
    let mut c = k;
    let mut sum = 0.5 * c * c;
    let mut pow = 0.5;
    // a and b can settle one ulp apart, so stop relative to a and cap the rounds
    for _ in 0..40 {
        if c.abs() <= f64::EPSILON * a {
            break;
        }
        let an = 0.5 * (a + b);
        let bn = (a * b).sqrt();
        c = 0.5 * (a - b);
        a = an;
        b = bn;
        pow *= 2.0;
        sum += pow * c * c;
    }
    let kk = std::f64::consts::FRAC_PI_2 / a;
    (kk, kk * (1.0 - sum))
}

/// b(a) = -2 J1 / J2 with J1 = int_0^a dz/|w| = 2 (K - E)/a and J2 = int_0^a dz/(z |w|) = 2 K,
/// after z = a sin^2 t on the slit of w^2 = (z - a)(a z - 1)/z.
pub fn torus_b(a: f64) -> f64 {
    let (k, e) = elliptic_ke(a);
    -2.0 * (k - e) / (a * k)
}
