//! Globally adaptive 15-point Gauss-Kronrod quadrature.

use rayon::prelude::*;
use std::cmp::Ordering;
use std::collections::BinaryHeap;

use super::QValue;
use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

#[derive(Clone, Copy, Debug)]
pub struct QuadResult<T> {
    pub value: T,
    pub error: f64,
    pub evaluations: usize,
}

fn nodes(a: f64, b: f64) -> [f64; 15] {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut x = [0.0; 15];
    for j in 0..7 {
        x[2 * j] = c - h * XGK[j];
        x[2 * j + 1] = c + h * XGK[j];
    }
    x[14] = c;
    x
}

/// Applies the rule to values laid out as in `nodes`. Returns (estimate, error).
fn rule<T: QValue>(a: f64, b: f64, fv: &[T]) -> (T, f64) {
    let h = 0.5 * (b - a);
    let fc = fv[14];
    let mut k = fc.scale(WGK[7]);
    let mut g = fc.scale(WG[3]);
    for j in 0..7 {
        let pair = fv[2 * j].add(fv[2 * j + 1]);
        k = k.add(pair.scale(WGK[j]));
        if j % 2 == 1 {
            g = g.add(pair.scale(WG[j / 2]));
        }
    }
    let mean = k.scale(0.5);
    let mut asc = fc.add(mean.scale(-1.0)).mag() * WGK[7];
    let mut abs_k = fc.mag() * WGK[7];
    for j in 0..7 {
        asc += WGK[j] * (fv[2 * j].add(mean.scale(-1.0)).mag() + fv[2 * j + 1].add(mean.scale(-1.0)).mag());
        abs_k += WGK[j] * (fv[2 * j].mag() + fv[2 * j + 1].mag());
    }
    let hk = h.abs();
    let resasc = asc * hk;
    let resabs = abs_k * hk;
    let mut err = k.add(g.scale(-1.0)).mag() * hk;
    if resasc != 0.0 && err != 0.0 {
        err = resasc * (200.0 * err / resasc).powf(1.5).min(1.0);
    }
    if resabs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * resabs);
    }
    (k.scale(h), err)
}

struct Piece<T> {
    a: f64,
    b: f64,
    idx: usize,
    value: T,
    err: f64,
}

impl<T> PartialEq for Piece<T> {
    fn eq(&self, o: &Self) -> bool {
        self.err == o.err
    }
}
impl<T> Eq for Piece<T> {}
impl<T> PartialOrd for Piece<T> {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}
impl<T> Ord for Piece<T> {
    fn cmp(&self, o: &Self) -> Ordering {
        self.err.partial_cmp(&o.err).unwrap_or(Ordering::Equal)
    }
}

/// Adaptive integration over a list of intervals. `eval(idx, xs)` returns the integrand at the
/// 15 nodes `xs` of interval `idx`; it may evaluate them in parallel.
pub fn gk_adaptive_batched<T, E>(
    intervals: &[(f64, f64)],
    mut eval: E,
    abs_tol: f64,
    rel_tol: f64,
    max_subdivisions: usize,
) -> Result<QuadResult<T>>
where
    T: QValue,
    E: FnMut(usize, &[f64; 15]) -> Result<[T; 15]>,
{
    let mut heap = BinaryHeap::new();
    let mut evals = 0usize;
    let mut apply = |a: f64, b: f64, idx: usize, evals: &mut usize| -> Result<Piece<T>> {
        let xs = nodes(a, b);
        let fv = eval(idx, &xs)?;
        *evals += 15;
        if !fv.iter().all(|v| v.is_finite()) {
            return Err(Error::NonConvergent(format!("non-finite integrand on [{a}, {b}]")));
        }
        let (value, err) = rule(a, b, &fv);
        Ok(Piece { a, b, idx, value, err })
    };
    for (idx, &(a, b)) in intervals.iter().enumerate() {
        if a != b {
            heap.push(apply(a, b, idx, &mut evals)?);
        }
    }
    let sum = |heap: &BinaryHeap<Piece<T>>| {
        heap.iter().fold((T::zero(), 0.0), |(s, e), p| (s.add(p.value), e + p.err))
    };
    let (mut total, mut err) = sum(&heap);
    let mut subdivisions = 0usize;
    loop {
        if err <= abs_tol.max(rel_tol * total.mag()) || heap.is_empty() {
            // re-sum to shed drift from the running totals before accepting
            (total, err) = sum(&heap);
            if err <= abs_tol.max(rel_tol * total.mag()) || heap.is_empty() {
                return Ok(QuadResult { value: total, error: err, evaluations: evals });
            }
        }
        if subdivisions >= max_subdivisions {
            return Err(Error::NonConvergent(format!(
                "error {err:e} after {subdivisions} subdivisions"
            )));
        }
        let worst = heap.pop().unwrap();
        let mid = 0.5 * (worst.a + worst.b);
        if !(mid > worst.a.min(worst.b) && mid < worst.a.max(worst.b)) {
            return Err(Error::NonConvergent(format!(
                "interval [{}, {}] cannot be refined (error {err:e})",
                worst.a, worst.b
            )));
        }
        let left = apply(worst.a, mid, worst.idx, &mut evals)?;
        let right = apply(mid, worst.b, worst.idx, &mut evals)?;
        total = total.add(worst.value.scale(-1.0)).add(left.value).add(right.value);
        err += left.err + right.err - worst.err;
        heap.push(left);
        heap.push(right);
        subdivisions += 1;
    }
}

/// Adaptive integration of a scalar or vector valued function over [a, b].
pub fn gk_adaptive<T, F>(
    mut f: F,
    a: f64,
    b: f64,
    abs_tol: f64,
    rel_tol: f64,
    max_subdivisions: usize,
) -> Result<QuadResult<T>>
where
    T: QValue,
    F: FnMut(f64) -> T,
{
    gk_adaptive_batched(
        &[(a, b)],
        |_, xs| Ok(xs.map(&mut f)),
        abs_tol,
        rel_tol,
        max_subdivisions,
    )
}

/// Evaluates `f` at the nodes in parallel, propagating the first error.
pub(crate) fn par_nodes<T, F>(xs: &[f64; 15], f: &F) -> Result<[T; 15]>
where
    T: QValue,
    F: Fn(f64) -> Result<T> + Sync,
{
    let v: Vec<Result<T>> = xs.par_iter().map(|&x| f(x)).collect();
    let mut out = [T::zero(); 15];
    for (o, r) in out.iter_mut().zip(v) {
        *o = r?;
    }
    Ok(out)
}
