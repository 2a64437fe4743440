//! Globally adaptive Gauss-Kronrod (7, 15) integration and fixed
//! Gauss-Legendre rules.
//!
//! The integrand may return several components. Interval refinement is driven
//! by the Kronrod/Gauss discrepancy of component 0 only; the remaining
//! components are integrated on the same partition. This lets an integrand
//! carry an error density (for instance an inner quadrature's error estimate)
//! alongside its value.

use std::collections::BinaryHeap;
use std::sync::OnceLock;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Outcome of an adaptive integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult<const D: usize> {
    pub value: [f64; D],
    /// Sum of per-interval |Kronrod - Gauss| for component 0.
    pub error: f64,
    pub intervals: usize,
    pub converged: bool,
}

/// One Gauss-Kronrod 15 panel: (kronrod, |kronrod - gauss| of component 0).
pub fn gk15<const D: usize>(f: &impl Fn(f64) -> [f64; D], a: f64, b: f64) -> ([f64; D], f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = [0.0; D];
    let mut g0 = WG[3] * fc[0];
    for d in 0..D {
        k[d] = WGK[7] * fc[d];
    }
    for j in 0..7 {
        let x = h * XGK[j];
        let f1 = f(c - x);
        let f2 = f(c + x);
        for d in 0..D {
            k[d] += WGK[j] * (f1[d] + f2[d]);
        }
        if j % 2 == 1 {
            g0 += WG[j / 2] * (f1[0] + f2[0]);
        }
    }
    for v in k.iter_mut() {
        *v *= h;
    }
    let err = (k[0] - g0 * h).abs();
    (k, err)
}

struct Panel<const D: usize> {
    a: f64,
    b: f64,
    value: [f64; D],
    err: f64,
}

impl<const D: usize> PartialEq for Panel<D> {
    fn eq(&self, other: &Self) -> bool {
        self.err == other.err
    }
}
impl<const D: usize> Eq for Panel<D> {}
impl<const D: usize> PartialOrd for Panel<D> {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl<const D: usize> Ord for Panel<D> {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.err.total_cmp(&other.err)
    }
}

/// Integrates `f` over `[a, b]` split first at `breaks`, bisecting the
/// worst panel until the summed error is below `abs_tol` or `max_panels`
/// panels exist.
pub fn integrate<const D: usize>(
    f: impl Fn(f64) -> [f64; D],
    a: f64,
    b: f64,
    breaks: &[f64],
    abs_tol: f64,
    max_panels: usize,
) -> QuadResult<D> {
    let mut pts = vec![a];
    let mut inner: Vec<f64> = breaks.iter().copied().filter(|&p| p > a && p < b).collect();
    inner.sort_by(f64::total_cmp);
    pts.extend(inner);
    pts.push(b);
    let mut heap = BinaryHeap::new();
    for w in pts.windows(2) {
        if w[1] > w[0] {
            let (value, err) = gk15(&f, w[0], w[1]);
            heap.push(Panel { a: w[0], b: w[1], value, err });
        }
    }
    let total_err = |h: &BinaryHeap<Panel<D>>| h.iter().map(|p| p.err).sum::<f64>();
    let mut err = total_err(&heap);
    let max_panels = max_panels.max(heap.len());
    while err > abs_tol && heap.len() < max_panels {
        let worst = heap.pop().expect("non-empty");
        let m = 0.5 * (worst.a + worst.b);
        if !(m > worst.a && m < worst.b) {
            heap.push(worst);
            break;
        }
        let (v1, e1) = gk15(&f, worst.a, m);
        let (v2, e2) = gk15(&f, m, worst.b);
        err += e1 + e2 - worst.err;
        heap.push(Panel { a: worst.a, b: m, value: v1, err: e1 });
        heap.push(Panel { a: m, b: worst.b, value: v2, err: e2 });
    }
    let err = total_err(&heap);
    let mut value = [0.0; D];
    for p in heap.iter() {
        for (v, pv) in value.iter_mut().zip(&p.value) {
            *v += pv;
        }
    }
    QuadResult { value, error: err, intervals: heap.len(), converged: err <= abs_tol }
}

/// Scalar convenience wrapper around [`integrate`].
pub fn integrate_scalar(f: impl Fn(f64) -> f64, a: f64, b: f64, abs_tol: f64, max_panels: usize) -> QuadResult<1> {
    integrate(|x| [f(x)], a, b, &[], abs_tol, max_panels)
}

/// Gauss-Legendre nodes and weights on [-1, 1] by Newton iteration.
pub fn gauss_legendre(order: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; order];
    let mut w = vec![0.0; order];
    let nf = order as f64;
    for i in 0..order.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=order {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            let pn = if order == 1 { z } else { p1 };
            let pm = if order == 1 { 1.0 } else { p0 };
            dp = nf * (z * pn - pm) / (z * z - 1.0);
            let dz = pn / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[order - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[order - 1 - i] = wi;
    }
    (x, w)
}

pub(crate) fn gl16() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre(16))
}

pub(crate) fn gl8() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre(8))
}

/// Fixed Gauss-Legendre rule applied on `[a, b]`.
#[inline]
pub(crate) fn fixed(rule: &(Vec<f64>, Vec<f64>), a: f64, b: f64, f: impl Fn(f64) -> f64) -> f64 {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    rule.0.iter().zip(&rule.1).map(|(x, w)| w * f(c + h * x)).sum::<f64>() * h
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_integrates_polynomials_exactly() {
        for order in [1, 2, 5, 8, 16] {
            let rule = gauss_legendre(order);
            let sw: f64 = rule.1.iter().sum();
            assert!((sw - 2.0).abs() < 1e-14);
            let deg = 2 * order - 1;
            let exact = if deg % 2 == 1 { 0.0 } else { 2.0 / (deg as f64 + 1.0) };
            let got = fixed(&rule, -1.0, 1.0, |x| x.powi(deg as i32));
            assert!((got - exact).abs() < 1e-13);
            let even = fixed(&rule, 0.0, 1.0, |x| x.powi(2 * order as i32 - 2));
            assert!((even - 1.0 / (2.0 * order as f64 - 1.0)).abs() < 1e-14);
        }
    }

    #[test]
    fn adaptive_handles_endpoint_singularity() {
        let r = integrate_scalar(|x| 1.0 / x.sqrt(), 0.0, 1.0, 1e-10, 500);
        assert!((r.value[0] - 2.0).abs() < 1e-8);
        assert!(r.converged);
    }

    #[test]
    fn breaks_and_vector_components() {
        let r = integrate(|x| [x.abs(), 1.0], -1.0, 2.0, &[0.0], 1e-12, 50);
        assert!((r.value[0] - 2.5).abs() < 1e-14);
        assert!((r.value[1] - 3.0).abs() < 1e-14);
        assert_eq!(r.intervals, 2);
    }

    #[test]
    fn reports_non_convergence() {
        let r = integrate_scalar(|x| (1.0 / x).sin(), 1e-6, 1.0, 1e-14, 8);
        assert!(!r.converged);
        assert_eq!(r.intervals, 8);
    }
}
