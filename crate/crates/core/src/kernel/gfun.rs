//! The vertical kernel primitive
//! `G(t) = int_0^t (1 + tau^2)^{-(n+1+alpha)/2} dtau`.
//!
//! Integrating the fractional kernel along a vertical line turns the
//! curvature of a graph into a horizontal integral of `G`. `G` is odd,
//! increasing and 1-Lipschitz with a finite limit `G(inf)`.
//!
//! Evaluation: for `|t| <= 2` the substitution `tau = tan(theta)` gives the
//! smooth integrand `cos^{n-1+alpha}` on `[0, atan t]`, integrated with fixed
//! Gauss-Legendre panels. For `|t| > 2` the complementary tail
//! `G(inf) - G(t) = sum_k binom(-p, k) t^{-(a+2k)} / (a+2k)` (with
//! `a = n + alpha`, `p = (n+1+alpha)/2`) converges geometrically.

use std::f64::consts::FRAC_PI_4;

use super::quadrature::{fixed, gl16, gl8};
use crate::geometry::{AmbientDim, FractionalOrder};

const SERIES_FROM: f64 = 2.0;

/// `G` for a fixed `(n, alpha)`, with `G(inf)` precomputed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GFunction {
    /// `n + alpha`
    a: f64,
    /// `(n + 1 + alpha) / 2`
    p: f64,
    g_inf: f64,
}

impl GFunction {
    pub fn new(dim: AmbientDim, alpha: FractionalOrder) -> Self {
        let a = dim.n() as f64 + alpha.get();
        let mut g = Self { a, p: 0.5 * (a + 1.0), g_inf: 0.0 };
        g.g_inf = g.near(SERIES_FROM) + g.series_tail(SERIES_FROM);
        g
    }

    /// Exponent `(n + 1 + alpha) / 2` of the integrand.
    pub fn exponent(&self) -> f64 {
        self.p
    }

    #[inline]
    pub fn infinity(&self) -> f64 {
        self.g_inf
    }

    /// `G(t)`; `t = +-inf` maps to `+-G(inf)`.
    #[inline]
    pub fn eval(&self, t: f64) -> f64 {
        let s = t.abs();
        let v = if s <= SERIES_FROM { self.near(s) } else { self.g_inf - self.series_tail(s) };
        v.copysign(t)
    }

    /// `G(inf) - G(t)`, accurate when the result is small.
    #[inline]
    pub fn tail(&self, t: f64) -> f64 {
        if t > SERIES_FROM {
            self.series_tail(t)
        } else {
            self.g_inf - self.eval(t)
        }
    }

    /// `G(x) - G(y)`, accurate when `x` and `y` are close.
    #[inline]
    pub fn diff(&self, x: f64, y: f64) -> f64 {
        if (x - y).abs() <= 0.25 {
            let p = self.p;
            fixed(gl8(), y, x, |t| (1.0 + t * t).powf(-p))
        } else if x > SERIES_FROM && y > SERIES_FROM {
            self.series_tail(y) - self.series_tail(x)
        } else {
            self.eval(x) - self.eval(y)
        }
    }

    /// Derivative `(1 + t^2)^{-p}`.
    #[inline]
    pub fn derivative(&self, t: f64) -> f64 {
        (1.0 + t * t).powf(-self.p)
    }

    fn near(&self, s: f64) -> f64 {
        if s == 0.0 {
            return 0.0;
        }
        let e = self.a - 1.0;
        let f = |th: f64| th.cos().powf(e);
        let end = s.atan();
        if end <= FRAC_PI_4 {
            fixed(gl16(), 0.0, end, f)
        } else {
            fixed(gl16(), 0.0, FRAC_PI_4, f) + fixed(gl16(), FRAC_PI_4, end, f)
        }
    }

    fn series_tail(&self, t: f64) -> f64 {
        if t.is_infinite() {
            return 0.0;
        }
        let x = 1.0 / t;
        let x2 = x * x;
        let mut coef = 1.0;
        let mut pow = x.powf(self.a);
        let mut sum = 0.0;
        for k in 0..200 {
            let term = coef * pow / (self.a + 2.0 * k as f64);
            sum += term;
            if term.abs() <= 1e-18 * sum.abs() {
                break;
            }
            coef *= -(self.p + k as f64) / (k as f64 + 1.0);
            pow *= x2;
        }
        sum
    }
}

/// `G(t)` for the given dimension and order.
pub fn eval_g(t: f64, dim: AmbientDim, alpha: FractionalOrder) -> f64 {
    GFunction::new(dim, alpha).eval(t)
}

/// `lim_{t -> inf} G(t)`.
pub fn eval_g_infinity(dim: AmbientDim, alpha: FractionalOrder) -> f64 {
    GFunction::new(dim, alpha).infinity()
}
