//! Curvature of radial graphs through the vertical reduction of the kernel.
//!
//! For the two-leaf body `{|x_{n+1}| < v(|x'|)}` at the upper point over `x'`:
//!
//! ```text
//! H = 2 PV int G((v(x') - v(y')) / |x'-y'|) |x'-y'|^{-n-alpha} dy'
//!   + 2 int { G(inf) - G((v(x') + v(y')) / |x'-y'|) } |x'-y'|^{-n-alpha} dy'
//! ```
//!
//! and for the subgraph `{x_{n+1} < u(|x'|)}` only the first integral. In
//! polar coordinates `y' = x' + rho w` the integral splits into
//!
//! * a core `rho < pv_inner_radius`, where `G(-grad v(x') . w)` is subtracted
//!   (its sphere average vanishes by oddness) so the integrand is
//!   `O(rho^{-alpha})`, integrated in `u` with `rho = delta u^{1/(1-alpha)}`;
//! * a mid-field up to the truncation radius, integrated in `log rho`;
//! * a far field bounded by `2 |S^{n-1}| G(inf) R^{-alpha} / alpha`, which is
//!   reported as `error_tail` and not added to the value.
//!
//! The sphere integral is exact for `n = 1` (two directions) and a composite
//! Gauss-Kronrod rule in the polar angle for `n >= 2`, using radial symmetry
//! of the profile.

use std::f64::consts::PI;

use super::config::{CurvatureResult, QuadratureConfig};
use super::gfun::GFunction;
use super::quadrature::{gk15, integrate};
use crate::error::{Error, Result};
use crate::geometry::{norm, sphere_area, AmbientDim, Body, FractionalOrder, RadialProfile};

const ANGULAR_PANELS: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum GraphKind {
    TwoLeaf,
    Subgraph,
}

struct GraphIntegrand<'a> {
    profile: &'a RadialProfile,
    kind: GraphKind,
    g: GFunction,
    n: usize,
    r0: f64,
    v0: f64,
    slope: f64,
    sphere_lower: f64,
}

impl GraphIntegrand<'_> {
    /// Integrand of the sphere average at distance `rho`, direction with
    /// cosine `c` against `x'/|x'|`.
    #[inline]
    fn point(&self, rho: f64, c: f64, subtract: bool) -> f64 {
        let r0 = self.r0;
        let dr = if self.n == 1 {
            if c > 0.0 {
                rho
            } else if rho <= r0 {
                -rho
            } else {
                rho - 2.0 * r0
            }
        } else {
            let ry = (r0 * r0 + rho * rho + 2.0 * r0 * rho * c).max(0.0).sqrt();
            if ry + r0 == 0.0 {
                0.0
            } else {
                rho * (2.0 * r0 * c + rho) / (ry + r0)
            }
        };
        let dv = self.profile.increment(r0, dr);
        let a = -dv / rho;
        let mut k = if subtract { self.g.diff(a, -self.slope * c) } else { self.g.eval(a) };
        if self.kind == GraphKind::TwoLeaf {
            k += self.g.tail((2.0 * self.v0 + dv) / rho);
        }
        k
    }

    /// Sphere integral and its quadrature error.
    fn sphere(&self, rho: f64, subtract: bool) -> (f64, f64) {
        if self.n == 1 {
            return (self.point(rho, 1.0, subtract) + self.point(rho, -1.0, subtract), 0.0);
        }
        let w = self.n - 2;
        let f = |th: f64| [self.point(rho, th.cos(), subtract) * th.sin().powi(w as i32)];
        let (mut v, mut e) = (0.0, 0.0);
        for k in 0..ANGULAR_PANELS {
            let a = PI * k as f64 / ANGULAR_PANELS as f64;
            let b = PI * (k + 1) as f64 / ANGULAR_PANELS as f64;
            let (pv, pe) = gk15(&f, a, b);
            v += pv[0];
            e += pe;
        }
        (self.sphere_lower * v, self.sphere_lower * e)
    }
}

fn graph_curvature(
    profile: &RadialProfile,
    kind: GraphKind,
    xprime: &[f64],
    dim: AmbientDim,
    alpha: FractionalOrder,
    cfg: &QuadratureConfig,
) -> Result<CurvatureResult> {
    cfg.validate()?;
    let n = dim.n();
    if xprime.len() != n {
        return Err(Error::InvalidParameter {
            name: "xprime",
            reason: format!("expected {n} horizontal coordinates, got {}", xprime.len()),
        });
    }
    let r0 = norm(xprime);
    if !profile.is_smooth_at(r0) {
        return Err(Error::NonSmoothPoint { r: r0 });
    }
    let (v0, slope, _) = profile.eval(r0);
    if kind == GraphKind::TwoLeaf && !(v0 > 0.0) {
        return Err(Error::InvalidParameter { name: "profile", reason: format!("two-leaf height must be positive, got {v0}") });
    }
    let al = alpha.get();
    let g = GFunction::new(dim, alpha);
    let ig = GraphIntegrand {
        profile,
        kind,
        g,
        n,
        r0,
        v0,
        slope,
        sphere_lower: if n >= 2 { sphere_area(n - 2) } else { 0.0 },
    };

    // far field: |integrand| <= G(inf) on the whole sphere
    let tail_coef = 2.0 * sphere_area(n - 1) * g.infinity() / al;
    let tail_budget = 0.5 * cfg.target_tolerance;
    let mut radius = cfg.truncation_radius;
    let mut steps = 0;
    while tail_coef * radius.powf(-al) > tail_budget && steps < cfg.max_subdivisions && radius < 1e200 {
        radius *= 10.0;
        steps += 1;
    }
    let error_tail = tail_coef * radius.powf(-al);

    let delta = cfg.pv_inner_radius;
    let m = 1.0 / (1.0 - al);
    let core_scale = 2.0 * m * delta.powf(1.0 - al);
    let core = integrate(
        |u| {
            let rho = delta * u.powf(m);
            if rho == 0.0 {
                return [0.0, 0.0];
            }
            let (v, e) = ig.sphere(rho, true);
            [core_scale * v / rho, core_scale * e / rho]
        },
        0.0,
        1.0,
        &[],
        0.25 * cfg.target_tolerance,
        cfg.max_subdivisions,
    );

    let mut breaks = vec![r0];
    for b in profile.breakpoints() {
        breaks.push((b - r0).abs());
        breaks.push(b + r0);
    }
    let log_breaks: Vec<f64> = breaks.into_iter().filter(|&b| b > delta && b < radius).map(f64::ln).collect();
    let mid = integrate(
        |s| {
            let rho = s.exp();
            let w = 2.0 * rho.powf(-al);
            let (v, e) = ig.sphere(rho, false);
            [w * v, w * e]
        },
        delta.ln(),
        radius.ln(),
        &log_breaks,
        0.25 * cfg.target_tolerance,
        cfg.max_subdivisions,
    );

    Ok(CurvatureResult {
        value: core.value[0] + mid.value[0],
        error_core: core.error + core.value[1].abs(),
        error_midfield: mid.error + mid.value[1].abs(),
        error_tail,
        truncation_radius: radius,
        converged: core.converged && mid.converged && error_tail <= tail_budget,
    })
}

/// Curvature of `{|x_{n+1}| < v(|x'|)}` at `(x', +-v(|x'|))`. Both leaves
/// give the same value by mirror symmetry, so `upper_leaf` only documents
/// which point was meant.
pub fn nmc_twoleaf(
    v: &RadialProfile,
    xprime: &[f64],
    upper_leaf: bool,
    dim: AmbientDim,
    alpha: FractionalOrder,
    cfg: &QuadratureConfig,
) -> Result<CurvatureResult> {
    let _ = upper_leaf;
    graph_curvature(v, GraphKind::TwoLeaf, xprime, dim, alpha, cfg)
}

/// Curvature of `{x_{n+1} < u(|x'|)}` at `(x', u(|x'|))`.
pub fn nmc_subgraph(
    u: &RadialProfile,
    xprime: &[f64],
    dim: AmbientDim,
    alpha: FractionalOrder,
    cfg: &QuadratureConfig,
) -> Result<CurvatureResult> {
    graph_curvature(u, GraphKind::Subgraph, xprime, dim, alpha, cfg)
}

/// Dispatches a boundary point of a graph-type body to the matching formula.
pub fn nmc_graph(body: &Body, x: &[f64], dim: AmbientDim, alpha: FractionalOrder, cfg: &QuadratureConfig) -> Result<CurvatureResult> {
    let n = dim.n();
    if x.len() != n + 1 {
        return Err(Error::InvalidPoint(format!("expected {} coordinates", n + 1)));
    }
    if let Some(v) = body.two_leaf_profile() {
        return nmc_twoleaf(&v, &x[..n], x[n] >= 0.0, dim, alpha, cfg);
    }
    if let Some(u) = body.subgraph_profile() {
        return nmc_subgraph(&u, &x[..n], dim, alpha, cfg);
    }
    if let Body::Complement(inner) = body {
        let r = nmc_graph(inner, x, dim, alpha, cfg)?;
        return Ok(CurvatureResult { value: -r.value, ..r });
    }
    Err(Error::UnsupportedGeometry(format!("{} is not a radial graph", body.describe())))
}
