//! The sliding argument for catenoid-type candidates.
//!
//! A candidate `E = {|x_N| < h(|x'|)}` confined by a sublinear envelope is
//! shrunk by `lambda = eps0 / (8 C_{eps0/8})` so that it fits inside
//! `F_{eps0/2}`. The barriers `F_eps` are then lowered: `eps_star` is the
//! smallest `eps` with `E ⊆ F_eps`. If `eps_star` stays above the floor the
//! barrier touches `E` from outside at some point, where an
//! alpha-stationary `E` would need `H[F_eps_star] <= 0` while the barrier
//! has positive curvature.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::barrier::build_barrier;
use crate::error::{Error, Result};
use crate::geometry::{AmbientDim, Body, FractionalOrder, RadialProfile, SublinearEnvelope};
use crate::kernel::{nmc_twoleaf, CurvatureResult, QuadratureConfig};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SlideOptions {
    /// Bisection stops here; `eps_star` at the floor means no touch.
    pub floor: f64,
    pub iterations: usize,
    /// Radial extent of the containment grid.
    pub r_max: f64,
    pub grid_points: usize,
    /// Containment holds when `h - v_eps <= grid_tolerance` on the grid.
    pub grid_tolerance: f64,
}

impl Default for SlideOptions {
    fn default() -> Self {
        Self { floor: 1e-4, iterations: 30, r_max: 100.0, grid_points: 20_000, grid_tolerance: 1e-9 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum SlideVerdict {
    RigidityMechanismConfirmed,
    TouchFound,
    UnboundedTouchSequence,
}

/// A level where containment failed and the radius of the largest excess.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FailedLevel {
    pub epsilon: f64,
    pub radius: f64,
    pub excess: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlideOutcome {
    pub lambda: f64,
    pub eps_star: f64,
    pub floor: f64,
    pub touch_point: Option<Vec<f64>>,
    pub curvature_at_touch: Option<CurvatureResult>,
    pub verdict: SlideVerdict,
    pub interpretation: String,
    /// Failed containment levels in bisection order.
    pub failures: Vec<FailedLevel>,
}

/// Shrinks a two-leaf candidate confined by `envelope` so that it lies in
/// `{|y_N| < (eps0/8)(1 + |y'|)}`. Returns `(lambda, Scaled(candidate, lambda))`.
pub fn rescale_for_slide(candidate: &Body, envelope: &SublinearEnvelope, eps0: f64, r_max: f64) -> Result<(f64, Body)> {
    if !(eps0 > 0.0 && eps0 < 1.0) {
        return Err(Error::InvalidParameter { name: "eps0", reason: format!("must lie in (0, 1), got {eps0}") });
    }
    let h = candidate
        .two_leaf_profile()
        .ok_or_else(|| Error::UnsupportedGeometry(format!("sliding needs a two-leaf candidate, got {}", candidate.describe())))?;
    let delta = eps0 / 8.0;
    let modulus = envelope.modulus(delta, r_max)?;
    if !modulus.sublinear_on_range {
        return Err(Error::NotSublinear { delta, r_max });
    }
    let over = envelope.excess(&h, r_max, 20_000);
    if over > 1e-12 {
        return Err(Error::InvalidEnvelope(format!("candidate exceeds its envelope by {over:e}")));
    }
    let lambda = eps0 / (8.0 * modulus.c_delta);
    let rescaled = candidate.clone().scaled(lambda);
    let scaled_h = h.scaled(lambda);
    let steps = 20_000;
    for i in 0..=steps {
        let r = lambda * r_max * i as f64 / steps as f64;
        let bound = delta * (1.0 + r);
        if scaled_h.value(r) > bound * (1.0 + 1e-12) {
            return Err(Error::InvalidEnvelope(format!("rescaled candidate leaves the sublinear cone at r = {r}")));
        }
    }
    Ok((lambda, rescaled))
}

fn scale_factor(body: &Body) -> f64 {
    match body {
        Body::Scaled(inner, f) => f * scale_factor(inner),
        _ => 1.0,
    }
}

/// Largest `h - v_eps` on the grid and where it occurs (first maximiser).
fn max_excess(h: &RadialProfile, v: &RadialProfile, grid: &[f64]) -> (f64, f64) {
    grid.par_iter()
        .map(|&r| (h.value(r) - v.value(r), r))
        .reduce(|| (f64::NEG_INFINITY, f64::INFINITY), |a, b| if b.0 > a.0 || (b.0 == a.0 && b.1 < a.1) { b } else { a })
}

/// Slides the barriers down onto `rescaled` and classifies the outcome.
pub fn slide(
    rescaled: &Body,
    eps0: f64,
    dim: AmbientDim,
    alpha: FractionalOrder,
    cfg: &QuadratureConfig,
    opts: &SlideOptions,
) -> Result<SlideOutcome> {
    let h = rescaled
        .two_leaf_profile()
        .ok_or_else(|| Error::UnsupportedGeometry(format!("sliding needs a two-leaf candidate, got {}", rescaled.describe())))?;
    if !(opts.floor > 0.0 && opts.floor < 0.5 * eps0) {
        return Err(Error::InvalidParameter { name: "floor", reason: format!("must lie in (0, eps0/2), got {}", opts.floor) });
    }
    let grid: Vec<f64> = (0..=opts.grid_points).map(|i| opts.r_max * i as f64 / opts.grid_points as f64).collect();
    let test = |eps: f64| -> Result<(bool, f64, f64)> {
        let v = build_barrier(eps)?.profile;
        let (excess, r) = max_excess(&h, &v, &grid);
        Ok((excess <= opts.grid_tolerance, excess, r))
    };

    let start = 0.5 * eps0;
    let (inside, excess, r) = test(start)?;
    if !inside {
        return Err(Error::InitialInclusion { eps: start, r, excess });
    }
    let lambda = scale_factor(rescaled);
    let mut failures = Vec::new();
    let (floor_inside, ..) = test(opts.floor)?;
    if floor_inside {
        return Ok(SlideOutcome {
            lambda,
            eps_star: opts.floor,
            floor: opts.floor,
            touch_point: None,
            curvature_at_touch: None,
            verdict: SlideVerdict::RigidityMechanismConfirmed,
            interpretation: format!(
                "the candidate fits inside F_eps for every eps down to the floor {}; it lies in the flat slab, as the rigidity argument concludes",
                opts.floor
            ),
            failures,
        });
    }
    let (mut lo, mut hi) = (opts.floor, start);
    for _ in 0..opts.iterations {
        let mid = 0.5 * (lo + hi);
        let (inside, excess, radius) = test(mid)?;
        if inside {
            hi = mid;
        } else {
            lo = mid;
            failures.push(FailedLevel { epsilon: mid, radius, excess });
        }
    }
    let eps_star = hi;

    // the failing levels nearest eps_star all push the excess to the edge
    let escaping = failures.len() >= 3 && failures.iter().rev().take(3).all(|f| f.radius > 0.5 * opts.r_max);
    if escaping {
        return Ok(SlideOutcome {
            lambda,
            eps_star,
            floor: opts.floor,
            touch_point: None,
            curvature_at_touch: None,
            verdict: SlideVerdict::UnboundedTouchSequence,
            interpretation: format!(
                "containment keeps failing beyond radius {}: the touching points escape every bounded window, which a sublinear candidate cannot do",
                0.5 * opts.r_max
            ),
            failures,
        });
    }

    let barrier = build_barrier(eps_star)?;
    let (_, r_touch) = max_excess(&h, &barrier.profile, &grid);
    let n = dim.n();
    let mut touch = vec![0.0; dim.total()];
    touch[0] = r_touch;
    touch[n] = h.value(r_touch);
    let c = QuadratureConfig { pv_inner_radius: QuadratureConfig::for_barrier(eps_star).pv_inner_radius, ..*cfg };
    let curvature = nmc_twoleaf(&barrier.profile, &touch[..n], true, dim, alpha, &c)?;
    let sign = if curvature.lower_bound() > 0.0 {
        "is positive, contradicting the requirement H <= 0 for a stationary set touched from outside"
    } else {
        "is not certified positive, so no contradiction is drawn"
    };
    Ok(SlideOutcome {
        lambda,
        eps_star,
        floor: opts.floor,
        touch_point: Some(touch),
        curvature_at_touch: Some(curvature),
        verdict: SlideVerdict::TouchFound,
        interpretation: format!(
            "F_eps touches the candidate from outside at r = {r_touch}; if the candidate were alpha-stationary its barrier curvature there would be <= 0, and the computed H = {:.6} +- {:.1e} {sign}",
            curvature.value,
            curvature.total_error()
        ),
        failures,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn d1() -> AmbientDim {
        AmbientDim::new(1).unwrap()
    }
    fn half() -> FractionalOrder {
        FractionalOrder::new(0.5).unwrap()
    }

    #[test]
    fn constant_envelope_lambda() {
        let cand = Body::TwoLeaf(RadialProfile::constant(0.5));
        let env = SublinearEnvelope::new(RadialProfile::constant(1.0));
        let (lambda, body) = rescale_for_slide(&cand, &env, 0.05, 100.0).unwrap();
        assert!((lambda - 0.00625).abs() < 1e-15);
        assert!(matches!(body, Body::Scaled(_, f) if f == lambda));
    }

    #[test]
    fn linear_envelope_rejected() {
        let cand = Body::TwoLeaf(RadialProfile::constant(0.5));
        let env = SublinearEnvelope::new(RadialProfile::affine(1.0, 1.0));
        assert!(matches!(rescale_for_slide(&cand, &env, 0.05, 100.0), Err(Error::NotSublinear { .. })));
    }

    #[test]
    fn candidate_outside_envelope_rejected() {
        let cand = Body::TwoLeaf(RadialProfile::constant(2.0));
        let env = SublinearEnvelope::new(RadialProfile::constant(1.0));
        assert!(matches!(rescale_for_slide(&cand, &env, 0.05, 100.0), Err(Error::InvalidEnvelope(_))));
    }

    #[test]
    fn slab_touches_at_its_height() {
        let slab = Body::TwoLeaf(RadialProfile::constant(0.01));
        let out = slide(&slab, 0.05, d1(), half(), &QuadratureConfig::default(), &SlideOptions::default()).unwrap();
        assert_eq!(out.verdict, SlideVerdict::TouchFound);
        assert!((out.eps_star - 0.01).abs() < 1e-9);
        let p = out.touch_point.unwrap();
        assert!(p[0] <= 1.0);
        assert!(out.curvature_at_touch.unwrap().lower_bound() > 0.0);
    }

    #[test]
    fn empty_candidate_confirms_rigidity() {
        let out = slide(&Body::TwoLeaf(RadialProfile::constant(0.0)), 0.05, d1(), half(), &QuadratureConfig::default(), &SlideOptions::default()).unwrap();
        assert_eq!(out.verdict, SlideVerdict::RigidityMechanismConfirmed);
        assert_eq!(out.eps_star, 1e-4);
    }

    #[test]
    fn steep_candidate_fails_initial_inclusion() {
        let cand = Body::TwoLeaf(RadialProfile::affine(0.001, 0.04));
        let e = slide(&cand, 0.05, d1(), half(), &QuadratureConfig::default(), &SlideOptions::default()).unwrap_err();
        assert!(matches!(e, Error::InitialInclusion { .. }));
    }

    #[test]
    fn linear_candidate_escapes() {
        // linear growth: the excess over every barrier below the slope sits at the grid edge
        let cand = Body::TwoLeaf(RadialProfile::linear(0.02).shifted(-0.05));
        let out = slide(&cand, 0.1, d1(), half(), &QuadratureConfig::default(), &SlideOptions::default()).unwrap();
        assert_eq!(out.verdict, SlideVerdict::UnboundedTouchSequence);
    }

    #[test]
    fn containment_is_monotone_and_scale_free() {
        let h = RadialProfile::sqrt(0.01);
        let grid: Vec<f64> = (0..=2000).map(|i| i as f64 * 0.05).collect();
        let eps = [0.01, 0.02, 0.04, 0.08];
        let inside: Vec<bool> = eps.iter().map(|&e| max_excess(&h, &build_barrier(e).unwrap().profile, &grid).0 <= 1e-9).collect();
        for w in inside.windows(2) {
            assert!(!w[0] || w[1]);
        }
        let body = Body::TwoLeaf(h);
        let a = slide(&body, 0.1, d1(), half(), &QuadratureConfig::default(), &SlideOptions::default()).unwrap();
        let b = slide(&body.clone().scaled(1.0), 0.1, d1(), half(), &QuadratureConfig::default(), &SlideOptions::default()).unwrap();
        assert_eq!(a.eps_star, b.eps_star);
    }

    #[test]
    fn touch_point_lies_on_both_boundaries() {
        let cand = Body::TwoLeaf(RadialProfile::bump(0.05, 1.6).shifted(0.005));
        let opts = SlideOptions::default();
        let out = slide(&cand, 0.1, d1(), half(), &QuadratureConfig::default(), &opts).unwrap();
        assert_eq!(out.verdict, SlideVerdict::TouchFound);
        let h = cand.two_leaf_profile().unwrap();
        let v = build_barrier(out.eps_star).unwrap().profile;
        let p = out.touch_point.unwrap();
        assert!((h.value(p[0]) - v.value(p[0])).abs() <= 1e-8);
        let (excess, _) = max_excess(&h, &v, &(0..=opts.grid_points).map(|i| opts.r_max * i as f64 / opts.grid_points as f64).collect::<Vec<_>>());
        assert!(excess <= opts.grid_tolerance);
    }
}
