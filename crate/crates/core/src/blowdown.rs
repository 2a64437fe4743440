//! Blow-down of graph-type sets `E = {x_N < u(|x'|)}`.
//!
//! `E_R = E / R` has boundary profile `u_R(r) = u(R r) / R`. For a
//! sublinear `u` the blow-downs flatten: `|u_R| <= eps` on the unit ball as
//! soon as `R >= 2 C_{eps/2} / eps`. The Hölder check exercises the
//! change of variables `[grad u_R]_{beta, B_{1/4}} = R^beta [grad u]_{beta, B_{R/4}}`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Body, RadialProfile, SublinearEnvelope};

/// Profile of `E` shifted so that the origin lies on the boundary.
fn anchored_profile(e: &Body) -> Result<RadialProfile> {
    let u = e
        .subgraph_profile()
        .ok_or_else(|| Error::UnsupportedGeometry(format!("blow-down needs a graph-type body, got {}", e.describe())))?;
    let u0 = u.value(0.0);
    Ok(if u0 == 0.0 { u } else { u.shifted(-u0) })
}

/// `E_R = {y : R y ∈ E}` after the vertical translation putting 0 on `∂E`.
pub fn blowdown_rescale(e: &Body, r: f64) -> Result<Body> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::InvalidParameter { name: "R", reason: format!("must be positive, got {r}") });
    }
    if let Body::HalfSpace { .. } = e {
        return Ok(Body::HalfSpace { offset: 0.0 });
    }
    let u = anchored_profile(e)?;
    let base = Body::Subgraph(u);
    Ok(if r == 1.0 { base } else { base.scaled(1.0 / r) })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CertificateOptions {
    pub grid_points: usize,
    /// Range of the modulus computation behind the predicted threshold.
    pub modulus_range: f64,
    pub grid_tolerance: f64,
}

impl Default for CertificateOptions {
    fn default() -> Self {
        Self { grid_points: 10_000, modulus_range: 1e4, grid_tolerance: 1e-12 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlatnessCertificate {
    #[serde(rename = "R")]
    pub r: f64,
    pub epsilon: f64,
    #[serde(rename = "R_eps_predicted")]
    pub r_eps_predicted: f64,
    pub passed: bool,
    /// First sampled boundary point of `E_R` in the unit ball with `|y_N| > eps`.
    pub violator: Option<Vec<f64>>,
    pub sup: f64,
    pub inf: f64,
    /// False only if `R >= R_eps` and the certificate still failed.
    pub consistent_with_prediction: bool,
}

/// Checks `|u(R r) / R| <= eps` on `r ∈ [0, 1]` and compares with the
/// threshold predicted from the modulus of `envelope` at `eps / 2`.
pub fn flatness_certificate(
    e: &Body,
    envelope: &SublinearEnvelope,
    epsilon: f64,
    r: f64,
    opts: &CertificateOptions,
) -> Result<FlatnessCertificate> {
    if !(epsilon > 0.0 && epsilon < 0.25) {
        return Err(Error::InvalidEpsilon(epsilon));
    }
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::InvalidParameter { name: "R", reason: format!("must be positive, got {r}") });
    }
    let u = anchored_profile(e)?;
    let modulus = envelope.modulus(0.5 * epsilon, opts.modulus_range)?;
    let r_eps = 2.0 * modulus.c_delta / epsilon;

    let heights: Vec<(f64, f64)> = (0..=opts.grid_points)
        .map(|i| {
            let s = i as f64 / opts.grid_points as f64;
            (s, u.value(r * s) / r)
        })
        .collect();
    let sup = heights.iter().map(|h| h.1).fold(f64::NEG_INFINITY, f64::max);
    let inf = heights.iter().map(|h| h.1).fold(f64::INFINITY, f64::min);
    let violator = heights.iter().find(|h| h.1.abs() > epsilon + opts.grid_tolerance).map(|&(s, y)| vec![s, y]);
    let passed = violator.is_none();
    Ok(FlatnessCertificate {
        r,
        epsilon,
        r_eps_predicted: r_eps,
        passed,
        violator,
        sup,
        inf,
        consistent_with_prediction: passed || r < r_eps,
    })
}

/// Both sides of the Hölder rescaling identity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HolderCheck {
    #[serde(rename = "R")]
    pub r: f64,
    pub beta: f64,
    /// `[u']_beta` on the diameter of `B_{R/4}`.
    pub lhs: f64,
    /// `[u_R']_beta` on the diameter of `B_{1/4}`, divided by `R^beta`.
    pub rhs: f64,
}

impl HolderCheck {
    pub fn relative_gap(&self) -> f64 {
        let scale = self.lhs.abs().max(self.rhs.abs());
        if scale == 0.0 {
            0.0
        } else {
            (self.lhs - self.rhs).abs() / scale
        }
    }
}

/// Discrete `beta`-seminorm of the gradient of a radial function along a
/// diameter: grid radii `radii` on both sides of the origin, where the
/// gradient is `+-g(r)`. Non-finite gradient samples are skipped.
fn diameter_seminorm(radii: &[f64], grad: &[f64], beta: f64) -> f64 {
    (0..radii.len())
        .into_par_iter()
        .map(|i| {
            let mut best: f64 = 0.0;
            if !grad[i].is_finite() {
                return best;
            }
            for j in 0..radii.len() {
                if !grad[j].is_finite() {
                    continue;
                }
                if j > i {
                    // same side
                    best = best.max((grad[i] - grad[j]).abs() / (radii[j] - radii[i]).powf(beta));
                }
                if j >= i && radii[i] + radii[j] > 0.0 {
                    // opposite sides: gradients g e and -g e
                    best = best.max((grad[i] + grad[j]).abs() / (radii[i] + radii[j]).powf(beta));
                }
            }
            best
        })
        .reduce(|| 0.0, f64::max)
}

pub fn holder_rescaling_check(u: &RadialProfile, r: f64, beta: f64, grid_points: usize) -> Result<HolderCheck> {
    if !(beta > 0.0 && beta < 1.0) {
        return Err(Error::InvalidExponent(beta));
    }
    if !(r > 0.0 && r.is_finite()) || grid_points < 2 {
        return Err(Error::InvalidParameter { name: "R", reason: format!("must be positive, got {r}") });
    }
    let unit: Vec<f64> = (0..=grid_points).map(|i| 0.25 * i as f64 / grid_points as f64).collect();
    let radii: Vec<f64> = unit.iter().map(|s| r * s).collect();
    let grad: Vec<f64> = radii.iter().map(|&x| u.first_derivative(x)).collect();
    let lhs = diameter_seminorm(&radii, &grad, beta);

    let u_r = u.scaled(1.0 / r);
    let grad_r: Vec<f64> = unit.iter().map(|&s| u_r.first_derivative(s)).collect();
    let rhs = diameter_seminorm(&unit, &grad_r, beta) / r.powf(beta);
    Ok(HolderCheck { r, beta, lhs, rhs })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sqrt_body() -> Body {
        Body::Subgraph(RadialProfile::sqrt(1.0))
    }

    #[test]
    fn identity_rescale_keeps_membership() {
        let e = Body::Subgraph(RadialProfile::bump(1.0, 2.0));
        let e1 = blowdown_rescale(&e, 1.0).unwrap();
        for x in [[0.3, 0.01], [1.0, 0.5], [-1.5, 0.2], [0.0, -0.1]] {
            assert_eq!(e.contains(&x), e1.contains(&x));
        }
        assert_eq!(blowdown_rescale(&Body::HalfSpace { offset: 3.0 }, 7.0).unwrap(), Body::HalfSpace { offset: 0.0 });
    }

    #[test]
    fn sqrt_height_at_unit_radius() {
        let er = blowdown_rescale(&sqrt_body(), 100.0).unwrap();
        let u = er.subgraph_profile().unwrap();
        assert!((u.value(1.0) - 0.1).abs() < 1e-15);
    }

    #[test]
    fn translation_puts_origin_on_boundary() {
        let e = Body::Subgraph(RadialProfile::bump(1.0, 2.0).shifted(3.0));
        let er = blowdown_rescale(&e, 5.0).unwrap();
        assert_eq!(er.subgraph_profile().unwrap().value(0.0), 0.0);
    }

    #[test]
    fn semigroup() {
        let e = Body::Subgraph(RadialProfile::sqrt(1.0).shifted(0.5));
        let a = blowdown_rescale(&blowdown_rescale(&e, 3.0).unwrap(), 4.0).unwrap();
        let b = blowdown_rescale(&e, 12.0).unwrap();
        for i in 0..50 {
            let x = [0.1 * i as f64 - 2.5, 0.05 * (i % 7) as f64 - 0.1];
            assert_eq!(a.contains(&x), b.contains(&x), "{x:?}");
        }
    }

    #[test]
    fn flat_boundary_certifies() {
        let env = SublinearEnvelope::new(RadialProfile::constant(1.0));
        let c = flatness_certificate(&Body::HalfSpace { offset: 0.0 }, &env, 0.1, 1.0, &Default::default()).unwrap();
        assert!(c.passed);
        assert!(flatness_certificate(&Body::HalfSpace { offset: 0.0 }, &env, 0.3, 1.0, &Default::default()).is_err());
    }

    #[test]
    fn sqrt_certificate_threshold() {
        let env = SublinearEnvelope::new(RadialProfile::sqrt(1.0));
        let c = flatness_certificate(&sqrt_body(), &env, 0.1, 100.0, &Default::default()).unwrap();
        assert!((c.r_eps_predicted - 100.0).abs() < 1e-6, "{}", c.r_eps_predicted);
        assert!(c.passed && c.consistent_with_prediction);
        let below = flatness_certificate(&sqrt_body(), &env, 0.1, 99.0, &Default::default()).unwrap();
        assert!(!below.passed);
        assert!(below.sup - 0.1 > 1e-12);
        // monotone in R above the threshold
        for r in [150.0, 400.0, 1e4] {
            assert!(flatness_certificate(&sqrt_body(), &env, 0.1, r, &Default::default()).unwrap().passed);
        }
    }

    #[test]
    fn linear_graph_never_flattens() {
        let e = Body::Subgraph(RadialProfile::affine(1.0, 1.0));
        let env = SublinearEnvelope::new(RadialProfile::affine(1.0, 1.0));
        for r in [1.0, 10.0, 1e3] {
            let c = flatness_certificate(&e, &env, 0.2, r, &Default::default()).unwrap();
            assert!(!c.passed);
            assert!(c.violator.is_some());
        }
    }

    #[test]
    fn holder_identity() {
        let bump = holder_rescaling_check(&RadialProfile::bump(1.0, 2.0), 10.0, 0.5, 800).unwrap();
        assert!(bump.lhs > 0.0);
        assert!(bump.relative_gap() <= 0.01);
        let flat = holder_rescaling_check(&RadialProfile::constant(3.0), 10.0, 0.5, 200).unwrap();
        assert_eq!((flat.lhs, flat.rhs), (0.0, 0.0));
        assert!(holder_rescaling_check(&RadialProfile::constant(3.0), 10.0, 1.0, 200).is_err());
    }

    #[test]
    fn sqrt_seminorm_decays_with_r() {
        let u = RadialProfile::sqrt(1.0);
        let a = holder_rescaling_check(&u, 10.0, 0.5, 400).unwrap();
        let b = holder_rescaling_check(&u, 100.0, 0.5, 400).unwrap();
        assert!(b.lhs < a.lhs);
        assert!(a.relative_gap() <= 0.01 && b.relative_gap() <= 0.01);
    }
}
