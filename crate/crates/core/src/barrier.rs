//! The barrier family `F_eps = {|x_N| < v_eps(|x'|)}` with
//! `v_eps = eps (eta + (1 - eta) r)`: flat of height `eps` on the unit ball,
//! the cone `|x_N| < eps |x'|` outside radius 2, glued by the cutoff `eta`.
//!
//! Far out `F_eps` coincides with the cone `C_eps`, whose curvature is
//! `M(eps) / |x|^alpha`. Positivity of the curvature of `F_eps` is checked
//! on finite boundary samples with one-sided error accounting: a sample
//! counts only if `value - total_error > 0`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{boundary_sample, AmbientDim, Body, Cutoff, FractionalOrder, Leaf, RadialProfile, SamplingSpec};
use crate::kernel::{nmc_direct, nmc_twoleaf, CurvatureResult, QuadratureConfig};

/// Largest allowed jump of the cutoff's second derivative across r = 1, 2.
const C2_TOLERANCE: f64 = 1e-6;
/// Ray points of the cone homogeneity check.
pub const CONE_RAY_RADII: [f64; 3] = [2.0, 5.0, 10.0];
/// Radius of the far-field comparison with the cone.
pub const FAR_RADIUS: f64 = 50.0;
/// Search interval and step count of the empirical `eps0` bisection.
pub const EPS0_BRACKET: (f64, f64) = (0.0, 0.5);
pub const EPS0_STEPS: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BarrierSpec {
    pub epsilon: f64,
    #[serde(skip, default = "default_cutoff")]
    pub cutoff: Cutoff,
}

fn default_cutoff() -> Cutoff {
    Cutoff::QuinticSmoothstep
}

/// A validated barrier with its measured regularity constant.
#[derive(Debug, Clone, PartialEq)]
pub struct Barrier {
    pub spec: BarrierSpec,
    pub profile: RadialProfile,
    /// Measured `C` with `max |v'| + |v''| <= C eps`.
    pub regularity_constant: f64,
}

impl Barrier {
    pub fn body(&self) -> Body {
        Body::TwoLeaf(self.profile.clone())
    }

    pub fn epsilon(&self) -> f64 {
        self.spec.epsilon
    }
}

/// Radii on which the profile invariants are asserted.
pub fn verification_grid() -> Vec<f64> {
    let mut g: Vec<f64> = (0..=800).map(|i| i as f64 * 0.005).collect();
    g.extend((1..=92).map(|i| 4.0 + 0.5 * i as f64));
    g
}

pub fn build_barrier(epsilon: f64) -> Result<Barrier> {
    build_barrier_with(epsilon, Cutoff::QuinticSmoothstep)
}

pub fn build_barrier_with(epsilon: f64, cutoff: Cutoff) -> Result<Barrier> {
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::InvalidParameter { name: "epsilon", reason: format!("must be positive, got {epsilon}") });
    }
    check_c2(cutoff)?;
    let profile = RadialProfile::barrier(epsilon, cutoff);
    let grid = verification_grid();
    let slack = 1e-12 * epsilon;
    for &r in &grid {
        let v = profile.value(r);
        let ok = if r <= 1.0 {
            (v - epsilon).abs() <= slack
        } else if r < 2.0 {
            v >= epsilon - slack && v <= epsilon * r + slack
        } else {
            (v - epsilon * r).abs() <= slack * r
        };
        if !ok || v < 0.25 * epsilon * (1.0 + r) - slack {
            return Err(Error::InvalidParameter { name: "cutoff", reason: format!("barrier bounds fail at r = {r}: v = {v}") });
        }
    }
    for w in grid.windows(2) {
        if cutoff.eval(w[1]).0 > cutoff.eval(w[0]).0 {
            return Err(Error::InvalidParameter { name: "cutoff", reason: format!("cutoff increases near r = {}", w[0]) });
        }
    }
    let regularity_constant = profile.regularity_bound(4.0, 4000) / epsilon;
    Ok(Barrier { spec: BarrierSpec { epsilon, cutoff }, profile, regularity_constant })
}

/// Rejects cutoffs whose second derivative jumps at the ends of the
/// transition annulus.
fn check_c2(cutoff: Cutoff) -> Result<()> {
    let h = 1e-9;
    for r in [1.0, 2.0] {
        let jump = (cutoff.eval(r + h).2 - cutoff.eval(r - h).2).abs();
        if jump > C2_TOLERANCE {
            return Err(Error::InvalidCutoff { r, jump });
        }
    }
    Ok(())
}

/// `|x|^alpha H` at one ray point of the cone.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RayValue {
    pub r: f64,
    pub m: f64,
    pub err: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConeConstant {
    pub epsilon: f64,
    /// Mean of the ray values.
    pub m: f64,
    /// Mean of the ray errors.
    pub err: f64,
    /// Largest pairwise difference of the ray values.
    pub residual: f64,
    pub rays: Vec<RayValue>,
}

/// `M(eps)` from the direct oracle at `|x'|` in [`CONE_RAY_RADII`] on the
/// upper cone.
pub fn cone_constant(epsilon: f64, dim: AmbientDim, alpha: FractionalOrder, cfg: &QuadratureConfig) -> Result<ConeConstant> {
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::InvalidParameter { name: "epsilon", reason: format!("must be positive, got {epsilon}") });
    }
    let body = Body::Cone { slope: epsilon };
    let al = alpha.get();
    let rays = CONE_RAY_RADII
        .par_iter()
        .enumerate()
        .map(|(i, &rp)| {
            let mut x = vec![0.0; dim.total()];
            x[0] = rp;
            x[dim.n()] = epsilon * rp;
            let c = cfg.with_seed(cfg.seed.wrapping_add(i as u64));
            let res = nmc_direct(&body, &x, dim, alpha, &c)?;
            let scale = (rp * (1.0 + epsilon * epsilon).sqrt()).powf(al);
            Ok(RayValue { r: rp, m: scale * res.value, err: scale * res.total_error() })
        })
        .collect::<Result<Vec<_>>>()?;
    let pairs: Vec<(f64, f64)> = rays
        .iter()
        .enumerate()
        .flat_map(|(i, a)| rays[i + 1..].iter().map(move |b| ((a.m - b.m).abs(), 3.0 * (a.err + b.err))))
        .collect();
    if let Some(&(residual, allowed)) = pairs.iter().find(|(d, allow)| d > allow) {
        return Err(Error::HomogeneityViolation { residual, allowed });
    }
    let residual = pairs.iter().map(|p| p.0).fold(0.0, f64::max);
    let k = rays.len() as f64;
    Ok(ConeConstant {
        epsilon,
        m: rays.iter().map(|r| r.m).sum::<f64>() / k,
        err: rays.iter().map(|r| r.err).sum::<f64>() / k,
        residual,
        rays,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConeConstantReport {
    pub epsilons: Vec<f64>,
    pub m_values: Vec<f64>,
    pub errors: Vec<f64>,
    pub residuals: Vec<f64>,
    /// `Some(true)` when every step down the grid raises `M` beyond both
    /// error bars; `None` for a single point.
    pub blowup_trend: Option<bool>,
}

/// `M` along a strictly decreasing grid of slopes.
pub fn sweep_cone_constant(grid: &[f64], dim: AmbientDim, alpha: FractionalOrder, cfg: &QuadratureConfig) -> Result<ConeConstantReport> {
    if grid.is_empty() || grid.windows(2).any(|w| !(w[1] < w[0])) || grid.iter().any(|&e| !(e > 0.0)) {
        return Err(Error::InvalidParameter { name: "grid", reason: "epsilons must be positive and strictly decreasing".into() });
    }
    let values = grid.iter().map(|&e| cone_constant(e, dim, alpha, cfg)).collect::<Result<Vec<_>>>()?;
    let blowup_trend = (values.len() > 1).then(|| values.windows(2).all(|w| w[1].m - w[1].err > w[0].m + w[0].err));
    Ok(ConeConstantReport {
        epsilons: grid.to_vec(),
        m_values: values.iter().map(|v| v.m).collect(),
        errors: values.iter().map(|v| v.err).collect(),
        residuals: values.iter().map(|v| v.residual).collect(),
        blowup_trend,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict {
    /// Every sample has `value - total_error > 0`.
    Positive,
    NotPositive,
    /// Some evaluation failed.
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleValue {
    pub point: Vec<f64>,
    #[serde(rename = "H")]
    pub h: f64,
    pub err: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FarFieldCheck {
    pub r: f64,
    /// `|x|^alpha H` of the barrier at radius `r`.
    pub scaled_h: f64,
    pub cone_m: f64,
    pub relative_difference: f64,
    pub within_five_percent: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClosureCheck {
    pub epsilon: f64,
    pub verdict: Verdict,
    /// The half-height barrier is verified positive as well.
    pub agrees: bool,
}

/// Result of [`verify_barrier`]. The verdict covers the listed samples
/// only; it is not a proof over the whole boundary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BarrierReport {
    pub epsilon: f64,
    pub n: usize,
    pub alpha: f64,
    pub regularity_constant: f64,
    pub samples: Vec<SampleValue>,
    pub failures: Vec<String>,
    /// `min (value - total_error)` over the samples.
    pub min_margin: f64,
    pub verdict: Verdict,
    /// Upper and lower leaf samples at equal radius gave identical results.
    pub leaves_symmetric: bool,
    pub far_field: Option<FarFieldCheck>,
    pub closure: Option<ClosureCheck>,
    /// Largest bisection point of (0, 1/2) with a positive verdict.
    pub empirical_eps0: Option<f64>,
}

/// Default samples: dense on `B_4` with extra points around r = 1 and r = 2,
/// geometric ray points out to r = 50, both leaves.
pub fn default_sampling() -> SamplingSpec {
    let mut radii: Vec<f64> = (0..=120).map(|i| i as f64 / 30.0).collect();
    radii.extend(SamplingSpec::geometric(4.2, FAR_RADIUS, 20).radii);
    SamplingSpec::radial(radii).refined(&[1.0, 2.0], 0.06, 13).with_leaf(Leaf::Both)
}

struct SampleRun {
    samples: Vec<SampleValue>,
    failures: Vec<String>,
    min_margin: f64,
    verdict: Verdict,
    leaves_symmetric: bool,
}

fn evaluate_samples(barrier: &Barrier, dim: AmbientDim, alpha: FractionalOrder, cfg: &QuadratureConfig, spec: &SamplingSpec) -> Result<SampleRun> {
    let n = dim.n();
    let points = boundary_sample(&barrier.body(), dim, spec)?;
    let results: Vec<(Vec<f64>, std::result::Result<CurvatureResult, Error>)> = points
        .par_iter()
        .map(|s| {
            let upper = s.point[n] >= 0.0;
            (s.point.clone(), nmc_twoleaf(&barrier.profile, &s.point[..n], upper, dim, alpha, cfg))
        })
        .collect();
    let mut samples = Vec::with_capacity(results.len());
    let mut failures = Vec::new();
    let mut min_margin = f64::INFINITY;
    for (point, res) in results {
        match res {
            Ok(c) => {
                min_margin = min_margin.min(c.lower_bound());
                samples.push(SampleValue { point, h: c.value, err: c.total_error() });
            }
            Err(e) => failures.push(format!("{point:?}: {e}")),
        }
    }
    // mirrored samples must agree exactly
    let leaves_symmetric = samples.iter().all(|a| {
        samples
            .iter()
            .filter(|b| b.point[..n] == a.point[..n] && b.point[n] == -a.point[n])
            .all(|b| b.h == a.h && b.err == a.err)
    });
    let verdict = if !failures.is_empty() || samples.is_empty() {
        Verdict::Inconclusive
    } else if min_margin > 0.0 {
        Verdict::Positive
    } else {
        Verdict::NotPositive
    };
    Ok(SampleRun { samples, failures, min_margin, verdict, leaves_symmetric })
}

/// Sample verdict alone, as used by the bisection and the closure check.
pub fn barrier_verdict(epsilon: f64, dim: AmbientDim, alpha: FractionalOrder, cfg: &QuadratureConfig, spec: &SamplingSpec) -> Result<Verdict> {
    let barrier = build_barrier(epsilon)?;
    let c = QuadratureConfig { pv_inner_radius: QuadratureConfig::for_barrier(epsilon).pv_inner_radius, ..*cfg };
    Ok(evaluate_samples(&barrier, dim, alpha, &c, spec)?.verdict)
}

/// Bisection for the largest `eps` in (0, 1/2) with a positive verdict,
/// assuming positivity persists below it.
pub fn empirical_eps0(dim: AmbientDim, alpha: FractionalOrder, cfg: &QuadratureConfig, spec: &SamplingSpec) -> Result<Option<f64>> {
    let (mut lo, mut hi) = EPS0_BRACKET;
    for _ in 0..EPS0_STEPS {
        let mid = 0.5 * (lo + hi);
        if barrier_verdict(mid, dim, alpha, cfg, spec)? == Verdict::Positive {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok((lo > 0.0).then_some(lo))
}

/// Which optional parts of the verification to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VerifyOptions {
    pub far_field: bool,
    pub closure: bool,
    pub bisect: bool,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self { far_field: true, closure: true, bisect: true }
    }
}

/// Evaluates the curvature of `F_eps` on `spec` and collects the checks.
/// `cfg.pv_inner_radius` is tied to `eps` as `min(0.1, eps / 2)`.
pub fn verify_barrier(
    epsilon: f64,
    dim: AmbientDim,
    alpha: FractionalOrder,
    cfg: &QuadratureConfig,
    spec: &SamplingSpec,
    options: VerifyOptions,
) -> Result<BarrierReport> {
    let barrier = build_barrier(epsilon)?;
    let c = QuadratureConfig { pv_inner_radius: QuadratureConfig::for_barrier(epsilon).pv_inner_radius, ..*cfg };
    let run = evaluate_samples(&barrier, dim, alpha, &c, spec)?;

    let far_field = if options.far_field {
        let mut xp = vec![0.0; dim.n()];
        xp[0] = FAR_RADIUS;
        let h = nmc_twoleaf(&barrier.profile, &xp, true, dim, alpha, &c)?;
        let x_norm = FAR_RADIUS * (1.0 + epsilon * epsilon).sqrt();
        let scaled_h = x_norm.powf(alpha.get()) * h.value;
        let cone = cone_constant(epsilon, dim, alpha, cfg)?;
        let rel = (scaled_h - cone.m).abs() / cone.m.abs();
        Some(FarFieldCheck { r: FAR_RADIUS, scaled_h, cone_m: cone.m, relative_difference: rel, within_five_percent: rel <= 0.05 })
    } else {
        None
    };
    let closure = if options.closure && run.verdict == Verdict::Positive {
        let verdict = barrier_verdict(0.5 * epsilon, dim, alpha, cfg, spec)?;
        Some(ClosureCheck { epsilon: 0.5 * epsilon, verdict, agrees: verdict == Verdict::Positive })
    } else {
        None
    };
    let empirical_eps0 = if options.bisect { empirical_eps0(dim, alpha, cfg, spec)? } else { None };

    Ok(BarrierReport {
        epsilon,
        n: dim.n(),
        alpha: alpha.get(),
        regularity_constant: barrier.regularity_constant,
        samples: run.samples,
        failures: run.failures,
        min_margin: run.min_margin,
        verdict: run.verdict,
        leaves_symmetric: run.leaves_symmetric,
        far_field,
        closure,
        empirical_eps0,
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
    fn profile_values() {
        let b = build_barrier(0.1).unwrap();
        assert_eq!(b.profile.value(0.5), 0.1);
        assert!((b.profile.value(3.0) - 0.3).abs() < 1e-15);
        let mid = b.profile.value(1.5);
        assert!((0.1..=0.15).contains(&mid));
        assert!(b.regularity_constant > 1.0 && b.regularity_constant < 10.0);
    }

    #[test]
    fn monotone_in_epsilon() {
        let grid = verification_grid();
        let eps = [0.02, 0.05, 0.1, 0.2, 0.4];
        let bars: Vec<Barrier> = eps.iter().map(|&e| build_barrier(e).unwrap()).collect();
        for w in bars.windows(2) {
            assert!(grid.iter().all(|&r| w[0].profile.value(r) <= w[1].profile.value(r)));
        }
    }

    #[test]
    fn cubic_cutoff_fails_c2_check() {
        let e = build_barrier_with(0.1, Cutoff::CubicSmoothstep).unwrap_err();
        assert!(matches!(e, Error::InvalidCutoff { r, .. } if r == 1.0));
        assert!(build_barrier(0.0).is_err());
    }

    #[test]
    fn default_sampling_is_dense_enough() {
        let s = default_sampling();
        assert!(s.radii.len() >= 150);
        assert!(s.radii.iter().filter(|&&r| (r - 1.0).abs() <= 0.06).count() >= 13);
        assert_eq!(*s.radii.last().unwrap(), FAR_RADIUS);
    }

    #[test]
    fn cone_constant_is_positive_and_homogeneous() {
        let cfg = QuadratureConfig { oracle_samples: 200_000, ..Default::default() };
        let c = cone_constant(0.1, d1(), half(), &cfg).unwrap();
        assert!(c.m > 0.0);
        assert!(c.residual <= 3.0 * 2.0 * c.rays.iter().map(|r| r.err).fold(0.0, f64::max));
    }

    #[test]
    fn sweep_matches_individual_calls() {
        let cfg = QuadratureConfig { oracle_samples: 100_000, ..Default::default() };
        let rep = sweep_cone_constant(&[0.2, 0.1], d1(), half(), &cfg).unwrap();
        let single = cone_constant(0.1, d1(), half(), &cfg).unwrap();
        assert!((rep.m_values[1] - single.m).abs() <= 1e-12);
        let one = sweep_cone_constant(&[0.1], d1(), half(), &cfg).unwrap();
        assert_eq!(one.blowup_trend, None);
        assert!(sweep_cone_constant(&[0.1, 0.2], d1(), half(), &cfg).is_err());
    }

    #[test]
    fn small_barrier_is_positive_with_symmetric_leaves() {
        let cfg = QuadratureConfig { oracle_samples: 200_000, ..Default::default() };
        let opts = VerifyOptions { bisect: false, ..Default::default() };
        let rep = verify_barrier(0.05, d1(), half(), &cfg, &default_sampling(), opts).unwrap();
        assert_eq!(rep.verdict, Verdict::Positive);
        assert!(rep.samples.len() >= 200);
        assert!(rep.leaves_symmetric);
        assert!(rep.far_field.as_ref().unwrap().within_five_percent);
        assert!(rep.closure.as_ref().unwrap().agrees);
    }
}
