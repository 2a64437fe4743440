//! Interaction energy `I(E, F) = alpha (1 - alpha) int_E int_F |x - y|^{-(n+1+alpha)}`
//! restricted to a bounding box, and the perimeter functional built from
//! three such energies.
//!
//! The pair `(x, y = x + rho omega)` is sampled with `x` uniform in the box,
//! `omega` uniform on the sphere and `rho` in geometric shells with density
//! `rho^{-1-alpha}`, so the singular kernel is absorbed into the sampling
//! weights. Near a shared interface small shells contribute like
//! `rho^{1-alpha}`; once hits become too rare to sample reliably, the rest
//! of the series is extrapolated geometrically.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::QuadratureConfig;
use super::direct::{draw_direction, draw_radius, neyman_allocation, shell_rng, Moments};
use crate::error::{Error, Result};
use crate::geometry::{sphere_area, AmbientDim, Body, FractionalOrder};

const SHELLS: usize = 24;
const SHELL_RATIO: f64 = 2.0;
const DISJOINT_PROBES: usize = 20_000;
const MIN_HITS: usize = 64;

/// Axis-aligned box `[lo, hi]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aabb {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl Aabb {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        if lo.len() != hi.len() || lo.is_empty() {
            return Err(Error::InvalidParameter { name: "box", reason: "corner dimensions differ".into() });
        }
        if lo.iter().zip(&hi).any(|(a, b)| !(a < b) || !a.is_finite() || !b.is_finite()) {
            return Err(Error::InvalidParameter { name: "box", reason: format!("empty box {lo:?}..{hi:?}") });
        }
        Ok(Self { lo, hi })
    }

    /// The cube `[-half, half]^dim`.
    pub fn cube(dim: usize, half: f64) -> Result<Self> {
        Self::new(vec![-half; dim], vec![half; dim])
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.iter().zip(self.lo.iter().zip(&self.hi)).all(|(c, (a, b))| *a <= *c && *c <= *b)
    }

    pub fn volume(&self) -> f64 {
        self.lo.iter().zip(&self.hi).map(|(a, b)| b - a).product()
    }

    pub fn diameter(&self) -> f64 {
        self.lo.iter().zip(&self.hi).map(|(a, b)| (b - a) * (b - a)).sum::<f64>().sqrt()
    }

    pub fn scaled(&self, factor: f64) -> Aabb {
        Aabb { lo: self.lo.iter().map(|c| c * factor).collect(), hi: self.hi.iter().map(|c| c * factor).collect() }
    }

    fn sample(&self, rng: &mut ChaCha8Rng) -> Vec<f64> {
        self.lo.iter().zip(&self.hi).map(|(a, b)| a + (b - a) * rng.random::<f64>()).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Clip {
    Within(Aabb),
    Outside(Aabb),
}

/// A body intersected with boxes or with complements of boxes.
#[derive(Debug, Clone, PartialEq)]
pub struct Region {
    body: Body,
    clips: Vec<Clip>,
}

impl Region {
    pub fn new(body: Body) -> Self {
        Self { body, clips: Vec::new() }
    }

    /// `self ∩ b`
    pub fn within(mut self, b: &Aabb) -> Self {
        self.clips.push(Clip::Within(b.clone()));
        self
    }

    /// `self \ b`
    pub fn outside(mut self, b: &Aabb) -> Self {
        self.clips.push(Clip::Outside(b.clone()));
        self
    }

    pub fn scaled(&self, factor: f64) -> Region {
        Region {
            body: self.body.clone().scaled(factor),
            clips: self
                .clips
                .iter()
                .map(|c| match c {
                    Clip::Within(b) => Clip::Within(b.scaled(factor)),
                    Clip::Outside(b) => Clip::Outside(b.scaled(factor)),
                })
                .collect(),
        }
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        self.body.contains(x)
            && self.clips.iter().all(|c| match c {
                Clip::Within(b) => b.contains(x),
                Clip::Outside(b) => !b.contains(x),
            })
    }
}

impl From<Body> for Region {
    fn from(body: Body) -> Self {
        Region::new(body)
    }
}

/// Monte Carlo energy estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyEstimate {
    pub value: f64,
    /// One standard error of the sampled part.
    pub standard_error: f64,
    /// Extrapolated contribution of distances below the innermost shell
    /// (included in `value`).
    pub extrapolated: f64,
    /// `mc_confidence` standard errors plus the observed departure of the
    /// innermost shells from the extrapolation law.
    pub error: f64,
    /// Always true: pairs leaving the box are not counted.
    pub truncated: bool,
}

/// `I(E, F)` over pairs with both points in `bbox`.
pub fn interaction_energy(
    e: &Region,
    f: &Region,
    bbox: &Aabb,
    dim: AmbientDim,
    alpha: FractionalOrder,
    cfg: &QuadratureConfig,
) -> Result<EnergyEstimate> {
    cfg.validate()?;
    let total = dim.total();
    if bbox.dim() != total {
        return Err(Error::InvalidParameter { name: "box", reason: format!("box has dimension {}, expected {total}", bbox.dim()) });
    }
    let mut probe = shell_rng(cfg.seed, u64::MAX);
    for _ in 0..DISJOINT_PROBES {
        let x = bbox.sample(&mut probe);
        if e.contains(&x) && f.contains(&x) {
            return Err(Error::DisjointnessViolation { point: x });
        }
    }

    let al = alpha.get();
    let diam = bbox.diameter();
    let shells: Vec<(f64, f64, f64)> = (0..SHELLS)
        .map(|k| {
            let b = diam * SHELL_RATIO.powi(-(k as i32));
            let a = b / SHELL_RATIO;
            (a, b, (a.powf(-al) - b.powf(-al)) / al)
        })
        .collect();
    let scale = al * (1.0 - al) * bbox.volume() * sphere_area(total - 1);
    let draw = |rng: &mut ChaCha8Rng, a: f64, b: f64, w: f64| {
        let x = bbox.sample(rng);
        if !e.contains(&x) {
            // keep the stream layout fixed
            let _ = draw_radius(rng, a, b, al);
            let _ = draw_direction(rng, total);
            return 0.0;
        }
        let rho = draw_radius(rng, a, b, al);
        let omega = draw_direction(rng, total);
        let y: Vec<f64> = x.iter().zip(&omega).map(|(p, o)| p + rho * o).collect();
        if bbox.contains(&y) && f.contains(&y) {
            scale * w
        } else {
            0.0
        }
    };

    // the optimal allocation is close to even across shells, so half the
    // budget is spread evenly and the rest follows the observed spreads
    let pilot = (cfg.oracle_samples / (2 * SHELLS)).max(64);
    let mut stats: Vec<(Moments, usize, ChaCha8Rng)> = shells
        .par_iter()
        .enumerate()
        .map(|(k, &(a, b, w))| {
            let mut rng = shell_rng(cfg.seed, k as u64);
            let mut m = Moments::default();
            let mut hits = 0;
            for _ in 0..pilot {
                let v = draw(&mut rng, a, b, w);
                hits += usize::from(v != 0.0);
                m.push(v);
            }
            (m, hits, rng)
        })
        .collect();

    // Deep shells are rarely hit and their sample means are badly skewed.
    // Sampling stops at the last shell with enough hits; when the hit counts
    // below it keep halving like a shared interface, the rest is extrapolated
    // with the rho^{1-alpha} law, otherwise (separated sets) the sparse
    // shells are kept as sampled.
    let hits: Vec<usize> = stats.iter().map(|s| s.1).collect();
    // the outermost shells mostly leave the box, so the search starts at the
    // first well-sampled one
    let first = hits.iter().position(|&h| h >= MIN_HITS).unwrap_or(SHELLS);
    let cut = hits.iter().skip(first).position(|&h| h < MIN_HITS).map_or(SHELLS, |p| first + p);
    let beyond: usize = hits.iter().skip(cut).sum();
    let used = if (2..SHELLS).contains(&cut) && 2 * beyond >= hits[cut - 1] { cut } else { SHELLS };

    let sds: Vec<f64> = stats[..used].iter().map(|(m, _, _)| m.variance().sqrt()).collect();
    let extra = neyman_allocation(&sds, cfg.oracle_samples - (SHELLS - used) * pilot, pilot);
    stats[..used].par_iter_mut().zip(shells[..used].par_iter()).zip(extra.par_iter()).for_each(|(((m, _, rng), &(a, b, w)), &more)| {
        for _ in 0..more {
            m.push(draw(rng, a, b, w));
        }
    });

    let sampled: f64 = stats[..used].iter().map(|s| s.0.mean()).sum();
    let mut var: f64 = stats[..used].iter().map(|s| s.0.mean_variance()).sum();
    let (mut extrapolated, mut model_error) = (0.0, 0.0);
    if used < SHELLS {
        let ratio = SHELL_RATIO.powf(-(1.0 - al));
        let factor = ratio / (1.0 - ratio);
        let (last, prev) = (&stats[used - 1].0, &stats[used - 2].0);
        extrapolated = last.mean() * factor;
        var += last.mean_variance() * factor * (factor + 2.0);
        // disagreement of the two innermost shells with the power law
        model_error = (last.mean() - ratio * prev.mean()).abs() * factor;
    }
    let standard_error = var.sqrt();
    Ok(EnergyEstimate {
        value: sampled + extrapolated,
        standard_error,
        extrapolated,
        error: cfg.mc_confidence * standard_error + model_error,
        truncated: true,
    })
}

/// Perimeter of `E` in `omega` as the sum of the three interaction terms
/// `I(E∩Ω, Ω\E) + I(E∩Ω, outer\(E∪Ω)) + I(E\Ω, Ω\E)`, all restricted to `outer`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PerimeterEstimate {
    pub value: f64,
    pub standard_error: f64,
    pub error: f64,
    pub terms: [EnergyEstimate; 3],
}

pub fn per_alpha(
    e: &Body,
    omega: &Aabb,
    outer: &Aabb,
    dim: AmbientDim,
    alpha: FractionalOrder,
    cfg: &QuadratureConfig,
) -> Result<PerimeterEstimate> {
    let inside = Region::new(e.clone()).within(omega);
    let hole = Region::new(e.clone().complement()).within(omega);
    let beyond = Region::new(e.clone().complement()).outside(omega);
    let spill = Region::new(e.clone()).outside(omega);
    let pairs = [(&inside, &hole), (&inside, &beyond), (&spill, &hole)];
    let mut terms = Vec::with_capacity(3);
    for (i, (a, b)) in pairs.into_iter().enumerate() {
        let c = cfg.with_seed(cfg.seed.wrapping_mul(3).wrapping_add(i as u64));
        terms.push(interaction_energy(a, b, outer, dim, alpha, &c)?);
    }
    let terms: [EnergyEstimate; 3] = terms.try_into().expect("three terms");
    Ok(PerimeterEstimate {
        value: terms.iter().map(|t| t.value).sum(),
        standard_error: terms.iter().map(|t| t.standard_error * t.standard_error).sum::<f64>().sqrt(),
        error: terms.iter().map(|t| t.error).sum(),
        terms,
    })
}
