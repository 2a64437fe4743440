//! Geometric vocabulary: fractional order, dimension, radial profiles,
//! bodies in R^{n+1}, sublinear envelopes and boundary sampling.
//!
//! Points of R^{n+1} are plain `[f64]` slices whose last coordinate is the
//! vertical one; the first `n` coordinates form the horizontal part `x'`.

mod body;
mod envelope;
mod profile;
mod sampling;

pub use body::{Body, Side};
pub use envelope::{ModulusReport, SublinearEnvelope};
pub use profile::{Cutoff, ProfileKind, RadialProfile};
pub use sampling::{boundary_sample, BoundarySample, Leaf, SamplingSpec};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The order `alpha` of the fractional kernel, strictly inside (0, 1).
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct FractionalOrder(f64);

impl FractionalOrder {
    pub fn new(alpha: f64) -> Result<Self> {
        if alpha.is_finite() && alpha > 0.0 && alpha < 1.0 {
            Ok(Self(alpha))
        } else {
            Err(Error::InvalidOrder(alpha))
        }
    }

    #[inline]
    pub fn get(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for FractionalOrder {
    type Error = Error;
    fn try_from(v: f64) -> Result<Self> {
        Self::new(v)
    }
}

impl From<FractionalOrder> for f64 {
    fn from(a: FractionalOrder) -> f64 {
        a.0
    }
}

/// Horizontal dimension `n`; boundary points live in R^{n+1}.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "usize", into = "usize")]
pub struct AmbientDim(usize);

impl AmbientDim {
    pub fn new(n: usize) -> Result<Self> {
        if n >= 1 {
            Ok(Self(n))
        } else {
            Err(Error::InvalidDimension(n))
        }
    }

    /// Horizontal dimension `n`.
    #[inline]
    pub fn n(self) -> usize {
        self.0
    }

    /// Full dimension `n + 1`.
    #[inline]
    pub fn total(self) -> usize {
        self.0 + 1
    }
}

impl TryFrom<usize> for AmbientDim {
    type Error = Error;
    fn try_from(v: usize) -> Result<Self> {
        Self::new(v)
    }
}

impl From<AmbientDim> for usize {
    fn from(d: AmbientDim) -> usize {
        d.0
    }
}

/// Surface measure of the unit sphere S^k in R^{k+1}.
pub fn sphere_area(k: usize) -> f64 {
    // |S^k| = 2 pi / (k - 1) |S^{k-2}|
    match k {
        0 => 2.0,
        1 => 2.0 * std::f64::consts::PI,
        _ => 2.0 * std::f64::consts::PI / (k as f64 - 1.0) * sphere_area(k - 2),
    }
}

pub(crate) fn norm(v: &[f64]) -> f64 {
    v.iter().map(|c| c * c).sum::<f64>().sqrt()
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `|x' + d'| - |x'|` without cancellation.
pub(crate) fn radial_increment(xh: &[f64], dh: &[f64]) -> f64 {
    let r0 = norm(xh);
    let mut s = 0.0;
    for (x, d) in xh.iter().zip(dh) {
        let y = x + d;
        s += y * y;
    }
    let r1 = s.sqrt();
    let denom = r0 + r1;
    if denom == 0.0 {
        return 0.0;
    }
    (2.0 * dot(xh, dh) + dot(dh, dh)) / denom
}
