use serde::{Deserialize, Serialize};

use super::{AmbientDim, Body};
use crate::error::{Error, Result};

/// Which leaf of a two-leaf or cone body to sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Leaf {
    Upper,
    Lower,
    Both,
}

/// Where to place boundary samples. Radial variants use `radii` along the
/// `e_1` direction; balls use `count` points on a great circle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplingSpec {
    pub radii: Vec<f64>,
    pub count: usize,
    pub leaf: Leaf,
}

impl SamplingSpec {
    pub fn radial(radii: Vec<f64>) -> Self {
        let count = radii.len();
        Self { radii, count, leaf: Leaf::Upper }
    }

    pub fn points(count: usize) -> Self {
        Self { radii: Vec::new(), count, leaf: Leaf::Upper }
    }

    pub fn with_leaf(mut self, leaf: Leaf) -> Self {
        self.leaf = leaf;
        self
    }

    /// `count` geometrically spaced radii on `[r_min, r_max]`.
    pub fn geometric(r_min: f64, r_max: f64, count: usize) -> Self {
        let radii = geometric_grid(r_min, r_max, count);
        Self::radial(radii)
    }

    /// Adds `per_center` uniformly spaced radii in `[c - width, c + width]`
    /// around each center (clipped at zero) and re-sorts.
    pub fn refined(mut self, centers: &[f64], width: f64, per_center: usize) -> Self {
        for &c in centers {
            for k in 0..per_center {
                let t = if per_center == 1 { 0.5 } else { k as f64 / (per_center - 1) as f64 };
                let r = c - width + 2.0 * width * t;
                if r >= 0.0 {
                    self.radii.push(r);
                }
            }
        }
        self.radii.sort_by(|a, b| a.partial_cmp(b).unwrap());
        self.radii.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * b.abs().max(1.0));
        self.count = self.radii.len();
        self
    }

    /// Default two-leaf sampling: the axis, geometric radii up to `r_max` and
    /// refinement around the cutoff transition at r = 1 and r = 2.
    pub fn two_leaf_default(r_max: f64, count: usize) -> Self {
        let mut s = Self::geometric(0.05, r_max, count).refined(&[1.0, 2.0], 0.1, 9);
        s.radii.insert(0, 0.0);
        s.count = s.radii.len();
        s
    }
}

pub(crate) fn geometric_grid(r_min: f64, r_max: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![r_min],
        _ => {
            let q = (r_max / r_min).ln() / (count - 1) as f64;
            (0..count).map(|i| if i + 1 == count { r_max } else { r_min * (q * i as f64).exp() }).collect()
        }
    }
}

/// A boundary point with its outward unit normal.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundarySample {
    pub point: Vec<f64>,
    pub normal: Vec<f64>,
    /// Radius `|x'|` of the horizontal part.
    pub r: f64,
}

/// Points on the boundary of `body`, tagged with outward normals.
pub fn boundary_sample(body: &Body, dim: AmbientDim, spec: &SamplingSpec) -> Result<Vec<BoundarySample>> {
    let n = dim.n();
    let along = |r: f64, h: f64| -> Vec<f64> {
        let mut p = vec![0.0; n + 1];
        p[0] = r;
        p[n] = h;
        p
    };
    let leaves: &[f64] = match spec.leaf {
        Leaf::Upper => &[1.0],
        Leaf::Lower => &[-1.0],
        Leaf::Both => &[1.0, -1.0],
    };
    let radii: Vec<f64> = if spec.radii.is_empty() { (0..spec.count).map(|i| i as f64).collect() } else { spec.radii.clone() };
    let points: Vec<Vec<f64>> = match body {
        Body::TwoLeaf(v) => radii.iter().flat_map(|&r| leaves.iter().map(move |s| along(r, s * v.value(r)))).collect(),
        Body::Cone { slope } => radii.iter().flat_map(|&r| leaves.iter().map(move |s| along(r, s * slope * r))).collect(),
        Body::Subgraph(u) => radii.iter().map(|&r| along(r, u.value(r))).collect(),
        Body::HalfSpace { offset } => radii.iter().map(|&r| along(r, *offset)).collect(),
        Body::Ball { radius } => (0..spec.count)
            .map(|k| {
                let th = 2.0 * std::f64::consts::PI * k as f64 / spec.count as f64;
                along(radius * th.cos(), radius * th.sin())
            })
            .collect(),
        Body::Complement(_) | Body::Scaled(..) => {
            return Err(Error::UnsupportedGeometry(format!("unwrap {} before sampling", body.describe())))
        }
    };
    Ok(points
        .into_iter()
        .map(|p| {
            let normal = body.outward_normal(&p);
            let r = super::norm(&p[..n]);
            BoundarySample { point: p, normal, r }
        })
        .collect())
}
