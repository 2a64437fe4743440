use super::{dot, norm, radial_increment, RadialProfile};

/// Position of a point relative to a body.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Inside,
    Boundary,
    Outside,
}

impl Side {
    fn from_level(phi: f64) -> Side {
        if phi < 0.0 {
            Side::Inside
        } else if phi > 0.0 {
            Side::Outside
        } else {
            Side::Boundary
        }
    }

    /// `+1` outside, `-1` inside, `0` on the boundary: the sign the curvature
    /// integrand gives to a point.
    #[inline]
    pub fn sign(self) -> f64 {
        match self {
            Side::Inside => -1.0,
            Side::Boundary => 0.0,
            Side::Outside => 1.0,
        }
    }
}

/// Open sets of R^{n+1} with closed-form membership. The ambient dimension is
/// carried by the points, not the body.
#[derive(Debug, Clone, PartialEq)]
pub enum Body {
    /// `{ |x_{n+1}| < v(|x'|) }`
    TwoLeaf(RadialProfile),
    /// `{ x_{n+1} < u(|x'|) }`
    Subgraph(RadialProfile),
    /// `{ -slope |x'| < x_{n+1} < slope |x'| }`
    Cone { slope: f64 },
    Ball { radius: f64 },
    /// `{ x_{n+1} < offset }`
    HalfSpace { offset: f64 },
    Complement(Box<Body>),
    /// `{ factor * y : y in inner }`
    Scaled(Box<Body>, f64),
}

fn split(x: &[f64]) -> (&[f64], f64) {
    let (h, v) = x.split_at(x.len() - 1);
    (h, v[0])
}

impl Body {
    pub fn complement(self) -> Body {
        Body::Complement(Box::new(self))
    }

    pub fn scaled(self, factor: f64) -> Body {
        Body::Scaled(Box::new(self), factor)
    }

    /// Level function: negative inside, positive outside, zero on the boundary.
    pub fn level(&self, x: &[f64]) -> f64 {
        let (h, t) = split(x);
        match self {
            Body::TwoLeaf(v) => t.abs() - v.value(norm(h)),
            Body::Subgraph(u) => t - u.value(norm(h)),
            Body::Cone { slope } => t.abs() - slope * norm(h),
            Body::Ball { radius } => dot(x, x) - radius * radius,
            Body::HalfSpace { offset } => t - offset,
            Body::Complement(b) => -b.level(x),
            Body::Scaled(b, f) => {
                let y: Vec<f64> = x.iter().map(|c| c / f).collect();
                b.level(&y)
            }
        }
    }

    pub fn side(&self, x: &[f64]) -> Side {
        Side::from_level(self.level(x))
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        self.level(x) < 0.0
    }

    /// `level(x + d) - level(x)` evaluated in the local frame at `x`, so that
    /// offsets far below the size of `x` keep full relative precision.
    pub fn level_increment(&self, x: &[f64], d: &[f64]) -> f64 {
        let (xh, xt) = split(x);
        let (dh, dt) = split(d);
        let abs_step = |t: f64, s: f64| -> f64 {
            let u = t + s;
            if t > 0.0 && u > 0.0 {
                s
            } else if t < 0.0 && u < 0.0 {
                -s
            } else {
                u.abs() - t.abs()
            }
        };
        match self {
            Body::TwoLeaf(v) => abs_step(xt, dt) - v.increment(norm(xh), radial_increment(xh, dh)),
            Body::Subgraph(u) => dt - u.increment(norm(xh), radial_increment(xh, dh)),
            Body::Cone { slope } => abs_step(xt, dt) - slope * radial_increment(xh, dh),
            Body::Ball { .. } => 2.0 * dot(x, d) + dot(d, d),
            Body::HalfSpace { .. } => dt,
            Body::Complement(b) => -b.level_increment(x, d),
            Body::Scaled(b, f) => {
                let y: Vec<f64> = x.iter().map(|c| c / f).collect();
                let e: Vec<f64> = d.iter().map(|c| c / f).collect();
                b.level_increment(&y, &e)
            }
        }
    }

    /// Side of `x + d` for a boundary point `x`, resolved in the local frame.
    pub fn side_near(&self, x: &[f64], d: &[f64]) -> Side {
        Side::from_level(self.level_increment(x, d))
    }

    /// Unit normal at a boundary point, pointing into the complement.
    pub fn outward_normal(&self, x: &[f64]) -> Vec<f64> {
        let (h, t) = split(x);
        let r = norm(h);
        let radial = |scale: f64| -> Vec<f64> {
            if r > 0.0 {
                h.iter().map(|c| scale * c / r).collect()
            } else {
                vec![0.0; h.len()]
            }
        };
        let mut g = match self {
            Body::TwoLeaf(v) => {
                let mut g = radial(-v.first_derivative(r));
                g.push(if t >= 0.0 { 1.0 } else { -1.0 });
                g
            }
            Body::Subgraph(u) => {
                let mut g = radial(-u.first_derivative(r));
                g.push(1.0);
                g
            }
            Body::Cone { slope } => {
                let mut g = radial(-slope);
                g.push(if t >= 0.0 { 1.0 } else { -1.0 });
                g
            }
            Body::Ball { .. } => x.to_vec(),
            Body::HalfSpace { .. } => {
                let mut g = vec![0.0; h.len()];
                g.push(1.0);
                g
            }
            Body::Complement(b) => b.outward_normal(x).into_iter().map(|c| -c).collect(),
            Body::Scaled(b, f) => {
                let y: Vec<f64> = x.iter().map(|c| c / f).collect();
                b.outward_normal(&y)
            }
        };
        let len = norm(&g);
        g.iter_mut().for_each(|c| *c /= len);
        g
    }

    /// Upper bound on the principal curvatures of the boundary within `radius`
    /// of the boundary point `x`, sampled on a small stencil.
    pub fn curvature_bound(&self, x: &[f64], radius: f64) -> f64 {
        let (h, _) = split(x);
        let n = h.len();
        let r0 = norm(h);
        let graph = |p: &RadialProfile| -> f64 {
            (-4..=4)
                .map(|k| (r0 + radius * k as f64 / 4.0).max(0.0))
                .map(|r| {
                    let (_, d, dd) = p.eval(r);
                    let w = (1.0 + d * d).sqrt();
                    let k1 = dd.abs() / (w * w * w);
                    let k2 = if n >= 2 {
                        if r > 0.0 {
                            d.abs() / (r * w)
                        } else {
                            dd.abs()
                        }
                    } else {
                        0.0
                    };
                    k1.max(k2)
                })
                .filter(|k| k.is_finite())
                .fold(0.0, f64::max)
        };
        match self {
            Body::TwoLeaf(v) => graph(v),
            Body::Subgraph(u) => graph(u),
            Body::Cone { slope } => {
                let rr = (r0 - radius).max(0.0);
                if n >= 2 && rr > 0.0 {
                    slope / (rr * (1.0 + slope * slope).sqrt())
                } else if n >= 2 {
                    f64::INFINITY
                } else {
                    0.0
                }
            }
            Body::Ball { radius: big } => 1.0 / big,
            Body::HalfSpace { .. } => 0.0,
            Body::Complement(b) => b.curvature_bound(x, radius),
            Body::Scaled(b, f) => {
                let y: Vec<f64> = x.iter().map(|c| c / f).collect();
                b.curvature_bound(&y, radius / f) / f
            }
        }
    }

    /// Characteristic length of the geometry near `x`.
    pub fn local_scale(&self, x: &[f64]) -> f64 {
        match self {
            Body::Ball { radius } => *radius,
            // the opposite leaf sits at distance about 2|x_N|
            Body::Cone { slope } => (norm(split(x).0) * slope.min(1.0)).max(f64::MIN_POSITIVE),
            Body::TwoLeaf(_) => split(x).1.abs().clamp(1e-12, 1.0),
            Body::Subgraph(_) | Body::HalfSpace { .. } => 1.0,
            Body::Complement(b) => b.local_scale(x),
            Body::Scaled(b, f) => {
                let y: Vec<f64> = x.iter().map(|c| c / f).collect();
                f * b.local_scale(&y)
            }
        }
    }

    /// The two-leaf profile of this body after unwrapping scalings.
    pub fn two_leaf_profile(&self) -> Option<RadialProfile> {
        match self {
            Body::TwoLeaf(v) => Some(v.clone()),
            Body::Scaled(b, f) => b.two_leaf_profile().map(|v| v.scaled(*f)),
            _ => None,
        }
    }

    /// The subgraph profile of this body after unwrapping scalings; a
    /// half-space counts as the subgraph of a constant.
    pub fn subgraph_profile(&self) -> Option<RadialProfile> {
        match self {
            Body::Subgraph(u) => Some(u.clone()),
            Body::HalfSpace { offset } => Some(RadialProfile::constant(*offset)),
            Body::Scaled(b, f) => b.subgraph_profile().map(|u| u.scaled(*f)),
            _ => None,
        }
    }

    /// Short human-readable description, used in reports.
    pub fn describe(&self) -> String {
        match self {
            Body::TwoLeaf(v) => format!("twoleaf[{v}]"),
            Body::Subgraph(u) => format!("subgraph[{u}]"),
            Body::Cone { slope } => format!("cone[slope={slope}]"),
            Body::Ball { radius } => format!("ball[radius={radius}]"),
            Body::HalfSpace { offset } => format!("halfspace[offset={offset}]"),
            Body::Complement(b) => format!("complement[{}]", b.describe()),
            Body::Scaled(b, f) => format!("scaled[{},factor={f}]", b.describe()),
        }
    }
}
