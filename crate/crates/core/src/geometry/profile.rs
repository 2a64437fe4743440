use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::sync::Arc;

use crate::error::{Error, Result};

/// Radially non-increasing cutoff equal to 1 on [0, 1] and 0 on [2, inf).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Cutoff {
    /// `1 - (6t^5 - 15t^4 + 10t^3)` with `t = r - 1`; C2 at both ends.
    QuinticSmoothstep,
    /// `1 - (3t^2 - 2t^3)`; only C1, kept to exercise the C2 check.
    CubicSmoothstep,
}

impl Cutoff {
    /// Returns `(eta, eta', eta'')` at radius `r`.
    pub fn eval(self, r: f64) -> (f64, f64, f64) {
        if r <= 1.0 {
            return (1.0, 0.0, 0.0);
        }
        if r >= 2.0 {
            return (0.0, 0.0, 0.0);
        }
        let t = r - 1.0;
        let (s, ds, dds) = match self {
            Cutoff::QuinticSmoothstep => (
                t * t * t * (10.0 + t * (-15.0 + 6.0 * t)),
                30.0 * t * t * (t - 1.0) * (t - 1.0),
                60.0 * t * (2.0 * t - 1.0) * (t - 1.0),
            ),
            Cutoff::CubicSmoothstep => (t * t * (3.0 - 2.0 * t), 6.0 * t * (1.0 - t), 6.0 - 12.0 * t),
        };
        (1.0 - s, -ds, -dds)
    }

    pub fn name(self) -> &'static str {
        match self {
            Cutoff::QuinticSmoothstep => "quintic",
            Cutoff::CubicSmoothstep => "cubic",
        }
    }
}

/// Piecewise cubic Hermite interpolant with Fritsch-Carlson slopes.
#[derive(Debug, Clone, PartialEq)]
pub struct MonotoneCubic {
    r: Vec<f64>,
    y: Vec<f64>,
    m: Vec<f64>,
}

impl MonotoneCubic {
    pub fn new(r: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        if r.len() != y.len() || r.len() < 2 {
            return Err(Error::ProfileData("need at least two (r, value) rows".into()));
        }
        if r[0] != 0.0 {
            return Err(Error::ProfileData(format!("first radius must be 0, got {}", r[0])));
        }
        if r.windows(2).any(|w| !(w[1] > w[0])) || y.iter().any(|v| !v.is_finite()) {
            return Err(Error::ProfileData("radii must be strictly increasing and values finite".into()));
        }
        let k = r.len();
        let h: Vec<f64> = r.windows(2).map(|w| w[1] - w[0]).collect();
        let delta: Vec<f64> = (0..k - 1).map(|i| (y[i + 1] - y[i]) / h[i]).collect();
        let mut m = vec![0.0; k];
        m[0] = delta[0];
        m[k - 1] = delta[k - 2];
        for i in 1..k - 1 {
            m[i] = if delta[i - 1] * delta[i] <= 0.0 { 0.0 } else { 0.5 * (delta[i - 1] + delta[i]) };
        }
        for i in 0..k - 1 {
            if delta[i] == 0.0 {
                m[i] = 0.0;
                m[i + 1] = 0.0;
                continue;
            }
            let a = m[i] / delta[i];
            let b = m[i + 1] / delta[i];
            let s = a * a + b * b;
            if s > 9.0 {
                let tau = 3.0 / s.sqrt();
                m[i] = tau * a * delta[i];
                m[i + 1] = tau * b * delta[i];
            }
        }
        Ok(Self { r, y, m })
    }

    pub fn knots(&self) -> &[f64] {
        &self.r
    }

    fn eval(&self, r: f64) -> (f64, f64, f64) {
        let k = self.r.len();
        let last = self.r[k - 1];
        if r >= last {
            let m = self.m[k - 1];
            return (self.y[k - 1] + m * (r - last), m, 0.0);
        }
        let i = match self.r.binary_search_by(|p| p.partial_cmp(&r).unwrap()) {
            Ok(i) => i.min(k - 2),
            Err(i) => i.saturating_sub(1).min(k - 2),
        };
        let h = self.r[i + 1] - self.r[i];
        let t = (r - self.r[i]) / h;
        let (y0, y1, m0, m1) = (self.y[i], self.y[i + 1], self.m[i], self.m[i + 1]);
        let t2 = t * t;
        let t3 = t2 * t;
        let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        let h10 = t3 - 2.0 * t2 + t;
        let h01 = -2.0 * t3 + 3.0 * t2;
        let h11 = t3 - t2;
        let v = h00 * y0 + h10 * h * m0 + h01 * y1 + h11 * h * m1;
        let d = ((6.0 * t2 - 6.0 * t) * y0 + (3.0 * t2 - 4.0 * t + 1.0) * h * m0
            + (-6.0 * t2 + 6.0 * t) * y1
            + (3.0 * t2 - 2.0 * t) * h * m1)
            / h;
        let dd = ((12.0 * t - 6.0) * y0 + (6.0 * t - 4.0) * h * m0 + (-12.0 * t + 6.0) * y1 + (6.0 * t - 2.0) * h * m1)
            / (h * h);
        (v, d, dd)
    }
}

/// Concrete shape of a [`RadialProfile`].
#[derive(Debug, Clone, PartialEq)]
pub enum ProfileKind {
    Constant { level: f64 },
    /// `intercept + slope * r`
    Affine { intercept: f64, slope: f64 },
    /// `scale * sqrt(r)`
    Sqrt { scale: f64 },
    /// `epsilon * (eta + (1 - eta) r)`
    Barrier { epsilon: f64, cutoff: Cutoff },
    /// `amplitude * r^2 * (1 - (r/width)^2)^3` on `r < width`, zero beyond.
    Bump { amplitude: f64, width: f64 },
    Sampled(MonotoneCubic),
    /// `factor * inner(r / factor)`
    Scaled { inner: RadialProfile, factor: f64 },
    /// `inner(r) + offset`
    Shifted { inner: RadialProfile, offset: f64 },
}

/// A scalar function of the radius `r = |x'|` with first and second
/// derivative access. Cheap to clone; immutable.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialProfile(Arc<ProfileKind>);

impl RadialProfile {
    pub fn new(kind: ProfileKind) -> Self {
        Self(Arc::new(kind))
    }

    pub fn constant(level: f64) -> Self {
        Self::new(ProfileKind::Constant { level })
    }

    pub fn affine(intercept: f64, slope: f64) -> Self {
        Self::new(ProfileKind::Affine { intercept, slope })
    }

    pub fn linear(slope: f64) -> Self {
        Self::affine(0.0, slope)
    }

    pub fn sqrt(scale: f64) -> Self {
        Self::new(ProfileKind::Sqrt { scale })
    }

    pub fn barrier(epsilon: f64, cutoff: Cutoff) -> Self {
        Self::new(ProfileKind::Barrier { epsilon, cutoff })
    }

    pub fn bump(amplitude: f64, width: f64) -> Self {
        Self::new(ProfileKind::Bump { amplitude, width })
    }

    pub fn sampled(r: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        Ok(Self::new(ProfileKind::Sampled(MonotoneCubic::new(r, values)?)))
    }

    /// Loads a two-column CSV with header `r,value`.
    pub fn from_csv(path: impl AsRef<Path>) -> Result<Self> {
        let mut rdr = csv::Reader::from_path(path.as_ref())
            .map_err(|e| Error::ProfileData(format!("{}: {e}", path.as_ref().display())))?;
        let headers = rdr.headers().map_err(|e| Error::ProfileData(e.to_string()))?.clone();
        let names: Vec<&str> = headers.iter().map(str::trim).collect();
        if names != ["r", "value"] {
            return Err(Error::ProfileData(format!("expected header `r,value`, got `{}`", names.join(","))));
        }
        let (mut rs, mut vs) = (Vec::new(), Vec::new());
        for rec in rdr.records() {
            let rec = rec.map_err(|e| Error::ProfileData(e.to_string()))?;
            let parse = |i: usize| -> Result<f64> {
                rec.get(i)
                    .ok_or_else(|| Error::ProfileData("short row".into()))?
                    .trim()
                    .parse::<f64>()
                    .map_err(|e| Error::ProfileData(e.to_string()))
            };
            rs.push(parse(0)?);
            vs.push(parse(1)?);
        }
        Self::sampled(rs, vs)
    }

    /// Builds a closed-form profile from an identifier and named parameters,
    /// e.g. `linear` with `slope=0.1`, `sqrt`, `constant` with `level=1`.
    pub fn from_spec(kind: &str, params: &BTreeMap<String, f64>) -> Result<Self> {
        let get = |k: &str, default: Option<f64>| -> Result<f64> {
            params.get(k).copied().or(default).ok_or_else(|| Error::InvalidParameter {
                name: "profile",
                reason: format!("`{kind}` needs parameter `{k}`"),
            })
        };
        Ok(match kind {
            "constant" => Self::constant(get("level", None)?),
            "linear" => Self::linear(get("slope", None)?),
            "affine" => Self::affine(get("intercept", None)?, get("slope", None)?),
            "sqrt" => Self::sqrt(get("scale", Some(1.0))?),
            "barrier" => Self::barrier(get("epsilon", None)?, Cutoff::QuinticSmoothstep),
            "bump" => Self::bump(get("amplitude", Some(1.0))?, get("width", Some(1.0))?),
            other => {
                return Err(Error::InvalidParameter { name: "profile", reason: format!("unknown profile kind `{other}`") })
            }
        })
    }

    pub fn kind(&self) -> &ProfileKind {
        &self.0
    }

    /// `factor * self(r / factor)`: the profile of the body scaled by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        if factor == 1.0 {
            return self.clone();
        }
        Self::new(ProfileKind::Scaled { inner: self.clone(), factor })
    }

    pub fn shifted(&self, offset: f64) -> Self {
        if offset == 0.0 {
            return self.clone();
        }
        Self::new(ProfileKind::Shifted { inner: self.clone(), offset })
    }

    pub fn is_sampled(&self) -> bool {
        match self.kind() {
            ProfileKind::Sampled(_) => true,
            ProfileKind::Scaled { inner, .. } | ProfileKind::Shifted { inner, .. } => inner.is_sampled(),
            _ => false,
        }
    }

    /// Value, first and second derivative at `r >= 0`.
    pub fn eval(&self, r: f64) -> (f64, f64, f64) {
        match self.kind() {
            ProfileKind::Constant { level } => (*level, 0.0, 0.0),
            ProfileKind::Affine { intercept, slope } => (intercept + slope * r, *slope, 0.0),
            ProfileKind::Sqrt { scale } => {
                let s = r.sqrt();
                (scale * s, scale / (2.0 * s), -scale / (4.0 * r * s))
            }
            ProfileKind::Barrier { epsilon, cutoff } => {
                let (eta, d1, d2) = cutoff.eval(r);
                let v = eta + (1.0 - eta) * r;
                let dv = d1 * (1.0 - r) + (1.0 - eta);
                let ddv = d2 * (1.0 - r) - 2.0 * d1;
                (epsilon * v, epsilon * dv, epsilon * ddv)
            }
            ProfileKind::Bump { amplitude, width } => {
                if r >= *width {
                    return (0.0, 0.0, 0.0);
                }
                let q = (r / width) * (r / width);
                let p = 1.0 - q;
                let v = amplitude * r * r * p * p * p;
                let d = amplitude * r * p * p * (2.0 - 8.0 * q);
                let dd = amplitude * p * (p * (2.0 - 8.0 * q) + 24.0 * q * (2.0 * q - 1.0));
                (v, d, dd)
            }
            ProfileKind::Sampled(mc) => mc.eval(r),
            ProfileKind::Scaled { inner, factor } => {
                let (v, d, dd) = inner.eval(r / factor);
                (factor * v, d, dd / factor)
            }
            ProfileKind::Shifted { inner, offset } => {
                let (v, d, dd) = inner.eval(r);
                (v + offset, d, dd)
            }
        }
    }

    #[inline]
    pub fn value(&self, r: f64) -> f64 {
        match self.kind() {
            ProfileKind::Constant { level } => *level,
            ProfileKind::Affine { intercept, slope } => intercept + slope * r,
            ProfileKind::Barrier { epsilon, .. } if r <= 1.0 => *epsilon,
            ProfileKind::Barrier { epsilon, .. } if r >= 2.0 => epsilon * r,
            ProfileKind::Scaled { inner, factor } => factor * inner.value(r / factor),
            _ => self.eval(r).0,
        }
    }

    #[inline]
    pub fn first_derivative(&self, r: f64) -> f64 {
        self.eval(r).1
    }

    #[inline]
    pub fn second_derivative(&self, r: f64) -> f64 {
        self.eval(r).2
    }

    /// `v(r + dr) - v(r)` computed without cancellation for small `dr`.
    pub fn increment(&self, r: f64, dr: f64) -> f64 {
        if dr == 0.0 {
            return 0.0;
        }
        let r1 = r + dr;
        match self.kind() {
            ProfileKind::Constant { .. } => 0.0,
            ProfileKind::Affine { slope, .. } => slope * dr,
            ProfileKind::Sqrt { scale } => scale * dr / (r1.max(0.0).sqrt() + r.sqrt()),
            ProfileKind::Barrier { .. } if r <= 1.0 && r1 <= 1.0 => 0.0,
            ProfileKind::Barrier { epsilon, .. } if r >= 2.0 && r1 >= 2.0 => epsilon * dr,
            ProfileKind::Bump { width, .. } if r >= *width && r1 >= *width => 0.0,
            ProfileKind::Scaled { inner, factor } => factor * inner.increment(r / factor, dr / factor),
            ProfileKind::Shifted { inner, .. } => inner.increment(r, dr),
            _ => {
                if dr.abs() <= 1e-4 * r.max(1.0) {
                    let (_, d, dd) = self.eval(r);
                    d * dr + 0.5 * dd * dr * dr
                } else {
                    self.value(r1) - self.value(r)
                }
            }
        }
    }

    /// Radii where the profile changes regime (kinks of higher derivatives).
    pub fn breakpoints(&self) -> Vec<f64> {
        match self.kind() {
            ProfileKind::Barrier { .. } => vec![1.0, 2.0],
            ProfileKind::Bump { width, .. } => vec![*width],
            ProfileKind::Scaled { inner, factor } => inner.breakpoints().into_iter().map(|b| b * factor).collect(),
            ProfileKind::Shifted { inner, .. } => inner.breakpoints(),
            _ => Vec::new(),
        }
    }

    /// Whether `x' -> v(|x'|)` is twice differentiable at radius `r`.
    pub fn is_smooth_at(&self, r: f64) -> bool {
        let (v, d, dd) = self.eval(r);
        if !(v.is_finite() && d.is_finite() && dd.is_finite()) {
            return false;
        }
        // at the origin a radial function needs a vanishing slope
        r > 0.0 || d.abs() <= 1e-12 * (1.0 + v.abs())
    }

    /// Largest |v'| + |v''| over a grid on [0, r_max].
    pub fn regularity_bound(&self, r_max: f64, points: usize) -> f64 {
        (0..=points)
            .map(|i| r_max * i as f64 / points as f64)
            .map(|r| {
                let (_, d, dd) = self.eval(r);
                d.abs() + dd.abs()
            })
            .filter(|x| x.is_finite())
            .fold(0.0, f64::max)
    }
}

impl fmt::Display for RadialProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind() {
            ProfileKind::Constant { level } => write!(f, "constant(level={level})"),
            ProfileKind::Affine { intercept, slope } => write!(f, "affine(intercept={intercept},slope={slope})"),
            ProfileKind::Sqrt { scale } => write!(f, "sqrt(scale={scale})"),
            ProfileKind::Barrier { epsilon, cutoff } => write!(f, "barrier(epsilon={epsilon},cutoff={})", cutoff.name()),
            ProfileKind::Bump { amplitude, width } => write!(f, "bump(amplitude={amplitude},width={width})"),
            ProfileKind::Sampled(mc) => write!(f, "sampled(knots={})", mc.knots().len()),
            ProfileKind::Scaled { inner, factor } => write!(f, "scaled({inner},factor={factor})"),
            ProfileKind::Shifted { inner, offset } => write!(f, "shifted({inner},offset={offset})"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fd(p: &RadialProfile, r: f64, h: f64) -> (f64, f64) {
        let d1 = (p.value(r + h) - p.value(r - h)) / (2.0 * h);
        let d2 = (p.value(r + h) - 2.0 * p.value(r) + p.value(r - h)) / (h * h);
        (d1, d2)
    }

    #[test]
    fn closed_form_derivatives_match_finite_differences() {
        let cases = [
            RadialProfile::barrier(0.1, Cutoff::QuinticSmoothstep),
            RadialProfile::bump(2.0, 1.6),
            RadialProfile::sqrt(1.0),
            RadialProfile::affine(1.0, 0.3),
            RadialProfile::barrier(0.2, Cutoff::QuinticSmoothstep).scaled(2.0),
        ];
        for p in &cases {
            for &r in &[0.3, 0.9, 1.2, 1.5, 1.83, 2.7, 5.0] {
                let (d1, d2) = fd(p, r, 1e-4);
                let (_, a1, a2) = p.eval(r);
                assert!((d1 - a1).abs() < 1e-6, "{p} d1 at {r}: {d1} vs {a1}");
                assert!((d2 - a2).abs() < 1e-4, "{p} d2 at {r}: {d2} vs {a2}");
            }
        }
    }

    #[test]
    fn barrier_plateau_and_cone() {
        let v = RadialProfile::barrier(0.1, Cutoff::QuinticSmoothstep);
        assert_eq!(v.value(0.5), 0.1);
        assert!((v.value(3.0) - 0.3).abs() < 1e-15);
        let mid = v.value(1.5);
        assert!((0.1..=0.15).contains(&mid));
    }

    #[test]
    fn increment_matches_difference() {
        let cases = [
            RadialProfile::barrier(0.1, Cutoff::QuinticSmoothstep),
            RadialProfile::bump(1.0, 1.0),
            RadialProfile::sqrt(2.0),
            RadialProfile::sampled(vec![0.0, 1.0, 2.0, 4.0], vec![0.0, 0.5, 0.7, 1.0]).unwrap(),
        ];
        for p in &cases {
            for &r in &[0.4, 1.3, 1.9, 3.0] {
                for &dr in &[1e-3, -0.2, 0.5, 1e-7] {
                    let exact = p.value(r + dr) - p.value(r);
                    assert!((p.increment(r, dr) - exact).abs() < 1e-11, "{p} r={r} dr={dr}");
                }
            }
        }
        let v = RadialProfile::barrier(0.1, Cutoff::QuinticSmoothstep);
        let tiny = v.increment(1.5, 1e-25);
        assert!((tiny / 1e-25 - v.first_derivative(1.5)).abs() < 1e-12);
    }

    #[test]
    fn monotone_cubic_preserves_monotonicity() {
        let rs = vec![0.0, 1.0, 2.0, 3.0, 4.0];
        let vs = vec![0.0, 0.1, 3.0, 3.1, 3.2];
        let p = RadialProfile::sampled(rs, vs).unwrap();
        let mut prev = p.value(0.0);
        for i in 1..=400 {
            let v = p.value(i as f64 * 0.01);
            assert!(v >= prev - 1e-15);
            prev = v;
        }
        assert_eq!(p.value(2.0), 3.0);
        // linear continuation past the last knot
        assert!((p.value(5.0) - p.value(4.0) - p.first_derivative(4.0)).abs() < 1e-12);
    }

    #[test]
    fn sampled_derivatives_track_interpolant() {
        let rs: Vec<f64> = (0..=40).map(|i| i as f64 * 0.1).collect();
        let vs: Vec<f64> = rs.iter().map(|r| (1.0 + r * r).sqrt()).collect();
        let p = RadialProfile::sampled(rs, vs).unwrap();
        for &r in &[0.55, 1.27, 2.91] {
            let (d1, _) = fd(&p, r, 1e-6);
            assert!((d1 - p.first_derivative(r)).abs() < 1e-6);
            assert!((p.value(r) - (1.0 + r * r).sqrt()).abs() < 1e-3);
        }
    }

    #[test]
    fn smoothness_at_origin() {
        assert!(RadialProfile::barrier(0.1, Cutoff::QuinticSmoothstep).is_smooth_at(0.0));
        assert!(!RadialProfile::linear(0.1).is_smooth_at(0.0));
        assert!(!RadialProfile::sqrt(1.0).is_smooth_at(0.0));
        assert!(RadialProfile::sqrt(1.0).is_smooth_at(1.0));
    }

    #[test]
    fn spec_parsing() {
        let mut p = BTreeMap::new();
        p.insert("slope".to_string(), 0.1);
        assert_eq!(RadialProfile::from_spec("linear", &p).unwrap().value(2.0), 0.2);
        assert!(RadialProfile::from_spec("constant", &p).is_err());
        assert!(RadialProfile::from_spec("spline", &p).is_err());
    }

    #[test]
    fn rejects_bad_samples() {
        assert!(RadialProfile::sampled(vec![0.5, 1.0], vec![1.0, 1.0]).is_err());
        assert!(RadialProfile::sampled(vec![0.0, 0.0], vec![1.0, 1.0]).is_err());
        assert!(RadialProfile::sampled(vec![0.0], vec![1.0]).is_err());
    }
}
