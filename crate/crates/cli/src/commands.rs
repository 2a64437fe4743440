use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use rayon::prelude::*;
use serde::Serialize;
use sha2::{Digest, Sha256};

use nmc_core::barrier::{self, Verdict, VerifyOptions};
use nmc_core::blowdown::{self, CertificateOptions};
use nmc_core::geometry::{boundary_sample, AmbientDim, Body, FractionalOrder, Leaf, ProfileKind, RadialProfile, SamplingSpec, SublinearEnvelope};
use nmc_core::kernel::{nmc_direct, nmc_graph, per_alpha, Aabb, QuadratureConfig};
use nmc_core::sliding::{self, SlideOptions};

use crate::config::Config;
use crate::Status;

pub struct Output {
    dir: PathBuf,
}

impl Output {
    pub fn new(dir: &Path) -> Self {
        Self { dir: dir.to_path_buf() }
    }

    fn write(&self, name: &str, contents: &str) -> Result<()> {
        let path = self.dir.join(name);
        std::fs::write(&path, contents).with_context(|| format!("writing {}", path.display()))
    }

    fn write_json(&self, name: &str, value: &impl Serialize) -> Result<()> {
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        self.write(name, &text)
    }
}

struct Common {
    dim: AmbientDim,
    alpha: FractionalOrder,
    seed: u64,
    quad: QuadratureConfig,
}

fn common(cfg: &Config, defaults: QuadratureConfig) -> Result<Common> {
    let dim = AmbientDim::new(cfg.get("run", "n", 1usize)?)?;
    let alpha = FractionalOrder::new(cfg.get("run", "alpha", 0.5f64)?)?;
    let seed = cfg.get("run", "seed", 0u64)?;
    let q = "quadrature";
    let quad = QuadratureConfig {
        pv_inner_radius: cfg.get(q, "pv_inner_radius", defaults.pv_inner_radius)?,
        truncation_radius: cfg.get(q, "truncation_radius", defaults.truncation_radius)?,
        target_tolerance: cfg.get(q, "target_tolerance", defaults.target_tolerance)?,
        max_subdivisions: cfg.get(q, "max_subdivisions", defaults.max_subdivisions)?,
        oracle_samples: cfg.get(q, "oracle_samples", defaults.oracle_samples)?,
        mc_confidence: cfg.get(q, "mc_confidence", defaults.mc_confidence)?,
        seed,
    };
    quad.validate()?;
    Ok(Common { dim, alpha, seed, quad })
}

/// Checks for stray keys, writes `resolved.cfg` and returns its SHA-256
/// (hex, ignoring `threads`).
fn finish(cfg: &Config, out: &Output, section: &str) -> Result<String> {
    cfg.check_unused(&["run", "quadrature", section])?;
    let text = cfg.resolved();
    out.write("resolved.cfg", &text)?;
    // results do not depend on the thread count, so neither does the hash
    let mut hasher = Sha256::new();
    for line in text.lines().filter(|l| !l.starts_with("threads =")) {
        hasher.update(line.as_bytes());
        hasher.update(b"\n");
    }
    Ok(format!("{:x}", hasher.finalize()))
}

/// A radial profile from `<prefix>kind` plus numeric `<prefix><param>` keys,
/// or `<prefix>kind = csv` with `<prefix>path`.
fn profile(cfg: &Config, section: &str, prefix: &str, default_kind: &str, defaults: &[(&str, f64)]) -> Result<RadialProfile> {
    let kind = cfg.get_str(section, &format!("{prefix}kind"), default_kind);
    if kind == "csv" {
        let path: String = cfg.require(section, &format!("{prefix}path"))?;
        return Ok(RadialProfile::from_csv(path)?);
    }
    let mut params = BTreeMap::new();
    if kind == default_kind {
        for (k, v) in defaults {
            params.insert(k.to_string(), cfg.get(section, &format!("{prefix}{k}"), *v)?);
        }
    }
    params.extend(cfg.params(section, prefix, &["kind", "path"])?);
    Ok(RadialProfile::from_spec(&kind, &params)?)
}

fn barrier_epsilon(p: &RadialProfile) -> Option<f64> {
    match p.kind() {
        ProfileKind::Barrier { epsilon, .. } => Some(*epsilon),
        _ => None,
    }
}

fn leaf(cfg: &Config, section: &str) -> Result<Leaf> {
    Ok(match cfg.get_str(section, "leaf", "upper").as_str() {
        "upper" => Leaf::Upper,
        "lower" => Leaf::Lower,
        "both" => Leaf::Both,
        other => bail!("[{section}] leaf must be upper, lower or both, got `{other}`"),
    })
}

#[derive(Serialize)]
struct CurvatureRecord<'a> {
    point: &'a [f64],
    value: f64,
    error_core: f64,
    error_midfield: f64,
    error_tail: f64,
    config_hash: &'a str,
}

pub fn curvature(cfg: &Config, out: &Output) -> Result<Status> {
    let s = "curvature";
    let kind = cfg.get_str(s, "body", "twoleaf");
    let mut pv_default = None;
    let body = match kind.as_str() {
        "twoleaf" => {
            let v = profile(cfg, s, "profile.", "barrier", &[("epsilon", 0.1)])?;
            pv_default = barrier_epsilon(&v);
            Body::TwoLeaf(v)
        }
        "subgraph" => Body::Subgraph(profile(cfg, s, "profile.", "constant", &[("level", 0.0)])?),
        "cone" => Body::Cone { slope: cfg.get(s, "slope", 0.1)? },
        "ball" => Body::Ball { radius: cfg.get(s, "radius", 1.0)? },
        "halfspace" => Body::HalfSpace { offset: cfg.get(s, "offset", 0.0)? },
        other => bail!("[{s}] unknown body `{other}`"),
    };
    let direct = match cfg.get_str(s, "method", "auto").as_str() {
        "auto" => matches!(body, Body::Cone { .. } | Body::Ball { .. }),
        "formula" => false,
        "direct" => true,
        other => bail!("[{s}] method must be auto, formula or direct, got `{other}`"),
    };
    let spec = if let Body::Ball { .. } = body {
        SamplingSpec::points(cfg.get(s, "points", 8usize)?)
    } else {
        SamplingSpec::radial(cfg.get_list(s, "radii", &[0.0, 0.5, 1.0, 1.5, 2.0, 3.0, 5.0, 10.0])?).with_leaf(leaf(cfg, s)?)
    };
    let defaults = pv_default.map_or_else(QuadratureConfig::default, QuadratureConfig::for_barrier);
    let c = common(cfg, defaults)?;
    let hash = finish(cfg, out, s)?;

    let samples = boundary_sample(&body, c.dim, &spec)?;
    let results = samples
        .par_iter()
        .enumerate()
        .map(|(i, p)| {
            let q = c.quad.with_seed(c.seed.wrapping_add(i as u64));
            if direct {
                nmc_direct(&body, &p.point, c.dim, c.alpha, &q)
            } else {
                nmc_graph(&body, &p.point, c.dim, c.alpha, &q)
            }
        })
        .collect::<std::result::Result<Vec<_>, _>>()?;

    let n = c.dim.n();
    let mut csv = String::from("r,height,H,err_total\n");
    let mut records = Vec::with_capacity(samples.len());
    for (p, r) in samples.iter().zip(&results) {
        writeln!(csv, "{},{},{},{}", p.r, p.point[n], r.value, r.total_error())?;
        records.push(CurvatureRecord {
            point: &p.point,
            value: r.value,
            error_core: r.error_core,
            error_midfield: r.error_midfield,
            error_tail: r.error_tail,
            config_hash: &hash,
        });
    }
    out.write("curvature.csv", &csv)?;
    out.write_json("curvature.json", &records)?;
    Ok(Status::Done)
}

fn verdict_status(v: Verdict) -> Status {
    if v == Verdict::Positive {
        Status::Done
    } else {
        Status::Inconclusive
    }
}

/// Reads a number or the word `auto`.
fn auto_or<T: std::str::FromStr + ToString>(cfg: &Config, section: &str, key: &str) -> Result<Option<T>>
where
    T::Err: std::fmt::Display,
{
    if cfg.raw(section, key).is_none_or(|v| v == "auto") {
        cfg.get_str(section, key, "auto");
        Ok(None)
    } else {
        Ok(Some(cfg.require(section, key)?))
    }
}

pub fn barrier_verify(cfg: &Config, out: &Output) -> Result<Status> {
    let s = "barrier-verify";
    let epsilon: Option<f64> = if cfg.has(s, "epsilon") { auto_or(cfg, s, "epsilon")? } else { Some(cfg.get(s, "epsilon", 0.05)?) };
    let options = VerifyOptions {
        far_field: cfg.get(s, "far_field", true)?,
        closure: cfg.get(s, "closure", true)?,
        bisect: cfg.get(s, "bisect", true)?,
    };
    let c = common(cfg, QuadratureConfig::default())?;
    finish(cfg, out, s)?;
    let spec = barrier::default_sampling();
    let report = match epsilon {
        Some(eps) => barrier::verify_barrier(eps, c.dim, c.alpha, &c.quad, &spec, options)?,
        None => {
            let eps0 = barrier::empirical_eps0(c.dim, c.alpha, &c.quad, &spec)?
                .context("no epsilon in the bisection bracket gave a positive verdict")?;
            let mut r = barrier::verify_barrier(eps0, c.dim, c.alpha, &c.quad, &spec, VerifyOptions { bisect: false, ..options })?;
            r.empirical_eps0 = Some(eps0);
            r
        }
    };
    out.write_json("barrier.json", &report)?;
    Ok(verdict_status(report.verdict))
}

pub fn cone_sweep(cfg: &Config, out: &Output) -> Result<Status> {
    let s = "cone-sweep";
    let grid = cfg.get_list(s, "grid", &[0.4, 0.2, 0.1, 0.05])?;
    let c = common(cfg, QuadratureConfig::default())?;
    finish(cfg, out, s)?;
    let report = barrier::sweep_cone_constant(&grid, c.dim, c.alpha, &c.quad)?;
    let mut csv = String::from("epsilon,M,err\n");
    for ((e, m), err) in report.epsilons.iter().zip(&report.m_values).zip(&report.errors) {
        writeln!(csv, "{e},{m},{err}")?;
    }
    out.write("cone_sweep.csv", &csv)?;
    out.write_json("cone_sweep.json", &report)?;
    Ok(if report.blowup_trend == Some(false) { Status::Inconclusive } else { Status::Done })
}

#[derive(Serialize)]
struct SlideReport<'a> {
    lambda: f64,
    eps_star: f64,
    floor: f64,
    touch_point: &'a Option<Vec<f64>>,
    #[serde(rename = "H_at_touch")]
    h_at_touch: Option<f64>,
    err: Option<f64>,
    verdict: sliding::SlideVerdict,
    interpretation: &'a str,
    eps0: f64,
}

pub fn slide(cfg: &Config, out: &Output) -> Result<Status> {
    let s = "slide";
    let candidate = Body::TwoLeaf(profile(cfg, s, "candidate.", "constant", &[("level", 0.5)])?);
    let envelope = SublinearEnvelope::new(profile(cfg, s, "envelope.", "constant", &[("level", 1.0)])?);
    let eps0: Option<f64> = auto_or(cfg, s, "eps0")?;
    let rescale = cfg.get(s, "rescale", true)?;
    let envelope_range = cfg.get(s, "envelope_range", 1e4)?;
    let d = SlideOptions::default();
    let opts = SlideOptions {
        floor: cfg.get(s, "floor", d.floor)?,
        iterations: cfg.get(s, "iterations", d.iterations)?,
        r_max: cfg.get(s, "r_max", d.r_max)?,
        grid_points: cfg.get(s, "grid_points", d.grid_points)?,
        grid_tolerance: cfg.get(s, "grid_tolerance", d.grid_tolerance)?,
    };
    let c = common(cfg, QuadratureConfig::default())?;
    finish(cfg, out, s)?;

    let eps0 = match eps0 {
        Some(e) => e,
        None => barrier::empirical_eps0(c.dim, c.alpha, &c.quad, &barrier::default_sampling())?
            .context("no epsilon in the bisection bracket gave a positive verdict")?,
    };
    let body = if rescale { sliding::rescale_for_slide(&candidate, &envelope, eps0, envelope_range)?.1 } else { candidate };
    let outcome = sliding::slide(&body, eps0, c.dim, c.alpha, &c.quad, &opts)?;
    let report = SlideReport {
        lambda: outcome.lambda,
        eps_star: outcome.eps_star,
        floor: outcome.floor,
        touch_point: &outcome.touch_point,
        h_at_touch: outcome.curvature_at_touch.map(|r| r.value),
        err: outcome.curvature_at_touch.map(|r| r.total_error()),
        verdict: outcome.verdict,
        interpretation: &outcome.interpretation,
        eps0,
    };
    out.write_json("slide.json", &report)?;
    Ok(Status::Done)
}

#[derive(Serialize)]
struct CertificateReport {
    #[serde(rename = "R")]
    r: f64,
    epsilon: f64,
    #[serde(rename = "R_eps_predicted")]
    r_eps_predicted: f64,
    passed: bool,
    violator: Option<Vec<f64>>,
}

pub fn blowdown(cfg: &Config, out: &Output) -> Result<Status> {
    let s = "blowdown";
    let u = profile(cfg, s, "profile.", "sqrt", &[("scale", 1.0)])?;
    let envelope = if cfg.has(s, "envelope.kind") { profile(cfg, s, "envelope.", "sqrt", &[])? } else { u.clone() };
    let epsilon = cfg.get(s, "epsilon", 0.1)?;
    let r: Option<f64> = auto_or(cfg, s, "R")?;
    let holder_r = cfg.get_list(s, "holder_R", &[10.0, 100.0])?;
    let beta = cfg.get(s, "beta", 0.5)?;
    let holder_grid = cfg.get(s, "holder_grid", 400usize)?;
    let d = CertificateOptions::default();
    let opts = CertificateOptions {
        grid_points: cfg.get(s, "grid_points", d.grid_points)?,
        modulus_range: cfg.get(s, "modulus_range", d.modulus_range)?,
        grid_tolerance: cfg.get(s, "grid_tolerance", d.grid_tolerance)?,
    };
    // no curvature is computed here, but [run] is shared by every command
    common(cfg, QuadratureConfig::default())?;
    finish(cfg, out, s)?;

    let body = Body::Subgraph(u.clone());
    let envelope = SublinearEnvelope::new(envelope);
    let r = match r {
        Some(r) => r,
        None => blowdown::flatness_certificate(&body, &envelope, epsilon, 1.0, &opts)?.r_eps_predicted,
    };
    let cert = blowdown::flatness_certificate(&body, &envelope, epsilon, r, &opts)?;
    out.write_json(
        "certificate.json",
        &CertificateReport { r: cert.r, epsilon, r_eps_predicted: cert.r_eps_predicted, passed: cert.passed, violator: cert.violator.clone() },
    )?;
    let mut csv = String::from("R,beta,lhs,rhs\n");
    for &hr in &holder_r {
        let h = blowdown::holder_rescaling_check(&u, hr, beta, holder_grid)?;
        writeln!(csv, "{},{},{},{}", h.r, h.beta, h.lhs, h.rhs)?;
    }
    out.write("holder.csv", &csv)?;
    Ok(if cert.passed { Status::Done } else { Status::Inconclusive })
}

pub fn perimeter(cfg: &Config, out: &Output) -> Result<Status> {
    let s = "perimeter";
    let body = match cfg.get_str(s, "body", "twoleaf").as_str() {
        "twoleaf" => Body::TwoLeaf(profile(cfg, s, "profile.", "constant", &[("level", 0.5)])?),
        "subgraph" => Body::Subgraph(profile(cfg, s, "profile.", "constant", &[("level", 0.0)])?),
        "ball" => Body::Ball { radius: cfg.get(s, "radius", 1.0)? },
        "halfspace" => Body::HalfSpace { offset: cfg.get(s, "offset", 0.0)? },
        other => bail!("[{s}] unknown body `{other}`"),
    };
    let omega = cfg.get(s, "omega", 1.0)?;
    let outer = cfg.get(s, "outer", 3.0)?;
    let scale = cfg.get(s, "scale", 1.0)?;
    let c = common(cfg, QuadratureConfig::default())?;
    finish(cfg, out, s)?;
    if outer <= omega {
        bail!("[{s}] outer box must be larger than omega");
    }
    let total = c.dim.total();
    let omega_box = Aabb::cube(total, omega)?.scaled(scale);
    let outer_box = Aabb::cube(total, outer)?.scaled(scale);
    let body = if scale == 1.0 { body } else { body.scaled(scale) };
    let est = per_alpha(&body, &omega_box, &outer_box, c.dim, c.alpha, &c.quad)?;
    out.write_json("perimeter.json", &est)?;
    Ok(Status::Done)
}
