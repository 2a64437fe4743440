//! Acceptance run: one PASS/FAIL line per criterion, non-zero exit if any fails.

use std::fs;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use nmc_core::barrier::{self, build_barrier, Verdict, VerifyOptions};
use nmc_core::blowdown::{flatness_certificate, holder_rescaling_check, CertificateOptions};
use nmc_core::geometry::{AmbientDim, Body, Cutoff, FractionalOrder, RadialProfile, SublinearEnvelope};
use nmc_core::kernel::{nmc_direct, nmc_graph, per_alpha, Aabb, GFunction, QuadratureConfig};
use nmc_core::sliding::{rescale_for_slide, slide, SlideOptions, SlideVerdict};
use nmc_core::Error;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn d1() -> AmbientDim {
    AmbientDim::new(1).unwrap()
}

fn order(a: f64) -> FractionalOrder {
    FractionalOrder::new(a).unwrap()
}

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn within(limit: Duration, start: Instant, detail: String) -> Outcome {
    let t = start.elapsed();
    check(t <= limit, format!("{detail}; {:.2}s of {}s", t.as_secs_f64(), limit.as_secs()))
}

/// Adaptive Simpson on `[a, b]`.
fn simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64, depth: u32) -> f64 {
    let m = 0.5 * (a + b);
    let whole = (b - a) / 6.0 * (f(a) + 4.0 * f(m) + f(b));
    let left = (m - a) / 6.0 * (f(a) + 4.0 * f(0.5 * (a + m)) + f(m));
    let right = (b - m) / 6.0 * (f(m) + 4.0 * f(0.5 * (m + b)) + f(b));
    if depth == 0 || (left + right - whole).abs() <= 15.0 * tol {
        left + right + (left + right - whole) / 15.0
    } else {
        simpson(f, a, m, 0.5 * tol, depth - 1) + simpson(f, m, b, 0.5 * tol, depth - 1)
    }
}

fn g_suite() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let (mut odd, mut lip, mut inf): (f64, f64, f64) = (0.0, 0.0, 0.0);
    for n in 1..=3 {
        for a in [0.2, 0.5, 0.8] {
            let g = GFunction::new(AmbientDim::new(n).unwrap(), order(a));
            for _ in 0..100 {
                let (t1, t2) = (rng.random_range(-50.0..50.0), rng.random_range(-50.0..50.0));
                odd = odd.max((g.eval(t1) + g.eval(-t1)).abs());
                lip = lip.max((g.eval(t1) - g.eval(t2)).abs() - (t1 - t2).abs());
            }
            // tau = tan(theta) turns G(inf) into int_0^{pi/2} cos^{n-1+alpha}
            let e = n as f64 - 1.0 + a;
            let oracle = simpson(&|th: f64| th.cos().max(0.0).powf(e), 0.0, std::f64::consts::FRAC_PI_2, 1e-15, 50);
            inf = inf.max((g.infinity() - oracle).abs());
        }
    }
    let ok = odd <= 1e-12 && lip <= 1e-10 && inf <= 1e-10;
    let detail = format!("oddness {odd:.1e}, Lipschitz excess {lip:.1e}, G(inf) gap {inf:.1e}");
    if ok {
        within(Duration::from_secs(1), start, detail)
    } else {
        Err(detail)
    }
}

fn halfspace_zero() -> Outcome {
    let start = Instant::now();
    let body = Body::HalfSpace { offset: 0.0 };
    let cfg = QuadratureConfig::default();
    let mut worst: f64 = 0.0;
    for a in [0.2, 0.5, 0.8] {
        for x in [[0.0, 0.0], [0.7, 0.0], [-3.0, 0.0]] {
            let f = nmc_graph(&body, &x, d1(), order(a), &cfg).map_err(|e| e.to_string())?;
            let d = nmc_direct(&body, &x, d1(), order(a), &cfg).map_err(|e| e.to_string())?;
            worst = worst.max(f.value.abs()).max(d.value.abs());
        }
    }
    let detail = format!("max |H| {worst:.1e}");
    if worst <= 1e-6 {
        within(Duration::from_secs(10), start, detail)
    } else {
        Err(detail)
    }
}

fn scaling_law() -> Outcome {
    let alpha = 0.5;
    let barrier_eps = 0.1;
    let f = build_barrier(barrier_eps).map_err(|e| e.to_string())?.body();
    let v = f.two_leaf_profile().unwrap();
    let cfg = QuadratureConfig::for_barrier(barrier_eps);
    let (mut formula_rel, mut oracle_ratio): (f64, f64) = (0.0, 0.0);
    for lambda in [0.5, 2.0] {
        let fl = f.clone().scaled(lambda);
        let factor = f64::powf(lambda, -alpha);
        for r in [0.0, 1.5, 4.0] {
            let x = [r, v.value(r)];
            let xl = [lambda * r, lambda * v.value(r)];
            let h1 = nmc_graph(&f, &x, d1(), order(alpha), &cfg).map_err(|e| e.to_string())?;
            let hl = nmc_graph(&fl, &xl, d1(), order(alpha), &cfg).map_err(|e| e.to_string())?;
            formula_rel = formula_rel.max((hl.value - factor * h1.value).abs() / (factor * h1.value).abs());
            if r == 1.5 {
                let o1 = nmc_direct(&f, &x, d1(), order(alpha), &cfg).map_err(|e| e.to_string())?;
                let ol = nmc_direct(&fl, &xl, d1(), order(alpha), &cfg).map_err(|e| e.to_string())?;
                let allowed = 2.0 * (ol.total_error() + factor * o1.total_error());
                oracle_ratio = oracle_ratio.max((ol.value - factor * o1.value).abs() / allowed);
            }
        }
        let ball = Body::Ball { radius: 1.0 };
        let ball_l = Body::Ball { radius: lambda };
        let q = QuadratureConfig::default();
        for t in [0.3f64, 2.0] {
            let x = [t.cos(), t.sin()];
            let o1 = nmc_direct(&ball, &x, d1(), order(alpha), &q).map_err(|e| e.to_string())?;
            let ol = nmc_direct(&ball_l, &[lambda * x[0], lambda * x[1]], d1(), order(alpha), &q).map_err(|e| e.to_string())?;
            let allowed = 2.0 * (ol.total_error() + factor * o1.total_error());
            oracle_ratio = oracle_ratio.max((ol.value - factor * o1.value).abs() / allowed);
        }
    }
    check(
        formula_rel <= 1e-3 && oracle_ratio <= 1.0,
        format!("formula relative gap {formula_rel:.1e}, oracle gap {oracle_ratio:.2} of 2x error"),
    )
}

fn formula_matches_oracle() -> Outcome {
    let start = Instant::now();
    let eps = 0.2;
    let f = build_barrier(eps).map_err(|e| e.to_string())?.body();
    let v = f.two_leaf_profile().unwrap();
    let cfg = QuadratureConfig::for_barrier(eps);
    let mut worst: f64 = 0.0;
    for a in [0.2, 0.5, 0.8] {
        for (i, r) in [0.0, 0.8, 1.5, 2.5, 6.0].into_iter().enumerate() {
            let x = [r, v.value(r)];
            let q = cfg.with_seed(i as u64);
            let h = nmc_graph(&f, &x, d1(), order(a), &q).map_err(|e| e.to_string())?;
            let o = nmc_direct(&f, &x, d1(), order(a), &q).map_err(|e| e.to_string())?;
            worst = worst.max((h.value - o.value).abs() / (h.total_error() + o.total_error()));
        }
    }
    let detail = format!("largest gap {worst:.2} of summed errors");
    if worst <= 1.0 {
        within(Duration::from_secs(300), start, detail)
    } else {
        Err(detail)
    }
}

fn cone_blowup() -> Outcome {
    let start = Instant::now();
    // each cone constant already enforces ray homogeneity within 3x errors
    let rep = barrier::sweep_cone_constant(&[0.4, 0.2, 0.1, 0.05], d1(), order(0.5), &QuadratureConfig::default())
        .map_err(|e| e.to_string())?;
    let m: Vec<String> = rep.m_values.iter().zip(&rep.errors).map(|(m, e)| format!("{m:.2}±{e:.2}")).collect();
    let detail = format!("M = {}", m.join(", "));
    if rep.blowup_trend == Some(true) {
        within(Duration::from_secs(300), start, detail)
    } else {
        Err(detail)
    }
}

fn barrier_positive() -> Outcome {
    let start = Instant::now();
    let cfg = QuadratureConfig::default();
    let spec = barrier::default_sampling();
    let eps0 = barrier::empirical_eps0(d1(), order(0.5), &cfg, &spec)
        .map_err(|e| e.to_string())?
        .ok_or("no positive epsilon in the bracket")?;
    let opts = VerifyOptions { far_field: false, closure: false, bisect: false };
    let rep = barrier::verify_barrier(eps0, d1(), order(0.5), &cfg, &spec, opts).map_err(|e| e.to_string())?;
    let detail = format!("eps0 {eps0}, {} samples, min margin {:.3}", rep.samples.len(), rep.min_margin);
    if rep.verdict == Verdict::Positive && rep.samples.len() >= 200 && rep.min_margin > 0.0 {
        within(Duration::from_secs(600), start, detail)
    } else {
        Err(detail)
    }
}

fn sliding_mechanism() -> Outcome {
    let cfg = QuadratureConfig::default();
    let opts = SlideOptions::default();
    // 0.05 lies below the bisected eps0, so the starting barrier is positive
    let eps0 = 0.05;
    let empty = slide(&Body::TwoLeaf(RadialProfile::constant(0.0)), eps0, d1(), order(0.5), &cfg, &opts).map_err(|e| e.to_string())?;
    let slab = slide(&Body::TwoLeaf(RadialProfile::constant(0.01)), eps0, d1(), order(0.5), &cfg, &opts).map_err(|e| e.to_string())?;
    let touch = slab.curvature_at_touch.map_or(f64::NAN, |h| h.lower_bound());
    let linear = rescale_for_slide(
        &Body::TwoLeaf(RadialProfile::linear(0.1)),
        &SublinearEnvelope::new(RadialProfile::linear(0.1)),
        eps0,
        1e4,
    );
    let gated = matches!(linear, Err(Error::NotSublinear { .. }));
    check(
        empty.verdict == SlideVerdict::RigidityMechanismConfirmed && slab.verdict == SlideVerdict::TouchFound && touch > 0.0 && gated,
        format!("empty {:?}, slab {:?} with H - err = {touch:.3}, linear gated: {gated}", empty.verdict, slab.verdict),
    )
}

fn perimeter_scaling() -> Outcome {
    let slab = Body::TwoLeaf(RadialProfile::constant(0.5));
    let (omega, outer) = (Aabb::cube(2, 1.0).unwrap(), Aabb::cube(2, 3.0).unwrap());
    let cfg = QuadratureConfig { oracle_samples: 4_000_000, ..Default::default() };
    let p1 = per_alpha(&slab, &omega, &outer, d1(), order(0.5), &cfg).map_err(|e| e.to_string())?;
    let p2 = per_alpha(&slab.clone().scaled(2.0), &omega.scaled(2.0), &outer.scaled(2.0), d1(), order(0.5), &cfg.with_seed(1))
        .map_err(|e| e.to_string())?;
    let k = 2f64.powf(1.5);
    let gap = (p2.value - k * p1.value).abs();
    // combined Monte Carlo standard error, not the padded reported error
    let allowed = 3.0 * p2.standard_error.hypot(k * p1.standard_error);
    check(gap <= allowed, format!("ratio {:.3} vs {k:.3}, gap {gap:.3} allowed {allowed:.3}", p2.value / p1.value))
}

fn blowdown_flatness() -> Outcome {
    let u = RadialProfile::sqrt(1.0);
    let body = Body::Subgraph(u.clone());
    let env = SublinearEnvelope::new(u);
    let opts = CertificateOptions::default();
    let eps = 0.1;
    let r_eps = flatness_certificate(&body, &env, eps, 1.0, &opts).map_err(|e| e.to_string())?.r_eps_predicted;
    let at = flatness_certificate(&body, &env, eps, r_eps, &opts).map_err(|e| e.to_string())?;
    let below = flatness_certificate(&body, &env, eps, 0.99 * r_eps, &opts).map_err(|e| e.to_string())?;
    let excess = below.sup.abs().max(below.inf.abs()) - eps;
    let fixtures = [RadialProfile::sqrt(1.0), RadialProfile::bump(1.0, 2.0), RadialProfile::barrier(0.1, Cutoff::QuinticSmoothstep)];
    let mut gap: f64 = 0.0;
    for (p, r) in fixtures.iter().zip([100.0, 10.0, 10.0]) {
        let h = holder_rescaling_check(p, r, 0.5, 800).map_err(|e| e.to_string())?;
        if h.lhs <= 0.0 || h.lhs.is_nan() {
            return Err(format!("degenerate Hölder fixture {p:?}"));
        }
        gap = gap.max(h.relative_gap());
    }
    check(
        at.passed && !below.passed && excess > opts.grid_tolerance && gap <= 0.01,
        format!("R_eps {r_eps:.3}: passes {}, fails at 0.99 R_eps by {excess:.1e}; Hölder gap {gap:.1e}", at.passed),
    )
}

fn run_cli(args: &[&str], config: &str, out: &Path) -> std::io::Result<i32> {
    let cfg = out.with_extension("cfg");
    fs::write(&cfg, config)?;
    let status = Command::new(env!("CARGO_BIN_EXE_nmc")).args(args).arg("--config").arg(&cfg).arg("--out").arg(out).output()?.status;
    Ok(status.code().unwrap_or(-1))
}

fn snapshot(dir: &Path) -> std::io::Result<Vec<(String, Vec<u8>)>> {
    let mut files = Vec::new();
    for e in fs::read_dir(dir)? {
        let e = e?;
        files.push((e.file_name().to_string_lossy().into_owned(), fs::read(e.path())?));
    }
    files.sort();
    Ok(files)
}

fn cli_determinism() -> Outcome {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let quick = "[quadrature]\noracle_samples = 200000\n";
    let runs = [
        ("curvature", "[curvature]\nradii = 0, 1.5, 4\n"),
        ("barrier-verify", "[barrier-verify]\nepsilon = 0.1\n"),
        ("cone-sweep", "[cone-sweep]\ngrid = 0.4, 0.2\n"),
        ("slide", "[slide]\neps0 = 0.1\n"),
        ("blowdown", ""),
        ("perimeter", ""),
    ];
    let mut compared = 0;
    for (command, section) in runs {
        let config = format!("{quick}{section}");
        let mut outputs = Vec::new();
        for run in ["a", "b"] {
            let out = tmp.path().join(format!("{command}-{run}"));
            let code = run_cli(&[command, "--seed", "5"], &config, &out).map_err(|e| e.to_string())?;
            if code == 1 || code < 0 {
                return Err(format!("{command} failed with exit code {code}"));
            }
            outputs.push((code, snapshot(&out).map_err(|e| e.to_string())?));
        }
        if outputs[0] != outputs[1] {
            return Err(format!("{command} outputs differ between runs"));
        }
        compared += outputs[0].1.len();
    }
    Ok(format!("{compared} files identical across two runs of 6 commands"))
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("G-function suite", g_suite),
        ("half-space curvature vanishes", halfspace_zero),
        ("scaling law", scaling_law),
        ("formula agrees with oracle", formula_matches_oracle),
        ("cone homogeneity and blow-up", cone_blowup),
        ("barrier positivity at eps0", barrier_positive),
        ("sliding mechanism", sliding_mechanism),
        ("perimeter scaling", perimeter_scaling),
        ("blow-down flatness", blowdown_flatness),
        ("CLI determinism", cli_determinism),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let (tag, detail) = match run() {
            Ok(d) => ("PASS", d),
            Err(d) => {
                failed += 1;
                ("FAIL", d)
            }
        };
        println!("criterion {:>2} {tag}  {name}: {detail} [{:.1}s]", i + 1, start.elapsed().as_secs_f64());
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
