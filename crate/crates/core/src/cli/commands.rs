use serde::Serialize;
use serde_json::{json, Value};

use crate::boltzmann::{
    build_model, max_certified_amplitude, scale_family, stable_data, tail_experiment, ModelOptions, TailOptions,
};
use crate::cli::output::{numeric_csv, OutputSink};
use crate::cli::{Check, Cli, Command};
use crate::config::{spectrum_from_block, Block, RunConfig};
use crate::error::{Error, Result};
use crate::estimates::bochner::{BAND_FACTOR, INCREMENT_FLOOR, NORM_TOL};
use crate::estimates::{
    bochner_counterexample, decay_fit, haar_c2, haar_l4_bound, haar_tau_grid, l2_tail_series, quadratic_form_series,
    sharpness_probe, techcor_check, DecayWindow,
};
use crate::linear::{bvp_report, random_instance, BoundaryData};
use crate::nonlinear::{
    picard_solve, BilinearMap, CutoffBilinear, LinearMap, NonlinearMap, PicardConfig, PicardSolution, ZeroMap,
};
use crate::semigroup::{dyadic_grid, sharp_bound_scan};
use crate::spectral::{HVec, SpectrumSpec};
use crate::trajectory::{geometric_grid, uniform_grid, Trajectory};

/// Result of a command that ran to completion.
#[derive(Debug, Clone, PartialEq)]
pub enum Outcome {
    Pass,
    Fail(String),
}

fn verdict(pass: bool, what: impl Into<String>) -> Outcome {
    if pass {
        Outcome::Pass
    } else {
        Outcome::Fail(what.into())
    }
}

/// Slack on fitted small-time slopes.
const SLOPE_SLACK: f64 = 0.15;

pub(crate) fn dispatch(cli: &Cli, mut cfg: RunConfig) -> Result<Outcome> {
    let seed = match cli.seed {
        Some(s) => s,
        None => cfg.seed()?.unwrap_or(0),
    };
    apply_overrides(&cli.command, &mut cfg)?;
    let sink = OutputSink {
        dir: cli.out.clone(),
        config_hash: cfg.hash(&format!("{:?}\nseed={seed}", cli.command)),
        config_text: cfg.text().to_string(),
        seed,
    };
    match &cli.command {
        Command::Simulate { .. } => simulate(&cfg, &sink, seed),
        Command::Verify { check, k, r, trajectory } => verify(&cfg, &sink, seed, *check, *k, *r, trajectory.as_deref()),
        Command::Bvp => bvp(&cfg, &sink, seed),
        Command::BoltzmannTail { .. } => boltzmann_tail(&cfg, &sink, seed),
        Command::SharpnessScan { .. } => sharpness_scan(&cfg, &sink),
    }
}

fn inline_block(name: &str, text: &str) -> Result<Block> {
    let t = text.trim();
    let t = t.strip_prefix('{').and_then(|s| s.strip_suffix('}')).unwrap_or(t);
    Block::parse(name, t)
}

/// Flags override the matching config keys.
fn apply_overrides(cmd: &Command, cfg: &mut RunConfig) -> Result<()> {
    match cmd {
        Command::Simulate { spectrum, g0, t_end, tol, gamma, grid_theta } => {
            if let Some(s) = spectrum {
                cfg.set_block(inline_block("spectrum", s)?);
            }
            if let Some(g) = g0 {
                cfg.set_block(inline_block("g0", &format!("kind: explicit, values: {g}"))?);
            }
            let mut solver = cfg.block_or_empty("solver")?;
            let sets = [("T", t_end), ("tol", tol), ("gamma", gamma), ("grid_theta", grid_theta)];
            for (key, v) in sets {
                if let Some(v) = v {
                    solver.set(key, v);
                }
            }
            cfg.set_block(solver);
        }
        Command::BoltzmannTail { k, amplitude, g0_scale_sweep, t_end } => {
            let mut b = cfg.block_or_empty("boltzmann")?;
            if let Some(k) = k {
                b.set("K", k);
            }
            if let Some(a) = amplitude {
                b.set("amplitude", a);
            }
            if let Some(t) = t_end {
                b.set("T", t);
            }
            if let Some(s) = g0_scale_sweep {
                let list = Block::parse("sweep", &format!("scales: {s}"))?.f64_list("scales")?.unwrap_or_default();
                b.set_list("scales", &list);
            }
            cfg.set_block(b);
        }
        Command::SharpnessScan { r, lo, hi } => {
            let mut b = cfg.block_or_empty("sharpness_scan")?;
            if let Some(r) = r {
                b.set("r", r);
            }
            if let Some(lo) = lo {
                b.set("lo_exp", lo);
            }
            if let Some(hi) = hi {
                b.set("hi_exp", hi);
            }
            cfg.set_block(b);
        }
        Command::Verify { .. } | Command::Bvp => {}
    }
    Ok(())
}

fn load_spectrum(cfg: &RunConfig, seed: u64) -> Result<SpectrumSpec> {
    spectrum_from_block(cfg.require_block("spectrum")?, seed)
}

struct Solver {
    picard: PicardConfig,
    grid: Vec<f64>,
}

fn load_solver(cfg: &RunConfig) -> Result<Solver> {
    let b = cfg.block_or_empty("solver")?;
    b.check_keys(&["T", "tol", "gamma", "grid_theta", "t_min", "head", "max_iter", "grid", "cells"])?;
    let t_end = b.f64_or("T", 20.0)?;
    let d = PicardConfig::default();
    let picard = PicardConfig {
        gamma: b.f64_or("gamma", d.gamma)?,
        tol: b.f64_or("tol", d.tol)?,
        max_iter: b.usize_or("max_iter", d.max_iter)?,
    };
    if !(picard.gamma > 0.0 && picard.gamma < 1.0) {
        return Err(Error::Config(format!("solver.gamma must lie in (0, 1), got {}", picard.gamma)));
    }
    if !(picard.tol > 0.0) {
        return Err(Error::Config(format!("solver.tol must be positive, got {}", picard.tol)));
    }
    if !(t_end > 0.0) {
        return Err(Error::Config(format!("solver.T must be positive, got {t_end}")));
    }
    let grid = match b.str_or("grid", "geometric")? {
        "geometric" => geometric_grid(
            t_end,
            b.f64_or("grid_theta", 0.95)?,
            b.f64_or("t_min", 2f64.powi(-14))?,
            b.usize_or("head", 16)?,
        )?,
        "uniform" => uniform_grid(0.0, t_end, b.usize_or("cells", 2000)?),
        other => return Err(Error::Config(format!("solver.grid: unknown kind {other:?}"))),
    };
    Ok(Solver { picard, grid })
}

fn load_nonlinearity(cfg: &RunConfig, n: usize, seed: u64) -> Result<Box<dyn NonlinearMap>> {
    let b = cfg.block_or_empty("nonlinearity")?;
    b.check_keys(&["kind", "c", "amp", "lip", "rho", "seed", "invariants"])?;
    Ok(match b.str_or("kind", "zero")? {
        "zero" => Box::new(ZeroMap { n }),
        "linear" => Box::new(LinearMap { n, c: b.require_f64("c")? }),
        "bilinear" => {
            let invariants = b.usize_list("invariants")?.unwrap_or_default();
            let bm = BilinearMap::random_symmetric(n, b.u64_or("seed", seed)?, &invariants)?;
            let rho = b.f64_or("rho", 1.0)?;
            let amp = match (b.f64("amp")?, b.f64("lip")?) {
                (Some(a), None) => a,
                (None, Some(l)) => CutoffBilinear::max_amplitude(&bm, rho, l),
                (None, None) => CutoffBilinear::max_amplitude(&bm, rho, 0.2),
                (Some(_), Some(_)) => return Err(Error::Config("nonlinearity: give amp or lip, not both".into())),
            };
            Box::new(CutoffBilinear::new(bm, rho, amp)?)
        }
        other => return Err(Error::Config(format!("nonlinearity: unknown kind {other:?}"))),
    })
}

fn load_g0(cfg: &RunConfig, spec: &SpectrumSpec, seed: u64) -> Result<HVec> {
    let b = cfg.block_or_empty("g0")?;
    b.check_keys(&["kind", "values", "index", "scale", "size", "seed"])?;
    match b.str_or("kind", "random")? {
        "explicit" => {
            let v = b.f64_list("values")?.ok_or_else(|| Error::Config("g0: explicit kind needs values".into()))?;
            if v.len() != spec.dim() {
                return Err(Error::Config(format!("g0 has {} values, spectrum has {}", v.len(), spec.dim())));
            }
            Ok(HVec(v))
        }
        "unit" => {
            let j = b.usize_or("index", 0)?;
            if j >= spec.dim() {
                return Err(Error::Config(format!("g0.index {j} out of range")));
            }
            Ok(HVec::unit(spec.dim(), j).scale(b.f64_or("scale", 1.0)?))
        }
        "random" => stable_data(spec, b.u64_or("seed", seed)?, b.f64_or("size", 0.5)?),
        other => Err(Error::Config(format!("g0: unknown kind {other:?}"))),
    }
}

struct Simulated {
    spec: SpectrumSpec,
    g: Box<dyn NonlinearMap>,
    solution: PicardSolution,
}

fn run_simulation(cfg: &RunConfig, seed: u64) -> Result<Simulated> {
    let spec = load_spectrum(cfg, seed)?;
    let solver = load_solver(cfg)?;
    let g = load_nonlinearity(cfg, spec.dim(), seed)?;
    let g0 = load_g0(cfg, &spec, seed)?;
    let solution = picard_solve(&spec, g.as_ref(), &g0, &solver.grid, &solver.picard, None)?;
    Ok(Simulated { spec, g, solution })
}

fn to_json<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("reports serialize")
}

fn simulate(cfg: &RunConfig, sink: &OutputSink, seed: u64) -> Result<Outcome> {
    let sim = match run_simulation(cfg, seed) {
        Ok(s) => s,
        Err(e @ Error::Divergence { .. }) => {
            sink.json("simulate.json", "simulate", json!({"converged": false, "error": e.to_string()}))?;
            return Err(e);
        }
        Err(e) => return Err(e),
    };
    let x = &sim.solution.trajectory;
    sink.csv("trajectory.csv", &x.to_csv())?;
    sink.json(
        "simulate.json",
        "simulate",
        json!({
            "converged": true,
            "alphas": sim.spec.alphas(),
            "report": to_json(&sim.solution.report),
        }),
    )?;
    Ok(Outcome::Pass)
}

/// Trajectory for a check: a file, a smooth bump, or a fresh simulation.
fn check_trajectory(
    cfg: &RunConfig,
    b: &Block,
    seed: u64,
    file: Option<&std::path::Path>,
    default_source: &str,
) -> Result<(Trajectory, Option<Simulated>)> {
    let source = if file.is_some() { "file" } else { b.str_or("source", default_source)? };
    match source {
        "file" => {
            let path = match file {
                Some(p) => p.to_path_buf(),
                None => b.str("file")?.ok_or_else(|| Error::Config("verify: source file needs file".into()))?.into(),
            };
            let text = std::fs::read_to_string(&path)
                .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
            Ok((Trajectory::from_csv(&text)?, None))
        }
        "bump" => {
            let t_end = b.f64_or("T", 4.0)?;
            let center = b.f64_or("center", 0.5 * t_end)?;
            let width = b.f64_or("width", 0.25)?;
            let dim = b.usize_or("dim", 1)?;
            let grid = uniform_grid(0.0, t_end, b.usize_or("cells", 4000)?);
            let x = Trajectory::from_fn(&grid, |t| {
                let v = (-((t - center) / width).powi(2)).exp();
                HVec((0..dim).map(|j| v / (j + 1) as f64).collect())
            })?;
            Ok((x, None))
        }
        "simulate" => {
            let sim = run_simulation(cfg, seed)?;
            Ok((sim.solution.trajectory.clone(), Some(sim)))
        }
        other => Err(Error::Config(format!("verify.source: unknown {other:?}"))),
    }
}

const VERIFY_KEYS: &[&str] = &[
    "source",
    "file",
    "k",
    "r",
    "halvings",
    "sigma_lo",
    "sigma_hi",
    "lo_exp",
    "hi_exp",
    "large_t_start",
    "pairs",
    "center",
    "width",
    "T",
    "cells",
    "dim",
];

fn verify(
    cfg: &RunConfig,
    sink: &OutputSink,
    seed: u64,
    check: Check,
    k: Option<u32>,
    r: Option<f64>,
    file: Option<&std::path::Path>,
) -> Result<Outcome> {
    let b = cfg.block_or_empty("verify")?;
    b.check_keys(VERIFY_KEYS)?;
    let name = format!("{check:?}").to_lowercase();
    let (pass, margin, params, report, csv) = match check {
        Check::Quadform => {
            let (x, sim) = check_trajectory(cfg, &b, seed, file, "simulate")?;
            let spec = match sim {
                Some(s) => s.spec,
                None => load_spectrum(cfg, seed)?,
            };
            let q = quadratic_form_series(&spec, &x)?;
            let margin = q.decay.margin.min(q.nonnegative.margin).min(-q.max_excess);
            let csv = numeric_csv(&["t", "quadratic_form"], q.times.iter().zip(&q.values).map(|(t, v)| vec![*t, *v]));
            (q.pass, margin, json!({"tol_mono": q.tol_mono}), to_json(&q), csv)
        }
        Check::Tails => {
            let (x, _) = check_trajectory(cfg, &b, seed, file, "simulate")?;
            let t = l2_tail_series(&x);
            let csv = numeric_csv(
                &["t", "tail_l2_sq", "bound"],
                t.times.iter().zip(&t.tails).map(|(s, v)| {
                    vec![*s, *v, (-(s - t.times[0])).exp() * (1.0 + crate::estimates::dissipation::DECAY_TOL)]
                }),
            );
            (t.pass, t.bound.margin, json!({}), to_json(&t), csv)
        }
        Check::Decay => {
            let (x, _) = check_trajectory(cfg, &b, seed, file, "simulate")?;
            let k_max = k.map(|k| k as usize).unwrap_or(b.usize_or("k", 3)?);
            let d = DecayWindow::default();
            let window = DecayWindow {
                lo_exp: b.f64_or("lo_exp", d.lo_exp as f64)? as i32,
                hi_exp: b.f64_or("hi_exp", d.hi_exp as f64)? as i32,
                large_t_start: b.f64_or("large_t_start", d.large_t_start)?,
            };
            let reports = decay_fit(&x, k_max, window)?;
            let mut margin = f64::INFINITY;
            let mut pass = true;
            let mut rows = Vec::new();
            for r in &reports {
                let kf = r.k as f64;
                margin = margin.min(r.small_t_slope + kf + SLOPE_SLACK);
                pass &= r.small_t_slope >= -kf - SLOPE_SLACK && r.large_t_rate.is_some_and(|c| c > 0.0);
                rows.extend(r.samples.iter().map(|(t, v)| vec![kf, *t, *v]));
            }
            let sharp: Vec<bool> =
                reports.iter().map(|r| (r.small_t_slope + r.k as f64).abs() <= SLOPE_SLACK).collect();
            let csv = numeric_csv(&["k", "t", "derivative_norm"], rows);
            (
                pass,
                margin,
                json!({"k_max": k_max, "window": to_json(&window), "slope_slack": SLOPE_SLACK, "rate_is_sharp": sharp}),
                to_json(&reports),
                csv,
            )
        }
        Check::Sharpness => {
            let spec = load_spectrum(cfg, seed)?;
            let k_max = k.unwrap_or(b.usize_or("k", 2)? as u32);
            let mut rows = Vec::new();
            let mut reports = Vec::new();
            let mut pass = true;
            let mut margin = f64::INFINITY;
            for k in 0..=k_max {
                let s = sharpness_probe(&spec, k)?;
                if k == 0 {
                    let e = (-1f64).exp();
                    let dev = s.rows.iter().map(|r| (r.derivative_norm - e).abs()).fold(0.0, f64::max);
                    pass &= dev <= 1e-15;
                    margin = margin.min(1e-15 - dev);
                } else {
                    let spread = (s.max_ratio - s.min_ratio) / s.max_ratio;
                    pass &= s.min_ratio > 0.0 && spread <= 1e-12;
                    margin = margin.min(s.min_ratio);
                }
                rows.extend(
                    s.rows.iter().map(|r| vec![k as f64, r.n as f64, r.t, r.derivative_norm, r.ratio, r.sup_ratio]),
                );
                reports.push(s);
            }
            let csv = numeric_csv(&["k", "n", "t", "derivative_norm", "ratio", "sup_ratio"], rows);
            (pass, margin, json!({"k_max": k_max}), to_json(&reports), csv)
        }
        Check::Haar => {
            let (x, _) = check_trajectory(cfg, &b, seed, file, "bump")?;
            let h = haar_l4_bound(&x, None)?;
            let taus = haar_tau_grid(&x);
            let rows: Result<Vec<Vec<f64>>> = taus.iter().map(|t| Ok(vec![*t, haar_c2(&x, *t)?])).collect();
            let csv = numeric_csv(&["tau", "c2"], rows?);
            (h.check.holds, h.check.margin, json!({"shifts": h.shifts}), to_json(&h), csv)
        }
        Check::Bochner => {
            let r = match r {
                Some(r) => r,
                None => b.f64_or("r", 2.0)?,
            };
            let lo = b.f64_or("sigma_lo", -24.0)? as i32;
            let hi = b.f64_or("sigma_hi", -4.0)? as i32;
            let halvings = b.usize_or("halvings", 24)? as u32;
            let rep = bochner_counterexample(r, &dyadic_grid(lo, hi), halvings)?;
            if let Some(w) = &rep.warning {
                eprintln!("warning: {w}");
            }
            let margin = (NORM_TOL - (rep.norm_sq - rep.norm_sq_exact).abs())
                .min(BAND_FACTOR - rep.band_ratio)
                .min(rep.last_increment_ratio - INCREMENT_FLOOR);
            let csv = numeric_csv(&["sigma", "g", "scaled"], rep.band.iter().map(|(s, g, c)| vec![*s, *g, *c]));
            sink.csv(
                "verify_bochner_partial.csv",
                &numeric_csv(
                    &["epsilon", "partial_integral", "increment"],
                    rep.partial.iter().zip(&rep.increments).map(|((e, p), i)| vec![*e, *p, *i]),
                ),
            )?;
            (
                rep.pass,
                margin,
                json!({"r": r, "sigma_lo": lo, "sigma_hi": hi, "halvings": halvings}),
                to_json(&rep),
                csv,
            )
        }
        Check::Techcor => {
            let (x, sim) = check_trajectory(cfg, &b, seed, file, "simulate")?;
            let (spec, g): (SpectrumSpec, Box<dyn NonlinearMap>) = match sim {
                Some(s) => (s.spec, s.g),
                None => {
                    let spec = load_spectrum(cfg, seed)?;
                    let g = load_nonlinearity(cfg, spec.dim(), seed)?;
                    (spec, g)
                }
            };
            // ½⟨Ax, x⟩' = -|x|² + ⟨G(x), x⟩
            let h = x.map(|_, v| spec.apply_a(v).expect("dimension checked").scale(0.5))?;
            let f: Vec<f64> = x.values().iter().map(|v| g.eval(v).dot(v).max(0.0)).collect();
            let t_end = x.end();
            let pairs: Vec<(f64, f64)> = match b.f64_list("pairs")? {
                Some(p) if p.len() % 2 == 0 && !p.is_empty() => p.chunks(2).map(|c| (c[0], c[1])).collect(),
                Some(_) => return Err(Error::Config("verify.pairs needs an even number of values".into())),
                None => vec![(0.5, 1.0), (1.0, 2.0), (0.25, 0.5 * t_end)],
            };
            let rep = techcor_check(&h, &x, &f, &pairs)?;
            let margin = rep.pointwise.iter().chain(&rep.tail).map(|p| p.check.margin).fold(f64::INFINITY, f64::min);
            let rows = rep
                .pointwise
                .iter()
                .zip(&rep.tail)
                .map(|(p, q)| vec![p.t_prime, p.t, p.check.lhs, p.check.rhs, q.check.lhs, q.check.rhs]);
            let csv = numeric_csv(&["t_prime", "t", "pointwise_lhs", "pointwise_rhs", "tail_lhs", "tail_rhs"], rows);
            (rep.pass, margin, json!({"pairs": pairs}), to_json(&rep), csv)
        }
    };
    sink.csv(&format!("verify_{name}.csv"), &csv)?;
    sink.json(
        &format!("verify_{name}.json"),
        "verify",
        json!({"check": name, "pass": pass, "margin": margin, "params": params, "report": report}),
    )?;
    Ok(verdict(pass, format!("{name} (margin {margin:.3e})")))
}

fn read_vector(path: &str) -> Result<HVec> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("cannot read {path}: {e}")))?;
    let v: std::result::Result<Vec<f64>, _> = text
        .lines()
        .map(|l| l.split_once('#').map_or(l, |(a, _)| a))
        .flat_map(|l| l.split([',', ' ', '\t']).map(str::trim).filter(|s| !s.is_empty()).collect::<Vec<_>>())
        .map(|s| s.parse::<f64>().map_err(|_| Error::Config(format!("{path}: cannot parse {s:?}"))))
        .collect();
    Ok(HVec(v?))
}

fn bvp(cfg: &RunConfig, sink: &OutputSink, seed: u64) -> Result<Outcome> {
    let b = cfg.require_block("bvp")?;
    b.check_keys(&[
        "case",
        "n",
        "seed",
        "cells",
        "t0",
        "t1",
        "g0_file",
        "g1_file",
        "f_file",
        "form",
        "tol_residual",
        "tol_agreement",
    ])?;
    let (spec, f, bd) = match b.str_or("case", "files")? {
        "random" => random_instance(b.usize_or("n", 32)?, b.u64_or("seed", seed)?, b.usize_or("cells", 3200)?)?,
        "zero" => {
            let spec = load_spectrum(cfg, seed)?;
            let grid = uniform_grid(b.f64_or("t0", 0.0)?, b.f64_or("t1", 1.0)?, b.usize_or("cells", 100)?);
            let f = Trajectory::zeros(&grid, spec.dim())?;
            let bd = BoundaryData::zero(spec.dim());
            (spec, f, bd)
        }
        "files" => {
            let spec = load_spectrum(cfg, seed)?;
            let need = |k: &str| b.str(k)?.ok_or_else(|| Error::Config(format!("bvp: missing key {k:?}")));
            let text = std::fs::read_to_string(need("f_file")?)
                .map_err(|e| Error::Config(format!("cannot read f_file: {e}")))?;
            let f = Trajectory::from_csv(&text)?;
            for (key, at) in [("t0", f.start()), ("t1", f.end())] {
                if let Some(v) = b.f64(key)? {
                    if (v - at).abs() > 1e-12 * (1.0 + at.abs()) {
                        return Err(Error::Config(format!("bvp.{key} = {v} but the forcing grid has {at}")));
                    }
                }
            }
            let (v0, v1) = (read_vector(need("g0_file")?)?, read_vector(need("g1_file")?)?);
            let bd = match b.str_or("form", "weak")? {
                "weak" => BoundaryData::weak(&spec, v0, v1)?,
                "mild" => BoundaryData::mild(&spec, v0, v1)?,
                other => return Err(Error::Config(format!("bvp.form: unknown {other:?}"))),
            };
            (spec, f, bd)
        }
        other => return Err(Error::Config(format!("bvp.case: unknown {other:?}"))),
    };
    let tol_residual = b.f64_or("tol_residual", 1e-6)?;
    let tol_agreement = b.f64_or("tol_agreement", 1e-5)?;
    let rep = bvp_report(&spec, &f, &bd)?;
    let agree = rep.fourier_disagreement.is_none_or(|d| d <= tol_agreement);
    let pass = rep.residual <= tol_residual && rep.stable_bc_error <= 1e-8 && rep.unstable_bc_error <= 1e-8 && agree;
    sink.csv("bvp_solution.csv", &rep.solution.to_csv())?;
    sink.json(
        "bvp.json",
        "bvp",
        json!({"pass": pass, "tol_residual": tol_residual, "tol_agreement": tol_agreement, "report": to_json(&rep)}),
    )?;
    Ok(verdict(pass, format!("residual {:.3e}, disagreement {:?}", rep.residual, rep.fourier_disagreement)))
}

fn boltzmann_tail(cfg: &RunConfig, sink: &OutputSink, seed: u64) -> Result<Outcome> {
    let b = cfg.block_or_empty("boltzmann")?;
    b.check_keys(&[
        "K",
        "amplitude",
        "scales",
        "T",
        "threshold",
        "xi_max",
        "include_zero",
        "invariants",
        "size",
        "data_seed",
        "grid_theta",
        "t_min",
    ])?;
    let k = b.usize_or("K", 16)?;
    let d = ModelOptions::default();
    let opts = ModelOptions {
        xi_max: b.f64_or("xi_max", d.xi_max)?,
        include_zero: b.bool_or("include_zero", d.include_zero)?,
        invariants: b.usize_list("invariants")?.unwrap_or_default(),
        rho: d.rho,
    };
    let amplitude = match b.f64("amplitude")? {
        Some(a) => a,
        None => max_certified_amplitude(k, seed, &opts)?,
    };
    let model = build_model(k, seed, amplitude, &opts)?;
    let scales = b.f64_list("scales")?.unwrap_or_else(|| vec![1.0, 0.5, 0.25, 0.125, 0.0625]);
    let base = stable_data(model.spectrum(), b.u64_or("data_seed", seed.wrapping_add(1))?, b.f64_or("size", 0.5)?)?;
    let family = scale_family(&base, &scales);
    let td = TailOptions::default();
    let topts = TailOptions {
        t_end: b.f64_or("T", td.t_end)?,
        threshold: b.f64_or("threshold", td.threshold)?,
        grid_theta: b.f64_or("grid_theta", td.grid_theta)?,
        grid_t_min: b.f64_or("t_min", td.grid_t_min)?,
        ..td
    };
    let exp = tail_experiment(&model, &family, &topts)?;
    let mut rows = Vec::new();
    for m in &exp.members {
        sink.json(&format!("boltzmann_member_{}.json", m.index), "boltzmann-tail", json!({"member": to_json(m)}))?;
        rows.push(vec![
            m.index as f64,
            m.g0_norm,
            f64::from(u8::from(m.converged)),
            m.picard.as_ref().map_or(f64::NAN, |p| p.iterations as f64),
            m.t_star.unwrap_or(f64::NAN),
            m.small_t_slope.unwrap_or(f64::NAN),
            m.derivative_rate.unwrap_or(f64::NAN),
            m.h1_rate.unwrap_or(f64::NAN),
            f64::from(u8::from(m.pass)),
        ]);
    }
    sink.csv(
        "boltzmann_summary.csv",
        &numeric_csv(
            &[
                "index",
                "g0_norm",
                "converged",
                "iterations",
                "t_star",
                "small_t_slope",
                "derivative_rate",
                "h1_rate",
                "pass",
            ],
            rows,
        ),
    )?;
    sink.json(
        "boltzmann_summary.json",
        "boltzmann-tail",
        json!({
            "pass": exp.pass,
            "K": k,
            "amplitude": amplitude,
            "certificate": model.certificate,
            "alphas": model.spectrum().alphas(),
            "scales": scales,
            "t_star_monotone": exp.t_star_monotone,
            "all_converged": exp.all_converged,
        }),
    )?;
    Ok(verdict(exp.pass, "boltzmann tail sweep"))
}

fn sharpness_scan(cfg: &RunConfig, sink: &OutputSink) -> Result<Outcome> {
    let spec = load_spectrum(cfg, 0)?;
    let b = cfg.block_or_empty("sharpness_scan")?;
    b.check_keys(&["r", "lo_exp", "hi_exp"])?;
    let r = b.f64_or("r", 1.0)?;
    let grid = dyadic_grid(b.f64_or("lo_exp", -10.0)? as i32, b.f64_or("hi_exp", 0.0)? as i32);
    if grid.is_empty() {
        return Err(Error::Config("sharpness_scan: empty t grid".into()));
    }
    let rows = sharp_bound_scan(&spec, r, &grid)?;
    sink.csv(
        "sharpness_scan.csv",
        &numeric_csv(
            &["t", "sup_norm", "predicted", "ratio"],
            rows.iter().map(|s| vec![s.t, s.sup_norm, s.predicted, s.ratio]),
        ),
    )?;
    let min = rows.iter().map(|s| s.ratio).fold(f64::INFINITY, f64::min);
    let max = rows.iter().map(|s| s.ratio).fold(0.0, f64::max);
    sink.json("sharpness_scan.json", "sharpness-scan", json!({"r": r, "min_ratio": min, "max_ratio": max}))?;
    Ok(Outcome::Pass)
}
