//! Acceptance criteria. Each test prints one `PASS`/`FAIL` line (written
//! straight to stdout so it shows without `--nocapture`) and then asserts.

use std::io::Write;
use std::path::Path;
use std::time::Instant;

use bistable::boltzmann::{
    build_model, max_certified_amplitude, scale_family, stable_data, tail_experiment, ModelOptions, TailOptions,
};
use bistable::estimates::{
    bochner_counterexample, decay_fit, haar_l4_bound, l2_tail_series, quadratic_form_series, sharpness_probe,
    DecayWindow,
};
use bistable::fit::linear_fit;
use bistable::linear::{bvp_report, random_instance, resolvent_a_norm, resolvent_norm};
use bistable::nonlinear::{picard_solve, BilinearMap, CutoffBilinear, PicardConfig};
use bistable::semigroup::{apply_semigroup, dyadic_grid, SemigroupQuery};
use bistable::spectral::{HVec, SpectrumSpec};
use bistable::trajectory::{geometric_grid, uniform_grid, Trajectory};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

fn verdict(n: u32, name: &str, pass: bool, detail: String) {
    let line = format!("{} criterion {n} ({name}): {detail}\n", if pass { "PASS" } else { "FAIL" });
    let _ = std::io::stdout().lock().write_all(line.as_bytes());
    assert!(pass, "{line}");
}

fn gaussian_vec(rng: &mut ChaCha8Rng, n: usize) -> HVec {
    HVec((0..n).map(|_| rng.sample(StandardNormal)).collect())
}

#[test]
fn criterion_01_resolvent_bounds() {
    let start = Instant::now();
    let mut omegas = Vec::with_capacity(10_000);
    for i in 0..5000 {
        let w = 10f64.powf(-6.0 + 12.0 * i as f64 / 4999.0);
        omegas.push(w);
        omegas.push(-w);
    }
    assert!(omegas.contains(&1e6) && omegas.iter().any(|w| *w == -1e6));
    let (mut worst_r, mut worst_a) = (0.0f64, 0.0f64);
    for seed in 0..50 {
        let n = 8 + (seed as usize % 5) * 8;
        let base = SpectrumSpec::uniform(n, seed).unwrap();
        // add a center mode and a wide range of scales
        let mut alphas: Vec<f64> =
            base.alphas().iter().enumerate().map(|(j, a)| a * 10f64.powi(-(j as i32 % 7))).collect();
        alphas.push(0.0);
        let spec = SpectrumSpec::new(alphas).unwrap();
        for &w in &omegas {
            worst_r = worst_r.max(resolvent_norm(&spec, w));
            worst_a = worst_a.max(resolvent_a_norm(&spec, w));
        }
    }
    let pass = worst_r <= 1.0 + 1e-12 && worst_a <= 2.0 + 1e-12;
    verdict(
        1,
        "resolvent bounds",
        pass,
        format!("max ‖(iωA+1)^-1‖ = {worst_r:.15}, max ‖iωA(iωA+1)^-1‖ = {worst_a:.15}, {:.2?}", start.elapsed()),
    );
}

#[test]
fn criterion_02_semigroup_law_and_contraction() {
    let ts = dyadic_grid(-8, 3);
    let mut worst: f64 = 0.0;
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for seed in 0..20 {
        let spec = SpectrumSpec::uniform(24, 100 + seed).unwrap();
        for _ in 0..20 {
            let h = gaussian_vec(&mut rng, 24);
            let h = h.scale(1.0 / h.norm());
            for &t in &ts {
                for &s in &ts {
                    let st = |t: f64, v: &HVec| apply_semigroup(&spec, SemigroupQuery::stable(t), v).unwrap();
                    let ut = |t: f64, v: &HVec| apply_semigroup(&spec, SemigroupQuery::unstable(-t), v).unwrap();
                    let law_s = (&st(t, &st(s, &h)) - &st(t + s, &h)).norm();
                    let law_u = (&ut(t, &ut(s, &h)) - &ut(t + s, &h)).norm();
                    let contraction = (st(t, &h).norm() - 1.0).max(ut(t, &h).norm() - 1.0).max(0.0);
                    worst = worst.max(law_s).max(law_u).max(contraction);
                }
            }
        }
    }
    verdict(2, "semigroup law and contraction", worst <= 1e-12, format!("max violation {worst:.3e}"));
}

#[test]
fn criterion_03_bvp_solver() {
    let start = Instant::now();
    let (mut res, mut bc, mut agree) = (0.0f64, 0.0f64, 0.0f64);
    for seed in 0..25 {
        let (spec, f, bd) = random_instance(32, seed, 3200).unwrap();
        let r = bvp_report(&spec, &f, &bd).unwrap();
        res = res.max(r.residual);
        bc = bc.max(r.stable_bc_error).max(r.unstable_bc_error);
        agree = agree.max(r.fourier_disagreement.unwrap());
    }
    let elapsed = start.elapsed();
    let pass = res <= 1e-6 && bc <= 1e-8 && agree <= 1e-5 && elapsed.as_secs_f64() < 60.0;
    verdict(
        3,
        "boundary-value solver",
        pass,
        format!(
            "max residual {res:.3e}, max boundary error {bc:.3e}, max Fourier/VOC distance {agree:.3e}, {elapsed:.2?}"
        ),
    );
}

struct NonlinearRun {
    label: String,
    quadform: bool,
    tails: bool,
    rate: f64,
    sup: f64,
}

fn nonlinear_run(i: u64) -> NonlinearRun {
    let (label, spec) = match i % 3 {
        0 => {
            let h = SpectrumSpec::harmonic(12).unwrap();
            let neg = SpectrumSpec::new(h.alphas().iter().map(|a| -a).collect()).unwrap();
            ("harmonic ±".to_string(), SpectrumSpec::join(&[h, neg]).unwrap())
        }
        1 => {
            let g = SpectrumSpec::geometric(14, 0.5).unwrap();
            let neg = SpectrumSpec::new(g.alphas().iter().map(|a| -0.75 * a).collect()).unwrap();
            ("geometric ±".to_string(), SpectrumSpec::join(&[g, neg]).unwrap())
        }
        _ => {
            let u = SpectrumSpec::uniform(20, 40 + i).unwrap();
            let m = u.norm_bound();
            ("uniform".to_string(), SpectrumSpec::new(u.alphas().iter().map(|a| a / m).collect()).unwrap())
        }
    };
    assert!((spec.norm_bound() - 1.0).abs() < 1e-15);
    let b = BilinearMap::random_symmetric(spec.dim(), 500 + i, &[]).unwrap();
    let g = CutoffBilinear::new(b.clone(), 1.0, CutoffBilinear::max_amplitude(&b, 1.0, 0.2)).unwrap();
    let g0 = stable_data(&spec, 900 + i, 0.2 + 0.05 * i as f64).unwrap();
    let grid = geometric_grid(20.0, 0.95, 2f64.powi(-14), 16).unwrap();
    let cfg = PicardConfig { gamma: 0.25, tol: 1e-10, max_iter: 200 };
    let sol = picard_solve(&spec, &g, &g0, &grid, &cfg, None).unwrap();
    let x = sol.trajectory;
    let q = quadratic_form_series(&spec, &x).unwrap();
    let t = l2_tail_series(&x);
    let (ts, ys): (Vec<f64>, Vec<f64>) = x
        .times()
        .iter()
        .zip(x.values())
        .filter(|(t, v)| **t >= 1.0 && v.norm() > 0.0)
        .map(|(t, v)| (*t, v.norm().ln()))
        .unzip();
    let rate = -linear_fit(&ts, &ys).unwrap().slope;
    NonlinearRun { label: format!("{label} #{i}"), quadform: q.pass, tails: t.pass, rate, sup: x.sup_norm() }
}

#[test]
fn criterion_04_nonlinear_decay() {
    let runs: Vec<NonlinearRun> = (0..10).map(nonlinear_run).collect();
    let mut pass = true;
    for r in &runs {
        let ok = r.quadform && r.tails && r.rate >= 0.4 && r.sup <= 1.0;
        pass &= ok;
        let _ = writeln!(
            std::io::stdout().lock(),
            "    {}: quadform {}, tails {}, rate {:.4}, sup {:.4}",
            r.label,
            r.quadform,
            r.tails,
            r.rate,
            r.sup
        );
    }
    let min_rate = runs.iter().map(|r| r.rate).fold(f64::INFINITY, f64::min);
    verdict(4, "nonlinear decay", pass, format!("10 runs, smallest large-t rate {min_rate:.4}"));
}

#[test]
fn criterion_05_smoothing_rates() {
    let start = Instant::now();
    let n = 256;
    let spec = SpectrumSpec::harmonic(n).unwrap();
    // every mode excited, alternating signs, square-summable weights
    let data = HVec((1..=n).map(|j| if j % 2 == 0 { 1.0 } else { -1.0 } / (j as f64).sqrt()).collect());
    let grid = geometric_grid(20.0, 0.9, 2f64.powi(-18), 16).unwrap();
    let x = Trajectory::from_fn(&grid, |t| apply_semigroup(&spec, SemigroupQuery::stable(t), &data).unwrap()).unwrap();
    let reports = decay_fit(&x, 3, DecayWindow::default()).unwrap();
    let slopes: Vec<f64> = reports.iter().map(|r| r.small_t_slope).collect();
    let elapsed = start.elapsed();
    let pass = reports.iter().all(|r| (r.small_t_slope + r.k as f64).abs() <= 0.15) && elapsed.as_secs_f64() < 60.0;
    verdict(
        5,
        "smoothing rates",
        pass,
        format!("slopes for k = 1, 2, 3 on [2^-12, 2^-4]: {slopes:.3?} (target -k ± 0.15), {elapsed:.2?}"),
    );
}

#[test]
fn criterion_06_sharpness() {
    let spec = SpectrumSpec::harmonic(256).unwrap();
    let e = (-1f64).exp();
    let r0 = sharpness_probe(&spec, 0).unwrap();
    let exact = r0.rows.iter().all(|r| r.derivative_norm == e);
    let mut detail = format!("k=0 all equal e^-1: {exact}");
    let mut pass = exact;
    for k in 1..=2 {
        let r = sharpness_probe(&spec, k).unwrap();
        let spread = (r.max_ratio - r.min_ratio) / r.max_ratio;
        pass &= r.min_ratio > 0.0 && spread <= 1e-12;
        detail.push_str(&format!(
            "; k={k} ratio in [{:.15}, {:.15}], constants e^-1 = {:.6}, (k/e)^k = {:.6}",
            r.min_ratio, r.max_ratio, r.constant_at_t, r.constant_at_t_over_k
        ));
    }
    verdict(6, "sharpness", pass, detail);
}

fn random_smooth(seed: u64) -> Trajectory {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dim = rng.random_range(1..=4);
    let t_end = rng.random_range(2.0..10.0);
    let grid = uniform_grid(0.0, t_end, 2000);
    let terms: Vec<(HVec, f64, f64, f64)> = (0..rng.random_range(1..=4))
        .map(|_| {
            (
                gaussian_vec(&mut rng, dim),
                rng.random_range(0.0..t_end),
                rng.random_range(0.05..1.5),
                rng.random_range(0.0..6.0),
            )
        })
        .collect();
    Trajectory::from_fn(&grid, |t| {
        let mut v = HVec::zeros(dim);
        for (c, center, width, freq) in &terms {
            let w = (-((t - center) / width).powi(2)).exp() * (1.0 + 0.5 * (freq * t).cos());
            v = v.axpy(w, c);
        }
        v
    })
    .unwrap()
}

#[test]
fn criterion_07_haar_bound() {
    let mut violations = 0;
    let mut refined = 0;
    let mut tightest = f64::INFINITY;
    for seed in 0..100 {
        let x = random_smooth(seed);
        let r = haar_l4_bound(&x, None).unwrap();
        violations += usize::from(!r.check.holds);
        refined += usize::from(r.refined);
        tightest = tightest.min(r.check.rhs / r.check.lhs);
    }
    verdict(
        7,
        "Haar L4 bound",
        violations == 0,
        format!("{violations} violations in 100 trajectories ({refined} refined), smallest rhs/lhs {tightest:.3}"),
    );
}

#[test]
fn criterion_08_bochner_counterexample() {
    let sigmas = dyadic_grid(-24, -4);
    let mut pass = true;
    let mut detail = String::new();
    for r in [1.5, 2.0] {
        let rep = bochner_counterexample(r, &sigmas, 24).unwrap();
        let growing = rep.increments.iter().all(|i| *i > 0.0);
        let ok = rep.norm_ok && rep.band_ok && growing && (r != 2.0 || rep.divergent);
        pass &= ok;
        detail.push_str(&format!(
            "r={r}: |‖f‖² - 1/(r-1)| = {:.2e}, band ratio {:.4}, last increment ratio {:.4}; ",
            (rep.norm_sq - rep.norm_sq_exact).abs(),
            rep.band_ratio,
            rep.last_increment_ratio
        ));
    }
    verdict(8, "counterexample forcing", pass, detail.trim_end_matches("; ").to_string());
}

#[test]
fn criterion_09_boltzmann_tails() {
    let opts = ModelOptions::default();
    let seed = 16;
    let amp = max_certified_amplitude(16, seed, &opts).unwrap();
    let model = build_model(16, seed, amp, &opts).unwrap();
    let base = stable_data(model.spectrum(), seed + 1, 0.5).unwrap();
    let family = scale_family(&base, &[1.0, 0.5, 0.25, 0.125, 0.0625]);
    let exp = tail_experiment(&model, &family, &TailOptions::default()).unwrap();
    for m in &exp.members {
        let _ = writeln!(
            std::io::stdout().lock(),
            "    member {}: |g0| {:.4}, t* {:?}, slope {:?}, rate {:?}, pass {}",
            m.index,
            m.g0_norm,
            m.t_star,
            m.small_t_slope,
            m.derivative_rate,
            m.pass
        );
    }
    verdict(
        9,
        "discrete-velocity tails",
        exp.pass,
        format!(
            "converged {}, t* nonincreasing {}, members passing {}/{}",
            exp.all_converged,
            exp.t_star_monotone,
            exp.members.iter().filter(|m| m.pass).count(),
            exp.members.len()
        ),
    );
}

fn run_cli(dir: &Path, args: &[&str]) -> i32 {
    let mut full = vec!["bistable".to_string(), "--out".into(), dir.join("out").to_string_lossy().into_owned()];
    full.extend(args.iter().map(|s| s.to_string()));
    bistable::cli::run(full)
}

fn snapshot(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<(String, Vec<u8>)> = std::fs::read_dir(dir.join("out"))
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), std::fs::read(e.path()).unwrap())
        })
        .collect();
    files.sort();
    files
}

#[test]
fn criterion_10_determinism() {
    let configs = [
        ("sim.cfg", "seed = 3\nspectrum = {kind: harmonic, n: 8, mirror: true}\nnonlinearity = {kind: bilinear, lip: 0.2}\nsolver = {T: 20, tol: 1e-10}\n"),
        ("ladder.cfg", "spectrum = {kind: geometric, n: 30}\n"),
        ("bvp.cfg", "bvp = {case: random, n: 32, seed: 5, cells: 800}\n"),
    ];
    let commands: Vec<Vec<&str>> = vec![
        vec!["--config", "sim.cfg", "simulate"],
        vec!["--config", "sim.cfg", "verify", "quadform"],
        vec!["--config", "sim.cfg", "verify", "tails"],
        vec!["--config", "sim.cfg", "verify", "decay", "--k", "1"],
        vec!["--config", "sim.cfg", "verify", "techcor"],
        vec!["--config", "ladder.cfg", "verify", "sharpness"],
        vec!["verify", "haar"],
        vec!["verify", "bochner", "--r", "2"],
        vec!["--config", "bvp.cfg", "bvp"],
        vec!["--seed", "16", "boltzmann-tail", "--K", "16"],
        vec!["--config", "ladder.cfg", "sharpness-scan", "--r", "1"],
    ];
    let mut identical = 0;
    let mut mismatched = Vec::new();
    for cmd in &commands {
        let runs: Vec<_> = (0..2)
            .map(|_| {
                let dir = tempfile::tempdir().unwrap();
                for (name, text) in &configs {
                    std::fs::write(dir.path().join(name), text).unwrap();
                }
                let args: Vec<String> = cmd
                    .iter()
                    .map(|a| {
                        if a.ends_with(".cfg") {
                            dir.path().join(a).to_string_lossy().into_owned()
                        } else {
                            a.to_string()
                        }
                    })
                    .collect();
                let refs: Vec<&str> = args.iter().map(String::as_str).collect();
                let code = run_cli(dir.path(), &refs);
                (code, snapshot(dir.path()))
            })
            .collect();
        let (a, b) = (&runs[0], &runs[1]);
        if a.0 == b.0 && a.1 == b.1 && !a.1.is_empty() {
            identical += 1;
        } else {
            mismatched.push(cmd.join(" "));
        }
    }
    verdict(
        10,
        "determinism",
        mismatched.is_empty(),
        format!("{identical}/{} commands bit-identical across reruns; mismatched: {mismatched:?}", commands.len()),
    );
}
