//! Discrete-velocity caricature of a steady kinetic boundary layer:
//! `A = diag(ξ₁ / ⟨ξ⟩)` and `G(x) = B(x, x)` for a random symmetric `B`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::estimates::{decay_fit, l2_tail_series, quadratic_form_series, DecayWindow, QuadformReport, TailReport};
use crate::fit::linear_fit;
use crate::nonlinear::{
    h1_tail_sq, picard_solve, BilinearMap, CutoffBilinear, NonlinearMap, PicardConfig, PicardReport,
};
use crate::spectral::{HVec, SpectrumSpec, SubspaceTag};
use crate::trajectory::{geometric_grid, Trajectory};

/// Certified Lipschitz bound every model must meet.
pub const LIP_CERTIFICATE: f64 = 0.25;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModelOptions {
    /// Largest `|ξ₁|`.
    pub xi_max: f64,
    /// Add the node `ξ = (0, 1)`, which gives a center mode.
    pub include_zero: bool,
    /// Coordinates that `B` never writes to.
    pub invariants: Vec<usize>,
    /// Saturation radius of the cutoff.
    pub rho: f64,
}

impl Default for ModelOptions {
    fn default() -> Self {
        ModelOptions { xi_max: 4.0, include_zero: false, invariants: Vec::new(), rho: 1.0 }
    }
}

#[derive(Debug, Clone)]
pub struct VelocityModel {
    /// `(ξ₁, ξ₂)` per node.
    pub xis: Vec<[f64; 2]>,
    pub collision: BilinearMap,
    pub amplitude: f64,
    pub rho: f64,
    /// `2 |amp| ‖B‖ ρ c_χ`, stored at construction.
    pub certificate: f64,
    spec: SpectrumSpec,
}

/// `ξ₁ / sqrt(1 + |ξ|²)`.
pub fn velocity_alpha(xi: [f64; 2]) -> f64 {
    xi[0] / (1.0 + xi[0] * xi[0] + xi[1] * xi[1]).sqrt()
}

/// Nodes `ξ₁ = ±ξ_max (i/m)²`, `i = 1..m`, so refining the grid pushes
/// `min |α|` toward 0 like `m^{-2}`.
pub fn velocity_nodes(k: usize, opts: &ModelOptions) -> Result<Vec<[f64; 2]>> {
    if k < 4 {
        return Err(Error::Parameter(format!("need K >= 4 velocities, got {k}")));
    }
    if !(opts.xi_max > 0.0) || !opts.xi_max.is_finite() {
        return Err(Error::Parameter(format!("xi_max must be positive, got {}", opts.xi_max)));
    }
    let nonzero = k - usize::from(opts.include_zero);
    if !nonzero.is_multiple_of(2) {
        return Err(Error::Parameter(format!("{nonzero} nonzero velocities cannot be split symmetrically")));
    }
    let m = nonzero / 2;
    let mut xis: Vec<[f64; 2]> = (1..=m).rev().map(|i| [-opts.xi_max * (i as f64 / m as f64).powi(2), 0.0]).collect();
    if opts.include_zero {
        xis.push([0.0, 1.0]);
    }
    xis.extend((1..=m).map(|i| [opts.xi_max * (i as f64 / m as f64).powi(2), 0.0]));
    Ok(xis)
}

/// Amplitude at which the certificate equals `LIP_CERTIFICATE`.
pub fn max_certified_amplitude(k: usize, seed: u64, opts: &ModelOptions) -> Result<f64> {
    let b = BilinearMap::random_symmetric(k, seed, &opts.invariants)?;
    Ok(CutoffBilinear::max_amplitude(&b, opts.rho, LIP_CERTIFICATE))
}

pub fn build_model(k: usize, seed: u64, amplitude: f64, opts: &ModelOptions) -> Result<VelocityModel> {
    let xis = velocity_nodes(k, opts)?;
    let spec = SpectrumSpec::new(xis.iter().map(|x| velocity_alpha(*x)).collect())?;
    let collision = BilinearMap::random_symmetric(k, seed, &opts.invariants)?;
    let wrapped = CutoffBilinear::new(collision.clone(), opts.rho, amplitude)?;
    let certificate = wrapped.lip_bound();
    if certificate > LIP_CERTIFICATE {
        return Err(Error::Certification(format!(
            "amplitude {amplitude} gives Lipschitz bound {certificate:.6} > {LIP_CERTIFICATE}"
        )));
    }
    Ok(VelocityModel { xis, collision, amplitude, rho: opts.rho, certificate, spec })
}

impl VelocityModel {
    pub fn spectrum(&self) -> &SpectrumSpec {
        &self.spec
    }

    pub fn nonlinearity(&self) -> CutoffBilinear {
        CutoffBilinear { b: self.collision.clone(), rho: self.rho, amp: self.amplitude }
    }

    pub fn dim(&self) -> usize {
        self.xis.len()
    }
}

/// Random data on the stable subspace with `‖|A|^{-1/2} g0‖ = size`.
pub fn stable_data(spec: &SpectrumSpec, seed: u64, size: f64) -> Result<HVec> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut g = HVec::zeros(spec.dim());
    for j in spec.indices(SubspaceTag::Stable) {
        g.0[j] = StandardNormal.sample(&mut rng);
    }
    let x0 = spec.abs_power_inv(&g, 0.5)?;
    let n = x0.norm();
    if n == 0.0 {
        return Err(Error::Model("no stable modes to carry boundary data".into()));
    }
    Ok(g.scale(size / n))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TailOptions {
    pub t_end: f64,
    /// `t*` is the first node where `‖x‖_{H¹(t, T)}` drops below this.
    pub threshold: f64,
    pub grid_theta: f64,
    pub grid_t_min: f64,
    pub grid_head: usize,
    pub picard: PicardConfig,
    pub window: DecayWindow,
}

impl Default for TailOptions {
    fn default() -> Self {
        TailOptions {
            t_end: 20.0,
            threshold: 1e-3,
            grid_theta: 0.95,
            grid_t_min: 2f64.powi(-14),
            grid_head: 16,
            picard: PicardConfig::default(),
            window: DecayWindow::default(),
        }
    }
}

/// Slack on the small-time slope of `|x'|`.
pub const SLOPE_SLACK: f64 = 0.15;
/// Smallest acceptable large-time rate.
pub const MIN_RATE: f64 = 0.4;

#[derive(Debug, Clone, Serialize)]
pub struct TailMember {
    pub index: usize,
    pub g0_norm: f64,
    pub converged: bool,
    pub error: Option<String>,
    pub picard: Option<PicardReport>,
    pub quadform: Option<QuadformReport>,
    pub tails: Option<TailReport>,
    /// Log-log slope of `|x'|` on the small-time window.
    pub small_t_slope: Option<f64>,
    /// Exponential rate of `|x'|` for `t >= 1`.
    pub derivative_rate: Option<f64>,
    /// Exponential rate of `‖x‖_{H¹(t, T)}` on `[1, T/2]`.
    pub h1_rate: Option<f64>,
    pub t_star: Option<f64>,
    pub pass: bool,
    #[serde(skip)]
    pub trajectory: Option<Trajectory>,
}

impl TailMember {
    fn failed(index: usize, g0_norm: f64, e: Error) -> Self {
        TailMember {
            index,
            g0_norm,
            converged: false,
            error: Some(e.to_string()),
            picard: None,
            quadform: None,
            tails: None,
            small_t_slope: None,
            derivative_rate: None,
            h1_rate: None,
            t_star: None,
            pass: false,
            trajectory: None,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct TailExperiment {
    pub members: Vec<TailMember>,
    /// `t*` never increases along the family (members listed by decreasing size).
    pub t_star_monotone: bool,
    pub all_converged: bool,
    pub pass: bool,
}

fn h1_rate(x: &Trajectory, start: f64) -> Option<f64> {
    let tails = h1_tail_sq(x);
    let stop = 0.5 * (x.start() + x.end());
    let (ts, ys): (Vec<f64>, Vec<f64>) = x
        .times()
        .iter()
        .zip(&tails)
        .filter(|(t, v)| **t >= start && **t <= stop && **v > 0.0)
        .map(|(t, v)| (*t, 0.5 * v.ln()))
        .unzip();
    if ts.len() < 3 {
        return None;
    }
    linear_fit(&ts, &ys).ok().map(|f| -f.slope)
}

fn run_member(
    model: &VelocityModel,
    g: &CutoffBilinear,
    grid: &[f64],
    opts: &TailOptions,
    index: usize,
    g0: &HVec,
) -> TailMember {
    let spec = model.spectrum();
    let g0_norm = g0.norm();
    let sol = match picard_solve(spec, g, g0, grid, &opts.picard, None) {
        Ok(s) => s,
        Err(e) => return TailMember::failed(index, g0_norm, e),
    };
    let x = sol.trajectory;
    let h1 = h1_tail_sq(&x);
    let t_star = x.times().iter().zip(&h1).find(|(_, v)| v.sqrt() < opts.threshold).map(|(t, _)| *t);

    let mut errors = Vec::new();
    let quadform = quadratic_form_series(spec, &x).map_err(|e| errors.push(e.to_string())).ok();
    let tails = l2_tail_series(&x);
    let (small_t_slope, derivative_rate) = if x.sup_norm() == 0.0 {
        (Some(0.0), None)
    } else {
        match decay_fit(&x, 1, opts.window) {
            Ok(r) => (Some(r[0].small_t_slope), r[0].large_t_rate),
            Err(e) => {
                errors.push(e.to_string());
                (None, None)
            }
        }
    };
    let h1_rate = h1_rate(&x, opts.window.large_t_start);
    let trivial = x.sup_norm() == 0.0;
    let pass = errors.is_empty()
        && quadform.as_ref().is_some_and(|q| q.pass)
        && tails.pass
        && small_t_slope.is_some_and(|s| s >= -1.0 - SLOPE_SLACK)
        && (trivial || derivative_rate.is_some_and(|r| r >= MIN_RATE))
        && (trivial || h1_rate.is_some_and(|r| r > 0.0));
    TailMember {
        index,
        g0_norm,
        converged: true,
        error: (!errors.is_empty()).then(|| errors.join("; ")),
        picard: Some(sol.report),
        quadform,
        tails: Some(tails),
        small_t_slope,
        derivative_rate,
        h1_rate,
        t_star,
        pass,
        trajectory: Some(x),
    }
}

/// Solve for each member of `family` and check its tail. Members are
/// independent and run in parallel; a failure is recorded on the member.
pub fn tail_experiment(model: &VelocityModel, family: &[HVec], opts: &TailOptions) -> Result<TailExperiment> {
    if !(opts.threshold > 0.0) || !(opts.t_end > 1.0) {
        return Err(Error::Parameter("threshold must be positive and T larger than 1".into()));
    }
    let grid = geometric_grid(opts.t_end, opts.grid_theta, opts.grid_t_min, opts.grid_head)?;
    let g = model.nonlinearity();
    let members: Vec<TailMember> =
        family.par_iter().enumerate().map(|(i, g0)| run_member(model, &g, &grid, opts, i, g0)).collect();
    let all_converged = members.iter().all(|m| m.converged);
    // a missing t* means the tail never got small enough, i.e. t* = T
    let stars: Vec<f64> = members.iter().map(|m| m.t_star.unwrap_or(opts.t_end)).collect();
    let mut order: Vec<usize> = (0..members.len()).collect();
    order.sort_by(|a, b| members[*b].g0_norm.partial_cmp(&members[*a].g0_norm).unwrap());
    let t_star_monotone = order.windows(2).all(|w| stars[w[1]] <= stars[w[0]]);
    let pass = all_converged && t_star_monotone && members.iter().all(|m| m.pass);
    Ok(TailExperiment { members, t_star_monotone, all_converged, pass })
}

/// `scales[i] * base`.
pub fn scale_family(base: &HVec, scales: &[f64]) -> Vec<HVec> {
    scales.iter().map(|s| base.scale(*s)).collect()
}
