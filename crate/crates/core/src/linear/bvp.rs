//! Two-point boundary-value problem on `[t0, t1]`:
//! `x = y + |A|^{-1/2} T_s(t - t0) g0 + |A|^{-1/2} T_u(t - t1) g1`
//! with `y` the variation-of-constants solution for `f` extended by zero.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linear::fourier::solve_fourier;
use crate::linear::voc::{solve_particular, solve_voc_at};
use crate::semigroup::{mode_factor, Direction};
use crate::spectral::{HVec, SpectrumSpec, SubspaceTag};
use crate::trajectory::{refine_grid, Trajectory};

/// Relative tolerance for the support invariants of boundary data.
pub const TOL_SUPPORT: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub enum BoundaryForm {
    Weak,
    /// `g0 = |A|^{1/2} Π_s h0`, `g1 = |A|^{1/2} Π_u h1`.
    Mild {
        h0: HVec,
        h1: HVec,
    },
}

/// Boundary values `(|A|^{1/2} Π_s x)(t0) = g0` and `(|A|^{1/2} Π_u x)(t1) = g1`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryData {
    pub g0: HVec,
    pub g1: HVec,
    pub form: BoundaryForm,
}

impl BoundaryData {
    pub fn zero(n: usize) -> Self {
        BoundaryData { g0: HVec::zeros(n), g1: HVec::zeros(n), form: BoundaryForm::Weak }
    }

    pub fn weak(spec: &SpectrumSpec, g0: HVec, g1: HVec) -> Result<Self> {
        let bd = BoundaryData { g0, g1, form: BoundaryForm::Weak };
        bd.validate(spec)?;
        Ok(bd)
    }

    /// Boundary data from mild data `h0`, `h1`; components off the stable
    /// (resp. unstable) subspace are projected away.
    pub fn mild(spec: &SpectrumSpec, h0: HVec, h1: HVec) -> Result<Self> {
        let g0 = half_power(spec, &spec.project(&h0, SubspaceTag::Stable)?);
        let g1 = half_power(spec, &spec.project(&h1, SubspaceTag::Unstable)?);
        Ok(BoundaryData { g0, g1, form: BoundaryForm::Mild { h0, h1 } })
    }

    pub fn validate(&self, spec: &SpectrumSpec) -> Result<()> {
        spec.check(&self.g0)?;
        spec.check(&self.g1)?;
        check_support(spec, &self.g0, SubspaceTag::Stable, "g0")?;
        check_support(spec, &self.g1, SubspaceTag::Unstable, "g1")
    }
}

fn half_power(spec: &SpectrumSpec, v: &HVec) -> HVec {
    HVec(spec.alphas().iter().zip(v.iter()).map(|(a, x)| a.abs().sqrt() * x).collect())
}

fn check_support(spec: &SpectrumSpec, g: &HVec, tag: SubspaceTag, name: &str) -> Result<()> {
    let threshold = TOL_SUPPORT * g.norm();
    for (j, x) in g.iter().enumerate() {
        if spec.tag(j) != tag && x.abs() > threshold {
            return Err(Error::Parameter(format!(
                "{name} must be supported on the {tag:?} subspace, but coordinate {j} (alpha = {}) is {x:.3e}",
                spec.alphas()[j]
            )));
        }
    }
    Ok(())
}

/// `|A|^{-1/2} T_s(t - t0) g0 + |A|^{-1/2} T_u(t - t1) g1` at `times ⊂ [t0, t1]`.
pub fn homogeneous_part(spec: &SpectrumSpec, bd: &BoundaryData, t0: f64, t1: f64, times: &[f64]) -> Result<Trajectory> {
    bd.validate(spec)?;
    if !(t1 > t0) {
        return Err(Error::Parameter(format!("empty interval [{t0}, {t1}]")));
    }
    if let Some(t) = times.iter().find(|t| **t < t0 || **t > t1) {
        return Err(Error::Parameter(format!("time {t} outside [{t0}, {t1}]")));
    }
    Trajectory::from_fn(times, |t| {
        HVec(
            spec.alphas()
                .iter()
                .enumerate()
                .map(|(j, a)| {
                    mode_factor(*a, t - t0, 0.5, Direction::Stable) * bd.g0[j]
                        + mode_factor(*a, t - t1, 0.5, Direction::Unstable) * bd.g1[j]
                })
                .collect(),
        )
    })
}

/// Solution of the boundary-value problem on `f`'s grid, `[t0, t1] = [f.start(), f.end()]`.
pub fn solve_bvp(spec: &SpectrumSpec, f: &Trajectory, bd: &BoundaryData) -> Result<Trajectory> {
    let hom = homogeneous_part(spec, bd, f.start(), f.end(), f.times())?;
    let y = solve_particular(spec, f)?;
    hom.add(&y)
}

/// Solution of the boundary-value problem at arbitrary `times ⊂ [t0, t1]`.
pub fn solve_bvp_at(spec: &SpectrumSpec, f: &Trajectory, bd: &BoundaryData, times: &[f64]) -> Result<Trajectory> {
    let hom = homogeneous_part(spec, bd, f.start(), f.end(), times)?;
    let y = solve_voc_at(spec, f, None, times)?;
    hom.add(&y)
}

/// Cell-averaged equation residual. `x_fine` must live on `f`'s grid refined
/// twice; on each cell `[t_i, t_{i+1}]` of `f` the residual is
/// `([Ax](t_{i+1}) - [Ax](t_i))/H + avg(x) - avg(f)`, with `avg(x)` by Simpson's
/// rule on the fine nodes and `avg(f)` exact for the piecewise-linear `f`.
/// Returns the `L²` norm of that piecewise-constant residual.
pub fn weak_residual(spec: &SpectrumSpec, f: &Trajectory, x_fine: &Trajectory) -> Result<f64> {
    let m = f.len();
    if m < 2 {
        return Err(Error::Parameter("residual needs two or more grid nodes".into()));
    }
    if x_fine.len() != 2 * m - 1 {
        return Err(Error::Parameter(format!("expected {} refined nodes, got {}", 2 * m - 1, x_fine.len())));
    }
    spec.check(&x_fine.values()[0])?;
    let x = x_fine.values();
    let mut total = 0.0;
    for i in 0..m - 1 {
        let h = f.times()[i + 1] - f.times()[i];
        let (a, mid, b) = (&x[2 * i], &x[2 * i + 1], &x[2 * i + 2]);
        let (fa, fb) = (&f.values()[i], &f.values()[i + 1]);
        let mut cell = 0.0;
        for (j, alpha) in spec.alphas().iter().enumerate() {
            let r = alpha * (b[j] - a[j]) / h + (a[j] + 4.0 * mid[j] + b[j]) / 6.0 - 0.5 * (fa[j] + fb[j]);
            cell += r * r;
        }
        total += cell * h;
    }
    Ok(total.sqrt())
}

/// Residual, boundary attainment and frequency-domain cross-check of one solve.
#[derive(Debug, Clone, Serialize)]
pub struct BvpReport {
    #[serde(skip)]
    pub solution: Trajectory,
    pub residual: f64,
    /// `‖|A|^{1/2} Π_s x(t0) - g0‖`.
    pub stable_bc_error: f64,
    /// `‖|A|^{1/2} Π_u x(t1) - g1‖`.
    pub unstable_bc_error: f64,
    /// `L²(t0, t1)` distance to the frequency-domain route, when `f`'s grid is uniform.
    pub fourier_disagreement: Option<f64>,
    pub periodization_error: Option<f64>,
}

/// Solve and measure. The frequency-domain route solves on the whole line
/// with `f` tapered to zero over one cell at each end; its restriction to
/// `[t0, t1]` is again a solution of the boundary-value problem, with
/// boundary values read off at `t0` and `t1`, and is compared against the
/// solver run with those values.
pub fn bvp_report(spec: &SpectrumSpec, f: &Trajectory, bd: &BoundaryData) -> Result<BvpReport> {
    let solution = solve_bvp(spec, f, bd)?;
    let fine = refine_grid(f.times(), 2);
    let x_fine = solve_bvp_at(spec, f, bd, &fine)?;
    let residual = weak_residual(spec, f, &x_fine)?;

    let first = &solution.values()[0];
    let last = &solution.values()[solution.len() - 1];
    let at0 = half_power(spec, &spec.project(first, SubspaceTag::Stable)?);
    let at1 = half_power(spec, &spec.project(last, SubspaceTag::Unstable)?);
    let stable_bc_error = (&at0 - &bd.g0).norm();
    let unstable_bc_error = (&at1 - &bd.g1).norm();

    let (fourier_disagreement, periodization_error) = if f.uniform_spacing(1e-9).is_some() {
        let (d, p) = fourier_crosscheck(spec, f)?;
        (Some(d), Some(p))
    } else {
        (None, None)
    };
    Ok(BvpReport { solution, residual, stable_bc_error, unstable_bc_error, fourier_disagreement, periodization_error })
}

/// `(distance, periodization estimate)` between the frequency-domain solution
/// on `[t0, t1]` and the boundary-value solver fed its boundary values.
pub fn fourier_crosscheck(spec: &SpectrumSpec, f: &Trajectory) -> Result<(f64, f64)> {
    let sol = solve_fourier(spec, f)?;
    let xf = sol.on_support(f)?;
    let first = &xf.values()[0];
    let last = &xf.values()[xf.len() - 1];
    let bd = BoundaryData::weak(
        spec,
        half_power(spec, &spec.project(first, SubspaceTag::Stable)?),
        half_power(spec, &spec.project(last, SubspaceTag::Unstable)?),
    )?;
    let x = solve_bvp(spec, f, &bd)?;
    Ok((x.distance_l2(&xf)?, sol.periodization_error))
}

/// Seeded test problem on `[0, 2]` with `m` uniform cells: eigenvalues
/// uniform in `[-1, 1]`, a smooth trigonometric forcing, and Gaussian
/// boundary data on the stable and unstable subspaces.
pub fn random_instance(n: usize, seed: u64, m: usize) -> Result<(SpectrumSpec, Trajectory, BoundaryData)> {
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    let spec = SpectrumSpec::uniform(n, seed)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_f00d);
    let coef: Vec<[(f64, f64); 3]> = (0..n)
        .map(|_| std::array::from_fn(|_| (rng.sample(StandardNormal), rng.random_range(0.0..std::f64::consts::TAU))))
        .collect();
    let grid = crate::trajectory::uniform_grid(0.0, 2.0, m);
    let f = Trajectory::from_fn(&grid, |t| {
        HVec(
            coef.iter()
                .map(|c| c.iter().enumerate().map(|(q, (a, p))| a * ((q + 1) as f64 * t + p).sin()).sum())
                .collect(),
        )
    })?;
    let mut g0 = HVec::zeros(n);
    let mut g1 = HVec::zeros(n);
    for j in 0..n {
        let v: f64 = rng.sample(StandardNormal);
        match spec.tag(j) {
            SubspaceTag::Stable => g0.0[j] = v,
            SubspaceTag::Unstable => g1.0[j] = v,
            SubspaceTag::Center => {}
        }
    }
    let bd = BoundaryData::weak(&spec, g0, g1)?;
    Ok((spec, f, bd))
}
