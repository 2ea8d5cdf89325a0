//! Fixed-point iteration `x ↦ |A|^{-1/2} T_s(t) g0 + y[G(x)]` on `[0, T]`,
//! where `y[f]` is the variation-of-constants solution with zero data.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linear::voc::VocPlan;
use crate::nonlinear::maps::NonlinearMap;
use crate::semigroup::{mode_factor, Direction};
use crate::spectral::{HVec, SpectrumSpec, SubspaceTag};
use crate::trajectory::Trajectory;

/// Largest admissible contraction bound.
pub const GAMMA_CAP: f64 = 0.9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PicardConfig {
    /// Required bound on the Lipschitz constant of `G`.
    pub gamma: f64,
    /// Stop once successive iterates are this close in `L²(0, T)`.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for PicardConfig {
    fn default() -> Self {
        PicardConfig { gamma: 0.25, tol: 1e-8, max_iter: 200 }
    }
}

impl PicardConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.gamma > 0.0 && self.gamma <= GAMMA_CAP) {
            return Err(Error::Parameter(format!("gamma must lie in (0, {GAMMA_CAP}], got {}", self.gamma)));
        }
        if !(self.tol > 0.0) {
            return Err(Error::Parameter(format!("tolerance must be positive, got {}", self.tol)));
        }
        if self.max_iter == 0 {
            return Err(Error::Parameter("max_iter must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct PicardReport {
    pub iterations: usize,
    /// `‖x_{n+1} - x_n‖_{L²}` per iteration.
    pub distances: Vec<f64>,
    /// Largest ratio of successive distances, first step excluded.
    pub gamma_eff: f64,
    pub lip_bound: f64,
    pub residual: f64,
    pub l2_norm: f64,
    pub h1_norm: f64,
    pub sup_norm: f64,
}

#[derive(Debug, Clone)]
pub struct PicardSolution {
    pub trajectory: Trajectory,
    pub report: PicardReport,
}

/// `|A|^{-1/2} T_s(t) g0` on `grid`.
pub fn stable_homogeneous(spec: &SpectrumSpec, g0: &HVec, grid: &[f64]) -> Result<Trajectory> {
    Trajectory::from_fn(grid, |t| {
        HVec(spec.alphas().iter().zip(g0.iter()).map(|(a, g)| mode_factor(*a, t, 0.5, Direction::Stable) * g).collect())
    })
}

fn check_stable_support(spec: &SpectrumSpec, g0: &HVec) -> Result<()> {
    spec.check(g0)?;
    let threshold = 1e-10 * g0.norm();
    for (j, g) in g0.iter().enumerate() {
        if spec.tag(j) != SubspaceTag::Stable && g.abs() > threshold {
            return Err(Error::Parameter(format!(
                "g0 must be supported on the stable subspace; coordinate {j} (alpha = {}) is {g:.3e}",
                spec.alphas()[j]
            )));
        }
    }
    Ok(())
}

fn check_map(spec: &SpectrumSpec, g: &dyn NonlinearMap, gamma: f64) -> Result<()> {
    if g.dim() != spec.dim() {
        return Err(Error::Dimension { expected: spec.dim(), found: g.dim() });
    }
    if !g.zero_at_zero() || g.eval(&HVec::zeros(spec.dim())).norm() != 0.0 {
        return Err(Error::Parameter("the nonlinearity must vanish at 0".into()));
    }
    if g.lip_bound() > gamma {
        return Err(Error::ContractViolation { lip: g.lip_bound(), gamma });
    }
    Ok(())
}

/// Solve `(d/dt)(Ax) = -x + G(x)` on `grid = [0, T]` with stable boundary
/// value `(|A|^{1/2} Π_s x)(0) = g0` and zero unstable value at `T`.
/// `initial` overrides the starting iterate (default: the linear solution).
pub fn picard_solve(
    spec: &SpectrumSpec,
    g: &dyn NonlinearMap,
    g0: &HVec,
    grid: &[f64],
    cfg: &PicardConfig,
    initial: Option<&Trajectory>,
) -> Result<PicardSolution> {
    cfg.validate()?;
    check_map(spec, g, cfg.gamma)?;
    check_stable_support(spec, g0)?;
    if grid.first() != Some(&0.0) {
        return Err(Error::Parameter("the time grid must start at t = 0".into()));
    }
    let plan = VocPlan::new(spec, grid, None)?;
    let hom = stable_homogeneous(spec, g0, grid)?;
    let mut x = match initial {
        Some(x0) => {
            if x0.times() != grid {
                return Err(Error::Parameter("initial iterate lives on a different grid".into()));
            }
            spec.check(&x0.values()[0])?;
            x0.clone()
        }
        None => hom.clone(),
    };

    let mut distances = Vec::new();
    loop {
        let forcing: Vec<HVec> = x.values().iter().map(|v| g.eval(v)).collect();
        let y = plan.apply(&forcing)?;
        let values: Vec<HVec> = hom.values().iter().zip(&y).map(|(a, b)| a + b).collect();
        let next = Trajectory::new(grid.to_vec(), values)?;
        let d = next.distance_l2(&x)?;
        distances.push(d);
        x = next;
        if !d.is_finite() || x.values().iter().any(|v| !v.is_finite()) {
            return Err(Error::Divergence { iterations: distances.len(), last_distance: d, rate: f64::NAN });
        }
        if d <= cfg.tol {
            break;
        }
        if distances.len() >= cfg.max_iter {
            return Err(Error::Divergence {
                iterations: distances.len(),
                last_distance: d,
                rate: successive_ratio(&distances),
            });
        }
    }

    let gamma_eff = successive_ratio(&distances);
    let report = PicardReport {
        iterations: distances.len(),
        gamma_eff,
        lip_bound: g.lip_bound(),
        residual: residual(spec, g, &x)?,
        l2_norm: x.l2_norm(),
        h1_norm: h1_tail_sq(&x)[0].sqrt(),
        sup_norm: x.sup_norm(),
        distances,
    };
    Ok(PicardSolution { trajectory: x, report })
}

/// Largest `d_{n+1} / d_n` for `n >= 1`.
fn successive_ratio(distances: &[f64]) -> f64 {
    distances.windows(2).skip(1).filter(|w| w[0] > 0.0).map(|w| w[1] / w[0]).fold(0.0, f64::max)
}

/// Fixed point of `c ↦ Π_c G(x_sc + c)` by scalar Picard iteration.
pub fn center_solve(spec: &SpectrumSpec, g: &dyn NonlinearMap, x_sc: &HVec, tol: f64, max_iter: usize) -> Result<HVec> {
    spec.check(x_sc)?;
    if g.dim() != spec.dim() {
        return Err(Error::Dimension { expected: spec.dim(), found: g.dim() });
    }
    if !(g.lip_bound() < 1.0) {
        return Err(Error::ContractViolation { lip: g.lip_bound(), gamma: 1.0 });
    }
    let noncenter = &spec.project(x_sc, SubspaceTag::Stable)? + &spec.project(x_sc, SubspaceTag::Unstable)?;
    let mut c = HVec::zeros(spec.dim());
    if spec.count(SubspaceTag::Center) == 0 {
        return Ok(c);
    }
    let mut last = f64::INFINITY;
    let mut prev = f64::INFINITY;
    for it in 0..max_iter {
        let next = spec.project(&g.eval(&(&noncenter + &c)), SubspaceTag::Center)?;
        let d = (&next - &c).norm();
        c = next;
        if d <= tol {
            return Ok(c);
        }
        prev = last;
        last = d;
        if !d.is_finite() {
            return Err(Error::Divergence { iterations: it + 1, last_distance: d, rate: f64::NAN });
        }
    }
    Err(Error::Divergence { iterations: max_iter, last_distance: last, rate: last / prev })
}

/// Cell residual `[(Ax)_{m+1} - (Ax)_m]/h + avg(x) - avg(G(x))`, with
/// trapezoidal averages, in `L²(t_0, t_M)`, divided by `‖x‖_{L²}` (absolute
/// when `x = 0`).
pub fn residual(spec: &SpectrumSpec, g: &dyn NonlinearMap, x: &Trajectory) -> Result<f64> {
    if x.len() < 3 {
        return Err(Error::Parameter("residual needs three or more grid nodes".into()));
    }
    spec.check(&x.values()[0])?;
    let gx: Vec<HVec> = x.values().iter().map(|v| g.eval(v)).collect();
    let t = x.times();
    let v = x.values();
    let mut total = 0.0;
    for m in 0..x.len() - 1 {
        let h = t[m + 1] - t[m];
        let mut cell = 0.0;
        for (j, alpha) in spec.alphas().iter().enumerate() {
            let r =
                alpha * (v[m + 1][j] - v[m][j]) / h + 0.5 * (v[m][j] + v[m + 1][j]) - 0.5 * (gx[m][j] + gx[m + 1][j]);
            cell += r * r;
        }
        total += cell * h;
    }
    let norm = x.l2_norm();
    Ok(if norm > 0.0 { total.sqrt() / norm } else { total.sqrt() })
}

/// `‖x‖²_{H¹(t_m, T)}` at every node, with `x'` the slope of the interpolant.
pub fn h1_tail_sq(x: &Trajectory) -> Vec<f64> {
    let mut tails = x.tail_l2_sq();
    let t = x.times();
    let v = x.values();
    let mut acc = 0.0;
    for m in (0..x.len().saturating_sub(1)).rev() {
        let h = t[m + 1] - t[m];
        acc += (&v[m + 1] - &v[m]).norm_sq() / h;
        tails[m] += acc;
    }
    tails
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nonlinear::maps::{BilinearMap, CutoffBilinear, LinearMap, ZeroMap};
    use crate::trajectory::{geometric_grid, uniform_grid};

    #[test]
    fn linear_homogeneous_case_is_exact() {
        let alpha: f64 = 0.5;
        let spec = SpectrumSpec::new(vec![alpha, -0.3, 0.0]).unwrap();
        let grid = geometric_grid(6.0, 0.9, 1e-3, 8).unwrap();
        let g0 = HVec(vec![0.7, 0.0, 0.0]);
        let sol = picard_solve(&spec, &ZeroMap { n: 3 }, &g0, &grid, &PicardConfig::default(), None).unwrap();
        for (t, v) in grid.iter().zip(sol.trajectory.values()) {
            let exact = 0.7 / alpha.sqrt() * (-t / alpha).exp();
            assert!((v[0] - exact).abs() < 1e-15);
            assert_eq!(v[1], 0.0);
            assert_eq!(v[2], 0.0);
        }
        assert_eq!(sol.report.iterations, 1);
    }

    #[test]
    fn zero_data_gives_zero() {
        let spec = SpectrumSpec::new(vec![1.0, 0.2]).unwrap();
        let b = BilinearMap::random_symmetric(2, 0, &[]).unwrap();
        let amp = CutoffBilinear::max_amplitude(&b, 1.0, 0.25);
        let g = CutoffBilinear::new(b, 1.0, amp).unwrap();
        let grid = uniform_grid(0.0, 3.0, 30);
        let sol = picard_solve(&spec, &g, &HVec::zeros(2), &grid, &PicardConfig::default(), None).unwrap();
        assert!(sol.trajectory.values().iter().all(|v| v.norm() == 0.0));
        assert_eq!(residual(&spec, &g, &sol.trajectory).unwrap(), 0.0);
    }

    #[test]
    fn linear_map_matches_scalar_closed_form() {
        // α x' = -(7/8) x with |α|^{1/2} x(0) = g
        let spec = SpectrumSpec::new(vec![1.0, 0.5]).unwrap();
        let g0 = HVec(vec![0.4, -0.9]);
        let grid = uniform_grid(0.0, 8.0, 16_000);
        let g = LinearMap { n: 2, c: 0.125 };
        let cfg = PicardConfig { tol: 1e-12, ..PicardConfig::default() };
        let sol = picard_solve(&spec, &g, &g0, &grid, &cfg, None).unwrap();
        let exact = Trajectory::from_fn(&grid, |t| {
            HVec(spec.alphas().iter().zip(g0.iter()).map(|(a, g)| g / a.sqrt() * (-0.875 * t / a).exp()).collect())
        })
        .unwrap();
        let err = sol.trajectory.distance_l2(&exact).unwrap() / exact.l2_norm();
        assert!(err < 1e-6, "relative error {err}");
        assert!(sol.report.gamma_eff <= 0.125 + 1e-9, "{}", sol.report.gamma_eff);
    }

    #[test]
    fn lipschitz_above_gamma_is_contract_violation() {
        let spec = SpectrumSpec::new(vec![1.0]).unwrap();
        let g = LinearMap { n: 1, c: 0.6 };
        let cfg = PicardConfig { gamma: 0.5, ..PicardConfig::default() };
        let r = picard_solve(&spec, &g, &HVec(vec![1.0]), &uniform_grid(0.0, 1.0, 4), &cfg, None);
        assert!(matches!(r, Err(Error::ContractViolation { .. })));
        let cfg = PicardConfig { gamma: 0.95, ..PicardConfig::default() };
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn exhausted_iterations_report_rate() {
        let spec = SpectrumSpec::new(vec![1.0]).unwrap();
        let g = LinearMap { n: 1, c: 0.8 };
        let cfg = PicardConfig { gamma: 0.9, tol: 1e-14, max_iter: 5 };
        let r = picard_solve(&spec, &g, &HVec(vec![1.0]), &uniform_grid(0.0, 4.0, 40), &cfg, None);
        match r {
            Err(Error::Divergence { iterations, rate, .. }) => {
                assert_eq!(iterations, 5);
                assert!(rate > 0.0 && rate < 0.9);
            }
            other => panic!("expected divergence, got {other:?}"),
        }
    }

    #[test]
    fn center_fixed_point() {
        let spec = SpectrumSpec::new(vec![0.0, 1.0, 0.0]).unwrap();
        let g = LinearMap { n: 3, c: 0.125 };
        let x_sc = HVec(vec![0.0, 2.0, 0.0]);
        // Π_c G(x_sc) = 0 here, so the fixed point is 0
        assert_eq!(center_solve(&spec, &g, &x_sc, 1e-14, 100).unwrap().norm(), 0.0);
        assert_eq!(center_solve(&spec, &ZeroMap { n: 3 }, &x_sc, 1e-14, 10).unwrap().norm(), 0.0);
        let none = SpectrumSpec::new(vec![1.0, -1.0]).unwrap();
        let c = center_solve(&none, &LinearMap { n: 2, c: 0.1 }, &HVec(vec![1.0, 1.0]), 1e-12, 10).unwrap();
        assert_eq!(c.norm(), 0.0);
    }

    /// `G(x) = x/8 + (0, 0, x_1/10)`: couples the stable mode into the center.
    struct Coupled;

    impl NonlinearMap for Coupled {
        fn dim(&self) -> usize {
            3
        }
        fn eval(&self, x: &HVec) -> HVec {
            HVec(vec![x[0] / 8.0, x[1] / 8.0, x[2] / 8.0 + x[1] / 10.0])
        }
        fn lip_bound(&self) -> f64 {
            0.125 + 0.1
        }
        fn deriv_bounds(&self) -> Vec<f64> {
            vec![0.225, 0.0]
        }
    }

    #[test]
    fn center_fixed_point_scalar_algebra() {
        // c = c/8 + (Π_c G)(x_sc) with (Π_c G)(x_sc) = x_1/10
        let spec = SpectrumSpec::new(vec![-1.0, 1.0, 0.0]).unwrap();
        let x_sc = HVec(vec![0.5, 2.0, 0.0]);
        let c = center_solve(&spec, &Coupled, &x_sc, 1e-15, 100).unwrap();
        assert!((c[2] - 8.0 / 7.0 * 0.2).abs() < 1e-14);
        assert!(c.norm() <= Coupled.lip_bound() * x_sc.norm() / (1.0 - Coupled.lip_bound()));
    }

    #[test]
    fn residual_is_second_order() {
        let alpha = 0.7;
        let spec = SpectrumSpec::new(vec![alpha]).unwrap();
        let res = |m: usize| {
            let grid = uniform_grid(0.0, 2.0, m);
            let x = Trajectory::scalar(&grid, |t| (-t / alpha).exp()).unwrap();
            residual(&spec, &ZeroMap { n: 1 }, &x).unwrap()
        };
        let (r1, r2, r3) = (res(20), res(40), res(80));
        assert!((r1 / r2 - 4.0).abs() < 0.1, "{r1} {r2}");
        assert!((r2 / r3 - 4.0).abs() < 0.1, "{r2} {r3}");
    }

    #[test]
    fn h1_tail_of_linear_function() {
        // x = 2t on [0, 1]: ∫x² = 4/3, ∫x'² = 4
        let x = Trajectory::scalar(&[0.0, 0.25, 1.0], |t| 2.0 * t).unwrap();
        assert!((h1_tail_sq(&x)[0] - (4.0 / 3.0 + 4.0)).abs() < 1e-14);
        assert_eq!(h1_tail_sq(&x)[2], 0.0);
    }
}
