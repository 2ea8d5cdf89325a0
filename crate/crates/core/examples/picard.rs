//! Nonlinear problem with a cut-off quadratic nonlinearity, solved by Picard
//! iteration on a geometric grid.

use bistable::nonlinear::{picard_solve, BilinearMap, CutoffBilinear, NonlinearMap, PicardConfig};
use bistable::spectral::{HVec, SpectrumSpec};
use bistable::trajectory::geometric_grid;

fn main() -> Result<(), bistable::error::Error> {
    let stable = SpectrumSpec::harmonic(8)?;
    let unstable = SpectrumSpec::new(stable.alphas().iter().map(|a| -0.5 * a).collect())?;
    let spec = SpectrumSpec::join(&[stable, unstable])?;

    let b = BilinearMap::random_symmetric(spec.dim(), 11, &[])?;
    let g = CutoffBilinear::new(b.clone(), 1.0, CutoffBilinear::max_amplitude(&b, 1.0, 0.2))?;
    println!("Lipschitz bound {:.4}", g.lip_bound());

    let g0 = HVec((0..spec.dim()).map(|j| if j < 8 { 0.3 / (j + 1) as f64 } else { 0.0 }).collect());
    let grid = geometric_grid(20.0, 0.95, 2f64.powi(-14), 16)?;
    let sol = picard_solve(&spec, &g, &g0, &grid, &PicardConfig::default(), None)?;
    let r = &sol.report;
    println!("{} iterations, observed contraction {:.4}", r.iterations, r.gamma_eff);
    println!("L2 {:.6}  H1 {:.6}  sup {:.6}  residual {:.3e}", r.l2_norm, r.h1_norm, r.sup_norm, r.residual);
    for t in [0.0, 1.0, 5.0, 20.0] {
        println!("|x({t})| = {:.6e}", sol.trajectory.eval(t).unwrap().norm());
    }

    // a linear map above the contraction cap is refused
    let lin = bistable::nonlinear::LinearMap { n: spec.dim(), c: 0.6 };
    let cfg = PicardConfig { gamma: 0.5, ..PicardConfig::default() };
    match picard_solve(&spec, &lin, &g0, &grid, &cfg, None) {
        Err(e) => println!("refused: {e}"),
        Ok(_) => unreachable!(),
    }
    Ok(())
}
