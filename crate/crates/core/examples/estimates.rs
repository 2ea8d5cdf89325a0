//! Energy, decay and embedding checks on solutions and test trajectories.

use bistable::estimates::{
    bochner_counterexample, decay_fit, haar_l4_bound, l2_tail_series, quadratic_form_series, DecayWindow,
};
use bistable::nonlinear::{picard_solve, PicardConfig, ZeroMap};
use bistable::semigroup::dyadic_grid;
use bistable::spectral::{HVec, SpectrumSpec};
use bistable::trajectory::{geometric_grid, uniform_grid, Trajectory};

fn main() -> Result<(), bistable::error::Error> {
    let spec = SpectrumSpec::geometric(12, 0.5)?;
    // x(0) = |A|^{-1/2} g0 = 0.2 in every mode
    let g0 = HVec(spec.alphas().iter().map(|a| 0.2 * a.sqrt()).collect());
    let grid = geometric_grid(16.0, 0.9, 2f64.powi(-16), 16)?;
    let x = picard_solve(&spec, &ZeroMap { n: 12 }, &g0, &grid, &PicardConfig::default(), None)?.trajectory;

    let q = quadratic_form_series(&spec, &x)?;
    let tails = l2_tail_series(&x);
    println!("quadratic form nonincreasing and >= 0: {}", q.pass);
    println!("L2 tails below e^-t: {}", tails.pass);
    for r in decay_fit(&x, 3, DecayWindow::default())? {
        println!("k = {}: small-t slope {:.3}, large-t rate {:?}", r.k, r.small_t_slope, r.large_t_rate);
    }

    let bump = Trajectory::scalar(&uniform_grid(0.0, 4.0, 4000), |t| (-((t - 2.0) / 0.3).powi(2)).exp())?;
    let h = haar_l4_bound(&bump, None)?;
    println!("\n∫|x|⁴ = {:.4e} <= {:.4e}: {}", h.lhs, h.rhs, h.check.holds);

    for r in [1.5, 2.0] {
        let b = bochner_counterexample(r, &dyadic_grid(-20, -4), 20)?;
        println!(
            "r = {r}: |f|² = {:.10} (exact {:.10}), band ratio {:.3}, partial integrals divergent: {}",
            b.norm_sq, b.norm_sq_exact, b.band_ratio, b.divergent
        );
    }
    Ok(())
}
