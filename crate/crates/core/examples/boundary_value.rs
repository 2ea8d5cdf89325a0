//! Linear two-point problem on [0, 2], solved in the time domain and checked
//! against the frequency-domain route.

use bistable::linear::{bvp_report, random_instance, BoundaryData};
use bistable::spectral::HVec;
use bistable::trajectory::{uniform_grid, Trajectory};

fn main() -> Result<(), bistable::error::Error> {
    let (spec, f, bd) = random_instance(32, 7, 1600)?;
    let rep = bvp_report(&spec, &f, &bd)?;
    println!("random instance, 32 modes, 1600 cells");
    println!("  weak residual      {:.3e}", rep.residual);
    println!("  boundary errors    {:.3e} {:.3e}", rep.stable_bc_error, rep.unstable_bc_error);
    println!("  Fourier distance   {:.3e}", rep.fourier_disagreement.unwrap_or(f64::NAN));

    // homogeneous problem with mild boundary data
    let spec = bistable::spectral::SpectrumSpec::new(vec![0.5, -0.25])?;
    let bd = BoundaryData::mild(&spec, HVec(vec![1.0, 0.0]), HVec(vec![0.0, 1.0]))?;
    let f = Trajectory::zeros(&uniform_grid(0.0, 1.0, 400), 2)?;
    let rep = bvp_report(&spec, &f, &bd)?;
    let x = &rep.solution;
    println!("\nmild data: x(0) = {:.6?}  x(1) = {:.6?}", x.values()[0].0, x.values()[x.len() - 1].0);
    Ok(())
}
