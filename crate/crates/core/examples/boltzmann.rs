//! Boundary-layer tails of a discrete-velocity kinetic model as the boundary
//! data shrinks.

use bistable::boltzmann::{
    build_model, max_certified_amplitude, scale_family, stable_data, tail_experiment, ModelOptions, TailOptions,
};

fn main() -> Result<(), bistable::error::Error> {
    let opts = ModelOptions::default();
    let (k, seed) = (16, 3);
    let amp = max_certified_amplitude(k, seed, &opts)?;
    let model = build_model(k, seed, amp, &opts)?;
    println!("{} velocities, collision amplitude {amp:.4}, certificate {:.4}", model.dim(), model.certificate);

    let base = stable_data(model.spectrum(), seed, 0.5)?;
    let family = scale_family(&base, &[1.0, 0.5, 0.25, 0.125]);
    let exp = tail_experiment(&model, &family, &TailOptions::default())?;
    for m in &exp.members {
        println!(
            "|g0| = {:.4}: t* = {:?}  slope {:?}  rate {:?}  pass {}",
            m.g0_norm, m.t_star, m.small_t_slope, m.derivative_rate, m.pass
        );
    }
    println!("t* nonincreasing: {}  all pass: {}", exp.t_star_monotone, exp.pass);
    Ok(())
}
