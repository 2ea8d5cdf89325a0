//! Resolvent norms along the imaginary axis and the mild-data test.

use bistable::linear::{mild_sweep, resolvent_a_norm, resolvent_norm};
use bistable::spectral::{HVec, SpectrumSpec};

fn main() -> Result<(), bistable::error::Error> {
    let spec = SpectrumSpec::new(vec![1.0, -1.0, 1e-3, -1e-4, 0.0])?;
    for omega in [-1e6, -10.0, -1.0, 0.0, 1e-2, 1.0, 1e3] {
        println!(
            "omega = {omega:>9}: |(iwA+1)^-1| = {:.6}  |iwA(iwA+1)^-1| = {:.6}",
            resolvent_norm(&spec, omega),
            resolvent_a_norm(&spec, omega)
        );
    }

    // on a harmonic ladder g_j = j^-p is mild exactly when p > 1
    for (name, coeff) in [("constant", 0.0f64), ("j^-1", 1.0), ("j^-3/2", 1.5)] {
        let levels: Vec<(SpectrumSpec, HVec)> = [16, 64, 256, 1024]
            .iter()
            .map(|&n| {
                let g = HVec((1..=n).map(|j| (j as f64).powf(-coeff)).collect());
                (SpectrumSpec::harmonic(n).unwrap(), g)
            })
            .collect();
        let sweep = mild_sweep(&levels)?;
        println!("{name}: defects {:.4?} -> {:?}", sweep.defects, sweep.class);
    }
    Ok(())
}
