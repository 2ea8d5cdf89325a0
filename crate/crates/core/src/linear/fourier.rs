//! Frequency-domain solution `x̂(ω) = (iωA + Id)^{-1} f̂(ω)`.
//!
//! `f` is sampled on a uniform grid and read as its piecewise-linear
//! interpolant, zero outside its support. The interpolant's transform is the
//! sample DFT times `sinc²(ωh/2)`. Applying the resolvent and sampling the
//! inverse transform back at the nodes folds every alias `ω + 2πn/h` onto the
//! DFT bin; that alias sum has the closed form given by [`alias_transfer`].
//! The solve is done on a zero-padded periodic grid, so the only error left
//! is wrap-around, which the padding pushes below `e^{-pad/‖A‖}`.

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::spectral::{HVec, SpectrumSpec};
use crate::trajectory::Trajectory;

/// Minimum ratio of padded length to support length.
pub const MIN_PADDING_FACTOR: usize = 4;
/// Padding on each side is at least this many multiples of `‖A‖`.
const DECAY_LENGTHS: f64 = 40.0;

#[derive(Debug, Clone)]
pub struct FourierSolution {
    /// Solution on the whole padded periodic grid.
    pub trajectory: Trajectory,
    /// The zero-padded forcing on the same grid.
    pub forcing: Trajectory,
    /// Nodes of padding before and after the support of `f`.
    pub pad_before: usize,
    pub pad_after: usize,
    /// Upper estimate of the relative wrap-around error, `e^{-pad/‖A‖}`.
    pub periodization_error: f64,
}

impl FourierSolution {
    /// The solution at the nodes of the forcing `f` it was computed from.
    pub fn on_support(&self, f: &Trajectory) -> Result<Trajectory> {
        let v = self.trajectory.values();
        let range = self.pad_before..self.pad_before + f.len();
        Trajectory::new(f.times().to_vec(), v[range].to_vec())
    }
}

/// Sum over all aliases `u = θ + 2πn` of `sinc²(u/2) / (1 + i c u)`, with
/// `c = α/h`. Partial fractions reduce it to
/// `1 - i c sin θ + 2 i c sin²(θ/2) cot((θ - i/c)/2)`.
pub fn alias_transfer(theta: f64, c: f64) -> Complex64 {
    if c == 0.0 {
        return Complex64::new(1.0, 0.0);
    }
    let s = (0.5 * theta).sin();
    let i = Complex64::i();
    let z = Complex64::new(0.5 * theta, -0.5 / c);
    Complex64::new(1.0, 0.0) - i * c * theta.sin() + 2.0 * i * c * s * s * cot(z)
}

/// `cot z` evaluated through whichever of `e^{±2iz}` is bounded.
fn cot(z: Complex64) -> Complex64 {
    let i = Complex64::i();
    if z.im < 0.0 {
        let w = (-2.0 * i * z).exp();
        i * (1.0 + w) / (1.0 - w)
    } else {
        let w = (2.0 * i * z).exp();
        -i * (1.0 + w) / (1.0 - w)
    }
}

/// Solve `(d/dt)(Ax) + x = f` on the line for `f` on a uniform grid.
pub fn solve_fourier(spec: &SpectrumSpec, f: &Trajectory) -> Result<FourierSolution> {
    spec.check(&f.values()[0])?;
    let h = f.uniform_spacing(1e-9).ok_or_else(|| Error::Parameter("Fourier solver requires a uniform grid".into()))?;
    let support = f.len();
    let span = f.end() - f.start();
    let pad_len = (1.5 * span).max(DECAY_LENGTHS * spec.norm_bound());
    let pad_nodes = (pad_len / h).ceil() as usize;
    let mut total = (support + 2 * pad_nodes).max(MIN_PADDING_FACTOR * support);
    total = total.next_power_of_two();
    let pad_before = pad_nodes;
    let pad_after = total - support - pad_before;

    let n = spec.dim();
    let mut planner = FftPlanner::<f64>::new();
    let forward = planner.plan_fft_forward(total);
    let inverse = planner.plan_fft_inverse(total);
    let thetas: Vec<f64> = (0..total)
        .map(|k| {
            let k = if k <= total / 2 { k as f64 } else { k as f64 - total as f64 };
            2.0 * std::f64::consts::PI * k / total as f64
        })
        .collect();

    let mut columns = vec![vec![0.0; total]; n];
    let mut buf = vec![Complex64::new(0.0, 0.0); total];
    for (j, column) in columns.iter_mut().enumerate() {
        buf.iter_mut().for_each(|b| *b = Complex64::new(0.0, 0.0));
        for (m, v) in f.values().iter().enumerate() {
            buf[pad_before + m] = Complex64::new(v[j], 0.0);
        }
        forward.process(&mut buf);
        let c = spec.alphas()[j] / h;
        for (b, theta) in buf.iter_mut().zip(&thetas) {
            *b *= alias_transfer(*theta, c);
        }
        inverse.process(&mut buf);
        for (out, b) in column.iter_mut().zip(&buf) {
            *out = b.re / total as f64;
        }
    }

    let t_first = f.start() - pad_before as f64 * h;
    let times: Vec<f64> = (0..total).map(|i| t_first + i as f64 * h).collect();
    let values = (0..total).map(|i| HVec(columns.iter().map(|c| c[i]).collect())).collect();
    let mut padded = vec![HVec::zeros(n); total];
    padded[pad_before..pad_before + support].clone_from_slice(f.values());
    let pad_time = pad_before.min(pad_after) as f64 * h;
    Ok(FourierSolution {
        forcing: Trajectory::new(times.clone(), padded)?,
        trajectory: Trajectory::new(times, values)?,
        pad_before,
        pad_after,
        periodization_error: (-pad_time / spec.norm_bound()).exp(),
    })
}
