use num_complex::Complex64;

use crate::error::Result;
use crate::spectral::{HVec, SpectrumSpec};

/// `(iωA + Id)^{-1} v` on complexified coordinates.
pub fn resolvent_apply(spec: &SpectrumSpec, omega: f64, v: &HVec) -> Result<Vec<Complex64>> {
    spec.check(v)?;
    Ok(spec.alphas().iter().zip(v.iter()).map(|(a, x)| resolvent_factor(*a, omega) * x).collect())
}

/// Per-mode multiplier `1 / (1 + iωα)`.
pub fn resolvent_factor(alpha: f64, omega: f64) -> Complex64 {
    Complex64::new(1.0, omega * alpha).inv()
}

/// `‖(iωA + Id)^{-1}‖ = max_j (1 + ω²α_j²)^{-1/2}`.
pub fn resolvent_norm(spec: &SpectrumSpec, omega: f64) -> f64 {
    spec.alphas().iter().map(|a| resolvent_factor(*a, omega).norm()).fold(0.0, f64::max)
}

/// `‖iωA (iωA + Id)^{-1}‖ = max_j |ωα_j| / (1 + ω²α_j²)^{1/2}`.
pub fn resolvent_a_norm(spec: &SpectrumSpec, omega: f64) -> f64 {
    spec.alphas()
        .iter()
        .map(|a| (Complex64::new(0.0, omega * a) * resolvent_factor(*a, omega)).norm())
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scalar_modulus() {
        let s = SpectrumSpec::new(vec![1.0]).unwrap();
        let out = resolvent_apply(&s, 1.0, &HVec(vec![1.0])).unwrap();
        assert!((out[0].norm() - 0.5f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn zero_frequency_is_identity() {
        let s = SpectrumSpec::uniform(9, 1).unwrap();
        let v = HVec((0..9).map(|i| i as f64 - 4.0).collect());
        let out = resolvent_apply(&s, 0.0, &v).unwrap();
        for (o, x) in out.iter().zip(v.iter()) {
            assert_eq!(o.re, *x);
            assert_eq!(o.im, 0.0);
        }
    }

    #[test]
    fn operator_norm_is_per_mode_maximum() {
        for seed in 0..5 {
            let s = SpectrumSpec::uniform(16, seed).unwrap();
            for omega in [-1e3, -2.5, 0.3, 40.0] {
                let direct =
                    s.alphas().iter().map(|a: &f64| (1.0 + omega * omega * a * a).powf(-0.5)).fold(0.0, f64::max);
                assert!((resolvent_norm(&s, omega) - direct).abs() < 1e-14);
                assert!(resolvent_norm(&s, omega) <= 1.0);
                assert!(resolvent_a_norm(&s, omega) <= 2.0);
            }
        }
    }
}
