//! Diagonal model of a bounded self-adjoint operator `A`.
//!
//! The spectral measure is discretized as `N` unit point atoms, so `A` acts on
//! coefficient vectors by `(Av)_j = alpha_j v_j`. Every function of `A` used in
//! the crate (projections, `|A|^r`, semigroups, resolvents) is therefore an
//! exact coordinate-wise multiplier. The coordinate order is the order the
//! eigenvalues were supplied in; ladder constructors emit them largest first.

use std::ops::{Add, Index, IndexMut, Sub};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};

/// Default tolerance, relative to `‖v‖`, below which a center coordinate
/// counts as zero in range-membership tests.
pub const TOL_CENTER: f64 = 1e-10;

/// A coefficient vector in the truncated Hilbert space, with the `ℓ²` inner
/// product.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct HVec(pub Vec<f64>);

impl HVec {
    pub fn zeros(n: usize) -> Self {
        HVec(vec![0.0; n])
    }

    /// The unit vector `e_j` in dimension `n`.
    pub fn unit(n: usize, j: usize) -> Self {
        let mut v = Self::zeros(n);
        v.0[j] = 1.0;
        v
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn iter(&self) -> std::slice::Iter<'_, f64> {
        self.0.iter()
    }

    pub fn dot(&self, other: &HVec) -> f64 {
        self.0.iter().zip(&other.0).map(|(a, b)| a * b).sum()
    }

    pub fn norm_sq(&self) -> f64 {
        self.dot(self)
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn scale(&self, c: f64) -> HVec {
        HVec(self.0.iter().map(|a| a * c).collect())
    }

    /// `self + c * other`.
    pub fn axpy(&self, c: f64, other: &HVec) -> HVec {
        HVec(self.0.iter().zip(&other.0).map(|(a, b)| a + c * b).collect())
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|a| a.is_finite())
    }
}

impl From<Vec<f64>> for HVec {
    fn from(v: Vec<f64>) -> Self {
        HVec(v)
    }
}

impl Index<usize> for HVec {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl IndexMut<usize> for HVec {
    fn index_mut(&mut self, i: usize) -> &mut f64 {
        &mut self.0[i]
    }
}

impl Add for &HVec {
    type Output = HVec;
    fn add(self, rhs: &HVec) -> HVec {
        HVec(self.0.iter().zip(&rhs.0).map(|(a, b)| a + b).collect())
    }
}

impl Sub for &HVec {
    type Output = HVec;
    fn sub(self, rhs: &HVec) -> HVec {
        HVec(self.0.iter().zip(&rhs.0).map(|(a, b)| a - b).collect())
    }
}

/// Which spectral subspace of `A` a coordinate belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SubspaceTag {
    /// `alpha > 0`
    Stable,
    /// `alpha = 0`
    Center,
    /// `alpha < 0`
    Unstable,
}

impl SubspaceTag {
    pub fn of(alpha: f64) -> Self {
        if alpha > 0.0 {
            SubspaceTag::Stable
        } else if alpha < 0.0 {
            SubspaceTag::Unstable
        } else {
            SubspaceTag::Center
        }
    }
}

/// Finite set of eigenvalues of `A`, one per coordinate (multiplicities are
/// repeated entries).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumSpec {
    alphas: Vec<f64>,
    norm_bound: f64,
}

impl SpectrumSpec {
    pub fn new(alphas: Vec<f64>) -> Result<Self> {
        if alphas.is_empty() {
            return Err(Error::Parameter("spectrum must contain at least one eigenvalue".into()));
        }
        if alphas.iter().any(|a| !a.is_finite()) {
            return Err(Error::Parameter("eigenvalues must be finite".into()));
        }
        let norm_bound = alphas.iter().fold(0.0_f64, |m, a| m.max(a.abs()));
        if norm_bound <= 0.0 {
            return Err(Error::Parameter("spectrum is identically zero (norm bound must be > 0)".into()));
        }
        Ok(SpectrumSpec { alphas, norm_bound })
    }

    /// `alpha_j = 1/j` for `j = 1..=n`.
    pub fn harmonic(n: usize) -> Result<Self> {
        Self::new((1..=n).map(|j| 1.0 / j as f64).collect())
    }

    /// `alpha_j = ratio^j` for `j = 0..n`; `ratio = 0.5` gives the dyadic ladder.
    pub fn geometric(n: usize, ratio: f64) -> Result<Self> {
        if !(ratio > 0.0 && ratio < 1.0) {
            return Err(Error::Parameter(format!("geometric ratio must lie in (0,1), got {ratio}")));
        }
        Self::new((0..n).map(|j| ratio.powi(j as i32)).collect())
    }

    /// `n` eigenvalues drawn uniformly from `[-1, 1]` with a seeded generator.
    pub fn uniform(n: usize, seed: u64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Self::new((0..n).map(|_| rng.random_range(-1.0..=1.0)).collect())
    }

    /// Concatenate several spectra into one (direct sum of the models).
    pub fn join(parts: &[SpectrumSpec]) -> Result<Self> {
        Self::new(parts.iter().flat_map(|p| p.alphas.iter().copied()).collect())
    }

    /// Rescale every eigenvalue by `c > 0`.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        if !(c > 0.0) {
            return Err(Error::Parameter("scale must be positive".into()));
        }
        Self::new(self.alphas.iter().map(|a| a * c).collect())
    }

    pub fn alphas(&self) -> &[f64] {
        &self.alphas
    }

    pub fn dim(&self) -> usize {
        self.alphas.len()
    }

    /// `max_j |alpha_j| = ‖A‖`.
    pub fn norm_bound(&self) -> f64 {
        self.norm_bound
    }

    pub fn tag(&self, j: usize) -> SubspaceTag {
        SubspaceTag::of(self.alphas[j])
    }

    pub fn indices(&self, tag: SubspaceTag) -> impl Iterator<Item = usize> + '_ {
        (0..self.dim()).filter(move |&j| self.tag(j) == tag)
    }

    pub fn count(&self, tag: SubspaceTag) -> usize {
        self.indices(tag).count()
    }

    /// Smallest nonzero `|alpha_j|`, if any.
    pub fn min_abs_nonzero(&self) -> Option<f64> {
        self.alphas
            .iter()
            .filter(|a| **a != 0.0)
            .map(|a| a.abs())
            .fold(None, |m, a| Some(m.map_or(a, |m: f64| m.min(a))))
    }

    pub(crate) fn check(&self, v: &HVec) -> Result<()> {
        check_dim(self.dim(), v.len())
    }

    /// `(Av)_j = alpha_j v_j`.
    pub fn apply_a(&self, v: &HVec) -> Result<HVec> {
        self.check(v)?;
        Ok(HVec(self.alphas.iter().zip(v.iter()).map(|(a, x)| a * x).collect()))
    }

    /// Spectral projection onto the tagged subspace.
    pub fn project(&self, v: &HVec, tag: SubspaceTag) -> Result<HVec> {
        self.check(v)?;
        Ok(HVec(
            self.alphas.iter().zip(v.iter()).map(|(a, x)| if SubspaceTag::of(*a) == tag { *x } else { 0.0 }).collect(),
        ))
    }

    /// `sgn(A) v`.
    pub fn apply_sign(&self, v: &HVec) -> Result<HVec> {
        self.check(v)?;
        Ok(HVec(
            self.alphas
                .iter()
                .zip(v.iter())
                .map(|(a, x)| {
                    if *a > 0.0 {
                        *x
                    } else if *a < 0.0 {
                        -*x
                    } else {
                        0.0
                    }
                })
                .collect(),
        ))
    }

    /// `|A|^r v` for `r > 0`; center coordinates map to zero.
    pub fn abs_power(&self, v: &HVec, r: f64) -> Result<HVec> {
        self.check(v)?;
        if !(r > 0.0) {
            return Err(Error::Parameter(format!(
                "abs_power needs r > 0 (got {r}); use abs_power_inv for negative powers"
            )));
        }
        Ok(HVec(
            self.alphas.iter().zip(v.iter()).map(|(a, x)| if *a == 0.0 { 0.0 } else { a.abs().powf(r) * x }).collect(),
        ))
    }

    /// `|A|^{-r} v`, defined on `Range |A|^r`. Fails when `v` has a center
    /// coordinate above `TOL_CENTER * ‖v‖`.
    pub fn abs_power_inv(&self, v: &HVec, r: f64) -> Result<HVec> {
        self.abs_power_inv_tol(v, r, TOL_CENTER)
    }

    pub fn abs_power_inv_tol(&self, v: &HVec, r: f64, tol_center: f64) -> Result<HVec> {
        self.check(v)?;
        if !(r > 0.0) {
            return Err(Error::Parameter(format!("abs_power_inv needs r > 0, got {r}")));
        }
        let threshold = tol_center * v.norm();
        for (j, (a, x)) in self.alphas.iter().zip(v.iter()).enumerate() {
            if *a == 0.0 && x.abs() > threshold {
                return Err(Error::Domain(format!(
                    "vector not in Range |A|^{r}: center coordinate {j} has magnitude {:.3e}",
                    x.abs()
                )));
            }
        }
        Ok(HVec(
            self.alphas.iter().zip(v.iter()).map(|(a, x)| if *a == 0.0 { 0.0 } else { a.abs().powf(-r) * x }).collect(),
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec3() -> SpectrumSpec {
        SpectrumSpec::new(vec![1.0, -2.0, 0.0]).unwrap()
    }

    #[test]
    fn diagonal_action() {
        let v = HVec(vec![1.0, 1.0, 1.0]);
        assert_eq!(spec3().apply_a(&v).unwrap(), HVec(vec![1.0, -2.0, 0.0]));
        assert_eq!(spec3().apply_a(&HVec::zeros(3)).unwrap(), HVec::zeros(3));
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let err = spec3().apply_a(&HVec::zeros(2)).unwrap_err();
        assert!(matches!(err, Error::Dimension { expected: 3, found: 2 }));
    }

    #[test]
    fn projections() {
        let v = HVec(vec![3.0, 4.0, 5.0]);
        let s = spec3();
        assert_eq!(s.project(&v, SubspaceTag::Stable).unwrap(), HVec(vec![3.0, 0.0, 0.0]));
        assert_eq!(s.project(&v, SubspaceTag::Center).unwrap(), HVec(vec![0.0, 0.0, 5.0]));
        assert_eq!(s.project(&v, SubspaceTag::Unstable).unwrap(), HVec(vec![0.0, 4.0, 0.0]));
    }

    #[test]
    fn fractional_powers() {
        let s = SpectrumSpec::new(vec![4.0, -9.0]).unwrap();
        let v = HVec(vec![1.0, 1.0]);
        assert_eq!(s.abs_power(&v, 0.5).unwrap(), HVec(vec![2.0, 3.0]));
        assert_eq!(s.abs_power_inv(&HVec(vec![2.0, 3.0]), 0.5).unwrap(), HVec(vec![1.0, 1.0]));

        let c = SpectrumSpec::new(vec![0.0, 1.0]).unwrap();
        assert_eq!(c.abs_power(&HVec(vec![7.0, 0.0]), 0.5).unwrap(), HVec(vec![0.0, 0.0]));
        assert!(matches!(c.abs_power_inv(&HVec(vec![1.0, 0.0]), 1.0), Err(Error::Domain(_))));
        assert!(matches!(c.abs_power(&HVec(vec![1.0, 0.0]), 0.0), Err(Error::Parameter(_))));
        assert!(matches!(c.abs_power(&HVec(vec![1.0, 0.0]), -1.0), Err(Error::Parameter(_))));
    }

    #[test]
    fn abs_equals_sign_times_a() {
        let s = SpectrumSpec::uniform(17, 3).unwrap();
        let v = HVec((0..17).map(|i| (i as f64 * 0.7).sin()).collect());
        let lhs = s.abs_power(&v, 1.0).unwrap();
        let rhs = s.apply_sign(&s.apply_a(&v).unwrap()).unwrap();
        for (a, b) in lhs.iter().zip(rhs.iter()) {
            assert!((a - b).abs() <= 1e-15 * a.abs().max(1.0));
        }
    }

    #[test]
    fn norm_bound_respected_on_uniform_spectrum() {
        let s = SpectrumSpec::uniform(64, 11).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let v = HVec((0..64).map(|_| rng.random_range(-1.0..1.0)).collect());
            let av = s.apply_a(&v).unwrap();
            assert!(av.norm() <= s.norm_bound() * v.norm() * (1.0 + 1e-15));
        }
    }

    #[test]
    fn zero_spectrum_rejected() {
        assert!(SpectrumSpec::new(vec![0.0, 0.0]).is_err());
        assert!(SpectrumSpec::new(vec![]).is_err());
    }

    #[test]
    fn ladders() {
        let h = SpectrumSpec::harmonic(4).unwrap();
        assert_eq!(h.alphas(), &[1.0, 0.5, 1.0 / 3.0, 0.25]);
        let g = SpectrumSpec::geometric(41, 0.5).unwrap();
        assert_eq!(g.alphas()[20], 2f64.powi(-20));
        assert_eq!(g.norm_bound(), 1.0);
        assert_eq!(g.min_abs_nonzero(), Some(2f64.powi(-40)));
    }
}
