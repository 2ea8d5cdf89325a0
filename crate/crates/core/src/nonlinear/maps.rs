//! Nonlinearities `G` with certified Lipschitz and derivative bounds.

use std::sync::OnceLock;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{check_dim, Error, Result};
use crate::spectral::HVec;

/// A map `G: H → H` with `G(0) = 0` and certified bounds.
pub trait NonlinearMap: Send + Sync {
    fn dim(&self) -> usize;

    fn eval(&self, x: &HVec) -> HVec;

    /// Certified global Lipschitz constant.
    fn lip_bound(&self) -> f64;

    /// `sup ‖D^j G‖` for `j = 1, 2, ...`.
    fn deriv_bounds(&self) -> Vec<f64>;

    fn zero_at_zero(&self) -> bool {
        true
    }
}

#[derive(Debug, Clone, Copy)]
pub struct ZeroMap {
    pub n: usize,
}

impl NonlinearMap for ZeroMap {
    fn dim(&self) -> usize {
        self.n
    }

    fn eval(&self, _x: &HVec) -> HVec {
        HVec::zeros(self.n)
    }

    fn lip_bound(&self) -> f64 {
        0.0
    }

    fn deriv_bounds(&self) -> Vec<f64> {
        vec![0.0, 0.0]
    }
}

/// `G(x) = c x`.
#[derive(Debug, Clone, Copy)]
pub struct LinearMap {
    pub n: usize,
    pub c: f64,
}

impl NonlinearMap for LinearMap {
    fn dim(&self) -> usize {
        self.n
    }

    fn eval(&self, x: &HVec) -> HVec {
        x.scale(self.c)
    }

    fn lip_bound(&self) -> f64 {
        self.c.abs()
    }

    fn deriv_bounds(&self) -> Vec<f64> {
        vec![self.c.abs(), 0.0]
    }
}

/// Bilinear map `B(u, v)_i = Σ_{jk} T_{ijk} u_j v_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct BilinearMap {
    n: usize,
    tensor: Vec<f64>,
}

impl BilinearMap {
    pub fn new(n: usize, tensor: Vec<f64>) -> Result<Self> {
        check_dim(n * n * n, tensor.len())?;
        if tensor.iter().any(|t| !t.is_finite()) {
            return Err(Error::Parameter("bilinear tensor entries must be finite".into()));
        }
        Ok(BilinearMap { n, tensor })
    }

    /// Gaussian tensor, symmetrized in `(j, k)` and scaled to Frobenius norm 1.
    /// If `invariants` is given, the range is made orthogonal to those
    /// coordinate directions.
    pub fn random_symmetric(n: usize, seed: u64, invariants: &[usize]) -> Result<Self> {
        if n == 0 {
            return Err(Error::Parameter("bilinear map needs n >= 1".into()));
        }
        if let Some(i) = invariants.iter().find(|i| **i >= n) {
            return Err(Error::Parameter(format!("invariant index {i} out of range for n = {n}")));
        }
        if invariants.len() >= n {
            return Err(Error::Parameter("every direction is an invariant; B would vanish".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut t: Vec<f64> = (0..n * n * n).map(|_| rng.sample(StandardNormal)).collect();
        for i in 0..n {
            for j in 0..n {
                for k in j + 1..n {
                    let avg = 0.5 * (t[(i * n + j) * n + k] + t[(i * n + k) * n + j]);
                    t[(i * n + j) * n + k] = avg;
                    t[(i * n + k) * n + j] = avg;
                }
            }
        }
        for &i in invariants {
            t[i * n * n..(i + 1) * n * n].iter_mut().for_each(|v| *v = 0.0);
        }
        let fro = t.iter().map(|v| v * v).sum::<f64>().sqrt();
        t.iter_mut().for_each(|v| *v /= fro);
        BilinearMap::new(n, t)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Entries `T_{ijk}` at `(i * n + j) * n + k`.
    pub fn tensor(&self) -> &[f64] {
        &self.tensor
    }

    pub fn apply(&self, u: &HVec, v: &HVec) -> HVec {
        let n = self.n;
        HVec(
            (0..n)
                .map(|i| {
                    let block = &self.tensor[i * n * n..(i + 1) * n * n];
                    let mut s = 0.0;
                    for j in 0..n {
                        if u[j] == 0.0 {
                            continue;
                        }
                        let row = &block[j * n..(j + 1) * n];
                        s += u[j] * row.iter().zip(v.iter()).map(|(a, b)| a * b).sum::<f64>();
                    }
                    s
                })
                .collect(),
        )
    }

    /// `‖T‖_F`, an upper bound for `sup ‖B(u, v)‖ / (‖u‖ ‖v‖)`.
    pub fn norm_bound(&self) -> f64 {
        self.tensor.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Largest `|T_{ijk} - T_{ikj}|`.
    pub fn symmetry_defect(&self) -> f64 {
        let n = self.n;
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    worst = worst.max((self.tensor[(i * n + j) * n + k] - self.tensor[(i * n + k) * n + j]).abs());
                }
            }
        }
        worst
    }
}

/// `h(v) = e^{-1/v}` for `v > 0`, else 0.
fn h(v: f64) -> f64 {
    if v > 0.0 {
        (-1.0 / v).exp()
    } else {
        0.0
    }
}

fn dh(v: f64) -> f64 {
    if v > 0.0 {
        h(v) / (v * v)
    } else {
        0.0
    }
}

/// Smooth cutoff: 1 on `[0, 1]`, 0 on `[2, ∞)`.
pub fn cutoff(u: f64) -> f64 {
    let (a, b) = (h(2.0 - u), h(u - 1.0));
    a / (a + b)
}

pub fn cutoff_deriv(u: f64) -> f64 {
    let (a, b) = (h(2.0 - u), h(u - 1.0));
    let (da, db) = (-dh(2.0 - u), dh(u - 1.0));
    (da * b - a * db) / ((a + b) * (a + b))
}

/// Constants of the radial cutoff `ψ(x) = χ(|x|/ρ) x`:
/// `m = sup_u u χ(u)` (so `sup |ψ| = m ρ`), `l = sup_u χ(u) + u |χ'(u)|` (the
/// Lipschitz constant of `ψ`), and `k2 = sup_u 4|χ'(u)| + u |χ''(u)|` (so
/// `‖D²ψ‖ <= k2 / ρ`). Sampled densely on `[1, 2]` and rounded up by 0.1%.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CutoffConstants {
    pub m: f64,
    pub l: f64,
    pub k2: f64,
}

pub fn cutoff_constants() -> CutoffConstants {
    static CONSTS: OnceLock<CutoffConstants> = OnceLock::new();
    *CONSTS.get_or_init(|| {
        let samples = 200_000;
        let step = 1.0 / samples as f64;
        let (mut m, mut l, mut k2): (f64, f64, f64) = (1.0, 1.0, 0.0);
        for i in 0..=samples {
            let u = 1.0 + i as f64 * step;
            let d = cutoff_deriv(u);
            let dd = (cutoff_deriv(u + 1e-6) - cutoff_deriv(u - 1e-6)) / 2e-6;
            m = m.max(u * cutoff(u));
            l = l.max(cutoff(u) + u * d.abs());
            k2 = k2.max(4.0 * d.abs() + u * dd.abs());
        }
        let up = 1.001;
        CutoffConstants { m: m * up, l: l * up, k2: k2 * up }
    })
}

/// `G(x) = amp · B(ψ(x), ψ(x))` with `ψ(x) = χ(|x|/ρ) x`. Agrees with
/// `amp · B(x, x)` for `|x| <= ρ` and is globally Lipschitz.
#[derive(Debug, Clone)]
pub struct CutoffBilinear {
    pub b: BilinearMap,
    pub rho: f64,
    pub amp: f64,
}

impl CutoffBilinear {
    pub fn new(b: BilinearMap, rho: f64, amp: f64) -> Result<Self> {
        if !(rho > 0.0) || !rho.is_finite() {
            return Err(Error::Parameter(format!("saturation radius must be positive, got {rho}")));
        }
        if !amp.is_finite() {
            return Err(Error::Parameter("amplitude must be finite".into()));
        }
        Ok(CutoffBilinear { b, rho, amp })
    }

    /// Largest amplitude for which the certificate stays below `lip`.
    pub fn max_amplitude(b: &BilinearMap, rho: f64, lip: f64) -> f64 {
        let c = cutoff_constants();
        lip / (2.0 * b.norm_bound() * rho * c.m * c.l)
    }

    fn psi(&self, x: &HVec) -> HVec {
        x.scale(cutoff(x.norm() / self.rho))
    }
}

impl NonlinearMap for CutoffBilinear {
    fn dim(&self) -> usize {
        self.b.dim()
    }

    fn eval(&self, x: &HVec) -> HVec {
        let p = self.psi(x);
        self.b.apply(&p, &p).scale(self.amp)
    }

    /// `2 |amp| ‖B‖ sup|ψ| Lip(ψ)`.
    fn lip_bound(&self) -> f64 {
        let c = cutoff_constants();
        2.0 * self.amp.abs() * self.b.norm_bound() * self.rho * c.m * c.l
    }

    fn deriv_bounds(&self) -> Vec<f64> {
        let c = cutoff_constants();
        let second = 2.0 * self.amp.abs() * self.b.norm_bound() * (c.l * c.l + c.m * c.k2);
        vec![self.lip_bound(), second]
    }
}

/// Largest observed `‖G(u) - G(v)‖ / ‖u - v‖` over `samples` random pairs
/// with entries in `[-radius, radius]`.
pub fn sampled_lipschitz(g: &dyn NonlinearMap, samples: usize, radius: f64, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = g.dim();
    let mut worst: f64 = 0.0;
    for _ in 0..samples {
        let u = HVec((0..n).map(|_| rng.random_range(-radius..=radius)).collect());
        let v = if rng.random_bool(0.5) {
            // nearby pair probes the local derivative
            let eps = 1e-4 * radius;
            u.axpy(1.0, &HVec((0..n).map(|_| rng.random_range(-eps..=eps)).collect()))
        } else {
            HVec((0..n).map(|_| rng.random_range(-radius..=radius)).collect())
        };
        let d = (&u - &v).norm();
        if d > 0.0 {
            worst = worst.max((&g.eval(&u) - &g.eval(&v)).norm() / d);
        }
    }
    worst
}
