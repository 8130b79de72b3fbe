//! Small dense helpers shared by the VAR, DGP and bootstrap code.

use nalgebra::DMatrix;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Deterministic generator used throughout simulation and resampling.
pub type SimRng = ChaCha8Rng;

/// Independent generator for `(seed, index)`: the ChaCha stream id carries the
/// index, so draws do not depend on how work is scheduled.
pub fn substream(seed: u64, index: u64) -> SimRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Counter-hash of `(seed, index)` into a fresh 64-bit seed.
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    substream(seed, index).next_u64()
}

/// Companion matrix of `w_t = Σ A_ℓ w_{t-ℓ}`; `lags` must be non-empty.
pub fn companion(lags: &[DMatrix<f64>]) -> DMatrix<f64> {
    let n = lags[0].nrows();
    let p = lags.len();
    let mut c = DMatrix::zeros(n * p, n * p);
    for (l, a) in lags.iter().enumerate() {
        c.view_mut((0, l * n), (n, n)).copy_from(a);
    }
    for i in n..n * p {
        c[(i, i - n)] = 1.0;
    }
    c
}

pub fn spectral_radius(m: &DMatrix<f64>) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.complex_eigenvalues()
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max)
}

/// Largest eigenvalue modulus of the companion form; zero for a lag-free model.
pub fn companion_radius(lags: &[DMatrix<f64>]) -> f64 {
    if lags.is_empty() {
        return 0.0;
    }
    spectral_radius(&companion(lags))
}

/// Solves `X = A X A' + Q` for stable `A` by the doubling iteration.
pub fn discrete_lyapunov(a: &DMatrix<f64>, q: &DMatrix<f64>) -> DMatrix<f64> {
    let mut x = q.clone();
    let mut ak = a.clone();
    for _ in 0..100 {
        let step = &ak * &x * ak.transpose();
        let done = step.amax() <= 1e-15 * x.amax().max(1e-300);
        x += step;
        if done {
            break;
        }
        ak = &ak * &ak;
    }
    (&x + x.transpose()) * 0.5
}

/// Symmetric matrix from its lower-triangular half stacked column by column.
pub fn unvech(v: &[f64], n: usize) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(n, n);
    let mut k = 0;
    for j in 0..n {
        for i in j..n {
            m[(i, j)] = v[k];
            m[(j, i)] = v[k];
            k += 1;
        }
    }
    m
}

pub fn vech(m: &DMatrix<f64>) -> Vec<f64> {
    let n = m.nrows();
    let mut out = Vec::with_capacity(n * (n + 1) / 2);
    for j in 0..n {
        for i in j..n {
            out.push(m[(i, j)]);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn substreams_are_reproducible_and_distinct() {
        let a: u64 = substream(7, 3).random();
        let b: u64 = substream(7, 3).random();
        let c: u64 = substream(7, 4).random();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn lyapunov_scalar_ar1() {
        let a = DMatrix::from_element(1, 1, 0.9);
        let q = DMatrix::from_element(1, 1, 1.0);
        let x = discrete_lyapunov(&a, &q);
        assert!((x[(0, 0)] - 1.0 / (1.0 - 0.81)).abs() < 1e-10);
    }

    #[test]
    fn companion_radius_of_ar2() {
        // roots of z² - 0.5 z - 0.3: moduli 0.8521 and 0.3521
        let lags = vec![DMatrix::from_element(1, 1, 0.5), DMatrix::from_element(1, 1, 0.3)];
        let r = companion_radius(&lags);
        let expected = (0.5 + (0.25f64 + 1.2).sqrt()) / 2.0;
        assert!((r - expected).abs() < 1e-10);
    }

    #[test]
    fn vech_roundtrip() {
        let m = DMatrix::from_row_slice(2, 2, &[4.0, 2.0, 2.0, 5.0]);
        assert_eq!(vech(&m), vec![4.0, 2.0, 5.0]);
        assert_eq!(unvech(&vech(&m), 2), m);
    }
}
