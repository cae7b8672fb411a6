use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::sparse::CsrMatrix;
use crate::error::{Error, Result};

/// Settings for the block power iteration behind [`spectral_radius`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerIteration {
    /// Width of the iterated block. Complex-conjugate pairs and near-ties at
    /// the top of the spectrum need at least two columns.
    pub block: usize,
    /// Relative change of the estimate below which an iteration counts as settled.
    pub tol: f64,
    /// Consecutive settled iterations required to stop.
    pub patience: usize,
    pub max_iter: usize,
}

impl Default for PowerIteration {
    fn default() -> Self {
        Self { block: 8, tol: 1e-11, patience: 5, max_iter: 50_000 }
    }
}

/// Largest eigenvalue modulus of `m`.
///
/// Power iteration on an orthonormal block with a Rayleigh–Ritz projection
/// each sweep; the estimate is the largest modulus among the projected
/// eigenvalues, so complex dominant pairs converge like real ones.
pub fn spectral_radius(m: &CsrMatrix, seed: u64, opts: &PowerIteration) -> Result<f64> {
    let n = m.size();
    if n == 0 {
        return Ok(0.0);
    }
    let b = opts.block.clamp(1, n);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let start = DMatrix::from_fn(n, b, |_, _| rng.random_range(-1.0..1.0));
    let mut basis = start.qr().q();
    let mut image = DMatrix::<f64>::zeros(n, b);

    let mut previous = f64::NAN;
    let mut settled = 0;
    for _ in 0..opts.max_iter {
        for j in 0..b {
            let x = basis.column(j);
            let mut y = image.column_mut(j);
            m.mul_vec_into(x.as_slice(), y.as_mut_slice());
        }
        if image.amax() == 0.0 {
            return Ok(0.0);
        }
        let projected = basis.transpose() * &image;
        let estimate = projected.complex_eigenvalues().iter().fold(0.0f64, |acc, z| acc.max(libm::hypot(z.re, z.im)));
        if (estimate - previous).abs() <= opts.tol * estimate {
            settled += 1;
            if settled >= opts.patience {
                return Ok(estimate);
            }
        } else {
            settled = 0;
        }
        previous = estimate;
        basis = image.clone().qr().q();
    }
    Err(Error::NoConvergence { iterations: opts.max_iter })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dense_radius(m: &CsrMatrix) -> f64 {
        m.to_dense().complex_eigenvalues().iter().fold(0.0f64, |a, z| a.max(libm::hypot(z.re, z.im)))
    }

    fn random_sparse(n: usize, density: f64, seed: u64) -> CsrMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut trip = alloc::vec::Vec::new();
        for r in 0..n {
            for c in 0..n {
                if rng.random::<f64>() < density {
                    trip.push((r, c, rng.random_range(-1.0..1.0)));
                }
            }
        }
        CsrMatrix::from_sorted_triplets(n, trip)
    }

    #[test]
    fn rotation_has_unit_radius() {
        // Pure rotation: eigenvalues ±i, plain power iteration never settles.
        let m = CsrMatrix::from_sorted_triplets(2, [(0, 1, -1.0), (1, 0, 1.0)]);
        let r = spectral_radius(&m, 1, &PowerIteration { block: 2, ..Default::default() }).unwrap();
        assert!((r - 1.0).abs() < 1e-12);
    }

    #[test]
    fn agrees_with_dense_eigenvalues() {
        for (n, seed) in [(50, 1), (100, 2), (200, 3)] {
            let m = random_sparse(n, 0.1, seed);
            let r = spectral_radius(&m, 7, &PowerIteration::default()).unwrap();
            let exact = dense_radius(&m);
            assert!((r - exact).abs() <= 1e-7 * exact, "n={n}: {r} vs {exact}");
        }
    }

    #[test]
    fn zero_matrix() {
        assert_eq!(spectral_radius(&CsrMatrix::zeros(5), 0, &PowerIteration::default()).unwrap(), 0.0);
    }

    #[test]
    fn iteration_cap_is_reported() {
        let m = random_sparse(60, 0.2, 4);
        let opts = PowerIteration { max_iter: 3, ..Default::default() };
        assert_eq!(spectral_radius(&m, 0, &opts), Err(Error::NoConvergence { iterations: 3 }));
    }
}
