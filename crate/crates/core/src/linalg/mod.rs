//! Dense complex linear algebra: SVD, QR, and the rank-r minimum-norm solvers.

mod matrix;
mod qr;
mod rankr;
mod svd;

pub use matrix::{Matrix, Vector, C64};
pub(crate) use matrix::norm2;
pub use qr::{givens, solve_lower, solve_upper, thin_qr, least_squares, Triangle, TriangularStack};
pub use rankr::{
    kernel_refine, augmented_minnorm_solve, minnorm_solve_full_row, rankr_pinv_apply_svd, rankr_solve,
    rankr_solve_tall, rankr_solve_wide, KernelOptions, RankrOptions, SolverChoice,
};
pub use svd::{
    full_svd, norm2_matrix, nullspace_basis, numerical_rank, truncated_svd, GapReport, Svd,
    TruncatedSvd,
};
pub(crate) use svd::rank_from_sigma;

#[cfg(test)]
pub(crate) mod testutil {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    pub fn random_matrix(m: usize, n: usize, seed: u64) -> Matrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Matrix::from_fn(m, n, |_, _| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
    }

    pub fn random_vector(n: usize, seed: u64) -> Vector {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9);
        (0..n).map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect()
    }

    /// `U diag(sigma) V^H` with random unitary factors from a QR of random matrices.
    pub fn random_with_spectrum(m: usize, n: usize, sigma: &[f64], seed: u64) -> Matrix {
        let k = m.min(n);
        let (u, _) = thin_qr(&random_matrix(m, k, seed)).unwrap();
        let (v, _) = thin_qr(&random_matrix(n, k, seed.wrapping_add(7919))).unwrap();
        let mut out = Matrix::zeros(m, n);
        for (l, &s) in sigma.iter().enumerate().take(k) {
            for i in 0..m {
                for j in 0..n {
                    out[(i, j)] += u[(i, l)] * s * v[(j, l)].conj();
                }
            }
        }
        out
    }
}
