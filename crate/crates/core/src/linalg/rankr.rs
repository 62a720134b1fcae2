//! Solvers for `z = A_rank-r^+ b`, the minimum-norm least-squares solution of
//! the rank-r projection of `A`.

use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::matrix::{Matrix, Vector, C64, ZERO};
use super::qr::{least_squares, solve_lower, thin_qr, Triangle, TriangularStack};
use super::svd::{full_svd, GapReport};
use crate::error::{Error, Result};

/// Controls the inner Gauss-Newton iteration that extracts kernel vectors.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KernelOptions {
    /// Bound on the step `||y_{j+1} - y_j||` of the unit-vector iterate.
    pub inner_tol: f64,
    pub max_inner: usize,
    /// Number of random starts tried per kernel vector.
    pub retries: usize,
}

impl Default for KernelOptions {
    fn default() -> Self {
        KernelOptions {
            inner_tol: 1e-12,
            max_inner: 30,
            retries: 3,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RankrOptions {
    /// Below this gap ratio the rank is rejected as ambiguous.
    pub min_gap: f64,
    /// Below this gap ratio a warning is logged.
    pub warn_gap: f64,
    pub kernel: KernelOptions,
    pub seed: u64,
}

impl Default for RankrOptions {
    fn default() -> Self {
        RankrOptions {
            min_gap: 2.0,
            warn_gap: 10.0,
            kernel: KernelOptions::default(),
            seed: 0,
        }
    }
}

/// Which kernel computes the rank-r pseudoinverse product.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum SolverChoice {
    /// Truncated SVD everywhere.
    #[default]
    Svd,
    /// QR-based solvers picked by shape, SVD never used.
    Auto,
}

fn check_rank(a: &Matrix, r: usize) -> Result<()> {
    let k = a.rows().min(a.cols());
    if r > k {
        return Err(Error::InvalidRank {
            rank: r,
            constraint: alloc::format!("r <= min(rows, cols) = {k}"),
        });
    }
    Ok(())
}

fn check_rhs(a: &Matrix, b: &[C64]) -> Result<()> {
    if b.len() != a.rows() {
        return Err(Error::dims(a.rows(), b.len()));
    }
    Ok(())
}

/// `z = sum_{j<=r} (u_j^H b / sigma_j) v_j`.
pub fn rankr_pinv_apply_svd(a: &Matrix, r: usize, b: &[C64]) -> Result<Vector> {
    check_rank(a, r)?;
    check_rhs(a, b)?;
    let svd = full_svd(a)?;
    let floor = f64::EPSILON * svd.sigma_max() * a.rows().max(a.cols()) as f64;
    let mut z = Vector::zeros(a.cols());
    for j in 0..r {
        let s = svd.sigma[j];
        if s == 0.0 || s <= floor {
            return Err(Error::RankDeficientProjection { rank: r, sigma: s });
        }
        let coef = svd.u.col(j).dot(&Vector::from_vec(b.to_vec())) / s;
        for i in 0..a.cols() {
            z[i] += coef * svd.v[(i, j)];
        }
    }
    Ok(z)
}

/// Minimum-norm solution of a full row rank system through a QR of `A^H`.
pub fn minnorm_solve_full_row(a: &Matrix, b: &[C64]) -> Result<Vector> {
    check_rhs(a, b)?;
    if a.rows() > a.cols() {
        return Err(Error::invalid(alloc::format!(
            "full row rank solve needs rows <= cols, got {}x{}",
            a.rows(),
            a.cols()
        )));
    }
    let (q, r) = thin_qr(&a.adjoint())?;
    let y = solve_lower(&r.adjoint(), b)?;
    Ok(q.mul_vec(&y))
}

/// Unit vector `u` approximating the direction least amplified by `G`.
///
/// `G` may be square triangular or tall; a tall matrix is reduced by QR first.
pub fn kernel_refine(g: &Matrix, y0: &[C64], tau: f64, opts: &KernelOptions) -> Result<Vector> {
    if y0.len() != g.cols() {
        return Err(Error::dims(g.cols(), y0.len()));
    }
    let stack = triangular_view(g)?;
    refine_on_stack(&stack, y0, tau, opts)
}

fn is_triangular(g: &Matrix, kind: Triangle) -> bool {
    let n = g.rows();
    (0..n).all(|i| {
        (0..n).all(|j| {
            let structural = match kind {
                Triangle::Upper => j < i,
                Triangle::Lower => j > i,
            };
            !structural || g[(i, j)] == ZERO
        })
    })
}

fn triangular_view(g: &Matrix) -> Result<TriangularStack> {
    let n = g.cols();
    if g.rows() == n {
        for kind in [Triangle::Upper, Triangle::Lower] {
            if is_triangular(g, kind) {
                return TriangularStack::new(kind, g.clone(), Vector::zeros(n));
            }
        }
    }
    if g.rows() < n {
        return Err(Error::invalid("kernel refinement needs rows >= cols"));
    }
    let (_, r) = thin_qr(g)?;
    TriangularStack::new(Triangle::Upper, r, Vector::zeros(n))
}

/// Gauss-Newton on `y -> (tau (y^H y - 1), G y)`.
fn refine_on_stack(
    stack: &TriangularStack,
    y0: &[C64],
    tau: f64,
    opts: &KernelOptions,
) -> Result<Vector> {
    if !(tau > 0.0) {
        return Err(Error::invalid("tau must be positive"));
    }
    let g = stack.factor();
    let mut y = Vector::from_vec(y0.to_vec());
    let mut prev = f64::INFINITY;
    let mut shift = f64::INFINITY;
    for step in 0..opts.max_inner {
        let w: Vec<C64> = y.iter().map(|c| c.conj() * (2.0 * tau)).collect();
        let beta = C64::new(tau * (y.norm() * y.norm() - 1.0), 0.0);
        let gy = g.mul_vec(&y);
        let mut local = TriangularStack::new(stack.kind(), g.clone(), gy)?;
        local.prepend(&w, beta);
        let delta = local.solve_floored(local.rhs(), false);
        y = &y - &delta;
        shift = delta.norm();
        if !shift.is_finite() {
            break;
        }
        let ny = y.norm();
        let u = y.scaled(C64::new(1.0 / ny, 0.0));
        // Components outside the small singular subspace contract by at least
        // 1/gap^2 per step; slower progress is drift inside that subspace.
        let stagnated = step >= 3 && shift >= 0.25 * prev;
        let flat = g.mul_vec(&u).norm() <= opts.inner_tol * tau;
        if shift <= opts.inner_tol || stagnated || flat {
            return Ok(u);
        }
        prev = shift;
    }
    Err(Error::InnerIterationFailure {
        iterations: opts.max_inner,
        shift,
    })
}

fn random_unit(rng: &mut ChaCha8Rng, n: usize, real: bool) -> Vector {
    loop {
        let v: Vector = (0..n)
            .map(|_| {
                let re = rng.gen_range(-1.0..1.0);
                let im = if real { 0.0 } else { rng.gen_range(-1.0..1.0) };
                C64::new(re, im)
            })
            .collect();
        let nv = v.norm();
        if nv > 1e-3 {
            return v.scaled(C64::new(1.0 / nv, 0.0));
        }
    }
}

/// Orthonormal basis of the span of the given vectors, Gram-Schmidt applied twice.
pub(crate) fn orthonormalize(vs: &[Vector]) -> Result<Vec<Vector>> {
    let mut out: Vec<Vector> = Vec::with_capacity(vs.len());
    for v in vs {
        let mut x = v.clone();
        for _ in 0..2 {
            for q in &out {
                let p = q.dot(&x);
                x.axpy(-p, q);
            }
        }
        let nx = x.norm();
        if !(nx > 1e-8 * v.norm().max(f64::MIN_POSITIVE)) {
            return Err(Error::NumericBreakdown(
                "kernel vectors are linearly dependent".into(),
            ));
        }
        out.push(x.scaled(C64::new(1.0 / nx, 0.0)));
    }
    Ok(out)
}

fn project_out(basis: &[Vector], y: &Vector) -> Vector {
    let mut z = y.clone();
    for q in basis {
        let p = q.dot(&z);
        z.axpy(-p, q);
    }
    z
}

/// Smallest singular value of a nonsingular triangular factor by inverse iteration.
fn smallest_singular_estimate(stack: &TriangularStack, rng: &mut ChaCha8Rng) -> f64 {
    let n = stack.dim();
    if n == 0 {
        return f64::INFINITY;
    }
    let mut x = random_unit(rng, n, false);
    for _ in 0..8 {
        let w = stack.solve_floored(&x, true);
        let v = stack.solve_floored(&w, false);
        let nv = v.norm();
        if !(nv > 0.0) || !nv.is_finite() {
            break;
        }
        x = v.scaled(C64::new(1.0 / nv, 0.0));
    }
    stack.factor().mul_vec(&x).norm()
}

/// Appends `count` rows `2 tau u_k^H` to the stack, each `u_k` a kernel vector
/// of the current factor; returns the kernel vectors.
fn kernel_chain(
    stack: &mut TriangularStack,
    count: usize,
    r: usize,
    tau: f64,
    opts: &RankrOptions,
) -> Result<Vec<Vector>> {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let original = stack.factor().clone();
    let real = original.as_slice().iter().all(|c| c.im == 0.0);
    let n = stack.dim();
    let mut kernel = Vec::with_capacity(count);
    let mut sigma_next: f64 = 0.0;
    for _ in 0..count {
        let mut found = None;
        let mut last_err = None;
        for _ in 0..opts.kernel.retries.max(1) {
            let y0 = random_unit(&mut rng, n, real);
            match refine_on_stack(stack, &y0, tau, &opts.kernel) {
                Ok(u) => {
                    found = Some(u);
                    break;
                }
                Err(e) => last_err = Some(e),
            }
        }
        let u = match found {
            Some(u) => u,
            None => return Err(last_err.expect("at least one attempt")),
        };
        sigma_next = sigma_next.max(original.mul_vec(&u).norm());
        let w: Vec<C64> = u.iter().map(|c| c.conj() * (2.0 * tau)).collect();
        stack.prepend(&w, ZERO);
        kernel.push(u);
    }
    if count > 0 {
        let sigma_r = smallest_singular_estimate(stack, &mut rng);
        let gap = GapReport::new(sigma_r, sigma_next);
        if gap.gap_ratio < opts.min_gap {
            return Err(Error::AmbiguousRank {
                rank: r,
                gap: gap.gap_ratio,
                min_gap: opts.min_gap,
            });
        }
        if gap.gap_ratio < opts.warn_gap {
            log::warn!(
                "weak singular value gap {:.3e} at rank {r} (sigma_r ~ {:.3e}, sigma_r+1 ~ {:.3e})",
                gap.gap_ratio,
                gap.sigma_r,
                gap.sigma_r_plus_1
            );
        }
    }
    Ok(kernel)
}

fn tau_of(a: &Matrix, r: usize) -> Result<f64> {
    let tau = a.norm_inf();
    if !(tau > 0.0) {
        return Err(Error::RankDeficientProjection { rank: r, sigma: 0.0 });
    }
    Ok(tau)
}

fn positive_rank(r: usize) -> Result<()> {
    if r == 0 {
        return Err(Error::InvalidRank {
            rank: 0,
            constraint: "r >= 1".into(),
        });
    }
    Ok(())
}

/// Rank-r solve for `r <= m <= n` through a QR of `A^H` and a lower triangular chain.
pub fn rankr_solve_wide(a: &Matrix, r: usize, b: &[C64], opts: &RankrOptions) -> Result<Vector> {
    check_rank(a, r)?;
    positive_rank(r)?;
    check_rhs(a, b)?;
    let (m, n) = a.shape();
    if m > n {
        return Err(Error::invalid("wide solver needs rows <= cols"));
    }
    let tau = tau_of(a, r)?;
    let (q0, r0) = thin_qr(&a.adjoint())?;
    let mut stack = TriangularStack::new(Triangle::Lower, r0.adjoint(), Vector::from_vec(b.to_vec()))?;
    let kernel = kernel_chain(&mut stack, m - r, r, tau, opts)?;
    let y = stack.solve()?;
    let basis = orthonormalize(&kernel)?;
    Ok(q0.mul_vec(&project_out(&basis, &y)))
}

/// Rank-r solve for `r <= n <= m` through a QR of `A` and an upper triangular chain.
pub fn rankr_solve_tall(a: &Matrix, r: usize, b: &[C64], opts: &RankrOptions) -> Result<Vector> {
    check_rank(a, r)?;
    positive_rank(r)?;
    check_rhs(a, b)?;
    let (m, n) = a.shape();
    if m < n {
        return Err(Error::invalid("tall solver needs rows >= cols"));
    }
    let tau = tau_of(a, r)?;
    let (q0, r0) = thin_qr(a)?;
    let mut stack = TriangularStack::new(Triangle::Upper, r0, q0.adjoint_mul_vec(b))?;
    let kernel = kernel_chain(&mut stack, n - r, r, tau, opts)?;
    let y = stack.solve()?;
    let basis = orthonormalize(&kernel)?;
    Ok(project_out(&basis, &y))
}

/// `(I - N N^H) [mu N^H; A]^+ (0, b)` for an orthonormal basis `N` of the
/// trailing right singular subspace.
pub fn augmented_minnorm_solve(a: &Matrix, nb: &Matrix, mu: f64, b: &[C64]) -> Result<Vector> {
    check_rhs(a, b)?;
    if nb.rows() != a.cols() {
        return Err(Error::dims(a.cols(), nb.rows()));
    }
    if !(mu > 0.0) {
        return Err(Error::invalid("mu must be positive"));
    }
    let gram = &nb.adjoint() * nb;
    let d = nb.cols();
    let mut deviation: f64 = 0.0;
    for i in 0..d {
        for j in 0..d {
            let target = if i == j { 1.0 } else { 0.0 };
            deviation = deviation.max((gram[(i, j)] - target).norm());
        }
    }
    if deviation > 1e-10 {
        return Err(Error::InvalidBasis { deviation });
    }
    let stacked = nb.adjoint().scaled(C64::new(mu, 0.0)).vstack(a);
    let mut rhs = alloc::vec![ZERO; d];
    rhs.extend_from_slice(b);
    let y = least_squares(&stacked, &rhs)?;
    let cols: Vec<Vector> = (0..d).map(|j| nb.col(j)).collect();
    Ok(project_out(&cols, &y))
}

/// `A_rank-r^+ b` by the solver selected in `choice`.
pub fn rankr_solve(
    a: &Matrix,
    r: usize,
    b: &[C64],
    choice: SolverChoice,
    opts: &RankrOptions,
) -> Result<Vector> {
    match choice {
        SolverChoice::Svd => rankr_pinv_apply_svd(a, r, b),
        SolverChoice::Auto => {
            let (m, n) = a.shape();
            if r == 0 {
                check_rhs(a, b)?;
                return Ok(Vector::zeros(n));
            }
            if m < n && r == m {
                check_rhs(a, b)?;
                minnorm_solve_full_row(a, b)
            } else if m < n {
                rankr_solve_wide(a, r, b, opts)
            } else {
                rankr_solve_tall(a, r, b, opts)
            }
        }
    }
}
