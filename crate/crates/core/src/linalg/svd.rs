//! One-sided (Hestenes) Jacobi SVD and the rank-r quantities derived from it.

use alloc::vec::Vec;

use super::matrix::{norm2, Matrix, Vector, C64, ONE, ZERO};
use crate::error::{Error, Result};

const MAX_SWEEPS: usize = 80;

/// Full singular value decomposition `A = U diag(sigma) V^H`.
///
/// `u` is `m x m`, `v` is `n x n` and `sigma` holds the `min(m, n)` singular
/// values in nonincreasing order.
#[derive(Clone, Debug)]
pub struct Svd {
    pub u: Matrix,
    pub sigma: Vec<f64>,
    pub v: Matrix,
}

impl Svd {
    /// `sum_j sigma_j u_j v_j^H` over the leading `r` triplets.
    pub fn reconstruct(&self, r: usize) -> Matrix {
        let (m, n) = (self.u.rows(), self.v.rows());
        let mut out = Matrix::zeros(m, n);
        for l in 0..r.min(self.sigma.len()) {
            let s = self.sigma[l];
            for i in 0..m {
                let a = self.u[(i, l)] * s;
                for j in 0..n {
                    out[(i, j)] += a * self.v[(j, l)].conj();
                }
            }
        }
        out
    }

    pub fn sigma_max(&self) -> f64 {
        self.sigma.first().copied().unwrap_or(0.0)
    }

    /// `sigma_r` with the convention `sigma_0 = inf` and `sigma_j = 0` past the end.
    pub fn sigma_at(&self, r: usize) -> f64 {
        if r == 0 {
            f64::INFINITY
        } else {
            self.sigma.get(r - 1).copied().unwrap_or(0.0)
        }
    }

    pub fn gap_report(&self, r: usize) -> GapReport {
        GapReport::new(self.sigma_at(r), self.sigma_at(r + 1))
    }

    pub fn truncate(&self, r: usize) -> TruncatedSvd {
        TruncatedSvd {
            sigma: self.sigma[..r].to_vec(),
            u: self.u.columns(0, r),
            v: self.v.columns(0, r),
        }
    }
}

/// Leading `r` singular triplets of a matrix.
#[derive(Clone, Debug)]
pub struct TruncatedSvd {
    pub sigma: Vec<f64>,
    pub u: Matrix,
    pub v: Matrix,
}

impl TruncatedSvd {
    pub fn rank(&self) -> usize {
        self.sigma.len()
    }

    /// The rank-r projection `A_rank-r`.
    pub fn reconstruct(&self) -> Matrix {
        let (m, n) = (self.u.rows(), self.v.rows());
        let mut out = Matrix::zeros(m, n);
        for (l, &s) in self.sigma.iter().enumerate() {
            for i in 0..m {
                let a = self.u[(i, l)] * s;
                for j in 0..n {
                    out[(i, j)] += a * self.v[(j, l)].conj();
                }
            }
        }
        out
    }

    /// Explicit `A_rank-r^+ = V_r diag(1/sigma) U_r^H`.
    pub fn pinv(&self) -> Matrix {
        let (m, n) = (self.u.rows(), self.v.rows());
        let mut out = Matrix::zeros(n, m);
        for (l, &s) in self.sigma.iter().enumerate() {
            if s == 0.0 {
                continue;
            }
            for i in 0..n {
                let a = self.v[(i, l)] / s;
                for j in 0..m {
                    out[(i, j)] += a * self.u[(j, l)].conj();
                }
            }
        }
        out
    }
}

/// Separation between the kept and the discarded singular values.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GapReport {
    pub sigma_r: f64,
    /// Zero when `r = min(m, n)`.
    pub sigma_r_plus_1: f64,
    /// `sigma_r / sigma_{r+1}`, infinite when `sigma_{r+1} = 0`.
    pub gap_ratio: f64,
}

impl GapReport {
    pub fn new(sigma_r: f64, sigma_r_plus_1: f64) -> Self {
        let gap_ratio = if sigma_r_plus_1 > 0.0 {
            sigma_r / sigma_r_plus_1
        } else {
            f64::INFINITY
        };
        GapReport {
            sigma_r,
            sigma_r_plus_1,
            gap_ratio,
        }
    }
}

/// Singular value decomposition of an arbitrary finite matrix.
pub fn full_svd(a: &Matrix) -> Result<Svd> {
    if !a.is_finite() {
        return Err(Error::invalid("matrix has non-finite entries"));
    }
    let (m, n) = a.shape();
    if m >= n {
        tall_svd(a)
    } else {
        // A^H = U' S V'^H  =>  A = V' S U'^H
        let t = tall_svd(&a.adjoint())?;
        Ok(Svd {
            u: t.v,
            sigma: t.sigma,
            v: t.u,
        })
    }
}

fn tall_svd(a: &Matrix) -> Result<Svd> {
    let (m, n) = a.shape();
    let mut w = a.clone();
    let mut v = Matrix::identity(n);
    let tol = f64::EPSILON * libm::sqrt(m.max(1) as f64);
    // columns below this are rounding noise and are never made orthogonal
    let negligible = f64::EPSILON * a.norm_fro();
    let negligible_sq = negligible * negligible;

    let mut converged = n < 2;
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in (p + 1)..n {
                let mut alpha = 0.0;
                let mut beta = 0.0;
                let mut gamma = ZERO;
                for i in 0..m {
                    let wp = w[(i, p)];
                    let wq = w[(i, q)];
                    alpha += wp.norm_sqr();
                    beta += wq.norm_sqr();
                    gamma += wp.conj() * wq;
                }
                let g = gamma.norm();
                if g == 0.0
                    || g <= tol * libm::sqrt(alpha) * libm::sqrt(beta)
                    || alpha.min(beta) <= negligible_sq
                {
                    continue;
                }
                rotated = true;
                let phase = gamma / g;
                let zeta = (beta - alpha) / (2.0 * g);
                let t = if zeta >= 0.0 { 1.0 } else { -1.0 } / (zeta.abs() + libm::hypot(1.0, zeta));
                let c = 1.0 / libm::hypot(1.0, t);
                let s = c * t;
                rotate(&mut w, p, q, c, s, phase);
                rotate(&mut v, p, q, c, s, phase);
            }
        }
        if !rotated {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::NumericBreakdown("Jacobi SVD did not converge".into()));
    }

    let mut sigma: Vec<f64> = (0..n).map(|j| norm2(&w.col(j))).collect();
    // selection sort keeps the column permutation simple
    for j in 0..n {
        let mut best = j;
        for l in (j + 1)..n {
            if sigma[l] > sigma[best] {
                best = l;
            }
        }
        if best != j {
            sigma.swap(j, best);
            w.swap_cols(j, best);
            v.swap_cols(j, best);
        }
    }

    let mut u_cols: Vec<Option<Vector>> = Vec::with_capacity(m);
    let floor = negligible.max(f64::MIN_POSITIVE * 1e8);
    for j in 0..n {
        if sigma[j] > floor {
            let inv = C64::new(1.0 / sigma[j], 0.0);
            u_cols.push(Some(w.col(j).scaled(inv)));
        } else {
            sigma[j] = if sigma[j] > 0.0 { sigma[j] } else { 0.0 };
            u_cols.push(None);
        }
    }
    u_cols.resize(m, None);
    let u = complete_orthonormal(m, u_cols);
    Ok(Svd { u, sigma, v })
}

/// `[.., col_p, .., col_q, ..] <- [.., c col_p - s e^{-i phi} col_q, .., s col_p + c e^{-i phi} col_q, ..]`
fn rotate(x: &mut Matrix, p: usize, q: usize, c: f64, s: f64, phase: C64) {
    let ph = phase.conj();
    for i in 0..x.rows() {
        let xp = x[(i, p)];
        let xq = x[(i, q)] * ph;
        x[(i, p)] = xp * c - xq * s;
        x[(i, q)] = xp * s + xq * c;
    }
}

/// Fills the missing columns with an orthonormal completion of the given ones.
pub(crate) fn complete_orthonormal(m: usize, cols: Vec<Option<Vector>>) -> Matrix {
    let mut basis: Vec<Vector> = cols.iter().flatten().cloned().collect();
    let mut out = Matrix::zeros(m, cols.len());
    let mut candidate = 0usize;
    for (j, c) in cols.into_iter().enumerate() {
        let col = match c {
            Some(c) => c,
            None => {
                // pick the standard basis vector with the largest residual
                let mut best: Option<(f64, Vector)> = None;
                for e in 0..m {
                    let idx = (candidate + e) % m;
                    let mut x = Vector::basis(m, idx);
                    for _ in 0..2 {
                        for b in &basis {
                            let proj = b.dot(&x);
                            x.axpy(-proj, b);
                        }
                    }
                    let nrm = x.norm();
                    if best.as_ref().is_none_or(|(bn, _)| nrm > *bn) {
                        best = Some((nrm, x));
                    }
                    if nrm > 0.7 {
                        break;
                    }
                }
                candidate += 1;
                let (nrm, x) = best.expect("m > 0");
                let x = x.scaled(C64::new(1.0 / nrm, 0.0));
                basis.push(x.clone());
                x
            }
        };
        out.set_col(j, &col);
    }
    out
}

/// Leading `r` singular triplets and the gap after them.
pub fn truncated_svd(a: &Matrix, r: usize) -> Result<(TruncatedSvd, GapReport)> {
    let k = a.rows().min(a.cols());
    if r == 0 || r > k {
        return Err(Error::InvalidRank {
            rank: r,
            constraint: alloc::format!("0 < r <= {k}"),
        });
    }
    let svd = full_svd(a)?;
    Ok((svd.truncate(r), svd.gap_report(r)))
}

/// Count of singular values strictly above the absolute tolerance `theta`.
pub fn numerical_rank(a: &Matrix, theta: f64) -> Result<(usize, GapReport)> {
    if !(theta >= 0.0) {
        return Err(Error::invalid("theta must be nonnegative"));
    }
    let svd = full_svd(a)?;
    let r = rank_from_sigma(&svd.sigma, theta);
    Ok((r, svd.gap_report(r)))
}

pub(crate) fn rank_from_sigma(sigma: &[f64], theta: f64) -> usize {
    sigma.iter().take_while(|&&s| s > theta).count()
}

/// Trailing `d` right singular vectors as an `n x d` orthonormal matrix.
pub fn nullspace_basis(a: &Matrix, d: usize) -> Result<Matrix> {
    let n = a.cols();
    if d > n {
        return Err(Error::invalid(alloc::format!(
            "nullspace dimension {d} exceeds column count {n}"
        )));
    }
    let svd = full_svd(a)?;
    Ok(svd.v.columns(n - d, n))
}

/// Spectral norm.
pub fn norm2_matrix(a: &Matrix) -> Result<f64> {
    Ok(full_svd(a)?.sigma_max())
}

#[allow(dead_code)]
pub(crate) fn unitary_deviation(q: &Matrix) -> f64 {
    let g = &q.adjoint() * q;
    let k = g.rows();
    let mut dev: f64 = 0.0;
    for i in 0..k {
        for j in 0..k {
            let target = if i == j { ONE } else { ZERO };
            dev = dev.max((g[(i, j)] - target).norm());
        }
    }
    dev
}
