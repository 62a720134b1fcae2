//! Householder QR, triangular solves and Givens updates of triangular factors.

use alloc::vec::Vec;

use super::matrix::{norm2, Matrix, Vector, C64, ONE, ZERO};
use crate::error::{Error, Result};

const BREAKDOWN: f64 = 1e-12;

/// Thin QR `A = Q R` of a matrix with at least as many rows as columns.
///
/// `Q` is `m x n` with orthonormal columns and `R` is `n x n` upper triangular.
pub fn thin_qr(a: &Matrix) -> Result<(Matrix, Matrix)> {
    let (m, n) = a.shape();
    if m < n {
        return Err(Error::invalid(alloc::format!(
            "thin QR needs rows >= cols, got {m}x{n}"
        )));
    }
    let mut w = a.clone();
    let mut reflectors: Vec<Option<Vec<C64>>> = Vec::with_capacity(n);
    for k in 0..n {
        let x: Vec<C64> = (k..m).map(|i| w[(i, k)]).collect();
        let nx = norm2(&x);
        if nx == 0.0 {
            reflectors.push(None);
            continue;
        }
        let phase = if x[0].norm() > 0.0 { x[0] / x[0].norm() } else { ONE };
        let alpha = -phase * nx;
        let mut v = x;
        v[0] -= alpha;
        let nv = norm2(&v);
        if nv == 0.0 {
            reflectors.push(None);
            continue;
        }
        for e in v.iter_mut() {
            *e /= nv;
        }
        apply_reflector(&mut w, &v, k, k);
        for i in (k + 1)..m {
            w[(i, k)] = ZERO;
        }
        w[(k, k)] = alpha;
        reflectors.push(Some(v));
    }
    let r = Matrix::from_fn(n, n, |i, j| if j >= i { w[(i, j)] } else { ZERO });
    let mut q = Matrix::from_fn(m, n, |i, j| if i == j { ONE } else { ZERO });
    for (k, v) in reflectors.iter().enumerate().rev() {
        if let Some(v) = v {
            apply_reflector(&mut q, v, k, 0);
        }
    }
    Ok((q, r))
}

/// `X[r0.., c0..] <- (I - 2 v v^H) X[r0.., c0..]` for a unit vector `v`.
fn apply_reflector(x: &mut Matrix, v: &[C64], r0: usize, c0: usize) {
    for j in c0..x.cols() {
        let mut s = ZERO;
        for (l, vl) in v.iter().enumerate() {
            s += vl.conj() * x[(r0 + l, j)];
        }
        if s == ZERO {
            continue;
        }
        let s = s * 2.0;
        for (l, vl) in v.iter().enumerate() {
            x[(r0 + l, j)] -= vl * s;
        }
    }
}

fn breakdown_threshold(t: &Matrix) -> f64 {
    let mut big: f64 = 0.0;
    for i in 0..t.rows().min(t.cols()) {
        big = big.max(t[(i, i)].norm());
    }
    BREAKDOWN * big
}

fn check_diag(t: &Matrix, i: usize, threshold: f64) -> Result<C64> {
    let d = t[(i, i)];
    if d.norm() <= threshold {
        return Err(Error::IllConditionedTriangular {
            index: i,
            value: d.norm(),
            threshold,
        });
    }
    Ok(d)
}

/// Back substitution for a square upper triangular system.
pub fn solve_upper(r: &Matrix, b: &[C64]) -> Result<Vector> {
    let n = r.rows();
    if r.cols() != n {
        return Err(Error::dims(n, r.cols()));
    }
    if b.len() != n {
        return Err(Error::dims(n, b.len()));
    }
    let threshold = breakdown_threshold(r);
    let mut y = Vector::zeros(n);
    for i in (0..n).rev() {
        let mut s = b[i];
        for j in (i + 1)..n {
            s -= r[(i, j)] * y[j];
        }
        y[i] = s / check_diag(r, i, threshold)?;
    }
    Ok(y)
}

/// Forward substitution for a square lower triangular system.
pub fn solve_lower(l: &Matrix, b: &[C64]) -> Result<Vector> {
    let n = l.rows();
    if l.cols() != n {
        return Err(Error::dims(n, l.cols()));
    }
    if b.len() != n {
        return Err(Error::dims(n, b.len()));
    }
    let threshold = breakdown_threshold(l);
    let mut y = Vector::zeros(n);
    for i in 0..n {
        let mut s = b[i];
        for j in 0..i {
            s -= l[(i, j)] * y[j];
        }
        y[i] = s / check_diag(l, i, threshold)?;
    }
    Ok(y)
}

/// Least-squares solution of a full column rank system via Householder QR.
pub fn least_squares(a: &Matrix, b: &[C64]) -> Result<Vector> {
    if b.len() != a.rows() {
        return Err(Error::dims(a.rows(), b.len()));
    }
    let (q, r) = thin_qr(a)?;
    solve_upper(&r, &q.adjoint_mul_vec(b))
}

/// Rotation `(c, s)` with `[c s; -conj(s) c] (a, b) = (rho, 0)`.
pub fn givens(a: C64, b: C64) -> (f64, C64) {
    let na = a.norm();
    let nb = b.norm();
    if nb == 0.0 {
        return (1.0, ZERO);
    }
    if na == 0.0 {
        return (0.0, b.conj() / nb);
    }
    let r = libm::hypot(na, nb);
    (na / r, (a / na) * b.conj() / r)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Triangle {
    Upper,
    Lower,
}

/// A square triangular factor together with its right-hand side.
///
/// Prepending a row keeps the factor triangular through Givens rotations, so
/// the stack always represents the least-squares problem of all rows seen.
#[derive(Clone, Debug)]
pub struct TriangularStack {
    kind: Triangle,
    t: Matrix,
    rhs: Vector,
}

impl TriangularStack {
    pub fn new(kind: Triangle, t: Matrix, rhs: Vector) -> Result<Self> {
        if t.rows() != t.cols() {
            return Err(Error::dims(t.rows(), t.cols()));
        }
        if rhs.dim() != t.rows() {
            return Err(Error::dims(t.rows(), rhs.dim()));
        }
        Ok(TriangularStack { kind, t, rhs })
    }

    pub fn dim(&self) -> usize {
        self.t.rows()
    }

    pub fn factor(&self) -> &Matrix {
        &self.t
    }

    pub fn rhs(&self) -> &Vector {
        &self.rhs
    }

    pub fn kind(&self) -> Triangle {
        self.kind
    }

    /// Folds the row `w` with right-hand side `beta` into the factor; returns
    /// the part of the right-hand side that leaves the least-squares system.
    pub fn prepend(&mut self, w: &[C64], beta: C64) -> C64 {
        let n = self.dim();
        let mut w = w.to_vec();
        let mut beta = beta;
        let order: Vec<usize> = match self.kind {
            Triangle::Upper => (0..n).collect(),
            Triangle::Lower => (0..n).rev().collect(),
        };
        for i in order {
            if w[i] == ZERO {
                continue;
            }
            let (c, s) = givens(self.t[(i, i)], w[i]);
            let cols = match self.kind {
                Triangle::Upper => i..n,
                Triangle::Lower => 0..i + 1,
            };
            for j in cols {
                let p = self.t[(i, j)];
                let o = w[j];
                self.t[(i, j)] = p * c + s * o;
                w[j] = -s.conj() * p + o * c;
            }
            w[i] = ZERO;
            let p = self.rhs[i];
            self.rhs[i] = p * c + s * beta;
            beta = -s.conj() * p + beta * c;
        }
        beta
    }

    pub fn solve(&self) -> Result<Vector> {
        self.solve_with(&self.rhs)
    }

    pub fn solve_with(&self, b: &[C64]) -> Result<Vector> {
        match self.kind {
            Triangle::Upper => solve_upper(&self.t, b),
            Triangle::Lower => solve_lower(&self.t, b),
        }
    }

    /// Substitution that lifts tiny pivots to the breakdown floor instead of
    /// failing; only the direction of the result is meaningful.
    pub(crate) fn solve_floored(&self, b: &[C64], adjoint: bool) -> Vector {
        let n = self.dim();
        let floor = breakdown_threshold(&self.t).max(f64::MIN_POSITIVE);
        let upper = (self.kind == Triangle::Upper) != adjoint;
        let entry = |i: usize, j: usize| {
            if adjoint {
                self.t[(j, i)].conj()
            } else {
                self.t[(i, j)]
            }
        };
        let mut y = Vector::zeros(n);
        let order: Vec<usize> = if upper { (0..n).rev().collect() } else { (0..n).collect() };
        for i in order {
            let mut s = b[i];
            let range = if upper { (i + 1)..n } else { 0..i };
            for j in range {
                s -= entry(i, j) * y[j];
            }
            let mut d = entry(i, i);
            if d.norm() < floor {
                d = if d.norm() > 0.0 { d / d.norm() * floor } else { C64::new(floor, 0.0) };
            }
            y[i] = s / d;
        }
        y
    }

    /// Solves with the adjoint factor.
    pub fn solve_adjoint(&self, b: &[C64]) -> Result<Vector> {
        let th = self.t.adjoint();
        match self.kind {
            Triangle::Upper => solve_lower(&th, b),
            Triangle::Lower => solve_upper(&th, b),
        }
    }
}
