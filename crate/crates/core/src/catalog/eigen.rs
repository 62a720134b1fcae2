use crate::error::{Error, Result};
use crate::linalg::{nullspace_basis, Matrix, Vector, C64};
use crate::newton::{NonlinearSystem, Shape, VariableLayout};

/// `(lambda, X) -> (A - lambda I) X - X S` for an eigenvalue of multiplicity
/// support `m x k`, with `S` the `k x k` nilpotent Jordan block. The refining
/// variant also treats the matrix as unknown: `(lambda, X, G) -> (G - lambda I) X - X S`.
#[derive(Clone, Debug)]
pub struct EigenInstance {
    a: Matrix,
    m: usize,
    k: usize,
    s: Matrix,
    vary_matrix: bool,
    layout: VariableLayout,
}

fn jordan_nilpotent(k: usize) -> Matrix {
    Matrix::from_fn(k, k, |i, j| if j == i + 1 { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) })
}

/// Column-major `vec` of a matrix.
pub fn vec_columns(a: &Matrix) -> Vector {
    (0..a.cols()).flat_map(|j| a.col(j).into_vec()).collect()
}

fn unvec(rows: usize, cols: usize, v: &[C64]) -> Matrix {
    Matrix::from_fn(rows, cols, |i, j| v[j * rows + i])
}

pub fn make_eigen(a: Matrix, m: usize, k: usize) -> Result<EigenInstance> {
    let n = a.rows();
    if a.cols() != n {
        return Err(Error::dims("square matrix", alloc::format!("{} x {}", n, a.cols())));
    }
    if m == 0 || k == 0 || m * k > n {
        return Err(Error::dims(alloc::format!("m * k <= {n}"), alloc::format!("{m} * {k}")));
    }
    let layout = VariableLayout::new()
        .with("lambda", Shape::Scalar)
        .with("X", Shape::Matrix(n, k));
    Ok(EigenInstance {
        a,
        m,
        k,
        s: jordan_nilpotent(k),
        vary_matrix: false,
        layout,
    })
}

impl EigenInstance {
    /// The variant whose unknowns also include the matrix, started from `A`.
    pub fn with_matrix_unknown(&self) -> EigenInstance {
        let n = self.n();
        EigenInstance {
            vary_matrix: true,
            layout: self.layout.clone().with("G", Shape::Matrix(n, n)),
            ..self.clone()
        }
    }

    pub fn n(&self) -> usize {
        self.a.rows()
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn a(&self) -> &Matrix {
        &self.a
    }

    pub fn s(&self) -> &Matrix {
        &self.s
    }

    pub fn varies_matrix(&self) -> bool {
        self.vary_matrix
    }

    pub fn layout(&self) -> &VariableLayout {
        &self.layout
    }

    /// `(n - m) k + 1` with `A` fixed, `n k` when the matrix varies.
    pub fn rank(&self) -> usize {
        if self.vary_matrix {
            self.n() * self.k
        } else {
            (self.n() - self.m) * self.k + 1
        }
    }

    /// `vec(X) -> vec((A - lambda I) X - X S)` as an `nk x nk` matrix.
    pub fn operator(&self, lambda: C64) -> Matrix {
        self.x_block(&self.a, lambda)
    }

    fn x_block(&self, g: &Matrix, lambda: C64) -> Matrix {
        let (n, k) = (self.n(), self.k);
        Matrix::from_fn(n * k, n * k, |row, col| {
            let (i, p) = (row % n, row / n);
            let (j, q) = (col % n, col / n);
            let mut v = C64::new(0.0, 0.0);
            if p == q {
                v += g[(i, j)];
                if i == j {
                    v -= lambda;
                }
            }
            if i == j {
                v -= self.s[(q, p)];
            }
            v
        })
    }

    /// `(lambda0, X0)` with `X0` the leading vector of the trailing `m k`
    /// right singular vectors of the operator at `lambda0`.
    pub fn initial_iterate(&self, lambda0: C64) -> Result<Vector> {
        let basis = nullspace_basis(&self.operator(lambda0), self.m * self.k)?;
        let mut x = Vector::from_vec(alloc::vec![lambda0]).concat(&basis.col(0));
        if self.vary_matrix {
            x = x.concat(&vec_columns(&self.a));
        }
        Ok(x)
    }

    fn parts<'a>(&self, x: &'a [C64]) -> (C64, &'a [C64], Option<Matrix>) {
        let nk = self.n() * self.k;
        let g = self.vary_matrix.then(|| unvec(self.n(), self.n(), &x[1 + nk..]));
        (x[0], &x[1..1 + nk], g)
    }

    fn x_matrix(&self, vx: &[C64]) -> Matrix {
        unvec(self.n(), self.k, vx)
    }

    /// Column-major `X`, unpacked from a full unknown vector.
    pub fn eigenvectors(&self, x: &[C64]) -> Matrix {
        self.x_matrix(&x[1..1 + self.n() * self.k])
    }

    /// The matrix part of a refining-variant unknown vector.
    pub fn matrix_part(&self, x: &[C64]) -> Option<Matrix> {
        self.parts(x).2
    }

    /// Block `(X^T kron I_n)`: `vec(dG) -> vec(dG X)`.
    fn kron_xt(&self, xm: &Matrix) -> Matrix {
        let (n, k) = (self.n(), self.k);
        Matrix::from_fn(n * k, n * n, |row, col| {
            let (i, p) = (row % n, row / n);
            let (a, b) = (col % n, col / n);
            if a == i {
                xm[(b, p)]
            } else {
                C64::new(0.0, 0.0)
            }
        })
    }
}

impl NonlinearSystem for EigenInstance {
    fn domain_dim(&self) -> usize {
        self.layout.total_dim()
    }

    fn codomain_dim(&self) -> usize {
        self.n() * self.k
    }

    fn eval(&self, x: &[C64]) -> Vector {
        let (lambda, vx, g) = self.parts(x);
        let g = g.as_ref().unwrap_or(&self.a);
        self.x_block(g, lambda).mul_vec(vx)
    }

    fn jacobian(&self, x: &[C64]) -> Matrix {
        let (lambda, vx, g) = self.parts(x);
        let nk = self.n() * self.k;
        let mut jac = Matrix::zeros(nk, self.domain_dim());
        let minus_x: Vector = vx.iter().map(|z| -z).collect();
        jac.set_col(0, &minus_x);
        jac.set_block(0, 1, &self.x_block(g.as_ref().unwrap_or(&self.a), lambda));
        if g.is_some() {
            jac.set_block(0, 1 + nk, &self.kron_xt(&self.x_matrix(vx)));
        }
        jac
    }

    fn hessian_action(&self, _x: &[C64], y: &[C64]) -> Matrix {
        let (mu, vy, h) = self.parts(y);
        let (n, nk) = (self.n(), self.n() * self.k);
        let mut out = Matrix::zeros(nk, self.domain_dim());
        let minus_y: Vector = vy.iter().map(|z| -z).collect();
        out.set_col(0, &minus_y);
        for i in 0..nk {
            out[(i, 1 + i)] -= mu;
        }
        if let Some(h) = h {
            for p in 0..self.k {
                for i in 0..n {
                    for j in 0..n {
                        out[(p * n + i, 1 + p * n + j)] += h[(i, j)];
                    }
                }
            }
            out.set_block(0, 1 + nk, &self.kron_xt(&self.x_matrix(vy)));
        }
        out
    }

    fn label(&self) -> &str {
        if self.vary_matrix {
            "eigen-refine"
        } else {
            "eigen"
        }
    }
}
