use alloc::string::String;
use alloc::vec::Vec;

use super::{parse_poly, Polynomial};
use crate::error::{Error, Result};
use crate::linalg::{Matrix, Vector, C64};
use crate::newton::NonlinearSystem;

/// Polynomial equations over a shared variable list, with exact first and
/// second derivatives.
#[derive(Clone, Debug)]
pub struct PolySystem {
    vars: Vec<String>,
    equations: Vec<Polynomial>,
    jac: Vec<Vec<Polynomial>>,
    /// `hess[i][j][l] = d^2 f_i / dx_j dx_l`
    hess: Vec<Vec<Vec<Polynomial>>>,
    label: String,
}

impl PolySystem {
    pub fn new(equations: Vec<Polynomial>) -> Result<Self> {
        let Some(first) = equations.first() else {
            return Err(Error::invalid("a polynomial system needs at least one equation"));
        };
        let vars = first.vars().to_vec();
        if equations.iter().any(|p| p.vars() != vars.as_slice()) {
            return Err(Error::VariableMismatch);
        }
        let jac: Vec<Vec<Polynomial>> = equations
            .iter()
            .map(|p| (0..vars.len()).map(|j| p.derivative(j)).collect())
            .collect();
        let hess = jac
            .iter()
            .map(|row| {
                row.iter()
                    .map(|d| (0..vars.len()).map(|l| d.derivative(l)).collect())
                    .collect()
            })
            .collect();
        Ok(PolySystem {
            vars,
            equations,
            jac,
            hess,
            label: String::from("polynomial system"),
        })
    }

    pub fn parse(vars: &[&str], equations: &[&str]) -> Result<Self> {
        let polys = equations
            .iter()
            .map(|e| parse_poly(e, vars))
            .collect::<Result<Vec<_>>>()?;
        Self::new(polys)
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn vars(&self) -> &[String] {
        &self.vars
    }

    pub fn equations(&self) -> &[Polynomial] {
        &self.equations
    }

    pub fn jacobian_polynomials(&self) -> &[Vec<Polynomial>] {
        &self.jac
    }
}

/// Matrix of partial derivatives `d f_i / d x_j`.
pub fn poly_jacobian(sys: &PolySystem) -> Vec<Vec<Polynomial>> {
    sys.jac.clone()
}

/// Rows of the derivative of `x -> J(x) y`: entry `(i, j)` is
/// `sum_l y_l d^2 f_i / dx_j dx_l`.
pub fn poly_hessian_action(sys: &PolySystem, y: &[C64]) -> Result<Vec<Vec<Polynomial>>> {
    let m = sys.vars.len();
    if y.len() != m {
        return Err(Error::dims(m, y.len()));
    }
    let names: Vec<&str> = sys.vars.iter().map(String::as_str).collect();
    Ok(sys
        .hess
        .iter()
        .map(|row| {
            row.iter()
                .map(|second| {
                    let mut acc = Polynomial::zero(&names);
                    for (l, d) in second.iter().enumerate() {
                        acc = acc.plus(&d.scale(y[l])).expect("same variables");
                    }
                    acc
                })
                .collect()
        })
        .collect())
}

impl NonlinearSystem for PolySystem {
    fn domain_dim(&self) -> usize {
        self.vars.len()
    }

    fn codomain_dim(&self) -> usize {
        self.equations.len()
    }

    fn eval(&self, x: &[C64]) -> Vector {
        self.equations.iter().map(|p| p.eval_unchecked(x)).collect()
    }

    fn jacobian(&self, x: &[C64]) -> Matrix {
        Matrix::from_fn(self.equations.len(), self.vars.len(), |i, j| {
            self.jac[i][j].eval_unchecked(x)
        })
    }

    fn hessian_action(&self, x: &[C64], y: &[C64]) -> Matrix {
        Matrix::from_fn(self.equations.len(), self.vars.len(), |i, j| {
            self.hess[i][j]
                .iter()
                .zip(y)
                .map(|(p, yl)| p.eval_unchecked(x) * yl)
                .sum()
        })
    }

    fn label(&self) -> &str {
        &self.label
    }
}
