use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg::{Matrix, Vector, C64};

/// Shape of one named block of unknowns.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Shape {
    Scalar,
    Vector(usize),
    /// `rows x cols`, stored column-major.
    Matrix(usize, usize),
    /// Univariate polynomial of degree at most the bound, ascending coefficients.
    Polynomial(usize),
}

impl Shape {
    pub fn dim(self) -> usize {
        match self {
            Shape::Scalar => 1,
            Shape::Vector(d) => d,
            Shape::Matrix(p, q) => p * q,
            Shape::Polynomial(deg) => deg + 1,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum PartValue {
    Scalar(C64),
    Vector(Vector),
    Matrix(Matrix),
    Polynomial(Vec<C64>),
}

/// Ordered named blocks that make up the unknown vector.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct VariableLayout {
    parts: Vec<(String, Shape)>,
}

impl VariableLayout {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, name: impl Into<String>, shape: Shape) -> Self {
        self.parts.push((name.into(), shape));
        self
    }

    pub fn parts(&self) -> &[(String, Shape)] {
        &self.parts
    }

    pub fn total_dim(&self) -> usize {
        self.parts.iter().map(|(_, s)| s.dim()).sum()
    }

    /// Coordinate range of the named part.
    pub fn range(&self, name: &str) -> Option<core::ops::Range<usize>> {
        let mut start = 0;
        for (n, s) in &self.parts {
            if n == name {
                return Some(start..start + s.dim());
            }
            start += s.dim();
        }
        None
    }

    pub fn pack(&self, values: &[PartValue]) -> Result<Vector> {
        if values.len() != self.parts.len() {
            return Err(Error::Layout(alloc::format!(
                "expected {} parts, got {}",
                self.parts.len(),
                values.len()
            )));
        }
        let mut out = Vec::with_capacity(self.total_dim());
        for ((name, shape), value) in self.parts.iter().zip(values) {
            match (shape, value) {
                (Shape::Scalar, PartValue::Scalar(c)) => out.push(*c),
                (Shape::Vector(d), PartValue::Vector(v)) if v.dim() == *d => {
                    out.extend_from_slice(v)
                }
                (Shape::Matrix(p, q), PartValue::Matrix(m)) if m.shape() == (*p, *q) => {
                    for j in 0..*q {
                        for i in 0..*p {
                            out.push(m[(i, j)]);
                        }
                    }
                }
                (Shape::Polynomial(deg), PartValue::Polynomial(c)) if c.len() <= deg + 1 => {
                    out.extend_from_slice(c);
                    out.resize(out.len() + deg + 1 - c.len(), C64::new(0.0, 0.0));
                }
                _ => {
                    return Err(Error::Layout(alloc::format!(
                        "part `{name}` does not conform to {shape:?}"
                    )))
                }
            }
        }
        Ok(Vector::from_vec(out))
    }

    pub fn unpack(&self, v: &[C64]) -> Result<Vec<PartValue>> {
        if v.len() != self.total_dim() {
            return Err(Error::Layout(alloc::format!(
                "expected {} coordinates, got {}",
                self.total_dim(),
                v.len()
            )));
        }
        let mut out = Vec::with_capacity(self.parts.len());
        let mut at = 0;
        for (_, shape) in &self.parts {
            let chunk = &v[at..at + shape.dim()];
            at += shape.dim();
            out.push(match *shape {
                Shape::Scalar => PartValue::Scalar(chunk[0]),
                Shape::Vector(_) => PartValue::Vector(Vector::from_vec(chunk.to_vec())),
                Shape::Matrix(p, q) => PartValue::Matrix(Matrix::from_fn(p, q, |i, j| chunk[j * p + i])),
                Shape::Polynomial(_) => PartValue::Polynomial(chunk.to_vec()),
            });
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    #[test]
    fn scalar_and_matrix() {
        let l = VariableLayout::new()
            .with("lambda", Shape::Scalar)
            .with("X", Shape::Matrix(2, 2));
        let v = l
            .pack(&[PartValue::Scalar(c(3.0)), PartValue::Matrix(Matrix::identity(2))])
            .unwrap();
        assert_eq!(v, Vector::from_real(&[3.0, 1.0, 0.0, 0.0, 1.0]));
        assert_eq!(l.range("X"), Some(1..5));
    }

    #[test]
    fn gcd_dimension() {
        let l = VariableLayout::new()
            .with("u", Shape::Polynomial(2))
            .with("v", Shape::Polynomial(3))
            .with("w", Shape::Polynomial(1));
        assert_eq!(l.total_dim(), 9);
    }

    #[test]
    fn shape_errors() {
        let l = VariableLayout::new().with("v", Shape::Vector(2));
        assert!(matches!(l.pack(&[PartValue::Scalar(c(1.0))]), Err(Error::Layout(_))));
        assert!(matches!(l.pack(&[]), Err(Error::Layout(_))));
        assert!(matches!(l.unpack(&[c(1.0)]), Err(Error::Layout(_))));
    }

    #[test]
    fn short_polynomial_is_padded() {
        let l = VariableLayout::new().with("p", Shape::Polynomial(2));
        let v = l.pack(&[PartValue::Polynomial(alloc::vec![c(1.0)])]).unwrap();
        assert_eq!(v, Vector::from_real(&[1.0, 0.0, 0.0]));
    }

    proptest! {
        #[test]
        fn unpack_inverts_pack(p in 1usize..4, q in 1usize..4, d in 0usize..5, vals in proptest::collection::vec(-10.0f64..10.0, 40)) {
            let l = VariableLayout::new()
                .with("s", Shape::Scalar)
                .with("m", Shape::Matrix(p, q))
                .with("poly", Shape::Polynomial(d));
            let v: Vec<C64> = vals.iter().take(l.total_dim()).map(|&x| C64::new(x, -x)).collect();
            let parts = l.unpack(&v).unwrap();
            let packed = l.pack(&parts).unwrap();
            prop_assert_eq!(packed.as_slice(), &v[..]);
        }
    }
}
