//! Sparse multivariate polynomials with complex coefficients.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::error::{Error, Result};
use crate::linalg::C64;

mod parse;
mod system;

pub use parse::parse_poly;
pub use system::{poly_hessian_action, poly_jacobian, PolySystem};

/// `sum_a c_a x^a` over exponent tuples `a`, zero coefficients never stored.
#[derive(Clone, Debug, PartialEq)]
pub struct Polynomial {
    vars: Vec<String>,
    terms: BTreeMap<Vec<u32>, C64>,
}

impl Polynomial {
    pub fn zero(vars: &[&str]) -> Self {
        Polynomial {
            vars: vars.iter().map(|s| String::from(*s)).collect(),
            terms: BTreeMap::new(),
        }
    }

    fn zero_like(&self) -> Self {
        Polynomial {
            vars: self.vars.clone(),
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(vars: &[&str], c: C64) -> Self {
        let mut p = Self::zero(vars);
        p.add_term(vec![0; vars.len()], c);
        p
    }

    /// The `i`-th variable as a polynomial.
    pub fn var(vars: &[&str], i: usize) -> Self {
        let mut p = Self::zero(vars);
        let mut e = vec![0; vars.len()];
        e[i] = 1;
        p.add_term(e, C64::new(1.0, 0.0));
        p
    }

    /// Builds from `(exponents, coefficient)` pairs; repeated exponents are summed.
    pub fn from_terms(vars: &[&str], terms: impl IntoIterator<Item = (Vec<u32>, C64)>) -> Result<Self> {
        let mut p = Self::zero(vars);
        for (e, c) in terms {
            if e.len() != vars.len() {
                return Err(Error::dims(vars.len(), e.len()));
            }
            p.add_term(e, c);
        }
        Ok(p)
    }

    /// Univariate polynomial from ascending coefficients.
    pub fn univariate(var: &str, coeffs: &[C64]) -> Self {
        let mut p = Self::zero(&[var]);
        for (d, &c) in coeffs.iter().enumerate() {
            p.add_term(vec![d as u32], c);
        }
        p
    }

    pub(crate) fn add_term(&mut self, e: Vec<u32>, c: C64) {
        if c == C64::new(0.0, 0.0) {
            return;
        }
        let slot = self.terms.entry(e.clone()).or_insert(C64::new(0.0, 0.0));
        *slot += c;
        if *slot == C64::new(0.0, 0.0) {
            self.terms.remove(&e);
        }
    }

    pub fn vars(&self) -> &[String] {
        &self.vars
    }

    pub fn nvars(&self) -> usize {
        self.vars.len()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, e: &[u32]) -> C64 {
        self.terms.get(e).copied().unwrap_or(C64::new(0.0, 0.0))
    }

    pub fn terms(&self) -> impl Iterator<Item = (&[u32], C64)> {
        self.terms.iter().map(|(e, c)| (e.as_slice(), *c))
    }

    /// Total degree; zero for the zero polynomial.
    pub fn degree(&self) -> u32 {
        self.terms.keys().map(|e| e.iter().sum()).max().unwrap_or(0)
    }

    /// Terms in graded order: ascending total degree, then lexicographically
    /// with higher powers of earlier variables first.
    pub fn graded_terms(&self) -> Vec<(&[u32], C64)> {
        let mut t: Vec<(&[u32], C64)> = self.terms().collect();
        t.sort_by(|(a, _), (b, _)| {
            let da: u32 = a.iter().sum();
            let db: u32 = b.iter().sum();
            da.cmp(&db).then_with(|| b.cmp(a))
        });
        t
    }

    /// Ascending coefficients of a univariate polynomial, padded to `len`.
    pub fn coefficients_ascending(&self, len: usize) -> Vec<C64> {
        let mut out = vec![C64::new(0.0, 0.0); len];
        for (e, c) in self.terms() {
            let d = e.iter().sum::<u32>() as usize;
            if d < len {
                out[d] += c;
            }
        }
        out
    }

    pub fn eval(&self, x: &[C64]) -> Result<C64> {
        if x.len() != self.nvars() {
            return Err(Error::dims(self.nvars(), x.len()));
        }
        Ok(self.eval_unchecked(x))
    }

    pub(crate) fn eval_unchecked(&self, x: &[C64]) -> C64 {
        let mut acc = C64::new(0.0, 0.0);
        for (e, c) in &self.terms {
            let mut t = *c;
            for (xi, &p) in x.iter().zip(e) {
                if p > 0 {
                    t *= xi.powu(p);
                }
            }
            acc += t;
        }
        acc
    }

    fn check_vars(&self, other: &Polynomial) -> Result<()> {
        if self.vars != other.vars {
            return Err(Error::VariableMismatch);
        }
        Ok(())
    }

    pub fn plus(&self, other: &Polynomial) -> Result<Polynomial> {
        self.check_vars(other)?;
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(e.clone(), *c);
        }
        Ok(out)
    }

    pub fn minus(&self, other: &Polynomial) -> Result<Polynomial> {
        self.plus(&other.scale(C64::new(-1.0, 0.0)))
    }

    pub fn times(&self, other: &Polynomial) -> Result<Polynomial> {
        self.check_vars(other)?;
        let mut out = self.zero_like();
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                let e: Vec<u32> = ea.iter().zip(eb).map(|(a, b)| a + b).collect();
                out.add_term(e, ca * cb);
            }
        }
        Ok(out)
    }

    pub fn scale(&self, s: C64) -> Polynomial {
        let mut out = self.zero_like();
        for (e, c) in &self.terms {
            out.add_term(e.clone(), c * s);
        }
        out
    }

    pub fn pow(&self, k: u32) -> Polynomial {
        let mut out = self.zero_like();
        out.add_term(vec![0; self.nvars()], C64::new(1.0, 0.0));
        for _ in 0..k {
            out = out.times(self).expect("same variables");
        }
        out
    }

    /// Partial derivative with respect to variable `i`.
    pub fn derivative(&self, i: usize) -> Polynomial {
        let mut out = self.zero_like();
        for (e, c) in &self.terms {
            if e[i] == 0 {
                continue;
            }
            let mut d = e.clone();
            d[i] -= 1;
            out.add_term(d, c * e[i] as f64);
        }
        out
    }
}

fn write_real(f: &mut fmt::Formatter<'_>, x: f64) -> fmt::Result {
    write!(f, "{x:?}")
}

impl fmt::Display for Polynomial {
    /// Prints in the grammar accepted by [`parse_poly`]; parsing the output
    /// restores the polynomial exactly.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let terms = self.graded_terms();
        if terms.is_empty() {
            return f.write_str("0");
        }
        let mut first = true;
        for (e, c) in terms {
            let parts: [(f64, bool); 2] = [(c.re, false), (c.im, true)];
            for (val, imag) in parts {
                if val == 0.0 {
                    continue;
                }
                let neg = val.is_sign_negative();
                if first {
                    if neg {
                        f.write_str("-")?;
                    }
                } else {
                    f.write_str(if neg { " - " } else { " + " })?;
                }
                first = false;
                let mag = val.abs();
                let monomial = e.iter().any(|&p| p > 0);
                let mut wrote = false;
                if mag != 1.0 || !monomial || imag {
                    if mag != 1.0 || !imag {
                        write_real(f, mag)?;
                    }
                    if imag {
                        f.write_str("i")?;
                    }
                    wrote = true;
                }
                for (v, &p) in self.vars.iter().zip(e) {
                    if p == 0 {
                        continue;
                    }
                    if wrote {
                        f.write_str("*")?;
                    }
                    f.write_str(v)?;
                    if p > 1 {
                        write!(f, "^{p}")?;
                    }
                    wrote = true;
                }
            }
        }
        Ok(())
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
    fn ring_examples() {
        let v = ["x"];
        let one = Polynomial::constant(&v, c(1.0));
        let x = Polynomial::var(&v, 0);
        let lhs = one.plus(&x).unwrap().times(&one.minus(&x).unwrap()).unwrap();
        let rhs = one.minus(&x.pow(2)).unwrap();
        assert_eq!(lhs, rhs);

        let xy = ["x", "y"];
        let circle = Polynomial::var(&xy, 0).pow(2).plus(&Polynomial::var(&xy, 1).pow(2)).unwrap();
        assert!((circle.eval(&[c(0.6), c(0.8)]).unwrap() - 1.0).norm() < 1e-15);
        assert!(circle.eval(&[c(0.6)]).is_err());
        assert_eq!(x.plus(&circle), Err(Error::VariableMismatch));
    }

    #[test]
    fn cancellation_leaves_no_zero_terms() {
        let v = ["x"];
        let x = Polynomial::var(&v, 0);
        let z = x.minus(&x).unwrap();
        assert!(z.is_zero());
        assert_eq!(z.num_terms(), 0);
        assert_eq!(format!("{z}"), "0");
    }

    #[test]
    fn derivative_and_degree() {
        let v = ["x", "y"];
        let p = parse_poly("x^3*y + 2*y^2 - 5", &v).unwrap();
        assert_eq!(p.degree(), 4);
        assert_eq!(p.derivative(0), parse_poly("3*x^2*y", &v).unwrap());
        assert_eq!(p.derivative(1), parse_poly("x^3 + 4*y", &v).unwrap());
    }

    #[test]
    fn display_is_graded() {
        let v = ["x1", "x2"];
        let p = parse_poly("x2^2 + 3 - x1 + 2.5*x1*x2 + x1^2", &v).unwrap();
        assert_eq!(format!("{p}"), "3.0 - x1 + x1^2 + 2.5*x1*x2 + x2^2");
        let q = Polynomial::from_terms(&v, [(alloc::vec![1, 0], C64::new(2.0, -1.5))]).unwrap();
        assert_eq!(format!("{q}"), "2.0*x1 - 1.5i*x1");
        assert_eq!(parse_poly(&format!("{q}"), &v).unwrap(), q);
    }

    use std::format;

    fn arb_poly() -> impl Strategy<Value = Polynomial> {
        proptest::collection::vec(
            ((0u32..4, 0u32..4, 0u32..3), (-1e3f64..1e3, -1e3f64..1e3), 0u8..3),
            0..8,
        )
        .prop_map(|terms| {
            let v = ["x", "y", "z"];
            let it = terms.into_iter().map(|((a, b, cc), (re, im), kind)| {
                let coef = match kind {
                    0 => C64::new(re, 0.0),
                    1 => C64::new(0.0, im),
                    _ => C64::new(re, im),
                };
                (alloc::vec![a, b, cc], coef)
            });
            Polynomial::from_terms(&v, it).unwrap()
        })
    }

    proptest! {
        #[test]
        fn print_parse_roundtrip(p in arb_poly()) {
            let text = format!("{p}");
            let back = parse_poly(&text, &["x", "y", "z"]).unwrap();
            prop_assert_eq!(back, p);
        }

        #[test]
        fn evaluation_is_a_ring_homomorphism(p in arb_poly(), q in arb_poly(),
            pt in proptest::collection::vec(-1.5f64..1.5, 6)) {
            let x: Vec<C64> = pt.chunks(2).map(|w| C64::new(w[0], w[1])).collect();
            let (a, b) = (p.eval(&x).unwrap(), q.eval(&x).unwrap());
            let ax: Vec<C64> = x.iter().map(|z| C64::new(z.norm(), 0.0)).collect();
            let size = |r: &Polynomial| r.terms().map(|(e, c)| {
                c.norm() * e.iter().zip(&ax).map(|(&k, z)| z.re.powi(k as i32)).product::<f64>()
            }).sum::<f64>();
            let (sp, sq) = (size(&p), size(&q));
            let sum = p.plus(&q).unwrap().eval(&x).unwrap();
            let diff = p.minus(&q).unwrap().eval(&x).unwrap();
            let prod = p.times(&q).unwrap().eval(&x).unwrap();
            prop_assert!((sum - (a + b)).norm() <= 1e-13 * (1.0 + sp + sq));
            prop_assert!((diff - (a - b)).norm() <= 1e-13 * (1.0 + sp + sq));
            prop_assert!((prod - a * b).norm() <= 1e-13 * (1.0 + sp * sq));
        }
    }
}
