use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg::{Matrix, Vector, C64};
use crate::newton::{NonlinearSystem, Shape, VariableLayout};
use crate::polysys::Polynomial;

/// `(u, v, w) -> (u v - p, u w - q)` on coefficient vectors, with `u` of
/// degree `k` and cofactors of degrees `deg p - k` and `deg q - k`.
#[derive(Clone, Debug)]
pub struct GcdInstance {
    p: Polynomial,
    q: Polynomial,
    pc: Vec<C64>,
    qc: Vec<C64>,
    k: usize,
    layout: VariableLayout,
}

/// Product of two ascending coefficient vectors.
fn convolve(a: &[C64], b: &[C64]) -> Vec<C64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![C64::new(0.0, 0.0); a.len() + b.len() - 1];
    for (i, ai) in a.iter().enumerate() {
        for (j, bj) in b.iter().enumerate() {
            out[i + j] += ai * bj;
        }
    }
    out
}

pub fn make_gcd(p: Polynomial, q: Polynomial, k: usize) -> Result<GcdInstance> {
    if p.nvars() != 1 || q.nvars() != 1 {
        return Err(Error::invalid("GCD data must be univariate polynomials"));
    }
    let (m, n) = (p.degree() as usize, q.degree() as usize);
    if k > m.min(n) {
        return Err(Error::invalid(alloc::format!(
            "GCD degree {k} exceeds min(deg p, deg q) = {}",
            m.min(n)
        )));
    }
    let layout = VariableLayout::new()
        .with("u", Shape::Polynomial(k))
        .with("v", Shape::Polynomial(m - k))
        .with("w", Shape::Polynomial(n - k));
    Ok(GcdInstance {
        pc: p.coefficients_ascending(m + 1),
        qc: q.coefficients_ascending(n + 1),
        p,
        q,
        k,
        layout,
    })
}

impl GcdInstance {
    pub fn p(&self) -> &Polynomial {
        &self.p
    }

    pub fn q(&self) -> &Polynomial {
        &self.q
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn deg_p(&self) -> usize {
        self.pc.len() - 1
    }

    pub fn deg_q(&self) -> usize {
        self.qc.len() - 1
    }

    pub fn layout(&self) -> &VariableLayout {
        &self.layout
    }

    /// `m + n - k + 2`, one less than the number of unknowns.
    pub fn rank(&self) -> usize {
        self.deg_p() + self.deg_q() - self.k + 2
    }

    /// Packs ascending coefficient vectors, zero-padding short ones.
    pub fn pack(&self, u: &[C64], v: &[C64], w: &[C64]) -> Result<Vector> {
        use crate::newton::PartValue::Polynomial as P;
        self.layout.pack(&[P(u.to_vec()), P(v.to_vec()), P(w.to_vec())])
    }

    pub fn split<'a>(&self, x: &'a [C64]) -> (&'a [C64], &'a [C64], &'a [C64]) {
        let a = self.k + 1;
        let b = a + self.deg_p() - self.k + 1;
        (&x[..a], &x[a..b], &x[b..])
    }

    /// Same zero set member scaled by `t`: `(t u, v / t, w / t)`.
    pub fn rescale(&self, x: &[C64], t: C64) -> Vector {
        let a = self.k + 1;
        x.iter()
            .enumerate()
            .map(|(i, xi)| if i < a { xi * t } else { xi / t })
            .collect()
    }

    fn jacobian_at(&self, u: &[C64], v: &[C64], w: &[C64]) -> Matrix {
        let (m, n) = (self.deg_p(), self.deg_q());
        let mut jac = Matrix::zeros(m + n + 2, self.layout.total_dim());
        let (a, b) = (u.len(), u.len() + v.len());
        for i in 0..u.len() {
            for (j, vj) in v.iter().enumerate() {
                jac[(i + j, i)] += *vj;
            }
            for (j, wj) in w.iter().enumerate() {
                jac[(m + 1 + i + j, i)] += *wj;
            }
        }
        for (i, ui) in u.iter().enumerate() {
            for j in 0..v.len() {
                jac[(i + j, a + j)] += *ui;
            }
            for j in 0..w.len() {
                jac[(m + 1 + i + j, b + j)] += *ui;
            }
        }
        jac
    }
}

/// `||alpha u - target|| / ||target||` with the least-squares optimal complex
/// scalar `alpha`, so the comparison ignores the scaling freedom of the GCD.
pub fn scaling_independent_distance(u: &[C64], target: &[C64]) -> f64 {
    let uu: f64 = u.iter().map(|z| z.norm_sqr()).sum();
    let tn = libm::sqrt(target.iter().map(|z| z.norm_sqr()).sum::<f64>());
    if uu == 0.0 || tn == 0.0 {
        return f64::INFINITY;
    }
    let ut: C64 = u.iter().zip(target).map(|(a, b)| a.conj() * b).sum();
    let alpha = ut / uu;
    let d: f64 = u
        .iter()
        .zip(target)
        .map(|(a, b)| (alpha * a - b).norm_sqr())
        .sum();
    libm::sqrt(d) / tn
}

impl NonlinearSystem for GcdInstance {
    fn domain_dim(&self) -> usize {
        self.layout.total_dim()
    }

    fn codomain_dim(&self) -> usize {
        self.deg_p() + self.deg_q() + 2
    }

    fn eval(&self, x: &[C64]) -> Vector {
        let (u, v, w) = self.split(x);
        let uv = convolve(u, v);
        let uw = convolve(u, w);
        uv.iter()
            .zip(&self.pc)
            .map(|(a, b)| a - b)
            .chain(uw.iter().zip(&self.qc).map(|(a, b)| a - b))
            .collect()
    }

    fn jacobian(&self, x: &[C64]) -> Matrix {
        let (u, v, w) = self.split(x);
        self.jacobian_at(u, v, w)
    }

    // bilinear map: the derivative of x -> J(x) y is J evaluated at y
    fn hessian_action(&self, _x: &[C64], y: &[C64]) -> Matrix {
        let (u, v, w) = self.split(y);
        self.jacobian_at(u, v, w)
    }

    fn label(&self) -> &str {
        "gcd"
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::newton::finite_diff_jacobian;
    use crate::polysys::parse_poly;

    fn c(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    fn poly(s: &str) -> Polynomial {
        parse_poly(s, &["x"]).unwrap()
    }

    #[test]
    fn exact_pair_is_a_zero() {
        let g = make_gcd(poly("1+2*x+x^2"), poly("1-x^2"), 1).unwrap();
        let x = g.pack(&[c(1.0), c(1.0)], &[c(1.0), c(1.0)], &[c(1.0), c(-1.0)]).unwrap();
        assert_eq!(g.eval(&x).norm(), 0.0);
        assert_eq!((g.domain_dim(), g.codomain_dim(), g.rank()), (6, 6, 5));
    }

    #[test]
    fn published_degrees_give_rank_eight() {
        let p = poly("-1.3333-2.3333*x-4*x^2-3.6667*x^3-2.6667*x^4-x^5");
        let q = poly("-1.9999+x+x^2+3*x^3");
        let g = make_gcd(p, q, 2).unwrap();
        assert_eq!(g.rank(), 8);
        assert_eq!((g.domain_dim(), g.codomain_dim()), (9, 10));
    }

    #[test]
    fn degree_bound_checked() {
        assert!(make_gcd(poly("1+x"), poly("1+x^3"), 2).is_err());
    }

    #[test]
    fn derivatives_match_differences() {
        let g = make_gcd(poly("1+2*x+x^2+x^3"), poly("2-x^2"), 1).unwrap();
        let x: Vector = (0..g.domain_dim()).map(|i| C64::new(0.3 * i as f64 - 0.4, 0.1)).collect();
        let fd = finite_diff_jacobian(&g, &x, 1e-5).unwrap();
        assert!((&g.jacobian(&x) - &fd).max_abs() < 1e-8);
        let y: Vector = (0..g.domain_dim()).map(|i| c(1.0 - 0.2 * i as f64)).collect();
        let h = 1e-6;
        let xp = &x + &y.scaled(c(h));
        let jy = |z: &[C64]| g.jacobian(z).mul_vec(&y);
        let dir: Vector = (0..g.domain_dim()).map(|i| c(i as f64)).collect();
        let xq = &x + &dir.scaled(c(h));
        let approx = (&jy(&xq) - &jy(&x)).scaled(c(1.0 / h));
        let exact = g.hessian_action(&xp, &y).mul_vec(&dir);
        assert!((&approx - &exact).norm() < 1e-8);
    }

    #[test]
    fn rescaling_keeps_the_residual() {
        let g = make_gcd(poly("1+2*x+x^2"), poly("1-x^2"), 1).unwrap();
        let x = g.pack(&[c(1.0), c(1.1)], &[c(0.9), c(1.0)], &[c(1.0), c(-1.2)]).unwrap();
        let r = g.eval(&x).norm();
        for t in [0.5, 2.0] {
            assert!((g.eval(&g.rescale(&x, c(t))).norm() - r).abs() < 1e-12);
        }
    }

    #[test]
    fn distance_ignores_scaling() {
        let u = [c(1.0), c(2.0), c(3.0)];
        let t: Vec<C64> = u.iter().map(|z| z * C64::new(0.0, -2.5)).collect();
        assert!(scaling_independent_distance(&u, &t) < 1e-15);
        assert!(scaling_independent_distance(&u, &[c(1.0), c(0.0), c(0.0)]) > 0.5);
    }
}
