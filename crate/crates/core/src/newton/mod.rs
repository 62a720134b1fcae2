//! The rank-r Newton iteration and its diagnostics.

use alloc::boxed::Box;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg::{full_svd, rank_from_sigma, rankr_solve, Matrix, RankrOptions, Vector, C64};

mod diagnostics;
mod layout;

pub use crate::linalg::SolverChoice;
pub use diagnostics::{
    classify_quadratic_rate, condition_number, finite_diff_jacobian, fit_convergence_order,
};
pub use layout::{PartValue, Shape, VariableLayout};

/// A smooth map `f: C^m -> C^n` with its Jacobian.
pub trait NonlinearSystem {
    /// `m`, the number of unknowns.
    fn domain_dim(&self) -> usize;
    /// `n`, the number of equations.
    fn codomain_dim(&self) -> usize;
    fn eval(&self, x: &[C64]) -> Vector;
    /// The `n x m` Jacobian at `x`.
    fn jacobian(&self, x: &[C64]) -> Matrix;

    /// Derivative of `x -> J(x) y`, an `n x m` matrix.
    ///
    /// The default uses central differences of the Jacobian.
    fn hessian_action(&self, x: &[C64], y: &[C64]) -> Matrix {
        let m = self.domain_dim();
        let xn = crate::linalg::norm2(x);
        let h = libm::sqrt(f64::EPSILON) * (1.0 + xn);
        let mut out = Matrix::zeros(self.codomain_dim(), m);
        let mut xp = x.to_vec();
        for j in 0..m {
            let orig = xp[j];
            xp[j] = orig + h;
            let plus = self.jacobian(&xp).mul_vec(y);
            xp[j] = orig - h;
            let minus = self.jacobian(&xp).mul_vec(y);
            xp[j] = orig;
            let col: Vec<C64> = plus
                .iter()
                .zip(minus.iter())
                .map(|(a, b)| (a - b) / (2.0 * h))
                .collect();
            out.set_col(j, &col);
        }
        out
    }

    fn label(&self) -> &str {
        "system"
    }
}

macro_rules! forward_system {
    ($($ty:ty),*) => {$(
        impl<T: NonlinearSystem + ?Sized> NonlinearSystem for $ty {
            fn domain_dim(&self) -> usize {
                (**self).domain_dim()
            }
            fn codomain_dim(&self) -> usize {
                (**self).codomain_dim()
            }
            fn eval(&self, x: &[C64]) -> Vector {
                (**self).eval(x)
            }
            fn jacobian(&self, x: &[C64]) -> Matrix {
                (**self).jacobian(x)
            }
            fn hessian_action(&self, x: &[C64], y: &[C64]) -> Matrix {
                (**self).hessian_action(x, y)
            }
            fn label(&self) -> &str {
                (**self).label()
            }
        }
    )*};
}

forward_system!(&T, Box<T>, Arc<T>);

/// A type-erased system that can be shared across threads.
pub type SharedSystem = Arc<dyn NonlinearSystem + Send + Sync>;

/// A system assembled from closures.
pub struct FnSystem<F, J> {
    m: usize,
    n: usize,
    f: F,
    j: J,
    label: String,
}

impl<F, J> FnSystem<F, J>
where
    F: Fn(&[C64]) -> Vector,
    J: Fn(&[C64]) -> Matrix,
{
    pub fn new(m: usize, n: usize, f: F, j: J) -> Self {
        FnSystem {
            m,
            n,
            f,
            j,
            label: String::from("system"),
        }
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }
}

impl<F, J> NonlinearSystem for FnSystem<F, J>
where
    F: Fn(&[C64]) -> Vector,
    J: Fn(&[C64]) -> Matrix,
{
    fn domain_dim(&self) -> usize {
        self.m
    }
    fn codomain_dim(&self) -> usize {
        self.n
    }
    fn eval(&self, x: &[C64]) -> Vector {
        (self.f)(x)
    }
    fn jacobian(&self, x: &[C64]) -> Matrix {
        (self.j)(x)
    }
    fn label(&self) -> &str {
        &self.label
    }
}

/// `f(x) = A x - b`.
pub struct LinearSystem {
    pub a: Matrix,
    pub b: Vector,
}

impl NonlinearSystem for LinearSystem {
    fn domain_dim(&self) -> usize {
        self.a.cols()
    }
    fn codomain_dim(&self) -> usize {
        self.a.rows()
    }
    fn eval(&self, x: &[C64]) -> Vector {
        &self.a.mul_vec(x) - &self.b
    }
    fn jacobian(&self, _x: &[C64]) -> Matrix {
        self.a.clone()
    }
    fn hessian_action(&self, _x: &[C64], _y: &[C64]) -> Matrix {
        Matrix::zeros(self.a.rows(), self.a.cols())
    }
    fn label(&self) -> &str {
        "linear"
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum RankChoice {
    Fixed(usize),
    /// Numerical rank of `J(x0)` at tolerance `theta * sigma_1(J(x0))`.
    Auto(f64),
}

impl Default for RankChoice {
    fn default() -> Self {
        RankChoice::Auto(1e-8)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NewtonOptions {
    pub rank: RankChoice,
    pub max_iter: usize,
    /// Stop when `||x_k - x_{k-1}|| <= shift_tol * (1 + ||x_{k-1}||)`.
    pub shift_tol: f64,
    /// Stop when `||f(x_k)|| <= residual_tol`; zero disables the test.
    pub residual_tol: f64,
    /// Give up once `||x_k - x_0|| > divergence_factor * (1 + ||x_0||)`.
    pub divergence_factor: f64,
    pub seed: u64,
    pub solver: SolverChoice,
    pub rankr: RankrOptions,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        NewtonOptions {
            rank: RankChoice::default(),
            max_iter: 50,
            shift_tol: 1e-14,
            residual_tol: 1e-12,
            divergence_factor: 1e3,
            seed: 0,
            solver: SolverChoice::Svd,
            rankr: RankrOptions::default(),
        }
    }
}

impl NewtonOptions {
    pub fn with_rank(mut self, r: usize) -> Self {
        self.rank = RankChoice::Fixed(r);
        self
    }

    fn validate(&self) -> Result<()> {
        if self.max_iter == 0 {
            return Err(Error::invalid("max_iter must be at least 1"));
        }
        if !(self.shift_tol > 0.0) {
            return Err(Error::invalid("shift_tol must be positive"));
        }
        if !(self.residual_tol >= 0.0) {
            return Err(Error::invalid("residual_tol must be nonnegative"));
        }
        if !(self.divergence_factor > 0.0) {
            return Err(Error::invalid("divergence_factor must be positive"));
        }
        if let RankChoice::Auto(theta) = self.rank {
            if !(theta >= 0.0) {
                return Err(Error::invalid("rank tolerance must be nonnegative"));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Termination {
    ZeroFound,
    StationaryPoint,
    MaxIterations,
    Diverged,
}

impl Termination {
    pub fn as_str(self) -> &'static str {
        match self {
            Termination::ZeroFound => "ZeroFound",
            Termination::StationaryPoint => "StationaryPoint",
            Termination::MaxIterations => "MaxIterations",
            Termination::Diverged => "Diverged",
        }
    }
}

impl core::fmt::Display for Termination {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConvergenceStatus {
    pub termination: Termination,
    pub residual: f64,
    pub shift: Option<f64>,
}

/// One row of a trace: `x_k`, `||f(x_k)||` and `||x_k - x_{k-1}||`.
#[derive(Clone, Debug, PartialEq)]
pub struct Step {
    pub k: usize,
    pub x: Vector,
    pub residual: f64,
    /// Absent at `k = 0`.
    pub shift: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct IterationTrace {
    pub steps: Vec<Step>,
    pub status: ConvergenceStatus,
    pub rank_used: usize,
    /// Singular values of the Jacobian at the final iterate.
    pub sigma_profile: Vec<f64>,
}

impl IterationTrace {
    pub fn last(&self) -> &Step {
        self.steps.last().expect("traces are nonempty")
    }

    pub fn final_x(&self) -> &Vector {
        &self.last().x
    }

    pub fn final_residual(&self) -> f64 {
        self.last().residual
    }

    pub fn final_shift(&self) -> Option<f64> {
        self.last().shift
    }

    pub fn termination(&self) -> Termination {
        self.status.termination
    }

    /// Number of Newton steps taken.
    pub fn iterations(&self) -> usize {
        self.steps.len() - 1
    }

    pub fn shifts(&self) -> Vec<f64> {
        self.steps.iter().filter_map(|s| s.shift).collect()
    }
}

fn resolve_rank<S: NonlinearSystem + ?Sized>(sys: &S, x0: &[C64], choice: RankChoice) -> Result<usize> {
    let (m, n) = (sys.domain_dim(), sys.codomain_dim());
    match choice {
        RankChoice::Fixed(r) => {
            if r > m.min(n) {
                return Err(Error::InvalidRank {
                    rank: r,
                    constraint: alloc::format!("r <= min(m, n) = {}", m.min(n)),
                });
            }
            Ok(r)
        }
        RankChoice::Auto(theta) => {
            let j = sys.jacobian(x0);
            let svd = full_svd(&j)?;
            Ok(rank_from_sigma(&svd.sigma, theta * svd.sigma_max()))
        }
    }
}

fn breakdown(k: usize, what: &str) -> Error {
    Error::AtStep {
        step: k,
        source: Box::new(Error::NumericBreakdown(alloc::format!("{what} is not finite"))),
    }
}

/// Runs `x_{k+1} = x_k - J_rank-r(x_k)^+ f(x_k)` from `x0`.
pub fn newton_rank_r<S: NonlinearSystem + ?Sized>(
    sys: &S,
    x0: &[C64],
    opts: &NewtonOptions,
) -> Result<IterationTrace> {
    opts.validate()?;
    let m = sys.domain_dim();
    if x0.len() != m {
        return Err(Error::dims(m, x0.len()));
    }
    let x0 = Vector::from_vec(x0.to_vec());
    if !x0.is_finite() {
        return Err(Error::invalid("initial iterate is not finite"));
    }
    let r = resolve_rank(sys, &x0, opts.rank)?;
    let radius = opts.divergence_factor * (1.0 + x0.norm());

    let mut steps: Vec<Step> = Vec::new();
    let mut x = x0.clone();
    let mut prev: Option<Vector> = None;
    let mut k = 0usize;
    let termination = loop {
        let fx = sys.eval(&x);
        if fx.dim() != sys.codomain_dim() {
            return Err(Error::dims(sys.codomain_dim(), fx.dim()));
        }
        if !fx.is_finite() {
            return Err(breakdown(k, "residual"));
        }
        let residual = fx.norm();
        let shift = prev.as_ref().map(|p| (&x - p).norm());
        steps.push(Step {
            k,
            x: x.clone(),
            residual,
            shift,
        });
        if residual <= opts.residual_tol {
            break Termination::ZeroFound;
        }
        if let (Some(s), Some(p)) = (shift, prev.as_ref()) {
            if s <= opts.shift_tol * (1.0 + p.norm()) {
                break Termination::StationaryPoint;
            }
        }
        if k >= opts.max_iter {
            break Termination::MaxIterations;
        }
        if (&x - &x0).norm() > radius {
            break Termination::Diverged;
        }
        let j = sys.jacobian(&x);
        if !j.is_finite() {
            return Err(breakdown(k, "Jacobian"));
        }
        let mut rankr = opts.rankr;
        rankr.seed = opts.seed.wrapping_add(k as u64);
        let dx = if r == 0 {
            Vector::zeros(m)
        } else {
            rankr_solve(&j, r, &fx, opts.solver, &rankr).map_err(|e| Error::AtStep {
                step: k,
                source: Box::new(e),
            })?
        };
        if !dx.is_finite() {
            return Err(breakdown(k, "Newton step"));
        }
        prev = Some(x.clone());
        x = &x - &dx;
        k += 1;
    };

    let last = steps.last().expect("at least one step");
    let status = ConvergenceStatus {
        termination,
        residual: last.residual,
        shift: last.shift,
    };
    let sigma_profile = full_svd(&sys.jacobian(&last.x))
        .map(|s| s.sigma)
        .unwrap_or_default();
    if termination == Termination::MaxIterations || termination == Termination::Diverged {
        log::debug!("{}: iteration ended with {termination}", sys.label());
    }
    Ok(IterationTrace {
        steps,
        status,
        rank_used: r,
        sigma_profile,
    })
}

/// Gauss-Newton: the rank-r iteration with `r = m` on an (over)determined system.
pub fn gauss_newton<S: NonlinearSystem + ?Sized>(
    sys: &S,
    x0: &[C64],
    opts: &NewtonOptions,
) -> Result<IterationTrace> {
    let (m, n) = (sys.domain_dim(), sys.codomain_dim());
    if n < m {
        return Err(Error::invalid(alloc::format!(
            "Gauss-Newton needs at least as many equations as unknowns ({n} < {m})"
        )));
    }
    let opts = NewtonOptions {
        rank: RankChoice::Fixed(m),
        ..*opts
    };
    newton_rank_r(sys, x0, &opts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{rankr_pinv_apply_svd, truncated_svd};

    fn c(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    fn circle() -> impl NonlinearSystem {
        // both equations carry the factor x^2 + y^2 - 1
        FnSystem::new(
            2,
            2,
            |v: &[C64]| {
                let (x, y) = (v[0], v[1]);
                let s = x * x + y * y - 1.0;
                Vector::from_vec(alloc::vec![s * (x + 2.0), s * (y - 3.0)])
            },
            |v: &[C64]| {
                let (x, y) = (v[0], v[1]);
                let s = x * x + y * y - 1.0;
                let mut j = Matrix::zeros(2, 2);
                j[(0, 0)] = s + x * 2.0 * (x + 2.0);
                j[(0, 1)] = y * 2.0 * (x + 2.0);
                j[(1, 0)] = x * 2.0 * (y - 3.0);
                j[(1, 1)] = s + y * 2.0 * (y - 3.0);
                j
            },
        )
    }

    #[test]
    fn linear_one_step() {
        let sys = LinearSystem {
            a: Matrix::from_real_rows(&[&[1.0, 1.0]]),
            b: Vector::from_real(&[2.0]),
        };
        let t = newton_rank_r(&sys, &[c(0.0), c(0.0)], &NewtonOptions::default().with_rank(1)).unwrap();
        assert_eq!(t.termination(), Termination::ZeroFound);
        assert_eq!(t.iterations(), 1);
        assert!((t.final_x() - &Vector::from_real(&[1.0, 1.0])).norm() < 1e-14);
        assert_eq!(t.steps[0].shift, None);
    }

    #[test]
    fn circle_limit() {
        let sys = circle();
        let t = newton_rank_r(&sys, &[c(1.8), c(0.6)], &NewtonOptions::default().with_rank(1)).unwrap();
        let x = t.final_x();
        assert!((x[0].re - 0.928428592).abs() < 1e-6, "{x:?}");
        assert!((x[1].re - 0.3715109).abs() < 1e-6);
        assert!((x[0] * x[0] + x[1] * x[1] - 1.0).norm() < 1e-10);
    }

    #[test]
    fn auto_rank_matches() {
        let sys = circle();
        let t = newton_rank_r(&sys, &[c(0.61), c(0.79)], &NewtonOptions::default()).unwrap();
        assert_eq!(t.rank_used, 2);
        let t = newton_rank_r(&sys, &[c(0.6), c(0.8)], &NewtonOptions::default()).unwrap();
        assert_eq!(t.rank_used, 1);
        assert_eq!(t.termination(), Termination::ZeroFound);
    }

    #[test]
    fn gauss_newton_examples() {
        let f = FnSystem::new(
            1,
            2,
            |v: &[C64]| Vector::from_vec(alloc::vec![v[0] - 1.0, (v[0] - 1.0) * 2.0]),
            |_: &[C64]| Matrix::from_real_rows(&[&[1.0], &[2.0]]),
        );
        let t = gauss_newton(&f, &[c(1.5)], &NewtonOptions::default()).unwrap();
        assert_eq!(t.termination(), Termination::ZeroFound);
        assert!((t.final_x()[0] - 1.0).norm() < 1e-14);

        let eps = 1e-3;
        let g = FnSystem::new(
            1,
            2,
            move |v: &[C64]| Vector::from_vec(alloc::vec![v[0] - 1.0, v[0] - 1.0 + eps]),
            |_: &[C64]| Matrix::from_real_rows(&[&[1.0], &[1.0]]),
        );
        let t = gauss_newton(&g, &[c(1.2)], &NewtonOptions::default()).unwrap();
        assert_eq!(t.termination(), Termination::StationaryPoint);
        assert!((t.final_x()[0].re - (1.0 - eps / 2.0)).abs() < 1e-14);
        // J^H f vanishes at a stationary limit
        let jf = g.jacobian(t.final_x()).adjoint_mul_vec(&g.eval(t.final_x()));
        assert!(jf.norm() < 1e-12);

        let wide = FnSystem::new(2, 1, |_: &[C64]| Vector::zeros(1), |_: &[C64]| Matrix::zeros(1, 2));
        assert!(gauss_newton(&wide, &[c(0.0), c(0.0)], &NewtonOptions::default()).is_err());
    }

    #[test]
    fn rejects_bad_rank_and_dims() {
        let sys = circle();
        let err = newton_rank_r(&sys, &[c(1.0), c(1.0)], &NewtonOptions::default().with_rank(5)).unwrap_err();
        assert!(matches!(err, Error::InvalidRank { rank: 5, .. }));
        assert!(newton_rank_r(&sys, &[c(1.0)], &NewtonOptions::default()).is_err());
        let opts = NewtonOptions {
            max_iter: 0,
            ..NewtonOptions::default()
        };
        assert!(newton_rank_r(&sys, &[c(1.0), c(1.0)], &opts).is_err());
    }

    #[test]
    fn nan_is_breakdown() {
        let f = FnSystem::new(
            1,
            1,
            |v: &[C64]| Vector::from_vec(alloc::vec![if v[0].re < 0.5 { C64::new(f64::NAN, 0.0) } else { v[0] - 1.0 }]),
            |_: &[C64]| Matrix::from_real_rows(&[&[-0.1]]),
        );
        let err = newton_rank_r(&f, &[c(0.9)], &NewtonOptions::default().with_rank(1)).unwrap_err();
        assert!(matches!(err.root(), Error::NumericBreakdown(_)));
        assert!(matches!(err, Error::AtStep { step: 1, .. }));
    }

    #[test]
    fn max_iterations_and_divergence() {
        let slow = FnSystem::new(
            1,
            1,
            |v: &[C64]| Vector::from_vec(alloc::vec![v[0] * v[0]]),
            |v: &[C64]| Matrix::from_fn(1, 1, |_, _| v[0] * 2.0),
        );
        let opts = NewtonOptions {
            max_iter: 3,
            ..NewtonOptions::default().with_rank(1)
        };
        let t = newton_rank_r(&slow, &[c(1.0)], &opts).unwrap();
        assert_eq!(t.termination(), Termination::MaxIterations);
        assert_eq!(t.steps.len(), 4);

        // Newton on atan overshoots further each step once |x0| > 1.4
        let runaway = FnSystem::new(
            1,
            1,
            |v: &[C64]| Vector::from_vec(alloc::vec![C64::new(libm::atan(v[0].re), 0.0)]),
            |v: &[C64]| Matrix::from_fn(1, 1, |_, _| C64::new(1.0 / (1.0 + v[0].re * v[0].re), 0.0)),
        );
        let opts = NewtonOptions {
            divergence_factor: 1.0,
            ..NewtonOptions::default().with_rank(1)
        };
        let t = newton_rank_r(&runaway, &[c(3.0)], &opts).unwrap();
        assert_eq!(t.termination(), Termination::Diverged);
    }

    #[test]
    fn stationarity_at_termination() {
        let sys = circle();
        let t = newton_rank_r(&sys, &[c(0.4), c(0.2)], &NewtonOptions::default().with_rank(1)).unwrap();
        let x = t.final_x();
        let step = rankr_pinv_apply_svd(&sys.jacobian(x), 1, &sys.eval(x)).unwrap();
        assert!(step.norm() <= 1e-12 * (1.0 + x.norm()));
        let _ = truncated_svd(&sys.jacobian(x), 1).unwrap();
    }

    #[test]
    fn default_hessian_action_matches_second_derivative() {
        let f = FnSystem::new(
            1,
            1,
            |v: &[C64]| Vector::from_vec(alloc::vec![v[0] * v[0] * v[0]]),
            |v: &[C64]| Matrix::from_fn(1, 1, |_, _| v[0] * v[0] * 3.0),
        );
        let h = f.hessian_action(&[c(2.0)], &[c(0.5)]);
        assert!((h[(0, 0)] - 6.0).norm() < 1e-6);
    }
}
