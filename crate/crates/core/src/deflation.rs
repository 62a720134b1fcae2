//! Depth deflation: `g(x, y) = (f(x), J(x) y, R y - e)` turns an
//! ultrasingular zero `x*` of `f` into part of a zero `(x*, y*)` of `g` with
//! smaller Jacobian nullity. Repeating the expansion reaches a semiregular zero.

use alloc::boxed::Box;
use alloc::sync::Arc;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linalg::{full_svd, least_squares, nullspace_basis, rank_from_sigma, Matrix, Vector, C64};
use crate::newton::{newton_rank_r, IterationTrace, NewtonOptions, NonlinearSystem, RankChoice, SharedSystem};

/// The expanded map `(x, y) -> (f(x), J(x) y, R y - e)`.
#[derive(Clone)]
pub struct DeflatedSystem {
    base: SharedSystem,
    r: Matrix,
    e: Vector,
    rank: usize,
}

impl core::fmt::Debug for DeflatedSystem {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("DeflatedSystem")
            .field("base", &self.base.label())
            .field("rank", &self.rank)
            .field("r", &self.r)
            .finish()
    }
}

fn random_matrix(rows: usize, cols: usize, complex: bool, seed: u64) -> Matrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Matrix::from_fn(rows, cols, |_, _| {
        if complex {
            loop {
                let z = C64::new(rng.gen_range(-1.0..=1.0), rng.gen_range(-1.0..=1.0));
                if z.norm_sqr() <= 1.0 {
                    break z;
                }
            }
        } else {
            C64::new(rng.gen_range(-1.0..=1.0), 0.0)
        }
    })
}

/// Expands `sys` around `x_hat` where `J(x_hat)` has numerical rank `r < m`.
///
/// `R` is `(m - r) x m` with entries uniform on `[-1, 1]`, or on the unit disk
/// when `x_hat` is complex, drawn from `seed`; `e` is the first unit vector.
pub fn deflate_once(sys: SharedSystem, x_hat: &[C64], r: usize, seed: u64) -> Result<DeflatedSystem> {
    let m = sys.domain_dim();
    if x_hat.len() != m {
        return Err(Error::dims(m, x_hat.len()));
    }
    if r >= m {
        return Err(Error::NothingToDeflate { rank: r, dim: m });
    }
    let complex = x_hat.iter().any(|z| z.im != 0.0);
    Ok(DeflatedSystem {
        r: random_matrix(m - r, m, complex, seed),
        e: Vector::basis(m - r, 0),
        base: sys,
        rank: r,
    })
}

impl DeflatedSystem {
    pub fn base(&self) -> &SharedSystem {
        &self.base
    }

    pub fn r_matrix(&self) -> &Matrix {
        &self.r
    }

    pub fn e(&self) -> &Vector {
        &self.e
    }

    /// Rank of the base Jacobian the expansion was built for.
    pub fn base_rank(&self) -> usize {
        self.rank
    }

    fn split<'a>(&self, z: &'a [C64]) -> (&'a [C64], &'a [C64]) {
        z.split_at(self.base.domain_dim())
    }

    /// `y0 = N (R N)^{-1} e` with `N` spanning the trailing right singular
    /// vectors of `J(x_hat)`, so that `J(x_hat) y0 ~ 0` and `R y0 = e`.
    pub fn lift(&self, x_hat: &[C64]) -> Result<Vector> {
        let m = self.base.domain_dim();
        let j = self.base.jacobian(x_hat);
        let n = nullspace_basis(&j, m - self.rank)?;
        let c = least_squares(&self.r.matmul(&n), &self.e)?;
        Ok(Vector::from_vec(x_hat.to_vec()).concat(&n.mul_vec(&c)))
    }

    /// `d/dx [H(x; y) a]`, by central differences.
    fn third_derivative(&self, x: &[C64], y: &[C64], a: &[C64]) -> Matrix {
        let m = x.len();
        let n = self.base.codomain_dim();
        let xn = libm::sqrt(x.iter().map(|z| z.norm_sqr()).sum::<f64>());
        let h = libm::sqrt(f64::EPSILON) * (1.0 + xn);
        let mut out = Matrix::zeros(n, m);
        let mut xp = x.to_vec();
        for j in 0..m {
            let orig = xp[j];
            xp[j] = orig + h;
            let plus = self.base.hessian_action(&xp, y).mul_vec(a);
            xp[j] = orig - h;
            let minus = self.base.hessian_action(&xp, y).mul_vec(a);
            xp[j] = orig;
            let col: Vector = plus.iter().zip(minus.iter()).map(|(p, q)| (p - q) / (2.0 * h)).collect();
            out.set_col(j, &col);
        }
        out
    }
}

impl NonlinearSystem for DeflatedSystem {
    fn domain_dim(&self) -> usize {
        2 * self.base.domain_dim()
    }

    fn codomain_dim(&self) -> usize {
        2 * self.base.codomain_dim() + self.r.rows()
    }

    fn eval(&self, z: &[C64]) -> Vector {
        let (x, y) = self.split(z);
        let jy = self.base.jacobian(x).mul_vec(y);
        let ry = &self.r.mul_vec(y) - &self.e;
        self.base.eval(x).concat(&jy).concat(&ry)
    }

    fn jacobian(&self, z: &[C64]) -> Matrix {
        let (x, y) = self.split(z);
        let (m, n) = (self.base.domain_dim(), self.base.codomain_dim());
        let j = self.base.jacobian(x);
        let mut out = Matrix::zeros(self.codomain_dim(), 2 * m);
        out.set_block(0, 0, &j);
        out.set_block(n, 0, &self.base.hessian_action(x, y));
        out.set_block(n, m, &j);
        out.set_block(2 * n, m, &self.r);
        out
    }

    // derivative of (x, y) -> Jg(x, y) (a, b):
    // [[H(x;a), 0], [T(x;y,a) + H(x;b), H(x;a)], [0, 0]]
    fn hessian_action(&self, z: &[C64], w: &[C64]) -> Matrix {
        let (x, y) = self.split(z);
        let (a, b) = self.split(w);
        let (m, n) = (self.base.domain_dim(), self.base.codomain_dim());
        let ha = self.base.hessian_action(x, a);
        let hb = self.base.hessian_action(x, b);
        let t = self.third_derivative(x, y, a);
        let mut out = Matrix::zeros(self.codomain_dim(), 2 * m);
        out.set_block(0, 0, &ha);
        out.set_block(n, 0, &(&t + &hb));
        out.set_block(n, m, &ha);
        out
    }

    fn label(&self) -> &str {
        "deflated"
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DeflationOptions {
    /// Newton settings for every level; the rank field is ignored.
    pub newton: NewtonOptions,
    /// Relative tolerance of the rank probes.
    pub theta: f64,
    /// Jacobian rank at `x0`. When given, `x0` is taken as the zero estimate
    /// and no Newton run on the original system precedes the first expansion.
    pub initial_rank: Option<usize>,
    pub seed: u64,
}

impl Default for DeflationOptions {
    fn default() -> Self {
        DeflationOptions {
            newton: NewtonOptions {
                residual_tol: 0.0,
                max_iter: 200,
                ..NewtonOptions::default()
            },
            theta: 1e-8,
            initial_rank: None,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DeflationLevel {
    /// Projection rank used by Newton at this level.
    pub rank: usize,
    /// Numerical nullity of the Jacobian at the level's final iterate.
    pub nullity: usize,
    pub trace: IterationTrace,
}

#[derive(Clone, Debug)]
pub struct DeflationResult {
    pub depth_used: usize,
    pub semiregular: bool,
    pub levels: Vec<DeflationLevel>,
    /// The innermost expanded system, or `None` if no expansion happened.
    pub system: Option<DeflatedSystem>,
}

impl DeflationResult {
    pub fn final_trace(&self) -> &IterationTrace {
        &self.levels.last().expect("at least one level").trace
    }

    /// The components of the final iterate that belong to the original unknowns.
    pub fn base_point(&self, base_dim: usize) -> Vector {
        self.final_trace().final_x().slice(0, base_dim)
    }
}

fn probe_rank(sys: &dyn NonlinearSystem, x: &[C64], start: &[C64], theta: f64) -> Result<usize> {
    let svd = full_svd(&sys.jacobian(x))?;
    let s0 = full_svd(&sys.jacobian(start))?.sigma_max();
    Ok(rank_from_sigma(&svd.sigma, theta * svd.sigma_max().max(s0)))
}

fn at_level(level: usize) -> impl Fn(Error) -> Error {
    move |e| Error::AtLevel {
        level,
        source: Box::new(e),
    }
}

/// Deflates repeatedly until the Jacobian nullity at the computed zero drops
/// to `declared_dim` or `max_depth` expansions have been made.
pub fn deflate_to_semiregular(
    sys: SharedSystem,
    x0: &[C64],
    declared_dim: usize,
    max_depth: usize,
    opts: &DeflationOptions,
) -> Result<DeflationResult> {
    if max_depth == 0 {
        return Err(Error::invalid("max_depth must be at least 1"));
    }
    let m0 = sys.domain_dim();
    if x0.len() != m0 {
        return Err(Error::dims(m0, x0.len()));
    }
    let mut levels = Vec::new();
    let mut x = Vector::from_vec(x0.to_vec());
    let rank = match opts.initial_rank {
        Some(r) => r,
        None => {
            let newton = NewtonOptions {
                rank: RankChoice::Auto(opts.theta),
                ..opts.newton
            };
            let trace = newton_rank_r(sys.as_ref(), &x, &newton).map_err(at_level(0))?;
            x = trace.final_x().clone();
            let r = probe_rank(sys.as_ref(), &x, x0, opts.theta).map_err(at_level(0))?;
            levels.push(DeflationLevel {
                rank: trace.rank_used,
                nullity: m0 - r,
                trace,
            });
            r
        }
    };
    if m0.saturating_sub(rank) <= declared_dim {
        return Err(Error::NothingToDeflate { rank, dim: m0 });
    }

    let mut current: SharedSystem = sys;
    let mut rank = rank;
    let mut last = None;
    let mut semiregular = false;
    let mut depth = 0;
    while depth < max_depth {
        depth += 1;
        let seed = opts.seed.wrapping_add(depth as u64 - 1);
        let defl = deflate_once(current.clone(), &x, rank, seed).map_err(at_level(depth))?;
        let start = defl.lift(&x).map_err(at_level(depth))?;
        let dim = defl.domain_dim();
        let r = dim.saturating_sub(declared_dim).min(defl.codomain_dim());
        let newton = NewtonOptions {
            rank: RankChoice::Fixed(r),
            seed: opts.newton.seed.wrapping_add(depth as u64),
            ..opts.newton
        };
        let trace = newton_rank_r(&defl, &start, &newton).map_err(at_level(depth))?;
        x = trace.final_x().clone();
        rank = probe_rank(&defl, &x, &start, opts.theta).map_err(at_level(depth))?;
        let nullity = dim - rank;
        log::debug!("deflation level {depth}: rank {r}, nullity {nullity}");
        levels.push(DeflationLevel { rank: r, nullity, trace });
        let shared: SharedSystem = Arc::new(defl.clone());
        last = Some(defl);
        current = shared;
        if nullity <= declared_dim {
            semiregular = true;
            break;
        }
    }
    Ok(DeflationResult {
        depth_used: depth,
        semiregular,
        levels,
        system: last,
    })
}
