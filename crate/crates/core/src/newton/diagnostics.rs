use alloc::vec::Vec;

use super::{IterationTrace, NonlinearSystem};
use crate::error::{Error, Result};
use crate::linalg::{full_svd, rank_from_sigma, Matrix, C64};

/// Central-difference Jacobian, column `j` being `(f(x + h e_j) - f(x - h e_j)) / 2h`.
pub fn finite_diff_jacobian<S: NonlinearSystem + ?Sized>(sys: &S, x: &[C64], h: f64) -> Result<Matrix> {
    if !(h > 0.0) {
        return Err(Error::invalid("step h must be positive"));
    }
    let m = sys.domain_dim();
    if x.len() != m {
        return Err(Error::dims(m, x.len()));
    }
    let mut out = Matrix::zeros(sys.codomain_dim(), m);
    let mut xp = x.to_vec();
    for j in 0..m {
        let orig = xp[j];
        xp[j] = orig + h;
        let plus = sys.eval(&xp);
        xp[j] = orig - h;
        let minus = sys.eval(&xp);
        xp[j] = orig;
        if !plus.is_finite() || !minus.is_finite() {
            return Err(Error::NumericBreakdown(alloc::format!(
                "non-finite value while differencing coordinate {j}"
            )));
        }
        let col: Vec<C64> = plus.iter().zip(minus.iter()).map(|(a, b)| (a - b) / (2.0 * h)).collect();
        out.set_col(j, &col);
    }
    Ok(out)
}

/// `||f_y|| / sigma_r(f_x)` at `(x, y)`, infinite when the numerical nullity
/// of `f_x` exceeds `m - r`.
pub fn condition_number<S, F>(sys_x: &S, f_y: F, x: &[C64], y: &[C64], r: usize) -> Result<f64>
where
    S: NonlinearSystem + ?Sized,
    F: Fn(&[C64], &[C64]) -> Matrix,
{
    let m = sys_x.domain_dim();
    if r == 0 || r > m.min(sys_x.codomain_dim()) {
        return Err(Error::InvalidRank {
            rank: r,
            constraint: alloc::format!("0 < r <= {}", m.min(sys_x.codomain_dim())),
        });
    }
    let fx = full_svd(&sys_x.jacobian(x))?;
    let rank = rank_from_sigma(&fx.sigma, 1e-8 * fx.sigma_max());
    if m - rank > m - r {
        return Ok(f64::INFINITY);
    }
    let sigma_r = fx.sigma[r - 1];
    if sigma_r == 0.0 {
        return Ok(f64::INFINITY);
    }
    let fy = full_svd(&f_y(x, y))?;
    Ok(fy.sigma_max() / sigma_r)
}

/// Least-squares slope of `log s_{k+1}` against `log s_k`.
pub fn fit_convergence_order(shifts: &[f64]) -> Result<f64> {
    if shifts.len() < 3 {
        return Err(Error::InsufficientSteps {
            needed: 3,
            found: shifts.len(),
        });
    }
    if shifts.iter().any(|&s| !(s > 0.0) || !s.is_finite()) {
        return Err(Error::invalid("shifts must be positive and finite"));
    }
    let logs: Vec<f64> = shifts.iter().map(|&s| libm::log(s)).collect();
    let pairs = logs.len() - 1;
    let mx = logs[..pairs].iter().sum::<f64>() / pairs as f64;
    let my = logs[1..].iter().sum::<f64>() / pairs as f64;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for k in 0..pairs {
        let dx = logs[k] - mx;
        sxx += dx * dx;
        sxy += dx * (logs[k + 1] - my);
    }
    if sxx == 0.0 {
        return Err(Error::invalid("shifts are constant; the order is undefined"));
    }
    Ok(sxy / sxx)
}

/// Fits the order over shifts above the rounding floor; quadratic means order >= 1.7.
pub fn classify_quadratic_rate(trace: &IterationTrace) -> Result<(bool, f64)> {
    let window: Vec<f64> = trace
        .steps
        .iter()
        .filter_map(|s| {
            let floor = 10.0 * f64::EPSILON * (1.0 + s.x.norm());
            s.shift.filter(|&v| v > floor)
        })
        .collect();
    if window.len() < 4 {
        return Err(Error::InsufficientSteps {
            needed: 4,
            found: window.len(),
        });
    }
    let order = fit_convergence_order(&window)?;
    Ok((order >= 1.7, order))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::Vector;
    use crate::newton::{FnSystem, LinearSystem};

    fn c(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    #[test]
    fn fd_examples() {
        let sq = FnSystem::new(
            1,
            1,
            |v: &[C64]| Vector::from_vec(alloc::vec![v[0] * v[0]]),
            |v: &[C64]| Matrix::from_fn(1, 1, |_, _| v[0] * 2.0),
        );
        let j = finite_diff_jacobian(&sq, &[c(3.0)], 1e-5).unwrap();
        assert!((j[(0, 0)] - 6.0).norm() < 1e-9);

        let a = Matrix::from_real_rows(&[&[1.0, -2.0, 0.5], &[3.0, 0.0, 1.0]]);
        let lin = LinearSystem {
            a: a.clone(),
            b: Vector::from_real(&[1.0, 1.0]),
        };
        let j = finite_diff_jacobian(&lin, &[c(0.3), c(-1.0), c(2.0)], 1e-5).unwrap();
        assert!((&j - &a).max_abs() < 1e-10);
        assert!(finite_diff_jacobian(&lin, &[c(0.0); 3], 0.0).is_err());
    }

    #[test]
    fn condition_of_difference_map() {
        // f(x, y) = x - y: f_x = 1, f_y = -1
        let fx = FnSystem::new(
            1,
            1,
            |v: &[C64]| Vector::from_vec(alloc::vec![v[0]]),
            |_: &[C64]| Matrix::identity(1),
        );
        let fy = |_: &[C64], _: &[C64]| Matrix::from_real_rows(&[&[-1.0]]);
        let k = condition_number(&fx, fy, &[c(0.7)], &[c(0.7)], 1).unwrap();
        assert!((k - 1.0).abs() < 1e-15);
    }

    #[test]
    fn order_examples() {
        let geo = fit_convergence_order(&[1e-1, 5e-2, 2.5e-2, 1.25e-2]).unwrap();
        assert!((geo - 1.0).abs() < 1e-12);
        let quad = fit_convergence_order(&[1e-2, 1e-4, 1e-8, 1e-16]).unwrap();
        assert!((quad - 2.0).abs() < 1e-12);
        assert!(matches!(
            fit_convergence_order(&[1e-2, 1e-4]),
            Err(Error::InsufficientSteps { .. })
        ));
    }
}
