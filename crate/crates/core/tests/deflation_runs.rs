use std::sync::Arc;

use proptest::prelude::*;
use rankr_core::catalog::lookup;
use rankr_core::deflation::{deflate_once, deflate_to_semiregular, DeflationOptions};
use rankr_core::linalg::{full_svd, numerical_rank};
use rankr_core::newton::{NonlinearSystem, SharedSystem};
use rankr_core::polysys::PolySystem;
use rankr_core::{Error, Vector, C64};

fn c(x: f64) -> C64 {
    C64::new(x, 0.0)
}

fn branch_opts(seed: u64) -> DeflationOptions {
    DeflationOptions {
        initial_rank: Some(1),
        seed,
        ..DeflationOptions::default()
    }
}

#[test]
fn branch_is_semiregular_after_one_level() {
    let e = lookup("ultrasingular-branch").unwrap();
    let res = deflate_to_semiregular(e.system.clone(), &e.reference_x0, 1, 3, &branch_opts(0)).unwrap();
    let d = res.system.as_ref().unwrap();
    assert_eq!((d.domain_dim(), d.codomain_dim()), (8, 9));
    let z = res.final_trace().final_x();
    let j = d.jacobian(z);
    let s1 = full_svd(&j).unwrap().sigma_max();
    assert_eq!(8 - numerical_rank(&j, 1e-8 * s1).unwrap().0, 1);
}

#[test]
fn same_seed_same_run() {
    let e = lookup("ultrasingular-branch").unwrap();
    let a = deflate_to_semiregular(e.system.clone(), &e.reference_x0, 1, 3, &branch_opts(4)).unwrap();
    let b = deflate_to_semiregular(e.system.clone(), &e.reference_x0, 1, 3, &branch_opts(4)).unwrap();
    assert_eq!(a.levels, b.levels);
    assert_eq!(a.system.unwrap().r_matrix(), b.system.unwrap().r_matrix());
}

#[test]
fn cyclic_ultrasingular_point_lifts_to_a_regular_zero() {
    let sys: SharedSystem = Arc::new(
        PolySystem::parse(
            &["x1", "x2", "x3", "x4"],
            &["x1+x2+x3+x4", "x1*x2+x2*x3+x3*x4+x4*x1", "x1*x2*x3+x2*x3*x4+x3*x4*x1+x4*x1*x2", "x1*x2*x3*x4-1"],
        )
        .unwrap(),
    );
    let x = [c(1.0), c(-1.0), c(-1.0), c(1.0)];
    let j = sys.jacobian(&x);
    assert_eq!(numerical_rank(&j, 1e-10).unwrap().0, 2);
    let d = deflate_once(sys, &x, 2, 3).unwrap();
    let z = d.lift(&x).unwrap();
    assert!(d.eval(&z).norm() < 1e-12);
    let jd = d.jacobian(&z);
    let s1 = full_svd(&jd).unwrap().sigma_max();
    let (r, _) = numerical_rank(&jd, 1e-8 * s1).unwrap();
    assert_eq!(r, d.domain_dim());
}

#[test]
fn failures_report_the_level() {
    let e = lookup("ultrasingular-branch").unwrap();
    let opts = DeflationOptions {
        initial_rank: Some(1),
        newton: rankr_core::NewtonOptions {
            max_iter: 0,
            ..DeflationOptions::default().newton
        },
        ..DeflationOptions::default()
    };
    let err = deflate_to_semiregular(e.system.clone(), &e.reference_x0, 1, 3, &opts).unwrap_err();
    assert!(matches!(err, Error::AtLevel { level: 1, .. }), "{err:?}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn expanded_eval_is_the_three_blocks(vals in proptest::collection::vec(-2.0f64..2.0, 8), seed in 0u64..1000) {
        let e = lookup("ultrasingular-branch").unwrap();
        let d = deflate_once(e.system.clone(), &[c(0.0), c(0.0), c(2.0), c(0.5)], 1, seed).unwrap();
        let z = Vector::from_real(&vals);
        let (x, y) = z.split_at(4);
        let want = e.system.eval(x)
            .concat(&e.system.jacobian(x).mul_vec(y))
            .concat(&(&d.r_matrix().mul_vec(y) - d.e()));
        prop_assert!((&d.eval(&z) - &want).norm() <= 1e-13 * (1.0 + want.norm()));
    }

    #[test]
    fn lifted_branch_points_are_zeros(s in 0.3f64..3.0, seed in 0u64..1000) {
        let e = lookup("ultrasingular-branch").unwrap();
        let x = [c(0.0), c(0.0), c(s), c(1.0 / s)];
        let d = deflate_once(e.system.clone(), &x, 1, seed).unwrap();
        let z = d.lift(&x).unwrap();
        let scale = 1.0 + z.norm() * d.r_matrix().max_abs();
        prop_assert!(d.eval(&z).norm() <= 1e-12 * scale);
    }
}
