//! Ready-to-run example systems with reference starting points and the
//! outcomes they are known to produce.

use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg::{Matrix, Vector, C64};
use crate::newton::{newton_rank_r, NewtonOptions, NonlinearSystem, SharedSystem};
use crate::polysys::{parse_poly, PolySystem};

mod eigen;
mod gcd;

pub use eigen::{make_eigen, vec_columns, EigenInstance};
pub use gcd::{make_gcd, scaling_independent_distance, GcdInstance};

/// Every key accepted by [`lookup`].
pub const NAMES: [&str; 9] = [
    "circle",
    "illustrative",
    "cyclic4",
    "cyclic4-bifurcation",
    "gcd-paper",
    "eigen-paper",
    "eigen-paper-perturbed",
    "eigen-refine",
    "ultrasingular-branch",
];

/// Where an expected value comes from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Origin {
    /// Reported for the published run.
    Published,
    /// Obtained by an independent computation.
    Computed,
    /// Follows by hand from the definition.
    Exact,
}

/// A documented outcome of running an entry.
#[derive(Clone, Debug, PartialEq)]
pub struct Expected {
    pub label: &'static str,
    /// Start point when it differs from the entry's reference point.
    pub x0: Option<Vector>,
    /// Projection rank when it differs from the recommended one.
    pub rank: Option<usize>,
    pub values: Vec<f64>,
    pub tol: f64,
    pub origin: Origin,
}

impl Expected {
    fn new(label: &'static str, values: &[f64], tol: f64, origin: Origin) -> Self {
        Expected {
            label,
            x0: None,
            rank: None,
            values: values.to_vec(),
            tol,
            origin,
        }
    }

    fn starting_at(mut self, x0: &[f64]) -> Self {
        self.x0 = Some(Vector::from_real(x0));
        self
    }

    fn at_rank(mut self, r: usize) -> Self {
        self.rank = Some(r);
        self
    }
}

#[derive(Clone)]
pub struct CatalogEntry {
    pub name: String,
    pub system: SharedSystem,
    pub recommended_rank: usize,
    pub reference_x0: Vector,
    pub expected: Vec<Expected>,
    /// Settings for the reference run.
    pub options: NewtonOptions,
}

impl core::fmt::Debug for CatalogEntry {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("CatalogEntry")
            .field("name", &self.name)
            .field("domain_dim", &self.system.domain_dim())
            .field("codomain_dim", &self.system.codomain_dim())
            .field("recommended_rank", &self.recommended_rank)
            .field("reference_x0", &self.reference_x0)
            .finish()
    }
}

impl CatalogEntry {
    pub fn expected(&self, label: &str) -> Option<&Expected> {
        self.expected.iter().find(|e| e.label == label)
    }

    /// Reference-run settings at another rank.
    pub fn options_at(&self, r: usize) -> NewtonOptions {
        NewtonOptions {
            rank: crate::newton::RankChoice::Fixed(r),
            ..self.options
        }
    }
}

fn entry(
    name: &str,
    system: SharedSystem,
    rank: usize,
    x0: Vector,
    expected: Vec<Expected>,
) -> CatalogEntry {
    CatalogEntry {
        name: String::from(name),
        system,
        recommended_rank: rank,
        reference_x0: x0,
        expected,
        // runs stop on the shift, as stationary points need not be zeros
        options: NewtonOptions {
            residual_tol: 0.0,
            ..NewtonOptions::default()
        }
        .with_rank(rank),
    }
}

fn poly_system(label: &str, vars: &[&str], equations: &[&str]) -> PolySystem {
    PolySystem::parse(vars, equations)
        .expect("catalog equations parse")
        .with_label(label)
}

pub fn make_circle() -> CatalogEntry {
    let sys = poly_system(
        "circle",
        &["x", "y"],
        &[
            "x^3 + x*y^2 - x + 2*x^2 + 2*y^2 - 2",
            "x^2*y + y^3 - y - 3*x^2 - 3*y^2 + 3",
        ],
    );
    entry(
        "circle",
        Arc::new(sys),
        1,
        Vector::from_real(&[1.8, 0.6]),
        vec![
            Expected::new("limit", &[0.928428592, 0.3715109], 1e-6, Origin::Published),
            Expected::new("limit", &[0.8007609, 0.5989721], 1e-6, Origin::Published).starting_at(&[0.4, 0.2]),
            Expected::new("zero", &[0.6, 0.8], 0.0, Origin::Exact),
        ],
    )
}

pub fn make_illustrative() -> CatalogEntry {
    let vars = ["x", "y", "z"];
    let p = |t: &str| parse_poly(t, &vars).expect("catalog factor parses");
    let sphere = p("x^2 + y^2 + z^2 - 1");
    let curve_y = p("y - x^2");
    let curve_z = p("z - x^3");
    let prod = |fs: &[&crate::polysys::Polynomial]| {
        fs.iter()
            .skip(1)
            .fold(fs[0].clone(), |acc, f| acc.times(f).expect("same variables"))
    };
    let sys = PolySystem::new(vec![
        prod(&[&curve_y, &sphere, &p("x - 1")]),
        prod(&[&curve_z, &sphere, &p("y - 1")]),
        prod(&[&curve_y, &curve_z, &sphere, &p("z - 1")]),
    ])
    .expect("consistent variables")
    .with_label("illustrative");
    let mut e = entry(
        "illustrative",
        Arc::new(sys),
        3,
        Vector::from_real(&[1.1, 0.9, 1.05]),
        vec![
            Expected::new("point", &[1.0, 1.0, 1.0], 1e-10, Origin::Computed),
            Expected::new("sphere", &[1.0], 1e-10, Origin::Computed)
                .starting_at(&[0.7, 0.6, 0.5])
                .at_rank(1),
            Expected::new("curve", &[], 1e-9, Origin::Computed)
                .starting_at(&[0.5, 0.3, 0.2])
                .at_rank(2),
        ],
    );
    // the rank-3 run creeps along a line of zeros, so stop on the residual
    e.options.residual_tol = 1e-12;
    e
}

const CYCLIC_VARS: [&str; 4] = ["x1", "x2", "x3", "x4"];
const CYCLIC_REST: [&str; 3] = [
    "x1+x2+x3+x4",
    "x1*x2*x3+x2*x3*x4+x3*x4*x1+x4*x1*x2",
    "x1*x2*x3*x4-1",
];

/// Near the branch `x1 = -x3, x2 = -x4, x3 x4 = 1` at `t = 1`.
pub const CYCLIC_X_HAT: [f64; 4] = [0.822879063773473, 1.215245403637205, -0.822879063773473, -1.215245403637205];
/// Stationary point of the rank-3 run at `t = 0.9999`.
pub const CYCLIC_X_TILDE: [f64; 4] = [0.822879061867739, 1.215245401950727, -0.822879062858240, -1.215245403413521];

pub fn make_cyclic4(t: C64) -> CatalogEntry {
    let vars = CYCLIC_VARS;
    let second = parse_poly("x2*x3+x3*x4+x4*x1", &vars)
        .and_then(|q| parse_poly("x1*x2", &vars).map(|p| (p, q)))
        .and_then(|(p, q)| p.scale(t).plus(&q))
        .expect("cyclic terms parse");
    let eqs = vec![
        parse_poly(CYCLIC_REST[0], &vars).expect("parse"),
        second,
        parse_poly(CYCLIC_REST[1], &vars).expect("parse"),
        parse_poly(CYCLIC_REST[2], &vars).expect("parse"),
    ];
    let sys = PolySystem::new(eqs).expect("consistent variables").with_label("cyclic4");
    let mut expected = vec![Expected::new("zero at t = 1", &[1.0, 1.0, -1.0, -1.0], 0.0, Origin::Exact)];
    if t == C64::new(0.9999, 0.0) {
        expected.push(Expected::new("residual plateau", &[1.0e-4], 5e-5, Origin::Published));
        expected.push(Expected::new("stationary point", &CYCLIC_X_TILDE, 1e-6, Origin::Published));
        expected.push(Expected::new("nearest branch point", &CYCLIC_X_HAT, 1e-7, Origin::Published));
    }
    entry(
        "cyclic4",
        Arc::new(sys),
        3,
        Vector::from_real(&[0.8, 1.2, -0.8, -1.2]),
        expected,
    )
}

/// Cyclic-4 with the parameter `t` as a fifth unknown.
pub fn make_cyclic4_bifurcation() -> CatalogEntry {
    let vars = ["x1", "x2", "x3", "x4", "t"];
    let sys = poly_system(
        "cyclic4-bifurcation",
        &vars,
        &[
            CYCLIC_REST[0],
            "t*x1*x2+x2*x3+x3*x4+x4*x1",
            CYCLIC_REST[1],
            CYCLIC_REST[2],
        ],
    );
    let mut x0 = CYCLIC_X_TILDE.to_vec();
    x0.push(0.9999);
    let limit = [0.822879063773473, 1.215245403637205, -0.822879063773474, -1.215245403637204, 1.0];
    entry(
        "cyclic4-bifurcation",
        Arc::new(sys),
        4,
        Vector::from_real(&x0),
        vec![
            Expected::new("limit", &limit, 1e-12, Origin::Published),
            Expected::new("residual", &[4.44e-16], 1e-13, Origin::Published),
        ],
    )
}

pub const GCD_P: &str = "-1.3333-2.3333*x-4*x^2-3.6667*x^3-2.6667*x^4-x^5";
pub const GCD_Q: &str = "-1.9999+x+x^2+3*x^3";
/// Computed GCD reported for the published run.
pub const GCD_U: [f64; 3] = [1.08975633389, 1.08976717147, 1.08978342823];

pub fn reported_gcd() -> GcdInstance {
    let p = parse_poly(GCD_P, &["x"]).expect("parse");
    let q = parse_poly(GCD_Q, &["x"]).expect("parse");
    make_gcd(p, q, 2).expect("degree bound holds")
}

pub fn make_gcd_paper() -> CatalogEntry {
    let g = reported_gcd();
    let r = |v: &[f64]| Vector::from_real(v).into_vec();
    let x0 = g
        .pack(&r(&[1.6, 1.4, 1.0]), &r(&[-1.5, -1.0, -1.6, -1.0]), &r(&[-2.0, 2.8]))
        .expect("layout fits");
    let rank = g.rank();
    entry(
        "gcd-paper",
        Arc::new(g),
        rank,
        x0,
        vec![
            Expected::new("residual plateau", &[8.3e-6], 0.0, Origin::Published),
            Expected::new("gcd", &GCD_U, 1e-8, Origin::Published),
        ],
    )
}

/// Matrix with eigenvalue 3 of multiplicity support `2 x 2`.
pub fn eigen_matrix() -> Matrix {
    Matrix::from_real_rows(&[
        &[-1.0, 0.0, 3.0, 0.0, 2.0, 1.0],
        &[1.0, 1.0, -1.0, 1.0, 0.0, 0.0],
        &[-2.0, -1.0, 4.0, 1.0, 1.0, 0.0],
        &[3.0, -3.0, -3.0, 5.0, -1.0, -1.0],
        &[-3.0, 1.0, 3.0, -1.0, 5.0, 2.0],
        &[1.0, 0.0, -1.0, 0.0, -1.0, 2.0],
    ])
}

/// The perturbation added to [`eigen_matrix`].
pub fn eigen_perturbation() -> Matrix {
    Matrix::from_real_rows(&[
        &[0.1, -0.7, -0.4, -1.0, 0.2, 0.6],
        &[-0.2, 0.1, -0.1, -0.5, 0.5, 0.0],
        &[0.3, -0.8, -0.6, -0.1, 0.4, 0.1],
        &[-0.5, 0.0, 0.1, 0.7, -0.2, 0.5],
        &[-0.2, -0.2, -0.8, -0.7, -0.4, -0.5],
        &[-0.2, -0.1, 0.8, -0.5, -0.7, -0.6],
    ])
    .scaled(C64::new(1e-6, 0.0))
}

pub const EIGEN_LAMBDA0: f64 = 2.9;

fn eigen_entry(name: &str, inst: EigenInstance, expected: Vec<Expected>) -> Result<CatalogEntry> {
    let x0 = inst.initial_iterate(C64::new(EIGEN_LAMBDA0, 0.0))?;
    let rank = inst.rank();
    Ok(entry(name, Arc::new(inst), rank, x0, expected))
}

pub fn make_eigen_paper() -> Result<CatalogEntry> {
    eigen_entry(
        "eigen-paper",
        make_eigen(eigen_matrix(), 2, 2)?,
        vec![Expected::new("lambda", &[3.0], 1e-12, Origin::Published)],
    )
}

pub fn make_eigen_paper_perturbed() -> Result<CatalogEntry> {
    let a = &eigen_matrix() + &eigen_perturbation();
    eigen_entry(
        "eigen-paper-perturbed",
        make_eigen(a, 2, 2)?,
        vec![
            Expected::new("lambda", &[3.00000102], 1e-6, Origin::Published),
            Expected::new("forward error", &[1.02e-6], 1e-7, Origin::Published),
        ],
    )
}

/// Starts from the stationary point of the perturbed run with the matrix as
/// an extra unknown, so it runs that iteration first.
pub fn make_eigen_refine() -> Result<CatalogEntry> {
    let perturbed = make_eigen_paper_perturbed()?;
    let trace = newton_rank_r(perturbed.system.as_ref(), &perturbed.reference_x0, &perturbed.options)?;
    let a = &eigen_matrix() + &eigen_perturbation();
    let inst = make_eigen(a.clone(), 2, 2)?.with_matrix_unknown();
    let x0 = trace.final_x().concat(&vec_columns(&a));
    let rank = inst.rank();
    Ok(entry(
        "eigen-refine",
        Arc::new(inst),
        rank,
        x0,
        vec![
            Expected::new("initial residual", &[2.99e-7], 0.0, Origin::Published),
            Expected::new("final residual", &[1.17e-15], 1e-13, Origin::Published),
            Expected::new("backward error", &[7.59e-7], 0.0, Origin::Published),
        ],
    ))
}

pub fn make_ultrasingular_branch() -> CatalogEntry {
    let sys = poly_system(
        "ultrasingular-branch",
        &CYCLIC_VARS,
        &[
            "x1^3+x2^2+x3^2*x4^2-1",
            "x1^2+x2^3+x3^2*x4^2-1",
            "x1^2+x2^2+x3^3*x4^3-1",
        ],
    );
    entry(
        "ultrasingular-branch",
        Arc::new(sys),
        1,
        Vector::from_real(&[0.001, 0.003, 0.499, 2.002]),
        vec![
            Expected::new("on branch", &[0.0, 0.0, 2.0, 0.5], 0.0, Origin::Exact),
            Expected::new("deflated rank", &[7.0], 0.0, Origin::Published),
            Expected::new(
                "limit",
                &[0.0, 0.0, 0.499435807628269, 2.002259318867864],
                1e-4,
                Origin::Published,
            ),
        ],
    )
}

/// Builds the entry for a key in [`NAMES`]; `cyclic4` uses `t = 0.9999`.
pub fn lookup(name: &str) -> Result<CatalogEntry> {
    lookup_with(name, None)
}

/// Like [`lookup`], with an explicit cyclic-4 parameter.
pub fn lookup_with(name: &str, t: Option<C64>) -> Result<CatalogEntry> {
    if t.is_some() && name != "cyclic4" {
        return Err(Error::invalid(alloc::format!("`{name}` takes no parameter t")));
    }
    let res = match name {
        "circle" => make_circle(),
        "illustrative" => make_illustrative(),
        "cyclic4" => make_cyclic4(t.unwrap_or(C64::new(0.9999, 0.0))),
        "cyclic4-bifurcation" => make_cyclic4_bifurcation(),
        "gcd-paper" => make_gcd_paper(),
        "eigen-paper" => make_eigen_paper()?,
        "eigen-paper-perturbed" => make_eigen_paper_perturbed()?,
        "eigen-refine" => make_eigen_refine()?,
        "ultrasingular-branch" => make_ultrasingular_branch(),
        other => return Err(Error::UnknownSystem(String::from(other))),
    };
    Ok(res)
}
