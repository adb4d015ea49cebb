//! Built-in test problems.
//!
//! Examples 1 and 2 share the manufactured solution
//! `u = (sin(pi x) sin(pi y), cos(pi x) cos(pi y))`, `p = sin(pi x) cos(pi y)`
//! on the unit square with `mu = 1`; Example 1 imposes Dirichlet data on the
//! whole boundary, Example 2 on the vertical sides only, with the exact
//! traction as Neumann data on the horizontal sides. Examples 3 and 4 are
//! channel flows around a circular obstacle driven by a parabolic profile on
//! the vertical sides, with constant and y-split viscosity respectively.

use std::f64::consts::PI;
use std::str::FromStr;

use crate::error::Error;
use crate::mesh::{BoundarySpec, BOUNDARY_TOL};
use crate::space::ProblemSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExampleId {
    Ex1,
    Ex2,
    Ex3,
    Ex4,
}

impl FromStr for ExampleId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s.to_ascii_lowercase().as_str() {
            "ex1" => Ok(ExampleId::Ex1),
            "ex2" => Ok(ExampleId::Ex2),
            "ex3" => Ok(ExampleId::Ex3),
            "ex4" => Ok(ExampleId::Ex4),
            other => Err(Error::InvalidConfig(format!(
                "unknown example `{other}` (expected ex1, ex2, ex3 or ex4)"
            ))),
        }
    }
}

/// Viscosity field of the channel examples.
#[derive(Debug, Clone, Copy)]
pub enum MuSpec {
    Constant(f64),
    /// `top` above `y_split`, `bottom` at or below it.
    SplitY { top: f64, bottom: f64, y_split: f64 },
}

impl MuSpec {
    pub fn eval(&self, _x: f64, y: f64) -> f64 {
        match *self {
            MuSpec::Constant(mu) => mu,
            MuSpec::SplitY { top, bottom, y_split } => {
                if y > y_split {
                    top
                } else {
                    bottom
                }
            }
        }
    }
}

fn exact_u(x: f64, y: f64) -> [f64; 2] {
    [(PI * x).sin() * (PI * y).sin(), (PI * x).cos() * (PI * y).cos()]
}

fn exact_grad_u(x: f64, y: f64) -> [[f64; 2]; 2] {
    [
        [
            PI * (PI * x).cos() * (PI * y).sin(),
            PI * (PI * x).sin() * (PI * y).cos(),
        ],
        [
            -PI * (PI * x).sin() * (PI * y).cos(),
            -PI * (PI * x).cos() * (PI * y).sin(),
        ],
    ]
}

fn exact_p_unit(x: f64, y: f64) -> f64 {
    (PI * x).sin() * (PI * y).cos()
}

fn grad_p_unit(x: f64, y: f64) -> [f64; 2] {
    [
        PI * (PI * x).cos() * (PI * y).cos(),
        -PI * (PI * x).sin() * (PI * y).sin(),
    ]
}

/// Manufactured problem shared by Examples 1 and 2, with the pressure and
/// the forcing scaled by `mu` so that the system scales uniformly:
/// `f = -div(2 mu eps(u)) + grad p = 2 mu pi^2 u + mu grad p_unit`.
fn manufactured(mu: f64) -> ProblemSpec {
    ProblemSpec {
        viscosity: Box::new(move |_, _| mu),
        body_force: Box::new(move |x, y| {
            let u = exact_u(x, y);
            let gp = grad_p_unit(x, y);
            [
                mu * (2.0 * PI * PI * u[0] + gp[0]),
                mu * (2.0 * PI * PI * u[1] + gp[1]),
            ]
        }),
        dirichlet_data: Some(Box::new(exact_u)),
        neumann_data: Some(Box::new(move |x, y, n| {
            traction(mu, exact_grad_u(x, y), mu * exact_p_unit(x, y), n)
        })),
        exact_velocity: Some(Box::new(exact_u)),
        exact_velocity_gradient: Some(Box::new(exact_grad_u)),
        exact_pressure: Some(Box::new(move |x, y| mu * exact_p_unit(x, y))),
    }
}

/// Traction `(2 mu eps(u) - p I) n` from the velocity gradient and pressure.
pub fn traction(mu: f64, grad: [[f64; 2]; 2], p: f64, n: [f64; 2]) -> [f64; 2] {
    let eps = [
        [grad[0][0], 0.5 * (grad[0][1] + grad[1][0])],
        [0.5 * (grad[0][1] + grad[1][0]), grad[1][1]],
    ];
    [
         (2.0 * mu * eps[0][0] - p) * n[0] + 2.0 * mu * eps[0][1] * n[1],
        2.0 * mu * eps[1][0] * n[0] + (2.0 * mu * eps[1][1] - p) * n[1],
    ]
}

/// The channel inflow/outflow profile: `(4y(1-y), 0)` on the vertical sides,
/// zero elsewhere (including the obstacle boundary).
pub fn channel_dirichlet(x: f64, y: f64) -> [f64; 2] {
    if x.abs() < BOUNDARY_TOL || (x - 1.0).abs() < BOUNDARY_TOL {
        [4.0 * y * (1.0 - y), 0.0]
    } else {
        [0.0, 0.0]
    }
}

/// Channel-flow problem with the given viscosity field; no body force, no
/// exact solution.
pub fn channel_problem(mu: MuSpec) -> ProblemSpec {
    ProblemSpec {
        viscosity: Box::new(move |x, y| mu.eval(x, y)),
        body_force: Box::new(|_, _| [0.0, 0.0]),
        dirichlet_data: Some(Box::new(channel_dirichlet)),
        neumann_data: None,
        exact_velocity: None,
        exact_velocity_gradient: None,
        exact_pressure: None,
    }
}

/// Returns the problem data and boundary partition of a built-in example.
/// Examples 3 and 4 default to `mu = 1` and the y-split viscosity,
/// respectively; use [`channel_problem`] for other viscosities.
pub fn builtin_problem(example: ExampleId) -> (ProblemSpec, BoundarySpec) {
    match example {
        ExampleId::Ex1 => (manufactured(1.0), BoundarySpec::all_dirichlet()),
        ExampleId::Ex2 => (manufactured(1.0), BoundarySpec::dirichlet_vertical_sides()),
        ExampleId::Ex3 => (
            channel_problem(MuSpec::Constant(1.0)),
            BoundarySpec::all_dirichlet(),
        ),
        ExampleId::Ex4 => (
            channel_problem(MuSpec::SplitY {
                top: 1.0,
                bottom: 0.01,
                y_split: 0.5,
            }),
            BoundarySpec::all_dirichlet(),
        ),
    }
}

/// Example 1 with viscosity and pressure rescaled by `mu`; used for
/// parameter-robustness studies.
pub fn ex1_scaled(mu: f64) -> (ProblemSpec, BoundarySpec) {
    (manufactured(mu), BoundarySpec::all_dirichlet())
}

/// Globally linear, divergence-free velocity with constant pressure on the
/// mixed-boundary unit square; the scheme reproduces it to solver accuracy.
pub fn patch_problem() -> (ProblemSpec, BoundarySpec) {
    let (a, b, c, d, e) = (0.1, 0.7, 0.3, -0.4, -0.2);
    let p0 = 0.7;
    let u = move |x: f64, y: f64| [a + b * x + c * y, d + e * x - b * y];
    let grad = move |_: f64, _: f64| [[b, c], [e, -b]];
    (
        ProblemSpec {
            viscosity: Box::new(|_, _| 1.0),
            body_force: Box::new(|_, _| [0.0, 0.0]),
            dirichlet_data: Some(Box::new(u)),
            neumann_data: Some(Box::new(move |x, y, n| traction(1.0, grad(x, y), p0, n))),
            exact_velocity: Some(Box::new(u)),
            exact_velocity_gradient: Some(Box::new(grad)),
            exact_pressure: Some(Box::new(move |_, _| p0)),
        },
        BoundarySpec::dirichlet_vertical_sides(),
    )
}

/// Pure-Dirichlet variant of the patch problem; the exact pressure is zero
/// (the one mean-zero constant).
pub fn patch_problem_dirichlet() -> (ProblemSpec, BoundarySpec) {
    let (a, b, c, d, e) = (0.1, 0.7, 0.3, -0.4, -0.2);
    let u = move |x: f64, y: f64| [a + b * x + c * y, d + e * x - b * y];
    let grad = move |_: f64, _: f64| [[b, c], [e, -b]];
    (
        ProblemSpec {
            viscosity: Box::new(|_, _| 1.0),
            body_force: Box::new(|_, _| [0.0, 0.0]),
            dirichlet_data: Some(Box::new(u)),
            neumann_data: None,
            exact_velocity: Some(Box::new(u)),
            exact_velocity_gradient: Some(Box::new(grad)),
            exact_pressure: Some(Box::new(|_, _| 0.0)),
        },
        BoundarySpec::all_dirichlet(),
    )
}
