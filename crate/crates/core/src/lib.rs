//! Finite-volume solvers for the Euler system with a singular congestion
//! pressure and a transported maximal density `rho_star`.
//!
//! Two asymptotic-preserving schemes are provided: the conservative
//! `(rho, q, Z)` method in [`scheme_zq`] and the `(rho, q)` method with
//! semi-Lagrangian congestion transport in [`scheme_sl`]. Both solve one
//! nonlinear elliptic problem per stage ([`elliptic`]). [`riemann`] holds the
//! exact Riemann solver used as an error oracle, and [`scenario`] drives the
//! standard test problems.

pub mod eos;
pub mod grid;
pub mod linalg;
pub mod numerics;
pub mod riemann;
pub mod elliptic;
pub mod scheme_zq;
pub mod scheme_sl;
pub mod scenario;
pub mod output;

pub use elliptic::{solve_newton, EllipticError, EllipticProblem, NewtonOptions, NewtonReport, Stencil, UnknownKind};
pub use eos::{EosError, PressureLaw};
pub use grid::{total_mass, Boundary, ExteriorState, Grid, GridError, GridState};
pub use output::{write_frame, FrameFormat, OutputError};
pub use riemann::{limit_congested_solution, solve_riemann, PrimState, RiemannError, RiemannFan, Wave};
pub use scenario::{
    run_convergence_study, run_scenario, ConvergenceReport, EvacuationProfile, Scenario, ScenarioError, ScenarioKind,
    ScenarioResult, SchemeKind,
};
pub use scheme_sl::{step_sl, RelaxationConfig, SemiLagConfig};
pub use scheme_zq::{step, SchemeConfig, SchemeError, StepReport};
