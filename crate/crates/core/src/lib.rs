//! Pseudo-spectral solver for three-dimensional surface water waves over a flat
//! bed, with an auditor that tracks twelve integral conservation laws.
//!
//! The prognostic variables are the surface elevation `eta(x, y, t)` and the
//! surface potential `q(x, y, t)` on a doubly periodic box. The kinematic
//! condition is solved either through weak-form constraint integrals or through
//! a collocated harmonic extension; the dynamic condition is integrated with
//! classical RK4.

pub mod audit;
pub mod dynamics;
pub mod error;
pub mod field;
pub mod grid;
pub mod harmonic;
pub mod io;
pub mod linalg;
pub mod run;
pub mod scenarios;
pub mod spectral;
pub mod testfn;

pub use dynamics::{
    bernoulli_q_t, kinematic_rate, rates, solve_kinematic_nonlocal, step_rk4, KinematicSolver,
    Rates,
};
pub use error::{Error, Result};
pub use field::{SurfaceField, SurfaceState};
pub use grid::{make_grid, GridParams, PeriodicGrid};
pub use harmonic::{
    bottom_trace, dno_eta_t, fit_modal_potential, surface_gradient_of_potential, ModalPotential,
};
pub use spectral::{dealiased_product, integrate_surface, spectral_gradient};
