//! Numerical intrinsic-graph calculus in the first Heisenberg group.
//!
//! The crate provides, at desk scale:
//!
//! * exact group arithmetic, left-invariant frames, ball-box distances and
//!   the Lipschitz double-cone test ([`heis`]);
//! * a discrete intrinsic calculus on sampled graph functions: intrinsic
//!   gradients, `Δ_f`, Dirichlet energy, area, normals, characteristic
//!   curves, excess, and integration-by-parts residuals ([`grid`],
//!   [`calculus`]);
//! * constructors for the surfaces of interest, from vertical planes to
//!   herringbone and flex surfaces and the ray-fan cones built over interval
//!   complements and circle subsets ([`zoo`]);
//! * candidate-calibration slope fields with divergence, interface-jump and
//!   box-flux diagnostics ([`calibration`]);
//! * contact potentials and flows, first-variation functionals, singular
//!   asymptotics fits, stretch-limit expansions and indicator convergence
//!   ([`variation`], [`limits`]);
//! * mesh and file output ([`mesh`]).

pub mod calculus;
pub mod calibration;
pub mod error;
pub mod expr;
pub mod grid;
pub mod heis;
pub mod limits;
pub mod mesh;
pub mod variation;
pub mod zoo;

pub use error::{Error, Result};
