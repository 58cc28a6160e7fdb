//! Local discontinuous Galerkin discretization of steady p-Navier-Stokes and
//! p-Stokes flow on the square `(-1, 1)^2`, with a convergence harness for a
//! manufactured solution whose pressure has a point singularity.
//!
//! Velocities are broken polynomials of degree `k`, pressures continuous
//! Lagrange elements of degree `k` with zero mean. The nonlinear system is
//! solved by Newton's method with a sparse direct solver.
//!
//! The geometric and constitutive layers ([`mesh`], [`quadrature`],
//! [`constitutive`], the reference bases) are generic over [`scalar::Real`];
//! the assembled discretization works in `f64`. Aliases for the `f64`
//! instances live at the crate root.
//!
//! ```no_run
//! use pnse_ldg::experiment::{run_series, RunConfig};
//! use pnse_ldg::manufactured::CaseId;
//!
//! let config = RunConfig { p: vec![2.5], case: CaseId::Two, levels: vec![1, 2, 3], ..Default::default() };
//! for report in run_series(&config).unwrap() {
//!     println!("p = {}: {:?}", report.p, report.pressure_eocs());
//! }
//! ```

pub mod constitutive;
pub mod dgops;
pub mod error;
pub mod errors;
pub mod experiment;
pub mod femspace;
pub mod linalg;
pub mod manufactured;
pub mod mesh;
pub mod quadrature;
pub mod scalar;
pub mod solver;
pub mod system;
pub mod tensor;

pub use error::{Error, Result};
pub use femspace::{BrokenField, ContinuousField, FemSpace, FieldKind};
pub use manufactured::{CaseId, ExponentBase, ManufacturedCase, Mode};
pub use solver::{newton_solve, NewtonConfig};
pub use system::{DiscreteSystem, SystemConfig};

pub type Mesh = mesh::Mesh<f64>;
pub type ConstitutiveParams = constitutive::ConstitutiveParams<f64>;
pub type StressTangent = constitutive::StressTangent<f64>;
pub type TriangleRule = quadrature::TriangleRule<f64>;
pub type EdgeRule = quadrature::EdgeRule<f64>;
pub type Mat2 = tensor::Mat2<f64>;
