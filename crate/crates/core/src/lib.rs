//! Exact and numeric verification of the cubic equations for four-site
//! R-matrices, plane transfer matrices on a periodic lattice, and an
//! alternating least squares search for intertwiners.
//!
//! Operators act on column vectors. Multi-site indices are flattened row-major
//! with the leftmost site slowest; site lists are zero-based.

pub mod cubic;
pub mod error;
pub mod lattice;
pub mod pauli;
pub mod report;
pub mod rmatrix;
pub mod solver;
pub mod sparse;
pub mod tensor;

pub use cubic::{CubicOptions, Quadruple, Side};
pub use error::{Error, Result};
pub use lattice::{LatticeSpec, Layout, PlacementPlan, PlanKind, TransferMatrix};
pub use pauli::{BivariatePolynomial, GaussianRational, PauliOperator, PauliString, Variable};
pub use report::ResidualReport;
pub use rmatrix::{Convention, RMatrixFour};
pub use solver::{AlsConfig, AlsInit, AlsTrace};
pub use sparse::SparseOperator;
pub use tensor::{DenseTensor, WiringDiagram};
