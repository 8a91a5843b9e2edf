//! Brute-force reference implementations ("oracles") and random fixture
//! generators. Everything here favors obvious correctness over speed and
//! shares no algorithmic machinery with the main crate: component tracking
//! by breadth-first search instead of union-find, persistent Betti tables
//! instead of matrix-reduction pairing, exhaustive matching enumeration
//! instead of assignment solvers.

pub mod betti;
pub mod fixtures;
pub mod naive;

pub use betti::rips_betti_oracle;
pub use naive::{
    hausdorff_oracle, ols_residual_oracle, pca_power_oracle, sweep0_oracle, wasserstein_oracle,
};
