//! Bipartite quantum states under a particle-number superselection rule.

pub mod asymptotics;
pub mod error;
pub mod fock;
pub mod formation;
pub mod linalg;
pub mod locc;
pub mod scalar;
pub mod schmidt;
pub mod selftest;
pub mod teleport;
pub mod tol;

pub use error::{Result, SsrError};
pub use fock::{BlockedDensity, BlockedPureState, LocalPovm, SectorSpace};
pub use schmidt::{ResourcePair, SchmidtBlocks};
pub use scalar::{Complex, Real};
pub use tol::Tolerances;

/// Double-precision instantiations.
pub type PureState = BlockedPureState<f64>;
pub type Density = BlockedDensity<f64>;
pub type Povm = LocalPovm<f64>;
pub type Blocks = SchmidtBlocks<f64>;

/// Single-precision instantiations.
pub type PureState32 = BlockedPureState<f32>;
pub type Density32 = BlockedDensity<f32>;
pub type Povm32 = LocalPovm<f32>;
pub type Blocks32 = SchmidtBlocks<f32>;
