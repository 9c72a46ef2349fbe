//! Sector-structured spaces, states, local measurements and densities.

mod density;
pub mod io;
mod povm;
pub mod random;
mod space;
mod state;

pub use density::{basis_labels, full_index_map, global_dim, global_layout, BlockedDensity, DensitySector, SectorSlot};
pub use povm::{LocalPovm, PovmElement};
pub use random::{random_povm, random_state};
pub use space::{locate_occupation, occupation_strings, SectorSpace};
pub use state::BlockedPureState;
