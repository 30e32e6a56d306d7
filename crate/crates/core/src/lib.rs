//! Reduction from Wang tile sets to sets of three polycubes (a cross-shaped
//! filler, an encoder and a linker), with a constructive assembler that turns
//! a periodic Wang tiling into a verified periodic tiling of `Z^3`.

pub mod assembler;
pub mod blocks;
pub mod diffsets;
pub mod error;
pub mod planecheck;
pub mod reduction;
pub mod voxel;
pub mod wang;

pub use error::{Error, Result};

/// Golomb rulers over `u64`.
pub type Ruler = diffsets::DifferenceSet<u64>;
