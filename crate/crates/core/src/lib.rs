//! Interactive communication cost of nearest-lattice-point decoding in two
//! dimensions.
//!
//! The crate is organised around four layers:
//!
//! - [`lattice`]: 2-D lattice geometry. Generator matrices, nearest-plane
//!   (Babai) rounding, exact closest points, Voronoi cells and the
//!   seven-rectangle refinement of a Babai cell together with its round rates.
//! - [`partition`]: rectangular partitions of the unit square, their entropy,
//!   zero-error checks, majorization, the max-rectangle readjustment move and
//!   staircase covers.
//! - [`protocol`]: two-party interactive protocols, transcripts, sum rates,
//!   the bit-exchange protocol for `min(X1, X2)` and seeded Monte Carlo runs.
//! - [`converse`]: the lower-bound computations that show four bits are
//!   necessary and sufficient for comparing two uniform reals.
//!
//! [`format`] holds the lossless float formatting shared by every JSON and
//! CSV writer.

pub mod converse;
pub mod error;
pub mod format;
pub mod lattice;
pub mod numeric;
pub mod partition;
pub mod protocol;

pub use error::{Error, Result};
