//! Single-quadrant approximate discrete Radon transform (ADRT).
//!
//! * [`grid`]: image containers on the vertical strip, sections, dot product.
//! * [`lines`]: digital lines and their duals, recursive and closed form.
//! * [`transform`]: forward transform, back-projection, brute-force oracle.
//! * [`inverse`]: exact inverse by backward substitution, inverse of deltas.
//! * [`range`]: support sets, constraint families and the range validator.
//! * [`format`]: the `ADRT1` text and binary file format.
//! * [`cli`]: the `adrt` command line tool.

pub mod cli;
pub mod error;
pub mod format;
pub mod grid;
pub mod inverse;
pub mod lines;
pub mod range;
pub mod sample;
pub mod transform;

pub use error::{AdrtError, Result};
pub use grid::{dot, make_delta, rewindow, section, section_mut, Kind, SquareImage, StripImage};
pub use inverse::{inverse, inverse_with, InverseOptions};
pub use range::{constraint_count, validate, RangeReport};
pub use sample::{Dtype, Sample};
pub use transform::{backproject, forward, forward_bruteforce, full_adrt};
