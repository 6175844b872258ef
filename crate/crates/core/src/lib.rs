//! Double-, triple- and quad-double arithmetic on four-lane SIMD packs, with
//! component-planar matrices and naive, blocked and Strassen multiplication.
//!
//! * [`eft`]: error-free transformations and renormalization.
//! * [`simd`]: the lane abstraction, backends and packed primitives.
//! * [`mpf`]: `Double2`/`Double3`/`Double4` and their packed forms.
//! * [`linalg`]: [`MpMatrix`] and the multiplication kernels.
//! * [`oracle`]: exact dyadic arithmetic for verification.
//! * [`random`]: seeded generators for normalized values.

pub mod eft;
pub mod error;
pub mod linalg;
pub mod mpf;
pub mod oracle;
pub mod random;
pub mod simd;

pub use error::{MpfError, Result};
pub use linalg::{Algorithm, KernelVariant, MpMatrix, StrassenStats};
pub use mpf::{Double2, Double3, Double4, MpFormat, PackedD2, PackedD3, PackedD4, Precision};
pub use oracle::{DyadicMatrix, DyadicReal};
pub use random::MpRng;
pub use simd::{Backend, LaneQuad};
