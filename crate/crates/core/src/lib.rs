//! Conditional disclosure of secrets over graph-described functions.
//!
//! The crate decides when an instance admits the optimal communication rate
//! 1/2, builds linear schemes over prime fields, verifies them by rank
//! computations and by exhaustive enumeration, and bounds the capacity with
//! an exact linear program over Shannon-type inequalities.

pub mod cli;
pub mod error;
pub mod gf;
pub mod instance;
pub mod lp;
pub mod oracle;
pub mod scheme;
pub mod synthesis;

pub use error::{CdsError, Result};
pub use gf::GfMatrix;
pub use instance::{CdsInstance, EdgeKind, VertexId};
pub use scheme::LinearScheme;
