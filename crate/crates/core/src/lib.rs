pub mod error;
pub mod fixtures;
pub mod format;
pub mod hermitian;
pub mod lfr;
pub mod multipartite;
pub mod random;
pub mod sdp;
pub mod sprocedure;
pub mod witness;

pub use error::{Error, Result};
