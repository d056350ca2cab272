pub mod decomposition;
pub mod error;
pub mod quad;
pub mod rate;
pub mod rng;
pub mod sampling;
pub mod semigroup;
pub mod spectral;
pub mod stable1d;
pub mod tail;
pub mod testfn;
pub mod tv;

pub use error::{Error, Result};
