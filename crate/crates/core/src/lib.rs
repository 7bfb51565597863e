pub mod assignment;
pub mod covers;
pub mod curve;
pub mod error;
pub mod experiments;
pub mod glaeser;
pub mod jet;
pub mod poly;
pub mod quad;
pub mod spaces;
pub mod trace;
pub mod tracking;

pub use error::{Error, Result};
pub use jet::{Jet, C64};
