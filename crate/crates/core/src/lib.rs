pub mod brownian;
pub mod cli;
pub mod controlled;
pub mod error;
pub mod flows;
pub mod ode;
pub mod path;
pub mod path_lift;
pub mod rde;
pub mod sewing;
pub mod stats;
pub mod tensor;

pub use error::{Error, Result};
pub use path::PiecewisePath;
pub use path_lift::RoughPathGrid;
pub use tensor::TruncatedTensor;
