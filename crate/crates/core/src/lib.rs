pub mod bundle;
pub mod cli;
pub mod cauchy;
pub mod error;
pub mod io;
pub mod quat;
pub mod random;
pub mod series;
pub mod several;
pub mod slice;
pub mod verify;

pub use error::{Error, Result};
pub use quat::{Frame, Quaternion, UnitImaginary, UnitQuaternion};
pub use series::{EvalPoint, MultiSeries};
