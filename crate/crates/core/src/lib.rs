pub mod cli;
pub mod cycles;
pub mod error;
pub mod gains;
pub mod linalg;
pub mod map;
pub mod poly;
pub mod resultant;
pub mod roots;
pub mod sim;
pub mod spectrum;
pub mod stability;
pub mod verify;

pub use error::{Error, Result};
pub use gains::{GainScheme, GainVector};
pub use linalg::RealMatrix;
pub use map::MapSpec;
pub use poly::Polynomial;
