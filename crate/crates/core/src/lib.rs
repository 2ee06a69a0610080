pub mod cli;
pub mod darboux;
pub mod error;
pub mod evolution;
pub mod metrics;
pub mod nft;
pub mod optimizer;
pub mod pulse;
pub mod spectrum;
pub mod symmetric;

pub use error::{Error, Result};
pub use num_complex::Complex64;
