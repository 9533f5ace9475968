pub mod arma;
pub mod battery;
pub mod cli;
pub mod error;
pub mod lifetime;
pub mod markov;
pub mod polynomials;
pub mod renewal;
pub mod simulate;
pub mod stats;
pub mod verify;

pub use error::{Error, Result};
