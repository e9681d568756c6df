pub mod atom;
pub mod circuit;
pub mod constants;
pub mod design;
pub mod dynamics;
pub mod eqr;
pub mod error;
pub mod exec;
pub mod measurement;
pub mod merit;
pub mod study;

pub use error::{Error, Result};
