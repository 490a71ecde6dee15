pub mod catalog;
pub mod cli;
pub mod curvature;
pub mod domain;
pub mod ends;
pub mod error;
pub mod gauss;
pub mod linalg;
pub mod mesh;
pub mod parse;
pub mod quadrature;
pub mod report;
pub mod weierstrass;

pub use error::{Error, Result};
