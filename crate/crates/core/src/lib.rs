pub mod error;
pub mod factors;
pub mod linalg;
pub mod operators;
pub mod sampling;
pub mod peirce;
pub mod spectral;
pub mod configurations;
pub mod truncation;
pub mod preservers;
pub mod exactcheck;
pub mod suites;
pub mod cli;
