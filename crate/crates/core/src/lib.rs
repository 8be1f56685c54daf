pub mod basis;
pub mod cli;
pub mod config;
pub mod dynamics;
pub mod generator;
pub mod linalg;
pub mod witness;
