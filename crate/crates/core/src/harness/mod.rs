pub mod cli;
pub mod config;
pub mod fit;
pub mod io;
pub mod metrics;
pub mod runner;
pub mod sweep;
