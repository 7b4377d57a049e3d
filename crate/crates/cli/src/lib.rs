//! Configuration, run orchestration, sweeps and reports behind the
//! `fourier-topo` binary.

pub mod config;
pub mod report;
pub mod runner;
pub mod sweep;
