//! Topology optimization with a neural density field behind a fixed Fourier
//! projection.
//!
//! The density at a point is produced by a small network whose input is a bank
//! of cosine/sine features sampled in the band `[h / l_max, h / l_min]`. Since
//! the network only ever sees those frequencies, the member sizes it can
//! express are approximately bounded by `l_min` and `l_max`. The weights are
//! trained with Adam against finite-element compliance, with the volume (or
//! mass) constraint folded in as a growing quadratic penalty.
//!
//! Module map:
//!
//! * [`fea`]: regular-grid bilinear quad FE with a banded Cholesky solver.
//! * [`net`]: frequency sampling, Fourier projection, the network and its
//!   reverse-mode gradients, checkpoints.
//! * [`material`]: SIMP and multi-material interpolation, volume and mass.
//! * [`opt`]: loss, density sensitivities, Adam, continuation and the
//!   gray-fraction termination loop.
//! * [`problems`]: named benchmark problems.
//! * [`simp`]: classic filtered SIMP with optimality-criteria updates.
//! * [`post`]: high resolution extraction, spectra, feature sizes, export.

pub mod error;
pub mod fea;
pub mod material;
pub mod net;
pub mod opt;
pub mod post;
pub mod problems;
pub mod simp;

pub use error::{Result, TopoError};
