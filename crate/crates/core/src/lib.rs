//! FFT-based periodic homogenization of two-phase microstructures on
//! reduced frequency sets.
//!
//! The crate solves the periodic Lippmann-Schwinger equation for small-strain
//! elasticity and J2 elasto-plasticity with the basic fixed-point scheme,
//! where the Fourier-space Green-operator step may be restricted to a reduced
//! set of frequencies: either a fixed radial pattern (low-frequency disk plus
//! antipodal sampling rays) or a pattern adapted to the microstructure (the
//! largest Fourier amplitudes of the phase indicator). Post-processing
//! quantifies the macroscopic and local stress error of the reduced solution
//! against the full-grid reference, before and after a compatibility
//! projection, together with per-stage timings.
//!
//! Entry points:
//!
//! * [`spectral::basic_scheme_solve`] — run the scheme on a phase map;
//! * [`sampling`] — build full / radial / adapted frequency masks;
//! * [`postproc`] — compatibility step and error metrics;
//! * [`experiment::run_experiment`] — the full reference-vs-reduced sweep
//!   behind the CLI.

pub mod config;
pub mod error;
pub mod experiment;
pub mod fft;
pub mod field;
pub mod geometry;
pub mod grid;
pub mod io;
pub mod materials;
pub mod postproc;
pub mod sampling;
pub mod spectral;
pub mod tensor;

pub use error::{Error, Result};
