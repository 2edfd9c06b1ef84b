//! Inversion-based estimation of unknown inputs and additive faults for
//! discrete-time LTI systems, including systems whose input-to-output (or
//! fault-to-output) dynamics have zeros outside or on the unit circle.
//!
//! The pieces, bottom-up:
//!
//! * [`linalg`] dense kernels (pseudo-inverse, projectors, spectra, rotations);
//! * [`sysmodel`] plants, stacked horizon operators and transmission zeros;
//! * [`design`] gain synthesis for the minimum-phase, step, ramp and fault filters;
//! * [`runtime`] streaming execution of a designed filter;
//! * [`sim`] plant simulation, transfer-function realization and the case studies;
//! * [`io`] JSON configuration and CSV traces.

pub mod error;
pub mod linalg;
pub mod sysmodel;
pub mod design;

pub use error::{Error, ErrorClass, Result};
pub mod runtime;
pub mod sim;
pub mod io;
