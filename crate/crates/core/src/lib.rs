//! Log-stretch frequency-wavenumber dip moveout (DMO) for constant-velocity,
//! common-offset sections.
//!
//! The crate is organised around the five-step log-stretch DMO process:
//!
//! 1. stretch each trace onto a uniform log-time axis `τ = ln(t / t_c)` ([`stretch`]),
//! 2. take the 2-D transform over `(τ, x)` ([`fk`]),
//! 3. multiply by a DMO phase factor evaluated from `ξ = h k / Ω` ([`kernel`]),
//! 4. transform back ([`fk`]),
//! 5. undo the stretch ([`stretch`]).
//!
//! [`pipeline`] drives the steps and builds impulse responses. [`oracle`]
//! holds the independent ground truth (the kinematic DMO ellipse and direct
//! Hale/Black integrals) and [`analysis`] splits operator phases into
//! space and time parts and measures impulse-response geometry.
//! [`gridio`] reads and writes the `FKG1` section format and CSV reports.

pub mod analysis;
pub mod error;
pub mod fk;
pub mod gridio;
pub mod kernel;
pub mod oracle;
pub mod pipeline;
pub mod stretch;

pub use error::{DmoError, Result};
pub use fk::{Section, SingularPolicy, Spectrum};
pub use kernel::{FkPoint, OperatorKind, PhaseResult, Validity};

pub use stretch::{StretchedTrace, Trace};

pub use pipeline::DmoConfig;
pub use rustfft::num_complex::Complex64;
