//! Phase retrieval of even-length discrete analytic signals from FROG
//! intensity measurements.
//!
//! The crate covers the forward model (time and frequency domain), the
//! ambiguity group of the measurement map, closed-form circle intersection
//! solvers, and a three-stage recovery pipeline that reconstructs a signal
//! from `3N/2 + 1` measurements up to global sign, integer circular shift
//! and time-reversed conjugation.
//!
//! ```
//! use frogpr::{analytic, frog, recovery};
//! use rand::SeedableRng;
//!
//! let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
//! let z = analytic::generic_analytic(16, &mut rng).unwrap();
//! let params = frog::FrogParams::new(16, 3).unwrap();
//! let plan = frog::plan_indices(&params).unwrap();
//! let meas = frog::frog_measurements_time(&z, &params, Some(&plan.entries())).unwrap();
//! let out = recovery::recover(&meas, &plan, &recovery::RecoveryConfig::default()).unwrap();
//! let eq = frogpr::ambiguity::equivalent_up_to_group(&out.signal, &z, 1e-6).unwrap();
//! assert!(eq.equivalent);
//! ```

// `!(x > 0.0)` and friends reject NaN on purpose.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod ambiguity;
pub mod analytic;
pub mod circles;
pub mod error;
pub mod frog;
pub mod io;
pub mod recovery;
pub mod selftest;
pub mod spectral;

pub use error::{Error, Result};
pub use num_complex::Complex64;
pub use spectral::{Spectrum, TimeSignal};
