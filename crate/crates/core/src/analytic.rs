//! Discrete analytic signals.
//!
//! A real signal `x` is turned into its analytic counterpart by keeping the
//! DC term, doubling the positive-frequency bins, keeping the Nyquist bin
//! (even `N`), and zeroing everything above. The result has `Re = x` and its
//! imaginary part is the discrete Hilbert transform of `x`.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::spectral::{dft, idft, Spectrum, TimeSignal};

/// Default analyticity tolerance, relative to the spectrum's largest modulus.
pub const DEFAULT_RELATIVE_TOL: f64 = 1e-9;

/// Floor on `|ẑ_0|`, `|ẑ_1|` relative to `max |ẑ_k|` used by
/// [`generic_analytic`] to reject non-generic draws.
pub const GENERICITY_REJECT: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct RealSignal {
    values: Vec<f64>,
}

impl RealSignal {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::InvalidParams(format!(
                "signal length must be at least 2, got {}",
                values.len()
            )));
        }
        Ok(Self { values })
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }

    #[allow(clippy::len_without_is_empty)]
    pub fn len(&self) -> usize {
        self.values.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnalyticityReport {
    pub is_analytic: bool,
    /// Largest modulus among the coefficients that must vanish, or largest
    /// imaginary part among those that must be real, whichever is bigger.
    pub max_violation: f64,
}

/// Highest index that may be nonzero in the spectrum of an analytic signal.
pub fn last_support_index(n: usize) -> usize {
    n / 2
}

pub fn make_analytic(x: &RealSignal) -> TimeSignal {
    let n = x.len();
    let z = TimeSignal::from_real(x.as_slice()).expect("length checked by RealSignal");
    let spec = dft(&z);
    let coeffs = spec
        .as_slice()
        .iter()
        .enumerate()
        .map(|(k, &c)| {
            if k == 0 {
                // The DC bin of a real signal is real; drop rounding noise.
                Complex64::new(c.re, 0.0)
            } else if n.is_multiple_of(2) && k == n / 2 {
                Complex64::new(c.re, 0.0)
            } else if k <= (n - 1) / 2 {
                c * 2.0
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
        .collect();
    idft(&Spectrum::new(coeffs).expect("same length"))
}

/// Checks the spectral characterization: index 0 (and `N/2` for even `N`)
/// real, indices above the half band zero, all up to the absolute `tol`.
pub fn is_analytic(s: &Spectrum, tol: f64) -> AnalyticityReport {
    let n = s.len();
    let mut violation: f64 = 0.0;
    for (k, c) in s.as_slice().iter().enumerate() {
        let v = if k == 0 || (n.is_multiple_of(2) && k == n / 2) {
            c.im.abs()
        } else if k <= (n - 1) / 2 {
            0.0
        } else {
            c.norm()
        };
        violation = violation.max(v);
    }
    AnalyticityReport {
        is_analytic: violation <= tol,
        max_violation: violation,
    }
}

/// [`is_analytic`] at [`DEFAULT_RELATIVE_TOL`] times the largest modulus.
pub fn is_analytic_default(s: &Spectrum) -> AnalyticityReport {
    is_analytic(s, DEFAULT_RELATIVE_TOL * s.max_abs())
}

/// Analytic signal of a standard normal real draw, redrawn while `|ẑ_0|` or
/// `|ẑ_1|` is below [`GENERICITY_REJECT`] of the spectrum's largest modulus.
pub fn generic_analytic<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<TimeSignal> {
    if n < 2 {
        return Err(Error::InvalidParams(format!(
            "signal length must be at least 2, got {n}"
        )));
    }
    loop {
        let x: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
        let z = make_analytic(&RealSignal::new(x)?);
        let s = dft(&z);
        let floor = GENERICITY_REJECT * s.max_abs();
        if s[0].norm() >= floor && s[1].norm() >= floor {
            return Ok(z);
        }
    }
}
