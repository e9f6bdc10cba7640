//! Complex sequences, the unnormalized DFT and its inverse, roots of unity.
//!
//! The forward transform carries no scale factor and the inverse carries
//! `1/N`, so `ẑ_k = Σ z_n e^{-2πi kn/N}` and `z_n = (1/N) Σ ẑ_k e^{2πi kn/N}`.

use std::f64::consts::TAU;
use std::ops::Index;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// A length-`N` complex signal with `N`-periodic indexing.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSignal {
    values: Vec<Complex64>,
}

/// DFT coefficients `ẑ_0 .. ẑ_{N-1}` of a [`TimeSignal`].
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    coeffs: Vec<Complex64>,
}

fn check_len(n: usize) -> Result<()> {
    if n < 2 {
        return Err(Error::InvalidParams(format!(
            "signal length must be at least 2, got {n}"
        )));
    }
    Ok(())
}

macro_rules! complex_sequence {
    ($ty:ident, $field:ident) => {
        impl $ty {
            pub fn new($field: Vec<Complex64>) -> Result<Self> {
                check_len($field.len())?;
                Ok(Self { $field })
            }

            pub fn zeros(n: usize) -> Result<Self> {
                Self::new(vec![Complex64::new(0.0, 0.0); n])
            }

            pub fn from_real(values: &[f64]) -> Result<Self> {
                Self::new(values.iter().map(|&x| Complex64::new(x, 0.0)).collect())
            }

            #[allow(clippy::len_without_is_empty)]
            pub fn len(&self) -> usize {
                self.$field.len()
            }

            pub fn as_slice(&self) -> &[Complex64] {
                &self.$field
            }

            pub fn into_vec(self) -> Vec<Complex64> {
                self.$field
            }

            /// Value at an arbitrary integer index, taken modulo `N`.
            pub fn at(&self, index: i64) -> Complex64 {
                let n = self.$field.len() as i64;
                self.$field[index.rem_euclid(n) as usize]
            }

            pub fn norm(&self) -> f64 {
                self.$field.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
            }

            pub fn max_abs(&self) -> f64 {
                self.$field.iter().map(|c| c.norm()).fold(0.0, f64::max)
            }

            /// Largest componentwise distance to `other`.
            pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
                if self.len() != other.len() {
                    return Err(Error::LengthMismatch {
                        left: self.len(),
                        right: other.len(),
                    });
                }
                Ok(self
                    .$field
                    .iter()
                    .zip(other.$field.iter())
                    .map(|(a, b)| (a - b).norm())
                    .fold(0.0, f64::max))
            }
        }

        impl Index<usize> for $ty {
            type Output = Complex64;

            fn index(&self, index: usize) -> &Complex64 {
                &self.$field[index]
            }
        }
    };
}

complex_sequence!(TimeSignal, values);
complex_sequence!(Spectrum, coeffs);

/// `e^{sign·2πi j/n}` for `j = 0..n`, evaluated on the reduced angle.
fn twiddles(n: usize, sign: f64) -> Vec<Complex64> {
    (0..n)
        .map(|j| Complex64::from_polar(1.0, sign * TAU * j as f64 / n as f64))
        .collect()
}

fn transform(input: &[Complex64], sign: f64) -> Vec<Complex64> {
    let n = input.len();
    let tw = twiddles(n, sign);
    (0..n)
        .map(|k| {
            input
                .iter()
                .enumerate()
                .map(|(j, &x)| x * tw[(k * j) % n])
                .sum()
        })
        .collect()
}

pub fn dft(z: &TimeSignal) -> Spectrum {
    Spectrum {
        coeffs: transform(z.as_slice(), -1.0),
    }
}

pub fn idft(s: &Spectrum) -> TimeSignal {
    let scale = 1.0 / s.len() as f64;
    TimeSignal {
        values: transform(s.as_slice(), 1.0)
            .into_iter()
            .map(|c| c * scale)
            .collect(),
    }
}

/// `e^{2πi m/r}`. The exponent is reduced modulo `r` before evaluation.
pub fn root_of_unity(r: u64, m: i64) -> Complex64 {
    assert!(r >= 1, "root_of_unity requires r >= 1");
    let j = m.rem_euclid(r as i64);
    Complex64::from_polar(1.0, TAU * j as f64 / r as f64)
}
