//! Transforms that leave FROG measurements unchanged, and equivalence
//! testing modulo the finite group generated by them for even `N`.

use std::f64::consts::TAU;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::{dft, idft, Spectrum, TimeSignal};

pub const DEFAULT_EQUIVALENCE_TOL: f64 = 1e-6;

/// `z ↦ s · T_t(R^b(z))`: optional reflection, then integer translation by
/// `t`, then multiplication by the sign `s`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GroupElement {
    pub rotation_sign: i8,
    pub translation: usize,
    pub reflected: bool,
}

impl GroupElement {
    pub const IDENTITY: GroupElement = GroupElement {
        rotation_sign: 1,
        translation: 0,
        reflected: false,
    };

    pub fn apply(&self, z: &TimeSignal) -> TimeSignal {
        let n = z.len();
        let s = f64::from(self.rotation_sign);
        let t = self.translation as i64;
        let values = (0..n as i64)
            .map(|j| {
                let v = if self.reflected {
                    z.at(-(j + t)).conj()
                } else {
                    z.at(j + t)
                };
                v * s
            })
            .collect();
        TimeSignal::new(values).expect("length preserved")
    }

    /// All `4N` elements in lexicographic order of
    /// `(rotation_sign, translation, reflected)`.
    pub fn enumerate(n: usize) -> impl Iterator<Item = GroupElement> {
        [-1i8, 1].into_iter().flat_map(move |rotation_sign| {
            (0..n).flat_map(move |translation| {
                [false, true]
                    .into_iter()
                    .map(move |reflected| GroupElement {
                        rotation_sign,
                        translation,
                        reflected,
                    })
            })
        })
    }
}

impl fmt::Display for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "(sign {:+}, shift {}, {})",
            self.rotation_sign,
            self.translation,
            if self.reflected {
                "reflected"
            } else {
                "direct"
            }
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EquivalenceReport {
    pub equivalent: bool,
    pub best_element: GroupElement,
    pub residual: f64,
}

pub fn rotate(z: &TimeSignal, theta: f64) -> TimeSignal {
    let e = Complex64::from_polar(1.0, theta);
    TimeSignal::new(z.as_slice().iter().map(|v| v * e).collect()).expect("length preserved")
}

/// Spectral modulation `ẑ_k ↦ ẑ_k e^{2πi kγ/N}` for `0 ≤ k < N`. Integer
/// `γ` is applied as the exact cyclic shift `z'_n = z_{n+γ}`.
pub fn translate(z: &TimeSignal, gamma: f64) -> TimeSignal {
    if gamma.fract() == 0.0 && gamma.abs() < 1e15 {
        let t = gamma as i64;
        let values = (0..z.len() as i64).map(|j| z.at(j + t)).collect();
        return TimeSignal::new(values).expect("length preserved");
    }
    let n = z.len() as f64;
    let s = dft(z);
    let coeffs = s
        .as_slice()
        .iter()
        .enumerate()
        .map(|(k, c)| {
            let phase = (k as f64 * gamma).rem_euclid(n);
            c * Complex64::from_polar(1.0, TAU * phase / n)
        })
        .collect();
    idft(&Spectrum::new(coeffs).expect("length preserved"))
}

/// `z_ref[n] = conj(z[-n mod N])`.
pub fn reflect(z: &TimeSignal) -> TimeSignal {
    let values = (0..z.len() as i64).map(|j| z.at(-j).conj()).collect();
    TimeSignal::new(values).expect("length preserved")
}

/// `‖a − b‖ / max(‖a‖, ‖b‖)`, zero when both signals vanish.
pub fn relative_distance(a: &TimeSignal, b: &TimeSignal) -> f64 {
    let denom = a.norm().max(b.norm());
    if denom == 0.0 {
        return 0.0;
    }
    let diff: f64 = a
        .as_slice()
        .iter()
        .zip(b.as_slice())
        .map(|(x, y)| (x - y).norm_sqr())
        .sum();
    diff.sqrt() / denom
}

/// Exhaustive search over the `4N` group elements for the `g` minimizing
/// `‖g(z) − w‖ / max(‖z‖, ‖w‖)`. Ties keep the lexicographically first.
pub fn equivalent_up_to_group(
    z: &TimeSignal,
    w: &TimeSignal,
    tol: f64,
) -> Result<EquivalenceReport> {
    if z.len() != w.len() {
        return Err(Error::LengthMismatch {
            left: z.len(),
            right: w.len(),
        });
    }
    let mut best = (f64::INFINITY, GroupElement::IDENTITY);
    for g in GroupElement::enumerate(z.len()) {
        let res = relative_distance(&g.apply(z), w);
        if res < best.0 {
            best = (res, g);
        }
    }
    Ok(EquivalenceReport {
        equivalent: best.0 <= tol,
        best_element: best.1,
        residual: best.0,
    })
}
