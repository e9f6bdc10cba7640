//! The `[N, L]`-FROG forward model.
//!
//! For a length-`N` signal `z` and delay stride `L`, the measurement at
//! frequency `k` and delay multiple `m` is
//! `|ŷ_{k,m}|² = |Σ_n z_n z_{n+mL} e^{-2πi kn/N}|²`, `0 ≤ k < N`,
//! `0 ≤ m < r = ⌈N/L⌉`. In terms of the spectrum,
//! `ŷ_{k,m} = (1/N) Σ_l ẑ_l ẑ_{k-l} ω^{lm}` with `ω = e^{2πi L/N}`.
//!
//! `ω` coincides with `e^{2πi/r}` only when `L` divides `N`; the delay
//! root carried by [`FrogParams`] is always `ω`.

mod plan;

use std::collections::BTreeMap;
use std::f64::consts::TAU;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::spectral::{root_of_unity, Spectrum, TimeSignal};

pub use plan::{
    constraint_checks, plan_indices, ConstraintChecks, MeasurementIndexPlan, RootOfUnity,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FrogParams {
    n: usize,
    l: usize,
    r: usize,
}

impl FrogParams {
    /// Forward-synthesis parameters: any `N ≥ 2` and `1 ≤ L ≤ N`.
    pub fn new(n: usize, l: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidParams(format!(
                "N must be at least 2, got {n}"
            )));
        }
        if l == 0 || l > n {
            return Err(Error::InvalidParams(format!(
                "L must satisfy 1 <= L <= N = {n}, got {l}"
            )));
        }
        Ok(Self {
            n,
            l,
            r: n.div_ceil(l),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn l(&self) -> usize {
        self.l
    }

    pub fn r(&self) -> usize {
        self.r
    }

    /// `e^{2πi/r}`.
    pub fn w(&self) -> Complex64 {
        root_of_unity(self.r as u64, 1)
    }

    /// The delay root `ω = e^{2πi L/N}` as an exact rational angle.
    pub fn delay_root(&self) -> RootOfUnity {
        RootOfUnity::new(self.l as i64, self.n as i64)
    }

    /// `ω^j`.
    pub fn omega_pow(&self, j: i64) -> Complex64 {
        self.delay_root().pow(j)
    }

    /// Checks the hypotheses under which the recovery pipeline applies:
    /// `N` even, `N/2 ≥ 4`, `L` odd and `r ≥ 5`.
    pub fn check_recoverable(&self) -> Result<()> {
        if !self.n.is_multiple_of(2) {
            return Err(Error::InvalidParams(format!(
                "recovery requires even N, got N = {}",
                self.n
            )));
        }
        if self.n < 8 {
            return Err(Error::InvalidParams(format!(
                "recovery requires N >= 8, got N = {}",
                self.n
            )));
        }
        if self.l.is_multiple_of(2) {
            return Err(Error::InvalidParams(format!(
                "recovery requires odd L, got L = {}: with even L the k = 0 row no longer \
                 separates |z^_0| from |z^_(N/2)| and the problem is not uniquely solvable",
                self.l
            )));
        }
        if self.r < 5 {
            return Err(Error::InvalidParams(format!(
                "recovery requires r = ceil(N/L) >= 5, got r = {} for N = {}, L = {}",
                self.r, self.n, self.l
            )));
        }
        Ok(())
    }

    fn check_index(&self, k: usize, m: usize) -> Result<()> {
        if k >= self.n || m >= self.r {
            return Err(Error::InvalidParams(format!(
                "index (k={k}, m={m}) outside the grid {} x {}",
                self.n, self.r
            )));
        }
        Ok(())
    }

    pub fn full_grid(&self) -> Vec<(usize, usize)> {
        (0..self.n)
            .flat_map(|k| (0..self.r).map(move |m| (k, m)))
            .collect()
    }
}

/// Squared-magnitude FROG data keyed by `(k, m)`.
#[derive(Debug, Clone, PartialEq)]
pub struct FrogMeasurements {
    params: FrogParams,
    entries: BTreeMap<(usize, usize), f64>,
}

impl FrogMeasurements {
    pub fn new(params: FrogParams) -> Self {
        Self {
            params,
            entries: BTreeMap::new(),
        }
    }

    pub fn from_entries(
        params: FrogParams,
        entries: impl IntoIterator<Item = ((usize, usize), f64)>,
    ) -> Result<Self> {
        let mut out = Self::new(params);
        for ((k, m), v) in entries {
            out.insert(k, m, v)?;
        }
        Ok(out)
    }

    pub fn params(&self) -> &FrogParams {
        &self.params
    }

    pub fn insert(&mut self, k: usize, m: usize, value: f64) -> Result<()> {
        self.params.check_index(k, m)?;
        if !value.is_finite() || value < 0.0 {
            return Err(Error::InvalidParams(format!(
                "measurement at (k={k}, m={m}) must be finite and nonnegative, got {value}"
            )));
        }
        self.entries.insert((k, m), value);
        Ok(())
    }

    /// The stored squared magnitude `|ŷ_{k,m}|²`.
    pub fn get(&self, k: usize, m: usize) -> Option<f64> {
        self.entries.get(&(k, m)).copied()
    }

    /// `|ŷ_{k,m}|`.
    pub fn modulus(&self, k: usize, m: usize) -> Result<f64> {
        self.get(k, m)
            .map(f64::sqrt)
            .ok_or(Error::MissingMeasurement { k, m })
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn keys(&self) -> Vec<(usize, usize)> {
        self.entries.keys().copied().collect()
    }

    /// Entries in ascending `(k, m)` order.
    pub fn iter(&self) -> impl Iterator<Item = ((usize, usize), f64)> + '_ {
        self.entries.iter().map(|(&key, &v)| (key, v))
    }

    pub fn max_value(&self) -> f64 {
        self.entries.values().copied().fold(0.0, f64::max)
    }

    /// The sub-collection at `indices`; every index must be present.
    pub fn restrict(&self, indices: &[(usize, usize)]) -> Result<Self> {
        let mut out = Self::new(self.params);
        for &(k, m) in indices {
            let v = self.get(k, m).ok_or(Error::MissingMeasurement { k, m })?;
            out.entries.insert((k, m), v);
        }
        Ok(out)
    }
}

fn resolve_indices(
    params: &FrogParams,
    indices: Option<&[(usize, usize)]>,
) -> Result<Vec<(usize, usize)>> {
    match indices {
        None => Ok(params.full_grid()),
        Some(list) => {
            for &(k, m) in list {
                params.check_index(k, m)?;
            }
            Ok(list.to_vec())
        }
    }
}

/// `e^{sign·2πi j/n}` for `j = 0..n`.
fn unit_table(n: usize, sign: f64) -> Vec<Complex64> {
    (0..n)
        .map(|j| Complex64::from_polar(1.0, sign * TAU * j as f64 / n as f64))
        .collect()
}

/// Time-domain evaluation of the requested entries (full grid when
/// `indices` is `None`).
pub fn frog_measurements_time(
    z: &TimeSignal,
    params: &FrogParams,
    indices: Option<&[(usize, usize)]>,
) -> Result<FrogMeasurements> {
    let n = params.n;
    if z.len() != n {
        return Err(Error::LengthMismatch {
            left: z.len(),
            right: n,
        });
    }
    let tw = unit_table(n, -1.0);
    let mut out = FrogMeasurements::new(*params);
    for (k, m) in resolve_indices(params, indices)? {
        let shift = m * params.l;
        let y: Complex64 = (0..n)
            .map(|j| z[j] * z[(j + shift) % n] * tw[(k * j) % n])
            .sum();
        out.entries.insert((k, m), y.norm_sqr());
    }
    Ok(out)
}

/// `ŷ_{k,m}` from the spectrum, before taking the squared magnitude.
pub fn frog_amplitude_freq(s: &Spectrum, params: &FrogParams, k: usize, m: usize) -> Complex64 {
    let n = params.n;
    let step = (params.l * m) % n;
    let mut acc = Complex64::new(0.0, 0.0);
    for l in 0..n {
        let a = s[l];
        let b = s[(k + n - l) % n];
        if a == Complex64::new(0.0, 0.0) || b == Complex64::new(0.0, 0.0) {
            continue;
        }
        acc += a * b * Complex64::from_polar(1.0, TAU * ((step * l) % n) as f64 / n as f64);
    }
    acc / n as f64
}

/// Frequency-domain evaluation of the requested entries.
pub fn frog_measurements_freq(
    s: &Spectrum,
    params: &FrogParams,
    indices: Option<&[(usize, usize)]>,
) -> Result<FrogMeasurements> {
    if s.len() != params.n {
        return Err(Error::LengthMismatch {
            left: s.len(),
            right: params.n,
        });
    }
    let mut out = FrogMeasurements::new(*params);
    for (k, m) in resolve_indices(params, indices)? {
        out.entries
            .insert((k, m), frog_amplitude_freq(s, params, k, m).norm_sqr());
    }
    Ok(out)
}

/// Largest entrywise relative deviation `|p - q| / max(p, q, floor)` over
/// the keys of `a`, with `floor = rel_floor · max(a)`. Keys missing from
/// `b` are an error.
pub fn max_relative_deviation(
    a: &FrogMeasurements,
    b: &FrogMeasurements,
    rel_floor: f64,
) -> Result<f64> {
    let floor = (rel_floor * a.max_value().max(b.max_value())).max(f64::MIN_POSITIVE);
    let mut worst: f64 = 0.0;
    for ((k, m), p) in a.iter() {
        let q = b.get(k, m).ok_or(Error::MissingMeasurement { k, m })?;
        worst = worst.max((p - q).abs() / p.max(q).max(floor));
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::{generic_analytic, make_analytic, RealSignal};
    use crate::spectral::dft;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn params_derive_r_and_roots() {
        let p = FrogParams::new(16, 3).unwrap();
        assert_eq!(p.r(), 6);
        assert!((p.w() - root_of_unity(6, 1)).norm() < 1e-15);
        assert!((p.omega_pow(1) - Complex64::from_polar(1.0, TAU * 3.0 / 16.0)).norm() < 1e-15);
        assert_eq!(FrogParams::new(12, 1).unwrap().r(), 12);
        assert_eq!(FrogParams::new(64, 11).unwrap().r(), 6);
        assert!(FrogParams::new(8, 0).is_err());
        assert!(FrogParams::new(8, 9).is_err());
        assert!(FrogParams::new(1, 1).is_err());
    }

    #[test]
    fn recoverability_hypotheses() {
        assert!(FrogParams::new(16, 3).unwrap().check_recoverable().is_ok());
        assert!(FrogParams::new(16, 2).unwrap().check_recoverable().is_err());
        assert!(FrogParams::new(16, 5).unwrap().check_recoverable().is_err());
        assert!(FrogParams::new(4, 1).unwrap().check_recoverable().is_err());
        assert!(FrogParams::new(15, 1).unwrap().check_recoverable().is_err());
    }

    #[test]
    fn zero_signal_gives_zero_grid() {
        let p = FrogParams::new(6, 1).unwrap();
        let m = frog_measurements_time(&TimeSignal::zeros(6).unwrap(), &p, None).unwrap();
        assert_eq!(m.len(), 36);
        assert!(m.iter().all(|(_, v)| v == 0.0));
    }

    #[test]
    fn single_coefficient_spectrum() {
        let n = 6;
        let p = FrogParams::new(n, 1).unwrap();
        let mut coeffs = vec![c(0.0, 0.0); n];
        coeffs[0] = c(n as f64, 0.0);
        let m = frog_measurements_freq(&Spectrum::new(coeffs).unwrap(), &p, None).unwrap();
        for ((k, _), v) in m.iter() {
            let want = if k == 0 { (n * n) as f64 } else { 0.0 };
            assert!((v - want).abs() < 1e-9, "k = {k}: {v}");
        }
    }

    // The printed x is rounded to four decimals; the FROG value depends on
    // it with a gain of roughly 10, so the printed-x comparison uses 2e-3.
    #[test]
    fn printed_example_frog_values() {
        let x = RealSignal::new(vec![0.3252, -0.7549, 1.3703, -1.7115]).unwrap();
        let z = make_analytic(&x);
        let p = FrogParams::new(4, 1).unwrap();
        let t = frog_measurements_time(&z, &p, Some(&[(0, 0)])).unwrap();
        let f = frog_measurements_freq(&dft(&z), &p, Some(&[(0, 0)])).unwrap();
        assert!((t.get(0, 0).unwrap() - 20.0614).abs() < 2e-3);
        assert!((f.get(0, 0).unwrap() - 20.0614).abs() < 2e-3);
    }

    // An input inside the four-decimal rounding box of the printed x that
    // reproduces both printed FROG values to the printed precision.
    #[test]
    fn unrounded_example_frog_values() {
        let x = RealSignal::new(vec![0.32517, -0.75495, 1.37034, -1.71147]).unwrap();
        let z = make_analytic(&x);
        let p = FrogParams::new(4, 1).unwrap();
        let direct = frog_measurements_time(&z, &p, Some(&[(0, 0)])).unwrap();
        assert!((direct.get(0, 0).unwrap() - 20.0614).abs() < 5e-4);
        let moved = crate::ambiguity::translate(&z, 2.0 / std::f64::consts::PI);
        let shifted = frog_measurements_time(&moved, &p, Some(&[(0, 0)])).unwrap();
        assert!((shifted.get(0, 0).unwrap() - 17.9335).abs() < 5e-4);
    }

    #[test]
    fn time_and_frequency_agree_n12() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let z = generic_analytic(12, &mut rng).unwrap();
        let p = FrogParams::new(12, 1).unwrap();
        let t = frog_measurements_time(&z, &p, None).unwrap();
        let f = frog_measurements_freq(&dft(&z), &p, None).unwrap();
        assert!(max_relative_deviation(&t, &f, 1e-12).unwrap() < 1e-8);
    }

    #[test]
    fn subset_and_restrict() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let z = generic_analytic(8, &mut rng).unwrap();
        let p = FrogParams::new(8, 1).unwrap();
        let full = frog_measurements_time(&z, &p, None).unwrap();
        let idx = [(3, 2), (0, 0)];
        let sub = frog_measurements_time(&z, &p, Some(&idx)).unwrap();
        assert_eq!(sub.keys(), vec![(0, 0), (3, 2)]);
        assert_eq!(full.restrict(&idx).unwrap(), sub);
        assert!(matches!(
            sub.restrict(&[(1, 1)]),
            Err(Error::MissingMeasurement { k: 1, m: 1 })
        ));
        assert!(frog_measurements_time(&z, &p, Some(&[(8, 0)])).is_err());
    }

    #[test]
    fn rejects_negative_values() {
        let p = FrogParams::new(8, 1).unwrap();
        let mut m = FrogMeasurements::new(p);
        assert!(m.insert(0, 0, -1.0).is_err());
        assert!(m.insert(0, 0, f64::NAN).is_err());
        assert!(m.insert(0, 0, 2.0).is_ok());
        assert_eq!(m.modulus(0, 0).unwrap(), 2f64.sqrt());
    }

    #[test]
    fn length_mismatch() {
        let p = FrogParams::new(8, 1).unwrap();
        assert!(frog_measurements_time(&TimeSignal::zeros(6).unwrap(), &p, None).is_err());
        assert!(frog_measurements_freq(&Spectrum::zeros(6).unwrap(), &p, None).is_err());
    }

    fn analytic_case() -> impl Strategy<Value = (u64, usize, usize)> {
        (any::<u64>(), 2usize..24).prop_flat_map(|(seed, n)| (Just(seed), Just(n), 1..=n))
    }

    proptest! {
        #[test]
        fn domains_agree((seed, n, l) in analytic_case()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let z = generic_analytic(n, &mut rng).unwrap();
            let p = FrogParams::new(n, l).unwrap();
            let t = frog_measurements_time(&z, &p, None).unwrap();
            let f = frog_measurements_freq(&dft(&z), &p, None).unwrap();
            prop_assert!(max_relative_deviation(&t, &f, 1e-12).unwrap() < 1e-8);
        }

        // For even-N analytic spectra the sum over l only sees
        // l ∈ [max(0, k - N/2), min(k, N/2)] (and l = N/2 for k = 0).
        #[test]
        fn pyramid_support((seed, half, l) in (any::<u64>(), 2usize..12, 1usize..5)) {
            let n = 2 * half;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let s = dft(&generic_analytic(n, &mut rng).unwrap());
            let p = FrogParams::new(n, l.min(n)).unwrap();
            for (k, m) in p.full_grid() {
                let full = frog_amplitude_freq(&s, &p, k, m);
                let (lo, hi) = if k <= n / 2 { (0, k) } else { (k - n / 2, n / 2) };
                let mut part: Complex64 = (lo..=hi)
                    .map(|j| s[j] * s[(k + n - j) % n] * p.omega_pow((j * m) as i64))
                    .sum();
                if k == 0 {
                    part += s[half] * s[half] * p.omega_pow((half * m) as i64);
                }
                part /= n as f64;
                prop_assert!((full - part).norm() <= 1e-10 * (1.0 + full.norm()));
            }
        }
    }
}
