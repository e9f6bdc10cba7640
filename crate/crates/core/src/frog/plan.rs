//! Choice of the `3N/2 + 1` delay indices used by the recovery pipeline.
//!
//! All predicates on roots of unity are decided exactly: `ω = e^{2πi p/q}`
//! is kept as the rational angle `p/q`, so `ω^j = 1` and `ω^j = -1` become
//! congruences on integers.

use std::f64::consts::TAU;

use num_complex::Complex64;

use super::FrogParams;
use crate::error::{Error, Result};

/// `e^{2πi num/den}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RootOfUnity {
    num: i64,
    den: i64,
}

impl RootOfUnity {
    pub fn new(num: i64, den: i64) -> Self {
        assert!(den >= 1, "denominator must be positive");
        Self { num, den }
    }

    pub fn num(&self) -> i64 {
        self.num
    }

    pub fn den(&self) -> i64 {
        self.den
    }

    pub fn pow(&self, j: i64) -> Complex64 {
        let t = (self.num as i128 * j as i128).rem_euclid(self.den as i128);
        Complex64::from_polar(1.0, TAU * t as f64 / self.den as f64)
    }

    pub fn pow_is_one(&self, j: i64) -> bool {
        (self.num as i128 * j as i128).rem_euclid(self.den as i128) == 0
    }

    pub fn pow_is_minus_one(&self, j: i64) -> bool {
        let d = self.den as i128;
        (2 * self.num as i128 * j as i128).rem_euclid(2 * d) == d
    }

    /// `ω^a = ω^b` or `ω^a = ω^{-b}`, i.e. `Re ω^a = Re ω^b`.
    pub fn same_cosine(&self, a: i64, b: i64) -> bool {
        self.pow_is_one(a - b) || self.pow_is_one(a + b)
    }

    /// The three index predicates at exponent `m`.
    pub fn checks(&self, m: i64) -> ConstraintChecks {
        // With x = ω^m: x/(1+x²) = 1/2 ⇔ (x-1)² = 0, and
        // (x+x²)/(1+x³) = 1 ⇔ (x-1)²(x+1) = 0. An undefined quotient
        // counts as a failed predicate.
        let two_ok = !self.pow_is_minus_one(2 * m);
        let three_ok = !self.pow_is_minus_one(3 * m);
        let unit = self.pow_is_one(m);
        ConstraintChecks {
            one_plus_w2m_nonzero: two_ok,
            ratio_not_half: two_ok && !unit,
            cubic_ratio_not_one: three_ok && !unit,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ConstraintChecks {
    /// `1 + w^{2m} ≠ 0`.
    pub one_plus_w2m_nonzero: bool,
    /// `w^m / (1 + w^{2m}) ≠ 1/2`.
    pub ratio_not_half: bool,
    /// `(w^m + w^{2m}) / (1 + w^{3m}) ≠ 1`.
    pub cubic_ratio_not_one: bool,
}

impl ConstraintChecks {
    pub fn all(&self) -> bool {
        self.one_plus_w2m_nonzero && self.ratio_not_half && self.cubic_ratio_not_one
    }
}

/// The predicates for `w = e^{2πi/r}`.
pub fn constraint_checks(r: u64, m: i64) -> ConstraintChecks {
    RootOfUnity::new(1, r as i64).checks(m)
}

/// Delay indices of the measurement plan.
///
/// Rows: `(0,0)`, `(0,1)`, `(1,0)`; `(2, i2[q])` for the five `i2`;
/// `(3,0)` and `(3, i3)`; `(k, ik[k-4][p])` for `4 ≤ k ≤ N/2`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MeasurementIndexPlan {
    pub params: FrogParams,
    pub i2: [usize; 5],
    pub i3: usize,
    pub ik: Vec<[usize; 3]>,
}

pub const BASE_ENTRIES: [(usize, usize); 4] = [(0, 0), (0, 1), (1, 0), (3, 0)];

impl MeasurementIndexPlan {
    /// The three delay indices used at row `k`, `4 ≤ k ≤ N/2`.
    pub fn row(&self, k: usize) -> [usize; 3] {
        self.ik[k - 4]
    }

    /// Every planned `(k, m)` in ascending order.
    pub fn entries(&self) -> Vec<(usize, usize)> {
        let mut out: Vec<(usize, usize)> = BASE_ENTRIES.to_vec();
        out.extend(self.i2.iter().map(|&m| (2, m)));
        out.push((3, self.i3));
        for (j, row) in self.ik.iter().enumerate() {
            out.extend(row.iter().map(|&m| (j + 4, m)));
        }
        out.sort_unstable();
        out
    }

    /// `3N/2 + 1`.
    pub fn expected_len(n: usize) -> usize {
        3 * n / 2 + 1
    }

    /// Re-checks every constraint with exact arithmetic.
    pub fn validate(&self) -> Result<()> {
        let p = &self.params;
        let (n, r) = (p.n(), p.r());
        let root = p.delay_root();
        let fail = |msg: String| Err(Error::InvalidParams(msg));
        if self.ik.len() + 3 != n / 2 {
            return fail(format!(
                "expected {} rows k = 4..N/2, got {}",
                n / 2 - 3,
                self.ik.len()
            ));
        }
        let all: Vec<usize> = self
            .i2
            .iter()
            .chain(std::iter::once(&self.i3))
            .chain(self.ik.iter().flatten())
            .copied()
            .collect();
        if all.iter().any(|&m| m >= r) {
            return fail(format!("delay index outside [0, {r})"));
        }
        if self.i2[0] != 0 {
            return fail("i2[0] must be 0".into());
        }
        for (a, &m) in self.i2.iter().enumerate() {
            if !root.checks(m as i64).one_plus_w2m_nonzero {
                return fail(format!("1 + w^(2*{m}) = 0"));
            }
            if self.i2[a + 1..].contains(&m) {
                return fail(format!("repeated index {m} in i2"));
            }
        }
        if !root.checks(self.i2[1] as i64).ratio_not_half {
            return fail(format!("w^m/(1+w^2m) = 1/2 at m = {}", self.i2[1]));
        }
        if self.i3 == 0 || !root.checks(self.i3 as i64).cubic_ratio_not_one {
            return fail(format!("i3 = {} is not admissible", self.i3));
        }
        for (j, row) in self.ik.iter().enumerate() {
            let k = (j + 4) as i64;
            if row[0] != 0 {
                return fail(format!("row k = {k} must start with 0"));
            }
            for &m in row {
                if root.pow_is_minus_one(k * m as i64) {
                    return fail(format!("w^({k}*{m}) = -1"));
                }
            }
            for a in 0..3 {
                for b in a + 1..3 {
                    if row[a] == row[b] || root.same_cosine(row[a] as i64, row[b] as i64) {
                        return fail(format!(
                            "row k = {k}: indices {} and {} give the same circle",
                            row[a], row[b]
                        ));
                    }
                }
            }
        }
        let entries = self.entries();
        if entries.len() != Self::expected_len(n) {
            return fail(format!(
                "plan has {} entries, expected {}",
                entries.len(),
                Self::expected_len(n)
            ));
        }
        if entries.windows(2).any(|w| w[0] == w[1]) {
            return fail("duplicate entries".into());
        }
        Ok(())
    }
}

fn first_index(r: usize, mut ok: impl FnMut(usize) -> bool) -> Option<usize> {
    (1..r).find(|&i| ok(i))
}

/// Deterministic plan: the smallest admissible indices, scanning upward.
///
/// Besides `ω^{km} ≠ -1`, the three delays of each row `k ≥ 4` must have
/// pairwise distinct `Re ω^m`: delays `m` and `-m` give the same circle, and
/// three circles with only two distinct members do not pin down a point.
/// When `L` divides `N` this is the condition `a + b ≠ r`.
pub fn plan_indices(params: &FrogParams) -> Result<MeasurementIndexPlan> {
    let (n, r) = (params.n(), params.r());
    if n % 2 != 0 || n < 8 || r < 5 {
        return Err(Error::InvalidParams(format!(
            "plan requires even N >= 8 and r >= 5, got N = {n}, r = {r}"
        )));
    }
    let root = params.delay_root();
    let infeasible = |what: String| {
        Error::NoSolution(format!(
            "no admissible delay indices for {what} with N = {n}, L = {}",
            params.l()
        ))
    };

    let second = first_index(r, |i| root.checks(i as i64).ratio_not_half)
        .ok_or_else(|| infeasible("k = 2".into()))?;
    let mut i2 = [0, second, 0, 0, 0];
    let mut rest = (1..r).filter(|&i| i != second && root.checks(i as i64).one_plus_w2m_nonzero);
    for slot in i2.iter_mut().skip(2) {
        *slot = rest.next().ok_or_else(|| infeasible("k = 2".into()))?;
    }

    let i3 = first_index(r, |i| root.checks(i as i64).cubic_ratio_not_one)
        .ok_or_else(|| infeasible("k = 3".into()))?;

    let mut ik = Vec::with_capacity(n / 2 - 3);
    for k in 4..=n / 2 {
        let k = k as i64;
        let usable = |i: usize| !root.pow_is_minus_one(k * i as i64) && !root.pow_is_one(i as i64);
        let a = first_index(r, usable).ok_or_else(|| infeasible(format!("k = {k}")))?;
        let b = first_index(r, |i| {
            i > a && usable(i) && !root.same_cosine(a as i64, i as i64)
        })
        .ok_or_else(|| infeasible(format!("k = {k}")))?;
        ik.push([0, a, b]);
    }

    let plan = MeasurementIndexPlan {
        params: *params,
        i2,
        i3,
        ik,
    };
    plan.validate()?;
    Ok(plan)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::root_of_unity;

    fn float_checks(r: u64, m: i64) -> ConstraintChecks {
        let x = root_of_unity(r, m);
        let one = Complex64::new(1.0, 0.0);
        let d2 = one + x * x;
        let d3 = one + x * x * x;
        let two_ok = d2.norm() > 1e-9;
        ConstraintChecks {
            one_plus_w2m_nonzero: two_ok,
            ratio_not_half: two_ok && (x / d2 - 0.5).norm() > 1e-9,
            cubic_ratio_not_one: d3.norm() > 1e-9 && ((x + x * x) / d3 - one).norm() > 1e-9,
        }
    }

    #[test]
    fn spec_style_examples() {
        assert!(!constraint_checks(8, 2).one_plus_w2m_nonzero);
        assert!(!constraint_checks(5, 0).ratio_not_half);
        assert!(constraint_checks(7, 1).all());
    }

    #[test]
    fn excluded_sets() {
        let bad = |r: u64| -> Vec<i64> {
            (0..r as i64)
                .filter(|&m| !constraint_checks(r, m).one_plus_w2m_nonzero)
                .collect()
        };
        assert!(bad(5).is_empty());
        assert!(bad(6).is_empty());
        assert_eq!(bad(8), vec![2, 6]);
    }

    #[test]
    fn exact_matches_float_for_small_r() {
        for r in 1..=64u64 {
            for m in 0..r as i64 {
                assert_eq!(
                    constraint_checks(r, m),
                    float_checks(r, m),
                    "r = {r}, m = {m}"
                );
            }
        }
    }

    #[test]
    fn rational_root_powers() {
        let w = RootOfUnity::new(3, 16);
        assert!(w.pow_is_one(16));
        assert!(w.pow_is_minus_one(8));
        assert!(!w.pow_is_minus_one(4));
        assert!((w.pow(-5) - w.pow(11)).norm() < 1e-15);
        assert!(w.same_cosine(5, 11));
        assert!(!w.same_cosine(1, 2));
    }

    #[test]
    fn plan_for_16_3() {
        let p = FrogParams::new(16, 3).unwrap();
        let plan = plan_indices(&p).unwrap();
        // 1 + ω^8 = 1 + e^{3πi} = 0 removes m = 4.
        assert_eq!(plan.i2, [0, 1, 2, 3, 5]);
        assert_eq!(plan.entries().len(), 25);
        assert_eq!(plan.row(8), [0, 2, 4]);
        plan.validate().unwrap();
    }

    #[test]
    fn plan_counts() {
        for (n, l) in [(8, 1), (12, 1), (20, 3), (32, 5), (64, 11), (128, 1)] {
            let plan = plan_indices(&FrogParams::new(n, l).unwrap()).unwrap();
            assert_eq!(plan.entries().len(), 3 * n / 2 + 1, "N = {n}");
        }
    }

    #[test]
    fn plan_rejects_bad_params() {
        assert!(plan_indices(&FrogParams::new(16, 4).unwrap()).is_err());
        assert!(plan_indices(&FrogParams::new(6, 1).unwrap()).is_err());
        assert!(plan_indices(&FrogParams::new(15, 1).unwrap()).is_err());
    }

    // N = 6L: only delays 0, 2, 4 avoid ω^{(N/2)m} = -1 and the last two
    // coincide as circles, so row N/2 has no valid triple.
    #[test]
    fn six_l_has_no_plan() {
        let err = plan_indices(&FrogParams::new(18, 3).unwrap()).unwrap_err();
        assert!(matches!(err, Error::NoSolution(_)), "{err}");
    }

    #[test]
    fn validate_catches_tampering() {
        let p = FrogParams::new(16, 3).unwrap();
        let mut plan = plan_indices(&p).unwrap();
        plan.ik[0] = [0, 1, 1];
        assert!(plan.validate().is_err());
        let mut plan = plan_indices(&p).unwrap();
        plan.i2[0] = 1;
        assert!(plan.validate().is_err());
    }
}
