//! Recovery of an even-length analytic signal from `3N/2 + 1` FROG
//! measurements.
//!
//! 1. `|ẑ_0|` from the `k = 0` row, choosing between the two roots by the
//!    feasibility of the five `k = 2` circles.
//! 2. With `ẑ_0` real and `ẑ_1` real positive (a relaxed problem that
//!    ignores the `k = 0` row), `ẑ_2`, then `ẑ_3`, then each `ẑ_k` up to
//!    `N/2` by intersecting circles of the form
//!    `|ẑ_k + S_k(m) / (ẑ_0(1 + ω^{km}))| = N|ŷ_{k,m}| / |ẑ_0(1 + ω^{km})|`.
//! 3. A fractional translation that makes `ẑ_{N/2}` real, which turns the
//!    relaxed solution into one consistent with every measurement.
//!
//! All circle geometry is carried out after dividing by a scale `s` of the
//! order of the spectral coefficients, so tolerances are relative.
//!
//! The closed-form circle intersections lose accuracy from row to row when
//! `|ẑ_0|` is small against the rest of the spectrum, although the
//! measurement map itself is well conditioned. `ẑ_0..ẑ_2` are therefore
//! polished on rows 1 and 2, each later coefficient is polished together
//! with the few before it, and the whole spectrum gets a final pass, all by
//! Levenberg-Marquardt steps on the planned rows. Only planned entries are
//! ever read.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::circles::{
    circles_common_point, pair_points, solve_two_circles_real_tol, solve_two_circles_scaled_tol,
    three_circle_point, Circle,
};
use crate::error::{Error, Result};
use crate::frog::{
    frog_measurements_freq, FrogMeasurements, FrogParams, MeasurementIndexPlan, RootOfUnity,
};
use crate::spectral::{idft, Spectrum, TimeSignal};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RecoveryConfig {
    /// Relative tolerance for circle feasibility and for the `|ŷ_{0,1}| = 0`
    /// test.
    pub feasibility_tol: f64,
    /// Bound on [`verify_solution`] for accepting a result.
    pub residual_tol: f64,
    /// Smallest admissible `|ẑ_0|`, `|ẑ_1|` relative to the measurement
    /// scale.
    pub genericity_floor: f64,
    /// Take the other conjugate branch at `k = 2`.
    pub conjugate_branch: bool,
}

impl Default for RecoveryConfig {
    fn default() -> Self {
        Self {
            feasibility_tol: 1e-6,
            residual_tol: 1e-6,
            genericity_floor: 1e-9,
            conjugate_branch: false,
        }
    }
}

impl RecoveryConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("feasibility_tol", self.feasibility_tol),
            ("residual_tol", self.residual_tol),
            ("genericity_floor", self.genericity_floor),
        ] {
            if !(v >= 0.0) {
                return Err(Error::InvalidParams(format!(
                    "{name} must be >= 0, got {v}"
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RecoveryResult {
    pub signal: TimeSignal,
    pub spectrum: Spectrum,
    /// The sign of `ẑ_0` used by the accepted run.
    pub sign_branch: i8,
    pub verification_residual: f64,
}

/// Typical size of a spectral coefficient implied by the measurements:
/// `ŷ` is quadratic in `ẑ` with a `1/N` factor.
fn coefficient_scale(meas: &FrogMeasurements) -> Result<f64> {
    let n = meas.params().n() as f64;
    let s = (n * meas.max_value().sqrt()).sqrt();
    if !(s > 0.0) {
        return Err(Error::Degenerate("all measurements vanish".into()));
    }
    Ok(s)
}

fn check_params(meas: &FrogMeasurements, plan: &MeasurementIndexPlan) -> Result<FrogParams> {
    let p = plan.params;
    if *meas.params() != p {
        return Err(Error::InvalidParams(format!(
            "measurements are for N = {}, L = {} but the plan is for N = {}, L = {}",
            meas.params().n(),
            meas.params().l(),
            p.n(),
            p.l()
        )));
    }
    Ok(p)
}

/// The `k = 2` circles for trial values of `ẑ_0` and `ẑ_1`, in units of `s`.
fn k2_circles(
    meas: &FrogMeasurements,
    delays: &[usize],
    z0: Complex64,
    z1: Complex64,
    s: f64,
) -> Result<Vec<Circle>> {
    let p = meas.params();
    let n = p.n() as f64;
    let root = p.delay_root();
    delays
        .iter()
        .map(|&m| {
            let d = Complex64::new(1.0, 0.0) + root.pow(2 * m as i64);
            let v = z1 * z1 * root.pow(m as i64) / (z0 * d);
            let radius = n * meas.modulus(2, m)? / (z0.norm() * d.norm());
            Circle::from_equation(v / s, radius / s)
        })
        .collect()
}

/// `|ẑ_0|`.
pub fn recover_z0(
    meas: &FrogMeasurements,
    plan: &MeasurementIndexPlan,
    cfg: &RecoveryConfig,
) -> Result<f64> {
    let p = check_params(meas, plan)?;
    let n = p.n() as f64;
    let s = coefficient_scale(meas)?;
    let y00 = meas.modulus(0, 0)?;
    let y01 = meas.modulus(0, 1)?;
    let y10 = meas.modulus(1, 0)?;
    if y01 <= cfg.feasibility_tol * y00 {
        return Ok((n * y00 / 2.0).sqrt());
    }
    let roots = [
        (n * (y00 + y01) / 2.0).sqrt(),
        (n * (y00 - y01).max(0.0) / 2.0).sqrt(),
    ];
    for z0 in roots {
        if z0 < cfg.genericity_floor * s {
            return Err(Error::Degenerate(format!(
                "|z^_0| candidate {z0:e} is below the genericity floor"
            )));
        }
        let z1 = n * y10 / (2.0 * z0);
        if z1 < cfg.genericity_floor * s {
            return Err(Error::Degenerate("|z^_1| vanishes".into()));
        }
        let circles = k2_circles(
            meas,
            &plan.i2,
            Complex64::new(z0, 0.0),
            Complex64::new(z1, 0.0),
            s,
        )?;
        if circles_common_point(&circles, cfg.feasibility_tol)?.is_some() {
            return Ok(z0);
        }
    }
    Err(Error::inconsistent(
        "z0",
        "neither root of the k = 0 row admits a common point of the k = 2 circles",
    ))
}

/// Coefficients polished together with each newly solved `ẑ_k`.
const REFINE_WINDOW: usize = 8;
const REFINE_ITERS: usize = 12;
const FULL_FIT_ITERS: usize = 60;
/// Negative discriminants accepted as tangency at `k = 2, 3`.
const TANGENCY_CLAMP: f64 = 1e-2;

#[derive(Clone)]
struct TailSolver<'a> {
    meas: &'a FrogMeasurements,
    plan: &'a MeasurementIndexPlan,
    z0_abs: f64,
    s: f64,
    coeffs: Vec<Complex64>,
    /// Planned `(k, m)` with `k ≥ 2`.
    rows: Vec<(usize, usize)>,
}

impl TailSolver<'_> {
    fn n(&self) -> f64 {
        self.meas.params().n() as f64
    }

    /// Circle data `(v, radius)` in units of `s` for row `k`, delay `m`.
    fn equation(&self, k: usize, m: usize) -> Result<(Complex64, f64)> {
        let root = self.meas.params().delay_root();
        let d = Complex64::new(1.0, 0.0) + root.pow((k * m) as i64);
        let partial: Complex64 = (1..k)
            .map(|l| self.coeffs[l] * self.coeffs[k - l] * root.pow((l * m) as i64))
            .sum();
        let v = partial / (self.coeffs[0] * d);
        let radius = self.n() * self.meas.modulus(k, m)? / (self.z0_abs * d.norm());
        Ok((v / self.s, radius / self.s))
    }

    /// Three-circle solve for `ẑ_k`; returns the point and its residual.
    fn solve_row(&self, k: usize) -> Result<(Complex64, f64)> {
        let row = self.plan.row(k);
        let mut v = [Complex64::new(0.0, 0.0); 3];
        let mut r = [0.0; 3];
        for (j, &m) in row.iter().enumerate() {
            (v[j], r[j]) = self.equation(k, m)?;
        }
        let z = three_circle_point(v, r).map_err(|e| match e {
            Error::SingularConfiguration(msg) => Error::Degenerate(format!("k = {k}: {msg}")),
            other => other,
        })?;
        let residual = v
            .iter()
            .zip(&r)
            .map(|(vj, rj)| ((z + vj).norm() - rj).abs() / (1.0 + rj))
            .fold(0.0, f64::max);
        Ok((z * self.s, residual))
    }

    /// Polishes `ẑ_lo..=ẑ_hi` on the planned rows `lo..=hi`.
    fn refine(&mut self, lo: usize, hi: usize, iters: usize) -> Result<()> {
        let keys: Vec<_> = self
            .rows
            .iter()
            .copied()
            .filter(|(k, _)| (lo..=hi).contains(k))
            .collect();
        let fit = Fit::new(self.meas, &keys, self.s)?;
        let free: Vec<_> = (lo..=hi).map(|j| (j, false)).collect();
        fit.run(&mut self.coeffs, &free, iters)
    }

    /// Rows `4..=N/2` once `ẑ_0..ẑ_3` are set; returns the cost of the final
    /// fit over every planned row with `k ≥ 2`.
    ///
    /// A row that cannot be met is not fatal by itself: the final fit may
    /// still pull every row into agreement. Only if it does not is the first
    /// offending row reported.
    fn finish(&mut self, tol: f64) -> Result<f64> {
        let half = self.meas.params().n() / 2;
        let mut first_violation = None;
        for k in 4..=half {
            let res = self.advance(k, tol)?;
            if res > tol && first_violation.is_none() {
                first_violation = Some((k, res));
            }
        }
        let fit = Fit::new(self.meas, &self.rows, self.s)?;
        fit.run(
            &mut self.coeffs,
            &(2..=half).map(|j| (j, false)).collect::<Vec<_>>(),
            FULL_FIT_ITERS,
        )?;
        let mut worst = (4, 0.0);
        for k in 4..=half {
            let res = self.row_residual(k)?;
            if res > worst.1 {
                worst = (k, res);
            }
        }
        if worst.1 > tol {
            let (k, res) = first_violation.unwrap_or(worst);
            return Err(Error::inconsistent(
                format!("k = {k}"),
                format!("three circles have no common point (residual {res:e})"),
            ));
        }
        Ok(fit.cost(&self.coeffs))
    }

    /// Starting points for `ẑ_k`: the radical center of the three circles,
    /// then the pairwise intersections, then zero.
    fn starts(&self, k: usize) -> Result<Vec<Complex64>> {
        let mut out = Vec::new();
        match self.solve_row(k) {
            Ok((z, _)) => out.push(z),
            Err(Error::Degenerate(_)) => {}
            Err(e) => return Err(e),
        }
        let mut circles = Vec::new();
        for m in self.plan.row(k) {
            let (v, r) = self.equation(k, m)?;
            circles.push(Circle::from_equation(v, r)?);
        }
        for (a, b) in [(0, 1), (0, 2), (1, 2)] {
            out.extend(
                pair_points(&circles[a], &circles[b])
                    .into_iter()
                    .map(|z| z * self.s),
            );
        }
        out.push(Complex64::new(0.0, 0.0));
        Ok(out)
    }

    /// Solves row `k`, polishes the window ending at `k` and returns the
    /// row's residual.
    ///
    /// When `|ẑ_0|` is small, or the row's circle centers are nearly
    /// collinear, the radical center is a poor start and the polish can
    /// settle in the wrong basin. The other starts are then tried in turn.
    fn advance(&mut self, k: usize, tol: f64) -> Result<f64> {
        let lo = k.saturating_sub(REFINE_WINDOW - 1).max(2);
        let start = self.coeffs.clone();
        let mut best: Option<(f64, Vec<Complex64>)> = None;
        let mut first_err = None;
        for z in self.starts(k)? {
            self.coeffs.copy_from_slice(&start);
            self.coeffs[k] = z;
            match self
                .refine(lo, k, REFINE_ITERS)
                .and_then(|()| self.row_residual(k))
            {
                Ok(res) => {
                    if best.as_ref().is_none_or(|(b, _)| res < *b) {
                        best = Some((res, self.coeffs.clone()));
                    }
                    if res <= tol {
                        break;
                    }
                }
                Err(e) => {
                    first_err.get_or_insert(e);
                }
            }
        }
        let Some((res, coeffs)) = best else {
            return Err(first_err
                .unwrap_or_else(|| Error::Degenerate(format!("k = {k}: no starting point"))));
        };
        self.coeffs = coeffs;
        Ok(res)
    }

    /// Largest circle residual of the current `ẑ_k` on row `k`.
    fn row_residual(&self, k: usize) -> Result<f64> {
        let z = self.coeffs[k] / self.s;
        let mut worst: f64 = 0.0;
        for m in self.plan.row(k) {
            let (v, r) = self.equation(k, m)?;
            worst = worst.max(((z + v).norm() - r).abs() / (1.0 + r));
        }
        Ok(worst)
    }
}

/// Gauss-Newton fit of `N|ŷ_{k,m}| = N y_{k,m}` over a set of entries, in
/// units of `s²`.
struct Fit {
    n: usize,
    root: RootOfUnity,
    s: f64,
    rows: Vec<(usize, usize, f64)>,
}

impl Fit {
    fn new(meas: &FrogMeasurements, keys: &[(usize, usize)], s: f64) -> Result<Self> {
        let p = meas.params();
        let rows = keys
            .iter()
            .map(|&(k, m)| Ok((k, m, p.n() as f64 * meas.modulus(k, m)?)))
            .collect::<Result<_>>()?;
        Ok(Self {
            n: p.n(),
            root: p.delay_root(),
            s,
            rows,
        })
    }

    fn model(&self, c: &[Complex64], k: usize, m: usize) -> Complex64 {
        (0..=self.n / 2)
            .map(|l| (l, (k + self.n - l) % self.n))
            .filter(|&(_, j)| j <= self.n / 2)
            .map(|(l, j)| c[l] * c[j] * self.root.pow((l * m) as i64))
            .sum()
    }

    fn cost(&self, c: &[Complex64]) -> f64 {
        let s2 = self.s * self.s;
        self.rows
            .iter()
            .map(|&(k, m, y)| ((self.model(c, k, m).norm() - y) / s2).powi(2))
            .sum()
    }

    /// Moves the coefficients listed in `free`; `(j, true)` keeps `ẑ_j` real.
    ///
    /// Levenberg-Marquardt with the damping applied through one SVD of the
    /// Jacobian per iteration.
    fn run(&self, c: &mut [Complex64], free: &[(usize, bool)], max_iters: usize) -> Result<()> {
        let mut cols = Vec::new();
        for &(j, real) in free {
            cols.push((j, false));
            if !real {
                cols.push((j, true));
            }
        }
        let mut cost = self.cost(c);
        let mut lambda = 0.0;
        for _ in 0..max_iters {
            if cost == 0.0 {
                break;
            }
            let (jac, res) = self.linearize(c, &cols);
            let svd = jac.svd(true, true);
            let (u, v_t) = match (&svd.u, &svd.v_t) {
                (Some(u), Some(v_t)) => (u, v_t),
                _ => return Err(Error::Degenerate("refinement: SVD failed".into())),
            };
            let sigma = &svd.singular_values;
            let top = sigma.max();
            if !(top > 0.0) {
                break;
            }
            let g = u.transpose() * (-res);
            let saved = c.to_vec();
            let mut accepted = None;
            for _ in 0..16 {
                let scaled = DVector::from_iterator(
                    sigma.len(),
                    sigma.iter().zip(g.iter()).map(|(&sv, &gi)| {
                        if sv <= 1e-13 * top {
                            0.0
                        } else {
                            sv * gi / (sv * sv + lambda)
                        }
                    }),
                );
                let step = v_t.transpose() * scaled;
                c.copy_from_slice(&saved);
                for (col, &(j, imag)) in cols.iter().enumerate() {
                    let d = step[col] * self.s;
                    c[j] += if imag {
                        Complex64::new(0.0, d)
                    } else {
                        Complex64::new(d, 0.0)
                    };
                }
                let trial = self.cost(c);
                if trial <= cost {
                    cost = trial;
                    accepted = Some(step.norm());
                    lambda = if lambda < 1e-12 * top * top {
                        0.0
                    } else {
                        lambda / 4.0
                    };
                    break;
                }
                lambda = if lambda == 0.0 {
                    1e-6 * top * top
                } else {
                    lambda * 8.0
                };
            }
            match accepted {
                None => {
                    c.copy_from_slice(&saved);
                    break;
                }
                Some(step) if step <= 1e-15 * (cols.len() as f64).sqrt() => break,
                Some(_) => {}
            }
        }
        Ok(())
    }

    fn linearize(&self, c: &[Complex64], cols: &[(usize, bool)]) -> (DMatrix<f64>, DVector<f64>) {
        let s2 = self.s * self.s;
        let mut jac = DMatrix::<f64>::zeros(self.rows.len(), cols.len());
        let mut res = DVector::<f64>::zeros(self.rows.len());
        for (e, &(k, m, y)) in self.rows.iter().enumerate() {
            let model = self.model(c, k, m);
            let modulus = model.norm();
            res[e] = (modulus - y) / s2;
            if modulus == 0.0 {
                continue;
            }
            let unit = model.conj() * (self.s / (modulus * s2));
            for (col, &(j, imag)) in cols.iter().enumerate() {
                let partner = (k + self.n - j) % self.n;
                if partner > self.n / 2 {
                    continue;
                }
                let g = c[partner]
                    * (self.root.pow((j * m) as i64) + self.root.pow((partner * m) as i64));
                let d = unit * g;
                jac[(e, col)] = if imag { -d.im } else { d.re };
            }
        }
        (jac, res)
    }
}

/// Polishes a normalized spectrum on every planned entry, including the
/// `k = 0` row, with `ẑ_0` and `ẑ_{N/2}` kept real.
fn polish(
    spectrum: &Spectrum,
    meas: &FrogMeasurements,
    plan: &MeasurementIndexPlan,
) -> Result<Spectrum> {
    let half = spectrum.len() / 2;
    let fit = Fit::new(meas, &plan.entries(), coefficient_scale(meas)?)?;
    let mut coeffs = spectrum.clone().into_vec();
    let free: Vec<_> = (0..=half).map(|j| (j, j == 0 || j == half)).collect();
    fit.run(&mut coeffs, &free, FULL_FIT_ITERS)?;
    Spectrum::new(coeffs)
}

/// The relaxed spectrum `(ẑ̃_0, …, ẑ̃_{N/2}, 0, …)` with `ẑ̃_0 = sign·z0`
/// and `ẑ̃_1 > 0`.
pub fn recover_tail(
    meas: &FrogMeasurements,
    plan: &MeasurementIndexPlan,
    z0: f64,
    sign: i8,
    cfg: &RecoveryConfig,
) -> Result<Spectrum> {
    let p = check_params(meas, plan)?;
    if !(z0 > 0.0) {
        return Err(Error::InvalidParams(format!(
            "z0 must be positive, got {z0}"
        )));
    }
    if sign != 1 && sign != -1 {
        return Err(Error::InvalidParams(format!(
            "sign must be +1 or -1, got {sign}"
        )));
    }
    let n = p.n();
    let s = coefficient_scale(meas)?;
    let tol = cfg.feasibility_tol;
    let root = p.delay_root();
    let one = Complex64::new(1.0, 0.0);

    let mut solver = TailSolver {
        meas,
        plan,
        z0_abs: z0,
        s,
        coeffs: vec![Complex64::new(0.0, 0.0); n],
        rows: plan
            .entries()
            .into_iter()
            .filter(|&(k, _)| k >= 2)
            .collect(),
    };
    let z0t = f64::from(sign) * z0;
    let z1 = n as f64 * meas.modulus(1, 0)? / (2.0 * z0);
    if z1 < cfg.genericity_floor * s {
        return Err(Error::Degenerate("|z^_1| vanishes".into()));
    }
    solver.coeffs[0] = Complex64::new(z0t, 0.0);
    solver.coeffs[1] = Complex64::new(z1, 0.0);

    // k = 2: centers are real multiples of ẑ_1²/ẑ_0.
    let m2 = plan.i2[1];
    let d2 = one + root.pow(2 * m2 as i64);
    let v2 = (root.pow(m2 as i64) / d2).re;
    let n1 = n as f64 * meas.modulus(2, 0)? / (2.0 * z0);
    let n2 = n as f64 * meas.modulus(2, m2)? / (z0 * d2.norm());
    let scale2 = z1 * z1 / z0t;
    let (up, down) =
        solve_two_circles_real_tol(0.5, v2, scale2 / s, n1 / s, n2 / s, TANGENCY_CLAMP.max(tol))
            .map_err(|e| Error::inconsistent("k = 2", e.to_string()))?;
    // Keep Im(sign·ẑ_2) ≥ 0 so both sign runs follow the same branch.
    let take_up = (sign == 1) != cfg.conjugate_branch;
    solver.coeffs[2] = if take_up { up } else { down } * s;
    // Rows 1 and 2 fix ẑ_0 far better than the cancellation in row 0 does,
    // and the k = 3 circles are sensitive to it.
    let early: Vec<_> = plan
        .entries()
        .into_iter()
        .filter(|&(k, _)| k == 1 || k == 2)
        .collect();
    Fit::new(meas, &early, s)?.run(
        &mut solver.coeffs,
        &[(0, true), (1, true), (2, false)],
        REFINE_ITERS,
    )?;
    solver.z0_abs = solver.coeffs[0].re.abs();
    let z0 = solver.z0_abs;

    // k = 3: two candidates on a line through ẑ_1ẑ_2/ẑ_0.
    let i3 = plan.i3;
    let scale3 = solver.coeffs[1] * solver.coeffs[2] / solver.coeffs[0];
    if scale3.norm() < cfg.genericity_floor * s {
        return Err(Error::Degenerate("z^_1 z^_2 vanishes".into()));
    }
    let d3 = one + root.pow(3 * i3 as i64);
    let v3 = ((root.pow(i3 as i64) + root.pow(2 * i3 as i64)) / d3).re;
    let n1 = n as f64 * meas.modulus(3, 0)? / (2.0 * z0);
    let n2 = n as f64 * meas.modulus(3, i3)? / (z0 * d3.norm());
    let (c1, c2) =
        solve_two_circles_scaled_tol(1.0, v3, scale3 / s, n1 / s, n2 / s, TANGENCY_CLAMP.max(tol))
            .map_err(|e| Error::inconsistent("k = 3", e.to_string()))?;

    // Each candidate for ẑ_3 is carried through the whole tail; the wrong
    // one is left with a worse fit.
    let mut best: Option<(f64, Vec<Complex64>)> = None;
    let mut errors = Vec::new();
    for cand in [c1 * s, c2 * s] {
        let mut trial = solver.clone();
        trial.coeffs[3] = cand;
        match trial.finish(tol) {
            Ok(cost) => {
                if best.as_ref().is_none_or(|(b, _)| cost < *b) {
                    best = Some((cost, trial.coeffs));
                }
            }
            Err(e) => errors.push(e),
        }
    }
    match best {
        Some((_, coeffs)) => Spectrum::new(coeffs),
        None => match errors.swap_remove(0) {
            e @ Error::Degenerate(_) => Err(e),
            first => Err(Error::inconsistent(
                "k = 3",
                format!(
                    "neither candidate for z^_3 fits the remaining rows ({first}; {})",
                    errors[0]
                ),
            )),
        },
    }
}

/// `ẑ_k ↦ ẑ_k e^{-i(2k/N) arg ẑ_{N/2}}` on `0..=N/2`.
pub fn normalize_translation(s: &Spectrum) -> Spectrum {
    let n = s.len();
    let half = n / 2;
    let theta = s[half].arg();
    let coeffs = s
        .as_slice()
        .iter()
        .enumerate()
        .map(|(k, &c)| {
            if k > half {
                c
            } else if k == half {
                Complex64::new(c.norm(), 0.0)
            } else {
                c * Complex64::from_polar(1.0, -2.0 * k as f64 * theta / n as f64)
            }
        })
        .collect();
    Spectrum::new(coeffs).expect("length preserved")
}

/// Relative floor used by [`verify_solution`] for near-zero entries.
pub const VERIFY_FLOOR: f64 = 1e-6;

/// Largest `|p - q| / max(p, q, 1e-6·M)` between the measurements of `s`
/// and `meas` over the entries of `meas`, `M` being the largest entry.
pub fn verify_solution(s: &Spectrum, meas: &FrogMeasurements, params: &FrogParams) -> Result<f64> {
    let keys = meas.keys();
    let model = frog_measurements_freq(s, params, Some(&keys))?;
    let floor = (VERIFY_FLOOR * meas.max_value()).max(f64::MIN_POSITIVE);
    let mut worst: f64 = 0.0;
    for ((k, m), q) in meas.iter() {
        let p = model.get(k, m).expect("same keys");
        worst = worst.max((p - q).abs() / p.max(q).max(floor));
    }
    Ok(worst)
}

/// The full pipeline on the plan's entries of `meas`.
pub fn recover(
    meas: &FrogMeasurements,
    plan: &MeasurementIndexPlan,
    cfg: &RecoveryConfig,
) -> Result<RecoveryResult> {
    cfg.validate()?;
    let params = check_params(meas, plan)?;
    params.check_recoverable()?;
    plan.validate()?;
    let used = meas.restrict(&plan.entries())?;
    let z0 = recover_z0(&used, plan, cfg)?;

    let mut failures = Vec::new();
    for sign in [1i8, -1] {
        match recover_tail(&used, plan, z0, sign, cfg) {
            Ok(tail) => {
                let spectrum = polish(&normalize_translation(&tail), &used, plan)?;
                let residual = verify_solution(&spectrum, &used, &params)?;
                if residual <= cfg.residual_tol {
                    return Ok(RecoveryResult {
                        signal: idft(&spectrum),
                        spectrum,
                        sign_branch: sign,
                        verification_residual: residual,
                    });
                }
                failures.push(format!("sign {sign:+}: verification residual {residual:e}"));
            }
            Err(e @ Error::Degenerate(_)) => return Err(e),
            Err(e) => failures.push(format!("sign {sign:+}: {e}")),
        }
    }
    Err(Error::inconsistent("verification", failures.join("; ")))
}

/// With even `L` the `k = 0` row no longer fixes `|ẑ_0|`. Given a trial
/// `ẑ̃_0 = α` and `ẑ̃_1 = (N|ŷ_{1,0}| / (2|α|)) e^{iθ}`, reports whether the
/// `k = 2` circles (first five admissible delays) have no common point.
pub fn even_l_infeasibility_probe(
    meas: &FrogMeasurements,
    params: &FrogParams,
    alpha: f64,
    theta: f64,
    cfg: &RecoveryConfig,
) -> Result<bool> {
    if !params.l().is_multiple_of(2) {
        return Err(Error::InvalidParams(format!(
            "the probe applies to even L, got L = {}",
            params.l()
        )));
    }
    if *meas.params() != *params {
        return Err(Error::InvalidParams("measurement parameters differ".into()));
    }
    if alpha == 0.0 {
        return Err(Error::Degenerate("alpha must be nonzero".into()));
    }
    let root = params.delay_root();
    let delays: Vec<usize> = (0..params.r())
        .filter(|&m| !root.pow_is_minus_one(2 * m as i64))
        .take(5)
        .collect();
    if delays.len() < 3 {
        return Err(Error::InvalidParams(format!(
            "only {} admissible delays at k = 2",
            delays.len()
        )));
    }
    let s = coefficient_scale(meas)?;
    let n = params.n() as f64;
    let z1 = Complex64::from_polar(n * meas.modulus(1, 0)? / (2.0 * alpha.abs()), theta);
    let circles = k2_circles(meas, &delays, Complex64::new(alpha, 0.0), z1, s)?;
    Ok(circles_common_point(&circles, cfg.feasibility_tol)?.is_none())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ambiguity::{equivalent_up_to_group, reflect, rotate};
    use crate::analytic::{generic_analytic, is_analytic_default};
    use crate::frog::{frog_measurements_time, plan_indices};
    use crate::spectral::dft;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn setup(
        n: usize,
        l: usize,
        seed: u64,
    ) -> (TimeSignal, MeasurementIndexPlan, FrogMeasurements) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let z = generic_analytic(n, &mut rng).unwrap();
        let p = FrogParams::new(n, l).unwrap();
        let plan = plan_indices(&p).unwrap();
        let meas = frog_measurements_time(&z, &p, Some(&plan.entries())).unwrap();
        (z, plan, meas)
    }

    fn with_spectrum(
        s: Vec<Complex64>,
        l: usize,
    ) -> (TimeSignal, MeasurementIndexPlan, FrogMeasurements) {
        let s = Spectrum::new(s).unwrap();
        let z = idft(&s);
        let p = FrogParams::new(s.len(), l).unwrap();
        let plan = plan_indices(&p).unwrap();
        let meas = frog_measurements_time(&z, &p, Some(&plan.entries())).unwrap();
        (z, plan, meas)
    }

    fn random_half_spectrum(n: usize, seed: u64) -> Vec<Complex64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n)
            .map(|k| {
                if k > n / 2 {
                    Complex64::new(0.0, 0.0)
                } else if k == 0 || k == n / 2 {
                    Complex64::new(rng.random_range(0.5..2.0), 0.0)
                } else {
                    Complex64::new(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0))
                }
            })
            .collect()
    }

    #[test]
    fn z0_generic() {
        let (z, plan, meas) = setup(12, 1, 3);
        let z0 = recover_z0(&meas, &plan, &RecoveryConfig::default()).unwrap();
        let want = dft(&z)[0].norm();
        assert!((z0 - want).abs() < 1e-7 * want);
    }

    #[test]
    fn z0_equal_moduli_branch() {
        let mut s = random_half_spectrum(12, 5);
        s[6] = s[0];
        let (_, plan, meas) = with_spectrum(s, 1);
        let z0 = recover_z0(&meas, &plan, &RecoveryConfig::default()).unwrap();
        let y00 = meas.modulus(0, 0).unwrap();
        assert_eq!(z0, (12.0 * y00 / 2.0).sqrt());
    }

    #[test]
    fn z0_smaller_root() {
        let mut s = random_half_spectrum(12, 6);
        s[0] = Complex64::new(0.6, 0.0);
        s[6] = Complex64::new(1.7, 0.0);
        let (_, plan, meas) = with_spectrum(s, 1);
        let z0 = recover_z0(&meas, &plan, &RecoveryConfig::default()).unwrap();
        assert!((z0 - 0.6).abs() < 1e-7);
    }

    #[test]
    fn tail_moduli_and_sign_structure() {
        let (z, plan, meas) = setup(12, 1, 7);
        let cfg = RecoveryConfig::default();
        let truth = dft(&z);
        let z0 = recover_z0(&meas, &plan, &cfg).unwrap();
        let plus = recover_tail(&meas, &plan, z0, 1, &cfg).unwrap();
        let minus = recover_tail(&meas, &plan, z0, -1, &cfg).unwrap();
        for k in 0..=6 {
            assert!(
                (plus[k].norm() - truth[k].norm()).abs() < 1e-6 * truth.max_abs(),
                "k = {k}"
            );
            let want = if k % 2 == 0 { -plus[k] } else { plus[k] };
            assert!((minus[k] - want).norm() < 1e-6 * truth.max_abs(), "k = {k}");
        }
        for k in 7..12 {
            assert_eq!(plus[k], Complex64::new(0.0, 0.0));
        }
    }

    #[test]
    fn conjugate_branch_conjugates_the_tail() {
        let (_, plan, meas) = setup(16, 3, 8);
        let cfg = RecoveryConfig::default();
        let flipped = RecoveryConfig {
            conjugate_branch: true,
            ..cfg
        };
        let z0 = recover_z0(&meas, &plan, &cfg).unwrap();
        let a = recover_tail(&meas, &plan, z0, 1, &cfg).unwrap();
        let b = recover_tail(&meas, &plan, z0, 1, &flipped).unwrap();
        for k in 0..16 {
            assert!((a[k].conj() - b[k]).norm() < 1e-6 * a.max_abs());
        }
    }

    #[test]
    fn end_to_end_16_3() {
        let (z, plan, meas) = setup(16, 3, 10);
        let out = recover(&meas, &plan, &RecoveryConfig::default()).unwrap();
        assert!(out.verification_residual < 1e-6);
        assert!(is_analytic_default(&out.spectrum).is_analytic);
        assert!(out.spectrum[8].im.abs() <= 1e-9 * out.spectrum.max_abs());
        let eq = equivalent_up_to_group(&out.signal, &z, 1e-6).unwrap();
        assert!(eq.equivalent, "residual {}", eq.residual);
    }

    #[test]
    fn recovers_from_negated_and_reflected() {
        let (z, plan, _) = setup(16, 3, 11);
        let p = plan.params;
        for w in [rotate(&z, std::f64::consts::PI), reflect(&z)] {
            let meas = frog_measurements_time(&w, &p, None).unwrap();
            let out = recover(&meas, &plan, &RecoveryConfig::default()).unwrap();
            assert!(
                equivalent_up_to_group(&out.signal, &z, 1e-6)
                    .unwrap()
                    .equivalent
            );
        }
    }

    #[test]
    fn full_grid_input_uses_only_plan_entries() {
        let (z, plan, _) = setup(12, 1, 12);
        let mut full = frog_measurements_time(&z, &plan.params, None).unwrap();
        // Corrupting an unplanned entry must not matter.
        let spare = plan
            .params
            .full_grid()
            .into_iter()
            .find(|key| !plan.entries().contains(key))
            .unwrap();
        full.insert(spare.0, spare.1, 1e9).unwrap();
        let out = recover(&full, &plan, &RecoveryConfig::default()).unwrap();
        assert!(
            equivalent_up_to_group(&out.signal, &z, 1e-6)
                .unwrap()
                .equivalent
        );
    }

    #[test]
    fn refuses_bad_parameters() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let z = generic_analytic(16, &mut rng).unwrap();
        let good = FrogParams::new(16, 3).unwrap();
        let plan = plan_indices(&good).unwrap();
        let other = frog_measurements_time(&z, &FrogParams::new(16, 1).unwrap(), None).unwrap();
        assert!(matches!(
            recover(&other, &plan, &RecoveryConfig::default()),
            Err(Error::InvalidParams(_))
        ));
    }

    #[test]
    fn missing_entry_is_reported() {
        let (_, plan, meas) = setup(12, 1, 2);
        let keys: Vec<_> = meas.keys().into_iter().filter(|&k| k != (5, 0)).collect();
        let partial = meas.restrict(&keys).unwrap();
        assert!(matches!(
            recover(&partial, &plan, &RecoveryConfig::default()),
            Err(Error::MissingMeasurement { k: 5, m: 0 })
        ));
    }

    #[test]
    fn perturbed_measurement_is_rejected() {
        let (z, plan, mut meas) = setup(16, 3, 13);
        let (k, m) = (8, plan.row(8)[2]);
        let v = meas.get(k, m).unwrap();
        meas.insert(k, m, v * (1.0 + 1e-3)).unwrap();
        match recover(&meas, &plan, &RecoveryConfig::default()) {
            Ok(out) => assert!(
                !equivalent_up_to_group(&out.signal, &z, 1e-6)
                    .unwrap()
                    .equivalent
            ),
            Err(e) => assert!(matches!(e, Error::Inconsistent { .. }), "{e}"),
        }
    }

    #[test]
    fn vanishing_third_coefficient_is_not_silent() {
        let mut s = random_half_spectrum(16, 14);
        s[3] = Complex64::new(0.0, 0.0);
        let (z, plan, meas) = with_spectrum(s, 3);
        match recover(&meas, &plan, &RecoveryConfig::default()) {
            Ok(out) => assert!(
                equivalent_up_to_group(&out.signal, &z, 1e-6)
                    .unwrap()
                    .equivalent
            ),
            Err(e) => assert!(
                matches!(e, Error::Degenerate(_) | Error::Inconsistent { .. }),
                "{e}"
            ),
        }
    }

    #[test]
    fn verify_examples() {
        let (z, plan, _) = setup(16, 3, 15);
        let p = plan.params;
        let full = frog_measurements_time(&z, &p, None).unwrap();
        let s = dft(&z);
        assert!(verify_solution(&s, &full, &p).unwrap() < 1e-10);
        let conj = Spectrum::new(s.as_slice().iter().map(|c| c.conj()).collect()).unwrap();
        assert!(verify_solution(&conj, &full, &p).unwrap() < 1e-10);
        let mut swapped = s.clone().into_vec();
        swapped.swap(0, 8);
        let swapped = Spectrum::new(swapped).unwrap();
        assert!(verify_solution(&swapped, &full, &p).unwrap() > 1e-3);
    }

    #[test]
    fn even_l_probe() {
        let mut rng = ChaCha8Rng::seed_from_u64(16);
        let z = generic_analytic(16, &mut rng).unwrap();
        let p = FrogParams::new(16, 2).unwrap();
        let meas = frog_measurements_time(&z, &p, None).unwrap();
        let s = dft(&z);
        let cfg = RecoveryConfig::default();
        let theta = s[1].arg();
        assert!(!even_l_infeasibility_probe(&meas, &p, s[0].re, theta, &cfg).unwrap());
        assert!(!even_l_infeasibility_probe(&meas, &p, -s[0].re, theta, &cfg).unwrap());
        assert!(even_l_infeasibility_probe(&meas, &p, 0.37 * s[0].re, 1.1, &cfg).unwrap());
        assert!(matches!(
            even_l_infeasibility_probe(&meas, &p, 0.0, 1.1, &cfg),
            Err(Error::Degenerate(_))
        ));
        let odd = FrogParams::new(16, 3).unwrap();
        assert!(even_l_infeasibility_probe(&meas, &odd, 1.0, 0.0, &cfg).is_err());
    }
}
