//! Acceptance checks, shared by the `acceptance` test target and the CLI
//! `selftest` command. Every run is seeded.

use std::f64::consts::TAU;
use std::fmt;
use std::time::Instant;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::ambiguity::{equivalent_up_to_group, translate, GroupElement};
use crate::analytic::{generic_analytic, make_analytic, RealSignal};
use crate::circles::{solve_three_circles, solve_two_circles_real, solve_two_circles_scaled};
use crate::frog::{
    frog_measurements_freq, frog_measurements_time, max_relative_deviation, plan_indices,
    FrogParams, MeasurementIndexPlan,
};
use crate::recovery::{even_l_infeasibility_probe, recover, verify_solution, RecoveryConfig};
use crate::spectral::{dft, Spectrum};

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct SelftestOptions {
    /// Restrict the signal-length sweeps to `N ≤ 20`.
    pub quick: bool,
    /// Relative perturbation applied to one planned measurement before each
    /// end-to-end recovery.
    pub perturbation: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct CriterionOutcome {
    pub id: u8,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub elapsed_ms: f64,
}

impl fmt::Display for CriterionOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[{}] criterion {}: {} ({}; {:.1} ms)",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.detail,
            self.elapsed_ms
        )
    }
}

fn timed(id: u8, name: &'static str, body: impl FnOnce() -> (bool, String)) -> CriterionOutcome {
    let start = Instant::now();
    let (passed, detail) = body();
    CriterionOutcome {
        id,
        name,
        passed,
        detail,
        elapsed_ms: start.elapsed().as_secs_f64() * 1e3,
    }
}

/// Reference values of the four-sample example, rounded to four decimals.
pub mod example {
    pub const X: [f64; 4] = [0.3252, -0.7549, 1.3703, -1.7115];
    pub const SPECTRUM: [(f64, f64); 4] = [
        (-0.7710, 0.0),
        (-2.0902, -1.9132),
        (4.1619, 0.0),
        (0.0, 0.0),
    ];
    pub const FROG_00: f64 = 20.0614;
    pub const FROG_00_TRANSLATED: f64 = 17.9335;
    pub const GAMMA: f64 = 2.0 / std::f64::consts::PI;
    pub const TOL: f64 = 5e-4;
}

pub fn criterion_1() -> CriterionOutcome {
    timed(1, "worked example reproduction", || {
        let start = Instant::now();
        let z = make_analytic(&RealSignal::new(example::X.to_vec()).expect("length 4"));
        let s = dft(&z);
        let p = FrogParams::new(4, 1).expect("valid");
        let direct = frog_measurements_time(&z, &p, Some(&[(0, 0)]))
            .expect("valid")
            .get(0, 0)
            .expect("computed");
        let moved = translate(&z, example::GAMMA);
        let shifted = frog_measurements_time(&moved, &p, Some(&[(0, 0)]))
            .expect("valid")
            .get(0, 0)
            .expect("computed");
        let micros = start.elapsed().as_secs_f64() * 1e6;
        let spec_err = s
            .as_slice()
            .iter()
            .zip(example::SPECTRUM)
            .map(|(c, (re, im))| (c - Complex64::new(re, im)).norm())
            .fold(0.0, f64::max);
        let e1 = (direct - example::FROG_00).abs();
        let e2 = (shifted - example::FROG_00_TRANSLATED).abs();
        let passed =
            spec_err <= example::TOL && e1 <= example::TOL && e2 <= example::TOL && micros < 1e3;
        (
            passed,
            format!(
                "spectrum err {spec_err:.2e}; FROG(0,0) = {direct:.6} (err {e1:.2e}); \
                 translated = {shifted:.6} (err {e2:.2e}); tol {:.0e}; {micros:.0} us",
                example::TOL
            ),
        )
    })
}

pub const END_TO_END_CONFIGS: [(usize, usize); 5] = [(12, 1), (16, 3), (20, 3), (32, 5), (64, 11)];

/// Runs one seeded end-to-end trial; `Ok(residual)` on group equivalence.
pub fn end_to_end_trial(
    params: &FrogParams,
    plan: &MeasurementIndexPlan,
    seed: u64,
    perturbation: Option<f64>,
) -> std::result::Result<f64, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let z = generic_analytic(params.n(), &mut rng).map_err(|e| e.to_string())?;
    let mut meas =
        frog_measurements_time(&z, params, Some(&plan.entries())).map_err(|e| e.to_string())?;
    if meas.len() != MeasurementIndexPlan::expected_len(params.n()) {
        return Err(format!("plan has {} entries", meas.len()));
    }
    if let Some(delta) = perturbation {
        let (k, m) = (params.n() / 2, plan.row(params.n() / 2)[2]);
        let v = meas.get(k, m).expect("planned");
        meas.insert(k, m, v * (1.0 + delta))
            .map_err(|e| e.to_string())?;
    }
    let out = recover(&meas, plan, &RecoveryConfig::default()).map_err(|e| e.to_string())?;
    let eq = equivalent_up_to_group(&out.signal, &z, 1e-6).map_err(|e| e.to_string())?;
    if eq.equivalent && out.verification_residual < 1e-6 {
        Ok(eq.residual)
    } else {
        Err(format!(
            "equivalence residual {:.2e}, verification residual {:.2e}",
            eq.residual, out.verification_residual
        ))
    }
}

pub fn criterion_2(opts: &SelftestOptions) -> CriterionOutcome {
    timed(2, "end-to-end recovery from 3N/2+1 measurements", || {
        let start = Instant::now();
        let mut parts = Vec::new();
        let mut passed = true;
        for (n, l) in END_TO_END_CONFIGS {
            if opts.quick && n > 20 {
                continue;
            }
            let params = FrogParams::new(n, l).expect("valid");
            let plan = match plan_indices(&params) {
                Ok(p) => p,
                Err(e) => {
                    passed = false;
                    parts.push(format!("({n},{l}): no plan: {e}"));
                    continue;
                }
            };
            let mut ok = 0;
            let mut worst: f64 = 0.0;
            let mut first_failure = None;
            for trial in 0..100u64 {
                match end_to_end_trial(&params, &plan, 1000 * n as u64 + trial, opts.perturbation) {
                    Ok(res) => {
                        ok += 1;
                        worst = worst.max(res);
                    }
                    Err(msg) => {
                        first_failure.get_or_insert(format!("trial {trial}: {msg}"));
                    }
                }
            }
            passed &= ok == 100;
            let mut part = format!("({n},{l}): {ok}/100, worst {worst:.1e}");
            if let Some(f) = first_failure {
                part.push_str(&format!(" [{f}]"));
            }
            parts.push(part);
        }
        let secs = start.elapsed().as_secs_f64();
        passed &= secs < 30.0;
        parts.push(format!("{secs:.2} s"));
        (passed, parts.join("; "))
    })
}

pub fn criterion_3(opts: &SelftestOptions) -> CriterionOutcome {
    timed(3, "ambiguity group invariance", || {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let even = if opts.quick {
            [8, 10, 12, 14, 16]
        } else {
            [8, 12, 16, 20, 24]
        };
        let mut worst_even: f64 = 0.0;
        for trial in 0..50 {
            let n = even[trial % even.len()];
            let l = [1, 3][trial % 2];
            let z = generic_analytic(n, &mut rng).expect("valid");
            let p = FrogParams::new(n, l).expect("valid");
            let base = frog_measurements_time(&z, &p, None).expect("valid");
            for g in GroupElement::enumerate(n) {
                let other = frog_measurements_time(&g.apply(&z), &p, None).expect("valid");
                worst_even = worst_even
                    .max(max_relative_deviation(&base, &other, 1e-12).expect("same grid"));
            }
        }
        let mut worst_odd: f64 = 0.0;
        for trial in 0..50 {
            let n = [5, 7, 9, 11, 13][trial % 5];
            let z = generic_analytic(n, &mut rng).expect("valid");
            let p = FrogParams::new(n, [1, 2][trial % 2]).expect("valid");
            let base = frog_measurements_time(&z, &p, None).expect("valid");
            for _ in 0..10 {
                let gamma = rng.random_range(-(n as f64)..n as f64);
                let other = frog_measurements_time(&translate(&z, gamma), &p, None).expect("valid");
                worst_odd =
                    worst_odd.max(max_relative_deviation(&base, &other, 1e-12).expect("same grid"));
            }
        }
        (
            worst_even <= 1e-8 && worst_odd <= 1e-8,
            format!("even-N group worst {worst_even:.2e}; odd-N translations worst {worst_odd:.2e}; tol 1e-8"),
        )
    })
}

pub fn criterion_4() -> CriterionOutcome {
    timed(4, "fractional translation changes measurements", || {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let mut changed = 0;
        let mut smallest = f64::INFINITY;
        for trial in 0..100 {
            let n = [8, 12, 16][trial % 3];
            let z = loop {
                let z = generic_analytic(n, &mut rng).expect("valid");
                let s = dft(&z);
                if s[n / 2].norm() > 1e-6 * s.max_abs() {
                    break z;
                }
            };
            let gamma = loop {
                let g = rng.random_range(0.0..n as f64);
                if g.fract() != 0.0 {
                    break g;
                }
            };
            let p = FrogParams::new(n, 1).expect("valid");
            let a = frog_measurements_time(&z, &p, None).expect("valid");
            let b = frog_measurements_time(&translate(&z, gamma), &p, None).expect("valid");
            let dev = max_relative_deviation(&a, &b, 1e-12).expect("same grid");
            smallest = smallest.min(dev);
            if dev > 1e-3 {
                changed += 1;
            }
        }
        (
            changed >= 99,
            format!("{changed}/100 trials changed by > 1e-3; smallest change {smallest:.2e}"),
        )
    })
}

fn unit_point(rng: &mut ChaCha8Rng) -> Complex64 {
    Complex64::new(rng.random_range(-5.0..5.0), rng.random_range(-5.0..5.0))
}

pub fn criterion_5() -> CriterionOutcome {
    timed(5, "circle solver oracles", || {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let (mut three_err, mut real_err, mut scaled_err): (f64, f64, f64) = (0.0, 0.0, 0.0);
        let mut conj_exact = true;
        let mut scaled_conj: f64 = 0.0;
        let mut failures = 0;
        for _ in 0..1000 {
            let z = unit_point(&mut rng);
            let v = loop {
                let v = [
                    unit_point(&mut rng),
                    unit_point(&mut rng),
                    unit_point(&mut rng),
                ];
                let ratio = (v[0] - v[1]) / (v[0] - v[2]);
                if ratio.im.abs() >= 1e-12 {
                    break v;
                }
            };
            let n: Vec<f64> = v.iter().map(|vj| (z + vj).norm()).collect();
            match solve_three_circles(v[0], v[1], v[2], n[0], n[1], n[2]) {
                Ok(got) => three_err = three_err.max((got - z).norm()),
                Err(_) => failures += 1,
            }
        }
        for _ in 0..1000 {
            let z = unit_point(&mut rng);
            let m = rng.random_range(0.1..3.0) * if rng.random_bool(0.5) { 1.0 } else { -1.0 };
            let (v1, v2) = loop {
                let (a, b) = (rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0));
                if a != b {
                    break (a, b);
                }
            };
            let (n1, n2) = ((z + m * v1).norm(), (z + m * v2).norm());
            match solve_two_circles_real(v1, v2, m, n1, n2) {
                Ok((p, q)) => {
                    conj_exact &= p == q.conj();
                    real_err = real_err.max((p - z).norm().min((q - z).norm()));
                }
                Err(_) => failures += 1,
            }
        }
        for _ in 0..1000 {
            let w = unit_point(&mut rng);
            let m = loop {
                let m = unit_point(&mut rng);
                if m.im != 0.0 && m.norm() > 0.1 {
                    break m;
                }
            };
            let (v1, v2) = loop {
                let (a, b) = (rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0));
                if a != b {
                    break (a, b);
                }
            };
            let z = m * w;
            let (n1, n2) = ((z + m * v1).norm(), (z + m * v2).norm());
            match solve_two_circles_scaled(v1, v2, m, n1, n2) {
                Ok((p, q)) => {
                    let partner = m * w.conj();
                    let err = ((p - z).norm().max((q - partner).norm()))
                        .min((q - z).norm().max((p - partner).norm()));
                    scaled_err = scaled_err.max(err);
                    let (pa, qa) = (p / m, q / m);
                    scaled_conj = scaled_conj.max((pa - qa.conj()).norm() / pa.norm().max(1.0));
                }
                Err(_) => failures += 1,
            }
        }
        let passed = failures == 0
            && three_err <= 1e-8
            && real_err <= 1e-8
            && scaled_err <= 1e-8
            && conj_exact
            && scaled_conj <= 4.0 * f64::EPSILON;
        (
            passed,
            format!(
                "three-circle worst {three_err:.1e}; real pair worst {real_err:.1e} (conjugate: {conj_exact}); \
                 scaled pair worst {scaled_err:.1e} (conjugate after /m to {scaled_conj:.1e}); solver errors {failures}"
            ),
        )
    })
}

/// Every `(N, L)` with `N` even in `8..=max_n`, `L` odd and `r` in `5..=64`.
pub fn admissible_configs(max_n: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for n in (8..=max_n).step_by(2) {
        for l in (1..=n).step_by(2) {
            let r = n.div_ceil(l);
            if (5..=64).contains(&r) {
                out.push((n, l));
            }
        }
    }
    out
}

pub fn criterion_6(opts: &SelftestOptions) -> CriterionOutcome {
    timed(6, "index plan validity", || {
        let configs = admissible_configs(if opts.quick { 20 } else { 128 });
        let mut bad = Vec::new();
        for &(n, l) in &configs {
            let params = FrogParams::new(n, l).expect("valid");
            let ok = plan_indices(&params)
                .and_then(|plan| plan.validate().map(|_| plan))
                .map(|plan| plan.entries().len() == MeasurementIndexPlan::expected_len(n));
            if !matches!(ok, Ok(true)) {
                bad.push(format!("({n},{l})"));
            }
        }
        let mut detail = format!(
            "{}/{} configurations valid",
            configs.len() - bad.len(),
            configs.len()
        );
        if !bad.is_empty() {
            detail.push_str(&format!("; failing: {}", bad.join(" ")));
        }
        (bad.is_empty(), detail)
    })
}

pub fn criterion_7() -> CriterionOutcome {
    timed(7, "modulus rigidity of verification", || {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut swapped_min = f64::INFINITY;
        let mut true_max: f64 = 0.0;
        for trial in 0..100 {
            let (n, l) = END_TO_END_CONFIGS[trial % 4];
            let p = FrogParams::new(n, l).expect("valid");
            let z = generic_analytic(n, &mut rng).expect("valid");
            let meas = frog_measurements_time(&z, &p, None).expect("valid");
            let s = dft(&z);
            let mut sw = s.clone().into_vec();
            sw.swap(0, n / 2);
            let sw = Spectrum::new(sw).expect("valid");
            swapped_min = swapped_min.min(verify_solution(&sw, &meas, &p).expect("valid"));
            let neg = Spectrum::new(s.as_slice().iter().map(|c| -c).collect()).expect("valid");
            let conj =
                Spectrum::new(s.as_slice().iter().map(|c| c.conj()).collect()).expect("valid");
            let neg_conj =
                Spectrum::new(s.as_slice().iter().map(|c| -c.conj()).collect()).expect("valid");
            for variant in [&s, &neg, &conj, &neg_conj] {
                true_max = true_max.max(verify_solution(variant, &meas, &p).expect("valid"));
            }
        }
        (
            swapped_min > 1e-3 && true_max < 1e-8,
            format!("swapped moduli min residual {swapped_min:.2e} (> 1e-3); true/conjugate/negated max {true_max:.2e} (< 1e-8)"),
        )
    })
}

pub fn criterion_8() -> CriterionOutcome {
    timed(8, "even-L infeasibility probe", || {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let cfg = RecoveryConfig::default();
        let mut infeasible = 0;
        let mut truth_feasible = 0;
        let mut errors = 0;
        for trial in 0..100 {
            let (n, l) = [(16, 2), (20, 2), (24, 4), (32, 4)][trial % 4];
            let p = FrogParams::new(n, l).expect("valid");
            let z = generic_analytic(n, &mut rng).expect("valid");
            let meas = frog_measurements_freq(&dft(&z), &p, None).expect("valid");
            let s = dft(&z);
            let z0 = s[0].re;
            let u = loop {
                let u: f64 = rng.random_range(-2.0..2.0);
                if (u - 1.0).abs() > 0.01 && (u + 1.0).abs() > 0.01 && u.abs() > 0.01 {
                    break u;
                }
            };
            let theta = rng.random_range(0.0..TAU);
            match even_l_infeasibility_probe(&meas, &p, u * z0, theta, &cfg) {
                Ok(true) => infeasible += 1,
                Ok(false) => {}
                Err(_) => errors += 1,
            }
            match even_l_infeasibility_probe(&meas, &p, z0, s[1].arg(), &cfg) {
                Ok(false) => truth_feasible += 1,
                Ok(true) => {}
                Err(_) => errors += 1,
            }
        }
        (
            infeasible >= 99 && truth_feasible == 100 && errors == 0,
            format!("wrong alpha infeasible {infeasible}/100; true alpha feasible {truth_feasible}/100; errors {errors}"),
        )
    })
}

pub fn run_all(opts: &SelftestOptions) -> Vec<CriterionOutcome> {
    vec![
        criterion_1(),
        criterion_2(opts),
        criterion_3(opts),
        criterion_4(),
        criterion_5(),
        criterion_6(opts),
        criterion_7(),
        criterion_8(),
    ]
}
