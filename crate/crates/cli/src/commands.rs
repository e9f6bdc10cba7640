use std::fmt;
use std::path::Path;

use frogpr::ambiguity::{equivalent_up_to_group, DEFAULT_EQUIVALENCE_TOL};
use frogpr::analytic::{generic_analytic, is_analytic_default};
use frogpr::frog::{frog_measurements_time, plan_indices, FrogParams};
use frogpr::io::{read_measurements, read_signal, write_measurements, write_signal};
use frogpr::recovery::{recover, RecoveryConfig};
use frogpr::selftest::{run_all, SelftestOptions};
use frogpr::spectral::dft;
use frogpr::Error;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::report::RunReport;

/// Failure of a command, split by exit status.
#[derive(Debug)]
pub enum CliError {
    /// Exit status 1.
    Refused(String),
    /// Exit status 2.
    Usage(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Refused(_) => 1,
            CliError::Usage(_) => 2,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Refused(msg) | CliError::Usage(msg) => f.write_str(msg),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Parse(_) | Error::Io(_) | Error::LengthMismatch { .. } => {
                CliError::Usage(e.to_string())
            }
            _ => CliError::Refused(e.to_string()),
        }
    }
}

fn with_path(path: &Path, e: Error) -> CliError {
    let inner = CliError::from(e);
    let msg = format!("{}: {inner}", path.display());
    match inner {
        CliError::Refused(_) => CliError::Refused(msg),
        CliError::Usage(_) => CliError::Usage(msg),
    }
}

/// Outcome of a command that ran to completion; `ok = false` maps to exit
/// status 1 (inequivalent signals, failed self-test).
pub struct Done {
    pub report: RunReport,
    pub ok: bool,
}

fn path_string(p: &Path) -> String {
    p.display().to_string()
}

pub fn generate(n: usize, seed: u64, out: &Path) -> Result<Done, CliError> {
    if n < 4 || !n.is_multiple_of(2) {
        return Err(CliError::Usage(format!(
            "--n must be even and at least 4, got {n}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let z = generic_analytic(n, &mut rng)?;
    let s = dft(&z);
    let check = is_analytic_default(&s);
    if !check.is_analytic {
        return Err(CliError::Refused(format!(
            "generated signal failed the analyticity check (violation {:e})",
            check.max_violation
        )));
    }
    write_signal(out, &z, Some(&s)).map_err(|e| with_path(out, e))?;
    eprintln!("wrote analytic signal of length {n} to {}", out.display());
    let mut report = RunReport::new("generate").input("n", n).input("seed", seed);
    report.outputs.insert("signal", path_string(out));
    report
        .residuals
        .insert("analyticity_violation", check.max_violation);
    Ok(Done { report, ok: true })
}

pub fn measure(signal: &Path, l: usize, plan_only: bool, out: &Path) -> Result<Done, CliError> {
    let z = read_signal(signal)
        .map_err(|e| with_path(signal, e))?
        .signal;
    let params = FrogParams::new(z.len(), l).map_err(|e| CliError::Usage(e.to_string()))?;
    let keys = if plan_only {
        Some(plan_indices(&params)?.entries())
    } else {
        None
    };
    let meas = frog_measurements_time(&z, &params, keys.as_deref())?;
    write_measurements(out, &meas).map_err(|e| with_path(out, e))?;
    eprintln!(
        "wrote {} FROG entries (N = {}, L = {l}, r = {}) to {}",
        meas.len(),
        params.n(),
        params.r(),
        out.display()
    );
    let mut report = RunReport::new("measure")
        .input("signal", path_string(signal))
        .input("n", params.n())
        .input("l", l)
        .input("plan_only", plan_only)
        .input("entries", meas.len());
    report.outputs.insert("measurements", path_string(out));
    Ok(Done { report, ok: true })
}

pub fn recover_cmd(meas_path: &Path, out: &Path, tol: f64) -> Result<Done, CliError> {
    let meas = read_measurements(meas_path).map_err(|e| with_path(meas_path, e))?;
    let params = *meas.params();
    params.check_recoverable()?;
    let plan = plan_indices(&params)?;
    let cfg = RecoveryConfig {
        residual_tol: tol,
        ..RecoveryConfig::default()
    };
    let result = recover(&meas, &plan, &cfg)?;
    write_signal(out, &result.signal, Some(&result.spectrum)).map_err(|e| with_path(out, e))?;
    eprintln!(
        "recovered N = {} from {} planned entries (sign branch {:+}, verification residual {:.3e})",
        params.n(),
        plan.entries().len(),
        result.sign_branch,
        result.verification_residual
    );
    let mut report = RunReport::new("recover")
        .input("measurements", path_string(meas_path))
        .input("n", params.n())
        .input("l", params.l())
        .input("tol", tol);
    report.outputs.insert("signal", path_string(out));
    report
        .residuals
        .insert("verification", result.verification_residual);
    report.sign_branch = Some(result.sign_branch);
    Ok(Done { report, ok: true })
}

pub fn check_equiv(a: &Path, b: &Path, tol: f64) -> Result<Done, CliError> {
    let za = read_signal(a).map_err(|e| with_path(a, e))?.signal;
    let zb = read_signal(b).map_err(|e| with_path(b, e))?.signal;
    let eq = equivalent_up_to_group(&za, &zb, tol)?;
    eprintln!(
        "{}: best element {}, residual {:.3e} (tol {tol:e})",
        if eq.equivalent {
            "equivalent"
        } else {
            "not equivalent"
        },
        eq.best_element,
        eq.residual
    );
    let mut report = RunReport::new("check-equiv")
        .input("a", path_string(a))
        .input("b", path_string(b))
        .input("tol", tol);
    report.residuals.insert("equivalence", eq.residual);
    report.equivalence = Some(eq);
    Ok(Done {
        report,
        ok: eq.equivalent,
    })
}

pub fn selftest(opts: SelftestOptions) -> Result<Done, CliError> {
    let outcomes = run_all(&opts);
    for o in &outcomes {
        eprintln!("{o}");
    }
    let passed = outcomes.iter().filter(|o| o.passed).count();
    eprintln!("{passed}/{} criteria passed", outcomes.len());
    let mut report = RunReport::new("selftest").input("quick", opts.quick);
    if let Some(d) = opts.perturbation {
        report = report.input("perturbation", d);
    }
    let ok = passed == outcomes.len();
    report.criteria = outcomes;
    Ok(Done { report, ok })
}

/// `--tol` if given, else `FROGPR_TOL`, else `default`.
pub fn resolve_tol(flag: Option<f64>, env: Option<String>, default: f64) -> Result<f64, CliError> {
    let tol = match (flag, env) {
        (Some(t), _) => t,
        (None, Some(text)) => text
            .trim()
            .parse()
            .map_err(|_| CliError::Usage(format!("FROGPR_TOL is not a number: {text:?}")))?,
        (None, None) => default,
    };
    if tol.is_nan() || tol < 0.0 || tol.is_infinite() {
        return Err(CliError::Usage(format!(
            "tolerance must be finite and >= 0, got {tol}"
        )));
    }
    Ok(tol)
}

pub const DEFAULT_RECOVERY_TOL: f64 = 1e-6;
pub const DEFAULT_EQUIV_TOL: f64 = DEFAULT_EQUIVALENCE_TOL;
