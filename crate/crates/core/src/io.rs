//! JSON file formats.
//!
//! Signals: `{"N": n, "values": [[re, im], …], "spectrum": [[re, im], …]}`
//! with `spectrum` optional. Measurements: `{"N": n, "L": l, "entries":
//! [[k, m, value], …]}` in ascending `(k, m)` order. Floats are written with
//! 17 significant digits so that files round-trip exactly.

use std::fs;
use std::io::{self, Write};
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frog::{FrogMeasurements, FrogParams};
use crate::spectral::{dft, Spectrum, TimeSignal};

/// Compact JSON with every `f64` printed as `{:.16e}`.
#[derive(Debug, Clone, Copy, Default)]
pub struct FixedDigits;

impl serde_json::ser::Formatter for FixedDigits {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        if value.is_finite() {
            write!(writer, "{value:.16e}")
        } else {
            writer.write_all(b"null")
        }
    }
}

pub fn to_json_string<T: Serialize>(value: &T) -> Result<String> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, FixedDigits);
    value
        .serialize(&mut ser)
        .map_err(|e| Error::Parse(format!("serialization failed: {e}")))?;
    Ok(String::from_utf8(buf).expect("serde_json emits UTF-8"))
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SignalFile {
    #[serde(rename = "N")]
    n: usize,
    values: Vec<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    spectrum: Option<Vec<[f64; 2]>>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MeasurementFile {
    #[serde(rename = "N")]
    n: usize,
    #[serde(rename = "L")]
    l: usize,
    entries: Vec<(usize, usize, f64)>,
}

fn pairs(values: &[Complex64]) -> Vec<[f64; 2]> {
    values.iter().map(|c| [c.re, c.im]).collect()
}

fn complexes(values: &[[f64; 2]]) -> Vec<Complex64> {
    values
        .iter()
        .map(|&[re, im]| Complex64::new(re, im))
        .collect()
}

fn parse_error(what: &str, e: serde_json::Error) -> Error {
    Error::Parse(format!("{what}: {e}"))
}

/// A decoded signal file.
#[derive(Debug, Clone, PartialEq)]
pub struct SignalRecord {
    pub signal: TimeSignal,
    pub spectrum: Option<Spectrum>,
}

pub fn signal_to_json(z: &TimeSignal, with_spectrum: bool) -> Result<String> {
    signal_with_spectrum_to_json(z, with_spectrum.then(|| dft(z)).as_ref())
}

pub fn signal_with_spectrum_to_json(z: &TimeSignal, spectrum: Option<&Spectrum>) -> Result<String> {
    let file = SignalFile {
        n: z.len(),
        values: pairs(z.as_slice()),
        spectrum: spectrum.map(|s| pairs(s.as_slice())),
    };
    to_json_string(&file)
}

pub fn signal_from_json(text: &str) -> Result<SignalRecord> {
    let file: SignalFile = serde_json::from_str(text).map_err(|e| parse_error("signal file", e))?;
    if file.values.len() != file.n {
        return Err(Error::Parse(format!(
            "signal file: N = {} but {} values given",
            file.n,
            file.values.len()
        )));
    }
    let spectrum = match file.spectrum {
        Some(s) if s.len() != file.n => {
            return Err(Error::Parse(format!(
                "signal file: N = {} but {} spectrum coefficients given",
                file.n,
                s.len()
            )))
        }
        Some(s) => Some(Spectrum::new(complexes(&s)).map_err(|e| Error::Parse(e.to_string()))?),
        None => None,
    };
    Ok(SignalRecord {
        signal: TimeSignal::new(complexes(&file.values))
            .map_err(|e| Error::Parse(e.to_string()))?,
        spectrum,
    })
}

pub fn measurements_to_json(meas: &FrogMeasurements) -> Result<String> {
    let file = MeasurementFile {
        n: meas.params().n(),
        l: meas.params().l(),
        entries: meas.iter().map(|((k, m), v)| (k, m, v)).collect(),
    };
    to_json_string(&file)
}

pub fn measurements_from_json(text: &str) -> Result<FrogMeasurements> {
    let file: MeasurementFile =
        serde_json::from_str(text).map_err(|e| parse_error("measurement file", e))?;
    let params = FrogParams::new(file.n, file.l).map_err(|e| Error::Parse(e.to_string()))?;
    let mut meas = FrogMeasurements::new(params);
    for (k, m, v) in file.entries {
        if meas.get(k, m).is_some() {
            return Err(Error::Parse(format!(
                "measurement file: duplicate entry (k={k}, m={m})"
            )));
        }
        meas.insert(k, m, v)
            .map_err(|e| Error::Parse(e.to_string()))?;
    }
    Ok(meas)
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    let mut body = text.to_owned();
    body.push('\n');
    fs::write(path, body)?;
    Ok(())
}

pub fn write_signal(path: &Path, z: &TimeSignal, spectrum: Option<&Spectrum>) -> Result<()> {
    write_text(path, &signal_with_spectrum_to_json(z, spectrum)?)
}

pub fn read_signal(path: &Path) -> Result<SignalRecord> {
    signal_from_json(&fs::read_to_string(path)?)
}

pub fn write_measurements(path: &Path, meas: &FrogMeasurements) -> Result<()> {
    write_text(path, &measurements_to_json(meas)?)
}

pub fn read_measurements(path: &Path) -> Result<FrogMeasurements> {
    measurements_from_json(&fs::read_to_string(path)?)
}
