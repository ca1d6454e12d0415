//! Disk formats: coefficient files, JSON reports, JSON-lines run streams,
//! and run manifests.
//!
//! Every float leaves this module with 17 significant digits (`d.16e`
//! notation), which is exactly enough to reproduce any finite `f64`
//! bit-for-bit on reparse. Writers are pure functions of their inputs, so a
//! rerun with the same data produces byte-identical files.
//!
//! The coefficient file format is the JSON object
//! `{"n": N, "coeffs": [[re, im], ...]}` with `coeffs.len() == N`; all tools
//! in the workspace read and write this shape.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::ser::Formatter;

use crate::dynamics::SimulationRun;
use crate::error::{CoreError, Result};
use crate::fock::CoeffState;
use crate::nonlinear::hamiltonian;

// ---------------------------------------------------------------------------
// 17-significant-digit JSON
// ---------------------------------------------------------------------------

/// Formatter that renders every `f64` as `d.dddddddddddddddde±x` — one digit
/// before the point, sixteen after: 17 significant digits, the number needed
/// to identify any finite double uniquely.
struct SigDigits;

impl Formatter for SigDigits {
    fn write_f64<W>(&mut self, writer: &mut W, value: f64) -> std::io::Result<()>
    where
        W: ?Sized + std::io::Write,
    {
        write!(writer, "{value:.16e}")
    }
}

/// Serialize any value to compact JSON with 17-significant-digit floats.
pub fn to_json_string<T: Serialize>(value: &T) -> Result<String> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, SigDigits);
    value.serialize(&mut ser)?;
    String::from_utf8(buf)
        .map_err(|e| CoreError::InvalidState(format!("serializer produced non-UTF8 text: {e}")))
}

/// Write a value as one newline-terminated JSON document.
pub fn write_json<T: Serialize>(path: impl AsRef<Path>, value: &T) -> Result<()> {
    let mut text = to_json_string(value)?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}

// ---------------------------------------------------------------------------
// Coefficient files
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct StateFile {
    n: usize,
    coeffs: Vec<(f64, f64)>,
}

fn pairs(state: &CoeffState) -> Vec<(f64, f64)> {
    state.coeffs().iter().map(|v| (v.re, v.im)).collect()
}

/// Render a state as the standard coefficient JSON object.
pub fn state_to_json(state: &CoeffState) -> Result<String> {
    to_json_string(&StateFile {
        n: state.len(),
        coeffs: pairs(state),
    })
}

/// Parse the standard coefficient JSON object, validating the length field
/// and finiteness of every entry.
pub fn state_from_json(text: &str) -> Result<CoeffState> {
    let file: StateFile = serde_json::from_str(text)?;
    if file.n != file.coeffs.len() {
        return Err(CoreError::arg(format!(
            "coefficient file declares n = {} but carries {} entries",
            file.n,
            file.coeffs.len()
        )));
    }
    CoeffState::new(
        file.coeffs
            .into_iter()
            .map(|(re, im)| Complex64::new(re, im))
            .collect(),
    )
}

/// Write a state to `path` in the standard coefficient format.
pub fn write_state(path: impl AsRef<Path>, state: &CoeffState) -> Result<()> {
    let mut text = state_to_json(state)?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}

/// Read a state from a coefficient file.
pub fn read_state(path: impl AsRef<Path>) -> Result<CoeffState> {
    state_from_json(&std::fs::read_to_string(path)?)
}

// ---------------------------------------------------------------------------
// Run manifests
// ---------------------------------------------------------------------------

/// Record of one tool invocation: the command, its full parameter set, the
/// seed and truncation when applicable, the tool version, and every file the
/// run produced. Rerunning the same manifest single-threaded reproduces the
/// numeric outputs byte-for-byte; the manifest itself is written alongside
/// the primary output as `<output>.manifest.json` and never lists itself.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub parameters: BTreeMap<String, String>,
    pub seed: Option<u64>,
    pub truncation: Option<usize>,
    pub tool_version: String,
    pub outputs: Vec<String>,
    pub wall_clock_seconds: f64,
}

impl RunManifest {
    pub fn new(command: impl Into<String>) -> Self {
        RunManifest {
            command: command.into(),
            parameters: BTreeMap::new(),
            seed: None,
            truncation: None,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            outputs: Vec::new(),
            wall_clock_seconds: 0.0,
        }
    }

    pub fn set_seed(&mut self, seed: u64) {
        self.seed = Some(seed);
    }

    pub fn set_truncation(&mut self, n: usize) {
        self.truncation = Some(n);
    }

    /// Record one flag or option of the invocation, stringified.
    pub fn parameter(&mut self, key: impl Into<String>, value: impl ToString) {
        self.parameters.insert(key.into(), value.to_string());
    }

    /// Register a produced file.
    pub fn record_output(&mut self, path: impl AsRef<Path>) {
        self.outputs.push(path.as_ref().display().to_string());
    }

    /// The manifest path that accompanies `output`.
    pub fn manifest_path(output: impl AsRef<Path>) -> PathBuf {
        let output = output.as_ref();
        let mut name = output
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_else(|| "output".to_string());
        name.push_str(".manifest.json");
        output.with_file_name(name)
    }

    /// Write the manifest next to its primary output; returns the path used.
    pub fn write_alongside(&self, primary: impl AsRef<Path>) -> Result<PathBuf> {
        let path = Self::manifest_path(primary);
        write_json(&path, self)?;
        Ok(path)
    }
}

// ---------------------------------------------------------------------------
// Run streams
// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct SnapshotRecord {
    t: f64,
    coeffs: Vec<(f64, f64)>,
    #[serde(rename = "M")]
    mass: f64,
    #[serde(rename = "P")]
    degree: f64,
    #[serde(rename = "Q")]
    magnetic: (f64, f64),
    #[serde(rename = "H")]
    energy: f64,
    #[serde(flatten)]
    w: BTreeMap<String, f64>,
}

fn w_key(order: f64) -> String {
    if order.fract() == 0.0 && order.abs() < 1e15 {
        format!("W_{}", order as i64)
    } else {
        format!("W_{order}")
    }
}

/// Render a completed run as a JSON-lines stream, one record per stored
/// snapshot: `{t, coeffs, M, P, Q: [re, im], H, W_k...}`. Conserved fields
/// and weighted norms are recomputed as the exact functionals of the stored
/// coefficients.
pub fn run_stream_lines(run: &SimulationRun, w_orders: &[f64]) -> Result<String> {
    let mut out = String::new();
    for (t, state) in &run.snapshots {
        let q = state.magnetic();
        let w: BTreeMap<String, f64> = w_orders
            .iter()
            .map(|&s| (w_key(s), state.weighted_norm_sq(s)))
            .collect();
        let record = SnapshotRecord {
            t: *t,
            coeffs: pairs(state),
            mass: state.mass(),
            degree: state.degree(),
            magnetic: (q.re, q.im),
            energy: hamiltonian(state),
            w,
        };
        out.push_str(&to_json_string(&record)?);
        out.push('\n');
    }
    Ok(out)
}

#[derive(Serialize)]
struct DriftRecord {
    mass: f64,
    degree: f64,
    magnetic: f64,
    energy: f64,
}

#[derive(Serialize)]
struct GrowthRecord {
    order: f64,
    envelope_c: f64,
    late_ratio: f64,
    exponent: f64,
}

#[derive(Serialize)]
struct SummaryRecord {
    steps: usize,
    final_time: f64,
    max_rel_drift: DriftRecord,
    w_growth: Vec<GrowthRecord>,
}

/// Render the run summary (drift maxima and fitted growth exponents) as JSON.
pub fn run_summary_json(run: &SimulationRun) -> Result<String> {
    let d = &run.summary.max_rel_drift;
    to_json_string(&SummaryRecord {
        steps: run.summary.steps,
        final_time: run.final_time,
        max_rel_drift: DriftRecord {
            mass: d.mass,
            degree: d.degree,
            magnetic: d.magnetic,
            energy: d.energy,
        },
        w_growth: run
            .summary
            .w_growth
            .iter()
            .map(|f| GrowthRecord {
                order: f.order,
                envelope_c: f.envelope_c,
                late_ratio: f.late_ratio,
                exponent: f.exponent,
            })
            .collect(),
    })
}
