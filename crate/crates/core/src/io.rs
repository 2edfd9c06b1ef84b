//! JSON system configuration and CSV trace files.

use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::design::{design, DesignOptions, FilterDesign, FilterKind, RotationMode, RotationStrategy, DEFAULT_RETRY_BUDGET};
use crate::error::{Error, Result};
use crate::linalg::{Complex, Matrix, ToleranceConfig, Vector};
use crate::sim::{metrics, run_filter, simulate, Signal, SimTrace, CONVERGENCE_TOL};
use crate::sysmodel::{FaultLtiSystem, LtiSystem, Plant};

/// A pole given either as a real number or as `[re, im]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PoleSpec {
    Real(f64),
    Complex([f64; 2]),
}

impl PoleSpec {
    pub fn to_complex(self) -> Complex {
        match self {
            PoleSpec::Real(re) => Complex::new(re, 0.0),
            PoleSpec::Complex([re, im]) => Complex::new(re, im),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FilterConfig {
    pub kind: FilterKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rotation: Option<RotationMode>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub poles: Option<Vec<PoleSpec>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub obs_margin: Option<f64>,
}

/// Plant, filter and experiment description read from JSON.
///
/// `B` and `D` may be omitted for plants driven by faults only; `E`
/// defaults to zero when `L` is given.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemConfig {
    #[serde(rename = "A")]
    pub a: Vec<Vec<f64>>,
    #[serde(rename = "B", default, skip_serializing_if = "Option::is_none")]
    pub b: Option<Vec<Vec<f64>>>,
    #[serde(rename = "C")]
    pub c: Vec<Vec<f64>>,
    #[serde(rename = "D", default, skip_serializing_if = "Option::is_none")]
    pub d: Option<Vec<Vec<f64>>>,
    #[serde(rename = "L", default, skip_serializing_if = "Option::is_none")]
    pub l: Option<Vec<Vec<f64>>>,
    #[serde(rename = "E", default, skip_serializing_if = "Option::is_none")]
    pub e: Option<Vec<Vec<f64>>>,
    /// Horizon; defaults to the state dimension.
    #[serde(rename = "M", default, skip_serializing_if = "Option::is_none")]
    pub horizon: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub filter: Option<FilterConfig>,
    /// Unknown inputs (or faults, for fault plants).
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub signals: Vec<Signal>,
    /// Known inputs of a fault plant.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub known_inputs: Vec<Signal>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x0: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub steps: Option<usize>,
}

/// Parses and checks a configuration; the plant is built to surface
/// dimension errors early.
pub fn parse_config(text: &str) -> Result<SystemConfig> {
    let cfg: SystemConfig = serde_json::from_str(text).map_err(|e| Error::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    cfg.to_plant()?;
    cfg.check_experiment()?;
    Ok(cfg)
}

pub fn read_config(path: &Path) -> Result<SystemConfig> {
    parse_config(&std::fs::read_to_string(path)?)
}

pub fn config_to_json(cfg: &SystemConfig) -> String {
    serde_json::to_string_pretty(cfg).expect("configuration serializes")
}

fn semantic(path: impl Into<String>, message: impl Into<String>) -> Error {
    Error::Semantic {
        path: path.into(),
        message: message.into(),
    }
}

fn to_matrix(rows: &[Vec<f64>], path: &str, cols_if_empty: usize) -> Result<Matrix> {
    if rows.is_empty() {
        return Ok(Matrix::zeros(0, cols_if_empty));
    }
    let cols = rows[0].len();
    for (i, r) in rows.iter().enumerate() {
        if r.len() != cols {
            return Err(semantic(
                format!("{path}[{i}]"),
                format!("row has {} entries, expected {cols}", r.len()),
            ));
        }
        if let Some(j) = r.iter().position(|v| !v.is_finite()) {
            return Err(semantic(format!("{path}[{i}][{j}]"), "entry is not finite"));
        }
    }
    Ok(Matrix::from_fn(rows.len(), cols, |i, j| rows[i][j]))
}

fn relabel(err: Error) -> Error {
    match err {
        Error::DimensionMismatch { what, expected, got } => {
            semantic(what, format!("expected shape {expected}, got {got}"))
        }
        Error::InvalidDimension(msg) => semantic("", msg),
        other => other,
    }
}

impl SystemConfig {
    pub fn to_plant(&self) -> Result<Plant> {
        let a = to_matrix(&self.a, "A", 0)?;
        let n = a.nrows();
        let c = to_matrix(&self.c, "C", n)?;
        let b = match &self.b {
            Some(rows) => to_matrix(rows, "B", 0)?,
            None => Matrix::zeros(n, 0),
        };
        let b = if b.nrows() == 0 && b.ncols() == 0 { Matrix::zeros(n, 0) } else { b };
        let d = match &self.d {
            Some(rows) => to_matrix(rows, "D", b.ncols())?,
            None => Matrix::zeros(c.nrows(), b.ncols()),
        };
        let d = if d.nrows() == 0 && b.ncols() == 0 { Matrix::zeros(c.nrows(), 0) } else { d };
        let base = LtiSystem::new(a, b, c, d).map_err(relabel)?;
        match (&self.l, &self.e) {
            (None, None) => Ok(Plant::Input(base)),
            (None, Some(_)) => Err(semantic("E", "E given without L")),
            (Some(l), e) => {
                let l = to_matrix(l, "L", 0)?;
                let e = match e {
                    Some(rows) => to_matrix(rows, "E", l.ncols())?,
                    None => Matrix::zeros(base.outputs(), l.ncols()),
                };
                Ok(Plant::Fault(FaultLtiSystem::new(base, l, e).map_err(relabel)?))
            }
        }
    }

    fn check_experiment(&self) -> Result<()> {
        let plant = self.to_plant()?;
        let base = plant.base();
        let unknown = match &plant {
            Plant::Input(s) => s.inputs(),
            Plant::Fault(f) => f.faults(),
        };
        for (i, s) in self.signals.iter().enumerate() {
            if s.channel >= unknown {
                return Err(semantic(format!("signals[{i}].channel"), format!("must be < {unknown}")));
            }
        }
        for (i, s) in self.known_inputs.iter().enumerate() {
            if !plant.is_fault() {
                return Err(semantic(format!("known_inputs[{i}]"), "known inputs need a fault plant"));
            }
            if s.channel >= base.inputs() {
                return Err(semantic(
                    format!("known_inputs[{i}].channel"),
                    format!("must be < {}", base.inputs()),
                ));
            }
        }
        if let Some(x0) = &self.x0 {
            if x0.len() != base.states() {
                return Err(semantic("x0", format!("expected {} entries, got {}", base.states(), x0.len())));
            }
        }
        if let Some(f) = &self.filter {
            if f.kind.is_fault() != plant.is_fault() {
                return Err(semantic("filter.kind", "filter kind does not match the plant"));
            }
            if let Some(m) = f.obs_margin {
                if !(m > 0.0) {
                    return Err(semantic("filter.obs_margin", "must be positive"));
                }
            }
        }
        if let Some(h) = self.horizon {
            if h < base.states() {
                return Err(semantic("M", format!("must be at least the state dimension {}", base.states())));
            }
        }
        Ok(())
    }

    pub fn initial_state(&self) -> Vector {
        match &self.x0 {
            Some(v) => Vector::from_vec(v.clone()),
            None => Vector::zeros(self.a.len()),
        }
    }

    /// Design options with an optional seed override (for instance from the
    /// command line or environment).
    pub fn design_options(&self, seed_override: Option<u64>, tol: ToleranceConfig) -> Result<DesignOptions> {
        let plant = self.to_plant()?;
        let default_kind = if plant.is_fault() { FilterKind::FaultStep } else { FilterKind::Step };
        let f = self.filter.clone().unwrap_or(FilterConfig {
            kind: default_kind,
            rotation: None,
            poles: None,
            seed: None,
            obs_margin: None,
        });
        let seed = seed_override.or(f.seed).unwrap_or(0);
        let mode = match f.rotation {
            Some(RotationMode::RandomSeeded { retry_budget, .. }) => RotationMode::RandomSeeded { seed, retry_budget },
            Some(mode) => mode,
            None => RotationMode::RandomSeeded {
                seed,
                retry_budget: DEFAULT_RETRY_BUDGET,
            },
        };
        Ok(DesignOptions {
            kind: f.kind,
            strategy: RotationStrategy {
                mode,
                obs_margin: f.obs_margin.unwrap_or(tol.obs_margin),
            },
            poles: f.poles.map(|p| p.into_iter().map(PoleSpec::to_complex).collect()),
            horizon: self.horizon,
            tol,
        })
    }
}

/// Simulation length used when neither the file nor the caller gives one.
pub const DEFAULT_STEPS: usize = 100;

impl SystemConfig {
    /// Designs the filter with `opts`, simulates the configured experiment
    /// and runs the filter over it.
    pub fn run(&self, opts: &DesignOptions, steps: Option<usize>) -> Result<(FilterDesign, SimTrace)> {
        let plant = self.to_plant()?;
        let d = design(&plant, opts)?;
        let steps = steps.or(self.steps).unwrap_or(DEFAULT_STEPS);
        let x0 = self.initial_state();
        let sim = if plant.is_fault() {
            simulate(&plant, &x0, &self.known_inputs, &self.signals, steps)?
        } else {
            simulate(&plant, &x0, &self.signals, &[], steps)?
        };
        let trace = run_filter(&d, &sim)?;
        Ok((d, trace))
    }
}

/// `%.12g`-style rendering.
fn fmt_sig(v: f64) -> String {
    if v == 0.0 || !v.is_finite() {
        return if v.is_finite() { "0".into() } else { format!("{v}") };
    }
    let exp = v.abs().log10().floor() as i32;
    if (-5..12).contains(&exp) {
        let decimals = (11 - exp).max(0) as usize;
        let s = format!("{v:.decimals$}");
        let s = if s.contains('.') { s.trim_end_matches('0').trim_end_matches('.').to_string() } else { s };
        if s == "-0" {
            "0".into()
        } else {
            s
        }
    } else {
        let s = format!("{v:.11e}");
        let (mant, e) = s.split_once('e').expect("scientific format");
        let mant = if mant.contains('.') { mant.trim_end_matches('0').trim_end_matches('.') } else { mant };
        format!("{mant}e{e}")
    }
}

fn header(l: usize, c: usize) -> Vec<String> {
    let mut h = vec!["k".to_string()];
    for (prefix, count) in [("y", l), ("truth", c), ("est", c), ("abs_err", c)] {
        h.extend((1..=count).map(|i| format!("{prefix}_{i}")));
    }
    h
}

/// Writes `k,y_*,truth_*,est_*,abs_err_*` rows.
pub fn write_trace<W: Write>(trace: &SimTrace, out: W) -> Result<()> {
    let l = trace.y.first().map_or(0, |v| v.len());
    let c = trace.truth.first().map_or(0, |v| v.len());
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
    w.write_record(header(l, c))?;
    for i in 0..trace.len() {
        let mut rec = vec![trace.k[i].to_string()];
        for v in [&trace.y[i], &trace.truth[i], &trace.estimate[i], &trace.abs_err[i]] {
            rec.extend(v.iter().map(|&x| fmt_sig(x)));
        }
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_trace_csv(trace: &SimTrace, path: &Path) -> Result<()> {
    let f = std::fs::File::create(path)?;
    write_trace(trace, std::io::BufWriter::new(f))
}

fn csv_parse_error(line: usize, column: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        column,
        message: message.into(),
    }
}

fn group_width(cols: &[String], start: usize, prefix: &str) -> usize {
    let mut w = 0;
    while start + w < cols.len() && cols[start + w] == format!("{prefix}_{}", w + 1) {
        w += 1;
    }
    w
}

/// Reads a trace written by [`write_trace`]. The delay is not stored in the
/// file and is returned as zero; metrics are recomputed.
pub fn read_trace<R: Read>(input: R) -> Result<SimTrace> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(false).flexible(true).from_reader(input);
    let mut records = rdr.records();
    let head = match records.next() {
        Some(r) => r?,
        None => return Err(csv_parse_error(1, 1, "empty trace file")),
    };
    let cols: Vec<String> = head.iter().map(str::to_string).collect();
    if cols.first().map(String::as_str) != Some("k") {
        return Err(csv_parse_error(1, 1, "first column must be `k`"));
    }
    let l = group_width(&cols, 1, "y");
    let c = group_width(&cols, 1 + l, "truth");
    if group_width(&cols, 1 + l + c, "est") != c || group_width(&cols, 1 + l + 2 * c, "abs_err") != c {
        return Err(csv_parse_error(1, 1, "truth, est and abs_err groups must have equal width"));
    }
    let width = 1 + l + 3 * c;
    if cols.len() != width {
        return Err(csv_parse_error(1, width + 1, "unexpected extra header columns"));
    }
    let mut trace = SimTrace {
        k: Vec::new(),
        y: Vec::new(),
        truth: Vec::new(),
        estimate: Vec::new(),
        abs_err: Vec::new(),
        delay: 0,
        steady_state_err: 0.0,
        convergence_step: None,
    };
    for (row, rec) in records.enumerate() {
        let rec = rec?;
        let line = row + 2;
        if rec.len() != width {
            return Err(csv_parse_error(line, 1, format!("expected {width} fields, got {}", rec.len())));
        }
        let k: usize = rec[0]
            .trim()
            .parse()
            .map_err(|_| csv_parse_error(line, 1, format!("`{}` is not a sample index", &rec[0])))?;
        let mut vals = Vec::with_capacity(width - 1);
        for j in 1..width {
            let v: f64 = rec[j]
                .trim()
                .parse()
                .map_err(|_| csv_parse_error(line, j + 1, format!("`{}` is not a number", &rec[j])))?;
            vals.push(v);
        }
        let block = |start: usize, len: usize| Vector::from_row_slice(&vals[start..start + len]);
        trace.k.push(k);
        trace.y.push(block(0, l));
        trace.truth.push(block(l, c));
        trace.estimate.push(block(l + c, c));
        trace.abs_err.push(block(l + 2 * c, c));
    }
    let (s, conv) = metrics(&trace, CONVERGENCE_TOL);
    trace.steady_state_err = s;
    trace.convergence_step = conv;
    Ok(trace)
}

pub fn read_trace_csv(path: &Path) -> Result<SimTrace> {
    read_trace(std::fs::File::open(path)?)
}
