//! Plant simulation, test signals, transfer-function realization, trace
//! metrics and the four reference case studies.

mod cases;

pub use cases::{case_plant, default_case_seed, run_case, run_cases_parallel, CaseOptions, CaseResult, CaseRun, CASE_IDS};

use serde::{Deserialize, Serialize};

use crate::design::FilterDesign;
use crate::error::{Error, Result};
use crate::linalg::{Matrix, Vector};
use crate::runtime::FilterState;
use crate::sysmodel::{LtiSystem, Plant};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SignalKind {
    Step { amplitude: f64, start: usize },
    /// Zero up to `start`, then `slope * (k - start)`.
    Ramp { slope: f64, start: usize },
    Zero,
    /// Explicit values from `k = 0`; zero past the end.
    Samples { values: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Signal {
    pub channel: usize,
    #[serde(flatten)]
    pub kind: SignalKind,
}

impl Signal {
    pub fn step(channel: usize, amplitude: f64, start: usize) -> Self {
        Self {
            channel,
            kind: SignalKind::Step { amplitude, start },
        }
    }

    pub fn ramp(channel: usize, slope: f64, start: usize) -> Self {
        Self {
            channel,
            kind: SignalKind::Ramp { slope, start },
        }
    }

    pub fn samples(channel: usize, values: Vec<f64>) -> Self {
        Self {
            channel,
            kind: SignalKind::Samples { values },
        }
    }

    pub fn value_at(&self, k: usize) -> f64 {
        match &self.kind {
            SignalKind::Step { amplitude, start } => {
                if k >= *start {
                    *amplitude
                } else {
                    0.0
                }
            }
            SignalKind::Ramp { slope, start } => {
                if k >= *start {
                    slope * (k - start) as f64
                } else {
                    0.0
                }
            }
            SignalKind::Zero => 0.0,
            SignalKind::Samples { values } => values.get(k).copied().unwrap_or(0.0),
        }
    }

    fn check(&self, channels: usize, what: &str) -> Result<()> {
        if self.channel >= channels {
            return Err(Error::dims(
                format!("{what} signal channel"),
                format!("< {channels}"),
                self.channel,
            ));
        }
        if let SignalKind::Samples { values } = &self.kind {
            if values.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidMatrix);
            }
        }
        Ok(())
    }
}

/// Sums the signals channel-wise at sample `k`.
pub fn signal_vector(signals: &[Signal], channels: usize, k: usize) -> Vector {
    let mut v = Vector::zeros(channels);
    for s in signals {
        if s.channel < channels {
            v[s.channel] += s.value_at(k);
        }
    }
    v
}

/// Result of [`simulate`]: `x` holds `steps + 1` states, the rest `steps` samples.
#[derive(Debug, Clone, PartialEq)]
pub struct SimOutput {
    pub x: Vec<Vector>,
    pub y: Vec<Vector>,
    pub u: Vec<Vector>,
    pub f: Vec<Vector>,
}

/// Runs the plant recursion from `x0` for `steps` samples.
pub fn simulate(plant: &Plant, x0: &Vector, inputs: &[Signal], faults: &[Signal], steps: usize) -> Result<SimOutput> {
    let base = plant.base();
    let n = base.states();
    if x0.len() != n {
        return Err(Error::dims("x0", n, x0.len()));
    }
    let m = base.inputs();
    for s in inputs {
        s.check(m, "input")?;
    }
    let (p, l_mat, e_mat) = match plant {
        Plant::Input(_) => (0, None, None),
        Plant::Fault(f) => (f.faults(), Some(f.l()), Some(f.e())),
    };
    for s in faults {
        s.check(p, "fault")?;
    }
    let mut out = SimOutput {
        x: Vec::with_capacity(steps + 1),
        y: Vec::with_capacity(steps),
        u: Vec::with_capacity(steps),
        f: Vec::with_capacity(steps),
    };
    let mut x = x0.clone();
    for k in 0..steps {
        let u = signal_vector(inputs, m, k);
        let f = signal_vector(faults, p, k);
        let mut y = base.c() * &x + base.d() * &u;
        let mut next = base.a() * &x + base.b() * &u;
        if let (Some(l), Some(e)) = (l_mat, e_mat) {
            y += e * &f;
            next += l * &f;
        }
        out.x.push(x);
        out.y.push(y);
        out.u.push(u);
        out.f.push(f);
        x = next;
    }
    out.x.push(x);
    Ok(out)
}

fn trim_leading_zeros(c: &[f64]) -> &[f64] {
    let first = c.iter().position(|&v| v != 0.0).unwrap_or(c.len());
    &c[first..]
}

/// Controllable canonical realization of `num(z) / den(z)`, coefficients in
/// descending powers of `z`.
pub fn realize_tf(num: &[f64], den: &[f64]) -> Result<LtiSystem> {
    if num.iter().chain(den).any(|v| !v.is_finite()) {
        return Err(Error::InvalidMatrix);
    }
    let den = trim_leading_zeros(den);
    let num = trim_leading_zeros(num);
    if den.is_empty() {
        return Err(Error::ImproperTransferFunction("denominator is zero".into()));
    }
    let n = den.len() - 1;
    if num.len() > den.len() {
        return Err(Error::ImproperTransferFunction(format!(
            "numerator degree {} exceeds denominator degree {n}",
            num.len() - 1
        )));
    }
    if n == 0 {
        return Err(Error::InvalidDimension("a static gain has no state-space realization with states".into()));
    }
    let lead = den[0];
    let a_coef: Vec<f64> = den[1..].iter().map(|v| v / lead).collect();
    let mut b_coef = vec![0.0; n + 1];
    for (i, v) in num.iter().enumerate() {
        b_coef[n + 1 - num.len() + i] = v / lead;
    }
    let d = b_coef[0];
    let rem: Vec<f64> = (0..n).map(|i| b_coef[i + 1] - d * a_coef[i]).collect();
    let mut a = Matrix::zeros(n, n);
    for j in 0..n {
        a[(0, j)] = -a_coef[j];
    }
    for i in 1..n {
        a[(i, i - 1)] = 1.0;
    }
    let mut b = Matrix::zeros(n, 1);
    b[(0, 0)] = 1.0;
    let c = Matrix::from_row_slice(1, n, &rem);
    LtiSystem::new(a, b, c, Matrix::from_element(1, 1, d))
}

/// Estimates aligned with the delayed truth.
#[derive(Debug, Clone, PartialEq)]
pub struct SimTrace {
    /// Index of the newest output sample at each emission.
    pub k: Vec<usize>,
    pub y: Vec<Vector>,
    /// True unknown input (or fault) at `k - delay`.
    pub truth: Vec<Vector>,
    pub estimate: Vec<Vector>,
    pub abs_err: Vec<Vector>,
    pub delay: usize,
    pub steady_state_err: f64,
    pub convergence_step: Option<usize>,
}

impl SimTrace {
    pub fn len(&self) -> usize {
        self.k.len()
    }

    pub fn is_empty(&self) -> bool {
        self.k.is_empty()
    }

    pub fn max_abs_err(&self, row: usize) -> f64 {
        self.abs_err[row].amax()
    }

    /// Recomputes the stored metrics with a new convergence tolerance.
    pub fn update_metrics(&mut self, tolerance: f64) {
        let (s, c) = metrics(self, tolerance);
        self.steady_state_err = s;
        self.convergence_step = c;
    }
}

/// `(steady_state_err, convergence_step)`: the largest error over the final
/// tenth of the trace, and the first `k` after which the error stays below
/// `tolerance`.
pub fn metrics(trace: &SimTrace, tolerance: f64) -> (f64, Option<usize>) {
    let len = trace.len();
    if len == 0 {
        return (0.0, None);
    }
    let tail = len.div_ceil(10).max(1);
    let steady = (len - tail..len).map(|i| trace.max_abs_err(i)).fold(0.0, f64::max);
    let mut conv = None;
    for i in (0..len).rev() {
        if trace.max_abs_err(i) < tolerance {
            conv = Some(trace.k[i]);
        } else {
            break;
        }
    }
    (steady, conv)
}

/// Default tolerance used for `convergence_step` by the runners.
pub const CONVERGENCE_TOL: f64 = 1e-6;

/// Feeds a simulated run through a fresh filter built from `design`.
pub fn run_filter(design: &FilterDesign, sim: &SimOutput) -> Result<SimTrace> {
    let mut state = FilterState::new(design.clone());
    let fault = design.kind.is_fault();
    let mut trace = SimTrace {
        k: Vec::new(),
        y: Vec::new(),
        truth: Vec::new(),
        estimate: Vec::new(),
        abs_err: Vec::new(),
        delay: design.delay(),
        steady_state_err: 0.0,
        convergence_step: None,
    };
    for (k, y) in sim.y.iter().enumerate() {
        let u = if fault { Some(&sim.u[k]) } else { None };
        if let Some(est) = state.push_sample(y, u)? {
            let truth = if fault {
                sim.f[est.k_estimated].clone()
            } else {
                sim.u[est.k_estimated].clone()
            };
            let err = (&est.value - &truth).abs();
            trace.k.push(k);
            trace.y.push(y.clone());
            trace.truth.push(truth);
            trace.estimate.push(est.value);
            trace.abs_err.push(err);
        }
    }
    trace.update_metrics(CONVERGENCE_TOL);
    Ok(trace)
}
