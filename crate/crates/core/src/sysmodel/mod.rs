//! State-space records, assumption checks, stacked horizon operators and
//! transmission-zero analysis.

mod stacked;
mod zeros;

pub use stacked::{
    build_fault_stacked, build_stacked, error_dynamics_eigenvalues, hankel_annihilator,
    StackedOperators,
};
pub use zeros::{fault_zeros, invariant_zeros, system_zeros, ZeroClass, ZeroReport};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{ensure_finite, numerical_rank, vstack, Matrix, ToleranceConfig};

/// Discrete-time plant `x(k+1) = A x(k) + B u(k)`, `y(k) = C x(k) + D u(k)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LtiSystem {
    a: Matrix,
    b: Matrix,
    c: Matrix,
    d: Matrix,
}

impl LtiSystem {
    pub fn new(a: Matrix, b: Matrix, c: Matrix, d: Matrix) -> Result<Self> {
        for m in [&a, &b, &c, &d] {
            ensure_finite(m)?;
        }
        let n = a.nrows();
        if !a.is_square() {
            return Err(Error::dims("A", format!("{n}x{n}"), shape(&a)));
        }
        if b.nrows() != n {
            return Err(Error::dims("B", format!("{n}x_"), shape(&b)));
        }
        if c.ncols() != n {
            return Err(Error::dims("C", format!("_x{n}"), shape(&c)));
        }
        if d.shape() != (c.nrows(), b.ncols()) {
            return Err(Error::dims("D", format!("{}x{}", c.nrows(), b.ncols()), shape(&d)));
        }
        if n == 0 {
            return Err(Error::InvalidDimension("system must have at least one state".into()));
        }
        if c.nrows() == 0 {
            return Err(Error::InvalidDimension("system must have at least one output".into()));
        }
        Ok(Self { a, b, c, d })
    }

    pub fn a(&self) -> &Matrix {
        &self.a
    }
    pub fn b(&self) -> &Matrix {
        &self.b
    }
    pub fn c(&self) -> &Matrix {
        &self.c
    }
    pub fn d(&self) -> &Matrix {
        &self.d
    }
    pub fn states(&self) -> usize {
        self.a.nrows()
    }
    pub fn inputs(&self) -> usize {
        self.b.ncols()
    }
    pub fn outputs(&self) -> usize {
        self.c.nrows()
    }

    /// `[C; CA; ...; CA^(rows-1)]`.
    pub fn observability_matrix(&self, blocks: usize) -> Matrix {
        let mut parts = Vec::with_capacity(blocks);
        let mut cur = self.c.clone();
        for _ in 0..blocks {
            let next = &cur * &self.a;
            parts.push(cur);
            cur = next;
        }
        let refs: Vec<&Matrix> = parts.iter().collect();
        vstack(&refs)
    }

    pub fn validate(&self, tol: &ToleranceConfig) -> ValidationReport {
        let n = self.states();
        let obs_rank = numerical_rank(&self.observability_matrix(n), tol).unwrap_or(0);
        let b_full = full_column_rank(&self.b, tol);
        let d_full = full_column_rank(&self.d, tol);
        let mut violations = Vec::new();
        if obs_rank < n {
            violations.push(Violation::Unobservable { rank: obs_rank });
        }
        if self.inputs() == 0 {
            violations.push(Violation::NoChannels("inputs"));
        } else if !b_full && !d_full {
            violations.push(Violation::ChannelRank("neither B nor D has full column rank"));
        }
        if self.outputs() < self.inputs() {
            violations.push(Violation::TooFewOutputs {
                outputs: self.outputs(),
                channels: self.inputs(),
            });
        }
        ValidationReport {
            states: n,
            inputs: self.inputs(),
            outputs: self.outputs(),
            faults: None,
            observability_rank: obs_rank,
            b_full_rank: b_full,
            d_full_rank: d_full,
            l_full_rank: None,
            e_full_rank: None,
            violations,
        }
    }
}

/// Plant with an additive fault channel:
/// `x(k+1) = A x + B u + L f`, `y = C x + D u + E f`.
#[derive(Debug, Clone, PartialEq)]
pub struct FaultLtiSystem {
    base: LtiSystem,
    l: Matrix,
    e: Matrix,
}

impl FaultLtiSystem {
    pub fn new(base: LtiSystem, l: Matrix, e: Matrix) -> Result<Self> {
        ensure_finite(&l)?;
        ensure_finite(&e)?;
        let n = base.states();
        if l.nrows() != n {
            return Err(Error::dims("L", format!("{n}x_"), shape(&l)));
        }
        if e.shape() != (base.outputs(), l.ncols()) {
            return Err(Error::dims("E", format!("{}x{}", base.outputs(), l.ncols()), shape(&e)));
        }
        if l.ncols() == 0 {
            return Err(Error::InvalidDimension("fault system needs at least one fault channel".into()));
        }
        Ok(Self { base, l, e })
    }

    pub fn base(&self) -> &LtiSystem {
        &self.base
    }
    pub fn l(&self) -> &Matrix {
        &self.l
    }
    pub fn e(&self) -> &Matrix {
        &self.e
    }
    pub fn faults(&self) -> usize {
        self.l.ncols()
    }

    /// The fault-to-output system `(A, L, C, E)`.
    pub fn fault_channel(&self) -> LtiSystem {
        LtiSystem {
            a: self.base.a.clone(),
            b: self.l.clone(),
            c: self.base.c.clone(),
            d: self.e.clone(),
        }
    }

    pub fn validate(&self, tol: &ToleranceConfig) -> ValidationReport {
        let base = &self.base;
        let n = base.states();
        let obs_rank = numerical_rank(&base.observability_matrix(n), tol).unwrap_or(0);
        let l_full = full_column_rank(&self.l, tol);
        let e_full = full_column_rank(&self.e, tol);
        let mut violations = Vec::new();
        if obs_rank < n {
            violations.push(Violation::Unobservable { rank: obs_rank });
        }
        if !l_full && !e_full {
            violations.push(Violation::ChannelRank("neither L nor E has full column rank"));
        }
        if base.outputs() < self.faults() {
            violations.push(Violation::TooFewOutputs {
                outputs: base.outputs(),
                channels: self.faults(),
            });
        }
        ValidationReport {
            states: n,
            inputs: base.inputs(),
            outputs: base.outputs(),
            faults: Some(self.faults()),
            observability_rank: obs_rank,
            b_full_rank: full_column_rank(&base.b, tol),
            d_full_rank: full_column_rank(&base.d, tol),
            l_full_rank: Some(l_full),
            e_full_rank: Some(e_full),
            violations,
        }
    }
}

/// Either kind of plant the filters can invert.
#[derive(Debug, Clone, PartialEq)]
pub enum Plant {
    Input(LtiSystem),
    Fault(FaultLtiSystem),
}

impl Plant {
    pub fn base(&self) -> &LtiSystem {
        match self {
            Plant::Input(s) => s,
            Plant::Fault(f) => f.base(),
        }
    }

    pub fn validate(&self, tol: &ToleranceConfig) -> ValidationReport {
        match self {
            Plant::Input(s) => s.validate(tol),
            Plant::Fault(f) => f.validate(tol),
        }
    }

    pub fn is_fault(&self) -> bool {
        matches!(self, Plant::Fault(_))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "violation", rename_all = "snake_case")]
pub enum Violation {
    Unobservable { rank: usize },
    ChannelRank(&'static str),
    NoChannels(&'static str),
    TooFewOutputs { outputs: usize, channels: usize },
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Violation::Unobservable { rank } => write!(f, "(A, C) unobservable (rank {rank})"),
            Violation::ChannelRank(msg) => f.write_str(msg),
            Violation::NoChannels(what) => write!(f, "system has no {what}"),
            Violation::TooFewOutputs { outputs, channels } => {
                write!(f, "{outputs} outputs < {channels} estimated channels")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub states: usize,
    pub inputs: usize,
    pub outputs: usize,
    pub faults: Option<usize>,
    pub observability_rank: usize,
    pub b_full_rank: bool,
    pub d_full_rank: bool,
    pub l_full_rank: Option<bool>,
    pub e_full_rank: Option<bool>,
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    /// First violation as an error; observability takes precedence.
    pub fn into_result(self) -> Result<Self> {
        if let Some(Violation::Unobservable { rank }) = self
            .violations
            .iter()
            .find(|v| matches!(v, Violation::Unobservable { .. }))
        {
            return Err(Error::ObservabilityViolated {
                rank: *rank,
                states: self.states,
            });
        }
        match self.violations.first() {
            None => Ok(self),
            Some(v) => Err(Error::AssumptionViolated(v.to_string())),
        }
    }
}

fn full_column_rank(m: &Matrix, tol: &ToleranceConfig) -> bool {
    m.ncols() == 0 || numerical_rank(m, tol).map_or(false, |r| r == m.ncols())
}

fn shape(m: &Matrix) -> String {
    format!("{}x{}", m.nrows(), m.ncols())
}

/// Scalar helper used by tests and the case runners.
pub fn siso(a: f64, b: f64, c: f64, d: f64) -> LtiSystem {
    LtiSystem::new(
        Matrix::from_element(1, 1, a),
        Matrix::from_element(1, 1, b),
        Matrix::from_element(1, 1, c),
        Matrix::from_element(1, 1, d),
    )
    .expect("scalar system is well formed")
}
