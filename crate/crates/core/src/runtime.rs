//! Streaming execution of a designed filter.
//!
//! Samples are pushed one at a time. After `warmup` samples every push
//! returns the estimate of the unknown input (or fault) `delay` samples in
//! the past and then advances the internal recursion.

use std::collections::VecDeque;

use crate::design::{FilterDesign, FilterKind};
use crate::error::{Error, Result};
use crate::linalg::{vstack_vec, Vector};

/// Norm of the filter state beyond which the run is declared diverged.
pub const DIVERGENCE_LIMIT: f64 = 1e12;

#[derive(Debug, Clone, PartialEq)]
pub struct EstimateSample {
    /// Index of the newest output sample.
    pub k: usize,
    /// Index of the input sample being estimated.
    pub k_estimated: usize,
    pub value: Vector,
    /// The part of `value` contributed by the auxiliary window alone.
    pub aux_component: Vector,
    pub eta_norm: f64,
}

#[derive(Debug, Clone)]
pub struct FilterState {
    design: FilterDesign,
    eta: Vector,
    y_hist: VecDeque<Vector>,
    u_hist: VecDeque<Vector>,
    count: usize,
}

impl FilterState {
    pub fn new(design: FilterDesign) -> Self {
        let dim = if design.kind == FilterKind::MinPhase {
            design.plant.base().states()
        } else {
            design.stacked.c2m.nrows()
        };
        Self {
            eta: Vector::zeros(dim),
            y_hist: VecDeque::with_capacity(capacity(&design)),
            u_hist: VecDeque::with_capacity(capacity(&design)),
            count: 0,
            design,
        }
    }

    pub fn design(&self) -> &FilterDesign {
        &self.design
    }

    /// Current filter state (`eta_hat`, or the state-error estimate for the
    /// minimum-phase kind).
    pub fn eta(&self) -> &Vector {
        &self.eta
    }

    /// Number of samples pushed since construction or the last reset.
    pub fn step_index(&self) -> usize {
        self.count
    }

    pub fn is_warm(&self) -> bool {
        self.count >= self.design.warmup()
    }

    /// Clears windows and filter state; the design is left untouched.
    pub fn reset(&mut self) {
        self.eta.fill(0.0);
        self.y_hist.clear();
        self.u_hist.clear();
        self.count = 0;
    }

    fn oldest(&self) -> usize {
        self.count - self.y_hist.len()
    }

    fn stacked_window(hist: &VecDeque<Vector>, first: usize, start: usize, len: usize) -> Result<Vector> {
        if start < first || start + len > first + hist.len() {
            return Err(Error::WindowNotReady);
        }
        let parts: Vec<&Vector> = hist.range(start - first..start - first + len).collect();
        Ok(vstack_vec(&parts))
    }

    fn y_window(&self, start: usize) -> Result<Vector> {
        Self::stacked_window(&self.y_hist, self.oldest(), start, self.design.stacked.window_len())
    }

    fn u_window(&self, start: usize) -> Result<Option<Vector>> {
        if !self.design.kind.is_fault() {
            return Ok(None);
        }
        Self::stacked_window(&self.u_hist, self.oldest(), start, self.design.stacked.window_len()).map(Some)
    }

    /// Output window with the known-input contribution removed.
    fn residual_window(&self, start: usize) -> Result<Vector> {
        let y = self.y_window(start)?;
        Ok(match self.u_window(start)? {
            Some(u) => y - &self.design.stacked.d2m * u,
            None => y,
        })
    }

    /// Auxiliary input (or fault) window starting at sample `start`.
    pub fn compute_uaux(&self, start: usize) -> Result<Vector> {
        Ok(&self.design.k1 * self.residual_window(start)?)
    }

    /// Dummy state at sample `start`.
    pub fn compute_z(&self, start: usize) -> Result<Vector> {
        let r = self.residual_window(start)?;
        let aux = &self.design.k1 * &r;
        Ok(&self.design.c2m_pinv * (r - self.design.unknown_toeplitz() * aux))
    }

    /// Composite vector `[z(start+1); z(start); aux(start); U(start)]`, the
    /// last block present for fault kinds only.
    pub fn build_composite(&self, start: usize) -> Result<Vector> {
        let z_next = self.compute_z(start + 1)?;
        let z_now = self.compute_z(start)?;
        let aux = self.compute_uaux(start)?;
        match self.u_window(start)? {
            Some(u) => Ok(vstack_vec(&[&z_next, &z_now, &aux, &u])),
            None => Ok(vstack_vec(&[&z_next, &z_now, &aux])),
        }
    }

    /// Appends `y(k)` (and the known input `u(k)` for fault kinds) and
    /// returns the estimate due at this step, if the windows are warm.
    pub fn push_sample(&mut self, y: &Vector, u: Option<&Vector>) -> Result<Option<EstimateSample>> {
        let l = self.design.plant.base().outputs();
        if y.len() != l {
            return Err(Error::dims("output sample", l, y.len()));
        }
        let known = self.design.known_inputs();
        let u_sample = if self.design.kind.is_fault() {
            match u {
                Some(u) if u.len() == known => u.clone(),
                Some(u) => return Err(Error::dims("known input sample", known, u.len())),
                None if known == 0 => Vector::zeros(0),
                None => return Err(Error::MissingInput),
            }
        } else {
            Vector::zeros(0)
        };
        if y.iter().chain(u_sample.iter()).any(|v| !v.is_finite()) {
            return Err(Error::InvalidMatrix);
        }

        let cap = capacity(&self.design);
        if self.y_hist.len() == cap {
            self.y_hist.pop_front();
            self.u_hist.pop_front();
        }
        self.y_hist.push_back(y.clone());
        self.u_hist.push_back(u_sample);
        self.count += 1;
        if !self.is_warm() {
            return Ok(None);
        }

        let k = self.count - 1;
        let s = k - self.design.delay();
        let aux = self.compute_uaux(s)?;
        let d = &self.design;
        let sel = match d.kind {
            FilterKind::FaultStep | FilterKind::FaultRamp => d.stacked.ipf.as_ref().expect("fault stack"),
            _ => &d.stacked.ip,
        };
        let correction = if d.kind == FilterKind::MinPhase {
            -(&d.unknown_pinv * (&d.stacked.c2m * &self.eta))
        } else {
            &d.unknown_pinv * &self.eta
        };
        let aux_component = sel * &aux;
        let value = sel * (correction + &aux);

        let mut next = &d.closed_loop * &self.eta + &d.input_matrix * self.build_composite(s)?;
        if let Some(ahead) = &d.lookahead_matrix {
            next += ahead * self.build_composite(s + 1)?;
        }
        let norm = next.norm();
        if !norm.is_finite() || norm > DIVERGENCE_LIMIT {
            return Err(Error::Diverged(norm));
        }
        let eta_norm = self.eta.norm();
        self.eta = next;
        Ok(Some(EstimateSample {
            k,
            k_estimated: s,
            value,
            aux_component,
            eta_norm,
        }))
    }
}

fn capacity(d: &FilterDesign) -> usize {
    d.stacked.window_len() + 2
}
