//! Filter synthesis: auxiliary-input gain, reduced window dynamics, rotation
//! screening and the stabilizing output-injection gain.

mod placement;

pub use placement::{check_pair_observability, place_poles, ObservabilityReport};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{
    eigenvalues, hstack, multisets_match, orthogonality_defect, pinv, plane_rotation, projector_colspace,
    projector_rowspace, random_rotation, spectral_radius, Complex, Matrix, ToleranceConfig,
};
use crate::sysmodel::{
    build_fault_stacked, build_stacked, fault_zeros, invariant_zeros, Plant, StackedOperators, ZeroClass, ZeroReport,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FilterKind {
    MinPhase,
    Step,
    Ramp,
    FaultStep,
    FaultRamp,
}

impl FilterKind {
    pub fn is_fault(self) -> bool {
        matches!(self, FilterKind::FaultStep | FilterKind::FaultRamp)
    }

    pub fn is_ramp(self) -> bool {
        matches!(self, FilterKind::Ramp | FilterKind::FaultRamp)
    }

    /// Samples needed before the first estimate is emitted.
    pub fn warmup(self, horizon: usize) -> usize {
        2 * horizon + if self.is_ramp() { 2 } else { 1 }
    }

    /// Lag between the newest output sample and the estimated input sample.
    pub fn delay(self, horizon: usize) -> usize {
        2 * horizon + usize::from(self.is_ramp())
    }
}

impl std::str::FromStr for FilterKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "min_phase" | "minphase" => Ok(FilterKind::MinPhase),
            "step" => Ok(FilterKind::Step),
            "ramp" => Ok(FilterKind::Ramp),
            "fault_step" | "faultstep" => Ok(FilterKind::FaultStep),
            "fault_ramp" | "faultramp" => Ok(FilterKind::FaultRamp),
            other => Err(Error::InvalidArgument(format!("unknown filter kind `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum RotationMode {
    /// Rotation by `theta` radians in the `(i, j)` coordinate plane.
    PlaneAngle { i: usize, j: usize, theta: f64 },
    /// Seeded random rotations, `seed, seed + 1, ...` until one passes.
    RandomSeeded { seed: u64, retry_budget: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RotationStrategy {
    pub mode: RotationMode,
    pub obs_margin: f64,
}

pub const DEFAULT_RETRY_BUDGET: usize = 32;

impl RotationStrategy {
    pub fn plane(theta: f64) -> Self {
        Self {
            mode: RotationMode::PlaneAngle { i: 0, j: 1, theta },
            obs_margin: ToleranceConfig::default().obs_margin,
        }
    }

    pub fn seeded(seed: u64) -> Self {
        Self {
            mode: RotationMode::RandomSeeded {
                seed,
                retry_budget: DEFAULT_RETRY_BUDGET,
            },
            obs_margin: ToleranceConfig::default().obs_margin,
        }
    }

    /// Checks the strategy against the window dimension `dim`.
    pub fn validate(&self, dim: usize) -> Result<()> {
        if !(self.obs_margin > 0.0) {
            return Err(Error::InvalidRotation("obs_margin must be positive".into()));
        }
        match self.mode {
            RotationMode::PlaneAngle { i, j, theta } => {
                if i == j || i >= dim || j >= dim {
                    return Err(Error::InvalidRotation(format!(
                        "plane ({i}, {j}) is not valid in dimension {dim}"
                    )));
                }
                if !theta.is_finite() {
                    return Err(Error::InvalidRotation("theta must be finite".into()));
                }
                let quarter = std::f64::consts::FRAC_PI_2;
                let off = (theta / quarter - (theta / quarter).round()).abs() * quarter;
                if dim == 2 && off < 1e-6 {
                    return Err(Error::InvalidRotation(format!(
                        "theta = {theta} is a multiple of pi/2; the filter pair cannot be observable"
                    )));
                }
            }
            RotationMode::RandomSeeded { retry_budget, .. } => {
                if retry_budget == 0 {
                    return Err(Error::InvalidRotation("retry_budget must be at least 1".into()));
                }
            }
        }
        Ok(())
    }
}

/// Everything the runtime needs to execute one filter, plus diagnostics.
#[derive(Debug, Clone)]
pub struct FilterDesign {
    pub kind: FilterKind,
    pub horizon: usize,
    pub plant: Plant,
    pub stacked: StackedOperators,
    /// Maps an output window to the auxiliary input (or fault) window.
    pub k1: Matrix,
    pub rotation: Option<Matrix>,
    pub ph: Matrix,
    pub pc: Matrix,
    pub ph_new: Option<Matrix>,
    pub pc_new: Option<Matrix>,
    pub atilde: Matrix,
    pub bf: Matrix,
    pub k2: Option<Matrix>,
    pub placed_poles: Vec<Complex>,
    pub closed_loop: Matrix,
    /// Applied to the composite vector at the current shift.
    pub input_matrix: Matrix,
    /// Applied to the composite vector one shift ahead (ramp kinds only).
    pub lookahead_matrix: Option<Matrix>,
    /// PBH margin of the accepted rotation.
    pub margin: Option<f64>,
    /// Pseudo-inverse of the unknown-channel Toeplitz operator.
    pub unknown_pinv: Matrix,
    pub c2m_pinv: Matrix,
}

impl FilterDesign {
    /// Toeplitz operator of the estimated channel (`D2M`, or `E2M` for faults).
    pub fn unknown_toeplitz(&self) -> &Matrix {
        unknown_toeplitz(&self.stacked)
    }

    /// Number of estimated channels.
    pub fn channels(&self) -> usize {
        match &self.plant {
            Plant::Input(s) => s.inputs(),
            Plant::Fault(f) => f.faults(),
        }
    }

    /// Width of the known-input window carried by fault kinds.
    pub fn known_inputs(&self) -> usize {
        match &self.plant {
            Plant::Input(_) => 0,
            Plant::Fault(f) => f.base().inputs(),
        }
    }

    pub fn warmup(&self) -> usize {
        self.kind.warmup(self.horizon)
    }

    pub fn delay(&self) -> usize {
        self.kind.delay(self.horizon)
    }

    /// Design matrix of the screened pair, before the gain is added.
    pub fn open_loop(&self) -> Option<Matrix> {
        match (&self.ph_new, &self.pc_new) {
            (Some(ph), Some(pc)) => Some(filter_operator(self.kind, &self.atilde, ph, pc)),
            _ => None,
        }
    }
}

fn unknown_toeplitz(st: &StackedOperators) -> &Matrix {
    st.e2m.as_ref().unwrap_or(&st.d2m)
}

struct Channel<'a> {
    a: &'a Matrix,
    g: &'a Matrix,
    sel: &'a Matrix,
    t: &'a Matrix,
    known: Option<(&'a Matrix, &'a Matrix)>,
}

fn channel<'a>(plant: &'a Plant, st: &'a StackedOperators) -> Result<Channel<'a>> {
    match plant {
        Plant::Input(s) => Ok(Channel {
            a: s.a(),
            g: s.b(),
            sel: &st.ip,
            t: &st.d2m,
            known: None,
        }),
        Plant::Fault(f) => {
            let (Some(t), Some(sel)) = (st.e2m.as_ref(), st.ipf.as_ref()) else {
                return Err(Error::InvalidArgument("fault plant needs a fault stack".into()));
            };
            Ok(Channel {
                a: f.base().a(),
                g: f.l(),
                sel,
                t,
                known: Some((f.base().b(), &st.ip)),
            })
        }
    }
}

/// `(H2M T)^+ H2M` with `T` the unknown-channel Toeplitz operator.
pub fn compute_k1(st: &StackedOperators, tol: &ToleranceConfig) -> Result<Matrix> {
    let ht = &st.h2m * unknown_toeplitz(st);
    Ok(pinv(&ht, tol)? * &st.h2m)
}

/// Reduced window dynamics `C2M (A - G Ip T^+ C2M) C2M^+`.
pub fn compute_atilde(plant: &Plant, st: &StackedOperators, tol: &ToleranceConfig) -> Result<Matrix> {
    let ch = channel(plant, st)?;
    let inner = error_matrix(&ch, st, tol)?;
    Ok(&st.c2m * inner * pinv(&st.c2m, tol)?)
}

fn error_matrix(ch: &Channel<'_>, st: &StackedOperators, tol: &ToleranceConfig) -> Result<Matrix> {
    Ok(ch.a - ch.g * ch.sel * pinv(ch.t, tol)? * &st.c2m)
}

/// Input matrix of the window dynamics, `[I, -A, -G Ip]`, with `-B Ip`
/// appended for fault plants.
pub fn compute_bf(plant: &Plant, st: &StackedOperators) -> Result<Matrix> {
    let ch = channel(plant, st)?;
    let n = ch.a.nrows();
    let id = Matrix::identity(n, n);
    let neg_a = -ch.a;
    let neg_g = -(ch.g * ch.sel);
    Ok(match ch.known {
        None => hstack(&[&id, &neg_a, &neg_g]),
        Some((b, ip)) => {
            let neg_b = -(b * ip);
            hstack(&[&id, &neg_a, &neg_g, &neg_b])
        }
    })
}

/// `(R Ph R^T, R Pc R^T)`.
pub fn rotated_projectors(st: &StackedOperators, r: &Matrix, tol: &ToleranceConfig) -> Result<(Matrix, Matrix)> {
    let dim = st.c2m.nrows();
    if r.shape() != (dim, dim) {
        return Err(Error::dims("rotation", format!("{dim}x{dim}"), format!("{}x{}", r.nrows(), r.ncols())));
    }
    let defect = orthogonality_defect(r);
    if defect > 1e-9 {
        return Err(Error::NonOrthogonal(defect));
    }
    let ph = projector_rowspace(&st.h2m, tol)?;
    let pc = projector_colspace(&st.c2m, tol)?;
    let rt = r.transpose();
    Ok((r * ph * &rt, r * pc * rt))
}

/// State matrix of the screened pair for `kind`, before output injection.
pub fn filter_operator(kind: FilterKind, atilde: &Matrix, ph_new: &Matrix, pc_new: &Matrix) -> Matrix {
    if kind.is_ramp() {
        let pa = ph_new * atilde;
        &pa * atilde - &pa * 2.0 + atilde + ph_new
    } else {
        pc_new * atilde + ph_new
    }
}

/// Accepted rotation and its screening record.
#[derive(Debug, Clone)]
pub struct RotationChoice {
    pub rotation: Matrix,
    pub margin: f64,
    pub attempts: usize,
}

fn channel_zeros(plant: &Plant, tol: &ToleranceConfig) -> Option<ZeroReport> {
    match plant {
        Plant::Input(s) => invariant_zeros(s, tol).ok(),
        Plant::Fault(f) => fault_zeros(f, tol).ok(),
    }
}

fn is_square(plant: &Plant) -> bool {
    match plant {
        Plant::Input(s) => s.outputs() == s.inputs(),
        Plant::Fault(f) => f.base().outputs() == f.faults(),
    }
}

/// Picks a rotation whose filter pair passes the PBH screen.
pub fn select_rotation(
    plant: &Plant,
    st: &StackedOperators,
    strategy: &RotationStrategy,
    kind: FilterKind,
    tol: &ToleranceConfig,
) -> Result<RotationChoice> {
    let dim = st.c2m.nrows();
    strategy.validate(dim)?;
    let zero_at_one = || channel_zeros(plant, tol).map_or(false, |z| z.at_one);
    if is_square(plant) && zero_at_one() {
        return Err(Error::ZeroAtOne);
    }
    let atilde = compute_atilde(plant, st, tol)?;
    let ph = projector_rowspace(&st.h2m, tol)?;
    let screen_tol = ToleranceConfig {
        obs_margin: strategy.obs_margin,
        ..*tol
    };
    let screen = |r: &Matrix| -> Result<f64> {
        let (ph_new, pc_new) = rotated_projectors(st, r, tol)?;
        let aop = filter_operator(kind, &atilde, &ph_new, &pc_new);
        Ok(check_pair_observability(&aop, &ph, &screen_tol)?.margin)
    };
    let mut best = 0.0f64;
    let mut attempts = 0;
    match strategy.mode {
        RotationMode::PlaneAngle { i, j, theta } => {
            let r = plane_rotation(dim, i, j, theta)?;
            attempts = 1;
            let margin = screen(&r)?;
            if margin > strategy.obs_margin {
                return Ok(RotationChoice {
                    rotation: r,
                    margin,
                    attempts,
                });
            }
            best = margin;
        }
        RotationMode::RandomSeeded { seed, retry_budget } => {
            for attempt in 0..retry_budget {
                let r = random_rotation(dim, seed.wrapping_add(attempt as u64))?;
                attempts += 1;
                let margin = screen(&r)?;
                if margin > strategy.obs_margin {
                    return Ok(RotationChoice {
                        rotation: r,
                        margin,
                        attempts,
                    });
                }
                best = best.max(margin);
            }
        }
    }
    if zero_at_one() {
        return Err(Error::ZeroAtOne);
    }
    Err(Error::RetriesExhausted {
        attempts,
        best_margin: best,
    })
}

/// `count` real poles evenly spaced over `[-0.1, 0.1]`.
pub fn default_poles(count: usize) -> Vec<Complex> {
    match count {
        0 => Vec::new(),
        1 => vec![Complex::new(0.0, 0.0)],
        _ => (0..count)
            .map(|i| Complex::new(-0.1 + 0.2 * i as f64 / (count - 1) as f64, 0.0))
            .collect(),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DesignOptions {
    pub kind: FilterKind,
    pub strategy: RotationStrategy,
    /// Requested closed-loop poles; [`default_poles`] when absent.
    pub poles: Option<Vec<Complex>>,
    /// Horizon `M`; the state dimension when absent.
    pub horizon: Option<usize>,
    pub tol: ToleranceConfig,
}

impl DesignOptions {
    pub fn new(kind: FilterKind, strategy: RotationStrategy) -> Self {
        Self {
            kind,
            strategy,
            poles: None,
            horizon: None,
            tol: ToleranceConfig::default(),
        }
    }
}

/// Assembles a complete filter for `plant`.
pub fn design(plant: &Plant, opts: &DesignOptions) -> Result<FilterDesign> {
    let tol = &opts.tol;
    tol.validate()?;
    let kind = opts.kind;
    if kind.is_fault() != plant.is_fault() {
        return Err(Error::InvalidArgument(format!(
            "filter kind {kind:?} does not match a {} plant",
            if plant.is_fault() { "fault" } else { "input" }
        )));
    }
    plant.validate(tol).into_result()?;
    let horizon = opts.horizon.unwrap_or(plant.base().states());
    let st = match plant {
        Plant::Input(s) => build_stacked(s, horizon, tol)?,
        Plant::Fault(f) => build_fault_stacked(f, horizon, tol)?,
    };
    let k1 = compute_k1(&st, tol)?;
    let atilde = compute_atilde(plant, &st, tol)?;
    let bf = compute_bf(plant, &st)?;
    let ph = projector_rowspace(&st.h2m, tol)?;
    let pc = projector_colspace(&st.c2m, tol)?;
    let unknown_pinv = pinv(unknown_toeplitz(&st), tol)?;
    let c2m_pinv = pinv(&st.c2m, tol)?;

    let mut out = FilterDesign {
        kind,
        horizon,
        plant: plant.clone(),
        stacked: st,
        k1,
        rotation: None,
        ph,
        pc,
        ph_new: None,
        pc_new: None,
        atilde,
        bf,
        k2: None,
        placed_poles: Vec::new(),
        closed_loop: Matrix::zeros(0, 0),
        input_matrix: Matrix::zeros(0, 0),
        lookahead_matrix: None,
        margin: None,
        unknown_pinv,
        c2m_pinv,
    };

    if kind == FilterKind::MinPhase {
        let Plant::Input(sys) = plant else { unreachable!("kind checked above") };
        if sys.outputs() != sys.inputs() {
            return Err(Error::MinPhaseScope(format!(
                "needs a square system, got {} outputs and {} inputs",
                sys.outputs(),
                sys.inputs()
            )));
        }
        let zeros = invariant_zeros(sys, tol)?;
        if !matches!(zeros.classification, ZeroClass::MinimumPhase | ZeroClass::NoZeros) {
            return Err(Error::MinPhaseScope(format!(
                "system zeros are classified {:?}",
                zeros.classification
            )));
        }
        let ch = channel(plant, &out.stacked)?;
        let closed = error_matrix(&ch, &out.stacked, tol)?;
        out.placed_poles = eigenvalues(&closed)?;
        out.closed_loop = closed;
        out.input_matrix = -&out.bf;
        return Ok(out);
    }

    let choice = select_rotation(plant, &out.stacked, &opts.strategy, kind, tol)?;
    let (ph_new, pc_new) = rotated_projectors(&out.stacked, &choice.rotation, tol)?;
    let aop = filter_operator(kind, &out.atilde, &ph_new, &pc_new);
    let dim = aop.nrows();
    let poles = opts.poles.clone().unwrap_or_else(|| default_poles(dim));
    let k2 = place_poles(&aop, &out.ph, &poles, tol)?;
    let closed = &aop + &k2 * &out.ph;
    let achieved = eigenvalues(&closed)?;
    if !multisets_match(&achieved, &poles, 1e-6) {
        return Err(Error::PlacementFailed(
            "closed-loop spectrum misses the requested poles by more than 1e-6".into(),
        ));
    }
    if spectral_radius(&closed)? >= 1.0 - 1e-9 {
        return Err(Error::PlacementFailed("closed loop is not strictly stable".into()));
    }
    let c2m_bf = &out.stacked.c2m * &out.bf;
    if kind.is_ramp() {
        let id = Matrix::identity(dim, dim);
        let now = (&ph_new * &out.atilde - &ph_new * 2.0 + id) * &c2m_bf;
        out.lookahead_matrix = Some(&ph_new * &c2m_bf);
        out.input_matrix = now;
    } else {
        out.input_matrix = &pc_new * &c2m_bf;
    }
    out.rotation = Some(choice.rotation);
    out.margin = Some(choice.margin);
    out.ph_new = Some(ph_new);
    out.pc_new = Some(pc_new);
    out.k2 = Some(k2);
    out.placed_poles = poles;
    out.closed_loop = closed;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sysmodel::{siso, FaultLtiSystem, LtiSystem};
    use std::f64::consts::{FRAC_PI_2, PI};

    fn first_case() -> Plant {
        Plant::Input(siso(0.5, 1.0, -1.0, 1.0))
    }

    fn m(r: usize, c: usize, v: &[f64]) -> Matrix {
        Matrix::from_row_slice(r, c, v)
    }

    fn close(a: &Matrix, b: &Matrix, tol: f64) -> bool {
        a.shape() == b.shape() && (a - b).amax() <= tol
    }

    fn deadbeat(theta_deg: f64) -> FilterDesign {
        let mut opts = DesignOptions::new(FilterKind::Step, RotationStrategy::plane(theta_deg.to_radians()));
        opts.poles = Some(vec![Complex::new(0.0, 0.0); 2]);
        design(&first_case(), &opts).unwrap()
    }

    #[test]
    fn first_case_building_blocks() {
        let d = design(&first_case(), &DesignOptions::new(FilterKind::Step, RotationStrategy::plane(PI / 4.0))).unwrap();
        assert!(close(&d.k1, &m(2, 2, &[0.230769, -0.461538, -0.153846, 0.307692]), 1e-6));
        assert!(close(&d.atilde, &m(2, 2, &[1.2, 0.6, 0.6, 0.3]), 1e-12));
        assert!(close(&d.pc, &m(2, 2, &[0.8, 0.4, 0.4, 0.2]), 1e-12));
        assert!(close(&d.ph, &m(2, 2, &[0.2, -0.4, -0.4, 0.8]), 1e-12));
        assert!(close(&d.open_loop().unwrap(), &m(2, 2, &[1.2, -0.15, 0.6, 0.55]), 1e-12));
        assert!(close(&d.bf, &m(1, 4, &[1.0, -0.5, -1.0, 0.0]), 0.0));
        assert!(multisets_match(&eigenvalues(&d.closed_loop).unwrap(), &default_poles(2), 1e-9));
        assert_eq!((d.warmup(), d.delay()), (3, 2));
    }

    #[test]
    fn deadbeat_gains_at_both_angles() {
        let d = deadbeat(45.0);
        assert!(close(&d.closed_loop, &m(2, 2, &[3.15, -4.05, 2.45, -3.15]), 1e-9));
        let k2ph = d.k2.as_ref().unwrap() * &d.ph;
        assert!(close(&k2ph, &m(2, 2, &[1.95, -3.9, 1.85, -3.7]), 1e-9));
        assert!(close(&d.input_matrix, &m(2, 4, &[-0.25, 0.125, 0.25, 0.0, -0.75, 0.375, 0.75, 0.0]), 1e-12));

        let d = deadbeat(5.0);
        let k2ph = d.k2.as_ref().unwrap() * &d.ph;
        assert!(close(&k2ph, &m(2, 2, &[20.094, -40.189, 11.291, -22.583]), 1e-3));
        assert!(close(&d.open_loop().unwrap(), &m(2, 2, &[1.41, 0.12, 0.25, 1.07]), 0.01));
    }

    #[test]
    fn quarter_turns_lose_observability() {
        let plant = first_case();
        let tol = ToleranceConfig::default();
        let Plant::Input(sys) = &plant else { unreachable!() };
        let st = build_stacked(sys, 1, &tol).unwrap();
        let at = compute_atilde(&plant, &st, &tol).unwrap();
        let ph = projector_rowspace(&st.h2m, &tol).unwrap();
        let margin = |theta: f64| {
            let r = plane_rotation(2, 0, 1, theta).unwrap();
            let (phn, pcn) = rotated_projectors(&st, &r, &tol).unwrap();
            check_pair_observability(&filter_operator(FilterKind::Step, &at, &phn, &pcn), &ph, &tol)
                .unwrap()
                .margin
        };
        for q in 0..4 {
            assert!(margin(q as f64 * FRAC_PI_2) < 1e-6, "q = {q}");
        }
        assert!(margin(PI / 4.0) > 0.1);
        let err = select_rotation(&plant, &st, &RotationStrategy::plane(FRAC_PI_2), FilterKind::Step, &tol).unwrap_err();
        assert!(matches!(err, Error::InvalidRotation(_)));
    }

    #[test]
    fn zero_at_one_defeats_every_seed() {
        let plant = Plant::Input(siso(0.5, 1.0, -0.5, 1.0));
        for seed in 0..100 {
            let err = design(&plant, &DesignOptions::new(FilterKind::Step, RotationStrategy::seeded(seed))).unwrap_err();
            assert!(matches!(err, Error::ZeroAtOne), "seed {seed}: {err}");
        }
    }

    #[test]
    fn fault_input_matrix_layout() {
        let Plant::Fault(f) = crate::sim::case_plant(2).unwrap() else { unreachable!() };
        let tol = ToleranceConfig::default();
        let st = build_fault_stacked(&f, 4, &tol).unwrap();
        let bf = compute_bf(&Plant::Fault(f.clone()), &st).unwrap();
        assert_eq!(bf.shape(), (4, 4 + 4 + 16));

        let base = f.base();
        let with_b = LtiSystem::new(base.a().clone(), Matrix::zeros(4, 2), base.c().clone(), Matrix::zeros(2, 2)).unwrap();
        let plant = Plant::Fault(FaultLtiSystem::new(with_b, f.l().clone(), f.e().clone()).unwrap());
        let st = build_fault_stacked(plant_fault(&plant), 4, &tol).unwrap();
        let bf = compute_bf(&plant, &st).unwrap();
        assert_eq!(bf.shape(), (4, 40));
        assert!(bf.columns(24, 16).amax() == 0.0);
        assert!(close(&bf.columns(0, 4).into_owned(), &Matrix::identity(4, 4), 0.0));
    }

    fn plant_fault(p: &Plant) -> &FaultLtiSystem {
        match p {
            Plant::Fault(f) => f,
            Plant::Input(_) => unreachable!(),
        }
    }

    #[test]
    fn min_phase_scope() {
        let opts = DesignOptions::new(FilterKind::MinPhase, RotationStrategy::seeded(0));
        assert!(matches!(design(&first_case(), &opts), Err(Error::MinPhaseScope(_))));
        let wide = crate::sim::case_plant(4).unwrap();
        let Plant::Input(s) = &wide else { unreachable!() };
        let tall = LtiSystem::new(s.a().clone(), s.b().columns(0, 1).into_owned(), s.c().clone(), Matrix::zeros(2, 1)).unwrap();
        assert!(matches!(design(&Plant::Input(tall), &opts), Err(Error::MinPhaseScope(_))));

        let d = design(&Plant::Input(siso(0.2, 1.0, -0.3, 1.0)), &opts).unwrap();
        assert!(multisets_match(&d.placed_poles, &[Complex::new(0.5, 0.0)], 1e-12));
    }

    #[test]
    fn kind_must_match_plant() {
        let opts = DesignOptions::new(FilterKind::FaultStep, RotationStrategy::seeded(0));
        assert!(matches!(design(&first_case(), &opts), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn gain_recompute_is_deterministic() {
        let tol = ToleranceConfig::default();
        let d = design(&first_case(), &DesignOptions::new(FilterKind::Step, RotationStrategy::plane(0.3))).unwrap();
        assert_eq!(compute_k1(&d.stacked, &tol).unwrap(), d.k1);
        let again = design(&first_case(), &DesignOptions::new(FilterKind::Step, RotationStrategy::plane(0.3))).unwrap();
        assert_eq!(again.k2, d.k2);
    }

    #[test]
    fn default_pole_spacing() {
        let p = default_poles(16);
        assert_eq!(p.len(), 16);
        assert!((p[0].re + 0.1).abs() < 1e-15 && (p[15].re - 0.1).abs() < 1e-15);
        assert_eq!(default_poles(1), vec![Complex::new(0.0, 0.0)]);
    }

    #[test]
    fn filter_kind_timing() {
        assert_eq!((FilterKind::Step.delay(4), FilterKind::Step.warmup(4)), (8, 9));
        assert_eq!((FilterKind::FaultRamp.delay(4), FilterKind::FaultRamp.warmup(4)), (9, 10));
        assert_eq!("fault_ramp".parse::<FilterKind>().unwrap(), FilterKind::FaultRamp);
        assert!("sideways".parse::<FilterKind>().is_err());
    }
}
