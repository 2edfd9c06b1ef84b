use crate::error::{Error, Result};
use crate::linalg::{eigenvalues, orth_complement_rows, pinv, Complex, Matrix, ToleranceConfig};

use super::{FaultLtiSystem, LtiSystem};

/// Block operators relating `x(k-2M)` and input windows of length `2M` to
/// the output window `Y(k-2M) = [y(k-2M); ...; y(k-1)]`.
#[derive(Debug, Clone, PartialEq)]
pub struct StackedOperators {
    pub horizon: usize,
    /// `[C; CA; ...; CA^(2M-1)]`, `2Ml x n`.
    pub c2m: Matrix,
    /// Block lower-triangular Toeplitz of the input Markov parameters.
    pub d2m: Matrix,
    /// Orthonormal rows annihilating `c2m`.
    pub h2m: Matrix,
    /// Fault Toeplitz operator, present for fault systems.
    pub e2m: Option<Matrix>,
    /// Selects the first input sample of a window, `m x 2Mm`.
    pub ip: Matrix,
    /// Selects the first fault sample of a window, `p x 2Mp`.
    pub ipf: Option<Matrix>,
}

impl StackedOperators {
    pub fn window_len(&self) -> usize {
        2 * self.horizon
    }
}

fn selector(channels: usize, blocks: usize) -> Matrix {
    let mut s = Matrix::zeros(channels, blocks * channels);
    for i in 0..channels {
        s[(i, i)] = 1.0;
    }
    s
}

fn check_horizon(sys: &LtiSystem, horizon: usize) -> Result<()> {
    if horizon < sys.states() {
        return Err(Error::HorizonTooShort {
            horizon,
            states: sys.states(),
        });
    }
    Ok(())
}

/// Builds `C2M`, `D2M`, `H2M` and the selector for horizon `M`.
pub fn build_stacked(sys: &LtiSystem, horizon: usize, tol: &ToleranceConfig) -> Result<StackedOperators> {
    check_horizon(sys, horizon)?;
    let blocks = 2 * horizon;
    let c2m = sys.observability_matrix(blocks);
    let d2m = toeplitz(sys, sys.d(), sys.b(), blocks);
    let h2m = orth_complement_rows(&c2m, tol)?;
    Ok(StackedOperators {
        horizon,
        c2m,
        d2m,
        h2m,
        e2m: None,
        ip: selector(sys.inputs(), blocks),
        ipf: None,
    })
}

/// As [`build_stacked`], adding the fault Toeplitz operator.
///
/// The diagonal blocks of the fault operator are `E` throughout.
pub fn build_fault_stacked(
    sysf: &FaultLtiSystem,
    horizon: usize,
    tol: &ToleranceConfig,
) -> Result<StackedOperators> {
    let mut st = build_stacked(sysf.base(), horizon, tol)?;
    let blocks = 2 * horizon;
    st.e2m = Some(toeplitz(sysf.base(), sysf.e(), sysf.l(), blocks));
    st.ipf = Some(selector(sysf.faults(), blocks));
    Ok(st)
}

/// Lower block-triangular Toeplitz matrix with `feed` on the diagonal and
/// `C A^(i-j-1) G` below it.
pub(crate) fn toeplitz(sys: &LtiSystem, feed: &Matrix, g: &Matrix, blocks: usize) -> Matrix {
    let l = sys.outputs();
    let q = g.ncols();
    let mut markov = Vec::with_capacity(blocks);
    markov.push(feed.clone());
    let mut ag = g.clone();
    for _ in 1..blocks {
        markov.push(sys.c() * &ag);
        ag = sys.a() * ag;
    }
    let mut out = Matrix::zeros(blocks * l, blocks * q);
    for i in 0..blocks {
        for j in 0..=i {
            out.view_mut((i * l, j * q), (l, q)).copy_from(&markov[i - j]);
        }
    }
    out
}

/// Eigenvalues of `A - B Ip D2M^+ C2M`, the state-error dynamics of the
/// inversion. For square systems these are the invariant zeros padded with
/// zeros at the origin.
pub fn error_dynamics_eigenvalues(
    sys: &LtiSystem,
    st: &StackedOperators,
    tol: &ToleranceConfig,
) -> Result<Vec<Complex>> {
    if sys.outputs() != sys.inputs() {
        return Err(Error::NonSquare {
            outputs: sys.outputs(),
            inputs: sys.inputs(),
        });
    }
    check_horizon(sys, st.horizon)?;
    let dp = pinv(&st.d2m, tol)?;
    let m = sys.a() - sys.b() * &st.ip * dp * &st.c2m;
    eigenvalues(&m)
}

/// Annihilator built from the past/future split of the output window:
/// `[-C_M A^M C_M^+, I]`.
pub fn hankel_annihilator(sys: &LtiSystem, horizon: usize, tol: &ToleranceConfig) -> Result<Matrix> {
    if sys.outputs() != sys.inputs() {
        return Err(Error::NonSquare {
            outputs: sys.outputs(),
            inputs: sys.inputs(),
        });
    }
    check_horizon(sys, horizon)?;
    let cm = sys.observability_matrix(horizon);
    let am = sys.a().pow(horizon as u32);
    let cm_pinv = pinv(&cm, tol)?;
    let rows = cm.nrows();
    let mut h = Matrix::zeros(rows, 2 * rows);
    h.view_mut((0, 0), (rows, rows))
        .copy_from(&(-(&cm * am * cm_pinv)));
    h.view_mut((0, rows), (rows, rows))
        .copy_from(&Matrix::identity(rows, rows));
    Ok(h)
}
