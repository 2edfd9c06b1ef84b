//! Invariant zeros from the Rosenbrock pencil.
//!
//! The pencil `[zI - A, B; -C, D]` is first deflated with orthogonal
//! transformations until the feed-through block is square and invertible
//! (row compression of `D`, column compression of the outputs that `D`
//! cannot reach, then the same on the dual system). The finite zeros of the
//! reduced pencil are the eigenvalues of `A_r - B_r D_r^-1 C_r`. Working on
//! the deflated pencil keeps the infinite structure out of the eigenvalue
//! problem, which is what makes the finite zeros reliable.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{eigenvalues, full_svd, hstack, singular_values, vstack, Complex, Matrix, ToleranceConfig};

use super::{FaultLtiSystem, LtiSystem};

/// Radius around `1 + 0i` inside which a zero counts as "at one".
pub const AT_ONE_WINDOW: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ZeroClass {
    NoZeros,
    MinimumPhase,
    NonMinimumPhase,
    UnitCircleZeros,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ZeroReport {
    #[serde(serialize_with = "ser_complex")]
    pub zeros: Vec<Complex>,
    #[serde(serialize_with = "ser_complex")]
    pub on_unit_circle: Vec<Complex>,
    pub at_one: bool,
    pub classification: ZeroClass,
}

fn ser_complex<S: serde::Serializer>(v: &[Complex], s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(v.len()))?;
    for z in v {
        seq.serialize_element(&[z.re, z.im])?;
    }
    seq.end()
}

impl ZeroReport {
    pub fn from_zeros(mut zeros: Vec<Complex>, tol: &ToleranceConfig) -> Self {
        crate::linalg::sort_spectrum(&mut zeros);
        let on_unit_circle: Vec<Complex> = zeros
            .iter()
            .copied()
            .filter(|z| (z.norm() - 1.0).abs() < tol.eig_tol)
            .collect();
        let at_one = zeros
            .iter()
            .any(|z| (z - Complex::new(1.0, 0.0)).norm() < AT_ONE_WINDOW);
        let classification = if zeros.is_empty() {
            ZeroClass::NoZeros
        } else if !on_unit_circle.is_empty() {
            ZeroClass::UnitCircleZeros
        } else if zeros.iter().any(|z| z.norm() > 1.0) {
            ZeroClass::NonMinimumPhase
        } else {
            ZeroClass::MinimumPhase
        };
        Self {
            zeros,
            on_unit_circle,
            at_one,
            classification,
        }
    }
}

/// Invariant zeros of `(A, B, C, D)`.
pub fn invariant_zeros(sys: &LtiSystem, tol: &ToleranceConfig) -> Result<ZeroReport> {
    let z = system_zeros(sys.a(), sys.b(), sys.c(), sys.d(), tol)?;
    Ok(ZeroReport::from_zeros(z, tol))
}

/// Transmission zeros of the fault-to-output channel `(A, L, C, E)`.
pub fn fault_zeros(sysf: &FaultLtiSystem, tol: &ToleranceConfig) -> Result<ZeroReport> {
    let base = sysf.base();
    let z = system_zeros(base.a(), sysf.l(), base.c(), sysf.e(), tol)?;
    Ok(ZeroReport::from_zeros(z, tol))
}

struct Quad {
    a: Matrix,
    b: Matrix,
    c: Matrix,
    d: Matrix,
}

impl Quad {
    fn dual(self) -> Quad {
        Quad {
            a: self.a.transpose(),
            b: self.c.transpose(),
            c: self.b.transpose(),
            d: self.d.transpose(),
        }
    }
}

fn count_above(sigma: &[f64], cut: f64) -> usize {
    sigma.iter().filter(|&&s| s > cut).count()
}

/// Deflates the pencil until `D` has full row rank. Finite zeros are
/// preserved at every step.
fn reduce(mut q: Quad, cut: f64) -> Quad {
    loop {
        let n = q.a.nrows();
        let m = q.b.ncols();
        let p = q.c.nrows();
        if p == 0 {
            return q;
        }
        let (rho, u) = if m == 0 {
            (0, Matrix::identity(p, p))
        } else {
            let svd = full_svd(&q.d);
            (count_above(&svd.sigma, cut), svd.u)
        };
        if rho == p {
            return q;
        }
        let ut = u.transpose();
        let cc = &ut * &q.c;
        let dd = &ut * &q.d;
        let c1 = cc.rows(0, rho).into_owned();
        let c2 = cc.rows(rho, p - rho).into_owned();
        let d1 = dd.rows(0, rho).into_owned();
        if n == 0 {
            q.c = c1;
            q.d = d1;
            return q;
        }
        let svd = full_svd(&c2);
        let nu = count_above(&svd.sigma, cut);
        if nu == 0 {
            // Outputs that neither D nor the state reach are identically zero rows.
            q.c = c1;
            q.d = d1;
            continue;
        }
        // Reorder so the last `nu` coordinates carry the range of C2.
        let v = hstack(&[
            &svd.v.columns(nu, n - nu).into_owned(),
            &svd.v.columns(0, nu).into_owned(),
        ]);
        let at = v.transpose() * &q.a * &v;
        let bt = v.transpose() * &q.b;
        let c1t = c1 * &v;
        let k = n - nu;
        let a_new = at.view((0, 0), (k, k)).into_owned();
        let b_new = bt.rows(0, k).into_owned();
        let c_new = vstack(&[&at.view((k, 0), (nu, k)).into_owned(), &c1t.columns(0, k).into_owned()]);
        let d_new = vstack(&[&bt.rows(k, nu).into_owned(), &d1]);
        q = Quad {
            a: a_new,
            b: b_new,
            c: c_new,
            d: d_new,
        };
    }
}

/// Finite zeros of the Rosenbrock pencil of `(A, B, C, D)`.
pub fn system_zeros(a: &Matrix, b: &Matrix, c: &Matrix, d: &Matrix, tol: &ToleranceConfig) -> Result<Vec<Complex>> {
    let n = a.nrows();
    if !a.is_square() || b.nrows() != n || c.ncols() != n || d.shape() != (c.nrows(), b.ncols()) {
        return Err(Error::dims("system pencil", "conformable (A, B, C, D)", "inconsistent shapes"));
    }
    let full = vstack(&[&hstack(&[a, b]), &hstack(&[c, d])]);
    crate::linalg::ensure_finite(&full)?;
    let smax = singular_values(&full).first().copied().unwrap_or(0.0);
    // Each rank decision follows a few orthogonal transforms; allow for their rounding.
    let cut = tol.threshold(smax.max(f64::MIN_POSITIVE), full.nrows(), full.ncols()) * 10.0;

    let q = reduce(
        Quad {
            a: a.clone(),
            b: b.clone(),
            c: c.clone(),
            d: d.clone(),
        },
        cut,
    );
    let q = reduce(q.dual(), cut).dual();
    let n = q.a.nrows();
    if n == 0 {
        return Ok(Vec::new());
    }
    let (p, m) = q.d.shape();
    if p != m {
        return Err(Error::AssumptionViolated(format!(
            "system pencil is normal-rank deficient (reduced feed-through {p}x{m})"
        )));
    }
    if p == 0 {
        return eigenvalues(&q.a);
    }
    let dinv = q.d.clone().try_inverse().ok_or_else(|| {
        Error::AssumptionViolated("reduced feed-through matrix is singular".into())
    })?;
    eigenvalues(&(&q.a - &q.b * dinv * &q.c))
}
