//! Observability screening and eigenvalue assignment for the filter pair.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{
    eigenvalues, full_svd, multisets_match, null_space_generic, CMatrix, Complex, Matrix,
    ToleranceConfig,
};

/// Hautus test outcome.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ObservabilityReport {
    /// Smallest singular value of `[A - lambda I; C]` over the spectrum of `A`.
    pub margin: f64,
    pub observable: bool,
    #[serde(skip)]
    pub worst_eigenvalue: Complex,
}

/// PBH test of the pair `(aop, cop)`.
pub fn check_pair_observability(aop: &Matrix, cop: &Matrix, tol: &ToleranceConfig) -> Result<ObservabilityReport> {
    let n = aop.nrows();
    if !aop.is_square() {
        return Err(Error::dims("observability operator", format!("{n}x{n}"), format!("{}x{}", n, aop.ncols())));
    }
    if cop.ncols() != n {
        return Err(Error::dims("observability output", format!("_x{n}"), format!("{}x{}", cop.nrows(), cop.ncols())));
    }
    let spectrum = eigenvalues(aop)?;
    let ac: CMatrix = aop.map(|v| Complex::new(v, 0.0));
    let cc: CMatrix = cop.map(|v| Complex::new(v, 0.0));
    let mut margin = f64::INFINITY;
    let mut worst = Complex::new(0.0, 0.0);
    for &lam in &spectrum {
        let mut stacked = CMatrix::zeros(n + cop.nrows(), n);
        let shifted = &ac - CMatrix::identity(n, n) * lam;
        stacked.view_mut((0, 0), (n, n)).copy_from(&shifted);
        stacked.view_mut((n, 0), (cop.nrows(), n)).copy_from(&cc);
        let smin = stacked
            .svd(false, false)
            .singular_values
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min);
        if smin < margin {
            margin = smin;
            worst = lam;
        }
    }
    Ok(ObservabilityReport {
        margin,
        observable: margin > tol.obs_margin,
        worst_eigenvalue: worst,
    })
}

fn check_pole_set(poles: &[Complex], n: usize) -> Result<()> {
    if poles.len() != n {
        return Err(Error::BadPoleSet(format!("expected {n} poles, got {}", poles.len())));
    }
    for p in poles {
        if !p.re.is_finite() || !p.im.is_finite() {
            return Err(Error::BadPoleSet("non-finite pole".into()));
        }
        if p.norm() >= 1.0 {
            return Err(Error::BadPoleSet(format!("pole {p} is not inside the unit circle")));
        }
    }
    let conj: Vec<Complex> = poles.iter().map(|p| p.conj()).collect();
    if !multisets_match(poles, &conj, 1e-9) {
        return Err(Error::BadPoleSet("poles are not closed under conjugation".into()));
    }
    Ok(())
}

/// Gain `k2` such that `aop + k2 * cop` has eigenvalues `poles`.
///
/// `cop` may be rank deficient. Only the product `k2 * cop` is determined;
/// the placement runs on the dual pair restricted to the effective output
/// directions with a Kautsky-Nichols-Van Dooren eigenvector sweep.
pub fn place_poles(aop: &Matrix, cop: &Matrix, poles: &[Complex], tol: &ToleranceConfig) -> Result<Matrix> {
    let n = aop.nrows();
    check_pole_set(poles, n)?;
    let report = check_pair_observability(aop, cop, tol)?;
    if !report.observable {
        return Err(Error::Unobservable { margin: report.margin });
    }
    if multisets_match(&eigenvalues(aop)?, poles, 1e-9) {
        return Ok(Matrix::zeros(n, cop.nrows()));
    }

    let svd = full_svd(cop);
    let smax = svd.sigma.first().copied().unwrap_or(0.0);
    let cut = tol.threshold(smax, cop.nrows(), cop.ncols());
    let r = svd.sigma.iter().filter(|&&s| s > cut).count();
    let h = svd.v.columns(0, r).transpose();
    let ur = svd.u.columns(0, r).into_owned();
    let sigma_inv = Matrix::from_diagonal(&nalgebra::DVector::from_iterator(r, svd.sigma[..r].iter().map(|s| 1.0 / s)));

    let ahat = aop.transpose();
    let m = if r == 1 {
        ackermann(&ahat, &h.transpose(), poles)?
    } else {
        assign_eigenvectors(&ahat, &h, poles, tol)?
    };
    let f = &h * (m - &ahat);
    let g = f.transpose();
    let k2 = g * sigma_inv * ur.transpose();
    Ok(k2)
}

/// Single-input assignment `ahat + b f` by Ackermann's formula. The result is
/// unique, and repeated poles are allowed.
fn ackermann(ahat: &Matrix, b: &Matrix, poles: &[Complex]) -> Result<Matrix> {
    let n = ahat.nrows();
    let mut ctrb = Matrix::zeros(n, n);
    let mut col = b.column(0).into_owned();
    for k in 0..n {
        ctrb.set_column(k, &col);
        col = ahat * col;
    }
    let mut p = CMatrix::identity(n, n);
    let ac: CMatrix = ahat.map(|v| Complex::new(v, 0.0));
    for &lam in poles {
        p = p * (&ac - CMatrix::identity(n, n) * lam);
    }
    let p = p.map(|v| v.re);
    let mut last = nalgebra::DVector::zeros(n);
    last[n - 1] = 1.0;
    let w = ctrb
        .transpose()
        .lu()
        .solve(&last)
        .ok_or_else(|| Error::PlacementFailed("controllability matrix of the dual pair is singular".into()))?;
    let k = w.transpose() * p;
    Ok(ahat - b * k)
}

/// Returns real `M` with spectrum `poles` and `(I - H^T H)(M - ahat) = 0`.
fn assign_eigenvectors(ahat: &Matrix, h: &Matrix, poles: &[Complex], tol: &ToleranceConfig) -> Result<Matrix> {
    let n = ahat.nrows();
    let ac: CMatrix = ahat.map(|v| Complex::new(v, 0.0));
    // Columns spanning the directions the feedback cannot reach.
    let u1: CMatrix = null_space_generic(h, tol).map(|v| Complex::new(v, 0.0));

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        poles[a]
            .re
            .total_cmp(&poles[b].re)
            .then(poles[b].im.total_cmp(&poles[a].im))
    });
    let lams: Vec<Complex> = order.iter().map(|&i| poles[i]).collect();
    // Partner of each complex pole (its conjugate), real poles map to themselves.
    let mut partner: Vec<usize> = (0..n).collect();
    let mut used = vec![false; n];
    for j in 0..n {
        if lams[j].im.abs() <= 1e-12 || used[j] {
            continue;
        }
        let k = (0..n)
            .filter(|&k| k != j && !used[k] && lams[k].im.abs() > 1e-12)
            .min_by(|&a, &b| {
                (lams[a] - lams[j].conj())
                    .norm()
                    .total_cmp(&(lams[b] - lams[j].conj()).norm())
            })
            .ok_or_else(|| Error::BadPoleSet("unpaired complex pole".into()))?;
        partner[j] = k;
        partner[k] = j;
        used[j] = true;
        used[k] = true;
    }

    let mut bases = Vec::with_capacity(n);
    for &lam in &lams {
        let s = if u1.ncols() == 0 {
            CMatrix::identity(n, n)
        } else {
            let shifted = &ac - CMatrix::identity(n, n) * lam;
            null_space_generic(&(u1.adjoint() * shifted), tol)
        };
        if s.ncols() == 0 {
            return Err(Error::PlacementFailed(format!("no admissible eigenvector for pole {lam}")));
        }
        bases.push(s);
    }

    let mut x = CMatrix::zeros(n, n);
    let mut seen: Vec<usize> = Vec::new();
    for j in 0..n {
        let s = &bases[j];
        let dup = seen.iter().filter(|&&i| (lams[i] - lams[j]).norm() < 1e-12).count();
        let col = s.column(dup % s.ncols()).into_owned();
        x.set_column(j, &col);
        seen.push(j);
    }
    for j in 0..n {
        if partner[j] != j && lams[j].im < 0.0 {
            let c = x.column(partner[j]).map(|v| v.conj());
            x.set_column(j, &c);
        }
    }

    if n > 1 {
        for _sweep in 0..60 {
            let mut change: f64 = 0.0;
            for j in 0..n {
                if partner[j] != j && lams[j].im < 0.0 {
                    continue;
                }
                let mut others = CMatrix::zeros(n, n - 1);
                let mut c = 0;
                for i in 0..n {
                    if i != j {
                        others.set_column(c, &x.column(i));
                        c += 1;
                    }
                }
                let y = full_svd(&others).u.column(n - 1).into_owned();
                let s = &bases[j];
                let mut xj = s * (s.adjoint() * y);
                let nrm = xj.norm();
                if nrm < 1e-12 {
                    continue;
                }
                xj /= Complex::new(nrm, 0.0);
                // Remove the arbitrary phase so convergence can be measured.
                let pivot = xj.iter().copied().max_by(|a, b| a.norm().total_cmp(&b.norm())).unwrap();
                xj *= pivot.conj() / Complex::new(pivot.norm(), 0.0);
                let old = x.column(j).into_owned();
                let op = old.iter().copied().max_by(|a, b| a.norm().total_cmp(&b.norm())).unwrap();
                let old = old * (op.conj() / Complex::new(op.norm().max(1e-300), 0.0));
                change = change.max((&xj - old).norm());
                x.set_column(j, &xj);
                if partner[j] != j {
                    x.set_column(partner[j], &xj.map(|v| v.conj()));
                }
            }
            if change < 1e-10 {
                break;
            }
        }
    }

    let xinv = x
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::PlacementFailed("eigenvector matrix is singular".into()))?;
    let lam = CMatrix::from_diagonal(&nalgebra::DVector::from_vec(lams.clone()));
    let m = &x * lam * xinv;
    let scale = m.iter().map(|v| v.norm()).fold(1.0, f64::max);
    let imag = m.iter().map(|v| v.im.abs()).fold(0.0, f64::max);
    if imag > 1e-8 * scale {
        return Err(Error::PlacementFailed(format!("complex residue {imag:.2e} in closed loop")));
    }
    Ok(m.map(|v| v.re))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex {
        Complex::new(re, 0.0)
    }

    #[test]
    fn single_output_placement_hits_poles() {
        let a = Matrix::from_row_slice(2, 2, &[1.2, -0.15, 0.6, 0.55]);
        let ph = Matrix::from_row_slice(2, 2, &[0.2, -0.4, -0.4, 0.8]);
        let tol = ToleranceConfig::default();
        let k = place_poles(&a, &ph, &[c(0.1), c(-0.1)], &tol).unwrap();
        let cl = &a + &k * &ph;
        assert!(multisets_match(&eigenvalues(&cl).unwrap(), &[c(0.1), c(-0.1)], 1e-9));
    }

    #[test]
    fn complex_pairs_are_supported() {
        let a = Matrix::from_row_slice(3, 3, &[1.1, 0.3, 0.0, -0.2, 0.9, 0.5, 0.0, 0.4, 1.3]);
        let cop = Matrix::from_row_slice(2, 3, &[1.0, 0.0, 0.0, 0.0, 0.0, 1.0]);
        let poles = [Complex::new(0.2, 0.3), Complex::new(0.2, -0.3), c(-0.4)];
        let tol = ToleranceConfig::default();
        let k = place_poles(&a, &cop, &poles, &tol).unwrap();
        let cl = &a + &k * &cop;
        let got = eigenvalues(&cl).unwrap();
        assert!(multisets_match(&got, &poles, 1e-8), "{got:?}");
    }

    #[test]
    fn poles_already_in_place_need_no_gain() {
        let a = Matrix::from_diagonal(&nalgebra::DVector::from_vec(vec![0.3, -0.2]));
        let cop = Matrix::identity(2, 2);
        let k = place_poles(&a, &cop, &[c(0.3), c(-0.2)], &ToleranceConfig::default()).unwrap();
        assert_eq!(k.amax(), 0.0);
    }

    #[test]
    fn bad_pole_sets_are_rejected() {
        let a = Matrix::identity(2, 2);
        let cop = Matrix::identity(2, 2);
        let tol = ToleranceConfig::default();
        for poles in [
            vec![c(0.1)],
            vec![c(0.1), c(1.2)],
            vec![Complex::new(0.1, 0.2), c(0.3)],
        ] {
            assert!(matches!(place_poles(&a, &cop, &poles, &tol), Err(Error::BadPoleSet(_))));
        }
    }

    #[test]
    fn unobservable_pair_is_refused() {
        let a = Matrix::from_diagonal(&nalgebra::DVector::from_vec(vec![0.5, 2.0]));
        let cop = Matrix::from_row_slice(1, 2, &[1.0, 0.0]);
        let tol = ToleranceConfig::default();
        let rep = check_pair_observability(&a, &cop, &tol).unwrap();
        assert!(!rep.observable);
        assert!(matches!(
            place_poles(&a, &cop, &[c(0.1), c(0.2)], &tol),
            Err(Error::Unobservable { .. })
        ));
    }
}
