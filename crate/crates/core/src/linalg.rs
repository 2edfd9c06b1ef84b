//! Dense real-matrix kernels: pseudo-inverses, orthogonal complements,
//! projectors, spectra, rotations and numerical rank.
//!
//! Everything here is a pure function over value matrices. Rank decisions
//! go through [`ToleranceConfig`] so that callers can tighten or relax them
//! in one place.

use nalgebra::{ComplexField, DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};

pub type Matrix = DMatrix<f64>;
pub type Vector = DVector<f64>;
pub type Complex = nalgebra::Complex<f64>;
pub type CMatrix = DMatrix<Complex>;

/// Numerical tolerances shared by the whole crate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ToleranceConfig {
    /// Multiplier on `eps * max(rows, cols) * sigma_max`; singular values at
    /// or below the product are treated as zero.
    pub rank_tol_factor: f64,
    /// Distance under which two eigenvalues (or zeros) are considered equal.
    pub eig_tol: f64,
    /// Smallest PBH singular value accepted as "observable".
    pub obs_margin: f64,
}

impl Default for ToleranceConfig {
    fn default() -> Self {
        Self {
            rank_tol_factor: 1.0,
            eig_tol: 1e-6,
            obs_margin: 1e-6,
        }
    }
}

impl ToleranceConfig {
    pub fn validate(&self) -> Result<()> {
        let ok = |v: f64| v.is_finite() && v > 0.0;
        if ok(self.rank_tol_factor) && ok(self.eig_tol) && ok(self.obs_margin) {
            Ok(())
        } else {
            Err(Error::InvalidArgument(
                "tolerances must be finite and strictly positive".into(),
            ))
        }
    }

    /// Absolute singular-value cutoff for a `rows x cols` matrix whose largest
    /// singular value is `sigma_max`.
    pub fn threshold(&self, sigma_max: f64, rows: usize, cols: usize) -> f64 {
        self.rank_tol_factor * f64::EPSILON * rows.max(cols).max(1) as f64 * sigma_max
    }
}

pub fn ensure_finite(m: &Matrix) -> Result<()> {
    if m.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::InvalidMatrix)
    }
}

/// Full singular value decomposition with descending singular values.
///
/// `u` is `rows x rows`, `v` is `cols x cols` and `sigma` has
/// `min(rows, cols)` entries, with `m = u * diag(sigma) * v^H`.
pub(crate) struct FullSvd<T: ComplexField<RealField = f64>> {
    pub(crate) u: DMatrix<T>,
    pub(crate) sigma: Vec<f64>,
    pub(crate) v: DMatrix<T>,
}

/// Scalars shared by nalgebra and faer (`f64` and `Complex`).
pub(crate) trait FaerScalar: ComplexField<RealField = f64> + faer::traits::ComplexField {}

impl FaerScalar for f64 {}
impl FaerScalar for Complex {}

pub(crate) fn full_svd<T: FaerScalar>(m: &DMatrix<T>) -> FullSvd<T> {
    let (rows, cols) = m.shape();
    if rows == 0 || cols == 0 {
        return FullSvd {
            u: DMatrix::identity(rows, rows),
            sigma: Vec::new(),
            v: DMatrix::identity(cols, cols),
        };
    }
    let f = faer::Mat::<T>::from_fn(rows, cols, |i, j| m[(i, j)].clone());
    let svd = f.svd().expect("svd converges");
    let s = svd.S();
    let raw: Vec<f64> = (0..rows.min(cols)).map(|i| s[i].clone().modulus()).collect();
    let mut order: Vec<usize> = (0..raw.len()).collect();
    order.sort_by(|&a, &b| raw[b].total_cmp(&raw[a]));
    let (fu, fv) = (svd.U(), svd.V());
    let pick = |dst: usize| if dst < order.len() { order[dst] } else { dst };
    FullSvd {
        u: DMatrix::from_fn(rows, rows, |i, j| fu[(i, pick(j))].clone()),
        sigma: order.iter().map(|&i| raw[i]).collect(),
        v: DMatrix::from_fn(cols, cols, |i, j| fv[(i, pick(j))].clone()),
    }
}

pub fn singular_values(m: &Matrix) -> Vec<f64> {
    if m.is_empty() {
        return Vec::new();
    }
    let f = faer::Mat::<f64>::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)]);
    let mut s = f.singular_values().expect("svd converges");
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

fn rank_of(sigma: &[f64], rows: usize, cols: usize, tol: &ToleranceConfig) -> usize {
    let smax = sigma.first().copied().unwrap_or(0.0);
    if smax == 0.0 {
        return 0;
    }
    let cut = tol.threshold(smax, rows, cols);
    sigma.iter().filter(|&&s| s > cut).count()
}

pub fn numerical_rank(m: &Matrix, tol: &ToleranceConfig) -> Result<usize> {
    ensure_finite(m)?;
    let s = singular_values(m);
    Ok(rank_of(&s, m.nrows(), m.ncols(), tol))
}

/// Moore-Penrose pseudo-inverse through the SVD.
pub fn pinv(m: &Matrix, tol: &ToleranceConfig) -> Result<Matrix> {
    ensure_finite(m)?;
    let (rows, cols) = m.shape();
    if m.is_empty() {
        return Ok(Matrix::zeros(cols, rows));
    }
    let svd = full_svd(m);
    let smax = svd.sigma.first().copied().unwrap_or(0.0);
    let cut = tol.threshold(smax, rows, cols);
    let mut out = Matrix::zeros(cols, rows);
    for (i, &s) in svd.sigma.iter().enumerate() {
        if s > cut && s > 0.0 {
            out += (svd.v.column(i) * svd.u.column(i).transpose()) / s;
        }
    }
    Ok(out)
}

/// Orthonormal basis (as columns) of the right null space of `m`.
pub fn null_space(m: &Matrix, tol: &ToleranceConfig) -> Result<Matrix> {
    ensure_finite(m)?;
    Ok(null_space_generic(m, tol))
}

pub(crate) fn null_space_generic<T: FaerScalar>(
    m: &DMatrix<T>,
    tol: &ToleranceConfig,
) -> DMatrix<T> {
    let (rows, cols) = m.shape();
    if cols == 0 {
        return DMatrix::zeros(0, 0);
    }
    if rows == 0 {
        return DMatrix::identity(cols, cols);
    }
    let svd = full_svd(m);
    let r = rank_of(&svd.sigma, rows, cols, tol);
    svd.v.columns(r, cols - r).into_owned()
}

/// Rows spanning the orthogonal complement of the column space of `m`.
///
/// The result `h` has `rows(m) - cols(m)` orthonormal rows and satisfies
/// `h * m = 0`.
pub fn orth_complement_rows(m: &Matrix, tol: &ToleranceConfig) -> Result<Matrix> {
    ensure_finite(m)?;
    let (rows, cols) = m.shape();
    if rows <= cols {
        return Err(Error::InvalidDimension(format!(
            "orthogonal complement needs rows > cols, got {rows}x{cols}"
        )));
    }
    let rank = numerical_rank(m, tol)?;
    if rank < cols {
        return Err(Error::RankDeficient {
            what: "column rank",
            rank,
            needed: cols,
        });
    }
    let svd = full_svd(m);
    Ok(svd.u.columns(cols, rows - cols).transpose())
}

/// Orthogonal projector onto the row space of a full-row-rank `h`.
pub fn projector_rowspace(h: &Matrix, tol: &ToleranceConfig) -> Result<Matrix> {
    ensure_finite(h)?;
    let rank = numerical_rank(h, tol)?;
    if rank < h.nrows() {
        return Err(Error::RankDeficient {
            what: "row rank",
            rank,
            needed: h.nrows(),
        });
    }
    let gram = h * h.transpose();
    let inv = gram
        .try_inverse()
        .ok_or(Error::RankDeficient { what: "row rank", rank, needed: h.nrows() })?;
    Ok(symmetrize(h.transpose() * inv * h))
}

/// Orthogonal projector onto the column space of a full-column-rank `c`.
pub fn projector_colspace(c: &Matrix, tol: &ToleranceConfig) -> Result<Matrix> {
    ensure_finite(c)?;
    let rank = numerical_rank(c, tol)?;
    if rank < c.ncols() {
        return Err(Error::RankDeficient {
            what: "column rank",
            rank,
            needed: c.ncols(),
        });
    }
    let gram = c.transpose() * c;
    let inv = gram
        .try_inverse()
        .ok_or(Error::RankDeficient { what: "column rank", rank, needed: c.ncols() })?;
    Ok(symmetrize(c * inv * c.transpose()))
}

fn symmetrize(p: Matrix) -> Matrix {
    (&p + p.transpose()) * 0.5
}

/// Eigenvalues with algebraic multiplicity, sorted by (re, im).
pub fn eigenvalues(m: &Matrix) -> Result<Vec<Complex>> {
    ensure_finite(m)?;
    if !m.is_square() {
        return Err(Error::dims("eigenvalues", "square matrix", format!("{}x{}", m.nrows(), m.ncols())));
    }
    if m.is_empty() {
        return Ok(Vec::new());
    }
    let mut eigs = real_eigenvalues(m).ok_or(Error::EigenFailure)?;
    // Conjugate pairs come out of 2x2 blocks; clean up signed-zero imaginary parts.
    for e in eigs.iter_mut() {
        if e.im == 0.0 {
            e.im = 0.0;
        }
    }
    sort_spectrum(&mut eigs);
    Ok(eigs)
}

fn real_eigenvalues(m: &Matrix) -> Option<Vec<Complex>> {
    let f = faer::Mat::<f64>::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)]);
    let eigs: Vec<Complex> = f.eigenvalues().ok()?;
    if eigs.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return None;
    }
    Some(eigs)
}

/// Eigenvalues of a complex square matrix, unsorted.
pub fn complex_eigenvalues(m: &CMatrix) -> Result<Vec<Complex>> {
    if !m.is_square() {
        return Err(Error::dims("eigenvalues", "square matrix", format!("{}x{}", m.nrows(), m.ncols())));
    }
    let f = faer::Mat::<Complex>::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)]);
    let eigs: Vec<Complex> = f.eigenvalues().map_err(|_| Error::EigenFailure)?;
    if eigs.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::EigenFailure);
    }
    Ok(eigs)
}

pub fn sort_spectrum(v: &mut [Complex]) {
    v.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
}

pub fn spectral_radius(m: &Matrix) -> Result<f64> {
    Ok(eigenvalues(m)?.iter().map(|z| z.norm()).fold(0.0, f64::max))
}

/// Largest distance between paired elements of two multisets, pairing each
/// element of `a` with its nearest unused element of `b`. `None` when the
/// sizes differ.
pub fn multiset_distance(a: &[Complex], b: &[Complex]) -> Option<f64> {
    if a.len() != b.len() {
        return None;
    }
    let mut used = vec![false; b.len()];
    let mut worst = 0.0f64;
    // Pair the most isolated points first so clusters do not steal partners.
    let mut order: Vec<usize> = (0..a.len()).collect();
    order.sort_by(|&i, &j| {
        let di = b.iter().map(|z| (z - a[i]).norm()).fold(f64::INFINITY, f64::min);
        let dj = b.iter().map(|z| (z - a[j]).norm()).fold(f64::INFINITY, f64::min);
        dj.total_cmp(&di)
    });
    for i in order {
        let (best, dist) = b
            .iter()
            .enumerate()
            .filter(|(k, _)| !used[*k])
            .map(|(k, z)| (k, (z - a[i]).norm()))
            .min_by(|x, y| x.1.total_cmp(&y.1))?;
        used[best] = true;
        worst = worst.max(dist);
    }
    Some(worst)
}

pub fn multisets_match(a: &[Complex], b: &[Complex], tol: f64) -> bool {
    multiset_distance(a, b).is_some_and(|d| d <= tol)
}

/// Largest entry of `|R R^T - I|`.
pub fn orthogonality_defect(r: &Matrix) -> f64 {
    if !r.is_square() {
        return f64::INFINITY;
    }
    let n = r.nrows();
    (r * r.transpose() - Matrix::identity(n, n)).amax()
}

/// Seeded rotation drawn from the orthonormalized Gaussian ensemble,
/// sign-corrected so the draw is uniform on SO(dim).
pub fn random_rotation(dim: usize, seed: u64) -> Result<Matrix> {
    if dim < 2 {
        return Err(Error::InvalidDimension(format!("rotation dimension {dim} < 2")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = Matrix::from_fn(dim, dim, |_, _| StandardNormal.sample(&mut rng));
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..dim {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    if q.determinant() < 0.0 {
        q.column_mut(0).neg_mut();
    }
    Ok(q)
}

/// Identity except for a rotation by `theta` in the `(i, j)` coordinate plane.
pub fn plane_rotation(dim: usize, i: usize, j: usize, theta: f64) -> Result<Matrix> {
    if i == j || i >= dim || j >= dim {
        return Err(Error::InvalidDimension(format!(
            "plane ({i}, {j}) invalid for dimension {dim}"
        )));
    }
    if !theta.is_finite() {
        return Err(Error::InvalidArgument("rotation angle must be finite".into()));
    }
    let (s, c) = theta.sin_cos();
    let mut r = Matrix::identity(dim, dim);
    r[(i, i)] = c;
    r[(i, j)] = -s;
    r[(j, i)] = s;
    r[(j, j)] = c;
    Ok(r)
}

/// Vertically stack matrices that share a column count.
pub fn vstack(blocks: &[&Matrix]) -> Matrix {
    let cols = blocks.first().map_or(0, |b| b.ncols());
    let rows: usize = blocks.iter().map(|b| b.nrows()).sum();
    let mut out = Matrix::zeros(rows, cols);
    let mut r = 0;
    for b in blocks {
        out.view_mut((r, 0), (b.nrows(), cols)).copy_from(*b);
        r += b.nrows();
    }
    out
}

/// Horizontally stack matrices that share a row count.
pub fn hstack(blocks: &[&Matrix]) -> Matrix {
    let rows = blocks.first().map_or(0, |b| b.nrows());
    let cols: usize = blocks.iter().map(|b| b.ncols()).sum();
    let mut out = Matrix::zeros(rows, cols);
    let mut c = 0;
    for b in blocks {
        out.view_mut((0, c), (rows, b.ncols())).copy_from(*b);
        c += b.ncols();
    }
    out
}

pub fn vstack_vec(parts: &[&Vector]) -> Vector {
    let len: usize = parts.iter().map(|p| p.len()).sum();
    let mut out = Vector::zeros(len);
    let mut r = 0;
    for p in parts {
        out.rows_mut(r, p.len()).copy_from(*p);
        r += p.len();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn tol() -> ToleranceConfig {
        ToleranceConfig::default()
    }

    fn m(rows: usize, cols: usize, v: &[f64]) -> Matrix {
        Matrix::from_row_slice(rows, cols, v)
    }

    fn penrose_residual(a: &Matrix, x: &Matrix) -> f64 {
        let scale = a.amax().max(1.0) * x.amax().max(1.0);
        let r1 = (a * x * a - a).amax();
        let r2 = (x * a * x - x).amax();
        let ax = a * x;
        let xa = x * a;
        let r3 = (&ax - ax.transpose()).amax();
        let r4 = (&xa - xa.transpose()).amax();
        r1.max(r2).max(r3).max(r4) / scale
    }

    #[test]
    fn pinv_of_case1_toeplitz_is_its_inverse() {
        let d = m(2, 2, &[1.0, 0.0, -1.0, 1.0]);
        let x = pinv(&d, &tol()).unwrap();
        assert!((x - m(2, 2, &[1.0, 0.0, 1.0, 1.0])).amax() < 1e-12);
    }

    #[test]
    fn pinv_identity() {
        let i = Matrix::identity(3, 3);
        assert!((pinv(&i, &tol()).unwrap() - &i).amax() < 1e-14);
    }

    #[test]
    fn pinv_of_row_vector_matches_closed_form() {
        let v = m(1, 2, &[-1.35, 0.9]);
        let x = pinv(&v, &tol()).unwrap();
        // v^T / (v v^T)
        let vv = 1.35f64 * 1.35 + 0.81;
        assert!((x[(0, 0)] - (-1.35 / vv)).abs() < 1e-12);
        assert!((x[(1, 0)] - (0.9 / vv)).abs() < 1e-12);
        assert!((x[(0, 0)] - (-0.5128)).abs() < 1e-3);
        assert!((x[(1, 0)] - 0.3419).abs() < 1e-3);
    }

    #[test]
    fn pinv_rejects_non_finite() {
        let bad = m(1, 2, &[f64::NAN, 1.0]);
        assert!(matches!(pinv(&bad, &tol()), Err(Error::InvalidMatrix)));
    }

    #[test]
    fn pinv_zero_and_empty() {
        let z = Matrix::zeros(2, 3);
        assert_eq!(pinv(&z, &tol()).unwrap(), Matrix::zeros(3, 2));
        let e = Matrix::zeros(4, 0);
        assert_eq!(pinv(&e, &tol()).unwrap().shape(), (0, 4));
    }

    #[test]
    fn complement_of_case1_observability_stack() {
        let c2m = m(2, 1, &[-1.0, -0.5]);
        let h = orth_complement_rows(&c2m, &tol()).unwrap();
        assert_eq!(h.shape(), (1, 2));
        assert!((&h * &c2m).amax() < 1e-12);
        let scaled = m(1, 2, &[-0.45, 0.90]);
        let p1 = projector_rowspace(&h, &tol()).unwrap();
        let p2 = projector_rowspace(&scaled, &tol()).unwrap();
        assert!((p1 - p2).amax() < 1e-12);
    }

    #[test]
    fn complement_of_axis() {
        let h = orth_complement_rows(&m(2, 1, &[1.0, 0.0]), &tol()).unwrap();
        assert!(h[(0, 0)].abs() < 1e-14);
        assert!((h[(0, 1)].abs() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn complement_rejects_rank_deficient() {
        let c = m(3, 2, &[1.0, 2.0, 2.0, 4.0, 3.0, 6.0]);
        assert!(matches!(
            orth_complement_rows(&c, &tol()),
            Err(Error::RankDeficient { .. })
        ));
    }

    #[test]
    fn projector_examples() {
        let p = projector_rowspace(&m(1, 2, &[-1.0, 2.0]), &tol()).unwrap();
        assert!((p - m(2, 2, &[0.2, -0.4, -0.4, 0.8])).amax() < 1e-12);
        let i2 = Matrix::identity(2, 2);
        assert!((projector_rowspace(&i2, &tol()).unwrap() - &i2).amax() < 1e-14);
        let pc = projector_colspace(&m(2, 1, &[-1.0, -0.5]), &tol()).unwrap();
        assert!((pc - m(2, 2, &[0.8, 0.4, 0.4, 0.2])).amax() < 1e-12);
        let pe = projector_colspace(&m(2, 1, &[1.0, 0.0]), &tol()).unwrap();
        assert!((pe - m(2, 2, &[1.0, 0.0, 0.0, 0.0])).amax() < 1e-14);
    }

    #[test]
    fn projector_rejects_deficient_input() {
        let h = m(2, 2, &[1.0, 1.0, 2.0, 2.0]);
        assert!(matches!(projector_rowspace(&h, &tol()), Err(Error::RankDeficient { .. })));
        assert!(matches!(projector_colspace(&h, &tol()), Err(Error::RankDeficient { .. })));
    }

    #[test]
    fn eigenvalue_examples() {
        let e = eigenvalues(&m(1, 1, &[1.5])).unwrap();
        assert!((e[0] - Complex::new(1.5, 0.0)).norm() < 1e-14);
        let e = eigenvalues(&m(2, 2, &[0.3, 0.0, 0.0, -0.7])).unwrap();
        assert!(multisets_match(
            &e,
            &[Complex::new(0.3, 0.0), Complex::new(-0.7, 0.0)],
            1e-12
        ));
        // Printed closed loop, rounded to two decimals.
        let e = eigenvalues(&m(2, 2, &[3.15, -4.05, 2.45, -3.15])).unwrap();
        assert!(e.iter().all(|z| z.norm() <= 0.1 + 0.05));
        assert!(matches!(
            eigenvalues(&Matrix::zeros(2, 3)),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn eigenvalues_of_companion_match_roots() {
        // (z - 0.5)(z + 0.25)(z^2 + 1)
        let roots = [
            Complex::new(0.5, 0.0),
            Complex::new(-0.25, 0.0),
            Complex::new(0.0, 1.0),
            Complex::new(0.0, -1.0),
        ];
        let mut coeffs = vec![Complex::new(1.0, 0.0)];
        for r in roots {
            let mut next = vec![Complex::new(0.0, 0.0); coeffs.len() + 1];
            for (k, c) in coeffs.iter().enumerate() {
                next[k] += c;
                next[k + 1] -= c * r;
            }
            coeffs = next;
        }
        let mut a = Matrix::zeros(4, 4);
        for j in 0..4 {
            a[(0, j)] = -coeffs[j + 1].re;
        }
        for i in 1..4 {
            a[(i, i - 1)] = 1.0;
        }
        let e = eigenvalues(&a).unwrap();
        assert!(multisets_match(&e, &roots, 1e-10));
    }

    #[test]
    fn rotation_properties() {
        let r = random_rotation(16, 42).unwrap();
        assert!(orthogonality_defect(&r) < 1e-10);
        assert!((r.determinant() - 1.0).abs() < 1e-10);
        let s = singular_values(&r);
        assert!(s.iter().all(|v| (v - 1.0).abs() < 1e-10));
        assert_eq!(r, random_rotation(16, 42).unwrap());
        assert_ne!(r, random_rotation(16, 43).unwrap());
        assert!(matches!(random_rotation(1, 0), Err(Error::InvalidDimension(_))));
    }

    #[test]
    fn plane_rotation_examples() {
        let r = plane_rotation(2, 0, 1, std::f64::consts::FRAC_PI_4).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert!((r - m(2, 2, &[h, -h, h, h])).amax() < 1e-15);
        assert_eq!(plane_rotation(3, 0, 2, 0.0).unwrap(), Matrix::identity(3, 3));
        assert!(plane_rotation(2, 0, 2, 0.1).is_err());
        assert!(plane_rotation(2, 1, 1, 0.1).is_err());

        let pc = m(2, 2, &[0.8, 0.4, 0.4, 0.2]);
        let r = plane_rotation(2, 0, 1, 45f64.to_radians()).unwrap();
        let rotated = &r * pc * r.transpose();
        assert!((rotated - m(2, 2, &[0.1, 0.3, 0.3, 0.9])).amax() < 1e-12);
    }

    #[test]
    fn full_svd_reconstructs_real_and_complex() {
        for (rows, cols) in [(3, 5), (5, 3), (4, 4)] {
            let a = Matrix::from_fn(rows, cols, |i, j| ((i * 7 + j * 3) % 5) as f64 - 1.7 + 0.3 * j as f64);
            let svd = full_svd(&a);
            let mut s = Matrix::zeros(rows, cols);
            for (i, &v) in svd.sigma.iter().enumerate() {
                s[(i, i)] = v;
            }
            assert!((&svd.u * &s * svd.v.transpose() - &a).amax() < 1e-12);
            assert!((svd.v.transpose() * &svd.v - Matrix::identity(cols, cols)).amax() < 1e-12);

            let ac = CMatrix::from_fn(rows, cols, |i, j| Complex::new(a[(i, j)], (i as f64) - 0.5 * j as f64));
            let svd = full_svd(&ac);
            let mut s = CMatrix::zeros(rows, cols);
            for (i, &v) in svd.sigma.iter().enumerate() {
                s[(i, i)] = Complex::new(v, 0.0);
            }
            assert!((&svd.u * &s * svd.v.adjoint() - &ac).norm() < 1e-12);
            assert!((svd.u.adjoint() * &svd.u - CMatrix::identity(rows, rows)).norm() < 1e-12);
            assert!((svd.v.adjoint() * &svd.v - CMatrix::identity(cols, cols)).norm() < 1e-12);
            assert!((&ac * svd.v.columns(rows.min(cols), cols - rows.min(cols))).norm() < 1e-12);
            assert!(svd.sigma.windows(2).all(|w| w[0] >= w[1]));
        }
    }

    #[test]
    fn rank_examples() {
        let d = m(2, 2, &[1.0, 0.0, -1.0, 1.0]);
        assert_eq!(numerical_rank(&d, &tol()).unwrap(), 2);
        assert_eq!(numerical_rank(&Matrix::zeros(3, 3), &tol()).unwrap(), 0);
        // [C2M | D2M] for the first case study is 2x3; two rows cap the rank at 2.
        let cd = m(2, 3, &[-1.0, 1.0, 0.0, -0.5, -1.0, 1.0]);
        assert_eq!(numerical_rank(&cd, &tol()).unwrap(), 2);
    }

    #[test]
    fn null_space_is_orthonormal_and_annihilated() {
        let a = m(2, 4, &[1.0, 2.0, 0.0, 1.0, 0.0, 1.0, 1.0, 1.0]);
        let n = null_space(&a, &tol()).unwrap();
        assert_eq!(n.shape(), (4, 2));
        assert!((&a * &n).amax() < 1e-12);
        assert!((n.transpose() * &n - Matrix::identity(2, 2)).amax() < 1e-12);
    }

    fn arb_matrix(rows: usize, cols: usize) -> impl Strategy<Value = Matrix> {
        proptest::collection::vec(-3.0f64..3.0, rows * cols)
            .prop_map(move |v| Matrix::from_row_slice(rows, cols, &v))
    }

    proptest! {
        #[test]
        fn penrose_conditions_hold(a in (1usize..6, 1usize..6).prop_flat_map(|(r, c)| arb_matrix(r, c))) {
            let x = pinv(&a, &tol()).unwrap();
            prop_assert!(penrose_residual(&a, &x) < 1e-10);
        }

        #[test]
        fn penrose_conditions_hold_for_rank_deficient(
            u in arb_matrix(5, 2),
            v in arb_matrix(2, 4),
        ) {
            let a = &u * &v;
            let sv = singular_values(&a);
            prop_assume!(sv[1] > 1e-3 * sv[0].max(1.0));
            let x = pinv(&a, &tol()).unwrap();
            prop_assert!(penrose_residual(&a, &x) < 1e-10);
        }

        #[test]
        fn complement_and_projectors_decompose_space(c in arb_matrix(6, 2)) {
            prop_assume!(singular_values(&c)[1] > 1e-3);
            let h = orth_complement_rows(&c, &tol()).unwrap();
            prop_assert_eq!(h.shape(), (4, 6));
            prop_assert!((&h * &c).amax() < 1e-10);
            prop_assert!((&h * h.transpose() - Matrix::identity(4, 4)).amax() < 1e-10);
            let pc = projector_colspace(&c, &tol()).unwrap();
            let ph = projector_rowspace(&h, &tol()).unwrap();
            prop_assert!((&pc + &ph - Matrix::identity(6, 6)).amax() < 1e-10);
            for p in [&pc, &ph] {
                prop_assert!((p - p.transpose()).amax() < 1e-10);
                prop_assert!((p * p - p).amax() < 1e-10);
            }
        }

        #[test]
        fn transpose_has_same_spectrum(a in (1usize..7).prop_flat_map(|n| arb_matrix(n, n))) {
            let e1 = eigenvalues(&a).unwrap();
            let e2 = eigenvalues(&a.transpose()).unwrap();
            prop_assert!(multiset_distance(&e1, &e2).unwrap() < 1e-6);
        }

        #[test]
        fn rotations_are_special_orthogonal(dim in 2usize..12, seed in any::<u64>(), theta in -10.0f64..10.0) {
            let r = random_rotation(dim, seed).unwrap();
            prop_assert!(orthogonality_defect(&r) < 1e-10);
            prop_assert!((r.determinant() - 1.0).abs() < 1e-10);
            let p = plane_rotation(dim, 0, dim - 1, theta).unwrap();
            prop_assert!(orthogonality_defect(&p) < 1e-12);
            prop_assert!((p.determinant() - 1.0).abs() < 1e-12);
        }
    }
}
