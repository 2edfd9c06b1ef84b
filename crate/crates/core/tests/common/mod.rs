//! Independent oracles and system generators shared by the integration tests.
#![allow(dead_code)]

use invfilt::linalg::{complex_eigenvalues, CMatrix, Complex, Matrix};
use invfilt::sysmodel::LtiSystem;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    rand::SeedableRng::seed_from_u64(seed)
}

pub fn uniform(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> Matrix {
    Matrix::from_fn(rows, cols, |_, _| rng.gen_range(-1.0..1.0))
}

fn random_orthogonal(rng: &mut ChaCha8Rng, n: usize) -> Matrix {
    uniform(rng, n, n).qr().q()
}

/// `det([zI - A, -B; C, D])` for a square system.
pub fn rosenbrock_det(sys: &LtiSystem, z: Complex) -> Complex {
    let (n, m) = (sys.states(), sys.inputs());
    let mut p = CMatrix::zeros(n + m, n + m);
    for i in 0..n {
        for j in 0..n {
            p[(i, j)] = Complex::new(-sys.a()[(i, j)], 0.0);
        }
        p[(i, i)] += z;
        for j in 0..m {
            p[(i, n + j)] = Complex::new(-sys.b()[(i, j)], 0.0);
        }
    }
    for i in 0..m {
        for j in 0..n {
            p[(n + i, j)] = Complex::new(sys.c()[(i, j)], 0.0);
        }
        for j in 0..m {
            p[(n + i, n + j)] = Complex::new(sys.d()[(i, j)], 0.0);
        }
    }
    p.determinant()
}

/// Finite zeros of a square system: interpolate the Rosenbrock determinant
/// on a circle, then take the roots of the recovered polynomial.
pub fn determinant_zeros(sys: &LtiSystem) -> Vec<Complex> {
    let n = sys.states();
    let count = n + 1;
    let radius = 1.3;
    let samples: Vec<Complex> = (0..count)
        .map(|k| {
            let w = Complex::from_polar(radius, 2.0 * std::f64::consts::PI * k as f64 / count as f64);
            rosenbrock_det(sys, w)
        })
        .collect();
    let mut coeffs: Vec<Complex> = (0..count)
        .map(|j| {
            let mut acc = Complex::new(0.0, 0.0);
            for (k, s) in samples.iter().enumerate() {
                acc += s * Complex::from_polar(1.0, -2.0 * std::f64::consts::PI * (j * k) as f64 / count as f64);
            }
            acc / (count as f64 * radius.powi(j as i32))
        })
        .collect();
    let scale = coeffs
        .iter()
        .enumerate()
        .map(|(j, c)| c.norm() * radius.powi(j as i32))
        .fold(0.0, f64::max);
    while coeffs.len() > 1 && coeffs.last().unwrap().norm() * radius.powi(coeffs.len() as i32 - 1) < 1e-9 * scale {
        coeffs.pop();
    }
    let deg = coeffs.len() - 1;
    if deg == 0 {
        return Vec::new();
    }
    let lead = coeffs[deg];
    let mut comp = CMatrix::zeros(deg, deg);
    for j in 0..deg {
        comp[(0, j)] = -coeffs[deg - 1 - j] / lead;
    }
    for i in 1..deg {
        comp[(i, i - 1)] = Complex::new(1.0, 0.0);
    }
    complex_eigenvalues(&comp).unwrap()
}

/// Square system with generic entries; `strictly_proper` zeroes `D`.
pub fn random_square(rng: &mut ChaCha8Rng, n: usize, m: usize, strictly_proper: bool) -> LtiSystem {
    let a = uniform(rng, n, n);
    let b = uniform(rng, n, m);
    let c = uniform(rng, m, n);
    let d = if strictly_proper { Matrix::zeros(m, m) } else { uniform(rng, m, m) + Matrix::identity(m, m) };
    LtiSystem::new(a, b, c, d).unwrap()
}

/// Zero-free square system: `channels` shift chains of equal length `depth`
/// (pure delays of order `depth`) with random stable feedback on each chain,
/// mixed at the input and output by invertible matrices and hidden behind a
/// random orthogonal change of state coordinates.
pub fn zero_free(rng: &mut ChaCha8Rng, channels: usize, depth: usize) -> LtiSystem {
    let n = channels * depth;
    let mut a = Matrix::zeros(n, n);
    let mut b = Matrix::zeros(n, channels);
    let mut c = Matrix::zeros(channels, n);
    for ch in 0..channels {
        let o = ch * depth;
        for i in 1..depth {
            a[(o + i, o + i - 1)] = 1.0;
        }
        for j in 0..depth {
            a[(o, o + j)] = rng.gen_range(-0.4..0.4);
        }
        b[(o, ch)] = 1.0;
        c[(ch, o + depth - 1)] = 1.0;
    }
    let mix_in = uniform(rng, channels, channels) + Matrix::identity(channels, channels) * 2.0;
    let mix_out = uniform(rng, channels, channels) + Matrix::identity(channels, channels) * 2.0;
    let t = random_orthogonal(rng, n);
    LtiSystem::new(
        &t * a * t.transpose(),
        &t * b * mix_in,
        mix_out * c * t.transpose(),
        Matrix::zeros(channels, channels),
    )
    .unwrap()
}

/// Extra outputs appended to a zero-free system keep it zero-free.
pub fn with_extra_outputs(rng: &mut ChaCha8Rng, sys: &LtiSystem, extra: usize) -> LtiSystem {
    let n = sys.states();
    let m = sys.inputs();
    let mut c = Matrix::zeros(sys.outputs() + extra, n);
    c.rows_mut(0, sys.outputs()).copy_from(sys.c());
    c.rows_mut(sys.outputs(), extra).copy_from(&uniform(rng, extra, n));
    LtiSystem::new(sys.a().clone(), sys.b().clone(), c, Matrix::zeros(sys.outputs() + extra, m)).unwrap()
}
