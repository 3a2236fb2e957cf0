//! Thin helpers over `faer` dense complex matrices.

use faer::complex_native::c64;
use faer::Mat;

pub type CMatrix = Mat<c64>;

pub const ZERO: c64 = c64 { re: 0.0, im: 0.0 };
pub const ONE: c64 = c64 { re: 1.0, im: 0.0 };

#[inline]
pub fn re(x: f64) -> c64 {
    c64::new(x, 0.0)
}

pub fn zeros(rows: usize, cols: usize) -> CMatrix {
    Mat::zeros(rows, cols)
}

pub fn identity(n: usize) -> CMatrix {
    Mat::identity(n, n)
}

pub fn real_diagonal(diag: &[f64]) -> CMatrix {
    let n = diag.len();
    Mat::from_fn(n, n, |i, j| if i == j { re(diag[i]) } else { ZERO })
}

pub fn from_real_rows(rows: &[&[f64]]) -> CMatrix {
    let n = rows.len();
    let m = rows.first().map_or(0, |r| r.len());
    Mat::from_fn(n, m, |i, j| re(rows[i][j]))
}

pub fn adjoint(a: &CMatrix) -> CMatrix {
    a.adjoint().to_owned()
}

pub fn matmul(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a * b
}

/// `a * b * a^H`
pub fn sandwich(a: &CMatrix, b: &CMatrix) -> CMatrix {
    let ab = a * b;
    &ab * a.adjoint()
}

pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kron(b)
}

pub fn trace(a: &CMatrix) -> c64 {
    let n = a.nrows().min(a.ncols());
    (0..n).fold(ZERO, |acc, i| acc + a.read(i, i))
}

/// `tr(a b)` without forming the product.
pub fn trace_product(a: &CMatrix, b: &CMatrix) -> c64 {
    debug_assert_eq!(a.ncols(), b.nrows());
    debug_assert_eq!(a.nrows(), b.ncols());
    let mut acc = ZERO;
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            acc += a.read(i, j) * b.read(j, i);
        }
    }
    acc
}

pub fn max_abs(a: &CMatrix) -> f64 {
    let mut m = 0.0_f64;
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            m = m.max(a.read(i, j).abs());
        }
    }
    m
}

/// Entrywise max |a - b|.
pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    assert_eq!((a.nrows(), a.ncols()), (b.nrows(), b.ncols()));
    let mut m = 0.0_f64;
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            m = m.max((a.read(i, j) - b.read(i, j)).abs());
        }
    }
    m
}

/// Entrywise max |a - a^H|.
pub fn hermitian_deviation(a: &CMatrix) -> f64 {
    let n = a.nrows();
    let mut m = 0.0_f64;
    for j in 0..n {
        for i in 0..=j {
            m = m.max((a.read(i, j) - a.read(j, i).conj()).abs());
        }
    }
    m
}

/// `(a + a^H) / 2`
pub fn hermitian_part(a: &CMatrix) -> CMatrix {
    let n = a.nrows();
    Mat::from_fn(n, n, |i, j| (a.read(i, j) + a.read(j, i).conj()) * 0.5)
}

pub fn scaled(a: &CMatrix, s: c64) -> CMatrix {
    Mat::from_fn(a.nrows(), a.ncols(), |i, j| a.read(i, j) * s)
}

pub fn add(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a + b
}

pub fn sub(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a - b
}

/// Trace distance `½‖a − b‖₁` for Hermitian arguments.
pub fn trace_distance(a: &CMatrix, b: &CMatrix) -> f64 {
    let d = hermitian_part(&(a - b));
    let eig = d.selfadjoint_eigendecomposition(faer::Side::Lower);
    let s = eig.s().column_vector();
    0.5 * (0..s.nrows()).map(|i| s.read(i).re.abs()).sum::<f64>()
}
