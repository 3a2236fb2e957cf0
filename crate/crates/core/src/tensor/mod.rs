//! Dense operators on truncated tensor-product Hilbert spaces.
//!
//! Factor 0 of every [`HilbertSpace`] is the thermometer; the remaining
//! factors make up the sample. Matrices use the Kronecker ordering in which
//! factor 0 is the most significant index.

pub mod linalg;
mod ops;

use faer::complex_native::c64;
use faer::Side;

use crate::error::{Error, Result};
pub use linalg::CMatrix;
pub use ops::{
    embed_factor, embed_operator, partial_trace, partial_trace_matrix, tensor_product,
    thermal_state, truncation_level,
};

/// Relative Hermiticity tolerance: `max |A − A^H| ≤ HERMITIAN_TOL · (1 + max |A|)`.
pub const HERMITIAN_TOL: f64 = 1e-12;
/// Absolute tolerance on density-matrix trace and eigenvalues.
pub const DENSITY_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct HilbertSpace {
    factor_dims: Vec<usize>,
}

impl HilbertSpace {
    pub fn new(factor_dims: Vec<usize>) -> Result<Self> {
        if factor_dims.is_empty() {
            return Err(Error::InvalidFactors("at least one factor required".into()));
        }
        if let Some(&d) = factor_dims.iter().find(|&&d| d == 0) {
            return Err(Error::InvalidFactors(format!("factor dimension {d} < 1")));
        }
        Ok(Self { factor_dims })
    }

    pub fn factor_dims(&self) -> &[usize] {
        &self.factor_dims
    }

    pub fn num_factors(&self) -> usize {
        self.factor_dims.len()
    }

    pub fn total_dim(&self) -> usize {
        self.factor_dims.iter().product()
    }

    /// Dimension of the thermometer factor.
    pub fn system_dim(&self) -> usize {
        self.factor_dims[0]
    }

    /// Product of the sample factor dimensions (1 when there are none).
    pub fn sample_dim(&self) -> usize {
        self.factor_dims[1..].iter().product()
    }

    /// The space spanned by factors `1..`, or `None` for a bare system.
    pub fn sample_space(&self) -> Option<HilbertSpace> {
        (self.factor_dims.len() > 1).then(|| HilbertSpace {
            factor_dims: self.factor_dims[1..].to_vec(),
        })
    }

    pub(crate) fn check_matrix(&self, m: &CMatrix) -> Result<()> {
        let n = self.total_dim();
        if m.nrows() != n || m.ncols() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: if m.nrows() != n { m.nrows() } else { m.ncols() },
            });
        }
        Ok(())
    }
}

fn check_hermitian(m: &CMatrix) -> Result<()> {
    let deviation = linalg::hermitian_deviation(m);
    if deviation <= HERMITIAN_TOL * (1.0 + linalg::max_abs(m)) {
        Ok(())
    } else {
        Err(Error::NotHermitian { deviation })
    }
}

#[derive(Debug, Clone)]
pub struct HermitianOperator {
    space: HilbertSpace,
    matrix: CMatrix,
}

impl HermitianOperator {
    pub fn new(space: HilbertSpace, matrix: CMatrix) -> Result<Self> {
        space.check_matrix(&matrix)?;
        check_hermitian(&matrix)?;
        Ok(Self { space, matrix })
    }

    /// Builds the operator from its Hermitian part; used for sums of
    /// products that are Hermitian only up to rounding.
    pub fn from_hermitian_part(space: HilbertSpace, matrix: &CMatrix) -> Result<Self> {
        space.check_matrix(matrix)?;
        check_hermitian(matrix)?;
        Ok(Self {
            space,
            matrix: linalg::hermitian_part(matrix),
        })
    }

    pub fn zeros(space: HilbertSpace) -> Self {
        let n = space.total_dim();
        Self {
            space,
            matrix: linalg::zeros(n, n),
        }
    }

    pub fn space(&self) -> &HilbertSpace {
        &self.space
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn eig(&self) -> Eigen {
        Eigen::of_hermitian(&self.matrix)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.space != other.space {
            return Err(Error::DimensionMismatch {
                expected: self.space.total_dim(),
                found: other.space.total_dim(),
            });
        }
        Ok(Self {
            space: self.space.clone(),
            matrix: &self.matrix + &other.matrix,
        })
    }

    /// Expectation value `tr(A ρ)`.
    pub fn expectation(&self, rho: &DensityMatrix) -> f64 {
        linalg::trace_product(&self.matrix, rho.matrix()).re
    }
}

#[derive(Debug, Clone)]
pub struct DensityMatrix {
    space: HilbertSpace,
    matrix: CMatrix,
}

impl DensityMatrix {
    /// Validates Hermiticity, unit trace and positivity.
    pub fn new(space: HilbertSpace, matrix: CMatrix) -> Result<Self> {
        space.check_matrix(&matrix)?;
        let rho = Self { space, matrix };
        rho.validate()?;
        Ok(rho)
    }

    /// Skips the O(n³) positivity check; for states produced by trusted
    /// constructions such as unitary evolution of a valid state.
    pub(crate) fn new_unchecked(space: HilbertSpace, matrix: CMatrix) -> Self {
        Self { space, matrix }
    }

    pub fn pure(space: HilbertSpace, psi: &[c64]) -> Result<Self> {
        let n = psi.len();
        let m = CMatrix::from_fn(n, n, |i, j| psi[i] * psi[j].conj());
        Self::new(space, m)
    }

    pub fn maximally_mixed(space: HilbertSpace) -> Self {
        let n = space.total_dim();
        let m = linalg::scaled(&linalg::identity(n), linalg::re(1.0 / n as f64));
        Self::new_unchecked(space, m)
    }

    pub fn validate(&self) -> Result<()> {
        check_hermitian(&self.matrix)
            .map_err(|e| Error::InvalidDensity(e.to_string()))?;
        let tr = linalg::trace(&self.matrix);
        if (tr.re - 1.0).abs() > DENSITY_TOL || tr.im.abs() > DENSITY_TOL {
            return Err(Error::InvalidDensity(format!("trace {} + {}i", tr.re, tr.im)));
        }
        let min = Eigen::of_hermitian(&self.matrix).values[0];
        if min < -DENSITY_TOL {
            return Err(Error::InvalidDensity(format!("negative eigenvalue {min:.3e}")));
        }
        Ok(())
    }

    pub fn space(&self) -> &HilbertSpace {
        &self.space
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn trace(&self) -> f64 {
        linalg::trace(&self.matrix).re
    }

    pub fn purity(&self) -> f64 {
        linalg::trace_product(&self.matrix, &self.matrix).re
    }
}

/// Eigendecomposition `A = V diag(λ) V^H` with ascending eigenvalues.
#[derive(Debug, Clone)]
pub struct Eigen {
    pub values: Vec<f64>,
    pub vectors: CMatrix,
}

impl Eigen {
    /// Decomposes the Hermitian part of `m` without checking Hermiticity.
    pub(crate) fn of_hermitian(m: &CMatrix) -> Self {
        let n = m.nrows();
        if n == 0 {
            return Self {
                values: Vec::new(),
                vectors: linalg::zeros(0, 0),
            };
        }
        let evd = m.selfadjoint_eigendecomposition(Side::Lower);
        let s = evd.s().column_vector();
        let u = evd.u();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| s.read(a).re.total_cmp(&s.read(b).re));
        let values = order.iter().map(|&k| s.read(k).re).collect();
        let vectors = CMatrix::from_fn(n, n, |i, j| u.read(i, order[j]));
        Self { values, vectors }
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    /// `V f(Λ) V^H`; errors if `f` is non-finite on any eigenvalue.
    pub fn apply(&self, f: impl Fn(f64) -> c64) -> Result<CMatrix> {
        let mut diag = Vec::with_capacity(self.dim());
        for &lambda in &self.values {
            let fx = f(lambda);
            if !fx.re.is_finite() || !fx.im.is_finite() {
                return Err(Error::Domain { eigenvalue: lambda });
            }
            diag.push(fx);
        }
        Ok(self.compose(&diag))
    }

    /// `V diag(d) V^H` for per-eigenvalue weights `d`.
    pub fn compose(&self, diag: &[c64]) -> CMatrix {
        let n = self.dim();
        assert_eq!(diag.len(), n);
        let scaled = CMatrix::from_fn(n, n, |i, j| self.vectors.read(i, j) * diag[j]);
        &scaled * self.vectors.adjoint()
    }

    pub fn compose_real(&self, diag: &[f64]) -> CMatrix {
        let d: Vec<c64> = diag.iter().map(|&x| linalg::re(x)).collect();
        self.compose(&d)
    }

    /// `V f(Λ) V^H` for a real-valued `f`.
    pub fn apply_real(&self, f: impl Fn(f64) -> f64) -> Result<CMatrix> {
        self.apply(|x| linalg::re(f(x)))
    }

    pub fn reconstruct(&self) -> CMatrix {
        self.apply_real(|x| x).expect("identity is finite on finite eigenvalues")
    }
}

/// Eigendecomposition of a Hermitian matrix, ascending eigenvalues.
pub fn hermitian_eig(m: &CMatrix) -> Result<Eigen> {
    if m.nrows() != m.ncols() {
        return Err(Error::DimensionMismatch {
            expected: m.nrows(),
            found: m.ncols(),
        });
    }
    check_hermitian(m)?;
    Ok(Eigen::of_hermitian(m))
}

/// Matrix function `V f(Λ) V^H` of a Hermitian operator.
pub fn hermitian_func(op: &HermitianOperator, f: impl Fn(f64) -> c64) -> Result<CMatrix> {
    op.eig().apply(f)
}

/// Real-valued variant of [`hermitian_func`].
pub fn hermitian_func_real(op: &HermitianOperator, f: impl Fn(f64) -> f64) -> Result<CMatrix> {
    op.eig().apply_real(f)
}

/// Gibbs weights `e^{−β(λ − λ_min)} / Σ` and `ln Z` for a sorted or unsorted spectrum.
pub fn gibbs_weights(values: &[f64], beta: f64) -> (Vec<f64>, f64) {
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let mut w: Vec<f64> = values.iter().map(|&e| (-beta * (e - min)).exp()).collect();
    let z: f64 = w.iter().sum();
    w.iter_mut().for_each(|x| *x /= z);
    (w, z.ln() - beta * min)
}
