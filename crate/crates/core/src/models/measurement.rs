use crate::error::{Error, Result};
use crate::tensor::linalg::{self, CMatrix};
use crate::tensor::{hermitian_eig, HermitianOperator};

/// Tolerance on `Π_l Π_m = δ_lm Π_l` and `Σ_l Π_l = I`.
pub const PROJECTOR_TOL: f64 = 1e-10;

/// Complete set of orthogonal projectors on the thermometer factor.
#[derive(Debug, Clone)]
pub struct ProjectiveMeasurement {
    projectors: Vec<CMatrix>,
    labels: Vec<f64>,
}

impl ProjectiveMeasurement {
    pub fn new(projectors: Vec<CMatrix>, labels: Vec<f64>) -> Result<Self> {
        if projectors.is_empty() {
            return Err(Error::InvalidFactors("measurement needs at least one projector".into()));
        }
        if projectors.len() != labels.len() {
            return Err(Error::DimensionMismatch {
                expected: projectors.len(),
                found: labels.len(),
            });
        }
        let d = projectors[0].nrows();
        for p in &projectors {
            if p.nrows() != d || p.ncols() != d {
                return Err(Error::DimensionMismatch { expected: d, found: p.nrows() });
            }
        }
        let meas = Self { projectors, labels };
        let (orth, compl) = meas.defects();
        if orth > PROJECTOR_TOL || compl > PROJECTOR_TOL {
            return Err(Error::IdentityViolation {
                identity: "projector orthogonality/completeness",
                deviation: orth.max(compl),
                tolerance: PROJECTOR_TOL,
            });
        }
        Ok(meas)
    }

    /// Rank-1 projectors onto the given orthonormal vectors.
    pub fn from_vectors(vectors: &[Vec<faer::complex_native::c64>], labels: Vec<f64>) -> Result<Self> {
        let projectors = vectors
            .iter()
            .map(|v| CMatrix::from_fn(v.len(), v.len(), |i, j| v[i] * v[j].conj()))
            .collect();
        Self::new(projectors, labels)
    }

    /// `(max ‖Π_l Π_m − δ_lm Π_l‖, ‖Σ_l Π_l − I‖)`, entrywise max norms.
    pub fn defects(&self) -> (f64, f64) {
        let d = self.dim();
        let mut orth = 0.0_f64;
        let mut sum = linalg::zeros(d, d);
        for (i, p) in self.projectors.iter().enumerate() {
            sum = &sum + p;
            for (j, q) in self.projectors.iter().enumerate() {
                let pq = p * q;
                let dev = if i == j {
                    linalg::max_abs_diff(&pq, p)
                } else {
                    linalg::max_abs(&pq)
                };
                orth = orth.max(dev);
            }
        }
        (orth, linalg::max_abs_diff(&sum, &linalg::identity(d)))
    }

    pub fn dim(&self) -> usize {
        self.projectors[0].nrows()
    }

    pub fn len(&self) -> usize {
        self.projectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.projectors.is_empty()
    }

    pub fn projectors(&self) -> &[CMatrix] {
        &self.projectors
    }

    pub fn projector(&self, index: usize) -> &CMatrix {
        &self.projectors[index]
    }

    pub fn labels(&self) -> &[f64] {
        &self.labels
    }

    pub fn label(&self, index: usize) -> f64 {
        self.labels[index]
    }

    pub fn rank(&self, index: usize) -> usize {
        linalg::trace(&self.projectors[index]).re.round() as usize
    }
}

/// Fock-number projectors `|l⟩⟨l|`, `l = 0..=n_max`, labelled by `l`.
pub fn fock_measurement(n_max: usize) -> ProjectiveMeasurement {
    let d = n_max + 1;
    let projectors = (0..d)
        .map(|l| CMatrix::from_fn(d, d, |i, j| if i == l && j == l { linalg::ONE } else { linalg::ZERO }))
        .collect();
    let labels = (0..d).map(|l| l as f64).collect();
    ProjectiveMeasurement { projectors, labels }
}

/// Projectors onto `|±_x⟩ = (|0⟩ ± |1⟩)/√2`, labelled `+1` and `−1`.
pub fn pauli_x_measurement() -> ProjectiveMeasurement {
    let plus = linalg::from_real_rows(&[&[0.5, 0.5], &[0.5, 0.5]]);
    let minus = linalg::from_real_rows(&[&[0.5, -0.5], &[-0.5, 0.5]]);
    ProjectiveMeasurement {
        projectors: vec![plus, minus],
        labels: vec![1.0, -1.0],
    }
}

/// Spectral projectors of `op`; eigenvalues closer than `degeneracy_tol` to
/// their neighbour share a projector labelled by the cluster mean.
pub fn eigenbasis_measurement(op: &HermitianOperator, degeneracy_tol: f64) -> Result<ProjectiveMeasurement> {
    let eig = hermitian_eig(op.matrix())?;
    let n = eig.dim();
    let mut clusters: Vec<Vec<usize>> = Vec::new();
    for k in 0..n {
        match clusters.last_mut() {
            Some(c) if eig.values[k] - eig.values[*c.last().unwrap()] <= degeneracy_tol => c.push(k),
            _ => clusters.push(vec![k]),
        }
    }
    let v = &eig.vectors;
    let projectors = clusters
        .iter()
        .map(|c| {
            CMatrix::from_fn(n, n, |i, j| {
                c.iter()
                    .fold(linalg::ZERO, |acc, &k| acc + v.read(i, k) * v.read(j, k).conj())
            })
        })
        .collect();
    let labels = clusters
        .iter()
        .map(|c| c.iter().map(|&k| eig.values[k]).sum::<f64>() / c.len() as f64)
        .collect();
    Ok(ProjectiveMeasurement { projectors, labels })
}
