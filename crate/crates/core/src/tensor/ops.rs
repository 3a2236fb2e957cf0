use super::linalg::{self, CMatrix};
use super::{DensityMatrix, Eigen, HermitianOperator, HilbertSpace};
use crate::error::{ensure_positive, Error, Result};

/// Kronecker product `a ⊗ b`.
pub fn tensor_product(a: &CMatrix, b: &CMatrix) -> CMatrix {
    linalg::kron(a, b)
}

/// Lifts `local` on factor `factor_index` to the full space, identity elsewhere.
/// `local` need not be Hermitian (ladder operators go through here too).
pub fn embed_operator(local: &CMatrix, space: &HilbertSpace, factor_index: usize) -> Result<CMatrix> {
    let dims = space.factor_dims();
    if factor_index >= dims.len() {
        return Err(Error::InvalidFactors(format!(
            "factor index {factor_index} out of range for {} factors",
            dims.len()
        )));
    }
    let d = dims[factor_index];
    if local.nrows() != d || local.ncols() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: local.nrows(),
        });
    }
    let before: usize = dims[..factor_index].iter().product();
    let after: usize = dims[factor_index + 1..].iter().product();
    let right = if after > 1 {
        linalg::kron(local, &linalg::identity(after))
    } else {
        local.clone()
    };
    Ok(if before > 1 {
        linalg::kron(&linalg::identity(before), &right)
    } else {
        right
    })
}

/// Hermitian variant of [`embed_operator`].
pub fn embed_factor(local: &CMatrix, space: &HilbertSpace, factor_index: usize) -> Result<HermitianOperator> {
    let full = embed_operator(local, space, factor_index)?;
    HermitianOperator::new(space.clone(), full)
}

fn strides(dims: &[usize]) -> Vec<usize> {
    let mut s = vec![1; dims.len()];
    for f in (0..dims.len().saturating_sub(1)).rev() {
        s[f] = s[f + 1] * dims[f + 1];
    }
    s
}

/// Offsets of every multi-index over `factors` into the full index space.
fn offsets(factors: &[usize], dims: &[usize], strides: &[usize]) -> Vec<usize> {
    let mut out = vec![0usize];
    for &f in factors {
        let mut next = Vec::with_capacity(out.len() * dims[f]);
        for &base in &out {
            for i in 0..dims[f] {
                next.push(base + i * strides[f]);
            }
        }
        out = next;
    }
    out
}

/// Partial trace of an arbitrary operator, keeping `keep` (in ascending
/// factor order). Returns the reduced matrix and its space.
pub fn partial_trace_matrix(m: &CMatrix, space: &HilbertSpace, keep: &[usize]) -> Result<(CMatrix, HilbertSpace)> {
    space.check_matrix(m)?;
    if keep.is_empty() {
        return Err(Error::InvalidFactors("keep set is empty".into()));
    }
    let dims = space.factor_dims();
    let mut kept: Vec<usize> = keep.to_vec();
    kept.sort_unstable();
    kept.dedup();
    if let Some(&bad) = kept.iter().find(|&&f| f >= dims.len()) {
        return Err(Error::InvalidFactors(format!("factor {bad} out of range")));
    }
    let traced: Vec<usize> = (0..dims.len()).filter(|f| !kept.contains(f)).collect();
    let st = strides(dims);
    let keep_off = offsets(&kept, dims, &st);
    let trace_off = offsets(&traced, dims, &st);
    let n = keep_off.len();
    let out = CMatrix::from_fn(n, n, |r, c| {
        let (kr, kc) = (keep_off[r], keep_off[c]);
        trace_off
            .iter()
            .fold(linalg::ZERO, |acc, &t| acc + m.read(kr + t, kc + t))
    });
    let reduced = HilbertSpace::new(kept.iter().map(|&f| dims[f]).collect())?;
    Ok((out, reduced))
}

/// `Tr` over every factor not in `keep`.
pub fn partial_trace(rho: &DensityMatrix, keep: &[usize]) -> Result<DensityMatrix> {
    let (m, space) = partial_trace_matrix(rho.matrix(), rho.space(), keep)?;
    Ok(DensityMatrix::new_unchecked(space, m))
}

/// Gibbs state `e^{−βH} / tr e^{−βH}`, evaluated with the ground energy shifted out.
pub fn thermal_state(h: &HermitianOperator, beta: f64) -> Result<DensityMatrix> {
    ensure_positive("beta", beta)?;
    thermal_from_eigen(&h.eig(), h.space().clone(), beta)
}

pub(crate) fn thermal_from_eigen(eig: &Eigen, space: HilbertSpace, beta: f64) -> Result<DensityMatrix> {
    let (w, _) = super::gibbs_weights(&eig.values, beta);
    Ok(DensityMatrix::new_unchecked(space, eig.compose_real(&w)))
}

/// Smallest Fock cutoff `N` whose single-mode thermal tail `Σ_{n>N} p_n`
/// falls below `tail`. The tail is geometric: `e^{−βω(N+1)}`.
pub fn truncation_level(beta: f64, omega: f64, tail: f64) -> Result<usize> {
    ensure_positive("beta", beta)?;
    ensure_positive("omega", omega)?;
    ensure_positive("tail", tail)?;
    if tail >= 1.0 {
        return Err(Error::InvalidParameter {
            name: "tail",
            value: tail,
            reason: "must be below 1",
        });
    }
    let x = beta * omega;
    let tail_above = |n: usize| (-x * (n as f64 + 1.0)).exp();
    let mut n = (-tail.ln() / x).floor().max(0.0) as usize;
    while tail_above(n) >= tail {
        n += 1;
    }
    while n > 0 && tail_above(n - 1) < tail {
        n -= 1;
    }
    Ok(n)
}
