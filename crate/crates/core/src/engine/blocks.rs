//! Block operations for matrices ordered system-major (`index = s·d_B + b`).

use faer::complex_native::c64;

use crate::tensor::linalg::{self, CMatrix};

/// `Tr_B m` (d_S × d_S).
pub fn trace_sample(m: &CMatrix, d_s: usize, d_b: usize) -> CMatrix {
    CMatrix::from_fn(d_s, d_s, |s, t| {
        (0..d_b).fold(linalg::ZERO, |acc, b| acc + m.read(s * d_b + b, t * d_b + b))
    })
}

/// `Tr_S m` (d_B × d_B).
pub fn trace_system(m: &CMatrix, d_s: usize, d_b: usize) -> CMatrix {
    CMatrix::from_fn(d_b, d_b, |b, c| {
        (0..d_s).fold(linalg::ZERO, |acc, s| acc + m.read(s * d_b + b, s * d_b + c))
    })
}

/// `Tr_S[(Π⊗I) m (Π⊗I)] = Σ_{ij} Π_ji m_ij` for a projector `Π` on the system.
pub fn conditional_sample(m: &CMatrix, proj: &CMatrix, d_s: usize, d_b: usize) -> CMatrix {
    let mut out = linalg::zeros(d_b, d_b);
    for i in 0..d_s {
        for j in 0..d_s {
            let w = proj.read(j, i);
            if w == linalg::ZERO {
                continue;
            }
            for c in 0..d_b {
                for b in 0..d_b {
                    let v = out.read(b, c) + w * m.read(i * d_b + b, j * d_b + c);
                    out.write(b, c, v);
                }
            }
        }
    }
    out
}

/// `‖(Π⊗I) w‖²` for every column `w` of `cols`.
pub fn projected_norms(cols: &CMatrix, proj: &CMatrix, d_s: usize, d_b: usize) -> Vec<f64> {
    projected_inner(cols, cols, proj, d_s, d_b)
}

/// `Re ⟨a|Π⊗I|b⟩` column by column.
pub fn projected_inner(a: &CMatrix, cols: &CMatrix, proj: &CMatrix, d_s: usize, d_b: usize) -> Vec<f64> {
    let entries: Vec<(usize, usize, c64)> = (0..d_s)
        .flat_map(|i| (0..d_s).map(move |j| (i, j)))
        .map(|(i, j)| (i, j, proj.read(i, j)))
        .filter(|&(_, _, w)| w != linalg::ZERO)
        .collect();
    let mut out = Vec::with_capacity(cols.ncols());
    for col in 0..cols.ncols() {
        // Σ_b Σ_{ij} conj(a_{ib}) Π_ij c_{jb}
        let mut acc = linalg::ZERO;
        for &(i, j, w) in &entries {
            for b in 0..d_b {
                acc += a.read(i * d_b + b, col).conj() * w * cols.read(j * d_b + b, col);
            }
        }
        out.push(acc.re);
    }
    out
}

/// `(I_S ⊗ v) m`, applying `v` to the sample index of every column.
pub fn apply_sample_left(v: &CMatrix, m: &CMatrix, d_s: usize, d_b: usize) -> CMatrix {
    let mut out = linalg::zeros(m.nrows(), m.ncols());
    for s in 0..d_s {
        let block = m.as_ref().subrows(s * d_b, d_b);
        let prod = v * block;
        out.as_mut().subrows_mut(s * d_b, d_b).copy_from(&prod);
    }
    out
}

/// `(I_S ⊗ v)^H m (I_S ⊗ v)`, block by block.
pub fn sample_basis_change(v: &CMatrix, m: &CMatrix, d_s: usize, d_b: usize) -> CMatrix {
    let mut out = linalg::zeros(m.nrows(), m.ncols());
    for s in 0..d_s {
        for t in 0..d_s {
            let block = m.as_ref().submatrix(s * d_b, t * d_b, d_b, d_b);
            let prod = &(v.adjoint() * block) * v;
            out.as_mut().submatrix_mut(s * d_b, t * d_b, d_b, d_b).copy_from(&prod);
        }
    }
    out
}
