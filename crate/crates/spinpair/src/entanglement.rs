//! Closed-form bipartite entanglement quantities.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::quantum_state::{
    cr, hermitian_eigen, hermitian_eigenvalues, partial_transpose, permute_qubits, schmidt_decompose, shannon_bits,
    trace_norm, CMatrix, DensityMatrix, Operator, PureState, Subsystem, TOL,
};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EntanglementReport {
    pub concurrence: f64,
    pub eof_bits: f64,
    pub negativity: f64,
    pub log_negativity_bits: f64,
    pub ppt: bool,
    pub min_pt_eigenvalue: f64,
    pub entangled: bool,
}

fn need_two_qubits(rho: &DensityMatrix) -> Result<()> {
    if rho.dim() != 4 {
        return Err(Error::Dimension(format!("expected a 2-qubit state, got dim {}", rho.dim())));
    }
    Ok(())
}

fn sigma_y_y() -> CMatrix {
    // Y⊗Y in the computational basis
    let mut m = CMatrix::zeros(4, 4);
    m[(0, 3)] = cr(-1.0);
    m[(3, 0)] = cr(-1.0);
    m[(1, 2)] = cr(1.0);
    m[(2, 1)] = cr(1.0);
    m
}

/// Spectral weight treated as exactly zero when factoring ρ. The square root
/// would otherwise lift roundoff of 1e-16 to 1e-8 in the concurrence.
const ROUNDOFF_WEIGHT: f64 = 1e-14;

/// Wootters concurrence. With ρ = BB† the values λᵢ are the singular values
/// of B†(Y⊗Y)B*, which avoids square roots of a non-Hermitian spectrum.
pub fn concurrence(rho: &DensityMatrix) -> Result<f64> {
    need_two_qubits(rho)?;
    let (vals, vecs) = hermitian_eigen(rho.matrix());
    let b = CMatrix::from_fn(4, 4, |r, k| {
        let w = if vals[k] > ROUNDOFF_WEIGHT { vals[k].sqrt() } else { 0.0 };
        vecs[(r, k)] * w
    });
    let m = b.adjoint() * sigma_y_y() * b.map(|z| z.conj());
    let mut lam: Vec<f64> = m.svd(false, false).singular_values.iter().copied().collect();
    lam.sort_by(|a, b| b.total_cmp(a));
    Ok((lam[0] - lam[1] - lam[2] - lam[3]).clamp(0.0, 1.0))
}

/// h(x) = −x log₂x − (1−x) log₂(1−x)
pub fn binary_entropy(x: f64) -> f64 {
    shannon_bits(&[x, 1.0 - x])
}

/// E_f as a function of concurrence.
pub fn eof_from_concurrence(c: f64) -> f64 {
    let c = c.clamp(0.0, 1.0);
    binary_entropy((1.0 + (1.0 - c * c).sqrt()) / 2.0)
}

pub fn entanglement_of_formation(rho: &DensityMatrix) -> Result<f64> {
    Ok(eof_from_concurrence(concurrence(rho)?))
}

fn pt_spectrum(rho: &DensityMatrix, cut: (usize, usize)) -> Result<(Operator, Vec<f64>)> {
    let pt = partial_transpose(rho.matrix(), cut, Subsystem::B)?;
    let ev = hermitian_eigenvalues(pt.matrix());
    Ok((pt, ev))
}

/// (‖ρ^{T_B}‖₁ − 1)/2
pub fn negativity(rho: &DensityMatrix, cut: (usize, usize)) -> Result<f64> {
    let (pt, _) = pt_spectrum(rho, cut)?;
    Ok(((trace_norm(pt.matrix()) - 1.0) / 2.0).max(0.0))
}

/// Σ|negative eigenvalues of ρ^{T_B}|, the second route to the negativity.
pub fn negativity_from_spectrum(rho: &DensityMatrix, cut: (usize, usize)) -> Result<f64> {
    let (_, ev) = pt_spectrum(rho, cut)?;
    Ok(ev.iter().filter(|&&v| v < 0.0).map(|v| -v).sum())
}

/// log₂‖ρ^{T_B}‖₁
pub fn log_negativity(rho: &DensityMatrix, cut: (usize, usize)) -> Result<f64> {
    let (pt, _) = pt_spectrum(rho, cut)?;
    Ok(trace_norm(pt.matrix()).log2().max(0.0))
}

/// (is PPT, smallest eigenvalue of the partial transpose)
pub fn is_ppt(rho: &DensityMatrix, cut: (usize, usize)) -> Result<(bool, f64)> {
    let (_, ev) = pt_spectrum(rho, cut)?;
    let min = ev[0];
    Ok((min >= -TOL, min))
}

/// S(ρ_A) from the Schmidt coefficients.
pub fn entropy_of_entanglement(psi: &PureState, cut: (usize, usize)) -> Result<f64> {
    let n2 = psi.amplitudes().norm_squared();
    if (n2 - 1.0).abs() > TOL {
        return Err(Error::Validation(format!("state not normalized (norm² {n2})")));
    }
    let terms = schmidt_decompose(psi, cut)?;
    let p: Vec<f64> = terms.iter().map(|t| t.lambda * t.lambda).collect();
    Ok(shannon_bits(&p))
}

/// tr(Wρ)
pub fn witness_expectation(rho: &DensityMatrix, w: &Operator) -> Result<f64> {
    if !w.is_hermitian() {
        return Err(Error::Validation("witness must be Hermitian".into()));
    }
    if w.dim() != rho.dim() {
        return Err(Error::Dimension("witness and state dimensions differ".into()));
    }
    let t = (w.matrix() * rho.matrix()).trace();
    if t.im.abs() > TOL {
        return Err(Error::Validation(format!("imaginary expectation residue {}", t.im)));
    }
    Ok(t.re)
}

/// ρ⊗σ for two 2-qubit states, reordered so the cut (4,4) separates
/// (A_ρ A_σ) from (B_ρ B_σ).
pub fn pair_product(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<DensityMatrix> {
    need_two_qubits(rho)?;
    need_two_qubits(sigma)?;
    let joint = rho.matrix().kronecker(sigma.matrix());
    DensityMatrix::new(permute_qubits(&joint, &[0, 2, 1, 3])?)
}

pub fn report(rho: &DensityMatrix) -> Result<EntanglementReport> {
    let c = concurrence(rho)?;
    let (ppt, min_pt_eigenvalue) = is_ppt(rho, (2, 2))?;
    Ok(EntanglementReport {
        concurrence: c,
        eof_bits: eof_from_concurrence(c),
        negativity: negativity(rho, (2, 2))?,
        log_negativity_bits: log_negativity(rho, (2, 2))?,
        ppt,
        min_pt_eigenvalue,
        entangled: c > TOL,
    })
}
