//! Dense complex states and operators on small 2ⁿ-dimensional spaces.
//!
//! Subsystem A is always the leftmost tensor factor, i.e. the slowest-varying
//! index. For the electron-nuclear pair the electron comes first, so level 1 is
//! |00⟩, level 2 is |01⟩, level 3 is |10⟩ and level 4 is |11⟩.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

/// Default tolerance for invariant checks.
pub const TOL: f64 = 1e-9;
/// Largest supported Hilbert-space dimension.
pub const MAX_DIM: usize = 16;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn cr(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// Which factor of a bipartite split.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subsystem {
    A,
    B,
}

fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// max |m_ij - conj(m_ji)|
pub fn hermiticity_error(m: &CMatrix) -> f64 {
    max_abs(&(m - m.adjoint()))
}

pub fn is_unitary(m: &CMatrix, tol: f64) -> bool {
    m.is_square() && max_abs(&(m.adjoint() * m - CMatrix::identity(m.nrows(), m.ncols()))) <= tol
}

/// Eigen-decomposition of a Hermitian matrix, eigenvalues ascending.
pub fn hermitian_eigen(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    let h = (m + m.adjoint()) * cr(0.5);
    let eig = SymmetricEigen::new(h);
    let n = eig.eigenvalues.len();
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let vals = idx.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vecs = CMatrix::from_fn(n, n, |r, col| eig.eigenvectors[(r, idx[col])]);
    (vals, vecs)
}

pub fn hermitian_eigenvalues(m: &CMatrix) -> Vec<f64> {
    hermitian_eigen(m).0
}

/// Square root of a positive semidefinite Hermitian matrix; negative
/// eigenvalues are clipped to zero first.
pub fn sqrtm_psd(m: &CMatrix) -> CMatrix {
    let (vals, vecs) = hermitian_eigen(m);
    let d = CMatrix::from_diagonal(&CVector::from_iterator(
        vals.len(),
        vals.iter().map(|&v| cr(v.max(0.0).sqrt())),
    ));
    &vecs * d * vecs.adjoint()
}

/// ‖A‖₁ = tr√(A†A)
pub fn trace_norm(m: &CMatrix) -> f64 {
    let ata = m.adjoint() * m;
    hermitian_eigenvalues(&ata).iter().map(|v| v.max(0.0).sqrt()).sum()
}

fn check_dim(dim: usize) -> Result<()> {
    if dim == 0 || dim > MAX_DIM {
        return Err(Error::Dimension(format!("dimension {dim} outside 1..={MAX_DIM}")));
    }
    Ok(())
}

fn check_cut(dim: usize, dims: (usize, usize)) -> Result<()> {
    if dims.0 == 0 || dims.1 == 0 || dims.0 * dims.1 != dim {
        return Err(Error::Dimension(format!(
            "dimension {dim} does not factor as {}x{}",
            dims.0, dims.1
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    amps: CVector,
}

impl PureState {
    /// Requires unit norm within [`TOL`].
    pub fn new(amps: CVector) -> Result<Self> {
        check_dim(amps.len())?;
        let n2 = amps.norm_squared();
        if (n2 - 1.0).abs() > TOL {
            return Err(Error::Validation(format!("state norm² {n2} differs from 1")));
        }
        Ok(Self { amps })
    }

    /// Scales to unit norm; rejects the zero vector.
    pub fn normalized(amps: CVector) -> Result<Self> {
        check_dim(amps.len())?;
        let n = amps.norm();
        if n < 1e-300 || !n.is_finite() {
            return Err(Error::Validation("cannot normalize a zero or non-finite vector".into()));
        }
        Ok(Self { amps: amps.unscale(n) })
    }

    pub fn from_slice(amps: &[Complex64]) -> Result<Self> {
        Self::new(CVector::from_column_slice(amps))
    }

    pub fn basis(dim: usize, k: usize) -> Result<Self> {
        check_dim(dim)?;
        if k >= dim {
            return Err(Error::Dimension(format!("basis index {k} out of range for dim {dim}")));
        }
        let mut v = CVector::zeros(dim);
        v[k] = cr(1.0);
        Ok(Self { amps: v })
    }

    /// Bell state |β_zx⟩ = (|0,x⟩ + (−1)^z |1,x̄⟩)/√2.
    pub fn bell(z: u8, x: u8) -> Self {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let mut v = CVector::zeros(4);
        let x = (x & 1) as usize;
        v[x] = cr(s);
        v[2 + (1 - x)] = cr(if z & 1 == 1 { -s } else { s });
        Self { amps: v }
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amps
    }

    pub fn inner(&self, other: &PureState) -> Complex64 {
        self.amps.dotc(&other.amps)
    }

    /// Equality up to a global phase.
    pub fn eq_up_to_phase(&self, other: &PureState, tol: f64) -> bool {
        self.dim() == other.dim() && (self.inner(other).norm() - 1.0).abs() <= tol
    }

    pub fn to_density(&self) -> DensityMatrix {
        DensityMatrix { m: &self.amps * self.amps.adjoint() }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    m: CMatrix,
}

impl DensityMatrix {
    /// Validates the density-matrix invariants. Eigenvalues in [−1e−9, 0) are
    /// clipped to zero followed by trace renormalisation; anything more
    /// negative is rejected.
    pub fn new(m: CMatrix) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::Dimension("density matrix must be square".into()));
        }
        check_dim(m.nrows())?;
        let herr = hermiticity_error(&m);
        if herr > TOL {
            return Err(Error::Validation(format!("not Hermitian (error {herr:e})")));
        }
        let tr = m.trace();
        if (tr.re - 1.0).abs() > TOL || tr.im.abs() > TOL {
            return Err(Error::Validation(format!("trace {tr} differs from 1")));
        }
        let (vals, vecs) = hermitian_eigen(&m);
        let min = vals[0];
        if min < -TOL {
            return Err(Error::Validation(format!("negative eigenvalue {min:e}")));
        }
        if min < 0.0 {
            let clipped: Vec<f64> = vals.iter().map(|v| v.max(0.0)).collect();
            let s: f64 = clipped.iter().sum();
            let d = CMatrix::from_diagonal(&CVector::from_iterator(
                clipped.len(),
                clipped.iter().map(|v| cr(v / s)),
            ));
            return Ok(Self { m: &vecs * d * vecs.adjoint() });
        }
        Ok(Self { m: (&m + m.adjoint()) * cr(0.5) })
    }

    pub fn from_diagonal(p: &[f64]) -> Result<Self> {
        let v = CVector::from_iterator(p.len(), p.iter().map(|&x| cr(x)));
        Self::new(CMatrix::from_diagonal(&v))
    }

    pub fn maximally_mixed(dim: usize) -> Result<Self> {
        check_dim(dim)?;
        Ok(Self { m: CMatrix::identity(dim, dim) * cr(1.0 / dim as f64) })
    }

    /// Convex mixture Σ wₖ ρₖ.
    pub fn mixture(parts: &[(f64, &DensityMatrix)]) -> Result<Self> {
        let first = parts.first().ok_or_else(|| Error::Validation("empty mixture".into()))?;
        let mut acc = CMatrix::zeros(first.1.dim(), first.1.dim());
        for (w, r) in parts {
            if r.dim() != first.1.dim() {
                return Err(Error::Dimension("mixture of unequal dimensions".into()));
            }
            acc += r.matrix() * cr(*w);
        }
        Self::new(acc)
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.m
    }

    pub fn populations(&self) -> Vec<f64> {
        self.m.diagonal().iter().map(|z| z.re).collect()
    }

    /// Ascending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        hermitian_eigenvalues(&self.m)
    }

    pub fn purity(&self) -> f64 {
        (&self.m * &self.m).trace().re
    }

    /// tr(ρ·O), real part.
    pub fn expectation(&self, op: &CMatrix) -> f64 {
        (&self.m * op).trace().re
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Operator {
    m: CMatrix,
    hermitian: bool,
}

impl Operator {
    pub fn new(m: CMatrix) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::Dimension("operator must be square".into()));
        }
        check_dim(m.nrows())?;
        let hermitian = hermiticity_error(&m) <= TOL;
        Ok(Self { m, hermitian })
    }

    pub fn identity(dim: usize) -> Self {
        Self { m: CMatrix::identity(dim, dim), hermitian: true }
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.m
    }

    pub fn into_matrix(self) -> CMatrix {
        self.m
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermitian
    }

    pub fn is_unitary(&self) -> bool {
        is_unitary(&self.m, TOL)
    }

    pub fn adjoint(&self) -> Self {
        Self { m: self.m.adjoint(), hermitian: self.hermitian }
    }

    pub fn mul(&self, rhs: &Operator) -> Operator {
        let m = &self.m * &rhs.m;
        let hermitian = hermiticity_error(&m) <= TOL;
        Operator { m, hermitian }
    }

    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        if !self.hermitian {
            return Err(Error::Validation("eigenvalues requested for non-Hermitian operator".into()));
        }
        Ok(hermitian_eigenvalues(&self.m))
    }
}

/// Kronecker composition, first operand is the slower index.
pub trait TensorProduct: Sized {
    fn tensor(&self, other: &Self) -> Result<Self>;
}

impl TensorProduct for PureState {
    fn tensor(&self, other: &Self) -> Result<Self> {
        check_dim(self.dim() * other.dim())?;
        Ok(PureState { amps: self.amps.kronecker(&other.amps) })
    }
}

impl TensorProduct for DensityMatrix {
    fn tensor(&self, other: &Self) -> Result<Self> {
        check_dim(self.dim() * other.dim())?;
        Ok(DensityMatrix { m: self.m.kronecker(&other.m) })
    }
}

impl TensorProduct for Operator {
    fn tensor(&self, other: &Self) -> Result<Self> {
        check_dim(self.dim() * other.dim())?;
        Ok(Operator { m: self.m.kronecker(&other.m), hermitian: self.hermitian && other.hermitian })
    }
}

pub fn tensor_product<T: TensorProduct>(a: &T, b: &T) -> Result<T> {
    a.tensor(b)
}

/// Trace out one factor of a (d_A, d_B) split, keeping `keep`.
pub fn partial_trace(rho: &DensityMatrix, dims: (usize, usize), keep: Subsystem) -> Result<DensityMatrix> {
    check_cut(rho.dim(), dims)?;
    let (da, db) = dims;
    let m = rho.matrix();
    let out = match keep {
        Subsystem::A => CMatrix::from_fn(da, da, |i, j| (0..db).map(|k| m[(i * db + k, j * db + k)]).sum()),
        Subsystem::B => CMatrix::from_fn(db, db, |i, j| (0..da).map(|k| m[(k * db + i, k * db + j)]).sum()),
    };
    Ok(DensityMatrix { m: out })
}

/// ρ^{T_B}_{mμ,nν} = ρ_{mν,nμ} (or the analogue over A).
pub fn partial_transpose(rho: &CMatrix, dims: (usize, usize), over: Subsystem) -> Result<Operator> {
    if !rho.is_square() {
        return Err(Error::Dimension("partial transpose needs a square matrix".into()));
    }
    check_cut(rho.nrows(), dims)?;
    let (da, db) = dims;
    let n = da * db;
    let out = CMatrix::from_fn(n, n, |r, col| {
        let (m, mu) = (r / db, r % db);
        let (nn, nu) = (col / db, col % db);
        match over {
            Subsystem::B => rho[(m * db + nu, nn * db + mu)],
            Subsystem::A => rho[(nn * db + mu, m * db + nu)],
        }
    });
    Operator::new(out)
}

#[derive(Debug, Clone)]
pub struct SchmidtTerm {
    pub lambda: f64,
    pub a: PureState,
    pub b: PureState,
}

/// Schmidt decomposition via SVD of the d_A×d_B amplitude matrix.
pub fn schmidt_decompose(psi: &PureState, dims: (usize, usize)) -> Result<Vec<SchmidtTerm>> {
    check_cut(psi.dim(), dims)?;
    let (da, db) = dims;
    let a = psi.amplitudes();
    let m = CMatrix::from_fn(da, db, |i, j| a[i * db + j]);
    let svd = m.svd(true, true);
    let u = svd.u.ok_or_else(|| Error::Validation("SVD failed".into()))?;
    let vt = svd.v_t.ok_or_else(|| Error::Validation("SVD failed".into()))?;
    let mut idx: Vec<usize> = (0..svd.singular_values.len()).collect();
    idx.sort_by(|&x, &y| svd.singular_values[y].total_cmp(&svd.singular_values[x]));
    let mut out = Vec::with_capacity(idx.len());
    for k in idx {
        let ua = CVector::from_fn(da, |i, _| u[(i, k)]);
        let vb = CVector::from_fn(db, |j, _| vt[(k, j)]);
        out.push(SchmidtTerm {
            lambda: svd.singular_values[k],
            a: PureState::normalized(ua)?,
            b: PureState::normalized(vb)?,
        });
    }
    Ok(out)
}

/// Number of Schmidt coefficients above 1e−10.
pub fn schmidt_rank(terms: &[SchmidtTerm]) -> usize {
    terms.iter().filter(|t| t.lambda > 1e-10).count()
}

/// −Σ p log₂ p with 0·log 0 = 0.
pub fn shannon_bits(p: &[f64]) -> f64 {
    // abs() folds the −0 of a certain outcome to 0
    p.iter().filter(|&&x| x > 0.0).map(|&x| -x * x.log2()).sum::<f64>().abs()
}

pub fn von_neumann_entropy(rho: &DensityMatrix) -> f64 {
    shannon_bits(&rho.eigenvalues()).max(0.0)
}

/// tr√(√a·b·√a), clamped into [0,1].
pub fn fidelity(a: &DensityMatrix, b: &DensityMatrix) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::Dimension("fidelity of unequal dimensions".into()));
    }
    let sa = sqrtm_psd(a.matrix());
    let inner = &sa * b.matrix() * &sa;
    let f: f64 = hermitian_eigenvalues(&inner).iter().map(|v| v.max(0.0).sqrt()).sum();
    Ok(f.clamp(0.0, 1.0))
}

/// √⟨ψ|ρ|ψ⟩
pub fn fidelity_pure(psi: &PureState, rho: &DensityMatrix) -> Result<f64> {
    if psi.dim() != rho.dim() {
        return Err(Error::Dimension("fidelity of unequal dimensions".into()));
    }
    let v = psi.amplitudes();
    let e = (v.adjoint() * rho.matrix() * v)[(0, 0)].re;
    Ok(e.max(0.0).sqrt().min(1.0))
}

/// States that evolve under a unitary.
pub trait Evolve: Sized {
    fn dim(&self) -> usize;
    fn conjugate_by(&self, u: &CMatrix) -> Self;
}

impl Evolve for PureState {
    fn dim(&self) -> usize {
        self.amps.len()
    }
    fn conjugate_by(&self, u: &CMatrix) -> Self {
        PureState { amps: u * &self.amps }
    }
}

impl Evolve for DensityMatrix {
    fn dim(&self) -> usize {
        self.m.nrows()
    }
    fn conjugate_by(&self, u: &CMatrix) -> Self {
        let m = u * &self.m * u.adjoint();
        DensityMatrix { m: (&m + m.adjoint()) * cr(0.5) }
    }
}

/// |ψ⟩ → U|ψ⟩ or ρ → UρU†.
pub fn apply_unitary<S: Evolve>(state: &S, u: &Operator) -> Result<S> {
    if state.dim() != u.dim() {
        return Err(Error::Dimension(format!("state dim {} vs operator dim {}", state.dim(), u.dim())));
    }
    if !u.is_unitary() {
        return Err(Error::Validation("operator is not unitary".into()));
    }
    Ok(state.conjugate_by(u.matrix()))
}

#[derive(Debug, Clone)]
pub struct Outcome {
    pub probability: f64,
    /// `None` when the outcome has zero probability.
    pub post_state: Option<DensityMatrix>,
}

/// Generalised measurement with Kraus operators M_m.
pub fn measure(rho: &DensityMatrix, ops: &[Operator]) -> Result<Vec<Outcome>> {
    if ops.is_empty() {
        return Err(Error::Validation("empty measurement set".into()));
    }
    let d = rho.dim();
    let mut completeness = CMatrix::zeros(d, d);
    for op in ops {
        if op.dim() != d {
            return Err(Error::Dimension("measurement operator dimension mismatch".into()));
        }
        completeness += op.matrix().adjoint() * op.matrix();
    }
    if max_abs(&(completeness - CMatrix::identity(d, d))) > TOL {
        return Err(Error::Validation("measurement operators are not complete".into()));
    }
    Ok(ops
        .iter()
        .map(|op| {
            let k = op.matrix() * rho.matrix() * op.matrix().adjoint();
            let p = k.trace().re.max(0.0);
            let post_state = (p > 1e-15).then(|| {
                let m = k * cr(1.0 / p);
                DensityMatrix { m: (&m + m.adjoint()) * cr(0.5) }
            });
            Outcome { probability: p, post_state }
        })
        .collect())
}

/// Reorders qubit factors: output factor k is input factor `perm[k]`.
pub fn permute_qubits(m: &CMatrix, perm: &[usize]) -> Result<CMatrix> {
    let n = perm.len();
    if m.nrows() != 1 << n || !m.is_square() {
        return Err(Error::Dimension(format!("matrix of dim {} is not {n} qubits", m.nrows())));
    }
    let mut seen = vec![false; n];
    for &p in perm {
        if p >= n || std::mem::replace(&mut seen[p], true) {
            return Err(Error::Validation(format!("{perm:?} is not a permutation")));
        }
    }
    let map = |idx: usize| -> usize {
        // bit for factor k sits at position n-1-k
        (0..n).fold(0, |acc, k| acc | (((idx >> (n - 1 - perm[k])) & 1) << (n - 1 - k)))
    };
    let dim = 1 << n;
    let mut out = CMatrix::zeros(dim, dim);
    for r in 0..dim {
        for c in 0..dim {
            out[(map(r), map(c))] = m[(r, c)];
        }
    }
    Ok(out)
}

/// Projectors onto the computational basis.
pub fn computational_projectors(dim: usize) -> Vec<Operator> {
    (0..dim)
        .map(|k| {
            let mut m = CMatrix::zeros(dim, dim);
            m[(k, k)] = cr(1.0);
            Operator { m, hermitian: true }
        })
        .collect()
}

/// Exchange format: `{"dim": n, "re": [[..]], "im": [[..]]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MatrixJson {
    pub dim: usize,
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
}

/// Exchange format: `{"dim": n, "re": [..], "im": [..]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VectorJson {
    pub dim: usize,
    pub re: Vec<f64>,
    pub im: Vec<f64>,
}

/// Either exchange shape; pure states are detected by flat arrays.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum StateJson {
    Matrix(MatrixJson),
    Vector(VectorJson),
}

impl MatrixJson {
    pub fn from_matrix(m: &CMatrix) -> Self {
        let n = m.nrows();
        Self {
            dim: n,
            re: (0..n).map(|i| (0..n).map(|j| m[(i, j)].re).collect()).collect(),
            im: (0..n).map(|i| (0..n).map(|j| m[(i, j)].im).collect()).collect(),
        }
    }

    pub fn to_matrix(&self) -> Result<CMatrix> {
        let n = self.dim;
        let ok = self.re.len() == n
            && self.im.len() == n
            && self.re.iter().chain(self.im.iter()).all(|row| row.len() == n);
        if !ok {
            return Err(Error::Dimension(format!("matrix JSON rows do not match dim {n}")));
        }
        Ok(CMatrix::from_fn(n, n, |i, j| c(self.re[i][j], self.im[i][j])))
    }
}

impl VectorJson {
    pub fn from_state(psi: &PureState) -> Self {
        let a = psi.amplitudes();
        Self { dim: a.len(), re: a.iter().map(|z| z.re).collect(), im: a.iter().map(|z| z.im).collect() }
    }

    pub fn to_vector(&self) -> Result<CVector> {
        if self.re.len() != self.dim || self.im.len() != self.dim {
            return Err(Error::Dimension(format!("vector JSON length does not match dim {}", self.dim)));
        }
        Ok(CVector::from_fn(self.dim, |i, _| c(self.re[i], self.im[i])))
    }
}

impl StateJson {
    /// Density matrix for either shape.
    pub fn to_density(&self) -> Result<DensityMatrix> {
        match self {
            StateJson::Matrix(m) => DensityMatrix::new(m.to_matrix()?),
            StateJson::Vector(v) => Ok(PureState::new(v.to_vector()?)?.to_density()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn basis_composition() {
        let z = PureState::basis(2, 0).unwrap();
        let zz = tensor_product(&z, &z).unwrap();
        assert_eq!(zz, PureState::basis(4, 0).unwrap());
    }

    #[test]
    fn product_of_diagonals() {
        let (p, q, p2, q2) = (0.7, 0.3, 0.6, 0.4);
        let a = DensityMatrix::from_diagonal(&[p, q]).unwrap();
        let b = DensityMatrix::from_diagonal(&[p2, q2]).unwrap();
        let ab = tensor_product(&a, &b).unwrap();
        let want = [p * p2, p * q2, q * p2, q * q2];
        for (got, w) in ab.populations().iter().zip(want) {
            assert_abs_diff_eq!(*got, w, epsilon = 1e-15);
        }
    }

    #[test]
    fn bell_reduced_state_is_mixed() {
        let rho = PureState::bell(0, 0).to_density();
        let ra = partial_trace(&rho, (2, 2), Subsystem::A).unwrap();
        assert_abs_diff_eq!(ra.matrix()[(0, 0)].re, 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(ra.matrix()[(0, 1)].norm(), 0.0, epsilon = 1e-15);
        let ghz = DensityMatrix::from_diagonal(&[0.5, 0.0, 0.0, 0.5]).unwrap();
        let ga = partial_trace(&ghz, (2, 2), Subsystem::A).unwrap();
        assert_eq!(ga.populations(), vec![0.5, 0.5]);
    }

    #[test]
    fn bell_partial_transpose_spectrum() {
        let rho = PureState::bell(0, 0).to_density();
        let pt = partial_transpose(rho.matrix(), (2, 2), Subsystem::B).unwrap();
        let ev = pt.eigenvalues().unwrap();
        let want = [-0.5, 0.5, 0.5, 0.5];
        for (g, w) in ev.iter().zip(want) {
            assert_abs_diff_eq!(*g, w, epsilon = 1e-12);
        }
    }

    #[test]
    fn schmidt_of_bell_and_product() {
        let t = schmidt_decompose(&PureState::bell(0, 0), (2, 2)).unwrap();
        assert_eq!(schmidt_rank(&t), 2);
        assert_abs_diff_eq!(t[0].lambda, std::f64::consts::FRAC_1_SQRT_2, epsilon = 1e-12);
        let t = schmidt_decompose(&PureState::basis(4, 0).unwrap(), (2, 2)).unwrap();
        assert_eq!(schmidt_rank(&t), 1);
    }

    #[test]
    fn entropy_values() {
        let mixed = DensityMatrix::maximally_mixed(4).unwrap();
        assert_abs_diff_eq!(von_neumann_entropy(&mixed), 2.0, epsilon = 1e-12);
        let r = DensityMatrix::from_diagonal(&[0.9, 0.1]).unwrap();
        // independent evaluation of −Σ p ln p / ln 2
        let want = -(0.9f64 * 0.9f64.ln() + 0.1 * 0.1f64.ln()) / std::f64::consts::LN_2;
        assert_abs_diff_eq!(von_neumann_entropy(&r), want, epsilon = 1e-12);
        assert_abs_diff_eq!(want, 0.4690, epsilon = 1e-4);
    }

    #[test]
    fn fidelity_bell_vs_mixed() {
        let b = PureState::bell(0, 0);
        let m = DensityMatrix::maximally_mixed(4).unwrap();
        assert_abs_diff_eq!(fidelity(&b.to_density(), &m).unwrap(), 0.5, epsilon = 1e-9);
        assert_abs_diff_eq!(fidelity_pure(&b, &m).unwrap(), 0.5, epsilon = 1e-12);
    }

    #[test]
    fn repair_and_reject() {
        let tiny = DensityMatrix::from_diagonal(&[1.0 + 5e-10, -5e-10]).unwrap();
        assert!(tiny.eigenvalues()[0] >= 0.0);
        assert!(DensityMatrix::from_diagonal(&[1.1, -0.1]).is_err());
        assert!(DensityMatrix::from_diagonal(&[0.5, 0.4]).is_err());
    }

    #[test]
    fn non_unitary_is_rejected() {
        let u = Operator::new(CMatrix::identity(2, 2) * cr(2.0)).unwrap();
        assert!(apply_unitary(&PureState::basis(2, 0).unwrap(), &u).is_err());
    }

    #[test]
    fn json_roundtrip() {
        let rho = PureState::bell(1, 0).to_density();
        let j = MatrixJson::from_matrix(rho.matrix());
        let back = StateJson::Matrix(j).to_density().unwrap();
        let diff = back.matrix() - rho.matrix();
        assert!(diff.iter().all(|z| z.norm() < 1e-12));
    }
}
