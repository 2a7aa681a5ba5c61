#![allow(dead_code)]

use nalgebra::{Matrix3, Vector3};
use num_complex::Complex64;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use rand_distr::StandardNormal;
use spinpair::{CMatrix, CVector, DensityMatrix, PureState};

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

fn gauss_c(r: &mut StdRng) -> Complex64 {
    Complex64::new(r.sample(StandardNormal), r.sample(StandardNormal))
}

pub fn ginibre(r: &mut StdRng, rows: usize, cols: usize) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| gauss_c(r))
}

/// Haar unitary from the QR of a Ginibre matrix with the phase fix on R.
pub fn random_unitary(r: &mut StdRng, dim: usize) -> CMatrix {
    let qr = ginibre(r, dim, dim).qr();
    let (q, rr) = (qr.q(), qr.r());
    let phases = CMatrix::from_diagonal(&CVector::from_fn(dim, |i, _| {
        let d = rr[(i, i)];
        if d.norm() > 0.0 { d / d.norm() } else { Complex64::new(1.0, 0.0) }
    }));
    q * phases
}

pub fn random_pure(r: &mut StdRng, dim: usize) -> PureState {
    PureState::normalized(CVector::from_fn(dim, |_, _| gauss_c(r))).unwrap()
}

/// Mixed state G G† / tr, full rank with probability one.
pub fn random_density(r: &mut StdRng, dim: usize) -> DensityMatrix {
    let g = ginibre(r, dim, dim);
    let m = &g * g.adjoint();
    let tr = m.trace();
    DensityMatrix::new(m / tr).unwrap()
}

pub fn random_rotation(r: &mut StdRng) -> Matrix3<f64> {
    let m = Matrix3::from_fn(|_, _| r.sample::<f64, _>(StandardNormal));
    let q = m.qr().q();
    if q.determinant() < 0.0 { -q } else { q }
}

pub fn unit(v: Vector3<f64>) -> Vector3<f64> {
    v / v.norm()
}

pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
}
