//! Angular-dependence tensor fitting, plus the McConnell and relaxation helpers.
//!
//! Rotation planes are XY, YZ and ZX, with θ measured from the first named
//! axis. In every plane the squared effective value follows
//! K₁ + K₂ cos 2θ + K₃ sin 2θ.

use std::fmt;
use std::str::FromStr;

use nalgebra::{Matrix2, Matrix3, SymmetricEigen, Vector2, Vector3};
use serde::Serialize;

use crate::constants::{BOHR_MAGNETON, PLANCK};
use crate::error::{Error, Result};

/// g = hν₀/(μ_B H)
pub fn field_to_g(nu0: f64, field: f64) -> Result<f64> {
    if !(nu0 > 0.0 && field > 0.0) {
        return Err(Error::Domain("field_to_g needs positive frequency and field".into()));
    }
    Ok(PLANCK * nu0 / (BOHR_MAGNETON * field))
}

/// Resonance field in tesla for a given g.
pub fn g_to_field(nu0: f64, g: f64) -> Result<f64> {
    if !(nu0 > 0.0 && g > 0.0) {
        return Err(Error::Domain("g_to_field needs positive frequency and g".into()));
    }
    Ok(PLANCK * nu0 / (BOHR_MAGNETON * g))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Plane {
    XY,
    YZ,
    ZX,
}

impl Plane {
    pub fn all() -> [Plane; 3] {
        [Plane::XY, Plane::YZ, Plane::ZX]
    }

    /// Unit field direction at angle θ from the plane's first axis.
    pub fn direction(&self, theta: f64) -> Vector3<f64> {
        let (s, c) = theta.sin_cos();
        match self {
            Plane::XY => Vector3::new(c, s, 0.0),
            Plane::YZ => Vector3::new(0.0, c, s),
            Plane::ZX => Vector3::new(s, 0.0, c),
        }
    }
}

impl FromStr for Plane {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "XY" => Ok(Plane::XY),
            "YZ" => Ok(Plane::YZ),
            "ZX" | "XZ" => Ok(Plane::ZX),
            _ => Err(Error::Validation(format!("unknown plane {s:?}"))),
        }
    }
}

impl fmt::Display for Plane {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AngularMeasurement {
    pub plane: Plane,
    /// Radians from the plane's first axis.
    pub theta: f64,
    /// Effective g, or effective A in MHz.
    pub value: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PlaneConstants {
    pub k1: f64,
    pub k2: f64,
    pub k3: f64,
    /// RMS residual of the squared values.
    pub residual_rms: f64,
}

impl PlaneConstants {
    pub fn squared_at(&self, theta: f64) -> f64 {
        self.k1 + self.k2 * (2.0 * theta).cos() + self.k3 * (2.0 * theta).sin()
    }
}

fn distinct_angles_mod_pi(data: &[AngularMeasurement]) -> usize {
    let mut r: Vec<f64> = data.iter().map(|m| m.theta.rem_euclid(std::f64::consts::PI)).collect();
    r.sort_by(f64::total_cmp);
    let mut n = 0;
    let mut last = f64::NAN;
    for v in &r {
        if !(last.is_finite() && (v - last).abs() < 1e-9) {
            n += 1;
        }
        last = *v;
    }
    // 0 and π−δ are the same direction
    if n > 1 && (r[0] + std::f64::consts::PI - r[r.len() - 1]).abs() < 1e-9 {
        n -= 1;
    }
    n
}

/// Linear least squares of value² on [1, cos 2θ, sin 2θ].
pub fn fit_plane_constants(data: &[AngularMeasurement]) -> Result<PlaneConstants> {
    let first = data.first().ok_or_else(|| Error::Fit("no measurements".into()))?;
    if data.iter().any(|m| m.plane != first.plane) {
        return Err(Error::Fit("measurements from more than one plane".into()));
    }
    if data.iter().any(|m| !m.value.is_finite() || !m.theta.is_finite()) {
        return Err(Error::Fit("non-finite measurement".into()));
    }
    if data.len() < 3 || distinct_angles_mod_pi(data) < 3 {
        return Err(Error::Fit("need at least 3 distinct angles modulo π".into()));
    }
    let mut ata = Matrix3::<f64>::zeros();
    let mut aty = Vector3::<f64>::zeros();
    for m in data {
        let row = Vector3::new(1.0, (2.0 * m.theta).cos(), (2.0 * m.theta).sin());
        ata += row * row.transpose();
        aty += row * (m.value * m.value);
    }
    let k = ata
        .cholesky()
        .ok_or_else(|| Error::Fit("rank-deficient angular design".into()))?
        .solve(&aty);
    let pc = PlaneConstants { k1: k[0], k2: k[1], k3: k[2], residual_rms: 0.0 };
    let ss: f64 = data.iter().map(|m| (m.value * m.value - pc.squared_at(m.theta)).powi(2)).sum();
    Ok(PlaneConstants { residual_rms: (ss / data.len() as f64).sqrt(), ..pc })
}

/// Symmetric squared tensor (g² or A²).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymmetricTensor3 {
    m: Matrix3<f64>,
}

impl SymmetricTensor3 {
    pub fn new(xx: f64, yy: f64, zz: f64, xy: f64, yz: f64, zx: f64) -> Self {
        Self { m: Matrix3::new(xx, xy, zx, xy, yy, yz, zx, yz, zz) }
    }

    /// Symmetrises the input.
    pub fn from_matrix(m: Matrix3<f64>) -> Self {
        Self { m: (m + m.transpose()) * 0.5 }
    }

    /// R·diag(p)·Rᵀ
    pub fn from_principal(values_squared: [f64; 3], rotation: &Matrix3<f64>) -> Self {
        Self::from_matrix(rotation * Matrix3::from_diagonal(&Vector3::from(values_squared)) * rotation.transpose())
    }

    pub fn matrix(&self) -> &Matrix3<f64> {
        &self.m
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConsistencyReport {
    /// |estimate₁ − estimate₂| for g_x², g_y², g_z².
    pub discrepancies: [f64; 3],
    pub flagged: [bool; 3],
    pub tolerance: f64,
}

pub const CONSISTENCY_TOL: f64 = 1e-6;

/// Diagonal entries averaged over the two planes that contain each axis.
pub fn assemble_squared_tensor(
    xy: &PlaneConstants,
    yz: &PlaneConstants,
    zx: &PlaneConstants,
) -> (SymmetricTensor3, ConsistencyReport) {
    let pairs = [
        (xy.k1 + xy.k2, zx.k1 - zx.k2),
        (xy.k1 - xy.k2, yz.k1 + yz.k2),
        (yz.k1 - yz.k2, zx.k1 + zx.k2),
    ];
    let d = pairs.map(|(a, b)| 0.5 * (a + b));
    let discrepancies = pairs.map(|(a, b)| (a - b).abs());
    let t = SymmetricTensor3::new(d[0], d[1], d[2], xy.k3, yz.k3, zx.k3);
    let flagged = discrepancies.map(|v| v > CONSISTENCY_TOL);
    (t, ConsistencyReport { discrepancies, flagged, tolerance: CONSISTENCY_TOL })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Quantity {
    G,
    A,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PrincipalSystem {
    /// Ascending.
    pub principal_values: [f64; 3],
    /// Row i holds the direction cosines (l_ix, l_iy, l_iz) of principal value i.
    pub direction_cosines: [[f64; 3]; 3],
    /// Squared-tensor analysis cannot fix the sign of hyperfine values.
    pub sign_unknown: bool,
}

impl PrincipalSystem {
    pub fn rotation(&self) -> Matrix3<f64> {
        let r = self.direction_cosines;
        Matrix3::new(r[0][0], r[0][1], r[0][2], r[1][0], r[1][1], r[1][2], r[2][0], r[2][1], r[2][2])
    }
}

pub fn principal_values(t: &SymmetricTensor3, quantity: Quantity) -> Result<PrincipalSystem> {
    let eig = SymmetricEigen::new(*t.matrix());
    let mut idx = [0usize, 1, 2];
    idx.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let mut values = [0.0; 3];
    let mut rows = [[0.0; 3]; 3];
    for (r, &k) in idx.iter().enumerate() {
        let ev = eig.eigenvalues[k];
        if quantity == Quantity::G && ev < -1e-9 {
            return Err(Error::Data(format!("squared g tensor has negative eigenvalue {ev:e}")));
        }
        values[r] = ev.abs().sqrt();
        let mut v = eig.eigenvectors.column(k).into_owned();
        v /= v.norm();
        if let Some(first) = v.iter().find(|c| c.abs() > 1e-12) {
            if *first < 0.0 {
                v = -v;
            }
        }
        rows[r] = [v[0], v[1], v[2]];
    }
    Ok(PrincipalSystem { principal_values: values, direction_cosines: rows, sign_unknown: quantity == Quantity::A })
}

/// √(nᵀ T² n)
pub fn effective_value(t: &SymmetricTensor3, direction: &Vector3<f64>) -> Result<f64> {
    if (direction.norm() - 1.0).abs() > 1e-9 {
        return Err(Error::Validation(format!("direction norm {} is not 1", direction.norm())));
    }
    let q = (direction.transpose() * t.matrix() * direction)[(0, 0)];
    Ok(q.max(0.0).sqrt())
}

/// Forward model for one plane at the given angles.
pub fn synthesize_plane(t: &SymmetricTensor3, plane: Plane, angles: &[f64]) -> Vec<AngularMeasurement> {
    angles
        .iter()
        .map(|&theta| AngularMeasurement {
            plane,
            theta,
            value: effective_value(t, &plane.direction(theta)).expect("unit direction"),
        })
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct TensorFitResult {
    pub planes: [PlaneConstants; 3],
    pub consistency: ConsistencyReport,
    pub principal: PrincipalSystem,
}

/// Fits each plane, then diagonalises the assembled tensor.
pub fn fit_tensor(data: &[AngularMeasurement], quantity: Quantity) -> Result<TensorFitResult> {
    let fit = |p: Plane| {
        let d: Vec<AngularMeasurement> = data.iter().copied().filter(|m| m.plane == p).collect();
        fit_plane_constants(&d).map_err(|e| Error::Fit(format!("plane {p}: {e}")))
    };
    let planes = [fit(Plane::XY)?, fit(Plane::YZ)?, fit(Plane::ZX)?];
    let (t, consistency) = assemble_squared_tensor(&planes[0], &planes[1], &planes[2]);
    Ok(TensorFitResult { planes, consistency, principal: principal_values(&t, quantity)? })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum McConnellRelation {
    H,
    N,
    PiCH,
}

impl McConnellRelation {
    /// MHz per unit spin density.
    pub fn constant(&self) -> f64 {
        match self {
            McConnellRelation::H => 1426.2,
            McConnellRelation::N => 84.2,
            McConnellRelation::PiCH => -61.8,
        }
    }
}

impl FromStr for McConnellRelation {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().replace(['-', '_'], "").as_str() {
            "H" => Ok(McConnellRelation::H),
            "N" => Ok(McConnellRelation::N),
            "PICH" => Ok(McConnellRelation::PiCH),
            _ => Err(Error::Validation(format!("unknown McConnell relation {s:?}"))),
        }
    }
}

pub fn mcconnell_spin_density(a: f64, relation: McConnellRelation) -> Result<f64> {
    if !a.is_finite() {
        return Err(Error::Validation("hyperfine constant must be finite".into()));
    }
    Ok(a / relation.constant())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RelaxationFit {
    /// T₁ or T₂ in seconds.
    pub time_constant: f64,
    pub amplitude: f64,
    pub residual_rms: f64,
    pub iterations: usize,
}

const MAX_ITER: usize = 200;
const STEP_TOL: f64 = 1e-10;

fn rms<F: Fn(f64) -> f64>(data: &[(f64, f64)], model: F) -> f64 {
    (data.iter().map(|&(t, y)| (y - model(t)).powi(2)).sum::<f64>() / data.len() as f64).sqrt()
}

/// Saturation recovery m(t) = m₀(1 − e^{−t/T₁}) by Levenberg-Marquardt.
pub fn fit_t1(data: &[(f64, f64)]) -> Result<RelaxationFit> {
    if data.len() < 4 {
        return Err(Error::Fit("T1 fit needs at least 4 points".into()));
    }
    if data.iter().any(|&(t, m)| t < 0.0 || !t.is_finite() || !m.is_finite()) {
        return Err(Error::Fit("T1 data must have finite values and t >= 0".into()));
    }
    let mut pts = data.to_vec();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    let m_max = pts.iter().map(|p| p.1).fold(f64::MIN, f64::max);
    let m_min = pts.iter().map(|p| p.1).fold(f64::MAX, f64::min);
    let early = pts[0].1;
    let late = pts[pts.len() - 1].1;
    if !(m_max > 0.0) || (m_max - m_min) <= 1e-9 * m_max.abs() || late <= early {
        return Err(Error::Fit("data show no recovery signature".into()));
    }
    let t_half = pts.iter().find(|p| p.1 >= 0.5 * m_max).map(|p| p.0).unwrap_or(pts[pts.len() / 2].0);
    let t_span = pts[pts.len() - 1].0.max(f64::MIN_POSITIVE);
    let mut p = Vector2::new(m_max, if t_half > 0.0 { t_half / std::f64::consts::LN_2 } else { t_span / 4.0 });
    let sse = |p: &Vector2<f64>| -> f64 { pts.iter().map(|&(t, y)| (y - p[0] * (1.0 - (-t / p[1]).exp())).powi(2)).sum() };
    let mut lambda = 1e-3;
    let mut cost = sse(&p);
    for it in 1..=MAX_ITER {
        let mut jtj = Matrix2::<f64>::zeros();
        let mut jtr = Vector2::<f64>::zeros();
        for &(t, y) in &pts {
            let e = (-t / p[1]).exp();
            let r = y - p[0] * (1.0 - e);
            let j = Vector2::new(1.0 - e, -p[0] * t * e / (p[1] * p[1]));
            jtj += j * j.transpose();
            jtr += j * r;
        }
        let mut accepted = None;
        for _ in 0..60 {
            let damped = jtj + Matrix2::from_diagonal(&jtj.diagonal()) * lambda;
            let Some(step) = damped.lu().solve(&jtr) else { lambda *= 10.0; continue };
            let trial = p + step;
            if trial[1] > 0.0 {
                let c = sse(&trial);
                if c <= cost {
                    accepted = Some((trial, step, c));
                    break;
                }
            }
            lambda *= 10.0;
        }
        let Some((trial, step, c)) = accepted else {
            // no downhill step exists: the gradient vanishes to rounding
            return finish_t1(&pts, p, it);
        };
        p = trial;
        cost = c;
        lambda = (lambda / 10.0).max(1e-12);
        if (step[0] / p[0]).abs() < STEP_TOL && (step[1] / p[1]).abs() < STEP_TOL {
            return finish_t1(&pts, p, it);
        }
    }
    Err(Error::Fit(format!(
        "T1 fit did not converge in {MAX_ITER} iterations (m0 = {}, T1 = {} s, sse = {cost:e})",
        p[0], p[1]
    )))
}

fn finish_t1(pts: &[(f64, f64)], p: Vector2<f64>, iterations: usize) -> Result<RelaxationFit> {
    if !(p[1] > 0.0 && p[1].is_finite()) {
        return Err(Error::Fit(format!("T1 estimate {} is not positive", p[1])));
    }
    Ok(RelaxationFit {
        time_constant: p[1],
        amplitude: p[0],
        residual_rms: rms(pts, |t| p[0] * (1.0 - (-t / p[1]).exp())),
        iterations,
    })
}

/// Two-pulse echo decay A·e^{−2τ/T₂}: log-linear fit over positive echoes
/// followed by one Gauss-Newton polish step.
pub fn fit_t2(data: &[(f64, f64)]) -> Result<RelaxationFit> {
    let pos: Vec<(f64, f64)> = data.iter().copied().filter(|&(t, y)| y > 0.0 && t.is_finite() && y.is_finite()).collect();
    if pos.len() < 2 {
        return Err(Error::Fit("T2 fit needs at least 2 positive echoes".into()));
    }
    let n = pos.len() as f64;
    let mt = pos.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pos.iter().map(|p| p.1.ln()).sum::<f64>() / n;
    let stt: f64 = pos.iter().map(|p| (p.0 - mt).powi(2)).sum();
    if stt <= 0.0 {
        return Err(Error::Fit("T2 fit needs distinct delays".into()));
    }
    let slope = pos.iter().map(|p| (p.0 - mt) * (p.1.ln() - my)).sum::<f64>() / stt;
    if slope >= 0.0 {
        return Err(Error::Fit("echo does not decay".into()));
    }
    let mut a = (my - slope * mt).exp();
    let mut t2 = -2.0 / slope;
    let sse = |a: f64, t2: f64| -> f64 { pos.iter().map(|&(t, y)| (y - a * (-2.0 * t / t2).exp()).powi(2)).sum() };
    // polish on the linear-scale residuals
    let mut jtj = Matrix2::<f64>::zeros();
    let mut jtr = Vector2::<f64>::zeros();
    for &(t, y) in &pos {
        let e = (-2.0 * t / t2).exp();
        let j = Vector2::new(e, a * e * 2.0 * t / (t2 * t2));
        jtj += j * j.transpose();
        jtr += j * (y - a * e);
    }
    if let Some(step) = jtj.lu().solve(&jtr) {
        let (na, nt) = (a + step[0], t2 + step[1]);
        if nt > 0.0 && na > 0.0 && sse(na, nt) < sse(a, t2) {
            a = na;
            t2 = nt;
        }
    }
    Ok(RelaxationFit { time_constant: t2, amplitude: a, residual_rms: rms(&pos, |t| a * (-2.0 * t / t2).exp()), iterations: 1 })
}
