//! Superdense coding with ideal and thermally mixed spin pairs.
//!
//! The nuclear spin I is the first qubit and the electron S the second; Bob
//! encodes on I. Bell states are |β_zx⟩ = (|0,x⟩ + (−1)^z |1,x̄⟩)/√2.

use std::f64::consts::{FRAC_1_SQRT_2, LN_10, PI};

use num_complex::Complex64;
use serde::Serialize;

use crate::constants::{BOLTZMANN, HBAR, MU0};
use crate::error::{Error, Result};
use crate::pulse_engine::{gate, GateName, Wiring};
use crate::quantum_state::{cr, CMatrix, DensityMatrix, Evolve, Operator, PureState};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SdcMessage {
    pub z: u8,
    pub x: u8,
}

impl SdcMessage {
    pub fn new(z: u8, x: u8) -> Result<Self> {
        if z > 1 || x > 1 {
            return Err(Error::Validation(format!("message bits must be 0 or 1, got ({z},{x})")));
        }
        Ok(Self { z, x })
    }

    pub fn all() -> [SdcMessage; 4] {
        [(0, 0), (0, 1), (1, 0), (1, 1)].map(|(z, x)| SdcMessage { z, x })
    }

    /// Bell index 2z + x.
    pub fn index(&self) -> usize {
        2 * self.z as usize + self.x as usize
    }
}

fn g(name: GateName, wiring: Wiring) -> CMatrix {
    gate(name, wiring).expect("fixed valid wiring").into_matrix()
}

/// CNOT · (H ⊗ I): |ab⟩ → |β_ab⟩.
pub fn u_ent() -> CMatrix {
    g(GateName::Cnot, Wiring::Controlled { control: 0, target: 1 }) * g(GateName::H, Wiring::On(0))
}

/// Z^z X^x on the first qubit.
pub fn u_zx(msg: SdcMessage) -> CMatrix {
    let mut u = CMatrix::identity(4, 4);
    if msg.x == 1 {
        u = g(GateName::X, Wiring::On(0)) * u;
    }
    if msg.z == 1 {
        u = g(GateName::Z, Wiring::On(0)) * u;
    }
    u
}

/// (H ⊗ I) · CNOT, the Bell-basis decoder.
pub fn u_bell() -> CMatrix {
    g(GateName::H, Wiring::On(0)) * g(GateName::Cnot, Wiring::Controlled { control: 0, target: 1 })
}

fn pauli2(a: GateName, b: GateName) -> CMatrix {
    let one = |n: GateName| gate(n, Wiring::On(1)).expect("valid").into_matrix();
    let first = gate(a, Wiring::On(0)).expect("valid").into_matrix();
    first * one(b)
}

pub fn zi() -> CMatrix {
    gate(GateName::Z, Wiring::On(0)).expect("valid").into_matrix()
}

pub fn iz() -> CMatrix {
    gate(GateName::Z, Wiring::On(1)).expect("valid").into_matrix()
}

/// Protocol on |00⟩; the bits are read from the signs of ⟨Z⊗I⟩ and ⟨I⊗Z⟩.
pub fn ideal_sdc(msg: SdcMessage) -> (u8, u8) {
    let psi = PureState::basis(4, 0).expect("dim 4");
    let out = psi.conjugate_by(&(u_bell() * u_zx(msg) * u_ent())).to_density();
    let bit = |e: f64| u8::from(e < 0.0);
    (bit(out.expectation(&zi())), bit(out.expectation(&iz())))
}

#[derive(Debug, Clone)]
pub struct SdcStates {
    pub rho1: DensityMatrix,
    pub rho2: DensityMatrix,
    pub rho3: DensityMatrix,
}

fn check_p(name: &str, p: f64) -> Result<()> {
    if !(0.5..=1.0).contains(&p) {
        return Err(Error::Domain(format!("{name} = {p} outside [1/2, 1]")));
    }
    Ok(())
}

/// States after each protocol stage for the thermal input
/// diag(p_I, q_I) ⊗ diag(p_S, q_S).
pub fn mixed_sdc_states(p_i: f64, p_s: f64, msg: SdcMessage) -> Result<SdcStates> {
    check_p("p_I", p_i)?;
    check_p("p_S", p_s)?;
    let rho0 = DensityMatrix::from_diagonal(&[p_i * p_s, p_i * (1.0 - p_s), (1.0 - p_i) * p_s, (1.0 - p_i) * (1.0 - p_s)])?;
    let rho1 = rho0.conjugate_by(&u_ent());
    let rho2 = rho1.conjugate_by(&u_zx(msg));
    let rho3 = rho2.conjugate_by(&u_bell());
    Ok(SdcStates { rho1, rho2, rho3 })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SignalStats {
    pub mu_i: f64,
    pub mu_s: f64,
    pub sigma_i: f64,
    pub sigma_s: f64,
    pub log10_error_probability_i: f64,
    pub log10_error_probability_s: f64,
    /// The larger of the two per-spin values.
    pub log10_error_probability: f64,
    /// Set when some ε = 0 so the bit is a pure guess (P_e = ½).
    pub guess: bool,
}

/// log₁₀ of the Gaussian tail e^{−nε²/2}/(√(2π)·√n·ε), capped at ½.
pub fn log10_error_probability(n: f64, eps: f64) -> f64 {
    let eps = eps.abs();
    if eps == 0.0 {
        return 0.5f64.log10();
    }
    if eps >= 1.0 {
        return f64::NEG_INFINITY;
    }
    let v = -n * eps * eps / 2.0 / LN_10 - (2.0 * PI).sqrt().log10() - 0.5 * n.log10() - eps.log10();
    v.min(0.5f64.log10())
}

pub fn signal_stats(n: f64, eps_i: f64, eps_s: f64, msg: SdcMessage) -> Result<SignalStats> {
    if !(n >= 1.0) {
        return Err(Error::Domain(format!("molecule count {n} below 1")));
    }
    for e in [eps_i, eps_s] {
        if !(0.0..=1.0).contains(&e) {
            return Err(Error::Domain(format!("polarization {e} outside [0,1]")));
        }
    }
    let sign = |b: u8| if b == 1 { -1.0 } else { 1.0 };
    let li = log10_error_probability(n, eps_i);
    let ls = log10_error_probability(n, eps_s);
    Ok(SignalStats {
        mu_i: sign(msg.z) * n * eps_i,
        mu_s: sign(msg.x) * n * eps_s,
        sigma_i: (n * (1.0 - eps_i * eps_i)).sqrt(),
        sigma_s: (n * (1.0 - eps_s * eps_s)).sqrt(),
        log10_error_probability_i: li,
        log10_error_probability_s: ls,
        log10_error_probability: li.max(ls),
        guess: eps_i == 0.0 || eps_s == 0.0,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SnrParams {
    pub quality_factor: f64,
    /// m³
    pub coil_volume: f64,
    /// ohm
    pub resistance: f64,
    /// rad/s
    pub larmor: f64,
    /// rad s⁻¹ T⁻¹
    pub gamma: f64,
    /// Hz
    pub bandwidth: f64,
    pub temperature: f64,
    pub n: f64,
    pub epsilon: f64,
}

/// Coil resistance used when none is given, ohm.
pub const DEFAULT_RESISTANCE: f64 = 50.0;
/// Receiver bandwidth used when none is given, Hz.
pub const DEFAULT_BANDWIDTH: f64 = 1.0e4;

impl SnrParams {
    fn validate(&self) -> Result<()> {
        let all = [
            self.quality_factor,
            self.coil_volume,
            self.resistance,
            self.larmor,
            self.gamma,
            self.bandwidth,
            self.temperature,
            self.n,
            self.epsilon,
        ];
        if all.iter().any(|v| !(*v > 0.0 && v.is_finite())) {
            return Err(Error::Domain("all SNR parameters must be positive and finite".into()));
        }
        Ok(())
    }

    pub fn signal_voltage(&self) -> f64 {
        0.25 * (self.quality_factor / self.coil_volume * MU0 * self.resistance * self.larmor).sqrt()
            * HBAR
            * self.gamma
            * self.n
            * self.epsilon
    }

    /// Nyquist noise √(4k_BTRΔν).
    pub fn noise_voltage(&self) -> f64 {
        (4.0 * BOLTZMANN * self.temperature * self.resistance * self.bandwidth).sqrt()
    }
}

pub fn snr(p: &SnrParams) -> Result<f64> {
    p.validate()?;
    Ok(p.signal_voltage() / p.noise_voltage())
}

/// Molecule count at which the SNR reaches one.
pub fn min_molecules_for_unit_snr(p: &SnrParams) -> Result<f64> {
    let unit = SnrParams { n: 1.0, ..*p };
    Ok(1.0 / snr(&unit)?)
}

/// (tr ρ X⊗X, tr ρ Z⊗Z)
pub fn evaluate_w1_w2(rho2: &DensityMatrix) -> Result<(f64, f64)> {
    if rho2.dim() != 4 {
        return Err(Error::Dimension("W1/W2 need a 2-qubit state".into()));
    }
    Ok((rho2.expectation(&pauli2(GateName::X, GateName::X)), rho2.expectation(&pauli2(GateName::Z, GateName::Z))))
}

/// F = ½ − ¼(1+|w1|)(1+|w2|); negative means entangled.
pub fn witness_f(w1: f64, w2: f64) -> Result<f64> {
    if w1.abs() > 1.0 + 1e-9 || w2.abs() > 1.0 + 1e-9 || !w1.is_finite() || !w2.is_finite() {
        return Err(Error::Validation(format!("|w1|, |w2| must not exceed 1 (got {w1}, {w2})")));
    }
    Ok(0.5 - 0.25 * (1.0 + w1.abs().min(1.0)) * (1.0 + w2.abs().min(1.0)))
}

/// ¼(I⊗I + (−1)^z̄ X⊗X + (−1)^z̄(−1)^x̄ Y⊗Y + (−1)^x̄ Z⊗Z)
pub fn conventional_witness(msg: SdcMessage) -> Operator {
    let sz = if msg.z == 0 { -1.0 } else { 1.0 };
    let sx = if msg.x == 0 { -1.0 } else { 1.0 };
    let m = (CMatrix::identity(4, 4)
        + pauli2(GateName::X, GateName::X) * cr(sz)
        + pauli2(GateName::Y, GateName::Y) * cr(sz * sx)
        + pauli2(GateName::Z, GateName::Z) * cr(sx))
        * cr(0.25);
    Operator::new(m).expect("4x4")
}

/// Columns are the Bell states β₀₀, β₀₁, β₁₀, β₁₁.
pub fn u_hcn() -> CMatrix {
    let s = FRAC_1_SQRT_2;
    CMatrix::from_row_slice(
        4,
        4,
        &[1., 0., 1., 0., 0., 1., 0., 1., 0., 1., 0., -1., 1., 0., -1., 0.].map(|v| cr(v * s)),
    )
}

/// Unitary V_ex(α) for α ∈ [3/4, ∞).
pub fn v_ex(alpha: f64) -> Result<CMatrix> {
    if alpha < 0.75 {
        return Err(Error::Domain(format!("V_ex needs α ≥ 3/4, got {alpha}")));
    }
    let r3 = 1.0 / 3f64.sqrt();
    let w = Complex64::from_polar(r3, 2.0 * PI / 3.0);
    let d = (4.0 * alpha - 3.0).sqrt();
    let sa = alpha.sqrt();
    let h = cr(1.0 / (2.0 * sa));
    let tail = cr(d / (2.0 * (3.0 * alpha).sqrt()));
    Ok(CMatrix::from_row_slice(
        4,
        4,
        &[
            cr(0.0), cr(r3), w, w.conj(),
            cr(0.0), cr(r3), w.conj(), w,
            cr(-d / (2.0 * sa)), h, h, h,
            cr(3f64.sqrt() / (2.0 * sa)), tail, tail, tail,
        ],
    ))
}

#[derive(Debug, Clone)]
pub struct WitnessDecomposition {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub u: Operator,
}

impl WitnessDecomposition {
    /// W̃ = U†(a Z⊗I + b I⊗Z + c I)U
    pub fn witness(&self) -> CMatrix {
        self.with_coefficients(self.a, self.b)
    }

    pub fn with_coefficients(&self, a: f64, b: f64) -> CMatrix {
        let d = zi() * cr(a) + iz() * cr(b) + CMatrix::identity(4, 4) * cr(self.c);
        self.u.matrix().adjoint() * d * self.u.matrix()
    }
}

/// Single-run decomposition of the conventional witness into local
/// magnetisations after a fixed unitary.
pub fn decompose_witness(msg: SdcMessage) -> WitnessDecomposition {
    let alpha = 0.75;
    let mut v = v_ex(alpha).expect("α = 3/4 is in range");
    v.swap_columns(0, msg.index());
    let u = Operator::new(v * u_hcn().adjoint()).expect("4x4");
    WitnessDecomposition { a: alpha / 2.0, b: alpha / 2.0, c: 0.25, u }
}

/// Evenly spaced probe values over [½, 1].
pub fn probe_grid(points: usize) -> Vec<f64> {
    (0..points).map(|k| 0.5 + 0.5 * k as f64 / (points.max(2) - 1) as f64).collect()
}

/// max over the grid of |tr(ρ₂W̃) − tr(ρ₂W)| for one message.
pub fn decomposition_residual(msg: SdcMessage, points: usize) -> Result<f64> {
    let dec = decompose_witness(msg);
    let diff = dec.witness() - conventional_witness(msg).matrix();
    // ρ₂ = Uρ₀U† with ρ₀ diagonal, so only the diagonal of U†(W̃−W)U matters
    let u = u_zx(msg) * u_ent();
    let d = u.adjoint() * diff * u;
    let grid = probe_grid(points);
    let mut worst: f64 = 0.0;
    for &pi in &grid {
        check_p("p_I", pi)?;
        for &ps in &grid {
            let w = [pi * ps, pi * (1.0 - ps), (1.0 - pi) * ps, (1.0 - pi) * (1.0 - ps)];
            let e: f64 = (0..4).map(|k| w[k] * d[(k, k)].re).sum();
            worst = worst.max(e.abs());
        }
    }
    Ok(worst)
}

#[derive(Debug, Clone, Serialize)]
pub struct SignFlipCandidate {
    pub label: String,
    pub a: f64,
    pub b: f64,
    /// Grid residual against the witnesses for messages 01, 10, 11.
    pub residuals: [f64; 3],
}

#[derive(Debug, Clone, Serialize)]
pub struct SignFlipReport {
    pub candidates: Vec<SignFlipCandidate>,
    /// |(a+a')x₀₀ + (b+b')y₀₀ + ½| for (a', b') = (−a, −b).
    pub opposite_sign_violation: f64,
    pub impossibility_confirmed: bool,
}

/// With U fixed at the (0,0) decomposition, flipping the signs of a and b
/// cannot reproduce the other three conventional witnesses.
pub fn verify_sign_flip_impossibility(points: usize) -> Result<SignFlipReport> {
    let dec = decompose_witness(SdcMessage { z: 0, x: 0 });
    let (a, b) = (dec.a, dec.b);
    let grid = probe_grid(points);
    let shared: Vec<DensityMatrix> = grid
        .iter()
        .flat_map(|&pi| grid.iter().map(move |&ps| (pi, ps)))
        .map(|(pi, ps)| mixed_sdc_states(pi, ps, SdcMessage { z: 0, x: 0 }).map(|s| s.rho1))
        .collect::<Result<_>>()?;
    let others = [SdcMessage { z: 0, x: 1 }, SdcMessage { z: 1, x: 0 }, SdcMessage { z: 1, x: 1 }];
    let candidates: Vec<SignFlipCandidate> = [("(a,-b)", a, -b), ("(-a,b)", -a, b), ("(-a,-b)", -a, -b)]
        .iter()
        .map(|&(label, ca, cb)| {
            let wt = dec.with_coefficients(ca, cb);
            let residuals = others.map(|m| {
                let w = conventional_witness(m);
                shared.iter().map(|r| (r.expectation(&wt) - r.expectation(w.matrix())).abs()).fold(0.0, f64::max)
            });
            SignFlipCandidate { label: label.into(), a: ca, b: cb, residuals }
        })
        .collect();
    // diagonal elements in the Bell basis, where ρ₁ is diagonal
    let to_bell = |m: CMatrix| u_hcn().adjoint() * dec.u.matrix().adjoint() * m * dec.u.matrix() * u_hcn();
    let x00 = to_bell(zi())[(0, 0)].re;
    let y00 = to_bell(iz())[(0, 0)].re;
    let (ap, bp) = (-a, -b);
    let opposite_sign_violation = ((a + ap) * x00 + (b + bp) * y00 + 0.5).abs();
    let some_message_unreachable = (0..3).any(|k| candidates.iter().all(|cand| cand.residuals[k] > 1e-6));
    let all_unmatched = (0..3).all(|k| candidates.iter().any(|cand| cand.residuals[k] > 1e-6));
    Ok(SignFlipReport {
        candidates,
        opposite_sign_violation,
        impossibility_confirmed: (some_message_unreachable || all_unmatched) && opposite_sign_violation > 0.1,
    })
}
