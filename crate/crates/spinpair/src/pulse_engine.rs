//! Transition-selective pulses on the four-level electron-nuclear system.
//!
//! Levels are numbered 1..4 as |00⟩, |01⟩, |10⟩, |11⟩ with the electron first.
//! Microwave pulses flip the electron (ω₁₃, ω₂₄), radio-frequency pulses flip
//! the nucleus (ω₁₂, ω₃₄).

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::quantum_state::{c, cr, CMatrix, DensityMatrix, Evolve, Operator, PureState};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Channel {
    Mw,
    Rf,
}

/// Ordered level pair (i, j), i < j, levels 1..4.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Transition {
    i: usize,
    j: usize,
}

impl Transition {
    pub const W12: Transition = Transition { i: 1, j: 2 };
    pub const W34: Transition = Transition { i: 3, j: 4 };
    pub const W13: Transition = Transition { i: 1, j: 3 };
    pub const W24: Transition = Transition { i: 2, j: 4 };

    pub fn new(a: usize, b: usize) -> Result<Self> {
        let (i, j) = if a < b { (a, b) } else { (b, a) };
        let t = Transition { i, j };
        t.channel()?;
        Ok(t)
    }

    pub fn levels(&self) -> (usize, usize) {
        (self.i, self.j)
    }

    /// Channel implied by the level pair; errors for double-quantum pairs.
    pub fn channel(&self) -> Result<Channel> {
        match (self.i, self.j) {
            (1, 3) | (2, 4) => Ok(Channel::Mw),
            (1, 2) | (3, 4) => Ok(Channel::Rf),
            (i, j) => Err(Error::Validation(format!("ω{i}{j} is not a selectively driven transition"))),
        }
    }

    pub fn touches(&self, level: usize) -> bool {
        self.i == level || self.j == level
    }
}

impl fmt::Display for Transition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let ch = if self.channel() == Ok(Channel::Mw) { "mw" } else { "rf" };
        write!(f, "{ch}{}{}", self.i, self.j)
    }
}

impl FromStr for Transition {
    type Err = Error;

    /// Accepts `mw24`, `rf34`, `w12` or plain `13`; a channel prefix must match.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        let (prefix, digits) = s.split_at(s.find(|ch: char| ch.is_ascii_digit()).unwrap_or(s.len()));
        let bad = || Error::Validation(format!("cannot parse transition {s:?}"));
        let d: Vec<usize> = digits.chars().map(|ch| ch.to_digit(10).map(|v| v as usize)).collect::<Option<_>>().ok_or_else(bad)?;
        if d.len() != 2 {
            return Err(bad());
        }
        let t = Transition::new(d[0], d[1])?;
        let want = match prefix {
            "mw" => Some(Channel::Mw),
            "rf" => Some(Channel::Rf),
            "" | "w" => None,
            _ => return Err(bad()),
        };
        if let Some(ch) = want {
            if t.channel()? != ch {
                return Err(Error::Validation(format!("{s} pairs the wrong channel with ω{}{}", t.i, t.j)));
            }
        }
        Ok(t)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransitionPulse {
    pub transition: Transition,
    pub theta: f64,
    pub phi: f64,
    pub channel: Channel,
}

impl TransitionPulse {
    /// Rejects MW on nuclear transitions and RF on electron transitions.
    pub fn new(transition: Transition, theta: f64, phi: f64, channel: Channel) -> Result<Self> {
        if transition.channel()? != channel {
            return Err(Error::Validation(format!("{channel:?} cannot drive ω{}{}", transition.i, transition.j)));
        }
        Ok(Self { transition, theta, phi, channel })
    }

    /// Channel taken from the transition.
    pub fn on(transition: Transition, theta: f64, phi: f64) -> Self {
        let channel = transition.channel().expect("Transition is validated on construction");
        Self { transition, theta, phi, channel }
    }

    pub fn unitary(&self) -> CMatrix {
        pulse_matrix(self.transition, self.theta, self.phi)
    }
}

fn pulse_matrix(t: Transition, theta: f64, phi: f64) -> CMatrix {
    let (i, j) = (t.i - 1, t.j - 1);
    let (s, co) = (theta / 2.0).sin_cos();
    let mut u = CMatrix::identity(4, 4);
    u[(i, i)] = cr(co);
    u[(j, j)] = cr(co);
    u[(i, j)] = c(0.0, -1.0) * Complex64::from_polar(1.0, -phi) * s;
    u[(j, i)] = c(0.0, -1.0) * Complex64::from_polar(1.0, phi) * s;
    u
}

/// Identity except the (i,j) block
/// [[cos θ/2, −i e^{−iφ} sin θ/2], [−i e^{iφ} sin θ/2, cos θ/2]].
pub fn pulse_unitary(p: &TransitionPulse) -> Result<Operator> {
    TransitionPulse::new(p.transition, p.theta, p.phi, p.channel)?;
    Operator::new(p.unitary())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SequenceStep {
    Pulse(TransitionPulse),
    Dephase,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PulseSequence {
    steps: Vec<SequenceStep>,
}

impl PulseSequence {
    pub fn new(steps: Vec<SequenceStep>) -> Result<Self> {
        if steps.is_empty() {
            return Err(Error::Validation("pulse sequence is empty".into()));
        }
        Ok(Self { steps })
    }

    pub fn steps(&self) -> &[SequenceStep] {
        &self.steps
    }

    /// Steps are applied left to right.
    pub fn apply(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        if rho.dim() != 4 {
            return Err(Error::Dimension("pulse sequences act on the 4-level system".into()));
        }
        Ok(self.steps.iter().fold(rho.clone(), |r, step| match step {
            SequenceStep::Pulse(p) => r.conjugate_by(&p.unitary()),
            SequenceStep::Dephase => dephase(&r),
        }))
    }

    /// Product of the pulses only; errors if the sequence dephases.
    pub fn unitary(&self) -> Result<CMatrix> {
        self.steps.iter().try_fold(CMatrix::identity(4, 4), |acc, step| match step {
            SequenceStep::Pulse(p) => Ok(p.unitary() * acc),
            SequenceStep::Dephase => Err(Error::Validation("dephasing is not unitary".into())),
        })
    }
}

/// Angle tokens: `pi`, `pi/2`, `3pi/2`, `2*pi`, `109.47deg`, or plain radians.
pub fn parse_angle(tok: &str) -> Result<f64> {
    let t = tok.trim().to_ascii_lowercase().replace(' ', "");
    let bad = || Error::Validation(format!("cannot parse angle {tok:?}"));
    if let Some(d) = t.strip_suffix("deg") {
        return d.parse::<f64>().map(f64::to_radians).map_err(|_| bad());
    }
    if let Some(pos) = t.find("pi") {
        let (num, rest) = t.split_at(pos);
        let num = num.trim_end_matches('*');
        let k = if num.is_empty() { 1.0 } else if num == "-" { -1.0 } else { num.parse::<f64>().map_err(|_| bad())? };
        let rest = &rest[2..];
        let den = match rest.strip_prefix('/') {
            Some(d) => d.parse::<f64>().map_err(|_| bad())?,
            None if rest.is_empty() => 1.0,
            None => return Err(bad()),
        };
        return Ok(k * PI / den);
    }
    t.parse::<f64>().map_err(|_| bad())
}

impl FromStr for PulseSequence {
    type Err = Error;

    /// Comma list such as `mw24:pi:90,rf34:pi/2:0,dephase`; the phase is in
    /// degrees and defaults to 0.
    fn from_str(s: &str) -> Result<Self> {
        let steps = s
            .split(',')
            .map(str::trim)
            .filter(|t| !t.is_empty())
            .map(|tok| {
                if tok.eq_ignore_ascii_case("dephase") {
                    return Ok(SequenceStep::Dephase);
                }
                let parts: Vec<&str> = tok.split(':').collect();
                if parts.len() < 2 || parts.len() > 3 {
                    return Err(Error::Validation(format!("pulse token {tok:?} needs transition:angle[:phase]")));
                }
                let tr: Transition = parts[0].parse()?;
                let theta = parse_angle(parts[1])?;
                let phi = match parts.get(2) {
                    Some(p) => p.trim().parse::<f64>().map_err(|_| Error::Validation(format!("bad phase in {tok:?}")))?.to_radians(),
                    None => 0.0,
                };
                Ok(SequenceStep::Pulse(TransitionPulse::on(tr, theta, phi)))
            })
            .collect::<Result<Vec<_>>>()?;
        PulseSequence::new(steps)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GateName {
    X,
    Y,
    Z,
    H,
    Cnot,
}

impl FromStr for GateName {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "X" => Ok(GateName::X),
            "Y" => Ok(GateName::Y),
            "Z" => Ok(GateName::Z),
            "H" => Ok(GateName::H),
            "CNOT" | "CX" => Ok(GateName::Cnot),
            _ => Err(Error::Validation(format!("unknown gate {s:?}"))),
        }
    }
}

/// Qubit 0 is the electron (first factor), qubit 1 the nucleus.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Wiring {
    On(usize),
    Controlled { control: usize, target: usize },
}

fn single_qubit(name: GateName) -> CMatrix {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let z = cr(0.0);
    let o = cr(1.0);
    match name {
        GateName::X => CMatrix::from_row_slice(2, 2, &[z, o, o, z]),
        GateName::Y => CMatrix::from_row_slice(2, 2, &[z, c(0.0, -1.0), c(0.0, 1.0), z]),
        GateName::Z => CMatrix::from_row_slice(2, 2, &[o, z, z, -o]),
        GateName::H => CMatrix::from_row_slice(2, 2, &[cr(s), cr(s), cr(s), cr(-s)]),
        GateName::Cnot => unreachable!("two-qubit gate"),
    }
}

pub fn gate(name: GateName, wiring: Wiring) -> Result<Operator> {
    let id = CMatrix::identity(2, 2);
    let m = match (name, wiring) {
        (GateName::Cnot, Wiring::Controlled { control, target }) if control != target && control < 2 && target < 2 => {
            let mut m = CMatrix::zeros(4, 4);
            for k in 0..4usize {
                let bits = [(k >> 1) & 1, k & 1];
                let mut out = bits;
                if bits[control] == 1 {
                    out[target] ^= 1;
                }
                m[(out[0] * 2 + out[1], k)] = cr(1.0);
            }
            m
        }
        (GateName::Cnot, _) => return Err(Error::Validation("CNOT needs distinct control and target in {0,1}".into())),
        (g, Wiring::On(0)) => single_qubit(g).kronecker(&id),
        (g, Wiring::On(1)) => id.kronecker(&single_qubit(g)),
        (_, w) => return Err(Error::Validation(format!("invalid wiring {w:?} for a single-qubit gate"))),
    };
    Operator::new(m)
}

/// The five-factor pulse product that realises CNOT (control electron,
/// target nucleus) up to a global phase.
pub fn cnot_pulse_product() -> CMatrix {
    let a = c(1.0, -1.0);
    let b = c(1.0, 1.0);
    let r = |v: [f64; 16]| CMatrix::from_iterator(4, 4, v.iter().map(|&x| cr(x))).transpose();
    let left = r([1., -1., 0., 0., 1., 1., 0., 0., 0., 0., 1., -1., 0., 0., 1., 1.]);
    let right = r([1., 1., 0., 0., -1., 1., 0., 0., 0., 0., 1., 1., 0., 0., -1., 1.]);
    let diag = |d: [Complex64; 4]| CMatrix::from_diagonal(&crate::CVector::from_column_slice(&d));
    let p = left * diag([a, a, b, b]) * diag([a, b, a, b]) * diag([b, a, a, b]) * right;
    p * cr(2f64.powf(-2.5))
}

/// max |a − e^{iχ} b| with χ chosen from the largest entry of b.
pub fn distance_up_to_phase(a: &CMatrix, b: &CMatrix) -> f64 {
    let (k, _) = b.iter().enumerate().fold((0, 0.0), |acc, (k, z)| if z.norm() > acc.1 { (k, z.norm()) } else { acc });
    let phase = if b[k].norm() > 0.0 { a[k] / b[k] } else { cr(1.0) };
    let phase = phase / phase.norm().max(1e-300);
    (a - b * phase).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Zero all coherences.
pub fn dephase(rho: &DensityMatrix) -> DensityMatrix {
    DensityMatrix::from_diagonal(&rho.populations()).expect("diagonal of a density matrix is a density matrix")
}

/// arccos(−1/3) ≈ 109.47°
pub fn pseudo_pure_angle() -> f64 {
    (-1.0f64 / 3.0).acos()
}

/// MW ω₂₄ at arccos(−1/3), dephase, RF ω₁₂ π/2, dephase. From an
/// electron-polarised thermal state this leaves a population deviation on
/// level 3 (|10⟩) over a uniform background.
pub fn pseudo_pure_prepare(thermal: &DensityMatrix) -> Result<DensityMatrix> {
    if thermal.dim() != 4 {
        return Err(Error::Dimension("pseudo-pure preparation acts on the 4-level system".into()));
    }
    let m = thermal.matrix();
    let off = (0..4).flat_map(|i| (0..4).filter(move |&j| j != i).map(move |j| (i, j))).map(|(i, j)| m[(i, j)].norm()).fold(0.0, f64::max);
    if off > crate::quantum_state::TOL {
        return Err(Error::Validation("pseudo-pure preparation needs a diagonal thermal input".into()));
    }
    pseudo_pure_sequence().apply(thermal)
}

pub fn pseudo_pure_sequence() -> PulseSequence {
    PulseSequence {
        steps: vec![
            SequenceStep::Pulse(TransitionPulse::on(Transition::W24, pseudo_pure_angle(), FRAC_PI_2)),
            SequenceStep::Dephase,
            SequenceStep::Pulse(TransitionPulse::on(Transition::W12, FRAC_PI_2, FRAC_PI_2)),
            SequenceStep::Dephase,
        ],
    }
}

/// Entangling unitary MW(π, π/2) · RF(π/2, π/2).
pub fn bell_unitary(rf: Transition, mw: Transition) -> Result<CMatrix> {
    if rf.channel()? != Channel::Rf || mw.channel()? != Channel::Mw {
        return Err(Error::Validation(format!("bell preparation needs an RF then an MW transition, got {rf} and {mw}")));
    }
    Ok(pulse_matrix(mw, PI, FRAC_PI_2) * pulse_matrix(rf, FRAC_PI_2, FRAC_PI_2))
}

pub fn bell_prepare(initial_level: usize, rf: Transition, mw: Transition) -> Result<PureState> {
    if !(1..=4).contains(&initial_level) {
        return Err(Error::Validation(format!("initial level {initial_level} outside 1..4")));
    }
    if !rf.touches(initial_level) {
        return Err(Error::Validation(format!("{rf} does not touch level {initial_level}")));
    }
    let u = bell_unitary(rf, mw)?;
    let psi = PureState::basis(4, initial_level - 1)?;
    Ok(psi.conjugate_by(&u))
}
