//! First-order ENDOR line positions plus the TPPI and angular-echo readouts
//! of the entangled pair.

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;

use rustfft::{num_complex::Complex, FftPlanner};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::pulse_engine::{bell_prepare, bell_unitary, pseudo_pure_prepare, Channel, Transition, TransitionPulse};
use crate::quantum_state::{CMatrix, DensityMatrix, Evolve};
use crate::spin_ensemble::product_state;

/// All frequencies in MHz.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpinHamiltonianParams {
    pub nu_e: f64,
    pub nu_n: f64,
    pub a_iso: f64,
}

impl SpinHamiltonianParams {
    pub fn new(nu_e: f64, nu_n: f64, a_iso: f64) -> Result<Self> {
        if !(nu_e > 0.0) || !(nu_n >= 0.0) || !a_iso.is_finite() {
            return Err(Error::Validation(format!("need nu_e > 0 and nu_n >= 0 (got {nu_e}, {nu_n})")));
        }
        Ok(Self { nu_e, nu_n, a_iso })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnergyLevel {
    pub m_s: f64,
    pub m_i: f64,
    pub energy_mhz: f64,
}

/// E/h = ν_e m_S − ν_n m_I + a m_S m_I, ordered (+½,+½), (+½,−½), (−½,+½), (−½,−½).
pub fn energy_levels(p: &SpinHamiltonianParams) -> [EnergyLevel; 4] {
    [(0.5, 0.5), (0.5, -0.5), (-0.5, 0.5), (-0.5, -0.5)].map(|(m_s, m_i)| EnergyLevel {
        m_s,
        m_i,
        energy_mhz: p.nu_e * m_s - p.nu_n * m_i + p.a_iso * m_s * m_i,
    })
}

fn level(p: &SpinHamiltonianParams, m_s: f64, m_i: f64) -> f64 {
    p.nu_e * m_s - p.nu_n * m_i + p.a_iso * m_s * m_i
}

/// Allowed ΔM_S = ±1 lines, ascending.
pub fn epr_lines(p: &SpinHamiltonianParams) -> [f64; 2] {
    let mut l = [0.5, -0.5].map(|m_i| level(p, 0.5, m_i) - level(p, -0.5, m_i));
    l.sort_by(f64::total_cmp);
    l
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum EndorRegime {
    NuCentered,
    ACentered,
    Degenerate,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EndorLines {
    pub lines: [f64; 2],
    pub regime: EndorRegime,
}

/// |ν_n ± a/2|, ascending, with the regime label.
pub fn endor_lines(p: &SpinHamiltonianParams) -> EndorLines {
    let mut lines = [0.5, -0.5].map(|m_s| (level(p, m_s, 0.5) - level(p, m_s, -0.5)).abs());
    lines.sort_by(f64::total_cmp);
    let half = p.a_iso.abs() / 2.0;
    let regime = if (p.nu_n - half).abs() <= 1e-12 * p.nu_n.max(half).max(1.0) {
        EndorRegime::Degenerate
    } else if p.nu_n > half {
        EndorRegime::NuCentered
    } else {
        EndorRegime::ACentered
    };
    EndorLines { lines, regime }
}

/// Pulse sequence and sampling for a TPPI experiment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TppiConfig {
    /// Entangling and detection microwave transition.
    pub mw: Transition,
    /// Entangling RF transition.
    pub rf1: Transition,
    /// Detection RF transition.
    pub rf2: Transition,
    pub initial_level: usize,
    /// Hz
    pub nu1: f64,
    /// Hz
    pub nu2: f64,
    /// s
    pub dt: f64,
    pub steps: usize,
}

pub const DEFAULT_DT: f64 = 25e-9;
pub const DEFAULT_STEPS: usize = 512;

impl TppiConfig {
    /// Default sampling with ν₁ = 1.0 MHz and ν₂ = 5.2 MHz.
    pub fn new(initial_level: usize, rf1: Transition, mw: Transition, rf2: Transition) -> Self {
        Self { mw, rf1, rf2, initial_level, nu1: 1.0e6, nu2: 5.2e6, dt: DEFAULT_DT, steps: DEFAULT_STEPS }
    }

    pub fn validate(&self) -> Result<()> {
        if self.mw.channel()? != Channel::Mw || self.rf1.channel()? != Channel::Rf || self.rf2.channel()? != Channel::Rf {
            return Err(Error::Validation(format!(
                "TPPI needs MW/RF/RF transitions, got {}, {}, {}",
                self.mw, self.rf1, self.rf2
            )));
        }
        if !self.rf1.touches(self.initial_level) {
            return Err(Error::Validation(format!("{} does not touch level {}", self.rf1, self.initial_level)));
        }
        if self.steps < 16 {
            return Err(Error::Validation(format!("TPPI needs at least 16 steps, got {}", self.steps)));
        }
        if self.nu1 == self.nu2 && self.nu1 != 0.0 {
            return Err(Error::Validation("phase frequencies must differ".into()));
        }
        if !(self.dt > 0.0) {
            return Err(Error::Validation("dt must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Interferogram {
    pub times: Vec<f64>,
    pub signal: Vec<f64>,
}

/// ½(ρ_jj − ρ_ii) across the transition (i, j).
pub fn echo_signal(rho: &DensityMatrix, t: Transition) -> f64 {
    let (i, j) = t.levels();
    let p = rho.populations();
    0.5 * (p[j - 1] - p[i - 1])
}

/// RF(π/2, φ₂) · MW(π, φ₁)
pub fn tppi_detection(cfg: &TppiConfig, phi1: f64, phi2: f64) -> CMatrix {
    TransitionPulse::on(cfg.rf2, FRAC_PI_2, phi2).unitary() * TransitionPulse::on(cfg.mw, PI, phi1).unitary()
}

/// Interferogram for an arbitrary input state.
pub fn tppi_simulate_state(cfg: &TppiConfig, rho: &DensityMatrix) -> Result<Interferogram> {
    cfg.validate()?;
    if rho.dim() != 4 {
        return Err(Error::Dimension("TPPI acts on the 4-level system".into()));
    }
    let (times, signal) = (0..cfg.steps)
        .map(|k| {
            let t = k as f64 * cfg.dt;
            let (phi1, phi2) = (2.0 * PI * cfg.nu1 * t, 2.0 * PI * cfg.nu2 * t);
            let out = rho.conjugate_by(&tppi_detection(cfg, phi1, phi2));
            (t, echo_signal(&out, cfg.mw))
        })
        .unzip();
    Ok(Interferogram { times, signal })
}

/// Bell preparation from `initial_level` followed by phase-incremented detection.
pub fn tppi_simulate(cfg: &TppiConfig) -> Result<Interferogram> {
    cfg.validate()?;
    let psi = bell_prepare(cfg.initial_level, cfg.rf1, cfg.mw)?;
    tppi_simulate_state(cfg, &psi.to_density())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum TppiClass {
    Sum,
    Difference,
    SingleFrequencies,
}

impl fmt::Display for TppiClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TppiClass::Sum => "SUM",
            TppiClass::Difference => "DIFFERENCE",
            TppiClass::SingleFrequencies => "SINGLE_FREQUENCIES",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TppiClassification {
    pub class: TppiClass,
    /// Dominant non-DC line; `None` when the interferogram carries no line.
    pub peak_hz: Option<f64>,
    /// Spacing of the zero-padded spectrum.
    pub bin_hz: f64,
}

/// Lines with a spectral magnitude below this fraction of the sample count
/// are treated as numerical noise.
const FLAT_LEVEL: f64 = 1e-9;

/// Magnitude spectrum of the mean-subtracted signal, zero-padded 4×.
pub fn magnitude_spectrum(signal: &[f64], dt: f64) -> (Vec<f64>, Vec<f64>) {
    let n = signal.len() * 4;
    let mean = signal.iter().sum::<f64>() / signal.len().max(1) as f64;
    let mut buf: Vec<Complex<f64>> = signal.iter().map(|&s| Complex::new(s - mean, 0.0)).collect();
    buf.resize(n, Complex::new(0.0, 0.0));
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let half = n / 2 + 1;
    let freqs = (0..half).map(|k| k as f64 / (n as f64 * dt)).collect();
    let mags = buf[..half].iter().map(|z| z.norm()).collect();
    (freqs, mags)
}

/// Classifies the dominant line against |ν₁−ν₂|, ν₁+ν₂, ν₁ and ν₂.
pub fn tppi_classify(ig: &Interferogram, nu1: f64, nu2: f64) -> Result<TppiClassification> {
    let steps = ig.signal.len();
    if steps < 16 || ig.times.len() != steps {
        return Err(Error::Sampling(format!("need at least 16 equally long samples, got {steps}")));
    }
    let dt = ig.times[1] - ig.times[0];
    if !(dt > 0.0) {
        return Err(Error::Sampling("non-increasing sample times".into()));
    }
    if dt >= 1.0 / (2.0 * (nu1.abs() + nu2.abs())) {
        return Err(Error::Sampling(format!(
            "dt = {dt:e} s violates Nyquist for ν₁+ν₂ = {:e} Hz",
            nu1.abs() + nu2.abs()
        )));
    }
    let (freqs, mags) = magnitude_spectrum(&ig.signal, dt);
    let bin_hz = freqs[1];
    let (k, peak) = mags.iter().enumerate().skip(1).fold((1, 0.0), |acc, (k, &m)| if m > acc.1 { (k, m) } else { acc });
    if peak <= FLAT_LEVEL * steps as f64 {
        return Ok(TppiClassification { class: TppiClass::SingleFrequencies, peak_hz: None, bin_hz });
    }
    let mut f = freqs[k];
    if k + 1 < mags.len() {
        let (a, b, c) = (mags[k - 1], mags[k], mags[k + 1]);
        let den = a - 2.0 * b + c;
        if den.abs() > 0.0 {
            f += 0.5 * (a - c) / den * bin_hz;
        }
    }
    let mut cands = [
        ((nu1 - nu2).abs(), TppiClass::Difference),
        (nu1 + nu2, TppiClass::Sum),
        (nu1.abs(), TppiClass::SingleFrequencies),
        (nu2.abs(), TppiClass::SingleFrequencies),
    ];
    cands.sort_by(|x, y| x.0.total_cmp(&y.0));
    let class = cands
        .iter()
        .fold(None::<(f64, TppiClass)>, |best, &(cf, cl)| {
            let d = (cf - f).abs();
            match best {
                Some((bd, _)) if bd <= d => best,
                _ => Some((d, cl)),
            }
        })
        .map(|(_, cl)| cl)
        .expect("four candidates");
    Ok(TppiClassification { class, peak_hz: Some(f), bin_hz })
}

/// Encoding operations applied to the nuclear spin.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum EncodingOp {
    I,
    X,
    Y,
    Z,
}

impl EncodingOp {
    pub fn all() -> [EncodingOp; 4] {
        [EncodingOp::I, EncodingOp::X, EncodingOp::Y, EncodingOp::Z]
    }

    /// Encoding pulses with x-phase, angle-parametrised: X is P³⁴(θ)P¹²(φ),
    /// Y is P³⁴(2π+θ)P¹²(φ), Z is P³⁴(θ).
    pub fn unitary(&self, theta: f64, phi: f64) -> CMatrix {
        let p = |t: Transition, a: f64| TransitionPulse::on(t, a, 0.0).unitary();
        match self {
            EncodingOp::I => CMatrix::identity(4, 4),
            EncodingOp::X => p(Transition::W34, theta) * p(Transition::W12, phi),
            EncodingOp::Y => p(Transition::W34, 2.0 * PI + theta) * p(Transition::W12, phi),
            EncodingOp::Z => p(Transition::W34, theta),
        }
    }

    /// Rotation angle actually applied on ω₃₄.
    pub fn rf34_angle(&self, theta: f64) -> f64 {
        match self {
            EncodingOp::Y => 2.0 * PI + theta,
            _ => theta,
        }
    }
}

impl std::str::FromStr for EncodingOp {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "I" => Ok(EncodingOp::I),
            "X" => Ok(EncodingOp::X),
            "Y" => Ok(EncodingOp::Y),
            "Z" => Ok(EncodingOp::Z),
            _ => Err(Error::Validation(format!("unknown encoding {s:?}"))),
        }
    }
}

/// Tabulated echo intensity. The angle in the X/Y expression is the rotation
/// applied on ω₃₄, which for Y is 2π+θ; the spinor sign of cos(θ/2) carries
/// the difference between the two rows.
pub fn angular_echo_closed_form(u: EncodingOp, theta: f64, phi: f64, phi1: f64, phi2: f64) -> f64 {
    let d = (phi1 - phi2).cos();
    let t = u.rf34_angle(theta);
    match u {
        EncodingOp::I => 0.25 * (-1.0 + d),
        EncodingOp::Z => (-1.0 - 3.0 * t.cos() + 4.0 * (t / 2.0).cos() * d) / 16.0,
        EncodingOp::X | EncodingOp::Y => {
            (-3.0 * t.cos() - phi.cos() + 4.0 * (t / 2.0).cos() * (phi / 2.0).cos() * d) / 16.0
        }
    }
}

/// Parameters of the pulse-level angular-echo simulation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AngularEchoSetup {
    /// Electron polarisation of the thermal start state.
    pub epsilon: f64,
    /// Flip angle of the detection microwave pulse.
    pub detect_mw_angle: f64,
}

impl Default for AngularEchoSetup {
    fn default() -> Self {
        Self { epsilon: 0.12, detect_mw_angle: PI }
    }
}

/// Pseudo-pure state moved to |00⟩ and entangled into (|00⟩+|11⟩)/√2.
pub fn angular_echo_initial(setup: &AngularEchoSetup) -> Result<DensityMatrix> {
    if !(0.0..1.0).contains(&setup.epsilon) {
        return Err(Error::Domain(format!("polarization {} outside [0,1)", setup.epsilon)));
    }
    let pp = pseudo_pure_prepare(&product_state(&[setup.epsilon, 0.0])?)?;
    let to_ground = TransitionPulse::on(Transition::W13, PI, FRAC_PI_2).unitary();
    let ent = bell_unitary(Transition::W12, Transition::W24)?;
    Ok(pp.conjugate_by(&(ent * to_ground)))
}

/// Pulse-level echo. The pseudo-pure state is entangled and encoded, then
/// read out by MW ω₂₄(φ₁) and RF ω₁₂(−φ₂). The echo is read across ω₁₃ as
/// ½(ρ₁₁ − ρ₃₃); with the population hole of the pseudo-pure state this is
/// (ε/3) times the tabulated intensity.
pub fn angular_echo_simulate_with(
    setup: &AngularEchoSetup,
    u: EncodingOp,
    theta: f64,
    phi: f64,
    phi1: f64,
    phi2: f64,
) -> Result<f64> {
    let rho = angular_echo_initial(setup)?;
    let detect = TransitionPulse::on(Transition::W12, FRAC_PI_2, -phi2).unitary()
        * TransitionPulse::on(Transition::W24, setup.detect_mw_angle, phi1).unitary();
    let out = rho.conjugate_by(&(detect * u.unitary(theta, phi)));
    Ok(-echo_signal(&out, Transition::W13))
}

pub fn angular_echo_simulate(u: EncodingOp, theta: f64, phi: f64, phi1: f64, phi2: f64) -> Result<f64> {
    angular_echo_simulate_with(&AngularEchoSetup::default(), u, theta, phi, phi1, phi2)
}

/// Least-squares s ≈ α·x + β.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AffineFit {
    pub alpha: f64,
    pub beta: f64,
    pub max_residual: f64,
}

pub fn affine_fit(x: &[f64], y: &[f64]) -> Result<AffineFit> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(Error::Fit("affine fit needs two equally long series".into()));
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    if sxx <= 0.0 {
        return Err(Error::Fit("constant abscissa".into()));
    }
    let alpha = sxy / sxx;
    let beta = my - alpha * mx;
    let max_residual = x.iter().zip(y).map(|(a, b)| (alpha * a + beta - b).abs()).fold(0.0, f64::max);
    Ok(AffineFit { alpha, beta, max_residual })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn levels_and_lines() {
        let p = SpinHamiltonianParams::new(9500.0, 14.4, 0.0).unwrap();
        assert_abs_diff_eq!(energy_levels(&p)[0].energy_mhz, 4742.8, epsilon = 1e-9);
        let p = SpinHamiltonianParams::new(9500.0, 14.4, -61.0).unwrap();
        assert_abs_diff_eq!(energy_levels(&p)[0].energy_mhz, 4727.55, epsilon = 1e-9);
        let s: f64 = energy_levels(&p).iter().map(|l| l.energy_mhz).sum();
        assert_abs_diff_eq!(s, 0.0, epsilon = 1e-9);
        assert_eq!(epr_lines(&SpinHamiltonianParams::new(9500.0, 14.4, 10.0).unwrap()), [9495.0, 9505.0]);
    }

    #[test]
    fn endor_regimes() {
        let l = endor_lines(&SpinHamiltonianParams::new(9500.0, 14.4, 4.0).unwrap());
        assert_eq!(l.regime, EndorRegime::NuCentered);
        assert_abs_diff_eq!(l.lines[0], 12.4, epsilon = 1e-12);
        assert_abs_diff_eq!(l.lines[1], 16.4, epsilon = 1e-12);
        let l = endor_lines(&SpinHamiltonianParams::new(9500.0, 14.4, 68.16).unwrap());
        assert_eq!(l.regime, EndorRegime::ACentered);
        assert_abs_diff_eq!(l.lines[0], 19.68, epsilon = 1e-9);
        assert_abs_diff_eq!(l.lines[1], 48.48, epsilon = 1e-9);
        let l = endor_lines(&SpinHamiltonianParams::new(9500.0, 5.0, 10.0).unwrap());
        assert_eq!(l.regime, EndorRegime::Degenerate);
        assert_eq!(l.lines, [0.0, 10.0]);
    }

    #[test]
    fn singlet_at_zero_phase() {
        let mut cfg = TppiConfig::new(3, Transition::W34, Transition::W24, Transition::W34);
        cfg.nu1 = 0.0;
        cfg.nu2 = 0.0;
        let ig = tppi_simulate(&cfg).unwrap();
        // cos Δφ = 1 is the extremum of −[1 − cos Δφ]
        assert!(ig.signal.iter().all(|s| s.abs() < 1e-12));
    }

    #[test]
    fn classify_synthetic_single_line() {
        let dt = DEFAULT_DT;
        let times: Vec<f64> = (0..512).map(|k| k as f64 * dt).collect();
        let signal = times.iter().map(|t| (2.0 * PI * 5.2e6 * t).cos()).collect();
        let c = tppi_classify(&Interferogram { times: times.clone(), signal }, 1.0e6, 5.2e6).unwrap();
        assert_eq!(c.class, TppiClass::SingleFrequencies);
        assert!((c.peak_hz.unwrap() - 5.2e6).abs() < c.bin_hz);
        let signal = vec![0.3; 512];
        let c = tppi_classify(&Interferogram { times: times.clone(), signal }, 1.0e6, 5.2e6).unwrap();
        assert_eq!(c.peak_hz, None);
        let ig = Interferogram { times: times.iter().map(|t| t * 10.0).collect(), signal: vec![0.0; 512] };
        assert!(matches!(tppi_classify(&ig, 1.0e6, 5.2e6), Err(Error::Sampling(_))));
    }

    #[test]
    fn closed_form_substitutions() {
        assert_abs_diff_eq!(angular_echo_closed_form(EncodingOp::I, 0.0, 0.0, 0.7, 0.7), 0.0, epsilon = 1e-15);
        for d in [0.0, 0.4, 2.0] {
            let z0 = angular_echo_closed_form(EncodingOp::Z, 0.0, 0.0, d, 0.0);
            assert_abs_diff_eq!(z0, angular_echo_closed_form(EncodingOp::I, 0.0, 0.0, d, 0.0), epsilon = 1e-15);
            let z2 = angular_echo_closed_form(EncodingOp::Z, 2.0 * PI, 0.0, d, 0.0);
            assert_abs_diff_eq!(z2, -0.25 * (1.0 + d.cos()), epsilon = 1e-15);
        }
    }

    #[test]
    fn simulation_is_affine_in_closed_form() {
        let grid = [0.3, 1.1, 2.9, 4.0, 5.5];
        for u in EncodingOp::all() {
            let (mut xs, mut ys) = (vec![], vec![]);
            for &t in &grid {
                for &p in &grid {
                    let (p1, p2) = (t * 0.7, p * 1.3);
                    xs.push(angular_echo_closed_form(u, t, p, p1, p2));
                    ys.push(angular_echo_simulate(u, t, p, p1, p2).unwrap());
                }
            }
            let f = affine_fit(&xs, &ys).unwrap();
            assert!(f.max_residual < 1e-12, "{u:?}: {f:?}");
            assert_abs_diff_eq!(f.alpha, 0.04, epsilon = 1e-12);
        }
    }
}
