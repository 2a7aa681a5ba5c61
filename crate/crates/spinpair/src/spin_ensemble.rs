//! Thermal spin ensembles and the temperature below which they can be entangled.
//!
//! Polarisations are stored positive: ε is the excess population of the lower
//! level |0⟩, so a species contributes diag((1+ε)/2, (1−ε)/2).

use serde::Serialize;

use crate::constants::{BOHR_MAGNETON, BOLTZMANN, G_ELECTRON, PLANCK};
use crate::error::{Error, Result};
use crate::quantum_state::{tensor_product, DensityMatrix};

#[derive(Debug, Clone, PartialEq)]
pub struct SpinSpecies {
    pub name: String,
    /// Hz, magnitude.
    pub larmor_frequency: f64,
}

impl SpinSpecies {
    pub fn new(name: impl Into<String>, larmor_frequency: f64) -> Result<Self> {
        let f = larmor_frequency.abs();
        if f <= 0.0 || !f.is_finite() {
            return Err(Error::Domain(format!("Larmor frequency must be positive, got {larmor_frequency}")));
        }
        Ok(Self { name: name.into(), larmor_frequency: f })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleConfig {
    /// Kelvin.
    pub temperature: f64,
    /// Electron first when present.
    pub species: Vec<SpinSpecies>,
    pub n_molecules: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PolarizationPair {
    pub epsilon_s: f64,
    pub epsilon_i: f64,
}

/// ε = tanh(hν / 2k_BT)
pub fn polarization(larmor_frequency: f64, temperature: f64) -> Result<f64> {
    if !(larmor_frequency > 0.0 && temperature > 0.0) {
        return Err(Error::Domain(format!(
            "polarization needs positive frequency and temperature (got {larmor_frequency} Hz, {temperature} K)"
        )));
    }
    Ok((PLANCK * larmor_frequency / (2.0 * BOLTZMANN * temperature)).tanh())
}

/// Single-spin thermal density diag(p, q).
pub fn spin_density(epsilon: f64) -> Result<DensityMatrix> {
    if !(0.0..=1.0).contains(&epsilon) {
        return Err(Error::Domain(format!("polarization {epsilon} outside [0,1]")));
    }
    DensityMatrix::from_diagonal(&[(1.0 + epsilon) / 2.0, (1.0 - epsilon) / 2.0])
}

/// ⊗ᵢ diag(pᵢ, qᵢ) from explicit polarisations, first factor slowest.
pub fn product_state(epsilons: &[f64]) -> Result<DensityMatrix> {
    let (first, rest) = epsilons
        .split_first()
        .ok_or_else(|| Error::Validation("at least one species required".into()))?;
    rest.iter().try_fold(spin_density(*first)?, |acc, &e| tensor_product(&acc, &spin_density(e)?))
}

pub fn thermal_state(config: &EnsembleConfig) -> Result<DensityMatrix> {
    if config.species.is_empty() || config.species.len() > 4 {
        return Err(Error::Validation(format!("{} species unsupported", config.species.len())));
    }
    let eps = config
        .species
        .iter()
        .map(|s| polarization(s.larmor_frequency, config.temperature))
        .collect::<Result<Vec<_>>>()?;
    product_state(&eps)
}

/// ε_Iε_S + ε_I + ε_S − 1; positive exactly when the Bell-prepared thermal
/// state is entangled.
pub fn entanglement_margin(p: PolarizationPair) -> f64 {
    p.epsilon_i * p.epsilon_s + p.epsilon_i + p.epsilon_s - 1.0
}

pub const THRESHOLD_BRACKET: (f64, f64) = (1e-3, 1e3);

/// Critical temperature below which the margin is positive. With `transfer`
/// the nuclear polarisation is idealised to equal the electron one.
pub fn threshold_temperature(electron_freq: f64, nuclear_freq: f64, transfer: bool) -> Result<f64> {
    if !(electron_freq > 0.0 && nuclear_freq > 0.0) {
        return Err(Error::Domain("threshold needs positive frequencies".into()));
    }
    let margin = |t: f64| -> f64 {
        let es = polarization(electron_freq, t).unwrap_or(0.0);
        let ei = if transfer { es } else { polarization(nuclear_freq, t).unwrap_or(0.0) };
        entanglement_margin(PolarizationPair { epsilon_s: es, epsilon_i: ei })
    };
    let (mut lo, mut hi) = THRESHOLD_BRACKET;
    let (mlo, mhi) = (margin(lo), margin(hi));
    if mlo.signum() == mhi.signum() {
        return Err(Error::NoThreshold { lo, hi });
    }
    // margin decreases with temperature
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if margin(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-12 * hi {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Field (tesla) at which a free electron resonates at `electron_freq`.
pub fn resonance_field(electron_freq: f64) -> f64 {
    PLANCK * electron_freq / (G_ELECTRON * BOHR_MAGNETON)
}

/// Reference NMR frequencies at 3390 G (0.339 T).
pub const NUCLEUS_TABLE: [(&str, f64); 5] =
    [("1H", 14.4e6), ("2H", 2.22e6), ("14N", 1.04e6), ("15N", 1.46e6), ("19F", 13.6e6)];
pub const NUCLEUS_TABLE_FIELD: f64 = 0.339;

/// Nuclear Larmor frequency at `field` tesla, scaled linearly from the table.
pub fn nuclear_frequency(nucleus: &str, field: f64) -> Result<f64> {
    let (_, f0) = NUCLEUS_TABLE
        .iter()
        .find(|(n, _)| n.eq_ignore_ascii_case(nucleus))
        .ok_or_else(|| Error::Validation(format!("unknown nucleus {nucleus:?}")))?;
    Ok(f0 * field / NUCLEUS_TABLE_FIELD)
}

/// Population bookkeeping for the transfer sequence.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TransferTrace {
    /// Normalised level populations (levels 1..4) initially and after each step.
    pub steps: Vec<[f64; 4]>,
    pub result: PolarizationPair,
}

/// MW π on ω₁₃, RF π on ω₁₂, then electron relaxation within each nuclear
/// manifold with T₁e ≪ T₁n. Boltzmann ratios are linearised to 1−ε and
/// polarisations are read as population differences in units of the
/// initial ground-level population.
pub fn transfer_sequence(epsilon: f64) -> Result<TransferTrace> {
    if !(0.0..1.0).contains(&epsilon) {
        return Err(Error::Domain(format!("transfer polarization {epsilon} outside [0,1)")));
    }
    let unit = 1.0 / (4.0 - 2.0 * epsilon);
    let mut n = [unit, unit, unit * (1.0 - epsilon), unit * (1.0 - epsilon)];
    let mut steps = vec![n];
    n.swap(0, 2);
    steps.push(n);
    n.swap(0, 1);
    steps.push(n);
    for (lower, upper) in [(0, 2), (1, 3)] {
        let total = n[lower] + n[upper];
        n[lower] = total / (2.0 - epsilon);
        n[upper] = total * (1.0 - epsilon) / (2.0 - epsilon);
    }
    steps.push(n);
    let result = PolarizationPair { epsilon_s: (n[0] - n[2]) / unit, epsilon_i: (n[2] - n[3]) / unit };
    Ok(TransferTrace { steps, result })
}

pub fn transfer_polarization(epsilon: f64) -> Result<PolarizationPair> {
    Ok(transfer_sequence(epsilon)?.result)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn x_band_room_temperature() {
        let e = polarization(9.8e9, 300.0).unwrap();
        // hν/2kT directly, tanh ≈ identity here
        let want = 6.62607015e-34 * 9.8e9 / (2.0 * 1.380649e-23 * 300.0);
        assert_abs_diff_eq!(e, want, epsilon = 1e-9);
        assert!((7.0e-4..9.0e-4).contains(&e));
        // about 5004 of 10000 spins sit in the lower level
        assert_eq!((10_000.0 * (1.0 + e) / 2.0).round(), 5004.0);
    }

    #[test]
    fn w_band_polarization_near_threshold() {
        let e = polarization(95e9, 0.83).unwrap();
        assert_abs_diff_eq!(e, (4.561f64 / 1.66).tanh(), epsilon = 5e-4);
        assert!(polarization(9.5e9, 1e12).unwrap() < 1e-12);
        assert!(polarization(0.0, 1.0).is_err());
    }

    #[test]
    fn thermal_examples() {
        let r = product_state(&[0.5, 0.0]).unwrap();
        for (g, w) in r.populations().iter().zip([0.375, 0.375, 0.125, 0.125]) {
            assert_abs_diff_eq!(*g, w, epsilon = 1e-15);
        }
        let r = product_state(&[1.0, 1.0]).unwrap();
        assert_abs_diff_eq!(r.populations()[0], 1.0, epsilon = 1e-12);
    }

    #[test]
    fn margin_boundary() {
        let e = 2f64.sqrt() - 1.0;
        assert_abs_diff_eq!(entanglement_margin(PolarizationPair { epsilon_s: e, epsilon_i: e }), 0.0, epsilon = 1e-15);
        assert_eq!(entanglement_margin(PolarizationPair { epsilon_s: 0.0, epsilon_i: 0.0 }), -1.0);
        let m = entanglement_margin(PolarizationPair { epsilon_s: 0.9918, epsilon_i: 0.00416 });
        assert!(m.abs() < 5e-4);
    }

    #[test]
    fn thresholds() {
        let b = resonance_field(95e9);
        assert_abs_diff_eq!(b, 3.39, epsilon = 0.005);
        let nu_h = nuclear_frequency("1H", b).unwrap();
        let t = threshold_temperature(95e9, nu_h, false).unwrap();
        assert_abs_diff_eq!(t, 0.83, epsilon = 0.02);
        let t = threshold_temperature(95e9, nu_h, true).unwrap();
        assert_abs_diff_eq!(t, 5.17, epsilon = 0.02);
        // independent closed form: tanh(hν/2kT) = √2 − 1
        let q = threshold_temperature(35e9, 1.0, true).unwrap();
        let want = 6.62607015e-34 * 35e9 / (2.0 * 1.380649e-23 * (2f64.sqrt() - 1.0).atanh());
        assert_abs_diff_eq!(q, want, epsilon = 1e-6);
        assert_abs_diff_eq!(q, 1.90, epsilon = 0.01);
    }

    #[test]
    fn transfer_examples() {
        let p = transfer_polarization(0.5).unwrap();
        assert_abs_diff_eq!(p.epsilon_s, 2.0 / 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(p.epsilon_i, 1.0 / 3.0, epsilon = 1e-12);
        let p = transfer_polarization(0.0).unwrap();
        assert_eq!((p.epsilon_s, p.epsilon_i), (0.0, 0.0));
        let p = transfer_polarization(0.01).unwrap();
        assert_abs_diff_eq!(p.epsilon_s, 0.01005, epsilon = 1e-5);
        assert_abs_diff_eq!(p.epsilon_i, 0.00995, epsilon = 1e-5);
        assert!(transfer_polarization(1.2).is_err());
    }
}
