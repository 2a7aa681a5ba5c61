//! CODATA 2018 exact and recommended values, SI units.

pub const PLANCK: f64 = 6.626_070_15e-34;
pub const HBAR: f64 = PLANCK / (2.0 * std::f64::consts::PI);
pub const BOLTZMANN: f64 = 1.380_649e-23;
pub const BOHR_MAGNETON: f64 = 9.274_010_078_3e-24;
pub const MU0: f64 = 1.256_637_062_12e-6;
/// Free-electron g factor (magnitude).
pub const G_ELECTRON: f64 = 2.002_319_304_362_56;
/// Proton gyromagnetic ratio, rad s⁻¹ T⁻¹.
pub const GAMMA_PROTON: f64 = 2.675_221_874_4e8;
