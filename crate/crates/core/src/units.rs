//! Unit system shared by every engine.
//!
//! Energies are in μeV, times in ns, magnetic fields in tesla and lengths in
//! Å. With these choices the level splittings and drive frequencies of a
//! nanotube dot are all of order one to a few hundred.

/// Reduced Planck constant in μeV·ns.
pub const HBAR: f64 = 0.658_211_956_9;

/// Bohr magneton in μeV/T.
pub const MU_B: f64 = 57.883_818_06;

/// Nuclear magneton in μeV/T.
pub const MU_N: f64 = 0.031_524_512_6;

/// Vacuum permeability over 4π, in T·m/A (SI).
pub const MU0_OVER_4PI_SI: f64 = 1.0e-7;

/// One μeV in joule.
pub const MICRO_EV_IN_J: f64 = 1.602_176_634e-25;

/// One Å in metre.
pub const ANGSTROM_IN_M: f64 = 1.0e-10;

/// Converts a frequency in GHz to an angular frequency in rad/ns.
pub fn angular_ghz(freq_ghz: f64) -> f64 {
    2.0 * std::f64::consts::PI * freq_ghz
}

/// Photon frequency (GHz) resonant with an energy splitting in μeV.
pub fn resonant_ghz(splitting_uev: f64) -> f64 {
    splitting_uev / (2.0 * std::f64::consts::PI * HBAR)
}

/// Atomic mass unit in kg.
pub const AMU_IN_KG: f64 = 1.660_539_066_60e-27;

/// Speed of light in cm/s.
pub const C_CM_PER_S: f64 = 2.997_924_58e10;

/// Wavenumber (cm⁻¹) of a harmonic mode with curvature/mass ratio
/// `lambda` in meV/(Å²·amu).
pub fn wavenumber_from_curvature(lambda: f64) -> f64 {
    let si = lambda * 1e3 * MICRO_EV_IN_J / (ANGSTROM_IN_M * ANGSTROM_IN_M * AMU_IN_KG);
    let omega = si.abs().sqrt();
    omega.copysign(lambda) / (2.0 * std::f64::consts::PI * C_CM_PER_S)
}
