//! Unit conventions.
//!
//! Energies and frequencies are wavenumbers in cm⁻¹, temperatures in kelvin
//! and physical times in picoseconds.

use crate::Real;

/// Boltzmann constant in cm⁻¹ per kelvin.
pub const BOLTZMANN_CM_PER_K: f64 = 0.695_034_800;

/// Speed of light in cm per ps.
pub const SPEED_OF_LIGHT_CM_PER_PS: f64 = 0.029_979_245_8;

/// Angular phase accumulated per ps by a 1 cm⁻¹ energy: `2πc`.
pub const RAD_PER_PS_PER_CM: f64 = 2.0 * std::f64::consts::PI * SPEED_OF_LIGHT_CM_PER_PS;

/// `k_B T` in cm⁻¹.
pub fn thermal_energy<T: Real>(kelvin: T) -> T {
    T::lit(BOLTZMANN_CM_PER_K) * kelvin
}

/// Inverse temperature in cm. Returns `+∞` at `T = 0`.
pub fn inverse_temperature<T: Real>(kelvin: T) -> T {
    if kelvin == T::zero() {
        T::infinity()
    } else {
        T::one() / thermal_energy(kelvin)
    }
}

/// Dimensionless phase `ω t` for `ω` in cm⁻¹ and `t` in ps.
#[inline]
pub fn phase<T: Real>(omega: T, t_ps: T) -> T {
    T::lit(RAD_PER_PS_PER_CM) * omega * t_ps
}

/// Bose–Einstein occupation `1/(e^{βω}-1)` for `ω > 0`; zero when `β = ∞`.
#[inline]
pub fn bose_einstein<T: Real>(beta: T, omega: T) -> T {
    if beta.is_infinite() {
        T::zero()
    } else {
        T::one() / (beta * omega).exp_m1()
    }
}
