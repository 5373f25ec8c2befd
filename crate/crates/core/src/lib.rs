//! Finite-temperature open-quantum-system dynamics with thermalized chain
//! mapping.
//!
//! A bosonic environment at temperature `T` is replaced by a zero-temperature
//! environment with a temperature-dependent spectral density supported on
//! `[-ω_c, ω_c]`. That density is mapped onto a nearest-neighbour oscillator
//! chain through the recurrence coefficients of its orthogonal polynomials,
//! and the system plus chain, starting from the chain vacuum, is propagated as
//! a pure matrix product state with TEBD.
//!
//! Modules, bottom up:
//!
//! * [`quadrature`] adaptive composite Gauss–Legendre integration
//! * [`linalg`] small dense eigen-solvers and matrix helpers
//! * [`spectral`] spectral densities, thermalization, correlation functions
//! * [`chainmap`] recurrence coefficients and chain Hamiltonian assembly
//! * [`diagnostics`] thermal occupation, chain-length estimation, local dimensions
//! * [`tebd`] matrix product states and second-order TEBD
//! * [`oracle`] analytic pure dephasing and exact diagonalization
//!
//! Everything numeric is generic over [`Real`] (`f32` or `f64`); the aliases
//! at the crate root fix the scalar to `f64`.

// `!(x >= 0)` rejects NaN along with negatives; index loops mirror the formulas.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign};

pub mod chainmap;
pub mod diagnostics;
pub mod error;
pub mod linalg;
pub mod model;
pub mod oracle;
pub mod quadrature;
pub mod spectral;
pub mod tebd;
pub mod units;

pub use error::{Error, Result};

/// Real scalar the numerics are generic over.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + NumAssign
    + Default
    + Debug
    + Display
    + Sum
    + Send
    + Sync
    + 'static
{
    /// Converts an `f64` literal into `Self`.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    /// Lossy conversion to `f64` for reporting.
    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f32 {}
impl Real for f64 {}

pub type C64 = num_complex::Complex<f64>;

pub type SpectralDensity = spectral::SpectralDensity<f64>;
pub type ThermalizedSD = spectral::ThermalizedSD<f64>;
pub type ChainCoefficients = chainmap::ChainCoefficients<f64>;
pub type ChainHamiltonianSpec = chainmap::ChainHamiltonianSpec<f64>;
pub type ModelSpec = model::ModelSpec<f64>;
pub type MpsState = tebd::MpsState<f64>;
pub type EvolutionConfig = tebd::EvolutionConfig<f64>;
pub type TimeSeries = tebd::TimeSeries<f64>;
pub type OccupationProfile = diagnostics::OccupationProfile<f64>;
pub type WalkProfile = diagnostics::WalkProfile<f64>;
pub type DecoherenceCurve = oracle::DecoherenceCurve<f64>;
