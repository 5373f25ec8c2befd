//! System models, local operators and site layouts.
//!
//! Two models are supported: a two-level system under pure dephasing with
//! one bath, and a dimer of two two-level systems with a flip-flop coupling,
//! each with its own bath. Every bath couples through `A = (1 + σ_z)/2`, the
//! projector on `|0⟩`, the `σ_z = +1` state.
//!
//! Two-level basis order is `(|0⟩, |1⟩)` with `σ_z = diag(1, -1)`;
//! `σ_+ = |0⟩⟨1|`.

use num_complex::Complex;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::linalg::{hermitian_eigen, Matrix};
use crate::spectral::SpectralDensity;
use crate::{Error, Real, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelKind {
    DephasingTls,
    Dimer,
}

/// Environment attached to one system site.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(
    serialize = "T: Serialize",
    deserialize = "T: Real + DeserializeOwned"
))]
pub struct Bath<T> {
    pub density: SpectralDensity<T>,
    /// Kelvin.
    pub temperature: T,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "type")]
pub enum InitialState<T> {
    /// `|+⟩ = (|0⟩ + |1⟩)/√2` on a single two-level system.
    Plus,
    /// `|+_D⟩ = (|01⟩ + |10⟩)/√2`, the upper single-excitation eigenstate
    /// of the flip-flop coupling.
    PlusD,
    /// Explicit amplitudes `(re, im)` in the system product basis.
    Pure { amplitudes: Vec<(T, T)> },
    /// Density matrix `(re, im)`, row-major. Only rank-one matrices are
    /// accepted.
    DensityMatrix { entries: Vec<(T, T)> },
}

/// System Hamiltonian, coupling operators, initial state and baths.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(
    serialize = "T: Serialize",
    deserialize = "T: Real + DeserializeOwned"
))]
pub struct ModelSpec<T> {
    pub kind: ModelKind,
    /// Splitting `ε` of `H = (ε/2) σ_z` on each two-level system, cm⁻¹.
    #[serde(default)]
    pub system_energy: T,
    /// Flip-flop coupling `λ` of the dimer, cm⁻¹.
    #[serde(default)]
    pub cross_coupling: T,
    pub initial_state: InitialState<T>,
    pub baths: Vec<Bath<T>>,
}

/// Cross coupling of the water-soluble chlorophyll-protein dimer, cm⁻¹.
pub const WSCP_CROSS_COUPLING: f64 = 69.0;

impl<T: Real> ModelSpec<T> {
    /// Pure-dephasing two-level system starting in `|+⟩`.
    pub fn dephasing(density: SpectralDensity<T>, temperature: T) -> Self {
        Self {
            kind: ModelKind::DephasingTls,
            system_energy: T::zero(),
            cross_coupling: T::zero(),
            initial_state: InitialState::Plus,
            baths: vec![Bath {
                density,
                temperature,
            }],
        }
    }

    /// Dimer with two independent baths sharing one density, starting in
    /// `|+_D⟩`.
    pub fn dimer(density: SpectralDensity<T>, temperature: T, cross_coupling: T) -> Self {
        let bath = Bath {
            density,
            temperature,
        };
        Self {
            kind: ModelKind::Dimer,
            system_energy: T::zero(),
            cross_coupling,
            initial_state: InitialState::PlusD,
            baths: vec![bath.clone(), bath],
        }
    }

    pub fn system_sites(&self) -> usize {
        match self.kind {
            ModelKind::DephasingTls => 1,
            ModelKind::Dimer => 2,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let expected = self.system_sites();
        if self.baths.len() != expected {
            return Err(Error::domain(format!(
                "{:?} model needs exactly {expected} bath(s), got {}",
                self.kind,
                self.baths.len()
            )));
        }
        for b in &self.baths {
            if !(b.temperature.is_finite() && b.temperature >= T::zero()) {
                return Err(Error::domain(format!(
                    "temperature must be >= 0 K, got {}",
                    b.temperature
                )));
            }
        }
        if !self.system_energy.is_finite() || !self.cross_coupling.is_finite() {
            return Err(Error::domain("system parameters must be finite"));
        }
        self.initial_amplitudes().map(|_| ())
    }

    /// Normalized initial state of the system sites in their product basis.
    pub fn initial_amplitudes(&self) -> Result<Vec<Complex<T>>> {
        let dim = 1usize << self.system_sites();
        let h = T::lit(0.5).sqrt();
        let amps = match (&self.initial_state, self.kind) {
            (InitialState::Plus, ModelKind::DephasingTls) => {
                vec![Complex::new(h, T::zero()), Complex::new(h, T::zero())]
            }
            (InitialState::PlusD, ModelKind::Dimer) => {
                let mut v = vec![Complex::new(T::zero(), T::zero()); 4];
                v[1] = Complex::new(h, T::zero());
                v[2] = Complex::new(h, T::zero());
                v
            }
            (InitialState::Plus, _) | (InitialState::PlusD, _) => {
                return Err(Error::Unsupported(format!(
                    "initial state {:?} does not fit the {:?} model",
                    self.initial_state, self.kind
                )))
            }
            (InitialState::Pure { amplitudes }, _) => {
                amplitudes.iter().map(|&(r, i)| Complex::new(r, i)).collect()
            }
            (InitialState::DensityMatrix { entries }, _) => pure_from_density(entries, dim)?,
        };
        if amps.len() != dim {
            return Err(Error::domain(format!(
                "initial state needs {dim} amplitudes, got {}",
                amps.len()
            )));
        }
        let norm = amps.iter().map(|a| a.norm_sqr()).sum::<T>().sqrt();
        if !(norm > T::zero() && norm.is_finite()) {
            return Err(Error::domain("initial state has zero or non-finite norm"));
        }
        Ok(amps.into_iter().map(|a| a / norm).collect())
    }
}

fn pure_from_density<T: Real>(entries: &[(T, T)], dim: usize) -> Result<Vec<Complex<T>>> {
    if entries.len() != dim * dim {
        return Err(Error::domain(format!(
            "density matrix needs {} entries, got {}",
            dim * dim,
            entries.len()
        )));
    }
    let rho = Matrix::from_fn(dim, dim, |r, c| {
        let (re, im) = entries[r * dim + c];
        Complex::new(re, im)
    });
    if rho.hermiticity_defect() > T::lit(1e-10) {
        return Err(Error::domain("density matrix is not Hermitian"));
    }
    let eig = hermitian_eigen(&rho)?;
    let trace: T = eig.values.iter().copied().sum();
    let purity: T = eig.values.iter().map(|&x| x * x).sum::<T>() / (trace * trace);
    if (T::one() - purity).abs() > T::lit(1e-10) {
        return Err(Error::Unsupported(format!(
            "mixed initial system state (purity {purity}); only pure states are simulated"
        )));
    }
    Ok((0..dim).map(|r| eig.vectors.get(r, dim - 1)).collect())
}

/// A site of the one-dimensional system-plus-chains layout.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "type")]
pub enum Site {
    /// Two-level system number `index`.
    System { index: usize },
    /// Chain site `n` of bath `bath`.
    Oscillator { bath: usize, n: usize },
}

/// Site order: for one bath `[S, c_0, c_1, …]`; for the dimer
/// `[c^L_{N-1}, …, c^L_0, S_L, S_R, c^R_0, …, c^R_{N-1}]`.
pub fn layout(kind: ModelKind, chain_length: usize) -> Vec<Site> {
    match kind {
        ModelKind::DephasingTls => std::iter::once(Site::System { index: 0 })
            .chain((0..chain_length).map(|n| Site::Oscillator { bath: 0, n }))
            .collect(),
        ModelKind::Dimer => (0..chain_length)
            .rev()
            .map(|n| Site::Oscillator { bath: 0, n })
            .chain([Site::System { index: 0 }, Site::System { index: 1 }])
            .chain((0..chain_length).map(|n| Site::Oscillator { bath: 1, n }))
            .collect(),
    }
}

pub mod ops {
    //! Local operators as dense matrices.

    use num_complex::Complex;

    use crate::linalg::Matrix;
    use crate::Real;

    pub fn sigma_x<T: Real>() -> Matrix<T> {
        Matrix::from_vec(2, 2, vec![T::zero(), T::one(), T::one(), T::zero()])
    }

    pub fn sigma_y<T: Real>() -> Matrix<Complex<T>> {
        let z = Complex::new(T::zero(), T::zero());
        let i = Complex::new(T::zero(), T::one());
        Matrix::from_vec(2, 2, vec![z, -i, i, z])
    }

    pub fn sigma_z<T: Real>() -> Matrix<T> {
        Matrix::from_vec(2, 2, vec![T::one(), T::zero(), T::zero(), -T::one()])
    }

    /// `σ_+ = |0⟩⟨1|`.
    pub fn sigma_plus<T: Real>() -> Matrix<T> {
        Matrix::from_vec(2, 2, vec![T::zero(), T::one(), T::zero(), T::zero()])
    }

    pub fn sigma_minus<T: Real>() -> Matrix<T> {
        sigma_plus::<T>().transpose()
    }

    /// `(1 + σ_z)/2`.
    pub fn excited_projector<T: Real>() -> Matrix<T> {
        Matrix::from_vec(2, 2, vec![T::one(), T::zero(), T::zero(), T::zero()])
    }

    /// Truncated annihilation operator on `d` Fock levels.
    pub fn annihilation<T: Real>(d: usize) -> Matrix<T> {
        Matrix::from_fn(d, d, |r, c| {
            if c == r + 1 {
                T::lit(c as f64).sqrt()
            } else {
                T::zero()
            }
        })
    }

    pub fn creation<T: Real>(d: usize) -> Matrix<T> {
        annihilation::<T>(d).transpose()
    }

    pub fn number<T: Real>(d: usize) -> Matrix<T> {
        Matrix::from_fn(d, d, |r, c| if r == c { T::lit(r as f64) } else { T::zero() })
    }

    /// `c + c†`.
    pub fn position<T: Real>(d: usize) -> Matrix<T> {
        annihilation::<T>(d).add(&creation::<T>(d))
    }

    pub fn to_complex<T: Real>(m: &Matrix<T>) -> Matrix<Complex<T>> {
        m.map(|x| Complex::new(x, T::zero()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dimer_layout_places_systems_adjacent() {
        let l = layout(ModelKind::Dimer, 2);
        assert_eq!(
            l,
            vec![
                Site::Oscillator { bath: 0, n: 1 },
                Site::Oscillator { bath: 0, n: 0 },
                Site::System { index: 0 },
                Site::System { index: 1 },
                Site::Oscillator { bath: 1, n: 0 },
                Site::Oscillator { bath: 1, n: 1 },
            ]
        );
    }

    #[test]
    fn mixed_state_is_rejected() {
        let mut m = ModelSpec::dephasing(SpectralDensity::<f64>::wscp(), 0.0);
        m.initial_state = InitialState::DensityMatrix {
            entries: vec![(0.5, 0.0), (0.0, 0.0), (0.0, 0.0), (0.5, 0.0)],
        };
        assert!(matches!(m.initial_amplitudes(), Err(Error::Unsupported(_))));
        m.initial_state = InitialState::DensityMatrix {
            entries: vec![(0.5, 0.0), (0.5, 0.0), (0.5, 0.0), (0.5, 0.0)],
        };
        let a = m.initial_amplitudes().unwrap();
        assert!((a[0].norm() - 0.5f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn bath_count_checked() {
        let mut m = ModelSpec::dimer(SpectralDensity::<f64>::wscp(), 300.0, 69.0);
        assert!(m.validate().is_ok());
        m.baths.pop();
        assert!(m.validate().is_err());
    }

    #[test]
    fn model_json_shape() {
        let m = ModelSpec::dimer(SpectralDensity::<f64>::wscp_background(), 77.0, 69.0);
        let s = serde_json::to_string(&m).unwrap();
        assert!(s.contains("\"kind\":\"dimer\""));
        assert!(s.contains("\"plus-d\""));
        let back: ModelSpec<f64> = serde_json::from_str(&s).unwrap();
        assert_eq!(back, m);
    }
}
