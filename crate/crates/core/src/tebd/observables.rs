use num_complex::Complex;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::linalg::Matrix;
use crate::model::{ops, Site};
use crate::{Error, Real, Result};

use super::mps::{trace_product, MpsState};

/// Quantity sampled during an evolution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "type")]
#[serde(bound(
    serialize = "T: Serialize",
    deserialize = "T: Real + DeserializeOwned"
))]
pub enum ObservableSpec<T> {
    SigmaX { system: usize },
    SigmaY { system: usize },
    SigmaZ { system: usize },
    /// `|ρ_01|` of a two-level system.
    Coherence { system: usize },
    /// Population of `|+_D⟩ = (|01⟩ + |10⟩)/√2` on the dimer.
    PPlus,
    /// `⟨c_n†c_n⟩` on chain site `n` of bath `bath`.
    Occupation { bath: usize, n: usize },
    /// Real symmetric operator on one site or two adjacent sites, row-major in
    /// the product basis of `sites`.
    Operator { sites: Vec<usize>, matrix: Vec<T> },
}

impl<T: Real> ObservableSpec<T> {
    /// CSV column name.
    pub fn name(&self) -> String {
        match self {
            Self::SigmaX { system } => format!("sigma_x_{system}"),
            Self::SigmaY { system } => format!("sigma_y_{system}"),
            Self::SigmaZ { system } => format!("sigma_z_{system}"),
            Self::Coherence { system } => format!("coherence_{system}"),
            Self::PPlus => "p_plus".into(),
            Self::Occupation { bath, n } => format!("occupation_{bath}_{n}"),
            Self::Operator { sites, .. } => {
                let s: Vec<String> = sites.iter().map(|x| x.to_string()).collect();
                format!("operator_{}", s.join("_"))
            }
        }
    }
}

/// Expectation value of `obs` in `state`.
pub fn measure<T: Real>(state: &MpsState<T>, obs: &ObservableSpec<T>) -> Result<T> {
    let locate = |site: Site| {
        state
            .site_of(site)
            .ok_or_else(|| Error::domain(format!("state has no site {site:?}")))
    };
    match obs {
        ObservableSpec::SigmaX { system } => {
            let i = locate(Site::System { index: *system })?;
            Ok(trace_product(&state.reduced_density_matrix(i), &ops::sigma_x()))
        }
        ObservableSpec::SigmaY { system } => {
            let i = locate(Site::System { index: *system })?;
            let rho = state.reduced_density_matrix(i);
            // Tr(ρ σ_y) = 2 Im ρ_01
            Ok(T::lit(2.0) * rho.get(0, 1).im)
        }
        ObservableSpec::SigmaZ { system } => {
            let i = locate(Site::System { index: *system })?;
            Ok(trace_product(&state.reduced_density_matrix(i), &ops::sigma_z()))
        }
        ObservableSpec::Coherence { system } => {
            let i = locate(Site::System { index: *system })?;
            Ok(state.reduced_density_matrix(i).get(0, 1).norm())
        }
        ObservableSpec::PPlus => {
            let l = locate(Site::System { index: 0 })?;
            let r = locate(Site::System { index: 1 })?;
            if r != l + 1 {
                return Err(Error::Unsupported("dimer sites are not adjacent".into()));
            }
            let rho = state.reduced_density_matrix_pair(l);
            let half = T::lit(0.5);
            let p: Complex<T> = (rho.get(1, 1) + rho.get(2, 2) + rho.get(1, 2) + rho.get(2, 1)) * half;
            Ok(p.re)
        }
        ObservableSpec::Occupation { bath, n } => {
            let i = locate(Site::Oscillator { bath: *bath, n: *n })?;
            let d = state.physical_dims[i];
            Ok(trace_product(&state.reduced_density_matrix(i), &ops::number(d)))
        }
        ObservableSpec::Operator { sites, matrix } => operator_expectation(state, sites, matrix),
    }
}

fn operator_expectation<T: Real>(state: &MpsState<T>, sites: &[usize], matrix: &[T]) -> Result<T> {
    if sites.iter().any(|&s| s >= state.len()) {
        return Err(Error::domain("operator site out of range"));
    }
    let (dim, rho) = match *sites {
        [i] => (state.physical_dims[i], state.reduced_density_matrix(i)),
        [i, j] if j == i + 1 => (
            state.physical_dims[i] * state.physical_dims[j],
            state.reduced_density_matrix_pair(i),
        ),
        [_, _] => {
            return Err(Error::Unsupported(
                "two-site observables must act on adjacent sites".into(),
            ))
        }
        _ => {
            return Err(Error::Unsupported(
                "observables act on one or two sites".into(),
            ))
        }
    };
    if matrix.len() != dim * dim {
        return Err(Error::domain(format!(
            "operator needs {} entries, got {}",
            dim * dim,
            matrix.len()
        )));
    }
    let op = Matrix::from_vec(dim, dim, matrix.to_vec());
    Ok(trace_product(&rho, &op))
}
