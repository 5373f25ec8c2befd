//! Reference solutions: the exact decoherence function of the pure-dephasing
//! model and exact diagonalization of small truncated system–chain models.

use num_complex::Complex;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::chainmap::ChainCoefficients;
use crate::linalg::{hermitian_eigen, Eigen, Matrix};
use crate::model::{layout, ops, ModelKind, ModelSpec, Site};
use crate::quadrature::{partition, Integrator, Tolerance};
use crate::spectral::{oscillation_breakpoints, SpectralDensity};
use crate::tebd::{EvolutionConfig, ObservableSpec, TimeSeries};
use crate::units::{inverse_temperature, thermal_energy, RAD_PER_PS_PER_CM};
use crate::{Error, Real, Result};

/// Largest Hilbert-space dimension [`ExactPropagator`] accepts.
pub const ED_DIMENSION_CAP: usize = 4096;

/// `γ(t)` and `θ(t) = e^{-γ(t)}/2` on a time grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecoherenceCurve<T> {
    pub times: Vec<T>,
    pub gamma: Vec<T>,
    pub theta: Vec<T>,
    /// Quadrature error estimate of every `γ`.
    pub error: Vec<T>,
}

/// Decoherence function `γ(t) = ∫ J(ω) coth(ω/2k_BT) (1 − cos ωt)/ω² dω`
/// of a two-level system coupled through `(1 + σ_z)/2`.
pub fn dephasing_coherence<T: Real>(
    sd: &SpectralDensity<T>,
    kelvin: T,
    times: &[T],
) -> Result<DecoherenceCurve<T>> {
    dephasing_coherence_with(sd, kelvin, times, Tolerance::new(T::lit(1e-12), T::lit(1e-12)))
}

pub fn dephasing_coherence_with<T: Real>(
    sd: &SpectralDensity<T>,
    kelvin: T,
    times: &[T],
    tol: Tolerance<T>,
) -> Result<DecoherenceCurve<T>> {
    if !(kelvin.is_finite() && kelvin >= T::zero()) {
        return Err(Error::domain(format!("temperature must be >= 0 K, got {kelvin}")));
    }
    let beta = inverse_temperature(kelvin);
    let eta = sd.low_frequency_slope();
    let c = T::lit(RAD_PER_PS_PER_CM);
    let q = Integrator::new(20, tol);
    let two = T::lit(2.0);
    let mut curve = DecoherenceCurve {
        times: times.to_vec(),
        gamma: Vec::with_capacity(times.len()),
        theta: Vec::with_capacity(times.len()),
        error: Vec::with_capacity(times.len()),
    };
    for &t in times {
        if !(t.is_finite() && t >= T::zero()) {
            return Err(Error::domain(format!("times must be finite and >= 0, got {t}")));
        }
        let ct = c * t;
        let f = |w: T| {
            if w <= T::zero() {
                // J/ω → η, coth(βω/2) → 2/(βω), (1 − cos)/ω² → (ct)²/2
                return if beta.is_infinite() {
                    T::zero()
                } else {
                    eta * thermal_energy(kelvin) * ct * ct
                };
            }
            let coth = if beta.is_infinite() {
                T::one()
            } else {
                T::one() / (beta * w / two).tanh()
            };
            let s = (w * ct / two).sin();
            sd.density(w) * coth * two * s * s / (w * w)
        };
        let pts = partition(
            T::zero(),
            sd.cutoff(),
            sd.peak_breakpoints()
                .into_iter()
                .chain(oscillation_breakpoints(T::zero(), sd.cutoff(), t)),
        );
        let est = q.integrate(f, &pts)?;
        curve.gamma.push(est.value);
        curve.theta.push((-est.value).exp() / two);
        curve.error.push(est.error);
    }
    Ok(curve)
}

/// Exact propagator of a truncated system–chain model, with the Hamiltonian
/// assembled directly on the full product space.
#[derive(Debug, Clone)]
pub struct ExactPropagator<T> {
    pub sites: Vec<Site>,
    pub dims: Vec<usize>,
    pub hamiltonian: Matrix<T>,
    eig: Eigen<T, T>,
    /// Initial state in the eigenbasis.
    coefficients: Vec<Complex<T>>,
}

impl<T: Real> ExactPropagator<T> {
    /// `coeffs[b]` drives bath `b`; chain site `n` carries `chain_dims[n]`
    /// Fock levels.
    pub fn new(model: &ModelSpec<T>, coeffs: &[ChainCoefficients<T>], chain_dims: &[usize]) -> Result<Self> {
        model.validate()?;
        if coeffs.len() != model.baths.len() {
            return Err(Error::domain("one coefficient set per bath is required"));
        }
        let n = chain_dims.len();
        if chain_dims.iter().any(|&d| d < 2) {
            return Err(Error::domain("local dimensions must be >= 2"));
        }
        if coeffs.iter().any(|c| c.len() < n) {
            return Err(Error::domain("not enough chain coefficients"));
        }
        let sites = layout(model.kind, n);
        let dims: Vec<usize> = sites
            .iter()
            .map(|s| match *s {
                Site::System { .. } => 2,
                Site::Oscillator { n, .. } => chain_dims[n],
            })
            .collect();
        let dim = dims.iter().try_fold(1usize, |acc, &d| acc.checked_mul(d)).unwrap_or(usize::MAX);
        if dim > ED_DIMENSION_CAP {
            return Err(Error::DimensionCap {
                dimension: dim,
                cap: ED_DIMENSION_CAP,
            });
        }
        let at = |s: Site| sites.iter().position(|&x| x == s).unwrap();
        let mut h = Matrix::<T>::zeros(dim, dim);
        let half_eps = model.system_energy / T::lit(2.0);
        for s in 0..model.system_sites() {
            add_product(&mut h, &dims, &[(at(Site::System { index: s }), ops::sigma_z())], half_eps);
        }
        if model.kind == ModelKind::Dimer {
            let (l, r) = (at(Site::System { index: 0 }), at(Site::System { index: 1 }));
            let lam = model.cross_coupling;
            add_product(&mut h, &dims, &[(l, ops::sigma_plus()), (r, ops::sigma_minus())], lam);
            add_product(&mut h, &dims, &[(l, ops::sigma_minus()), (r, ops::sigma_plus())], lam);
        }
        for (b, c) in coeffs.iter().enumerate().filter(|_| n > 0) {
            let sys = at(Site::System { index: b });
            let c0 = at(Site::Oscillator { bath: b, n: 0 });
            add_product(
                &mut h,
                &dims,
                &[(sys, ops::excited_projector()), (c0, ops::position(chain_dims[0]))],
                c.kappas[0],
            );
            for k in 0..n {
                let i = at(Site::Oscillator { bath: b, n: k });
                add_product(&mut h, &dims, &[(i, ops::number(chain_dims[k]))], c.omegas[k]);
                if k > 0 {
                    let j = at(Site::Oscillator { bath: b, n: k - 1 });
                    let (dk, dj) = (chain_dims[k], chain_dims[k - 1]);
                    add_product(&mut h, &dims, &[(i, ops::creation(dk)), (j, ops::annihilation(dj))], c.kappas[k]);
                    add_product(&mut h, &dims, &[(i, ops::annihilation(dk)), (j, ops::creation(dj))], c.kappas[k]);
                }
            }
        }

        let amps = model.initial_amplitudes()?;
        let mut psi0 = vec![Complex::zero(); dim];
        // oscillators in |0⟩: the index is the system digit(s) times their strides
        let strides = strides(&dims);
        let sys_sites: Vec<usize> = (0..model.system_sites()).map(|s| at(Site::System { index: s })).collect();
        for (idx, &a) in amps.iter().enumerate() {
            let mut flat = 0;
            for (k, &site) in sys_sites.iter().enumerate() {
                let bit = (idx >> (sys_sites.len() - 1 - k)) & 1;
                flat += bit * strides[site];
            }
            psi0[flat] = a;
        }
        let eig = hermitian_eigen(&h)?;
        let coefficients = (0..dim)
            .map(|k| {
                (0..dim).fold(Complex::zero(), |acc, r| acc + psi0[r] * eig.vectors.get(r, k))
            })
            .collect();
        Ok(Self {
            sites,
            dims,
            hamiltonian: h,
            eig,
            coefficients,
        })
    }

    pub fn dimension(&self) -> usize {
        self.hamiltonian.rows()
    }

    /// `e^{-iHt}|ψ(0)⟩`, `t` in ps.
    pub fn state_at(&self, t: T) -> Vec<Complex<T>> {
        let n = self.dimension();
        let c = T::lit(RAD_PER_PS_PER_CM) * t;
        let rotated: Vec<Complex<T>> = self
            .coefficients
            .iter()
            .zip(&self.eig.values)
            .map(|(&a, &l)| a * Complex::from_polar(T::one(), -l * c))
            .collect();
        (0..n)
            .map(|r| {
                let row = self.eig.vectors.row(r);
                row.iter().zip(&rotated).fold(Complex::zero(), |acc, (&v, &a)| acc + a * v)
            })
            .collect()
    }

    /// `⟨H⟩`, time independent.
    pub fn energy(&self) -> T {
        self.coefficients
            .iter()
            .zip(&self.eig.values)
            .map(|(a, &l)| a.norm_sqr() * l)
            .sum()
    }

    /// `⟨ψ|H|ψ⟩` of an arbitrary state vector.
    pub fn energy_of(&self, psi: &[Complex<T>]) -> T {
        let n = self.dimension();
        let mut acc = T::zero();
        for r in 0..n {
            let hr = self.hamiltonian.row(r);
            let mut s = Complex::zero();
            for (c, &x) in hr.iter().enumerate() {
                if x != T::zero() {
                    s += psi[c] * x;
                }
            }
            acc += (psi[r].conj() * s).re;
        }
        acc
    }

    /// Reduced density matrix of the contiguous sites `first..first + count`.
    pub fn reduced_density_matrix(&self, psi: &[Complex<T>], first: usize, count: usize) -> Matrix<Complex<T>> {
        let left: usize = self.dims[..first].iter().product();
        let block: usize = self.dims[first..first + count].iter().product();
        let right: usize = self.dims[first + count..].iter().product();
        let mut rho = Matrix::zeros(block, block);
        for l in 0..left {
            for p in 0..block {
                for q in 0..block {
                    let mut acc = Complex::zero();
                    for r in 0..right {
                        acc += psi[(l * block + p) * right + r] * psi[(l * block + q) * right + r].conj();
                    }
                    rho.set(p, q, rho.get(p, q) + acc);
                }
            }
        }
        rho
    }

    pub fn measure(&self, psi: &[Complex<T>], obs: &ObservableSpec<T>) -> Result<T> {
        let at = |s: Site| {
            self.sites
                .iter()
                .position(|&x| x == s)
                .ok_or_else(|| Error::domain(format!("model has no site {s:?}")))
        };
        let one_site = |i: usize| self.reduced_density_matrix(psi, i, 1);
        Ok(match obs {
            ObservableSpec::SigmaX { system } => {
                let rho = one_site(at(Site::System { index: *system })?);
                T::lit(2.0) * rho.get(0, 1).re
            }
            ObservableSpec::SigmaY { system } => {
                let rho = one_site(at(Site::System { index: *system })?);
                T::lit(2.0) * rho.get(0, 1).im
            }
            ObservableSpec::SigmaZ { system } => {
                let rho = one_site(at(Site::System { index: *system })?);
                rho.get(0, 0).re - rho.get(1, 1).re
            }
            ObservableSpec::Coherence { system } => one_site(at(Site::System { index: *system })?).get(0, 1).norm(),
            ObservableSpec::PPlus => {
                let l = at(Site::System { index: 0 })?;
                let rho = self.reduced_density_matrix(psi, l, 2);
                ((rho.get(1, 1) + rho.get(2, 2) + rho.get(1, 2) + rho.get(2, 1)) * T::lit(0.5)).re
            }
            ObservableSpec::Occupation { bath, n } => {
                let rho = one_site(at(Site::Oscillator { bath: *bath, n: *n })?);
                (0..rho.rows()).map(|k| rho.get(k, k).re * T::lit(k as f64)).sum()
            }
            ObservableSpec::Operator { sites, matrix } => {
                let (first, count) = match **sites {
                    [i] => (i, 1),
                    [i, j] if j == i + 1 => (i, 2),
                    _ => {
                        return Err(Error::Unsupported(
                            "observables act on one site or two adjacent sites".into(),
                        ))
                    }
                };
                if first + count > self.dims.len() {
                    return Err(Error::domain("operator site out of range"));
                }
                let rho = self.reduced_density_matrix(psi, first, count);
                let d = rho.rows();
                if matrix.len() != d * d {
                    return Err(Error::domain("operator has the wrong size"));
                }
                let mut acc = T::zero();
                for p in 0..d {
                    for q in 0..d {
                        acc += (rho.get(p, q) * matrix[q * d + p]).re;
                    }
                }
                acc
            }
        })
    }

    /// Largest Schmidt rank any bond could need, `min(∏ left, ∏ right)`.
    pub fn max_bond_dim(&self) -> usize {
        (1..self.dims.len())
            .map(|b| {
                let l: usize = self.dims[..b].iter().product();
                let r: usize = self.dims[b..].iter().product();
                l.min(r)
            })
            .max()
            .unwrap_or(1)
    }
}

/// Exact evolution sampled at the same times as [`crate::tebd::tebd_evolve`]
/// with the same configuration.
pub fn ed_evolve<T: Real>(
    model: &ModelSpec<T>,
    coeffs: &[ChainCoefficients<T>],
    chain_dims: &[usize],
    cfg: &EvolutionConfig<T>,
) -> Result<TimeSeries<T>> {
    cfg.validate()?;
    let prop = ExactPropagator::new(model, coeffs, chain_dims)?;
    let columns = cfg.observables.iter().map(|o| o.name()).collect();
    let mut series = TimeSeries::new(columns);
    let steps = cfg.steps();
    let mut k = 0;
    loop {
        let t = cfg.dt * T::lit(k as f64);
        let psi = prop.state_at(t);
        let row = cfg
            .observables
            .iter()
            .map(|o| prop.measure(&psi, o))
            .collect::<Result<Vec<_>>>()?;
        series.times.push(t);
        series.values.push(row);
        series.discarded_weight.push(T::zero());
        series.max_bond_dim.push(prop.max_bond_dim());
        if k == steps {
            break;
        }
        k = (k + cfg.stride).min(steps);
    }
    Ok(series)
}

fn strides(dims: &[usize]) -> Vec<usize> {
    let mut s = vec![1; dims.len()];
    for i in (0..dims.len().saturating_sub(1)).rev() {
        s[i] = s[i + 1] * dims[i + 1];
    }
    s
}

/// `h += coeff · ⊗_k op_k` for operators on distinct sites.
fn add_product<T: Real>(h: &mut Matrix<T>, dims: &[usize], factors: &[(usize, Matrix<T>)], coeff: T) {
    if coeff == T::zero() {
        return;
    }
    let strides = strides(dims);
    let dim = h.rows();
    for col in 0..dim {
        // (row, amplitude) images of `col`
        let mut images = vec![(col, coeff)];
        for (site, op) in factors {
            let digit = (col / strides[*site]) % dims[*site];
            let mut next = Vec::new();
            for &(row, amp) in &images {
                let base = row - digit * strides[*site];
                for out in 0..dims[*site] {
                    let x = op.get(out, digit);
                    if x != T::zero() {
                        next.push((base + out * strides[*site], amp * x));
                    }
                }
            }
            images = next;
        }
        for (row, amp) in images {
            h.set(row, col, h.get(row, col) + amp);
        }
    }
}
