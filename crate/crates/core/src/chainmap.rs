//! Chain mapping: recurrence coefficients of the polynomials orthogonal with
//! respect to `dμ(ω) = J(ω) dω`, and the nearest-neighbour chain Hamiltonian
//! built from them.
//!
//! The measure is discretized by composite Gauss–Legendre panels and the
//! Jacobi matrix is obtained by Lanczos on the diagonal node matrix with the
//! square-root weights as starting vector, with full reorthogonalization.
//! The orthogonal polynomials themselves are never formed.

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::linalg::Matrix;
use crate::model::{layout, ops, ModelKind, ModelSpec, Site};
use crate::quadrature::{partition, GaussLegendre};
use crate::spectral::{SpectralDensity, ThermalizedSD};
use crate::{Error, Real, Result};

/// Where a set of chain coefficients came from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "type")]
#[serde(bound(
    serialize = "T: Serialize",
    deserialize = "T: Real + DeserializeOwned"
))]
pub enum MeasureDescriptor<T> {
    SpectralDensity { density: SpectralDensity<T> },
    Thermalized { density: SpectralDensity<T>, temperature: T },
    Uniform { lo: T, hi: T },
    Discrete { atoms: usize },
}

/// A positive measure with finite support.
pub trait Measure<T: Real> {
    fn density(&self, x: T) -> T;
    fn support(&self) -> (T, T);
    /// Sorted partition of the support including both ends.
    fn breakpoints(&self) -> Vec<T>;
    fn descriptor(&self) -> MeasureDescriptor<T>;

    /// Nodes and weights when the measure is a finite sum of atoms.
    fn atoms(&self) -> Option<(Vec<T>, Vec<T>)> {
        None
    }
}

impl<T: Real> Measure<T> for SpectralDensity<T> {
    fn density(&self, x: T) -> T {
        SpectralDensity::density(self, x)
    }
    fn support(&self) -> (T, T) {
        (T::zero(), self.cutoff())
    }
    fn breakpoints(&self) -> Vec<T> {
        SpectralDensity::breakpoints(self)
    }
    fn descriptor(&self) -> MeasureDescriptor<T> {
        MeasureDescriptor::SpectralDensity {
            density: self.clone(),
        }
    }
}

impl<T: Real> Measure<T> for ThermalizedSD<T> {
    fn density(&self, x: T) -> T {
        ThermalizedSD::density(self, x)
    }
    fn support(&self) -> (T, T) {
        ThermalizedSD::support(self)
    }
    fn breakpoints(&self) -> Vec<T> {
        ThermalizedSD::breakpoints(self)
    }
    fn descriptor(&self) -> MeasureDescriptor<T> {
        MeasureDescriptor::Thermalized {
            density: self.base().clone(),
            temperature: self.temperature(),
        }
    }
}

/// Constant unit weight on `[lo, hi]`.
#[derive(Debug, Clone, Copy)]
pub struct Uniform<T> {
    pub lo: T,
    pub hi: T,
}

impl<T: Real> Measure<T> for Uniform<T> {
    fn density(&self, x: T) -> T {
        if x >= self.lo && x <= self.hi {
            T::one()
        } else {
            T::zero()
        }
    }
    fn support(&self) -> (T, T) {
        (self.lo, self.hi)
    }
    fn breakpoints(&self) -> Vec<T> {
        vec![self.lo, self.hi]
    }
    fn descriptor(&self) -> MeasureDescriptor<T> {
        MeasureDescriptor::Uniform {
            lo: self.lo,
            hi: self.hi,
        }
    }
}

/// Finite sum of point masses.
#[derive(Debug, Clone)]
pub struct Discrete<T> {
    pub nodes: Vec<T>,
    pub weights: Vec<T>,
}

impl<T: Real> Measure<T> for Discrete<T> {
    fn density(&self, _x: T) -> T {
        T::zero()
    }
    fn support(&self) -> (T, T) {
        let lo = self.nodes.iter().copied().fold(T::infinity(), T::min);
        let hi = self.nodes.iter().copied().fold(T::neg_infinity(), T::max);
        (lo, hi)
    }
    fn breakpoints(&self) -> Vec<T> {
        let (lo, hi) = self.support();
        vec![lo, hi]
    }
    fn descriptor(&self) -> MeasureDescriptor<T> {
        MeasureDescriptor::Discrete {
            atoms: self.nodes.len(),
        }
    }
    fn atoms(&self) -> Option<(Vec<T>, Vec<T>)> {
        Some((self.nodes.clone(), self.weights.clone()))
    }
}

/// Node budget for the discretized measure.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Discretization {
    /// Gauss–Legendre nodes per panel.
    pub nodes_per_panel: usize,
    /// Total nodes per requested chain site.
    pub nodes_per_site: usize,
    /// Lower bound on total nodes.
    pub min_nodes: usize,
}

impl Default for Discretization {
    fn default() -> Self {
        Self {
            nodes_per_panel: 24,
            nodes_per_site: 40,
            min_nodes: 4000,
        }
    }
}

impl Discretization {
    /// The same layout with twice as many panels.
    pub fn refined(self) -> Self {
        Self {
            nodes_per_site: 2 * self.nodes_per_site,
            min_nodes: 2 * self.min_nodes,
            ..self
        }
    }

    /// Nodes and weights `(x_j, w_j J(x_j))` approximating `dμ`.
    pub fn discretize<T: Real, M: Measure<T> + ?Sized>(
        &self,
        measure: &M,
        sites: usize,
    ) -> (Vec<T>, Vec<T>) {
        if let Some(atoms) = measure.atoms() {
            return atoms;
        }
        let (lo, hi) = measure.support();
        let segments = partition(lo, hi, measure.breakpoints());
        let total_nodes = (self.nodes_per_site * sites).max(self.min_nodes);
        let panels_total = total_nodes.div_ceil(self.nodes_per_panel).max(1);
        let width = hi - lo;
        let rule = GaussLegendre::<T>::new(self.nodes_per_panel);
        let mut xs = Vec::with_capacity(total_nodes + segments.len() * self.nodes_per_panel);
        let mut ws = Vec::with_capacity(xs.capacity());
        for seg in segments.windows(2) {
            let (a, b) = (seg[0], seg[1]);
            let share = ((b - a) / width * T::lit(panels_total as f64))
                .ceil()
                .to_usize()
                .unwrap_or(1)
                .max(1);
            let h = (b - a) / T::lit(share as f64);
            for p in 0..share {
                let pa = a + h * T::lit(p as f64);
                let pb = if p + 1 == share { b } else { pa + h };
                for (x, w) in rule.mapped(pa, pb) {
                    let dens = measure.density(x);
                    if dens > T::zero() {
                        xs.push(x);
                        ws.push(w * dens);
                    }
                }
            }
        }
        (xs, ws)
    }
}

/// Site energies `ω_n` and couplings `κ_n` of the mapped chain, `n = 0..N`.
/// `κ_0` couples the system to site 0, `κ_n` (`n ≥ 1`) couples sites `n-1`
/// and `n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(
    serialize = "T: Serialize",
    deserialize = "T: Real + DeserializeOwned"
))]
pub struct ChainCoefficients<T> {
    pub omegas: Vec<T>,
    pub kappas: Vec<T>,
    pub measure: MeasureDescriptor<T>,
}

impl<T: Real> ChainCoefficients<T> {
    pub fn len(&self) -> usize {
        self.omegas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.omegas.is_empty()
    }

    pub fn system_coupling(&self) -> T {
        self.kappas[0]
    }

    /// The first `n` sites.
    pub fn truncated(&self, n: usize) -> Result<Self> {
        if n > self.len() {
            return Err(Error::domain(format!(
                "requested {n} sites from {} coefficients",
                self.len()
            )));
        }
        Ok(Self {
            omegas: self.omegas[..n].to_vec(),
            kappas: self.kappas[..n].to_vec(),
            measure: self.measure.clone(),
        })
    }

    /// Copy with `κ_0` replaced.
    pub fn with_system_coupling(&self, kappa0: T) -> Self {
        let mut out = self.clone();
        if let Some(k) = out.kappas.first_mut() {
            *k = kappa0;
        }
        out
    }

    /// Jacobi matrix `J_{nn} = ω_n`, `J_{n-1,n} = κ_n` of the first `n` sites.
    pub fn jacobi_matrix(&self, n: usize) -> Matrix<T> {
        Matrix::from_fn(n, n, |r, c| {
            if r == c {
                self.omegas[r]
            } else if c == r + 1 {
                self.kappas[c]
            } else if r == c + 1 {
                self.kappas[r]
            } else {
                T::zero()
            }
        })
    }

    pub fn validate(&self) -> Result<()> {
        if self.omegas.len() != self.kappas.len() {
            return Err(Error::domain("omegas and kappas differ in length"));
        }
        if self.omegas.iter().chain(&self.kappas).any(|x| !x.is_finite()) {
            return Err(Error::domain("non-finite chain coefficient"));
        }
        if self.kappas.iter().skip(1).any(|&k| k <= T::zero()) {
            return Err(Error::domain("chain couplings must be positive"));
        }
        Ok(())
    }
}

/// Recurrence coefficients for the first `n` chain sites with the default
/// discretization.
pub fn recurrence_coefficients<T: Real, M: Measure<T> + ?Sized>(
    measure: &M,
    n: usize,
) -> Result<ChainCoefficients<T>> {
    recurrence_coefficients_with(measure, n, Discretization::default())
}

pub fn recurrence_coefficients_with<T: Real, M: Measure<T> + ?Sized>(
    measure: &M,
    n: usize,
    disc: Discretization,
) -> Result<ChainCoefficients<T>> {
    if n == 0 {
        return Err(Error::domain("chain length must be at least 1"));
    }
    let (lo, hi) = measure.support();
    if !(lo.is_finite() && hi.is_finite() && hi >= lo) {
        return Err(Error::domain("measure needs a finite support"));
    }
    let (nodes, weights) = disc.discretize(measure, n);
    let (omegas, kappas) = lanczos(&nodes, &weights, n)?;
    Ok(ChainCoefficients {
        omegas,
        kappas,
        measure: measure.descriptor(),
    })
}

/// Lanczos on `diag(nodes)` from `√weights`; returns `(α_n, κ_n)` with
/// `κ_0 = √(Σ w)` and `κ_n = √β_n`.
fn lanczos<T: Real>(nodes: &[T], weights: &[T], n: usize) -> Result<(Vec<T>, Vec<T>)> {
    let mass: T = weights.iter().copied().sum();
    if !(mass > T::zero() && mass.is_finite()) {
        return Err(Error::domain("measure has zero or non-finite mass"));
    }
    let m = nodes.len();
    let scale = nodes.iter().fold(T::zero(), |acc, x| acc.max(x.abs()));
    let floor = T::lit(100.0) * T::epsilon() * scale.max(T::min_positive_value());
    let mut basis: Vec<Vec<T>> = Vec::with_capacity(n);
    let q0: Vec<T> = weights.iter().map(|&w| (w / mass).sqrt()).collect();
    basis.push(q0);
    let mut alphas = Vec::with_capacity(n);
    let mut kappas = vec![mass.sqrt()];
    for k in 0..n {
        let q = &basis[k];
        let alpha: T = q.iter().zip(nodes).map(|(&qi, &x)| x * qi * qi).sum();
        alphas.push(alpha);
        if k + 1 == n {
            break;
        }
        let mut r: Vec<T> = (0..m).map(|i| (nodes[i] - alpha) * q[i]).collect();
        if k > 0 {
            let b = kappas[k];
            let prev = &basis[k - 1];
            for i in 0..m {
                r[i] -= b * prev[i];
            }
        }
        for _ in 0..2 {
            for v in &basis {
                let dot: T = v.iter().zip(&r).map(|(&a, &b)| a * b).sum();
                for (ri, &vi) in r.iter_mut().zip(v) {
                    *ri -= dot * vi;
                }
            }
        }
        let norm = r.iter().map(|x| *x * *x).sum::<T>().sqrt();
        if !(norm > floor) {
            return Err(Error::RecurrenceBreakdown {
                index: k + 1,
                beta: (norm * norm).as_f64(),
            });
        }
        kappas.push(norm);
        for ri in r.iter_mut() {
            *ri /= norm;
        }
        basis.push(r);
    }
    Ok((alphas, kappas))
}

/// One term of the chain Hamiltonian in the truncated local bases.
#[derive(Debug, Clone, PartialEq)]
pub enum Term<T> {
    /// Operator on a single site.
    OnSite { site: usize, op: Matrix<T> },
    /// `left ⊗ right` on sites `(site, site + 1)`.
    Bond {
        site: usize,
        left: Matrix<T>,
        right: Matrix<T>,
    },
}

/// Operator through which a two-level system couples to its chain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CouplingOperator {
    /// `A = (1 + σ_z)/2`.
    ExcitedProjector,
}

/// Nearest-neighbour Hamiltonian of system plus chains on a 1D layout.
#[derive(Debug, Clone)]
pub struct ChainHamiltonianSpec<T> {
    pub coefficients: Vec<ChainCoefficients<T>>,
    pub kind: ModelKind,
    pub system_coupling_operator: CouplingOperator,
    pub sites: Vec<Site>,
    /// Local Hilbert dimension of every site in layout order.
    pub local_dims: Vec<usize>,
    pub terms: Vec<Term<T>>,
}

/// Builds the term list of `H_S + Σ κ_0 A (c_0 + c_0†) + Σ ω_n c_n†c_n +
/// Σ κ_n (c_n†c_{n-1} + h.c.)`, with `chain_dims[n]` Fock levels on chain
/// site `n` of every bath.
pub fn assemble_chain<T: Real>(
    coefficients: &[ChainCoefficients<T>],
    model: &ModelSpec<T>,
    chain_dims: &[usize],
) -> Result<ChainHamiltonianSpec<T>> {
    model.validate()?;
    if coefficients.len() != model.baths.len() {
        return Err(Error::domain(format!(
            "model has {} baths but {} coefficient sets were given",
            model.baths.len(),
            coefficients.len()
        )));
    }
    let n = chain_dims.len();
    if n == 0 {
        return Err(Error::domain("chain must have at least one site"));
    }
    if let Some(&d) = chain_dims.iter().find(|&&d| d < 2) {
        return Err(Error::domain(format!("local dimension {d} < 2")));
    }
    for c in coefficients {
        c.validate()?;
        if c.len() < n {
            return Err(Error::domain(format!(
                "chain of {n} sites needs {n} coefficients, got {}",
                c.len()
            )));
        }
    }
    let sites = layout(model.kind, n);
    let local_dims: Vec<usize> = sites
        .iter()
        .map(|s| match *s {
            Site::System { .. } => 2,
            Site::Oscillator { n, .. } => chain_dims[n],
        })
        .collect();
    let pos = |target: Site| sites.iter().position(|&s| s == target).unwrap();

    let mut terms = Vec::new();
    let half_eps = model.system_energy * T::lit(0.5);
    for s in 0..model.system_sites() {
        if half_eps != T::zero() {
            terms.push(Term::OnSite {
                site: pos(Site::System { index: s }),
                op: ops::sigma_z::<T>().scale(half_eps),
            });
        }
    }
    if model.kind == ModelKind::Dimer {
        let lam = model.cross_coupling;
        let l = pos(Site::System { index: 0 });
        terms.push(Term::Bond {
            site: l,
            left: ops::sigma_plus::<T>().scale(lam),
            right: ops::sigma_minus(),
        });
        terms.push(Term::Bond {
            site: l,
            left: ops::sigma_minus::<T>().scale(lam),
            right: ops::sigma_plus(),
        });
    }
    for (b, coeffs) in coefficients.iter().enumerate() {
        let sys = pos(Site::System { index: b });
        let c0 = pos(Site::Oscillator { bath: b, n: 0 });
        let x0 = ops::position::<T>(chain_dims[0]).scale(coeffs.kappas[0]);
        let a = ops::excited_projector::<T>();
        terms.push(if c0 > sys {
            Term::Bond {
                site: sys,
                left: a,
                right: x0,
            }
        } else {
            Term::Bond {
                site: c0,
                left: x0,
                right: a,
            }
        });
        for k in 0..n {
            let site = pos(Site::Oscillator { bath: b, n: k });
            terms.push(Term::OnSite {
                site,
                op: ops::number::<T>(chain_dims[k]).scale(coeffs.omegas[k]),
            });
            if k > 0 {
                let prev = pos(Site::Oscillator { bath: b, n: k - 1 });
                let left_site = site.min(prev);
                let (dl, dr) = (local_dims[left_site], local_dims[left_site + 1]);
                let kap = coeffs.kappas[k];
                terms.push(Term::Bond {
                    site: left_site,
                    left: ops::creation::<T>(dl).scale(kap),
                    right: ops::annihilation(dr),
                });
                terms.push(Term::Bond {
                    site: left_site,
                    left: ops::annihilation::<T>(dl).scale(kap),
                    right: ops::creation(dr),
                });
            }
        }
    }
    Ok(ChainHamiltonianSpec {
        coefficients: coefficients.iter().map(|c| c.truncated(n)).collect::<Result<_>>()?,
        kind: model.kind,
        system_coupling_operator: CouplingOperator::ExcitedProjector,
        sites,
        local_dims,
        terms,
    })
}

impl<T: Real> ChainHamiltonianSpec<T> {
    pub fn num_sites(&self) -> usize {
        self.sites.len()
    }

    pub fn num_bonds(&self) -> usize {
        self.sites.len().saturating_sub(1)
    }

    pub fn site_of(&self, site: Site) -> Option<usize> {
        self.sites.iter().position(|&s| s == site)
    }

    /// Two-site Hamiltonian of bond `(b, b+1)`. On-site terms are assigned
    /// to the bond on their right, the last site's to the bond on its left.
    pub fn bond_hamiltonian(&self, b: usize) -> Matrix<T> {
        let (dl, dr) = (self.local_dims[b], self.local_dims[b + 1]);
        let last = self.num_sites() - 1;
        let mut h = Matrix::<T>::zeros(dl * dr, dl * dr);
        for term in &self.terms {
            match term {
                Term::OnSite { site, op } => {
                    if *site == b && *site < last {
                        h = h.add(&op.kron(&Matrix::identity(dr)));
                    } else if *site == b + 1 && *site == last {
                        h = h.add(&Matrix::identity(dl).kron(op));
                    }
                }
                Term::Bond { site, left, right } if *site == b => {
                    h = h.add(&left.kron(right));
                }
                Term::Bond { .. } => {}
            }
        }
        h
    }
}
