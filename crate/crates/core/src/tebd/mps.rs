use num_complex::Complex;
use num_traits::Zero;

use crate::chainmap::ChainHamiltonianSpec;
use crate::linalg::{hermitian_eigen, Matrix};
use crate::model::{ModelSpec, Site};
use crate::{Error, Real, Result};

/// Pure state of system plus chains.
///
/// Site tensor `i` has shape `(χ_i, d_i, χ_{i+1})`, stored row-major, and is
/// right-canonical; `schmidt[i]` are the Schmidt values of the cut left of
/// site `i`, with `schmidt[0] = schmidt[L] = [1]`.
#[derive(Debug, Clone)]
pub struct MpsState<T> {
    pub(crate) tensors: Vec<Vec<Complex<T>>>,
    pub(crate) physical_dims: Vec<usize>,
    pub(crate) bond_dims: Vec<usize>,
    pub(crate) schmidt: Vec<Vec<T>>,
    pub(crate) sites: Vec<Site>,
    pub(crate) discarded: T,
    pub(crate) truncation_log: Vec<T>,
}

impl<T: Real> MpsState<T> {
    pub fn len(&self) -> usize {
        self.tensors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tensors.is_empty()
    }

    pub fn physical_dims(&self) -> &[usize] {
        &self.physical_dims
    }

    /// `χ_0 … χ_L`; both ends are 1.
    pub fn bond_dims(&self) -> &[usize] {
        &self.bond_dims
    }

    pub fn max_bond_dim(&self) -> usize {
        self.bond_dims.iter().copied().max().unwrap_or(1)
    }

    pub fn sites(&self) -> &[Site] {
        &self.sites
    }

    pub fn site_of(&self, site: Site) -> Option<usize> {
        self.sites.iter().position(|&s| s == site)
    }

    pub fn schmidt_values(&self, bond: usize) -> &[T] {
        &self.schmidt[bond]
    }

    /// Tensor of site `i` and its shape `(χ_left, d, χ_right)`.
    pub fn tensor(&self, i: usize) -> (&[Complex<T>], (usize, usize, usize)) {
        (
            &self.tensors[i],
            (self.bond_dims[i], self.physical_dims[i], self.bond_dims[i + 1]),
        )
    }

    /// Total discarded weight so far.
    pub fn discarded_weight(&self) -> T {
        self.discarded
    }

    /// Cumulative discarded weight after every Trotter step.
    pub fn truncation_log(&self) -> &[T] {
        &self.truncation_log
    }

    /// `⟨ψ|ψ⟩` by full contraction, independent of the canonical form.
    pub fn norm_squared(&self) -> T {
        let mut env = vec![Complex::new(T::one(), T::zero())];
        let mut chi = 1;
        for (i, b) in self.tensors.iter().enumerate() {
            let (d, r) = (self.physical_dims[i], self.bond_dims[i + 1]);
            let mut next = vec![Complex::zero(); r * r];
            for a in 0..chi {
                for a2 in 0..chi {
                    let e = env[a * chi + a2];
                    if e.is_zero() {
                        continue;
                    }
                    for s in 0..d {
                        let row = &b[(a * d + s) * r..(a * d + s + 1) * r];
                        let row2 = &b[(a2 * d + s) * r..(a2 * d + s + 1) * r];
                        for (x, &u) in row.iter().enumerate() {
                            let eu = e * u;
                            for (y, &w) in row2.iter().enumerate() {
                                next[x * r + y] += eu * w.conj();
                            }
                        }
                    }
                }
            }
            env = next;
            chi = r;
        }
        env[0].re
    }

    /// Von Neumann entropy `-Σ s² ln s²` of the cut left of site `bond`.
    pub fn entanglement_entropy(&self, bond: usize) -> T {
        self.schmidt[bond]
            .iter()
            .map(|&s| s * s)
            .filter(|&p| p > T::zero())
            .map(|p| -p * p.ln())
            .sum()
    }

    /// `ρ_{ss'}` of site `i`.
    pub fn reduced_density_matrix(&self, i: usize) -> Matrix<Complex<T>> {
        let (b, (l, d, r)) = self.tensor(i);
        let mut rho = Matrix::zeros(d, d);
        for a in 0..l {
            let w = self.schmidt[i][a] * self.schmidt[i][a];
            for s in 0..d {
                for s2 in 0..d {
                    let mut acc = Complex::zero();
                    for c in 0..r {
                        acc += b[(a * d + s) * r + c] * b[(a * d + s2) * r + c].conj();
                    }
                    rho.set(s, s2, rho.get(s, s2) + acc * w);
                }
            }
        }
        rho
    }

    /// Reduced density matrix of sites `(i, i+1)` in the basis `s_i d_{i+1} + s_{i+1}`.
    pub fn reduced_density_matrix_pair(&self, i: usize) -> Matrix<Complex<T>> {
        let theta = self.two_site(i);
        let (l, r) = (self.bond_dims[i], self.bond_dims[i + 2]);
        let dd = self.physical_dims[i] * self.physical_dims[i + 1];
        let mut rho = Matrix::zeros(dd, dd);
        for a in 0..l {
            let w = self.schmidt[i][a] * self.schmidt[i][a];
            for p in 0..dd {
                for q in 0..dd {
                    let mut acc = Complex::zero();
                    for c in 0..r {
                        acc += theta[(a * dd + p) * r + c] * theta[(a * dd + q) * r + c].conj();
                    }
                    rho.set(p, q, rho.get(p, q) + acc * w);
                }
            }
        }
        rho
    }

    /// `⟨ψ|H|ψ⟩` summed over the bond Hamiltonians.
    pub fn energy(&self, ham: &ChainHamiltonianSpec<T>) -> T {
        (0..ham.num_bonds())
            .map(|b| {
                let rho = self.reduced_density_matrix_pair(b);
                let h = ham.bond_hamiltonian(b);
                trace_product(&rho, &h)
            })
            .sum()
    }

    /// `θ[a, (s_i s_{i+1}), c] = Σ_b B_i[a, s_i, b] B_{i+1}[b, s_{i+1}, c]`.
    pub(crate) fn two_site(&self, i: usize) -> Vec<Complex<T>> {
        let (l, m, r) = (self.bond_dims[i], self.bond_dims[i + 1], self.bond_dims[i + 2]);
        let (d1, d2) = (self.physical_dims[i], self.physical_dims[i + 1]);
        let (bl, br) = (&self.tensors[i], &self.tensors[i + 1]);
        let width = d2 * r;
        let mut theta = vec![Complex::zero(); l * d1 * width];
        for row in 0..l * d1 {
            let out = &mut theta[row * width..(row + 1) * width];
            for b in 0..m {
                let x = bl[row * m + b];
                if x.is_zero() {
                    continue;
                }
                for (o, &y) in out.iter_mut().zip(&br[b * width..(b + 1) * width]) {
                    *o += x * y;
                }
            }
        }
        theta
    }
}

/// `Re Tr(ρ O)`.
pub(crate) fn trace_product<T: Real>(rho: &Matrix<Complex<T>>, op: &Matrix<T>) -> T {
    let n = rho.rows();
    let mut acc = T::zero();
    for s in 0..n {
        for s2 in 0..n {
            acc += (rho.get(s, s2) * op.get(s2, s)).re;
        }
    }
    acc
}

/// Product of the system's initial state and the vacuum on every chain site.
/// The two dimer sites carry their Schmidt decomposition on the bond between
/// them.
pub fn init_vacuum<T: Real>(model: &ModelSpec<T>, ham: &ChainHamiltonianSpec<T>) -> Result<MpsState<T>> {
    if model.kind != ham.kind {
        return Err(Error::domain("model and chain Hamiltonian describe different systems"));
    }
    let amps = model.initial_amplitudes()?;
    let n_sites = ham.num_sites();
    let one = Complex::new(T::one(), T::zero());
    let mut tensors = Vec::with_capacity(n_sites);
    let mut bond_dims = vec![1; n_sites + 1];
    let mut schmidt = vec![vec![T::one()]; n_sites + 1];
    for (i, site) in ham.sites.iter().enumerate() {
        let d = ham.local_dims[i];
        let mut t = vec![Complex::zero(); d];
        if let Site::Oscillator { .. } = site {
            t[0] = one;
        }
        tensors.push(t);
    }
    match model.system_sites() {
        1 => {
            let s = ham.site_of(Site::System { index: 0 }).unwrap();
            tensors[s] = amps;
        }
        2 => {
            let l = ham.site_of(Site::System { index: 0 }).unwrap();
            let (left, right, values) = schmidt_pair(&amps)?;
            let k = values.len();
            bond_dims[l + 1] = k;
            schmidt[l + 1] = values;
            tensors[l] = left;
            tensors[l + 1] = right;
            debug_assert!(k >= 1);
        }
        n => return Err(Error::Unsupported(format!("{n} system sites"))),
    }
    Ok(MpsState {
        tensors,
        physical_dims: ham.local_dims.clone(),
        bond_dims,
        schmidt,
        sites: ham.sites.clone(),
        discarded: T::zero(),
        truncation_log: Vec::new(),
    })
}

/// Schmidt decomposition of a normalized two-qubit state `ψ[2 s_L + s_R]`:
/// left tensor `(1, 2, k)` holding `u_k s_k`, right tensor `(k, 2, 1)`
/// holding `v_k`, and the Schmidt values.
/// Left vectors, right vectors and Schmidt values of a two-site amplitude.
type SchmidtPair<T> = (Vec<Complex<T>>, Vec<Complex<T>>, Vec<T>);

fn schmidt_pair<T: Real>(amps: &[Complex<T>]) -> Result<SchmidtPair<T>> {
    let psi = Matrix::from_vec(2, 2, amps.to_vec());
    let gram = psi.matmul(&psi.adjoint());
    let eig = hermitian_eigen(&gram)?;
    let mut kept = Vec::new();
    for j in (0..2).rev() {
        let p = eig.values[j];
        if p > T::lit(1e-28) {
            kept.push((j, p.sqrt()));
        }
    }
    let k = kept.len();
    let mut left = vec![Complex::zero(); 2 * k];
    let mut right = vec![Complex::zero(); k * 2];
    let mut values = Vec::with_capacity(k);
    for (kk, &(j, s)) in kept.iter().enumerate() {
        for sl in 0..2 {
            left[sl * k + kk] = eig.vectors.get(sl, j) * s;
        }
        for sr in 0..2 {
            let mut v = Complex::zero();
            for sl in 0..2 {
                v += eig.vectors.get(sl, j).conj() * psi.get(sl, sr);
            }
            right[kk * 2 + sr] = v / s;
        }
        values.push(s);
    }
    Ok((left, right, values))
}
