use num_complex::Complex;
use num_traits::Zero;
use rayon::prelude::*;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::chainmap::ChainHamiltonianSpec;
use crate::linalg::{hermitian_eigen, Field, Matrix};
use crate::units::RAD_PER_PS_PER_CM;
use crate::{Error, Real, Result};

use super::mps::MpsState;
use super::observables::{measure, ObservableSpec};

/// Largest `‖G†G − 1‖` accepted for a gate in double precision.
pub const UNITARITY_TOLERANCE: f64 = 1e-12;

/// Schmidt weights below this fraction of the total are always dropped.
const WEIGHT_FLOOR: f64 = 1e-24;

/// Gram eigenvalues below this fraction of the largest are recomputed before
/// they are kept.
const REFINE_BELOW: f64 = 1e-8;
const MAX_REFINE_DEPTH: usize = 3;

fn one() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(
    serialize = "T: Serialize",
    deserialize = "T: Real + DeserializeOwned"
))]
pub struct EvolutionConfig<T> {
    /// Trotter step, ps.
    pub dt: T,
    /// Final time, ps.
    pub t_max: T,
    pub chi_max: usize,
    /// Largest relative discarded weight per two-site update.
    pub svd_cutoff: T,
    pub observables: Vec<ObservableSpec<T>>,
    /// Trotter steps between samples.
    #[serde(default = "one")]
    pub stride: usize,
    /// Worker threads for the gate layers.
    #[serde(default = "one")]
    pub threads: usize,
    /// Cumulative discarded weight above which a warning is recorded.
    #[serde(default)]
    pub discarded_budget: Option<T>,
}

impl<T: Real> EvolutionConfig<T> {
    pub fn new(dt: T, t_max: T, chi_max: usize, observables: Vec<ObservableSpec<T>>) -> Self {
        Self {
            dt,
            t_max,
            chi_max,
            svd_cutoff: T::lit(1e-12),
            observables,
            stride: 1,
            threads: 1,
            discarded_budget: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > T::zero()) || !self.dt.is_finite() {
            return Err(Error::domain(format!("dt must be > 0, got {}", self.dt)));
        }
        if !(self.t_max >= T::zero()) || !self.t_max.is_finite() {
            return Err(Error::domain(format!("t_max must be >= 0, got {}", self.t_max)));
        }
        if self.chi_max < 1 {
            return Err(Error::domain("chi_max must be >= 1"));
        }
        if !(self.svd_cutoff >= T::zero() && self.svd_cutoff < T::one()) {
            return Err(Error::domain("svd_cutoff must lie in [0, 1)"));
        }
        if self.stride < 1 {
            return Err(Error::domain("stride must be >= 1"));
        }
        if self.threads < 1 {
            return Err(Error::domain("threads must be >= 1"));
        }
        Ok(())
    }

    pub fn steps(&self) -> usize {
        (self.t_max / self.dt).round().to_usize().unwrap_or(0)
    }
}

/// Sampled observables.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeSeries<T> {
    pub times: Vec<T>,
    pub columns: Vec<String>,
    /// `values[i][j]`: column `j` at `times[i]`.
    pub values: Vec<Vec<T>>,
    pub discarded_weight: Vec<T>,
    pub max_bond_dim: Vec<usize>,
    pub warnings: Vec<String>,
}

impl<T: Real> TimeSeries<T> {
    pub fn new(columns: Vec<String>) -> Self {
        Self {
            times: vec![],
            columns,
            values: vec![],
            discarded_weight: vec![],
            max_bond_dim: vec![],
            warnings: vec![],
        }
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn column(&self, name: &str) -> Option<Vec<T>> {
        let j = self.columns.iter().position(|c| c == name)?;
        Some(self.values.iter().map(|row| row[j]).collect())
    }
}

/// `exp(-i h τ)` for a real symmetric `h` in cm⁻¹ and `τ` in ps.
pub fn gate<T: Real>(h: &Matrix<T>, tau: T) -> Result<Matrix<Complex<T>>> {
    let eig = hermitian_eigen(h)?;
    let n = h.rows();
    let c = T::lit(RAD_PER_PS_PER_CM) * tau;
    let phases: Vec<Complex<T>> = eig.values.iter().map(|&l| Complex::from_polar(T::one(), -l * c)).collect();
    let v = &eig.vectors;
    let g = Matrix::from_fn(n, n, |r, s| {
        let mut acc = Complex::zero();
        for k in 0..n {
            acc += phases[k] * (v.get(r, k) * v.get(s, k));
        }
        acc
    });
    let defect = g.adjoint().matmul(&g).add(&Matrix::identity(n).scale(-Complex::from_real(T::one()))).norm();
    let tol = T::lit(UNITARITY_TOLERANCE).max(T::epsilon() * T::lit(1e4));
    if !(defect <= tol) {
        return Err(Error::domain(format!("gate is not unitary: defect {defect}")));
    }
    Ok(g)
}

/// Gates for every bond at half and full step.
#[derive(Debug, Clone)]
pub struct GateSet<T> {
    pub half: Vec<Matrix<Complex<T>>>,
    pub full: Vec<Matrix<Complex<T>>>,
}

impl<T: Real> GateSet<T> {
    pub fn new(ham: &ChainHamiltonianSpec<T>, dt: T) -> Result<Self> {
        let mut half = Vec::with_capacity(ham.num_bonds());
        let mut full = Vec::with_capacity(ham.num_bonds());
        for b in 0..ham.num_bonds() {
            let h = ham.bond_hamiltonian(b);
            half.push(gate(&h, dt * T::lit(0.5))?);
            full.push(gate(&h, dt)?);
        }
        Ok(Self { half, full })
    }
}

struct BondUpdate<T> {
    bond: usize,
    left: Vec<Complex<T>>,
    right: Vec<Complex<T>>,
    schmidt: Vec<T>,
    discarded: T,
}

#[derive(Clone, Copy)]
struct Truncation<T> {
    chi_max: usize,
    cutoff: T,
}

/// Evolves `state` in place to `cfg.t_max` and returns the sampled series.
pub fn tebd_evolve<T: Real>(
    state: &mut MpsState<T>,
    ham: &ChainHamiltonianSpec<T>,
    cfg: &EvolutionConfig<T>,
) -> Result<TimeSeries<T>> {
    cfg.validate()?;
    if state.physical_dims != ham.local_dims {
        return Err(Error::domain("state and Hamiltonian have different local dimensions"));
    }
    let gates = GateSet::new(ham, cfg.dt)?;
    let pool = if cfg.threads > 1 {
        Some(
            rayon::ThreadPoolBuilder::new()
                .num_threads(cfg.threads)
                .build()
                .map_err(|e| Error::domain(format!("thread pool: {e}")))?,
        )
    } else {
        None
    };
    let trunc = Truncation {
        chi_max: cfg.chi_max,
        cutoff: cfg.svd_cutoff,
    };
    let columns = cfg.observables.iter().map(|o| o.name()).collect();
    let mut series = TimeSeries::new(columns);
    sample(state, cfg, &mut series, T::zero())?;

    let steps = cfg.steps();
    let bonds = state.len().saturating_sub(1);
    let even: Vec<usize> = (0..bonds).step_by(2).collect();
    let odd: Vec<usize> = (1..bonds).step_by(2).collect();
    let mut warned = false;
    let mut done = 0;
    while done < steps {
        let chunk = cfg.stride.min(steps - done);
        let step = done + 1;
        let run = |state: &mut MpsState<T>, layer: &[usize], g: &[Matrix<Complex<T>>], step| match &pool {
            Some(p) => p.install(|| apply_layer(state, layer, g, trunc, step, true)),
            None => apply_layer(state, layer, g, trunc, step, false),
        };
        run(state, &even, &gates.half, step)?;
        for j in 0..chunk {
            run(state, &odd, &gates.full, step + j)?;
            if j + 1 < chunk {
                run(state, &even, &gates.full, step + j)?;
            }
            state.truncation_log.push(state.discarded);
        }
        run(state, &even, &gates.half, done + chunk)?;
        if let Some(last) = state.truncation_log.last_mut() {
            *last = state.discarded;
        }
        done += chunk;
        if let Some(budget) = cfg.discarded_budget {
            if !warned && state.discarded > budget {
                warned = true;
                series.warnings.push(format!(
                    "discarded weight {} exceeds budget {} at step {done}",
                    state.discarded, budget
                ));
            }
        }
        sample(state, cfg, &mut series, cfg.dt * T::lit(done as f64))?;
    }
    Ok(series)
}

fn sample<T: Real>(state: &MpsState<T>, cfg: &EvolutionConfig<T>, series: &mut TimeSeries<T>, t: T) -> Result<()> {
    let row = cfg
        .observables
        .iter()
        .map(|o| measure(state, o))
        .collect::<Result<Vec<_>>>()?;
    series.times.push(t);
    series.values.push(row);
    series.discarded_weight.push(state.discarded);
    series.max_bond_dim.push(state.max_bond_dim());
    Ok(())
}

fn apply_layer<T: Real>(
    state: &mut MpsState<T>,
    bonds: &[usize],
    gates: &[Matrix<Complex<T>>],
    trunc: Truncation<T>,
    step: usize,
    parallel: bool,
) -> Result<()> {
    let shared: &MpsState<T> = state;
    let updates: Vec<Result<BondUpdate<T>>> = if parallel {
        bonds
            .par_iter()
            .map(|&b| update_bond(shared, b, &gates[b], trunc, step))
            .collect()
    } else {
        bonds
            .iter()
            .map(|&b| update_bond(shared, b, &gates[b], trunc, step))
            .collect()
    };
    for u in updates {
        let u = u?;
        let b = u.bond;
        state.bond_dims[b + 1] = u.schmidt.len();
        state.tensors[b] = u.left;
        state.tensors[b + 1] = u.right;
        state.schmidt[b + 1] = u.schmidt;
        state.discarded += u.discarded;
    }
    Ok(())
}

/// Applies `g` to sites `(b, b+1)` and re-splits them, keeping `B_b`
/// right-canonical as `θ' Z_k / ‖Y_k‖`.
fn update_bond<T: Real>(
    state: &MpsState<T>,
    b: usize,
    g: &Matrix<Complex<T>>,
    trunc: Truncation<T>,
    step: usize,
) -> Result<BondUpdate<T>> {
    let (l, r) = (state.bond_dims[b], state.bond_dims[b + 2]);
    let (d1, d2) = (state.physical_dims[b], state.physical_dims[b + 1]);
    let dd = d1 * d2;
    let theta = state.two_site(b);

    let mut evolved = vec![Complex::zero(); theta.len()];
    for a in 0..l {
        for p in 0..dd {
            let grow = g.row(p);
            let out = (a * dd + p) * r;
            for (q, &gpq) in grow.iter().enumerate() {
                if gpq.is_zero() {
                    continue;
                }
                let src = (a * dd + q) * r;
                for c in 0..r {
                    let x = theta[src + c];
                    evolved[out + c] += gpq * x;
                }
            }
        }
    }

    let rows = l * d1;
    let cols = d2 * r;
    let mut weighted = evolved.clone();
    for a in 0..l {
        let s = state.schmidt[b][a];
        for x in &mut weighted[a * d1 * cols..(a + 1) * d1 * cols] {
            *x *= s;
        }
    }
    let split = right_factor(&weighted, rows, cols, trunc)?;
    let k = split.values.len();
    let norm = split.values.iter().map(|&y| y * y).sum::<T>().sqrt();
    let mut left = vec![Complex::zero(); rows * k];
    for row in 0..rows {
        let src = &evolved[row * cols..(row + 1) * cols];
        for kk in 0..k {
            let z = &split.zdag[kk * cols..(kk + 1) * cols];
            let mut acc = Complex::zero();
            for (&x, &w) in src.iter().zip(z) {
                acc += x * w.conj();
            }
            left[row * k + kk] = acc / norm;
        }
    }
    let schmidt: Vec<T> = split.values.iter().map(|&y| y / norm).collect();
    let finite = left.iter().chain(&split.zdag).all(|x| x.is_finite()) && schmidt.iter().all(|x| x.is_finite());
    if !finite {
        return Err(Error::NonFinite { step, bond: b });
    }
    Ok(BondUpdate {
        bond: b,
        left,
        right: split.zdag,
        schmidt,
        discarded: split.discarded,
    })
}

struct RightFactor<T> {
    /// Kept right singular vectors as rows, `k × cols`.
    zdag: Vec<Complex<T>>,
    /// Kept singular values, descending, not normalized.
    values: Vec<T>,
    /// Discarded fraction of the total weight.
    discarded: T,
}

/// Truncated right singular vectors and values of the `rows × cols` matrix
/// `m`, from the eigen-decomposition of the smaller Gram matrix.
fn right_factor<T: Real>(m: &[Complex<T>], rows: usize, cols: usize, trunc: Truncation<T>) -> Result<RightFactor<T>> {
    let tall = rows >= cols;
    let n = rows.min(cols);
    let mut gram = Matrix::<Complex<T>>::zeros(n, n);
    if tall {
        // M†M
        for r in 0..rows {
            let row = &m[r * cols..(r + 1) * cols];
            for p in 0..cols {
                let x = row[p].conj();
                if x.is_zero() {
                    continue;
                }
                let out = gram.row_mut(p);
                for (o, &y) in out.iter_mut().zip(row) {
                    *o += x * y;
                }
            }
        }
    } else {
        // M M†
        for p in 0..rows {
            let rp = &m[p * cols..(p + 1) * cols];
            for q in p..rows {
                let rq = &m[q * cols..(q + 1) * cols];
                let mut acc = Complex::zero();
                for (&x, &y) in rp.iter().zip(rq) {
                    acc += x * y.conj();
                }
                gram.set(p, q, acc);
                gram.set(q, p, acc.conj());
            }
        }
    }
    let eig = hermitian_eigen(&gram)?;
    let mut weights: Vec<T> = eig.values.iter().rev().map(|&w| w.max(T::zero())).collect();
    let mut v = Matrix::from_fn(n, n, |r, c| eig.vectors.get(r, n - 1 - c));
    let mut total: T = weights.iter().copied().sum();
    if !(total > T::zero()) || !total.is_finite() {
        return Err(Error::domain("two-site tensor has zero or non-finite weight"));
    }
    let mut k = kept_rank(&weights, total, trunc);
    if weights[k - 1] < T::lit(REFINE_BELOW) * weights[0] {
        let a = if tall {
            Matrix::from_vec(rows, cols, m.to_vec())
        } else {
            Matrix::from_fn(cols, rows, |r, c| m[c * cols + r].conj())
        };
        (weights, v) = refine_small_block(&a, weights, v, 0)?;
        total = weights.iter().copied().sum();
        k = kept_rank(&weights, total, trunc);
    }
    let discarded = weights[k..].iter().copied().sum::<T>() / total;
    let values: Vec<T> = weights[..k].iter().map(|w| w.sqrt()).collect();
    let mut zdag = vec![Complex::zero(); k * cols];
    for kk in 0..k {
        if tall {
            for c in 0..cols {
                zdag[kk * cols + c] = v.get(c, kk).conj();
            }
        } else {
            // z_k† = x_k† M / y_k
            let out = &mut zdag[kk * cols..(kk + 1) * cols];
            for r in 0..rows {
                let x = v.get(r, kk).conj();
                for (o, &y) in out.iter_mut().zip(&m[r * cols..(r + 1) * cols]) {
                    *o += x * y;
                }
            }
            for o in out.iter_mut() {
                *o /= values[kk];
            }
        }
    }
    if !tall {
        orthonormalize_rows(&mut zdag, k, cols);
    }
    Ok(RightFactor {
        zdag,
        values,
        discarded,
    })
}

/// Recomputes the singular pairs of `a` (columns of `v`, weights descending)
/// whose Gram eigenvalues lie below `REFINE_BELOW` of the largest. Those
/// eigenvalues are only accurate to `ε·λ_max`; projecting `a` onto their
/// subspace and orthogonalizing against the dominant left vectors recovers
/// them to `ε·σ_max`.
fn refine_small_block<T: Real>(
    a: &Matrix<Complex<T>>,
    weights: Vec<T>,
    v: Matrix<Complex<T>>,
    depth: usize,
) -> Result<(Vec<T>, Matrix<Complex<T>>)> {
    let n = v.cols();
    let cut = T::lit(REFINE_BELOW) * weights[0];
    let s = weights.iter().position(|&w| w < cut).unwrap_or(n);
    if s == 0 || s == n || depth >= MAX_REFINE_DEPTH {
        return Ok((weights, v));
    }
    let ns = n - s;
    let inv: Vec<T> = weights[..s].iter().map(|w| T::one() / w.sqrt()).collect();
    let vl = Matrix::from_fn(n, s, |r, c| v.get(r, c) * inv[c]);
    let mut vs = Matrix::from_fn(n, ns, |r, c| v.get(r, s + c));
    let ul = a.matmul(&vl);
    let mut w = a.matmul(&vs);
    let overlap = ul.adjoint().matmul(&w);
    let (dw, dv) = (ul.matmul(&overlap), vl.matmul(&overlap));
    for r in 0..w.rows() {
        for c in 0..ns {
            w.set(r, c, w.get(r, c) - dw.get(r, c));
        }
    }
    for r in 0..n {
        for c in 0..ns {
            vs.set(r, c, vs.get(r, c) - dv.get(r, c));
        }
    }
    let eig = hermitian_eigen(&w.adjoint().matmul(&w))?;
    let small: Vec<T> = eig.values.iter().rev().map(|&x| x.max(T::zero())).collect();
    let q = Matrix::from_fn(ns, ns, |r, c| eig.vectors.get(r, ns - 1 - c));
    let (small, q) = refine_small_block(&w, small, q, depth + 1)?;
    let vs = vs.matmul(&q);

    let mut order: Vec<usize> = (0..n).collect();
    let all: Vec<T> = weights[..s].iter().chain(&small).copied().collect();
    order.sort_by(|&i, &j| all[j].partial_cmp(&all[i]).unwrap_or(std::cmp::Ordering::Equal));
    let column = |j: usize, r: usize| if j < s { v.get(r, j) } else { vs.get(r, j - s) };
    // rows of `vt` are the right singular vectors
    let mut vt: Vec<Complex<T>> = order
        .iter()
        .flat_map(|&j| (0..n).map(move |r| column(j, r)))
        .collect();
    orthonormalize_rows(&mut vt, n, n);
    let out = Matrix::from_fn(n, n, |r, c| vt[c * n + r]);
    Ok((order.iter().map(|&j| all[j]).collect(), out))
}

/// Smallest rank whose tail weight fits the cutoff, capped by `χ_max` and by
/// the numerical floor, and at least one.
fn kept_rank<T: Real>(weights: &[T], total: T, trunc: Truncation<T>) -> usize {
    let floor = T::lit(WEIGHT_FLOOR) * total;
    let significant = weights.iter().take_while(|&&w| w > floor).count();
    let budget = trunc.cutoff * total;
    let mut k = weights.len();
    let mut tail = T::zero();
    while k > 1 && tail + weights[k - 1] <= budget {
        tail += weights[k - 1];
        k -= 1;
    }
    k.min(trunc.chi_max).min(significant).max(1)
}

/// Modified Gram–Schmidt, twice, on the rows of a `k × cols` matrix.
fn orthonormalize_rows<T: Real>(z: &mut [Complex<T>], k: usize, cols: usize) {
    for i in 0..k {
        for _ in 0..2 {
            for j in 0..i {
                let (done, rest) = z.split_at_mut(i * cols);
                let zj = &done[j * cols..(j + 1) * cols];
                let zi = &mut rest[..cols];
                let mut dot = Complex::<T>::zero();
                for (&a, &b) in zj.iter().zip(zi.iter()) {
                    dot += a.conj() * b;
                }
                for (b, &a) in zi.iter_mut().zip(zj) {
                    *b -= dot * a;
                }
            }
        }
        let zi = &mut z[i * cols..(i + 1) * cols];
        let nrm = zi.iter().map(|x| x.norm_sqr()).sum::<T>().sqrt();
        for x in zi.iter_mut() {
            *x /= nrm;
        }
    }
}
