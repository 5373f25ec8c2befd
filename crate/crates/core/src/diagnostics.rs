//! Estimators run before a simulation: thermal occupation of a chain in the
//! standard (non-thermalized) picture, the single-excitation quantum walk
//! used to size the chain, and the local-dimension schedule.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::chainmap::ChainCoefficients;
use crate::linalg::tridiagonal_eigen;
use crate::units::{bose_einstein, inverse_temperature, RAD_PER_PS_PER_CM};
use crate::{Error, Real, Result};

/// Smallest normal-mode frequency accepted at finite temperature, cm⁻¹.
pub const MODE_FLOOR: f64 = 1e-12;

/// Mean occupation `⟨c_n†c_n⟩_β` of every chain site.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OccupationProfile<T> {
    pub temperature: T,
    pub occupations: Vec<T>,
}

impl<T: Real> OccupationProfile<T> {
    pub fn max(&self) -> T {
        self.occupations.iter().copied().fold(T::zero(), T::max)
    }

    /// Index of the largest occupation.
    pub fn argmax(&self) -> usize {
        let mut best = 0;
        for (i, &x) in self.occupations.iter().enumerate() {
            if x > self.occupations[best] {
                best = i;
            }
        }
        best
    }

    /// Fock levels per site needed to hold `safety` times the mean
    /// occupation, never fewer than two.
    pub fn required_local_dims(&self, safety: T) -> Vec<usize> {
        self.occupations
            .iter()
            .map(|&n| (n * safety).ceil().to_usize().unwrap_or(usize::MAX).saturating_add(1).max(2))
            .collect()
    }
}

/// Thermal occupations of the first `n` sites of the chain with Hamiltonian
/// `Σ ω_k c_k†c_k + κ_k (c_k†c_{k-1} + h.c.)`, obtained from its normal
/// modes.
pub fn thermal_occupation<T: Real>(
    coeffs: &ChainCoefficients<T>,
    kelvin: T,
    n: usize,
) -> Result<OccupationProfile<T>> {
    if !(kelvin >= T::zero()) || !kelvin.is_finite() {
        return Err(Error::domain(format!("temperature must be >= 0 K, got {kelvin}")));
    }
    if n == 0 || n > coeffs.len() {
        return Err(Error::domain(format!(
            "occupation of {n} sites requested from {} coefficients",
            coeffs.len()
        )));
    }
    if kelvin == T::zero() {
        return Ok(OccupationProfile {
            temperature: kelvin,
            occupations: vec![T::zero(); n],
        });
    }
    let beta = inverse_temperature(kelvin);
    let eig = tridiagonal_eigen(&coeffs.omegas[..n], &coeffs.kappas[1..n], n)?;
    let mut modes = Vec::with_capacity(n);
    for (k, &w) in eig.values.iter().enumerate() {
        if w <= T::lit(MODE_FLOOR) {
            return Err(Error::NonPositiveMode {
                index: k,
                frequency: w.as_f64(),
            });
        }
        modes.push(bose_einstein(beta, w));
    }
    let occupations = (0..n)
        .map(|site| {
            (0..n)
                .map(|k| {
                    let u = eig.vectors.get(site, k);
                    u * u * modes[k]
                })
                .sum()
        })
        .collect();
    Ok(OccupationProfile {
        temperature: kelvin,
        occupations,
    })
}

/// Single-excitation amplitudes on an `M`-site chain started at site 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WalkProfile<T> {
    pub times: Vec<T>,
    /// `probabilities[i][n] = |α_n(t_i)|²`.
    pub probabilities: Vec<Vec<T>>,
}

impl<T: Real> WalkProfile<T> {
    pub fn sites(&self) -> usize {
        self.probabilities.first().map_or(0, Vec::len)
    }

    /// `Σ_n |α_n(t_i)|²`.
    pub fn norms(&self) -> Vec<T> {
        self.probabilities.iter().map(|p| p.iter().copied().sum()).collect()
    }

    /// First sampled time at which `|α_site|²` exceeds `threshold`.
    pub fn front_arrival(&self, site: usize, threshold: T) -> Option<T> {
        self.times
            .iter()
            .zip(&self.probabilities)
            .find(|(_, p)| p[site] > threshold)
            .map(|(&t, _)| t)
    }
}

/// Exact single-excitation evolution on the first `m` sites.
pub fn walk_profile<T: Real>(
    coeffs: &ChainCoefficients<T>,
    m: usize,
    times: &[T],
) -> Result<WalkProfile<T>> {
    if m == 0 || m > coeffs.len() {
        return Err(Error::domain(format!(
            "walk on {m} sites requested from {} coefficients",
            coeffs.len()
        )));
    }
    if times.iter().any(|&t| !(t >= T::zero())) {
        return Err(Error::domain("walk times must be >= 0"));
    }
    let eig = tridiagonal_eigen(&coeffs.omegas[..m], &coeffs.kappas[1..m], m)?;
    let c = T::lit(RAD_PER_PS_PER_CM);
    let probabilities = times
        .iter()
        .map(|&t| {
            let phases: Vec<Complex<T>> = eig
                .values
                .iter()
                .enumerate()
                .map(|(k, &w)| Complex::from_polar(eig.vectors.get(0, k), -(w * t * c)))
                .collect();
            (0..m)
                .map(|site| {
                    let a: Complex<T> = (0..m)
                        .map(|k| phases[k] * eig.vectors.get(site, k))
                        .fold(Complex::new(T::zero(), T::zero()), |x, y| x + y);
                    a.norm_sqr()
                })
                .collect()
        })
        .collect();
    Ok(WalkProfile {
        times: times.to_vec(),
        probabilities,
    })
}

/// Settings of [`estimate_chain_length`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChainLengthOptions<T> {
    pub return_threshold: T,
    pub floor: usize,
    pub cap: usize,
}

impl<T: Real> Default for ChainLengthOptions<T> {
    fn default() -> Self {
        Self {
            return_threshold: T::lit(1e-6),
            floor: 2,
            cap: 2000,
        }
    }
}

/// Smallest chain length `M` for which the site-0 return probability up to
/// `t_max` is indistinguishable, within `return_threshold`, from that of a
/// chain of length `2M`; i.e. no reflection off the end has come back yet.
pub fn estimate_chain_length<T: Real>(
    coeffs: &ChainCoefficients<T>,
    t_max: T,
    opts: ChainLengthOptions<T>,
) -> Result<usize> {
    if !(t_max >= T::zero()) || !t_max.is_finite() {
        return Err(Error::domain(format!("t_max must be >= 0, got {t_max}")));
    }
    let thr = opts.return_threshold;
    if !(thr > T::zero() && thr < T::one()) {
        return Err(Error::domain("return threshold must lie in (0, 1)"));
    }
    let floor = opts.floor.max(1);
    let cap = opts.cap.min(coeffs.len() / 2);
    if cap < floor {
        return Err(Error::domain(format!(
            "{} coefficients cannot test chains of length {floor}",
            coeffs.len()
        )));
    }
    let times = return_grid(coeffs, t_max);
    for m in floor..=cap {
        let short = site_zero_return(coeffs, m, &times)?;
        let long = site_zero_return(coeffs, 2 * m, &times)?;
        let worst = short
            .iter()
            .zip(&long)
            .map(|(a, b)| (*a - *b).abs())
            .fold(T::zero(), T::max);
        if worst < thr {
            return Ok(m);
        }
    }
    Err(Error::ChainLengthNotConverged { last_tested: cap })
}

/// Uniform grid `k h ≤ t_max` whose step depends only on the coefficients,
/// so the grid for a shorter horizon is a prefix of a longer one.
fn return_grid<T: Real>(coeffs: &ChainCoefficients<T>, t_max: T) -> Vec<T> {
    let w = coeffs.omegas.iter().fold(T::zero(), |a, x| a.max(x.abs()));
    let k = coeffs.kappas.iter().skip(1).fold(T::zero(), |a, x| a.max(x.abs()));
    let radius = (w + T::lit(2.0) * k).max(T::min_positive_value());
    let h = T::lit(0.25) / (radius * T::lit(RAD_PER_PS_PER_CM));
    let steps = (t_max / h).floor().to_usize().unwrap_or(0);
    (0..=steps).map(|i| h * T::lit(i as f64)).collect()
}

fn site_zero_return<T: Real>(coeffs: &ChainCoefficients<T>, m: usize, times: &[T]) -> Result<Vec<T>> {
    let eig = tridiagonal_eigen(&coeffs.omegas[..m], &coeffs.kappas[1..m], 1)?;
    let c = T::lit(RAD_PER_PS_PER_CM);
    let weights: Vec<T> = (0..m).map(|k| eig.vectors.get(0, k).powi(2)).collect();
    Ok(times
        .iter()
        .map(|&t| {
            let (mut re, mut im) = (T::zero(), T::zero());
            for (&w, &lam) in weights.iter().zip(&eig.values) {
                let (s, co) = (lam * t * c).sin_cos();
                re += w * co;
                im -= w * s;
            }
            re * re + im * im
        })
        .collect())
}

/// `d′(n) = round(d_max − n (d_max − 2)/N)` for `n = 0..N`, at least 2.
pub fn local_dimension_schedule(d_max: usize, n: usize) -> Result<Vec<usize>> {
    if d_max < 2 {
        return Err(Error::domain(format!("d_max must be >= 2, got {d_max}")));
    }
    if n == 0 {
        return Err(Error::domain("chain length must be >= 1"));
    }
    Ok((0..n).map(|k| schedule_entry(d_max, n, k)).collect())
}

/// Single entry of the schedule; `k` may equal `n`.
pub fn schedule_entry(d_max: usize, n: usize, k: usize) -> usize {
    let d = d_max as f64 - k as f64 * (d_max as f64 - 2.0) / n as f64;
    (d.round() as usize).max(2)
}
