//! Spectral densities, their thermalized extension to negative frequencies,
//! and bath correlation functions.
//!
//! A [`SpectralDensity`] is a sum of log-normal background terms and
//! Lorentzian peaks with a hard cutoff `ω_c`:
//!
//! ```text
//! J_LN(ω) = S / (σ √(2π)) · ω · exp(-ln²(ω/ω_k) / 2σ²)
//! J_L(ω)  = 4 γ Ω g (Ω² + γ²) ω / (π [γ² + (ω+Ω)²] [γ² + (ω-Ω)²])
//! ```
//!
//! [`ThermalizedSD`] is `J_β(ω) = sign(ω) J(|ω|) (1 + coth(βω/2)) / 2` on
//! `[-ω_c, ω_c]`. It is evaluated as `J(ω)(1 + n(ω))` for `ω > 0` and
//! `J(|ω|) n(|ω|)` for `ω < 0`, with `n` the Bose–Einstein occupation, which
//! avoids the cancellation in `1 + coth` at negative frequency.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::quadrature::{partition, Integrator, Tolerance};
use crate::units::{bose_einstein, inverse_temperature, phase, RAD_PER_PS_PER_CM};
use crate::{Error, Real, Result};

/// Peaks are resolved with breakpoints at `Ω ± PEAK_HALF_WIDTHS·γ`.
pub const PEAK_HALF_WIDTHS: f64 = 5.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogNormal<T> {
    /// Dimensionless weight `S_k` (Huang–Rhys factor of the term).
    #[serde(rename = "S")]
    pub weight: T,
    /// Dimensionless width `σ_k`.
    pub sigma: T,
    /// Characteristic frequency `ω_k` in cm⁻¹.
    pub omega: T,
}

impl<T: Real> LogNormal<T> {
    pub fn new(weight: T, sigma: T, omega: T) -> Self {
        Self {
            weight,
            sigma,
            omega,
        }
    }

    #[inline]
    pub fn eval(&self, w: T) -> T {
        let l = (w / self.omega).ln();
        let norm = self.weight / (self.sigma * (T::lit(2.0) * T::PI()).sqrt());
        norm * w * (-(l * l) / (T::lit(2.0) * self.sigma * self.sigma)).exp()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Lorentzian<T> {
    /// Dimensionless weight `g_m`.
    pub g: T,
    /// Width `γ_m` in cm⁻¹.
    pub gamma: T,
    /// Center `Ω_m` in cm⁻¹.
    #[serde(rename = "Omega")]
    pub center: T,
}

impl<T: Real> Lorentzian<T> {
    pub fn new(g: T, gamma: T, center: T) -> Self {
        Self { g, gamma, center }
    }

    #[inline]
    pub fn eval(&self, w: T) -> T {
        let (g, y, c) = (self.g, self.gamma, self.center);
        let y2 = y * y;
        let num = T::lit(4.0) * y * c * g * (c * c + y2) * w;
        let den = T::PI() * (y2 + (w + c) * (w + c)) * (y2 + (w - c) * (w - c));
        num / den
    }

    /// `lim_{ω→0} J_L(ω)/ω`.
    pub fn low_frequency_slope(&self) -> T {
        let (g, y, c) = (self.g, self.gamma, self.center);
        T::lit(4.0) * y * c * g / (T::PI() * (c * c + y * y))
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSpectralDensity<T> {
    #[serde(default)]
    lognormal: Vec<LogNormal<T>>,
    #[serde(default)]
    lorentzian: Vec<Lorentzian<T>>,
    cutoff: T,
}

/// Composite spectral density with a hard cutoff. `J ≡ 0` for `ω <= 0` and
/// `ω > ω_c`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSpectralDensity<T>")]
#[serde(bound(
    serialize = "T: Serialize",
    deserialize = "T: Real + serde::de::DeserializeOwned"
))]
pub struct SpectralDensity<T> {
    lognormal: Vec<LogNormal<T>>,
    lorentzian: Vec<Lorentzian<T>>,
    cutoff: T,
}

impl<T: Real> TryFrom<RawSpectralDensity<T>> for SpectralDensity<T> {
    type Error = Error;

    fn try_from(raw: RawSpectralDensity<T>) -> Result<Self> {
        Self::new(raw.lognormal, raw.lorentzian, raw.cutoff)
    }
}

impl<T: Real> SpectralDensity<T> {
    pub fn new(
        lognormal: Vec<LogNormal<T>>,
        lorentzian: Vec<Lorentzian<T>>,
        cutoff: T,
    ) -> Result<Self> {
        if !(cutoff.is_finite() && cutoff > T::zero()) {
            return Err(Error::domain(format!("cutoff must be positive and finite, got {cutoff}")));
        }
        for (k, t) in lognormal.iter().enumerate() {
            let ok = t.weight >= T::zero()
                && t.weight.is_finite()
                && t.sigma > T::zero()
                && t.sigma.is_finite()
                && t.omega > T::zero()
                && t.omega.is_finite();
            if !ok {
                return Err(Error::domain(format!("invalid log-normal term {k}: {t:?}")));
            }
        }
        for (k, t) in lorentzian.iter().enumerate() {
            let ok = t.g >= T::zero()
                && t.g.is_finite()
                && t.gamma > T::zero()
                && t.gamma.is_finite()
                && t.center > T::zero()
                && t.center.is_finite();
            if !ok {
                return Err(Error::domain(format!("invalid Lorentzian term {k}: {t:?}")));
            }
        }
        Ok(Self {
            lognormal,
            lorentzian,
            cutoff,
        })
    }

    /// Water-soluble chlorophyll-protein density: three log-normal
    /// background terms and three Lorentzian peaks, `ω_c = 350 cm⁻¹`.
    pub fn wscp() -> Self {
        let mut sd = Self::wscp_background();
        let g = [0.0173, 0.0246, 0.0182];
        let c = [181.0, 221.0, 240.0];
        sd.lorentzian = g
            .iter()
            .zip(c)
            .map(|(&g, c)| Lorentzian::new(T::lit(g), T::lit(5.0), T::lit(c)))
            .collect();
        sd
    }

    /// The log-normal background of [`SpectralDensity::wscp`] alone.
    pub fn wscp_background() -> Self {
        let s = [0.39, 0.23, 0.23];
        let sig = [0.4, 0.25, 0.2];
        let w = [26.0, 51.0, 85.0];
        let lognormal = (0..3)
            .map(|k| LogNormal::new(T::lit(s[k]), T::lit(sig[k]), T::lit(w[k])))
            .collect();
        Self {
            lognormal,
            lorentzian: vec![],
            cutoff: T::lit(350.0),
        }
    }

    pub fn lognormal(&self) -> &[LogNormal<T>] {
        &self.lognormal
    }

    pub fn lorentzian(&self) -> &[Lorentzian<T>] {
        &self.lorentzian
    }

    pub fn cutoff(&self) -> T {
        self.cutoff
    }

    pub fn with_cutoff(mut self, cutoff: T) -> Result<Self> {
        if !(cutoff.is_finite() && cutoff > T::zero()) {
            return Err(Error::domain(format!("cutoff must be positive and finite, got {cutoff}")));
        }
        self.cutoff = cutoff;
        Ok(self)
    }

    /// `J(ω)`; errors on non-finite input.
    pub fn evaluate(&self, w: T) -> Result<T> {
        if !w.is_finite() {
            return Err(Error::domain(format!("frequency must be finite, got {w}")));
        }
        Ok(self.density(w))
    }

    /// `J(ω)` without input checks.
    #[inline]
    pub fn density(&self, w: T) -> T {
        if !(w > T::zero() && w <= self.cutoff) {
            return T::zero();
        }
        let ln: T = self.lognormal.iter().map(|t| t.eval(w)).sum();
        let lz: T = self.lorentzian.iter().map(|t| t.eval(w)).sum();
        ln + lz
    }

    /// `η = lim_{ω→0⁺} J(ω)/ω`. Log-normal terms vanish faster than `ω`.
    pub fn low_frequency_slope(&self) -> T {
        self.lorentzian.iter().map(|t| t.low_frequency_slope()).sum()
    }

    /// Interior breakpoints on `(0, ω_c)` around every Lorentzian peak.
    pub fn peak_breakpoints(&self) -> Vec<T> {
        let k = T::lit(PEAK_HALF_WIDTHS);
        let mut pts = Vec::new();
        for t in &self.lorentzian {
            pts.push(t.center - k * t.gamma);
            pts.push(t.center);
            pts.push(t.center + k * t.gamma);
        }
        for t in &self.lognormal {
            pts.push(t.omega);
        }
        pts
    }

    /// Breakpoints `0 = x_0 < … < x_m = ω_c` used for integrals of `J`.
    pub fn breakpoints(&self) -> Vec<T> {
        partition(T::zero(), self.cutoff, self.peak_breakpoints())
    }

    /// `∫ J(ω) dω` over the support.
    pub fn total_weight(&self) -> Result<T> {
        Ok(Integrator::default()
            .integrate(|w| self.density(w), &self.breakpoints())?
            .value)
    }

    /// Reorganization energy `∫ J(ω)/ω dω`.
    pub fn reorganization_energy(&self) -> Result<T> {
        let eta = self.low_frequency_slope();
        Ok(Integrator::default()
            .integrate(
                |w| if w > T::zero() { self.density(w) / w } else { eta },
                &self.breakpoints(),
            )?
            .value)
    }
}

/// Temperature-dependent density `J_β` on `[-ω_c, ω_c]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ThermalizedSD<T> {
    base: SpectralDensity<T>,
    temperature: T,
    beta: T,
}

/// Builds `J_β` from `J` at temperature `T` (kelvin).
pub fn thermalize<T: Real>(sd: &SpectralDensity<T>, kelvin: T) -> Result<ThermalizedSD<T>> {
    if !(kelvin.is_finite() && kelvin >= T::zero()) {
        return Err(Error::domain(format!("temperature must be >= 0 K, got {kelvin}")));
    }
    Ok(ThermalizedSD {
        base: sd.clone(),
        temperature: kelvin,
        beta: inverse_temperature(kelvin),
    })
}

impl<T: Real> ThermalizedSD<T> {
    pub fn base(&self) -> &SpectralDensity<T> {
        &self.base
    }

    pub fn temperature(&self) -> T {
        self.temperature
    }

    /// Inverse temperature in cm; infinite at `T = 0`.
    pub fn beta(&self) -> T {
        self.beta
    }

    pub fn is_zero_temperature(&self) -> bool {
        self.beta.is_infinite()
    }

    pub fn evaluate(&self, w: T) -> Result<T> {
        if !w.is_finite() {
            return Err(Error::domain(format!("frequency must be finite, got {w}")));
        }
        Ok(self.density(w))
    }

    #[inline]
    pub fn density(&self, w: T) -> T {
        let c = self.base.cutoff();
        if w > c || w < -c {
            return T::zero();
        }
        if w > T::zero() {
            self.base.density(w) * (T::one() + bose_einstein(self.beta, w))
        } else if w < T::zero() {
            if self.is_zero_temperature() {
                T::zero()
            } else {
                self.base.density(-w) * bose_einstein(self.beta, -w)
            }
        } else if self.is_zero_temperature() {
            T::zero()
        } else {
            self.base.low_frequency_slope() / self.beta
        }
    }

    /// Support of the measure: `[0, ω_c]` at `T = 0`, else `[-ω_c, ω_c]`.
    pub fn support(&self) -> (T, T) {
        let c = self.base.cutoff();
        if self.is_zero_temperature() {
            (T::zero(), c)
        } else {
            (-c, c)
        }
    }

    pub fn breakpoints(&self) -> Vec<T> {
        let (lo, hi) = self.support();
        let peaks = self.base.peak_breakpoints();
        let mirrored: Vec<T> = peaks.iter().map(|&x| -x).collect();
        partition(
            lo,
            hi,
            peaks.into_iter().chain(mirrored).chain(std::iter::once(T::zero())),
        )
    }

    /// `∫ J_β(ω) dω`; its square root is the system–chain coupling.
    pub fn total_weight(&self) -> Result<T> {
        Ok(Integrator::default()
            .integrate(|w| self.density(w), &self.breakpoints())?
            .value)
    }

    /// `S(t) = ∫_{-ω_c}^{ω_c} J_β(ω) e^{-iωt} dω` for `t` in ps.
    pub fn correlation_function(&self, times: &[T]) -> Result<Vec<Complex<T>>> {
        let q = correlation_integrator();
        times
            .iter()
            .map(|&t| {
                check_time(t)?;
                let (lo, hi) = self.support();
                let pts = partition(
                    lo,
                    hi,
                    self.breakpoints()
                        .into_iter()
                        .chain(oscillation_breakpoints(lo, hi, t)),
                );
                let f = |w: T| Complex::from_polar(self.density(w), -phase(w, t));
                Ok(q.integrate(f, &pts)?.value)
            })
            .collect()
    }
}

fn correlation_integrator<T: Real>() -> Integrator<T> {
    Integrator::new(20, Tolerance::new(T::lit(1e-11), T::lit(1e-13)))
}

fn check_time<T: Real>(t: T) -> Result<()> {
    if t.is_finite() && t >= T::zero() {
        Ok(())
    } else {
        Err(Error::domain(format!("times must be finite and >= 0, got {t}")))
    }
}

/// Half-period breakpoints of `cos(ωt)` on `[lo, hi]`, capped at 400.
pub(crate) fn oscillation_breakpoints<T: Real>(lo: T, hi: T, t_ps: T) -> Vec<T> {
    if t_ps <= T::zero() {
        return vec![];
    }
    let step = T::PI() / (T::lit(RAD_PER_PS_PER_CM) * t_ps);
    let count = ((hi - lo) / step).ceil().to_usize().unwrap_or(usize::MAX);
    if !(2..=400).contains(&count) {
        return vec![];
    }
    let first = (lo / step).ceil().to_i64().unwrap_or(0);
    (0..count as i64 + 1)
        .map(|k| T::lit((first + k) as f64) * step)
        .collect()
}

/// `S(t) = ∫_0^{ω_c} J(ω) [e^{-iωt}(1 + n_ω) + e^{iωt} n_ω] dω` by adaptive
/// quadrature, `t` in ps and `T` in kelvin. The `n_ω` terms vanish at `T = 0`.
pub fn correlation_function<T: Real>(
    sd: &SpectralDensity<T>,
    kelvin: T,
    times: &[T],
) -> Result<Vec<Complex<T>>> {
    if !(kelvin.is_finite() && kelvin >= T::zero()) {
        return Err(Error::domain(format!("temperature must be >= 0 K, got {kelvin}")));
    }
    let beta = inverse_temperature(kelvin);
    let q = correlation_integrator();
    times
        .iter()
        .map(|&t| {
            check_time(t)?;
            let c = sd.cutoff();
            let pts = partition(
                T::zero(),
                c,
                sd.peak_breakpoints()
                    .into_iter()
                    .chain(oscillation_breakpoints(T::zero(), c, t)),
            );
            let f = |w: T| {
                let j = sd.density(w);
                let n = bose_einstein(beta, w);
                let ph = phase(w, t);
                let (s, co) = ph.sin_cos();
                // (1+n) e^{-iφ} + n e^{iφ} = (1+2n) cos φ - i sin φ
                Complex::new(j * (T::one() + n + n) * co, -j * s)
            };
            Ok(q.integrate(f, &pts)?.value)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hard_cutoff_and_origin() {
        let sd = SpectralDensity::<f64>::wscp();
        assert_eq!(sd.evaluate(0.0).unwrap(), 0.0);
        assert_eq!(sd.evaluate(351.0).unwrap(), 0.0);
        assert_eq!(sd.evaluate(-10.0).unwrap(), 0.0);
        assert!(sd.evaluate(350.0).unwrap() > 0.0);
        assert!(matches!(sd.evaluate(f64::NAN), Err(Error::Domain(_))));
    }

    #[test]
    fn low_frequency_slope_is_the_limit() {
        let sd = SpectralDensity::<f64>::wscp();
        let eta = sd.low_frequency_slope();
        let w = 1e-6;
        assert!(((sd.density(w) / w) - eta).abs() < 1e-9 * eta);
    }

    #[test]
    fn zero_temperature_thermalization() {
        let sd = SpectralDensity::<f64>::wscp();
        let tsd = thermalize(&sd, 0.0).unwrap();
        assert_eq!(tsd.evaluate(-50.0).unwrap(), 0.0);
        assert_eq!(tsd.evaluate(120.0).unwrap(), sd.density(120.0));
        assert_eq!(tsd.support(), (0.0, 350.0));
    }

    #[test]
    fn thermalized_value_at_origin_is_continuous() {
        let sd = SpectralDensity::<f64>::wscp();
        let tsd = thermalize(&sd, 300.0).unwrap();
        let at0 = tsd.evaluate(0.0).unwrap();
        let near = tsd.evaluate(1e-7).unwrap();
        let below = tsd.evaluate(-1e-7).unwrap();
        assert!((at0 - near).abs() < 1e-6 * at0);
        assert!((at0 - below).abs() < 1e-6 * at0);
    }

    #[test]
    fn negative_temperature_rejected() {
        let sd = SpectralDensity::<f64>::wscp();
        assert!(matches!(thermalize(&sd, -5.0), Err(Error::Domain(_))));
    }

    #[test]
    fn json_round_trip_uses_documented_keys() {
        let sd = SpectralDensity::<f64>::wscp();
        let text = serde_json::to_string(&sd).unwrap();
        assert!(text.contains("\"lognormal\""));
        assert!(text.contains("\"Omega\""));
        assert!(text.contains("\"S\""));
        let back: SpectralDensity<f64> = serde_json::from_str(&text).unwrap();
        assert_eq!(back, sd);
        let bad = r#"{"lognormal":[{"S":0.1,"sigma":-1,"omega":10}],"cutoff":100}"#;
        assert!(serde_json::from_str::<SpectralDensity<f64>>(bad).is_err());
    }

    #[test]
    fn reorganization_energy_of_background() {
        // ∫ J_LN/ω = S ω_k exp(σ²/2) on (0, ∞); the cutoff tail is negligible
        let sd = SpectralDensity::<f64>::wscp_background();
        let expect: f64 = sd
            .lognormal()
            .iter()
            .map(|t| t.weight * t.omega * (t.sigma * t.sigma / 2.0).exp())
            .sum();
        let got = sd.reorganization_energy().unwrap();
        assert!((got - expect).abs() < 1e-4 * expect, "{got} vs {expect}");
    }

    #[test]
    fn correlation_at_zero_time_is_real() {
        let sd = SpectralDensity::<f64>::wscp();
        let s = correlation_function(&sd, 300.0, &[0.0]).unwrap()[0];
        assert!(s.im.abs() < 1e-10 * s.re);
    }

    #[test]
    fn single_precision_evaluation() {
        let sd32 = SpectralDensity::<f32>::wscp();
        let sd64 = SpectralDensity::<f64>::wscp();
        let a = sd32.density(181.0) as f64;
        let b = sd64.density(181.0);
        assert!((a - b).abs() < 1e-5 * b);
    }
}
