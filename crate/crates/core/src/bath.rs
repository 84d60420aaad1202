//! Bosonic bath with an exponentially cut-off power-law spectral density.
//!
//! `J(ω) = λ ω^s Ω^{1-s} e^{-ω/Ω}`, with units ħ = k_B = 1 and every
//! frequency measured in units of the qubit splitting ω₀.
//!
//! The half-sided Fourier transform of the bath correlation function,
//! `Γ(ω, t) = ∫₀^t e^{iωτ} C(τ) dτ`, supplies the Redfield coefficients. At
//! `t = ∞` its real part is `(π/2) J(|ω|) [coth(|ω|/2T) + sgn ω]` and its
//! imaginary part is the principal-value Lamb shift `S(ω)`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;

use crate::error::{check_finite, Error, Result};
use crate::quadrature::{
    integrate, integrate_exp_tail, integrate_pieces, integrate_rational_tail, Complex3, Tolerance,
};

/// Couplings at or below this value count as weak.
pub const WEAK_COUPLING_LAMBDA: f64 = 0.1;

const OHMIC_EPS: f64 = 1e-12;

/// Parameters of the spectral density and the bath temperature.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BathSpec {
    /// Dimensionless coupling scale λ (plays the role of ε²).
    pub lambda: f64,
    /// Ohmicity exponent s.
    pub s: f64,
    /// Cutoff frequency Ω.
    pub cutoff: f64,
    /// Temperature T.
    pub temperature: f64,
}

impl BathSpec {
    /// Validated constructor. `lambda = 0` is accepted and describes the
    /// uncoupled (unitary) limit.
    pub fn new(lambda: f64, s: f64, cutoff: f64, temperature: f64) -> Result<Self> {
        let bath = BathSpec {
            lambda,
            s,
            cutoff,
            temperature,
        };
        bath.validate()?;
        Ok(bath)
    }

    pub fn validate(&self) -> Result<()> {
        check_finite("lambda", self.lambda)?;
        check_finite("s", self.s)?;
        check_finite("cutoff", self.cutoff)?;
        check_finite("temperature", self.temperature)?;
        if self.lambda < 0.0 {
            return Err(Error::InvalidParameter {
                name: "lambda",
                value: self.lambda,
                reason: "must be non-negative",
            });
        }
        if self.s <= 0.0 {
            return Err(Error::InvalidParameter {
                name: "s",
                value: self.s,
                reason: "must be positive",
            });
        }
        if self.cutoff <= 0.0 {
            return Err(Error::InvalidParameter {
                name: "cutoff",
                value: self.cutoff,
                reason: "must be positive",
            });
        }
        if self.temperature < 0.0 {
            return Err(Error::InvalidParameter {
                name: "temperature",
                value: self.temperature,
                reason: "must be non-negative",
            });
        }
        Ok(())
    }

    pub fn with_lambda(self, lambda: f64) -> Self {
        BathSpec { lambda, ..self }
    }

    pub fn with_temperature(self, temperature: f64) -> Self {
        BathSpec {
            temperature,
            ..self
        }
    }

    pub fn with_s(self, s: f64) -> Self {
        BathSpec { s, ..self }
    }

    /// Same bath with λ = 1. Every coefficient is linear in λ, so the
    /// numerics run on this bath and are scaled afterwards.
    pub fn unit(self) -> Self {
        self.with_lambda(1.0)
    }

    pub fn is_weak_coupling(&self) -> bool {
        self.lambda <= WEAK_COUPLING_LAMBDA
    }

    pub fn is_ohmic(&self) -> bool {
        (self.s - 1.0).abs() < OHMIC_EPS
    }

    pub fn is_sub_ohmic(&self) -> bool {
        self.s < 1.0 - OHMIC_EPS
    }

    /// Euler Γ(s): the cutoff integral `∫₀^∞ J(ω)/ω dω = λ Ω Γ(s)`.
    pub fn cutoff_integral(&self) -> f64 {
        self.lambda * self.cutoff * gamma(self.s)
    }

    fn j(&self, omega: f64) -> f64 {
        if omega == 0.0 {
            return 0.0;
        }
        self.lambda * (self.s * omega.ln() + (1.0 - self.s) * self.cutoff.ln() - omega / self.cutoff).exp()
    }

    /// Bose occupation `n(ω) = 1/(e^{ω/T} - 1)`; zero at T = 0.
    fn occupation(&self, omega: f64) -> f64 {
        if self.temperature == 0.0 {
            0.0
        } else {
            1.0 / (omega / self.temperature).exp_m1()
        }
    }

    /// `J(ω)(n(ω)+1)`: weight of emission processes.
    fn emission(&self, omega: f64) -> f64 {
        let j = self.j(omega);
        if j == 0.0 {
            0.0
        } else {
            j * (self.occupation(omega) + 1.0)
        }
    }

    /// `J(ω) n(ω)`: weight of absorption processes.
    fn absorption(&self, omega: f64) -> f64 {
        let j = self.j(omega);
        if j == 0.0 {
            0.0
        } else {
            j * self.occupation(omega)
        }
    }
}

/// A rate that may be infinite (sub-Ohmic zero-frequency limit).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Rate {
    Finite(f64),
    Divergent,
}

impl Rate {
    pub fn finite(self) -> Option<f64> {
        match self {
            Rate::Finite(v) => Some(v),
            Rate::Divergent => None,
        }
    }

    pub fn is_divergent(self) -> bool {
        matches!(self, Rate::Divergent)
    }

    fn scaled(self, factor: f64) -> Rate {
        match self {
            Rate::Finite(v) => Rate::Finite(v * factor),
            Rate::Divergent => Rate::Divergent,
        }
    }
}

/// Time at which time-local coefficients are evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum CoefficientTime {
    Finite(f64),
    Asymptotic,
}

/// Value of a half-sided Fourier coefficient Γ(ω, t).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GammaValue {
    Finite(Complex64),
    /// Real part diverges; the imaginary part is still finite.
    Divergent { imag: f64 },
}

impl GammaValue {
    pub fn finite(self) -> Option<Complex64> {
        match self {
            GammaValue::Finite(z) => Some(z),
            GammaValue::Divergent { .. } => None,
        }
    }
}

/// Quadrature route for principal-value integrals `P∫₀^∞ g(ν)/(ν - ν₀) dν`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PvStrategy {
    /// Pair `ν₀ ± u` on a symmetric window around the pole; exponential tail map.
    PolePairing,
    /// Subtract `g(ν₀)` on `[0, 2ν₀]`; rational tail map.
    SingularitySubtraction,
}

fn check_omega_nonnegative(omega: f64) -> Result<()> {
    if !(omega >= 0.0) || !omega.is_finite() {
        return Err(Error::Domain(format!(
            "frequency must be finite and non-negative, got {omega}"
        )));
    }
    Ok(())
}

/// `J(ω) = λ ω^s Ω^{1-s} e^{-ω/Ω}`.
pub fn spectral_density(omega: f64, bath: &BathSpec) -> Result<f64> {
    check_omega_nonnegative(omega)?;
    Ok(bath.j(omega))
}

/// Thermally symmetrized spectrum `J(ω) coth(ω/2T)` (`J(ω)` at T = 0).
pub fn j_eff(omega: f64, bath: &BathSpec) -> Result<f64> {
    if !(omega > 0.0) || !omega.is_finite() {
        return Err(Error::Domain(format!(
            "j_eff needs a positive frequency, got {omega}; use gamma_zero_limit for ω → 0⁺"
        )));
    }
    Ok(bath.j(omega) * (2.0 * bath.occupation(omega) + 1.0))
}

/// Zero-frequency dephasing rate `γ₁ = 2π lim_{ω→0⁺} J_eff(ω, T)`,
/// which equals `4πλT` for s = 1, vanishes for s > 1 and diverges for s < 1.
pub fn gamma_zero_limit(bath: &BathSpec) -> Rate {
    if bath.temperature == 0.0 || bath.lambda == 0.0 {
        Rate::Finite(0.0)
    } else if bath.is_ohmic() {
        Rate::Finite(4.0 * PI * bath.lambda * bath.temperature)
    } else if bath.is_sub_ohmic() {
        Rate::Divergent
    } else {
        Rate::Finite(0.0)
    }
}

fn correlation_tolerance() -> Tolerance {
    Tolerance {
        abs: 1e-15,
        rel: 1e-9,
        max_intervals: 400_000,
    }
}

/// Bath autocorrelation `C(t) = ∫₀^∞ J(ω)[coth(ω/2T) cos ωt − i sin ωt] dω`
/// by adaptive quadrature.
pub fn correlation_function(t: f64, bath: &BathSpec) -> Result<Complex64> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::Domain(format!("time must be finite and non-negative, got {t}")));
    }
    bath.validate()?;
    let f = |nu: f64| {
        let j = bath.j(nu);
        if j == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        let coth = 2.0 * bath.occupation(nu) + 1.0;
        let (sin, cos) = (nu * t).sin_cos();
        Complex64::new(j * coth * cos, -j * sin)
    };
    // Oscillation-resolving partition of the bulk, exponential map beyond it.
    let nu_max = bath.cutoff * (40.0 + 2.0 * bath.s);
    let pieces = if t > 0.0 {
        ((nu_max * t / PI).ceil() as usize).clamp(8, 200_000)
    } else {
        8
    };
    let mut breaks: Vec<f64> = (0..=pieces).map(|k| nu_max * k as f64 / pieces as f64).collect();
    // resolve the thermal scale near the origin
    if bath.temperature > 0.0 && bath.temperature < breaks[1] {
        breaks.insert(1, bath.temperature);
    }
    let tol = correlation_tolerance();
    let bulk = integrate_pieces(f, &breaks, tol)?;
    let tail = integrate_exp_tail(f, nu_max, bath.cutoff, tol)?;
    Ok(bulk.value + tail.value)
}

/// Closed form of `C(t)` for the exponential-cutoff family:
/// `λ Ω^{1-s} Γ(s+1) [ z^{-(s+1)} + Σ_{k≥1} ((z + k/T)^{-(s+1)} + (z̄ + k/T)^{-(s+1)}) ]`
/// with `z = 1/Ω + i t`. The thermal sum is truncated after a fixed number
/// of terms and completed with an Euler–Maclaurin tail.
pub fn correlation_function_series(t: f64, bath: &BathSpec) -> Complex64 {
    let p = bath.s + 1.0;
    let prefactor = bath.lambda * bath.cutoff.powf(1.0 - bath.s) * gamma(p);
    let z = Complex64::new(1.0 / bath.cutoff, t);
    let mut sum = z.powf(-p);
    if bath.temperature > 0.0 {
        let b = 1.0 / bath.temperature;
        sum += thermal_sum(z, b, p) + thermal_sum(z.conj(), b, p);
    }
    sum * prefactor
}

/// `Σ_{k≥1} (c + k b)^{-p}` for `Re c > 0`, `b > 0`, `p > 1`.
fn thermal_sum(c: Complex64, b: f64, p: f64) -> Complex64 {
    const DIRECT_TERMS: usize = 20;
    let mut sum = Complex64::new(0.0, 0.0);
    for k in 1..DIRECT_TERMS {
        sum += (c + b * k as f64).powf(-p);
    }
    let z = c + b * DIRECT_TERMS as f64;
    let zi = z.inv();
    let zp = z.powf(-p);
    let p1 = p * (p + 1.0) * (p + 2.0);
    let p2 = p1 * (p + 3.0) * (p + 4.0);
    let tail = z * zp / (b * (p - 1.0)) + zp * 0.5 + zp * zi * (p * b / 12.0)
        - zp * zi.powi(3) * (p1 * b.powi(3) / 720.0)
        + zp * zi.powi(5) * (p2 * b.powi(5) / 30_240.0);
    sum + tail
}

fn pv_tolerance() -> Tolerance {
    Tolerance {
        abs: 1e-16,
        rel: 1e-11,
        max_intervals: 20_000,
    }
}

/// `P∫₀^∞ g(ν)/(ν − pole) dν` for `pole > 0`; `scale` is the decay scale of `g`.
pub fn principal_value<G>(g: G, pole: f64, scale: f64, strategy: PvStrategy) -> Result<f64>
where
    G: Fn(f64) -> f64,
{
    if !(pole > 0.0) {
        return Err(Error::Domain(format!("principal value needs a positive pole, got {pole}")));
    }
    let tol = pv_tolerance();
    let value = match strategy {
        PvStrategy::PolePairing => {
            let w = 0.5 * pole.min(scale);
            let left = integrate(|nu: f64| g(nu) / (nu - pole), 0.0, pole - w, tol)?.value;
            let paired = integrate(|u: f64| (g(pole + u) - g(pole - u)) / u, 0.0, w, tol)?.value;
            let right = integrate_exp_tail(|nu: f64| g(nu) / (nu - pole), pole + w, scale, tol)?.value;
            left + paired + right
        }
        PvStrategy::SingularitySubtraction => {
            let g0 = g(pole);
            let sub = |nu: f64| (g(nu) - g0) / (nu - pole);
            let near = integrate_pieces(sub, &[0.0, pole, 2.0 * pole], tol)?.value;
            let far = integrate_rational_tail(|nu: f64| g(nu) / (nu - pole), 2.0 * pole, tol)?.value;
            near + far
        }
    };
    Ok(value)
}

/// `∫₀^∞ g(ν)/(ν + shift) dν` for `shift > 0` (no pole on the half-line).
fn shifted_integral<G>(g: G, shift: f64, scale: f64, strategy: PvStrategy) -> Result<f64>
where
    G: Fn(f64) -> f64,
{
    let tol = pv_tolerance();
    let f = |nu: f64| g(nu) / (nu + shift);
    let split = shift.max(scale).min(scale * 4.0);
    let head = integrate(f, 0.0, split, tol)?.value;
    let tail = match strategy {
        PvStrategy::PolePairing => integrate_exp_tail(f, split, scale, tol)?.value,
        PvStrategy::SingularitySubtraction => integrate_rational_tail(f, split, tol)?.value,
    };
    Ok(head + tail)
}

/// Lamb shift `S(ω) = Im Γ(ω, ∞)`,
/// `S(ω) = P∫₀^∞ dν ½J(ν)[(coth(ν/2T)+1)/(ω−ν) + (coth(ν/2T)−1)/(ω+ν)]`.
pub fn lamb_shift(omega: f64, bath: &BathSpec, strategy: PvStrategy) -> Result<f64> {
    if !omega.is_finite() {
        return Err(Error::Domain(format!("frequency must be finite, got {omega}")));
    }
    bath.validate()?;
    if bath.lambda == 0.0 {
        return Ok(0.0);
    }
    if omega == 0.0 {
        return Ok(-bath.cutoff_integral());
    }
    let w = omega.abs();
    let scale = bath.cutoff;
    let emission = |nu: f64| bath.emission(nu);
    let absorption = |nu: f64| bath.absorption(nu);
    let value = if omega > 0.0 {
        let pv = principal_value(emission, w, scale, strategy)?;
        let reg = if bath.temperature > 0.0 {
            shifted_integral(absorption, w, scale, strategy)?
        } else {
            0.0
        };
        -pv + reg
    } else {
        let reg = shifted_integral(emission, w, scale, strategy)?;
        let pv = if bath.temperature > 0.0 {
            principal_value(absorption, w, scale, strategy)?
        } else {
            0.0
        };
        -reg + pv
    };
    Ok(value)
}

/// `Re Γ(ω, ∞)` for `ω ≠ 0`.
fn asymptotic_real_part(omega: f64, bath: &BathSpec) -> f64 {
    let w = omega.abs();
    if omega > 0.0 {
        PI * bath.emission(w)
    } else {
        PI * bath.absorption(w)
    }
}

/// Half-sided Fourier transform `Γ(ω, t) = ∫₀^t e^{iωτ} C(τ) dτ`.
///
/// At `t = ∞` the real part comes from the closed form and the imaginary part
/// from the principal-value Lamb shift. At finite `t` the time integral is
/// done by quadrature over the closed-form correlation function.
pub fn half_fourier_gamma(omega: f64, time: CoefficientTime, bath: &BathSpec) -> Result<GammaValue> {
    if !omega.is_finite() {
        return Err(Error::Domain(format!("frequency must be finite, got {omega}")));
    }
    bath.validate()?;
    match time {
        CoefficientTime::Asymptotic => {
            let imag = lamb_shift(omega, bath, PvStrategy::PolePairing)?;
            if omega == 0.0 {
                match gamma_zero_limit(bath) {
                    Rate::Finite(g1) => Ok(GammaValue::Finite(Complex64::new(0.25 * g1, imag))),
                    Rate::Divergent => Ok(GammaValue::Divergent { imag }),
                }
            } else {
                Ok(GammaValue::Finite(Complex64::new(asymptotic_real_part(omega, bath), imag)))
            }
        }
        CoefficientTime::Finite(t) => {
            let [g, _, _] = finite_time_gammas([omega, omega, omega], 0.0, t, bath)?;
            Ok(GammaValue::Finite(g))
        }
    }
}

/// `∫_{t0}^{t1} e^{iω_k τ} C(τ) dτ` for three frequencies at once.
pub(crate) fn finite_time_gammas(
    omegas: [f64; 3],
    t0: f64,
    t1: f64,
    bath: &BathSpec,
) -> Result<[Complex64; 3]> {
    if !(t1 >= t0) || !(t0 >= 0.0) || !t1.is_finite() {
        return Err(Error::Domain(format!("invalid time interval [{t0}, {t1}]")));
    }
    if t1 == t0 {
        return Ok([Complex64::new(0.0, 0.0); 3]);
    }
    let w_max = omegas.iter().fold(1.0_f64, |m, w| m.max(w.abs()));
    // resolve the phase e^{iωτ} and the 1/Ω rise of C(τ)
    let width = (PI / w_max).min(PI);
    let pieces = (((t1 - t0) / width).ceil() as usize).max(1);
    let mut breaks: Vec<f64> = (0..=pieces)
        .map(|k| t0 + (t1 - t0) * k as f64 / pieces as f64)
        .collect();
    let fine = 4.0 / bath.cutoff;
    if t0 < fine && fine < breaks[1] {
        breaks.insert(1, fine);
    }
    let f = |tau: f64| {
        let c = correlation_function_series(tau, bath);
        let phase = |w: f64| Complex64::from_polar(1.0, w * tau);
        Complex3([c * phase(omegas[0]), c * phase(omegas[1]), c * phase(omegas[2])])
    };
    let tol = Tolerance {
        abs: 1e-15,
        rel: 1e-10,
        max_intervals: 200_000,
    };
    let r = integrate_pieces(f, &breaks, tol)?;
    Ok(r.value.0)
}

/// Lamb-shift combinations entering the closed-form coherence:
/// `Δ₁ = 2[S(ω₀) − S(−ω₀)]`, `Δ₂ = 2[S(ω₀) + S(−ω₀)]`.
pub fn lamb_shift_delta(bath: &BathSpec, omega0: f64) -> Result<(f64, f64)> {
    let c = RedfieldCoefficients::asymptotic(bath, omega0)?;
    Ok((c.delta1, c.delta2))
}

/// Redfield rates and Lamb shifts at the three Bohr frequencies `+ω₀, −ω₀, 0`.
///
/// Rates follow the physical processes: `gamma_plus = 2 Re Γ(ω₀)` (decay),
/// `gamma_minus = 2 Re Γ(−ω₀)` (excitation), and `gamma_zero = γ₁ = 4 Re Γ(0)`,
/// the coherence decay rate of the σ_z channel per unit weight.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RedfieldCoefficients {
    pub gamma_plus: f64,
    pub gamma_minus: f64,
    pub gamma_zero: Rate,
    pub shift_plus: f64,
    pub shift_minus: f64,
    pub shift_zero: f64,
    pub delta1: f64,
    pub delta2: f64,
    pub time: CoefficientTime,
}

impl RedfieldCoefficients {
    /// Builds the coefficient set from the three half-sided transforms.
    pub fn from_gammas(
        plus: Complex64,
        minus: Complex64,
        zero: GammaValue,
        time: CoefficientTime,
    ) -> Self {
        let (gamma_zero, shift_zero) = match zero {
            GammaValue::Finite(z) => (Rate::Finite(4.0 * z.re), z.im),
            GammaValue::Divergent { imag } => (Rate::Divergent, imag),
        };
        RedfieldCoefficients {
            gamma_plus: 2.0 * plus.re,
            gamma_minus: 2.0 * minus.re,
            gamma_zero,
            shift_plus: plus.im,
            shift_minus: minus.im,
            shift_zero,
            delta1: 2.0 * (plus.im - minus.im),
            delta2: 2.0 * (plus.im + minus.im),
            time,
        }
    }

    /// Coefficients at `t = ∞`.
    pub fn asymptotic(bath: &BathSpec, omega0: f64) -> Result<Self> {
        Self::asymptotic_with(bath, omega0, PvStrategy::PolePairing)
    }

    /// Coefficients at `t = ∞` with an explicit principal-value strategy.
    pub fn asymptotic_with(bath: &BathSpec, omega0: f64, strategy: PvStrategy) -> Result<Self> {
        check_omega0(omega0)?;
        bath.validate()?;
        let unit = bath.unit();
        let plus = Complex64::new(
            asymptotic_real_part(omega0, &unit),
            lamb_shift(omega0, &unit, strategy)?,
        );
        let minus = Complex64::new(
            asymptotic_real_part(-omega0, &unit),
            lamb_shift(-omega0, &unit, strategy)?,
        );
        let shift_zero = lamb_shift(0.0, &unit, strategy)?;
        let zero = match gamma_zero_limit(&unit) {
            Rate::Finite(g1) => GammaValue::Finite(Complex64::new(0.25 * g1, shift_zero)),
            Rate::Divergent => GammaValue::Divergent { imag: shift_zero },
        };
        Ok(Self::from_gammas(plus, minus, zero, CoefficientTime::Asymptotic).scaled(bath.lambda))
    }

    /// Coefficients at finite time `t`.
    pub fn finite_time(bath: &BathSpec, omega0: f64, t: f64) -> Result<Self> {
        check_omega0(omega0)?;
        bath.validate()?;
        let [plus, minus, zero] = finite_time_gammas([omega0, -omega0, 0.0], 0.0, t, &bath.unit())?;
        Ok(
            Self::from_gammas(plus, minus, GammaValue::Finite(zero), CoefficientTime::Finite(t))
                .scaled(bath.lambda),
        )
    }

    /// Multiplies every finite entry by `factor`.
    pub fn scaled(self, factor: f64) -> Self {
        RedfieldCoefficients {
            gamma_plus: self.gamma_plus * factor,
            gamma_minus: self.gamma_minus * factor,
            gamma_zero: self.gamma_zero.scaled(factor),
            shift_plus: self.shift_plus * factor,
            shift_minus: self.shift_minus * factor,
            shift_zero: self.shift_zero * factor,
            delta1: self.delta1 * factor,
            delta2: self.delta2 * factor,
            time: self.time,
        }
    }

    /// `Re Γ(ω₀)`.
    pub fn re_plus(&self) -> f64 {
        0.5 * self.gamma_plus
    }

    /// `Re Γ(−ω₀)`.
    pub fn re_minus(&self) -> f64 {
        0.5 * self.gamma_minus
    }

    /// `Re Γ(0)` if finite.
    pub fn re_zero(&self) -> Option<f64> {
        self.gamma_zero.finite().map(|g| 0.25 * g)
    }
}

fn check_omega0(omega0: f64) -> Result<()> {
    if !(omega0 > 0.0) || !omega0.is_finite() {
        return Err(Error::InvalidParameter {
            name: "omega0",
            value: omega0,
            reason: "must be positive and finite",
        });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ohmic(t: f64) -> BathSpec {
        BathSpec::new(0.01, 1.0, 10.0, t).unwrap()
    }

    #[test]
    fn spectral_density_values() {
        let b = ohmic(1.0);
        assert_eq!(spectral_density(0.0, &b).unwrap(), 0.0);
        let at_cutoff = spectral_density(10.0, &b).unwrap();
        assert!((at_cutoff - 0.01 * 10.0 / std::f64::consts::E).abs() < 1e-15);
        assert!(spectral_density(-1.0, &b).is_err());
        let b3 = BathSpec::new(0.02, 3.0, 5.0, 1.0).unwrap();
        let expected = 0.02 * 2.0_f64.powi(3) * 5.0_f64.powi(-2) * (-0.4_f64).exp();
        assert!((spectral_density(2.0, &b3).unwrap() - expected).abs() < 1e-15);
    }

    #[test]
    fn j_eff_limits() {
        let b = ohmic(1.0);
        assert!(j_eff(0.0, &b).is_err());
        assert!((j_eff(1e-7, &b).unwrap() - 2.0 * 0.01).abs() < 1e-8);
        assert!(j_eff(1e-5, &b.with_s(3.0)).unwrap() < 1e-9);
        let sub = b.with_s(0.5);
        assert!(j_eff(1e-10, &sub).unwrap() > 10.0 * j_eff(1e-8, &sub).unwrap());
        // zero temperature reduces to J
        let cold = b.with_temperature(0.0);
        assert_eq!(j_eff(0.7, &cold).unwrap(), spectral_density(0.7, &cold).unwrap());
    }

    #[test]
    fn gamma_zero_cases() {
        let g = gamma_zero_limit(&ohmic(1.0)).finite().unwrap();
        assert!((g - 4.0 * PI * 0.01).abs() < 1e-15);
        assert!((g - 0.125_663_706_143_591_7).abs() < 1e-12);
        assert_eq!(gamma_zero_limit(&ohmic(1.0).with_s(3.0)), Rate::Finite(0.0));
        assert_eq!(gamma_zero_limit(&ohmic(1.0).with_s(0.5)), Rate::Divergent);
        assert_eq!(gamma_zero_limit(&ohmic(0.0).with_s(0.5)), Rate::Finite(0.0));
    }

    #[test]
    fn invalid_specs_rejected() {
        assert!(BathSpec::new(-0.1, 1.0, 10.0, 1.0).is_err());
        assert!(BathSpec::new(0.1, 0.0, 10.0, 1.0).is_err());
        assert!(BathSpec::new(0.1, 1.0, 0.0, 1.0).is_err());
        assert!(BathSpec::new(0.1, 1.0, 10.0, -1.0).is_err());
        assert!(BathSpec::new(f64::NAN, 1.0, 10.0, 1.0).is_err());
        assert!(ohmic(1.0).is_weak_coupling());
        assert!(!ohmic(1.0).with_lambda(0.2).is_weak_coupling());
    }

    #[test]
    fn series_matches_quadrature() {
        for &(t, temp, s) in &[(0.0, 0.0, 1.0), (0.3, 1.0, 1.0), (2.0, 0.5, 3.0), (5.0, 2.0, 1.0), (1.0, 1.0, 0.5)] {
            let b = BathSpec::new(0.01, s, 10.0, temp).unwrap();
            let q = correlation_function(t, &b).unwrap();
            let c = correlation_function_series(t, &b);
            assert!((q - c).norm() < 1e-8 * c.norm(), "t={t} T={temp} s={s}: {q} vs {c}");
        }
    }

    #[test]
    fn gamma_at_time_zero_vanishes() {
        let b = ohmic(1.0);
        for w in [-1.0, 0.0, 1.0] {
            let g = half_fourier_gamma(w, CoefficientTime::Finite(0.0), &b).unwrap();
            assert_eq!(g, GammaValue::Finite(Complex64::new(0.0, 0.0)));
        }
    }

    #[test]
    fn pv_strategies_agree() {
        let b = ohmic(1.0);
        let g = |nu: f64| b.emission(nu);
        let a = principal_value(g, 1.0, 10.0, PvStrategy::PolePairing).unwrap();
        let c = principal_value(g, 1.0, 10.0, PvStrategy::SingularitySubtraction).unwrap();
        assert!((a - c).abs() < 1e-9 * a.abs());
    }

    #[test]
    fn lamb_shift_at_zero_is_cutoff_integral() {
        let b = BathSpec::new(0.03, 2.5, 7.0, 0.4).unwrap();
        let s0 = lamb_shift(0.0, &b, PvStrategy::PolePairing).unwrap();
        assert!((s0 + 0.03 * 7.0 * gamma(2.5)).abs() < 1e-15);
    }

    #[test]
    fn divergent_zero_frequency_for_sub_ohmic() {
        let b = ohmic(1.0).with_s(0.5);
        match half_fourier_gamma(0.0, CoefficientTime::Asymptotic, &b).unwrap() {
            GammaValue::Divergent { imag } => assert!(imag < 0.0),
            other => panic!("expected divergent, got {other:?}"),
        }
        let c = RedfieldCoefficients::asymptotic(&b, 1.0).unwrap();
        assert!(c.gamma_zero.is_divergent());
        assert!(c.gamma_plus.is_finite() && c.delta1.is_finite());
    }
}
