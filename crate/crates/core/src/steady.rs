//! Stationary Bloch vectors: direct linear solve of `M v + b = 0` and the
//! closed-form transverse component with its leading-order truncation.

use std::f64::consts::PI;

use bitflags::bitflags;
use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;

use crate::bath::{j_eff, BathSpec, Rate, RedfieldCoefficients};
use crate::error::{Error, Result};
use crate::redfield::{build_generator, gibbs_polarization, BlochGenerator, GeneratorKind, Mode, SystemSpec};

/// Slack on the Bloch-ball test.
pub const PHYSICAL_SLACK: f64 = 1e-12;

/// Relative pivot size below which the generator counts as singular.
pub const SINGULAR_PIVOT: f64 = 1e-14;

/// Closed-form denominators below `DENOMINATOR_FLOOR · ω₀` are reported.
pub const DENOMINATOR_FLOOR: f64 = 1e-12;

bitflags! {
    /// Diagnostic markers carried by results and sweep records.
    #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
    pub struct Flags: u32 {
        const SUB_OHMIC = 1;
        const INFINITE_DEPHASING = 1 << 1;
        const WEAK_COUPLING_WARNING = 1 << 2;
        /// γ₁ vanishes (s > 1 or T = 0).
        const NO_DEPHASING_TERM = 1 << 3;
        /// The cutoff term uses Γ(s) with s ≠ 1.
        const CUTOFF_GAMMA_GENERALIZED = 1 << 4;
        const DENOMINATOR_ZERO = 1 << 5;
        const SINGULAR_GENERATOR = 1 << 6;
        const NUMERICAL_FAILURE = 1 << 7;
    }
}

impl Flags {
    /// Stable spelling used in CSV and JSON output.
    pub fn label(flag: Flags) -> &'static str {
        match flag {
            f if f == Flags::SUB_OHMIC => "SubOhmic",
            f if f == Flags::INFINITE_DEPHASING => "InfiniteDephasing",
            f if f == Flags::WEAK_COUPLING_WARNING => "WeakCouplingWarning",
            f if f == Flags::NO_DEPHASING_TERM => "NoDephasingTerm",
            f if f == Flags::CUTOFF_GAMMA_GENERALIZED => "CutoffGammaGeneralized",
            f if f == Flags::DENOMINATOR_ZERO => "DenominatorZero",
            f if f == Flags::SINGULAR_GENERATOR => "SingularGenerator",
            f if f == Flags::NUMERICAL_FAILURE => "NumericalFailure",
            _ => "Unknown",
        }
    }

    /// Labels joined with `|`; empty when no flag is set.
    pub fn to_labels(self) -> String {
        self.iter().map(Flags::label).collect::<Vec<_>>().join("|")
    }

    pub fn from_labels(text: &str) -> Option<Flags> {
        let mut out = Flags::empty();
        for part in text.split('|').filter(|p| !p.is_empty()) {
            out |= Flags::all().iter().find(|f| Flags::label(*f) == part)?;
        }
        Some(out)
    }

    /// Flags implied by the parameters alone.
    pub fn for_parameters(system: &SystemSpec, bath: &BathSpec) -> Flags {
        let mut flags = Flags::empty();
        if bath.is_sub_ohmic() {
            flags |= Flags::SUB_OHMIC;
            if system.f2 > 0.0 && bath.temperature > 0.0 {
                flags |= Flags::INFINITE_DEPHASING;
            }
        } else if !bath.is_ohmic() || bath.temperature == 0.0 {
            flags |= Flags::NO_DEPHASING_TERM;
        }
        if !bath.is_ohmic() {
            flags |= Flags::CUTOFF_GAMMA_GENERALIZED;
        }
        if system.weak_coupling_warning() || !bath.is_weak_coupling() {
            flags |= Flags::WEAK_COUPLING_WARNING;
        }
        flags
    }
}

impl Serialize for Flags {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_labels())
    }
}

impl<'de> Deserialize<'de> for Flags {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let text = String::deserialize(d)?;
        Flags::from_labels(&text).ok_or_else(|| serde::de::Error::custom(format!("unknown flags `{text}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Method {
    LinearSolve,
    ClosedForm,
    ClosedFormLeadingOrder,
}

/// Stationary Bloch vector with its coherence.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SteadyState {
    pub v1: f64,
    pub v2: f64,
    pub v3: f64,
    /// `√(v₁² + v₂²)`.
    pub coherence: f64,
    pub physical: bool,
    pub method: Method,
    pub flags: Flags,
}

impl SteadyState {
    pub fn new(v: Vector3<f64>, method: Method, flags: Flags) -> Self {
        SteadyState {
            v1: v[0],
            v2: v[1],
            v3: v[2],
            coherence: v[0].hypot(v[1]),
            physical: v.norm_squared() <= 1.0 + PHYSICAL_SLACK,
            method,
            flags,
        }
    }

    pub fn vector(&self) -> Vector3<f64> {
        Vector3::new(self.v1, self.v2, self.v3)
    }

    pub fn norm(&self) -> f64 {
        self.vector().norm()
    }
}

/// Solves `A x = rhs` by Gaussian elimination with partial pivoting.
fn pivoted_solve(a: &Matrix3<f64>, rhs: &Vector3<f64>, floor: f64) -> Result<Vector3<f64>> {
    let mut m = *a;
    let mut x = *rhs;
    for k in 0..3 {
        let p = (k..3)
            .max_by(|&i, &j| m[(i, k)].abs().total_cmp(&m[(j, k)].abs()))
            .unwrap_or(k);
        if m[(p, k)].abs() <= floor {
            return Err(Error::SingularGenerator { pivot: m[(p, k)].abs() });
        }
        if p != k {
            m.swap_rows(p, k);
            x.swap_rows(p, k);
        }
        for i in k + 1..3 {
            let factor = m[(i, k)] / m[(k, k)];
            for j in k..3 {
                m[(i, j)] -= factor * m[(k, j)];
            }
            x[i] -= factor * x[k];
        }
    }
    for k in (0..3).rev() {
        let mut acc = x[k];
        for j in k + 1..3 {
            acc -= m[(k, j)] * x[j];
        }
        x[k] = acc / m[(k, k)];
    }
    Ok(x)
}

fn max_norm(m: &Matrix3<f64>) -> f64 {
    m.iter().fold(0.0, |acc, x| acc.max(x.abs()))
}

/// Fixed point `v̄ = −M⁻¹ b` of the Bloch flow.
///
/// An infinite-dephasing generator relaxes the transverse components to zero;
/// `v₃` then follows from the longitudinal row.
pub fn solve_steady(gen: &BlochGenerator) -> Result<SteadyState> {
    let scale = max_norm(&gen.m);
    if gen.kind == GeneratorKind::InfiniteDephasing {
        let m33 = gen.m[(2, 2)];
        if m33.abs() <= SINGULAR_PIVOT * scale {
            return Err(Error::SingularGenerator { pivot: m33.abs() });
        }
        let v = Vector3::new(0.0, 0.0, -gen.b[2] / m33);
        return Ok(SteadyState::new(v, Method::LinearSolve, Flags::INFINITE_DEPHASING));
    }
    let floor = SINGULAR_PIVOT * scale;
    let rhs = -gen.b;
    let mut v = pivoted_solve(&gen.m, &rhs, floor)?;
    let residual = rhs - gen.m * v;
    v += pivoted_solve(&gen.m, &residual, floor)?;
    Ok(SteadyState::new(v, Method::LinearSolve, Flags::empty()))
}

/// Residual `‖M v + b‖` of a candidate fixed point.
pub fn residual(gen: &BlochGenerator, v: &Vector3<f64>) -> f64 {
    (gen.m * v + gen.b).norm()
}

/// Which denominator the closed form keeps.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Order {
    Exact,
    /// Denominator replaced by ω₀; exactly linear in λ.
    Leading,
}

/// The λ-independent parts of the steady state for a fixed bath shape,
/// temperature and splitting. Every bath coefficient is linear in λ, so one
/// kernel serves a whole λ or (f₁, f₂) sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SteadyKernel {
    pub bath: BathSpec,
    pub omega0: f64,
    /// Coefficients at λ = 1.
    pub unit: RedfieldCoefficients,
    /// `tanh(ω₀/2T)`.
    pub polarization: f64,
    /// `Ω Γ(s)`, the cutoff integral per unit λ.
    pub cutoff_term: f64,
    /// `γ₁ / (2π J_eff(ω₀))`; zero when γ₁ vanishes.
    pub dephasing_ratio: f64,
}

impl SteadyKernel {
    pub fn new(bath: &BathSpec, omega0: f64) -> Result<Self> {
        bath.validate()?;
        let unit_bath = bath.unit();
        let unit = RedfieldCoefficients::asymptotic(&unit_bath, omega0)?;
        let dephasing_ratio = match unit.gamma_zero {
            Rate::Finite(g) if g > 0.0 => g / (2.0 * PI * j_eff(omega0, &unit_bath)?),
            _ => 0.0,
        };
        Ok(SteadyKernel {
            bath: *bath,
            omega0,
            unit,
            polarization: gibbs_polarization(omega0, bath.temperature),
            cutoff_term: bath.cutoff * gamma(bath.s),
            dephasing_ratio,
        })
    }

    pub fn coefficients(&self, lambda: f64) -> RedfieldCoefficients {
        self.unit.scaled(lambda)
    }

    fn check_system(&self, system: &SystemSpec) -> Result<()> {
        system.validate()?;
        if system.omega0 != self.omega0 {
            return Err(Error::Domain(format!(
                "kernel built for omega0 = {}, got {}",
                self.omega0, system.omega0
            )));
        }
        Ok(())
    }

    fn check_lambda(lambda: f64) -> Result<()> {
        if !(lambda >= 0.0) || !lambda.is_finite() {
            return Err(Error::InvalidParameter {
                name: "lambda",
                value: lambda,
                reason: "must be finite and non-negative",
            });
        }
        Ok(())
    }

    /// Bracket of the closed-form numerator per unit λ:
    /// `Δ₁ tanh(ω₀/2T) − 4ΩΓ(s) − Δ₂`.
    pub fn numerator_per_lambda(&self) -> f64 {
        self.unit.delta1 * self.polarization - 4.0 * self.cutoff_term - self.unit.delta2
    }

    /// `ω₀ + λ (f₁² + f₂² r) Δ₁` with r the dephasing ratio.
    pub fn denominator(&self, system: &SystemSpec, lambda: f64) -> f64 {
        let weight = system.f1 * system.f1 + system.f2 * system.f2 * self.dephasing_ratio;
        self.omega0 + lambda * weight * self.unit.delta1
    }

    pub fn closed_form(&self, system: &SystemSpec, lambda: f64, order: Order) -> Result<SteadyState> {
        self.check_system(system)?;
        Self::check_lambda(lambda)?;
        let bath = self.bath.with_lambda(lambda);
        let flags = Flags::for_parameters(system, &bath);
        let method = match order {
            Order::Exact => Method::ClosedForm,
            Order::Leading => Method::ClosedFormLeadingOrder,
        };
        if bath.is_sub_ohmic() {
            // infinite dephasing kills the transverse components
            let v = Vector3::new(0.0, 0.0, -self.polarization);
            return Ok(SteadyState::new(v, method, flags));
        }
        let den = match order {
            Order::Exact => self.denominator(system, lambda),
            Order::Leading => self.omega0,
        };
        if den.abs() < DENOMINATOR_FLOOR * self.omega0 {
            return Err(Error::DenominatorZero { denominator: den });
        }
        let bracket = lambda * self.numerator_per_lambda() / den;
        let v1 = system.f1 * system.f2 * bracket;
        // longitudinal row: γ₁ f₁f₂ v₁ = f₁² [(γ₊+γ₋) v₃ + (γ₊−γ₋)]
        let v3 = -self.polarization + self.dephasing_ratio * system.f2 * system.f2 * bracket;
        if !v1.is_finite() || !v3.is_finite() {
            return Err(Error::Domain("closed form produced a non-finite value".into()));
        }
        Ok(SteadyState::new(Vector3::new(v1, 0.0, v3), method, flags))
    }

    pub fn generator(&self, system: &SystemSpec, lambda: f64, mode: Mode) -> Result<BlochGenerator> {
        self.check_system(system)?;
        Self::check_lambda(lambda)?;
        build_generator(system, &self.coefficients(lambda), mode)
    }

    pub fn linear_solve(&self, system: &SystemSpec, lambda: f64, mode: Mode) -> Result<SteadyState> {
        let gen = self.generator(system, lambda, mode)?;
        let mut st = solve_steady(&gen)?;
        st.flags |= Flags::for_parameters(system, &self.bath.with_lambda(lambda));
        Ok(st)
    }
}

/// Closed-form stationary state with `v̄₂ = 0` and
/// `v̄₁ = f₁f₂ [Δ₁ tanh(ω₀/2T) − 4λΩΓ(s) − Δ₂] / [ω₀ + f₁²Δ₁ + f₂² r Δ₁]`,
/// `r = γ₁/(2π J_eff(ω₀))`.
pub fn v1_closed_form(system: &SystemSpec, bath: &BathSpec) -> Result<SteadyState> {
    SteadyKernel::new(bath, system.omega0)?.closed_form(system, bath.lambda, Order::Exact)
}

/// [`v1_closed_form`] with the denominator truncated to ω₀.
pub fn v1_leading_order(system: &SystemSpec, bath: &BathSpec) -> Result<SteadyState> {
    SteadyKernel::new(bath, system.omega0)?.closed_form(system, bath.lambda, Order::Leading)
}

/// Linear-solve stationary state for a parameter set.
pub fn steady_state(system: &SystemSpec, bath: &BathSpec, mode: Mode) -> Result<SteadyState> {
    SteadyKernel::new(bath, system.omega0)?.linear_solve(system, bath.lambda, mode)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bath(s: f64, t: f64) -> BathSpec {
        BathSpec::new(0.01, s, 10.0, t).unwrap()
    }

    #[test]
    fn pivoted_solve_matches_inverse() {
        let a = Matrix3::new(1e-3, 2.0, -1.0, 4.0, 0.5, 0.25, -2.0, 1.0, 3.0);
        let rhs = Vector3::new(1.0, -2.0, 0.5);
        let x = pivoted_solve(&a, &rhs, 0.0).unwrap();
        assert!((a * x - rhs).norm() < 1e-14);
        assert!(matches!(
            pivoted_solve(&Matrix3::new(1.0, 2.0, 3.0, 2.0, 4.0, 6.0, 0.0, 0.0, 1.0), &rhs, 1e-14),
            Err(Error::SingularGenerator { .. })
        ));
    }

    #[test]
    fn secular_solve_is_gibbs() {
        let sys = SystemSpec::unit(1.0, 1.0).unwrap();
        for t in [0.5, 1.0, 5.0] {
            let st = steady_state(&sys, &bath(1.0, t), Mode::Secular).unwrap();
            assert!(st.v1.abs() < 1e-15 && st.v2.abs() < 1e-15);
            assert!((st.v3 + (0.5 / t).tanh()).abs() < 1e-12);
        }
    }

    #[test]
    fn frozen_reference_state() {
        let sys = SystemSpec::unit(1.0, 1.0).unwrap();
        let st = steady_state(&sys, &bath(1.0, 1.0), Mode::NonSecular).unwrap();
        assert!((st.v1 + 1.935_874_277_563_812e-2).abs() < 1e-10);
        assert!(st.v2.abs() < 1e-12);
        assert!((st.v3 + 4.818_908_911_956_019_7e-1).abs() < 1e-10);
        assert_eq!(st.coherence, st.v1.abs());
        assert!(st.physical);
    }

    #[test]
    fn closed_form_agrees_with_linear_solve() {
        for s in [1.0, 3.0] {
            for t in [0.5, 1.0, 2.0] {
                let k = SteadyKernel::new(&bath(s, t), 1.0).unwrap();
                for (f1, f2) in [(1.0, 1.0), (0.3, 0.9), (2.0, 0.5)] {
                    let sys = SystemSpec::unit(f1, f2).unwrap();
                    let a = k.closed_form(&sys, 0.01, Order::Exact).unwrap();
                    let b = k.linear_solve(&sys, 0.01, Mode::NonSecular).unwrap();
                    assert!(((a.v1 - b.v1) / b.v1).abs() < 1e-10, "s={s} T={t} f=({f1},{f2}) {} {} {} {}", a.v1, b.v1, a.v3, b.v3);
                    assert!((a.v3 - b.v3).abs() < 1e-12, "{f1} {f2} {t} {s} {} {}", a.v3, b.v3);
                }
            }
        }
    }

    #[test]
    fn axes_have_no_coherence() {
        for (f1, f2) in [(0.0, 1.0), (1.0, 0.0)] {
            let st = v1_closed_form(&SystemSpec::unit(f1, f2).unwrap(), &bath(1.0, 1.0)).unwrap();
            assert_eq!(st.v1, 0.0);
            assert_eq!(st.coherence, 0.0);
        }
        let st = steady_state(&SystemSpec::unit(1.0, 0.0).unwrap(), &bath(1.0, 1.0), Mode::NonSecular)
            .unwrap();
        assert_eq!(st.v1, 0.0);
        assert!(matches!(
            steady_state(&SystemSpec::unit(0.0, 1.0).unwrap(), &bath(1.0, 1.0), Mode::NonSecular),
            Err(Error::SingularGenerator { .. })
        ));
    }

    #[test]
    fn sub_ohmic_has_zero_coherence() {
        let sys = SystemSpec::unit(1.0, 1.0).unwrap();
        let b = bath(0.5, 1.0);
        let cf = v1_closed_form(&sys, &b).unwrap();
        assert_eq!(cf.coherence, 0.0);
        assert!(cf.flags.contains(Flags::SUB_OHMIC | Flags::INFINITE_DEPHASING));
        let ls = steady_state(&sys, &b, Mode::NonSecular).unwrap();
        assert_eq!(ls.coherence, 0.0);
        assert!((ls.v3 + 0.5f64.tanh()).abs() < 1e-12);
    }

    #[test]
    fn leading_order_is_linear_and_product_only() {
        let sys = SystemSpec::unit(1.0, 1.0).unwrap();
        let k = SteadyKernel::new(&bath(1.0, 1.0), 1.0).unwrap();
        let r: Vec<f64> = [1e-6, 1e-5, 1e-4]
            .iter()
            .map(|&l| k.closed_form(&sys, l, Order::Leading).unwrap().v1 / l)
            .collect();
        assert!(r.iter().all(|x| ((x - r[0]) / r[0]).abs() < 1e-10));
        let other = k.closed_form(&SystemSpec::unit(2.0, 0.5).unwrap(), 1e-4, Order::Leading).unwrap();
        assert!(((other.v1 - r[2] * 1e-4) / other.v1).abs() < 1e-14);
    }

    #[test]
    fn denominator_zero_is_reported() {
        let k = SteadyKernel::new(&bath(1.0, 1.0), 1.0).unwrap();
        // Δ₁ < 0 at T = 1, so a large λ f₁² closes the gap
        let lambda = -1.0 / k.unit.delta1;
        let sys = SystemSpec::unit(1.0, 0.0).unwrap();
        assert!(matches!(
            k.closed_form(&sys, lambda, Order::Exact),
            Err(Error::DenominatorZero { .. })
        ));
    }

    #[test]
    fn flag_labels_round_trip() {
        let f = Flags::SUB_OHMIC | Flags::DENOMINATOR_ZERO;
        assert_eq!(f.to_labels(), "SubOhmic|DenominatorZero");
        assert_eq!(Flags::from_labels(&f.to_labels()), Some(f));
        assert_eq!(Flags::from_labels(""), Some(Flags::empty()));
        assert_eq!(Flags::from_labels("Bogus"), None);
        let json = serde_json::to_string(&f).unwrap();
        assert_eq!(serde_json::from_str::<Flags>(&json).unwrap(), f);
    }

    #[test]
    fn parameter_flags() {
        let sys = SystemSpec::unit(1.0, 1.0).unwrap();
        assert_eq!(Flags::for_parameters(&sys, &bath(1.0, 1.0)), Flags::empty());
        assert_eq!(
            Flags::for_parameters(&sys, &bath(3.0, 1.0)),
            Flags::NO_DEPHASING_TERM | Flags::CUTOFF_GAMMA_GENERALIZED
        );
        let strong = SystemSpec::unit(10.0, 1.0).unwrap();
        assert!(Flags::for_parameters(&strong, &bath(1.0, 1.0)).contains(Flags::WEAK_COUPLING_WARNING));
    }
}
