//! Bloch–Redfield generator of a qubit coupled through `A = f₁σₓ + f₂σ_z`.
//!
//! With `H_S = (ω₀/2)σ_z` the coupling splits into eigenoperators
//! `A(ω₀) = f₁σ₋`, `A(−ω₀) = f₁σ₊`, `A(0) = f₂σ_z`, and the generator is
//!
//! ```text
//! ρ̇ = −i[H_S, ρ] + Σ_{ω,ω'} { Γ(ω) [A(ω) ρ A(ω')† − A(ω')† A(ω) ρ] + h.c. }
//! ```
//!
//! The non-secular mode keeps every pair `(ω, ω')`; the secular (Davies)
//! mode keeps `ω = ω'` only. Both are expanded in the Pauli basis into the
//! affine flow `v̇ = M v + b` for `v = ⟨σ⟩`.

use std::fmt;

use nalgebra::{Matrix3, Vector3};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::bath::{BathSpec, CoefficientTime, Rate, RedfieldCoefficients};
use crate::error::{check_finite, Error, Result};
use crate::superop::{self, Op2, Superoperator};

/// Above this weight the coupling is no longer perturbative.
pub const WEAK_COUPLING_WEIGHT: f64 = 3.0;

/// Qubit splitting and coupling weights (σₓ channel `f1`, σ_z channel `f2`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemSpec {
    pub omega0: f64,
    pub f1: f64,
    pub f2: f64,
}

impl SystemSpec {
    pub fn new(omega0: f64, f1: f64, f2: f64) -> Result<Self> {
        let sys = SystemSpec { omega0, f1, f2 };
        sys.validate()?;
        Ok(sys)
    }

    /// `ω₀ = 1` with the given weights.
    pub fn unit(f1: f64, f2: f64) -> Result<Self> {
        Self::new(1.0, f1, f2)
    }

    pub fn validate(&self) -> Result<()> {
        check_finite("omega0", self.omega0)?;
        check_finite("f1", self.f1)?;
        check_finite("f2", self.f2)?;
        if self.omega0 <= 0.0 {
            return Err(Error::InvalidParameter {
                name: "omega0",
                value: self.omega0,
                reason: "must be positive",
            });
        }
        if self.f1 < 0.0 {
            return Err(Error::InvalidParameter {
                name: "f1",
                value: self.f1,
                reason: "must be non-negative",
            });
        }
        if self.f2 < 0.0 {
            return Err(Error::InvalidParameter {
                name: "f2",
                value: self.f2,
                reason: "must be non-negative",
            });
        }
        Ok(())
    }

    pub fn with_weights(self, f1: f64, f2: f64) -> Self {
        SystemSpec { f1, f2, ..self }
    }

    /// True when either weight leaves the perturbative regime.
    pub fn weak_coupling_warning(&self) -> bool {
        self.f1 > WEAK_COUPLING_WEIGHT || self.f2 > WEAK_COUPLING_WEIGHT
    }

    /// `H_S = (ω₀/2) σ_z`.
    pub fn hamiltonian(&self) -> Op2 {
        superop::sigma_z() * Complex64::from(0.5 * self.omega0)
    }

    /// Coupling operator `f₁σₓ + f₂σ_z`.
    pub fn coupling_operator(&self) -> Op2 {
        superop::sigma_x() * Complex64::from(self.f1) + superop::sigma_z() * Complex64::from(self.f2)
    }
}

/// One eigenoperator component of the coupling.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Channel {
    pub frequency: f64,
    pub operator: Op2,
}

/// `[(ω₀, f₁σ₋), (−ω₀, f₁σ₊), (0, f₂σ_z)]`; the operators sum to `A`.
pub fn eigenoperator_decomposition(system: &SystemSpec) -> [Channel; 3] {
    [
        Channel {
            frequency: system.omega0,
            operator: superop::sigma_minus() * Complex64::from(system.f1),
        },
        Channel {
            frequency: -system.omega0,
            operator: superop::sigma_plus() * Complex64::from(system.f1),
        },
        Channel {
            frequency: 0.0,
            operator: superop::sigma_z() * Complex64::from(system.f2),
        },
    ]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Mode {
    NonSecular,
    Secular,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::NonSecular => "nonsecular",
            Mode::Secular => "secular",
        })
    }
}

impl std::str::FromStr for Mode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace(['-', '_'], "").as_str() {
            "nonsecular" => Ok(Mode::NonSecular),
            "secular" => Ok(Mode::Secular),
            other => Err(Error::Domain(format!("unknown mode `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum GeneratorKind {
    Regular,
    /// Sub-Ohmic σ_z channel: the transverse block carries an infinite
    /// dephasing rate on top of the stored finite part.
    InfiniteDephasing,
}

/// Affine Bloch flow `v̇ = M v + b`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlochGenerator {
    pub m: Matrix3<f64>,
    pub b: Vector3<f64>,
    pub mode: Mode,
    pub kind: GeneratorKind,
    pub coefficient_time: CoefficientTime,
    pub omega0: f64,
}

impl BlochGenerator {
    pub fn rate_of_change(&self, v: &Vector3<f64>) -> Vector3<f64> {
        self.m * v + self.b
    }

    /// The generator as a map on 2×2 operators.
    pub fn superoperator(&self) -> Superoperator {
        let p = superop::paulis();
        let (m, b) = (self.m, self.b);
        Superoperator::from_map(|x| {
            // x = (Tr x) I/2 + Σ_j Tr(σ_j x) σ_j/2
            let tr = x.trace() * 0.5;
            let mut out = Op2::zeros();
            for i in 0..3 {
                let mut coeff = tr * b[i];
                for j in 0..3 {
                    coeff += (p[j] * x).trace() * 0.5 * m[(i, j)];
                }
                out += p[i] * coeff;
            }
            out
        })
    }
}

/// Expands the Redfield form into `(M, b)`.
///
/// A divergent zero-frequency rate with `f₂ > 0` yields an
/// [`GeneratorKind::InfiniteDephasing`] generator whose stored `M` omits the
/// infinite term.
pub fn build_generator(
    system: &SystemSpec,
    coeffs: &RedfieldCoefficients,
    mode: Mode,
) -> Result<BlochGenerator> {
    system.validate()?;
    let SystemSpec { omega0: w, f1, f2 } = *system;
    let (dephasing, kind) = match coeffs.gamma_zero {
        Rate::Finite(g) => (g, GeneratorKind::Regular),
        Rate::Divergent if f2 > 0.0 => (0.0, GeneratorKind::InfiniteDephasing),
        Rate::Divergent => (0.0, GeneratorKind::Regular),
    };
    let gsum = coeffs.gamma_plus + coeffs.gamma_minus;
    let gdiff = coeffs.gamma_plus - coeffs.gamma_minus;
    let d1 = coeffs.delta1;
    let dz = dephasing * f2 * f2;
    let (m, b) = match mode {
        Mode::NonSecular => {
            let cross = f1 * f2;
            let m = Matrix3::new(
                -dz, -w, cross * gsum,
                w + f1 * f1 * d1, -dz - f1 * f1 * gsum, cross * d1,
                cross * dephasing, 0.0, -f1 * f1 * gsum,
            );
            let b = Vector3::new(
                cross * gdiff,
                cross * (coeffs.delta2 - 4.0 * coeffs.shift_zero),
                -f1 * f1 * gdiff,
            );
            (m, b)
        }
        Mode::Secular => {
            let transverse = dz + 0.5 * f1 * f1 * gsum;
            let precession = w + 0.5 * f1 * f1 * d1;
            let m = Matrix3::new(
                -transverse, -precession, 0.0,
                precession, -transverse, 0.0,
                0.0, 0.0, -f1 * f1 * gsum,
            );
            (m, Vector3::new(0.0, 0.0, -f1 * f1 * gdiff))
        }
    };
    Ok(BlochGenerator {
        m,
        b,
        mode,
        kind,
        coefficient_time: coeffs.time,
        omega0: w,
    })
}

/// Asymptotic generator for a bath.
pub fn asymptotic_generator(system: &SystemSpec, bath: &BathSpec, mode: Mode) -> Result<BlochGenerator> {
    let coeffs = RedfieldCoefficients::asymptotic(bath, system.omega0)?;
    build_generator(system, &coeffs, mode)
}

/// Gibbs state of `H_S`: `(0, 0, −tanh(ω₀/2T))`.
pub fn secular_steady_state(system: &SystemSpec, bath: &BathSpec) -> Result<Vector3<f64>> {
    system.validate()?;
    bath.validate()?;
    if system.f1 == 0.0 {
        return Err(Error::NonUniqueSteadyState(
            "populations are not relaxed without the σₓ channel (f1 = 0)",
        ));
    }
    if bath.lambda == 0.0 {
        return Err(Error::NonUniqueSteadyState("no bath coupling (lambda = 0)"));
    }
    Ok(Vector3::new(0.0, 0.0, -gibbs_polarization(system.omega0, bath.temperature)))
}

/// `tanh(ω₀/2T)`, equal to 1 at T = 0.
pub fn gibbs_polarization(omega0: f64, temperature: f64) -> f64 {
    if temperature == 0.0 {
        1.0
    } else {
        (0.5 * omega0 / temperature).tanh()
    }
}
