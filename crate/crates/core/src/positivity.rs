//! Complete-positivity diagnostics.
//!
//! A trace- and Hermiticity-preserving generator has the unique form
//!
//! ```text
//! L(ρ) = −i[H, ρ] + Σ_{k,l=1..3} A_kl (F_k ρ F_l − ½{F_l F_k, ρ})
//! ```
//!
//! over the normalized Pauli basis `F_k = σ_k/√2` with `H` traceless. The
//! generator is of Lindblad form iff the Kossakowski matrix `A` is positive
//! semidefinite.

use std::f64::consts::FRAC_1_SQRT_2;

use nalgebra::{Matrix3, Matrix4, Vector3};
use num_complex::Complex64;

use crate::bath::BathSpec;
use crate::error::{Error, Result};
use crate::redfield::{build_generator, BlochGenerator, GeneratorKind, Mode, SystemSpec};
use crate::steady::SteadyKernel;
use crate::superop::{self, max_abs, Op2, Superoperator};

/// Relative residual allowed in the trace and Hermiticity checks.
pub const PRESERVATION_TOL: f64 = 1e-12;

/// GKS data of a qubit generator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KossakowskiData {
    /// Hermitian 3×3 Kossakowski matrix.
    pub a: Matrix3<Complex64>,
    /// Ascending eigenvalues of `a`.
    pub eigenvalues: [f64; 3],
    /// `Σ (|μ| − μ)/2`.
    pub negativity: f64,
    /// Full effective Hamiltonian `H`.
    pub hamiltonian: Op2,
    /// `H` minus the bare system Hamiltonian.
    pub lamb_hamiltonian: Op2,
}

impl KossakowskiData {
    /// True when no eigenvalue is below `-tol`.
    pub fn is_lindblad(&self, tol: f64) -> bool {
        self.eigenvalues[0] >= -tol
    }

    /// The generator rebuilt from `(H, A)`.
    pub fn rebuild(&self) -> Superoperator {
        rebuild(&self.hamiltonian, &self.a)
    }
}

/// Normalized basis `{I, σx, σy, σz}/√2`.
pub fn pauli_basis() -> [Op2; 4] {
    let s = Complex64::from(FRAC_1_SQRT_2);
    let [x, y, z] = superop::paulis();
    [superop::identity() * s, x * s, y * s, z * s]
}

fn basis_label(k: usize, l: usize) -> String {
    format!("|{k}><{l}|")
}

/// Checks `Tr L(X) = 0` and `L(X†) = L(X)†` on the matrix units.
pub fn check_preservation(sup: &Superoperator) -> Result<()> {
    let tol = PRESERVATION_TOL * sup.scale().max(1.0);
    for k in 0..2 {
        for l in 0..2 {
            let image = sup.apply(&superop::matrix_unit(k, l));
            let tr = image.trace().norm();
            if tr > tol {
                return Err(Error::NotTracePreserving {
                    element: basis_label(k, l),
                    residual: tr,
                });
            }
            let adjoint_image = sup.apply(&superop::matrix_unit(l, k));
            let res = max_abs(&(adjoint_image - image.adjoint()));
            if res > tol {
                return Err(Error::NotHermiticityPreserving {
                    element: basis_label(k, l),
                    residual: res,
                });
            }
        }
    }
    Ok(())
}

/// Coefficients `c_ij` of `L(ρ) = Σ c_ij G_i ρ G_j†` for an orthonormal basis `G`.
fn process_coefficients(sup: &Superoperator, basis: &[Op2; 4]) -> Matrix4<Complex64> {
    // Σ_kl (X E_kl Y)_kl = Tr X · Tr Y
    let images: Vec<Op2> = (0..4).map(|c| sup.apply(&superop::matrix_unit(c / 2, c % 2))).collect();
    Matrix4::from_fn(|i, j| {
        let mut acc = Complex64::default();
        for (c, image) in images.iter().enumerate() {
            let (k, l) = (c / 2, c % 2);
            acc += (basis[i].adjoint() * image * basis[j])[(k, l)];
        }
        acc
    })
}

/// Ascending eigenvalues of a Hermitian 3×3 matrix.
pub fn hermitian_eigenvalues(a: &Matrix3<Complex64>) -> [f64; 3] {
    let herm = (a + a.adjoint()) * Complex64::from(0.5);
    let ev = herm.symmetric_eigenvalues();
    let mut out = [ev[0], ev[1], ev[2]];
    out.sort_by(f64::total_cmp);
    out
}

/// `Σ (|μ| − μ)/2`.
pub fn negativity_of(eigenvalues: &[f64]) -> f64 {
    eigenvalues.iter().map(|&mu| 0.5 * (mu.abs() - mu)).sum()
}

/// GKS decomposition of a superoperator; `reference` is subtracted from the
/// extracted Hamiltonian to give `lamb_hamiltonian`.
pub fn gks_decompose_superoperator(sup: &Superoperator, reference: &Op2) -> Result<KossakowskiData> {
    check_preservation(sup)?;
    let basis = pauli_basis();
    let c = process_coefficients(sup, &basis);
    let a = Matrix3::from_fn(|i, j| c[(i + 1, j + 1)]);
    let a = (a + a.adjoint()) * Complex64::from(0.5);
    let mut f = Op2::zeros();
    for k in 1..4 {
        f += basis[k] * (c[(k, 0)] * FRAC_1_SQRT_2);
    }
    let i = Complex64::i();
    let hamiltonian = (f - f.adjoint()) * (i * 0.5);
    let eigenvalues = hermitian_eigenvalues(&a);
    Ok(KossakowskiData {
        a,
        eigenvalues,
        negativity: negativity_of(&eigenvalues),
        hamiltonian,
        lamb_hamiltonian: hamiltonian - reference,
    })
}

/// GKS decomposition of a Bloch generator. The bare precession `(ω₀/2)σ_z`
/// is removed before the projection and added back to the Hamiltonian.
///
/// Infinite-dephasing generators are rejected: the cross terms grow with the
/// σ_z rate, so `𝒩_K` has no finite limit.
pub fn gks_decompose(gen: &BlochGenerator) -> Result<KossakowskiData> {
    if gen.kind == GeneratorKind::InfiniteDephasing {
        return Err(Error::InfiniteDephasing("the Kossakowski matrix"));
    }
    let mut dissipative = *gen;
    dissipative.m[(0, 1)] += gen.omega0;
    dissipative.m[(1, 0)] -= gen.omega0;
    let bare = superop::sigma_z() * Complex64::from(0.5 * gen.omega0);
    let mut data = gks_decompose_superoperator(&dissipative.superoperator(), &Op2::zeros())?;
    data.hamiltonian = bare + data.lamb_hamiltonian;
    Ok(data)
}

/// `L(ρ) = −i[H, ρ] + Σ A_kl (F_k ρ F_l − ½{F_l F_k, ρ})`.
pub fn rebuild(hamiltonian: &Op2, a: &Matrix3<Complex64>) -> Superoperator {
    let basis = pauli_basis();
    let i = Complex64::i();
    Superoperator::from_map(|rho| {
        let mut out = (hamiltonian * rho - rho * hamiltonian) * (-i);
        for k in 0..3 {
            for l in 0..3 {
                let (fk, fl) = (basis[k + 1], basis[l + 1]);
                let prod = fl * fk;
                out += (fk * rho * fl - (prod * rho + rho * prod) * Complex64::from(0.5)) * a[(k, l)];
            }
        }
        out
    })
}

/// Eigenvalue negativity of `ρ = (I + v·σ)/2`: `max(0, (|v| − 1)/2)`.
pub fn state_negativity(v: &Vector3<f64>) -> f64 {
    (0.5 * (v.norm() - 1.0)).max(0.0)
}

/// `𝒩_K(λ)/λ` across a coupling grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalingReport {
    pub lambdas: Vec<f64>,
    pub negativities: Vec<f64>,
    pub ratios: Vec<f64>,
    /// `(max − min)/|mean|` of the ratios at λ ≤ `WEAK_SCALING_LAMBDA`.
    pub spread: f64,
    pub proportional: bool,
}

/// Largest coupling included in the proportionality check.
pub const WEAK_SCALING_LAMBDA: f64 = 1e-3;

/// Relative spread below which `𝒩_K ∝ λ` is accepted.
pub const SCALING_SPREAD_TOL: f64 = 0.01;

/// Evaluates `𝒩_K` on a λ grid for fixed bath shape and temperature.
pub fn kossakowski_negativity_scaling(
    system: &SystemSpec,
    bath: &BathSpec,
    mode: Mode,
    lambdas: &[f64],
) -> Result<ScalingReport> {
    if lambdas.len() < 2 || lambdas.iter().any(|&l| !(l > 0.0)) {
        return Err(Error::Domain("scaling needs at least two positive couplings".into()));
    }
    let lo = lambdas.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = lambdas.iter().cloned().fold(0.0, f64::max);
    if hi / lo < 100.0 {
        return Err(Error::Domain("coupling grid must span at least two decades".into()));
    }
    let kernel = SteadyKernel::new(bath, system.omega0)?;
    let mut negativities = Vec::with_capacity(lambdas.len());
    for &l in lambdas {
        let gen = build_generator(system, &kernel.coefficients(l), mode)?;
        negativities.push(gks_decompose(&gen)?.negativity);
    }
    let ratios: Vec<f64> = negativities.iter().zip(lambdas).map(|(n, l)| n / l).collect();
    let weak: Vec<f64> = ratios
        .iter()
        .zip(lambdas)
        .filter(|(_, &l)| l <= WEAK_SCALING_LAMBDA)
        .map(|(r, _)| *r)
        .collect();
    let spread = relative_spread(&weak);
    Ok(ScalingReport {
        lambdas: lambdas.to_vec(),
        negativities,
        ratios,
        spread,
        proportional: spread < SCALING_SPREAD_TOL,
    })
}

/// `(max − min)/|mean|`; zero for an all-zero set.
pub fn relative_spread(values: &[f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min = values.iter().cloned().fold(f64::INFINITY, f64::min);
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    if max == min {
        0.0
    } else {
        (max - min) / mean.abs()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bath::RedfieldCoefficients;

    fn generator(f1: f64, f2: f64, mode: Mode) -> BlochGenerator {
        let bath = BathSpec::new(0.01, 1.0, 10.0, 1.0).unwrap();
        let c = RedfieldCoefficients::asymptotic(&bath, 1.0).unwrap();
        build_generator(&SystemSpec::unit(f1, f2).unwrap(), &c, mode).unwrap()
    }

    #[test]
    fn pure_dephasing_by_hand() {
        // L(ρ) = γ(σz ρ σz − ρ) = 2γ (F₃ ρ F₃ − ½{F₃F₃, ρ})
        let g = 0.37;
        let z = superop::sigma_z();
        let sup = Superoperator::from_map(|r| (z * r * z - r) * Complex64::from(g));
        let d = gks_decompose_superoperator(&sup, &Op2::zeros()).unwrap();
        let expected = Matrix3::from_diagonal(&Vector3::new(0.0, 0.0, 2.0 * g)).map(Complex64::from);
        assert!(max_abs(&(d.a - expected)) < 1e-15);
        assert_eq!(d.negativity, 0.0);
        assert!(max_abs(&d.hamiltonian) < 1e-15);
    }

    #[test]
    fn eigenvalues_match_trigonometric_formula() {
        let a = Matrix3::new(
            Complex64::new(2.0, 0.0), Complex64::new(0.3, 0.4), Complex64::new(-0.1, 0.2),
            Complex64::new(0.3, -0.4), Complex64::new(-1.0, 0.0), Complex64::new(0.5, -0.25),
            Complex64::new(-0.1, -0.2), Complex64::new(0.5, 0.25), Complex64::new(0.5, 0.0),
        );
        // roots of det(A − μ) via the trigonometric cubic solution
        let q = a.trace().re / 3.0;
        let b = a - Matrix3::identity() * Complex64::from(q);
        let p = ((b * b).trace().re / 6.0).sqrt();
        let r = ((b / Complex64::from(p)).determinant().re / 2.0).clamp(-1.0, 1.0);
        let phi = r.acos() / 3.0;
        let third = 2.0 * std::f64::consts::PI / 3.0;
        let mut roots = [q + 2.0 * p * phi.cos(), q + 2.0 * p * (phi + third).cos(), q + 2.0 * p * (phi + 2.0 * third).cos()];
        roots.sort_by(f64::total_cmp);
        let ev = hermitian_eigenvalues(&a);
        for (x, y) in ev.iter().zip(roots) {
            assert!((x - y).abs() < 1e-13);
        }
        assert!((ev.iter().sum::<f64>() - a.trace().re).abs() < 1e-13);
    }

    #[test]
    fn secular_is_lindblad_and_nonsecular_is_not() {
        let sec = gks_decompose(&generator(1.0, 1.0, Mode::Secular)).unwrap();
        assert!(sec.negativity <= 1e-12);
        let non = gks_decompose(&generator(1.0, 1.0, Mode::NonSecular)).unwrap();
        assert!(non.negativity > 1e-6);
        assert!(!non.is_lindblad(0.0));
    }

    #[test]
    fn round_trip_and_lamb_part() {
        for mode in [Mode::Secular, Mode::NonSecular] {
            let gen = generator(0.8, 1.2, mode);
            let d = gks_decompose(&gen).unwrap();
            assert!(d.rebuild().distance(&gen.superoperator()) < 1e-12);
            assert!(max_abs(&(d.a - d.a.adjoint())) < 1e-15);
            assert!(d.hamiltonian.trace().norm() < 1e-15);
            assert!(max_abs(&(d.lamb_hamiltonian - d.lamb_hamiltonian.adjoint())) < 1e-15);
        }
    }

    #[test]
    fn negativity_is_basis_independent() {
        // {I/√2, σ₊, σ₋, σz/√2} is another orthonormal operator basis
        let gen = generator(1.0, 1.0, Mode::NonSecular);
        let s = Complex64::from(FRAC_1_SQRT_2);
        let alt = [
            superop::identity() * s,
            superop::sigma_plus(),
            superop::sigma_minus(),
            superop::sigma_z() * s,
        ];
        let mut sup = gen.superoperator();
        sup.0 -= Superoperator::from_map(|r| {
            let h = superop::sigma_z() * Complex64::from(0.5);
            (h * r - r * h) * (-Complex64::i())
        })
        .0;
        let c = process_coefficients(&sup, &alt);
        let a_alt = Matrix3::from_fn(|i, j| c[(i + 1, j + 1)]);
        let ev = hermitian_eigenvalues(&a_alt);
        let d = gks_decompose(&gen).unwrap();
        for (x, y) in ev.iter().zip(d.eigenvalues) {
            assert!((x - y).abs() < 1e-14);
        }
    }

    #[test]
    fn rejects_non_preserving_maps() {
        let sup = Superoperator::from_map(|r| *r);
        assert!(matches!(
            gks_decompose_superoperator(&sup, &Op2::zeros()),
            Err(Error::NotTracePreserving { .. })
        ));
        let x = superop::sigma_x();
        let skew = Superoperator::from_map(|r| (x * r - r * x) * Complex64::from(1.0));
        assert!(matches!(
            gks_decompose_superoperator(&skew, &Op2::zeros()),
            Err(Error::NotHermiticityPreserving { .. })
        ));
    }

    #[test]
    fn infinite_dephasing_has_no_finite_negativity() {
        let bath = BathSpec::new(0.01, 0.5, 10.0, 1.0).unwrap();
        let c = RedfieldCoefficients::asymptotic(&bath, 1.0).unwrap();
        let gen = build_generator(&SystemSpec::unit(1.0, 1.0).unwrap(), &c, Mode::NonSecular).unwrap();
        assert!(matches!(gks_decompose(&gen), Err(Error::InfiniteDephasing(_))));
        // the negativity grows with a large finite rate
        let at = |g: f64| {
            let mut big = c;
            big.gamma_zero = crate::bath::Rate::Finite(g);
            let gen = build_generator(&SystemSpec::unit(1.0, 1.0).unwrap(), &big, Mode::NonSecular).unwrap();
            gks_decompose(&gen).unwrap().negativity
        };
        assert!(at(1e4) > 5.0 * at(1e3));
    }

    #[test]
    fn state_negativity_values() {
        assert_eq!(state_negativity(&Vector3::new(0.0, 0.0, 1.0)), 0.0);
        assert!((state_negativity(&Vector3::new(0.0, 0.0, 1.2)) - 0.1).abs() < 1e-15);
        assert_eq!(state_negativity(&Vector3::new(0.1, 0.2, 0.3)), 0.0);
    }

    #[test]
    fn negativity_scales_with_lambda() {
        let bath = BathSpec::new(0.01, 1.0, 10.0, 1.0).unwrap();
        let sys = SystemSpec::unit(1.0, 1.0).unwrap();
        let r = kossakowski_negativity_scaling(&sys, &bath, Mode::NonSecular, &[1e-6, 1e-5, 1e-4, 1e-3]).unwrap();
        assert!(r.proportional, "spread {}", r.spread);
        let sec = kossakowski_negativity_scaling(&sys, &bath, Mode::Secular, &[1e-6, 1e-3]).unwrap();
        assert!(sec.negativities.iter().all(|&n| n == 0.0));
        assert!(kossakowski_negativity_scaling(&sys, &bath, Mode::Secular, &[1e-4, 1e-3]).is_err());
    }
}
