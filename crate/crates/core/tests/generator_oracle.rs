//! The Bloch-form generator against a direct operator-level construction.

use nalgebra::{Matrix3, Vector3};
use num_complex::Complex64;

use ssc_core::bath::{BathSpec, RedfieldCoefficients};
use ssc_core::redfield::{build_generator, Mode, SystemSpec};
use ssc_core::superop::{self, Op2, Superoperator};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// `L(ρ) = −i[H, ρ] + Σ Γ(ω)(A_ω ρ A_ω'† − A_ω'† A_ω ρ) + h.c.`, summed over
/// all frequency pairs (Redfield) or over equal frequencies only (secular).
fn operator_generator(system: &SystemSpec, k: &RedfieldCoefficients, secular: bool) -> Superoperator {
    let h = superop::sigma_z() * c(0.5 * system.omega0, 0.0);
    let gammas = [
        c(k.re_plus(), k.shift_plus),
        c(k.re_minus(), k.shift_minus),
        c(k.re_zero().unwrap(), k.shift_zero),
    ];
    let ops: [Op2; 3] = [
        superop::sigma_minus() * c(system.f1, 0.0),
        superop::sigma_plus() * c(system.f1, 0.0),
        superop::sigma_z() * c(system.f2, 0.0),
    ];
    let i = c(0.0, 1.0);
    Superoperator::from_map(|rho| {
        let mut out = -(h * rho - rho * h) * i;
        for a in 0..3 {
            for b in 0..3 {
                if secular && a != b {
                    continue;
                }
                let (aw, awp) = (ops[a], ops[b].adjoint());
                // the conjugate half is written out: ρ need not be Hermitian here
                out += (aw * rho * awp - awp * aw * rho) * gammas[a];
                out += (ops[b] * rho * aw.adjoint() - rho * aw.adjoint() * ops[b]) * gammas[a].conj();
            }
        }
        out
    })
}

fn reference() -> (BathSpec, RedfieldCoefficients) {
    let bath = BathSpec::new(0.01, 1.0, 10.0, 1.0).unwrap();
    let k = RedfieldCoefficients::asymptotic(&bath, 1.0).unwrap();
    (bath, k)
}

#[test]
fn redfield_matches_operator_form() {
    let (_, k) = reference();
    for (f1, f2) in [(1.0, 1.0), (0.3, 1.7), (1.0, 0.0), (0.0, 1.0), (2.0, 0.5)] {
        let system = SystemSpec::unit(f1, f2).unwrap();
        for (mode, secular) in [(Mode::NonSecular, false), (Mode::Secular, true)] {
            let gen = build_generator(&system, &k, mode).unwrap();
            let oracle = operator_generator(&system, &k, secular);
            let d = gen.superoperator().distance(&oracle);
            assert!(d < 1e-15, "f = ({f1}, {f2}) {mode}: {d:e}");
        }
    }
}

#[test]
fn frozen_bloch_matrix() {
    let (_, k) = reference();
    let gen = build_generator(&SystemSpec::unit(1.0, 1.0).unwrap(), &k, Mode::NonSecular).unwrap();
    let m = Matrix3::new(
        -0.125_663_706_143_591_74, -1.0, 0.123_026_403_176_609_32,
        0.983_174_996_167_866_4, -0.248_690_109_320_201_05, -0.016_825_003_832_133_64,
        0.125_663_706_143_591_74, 0.0, -0.123_026_403_176_609_32,
    );
    let b = Vector3::new(0.056_852_611_703_898_53, 0.010_925_215_763_216_42, -0.056_852_611_703_898_53);
    assert!((gen.m - m).amax() < 1e-12, "{}", gen.m);
    assert!((gen.b - b).amax() < 1e-12, "{}", gen.b);

    let (m2, b2) = gen.superoperator().to_bloch();
    assert!((m2 - gen.m).amax() < 1e-15);
    assert!((b2 - gen.b).amax() < 1e-15);
}

#[test]
fn secular_drops_exactly_the_cross_frequency_terms() {
    let (_, k) = reference();
    let system = SystemSpec::unit(1.0, 1.0).unwrap();
    let full = operator_generator(&system, &k, false);
    let secular = operator_generator(&system, &k, true);
    let diff = Superoperator(full.0 - secular.0);
    let sigma_x = superop::sigma_x();
    assert!(superop::max_abs(&diff.apply(&superop::identity())) > 1e-3);
    assert!(superop::max_abs(&diff.apply(&sigma_x)) > 1e-3);
}

