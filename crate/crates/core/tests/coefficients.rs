//! Bath coefficients against independently computed reference values.

use std::f64::consts::PI;

use ssc_core::bath::{half_fourier_gamma, lamb_shift, BathSpec, CoefficientTime, PvStrategy, Rate, RedfieldCoefficients};

/// `(s, T, S(+1), S(−1))` at λ = 0.01, Ω = 10, from adaptive Cauchy-weight
/// quadrature in double precision.
const SHIFTS: [(f64, f64, f64, f64); 4] = [
    (1.0, 1.0, -0.101_474_947_017_229_31, -0.093_062_445_101_162_46),
    (3.0, 1.0, -0.211_301_409_300_330_87, -0.190_643_964_620_853_1),
    (1.0, 0.5, -0.108_040_289_208_330_21, -0.086_497_102_910_061_57),
    (3.0, 2.0, -0.211_939_287_883_366_1, -0.190_006_086_037_817_85),
];

fn bath(s: f64, t: f64) -> BathSpec {
    BathSpec::new(0.01, s, 10.0, t).unwrap()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

#[test]
fn lamb_shifts_match_reference_quadrature() {
    for (s, t, plus, minus) in SHIFTS {
        let b = bath(s, t);
        for strategy in [PvStrategy::PolePairing, PvStrategy::SingularitySubtraction] {
            let p = lamb_shift(1.0, &b, strategy).unwrap();
            let m = lamb_shift(-1.0, &b, strategy).unwrap();
            assert!(rel(p, plus) < 1e-10, "s={s} T={t} {strategy:?}: {p} vs {plus}");
            assert!(rel(m, minus) < 1e-10, "s={s} T={t} {strategy:?}: {m} vs {minus}");
        }
        let k = RedfieldCoefficients::asymptotic(&b, 1.0).unwrap();
        assert!(rel(k.delta1, 2.0 * (plus - minus)) < 1e-9);
        assert!(rel(k.delta2, 2.0 * (plus + minus)) < 1e-10);
        // S(0) = −λ Ω Γ(s)
        let gamma_s = if s == 1.0 { 1.0 } else { 2.0 };
        assert!(rel(k.shift_zero, -0.1 * gamma_s) < 1e-10);
    }
}

#[test]
fn second_lamb_combination_is_temperature_independent() {
    let a = RedfieldCoefficients::asymptotic(&bath(1.0, 0.3), 1.0).unwrap();
    let b = RedfieldCoefficients::asymptotic(&bath(1.0, 4.0), 1.0).unwrap();
    assert!(rel(a.delta2, b.delta2) < 1e-10);
    assert!(rel(a.delta1, b.delta1) > 1e-2);
}

#[test]
fn detailed_balance_and_rate_sum() {
    for (s, t) in [(1.0, 0.5), (1.0, 2.0), (3.0, 1.0)] {
        let b = bath(s, t);
        let k = RedfieldCoefficients::asymptotic(&b, 1.0).unwrap();
        assert!(rel(k.gamma_minus / k.gamma_plus, (-1.0 / t).exp()) < 1e-12);
        let j_eff = ssc_core::bath::j_eff(1.0, &b).unwrap();
        assert!(rel(k.gamma_plus + k.gamma_minus, 2.0 * PI * j_eff) < 1e-12);
    }
}

#[test]
fn zero_frequency_rate_conventions() {
    let k = RedfieldCoefficients::asymptotic(&bath(1.0, 1.5), 1.0).unwrap();
    assert_eq!(k.gamma_zero, Rate::Finite(4.0 * PI * 0.01 * 1.5));
    let k3 = RedfieldCoefficients::asymptotic(&bath(3.0, 1.5), 1.0).unwrap();
    assert_eq!(k3.gamma_zero, Rate::Finite(0.0));
    let sub = RedfieldCoefficients::asymptotic(&bath(0.5, 1.5), 1.0).unwrap();
    assert!(sub.gamma_zero.is_divergent());
    assert!(sub.shift_zero.is_finite());
}

#[test]
fn finite_time_coefficients_approach_the_limit() {
    let b = bath(1.0, 1.0);
    let limit = RedfieldCoefficients::asymptotic(&b, 1.0).unwrap();
    let err = |t: f64| {
        let k = RedfieldCoefficients::finite_time(&b, 1.0, t).unwrap();
        [
            rel(k.gamma_plus, limit.gamma_plus),
            rel(k.gamma_minus, limit.gamma_minus),
            rel(k.gamma_zero.finite().unwrap(), limit.gamma_zero.finite().unwrap()),
            rel(k.delta1, limit.delta1),
            rel(k.delta2, limit.delta2),
            rel(k.shift_zero, limit.shift_zero),
        ]
    };
    let early = err(20.0);
    let late = err(1000.0);
    for (e, l) in early.iter().zip(&late) {
        assert!(l < e, "{early:?} {late:?}");
        assert!(*l < 2e-3, "{late:?}");
    }
    let start = RedfieldCoefficients::finite_time(&b, 1.0, 1e-9).unwrap();
    assert!(start.gamma_plus.abs() < 1e-8 && start.delta1.abs() < 1e-8);
}

#[test]
fn zero_frequency_tail_decays_like_inverse_time() {
    // Re Γ(0, t) − Re Γ(0, ∞) ≈ −2λT/(Ω t) once t ≫ 1/Ω, 1/T
    let b = bath(1.0, 1.0);
    let limit = 0.25 * 4.0 * PI * 0.01;
    for t in [200.0, 800.0] {
        let g = half_fourier_gamma(0.0, CoefficientTime::Finite(t), &b).unwrap().finite().unwrap();
        let predicted = -2.0 * 0.01 * 1.0 / (10.0 * t);
        assert!(rel(g.re - limit, predicted) < 0.05, "t={t}: {} vs {predicted}", g.re - limit);
    }
}
