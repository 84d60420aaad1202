//! Dormand–Prince 5(4) integrator for small dense systems.

use std::ops::ControlFlow;

use nalgebra::SVector;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    /// Initial step; chosen automatically when `None`.
    pub h_init: Option<f64>,
    pub h_max: f64,
    pub max_steps: usize,
}

impl Default for OdeOptions {
    fn default() -> Self {
        OdeOptions {
            rtol: 1e-9,
            atol: 1e-12,
            h_init: None,
            h_max: f64::INFINITY,
            max_steps: 5_000_000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct OdeStats {
    pub accepted: usize,
    pub rejected: usize,
    pub evaluations: usize,
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

fn error_norm<const N: usize>(err: &SVector<f64, N>, y0: &SVector<f64, N>, y1: &SVector<f64, N>, o: &OdeOptions) -> f64 {
    let mut acc = 0.0;
    for i in 0..N {
        let sc = o.atol + o.rtol * y0[i].abs().max(y1[i].abs());
        acc += (err[i] / sc).powi(2);
    }
    (acc / N as f64).sqrt()
}

/// Integrates `y' = f(t, y)` from `t0` to `t_end`, calling `observer` after
/// the initial point and after every accepted step. Breaking from the
/// observer stops the integration early.
pub fn dopri5<const N: usize, F, O>(
    mut f: F,
    t0: f64,
    y0: SVector<f64, N>,
    t_end: f64,
    opts: &OdeOptions,
    mut observer: O,
) -> Result<(f64, SVector<f64, N>, OdeStats)>
where
    F: FnMut(f64, &SVector<f64, N>) -> SVector<f64, N>,
    O: FnMut(f64, &SVector<f64, N>) -> ControlFlow<()>,
{
    if !(t_end > t0) || !t_end.is_finite() {
        return Err(Error::Domain(format!("integration interval [{t0}, {t_end}] is empty")));
    }
    let mut stats = OdeStats::default();
    let mut t = t0;
    let mut y = y0;
    if observer(t, &y).is_break() {
        return Ok((t, y, stats));
    }
    let mut k1 = f(t, &y);
    stats.evaluations += 1;
    let span = t_end - t0;
    let mut h = match opts.h_init {
        Some(h) => h,
        None => {
            let scale = |v: &SVector<f64, N>| {
                let mut acc = 0.0;
                for i in 0..N {
                    acc += (v[i] / (opts.atol + opts.rtol * y[i].abs())).powi(2);
                }
                (acc / N as f64).sqrt()
            };
            let (d0, d1) = (scale(&y), scale(&k1));
            if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 }
        }
    }
    .min(span)
    .min(opts.h_max);
    let h_min = 16.0 * f64::EPSILON * t_end.abs().max(1.0);
    let mut last_factor_rejected = false;
    while t < t_end {
        if stats.accepted + stats.rejected >= opts.max_steps {
            return Err(Error::StepSizeUnderflow { t, h });
        }
        if t + h > t_end || t_end - (t + h) < h_min {
            h = t_end - t;
        }
        let k2 = f(t + C2 * h, &(y + k1 * (h * A21)));
        let k3 = f(t + C3 * h, &(y + (k1 * A31 + k2 * A32) * h));
        let k4 = f(t + C4 * h, &(y + (k1 * A41 + k2 * A42 + k3 * A43) * h));
        let k5 = f(t + C5 * h, &(y + (k1 * A51 + k2 * A52 + k3 * A53 + k4 * A54) * h));
        let k6 = f(t + h, &(y + (k1 * A61 + k2 * A62 + k3 * A63 + k4 * A64 + k5 * A65) * h));
        let y_new = y + (k1 * B1 + k3 * B3 + k4 * B4 + k5 * B5 + k6 * B6) * h;
        let k7 = f(t + h, &y_new);
        stats.evaluations += 6;
        let err = (k1 * E1 + k3 * E3 + k4 * E4 + k5 * E5 + k6 * E6 + k7 * E7) * h;
        let en = error_norm(&err, &y, &y_new, opts);
        if en <= 1.0 {
            t = if t_end - (t + h) < h_min { t_end } else { t + h };
            y = y_new;
            k1 = k7;
            stats.accepted += 1;
            let grow = if en == 0.0 { 5.0 } else { (0.9 * en.powf(-0.2)).clamp(0.2, 5.0) };
            let grow = if last_factor_rejected { grow.min(1.0) } else { grow };
            last_factor_rejected = false;
            h = (h * grow).min(opts.h_max);
            if observer(t, &y).is_break() {
                break;
            }
        } else {
            stats.rejected += 1;
            last_factor_rejected = true;
            let shrink = if en.is_finite() { (0.9 * en.powf(-0.2)).clamp(0.2, 1.0) } else { 0.2 };
            h *= shrink;
            if h < h_min {
                return Err(Error::StepSizeUnderflow { t, h });
            }
        }
    }
    Ok((t, y, stats))
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{Vector1, Vector2};

    #[test]
    fn exponential_decay() {
        let (t, y, stats) = dopri5(
            |_, y: &Vector1<f64>| -y,
            0.0,
            Vector1::new(1.0),
            5.0,
            &OdeOptions::default(),
            |_, _| ControlFlow::Continue(()),
        )
        .unwrap();
        assert_eq!(t, 5.0);
        assert!((y[0] - (-5.0f64).exp()).abs() < 1e-11);
        assert!(stats.accepted > 10);
    }

    #[test]
    fn harmonic_oscillator_conserves_energy() {
        let (_, y, _) = dopri5(
            |_, y: &Vector2<f64>| Vector2::new(y[1], -y[0]),
            0.0,
            Vector2::new(1.0, 0.0),
            100.0,
            &OdeOptions::default(),
            |_, _| ControlFlow::Continue(()),
        )
        .unwrap();
        assert!((y[0] - 100f64.cos()).abs() < 1e-7, "{}", y[0] - 100f64.cos());
        assert!((y.norm() - 1.0).abs() < 5e-8, "{}", y.norm() - 1.0);

        let tight = OdeOptions { rtol: 1e-12, atol: 1e-15, ..OdeOptions::default() };
        let (_, y, _) = dopri5(
            |_, y: &Vector2<f64>| Vector2::new(y[1], -y[0]),
            0.0,
            Vector2::new(1.0, 0.0),
            100.0,
            &tight,
            |_, _| ControlFlow::Continue(()),
        )
        .unwrap();
        assert!((y.norm() - 1.0).abs() < 1e-10, "{}", y.norm() - 1.0);
    }

    #[test]
    fn time_dependent_rhs_and_early_stop() {
        let mut seen = 0;
        let (t, y, _) = dopri5(
            |t, _: &Vector1<f64>| Vector1::new(t.cos()),
            0.0,
            Vector1::new(0.0),
            10.0,
            &OdeOptions::default(),
            |t, _| {
                seen += 1;
                if t > 3.0 { ControlFlow::Break(()) } else { ControlFlow::Continue(()) }
            },
        )
        .unwrap();
        assert!(t > 3.0 && t < 10.0);
        assert!((y[0] - t.sin()).abs() < 1e-9);
        assert!(seen >= 2);
    }

    #[test]
    fn empty_interval_is_rejected() {
        let r = dopri5(
            |_, y: &Vector1<f64>| *y,
            1.0,
            Vector1::new(1.0),
            1.0,
            &OdeOptions::default(),
            |_, _| ControlFlow::Continue(()),
        );
        assert!(r.is_err());
    }
}
