//! Time-local Bloch dynamics with finite-time Redfield coefficients.

use std::f64::consts::PI;
use std::io::{self, Write};
use std::ops::ControlFlow;

use nalgebra::Vector3;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bath::{correlation_function_series, finite_time_gammas, BathSpec, CoefficientTime, GammaValue, RedfieldCoefficients};
use crate::error::{Error, Result};
use crate::ode::{dopri5, OdeOptions, OdeStats};
use crate::redfield::{build_generator, BlochGenerator, Mode, SystemSpec};
use crate::steady::solve_steady;

/// Norm excess over the Bloch ball that counts as a violation.
pub const VIOLATION_THRESHOLD: f64 = 1e-9;

/// First and last cached time.
pub const CACHE_START: f64 = 1e-3;
pub const CACHE_END: f64 = 1e3;
pub const POINTS_PER_DECADE: usize = 64;

/// Log-spaced nodes on `[CACHE_START, CACHE_END]`, refined so that no step
/// exceeds a sixteenth of the oscillation period `2π/ω₀`.
fn cache_grid(omega0: f64) -> Vec<f64> {
    let ratio = 10f64.powf(1.0 / POINTS_PER_DECADE as f64);
    let max_step = PI / (8.0 * omega0.max(1.0));
    let mut times = vec![CACHE_START];
    let mut t = CACHE_START;
    while t < CACHE_END {
        t = (t * ratio).min(t + max_step);
        if t > CACHE_END * (1.0 - 1e-12) {
            t = CACHE_END;
        }
        times.push(t);
    }
    times
}

/// Piecewise-cubic Hermite interpolant with prescribed nodal slopes.
#[derive(Debug, Clone, PartialEq)]
struct Hermite {
    x: Vec<f64>,
    y: Vec<f64>,
    d: Vec<f64>,
}

impl Hermite {
    fn new(x: Vec<f64>, y: Vec<f64>, d: Vec<f64>) -> Self {
        Hermite { x, y, d }
    }

    fn eval(&self, xq: f64) -> f64 {
        let n = self.x.len();
        let k = match self.x.binary_search_by(|v| v.total_cmp(&xq)) {
            Ok(i) => return self.y[i],
            Err(i) => i.clamp(1, n - 1) - 1,
        };
        let h = self.x[k + 1] - self.x[k];
        let t = (xq - self.x[k]) / h;
        let (t2, t3) = (t * t, t * t * t);
        self.y[k] * (2.0 * t3 - 3.0 * t2 + 1.0)
            + self.d[k] * h * (t3 - 2.0 * t2 + t)
            + self.y[k + 1] * (3.0 * t2 - 2.0 * t3)
            + self.d[k + 1] * h * (t3 - t2)
    }
}

/// Finite-time coefficients `Γ(±ω₀, t)`, `Γ(0, t)` at λ = 1 on a log grid,
/// interpolated in `ln t` by cubic Hermite segments with exact slopes. Below the grid the values rise
/// linearly from `Γ(ω, 0) = 0`; beyond it they are held constant.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientCache {
    pub bath: BathSpec,
    pub omega0: f64,
    pub times: Vec<f64>,
    values: Vec<[Complex64; 3]>,
    splines: Vec<Hermite>,
}

impl CoefficientCache {
    pub fn new(bath: &BathSpec, omega0: f64) -> Result<Self> {
        bath.validate()?;
        if !(omega0 > 0.0) || !omega0.is_finite() {
            return Err(Error::InvalidParameter {
                name: "omega0",
                value: omega0,
                reason: "must be positive and finite",
            });
        }
        let unit = bath.unit();
        let times = cache_grid(omega0);
        let n = times.len();
        let omegas = [omega0, -omega0, 0.0];
        let pieces: Vec<[Complex64; 3]> = (0..n)
            .into_par_iter()
            .map(|k| {
                let t0 = if k == 0 { 0.0 } else { times[k - 1] };
                finite_time_gammas(omegas, t0, times[k], &unit)
            })
            .collect::<Result<_>>()?;
        let mut values = Vec::with_capacity(n);
        let mut acc = [Complex64::default(); 3];
        for piece in pieces {
            for c in 0..3 {
                acc[c] += piece[c];
            }
            values.push(acc);
        }
        // dΓ/d(ln t) = t e^{iωt} C(t)
        let slopes: Vec<[Complex64; 3]> = times
            .iter()
            .map(|&t| {
                let c = correlation_function_series(t, &unit) * t;
                omegas.map(|w| c * Complex64::from_polar(1.0, w * t))
            })
            .collect();
        let logs: Vec<f64> = times.iter().map(|t| t.ln()).collect();
        let mut splines = Vec::with_capacity(6);
        for c in 0..3 {
            for part in [|z: Complex64| z.re, |z: Complex64| z.im] {
                splines.push(Hermite::new(
                    logs.clone(),
                    values.iter().map(|v| part(v[c])).collect(),
                    slopes.iter().map(|v| part(v[c])).collect(),
                ));
            }
        }
        Ok(CoefficientCache {
            bath: *bath,
            omega0,
            times,
            values,
            splines,
        })
    }

    /// Unit-λ `[Γ(ω₀, t), Γ(−ω₀, t), Γ(0, t)]`.
    pub fn gammas(&self, t: f64) -> [Complex64; 3] {
        let first = self.times[0];
        let last = *self.times.last().expect("non-empty grid");
        if t <= 0.0 {
            [Complex64::default(); 3]
        } else if t < first {
            let v = self.values[0];
            let w = t / first;
            [v[0] * w, v[1] * w, v[2] * w]
        } else if t >= last {
            *self.values.last().expect("non-empty grid")
        } else {
            let x = t.ln();
            let s = &self.splines;
            [
                Complex64::new(s[0].eval(x), s[1].eval(x)),
                Complex64::new(s[2].eval(x), s[3].eval(x)),
                Complex64::new(s[4].eval(x), s[5].eval(x)),
            ]
        }
    }

    pub fn coefficients(&self, t: f64, lambda: f64) -> RedfieldCoefficients {
        let [p, m, z] = self.gammas(t);
        RedfieldCoefficients::from_gammas(p, m, GammaValue::Finite(z), CoefficientTime::Finite(t)).scaled(lambda)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CoefficientModel {
    /// Time-dependent coefficients `Γ(ω, t)`.
    FiniteTime,
    /// Constant `t = ∞` coefficients.
    Asymptotic,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DynamicsOptions {
    pub ode: OdeOptions,
    pub model: CoefficientModel,
    /// Endpoint distance to the asymptotic fixed point counted as converged.
    pub convergence_tol: f64,
}

impl Default for DynamicsOptions {
    fn default() -> Self {
        DynamicsOptions {
            ode: OdeOptions::default(),
            model: CoefficientModel::FiniteTime,
            convergence_tol: 1e-6,
        }
    }
}

/// Sampled Bloch trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<Vector3<f64>>,
    pub physical_flags: Vec<bool>,
    pub converged: bool,
    /// Asymptotic fixed point, when unique.
    pub reference: Option<Vector3<f64>>,
    pub final_distance: Option<f64>,
    pub stats: OdeStats,
}

impl Trajectory {
    pub fn endpoint(&self) -> Vector3<f64> {
        *self.states.last().expect("trajectory has at least one sample")
    }

    pub fn max_norm(&self) -> f64 {
        self.states.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn min_margin(&self) -> f64 {
        self.states.iter().map(|v| 1.0 - v.norm()).fold(f64::INFINITY, f64::min)
    }

    /// Columns `t,v1,v2,v3,norm,physical`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "t,v1,v2,v3,norm,physical")?;
        for ((t, v), ok) in self.times.iter().zip(&self.states).zip(&self.physical_flags) {
            writeln!(
                w,
                "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{}",
                t,
                v[0],
                v[1],
                v[2],
                v.norm(),
                ok
            )?;
        }
        Ok(())
    }
}

fn is_physical(v: &Vector3<f64>) -> bool {
    v.norm() <= 1.0 + VIOLATION_THRESHOLD
}

/// Integrator for one parameter set; the coefficient cache is built once and
/// shared read-only between trajectories.
#[derive(Debug, Clone)]
pub struct Propagator {
    pub system: SystemSpec,
    pub lambda: f64,
    pub mode: Mode,
    pub model: CoefficientModel,
    cache: Option<CoefficientCache>,
    asymptotic: BlochGenerator,
}

impl Propagator {
    pub fn new(system: &SystemSpec, bath: &BathSpec, mode: Mode, model: CoefficientModel) -> Result<Self> {
        system.validate()?;
        bath.validate()?;
        let coeffs = RedfieldCoefficients::asymptotic(bath, system.omega0)?;
        let asymptotic = build_generator(system, &coeffs, mode)?;
        let cache = match model {
            CoefficientModel::FiniteTime if bath.lambda > 0.0 => Some(CoefficientCache::new(bath, system.omega0)?),
            _ => None,
        };
        Ok(Propagator {
            system: *system,
            lambda: bath.lambda,
            mode,
            model,
            cache,
            asymptotic,
        })
    }

    /// Reuses a prebuilt cache for another coupling strength or weights.
    pub fn with_cache(system: &SystemSpec, lambda: f64, mode: Mode, cache: &CoefficientCache) -> Result<Self> {
        let bath = cache.bath.with_lambda(lambda);
        let coeffs = RedfieldCoefficients::asymptotic(&bath, system.omega0)?;
        Ok(Propagator {
            system: *system,
            lambda,
            mode,
            model: CoefficientModel::FiniteTime,
            cache: Some(cache.clone()),
            asymptotic: build_generator(system, &coeffs, mode)?,
        })
    }

    pub fn asymptotic_generator(&self) -> &BlochGenerator {
        &self.asymptotic
    }

    /// Generator at time `t`.
    pub fn generator_at(&self, t: f64) -> Result<BlochGenerator> {
        match (&self.cache, self.model) {
            (Some(cache), CoefficientModel::FiniteTime) => {
                build_generator(&self.system, &cache.coefficients(t, self.lambda), self.mode)
            }
            (None, CoefficientModel::FiniteTime) => {
                // λ = 0: only the bare precession survives
                let zero = RedfieldCoefficients::from_gammas(
                    Complex64::default(),
                    Complex64::default(),
                    GammaValue::Finite(Complex64::default()),
                    CoefficientTime::Finite(t),
                );
                build_generator(&self.system, &zero, self.mode)
            }
            _ => Ok(self.asymptotic),
        }
    }

    /// Smallest relaxation rate `min |Re μ|` over the eigenvalues of `M(∞)`.
    pub fn slowest_rate(&self) -> f64 {
        slowest_rate(&self.asymptotic)
    }

    fn rhs(&self) -> impl Fn(f64, &Vector3<f64>) -> Vector3<f64> + '_ {
        move |t, v| {
            let g = self.generator_at(t).expect("validated parameters");
            g.m * v + g.b
        }
    }

    pub fn evolve(&self, v0: &Vector3<f64>, t_end: f64, opts: &DynamicsOptions) -> Result<Trajectory> {
        check_initial(v0, t_end)?;
        let mut times = Vec::new();
        let mut states = Vec::new();
        let (_, _, stats) = dopri5(self.rhs(), 0.0, *v0, t_end, &opts.ode, |t, v| {
            times.push(t);
            states.push(*v);
            ControlFlow::Continue(())
        })?;
        let reference = solve_steady(&self.asymptotic).ok().map(|s| s.vector());
        let end = *states.last().expect("initial sample recorded");
        let final_distance = reference.map(|r| (end - r).norm());
        Ok(Trajectory {
            physical_flags: states.iter().map(is_physical).collect(),
            times,
            states,
            converged: final_distance.is_some_and(|d| d < opts.convergence_tol),
            reference,
            final_distance,
            stats,
        })
    }

    /// First time the norm exceeds `1 + VIOLATION_THRESHOLD`, if any.
    pub fn first_violation(&self, v0: &Vector3<f64>, t_end: f64, opts: &OdeOptions) -> Result<Option<(f64, f64)>> {
        check_initial(v0, t_end)?;
        let mut hit = None;
        dopri5(self.rhs(), 0.0, *v0, t_end, opts, |t, v| {
            if is_physical(v) {
                ControlFlow::Continue(())
            } else {
                hit = Some((t, v.norm()));
                ControlFlow::Break(())
            }
        })?;
        Ok(hit)
    }
}

fn check_initial(v0: &Vector3<f64>, t_end: f64) -> Result<()> {
    if v0.iter().any(|x| !x.is_finite()) || v0.norm() > 1.0 + VIOLATION_THRESHOLD {
        return Err(Error::Domain(format!("initial Bloch vector must satisfy |v| ≤ 1, got {}", v0.norm())));
    }
    if !(t_end > 0.0) || !t_end.is_finite() {
        return Err(Error::InvalidParameter {
            name: "t_end",
            value: t_end,
            reason: "must be positive and finite",
        });
    }
    Ok(())
}

/// `min |Re μ|` over the eigenvalues of `M`.
pub fn slowest_rate(gen: &BlochGenerator) -> f64 {
    gen.m
        .complex_eigenvalues()
        .iter()
        .map(|z| z.re.abs())
        .fold(f64::INFINITY, f64::min)
}

/// Integrates one trajectory from `v0` to `t_end`.
pub fn evolve(
    system: &SystemSpec,
    bath: &BathSpec,
    mode: Mode,
    v0: &Vector3<f64>,
    t_end: f64,
    opts: &DynamicsOptions,
) -> Result<Trajectory> {
    Propagator::new(system, bath, mode, opts.model)?.evolve(v0, t_end, opts)
}

/// Polar × azimuthal grid of pure initial states.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SphereGrid {
    pub polar: usize,
    pub azimuthal: usize,
}

impl Default for SphereGrid {
    fn default() -> Self {
        SphereGrid { polar: 12, azimuthal: 24 }
    }
}

impl SphereGrid {
    /// `(θ, φ, v)` in scan order, poles included.
    pub fn states(&self) -> Vec<(f64, f64, Vector3<f64>)> {
        let mut out = Vec::with_capacity(self.polar * self.azimuthal);
        for i in 0..self.polar {
            let theta = if self.polar == 1 { 0.0 } else { PI * i as f64 / (self.polar - 1) as f64 };
            for j in 0..self.azimuthal {
                let phi = 2.0 * PI * j as f64 / self.azimuthal as f64;
                let v = Vector3::new(theta.sin() * phi.cos(), theta.sin() * phi.sin(), theta.cos());
                out.push((theta, phi, v / v.norm()));
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ViolationReport {
    Found {
        theta: f64,
        phi: f64,
        initial: [f64; 3],
        time: f64,
        norm: f64,
        states_scanned: usize,
    },
    NoViolationFound {
        states_scanned: usize,
    },
}

impl ViolationReport {
    pub fn is_found(&self) -> bool {
        matches!(self, ViolationReport::Found { .. })
    }
}

/// Scans pure initial states and reports the first (in scan order) whose
/// trajectory leaves the Bloch ball.
pub fn find_positivity_violation(
    propagator: &Propagator,
    grid: SphereGrid,
    t_end: f64,
    opts: &OdeOptions,
) -> Result<ViolationReport> {
    let states = grid.states();
    let hits: Vec<Option<(f64, f64)>> = states
        .par_iter()
        .map(|(_, _, v)| propagator.first_violation(v, t_end, opts))
        .collect::<Result<_>>()?;
    for (k, ((theta, phi, v), hit)) in states.iter().zip(hits).enumerate() {
        if let Some((time, norm)) = hit {
            return Ok(ViolationReport::Found {
                theta: *theta,
                phi: *phi,
                initial: [v[0], v[1], v[2]],
                time,
                norm,
                states_scanned: k + 1,
            });
        }
    }
    Ok(ViolationReport::NoViolationFound {
        states_scanned: states.len(),
    })
}
