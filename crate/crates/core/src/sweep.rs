//! Parameter sweeps, (f₁, f₂) optimization and the denominator scan.
//!
//! Points are evaluated on a worker pool and collected in input order, so
//! the output does not depend on the number of workers.

use serde::{Deserialize, Serialize};

use rayon::prelude::*;

use crate::bath::BathSpec;
use crate::error::{Error, Result};
use crate::positivity::{gks_decompose, state_negativity};
use crate::redfield::{Mode, SystemSpec};
use crate::steady::{Flags, Order, SteadyKernel, DENOMINATOR_FLOOR};

/// Log-spaced or linear grid `[min, max]` with `points` nodes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub min: f64,
    pub max: f64,
    pub points: usize,
    pub log: bool,
}

impl Grid {
    pub fn linear(min: f64, max: f64, points: usize) -> Self {
        Grid { min, max, points, log: false }
    }

    pub fn log(min: f64, max: f64, points: usize) -> Self {
        Grid { min, max, points, log: true }
    }

    pub fn validate(&self, name: &'static str) -> Result<()> {
        let bad = |reason| Err(Error::InvalidParameter { name, value: self.min, reason });
        if !self.min.is_finite() || !self.max.is_finite() {
            return bad("grid bounds must be finite");
        }
        if self.points == 0 || (self.points > 1 && !(self.max > self.min)) {
            return bad("grid needs max > min and at least one point");
        }
        if self.log && !(self.min > 0.0) {
            return bad("log grid needs a positive lower bound");
        }
        Ok(())
    }

    pub fn values(&self) -> Vec<f64> {
        if self.points == 1 {
            return vec![self.min];
        }
        let n = (self.points - 1) as f64;
        (0..self.points)
            .map(|k| {
                let u = k as f64 / n;
                if k + 1 == self.points {
                    self.max
                } else if self.log {
                    self.min * (self.max / self.min).powf(u)
                } else {
                    self.min + (self.max - self.min) * u
                }
            })
            .collect()
    }
}

/// Everything a sweep needs; every record repeats the parameters it used.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub lambda: f64,
    pub s: f64,
    pub cutoff: f64,
    pub temperature: f64,
    pub omega0: f64,
    pub f1: f64,
    pub f2: f64,
    pub mode: Mode,
    pub lambda_grid: Grid,
    pub temperature_grid: Grid,
    pub s_values: Vec<f64>,
    /// Upper edge of the optimization box `[0, fmax]²`.
    pub fmax: f64,
    pub f_grid_points: usize,
    pub f_tolerance: f64,
    /// Largest temperature and weight of the denominator scan.
    pub scan_temperature_max: f64,
    pub scan_f_max: f64,
    pub scan_temperature_points: usize,
    pub scan_f_points: usize,
    pub scan_bracket_width: f64,
    /// Worker threads; `None` uses the pool default.
    pub workers: Option<usize>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            lambda: 0.01,
            s: 1.0,
            cutoff: 10.0,
            temperature: 1.0,
            omega0: 1.0,
            f1: 1.0,
            f2: 1.0,
            mode: Mode::NonSecular,
            lambda_grid: Grid::log(1e-6, 1e-1, 60),
            temperature_grid: Grid::linear(0.02, 5.0, 100),
            s_values: vec![1.0, 3.0],
            fmax: 1.0,
            f_grid_points: 21,
            f_tolerance: 1e-4,
            scan_temperature_max: 50.0,
            scan_f_max: 10.0,
            scan_temperature_points: 200,
            scan_f_points: 11,
            scan_bracket_width: 1e-6,
            workers: None,
        }
    }
}

impl SweepConfig {
    pub fn bath(&self) -> Result<BathSpec> {
        BathSpec::new(self.lambda, self.s, self.cutoff, self.temperature)
    }

    pub fn system(&self) -> Result<SystemSpec> {
        SystemSpec::new(self.omega0, self.f1, self.f2)
    }

    pub fn validate(&self) -> Result<()> {
        self.bath()?;
        self.system()?;
        self.lambda_grid.validate("lambda_grid")?;
        self.temperature_grid.validate("temperature_grid")?;
        if self.s_values.is_empty() {
            return Err(Error::Domain("s_values must not be empty".into()));
        }
        for &s in &self.s_values {
            self.bath()?.with_s(s).validate()?;
        }
        let positive = |name: &'static str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidParameter { name, value: v, reason: "must be positive and finite" })
            }
        };
        positive("fmax", self.fmax)?;
        positive("f_tolerance", self.f_tolerance)?;
        positive("scan_temperature_max", self.scan_temperature_max)?;
        positive("scan_f_max", self.scan_f_max)?;
        positive("scan_bracket_width", self.scan_bracket_width)?;
        if self.f_grid_points < 2 || self.scan_temperature_points < 2 || self.scan_f_points < 2 {
            return Err(Error::Domain("grids need at least two points".into()));
        }
        if self.workers == Some(0) {
            return Err(Error::Domain("workers must be at least 1".into()));
        }
        Ok(())
    }

    /// Sets one field from its textual `key = value` form.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let num = |v: &str| -> Result<f64> {
            v.trim().parse::<f64>().map_err(|_| Error::Domain(format!("`{key}`: cannot parse `{v}` as a number")))
        };
        let flag = |v: &str| -> Result<bool> {
            v.trim().parse::<bool>().map_err(|_| Error::Domain(format!("`{key}`: expected true or false, got `{v}`")))
        };
        let int = |v: &str| -> Result<usize> {
            v.trim().parse::<usize>().map_err(|_| Error::Domain(format!("`{key}`: cannot parse `{v}` as a count")))
        };
        match key.trim().replace('-', "_").as_str() {
            "lambda" => self.lambda = num(value)?,
            "s" => self.s = num(value)?,
            "cutoff" => self.cutoff = num(value)?,
            "temp" | "temperature" => self.temperature = num(value)?,
            "omega0" => self.omega0 = num(value)?,
            "f1" => self.f1 = num(value)?,
            "f2" => self.f2 = num(value)?,
            "mode" => self.mode = value.trim().parse()?,
            "lambda_min" => self.lambda_grid.min = num(value)?,
            "lambda_max" => self.lambda_grid.max = num(value)?,
            "lambda_points" => self.lambda_grid.points = int(value)?,
            "lambda_log" => self.lambda_grid.log = flag(value)?,
            "temp_min" => self.temperature_grid.min = num(value)?,
            "temp_max" => self.temperature_grid.max = num(value)?,
            "temp_points" => self.temperature_grid.points = int(value)?,
            "temp_log" => self.temperature_grid.log = flag(value)?,
            "s_values" => {
                self.s_values = value.split(',').map(num).collect::<Result<_>>()?;
            }
            "fmax" => self.fmax = num(value)?,
            "f_grid" | "f_grid_points" => self.f_grid_points = int(value)?,
            "f_tol" | "f_tolerance" => self.f_tolerance = num(value)?,
            "scan_temp_max" => self.scan_temperature_max = num(value)?,
            "scan_f_max" | "overdrive" => self.scan_f_max = num(value)?,
            "scan_temp_points" => self.scan_temperature_points = int(value)?,
            "scan_f_points" => self.scan_f_points = int(value)?,
            "scan_width" => self.scan_bracket_width = num(value)?,
            "workers" => self.workers = Some(int(value)?),
            other => return Err(Error::Domain(format!("unknown configuration key `{other}`"))),
        }
        Ok(())
    }

    /// Parses `key = value` lines; `#` starts a comment.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Domain(format!("line {}: expected `key = value`", n + 1)))?;
            self.set(k, v)?;
        }
        Ok(())
    }

    /// Every setting except the worker count, as `key = value` pairs that
    /// [`SweepConfig::set`] accepts.
    pub fn metadata(&self) -> Vec<(String, String)> {
        let join = |v: &[f64]| v.iter().map(|s| s.to_string()).collect::<Vec<_>>().join(",");
        [
            ("lambda", self.lambda.to_string()),
            ("s", self.s.to_string()),
            ("cutoff", self.cutoff.to_string()),
            ("temperature", self.temperature.to_string()),
            ("omega0", self.omega0.to_string()),
            ("f1", self.f1.to_string()),
            ("f2", self.f2.to_string()),
            ("mode", self.mode.to_string()),
            ("lambda_min", self.lambda_grid.min.to_string()),
            ("lambda_max", self.lambda_grid.max.to_string()),
            ("lambda_points", self.lambda_grid.points.to_string()),
            ("lambda_log", self.lambda_grid.log.to_string()),
            ("temp_min", self.temperature_grid.min.to_string()),
            ("temp_max", self.temperature_grid.max.to_string()),
            ("temp_points", self.temperature_grid.points.to_string()),
            ("temp_log", self.temperature_grid.log.to_string()),
            ("s_values", join(&self.s_values)),
            ("fmax", self.fmax.to_string()),
            ("f_grid_points", self.f_grid_points.to_string()),
            ("f_tolerance", self.f_tolerance.to_string()),
            ("scan_temp_max", self.scan_temperature_max.to_string()),
            ("scan_f_max", self.scan_f_max.to_string()),
            ("scan_temp_points", self.scan_temperature_points.to_string()),
            ("scan_f_points", self.scan_f_points.to_string()),
            ("scan_width", self.scan_bracket_width.to_string()),
        ]
        .into_iter()
        .map(|(k, v)| (k.to_string(), v))
        .collect()
    }

    fn pool(&self) -> Result<rayon::ThreadPool> {
        let mut b = rayon::ThreadPoolBuilder::new();
        if let Some(n) = self.workers {
            b = b.num_threads(n);
        }
        b.build().map_err(|e| Error::Domain(format!("cannot start worker pool: {e}")))
    }
}

/// Maps `f` over `items` on the configured pool, keeping input order.
fn ordered_map<T, R, F>(config: &SweepConfig, items: &[T], f: F) -> Result<Vec<R>>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    let pool = config.pool()?;
    Ok(pool.install(|| items.par_iter().map(&f).collect()))
}

/// One evaluated parameter point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub lambda: f64,
    pub s: f64,
    pub cutoff: f64,
    pub temperature: f64,
    pub omega0: f64,
    pub f1: f64,
    pub f2: f64,
    pub mode: Mode,
    pub coherence: Option<f64>,
    pub v1: Option<f64>,
    pub v3: Option<f64>,
    pub kossakowski_negativity: Option<f64>,
    pub state_negativity: Option<f64>,
    pub flags: Flags,
}

impl SweepRecord {
    fn empty(kernel: &SteadyKernel, system: &SystemSpec, lambda: f64, mode: Mode) -> Self {
        SweepRecord {
            lambda,
            s: kernel.bath.s,
            cutoff: kernel.bath.cutoff,
            temperature: kernel.bath.temperature,
            omega0: system.omega0,
            f1: system.f1,
            f2: system.f2,
            mode,
            coherence: None,
            v1: None,
            v3: None,
            kossakowski_negativity: None,
            state_negativity: None,
            flags: Flags::for_parameters(system, &kernel.bath.with_lambda(lambda)),
        }
    }

    /// Records that cannot compete in an optimization.
    pub fn is_excluded(&self) -> bool {
        self.coherence.is_none() || self.flags.contains(Flags::DENOMINATOR_ZERO)
    }
}

/// Evaluates one point from a prepared kernel.
pub fn evaluate_point(kernel: &SteadyKernel, system: &SystemSpec, lambda: f64, mode: Mode) -> SweepRecord {
    let mut rec = SweepRecord::empty(kernel, system, lambda, mode);
    if mode == Mode::NonSecular && !kernel.bath.is_sub_ohmic() {
        let den = kernel.denominator(system, lambda);
        if den.abs() < DENOMINATOR_FLOOR * system.omega0 {
            rec.flags |= Flags::DENOMINATOR_ZERO;
            return rec;
        }
    }
    let gen = match kernel.generator(system, lambda, mode) {
        Ok(g) => g,
        Err(_) => {
            rec.flags |= Flags::NUMERICAL_FAILURE;
            return rec;
        }
    };
    let steady = match crate::steady::solve_steady(&gen) {
        Ok(st) => Ok(st),
        Err(Error::SingularGenerator { .. }) => {
            // transverse part still unique; v₃ is a representative choice
            rec.flags |= Flags::SINGULAR_GENERATOR;
            match mode {
                Mode::NonSecular => kernel.closed_form(system, lambda, Order::Exact),
                Mode::Secular => Ok(crate::steady::SteadyState::new(
                    nalgebra::Vector3::new(0.0, 0.0, -kernel.polarization),
                    crate::steady::Method::ClosedForm,
                    Flags::empty(),
                )),
            }
        }
        Err(e) => Err(e),
    };
    match steady {
        Ok(st) => {
            rec.flags |= st.flags;
            rec.coherence = Some(st.coherence);
            rec.v1 = Some(st.v1);
            rec.v3 = Some(st.v3);
            rec.state_negativity = Some(state_negativity(&st.vector()));
        }
        Err(Error::DenominatorZero { .. }) => rec.flags |= Flags::DENOMINATOR_ZERO,
        Err(_) => rec.flags |= Flags::NUMERICAL_FAILURE,
    }
    match gks_decompose(&gen) {
        Ok(k) => rec.kossakowski_negativity = Some(k.negativity),
        Err(Error::InfiniteDephasing(_)) => rec.flags |= Flags::INFINITE_DEPHASING,
        Err(_) => rec.flags |= Flags::NUMERICAL_FAILURE,
    }
    rec
}

/// Evaluates a single configuration point.
pub fn evaluate(config: &SweepConfig) -> Result<SweepRecord> {
    config.validate()?;
    let kernel = SteadyKernel::new(&config.bath()?, config.omega0)?;
    Ok(evaluate_point(&kernel, &config.system()?, config.lambda, config.mode))
}

/// Least-squares slope of `ln y` against `ln x` over points with both positive.
pub fn log_log_slope(x: &[f64], y: &[f64]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = x
        .iter()
        .zip(y)
        .filter(|(a, b)| **a > 0.0 && **b > 0.0)
        .map(|(a, b)| (a.ln(), b.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// Coupling range used for the small-λ slopes.
pub const SLOPE_WINDOW: (f64, f64) = (1e-6, 1e-4);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LambdaSweep {
    pub records: Vec<SweepRecord>,
    /// Log-log slope of 𝒞(λ) inside `SLOPE_WINDOW`.
    pub coherence_slope: Option<f64>,
    /// Log-log slope of 𝒩_K(λ) inside `SLOPE_WINDOW`.
    pub negativity_slope: Option<f64>,
}

/// 𝒞(λ) and 𝒩_K(λ) on the configured λ grid.
pub fn sweep_lambda(config: &SweepConfig) -> Result<LambdaSweep> {
    config.validate()?;
    let kernel = SteadyKernel::new(&config.bath()?, config.omega0)?;
    let system = config.system()?;
    let lambdas = config.lambda_grid.values();
    let records = ordered_map(config, &lambdas, |&l| evaluate_point(&kernel, &system, l, config.mode))?;
    let window: Vec<&SweepRecord> = records
        .iter()
        .filter(|r| r.lambda >= SLOPE_WINDOW.0 * (1.0 - 1e-12) && r.lambda <= SLOPE_WINDOW.1 * (1.0 + 1e-12))
        .collect();
    let slope = |pick: fn(&SweepRecord) -> Option<f64>| {
        let (x, y): (Vec<f64>, Vec<f64>) = window.iter().filter_map(|r| pick(r).map(|v| (r.lambda, v))).unzip();
        log_log_slope(&x, &y)
    };
    Ok(LambdaSweep {
        coherence_slope: slope(|r| r.coherence),
        negativity_slope: slope(|r| r.kossakowski_negativity),
        records,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TemperatureSweep {
    pub records: Vec<SweepRecord>,
    /// Per Ohmicity: highest grid temperature with a negative state eigenvalue.
    pub negativity_threshold: Vec<(f64, Option<f64>)>,
}

/// 𝒞(T) and the state negativity for every configured Ohmicity.
pub fn sweep_temperature(config: &SweepConfig) -> Result<TemperatureSweep> {
    config.validate()?;
    let system = config.system()?;
    let temps = config.temperature_grid.values();
    for &t in &temps {
        config.bath()?.with_temperature(t).validate()?;
    }
    let points: Vec<(f64, f64)> = config
        .s_values
        .iter()
        .flat_map(|&s| temps.iter().map(move |&t| (s, t)))
        .collect();
    let base = config.bath()?;
    let records = ordered_map(config, &points, |&(s, t)| {
        let bath = base.with_s(s).with_temperature(t);
        match SteadyKernel::new(&bath, config.omega0) {
            Ok(k) => evaluate_point(&k, &system, config.lambda, config.mode),
            Err(_) => {
                let k = failed_kernel(&bath, config.omega0);
                let mut r = SweepRecord::empty(&k, &system, config.lambda, config.mode);
                r.flags |= Flags::NUMERICAL_FAILURE;
                r
            }
        }
    })?;
    let negativity_threshold = config
        .s_values
        .iter()
        .map(|&s| {
            let t = records
                .iter()
                .filter(|r| r.s == s && r.state_negativity.is_some_and(|n| n > 0.0))
                .map(|r| r.temperature)
                .fold(None, |acc: Option<f64>, t| Some(acc.map_or(t, |a| a.max(t))));
            (s, t)
        })
        .collect();
    Ok(TemperatureSweep { records, negativity_threshold })
}

fn failed_kernel(bath: &BathSpec, omega0: f64) -> SteadyKernel {
    let zero = crate::bath::RedfieldCoefficients::from_gammas(
        Default::default(),
        Default::default(),
        crate::bath::GammaValue::Finite(Default::default()),
        crate::bath::CoefficientTime::Asymptotic,
    );
    SteadyKernel {
        bath: *bath,
        omega0,
        unit: zero,
        polarization: 0.0,
        cutoff_term: 0.0,
        dephasing_ratio: 0.0,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Optimum {
    pub record: SweepRecord,
    pub evaluations: usize,
}

/// Maximizes 𝒞 over `[0, fmax]²`: grid search, then coordinate ascent with
/// step halving down to `f_tolerance`. Flagged points never win.
pub fn optimize_f(config: &SweepConfig) -> Result<Optimum> {
    config.validate()?;
    let kernel = SteadyKernel::new(&config.bath()?, config.omega0)?;
    let fmax = config.fmax;
    let n = config.f_grid_points;
    let axis: Vec<f64> = Grid::linear(0.0, fmax, n).values();
    let points: Vec<(f64, f64)> = axis.iter().flat_map(|&a| axis.iter().map(move |&b| (a, b))).collect();
    let eval = |f1: f64, f2: f64| -> Result<SweepRecord> {
        let sys = SystemSpec::new(config.omega0, f1, f2)?;
        Ok(evaluate_point(&kernel, &sys, config.lambda, config.mode))
    };
    let grid = ordered_map(config, &points, |&(a, b)| eval(a, b))?
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let mut evaluations = grid.len();
    let score = |r: &SweepRecord| if r.is_excluded() { None } else { r.coherence };
    let mut best = grid
        .into_iter()
        .filter(|r| score(r).is_some())
        .fold(None::<SweepRecord>, |acc, r| match acc {
            Some(a) if score(&a) >= score(&r) => Some(a),
            _ => Some(r),
        })
        .ok_or(Error::AllPointsFlagged)?;
    let mut step = fmax / (n - 1) as f64;
    while step >= config.f_tolerance {
        let mut improved = false;
        for (d1, d2) in [(step, 0.0), (-step, 0.0), (0.0, step), (0.0, -step)] {
            let (f1, f2) = ((best.f1 + d1).clamp(0.0, fmax), (best.f2 + d2).clamp(0.0, fmax));
            if (f1, f2) == (best.f1, best.f2) {
                continue;
            }
            let cand = eval(f1, f2)?;
            evaluations += 1;
            if score(&cand).is_some() && score(&cand) > score(&best) {
                best = cand;
                improved = true;
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    Ok(Optimum { record: best, evaluations })
}

/// A sign change of the closed-form denominator along T.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DivergenceBracket {
    pub lambda: f64,
    pub s: f64,
    pub cutoff: f64,
    pub f1: f64,
    pub f2: f64,
    pub temperature_low: f64,
    pub temperature_high: f64,
    pub denominator_low: f64,
    pub denominator_high: f64,
    pub flags: Flags,
}

/// Closed-form denominator at one point.
pub fn denominator_at(bath: &BathSpec, system: &SystemSpec) -> Result<f64> {
    Ok(SteadyKernel::new(bath, system.omega0)?.denominator(system, bath.lambda))
}

/// Brackets every sign change of `ω₀ + λ(f₁² + f₂² r)Δ₁` along a linear T grid
/// up to `scan_temperature_max`, for each (f₁, f₂) on `[0, scan_f_max]²`.
pub fn scan_divergence(config: &SweepConfig) -> Result<Vec<DivergenceBracket>> {
    config.validate()?;
    let base = config.bath()?;
    if base.is_sub_ohmic() {
        return Ok(Vec::new());
    }
    let t_lo = config.temperature_grid.min.max(1e-3).min(config.scan_temperature_max);
    let temps = Grid::linear(t_lo, config.scan_temperature_max, config.scan_temperature_points).values();
    let kernels: Vec<SteadyKernel> = ordered_map(config, &temps, |&t| SteadyKernel::new(&base.with_temperature(t), config.omega0))?
        .into_iter()
        .collect::<Result<_>>()?;
    let fs = Grid::linear(0.0, config.scan_f_max, config.scan_f_points).values();
    let pairs: Vec<(f64, f64)> = fs.iter().flat_map(|&a| fs.iter().map(move |&b| (a, b))).collect();
    let found = ordered_map(config, &pairs, |&(f1, f2)| -> Result<Vec<DivergenceBracket>> {
        let sys = SystemSpec::new(config.omega0, f1, f2)?;
        let den: Vec<f64> = kernels.iter().map(|k| k.denominator(&sys, config.lambda)).collect();
        let mut out = Vec::new();
        for k in 0..den.len() - 1 {
            if den[k].signum() == den[k + 1].signum() && den[k] != 0.0 {
                continue;
            }
            let (mut a, mut b) = (temps[k], temps[k + 1]);
            let (mut da, mut db) = (den[k], den[k + 1]);
            while b - a > config.scan_bracket_width {
                let m = 0.5 * (a + b);
                let dm = denominator_at(&base.with_temperature(m), &sys)?;
                if dm.signum() == da.signum() && dm != 0.0 {
                    a = m;
                    da = dm;
                } else {
                    b = m;
                    db = dm;
                }
            }
            let mut flags = Flags::DENOMINATOR_ZERO;
            if sys.weak_coupling_warning() || !base.is_weak_coupling() || f1 > 1.0 || f2 > 1.0 {
                flags |= Flags::WEAK_COUPLING_WARNING;
            }
            out.push(DivergenceBracket {
                lambda: config.lambda,
                s: base.s,
                cutoff: base.cutoff,
                f1,
                f2,
                temperature_low: a,
                temperature_high: b,
                denominator_low: da,
                denominator_high: db,
                flags,
            });
        }
        Ok(out)
    })?;
    let mut all = Vec::new();
    for f in found {
        all.extend(f?);
    }
    Ok(all)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grids() {
        let g = Grid::log(1e-6, 1e-1, 6).values();
        assert_eq!(g.len(), 6);
        assert!((g[1] - 1e-5).abs() < 1e-18);
        assert_eq!(g[5], 1e-1);
        let l = Grid::linear(0.0, 1.0, 21).values();
        assert!((l[10] - 0.5).abs() < 1e-15);
        assert!(Grid::log(0.0, 1.0, 3).validate("g").is_err());
    }

    #[test]
    fn slope_of_power_law() {
        let x = [1.0, 2.0, 4.0, 8.0];
        let y: Vec<f64> = x.iter().map(|v: &f64| 3.0 * v.powf(1.5)).collect();
        assert!((log_log_slope(&x, &y).unwrap() - 1.5).abs() < 1e-12);
        assert_eq!(log_log_slope(&[1.0], &[1.0]), None);
    }

    #[test]
    fn config_text() {
        let mut c = SweepConfig::default();
        c.apply_text("lambda = 0.02\n# comment\ns_values = 1, 3, 5\nmode = secular  # trailing\nworkers=2\n")
            .unwrap();
        assert_eq!(c.lambda, 0.02);
        assert_eq!(c.s_values, vec![1.0, 3.0, 5.0]);
        assert_eq!(c.mode, Mode::Secular);
        assert_eq!(c.workers, Some(2));
        assert!(c.apply_text("bogus = 1").is_err());
        assert!(c.apply_text("lambda 1").is_err());
        assert!(c.clone().set("lambda", "x").is_err());

        let mut replay = SweepConfig::default();
        let text: String = c.metadata().iter().map(|(k, v)| format!("{k} = {v}\n")).collect();
        replay.apply_text(&text).unwrap();
        assert_eq!(replay, SweepConfig { workers: None, ..c.clone() });
    }

    #[test]
    fn single_point_and_axes() {
        let c = SweepConfig::default();
        let r = evaluate(&c).unwrap();
        assert!((r.v1.unwrap() + 1.935_874_277_563_812e-2).abs() < 1e-10);
        assert!(r.kossakowski_negativity.unwrap() > 0.0);
        assert_eq!(r.flags, Flags::empty());
        let axis = evaluate(&SweepConfig { f1: 0.0, ..c.clone() }).unwrap();
        assert_eq!(axis.coherence, Some(0.0));
        assert!(axis.flags.contains(Flags::SINGULAR_GENERATOR));
        assert!(axis.kossakowski_negativity.unwrap() < 1e-14 * c.lambda);
    }

    #[test]
    fn denominator_zero_record() {
        let c = SweepConfig::default();
        let kernel = SteadyKernel::new(&c.bath().unwrap(), 1.0).unwrap();
        let lambda = -1.0 / kernel.unit.delta1;
        let r = evaluate_point(&kernel, &SystemSpec::unit(1.0, 0.0).unwrap(), lambda, Mode::NonSecular);
        assert!(r.flags.contains(Flags::DENOMINATOR_ZERO));
        assert!(r.is_excluded());
    }
}
