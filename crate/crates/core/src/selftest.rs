//! Built-in acceptance checks.

use std::fmt;

use nalgebra::Vector3;
use rayon::prelude::*;

use crate::bath::{gamma_zero_limit, j_eff, lamb_shift, BathSpec, PvStrategy, Rate};
use crate::dynamics::{CoefficientCache, CoefficientModel, DynamicsOptions, Propagator, SphereGrid, VIOLATION_THRESHOLD};
use crate::error::Result;
use crate::positivity::{gks_decompose, relative_spread};
use crate::redfield::{gibbs_polarization, Mode, SystemSpec};
use crate::report::{format_number, Table};
use crate::steady::{solve_steady, Flags, Order, SteadyKernel};
use crate::sweep::{evaluate, evaluate_point, optimize_f, sweep_lambda, sweep_temperature, SweepConfig};

/// Test hooks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SelftestOptions {
    /// Multiplies the library's zero-frequency rate before it is checked.
    pub gamma_zero_scale: f64,
}

impl Default for SelftestOptions {
    fn default() -> Self {
        SelftestOptions { gamma_zero_scale: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub id: String,
    pub name: String,
    pub expected: String,
    pub observed: String,
    pub tolerance: String,
    pub passed: bool,
}

impl Check {
    fn new(
        id: impl Into<String>,
        name: &str,
        expected: impl Into<String>,
        observed: impl Into<String>,
        tolerance: impl Into<String>,
        passed: bool,
    ) -> Self {
        Check {
            id: id.into(),
            name: name.into(),
            expected: expected.into(),
            observed: observed.into(),
            tolerance: tolerance.into(),
            passed,
        }
    }

    fn failed(id: &str, name: &str, err: impl fmt::Display) -> Self {
        Check::new(id, name, "no error", format!("error: {err}"), "-", false)
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} [{:>5}] {} | expected {} | observed {} | tolerance {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.expected,
            self.observed,
            self.tolerance
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SelftestReport {
    pub checks: Vec<Check>,
}

impl SelftestReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn get(&self, id: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.id == id)
    }

    pub fn table(&self, metadata: Vec<(String, String)>) -> Table {
        let mut t = Table::new(metadata, &["id", "name", "expected", "observed", "tolerance", "passed"]);
        for c in &self.checks {
            t.push(vec![
                c.id.clone().into(),
                c.name.clone().into(),
                c.expected.clone().into(),
                c.observed.clone().into(),
                c.tolerance.clone().into(),
                c.passed.into(),
            ]);
        }
        t.summarize("passed", self.passed());
        t
    }
}

fn e(v: f64) -> String {
    format!("{v:.6e}")
}

fn rel(a: f64, b: f64) -> f64 {
    if a == b { 0.0 } else { (a - b).abs() / b.abs().max(a.abs()) }
}

fn reference_bath(s: f64, temperature: f64) -> Result<BathSpec> {
    BathSpec::new(0.01, s, 10.0, temperature)
}

/// Criterion ids in run order; `smoke` is the λ = 0 check.
pub const CHECK_IDS: [&str; 13] = ["1", "2", "3", "4", "5", "6", "7", "8", "9", "10", "11", "12", "smoke"];

/// Runs one check by id.
pub fn run_check(id: &str, opts: &SelftestOptions) -> Option<Check> {
    let check = match id {
        "1" => zero_frequency_rate(opts),
        "2" | "3" => {
            let (c2, c3) = closed_form_grid();
            if id == "2" { c2 } else { c3 }
        }
        "4" => linear_scaling(),
        "5" => correspondence(),
        "6" => davies_limit(),
        "7" => sub_ohmic(),
        "8" => optimum(),
        "9" => low_temperature_negativity(),
        "10" => truncation(),
        "11" => dynamics_consistency(),
        "12" => oracles(),
        "smoke" => no_bath(),
        _ => return None,
    };
    Some(check)
}

/// Runs every check.
pub fn run(opts: &SelftestOptions) -> SelftestReport {
    let mut checks = Vec::with_capacity(CHECK_IDS.len());
    let (c2, c3) = closed_form_grid();
    for id in CHECK_IDS {
        match id {
            "2" => checks.push(c2.clone()),
            "3" => checks.push(c3.clone()),
            _ => checks.extend(run_check(id, opts)),
        }
    }
    SelftestReport { checks }
}

/// Quadratic extrapolation of `2π J_eff(ω)` from ω = 1e-4, 1e-5, 1e-6 to 0.
pub fn extrapolated_gamma_zero(bath: &BathSpec) -> Result<f64> {
    let xs = [1e-4, 1e-5, 1e-6];
    let mut ys = [0.0; 3];
    for (y, &x) in ys.iter_mut().zip(&xs) {
        *y = 2.0 * std::f64::consts::PI * j_eff(x, bath)?;
    }
    let mut value = 0.0;
    for i in 0..3 {
        let mut w = 1.0;
        for j in 0..3 {
            if i != j {
                w *= xs[j] / (xs[j] - xs[i]);
            }
        }
        value += w * ys[i];
    }
    Ok(value)
}

fn zero_frequency_rate(opts: &SelftestOptions) -> Check {
    const ID: &str = "1";
    const NAME: &str = "zero-frequency rate 4 pi lambda T (s=1), 0 (s=3), divergent (s=0.5)";
    let run = || -> Result<Check> {
        let ohmic = reference_bath(1.0, 1.0)?;
        let target = 4.0 * std::f64::consts::PI * ohmic.lambda * ohmic.temperature;
        let extrapolated = extrapolated_gamma_zero(&ohmic)?;
        let library = match gamma_zero_limit(&ohmic) {
            Rate::Finite(g) => g * opts.gamma_zero_scale,
            Rate::Divergent => f64::INFINITY,
        };
        let err = rel(extrapolated, target).max(rel(library, target));

        let super_ohmic = reference_bath(3.0, 1.0)?;
        let extrapolated3 = extrapolated_gamma_zero(&super_ohmic)?;
        let library3 = gamma_zero_limit(&super_ohmic).finite().map(|g| g * opts.gamma_zero_scale);
        let zero3 = extrapolated3.abs() <= 1e-6 * target && library3 == Some(0.0);

        let sub_ohmic = reference_bath(0.5, 1.0)?;
        let growth = j_eff(1e-6, &sub_ohmic)? / j_eff(1e-4, &sub_ohmic)?;
        let divergent = gamma_zero_limit(&sub_ohmic).is_divergent() && growth > 5.0;

        Ok(Check::new(
            ID,
            NAME,
            format!("{}; 0; Divergent", e(target)),
            format!(
                "extrapolated {} library {}; extrapolated {} library {}; {} (J_eff growth x{:.1})",
                e(extrapolated),
                format_number(library),
                e(extrapolated3),
                library3.map_or("Divergent".into(), e),
                if gamma_zero_limit(&sub_ohmic).is_divergent() { "Divergent" } else { "Finite" },
                growth
            ),
            "1e-6 relative",
            err <= 1e-6 && zero3 && divergent,
        ))
    };
    run().unwrap_or_else(|err| Check::failed(ID, NAME, err))
}

const GRID_LAMBDAS: [f64; 3] = [1e-4, 1e-3, 1e-2];
const GRID_TEMPERATURES: [f64; 3] = [0.5, 1.0, 2.0];
const GRID_S: [f64; 2] = [1.0, 3.0];

fn closed_form_grid() -> (Check, Check) {
    const N2: &str = "closed-form v1 equals the linear solve";
    const N3: &str = "v2 vanishes in the linear solve";
    let run = || -> Result<(f64, f64)> {
        let system = SystemSpec::unit(1.0, 1.0)?;
        let mut worst_rel: f64 = 0.0;
        let mut worst_v2: f64 = 0.0;
        for s in GRID_S {
            for t in GRID_TEMPERATURES {
                let kernel = SteadyKernel::new(&reference_bath(s, t)?, 1.0)?;
                for l in GRID_LAMBDAS {
                    let cf = kernel.closed_form(&system, l, Order::Exact)?;
                    let ls = kernel.linear_solve(&system, l, Mode::NonSecular)?;
                    worst_rel = worst_rel.max(rel(cf.v1, ls.v1));
                    worst_v2 = worst_v2.max(ls.v2.abs());
                }
            }
        }
        Ok((worst_rel, worst_v2))
    };
    match run() {
        Ok((r, v2)) => (
            Check::new("2", N2, "0", format!("max relative difference {}", e(r)), "1e-8 relative", r <= 1e-8),
            Check::new("3", N3, "0", format!("max |v2| {}", e(v2)), "1e-10", v2 <= 1e-10),
        ),
        Err(err) => (Check::failed("2", N2, &err), Check::failed("3", N3, &err)),
    }
}

fn linear_scaling() -> Check {
    const ID: &str = "4";
    const NAME: &str = "log-log slopes of coherence and N_K over lambda in [1e-6, 1e-4]";
    match sweep_lambda(&SweepConfig::default()) {
        Ok(sweep) => {
            let ok = |s: Option<f64>| s.is_some_and(|v| (v - 1.0).abs() <= 0.01);
            let show = |s: Option<f64>| s.map_or("Undefined".into(), |v| format!("{v:.6}"));
            Check::new(
                ID,
                NAME,
                "1.00, 1.00",
                format!("{}, {}", show(sweep.coherence_slope), show(sweep.negativity_slope)),
                "0.01",
                ok(sweep.coherence_slope) && ok(sweep.negativity_slope),
            )
        }
        Err(err) => Check::failed(ID, NAME, err),
    }
}

/// Weights of the correspondence grid, axes included.
pub const CORRESPONDENCE_WEIGHTS: [f64; 4] = [0.0, 0.25, 0.5, 1.0];

/// Zero threshold after dividing by λ.
pub const ZERO_THRESHOLD: f64 = 1e-14;

fn correspondence() -> Check {
    const ID: &str = "5";
    const NAME: &str = "coherence = 0 iff N_K = 0 on an (f1, f2) grid with axes";
    let run = || -> Result<Check> {
        let config = SweepConfig::default();
        let kernel = SteadyKernel::new(&config.bath()?, config.omega0)?;
        let mut mismatches = Vec::new();
        let mut total = 0;
        for f1 in CORRESPONDENCE_WEIGHTS {
            for f2 in CORRESPONDENCE_WEIGHTS {
                total += 1;
                let system = SystemSpec::new(config.omega0, f1, f2)?;
                let r = evaluate_point(&kernel, &system, config.lambda, Mode::NonSecular);
                let c = r.coherence.map(|c| c / config.lambda);
                let n = r.kossakowski_negativity.map(|n| n / config.lambda);
                let consistent = match (c, n) {
                    (Some(c), Some(n)) => (c.abs() < ZERO_THRESHOLD) == (n.abs() < ZERO_THRESHOLD),
                    _ => false,
                };
                if !consistent {
                    let show = |x: Option<f64>| x.map_or("missing".into(), e);
                    mismatches.push(format!("({f1}, {f2}): C/lambda {} N_K/lambda {}", show(c), show(n)));
                }
            }
        }
        let observed = if mismatches.is_empty() {
            format!("{total}/{total} points consistent")
        } else {
            format!("{} of {total} inconsistent: {}", mismatches.len(), mismatches.join("; "))
        };
        Ok(Check::new(ID, NAME, "all points consistent", observed, "zero < 1e-14 lambda", mismatches.is_empty()))
    };
    run().unwrap_or_else(|err| Check::failed(ID, NAME, err))
}

fn davies_limit() -> Check {
    const ID: &str = "6";
    const NAME: &str = "secular generator is Lindblad with the Gibbs steady state";
    let run = || -> Result<Check> {
        let system = SystemSpec::unit(1.0, 1.0)?;
        let mut worst_n: f64 = 0.0;
        let mut worst_v: f64 = 0.0;
        for t in [0.5, 1.0, 5.0] {
            let kernel = SteadyKernel::new(&reference_bath(1.0, t)?, 1.0)?;
            let gen = kernel.generator(&system, 0.01, Mode::Secular)?;
            worst_n = worst_n.max(gks_decompose(&gen)?.negativity);
            let v = solve_steady(&gen)?.vector();
            let gibbs = Vector3::new(0.0, 0.0, -gibbs_polarization(1.0, t));
            worst_v = worst_v.max((v - gibbs).amax());
        }
        Ok(Check::new(
            ID,
            NAME,
            "N_K = 0, v = (0, 0, -tanh(1/2T))",
            format!("max N_K {}, max deviation {}", e(worst_n), e(worst_v)),
            "1e-12, 1e-10",
            worst_n <= 1e-12 && worst_v <= 1e-10,
        ))
    };
    run().unwrap_or_else(|err| Check::failed(ID, NAME, err))
}

fn sub_ohmic() -> Check {
    const ID: &str = "7";
    const NAME: &str = "sub-Ohmic bath gives zero coherence with the SubOhmic flag";
    match evaluate(&SweepConfig { s: 0.5, ..SweepConfig::default() }) {
        Ok(r) => Check::new(
            ID,
            NAME,
            "0 with SubOhmic",
            format!(
                "{} with {}",
                r.coherence.map_or("missing".into(), format_number),
                r.flags.to_labels()
            ),
            "exact",
            r.coherence == Some(0.0) && r.flags.contains(Flags::SUB_OHMIC),
        ),
        Err(err) => Check::failed(ID, NAME, err),
    }
}

fn optimum() -> Check {
    const ID: &str = "8";
    const NAME: &str = "optimum over [0, 1]^2 sits at (1, 1)";
    let config = SweepConfig::default();
    match optimize_f(&config) {
        Ok(o) => Check::new(
            ID,
            NAME,
            "(1, 1)",
            format!("({}, {}) after {} evaluations", o.record.f1, o.record.f2, o.evaluations),
            format!("{}", config.f_tolerance),
            (o.record.f1 - 1.0).abs() <= config.f_tolerance && (o.record.f2 - 1.0).abs() <= config.f_tolerance,
        ),
        Err(err) => Check::failed(ID, NAME, err),
    }
}

fn low_temperature_negativity() -> Check {
    const ID: &str = "9";
    const NAME: &str = "steady state has negative eigenvalue at low T (s=1)";
    let config = SweepConfig { s_values: vec![1.0], ..SweepConfig::default() };
    match sweep_temperature(&config) {
        Ok(sweep) => {
            let threshold = sweep.negativity_threshold.first().and_then(|(_, t)| *t);
            let peak = sweep
                .records
                .iter()
                .filter_map(|r| r.state_negativity)
                .fold(0.0, f64::max);
            Check::new(
                ID,
                NAME,
                "negativity > 0 for some T in [0.02, 5]",
                format!(
                    "threshold T = {}, peak negativity {}",
                    threshold.map_or("none".into(), |t| format!("{t:.6}")),
                    e(peak)
                ),
                "> 0",
                threshold.is_some(),
            )
        }
        Err(err) => Check::failed(ID, NAME, err),
    }
}

fn truncation() -> Check {
    const ID: &str = "10";
    const NAME: &str = "(closed form - leading order)/lambda^2 is stable over [1e-5, 1e-3]";
    let run = || -> Result<Check> {
        let kernel = SteadyKernel::new(&reference_bath(1.0, 1.0)?, 1.0)?;
        let system = SystemSpec::unit(1.0, 1.0)?;
        let lambdas = crate::sweep::Grid::log(1e-5, 1e-3, 9).values();
        let mut ratios = Vec::with_capacity(lambdas.len());
        for l in lambdas {
            let cf = kernel.closed_form(&system, l, Order::Exact)?.v1;
            let lo = kernel.closed_form(&system, l, Order::Leading)?.v1;
            ratios.push((cf - lo) / (l * l));
        }
        let spread = relative_spread(&ratios);
        Ok(Check::new(
            ID,
            NAME,
            "bounded, variation < 5%",
            format!("ratio {} .. {}, variation {:.3e}", e(ratios[0]), e(*ratios.last().unwrap()), spread),
            "0.05",
            spread < 0.05 && ratios.iter().all(|r| r.is_finite()),
        ))
    };
    run().unwrap_or_else(|err| Check::failed(ID, NAME, err))
}

/// Relaxation times integrated in the dynamics check.
pub const RELAXATION_TIMES: f64 = 50.0;

fn dynamics_consistency() -> Check {
    const ID: &str = "11";
    const NAME: &str = "trajectory endpoint matches the steady state; secular flow stays in the ball";
    let run = || -> Result<Check> {
        let bath = reference_bath(1.0, 1.0)?;
        let system = SystemSpec::unit(1.0, 1.0)?;
        let cache = CoefficientCache::new(&bath, 1.0)?;
        let opts = DynamicsOptions::default();
        let start = Vector3::new(0.0, 0.0, 1.0);

        let redfield = Propagator::with_cache(&system, bath.lambda, Mode::NonSecular, &cache)?;
        let t_end = RELAXATION_TIMES / redfield.slowest_rate();
        let reference = solve_steady(redfield.asymptotic_generator())?.vector();
        let end = redfield.evolve(&start, t_end, &opts)?.endpoint();
        let distance = (end - reference).norm();

        let constant = Propagator::new(&system, &bath, Mode::NonSecular, CoefficientModel::Asymptotic)?;
        let constant_distance = (constant.evolve(&start, t_end, &opts)?.endpoint() - reference).norm();

        let secular = Propagator::with_cache(&system, bath.lambda, Mode::Secular, &cache)?;
        let t_sec = RELAXATION_TIMES / secular.slowest_rate();
        let states = SphereGrid { polar: 5, azimuthal: 4 }.states();
        let norms: Vec<f64> = states
            .par_iter()
            .map(|(_, _, v)| secular.evolve(v, t_sec, &opts).map(|tr| tr.max_norm()))
            .collect::<Result<_>>()?;
        let excess = norms.iter().fold(f64::NEG_INFINITY, |a, n| a.max(n - 1.0)).max(0.0);

        Ok(Check::new(
            ID,
            NAME,
            "endpoint distance 0, norm excess 0",
            format!(
                "t_end {:.1}: distance {} (constant coefficients {}), secular norm excess {} over {} states",
                t_end,
                e(distance),
                e(constant_distance),
                e(excess),
                states.len()
            ),
            format!("1e-6, {VIOLATION_THRESHOLD:e}"),
            distance <= 1e-6 && excess <= VIOLATION_THRESHOLD,
        ))
    };
    run().unwrap_or_else(|err| Check::failed(ID, NAME, err))
}

fn oracles() -> Check {
    const ID: &str = "12";
    const NAME: &str = "principal values agree across strategies; GKS round trip";
    let run = || -> Result<Check> {
        let mut pv: f64 = 0.0;
        for s in [1.0, 3.0] {
            for t in [0.5, 1.0] {
                let bath = reference_bath(s, t)?;
                for w in [1.0, -1.0, 0.5, -0.5] {
                    let a = lamb_shift(w, &bath, PvStrategy::PolePairing)?;
                    let b = lamb_shift(w, &bath, PvStrategy::SingularitySubtraction)?;
                    pv = pv.max(rel(a, b));
                }
            }
        }
        let kernel = SteadyKernel::new(&reference_bath(1.0, 1.0)?, 1.0)?;
        let mut round_trip: f64 = 0.0;
        for (f1, f2) in [(1.0, 1.0), (0.5, 1.0), (1.0, 0.0), (0.0, 1.0)] {
            for mode in [Mode::NonSecular, Mode::Secular] {
                let gen = kernel.generator(&SystemSpec::unit(f1, f2)?, 0.01, mode)?;
                let sup = gen.superoperator();
                let rebuilt = gks_decompose(&gen)?.rebuild();
                round_trip = round_trip.max(rebuilt.distance(&sup) / sup.scale().max(1.0));
            }
        }
        Ok(Check::new(
            ID,
            NAME,
            "0, 0",
            format!("PV relative difference {}, round trip {}", e(pv), e(round_trip)),
            "1e-6 relative, 1e-12",
            pv <= 1e-6 && round_trip <= 1e-12,
        ))
    };
    run().unwrap_or_else(|err| Check::failed(ID, NAME, err))
}

fn no_bath() -> Check {
    const ID: &str = "smoke";
    const NAME: &str = "lambda = 0 gives zero coherence and N_K";
    match evaluate(&SweepConfig { lambda: 0.0, ..SweepConfig::default() }) {
        Ok(r) => Check::new(
            ID,
            NAME,
            "0, 0",
            format!(
                "{}, {}",
                r.coherence.map_or("missing".into(), format_number),
                r.kossakowski_negativity.map_or("missing".into(), format_number)
            ),
            "exact",
            r.coherence == Some(0.0) && r.kossakowski_negativity == Some(0.0),
        ),
        Err(err) => Check::failed(ID, NAME, err),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn extrapolation_hits_the_ohmic_limit() {
        let bath = reference_bath(1.0, 2.0).unwrap();
        let g = extrapolated_gamma_zero(&bath).unwrap();
        assert!(rel(g, 8.0 * std::f64::consts::PI * 0.01) < 1e-9);
    }

    #[test]
    fn rate_check_passes_and_detects_a_doubled_convention() {
        assert!(run_check("1", &SelftestOptions::default()).unwrap().passed);
        let broken = run_check("1", &SelftestOptions { gamma_zero_scale: 2.0 }).unwrap();
        assert!(!broken.passed, "{broken}");
    }

    #[test]
    fn smoke_check() {
        let c = run_check("smoke", &SelftestOptions::default()).unwrap();
        assert!(c.passed, "{c}");
    }

    #[test]
    fn unknown_id() {
        assert!(run_check("99", &SelftestOptions::default()).is_none());
    }

    #[test]
    fn check_line_format() {
        let c = Check::new("3", "name", "0", "1e-12", "1e-10", true);
        assert_eq!(c.to_string(), "PASS [    3] name | expected 0 | observed 1e-12 | tolerance 1e-10");
    }
}
