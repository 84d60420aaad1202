//! `ssc`: sweeps, steady states, dynamics and positivity diagnostics.

use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use nalgebra::Vector3;

use ssc_core::dynamics::{find_positivity_violation, SphereGrid, ViolationReport};
use ssc_core::positivity::{gks_decompose, kossakowski_negativity_scaling};
use ssc_core::report::{self, Cell, Format, Table};
use ssc_core::selftest::{self, SelftestOptions};
use ssc_core::sweep::{evaluate, optimize_f, scan_divergence, sweep_lambda, sweep_temperature};
use ssc_core::{CoefficientModel, DynamicsOptions, Error, Mode, Propagator, SweepConfig};

#[derive(Parser)]
#[command(name = "ssc", version, about = "Steady-state coherence and complete-positivity diagnostics")]
struct Cli {
    #[command(subcommand)]
    verb: Verb,
}

#[derive(Subcommand)]
enum Verb {
    /// Stationary state, coherence and negativities at one point.
    Steady(Common),
    /// Coherence and N_K along the lambda grid, with fitted slopes.
    SweepLambda(Common),
    /// Coherence and state negativity along the temperature grid for each s.
    SweepTemp(Common),
    /// Integrates the Bloch equations from one initial state.
    Dynamics(DynamicsArgs),
    /// Kossakowski matrix of the generator, or N_K/lambda along the lambda grid.
    Kossakowski(KossakowskiArgs),
    /// Maximizes the coherence over the (f1, f2) box.
    OptimizeF(Common),
    /// Brackets sign changes of the closed-form denominator.
    ScanDivergence(Common),
    /// Runs the acceptance checks.
    Selftest(SelftestArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

impl From<FormatArg> for Format {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Csv => Format::Csv,
            FormatArg::Json => Format::Json,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Nonsecular,
    Secular,
}

#[derive(Clone, Copy, ValueEnum)]
enum CoefficientsArg {
    Finite,
    Asymptotic,
}

#[derive(Args, Clone)]
struct Output {
    /// Output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    format: FormatArg,
}

#[derive(Args, Clone)]
struct Common {
    /// Configuration file of `key = value` lines; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, allow_negative_numbers = true)]
    lambda: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    s: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    cutoff: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    temp: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    f1: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    f2: Option<f64>,
    #[arg(long, value_enum)]
    mode: Option<ModeArg>,
    /// Extra configuration entry, repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    #[arg(long, env = "SSC_WORKERS")]
    workers: Option<usize>,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct DynamicsArgs {
    #[command(flatten)]
    common: Common,
    /// Final time; defaults to 50 relaxation times of the slowest mode.
    #[arg(long, allow_negative_numbers = true)]
    t_end: Option<f64>,
    /// Initial Bloch vector `x,y,z`.
    #[arg(long, default_value = "0,0,1", allow_hyphen_values = true)]
    v0: String,
    #[arg(long, value_enum, default_value = "finite")]
    coefficients: CoefficientsArg,
    /// Scan pure initial states for the first exit from the Bloch ball instead.
    #[arg(long)]
    scan: bool,
}

#[derive(Args)]
struct KossakowskiArgs {
    #[command(flatten)]
    common: Common,
    /// Report N_K/lambda along the lambda grid.
    #[arg(long)]
    scaling: bool,
}

#[derive(Args)]
struct SelftestArgs {
    /// Run a single check by id.
    #[arg(long)]
    only: Option<String>,
    #[arg(long, hide = true, default_value_t = 1.0)]
    gamma_zero_scale: f64,
    #[command(flatten)]
    output: Output,
}

enum Failure {
    Input(String),
    Numerical(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_input_error() {
            Failure::Input(e.to_string())
        } else {
            Failure::Numerical(e.to_string())
        }
    }
}

type Outcome<T> = std::result::Result<T, Failure>;

impl Common {
    fn config(&self) -> Outcome<SweepConfig> {
        let mut c = SweepConfig::default();
        if let Some(path) = &self.config {
            let text = fs::read_to_string(path)
                .map_err(|e| Failure::Input(format!("cannot read {}: {e}", path.display())))?;
            c.apply_text(&text)?;
        }
        for entry in &self.set {
            let (k, v) = entry
                .split_once('=')
                .ok_or_else(|| Failure::Input(format!("--set expects KEY=VALUE, got `{entry}`")))?;
            c.set(k, v)?;
        }
        if let Some(v) = self.lambda {
            c.lambda = v;
        }
        if let Some(v) = self.s {
            c.s = v;
        }
        if let Some(v) = self.cutoff {
            c.cutoff = v;
        }
        if let Some(v) = self.temp {
            c.temperature = v;
        }
        if let Some(v) = self.f1 {
            c.f1 = v;
        }
        if let Some(v) = self.f2 {
            c.f2 = v;
        }
        if let Some(m) = self.mode {
            c.mode = match m {
                ModeArg::Nonsecular => Mode::NonSecular,
                ModeArg::Secular => Mode::Secular,
            };
        }
        if self.workers.is_some() {
            c.workers = self.workers;
        }
        c.validate()?;
        Ok(c)
    }
}

fn emit(table: &Table, output: &Output) -> Outcome<()> {
    let text = table.render(output.format.into());
    match &output.out {
        Some(path) => fs::write(path, text).map_err(|e| Failure::Input(format!("cannot write {}: {e}", path.display()))),
        None => io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| Failure::Numerical(format!("cannot write to stdout: {e}"))),
    }
}

fn parse_vector(text: &str) -> Outcome<Vector3<f64>> {
    let parts: Vec<f64> = text
        .split(',')
        .map(|p| p.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|_| Failure::Input(format!("--v0 expects `x,y,z`, got `{text}`")))?;
    match parts.as_slice() {
        [x, y, z] => Ok(Vector3::new(*x, *y, *z)),
        _ => Err(Failure::Input(format!("--v0 expects three components, got {}", parts.len()))),
    }
}

fn dynamics(args: &DynamicsArgs) -> Outcome<()> {
    let config = args.common.config()?;
    let model = match args.coefficients {
        CoefficientsArg::Finite => CoefficientModel::FiniteTime,
        CoefficientsArg::Asymptotic => CoefficientModel::Asymptotic,
    };
    let propagator = Propagator::new(&config.system()?, &config.bath()?, config.mode, model)?;
    let t_end = match args.t_end {
        Some(t) => t,
        None => {
            let rate = propagator.slowest_rate();
            if !(rate > 0.0) {
                return Err(Failure::Input("no relaxation (lambda = 0); pass --t-end".into()));
            }
            selftest::RELAXATION_TIMES / rate
        }
    };
    let mut meta = report::standard_metadata(&config, "dynamics");
    meta.push(("t_end".into(), report::format_number(t_end)));
    meta.push((
        "coefficients".into(),
        match model {
            CoefficientModel::FiniteTime => "finite-time".into(),
            CoefficientModel::Asymptotic => "asymptotic".into(),
        },
    ));
    let opts = DynamicsOptions { model, ..DynamicsOptions::default() };
    if args.scan {
        let grid = SphereGrid::default();
        meta.push(("initial_states".into(), format!("{} polar x {} azimuthal", grid.polar, grid.azimuthal)));
        let found = config_pool(&config)?.install(|| find_positivity_violation(&propagator, grid, t_end, &opts.ode))?;
        let mut t = Table::new(meta, &["result", "theta", "phi", "v1", "v2", "v3", "time", "norm", "states_scanned"]);
        t.push(match found {
            ViolationReport::Found { theta, phi, initial, time, norm, states_scanned } => vec![
                "Found".into(),
                theta.into(),
                phi.into(),
                initial[0].into(),
                initial[1].into(),
                initial[2].into(),
                time.into(),
                norm.into(),
                states_scanned.into(),
            ],
            ViolationReport::NoViolationFound { states_scanned } => {
                let none = || Cell::text("NoViolationFound");
                let mut row = vec![none(); 8];
                row.push(states_scanned.into());
                row
            }
        });
        return emit(&t, &args.common.output);
    }
    let v0 = parse_vector(&args.v0)?;
    meta.push(("v0".into(), args.v0.clone()));
    let traj = propagator.evolve(&v0, t_end, &opts)?;
    emit(&report::trajectory_table(meta, &traj), &args.common.output)
}

fn config_pool(config: &SweepConfig) -> Outcome<rayon::ThreadPool> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Some(n) = config.workers {
        b = b.num_threads(n);
    }
    b.build().map_err(|e| Failure::Numerical(format!("cannot start worker pool: {e}")))
}

fn kossakowski(args: &KossakowskiArgs) -> Outcome<()> {
    let config = args.common.config()?;
    let system = config.system()?;
    let bath = config.bath()?;
    let meta = report::standard_metadata(&config, "kossakowski");
    let table = if args.scaling {
        let lambdas = config.lambda_grid.values();
        report::scaling_table(meta, &kossakowski_negativity_scaling(&system, &bath, config.mode, &lambdas)?)
    } else {
        let gen = ssc_core::redfield::asymptotic_generator(&system, &bath, config.mode)?;
        report::kossakowski_table(meta, &gks_decompose(&gen)?)
    };
    emit(&table, &args.common.output)
}

fn selftest(args: &SelftestArgs) -> Outcome<bool> {
    let opts = SelftestOptions { gamma_zero_scale: args.gamma_zero_scale };
    let result = match &args.only {
        Some(id) => {
            let check = selftest::run_check(id, &opts)
                .ok_or_else(|| Failure::Input(format!("unknown check `{id}`; known: {}", selftest::CHECK_IDS.join(", "))))?;
            ssc_core::SelftestReport { checks: vec![check] }
        }
        None => selftest::run(&opts),
    };
    let passed = result.passed();
    let mut meta = report::conventions();
    meta.insert(0, ("verb".into(), "selftest".into()));
    match &args.output.out {
        Some(_) => {
            for c in &result.checks {
                println!("{c}");
            }
            emit(&result.table(meta), &args.output)?;
        }
        None if matches!(args.output.format, FormatArg::Json) => emit(&result.table(meta), &args.output)?,
        None => {
            for c in &result.checks {
                println!("{c}");
            }
            let failed = result.checks.iter().filter(|c| !c.passed).count();
            println!("{} checks, {} failed", result.checks.len(), failed);
        }
    }
    Ok(passed)
}

fn run(cli: &Cli) -> Outcome<bool> {
    match &cli.verb {
        Verb::Steady(c) => {
            let config = c.config()?;
            let meta = report::standard_metadata(&config, "steady");
            emit(&report::records_table(meta, &[evaluate(&config)?]), &c.output)?;
        }
        Verb::SweepLambda(c) => {
            let config = c.config()?;
            let meta = report::standard_metadata(&config, "sweep-lambda");
            emit(&report::lambda_sweep_table(meta, &sweep_lambda(&config)?), &c.output)?;
        }
        Verb::SweepTemp(c) => {
            let config = c.config()?;
            let meta = report::standard_metadata(&config, "sweep-temp");
            emit(&report::temperature_sweep_table(meta, &sweep_temperature(&config)?), &c.output)?;
        }
        Verb::Dynamics(a) => dynamics(a)?,
        Verb::Kossakowski(a) => kossakowski(a)?,
        Verb::OptimizeF(c) => {
            let config = c.config()?;
            let meta = report::standard_metadata(&config, "optimize-f");
            emit(&report::optimum_table(meta, &optimize_f(&config)?), &c.output)?;
        }
        Verb::ScanDivergence(c) => {
            let config = c.config()?;
            let meta = report::standard_metadata(&config, "scan-divergence");
            emit(&report::brackets_table(meta, &scan_divergence(&config)?), &c.output)?;
        }
        Verb::Selftest(a) => return selftest(a),
    }
    Ok(true)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Numerical(msg)) => {
            eprintln!("numerical failure: {msg}");
            ExitCode::from(3)
        }
    }
}
