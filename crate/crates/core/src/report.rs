//! CSV and JSON emission.
//!
//! Every table starts with a `#` metadata block, then one header line, then
//! rows. Numbers are written with 17 significant digits; a missing value is
//! written as a flag word naming why it is missing, never as NaN or inf.

use std::fmt;
use std::io::{self, Write};
use std::str::FromStr;

use serde_json::{json, Map, Value};

use crate::dynamics::Trajectory;
use crate::error::Error;
use crate::positivity::{KossakowskiData, ScalingReport};
use crate::steady::Flags;
use crate::sweep::{DivergenceBracket, LambdaSweep, Optimum, SweepConfig, SweepRecord, TemperatureSweep};

pub const CODE_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s.trim().to_ascii_lowercase().as_str() {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(Error::Domain(format!("unknown output format `{other}`"))),
        }
    }
}

impl fmt::Display for Format {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Format::Csv => "csv",
            Format::Json => "json",
        })
    }
}

/// One table entry.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Text(String),
}

impl Cell {
    /// A value, or the flag word explaining its absence.
    pub fn opt(value: Option<f64>, missing: &str) -> Cell {
        match value {
            Some(v) => Cell::Num(v),
            None => Cell::Text(missing.to_string()),
        }
    }

    pub fn text(s: impl Into<String>) -> Cell {
        Cell::Text(s.into())
    }

    fn csv(&self) -> String {
        match self {
            Cell::Num(v) => format_number(*v),
            Cell::Int(n) => n.to_string(),
            Cell::Text(s) => s.clone(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Num(v) if v.is_finite() => json!(v),
            Cell::Num(_) => Value::String("NonFinite".into()),
            Cell::Int(n) => json!(n),
            Cell::Text(s) => Value::String(s.clone()),
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Text(v.to_string())
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

/// `{:.16e}` for finite values, `NonFinite` otherwise.
pub fn format_number(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        "NonFinite".into()
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub metadata: Vec<(String, String)>,
    /// Derived quantities (fitted slopes, thresholds) kept out of the rows.
    pub summary: Vec<(String, Cell)>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(metadata: Vec<(String, String)>, columns: &[&str]) -> Self {
        Table {
            metadata,
            summary: Vec::new(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn summarize(&mut self, key: impl Into<String>, value: impl Into<Cell>) {
        self.summary.push((key.into(), value.into()));
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        for (k, v) in &self.metadata {
            writeln!(w, "# {k}: {v}")?;
        }
        for (k, v) in &self.summary {
            writeln!(w, "# result.{k}: {}", v.csv())?;
        }
        writeln!(w, "{}", self.columns.join(","))?;
        for row in &self.rows {
            let line: Vec<String> = row.iter().map(Cell::csv).collect();
            writeln!(w, "{}", line.join(","))?;
        }
        Ok(())
    }

    pub fn to_json(&self) -> Value {
        let metadata: Map<String, Value> =
            self.metadata.iter().map(|(k, v)| (k.clone(), Value::String(v.clone()))).collect();
        let summary: Map<String, Value> = self.summary.iter().map(|(k, v)| (k.clone(), v.json())).collect();
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|row| {
                let obj: Map<String, Value> =
                    self.columns.iter().zip(row).map(|(c, v)| (c.clone(), v.json())).collect();
                Value::Object(obj)
            })
            .collect();
        json!({
            "metadata": metadata,
            "summary": summary,
            "columns": self.columns,
            "rows": rows,
        })
    }

    pub fn write_json<W: Write>(&self, mut w: W) -> io::Result<()> {
        serde_json::to_writer_pretty(&mut w, &self.to_json())?;
        writeln!(w)
    }

    pub fn write<W: Write>(&self, format: Format, w: W) -> io::Result<()> {
        match format {
            Format::Csv => self.write_csv(w),
            Format::Json => self.write_json(w),
        }
    }

    pub fn render(&self, format: Format) -> String {
        let mut buf = Vec::new();
        self.write(format, &mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("tables are UTF-8")
    }
}

/// Units, conventions and modelling assumptions shared by every output.
pub fn conventions() -> Vec<(String, String)> {
    [
        ("code_version", CODE_VERSION),
        ("units", "hbar = k_B = 1; energies in units of omega0"),
        ("hamiltonian", "H = (omega0/2) sigma_z"),
        ("coupling", "A = f1 sigma_x + f2 sigma_z"),
        ("spectral_density", "J(w) = lambda w^s cutoff^(1-s) exp(-w/cutoff)"),
        ("cutoff_default", "cutoff = 10 omega0 unless set"),
        ("numerator_gamma", "Gamma(1) of the closed-form numerator generalized to Gamma(s)"),
        ("rates", "gamma_pm = 2 Re Gamma(+-omega0), gamma_zero = 4 Re Gamma(0) = 2 pi lim J_eff(w -> 0+)"),
        ("lamb_shifts", "delta1 = 2(S(omega0) - S(-omega0)), delta2 = 2(S(omega0) + S(-omega0))"),
        ("missing_values", "written as the flag word naming the cause"),
    ]
    .into_iter()
    .map(|(k, v)| (k.to_string(), v.to_string()))
    .collect()
}

/// Conventions followed by the full configuration.
pub fn standard_metadata(config: &SweepConfig, verb: &str) -> Vec<(String, String)> {
    let mut m = vec![("verb".to_string(), verb.to_string())];
    m.extend(conventions());
    m.extend(config.metadata().into_iter().map(|(k, v)| (format!("config.{k}"), v)));
    m
}

fn flag_word(flags: Flags) -> String {
    let s = flags.to_labels();
    if s.is_empty() { "none".into() } else { s }
}

/// Flag word for a value the record does not have.
pub fn missing_reason(flags: Flags) -> &'static str {
    for f in [
        Flags::DENOMINATOR_ZERO,
        Flags::INFINITE_DEPHASING,
        Flags::SINGULAR_GENERATOR,
        Flags::NUMERICAL_FAILURE,
    ] {
        if flags.contains(f) {
            return Flags::label(f);
        }
    }
    "Undefined"
}

pub const RECORD_COLUMNS: [&str; 14] = [
    "lambda",
    "s",
    "cutoff",
    "temperature",
    "omega0",
    "f1",
    "f2",
    "mode",
    "coherence",
    "v1",
    "v3",
    "kossakowski_negativity",
    "state_negativity",
    "flags",
];

pub fn record_row(r: &SweepRecord) -> Vec<Cell> {
    let miss = missing_reason(r.flags);
    vec![
        r.lambda.into(),
        r.s.into(),
        r.cutoff.into(),
        r.temperature.into(),
        r.omega0.into(),
        r.f1.into(),
        r.f2.into(),
        r.mode.to_string().into(),
        Cell::opt(r.coherence, miss),
        Cell::opt(r.v1, miss),
        Cell::opt(r.v3, miss),
        Cell::opt(r.kossakowski_negativity, miss),
        Cell::opt(r.state_negativity, miss),
        flag_word(r.flags).into(),
    ]
}

pub fn records_table(metadata: Vec<(String, String)>, records: &[SweepRecord]) -> Table {
    let mut t = Table::new(metadata, &RECORD_COLUMNS);
    for r in records {
        t.push(record_row(r));
    }
    t
}

pub fn lambda_sweep_table(metadata: Vec<(String, String)>, sweep: &LambdaSweep) -> Table {
    let mut t = records_table(metadata, &sweep.records);
    t.summarize("coherence_slope", Cell::opt(sweep.coherence_slope, "Undefined"));
    t.summarize("kossakowski_negativity_slope", Cell::opt(sweep.negativity_slope, "Undefined"));
    t
}

pub fn temperature_sweep_table(metadata: Vec<(String, String)>, sweep: &TemperatureSweep) -> Table {
    let mut t = records_table(metadata, &sweep.records);
    for (s, threshold) in &sweep.negativity_threshold {
        t.summarize(format!("state_negativity_threshold.s={s}"), Cell::opt(*threshold, "NoNegativity"));
    }
    t
}

pub fn optimum_table(metadata: Vec<(String, String)>, opt: &Optimum) -> Table {
    let mut t = records_table(metadata, std::slice::from_ref(&opt.record));
    t.summarize("evaluations", opt.evaluations);
    t
}

pub fn brackets_table(metadata: Vec<(String, String)>, brackets: &[DivergenceBracket]) -> Table {
    let mut t = Table::new(
        metadata,
        &[
            "lambda",
            "s",
            "cutoff",
            "f1",
            "f2",
            "temperature_low",
            "temperature_high",
            "denominator_low",
            "denominator_high",
            "flags",
        ],
    );
    for b in brackets {
        t.push(vec![
            b.lambda.into(),
            b.s.into(),
            b.cutoff.into(),
            b.f1.into(),
            b.f2.into(),
            b.temperature_low.into(),
            b.temperature_high.into(),
            b.denominator_low.into(),
            b.denominator_high.into(),
            flag_word(b.flags).into(),
        ]);
    }
    t.summarize("brackets", brackets.len());
    t
}

/// The Kossakowski matrix entry by entry, with eigenvalues and negativity.
pub fn kossakowski_table(metadata: Vec<(String, String)>, k: &KossakowskiData) -> Table {
    let mut t = Table::new(metadata, &["row", "col", "re", "im"]);
    for i in 0..3 {
        for j in 0..3 {
            let a = k.a[(i, j)];
            t.push(vec![(i + 1).into(), (j + 1).into(), a.re.into(), a.im.into()]);
        }
    }
    for (n, mu) in k.eigenvalues.iter().enumerate() {
        t.summarize(format!("eigenvalue_{}", n + 1), *mu);
    }
    t.summarize("negativity", k.negativity);
    let h = &k.lamb_hamiltonian;
    t.summarize("lamb_hamiltonian_z", h[(0, 0)].re);
    t.summarize("lamb_hamiltonian_x", h[(0, 1)].re);
    t.summarize("lamb_hamiltonian_y", -h[(0, 1)].im);
    t
}

pub fn scaling_table(metadata: Vec<(String, String)>, report: &ScalingReport) -> Table {
    let mut t = Table::new(metadata, &["lambda", "kossakowski_negativity", "ratio"]);
    for ((l, n), r) in report.lambdas.iter().zip(&report.negativities).zip(&report.ratios) {
        t.push(vec![(*l).into(), (*n).into(), (*r).into()]);
    }
    t.summarize("ratio_spread", report.spread);
    t.summarize("proportional", report.proportional);
    t
}

/// Columns `t,v1,v2,v3,norm,physical`.
pub fn trajectory_table(metadata: Vec<(String, String)>, traj: &Trajectory) -> Table {
    let mut t = Table::new(metadata, &["t", "v1", "v2", "v3", "norm", "physical"]);
    for ((time, v), ok) in traj.times.iter().zip(&traj.states).zip(&traj.physical_flags) {
        t.push(vec![(*time).into(), v[0].into(), v[1].into(), v[2].into(), v.norm().into(), (*ok).into()]);
    }
    let reference = traj.reference.map(|r| r.iter().map(|x| format_number(*x)).collect::<Vec<_>>().join(" "));
    t.summarize("converged", traj.converged);
    t.summarize("final_distance", Cell::opt(traj.final_distance, "SingularGenerator"));
    t.summarize("reference", reference.unwrap_or_else(|| "SingularGenerator".into()));
    t.summarize("max_norm", traj.max_norm());
    t.summarize("accepted_steps", traj.stats.accepted);
    t
}
