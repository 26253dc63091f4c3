//! The four commands: run, stability, converge and check.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use elastolbm::postprocess::{snapshot_path, DerivedFields, Snapshot};
use elastolbm::stabmon::{algebra_checks, AlgebraReport};
use elastolbm::verify::{
    convergence_study, execute, exact_fields, FieldKind, NormKind, NormSet, OrderTable, RunOutcome,
};
use elastolbm::{case_by_name, BoundaryMode, Lattice, Material};

use crate::config::{Configurable, RunConfig, StudyConfig};
use crate::CliError;

pub const MANIFEST: &str = "manifest.txt";
pub const SUMMARY: &str = "summary.txt";
pub const NORM_TRACE: &str = "norm_trace.csv";
pub const ERROR_TRACE: &str = "error_trace.csv";
pub const ERROR_REPORT: &str = "error_report.csv";
pub const ORDER_TABLE: &str = "order_table.csv";
pub const VERDICTS: &str = "verdicts.csv";

/// Upper bound on the spatial L2rel displacement error accepted as a
/// bounded error trace in long runs.
pub const TRACE_BOUND: f64 = 0.05;

fn write(dir: &Path, name: &str, text: &str) -> Result<(), CliError> {
    fs::write(dir.join(name), text).map_err(|e| CliError::Io(format!("{}: {e}", dir.join(name).display())))
}

fn manifest(command: &str, config: &str) -> String {
    format!("# elastolbm {}\n# command = {command}\n{config}", env!("CARGO_PKG_VERSION"))
}

fn prepare(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))
}

/// What a single run produced.
#[derive(Debug, Clone, PartialEq)]
pub struct RunReport {
    pub steps: u64,
    pub diverged_at: Option<u64>,
    /// `true` if the norm trace holds the symmetrizer norm.
    pub weighted: bool,
    pub max_drift: Option<f64>,
    pub max_trace_l2rel: Option<f64>,
    /// L2rel of displacement along the horizontal cut at the final time.
    pub slice_l2rel: Option<f64>,
    pub displacement: Option<NormSet>,
    pub stress: Option<NormSet>,
}

impl RunReport {
    pub fn status(&self) -> &'static str {
        if self.diverged_at.is_some() {
            "unstable"
        } else {
            "completed"
        }
    }

    pub fn to_text(&self) -> String {
        let opt = |v: Option<f64>| v.map_or("none".to_string(), |v| format!("{v:.6e}"));
        let mut s = String::new();
        writeln!(s, "status = {}", self.status()).unwrap();
        writeln!(s, "steps = {}", self.steps).unwrap();
        writeln!(s, "diverged_at = {}", self.diverged_at.map_or("none".into(), |m| m.to_string())).unwrap();
        writeln!(s, "monitor = {}", if self.weighted { "weighted" } else { "euclidean" }).unwrap();
        writeln!(s, "max_relative_drift = {}", opt(self.max_drift)).unwrap();
        writeln!(s, "max_trace_l2rel_u = {}", opt(self.max_trace_l2rel)).unwrap();
        writeln!(s, "slice_l2rel_u = {}", opt(self.slice_l2rel)).unwrap();
        for (name, set) in [("u", self.displacement), ("sigma", self.stress)] {
            if let Some(n) = set {
                writeln!(s, "l2rel_{name} = {:.6e}", n.l2rel).unwrap();
                writeln!(s, "linfrel_{name} = {:.6e}", n.linfrel).unwrap();
            }
        }
        s
    }
}

fn error_report_csv(u: &NormSet, sigma: &NormSet) -> String {
    let mut s = String::from("field,norm,value\n");
    for (f, set) in [(FieldKind::Displacement, u), (FieldKind::Stress, sigma)] {
        for n in [NormKind::L2, NormKind::Linf, NormKind::L2Rel, NormKind::LinfRel] {
            writeln!(s, "{},{},{:.16e}", f.as_str(), n.as_str(), set.get(n)).unwrap();
        }
    }
    s
}

/// Relative L2 displacement error along the lattice row closest to `y`.
pub fn slice_l2rel(lattice: &Lattice, num: &DerivedFields, exact: &DerivedFields, y: f64) -> f64 {
    let iy = (0..lattice.ny())
        .min_by(|&a, &b| (lattice.disc.y(a) - y).abs().total_cmp(&(lattice.disc.y(b) - y).abs()))
        .unwrap_or(0);
    let (mut e, mut r) = (0.0, 0.0);
    for node in iy * lattice.nx()..(iy + 1) * lattice.nx() {
        for k in 0..2 {
            e += (num.u[node][k] - exact.u[node][k]).powi(2);
            r += exact.u[node][k].powi(2);
        }
    }
    (e / r).sqrt()
}

/// Runs one configuration and writes its artifacts to `config.out_dir`.
///
/// A diverging run is not an error here: its artifacts are written and the
/// report carries the divergence step.
pub fn cmd_run(config: &RunConfig) -> Result<RunReport, CliError> {
    execute_run(config, "run")
}

/// A long run recording the norm and error traces; as [`cmd_run`], with the
/// error trace switched on (every 100 steps) if the config leaves it off.
pub fn cmd_stability(config: &RunConfig) -> Result<RunReport, CliError> {
    let mut config = config.clone();
    if config.trace_stride == 0 {
        config.trace_stride = 100;
    }
    execute_run(&config, "stability")
}

fn execute_run(config: &RunConfig, command: &str) -> Result<RunReport, CliError> {
    let spec = config.spec()?;
    let dir = &config.out_dir;
    prepare(dir)?;
    write(dir, MANIFEST, &manifest(command, &config.to_text()))?;

    let outcome: RunOutcome = execute(&spec, config.monitors(), |step, lattice, fields| {
        Snapshot::from_fields(lattice, fields).write(&snapshot_path(dir, step))
    })?;

    if config.norm_stride > 0 {
        write(dir, NORM_TRACE, &outcome.norm_trace.to_csv())?;
    }
    if !outcome.error_trace.is_empty() {
        write(dir, ERROR_TRACE, &outcome.error_trace_csv())?;
    }
    let displacement = outcome.report(FieldKind::Displacement);
    let stress = outcome.report(FieldKind::Stress);
    if let (Some(u), Some(s)) = (&displacement, &stress) {
        write(dir, ERROR_REPORT, &error_report_csv(u, s))?;
    }
    let slice = match (&outcome.final_fields, spec.case.exact) {
        (Some(fields), true) => {
            let lattice = spec.lattice()?;
            let exact = exact_fields(&spec.case, &spec.material, &lattice, lattice.disc.time(outcome.steps));
            Some(slice_l2rel(&lattice, fields, &exact, config.slice_y))
        }
        _ => None,
    };

    let report = RunReport {
        steps: outcome.steps,
        diverged_at: outcome.diverged_at,
        weighted: outcome.weighted,
        max_drift: outcome.norm_trace.initial().map(|_| outcome.norm_trace.max_drift()),
        max_trace_l2rel: outcome.error_trace.iter().map(|s| s.l2rel).reduce(f64::max),
        slice_l2rel: slice,
        displacement,
        stress,
    };
    write(dir, SUMMARY, &report.to_text())?;
    Ok(report)
}

/// Acceptance rule for an observed order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Rule {
    Within(f64, f64),
    AtLeast(f64),
    /// Reduced order in `[lo, hi]`, or full order of at least `full`.
    EitherRegime { lo: f64, hi: f64, full: f64 },
}

impl Rule {
    /// The rule applied to a (mode, field, norm) combination.
    pub fn for_study(mode: BoundaryMode, field: FieldKind, norm: NormKind) -> Self {
        match (mode, field, norm) {
            (BoundaryMode::Periodic, _, _) => Rule::Within(1.9, 2.3),
            (BoundaryMode::Dirichlet, FieldKind::Stress, NormKind::Linf | NormKind::LinfRel) => {
                Rule::EitherRegime { lo: 0.8, hi: 1.6, full: 1.9 }
            }
            (BoundaryMode::Dirichlet, _, _) => Rule::AtLeast(1.9),
        }
    }

    pub fn accepts(&self, order: f64) -> bool {
        match *self {
            Rule::Within(lo, hi) => (lo..=hi).contains(&order),
            Rule::AtLeast(lo) => order >= lo,
            Rule::EitherRegime { lo, hi, full } => (lo..=hi).contains(&order) || order >= full,
        }
    }

    pub fn describe(&self) -> String {
        match *self {
            Rule::Within(lo, hi) => format!("[{lo}; {hi}]"),
            Rule::AtLeast(lo) => format!(">= {lo}"),
            Rule::EitherRegime { lo, hi, full } => format!("[{lo}; {hi}] or >= {full}"),
        }
    }
}

/// Outcome of the finest-level order check for one (material, field, norm).
#[derive(Debug, Clone, PartialEq)]
pub struct Verdict {
    pub ck2: f64,
    pub cmu2: f64,
    pub field: FieldKind,
    pub norm: NormKind,
    pub order: Option<f64>,
    pub rule: Rule,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StudyReport {
    pub table: OrderTable,
    pub verdicts: Vec<Verdict>,
}

impl StudyReport {
    pub fn passed(&self) -> bool {
        self.verdicts.iter().all(|v| v.pass)
    }

    pub fn order(&self, ck2: f64, cmu2: f64, field: FieldKind, norm: NormKind) -> Option<f64> {
        self.verdicts
            .iter()
            .find(|v| v.ck2 == ck2 && v.cmu2 == cmu2 && v.field == field && v.norm == norm)
            .and_then(|v| v.order)
    }

    pub fn verdicts_csv(&self) -> String {
        let mut s = String::from("cK2,cmu2,field,norm,observed_order,rule,verdict\n");
        for v in &self.verdicts {
            let order = v.order.map_or("none".to_string(), |p| format!("{p:.6}"));
            let verdict = if v.pass { "PASS" } else { "FAIL" };
            writeln!(
                s,
                "{},{},{},{},{order},{},{verdict}",
                v.ck2,
                v.cmu2,
                v.field.as_str(),
                v.norm.as_str(),
                v.rule.describe()
            )
            .unwrap();
        }
        s
    }
}

/// Runs a grid convergence study and judges the orders between the two
/// finest levels.
pub fn cmd_converge(config: &StudyConfig) -> Result<StudyReport, CliError> {
    let case = case_by_name(&config.case)?;
    let materials =
        config.materials.iter().map(|&(a, b)| Material::new(a, b)).collect::<Result<Vec<_>, _>>()?;
    let dir = &config.out_dir;
    prepare(dir)?;
    write(dir, MANIFEST, &manifest("converge", &config.to_text()))?;

    let table = convergence_study(&case, config.mode, &materials, &config.grids, config.t_final, config.init)?;
    let verdicts = table
        .finest_orders()
        .into_iter()
        .map(|row| {
            let rule = Rule::for_study(row.mode, row.field, row.norm);
            let pass = row.observed_order.is_some_and(|p| rule.accepts(p));
            Verdict {
                ck2: row.ck2,
                cmu2: row.cmu2,
                field: row.field,
                norm: row.norm,
                order: row.observed_order,
                rule,
                pass,
            }
        })
        .collect();
    let report = StudyReport { table, verdicts };
    write(dir, ORDER_TABLE, &report.table.to_csv())?;
    write(dir, VERDICTS, &report.verdicts_csv())?;
    Ok(report)
}

/// Runs the symmetrizer and projector algebra checks for the material and
/// lattice speed of `config`.
pub fn cmd_check(config: &RunConfig) -> Result<AlgebraReport, CliError> {
    let m = Material::new(config.ck2, config.cmu2)?;
    Ok(algebra_checks(&m, config.dx / config.dt, config.omega)?)
}
