//! Error norms against manufactured solutions, run orchestration and
//! convergence studies.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::grid::{build_lattice, BoundaryMode, Lattice};
use crate::kernel::Solver;
use crate::mms::ManufacturedCase;
use crate::model::Material;
use crate::postprocess::DerivedFields;
use crate::stabmon::{cfl_check, population_norm, NormTrace, Symmetrizer};

/// A run is flagged divergent once its monitor norm exceeds this multiple of
/// the initial value.
pub const DIVERGENCE_FACTOR: f64 = 1e6;

/// Exact fields sampled on the lattice, dimensional like [`DerivedFields`].
pub fn exact_fields(case: &ManufacturedCase, m: &Material, lattice: &Lattice, t: f64) -> DerivedFields {
    let n = lattice.n_nodes();
    let jets = case.tabulate(lattice, t);
    let uscale = m.velocity * m.time;
    let sscale = m.velocity * m.length / m.time;
    let mut out = DerivedFields::zeros(n);
    for node in 0..n {
        let jet = jets.jet(node);
        out.u[node] = jet.displacement().map(|v| uscale * v);
        out.v[node] = jet.velocity().map(|v| m.velocity * v);
        out.sigma[node] = jet.stress(m).map(|v| sscale * v);
    }
    out
}

/// Running sums of one error field over the sampled space-time points.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct FieldErrors {
    pub sq_err: f64,
    pub sq_exact: f64,
    pub max_err: f64,
}

impl FieldErrors {
    fn add<const D: usize>(&mut self, num: &[[f64; D]], exact: &[[f64; D]]) {
        for (a, b) in num.iter().zip(exact) {
            for k in 0..D {
                let e = a[k] - b[k];
                self.sq_err += e * e;
                self.sq_exact += b[k] * b[k];
                self.max_err = self.max_err.max(e.abs());
            }
        }
    }

    pub fn norms(&self, weight: f64) -> NormSet {
        let l2 = (weight * self.sq_err).sqrt();
        let l2_exact = (weight * self.sq_exact).sqrt();
        NormSet { l2, linf: self.max_err, l2rel: l2 / l2_exact, linfrel: self.max_err / l2_exact }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormSet {
    pub l2: f64,
    pub linf: f64,
    pub l2rel: f64,
    pub linfrel: f64,
}

impl NormSet {
    pub fn get(&self, norm: NormKind) -> f64 {
        match norm {
            NormKind::L2 => self.l2,
            NormKind::Linf => self.linf,
            NormKind::L2Rel => self.l2rel,
            NormKind::LinfRel => self.linfrel,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NormKind {
    L2,
    Linf,
    L2Rel,
    LinfRel,
}

impl NormKind {
    pub fn as_str(self) -> &'static str {
        match self {
            NormKind::L2 => "L2",
            NormKind::Linf => "Linf",
            NormKind::L2Rel => "L2rel",
            NormKind::LinfRel => "Linfrel",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FieldKind {
    Displacement,
    Stress,
}

impl FieldKind {
    pub fn as_str(self) -> &'static str {
        match self {
            FieldKind::Displacement => "u",
            FieldKind::Stress => "sigma",
        }
    }
}

/// Space-time error accumulation, `L2 = (dx^2 dt sum |e|^2)^(1/2)` and
/// `Linf = max |e|` over all samples.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorAccumulator {
    dx: f64,
    dt: f64,
    pub u: FieldErrors,
    pub sigma: FieldErrors,
    pub samples: u64,
}

impl ErrorAccumulator {
    /// `dt` is the time weight of one sample (the step size times the stride).
    pub fn new(dx: f64, dt: f64) -> Self {
        Self { dx, dt, u: FieldErrors::default(), sigma: FieldErrors::default(), samples: 0 }
    }

    pub fn add(&mut self, num: &DerivedFields, exact: &DerivedFields) -> Result<()> {
        if num.len() != exact.len() {
            return Err(Error::Discretization(format!(
                "field has {} nodes, exact solution {}",
                num.len(),
                exact.len()
            )));
        }
        self.u.add(&num.u, &exact.u);
        self.sigma.add(&num.sigma, &exact.sigma);
        self.samples += 1;
        Ok(())
    }

    pub fn weight(&self) -> f64 {
        self.dx * self.dx * self.dt
    }

    pub fn field(&self, f: FieldKind) -> NormSet {
        match f {
            FieldKind::Displacement => self.u.norms(self.weight()),
            FieldKind::Stress => self.sigma.norms(self.weight()),
        }
    }
}

/// Relative space-only L2 error of the displacement at one time level.
pub fn spatial_l2rel(num: &DerivedFields, exact: &DerivedFields) -> f64 {
    let mut f = FieldErrors::default();
    f.add(&num.u, &exact.u);
    (f.sq_err / f.sq_exact).sqrt()
}

/// `log(e_c / e_f) / log(dx_c / dx_f)`
pub fn observed_order(e_coarse: f64, e_fine: f64, dx_coarse: f64, dx_fine: f64) -> f64 {
    (e_coarse / e_fine).ln() / (dx_coarse / dx_fine).ln()
}

/// Population initialization used by a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum InitKind {
    #[default]
    Corrected,
    /// Equilibrium only; kept for the regression showing the correction matters.
    EquilibriumOnly,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunSpec {
    pub case: ManufacturedCase,
    pub mode: BoundaryMode,
    pub material: Material,
    pub dx: f64,
    pub dt: f64,
    pub t_final: f64,
    pub omega: f64,
    pub cfl_override: bool,
    pub init: InitKind,
}

impl RunSpec {
    pub fn lattice(&self) -> Result<Lattice> {
        build_lattice([1.0, 1.0], self.dx, self.dt, self.t_final, self.mode)
    }
}

/// Sampling strides in steps; zero disables a monitor.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Monitors {
    pub error_stride: u64,
    pub norm_stride: u64,
    pub trace_stride: u64,
    pub snapshot_stride: u64,
}

impl Default for Monitors {
    fn default() -> Self {
        Self { error_stride: 1, norm_stride: 1, trace_stride: 0, snapshot_stride: 0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceSample {
    pub step: u64,
    pub time: f64,
    pub l2rel: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutcome {
    pub steps: u64,
    pub errors: Option<ErrorAccumulator>,
    pub norm_trace: NormTrace,
    /// Whether `norm_trace` holds the symmetrizer norm (otherwise the plain
    /// population norm, used when the CFL condition fails).
    pub weighted: bool,
    pub error_trace: Vec<TraceSample>,
    pub diverged_at: Option<u64>,
    /// Fields at the final time, absent after divergence.
    pub final_fields: Option<DerivedFields>,
}

impl RunOutcome {
    pub fn report(&self, f: FieldKind) -> Option<NormSet> {
        self.errors.as_ref().map(|e| e.field(f))
    }

    pub fn error_trace_csv(&self) -> String {
        let mut out = String::from("step,time,l2rel_u\n");
        for s in &self.error_trace {
            writeln!(out, "{},{:.16e},{:.16e}", s.step, s.time, s.l2rel).unwrap();
        }
        out
    }
}

fn due(step: u64, stride: u64, last: u64) -> bool {
    stride > 0 && (step % stride == 0 || step == last)
}

/// Runs one configuration to its final time, sampling errors, norms and
/// snapshots at the requested strides. Snapshots are handed to `on_snapshot`.
///
/// Space-time errors are taken at steps `m = 1..M` (every `error_stride`-th,
/// always including the last).
pub fn execute(
    spec: &RunSpec,
    monitors: Monitors,
    mut on_snapshot: impl FnMut(u64, &Lattice, &DerivedFields) -> Result<()>,
) -> Result<RunOutcome> {
    let lattice = spec.lattice()?;
    let cfl = cfl_check(&spec.material, lattice.disc.c);
    if !cfl.pass && !spec.cfl_override {
        return Err(Error::Cfl { margin: cfl.margin });
    }
    let sym = if cfl.pass { Some(Symmetrizer::new(&spec.material, lattice.disc.c)?) } else { None };
    let mut solver = match spec.init {
        InitKind::Corrected => {
            Solver::from_case(lattice.clone(), spec.material.clone(), spec.omega, &spec.case)?
        }
        InitKind::EquilibriumOnly => Solver::from_case_uncorrected(
            lattice.clone(),
            spec.material.clone(),
            spec.omega,
            &spec.case,
        )?,
    };
    let monitor = |s: &Solver| match &sym {
        Some(k) => k.weighted_norm(&lattice, &s.populations().cur),
        None => population_norm(&lattice, &s.populations().cur),
    };

    let total = lattice.disc.n_steps();
    let exact_available = spec.case.exact;
    let mut errors = (exact_available && monitors.error_stride > 0).then(|| {
        // the last sample may close a shorter interval; the weight is the
        // nominal stride, which is exact when the stride divides the run
        ErrorAccumulator::new(lattice.disc.dx, lattice.disc.dt * monitors.error_stride as f64)
    });
    let mut outcome = RunOutcome {
        steps: 0,
        errors: None,
        norm_trace: NormTrace::default(),
        weighted: sym.is_some(),
        error_trace: Vec::new(),
        diverged_at: None,
        final_fields: None,
    };

    let norm0 = monitor(&solver);
    if monitors.norm_stride > 0 {
        outcome.norm_trace.push(0, 0.0, norm0);
    }
    if monitors.snapshot_stride > 0 {
        on_snapshot(0, &lattice, &solver.observe())?;
    }
    let track_trace = exact_available && monitors.trace_stride > 0;
    if track_trace {
        let ex = exact_fields(&spec.case, &spec.material, &lattice, 0.0);
        outcome.error_trace.push(TraceSample {
            step: 0,
            time: 0.0,
            l2rel: spatial_l2rel(&solver.observe(), &ex),
        });
    }

    for m in 1..=total {
        solver.step();
        let t = lattice.disc.time(m);

        let need_err = errors.is_some() && due(m, monitors.error_stride, total);
        let need_trace = track_trace && due(m, monitors.trace_stride, total);
        let need_snap = due(m, monitors.snapshot_stride, total);
        if need_err || need_trace || need_snap {
            let fields = solver.observe();
            if need_err || need_trace {
                let ex = exact_fields(&spec.case, &spec.material, &lattice, t);
                if need_err {
                    errors.as_mut().unwrap().add(&fields, &ex)?;
                }
                if need_trace {
                    let l2rel = spatial_l2rel(&fields, &ex);
                    outcome.error_trace.push(TraceSample { step: m, time: t, l2rel });
                }
            }
            if need_snap {
                on_snapshot(m, &lattice, &fields)?;
            }
        }

        if due(m, monitors.norm_stride, total) {
            let norm = monitor(&solver);
            outcome.norm_trace.push(m, t, norm);
            if !norm.is_finite() || norm > DIVERGENCE_FACTOR * norm0 {
                outcome.diverged_at = Some(m);
                outcome.steps = m;
                log::warn!("run diverged at step {m} (monitor norm {norm:.3e})");
                return Ok(outcome);
            }
        }
        outcome.steps = m;
    }
    outcome.errors = errors;
    outcome.final_fields = Some(solver.observe());
    Ok(outcome)
}

/// One line of a convergence table.
#[derive(Debug, Clone, PartialEq)]
pub struct OrderRow {
    pub case: String,
    pub mode: BoundaryMode,
    pub ck2: f64,
    pub cmu2: f64,
    pub dx: f64,
    pub dt: f64,
    pub field: FieldKind,
    pub norm: NormKind,
    /// `None` if the run diverged.
    pub error: Option<f64>,
    /// Order against the next coarser level of the same material.
    pub observed_order: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct OrderTable {
    pub rows: Vec<OrderRow>,
}

pub const ORDER_TABLE_HEADER: &str = "case,mode,cK2,cmu2,dx,dt,field,norm,error,observed_order";

impl OrderTable {
    pub fn to_csv(&self) -> String {
        let mut out = String::from(ORDER_TABLE_HEADER);
        out.push('\n');
        for r in &self.rows {
            let err = r.error.map_or("diverged".to_string(), |e| format!("{e:.16e}"));
            let ord = r.observed_order.map_or(String::new(), |p| format!("{p:.6}"));
            writeln!(
                out,
                "{},{},{},{},{:.16e},{:.16e},{},{},{},{}",
                r.case,
                r.mode,
                r.ck2,
                r.cmu2,
                r.dx,
                r.dt,
                r.field.as_str(),
                r.norm.as_str(),
                err,
                ord
            )
            .unwrap();
        }
        out
    }

    /// Orders between the two finest levels of every material, per field and norm.
    pub fn finest_orders(&self) -> Vec<&OrderRow> {
        let finest = self.rows.iter().map(|r| r.dx).fold(f64::INFINITY, f64::min);
        self.rows.iter().filter(|r| r.dx == finest).collect()
    }
}

/// Norms reported by a convergence study.
pub const STUDY_NORMS: [NormKind; 2] = [NormKind::L2Rel, NormKind::LinfRel];
pub const STUDY_FIELDS: [FieldKind; 2] = [FieldKind::Displacement, FieldKind::Stress];

/// Runs every material on every discretization and fits observed orders
/// between consecutive levels. Discretizations are sorted coarse to fine.
pub fn convergence_study(
    case: &ManufacturedCase,
    mode: BoundaryMode,
    materials: &[Material],
    grids: &[(f64, f64)],
    t_final: f64,
    init: InitKind,
) -> Result<OrderTable> {
    if materials.is_empty() || grids.is_empty() {
        return Err(Error::EmptyStudy);
    }
    if !case.exact {
        return Err(Error::NoExactSolution(case.name.to_string()));
    }
    let mut grids = grids.to_vec();
    grids.sort_by(|a, b| b.0.total_cmp(&a.0));
    let c0 = grids[0].0 / grids[0].1;
    if grids.iter().any(|(dx, dt)| ((dx / dt) - c0).abs() > 1e-9 * c0) {
        return Err(Error::Discretization("study levels must share the lattice speed".into()));
    }
    for m in materials {
        let cfl = cfl_check(m, c0);
        if !cfl.pass {
            return Err(Error::Cfl { margin: cfl.margin });
        }
    }

    let mut table = OrderTable::default();
    for m in materials {
        let mut previous: Option<(f64, RunOutcome)> = None;
        for &(dx, dt) in &grids {
            let spec = RunSpec {
                case: case.clone(),
                mode,
                material: m.clone(),
                dx,
                dt,
                t_final,
                omega: 2.0,
                cfl_override: false,
                init,
            };
            log::info!("study run {} {mode} ({}, {}) dx = {dx}", case.name, m.ck2, m.cmu2);
            let outcome = execute(&spec, Monitors::default(), |_, _, _| Ok(()))?;
            for field in STUDY_FIELDS {
                for norm in STUDY_NORMS {
                    let error = value_of(&outcome, field, norm);
                    let observed_order = match (&previous, error) {
                        (Some((dx_c, prev)), Some(e)) => value_of(prev, field, norm)
                            .map(|e_c| observed_order(e_c, e, *dx_c, dx)),
                        _ => None,
                    };
                    table.rows.push(OrderRow {
                        case: case.name.to_string(),
                        mode,
                        ck2: m.ck2,
                        cmu2: m.cmu2,
                        dx,
                        dt,
                        field,
                        norm,
                        error,
                        observed_order,
                    });
                }
            }
            previous = Some((dx, outcome));
        }
    }
    Ok(table)
}

fn value_of(outcome: &RunOutcome, field: FieldKind, norm: NormKind) -> Option<f64> {
    if outcome.diverged_at.is_some() {
        return None;
    }
    outcome.report(field).map(|n| n.get(norm))
}
