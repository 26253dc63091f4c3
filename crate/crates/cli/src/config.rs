//! Flat `key = value` configuration files.
//!
//! Blank lines and lines starting with `#` are ignored. Numbers may be
//! written as fractions (`dx = 1/80`). Lists are comma separated; a pair is
//! written `a:b`.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use elastolbm::kernel::check_omega;
use elastolbm::verify::{InitKind, Monitors, RunSpec};
use elastolbm::{case_by_name, BoundaryMode, Material};

use crate::CliError;

fn bad(key: &str, value: &str, what: &str) -> CliError {
    CliError::Config(format!("{key} = '{value}': {what}"))
}

/// Parses `a` or `a/b`.
pub fn parse_number(text: &str) -> Option<f64> {
    let text = text.trim();
    let v = match text.split_once('/') {
        Some((a, b)) => {
            let (a, b): (f64, f64) = (a.trim().parse().ok()?, b.trim().parse().ok()?);
            if b == 0.0 {
                return None;
            }
            a / b
        }
        None => text.parse().ok()?,
    };
    v.is_finite().then_some(v)
}

fn number(key: &str, value: &str) -> Result<f64, CliError> {
    parse_number(value).ok_or_else(|| bad(key, value, "not a finite number"))
}

fn stride(key: &str, value: &str) -> Result<u64, CliError> {
    value.trim().parse().map_err(|_| bad(key, value, "expected a non-negative integer"))
}

fn flag(key: &str, value: &str) -> Result<bool, CliError> {
    match value.trim() {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(bad(key, value, "expected true or false")),
    }
}

fn mode(key: &str, value: &str) -> Result<BoundaryMode, CliError> {
    value.parse().map_err(|_| bad(key, value, "expected periodic or dirichlet"))
}

fn init(key: &str, value: &str) -> Result<InitKind, CliError> {
    match value.trim() {
        "corrected" => Ok(InitKind::Corrected),
        "equilibrium" => Ok(InitKind::EquilibriumOnly),
        _ => Err(bad(key, value, "expected corrected or equilibrium")),
    }
}

fn init_str(k: InitKind) -> &'static str {
    match k {
        InitKind::Corrected => "corrected",
        InitKind::EquilibriumOnly => "equilibrium",
    }
}

fn pairs(key: &str, value: &str) -> Result<Vec<(f64, f64)>, CliError> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|item| {
            let (a, b) = item.split_once(':').ok_or_else(|| bad(key, item, "expected a:b"))?;
            Ok((number(key, a)?, number(key, b)?))
        })
        .collect()
}

fn pairs_str(list: &[(f64, f64)]) -> String {
    list.iter().map(|(a, b)| format!("{a}:{b}")).collect::<Vec<_>>().join(", ")
}

/// Splits config text into `(key, value)` pairs.
pub fn parse_pairs(text: &str) -> Result<Vec<(String, String)>, CliError> {
    let mut out = Vec::new();
    for (no, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| CliError::Config(format!("line {}: expected key = value", no + 1)))?;
        let k = k.trim();
        if k.is_empty() {
            return Err(CliError::Config(format!("line {}: empty key", no + 1)));
        }
        out.push((k.to_string(), v.trim().to_string()));
    }
    Ok(out)
}

/// A flat configuration that accepts overrides key by key.
pub trait Configurable: Sized {
    fn set(&mut self, key: &str, value: &str) -> Result<(), CliError>;
    fn to_text(&self) -> String;

    fn apply_text(&mut self, text: &str) -> Result<(), CliError> {
        for (k, v) in parse_pairs(text)? {
            self.set(&k, &v)?;
        }
        Ok(())
    }

    fn apply_file(&mut self, path: &Path) -> Result<(), CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        self.apply_text(&text)
    }

    /// Applies `key=value` overrides from the command line.
    fn apply_overrides(&mut self, items: &[String]) -> Result<(), CliError> {
        for item in items {
            let (k, v) = item
                .split_once('=')
                .ok_or_else(|| CliError::Config(format!("override '{item}': expected key=value")))?;
            self.set(k.trim(), v.trim())?;
        }
        Ok(())
    }
}

/// One simulation: the parameters of `run` and `stability`.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub case: String,
    pub mode: BoundaryMode,
    pub ck2: f64,
    pub cmu2: f64,
    pub dx: f64,
    pub dt: f64,
    pub t_final: f64,
    pub omega: f64,
    pub cfl_override: bool,
    pub init: InitKind,
    pub snapshot_stride: u64,
    pub norm_stride: u64,
    /// Space-time error sampling stride; 0 disables the error report.
    pub error_stride: u64,
    /// Stride of the spatial L2rel displacement trace; 0 disables it.
    pub trace_stride: u64,
    /// Height of the horizontal cut compared with the exact solution at the end.
    pub slice_y: f64,
    pub out_dir: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            case: "wave52".into(),
            mode: BoundaryMode::Periodic,
            ck2: 1.1,
            cmu2: 0.4,
            dx: 1.0 / 80.0,
            dt: 1.0 / 200.0,
            t_final: 1.0,
            omega: 2.0,
            cfl_override: false,
            init: InitKind::Corrected,
            snapshot_stride: 0,
            norm_stride: 1,
            error_stride: 1,
            trace_stride: 0,
            slice_y: 0.5,
            out_dir: PathBuf::from("out"),
        }
    }
}

impl Configurable for RunConfig {
    fn set(&mut self, key: &str, value: &str) -> Result<(), CliError> {
        match key {
            "case" => self.case = value.trim().to_string(),
            "mode" => self.mode = mode(key, value)?,
            "cK2" => self.ck2 = number(key, value)?,
            "cmu2" => self.cmu2 = number(key, value)?,
            "dx" => self.dx = number(key, value)?,
            "dt" => self.dt = number(key, value)?,
            "t_final" => self.t_final = number(key, value)?,
            "omega" => self.omega = number(key, value)?,
            "cfl_override" => self.cfl_override = flag(key, value)?,
            "init" => self.init = init(key, value)?,
            "snapshot_stride" => self.snapshot_stride = stride(key, value)?,
            "norm_stride" => self.norm_stride = stride(key, value)?,
            "error_stride" => self.error_stride = stride(key, value)?,
            "trace_stride" => self.trace_stride = stride(key, value)?,
            "slice_y" => self.slice_y = number(key, value)?,
            "out_dir" => self.out_dir = PathBuf::from(value.trim()),
            _ => return Err(CliError::Config(format!("unknown run key '{key}'"))),
        }
        Ok(())
    }

    fn to_text(&self) -> String {
        let mut s = String::new();
        writeln!(s, "case = {}", self.case).unwrap();
        writeln!(s, "mode = {}", self.mode.as_str()).unwrap();
        writeln!(s, "cK2 = {}", self.ck2).unwrap();
        writeln!(s, "cmu2 = {}", self.cmu2).unwrap();
        writeln!(s, "dx = {}", self.dx).unwrap();
        writeln!(s, "dt = {}", self.dt).unwrap();
        writeln!(s, "t_final = {}", self.t_final).unwrap();
        writeln!(s, "omega = {}", self.omega).unwrap();
        writeln!(s, "cfl_override = {}", self.cfl_override).unwrap();
        writeln!(s, "init = {}", init_str(self.init)).unwrap();
        writeln!(s, "snapshot_stride = {}", self.snapshot_stride).unwrap();
        writeln!(s, "norm_stride = {}", self.norm_stride).unwrap();
        writeln!(s, "error_stride = {}", self.error_stride).unwrap();
        writeln!(s, "trace_stride = {}", self.trace_stride).unwrap();
        writeln!(s, "slice_y = {}", self.slice_y).unwrap();
        writeln!(s, "out_dir = {}", self.out_dir.display()).unwrap();
        s
    }
}

impl RunConfig {
    /// Validates the parameters and resolves them into a solver run.
    pub fn spec(&self) -> Result<RunSpec, CliError> {
        check_omega(self.omega)?;
        Ok(RunSpec {
            case: case_by_name(&self.case)?,
            mode: self.mode,
            material: Material::new(self.ck2, self.cmu2)?,
            dx: self.dx,
            dt: self.dt,
            t_final: self.t_final,
            omega: self.omega,
            cfl_override: self.cfl_override,
            init: self.init,
        })
    }

    pub fn monitors(&self) -> Monitors {
        Monitors {
            error_stride: self.error_stride,
            norm_stride: self.norm_stride,
            trace_stride: self.trace_stride,
            snapshot_stride: self.snapshot_stride,
        }
    }
}

/// A grid convergence study.
#[derive(Debug, Clone, PartialEq)]
pub struct StudyConfig {
    pub case: String,
    pub mode: BoundaryMode,
    /// `(cK2, cmu2)` pairs.
    pub materials: Vec<(f64, f64)>,
    /// `(dx, dt)` levels.
    pub grids: Vec<(f64, f64)>,
    pub t_final: f64,
    pub init: InitKind,
    pub out_dir: PathBuf,
}

impl Default for StudyConfig {
    fn default() -> Self {
        let c = 2.5;
        Self {
            case: "wave52".into(),
            mode: BoundaryMode::Periodic,
            materials: vec![(1.5, 0.0), (1.1, 0.4), (0.75, 0.75)],
            grids: [40.0, 80.0, 160.0].iter().map(|n| (1.0 / n, 1.0 / (c * n))).collect(),
            t_final: 1.0,
            init: InitKind::Corrected,
            out_dir: PathBuf::from("out"),
        }
    }
}

impl Configurable for StudyConfig {
    fn set(&mut self, key: &str, value: &str) -> Result<(), CliError> {
        match key {
            "case" => self.case = value.trim().to_string(),
            "mode" => self.mode = mode(key, value)?,
            "materials" => self.materials = pairs(key, value)?,
            "grids" => self.grids = pairs(key, value)?,
            "t_final" => self.t_final = number(key, value)?,
            "init" => self.init = init(key, value)?,
            "out_dir" => self.out_dir = PathBuf::from(value.trim()),
            _ => return Err(CliError::Config(format!("unknown study key '{key}'"))),
        }
        Ok(())
    }

    fn to_text(&self) -> String {
        let mut s = String::new();
        writeln!(s, "case = {}", self.case).unwrap();
        writeln!(s, "mode = {}", self.mode.as_str()).unwrap();
        writeln!(s, "materials = {}", pairs_str(&self.materials)).unwrap();
        writeln!(s, "grids = {}", pairs_str(&self.grids)).unwrap();
        writeln!(s, "t_final = {}", self.t_final).unwrap();
        writeln!(s, "init = {}", init_str(self.init)).unwrap();
        writeln!(s, "out_dir = {}", self.out_dir.display()).unwrap();
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fractions_and_plain_numbers() {
        assert_eq!(parse_number("1/80"), Some(0.0125));
        assert_eq!(parse_number(" 2.5 "), Some(2.5));
        assert_eq!(parse_number("1 / 4"), Some(0.25));
        assert_eq!(parse_number("1/0"), None);
        assert_eq!(parse_number("nan"), None);
        assert_eq!(parse_number("x"), None);
    }

    #[test]
    fn comments_and_blank_lines_are_skipped() {
        let p = parse_pairs("# c\n\n dx = 1/80 \nmode=dirichlet\n").unwrap();
        assert_eq!(p, vec![("dx".into(), "1/80".into()), ("mode".into(), "dirichlet".into())]);
        assert!(parse_pairs("dx 1/80").is_err());
        assert!(parse_pairs("= 3").is_err());
    }

    #[test]
    fn run_config_text_round_trips() {
        let mut c = RunConfig::default();
        c.apply_text("mode = dirichlet\ncK2 = 1.2\ndx = 1/160\ndt = 1/400\ncfl_override = true\ninit = equilibrium")
            .unwrap();
        assert_eq!(c.dt, 1.0 / 400.0);
        let mut back = RunConfig { case: "x".into(), ..RunConfig::default() };
        back.apply_text(&c.to_text()).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn study_config_text_round_trips() {
        let c = StudyConfig::default();
        let mut back = StudyConfig { materials: vec![], grids: vec![], ..StudyConfig::default() };
        back.apply_text(&c.to_text()).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn invalid_entries_are_config_errors() {
        let mut c = RunConfig::default();
        for line in ["bogus = 1", "mode = toroidal", "dx = abc", "norm_stride = -1", "cfl_override = maybe"] {
            assert!(matches!(c.apply_text(line), Err(CliError::Config(_))), "{line}");
        }
        let mut s = StudyConfig::default();
        assert!(s.apply_text("grids = 1/40").is_err());
        s.apply_text("grids =").unwrap();
        assert!(s.grids.is_empty());
    }

    #[test]
    fn overrides_take_key_value_items() {
        let mut c = RunConfig::default();
        c.apply_overrides(&["omega=1.5".into(), "case = stability_ic".into()]).unwrap();
        assert_eq!((c.omega, c.case.as_str()), (1.5, "stability_ic"));
        assert!(c.apply_overrides(&["omega".into()]).is_err());
    }

    #[test]
    fn spec_rejects_bad_omega_and_unknown_case() {
        let c = RunConfig { omega: 2.5, ..RunConfig::default() };
        assert!(matches!(c.spec(), Err(CliError::Core(_))));
        let c = RunConfig { case: "nope".into(), ..RunConfig::default() };
        assert!(c.spec().is_err());
        assert!(RunConfig::default().spec().is_ok());
    }
}
