//! Named experiment setups.

use std::path::PathBuf;

use elastolbm::verify::InitKind;
use elastolbm::BoundaryMode;

use crate::config::{RunConfig, StudyConfig};

#[derive(Debug, Clone, PartialEq)]
pub enum Preset {
    Run(RunConfig),
    Study(StudyConfig),
}

/// `(name, description)` of every preset.
pub const PRESETS: [(&str, &str); 11] = [
    ("wave52", "manufactured wave, periodic, (1.1, 0.4), dx = 1/80, dt = 1/200, t_f = 1"),
    ("norm-conservation", "stability_ic with homogeneous walls, (1.1, 0.4), 1/160, 1/400, 10^4 steps"),
    ("stable-long", "wave52 with walls, (1.1, 0.4), 1/160, 1/400, 10^5 steps"),
    ("unstable", "as stable-long with (1.2, 0.4) past the CFL limit, stops on divergence"),
    ("stable-full", "as stable-long for 10^6 steps (hours)"),
    ("converge-periodic", "grid study, periodic, three materials, dx = 1/40..1/160"),
    ("converge-dirichlet", "grid study with walls, three materials, dx = 1/40..1/160"),
    ("converge-periodic-equilibrium", "converge-periodic without the initial correction"),
    ("converge-dirichlet-equilibrium", "converge-dirichlet without the initial correction"),
    ("converge-periodic-full", "periodic study, four materials, dx = 1/80..1/320 in five levels (slow)"),
    ("converge-dirichlet-full", "as converge-periodic-full with walls"),
];

/// Five-level sweep over materials of equal maximum wave speed.
fn full_study(mode: BoundaryMode) -> StudyConfig {
    StudyConfig {
        mode,
        materials: vec![(1.5, 0.0), (1.4, 0.1), (1.1, 0.4), (0.75, 0.75)],
        grids: [80.0, 120.0, 160.0, 240.0, 320.0].iter().map(|n| (1.0 / n, 1.0 / (2.5 * n))).collect(),
        ..StudyConfig::default()
    }
}

fn long(ck2: f64, t_final: f64) -> RunConfig {
    RunConfig {
        case: "wave52".into(),
        mode: BoundaryMode::Dirichlet,
        ck2,
        cmu2: 0.4,
        dx: 1.0 / 160.0,
        dt: 1.0 / 400.0,
        t_final,
        norm_stride: 100,
        error_stride: 0,
        trace_stride: 100,
        ..RunConfig::default()
    }
}

pub fn preset(name: &str) -> Option<Preset> {
    let run = match name {
        "wave52" => RunConfig::default(),
        "norm-conservation" => RunConfig {
            case: "stability_ic".into(),
            mode: BoundaryMode::Dirichlet,
            dx: 1.0 / 160.0,
            dt: 1.0 / 400.0,
            t_final: 25.0,
            error_stride: 0,
            ..RunConfig::default()
        },
        "stable-long" => long(1.1, 250.0),
        "unstable" => RunConfig { cfl_override: true, norm_stride: 1, trace_stride: 1, ..long(1.2, 250.0) },
        "stable-full" => RunConfig { norm_stride: 1000, trace_stride: 1000, ..long(1.1, 2500.0) },
        "converge-periodic" => return Some(Preset::Study(StudyConfig::default())),
        "converge-dirichlet" => {
            return Some(Preset::Study(StudyConfig { mode: BoundaryMode::Dirichlet, ..StudyConfig::default() }))
        }
        "converge-periodic-equilibrium" => {
            return Some(Preset::Study(StudyConfig { init: InitKind::EquilibriumOnly, ..StudyConfig::default() }))
        }
        "converge-dirichlet-equilibrium" => {
            return Some(Preset::Study(StudyConfig {
                mode: BoundaryMode::Dirichlet,
                init: InitKind::EquilibriumOnly,
                ..StudyConfig::default()
            }))
        }
        "converge-periodic-full" => return Some(Preset::Study(full_study(BoundaryMode::Periodic))),
        "converge-dirichlet-full" => return Some(Preset::Study(full_study(BoundaryMode::Dirichlet))),
        _ => return None,
    };
    Some(Preset::Run(RunConfig { out_dir: PathBuf::from(format!("out/{name}")), ..run }))
}

pub fn run_preset(name: &str) -> Option<RunConfig> {
    match preset(name)? {
        Preset::Run(c) => Some(c),
        Preset::Study(_) => None,
    }
}

pub fn study_preset(name: &str) -> Option<StudyConfig> {
    match preset(name)? {
        Preset::Study(c) => Some(StudyConfig { out_dir: PathBuf::from(format!("out/{name}")), ..c }),
        Preset::Run(_) => None,
    }
}
