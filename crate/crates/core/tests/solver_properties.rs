//! Whole-solver properties: read-only monitoring, worker independence,
//! boundary artifacts, time integration.

use elastolbm::grid::{build_lattice, BoundaryMode};
use elastolbm::kernel::{stream, PopulationField, NODE_LEN};
use elastolbm::mms::case_wave52;
use elastolbm::postprocess::{update_displacement, DerivedFields, Snapshot};
use elastolbm::stabmon::{population_norm, Symmetrizer};
use elastolbm::verify::{execute, exact_fields, observed_order, InitKind, Monitors, RunOutcome, RunSpec};
use elastolbm::{boundary, Material, Solver};
use proptest::prelude::*;

fn wave(mode: BoundaryMode, n: f64, t_final: f64) -> RunSpec {
    RunSpec {
        case: case_wave52(),
        mode,
        material: Material::new(1.1, 0.4).unwrap(),
        dx: 1.0 / n,
        dt: 1.0 / (2.5 * n),
        t_final,
        omega: 2.0,
        cfl_override: false,
        init: InitKind::Corrected,
    }
}

fn bits(f: &DerivedFields) -> Vec<u64> {
    f.u.iter()
        .flatten()
        .chain(f.v.iter().flatten())
        .chain(f.sigma.iter().flatten())
        .map(|v| v.to_bits())
        .collect()
}

#[test]
fn monitoring_does_not_touch_the_state() {
    for mode in [BoundaryMode::Periodic, BoundaryMode::Dirichlet] {
        let spec = wave(mode, 40.0, 0.5);
        let quiet = Monitors { error_stride: 0, norm_stride: 0, trace_stride: 0, snapshot_stride: 0 };
        let busy = Monitors { error_stride: 1, norm_stride: 1, trace_stride: 1, snapshot_stride: 7 };
        let a = execute(&spec, quiet, |_, _, _| Ok(())).unwrap();
        let mut snaps = 0;
        let b = execute(&spec, busy, |_, _, _| {
            snaps += 1;
            Ok(())
        })
        .unwrap();
        assert!(snaps > 1);
        assert_eq!(bits(a.final_fields.as_ref().unwrap()), bits(b.final_fields.as_ref().unwrap()));
    }
}

#[test]
fn observing_between_steps_is_read_only() {
    let lat = build_lattice([1.0, 1.0], 1.0 / 30.0, 1.0 / 75.0, 1.0, BoundaryMode::Dirichlet).unwrap();
    let m = Material::new(0.75, 0.75).unwrap();
    let mut a = Solver::from_case(lat.clone(), m.clone(), 2.0, &case_wave52()).unwrap();
    let mut b = Solver::from_case(lat.clone(), m.clone(), 2.0, &case_wave52()).unwrap();
    let k = Symmetrizer::new(&m, lat.disc.c).unwrap();
    for _ in 0..50 {
        a.step();
        b.observe();
        k.weighted_norm(&lat, &b.populations().cur);
        b.step();
        b.observe();
    }
    assert_eq!(a.populations(), b.populations());
    assert_eq!(bits(&a.observe()), bits(&b.observe()));
}

fn in_pool(threads: usize, spec: &RunSpec) -> RunOutcome {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
    pool.install(|| execute(spec, Monitors::default(), |_, _, _| Ok(())).unwrap())
}

#[test]
fn results_do_not_depend_on_worker_count() {
    for mode in [BoundaryMode::Periodic, BoundaryMode::Dirichlet] {
        let spec = wave(mode, 40.0, 0.25);
        let one = in_pool(1, &spec);
        let four = in_pool(4, &spec);
        assert_eq!(one.norm_trace.to_csv(), four.norm_trace.to_csv());
        assert_eq!(bits(one.final_fields.as_ref().unwrap()), bits(four.final_fields.as_ref().unwrap()));
        assert_eq!(one.errors, four.errors);
        let lat = spec.lattice().unwrap();
        let a = Snapshot::from_fields(&lat, one.final_fields.as_ref().unwrap()).to_csv();
        let b = Snapshot::from_fields(&lat, four.final_fields.as_ref().unwrap()).to_csv();
        assert_eq!(a, b);
    }
}

#[test]
fn norm_reductions_match_sequential_sums() {
    let spec = wave(BoundaryMode::Dirichlet, 20.0, 0.1);
    let lat = spec.lattice().unwrap();
    let solver = Solver::from_case(lat.clone(), spec.material.clone(), 2.0, &spec.case).unwrap();
    let f = &solver.populations().cur;
    let k = Symmetrizer::new(&spec.material, lat.disc.c).unwrap();
    let mut seq = 0.0;
    let mut plain = 0.0;
    // reverse node order, one running sum
    for cell in f.chunks_exact(NODE_LEN).rev() {
        for q in 0..4 {
            seq += k.energy(q, &cell[q * 5..(q + 1) * 5]);
        }
        plain += cell.iter().map(|v| v * v).sum::<f64>();
    }
    let w = k.weighted_norm(&lat, f);
    assert!((w - seq.sqrt()).abs() <= 1e-14 * w);
    let p = population_norm(&lat, f);
    assert!((p - plain.sqrt()).abs() <= 1e-14 * p);
}

/// The periodic seam is invisible: errors on the edge rows and columns look
/// like errors anywhere else.
#[test]
fn periodic_edges_show_no_artifact() {
    let spec = wave(BoundaryMode::Periodic, 80.0, 1.0);
    let out = execute(&spec, Monitors { error_stride: 0, norm_stride: 0, ..Monitors::default() }, |_, _, _| Ok(()))
        .unwrap();
    let lat = spec.lattice().unwrap();
    let num = out.final_fields.unwrap();
    let ex = exact_fields(&spec.case, &spec.material, &lat, lat.disc.time(out.steps));
    let (nx, ny) = (lat.nx(), lat.ny());
    let (mut edge, mut ne, mut inner, mut ni) = (0.0, 0, 0.0, 0);
    for node in 0..lat.n_nodes() {
        let (ix, iy) = (node % nx, node / nx);
        let e: f64 = (0..2).map(|k| (num.u[node][k] - ex.u[node][k]).powi(2)).sum::<f64>()
            + (0..3).map(|k| (num.sigma[node][k] - ex.sigma[node][k]).powi(2)).sum::<f64>();
        if ix == 0 || iy == 0 || ix == nx - 1 || iy == ny - 1 {
            edge += e;
            ne += 1;
        } else {
            inner += e;
            ni += 1;
        }
    }
    let ratio = ((edge / ne as f64) / (inner / ni as f64)).sqrt();
    assert!((0.5..=2.0).contains(&ratio), "edge/interior error ratio {ratio}");
}

/// Trapezoidal displacement from the exact velocity alone, no lattice
/// Boltzmann step involved.
#[test]
fn trapezoid_integration_is_second_order() {
    let case = case_wave52();
    let pts = [[0.13, 0.71], [0.5, 0.5], [0.91, 0.27], [0.333, 0.05]];
    let error = |steps: u32| {
        let dt = 1.0 / f64::from(steps);
        let mut worst = 0.0f64;
        for &[x, y] in &pts {
            let v = |t: f64| case.jet(x, y, t).velocity();
            let u0 = case.displacement(x, y, 0.0);
            let v0 = v(0.0);
            let mut us = [u0[0] - 0.5 * dt * v0[0], u0[1] - 0.5 * dt * v0[1]];
            let mut u = u0;
            for m in 0..=steps {
                u = update_displacement(&mut us, v(f64::from(m) * dt), dt);
            }
            let ex = case.displacement(x, y, 1.0);
            worst = worst.max((u[0] - ex[0]).abs()).max((u[1] - ex[1]).abs());
        }
        worst
    };
    let (e1, e2, e3) = (error(100), error(200), error(400));
    assert!(observed_order(e1, e2, 2.0, 1.0) >= 1.9);
    assert!(observed_order(e2, e3, 2.0, 1.0) >= 1.9);
}

proptest! {
    #[test]
    fn trapezoid_is_exact_for_linear_velocity(
        u0 in prop::array::uniform2(-5.0f64..5.0),
        a in prop::array::uniform2(-5.0f64..5.0),
        b in prop::array::uniform2(-5.0f64..5.0),
        steps in 1u32..200,
    ) {
        let dt = 1.0 / f64::from(steps);
        let v = |t: f64| [a[0] + b[0] * t, a[1] + b[1] * t];
        let v0 = v(0.0);
        let mut us = [u0[0] - 0.5 * dt * v0[0], u0[1] - 0.5 * dt * v0[1]];
        for m in 0..=steps {
            let t = f64::from(m) * dt;
            let u = update_displacement(&mut us, v(t), dt);
            for k in 0..2 {
                let exact = u0[k] + a[k] * t + 0.5 * b[k] * t * t;
                prop_assert!((u[k] - exact).abs() <= 1e-12 * (1.0 + exact.abs()) * 10.0);
            }
        }
    }

    #[test]
    fn periodic_streaming_is_a_permutation(nx in 2usize..9, ny in 2usize..9, seed in 0u64..1000) {
        let lat = build_lattice([nx as f64, ny as f64], 1.0, 0.25, 1.0, BoundaryMode::Periodic).unwrap();
        let values: Vec<f64> = (0..lat.n_nodes() * NODE_LEN)
            .map(|i| ((i as u64 * 2654435761 + seed) % 1_000_003) as f64)
            .collect();
        let mut next = vec![f64::NAN; values.len()];
        stream(&lat, &values, &mut next);
        boundary::apply_periodic(&lat, &values, &mut next).unwrap();
        let mut a = values.clone();
        let mut b = next.clone();
        a.sort_by(f64::total_cmp);
        b.sort_by(f64::total_cmp);
        prop_assert_eq!(a, b);
        // every population moved exactly one link
        let field = PopulationField::from_values(next);
        for node in 0..lat.n_nodes() {
            for q in 0..4 {
                let src = lat.wrapped_source(node, q);
                prop_assert_eq!(field.population(node, q)[0], values[src * NODE_LEN + q * 5]);
            }
        }
    }
}
