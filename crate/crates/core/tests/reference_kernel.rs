//! The optimized step against a straight-line reference implementation.

use elastolbm::grid::{build_lattice, BoundaryMode, Lattice, LINKS};
use elastolbm::kernel::{moments, PopulationField, Solver, Sources, NODE_LEN};
use elastolbm::Material;
use rand::{Rng, SeedableRng};

/// Per-node body loads fixed at construction.
struct FixedLoad(Vec<[f64; 2]>);

impl Sources for FixedLoad {
    fn body_load(&self, _: &Material, _: &Lattice, _: f64, out: &mut [[f64; 2]]) -> bool {
        out.copy_from_slice(&self.0);
        true
    }

    fn wall_velocity(&self, _: [f64; 2], _: f64) -> [f64; 2] {
        [0.0; 2]
    }
}

/// Collision and periodic streaming written out for an `n x n` lattice.
fn reference_step(
    m: &Material,
    n: usize,
    f: &[f64],
    body: &[[f64; 2]],
    dt: f64,
    c: f64,
    omega: f64,
) -> Vec<f64> {
    let (ck, cm) = (m.ck(), m.cmu());
    let mut out = vec![f64::NAN; f.len()];
    for y in 0..n {
        for x in 0..n {
            let node = y * n + x;
            let p = |q: usize, k: usize| f[node * 20 + q * 5 + k];
            let b = [body[node][0], body[node][1], 0.0, 0.0, 0.0];
            let mut u = [0.0; 5];
            for k in 0..5 {
                u[k] = p(0, k) + p(1, k) + p(2, k) + p(3, k) + 0.5 * dt * b[k];
            }
            let fx = [ck * u[2] + cm * u[3], cm * u[4], ck * u[0], cm * u[0], cm * u[1]];
            let fy = [cm * u[4], ck * u[2] - cm * u[3], ck * u[1], -cm * u[1], cm * u[0]];
            for (q, l) in LINKS.iter().enumerate() {
                let (i, j) = (l.i as f64, l.j as f64);
                let tx = (x as i64 + l.i as i64).rem_euclid(n as i64) as usize;
                let ty = (y as i64 + l.j as i64).rem_euclid(n as i64) as usize;
                let target = ty * n + tx;
                for k in 0..5 {
                    let feq = 0.25 * (u[k] + 2.0 / c * (i * fx[k] + j * fy[k]));
                    out[target * 20 + q * 5 + k] = omega * feq + (1.0 - omega) * p(q, k);
                }
            }
        }
    }
    out
}

fn run_case(omega: f64, with_load: bool, seed: u64) {
    let mut rng = rand::rngs::StdRng::seed_from_u64(seed);
    let n = 3;
    let lat = build_lattice([1.0, 1.0], 1.0 / 3.0, 0.125, 1.0, BoundaryMode::Periodic).unwrap();
    let m = Material::new(1.1, 0.4).unwrap();
    let values: Vec<f64> = (0..n * n * NODE_LEN).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let body: Vec<[f64; 2]> = (0..n * n)
        .map(|_| if with_load { [rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0)] } else { [0.0; 2] })
        .collect();
    let expected =
        reference_step(&m, n, &values, &body, lat.disc.dt, lat.disc.c, omega);
    let pops = PopulationField::from_values(values);
    let mut solver = Solver::new(
        lat.clone(),
        m,
        omega,
        pops,
        &vec![[0.0; 2]; n * n],
        Box::new(FixedLoad(body)),
    )
    .unwrap();
    solver.step();
    let got = &solver.populations().cur;
    for (s, (a, b)) in got.iter().zip(&expected).enumerate() {
        assert_eq!(a.to_bits(), b.to_bits(), "slot {s}: {a:e} vs {b:e}");
    }
}

#[test]
fn one_step_matches_reference_bitwise() {
    for seed in 0..20 {
        run_case(2.0, false, seed);
    }
}

#[test]
fn forced_step_matches_reference_bitwise() {
    for seed in 20..40 {
        run_case(2.0, true, seed);
    }
}

#[test]
fn underrelaxed_step_matches_reference_bitwise() {
    run_case(1.3, true, 99);
}

#[test]
fn moments_equal_brute_force_sum() {
    let mut rng = rand::rngs::StdRng::seed_from_u64(5);
    for _ in 0..1000 {
        let f: [[f64; 5]; 4] = std::array::from_fn(|_| std::array::from_fn(|_| rng.gen_range(-1e3..1e3)));
        let b: [f64; 5] = std::array::from_fn(|_| rng.gen_range(-1e3..1e3));
        let dt = rng.gen_range(1e-4..1.0);
        let got = moments(&f, &b, dt);
        for k in 0..5 {
            let mut acc = 0.0;
            for pop in &f {
                acc += pop[k];
            }
            acc += dt / 2.0 * b[k];
            assert_eq!(got[k].to_bits(), acc.to_bits());
        }
    }
}
