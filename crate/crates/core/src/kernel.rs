//! Populations, local collision algebra, streaming and the time loop.
//!
//! Each node stores its four vector populations contiguously, link-major:
//! value `k` of population `q` at `node` lives at `node * 20 + q * 5 + k`.
//!
//! One step runs collision over all nodes in place, then gathers the
//! post-collision values into the second buffer and closes the boundary
//! slots. Both phases are node-local, so rows are distributed over the
//! current rayon pool without changing a single bit of the result.

use rayon::prelude::*;

use crate::boundary;
use crate::error::{Error, Result};
use crate::grid::{BoundaryMode, Lattice, Link, LINKS, Q};
use crate::mms::{InitialData, ManufacturedCase};
use crate::model::{Material, State, N};
use crate::postprocess::{update_displacement, DerivedFields};
use crate::stabmon::cfl_check;

/// Scalars stored per node.
pub const NODE_LEN: usize = Q * N;

#[inline]
pub fn slot(node: usize, q: usize) -> usize {
    node * NODE_LEN + q * N
}

/// Double-buffered population storage.
#[derive(Debug, Clone, PartialEq)]
pub struct PopulationField {
    pub cur: Vec<f64>,
    next: Vec<f64>,
}

impl PopulationField {
    pub fn zeros(n_nodes: usize) -> Self {
        Self { cur: vec![0.0; n_nodes * NODE_LEN], next: vec![0.0; n_nodes * NODE_LEN] }
    }

    pub fn from_values(values: Vec<f64>) -> Self {
        assert_eq!(values.len() % NODE_LEN, 0);
        let next = vec![0.0; values.len()];
        Self { cur: values, next }
    }

    pub fn n_nodes(&self) -> usize {
        self.cur.len() / NODE_LEN
    }

    pub fn node(&self, node: usize) -> [State; Q] {
        let base = node * NODE_LEN;
        std::array::from_fn(|q| std::array::from_fn(|k| self.cur[base + q * N + k]))
    }

    pub fn set_node(&mut self, node: usize, f: &[State; Q]) {
        let base = node * NODE_LEN;
        for q in 0..Q {
            self.cur[base + q * N..base + (q + 1) * N].copy_from_slice(&f[q]);
        }
    }

    pub fn population(&self, node: usize, q: usize) -> State {
        let s = slot(node, q);
        std::array::from_fn(|k| self.cur[s + k])
    }

    pub fn swap(&mut self) {
        std::mem::swap(&mut self.cur, &mut self.next);
    }
}

/// Zeroth moment plus the half-step load shift, `sum_q f_q + dt/2 B`.
#[inline]
pub fn moments(f: &[State; Q], body: &State, dt: f64) -> State {
    let h = 0.5 * dt;
    std::array::from_fn(|k| f[0][k] + f[1][k] + f[2][k] + f[3][k] + h * body[k])
}

/// Equilibrium population of `link` for state `u`.
#[inline]
pub fn equilibrium(m: &Material, u: &State, link: Link, c: f64) -> State {
    let fx = m.flux_x(u);
    let fy = m.flux_y(u);
    equilibrium_from_fluxes(u, &fx, &fy, link, 2.0 / c)
}

#[inline]
fn equilibrium_from_fluxes(u: &State, fx: &State, fy: &State, link: Link, two_c: f64) -> State {
    let (i, j) = (link.fi(), link.fj());
    std::array::from_fn(|k| 0.25 * (u[k] + two_c * (i * fx[k] + j * fy[k])))
}

/// All four equilibria, bit-identical to calling [`equilibrium`] per link.
#[inline]
pub fn equilibria(m: &Material, u: &State, c: f64) -> [State; Q] {
    let fx = m.flux_x(u);
    let fy = m.flux_y(u);
    let two_c = 2.0 / c;
    std::array::from_fn(|q| equilibrium_from_fluxes(u, &fx, &fy, LINKS[q], two_c))
}

/// BGK relaxation of the node populations towards the equilibria of `u`.
///
/// The forcing-weight term vanishes at `omega = 2` and is not modelled.
#[inline]
pub fn collide(m: &Material, f: &[State; Q], u: &State, omega: f64, c: f64) -> [State; Q] {
    let feq = equilibria(m, u, c);
    std::array::from_fn(|q| std::array::from_fn(|k| omega * feq[q][k] + (1.0 - omega) * f[q][k]))
}

pub fn check_omega(omega: f64) -> Result<()> {
    if omega > 0.0 && omega <= 2.0 {
        Ok(())
    } else {
        Err(Error::Omega(omega))
    }
}

/// Interior streaming of `post` into `next` for every link whose source
/// node exists. Slots fed from outside the index range are left untouched.
pub fn stream(lattice: &Lattice, post: &[f64], next: &mut [f64]) {
    let nx = lattice.nx();
    let ny = lattice.ny();
    next.par_chunks_mut(nx * NODE_LEN)
        .enumerate()
        .for_each(|(iy, row)| stream_row(nx, ny, iy, post, row));
}

#[inline]
fn stream_row(nx: usize, ny: usize, iy: usize, post: &[f64], row: &mut [f64]) {
    let row_base = iy * nx;
    for ix in 0..nx {
        let dst = ix * NODE_LEN;
        let node = row_base + ix;
        // east-moving population arrives from the west neighbour, and so on
        if ix > 0 {
            copy_pop(post, slot(node - 1, 0), &mut row[dst..dst + N]);
        }
        if iy > 0 {
            copy_pop(post, slot(node - nx, 1), &mut row[dst + N..dst + 2 * N]);
        }
        if ix + 1 < nx {
            copy_pop(post, slot(node + 1, 2), &mut row[dst + 2 * N..dst + 3 * N]);
        }
        if iy + 1 < ny {
            copy_pop(post, slot(node + nx, 3), &mut row[dst + 3 * N..dst + 4 * N]);
        }
    }
}

#[inline]
fn copy_pop(src: &[f64], at: usize, dst: &mut [f64]) {
    dst.copy_from_slice(&src[at..at + N]);
}

/// Supplier of body loads and wall velocities.
pub trait Sources: Send + Sync {
    /// Writes the body load at every node for time `t`. Returns `false` if
    /// the load is identically zero (and `out` was left untouched).
    fn body_load(&self, m: &Material, lattice: &Lattice, t: f64, out: &mut [[f64; 2]]) -> bool;

    /// Time derivative of the wall displacement at a wall point.
    fn wall_velocity(&self, point: [f64; 2], t: f64) -> [f64; 2];
}

/// Unforced problem with homogeneous walls.
#[derive(Debug, Clone, Copy, Default)]
pub struct NoSources;

impl Sources for NoSources {
    fn body_load(&self, _: &Material, _: &Lattice, _: f64, _: &mut [[f64; 2]]) -> bool {
        false
    }

    fn wall_velocity(&self, _: [f64; 2], _: f64) -> [f64; 2] {
        [0.0; 2]
    }
}

impl Sources for ManufacturedCase {
    fn body_load(&self, m: &Material, lattice: &Lattice, t: f64, out: &mut [[f64; 2]]) -> bool {
        if !self.exact {
            return false;
        }
        let table = self.body_load_table(m, lattice, t);
        out.par_chunks_mut(lattice.nx()).enumerate().for_each(|(iy, row)| {
            let base = iy * lattice.nx();
            for (ix, b) in row.iter_mut().enumerate() {
                *b = table.at(base + ix);
            }
        });
        true
    }

    fn wall_velocity(&self, point: [f64; 2], t: f64) -> [f64; 2] {
        ManufacturedCase::wall_velocity(self, point[0], point[1], t)
    }
}

/// Time-stepping state of one simulation.
pub struct Solver {
    lattice: Lattice,
    material: Material,
    omega: f64,
    pops: PopulationField,
    /// Trapezoidal displacement accumulator (dimensionless).
    u_star: Vec<[f64; 2]>,
    body: Vec<[f64; 2]>,
    /// Step index the cached body load belongs to, and whether it is nonzero.
    body_at: Option<(u64, bool)>,
    sources: Box<dyn Sources>,
    step: u64,
    cfl_violated: bool,
}

impl std::fmt::Debug for Solver {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Solver")
            .field("mode", &self.lattice.mode)
            .field("nx", &self.lattice.nx())
            .field("ny", &self.lattice.ny())
            .field("omega", &self.omega)
            .field("step", &self.step)
            .finish()
    }
}

impl Solver {
    /// Wraps an initialized population field. The displacement accumulator is
    /// primed so that the first reconstructed displacement equals `u0`.
    pub fn new(
        lattice: Lattice,
        material: Material,
        omega: f64,
        pops: PopulationField,
        u0: &[[f64; 2]],
        sources: Box<dyn Sources>,
    ) -> Result<Self> {
        check_omega(omega)?;
        if omega != 2.0 {
            log::warn!(
                "omega = {omega}: the scheme is only first-order consistent away from omega = 2"
            );
        }
        let n = lattice.n_nodes();
        if pops.n_nodes() != n || u0.len() != n {
            return Err(Error::Discretization("field sizes do not match the lattice".into()));
        }
        if lattice.mode == BoundaryMode::Dirichlet {
            boundary::check_halfway(&lattice)?;
        }
        let cfl = cfl_check(&material, lattice.disc.c);
        if !cfl.pass {
            log::warn!("CFL condition violated (margin {:.4}); the run may diverge", cfl.margin);
        }
        let mut solver = Self {
            u_star: vec![[0.0; 2]; n],
            body: vec![[0.0; 2]; n],
            body_at: None,
            lattice,
            material,
            omega,
            pops,
            sources,
            step: 0,
            cfl_violated: !cfl.pass,
        };
        solver.refresh_body_load();
        let half = 0.5 * solver.lattice.disc.dt;
        for node in 0..n {
            let v = solver.velocity_at(node);
            solver.u_star[node] = [u0[node][0] - half * v[0], u0[node][1] - half * v[1]];
        }
        Ok(solver)
    }

    /// Solver initialized from a manufactured case with the second-order
    /// population initialization.
    pub fn from_case(
        lattice: Lattice,
        material: Material,
        omega: f64,
        case: &ManufacturedCase,
    ) -> Result<Self> {
        let data = case.initial_data(&material, &lattice);
        let pops =
            crate::initcond::init_populations(&material, &data, lattice.disc.c, lattice.disc.dt)?;
        Self::with_initial_data(lattice, material, omega, pops, &data, case)
    }

    #[doc(hidden)]
    pub fn from_case_uncorrected(
        lattice: Lattice,
        material: Material,
        omega: f64,
        case: &ManufacturedCase,
    ) -> Result<Self> {
        let data = case.initial_data(&material, &lattice);
        let pops = crate::initcond::init_populations_uncorrected(
            &material,
            &data,
            lattice.disc.c,
            lattice.disc.dt,
        )?;
        Self::with_initial_data(lattice, material, omega, pops, &data, case)
    }

    fn with_initial_data(
        lattice: Lattice,
        material: Material,
        omega: f64,
        pops: PopulationField,
        data: &InitialData,
        case: &ManufacturedCase,
    ) -> Result<Self> {
        Self::new(lattice, material, omega, pops, &data.u0, Box::new(case.clone()))
    }

    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    pub fn material(&self) -> &Material {
        &self.material
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn populations(&self) -> &PopulationField {
        &self.pops
    }

    pub fn step_index(&self) -> u64 {
        self.step
    }

    pub fn time(&self) -> f64 {
        self.lattice.disc.time(self.step)
    }

    pub fn cfl_violated(&self) -> bool {
        self.cfl_violated
    }

    fn refresh_body_load(&mut self) {
        if matches!(self.body_at, Some((s, _)) if s == self.step) {
            return;
        }
        let t = self.time();
        let nonzero = self.sources.body_load(&self.material, &self.lattice, t, &mut self.body);
        self.body_at = Some((self.step, nonzero));
    }

    fn forced(&self) -> bool {
        matches!(self.body_at, Some((_, true)))
    }

    #[inline]
    fn body_state(&self, node: usize) -> State {
        if self.forced() {
            crate::mms::load_state(self.body[node])
        } else {
            [0.0; N]
        }
    }

    fn velocity_at(&self, node: usize) -> [f64; 2] {
        let u = moments(&self.pops.node(node), &self.body_state(node), self.lattice.disc.dt);
        [u[0], u[1]]
    }

    /// Advances one time step.
    pub fn step(&mut self) {
        self.refresh_body_load();
        let dt = self.lattice.disc.dt;
        let c = self.lattice.disc.c;
        let omega = self.omega;
        let nx = self.lattice.nx();
        let forced = self.forced();
        let m = &self.material;
        let body = &self.body;

        // collision, in place, plus the displacement bookkeeping
        self.pops
            .cur
            .par_chunks_mut(nx * NODE_LEN)
            .zip(self.u_star.par_chunks_mut(nx))
            .enumerate()
            .for_each(|(iy, (row, ustar))| {
                for ix in 0..nx {
                    let node = iy * nx + ix;
                    let cell = &mut row[ix * NODE_LEN..(ix + 1) * NODE_LEN];
                    let f: [State; Q] =
                        std::array::from_fn(|q| std::array::from_fn(|k| cell[q * N + k]));
                    let b = if forced { crate::mms::load_state(body[node]) } else { [0.0; N] };
                    let u = moments(&f, &b, dt);
                    update_displacement(&mut ustar[ix], [u[0], u[1]], dt);
                    let post = collide(m, &f, &u, omega, c);
                    for q in 0..Q {
                        cell[q * N..(q + 1) * N].copy_from_slice(&post[q]);
                    }
                }
            });

        let (post, next) = (&self.pops.cur, &mut self.pops.next);
        stream(&self.lattice, post, next);
        match self.lattice.mode {
            BoundaryMode::Periodic => boundary::apply_periodic(&self.lattice, post, next),
            BoundaryMode::Dirichlet => {
                let t_half = (self.step as f64 + 0.5) * dt;
                boundary::apply_dirichlet(&self.lattice, m, post, next, &*self.sources, t_half)
            }
        }
        .expect("lattice mode and wall distances are checked at construction");
        self.pops.swap();
        self.step += 1;
    }

    /// Displacement, velocity and stress at the current time level.
    pub fn observe(&mut self) -> DerivedFields {
        self.refresh_body_load();
        let n = self.lattice.n_nodes();
        let dt = self.lattice.disc.dt;
        let half = 0.5 * dt;
        let m = &self.material;
        let vscale = m.velocity;
        let uscale = m.velocity * m.time;
        let mut out = DerivedFields::zeros(n);
        for node in 0..n {
            let u = moments(&self.pops.node(node), &self.body_state(node), dt);
            let us = self.u_star[node];
            let u_num = [us[0] + half * u[0], us[1] + half * u[1]];
            out.u[node] = [uscale * u_num[0], uscale * u_num[1]];
            out.v[node] = [vscale * u[0], vscale * u[1]];
            out.sigma[node] = m.stress_from_state(&u);
        }
        out
    }

    /// `true` if every stored population is finite.
    pub fn is_finite(&self) -> bool {
        self.pops.cur.iter().all(|v| v.is_finite())
    }
}
