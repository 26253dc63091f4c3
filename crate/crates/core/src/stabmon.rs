//! CFL gate, symmetrizer, weighted population norm and collision algebra checks.

use std::fmt::Write as _;

use nalgebra::{DMatrix, SymmetricEigen};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::{Lattice, LINKS, Q};
use crate::kernel::NODE_LEN;
use crate::model::{Material, Matrix5, N};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CflReport {
    pub pass: bool,
    /// `2 sqrt(cK^2 + cmu^2) / c`; the condition holds iff this is below one.
    pub margin: f64,
}

pub fn cfl_check(m: &Material, c: f64) -> CflReport {
    let margin = 2.0 * m.max_speed() / c;
    CflReport { pass: margin < 1.0, margin }
}

/// Equilibrium projector block of one link, `I/4 + (i A_x + j A_y) / (2c)`.
pub fn projector_block(m: &Material, q: usize, c: f64) -> Matrix5 {
    let (ax, ay) = m.flux_matrices();
    let l = LINKS[q];
    Matrix5::identity() * 0.25 + (ax * l.fi() + ay * l.fj()) / (2.0 * c)
}

/// Block-diagonal weight `k_q = g_q^{-1}` of the population norm.
#[derive(Debug, Clone, PartialEq)]
pub struct Symmetrizer {
    blocks: [Matrix5; Q],
    dense: [[[f64; N]; N]; Q],
}

impl Symmetrizer {
    pub fn new(m: &Material, c: f64) -> Result<Self> {
        let mut blocks = [Matrix5::zeros(); Q];
        for (q, block) in blocks.iter_mut().enumerate() {
            let g = projector_block(m, q, c);
            let k = g.try_inverse().ok_or_else(|| Error::NotPositiveDefinite {
                link: LINKS[q].to_string(),
                min_eig: 0.0,
            })?;
            let k = (k + k.transpose()) * 0.5;
            let min_eig = SymmetricEigen::new(k).eigenvalues.min();
            if !(min_eig > 0.0) {
                return Err(Error::NotPositiveDefinite { link: LINKS[q].to_string(), min_eig });
            }
            *block = k;
        }
        let dense = std::array::from_fn(|q| {
            std::array::from_fn(|r| std::array::from_fn(|s| blocks[q][(r, s)]))
        });
        Ok(Self { blocks, dense })
    }

    pub fn block(&self, q: usize) -> &Matrix5 {
        &self.blocks[q]
    }

    /// `f^T k_q f` for one population.
    #[inline]
    pub fn energy(&self, q: usize, f: &[f64]) -> f64 {
        let k = &self.dense[q];
        let mut acc = 0.0;
        for r in 0..N {
            let mut row = 0.0;
            for s in 0..N {
                row += k[r][s] * f[s];
            }
            acc += f[r] * row;
        }
        acc
    }

    /// Weighted grid norm `sqrt(sum_x sum_q f^T k_q f)`.
    ///
    /// Rows are summed independently and the row sums are added in row order,
    /// so the value does not depend on the number of worker threads.
    pub fn weighted_norm(&self, lattice: &Lattice, f: &[f64]) -> f64 {
        let row_len = lattice.nx() * NODE_LEN;
        let partial: Vec<f64> = f
            .par_chunks(row_len)
            .map(|row| {
                let mut acc = 0.0;
                for cell in row.chunks_exact(NODE_LEN) {
                    for q in 0..Q {
                        acc += self.energy(q, &cell[q * N..(q + 1) * N]);
                    }
                }
                acc
            })
            .collect();
        partial.iter().sum::<f64>().sqrt()
    }
}

/// Plain Euclidean norm of all populations, with the same reduction order as
/// [`Symmetrizer::weighted_norm`]. Used as the monitor when no symmetrizer
/// exists.
pub fn population_norm(lattice: &Lattice, f: &[f64]) -> f64 {
    let row_len = lattice.nx() * NODE_LEN;
    let partial: Vec<f64> =
        f.par_chunks(row_len).map(|row| row.iter().map(|v| v * v).sum::<f64>()).collect();
    partial.iter().sum::<f64>().sqrt()
}

/// Residuals of the collision algebra on the assembled single-node matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct AlgebraReport {
    /// `max |G^2 - G|`
    pub idempotency: f64,
    /// Largest distance of an eigenvalue of `G` from `{0, 1}`.
    pub projector_spectrum: f64,
    /// `max |KJ - (KJ)^T|`
    pub kj_asymmetry: f64,
    /// Largest distance of an eigenvalue of `-J` from `{0, omega}`.
    pub relaxation_spectrum: f64,
}

pub const IDEMPOTENCY_TOL: f64 = 1e-12;
pub const SPECTRUM_TOL: f64 = 1e-10;
pub const SYMMETRY_TOL: f64 = 1e-12;

impl AlgebraReport {
    pub fn passes(&self) -> bool {
        self.idempotency <= IDEMPOTENCY_TOL
            && self.projector_spectrum <= SPECTRUM_TOL
            && self.kj_asymmetry <= SYMMETRY_TOL
            && self.relaxation_spectrum <= SPECTRUM_TOL
    }
}

/// Equilibrium map `G` (`f_eq = G f` with no load) and the block-diagonal
/// symmetrizer `K`, both 20 x 20.
pub fn assemble(m: &Material, c: f64) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    let sym = Symmetrizer::new(m, c)?;
    let n = Q * N;
    let mut g = DMatrix::zeros(n, n);
    let mut k = DMatrix::zeros(n, n);
    for q in 0..Q {
        let gq = projector_block(m, q, c);
        for p in 0..Q {
            g.view_mut((q * N, p * N), (N, N)).copy_from(&gq);
        }
        k.view_mut((q * N, q * N), (N, N)).copy_from(sym.block(q));
    }
    Ok((g, k))
}

/// Bound on the distance of every eigenvalue of `a` from `targets`.
///
/// `a` is brought to `s + e` with `s` symmetric by the similarity
/// `K^(1/2) a K^(-1/2)`. Every eigenvalue of `a` then lies within `|e|_F` of
/// an eigenvalue of `s` (Bauer-Fike), so the returned value is a rigorous
/// upper bound whether or not `K a` is exactly symmetric.
fn spectrum_distance(a: &DMatrix<f64>, k: &DMatrix<f64>, targets: &[f64]) -> f64 {
    let eig = SymmetricEigen::new(k.clone());
    let sqrt = eig.eigenvalues.map(f64::sqrt);
    let root = &eig.eigenvectors * DMatrix::from_diagonal(&sqrt) * eig.eigenvectors.transpose();
    let inv_root = &eig.eigenvectors
        * DMatrix::from_diagonal(&sqrt.map(|v| 1.0 / v))
        * eig.eigenvectors.transpose();
    let sim = &root * a * &inv_root;
    let s = (&sim + sim.transpose()) * 0.5;
    let e = (&sim - sim.transpose()) * 0.5;
    let spread = SymmetricEigen::new(s)
        .eigenvalues
        .iter()
        .map(|&z| targets.iter().map(|&t| (z - t).abs()).fold(f64::INFINITY, f64::min))
        .fold(0.0, f64::max);
    spread + e.norm()
}

/// Verifies the pre-stability structure of the collision for one material.
pub fn algebra_checks(m: &Material, c: f64, omega: f64) -> Result<AlgebraReport> {
    crate::kernel::check_omega(omega)?;
    let cfl = cfl_check(m, c);
    if !cfl.pass {
        return Err(Error::Cfl { margin: cfl.margin });
    }
    let (g, k) = assemble(m, c)?;
    let id = DMatrix::<f64>::identity(Q * N, Q * N);
    let j = (&g - &id) * omega;
    let kj = &k * &j;
    let report = AlgebraReport {
        idempotency: (&g * &g - &g).amax(),
        projector_spectrum: spectrum_distance(&g, &k, &[0.0, 1.0]),
        kj_asymmetry: (&kj - kj.transpose()).amax(),
        relaxation_spectrum: spectrum_distance(&(-j), &k, &[0.0, omega]),
    };
    if report.passes() {
        Ok(report)
    } else {
        Err(Error::Algebra(format!("{report:?}")))
    }
}

/// Recorded norm history of a run.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct NormTrace {
    pub rows: Vec<NormSample>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormSample {
    pub step: u64,
    pub time: f64,
    pub norm: f64,
}

impl NormTrace {
    pub fn push(&mut self, step: u64, time: f64, norm: f64) {
        self.rows.push(NormSample { step, time, norm });
    }

    pub fn initial(&self) -> Option<f64> {
        self.rows.first().map(|r| r.norm)
    }

    /// `|norm - norm_0| / norm_0` of a sample.
    pub fn drift(&self, sample: &NormSample) -> f64 {
        match self.initial() {
            Some(n0) if n0 > 0.0 => (sample.norm - n0).abs() / n0,
            _ => 0.0,
        }
    }

    pub fn max_drift(&self) -> f64 {
        self.rows.iter().map(|r| self.drift(r)).fold(0.0, f64::max)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("step,time,norm,relative_drift\n");
        for r in &self.rows {
            writeln!(out, "{},{:.16e},{:.16e},{:.16e}", r.step, r.time, r.norm, self.drift(r))
                .unwrap();
        }
        out
    }
}
