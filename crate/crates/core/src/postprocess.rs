//! Derived displacement and stress fields, and CSV snapshots.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::grid::Lattice;

/// Column names of a snapshot file, in order.
pub const SNAPSHOT_HEADER: [&str; 9] = ["x", "y", "u_x", "u_y", "v_x", "v_y", "sxx", "syy", "sxy"];

/// Dimensional fields at one time level, in row-major node order.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct DerivedFields {
    pub u: Vec<[f64; 2]>,
    pub v: Vec<[f64; 2]>,
    pub sigma: Vec<[f64; 3]>,
}

impl DerivedFields {
    pub fn zeros(n: usize) -> Self {
        Self { u: vec![[0.0; 2]; n], v: vec![[0.0; 2]; n], sigma: vec![[0.0; 3]; n] }
    }

    pub fn len(&self) -> usize {
        self.u.len()
    }

    pub fn is_empty(&self) -> bool {
        self.u.is_empty()
    }
}

/// Trapezoidal displacement update. Returns `u(t) = u* + dt/2 v(t)` and
/// advances the accumulator to `u(t) + dt/2 v(t)`.
#[inline]
pub fn update_displacement(u_star: &mut [f64; 2], v: [f64; 2], dt: f64) -> [f64; 2] {
    let h = 0.5 * dt;
    let u = [u_star[0] + h * v[0], u_star[1] + h * v[1]];
    *u_star = [u[0] + h * v[0], u[1] + h * v[1]];
    u
}

/// A snapshot table: one row of nine values per node.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub rows: Vec<[f64; 9]>,
}

impl Snapshot {
    pub fn from_fields(lattice: &Lattice, fields: &DerivedFields) -> Self {
        let rows = (0..fields.len())
            .map(|node| {
                let [x, y] = lattice.disc.position(node);
                let (u, v, s) = (fields.u[node], fields.v[node], fields.sigma[node]);
                [x, y, u[0], u[1], v[0], v[1], s[0], s[1], s[2]]
            })
            .collect();
        Self { rows }
    }

    /// CSV text with 17 significant digits per value.
    pub fn to_csv(&self) -> String {
        let mut out = SNAPSHOT_HEADER.join(",");
        out.push('\n');
        for row in &self.rows {
            for (k, v) in row.iter().enumerate() {
                if k > 0 {
                    out.push(',');
                }
                write!(out, "{v:.16e}").unwrap();
            }
            out.push('\n');
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let header = lines.next().ok_or_else(|| Error::Snapshot("empty file".into()))?;
        if header.split(',').ne(SNAPSHOT_HEADER) {
            return Err(Error::Snapshot(format!("unexpected header '{header}'")));
        }
        let mut rows = Vec::new();
        for (no, line) in lines.enumerate() {
            let mut row = [0.0; 9];
            let mut fields = line.split(',');
            for slot in row.iter_mut() {
                let tok = fields
                    .next()
                    .ok_or_else(|| Error::Snapshot(format!("row {}: too few columns", no + 1)))?;
                *slot = tok
                    .trim()
                    .parse()
                    .map_err(|e| Error::Snapshot(format!("row {}: {e}", no + 1)))?;
            }
            if fields.next().is_some() {
                return Err(Error::Snapshot(format!("row {}: too many columns", no + 1)));
            }
            rows.push(row);
        }
        Ok(Self { rows })
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv())?;
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }
}

/// `<run>/fields_<step>.csv`
pub fn snapshot_path(run_dir: &Path, step: u64) -> PathBuf {
    run_dir.join(format!("fields_{step}.csv"))
}
