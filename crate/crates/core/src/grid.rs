//! Rectangular lattice topology: node numbering, the D2Q4 velocity set,
//! boundary-node classification and the half-way wall geometry.
//!
//! Nodes are numbered row-major with `x` running fastest, so node
//! `(ix, iy)` has index `iy * nx + ix`.

use crate::error::{Error, Result};

/// Relative tolerance used when checking that extents are integer multiples
/// of the grid spacing.
pub const DIVISIBILITY_TOL: f64 = 1e-12;

/// One lattice direction `(i, j)` of the velocity set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Link {
    pub i: i32,
    pub j: i32,
}

impl Link {
    pub const fn new(i: i32, j: i32) -> Self {
        Self { i, j }
    }

    pub fn fi(self) -> f64 {
        f64::from(self.i)
    }

    pub fn fj(self) -> f64 {
        f64::from(self.j)
    }

    pub fn reversed(self) -> Self {
        Self::new(-self.i, -self.j)
    }
}

impl std::fmt::Display for Link {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({},{})", self.i, self.j)
    }
}

/// Number of populations per node.
pub const Q: usize = 4;

/// The D2Q4 index set in storage order: east, north, west, south.
pub const LINKS: [Link; Q] = [
    Link::new(1, 0),
    Link::new(0, 1),
    Link::new(-1, 0),
    Link::new(0, -1),
];

/// Storage position of the reversed link.
#[inline]
pub const fn opposite(q: usize) -> usize {
    (q + 2) % Q
}

/// Storage position of a link, if it belongs to the velocity set.
pub fn link_index(link: Link) -> Option<usize> {
    LINKS.iter().position(|&l| l == link)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BoundaryMode {
    Periodic,
    Dirichlet,
}

impl BoundaryMode {
    pub fn as_str(self) -> &'static str {
        match self {
            BoundaryMode::Periodic => "periodic",
            BoundaryMode::Dirichlet => "dirichlet",
        }
    }
}

impl std::str::FromStr for BoundaryMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "periodic" => Ok(BoundaryMode::Periodic),
            "dirichlet" => Ok(BoundaryMode::Dirichlet),
            other => Err(Error::Discretization(format!("unknown boundary mode '{other}'"))),
        }
    }
}

impl std::fmt::Display for BoundaryMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Space-time discretization in dimensionless units.
#[derive(Debug, Clone, PartialEq)]
pub struct Discretization {
    pub dx: f64,
    pub dt: f64,
    /// Lattice speed `dx / dt`.
    pub c: f64,
    pub nx: usize,
    pub ny: usize,
    /// Position of node `(0, 0)`.
    pub x0: [f64; 2],
    pub extent: [f64; 2],
    pub t_final: f64,
}

impl Discretization {
    pub fn n_nodes(&self) -> usize {
        self.nx * self.ny
    }

    /// Number of time steps needed to reach `t_final`.
    pub fn n_steps(&self) -> u64 {
        (self.t_final / self.dt).round() as u64
    }

    /// Time of step index `m`, computed from the index to avoid drift.
    #[inline]
    pub fn time(&self, m: u64) -> f64 {
        m as f64 * self.dt
    }

    #[inline]
    pub fn x(&self, ix: usize) -> f64 {
        self.x0[0] + ix as f64 * self.dx
    }

    #[inline]
    pub fn y(&self, iy: usize) -> f64 {
        self.x0[1] + iy as f64 * self.dx
    }

    #[inline]
    pub fn position(&self, node: usize) -> [f64; 2] {
        [self.x(node % self.nx), self.y(node / self.nx)]
    }
}

/// A missing incoming population at a boundary node together with the
/// point where its lattice link crosses the wall.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryLink {
    pub node: usize,
    /// Storage index of the missing incoming link (an element of `D_x`).
    pub link: usize,
    pub wall_point: [f64; 2],
    /// Normalized wall distance `|x - x_b| / |c_ij dt|`.
    pub q: f64,
}

/// Incoming slot on a periodic lattice that is fed across the domain edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WrapLink {
    pub node: usize,
    pub link: usize,
    pub source: usize,
}

#[derive(Debug, Clone)]
pub struct Lattice {
    pub disc: Discretization,
    pub mode: BoundaryMode,
    /// Bitmask of missing incoming links per node (bit `q` set iff `LINKS[q]`
    /// is in `D_x`). Always zero on periodic lattices.
    missing: Vec<u8>,
    boundary_links: Vec<BoundaryLink>,
    wrap_links: Vec<WrapLink>,
}

fn count_cells(extent: f64, dx: f64, axis: &str) -> Result<usize> {
    if !(extent > 0.0) || !extent.is_finite() {
        return Err(Error::Discretization(format!("{axis} extent must be positive, got {extent}")));
    }
    let ratio = extent / dx;
    let n = ratio.round();
    if (ratio - n).abs() > DIVISIBILITY_TOL * n.max(1.0) {
        return Err(Error::Discretization(format!(
            "{axis} extent {extent} is not a multiple of dx = {dx}"
        )));
    }
    if n < 2.0 {
        return Err(Error::Discretization(format!("{axis} needs at least 2 nodes, got {n}")));
    }
    Ok(n as usize)
}

/// Builds the lattice on `(0, extent[0]) x (0, extent[1])`.
///
/// Periodic lattices start at the origin. Dirichlet lattices are offset by
/// half a spacing so every wall sits exactly halfway along the cut links.
pub fn build_lattice(
    extent: [f64; 2],
    dx: f64,
    dt: f64,
    t_final: f64,
    mode: BoundaryMode,
) -> Result<Lattice> {
    if !(dx > 0.0) || !dx.is_finite() {
        return Err(Error::Discretization(format!("dx must be positive, got {dx}")));
    }
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::Discretization(format!("dt must be positive, got {dt}")));
    }
    if !(t_final > 0.0) || !t_final.is_finite() {
        return Err(Error::Discretization(format!("t_final must be positive, got {t_final}")));
    }
    let steps = t_final / dt;
    if (steps - steps.round()).abs() > 1e-9 * steps.round().max(1.0) {
        return Err(Error::Discretization(format!(
            "t_final = {t_final} is not a multiple of dt = {dt}"
        )));
    }
    let nx = count_cells(extent[0], dx, "x")?;
    let ny = count_cells(extent[1], dx, "y")?;
    let c = dx / dt;
    debug_assert!(((c * dt - dx) / dx).abs() < 1e-15);

    let x0 = match mode {
        BoundaryMode::Periodic => [0.0, 0.0],
        BoundaryMode::Dirichlet => [0.5 * dx, 0.5 * dx],
    };
    let disc = Discretization { dx, dt, c, nx, ny, x0, extent, t_final };

    let mut lattice = Lattice {
        disc,
        mode,
        missing: vec![0; nx * ny],
        boundary_links: Vec::new(),
        wrap_links: Vec::new(),
    };

    for node in 0..nx * ny {
        for q in 0..Q {
            if lattice.source(node, q).is_some() {
                continue;
            }
            match mode {
                BoundaryMode::Periodic => {
                    let source = lattice.wrapped_source(node, q);
                    lattice.wrap_links.push(WrapLink { node, link: q, source });
                }
                BoundaryMode::Dirichlet => {
                    lattice.missing[node] |= 1 << q;
                    let l = LINKS[q];
                    let [x, y] = lattice.disc.position(node);
                    let half = 0.5 * dx;
                    let wall_point = [x - l.fi() * half, y - l.fj() * half];
                    let q_dist = half / dx;
                    lattice.boundary_links.push(BoundaryLink {
                        node,
                        link: q,
                        wall_point,
                        q: q_dist,
                    });
                }
            }
        }
    }

    if lattice.boundary_links.iter().any(|b| b.q != 0.5) {
        return Err(Error::Discretization("boundary link with q != 1/2".into()));
    }
    Ok(lattice)
}

impl Lattice {
    pub fn n_nodes(&self) -> usize {
        self.disc.n_nodes()
    }

    #[inline]
    pub fn nx(&self) -> usize {
        self.disc.nx
    }

    #[inline]
    pub fn ny(&self) -> usize {
        self.disc.ny
    }

    /// Node that streams into `node` along link `q`, i.e. `x - c_q dt`,
    /// or `None` if it lies outside the index range (no wrap).
    #[inline]
    pub fn source(&self, node: usize, q: usize) -> Option<usize> {
        let (nx, ny) = (self.disc.nx as i64, self.disc.ny as i64);
        let ix = (node as i64 % nx) - i64::from(LINKS[q].i);
        let iy = (node as i64 / nx) - i64::from(LINKS[q].j);
        if ix < 0 || iy < 0 || ix >= nx || iy >= ny {
            None
        } else {
            Some((iy * nx + ix) as usize)
        }
    }

    /// Periodic source node of `(node, q)`.
    #[inline]
    pub fn wrapped_source(&self, node: usize, q: usize) -> usize {
        let (nx, ny) = (self.disc.nx as i64, self.disc.ny as i64);
        let ix = (node as i64 % nx - i64::from(LINKS[q].i)).rem_euclid(nx);
        let iy = (node as i64 / nx - i64::from(LINKS[q].j)).rem_euclid(ny);
        (iy * nx + ix) as usize
    }

    /// Periodic target node of `(node, q)`, i.e. `x + c_q dt`.
    #[inline]
    pub fn wrapped_target(&self, node: usize, q: usize) -> usize {
        let (nx, ny) = (self.disc.nx as i64, self.disc.ny as i64);
        let ix = (node as i64 % nx + i64::from(LINKS[q].i)).rem_euclid(nx);
        let iy = (node as i64 / nx + i64::from(LINKS[q].j)).rem_euclid(ny);
        (iy * nx + ix) as usize
    }

    pub fn is_boundary(&self, node: usize) -> bool {
        self.missing[node] != 0
    }

    /// Storage indices of the missing incoming links `D_x`.
    pub fn missing_links(&self, node: usize) -> impl Iterator<Item = usize> + '_ {
        let mask = self.missing[node];
        (0..Q).filter(move |q| mask & (1 << q) != 0)
    }

    /// Storage indices of the links leaving the domain, `-D_x`.
    pub fn outgoing_links(&self, node: usize) -> impl Iterator<Item = usize> + '_ {
        self.missing_links(node).map(opposite)
    }

    pub fn boundary_nodes(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.n_nodes()).filter(move |&n| self.is_boundary(n))
    }

    pub fn boundary_links(&self) -> &[BoundaryLink] {
        &self.boundary_links
    }

    pub fn wrap_links(&self) -> &[WrapLink] {
        &self.wrap_links
    }

    /// Intersection of the missing incoming link `link` at `node` with the
    /// physical wall.
    pub fn wall_point(&self, node: usize, link: Link) -> Result<[f64; 2]> {
        if self.mode != BoundaryMode::Dirichlet {
            return Err(Error::WrongMode { expected: "dirichlet" });
        }
        let err = Error::NotBoundaryLink { node, i: link.i, j: link.j };
        let q = link_index(link).ok_or_else(|| err.clone())?;
        if node >= self.n_nodes() || self.missing[node] & (1 << q) == 0 {
            return Err(err);
        }
        let [x, y] = self.disc.position(node);
        let half = 0.5 * self.disc.dx;
        Ok([x - link.fi() * half, y - link.fj() * half])
    }
}
