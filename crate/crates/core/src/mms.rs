//! Manufactured solutions with hand-derived derivatives.
//!
//! Every displacement component used here is a product of three travelling
//! trigonometric factors,
//!
//! ```text
//! u(x, y, t) = A(kx (x - ax t)) * B(ky (y - ay t)) * C(kt (t - t0))
//! ```
//!
//! with `A, B, C` each `sin` or `cos`. All partial derivatives follow from
//! the factor values and their first derivatives because `F'' = -F` for both.
//! On a lattice the `x` and `y` factors are tabulated once per time level,
//! which keeps body-load and exact-field evaluation at a handful of flops per
//! node.

use crate::error::{Error, Result};
use crate::grid::Lattice;
use crate::model::{Material, State, N};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Trig {
    Sin,
    Cos,
}

impl Trig {
    /// Value and first derivative at `arg`.
    #[inline]
    fn eval(self, arg: f64) -> (f64, f64) {
        let (s, c) = arg.sin_cos();
        match self {
            Trig::Sin => (s, c),
            Trig::Cos => (c, -s),
        }
    }
}

/// One travelling trigonometric factor `F(k (s - a t) - k s0)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Factor {
    pub kind: Trig,
    pub k: f64,
    /// Advection speed of the factor.
    pub a: f64,
    /// Shift of the argument, `F(k (s - a t - s0))`.
    pub s0: f64,
}

impl Factor {
    pub const fn new(kind: Trig, k: f64, a: f64, s0: f64) -> Self {
        Self { kind, k, a, s0 }
    }

    #[inline]
    fn eval(&self, s: f64, t: f64) -> (f64, f64) {
        self.kind.eval(self.k * (s - self.a * t - self.s0))
    }
}

/// Separable displacement component `A(x, t) B(y, t) C(t)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mode {
    pub fx: Factor,
    pub fy: Factor,
    /// Time factor; its `a` is ignored.
    pub ft: Factor,
}

/// Factor values `(F, F')` at one point.
#[derive(Debug, Clone, Copy, Default)]
struct Sample {
    a: f64,
    da: f64,
    b: f64,
    db: f64,
    c: f64,
    dc: f64,
}

/// Partial derivatives of one scalar component.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Partials {
    pub u: f64,
    pub x: f64,
    pub y: f64,
    pub t: f64,
    pub xx: f64,
    pub yy: f64,
    pub xy: f64,
    pub tx: f64,
    pub ty: f64,
    pub tt: f64,
}

impl Mode {
    #[inline]
    fn sample(&self, x: f64, y: f64, t: f64) -> Sample {
        let (a, da) = self.fx.eval(x, t);
        let (b, db) = self.fy.eval(y, t);
        let (c, dc) = self.time_factor(t);
        Sample { a, da, b, db, c, dc }
    }

    #[inline]
    fn time_factor(&self, t: f64) -> (f64, f64) {
        self.ft.kind.eval(self.ft.k * (t - self.ft.s0))
    }

    /// All partials from tabulated factor values.
    #[inline]
    fn partials(&self, s: &Sample) -> Partials {
        let (kx, ky, kt) = (self.fx.k, self.fy.k, self.ft.k);
        // d/dt acts as p * d/dA-arg + q * d/dB-arg + r * d/dC-arg
        let p = -self.fx.a * kx;
        let q = -self.fy.a * ky;
        let r = kt;
        let Sample { a, da, b, db, c, dc } = *s;
        let u = a * b * c;
        let t = p * da * b * c + q * a * db * c + r * a * b * dc;
        // second derivatives of the factors are -F
        let tt = -(p * p + q * q + r * r) * u
            + 2.0 * (p * q * da * db * c + p * r * da * b * dc + q * r * a * db * dc);
        Partials {
            u,
            x: kx * da * b * c,
            y: ky * a * db * c,
            t,
            xx: -kx * kx * u,
            yy: -ky * ky * u,
            xy: kx * ky * da * db * c,
            tx: kx * (-p * a * b * c + q * da * db * c + r * da * b * dc),
            ty: ky * (p * da * db * c - q * a * b * c + r * a * db * dc),
            tt,
        }
    }

    pub fn partials_at(&self, x: f64, y: f64, t: f64) -> Partials {
        self.partials(&self.sample(x, y, t))
    }
}

/// Partials of both displacement components.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct DisplacementJet {
    pub ux: Partials,
    pub uy: Partials,
}

impl DisplacementJet {
    pub fn displacement(&self) -> [f64; 2] {
        [self.ux.u, self.uy.u]
    }

    pub fn velocity(&self) -> [f64; 2] {
        [self.ux.t, self.uy.t]
    }

    /// State vector `(v_x, v_y, j_s, j_d, j_xy)`.
    pub fn state(&self, m: &Material) -> State {
        let (ux, uy) = (&self.ux, &self.uy);
        [
            ux.t,
            uy.t,
            -m.ck() * (ux.x + uy.y),
            -m.cmu() * (ux.x - uy.y),
            -m.cmu() * (uy.x + ux.y),
        ]
    }

    /// `d/dx` of the state vector.
    pub fn state_dx(&self, m: &Material) -> State {
        let (ux, uy) = (&self.ux, &self.uy);
        [
            ux.tx,
            uy.tx,
            -m.ck() * (ux.xx + uy.xy),
            -m.cmu() * (ux.xx - uy.xy),
            -m.cmu() * (uy.xx + ux.xy),
        ]
    }

    /// `d/dy` of the state vector.
    pub fn state_dy(&self, m: &Material) -> State {
        let (ux, uy) = (&self.ux, &self.uy);
        [
            ux.ty,
            uy.ty,
            -m.ck() * (ux.xy + uy.yy),
            -m.cmu() * (ux.xy - uy.yy),
            -m.cmu() * (uy.xy + ux.yy),
        ]
    }

    /// Dimensionless stress from the material law.
    pub fn stress(&self, m: &Material) -> [f64; 3] {
        let (ux, uy) = (&self.ux, &self.uy);
        let div = ux.x + uy.y;
        [
            m.ck2 * div + m.cmu2 * (ux.x - uy.y),
            m.ck2 * div - m.cmu2 * (ux.x - uy.y),
            m.cmu2 * (ux.y + uy.x),
        ]
    }

    /// `d^2u/dt^2 - div sigma(u)`.
    pub fn body_load(&self, m: &Material) -> [f64; 2] {
        let (ux, uy) = (&self.ux, &self.uy);
        let (k, g) = (m.ck2, m.cmu2);
        let div_x = k * (ux.xx + uy.xy) + g * (ux.xx - uy.xy) + g * (ux.yy + uy.xy);
        let div_y = g * (ux.xy + uy.xx) + k * (ux.xy + uy.yy) - g * (ux.xy - uy.yy);
        [ux.tt - div_x, uy.tt - div_y]
    }
}

/// A closed-form displacement field plus the data it induces.
#[derive(Debug, Clone, PartialEq)]
pub struct ManufacturedCase {
    pub name: &'static str,
    pub ux: Mode,
    pub uy: Mode,
    /// Whether `u` solves the forced problem exactly (body load and wall
    /// data derived from it). Initial-data-only cases run unforced with
    /// homogeneous walls.
    pub exact: bool,
}

const PI: f64 = std::f64::consts::PI;

/// Names accepted by [`case_by_name`].
pub const CASE_NAMES: [&str; 2] = ["wave52", "stability_ic"];

/// Periodic travelling-wave solution on the unit square.
pub fn case_wave52() -> ManufacturedCase {
    ManufacturedCase {
        name: "wave52",
        ux: Mode {
            fx: Factor::new(Trig::Sin, 4.0 * PI, 0.3, 0.0),
            fy: Factor::new(Trig::Cos, 2.0 * PI, 0.8, 0.0),
            ft: Factor::new(Trig::Sin, 4.0 * PI, 0.0, 0.1),
        },
        uy: Mode {
            fx: Factor::new(Trig::Cos, 4.0 * PI, 0.7, 0.0),
            fy: Factor::new(Trig::Sin, 2.0 * PI, 0.1, 0.0),
            ft: Factor::new(Trig::Cos, 4.0 * PI, 0.0, -0.4),
        },
        exact: true,
    }
}

/// Standing initial data vanishing on the walls of the unit square, used
/// with zero load and homogeneous walls. The time factor is read at `t = 0`.
pub fn case_stability_ic() -> ManufacturedCase {
    ManufacturedCase {
        name: "stability_ic",
        ux: Mode {
            fx: Factor::new(Trig::Sin, 4.0 * PI, 0.0, 0.0),
            fy: Factor::new(Trig::Sin, 2.0 * PI, 0.0, 0.0),
            ft: Factor::new(Trig::Sin, 4.0 * PI, 0.0, 0.1),
        },
        uy: Mode {
            fx: Factor::new(Trig::Sin, 4.0 * PI, 0.0, 0.0),
            fy: Factor::new(Trig::Sin, 2.0 * PI, 0.0, 0.0),
            ft: Factor::new(Trig::Sin, 4.0 * PI, 0.0, -0.4),
        },
        exact: false,
    }
}

pub fn case_by_name(name: &str) -> Result<ManufacturedCase> {
    match name.trim() {
        "wave52" => Ok(case_wave52()),
        "stability_ic" => Ok(case_stability_ic()),
        other => Err(Error::UnknownCase(other.to_string())),
    }
}

/// Per-node inputs of the population initialization.
#[derive(Debug, Clone, Default)]
pub struct InitialData {
    /// Initial displacement.
    pub u0: Vec<[f64; 2]>,
    /// Initial state vector.
    pub state: Vec<State>,
    pub state_dx: Vec<State>,
    pub state_dy: Vec<State>,
    /// Body load `(b_x, b_y)` at `t = 0`.
    pub body: Vec<[f64; 2]>,
}

impl ManufacturedCase {
    pub fn jet(&self, x: f64, y: f64, t: f64) -> DisplacementJet {
        DisplacementJet { ux: self.ux.partials_at(x, y, t), uy: self.uy.partials_at(x, y, t) }
    }

    pub fn displacement(&self, x: f64, y: f64, t: f64) -> [f64; 2] {
        self.jet(x, y, t).displacement()
    }

    pub fn exact_state(&self, m: &Material, x: f64, y: f64, t: f64) -> State {
        self.jet(x, y, t).state(m)
    }

    /// Dimensional stress, consistent with [`Material::stress_from_state`].
    pub fn exact_stress(&self, m: &Material, x: f64, y: f64, t: f64) -> [f64; 3] {
        let s = m.velocity * m.length / m.time;
        self.jet(x, y, t).stress(m).map(|v| s * v)
    }

    pub fn body_load(&self, m: &Material, x: f64, y: f64, t: f64) -> [f64; 2] {
        if self.exact {
            self.jet(x, y, t).body_load(m)
        } else {
            [0.0; 2]
        }
    }

    /// Time derivative of the wall displacement at a wall point.
    pub fn wall_velocity(&self, x: f64, y: f64, t: f64) -> [f64; 2] {
        if self.exact {
            self.jet(x, y, t).velocity()
        } else {
            [0.0; 2]
        }
    }

    pub fn initial_data(&self, m: &Material, lattice: &Lattice) -> InitialData {
        let n = lattice.n_nodes();
        let mut data = InitialData {
            u0: Vec::with_capacity(n),
            state: Vec::with_capacity(n),
            state_dx: Vec::with_capacity(n),
            state_dy: Vec::with_capacity(n),
            body: Vec::with_capacity(n),
        };
        for node in 0..n {
            let [x, y] = lattice.disc.position(node);
            let jet = self.jet(x, y, 0.0);
            data.u0.push(jet.displacement());
            data.state.push(jet.state(m));
            data.state_dx.push(jet.state_dx(m));
            data.state_dy.push(jet.state_dy(m));
            data.body.push(if self.exact { jet.body_load(m) } else { [0.0; 2] });
        }
        data
    }

    /// Body-load evaluator for every node of `lattice` at time `t`.
    pub fn body_load_table(&self, m: &Material, lattice: &Lattice, t: f64) -> BodyLoadTable {
        let jets = self.tabulate(lattice, t);
        let basis = [(1.0, 0.0, 1.0, 0.0), (1.0, 0.0, 0.0, 1.0), (0.0, 1.0, 1.0, 0.0), (0.0, 1.0, 0.0, 1.0)];
        let mut coef = [[[0.0; 2]; 4]; 2];
        for (mi, table) in [&jets.ux, &jets.uy].into_iter().enumerate() {
            let (c, dc) = table.t;
            for (k, &(a, da, b, db)) in basis.iter().enumerate() {
                let p = table.mode.partials(&Sample { a, da, b, db, c, dc });
                let jet = if mi == 0 {
                    DisplacementJet { ux: p, uy: Partials::default() }
                } else {
                    DisplacementJet { ux: Partials::default(), uy: p }
                };
                coef[mi][k] = jet.body_load(m);
            }
        }
        BodyLoadTable { nx: jets.nx, tables: [jets.ux, jets.uy], coef }
    }

    /// Tabulates the factors of both modes on the lattice at time `t`.
    pub fn tabulate(&self, lattice: &Lattice, t: f64) -> LatticeJets {
        let disc = &lattice.disc;
        let xs: Vec<f64> = (0..disc.nx).map(|i| disc.x(i)).collect();
        let ys: Vec<f64> = (0..disc.ny).map(|j| disc.y(j)).collect();
        let tab = |mode: &Mode| ModeTable {
            x: xs.iter().map(|&x| mode.fx.eval(x, t)).collect(),
            y: ys.iter().map(|&y| mode.fy.eval(y, t)).collect(),
            t: mode.time_factor(t),
            mode: *mode,
        };
        LatticeJets { nx: disc.nx, ux: tab(&self.ux), uy: tab(&self.uy) }
    }
}

#[derive(Debug, Clone)]
struct ModeTable {
    mode: Mode,
    x: Vec<(f64, f64)>,
    y: Vec<(f64, f64)>,
    t: (f64, f64),
}

impl ModeTable {
    #[inline]
    fn partials(&self, ix: usize, iy: usize) -> Partials {
        let (a, da) = self.x[ix];
        let (b, db) = self.y[iy];
        let (c, dc) = self.t;
        self.mode.partials(&Sample { a, da, b, db, c, dc })
    }
}

/// Factor tables of a case on one lattice time level.
#[derive(Debug, Clone)]
pub struct LatticeJets {
    nx: usize,
    ux: ModeTable,
    uy: ModeTable,
}

impl LatticeJets {
    /// Jet at `node`, bit-identical to [`ManufacturedCase::jet`] at the
    /// node position.
    #[inline]
    pub fn jet(&self, node: usize) -> DisplacementJet {
        let (ix, iy) = (node % self.nx, node / self.nx);
        DisplacementJet { ux: self.ux.partials(ix, iy), uy: self.uy.partials(ix, iy) }
    }
}

/// Body load on a lattice at one time level.
///
/// With the time factors fixed, the load is bilinear in the `x` and `y`
/// factor pairs `(F, F')` of each mode, so its coefficients are computed once
/// and every node costs a few multiply-adds. Values agree with
/// [`DisplacementJet::body_load`] up to rounding.
#[derive(Debug, Clone)]
pub struct BodyLoadTable {
    nx: usize,
    tables: [ModeTable; 2],
    /// `coef[mode][basis]`, basis order `(F_x F_y, F_x F_y', F_x' F_y, F_x' F_y')`.
    coef: [[[f64; 2]; 4]; 2],
}

impl BodyLoadTable {
    #[inline]
    pub fn at(&self, node: usize) -> [f64; 2] {
        let (ix, iy) = (node % self.nx, node / self.nx);
        let mut out = [0.0; 2];
        for (table, coef) in self.tables.iter().zip(&self.coef) {
            let (a, da) = table.x[ix];
            let (b, db) = table.y[iy];
            let w = [a * b, a * db, da * b, da * db];
            for k in 0..4 {
                out[0] += coef[k][0] * w[k];
                out[1] += coef[k][1] * w[k];
            }
        }
        out
    }
}

/// Zero-padded state helper for body loads.
#[inline]
pub fn load_state(b: [f64; 2]) -> State {
    let mut s = [0.0; N];
    s[0] = b[0];
    s[1] = b[1];
    s
}
