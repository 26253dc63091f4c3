//! Linear elastodynamics recast as a first-order hyperbolic system.
//!
//! The state vector is ordered `(v_x, v_y, j_s, j_d, j_xy)` everywhere in
//! this crate: the two velocity components followed by the scaled
//! dilatational, deviatoric-normal and shear combinations of the
//! displacement gradient,
//!
//! ```text
//! j_s  = -c_K  (du_x/dx + du_y/dy)
//! j_d  = -c_mu (du_x/dx - du_y/dy)
//! j_xy = -c_mu (du_y/dx + du_x/dy)
//! ```
//!
//! and the system reads `dU/dt + dPhi_x(U)/dx + dPhi_y(U)/dy = B`.

use nalgebra::SMatrix;

use crate::error::{Error, Result};
use crate::grid::Link;

/// Number of scalar components per population.
pub const N: usize = 5;

pub type State = [f64; N];
pub type Matrix5 = SMatrix<f64, N, N>;

/// Component mask of the bounce-back operator: anti bounce-back on the two
/// velocity components, plain bounce-back on the gradient components.
pub const BOUNCE_SIGNS: State = [-1.0, -1.0, 1.0, 1.0, 1.0];

#[derive(Debug, Clone, PartialEq)]
pub struct Material {
    /// Density. Absorbed into the stress and body load, kept for reference.
    pub rho: f64,
    /// Squared dimensionless dilatational speed.
    pub ck2: f64,
    /// Squared dimensionless shear speed.
    pub cmu2: f64,
    pub length: f64,
    pub time: f64,
    pub velocity: f64,
    ck: f64,
    cmu: f64,
}

impl Material {
    /// Material with unit reference scales.
    pub fn new(ck2: f64, cmu2: f64) -> Result<Self> {
        Self::with_scales(ck2, cmu2, 1.0, 1.0, 1.0, 1.0)
    }

    pub fn with_scales(
        ck2: f64,
        cmu2: f64,
        rho: f64,
        length: f64,
        time: f64,
        velocity: f64,
    ) -> Result<Self> {
        if !(ck2 >= 0.0 && cmu2 >= 0.0) || !ck2.is_finite() || !cmu2.is_finite() {
            return Err(Error::Material(format!(
                "squared wave speeds must be finite and non-negative, got ({ck2}, {cmu2})"
            )));
        }
        if ck2 == 0.0 && cmu2 == 0.0 {
            return Err(Error::Material("both wave speeds are zero".into()));
        }
        for (name, v) in [("rho", rho), ("L", length), ("T", time), ("V", velocity)] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::Material(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(Self {
            rho,
            ck2,
            cmu2,
            length,
            time,
            velocity,
            ck: ck2.sqrt(),
            cmu: cmu2.sqrt(),
        })
    }

    /// Dimensionless dilatational speed.
    #[inline]
    pub fn ck(&self) -> f64 {
        self.ck
    }

    /// Dimensionless shear speed.
    #[inline]
    pub fn cmu(&self) -> f64 {
        self.cmu
    }

    /// Dimensional wave speeds `(c_K, c_mu) = (L/T) * (c~_K, c~_mu)`.
    pub fn dimensional_speeds(&self) -> (f64, f64) {
        let s = self.length / self.time;
        (s * self.ck, s * self.cmu)
    }

    /// Fastest characteristic speed of the system, `sqrt(c_K^2 + c_mu^2)`.
    pub fn max_speed(&self) -> f64 {
        (self.ck2 + self.cmu2).sqrt()
    }

    #[inline]
    pub fn flux_x(&self, u: &State) -> State {
        let (ck, cm) = (self.ck, self.cmu);
        [ck * u[2] + cm * u[3], cm * u[4], ck * u[0], cm * u[0], cm * u[1]]
    }

    #[inline]
    pub fn flux_y(&self, u: &State) -> State {
        let (ck, cm) = (self.ck, self.cmu);
        [cm * u[4], ck * u[2] - cm * u[3], ck * u[1], -cm * u[1], cm * u[0]]
    }

    /// Dense symmetric flux matrices `(A_x, A_y)` with `flux_x(U) = A_x U`.
    pub fn flux_matrices(&self) -> (Matrix5, Matrix5) {
        let (ck, cm) = (self.ck, self.cmu);
        let mut ax = Matrix5::zeros();
        ax[(0, 2)] = ck;
        ax[(0, 3)] = cm;
        ax[(1, 4)] = cm;
        ax[(2, 0)] = ck;
        ax[(3, 0)] = cm;
        ax[(4, 1)] = cm;
        let mut ay = Matrix5::zeros();
        ay[(0, 4)] = cm;
        ay[(1, 2)] = ck;
        ay[(1, 3)] = -cm;
        ay[(2, 1)] = ck;
        ay[(3, 1)] = -cm;
        ay[(4, 0)] = cm;
        (ax, ay)
    }

    /// Cauchy stress `(s_xx, s_yy, s_xy)` recovered from a dimensionless state.
    #[inline]
    pub fn stress_from_state(&self, u: &State) -> [f64; 3] {
        let (ck, cm) = self.dimensional_speeds();
        let v = self.velocity;
        [
            -v * (ck * u[2] + cm * u[3]),
            -v * (ck * u[2] - cm * u[3]),
            -v * (cm * u[4]),
        ]
    }

    /// Source term of the Dirichlet closure for missing incoming link `link`
    /// given the wall velocity `du_dt` and lattice speed `c`.
    ///
    /// The velocity rows balance the anti bounce-back sum `f_ij + f*_(-i,-j)`,
    /// which carries `U / 2`. The gradient rows balance the bounce-back
    /// difference `f_ij - f*_(-i,-j)`, which carries
    /// `(i Phi_x(U) + j Phi_y(U)) / c`, hence the `1/c`.
    #[inline]
    pub fn dirichlet_source(&self, link: Link, du_dt: [f64; 2], c: f64) -> State {
        let (i, j) = (link.fi(), link.fj());
        let (ck, cm) = (self.ck / c, self.cmu / c);
        let [dux, duy] = du_dt;
        [
            0.5 * dux,
            0.5 * duy,
            i * ck * dux + j * ck * duy,
            i * cm * dux - j * cm * duy,
            j * cm * dux + i * cm * duy,
        ]
    }

    /// Mixed boundary operator `I_u U + n_x I_Phi Phi_x(U) + n_y I_Phi Phi_y(U)`
    /// for outward normal `normal`.
    pub fn boundary_operator(&self, normal: [f64; 2], u: &State) -> State {
        let fx = self.flux_x(u);
        let fy = self.flux_y(u);
        let mut out = [0.0; N];
        out[0] = u[0];
        out[1] = u[1];
        for k in 2..N {
            out[k] = normal[0] * fx[k] + normal[1] * fy[k];
        }
        out
    }

    /// Right-hand side `S_bc du_D/dt` of the mixed boundary condition.
    pub fn boundary_rhs(&self, normal: [f64; 2], du_dt: [f64; 2]) -> State {
        let (ck, cm) = (self.ck, self.cmu);
        let [nx, ny] = normal;
        let [a, b] = du_dt;
        [a, b, ck * nx * a + ck * ny * b, cm * nx * a - cm * ny * b, cm * ny * a + cm * nx * b]
    }
}
