//! Second-order consistent population initialization.
//!
//! Populations start from the equilibrium of the initial state plus an
//! `O(dt)` correction that removes the first-order initial layer. The
//! correction needs the body load at `t = 0` and both spatial derivatives
//! of the initial state, which are supplied in closed form.

use crate::error::{Error, Result};
use crate::grid::{LINKS, Q};
use crate::kernel::PopulationField;
use crate::mms::{load_state, InitialData};
use crate::model::{Material, State, N};

/// Initial populations at one node.
pub fn init_node(
    m: &Material,
    u0: &State,
    du0_dx: &State,
    du0_dy: &State,
    body: &State,
    c: f64,
    dt: f64,
) -> [State; Q] {
    init_node_impl(m, u0, du0_dx, du0_dy, body, c, dt, true)
}

#[allow(clippy::too_many_arguments)]
fn init_node_impl(
    m: &Material,
    u0: &State,
    du0_dx: &State,
    du0_dy: &State,
    body: &State,
    c: f64,
    dt: f64,
    corrected: bool,
) -> [State; Q] {
    let fx_u0 = m.flux_x(u0);
    let fy_u0 = m.flux_y(u0);
    let fx_b = m.flux_x(body);
    let fy_b = m.flux_y(body);
    let fx_dx = m.flux_x(du0_dx);
    let fy_dy = m.flux_y(du0_dy);
    // nested fluxes, applied sequentially
    let fxfx_dx = m.flux_x(&fx_dx);
    let fyfx_dx = m.flux_y(&fx_dx);
    let fxfy_dy = m.flux_x(&fy_dy);
    let fyfy_dy = m.flux_y(&fy_dy);

    let two_c = 2.0 / c;
    let two_c2 = 2.0 / (c * c);
    std::array::from_fn(|q| {
        let l = LINKS[q];
        let (i, j) = (l.fi(), l.fj());
        let mut f = [0.0; N];
        for k in 0..N {
            let eq = 0.25 * (u0[k] + two_c * (i * fx_u0[k] + j * fy_u0[k]));
            if !corrected {
                f[k] = eq;
                continue;
            }
            let load = body[k] + two_c * (i * fx_b[k] + j * fy_b[k]);
            let gx = i * du0_dx[k] + (2.0 * i * i - 1.0) / c * fx_dx[k]
                - two_c2 * (i * fxfx_dx[k] + j * fyfx_dx[k]);
            let gy = j * du0_dy[k] + (2.0 * j * j - 1.0) / c * fy_dy[k]
                - two_c2 * (i * fxfy_dy[k] + j * fyfy_dy[k]);
            f[k] = eq - dt / 8.0 * (load + c * gx + c * gy);
        }
        f
    })
}

/// Initializes the population field from closed-form initial data.
pub fn init_populations(
    m: &Material,
    data: &InitialData,
    c: f64,
    dt: f64,
) -> Result<PopulationField> {
    init_populations_impl(m, data, c, dt, true)
}

/// Equilibrium-only initialization without the `O(dt)` correction.
///
/// Only exists to demonstrate that the correction is required for
/// second-order convergence.
#[doc(hidden)]
pub fn init_populations_uncorrected(
    m: &Material,
    data: &InitialData,
    c: f64,
    dt: f64,
) -> Result<PopulationField> {
    init_populations_impl(m, data, c, dt, false)
}

fn init_populations_impl(
    m: &Material,
    data: &InitialData,
    c: f64,
    dt: f64,
    corrected: bool,
) -> Result<PopulationField> {
    let n = data.state.len();
    if [data.state_dx.len(), data.state_dy.len(), data.body.len(), data.u0.len()]
        .iter()
        .any(|&len| len != n)
    {
        return Err(Error::Discretization(
            "initial data is missing derivative or load fields".into(),
        ));
    }
    let mut field = PopulationField::zeros(n);
    for node in 0..n {
        let b = load_state(data.body[node]);
        let f = init_node_impl(
            m,
            &data.state[node],
            &data.state_dx[node],
            &data.state_dy[node],
            &b,
            c,
            dt,
            corrected,
        );
        field.set_node(node, &f);
    }
    Ok(field)
}
