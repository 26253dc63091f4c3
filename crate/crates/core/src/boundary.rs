//! Periodic wrap and the half-way Dirichlet closure.
//!
//! Both closures fill exactly the slots that interior streaming left open.

use crate::error::{Error, Result};
use crate::grid::{opposite, BoundaryMode, Lattice, LINKS};
use crate::kernel::{slot, Sources};
use crate::model::{Material, BOUNCE_SIGNS, N};

/// Re-enters populations that left through one side on the opposite side,
/// keeping their link.
pub fn apply_periodic(lattice: &Lattice, post: &[f64], next: &mut [f64]) -> Result<()> {
    if lattice.mode != BoundaryMode::Periodic {
        return Err(Error::WrongMode { expected: "periodic" });
    }
    for w in lattice.wrap_links() {
        let (dst, src) = (slot(w.node, w.link), slot(w.source, w.link));
        next[dst..dst + N].copy_from_slice(&post[src..src + N]);
    }
    Ok(())
}

/// Rejects lattices whose walls are not exactly halfway along the cut links.
pub fn check_halfway(lattice: &Lattice) -> Result<()> {
    if lattice.mode != BoundaryMode::Dirichlet {
        return Err(Error::WrongMode { expected: "dirichlet" });
    }
    match lattice.boundary_links().iter().find(|b| b.q != 0.5) {
        Some(b) => Err(Error::Discretization(format!(
            "boundary link at node {} has wall distance {} (only 1/2 is supported)",
            b.node, b.q
        ))),
        None => Ok(()),
    }
}

/// Fills every missing incoming population by reflecting its outgoing partner
/// (anti bounce-back on velocities, bounce-back on gradients) and adding the
/// wall source evaluated at the wall point and the half-step time `t_half`.
pub fn apply_dirichlet(
    lattice: &Lattice,
    m: &Material,
    post: &[f64],
    next: &mut [f64],
    sources: &dyn Sources,
    t_half: f64,
) -> Result<()> {
    check_halfway(lattice)?;
    for b in lattice.boundary_links() {
        let du_dt = sources.wall_velocity(b.wall_point, t_half);
        let s = m.dirichlet_source(LINKS[b.link], du_dt, lattice.disc.c);
        let src = slot(b.node, opposite(b.link));
        let dst = slot(b.node, b.link);
        for k in 0..N {
            next[dst + k] = BOUNCE_SIGNS[k] * post[src + k] + s[k];
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{build_lattice, Q};
    use crate::kernel::{stream, NoSources, NODE_LEN};
    use crate::model::Matrix5;
    use crate::stabmon::Symmetrizer;
    use rand::{Rng, SeedableRng};

    fn random_field(n: usize, seed: u64) -> Vec<f64> {
        let mut r = rand::rngs::StdRng::seed_from_u64(seed);
        (0..n * NODE_LEN).map(|_| r.gen_range(-1.0..1.0)).collect()
    }

    struct Moving;

    impl Sources for Moving {
        fn body_load(&self, _: &Material, _: &Lattice, _: f64, _: &mut [[f64; 2]]) -> bool {
            false
        }

        fn wall_velocity(&self, p: [f64; 2], t: f64) -> [f64; 2] {
            [p[0] + 2.0 * p[1] + t, p[0] * p[1] - t]
        }
    }

    #[test]
    fn periodic_wrap_example() {
        let lat = build_lattice([4.0, 3.0], 1.0, 0.5, 1.0, BoundaryMode::Periodic).unwrap();
        let mut post = vec![0.0; lat.n_nodes() * NODE_LEN];
        // right edge node (3, 1), east-moving population
        let node = 4 + 3;
        post[slot(node, 0)..slot(node, 0) + N].copy_from_slice(&[1.0, 2.0, 3.0, 4.0, 5.0]);
        let mut next = vec![0.0; post.len()];
        stream(&lat, &post, &mut next);
        apply_periodic(&lat, &post, &mut next).unwrap();
        assert_eq!(&next[slot(4, 0)..slot(4, 0) + N], &[1.0, 2.0, 3.0, 4.0, 5.0]);
    }

    #[test]
    fn mode_mismatch_is_rejected() {
        let per = build_lattice([1.0, 1.0], 0.25, 0.1, 1.0, BoundaryMode::Periodic).unwrap();
        let dir = build_lattice([1.0, 1.0], 0.25, 0.1, 1.0, BoundaryMode::Dirichlet).unwrap();
        let m = Material::new(1.0, 1.0).unwrap();
        let mut buf = vec![0.0; 16 * NODE_LEN];
        let post = buf.clone();
        assert!(apply_periodic(&dir, &post, &mut buf).is_err());
        assert!(apply_dirichlet(&per, &m, &post, &mut buf, &NoSources, 0.0).is_err());
    }

    #[test]
    fn every_slot_written_exactly_once() {
        for mode in [BoundaryMode::Periodic, BoundaryMode::Dirichlet] {
            let lat = build_lattice([1.0, 0.75], 0.125, 0.05, 1.0, mode).unwrap();
            let post = random_field(lat.n_nodes(), 5);
            let mut count = vec![0u32; post.len()];
            // interior streaming writes
            let mut next = vec![f64::NAN; post.len()];
            stream(&lat, &post, &mut next);
            for (c, v) in count.iter_mut().zip(&next) {
                *c += u32::from(!v.is_nan());
            }
            // closure writes
            let mut closure = vec![f64::NAN; post.len()];
            match mode {
                BoundaryMode::Periodic => apply_periodic(&lat, &post, &mut closure).unwrap(),
                BoundaryMode::Dirichlet => {
                    let m = Material::new(1.1, 0.4).unwrap();
                    apply_dirichlet(&lat, &m, &post, &mut closure, &Moving, 0.3).unwrap()
                }
            }
            for (c, v) in count.iter_mut().zip(&closure) {
                *c += u32::from(!v.is_nan());
            }
            assert!(count.iter().all(|&c| c == 1), "{mode}");
        }
    }

    #[test]
    fn corner_links_use_their_own_wall_points() {
        let lat = build_lattice([1.0, 1.0], 0.25, 0.1, 1.0, BoundaryMode::Dirichlet).unwrap();
        let m = Material::new(1.1, 0.4).unwrap();
        let post = random_field(lat.n_nodes(), 9);
        let mut next = vec![0.0; post.len()];
        apply_dirichlet(&lat, &m, &post, &mut next, &Moving, 0.25).unwrap();
        // corner node 0 at (1/8, 1/8): links (1,0) from the wall x = 0 and
        // (0,1) from the wall y = 0
        for (q, wall) in [(0, [0.0, 0.125]), (1, [0.125, 0.0])] {
            let s = m.dirichlet_source(LINKS[q], Moving.wall_velocity(wall, 0.25), lat.disc.c);
            let src = slot(0, opposite(q));
            for k in 0..N {
                let expected = BOUNCE_SIGNS[k] * post[src + k] + s[k];
                assert_eq!(next[slot(0, q) + k], expected);
            }
        }
    }

    #[test]
    fn reflection_preserves_symmetrizer() {
        let d = Matrix5::from_diagonal(&BOUNCE_SIGNS.into());
        for (ck2, cmu2) in [(1.1, 0.4), (1.5, 0.0), (0.75, 0.75), (0.2, 1.2)] {
            let m = Material::new(ck2, cmu2).unwrap();
            let sym = Symmetrizer::new(&m, 2.5).unwrap();
            for q in 0..Q {
                let lhs = sym.block(opposite(q));
                let rhs = d.transpose() * sym.block(q) * d;
                assert!((lhs - rhs).amax() <= 1e-14, "{ck2} {cmu2} {}", LINKS[q]);
            }
        }
    }
}
