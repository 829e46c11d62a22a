mod common;

use common::{config, insect_params, positive, running_pair};
use proptest::prelude::*;
use seasonal_threshold::conditions::{diagonalize_season, lemma3_left_eigenvector_order, theorem3_certificate, Psi};
use seasonal_threshold::floquet::uniform_grid;
use seasonal_threshold::insect::{
    as_seasonal_system, equilibria, invariant_box, jacobian, positive_steady_state, r0, vector_field, InsectParams,
    InsectState,
};
use seasonal_threshold::linalg::{is_metzler, norm2};
use seasonal_threshold::simulate::integrate;

/// Parameter sets with `R0 > 1`.
fn persistent_params() -> impl Strategy<Value = InsectParams> {
    insect_params().prop_filter("R0 > 1", |p| r0(p).unwrap() > 1.0 + 1e-6)
}

/// Perturbations of the running pair by up to 15% per rate.
fn near_running() -> impl Strategy<Value = (InsectParams, InsectParams)> {
    (prop::array::uniform5(0.85f64..1.15), prop::array::uniform5(0.85f64..1.15)).prop_map(|(a, b)| {
        let (u, f) = running_pair();
        let scale = |p: InsectParams, s: [f64; 5]| {
            let v = p.as_array();
            InsectParams::from_array([v[0] * s[0], v[1] * s[1], v[2] * s[2], v[3] * s[3], v[4] * s[4]]).unwrap()
        };
        (scale(u, a), scale(f, b))
    })
}

proptest! {
    #![proptest_config(config(1000))]

    #[test]
    fn left_order_equivalence(m in positive(2)) {
        let r = lemma3_left_eigenvector_order(&m).unwrap();
        if !r.boundary {
            prop_assert_eq!(r.via_eigen, r.via_inequality);
        }
    }
}

proptest! {
    #![proptest_config(config(200))]

    #[test]
    fn steady_state_is_a_fixed_point(p in persistent_params()) {
        let s1 = equilibria(&p).unwrap().s1.unwrap().state;
        let r = vector_field(&p, s1);
        prop_assert!(norm2(&r) <= 1e-12 * (1.0 + norm2(&s1.to_vec())), "{r:?}");
    }

    #[test]
    fn steady_state_sign_follows_r0(p in insect_params()) {
        let r = r0(&p).unwrap();
        prop_assume!((r - 1.0).abs() > 1e-9);
        let s = positive_steady_state(&p).unwrap();
        let sign = (r - 1.0).signum();
        prop_assert_eq!(s.j.signum(), sign);
        prop_assert_eq!(s.a.signum(), sign);
    }

    #[test]
    fn jacobian_structure(p in insect_params(), x in prop::array::uniform2(0.0f64..10.0), d in prop::array::uniform2(0.0f64..5.0)) {
        let xs = InsectState::new(x[0], x[1]);
        let ys = InsectState::new(x[0] + d[0], x[1] + d[1]);
        let jx = jacobian(&p, xs);
        prop_assert!(is_metzler(&jx));
        let diff = &jx - &jacobian(&p, ys);
        prop_assert!(diff.min_entry() >= 0.0);
        prop_assert!((diff[(0, 0)] - 2.0 * p.c_j * d[0]).abs() <= 1e-12 * (1.0 + diff[(0, 0)].abs()));
    }

    #[test]
    fn origin_eigenvalue_signs(p in insect_params()) {
        let j = jacobian(&p, InsectState::new(0.0, 0.0));
        let det = j[(0, 0)] * j[(1, 1)] - j[(0, 1)] * j[(1, 0)];
        let want = (p.h + p.d_j) * p.d_a - p.h * p.b;
        prop_assert!((det - want).abs() <= 1e-12 * want.abs().max(1.0));
        let r = r0(&p).unwrap();
        if (r - 1.0).abs() > 1e-9 {
            prop_assert_eq!(det.signum(), (1.0 - r).signum());
        }
        prop_assert!(j.trace() < 0.0);
        prop_assert!((j.trace() + p.h + p.d_j + p.d_a).abs() <= 1e-12 * j.trace().abs());
    }

    #[test]
    fn diagonalization_reconstructs(p in insect_params()) {
        let d = diagonalize_season(&p).unwrap();
        prop_assert!(d.reconstruction_residual <= 1e-10);
    }

    #[test]
    fn psi_vanishes_at_one_one(u in insect_params(), f in insect_params()) {
        let psi = Psi::new(&diagonalize_season(&u).unwrap(), &diagonalize_season(&f).unwrap());
        let scale = [psi.c_bg, psi.c_b, psi.c_g, psi.c_1].iter().map(|c| c.abs()).fold(1.0, f64::max);
        prop_assert!(psi.eval(1.0, 1.0).abs() <= 1e-12 * scale);
    }
}

proptest! {
    #![proptest_config(config(100))]

    #[test]
    fn psi_sign_agrees_with_column_sums((u, f) in near_running()) {
        let cert = theorem3_certificate(&u, &f, 1.0, &uniform_grid(21)).unwrap();
        let early = cert.stages.iter().take(4).all(|s| s.holds);
        prop_assume!(early);
        let viii = cert.stages.iter().find(|s| s.id == "viii").unwrap();
        prop_assert!(viii.holds, "{viii:?}");
    }
}

proptest! {
    #![proptest_config(config(30))]

    #[test]
    fn invariant_box_is_forward_invariant(
        (u, f) in (insect_params(), insect_params()),
        theta in 0.0f64..=1.0,
        x0 in prop::array::uniform2(0.0f64..5.0),
        grow in 1.0f64..3.0,
    ) {
        let bx = invariant_box(&[u, f]).unwrap();
        let start = InsectState::new(x0[0], x0[1]);
        let l = bx.size_containing(start) * grow;
        let sys = as_seasonal_system(&u, &f, theta, 1.0).unwrap();
        let traj = integrate(&sys, &start.to_vec(), 0.0, 4.0, &Default::default()).unwrap();
        for x in &traj.states {
            prop_assert!(bx.contains(l, InsectState::new(x[0], x[1]), 1e-8), "{x:?} left the box of size {l}");
        }
    }
}
