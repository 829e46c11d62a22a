mod common;

use common::{config, metzler, positive, rel};
use proptest::prelude::*;
use seasonal_threshold::linalg::{
    mat_exp, perron_pair, spectral_abscissa, spectral_radius, Matrix, DEFAULT_EXP_TOL, DEFAULT_PERRON_MAX_ITER,
    DEFAULT_PERRON_TOL,
};
use seasonal_threshold::seasonal::SeasonalSchedule;

fn sized_metzler() -> impl Strategy<Value = Matrix> {
    (1usize..=5).prop_flat_map(metzler)
}

proptest! {
    #![proptest_config(config(120))]

    #[test]
    fn exp_radius_matches_abscissa(a in sized_metzler()) {
        let r = spectral_radius(&mat_exp(&a, DEFAULT_EXP_TOL).unwrap()).unwrap();
        let mu = spectral_abscissa(&a).unwrap();
        prop_assert!(rel(r, mu.exp()) <= 1e-8, "{r} vs {}", mu.exp());
    }

    #[test]
    fn exp_of_commuting_sum((a, c) in (1usize..=5).prop_flat_map(|n| (metzler(n), prop::array::uniform3(-1.0f64..1.0)))) {
        // b = c0 I + c1 A + c2 A^2 commutes with A
        let b = &(&Matrix::identity(a.n()).scale(c[0]) + &a.scale(c[1])) + &(&a * &a).scale(c[2] * 0.2);
        let lhs = mat_exp(&(&a + &b), DEFAULT_EXP_TOL).unwrap();
        let rhs = &mat_exp(&a, DEFAULT_EXP_TOL).unwrap() * &mat_exp(&b, DEFAULT_EXP_TOL).unwrap();
        let err = (&lhs - &rhs).max_abs() / lhs.max_abs().max(1.0);
        prop_assert!(err <= 1e-8, "{err}");
    }

    #[test]
    fn perron_pair_residuals_and_transpose(m in (1usize..=5).prop_flat_map(positive)) {
        let p = perron_pair(&m, DEFAULT_PERRON_TOL, DEFAULT_PERRON_MAX_ITER).unwrap();
        let (r, l) = p.residuals(&m);
        prop_assert!(r <= DEFAULT_PERRON_TOL * 10.0 && l <= DEFAULT_PERRON_TOL * 10.0, "{r} {l}");
        prop_assert!(p.v.iter().chain(&p.v_star).all(|&x| x > 0.0));
        let q = perron_pair(&m.transpose(), DEFAULT_PERRON_TOL, DEFAULT_PERRON_MAX_ITER).unwrap();
        prop_assert!(rel(p.rho, q.rho) <= 1e-10);
    }

    #[test]
    fn season_index_is_periodic(period in 0.1f64..10.0, theta in 0.05f64..0.95, t in 0.0f64..1.0, k in 1u32..5) {
        let s = SeasonalSchedule::two_season(period, theta).unwrap();
        let t = t * period;
        prop_assert_eq!(s.season_index(t).unwrap(), s.season_index(t + k as f64 * period).unwrap());
    }

    #[test]
    fn windows_partition_the_period(mut cuts in prop::collection::vec(0.01f64..0.99, 1..6)) {
        cuts.sort_by(f64::total_cmp);
        cuts.dedup();
        let mut bp = vec![0.0];
        bp.extend(cuts);
        bp.push(1.0);
        let s = SeasonalSchedule::new(2.0, bp).unwrap();
        let mut end = 0.0;
        for k in 0..s.n_seasons() {
            let (lo, hi) = s.window(k);
            prop_assert_eq!(lo, end);
            prop_assert!(hi > lo);
            end = hi;
        }
        prop_assert_eq!(end, 1.0);
    }
}

// a monodromy whose left vector used to stall just above the tolerance
#[test]
fn perron_pair_on_sparse_monodromy() {
    let m1 = Matrix::from_rows(&[
        [-1.4524546111541614, 1.723083430891771, 0.0, 0.0, 0.6279004365945613],
        [2.5640888406352937, -1.606323881785113, 2.4386530720785897, 1.7599099549691424, 0.0],
        [0.0, 1.0946486093413634, -0.662019848483705, 0.8815492516917205, 1.7152045024075084],
        [2.333151937283347, 0.0, 0.8006646614225827, 2.6230042496331523, 2.7853654830260695],
        [0.2977748786563139, 0.6412917988609101, 0.2741763688497465, 0.0, 1.7613026334787278],
    ])
    .unwrap();
    let m2 = Matrix::from_rows(&[
        [0.24745897724741317, 0.10573823993962383, 0.0, 1.767114721447439, 0.33399882879133846],
        [0.0, 1.9238252488594334, 0.0, 2.276083243247684, 2.5516607213897586],
        [0.0, 0.0, -2.745611006482311, 0.0, 2.287058858838808],
        [0.0, 0.0, 0.9402338014278331, -1.376274738417691, 0.0],
        [0.08396224449736245, 0.0, 0.0, 0.0, 1.111888209840087],
    ])
    .unwrap();
    let m = &mat_exp(&m2.scale(0.9), DEFAULT_EXP_TOL).unwrap() * &mat_exp(&m1.scale(0.1), DEFAULT_EXP_TOL).unwrap();
    let p = perron_pair(&m, DEFAULT_PERRON_TOL, DEFAULT_PERRON_MAX_ITER).unwrap();
    assert!(rel(p.rho, spectral_radius(&m).unwrap()) <= 1e-12);
}
