//! Invariant suite run by the `verify` command on a scenario.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::conditions::{check_condition_a, lemma3_left_eigenvector_order, theorem3_certificate, check_hyp_parameters, DEFAULT_ANGLE_TOL};
use crate::error::{Error, Result};
use crate::floquet::{find_threshold, monotone_certificate, timescale_asymptotics, uniform_grid, Regime, TwoSeasonLinearization};
use crate::insect::{self, InsectState};
use crate::linalg::{norm2, Matrix};
use crate::scenario::Scenario;
use crate::seasonal::default_samples;
use crate::simulate::{empirical_threshold, find_periodic_orbit, integrate, multiplier, verify_appendix_lemmas, Classification};
use crate::split::{gelfand_bound_probe, split_rho, SplitSchedule};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CheckStatus {
    Pass,
    Fail,
    /// The check does not apply to this scenario.
    Skip,
    /// The check could not be evaluated.
    Error,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyRow {
    pub check: String,
    pub status: CheckStatus,
    pub value: f64,
    pub tolerance: f64,
    pub detail: String,
}

impl VerifyRow {
    fn bound(check: &str, value: f64, tolerance: f64, detail: impl Into<String>) -> Self {
        let status = if value <= tolerance { CheckStatus::Pass } else { CheckStatus::Fail };
        Self { check: check.into(), status, value, tolerance, detail: detail.into() }
    }

    fn flag(check: &str, ok: bool, value: f64, detail: impl Into<String>) -> Self {
        let status = if ok { CheckStatus::Pass } else { CheckStatus::Fail };
        Self { check: check.into(), status, value, tolerance: f64::NAN, detail: detail.into() }
    }

    fn skip(check: &str, detail: impl Into<String>) -> Self {
        Self { check: check.into(), status: CheckStatus::Skip, value: f64::NAN, tolerance: f64::NAN, detail: detail.into() }
    }
}

/// Corrections smaller than this are treated as exactly zero.
pub const CORRECTION_NOISE_FLOOR: f64 = 1e-12;
pub const FD_STEP_FIRST: f64 = 1e-5;
pub const FD_STEP_SECOND: f64 = 1e-4;

/// Worst relative errors of rho' and rho'' against central differences.
pub fn derivative_errors(lin: &TwoSeasonLinearization, thetas: &[f64]) -> Result<(f64, f64)> {
    let r = |t: f64| -> Result<f64> { Ok(lin.rho(t)?.rho) };
    let (mut e1, mut e2) = (0.0f64, 0.0f64);
    for &th in thetas {
        let d1 = lin.rho_prime(th)?;
        let d2 = lin.rho_second(th)?;
        let (h, k) = (FD_STEP_FIRST, FD_STEP_SECOND);
        let fd1 = (r(th + h)? - r(th - h)?) / (2.0 * h);
        let fd2 = (r(th + k)? - 2.0 * r(th)? + r(th - k)?) / (k * k);
        e1 = e1.max((d1 - fd1).abs() / d1.abs().max(1.0));
        e2 = e2.max((d2 - fd2).abs() / d2.abs().max(1.0));
    }
    Ok((e1, e2))
}

/// Distances to the large-period limit shrink monotonically (above the
/// noise floor) and end below `tol`.
pub fn timescale_converges(distances: &[f64], tol: f64) -> bool {
    let monotone = distances
        .windows(2)
        .all(|w| w[1] <= w[0] || w[1] <= CORRECTION_NOISE_FLOOR);
    monotone && distances.last().is_some_and(|d| *d <= tol)
}

fn guard(check: &str, f: impl FnOnce() -> Result<Vec<VerifyRow>>) -> Vec<VerifyRow> {
    match f() {
        Ok(rows) => rows,
        Err(Error::Certificate { index, theta_lo, theta_hi, reason }) => vec![VerifyRow::flag(
            check,
            false,
            index as f64,
            format!("monotonicity certificate failed on [{theta_lo}, {theta_hi}]: {reason}"),
        )],
        Err(e) => vec![VerifyRow {
            check: check.into(),
            status: CheckStatus::Error,
            value: f64::NAN,
            tolerance: f64::NAN,
            detail: e.to_string(),
        }],
    }
}

/// Runs every check that applies to the scenario. Rows are in a fixed order.
pub fn verify_suite(s: &Scenario, seed: u64) -> Result<Vec<VerifyRow>> {
    let lin = s.linearization()?;
    let grid = s.grid();
    let probe: Vec<f64> = (1..=9).map(|i| i as f64 / 10.0).collect();
    let mut rows = Vec::new();

    rows.extend(guard("rho_prime_vs_fd", || {
        let (e1, e2) = derivative_errors(&lin, &probe)?;
        Ok(vec![
            VerifyRow::bound("rho_prime_vs_fd", e1, 1e-6, "central difference, h = 1e-5"),
            VerifyRow::bound("rho_second_vs_fd", e2, 1e-4, "second difference, h = 1e-4"),
        ])
    }));

    let cond_a = check_condition_a(&lin, DEFAULT_ANGLE_TOL).map(|c| c.holds).unwrap_or(false);
    rows.extend(guard("condition_a_closed_form", || {
        if !cond_a {
            return Ok(vec![VerifyRow::skip("condition_a_closed_form", "condition A does not hold")]);
        }
        let (mu1, mu2) = (lin.mu1()?.mu, lin.mu2()?.mu);
        let t = lin.period();
        let mut worst = 0.0f64;
        for &th in &grid {
            let want = (t * (th * mu1 + (1.0 - th) * mu2)).exp();
            worst = worst.max((lin.rho(th)?.rho - want).abs() / want.max(1.0));
        }
        Ok(vec![VerifyRow::bound("condition_a_closed_form", worst, 1e-10, "relative to max(1, closed form)")])
    }));

    rows.extend(guard("rho_strictly_decreasing", || {
        let cert = monotone_certificate(&lin, grid.len().max(2))?;
        Ok(vec![VerifyRow::flag(
            "rho_strictly_decreasing",
            cert.is_none(),
            grid.len() as f64,
            cert.map(|e| e.to_string()).unwrap_or_else(|| "strict decrease with rho' < 0 on the grid".into()),
        )])
    }));

    let threshold = find_threshold(&lin, &s.threshold_options());
    rows.extend(guard("threshold_root", || {
        let rep = threshold.clone()?;
        if rep.regime != Regime::InteriorRoot {
            return Ok(vec![VerifyRow::skip("threshold_root", format!("regime {}", rep.regime))]);
        }
        Ok(vec![VerifyRow::bound(
            "threshold_root",
            (rep.rho_at_theta_star - 1.0).abs(),
            1e-10,
            format!("theta* = {:.16e}", rep.theta_star),
        )])
    }));

    rows.extend(guard("poincare_multiplier", || {
        let opts = s.sim_options();
        let mut worst = 0.0f64;
        for th in uniform_grid(11) {
            let lam = multiplier(&s.system(th)?, &opts)?;
            let rho = lin.rho(th)?.rho;
            worst = worst.max((lam - rho).abs() / rho);
        }
        Ok(vec![VerifyRow::bound("poincare_multiplier", worst, 1e-6, "variational vs spectral, 11 thetas")])
    }));

    rows.extend(guard("spectral_vs_simulation", || {
        let rep = match &threshold {
            Ok(r) if r.regime == Regime::InteriorRoot => r.clone(),
            _ => return Ok(vec![VerifyRow::skip("spectral_vs_simulation", "no interior threshold")]),
        };
        let coarse: Vec<f64> = (0..10).map(|i| 0.05 + 0.1 * i as f64).collect();
        let x0 = vec![1.0; lin.dim()];
        let emp = empirical_threshold(|th| s.system(th), &coarse, &x0, 5e-3, &s.orbit_options())?;
        Ok(vec![VerifyRow::bound(
            "spectral_vs_simulation",
            (emp.theta_star - rep.theta_star).abs(),
            0.02,
            format!("empirical theta* = {:.6}", emp.theta_star),
        )])
    }));

    rows.extend(guard("orbit_classification", || {
        let rep = match &threshold {
            Ok(r) if s.insect.is_some() && r.regime == Regime::InteriorRoot && (0.1..=0.9).contains(&r.theta_star) => {
                r.clone()
            }
            _ => return Ok(vec![VerifyRow::skip("orbit_classification", "needs insect mode and theta* in [0.1, 0.9]")]),
        };
        let n = lin.dim();
        let opts = s.orbit_options();
        let lo = s.system(rep.theta_star - 0.1)?;
        let hi = s.system(rep.theta_star + 0.1)?;
        let a = find_periodic_orbit(&lo, &vec![0.1; n], &opts)?;
        let b = find_periodic_orbit(&lo, &vec![5.0; n], &opts)?;
        let c = find_periodic_orbit(&hi, &vec![0.1; n], &opts)?;
        let d = find_periodic_orbit(&hi, &vec![5.0; n], &opts)?;
        let gap = norm2(&a.fixed_point.iter().zip(&b.fixed_point).map(|(x, y)| x - y).collect::<Vec<_>>());
        let positive = [&a, &b].iter().all(|r| r.classification == Classification::PeriodicPositive);
        let extinct = [&c, &d].iter().all(|r| r.classification == Classification::Extinction);
        let mut out = vec![VerifyRow::flag(
            "orbit_extinction_above",
            extinct,
            rep.theta_star + 0.1,
            format!("{} / {}", c.classification, d.classification),
        )];
        if positive {
            out.insert(0, VerifyRow::bound("orbit_unique_below", gap, 1e-7, "two starts, same periodic orbit"));
        } else {
            out.insert(
                0,
                VerifyRow::flag(
                    "orbit_unique_below",
                    false,
                    gap,
                    format!("{} / {}", a.classification, b.classification),
                ),
            );
        }
        Ok(out)
    }));

    rows.extend(guard("time_scaling", || {
        let th = s.theta.unwrap_or(0.5);
        let rep = timescale_asymptotics(&lin, th, &[1.0, 2.0, 4.0, 8.0, 16.0, 32.0])?;
        let last = *rep.distance_to_limit.last().unwrap_or(&f64::NAN);
        Ok(vec![
            VerifyRow::flag(
                "time_scaling_limit",
                timescale_converges(&rep.distance_to_limit, 1e-4),
                last,
                format!("limit correction {:.6e}", rep.limit_correction),
            ),
            VerifyRow::bound("time_scaling_small_period", (rep.rho_small_period - 1.0).abs(), 1e-5, "T = 1e-6"),
        ])
    }));

    rows.extend(guard("split_invariance", || {
        if !cond_a {
            return Ok(vec![VerifyRow::skip("split_invariance", "condition A does not hold")]);
        }
        let (m1, m2) = (lin.m1().scale(lin.period()), lin.m2().scale(lin.period()));
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let th = s.theta.unwrap_or(0.5);
        let vals: Vec<f64> = (0..100)
            .map(|i| split_rho(&m1, &m2, &SplitSchedule::random(th, 1 + i % 4, &mut rng)?))
            .collect::<Result<_>>()?;
        let (lo, hi) = vals.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
        Ok(vec![VerifyRow::bound("split_invariance", (hi - lo) / hi, 1e-9, "relative spread, 100 schedules")])
    }));

    rows.extend(guard("gelfand_probe", || {
        let (m1, m2) = (lin.m1().scale(lin.period()), lin.m2().scale(lin.period()));
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(1));
        let scheds: Vec<SplitSchedule> = (0..200)
            .map(|i| SplitSchedule::random(rng.gen_range(0.0..=1.0), 1 + i % 4, &mut rng))
            .collect::<Result<_>>()?;
        let rep = gelfand_bound_probe(&m1, &m2, &scheds)?;
        Ok(vec![VerifyRow::flag(
            "gelfand_probe",
            rep.violations.is_empty(),
            rep.violations.len() as f64,
            format!("max excess {:.3e} over 200 schedules", rep.max_excess),
        )])
    }));

    rows.extend(guard("lemma3_oracle", || {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(2));
        let mut mismatches = 0usize;
        for _ in 0..1000 {
            let m = Matrix::new(2, (0..4).map(|_| rng.gen_range(0.01..10.0)).collect())?;
            let r = lemma3_left_eigenvector_order(&m)?;
            if !r.boundary && r.via_eigen != r.via_inequality {
                mismatches += 1;
            }
        }
        Ok(vec![VerifyRow::bound("lemma3_oracle", mismatches as f64, 0.0, "1000 random positive 2x2 matrices")])
    }));

    let Some(pair) = s.insect else {
        for c in ["hyp4", "theorem3_certificate", "appendix_lemmas", "equilibrium_identity", "invariant_box"] {
            rows.push(VerifyRow::skip(c, "insect mode only"));
        }
        return Ok(rows);
    };
    let (u, f) = (pair.pi_u, pair.pi_f);

    rows.extend(guard("hyp4", || {
        let c = check_hyp_parameters(&u, &f)?;
        Ok(vec![VerifyRow::flag("hyp4", c.holds, c.min_margin(), "minimum margin")])
    }));

    rows.extend(guard("theorem3_certificate", || {
        let c = theorem3_certificate(&u, &f, s.period, &grid)?;
        let failed: Vec<&str> = c.stages.iter().filter(|st| !st.holds).map(|st| st.id.as_str()).collect();
        Ok(vec![VerifyRow::flag(
            "theorem3_certificate",
            c.holds,
            failed.len() as f64,
            if failed.is_empty() { "all stages hold".to_string() } else { format!("failed stages: {}", failed.join(" ")) },
        )])
    }));

    rows.extend(guard("appendix_lemmas", || {
        let samples = default_samples(2, seed);
        let mut worst: Option<String> = None;
        for th in [0.25, 0.5, 0.75] {
            let rep = verify_appendix_lemmas(&s.system(th)?, &samples, &s.sim_options())?;
            if !rep.all_pass() && worst.is_none() {
                worst = Some(format!("theta = {th}: {rep:?}"));
            }
        }
        Ok(vec![VerifyRow::flag(
            "appendix_lemmas",
            worst.is_none(),
            3.0,
            worst.unwrap_or_else(|| "A1-A4 pass at theta = 0.25, 0.5, 0.75".into()),
        )])
    }));

    rows.extend(guard("equilibrium_identity", || {
        let mut worst = 0.0f64;
        let mut checked = 0;
        for pi in [&u, &f] {
            if let Some(s1) = insect::equilibria(pi)?.s1 {
                let r = insect::vector_field(pi, s1.state);
                worst = worst.max(norm2(&r) / (1.0 + norm2(&s1.state.to_vec())));
                checked += 1;
            }
        }
        if checked == 0 {
            return Ok(vec![VerifyRow::skip("equilibrium_identity", "no season has R0 > 1")]);
        }
        Ok(vec![VerifyRow::bound("equilibrium_identity", worst, 1e-12, "relative field residual at S1")])
    }));

    rows.extend(guard("invariant_box", || {
        let bx = match insect::invariant_box(&[u, f]) {
            Ok(b) => b,
            Err(e) => return Ok(vec![VerifyRow::skip("invariant_box", e.to_string())]),
        };
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(3));
        let mut exits = 0usize;
        for _ in 0..20 {
            let th = rng.gen_range(0.0..=1.0);
            let x0 = InsectState::new(rng.gen_range(0.0..5.0), rng.gen_range(0.0..5.0));
            let l = bx.size_containing(x0);
            let traj = integrate(&s.system(th)?, &x0.to_vec(), 0.0, 5.0 * s.period, &s.sim_options())?;
            if traj.states.iter().any(|x| !bx.contains(l, InsectState::new(x[0], x[1]), 1e-8)) {
                exits += 1;
            }
        }
        Ok(vec![VerifyRow::bound("invariant_box", exits as f64, 0.0, "20 random trajectories over 5 periods")])
    }));

    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn convergence_rule() {
        assert!(timescale_converges(&[1e-2, 1e-3, 1e-5], 1e-4));
        assert!(!timescale_converges(&[1e-2, 1e-1, 1e-5], 1e-4));
        assert!(timescale_converges(&[0.0, 1e-15, 0.0], 1e-4));
        assert!(!timescale_converges(&[1e-2, 1e-3], 1e-4));
    }

    #[test]
    fn suite_on_commuting_matrices() {
        let s = Scenario::from_json(
            r#"{"mode": "matrices", "matrices": {"m1": [[-2, 1], [1, -2]], "m2": [[1, 2], [2, 1]]}, "theta_grid": 11}"#,
        )
        .unwrap();
        let rows = verify_suite(&s, 0).unwrap();
        for r in &rows {
            assert!(matches!(r.status, CheckStatus::Pass | CheckStatus::Skip), "{r:?}");
        }
        assert!(rows.iter().any(|r| r.check == "condition_a_closed_form" && r.status == CheckStatus::Pass));
    }
}
