//! Fixed-step RK4 integration of seasonal systems, Poincaré maps, periodic
//! orbits and the dichotomy between extinction and a positive periodic orbit.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::linalg::{norm2, perron_pair, spectral_radius, Matrix, Vector, DEFAULT_PERRON_MAX_ITER, DEFAULT_PERRON_TOL};
use crate::seasonal::{strictly_below, SeasonalSystem};

pub const DEFAULT_STEPS_PER_PERIOD: usize = 2000;
pub const DEFAULT_EXTINCTION_THRESHOLD: f64 = 1e-9;
pub const DEFAULT_EXTINCTION_PERIODS: usize = 3;
pub const DEFAULT_DIVERGENCE_BOUND: f64 = 1e9;
pub const DEFAULT_MAX_PERIODS: usize = 2000;
pub const DEFAULT_ORBIT_TOL: f64 = 1e-11;
/// Negative excursions below this are counted when clamping.
pub const CLAMP_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimOptions {
    /// Explicit step; `None` means `period / steps_per_period`.
    pub step: Option<f64>,
    pub steps_per_period: usize,
    pub extinction_threshold: f64,
    pub extinction_periods: usize,
    pub divergence_bound: f64,
    /// Replace negative components by zero after every step.
    pub clamp: bool,
}

impl Default for SimOptions {
    fn default() -> Self {
        Self {
            step: None,
            steps_per_period: DEFAULT_STEPS_PER_PERIOD,
            extinction_threshold: DEFAULT_EXTINCTION_THRESHOLD,
            extinction_periods: DEFAULT_EXTINCTION_PERIODS,
            divergence_bound: DEFAULT_DIVERGENCE_BOUND,
            clamp: true,
        }
    }
}

impl SimOptions {
    pub fn step_for(&self, period: f64) -> f64 {
        self.step.unwrap_or(period / self.steps_per_period as f64)
    }

    fn validate(&self, period: f64) -> Result<()> {
        let h = self.step_for(period);
        if !(h.is_finite() && h > 0.0) {
            return Err(invalid(format!("integration step must be positive, got {h}")));
        }
        if !(self.divergence_bound > 0.0 && self.extinction_threshold >= 0.0) {
            return Err(invalid("thresholds must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<Vector>,
    pub season_tags: Vec<usize>,
    /// Components that fell below `-CLAMP_TOL` and were reset to zero.
    pub clamped: usize,
    /// Integration stopped at the divergence bound.
    pub diverged: bool,
}

impl Trajectory {
    pub fn last(&self) -> &[f64] {
        self.states.last().map(|v| v.as_slice()).unwrap_or(&[])
    }
}

/// Breakpoint-aligned segments `(a, b, season)` covering `[t0, t1]`.
fn segments(system: &SeasonalSystem, t0: f64, t1: f64) -> Vec<(f64, f64, usize)> {
    let sched = system.schedule();
    let period = sched.period();
    let mut pts = vec![t0];
    let n0 = (t0 / period).floor() as i64;
    let n1 = (t1 / period).ceil() as i64;
    for n in n0..=n1 {
        for &b in sched.breakpoints() {
            let t = (n as f64 + b) * period;
            if t > t0 && t < t1 {
                pts.push(t);
            }
        }
    }
    pts.push(t1);
    pts.sort_by(|a, b| a.total_cmp(b));
    let eps = 1e-13 * period.max(t1.abs());
    pts.dedup_by(|b, a| (*b - *a).abs() <= eps);
    if let Some(last) = pts.last_mut() {
        *last = t1;
    }
    pts.windows(2)
        .filter(|w| w[1] > w[0])
        .map(|w| {
            let mid = 0.5 * (w[0] + w[1]) / period;
            (w[0], w[1], sched.index_of_fraction(mid - mid.floor()))
        })
        .collect()
}

fn rk4(f: &dyn Fn(&[f64]) -> Vector, z: &[f64], h: f64) -> Vector {
    let k1 = f(z);
    let tmp: Vector = z.iter().zip(&k1).map(|(a, k)| a + 0.5 * h * k).collect();
    let k2 = f(&tmp);
    let tmp: Vector = z.iter().zip(&k2).map(|(a, k)| a + 0.5 * h * k).collect();
    let k3 = f(&tmp);
    let tmp: Vector = z.iter().zip(&k3).map(|(a, k)| a + h * k).collect();
    let k4 = f(&tmp);
    (0..z.len())
        .map(|i| z[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
        .collect()
}

/// Integrate the state (and optionally the tangent flow, stored row-major
/// after the state) from `t0` to `t1`, calling `record` after every step.
fn run(
    system: &SeasonalSystem,
    x0: &[f64],
    t0: f64,
    t1: f64,
    opts: &SimOptions,
    tangent: bool,
    mut record: impl FnMut(f64, &[f64], usize),
) -> Result<(Vector, usize)> {
    let n = system.dim();
    if x0.len() != n {
        return Err(invalid(format!("state has length {}, system dimension is {n}", x0.len())));
    }
    if x0.iter().any(|v| !v.is_finite()) {
        return Err(invalid("initial state must be finite"));
    }
    if !(t1 >= t0 && t0 >= 0.0) {
        return Err(invalid(format!("need 0 <= t0 <= t1, got [{t0}, {t1}]")));
    }
    opts.validate(system.period())?;
    let h_max = opts.step_for(system.period());
    let mut z = x0.to_vec();
    if tangent {
        z.extend(Matrix::identity(n).as_slice());
    }
    let mut clamped = 0;
    let segs = segments(system, t0, t1);
    record(t0, &z, segs.first().map(|s| s.2).unwrap_or(0));
    for (a, b, k) in segs {
        let piece = system.piece(k);
        let f = |z: &[f64]| -> Vector {
            let x = &z[..n];
            let mut out = piece.eval(x);
            if tangent {
                let j = piece.jacobian(x);
                let xm = &z[n..];
                for r in 0..n {
                    for c in 0..n {
                        out.push((0..n).map(|m| j[(r, m)] * xm[m * n + c]).sum());
                    }
                }
            }
            out
        };
        let steps = ((b - a) / h_max - 1e-9).ceil().max(1.0) as usize;
        let h = (b - a) / steps as f64;
        for s in 1..=steps {
            z = rk4(&f, &z, h);
            if opts.clamp {
                for v in z[..n].iter_mut() {
                    if *v < 0.0 {
                        if *v < -CLAMP_TOL {
                            clamped += 1;
                        }
                        *v = 0.0;
                    }
                }
            }
            let t = if s == steps { b } else { a + s as f64 * h };
            let norm = norm2(&z[..n]);
            if !(norm <= opts.divergence_bound) {
                return Err(Error::Divergence { time: t, norm });
            }
            record(t, &z, k);
        }
    }
    Ok((z, clamped))
}

/// RK4 trajectory on `[t0, t1]` with every season boundary as a sample
/// point. Divergence truncates the trajectory and sets `diverged`.
pub fn integrate(system: &SeasonalSystem, x0: &[f64], t0: f64, t1: f64, opts: &SimOptions) -> Result<Trajectory> {
    if x0.iter().any(|&v| v < 0.0) {
        return Err(invalid("initial state must be nonnegative"));
    }
    let mut traj = Trajectory { times: vec![], states: vec![], season_tags: vec![], clamped: 0, diverged: false };
    let res = run(system, x0, t0, t1, opts, false, |t, z, k| {
        traj.times.push(t);
        traj.states.push(z.to_vec());
        traj.season_tags.push(k);
    });
    match res {
        Ok((_, clamped)) => traj.clamped = clamped,
        Err(Error::Divergence { .. }) => traj.diverged = true,
        Err(e) => return Err(e),
    }
    Ok(traj)
}

/// State after one period starting at `t = 0`.
pub fn poincare_map(system: &SeasonalSystem, x: &[f64], opts: &SimOptions) -> Result<Vector> {
    Ok(run(system, x, 0.0, system.period(), opts, false, |_, _, _| {})?.0)
}

/// `P(x)` together with `DP(x)` from the variational equation `X' = DF(x(t)) X`.
pub fn poincare_with_jacobian(system: &SeasonalSystem, x: &[f64], opts: &SimOptions) -> Result<(Vector, Matrix)> {
    let n = system.dim();
    let (z, _) = run(system, x, 0.0, system.period(), opts, true, |_, _, _| {})?;
    Ok((z[..n].to_vec(), Matrix::new(n, z[n..].to_vec())?))
}

pub fn poincare_jacobian(system: &SeasonalSystem, x: &[f64], opts: &SimOptions) -> Result<Matrix> {
    Ok(poincare_with_jacobian(system, x, opts)?.1)
}

/// `rho(DP(0))`, the Floquet multiplier of the zero solution.
pub fn multiplier(system: &SeasonalSystem, opts: &SimOptions) -> Result<f64> {
    let dp = poincare_jacobian(system, &vec![0.0; system.dim()], opts)?;
    match perron_pair(&dp, DEFAULT_PERRON_TOL, DEFAULT_PERRON_MAX_ITER) {
        Ok(p) => Ok(p.rho),
        Err(_) => spectral_radius(&dp),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Classification {
    Extinction,
    PeriodicPositive,
    /// Norm crossed the divergence bound; a heuristic stand-in for unbounded growth.
    Divergent,
    Undecided,
}

impl std::fmt::Display for Classification {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Classification::Extinction => "extinction",
            Classification::PeriodicPositive => "periodic_positive",
            Classification::Divergent => "divergent",
            Classification::Undecided => "undecided",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoincareResult {
    pub fixed_point: Vector,
    /// `|P(q) - q|` at the returned point.
    pub residual: f64,
    pub iterations: usize,
    pub classification: Classification,
    pub multiplier_lambda: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrbitOptions {
    pub tol: f64,
    pub max_periods: usize,
    pub sim: SimOptions,
}

impl Default for OrbitOptions {
    fn default() -> Self {
        Self { tol: DEFAULT_ORBIT_TOL, max_periods: DEFAULT_MAX_PERIODS, sim: SimOptions::default() }
    }
}

/// Picard iteration of the Poincaré map from `x0`.
pub fn find_periodic_orbit(system: &SeasonalSystem, x0: &[f64], opts: &OrbitOptions) -> Result<PoincareResult> {
    if x0.iter().any(|&v| !(v >= 0.0)) {
        return Err(invalid("initial state must be nonnegative"));
    }
    if !(opts.tol > 0.0) {
        return Err(invalid("orbit tolerance must be positive"));
    }
    let lambda = multiplier(system, &opts.sim)?;
    let done = |x: Vector, residual: f64, iterations: usize, classification: Classification| PoincareResult {
        fixed_point: x,
        residual,
        iterations,
        classification,
        multiplier_lambda: lambda,
    };
    let mut x = x0.to_vec();
    let mut small = 0;
    for it in 1..=opts.max_periods {
        let next = match poincare_map(system, &x, &opts.sim) {
            Ok(v) => v,
            Err(Error::Divergence { .. }) => return Ok(done(x, f64::INFINITY, it, Classification::Divergent)),
            Err(e) => return Err(e),
        };
        let jump = norm2(&next.iter().zip(&x).map(|(a, b)| a - b).collect::<Vec<_>>());
        x = next;
        let norm = norm2(&x);
        if norm < opts.sim.extinction_threshold {
            small += 1;
            if small >= opts.sim.extinction_periods {
                return Ok(done(x, jump, it, Classification::Extinction));
            }
            continue;
        }
        small = 0;
        if jump <= opts.tol * norm.max(1.0) && x.iter().all(|&v| v > 0.0) {
            let again = poincare_map(system, &x, &opts.sim)?;
            let residual = norm2(&again.iter().zip(&x).map(|(a, b)| a - b).collect::<Vec<_>>());
            if residual <= opts.tol * norm.max(1.0) {
                return Ok(done(x, residual, it, Classification::PeriodicPositive));
            }
        }
    }
    Ok(done(x, f64::NAN, opts.max_periods, Classification::Undecided))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalThreshold {
    pub theta_star: f64,
    pub grid: Vec<f64>,
    pub grid_classes: Vec<Classification>,
    /// Bisection probes with their classifications, in order.
    pub probes: Vec<(f64, Classification)>,
    /// Refinement stopped because a probe could not be classified.
    pub stopped_on_undecided: bool,
}

fn persistent(c: Classification) -> Option<bool> {
    match c {
        Classification::PeriodicPositive | Classification::Divergent => Some(true),
        Classification::Extinction => Some(false),
        Classification::Undecided => None,
    }
}

/// Boundary between persistence and extinction over a family of systems
/// indexed by `theta`, located on `grid` and refined by bisection to `tol`.
pub fn empirical_threshold<F>(
    family: F,
    grid: &[f64],
    x0: &[f64],
    tol: f64,
    opts: &OrbitOptions,
) -> Result<EmpiricalThreshold>
where
    F: Fn(f64) -> Result<SeasonalSystem> + Sync,
{
    if grid.len() < 3 {
        return Err(invalid("empirical threshold needs at least 3 grid points"));
    }
    if grid.windows(2).any(|w| !(w[1] > w[0])) || grid.iter().any(|t| !(0.0..=1.0).contains(t)) {
        return Err(invalid("grid must be increasing inside [0, 1]"));
    }
    let classify = |th: f64| -> Result<Classification> {
        Ok(find_periodic_orbit(&family(th)?, x0, opts)?.classification)
    };
    let grid_classes: Vec<Classification> = grid.par_iter().map(|&th| classify(th)).collect::<Result<_>>()?;
    let known: Vec<(usize, bool)> = grid_classes
        .iter()
        .enumerate()
        .filter_map(|(i, c)| persistent(*c).map(|p| (i, p)))
        .collect();
    if let Some(w) = known.windows(2).find(|w| !w[0].1 && w[1].1) {
        return Err(Error::Inconsistent(format!(
            "extinction at theta = {} but persistence at larger theta = {}",
            grid[w[0].0], grid[w[1].0]
        )));
    }
    let mut out = EmpiricalThreshold {
        theta_star: 0.0,
        grid: grid.to_vec(),
        grid_classes: grid_classes.clone(),
        probes: vec![],
        stopped_on_undecided: false,
    };
    let last_p = known.iter().rev().find(|k| k.1).map(|k| k.0);
    let first_e = known.iter().find(|k| !k.1).map(|k| k.0);
    let (mut lo, mut hi) = match (last_p, first_e) {
        (None, None) => return Err(Error::Inconsistent("no grid point could be classified".into())),
        (Some(_), None) => {
            out.theta_star = 1.0;
            return Ok(out);
        }
        (None, Some(_)) => return Ok(out),
        (Some(p), Some(e)) => (grid[p], grid[e]),
    };
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        let c = classify(mid)?;
        out.probes.push((mid, c));
        match persistent(c) {
            Some(true) => lo = mid,
            Some(false) => hi = mid,
            None => {
                out.stopped_on_undecided = true;
                out.theta_star = mid;
                return Ok(out);
            }
        }
    }
    out.theta_star = 0.5 * (lo + hi);
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LemmaStatus {
    Pass,
    /// Holds only with equality where a strict inequality is expected.
    Boundary,
    Fail,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LemmaCheck {
    pub status: LemmaStatus,
    pub worst_margin: f64,
    pub cases: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AppendixReport {
    /// Nonnegative states stay nonnegative.
    pub a1_nonnegativity: LemmaCheck,
    /// `y << x` implies `P(y) << P(x)`.
    pub a2_order: LemmaCheck,
    /// `DP(0) >> 0` and `DP(x) >= 0`.
    pub a3_positive_jacobian: LemmaCheck,
    /// `0 << x << y` implies `DP(y) <= DP(x)` with some entry strictly smaller.
    pub a4_concavity: LemmaCheck,
}

impl AppendixReport {
    pub fn all_pass(&self) -> bool {
        [&self.a1_nonnegativity, &self.a2_order, &self.a3_positive_jacobian, &self.a4_concavity]
            .iter()
            .all(|c| c.status == LemmaStatus::Pass)
    }
}

pub const STRICT_TOL: f64 = 1e-9;

fn status(margin: f64, strict: bool) -> LemmaStatus {
    if margin > if strict { STRICT_TOL } else { -CLAMP_TOL } {
        LemmaStatus::Pass
    } else if margin >= -STRICT_TOL {
        LemmaStatus::Boundary
    } else {
        LemmaStatus::Fail
    }
}

/// Numerical check of the monotonicity, positivity and concavity lemmas on
/// one period. Runs without clamping so sign violations are visible.
pub fn verify_appendix_lemmas(system: &SeasonalSystem, samples: &[Vector], opts: &SimOptions) -> Result<AppendixReport> {
    let n = system.dim();
    if samples.iter().any(|x| x.len() != n || x.iter().any(|&v| !(v >= 0.0))) {
        return Err(invalid("samples must be nonnegative states of the system dimension"));
    }
    let raw = SimOptions { clamp: false, ..*opts };
    let runs: Vec<(f64, Vector, Matrix)> = samples
        .par_iter()
        .map(|x| {
            let mut lowest = f64::INFINITY;
            run(system, x, 0.0, system.period(), &raw, false, |_, z, _| {
                lowest = z.iter().copied().fold(lowest, f64::min);
            })?;
            let (px, dp) = poincare_with_jacobian(system, x, &raw)?;
            Ok((lowest, px, dp))
        })
        .collect::<Result<_>>()?;

    let a1 = runs.iter().map(|r| r.0).fold(f64::INFINITY, f64::min);

    let mut a2 = f64::INFINITY;
    let mut a4 = f64::INFINITY;
    let mut a4_violation = f64::INFINITY;
    let (mut n2, mut n4) = (0, 0);
    for (i, y) in samples.iter().enumerate() {
        for (j, x) in samples.iter().enumerate() {
            if i == j || !strictly_below(y, x) {
                continue;
            }
            n2 += 1;
            let d = runs[j].1.iter().zip(&runs[i].1).map(|(a, b)| a - b).fold(f64::INFINITY, f64::min);
            a2 = a2.min(d);
            if y.iter().all(|&v| v > 0.0) {
                // y plays x and x plays y: DP(x) - DP(y) for 0 << y << x must be <= 0
                n4 += 1;
                let diff = &runs[i].2 - &runs[j].2;
                a4 = a4.min(diff.max_entry());
                a4_violation = a4_violation.min(diff.min_entry());
            }
        }
    }

    let zero = poincare_jacobian(system, &vec![0.0; n], &raw)?;
    let a3 = runs.iter().map(|r| r.2.min_entry()).fold(zero.min_entry(), f64::min);
    let a3_strict = zero.min_entry();

    let a4_status = if n4 == 0 {
        LemmaStatus::Boundary
    } else if a4_violation < -STRICT_TOL {
        LemmaStatus::Fail
    } else {
        status(a4, true)
    };
    Ok(AppendixReport {
        a1_nonnegativity: LemmaCheck { status: status(a1, false), worst_margin: a1, cases: samples.len() },
        a2_order: LemmaCheck {
            status: if n2 == 0 { LemmaStatus::Boundary } else { status(a2, true) },
            worst_margin: a2,
            cases: n2,
        },
        a3_positive_jacobian: LemmaCheck {
            status: if a3_strict > STRICT_TOL && a3 >= -CLAMP_TOL { LemmaStatus::Pass } else { status(a3.min(a3_strict), true) },
            worst_margin: a3.min(a3_strict),
            cases: samples.len() + 1,
        },
        a4_concavity: LemmaCheck {
            status: a4_status,
            worst_margin: if a4_violation < -STRICT_TOL { a4_violation } else { a4 },
            cases: n4,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::floquet::TwoSeasonLinearization;
    use crate::insect::{as_seasonal_system, InsectParams};
    use crate::seasonal::SeasonalSchedule;

    fn pi_u() -> InsectParams {
        InsectParams::new(1.0, 0.5, 1.0, 1.0, 1.0).unwrap()
    }

    fn pi_f() -> InsectParams {
        InsectParams::new(2.0, 1.0, 0.5, 1.0, 0.5).unwrap()
    }

    fn insect(theta: f64) -> SeasonalSystem {
        as_seasonal_system(&pi_u(), &pi_f(), theta, 1.0).unwrap()
    }

    #[test]
    fn zero_stays_zero() {
        let tr = integrate(&insect(0.4), &[0.0, 0.0], 0.0, 3.0, &SimOptions::default()).unwrap();
        assert!(tr.states.iter().all(|s| s == &vec![0.0, 0.0]));
        assert_eq!(poincare_map(&insect(0.4), &[0.0, 0.0], &SimOptions::default()).unwrap(), vec![0.0, 0.0]);
    }

    #[test]
    fn boundaries_are_sample_points() {
        let tr = integrate(&insect(0.4), &[1.0, 1.0], 0.0, 2.5, &SimOptions::default()).unwrap();
        for b in [0.4, 1.0, 1.4, 2.0, 2.4, 2.5] {
            assert!(tr.times.contains(&b), "missing {b}");
        }
        assert!(tr.times.windows(2).all(|w| w[1] > w[0]));
        // a boundary sample closes the season that just ended
        let i = tr.times.iter().position(|&t| t == 1.0).unwrap();
        assert_eq!(tr.season_tags[i], 1);
        assert_eq!(tr.season_tags[i + 1], 0);
        let j = tr.times.iter().position(|&t| t == 1.4).unwrap();
        assert_eq!(tr.season_tags[j + 1], 1);
    }

    #[test]
    fn favorable_system_reaches_steady_state() {
        let tr = integrate(&insect(0.0), &[1.0, 1.0], 0.0, 150.0, &SimOptions::default()).unwrap();
        let x = tr.last();
        assert!((x[0] - 2.5).abs() < 1e-6 && (x[1] - 5.0).abs() < 1e-6, "{x:?}");
    }

    #[test]
    fn scalar_decay() {
        let sys = SeasonalSystem::linear(
            SeasonalSchedule::new(1.0, vec![0.0, 1.0]).unwrap(),
            vec![Matrix::from_rows(&[[-1.0]]).unwrap()],
        )
        .unwrap();
        let opts = SimOptions { step: Some(0.1), ..Default::default() };
        let tr = integrate(&sys, &[2.0], 0.0, 1.5, &opts).unwrap();
        assert!((tr.last()[0] - 2.0 * (-1.5f64).exp()).abs() < 1e-6);
    }

    #[test]
    fn poincare_jacobian_matches_monodromy() {
        let lin = TwoSeasonLinearization::new(
            Matrix::from_rows(&[[-1.5, 1.0], [0.5, -1.0]]).unwrap(),
            Matrix::from_rows(&[[-1.5, 2.0], [1.0, -0.5]]).unwrap(),
            1.0,
        )
        .unwrap();
        let dp = poincare_jacobian(&insect(0.3), &[0.0, 0.0], &SimOptions::default()).unwrap();
        assert!((&dp - &lin.monodromy(0.3).unwrap()).max_abs() < 1e-6);
        assert!(dp.min_entry() > 0.0);
    }

    #[test]
    fn single_season_poincare() {
        let sys = insect(0.0);
        let p = poincare_map(&sys, &[1.0, 2.0], &SimOptions::default()).unwrap();
        let f_only = as_seasonal_system(&pi_f(), &pi_f(), 0.7, 1.0).unwrap();
        let q = poincare_map(&f_only, &[1.0, 2.0], &SimOptions::default()).unwrap();
        assert!((p[0] - q[0]).abs() < 1e-12 && (p[1] - q[1]).abs() < 1e-12);
    }

    #[test]
    fn orbit_below_threshold_is_unique_and_positive() {
        let sys = insect(0.4);
        let opts = OrbitOptions::default();
        let a = find_periodic_orbit(&sys, &[0.1, 0.1], &opts).unwrap();
        let b = find_periodic_orbit(&sys, &[5.0, 5.0], &opts).unwrap();
        assert_eq!(a.classification, Classification::PeriodicPositive);
        assert_eq!(b.classification, Classification::PeriodicPositive);
        assert!(a.fixed_point.iter().all(|&v| v > 0.0));
        assert!(a.fixed_point.iter().zip(&b.fixed_point).all(|(x, y)| (x - y).abs() < 1e-7));
        assert!(a.multiplier_lambda > 1.0);
    }

    #[test]
    fn orbit_above_threshold_goes_extinct() {
        let r = find_periodic_orbit(&insect(0.6), &[5.0, 5.0], &OrbitOptions::default()).unwrap();
        assert_eq!(r.classification, Classification::Extinction);
        assert!(norm2(&r.fixed_point) < DEFAULT_EXTINCTION_THRESHOLD);
        assert!(r.multiplier_lambda < 1.0);
    }

    #[test]
    fn divergence_is_reported() {
        let sys = SeasonalSystem::linear(
            SeasonalSchedule::new(1.0, vec![0.0, 1.0]).unwrap(),
            vec![Matrix::from_rows(&[[5.0, 1.0], [1.0, 5.0]]).unwrap()],
        )
        .unwrap();
        let r = find_periodic_orbit(&sys, &[1.0, 1.0], &OrbitOptions::default()).unwrap();
        assert_eq!(r.classification, Classification::Divergent);
        let tr = integrate(&sys, &[1.0, 1.0], 0.0, 100.0, &SimOptions::default()).unwrap();
        assert!(tr.diverged);
        assert!(*tr.times.last().unwrap() < 100.0);
    }

    #[test]
    fn empirical_threshold_edges() {
        let opts = OrbitOptions::default();
        let grid = [0.0, 0.5, 1.0];
        let always = |_: f64| {
            as_seasonal_system(&pi_f(), &pi_f(), 0.5, 1.0)
        };
        let r = empirical_threshold(always, &grid, &[1.0, 1.0], 0.01, &opts).unwrap();
        assert_eq!(r.theta_star, 1.0);
        let never = |_: f64| as_seasonal_system(&pi_u(), &pi_u(), 0.5, 1.0);
        let r = empirical_threshold(never, &grid, &[1.0, 1.0], 0.01, &opts).unwrap();
        assert_eq!(r.theta_star, 0.0);
        assert!(empirical_threshold(never, &[0.0, 1.0], &[1.0, 1.0], 0.01, &opts).is_err());
    }

    #[test]
    fn flow_properties_on_insect_system() {
        let samples = vec![
            vec![0.0, 0.0],
            vec![0.0, 1.0],
            vec![1.0, 0.0],
            vec![0.5, 0.5],
            vec![1.0, 2.0],
            vec![3.0, 4.0],
        ];
        let rep = verify_appendix_lemmas(&insect(0.5), &samples, &SimOptions::default()).unwrap();
        assert!(rep.all_pass(), "{rep:?}");
        assert!(rep.a4_concavity.cases >= 2);
    }

    #[test]
    fn flow_properties_linear_is_boundary() {
        let a = Matrix::from_rows(&[[-1.0, 1.0], [1.0, -1.0]]).unwrap();
        let sys = SeasonalSystem::linear(SeasonalSchedule::two_season(1.0, 0.5).unwrap(), vec![a.clone(), a]).unwrap();
        let samples = vec![vec![0.5, 0.5], vec![1.0, 2.0]];
        let rep = verify_appendix_lemmas(&sys, &samples, &SimOptions::default()).unwrap();
        assert_eq!(rep.a4_concavity.status, LemmaStatus::Boundary);
        assert_eq!(rep.a2_order.status, LemmaStatus::Pass);
    }

    #[test]
    fn flow_properties_catch_non_metzler() {
        let a = Matrix::from_rows(&[[-1.0, -3.0], [0.0, -1.0]]).unwrap();
        let sys = SeasonalSystem::linear(SeasonalSchedule::new(1.0, vec![0.0, 1.0]).unwrap(), vec![a]).unwrap();
        let samples = vec![vec![0.1, 0.1], vec![0.2, 0.2]];
        let rep = verify_appendix_lemmas(&sys, &samples, &SimOptions::default()).unwrap();
        assert_eq!(rep.a2_order.status, LemmaStatus::Fail);
        assert!(!rep.all_pass());
    }

    #[test]
    fn step_halving_order() {
        let sys = insect(0.4);
        let p = |h: f64| poincare_map(&sys, &[1.0, 2.0], &SimOptions { step: Some(h), ..Default::default() }).unwrap();
        let (a, b, c) = (p(0.1), p(0.05), p(0.025));
        let d1 = norm2(&[a[0] - b[0], a[1] - b[1]]);
        let d2 = norm2(&[b[0] - c[0], b[1] - c[1]]);
        let order = (d1 / d2).log2();
        assert!((3.5..=4.5).contains(&order), "{order}");
    }
}
