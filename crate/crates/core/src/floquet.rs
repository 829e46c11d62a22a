//! Two-season Floquet analysis of the linearization at zero.
//!
//! The monodromy over one period is `M(theta) = e^{(1-theta) T M2} e^{theta T M1}`:
//! the unfavorable season (`M1`) comes first, so its exponential is the
//! rightmost factor.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::linalg::{
    dot, is_irreducible, is_metzler, mat_exp, metzler_perron, norm2, perron_pair, Lu, Matrix, MetzlerPerron,
    PerronPair, Vector, DEFAULT_EXP_TOL, DEFAULT_PERRON_MAX_ITER, DEFAULT_PERRON_TOL,
};
use crate::seasonal::SeasonalSystem;

pub const DEFAULT_BISECT_TOL: f64 = 1e-10;
pub const DEFAULT_BISECT_MAX_ITER: usize = 200;
pub const DEFAULT_CERTIFICATE_POINTS: usize = 101;

/// Tolerances shared by every evaluation on a linearization.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FloquetOptions {
    pub perron_tol: f64,
    pub perron_max_iter: usize,
    pub exp_tol: f64,
}

impl Default for FloquetOptions {
    fn default() -> Self {
        Self {
            perron_tol: DEFAULT_PERRON_TOL,
            perron_max_iter: DEFAULT_PERRON_MAX_ITER,
            exp_tol: DEFAULT_EXP_TOL,
        }
    }
}

/// `M1 = DF^1(0)` (unfavorable), `M2 = DF^2(0)` (favorable), period `T`.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoSeasonLinearization {
    m1: Matrix,
    m2: Matrix,
    period: f64,
    s: Matrix,
    opts: FloquetOptions,
}

fn check_fraction(theta: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&theta) {
        return Err(invalid(format!("theta must lie in [0, 1], got {theta}")));
    }
    Ok(())
}

impl TwoSeasonLinearization {
    pub fn new(m1: Matrix, m2: Matrix, period: f64) -> Result<Self> {
        if m1.n() != m2.n() {
            return Err(invalid(format!("season matrices differ in size: {} vs {}", m1.n(), m2.n())));
        }
        if !(period.is_finite() && period > 0.0) {
            return Err(invalid(format!("period must be positive, got {period}")));
        }
        for (name, m) in [("m1", &m1), ("m2", &m2)] {
            if !m.is_finite() {
                return Err(invalid(format!("{name} has non-finite entries")));
            }
            if !is_metzler(m) || !is_irreducible(m) {
                return Err(Error::Structure(format!("{name} must be Metzler and irreducible")));
            }
        }
        let s = &m1 - &m2;
        Ok(Self { m1, m2, period, s, opts: FloquetOptions::default() })
    }

    pub fn with_options(mut self, opts: FloquetOptions) -> Self {
        self.opts = opts;
        self
    }

    /// Same season matrices over a different period.
    pub fn with_period(&self, period: f64) -> Result<Self> {
        Ok(Self::new(self.m1.clone(), self.m2.clone(), period)?.with_options(self.opts))
    }

    pub fn m1(&self) -> &Matrix {
        &self.m1
    }

    pub fn m2(&self) -> &Matrix {
        &self.m2
    }

    pub fn s(&self) -> &Matrix {
        &self.s
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn dim(&self) -> usize {
        self.m1.n()
    }

    pub fn options(&self) -> &FloquetOptions {
        &self.opts
    }

    pub fn monodromy(&self, theta: f64) -> Result<Matrix> {
        check_fraction(theta)?;
        let t = self.period;
        let e2 = mat_exp(&self.m2.scale((1.0 - theta) * t), self.opts.exp_tol)?;
        let e1 = mat_exp(&self.m1.scale(theta * t), self.opts.exp_tol)?;
        Ok(&e2 * &e1)
    }

    /// Spectral radius of the monodromy with its Perron pair.
    pub fn rho(&self, theta: f64) -> Result<PerronPair> {
        let m = self.monodromy(theta)?;
        perron_pair(&m, self.opts.perron_tol, self.opts.perron_max_iter)
    }

    /// `rho'(theta) = T rho <S V, V*>`.
    pub fn rho_prime(&self, theta: f64) -> Result<f64> {
        let p = self.rho(theta)?;
        Ok(self.rho_prime_from(&p))
    }

    fn rho_prime_from(&self, p: &PerronPair) -> f64 {
        self.period * p.rho * dot(&self.s.mul_vec(&p.v), &p.v_star)
    }

    /// Second derivative through the adjoint constrained resolvent:
    ///
    /// ```text
    /// rho''/(T^2 rho) = 2 <SV,V*>^2 + <(M2 S - S M1) V, V*> + 2 rho <Ma (Pi - I) S^T V*, SV>
    /// ```
    ///
    /// with `Pi y = V* <V, y>`.
    pub fn rho_second(&self, theta: f64) -> Result<f64> {
        let m = self.monodromy(theta)?;
        let p = perron_pair(&m, self.opts.perron_tol, self.opts.perron_max_iter)?;
        self.rho_second_from(&m, &p)
    }

    fn rho_second_from(&self, m: &Matrix, p: &PerronPair) -> Result<f64> {
        let sv = self.s.mul_vec(&p.v);
        let r = dot(&sv, &p.v_star);
        let comm = &(&self.m2 * &self.s) - &(&self.s * &self.m1);
        let middle = dot(&comm.mul_vec(&p.v), &p.v_star);
        let st_vs = self.s.tr_mul_vec(&p.v_star);
        let b: Vector = p.v_star.iter().zip(&st_vs).map(|(vs, w)| r * vs - w).collect();
        let x = constrained_resolvent(m, p.rho, &p.v, &p.v_star, &b, Side::Adjoint)?;
        let last = 2.0 * p.rho * dot(&x, &sv);
        let t = self.period;
        Ok(t * t * p.rho * (2.0 * r * r + middle + last))
    }

    /// rho, rho' and rho'' at every grid point; evaluated in parallel.
    pub fn profile(&self, thetas: &[f64]) -> Result<RhoProfile> {
        let rows: Vec<(PerronPair, f64, f64)> = thetas
            .par_iter()
            .map(|&th| {
                let m = self.monodromy(th)?;
                let p = perron_pair(&m, self.opts.perron_tol, self.opts.perron_max_iter)?;
                let d1 = self.rho_prime_from(&p);
                let d2 = self.rho_second_from(&m, &p)?;
                Ok((p, d1, d2))
            })
            .collect::<Result<_>>()?;
        let mut out = RhoProfile {
            thetas: thetas.to_vec(),
            rho: Vec::with_capacity(rows.len()),
            rho_prime: Vec::with_capacity(rows.len()),
            rho_second: Vec::with_capacity(rows.len()),
            perron_pairs: Vec::with_capacity(rows.len()),
        };
        for (p, d1, d2) in rows {
            out.rho.push(p.rho);
            out.rho_prime.push(d1);
            out.rho_second.push(d2);
            out.perron_pairs.push(p);
        }
        Ok(out)
    }

    pub fn mu1(&self) -> Result<MetzlerPerron> {
        metzler_perron(&self.m1, self.opts.perron_tol, self.opts.perron_max_iter)
    }

    pub fn mu2(&self) -> Result<MetzlerPerron> {
        metzler_perron(&self.m2, self.opts.perron_tol, self.opts.perron_max_iter)
    }
}

/// Ordered product of per-season exponentials; season 1 is the rightmost factor.
pub fn monodromy_general(system: &SeasonalSystem) -> Result<Matrix> {
    let sched = system.schedule();
    let mut m = Matrix::identity(system.dim());
    for (k, a) in system.linearizations().iter().enumerate() {
        let (lo, hi) = sched.window(k);
        let e = mat_exp(&a.scale((hi - lo) * sched.period()), DEFAULT_EXP_TOL)?;
        m = &e * &m;
    }
    Ok(m)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RhoProfile {
    pub thetas: Vec<f64>,
    pub rho: Vec<f64>,
    pub rho_prime: Vec<f64>,
    pub rho_second: Vec<f64>,
    pub perron_pairs: Vec<PerronPair>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Right,
    Adjoint,
}

/// Solve `(M - rho I) x = b` with `<v, x> = 0` (right side, needs `b ⟂ v_star`)
/// or `(M^T - rho I) x = b` with `<x, v> = 0` (adjoint side, needs `b ⟂ v`).
///
/// Uses the bordered system
///
/// ```text
/// [ M - rho I   c ] [x]   [b]
/// [ v^T         0 ] [a] = [0]
/// ```
///
/// with `c = v_star` on the right side and `c = v` on the adjoint side.
pub fn constrained_resolvent(
    m: &Matrix,
    rho: f64,
    v: &[f64],
    v_star: &[f64],
    b: &[f64],
    side: Side,
) -> Result<Vector> {
    let n = m.n();
    if v.len() != n || v_star.len() != n || b.len() != n {
        return Err(invalid("constrained_resolvent: dimension mismatch"));
    }
    let (ortho, border) = match side {
        Side::Right => (v_star, v_star),
        Side::Adjoint => (v, v),
    };
    let bn = norm2(b);
    if dot(b, ortho).abs() > 1e-9 * bn.max(1.0) * norm2(ortho).max(1.0) {
        return Err(invalid("right-hand side is not orthogonal to the Perron direction"));
    }
    if bn == 0.0 {
        return Ok(vec![0.0; n]);
    }
    // scale the border to the matrix so pivots stay comparable
    let w = m.norm_fro().max(rho.abs()).max(f64::MIN_POSITIVE);
    let cn = norm2(border);
    let rn = norm2(v);
    let m1 = n + 1;
    let mut a = vec![0.0; m1 * m1];
    for i in 0..n {
        for j in 0..n {
            let mij = match side {
                Side::Right => m[(i, j)],
                Side::Adjoint => m[(j, i)],
            };
            a[i * m1 + j] = mij - if i == j { rho } else { 0.0 };
        }
        a[i * m1 + n] = w * border[i] / cn;
        a[n * m1 + i] = w * v[i] / rn;
    }
    let lu = Lu::new(m1, a)?;
    if lu.pivot_ratio() < 1e-13 {
        return Err(Error::Conditioning(format!(
            "bordered resolvent is singular (pivot ratio {:e}); the Perron root is not simple",
            lu.pivot_ratio()
        )));
    }
    let mut rhs = b.to_vec();
    rhs.push(0.0);
    let sol = lu.solve(&rhs);
    let alpha = sol[n];
    if alpha.abs() * w > 1e-6 * bn.max(1.0) {
        return Err(Error::Conditioning(format!("bordered resolvent is inconsistent (multiplier {alpha:e})")));
    }
    Ok(sol[..n].to_vec())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    InteriorRoot,
    AlwaysExtinct,
    AlwaysPersistent,
}

impl std::fmt::Display for Regime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Regime::InteriorRoot => "interior_root",
            Regime::AlwaysExtinct => "always_extinct",
            Regime::AlwaysPersistent => "always_persistent",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdOptions {
    pub tol: f64,
    pub max_iter: usize,
    pub grid_points: usize,
    /// Run bisection even when rho fails the monotonicity certificate.
    pub override_certificate: bool,
}

impl Default for ThresholdOptions {
    fn default() -> Self {
        Self {
            tol: DEFAULT_BISECT_TOL,
            max_iter: DEFAULT_BISECT_MAX_ITER,
            grid_points: DEFAULT_CERTIFICATE_POINTS,
            override_certificate: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdReport {
    pub theta_star: f64,
    pub regime: Regime,
    pub monotone_certificate: bool,
    /// `(theta_lo, theta_hi)` with `rho(theta_lo) > 1 >= rho(theta_hi)`.
    pub bracket: Option<(f64, f64)>,
    pub rho_at_theta_star: f64,
    pub iterations: usize,
}

/// First grid cell where rho fails to decrease strictly or rho' is not negative.
pub fn monotone_certificate(lin: &TwoSeasonLinearization, points: usize) -> Result<Option<Error>> {
    if points < 2 {
        return Err(invalid("certificate grid needs at least 2 points"));
    }
    let grid = uniform_grid(points);
    let vals: Vec<(f64, f64)> = grid
        .par_iter()
        .map(|&th| {
            let p = lin.rho(th)?;
            Ok((p.rho, lin.rho_prime_from(&p)))
        })
        .collect::<Result<_>>()?;
    for i in 0..points {
        if !(vals[i].1 < 0.0) {
            let (lo, hi) = if i + 1 < points { (grid[i], grid[i + 1]) } else { (grid[i - 1], grid[i]) };
            return Ok(Some(Error::Certificate {
                index: i.min(points - 2),
                theta_lo: lo,
                theta_hi: hi,
                reason: format!("rho'({}) = {:e} is not negative", grid[i], vals[i].1),
            }));
        }
        if i + 1 < points && !(vals[i + 1].0 < vals[i].0) {
            return Ok(Some(Error::Certificate {
                index: i,
                theta_lo: grid[i],
                theta_hi: grid[i + 1],
                reason: format!("rho does not decrease ({} -> {})", vals[i].0, vals[i + 1].0),
            }));
        }
    }
    Ok(None)
}

pub fn uniform_grid(points: usize) -> Vec<f64> {
    match points {
        0 => vec![],
        1 => vec![0.0],
        _ => (0..points).map(|i| i as f64 / (points - 1) as f64).collect(),
    }
}

/// Root of `rho(theta) = 1`, with the edge regimes `theta* = 0` when
/// `rho(0) <= 1` and `theta* = 1` when `rho(1) > 1`.
pub fn find_threshold(lin: &TwoSeasonLinearization, opts: &ThresholdOptions) -> Result<ThresholdReport> {
    if !(opts.tol > 0.0) {
        return Err(invalid("bisection tolerance must be positive"));
    }
    let violation = monotone_certificate(lin, opts.grid_points)?;
    if let Some(err) = &violation {
        if !opts.override_certificate {
            return Err(err.clone());
        }
    }
    let certified = violation.is_none();
    let r0 = lin.rho(0.0)?.rho;
    if r0 <= 1.0 {
        return Ok(ThresholdReport {
            theta_star: 0.0,
            regime: Regime::AlwaysExtinct,
            monotone_certificate: certified,
            bracket: None,
            rho_at_theta_star: r0,
            iterations: 0,
        });
    }
    let r1 = lin.rho(1.0)?.rho;
    if r1 > 1.0 {
        return Ok(ThresholdReport {
            theta_star: 1.0,
            regime: Regime::AlwaysPersistent,
            monotone_certificate: certified,
            bracket: None,
            rho_at_theta_star: r1,
            iterations: 0,
        });
    }
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    let mut best = (f64::INFINITY, 0.5, r1);
    for it in 1..=opts.max_iter {
        let mid = 0.5 * (lo + hi);
        let r = lin.rho(mid)?.rho;
        if (r - 1.0).abs() < best.0 {
            best = ((r - 1.0).abs(), mid, r);
        }
        if r > 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if (r - 1.0).abs() <= opts.tol && hi - lo <= opts.tol {
            return Ok(ThresholdReport {
                theta_star: mid,
                regime: Regime::InteriorRoot,
                monotone_certificate: certified,
                bracket: Some((lo, hi)),
                rho_at_theta_star: r,
                iterations: it,
            });
        }
        if mid == lo && mid == hi || hi - lo <= f64::EPSILON * hi {
            break;
        }
    }
    Err(Error::Convergence { iterations: opts.max_iter, residual: best.0 })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogConvexityReport {
    pub thetas: Vec<f64>,
    pub log_rho: Vec<f64>,
    /// Second differences at interior points, scaled to the local spacing
    /// so that a uniform grid gives `f[i+1] - 2 f[i] + f[i-1]`.
    pub second_differences: Vec<f64>,
    pub min_second_difference: f64,
    pub numerically_convex: bool,
    /// `(mu2 - <M1 V2, V2*>)(<M2 V1, V1*> - mu1)`.
    pub condition21_value: f64,
    pub condition21_positive: bool,
}

pub const CONVEXITY_TOL: f64 = 1e-9;

pub fn log_convexity_probe(lin: &TwoSeasonLinearization, grid: &[f64]) -> Result<LogConvexityReport> {
    for w in grid.windows(2) {
        if !(w[1] > w[0]) {
            return Err(invalid("convexity grid must be strictly increasing"));
        }
    }
    for &th in grid {
        check_fraction(th)?;
    }
    let log_rho: Vec<f64> = grid
        .par_iter()
        .map(|&th| Ok(lin.rho(th)?.rho.ln()))
        .collect::<Result<_>>()?;
    let second_differences: Vec<f64> = (1..grid.len().saturating_sub(1))
        .map(|i| {
            let (h1, h2) = (grid[i] - grid[i - 1], grid[i + 1] - grid[i]);
            let dd = 2.0 * ((log_rho[i + 1] - log_rho[i]) / h2 - (log_rho[i] - log_rho[i - 1]) / h1) / (h1 + h2);
            dd * h1 * h2
        })
        .collect();
    let min_second_difference = second_differences.iter().copied().fold(f64::INFINITY, f64::min);
    let condition21_value = condition21(lin)?;
    Ok(LogConvexityReport {
        thetas: grid.to_vec(),
        log_rho,
        numerically_convex: second_differences.iter().all(|&d| d >= -CONVEXITY_TOL),
        min_second_difference,
        second_differences,
        condition21_value,
        condition21_positive: condition21_value > 0.0,
    })
}

/// Perron vectors of a season matrix normalized by `|V| = 1`, `<V, V*> = 1`.
fn season_pair(lin: &TwoSeasonLinearization, a: &Matrix) -> Result<MetzlerPerron> {
    metzler_perron(a, lin.opts.perron_tol, lin.opts.perron_max_iter)
}

pub fn condition21(lin: &TwoSeasonLinearization) -> Result<f64> {
    let p1 = season_pair(lin, &lin.m1)?;
    let p2 = season_pair(lin, &lin.m2)?;
    let a = p2.mu - dot(&lin.m1.mul_vec(&p2.v), &p2.v_star);
    let b = dot(&lin.m2.mul_vec(&p1.v), &p1.v_star) - p1.mu;
    Ok(a * b)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimescaleRow {
    pub period: f64,
    pub log_rho_over_t: f64,
    pub linear_interpolation: f64,
    /// `log rho - T (theta mu1 + (1 - theta) mu2)`.
    pub correction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimescaleReport {
    pub theta: f64,
    pub mu1: f64,
    pub mu2: f64,
    /// `log((V2* . V1)(V1* . V2))`.
    pub limit_correction: f64,
    pub rows: Vec<TimescaleRow>,
    /// `|correction - limit|` at each row.
    pub distance_to_limit: Vec<f64>,
    pub small_period: f64,
    pub rho_small_period: f64,
}

pub const SMALL_PERIOD: f64 = 1e-6;

/// Large- and small-period behavior of `rho(theta)`, computed on the
/// rescaled monodromy `e^{(1-theta)T(M2 - mu2)} e^{theta T(M1 - mu1)}` so that
/// large periods never overflow.
pub fn timescale_asymptotics(
    lin: &TwoSeasonLinearization,
    theta: f64,
    t_values: &[f64],
) -> Result<TimescaleReport> {
    check_fraction(theta)?;
    for w in t_values.windows(2) {
        if !(w[1] > w[0]) {
            return Err(invalid("periods must be increasing"));
        }
    }
    if t_values.iter().any(|t| !(t.is_finite() && *t > 0.0)) {
        return Err(invalid("periods must be positive"));
    }
    let p1 = lin.mu1()?;
    let p2 = lin.mu2()?;
    let limit = (dot(&p2.v_star, &p1.v) * dot(&p1.v_star, &p2.v)).ln();
    let r1 = lin.m1.shift(-p1.mu);
    let r2 = lin.m2.shift(-p2.mu);
    let interp = theta * p1.mu + (1.0 - theta) * p2.mu;
    let rows: Vec<TimescaleRow> = t_values
        .par_iter()
        .map(|&t| {
            let e2 = mat_exp(&r2.scale((1.0 - theta) * t), lin.opts.exp_tol)?;
            let e1 = mat_exp(&r1.scale(theta * t), lin.opts.exp_tol)?;
            let p = perron_pair(&(&e2 * &e1), lin.opts.perron_tol, lin.opts.perron_max_iter)?;
            let correction = p.rho.ln();
            Ok(TimescaleRow {
                period: t,
                log_rho_over_t: interp + correction / t,
                linear_interpolation: interp,
                correction,
            })
        })
        .collect::<Result<_>>()?;
    let distance_to_limit = rows.iter().map(|r| (r.correction - limit).abs()).collect();
    let rho_small_period = lin.with_period(SMALL_PERIOD)?.rho(theta)?.rho;
    Ok(TimescaleReport {
        theta,
        mu1: p1.mu,
        mu2: p2.mu,
        limit_correction: limit,
        rows,
        distance_to_limit,
        small_period: SMALL_PERIOD,
        rho_small_period,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seasonal::SeasonalSchedule;

    fn k() -> Matrix {
        Matrix::from_rows(&[[0.0, 1.0], [1.0, 0.0]]).unwrap()
    }

    /// m1 = K - 2I, m2 = K + I: shared eigenvector, rho = e^{2 - 3 theta}.
    fn shared(t: f64) -> TwoSeasonLinearization {
        TwoSeasonLinearization::new(k().shift(-2.0), k().shift(1.0), t).unwrap()
    }

    fn insect_pair() -> TwoSeasonLinearization {
        TwoSeasonLinearization::new(
            Matrix::from_rows(&[[-1.5, 1.0], [0.5, -1.0]]).unwrap(),
            Matrix::from_rows(&[[-1.5, 2.0], [1.0, -0.5]]).unwrap(),
            1.0,
        )
        .unwrap()
    }

    fn skewed() -> TwoSeasonLinearization {
        TwoSeasonLinearization::new(
            Matrix::from_rows(&[[-2.0, 0.3, 0.1], [1.0, -1.0, 0.2], [0.5, 0.4, -3.0]]).unwrap(),
            Matrix::from_rows(&[[-0.5, 2.0, 0.1], [0.1, -1.5, 1.5], [0.7, 0.1, -0.2]]).unwrap(),
            1.3,
        )
        .unwrap()
    }

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs().max(1.0)
    }

    #[test]
    fn monodromy_endpoints() {
        let lin = insect_pair();
        let e2 = mat_exp(lin.m2(), 1e-16).unwrap();
        let e1 = mat_exp(lin.m1(), 1e-16).unwrap();
        assert!((&lin.monodromy(0.0).unwrap() - &e2).max_abs() < 1e-15);
        assert!((&lin.monodromy(1.0).unwrap() - &e1).max_abs() < 1e-15);
        assert!(lin.monodromy(1.5).is_err());
    }

    #[test]
    fn monodromy_commuting_case() {
        let m = shared(1.0).monodromy(0.5).unwrap();
        let want = mat_exp(&k(), 1e-16).unwrap().scale((-0.5f64).exp());
        assert!((&m - &want).max_abs() < 1e-14);
    }

    #[test]
    fn monodromy_general_cases() {
        let a = k().shift(-0.7);
        let sys = SeasonalSystem::linear(SeasonalSchedule::new(2.0, vec![0.0, 1.0]).unwrap(), vec![a.clone()]).unwrap();
        let want = mat_exp(&a.scale(2.0), 1e-16).unwrap();
        assert!((&monodromy_general(&sys).unwrap() - &want).max_abs() < 1e-13);

        let thirds = SeasonalSchedule::new(2.0, vec![0.0, 1.0 / 3.0, 2.0 / 3.0, 1.0]).unwrap();
        let sys = SeasonalSystem::linear(thirds, vec![a.clone(), a.clone(), a.clone()]).unwrap();
        assert!((&monodromy_general(&sys).unwrap() - &want).max_abs() < 1e-13);

        let lin = insect_pair();
        let sys = SeasonalSystem::linear(
            SeasonalSchedule::two_season(1.0, 0.3).unwrap(),
            vec![lin.m1().clone(), lin.m2().clone()],
        )
        .unwrap();
        assert!((&monodromy_general(&sys).unwrap() - &lin.monodromy(0.3).unwrap()).max_abs() < 1e-14);
    }

    #[test]
    fn rho_examples() {
        let lin = shared(1.0);
        for th in [0.0, 0.25, 0.5, 0.9, 1.0] {
            assert!(close(lin.rho(th).unwrap().rho, (2.0 - 3.0 * th).exp(), 1e-12));
        }
        let ins = insect_pair();
        assert!(close(ins.rho(0.0).unwrap().rho, 0.5f64.exp(), 1e-12));
        assert!(close(ins.rho(0.5).unwrap().rho, 1.0, 1e-12));
    }

    #[test]
    fn rho_prime_examples() {
        let lin = shared(1.0);
        for th in [0.1, 0.6] {
            let p = lin.rho(th).unwrap();
            assert!(close(lin.rho_prime(th).unwrap() / p.rho, -3.0, 1e-11));
        }
        let same = TwoSeasonLinearization::new(k().shift(-1.0), k().shift(-1.0), 2.0).unwrap();
        assert_eq!(same.rho_prime(0.4).unwrap(), 0.0);

        let ins = insect_pair();
        let h = 1e-5;
        let fd = (ins.rho(0.5 + h).unwrap().rho - ins.rho(0.5 - h).unwrap().rho) / (2.0 * h);
        let d = ins.rho_prime(0.5).unwrap();
        assert!(d < 0.0);
        assert!((d - fd).abs() <= 1e-6 * d.abs().max(1.0));
    }

    #[test]
    fn rho_second_examples() {
        let same = TwoSeasonLinearization::new(k().shift(-1.0), k().shift(-1.0), 2.0).unwrap();
        assert!(same.rho_second(0.4).unwrap().abs() < 1e-14);

        let lin = shared(1.7);
        let th = 0.3;
        let want = 9.0 * 1.7 * 1.7 * lin.rho(th).unwrap().rho;
        assert!(close(lin.rho_second(th).unwrap(), want, 1e-10));

        let sk = skewed();
        let h = 1e-4;
        let r = |t: f64| sk.rho(t).unwrap().rho;
        let fd = (r(0.4 + h) - 2.0 * r(0.4) + r(0.4 - h)) / (h * h);
        let d2 = sk.rho_second(0.4).unwrap();
        assert!((d2 - fd).abs() <= 1e-4 * d2.abs().max(1.0), "{d2} vs {fd}");
    }

    #[test]
    fn resolvent_examples() {
        let m = Matrix::from_rows(&[[2.0, 1.0], [1.0, 2.0]]).unwrap();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let v = [s, s];
        assert_eq!(constrained_resolvent(&m, 3.0, &v, &v, &[0.0, 0.0], Side::Right).unwrap(), vec![0.0, 0.0]);
        let x = constrained_resolvent(&m, 3.0, &v, &v, &[s, -s], Side::Right).unwrap();
        let want = [-s / 2.0, s / 2.0];
        assert!((x[0] - want[0]).abs() < 1e-15 && (x[1] - want[1]).abs() < 1e-15);
        assert!(constrained_resolvent(&m, 3.0, &v, &v, &[1.0, 0.0], Side::Right).is_err());
    }

    #[test]
    fn resolvent_residual_on_nonsymmetric_matrix() {
        let m = skewed().monodromy(0.35).unwrap();
        let p = perron_pair(&m, 1e-13, 10_000).unwrap();
        let raw = [0.3, -1.2, 0.8];
        // project onto the admissible hyperplanes
        let c = dot(&raw, &p.v_star) / dot(&p.v_star, &p.v_star);
        let b_right: Vec<f64> = raw.iter().zip(&p.v_star).map(|(r, w)| r - c * w).collect();
        let x = constrained_resolvent(&m, p.rho, &p.v, &p.v_star, &b_right, Side::Right).unwrap();
        let res = m.shift(-p.rho).mul_vec(&x);
        assert!(res.iter().zip(&b_right).all(|(a, b)| (a - b).abs() < 1e-12));
        assert!(dot(&x, &p.v).abs() < 1e-12);

        let c = dot(&raw, &p.v);
        let b_adj: Vec<f64> = raw.iter().zip(&p.v).map(|(r, w)| r - c * w).collect();
        let x = constrained_resolvent(&m, p.rho, &p.v, &p.v_star, &b_adj, Side::Adjoint).unwrap();
        let res = m.transpose().shift(-p.rho).mul_vec(&x);
        assert!(res.iter().zip(&b_adj).all(|(a, b)| (a - b).abs() < 1e-12));
        assert!(dot(&x, &p.v).abs() < 1e-12);
    }

    #[test]
    fn threshold_examples() {
        let rep = find_threshold(&shared(1.0), &ThresholdOptions::default()).unwrap();
        assert_eq!(rep.regime, Regime::InteriorRoot);
        assert!((rep.theta_star - 2.0 / 3.0).abs() < 1e-10);
        assert!(rep.monotone_certificate);

        let ins = find_threshold(&insect_pair(), &ThresholdOptions::default()).unwrap();
        assert_eq!(ins.regime, Regime::InteriorRoot);
        assert!((ins.theta_star - 0.5).abs() < 1e-9);
        let (lo, hi) = ins.bracket.unwrap();
        assert!(lo <= ins.theta_star && ins.theta_star <= hi);
    }

    #[test]
    fn threshold_constant_rho_needs_override() {
        let same = TwoSeasonLinearization::new(k().shift(-0.5), k().shift(-0.5), 1.0).unwrap();
        let err = find_threshold(&same, &ThresholdOptions::default()).unwrap_err();
        assert!(matches!(err, Error::Certificate { index: 0, .. }));
        let opts = ThresholdOptions { override_certificate: true, ..Default::default() };
        let rep = find_threshold(&same, &opts).unwrap();
        assert_eq!((rep.regime, rep.theta_star), (Regime::AlwaysPersistent, 1.0));
        assert!(!rep.monotone_certificate);
    }

    #[test]
    fn threshold_edge_regimes() {
        // rho(0) = e^{mu2} <= 1
        let ext = TwoSeasonLinearization::new(k().shift(-3.0), k().shift(-1.5), 1.0).unwrap();
        let rep = find_threshold(&ext, &ThresholdOptions::default()).unwrap();
        assert_eq!((rep.regime, rep.theta_star), (Regime::AlwaysExtinct, 0.0));
        let per = TwoSeasonLinearization::new(k().shift(-0.5), k().shift(1.0), 1.0).unwrap();
        let rep = find_threshold(&per, &ThresholdOptions::default()).unwrap();
        assert_eq!((rep.regime, rep.theta_star), (Regime::AlwaysPersistent, 1.0));
    }

    #[test]
    fn convexity_probe_examples() {
        let grid = uniform_grid(21);
        let rep = log_convexity_probe(&shared(1.0), &grid).unwrap();
        assert!(rep.numerically_convex);
        assert!(rep.second_differences.iter().all(|d| d.abs() < 1e-12));
        assert!((rep.condition21_value - 9.0).abs() < 1e-10);

        let same = TwoSeasonLinearization::new(k().shift(-1.0), k().shift(-1.0), 1.0).unwrap();
        assert!(log_convexity_probe(&same, &grid).unwrap().condition21_value.abs() < 1e-12);

        let rep = log_convexity_probe(&skewed(), &grid).unwrap();
        let fd: Vec<f64> = (1..20).map(|i| rep.log_rho[i + 1] - 2.0 * rep.log_rho[i] + rep.log_rho[i - 1]).collect();
        for (a, b) in rep.second_differences.iter().zip(&fd) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn timescale_examples() {
        let rep = timescale_asymptotics(&shared(1.0), 0.5, &[1.0, 2.0, 4.0]).unwrap();
        assert!(rep.limit_correction.abs() < 1e-12);
        assert!(rep.rows.iter().all(|r| r.correction.abs() < 1e-12));
        assert!((rep.rho_small_period - 1.0).abs() < 1e-5);

        let ts = [1.0, 2.0, 4.0, 8.0, 16.0];
        let rep = timescale_asymptotics(&skewed(), 0.5, &ts).unwrap();
        assert!(rep.distance_to_limit[4] < 1e-4, "{:?}", rep.distance_to_limit);
        assert!(rep.limit_correction < 0.0);
        let last = rep.rows.last().unwrap();
        assert!((last.log_rho_over_t - last.linear_interpolation).abs() < 0.1);
    }

    #[test]
    fn large_period_does_not_overflow() {
        let rep = timescale_asymptotics(&skewed(), 0.5, &[2000.0]).unwrap();
        assert!(rep.rows[0].correction.is_finite());
        assert!((rep.rows[0].correction - rep.limit_correction).abs() < 1e-8);
    }

    #[test]
    fn profile_is_aligned() {
        let grid = uniform_grid(11);
        let prof = insect_pair().profile(&grid).unwrap();
        assert_eq!(prof.rho.len(), 11);
        for (th, r) in grid.iter().zip(&prof.rho) {
            assert!(close(*r, (0.5 - th).exp(), 1e-12));
        }
        for (th, d2) in grid.iter().zip(&prof.rho_second) {
            assert!(close(*d2, (0.5 - th).exp(), 1e-9));
        }
    }

    #[test]
    fn rejects_non_metzler() {
        let bad = Matrix::from_rows(&[[-1.0, -0.1], [1.0, -1.0]]).unwrap();
        assert!(matches!(TwoSeasonLinearization::new(bad, k(), 1.0), Err(Error::Structure(_))));
    }
}
