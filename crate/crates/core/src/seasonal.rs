//! T-periodic, piecewise-autonomous systems `x' = F^k(x)` on season windows
//! `[theta_{k-1}, theta_k)` of each period, plus sample-based checks of the
//! positivity, cooperativity, concavity and irreducibility hypotheses.

use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::linalg::{is_irreducible, is_metzler, Matrix, Vector};

/// An autonomous vector field with its Jacobian.
pub trait VectorField: Send + Sync + fmt::Debug {
    fn dim(&self) -> usize;
    fn eval(&self, x: &[f64]) -> Vector;
    fn jacobian(&self, x: &[f64]) -> Matrix;
}

/// `x' = A x`.
#[derive(Debug, Clone)]
pub struct LinearField(pub Matrix);

impl VectorField for LinearField {
    fn dim(&self) -> usize {
        self.0.n()
    }

    fn eval(&self, x: &[f64]) -> Vector {
        self.0.mul_vec(x)
    }

    fn jacobian(&self, _x: &[f64]) -> Matrix {
        self.0.clone()
    }
}

type FieldFn = dyn Fn(&[f64]) -> Vector + Send + Sync;
type JacobianFn = dyn Fn(&[f64]) -> Matrix + Send + Sync;

/// A vector field given by closures.
#[derive(Clone)]
pub struct FnField {
    dim: usize,
    f: Arc<FieldFn>,
    jac: Arc<JacobianFn>,
}

impl FnField {
    pub fn new(
        dim: usize,
        f: impl Fn(&[f64]) -> Vector + Send + Sync + 'static,
        jac: impl Fn(&[f64]) -> Matrix + Send + Sync + 'static,
    ) -> Self {
        Self { dim, f: Arc::new(f), jac: Arc::new(jac) }
    }
}

impl fmt::Debug for FnField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FnField").field("dim", &self.dim).finish_non_exhaustive()
    }
}

impl VectorField for FnField {
    fn dim(&self) -> usize {
        self.dim
    }

    fn eval(&self, x: &[f64]) -> Vector {
        (self.f)(x)
    }

    fn jacobian(&self, x: &[f64]) -> Matrix {
        (self.jac)(x)
    }
}

/// Largest discrepancy between the analytic Jacobian and a central finite
/// difference, relative to `max(1, |entry|)`, over the given states.
pub fn jacobian_fd_error(field: &dyn VectorField, states: &[Vector]) -> f64 {
    let n = field.dim();
    let mut worst = 0.0f64;
    for x in states {
        let jac = field.jacobian(x);
        for j in 0..n {
            let h = 1e-6 * x[j].abs().max(1.0);
            let mut xp = x.clone();
            let mut xm = x.clone();
            xp[j] += h;
            xm[j] -= h;
            let (fp, fm) = (field.eval(&xp), field.eval(&xm));
            for i in 0..n {
                let fd = (fp[i] - fm[i]) / (2.0 * h);
                worst = worst.max((fd - jac[(i, j)]).abs() / jac[(i, j)].abs().max(1.0));
            }
        }
    }
    worst
}

/// One season's dynamics together with its linearization at the origin.
#[derive(Debug, Clone)]
pub struct AutonomousPiece {
    field: Arc<dyn VectorField>,
    linearization_at_zero: Matrix,
}

impl AutonomousPiece {
    /// Checks `F(0) = 0` and that the Jacobian agrees with finite
    /// differences at a few probe states.
    pub fn new(field: Arc<dyn VectorField>) -> Result<Self> {
        let n = field.dim();
        if n == 0 {
            return Err(invalid("vector field dimension must be positive"));
        }
        let zero = vec![0.0; n];
        let f0 = field.eval(&zero);
        if f0.len() != n || f0.iter().any(|v| v.abs() > 1e-12) {
            return Err(invalid("vector field must vanish at the origin"));
        }
        let lin = field.jacobian(&zero);
        if lin.n() != n {
            return Err(invalid("jacobian dimension does not match the field"));
        }
        let mut probes = vec![zero, vec![1.0; n], vec![0.5; n]];
        probes.extend((0..n).map(|i| {
            let mut e = vec![0.1; n];
            e[i] = 2.0;
            e
        }));
        let fd_err = jacobian_fd_error(field.as_ref(), &probes);
        if fd_err > 1e-5 {
            return Err(invalid(format!(
                "jacobian disagrees with finite differences (relative error {fd_err:e})"
            )));
        }
        Ok(Self { field, linearization_at_zero: lin })
    }

    pub fn linear(a: Matrix) -> Result<Self> {
        Self::new(Arc::new(LinearField(a)))
    }

    pub fn field(&self) -> &dyn VectorField {
        self.field.as_ref()
    }

    pub fn eval(&self, x: &[f64]) -> Vector {
        self.field.eval(x)
    }

    pub fn jacobian(&self, x: &[f64]) -> Matrix {
        self.field.jacobian(x)
    }

    /// `DF^k(0)`
    pub fn linearization_at_zero(&self) -> &Matrix {
        &self.linearization_at_zero
    }

    pub fn dim(&self) -> usize {
        self.field.dim()
    }
}

/// Period and nondecreasing season breakpoints `0 = theta_0 <= ... <= theta_K = 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeasonalSchedule {
    period: f64,
    breakpoints: Vec<f64>,
}

impl SeasonalSchedule {
    pub fn new(period: f64, breakpoints: Vec<f64>) -> Result<Self> {
        if !(period.is_finite() && period > 0.0) {
            return Err(invalid(format!("period must be positive, got {period}")));
        }
        if breakpoints.len() < 2 {
            return Err(invalid("need at least the breakpoints 0 and 1"));
        }
        if breakpoints[0] != 0.0 || *breakpoints.last().unwrap() != 1.0 {
            return Err(invalid("breakpoints must start at 0 and end at 1"));
        }
        if breakpoints.windows(2).any(|w| !(w[0] <= w[1])) {
            return Err(invalid("breakpoints must be nondecreasing"));
        }
        Ok(Self { period, breakpoints })
    }

    /// Two seasons split at `theta`.
    pub fn two_season(period: f64, theta: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&theta) {
            return Err(invalid(format!("theta must lie in [0, 1], got {theta}")));
        }
        Self::new(period, vec![0.0, theta, 1.0])
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn n_seasons(&self) -> usize {
        self.breakpoints.len() - 1
    }

    /// Fraction window `[theta_k, theta_{k+1})` of the 0-based season `k`.
    pub fn window(&self, k: usize) -> (f64, f64) {
        (self.breakpoints[k], self.breakpoints[k + 1])
    }

    /// 0-based season active at time `t`; windows are half-open so the
    /// index is right-continuous at breakpoints and empty windows never match.
    pub fn season_index(&self, t: f64) -> Result<usize> {
        if !(t.is_finite() && t >= 0.0) {
            return Err(invalid(format!("time must be finite and nonnegative, got {t}")));
        }
        let s = t / self.period;
        let frac = s - s.floor();
        Ok(self.index_of_fraction(frac))
    }

    pub(crate) fn index_of_fraction(&self, frac: f64) -> usize {
        (0..self.n_seasons())
            .find(|&k| self.breakpoints[k] <= frac && frac < self.breakpoints[k + 1])
            .unwrap_or_else(|| {
                // frac == 1 can only come from rounding; it belongs to the start of the next period
                (0..self.n_seasons()).find(|&k| self.breakpoints[k + 1] > 0.0).unwrap_or(0)
            })
    }
}

/// The periodic system `x' = F^k(x)` on the `k`-th season window.
#[derive(Debug, Clone)]
pub struct SeasonalSystem {
    schedule: SeasonalSchedule,
    pieces: Vec<AutonomousPiece>,
}

impl SeasonalSystem {
    pub fn new(schedule: SeasonalSchedule, pieces: Vec<AutonomousPiece>) -> Result<Self> {
        if pieces.len() != schedule.n_seasons() {
            return Err(invalid(format!(
                "{} pieces for {} seasons",
                pieces.len(),
                schedule.n_seasons()
            )));
        }
        let n = pieces[0].dim();
        if pieces.iter().any(|p| p.dim() != n) {
            return Err(invalid("all pieces must share the same dimension"));
        }
        Ok(Self { schedule, pieces })
    }

    /// Piecewise-linear system `x' = A_k x`.
    pub fn linear(schedule: SeasonalSchedule, matrices: Vec<Matrix>) -> Result<Self> {
        let pieces = matrices.into_iter().map(AutonomousPiece::linear).collect::<Result<_>>()?;
        Self::new(schedule, pieces)
    }

    pub fn schedule(&self) -> &SeasonalSchedule {
        &self.schedule
    }

    pub fn pieces(&self) -> &[AutonomousPiece] {
        &self.pieces
    }

    pub fn piece(&self, k: usize) -> &AutonomousPiece {
        &self.pieces[k]
    }

    pub fn dim(&self) -> usize {
        self.pieces[0].dim()
    }

    pub fn period(&self) -> f64 {
        self.schedule.period
    }

    pub fn linearizations(&self) -> Vec<Matrix> {
        self.pieces.iter().map(|p| p.linearization_at_zero.clone()).collect()
    }

    /// `F(t, x)`
    pub fn field_at(&self, t: f64, x: &[f64]) -> Result<Vector> {
        Ok(self.pieces[self.schedule.season_index(t)?].eval(x))
    }
}

/// Outcome of the sample-based structural checks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    /// Jacobian Metzler at every sample, every piece.
    pub metzler_at_samples: bool,
    /// `F_i(x) >= 0` whenever `x_i = 0`, on samples projected to each face.
    pub positive: bool,
    /// `DF(x) >= DF(y)` for every sampled pair `x << y`.
    pub concave_at_samples: bool,
    /// Every `DF^k(0)` irreducible.
    pub irreducible_at_zero: bool,
    pub ordered_pairs_checked: usize,
}

impl ValidationReport {
    pub fn all_hold(&self) -> bool {
        self.metzler_at_samples && self.positive && self.concave_at_samples && self.irreducible_at_zero
    }
}

/// `x << y` componentwise.
pub fn strictly_below(x: &[f64], y: &[f64]) -> bool {
    x.iter().zip(y).all(|(a, b)| a < b)
}

pub fn validate_structure(system: &SeasonalSystem, samples: &[Vector]) -> Result<ValidationReport> {
    let n = system.dim();
    for (i, s) in samples.iter().enumerate() {
        if s.len() != n {
            return Err(invalid(format!("sample {i} has dimension {}, expected {n}", s.len())));
        }
        if s.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(invalid(format!("sample {i} is not a finite nonnegative state")));
        }
    }

    let mut metzler = true;
    let mut positive = true;
    let mut concave = true;
    let mut pairs = 0usize;
    let jacobians: Vec<Vec<Matrix>> = system
        .pieces()
        .iter()
        .map(|p| samples.iter().map(|x| p.jacobian(x)).collect())
        .collect();

    for (piece, jacs) in system.pieces().iter().zip(&jacobians) {
        metzler &= jacs.iter().all(is_metzler);
        for x in samples {
            for i in 0..n {
                let mut face = x.clone();
                face[i] = 0.0;
                positive &= piece.eval(&face)[i] >= -1e-12;
            }
        }
        for (a, x) in samples.iter().enumerate() {
            for (b, y) in samples.iter().enumerate() {
                if a != b && strictly_below(x, y) {
                    pairs += 1;
                    concave &= (&jacs[a] - &jacs[b]).min_entry() >= -1e-9;
                }
            }
        }
    }

    Ok(ValidationReport {
        metzler_at_samples: metzler,
        positive,
        concave_at_samples: concave,
        irreducible_at_zero: system.pieces().iter().all(|p| is_irreducible(&p.linearization_at_zero)),
        ordered_pairs_checked: pairs,
    })
}

/// Default validation grid: 50 random states in `[0, 10]^n`, the origin,
/// and points on each coordinate axis.
pub fn default_samples(n: usize, seed: u64) -> Vec<Vector> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out: Vec<Vector> = (0..50).map(|_| (0..n).map(|_| rng.gen_range(0.0..10.0)).collect()).collect();
    out.push(vec![0.0; n]);
    for i in 0..n {
        for l in [1.0, 10.0] {
            let mut e = vec![0.0; n];
            e[i] = l;
            out.push(e);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sched() -> SeasonalSchedule {
        SeasonalSchedule::new(1.0, vec![0.0, 0.3, 1.0]).unwrap()
    }

    #[test]
    fn season_index_examples() {
        let s = sched();
        assert_eq!(s.season_index(0.1).unwrap(), 0);
        assert_eq!(s.season_index(0.3).unwrap(), 1);
        assert_eq!(s.season_index(2.95).unwrap(), 1);
        assert!(s.season_index(-1.0).is_err());
    }

    #[test]
    fn empty_windows_are_skipped() {
        let s = SeasonalSchedule::new(2.0, vec![0.0, 0.0, 0.5, 0.5, 1.0]).unwrap();
        assert_eq!(s.season_index(0.0).unwrap(), 1);
        assert_eq!(s.season_index(1.0).unwrap(), 3);
        assert_eq!(s.season_index(1.99).unwrap(), 3);
        let all_first = SeasonalSchedule::two_season(1.0, 1.0).unwrap();
        assert_eq!(all_first.season_index(0.999).unwrap(), 0);
        let all_second = SeasonalSchedule::two_season(1.0, 0.0).unwrap();
        assert_eq!(all_second.season_index(0.0).unwrap(), 1);
    }

    #[test]
    fn schedule_validation() {
        assert!(SeasonalSchedule::new(0.0, vec![0.0, 1.0]).is_err());
        assert!(SeasonalSchedule::new(1.0, vec![0.1, 1.0]).is_err());
        assert!(SeasonalSchedule::new(1.0, vec![0.0, 0.6, 0.4, 1.0]).is_err());
        assert!(SeasonalSchedule::two_season(1.0, 1.2).is_err());
    }

    #[test]
    fn linear_irreducible_metzler_passes_validation() {
        let a = Matrix::from_rows(&[[-1.0, 2.0], [0.5, -3.0]]).unwrap();
        let sys = SeasonalSystem::linear(SeasonalSchedule::two_season(1.0, 0.4).unwrap(), vec![a.clone(), a]).unwrap();
        let report = validate_structure(&sys, &default_samples(2, 7)).unwrap();
        assert!(report.all_hold(), "{report:?}");
        assert!(report.ordered_pairs_checked > 0);
    }

    #[test]
    fn non_metzler_piece_is_flagged() {
        let good = Matrix::from_rows(&[[-1.0, 1.0], [1.0, -1.0]]).unwrap();
        let bad = Matrix::from_rows(&[[-1.0, -1.0], [0.0, -1.0]]).unwrap();
        let sys = SeasonalSystem::linear(sched(), vec![good, bad]).unwrap();
        let report = validate_structure(&sys, &default_samples(2, 1)).unwrap();
        assert!(!report.metzler_at_samples);
        assert!(!report.irreducible_at_zero);
    }

    #[test]
    fn piece_must_vanish_at_zero() {
        let f = FnField::new(1, |x| vec![1.0 - x[0]], |_| Matrix::from_diag(&[-1.0]));
        assert!(AutonomousPiece::new(Arc::new(f)).is_err());
        let wrong_jac = FnField::new(1, |x| vec![-x[0] * x[0]], |_| Matrix::from_diag(&[0.0]));
        assert!(AutonomousPiece::new(Arc::new(wrong_jac)).is_err());
    }

    #[test]
    fn dimension_mismatch_is_rejected() {
        let a = Matrix::identity(2);
        let sys = SeasonalSystem::linear(sched(), vec![a.clone(), a]).unwrap();
        assert!(validate_structure(&sys, &[vec![1.0, 2.0, 3.0]]).is_err());
        let b = Matrix::identity(3);
        assert!(SeasonalSystem::linear(sched(), vec![Matrix::identity(2), b]).is_err());
    }
}
