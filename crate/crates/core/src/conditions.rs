//! Sufficient conditions for a sharp threshold: eigenvector sharing (A),
//! the sign conditions (B-1), (B-2), (B-3), the insect parameter
//! hypotheses, and the two-dimensional certificate chain built on the
//! explicit diagonalization of each season.
//!
//! Every certificate records margins with the convention "positive means
//! satisfied"; a condition holds when every margin exceeds [`MARGIN_TOL`].

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::floquet::TwoSeasonLinearization;
use crate::insect::{jacobian, r0, InsectParams, InsectState};
use crate::linalg::{dot, inverse, mat_exp, norm2, Matrix, Vector, DEFAULT_EXP_TOL};

/// Strict inequalities count as satisfied only with at least this slack.
pub const MARGIN_TOL: f64 = 1e-9;
/// Angle tolerance (radians) for eigenvector agreement in condition (A).
pub const DEFAULT_ANGLE_TOL: f64 = 1e-8;
/// Residual tolerance for the identity `P V* + Q V = 0` of (B-3).
pub const DEFAULT_B3_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ConditionTag {
    A,
    B1,
    B2,
    B3,
    #[serde(rename = "HYP4")]
    Hyp4,
    #[serde(rename = "HYP10")]
    Hyp10,
    #[serde(rename = "LEMMA3")]
    Lemma3,
    #[serde(rename = "THM3")]
    Thm3,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageResult {
    pub id: String,
    pub holds: bool,
    pub margin: Option<f64>,
    pub note: Option<String>,
}

impl StageResult {
    fn from_margin(id: &str, margin: f64) -> Self {
        Self { id: id.into(), holds: margin > MARGIN_TOL, margin: Some(margin), note: None }
    }

    fn undefined(id: &str, why: impl Into<String>) -> Self {
        Self { id: id.into(), holds: false, margin: None, note: Some(why.into()) }
    }

    fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionCertificate {
    pub condition: ConditionTag,
    pub holds: bool,
    /// Worst margin per grid point (or per checked quantity when there is no grid).
    pub evidence: Vec<f64>,
    pub theta_grid: Vec<f64>,
    /// Which built-in transform produced the certificate, when one was tried.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub variant: Option<String>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub stages: Vec<StageResult>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
}

impl ConditionCertificate {
    fn from_margins(condition: ConditionTag, evidence: Vec<f64>, theta_grid: Vec<f64>) -> Self {
        let holds = !evidence.is_empty() && evidence.iter().all(|&m| m > MARGIN_TOL);
        Self { condition, holds, evidence, theta_grid, variant: None, stages: vec![], alpha: None }
    }

    fn variant(mut self, v: impl Into<String>) -> Self {
        self.variant = Some(v.into());
        self
    }

    pub fn min_margin(&self) -> f64 {
        self.evidence.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(invalid("theta grid is empty"));
    }
    if let Some(t) = grid.iter().find(|t| !(0.0..=1.0).contains(*t)) {
        return Err(invalid(format!("theta grid value {t} is outside [0, 1]")));
    }
    Ok(())
}

fn unit(v: &[f64]) -> Vector {
    let n = norm2(v);
    v.iter().map(|x| x / n).collect()
}

/// Angle between two unit vectors, accurate near zero.
fn angle(u: &[f64], w: &[f64]) -> f64 {
    let d: Vec<f64> = u.iter().zip(w).map(|(a, b)| a - b).collect();
    2.0 * (norm2(&d) / 2.0).min(1.0).asin()
}

/// Condition (A): `m1` and `m2` share their right Perron vector or their
/// left one. Evidence holds `tol - angle` for the right and left vectors;
/// the condition holds if either is nonnegative.
pub fn check_condition_a(lin: &TwoSeasonLinearization, tol: f64) -> Result<ConditionCertificate> {
    let p1 = lin.mu1()?;
    let p2 = lin.mu2()?;
    let right = angle(&unit(&p1.v), &unit(&p2.v));
    let left = angle(&unit(&p1.v_star), &unit(&p2.v_star));
    let evidence = vec![tol - right, tol - left];
    let holds = evidence.iter().any(|&m| m >= 0.0);
    Ok(ConditionCertificate {
        condition: ConditionTag::A,
        holds,
        evidence,
        theta_grid: vec![],
        variant: Some(if right <= tol { "right" } else if left <= tol { "left" } else { "none" }.into()),
        stages: vec![],
        alpha: None,
    })
}

fn pairs_on(lin: &TwoSeasonLinearization, grid: &[f64]) -> Result<Vec<(Vector, Vector)>> {
    grid.par_iter()
        .map(|&th| {
            let p = lin.rho(th)?;
            Ok((p.v, p.v_star))
        })
        .collect()
}

fn neg_max(v: impl IntoIterator<Item = f64>) -> f64 {
    -v.into_iter().fold(f64::NEG_INFINITY, f64::max)
}

fn min_of(v: impl IntoIterator<Item = f64>) -> f64 {
    v.into_iter().fold(f64::INFINITY, f64::min)
}

fn check_transform(lin: &TwoSeasonLinearization, p: &Matrix) -> Result<Matrix> {
    if p.n() != lin.dim() {
        return Err(invalid("transform has the wrong dimension"));
    }
    inverse(p).map_err(|_| invalid("transform P is singular"))
}

/// (B-1). Without `p`: `S^T V*(theta) < 0`. With `p`: `P S < 0` and
/// `(P^{-1})^T V*(theta) > 0`.
pub fn check_b1(lin: &TwoSeasonLinearization, grid: &[f64], p: Option<&Matrix>) -> Result<ConditionCertificate> {
    check_grid(grid)?;
    let pairs = pairs_on(lin, grid)?;
    let s = lin.s();
    let evidence = match p {
        None => pairs.iter().map(|(_, vs)| neg_max(s.tr_mul_vec(vs))).collect(),
        Some(p) => {
            let pinv_t = check_transform(lin, p)?.transpose();
            let sign = neg_max((p * s).as_slice().iter().copied());
            pairs.iter().map(|(_, vs)| sign.min(min_of(pinv_t.mul_vec(vs)))).collect()
        }
    };
    let cert = ConditionCertificate::from_margins(ConditionTag::B1, evidence, grid.to_vec());
    Ok(cert.variant(if p.is_some() { "transform" } else { "eigenvector" }))
}

/// (B-2). Without `p`: `S V(theta) < 0`. With `p`: `S P < 0` and `P^{-1} V(theta) > 0`.
pub fn check_b2(lin: &TwoSeasonLinearization, grid: &[f64], p: Option<&Matrix>) -> Result<ConditionCertificate> {
    check_grid(grid)?;
    let pairs = pairs_on(lin, grid)?;
    let s = lin.s();
    let evidence = match p {
        None => pairs.iter().map(|(v, _)| neg_max(s.mul_vec(v))).collect(),
        Some(p) => {
            let pinv = check_transform(lin, p)?;
            let sign = neg_max((s * p).as_slice().iter().copied());
            pairs.iter().map(|(v, _)| sign.min(min_of(pinv.mul_vec(v)))).collect()
        }
    };
    let cert = ConditionCertificate::from_margins(ConditionTag::B2, evidence, grid.to_vec());
    Ok(cert.variant(if p.is_some() { "transform" } else { "eigenvector" }))
}

fn shear() -> Matrix {
    Matrix::from_rows(&[[1.0, 1.0], [0.0, 1.0]]).expect("constant matrix")
}

fn auto(
    lin: &TwoSeasonLinearization,
    grid: &[f64],
    check: fn(&TwoSeasonLinearization, &[f64], Option<&Matrix>) -> Result<ConditionCertificate>,
) -> Result<ConditionCertificate> {
    let id = Matrix::identity(lin.dim());
    let c = check(lin, grid, Some(&id))?;
    if c.holds {
        return Ok(c.variant("P = I"));
    }
    if lin.dim() == 2 {
        let c = check(lin, grid, Some(&shear()))?;
        if c.holds {
            return Ok(c.variant("P = [[1,1],[0,1]]"));
        }
    }
    check(lin, grid, None)
}

/// (B-1) trying `P = I`, then `P = [[1,1],[0,1]]` in dimension 2, then the
/// eigenvector form.
pub fn check_b1_auto(lin: &TwoSeasonLinearization, grid: &[f64]) -> Result<ConditionCertificate> {
    auto(lin, grid, check_b1)
}

pub fn check_b2_auto(lin: &TwoSeasonLinearization, grid: &[f64]) -> Result<ConditionCertificate> {
    auto(lin, grid, check_b2)
}

/// (B-3): `S < P^T Q` entrywise and `|P V*(theta) + Q V(theta)| <= tol`.
///
/// Grid margins are the strict-inequality slack where the identity holds,
/// and minus the identity residual where it does not.
pub fn check_b3(
    lin: &TwoSeasonLinearization,
    grid: &[f64],
    p: &Matrix,
    q: &Matrix,
    tol: f64,
) -> Result<ConditionCertificate> {
    check_grid(grid)?;
    if p.n() != lin.dim() || q.n() != lin.dim() {
        return Err(invalid("P and Q must match the system dimension"));
    }
    let pairs = pairs_on(lin, grid)?;
    let ptq = &p.transpose() * q;
    let slack = min_of((&ptq - lin.s()).as_slice().iter().copied());
    let evidence = pairs
        .iter()
        .map(|(v, vs)| {
            let r: Vector = p.mul_vec(vs).iter().zip(q.mul_vec(v)).map(|(a, b)| a + b).collect();
            let res = norm2(&r);
            if res <= tol {
                slack
            } else {
                -res
            }
        })
        .collect();
    Ok(ConditionCertificate::from_margins(ConditionTag::B3, evidence, grid.to_vec()))
}

/// Entries of the matrix required positive by hypothesis (4), row-major:
/// `[[-dJF + dJU, bF - dAF - (bU - dAU)], [hF - hU, -dAF + dAU]]`.
pub fn hyp_parameters_entries(u: &InsectParams, f: &InsectParams) -> [f64; 4] {
    [-f.d_j + u.d_j, f.b - f.d_a - (u.b - u.d_a), f.h - u.h, -f.d_a + u.d_a]
}

/// Entries of the stronger alternative hypothesis:
/// `[[-(hF + dJF) + hU + dJU, bF - bU], [hF - hU, -dAF + dAU]]`.
pub fn hyp_alternative_entries(u: &InsectParams, f: &InsectParams) -> [f64; 4] {
    [-(f.h + f.d_j) + u.h + u.d_j, f.b - u.b, f.h - u.h, -f.d_a + u.d_a]
}

pub fn check_hyp_parameters(u: &InsectParams, f: &InsectParams) -> Result<ConditionCertificate> {
    u.validate()?;
    f.validate()?;
    Ok(ConditionCertificate::from_margins(ConditionTag::Hyp4, hyp_parameters_entries(u, f).to_vec(), vec![]))
}

pub fn check_hyp_alternative(u: &InsectParams, f: &InsectParams) -> Result<ConditionCertificate> {
    u.validate()?;
    f.validate()?;
    Ok(ConditionCertificate::from_margins(ConditionTag::Hyp10, hyp_alternative_entries(u, f).to_vec(), vec![]))
}

/// Ordering of the left Perron vector of a positive 2x2 matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Lemma3Report {
    /// `w2 > w1` for `S^T W = mu W`.
    pub via_eigen: bool,
    /// `s11 + s21 < s12 + s22`.
    pub via_inequality: bool,
    /// Column sums are exactly equal; neither strict statement applies.
    pub boundary: bool,
    pub w: Vector,
    /// `(s12 + s22) - (s11 + s21)`.
    pub margin: f64,
}

pub fn lemma3_left_eigenvector_order(s: &Matrix) -> Result<Lemma3Report> {
    if s.n() != 2 {
        return Err(invalid("the left-eigenvector order test applies to 2x2 matrices"));
    }
    if !(s.min_entry() > 0.0) || !s.is_finite() {
        return Err(invalid("the left-eigenvector order test needs an entrywise positive matrix"));
    }
    let (a, b, c, d) = (s[(0, 0)], s[(0, 1)], s[(1, 0)], s[(1, 1)]);
    // S^T = [[a, c], [b, d]]; Perron root of the 2x2 block in closed form
    let mu = 0.5 * (a + d + ((a - d) * (a - d) + 4.0 * b * c).sqrt());
    // first row of (S^T - mu) W = 0: (a - mu) w1 + c w2 = 0
    let w = unit(&[c, mu - a]);
    let margin = (b + d) - (a + c);
    Ok(Lemma3Report {
        via_eigen: w[1] > w[0],
        via_inequality: margin > 0.0,
        boundary: margin == 0.0,
        w,
        margin,
    })
}

/// Closed-form eigen-data of one season's linearization at zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeasonDiagonalization {
    pub lambda_plus: f64,
    pub lambda_minus: f64,
    /// Eigenvector `(1, x_plus)` for `lambda_plus`.
    pub x_plus: f64,
    pub x_minus: f64,
    /// `max |P diag(lambda) P^{-1} - DF(0)|`.
    pub reconstruction_residual: f64,
}

impl SeasonDiagonalization {
    /// `sqrt((h + dJ - dA)^2 + 4 h b)`.
    fn discriminant(pi: &InsectParams) -> f64 {
        let g = pi.h + pi.d_j - pi.d_a;
        (g * g + 4.0 * pi.h * pi.b).sqrt()
    }

    /// Margins of `x- < 0 < x+` and `1 + x- > 0`.
    pub fn slope_margins(&self) -> [f64; 3] {
        [-self.x_minus, self.x_plus, 1.0 + self.x_minus]
    }
}

pub fn diagonalize_season(pi: &InsectParams) -> Result<SeasonDiagonalization> {
    pi.validate()?;
    if !(pi.b > 0.0) {
        return Err(Error::DegenerateDiagonalization("b = 0 leaves the eigenvector slopes undefined".into()));
    }
    let disc = SeasonDiagonalization::discriminant(pi);
    if !(disc > 0.0) {
        return Err(Error::DegenerateDiagonalization("repeated eigenvalue (h = 0 and d_J = d_A)".into()));
    }
    let mid = -0.5 * (pi.h + pi.d_j + pi.d_a);
    let (lp, lm) = (mid + 0.5 * disc, mid - 0.5 * disc);
    let xp = (lp + pi.h + pi.d_j) / pi.b;
    let xm = (lm + pi.h + pi.d_j) / pi.b;
    let p = Matrix::from_rows(&[[1.0, 1.0], [xp, xm]])?;
    let pinv = Matrix::from_rows(&[[xm, -1.0], [-xp, 1.0]])?.scale(1.0 / (xm - xp));
    let rec = &(&p * &Matrix::from_diag(&[lp, lm])) * &pinv;
    let residual = (&rec - &jacobian(pi, InsectState::new(0.0, 0.0))).max_abs();
    Ok(SeasonDiagonalization {
        lambda_plus: lp,
        lambda_minus: lm,
        x_plus: xp,
        x_minus: xm,
        reconstruction_residual: residual,
    })
}

/// Exponential weights of the two-season product at `theta`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExponentialWeights {
    pub beta_plus: f64,
    pub beta_minus: f64,
    pub gamma_plus: f64,
    pub gamma_minus: f64,
}

impl ExponentialWeights {
    pub fn new(u: &SeasonDiagonalization, f: &SeasonDiagonalization, theta: f64, period: f64) -> Self {
        let tf = (1.0 - theta) * period;
        let tu = theta * period;
        Self {
            beta_plus: (f.lambda_plus * tf).exp(),
            beta_minus: (f.lambda_minus * tf).exp(),
            gamma_plus: (u.lambda_plus * tu).exp(),
            gamma_minus: (u.lambda_minus * tu).exp(),
        }
    }

    /// `(beta+/beta-, gamma+/gamma-)` computed without forming the
    /// (possibly underflowing) weights.
    pub fn ratios(u: &SeasonDiagonalization, f: &SeasonDiagonalization, theta: f64, period: f64) -> (f64, f64) {
        (
            ((f.lambda_plus - f.lambda_minus) * (1.0 - theta) * period).exp(),
            ((u.lambda_plus - u.lambda_minus) * theta * period).exp(),
        )
    }
}

/// Full diagonalization data for a parameter pair at one `theta`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiagonalizationData {
    pub u: SeasonDiagonalization,
    pub f: SeasonDiagonalization,
    pub weights: ExponentialWeights,
}

pub fn diagonalization_data(u: &InsectParams, f: &InsectParams, theta: f64, period: f64) -> Result<DiagonalizationData> {
    let du = diagonalize_season(u)?;
    let df = diagonalize_season(f)?;
    Ok(DiagonalizationData { u: du, f: df, weights: ExponentialWeights::new(&du, &df, theta, period) })
}

/// `alpha = bU bF / sqrt(disc_U^2 disc_F^2)`; with it the column-sum
/// difference of the monodromy is `m12 + m22 - m11 - m21 = -alpha beta- gamma- Psi`.
pub fn alpha(u: &InsectParams, f: &InsectParams) -> f64 {
    u.b * f.b / (SeasonDiagonalization::discriminant(u) * SeasonDiagonalization::discriminant(f))
}

/// The bilinear function whose sign decides the column-sum order of the monodromy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Psi {
    /// Coefficients of `beta gamma`, `beta`, `gamma` and the constant.
    pub c_bg: f64,
    pub c_b: f64,
    pub c_g: f64,
    pub c_1: f64,
}

impl Psi {
    pub fn new(u: &SeasonDiagonalization, f: &SeasonDiagonalization) -> Self {
        let (up, um, fp, fm) = (u.x_plus, u.x_minus, f.x_plus, f.x_minus);
        Self {
            c_bg: (fm - up) * (1.0 + fp) * (1.0 + um),
            c_b: (um - fm) * (1.0 + fp) * (1.0 + up),
            c_g: (up - fp) * (1.0 + um) * (1.0 + fm),
            c_1: (fp - um) * (1.0 + fm) * (1.0 + up),
        }
    }

    pub fn eval(&self, beta: f64, gamma: f64) -> f64 {
        self.c_bg * beta * gamma + self.c_b * beta + self.c_g * gamma + self.c_1
    }

    pub fn d_beta(&self, gamma: f64) -> f64 {
        self.c_bg * gamma + self.c_b
    }

    pub fn d_gamma(&self, beta: f64) -> f64 {
        self.c_bg * beta + self.c_g
    }

    /// Upper bounds of the partial derivatives on `beta, gamma > 1`, valid when
    /// `c_bg < 0`: `(d_beta bound, d_gamma bound)`.
    pub fn derivative_bounds(&self) -> (f64, f64) {
        (self.c_bg + self.c_b, self.c_bg + self.c_g)
    }
}

/// Checks a theorem-3 style certificate stage by stage; `evidence` holds the
/// stage (vii) margin `-Psi` at each grid point.
pub fn theorem3_certificate(
    u: &InsectParams,
    f: &InsectParams,
    period: f64,
    grid: &[f64],
) -> Result<ConditionCertificate> {
    u.validate()?;
    f.validate()?;
    check_grid(grid)?;
    if !(period.is_finite() && period > 0.0) {
        return Err(invalid("period must be positive"));
    }
    let mut stages = Vec::with_capacity(8);

    stages.push(StageResult::from_margin("i", min_of(hyp_parameters_entries(u, f))));

    stages.push(match (r0(u), r0(f)) {
        (Ok(ru), Ok(rf)) => StageResult::from_margin("ii", (1.0 - ru).min(rf - 1.0))
            .with_note(format!("R0(piU) = {ru}, R0(piF) = {rf}")),
        (Err(e), _) | (_, Err(e)) => StageResult::undefined("ii", e.to_string()),
    });

    stages.push(StageResult::from_margin("iii", u.b + u.d_j - u.d_a));

    let diag = (diagonalize_season(u), diagonalize_season(f));
    let (du, df) = match diag {
        (Ok(du), Ok(df)) => (du, df),
        (Err(e), _) | (_, Err(e)) => {
            for id in ["iv", "v", "vi", "vii", "viii"] {
                stages.push(StageResult::undefined(id, e.to_string()));
            }
            return Ok(finish(stages, vec![], grid, None));
        }
    };

    let slopes = min_of(du.slope_margins().into_iter().chain(df.slope_margins()));
    stages.push(StageResult::from_margin("iv", slopes));

    let psi = Psi::new(&du, &df);
    let at_one = psi.eval(1.0, 1.0);
    let scale = [psi.c_bg, psi.c_b, psi.c_g, psi.c_1].iter().map(|c| c.abs()).fold(1.0, f64::max);
    stages.push(StageResult {
        id: "v".into(),
        holds: at_one.abs() <= 1e-12 * scale,
        margin: Some(-at_one.abs()),
        note: Some(format!("Psi(1,1) = {at_one:e}")),
    });

    // analytic bounds, then the exact linear partials at sample points
    let (bound_b, bound_g) = psi.derivative_bounds();
    let samples = [1.0 + 1e-9, 1.5, 4.0, 1e3];
    let sampled = samples
        .iter()
        .flat_map(|&x| [psi.d_beta(x), psi.d_gamma(x)])
        .fold(f64::NEG_INFINITY, f64::max);
    let vi = neg_max([psi.c_bg, bound_b, bound_g, sampled]);
    stages.push(StageResult::from_margin("vi", vi).with_note(format!(
        "beta-gamma coefficient {:e}, d/dbeta bound {bound_b:e}, d/dgamma bound {bound_g:e}",
        psi.c_bg
    )));

    let psi_vals: Vec<f64> = grid
        .iter()
        .map(|&th| {
            let (rb, rg) = ExponentialWeights::ratios(&du, &df, th, period);
            psi.eval(rb, rg)
        })
        .collect();
    let evidence: Vec<f64> = psi_vals.iter().map(|p| -p).collect();
    stages.push(StageResult::from_margin("vii", min_of(evidence.iter().copied())));

    let a = alpha(u, f);
    let m1 = jacobian(u, InsectState::new(0.0, 0.0));
    let m2 = jacobian(f, InsectState::new(0.0, 0.0));
    let cross: Result<Vec<(f64, f64)>> = grid
        .par_iter()
        .zip(&psi_vals)
        .map(|(&th, &pv)| {
            let m = &mat_exp(&m2.scale((1.0 - th) * period), DEFAULT_EXP_TOL)?
                * &mat_exp(&m1.scale(th * period), DEFAULT_EXP_TOL)?;
            let direct = m[(0, 1)] + m[(1, 1)] - m[(0, 0)] - m[(1, 0)];
            let w = ExponentialWeights::new(&du, &df, th, period);
            let predicted = -a * w.beta_minus * w.gamma_minus * pv;
            Ok((direct, predicted))
        })
        .collect();
    stages.push(match cross {
        Ok(pairs) => {
            let agree = pairs.iter().all(|(d, p)| d.signum() == p.signum() && *d != 0.0);
            let worst_rel = pairs
                .iter()
                .map(|(d, p)| (d - p).abs() / d.abs().max(p.abs()).max(f64::MIN_POSITIVE))
                .fold(0.0, f64::max);
            let margin = min_of(pairs.iter().map(|(d, p)| d * p.signum()));
            StageResult { id: "viii".into(), holds: agree, margin: Some(margin), note: None }
                .with_note(format!("max relative gap between direct and predicted column-sum difference {worst_rel:e}"))
        }
        Err(e) => StageResult::undefined("viii", e.to_string()),
    });

    Ok(finish(stages, evidence, grid, Some(a)))
}

fn finish(stages: Vec<StageResult>, evidence: Vec<f64>, grid: &[f64], alpha: Option<f64>) -> ConditionCertificate {
    ConditionCertificate {
        condition: ConditionTag::Thm3,
        holds: stages.iter().all(|s| s.holds),
        evidence,
        theta_grid: grid.to_vec(),
        variant: None,
        stages,
        alpha,
    }
}

/// `<S V, V*>` on a grid, the quantity whose sign the B-conditions control.
pub fn rate_on_grid(lin: &TwoSeasonLinearization, grid: &[f64]) -> Result<Vec<f64>> {
    check_grid(grid)?;
    let pairs = pairs_on(lin, grid)?;
    Ok(pairs.iter().map(|(v, vs)| dot(&lin.s().mul_vec(v), vs)).collect())
}
