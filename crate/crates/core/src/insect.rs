//! Juvenile/adult insect model with quadratic juvenile competition:
//!
//! ```text
//! J' = b A - J (h + d_J + c_J J)
//! A' = h J - d_A A
//! ```

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::floquet::TwoSeasonLinearization;
use crate::linalg::{Matrix, Vector};
use crate::seasonal::{AutonomousPiece, SeasonalSchedule, SeasonalSystem, VectorField};

/// `R0` values within this distance of 1 are treated as the degenerate case.
pub const R0_DEGENERATE_TOL: f64 = 1e-12;

/// Rates `(b, h, d_J, c_J, d_A)`: birth, hatching, juvenile death,
/// juvenile competition, adult death.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InsectParams {
    pub b: f64,
    pub h: f64,
    #[serde(rename = "dJ")]
    pub d_j: f64,
    #[serde(rename = "cJ")]
    pub c_j: f64,
    #[serde(rename = "dA")]
    pub d_a: f64,
}

impl InsectParams {
    pub fn new(b: f64, h: f64, d_j: f64, c_j: f64, d_a: f64) -> Result<Self> {
        let p = Self { b, h, d_j, c_j, d_a };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in self.named() {
            if !(v.is_finite() && v >= 0.0) {
                return Err(invalid(format!("parameter {name} must be finite and nonnegative, got {v}")));
            }
        }
        Ok(())
    }

    pub(crate) fn named(&self) -> [(&'static str, f64); 5] {
        [("b", self.b), ("h", self.h), ("dJ", self.d_j), ("cJ", self.c_j), ("dA", self.d_a)]
    }

    pub fn as_array(&self) -> [f64; 5] {
        [self.b, self.h, self.d_j, self.c_j, self.d_a]
    }

    pub fn from_array(p: [f64; 5]) -> Result<Self> {
        Self::new(p[0], p[1], p[2], p[3], p[4])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InsectState {
    pub j: f64,
    pub a: f64,
}

impl InsectState {
    pub fn new(j: f64, a: f64) -> Self {
        Self { j, a }
    }

    pub fn to_vec(self) -> Vector {
        vec![self.j, self.a]
    }
}

pub fn vector_field(pi: &InsectParams, x: InsectState) -> [f64; 2] {
    [
        pi.b * x.a - x.j * (pi.h + pi.d_j + pi.c_j * x.j),
        pi.h * x.j - pi.d_a * x.a,
    ]
}

pub fn jacobian(pi: &InsectParams, x: InsectState) -> Matrix {
    Matrix::new(2, vec![-pi.h - pi.d_j - 2.0 * pi.c_j * x.j, pi.b, pi.h, -pi.d_a])
        .expect("finite parameters give a finite jacobian")
}

/// Basic offspring number `b h / (d_A (h + d_J))`.
pub fn r0(pi: &InsectParams) -> Result<f64> {
    let den = pi.d_a * (pi.h + pi.d_j);
    if !(den > 0.0) {
        return Err(invalid("R0 needs d_A > 0 and h + d_J > 0"));
    }
    Ok(pi.b * pi.h / den)
}

/// Dulac divergence `-(h + d_J + c_J J + d_A)`.
///
/// This is the displayed form with the per-capita competition rate. The
/// trace of [`jacobian`] carries `2 c_J J` instead; both are negative on the
/// closed orthant.
pub fn divergence(pi: &InsectParams, x: InsectState) -> f64 {
    -(pi.h + pi.d_j + pi.c_j * x.j + pi.d_a)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EquilibriumKind {
    StableNode,
    Saddle,
    /// Zero eigenvalue at `R0 = 1`; orbits still approach the origin.
    HigherOrderAttracting,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Equilibrium {
    pub state: InsectState,
    pub kind: EquilibriumKind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquilibriumReport {
    pub s0: Equilibrium,
    /// Positive steady state, present iff `R0 > 1`.
    pub s1: Option<Equilibrium>,
    pub r0: f64,
    /// Characteristic direction `arctan((h + d_J) / b)`, present when `R0 <= 1`.
    pub direction_delta1: Option<f64>,
    /// Slope `A/J` of the unstable manifold at the origin, present when `R0 > 1`.
    pub unstable_slope_k1: Option<f64>,
}

/// Positive steady state `(R0 - 1) ((h + d_J)/c_J, h (h + d_J)/(c_J d_A))`.
pub fn positive_steady_state(pi: &InsectParams) -> Result<InsectState> {
    let r = r0(pi)?;
    if !(pi.c_j > 0.0) {
        return Err(invalid("steady state needs c_J > 0"));
    }
    let hd = pi.h + pi.d_j;
    Ok(InsectState::new((r - 1.0) * hd / pi.c_j, (r - 1.0) * pi.h * hd / (pi.c_j * pi.d_a)))
}

pub fn equilibria(pi: &InsectParams) -> Result<EquilibriumReport> {
    pi.validate()?;
    let r = r0(pi)?;
    let origin = InsectState::new(0.0, 0.0);
    let hd = pi.h + pi.d_j;
    if (r - 1.0).abs() <= R0_DEGENERATE_TOL {
        return Ok(EquilibriumReport {
            s0: Equilibrium { state: origin, kind: EquilibriumKind::HigherOrderAttracting },
            s1: None,
            r0: r,
            direction_delta1: Some(hd.atan2(pi.b)),
            unstable_slope_k1: None,
        });
    }
    if r < 1.0 {
        return Ok(EquilibriumReport {
            s0: Equilibrium { state: origin, kind: EquilibriumKind::StableNode },
            s1: None,
            r0: r,
            direction_delta1: Some(hd.atan2(pi.b)),
            unstable_slope_k1: None,
        });
    }
    let gap = hd - pi.d_a;
    let k1 = (gap + (gap * gap + 4.0 * pi.b * pi.h).sqrt()) / (2.0 * pi.b);
    Ok(EquilibriumReport {
        s0: Equilibrium { state: origin, kind: EquilibriumKind::Saddle },
        s1: Some(Equilibrium { state: positive_steady_state(pi)?, kind: EquilibriumKind::StableNode }),
        r0: r,
        direction_delta1: None,
        unstable_slope_k1: Some(k1),
    })
}

/// Forward-invariant rectangles `[0, L] x [0, tau* L]` for `L >= max(0, J*)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InvariantBox {
    pub tau_star: f64,
    pub j_star: f64,
}

impl InvariantBox {
    pub fn min_size(&self) -> f64 {
        self.j_star.max(0.0)
    }

    /// `(L, tau* L)` corner of the box of size `l`.
    pub fn corner(&self, l: f64) -> Result<[f64; 2]> {
        if !(l >= self.min_size()) {
            return Err(invalid(format!("box size {l} is below max(0, J*) = {}", self.min_size())));
        }
        Ok([l, self.tau_star * l])
    }

    /// Smallest admissible size whose box contains `x`.
    pub fn size_containing(&self, x: InsectState) -> f64 {
        let by_a = if self.tau_star > 0.0 { x.a / self.tau_star } else { 0.0 };
        self.min_size().max(x.j).max(by_a)
    }

    pub fn contains(&self, l: f64, x: InsectState, tol: f64) -> bool {
        x.j >= -tol && x.a >= -tol && x.j <= l + tol && x.a <= self.tau_star * l + tol
    }

    /// Worst outward fluxes on the right edge `J = L` and the top edge
    /// `A = tau* L` for one parameter set; both are `<= 0` for admissible `L`.
    pub fn edge_fluxes(&self, pi: &InsectParams, l: f64) -> [f64; 2] {
        let top = pi.h * l - pi.d_a * self.tau_star * l;
        let right = pi.b * self.tau_star * l - pi.h * l - pi.d_j * l - pi.c_j * l * l;
        [right, top]
    }
}

/// `tau* = sup h/d_A`, `J* = sup (b tau* - h - d_J)/c_J` over a
/// piecewise-constant parameter schedule.
pub fn invariant_box(schedule: &[InsectParams]) -> Result<InvariantBox> {
    if schedule.is_empty() {
        return Err(invalid("empty parameter schedule"));
    }
    for p in schedule {
        p.validate()?;
        if !(p.c_j > 0.0 && p.d_a > 0.0) {
            return Err(invalid("c_J and d_A must be bounded away from zero for a bounded box"));
        }
    }
    let tau_star = schedule.iter().map(|p| p.h / p.d_a).fold(f64::NEG_INFINITY, f64::max);
    let j_star = schedule
        .iter()
        .map(|p| (p.b * tau_star - p.h - p.d_j) / p.c_j)
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(InvariantBox { tau_star, j_star })
}

/// The insect vector field as a generic [`VectorField`].
#[derive(Debug, Clone, Copy)]
pub struct InsectField(pub InsectParams);

impl VectorField for InsectField {
    fn dim(&self) -> usize {
        2
    }

    fn eval(&self, x: &[f64]) -> Vector {
        vector_field(&self.0, InsectState::new(x[0], x[1])).to_vec()
    }

    fn jacobian(&self, x: &[f64]) -> Matrix {
        jacobian(&self.0, InsectState::new(x[0], x[1]))
    }
}

/// Two-season system: `pi_u` on `[0, theta)`, `pi_f` on `[theta, 1)` of each period.
pub fn as_seasonal_system(
    pi_u: &InsectParams,
    pi_f: &InsectParams,
    theta: f64,
    period: f64,
) -> Result<SeasonalSystem> {
    pi_u.validate()?;
    pi_f.validate()?;
    let schedule = SeasonalSchedule::two_season(period, theta)?;
    SeasonalSystem::new(
        schedule,
        vec![
            AutonomousPiece::new(Arc::new(InsectField(*pi_u)))?,
            AutonomousPiece::new(Arc::new(InsectField(*pi_f)))?,
        ],
    )
}

/// Linearizations at zero of both seasons.
pub fn linearization(pi_u: &InsectParams, pi_f: &InsectParams, period: f64) -> Result<TwoSeasonLinearization> {
    let zero = InsectState::new(0.0, 0.0);
    TwoSeasonLinearization::new(jacobian(pi_u, zero), jacobian(pi_f, zero), period)
}
