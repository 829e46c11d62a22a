//! Spectral radius over split-season schedules: the unfavorable budget
//! `theta` and the favorable budget `1 - theta` are cut into `K`
//! interleaved blocks.
//!
//! Matrices here already absorb the period: `m1 = T DF1(0)`, `m2 = T DF2(0)`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::linalg::{is_metzler, mat_exp, spectral_abscissa, spectral_radius, Matrix, DEFAULT_EXP_TOL};

pub const SUM_TOL: f64 = 1e-12;
pub const DEFAULT_RESOLUTION: usize = 50;
/// Exhaustive search is used while the number of grid schedules stays below this.
pub const DEFAULT_GRID_CAP: usize = 5_000_000;
pub const GELFAND_TOL: f64 = 1e-9;

/// `(theta_1..theta_K)` unfavorable and `(theta'_1..theta'_K)` favorable block lengths.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitSchedule {
    sigma: Vec<f64>,
    sigma_prime: Vec<f64>,
}

impl SplitSchedule {
    pub fn new(sigma: Vec<f64>, sigma_prime: Vec<f64>) -> Result<Self> {
        if sigma.is_empty() || sigma.len() != sigma_prime.len() {
            return Err(invalid("sigma and sigma' must be nonempty and of equal length"));
        }
        if sigma.iter().chain(&sigma_prime).any(|v| !(0.0..=1.0).contains(v)) {
            return Err(invalid("block lengths must lie in [0, 1]"));
        }
        let total: f64 = sigma.iter().chain(&sigma_prime).sum();
        if (total - 1.0).abs() > SUM_TOL {
            return Err(invalid(format!("block lengths sum to {total}, expected 1")));
        }
        Ok(Self { sigma, sigma_prime })
    }

    /// The one-block schedule `((theta), (1 - theta))`.
    pub fn single(theta: f64) -> Result<Self> {
        Self::new(vec![theta], vec![1.0 - theta])
    }

    pub fn k(&self) -> usize {
        self.sigma.len()
    }

    pub fn sigma(&self) -> &[f64] {
        &self.sigma
    }

    pub fn sigma_prime(&self) -> &[f64] {
        &self.sigma_prime
    }

    pub fn theta(&self) -> f64 {
        self.sigma.iter().sum()
    }

    /// Checks membership in the schedule set for `theta`.
    pub fn is_member(&self, theta: f64) -> bool {
        (self.theta() - theta).abs() <= SUM_TOL
            && (self.sigma_prime.iter().sum::<f64>() - (1.0 - theta)).abs() <= SUM_TOL
    }

    /// Uniformly random member of the schedule set (flat Dirichlet blocks).
    pub fn random(theta: f64, k: usize, rng: &mut impl Rng) -> Result<Self> {
        if k == 0 || !(0.0..=1.0).contains(&theta) {
            return Err(invalid("need k >= 1 and theta in [0, 1]"));
        }
        let mut draw = |budget: f64| -> Vec<f64> {
            let w: Vec<f64> = (0..k).map(|_| -rng.gen::<f64>().max(f64::MIN_POSITIVE).ln()).collect();
            let s: f64 = w.iter().sum();
            let mut out: Vec<f64> = w.iter().map(|x| budget * x / s).collect();
            // put the rounding remainder on the last block
            let head: f64 = out[..k - 1].iter().sum();
            out[k - 1] = (budget - head).max(0.0);
            out
        };
        let sigma = draw(theta);
        let sigma_prime = draw(1.0 - theta);
        Self::new(sigma, sigma_prime)
    }
}

fn check_pair(m1: &Matrix, m2: &Matrix) -> Result<()> {
    if m1.n() != m2.n() {
        return Err(invalid("season matrices differ in size"));
    }
    if !m1.is_finite() || !m2.is_finite() {
        return Err(invalid("season matrices must be finite"));
    }
    Ok(())
}

/// `e^{theta'_K m2} e^{theta_K m1} ... e^{theta'_1 m2} e^{theta_1 m1}`.
pub fn split_monodromy(m1: &Matrix, m2: &Matrix, schedule: &SplitSchedule) -> Result<Matrix> {
    check_pair(m1, m2)?;
    let mut p = Matrix::identity(m1.n());
    for (s, sp) in schedule.sigma.iter().zip(&schedule.sigma_prime) {
        p = &mat_exp(&m1.scale(*s), DEFAULT_EXP_TOL)? * &p;
        p = &mat_exp(&m2.scale(*sp), DEFAULT_EXP_TOL)? * &p;
    }
    Ok(p)
}

/// Spectral radius; closed form for 2x2 nonnegative products.
fn radius(m: &Matrix) -> Result<f64> {
    if m.n() == 2 && m.min_entry() >= 0.0 {
        let (a, b, c, d) = (m[(0, 0)], m[(0, 1)], m[(1, 0)], m[(1, 1)]);
        let disc = ((a - d) * (a - d) + 4.0 * b * c).max(0.0);
        return Ok(0.5 * (a + d + disc.sqrt()));
    }
    spectral_radius(m)
}

pub fn split_rho(m1: &Matrix, m2: &Matrix, schedule: &SplitSchedule) -> Result<f64> {
    radius(&split_monodromy(m1, m2, schedule)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SplitMode {
    Max,
    Min,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SearchMethod {
    ExhaustiveGrid,
    /// Coordinate descent with random restarts; no optimality guarantee.
    HeuristicDescent,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitOptimum {
    pub schedule: SplitSchedule,
    pub rho: f64,
    pub mode: SplitMode,
    pub method: SearchMethod,
    pub evaluated: usize,
    /// A grid maximum bounds the true maximum from below (and a grid minimum
    /// the true minimum from above).
    pub estimate: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitOptions {
    pub resolution: usize,
    pub grid_cap: usize,
    pub restarts: usize,
    pub seed: u64,
}

impl Default for SplitOptions {
    fn default() -> Self {
        Self { resolution: DEFAULT_RESOLUTION, grid_cap: DEFAULT_GRID_CAP, restarts: 16, seed: 0 }
    }
}

/// All `k`-tuples of nonnegative integers summing to `r`, in lexicographic order.
fn compositions(r: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(r: usize, k: usize, prefix: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if k == 1 {
            prefix.push(r);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for first in 0..=r {
            prefix.push(first);
            rec(r - first, k - 1, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    rec(r, k, &mut Vec::with_capacity(k), &mut out);
    out
}

fn binom(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Number of grid schedules for `k` blocks at `resolution`.
pub fn grid_size(k: usize, resolution: usize) -> f64 {
    let per = binom(resolution + k - 1, k - 1);
    per * per
}

fn better(mode: SplitMode, a: (f64, usize), b: (f64, usize)) -> (f64, usize) {
    let a_wins = match mode {
        SplitMode::Max => a.0 > b.0 || (a.0 == b.0 && a.1 < b.1),
        SplitMode::Min => a.0 < b.0 || (a.0 == b.0 && a.1 < b.1),
    };
    if a_wins {
        a
    } else {
        b
    }
}

/// Best schedule for `mode` over the schedule set of `theta` with `k` blocks.
pub fn optimize_split(
    m1: &Matrix,
    m2: &Matrix,
    theta: f64,
    k: usize,
    mode: SplitMode,
    opts: &SplitOptions,
) -> Result<SplitOptimum> {
    check_pair(m1, m2)?;
    if k == 0 {
        return Err(invalid("k must be at least 1"));
    }
    if !(0.0..=1.0).contains(&theta) {
        return Err(invalid("theta must lie in [0, 1]"));
    }
    if opts.resolution == 0 {
        return Err(invalid("resolution must be positive"));
    }
    if grid_size(k, opts.resolution) <= opts.grid_cap as f64 {
        exhaustive(m1, m2, theta, k, mode, opts.resolution)
    } else {
        heuristic(m1, m2, theta, k, mode, opts)
    }
}

fn exhaustive(m1: &Matrix, m2: &Matrix, theta: f64, k: usize, mode: SplitMode, r: usize) -> Result<SplitOptimum> {
    let rf = r as f64;
    let e1: Vec<Matrix> = (0..=r)
        .map(|j| mat_exp(&m1.scale(theta * j as f64 / rf), DEFAULT_EXP_TOL))
        .collect::<Result<_>>()?;
    let e2: Vec<Matrix> = (0..=r)
        .map(|j| mat_exp(&m2.scale((1.0 - theta) * j as f64 / rf), DEFAULT_EXP_TOL))
        .collect::<Result<_>>()?;
    let comps = compositions(r, k);
    let nc = comps.len();
    let n = m1.n();
    let start = match mode {
        SplitMode::Max => (f64::NEG_INFINITY, usize::MAX),
        SplitMode::Min => (f64::INFINITY, usize::MAX),
    };
    let best = comps
        .par_iter()
        .enumerate()
        .map(|(i, c)| {
            let mut local = start;
            for (j, cp) in comps.iter().enumerate() {
                let mut p = Matrix::identity(n);
                for b in 0..k {
                    p = &e1[c[b]] * &p;
                    p = &e2[cp[b]] * &p;
                }
                let rho = radius(&p)?;
                local = better(mode, (rho, i * nc + j), local);
            }
            Ok::<_, crate::Error>(local)
        })
        .try_reduce(|| start, |a, b| Ok(better(mode, a, b)))?;
    let (ci, cj) = (best.1 / nc, best.1 % nc);
    let sigma = comps[ci].iter().map(|&c| theta * c as f64 / rf).collect();
    let sigma_prime = comps[cj].iter().map(|&c| (1.0 - theta) * c as f64 / rf).collect();
    Ok(SplitOptimum {
        schedule: SplitSchedule::new(sigma, sigma_prime)?,
        rho: best.0,
        mode,
        method: SearchMethod::ExhaustiveGrid,
        evaluated: nc * nc,
        estimate: match mode {
            SplitMode::Max => "grid maximum, a lower estimate of the true maximum".into(),
            SplitMode::Min => "grid minimum, an upper estimate of the true minimum".into(),
        },
    })
}

fn heuristic(m1: &Matrix, m2: &Matrix, theta: f64, k: usize, mode: SplitMode, opts: &SplitOptions) -> Result<SplitOptimum> {
    let sign = match mode {
        SplitMode::Max => 1.0,
        SplitMode::Min => -1.0,
    };
    let score = |s: &[f64]| -> Result<f64> {
        let sched = SplitSchedule { sigma: s[..k].to_vec(), sigma_prime: s[k..].to_vec() };
        Ok(sign * split_rho(m1, m2, &sched)?)
    };
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut best: Option<(f64, Vec<f64>)> = None;
    let mut evaluated = 0;
    for restart in 0..opts.restarts.max(1) {
        let start = if restart == 0 {
            SplitSchedule::single_padded(theta, k)
        } else {
            SplitSchedule::random(theta, k, &mut rng)?
        };
        let mut x: Vec<f64> = start.sigma.iter().chain(&start.sigma_prime).copied().collect();
        let mut fx = score(&x)?;
        evaluated += 1;
        let mut step = 0.25;
        while step > 1e-6 {
            let mut improved = false;
            // move mass between two blocks of the same budget
            for half in [0..k, k..2 * k] {
                for a in half.clone() {
                    for b in half.clone() {
                        if a == b {
                            continue;
                        }
                        let budget = if a < k { theta } else { 1.0 - theta };
                        let delta = (step * budget).min(x[a]);
                        if delta <= 0.0 {
                            continue;
                        }
                        let mut y = x.clone();
                        y[a] -= delta;
                        y[b] += delta;
                        let fy = score(&y)?;
                        evaluated += 1;
                        if fy > fx + 1e-15 {
                            x = y;
                            fx = fy;
                            improved = true;
                        }
                    }
                }
            }
            if !improved {
                step *= 0.5;
            }
        }
        if best.as_ref().is_none_or(|b| fx > b.0) {
            best = Some((fx, x));
        }
    }
    let (f, x) = best.expect("at least one restart");
    let sched = SplitSchedule::new(x[..k].to_vec(), x[k..].to_vec())?;
    Ok(SplitOptimum {
        schedule: sched,
        rho: sign * f,
        mode,
        method: SearchMethod::HeuristicDescent,
        evaluated,
        estimate: "heuristic local optimum from coordinate descent with random restarts".into(),
    })
}

impl SplitSchedule {
    /// One block carrying the whole budget, padded with empty blocks to length `k`.
    pub fn single_padded(theta: f64, k: usize) -> Self {
        let mut sigma = vec![0.0; k];
        let mut sigma_prime = vec![0.0; k];
        sigma[0] = theta;
        sigma_prime[0] = 1.0 - theta;
        Self { sigma, sigma_prime }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GelfandRow {
    pub theta: f64,
    pub rho: f64,
    /// `e^{theta mu1 + (1 - theta) mu2}`.
    pub bound: f64,
    pub excess: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GelfandReport {
    pub rows: Vec<GelfandRow>,
    /// Indices of schedules with `rho > bound + 1e-9`.
    pub violations: Vec<usize>,
    pub max_excess: f64,
}

/// Compares `rho` of each split product with `e^{theta mu1 + (1-theta) mu2}`;
/// violations are collected, not treated as errors.
pub fn gelfand_bound_probe(m1: &Matrix, m2: &Matrix, schedules: &[SplitSchedule]) -> Result<GelfandReport> {
    check_pair(m1, m2)?;
    if !is_metzler(m1) || !is_metzler(m2) {
        return Err(invalid("the bound probe expects Metzler matrices"));
    }
    let mu1 = spectral_abscissa(m1)?;
    let mu2 = spectral_abscissa(m2)?;
    let rows: Vec<GelfandRow> = schedules
        .par_iter()
        .map(|s| {
            let th = s.theta();
            let rho = split_rho(m1, m2, s)?;
            let bound = (th * mu1 + (1.0 - th) * mu2).exp();
            Ok(GelfandRow { theta: th, rho, bound, excess: rho - bound })
        })
        .collect::<Result<_>>()?;
    let violations = rows
        .iter()
        .enumerate()
        .filter(|(_, r)| r.excess > GELFAND_TOL * r.bound.max(1.0))
        .map(|(i, _)| i)
        .collect();
    let max_excess = rows.iter().map(|r| r.excess).fold(f64::NEG_INFINITY, f64::max);
    Ok(GelfandReport { rows, violations, max_excess })
}

/// `theta* = muF / (muF - muU)` for pairs sharing their Perron vector.
pub fn condition_a_threshold(mu_u: f64, mu_f: f64) -> Result<f64> {
    if !(mu_f > 0.0 && mu_u < 0.0) {
        return Err(invalid(format!("need muF > 0 > muU, got muF = {mu_f}, muU = {mu_u}")));
    }
    Ok(mu_f / (mu_f - mu_u))
}
