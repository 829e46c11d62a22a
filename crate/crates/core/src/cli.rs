//! Command dispatch and report emission for the `seasonal-threshold` binary.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::conditions::{
    check_b1_auto, check_b2_auto, check_condition_a, check_hyp_alternative, check_hyp_parameters,
    theorem3_certificate, ConditionCertificate, ConditionTag, DEFAULT_ANGLE_TOL,
};
use crate::error::{Error, Result};
use crate::floquet::{find_threshold, TwoSeasonLinearization};
use crate::scenario::Scenario;
use crate::simulate::{find_periodic_orbit, integrate, multiplier, SimOptions};
use crate::split::optimize_split;
use crate::verify::{verify_suite, CheckStatus};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Floquet,
    Threshold,
    Check,
    Simulate,
    Poincare,
    Split,
    Verify,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOptions {
    pub out_dir: PathBuf,
    pub with_simulation: bool,
    pub seed: u64,
    /// Initial state for `simulate` and `poincare`; all ones when absent.
    pub x0: Option<Vec<f64>>,
    /// Horizon of `simulate`, in periods.
    pub periods: usize,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self { out_dir: PathBuf::from("."), with_simulation: false, seed: 0, x0: None, periods: 20 }
    }
}

/// Files written and the text printed for a command.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub files: Vec<PathBuf>,
    pub summary: String,
    /// False when some row or certificate could not be evaluated.
    pub complete: bool,
}

/// Seventeen significant digits, enough to round-trip an f64.
pub fn fmt_num(x: f64) -> String {
    format!("{x:.16e}")
}

fn csv_writer() -> csv::Writer<Vec<u8>> {
    csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new())
}

fn csv_finish(w: csv::Writer<Vec<u8>>) -> Result<String> {
    let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Io(e.to_string()))
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(e.to_string())
}

fn spectral_class(rho: f64) -> &'static str {
    if rho > 1.0 {
        "persistence"
    } else {
        "extinction"
    }
}

/// `(theta, (rho, rho', rho''), simulated multiplier)`
type SweepRow = (f64, Result<(f64, f64, f64)>, Option<Result<f64>>);

/// One CSV row per grid theta; failures land in the `error` column.
pub fn run_sweep(s: &Scenario, with_simulation: bool) -> Result<(String, bool)> {
    use rayon::prelude::*;
    let lin = s.linearization()?;
    let grid = s.grid();
    let sim = s.sim_options();
    let rows: Vec<SweepRow> = grid
        .par_iter()
        .map(|&th| {
            let vals = (|| Ok((lin.rho(th)?.rho, lin.rho_prime(th)?, lin.rho_second(th)?)))();
            let lam = with_simulation.then(|| multiplier(&s.system(th)?, &sim));
            (th, vals, lam)
        })
        .collect();
    let mut w = csv_writer();
    let mut header = vec!["theta", "rho", "rho_prime", "rho_second", "classification"];
    if with_simulation {
        header.push("lambda_simulated");
    }
    header.push("error");
    w.write_record(&header).map_err(csv_err)?;
    let mut complete = true;
    for (th, vals, lam) in rows {
        let mut rec = vec![fmt_num(th)];
        let mut errors = Vec::new();
        match vals {
            Ok((r, d1, d2)) => {
                rec.extend([fmt_num(r), fmt_num(d1), fmt_num(d2), spectral_class(r).to_string()]);
            }
            Err(e) => {
                rec.extend(std::iter::repeat_n(String::new(), 4));
                errors.push(e.to_string());
            }
        }
        match lam {
            Some(Ok(l)) => rec.push(fmt_num(l)),
            Some(Err(e)) => {
                rec.push(String::new());
                errors.push(e.to_string());
            }
            None => {}
        }
        complete &= errors.is_empty();
        rec.push(errors.join("; "));
        w.write_record(&rec).map_err(csv_err)?;
    }
    Ok((csv_finish(w)?, complete))
}

/// Certificate outcome or the reason it could not be evaluated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckEntry {
    pub condition: ConditionTag,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub certificate: Option<ConditionCertificate>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

pub fn run_checks(s: &Scenario) -> Result<Vec<CheckEntry>> {
    let lin = s.linearization()?;
    let grid = s.grid();
    let entry = |tag: ConditionTag, r: Result<ConditionCertificate>| match r {
        Ok(c) => CheckEntry { condition: tag, certificate: Some(c), error: None },
        Err(e) => CheckEntry { condition: tag, certificate: None, error: Some(e.to_string()) },
    };
    let mut out = vec![
        entry(ConditionTag::A, check_condition_a(&lin, DEFAULT_ANGLE_TOL)),
        entry(ConditionTag::B1, check_b1_auto(&lin, &grid)),
        entry(ConditionTag::B2, check_b2_auto(&lin, &grid)),
    ];
    if let Some(p) = &s.insect {
        out.push(entry(ConditionTag::Hyp4, check_hyp_parameters(&p.pi_u, &p.pi_f)));
        out.push(entry(ConditionTag::Hyp10, check_hyp_alternative(&p.pi_u, &p.pi_f)));
        out.push(entry(ConditionTag::Thm3, theorem3_certificate(&p.pi_u, &p.pi_f, s.period, &grid)));
    }
    Ok(out)
}

/// The serialized name of a unit enum variant.
fn label<T: Serialize>(v: &T) -> Result<String> {
    match serde_json::to_value(v).map_err(|e| Error::Io(e.to_string()))? {
        serde_json::Value::String(s) => Ok(s),
        other => Ok(other.to_string()),
    }
}

fn write_file(dir: &Path, name: &str, content: &str) -> Result<PathBuf> {
    std::fs::create_dir_all(dir).map_err(|e| Error::Io(format!("{}: {e}", dir.display())))?;
    let path = dir.join(name);
    std::fs::write(&path, content).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    Ok(path)
}

fn to_json<T: Serialize>(v: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(v).map_err(|e| Error::Io(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

fn start_state(opts: &RunOptions, n: usize) -> Result<Vec<f64>> {
    match &opts.x0 {
        Some(x) if x.len() != n => Err(Error::InvalidInput(format!("x0 has {} entries, expected {n}", x.len()))),
        Some(x) => Ok(x.clone()),
        None => Ok(vec![1.0; n]),
    }
}

fn trajectory_csv(s: &Scenario, lin: &TwoSeasonLinearization, theta: f64, opts: &RunOptions, sim: &SimOptions) -> Result<String> {
    let system = s.system(theta)?;
    let x0 = start_state(opts, lin.dim())?;
    let traj = integrate(&system, &x0, 0.0, opts.periods as f64 * s.period, sim)?;
    let mut w = csv_writer();
    let mut header = vec!["time".to_string()];
    if s.insect.is_some() {
        header.extend(["J".to_string(), "A".to_string()]);
    } else {
        header.extend((1..=lin.dim()).map(|i| format!("x{i}")));
    }
    header.push("season".into());
    w.write_record(&header).map_err(csv_err)?;
    for ((t, x), k) in traj.times.iter().zip(&traj.states).zip(&traj.season_tags) {
        let mut rec = vec![fmt_num(*t)];
        rec.extend(x.iter().map(|v| fmt_num(*v)));
        rec.push((k + 1).to_string());
        w.write_record(&rec).map_err(csv_err)?;
    }
    csv_finish(w)
}

pub fn run_command(cmd: Command, s: &Scenario, opts: &RunOptions) -> Result<Outcome> {
    let dir = opts.out_dir.as_path();
    let lin = s.linearization()?;
    match cmd {
        Command::Floquet => {
            let (csv, complete) = run_sweep(s, opts.with_simulation)?;
            let rows = csv.lines().count().saturating_sub(1);
            let path = write_file(dir, "sweep.csv", &csv)?;
            Ok(Outcome { summary: format!("{rows} rows written to {}\n", path.display()), files: vec![path], complete })
        }
        Command::Threshold => {
            let rep = find_threshold(&lin, &s.threshold_options())?;
            let path = write_file(dir, "threshold.json", &to_json(&rep)?)?;
            let mut summary = format!("regime: {}\ntheta*: {}\n", rep.regime, fmt_num(rep.theta_star));
            if let Some((lo, hi)) = rep.bracket {
                let _ = writeln!(summary, "bracket: [{}, {}]", fmt_num(lo), fmt_num(hi));
            }
            let _ = writeln!(summary, "rho(theta*): {}", fmt_num(rep.rho_at_theta_star));
            let _ = writeln!(summary, "monotone certificate: {}", rep.monotone_certificate);
            Ok(Outcome { files: vec![path], summary, complete: true })
        }
        Command::Check => {
            let entries = run_checks(s)?;
            let path = write_file(dir, "conditions.json", &to_json(&entries)?)?;
            let mut summary = String::new();
            let mut complete = true;
            for e in &entries {
                let status = match (&e.certificate, &e.error) {
                    (Some(c), _) if c.holds => "holds".to_string(),
                    (Some(_), _) => "fails".to_string(),
                    (None, Some(err)) => {
                        complete = false;
                        format!("error: {err}")
                    }
                    (None, None) => unreachable!("entry without certificate or error"),
                };
                let _ = writeln!(summary, "{:<7} {status}", label(&e.condition)?);
            }
            Ok(Outcome { files: vec![path], summary, complete })
        }
        Command::Simulate => {
            let theta = s.require_theta()?;
            let csv = trajectory_csv(s, &lin, theta, opts, &s.sim_options())?;
            let path = write_file(dir, "trajectory.csv", &csv)?;
            Ok(Outcome { summary: format!("trajectory written to {}\n", path.display()), files: vec![path], complete: true })
        }
        Command::Poincare => {
            let theta = s.require_theta()?;
            let x0 = start_state(opts, lin.dim())?;
            let res = find_periodic_orbit(&s.system(theta)?, &x0, &s.orbit_options())?;
            let path = write_file(dir, "poincare.json", &to_json(&res)?)?;
            let summary = format!(
                "classification: {}\nmultiplier: {}\niterations: {}\n",
                res.classification,
                fmt_num(res.multiplier_lambda),
                res.iterations
            );
            Ok(Outcome { files: vec![path], summary, complete: true })
        }
        Command::Split => {
            let theta = s.require_theta()?;
            let (spec, sopts) = s.split_options(opts.seed)?;
            let (m1, m2) = (lin.m1().scale(s.period), lin.m2().scale(s.period));
            let best = optimize_split(&m1, &m2, theta, spec.k, spec.mode, &sopts)?;
            let path = write_file(dir, "split.json", &to_json(&best)?)?;
            let summary =
                format!("{} rho over K = {}: {} ({})\n", label(&spec.mode)?, spec.k, fmt_num(best.rho), best.estimate);
            Ok(Outcome { files: vec![path], summary, complete: true })
        }
        Command::Verify => {
            let rows = verify_suite(s, opts.seed)?;
            let mut w = csv_writer();
            w.write_record(["check", "status", "value", "tolerance", "detail"]).map_err(csv_err)?;
            let mut summary = String::new();
            let mut complete = true;
            for r in &rows {
                let status = label(&r.status)?;
                complete &= r.status != CheckStatus::Error;
                w.write_record([r.check.clone(), status.clone(), fmt_num(r.value), fmt_num(r.tolerance), r.detail.clone()])
                    .map_err(csv_err)?;
                let _ = writeln!(summary, "{:<28} {:<5} {}", r.check, status, r.detail);
            }
            let path = write_file(dir, "verify.csv", &csv_finish(w)?)?;
            Ok(Outcome { files: vec![path], summary, complete })
        }
    }
}
