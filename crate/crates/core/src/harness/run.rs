//! Single runs and mesh sweeps with CSV output.

use std::io::{self, Write};

use crate::algorithms::{run_spg_decreasing, IterationRow, LoopControl, Monitor};
use crate::error::{Error, Result};
use crate::problem::SemilinearProblem;
use crate::random_field::SampleStream;
use crate::schedule::BatchSchedule;
use crate::space::{ControlField, ControlSpace, InnerProductSpace};

use super::config::StopRule;
use super::{build_problem, initial_control, stream, Lane, RunConfig, ThetaMode};

pub const RUN_HEADER: &str = "n,t_n,m_n,f_hat,r_n,r_hat,clamp_count,wall_ms";
pub const SWEEP_HEADER: &str = "n_divisions,h_hat,triangles,f_hat,iterations,converged";

/// 17 significant digits.
pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

fn format_opt(x: Option<f64>) -> String {
    x.map(format_float).unwrap_or_default()
}

pub fn format_row(r: &IterationRow) -> String {
    format!(
        "{},{},{},{},{},{},{},{}",
        r.n,
        format_float(r.t_n),
        r.m_n,
        format_opt(r.f_hat),
        format_opt(r.r_n),
        format_opt(r.r_hat),
        r.clamp_count,
        r.wall_ms
    )
}

/// Fills the estimator columns and streams rows to a sink.
struct EstimatorMonitor<'a> {
    problem: &'a SemilinearProblem,
    stream: SampleStream,
    batches: BatchSchedule,
    window: usize,
    parallel: bool,
    r_history: Vec<f64>,
    sink: &'a mut dyn Write,
}

impl Monitor<ControlSpace> for EstimatorMonitor<'_> {
    fn observe(&mut self, n: usize, u: &ControlField, row: &mut IterationRow) -> Result<()> {
        let est = self.problem.estimate(u, n, &self.stream, &self.batches, self.parallel)?;
        row.m_n = est.samples;
        row.f_hat = Some(est.f_hat);
        row.r_n = Some(est.r_n);
        self.r_history.push(est.r_n);
        if n >= self.window {
            // r_k for k = max(1, n - window) ..= n
            let first = n.saturating_sub(self.window).max(1);
            row.r_hat = Some(self.r_history[first - 1..n].iter().sum());
        }
        row.clamp_count = self.problem.clamp_total();
        Ok(())
    }

    fn row_done(&mut self, row: &IterationRow) -> Result<()> {
        writeln!(self.sink, "{}", format_row(row))?;
        self.sink.flush()?;
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct SolveSummary {
    pub n_divisions: usize,
    pub triangles: usize,
    pub h_hat: f64,
    pub theta: f64,
    /// `N`: the iteration at which the stopping rule fired, otherwise the
    /// number of logged iterations.
    pub iterations: usize,
    pub converged: bool,
    /// `f_hat_N`.
    pub f_hat: Option<f64>,
    pub r_hat: Option<f64>,
    pub max_abs_control: f64,
    pub clamp_total: usize,
    pub rows: Vec<IterationRow>,
    pub final_control: ControlField,
}

impl std::fmt::Display for SolveSummary {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "mesh            N = {} ({} triangles, h = {:.4e})", self.n_divisions, self.triangles, self.h_hat)?;
        writeln!(f, "theta           {:.6e}", self.theta)?;
        writeln!(f, "iterations      {}{}", self.iterations, if self.converged { "" } else { " (tolerance not reached)" })?;
        writeln!(f, "f_hat_N         {}", self.f_hat.map(|v| format!("{v:.6e}")).unwrap_or("-".into()))?;
        writeln!(f, "r_hat_N         {}", self.r_hat.map(|v| format!("{v:.6e}")).unwrap_or("-".into()))?;
        writeln!(f, "max |u|         {:.6e}", self.max_abs_control)?;
        write!(f, "clamped nodes   {}", self.clamp_total)
    }
}

/// Runs the decreasing-step stochastic proximal gradient method on mesh
/// `N = mesh_n`, streaming the per-iteration CSV (header included) to `sink`.
/// On failure the rows written so far stay in `sink`.
pub fn solve(cfg: &RunConfig, mesh_n: usize, sink: &mut dyn Write) -> Result<SolveSummary> {
    cfg.validate()?;
    let problem = build_problem(cfg, mesh_n)?;
    writeln!(sink, "{RUN_HEADER}")?;
    sink.flush()?;

    let space = problem.space();
    let u1 = initial_control(cfg, &problem);
    let oracle = problem.oracle(stream(cfg, mesh_n, Lane::Path));
    let theta = match cfg.theta_mode {
        ThetaMode::Fixed => cfg.theta,
        ThetaMode::Auto => {
            let g = crate::algorithms::StochasticGradient::gradient(&oracle, &u1, 1)?;
            let norm = space.norm(&g);
            if !(norm > 0.0) {
                return Err(Error::Config("automatic theta needs a nonzero first gradient".into()));
            }
            1.0 / norm
        }
    };
    let schedule = cfg.step_schedule(theta);

    let mut monitor = EstimatorMonitor {
        problem: &problem,
        stream: stream(cfg, mesh_n, Lane::Estimator),
        batches: cfg.estimator_batches(),
        window: cfg.window,
        parallel: cfg.parallel,
        r_history: Vec::new(),
        sink,
    };
    let (window, tol, rule) = (cfg.window, cfg.tol, cfg.stop_rule);
    let stop = move |rows: &[IterationRow]| {
        rows.last().is_some_and(|r| match r.r_hat {
            Some(s) if r.n >= window => match rule {
                StopRule::Sum => s <= tol,
                StopRule::Mean => s / (r.n + 1 - r.n.saturating_sub(window).max(1)) as f64 <= tol,
            },
            _ => false,
        })
    };
    let control = LoopControl::new(cfg.n_max)
        .monitor(&mut monitor)
        .stop_when(&stop)
        .timed(cfg.timing)
        .parallel(cfg.parallel);
    let record = run_spg_decreasing(space, &oracle, &schedule, problem.prox(), u1, control)?;

    let last = record.rows.last();
    Ok(SolveSummary {
        n_divisions: mesh_n,
        triangles: problem.mesh().n_triangles(),
        h_hat: problem.mesh().h_max(),
        theta,
        iterations: record.terminated_at.unwrap_or(record.rows.len()),
        converged: record.terminated_at.is_some(),
        f_hat: last.and_then(|r| r.f_hat),
        r_hat: last.and_then(|r| r.r_hat),
        max_abs_control: record.final_iterate.max_abs(),
        clamp_total: problem.clamp_total(),
        rows: record.rows,
        final_control: record.final_iterate,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    pub n_divisions: usize,
    pub h_hat: f64,
    pub triangles: usize,
    pub f_hat: Option<f64>,
    pub iterations: usize,
    pub converged: bool,
}

impl SweepRow {
    pub fn to_csv(&self) -> String {
        format!(
            "{},{},{},{},{},{}",
            self.n_divisions,
            format_float(self.h_hat),
            self.triangles,
            format_opt(self.f_hat),
            self.iterations,
            self.converged
        )
    }
}

/// One [`solve`] per mesh size, writing the table to `sink` row by row.
/// `progress` receives each finished summary.
pub fn sweep(
    cfg: &RunConfig,
    meshes: &[usize],
    sink: &mut dyn Write,
    progress: &mut dyn FnMut(&SolveSummary),
) -> Result<Vec<SweepRow>> {
    writeln!(sink, "{SWEEP_HEADER}")?;
    sink.flush()?;
    let mut out = Vec::with_capacity(meshes.len());
    for &n in meshes {
        let s = solve(cfg, n, &mut io::sink())?;
        progress(&s);
        let row = SweepRow {
            n_divisions: n,
            h_hat: s.h_hat,
            triangles: s.triangles,
            f_hat: s.f_hat,
            iterations: s.iterations,
            converged: s.converged,
        };
        writeln!(sink, "{}", row.to_csv())?;
        sink.flush()?;
        out.push(row);
    }
    Ok(out)
}
