//! Flat TOML run configuration. Every key is optional; an empty file gives
//! the reference experiment.

use std::path::Path;

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::fem::{FemOptions, LinearSolver};
use crate::prox::BoxSet;
use crate::random_field::{KLFieldSpec, UNIFORM_HALF_WIDTH};
use crate::schedule::{BatchSchedule, StepSchedule};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ThetaMode {
    /// Use `theta` as given.
    Fixed,
    /// `theta = 1 / ||G(u_1, xi_1)||`.
    Auto,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InitialControl {
    /// P0 projection of `sin(4 pi x1) sin(4 pi x2)`.
    Sine,
    Zero,
    Constant,
}

/// How the windowed residual sum `r_hat_n` is compared with `tol`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StopRule {
    /// `r_hat_n / (number of terms) <= tol`.
    Mean,
    /// `r_hat_n <= tol`.
    Sum,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolverChoice {
    Cholesky,
    Cg,
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub mesh_n: usize,
    pub sweep_meshes: Vec<usize>,

    pub a_mean: f64,
    pub r_mean: f64,
    pub correlation_length: f64,
    pub kl_terms: usize,
    pub sample_half_width: f64,

    pub lambda1: f64,
    pub lambda2: f64,
    pub u_lower: f64,
    pub u_upper: f64,

    pub theta: f64,
    pub theta_mode: ThetaMode,
    pub alpha: f64,
    pub initial: InitialControl,
    pub initial_constant: f64,

    pub tol: f64,
    pub stop_rule: StopRule,
    pub window: usize,
    pub estimator_base: usize,
    pub estimator_increment: usize,
    pub estimator_period: usize,

    pub seed: u64,
    pub n_max: usize,
    /// Fill the `wall_ms` column; off by default so CSVs are reproducible.
    pub timing: bool,
    /// Evaluate sample batches with rayon.
    pub parallel: bool,

    pub linear_solver: SolverChoice,
    pub newton_tol: f64,
    pub max_newton_iters: usize,

    pub gradient_trials: usize,
    pub fd_step: f64,
    pub gradient_tol: f64,
    /// Replaces `lambda2` in the gradient only, to exercise the checker.
    pub gradient_fault_lambda2: Option<f64>,
    pub prox_trials: usize,
    pub prox_tol: f64,

    /// Sample index dumped by `sample-field`.
    pub field_sample: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            mesh_n: 20,
            sweep_meshes: vec![20, 30, 40, 50, 60, 70],
            a_mean: 0.5,
            r_mean: 0.5,
            correlation_length: 0.5,
            kl_terms: 20,
            sample_half_width: UNIFORM_HALF_WIDTH,
            lambda1: 0.008,
            lambda2: 0.001,
            u_lower: -0.5,
            u_upper: 0.5,
            theta: 100.0,
            theta_mode: ThetaMode::Fixed,
            alpha: 1.0,
            initial: InitialControl::Sine,
            initial_constant: 0.0,
            tol: 2e-4,
            stop_rule: StopRule::Mean,
            window: 50,
            estimator_base: 1,
            estimator_increment: 10,
            estimator_period: 50,
            seed: 1,
            n_max: 100_000,
            timing: false,
            parallel: false,
            linear_solver: SolverChoice::Cholesky,
            newton_tol: 1e-10,
            max_newton_iters: 30,
            gradient_trials: 50,
            fd_step: 1e-5,
            gradient_tol: 1e-4,
            gradient_fault_lambda2: None,
            prox_trials: 1000,
            prox_tol: 1e-6,
            field_sample: 0,
        }
    }
}

fn bad(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| bad(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| bad(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [
            ("a_mean", self.a_mean),
            ("r_mean", self.r_mean),
            ("sample_half_width", self.sample_half_width),
            ("initial_constant", self.initial_constant),
        ];
        for (k, v) in finite {
            if !v.is_finite() {
                return Err(bad(format!("{k} must be finite")));
            }
        }
        let positive = [
            ("correlation_length", self.correlation_length),
            ("theta", self.theta),
            ("alpha", self.alpha),
            ("tol", self.tol),
            ("newton_tol", self.newton_tol),
            ("fd_step", self.fd_step),
            ("gradient_tol", self.gradient_tol),
            ("prox_tol", self.prox_tol),
        ];
        for (k, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(bad(format!("{k} must be positive, got {v}")));
            }
        }
        if !(self.lambda1 >= 0.0 && self.lambda2 >= 0.0) {
            return Err(bad("lambda1 and lambda2 must be nonnegative"));
        }
        if self.sample_half_width < 0.0 {
            return Err(bad("sample_half_width must be nonnegative"));
        }
        if !(self.u_lower <= self.u_upper) || self.u_lower > 0.0 || self.u_upper < 0.0 {
            return Err(bad("need u_lower <= 0 <= u_upper"));
        }
        if self.mesh_n == 0 || self.sweep_meshes.contains(&0) {
            return Err(bad("mesh sizes must be at least 1"));
        }
        if self.kl_terms == 0 {
            return Err(bad("kl_terms must be at least 1"));
        }
        if self.window == 0 || self.estimator_period == 0 || self.estimator_base == 0 {
            return Err(bad("window, estimator_period and estimator_base must be at least 1"));
        }
        if self.gradient_trials == 0 || self.prox_trials == 0 {
            return Err(bad("trial counts must be at least 1"));
        }
        if self.max_newton_iters == 0 {
            return Err(bad("max_newton_iters must be at least 1"));
        }
        if self.mesh_n > 4096 || self.sweep_meshes.iter().any(|&n| n > 4096) {
            return Err(bad("mesh sizes above 4096 are not supported"));
        }
        Ok(())
    }

    pub fn step_schedule(&self, theta: f64) -> StepSchedule {
        StepSchedule::Polynomial { theta, alpha: self.alpha }
    }

    pub fn estimator_batches(&self) -> BatchSchedule {
        BatchSchedule::Staircase {
            base: self.estimator_base,
            increment: self.estimator_increment,
            period: self.estimator_period,
        }
    }

    pub fn box_set(&self) -> Result<BoxSet> {
        BoxSet::uniform(self.u_lower, self.u_upper)
    }

    pub fn fem_options(&self) -> FemOptions {
        FemOptions {
            newton_tol: self.newton_tol,
            max_newton_iters: self.max_newton_iters,
            linear_solver: match self.linear_solver {
                SolverChoice::Cholesky => LinearSolver::Cholesky,
                SolverChoice::Cg => LinearSolver::ConjugateGradient,
            },
            ..FemOptions::default()
        }
    }

    pub fn diffusion(&self) -> Result<KLFieldSpec> {
        KLFieldSpec::build(self.a_mean, self.correlation_length, self.kl_terms)
    }

    pub fn reaction(&self) -> Result<KLFieldSpec> {
        KLFieldSpec::build(self.r_mean, self.correlation_length, self.kl_terms)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_defaults() {
        assert_eq!(RunConfig::parse("").unwrap(), RunConfig::default());
    }

    #[test]
    fn overrides_and_enums() {
        let c = RunConfig::parse("mesh_n = 40\ntheta_mode = \"auto\"\ninitial = \"zero\"\nlinear_solver = \"cg\"\nstop_rule = \"sum\"\n")
            .unwrap();
        assert_eq!(c.stop_rule, StopRule::Sum);
        assert_eq!(c.mesh_n, 40);
        assert_eq!(c.theta_mode, ThetaMode::Auto);
        assert_eq!(c.initial, InitialControl::Zero);
        assert_eq!(c.fem_options().linear_solver, LinearSolver::ConjugateGradient);
    }

    #[test]
    fn rejects_bad_input() {
        for text in [
            "mesh_n = 0",
            "lambda1 = -1.0",
            "u_lower = 0.1",
            "theta = 0.0",
            "unknown_key = 3",
            "mesh_n = \"twenty\"",
            "window = 0",
            "theta_mode = \"sometimes\"",
        ] {
            assert!(matches!(RunConfig::parse(text), Err(Error::Config(_))), "{text}");
        }
    }
}
