// Adjoint gradient against central differences, its dependence on the
// difference step, and a deliberately wrong gradient being caught.

use stochprox::harness::{self, RunConfig};
use stochprox::prelude::*;

pub fn run_example() -> Result<(f64, f64)> {
    let cfg = RunConfig { gradient_trials: 10, ..RunConfig::default() };
    let report = harness::check_gradient(&cfg, 20, 1e-5)?;
    for t in report.trials.iter().take(3) {
        println!("fd {:+.10e}  adjoint {:+.10e}  rel {:.2e}", t.finite_difference, t.adjoint, t.relative_error);
    }
    let good = report.max_relative_error();
    println!("worst relative error {good:.2e} (pass: {})", report.passed());

    // with the default Newton tolerance the inexact state solve sets a floor
    // near 1e-6; tightening it exposes the eps^2 regime before roundoff
    let tight = RunConfig { gradient_trials: 3, newton_tol: 1e-13, ..cfg.clone() };
    for (eps, err) in harness::epsilon_sweep(&tight, 20, &[1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6])? {
        println!("eps {eps:.0e}: {err:.2e}");
    }

    let faulty = RunConfig { gradient_fault_lambda2: Some(0.002), ..cfg };
    let bad = harness::check_gradient(&faulty, 20, 1e-5)?;
    println!("with lambda2 doubled in the gradient: {:.2e} (pass: {})", bad.max_relative_error(), bad.passed());
    Ok((good, bad.max_relative_error()))
}

#[allow(dead_code)]
fn main() -> Result<()> {
    run_example().map(|_| ())
}
