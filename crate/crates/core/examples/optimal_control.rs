// The full stochastic optimal control run on one mesh: decreasing-step
// stochastic proximal gradient with the monitoring estimators and the
// windowed stopping rule. Pass the mesh size as the first argument.

use stochprox::harness::{self, RunConfig};
use stochprox::prelude::*;

pub fn run_example(mesh_n: usize) -> Result<harness::SolveSummary> {
    let cfg = RunConfig { mesh_n, ..RunConfig::default() };
    let mut csv = Vec::new();
    let summary = harness::solve(&cfg, mesh_n, &mut csv)?;
    for row in summary.rows.iter().filter(|r| r.n == 1 || r.n % 25 == 0) {
        println!(
            "n {:>4}  t_n {:>8.3}  m_n {:>3}  f_hat {:.6e}  r_n {:.3e}",
            row.n,
            row.t_n,
            row.m_n,
            row.f_hat.unwrap_or(f64::NAN),
            row.r_n.unwrap_or(f64::NAN)
        );
    }
    println!("{summary}");
    let u = &summary.final_control;
    let active = u.values().iter().filter(|v| v.abs() == 0.5).count();
    let zero = u.values().iter().filter(|v| **v == 0.0).count();
    println!("cells at the bound: {active}, zero: {zero}, of {}", u.values().len());
    println!("{} CSV bytes", csv.len());
    Ok(summary)
}

#[allow(dead_code)]
fn main() -> Result<()> {
    let n = std::env::args().nth(1).map(|s| s.parse().expect("mesh size")).unwrap_or(20);
    run_example(n).map(|_| ())
}
