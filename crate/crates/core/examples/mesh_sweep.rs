// Mesh-independence table: one run per mesh size with the same base seed.
// Pass mesh sizes as arguments (default 20 30 40).

use stochprox::harness::{self, RunConfig};
use stochprox::prelude::*;

pub fn run_example(meshes: &[usize]) -> Result<Vec<harness::SweepRow>> {
    let mut table = Vec::new();
    let rows = harness::sweep(&RunConfig::default(), meshes, &mut table, &mut |s| {
        eprintln!("N = {} done after {} iterations", s.n_divisions, s.iterations)
    })?;
    println!("{:>8} {:>10} {:>12} {:>10}", "h", "triangles", "f_hat_N", "N");
    for r in &rows {
        println!("{:>8.4} {:>10} {:>12.4e} {:>10}", r.h_hat, r.triangles, r.f_hat.unwrap_or(f64::NAN), r.iterations);
    }
    Ok(rows)
}

#[allow(dead_code)]
fn main() -> Result<()> {
    let args: Vec<usize> = std::env::args().skip(1).map(|s| s.parse().expect("mesh size")).collect();
    let meshes = if args.is_empty() { vec![20, 30, 40] } else { args };
    run_example(&meshes).map(|_| ())
}
