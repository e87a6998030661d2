// P1 finite elements on the unit square: L2 error for a manufactured
// Poisson solution and the semilinear solve with its Newton history.

use std::f64::consts::PI;

use stochprox::fem;
use stochprox::prelude::*;

pub fn run_example() -> Result<Vec<f64>> {
    // -Laplace y = 2 pi^2 sin(pi x) sin(pi y)
    let exact = |x: [f64; 2]| (PI * x[0]).sin() * (PI * x[1]).sin();
    let opts = FemOptions::default();
    let mut errors = Vec::new();
    println!("{:>4} {:>12} {:>8}", "N", "L2 error", "ratio");
    for n in [8, 16, 32, 64] {
        let mesh = TriMesh::build(n)?;
        let c = CoefficientSample::constant(&mesh, 1.0, 0.0)?;
        let u = fem::project_fn_p0(&mesh, |x| 2.0 * PI * PI * exact(x));
        let (y, _) = fem::solve_state(&mesh, &c, &u, &opts)?;
        let e = fem::l2_error(&mesh, &y, exact)?;
        match errors.last() {
            Some(prev) => println!("{n:>4} {e:>12.4e} {:>8.3}", prev / e),
            None => println!("{n:>4} {e:>12.4e}"),
        }
        errors.push(e);
    }

    let mesh = TriMesh::build(16)?;
    let c = CoefficientSample::constant(&mesh, 0.1, 20.0)?;
    let (_, report) = fem::solve_state(&mesh, &c, &mesh.control_space().constant(10.0), &opts)?;
    println!("semilinear solve: {} residual evaluations", report.iterations);
    for r in &report.residual_history {
        println!("  {r:.3e}");
    }
    Ok(errors)
}

#[allow(dead_code)]
fn main() -> Result<()> {
    run_example().map(|_| ())
}
