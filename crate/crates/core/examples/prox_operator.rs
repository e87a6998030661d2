// Closed-form prox of `lambda1 |v| + indicator([-0.5, 0.5])` on a P0 field,
// checked against golden-section minimization of the scalar objective.

use stochprox::harness::checks::brute_force_prox;
use stochprox::prelude::*;

pub fn run_example() -> Result<f64> {
    let mesh = TriMesh::build(4)?;
    let space = mesh.control_space();
    let spec = ProxSpec::l1_box(0.008, BoxSet::symmetric(0.5)?)?;

    let z = space.field((0..space.dim()).map(|i| (i as f64 * 0.37).sin() * 0.8).collect())?;
    let t = 2.0;
    let p = spec.prox_l1_box(space, &z, t)?;

    let mut worst = 0.0f64;
    for (&zi, &pi) in z.values().iter().zip(p.values()) {
        worst = worst.max((pi - brute_force_prox(zi, t, 0.008, -0.5, 0.5)).abs());
    }
    println!("cells: {}, zeroed by the threshold: {}", space.dim(), p.values().iter().filter(|v| **v == 0.0).count());
    println!("at the bound: {}", p.values().iter().filter(|v| v.abs() == 0.5).count());
    println!("max deviation from brute force: {worst:.2e}");

    // the variants drop one of the two terms
    for (name, s) in [
        ("box only", ProxSpec::box_only(BoxSet::symmetric(0.5)?)),
        ("l1 only", ProxSpec::l1_only(0.008)?),
    ] {
        println!("{name:>8}: prox(0.7) = {:.4}", s.scalar_prox(0, 0.7, t));
    }

    // stationarity measure at a point and a gradient
    let g = space.constant(0.01);
    println!("r(z, g) = {:.4e}", spec.stationarity_measure(space, &p, &g)?);
    Ok(worst)
}

#[allow(dead_code)]
fn main() -> Result<()> {
    run_example().map(|_| ())
}
