// Constant-step proximal gradient with growing batches on a noisy
// box-constrained lasso problem.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use stochprox::prelude::*;

const DIM: usize = 8;

pub fn run_example() -> Result<(f64, usize)> {
    let space = ControlSpace::coordinates(DIM, 1.0);
    let c: Vec<f64> = (0..DIM).map(|i| ((i as f64) - 3.5) * 0.2).collect();
    let cc = c.clone();
    // j(u) = 1/2 |u - c|^2, L = 1
    let oracle = move |u: &ControlField, k: u64| {
        let mut rng = ChaCha8Rng::seed_from_u64(k ^ 0xabc);
        let noise = Normal::new(0.0, 0.3).unwrap();
        ControlSpace::coordinates(DIM, 1.0).field(u.values().iter().zip(&cc).map(|(ui, ci)| ui - ci + noise.sample(&mut rng)).collect())
    };
    let prox = ProxSpec::l1_box(0.1, BoxSet::symmetric(0.5)?)?;
    let batches = BatchSchedule::Polynomial { scale: 1.0, power: 1.5 };

    match run_vr_spg(&space, &oracle, 0.6, 1.0, &batches, &prox, space.zero(), LoopControl::new(1)) {
        Err(e) => println!("t = 0.6 with L = 1: {e}"),
        Ok(_) => unreachable!("step above 1/(2L) is rejected"),
    }
    match run_vr_spg(&space, &oracle, 0.4, 1.0, &BatchSchedule::Linear { first: 1, slope: 1 }, &prox, space.zero(), LoopControl::new(1)) {
        Err(e) => println!("linear batches: {e}"),
        Ok(_) => unreachable!("non-summable batches are rejected"),
    }

    let run = run_vr_spg(&space, &oracle, 0.4, 1.0, &batches, &prox, space.zero(), LoopControl::new(80))?;
    // the solution is soft-thresholded c clipped to the box
    let exact = space.field(c.iter().map(|&ci| prox.scalar_prox(0, ci, 1.0)).collect())?;
    let err = space.distance(&run.final_iterate, &exact);
    let samples: usize = run.rows.iter().map(|r| r.m_n).sum();
    println!("{} iterations, {samples} samples, |u - u*| = {err:.3e}", run.iterations());
    println!("u = {:?}", run.final_iterate.values().iter().map(|v| format!("{v:.3}")).collect::<Vec<_>>());
    Ok((err, samples))
}

#[allow(dead_code)]
fn main() -> Result<()> {
    run_example().map(|_| ())
}
