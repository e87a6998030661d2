// Plain stochastic gradient descent with `t_n = theta / n` on a noisy
// quadratic in R^d, and what the schedule validator says about other steps.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use stochprox::prelude::*;

const DIM: usize = 5;

/// `j(u) = 1/2 |u - c|^2`; samples add Gaussian noise to the gradient.
fn oracle(c: [f64; DIM]) -> impl Fn(&ControlField, u64) -> Result<ControlField> + Sync {
    move |u, k| {
        let mut rng = ChaCha8Rng::seed_from_u64(k);
        let noise = Normal::new(0.0, 0.5).unwrap();
        let g = u.values().iter().zip(&c).map(|(ui, ci)| ui - ci + noise.sample(&mut rng)).collect();
        ControlSpace::coordinates(DIM, 1.0).field(g)
    }
}

pub fn run_example() -> Result<f64> {
    let space = ControlSpace::coordinates(DIM, 1.0);
    let c = [1.0, -2.0, 0.5, 0.0, 3.0];
    let target = space.field(c.to_vec())?;

    for s in [StepSchedule::harmonic(1.0), StepSchedule::Polynomial { theta: 1.0, alpha: 0.5 }, StepSchedule::Polynomial { theta: 1.0, alpha: 2.0 }] {
        let report = validate_schedule(&s);
        match report.failed_condition() {
            None => println!("{s:?}: accepted"),
            Some(why) => println!("{s:?}: rejected, {why}"),
        }
    }

    let run = run_sgd(&space, &oracle(c), &StepSchedule::harmonic(1.0), space.zero(), LoopControl::new(20_000))?;
    let err = space.distance(&run.final_iterate, &target);
    println!("after {} iterations |u - c| = {err:.3e}", run.iterations());
    Ok(err)
}

#[allow(dead_code)]
fn main() -> Result<()> {
    run_example().map(|_| ())
}
