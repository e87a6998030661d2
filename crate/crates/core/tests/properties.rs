use std::sync::Arc;

use proptest::prelude::*;
use stochprox::fem::{self, FemOptions};
use stochprox::prelude::*;
use stochprox::problem::POINCARE_SQ;

fn problem(n: usize) -> SemilinearProblem {
    SemilinearProblem::new(Arc::new(TriMesh::build(n).unwrap()), ProblemSpec::reference()).unwrap()
}

fn field_from(space: &ControlSpace, seed: u64, scale: f64) -> ControlField {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    space.field((0..space.dim()).map(|_| rng.random_range(-scale..=scale)).collect()).unwrap()
}

#[test]
fn prox_is_nonexpansive() {
    let mesh = TriMesh::build(6).unwrap();
    let space = mesh.control_space();
    let spec = ProxSpec::l1_box(0.008, BoxSet::symmetric(0.5).unwrap()).unwrap();
    for k in 0..10_000u64 {
        let (x, y) = (field_from(space, 2 * k, 1.5), field_from(space, 2 * k + 1, 1.5));
        let t = 0.01 + (k % 97) as f64 * 0.3;
        let (px, py) = (spec.prox_l1_box(space, &x, t).unwrap(), spec.prox_l1_box(space, &y, t).unwrap());
        assert!(space.distance(&px, &py) <= space.distance(&x, &y) * (1.0 + 1e-14));
        assert!(px.max_abs() <= 0.5);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    // characterization of p = prox_{th}(y): t (h(z) - h(p)) >= <y - p, z - p>
    #[test]
    fn prox_variational_inequality(z in -1.5f64..1.5, w in -0.5f64..=0.5, t in 1e-3f64..50.0, lambda1 in 0.0f64..0.1) {
        let spec = ProxSpec::l1_box(lambda1, BoxSet::symmetric(0.5).unwrap()).unwrap();
        let p = spec.scalar_prox(0, z, t);
        let h = |v: f64| lambda1 * v.abs();
        prop_assert!(t * (h(w) - h(p)) - (z - p) * (w - p) >= -1e-12);
    }

    #[test]
    fn newton_residual_decreases_for_controls_in_the_box(seed in 0u64..1000, index in 0u64..1000) {
        let p = problem(8);
        let xi = SampleStream::new(seed, 0).draw(index, 20);
        let u = field_from(p.space(), seed ^ index, 0.5);
        let c = p.coefficients(&xi).unwrap();
        let (_, rep) = fem::solve_state(p.mesh(), &c, &u, &FemOptions::default()).unwrap();
        prop_assert!(rep.converged);
        prop_assert!(rep.residual_history.windows(2).all(|w| w[1] < w[0]), "{:?}", rep.residual_history);
    }

    // ||y|| <= C1 ||u||, ||y1 - y2|| <= C1 ||u1 - u2||, ||p|| <= C1 ||y_D - y||
    #[test]
    fn stability_and_lipschitz_bounds(seed in 0u64..1000) {
        let p = problem(8);
        let space = p.space();
        let xi = SampleStream::new(seed, 3).draw(0, 20);
        let c = p.coefficients(&xi).unwrap();
        let c1 = POINCARE_SQ / c.a_min();
        let (u1, u2) = (field_from(space, seed, 0.5), field_from(space, seed + 7, 0.5));
        let y1 = p.state(&u1, &xi).unwrap();
        let y2 = p.state(&u2, &xi).unwrap();
        let m = p.mesh();
        prop_assert!(fem::l2_norm(m, &y1).unwrap() <= c1 * space.norm(&u1) * (1.0 + 1e-10));
        let diff = fem::state_field(m, y1.values().iter().zip(y2.values()).map(|(a, b)| a - b).collect()).unwrap();
        prop_assert!(fem::l2_norm(m, &diff).unwrap() <= c1 * space.distance(&u1, &u2) * (1.0 + 1e-10));
        let e = p.evaluate(&u1, &xi).unwrap();
        let target = TargetField::from_fn(m, stochprox::problem::reference_target);
        let misfit = fem::l2_distance(m, &e.state, &target).unwrap();
        prop_assert!(fem::l2_norm(m, &e.adjoint).unwrap() <= c1 * misfit * (1.0 + 1e-10));
    }
}

#[test]
fn objective_estimator_spread_shrinks_like_inverse_sqrt_m() {
    let p = problem(10);
    let u = p.space().constant(0.2);
    let spread = |m: usize| {
        let b = BatchSchedule::Fixed(m);
        let v: Vec<f64> = (1..=120)
            .map(|k| p.estimate(&u, k, &SampleStream::new(4, 9), &b, false).unwrap().f_hat)
            .collect();
        let mean = v.iter().sum::<f64>() / v.len() as f64;
        (v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (v.len() - 1) as f64).sqrt()
    };
    let ratio = spread(1) / spread(16);
    // sqrt(16) = 4, with sampling error on 120 replicates
    assert!((2.8..5.5).contains(&ratio), "{ratio}");
}

#[test]
fn deterministic_coefficients_give_deterministic_estimates() {
    let p = problem(6);
    let u = p.space().constant(0.1);
    let s = SampleStream::new(1, 1).with_half_width(0.0);
    let a = p.estimate(&u, 1, &s, &BatchSchedule::Fixed(1), false).unwrap();
    let b = p.estimate(&u, 60, &s, &BatchSchedule::monitoring(), false).unwrap();
    assert!((a.f_hat - b.f_hat).abs() < 1e-15);
    assert!((a.r_n - b.r_n).abs() < 1e-15);
}
