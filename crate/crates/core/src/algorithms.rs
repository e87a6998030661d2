//! Stochastic (proximal) gradient loops over an [`InnerProductSpace`].
//!
//! * [`run_sgd`]: `u_{n+1} = u_n - t_n G(u_n, xi_n)` with Robbins-Monro steps.
//! * [`run_vr_spg`]: constant step `0 < t < 1/(2L)`, growing batches,
//!   `u_{n+1} = prox_{th}(u_n - t mean_i G(u_n, xi_n^i))`.
//! * [`run_spg_decreasing`]: single sample, Robbins-Monro steps,
//!   `u_{n+1} = prox_{t_n h}(u_n - t_n G(u_n, xi_n))`.
//!
//! Samples are identified by a global counter handed to the gradient
//! oracle; batches use consecutive indices and are reduced in index order,
//! so results do not depend on whether the batch is evaluated in parallel.

use std::time::Instant;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::prox::ProximalTerm;
use crate::schedule::{BatchSchedule, StepSchedule};
use crate::space::InnerProductSpace;

/// Default iteration cap.
pub const DEFAULT_N_MAX: usize = 100_000;

/// Stochastic gradient `G(u, xi_k)` for sample number `k`.
pub trait StochasticGradient<S: InnerProductSpace>: Sync {
    fn gradient(&self, u: &S::Vector, sample: u64) -> Result<S::Vector>;

    /// Known bound `K_n` on the bias of the gradient at iteration `n`.
    fn bias_bound(&self, _n: usize) -> Option<f64> {
        None
    }
}

impl<S, F> StochasticGradient<S> for F
where
    S: InnerProductSpace,
    F: Fn(&S::Vector, u64) -> Result<S::Vector> + Sync,
{
    fn gradient(&self, u: &S::Vector, sample: u64) -> Result<S::Vector> {
        self(u, sample)
    }
}

/// One logged iteration.
#[derive(Clone, Debug, PartialEq)]
pub struct IterationRow {
    pub n: usize,
    pub t_n: f64,
    pub m_n: usize,
    pub f_hat: Option<f64>,
    pub r_n: Option<f64>,
    pub r_hat: Option<f64>,
    pub clamp_count: usize,
    pub wall_ms: u64,
}

impl IterationRow {
    fn new(n: usize, t_n: f64, m_n: usize) -> Self {
        Self {
            n,
            t_n,
            m_n,
            f_hat: None,
            r_n: None,
            r_hat: None,
            clamp_count: 0,
            wall_ms: 0,
        }
    }
}

/// Hooks called once per iteration.
pub trait Monitor<S: InnerProductSpace> {
    /// Called with the current iterate `u_n` before the step; may fill
    /// the estimator columns of `row`.
    fn observe(&mut self, _n: usize, _u: &S::Vector, _row: &mut IterationRow) -> Result<()> {
        Ok(())
    }

    /// Called after `row` has been appended to the log.
    fn row_done(&mut self, _row: &IterationRow) -> Result<()> {
        Ok(())
    }
}

/// Monitor that does nothing.
pub struct Silent;

impl<S: InnerProductSpace> Monitor<S> for Silent {}

/// Stopping rule evaluated on the log after each new row.
pub type StopFn<'a> = &'a dyn Fn(&[IterationRow]) -> bool;

/// Iteration cap, timing, parallelism, monitor and stopping rule.
pub struct LoopControl<'a, S: InnerProductSpace> {
    pub n_max: usize,
    pub record_timing: bool,
    pub parallel: bool,
    monitor: Option<&'a mut dyn Monitor<S>>,
    stop: Option<StopFn<'a>>,
}

impl<'a, S: InnerProductSpace> LoopControl<'a, S> {
    pub fn new(n_max: usize) -> Self {
        Self {
            n_max,
            record_timing: false,
            parallel: false,
            monitor: None,
            stop: None,
        }
    }

    pub fn monitor(mut self, m: &'a mut dyn Monitor<S>) -> Self {
        self.monitor = Some(m);
        self
    }

    /// Stops after the row for which `stop` returns true.
    pub fn stop_when(mut self, stop: StopFn<'a>) -> Self {
        self.stop = Some(stop);
        self
    }

    pub fn timed(mut self, on: bool) -> Self {
        self.record_timing = on;
        self
    }

    pub fn parallel(mut self, on: bool) -> Self {
        self.parallel = on;
        self
    }
}

impl<S: InnerProductSpace> Default for LoopControl<'_, S> {
    fn default() -> Self {
        Self::new(DEFAULT_N_MAX)
    }
}

/// Log of a run.
#[derive(Clone, Debug)]
pub struct RunRecord<V> {
    pub rows: Vec<IterationRow>,
    /// Iterate after the last completed step (`u_1` if none).
    pub final_iterate: V,
    /// Iteration at which the stopping rule fired.
    pub terminated_at: Option<usize>,
    /// `sum_n t_n K_n` over iterations where the oracle declared a bias bound.
    pub bias_weighted_sum: f64,
}

impl<V> RunRecord<V> {
    pub fn iterations(&self) -> usize {
        self.rows.len()
    }

    pub fn last_f_hat(&self) -> Option<f64> {
        self.rows.iter().rev().find_map(|r| r.f_hat)
    }
}

/// Mean of `G(u, xi_k)` over `k in start..start + m`, reduced in index order.
pub fn batch_mean<S, G>(space: &S, oracle: &G, u: &S::Vector, start: u64, m: usize, parallel: bool) -> Result<S::Vector>
where
    S: InnerProductSpace,
    G: StochasticGradient<S> + ?Sized,
{
    let grads: Vec<S::Vector> = if parallel && m > 1 {
        (0..m as u64)
            .into_par_iter()
            .map(|k| oracle.gradient(u, start + k))
            .collect::<Result<_>>()?
    } else {
        (0..m as u64).map(|k| oracle.gradient(u, start + k)).collect::<Result<_>>()?
    };
    Ok(space.mean(&grads))
}

struct Driver<'a, 'c, S: InnerProductSpace> {
    control: LoopControl<'c, S>,
    rows: Vec<IterationRow>,
    clock: Instant,
    bias: f64,
    _space: std::marker::PhantomData<&'a S>,
}

impl<'a, 'c, S: InnerProductSpace> Driver<'a, 'c, S> {
    fn new(control: LoopControl<'c, S>) -> Self {
        Self {
            control,
            rows: Vec::new(),
            clock: Instant::now(),
            bias: 0.0,
            _space: std::marker::PhantomData,
        }
    }

    /// Logs iteration `n` at `u`; returns true when the stopping rule fires.
    fn log(&mut self, n: usize, t_n: f64, m_n: usize, u: &S::Vector) -> Result<bool> {
        let mut row = IterationRow::new(n, t_n, m_n);
        if let Some(m) = self.control.monitor.as_deref_mut() {
            m.observe(n, u, &mut row).map_err(|e| e.at_iteration(n))?;
        }
        if self.control.record_timing {
            row.wall_ms = self.clock.elapsed().as_millis() as u64;
        }
        self.rows.push(row);
        if let Some(m) = self.control.monitor.as_deref_mut() {
            m.row_done(self.rows.last().expect("just pushed")).map_err(|e| e.at_iteration(n))?;
        }
        Ok(self.control.stop.is_some_and(|s| s(&self.rows)))
    }

    fn finish(self, u: S::Vector, terminated_at: Option<usize>) -> RunRecord<S::Vector> {
        RunRecord {
            rows: self.rows,
            final_iterate: u,
            terminated_at,
            bias_weighted_sum: self.bias,
        }
    }
}

/// Plain stochastic gradient method for smooth objectives.
pub fn run_sgd<S, G>(
    space: &S,
    oracle: &G,
    schedule: &StepSchedule,
    u1: S::Vector,
    control: LoopControl<'_, S>,
) -> Result<RunRecord<S::Vector>>
where
    S: InnerProductSpace,
    G: StochasticGradient<S> + ?Sized,
{
    schedule.validate().require_robbins_monro()?;
    let mut driver = Driver::new(control);
    let mut u = u1;
    for n in 1..=driver.control.n_max {
        let t = schedule.step(n);
        if driver.log(n, t, 1, &u)? {
            return Ok(driver.finish(u, Some(n)));
        }
        let g = oracle.gradient(&u, n as u64).map_err(|e| e.at_iteration(n))?;
        if let Some(k) = oracle.bias_bound(n) {
            driver.bias += t * k;
        }
        u = space.combine(1.0, &u, -t, &g);
    }
    Ok(driver.finish(u, None))
}

/// Variance-reduced stochastic proximal gradient method.
///
/// Rejects `step >= 1 / (2 lipschitz)` and batch schedules whose
/// reciprocals are not summable.
#[allow(clippy::too_many_arguments)]
pub fn run_vr_spg<S, G, H>(
    space: &S,
    oracle: &G,
    step: f64,
    lipschitz: f64,
    batches: &BatchSchedule,
    prox: &H,
    u1: S::Vector,
    control: LoopControl<'_, S>,
) -> Result<RunRecord<S::Vector>>
where
    S: InnerProductSpace,
    G: StochasticGradient<S> + ?Sized,
    H: ProximalTerm<S> + ?Sized,
{
    if !(lipschitz > 0.0) {
        return Err(Error::Config(format!("Lipschitz constant must be positive, got {lipschitz}")));
    }
    if !(step > 0.0 && step < 0.5 / lipschitz) {
        return Err(Error::Config(format!(
            "constant step must satisfy 0 < t < 1/(2L) = {}, got {step}",
            0.5 / lipschitz
        )));
    }
    if !batches.reciprocal_summable() {
        return Err(Error::Config(format!("batch sizes {batches:?} do not satisfy sum 1/m_n < inf")));
    }
    let parallel = control.parallel;
    let mut driver = Driver::new(control);
    let mut u = u1;
    for n in 1..=driver.control.n_max {
        let m = batches.size(n);
        if driver.log(n, step, m, &u)? {
            return Ok(driver.finish(u, Some(n)));
        }
        let g = batch_mean(space, oracle, &u, batches.offset(n), m, parallel).map_err(|e| e.at_iteration(n))?;
        if let Some(k) = oracle.bias_bound(n) {
            driver.bias += step * k;
        }
        u = prox.prox(space, &space.combine(1.0, &u, -step, &g), step);
    }
    Ok(driver.finish(u, None))
}

/// Stochastic proximal gradient method with decreasing steps.
pub fn run_spg_decreasing<S, G, H>(
    space: &S,
    oracle: &G,
    schedule: &StepSchedule,
    prox: &H,
    u1: S::Vector,
    control: LoopControl<'_, S>,
) -> Result<RunRecord<S::Vector>>
where
    S: InnerProductSpace,
    G: StochasticGradient<S> + ?Sized,
    H: ProximalTerm<S> + ?Sized,
{
    schedule.validate().require_robbins_monro()?;
    let mut driver = Driver::new(control);
    let mut u = u1;
    for n in 1..=driver.control.n_max {
        let t = schedule.step(n);
        if driver.log(n, t, 1, &u)? {
            return Ok(driver.finish(u, Some(n)));
        }
        let g = oracle.gradient(&u, n as u64).map_err(|e| e.at_iteration(n))?;
        if let Some(k) = oracle.bias_bound(n) {
            driver.bias += t * k;
        }
        u = prox.prox(space, &space.combine(1.0, &u, -t, &g), t);
    }
    Ok(driver.finish(u, None))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prox::{BoxSet, NoProx, ProxSpec};
    use crate::space::{ControlField, ControlSpace};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn scalar() -> ControlSpace {
        ControlSpace::coordinates(1, 1.0)
    }

    #[test]
    fn sgd_on_deterministic_quadratic_decays_monotonically() {
        let s = scalar();
        let g = |u: &ControlField, _| Ok(u.clone());
        struct Trace(Vec<f64>);
        impl Monitor<ControlSpace> for Trace {
            fn observe(&mut self, _: usize, u: &ControlField, _: &mut IterationRow) -> Result<()> {
                self.0.push(u.values()[0]);
                Ok(())
            }
        }
        let mut trace = Trace(Vec::new());
        let sched = StepSchedule::Polynomial { theta: 0.5, alpha: 1.0 };
        run_sgd(&s, &g, &sched, s.constant(1.0), LoopControl::new(200).monitor(&mut trace)).unwrap();
        assert!(trace.0.windows(2).all(|w| w[1] < w[0] && w[1] > 0.0));
        // u_{n+1} = (1 - 0.5/n) u_n
        let mut expect = 1.0;
        for (n, v) in trace.0.iter().enumerate() {
            assert!((v - expect).abs() < 1e-14);
            expect *= 1.0 - 0.5 / (n + 1) as f64;
        }
    }

    #[test]
    fn zero_gradient_keeps_iterate() {
        let s = ControlSpace::coordinates(3, 1.0);
        let g = |_: &ControlField, _| Ok(ControlSpace::coordinates(3, 1.0).zero());
        let u1 = s.field(vec![1.0, -2.0, 3.0]).unwrap();
        let run = run_sgd(&s, &g, &StepSchedule::harmonic(1.0), u1.clone(), LoopControl::new(50)).unwrap();
        assert_eq!(run.final_iterate, u1);
        assert_eq!(run.iterations(), 50);
    }

    #[test]
    fn sgd_rejects_non_robbins_monro_steps() {
        let s = scalar();
        let g = |u: &ControlField, _| Ok(u.clone());
        let sched = StepSchedule::Polynomial { theta: 1.0, alpha: 0.5 };
        assert!(matches!(run_sgd(&s, &g, &sched, s.zero(), LoopControl::new(5)), Err(Error::Config(_))));
    }

    #[test]
    fn noisy_robbins_monro_converges() {
        let s = scalar();
        let mut successes = 0;
        for seed in 0..20u64 {
            let g = move |u: &ControlField, k: u64| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_mul(1_000_003) ^ k);
                let w: f64 = StandardNormal.sample(&mut rng);
                Ok(scalar().map(u, |_, v| v + w))
            };
            let run = run_sgd(&s, &g, &StepSchedule::harmonic(1.0), s.constant(1.0), LoopControl::new(10_000)).unwrap();
            if run.final_iterate.values()[0].abs() <= 0.1 {
                successes += 1;
            }
        }
        assert!(successes >= 18, "{successes}");
    }

    #[test]
    fn oracle_errors_carry_the_iteration() {
        let s = scalar();
        let g = |u: &ControlField, k: u64| {
            if k == 7 {
                Err(Error::InvalidArgument("boom".into()))
            } else {
                Ok(u.clone())
            }
        };
        let err = run_spg_decreasing(&s, &g, &StepSchedule::harmonic(0.1), &NoProx, s.constant(1.0), LoopControl::new(10)).unwrap_err();
        assert!(matches!(err, Error::Iteration { iteration: 7, .. }));
    }

    #[test]
    fn vr_spg_configuration_checks() {
        let s = scalar();
        let g = |u: &ControlField, _| Ok(u.clone());
        let batches = BatchSchedule::Polynomial { scale: 1.0, power: 2.0 };
        let prox = ProxSpec::none();
        let bad = run_vr_spg(&s, &g, 0.6, 1.0, &batches, &prox, s.zero(), LoopControl::new(3));
        assert!(matches!(bad, Err(Error::Config(_))));
        let edge = run_vr_spg(&s, &g, 0.5, 1.0, &batches, &prox, s.zero(), LoopControl::new(3));
        assert!(matches!(edge, Err(Error::Config(_))));
        let lin = BatchSchedule::Linear { first: 1, slope: 1 };
        assert!(run_vr_spg(&s, &g, 0.4, 1.0, &lin, &prox, s.zero(), LoopControl::new(3)).is_err());
        assert!(run_vr_spg(&s, &g, 0.4, 1.0, &batches, &prox, s.zero(), LoopControl::new(3)).is_ok());
    }

    #[test]
    fn vr_spg_box_only_is_projected_gradient() {
        let s = ControlSpace::coordinates(2, 0.5);
        let target = s.field(vec![2.0, -0.1]).unwrap();
        let g = {
            let target = target.clone();
            move |u: &ControlField, _| Ok(ControlSpace::coordinates(2, 0.5).combine(1.0, u, -1.0, &target))
        };
        let b = BoxSet::symmetric(0.5).unwrap();
        let prox = ProxSpec::box_only(b.clone());
        let batches = BatchSchedule::Polynomial { scale: 1.0, power: 1.1 };
        let t = 0.3;
        let u1 = s.field(vec![0.2, 0.4]).unwrap();
        let run = run_vr_spg(&s, &g, t, 1.0, &batches, &prox, u1.clone(), LoopControl::new(1)).unwrap();
        let step = s.combine(1.0, &u1, -t, &g(&u1, 0).unwrap());
        assert_eq!(run.final_iterate, b.project(&s, &step));
    }

    #[test]
    fn vr_spg_fixed_point_is_stationary() {
        let s = ControlSpace::coordinates(3, 1.0 / 3.0);
        let target = s.field(vec![2.0, -0.1, -0.004]).unwrap();
        let g = {
            let target = target.clone();
            move |u: &ControlField, _| Ok(ControlSpace::coordinates(3, 1.0 / 3.0).combine(1.0, u, -1.0, &target))
        };
        let prox = ProxSpec::l1_box(0.01, BoxSet::symmetric(0.5).unwrap()).unwrap();
        let batches = BatchSchedule::Polynomial { scale: 1.0, power: 1.5 };
        let t = 0.45;
        let run = run_vr_spg(&s, &g, t, 1.0, &batches, &prox, s.zero(), LoopControl::new(60)).unwrap();
        let u = run.final_iterate;
        let again = prox.prox_l1_box(&s, &s.combine(1.0, &u, -t, &g(&u, 0).unwrap()), t).unwrap();
        assert!(s.distance(&u, &again) < 1e-12);
        assert!((u.values()[0] - 0.5).abs() < 1e-12);
        assert_eq!(u.values()[2], 0.0);
    }

    #[test]
    fn decreasing_steps_reach_unconstrained_minimizer() {
        // j(u) = 0.5 <u - c, D (u - c)> on unit-weight coordinates
        let s = ControlSpace::coordinates(3, 1.0);
        let diag = [1.0, 2.0, 0.5];
        let c = [0.3, -1.2, 2.0];
        let g = move |u: &ControlField, _| {
            ControlSpace::coordinates(3, 1.0).field(u.values().iter().enumerate().map(|(i, v)| diag[i] * (v - c[i])).collect())
        };
        let run = run_spg_decreasing(&s, &g, &StepSchedule::harmonic(2.0), &ProxSpec::none(), s.zero(), LoopControl::new(200)).unwrap();
        for i in 0..3 {
            assert!((run.final_iterate.values()[i] - c[i]).abs() < 1e-3);
        }
    }

    #[test]
    fn stationary_start_stays_stationary() {
        let s = ControlSpace::coordinates(2, 0.5);
        let prox = ProxSpec::l1_box(0.1, BoxSet::symmetric(0.5).unwrap()).unwrap();
        // g(u) = u - c with c = (0.3, 2.0): stationary point (0.2, 0.5)
        let g = |u: &ControlField, _| {
            let s = ControlSpace::coordinates(2, 0.5);
            Ok(s.combine(1.0, u, -1.0, &s.field(vec![0.3, 2.0]).unwrap()))
        };
        struct R<'p>(&'p ProxSpec, Vec<f64>);
        impl Monitor<ControlSpace> for R<'_> {
            fn observe(&mut self, _: usize, u: &ControlField, row: &mut IterationRow) -> Result<()> {
                let s = ControlSpace::coordinates(2, 0.5);
                let grad = s.combine(1.0, u, -1.0, &s.field(vec![0.3, 2.0]).unwrap());
                let r = self.0.stationarity_measure(&s, u, &grad)?;
                row.r_n = Some(r);
                self.1.push(r);
                Ok(())
            }
        }
        let mut mon = R(&prox, Vec::new());
        let u1 = s.field(vec![0.2, 0.5]).unwrap();
        let run = run_spg_decreasing(&s, &g, &StepSchedule::harmonic(3.0), &prox, u1.clone(), LoopControl::new(30).monitor(&mut mon)).unwrap();
        assert!(mon.1.iter().all(|&r| r < 1e-15));
        assert!(s.distance(&run.final_iterate, &u1) < 1e-15);
    }

    #[test]
    fn stopping_rule_and_bias_log() {
        struct Biased;
        impl StochasticGradient<ControlSpace> for Biased {
            fn gradient(&self, u: &ControlField, _: u64) -> Result<ControlField> {
                Ok(u.clone())
            }
            fn bias_bound(&self, n: usize) -> Option<f64> {
                Some(1.0 / n as f64)
            }
        }
        let s = scalar();
        let stop = |rows: &[IterationRow]| rows.len() == 4;
        let run = run_spg_decreasing(&s, &Biased, &StepSchedule::harmonic(0.5), &NoProx, s.constant(1.0), LoopControl::new(100).stop_when(&stop)).unwrap();
        assert_eq!(run.terminated_at, Some(4));
        assert_eq!(run.iterations(), 4);
        // steps taken at n = 1, 2, 3
        let expect: f64 = (1..=3).map(|n| 0.5 / n as f64 * (1.0 / n as f64)).sum();
        assert!((run.bias_weighted_sum - expect).abs() < 1e-15);
    }

    #[test]
    fn zero_iterations() {
        let s = scalar();
        let g = |u: &ControlField, _| Ok(u.clone());
        let run = run_spg_decreasing(&s, &g, &StepSchedule::harmonic(1.0), &NoProx, s.constant(2.0), LoopControl::new(0)).unwrap();
        assert!(run.rows.is_empty());
        assert_eq!(run.final_iterate.values()[0], 2.0);
    }

    #[test]
    fn parallel_batches_are_bitwise_identical() {
        let s = ControlSpace::coordinates(5, 0.2);
        let g = |u: &ControlField, k: u64| {
            let s = ControlSpace::coordinates(5, 0.2);
            Ok(s.map(u, |i, v| v + ((k as f64 + 1.0) * (i as f64 + 0.37)).sin()))
        };
        let a = batch_mean(&s, &g, &s.constant(0.1), 10, 37, false).unwrap();
        let b = batch_mean(&s, &g, &s.constant(0.1), 10, 37, true).unwrap();
        assert_eq!(a, b);
    }
}
