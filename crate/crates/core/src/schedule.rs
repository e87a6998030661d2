//! Step-size and batch-size sequences.

use crate::error::{Error, Result};

/// Step sizes `t_n` for `n = 1, 2, ...`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum StepSchedule {
    Constant(f64),
    /// `t_n = theta / n^alpha`.
    Polynomial { theta: f64, alpha: f64 },
}

impl StepSchedule {
    pub fn harmonic(theta: f64) -> Self {
        StepSchedule::Polynomial { theta, alpha: 1.0 }
    }

    pub fn step(&self, n: usize) -> f64 {
        match *self {
            StepSchedule::Constant(t) => t,
            StepSchedule::Polynomial { theta, alpha } => theta / (n as f64).powf(alpha),
        }
    }

    pub fn validate(&self) -> ScheduleReport {
        match *self {
            StepSchedule::Constant(t) => ScheduleReport {
                positive: t > 0.0 && t.is_finite(),
                sum_diverges: t > 0.0,
                squares_summable: false,
                constant: true,
            },
            StepSchedule::Polynomial { theta, alpha } => ScheduleReport {
                positive: theta > 0.0 && theta.is_finite(),
                sum_diverges: alpha <= 1.0,
                squares_summable: alpha > 0.5,
                constant: false,
            },
        }
    }
}

/// Outcome of checking `t_n > 0`, `sum t_n = inf`, `sum t_n^2 < inf`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ScheduleReport {
    pub positive: bool,
    pub sum_diverges: bool,
    pub squares_summable: bool,
    pub constant: bool,
}

impl ScheduleReport {
    pub fn is_robbins_monro(&self) -> bool {
        self.positive && self.sum_diverges && self.squares_summable
    }

    /// Accepted for some algorithm: Robbins-Monro, or a positive constant
    /// (constant-step, growing-batch method).
    pub fn passes(&self) -> bool {
        self.is_robbins_monro() || (self.constant && self.positive)
    }

    /// First failed Robbins-Monro condition, if any.
    pub fn failed_condition(&self) -> Option<&'static str> {
        if !self.positive {
            Some("t_n > 0")
        } else if !self.sum_diverges {
            Some("sum t_n = inf (the series converges)")
        } else if !self.squares_summable {
            Some("sum t_n^2 < inf (the series of squares diverges)")
        } else {
            None
        }
    }

    pub(crate) fn require_robbins_monro(&self) -> Result<()> {
        match self.failed_condition() {
            None => Ok(()),
            Some(c) => Err(Error::Config(format!("step sizes violate Robbins-Monro condition {c}"))),
        }
    }
}

pub fn validate_schedule(s: &StepSchedule) -> ScheduleReport {
    s.validate()
}

/// Batch sizes `m_n >= 1`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum BatchSchedule {
    Fixed(usize),
    /// `m_n = first + slope (n - 1)`.
    Linear { first: usize, slope: usize },
    /// `m_n = base + increment * floor(n / period)`.
    Staircase { base: usize, increment: usize, period: usize },
    /// `m_n = ceil(scale * n^power)`.
    Polynomial { scale: f64, power: f64 },
}

impl BatchSchedule {
    /// Monitoring schedule `m_n = 10 floor(n / 50) + 1`.
    pub fn monitoring() -> Self {
        BatchSchedule::Staircase { base: 1, increment: 10, period: 50 }
    }

    pub fn size(&self, n: usize) -> usize {
        let m = match *self {
            BatchSchedule::Fixed(m) => m,
            BatchSchedule::Linear { first, slope } => first + slope * n.saturating_sub(1),
            BatchSchedule::Staircase { base, increment, period } => base + increment * (n / period.max(1)),
            BatchSchedule::Polynomial { scale, power } => (scale * (n as f64).powf(power)).ceil() as usize,
        };
        m.max(1)
    }

    /// Whether `sum_n 1/m_n < inf`.
    pub fn reciprocal_summable(&self) -> bool {
        match *self {
            BatchSchedule::Polynomial { scale, power } => scale > 0.0 && power > 1.0,
            _ => false,
        }
    }

    /// `sum_{k=1}^{n-1} m_k`: index of the first sample of batch `n` when
    /// batches are laid out back to back.
    pub fn offset(&self, n: usize) -> u64 {
        if n <= 1 {
            return 0;
        }
        match *self {
            BatchSchedule::Fixed(m) => (m.max(1) * (n - 1)) as u64,
            BatchSchedule::Staircase { base, increment, period } if base >= 1 => {
                // sum_{k=1}^{K} floor(k/P) with K = n - 1
                let p = period.max(1) as u64;
                let k = (n - 1) as u64;
                let q = k / p;
                let floors = p * q * q.saturating_sub(1) / 2 + q * (k - q * p + 1);
                base as u64 * k + increment as u64 * floors
            }
            _ => (1..n).map(|k| self.size(k) as u64).sum(),
        }
    }
}
