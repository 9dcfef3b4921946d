//! Anytime-Lazy-UCB.
//!
//! Each arm fills a sequence of arrays of capacity 1, 2, 4, ... . When an
//! array fills, its sum is released once with `Lap(1/eps)` noise and the
//! arm's private mean is replaced by that array's noisy mean alone; nothing
//! older contributes. Arrays are compressed to `(count, sum, capacity)`, so
//! each arm keeps a constant number of scalars.

use super::{argmax, bandit_feedback, check_arms, check_epsilon, Feedback, FeedbackKind, Policy};
use crate::env::Decision;
use crate::mechanisms::ArraySum;
use crate::noise::{purpose, LaplaceNoise, NoiseFactory};
use crate::{Error, Result};

/// Per-arm state.
#[derive(Debug, Clone)]
pub struct ArmLedger {
    pulls: u64,
    /// Index `r` of the most recent full array.
    last_full: u32,
    /// Size of the most recent full array, 0 before the first pull.
    full_len: u64,
    private_mean: f64,
    active: ArraySum,
    epsilon: f64,
    noise: LaplaceNoise,
}

impl ArmLedger {
    pub fn new(epsilon: f64, noise: LaplaceNoise) -> Result<Self> {
        check_epsilon(epsilon)?;
        Ok(Self {
            pulls: 0,
            last_full: 0,
            full_len: 0,
            private_mean: 0.0,
            active: ArraySum::new(1, 1.0 / epsilon)?,
            epsilon,
            noise,
        })
    }

    /// Inserts one observation. Returns true when it filled the active array
    /// and the private mean was refreshed.
    pub fn insert(&mut self, x: f64) -> Result<bool> {
        self.pulls += 1;
        let Some(noisy) = self.active.insert(x, &mut self.noise)? else {
            return Ok(false);
        };
        let capacity = self.active.capacity();
        self.last_full = capacity.trailing_zeros();
        self.full_len = capacity;
        self.private_mean = noisy / capacity as f64;
        self.active = ArraySum::new(capacity * 2, 1.0 / self.epsilon)?;
        Ok(true)
    }

    pub fn is_initialized(&self) -> bool {
        self.full_len > 0
    }

    pub fn pulls(&self) -> u64 {
        self.pulls
    }

    /// Private mean of the most recent full array.
    pub fn private_mean(&self) -> Option<f64> {
        self.is_initialized().then_some(self.private_mean)
    }

    pub fn full_len(&self) -> u64 {
        self.full_len
    }

    pub fn last_full_index(&self) -> u32 {
        self.last_full
    }

    pub fn active(&self) -> &ArraySum {
        &self.active
    }

    /// Arrays created so far, including the one being filled.
    pub fn arrays_created(&self) -> u32 {
        if self.is_initialized() {
            self.last_full + 2
        } else {
            1
        }
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    #[inline]
    fn index_with_ln(&self, ln_t: f64) -> f64 {
        let lambda = self.full_len as f64;
        self.private_mean + (3.0 * ln_t / lambda).sqrt() + 3.0 * ln_t / (self.epsilon * lambda)
    }
}

/// Upper confidence index of an arm at round `t`:
/// `mu~ + sqrt(3 ln t / lambda) + 3 ln t / (eps lambda)` where `lambda` is
/// the size of the most recent full array.
pub fn alucb_index(ledger: &ArmLedger, t: u64) -> Result<f64> {
    if !ledger.is_initialized() {
        return Err(Error::Logic("index of an arm that was never pulled".into()));
    }
    if t == 0 {
        return Err(Error::InvalidParameter("rounds start at 1".into()));
    }
    Ok(ledger.index_with_ln((t as f64).ln()))
}

#[derive(Debug, Clone)]
pub struct AnytimeLazyUcb {
    ledgers: Vec<ArmLedger>,
}

impl AnytimeLazyUcb {
    pub fn new(arms: usize, epsilon: f64, noise: NoiseFactory) -> Result<Self> {
        check_arms(arms)?;
        let ledgers = (0..arms as u64)
            .map(|j| ArmLedger::new(epsilon, noise.source(j, purpose::ARRAY_NOISE)))
            .collect::<Result<_>>()?;
        Ok(Self { ledgers })
    }

    pub fn ledgers(&self) -> &[ArmLedger] {
        &self.ledgers
    }
}

impl Policy for AnytimeLazyUcb {
    fn name(&self) -> &'static str {
        "Anytime-Lazy-UCB"
    }

    fn feedback_kind(&self) -> FeedbackKind {
        FeedbackKind::Bandit
    }

    fn select(&mut self, t: u64) -> Decision {
        if let Some(j) = self.ledgers.iter().position(|l| !l.is_initialized()) {
            return Decision::Arm(j);
        }
        let ln_t = (t as f64).ln();
        Decision::Arm(argmax(self.ledgers.iter().map(|l| l.index_with_ln(ln_t))))
    }

    fn observe(&mut self, _t: u64, feedback: Feedback<'_>) -> Result<()> {
        let (arm, x) = bandit_feedback(feedback, self.ledgers.len())?;
        self.ledgers[arm].insert(x)?;
        Ok(())
    }
}
