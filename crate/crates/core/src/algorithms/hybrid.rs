//! Hybrid-UCB.
//!
//! The private mean uses every observation and is refreshed on every pull.
//! Observations are split between two mechanisms, each holding half the
//! budget: settled doubling arrays (`Lap(2/eps)` per array, folded into a
//! running noisy prefix) and a live binary-mechanism tree that mirrors the
//! array currently being filled.

use super::{argmax, bandit_feedback, check_arms, check_epsilon, Feedback, FeedbackKind, Policy};
use crate::env::Decision;
use crate::mechanisms::{ArraySum, BinaryTreeCounter};
use crate::noise::{purpose, LaplaceNoise, NoiseFactory};
use crate::{Error, Result};

/// `6 * sqrt(8)`, the constant in front of the privacy bonus.
const PRIVACY_BONUS: f64 = 16.970_562_748_477_143;

/// Per-arm state.
#[derive(Debug, Clone)]
pub struct HybridLedger {
    pulls: u64,
    /// Index of the live array/tree pair; both have capacity `2^round`.
    round: u32,
    /// Noisy sum of all settled arrays.
    settled: f64,
    settled_arrays: u32,
    private_mean: f64,
    live_array: ArraySum,
    live_tree: BinaryTreeCounter,
    epsilon: f64,
    array_noise: LaplaceNoise,
    tree_noise: LaplaceNoise,
}

impl HybridLedger {
    pub fn new(epsilon: f64, array_noise: LaplaceNoise, tree_noise: LaplaceNoise) -> Result<Self> {
        check_epsilon(epsilon)?;
        Ok(Self {
            pulls: 0,
            round: 0,
            settled: 0.0,
            settled_arrays: 0,
            private_mean: 0.0,
            live_array: ArraySum::new(1, 2.0 / epsilon)?,
            live_tree: BinaryTreeCounter::new(2, epsilon)?,
            epsilon,
            array_noise,
            tree_noise,
        })
    }

    pub fn insert(&mut self, x: f64) -> Result<()> {
        self.pulls += 1;
        if self.round == 0 {
            // The first observation only goes to the size-1 array.
            let noisy = self
                .live_array
                .insert(x, &mut self.array_noise)?
                .ok_or_else(|| Error::Logic("size-1 array did not fill".into()))?;
            self.settled = noisy;
            self.settled_arrays = 1;
            self.private_mean = noisy;
            self.open_round(1)?;
            return Ok(());
        }

        let released = self.live_array.insert(x, &mut self.array_noise)?;
        self.live_tree.insert(x, &mut self.tree_noise)?;
        self.private_mean = (self.settled + self.live_tree.noisy_sum()) / self.pulls as f64;
        if let Some(noisy) = released {
            self.settled += noisy;
            self.settled_arrays += 1;
            self.open_round(self.round + 1)?;
        }
        Ok(())
    }

    fn open_round(&mut self, round: u32) -> Result<()> {
        let capacity = 1u64 << round;
        self.round = round;
        self.live_array = ArraySum::new(capacity, 2.0 / self.epsilon)?;
        self.live_tree = BinaryTreeCounter::new(capacity, self.epsilon)?;
        Ok(())
    }

    pub fn pulls(&self) -> u64 {
        self.pulls
    }

    pub fn private_mean(&self) -> Option<f64> {
        (self.pulls > 0).then_some(self.private_mean)
    }

    pub fn round(&self) -> u32 {
        self.round
    }

    pub fn settled_arrays(&self) -> u32 {
        self.settled_arrays
    }

    pub fn settled_noisy_sum(&self) -> f64 {
        self.settled
    }

    pub fn live_array(&self) -> &ArraySum {
        &self.live_array
    }

    pub fn live_tree(&self) -> &BinaryTreeCounter {
        &self.live_tree
    }

    #[inline]
    fn index_with_log(&self, log2_t: f64) -> f64 {
        let o = self.pulls as f64;
        let depth = (63 - (self.pulls + 1).leading_zeros()) as f64;
        self.private_mean
            + (3.0 * log2_t / o).sqrt()
            + PRIVACY_BONUS * log2_t * depth / (o * self.epsilon)
    }
}

/// `mu~ + sqrt(3 log2 t / O) + 6 sqrt(8) log2 t floor(log2(O + 1)) / (O eps)`.
pub fn hybrid_index(ledger: &HybridLedger, t: u64) -> Result<f64> {
    if ledger.pulls == 0 {
        return Err(Error::Logic("index of an arm that was never pulled".into()));
    }
    if t == 0 {
        return Err(Error::InvalidParameter("rounds start at 1".into()));
    }
    Ok(ledger.index_with_log((t as f64).log2()))
}

#[derive(Debug, Clone)]
pub struct HybridUcb {
    ledgers: Vec<HybridLedger>,
}

impl HybridUcb {
    pub fn new(arms: usize, epsilon: f64, noise: NoiseFactory) -> Result<Self> {
        check_arms(arms)?;
        let ledgers = (0..arms as u64)
            .map(|j| {
                HybridLedger::new(
                    epsilon,
                    noise.source(j, purpose::ARRAY_NOISE),
                    noise.source(j, purpose::TREE_NOISE),
                )
            })
            .collect::<Result<_>>()?;
        Ok(Self { ledgers })
    }

    pub fn ledgers(&self) -> &[HybridLedger] {
        &self.ledgers
    }
}

impl Policy for HybridUcb {
    fn name(&self) -> &'static str {
        "Hybrid-UCB"
    }

    fn feedback_kind(&self) -> FeedbackKind {
        FeedbackKind::Bandit
    }

    fn select(&mut self, t: u64) -> Decision {
        if let Some(j) = self.ledgers.iter().position(|l| l.pulls == 0) {
            return Decision::Arm(j);
        }
        let log2_t = (t as f64).log2();
        Decision::Arm(argmax(
            self.ledgers.iter().map(|l| l.index_with_log(log2_t)),
        ))
    }

    fn observe(&mut self, _t: u64, feedback: Feedback<'_>) -> Result<()> {
        let (arm, x) = bandit_feedback(feedback, self.ledgers.len())?;
        self.ledgers[arm].insert(x)
    }
}
