//! Non-private UCB1 baseline with index `mean + sqrt(3 ln t / n)`, the
//! exploration term of Anytime-Lazy-UCB with the privacy term removed.

use super::{argmax, bandit_feedback, check_arms, Feedback, FeedbackKind, Policy};
use crate::env::Decision;
use crate::Result;

#[derive(Debug, Clone)]
pub struct Ucb1 {
    counts: Vec<u64>,
    sums: Vec<f64>,
}

impl Ucb1 {
    pub fn new(arms: usize) -> Result<Self> {
        check_arms(arms)?;
        Ok(Self {
            counts: vec![0; arms],
            sums: vec![0.0; arms],
        })
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn index(&self, arm: usize, t: u64) -> f64 {
        let n = self.counts[arm] as f64;
        self.sums[arm] / n + (3.0 * (t as f64).ln() / n).sqrt()
    }
}

impl Policy for Ucb1 {
    fn name(&self) -> &'static str {
        "UCB1"
    }

    fn feedback_kind(&self) -> FeedbackKind {
        FeedbackKind::Bandit
    }

    fn select(&mut self, t: u64) -> Decision {
        if let Some(j) = self.counts.iter().position(|&n| n == 0) {
            return Decision::Arm(j);
        }
        let ln_t = (t as f64).ln();
        Decision::Arm(argmax(
            self.counts
                .iter()
                .zip(&self.sums)
                .map(|(&n, &s)| s / n as f64 + (3.0 * ln_t / n as f64).sqrt()),
        ))
    }

    fn observe(&mut self, _t: u64, feedback: Feedback<'_>) -> Result<()> {
        let (arm, x) = bandit_feedback(feedback, self.counts.len())?;
        self.counts[arm] += 1;
        self.sums[arm] += x;
        Ok(())
    }
}
