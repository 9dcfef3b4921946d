//! Stochastic environments and pseudo-regret bookkeeping.

use crate::noise::{bernoulli, purpose, RngStream};
use crate::{Error, Result};

/// Reward distribution of every arm.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RewardFamily {
    #[default]
    Bernoulli,
}

/// Arm means of a stochastic game. Gaps are always derived from the means.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct EnvironmentSpec {
    means: Vec<f64>,
    family: RewardFamily,
}

impl EnvironmentSpec {
    pub fn new(means: Vec<f64>) -> Result<Self> {
        Self::with_family(means, RewardFamily::Bernoulli)
    }

    pub fn with_family(means: Vec<f64>, family: RewardFamily) -> Result<Self> {
        if means.len() < 2 {
            return Err(Error::InvalidParameter(format!(
                "need at least two arms, got {}",
                means.len()
            )));
        }
        if let Some(bad) = means.iter().find(|m| !(0.0..=1.0).contains(*m)) {
            return Err(Error::InvalidParameter(format!(
                "arm means must lie in [0, 1], got {bad}"
            )));
        }
        Ok(Self { means, family })
    }

    pub fn means(&self) -> &[f64] {
        &self.means
    }

    pub fn family(&self) -> RewardFamily {
        self.family
    }

    pub fn arms(&self) -> usize {
        self.means.len()
    }

    pub fn best_mean(&self) -> f64 {
        self.means.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn gaps(&self) -> Vec<f64> {
        let best = self.best_mean();
        self.means.iter().map(|m| best - m).collect()
    }
}

/// What the learner played in one round.
#[derive(Debug, Clone, PartialEq)]
pub enum Decision {
    Arm(usize),
    /// A distribution over arms (full-information play).
    Weights(Vec<f64>),
}

impl Decision {
    /// The decision as a weight vector over `k` arms; an arm becomes a point
    /// mass.
    pub fn weights(&self, k: usize) -> Vec<f64> {
        match self {
            Decision::Arm(j) => {
                let mut w = vec![0.0; k];
                w[*j] = 1.0;
                w
            }
            Decision::Weights(w) => w.clone(),
        }
    }
}

/// One round's rewards, one entry per arm.
#[derive(Debug, Clone, PartialEq)]
pub struct RewardVector(pub Vec<f64>);

impl RewardVector {
    pub fn values(&self) -> &[f64] {
        &self.0
    }
}

/// Anything that yields one reward vector per round.
pub trait RewardSource {
    fn arms(&self) -> usize;
    /// Writes the next round's rewards into `out` (length `arms()`).
    fn fill_round(&mut self, out: &mut [f64]);

    fn next_round(&mut self) -> RewardVector {
        let mut v = vec![0.0; self.arms()];
        self.fill_round(&mut v);
        RewardVector(v)
    }
}

/// Bernoulli environment with an independent stream per arm.
#[derive(Debug, Clone)]
pub struct Environment {
    spec: EnvironmentSpec,
    streams: Vec<RngStream>,
}

impl Environment {
    /// Arm `j` draws from the stream `(seed, hash(run, j, REWARD))`.
    pub fn new(spec: EnvironmentSpec, seed: u64, run: u64) -> Self {
        let streams = (0..spec.arms() as u64)
            .map(|j| RngStream::derived(seed, &[run, j, purpose::REWARD]))
            .collect();
        Self { spec, streams }
    }

    pub fn spec(&self) -> &EnvironmentSpec {
        &self.spec
    }

    pub fn draw_round(&mut self) -> RewardVector {
        self.next_round()
    }
}

impl RewardSource for Environment {
    fn arms(&self) -> usize {
        self.spec.arms()
    }

    fn fill_round(&mut self, out: &mut [f64]) {
        match self.spec.family {
            RewardFamily::Bernoulli => {
                for ((x, &mu), rng) in out.iter_mut().zip(&self.spec.means).zip(&mut self.streams) {
                    *x = bernoulli(mu, rng).expect("means validated at construction");
                }
            }
        }
    }
}

/// Replays a recorded reward matrix, one row per round.
#[derive(Debug, Clone)]
pub struct ReplaySource {
    rows: Vec<Vec<f64>>,
    cursor: usize,
}

impl ReplaySource {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        let k = rows.first().map_or(0, Vec::len);
        if k == 0 || rows.iter().any(|r| r.len() != k) {
            return Err(Error::InvalidInput(
                "replay rows must be non-empty and equal length".into(),
            ));
        }
        Ok(Self { rows, cursor: 0 })
    }

    /// Records `rounds` rounds from another source.
    pub fn record(source: &mut impl RewardSource, rounds: usize) -> Self {
        let rows = (0..rounds).map(|_| source.next_round().0).collect();
        Self { rows, cursor: 0 }
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }
}

impl RewardSource for ReplaySource {
    fn arms(&self) -> usize {
        self.rows[0].len()
    }

    fn fill_round(&mut self, out: &mut [f64]) {
        out.copy_from_slice(&self.rows[self.cursor % self.rows.len()]);
        self.cursor += 1;
    }
}

/// Expected regret of one round: `mu* - mu_j` for an arm, `mu* - <w, mu>`
/// for a weight vector.
pub fn pseudo_regret_increment(spec: &EnvironmentSpec, decision: &Decision) -> Result<f64> {
    let best = spec.best_mean();
    match decision {
        Decision::Arm(j) => spec
            .means
            .get(*j)
            .map(|m| best - m)
            .ok_or_else(|| Error::InvalidParameter(format!("arm {j} out of range"))),
        Decision::Weights(w) => {
            if w.len() != spec.arms() {
                return Err(Error::InvalidParameter(format!(
                    "weight vector has {} entries for {} arms",
                    w.len(),
                    spec.arms()
                )));
            }
            if w.iter().any(|&x| x.is_nan() || x < 0.0) {
                return Err(Error::InvalidParameter(
                    "weights must be nonnegative".into(),
                ));
            }
            let total: f64 = w.iter().sum();
            if (total - 1.0).abs() > 1e-9 {
                return Err(Error::InvalidParameter(format!(
                    "weights must sum to 1, got {total}"
                )));
            }
            let played: f64 = w.iter().zip(&spec.means).map(|(a, m)| a * m).sum();
            Ok((best - played).max(0.0))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn setting(means: &[f64]) -> EnvironmentSpec {
        EnvironmentSpec::new(means.to_vec()).unwrap()
    }

    #[test]
    fn degenerate_means_are_deterministic() {
        let mut env = Environment::new(setting(&[1.0, 0.0]), 3, 0);
        for _ in 0..100 {
            assert_eq!(env.draw_round().0, vec![1.0, 0.0]);
        }
    }

    #[test]
    fn empirical_mean_matches() {
        let mut env = Environment::new(setting(&[0.75, 0.70, 0.70, 0.70, 0.70]), 9, 1);
        let n = 1_000_000;
        let mut s = 0.0;
        for _ in 0..n {
            s += env.draw_round().0[0];
        }
        assert!((s / n as f64 - 0.75).abs() < 0.002);
    }

    #[test]
    fn regret_increments() {
        let s2 = setting(&[0.75, 0.625, 0.5, 0.375, 0.25]);
        assert_eq!(
            pseudo_regret_increment(&s2, &Decision::Arm(0)).unwrap(),
            0.0
        );
        assert_eq!(
            pseudo_regret_increment(&s2, &Decision::Arm(2)).unwrap(),
            0.25
        );
        assert!(pseudo_regret_increment(&s2, &Decision::Arm(5)).is_err());

        let s1 = setting(&[0.75, 0.70, 0.70, 0.70, 0.70]);
        let uniform = Decision::Weights(vec![0.2; 5]);
        let inc = pseudo_regret_increment(&s1, &uniform).unwrap();
        assert!((inc - 0.04).abs() < 1e-12);
    }

    #[test]
    fn malformed_weights_rejected() {
        let s = setting(&[0.5, 0.4]);
        assert!(pseudo_regret_increment(&s, &Decision::Weights(vec![0.5, 0.4])).is_err());
        assert!(pseudo_regret_increment(&s, &Decision::Weights(vec![1.5, -0.5])).is_err());
        assert!(pseudo_regret_increment(&s, &Decision::Weights(vec![1.0])).is_err());
    }

    #[test]
    fn point_mass_matches_arm() {
        let s = setting(&[0.2, 0.9, 0.5]);
        for j in 0..3 {
            let a = pseudo_regret_increment(&s, &Decision::Arm(j)).unwrap();
            let w = pseudo_regret_increment(&s, &Decision::Weights(Decision::Arm(j).weights(3)))
                .unwrap();
            assert_eq!(a, w);
        }
    }

    #[test]
    fn ties_have_zero_regret() {
        let s = setting(&[0.6, 0.6, 0.1]);
        assert_eq!(pseudo_regret_increment(&s, &Decision::Arm(1)).unwrap(), 0.0);
    }

    #[test]
    fn spec_validation() {
        assert!(EnvironmentSpec::new(vec![0.5]).is_err());
        assert!(EnvironmentSpec::new(vec![0.5, 1.2]).is_err());
        assert_eq!(setting(&[0.3, 0.8]).gaps(), vec![0.5, 0.0]);
    }
}
