//! DP-SE: private successive elimination (Sajed and Sheffet, 2019).
//!
//! Epoch `e` targets gap `2^-e`. Every surviving arm is pulled `R_e` times
//! (round robin) on fresh observations, each arm's epoch mean is released
//! with `Lap(1/(R_e eps))` noise, and arms more than `2 err_e` below the best
//! noisy mean are dropped. With
//! `L_h = ln(h_log |S| e^2 / beta)` and `L_p = ln(p_log |S| e^2 / beta)`:
//!
//! ```text
//! R_e   = ceil(h L_h / D_e^2 + p L_p / (eps D_e))
//! err_e = sqrt(L_h / (2 R_e)) + L_p / (R_e eps)
//! ```
//!
//! The reference constants are `h = 32`, `h_log = 8`, `p = 8`, `p_log = 4`
//! and `beta = 1/T`; all of them can be overridden.

use super::{argmax, bandit_feedback, check_arms, check_epsilon, Feedback, FeedbackKind, Policy};
use crate::env::Decision;
use crate::noise::{purpose, LaplaceNoise, NoiseFactory};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct DpseParams {
    pub hoeffding_scale: f64,
    pub hoeffding_log_factor: f64,
    pub privacy_scale: f64,
    pub privacy_log_factor: f64,
    /// Failure probability; `None` means `1 / horizon`.
    pub beta: Option<f64>,
}

impl Default for DpseParams {
    fn default() -> Self {
        Self {
            hoeffding_scale: 32.0,
            hoeffding_log_factor: 8.0,
            privacy_scale: 8.0,
            privacy_log_factor: 4.0,
            beta: None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct DpSe {
    arms: usize,
    epsilon: f64,
    beta: f64,
    params: DpseParams,
    active: Vec<usize>,
    epoch: u32,
    pulls_per_arm: u64,
    /// Pulls made in the current epoch, across all surviving arms.
    epoch_pulls: u64,
    sums: Vec<f64>,
    noise: LaplaceNoise,
    eliminations: Vec<(u32, usize)>,
}

impl DpSe {
    pub fn new(
        arms: usize,
        epsilon: f64,
        horizon: u64,
        params: DpseParams,
        noise: NoiseFactory,
    ) -> Result<Self> {
        check_arms(arms)?;
        check_epsilon(epsilon)?;
        if horizon == 0 {
            return Err(Error::Config("DP-SE horizon must be positive".into()));
        }
        let beta = params.beta.unwrap_or(1.0 / horizon as f64);
        if !(beta > 0.0 && beta < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "beta must lie in (0, 1), got {beta}"
            )));
        }
        let mut s = Self {
            arms,
            epsilon,
            beta,
            params,
            active: (0..arms).collect(),
            epoch: 1,
            pulls_per_arm: 0,
            epoch_pulls: 0,
            sums: vec![0.0; arms],
            noise: noise.source(0, purpose::SELECTION_NOISE),
            eliminations: Vec::new(),
        };
        s.pulls_per_arm = s.epoch_length(s.epoch);
        Ok(s)
    }

    fn log_terms(&self, epoch: u32) -> (f64, f64) {
        let base = self.active.len() as f64 * (epoch as f64).powi(2) / self.beta;
        (
            (self.params.hoeffding_log_factor * base).ln(),
            (self.params.privacy_log_factor * base).ln(),
        )
    }

    /// `R_e` for the current set of surviving arms.
    pub fn epoch_length(&self, epoch: u32) -> u64 {
        let gap = 0.5f64.powi(epoch as i32);
        let (lh, lp) = self.log_terms(epoch);
        let r = self.params.hoeffding_scale * lh / (gap * gap)
            + self.params.privacy_scale * lp / (self.epsilon * gap);
        r.ceil().max(1.0) as u64
    }

    /// `err_e` for `pulls` pulls per arm.
    pub fn confidence_radius(&self, epoch: u32, pulls: u64) -> f64 {
        let (lh, lp) = self.log_terms(epoch);
        let r = pulls as f64;
        (lh / (2.0 * r)).sqrt() + lp / (r * self.epsilon)
    }

    pub fn active_arms(&self) -> &[usize] {
        &self.active
    }

    pub fn epoch(&self) -> u32 {
        self.epoch
    }

    pub fn pulls_per_arm(&self) -> u64 {
        self.pulls_per_arm
    }

    /// `(epoch, arm)` for every elimination so far.
    pub fn eliminations(&self) -> &[(u32, usize)] {
        &self.eliminations
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    fn close_epoch(&mut self) -> Result<()> {
        let r = self.pulls_per_arm as f64;
        let scale = 1.0 / (r * self.epsilon);
        let mut noisy = Vec::with_capacity(self.active.len());
        for &j in &self.active {
            noisy.push(self.sums[j] / r + self.noise.sample(scale)?);
        }
        let leader = noisy[argmax(noisy.iter().copied())];
        let margin = 2.0 * self.confidence_radius(self.epoch, self.pulls_per_arm);
        let epoch = self.epoch;
        let mut kept = Vec::with_capacity(self.active.len());
        for (&j, &m) in self.active.iter().zip(&noisy) {
            if leader - m > margin {
                self.eliminations.push((epoch, j));
            } else {
                kept.push(j);
            }
        }
        self.active = kept;
        self.sums.iter_mut().for_each(|s| *s = 0.0);
        self.epoch += 1;
        self.epoch_pulls = 0;
        self.pulls_per_arm = self.epoch_length(self.epoch);
        Ok(())
    }
}

impl Policy for DpSe {
    fn name(&self) -> &'static str {
        "DP-SE"
    }

    fn feedback_kind(&self) -> FeedbackKind {
        FeedbackKind::Bandit
    }

    fn select(&mut self, _t: u64) -> Decision {
        let n = self.active.len() as u64;
        Decision::Arm(self.active[(self.epoch_pulls % n) as usize])
    }

    fn observe(&mut self, _t: u64, feedback: Feedback<'_>) -> Result<()> {
        let (arm, x) = bandit_feedback(feedback, self.arms)?;
        if self.active.len() == 1 {
            return Ok(());
        }
        self.sums[arm] += x;
        self.epoch_pulls += 1;
        if self.epoch_pulls == self.pulls_per_arm * self.active.len() as u64 {
            self.close_epoch()?;
        }
        Ok(())
    }
}
