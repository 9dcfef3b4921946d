//! Follow-the-Noisy-Leader for the full-information game.
//!
//! Epoch `s` lasts `2^s` rounds and plays a single action throughout. At the
//! end of an epoch, Report Noisy Max over that epoch's reward vectors only
//! picks the action for the next epoch; the accumulator is then cleared.

use super::{argmax, check_arms, check_epsilon, clamp_reward, Feedback, FeedbackKind, Policy};
use crate::env::Decision;
use crate::noise::{purpose, LaplaceNoise, NoiseFactory};
use crate::{Error, Result};

/// Report Noisy Max: the arm maximising
/// `epoch_sums[j] / epoch_len + Lap(1/eps) / epoch_len`.
pub fn rnm(
    epoch_sums: &[f64],
    epoch_len: u64,
    epsilon: f64,
    noise: &mut LaplaceNoise,
) -> Result<usize> {
    check_epsilon(epsilon)?;
    if epoch_sums.is_empty() {
        return Err(Error::InvalidParameter(
            "report noisy max over no arms".into(),
        ));
    }
    if epoch_len == 0 {
        return Err(Error::InvalidParameter(
            "epoch length must be positive".into(),
        ));
    }
    let len = epoch_len as f64;
    let mut noisy = Vec::with_capacity(epoch_sums.len());
    for &s in epoch_sums {
        noisy.push((s + noise.sample(1.0 / epsilon)?) / len);
    }
    Ok(argmax(noisy))
}

/// Epoch bookkeeping.
#[derive(Debug, Clone)]
pub struct FtnlState {
    epoch: u32,
    action: usize,
    epoch_sums: Vec<f64>,
    rounds_in_epoch: u64,
    epsilon: f64,
}

impl FtnlState {
    pub fn epoch(&self) -> u32 {
        self.epoch
    }

    pub fn action(&self) -> usize {
        self.action
    }

    pub fn epoch_len(&self) -> u64 {
        1u64 << self.epoch
    }

    pub fn epoch_sums(&self) -> &[f64] {
        &self.epoch_sums
    }

    pub fn rounds_in_epoch(&self) -> u64 {
        self.rounds_in_epoch
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }
}

#[derive(Debug, Clone)]
pub struct Ftnl {
    state: FtnlState,
    noise: LaplaceNoise,
    /// Inputs handed to each report-noisy-max call, kept when tracing.
    selections: Option<Vec<(u64, Vec<f64>)>>,
}

impl Ftnl {
    pub fn new(arms: usize, epsilon: f64, noise: NoiseFactory) -> Result<Self> {
        check_arms(arms)?;
        check_epsilon(epsilon)?;
        Ok(Self {
            state: FtnlState {
                epoch: 0,
                action: 0,
                epoch_sums: vec![0.0; arms],
                rounds_in_epoch: 0,
                epsilon,
            },
            noise: noise.source(0, purpose::SELECTION_NOISE),
            selections: None,
        })
    }

    pub fn state(&self) -> &FtnlState {
        &self.state
    }

    /// Record `(epoch_len, sums)` for every selection from now on.
    pub fn trace_selections(&mut self) {
        self.selections = Some(Vec::new());
    }

    pub fn selections(&self) -> &[(u64, Vec<f64>)] {
        self.selections.as_deref().unwrap_or(&[])
    }
}

impl Policy for Ftnl {
    fn name(&self) -> &'static str {
        "FTNL"
    }

    fn feedback_kind(&self) -> FeedbackKind {
        FeedbackKind::Full
    }

    fn select(&mut self, _t: u64) -> Decision {
        Decision::Arm(self.state.action)
    }

    fn observe(&mut self, _t: u64, feedback: Feedback<'_>) -> Result<()> {
        let Feedback::Full(x) = feedback else {
            return Err(Error::InvalidInput(
                "FTNL needs the full reward vector".into(),
            ));
        };
        let s = &mut self.state;
        if x.len() != s.epoch_sums.len() {
            return Err(Error::InvalidInput(format!(
                "reward vector has {} entries for {} arms",
                x.len(),
                s.epoch_sums.len()
            )));
        }
        for (acc, &v) in s.epoch_sums.iter_mut().zip(x) {
            *acc += clamp_reward(v);
        }
        s.rounds_in_epoch += 1;
        let len = 1u64 << s.epoch;
        if s.rounds_in_epoch == len {
            if let Some(log) = &mut self.selections {
                log.push((len, s.epoch_sums.clone()));
            }
            s.action = rnm(&s.epoch_sums, len, s.epsilon, &mut self.noise)?;
            s.epoch_sums.iter_mut().for_each(|v| *v = 0.0);
            s.rounds_in_epoch = 0;
            s.epoch += 1;
        }
        Ok(())
    }
}
