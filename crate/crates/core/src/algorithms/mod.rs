//! The learners, all behind [`Policy`].
//!
//! A policy is driven round by round: [`Policy::select`] returns the decision
//! for round `t` (rounds start at 1), then [`Policy::observe`] delivers the
//! feedback for that round. Bandit policies only ever see the reward of the
//! arm they pulled; full-information policies see the whole vector.
//!
//! Every argmax breaks ties toward the lowest arm index.

mod alucb;
mod dpse;
mod ftnl;
mod hybrid;
mod ucb1;

pub use alucb::{alucb_index, AnytimeLazyUcb, ArmLedger};
pub use dpse::{DpSe, DpseParams};
pub use ftnl::{rnm, Ftnl, FtnlState};
pub use hybrid::{hybrid_index, HybridLedger, HybridUcb};
pub use ucb1::Ucb1;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::env::Decision;
use crate::noise::NoiseFactory;
use crate::{Error, Result};

/// What a policy gets told after each round.
#[derive(Debug, Clone, Copy)]
pub enum Feedback<'a> {
    Bandit { arm: usize, reward: f64 },
    Full(&'a [f64]),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FeedbackKind {
    Bandit,
    Full,
}

pub trait Policy: Send {
    fn name(&self) -> &'static str;
    fn feedback_kind(&self) -> FeedbackKind;
    fn select(&mut self, t: u64) -> Decision;
    fn observe(&mut self, t: u64, feedback: Feedback<'_>) -> Result<()>;
}

/// The algorithms the harness knows how to build.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Algorithm {
    #[serde(rename = "alucb")]
    AnytimeLazyUcb,
    #[serde(rename = "hybrid")]
    HybridUcb,
    #[serde(rename = "ftnl")]
    Ftnl,
    #[serde(rename = "ucb1")]
    Ucb1,
    #[serde(rename = "dpse")]
    DpSe,
}

impl Algorithm {
    pub const ALL: [Algorithm; 5] = [
        Algorithm::AnytimeLazyUcb,
        Algorithm::HybridUcb,
        Algorithm::Ftnl,
        Algorithm::Ucb1,
        Algorithm::DpSe,
    ];

    /// Short identifier used on the command line and in files.
    pub fn id(self) -> &'static str {
        match self {
            Algorithm::AnytimeLazyUcb => "alucb",
            Algorithm::HybridUcb => "hybrid",
            Algorithm::Ftnl => "ftnl",
            Algorithm::Ucb1 => "ucb1",
            Algorithm::DpSe => "dpse",
        }
    }

    pub fn display_name(self) -> &'static str {
        match self {
            Algorithm::AnytimeLazyUcb => "Anytime-Lazy-UCB",
            Algorithm::HybridUcb => "Hybrid-UCB",
            Algorithm::Ftnl => "FTNL",
            Algorithm::Ucb1 => "UCB1",
            Algorithm::DpSe => "DP-SE",
        }
    }

    /// Stable tag mixed into per-cell seeds.
    pub fn seed_tag(self) -> u64 {
        match self {
            Algorithm::AnytimeLazyUcb => 1,
            Algorithm::HybridUcb => 2,
            Algorithm::Ftnl => 3,
            Algorithm::Ucb1 => 4,
            Algorithm::DpSe => 5,
        }
    }

    pub fn needs_horizon(self) -> bool {
        matches!(self, Algorithm::DpSe)
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|a| {
            a.id().eq_ignore_ascii_case(name) || a.display_name().eq_ignore_ascii_case(name)
        })
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::from_name(s.trim()).ok_or_else(|| {
            Error::Config(format!(
                "unknown algorithm '{s}' (expected one of alucb, hybrid, ftnl, ucb1, dpse)"
            ))
        })
    }
}

/// Everything needed to build a policy for one run.
#[derive(Debug, Clone, Copy)]
pub struct PolicyConfig {
    pub arms: usize,
    pub epsilon: f64,
    /// Known horizon, if the run discloses it.
    pub horizon: Option<u64>,
    pub noise: NoiseFactory,
    pub dpse: DpseParams,
}

pub fn build_policy(algorithm: Algorithm, cfg: &PolicyConfig) -> Result<Box<dyn Policy>> {
    Ok(match algorithm {
        Algorithm::AnytimeLazyUcb => {
            Box::new(AnytimeLazyUcb::new(cfg.arms, cfg.epsilon, cfg.noise)?)
        }
        Algorithm::HybridUcb => Box::new(HybridUcb::new(cfg.arms, cfg.epsilon, cfg.noise)?),
        Algorithm::Ftnl => Box::new(Ftnl::new(cfg.arms, cfg.epsilon, cfg.noise)?),
        Algorithm::Ucb1 => Box::new(Ucb1::new(cfg.arms)?),
        Algorithm::DpSe => {
            let horizon = cfg.horizon.ok_or_else(|| {
                Error::Config("DP-SE needs a known horizon; pass --horizon".into())
            })?;
            Box::new(DpSe::new(
                cfg.arms,
                cfg.epsilon,
                horizon,
                cfg.dpse,
                cfg.noise,
            )?)
        }
    })
}

/// Index of the first maximum.
pub fn argmax<I: IntoIterator<Item = f64>>(values: I) -> usize {
    let mut best = 0;
    let mut best_value = f64::NEG_INFINITY;
    for (j, v) in values.into_iter().enumerate() {
        if v > best_value {
            best = j;
            best_value = v;
        }
    }
    best
}

pub(crate) fn check_epsilon(epsilon: f64) -> Result<()> {
    if epsilon > 0.0 && epsilon.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "epsilon must be positive and finite, got {epsilon}"
        )))
    }
}

pub(crate) fn check_arms(arms: usize) -> Result<()> {
    if arms == 0 {
        Err(Error::InvalidParameter("need at least one arm".into()))
    } else {
        Ok(())
    }
}

/// Rewards outside [0, 1] break the sensitivity-1 calibration; clamp them.
pub(crate) fn clamp_reward(x: f64) -> f64 {
    if (0.0..=1.0).contains(&x) {
        x
    } else {
        log::warn!("reward {x} outside [0, 1], clamping");
        if x.is_nan() {
            0.0
        } else {
            x.clamp(0.0, 1.0)
        }
    }
}

pub(crate) fn bandit_feedback(feedback: Feedback<'_>, arms: usize) -> Result<(usize, f64)> {
    match feedback {
        Feedback::Bandit { arm, reward } if arm < arms => Ok((arm, clamp_reward(reward))),
        Feedback::Bandit { arm, .. } => Err(Error::InvalidInput(format!(
            "feedback for unknown arm {arm}"
        ))),
        Feedback::Full(_) => Err(Error::InvalidInput(
            "bandit policy was handed a full reward vector".into(),
        )),
    }
}
