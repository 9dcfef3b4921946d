//! Regret experiments: one simulated run per (algorithm, epsilon,
//! repetition) cell, checkpointed cumulative pseudo-regret, and aggregation
//! across repetitions.
//!
//! Every cell derives its seed from `(master seed, algorithm, epsilon index,
//! repetition)`, so results do not depend on scheduling, worker count, or
//! which other cells are in the grid.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::algorithms::{
    build_policy, Algorithm, DpseParams, Feedback, FeedbackKind, Policy, PolicyConfig,
};
use crate::env::{pseudo_regret_increment, Decision, Environment, EnvironmentSpec, RewardSource};
use crate::noise::{derive_id, NoiseFactory, NoiseMode};
use crate::{Error, Result};

/// Horizon of the standard experiment grid, `2 * 2^21`.
pub const DEFAULT_HORIZON: u64 = 2 << 21;
pub const DEFAULT_REPETITIONS: u32 = 15;
pub const DEFAULT_EPSILONS: [f64; 7] = [0.1, 0.25, 0.5, 1.0, 8.0, 64.0, 128.0];

/// Powers of two up to `horizon`, then `horizon` itself.
pub fn pow2_checkpoints(horizon: u64) -> Vec<u64> {
    let mut out: Vec<u64> = (0..64)
        .map(|i| 1u64 << i)
        .take_while(|&t| t <= horizon)
        .collect();
    if out.last() != Some(&horizon) {
        out.push(horizon);
    }
    out
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub environment: EnvironmentSpec,
    pub algorithms: Vec<Algorithm>,
    pub epsilons: Vec<f64>,
    /// Rounds simulated per run.
    pub horizon: u64,
    /// Whether policies are told the horizon. Anytime-only configs hide it.
    pub horizon_known: bool,
    pub repetitions: u32,
    pub seed: u64,
    pub checkpoints: Vec<u64>,
    #[serde(default)]
    pub noise_mode: NoiseMode,
    #[serde(default)]
    pub dpse: DpseParams,
}

impl ExperimentConfig {
    /// The standard grid for the given means: the three bandit algorithms, the
    /// full epsilon grid, `T = 2 * 2^21`, 15 repetitions.
    pub fn standard(environment: EnvironmentSpec) -> Self {
        Self {
            environment,
            algorithms: vec![
                Algorithm::AnytimeLazyUcb,
                Algorithm::HybridUcb,
                Algorithm::DpSe,
            ],
            epsilons: DEFAULT_EPSILONS.to_vec(),
            horizon: DEFAULT_HORIZON,
            horizon_known: true,
            repetitions: DEFAULT_REPETITIONS,
            seed: 0,
            checkpoints: pow2_checkpoints(DEFAULT_HORIZON),
            noise_mode: NoiseMode::Live,
            dpse: DpseParams::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let k = self.environment.arms() as u64;
        if self.horizon < k {
            return Err(Error::Config(format!(
                "horizon {} is shorter than the {k} initialization rounds",
                self.horizon
            )));
        }
        if self.repetitions == 0 {
            return Err(Error::Config("need at least one repetition".into()));
        }
        if self.algorithms.is_empty() {
            return Err(Error::Config("no algorithms selected".into()));
        }
        if self.epsilons.is_empty() {
            return Err(Error::Config("empty epsilon grid".into()));
        }
        if let Some(e) = self.epsilons.iter().find(|e| !(**e > 0.0 && e.is_finite())) {
            return Err(Error::Config(format!(
                "epsilon must be positive and finite, got {e}"
            )));
        }
        if self.checkpoints.is_empty()
            || self.checkpoints[0] == 0
            || self.checkpoints.windows(2).any(|w| w[0] >= w[1])
            || *self.checkpoints.last().unwrap() != self.horizon
        {
            return Err(Error::Config(
                "checkpoints must be strictly increasing, start at 1 or later, and end at the horizon".into(),
            ));
        }
        if !self.horizon_known {
            if let Some(a) = self.algorithms.iter().find(|a| a.needs_horizon()) {
                return Err(Error::Config(format!(
                    "{} needs a known horizon but this configuration is anytime-only",
                    a.display_name()
                )));
            }
        }
        Ok(())
    }

    pub fn cells(&self) -> Vec<Cell> {
        let mut out = Vec::new();
        for &algorithm in &self.algorithms {
            for (eps_index, &epsilon) in self.epsilons.iter().enumerate() {
                for repetition in 0..self.repetitions {
                    out.push(Cell {
                        algorithm,
                        eps_index,
                        epsilon,
                        repetition,
                    });
                }
            }
        }
        out
    }
}

/// One run of the grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cell {
    pub algorithm: Algorithm,
    pub eps_index: usize,
    pub epsilon: f64,
    pub repetition: u32,
}

impl Cell {
    pub fn seed(&self, master: u64) -> u64 {
        derive_id(&[
            master,
            self.algorithm.seed_tag(),
            self.eps_index as u64,
            self.repetition as u64,
        ])
    }
}

/// Checkpointed cumulative pseudo-regret of one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegretTrace {
    pub run_id: u32,
    pub algorithm: String,
    pub epsilon: f64,
    pub checkpoints: Vec<(u64, f64)>,
}

impl RegretTrace {
    pub fn final_regret(&self) -> f64 {
        self.checkpoints.last().map_or(0.0, |c| c.1)
    }
}

/// Drives `policy` against `source` for `horizon` rounds and records the
/// cumulative pseudo-regret at each checkpoint. Bandit policies are handed
/// only the reward of the arm they pulled.
pub fn simulate(
    policy: &mut dyn Policy,
    source: &mut dyn RewardSource,
    spec: &EnvironmentSpec,
    horizon: u64,
    checkpoints: &[u64],
) -> Result<Vec<(u64, f64)>> {
    simulate_with(policy, source, spec, horizon, checkpoints, |_, _, _| {})
}

/// As [`simulate`], calling `inspect(t, decision, policy)` after the
/// feedback of every round is delivered.
pub fn simulate_with(
    policy: &mut dyn Policy,
    source: &mut dyn RewardSource,
    spec: &EnvironmentSpec,
    horizon: u64,
    checkpoints: &[u64],
    mut inspect: impl FnMut(u64, &Decision, &dyn Policy),
) -> Result<Vec<(u64, f64)>> {
    if source.arms() != spec.arms() {
        return Err(Error::InvalidInput(
            "reward source and spec disagree on arm count".into(),
        ));
    }
    let gaps = spec.gaps();
    let kind = policy.feedback_kind();
    let mut rewards = vec![0.0; spec.arms()];
    let mut regret = 0.0;
    let mut out = Vec::with_capacity(checkpoints.len());
    let mut next = checkpoints.iter().copied().peekable();
    while next.peek() == Some(&0) {
        out.push((0, 0.0));
        next.next();
    }
    for t in 1..=horizon {
        source.fill_round(&mut rewards);
        let decision = policy.select(t);
        regret += match &decision {
            Decision::Arm(j) => *gaps.get(*j).ok_or_else(|| {
                Error::Logic(format!("{} chose arm {j} of {}", policy.name(), gaps.len()))
            })?,
            weights => pseudo_regret_increment(spec, weights)?,
        };
        let feedback = match (kind, &decision) {
            (FeedbackKind::Full, _) => Feedback::Full(&rewards),
            (FeedbackKind::Bandit, Decision::Arm(j)) => Feedback::Bandit {
                arm: *j,
                reward: rewards[*j],
            },
            (FeedbackKind::Bandit, Decision::Weights(_)) => {
                return Err(Error::Logic("bandit policy played a weight vector".into()))
            }
        };
        policy.observe(t, feedback)?;
        inspect(t, &decision, policy);
        while next.peek() == Some(&t) {
            out.push((t, regret));
            next.next();
        }
    }
    Ok(out)
}

/// Runs one cell of the grid.
pub fn run_single(config: &ExperimentConfig, cell: &Cell) -> Result<RegretTrace> {
    let seed = cell.seed(config.seed);
    let policy_cfg = PolicyConfig {
        arms: config.environment.arms(),
        epsilon: cell.epsilon,
        horizon: config.horizon_known.then_some(config.horizon),
        noise: NoiseFactory::new(derive_id(&[seed, 1]), config.noise_mode),
        dpse: config.dpse,
    };
    let mut policy = build_policy(cell.algorithm, &policy_cfg)?;
    let mut env = Environment::new(config.environment.clone(), seed, 0);
    let checkpoints = simulate(
        policy.as_mut(),
        &mut env,
        &config.environment,
        config.horizon,
        &config.checkpoints,
    )?;
    Ok(RegretTrace {
        run_id: cell.repetition,
        algorithm: cell.algorithm.id().to_string(),
        epsilon: cell.epsilon,
        checkpoints,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CheckpointStats {
    pub t: u64,
    pub mean: f64,
    /// Sample standard deviation (divisor `n - 1`); 0 for a single run.
    pub sd: f64,
    pub min: f64,
    pub max: f64,
}

/// Statistics of one (algorithm, epsilon) group.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub algorithm: String,
    pub epsilon: f64,
    pub runs: usize,
    pub checkpoints: Vec<CheckpointStats>,
}

impl SummaryRow {
    pub fn final_stats(&self) -> &CheckpointStats {
        self.checkpoints
            .last()
            .expect("summary rows are never empty")
    }

    pub fn at(&self, t: u64) -> Option<&CheckpointStats> {
        self.checkpoints.iter().find(|c| c.t == t)
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Summary {
    pub rows: Vec<SummaryRow>,
}

impl Summary {
    pub fn get(&self, algorithm: &str, epsilon: f64) -> Option<&SummaryRow> {
        self.rows
            .iter()
            .find(|r| r.algorithm == algorithm && r.epsilon == epsilon)
    }

    pub fn final_mean(&self, algorithm: &str, epsilon: f64) -> Option<f64> {
        self.get(algorithm, epsilon).map(|r| r.final_stats().mean)
    }

    /// Rows for one epsilon.
    pub fn for_epsilon(&self, epsilon: f64) -> Summary {
        Summary {
            rows: self
                .rows
                .iter()
                .filter(|r| r.epsilon == epsilon)
                .cloned()
                .collect(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }
}

/// Per-checkpoint mean, sd, min and max across runs, grouped by
/// (algorithm, epsilon) in order of first appearance.
pub fn aggregate(traces: &[RegretTrace]) -> Result<Summary> {
    let first = traces
        .first()
        .ok_or_else(|| Error::InvalidInput("no traces to aggregate".into()))?;
    let schedule: Vec<u64> = first.checkpoints.iter().map(|c| c.0).collect();
    if schedule.is_empty() {
        return Err(Error::InvalidInput("trace without checkpoints".into()));
    }
    let mut order: Vec<(String, u64)> = Vec::new();
    let mut groups: BTreeMap<(String, u64), Vec<&RegretTrace>> = BTreeMap::new();
    for trace in traces {
        if trace.checkpoints.len() != schedule.len()
            || trace
                .checkpoints
                .iter()
                .zip(&schedule)
                .any(|(c, &t)| c.0 != t)
        {
            return Err(Error::InvalidInput(format!(
                "trace {} of {} has a different checkpoint schedule",
                trace.run_id, trace.algorithm
            )));
        }
        let key = (trace.algorithm.clone(), trace.epsilon.to_bits());
        let group = groups.entry(key.clone()).or_default();
        if group.is_empty() {
            order.push(key);
        }
        group.push(trace);
    }

    let rows = order
        .into_iter()
        .map(|key| {
            let members = &groups[&key];
            let n = members.len() as f64;
            let checkpoints = schedule
                .iter()
                .enumerate()
                .map(|(i, &t)| {
                    let values = members.iter().map(|tr| tr.checkpoints[i].1);
                    let mean = values.clone().sum::<f64>() / n;
                    let sd = if members.len() > 1 {
                        (values.clone().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
                    } else {
                        0.0
                    };
                    let min = values.clone().fold(f64::INFINITY, f64::min);
                    let max = values.fold(f64::NEG_INFINITY, f64::max);
                    CheckpointStats {
                        t,
                        mean: mean.clamp(min, max),
                        sd,
                        min,
                        max,
                    }
                })
                .collect();
            SummaryRow {
                algorithm: key.0,
                epsilon: f64::from_bits(key.1),
                runs: members.len(),
                checkpoints,
            }
        })
        .collect();
    Ok(Summary { rows })
}

#[derive(Debug, Clone)]
pub struct MatrixOutput {
    pub summary: Summary,
    /// In grid order: algorithm, then epsilon, then repetition.
    pub traces: Vec<RegretTrace>,
}

/// Runs every cell of the grid on `workers` threads.
pub fn run_matrix(config: &ExperimentConfig, workers: usize) -> Result<MatrixOutput> {
    config.validate()?;
    let cells = config.cells();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?;
    let results: Vec<Result<RegretTrace>> = pool.install(|| {
        cells
            .par_iter()
            .map(|cell| {
                run_single(config, cell).map_err(|e| Error::Cell {
                    algorithm: cell.algorithm.id().to_string(),
                    epsilon: cell.epsilon,
                    repetition: cell.repetition,
                    source: Box::new(e),
                })
            })
            .collect()
    });
    let traces = results.into_iter().collect::<Result<Vec<_>>>()?;
    let summary = aggregate(&traces)?;
    Ok(MatrixOutput { summary, traces })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_config() -> ExperimentConfig {
        let mut c = ExperimentConfig::standard(
            EnvironmentSpec::new(vec![0.75, 0.70, 0.70, 0.70, 0.70]).unwrap(),
        );
        c.horizon = 2000;
        c.checkpoints = pow2_checkpoints(2000);
        c.repetitions = 3;
        c.epsilons = vec![0.5, 8.0];
        c.algorithms = vec![Algorithm::AnytimeLazyUcb, Algorithm::DpSe];
        c
    }

    fn trace(regrets: &[(u64, f64)]) -> RegretTrace {
        RegretTrace {
            run_id: 0,
            algorithm: "alucb".into(),
            epsilon: 1.0,
            checkpoints: regrets.to_vec(),
        }
    }

    #[test]
    fn checkpoints_schedule() {
        assert_eq!(pow2_checkpoints(10), vec![1, 2, 4, 8, 10]);
        assert_eq!(pow2_checkpoints(8), vec![1, 2, 4, 8]);
        assert_eq!(*pow2_checkpoints(DEFAULT_HORIZON).last().unwrap(), 1 << 22);
    }

    #[test]
    fn init_only_run_pays_every_gap() {
        let spec = EnvironmentSpec::new(vec![0.75, 0.625, 0.5, 0.375, 0.25]).unwrap();
        let mut c = ExperimentConfig::standard(spec);
        c.horizon = 5;
        c.checkpoints = vec![5];
        for algorithm in [
            Algorithm::AnytimeLazyUcb,
            Algorithm::HybridUcb,
            Algorithm::Ucb1,
        ] {
            let cell = Cell {
                algorithm,
                eps_index: 0,
                epsilon: 1.0,
                repetition: 0,
            };
            let tr = run_single(&c, &cell).unwrap();
            assert!((tr.final_regret() - 1.25).abs() < 1e-12);
        }
    }

    #[test]
    fn run_single_is_deterministic() {
        let c = small_config();
        let cell = c.cells()[4];
        assert_eq!(
            run_single(&c, &cell).unwrap(),
            run_single(&c, &cell).unwrap()
        );
    }

    #[test]
    fn traces_are_monotone() {
        let out = run_matrix(&small_config(), 2).unwrap();
        assert_eq!(out.traces.len(), 12);
        for tr in &out.traces {
            assert!(tr.checkpoints[0].1 >= 0.0);
            assert!(tr.checkpoints.windows(2).all(|w| w[0].1 <= w[1].1));
        }
    }

    #[test]
    fn adding_algorithms_keeps_other_cells() {
        let base = small_config();
        let mut wider = base.clone();
        wider.algorithms.insert(0, Algorithm::HybridUcb);
        let a = run_matrix(&base, 1).unwrap();
        let b = run_matrix(&wider, 1).unwrap();
        assert_eq!(a.traces[..], b.traces[6..]);
    }

    #[test]
    fn anytime_config_rejects_dpse() {
        let mut c = small_config();
        c.horizon_known = false;
        let err = run_matrix(&c, 1).unwrap_err();
        assert!(err.is_config(), "{err}");
        c.algorithms = vec![Algorithm::AnytimeLazyUcb];
        assert!(run_matrix(&c, 1).is_ok());
    }

    #[test]
    fn validation() {
        let mut c = small_config();
        c.checkpoints = vec![4, 2, 2000];
        assert!(c.validate().is_err());
        let mut c = small_config();
        c.checkpoints = vec![1, 1000];
        assert!(c.validate().is_err());
        let mut c = small_config();
        c.epsilons = vec![0.0];
        assert!(c.validate().is_err());
        let mut c = small_config();
        c.horizon = 3;
        c.checkpoints = vec![3];
        assert!(c.validate().is_err());
    }

    #[test]
    fn aggregate_two_runs() {
        let s = aggregate(&[trace(&[(1, 0.0), (8, 10.0)]), trace(&[(1, 0.0), (8, 20.0)])]).unwrap();
        let last = s.rows[0].final_stats();
        assert_eq!(last.mean, 15.0);
        assert!((last.sd - 50f64.sqrt()).abs() < 1e-12);
        assert_eq!((last.min, last.max), (10.0, 20.0));
    }

    #[test]
    fn aggregate_single_and_errors() {
        let one = aggregate(&[trace(&[(1, 0.5), (2, 0.7)])]).unwrap();
        assert_eq!(one.rows[0].checkpoints[1].mean, 0.7);
        assert_eq!(one.rows[0].checkpoints[1].sd, 0.0);
        assert!(aggregate(&[]).is_err());
        assert!(aggregate(&[trace(&[(1, 0.0)]), trace(&[(2, 0.0)])]).is_err());
    }
}
