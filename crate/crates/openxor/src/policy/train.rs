//! Teacher-forced supervised training.
//!
//! The supervision targets are solver solutions, not the generator's random
//! witness sequences: a random witness's operations are a fair coin at
//! almost every step (only segment-final bits are forced), so imitating it
//! cannot beat chance. [`solver_teacher`] re-labels a dataset with the
//! segment solver's canonical solutions, whose operations are a
//! deterministic function of the policy's input features.

use super::adamw::{AdamW, OptimizerConfig};
use super::net::{loss_and_grad, NetError, PolicyParams};
use crate::model::Instance;
use crate::solvers::{solve_backtracking, solve_segments, Status};

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub epochs: usize,
    pub learning_rate: f64,
    pub weight_decay: f64,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 5,
            learning_rate: 1e-3,
            weight_decay: 0.01,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct TrainReport {
    /// Mean per-step cross-entropy (nats) for each epoch.
    pub epoch_losses: Vec<f64>,
    pub instances: usize,
    pub steps_per_epoch: usize,
}

/// Source of the supervision sequences.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Teacher {
    /// Segment solver: one XOR at the first 1-bit of every parity-flipping
    /// segment. Self-correcting under rollout, the default.
    Segments,
    /// Depth-first backtracking (NOP before XOR): the lexicographically
    /// smallest valid sequence, flipping segment-final 1-bits instead.
    Backtracking,
    /// Whatever `ground_truth` the dataset already carries (for generated
    /// datasets that is the random construction witness).
    Dataset,
}

/// Replace each instance's `ground_truth` with a solver solution to teach
/// from. Falls back to backtracking where the segment solver is incomplete;
/// errors only when the instance itself is unsolvable.
pub fn solver_teacher(instances: &mut [Instance], teacher: Teacher) -> Result<(), NetError> {
    if teacher == Teacher::Dataset {
        return Ok(());
    }
    for inst in instances.iter_mut() {
        let outcome = match teacher {
            Teacher::Segments => {
                let out = solve_segments(inst);
                if out.status == Status::Solved {
                    out
                } else {
                    solve_backtracking(inst, crate::solvers::DEFAULT_MAX_STEPS)
                }
            }
            Teacher::Backtracking => solve_backtracking(inst, crate::solvers::DEFAULT_MAX_STEPS),
            Teacher::Dataset => unreachable!(),
        };
        match (outcome.status, outcome.ops) {
            (Status::Solved, Some(ops)) => inst.ground_truth = Some(ops),
            _ => {
                return Err(NetError::MissingGroundTruth {
                    id: format!("{} (no solver solution found)", inst.id),
                })
            }
        }
    }
    Ok(())
}

/// Train a fresh policy on a dataset of ground-truth-labelled instances.
///
/// One optimizer update per instance, instances visited in dataset order,
/// so a fixed `(dataset, config)` pair reproduces the parameters bit for
/// bit. Errors carry the offending instance id.
pub fn train(
    instances: &[Instance],
    config: &TrainConfig,
) -> Result<(PolicyParams, TrainReport), NetError> {
    assert!(config.epochs >= 1, "epochs must be positive");
    assert!(config.learning_rate > 0.0, "learning rate must be positive");
    if instances.is_empty() {
        return Err(NetError::EmptyDataset);
    }
    for inst in instances {
        if inst.ground_truth.is_none() {
            return Err(NetError::MissingGroundTruth {
                id: inst.id.clone(),
            });
        }
    }
    let mut params = PolicyParams::init(config.seed);
    let mut opt = AdamW::new(params.data.len());
    let opt_config = OptimizerConfig {
        learning_rate: config.learning_rate,
        weight_decay: config.weight_decay,
        ..Default::default()
    };
    let total_steps: usize = instances.iter().map(|i| i.n()).sum();
    let mut epoch_losses = Vec::with_capacity(config.epochs);
    for _epoch in 0..config.epochs {
        let mut epoch_loss = 0.0;
        for inst in instances {
            let (loss, grad) = loss_and_grad(&params, inst).map_err(|e| match e {
                NetError::NonFinite { context } => NetError::NonFinite {
                    context: format!("{context} (instance {})", inst.id),
                },
                other => other,
            })?;
            opt.step(&mut params.data, &grad, &opt_config)?;
            epoch_loss += loss;
        }
        epoch_losses.push(epoch_loss / total_steps as f64);
    }
    Ok((
        params,
        TrainReport {
            epoch_losses,
            instances: instances.len(),
            steps_per_epoch: total_steps,
        },
    ))
}
