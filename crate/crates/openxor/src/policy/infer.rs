//! Policy rollout inference.

use super::net::{policy_forward, PolicyParams};
use super::{featurize, OperatorState};
use crate::model::{verify, Instance, Op};
use crate::rng::Xoshiro256;
use crate::solvers::{SolveOutcome, Status};
use std::time::Instant;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InferMode {
    /// Deterministic argmax; ties choose NOP.
    Greedy,
    /// Sample each operation from the policy; retry whole rollouts up to
    /// `retries` extra times when one fails.
    Sample { seed: u64, retries: usize },
}

/// Roll the policy over one instance.
///
/// The full-length sequence is always produced so completion and
/// checkpoint metrics stay well defined; a violated checkpoint marks the
/// attempt failed (recorded in `first_violation`) rather than truncating
/// the output. `nodes_explored` counts policy evaluations.
pub fn infer(params: &PolicyParams, instance: &Instance, mode: InferMode) -> SolveOutcome {
    let started = Instant::now();
    let attempts = match mode {
        InferMode::Greedy => 1,
        InferMode::Sample { retries, .. } => retries + 1,
    };
    let mut rng = match mode {
        InferMode::Greedy => None,
        InferMode::Sample { seed, .. } => Some(Xoshiro256::new(seed)),
    };
    let mut nodes = 0u64;
    let mut last: Option<(Vec<Op>, Option<usize>, bool)> = None;

    for _ in 0..attempts {
        let (ops, violation) = rollout(params, instance, rng.as_mut());
        nodes += instance.n() as u64;
        let report = verify(instance, &ops).expect("rollout has length n");
        let exact = report.exact;
        last = Some((ops, violation, exact));
        if exact {
            break;
        }
    }

    let (ops, violation, exact) = last.expect("at least one attempt runs");
    let status = if exact {
        Status::Solved
    } else {
        Status::Exhausted
    };
    let mut outcome = SolveOutcome {
        status,
        ops: Some(ops),
        nodes_explored: nodes.max(1),
        wall_time: started.elapsed().as_secs_f64(),
        first_violation: None,
    };
    outcome.first_violation = violation;
    outcome
}

fn rollout(
    params: &PolicyParams,
    instance: &Instance,
    mut rng: Option<&mut Xoshiro256>,
) -> (Vec<Op>, Option<usize>) {
    let n = instance.n();
    let mut state = OperatorState::initial(instance);
    let mut ops = Vec::with_capacity(n);
    let mut first_violation = None;
    while !state.is_done() {
        let x = featurize(&state);
        let (p_xor, p_nop) = policy_forward(params, &x)
            .expect("trained parameters stay finite on unit-interval features");
        let op = match rng.as_deref_mut() {
            None => {
                if p_xor > p_nop {
                    Op::Xor
                } else {
                    Op::Nop
                }
            }
            Some(r) => {
                if r.next_f64() < p_xor {
                    Op::Xor
                } else {
                    Op::Nop
                }
            }
        };
        state = state.apply(op);
        ops.push(op);
        if first_violation.is_none() {
            if let Some(required) = instance.checkpoint_at(state.pos) {
                if state.acc != required {
                    first_violation = Some(state.pos);
                }
            }
        }
    }
    (ops, first_violation)
}
