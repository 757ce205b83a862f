//! Learnable operator policy.
//!
//! The policy maps an explicit search state (accumulator, position, local
//! bit window, next-constraint summary) to a distribution over `{XOR, NOP}`.
//! Everything numeric is self-contained: dense f64 layers, hand-written
//! reverse-mode gradients, and a decoupled-weight-decay Adam optimizer.

mod adamw;
mod infer;
mod io;
mod net;
mod train;

pub use adamw::{AdamW, OptimizerConfig};
pub use infer::{infer, InferMode};
pub use io::{load_params, params_from_bytes, params_to_bytes, save_params};
pub use net::{
    loss_and_grad, policy_forward, NetError, PolicyParams, EMBED_DIM, HIDDEN_DIM, OUT_DIM,
};
pub use train::{solver_teacher, train, Teacher, TrainConfig, TrainReport};

use crate::model::{Bit, Instance, Op};

/// Width of the bit window fed to the network.
pub const WINDOW: usize = 6;

/// Total feature count; see [`FEATURE_LAYOUT`] for the component order.
pub const FEATURE_DIM: usize = 9 + WINDOW;

/// Names of the feature components, in vector order. Recorded in saved
/// models so reported results always carry the exact input layout.
pub const FEATURE_LAYOUT: [&str; FEATURE_DIM] = [
    "acc",
    "pos_frac",
    "window0",
    "window1",
    "window2",
    "window3",
    "window4",
    "window5",
    "has_next_checkpoint",
    "next_dist_frac",
    "next_required",
    "needed_parity",
    "ones_to_next_capped",
    "target",
    "acc_xor_target",
];

/// Explicit rollout state: the accumulator after `pos` operations plus a
/// view of the instance being solved.
#[derive(Debug, Clone, Copy)]
pub struct OperatorState<'a> {
    pub instance: &'a Instance,
    pub acc: Bit,
    pub pos: usize,
}

impl<'a> OperatorState<'a> {
    pub fn initial(instance: &'a Instance) -> Self {
        OperatorState {
            instance,
            acc: Bit::ZERO,
            pos: 0,
        }
    }

    pub fn is_done(&self) -> bool {
        self.pos >= self.instance.n()
    }

    /// Apply one operation: XOR folds in the next bit, NOP advances only.
    pub fn apply(&self, op: Op) -> OperatorState<'a> {
        debug_assert!(!self.is_done());
        let acc = match op {
            Op::Xor => self.acc ^ self.instance.bits[self.pos],
            Op::Nop => self.acc,
        };
        OperatorState {
            instance: self.instance,
            acc,
            pos: self.pos + 1,
        }
    }
}

/// Encode a state as the fixed-width feature vector.
///
/// The "next constraint" block describes the first checkpoint strictly past
/// `pos`; when none remains it describes the end-of-sequence target instead
/// (position `n`, required value `target`), with `has_next_checkpoint = 0`
/// distinguishing the two. The 1-bit count is capped at 8 and scaled so
/// every component stays in `[0, 1]`.
pub fn featurize(state: &OperatorState<'_>) -> [f64; FEATURE_DIM] {
    let inst = state.instance;
    let n = inst.n();
    let pos = state.pos;
    let mut f = [0.0; FEATURE_DIM];
    f[0] = state.acc.as_f64();
    f[1] = pos as f64 / n as f64;
    for w in 0..WINDOW {
        let idx = pos + w; // 0-based index of 1-based position pos+1+w
        if idx < n {
            f[2 + w] = inst.bits[idx].as_f64();
        }
    }
    let next = inst.checkpoints.partition_point(|c| c.position <= pos);
    let (has_next, next_pos, next_required) = match inst.checkpoints.get(next) {
        Some(c) => (1.0, c.position, c.required),
        None => (0.0, n, inst.target),
    };
    f[8] = has_next;
    f[9] = (next_pos - pos) as f64 / n as f64;
    f[10] = next_required.as_f64();
    f[11] = (state.acc ^ next_required).as_f64();
    let mut ones = 0usize;
    for idx in pos..next_pos {
        if inst.bits[idx].is_one() {
            ones += 1;
            if ones == 8 {
                break;
            }
        }
    }
    f[12] = ones as f64 / 8.0;
    f[13] = inst.target.as_f64();
    f[14] = (state.acc ^ inst.target).as_f64();
    f
}
