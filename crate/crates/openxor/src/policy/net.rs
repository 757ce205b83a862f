//! Policy network: embed -> tanh -> hidden -> tanh -> 2 logits -> softmax,
//! with hand-written reverse-mode gradients through the teacher-forced
//! unroll (parameters are shared across all steps of an instance).

use super::{featurize, OperatorState, FEATURE_DIM, FEATURE_LAYOUT};
use crate::model::{Instance, Op};
use crate::rng::Xoshiro256;
use thiserror::Error;

pub const EMBED_DIM: usize = 64;
pub const HIDDEN_DIM: usize = 128;
pub const OUT_DIM: usize = 2;

/// Logit/probability index per operation. XOR is slot 0, NOP slot 1.
pub fn op_index(op: Op) -> usize {
    match op {
        Op::Xor => 0,
        Op::Nop => 1,
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NetError {
    #[error("non-finite value produced in {context}")]
    NonFinite { context: String },
    #[error("instance {id} has no ground truth to teach from")]
    MissingGroundTruth { id: String },
    #[error("training dataset is empty")]
    EmptyDataset,
    #[error("feature dimension mismatch: params expect {expected}, got {found}")]
    FeatureDimMismatch { expected: usize, found: usize },
    #[error("model file: {reason}")]
    ModelFile { reason: String },
}

/// All weights, stored flat in the serialization order:
/// `W_embed (64xF) | b_embed | W_hidden (128x64) | b_hidden | W_out (2x128) | b_out`,
/// each weight matrix row-major with rows indexing output units.
#[derive(Debug, Clone, PartialEq)]
pub struct PolicyParams {
    pub data: Vec<f64>,
    pub feature_dim: usize,
    pub version: String,
    pub feature_layout: Vec<String>,
}

impl PolicyParams {
    pub fn param_count(feature_dim: usize) -> usize {
        EMBED_DIM * feature_dim
            + EMBED_DIM
            + HIDDEN_DIM * EMBED_DIM
            + HIDDEN_DIM
            + OUT_DIM * HIDDEN_DIM
            + OUT_DIM
    }

    pub fn zeros() -> Self {
        PolicyParams {
            data: vec![0.0; Self::param_count(FEATURE_DIM)],
            feature_dim: FEATURE_DIM,
            version: crate::MODEL_FORMAT_VERSION.to_string(),
            feature_layout: FEATURE_LAYOUT.iter().map(|s| s.to_string()).collect(),
        }
    }

    /// Seeded initialization: every weight and bias of a layer drawn uniform
    /// in `[-sqrt(1/fan_in), +sqrt(1/fan_in)]`, layers in serialization order.
    pub fn init(seed: u64) -> Self {
        let mut params = Self::zeros();
        let mut rng = Xoshiro256::new(seed);
        let spans = [
            (0, EMBED_DIM * FEATURE_DIM + EMBED_DIM, FEATURE_DIM),
            (
                EMBED_DIM * FEATURE_DIM + EMBED_DIM,
                HIDDEN_DIM * EMBED_DIM + HIDDEN_DIM,
                EMBED_DIM,
            ),
            (
                EMBED_DIM * FEATURE_DIM + EMBED_DIM + HIDDEN_DIM * EMBED_DIM + HIDDEN_DIM,
                OUT_DIM * HIDDEN_DIM + OUT_DIM,
                HIDDEN_DIM,
            ),
        ];
        for (start, len, fan_in) in spans {
            let bound = (1.0 / fan_in as f64).sqrt();
            for v in &mut params.data[start..start + len] {
                *v = (rng.next_f64() * 2.0 - 1.0) * bound;
            }
        }
        params
    }

    // flat offsets of each block
    fn o_we(&self) -> usize {
        0
    }
    fn o_be(&self) -> usize {
        EMBED_DIM * self.feature_dim
    }
    fn o_wh(&self) -> usize {
        self.o_be() + EMBED_DIM
    }
    fn o_bh(&self) -> usize {
        self.o_wh() + HIDDEN_DIM * EMBED_DIM
    }
    fn o_wo(&self) -> usize {
        self.o_bh() + HIDDEN_DIM
    }
    fn o_bo(&self) -> usize {
        self.o_wo() + OUT_DIM * HIDDEN_DIM
    }
}

/// Intermediate activations of one forward pass, kept for the backward pass.
struct Activations {
    x: [f64; FEATURE_DIM],
    h1: [f64; EMBED_DIM],
    h2: [f64; HIDDEN_DIM],
    probs: [f64; OUT_DIM],
}

fn forward_full(params: &PolicyParams, x: &[f64; FEATURE_DIM]) -> Result<Activations, NetError> {
    if params.feature_dim != FEATURE_DIM {
        return Err(NetError::FeatureDimMismatch {
            expected: params.feature_dim,
            found: FEATURE_DIM,
        });
    }
    let d = &params.data;
    let (o_we, o_be, o_wh, o_bh, o_wo, o_bo) = (
        params.o_we(),
        params.o_be(),
        params.o_wh(),
        params.o_bh(),
        params.o_wo(),
        params.o_bo(),
    );
    let mut h1 = [0.0; EMBED_DIM];
    for j in 0..EMBED_DIM {
        let row = o_we + j * FEATURE_DIM;
        let mut z = d[o_be + j];
        for i in 0..FEATURE_DIM {
            z += d[row + i] * x[i];
        }
        h1[j] = z.tanh();
    }
    let mut h2 = [0.0; HIDDEN_DIM];
    for k in 0..HIDDEN_DIM {
        let row = o_wh + k * EMBED_DIM;
        let mut z = d[o_bh + k];
        for j in 0..EMBED_DIM {
            z += d[row + j] * h1[j];
        }
        h2[k] = z.tanh();
    }
    let mut logits = [0.0; OUT_DIM];
    for c in 0..OUT_DIM {
        let row = o_wo + c * HIDDEN_DIM;
        let mut z = d[o_bo + c];
        for k in 0..HIDDEN_DIM {
            z += d[row + k] * h2[k];
        }
        logits[c] = z;
    }
    let m = logits[0].max(logits[1]);
    let e0 = (logits[0] - m).exp();
    let e1 = (logits[1] - m).exp();
    let sum = e0 + e1;
    let probs = [e0 / sum, e1 / sum];
    if !probs.iter().all(|p| p.is_finite()) {
        return Err(NetError::NonFinite {
            context: "softmax output".into(),
        });
    }
    Ok(Activations {
        x: *x,
        h1,
        h2,
        probs,
    })
}

/// Probability pair `(p_XOR, p_NOP)` for one state.
pub fn policy_forward(
    params: &PolicyParams,
    features: &[f64; FEATURE_DIM],
) -> Result<(f64, f64), NetError> {
    let acts = forward_full(params, features)?;
    Ok((acts.probs[0], acts.probs[1]))
}

/// Accumulate the backward pass for one step into `grad`, given the
/// softmax/cross-entropy logit gradient `dlogits`.
fn backward_step(
    params: &PolicyParams,
    acts: &Activations,
    dlogits: [f64; OUT_DIM],
    grad: &mut [f64],
) {
    let d = &params.data;
    let (o_we, o_be, o_wh, o_bh, o_wo, o_bo) = (
        params.o_we(),
        params.o_be(),
        params.o_wh(),
        params.o_bh(),
        params.o_wo(),
        params.o_bo(),
    );
    let mut dh2 = [0.0; HIDDEN_DIM];
    for c in 0..OUT_DIM {
        let g = dlogits[c];
        grad[o_bo + c] += g;
        let row = o_wo + c * HIDDEN_DIM;
        for k in 0..HIDDEN_DIM {
            grad[row + k] += g * acts.h2[k];
            dh2[k] += g * d[row + k];
        }
    }
    let mut dh1 = [0.0; EMBED_DIM];
    for k in 0..HIDDEN_DIM {
        let dz = dh2[k] * (1.0 - acts.h2[k] * acts.h2[k]);
        grad[o_bh + k] += dz;
        let row = o_wh + k * EMBED_DIM;
        for j in 0..EMBED_DIM {
            grad[row + j] += dz * acts.h1[j];
            dh1[j] += dz * d[row + j];
        }
    }
    for j in 0..EMBED_DIM {
        let dz = dh1[j] * (1.0 - acts.h1[j] * acts.h1[j]);
        grad[o_be + j] += dz;
        let row = o_we + j * FEATURE_DIM;
        for i in 0..FEATURE_DIM {
            grad[row + i] += dz * acts.x[i];
        }
    }
}

/// Teacher-forced loss and gradient over one instance: the state follows the
/// ground-truth operations while each step's prediction is scored with
/// cross-entropy against the ground-truth label. Loss is the sum over steps.
pub fn loss_and_grad(
    params: &PolicyParams,
    instance: &Instance,
) -> Result<(f64, Vec<f64>), NetError> {
    let gt = instance
        .ground_truth
        .as_ref()
        .ok_or_else(|| NetError::MissingGroundTruth {
            id: instance.id.clone(),
        })?;
    let mut grad = vec![0.0; params.data.len()];
    let mut loss = 0.0;
    let mut state = OperatorState::initial(instance);
    for &op in gt {
        let x = featurize(&state);
        let acts = forward_full(params, &x)?;
        let y = op_index(op);
        let p = acts.probs[y].max(f64::MIN_POSITIVE);
        loss -= p.ln();
        let mut dlogits = acts.probs;
        dlogits[y] -= 1.0;
        backward_step(params, &acts, dlogits, &mut grad);
        state = state.apply(op);
    }
    if !loss.is_finite() {
        return Err(NetError::NonFinite {
            context: format!("loss on instance {}", instance.id),
        });
    }
    Ok((loss, grad))
}
