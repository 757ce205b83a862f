//! Canonical OpenXOR problem model.
//!
//! An instance is a bit sequence, a target bit, and a set of checkpoint
//! constraints `(p, v)` requiring the accumulator to equal `v` immediately
//! after processing `p` bits (positions are 1-based). A candidate solution is
//! an operation sequence over `{XOR, NOP}`; [`simulate`] produces the
//! accumulator trace it induces and [`verify`] checks it against an instance.

use serde::{Deserialize, Serialize};
use std::fmt;
use std::ops::BitXor;
use thiserror::Error;

/// A single binary digit. The only values are [`Bit::ZERO`] and [`Bit::ONE`];
/// construction from wider integers is checked.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Bit(bool);

impl Bit {
    pub const ZERO: Bit = Bit(false);
    pub const ONE: Bit = Bit(true);

    pub fn value(self) -> u8 {
        self.0 as u8
    }

    pub fn is_one(self) -> bool {
        self.0
    }

    /// The bit as a 0.0/1.0 feature value.
    pub fn as_f64(self) -> f64 {
        self.0 as u8 as f64
    }

    pub fn flipped(self) -> Bit {
        Bit(!self.0)
    }
}

impl BitXor for Bit {
    type Output = Bit;
    fn bitxor(self, rhs: Bit) -> Bit {
        Bit(self.0 ^ rhs.0)
    }
}

impl TryFrom<u8> for Bit {
    type Error = ModelError;
    fn try_from(v: u8) -> Result<Bit, ModelError> {
        match v {
            0 => Ok(Bit::ZERO),
            1 => Ok(Bit::ONE),
            other => Err(ModelError::InvalidBit(other)),
        }
    }
}

impl fmt::Display for Bit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value())
    }
}

impl Serialize for Bit {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_u8(self.value())
    }
}

impl<'de> Deserialize<'de> for Bit {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Bit, D::Error> {
        let v = u8::deserialize(d)?;
        Bit::try_from(v).map_err(serde::de::Error::custom)
    }
}

/// One of the two operations applied per position.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Op {
    Xor,
    Nop,
}

impl Op {
    pub fn token(self) -> &'static str {
        match self {
            Op::Xor => "XOR",
            Op::Nop => "NOP",
        }
    }
}

impl fmt::Display for Op {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

/// Hard constraint: after processing `position` bits the accumulator must
/// equal `required`. Positions are 1-based and lie in `[1, n]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(into = "(usize, u8)", try_from = "(usize, u8)")]
pub struct Checkpoint {
    pub position: usize,
    pub required: Bit,
}

impl From<Checkpoint> for (usize, u8) {
    fn from(c: Checkpoint) -> (usize, u8) {
        (c.position, c.required.value())
    }
}

impl TryFrom<(usize, u8)> for Checkpoint {
    type Error = ModelError;
    fn try_from((position, v): (usize, u8)) -> Result<Checkpoint, ModelError> {
        Ok(Checkpoint {
            position,
            required: Bit::try_from(v)?,
        })
    }
}

/// One benchmark unit: input bits, target bit, checkpoint constraints, and
/// optionally the generator's solution plus small demonstration instances.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Instance {
    pub id: String,
    pub bits: Vec<Bit>,
    pub target: Bit,
    pub checkpoints: Vec<Checkpoint>,
    pub ground_truth: Option<Vec<Op>>,
    pub few_shot: Vec<Instance>,
}

impl Instance {
    /// Sequence length `n`.
    pub fn n(&self) -> usize {
        self.bits.len()
    }

    /// Checkpoint count `k`.
    pub fn k(&self) -> usize {
        self.checkpoints.len()
    }

    /// Required accumulator value at a 1-based position, if constrained.
    pub fn checkpoint_at(&self, position: usize) -> Option<Bit> {
        self.checkpoints
            .binary_search_by_key(&position, |c| c.position)
            .ok()
            .map(|i| self.checkpoints[i].required)
    }

    /// Structural validation: non-empty bits, sorted distinct in-range
    /// checkpoints, an exact-verifying ground truth when present, and
    /// well-formed few-shot demonstrations (`n <= 16`, ground truth present).
    pub fn validate(&self) -> Result<(), ModelError> {
        if self.bits.is_empty() {
            return Err(ModelError::EmptyBits {
                id: self.id.clone(),
            });
        }
        let n = self.n();
        let mut prev = 0usize;
        for c in &self.checkpoints {
            if c.position < 1 || c.position > n {
                return Err(ModelError::CheckpointOutOfRange {
                    id: self.id.clone(),
                    position: c.position,
                    n,
                });
            }
            if c.position <= prev {
                return Err(ModelError::CheckpointsUnsorted {
                    id: self.id.clone(),
                });
            }
            prev = c.position;
        }
        if let Some(ops) = &self.ground_truth {
            let report = verify(self, ops)?;
            if !report.exact {
                return Err(ModelError::GroundTruthInvalid {
                    id: self.id.clone(),
                });
            }
        }
        for fs in &self.few_shot {
            if fs.n() > 16 {
                return Err(ModelError::FewShotTooLong {
                    id: fs.id.clone(),
                    n: fs.n(),
                });
            }
            if fs.ground_truth.is_none() {
                return Err(ModelError::FewShotMissingSolution { id: fs.id.clone() });
            }
            fs.validate()?;
        }
        Ok(())
    }
}

/// Accumulator trace. `acc[0] = 0` is the initial state; `acc[i]` is the
/// value after processing `i` bits, so `acc.len() = n + 1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trace {
    pub acc: Vec<Bit>,
}

impl Trace {
    pub fn final_acc(&self) -> Bit {
        *self.acc.last().expect("trace holds at least acc[0]")
    }
}

/// Outcome of checking one operation sequence against one instance.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub checkpoint_results: Vec<bool>,
    pub target_ok: bool,
    pub exact: bool,
    /// Fraction of checkpoints satisfied; 1.0 when the instance has none.
    pub checkpoint_fraction: f64,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ModelError {
    #[error("bit value {0} is not 0 or 1")]
    InvalidBit(u8),
    #[error("operation count {ops} does not match bit count {bits}")]
    LengthMismatch { bits: usize, ops: usize },
    #[error("instance {id}: bit sequence is empty")]
    EmptyBits { id: String },
    #[error("instance {id}: checkpoint position {position} outside [1, {n}]")]
    CheckpointOutOfRange {
        id: String,
        position: usize,
        n: usize,
    },
    #[error("instance {id}: checkpoint positions not strictly ascending")]
    CheckpointsUnsorted { id: String },
    #[error("instance {id}: ground truth does not verify")]
    GroundTruthInvalid { id: String },
    #[error("few-shot instance {id}: length {n} exceeds 16")]
    FewShotTooLong { id: String, n: usize },
    #[error("few-shot instance {id}: no ground truth attached")]
    FewShotMissingSolution { id: String },
}

/// Run the accumulator forward: `acc[i] = acc[i-1] ^ bits[i]` under `XOR`,
/// unchanged under `NOP`.
pub fn simulate(bits: &[Bit], ops: &[Op]) -> Result<Trace, ModelError> {
    if bits.len() != ops.len() {
        return Err(ModelError::LengthMismatch {
            bits: bits.len(),
            ops: ops.len(),
        });
    }
    let mut acc = Vec::with_capacity(bits.len() + 1);
    let mut cur = Bit::ZERO;
    acc.push(cur);
    for (bit, op) in bits.iter().zip(ops) {
        if *op == Op::Xor {
            cur = cur ^ *bit;
        }
        acc.push(cur);
    }
    Ok(Trace { acc })
}

/// Check an operation sequence against every checkpoint and the target.
///
/// The full trace is always computed; there is no early abort, so the report
/// is meaningful even for sequences that fail an early checkpoint.
pub fn verify(instance: &Instance, ops: &[Op]) -> Result<VerifyReport, ModelError> {
    if ops.len() != instance.n() {
        return Err(ModelError::LengthMismatch {
            bits: instance.n(),
            ops: ops.len(),
        });
    }
    let trace = simulate(&instance.bits, ops)?;
    let checkpoint_results: Vec<bool> = instance
        .checkpoints
        .iter()
        .map(|c| trace.acc[c.position] == c.required)
        .collect();
    let target_ok = trace.final_acc() == instance.target;
    let passes = checkpoint_results.iter().filter(|&&b| b).count();
    let k = checkpoint_results.len();
    let checkpoint_fraction = if k == 0 {
        1.0
    } else {
        passes as f64 / k as f64
    };
    let exact = target_ok && passes == k;
    Ok(VerifyReport {
        checkpoint_results,
        target_ok,
        exact,
        checkpoint_fraction,
    })
}

/// Render an operation sequence in the wire form used by prompts and
/// transcripts: space-separated `XOR`/`NOP` tokens.
pub fn ops_to_string(ops: &[Op]) -> String {
    let mut s = String::with_capacity(ops.len() * 4);
    for (i, op) in ops.iter().enumerate() {
        if i > 0 {
            s.push(' ');
        }
        s.push_str(op.token());
    }
    s
}
