//! Workbench for the OpenXOR constraint-satisfaction benchmark.
//!
//! OpenXOR asks for an operation sequence over `{XOR, NOP}` that drives a
//! single-bit accumulator through hard checkpoint constraints to a target
//! value. This crate provides the canonical problem model, a reverse-
//! construction instance generator with guaranteed satisfiability, exact and
//! heuristic solvers, a fixed-point operator-iteration framework, a small
//! learnable operator-policy network trained by teacher forcing, metric
//! computation with Monte Carlo bound validators, and prompt rendering plus
//! transcript grading for evaluating chat models on the task.

pub mod bridge;
pub mod eval;
pub mod fixpoint;
pub mod gen;
pub mod jsonl;
pub mod model;
pub mod policy;
pub mod rng;
pub mod solvers;

/// Serialized dataset format version, embedded in reproducibility headers.
pub const DATASET_FORMAT_VERSION: &str = "openxor.jsonl.v1";

/// Serialized policy model format version (`.olm` files).
pub const MODEL_FORMAT_VERSION: &str = "olm.v1";
