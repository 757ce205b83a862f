//! Metrics, report tables, and Monte Carlo validation of the search bounds.

use crate::gen::{generate_instance, GenConfig};
use crate::jsonl::ResultRow;
use crate::model::{verify, Instance};
use crate::rng::Xoshiro256;
use crate::solvers::{solve_beam, solve_random, BeamConfig};
use serde::Serialize;
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum EvalError {
    #[error("result ids do not match dataset: missing {missing:?}, unexpected {unexpected:?}, duplicated {duplicated:?}")]
    IdMismatch {
        missing: Vec<String>,
        unexpected: Vec<String>,
        duplicated: Vec<String>,
    },
}

/// The five headline metrics for one method.
///
/// `exact_accuracy` is a fraction of all instances; checkpoint, target, and
/// time statistics are averaged over completed attempts only and reported
/// as undefined when nothing completed.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Metrics {
    pub completion_rate: f64,
    pub exact_accuracy: f64,
    pub checkpoint_accuracy: Option<f64>,
    pub target_accuracy: Option<f64>,
    pub mean_time: Option<f64>,
    pub n_instances: usize,
}

/// Score one method's results against the dataset.
///
/// An attempt counts as completed when it carries a parseable sequence of
/// the instance's exact length. Checkpoint accuracy uses the full trace
/// even past a violated checkpoint. Aggregation visits instances sorted by
/// id so the output is byte-stable regardless of input order.
pub fn score(instances: &[Instance], rows: &[ResultRow]) -> Result<Metrics, EvalError> {
    let mut by_id: BTreeMap<&str, &Instance> = BTreeMap::new();
    let mut duplicated = Vec::new();
    for inst in instances {
        if by_id.insert(&inst.id, inst).is_some() {
            duplicated.push(inst.id.clone());
        }
    }
    let mut row_by_id: BTreeMap<&str, &ResultRow> = BTreeMap::new();
    for row in rows {
        if row_by_id.insert(&row.id, row).is_some() {
            duplicated.push(row.id.clone());
        }
    }
    let missing: Vec<String> = by_id
        .keys()
        .filter(|id| !row_by_id.contains_key(**id))
        .map(|s| s.to_string())
        .collect();
    let unexpected: Vec<String> = row_by_id
        .keys()
        .filter(|id| !by_id.contains_key(**id))
        .map(|s| s.to_string())
        .collect();
    if !missing.is_empty() || !unexpected.is_empty() || !duplicated.is_empty() {
        return Err(EvalError::IdMismatch {
            missing,
            unexpected,
            duplicated,
        });
    }

    let n_instances = instances.len();
    let mut completed = 0usize;
    let mut exact = 0usize;
    let mut checkpoint_sum = 0.0;
    let mut target_hits = 0usize;
    let mut time_sum = 0.0;
    for (id, inst) in &by_id {
        let row = row_by_id[*id];
        let ops = match &row.ops {
            Some(ops) if ops.len() == inst.n() => ops,
            _ => continue,
        };
        completed += 1;
        time_sum += row.time_s;
        let report = verify(inst, ops).expect("length checked above");
        checkpoint_sum += report.checkpoint_fraction;
        if report.target_ok {
            target_hits += 1;
        }
        if report.exact {
            exact += 1;
        }
    }

    let frac = |num: usize, den: usize| {
        if den == 0 {
            0.0
        } else {
            num as f64 / den as f64
        }
    };
    Ok(Metrics {
        completion_rate: frac(completed, n_instances),
        exact_accuracy: frac(exact, n_instances),
        checkpoint_accuracy: (completed > 0).then(|| checkpoint_sum / completed as f64),
        target_accuracy: (completed > 0).then(|| frac(target_hits, completed)),
        mean_time: (completed > 0).then(|| time_sum / completed as f64),
        n_instances,
    })
}

/// Wilson 95% score interval for a binomial proportion.
pub fn wilson_interval(successes: u64, trials: u64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let z = 1.959963984540054f64; // 97.5th normal percentile
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    ((center - half).max(0.0), (center + half).min(1.0))
}

/// Slack factor applied to theoretical upper bounds, absorbing the
/// approximate-independence assumptions in their derivations.
pub const BOUND_SLACK: f64 = 1.5;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundReport {
    pub law: String,
    pub trials: u64,
    pub successes: u64,
    pub measured_rate: f64,
    pub bound: f64,
    pub wilson_low: f64,
    pub wilson_high: f64,
    /// False only when even the lower confidence bound exceeds bound x slack.
    pub pass: bool,
}

fn bound_report(law: &str, successes: u64, trials: u64, bound: f64) -> BoundReport {
    let (lo, hi) = wilson_interval(successes, trials);
    BoundReport {
        law: law.to_string(),
        trials,
        successes,
        measured_rate: successes as f64 / trials.max(1) as f64,
        bound,
        wilson_low: lo,
        wilson_high: hi,
        pass: lo <= bound * BOUND_SLACK,
    }
}

fn validator_config(n: usize, k: usize, seed: u64) -> GenConfig {
    // density chosen so round(n * density) = k
    GenConfig::new(n, k as f64 / n as f64, seed, 1)
}

/// Default instance length for bound validation: wide checkpoint spacing
/// keeps the per-checkpoint pass events approximately independent (closely
/// spaced checkpoints with no 1-bit between them merge into one effective
/// constraint and bias the measured rate upward).
pub fn default_validator_n(k: usize) -> usize {
    (64 * k).max(64)
}

/// Monte Carlo check of the random-strategy bound: success (all `k`
/// checkpoints satisfied by one uniform sequence; the final target is not
/// part of the bounded event) should track `2^-k`.
pub fn validate_random_bound(k: usize, trials: u64, n: usize, seed: u64) -> BoundReport {
    assert!(k >= 1 && k <= n);
    let config = validator_config(n, k, seed);
    let mut rng = Xoshiro256::new(seed ^ 0x5eed);
    let mut successes = 0u64;
    for i in 0..trials {
        let inst = generate_instance(&config, i);
        let out = solve_random(&inst, &mut rng);
        let report = verify(&inst, out.ops.as_ref().expect("random always attempts")).unwrap();
        if report.checkpoint_results.iter().all(|&b| b) {
            successes += 1;
        }
    }
    bound_report("random", successes, trials, 0.5f64.powi(k as i32))
}

/// Monte Carlo check of the beam bound `P(success) <= B / 2^k` under
/// checkpoint-count scoring. Success means the beam survived every
/// checkpoint, i.e. it emitted a full-length sequence passing all of them.
pub fn validate_beam_bound(
    beam_size: usize,
    k: usize,
    trials: u64,
    n: usize,
    seed: u64,
) -> BoundReport {
    assert!(k >= 1 && k <= n);
    let config = validator_config(n, k, seed);
    let beam = BeamConfig::new(beam_size);
    let mut successes = 0u64;
    for i in 0..trials {
        let inst = generate_instance(&config, i);
        let out = solve_beam(&inst, &beam);
        let survived = out
            .ops
            .as_ref()
            .map(|ops| {
                verify(&inst, ops)
                    .map(|r| r.checkpoint_results.iter().all(|&b| b))
                    .unwrap_or(false)
            })
            .unwrap_or(false);
        if survived {
            successes += 1;
        }
    }
    let bound = (beam_size as f64 / 2f64.powi(k as i32)).min(1.0);
    bound_report("beam", successes, trials, bound)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DensityReport {
    pub n: usize,
    pub k: usize,
    /// Exact fraction of the 2^n sequences satisfying all checkpoints.
    pub fraction_checkpoints_only: f64,
    /// Exact fraction also hitting the final target.
    pub fraction_with_target: f64,
    /// True when every inter-checkpoint segment (and the prefix) holds a
    /// 1-bit; under this precondition the checkpoint-only fraction is
    /// exactly 2^-k.
    pub segment_preconditions_hold: bool,
    /// True when additionally the tail past the last checkpoint holds a
    /// 1-bit, making the with-target fraction exactly 2^-(k+1).
    pub tail_precondition_holds: bool,
}

/// Exhaustively enumerate all 2^n operation sequences of an instance and
/// report exact solution-density fractions.
pub fn validate_density(instance: &Instance) -> DensityReport {
    let n = instance.n();
    assert!(n <= 20, "exhaustive enumeration is exponential in n");
    let bit_vals: Vec<u8> = instance.bits.iter().map(|b| b.value()).collect();
    let mut pass_checkpoints = 0u64;
    let mut pass_all = 0u64;
    for mask in 0u64..(1u64 << n) {
        let mut parity = 0u8;
        let mut ok = true;
        let mut ci = 0;
        for p in 1..=n {
            if mask >> (p - 1) & 1 == 1 {
                parity ^= bit_vals[p - 1];
            }
            while ci < instance.checkpoints.len() && instance.checkpoints[ci].position == p {
                if instance.checkpoints[ci].required.value() != parity {
                    ok = false;
                }
                ci += 1;
            }
            if !ok {
                break;
            }
        }
        if ok {
            pass_checkpoints += 1;
            if parity == instance.target.value() {
                pass_all += 1;
            }
        }
    }

    let mut prev = 0usize;
    let mut segments_ok = true;
    for c in &instance.checkpoints {
        if !instance.bits[prev..c.position].iter().any(|b| b.is_one()) {
            segments_ok = false;
        }
        prev = c.position;
    }
    let tail_ok = instance.bits[prev..].iter().any(|b| b.is_one());

    let total = (1u64 << n) as f64;
    DensityReport {
        n,
        k: instance.k(),
        fraction_checkpoints_only: pass_checkpoints as f64 / total,
        fraction_with_target: pass_all as f64 / total,
        segment_preconditions_hold: segments_ok,
        tail_precondition_holds: segments_ok && tail_ok,
    }
}

/// Per-method report assembled by the `eval` and `grade` commands.
#[derive(Debug, Clone, Serialize)]
pub struct EvalReport {
    pub rows: Vec<(String, Metrics)>,
    pub failure_histogram: Vec<(String, usize)>,
    pub dataset_fingerprint: String,
    pub tool_version: String,
}

impl EvalReport {
    pub fn new(dataset_fingerprint: String) -> Self {
        EvalReport {
            rows: Vec::new(),
            failure_histogram: Vec::new(),
            dataset_fingerprint,
            tool_version: format!(
                "openxor {} ({})",
                env!("CARGO_PKG_VERSION"),
                crate::DATASET_FORMAT_VERSION
            ),
        }
    }

    pub fn push(&mut self, method: &str, metrics: Metrics) {
        self.rows.push((method.to_string(), metrics));
    }

    pub fn to_markdown(&self) -> String {
        fn pct(v: f64) -> String {
            format!("{:.1}%", v * 100.0)
        }
        fn opt_pct(v: Option<f64>) -> String {
            v.map(pct).unwrap_or_else(|| "N/A".into())
        }
        let mut out = String::new();
        out.push_str(&format!(
            "# Evaluation report\n\nTool: {}\nDataset: {}\n\n",
            self.tool_version, self.dataset_fingerprint
        ));
        out.push_str("| Method | Completion | Exact Acc. | Ckpt Acc. | Target Acc. | Time (s) |\n");
        out.push_str("|---|---|---|---|---|---|\n");
        for (method, m) in &self.rows {
            out.push_str(&format!(
                "| {} | {} | {} | {} | {} | {} |\n",
                method,
                pct(m.completion_rate),
                pct(m.exact_accuracy),
                opt_pct(m.checkpoint_accuracy),
                opt_pct(m.target_accuracy),
                m.mean_time
                    .map(|t| format!("{t:.3}"))
                    .unwrap_or_else(|| "N/A".into()),
            ));
        }
        out.push_str(
            "\nCheckpoint accuracy, target accuracy, and time are averaged over completed attempts.\n",
        );
        if !self.failure_histogram.is_empty() {
            out.push_str("\n| Failure class | Count |\n|---|---|\n");
            for (class, count) in &self.failure_histogram {
                out.push_str(&format!("| {class} | {count} |\n"));
            }
        }
        out
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "method,n_instances,completion_rate,exact_accuracy,checkpoint_accuracy,target_accuracy,mean_time_s\n",
        );
        fn opt(v: Option<f64>) -> String {
            v.map(|x| format!("{x:.6}")).unwrap_or_else(|| "NA".into())
        }
        for (method, m) in &self.rows {
            out.push_str(&format!(
                "{},{},{:.6},{:.6},{},{},{}\n",
                method,
                m.n_instances,
                m.completion_rate,
                m.exact_accuracy,
                opt(m.checkpoint_accuracy),
                opt(m.target_accuracy),
                opt(m.mean_time),
            ));
        }
        out
    }
}
