//! Reverse-construction instance generator.
//!
//! Satisfiability is guaranteed by construction: bits and operations are
//! drawn first, the trace is simulated, and checkpoint values are read off
//! the trace, so the drawn operations are always one valid solution. Each
//! instance uses an independent child PRNG stream of `(seed, index)`,
//! making parallel and serial generation byte-identical.

use crate::model::{simulate, Bit, Checkpoint, Instance, Op};
use crate::rng::Xoshiro256;
use serde::{Deserialize, Serialize};

pub const GENERATOR_VERSION: &str = "reverse-construction.v1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenConfig {
    pub n: usize,
    /// Fraction of positions carrying a checkpoint; `k = round(n * density)`.
    pub checkpoint_density: f64,
    pub seed: u64,
    pub count: usize,
    /// Length of attached few-shot demonstrations (each carries exactly one
    /// checkpoint; the per-instance count is drawn from {3, 4, 5}).
    pub few_shot_n: usize,
}

impl GenConfig {
    pub fn new(n: usize, checkpoint_density: f64, seed: u64, count: usize) -> Self {
        assert!(n >= 1, "n must be at least 1");
        assert!(
            checkpoint_density > 0.0 && checkpoint_density <= 1.0,
            "density must lie in (0, 1]"
        );
        GenConfig {
            n,
            checkpoint_density,
            seed,
            count,
            few_shot_n: 8,
        }
    }

    /// Checkpoint count for this configuration.
    pub fn k(&self) -> usize {
        ((self.n as f64 * self.checkpoint_density).round() as usize).min(self.n)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Dataset {
    pub config: GenConfig,
    pub instances: Vec<Instance>,
    pub generator_version: String,
}

fn random_bits(rng: &mut Xoshiro256, n: usize) -> Vec<Bit> {
    (0..n)
        .map(|_| Bit::try_from(rng.next_bit()).expect("bit is 0 or 1"))
        .collect()
}

fn random_ops(rng: &mut Xoshiro256, n: usize) -> Vec<Op> {
    (0..n)
        .map(|_| {
            if rng.next_bit() == 1 {
                Op::Xor
            } else {
                Op::Nop
            }
        })
        .collect()
}

/// Core reverse construction: draw bits and ops, simulate, sample `k`
/// distinct positions, read checkpoint values off the trace.
fn reverse_construct(rng: &mut Xoshiro256, id: String, n: usize, k: usize) -> Instance {
    let bits = random_bits(rng, n);
    let ops = random_ops(rng, n);
    let trace = simulate(&bits, &ops).expect("bits and ops share length n");
    let positions = rng.sample_distinct_sorted(n, k.min(n));
    let checkpoints = positions
        .into_iter()
        .map(|p| Checkpoint {
            position: p,
            required: trace.acc[p],
        })
        .collect();
    Instance {
        id,
        bits,
        target: trace.final_acc(),
        checkpoints,
        ground_truth: Some(ops),
        few_shot: vec![],
    }
}

/// Generate the `index`-th instance of a configuration, including its
/// few-shot demonstrations, from the child stream `(config.seed, index)`.
pub fn generate_instance(config: &GenConfig, index: u64) -> Instance {
    assert!(
        (1..=16).contains(&config.few_shot_n),
        "few-shot length must lie in [1, 16]"
    );
    let mut rng = Xoshiro256::child(config.seed, index);
    let id = format!("{index:05}");
    let mut inst = reverse_construct(&mut rng, id.clone(), config.n, config.k());
    let few_shot_count = 3 + rng.next_below(3) as usize;
    inst.few_shot = (0..few_shot_count)
        .map(|j| reverse_construct(&mut rng, format!("{id}-fs{j}"), config.few_shot_n, 1))
        .collect();
    debug_assert!(inst.validate().is_ok());
    inst
}

/// Generate a full dataset. Instances come from independent child streams,
/// so this is embarrassingly parallel without changing output bytes.
pub fn generate_dataset(config: &GenConfig) -> Dataset {
    use rayon::prelude::*;
    let instances: Vec<Instance> = (0..config.count as u64)
        .into_par_iter()
        .map(|i| generate_instance(config, i))
        .collect();
    Dataset {
        config: config.clone(),
        instances,
        generator_version: GENERATOR_VERSION.to_string(),
    }
}

/// A deterministic decision function in the class covered by the greedy
/// impossibility argument: it sees the current accumulator, the position,
/// the bits, its own prefix, and the target, but not the checkpoint set.
pub trait PrefixPolicy {
    fn decide(&self, acc: Bit, pos: usize, bits: &[Bit], prefix: &[Op], target: Bit) -> Op;
}

/// The parity heuristic from the baselines, as a [`PrefixPolicy`].
pub struct GreedyPolicy;

impl PrefixPolicy for GreedyPolicy {
    fn decide(&self, acc: Bit, _pos: usize, _bits: &[Bit], _prefix: &[Op], target: Bit) -> Op {
        if acc != target {
            Op::Xor
        } else {
            Op::Nop
        }
    }
}

pub struct AlwaysOp(pub Op);

impl PrefixPolicy for AlwaysOp {
    fn decide(&self, _: Bit, _: usize, _: &[Bit], _: &[Op], _: Bit) -> Op {
        self.0
    }
}

fn rollout<P: PrefixPolicy + ?Sized>(policy: &P, bits: &[Bit], target: Bit) -> (Vec<Op>, Vec<Bit>) {
    let mut acc = Bit::ZERO;
    let mut ops = Vec::with_capacity(bits.len());
    let mut accs = Vec::with_capacity(bits.len() + 1);
    accs.push(acc);
    for (i, &bit) in bits.iter().enumerate() {
        let op = policy.decide(acc, i, bits, &ops, target);
        if op == Op::Xor {
            acc = acc ^ bit;
        }
        ops.push(op);
        accs.push(acc);
    }
    (ops, accs)
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum AdversarialError {
    #[error("policy is not deterministic: identical rollouts differ at position {position}")]
    NonDeterministicPolicy { position: usize },
    #[error("n must be at least 4 to place an adversarial checkpoint, got {0}")]
    TooShort(usize),
}

/// Build an instance that defeats a deterministic prefix policy.
///
/// The policy is rolled out on freshly drawn bits (re-drawn until both
/// halves contain a 1-bit, so the result stays satisfiable), a checkpoint
/// position is picked in the second half, and its required value is set to
/// the opposite of whatever the policy's own trace holds there. Because the
/// policy cannot see checkpoints, its decisions are unchanged on the final
/// instance and the checkpoint fails by construction.
pub fn adversarial_against<P: PrefixPolicy + ?Sized>(
    policy: &P,
    n: usize,
    seed: u64,
) -> Result<Instance, AdversarialError> {
    if n < 4 {
        return Err(AdversarialError::TooShort(n));
    }
    let mut rng = Xoshiro256::new(seed);
    let (bits, target) = loop {
        let bits = random_bits(&mut rng, n);
        let target = Bit::try_from(rng.next_bit()).expect("bit");
        let half = n / 2;
        let head_has_one = bits[..half].iter().any(|b| b.is_one());
        // keep one 1-bit strictly after any candidate checkpoint position
        let tail_has_one = bits[n - 1].is_one() || bits[n - 2].is_one();
        if head_has_one && tail_has_one {
            break (bits, target);
        }
    };
    let (ops_a, accs_a) = rollout(policy, &bits, target);
    let (ops_b, _) = rollout(policy, &bits, target);
    if let Some(position) = ops_a.iter().zip(&ops_b).position(|(a, b)| a != b) {
        return Err(AdversarialError::NonDeterministicPolicy { position });
    }

    // checkpoint in [n/2, n-2]; the last two bits hold a 1, so the target
    // stays reachable after the forced contradiction
    let half = n / 2;
    let p = half + rng.next_below((n - 2 - half + 1) as u64) as usize;
    let required = accs_a[p].flipped();
    let instance = Instance {
        id: format!("adv-{seed:08x}"),
        bits,
        target,
        checkpoints: vec![Checkpoint {
            position: p,
            required,
        }],
        ground_truth: None,
        few_shot: vec![],
    };
    Ok(instance)
}

/// Roll a prefix policy over a full instance and verify the result; used to
/// demonstrate that adversarial instances defeat their policy.
pub fn rollout_policy_on<P: PrefixPolicy + ?Sized>(policy: &P, instance: &Instance) -> Vec<Op> {
    rollout(policy, &instance.bits, instance.target).0
}
