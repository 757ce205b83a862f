//! Deterministic PRNG stack: SplitMix64 for seed derivation, xoshiro256**
//! for sampling.
//!
//! Both algorithms follow the public-domain reference code by Blackman and
//! Vigna (<https://prng.di.unimi.it/>) so that any implementation, in any
//! language, reproduces identical datasets from identical seeds. Child
//! streams are addressable in O(1): stream `i` of master seed `m` is seeded
//! with the `(i+1)`-th SplitMix64 output of `m`, which makes parallel and
//! serial generation byte-identical.

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// Stateless SplitMix64 finalizer.
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// SplitMix64 sequence generator.
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        SplitMix64 { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(GOLDEN_GAMMA);
        mix64(self.state)
    }
}

/// Seed for the `index`-th child stream of `master`: the `(index+1)`-th
/// SplitMix64 output, computed without stepping through earlier indices.
pub fn child_seed(master: u64, index: u64) -> u64 {
    mix64(master.wrapping_add(index.wrapping_add(1).wrapping_mul(GOLDEN_GAMMA)))
}

/// xoshiro256** sampling core, seeded via four SplitMix64 outputs.
#[derive(Debug, Clone)]
pub struct Xoshiro256 {
    s: [u64; 4],
}

impl Xoshiro256 {
    pub fn new(seed: u64) -> Self {
        let mut sm = SplitMix64::new(seed);
        Xoshiro256 {
            s: [sm.next_u64(), sm.next_u64(), sm.next_u64(), sm.next_u64()],
        }
    }

    /// The child stream `(master, index)` used for per-instance generation.
    pub fn child(master: u64, index: u64) -> Self {
        Xoshiro256::new(child_seed(master, index))
    }

    pub fn next_u64(&mut self) -> u64 {
        let result = self.s[1].wrapping_mul(5).rotate_left(7).wrapping_mul(9);
        let t = self.s[1] << 17;
        self.s[2] ^= self.s[0];
        self.s[3] ^= self.s[1];
        self.s[1] ^= self.s[2];
        self.s[0] ^= self.s[3];
        self.s[2] ^= t;
        self.s[3] = self.s[3].rotate_left(45);
        result
    }

    /// Uniform in `[0, 1)` from the top 53 bits.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Unbiased uniform draw from `[0, bound)` by masked rejection.
    pub fn next_below(&mut self, bound: u64) -> u64 {
        assert!(bound > 0, "bound must be positive");
        let mask = bound.next_power_of_two().wrapping_sub(1);
        loop {
            let candidate = self.next_u64() & mask;
            if candidate < bound {
                return candidate;
            }
        }
    }

    pub fn next_bit(&mut self) -> u8 {
        (self.next_u64() & 1) as u8
    }

    /// Sample `k` distinct values from `[1, n]`, returned sorted ascending.
    ///
    /// Implemented as a partial Fisher-Yates shuffle over `[1, n]` so the
    /// draw sequence is pinned by the algorithm, then sorted.
    pub fn sample_distinct_sorted(&mut self, n: usize, k: usize) -> Vec<usize> {
        assert!(k <= n, "cannot sample {k} distinct values from [1, {n}]");
        let mut pool: Vec<usize> = (1..=n).collect();
        for i in 0..k {
            let j = i + self.next_below((n - i) as u64) as usize;
            pool.swap(i, j);
        }
        let mut picks = pool[..k].to_vec();
        picks.sort_unstable();
        picks
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    // Reference outputs computed from the published C sources.
    #[test]
    fn splitmix64_reference_vectors() {
        let mut sm = SplitMix64::new(0);
        let first: Vec<u64> = (0..5).map(|_| sm.next_u64()).collect();
        assert_eq!(
            first,
            vec![
                0xe220a8397b1dcdaf,
                0x6e789e6aa1b965f4,
                0x06c45d188009454f,
                0xf88bb8a8724c81ec,
                0x1b39896a51a8749b
            ]
        );
        let mut sm = SplitMix64::new(1234567);
        assert_eq!(sm.next_u64(), 0x599ed017fb08fc85);
        assert_eq!(sm.next_u64(), 0x2c73f08458540fa5);
    }

    #[test]
    fn xoshiro_reference_vectors() {
        let mut x = Xoshiro256::new(0);
        assert_eq!(x.next_u64(), 0x99ec5f36cb75f2b4);
        assert_eq!(x.next_u64(), 0xbf6e1f784956452a);
        assert_eq!(x.next_u64(), 0x1a5f849d4933e6e0);
        assert_eq!(x.next_u64(), 0x6aa594f1262d2d2c);

        let x42 = Xoshiro256::new(42);
        assert_eq!(
            x42.s,
            [
                0xbdd732262feb6e95,
                0x28efe333b266f103,
                0x47526757130f9f52,
                0x581ce1ff0e4ae394
            ]
        );
        let mut x42 = x42;
        assert_eq!(x42.next_u64(), 0x15780b2e0c2ec716);
        assert_eq!(x42.next_u64(), 0x6104d9866d113a7e);
    }

    #[test]
    fn child_seed_reference_vectors() {
        assert_eq!(child_seed(42, 0), 0xbdd732262feb6e95);
        assert_eq!(child_seed(42, 3), 0x581ce1ff0e4ae394);
        assert_eq!(child_seed(7, 0), 0x63cbe1e459320dd7);
        assert_eq!(child_seed(7, 1), 0x044c3cd7f43c661c);
    }

    #[test]
    fn unit_f64_reference() {
        let mut x = Xoshiro256::new(42);
        assert_eq!(x.next_f64(), 0.08386297105988216);
        assert_eq!(x.next_f64(), 0.3789802506626686);
        assert_eq!(x.next_f64(), 0.6800434110281394);
    }

    #[test]
    fn next_below_stays_in_range_and_covers() {
        let mut x = Xoshiro256::new(9);
        let mut seen = [false; 7];
        for _ in 0..1000 {
            let v = x.next_below(7) as usize;
            assert!(v < 7);
            seen[v] = true;
        }
        assert!(seen.iter().all(|&s| s));
    }

    #[test]
    fn sample_distinct_sorted_properties() {
        let mut x = Xoshiro256::new(3);
        for _ in 0..200 {
            let picks = x.sample_distinct_sorted(40, 11);
            assert_eq!(picks.len(), 11);
            assert!(picks.windows(2).all(|w| w[0] < w[1]));
            assert!(picks.iter().all(|&p| (1..=40).contains(&p)));
        }
        // full sample is a permutation of [1, n]
        let all = x.sample_distinct_sorted(10, 10);
        assert_eq!(all, (1..=10).collect::<Vec<_>>());
    }
}
