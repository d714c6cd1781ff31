//! Deterministic, platform-stable random number generation.
//!
//! All randomness in this crate flows through [`Rng`], a xoshiro256**
//! generator whose 256-bit state is expanded from a 64-bit seed with
//! splitmix64. The exact algorithms are written out here so that any
//! implementation, in any language, can reproduce sample draws and pair
//! selections bit for bit:
//!
//! * state init: four rounds of splitmix64 over the seed
//!   (`z = s += 0x9E3779B97F4A7C15; z = (z ^ z>>30) * 0xBF58476D1CE4E5B9;
//!   z = (z ^ z>>27) * 0x94D049BB133111EB; z ^ z>>31`)
//! * output: `rotl(s1 * 5, 7) * 9` with the standard xoshiro256** state
//!   transition
//! * bounded integers: Lemire's unbiased multiply-shift rejection method
//! * shuffling: Fisher-Yates from the top index down
//!
//! Only integer arithmetic is used, so results are identical on every
//! platform and independent of any external RNG crate's release cycle.

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Mix a 64-bit value through one splitmix64 round. Used to derive
/// purpose-specific sub-seeds from a master seed.
pub fn mix(value: u64) -> u64 {
    let mut s = value;
    splitmix64(&mut s)
}

/// FNV-1a hash of a byte string; combined with [`mix`] to derive
/// sub-seeds from textual labels (`derive_seed`).
pub fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut hash = 0xcbf2_9ce4_8422_2325u64;
    for &b in bytes {
        hash ^= u64::from(b);
        hash = hash.wrapping_mul(0x0000_0100_0000_01B3);
    }
    hash
}

/// Derive a sub-seed for a named purpose from a master seed.
///
/// `derive_seed(seed, label) = mix(seed XOR fnv1a64(label))`. Every
/// sampling step in the experiment pipeline uses a distinct label, so
/// runs are reproducible and stages are statistically independent.
pub fn derive_seed(master: u64, label: &str) -> u64 {
    mix(master ^ fnv1a64(label.as_bytes()))
}

/// xoshiro256** seeded via splitmix64.
#[derive(Debug, Clone)]
pub struct Rng {
    s: [u64; 4],
}

impl Rng {
    pub fn new(seed: u64) -> Self {
        let mut sm = seed;
        let s = [
            splitmix64(&mut sm),
            splitmix64(&mut sm),
            splitmix64(&mut sm),
            splitmix64(&mut sm),
        ];
        Rng { s }
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

    /// Uniform integer in `[0, bound)`, unbiased (Lemire multiply-shift
    /// with rejection on the low word).
    pub fn below(&mut self, bound: u64) -> u64 {
        assert!(bound > 0, "bound must be positive");
        let mut x = self.next_u64();
        let mut m = (x as u128).wrapping_mul(bound as u128);
        let mut low = m as u64;
        if low < bound {
            let threshold = bound.wrapping_neg() % bound;
            while low < threshold {
                x = self.next_u64();
                m = (x as u128).wrapping_mul(bound as u128);
                low = m as u64;
            }
        }
        (m >> 64) as u64
    }

    /// In-place Fisher-Yates shuffle, iterating from the last index down.
    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        for i in (1..items.len()).rev() {
            let j = self.below(i as u64 + 1) as usize;
            items.swap(i, j);
        }
    }

    /// Fisher-Yates the first `k` positions only; the prefix is then a
    /// uniform sample without replacement.
    pub fn partial_shuffle<T>(&mut self, items: &mut [T], k: usize) {
        let n = items.len();
        let k = k.min(n);
        for i in 0..k {
            let j = i + self.below((n - i) as u64) as usize;
            items.swap(i, j);
        }
    }
}
