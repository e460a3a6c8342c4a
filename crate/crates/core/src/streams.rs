//! Counter-based pseudorandom streams.
//!
//! Every random decision in the lab is drawn from a stream keyed by a master
//! seed plus a small integer path (trial index, agent, task, purpose tag).
//! Streams are stateless functions of their key, so trials can be evaluated
//! in any order, or concurrently, and still reproduce bit-identical results.

/// Golden-ratio increment used by the splitmix construction.
const GAMMA: u64 = 0x9e37_79b9_7f4a_7c15;

/// splitmix64 finalizer: a bijective 64-bit mixer.
#[inline]
fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Purpose tags keeping unrelated draws on disjoint streams.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    World,
    Report,
    TrustedPick,
    TrustedReports,
    ReferenceChoice,
    Permutation,
    TrialSeed,
    Fuzz,
}

impl Stage {
    fn tag(self) -> u64 {
        match self {
            Stage::World => 1,
            Stage::Report => 2,
            Stage::TrustedPick => 3,
            Stage::TrustedReports => 4,
            Stage::ReferenceChoice => 5,
            Stage::Permutation => 6,
            Stage::TrialSeed => 7,
            Stage::Fuzz => 8,
        }
    }
}

/// A deterministic stream of uniform draws located by `(seed, stage, path)`.
#[derive(Debug, Clone)]
pub struct Stream {
    state: u64,
    counter: u64,
}

impl Stream {
    /// Derives the stream at the given key. Path components are folded into
    /// the state one at a time through the splitmix finalizer, so distinct
    /// paths land on unrelated streams.
    pub fn new(seed: u64, stage: Stage, path: &[u64]) -> Self {
        let mut state = mix(seed ^ GAMMA);
        state = mix(state.wrapping_add(stage.tag().wrapping_mul(GAMMA)));
        for (i, &part) in path.iter().enumerate() {
            let salt = (i as u64 + 2).wrapping_mul(GAMMA);
            state = mix(state ^ part.wrapping_add(salt));
        }
        Stream { state, counter: 0 }
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.counter = self.counter.wrapping_add(1);
        mix(self.state.wrapping_add(self.counter.wrapping_mul(GAMMA)))
    }

    /// Uniform draw in [0, 1) with 53 random bits.
    #[inline]
    pub fn next_unit(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Bernoulli draw with success probability `p`.
    #[inline]
    pub fn bernoulli(&mut self, p: f64) -> bool {
        self.next_unit() < p
    }

    /// Uniform integer in [0, n). Multiply-shift; the O(n / 2^64) bias is
    /// irrelevant at the sizes used here.
    #[inline]
    pub fn below(&mut self, n: usize) -> usize {
        debug_assert!(n > 0);
        ((self.next_u64() as u128 * n as u128) >> 64) as usize
    }

    /// Fisher-Yates shuffle producing a permutation of 0..n.
    pub fn permutation(seed: u64, n: usize) -> Vec<usize> {
        let mut stream = Stream::new(seed, Stage::Permutation, &[n as u64]);
        let mut perm: Vec<usize> = (0..n).collect();
        for i in (1..n).rev() {
            let j = stream.below(i + 1);
            perm.swap(i, j);
        }
        perm
    }
}
