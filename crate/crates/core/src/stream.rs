//! Reproducible, splittable random streams.
//!
//! Every consumer of randomness names its stream by `(seed, trial, purpose)`.
//! Streams with different names never share output, trials can run in any
//! order (or in parallel) without perturbing each other, and rerunning with
//! the same name replays the exact same values on every platform.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha12Rng;

/// Generator recorded in output headers so results stay attributable.
pub const GENERATOR_NAME: &str = "ChaCha12";

/// What a stream feeds, kept distinct so the same trial can draw for several
/// jobs without correlation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Purpose {
    /// Sampling inside the reuse schedule.
    Engine,
    /// Sampling inside the baseline schedule that redraws every set.
    Naive,
    /// Nestedness auditing.
    Audit,
    /// Standalone estimation outside any schedule.
    Direct,
}

impl Purpose {
    fn code(self) -> u64 {
        match self {
            Purpose::Engine => 0,
            Purpose::Naive => 1,
            Purpose::Audit => 2,
            Purpose::Direct => 3,
        }
    }
}

/// A named ChaCha12 stream; see the module docs for the naming contract.
#[derive(Debug, Clone)]
pub struct RandomStream {
    rng: ChaCha12Rng,
    seed: u64,
    trial: u64,
    purpose: Purpose,
}

impl RandomStream {
    #[must_use]
    pub fn new(seed: u64, trial: u64, purpose: Purpose) -> Self {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        rng.set_stream((trial << 2) | purpose.code());
        Self {
            rng,
            seed,
            trial,
            purpose,
        }
    }

    #[must_use]
    pub fn seed(&self) -> u64 {
        self.seed
    }

    #[must_use]
    pub fn trial(&self) -> u64 {
        self.trial
    }

    #[must_use]
    pub fn purpose(&self) -> Purpose {
        self.purpose
    }
}

/// Shorthand for [`RandomStream::new`].
#[must_use]
pub fn make_stream(seed: u64, trial: u64, purpose: Purpose) -> RandomStream {
    RandomStream::new(seed, trial, purpose)
}

impl RngCore for RandomStream {
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    fn fill_bytes(&mut self, dest: &mut [u8]) {
        self.rng.fill_bytes(dest);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn same_name_replays_identically() {
        let mut x = make_stream(42, 3, Purpose::Engine);
        let mut y = make_stream(42, 3, Purpose::Engine);
        let xs: Vec<u64> = (0..100).map(|_| x.next_u64()).collect();
        let ys: Vec<u64> = (0..100).map(|_| y.next_u64()).collect();
        assert_eq!(xs, ys);
    }

    #[test]
    fn different_names_give_different_streams() {
        let base: Vec<u64> = {
            let mut s = make_stream(42, 3, Purpose::Engine);
            (0..8).map(|_| s.next_u64()).collect()
        };
        for (seed, trial, purpose) in [
            (43, 3, Purpose::Engine),
            (42, 4, Purpose::Engine),
            (42, 3, Purpose::Naive),
            (42, 3, Purpose::Audit),
            (42, 3, Purpose::Direct),
        ] {
            let mut s = make_stream(seed, trial, purpose);
            let other: Vec<u64> = (0..8).map(|_| s.next_u64()).collect();
            assert_ne!(base, other, "{seed} {trial} {purpose:?}");
        }
    }

    #[test]
    fn trial_order_does_not_matter() {
        let forward: Vec<u64> = (0..10)
            .map(|t| make_stream(7, t, Purpose::Engine).next_u64())
            .collect();
        let backward: Vec<u64> = (0..10)
            .rev()
            .map(|t| make_stream(7, t, Purpose::Engine).next_u64())
            .collect();
        let reversed: Vec<u64> = backward.into_iter().rev().collect();
        assert_eq!(forward, reversed);
    }

    #[test]
    fn value_stability() {
        // Frozen so a dependency bump that changes the byte stream is caught
        // rather than silently re-keying every experiment.
        let mut s = make_stream(0, 0, Purpose::Engine);
        assert_eq!(s.next_u64(), FROZEN_SEED0_TRIAL0);
        let mut s = make_stream(1, 2, Purpose::Audit);
        assert_eq!(s.next_u64(), FROZEN_SEED1_TRIAL2);
    }

    const FROZEN_SEED0_TRIAL0: u64 = 13486662071293341567;
    const FROZEN_SEED1_TRIAL2: u64 = 13795076527256399303;

    #[test]
    fn uniform_draws_land_in_unit_interval() {
        let mut s = make_stream(9, 0, Purpose::Direct);
        for _ in 0..1000 {
            let u: f64 = s.random();
            assert!((0.0..1.0).contains(&u));
        }
    }
}
