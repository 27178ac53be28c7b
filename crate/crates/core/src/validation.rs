use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// How hard to check homomorphism and closure properties.
///
/// Pair properties are checked over all `|G|^2` pairs when `|G|` is at most
/// `exhaustive_limit`; larger groups get generator pairs plus
/// `random_samples` seeded random pairs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ValidationBudget {
    pub exhaustive_limit: usize,
    pub random_samples: usize,
    pub seed: u64,
}

impl Default for ValidationBudget {
    fn default() -> Self {
        ValidationBudget {
            exhaustive_limit: 10_000,
            random_samples: 100_000,
            seed: 0,
        }
    }
}

impl ValidationBudget {
    pub fn with_seed(seed: u64) -> Self {
        ValidationBudget {
            seed,
            ..Default::default()
        }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.seed)
    }
}
