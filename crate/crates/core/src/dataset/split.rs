//! Train/test split protocols over the samples of each person.

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SplitScheme {
    /// `repeats` independent uniformly random choices of the training set.
    RandomRepeats { repeats: usize, seed: u64 },
    /// One fold per start index `k`, training on the circular window
    /// `k, k+1, …, k+M−1 (mod n)`.
    CircularAdjacent,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub train_count: usize,
    pub scheme: SplitScheme,
}

/// Sample indices (0-based) used for training and testing in one fold.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Fold {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

impl Fold {
    fn from_train(mut train: Vec<usize>, num_samples: usize) -> Fold {
        train.sort_unstable();
        let test = (0..num_samples)
            .filter(|i| train.binary_search(i).is_err())
            .collect();
        Fold { train, test }
    }
}

/// Folds over `num_samples` per-person samples. The same fold applies to
/// every person.
pub fn splits(num_samples: usize, spec: &SplitSpec) -> Result<Vec<Fold>> {
    let m = spec.train_count;
    if num_samples < 2 || m == 0 || m >= num_samples {
        return Err(Error::InvalidParameter(format!(
            "train count must be in 1..={}, got {m}",
            num_samples.saturating_sub(1)
        )));
    }
    match spec.scheme {
        SplitScheme::RandomRepeats { repeats, seed } => {
            if repeats == 0 {
                return Err(Error::InvalidParameter(
                    "repeat count must be at least 1".into(),
                ));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            Ok((0..repeats)
                .map(|_| Fold::from_train(sample(&mut rng, num_samples, m).into_vec(), num_samples))
                .collect())
        }
        SplitScheme::CircularAdjacent => Ok((0..num_samples)
            .map(|k| Fold::from_train((k..k + m).map(|i| i % num_samples).collect(), num_samples))
            .collect()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn adjacent(m: usize) -> SplitSpec {
        SplitSpec {
            train_count: m,
            scheme: SplitScheme::CircularAdjacent,
        }
    }

    #[test]
    fn neighbouring_folds_share_all_but_one() {
        let f = splits(12, &adjacent(6)).unwrap();
        assert_eq!(f.len(), 12);
        let shared = f[0].train.iter().filter(|i| f[1].train.contains(i)).count();
        assert_eq!(shared, 5);
        assert_eq!(f[11].train, vec![0, 1, 2, 3, 4, 11]);
    }

    #[test]
    fn single_test_index_when_training_on_eleven() {
        let spec = SplitSpec {
            train_count: 11,
            scheme: SplitScheme::RandomRepeats {
                repeats: 1,
                seed: 9,
            },
        };
        let f = splits(12, &spec).unwrap();
        assert_eq!(f.len(), 1);
        assert_eq!(f[0].test.len(), 1);
    }

    #[test]
    fn out_of_range_train_count() {
        assert!(splits(12, &adjacent(0)).is_err());
        assert!(splits(12, &adjacent(12)).is_err());
        let spec = SplitSpec {
            train_count: 4,
            scheme: SplitScheme::RandomRepeats {
                repeats: 0,
                seed: 1,
            },
        };
        assert!(splits(12, &spec).is_err());
    }

    #[test]
    fn random_repeats_are_seeded() {
        let spec = SplitSpec {
            train_count: 5,
            scheme: SplitScheme::RandomRepeats {
                repeats: 10,
                seed: 42,
            },
        };
        assert_eq!(splits(12, &spec).unwrap(), splits(12, &spec).unwrap());
    }
}
