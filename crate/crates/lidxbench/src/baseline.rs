//! Classical ordered-map baseline. Distribution-agnostic by construction,
//! so it anchors the static-poisoning comparison.

use crate::error::{Error, Result};
use std::collections::BTreeMap;

#[derive(Debug, Clone, Default)]
pub struct BaselineIndex {
    map: BTreeMap<u64, u64>,
}

impl BaselineIndex {
    pub fn bulk_load(keys: &[u64], payloads: &[u64]) -> Result<Self> {
        if keys.is_empty() {
            return Err(Error::EmptyInput);
        }
        if keys.len() != payloads.len() {
            return Err(Error::LengthMismatch {
                keys: keys.len(),
                payloads: payloads.len(),
            });
        }
        if let Some(i) = keys.windows(2).position(|w| w[0] >= w[1]) {
            return Err(Error::UnsortedInput(i));
        }
        Ok(Self {
            map: keys.iter().copied().zip(payloads.iter().copied()).collect(),
        })
    }

    #[inline]
    pub fn lookup(&self, key: u64) -> Option<u64> {
        self.map.get(&key).copied()
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basic_contract() {
        let idx = BaselineIndex::bulk_load(&[2, 5, 9], &[20, 50, 90]).unwrap();
        assert_eq!(idx.len(), 3);
        assert_eq!(idx.lookup(5), Some(50));
        assert_eq!(idx.lookup(6), None);
    }

    #[test]
    fn rejects_empty_and_unsorted() {
        assert!(matches!(
            BaselineIndex::bulk_load(&[], &[]),
            Err(Error::EmptyInput)
        ));
        assert!(matches!(
            BaselineIndex::bulk_load(&[2, 2], &[1, 1]),
            Err(Error::UnsortedInput(0))
        ));
    }

    #[test]
    fn random_keys_match_binary_search_oracle() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let mut keys: Vec<u64> = (0..100_000).map(|_| rng.gen()).collect();
        keys.sort_unstable();
        keys.dedup();
        let payloads: Vec<u64> = keys.iter().map(|&k| !k).collect();
        let idx = BaselineIndex::bulk_load(&keys, &payloads).unwrap();
        for _ in 0..1_000 {
            let probe: u64 = rng.gen();
            let want = keys.binary_search(&probe).ok().map(|i| payloads[i]);
            assert_eq!(idx.lookup(probe), want);
        }
    }
}
