use std::collections::{BTreeSet, HashMap};

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use xxhash_rust::xxh3::xxh3_64;

use crate::lexer::TokenSet;

const MERSENNE_61: u64 = (1 << 61) - 1;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MinHashSignature {
    pub hash_count: usize,
    pub values: Vec<u64>,
    /// Signature of an empty token set. Never agrees with anything.
    pub sentinel: bool,
}

impl MinHashSignature {
    /// Fraction of slots with equal minima, an estimate of the Jaccard similarity.
    pub fn agreement(&self, other: &Self) -> f64 {
        if self.sentinel || other.sentinel || self.values.is_empty() {
            return 0.0;
        }
        let same = self.values.iter().zip(&other.values).filter(|(a, b)| a == b).count();
        same as f64 / self.values.len() as f64
    }
}

/// A family of `hash_count` seeded universal hashes `(a·x + b) mod (2^61 − 1)`
/// over a 64-bit base hash of each token.
#[derive(Debug, Clone)]
pub struct MinHasher {
    coefficients: Vec<(u64, u64)>,
}

fn mod_mersenne(x: u128) -> u64 {
    let p = MERSENNE_61 as u128;
    let folded = (x & p) + (x >> 61);
    let folded = (folded & p) + (folded >> 61);
    (if folded >= p { folded - p } else { folded }) as u64
}

impl MinHasher {
    pub fn new(hash_count: usize, seed: u64) -> Self {
        assert!(hash_count >= 1, "hash_count must be at least 1");
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let coefficients = (0..hash_count)
            .map(|_| {
                let a = 1 + rng.next_u64() % (MERSENNE_61 - 1);
                let b = rng.next_u64() % MERSENNE_61;
                (a, b)
            })
            .collect();
        Self { coefficients }
    }

    pub fn hash_count(&self) -> usize {
        self.coefficients.len()
    }

    pub fn signature(&self, tokens: &TokenSet) -> MinHashSignature {
        let k = self.hash_count();
        if tokens.is_empty() {
            return MinHashSignature { hash_count: k, values: vec![u64::MAX; k], sentinel: true };
        }
        let mut values = vec![u64::MAX; k];
        for t in tokens {
            let x = xxh3_64(t.as_bytes()) % MERSENNE_61;
            for (slot, &(a, b)) in values.iter_mut().zip(&self.coefficients) {
                let h = mod_mersenne(a as u128 * x as u128 + b as u128);
                if h < *slot {
                    *slot = h;
                }
            }
        }
        MinHashSignature { hash_count: k, values, sentinel: false }
    }
}

pub fn minhash(tokens: &TokenSet, hash_count: usize, seed: u64) -> MinHashSignature {
    MinHasher::new(hash_count, seed).signature(tokens)
}

/// Index pairs `(i, j)`, `i < j`, that share at least one band bucket.
/// Sentinel signatures are never bucketed.
pub fn lsh_candidate_pairs(sigs: &[MinHashSignature], bands: usize, rows: usize) -> BTreeSet<(usize, usize)> {
    let mut pairs = BTreeSet::new();
    for band in 0..bands {
        let mut buckets: HashMap<u64, Vec<usize>> = HashMap::new();
        for (i, sig) in sigs.iter().enumerate() {
            if sig.sentinel {
                continue;
            }
            let slice = &sig.values[band * rows..(band + 1) * rows];
            let bytes: Vec<u8> = slice.iter().flat_map(|v| v.to_le_bytes()).collect();
            buckets.entry(xxh3_64(&bytes)).or_default().push(i);
        }
        for members in buckets.values().filter(|m| m.len() > 1) {
            for (x, &i) in members.iter().enumerate() {
                for &j in &members[x + 1..] {
                    pairs.insert((i.min(j), i.max(j)));
                }
            }
        }
    }
    pairs
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(items: impl IntoIterator<Item = String>) -> TokenSet {
        items.into_iter().collect()
    }

    #[test]
    fn identical_sets_identical_signatures() {
        let a = set(["wire", "w", ";"].map(String::from));
        let b = set([";", "wire", "w", "w"].map(String::from));
        assert_eq!(minhash(&a, 64, 7), minhash(&b, 64, 7));
        assert_ne!(minhash(&a, 64, 7), minhash(&a, 64, 8));
        assert_eq!(minhash(&a, 64, 7).values.len(), 64);
    }

    #[test]
    fn empty_set_gets_a_sentinel() {
        let s = minhash(&TokenSet::new(), 16, 0);
        assert!(s.sentinel);
        assert_eq!(s.agreement(&s), 0.0);
        assert!(lsh_candidate_pairs(&[s.clone(), s], 4, 4).is_empty());
    }

    #[test]
    fn mersenne_reduction_matches_modulo() {
        for x in [0u128, 1, MERSENNE_61 as u128, (MERSENNE_61 as u128) * 3 + 5, u64::MAX as u128 * u64::MAX as u128 / 7] {
            assert_eq!(mod_mersenne(x) as u128, x % MERSENNE_61 as u128);
        }
    }

    #[test]
    fn identical_documents_are_lsh_candidates() {
        let a = set((0..30).map(|i| format!("t{i}")));
        let h = MinHasher::new(128, 1);
        let sigs = vec![h.signature(&a), h.signature(&set((100..130).map(|i| format!("t{i}")))), h.signature(&a)];
        let pairs = lsh_candidate_pairs(&sigs, 32, 4);
        assert!(pairs.contains(&(0, 2)));
        assert!(!pairs.contains(&(0, 1)));
    }
}
