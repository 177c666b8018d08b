//! Corpora with known near-duplicate structure.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone)]
pub struct PlantedFile {
    pub name: String,
    pub tokens: BTreeSet<String>,
    pub stars: u64,
}

impl PlantedFile {
    /// Space-joined tokens; lexes back to exactly `tokens`.
    pub fn content(&self) -> String {
        self.tokens.iter().cloned().collect::<Vec<_>>().join(" ")
    }
}

#[derive(Debug, Clone)]
pub struct PlantedCorpus {
    pub files: Vec<PlantedFile>,
    /// Planted partition as sets of file names, including singletons.
    pub clusters: Vec<BTreeSet<String>>,
}

pub fn jaccard(a: &BTreeSet<String>, b: &BTreeSet<String>) -> f64 {
    let inter = a.intersection(b).count();
    let union = a.len() + b.len() - inter;
    if union == 0 {
        1.0
    } else {
        inter as f64 / union as f64
    }
}

impl PlantedCorpus {
    /// Unordered pairs of names in the same planted cluster.
    pub fn planted_pairs(&self) -> BTreeSet<(String, String)> {
        let mut out = BTreeSet::new();
        for c in &self.clusters {
            let v: Vec<&String> = c.iter().collect();
            for i in 0..v.len() {
                for j in i + 1..v.len() {
                    out.insert((v[i].clone(), v[j].clone()));
                }
            }
        }
        out
    }

    /// Planted pairs whose true Jaccard is at least `min`.
    pub fn planted_pairs_at_least(&self, min: f64) -> BTreeSet<(String, String)> {
        let by_name: std::collections::BTreeMap<&str, &PlantedFile> =
            self.files.iter().map(|f| (f.name.as_str(), f)).collect();
        self.planted_pairs()
            .into_iter()
            .filter(|(a, b)| jaccard(&by_name[a.as_str()].tokens, &by_name[b.as_str()].tokens) >= min)
            .collect()
    }
}

/// `n_files` token-set files: families of a base set plus variants with two
/// tokens swapped out (pairwise Jaccard >= 36/44), near-miss decoys that
/// share about 70% of a family base, and unrelated singletons.
pub fn planted_corpus(n_files: usize, seed: u64) -> PlantedCorpus {
    const BASE: usize = 40;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut fresh = 0usize;
    let mut tok = |prefix: &str| {
        fresh += 1;
        format!("{prefix}{fresh:05}")
    };
    let mut files = Vec::new();
    let mut clusters = Vec::new();
    let mut family = 0usize;
    while files.len() < n_files {
        let left = n_files - files.len();
        let roll: f64 = rng.gen();
        if roll < 0.6 && left >= 2 {
            family += 1;
            let size = rng.gen_range(2..=5).min(left);
            let base: Vec<String> = (0..BASE).map(|_| tok("t")).collect();
            let mut cluster = BTreeSet::new();
            for v in 0..size {
                let mut set: Vec<String> = base.clone();
                if v > 0 {
                    let mut idx: Vec<usize> = (0..BASE).collect();
                    idx.shuffle(&mut rng);
                    for &i in &idx[..2] {
                        set[i] = tok("v");
                    }
                }
                let name = format!("fam{family:03}_v{v}");
                cluster.insert(name.clone());
                files.push(PlantedFile { name, tokens: set.into_iter().collect(), stars: rng.gen_range(0..50) });
            }
            clusters.push(cluster);
            if files.len() < n_files && rng.gen_bool(0.3) {
                // 28 shared of 40 each: Jaccard 28/52
                let mut set: Vec<String> = base.clone();
                set.shuffle(&mut rng);
                set.truncate(28);
                set.extend((0..12).map(|_| tok("d")));
                let name = format!("decoy{family:03}");
                clusters.push([name.clone()].into());
                files.push(PlantedFile { name, tokens: set.into_iter().collect(), stars: rng.gen_range(0..50) });
            }
        } else {
            let name = format!("single{:03}", files.len());
            let len = rng.gen_range(10..60);
            clusters.push([name.clone()].into());
            files.push(PlantedFile {
                name,
                tokens: (0..len).map(|_| tok("s")).collect(),
                stars: rng.gen_range(0..50),
            });
        }
    }
    files.shuffle(&mut rng);
    clusters.sort();
    PlantedCorpus { files, clusters }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn planted_structure_holds() {
        let c = planted_corpus(200, 1);
        assert_eq!(c.files.len(), 200);
        assert_eq!(c.clusters.iter().map(BTreeSet::len).sum::<usize>(), 200);
        let by_name: std::collections::BTreeMap<&str, &PlantedFile> =
            c.files.iter().map(|f| (f.name.as_str(), f)).collect();
        let planted = c.planted_pairs();
        assert!(planted.len() > 50);
        for (i, a) in c.files.iter().enumerate() {
            for b in &c.files[i + 1..] {
                let j = jaccard(&a.tokens, &b.tokens);
                let key = if a.name < b.name { (a.name.clone(), b.name.clone()) } else { (b.name.clone(), a.name.clone()) };
                if planted.contains(&key) {
                    assert!(j >= 0.8, "{key:?} {j}");
                } else {
                    assert!(j < 0.6, "{key:?} {j}");
                }
            }
        }
        assert!(by_name.values().all(|f| !f.tokens.is_empty()));
    }
}
