use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BleuScore<F> {
    /// Score with add-one smoothing applied to orders with no matches.
    pub bleu: F,
    pub unsmoothed: F,
    /// Whether any order was smoothed.
    pub smoothed: bool,
    /// Clipped matches and hypothesis n-gram totals per order, from 1.
    pub matches: Vec<usize>,
    pub totals: Vec<usize>,
    pub brevity_penalty: F,
    pub hyp_len: usize,
    pub ref_len: usize,
}

fn ngram_counts<T: Eq + std::hash::Hash>(toks: &[T], n: usize) -> HashMap<&[T], usize> {
    let mut m = HashMap::new();
    if n > 0 && toks.len() >= n {
        for w in toks.windows(n) {
            *m.entry(w).or_insert(0) += 1;
        }
    }
    m
}

/// Corpus BLEU over `(hypothesis, reference)` token sequences with uniform
/// weights over orders `1..=max_n`.
pub fn corpus_bleu<F: Scalar, T: Eq + std::hash::Hash>(pairs: &[(Vec<T>, Vec<T>)], max_n: usize) -> BleuScore<F> {
    assert!(max_n >= 1, "max_n must be at least 1");
    let mut matches = vec![0usize; max_n];
    let mut totals = vec![0usize; max_n];
    let (mut hyp_len, mut ref_len) = (0usize, 0usize);
    for (hyp, reference) in pairs {
        hyp_len += hyp.len();
        ref_len += reference.len();
        for n in 1..=max_n {
            let h = ngram_counts(hyp, n);
            let r = ngram_counts(reference, n);
            totals[n - 1] += h.values().sum::<usize>();
            matches[n - 1] += h.iter().map(|(g, &c)| c.min(r.get(g).copied().unwrap_or(0))).sum::<usize>();
        }
    }
    let brevity_penalty = if hyp_len == 0 {
        F::zero()
    } else {
        (F::one() - F::from_count(ref_len) / F::from_count(hyp_len)).min(F::zero()).exp()
    };
    let weight = F::one() / F::from_count(max_n);
    let mut smoothed = false;
    let mut log_sum = F::zero();
    let mut any_zero = false;
    for n in 0..max_n {
        let (m, t) = if matches[n] == 0 {
            smoothed = true;
            any_zero = true;
            (matches[n] + 1, totals[n] + 1)
        } else {
            (matches[n], totals[n])
        };
        log_sum = log_sum + weight * (F::from_count(m) / F::from_count(t)).ln();
    }
    let bleu = brevity_penalty * log_sum.exp();
    let unsmoothed = if any_zero {
        F::zero()
    } else {
        let raw: F = (0..max_n)
            .map(|n| weight * (F::from_count(matches[n]) / F::from_count(totals[n])).ln())
            .fold(F::zero(), |a, b| a + b);
        brevity_penalty * raw.exp()
    };
    BleuScore { bleu, unsmoothed, smoothed, matches, totals, brevity_penalty, hyp_len, ref_len }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn pair(h: &str, r: &str) -> (Vec<String>, Vec<String>) {
        let t = |s: &str| s.split_whitespace().map(String::from).collect();
        (t(h), t(r))
    }

    #[test]
    fn identity_is_one() {
        let pairs = vec![pair("a b c d", "a b c d"), pair("x y z w v", "x y z w v")];
        let s: BleuScore<f64> = corpus_bleu(&pairs, 4);
        assert_abs_diff_eq!(s.bleu, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(s.unsmoothed, 1.0, epsilon = 1e-12);
        assert!(!s.smoothed);
    }

    #[test]
    fn short_hypothesis_brevity() {
        let s: BleuScore<f64> = corpus_bleu(&[pair("a b c d", "a b c d e")], 4);
        assert_eq!(s.matches, vec![4, 3, 2, 1]);
        assert_eq!(s.totals, vec![4, 3, 2, 1]);
        assert_abs_diff_eq!(s.brevity_penalty, (-0.25f64).exp(), epsilon = 1e-12);
        assert_abs_diff_eq!(s.bleu, 0.778_800_783_071_404_9, epsilon = 1e-9);
        assert_abs_diff_eq!(s.unsmoothed, s.bleu, epsilon = 1e-15);
    }

    #[test]
    fn zero_overlap_is_zero_before_smoothing() {
        let s: BleuScore<f64> = corpus_bleu(&[pair("a b c d", "e f g h"), pair("p q", "r s")], 4);
        assert_eq!(s.unsmoothed, 0.0);
        assert!(s.smoothed);
        // every order smoothed: (1/7 * 1/5 * 1/3 * 1/2)^(1/4), BP = 1
        let expected = (1.0f64 / 7.0 / 5.0 / 3.0 / 2.0).powf(0.25);
        assert_abs_diff_eq!(s.bleu, expected, epsilon = 1e-12);
    }

    #[test]
    fn empty_hypothesis_scores_zero() {
        let s: BleuScore<f64> = corpus_bleu(&[pair("", "a b c")], 4);
        assert_eq!(s.bleu, 0.0);
        assert_eq!(s.brevity_penalty, 0.0);
    }

    #[test]
    fn clipping() {
        // "the the the the" vs "the cat": unigram clipped to 1 of 4
        let s: BleuScore<f64> = corpus_bleu(&[pair("the the the the", "the cat")], 1);
        assert_eq!(s.matches, vec![1]);
        assert_abs_diff_eq!(s.bleu, 0.25, epsilon = 1e-12);
    }

    proptest! {
        #[test]
        fn range_and_order_invariance(
            raw in prop::collection::vec((prop::collection::vec(0u8..5, 0..12), prop::collection::vec(0u8..5, 1..12)), 1..6),
        ) {
            let s: BleuScore<f64> = corpus_bleu(&raw, 4);
            prop_assert!((0.0..=1.0).contains(&s.bleu));
            prop_assert!((0.0..=1.0).contains(&s.unsmoothed));
            let mut rev = raw.clone();
            rev.reverse();
            let r: BleuScore<f64> = corpus_bleu(&rev, 4);
            prop_assert_eq!(s.matches, r.matches);
            prop_assert!((s.bleu - r.bleu).abs() < 1e-12);
        }
    }
}
