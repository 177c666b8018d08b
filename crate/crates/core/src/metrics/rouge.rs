use crate::scalar::{ratio, Scalar};

/// Length of the longest common subsequence.
pub fn lcs_len<T: PartialEq>(a: &[T], b: &[T]) -> usize {
    if a.is_empty() || b.is_empty() {
        return 0;
    }
    let mut prev = vec![0usize; b.len() + 1];
    let mut cur = vec![0usize; b.len() + 1];
    for x in a {
        for (j, y) in b.iter().enumerate() {
            cur[j + 1] = if x == y { prev[j] + 1 } else { prev[j + 1].max(cur[j]) };
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

/// LCS F-score of one hypothesis against one reference.
pub fn rouge_l<F: Scalar, T: PartialEq>(hyp: &[T], reference: &[T]) -> F {
    let l = lcs_len(hyp, reference);
    let p: F = ratio(l, hyp.len());
    let r: F = ratio(l, reference.len());
    if p + r == F::zero() {
        F::zero()
    } else {
        F::lit(2.0) * p * r / (p + r)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn toks(s: &str) -> Vec<&str> {
        s.split_whitespace().collect()
    }

    /// Longest sequence that is a subsequence of both, by enumerating every
    /// subsequence of `a`.
    fn exhaustive_lcs(a: &[u8], b: &[u8]) -> usize {
        fn is_subseq(s: &[u8], of: &[u8]) -> bool {
            let mut it = of.iter();
            s.iter().all(|c| it.any(|d| d == c))
        }
        let mut best = 0;
        for mask in 0u32..(1 << a.len()) {
            let sub: Vec<u8> = (0..a.len()).filter(|i| mask >> i & 1 == 1).map(|i| a[i]).collect();
            if sub.len() > best && is_subseq(&sub, b) {
                best = sub.len();
            }
        }
        best
    }

    #[test]
    fn examples() {
        assert_abs_diff_eq!(rouge_l::<f64, _>(&toks("a b c d"), &toks("a b c d")), 1.0, epsilon = 1e-12);
        assert_eq!(lcs_len(&toks("a b c d"), &toks("a c b d")), 3);
        assert_eq!(exhaustive_lcs(b"abcd", b"acbd"), 3);
        assert_abs_diff_eq!(rouge_l::<f64, _>(&toks("a b c d"), &toks("a c b d")), 0.75, epsilon = 1e-12);
        assert_eq!(rouge_l::<f64, _>(&toks("a b"), &toks("c d")), 0.0);
        assert_eq!(rouge_l::<f64, &str>(&[], &toks("c d")), 0.0);
        assert_eq!(rouge_l::<f64, &str>(&[], &[]), 0.0);
        assert_abs_diff_eq!(rouge_l::<f32, _>(&toks("a b c d"), &toks("a c b d")), 0.75f32, epsilon = 1e-6);
    }

    proptest! {
        #[test]
        fn lcs_matches_exhaustive_oracle(
            a in prop::collection::vec(0u8..4, 0..=8),
            b in prop::collection::vec(0u8..4, 0..=8),
        ) {
            prop_assert_eq!(lcs_len(&a, &b), exhaustive_lcs(&a, &b));
            let f: f64 = rouge_l(&a, &b);
            prop_assert!((0.0..=1.0).contains(&f));
            prop_assert_eq!(f, rouge_l::<f64, _>(&b, &a));
        }
    }
}
