use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChrfConfig {
    pub n_max: usize,
    pub beta: f64,
}

impl Default for ChrfConfig {
    fn default() -> Self {
        Self { n_max: 6, beta: 2.0 }
    }
}

fn grams(s: &[char], n: usize) -> HashMap<&[char], usize> {
    let mut m = HashMap::new();
    if s.len() >= n {
        for w in s.windows(n) {
            *m.entry(w).or_insert(0) += 1;
        }
    }
    m
}

/// `(matches, hypothesis total, reference total)` of character n-grams of
/// order `n`, ignoring whitespace.
pub fn char_ngram_stats(hyp: &[char], reference: &[char], n: usize) -> (usize, usize, usize) {
    let (h, r) = (grams(hyp, n), grams(reference, n));
    let matches = h.iter().map(|(g, &c)| c.min(r.get(g).copied().unwrap_or(0))).sum();
    (matches, hyp.len().saturating_sub(n - 1), reference.len().saturating_sub(n - 1))
}

fn strip_ws(s: &str) -> Vec<char> {
    s.chars().filter(|c| !c.is_whitespace()).collect()
}

/// Sentence chrF in `[0, 100]`.
pub fn chrf<F: Scalar>(hyp: &str, reference: &str, cfg: &ChrfConfig) -> F {
    let (h, r) = (strip_ws(hyp), strip_ws(reference));
    if h.is_empty() {
        return F::zero();
    }
    let (mut p_sum, mut r_sum, mut orders) = (F::zero(), F::zero(), 0usize);
    for n in 1..=cfg.n_max {
        let (m, th, tr) = char_ngram_stats(&h, &r, n);
        if th == 0 && tr == 0 {
            continue;
        }
        orders += 1;
        if th > 0 {
            p_sum = p_sum + F::from_count(m) / F::from_count(th);
        }
        if tr > 0 {
            r_sum = r_sum + F::from_count(m) / F::from_count(tr);
        }
    }
    if orders == 0 {
        return F::zero();
    }
    let (p, rc) = (p_sum / F::from_count(orders), r_sum / F::from_count(orders));
    let b2 = F::lit(cfg.beta * cfg.beta);
    let denom = b2 * p + rc;
    if denom == F::zero() {
        F::zero()
    } else {
        F::lit(100.0) * (F::one() + b2) * p * rc / denom
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn examples() {
        let cfg = ChrfConfig::default();
        assert_abs_diff_eq!(chrf::<f64>("assign a = b;", "assign a = b;", &cfg), 100.0, epsilon = 1e-9);
        assert_eq!(chrf::<f64>("abc", "xyz", &cfg), 0.0);
        assert_eq!(chrf::<f64>("", "xyz", &cfg), 0.0);
        assert_eq!(chrf::<f64>("   ", "xyz", &cfg), 0.0);
        let two = ChrfConfig { n_max: 2, beta: 2.0 };
        let v: f64 = chrf("ab", "abc", &two);
        assert_abs_diff_eq!(v, 100.0 * 35.0 / 55.0, epsilon = 1e-9);
        assert_eq!(format!("{v:.2}"), "63.64");
        assert_eq!(format!("{:.2}", chrf::<f32>("ab", "abc", &two)), "63.64");
    }

    #[test]
    fn whitespace_is_ignored() {
        let cfg = ChrfConfig::default();
        let a: f64 = chrf("a b\tc\nd", "abcd", &cfg);
        assert_abs_diff_eq!(a, 100.0, epsilon = 1e-9);
    }

    #[test]
    fn one_sided_orders_count_as_zero() {
        // hyp "a": order 1 only; ref "ab" has orders 1 and 2.
        let cfg = ChrfConfig { n_max: 2, beta: 1.0 };
        // P = (1 + 0)/2, R = (1/2 + 0)/2
        let (p, r) = (0.5f64, 0.25f64);
        assert_abs_diff_eq!(chrf::<f64>("a", "ab", &cfg), 100.0 * 2.0 * p * r / (p + r), epsilon = 1e-9);
    }
}
