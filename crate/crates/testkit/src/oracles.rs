//! Slow reference implementations used to check the production metrics.

/// Every subsequence of `a` (by index mask) checked against `b`; the longest
/// one found. Exponential in `a.len()`.
pub fn exhaustive_lcs<T: PartialEq>(a: &[T], b: &[T]) -> usize {
    assert!(a.len() <= 20, "exhaustive oracle is exponential");
    let is_subseq = |mask: u32| {
        let mut j = 0;
        for (i, x) in a.iter().enumerate() {
            if mask >> i & 1 == 0 {
                continue;
            }
            while j < b.len() && b[j] != *x {
                j += 1;
            }
            if j == b.len() {
                return false;
            }
            j += 1;
        }
        true
    };
    (0u32..1 << a.len()).filter(|&m| is_subseq(m)).map(|m| m.count_ones() as usize).max().unwrap_or(0)
}

/// All subsequences of a binary word of length `len` (bits of `word`), as
/// `(length, bits)` codes.
pub fn binary_subsequences(word: u32, len: usize) -> std::collections::BTreeSet<(usize, u32)> {
    let mut out = std::collections::BTreeSet::new();
    for mask in 0u32..1 << len {
        let mut bits = 0u32;
        let mut n = 0;
        for i in 0..len {
            if mask >> i & 1 == 1 {
                bits |= (word >> i & 1) << n;
                n += 1;
            }
        }
        out.insert((n, bits));
    }
    out
}

fn substrings(chars: &[char], n: usize) -> Vec<String> {
    if chars.len() < n {
        return Vec::new();
    }
    (0..=chars.len() - n).map(|i| chars[i..i + n].iter().collect()).collect()
}

fn occurrences(list: &[String], g: &str) -> usize {
    list.iter().filter(|x| x.as_str() == g).count()
}

/// chrF computed by listing every character n-gram as a string and counting
/// clipped matches by linear scans.
pub fn brute_chrf(hyp: &str, reference: &str, n_max: usize, beta: f64) -> f64 {
    let h: Vec<char> = hyp.chars().filter(|c| !c.is_whitespace()).collect();
    let r: Vec<char> = reference.chars().filter(|c| !c.is_whitespace()).collect();
    if h.is_empty() {
        return 0.0;
    }
    let mut precisions = Vec::new();
    let mut recalls = Vec::new();
    for n in 1..=n_max {
        let hg = substrings(&h, n);
        let rg = substrings(&r, n);
        if hg.is_empty() && rg.is_empty() {
            continue;
        }
        let mut distinct: Vec<&String> = hg.iter().collect();
        distinct.sort();
        distinct.dedup();
        let matched: usize = distinct.iter().map(|g| occurrences(&hg, g).min(occurrences(&rg, g))).sum();
        precisions.push(if hg.is_empty() { 0.0 } else { matched as f64 / hg.len() as f64 });
        recalls.push(if rg.is_empty() { 0.0 } else { matched as f64 / rg.len() as f64 });
    }
    if precisions.is_empty() {
        return 0.0;
    }
    let p = precisions.iter().sum::<f64>() / precisions.len() as f64;
    let rc = recalls.iter().sum::<f64>() / recalls.len() as f64;
    let b2 = beta * beta;
    if b2 * p + rc == 0.0 {
        0.0
    } else {
        100.0 * (1.0 + b2) * p * rc / (b2 * p + rc)
    }
}
