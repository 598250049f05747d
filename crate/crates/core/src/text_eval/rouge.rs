/// Lowercased tokens with punctuation trimmed from both ends; internal
/// hyphens and decimal points survive, other internal punctuation is
/// dropped.
pub fn tokenize(text: &str) -> Vec<String> {
    text.split_whitespace()
        .filter_map(|raw| {
            let t = raw.trim_matches(|c: char| !c.is_alphanumeric());
            let cleaned: String = t
                .chars()
                .filter(|&c| c.is_alphanumeric() || c == '-' || c == '.')
                .flat_map(char::to_lowercase)
                .collect();
            (!cleaned.is_empty()).then_some(cleaned)
        })
        .collect()
}

pub fn lcs_len<T: PartialEq>(a: &[T], b: &[T]) -> usize {
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

/// ROUGE-L F-measure (β = 1).
pub fn rouge_l(candidate: &str, reference: &str) -> f64 {
    let c = tokenize(candidate);
    let r = tokenize(reference);
    if c.is_empty() || r.is_empty() {
        return 0.0;
    }
    let l = lcs_len(&c, &r) as f64;
    if l == 0.0 {
        return 0.0;
    }
    let p = l / c.len() as f64;
    let rec = l / r.len() as f64;
    2.0 * p * rec / (p + rec)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn examples() {
        assert_eq!(rouge_l("the cat sat", "the cat sat"), 1.0);
        assert!((rouge_l("a b c d", "a c d e") - 0.75).abs() < 1e-12);
        assert_eq!(rouge_l("x y", "p q"), 0.0);
        assert_eq!(rouge_l("", "a"), 0.0);
    }

    #[test]
    fn tokens() {
        assert_eq!(tokenize("Delta (0--4 Hz): 39.8676 μV²;"), vec!["delta", "0--4", "hz", "39.8676", "μv²"]);
        assert_eq!(tokenize("High-gamma, C4."), vec!["high-gamma", "c4"]);
    }
}
