//! String distance and OCR text canonicalization.

/// Glyphs that OCR tends to pick up from list decorations.
const DECORATIVE: &[char] = &['•', '◦', '▪', '▫', '‣', '⁃', '∙', '·', '…'];

/// Unit-cost edit distance over Unicode scalar values.
pub fn levenshtein(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    if a.is_empty() {
        return b.len();
    }
    if b.is_empty() {
        return a.len();
    }

    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut cur = vec![0usize; b.len() + 1];
    for (i, ca) in a.iter().enumerate() {
        cur[0] = i + 1;
        for (j, cb) in b.iter().enumerate() {
            let sub = prev[j] + usize::from(ca != cb);
            cur[j + 1] = sub.min(prev[j + 1] + 1).min(cur[j] + 1);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

/// Canonical form used before any text comparison: decorative glyphs
/// removed, lowercased, whitespace runs collapsed to one space, trimmed.
pub fn normalize_text(s: &str) -> String {
    let lowered: String = s.chars().filter(|c| !DECORATIVE.contains(c)).collect::<String>().to_lowercase();
    let mut out = String::with_capacity(lowered.len());
    for word in lowered.split_whitespace() {
        if !out.is_empty() {
            out.push(' ');
        }
        out.push_str(word);
    }
    out
}

/// Number of characters, the unit the change ratio is measured in.
pub fn char_len(s: &str) -> usize {
    s.chars().count()
}
