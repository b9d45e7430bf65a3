//! Shared text utilities: Unicode word tokenization, n-gram extraction,
//! and a sentence splitter tuned for noisy clinical notes.

use std::collections::HashSet;

/// Tokenize into Unicode words: maximal runs of letters and digits.
/// Punctuation is dropped; `lowercase` folds case before emitting.
pub fn tokenize(text: &str, lowercase: bool) -> Vec<String> {
    let mut tokens = Vec::new();
    let mut current = String::new();
    for ch in text.chars() {
        if ch.is_alphanumeric() {
            current.push(ch);
        } else if !current.is_empty() {
            tokens.push(std::mem::take(&mut current));
        }
    }
    if !current.is_empty() {
        tokens.push(current);
    }
    if lowercase {
        tokens.iter_mut().for_each(|t| *t = t.to_lowercase());
    }
    tokens
}

/// Unique word n-grams of a token sequence. Empty when fewer than n tokens.
pub fn unique_ngrams(tokens: &[String], n: usize) -> HashSet<Vec<String>> {
    if n == 0 || tokens.len() < n {
        return HashSet::new();
    }
    tokens.windows(n).map(|w| w.to_vec()).collect()
}

/// Default abbreviation stop-list for the sentence splitter: a trailing
/// period after these words is not a sentence boundary. Mixed Latin and
/// Cyrillic entries; matching is case-insensitive.
pub const DEFAULT_ABBREVIATIONS: &[&str] = &[
    "dr", "mr", "mrs", "ms", "prof", "st", "vs", "e.g", "i.e", "mg", "ml",
    "г", "гг", "др", "см", "мл", "мг", "т", "д", "п", "рис", "табл", "ст",
];

/// Byte offsets of sentence starts after a boundary. A boundary is `.`,
/// `!` or `?` followed by whitespace and an uppercase letter or digit,
/// unless the word before the period is in the abbreviation stop-list.
/// The returned offsets point at the first character of the next sentence,
/// so `text[..off]` + `text[off..]` reconstructs the input exactly.
pub fn sentence_boundaries(text: &str, abbreviations: &[&str]) -> Vec<usize> {
    let chars: Vec<(usize, char)> = text.char_indices().collect();
    let mut boundaries = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let (_, ch) = chars[i];
        if matches!(ch, '.' | '!' | '?') {
            // Consume a run of closing punctuation (e.g. "?!", "...").
            let mut j = i + 1;
            while j < chars.len() && matches!(chars[j].1, '.' | '!' | '?' | ')' | '"' | '»') {
                j += 1;
            }
            let mut k = j;
            while k < chars.len() && chars[k].1.is_whitespace() {
                k += 1;
            }
            let has_ws = k > j;
            let next_starts_sentence =
                k < chars.len() && (chars[k].1.is_uppercase() || chars[k].1.is_numeric());
            if has_ws && next_starts_sentence && !(ch == '.' && is_abbreviation(&chars, i, abbreviations))
            {
                boundaries.push(chars[k].0);
            }
            i = j;
        } else {
            i += 1;
        }
    }
    boundaries
}

/// Split into sentences (non-empty, trimmed). Convenience over
/// [`sentence_boundaries`] for callers that do not need exact offsets.
pub fn split_sentences(text: &str, abbreviations: &[&str]) -> Vec<String> {
    let mut out = Vec::new();
    let mut start = 0;
    for off in sentence_boundaries(text, abbreviations) {
        let s = text[start..off].trim();
        if !s.is_empty() {
            out.push(s.to_string());
        }
        start = off;
    }
    let last = text[start..].trim();
    if !last.is_empty() {
        out.push(last.to_string());
    }
    out
}

fn is_abbreviation(chars: &[(usize, char)], dot: usize, abbreviations: &[&str]) -> bool {
    let mut word = String::new();
    let mut i = dot;
    while i > 0 {
        let prev = chars[i - 1].1;
        if prev.is_alphabetic() || prev == '.' {
            word.push(prev);
            i -= 1;
        } else {
            break;
        }
    }
    if word.is_empty() {
        return false;
    }
    let word: String = word.chars().rev().collect::<String>().to_lowercase();
    let word = word.trim_start_matches('.');
    abbreviations.iter().any(|a| a.eq_ignore_ascii_case(word) || *a == word)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tokenizes_unicode_words() {
        assert_eq!(tokenize("Pain, nausea; fever!", true), ["pain", "nausea", "fever"]);
        assert_eq!(tokenize("Боль в спине 2 дня", true), ["боль", "в", "спине", "2", "дня"]);
        assert_eq!(tokenize("", true), Vec::<String>::new());
    }

    #[test]
    fn ngrams_counted_as_sets() {
        let toks = tokenize("a b a b", true);
        assert_eq!(unique_ngrams(&toks, 1).len(), 2);
        assert_eq!(unique_ngrams(&toks, 2).len(), 2); // "a b", "b a"
        assert_eq!(unique_ngrams(&toks, 5).len(), 0);
    }

    #[test]
    fn splits_on_terminal_punctuation() {
        let text = "Patient reports pain. Fever started yesterday! Any allergies? No known ones.";
        let sents = split_sentences(text, DEFAULT_ABBREVIATIONS);
        assert_eq!(sents.len(), 4);
        assert_eq!(sents[0], "Patient reports pain.");
        assert_eq!(sents[2], "Any allergies?");
    }

    #[test]
    fn boundaries_reconstruct_text() {
        let text = "First sentence.  Second one. Third.";
        for off in sentence_boundaries(text, DEFAULT_ABBREVIATIONS) {
            let (a, b) = text.split_at(off);
            assert_eq!(format!("{a}{b}"), text);
        }
    }

    #[test]
    fn abbreviations_do_not_split() {
        let text = "Seen by Dr. Smith today. Follow up in 2 weeks.";
        let sents = split_sentences(text, DEFAULT_ABBREVIATIONS);
        assert_eq!(sents.len(), 2);
        assert!(sents[0].contains("Dr. Smith"));
    }

    #[test]
    fn lowercase_continuation_not_a_boundary() {
        let text = "Pain since 2021. and ongoing";
        assert_eq!(split_sentences(text, DEFAULT_ABBREVIATIONS).len(), 1);
    }

    #[test]
    fn numeric_sentence_start_is_a_boundary() {
        let text = "Symptoms for a week. 2 days of fever.";
        assert_eq!(split_sentences(text, DEFAULT_ABBREVIATIONS).len(), 2);
    }

    #[test]
    fn cyrillic_sentences() {
        let text = "Жалобы на боль в животе. Температура повышена.";
        let sents = split_sentences(text, DEFAULT_ABBREVIATIONS);
        assert_eq!(sents.len(), 2);
    }
}
