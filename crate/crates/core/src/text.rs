//! Small text helpers shared by the search index, the filters and the
//! classifiers.

use std::collections::BTreeSet;

/// Function words ignored when matching queries and checking echoes.
pub const STOPWORDS: &[&str] = &[
    "a", "about", "am", "an", "and", "any", "anything", "are", "as", "at", "be", "by", "can",
    "could", "do", "does", "for", "from", "has", "have", "how", "i", "i'm", "if", "in", "is", "it",
    "its", "me", "my", "no", "of", "on", "or", "our", "so", "that", "the", "their", "them",
    "there", "they", "this", "to", "us", "was", "we", "were", "what", "which", "will", "with",
    "would", "yes", "you", "your",
];

pub fn is_stopword(token: &str) -> bool {
    STOPWORDS.binary_search(&token).is_ok()
}

fn is_cjk(c: char) -> bool {
    matches!(c as u32,
        0x3040..=0x30ff   // kana
        | 0x3400..=0x4dbf
        | 0x4e00..=0x9fff
        | 0xf900..=0xfaff
        | 0xff66..=0xff9f)
}

/// Lowercased alphanumeric runs. With `bigrams` set, runs of CJK characters
/// are emitted as overlapping character bigrams instead of one long token.
pub fn tokenize(text: &str, bigrams: bool) -> Vec<String> {
    let mut out = Vec::new();
    for run in text.split(|c: char| !c.is_alphanumeric()) {
        if run.is_empty() {
            continue;
        }
        let lower = run.to_lowercase();
        if bigrams && lower.chars().any(is_cjk) {
            push_bigrams(&lower, &mut out);
        } else {
            out.push(lower);
        }
    }
    out
}

fn push_bigrams(run: &str, out: &mut Vec<String>) {
    let chars: Vec<char> = run.chars().collect();
    if chars.len() == 1 {
        out.push(run.to_string());
        return;
    }
    for pair in chars.windows(2) {
        out.push(pair.iter().collect());
    }
}

/// Tokens with stopwords removed.
pub fn content_tokens(text: &str) -> BTreeSet<String> {
    tokenize(text, false)
        .into_iter()
        .filter(|t| !is_stopword(t))
        .collect()
}

pub fn has_exclamation(text: &str) -> bool {
    text.contains(['!', '！'])
}

pub fn has_question_mark(text: &str) -> bool {
    text.contains(['?', '？'])
}

/// Maximal digit sequences after folding full-width digits to ASCII and
/// dropping grouping separators that sit between two digits ("1,000" -> "1000").
pub fn digit_runs(text: &str) -> Vec<String> {
    let chars: Vec<char> = text
        .chars()
        .map(|c| match c {
            '０'..='９' => char::from_u32(c as u32 - '０' as u32 + '0' as u32).unwrap_or(c),
            '，' => ',',
            _ => c,
        })
        .collect();
    let mut runs = Vec::new();
    let mut current = String::new();
    for (i, &c) in chars.iter().enumerate() {
        if c.is_ascii_digit() {
            current.push(c);
            continue;
        }
        let joins_group = c == ','
            && !current.is_empty()
            && chars.get(i + 1).is_some_and(|n| n.is_ascii_digit());
        if joins_group {
            continue;
        }
        if !current.is_empty() {
            runs.push(std::mem::take(&mut current));
        }
    }
    if !current.is_empty() {
        runs.push(current);
    }
    runs
}

/// Digit sequences of `output` that do not occur in any of `context`.
pub fn ungrounded_digits<'a, I>(output: &str, context: I) -> Vec<String>
where
    I: IntoIterator<Item = &'a str>,
{
    let known: BTreeSet<String> = context.into_iter().flat_map(digit_runs).collect();
    digit_runs(output)
        .into_iter()
        .filter(|run| !known.contains(run))
        .collect()
}

/// Case, whitespace and punctuation folded form used for deduplication.
pub fn fold(text: &str) -> String {
    tokenize(text, false).join(" ")
}

/// First sentence of `text`, terminator included when present.
pub fn first_sentence(text: &str) -> &str {
    let text = text.trim();
    for (i, c) in text.char_indices() {
        if matches!(c, '.' | '!' | '?' | '。' | '！' | '？') {
            let end = i + c.len_utf8();
            let at_boundary = text[end..].chars().next().is_none_or(char::is_whitespace);
            if at_boundary || !c.is_ascii() {
                return &text[..end];
            }
        }
    }
    text
}

/// Truncate to at most `max_chars` characters, preferring a word boundary.
pub fn truncate_chars(text: &str, max_chars: usize) -> String {
    if text.chars().count() <= max_chars {
        return text.to_string();
    }
    let cut: String = text.chars().take(max_chars).collect();
    match cut.rfind(char::is_whitespace) {
        Some(pos) if pos > max_chars / 2 => cut[..pos].trim_end().to_string(),
        _ => cut,
    }
}

/// FNV-1a over the given parts, with a separator byte between parts. Stable
/// across builds and platforms, unlike the std hasher.
pub fn stable_hash(parts: &[&[u8]]) -> u64 {
    const OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
    const PRIME: u64 = 0x0000_0100_0000_01b3;
    let mut h = OFFSET;
    for part in parts {
        for b in part.iter().chain(std::iter::once(&0xffu8)) {
            h ^= u64::from(*b);
            h = h.wrapping_mul(PRIME);
        }
    }
    h
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stopwords_sorted_for_binary_search() {
        let mut sorted = STOPWORDS.to_vec();
        sorted.sort_unstable();
        assert_eq!(sorted, STOPWORDS);
    }

    #[test]
    fn digit_runs_fold_grouping() {
        assert_eq!(digit_runs("Adult: 1,000yen, child 700"), vec!["1000", "700"]);
        assert_eq!(digit_runs("11:00 - 21:00"), vec!["11", "00", "21", "00"]);
        assert_eq!(digit_runs("１，２００円"), vec!["1200"]);
        assert_eq!(digit_runs("a, 5"), vec!["5"]);
        assert!(digit_runs("no digits").is_empty());
    }

    #[test]
    fn ungrounded_digits_detects_fabrication() {
        let ctx = ["Adult: 1,000yen Child: 700yen"];
        assert!(ungrounded_digits("It costs 1000 yen.", ctx).is_empty());
        assert_eq!(ungrounded_digits("It costs 1,500 yen.", ctx), vec!["1500"]);
        assert_eq!(ungrounded_digits("Only 100 yen", ctx), vec!["100"]);
    }

    #[test]
    fn tokenize_bigrams_for_cjk() {
        assert_eq!(tokenize("Ticket PRICE!", false), vec!["ticket", "price"]);
        assert_eq!(tokenize("料金は", true), vec!["料金", "金は"]);
        assert_eq!(tokenize("料金は", false), vec!["料金は"]);
    }

    #[test]
    fn first_sentence_and_truncate() {
        assert_eq!(first_sentence("Daiba Park is old. It has cannons."), "Daiba Park is old.");
        assert_eq!(first_sentence("No terminator"), "No terminator");
        assert_eq!(first_sentence("1.5 km away. Next"), "1.5 km away.");
        assert_eq!(truncate_chars("one two three", 9), "one two");
        assert_eq!(truncate_chars("short", 10), "short");
    }

    #[test]
    fn fold_ignores_case_and_punctuation() {
        assert_eq!(fold("Do you like  History?"), fold("do you like history"));
    }

    #[test]
    fn stable_hash_known_value() {
        // FNV-1a of the single byte 0xff from the standard offset basis.
        let expected = (0xcbf2_9ce4_8422_2325u64 ^ 0xff).wrapping_mul(0x0000_0100_0000_01b3);
        assert_eq!(stable_hash(&[b""]), expected);
        assert_ne!(stable_hash(&[b"ab", b"c"]), stable_hash(&[b"a", b"bc"]));
    }
}
