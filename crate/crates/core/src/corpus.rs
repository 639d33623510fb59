//! Loading raw text and splitting it into the ordered sentence sequence that
//! serves as the discrete time axis of every analysis.
//!
//! Segmentation is rule based and fully deterministic:
//!
//! * a boundary may follow `.`, `!` or `?` (a run of them counts as one),
//!   optionally followed by closing quotes or brackets;
//! * the boundary needs whitespace after it, then an uppercase letter, a
//!   digit or an opening quote/bracket;
//! * a single `.` after one of [`ABBREVIATIONS`] never ends a sentence;
//! * pieces shorter than two characters, or without any alphanumeric
//!   character, are merged into their neighbour.
//!
//! Whitespace runs inside a sentence are collapsed to one space so that the
//! one-sentence-per-line hand-off format stays line oriented.

use std::fmt;
use std::ops::RangeInclusive;
use std::path::Path;

use thiserror::Error;

/// Words whose trailing period does not end a sentence. Compared
/// case-insensitively against the token that precedes the period.
pub const ABBREVIATIONS: &[&str] = &[
    "mr", "mrs", "dr", "prof", "st", "vs", "etc", "e.g", "i.e", "fig", "eq", "no", "al",
];

/// Smallest number of sentences any downstream analysis accepts.
pub const MIN_SENTENCES: usize = 3;

const CLOSERS: &[char] = &['"', '\'', ')', ']', '}', '\u{201D}', '\u{2019}', '\u{00BB}'];
const OPENERS: &[char] = &['"', '\'', '(', '[', '{', '\u{201C}', '\u{2018}', '\u{00AB}'];

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("{path}: file not found")]
    NotFound { path: String },
    #[error("{path}: i/o error: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: invalid UTF-8 at byte offset {offset}")]
    NotUtf8 { path: String, offset: usize },
    #[error("text is empty")]
    EmptyText,
    #[error("only {found} sentence(s); at least {MIN_SENTENCES} are required")]
    TooFewSentences { found: usize },
    #[error("line range {start}..={end} is invalid for a text with {lines} lines")]
    BadLineRange {
        start: usize,
        end: usize,
        lines: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawText {
    pub content: String,
    pub source_id: String,
}

impl RawText {
    pub fn new(content: impl Into<String>, source_id: impl Into<String>) -> Self {
        Self {
            content: normalize_newlines(&content.into()),
            source_id: source_id.into(),
        }
    }

    /// Keeps only the given 1-based, inclusive line range. Used to strip
    /// boilerplate such as license headers before segmentation.
    pub fn restrict_lines(&self, range: RangeInclusive<usize>) -> Result<RawText, CorpusError> {
        let lines: Vec<&str> = self.content.split('\n').collect();
        let (start, end) = (*range.start(), *range.end());
        if start == 0 || start > end || start > lines.len() {
            return Err(CorpusError::BadLineRange {
                start,
                end,
                lines: lines.len(),
            });
        }
        let end = end.min(lines.len());
        Ok(RawText {
            content: lines[start - 1..end].join("\n"),
            source_id: self.source_id.clone(),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SentenceSequence {
    pub sentences: Vec<String>,
    pub source_id: String,
}

impl SentenceSequence {
    pub fn len(&self) -> usize {
        self.sentences.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sentences.is_empty()
    }

    /// Checks the minimum length required for an Allan point.
    pub fn require_analyzable(&self) -> Result<(), CorpusError> {
        if self.sentences.len() < MIN_SENTENCES {
            return Err(CorpusError::TooFewSentences {
                found: self.sentences.len(),
            });
        }
        Ok(())
    }

    /// One sentence per line, each terminated by `\n`.
    pub fn to_lines(&self) -> String {
        let mut out = String::new();
        for s in &self.sentences {
            out.push_str(s);
            out.push('\n');
        }
        out
    }

    /// Parses the one-sentence-per-line format; blank lines are skipped.
    pub fn from_lines(text: &str, source_id: impl Into<String>) -> Self {
        Self {
            sentences: text
                .lines()
                .map(str::trim)
                .filter(|l| !l.is_empty())
                .map(str::to_owned)
                .collect(),
            source_id: source_id.into(),
        }
    }
}

impl fmt::Display for SentenceSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ({} sentences)", self.source_id, self.sentences.len())
    }
}

pub fn load_text(path: impl AsRef<Path>) -> Result<RawText, CorpusError> {
    let path = path.as_ref();
    let display = path.display().to_string();
    let bytes = std::fs::read(path).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => CorpusError::NotFound {
            path: display.clone(),
        },
        _ => CorpusError::Io {
            path: display.clone(),
            source: e,
        },
    })?;
    let content = String::from_utf8(bytes).map_err(|e| CorpusError::NotUtf8 {
        path: display.clone(),
        offset: e.utf8_error().valid_up_to(),
    })?;
    Ok(RawText::new(content, display))
}

fn normalize_newlines(s: &str) -> String {
    if !s.contains('\r') {
        return s.to_owned();
    }
    s.replace("\r\n", "\n").replace('\r', "\n")
}

/// Splits text into sentences. Succeeds for any non-blank text; the
/// three-sentence minimum is enforced by [`segment_for_analysis`].
pub fn segment_sentences(raw: &RawText) -> Result<SentenceSequence, CorpusError> {
    if raw.content.trim().is_empty() {
        return Err(CorpusError::EmptyText);
    }
    let chars: Vec<(usize, char)> = raw.content.char_indices().collect();
    let mut pieces: Vec<&str> = Vec::new();
    let mut start = 0usize;
    let mut i = 0usize;
    while i < chars.len() {
        let c = chars[i].1;
        if !is_terminator(c) {
            i += 1;
            continue;
        }
        let run_start = i;
        let mut j = i;
        while j < chars.len() && is_terminator(chars[j].1) {
            j += 1;
        }
        let single_period = j - run_start == 1 && c == '.';
        while j < chars.len() && CLOSERS.contains(&chars[j].1) {
            j += 1;
        }
        let mut k = j;
        while k < chars.len() && chars[k].1.is_whitespace() {
            k += 1;
        }
        let boundary = k > j
            && k < chars.len()
            && starts_sentence(chars[k].1)
            && !(single_period && is_abbreviation(&raw.content[..chars[run_start].0]));
        if boundary {
            let end = chars[j].0;
            pieces.push(&raw.content[start..end]);
            start = chars[k].0;
            i = k;
        } else {
            i = j.max(i + 1);
        }
    }
    if start < raw.content.len() {
        pieces.push(&raw.content[start..]);
    }

    let mut sentences: Vec<String> = Vec::with_capacity(pieces.len());
    let mut pending: Option<String> = None;
    for piece in pieces {
        let mut s = collapse_whitespace(piece);
        if s.is_empty() {
            continue;
        }
        if let Some(p) = pending.take() {
            s = format!("{p} {s}");
        }
        if is_fragment(&s) {
            match sentences.last_mut() {
                Some(prev) => {
                    prev.push(' ');
                    prev.push_str(&s);
                }
                None => pending = Some(s),
            }
        } else {
            sentences.push(s);
        }
    }
    if let Some(p) = pending {
        // Whole text is fragments; keep it as one sentence if it has content.
        if p.chars().any(char::is_alphanumeric) {
            sentences.push(p);
        }
    }
    if sentences.is_empty() {
        return Err(CorpusError::EmptyText);
    }
    Ok(SentenceSequence {
        sentences,
        source_id: raw.source_id.clone(),
    })
}

/// Segments and checks the minimum sentence count.
pub fn segment_for_analysis(raw: &RawText) -> Result<SentenceSequence, CorpusError> {
    let seq = segment_sentences(raw)?;
    seq.require_analyzable()?;
    Ok(seq)
}

fn is_terminator(c: char) -> bool {
    matches!(c, '.' | '!' | '?')
}

fn starts_sentence(c: char) -> bool {
    c.is_uppercase() || c.is_ascii_digit() || OPENERS.contains(&c)
}

fn is_fragment(s: &str) -> bool {
    s.chars().count() < 2 || !s.chars().any(char::is_alphanumeric)
}

/// `before` is the text up to (not including) the period.
fn is_abbreviation(before: &str) -> bool {
    let token = before
        .rsplit(char::is_whitespace)
        .next()
        .unwrap_or("")
        .trim_start_matches(|c: char| OPENERS.contains(&c));
    if token.is_empty() {
        return false;
    }
    ABBREVIATIONS.iter().any(|a| a.eq_ignore_ascii_case(token))
}

fn collapse_whitespace(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn seg(s: &str) -> Vec<String> {
        segment_sentences(&RawText::new(s, "t")).unwrap().sentences
    }

    #[test]
    fn three_terminators() {
        assert_eq!(
            seg("The cat sat. The dog ran! Did it rain?"),
            vec!["The cat sat.", "The dog ran!", "Did it rain?"]
        );
    }

    #[test]
    fn abbreviation_suppresses_split() {
        let raw = RawText::new("Dr. Smith arrived. He left.", "t");
        let seq = segment_sentences(&raw).unwrap();
        assert_eq!(seq.sentences, vec!["Dr. Smith arrived.", "He left."]);
        assert!(matches!(
            segment_for_analysis(&raw),
            Err(CorpusError::TooFewSentences { found: 2 })
        ));
    }

    #[test]
    fn every_listed_abbreviation_is_respected() {
        for abbr in [
            "Mr", "Mrs", "Dr", "Prof", "St", "vs", "etc", "e.g", "i.e", "Fig", "Eq", "No", "al",
        ] {
            let text = format!("See {abbr}. Three here. And more.");
            assert_eq!(seg(&text).len(), 2, "{abbr}");
        }
        assert_eq!(seg("Smith et al. Showed it. Fine.").len(), 2);
        assert_eq!(seg("As in (Fig. 2) it holds. Yes.").len(), 2);
    }

    #[test]
    fn no_terminator_is_one_sentence() {
        let raw = RawText::new("word word word", "t");
        assert_eq!(
            segment_sentences(&raw).unwrap().sentences,
            vec!["word word word"]
        );
        assert!(matches!(
            segment_for_analysis(&raw),
            Err(CorpusError::TooFewSentences { found: 1 })
        ));
    }

    #[test]
    fn empty_text_rejected() {
        assert!(matches!(
            segment_sentences(&RawText::new(" \n\t ", "t")),
            Err(CorpusError::EmptyText)
        ));
    }

    #[test]
    fn lowercase_continuation_does_not_split() {
        assert_eq!(
            seg("It was 3.5 m. long. Then it ended."),
            vec!["It was 3.5 m. long.", "Then it ended."]
        );
        assert_eq!(
            seg("Wait... what? No way."),
            vec!["Wait... what?", "No way."]
        );
    }

    #[test]
    fn quotes_and_brackets() {
        assert_eq!(
            seg("He said \"Go.\" Then he went. (It rained.) \"Why?\" she asked."),
            vec![
                "He said \"Go.\"",
                "Then he went.",
                "(It rained.)",
                "\"Why?\" she asked."
            ]
        );
    }

    #[test]
    fn digits_start_sentences() {
        assert_eq!(
            seg("Count them. 3 were left. Done."),
            vec!["Count them.", "3 were left.", "Done."]
        );
    }

    #[test]
    fn fragments_merge_into_previous() {
        assert_eq!(seg("It ended. X"), vec!["It ended. X"]);
        assert_eq!(
            seg("Go now! \"...\" Then stop."),
            vec!["Go now! \"...\"", "Then stop."]
        );
    }

    #[test]
    fn whitespace_inside_sentences_is_collapsed() {
        assert_eq!(
            seg("One\nline   here.\n\nTwo lines."),
            vec!["One line here.", "Two lines."]
        );
    }

    #[test]
    fn crlf_normalized() {
        assert_eq!(RawText::new("A.\r\nB.", "t").content, "A.\nB.");
        assert_eq!(RawText::new("A.\rB.", "t").content, "A.\nB.");
    }

    #[test]
    fn load_identity_crlf_and_bad_utf8() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("a.txt");
        std::fs::write(&p, "A. B.").unwrap();
        let raw = load_text(&p).unwrap();
        assert_eq!(raw.content, "A. B.");
        assert_eq!(raw.source_id, p.display().to_string());

        std::fs::write(&p, b"A.\r\nB.").unwrap();
        assert_eq!(load_text(&p).unwrap().content, "A.\nB.");

        std::fs::write(&p, b"abc\xFFdef").unwrap();
        match load_text(&p) {
            Err(CorpusError::NotUtf8 { offset, .. }) => assert_eq!(offset, 3),
            other => panic!("{other:?}"),
        }
        assert!(matches!(
            load_text(dir.path().join("missing.txt")),
            Err(CorpusError::NotFound { .. })
        ));
    }

    #[test]
    fn line_restriction() {
        let raw = RawText::new("header\nA one. B two.\nC three.\nfooter", "t");
        let cut = raw.restrict_lines(2..=3).unwrap();
        assert_eq!(cut.content, "A one. B two.\nC three.");
        assert!(raw.restrict_lines(0..=2).is_err());
        assert!(raw.restrict_lines(9..=10).is_err());
    }

    #[test]
    fn lines_roundtrip() {
        let seq = segment_sentences(&RawText::new("A b. C d. E f.", "t")).unwrap();
        let text = seq.to_lines();
        assert_eq!(text, "A b.\nC d.\nE f.\n");
        assert_eq!(SentenceSequence::from_lines(&text, "t"), seq);
    }

    fn word() -> impl Strategy<Value = String> {
        prop_oneof![
            "[A-Z][a-z]{0,6}",
            "[a-z]{1,7}",
            "[0-9]{1,3}",
            Just("Dr.".to_owned()),
            Just("e.g.".to_owned()),
            Just("etc.".to_owned()),
            Just("\"Quoted\"".to_owned()),
            Just("(paren)".to_owned()),
            Just("...".to_owned()),
        ]
    }

    fn text() -> impl Strategy<Value = String> {
        let sentence = (
            prop::collection::vec(word(), 1..8),
            prop_oneof![Just("."), Just("!"), Just("?"), Just(".\""), Just("")],
        );
        prop::collection::vec(sentence, 1..10).prop_map(|ss| {
            ss.into_iter()
                .map(|(ws, end)| format!("{}{}", ws.join(" "), end))
                .collect::<Vec<_>>()
                .join(" \n ")
        })
    }

    proptest! {
        #[test]
        fn resegmenting_joined_output_is_idempotent(t in text()) {
            if let Ok(seq) = segment_sentences(&RawText::new(t, "t")) {
                let again = segment_sentences(&RawText::new(seq.sentences.join(" "), "t")).unwrap();
                prop_assert_eq!(again.sentences, seq.sentences);
            }
        }

        #[test]
        fn only_whitespace_is_lost(t in text()) {
            if let Ok(seq) = segment_sentences(&RawText::new(t.clone(), "t")) {
                let squash = |s: &str| s.chars().filter(|c| !c.is_whitespace()).collect::<String>();
                prop_assert_eq!(squash(&seq.sentences.concat()), squash(&t));
                for s in &seq.sentences {
                    prop_assert!(!s.trim().is_empty());
                    prop_assert!(s.chars().any(char::is_alphanumeric));
                }
            }
        }

        #[test]
        fn boundaries_only_at_whitespace(t in text()) {
            if let Ok(seq) = segment_sentences(&RawText::new(t.clone(), "t")) {
                // Every non-whitespace token of the input survives intact in some sentence.
                let tokens: Vec<&str> = seq.sentences.iter().flat_map(|s| s.split(' ')).collect();
                let expected: Vec<&str> = t.split_whitespace().collect();
                prop_assert_eq!(tokens, expected);
            }
        }
    }
}
