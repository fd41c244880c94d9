//! Timeline parsing, text cleaning and per-user document construction.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::io::BufRead;
use std::sync::OnceLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Messages kept per user when no cap is configured.
pub const DEFAULT_PER_USER_CAP: usize = 300;

/// Messages bundled into one topic-modelling document.
pub const DEFAULT_DOCUMENT_LENGTH: usize = 20;

const MAX_TEXT_CHARS: usize = 280;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Message {
    pub id: String,
    pub author: String,
    pub timestamp: i64,
    pub text: String,
    pub is_repost: bool,
}

/// A user's messages, oldest first.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Timeline {
    pub user: String,
    pub messages: Vec<Message>,
}

impl Timeline {
    pub fn message_ids(&self) -> impl Iterator<Item = &str> {
        self.messages.iter().map(|m| m.id.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Token {
    Word(String),
    Url(String),
}

impl Token {
    pub fn word(w: impl Into<String>) -> Self {
        Token::Word(w.into())
    }

    pub fn url(u: impl Into<String>) -> Self {
        Token::Url(u.into())
    }

    pub fn as_word(&self) -> Option<&str> {
        match self {
            Token::Word(w) => Some(w),
            Token::Url(_) => None,
        }
    }
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Token::Word(w) => f.write_str(w),
            Token::Url(u) => write!(f, "<url:{u}>"),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct TokenList(pub Vec<Token>);

impl TokenList {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Token> {
        self.0.iter()
    }

    pub fn as_slice(&self) -> &[Token] {
        &self.0
    }

    /// Space-joined rendering; re-tokenizing it yields the same list when no
    /// URL tokens are present.
    pub fn join(&self) -> String {
        self.0
            .iter()
            .map(ToString::to_string)
            .collect::<Vec<_>>()
            .join(" ")
    }
}

impl FromIterator<Token> for TokenList {
    fn from_iter<I: IntoIterator<Item = Token>>(iter: I) -> Self {
        TokenList(iter.into_iter().collect())
    }
}

/// How URLs are treated while tokenizing.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TokenMode {
    /// Each URL becomes one token (near-duplicate grouping).
    Grouping,
    /// URLs are dropped (topic modelling).
    Topic,
}

/// Lowercased stop-word set.
#[derive(Debug, Clone, Default)]
pub struct StopWords(HashSet<String>);

impl StopWords {
    /// The bundled English list.
    pub fn english() -> Self {
        Self::from_lines(include_str!("../data/stopwords_en.txt"))
    }

    pub fn from_lines(text: &str) -> Self {
        StopWords(
            text.lines()
                .map(|l| l.trim().to_lowercase())
                .filter(|l| !l.is_empty())
                .collect(),
        )
    }

    pub fn contains(&self, word: &str) -> bool {
        self.0.contains(word)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl<S: Into<String>> FromIterator<S> for StopWords {
    fn from_iter<I: IntoIterator<Item = S>>(iter: I) -> Self {
        StopWords(iter.into_iter().map(|s| s.into().to_lowercase()).collect())
    }
}

fn punctuation() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"\p{P}+").expect("static regex"))
}

fn is_non_printable(c: char) -> bool {
    c.is_control()
        || ('\u{FE00}'..='\u{FE0F}').contains(&c)
        || ('\u{E0100}'..='\u{E01EF}').contains(&c)
}

fn find_url_start(chunk: &str) -> Option<usize> {
    let lower = chunk.to_ascii_lowercase();
    [lower.find("http://"), lower.find("https://")]
        .into_iter()
        .flatten()
        .min()
}

fn push_words(fragment: &str, stopwords: &StopWords, out: &mut Vec<Token>) {
    for piece in punctuation().split(fragment) {
        if piece.is_empty() {
            continue;
        }
        let word = piece.to_lowercase();
        if !stopwords.contains(&word) {
            out.push(Token::Word(word));
        }
    }
}

/// Lowercases, strips punctuation and non-printable characters, and drops
/// stop words. URLs (`http://` / `https://` prefixed) are kept as single
/// tokens in [`TokenMode::Grouping`] and removed in [`TokenMode::Topic`].
pub fn clean_and_tokenize(text: &str, stopwords: &StopWords, mode: TokenMode) -> TokenList {
    let cleaned: String = text.chars().filter(|&c| !is_non_printable(c)).collect();
    let mut out = Vec::new();
    for chunk in cleaned.split_whitespace() {
        match find_url_start(chunk) {
            Some(start) => {
                push_words(&chunk[..start], stopwords, &mut out);
                let url = chunk[start..]
                    .trim_end_matches(['.', ',', ';', ':', '!', '?', ')', ']', '}', '"', '\'']);
                let has_body = url
                    .split_once("://")
                    .is_some_and(|(_, rest)| !rest.is_empty());
                if mode == TokenMode::Grouping && has_body {
                    out.push(Token::Url(url.to_string()));
                }
            }
            None => push_words(chunk, stopwords, &mut out),
        }
    }
    TokenList(out)
}

/// Tokenizer configuration bundled for repeated use.
#[derive(Debug, Clone)]
pub struct Tokenizer {
    pub stopwords: StopWords,
    pub mode: TokenMode,
}

impl Tokenizer {
    pub fn new(stopwords: StopWords, mode: TokenMode) -> Self {
        Self { stopwords, mode }
    }

    pub fn tokenize(&self, text: &str) -> TokenList {
        clean_and_tokenize(text, &self.stopwords, self.mode)
    }
}

/// Up to `l` consecutive messages of one user, tokenized together.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Document {
    pub doc_id: String,
    pub user: String,
    pub tokens: TokenList,
    pub source_message_ids: Vec<String>,
}

/// Splits a timeline into documents of `l` messages; the final document
/// keeps the remainder.
pub fn build_documents(
    timeline: &Timeline,
    l: usize,
    tokenizer: &Tokenizer,
) -> Result<Vec<Document>> {
    if l == 0 {
        return Err(Error::invalid("document length must be at least 1"));
    }
    Ok(timeline
        .messages
        .chunks(l)
        .enumerate()
        .map(|(i, chunk)| Document {
            doc_id: format!("{}#{}", timeline.user, i),
            user: timeline.user.clone(),
            tokens: chunk
                .iter()
                .flat_map(|m| tokenizer.tokenize(&m.text).0)
                .collect(),
            source_message_ids: chunk.iter().map(|m| m.id.clone()).collect(),
        })
        .collect())
}

#[derive(Debug, Deserialize)]
struct RawRecord {
    user: String,
    id: String,
    ts: i64,
    text: String,
    #[serde(default)]
    repost: bool,
}

/// Outcome of parsing a timeline stream.
#[derive(Debug, Default)]
pub struct ParsedTimelines {
    /// Timelines keyed by user, truncated to the per-user cap.
    pub timelines: BTreeMap<String, Timeline>,
    /// Malformed records, each carrying its 1-based line number.
    pub errors: Vec<Error>,
    /// Records rejected because the user already had that message id.
    pub duplicates: usize,
    /// Messages dropped by the per-user cap.
    pub truncated: usize,
}

impl ParsedTimelines {
    pub fn message_count(&self) -> usize {
        self.timelines.values().map(|t| t.messages.len()).sum()
    }

    pub fn into_timelines(self) -> Vec<Timeline> {
        self.timelines.into_values().collect()
    }
}

fn parse_record(line: &str) -> std::result::Result<Message, String> {
    let raw: RawRecord = serde_json::from_str(line).map_err(|e| e.to_string())?;
    if raw.user.trim().is_empty() {
        return Err("empty user".into());
    }
    if raw.id.is_empty() {
        return Err("empty message id".into());
    }
    if raw.text.trim().is_empty() {
        return Err("empty text".into());
    }
    if raw.text.chars().count() > MAX_TEXT_CHARS {
        return Err(format!("text longer than {MAX_TEXT_CHARS} characters"));
    }
    Ok(Message {
        id: raw.id,
        author: raw.user,
        timestamp: raw.ts,
        text: raw.text,
        is_repost: raw.repost,
    })
}

/// Parses line-delimited JSON records (`user`, `id`, `ts`, `text`, optional
/// `repost`) into per-user timelines holding only the `per_user_cap` newest
/// messages. Blank lines are ignored.
pub fn parse_timelines<R: BufRead>(input: R, per_user_cap: usize) -> Result<ParsedTimelines> {
    let mut out = ParsedTimelines::default();
    let mut seen: HashSet<(String, String)> = HashSet::new();
    let mut by_user: BTreeMap<String, Vec<Message>> = BTreeMap::new();

    for (idx, line) in input.lines().enumerate() {
        let line_no = idx + 1;
        let line = line.map_err(|e| Error::Record {
            line: line_no,
            message: e.to_string(),
        })?;
        if line.trim().is_empty() {
            continue;
        }
        match parse_record(&line) {
            Ok(msg) => {
                if !seen.insert((msg.author.clone(), msg.id.clone())) {
                    out.duplicates += 1;
                    continue;
                }
                by_user.entry(msg.author.clone()).or_default().push(msg);
            }
            Err(message) => out.errors.push(Error::Record {
                line: line_no,
                message,
            }),
        }
    }

    for (user, mut messages) in by_user {
        messages.sort_by(|a, b| a.timestamp.cmp(&b.timestamp).then_with(|| a.id.cmp(&b.id)));
        if messages.len() > per_user_cap {
            let excess = messages.len() - per_user_cap;
            out.truncated += excess;
            messages.drain(..excess);
        }
        out.timelines
            .insert(user.clone(), Timeline { user, messages });
    }
    Ok(out)
}

/// Serializes a message back into the timeline record format.
pub fn message_record(msg: &Message) -> String {
    let mut value = serde_json::json!({
        "user": msg.author,
        "id": msg.id,
        "ts": msg.timestamp,
        "text": msg.text,
    });
    if msg.is_repost {
        value["repost"] = serde_json::Value::Bool(true);
    }
    value.to_string()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn words(ws: &[&str]) -> TokenList {
        ws.iter().map(|w| Token::word(*w)).collect()
    }

    fn record(user: &str, id: &str, ts: i64, text: &str) -> String {
        message_record(&Message {
            id: id.into(),
            author: user.into(),
            timestamp: ts,
            text: text.into(),
            is_repost: false,
        })
    }

    fn timeline(n: usize) -> Timeline {
        Timeline {
            user: "u".into(),
            messages: (0..n)
                .map(|i| Message {
                    id: format!("m{i:03}"),
                    author: "u".into(),
                    timestamp: i as i64,
                    text: format!("word{i} other"),
                    is_repost: false,
                })
                .collect(),
        }
    }

    #[test]
    fn empty_text_gives_no_tokens() {
        assert!(clean_and_tokenize("", &StopWords::default(), TokenMode::Grouping).is_empty());
    }

    #[test]
    fn stop_words_are_case_insensitive() {
        let sw: StopWords = ["the"].into_iter().collect();
        assert!(clean_and_tokenize("The the THE", &sw, TokenMode::Topic).is_empty());
    }

    #[test]
    fn grouping_mode_keeps_url_as_token() {
        let sw: StopWords = ["a"].into_iter().collect();
        let got = clean_and_tokenize("Win a FREE phone http://s.ly/x", &sw, TokenMode::Grouping);
        let mut want = words(&["win", "free", "phone"]);
        want.0.push(Token::url("http://s.ly/x"));
        assert_eq!(got, want);
        assert_eq!(got.0[3].to_string(), "<url:http://s.ly/x>");
    }

    #[test]
    fn topic_mode_drops_urls() {
        let got = clean_and_tokenize(
            "Win a FREE phone http://s.ly/x",
            &StopWords::default(),
            TokenMode::Topic,
        );
        assert_eq!(got, words(&["win", "a", "free", "phone"]));
    }

    #[test]
    fn url_glued_to_text_and_trailing_punctuation() {
        let got = clean_and_tokenize(
            "look:https://ex.am/p?q=1).",
            &StopWords::default(),
            TokenMode::Grouping,
        );
        assert_eq!(
            got.0,
            vec![Token::word("look"), Token::url("https://ex.am/p?q=1")]
        );
    }

    #[test]
    fn punctuation_and_control_characters_are_removed() {
        let got = clean_and_tokenize(
            "Hello,\u{0007}world! #tag\u{FE0F} ...",
            &StopWords::default(),
            TokenMode::Topic,
        );
        assert_eq!(got, words(&["hello", "world", "tag"]));
    }

    #[test]
    fn symbols_outside_punctuation_survive() {
        let got = clean_and_tokenize("$5 deal", &StopWords::default(), TokenMode::Topic);
        assert_eq!(got, words(&["$5", "deal"]));
    }

    #[test]
    fn parse_single_record() {
        let input = record("alice", "1", 10, "hello world");
        let parsed = parse_timelines(input.as_bytes(), 300).unwrap();
        assert_eq!(parsed.timelines.len(), 1);
        assert_eq!(parsed.timelines["alice"].messages.len(), 1);
    }

    #[test]
    fn parse_empty_stream() {
        let parsed = parse_timelines(&b""[..], 300).unwrap();
        assert!(parsed.timelines.is_empty());
        assert!(parsed.errors.is_empty());
    }

    #[test]
    fn cap_keeps_newest_messages() {
        // Write in scrambled order to make sure truncation sorts first.
        let mut lines: Vec<String> = (0..650)
            .map(|i| record("bob", &format!("m{i}"), i, "text"))
            .collect();
        lines.reverse();
        lines.swap(3, 400);
        let parsed = parse_timelines(lines.join("\n").as_bytes(), 300).unwrap();
        let tl = &parsed.timelines["bob"];
        assert_eq!(tl.messages.len(), 300);
        assert_eq!(parsed.truncated, 350);
        assert_eq!(tl.messages.first().unwrap().timestamp, 350);
        assert_eq!(tl.messages.last().unwrap().timestamp, 649);
        assert!(tl
            .messages
            .windows(2)
            .all(|w| w[0].timestamp <= w[1].timestamp));
    }

    #[test]
    fn malformed_records_report_line_numbers() {
        let input = format!(
            "{}\nnot json\n{{\"user\":\"a\",\"id\":\"2\",\"ts\":1}}\n{}\n",
            record("a", "1", 0, "ok"),
            record("a", "3", 2, "   ")
        );
        let parsed = parse_timelines(input.as_bytes(), 300).unwrap();
        let lines: Vec<usize> = parsed
            .errors
            .iter()
            .map(|e| match e {
                Error::Record { line, .. } => *line,
                other => panic!("unexpected {other}"),
            })
            .collect();
        assert_eq!(lines, vec![2, 3, 4]);
        assert_eq!(parsed.message_count(), 1);
    }

    #[test]
    fn duplicate_ids_are_rejected_and_counted() {
        let input = [
            record("a", "1", 0, "first"),
            record("a", "1", 5, "again"),
            record("b", "1", 0, "other user"),
        ]
        .join("\n");
        let parsed = parse_timelines(input.as_bytes(), 300).unwrap();
        assert_eq!(parsed.duplicates, 1);
        assert_eq!(parsed.timelines["a"].messages[0].text, "first");
        assert_eq!(parsed.timelines["b"].messages.len(), 1);
    }

    #[test]
    fn overlong_text_is_malformed() {
        let input = record("a", "1", 0, &"x".repeat(281));
        let parsed = parse_timelines(input.as_bytes(), 300).unwrap();
        assert_eq!(parsed.errors.len(), 1);
    }

    #[test]
    fn documents_of_exact_length() {
        let tok = Tokenizer::new(StopWords::default(), TokenMode::Topic);
        let docs = build_documents(&timeline(20), 20, &tok).unwrap();
        assert_eq!(docs.len(), 1);
        assert_eq!(docs[0].tokens.len(), 40);
    }

    #[test]
    fn documents_keep_remainder() {
        let tok = Tokenizer::new(StopWords::default(), TokenMode::Topic);
        let sizes: Vec<usize> = build_documents(&timeline(45), 20, &tok)
            .unwrap()
            .iter()
            .map(|d| d.source_message_ids.len())
            .collect();
        assert_eq!(sizes, vec![20, 20, 5]);
        assert!(build_documents(&timeline(0), 20, &tok).unwrap().is_empty());
        assert!(build_documents(&timeline(3), 0, &tok).is_err());
    }

    #[test]
    fn bundled_stop_words_load() {
        let sw = StopWords::english();
        assert!(sw.contains("the"));
        assert!(!sw.contains("phone"));
    }

    proptest! {
        #[test]
        fn documents_cover_timeline_in_order(n in 0usize..120, l in 1usize..30) {
            let tok = Tokenizer::new(StopWords::default(), TokenMode::Topic);
            let tl = timeline(n);
            let docs = build_documents(&tl, l, &tok).unwrap();
            prop_assert_eq!(docs.len(), n.div_ceil(l));
            let ids: Vec<&str> = docs.iter().flat_map(|d| d.source_message_ids.iter().map(String::as_str)).collect();
            prop_assert_eq!(ids, tl.message_ids().collect::<Vec<_>>());
        }

        #[test]
        fn tokenize_is_idempotent(text in "[a-zA-Z0-9 ,.!?'#@\u{e9}\u{df}\u{3a3}\u{1F600}-]{0,80}") {
            let sw: StopWords = ["the", "a", "and"].into_iter().collect();
            let first = clean_and_tokenize(&text, &sw, TokenMode::Grouping);
            let second = clean_and_tokenize(&first.join(), &sw, TokenMode::Grouping);
            prop_assert_eq!(&first, &second);
            prop_assert!(first.iter().all(|t| t.as_word().is_some_and(|w| !w.is_empty() && !sw.contains(w))));
        }
    }
}
