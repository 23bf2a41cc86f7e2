use std::fmt;
use std::ops::RangeInclusive;
use std::sync::LazyLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

static ANSWER: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"(?im)^\W*ANSWER\W*:\s*\**\s*([^\s*]+)").expect("answer pattern"));
static RATIONALE: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"(?is)RATIONALE\W*:\s*(.+)$").expect("rationale pattern"));

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReplyKind {
    Choose,
    Freeze,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParsedReply {
    pub value: usize,
    pub rationale: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum ParseFailure {
    /// No `ANSWER:` field in the reply.
    Missing,
    NotANumber(String),
    OutOfBounds { value: i64 },
}

impl fmt::Display for ParseFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParseFailure::Missing => f.write_str("reply has no ANSWER field"),
            ParseFailure::NotANumber(s) => write!(f, "ANSWER {s:?} is not an integer"),
            ParseFailure::OutOfBounds { value } => write!(f, "ANSWER {value} is out of bounds"),
        }
    }
}

/// Extracts the first `ANSWER: <n>` line and the optional `RATIONALE:`
/// text that follows. `bounds` is the admissible range: candidate indices
/// when choosing, district labels when freezing.
pub fn parse_agent_reply(
    text: &str,
    kind: ReplyKind,
    bounds: RangeInclusive<usize>,
) -> Result<ParsedReply, ParseFailure> {
    let caps = ANSWER.captures(text).ok_or(ParseFailure::Missing)?;
    let raw = caps[1].trim_end_matches(['.', ',', ';']);
    // Freeze answers are sometimes written as "District 3" or "#3".
    let digits = match kind {
        ReplyKind::Freeze => raw.trim_start_matches('#'),
        ReplyKind::Choose => raw,
    };
    let value: i64 = digits
        .parse()
        .map_err(|_| ParseFailure::NotANumber(raw.to_string()))?;
    if value < 0 || !bounds.contains(&(value as usize)) {
        return Err(ParseFailure::OutOfBounds { value });
    }
    let rationale = RATIONALE
        .captures(text)
        .map(|c| c[1].trim().to_string())
        .filter(|s| !s.is_empty());
    Ok(ParsedReply {
        value: value as usize,
        rationale,
    })
}
