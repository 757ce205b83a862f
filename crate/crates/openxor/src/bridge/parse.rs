//! Free-text response parsing.

use crate::model::Op;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FormatFailure {
    #[error("no run of XOR/NOP tokens found")]
    NoTokens,
    #[error("operation run has length {found}, expected {expected}")]
    WrongLength { found: usize, expected: usize },
}

fn token_op(token: &str) -> Option<Op> {
    if token.eq_ignore_ascii_case("xor") {
        Some(Op::Xor)
    } else if token.eq_ignore_ascii_case("nop") {
        Some(Op::Nop)
    } else {
        None
    }
}

/// Extract the final contiguous run of whitespace-separated XOR/NOP tokens
/// (case-insensitive) and validate its length against `n`.
///
/// Prose before the answer is ignored; any non-operation token breaks a
/// run, so the returned sequence is the last uninterrupted one.
pub fn parse_response(text: &str, n: usize) -> Result<Vec<Op>, FormatFailure> {
    let mut last_run: Vec<Op> = Vec::new();
    let mut current: Vec<Op> = Vec::new();
    for token in text.split_whitespace() {
        match token_op(token) {
            Some(op) => current.push(op),
            None => {
                if !current.is_empty() {
                    last_run = std::mem::take(&mut current);
                }
            }
        }
    }
    if !current.is_empty() {
        last_run = current;
    }
    if last_run.is_empty() {
        return Err(FormatFailure::NoTokens);
    }
    if last_run.len() != n {
        return Err(FormatFailure::WrongLength {
            found: last_run.len(),
            expected: n,
        });
    }
    Ok(last_run)
}
