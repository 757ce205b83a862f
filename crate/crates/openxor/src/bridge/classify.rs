//! Failure-mode classification of transcripts.

use super::parse::parse_response;
use super::Transcript;
use crate::model::Instance;
use crate::solvers::{solve_backtracking, solve_segments, Status};
use serde::{Deserialize, Serialize};

/// Exactly one class per transcript; the five classes partition all inputs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FailureClass {
    Refusal,
    LengthLimit,
    ConstraintHallucination,
    FormatError,
    ValidAttempt,
}

impl FailureClass {
    pub fn label(self) -> &'static str {
        match self {
            FailureClass::Refusal => "refusal",
            FailureClass::LengthLimit => "length_limit",
            FailureClass::ConstraintHallucination => "constraint_hallucination",
            FailureClass::FormatError => "format_error",
            FailureClass::ValidAttempt => "valid_attempt",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Classified {
    pub class: FailureClass,
    /// The lexicon phrase or rule that fired, for auditability.
    pub rule: String,
}

/// Versioned refusal lexicon shipped with the crate; `#` lines are comments.
const REFUSAL_LEXICON: &str = include_str!("../../data/refusal_lexicon.txt");

fn refusal_phrases() -> impl Iterator<Item = &'static str> {
    REFUSAL_LEXICON
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
}

const LENGTH_MARKERS: [&str; 6] = [
    "token limit",
    "truncated",
    "maximum length",
    "max length",
    "exceeds maximum",
    "maximum sequence length",
];

const UNSAT_MARKERS: [&str; 5] = [
    "unsatisfiable",
    "no valid solution exists",
    "cannot be satisfied",
    "constraints conflict",
    "contradiction between",
];

/// Confirm satisfiability with the fast exact solver, falling back to
/// bounded backtracking for instances the segment solver cannot decide.
pub fn instance_confirmed_satisfiable(instance: &Instance) -> bool {
    if solve_segments(instance).status == Status::Solved {
        return true;
    }
    solve_backtracking(instance, 1_000_000).status == Status::Solved
}

/// Decision ladder: valid attempt, then length limit, then refusal, then
/// constraint hallucination (only against a solver-confirmed satisfiable
/// instance), else format error. Deterministic and total.
pub fn classify(
    transcript: &Transcript,
    expected_n: usize,
    instance_satisfiable: bool,
) -> Classified {
    let parse = parse_response(&transcript.text, expected_n);
    if parse.is_ok() {
        return Classified {
            class: FailureClass::ValidAttempt,
            rule: "parsed full-length operation run".into(),
        };
    }
    let lower = transcript.text.to_lowercase();
    if transcript.token_limit == Some(true) {
        return Classified {
            class: FailureClass::LengthLimit,
            rule: "source reported token-limit finish".into(),
        };
    }
    if let Some(marker) = LENGTH_MARKERS.iter().find(|m| lower.contains(**m)) {
        return Classified {
            class: FailureClass::LengthLimit,
            rule: format!("truncation marker: \"{marker}\""),
        };
    }
    if let Some(phrase) = refusal_phrases().find(|p| lower.contains(&p.to_lowercase())) {
        return Classified {
            class: FailureClass::Refusal,
            rule: format!("refusal phrase: \"{phrase}\""),
        };
    }
    if instance_satisfiable {
        if let Some(marker) = UNSAT_MARKERS.iter().find(|m| lower.contains(**m)) {
            return Classified {
                class: FailureClass::ConstraintHallucination,
                rule: format!("unsatisfiability claim on satisfiable instance: \"{marker}\""),
            };
        }
    }
    Classified {
        class: FailureClass::FormatError,
        rule: parse
            .err()
            .map(|e| e.to_string())
            .unwrap_or_else(|| "unparseable".into()),
    }
}
