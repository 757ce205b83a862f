//! Prompt rendering against the committed challenge template.
//!
//! Output bytes are pinned by a golden-file test: LF newlines, UTF-8 arrow
//! in constraint lines, and the exact rules block from the template file.

use crate::model::{ops_to_string, Bit, Checkpoint, Instance};
use thiserror::Error;

const TEMPLATE: &str = include_str!("../../data/prompt_template.txt");

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PromptError {
    #[error("instance {id} carries no few-shot examples")]
    MissingFewShot { id: String },
    #[error("few-shot instance {id} carries no solution to demonstrate")]
    MissingFewShotSolution { id: String },
}

fn bits_list(bits: &[Bit]) -> String {
    let mut s = String::from("[");
    for (i, b) in bits.iter().enumerate() {
        if i > 0 {
            s.push_str(", ");
        }
        s.push_str(if b.is_one() { "1" } else { "0" });
    }
    s.push(']');
    s
}

fn checkpoint_list(checkpoints: &[Checkpoint]) -> String {
    if checkpoints.is_empty() {
        return "none".to_string();
    }
    checkpoints
        .iter()
        .map(|c| format!("position {} \u{2192} {}", c.position, c.required.value()))
        .collect::<Vec<_>>()
        .join(", ")
}

/// Render the full challenge prompt for an instance.
pub fn render_prompt(instance: &Instance) -> Result<String, PromptError> {
    if instance.few_shot.is_empty() {
        return Err(PromptError::MissingFewShot {
            id: instance.id.clone(),
        });
    }
    let mut examples = String::new();
    for (i, fs) in instance.few_shot.iter().enumerate() {
        let solution = fs
            .ground_truth
            .as_ref()
            .ok_or_else(|| PromptError::MissingFewShotSolution { id: fs.id.clone() })?;
        if i > 0 {
            examples.push_str("\n\n");
        }
        examples.push_str(&format!(
            "### Example {}:\nInput bits: {}\nTarget output: {}\nCheckpoint constraints: {}\nOperations: {}",
            i + 1,
            bits_list(&fs.bits),
            fs.target.value(),
            checkpoint_list(&fs.checkpoints),
            ops_to_string(solution),
        ));
    }
    Ok(TEMPLATE
        .replace("{FEW_SHOT}", &examples)
        .replace("{BITS}", &bits_list(&instance.bits))
        .replace("{TARGET}", &instance.target.value().to_string())
        .replace("{CHECKPOINTS}", &checkpoint_list(&instance.checkpoints))
        .replace("{N}", &instance.n().to_string()))
}
