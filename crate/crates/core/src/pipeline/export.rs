//! Input strings for the three model families: an encoder classifier, a
//! text-to-text model and a few-shot prompted model.

use std::str::FromStr;

use super::{Instance, PipelineError};
use crate::logic::Label;

pub const DEFAULT_DEMOS: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExportFormat {
    ConcatCls,
    Seq2seqPrefix,
    Prompt3shot,
}

impl FromStr for ExportFormat {
    type Err = PipelineError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "concat-cls" => Ok(ExportFormat::ConcatCls),
            "seq2seq-prefix" => Ok(ExportFormat::Seq2seqPrefix),
            "prompt-3shot" => Ok(ExportFormat::Prompt3shot),
            other => Err(PipelineError::UnknownFormat(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Exported {
    pub input: String,
    pub target: String,
}

pub fn answer_word(label: Label) -> &'static str {
    match label {
        Label::True => "Yes",
        Label::Unknown => "Maybe",
        Label::False => "No",
    }
}

fn prompt_question(inst: &Instance) -> String {
    let hypothesis = inst.statement_nl.strip_suffix('.').unwrap_or(&inst.statement_nl);
    format!("{} Based on the previous passage, is it true that \"{hypothesis}\"? Yes or no?", inst.context_nl)
}

/// `demos` are only used by the prompt format; each is rendered with its
/// answer and the block is separated from the query by a blank line.
pub fn export_model_input(inst: &Instance, format: ExportFormat, demos: &[Instance]) -> Exported {
    match format {
        ExportFormat::ConcatCls => Exported {
            input: format!("{} [SEP] {}", inst.context_nl, inst.statement_nl),
            target: inst.label.to_string(),
        },
        ExportFormat::Seq2seqPrefix => Exported {
            input: format!("$answer$ ; $question$ = {} ; $context$ = {}", inst.statement_nl, inst.context_nl),
            target: format!("$answer$ = {}", inst.label),
        },
        ExportFormat::Prompt3shot => {
            let mut blocks: Vec<String> =
                demos.iter().map(|d| format!("{} {}", prompt_question(d), answer_word(d.label))).collect();
            blocks.push(prompt_question(inst));
            Exported { input: blocks.join("\n\n"), target: answer_word(inst.label).to_string() }
        }
    }
}

/// The first `n` instances of `pool` other than `inst`, in pool order.
pub fn pick_demos(inst: &Instance, pool: &[Instance], n: usize) -> Vec<Instance> {
    pool.iter().filter(|d| d.id != inst.id).take(n).cloned().collect()
}
