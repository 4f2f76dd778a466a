//! Dataset assembly: statement balancing, split and evaluation-set
//! construction, JSONL I/O, feature audit and model-input exporters.

pub mod audit;
pub mod balance;
pub mod dataset;
pub mod export;
pub mod instance;
pub mod jsonl;

use std::path::PathBuf;

use thiserror::Error;

use crate::contrast::ContrastError;
use crate::equivalence::EquivalenceError;
use crate::inference::InferenceError;
use crate::nlg::NlgError;
use crate::sampler::SamplerError;

pub use audit::{audit, AuditConfig, AuditReport, FeatureVector};
pub use balance::{balance_statements, Reject};
pub use dataset::{build_dataset, build_eval_set, Dataset, DatasetConfig, EvalKind, EvalSet, Metadata};
pub use export::{export_model_input, ExportFormat, Exported};
pub use instance::{Instance, InstanceMeta, LabelSource, LogicalForm, ProofRecord, Subset};
pub use jsonl::{emit_jsonl, parse_jsonl, read_jsonl, write_jsonl};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("{}: {err}", path.display())]
    Io { path: PathBuf, err: std::io::Error },
    #[error("line {line}: {message}")]
    Schema { line: usize, message: String },
    #[error("instance {id}: {message}")]
    Invalid { id: String, message: String },
    #[error("unknown export format {0:?} (expected concat-cls, seq2seq-prefix or prompt-3shot)")]
    UnknownFormat(String),
    #[error("audit needs at least one instance")]
    EmptyAudit,
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Sampler(#[from] SamplerError),
    #[error(transparent)]
    Inference(#[from] InferenceError),
    #[error(transparent)]
    Nlg(#[from] NlgError),
    #[error(transparent)]
    Contrast(#[from] ContrastError),
    #[error(transparent)]
    Equivalence(#[from] EquivalenceError),
}
