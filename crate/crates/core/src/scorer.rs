//! Theory-level weighted F1: scores are computed within each family (a base
//! theory and its variants) and averaged across families.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt::Write as _;
use std::io::BufRead;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::contrast::Group;
use crate::logic::Label;
use crate::pipeline::{Instance, Subset};

#[derive(Debug, Error)]
pub enum ScoreError {
    #[error("{golds} gold labels but {preds} predictions")]
    LengthMismatch { golds: usize, preds: usize },
    #[error("no labels to score")]
    EmptyInput,
    #[error("predictions cover {covered} of {total} instances ({:.2}%), below the {:.2}% minimum", 100.0 * *covered as f64 / *total as f64, 100.0 * min)]
    CoverageTooLow { covered: usize, total: usize, min: f64 },
    #[error("prediction for unknown id {0:?}")]
    UnknownId(String),
    #[error("line {line}: duplicate prediction for id {id:?}")]
    DuplicateId { line: usize, id: String },
    #[error("line {line}: {message}")]
    Schema { line: usize, message: String },
    #[error("{path}: {err}")]
    Io { path: String, err: std::io::Error },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Prediction {
    pub id: String,
    pub prediction: Label,
}

pub fn parse_predictions<R: BufRead>(input: R) -> Result<Vec<Prediction>, ScoreError> {
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let line_no = i + 1;
        let line = line.map_err(|e| ScoreError::Schema { line: line_no, message: e.to_string() })?;
        let p: Prediction =
            serde_json::from_str(&line).map_err(|e| ScoreError::Schema { line: line_no, message: e.to_string() })?;
        if !seen.insert(p.id.clone()) {
            return Err(ScoreError::DuplicateId { line: line_no, id: p.id });
        }
        out.push(p);
    }
    Ok(out)
}

pub fn read_predictions(path: &Path) -> Result<Vec<Prediction>, ScoreError> {
    let file =
        std::fs::File::open(path).map_err(|err| ScoreError::Io { path: path.display().to_string(), err })?;
    parse_predictions(std::io::BufReader::new(file))
}

fn check_lengths(golds: usize, preds: usize) -> Result<(), ScoreError> {
    if golds != preds {
        return Err(ScoreError::LengthMismatch { golds, preds });
    }
    if golds == 0 {
        return Err(ScoreError::EmptyInput);
    }
    Ok(())
}

/// Per-class F1 weighted by gold support; classes absent from the golds
/// carry no weight, and a zero denominator counts as 0.
pub fn weighted_f1(golds: &[Label], preds: &[Label]) -> Result<f64, ScoreError> {
    let preds: Vec<Option<Label>> = preds.iter().copied().map(Some).collect();
    weighted_f1_with_abstain(golds, &preds)
}

/// As [`weighted_f1`], with `None` standing for a missing prediction that
/// is wrong for every gold label.
pub fn weighted_f1_with_abstain(golds: &[Label], preds: &[Option<Label>]) -> Result<f64, ScoreError> {
    check_lengths(golds.len(), preds.len())?;
    let stats = class_stats(golds, preds);
    let total: usize = stats.iter().map(|s| s.support).sum();
    Ok(stats.iter().map(|s| s.support as f64 * s.f1()).sum::<f64>() / total as f64)
}

#[derive(Debug, Clone, Copy, Default)]
struct ClassStats {
    label: Option<Label>,
    tp: usize,
    predicted: usize,
    support: usize,
}

impl ClassStats {
    fn precision(&self) -> f64 {
        if self.predicted == 0 { 0.0 } else { self.tp as f64 / self.predicted as f64 }
    }

    fn recall(&self) -> f64 {
        if self.support == 0 { 0.0 } else { self.tp as f64 / self.support as f64 }
    }

    fn f1(&self) -> f64 {
        let (p, r) = (self.precision(), self.recall());
        if p + r == 0.0 { 0.0 } else { 2.0 * p * r / (p + r) }
    }
}

fn class_stats(golds: &[Label], preds: &[Option<Label>]) -> [ClassStats; 3] {
    let mut stats = Label::ALL.map(|l| ClassStats { label: Some(l), ..Default::default() });
    let slot = |l: Label| Label::ALL.iter().position(|x| *x == l).expect("label listed");
    for (g, p) in golds.iter().zip(preds) {
        stats[slot(*g)].support += 1;
        if let Some(p) = p {
            stats[slot(*p)].predicted += 1;
            if p == g {
                stats[slot(*g)].tp += 1;
            }
        }
    }
    stats
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScoreConfig {
    /// Fraction of dataset ids that must have a prediction.
    pub min_coverage: f64,
    /// Ignore predictions for ids not in the dataset instead of failing.
    pub allow_extra: bool,
}

impl Default for ScoreConfig {
    fn default() -> Self {
        ScoreConfig { min_coverage: 0.99, allow_extra: false }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Coverage {
    pub instances: usize,
    pub predicted: usize,
    pub missing: usize,
    pub extra: usize,
    pub fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubsetScore {
    pub subset: Subset,
    pub families: usize,
    pub instances: usize,
    /// Mean over families of the within-family weighted F1 (headline score).
    pub family_weighted_f1: f64,
    /// Weighted F1 over all instances of the subset at once.
    pub pooled_weighted_f1: f64,
    pub accuracy: f64,
}

/// Pooled over every instance of the group within a subset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupScore {
    pub subset: Subset,
    pub group: Group,
    pub instances: usize,
    pub accuracy: f64,
    pub weighted_f1: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelScore {
    pub subset: Subset,
    pub label: Label,
    pub support: usize,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreReport {
    pub coverage: Coverage,
    pub subsets: Vec<SubsetScore>,
    pub groups: Vec<GroupScore>,
    pub labels: Vec<LabelScore>,
}

fn accuracy(golds: &[Label], preds: &[Option<Label>]) -> f64 {
    golds.iter().zip(preds).filter(|(g, p)| Some(**g) == **p).count() as f64 / golds.len() as f64
}

pub fn score(dataset: &[Instance], predictions: &[Prediction], cfg: ScoreConfig) -> Result<ScoreReport, ScoreError> {
    if dataset.is_empty() {
        return Err(ScoreError::EmptyInput);
    }
    let ids: HashSet<&str> = dataset.iter().map(|i| i.id.as_str()).collect();
    let mut by_id: HashMap<&str, Label> = HashMap::with_capacity(predictions.len());
    let mut extra = 0;
    for p in predictions {
        if ids.contains(p.id.as_str()) {
            by_id.insert(&p.id, p.prediction);
        } else if cfg.allow_extra {
            extra += 1;
        } else {
            return Err(ScoreError::UnknownId(p.id.clone()));
        }
    }
    let predicted = dataset.iter().filter(|i| by_id.contains_key(i.id.as_str())).count();
    let fraction = predicted as f64 / dataset.len() as f64;
    if fraction < cfg.min_coverage {
        return Err(ScoreError::CoverageTooLow { covered: predicted, total: dataset.len(), min: cfg.min_coverage });
    }

    // subset -> family -> (golds, preds); BTreeMaps fix the reduction order.
    type Pairs = (Vec<Label>, Vec<Option<Label>>);
    let mut families: BTreeMap<Subset, BTreeMap<&str, Pairs>> = BTreeMap::new();
    let mut groups: BTreeMap<(Subset, Group), Pairs> = BTreeMap::new();
    for inst in dataset {
        let pred = by_id.get(inst.id.as_str()).copied();
        let fam = families.entry(inst.subset).or_default().entry(&inst.family_id).or_default();
        fam.0.push(inst.label);
        fam.1.push(pred);
        let g = groups.entry((inst.subset, inst.group)).or_default();
        g.0.push(inst.label);
        g.1.push(pred);
    }

    let mut subsets = Vec::new();
    let mut labels = Vec::new();
    for (subset, fams) in &families {
        let mut family_sum = 0.0;
        let (mut all_golds, mut all_preds) = (Vec::new(), Vec::new());
        for (golds, preds) in fams.values() {
            family_sum += weighted_f1_with_abstain(golds, preds)?;
            all_golds.extend_from_slice(golds);
            all_preds.extend_from_slice(preds);
        }
        subsets.push(SubsetScore {
            subset: *subset,
            families: fams.len(),
            instances: all_golds.len(),
            family_weighted_f1: family_sum / fams.len() as f64,
            pooled_weighted_f1: weighted_f1_with_abstain(&all_golds, &all_preds)?,
            accuracy: accuracy(&all_golds, &all_preds),
        });
        for s in class_stats(&all_golds, &all_preds) {
            labels.push(LabelScore {
                subset: *subset,
                label: s.label.expect("gold class"),
                support: s.support,
                precision: s.precision(),
                recall: s.recall(),
                f1: s.f1(),
            });
        }
    }
    let groups = groups
        .into_iter()
        .map(|((subset, group), (golds, preds))| {
            Ok(GroupScore {
                subset,
                group,
                instances: golds.len(),
                accuracy: accuracy(&golds, &preds),
                weighted_f1: weighted_f1_with_abstain(&golds, &preds)?,
            })
        })
        .collect::<Result<_, ScoreError>>()?;

    Ok(ScoreReport {
        coverage: Coverage { instances: dataset.len(), predicted, missing: dataset.len() - predicted, extra, fraction },
        subsets,
        groups,
        labels,
    })
}

impl ScoreReport {
    /// Plain-text rendering for terminals.
    pub fn to_table(&self) -> String {
        let mut s = String::new();
        let c = &self.coverage;
        let _ = writeln!(
            s,
            "coverage: {}/{} predicted ({:.2}%), {} missing, {} extra",
            c.predicted,
            c.instances,
            100.0 * c.fraction,
            c.missing,
            c.extra
        );
        let _ = writeln!(s, "\n{:<8} {:>8} {:>9} {:>10} {:>10} {:>8}", "subset", "families", "instances", "family-wF1", "pooled-wF1", "acc");
        for x in &self.subsets {
            let _ = writeln!(
                s,
                "{:<8} {:>8} {:>9} {:>10.4} {:>10.4} {:>8.4}",
                x.subset.as_str(),
                x.families,
                x.instances,
                x.family_weighted_f1,
                x.pooled_weighted_f1,
                x.accuracy
            );
        }
        let _ = writeln!(s, "\n{:<8} {:<10} {:>9} {:>8} {:>8}", "subset", "group", "instances", "acc", "wF1");
        for g in &self.groups {
            let _ = writeln!(
                s,
                "{:<8} {:<10} {:>9} {:>8.4} {:>8.4}",
                g.subset.as_str(),
                g.group.as_str(),
                g.instances,
                g.accuracy,
                g.weighted_f1
            );
        }
        let _ = writeln!(s, "\n{:<8} {:<8} {:>7} {:>9} {:>8} {:>8}", "subset", "label", "support", "precision", "recall", "f1");
        for l in &self.labels {
            let _ = writeln!(
                s,
                "{:<8} {:<8} {:>7} {:>9.4} {:>8.4} {:>8.4}",
                l.subset.as_str(),
                l.label.as_str(),
                l.support,
                l.precision,
                l.recall,
                l.f1
            );
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use Label::{False as F, True as T, Unknown as U};

    #[test]
    fn fixtures() {
        assert_eq!(weighted_f1(&[T, U, U], &[T, U, U]).unwrap(), 1.0);
        assert_eq!(weighted_f1(&[T, U], &[U, T]).unwrap(), 0.0);
        // T: P=1, R=1/2, F1=2/3 (n=2); U: P=1/2, R=1, F1=2/3 (n=1); F: 1 (n=1)
        let expected = (2.0 * (2.0 / 3.0) + 2.0 / 3.0 + 1.0) / 4.0;
        assert!((weighted_f1(&[T, T, U, F], &[T, U, U, F]).unwrap() - expected).abs() < 1e-12);
        assert!((expected - 0.75).abs() < 1e-12);
    }

    #[test]
    fn errors() {
        assert!(matches!(weighted_f1(&[T], &[]), Err(ScoreError::LengthMismatch { .. })));
        assert!(matches!(weighted_f1(&[], &[]), Err(ScoreError::EmptyInput)));
    }

    #[test]
    fn abstain_is_always_wrong() {
        let with_abstain = weighted_f1_with_abstain(&[T, F], &[Some(T), None]).unwrap();
        // T: P=1, R=1 -> 1; F: R=0 -> 0
        assert_eq!(with_abstain, 0.5);
    }

    #[test]
    fn prediction_parsing() {
        let text = "{\"id\":\"a\",\"prediction\":\"True\"}\n{\"id\":\"a\",\"prediction\":\"False\"}\n";
        assert!(matches!(parse_predictions(text.as_bytes()), Err(ScoreError::DuplicateId { line: 2, .. })));
        let bad = "{\"id\":\"a\",\"prediction\":\"Yes\"}\n";
        assert!(matches!(parse_predictions(bad.as_bytes()), Err(ScoreError::Schema { line: 1, .. })));
    }
}
