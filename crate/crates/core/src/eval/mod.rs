//! Evaluation: micro/macro F1, benchmark orchestration and report output.

pub mod experiment;
pub mod report;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use experiment::{run_experiment, train_method, MethodSpec, TrainedMethod};
pub use report::{emit_report, parse_csv, render_csv, render_svg, ReportRow, CSV_HEADER};

/// One scored test document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictionRecord {
    pub doc_id: String,
    pub gold: String,
    pub predicted: String,
    pub score: f64,
}

/// One benchmark cell: a method evaluated on one dataset at one author
/// count. `micro_f1`/`macro_f1` are NaN when the method failed to train.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunReport {
    pub method: String,
    pub dataset: String,
    pub authors: usize,
    pub micro_f1: f64,
    pub macro_f1: f64,
    pub train_s: f64,
    pub predict_ms: f64,
    pub seed: u64,
    pub failed: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    /// Structured snapshot of the method configuration that produced this
    /// run; re-parses to the original [`MethodSpec`](crate::eval::MethodSpec).
    pub config: serde_json::Value,
}

struct Tally {
    tp: u64,
    fp: u64,
    fn_: u64,
}

fn class_tallies<G, P>(gold: &[G], pred: &[P]) -> Result<BTreeMap<String, Tally>>
where
    G: AsRef<str>,
    P: AsRef<str>,
{
    if gold.len() != pred.len() {
        return Err(Error::LengthMismatch { left: gold.len(), right: pred.len() });
    }
    if gold.is_empty() {
        return Err(Error::EmptyRecords);
    }
    let mut tallies: BTreeMap<String, Tally> = BTreeMap::new();
    fn tally<'a>(map: &'a mut BTreeMap<String, Tally>, label: &str) -> &'a mut Tally {
        map.entry(label.to_string()).or_insert(Tally { tp: 0, fp: 0, fn_: 0 })
    }
    for (g, p) in gold.iter().zip(pred) {
        let (g, p) = (g.as_ref(), p.as_ref());
        if g == p {
            tally(&mut tallies, g).tp += 1;
        } else {
            tally(&mut tallies, p).fp += 1;
            tally(&mut tallies, g).fn_ += 1;
        }
    }
    Ok(tallies)
}

/// Micro-averaged F1: counts are pooled over all classes before the
/// harmonic mean, so `TP / (TP + (FP + FN) / 2)`. For single-label
/// prediction every error is one false positive and one false negative, so
/// this equals plain accuracy.
pub fn micro_f1<G, P>(gold: &[G], pred: &[P]) -> Result<f64>
where
    G: AsRef<str>,
    P: AsRef<str>,
{
    let tallies = class_tallies(gold, pred)?;
    let (mut tp, mut fp, mut fn_) = (0u64, 0u64, 0u64);
    for t in tallies.values() {
        tp += t.tp;
        fp += t.fp;
        fn_ += t.fn_;
    }
    let denom = tp as f64 + (fp + fn_) as f64 / 2.0;
    if denom == 0.0 {
        return Ok(0.0);
    }
    Ok(tp as f64 / denom)
}

/// Macro-averaged F1: per-class F1 (zero when a class has no true or
/// predicted members) averaged uniformly over every class appearing in the
/// gold or predicted labels.
pub fn macro_f1<G, P>(gold: &[G], pred: &[P]) -> Result<f64>
where
    G: AsRef<str>,
    P: AsRef<str>,
{
    let tallies = class_tallies(gold, pred)?;
    let mut sum = 0.0;
    for t in tallies.values() {
        let denom = 2.0 * t.tp as f64 + (t.fp + t.fn_) as f64;
        if denom > 0.0 {
            sum += 2.0 * t.tp as f64 / denom;
        }
    }
    Ok(sum / tallies.len() as f64)
}

/// Convenience wrappers over [`PredictionRecord`] slices.
pub fn micro_f1_records(records: &[PredictionRecord]) -> Result<f64> {
    let gold: Vec<&str> = records.iter().map(|r| r.gold.as_str()).collect();
    let pred: Vec<&str> = records.iter().map(|r| r.predicted.as_str()).collect();
    micro_f1(&gold, &pred)
}

pub fn macro_f1_records(records: &[PredictionRecord]) -> Result<f64> {
    let gold: Vec<&str> = records.iter().map(|r| r.gold.as_str()).collect();
    let pred: Vec<&str> = records.iter().map(|r| r.predicted.as_str()).collect();
    macro_f1(&gold, &pred)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_correct_scores_one() {
        let labels = ["a", "b", "c", "a"];
        assert_eq!(micro_f1(&labels, &labels).unwrap(), 1.0);
        assert_eq!(macro_f1(&labels, &labels).unwrap(), 1.0);
    }

    #[test]
    fn all_wrong_scores_zero() {
        let gold = ["a", "a", "b"];
        let pred = ["b", "b", "a"];
        assert_eq!(micro_f1(&gold, &pred).unwrap(), 0.0);
        assert_eq!(macro_f1(&gold, &pred).unwrap(), 0.0);
    }

    #[test]
    fn two_of_three_correct_is_two_thirds() {
        let gold = ["a", "a", "b"];
        let pred = ["a", "b", "b"];
        let f1 = micro_f1(&gold, &pred).unwrap();
        assert!((f1 - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn micro_equals_accuracy_on_single_label_data() {
        let gold = ["x", "y", "z", "x", "y", "z", "x"];
        let pred = ["x", "y", "x", "x", "z", "z", "y"];
        let correct = gold.iter().zip(&pred).filter(|(g, p)| g == p).count();
        let accuracy = correct as f64 / gold.len() as f64;
        assert!((micro_f1(&gold, &pred).unwrap() - accuracy).abs() < 1e-15);
    }

    #[test]
    fn macro_averages_over_gold_and_predicted_classes() {
        // Gold classes {a, b}, predicted also hits c: F1(a) = 1/2,
        // F1(b) = 2/3, F1(c) = 0, macro = 7/18.
        let gold = ["a", "a", "b", "b"];
        let pred = ["a", "c", "b", "a"];
        let f1 = macro_f1(&gold, &pred).unwrap();
        assert!((f1 - 7.0 / 18.0).abs() < 1e-12, "macro was {f1}");
    }

    #[test]
    fn mismatched_lengths_are_rejected() {
        let gold = ["a", "b"];
        let pred = ["a"];
        assert!(matches!(
            micro_f1(&gold, &pred),
            Err(Error::LengthMismatch { left: 2, right: 1 })
        ));
    }

    #[test]
    fn empty_input_is_rejected() {
        let empty: [&str; 0] = [];
        assert!(matches!(micro_f1(&empty, &empty), Err(Error::EmptyRecords)));
        assert!(matches!(macro_f1(&empty, &empty), Err(Error::EmptyRecords)));
    }

    #[test]
    fn record_wrappers_agree_with_label_slices() {
        let records = vec![
            PredictionRecord {
                doc_id: "0".into(),
                gold: "a".into(),
                predicted: "a".into(),
                score: 0.9,
            },
            PredictionRecord {
                doc_id: "1".into(),
                gold: "a".into(),
                predicted: "b".into(),
                score: 0.6,
            },
            PredictionRecord {
                doc_id: "2".into(),
                gold: "b".into(),
                predicted: "b".into(),
                score: 0.8,
            },
        ];
        let gold = ["a", "a", "b"];
        let pred = ["a", "b", "b"];
        assert_eq!(micro_f1_records(&records).unwrap(), micro_f1(&gold, &pred).unwrap());
        assert_eq!(macro_f1_records(&records).unwrap(), macro_f1(&gold, &pred).unwrap());
    }
}
