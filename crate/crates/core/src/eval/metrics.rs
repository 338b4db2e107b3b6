use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub tn: usize,
}

impl ConfusionMatrix {
    /// Counts at `score >= threshold`.
    pub fn at_threshold(scores: &[f64], labels: &[bool], threshold: f64) -> Self {
        let mut cm = Self::default();
        for (&s, &y) in scores.iter().zip(labels) {
            match (s >= threshold, y) {
                (true, true) => cm.tp += 1,
                (true, false) => cm.fp += 1,
                (false, true) => cm.fn_ += 1,
                (false, false) => cm.tn += 1,
            }
        }
        cm
    }

    pub fn total(&self) -> usize {
        self.tp + self.fp + self.fn_ + self.tn
    }

    pub fn accuracy(&self) -> Option<f64> {
        ratio(self.tp + self.tn, self.total())
    }

    pub fn precision(&self) -> Option<f64> {
        ratio(self.tp, self.tp + self.fp)
    }

    pub fn recall(&self) -> Option<f64> {
        ratio(self.tp, self.tp + self.fn_)
    }

    /// Harmonic mean of precision and recall, as `2·TP / (2·TP + FP + FN)`.
    /// Undefined when there are neither positives nor positive predictions.
    pub fn f1(&self) -> Option<f64> {
        ratio(2 * self.tp, 2 * self.tp + self.fp + self.fn_)
    }

    pub fn false_positive_rate(&self) -> Option<f64> {
        ratio(self.fp, self.fp + self.tn)
    }
}

fn ratio(num: usize, den: usize) -> Option<f64> {
    (den > 0).then(|| num as f64 / den as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub threshold: f64,
    pub confusion: ConfusionMatrix,
    pub accuracy: f64,
    pub precision: Option<f64>,
    pub recall: Option<f64>,
    pub f1: Option<f64>,
    pub roc_auc: Option<f64>,
    pub pr_auc: Option<f64>,
    /// (fpr, tpr) from (0, 0) to (1, 1); empty if either class is absent.
    pub roc_curve: Vec<(f64, f64)>,
    /// (recall, precision) per distinct score, highest score first.
    pub pr_curve: Vec<(f64, f64)>,
}

/// Cumulative (fp, tp) counts after each group of tied scores, highest first.
fn ranked_counts(scores: &[f64], labels: &[bool]) -> Vec<(usize, usize)> {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));
    let mut out = Vec::new();
    let (mut fp, mut tp) = (0, 0);
    for (pos, &i) in order.iter().enumerate() {
        if labels[i] {
            tp += 1;
        } else {
            fp += 1;
        }
        let last_of_group = order.get(pos + 1).map_or(true, |&next| scores[next] != scores[i]);
        if last_of_group {
            out.push((fp, tp));
        }
    }
    out
}

pub fn roc_curve(scores: &[f64], labels: &[bool]) -> Vec<(f64, f64)> {
    let p = labels.iter().filter(|&&y| y).count();
    let n = labels.len() - p;
    if p == 0 || n == 0 {
        return Vec::new();
    }
    std::iter::once((0.0, 0.0))
        .chain(
            ranked_counts(scores, labels)
                .into_iter()
                .map(|(fp, tp)| (fp as f64 / n as f64, tp as f64 / p as f64)),
        )
        .collect()
}

/// Area under the ROC curve by the trapezoid rule.
pub fn roc_auc(scores: &[f64], labels: &[bool]) -> Option<f64> {
    let curve = roc_curve(scores, labels);
    if curve.is_empty() {
        return None;
    }
    Some(
        curve
            .windows(2)
            .map(|w| (w[1].0 - w[0].0) * (w[1].1 + w[0].1) / 2.0)
            .sum(),
    )
}

/// Step-wise average precision: `Σ (R_i − R_{i−1}) · P_i` over distinct
/// score thresholds.
pub fn average_precision(scores: &[f64], labels: &[bool]) -> Option<f64> {
    let p = labels.iter().filter(|&&y| y).count();
    if p == 0 {
        return None;
    }
    let mut prev_recall = 0.0;
    let mut ap = 0.0;
    for (fp, tp) in ranked_counts(scores, labels) {
        let recall = tp as f64 / p as f64;
        ap += (recall - prev_recall) * tp as f64 / (tp + fp) as f64;
        prev_recall = recall;
    }
    Some(ap)
}

pub fn pr_curve(scores: &[f64], labels: &[bool]) -> Vec<(f64, f64)> {
    let p = labels.iter().filter(|&&y| y).count();
    if p == 0 {
        return Vec::new();
    }
    ranked_counts(scores, labels)
        .into_iter()
        .map(|(fp, tp)| (tp as f64 / p as f64, tp as f64 / (tp + fp) as f64))
        .collect()
}

pub fn compute_metrics(scores: &[f64], labels: &[bool], threshold: f64) -> Result<MetricsReport> {
    if scores.len() != labels.len() {
        return Err(Error::Dimension {
            expected: labels.len(),
            got: scores.len(),
        });
    }
    if scores.is_empty() {
        return Err(Error::Empty("no scores to evaluate".into()));
    }
    if let Some(i) = scores.iter().position(|s| !s.is_finite()) {
        return Err(Error::DegenerateInput("non-finite score".into()).at_row(i));
    }
    let confusion = ConfusionMatrix::at_threshold(scores, labels, threshold);
    Ok(MetricsReport {
        threshold,
        confusion,
        accuracy: confusion.accuracy().expect("nonempty"),
        precision: confusion.precision(),
        recall: confusion.recall(),
        f1: confusion.f1(),
        roc_auc: roc_auc(scores, labels),
        pr_auc: average_precision(scores, labels),
        roc_curve: roc_curve(scores, labels),
        pr_curve: pr_curve(scores, labels),
    })
}
