//! Confusion matrix and per-class precision, recall and F1.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub support: usize,
}

/// Rows are actual classes, columns predicted classes.
pub type ConfusionMatrix = [[usize; 2]; 2];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassificationReport {
    pub classes: [ClassMetrics; 2],
    pub confusion_matrix: ConfusionMatrix,
    pub accuracy: f64,
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

pub fn f1_score(precision: f64, recall: f64) -> f64 {
    let den = precision + recall;
    if den > 0.0 {
        2.0 * precision * recall / den
    } else {
        0.0
    }
}

pub fn confusion_matrix(actual: &[u8], predicted: &[u8]) -> ConfusionMatrix {
    let mut m = [[0usize; 2]; 2];
    for (&a, &p) in actual.iter().zip(predicted) {
        m[a.min(1) as usize][p.min(1) as usize] += 1;
    }
    m
}

impl ClassificationReport {
    pub fn from_confusion(m: ConfusionMatrix) -> Self {
        let class = |c: usize| {
            let other = 1 - c;
            let tp = m[c][c];
            let support = m[c][c] + m[c][other];
            let predicted = m[c][c] + m[other][c];
            let precision = ratio(tp, predicted);
            let recall = ratio(tp, support);
            ClassMetrics { precision, recall, f1: f1_score(precision, recall), support }
        };
        let total = m[0][0] + m[0][1] + m[1][0] + m[1][1];
        ClassificationReport {
            classes: [class(0), class(1)],
            confusion_matrix: m,
            accuracy: ratio(m[0][0] + m[1][1], total),
        }
    }

    pub fn from_labels(actual: &[u8], predicted: &[u8]) -> Self {
        Self::from_confusion(confusion_matrix(actual, predicted))
    }

    pub fn total(&self) -> usize {
        self.classes[0].support + self.classes[1].support
    }

    /// Aligned text table: precision, recall, f1 and support per class,
    /// followed by the confusion matrix.
    pub fn to_table(&self, title: &str) -> String {
        let mut out = format!("{title}\n");
        out.push_str(&format!("{:>10}{:>11}{:>10}{:>10}{:>10}\n", "", "precision", "recall", "f1", "support"));
        for (c, m) in self.classes.iter().enumerate() {
            out.push_str(&format!(
                "{:>10}{:>11.2}{:>10.2}{:>10.2}{:>10}\n",
                format!("θ={c}"),
                m.precision,
                m.recall,
                m.f1,
                m.support
            ));
        }
        out.push_str(&format!("{:>10}{:>31.2}{:>10}\n", "accuracy", self.accuracy, self.total()));
        out.push_str("confusion matrix (rows actual, columns predicted)\n");
        for row in &self.confusion_matrix {
            out.push_str(&format!("{:>10}{:>10}\n", row[0], row[1]));
        }
        out
    }
}
