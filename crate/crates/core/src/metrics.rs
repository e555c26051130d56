//! Confusion-matrix metrics. FP and FN rates are normalized by the total
//! number of tested patterns, not by class size.

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionCounts {
    pub tp: u64,
    pub tn: u64,
    pub fp: u64,
    pub fn_: u64,
}

impl ConfusionCounts {
    pub fn total(&self) -> u64 {
        self.tp + self.tn + self.fp + self.fn_
    }

    /// Tallies `(actual, predicted)` hotspot flags.
    pub fn from_pairs(actual: &[bool], predicted: &[bool]) -> ConfusionCounts {
        assert_eq!(actual.len(), predicted.len());
        let mut c = ConfusionCounts::default();
        for (&a, &p) in actual.iter().zip(predicted) {
            match (a, p) {
                (true, true) => c.tp += 1,
                (true, false) => c.fn_ += 1,
                (false, true) => c.fp += 1,
                (false, false) => c.tn += 1,
            }
        }
        c
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub counts: ConfusionCounts,
    pub ht_hit_rate: f64,
    pub nht_hit_rate: f64,
    pub fp_rate: f64,
    pub fn_rate: f64,
    pub total_error_rate: f64,
    pub mcc: f64,
}

fn ratio(a: u64, b: u64) -> f64 {
    if b == 0 {
        0.0
    } else {
        a as f64 / b as f64
    }
}

/// Matthews correlation; 0 when any marginal is empty.
pub fn mcc(c: &ConfusionCounts) -> f64 {
    let (tp, tn, fp, fn_) = (c.tp as f64, c.tn as f64, c.fp as f64, c.fn_ as f64);
    let d = (tp + fp) * (tp + fn_) * (tn + fp) * (tn + fn_);
    if d == 0.0 {
        return 0.0;
    }
    ((tp * tn - fp * fn_) / d.sqrt()).clamp(-1.0, 1.0)
}

/// Class hit rates are 0 when the class is absent from the test set.
pub fn compute_metrics(c: ConfusionCounts) -> MetricsReport {
    let total = c.total();
    MetricsReport {
        counts: c,
        ht_hit_rate: ratio(c.tp, c.tp + c.fn_),
        nht_hit_rate: ratio(c.tn, c.tn + c.fp),
        fp_rate: ratio(c.fp, total),
        fn_rate: ratio(c.fn_, total),
        total_error_rate: ratio(c.fp + c.fn_, total),
        mcc: mcc(&c),
    }
}

impl MetricsReport {
    pub const CSV_HEADER: [&'static str; 7] = ["dataset", "ht_hit", "nht_hit", "fp_rate", "fn_rate", "total_err", "mcc"];

    /// Rates in the order of the CSV columns after `dataset`.
    pub fn values(&self) -> [f64; 6] {
        [self.ht_hit_rate, self.nht_hit_rate, self.fp_rate, self.fn_rate, self.total_error_rate, self.mcc]
    }

    pub fn csv_row(&self, dataset: &str) -> Vec<String> {
        let mut row = vec![dataset.to_string()];
        row.extend(self.values().iter().map(|v| format!("{v:.6}")));
        row
    }

    /// Largest absolute difference over all six metrics, in percentage points
    /// (MCC scaled by 100 like the rates).
    pub fn max_delta_points(&self, other: &MetricsReport) -> f64 {
        self.values().iter().zip(other.values()).map(|(a, b)| (a - b).abs() * 100.0).fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cc(tp: u64, tn: u64, fp: u64, fn_: u64) -> ConfusionCounts {
        ConfusionCounts { tp, tn, fp, fn_ }
    }

    #[test]
    fn perfect_and_inverted() {
        let m = compute_metrics(cc(5, 5, 0, 0));
        assert_eq!((m.ht_hit_rate, m.nht_hit_rate, m.total_error_rate, m.mcc), (1.0, 1.0, 0.0, 1.0));
        let m = compute_metrics(cc(0, 0, 5, 5));
        assert_eq!((m.ht_hit_rate, m.nht_hit_rate, m.total_error_rate, m.mcc), (0.0, 0.0, 1.0, -1.0));
    }

    #[test]
    fn single_class_prediction_mcc_zero() {
        assert_eq!(mcc(&cc(10, 0, 5, 0)), 0.0);
    }

    #[test]
    fn swap_symmetry() {
        let a = mcc(&cc(7, 3, 2, 4));
        let b = mcc(&cc(3, 7, 4, 2));
        assert!((a - b).abs() < 1e-15);
    }
}
