//! Accuracy, precision, recall, F1, and confusion matrices.
//!
//! A zero denominator yields 0 and is counted in
//! [`EvalReport::zero_division`] rather than raising an error.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// How per-class values are combined into the headline numbers.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Averaging {
    /// Weighted by true-class support.
    #[default]
    Weighted,
    /// Unweighted mean over `label_order`.
    Macro,
    /// Pooled counts; equals accuracy for single-label data.
    Micro,
}

impl fmt::Display for Averaging {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Averaging::Weighted => "weighted",
            Averaging::Macro => "macro",
            Averaging::Micro => "micro",
        })
    }
}

impl FromStr for Averaging {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "weighted" => Ok(Averaging::Weighted),
            "macro" => Ok(Averaging::Macro),
            "micro" => Ok(Averaging::Micro),
            _ => Err(Error::Invalid(format!("unknown averaging mode {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub label: String,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    /// Number of true instances.
    pub support: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub averaging: Averaging,
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    /// In `label_order`.
    pub per_class: Vec<ClassMetrics>,
    /// `confusion[t][p]` counts rows with true label `t` predicted as `p`,
    /// both indexed by `label_order`.
    pub confusion: Vec<Vec<u64>>,
    /// Precision or recall values that hit a zero denominator.
    pub zero_division: usize,
}

impl EvalReport {
    pub fn labels(&self) -> impl Iterator<Item = &str> {
        self.per_class.iter().map(|c| c.label.as_str())
    }

    pub fn class(&self, label: &str) -> Option<&ClassMetrics> {
        self.per_class.iter().find(|c| c.label == label)
    }

    pub fn n_samples(&self) -> u64 {
        self.confusion.iter().flatten().sum()
    }
}

fn ratio(num: u64, den: u64, zero_division: &mut usize) -> f64 {
    if den == 0 {
        *zero_division += 1;
        0.0
    } else {
        num as f64 / den as f64
    }
}

fn harmonic(p: f64, r: f64) -> f64 {
    if p + r == 0.0 {
        0.0
    } else {
        2.0 * p * r / (p + r)
    }
}

/// Evaluate with weighted averaging.
pub fn evaluate<S: AsRef<str>, T: AsRef<str>, L: AsRef<str>>(
    y_true: &[S],
    y_pred: &[T],
    label_order: &[L],
) -> Result<EvalReport> {
    evaluate_with(y_true, y_pred, label_order, Averaging::Weighted)
}

pub fn evaluate_with<S: AsRef<str>, T: AsRef<str>, L: AsRef<str>>(
    y_true: &[S],
    y_pred: &[T],
    label_order: &[L],
    averaging: Averaging,
) -> Result<EvalReport> {
    if y_true.len() != y_pred.len() {
        return Err(Error::LengthMismatch(y_true.len(), y_pred.len()));
    }
    if y_true.is_empty() {
        return Err(Error::Invalid("nothing to evaluate".into()));
    }
    let k = label_order.len();
    let index = |l: &str| {
        label_order
            .iter()
            .position(|x| x.as_ref() == l)
            .ok_or_else(|| Error::UnknownLabel(l.to_owned()))
    };
    let mut confusion = vec![vec![0u64; k]; k];
    for (t, p) in y_true.iter().zip(y_pred) {
        confusion[index(t.as_ref())?][index(p.as_ref())?] += 1;
    }
    let n: u64 = y_true.len() as u64;
    let tp: Vec<u64> = (0..k).map(|i| confusion[i][i]).collect();
    let support: Vec<u64> = confusion.iter().map(|r| r.iter().sum()).collect();
    let predicted: Vec<u64> = (0..k).map(|j| confusion.iter().map(|r| r[j]).sum()).collect();
    let correct: u64 = tp.iter().sum();
    let accuracy = correct as f64 / n as f64;

    let mut zero_division = 0;
    let per_class: Vec<ClassMetrics> = (0..k)
        .map(|i| {
            let precision = ratio(tp[i], predicted[i], &mut zero_division);
            let recall = ratio(tp[i], support[i], &mut zero_division);
            ClassMetrics {
                label: label_order[i].as_ref().to_owned(),
                precision,
                recall,
                f1: harmonic(precision, recall),
                support: support[i],
            }
        })
        .collect();

    let (precision, recall, f1) = match averaging {
        Averaging::Weighted => {
            let w = |f: fn(&ClassMetrics) -> f64| {
                per_class
                    .iter()
                    .map(|c| c.support as f64 * f(c))
                    .sum::<f64>()
                    / n as f64
            };
            // Weighted recall is sum(tp) / n; computing it that way keeps the
            // identity with accuracy exact in floating point.
            (w(|c| c.precision), accuracy, w(|c| c.f1))
        }
        Averaging::Macro => {
            let m = |f: fn(&ClassMetrics) -> f64| {
                per_class.iter().map(f).sum::<f64>() / k.max(1) as f64
            };
            (m(|c| c.precision), m(|c| c.recall), m(|c| c.f1))
        }
        Averaging::Micro => (accuracy, accuracy, accuracy),
    };

    Ok(EvalReport {
        averaging,
        accuracy,
        precision,
        recall,
        f1,
        per_class,
        confusion,
        zero_division,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn perfect_prediction() {
        let y = ["a", "b", "b", "c"];
        let r = evaluate(&y, &y, &["a", "b", "c"]).unwrap();
        assert_eq!((r.accuracy, r.precision, r.recall, r.f1), (1.0, 1.0, 1.0, 1.0));
        assert_eq!(r.confusion, vec![vec![1, 0, 0], vec![0, 2, 0], vec![0, 0, 1]]);
        assert_eq!(r.zero_division, 0);
    }

    #[test]
    fn worked_example() {
        let r = evaluate(&["A", "A", "B", "B"], &["A", "B", "B", "B"], &["A", "B"]).unwrap();
        assert_eq!(r.accuracy, 0.75);
        let a = r.class("A").unwrap();
        let b = r.class("B").unwrap();
        assert_eq!((a.precision, a.recall), (1.0, 0.5));
        assert!((a.f1 - 2.0 / 3.0).abs() < 1e-15);
        assert!((b.precision - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(b.recall, 1.0);
        assert!((b.f1 - 0.8).abs() < 1e-15);
        assert!((r.precision - 5.0 / 6.0).abs() < 1e-15);
        assert_eq!(r.recall, 0.75);
        assert!((r.f1 - 11.0 / 15.0).abs() < 1e-15);
        assert_eq!(r.confusion, vec![vec![1, 1], vec![0, 2]]);
    }

    #[test]
    fn never_predicted_class_counts_zero_division() {
        let r = evaluate(&["A", "B"], &["A", "A"], &["A", "B"]).unwrap();
        assert_eq!(r.class("B").unwrap().precision, 0.0);
        assert_eq!(r.zero_division, 1);
    }

    #[test]
    fn macro_and_micro() {
        let t = ["A", "A", "B", "B"];
        let p = ["A", "B", "B", "B"];
        let m = evaluate_with(&t, &p, &["A", "B"], Averaging::Macro).unwrap();
        assert!((m.precision - (1.0 + 2.0 / 3.0) / 2.0).abs() < 1e-15);
        assert_eq!(m.recall, 0.75);
        let u = evaluate_with(&t, &p, &["A", "B"], Averaging::Micro).unwrap();
        assert_eq!((u.precision, u.recall, u.f1), (0.75, 0.75, 0.75));
    }

    #[test]
    fn input_errors() {
        assert!(matches!(evaluate(&["A"], &["A", "B"], &["A", "B"]), Err(Error::LengthMismatch(1, 2))));
        assert!(matches!(evaluate(&["A"], &["C"], &["A", "B"]), Err(Error::UnknownLabel(_))));
    }

    fn pairs() -> impl Strategy<Value = (Vec<usize>, Vec<usize>, usize)> {
        (2usize..6).prop_flat_map(|k| {
            (1usize..60).prop_flat_map(move |n| {
                (
                    proptest::collection::vec(0..k, n),
                    proptest::collection::vec(0..k, n),
                    Just(k),
                )
            })
        })
    }

    fn names(v: &[usize]) -> Vec<String> {
        v.iter().map(|i| format!("L{i}")).collect()
    }

    proptest! {
        #[test]
        fn weighted_recall_is_accuracy((t, p, k) in pairs()) {
            let labels = names(&(0..k).collect::<Vec<_>>());
            let r = evaluate(&names(&t), &names(&p), &labels).unwrap();
            prop_assert_eq!(r.recall, r.accuracy);
            for v in [r.accuracy, r.precision, r.recall, r.f1] {
                prop_assert!((0.0..=1.0).contains(&v));
            }
            prop_assert_eq!(r.n_samples(), t.len() as u64);
            let trace: u64 = (0..k).map(|i| r.confusion[i][i]).sum();
            prop_assert_eq!(r.accuracy, trace as f64 / t.len() as f64);
        }

        #[test]
        fn joint_permutation_invariant((t, p, k) in pairs(), seed in any::<u64>()) {
            let labels = names(&(0..k).collect::<Vec<_>>());
            let mut order: Vec<usize> = (0..t.len()).collect();
            crate::rng::Xoshiro256StarStar::seed_from_u64(seed).shuffle(&mut order);
            let t2: Vec<usize> = order.iter().map(|&i| t[i]).collect();
            let p2: Vec<usize> = order.iter().map(|&i| p[i]).collect();
            let a = evaluate(&names(&t), &names(&p), &labels).unwrap();
            let b = evaluate(&names(&t2), &names(&p2), &labels).unwrap();
            prop_assert_eq!(a.confusion, b.confusion);
            prop_assert_eq!(a.accuracy, b.accuracy);
            prop_assert_eq!(a.per_class, b.per_class);
        }

        #[test]
        fn relabeling_permutes_consistently((t, p, k) in pairs(), seed in any::<u64>()) {
            let mut perm: Vec<usize> = (0..k).collect();
            crate::rng::Xoshiro256StarStar::seed_from_u64(seed).shuffle(&mut perm);
            let labels = names(&(0..k).collect::<Vec<_>>());
            let relabel = |v: &[usize]| v.iter().map(|&i| perm[i]).collect::<Vec<_>>();
            let a = evaluate(&names(&t), &names(&p), &labels).unwrap();
            let b = evaluate(&names(&relabel(&t)), &names(&relabel(&p)), &labels).unwrap();
            for i in 0..k {
                let ca = &a.per_class[i];
                let cb = &b.per_class[perm[i]];
                prop_assert_eq!((ca.precision, ca.recall, ca.f1, ca.support), (cb.precision, cb.recall, cb.f1, cb.support));
                for j in 0..k {
                    prop_assert_eq!(a.confusion[i][j], b.confusion[perm[i]][perm[j]]);
                }
            }
            prop_assert_eq!(a.recall, b.recall);
            prop_assert!((a.precision - b.precision).abs() < 1e-12);
            prop_assert!((a.f1 - b.f1).abs() < 1e-12);
        }
    }
}
