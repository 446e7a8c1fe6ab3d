//! Accuracy, precision, recall, and F1 under each averaging mode.
//!
//! cargo run --example metrics

use oneshot::metrics::{evaluate_with, Averaging};

fn main() -> oneshot::Result<()> {
    let y_true = ["a", "a", "a", "b", "b", "c"];
    let y_pred = ["a", "a", "b", "b", "c", "c"];
    let labels = ["a", "b", "c"];
    for avg in [Averaging::Weighted, Averaging::Macro, Averaging::Micro] {
        let r = evaluate_with(&y_true, &y_pred, &labels, avg)?;
        println!(
            "{:<8} acc {:.4}  p {:.4}  r {:.4}  f1 {:.4}",
            avg.to_string(),
            r.accuracy,
            r.precision,
            r.recall,
            r.f1
        );
    }
    let r = evaluate_with(&y_true, &y_pred, &labels, Averaging::Weighted)?;
    println!("confusion (rows true, cols predicted): {:?}", r.confusion);
    for c in &r.per_class {
        println!("  {}: p {:.4} r {:.4} f1 {:.4} n {}", c.label, c.precision, c.recall, c.f1, c.support);
    }
    Ok(())
}
