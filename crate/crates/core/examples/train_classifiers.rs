//! Train every classifier on a one-shot support set and score the query set.
//!
//! cargo run --release --example train_classifiers

use oneshot::classify::{train, ClassifierSpec, ModelKind};
use oneshot::corpus::one_shot_split;
use oneshot::featurize::{FeaturizerKind, FeaturizerSpec};
use oneshot::metrics::evaluate;
use oneshot::synth::class_corpus;

fn main() -> oneshot::Result<()> {
    let corpus = class_corpus("toy", 3, 30, 5)?;
    let split = one_shot_split(&corpus, 11)?;
    let spec = FeaturizerSpec::new(FeaturizerKind::CharNgrams { n_min: 2, n_max: 4 });
    // Transductive: idf is fitted on every document, labels stay hidden.
    let fitted = spec.load(None)?.fit(corpus.documents())?;
    let xs = fitted.transform(&split.support)?;
    let xq = fitted.transform(&split.query)?;
    let ys: Vec<&str> = split.support.iter().map(|d| d.label.as_str()).collect();
    let yq: Vec<&str> = split.query.iter().map(|d| d.label.as_str()).collect();

    println!("{} features, {} support, {} query", xs.n_cols(), xs.n_rows(), xq.n_rows());
    for kind in ModelKind::ALL {
        let model = train(&ClassifierSpec::new(kind).with_seed(1), &xs, &ys)?;
        let pred = model.predict(&xq)?;
        let r = evaluate(&yq, &pred, corpus.labels())?;
        println!("{:<4} accuracy {:.4}  f1 {:.4}", kind.to_string(), r.accuracy, r.f1);
    }
    Ok(())
}
