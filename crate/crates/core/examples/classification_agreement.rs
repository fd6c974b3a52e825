//! Group three image classifiers by the label they give each item.
//!
//!     cargo run --example classification_agreement

use std::collections::BTreeMap;
use std::path::PathBuf;

use agreeset::generic::{match_classification, read_labels_csv, read_predictions_csv, PredictionTable};
use agreeset::Status;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data/pets");
    let preds: PredictionTable<String> = read_predictions_csv(dir.join("predictions.csv"))?;
    let truth = read_labels_csv(dir.join("labels.csv"))?;
    let groups = match_classification(&preds, Some(&truth));

    let mut counts: BTreeMap<String, (usize, usize)> = BTreeMap::new();
    for g in &groups {
        let c = counts.entry(g.signature.to_string()).or_default();
        match g.correctness {
            Some(Status::TruePositive) => c.0 += 1,
            _ => c.1 += 1,
        }
    }
    println!("{:<28} {:>7} {:>5}", "signature", "correct", "wrong");
    for (sig, (ok, bad)) in counts {
        println!("{sig:<28} {ok:>7} {bad:>5}");
    }
    Ok(())
}
