//! Align two clusterings whose label names differ, then list the items they
//! put in corresponding clusters.
//!
//!     cargo run --example clustering_alignment

use agreeset::generic::{align_clusterings, Clustering};

fn clustering(model: &str, labels: &[&str]) -> Clustering {
    Clustering {
        model_id: model.to_string(),
        labels: labels
            .iter()
            .enumerate()
            .map(|(i, l)| (format!("item{i}"), l.to_string()))
            .collect(),
    }
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let kmeans = clustering("kmeans", &["0", "0", "0", "1", "1", "1", "2", "2", "2", "2"]);
    let spectral = clustering("spectral", &["b", "b", "a", "a", "a", "a", "c", "c", "c", "c"]);
    let alignment = align_clusterings(&kmeans, &spectral)?;
    for (from, to) in &alignment.mapping {
        println!("kmeans {from} -> spectral {to}");
    }
    let agree = alignment.agreeing_items();
    println!("{} of 10 items agree: {:?}", agree.len(), agree);
    Ok(())
}
