//! Regression predictions agree when they chain within epsilon.
//!
//!     cargo run --example regression_agreement

use agreeset::generic::{match_regression_table, Consensus, PredictionTable};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let records = [
        ("linear", "house-1", 210.0),
        ("forest", "house-1", 214.0),
        ("boosted", "house-1", 251.0),
        ("linear", "house-2", 98.0),
        ("forest", "house-2", 101.5),
        ("boosted", "house-2", 104.0),
    ]
    .map(|(m, i, v)| (m.to_string(), i.to_string(), v));
    let table = PredictionTable::from_records(records)?;
    for g in match_regression_table(&table, 5.0)? {
        if let Consensus::Value { mean, min, max } = g.consensus {
            println!("{} {}: mean {mean:.1} in [{min}, {max}]", g.item_id, g.signature);
        }
    }
    Ok(())
}
