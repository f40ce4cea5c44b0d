//! Load a dataset spec (default: COMPAS) and dump the instance as JSON.
//!
//!     cargo run --example load_dataset -- datasets/compas.json /tmp/compas.json

use fairclust::data::{load, DatasetSpec};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let spec_path = args.next().unwrap_or_else(|| "datasets/compas.json".into());
    let spec = DatasetSpec::load(&spec_path)?;
    let d = load(&spec)?;
    println!(
        "{}: {} points, features {:?}, dropped {:?}",
        spec.name,
        d.instance.num_clients(),
        d.feature_names,
        d.dropped_columns
    );
    for (label, size) in d.group_labels.iter().zip(&d.group_sizes) {
        println!("  {label}: {size}");
    }
    if let Some(out) = args.next() {
        std::fs::write(&out, d.instance.to_json_string()?)?;
        println!("wrote {out}");
    }
    Ok(())
}
