//! Fragment-topology feature vectors for the bundled offset pair: the two
//! snippets differ only by a sideways shift of one neighbor.

use hotspot::ftp::{anchor_vector, fragment_layout, FtpSchema};
use hotspot::layout::PatternSnippet;

fn main() {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/data/offset_pair.json");
    let pair: Vec<PatternSnippet> = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    let schema = FtpSchema::default();
    let cols = schema.columns();
    println!("schema {} with {} columns", schema.schema_id(), cols.len());
    println!("{} fragments in the first snippet", fragment_layout(&pair[0], schema.max_frag_len).len());

    let a = anchor_vector(&pair[0], &schema).unwrap();
    let b = anchor_vector(&pair[1], &schema).unwrap();
    for (i, c) in cols.iter().enumerate() {
        if a.values[i] != b.values[i] {
            println!("  {c}: {} -> {}", a.values[i], b.values[i]);
        }
    }
    let present = a.values.iter().filter(|v| **v != 0.0).count();
    println!("{present} nonzero entries in the first vector");
}
