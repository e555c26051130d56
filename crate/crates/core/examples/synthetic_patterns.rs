//! Synthetic variants of a hotspot snippet: random perpendicular edge moves
//! kept only when the result is DRC-clean.

use hotspot::drc::{minimal_drc, RuleDeck};
use hotspot::layout::PatternSnippet;
use hotspot::patgen::{generate_synthetic_patterns, raw_candidates, GenParams};

fn main() {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/data/flip_pair.json");
    let pair: Vec<PatternSnippet> = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    let hotspot = &pair[0];
    let deck = RuleDeck::default();
    let params = GenParams { syn_pat_count: 10, ..GenParams::default() };

    println!("parent {} with {} polygons, move bound {} nm", hotspot.id, hotspot.polygons.len(), params.max_displacement());
    for v in generate_synthetic_patterns(hotspot, &params, &deck) {
        let bb: Vec<_> = v.snippet.polygons.iter().map(|p| p.bbox()).collect();
        println!(
            "  {}: {} moves, max |d| {} nm, {} attempts, bboxes {:?}",
            v.meta.pattern_id, v.meta.moves_applied, v.meta.max_abs_displacement_nm, v.meta.drc_attempts, bb
        );
    }

    let raw = raw_candidates(hotspot, &GenParams { syn_pat_count: 200, ..params }, &deck);
    let pass = raw.iter().filter(|s| minimal_drc(s, &deck).passed()).count();
    println!("ungated candidates passing DRC: {pass}/{}", raw.len());
}
