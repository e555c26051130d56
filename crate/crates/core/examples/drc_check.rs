//! Width, space and area checks on a small hand-built snippet.

use hotspot::drc::{minimal_drc, RuleDeck};
use hotspot::geom::{Point, Rect};
use hotspot::layout::PatternSnippet;

fn main() {
    let deck = RuleDeck::default();
    println!("rule deck: {deck:?}");
    let mut s = PatternSnippet::new("drc-demo", Point::new(0, 0), (1200, 1200));
    s.polygons = [
        Rect::new(-400, -40, 400, 40),  // clean line
        Rect::new(-400, 80, 400, 110),  // too narrow, too close to the first
        Rect::new(200, 300, 230, 330),  // tiny island
        Rect::new(-100, 300, -20, 500), // clean
    ]
    .iter()
    .map(|r| r.to_polygon(1))
    .collect();
    let report = minimal_drc(&s, &deck);
    println!("passed: {}", report.passed());
    for v in &report.violations {
        println!(
            "  {:>5} at ({:.1}, {:.1}): measured {:.1}, required {:.1}",
            v.kind.as_str(),
            v.location.0,
            v.location.1,
            v.measured,
            v.required
        );
    }
}
