//! Minimal width / space / area rule checking.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{rects_to_polygons, Dir, LayoutPolygon, Point, Rect};
use crate::layout::PatternSnippet;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RuleDeck {
    pub min_width: i64,
    pub min_space: i64,
    pub min_area: i64,
}

impl Default for RuleDeck {
    fn default() -> Self {
        RuleDeck { min_width: 64, min_space: 48, min_area: 8000 }
    }
}

impl RuleDeck {
    pub fn validate(&self) -> Result<()> {
        if self.min_width <= 0 || self.min_space <= 0 || self.min_area <= 0 {
            return Err(Error::Config(format!("rule deck values must be positive: {self:?}")));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RuleKind {
    Width,
    Space,
    Area,
}

impl RuleKind {
    pub fn as_str(self) -> &'static str {
        match self {
            RuleKind::Width => "width",
            RuleKind::Space => "space",
            RuleKind::Area => "area",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DrcViolation {
    pub kind: RuleKind,
    pub location: (f64, f64),
    pub measured: f64,
    pub required: f64,
}

impl DrcViolation {
    fn total_cmp(&self, o: &Self) -> Ordering {
        self.kind
            .cmp(&o.kind)
            .then(self.location.0.total_cmp(&o.location.0))
            .then(self.location.1.total_cmp(&o.location.1))
            .then(self.measured.total_cmp(&o.measured))
    }
}

pub fn sort_violations(v: &mut [DrcViolation]) {
    v.sort_by(|a, b| a.total_cmp(b));
}

#[derive(Clone, Debug, PartialEq)]
pub struct DrcReport {
    pub violations: Vec<DrcViolation>,
}

impl DrcReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// A boundary edge with its outward side, normalized so `lo < hi`.
#[derive(Clone, Copy, Debug)]
struct SideEdge {
    /// Fixed coordinate (y for horizontal edges, x for vertical ones).
    at: i64,
    lo: i64,
    hi: i64,
    outward: Dir,
    cut: bool,
}

fn side_edges(p: &LayoutPolygon, cut: Option<&Rect>) -> Vec<SideEdge> {
    p.edges()
        .filter_map(|(a, b)| {
            let d = Dir::of(a, b)?;
            let cut = cut.is_some_and(|w| w.boundary_holds(a, b));
            Some(if d.is_horizontal() {
                SideEdge { at: a.y, lo: a.x.min(b.x), hi: a.x.max(b.x), outward: d.right(), cut }
            } else {
                SideEdge { at: a.x, lo: a.y.min(b.y), hi: a.y.max(b.y), outward: d.right(), cut }
            })
        })
        .collect()
}

fn located(horizontal: bool, along: f64, across: f64) -> (f64, f64) {
    if horizontal {
        (along, across)
    } else {
        (across, along)
    }
}

/// Width violations of a single polygon.
pub fn check_width(p: &LayoutPolygon, deck: &RuleDeck) -> Vec<DrcViolation> {
    check_width_in(p, deck, None)
}

/// Width check ignoring pairs that involve an edge lying on `cut`, the
/// boundary of the window the polygon was clipped to.
fn check_width_in(p: &LayoutPolygon, deck: &RuleDeck, cut: Option<&Rect>) -> Vec<DrcViolation> {
    let edges = side_edges(p, cut);
    let mut out = Vec::new();
    // (low side, high side): interior lies between an edge facing down/left
    // and an edge facing up/right further along the axis.
    for (low, high, horizontal) in [(Dir::South, Dir::North, true), (Dir::West, Dir::East, false)] {
        for e in edges.iter().filter(|e| e.outward == low && !e.cut) {
            for f in edges.iter().filter(|f| f.outward == high && !f.cut) {
                let d = f.at - e.at;
                if d <= 0 || d >= deck.min_width {
                    continue;
                }
                let lo = e.lo.max(f.lo);
                let hi = e.hi.min(f.hi);
                if hi <= lo {
                    continue;
                }
                out.push(DrcViolation {
                    kind: RuleKind::Width,
                    location: located(horizontal, (lo + hi) as f64 / 2.0, (e.at + f.at) as f64 / 2.0),
                    measured: d as f64,
                    required: deck.min_width as f64,
                });
            }
        }
    }
    out
}

fn check_area_in(p: &LayoutPolygon, deck: &RuleDeck, cut: Option<&Rect>) -> Option<DrcViolation> {
    if let Some(w) = cut {
        if p.edges().any(|(a, b)| w.boundary_holds(a, b)) {
            return None;
        }
    }
    let area = p.area();
    (area < deck.min_area as i128).then(|| {
        let bb = p.bbox();
        DrcViolation {
            kind: RuleKind::Area,
            location: ((bb.x0 + bb.x1) as f64 / 2.0, (bb.y0 + bb.y1) as f64 / 2.0),
            measured: area as f64,
            required: deck.min_area as f64,
        }
    })
}

#[derive(Clone, Copy, Debug)]
struct Corner {
    at: Point,
    sx: i64,
    sy: i64,
}

fn convex_corners(p: &LayoutPolygon) -> Vec<Corner> {
    let n = p.len();
    let mut out = Vec::new();
    for i in 0..n {
        let prev = p.vertices[(i + n - 1) % n];
        let cur = p.vertices[i];
        let next = p.vertices[(i + 1) % n];
        let d1 = ((cur.x - prev.x).signum(), (cur.y - prev.y).signum());
        let d2 = ((next.x - cur.x).signum(), (next.y - cur.y).signum());
        if d1.0 * d2.1 - d1.1 * d2.0 > 0 {
            out.push(Corner { at: cur, sx: d1.0 - d2.0, sy: d1.1 - d2.1 });
        }
    }
    out
}

fn edge_gap(t: &SideEdge, b: &SideEdge, deck: &RuleDeck, horizontal: bool) -> Option<DrcViolation> {
    let d = b.at - t.at;
    if d < 0 || d >= deck.min_space {
        return None;
    }
    let lo = t.lo.max(b.lo);
    let hi = t.hi.min(b.hi);
    (hi > lo).then(|| DrcViolation {
        kind: RuleKind::Space,
        location: located(horizontal, (lo + hi) as f64 / 2.0, (t.at + b.at) as f64 / 2.0),
        measured: d as f64,
        required: deck.min_space as f64,
    })
}

fn corner_gap(c1: &Corner, c2: &Corner, deck: &RuleDeck) -> Option<DrcViolation> {
    if c1.sx != 1 || c2.sx != -1 || c2.sy != -c1.sy {
        return None;
    }
    let dx = c2.at.x - c1.at.x;
    let dy = c2.at.y - c1.at.y;
    if dx * c1.sx < 0 || dy * c1.sy < 0 {
        return None;
    }
    let d2 = dx * dx + dy * dy;
    (d2 < deck.min_space * deck.min_space).then(|| DrcViolation {
        kind: RuleKind::Space,
        location: ((c1.at.x + c2.at.x) as f64 / 2.0, (c1.at.y + c2.at.y) as f64 / 2.0),
        measured: (d2 as f64).sqrt(),
        required: deck.min_space as f64,
    })
}

fn overlap_violation(a: &Rect, b: &Rect, deck: &RuleDeck) -> Option<DrcViolation> {
    a.intersect(b).map(|r| DrcViolation {
        kind: RuleKind::Space,
        location: ((r.x0 + r.x1) as f64 / 2.0, (r.y0 + r.y1) as f64 / 2.0),
        measured: 0.0,
        required: deck.min_space as f64,
    })
}

/// Space violations between distinct polygons and across notches of the
/// same polygon. Sorted-sweep implementation.
pub fn check_space(s: &PatternSnippet, deck: &RuleDeck) -> Vec<DrcViolation> {
    space_fast(&s.polygons, deck)
}

fn space_fast(polys: &[LayoutPolygon], deck: &RuleDeck) -> Vec<DrcViolation> {
    let mut out = Vec::new();
    let all: Vec<SideEdge> = polys.iter().flat_map(|p| side_edges(p, None)).collect();
    for (up, down, horizontal) in [(Dir::North, Dir::South, true), (Dir::East, Dir::West, false)] {
        let tops: Vec<&SideEdge> = all.iter().filter(|e| e.outward == up).collect();
        let mut bottoms: Vec<&SideEdge> = all.iter().filter(|e| e.outward == down).collect();
        bottoms.sort_by_key(|e| (e.at, e.lo));
        for t in tops {
            let start = bottoms.partition_point(|b| b.at < t.at);
            for b in &bottoms[start..] {
                if b.at - t.at >= deck.min_space {
                    break;
                }
                out.extend(edge_gap(t, b, deck, horizontal));
            }
        }
    }
    let mut corners: Vec<Corner> = polys.iter().flat_map(convex_corners).collect();
    corners.sort_by_key(|c| (c.at.x, c.at.y));
    for c1 in corners.iter().filter(|c| c.sx == 1) {
        let start = corners.partition_point(|c| c.at.x < c1.at.x);
        for c2 in &corners[start..] {
            if c2.at.x - c1.at.x >= deck.min_space {
                break;
            }
            out.extend(corner_gap(c1, c2, deck));
        }
    }
    // Distinct polygons with overlapping interiors: sweep over bounding boxes.
    let mut order: Vec<(Rect, usize)> = polys.iter().enumerate().map(|(i, p)| (p.bbox(), i)).collect();
    order.sort_by_key(|&(r, i)| (r.x0, i));
    let rects: Vec<Vec<Rect>> = polys.iter().map(|p| p.to_rects()).collect();
    for (k, &(ra, ia)) in order.iter().enumerate() {
        for &(rb, ib) in &order[k + 1..] {
            if rb.x0 >= ra.x1 {
                break;
            }
            if ra.intersect(&rb).is_none() {
                continue;
            }
            for a in &rects[ia] {
                for b in &rects[ib] {
                    out.extend(overlap_violation(a, b, deck));
                }
            }
        }
    }
    sort_violations(&mut out);
    out
}

/// Reference all-pairs implementation of [`check_space`].
pub fn check_space_brute(s: &PatternSnippet, deck: &RuleDeck) -> Vec<DrcViolation> {
    let polys = &s.polygons;
    let mut out = Vec::new();
    let all: Vec<SideEdge> = polys.iter().flat_map(|p| side_edges(p, None)).collect();
    for t in &all {
        for b in &all {
            match (t.outward, b.outward) {
                (Dir::North, Dir::South) => out.extend(edge_gap(t, b, deck, true)),
                (Dir::East, Dir::West) => out.extend(edge_gap(t, b, deck, false)),
                _ => {}
            }
        }
    }
    let corners: Vec<Corner> = polys.iter().flat_map(convex_corners).collect();
    for c1 in &corners {
        for c2 in &corners {
            out.extend(corner_gap(c1, c2, deck));
        }
    }
    for i in 0..polys.len() {
        for j in i + 1..polys.len() {
            for a in polys[i].to_rects() {
                for b in polys[j].to_rects() {
                    out.extend(overlap_violation(&a, &b, deck));
                }
            }
        }
    }
    sort_violations(&mut out);
    out
}

/// Merges polygons whose interiors overlap; abutting polygons are kept
/// apart so their zero-distance contact is still reported.
pub fn merge_overlapping(polys: &[LayoutPolygon]) -> Vec<LayoutPolygon> {
    let n = polys.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    let mut order: Vec<(Rect, usize)> = polys.iter().enumerate().map(|(i, p)| (p.bbox(), i)).collect();
    order.sort_by_key(|&(r, i)| (r.x0, i));
    let rects: Vec<Vec<Rect>> = polys.iter().map(|p| p.to_rects()).collect();
    let mut any = false;
    for (k, &(ra, ia)) in order.iter().enumerate() {
        for &(rb, ib) in &order[k + 1..] {
            if rb.x0 >= ra.x1 {
                break;
            }
            if ra.intersect(&rb).is_none() {
                continue;
            }
            let hit = rects[ia].iter().any(|a| rects[ib].iter().any(|b| a.intersect(b).is_some()));
            if hit {
                any = true;
                let (x, y) = (find(&mut parent, ia), find(&mut parent, ib));
                parent[x.max(y)] = x.min(y);
            }
        }
    }
    if !any {
        return polys.to_vec();
    }
    let mut out = Vec::new();
    for i in 0..n {
        if find(&mut parent, i) != i {
            continue;
        }
        let group: Vec<LayoutPolygon> = (0..n).filter(|&j| find(&mut parent, j) == i).map(|j| polys[j].clone()).collect();
        if group.len() == 1 {
            out.push(group[0].clone());
        } else {
            let rects: Vec<Rect> = group.iter().flat_map(|p| p.to_rects()).collect();
            out.extend(rects_to_polygons(&rects, group[0].layer_id).0);
        }
    }
    out
}

/// Full check of a snippet. Edges lying on the window boundary are cuts,
/// not drawn geometry, and do not take part in width or area checks.
pub fn minimal_drc(s: &PatternSnippet, deck: &RuleDeck) -> DrcReport {
    let merged;
    let polys: &[LayoutPolygon] = if s.polygons.len() > 1 {
        merged = merge_overlapping(&s.polygons);
        &merged
    } else {
        &s.polygons
    };
    let win = s.window();
    let mut violations = Vec::new();
    for p in polys {
        violations.extend(check_width_in(p, deck, Some(&win)));
        violations.extend(check_area_in(p, deck, Some(&win)));
    }
    violations.extend(space_fast(polys, deck));
    sort_violations(&mut violations);
    DrcReport { violations }
}

/// Layout-level check: the union merge is applied to the whole layout and
/// no edge is treated as a cut.
pub fn check_layout(polys: &[LayoutPolygon], deck: &RuleDeck) -> DrcReport {
    let merged = merge_overlapping(polys);
    let mut violations = Vec::new();
    for p in &merged {
        violations.extend(check_width_in(p, deck, None));
        violations.extend(check_area_in(p, deck, None));
    }
    violations.extend(space_fast(&merged, deck));
    sort_violations(&mut violations);
    DrcReport { violations }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rect(x0: i64, y0: i64, x1: i64, y1: i64) -> LayoutPolygon {
        Rect::new(x0, y0, x1, y1).to_polygon(1)
    }

    fn snippet(polys: Vec<LayoutPolygon>) -> PatternSnippet {
        let mut s = PatternSnippet::new("t", Point::new(0, 0), (100_000, 100_000));
        s.polygons = polys;
        s
    }

    fn deck(w: i64, s: i64, a: i64) -> RuleDeck {
        RuleDeck { min_width: w, min_space: s, min_area: a }
    }

    #[test]
    fn width_examples() {
        let r = rect(0, 0, 100, 50);
        assert!(check_width(&r, &deck(50, 1, 1)).is_empty());
        let v = check_width(&r, &deck(51, 1, 1));
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].measured, 50.0);
    }

    #[test]
    fn space_examples() {
        let s = snippet(vec![rect(0, 0, 100, 100), rect(160, 0, 260, 100)]);
        let v = check_space(&s, &deck(1, 65, 1));
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].measured, 60.0);
        let s = snippet(vec![rect(0, 0, 100, 100), rect(165, 0, 265, 100)]);
        assert!(check_space(&s, &deck(1, 65, 1)).is_empty());
        let s = snippet(vec![rect(0, 0, 100, 100), rect(130, 140, 230, 240)]);
        let v = check_space(&s, &deck(1, 55, 1));
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].measured, 50.0);
    }

    #[test]
    fn minimal_drc_examples() {
        let d = deck(1, 65, 6000);
        assert!(minimal_drc(&snippet(vec![]), &d).passed());
        let s = snippet(vec![rect(0, 0, 100, 100), rect(160, 0, 260, 100)]);
        assert_eq!(minimal_drc(&s, &d).violations.len(), 1);
        let r = minimal_drc(&snippet(vec![rect(0, 0, 100, 50)]), &d);
        assert_eq!(r.violations.len(), 1);
        assert_eq!(r.violations[0].kind, RuleKind::Area);
        assert_eq!(r.violations[0].measured, 5000.0);
    }

    #[test]
    fn touching_is_violation_and_overlap_is_merged() {
        let d = deck(1, 10, 1);
        let touching = snippet(vec![rect(0, 0, 100, 100), rect(100, 0, 200, 100)]);
        let v = minimal_drc(&touching, &d).violations;
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].measured, 0.0);
        let overlapping = snippet(vec![rect(0, 0, 100, 100), rect(50, 0, 200, 100)]);
        assert!(minimal_drc(&overlapping, &d).passed());
        assert_eq!(check_space_brute(&overlapping, &d), check_space(&overlapping, &d));
    }

    #[test]
    fn notch_space_on_same_polygon() {
        let u = LayoutPolygon::new(
            [(0, 0), (300, 0), (300, 200), (200, 200), (200, 100), (160, 100), (160, 200), (0, 200)]
                .iter()
                .map(|&(x, y)| Point::new(x, y))
                .collect(),
            1,
        );
        let v = check_space(&snippet(vec![u]), &deck(1, 48, 1));
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].measured, 40.0);
    }

    #[test]
    fn cut_edges_do_not_count() {
        let mut s = PatternSnippet::new("t", Point::new(0, 0), (200, 200));
        // A sliver flush with the window's left edge.
        s.polygons.push(rect(-100, -50, -90, 50));
        assert!(minimal_drc(&s, &deck(64, 48, 8000)).passed());
    }
}
