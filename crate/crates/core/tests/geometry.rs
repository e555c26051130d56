mod common;

use proptest::prelude::*;

use hotspot::drc::{check_space, check_space_brute, check_width, minimal_drc, RuleDeck, RuleKind};
use hotspot::geom::{move_edge, validate_polygon, Dihedral, LayoutPolygon, Point, Rect};
use hotspot::layout::{extract_window, Layout, PatternSnippet};

use common::{poly, rect_poly};

fn arb_rect(lo: i64, hi: i64) -> impl Strategy<Value = Rect> {
    (lo..hi, lo..hi, 10i64..200, 10i64..200).prop_map(|(x, y, w, h)| Rect::new(x, y, x + w, y + h))
}

/// Rectangles with pairwise disjoint closures.
fn arb_separated(n: usize) -> impl Strategy<Value = Vec<Rect>> {
    prop::collection::vec(arb_rect(-300, 300), 1..=n).prop_map(|rs| {
        let mut kept: Vec<Rect> = Vec::new();
        for r in rs {
            let touches = kept.iter().any(|k| r.x0 <= k.x1 && k.x0 <= r.x1 && r.y0 <= k.y1 && k.y0 <= r.y1);
            if !touches {
                kept.push(r);
            }
        }
        kept
    })
}

fn snippet(polys: Vec<LayoutPolygon>) -> PatternSnippet {
    let mut s = PatternSnippet::new("t", Point::new(0, 0), (4000, 4000));
    s.polygons = polys;
    s
}

#[test]
fn straddling_rectangle_clips_to_intersection_area() {
    let l = Layout::new(vec![rect_poly(-50, -20, 70, 40)], 1);
    let s = extract_window(&l, Point::new(50, 0), (60, 60));
    assert_eq!(s.polygons.len(), 1);
    let bb = s.polygons[0].bbox();
    assert_eq!((bb.x0, bb.x1), (20, 70));
    let area = common::scanline_area(&[Rect::new(-50, -20, 70, 40).intersect(&Rect::new(20, -30, 80, 30)).unwrap()]);
    assert_eq!(s.polygons[0].area(), area);
}

#[test]
fn l_shape_arm_width_matches_brute_force() {
    let l = poly(&[(0, 0), (200, 0), (200, 40), (60, 40), (60, 200), (0, 200)]);
    assert_eq!(common::brute_min_width(&l), Some(40));
    let deck = RuleDeck { min_width: 50, ..RuleDeck::default() };
    let v = check_width(&l, &deck);
    assert!(!v.is_empty());
    assert!(v.iter().all(|x| x.kind == RuleKind::Width && x.measured == 40.0));
    // The arm is the horizontal one: every violation sits within it.
    assert!(v.iter().all(|x| x.location.1 <= 40.0));
}

#[test]
fn width_matches_brute_force_on_steps() {
    for (a, b) in [(30, 70), (55, 45), (80, 20)] {
        let p = poly(&[(0, 0), (300, 0), (300, a), (150, a), (150, b), (0, b)]);
        let w = common::brute_min_width(&p).unwrap();
        assert_eq!(w, a.min(b).min(150));
        let v = check_width(&p, &RuleDeck { min_width: w + 1, ..RuleDeck::default() });
        assert_eq!(v.iter().map(|x| x.measured).fold(f64::INFINITY, f64::min), w as f64);
        assert!(check_width(&p, &RuleDeck { min_width: w, ..RuleDeck::default() }).is_empty());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn clipped_area_matches_scanline(rs in prop::collection::vec(arb_rect(-200, 200), 1..6), cx in -100i64..100, cy in -100i64..100, w in 20i64..300, h in 20i64..300) {
        let (polys, holes) = hotspot::geom::rects_to_polygons(&rs, 1);
        prop_assume!(holes.is_empty());
        let s = extract_window(&Layout::new(polys, 1), Point::new(cx, cy), (w, h));
        let win = s.window();
        let clipped: Vec<Rect> = rs.iter().filter_map(|r| r.intersect(&win)).collect();
        let total: i128 = s.polygons.iter().map(|p| common::shoelace(p)).sum();
        prop_assert_eq!(total, common::scanline_area(&clipped));
        for p in &s.polygons {
            prop_assert!(validate_polygon(p).is_ok());
            prop_assert!(win.contains_rect(&p.bbox()));
        }
    }

    #[test]
    fn move_edge_round_trip(r in arb_rect(-100, 100), e in 0usize..4, d in -60i64..60) {
        let p = r.to_polygon(1);
        if let Ok(m) = move_edge(&p, e, d) {
            prop_assert!(validate_polygon(&m).is_ok());
            if let Ok(back) = move_edge(&m, e, -d) {
                prop_assert_eq!(back.normalized_start(), p.normalized_start());
            }
        }
    }

    #[test]
    fn move_edge_round_trip_on_l_shape(e in 0usize..6, d in -30i64..30, t in 0u8..8) {
        let p = poly(&[(0, 0), (200, 0), (200, 60), (80, 60), (80, 200), (0, 200)]).transformed(Dihedral { quarter_turns: t % 4, mirror: t >= 4 });
        if let Ok(m) = move_edge(&p, e, d) {
            prop_assert!(validate_polygon(&m).is_ok());
            prop_assert_eq!(common::shoelace(&m), m.area());
            if let Ok(back) = move_edge(&m, e, -d) {
                prop_assert_eq!(back.normalized_start(), p.normalized_start());
            }
        }
    }

    #[test]
    fn space_matches_pairwise_distances(rs in arb_separated(6), min_space in 20i64..120) {
        let polys: Vec<LayoutPolygon> = rs.iter().map(|r| r.to_polygon(1)).collect();
        let s = snippet(polys.clone());
        let deck = RuleDeck { min_space, ..RuleDeck::default() };
        let v = check_space(&s, &deck);
        prop_assert_eq!(&v, &check_space_brute(&s, &deck));
        let mut close = Vec::new();
        for i in 0..polys.len() {
            for j in i + 1..polys.len() {
                let d = common::polygon_dist(&polys[i], &polys[j]);
                if d < min_space as f64 {
                    close.push(d);
                }
            }
        }
        prop_assert_eq!(v.is_empty(), close.is_empty());
        for d in &close {
            prop_assert!(v.iter().any(|x| (x.measured - d).abs() < 1e-9), "pair distance {} not reported", d);
        }
        for x in &v {
            prop_assert!(x.measured < x.required);
            prop_assert!(close.iter().any(|d| *d <= x.measured + 1e-9));
        }
    }

    #[test]
    fn loosening_rules_never_adds_violations(rs in prop::collection::vec(arb_rect(-200, 200), 1..6), w in 10i64..80, sp in 10i64..80, a in 100i64..10_000, dw in 0i64..20, ds in 0i64..20, da in 0i64..1000) {
        let (polys, _) = hotspot::geom::rects_to_polygons(&rs, 1);
        let s = snippet(polys);
        let tight = RuleDeck { min_width: w, min_space: sp, min_area: a };
        let loose = RuleDeck { min_width: (w - dw).max(1), min_space: (sp - ds).max(1), min_area: (a - da).max(1) };
        let vt = minimal_drc(&s, &tight).violations;
        let vl = minimal_drc(&s, &loose).violations;
        prop_assert!(vl.len() <= vt.len());
        prop_assert_eq!(minimal_drc(&s, &tight).violations, vt);
    }
}

#[test]
fn diagonal_corner_gap_is_euclidean() {
    let s = snippet(vec![rect_poly(0, 0, 100, 100), rect_poly(130, 140, 200, 200)]);
    assert_eq!(common::polygon_dist(&s.polygons[0], &s.polygons[1]), 50.0);
    let v = check_space(&s, &RuleDeck { min_space: 55, ..RuleDeck::default() });
    assert_eq!(v.len(), 1);
    assert_eq!(v[0].measured, 50.0);
}
