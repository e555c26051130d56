//! Rectilinear polygons: union of rectangles, window clipping, the eight
//! square-group transforms and edge moves.

use hotspot::geom::{move_edge, rects_to_polygons, validate_polygon, Dihedral, Point, Rect};
use hotspot::layout::{extract_window, Layout};

fn main() {
    let rects = [Rect::new(0, 0, 300, 80), Rect::new(220, 0, 300, 400), Rect::new(500, 100, 580, 500)];
    let (polys, holes) = rects_to_polygons(&rects, 1);
    println!("{} polygons, {} holes", polys.len(), holes.len());
    for p in &polys {
        println!("  {} vertices, area {}, perimeter {}, bbox {:?}", p.len(), p.area(), p.perimeter(), p.bbox());
    }

    let layout = Layout::new(polys.clone(), 1);
    let s = extract_window(&layout, Point::new(280, 200), (320, 320));
    println!("window {:?} keeps {} clipped polygons", s.window(), s.polygons.len());

    for t in Dihedral::all() {
        let q = polys[0].transformed(t);
        println!("  {:?}: area {} bbox {:?}", t, q.area(), q.bbox());
    }

    let l = &polys[0];
    for e in 0..l.len() {
        match move_edge(l, e, 20) {
            Ok(m) => println!("edge {e} moved out 20 nm: area {} -> {}, valid {}", l.area(), m.area(), validate_polygon(&m).is_ok()),
            Err(err) => println!("edge {e}: {err}"),
        }
    }
}
