//! Integer-nanometre rectilinear geometry.
//!
//! Polygons are stored counter-clockwise without a repeated closing vertex.
//! Every edge is axis-parallel; the interior of a polygon lies to the left of
//! each directed edge.

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::GeometryError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(from = "[i64; 2]", into = "[i64; 2]")]
pub struct Point {
    pub x: i64,
    pub y: i64,
}

impl Point {
    pub const fn new(x: i64, y: i64) -> Self {
        Point { x, y }
    }
}

impl From<[i64; 2]> for Point {
    fn from(v: [i64; 2]) -> Self {
        Point::new(v[0], v[1])
    }
}

impl From<Point> for [i64; 2] {
    fn from(p: Point) -> Self {
        [p.x, p.y]
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

/// Axis direction of a directed edge, or the outward side of an edge.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Dir {
    East,
    North,
    West,
    South,
}

impl Dir {
    pub fn of(a: Point, b: Point) -> Option<Dir> {
        match (b.x - a.x, b.y - a.y) {
            (dx, 0) if dx > 0 => Some(Dir::East),
            (dx, 0) if dx < 0 => Some(Dir::West),
            (0, dy) if dy > 0 => Some(Dir::North),
            (0, dy) if dy < 0 => Some(Dir::South),
            _ => None,
        }
    }

    pub fn unit(self) -> (i64, i64) {
        match self {
            Dir::East => (1, 0),
            Dir::North => (0, 1),
            Dir::West => (-1, 0),
            Dir::South => (0, -1),
        }
    }

    /// Side to the right of travel: the outward side of a CCW polygon edge.
    pub fn right(self) -> Dir {
        match self {
            Dir::East => Dir::South,
            Dir::South => Dir::West,
            Dir::West => Dir::North,
            Dir::North => Dir::East,
        }
    }

    pub fn opposite(self) -> Dir {
        match self {
            Dir::East => Dir::West,
            Dir::West => Dir::East,
            Dir::North => Dir::South,
            Dir::South => Dir::North,
        }
    }

    pub fn is_horizontal(self) -> bool {
        matches!(self, Dir::East | Dir::West)
    }
}

/// Axis-aligned rectangle `[x0, x1) x [y0, y1)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Rect {
    pub x0: i64,
    pub y0: i64,
    pub x1: i64,
    pub y1: i64,
}

impl Rect {
    pub const fn new(x0: i64, y0: i64, x1: i64, y1: i64) -> Self {
        Rect { x0, y0, x1, y1 }
    }

    pub fn centered(center: Point, w: i64, h: i64) -> Self {
        let x0 = center.x - w / 2;
        let y0 = center.y - h / 2;
        Rect::new(x0, y0, x0 + w, y0 + h)
    }

    pub fn width(&self) -> i64 {
        self.x1 - self.x0
    }

    pub fn height(&self) -> i64 {
        self.y1 - self.y0
    }

    pub fn area(&self) -> i128 {
        self.width() as i128 * self.height() as i128
    }

    pub fn is_empty(&self) -> bool {
        self.x1 <= self.x0 || self.y1 <= self.y0
    }

    pub fn intersect(&self, o: &Rect) -> Option<Rect> {
        let r = Rect::new(self.x0.max(o.x0), self.y0.max(o.y0), self.x1.min(o.x1), self.y1.min(o.y1));
        (!r.is_empty()).then_some(r)
    }

    pub fn contains_rect(&self, o: &Rect) -> bool {
        o.x0 >= self.x0 && o.x1 <= self.x1 && o.y0 >= self.y0 && o.y1 <= self.y1
    }

    pub fn expand(&self, m: i64) -> Rect {
        Rect::new(self.x0 - m, self.y0 - m, self.x1 + m, self.y1 + m)
    }

    pub fn to_polygon(&self, layer: i32) -> LayoutPolygon {
        LayoutPolygon::new(
            vec![Point::new(self.x0, self.y0), Point::new(self.x1, self.y0), Point::new(self.x1, self.y1), Point::new(self.x0, self.y1)],
            layer,
        )
    }

    /// True when the segment `a-b` lies on the rectangle boundary.
    pub fn boundary_holds(&self, a: Point, b: Point) -> bool {
        (a.x == b.x && (a.x == self.x0 || a.x == self.x1)) || (a.y == b.y && (a.y == self.y0 || a.y == self.y1))
    }
}

/// First invariant a polygon violates.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PolygonViolation {
    ZeroLengthEdge { edge: usize },
    NonRectilinear { edge: usize },
    TooFewVertices { count: usize },
    Collinear { vertex: usize },
    SelfIntersection { first: usize, second: usize },
    Clockwise,
}

impl fmt::Display for PolygonViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PolygonViolation::ZeroLengthEdge { edge } => write!(f, "edge {edge} has zero length"),
            PolygonViolation::NonRectilinear { edge } => write!(f, "edge {edge} is not axis-parallel"),
            PolygonViolation::TooFewVertices { count } => write!(f, "{count} vertices, need at least 4"),
            PolygonViolation::Collinear { vertex } => write!(f, "vertex {vertex} does not turn"),
            PolygonViolation::SelfIntersection { first, second } => {
                write!(f, "edges {first} and {second} intersect")
            }
            PolygonViolation::Clockwise => write!(f, "vertices are clockwise"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LayoutPolygon {
    pub vertices: Vec<Point>,
    #[serde(default = "default_layer")]
    pub layer_id: i32,
}

fn default_layer() -> i32 {
    1
}

impl LayoutPolygon {
    pub fn new(vertices: Vec<Point>, layer: i32) -> Self {
        LayoutPolygon { vertices, layer_id: layer }
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    /// Directed edge `i` as `(start, end)`.
    pub fn edge(&self, i: usize) -> (Point, Point) {
        let n = self.vertices.len();
        (self.vertices[i], self.vertices[(i + 1) % n])
    }

    pub fn edges(&self) -> impl Iterator<Item = (Point, Point)> + '_ {
        (0..self.vertices.len()).map(move |i| self.edge(i))
    }

    /// Twice the signed area; positive for counter-clockwise polygons.
    pub fn signed_area2(&self) -> i128 {
        let n = self.vertices.len();
        let mut s: i128 = 0;
        for i in 0..n {
            let a = self.vertices[i];
            let b = self.vertices[(i + 1) % n];
            s += a.x as i128 * b.y as i128 - b.x as i128 * a.y as i128;
        }
        s
    }

    pub fn area(&self) -> i128 {
        self.signed_area2().abs() / 2
    }

    pub fn perimeter(&self) -> i64 {
        self.edges().map(|(a, b)| (b.x - a.x).abs() + (b.y - a.y).abs()).sum()
    }

    pub fn bbox(&self) -> Rect {
        let mut r = Rect::new(i64::MAX, i64::MAX, i64::MIN, i64::MIN);
        for p in &self.vertices {
            r.x0 = r.x0.min(p.x);
            r.y0 = r.y0.min(p.y);
            r.x1 = r.x1.max(p.x);
            r.y1 = r.y1.max(p.y);
        }
        r
    }

    pub fn translated(&self, dx: i64, dy: i64) -> Self {
        LayoutPolygon::new(self.vertices.iter().map(|p| Point::new(p.x + dx, p.y + dy)).collect(), self.layer_id)
    }

    /// Applies a dihedral transform about the origin, restoring CCW order.
    pub fn transformed(&self, t: Dihedral) -> Self {
        let mut v: Vec<Point> = self.vertices.iter().map(|&p| t.apply(p)).collect();
        if t.mirror {
            v.reverse();
        }
        LayoutPolygon::new(v, self.layer_id)
    }

    /// Rotates the vertex list so that it starts at its lexicographically
    /// smallest `(x, y)` vertex.
    pub fn normalized_start(&self) -> Vec<Point> {
        let n = self.vertices.len();
        let start = (0..n).min_by_key(|&i| self.vertices[i]).unwrap_or(0);
        (0..n).map(|k| self.vertices[(start + k) % n]).collect()
    }

    /// Interior rectangles from a horizontal slab decomposition.
    pub fn to_rects(&self) -> Vec<Rect> {
        let mut ys: Vec<i64> = self.vertices.iter().map(|p| p.y).collect();
        ys.sort_unstable();
        ys.dedup();
        let verticals: Vec<(i64, i64, i64)> =
            self.edges().filter(|(a, b)| a.x == b.x && a.y != b.y).map(|(a, b)| (a.x, a.y.min(b.y), a.y.max(b.y))).collect();
        let mut out = Vec::new();
        let mut xs = Vec::new();
        for w in ys.windows(2) {
            let (ylo, yhi) = (w[0], w[1]);
            xs.clear();
            xs.extend(verticals.iter().filter(|&&(_, lo, hi)| lo <= ylo && hi >= yhi).map(|&(x, _, _)| x));
            xs.sort_unstable();
            for pair in xs.chunks_exact(2) {
                if pair[1] > pair[0] {
                    out.push(Rect::new(pair[0], ylo, pair[1], yhi));
                }
            }
        }
        out
    }

    /// Even-odd containment test for a point given in doubled coordinates,
    /// so half-integer sample points can be tested exactly.
    pub fn contains_doubled(&self, px2: i64, py2: i64) -> bool {
        let mut inside = false;
        for (a, b) in self.edges() {
            if a.x != b.x {
                continue;
            }
            let (lo, hi) = (2 * a.y.min(b.y), 2 * a.y.max(b.y));
            if py2 >= lo && py2 < hi && 2 * a.x > px2 {
                inside = !inside;
            }
        }
        inside
    }
}

/// Validates rectilinearity, simplicity and orientation, reporting the first
/// violated invariant.
pub fn validate_polygon(p: &LayoutPolygon) -> Result<(), PolygonViolation> {
    let n = p.vertices.len();
    for i in 0..n {
        let (a, b) = p.edge(i);
        if a == b {
            return Err(PolygonViolation::ZeroLengthEdge { edge: i });
        }
        if a.x != b.x && a.y != b.y {
            return Err(PolygonViolation::NonRectilinear { edge: i });
        }
    }
    if n < 4 {
        return Err(PolygonViolation::TooFewVertices { count: n });
    }
    for i in 0..n {
        let (a, b) = p.edge((i + n - 1) % n);
        let (c, d) = p.edge(i);
        let h1 = a.y == b.y;
        let h2 = c.y == d.y;
        if h1 == h2 {
            return Err(PolygonViolation::Collinear { vertex: i });
        }
    }
    for i in 0..n {
        for j in i + 1..n {
            if j == i + 1 || (i == 0 && j == n - 1) {
                continue;
            }
            let (a, b) = p.edge(i);
            let (c, d) = p.edge(j);
            if segments_touch(a, b, c, d) {
                return Err(PolygonViolation::SelfIntersection { first: i, second: j });
            }
        }
    }
    if p.signed_area2() <= 0 {
        return Err(PolygonViolation::Clockwise);
    }
    Ok(())
}

fn segments_touch(a: Point, b: Point, c: Point, d: Point) -> bool {
    let (ax0, ax1) = (a.x.min(b.x), a.x.max(b.x));
    let (ay0, ay1) = (a.y.min(b.y), a.y.max(b.y));
    let (cx0, cx1) = (c.x.min(d.x), c.x.max(d.x));
    let (cy0, cy1) = (c.y.min(d.y), c.y.max(d.y));
    ax0 <= cx1 && cx0 <= ax1 && ay0 <= cy1 && cy0 <= ay1
}

/// Translates edge `edge_index` perpendicular to itself by `dist` nm.
/// Positive distances move the edge outward, away from the interior.
pub fn move_edge(p: &LayoutPolygon, edge_index: usize, dist: i64) -> Result<LayoutPolygon, GeometryError> {
    let n = p.vertices.len();
    if edge_index >= n {
        return Err(GeometryError::EdgeIndex { index: edge_index, len: n });
    }
    if dist == 0 {
        return Ok(p.clone());
    }
    let (a, b) = p.edge(edge_index);
    let dir = Dir::of(a, b).ok_or(GeometryError::Invalid(PolygonViolation::NonRectilinear { edge: edge_index }))?;
    let (nx, ny) = dir.right().unit();
    let mut out = p.clone();
    let j = (edge_index + 1) % n;
    out.vertices[edge_index] = Point::new(a.x + nx * dist, a.y + ny * dist);
    out.vertices[j] = Point::new(b.x + nx * dist, b.y + ny * dist);
    match validate_polygon(&out) {
        Ok(()) => Ok(out),
        Err(v) => Err(GeometryError::Collapse(v)),
    }
}

/// One of the eight symmetries of the square grid: a rotation by
/// `quarter_turns * 90` degrees counter-clockwise, preceded by a mirror about
/// the y axis when `mirror` is set.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub struct Dihedral {
    pub quarter_turns: u8,
    pub mirror: bool,
}

impl Dihedral {
    pub fn all() -> impl Iterator<Item = Dihedral> {
        (0..8u8).map(|k| Dihedral { quarter_turns: k % 4, mirror: k >= 4 })
    }

    pub fn apply(&self, p: Point) -> Point {
        let mut q = if self.mirror { Point::new(-p.x, p.y) } else { p };
        for _ in 0..self.quarter_turns % 4 {
            q = Point::new(-q.y, q.x);
        }
        q
    }
}

/// Merges axis-aligned rectangles into simple CCW polygons tracing the
/// boundary of their union. Hole boundaries are returned separately.
pub fn rects_to_polygons(rects: &[Rect], layer: i32) -> (Vec<LayoutPolygon>, Vec<LayoutPolygon>) {
    let rects: Vec<Rect> = rects.iter().copied().filter(|r| !r.is_empty()).collect();
    if rects.is_empty() {
        return (Vec::new(), Vec::new());
    }
    let mut xs: Vec<i64> = rects.iter().flat_map(|r| [r.x0, r.x1]).collect();
    let mut ys: Vec<i64> = rects.iter().flat_map(|r| [r.y0, r.y1]).collect();
    xs.sort_unstable();
    xs.dedup();
    ys.sort_unstable();
    ys.dedup();
    let nx = xs.len() - 1;
    let ny = ys.len() - 1;
    let mut cov = vec![false; nx * ny];
    for r in &rects {
        let i0 = xs.binary_search(&r.x0).unwrap();
        let i1 = xs.binary_search(&r.x1).unwrap();
        let j0 = ys.binary_search(&r.y0).unwrap();
        let j1 = ys.binary_search(&r.y1).unwrap();
        for j in j0..j1 {
            for i in i0..i1 {
                cov[j * nx + i] = true;
            }
        }
    }
    let covered =
        |i: isize, j: isize| -> bool { i >= 0 && j >= 0 && (i as usize) < nx && (j as usize) < ny && cov[j as usize * nx + i as usize] };
    // Directed boundary edges on the compressed grid, interior on the left.
    let mut out_edges: HashMap<(usize, usize), Vec<(usize, usize)>> = HashMap::new();
    let mut push = |from: (usize, usize), to: (usize, usize)| {
        out_edges.entry(from).or_default().push(to);
    };
    for j in 0..ny {
        for i in 0..nx {
            if !cov[j * nx + i] {
                continue;
            }
            let (ii, jj) = (i as isize, j as isize);
            if !covered(ii, jj - 1) {
                push((i, j), (i + 1, j));
            }
            if !covered(ii + 1, jj) {
                push((i + 1, j), (i + 1, j + 1));
            }
            if !covered(ii, jj + 1) {
                push((i + 1, j + 1), (i, j + 1));
            }
            if !covered(ii - 1, jj) {
                push((i, j + 1), (i, j));
            }
        }
    }
    let mut starts: Vec<(usize, usize)> = out_edges.keys().copied().collect();
    starts.sort_unstable_by_key(|&(i, j)| (j, i));
    let mut outers = Vec::new();
    let mut holes = Vec::new();
    for s in starts {
        while out_edges.get(&s).is_some_and(|v| !v.is_empty()) {
            let mut loop_pts: Vec<(usize, usize)> = vec![s];
            let mut cur = s;
            let mut incoming: Option<Dir> = None;
            loop {
                let cands = out_edges.get_mut(&cur).expect("dangling boundary edge");
                let pick = if cands.len() == 1 { 0 } else { choose_turn(cur, cands, incoming) };
                let next = cands.swap_remove(pick);
                incoming = Dir::of(Point::new(cur.0 as i64, cur.1 as i64), Point::new(next.0 as i64, next.1 as i64));
                if next == s {
                    break;
                }
                loop_pts.push(next);
                cur = next;
            }
            let pts: Vec<Point> = loop_pts.iter().map(|&(i, j)| Point::new(xs[i], ys[j])).collect();
            let poly = LayoutPolygon::new(drop_collinear(&pts), layer);
            if poly.signed_area2() > 0 {
                outers.push(poly);
            } else {
                holes.push(poly);
            }
        }
    }
    (outers, holes)
}

fn choose_turn(cur: (usize, usize), cands: &[(usize, usize)], incoming: Option<Dir>) -> usize {
    let Some(inc) = incoming else { return 0 };
    let (ix, iy) = inc.unit();
    let score = |&(i, j): &(usize, usize)| {
        let dx = (i as i64 - cur.0 as i64).signum();
        let dy = (j as i64 - cur.1 as i64).signum();
        let cross = ix * dy - iy * dx;
        let dot = ix * dx + iy * dy;
        // Left turn first, then straight, then right.
        match (cross, dot) {
            (c, _) if c > 0 => 0,
            (0, d) if d > 0 => 1,
            _ => 2,
        }
    };
    (0..cands.len()).min_by_key(|&k| score(&cands[k])).unwrap_or(0)
}

/// Removes vertices where the boundary continues straight.
pub fn drop_collinear(pts: &[Point]) -> Vec<Point> {
    let n = pts.len();
    let mut out: Vec<Point> = Vec::with_capacity(n);
    for i in 0..n {
        let prev = pts[(i + n - 1) % n];
        let cur = pts[i];
        let next = pts[(i + 1) % n];
        let straight = (prev.x == cur.x && cur.x == next.x) || (prev.y == cur.y && cur.y == next.y);
        if !straight {
            out.push(cur);
        }
    }
    // Start at the lowest-left vertex for a stable representation.
    let start = (0..out.len()).min_by_key(|&i| (out[i].y, out[i].x)).unwrap_or(0);
    out.rotate_left(start);
    out
}

/// Clips a polygon to a rectangle. The result may be several polygons.
pub fn clip_polygon(p: &LayoutPolygon, window: &Rect) -> Vec<LayoutPolygon> {
    let bb = p.bbox();
    if window.contains_rect(&bb) {
        return vec![p.clone()];
    }
    if bb.intersect(window).is_none() {
        return Vec::new();
    }
    let rects: Vec<Rect> = p.to_rects().iter().filter_map(|r| r.intersect(window)).collect();
    rects_to_polygons(&rects, p.layer_id).0
}

/// Union of possibly overlapping or abutting polygons.
pub fn merge_polygons(polys: &[LayoutPolygon]) -> Result<Vec<LayoutPolygon>, GeometryError> {
    let layer = polys.first().map(|p| p.layer_id).unwrap_or(1);
    let rects: Vec<Rect> = polys.iter().flat_map(|p| p.to_rects()).collect();
    let (outers, holes) = rects_to_polygons(&rects, layer);
    if !holes.is_empty() {
        return Err(GeometryError::Hole);
    }
    Ok(outers)
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn poly(pts: &[(i64, i64)]) -> LayoutPolygon {
        LayoutPolygon::new(pts.iter().map(|&(x, y)| Point::new(x, y)).collect(), 1)
    }

    #[test]
    fn rectangle_is_valid() {
        let p = poly(&[(0, 0), (100, 0), (100, 50), (0, 50)]);
        assert_eq!(validate_polygon(&p), Ok(()));
        assert_eq!(p.area(), 5000);
        assert_eq!(p.perimeter(), 300);
    }

    #[test]
    fn diagonal_edge_is_rejected() {
        let p = poly(&[(0, 0), (10, 0), (10, 10)]);
        assert_eq!(validate_polygon(&p), Err(PolygonViolation::NonRectilinear { edge: 2 }));
    }

    #[test]
    fn clockwise_is_rejected() {
        let p = poly(&[(0, 0), (0, 50), (100, 50), (100, 0)]);
        assert_eq!(validate_polygon(&p), Err(PolygonViolation::Clockwise));
    }

    #[test]
    fn zero_length_and_self_touch() {
        let p = poly(&[(0, 0), (0, 0), (10, 0), (10, 10), (0, 10)]);
        assert_eq!(validate_polygon(&p), Err(PolygonViolation::ZeroLengthEdge { edge: 0 }));
        // Figure-eight touching at (10, 10).
        let p = poly(&[(0, 0), (10, 0), (10, 20), (20, 20), (20, 10), (0, 10)]);
        assert!(matches!(validate_polygon(&p), Err(PolygonViolation::SelfIntersection { .. })));
    }

    #[test]
    fn move_edge_examples() {
        let r = poly(&[(0, 0), (100, 0), (100, 50), (0, 50)]);
        assert_eq!(move_edge(&r, 2, 0).unwrap(), r);
        let taller = move_edge(&r, 2, 10).unwrap();
        assert_eq!(taller.bbox(), Rect::new(0, 0, 100, 60));
        assert!(matches!(move_edge(&r, 2, -50), Err(GeometryError::Collapse(_))));
        // Bottom edge outward grows downward.
        assert_eq!(move_edge(&r, 0, 5).unwrap().bbox(), Rect::new(0, -5, 100, 50));
    }

    #[test]
    fn slab_rects_cover_l_shape() {
        let l = poly(&[(0, 0), (100, 0), (100, 40), (40, 40), (40, 100), (0, 100)]);
        let rects = l.to_rects();
        let total: i128 = rects.iter().map(|r| r.area()).sum();
        assert_eq!(total, l.area());
        let (outers, holes) = rects_to_polygons(&rects, 1);
        assert!(holes.is_empty());
        assert_eq!(outers.len(), 1);
        assert_eq!(outers[0].area(), l.area());
        assert_eq!(outers[0].len(), 6);
        assert_eq!(validate_polygon(&outers[0]), Ok(()));
    }

    #[test]
    fn clip_u_shape_splits_into_two() {
        let u = poly(&[(0, 0), (300, 0), (300, 200), (200, 200), (200, 100), (100, 100), (100, 200), (0, 200)]);
        let parts = clip_polygon(&u, &Rect::new(-10, 150, 310, 400));
        assert_eq!(parts.len(), 2);
        for p in &parts {
            assert_eq!(validate_polygon(p), Ok(()));
            assert_eq!(p.area(), 100 * 50);
        }
    }

    #[test]
    fn diagonal_touch_traces_two_polygons() {
        let rects = [Rect::new(0, 0, 10, 10), Rect::new(10, 10, 20, 20)];
        let (outers, _) = rects_to_polygons(&rects, 1);
        assert_eq!(outers.len(), 2);
        for p in &outers {
            assert_eq!(p.len(), 4);
        }
    }

    #[test]
    fn dihedral_preserves_validity() {
        let l = poly(&[(0, 0), (100, 0), (100, 40), (40, 40), (40, 100), (0, 100)]);
        for t in Dihedral::all() {
            let q = l.transformed(t);
            assert_eq!(validate_polygon(&q), Ok(()), "{t:?}");
            assert_eq!(q.area(), l.area());
        }
    }

    #[test]
    fn contains_doubled_half_open() {
        let r = poly(&[(0, 0), (10, 0), (10, 10), (0, 10)]);
        assert!(r.contains_doubled(1, 1));
        assert!(r.contains_doubled(0, 0));
        assert!(!r.contains_doubled(20, 5));
        assert!(!r.contains_doubled(-1, 5));
    }
}
