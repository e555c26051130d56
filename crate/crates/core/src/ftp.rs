//! Fragment-based pattern features.
//!
//! Polygon boundaries are cut into fragments. For a primary fragment the
//! vector collects its own parameters, those of the nearest parallel
//! fragments on either side (secondaries) and the boundary neighbours of all
//! of these (tertiaries). Every quantity is measured relative to the primary
//! fragment, which makes the vector invariant under rotation; mirror
//! invariance comes from evaluating both handednesses and keeping the
//! lexicographically smaller vector.

use std::cmp::Ordering;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{Dir, Point};
use crate::layout::PatternSnippet;
use crate::matrix::Matrix;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CornerCode {
    Convex,
    Concave,
    NoCorner,
}

impl CornerCode {
    fn one_hot(self) -> [f64; 3] {
        match self {
            CornerCode::Convex => [1.0, 0.0, 0.0],
            CornerCode::Concave => [0.0, 1.0, 0.0],
            CornerCode::NoCorner => [0.0, 0.0, 1.0],
        }
    }
}

/// A piece of a polygon boundary, directed along the counter-clockwise
/// traversal from `a` to `b`. `a` is therefore the clockwise endpoint.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Fragment {
    pub id: usize,
    pub polygon_id: usize,
    pub a: Point,
    pub b: Point,
    pub cw_corner: CornerCode,
    pub acw_corner: CornerCode,
    /// Clockwise and anticlockwise neighbours on the same boundary.
    pub prev: usize,
    pub next: usize,
}

impl Fragment {
    pub fn dir(&self) -> Dir {
        Dir::of(self.a, self.b).expect("fragments are axis-parallel")
    }

    pub fn outward(&self) -> Dir {
        self.dir().right()
    }

    pub fn interior_side(&self) -> Dir {
        self.outward().opposite()
    }

    pub fn len(&self) -> i64 {
        (self.b.x - self.a.x).abs() + (self.b.y - self.a.y).abs()
    }

    pub fn is_horizontal(&self) -> bool {
        self.a.y == self.b.y
    }

    /// Midpoint in doubled coordinates.
    pub fn mid2(&self) -> (i64, i64) {
        (self.a.x + self.b.x, self.a.y + self.b.y)
    }

    fn span(&self) -> (i64, i64) {
        if self.is_horizontal() {
            (self.a.x.min(self.b.x), self.a.x.max(self.b.x))
        } else {
            (self.a.y.min(self.b.y), self.a.y.max(self.b.y))
        }
    }

    fn level(&self) -> i64 {
        if self.is_horizontal() {
            self.a.y
        } else {
            self.a.x
        }
    }

    pub fn contains(&self, p: Point) -> bool {
        let (lo, hi) = self.span();
        if self.is_horizontal() {
            p.y == self.a.y && p.x >= lo && p.x <= hi
        } else {
            p.x == self.a.x && p.y >= lo && p.y <= hi
        }
    }
}

/// Mirror-symmetric split of `len` into pieces no longer than `max_len`.
pub fn split_lengths(len: i64, max_len: i64) -> Vec<i64> {
    let mut k = ((len + max_len - 1) / max_len).max(1);
    if k % 2 == 0 && len % 2 == 1 {
        k += 1;
    }
    let q = len / k;
    let r = len % k;
    let mut out = vec![q; k as usize];
    let ku = k as usize;
    let mut extra = r as usize;
    if extra % 2 == 1 {
        out[ku / 2] += 1;
        extra -= 1;
    }
    for i in 0..extra / 2 {
        out[i] += 1;
        out[ku - 1 - i] += 1;
    }
    out
}

fn turn(prev: Point, cur: Point, next: Point) -> CornerCode {
    let (dx1, dy1) = ((cur.x - prev.x).signum(), (cur.y - prev.y).signum());
    let (dx2, dy2) = ((next.x - cur.x).signum(), (next.y - cur.y).signum());
    if dx1 * dy2 - dy1 * dx2 > 0 {
        CornerCode::Convex
    } else {
        CornerCode::Concave
    }
}

/// Splits every polygon boundary at its corners and into pieces of at most
/// `max_frag_len` nm.
pub fn fragment_layout(s: &PatternSnippet, max_frag_len: i64) -> Vec<Fragment> {
    assert!(max_frag_len >= 1);
    let mut out: Vec<Fragment> = Vec::new();
    for (pi, poly) in s.polygons.iter().enumerate() {
        let n = poly.len();
        let first = out.len();
        for e in 0..n {
            let prev = poly.vertices[(e + n - 1) % n];
            let (a, b) = poly.edge(e);
            let after = poly.vertices[(e + 2) % n];
            let start_code = turn(prev, a, b);
            let end_code = turn(a, b, after);
            let (ux, uy) = ((b.x - a.x).signum(), (b.y - a.y).signum());
            let pieces = split_lengths((b.x - a.x).abs() + (b.y - a.y).abs(), max_frag_len);
            let mut cur = a;
            for (k, l) in pieces.iter().enumerate() {
                let nxt = Point::new(cur.x + ux * l, cur.y + uy * l);
                out.push(Fragment {
                    id: out.len(),
                    polygon_id: pi,
                    a: cur,
                    b: nxt,
                    cw_corner: if k == 0 { start_code } else { CornerCode::NoCorner },
                    acw_corner: if k + 1 == pieces.len() { end_code } else { CornerCode::NoCorner },
                    prev: 0,
                    next: 0,
                });
                cur = nxt;
            }
        }
        let m = out.len() - first;
        for k in 0..m {
            out[first + k].prev = first + (k + m - 1) % m;
            out[first + k].next = first + (k + 1) % m;
        }
    }
    out
}

/// Fragment nearest to `p` by midpoint distance; lowest id on ties.
pub fn fragment_at(frags: &[Fragment], p: Point) -> Option<usize> {
    let (px, py) = (2 * p.x, 2 * p.y);
    frags
        .iter()
        .filter(|f| f.contains(p))
        .min_by_key(|f| {
            let (mx, my) = f.mid2();
            ((mx - px).abs() + (my - py).abs(), f.id)
        })
        .or_else(|| {
            frags.iter().min_by_key(|f| {
                let (mx, my) = f.mid2();
                ((mx - px).abs() + (my - py).abs(), f.id)
            })
        })
        .map(|f| f.id)
}

/// Parallel fragment with overlapping span and its signed perpendicular
/// offset, positive on the exterior side of `f`.
fn facing(f: &Fragment, g: &Fragment) -> Option<i64> {
    if g.id == f.id || f.is_horizontal() != g.is_horizontal() {
        return None;
    }
    let (lo, hi) = f.span();
    let (glo, ghi) = g.span();
    if hi.min(ghi) <= lo.max(glo) {
        return None;
    }
    let d = g.level() - f.level();
    let sign = match f.outward() {
        Dir::North | Dir::East => 1,
        Dir::South | Dir::West => -1,
    };
    let delta = d * sign;
    (delta != 0).then_some(delta)
}

/// `(ext_space, int_space)` of a fragment; `None` when nothing faces it.
pub fn spaces(f: &Fragment, all: &[Fragment]) -> (Option<i64>, Option<i64>) {
    let mut ext: Option<i64> = None;
    let mut int: Option<i64> = None;
    for g in all {
        if let Some(d) = facing(f, g) {
            if d > 0 {
                ext = Some(ext.map_or(d, |e| e.min(d)));
            } else {
                int = Some(int.map_or(-d, |e| e.min(-d)));
            }
        }
    }
    (ext, int)
}

/// Offset of `g`'s midpoint from `f`'s along `f`'s axis, in doubled nm,
/// positive towards `f`'s clockwise endpoint.
fn offset2(f: &Fragment, g: &Fragment) -> i64 {
    let (fx, fy) = f.mid2();
    let (gx, gy) = g.mid2();
    let (ux, uy) = ((f.a.x - f.b.x).signum(), (f.a.y - f.b.y).signum());
    (gx - fx) * ux + (gy - fy) * uy
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NeighborSet {
    pub primary: usize,
    /// Nearest first; `None` marks a missing slot.
    pub internal: Vec<Option<usize>>,
    pub external: Vec<Option<usize>>,
    /// For the primary, then each internal and each external secondary slot:
    /// `(clockwise side, anticlockwise side)` boundary neighbours.
    pub tertiary: Vec<(Vec<Option<usize>>, Vec<Option<usize>>)>,
}

fn lateral(all: &[Fragment], src: usize, depth: usize, forward: bool) -> Vec<Option<usize>> {
    let mut out = Vec::with_capacity(depth);
    let mut cur = src;
    for _ in 0..depth {
        cur = if forward { all[cur].next } else { all[cur].prev };
        if cur == src {
            break;
        }
        out.push(Some(cur));
    }
    out.resize(depth, None);
    out
}

fn neighbors_in_frame(f: usize, all: &[Fragment], depth: usize, mirrored: bool) -> NeighborSet {
    let pf = &all[f];
    let sgn = if mirrored { -1 } else { 1 };
    let mut inside: Vec<(i64, i64, i64, usize)> = Vec::new();
    let mut outside: Vec<(i64, i64, i64, usize)> = Vec::new();
    for g in all {
        if let Some(d) = facing(pf, g) {
            let off = offset2(pf, g) * sgn;
            // Nearest first, then smaller |offset|, then clockwise first.
            let key = (d.abs(), off.abs(), -off, g.id);
            if d > 0 {
                outside.push(key);
            } else {
                inside.push(key);
            }
        }
    }
    inside.sort_unstable();
    outside.sort_unstable();
    let take = |v: &[(i64, i64, i64, usize)]| {
        let mut out: Vec<Option<usize>> = v.iter().take(depth).map(|k| Some(k.3)).collect();
        out.resize(depth, None);
        out
    };
    let internal = take(&inside);
    let external = take(&outside);
    let mut tertiary = Vec::with_capacity(1 + 2 * depth);
    for src in std::iter::once(Some(f)).chain(internal.iter().copied()).chain(external.iter().copied()) {
        match src {
            Some(s) => {
                let cw = lateral(all, s, depth, mirrored);
                let acw = lateral(all, s, depth, !mirrored);
                tertiary.push((cw, acw));
            }
            None => tertiary.push((vec![None; depth], vec![None; depth])),
        }
    }
    NeighborSet { primary: f, internal, external, tertiary }
}

/// Secondary and tertiary neighbours of fragment `f` in its own frame.
pub fn find_neighbors(f: usize, all: &[Fragment], depth: usize) -> NeighborSet {
    neighbors_in_frame(f, all, depth, false)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FragmentParams {
    pub len: i64,
    pub ext_space: Option<i64>,
    pub int_space: Option<i64>,
    pub c_corn: CornerCode,
    pub ac_corn: CornerCode,
    /// Secondaries only, nm, clockwise positive.
    pub f0_offset: Option<f64>,
}

/// Measures a fragment. `primary` is given for secondaries, to fill the
/// offset.
pub fn measure_params(g: &Fragment, all: &[Fragment], primary: Option<&Fragment>) -> FragmentParams {
    let (ext, int) = spaces(g, all);
    FragmentParams {
        len: g.len(),
        ext_space: ext,
        int_space: int,
        c_corn: g.cw_corner,
        ac_corn: g.acw_corner,
        f0_offset: primary.map(|p| offset2(p, g) as f64 / 2.0),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct WeightProfile {
    pub primary: f64,
    /// By secondary depth index, missing entries default to 1.
    pub secondary: Vec<f64>,
    /// By tertiary lateral depth index, missing entries default to 1.
    pub tertiary: Vec<f64>,
}

impl Default for WeightProfile {
    fn default() -> Self {
        WeightProfile { primary: 1.0, secondary: Vec::new(), tertiary: Vec::new() }
    }
}

impl WeightProfile {
    /// Secondary and tertiary weights falling off as `secondary^k` and
    /// `tertiary^k` with depth index k = 1..=depth.
    pub fn decaying(secondary: f64, tertiary: f64, depth: usize) -> Self {
        let pow = |b: f64| (1..=depth as i32).map(|k| b.powi(k)).collect();
        WeightProfile { primary: 1.0, secondary: pow(secondary), tertiary: pow(tertiary) }
    }

    fn sec(&self, k: usize) -> f64 {
        self.secondary.get(k).copied().unwrap_or(1.0)
    }

    fn ter(&self, k: usize) -> f64 {
        self.tertiary.get(k).copied().unwrap_or(1.0)
    }

    pub fn is_neutral(&self) -> bool {
        self.primary == 1.0 && self.secondary.iter().chain(&self.tertiary).all(|&w| w == 1.0)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FtpSchema {
    pub depth: usize,
    pub max_frag_len: i64,
    pub roi_nm: f64,
    pub weights: WeightProfile,
    pub include_orientation: bool,
}

impl Default for FtpSchema {
    fn default() -> Self {
        FtpSchema { depth: 4, max_frag_len: 80, roi_nm: 500.0, weights: WeightProfile::default(), include_orientation: false }
    }
}

const SLOT: usize = 9;
const SEC_SLOT: usize = 10;

impl FtpSchema {
    /// Value standing in for an absent distance: four times the ROI.
    pub fn sentinel(&self) -> f64 {
        4.0 * self.roi_nm
    }

    /// `9 + 2D*10 + (1 + 2D)*2D*9`, plus one when orientation is included.
    pub fn len(&self) -> usize {
        let d = self.depth;
        SLOT + 2 * d * SEC_SLOT + (1 + 2 * d) * 2 * d * SLOT + self.include_orientation as usize
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn schema_id(&self) -> String {
        let w = if self.weights.is_neutral() {
            "w1".to_string()
        } else {
            let text = serde_json::to_string(&self.weights).expect("weights serialize");
            format!("w{:08x}", crate::rng::fnv1a(text.as_bytes()) as u32)
        };
        format!("ftp1-d{}-f{}-r{}-o{}-{}", self.depth, self.max_frag_len, self.roi_nm, self.include_orientation as u8, w)
    }

    pub fn columns(&self) -> Vec<String> {
        let d = self.depth;
        let slot = |prefix: &str, f0: bool| {
            let mut v: Vec<String> = ["len", "ext", "int", "c_convex", "c_concave", "c_none", "ac_convex", "ac_concave", "ac_none"]
                .iter()
                .map(|n| format!("{prefix}.{n}"))
                .collect();
            if f0 {
                v.push(format!("{prefix}.f0"));
            }
            v
        };
        let mut cols = slot("p", false);
        let mut sources = vec!["p".to_string()];
        for side in ["si", "se"] {
            for k in 1..=d {
                cols.extend(slot(&format!("{side}{k}"), true));
                sources.push(format!("{side}{k}"));
            }
        }
        for s in &sources {
            for side in ["cw", "acw"] {
                for k in 1..=d {
                    cols.extend(slot(&format!("t.{s}.{side}{k}"), false));
                }
            }
        }
        if self.include_orientation {
            cols.push("p.orientation".into());
        }
        cols
    }

    /// Role weight of each column, in [`FtpSchema::columns`] order.
    pub fn column_weights(&self) -> Vec<f64> {
        let d = self.depth;
        let w = &self.weights;
        let mut out = vec![w.primary; SLOT];
        for _ in 0..2 {
            for k in 0..d {
                out.extend([w.sec(k); SEC_SLOT]);
            }
        }
        for _ in 0..(1 + 2 * d) * 2 {
            for k in 0..d {
                out.extend([w.ter(k); SLOT]);
            }
        }
        if self.include_orientation {
            out.push(1.0);
        }
        out
    }

    /// The value a column holds when its measurement is missing: the weighted
    /// sentinel for distances, lengths and offsets, `None` for corner codes.
    pub fn column_sentinels(&self) -> Vec<Option<f64>> {
        let s = self.sentinel();
        self.columns()
            .iter()
            .zip(self.column_weights())
            .map(|(name, w)| {
                let kind = name.rsplit('.').next().unwrap_or("");
                matches!(kind, "len" | "ext" | "int" | "f0").then_some(s * w)
            })
            .collect()
    }

    pub fn validate(&self) -> Result<()> {
        if self.depth < 1 || self.max_frag_len < 1 || !(self.roi_nm > 0.0) {
            return Err(Error::Config("ftp: depth, max_frag_len and roi_nm must be positive".into()));
        }
        let w = &self.weights;
        if std::iter::once(&w.primary).chain(&w.secondary).chain(&w.tertiary).any(|&x| !(x > 0.0)) {
            return Err(Error::Config("ftp: weights must be > 0".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub values: Vec<f64>,
    pub depth: usize,
    pub schema_id: String,
}

struct Encoder<'a> {
    all: &'a [Fragment],
    schema: &'a FtpSchema,
    mirrored: bool,
    out: Vec<f64>,
}

impl Encoder<'_> {
    fn slot(&mut self, g: Option<usize>, primary: Option<&Fragment>, weight: f64) {
        let s = self.schema.sentinel();
        match g {
            None => {
                self.out.extend([s, s, s, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0].map(|v| v * weight));
                if primary.is_some() {
                    self.out.push(s * weight);
                }
            }
            Some(g) => {
                let p = measure_params(&self.all[g], self.all, primary);
                let (c, ac) = if self.mirrored { (p.ac_corn, p.c_corn) } else { (p.c_corn, p.ac_corn) };
                let dist = |v: Option<i64>| v.map_or(s, |x| x as f64);
                self.out.push(p.len as f64 * weight);
                self.out.push(dist(p.ext_space) * weight);
                self.out.push(dist(p.int_space) * weight);
                self.out.extend(c.one_hot().map(|v| v * weight));
                self.out.extend(ac.one_hot().map(|v| v * weight));
                if let Some(off) = p.f0_offset {
                    let off = if self.mirrored { -off } else { off };
                    // Normalize -0.0 so mirrored frames compare equal.
                    self.out.push((off + 0.0) * weight);
                }
            }
        }
    }
}

fn encode(f: usize, all: &[Fragment], schema: &FtpSchema, mirrored: bool) -> Vec<f64> {
    let nb = neighbors_in_frame(f, all, schema.depth, mirrored);
    let w = &schema.weights;
    let mut enc = Encoder { all, schema, mirrored, out: Vec::with_capacity(schema.len()) };
    enc.slot(Some(f), None, w.primary);
    let pf = &all[f];
    for list in [&nb.internal, &nb.external] {
        for (k, g) in list.iter().enumerate() {
            enc.slot(*g, Some(pf), w.sec(k));
        }
    }
    for (cw, acw) in &nb.tertiary {
        for side in [cw, acw] {
            for (k, g) in side.iter().enumerate() {
                enc.slot(*g, None, w.ter(k));
            }
        }
    }
    if schema.include_orientation {
        enc.out.push(if pf.is_horizontal() { 0.0 } else { 1.0 });
    }
    enc.out
}

fn lex_cmp(a: &[f64], b: &[f64]) -> Ordering {
    for (x, y) in a.iter().zip(b) {
        match x.total_cmp(y) {
            Ordering::Equal => continue,
            o => return o,
        }
    }
    a.len().cmp(&b.len())
}

/// Feature vector of fragment `primary` in the canonical frame.
pub fn build_feature_vector(primary: usize, all: &[Fragment], schema: &FtpSchema) -> FeatureVector {
    let plain = encode(primary, all, schema, false);
    let mirrored = encode(primary, all, schema, true);
    let values = if lex_cmp(&mirrored, &plain) == Ordering::Less { mirrored } else { plain };
    FeatureVector { values, depth: schema.depth, schema_id: schema.schema_id() }
}

/// Feature vector of a snippet's anchor fragment.
pub fn anchor_vector(s: &PatternSnippet, schema: &FtpSchema) -> Option<FeatureVector> {
    let frags = fragment_layout(s, schema.max_frag_len);
    let anchor = s.anchor.unwrap_or(s.window_center);
    let f = fragment_at(&frags, anchor)?;
    Some(build_feature_vector(f, &frags, schema))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum RowMode {
    /// One row per snippet, from its anchor fragment.
    #[default]
    Anchor,
    /// One row per fragment.
    AllFragments,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FeatureMatrix {
    pub columns: Vec<String>,
    pub x: Matrix,
    pub pattern_ids: Vec<String>,
    pub fragment_ids: Vec<usize>,
    /// `Some(true)` for hotspot rows.
    pub labels: Vec<Option<bool>>,
}

impl FeatureMatrix {
    pub fn len(&self) -> usize {
        self.x.rows
    }

    pub fn is_empty(&self) -> bool {
        self.x.rows == 0
    }

    pub fn filtered(&self, f: &ColumnFilter) -> FeatureMatrix {
        FeatureMatrix {
            columns: f.keep.iter().map(|&c| self.columns[c].clone()).collect(),
            x: f.apply(&self.x),
            pattern_ids: self.pattern_ids.clone(),
            fragment_ids: self.fragment_ids.clone(),
            labels: self.labels.clone(),
        }
    }
}

/// Rows for a corpus. Snippets without fragments contribute no row.
pub fn featurize_corpus(snippets: &[PatternSnippet], schema: &FtpSchema, mode: RowMode) -> Result<FeatureMatrix> {
    if snippets.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let per: Vec<Vec<(usize, Vec<f64>)>> = snippets
        .par_iter()
        .map(|s| {
            let frags = fragment_layout(s, schema.max_frag_len);
            match mode {
                RowMode::Anchor => {
                    let anchor = s.anchor.unwrap_or(s.window_center);
                    fragment_at(&frags, anchor).map(|f| vec![(f, build_feature_vector(f, &frags, schema).values)]).unwrap_or_default()
                }
                RowMode::AllFragments => frags.iter().map(|f| (f.id, build_feature_vector(f.id, &frags, schema).values)).collect(),
            }
        })
        .collect();
    let cols = schema.len();
    let mut data = Vec::new();
    let mut pattern_ids = Vec::new();
    let mut fragment_ids = Vec::new();
    let mut labels = Vec::new();
    for (s, rows) in snippets.iter().zip(per) {
        for (fid, v) in rows {
            data.extend(v);
            pattern_ids.push(s.id.clone());
            fragment_ids.push(fid);
            labels.push(s.label.map(|l| l.is_hotspot()));
        }
    }
    let rows = pattern_ids.len();
    Ok(FeatureMatrix { columns: schema.columns(), x: Matrix::new(rows, cols, data)?, pattern_ids, fragment_ids, labels })
}

/// Drops columns that are constant over the training rows.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ColumnFilter {
    pub source_cols: usize,
    pub keep: Vec<usize>,
}

impl ColumnFilter {
    pub fn fit(x: &Matrix) -> ColumnFilter {
        let keep = if x.rows == 0 {
            Vec::new()
        } else {
            let first = x.row(0);
            (0..x.cols).filter(|&c| x.iter_rows().any(|r| r[c] != first[c])).collect()
        };
        ColumnFilter { source_cols: x.cols, keep }
    }

    pub fn identity(cols: usize) -> ColumnFilter {
        ColumnFilter { source_cols: cols, keep: (0..cols).collect() }
    }

    pub fn apply(&self, x: &Matrix) -> Matrix {
        x.select_cols(&self.keep)
    }
}
