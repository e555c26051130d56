//! Synthetic variants of hotspot snippets by random perpendicular edge moves.

use std::collections::HashSet;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::drc::{minimal_drc, RuleDeck};
use crate::error::{Error, Result};
use crate::geom::{move_edge, Point};
use crate::layout::{GeometryKey, PatternSnippet, Provenance};
use crate::rng::substream;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GenParams {
    pub syn_pat_count: usize,
    /// Relative weights for moving 1, 2, ... edges of a selected polygon.
    pub edge_count_pdf: Vec<f64>,
    /// Standard deviation `d` of the move distance, nm.
    pub distance_std_nm: f64,
    /// Probability that a polygon takes part in a variant.
    pub edge_move_probability: f64,
    pub max_edges: usize,
    pub dist_attempts: usize,
    pub rng_seed: u64,
    /// Resample zero distances instead of emitting no-op moves.
    pub nonzero_moves: bool,
}

impl Default for GenParams {
    fn default() -> Self {
        GenParams {
            syn_pat_count: 200,
            edge_count_pdf: vec![1.0, 1.0],
            distance_std_nm: 5.0,
            edge_move_probability: 0.5,
            max_edges: 4,
            dist_attempts: 4,
            rng_seed: 42,
            nonzero_moves: false,
        }
    }
}

impl GenParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(format!("gen params: {m}")));
        if self.syn_pat_count < 1 {
            return bad("syn_pat_count must be >= 1");
        }
        if !(self.distance_std_nm > 0.0) {
            return bad("distance_std_nm must be > 0");
        }
        if !(0.0..=1.0).contains(&self.edge_move_probability) {
            return bad("edge_move_probability must be in [0, 1]");
        }
        if self.max_edges < 1 || self.dist_attempts < 1 {
            return bad("max_edges and dist_attempts must be >= 1");
        }
        if self.edge_count_pdf.is_empty()
            || self.edge_count_pdf.iter().any(|w| !(*w >= 0.0))
            || self.edge_count_pdf.iter().sum::<f64>() <= 0.0
        {
            return bad("edge_count_pdf needs nonnegative weights with a positive sum");
        }
        Ok(())
    }

    /// Largest displacement a single move can have, `floor(3d)` nm.
    pub fn max_displacement(&self) -> i64 {
        (3.0 * self.distance_std_nm).floor() as i64
    }
}

/// Maps a standard-normal draw to a move distance, or `None` when the
/// truncation at `3d` rejects it.
pub fn distance_from_z(z: f64, d: f64) -> Option<i64> {
    if z.abs() > 3.0 {
        return None;
    }
    let v = (z * d).round();
    (v.abs() <= (3.0 * d).floor()).then_some(v as i64)
}

/// Truncated, grid-snapped normal distance with standard deviation `d`.
pub fn sample_distance(d: f64, nonzero: bool, rng: &mut impl Rng) -> i64 {
    loop {
        let z: f64 = StandardNormal.sample(rng);
        if let Some(v) = distance_from_z(z, d) {
            if !(nonzero && v == 0) {
                return v;
            }
        }
    }
}

fn sample_edge_count(pdf: &[f64], rng: &mut impl Rng) -> usize {
    let total: f64 = pdf.iter().sum();
    let mut u = rng.random::<f64>() * total;
    for (i, w) in pdf.iter().enumerate() {
        if u < *w {
            return i + 1;
        }
        u -= w;
    }
    pdf.len()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VariantMeta {
    pub pattern_id: String,
    pub parent_id: String,
    pub moves_applied: usize,
    pub max_abs_displacement_nm: i64,
    pub drc_attempts: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Variant {
    pub snippet: PatternSnippet,
    pub meta: VariantMeta,
}

/// One pass of the generation loop over all polygons of `base`. When `gate`
/// is false every geometrically valid move is kept without DRC checks.
fn make_variant(
    base: &PatternSnippet,
    params: &GenParams,
    deck: &RuleDeck,
    gate: bool,
    rng: &mut ChaCha8Rng,
) -> (PatternSnippet, usize, i64, usize) {
    let mut s = base.clone();
    let win = s.window();
    let mut moves = 0;
    let mut max_disp = 0i64;
    let mut attempts = 0;
    for pi in 0..s.polygons.len() {
        if rng.random::<f64>() >= params.edge_move_probability {
            continue;
        }
        let edge_count = sample_edge_count(&params.edge_count_pdf, rng);
        // Edges on the window boundary are cuts, not drawn geometry.
        let mut movable: Vec<usize> = (0..s.polygons[pi].len())
            .filter(|&e| {
                let (a, b) = s.polygons[pi].edge(e);
                !win.boundary_holds(a, b)
            })
            .collect();
        for _ in 0..edge_count {
            let mut moved = false;
            for _ in 0..params.max_edges {
                if movable.is_empty() {
                    break;
                }
                let k = rng.random_range(0..movable.len());
                let e = movable[k];
                let unmodified = s.polygons[pi].clone();
                let (oa, ob) = unmodified.edge(e);
                let on_edge = s.anchor.filter(|p| (p.x - oa.x) * (p.x - ob.x) <= 0 && (p.y - oa.y) * (p.y - ob.y) <= 0);
                for _ in 0..params.dist_attempts {
                    let dist = sample_distance(params.distance_std_nm, params.nonzero_moves, rng);
                    let Ok(cand) = move_edge(&unmodified, e, dist) else { continue };
                    let (a, b) = cand.edge(e);
                    let inside = if a.y == b.y { a.y > win.y0 && a.y < win.y1 } else { a.x > win.x0 && a.x < win.x1 };
                    if !inside {
                        continue;
                    }
                    s.polygons[pi] = cand;
                    if gate {
                        attempts += 1;
                        if !minimal_drc(&s, deck).passed() {
                            s.polygons[pi] = unmodified.clone();
                            continue;
                        }
                    }
                    // The anchor travels with its edge.
                    if let Some(p) = on_edge {
                        s.anchor = Some(if a.y == b.y { Point::new(p.x, a.y) } else { Point::new(a.x, p.y) });
                    }
                    moved = true;
                    moves += 1;
                    max_disp = max_disp.max(dist.abs());
                    break;
                }
                // Each edge moves at most once per variant.
                movable.swap_remove(k);
                if moved {
                    break;
                }
            }
        }
    }
    (s, moves, max_disp, attempts)
}

fn variants_from_stream(
    hotspot: &PatternSnippet,
    params: &GenParams,
    deck: &RuleDeck,
    rng: &mut ChaCha8Rng,
    id: impl Fn(usize) -> String,
    count: usize,
) -> Vec<Variant> {
    (0..count)
        .map(|i| {
            let (mut s, moves, max_disp, attempts) = make_variant(hotspot, params, deck, true, rng);
            s.id = id(i);
            s.label = None;
            s.provenance = Provenance::Synthetic { parent_id: hotspot.id.clone() };
            let meta = VariantMeta {
                pattern_id: s.id.clone(),
                parent_id: hotspot.id.clone(),
                moves_applied: moves,
                max_abs_displacement_nm: max_disp,
                drc_attempts: attempts,
            };
            Variant { snippet: s, meta }
        })
        .collect()
}

/// Generates `params.syn_pat_count` DRC-clean variants of `hotspot`. Each
/// hotspot draws from its own stream, so variant `i` does not depend on the
/// requested count or on other hotspots.
pub fn generate_synthetic_patterns(hotspot: &PatternSnippet, params: &GenParams, deck: &RuleDeck) -> Vec<Variant> {
    let mut rng = substream(params.rng_seed, "synthetic", &hotspot.id);
    let parent = hotspot.id.clone();
    variants_from_stream(hotspot, params, deck, &mut rng, |i| format!("{parent}-s{i:04}"), params.syn_pat_count)
}

/// Variants produced without the DRC gate, for measuring the raw pass rate.
pub fn raw_candidates(hotspot: &PatternSnippet, params: &GenParams, deck: &RuleDeck) -> Vec<PatternSnippet> {
    let mut rng = substream(params.rng_seed, "raw", &hotspot.id);
    (0..params.syn_pat_count).map(|_| make_variant(hotspot, params, deck, false, &mut rng).0).collect()
}

/// Fresh variants for the hard-to-classify test set, drawn from a stream
/// disjoint from training generation. Variants geometrically identical to a
/// training pattern are discarded and replaced.
pub fn build_htc_testset(
    hotspots: &[PatternSnippet],
    params: &GenParams,
    deck: &RuleDeck,
    train_keys: &HashSet<GeometryKey>,
) -> Result<Vec<Variant>> {
    let mut out = Vec::new();
    for h in hotspots {
        let mut rng = substream(params.rng_seed, "htc", &h.id);
        let want = params.syn_pat_count;
        let budget = 10 * want;
        let mut found = 0;
        let mut tried = 0;
        while found < want && tried < budget {
            let id = format!("{}-h{found:04}", h.id);
            let mut v = variants_from_stream(h, params, deck, &mut rng, |_| id.clone(), 1).remove(0);
            tried += 1;
            if train_keys.contains(&v.snippet.geometry_key()) {
                continue;
            }
            v.meta.pattern_id = v.snippet.id.clone();
            out.push(v);
            found += 1;
        }
        if found < want {
            return Err(Error::DuplicateExhaustion { hotspot: h.id.clone(), requested: want, found, tried });
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::{Point, Rect};
    use crate::rng::substream;

    fn rect_snippet() -> PatternSnippet {
        let mut s = PatternSnippet::new("r", Point::new(0, 0), (400, 400));
        s.polygons.push(Rect::new(-50, -25, 50, 25).to_polygon(1));
        s
    }

    fn loose_deck() -> RuleDeck {
        RuleDeck { min_width: 1, min_space: 1, min_area: 1 }
    }

    #[test]
    fn zero_z_is_zero_distance() {
        assert_eq!(distance_from_z(0.0, 1.0), Some(0));
        assert_eq!(distance_from_z(3.5, 1.0), None);
        assert_eq!(distance_from_z(2.99, 1.2), None);
    }

    #[test]
    fn samples_are_truncated() {
        let mut rng = substream(1, "t", "t");
        for _ in 0..10_000 {
            let v = sample_distance(2.5, false, &mut rng);
            assert!(v.abs() <= 7);
        }
    }

    #[test]
    fn p_zero_gives_copies() {
        let params = GenParams { edge_move_probability: 0.0, syn_pat_count: 5, ..Default::default() };
        let out = generate_synthetic_patterns(&rect_snippet(), &params, &loose_deck());
        assert_eq!(out.len(), 5);
        let ids: HashSet<_> = out.iter().map(|v| v.snippet.id.clone()).collect();
        assert_eq!(ids.len(), 5);
        for v in &out {
            assert_eq!(v.snippet.polygons, rect_snippet().polygons);
            assert_eq!(v.meta.moves_applied, 0);
            assert!(matches!(v.snippet.provenance, Provenance::Synthetic { .. }));
        }
    }

    #[test]
    fn small_moves_stay_bounded() {
        let params = GenParams { edge_move_probability: 1.0, distance_std_nm: 1.0, syn_pat_count: 50, ..Default::default() };
        let base = rect_snippet();
        for v in generate_synthetic_patterns(&base, &params, &loose_deck()) {
            let bb = v.snippet.polygons[0].bbox();
            let ob = base.polygons[0].bbox();
            for (a, b) in [(bb.x0, ob.x0), (bb.x1, ob.x1), (bb.y0, ob.y0), (bb.y1, ob.y1)] {
                assert!((a - b).abs() <= 3);
            }
        }
    }

    #[test]
    fn htc_exhaustion_when_only_original_exists() {
        let params = GenParams { edge_move_probability: 0.0, syn_pat_count: 3, ..Default::default() };
        let base = rect_snippet();
        let mut keys = HashSet::new();
        assert_eq!(build_htc_testset(&[base.clone()], &params, &loose_deck(), &keys).unwrap().len(), 3);
        keys.insert(base.geometry_key());
        assert!(matches!(build_htc_testset(&[base], &params, &loose_deck(), &keys), Err(Error::DuplicateExhaustion { .. })));
    }
}
