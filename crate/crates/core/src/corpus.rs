//! Procedural routing-like seed layouts, snippet extraction and labeling.
//!
//! Layouts are parallel horizontal tracks of wire segments with line ends.
//! Segments carry motifs: bumps that narrow the space to a neighbor track and
//! necks that narrow the wire itself. Critical motifs sit just above the DRC
//! minimum, where the oracle's printability boundary lies; benign motifs keep
//! a comfortable margin. Every motif is DRC-checked against its neighborhood
//! as it is placed.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::drc::{check_layout, RuleDeck};
use crate::error::{Error, Result};
use crate::ftp::fragment_layout;
use crate::geom::{drop_collinear, Dihedral, LayoutPolygon, Point, Rect};
use crate::io::sha256_hex;
use crate::layout::{extract_window, Layout, PatternSnippet};
use crate::litho::{label_snippet, LabelOutcome, OracleConfig};
use crate::rng::substream;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CorpusSpec {
    pub width: i64,
    pub tracks: usize,
    pub track_pitch: i64,
    /// Wire width range, inclusive (even values are drawn).
    pub line_width: (i64, i64),
    /// Probability that a segment slot holds a wire; 0 gives an empty layout.
    pub density: f64,
    pub segment_len: (i64, i64),
    pub end_gap: (i64, i64),
    /// Expected critical motifs per micron of wire.
    pub critical_rate: f64,
    /// Expected benign motifs per micron of wire.
    pub benign_rate: f64,
    pub critical_gap: (i64, i64),
    pub critical_neck: (i64, i64),
    pub benign_gap: (i64, i64),
    pub benign_neck: (i64, i64),
    pub motif_len: (i64, i64),
    /// Rotate every other layout by a quarter turn.
    pub mix_orientation: bool,
    pub max_retries: usize,
}

impl Default for CorpusSpec {
    fn default() -> Self {
        CorpusSpec {
            width: 3200,
            tracks: 16,
            track_pitch: 160,
            line_width: (76, 92),
            density: 0.85,
            segment_len: (400, 2400),
            end_gap: (80, 240),
            critical_rate: 0.28,
            benign_rate: 0.35,
            critical_gap: (48, 52),
            critical_neck: (64, 67),
            benign_gap: (58, 72),
            benign_neck: (70, 76),
            motif_len: (64, 240),
            mix_orientation: true,
            max_retries: 20,
        }
    }
}

impl CorpusSpec {
    pub fn validate(&self, deck: &RuleDeck) -> Result<()> {
        let bad = |m: &str| Err(Error::InfeasibleSpec(m.into()));
        if self.width <= 0 || self.track_pitch <= 0 {
            return bad("width and track pitch must be positive");
        }
        if !(0.0..=1.0).contains(&self.density) {
            return bad("density must be in [0, 1]");
        }
        let (w0, w1) = self.line_width;
        if w0 > w1 || w0 < deck.min_width || self.track_pitch - w1 < deck.min_space {
            return bad("line widths violate the rule deck at this pitch");
        }
        if self.end_gap.0 < deck.min_space || self.segment_len.0 < deck.min_width.max(1) {
            return bad("line ends violate the rule deck");
        }
        if self.critical_gap.0 < deck.min_space || self.benign_gap.0 < deck.min_space {
            return bad("motif gaps below min_space");
        }
        if self.critical_neck.0 < deck.min_width || self.benign_neck.0 < deck.min_width {
            return bad("neck widths below min_width");
        }
        if self.motif_len.0 < deck.min_space.max(deck.min_width) {
            return bad("motif length below the rule minimum");
        }
        Ok(())
    }

    pub fn height(&self) -> i64 {
        self.tracks as i64 * self.track_pitch
    }
}

/// Wire as x-pieces `(x0, x1, bottom, top)`, contiguous in x.
#[derive(Clone, Debug)]
struct Wire {
    track: usize,
    pieces: Vec<(i64, i64, i64, i64)>,
}

impl Wire {
    fn x_range(&self) -> (i64, i64) {
        (self.pieces[0].0, self.pieces.last().unwrap().1)
    }

    fn split_at(&mut self, x: i64) {
        if let Some(i) = self.pieces.iter().position(|p| p.0 < x && x < p.1) {
            let p = self.pieces[i];
            self.pieces[i] = (p.0, x, p.2, p.3);
            self.pieces.insert(i + 1, (x, p.1, p.2, p.3));
        }
    }

    /// Applies `f` to every piece inside `[x0, x1)`.
    fn edit(&mut self, x0: i64, x1: i64, f: impl Fn(&mut (i64, i64, i64, i64))) {
        self.split_at(x0);
        self.split_at(x1);
        for p in self.pieces.iter_mut().filter(|p| p.0 >= x0 && p.1 <= x1) {
            f(p);
        }
    }

    fn bottom_over(&self, x0: i64, x1: i64) -> Option<i64> {
        let (a, b) = self.x_range();
        (a <= x0 && x1 <= b).then(|| self.pieces.iter().filter(|p| p.1 > x0 && p.0 < x1).map(|p| p.2).min().unwrap())
    }

    fn top_over(&self, x0: i64, x1: i64) -> Option<i64> {
        let (a, b) = self.x_range();
        (a <= x0 && x1 <= b).then(|| self.pieces.iter().filter(|p| p.1 > x0 && p.0 < x1).map(|p| p.3).max().unwrap())
    }

    fn polygon(&self) -> LayoutPolygon {
        let mut pts = Vec::new();
        for p in &self.pieces {
            pts.push(Point::new(p.0, p.2));
            pts.push(Point::new(p.1, p.2));
        }
        for p in self.pieces.iter().rev() {
            pts.push(Point::new(p.1, p.3));
            pts.push(Point::new(p.0, p.3));
        }
        pts.dedup();
        if pts.first() == pts.last() {
            pts.pop();
        }
        LayoutPolygon::new(drop_collinear(&pts), 1)
    }
}

fn range(rng: &mut ChaCha8Rng, r: (i64, i64)) -> i64 {
    rng.random_range(r.0..=r.1)
}

fn local_drc_ok(wires: &[Wire], w: usize, deck: &RuleDeck) -> bool {
    let (x0, x1) = wires[w].x_range();
    let t = wires[w].track;
    let near: Vec<LayoutPolygon> = wires
        .iter()
        .filter(|o| {
            let (a, b) = o.x_range();
            o.track.abs_diff(t) <= 1 && a < x1 + 200 && b > x0 - 200
        })
        .map(Wire::polygon)
        .collect();
    check_layout(&near, deck).passed()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Motif {
    Bump { up: bool, critical: bool },
    Neck { critical: bool },
}

fn try_motif(wires: &mut [Wire], w: usize, motif: Motif, spec: &CorpusSpec, deck: &RuleDeck, rng: &mut ChaCha8Rng) -> bool {
    let (a, b) = wires[w].x_range();
    let len = range(rng, spec.motif_len);
    if b - a < len + 2 * deck.min_width {
        return false;
    }
    let x0 = rng.random_range(a + deck.min_width..=b - deck.min_width - len);
    let x1 = x0 + len;
    let t = wires[w].track;
    let saved = wires[w].pieces.clone();
    match motif {
        Motif::Bump { up, critical } => {
            let target = wires.iter().enumerate().find_map(|(i, o)| {
                let adjacent = if up { o.track == t + 1 } else { o.track + 1 == t };
                if !adjacent || i == w {
                    return None;
                }
                // Keep the facing wire continuous well past the bump.
                if up {
                    o.bottom_over(x0 - 80, x1 + 80)
                } else {
                    o.top_over(x0 - 80, x1 + 80)
                }
            });
            let Some(face) = target else { return false };
            let gap = range(rng, if critical { spec.critical_gap } else { spec.benign_gap });
            let (cur_lo, cur_hi) = (wires[w].bottom_over(x0, x1).unwrap(), wires[w].top_over(x0, x1).unwrap());
            if up {
                let top = face - gap;
                if top <= cur_hi {
                    return false;
                }
                wires[w].edit(x0, x1, |p| p.3 = top);
            } else {
                let bot = face + gap;
                if bot >= cur_lo {
                    return false;
                }
                wires[w].edit(x0, x1, |p| p.2 = bot);
            }
        }
        Motif::Neck { critical } => {
            let wn = range(rng, if critical { spec.critical_neck } else { spec.benign_neck });
            let (lo, hi) = (wires[w].pieces[0].2, wires[w].pieces[0].3);
            if wires[w].pieces.iter().any(|p| p.0 < x1 && p.1 > x0 && (p.2 != lo || p.3 != hi)) || hi - lo <= wn {
                return false;
            }
            let cut = hi - lo - wn;
            let below = rng.random_range(0..=cut);
            wires[w].edit(x0, x1, |p| {
                p.2 = lo + below;
                p.3 = hi - (cut - below);
            });
        }
    }
    if local_drc_ok(wires, w, deck) {
        true
    } else {
        wires[w].pieces = saved;
        false
    }
}

fn build_wires(spec: &CorpusSpec, rng: &mut ChaCha8Rng) -> Vec<Wire> {
    let mut wires = Vec::new();
    for t in 0..spec.tracks {
        let yc = spec.track_pitch / 2 + t as i64 * spec.track_pitch;
        let mut x = rng.random_range(0..spec.end_gap.1);
        loop {
            let len = range(rng, spec.segment_len);
            if x + len > spec.width {
                break;
            }
            if rng.random::<f64>() < spec.density {
                let w = 2 * rng.random_range(spec.line_width.0.div_euclid(2)..=spec.line_width.1.div_euclid(2));
                wires.push(Wire { track: t, pieces: vec![(x, x + len, yc - w / 2, yc + w / 2)] });
            }
            x += len + range(rng, spec.end_gap);
        }
    }
    wires
}

fn poisson(rng: &mut ChaCha8Rng, mean: f64) -> usize {
    let l = (-mean).exp();
    let mut k = 0;
    let mut p = rng.random::<f64>();
    while p > l {
        k += 1;
        p *= rng.random::<f64>();
    }
    k
}

/// One DRC-clean layout, deterministic in `(seed, index)`.
pub fn gen_layout(spec: &CorpusSpec, deck: &RuleDeck, seed: u64, index: usize) -> Result<Layout> {
    spec.validate(deck)?;
    let mut rng = substream(seed, "corpus", &index.to_string());
    for _ in 0..=spec.max_retries {
        let mut wires = build_wires(spec, &mut rng);
        for w in 0..wires.len() {
            let (a, b) = wires[w].x_range();
            let microns = (b - a) as f64 / 1000.0;
            let mut motifs = Vec::new();
            for _ in 0..poisson(&mut rng, spec.critical_rate * microns) {
                motifs.push(true);
            }
            for _ in 0..poisson(&mut rng, spec.benign_rate * microns) {
                motifs.push(false);
            }
            motifs.shuffle(&mut rng);
            for critical in motifs {
                let m =
                    if rng.random::<f64>() < 0.5 { Motif::Bump { up: rng.random::<bool>(), critical } } else { Motif::Neck { critical } };
                for _ in 0..4 {
                    if try_motif(&mut wires, w, m, spec, deck, &mut rng) {
                        break;
                    }
                }
            }
        }
        let mut polys: Vec<LayoutPolygon> = wires.iter().map(Wire::polygon).collect();
        if spec.mix_orientation && index % 2 == 1 {
            let t = Dihedral { quarter_turns: 1, mirror: false };
            let h = spec.height();
            polys = polys.iter().map(|p| p.transformed(t).translated(h, 0)).collect();
        }
        if check_layout(&polys, deck).passed() {
            return Ok(Layout::new(polys, 1));
        }
    }
    Err(Error::InfeasibleSpec(format!("layout {index} failed DRC after {} retries", spec.max_retries)))
}

/// Extent of a generated layout, before any polygons are considered.
pub fn layout_extent(spec: &CorpusSpec, index: usize) -> Rect {
    if spec.mix_orientation && index % 2 == 1 {
        Rect::new(0, 0, spec.height(), spec.width)
    } else {
        Rect::new(0, 0, spec.width, spec.height())
    }
}

pub fn gen_seed_corpus(spec: &CorpusSpec, deck: &RuleDeck, seed: u64, count: usize) -> Result<Vec<Layout>> {
    (0..count).into_par_iter().map(|i| gen_layout(spec, deck, seed, i)).collect()
}

/// SHA-256 over the JSON serialization of each layout in order.
pub fn corpus_digest(layouts: &[Layout]) -> String {
    let mut text = String::new();
    for l in layouts {
        text.push_str(&l.to_json_string());
        text.push('\n');
    }
    sha256_hex(text.as_bytes())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SnippetSpec {
    pub window: i64,
    /// Fragmentation used to place anchors.
    pub max_frag_len: i64,
    /// Random subset of anchors per layout; all when `None`.
    pub per_layout: Option<usize>,
    pub seed: u64,
}

impl Default for SnippetSpec {
    fn default() -> Self {
        SnippetSpec { window: 320, max_frag_len: 80, per_layout: Some(400), seed: 11 }
    }
}

/// One snippet per anchor fragment whose window lies inside `extent`,
/// centered on the fragment's midpoint (rounded toward its first vertex).
pub fn extract_snippets(layout: &Layout, layout_id: &str, extent: Rect, spec: &SnippetSpec) -> Vec<PatternSnippet> {
    let whole = layout.as_snippet(layout_id);
    let frags = fragment_layout(&whole, spec.max_frag_len);
    let half = spec.window / 2;
    let mut anchors: Vec<(usize, Point)> = frags
        .iter()
        .map(|f| {
            let d = f.dir().unit();
            let m = f.len() / 2;
            (f.id, Point::new(f.a.x + d.0 * m, f.a.y + d.1 * m))
        })
        .filter(|(_, p)| p.x - half >= extent.x0 && p.x + half <= extent.x1 && p.y - half >= extent.y0 && p.y + half <= extent.y1)
        .collect();
    if let Some(k) = spec.per_layout {
        let mut rng = substream(spec.seed, "anchors", layout_id);
        anchors.shuffle(&mut rng);
        anchors.truncate(k);
        anchors.sort();
    }
    anchors
        .into_iter()
        .map(|(fid, p)| {
            let mut s = extract_window(layout, p, (spec.window, spec.window));
            s.id = format!("{layout_id}-f{fid:05}");
            s.anchor = Some(p);
            s
        })
        .collect()
}

/// Labels every snippet in place, returning the oracle outcomes in order.
pub fn label_all(snippets: &mut [PatternSnippet], cfg: &OracleConfig) -> Result<Vec<LabelOutcome>> {
    let out: Vec<LabelOutcome> = snippets.par_iter().map(|s| label_snippet(s, cfg)).collect::<Result<_>>()?;
    for (s, o) in snippets.iter_mut().zip(&out) {
        s.label = Some(o.label);
    }
    Ok(out)
}
