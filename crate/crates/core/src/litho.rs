//! Surrogate lithography: Gaussian-blurred aerial image, constant threshold,
//! and bridge / pinch detection on the printed raster.
//!
//! The drawn geometry is decomposed into disjoint rectangles and the blurred
//! indicator is evaluated in closed form as a sum of separable error-function
//! products, so no convolution grid or FFT is involved. Rectangle sides lying
//! on the window boundary are treated as continuing to infinity: geometry
//! that was cut by the window is assumed to carry on past it.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{rects_to_polygons, LayoutPolygon, Point, Rect};
use crate::layout::{DefectKind, Label, PatternSnippet};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProcessCorner {
    pub dose_scale: f64,
    pub sigma_scale: f64,
}

impl ProcessCorner {
    pub const NOMINAL: ProcessCorner = ProcessCorner { dose_scale: 1.0, sigma_scale: 1.0 };
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OracleConfig {
    pub blur_sigma: f64,
    /// Print threshold as a fraction of the nominal clear-field intensity.
    pub intensity_threshold: f64,
    pub corners: Vec<ProcessCorner>,
    /// Raster pitch in nm.
    pub grid_pitch: i64,
    pub pinch_min_width: f64,
    /// Open defects touching the window edge only count when they reach the
    /// core, the window shrunk by this many blur sigmas on each side.
    pub core_margin_sigmas: f64,
    /// When set, a defect only counts if part of it lies within this many nm
    /// of the window center along both axes. `None` counts defects anywhere.
    pub focus_half_width: Option<f64>,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig {
            blur_sigma: 40.0,
            intensity_threshold: 0.5,
            corners: vec![
                ProcessCorner { dose_scale: 0.9, sigma_scale: 1.1 },
                ProcessCorner::NOMINAL,
                ProcessCorner { dose_scale: 1.1, sigma_scale: 0.9 },
            ],
            grid_pitch: 2,
            pinch_min_width: 20.0,
            core_margin_sigmas: 2.0,
            focus_half_width: None,
        }
    }
}

impl OracleConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(format!("oracle: {m}")));
        if !(self.blur_sigma > 0.0) {
            return bad("blur_sigma must be > 0");
        }
        if !(self.intensity_threshold > 0.0 && self.intensity_threshold < 1.0) {
            return bad("intensity_threshold must be in (0, 1)");
        }
        if self.grid_pitch < 1 || self.grid_pitch as f64 > self.blur_sigma / 2.0 {
            return bad("grid_pitch must be in [1, blur_sigma / 2]");
        }
        if self.corners.len() < 2 || !self.corners.contains(&ProcessCorner::NOMINAL) {
            return bad("need at least two corners including the nominal (1.0, 1.0)");
        }
        if self.corners.iter().any(|c| !(c.dose_scale > 0.0 && c.sigma_scale > 0.0)) {
            return bad("corner scales must be > 0");
        }
        if !(self.pinch_min_width > 0.0) {
            return bad("pinch_min_width must be > 0");
        }
        if self.focus_half_width.is_some_and(|f| !(f >= 0.0)) {
            return bad("focus_half_width must be >= 0");
        }
        Ok(())
    }

    pub fn min_window(&self) -> f64 {
        6.0 * self.blur_sigma
    }

    fn check_window(&self, s: &PatternSnippet) -> Result<()> {
        let (w, h) = s.window_size;
        if (w.min(h) as f64) < self.min_window() {
            return Err(Error::WindowTooSmall { w, h, min: self.min_window() });
        }
        Ok(())
    }
}

/// Row-major raster, row 0 at the bottom of the window.
#[derive(Clone, Debug, PartialEq)]
pub struct IntensityGrid {
    pub nx: usize,
    pub ny: usize,
    pub pitch: i64,
    /// Window center; pixel `(i, j)` sits at
    /// `center + ((2i - nx + 1) * pitch / 2, (2j - ny + 1) * pitch / 2)`.
    pub center: Point,
    pub values: Vec<f64>,
}

impl IntensityGrid {
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[j * self.nx + i]
    }

    pub fn pixel_center(&self, i: usize, j: usize) -> (f64, f64) {
        let p = self.pitch as f64;
        (
            self.center.x as f64 + (2.0 * i as f64 - self.nx as f64 + 1.0) * p / 2.0,
            self.center.y as f64 + (2.0 * j as f64 - self.ny as f64 + 1.0) * p / 2.0,
        )
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }

    /// Binary PGM (`P5`), 8-bit, rows from the top of the window down,
    /// intensity `v` stored as `round(255 * min(v / scale, 1))`.
    pub fn write_pgm(&self, path: impl AsRef<Path>, scale: f64) -> Result<()> {
        let mut buf = Vec::with_capacity(self.nx * self.ny + 64);
        write!(buf, "P5\n# hotspot intensity pitch={} scale={}\n{} {}\n255\n", self.pitch, scale, self.nx, self.ny).expect("write to vec");
        for j in (0..self.ny).rev() {
            for i in 0..self.nx {
                let v = (self.at(i, j) / scale).clamp(0.0, 1.0);
                buf.push((v * 255.0).round() as u8);
            }
        }
        std::fs::write(path.as_ref(), buf).map_err(|e| Error::io(path.as_ref(), e))
    }
}

const SQRT_2: f64 = std::f64::consts::SQRT_2;

/// Standard normal CDF.
fn phi(t: f64) -> f64 {
    0.5 * libm::erfc(-t / SQRT_2)
}

/// Upper tail `1 - phi(t)`.
fn q(t: f64) -> f64 {
    0.5 * libm::erfc(t / SQRT_2)
}

/// Gaussian mass of `[a, b]` for a kernel centered at `x` with std dev `s`.
/// Infinite bounds are allowed.
pub fn interval_mass(a: f64, b: f64, x: f64, s: f64) -> f64 {
    let ta = (a - x) / s;
    let tb = (b - x) / s;
    let m = if ta >= 0.0 {
        q(ta) - q(tb)
    } else if tb <= 0.0 {
        phi(tb) - phi(ta)
    } else {
        1.0 - q(tb) - phi(ta)
    };
    m.max(0.0)
}

/// Pixel index range whose centers lie in `[lo2, hi2]`, both given in
/// doubled window-relative nm. Closed so that a center on an edge is
/// treated the same whichever side of the polygon the edge is on.
fn pixel_range(lo2: i64, hi2: i64, n: usize, pitch: i64) -> std::ops::Range<usize> {
    let off = (n as i64 - 1) * pitch;
    let den = 2 * pitch;
    let lo = (lo2 + off).div_euclid(den) + ((lo2 + off).rem_euclid(den) != 0) as i64;
    let hi = (hi2 + off).div_euclid(den) + 1;
    let clamp = |v: i64| v.clamp(0, n as i64) as usize;
    clamp(lo)..clamp(hi)
}

/// Disjoint rectangles covering the union of the polygons, in coordinates
/// relative to `c`.
fn union_rects(polys: &[LayoutPolygon], c: Point) -> Vec<Rect> {
    let rects: Vec<Rect> =
        polys.iter().flat_map(|p| p.to_rects()).map(|r| Rect::new(r.x0 - c.x, r.y0 - c.y, r.x1 - c.x, r.y1 - c.y)).collect();
    let overlapping = rects.iter().enumerate().any(|(i, a)| rects[i + 1..].iter().any(|b| a.intersect(b).is_some()));
    if !overlapping {
        return rects;
    }
    cover_runs(&rects)
}

/// Maximal horizontal runs of the area covered by at least one rectangle.
fn cover_runs(rects: &[Rect]) -> Vec<Rect> {
    let mut xs: Vec<i64> = rects.iter().flat_map(|r| [r.x0, r.x1]).collect();
    let mut ys: Vec<i64> = rects.iter().flat_map(|r| [r.y0, r.y1]).collect();
    xs.sort_unstable();
    xs.dedup();
    ys.sort_unstable();
    ys.dedup();
    let nx = xs.len() - 1;
    let mut cov = vec![false; nx * (ys.len() - 1)];
    for r in rects {
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
    let mut out = Vec::new();
    for j in 0..ys.len() - 1 {
        let mut i = 0;
        while i < nx {
            if cov[j * nx + i] {
                let start = i;
                while i < nx && cov[j * nx + i] {
                    i += 1;
                }
                out.push(Rect::new(xs[start], ys[j], xs[i], ys[j + 1]));
            } else {
                i += 1;
            }
        }
    }
    out
}

fn grid_dims(s: &PatternSnippet, pitch: i64) -> (usize, usize) {
    ((s.window_size.0 / pitch).max(1) as usize, (s.window_size.1 / pitch).max(1) as usize)
}

/// Aerial image of the snippet at one process corner.
pub fn simulate_aerial(s: &PatternSnippet, cfg: &OracleConfig, corner: ProcessCorner) -> Result<IntensityGrid> {
    cfg.check_window(s)?;
    let pitch = cfg.grid_pitch;
    let (nx, ny) = grid_dims(s, pitch);
    let c = s.window_center;
    let win = Rect::centered(Point::new(0, 0), s.window_size.0, s.window_size.1);
    let sigma = cfg.blur_sigma * corner.sigma_scale;
    let mut values = vec![0.0; nx * ny];
    let xs: Vec<f64> = (0..nx).map(|i| (2.0 * i as f64 - nx as f64 + 1.0) * pitch as f64 / 2.0).collect();
    let ys: Vec<f64> = (0..ny).map(|j| (2.0 * j as f64 - ny as f64 + 1.0) * pitch as f64 / 2.0).collect();
    let ext = |v: i64, edge: i64, inf: f64| if v == edge { inf } else { v as f64 };
    let mut fx = vec![0.0; nx];
    let mut fy = vec![0.0; ny];
    for r in union_rects(&s.polygons, c) {
        let a = ext(r.x0, win.x0, f64::NEG_INFINITY);
        let b = ext(r.x1, win.x1, f64::INFINITY);
        let ay = ext(r.y0, win.y0, f64::NEG_INFINITY);
        let by = ext(r.y1, win.y1, f64::INFINITY);
        for (i, &x) in xs.iter().enumerate() {
            fx[i] = interval_mass(a, b, x, sigma);
        }
        for (j, &y) in ys.iter().enumerate() {
            fy[j] = interval_mass(ay, by, y, sigma);
        }
        let cols: Vec<usize> = (0..nx).filter(|&i| fx[i] > 1e-18).collect();
        for j in 0..ny {
            if fy[j] <= 1e-18 {
                continue;
            }
            let row = &mut values[j * nx..(j + 1) * nx];
            for &i in &cols {
                row[i] += fx[i] * fy[j];
            }
        }
    }
    for v in &mut values {
        *v = (v.clamp(0.0, 1.0)) * corner.dose_scale;
    }
    Ok(IntensityGrid { nx, ny, pitch, center: c, values })
}

/// Which drawn polygon covers each pixel center (`-1` for none). A center
/// on the shared boundary of two polygons goes to the lower index.
fn drawn_raster(s: &PatternSnippet, nx: usize, ny: usize, pitch: i64) -> Vec<i32> {
    let c = s.window_center;
    let mut ids = vec![-1i32; nx * ny];
    for (pi, p) in s.polygons.iter().enumerate() {
        for r in p.to_rects() {
            let xr = pixel_range(2 * (r.x0 - c.x), 2 * (r.x1 - c.x), nx, pitch);
            let yr = pixel_range(2 * (r.y0 - c.y), 2 * (r.y1 - c.y), ny, pitch);
            for j in yr {
                for i in xr.clone() {
                    if ids[j * nx + i] < 0 {
                        ids[j * nx + i] = pi as i32;
                    }
                }
            }
        }
    }
    ids
}

/// 4-connected component labels (`-1` background) and the component count.
pub fn components(mask: &[bool], nx: usize, ny: usize) -> (Vec<i32>, usize) {
    let mut lab = vec![-1i32; nx * ny];
    let mut count = 0usize;
    let mut stack = Vec::new();
    for start in 0..nx * ny {
        if !mask[start] || lab[start] >= 0 {
            continue;
        }
        lab[start] = count as i32;
        stack.push(start);
        while let Some(k) = stack.pop() {
            let (i, j) = (k % nx, k / nx);
            let mut visit = |n: usize| {
                if mask[n] && lab[n] < 0 {
                    lab[n] = count as i32;
                    stack.push(n);
                }
            };
            if i > 0 {
                visit(k - 1);
            }
            if i + 1 < nx {
                visit(k + 1);
            }
            if j > 0 {
                visit(k - nx);
            }
            if j + 1 < ny {
                visit(k + nx);
            }
        }
        count += 1;
    }
    (lab, count)
}

/// Erosion by a `k x k` square; pixels beyond the raster replicate the
/// nearest edge pixel.
pub fn erode(mask: &[bool], nx: usize, ny: usize, k: usize) -> Vec<bool> {
    let lo = k / 2;
    let hi = k.saturating_sub(1) - lo;
    let pass = |src: &[bool], n: usize, stride: usize, lines: usize, step: usize| -> Vec<bool> {
        let mut out = vec![false; src.len()];
        for l in 0..lines {
            let base = l * step;
            // Run length of consecutive set pixels ending at each index.
            let mut run = vec![0usize; n];
            for t in 0..n {
                let v = src[base + t * stride];
                run[t] = if v {
                    if t > 0 {
                        run[t - 1] + 1
                    } else {
                        1
                    }
                } else {
                    0
                };
            }
            for t in 0..n {
                let a = t.saturating_sub(lo);
                let b = (t + hi).min(n - 1);
                out[base + t * stride] = run[b] > b - a;
            }
        }
        out
    };
    let h = pass(mask, nx, 1, ny, nx);
    pass(&h, ny, nx, nx, 1)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CornerDefects {
    pub bridges: usize,
    pub pinches: usize,
}

impl CornerDefects {
    pub fn total(&self) -> usize {
        self.bridges + self.pinches
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LabelOutcome {
    pub label: Label,
    /// Corner with the most defects, lowest index on ties.
    pub worst_corner: Option<usize>,
    pub per_corner: Vec<CornerDefects>,
}

struct Scene {
    nx: usize,
    ny: usize,
    drawn: Vec<i32>,
    /// Per polygon: has drawn pixels, and whether an open defect may count.
    open_counts: Vec<bool>,
    core: Vec<bool>,
    focus: Option<Vec<bool>>,
}

fn centered_box(nx: usize, ny: usize, p: f64, hx: f64, hy: f64) -> Vec<bool> {
    let mut m = vec![false; nx * ny];
    for j in 0..ny {
        let y = (2.0 * j as f64 - ny as f64 + 1.0) * p / 2.0;
        for i in 0..nx {
            let x = (2.0 * i as f64 - nx as f64 + 1.0) * p / 2.0;
            m[j * nx + i] = x.abs() <= hx && y.abs() <= hy;
        }
    }
    m
}

fn scene(s: &PatternSnippet, cfg: &OracleConfig) -> Scene {
    let (nx, ny) = grid_dims(s, cfg.grid_pitch);
    let drawn = drawn_raster(s, nx, ny, cfg.grid_pitch);
    let margin = cfg.core_margin_sigmas * cfg.blur_sigma;
    let p = cfg.grid_pitch as f64;
    let core = centered_box(nx, ny, p, s.window_size.0 as f64 / 2.0 - margin, s.window_size.1 as f64 / 2.0 - margin);
    let focus = cfg.focus_half_width.map(|f| centered_box(nx, ny, p, f, f));
    let win = s.window();
    let mut open_counts = vec![false; s.polygons.len()];
    for (pi, poly) in s.polygons.iter().enumerate() {
        let touches = poly.edges().any(|(a, b)| win.boundary_holds(a, b));
        let mut any = false;
        let mut in_core = false;
        for k in 0..nx * ny {
            if drawn[k] == pi as i32 {
                any = true;
                in_core |= core[k];
            }
        }
        open_counts[pi] = any && (!touches || in_core);
    }
    Scene { nx, ny, drawn, open_counts, core, focus }
}

/// Dilation by a `k x k` square, the adjoint of [`erode`].
pub fn dilate(mask: &[bool], nx: usize, ny: usize, k: usize) -> Vec<bool> {
    let lo = k / 2;
    let hi = k.saturating_sub(1) - lo;
    let pass = |src: &[bool], n: usize, stride: usize, lines: usize, step: usize| -> Vec<bool> {
        let mut out = vec![false; src.len()];
        for l in 0..lines {
            let base = l * step;
            let mut last: Option<usize> = None;
            let mut next = vec![usize::MAX; n];
            for t in (0..n).rev() {
                if src[base + t * stride] {
                    last = Some(t);
                }
                next[t] = last.unwrap_or(usize::MAX);
            }
            for t in 0..n {
                let a = t.saturating_sub(hi);
                out[base + t * stride] = next[a] <= t + lo;
            }
        }
        out
    };
    let h = pass(mask, nx, 1, ny, nx);
    pass(&h, ny, nx, nx, 1)
}

/// Pixels of `region` on maximal row or column runs whose two end neighbours
/// carry different non-negative labels in `parts`.
fn spanning_runs(region: &[bool], parts: &[i32], nx: usize, ny: usize) -> Vec<bool> {
    let mut out = vec![false; nx * ny];
    let mut scan = |n: usize, lines: usize, at: &dyn Fn(usize, usize) -> usize| {
        for l in 0..lines {
            let mut t = 1;
            while t < n {
                if !region[at(l, t)] {
                    t += 1;
                    continue;
                }
                let st = t;
                while t < n && region[at(l, t)] {
                    t += 1;
                }
                let a = parts[at(l, st - 1)];
                if t < n && a >= 0 && !region[at(l, st - 1)] && parts[at(l, t)] >= 0 && parts[at(l, t)] != a {
                    (st..t).for_each(|u| out[at(l, u)] = true);
                }
            }
        }
    };
    scan(nx, ny, &|j, i| j * nx + i);
    scan(ny, nx, &|i, j| j * nx + i);
    out
}

fn corner_defects(sc: &Scene, grid: &IntensityGrid, cfg: &OracleConfig, npoly: usize) -> CornerDefects {
    let (nx, ny) = (sc.nx, sc.ny);
    let printed: Vec<bool> = grid.values.iter().map(|&v| v >= cfg.intensity_threshold).collect();
    let (lab, ncomp) = components(&printed, nx, ny);
    // Polygons touched by each component, and components touching each polygon.
    let mut comp_polys: Vec<Vec<usize>> = vec![Vec::new(); ncomp];
    let mut poly_comps: Vec<Vec<usize>> = vec![Vec::new(); npoly];
    let mut comp_core = vec![false; ncomp];
    for k in 0..nx * ny {
        let c = lab[k];
        if c < 0 {
            continue;
        }
        let c = c as usize;
        comp_core[c] |= sc.core[k];
        let d = sc.drawn[k];
        if d >= 0 {
            let d = d as usize;
            if !comp_polys[c].contains(&d) {
                comp_polys[c].push(d);
            }
            if !poly_comps[d].contains(&c) {
                poly_comps[d].push(c);
            }
        }
    }
    // Whether a defect located at the pixels selected by `at` counts.
    let in_focus = |at: &dyn Fn(usize) -> bool| match &sc.focus {
        None => true,
        Some(f) => (0..nx * ny).any(|k| f[k] && at(k)),
    };
    let mut out = CornerDefects::default();
    let runs = if sc.focus.is_some() {
        let gap: Vec<bool> = (0..nx * ny).map(|k| printed[k] && sc.drawn[k] < 0).collect();
        spanning_runs(&gap, &sc.drawn, nx, ny)
    } else {
        Vec::new()
    };
    for c in 0..ncomp {
        if comp_polys[c].len() < 2 {
            continue;
        }
        let ci = c as i32;
        let located = sc.focus.is_none() || (0..nx * ny).any(|k| lab[k] == ci && runs[k]);
        let hit = if located { in_focus(&|k| lab[k] == ci && runs[k]) } else { in_focus(&|k| lab[k] == ci && sc.drawn[k] < 0) };
        if hit {
            out.bridges += 1;
        }
    }
    for (pi, comps) in poly_comps.iter().enumerate() {
        if !sc.open_counts[pi] {
            continue;
        }
        let pid = pi as i32;
        if comps.is_empty() && in_focus(&|k| sc.drawn[k] == pid) {
            out.pinches += 1;
        } else if comps.len() >= 2 {
            let hit = match &sc.focus {
                None => true,
                Some(_) => {
                    let gap: Vec<bool> = (0..nx * ny).map(|k| sc.drawn[k] == pid && !printed[k]).collect();
                    let own: Vec<i32> = (0..nx * ny).map(|k| if sc.drawn[k] == pid { lab[k] } else { -1 }).collect();
                    let cut = spanning_runs(&gap, &own, nx, ny);
                    if cut.iter().any(|&c| c) {
                        in_focus(&|k| cut[k])
                    } else {
                        in_focus(&|k| gap[k])
                    }
                }
            };
            if hit {
                out.pinches += 1;
            }
        }
    }
    let k = (cfg.pinch_min_width / cfg.grid_pitch as f64).ceil().max(1.0) as usize;
    let eroded = erode(&printed, nx, ny, k);
    let (elab, necomp) = components(&eroded, nx, ny);
    let mut eroded_in = vec![0usize; ncomp];
    let mut seen = vec![false; necomp];
    for kk in 0..nx * ny {
        let e = elab[kk];
        if e >= 0 && !seen[e as usize] {
            seen[e as usize] = true;
            eroded_in[lab[kk] as usize] += 1;
        }
    }
    let necks =
        if sc.focus.is_some() && eroded_in.iter().any(|&n| n >= 2) { neck_pixels(&printed, &eroded, nx, ny, k) } else { Vec::new() };
    for c in 0..ncomp {
        if comp_polys[c].len() != 1 {
            continue;
        }
        let pi = comp_polys[c][0];
        let ci = c as i32;
        let thin = eroded_in[c] == 0 && (comp_core[c] || sc.open_counts[pi]);
        let hit = if thin {
            in_focus(&|kk| lab[kk] == ci)
        } else if eroded_in[c] >= 2 {
            let located = sc.focus.is_none() || (0..nx * ny).any(|kk| lab[kk] == ci && necks[kk]);
            if located {
                in_focus(&|kk| lab[kk] == ci && necks[kk])
            } else {
                in_focus(&|kk| lab[kk] == ci)
            }
        } else {
            false
        };
        if hit {
            out.pinches += 1;
        }
    }
    out
}

/// Printed pixels outside the opening by a `k x k` square that run straight
/// between two separate parts of the opening.
fn neck_pixels(printed: &[bool], eroded: &[bool], nx: usize, ny: usize, k: usize) -> Vec<bool> {
    let opening = dilate(eroded, nx, ny, k);
    let residue: Vec<bool> = printed.iter().zip(&opening).map(|(&p, &o)| p && !o).collect();
    let (olab, _) = components(&opening, nx, ny);
    spanning_runs(&residue, &olab, nx, ny)
}

/// Hotspot iff any corner shows a bridge or a pinch.
pub fn label_snippet(s: &PatternSnippet, cfg: &OracleConfig) -> Result<LabelOutcome> {
    cfg.check_window(s)?;
    let sc = scene(s, cfg);
    let mut per_corner = Vec::with_capacity(cfg.corners.len());
    for &corner in &cfg.corners {
        let grid = simulate_aerial(s, cfg, corner)?;
        per_corner.push(corner_defects(&sc, &grid, cfg, s.polygons.len()));
    }
    let mut worst: Option<usize> = None;
    for (i, d) in per_corner.iter().enumerate() {
        if d.total() > 0 && worst.is_none_or(|w| d.total() > per_corner[w].total()) {
            worst = Some(i);
        }
    }
    let label = match worst {
        None => Label::NonHotspot,
        Some(w) if per_corner[w].bridges > 0 => Label::Hotspot(DefectKind::Bridge),
        Some(_) => Label::Hotspot(DefectKind::Pinch),
    };
    Ok(LabelOutcome { label, worst_corner: worst, per_corner })
}

#[derive(Clone, Debug, PartialEq)]
pub struct PrintedContour {
    pub nx: usize,
    pub ny: usize,
    /// Printed raster per corner, in configuration order.
    pub masks: Vec<Vec<bool>>,
    /// Union over corners.
    pub outer: Vec<bool>,
    /// Intersection over corners.
    pub inner: Vec<bool>,
    /// `outer` minus `inner`.
    pub pv_band: Vec<bool>,
    /// Polygonized printed region per corner, in nm.
    pub contours: Vec<Vec<LayoutPolygon>>,
}

pub fn printed_contours(s: &PatternSnippet, cfg: &OracleConfig) -> Result<PrintedContour> {
    cfg.check_window(s)?;
    let (nx, ny) = grid_dims(s, cfg.grid_pitch);
    let mut masks = Vec::new();
    let mut contours = Vec::new();
    let p = cfg.grid_pitch;
    let ox = s.window_center.x - (nx as i64 * p) / 2;
    let oy = s.window_center.y - (ny as i64 * p) / 2;
    for &corner in &cfg.corners {
        let g = simulate_aerial(s, cfg, corner)?;
        let m: Vec<bool> = g.values.iter().map(|&v| v >= cfg.intensity_threshold).collect();
        let mut rects = Vec::new();
        for j in 0..ny {
            let mut i = 0;
            while i < nx {
                if m[j * nx + i] {
                    let st = i;
                    while i < nx && m[j * nx + i] {
                        i += 1;
                    }
                    let y0 = oy + j as i64 * p;
                    rects.push(Rect::new(ox + st as i64 * p, y0, ox + i as i64 * p, y0 + p));
                } else {
                    i += 1;
                }
            }
        }
        contours.push(rects_to_polygons(&rects, 1).0);
        masks.push(m);
    }
    let outer: Vec<bool> = (0..nx * ny).map(|k| masks.iter().any(|m| m[k])).collect();
    let inner: Vec<bool> = (0..nx * ny).map(|k| masks.iter().all(|m| m[k])).collect();
    let pv_band = outer.iter().zip(&inner).map(|(&o, &i)| o && !i).collect();
    Ok(PrintedContour { nx, ny, masks, outer, inner, pv_band, contours })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn snippet(size: i64, rects: &[Rect]) -> PatternSnippet {
        let mut s = PatternSnippet::new("t", Point::new(0, 0), (size, size));
        s.polygons = rects.iter().map(|r| r.to_polygon(1)).collect();
        s
    }

    fn merged(size: i64, rects: &[Rect]) -> PatternSnippet {
        let mut s = PatternSnippet::new("t", Point::new(0, 0), (size, size));
        s.polygons = rects_to_polygons(rects, 1).0;
        s
    }

    #[test]
    fn half_plane_edge_is_half_dose() {
        let cfg = OracleConfig::default();
        // Left half of the window filled; the edge at x = 0 lies between
        // pixel centers -1 and +1.
        let s = snippet(320, &[Rect::new(-160, -160, 0, 160)]);
        let g = simulate_aerial(&s, &cfg, ProcessCorner::NOMINAL).unwrap();
        let j = g.ny / 2;
        let mid = (g.at(g.nx / 2 - 1, j) + g.at(g.nx / 2, j)) / 2.0;
        assert!((mid - 0.5).abs() < 1e-12, "{mid}");
        for j in 0..g.ny {
            assert!((g.at(g.nx / 2 - 1, j) - g.at(g.nx / 2 - 1, 0)).abs() < 1e-12);
        }
    }

    #[test]
    fn empty_snippet_is_dark() {
        let cfg = OracleConfig::default();
        let g = simulate_aerial(&snippet(320, &[]), &cfg, ProcessCorner::NOMINAL).unwrap();
        assert!(g.values.iter().all(|&v| v == 0.0));
        assert_eq!(label_snippet(&snippet(320, &[]), &cfg).unwrap().label, Label::NonHotspot);
    }

    #[test]
    fn small_window_is_rejected() {
        let cfg = OracleConfig::default();
        assert!(matches!(simulate_aerial(&snippet(200, &[]), &cfg, ProcessCorner::NOMINAL), Err(Error::WindowTooSmall { .. })));
    }

    #[test]
    fn wide_rectangle_is_clean() {
        let cfg = OracleConfig::default();
        let s = snippet(480, &[Rect::new(-100, -100, 100, 100)]);
        assert_eq!(label_snippet(&s, &cfg).unwrap().label, Label::NonHotspot);
    }

    #[test]
    fn erosion_removes_thin_runs() {
        let nx = 10;
        let mut m = vec![false; nx * nx];
        for j in 2..8 {
            for i in 0..nx {
                m[j * nx + i] = true;
            }
        }
        assert!(erode(&m, nx, nx, 6).iter().any(|&v| v));
        assert!(!erode(&m, nx, nx, 7).iter().any(|&v| v));
    }

    #[test]
    fn pixel_range_matches_direct_scan() {
        for n in [5usize, 6, 160] {
            for pitch in [1i64, 2, 3] {
                for lo2 in (-400..400).step_by(37) {
                    let hi2 = lo2 + 90;
                    let direct: Vec<usize> = (0..n)
                        .filter(|&i| {
                            let t = (2 * i as i64 - n as i64 + 1) * pitch;
                            t >= lo2 && t <= hi2
                        })
                        .collect();
                    let r: Vec<usize> = pixel_range(lo2, hi2, n, pitch).collect();
                    assert_eq!(r, direct, "n={n} pitch={pitch} lo2={lo2}");
                }
            }
        }
    }

    #[test]
    fn dilation_is_adjoint_of_erosion() {
        let nx = 12;
        let mut m = vec![false; nx * nx];
        m[5 * nx + 6] = true;
        for k in 1..6 {
            let d = dilate(&m, nx, nx, k);
            assert_eq!(d.iter().filter(|&&v| v).count(), k * k, "k={k}");
            assert_eq!(erode(&d, nx, nx, k), m, "k={k}");
        }
    }

    fn bumped_lines(bump_x: i64) -> PatternSnippet {
        // Two long lines 100 nm apart with a 60 nm wide bump that narrows the
        // gap to 10 nm around `bump_x`.
        merged(640, &[Rect::new(-320, -140, 320, -50), Rect::new(-320, 50, 320, 140), Rect::new(bump_x - 30, -50, bump_x + 30, 40)])
    }

    #[test]
    fn focus_keeps_central_bridge_only() {
        let plain = OracleConfig::default();
        let focused = OracleConfig { focus_half_width: Some(40.0), ..OracleConfig::default() };
        for x in [0, 150] {
            let s = bumped_lines(x);
            assert_eq!(s.polygons.len(), 2);
            assert_eq!(label_snippet(&s, &plain).unwrap().label, Label::Hotspot(DefectKind::Bridge));
        }
        assert_eq!(label_snippet(&bumped_lines(0), &focused).unwrap().label, Label::Hotspot(DefectKind::Bridge));
        assert_eq!(label_snippet(&bumped_lines(150), &focused).unwrap().label, Label::NonHotspot);
    }

    #[test]
    fn focus_keeps_central_neck_only() {
        let neck =
            |x: i64| merged(640, &[Rect::new(-320, -45, x - 20, 45), Rect::new(x - 20, -6, x + 20, 6), Rect::new(x + 20, -45, 320, 45)]);
        let plain = OracleConfig::default();
        let focused = OracleConfig { focus_half_width: Some(40.0), ..OracleConfig::default() };
        assert_eq!(label_snippet(&neck(150), &plain).unwrap().label, Label::Hotspot(DefectKind::Pinch));
        assert_eq!(label_snippet(&neck(0), &focused).unwrap().label, Label::Hotspot(DefectKind::Pinch));
        let o = label_snippet(&neck(150), &focused).unwrap();
        assert_eq!(o.label, Label::NonHotspot, "{:?}", o.per_corner);
    }
}
