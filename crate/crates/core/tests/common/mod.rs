//! Independent reference implementations and fixtures shared by the
//! integration tests.
#![allow(dead_code)]

use std::path::PathBuf;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use hotspot::ftp::fragment_layout;
use hotspot::geom::{rects_to_polygons, LayoutPolygon, Point, Rect};
use hotspot::layout::{extract_window, Layout, PatternSnippet};

pub fn data_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data").join(name)
}

pub fn load_snippets(name: &str) -> Vec<PatternSnippet> {
    serde_json::from_str(&std::fs::read_to_string(data_path(name)).unwrap()).unwrap()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn rect_poly(x0: i64, y0: i64, x1: i64, y1: i64) -> LayoutPolygon {
    Rect::new(x0, y0, x1, y1).to_polygon(1)
}

pub fn poly(pts: &[(i64, i64)]) -> LayoutPolygon {
    LayoutPolygon::new(pts.iter().map(|&(x, y)| Point::new(x, y)).collect(), 1)
}

/// Union of a few random rectangles, clipped to a `size` window at the
/// origin, anchored at the interior point of a random fragment of length
/// at least 2. `None` when the union has holes or no fragment qualifies.
pub fn random_snippet(rng: &mut impl Rng, size: i64, max_rects: usize) -> Option<PatternSnippet> {
    let half = size / 2;
    let n = rng.random_range(1..=max_rects);
    let rects: Vec<Rect> = (0..n)
        .map(|_| {
            let w = rng.random_range(20..=size / 2);
            let h = rng.random_range(20..=size / 2);
            let x = rng.random_range(-half..=half - w);
            let y = rng.random_range(-half..=half - h);
            Rect::new(x, y, x + w, y + h)
        })
        .collect();
    let (polys, holes) = rects_to_polygons(&rects, 1);
    if !holes.is_empty() {
        return None;
    }
    let mut s = extract_window(&Layout::new(polys, 1), Point::new(0, 0), (size, size));
    s.id = "rand".into();
    let frags = fragment_layout(&s, 80);
    let cands: Vec<_> = frags.iter().filter(|f| f.len() >= 2).collect();
    if cands.is_empty() {
        return None;
    }
    let f = cands[rng.random_range(0..cands.len())];
    let (ux, uy) = f.dir().unit();
    let m = f.len() / 2;
    s.anchor = Some(Point::new(f.a.x + ux * m, f.a.y + uy * m));
    Some(s)
}

/// Area of a union of rectangles by coordinate-compressed scanline.
pub fn scanline_area(rects: &[Rect]) -> i128 {
    let mut xs: Vec<i64> = rects.iter().flat_map(|r| [r.x0, r.x1]).collect();
    xs.sort_unstable();
    xs.dedup();
    let mut area = 0i128;
    for w in xs.windows(2) {
        let (a, b) = (w[0], w[1]);
        let mut spans: Vec<(i64, i64)> = rects.iter().filter(|r| r.x0 <= a && r.x1 >= b).map(|r| (r.y0, r.y1)).collect();
        spans.sort_unstable();
        let mut covered = 0i64;
        let mut end = i64::MIN;
        for (y0, y1) in spans {
            let s = y0.max(end);
            if y1 > s {
                covered += y1 - s;
            }
            end = end.max(y1);
        }
        area += (b - a) as i128 * covered as i128;
    }
    area
}

/// Area enclosed by a rectilinear polygon by the shoelace formula.
pub fn shoelace(p: &LayoutPolygon) -> i128 {
    let v = &p.vertices;
    let mut s = 0i128;
    for i in 0..v.len() {
        let (a, b) = (v[i], v[(i + 1) % v.len()]);
        s += a.x as i128 * b.y as i128 - b.x as i128 * a.y as i128;
    }
    s / 2
}

/// Euclidean distance between two axis-parallel segments.
pub fn seg_dist(a0: Point, a1: Point, b0: Point, b1: Point) -> f64 {
    let pd = |p: Point, s0: Point, s1: Point| {
        let (x0, x1) = (s0.x.min(s1.x), s0.x.max(s1.x));
        let (y0, y1) = (s0.y.min(s1.y), s0.y.max(s1.y));
        let dx = (x0 - p.x).max(p.x - x1).max(0) as f64;
        let dy = (y0 - p.y).max(p.y - y1).max(0) as f64;
        dx.hypot(dy)
    };
    let crosses = {
        let (ax0, ax1) = (a0.x.min(a1.x), a0.x.max(a1.x));
        let (ay0, ay1) = (a0.y.min(a1.y), a0.y.max(a1.y));
        let (bx0, bx1) = (b0.x.min(b1.x), b0.x.max(b1.x));
        let (by0, by1) = (b0.y.min(b1.y), b0.y.max(b1.y));
        ax0 <= bx1 && bx0 <= ax1 && ay0 <= by1 && by0 <= ay1
    };
    if crosses {
        return 0.0;
    }
    pd(a0, b0, b1).min(pd(a1, b0, b1)).min(pd(b0, a0, a1)).min(pd(b1, a0, a1))
}

/// Smallest boundary-to-boundary distance between two disjoint polygons,
/// by checking every edge pair.
pub fn polygon_dist(p: &LayoutPolygon, q: &LayoutPolygon) -> f64 {
    let mut best = f64::INFINITY;
    for (a0, a1) in p.edges() {
        for (b0, b1) in q.edges() {
            best = best.min(seg_dist(a0, a1, b0, b1));
        }
    }
    best
}

/// Smallest width of a rectilinear polygon: the shortest interior segment
/// joining two opposing edges, found by testing every opposing edge pair
/// whose facing overlap lies inside the polygon.
pub fn brute_min_width(p: &LayoutPolygon) -> Option<i64> {
    let edges: Vec<(Point, Point)> = p.edges().collect();
    let mut best: Option<i64> = None;
    for (i, &(a0, a1)) in edges.iter().enumerate() {
        for &(b0, b1) in edges.iter().skip(i + 1) {
            let horiz = a0.y == a1.y;
            if horiz != (b0.y == b1.y) {
                continue;
            }
            let (lo, hi, d) = if horiz {
                let lo = a0.x.min(a1.x).max(b0.x.min(b1.x));
                let hi = a0.x.max(a1.x).min(b0.x.max(b1.x));
                (lo, hi, (a0.y - b0.y).abs())
            } else {
                let lo = a0.y.min(a1.y).max(b0.y.min(b1.y));
                let hi = a0.y.max(a1.y).min(b0.y.max(b1.y));
                (lo, hi, (a0.x - b0.x).abs())
            };
            if hi <= lo || d == 0 {
                continue;
            }
            // Probe the open overlap midway between the two edges.
            let t2 = lo + hi;
            let u2 = if horiz { a0.y + b0.y } else { a0.x + b0.x };
            let (px2, py2) = if horiz { (t2, u2) } else { (u2, t2) };
            if p.contains_doubled(px2, py2) {
                best = Some(best.map_or(d, |b| b.min(d)));
            }
        }
    }
    best
}

pub fn gaussian_kernel(x: f64, y: f64, s: f64) -> f64 {
    (-(x * x + y * y) / (2.0 * s * s)).exp() / (2.0 * std::f64::consts::PI * s * s)
}

/// Intensity at `(x, y)` of a blurred union of rectangles, by composite
/// Gauss-Legendre quadrature over each rectangle.
pub fn quadrature_intensity(rects: &[Rect], x: f64, y: f64, sigma: f64, dose: f64) -> f64 {
    const NODES: [f64; 5] = [-0.906_179_845_938_664, -0.538_469_310_105_683, 0.0, 0.538_469_310_105_683, 0.906_179_845_938_664];
    const WEIGHTS: [f64; 5] =
        [0.236_926_885_056_189, 0.478_628_670_499_366, 0.568_888_888_888_889, 0.478_628_670_499_366, 0.236_926_885_056_189];
    let panels = |a: f64, b: f64| ((b - a) / (sigma / 8.0)).ceil().max(1.0) as usize;
    let mut total = 0.0;
    for r in rects {
        let (x0, x1, y0, y1) = (r.x0 as f64, r.x1 as f64, r.y0 as f64, r.y1 as f64);
        let (nx, ny) = (panels(x0, x1), panels(y0, y1));
        let (hx, hy) = ((x1 - x0) / nx as f64, (y1 - y0) / ny as f64);
        for i in 0..nx {
            for j in 0..ny {
                let (cx, cy) = (x0 + (i as f64 + 0.5) * hx, y0 + (j as f64 + 0.5) * hy);
                for (u, wu) in NODES.iter().zip(WEIGHTS) {
                    for (v, wv) in NODES.iter().zip(WEIGHTS) {
                        let px = cx + u * hx / 2.0;
                        let py = cy + v * hy / 2.0;
                        total += wu * wv * hx * hy / 4.0 * gaussian_kernel(px - x, py - y, sigma);
                    }
                }
            }
        }
    }
    dose * total
}

/// Pearson correlation of two indicator vectors.
pub fn pearson(a: &[bool], b: &[bool]) -> f64 {
    let n = a.len() as f64;
    let fa: Vec<f64> = a.iter().map(|&v| v as u8 as f64).collect();
    let fb: Vec<f64> = b.iter().map(|&v| v as u8 as f64).collect();
    let (ma, mb) = (fa.iter().sum::<f64>() / n, fb.iter().sum::<f64>() / n);
    let cov: f64 = fa.iter().zip(&fb).map(|(x, y)| (x - ma) * (y - mb)).sum();
    let va: f64 = fa.iter().map(|x| (x - ma).powi(2)).sum();
    let vb: f64 = fb.iter().map(|y| (y - mb).powi(2)).sum();
    if va == 0.0 || vb == 0.0 {
        0.0
    } else {
        cov / (va * vb).sqrt()
    }
}

pub fn rbf_gram(x: &[Vec<f64>], gamma: f64) -> DMatrix<f64> {
    let n = x.len();
    DMatrix::from_fn(n, n, |i, j| {
        let d: f64 = x[i].iter().zip(&x[j]).map(|(a, b)| (a - b) * (a - b)).sum();
        (-gamma * d).exp()
    })
}

pub fn dual_objective(alpha: &[f64], y: &[f64], k: &DMatrix<f64>) -> f64 {
    let n = alpha.len();
    let mut quad = 0.0;
    for i in 0..n {
        for j in 0..n {
            quad += alpha[i] * alpha[j] * y[i] * y[j] * k[(i, j)];
        }
    }
    alpha.iter().sum::<f64>() - quad / 2.0
}

/// Exact maximum of the soft-margin dual by active-set enumeration: every
/// assignment of each variable to its lower bound, its upper bound or the
/// free set, with the free block solved from the KKT equations of the
/// equality-constrained face. The concave optimum is the best feasible
/// stationary point over all faces.
pub fn brute_force_dual(x: &[Vec<f64>], y: &[f64], c: &[f64], gamma: f64) -> f64 {
    let n = x.len();
    let k = rbf_gram(x, gamma);
    let q = DMatrix::from_fn(n, n, |i, j| y[i] * y[j] * k[(i, j)]);
    let mut best = f64::NEG_INFINITY;
    let states = 3usize.pow(n as u32);
    for code in 0..states {
        let mut s = code;
        let mut alpha = vec![0.0; n];
        let mut free = Vec::new();
        for i in 0..n {
            match s % 3 {
                0 => {}
                1 => alpha[i] = c[i],
                _ => free.push(i),
            }
            s /= 3;
        }
        if !free.is_empty() {
            let m = free.len();
            // [Q_FF  y_F] [a_F]   [1 - Q_FB a_B]
            // [y_F'  0  ] [nu ] = [  -y_B' a_B ]
            let mut a = DMatrix::zeros(m + 1, m + 1);
            let mut rhs = DVector::zeros(m + 1);
            for (r, &i) in free.iter().enumerate() {
                for (cc, &j) in free.iter().enumerate() {
                    a[(r, cc)] = q[(i, j)];
                }
                a[(r, m)] = y[i];
                a[(m, r)] = y[i];
                let fixed: f64 = (0..n).filter(|j| !free.contains(j)).map(|j| q[(i, j)] * alpha[j]).sum();
                rhs[r] = 1.0 - fixed;
            }
            rhs[m] = -(0..n).filter(|j| !free.contains(j)).map(|j| y[j] * alpha[j]).sum::<f64>();
            let Ok(sol) = a.clone().svd(true, true).solve(&rhs, 1e-12) else { continue };
            if (&a * &sol - &rhs).norm() > 1e-8 {
                continue;
            }
            for (r, &i) in free.iter().enumerate() {
                alpha[i] = sol[r];
            }
        }
        let feasible = alpha.iter().zip(c).all(|(&a, &ci)| a >= -1e-12 && a <= ci + 1e-12)
            && alpha.iter().zip(y).map(|(a, y)| a * y).sum::<f64>().abs() < 1e-9;
        if feasible {
            best = best.max(dual_objective(&alpha, y, &k));
        }
    }
    best
}
