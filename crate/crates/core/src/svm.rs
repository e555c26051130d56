//! Class-weighted RBF soft-margin SVM trained with SMO, plus grid search.
//!
//! The solver follows the LIBSVM recipe: second-order working-set
//! selection, stopping when the maximal KKT violation `m(a) - M(a)` drops to
//! `tol`, bias from the average over free support vectors. No shrinking, so
//! the iterate sequence depends only on data order.

use std::collections::HashMap;

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::metrics::ConfusionCounts;
use crate::rng::substream;

pub const SVM_FORMAT_VERSION: u32 = 1;
const TAU: f64 = 1e-12;

/// Balanced class weights `total / (n_classes * count_i)`.
pub fn class_weights(counts: &[usize]) -> Result<Vec<f64>> {
    if let Some(i) = counts.iter().position(|&c| c == 0) {
        return Err(Error::EmptyClass(i));
    }
    let total: usize = counts.iter().sum();
    let k = counts.len() as f64;
    Ok(counts.iter().map(|&c| total as f64 / (k * c as f64)).collect())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SvmParams {
    pub c: f64,
    pub gamma: f64,
    /// Multipliers on the balanced class weights.
    pub bias_ht: f64,
    pub bias_nht: f64,
    /// Apply balanced class weights; otherwise both classes use `C`.
    pub balanced: bool,
    pub tol: f64,
    /// Defaults to `max(10^7, 100 n)`.
    pub max_iter: Option<usize>,
    pub cache_mb: usize,
}

impl Default for SvmParams {
    fn default() -> Self {
        SvmParams { c: 1.0, gamma: 1.0, bias_ht: 1.0, bias_nht: 1.0, balanced: true, tol: 1e-3, max_iter: None, cache_mb: 256 }
    }
}

impl SvmParams {
    pub fn validate(&self) -> Result<()> {
        let pos = [self.c, self.gamma, self.bias_ht, self.bias_nht, self.tol];
        if pos.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(Error::Config("svm C, gamma, biases and tol must be positive".into()));
        }
        Ok(())
    }

    /// Box constraints `(C_ht, C_nht)` for the given class counts.
    pub fn box_constraints(&self, n_ht: usize, n_nht: usize) -> Result<(f64, f64)> {
        let (w_ht, w_nht) = if self.balanced {
            let w = class_weights(&[n_ht, n_nht])?;
            (w[0], w[1])
        } else {
            if n_ht == 0 {
                return Err(Error::EmptyClass(0));
            }
            if n_nht == 0 {
                return Err(Error::EmptyClass(1));
            }
            (1.0, 1.0)
        };
        Ok((self.c * w_ht * self.bias_ht, self.c * w_nht * self.bias_nht))
    }
}

pub fn rbf(a: &[f64], b: &[f64], gamma: f64) -> f64 {
    (-gamma * sq_dist(a, b)).exp()
}

/// Squared Euclidean distance with eight independent accumulators.
fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = [0.0f64; 8];
    let (ca, cb) = (a.chunks_exact(8), b.chunks_exact(8));
    let tail: f64 = ca.remainder().iter().zip(cb.remainder()).map(|(x, y)| (x - y) * (x - y)).sum();
    for (xa, xb) in ca.zip(cb) {
        for l in 0..8 {
            let d = xa[l] - xb[l];
            acc[l] += d * d;
        }
    }
    acc.iter().sum::<f64>() + tail
}

struct KernelCache<'a> {
    x: &'a Matrix,
    gamma: f64,
    rows: HashMap<usize, (Vec<f32>, u64)>,
    capacity: usize,
    clock: u64,
}

impl<'a> KernelCache<'a> {
    fn new(x: &'a Matrix, gamma: f64, cache_mb: usize) -> Self {
        let row_bytes = (x.rows * 4).max(1);
        let capacity = (cache_mb * (1 << 20) / row_bytes).max(2);
        KernelCache { x, gamma, rows: HashMap::new(), capacity, clock: 0 }
    }

    fn row(&mut self, i: usize) -> &[f32] {
        self.clock += 1;
        let clock = self.clock;
        if !self.rows.contains_key(&i) {
            if self.rows.len() >= self.capacity {
                let victim = self.rows.iter().min_by_key(|(_, (_, t))| *t).map(|(&k, _)| k).unwrap();
                self.rows.remove(&victim);
            }
            let xi = self.x.row(i);
            let (x, gamma) = (self.x, self.gamma);
            let row: Vec<f32> = (0..x.rows).into_par_iter().map(|j| rbf(xi, x.row(j), gamma) as f32).collect();
            self.rows.insert(i, (row, clock));
        }
        let e = self.rows.get_mut(&i).unwrap();
        e.1 = clock;
        &e.0
    }
}

/// Raw dual solution for labels `y` in {+1, -1} and per-sample bounds `c`.
#[derive(Clone, Debug)]
pub struct DualSolution {
    pub alpha: Vec<f64>,
    pub rho: f64,
    /// Dual objective `sum(a) - a'Qa/2` (to be maximized).
    pub objective: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// SMO on `max sum(a) - a'Qa/2, 0 <= a_i <= c_i, y'a = 0`.
pub fn solve_dual(x: &Matrix, y: &[f64], c: &[f64], gamma: f64, tol: f64, max_iter: usize, cache_mb: usize) -> DualSolution {
    let n = x.rows;
    let mut alpha = vec![0.0f64; n];
    let mut grad = vec![-1.0f64; n];
    let mut cache = KernelCache::new(x, gamma, cache_mb);
    let qd = vec![1.0f64; n];
    let upper = |a: &[f64], t: usize| a[t] >= c[t];
    let lower = |a: &[f64], t: usize| a[t] <= 0.0;
    let mut iter = 0;
    let mut converged = false;
    while iter < max_iter {
        let mut gmax = f64::NEG_INFINITY;
        let mut gmax2 = f64::NEG_INFINITY;
        let mut i_sel = usize::MAX;
        for t in 0..n {
            if y[t] > 0.0 {
                if !upper(&alpha, t) && -grad[t] >= gmax {
                    gmax = -grad[t];
                    i_sel = t;
                }
            } else if !lower(&alpha, t) && grad[t] >= gmax {
                gmax = grad[t];
                i_sel = t;
            }
        }
        let mut j_sel = usize::MAX;
        if i_sel != usize::MAX {
            let ki = cache.row(i_sel);
            let yi = y[i_sel];
            let mut best = f64::INFINITY;
            for t in 0..n {
                let qit = yi * y[t] * ki[t] as f64;
                if y[t] > 0.0 {
                    if !lower(&alpha, t) {
                        let diff = gmax + grad[t];
                        if grad[t] >= gmax2 {
                            gmax2 = grad[t];
                        }
                        if diff > 0.0 {
                            let quad = qd[i_sel] + qd[t] - 2.0 * yi * qit;
                            let obj = -diff * diff / if quad > 0.0 { quad } else { TAU };
                            if obj <= best {
                                best = obj;
                                j_sel = t;
                            }
                        }
                    }
                } else if !upper(&alpha, t) {
                    let diff = gmax - grad[t];
                    if -grad[t] >= gmax2 {
                        gmax2 = -grad[t];
                    }
                    if diff > 0.0 {
                        let quad = qd[i_sel] + qd[t] + 2.0 * yi * qit;
                        let obj = -diff * diff / if quad > 0.0 { quad } else { TAU };
                        if obj <= best {
                            best = obj;
                            j_sel = t;
                        }
                    }
                }
            }
        }
        if gmax + gmax2 < tol || j_sel == usize::MAX {
            converged = true;
            break;
        }
        iter += 1;
        let (i, j) = (i_sel, j_sel);
        let ki: Vec<f32> = cache.row(i).to_vec();
        let kj: Vec<f32> = cache.row(j).to_vec();
        let (ci, cj) = (c[i], c[j]);
        let (oi, oj) = (alpha[i], alpha[j]);
        let qij = y[i] * y[j] * ki[j] as f64;
        if y[i] != y[j] {
            let quad = (qd[i] + qd[j] + 2.0 * qij).max(TAU);
            let delta = (-grad[i] - grad[j]) / quad;
            let diff = alpha[i] - alpha[j];
            alpha[i] += delta;
            alpha[j] += delta;
            if diff > 0.0 {
                if alpha[j] < 0.0 {
                    alpha[j] = 0.0;
                    alpha[i] = diff;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = -diff;
            }
            if diff > ci - cj {
                if alpha[i] > ci {
                    alpha[i] = ci;
                    alpha[j] = ci - diff;
                }
            } else if alpha[j] > cj {
                alpha[j] = cj;
                alpha[i] = cj + diff;
            }
        } else {
            let quad = (qd[i] + qd[j] - 2.0 * qij).max(TAU);
            let delta = (grad[i] - grad[j]) / quad;
            let sum = alpha[i] + alpha[j];
            alpha[i] -= delta;
            alpha[j] += delta;
            if sum > ci {
                if alpha[i] > ci {
                    alpha[i] = ci;
                    alpha[j] = sum - ci;
                }
            } else if alpha[j] < 0.0 {
                alpha[j] = 0.0;
                alpha[i] = sum;
            }
            if sum > cj {
                if alpha[j] > cj {
                    alpha[j] = cj;
                    alpha[i] = sum - cj;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = sum;
            }
        }
        let (dai, daj) = (alpha[i] - oi, alpha[j] - oj);
        for t in 0..n {
            grad[t] += y[t] * (y[i] * ki[t] as f64 * dai + y[j] * kj[t] as f64 * daj);
        }
    }
    let mut ub = f64::INFINITY;
    let mut lb = f64::NEG_INFINITY;
    let mut nfree = 0usize;
    let mut sum_free = 0.0;
    for t in 0..n {
        let yg = y[t] * grad[t];
        if upper(&alpha, t) {
            if y[t] < 0.0 {
                ub = ub.min(yg)
            } else {
                lb = lb.max(yg)
            }
        } else if lower(&alpha, t) {
            if y[t] > 0.0 {
                ub = ub.min(yg)
            } else {
                lb = lb.max(yg)
            }
        } else {
            nfree += 1;
            sum_free += yg;
        }
    }
    let rho = if nfree > 0 { sum_free / nfree as f64 } else { (ub + lb) / 2.0 };
    let objective = -alpha.iter().zip(&grad).map(|(a, g)| a * (g - 1.0)).sum::<f64>() / 2.0;
    DualSolution { alpha, rho, objective, iterations: iter, converged }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SvmModel {
    pub version: u32,
    pub params: SvmParams,
    /// Effective box constraints `(C_ht, C_nht)`.
    pub box_c: (f64, f64),
    pub support_vectors: Matrix,
    /// `y_i * alpha_i` per support vector (hotspot = +1).
    pub coef: Vec<f64>,
    /// Decision value is `sum coef_i k(sv_i, x) - rho`.
    pub rho: f64,
    /// Hotspot iff decision value > threshold.
    pub threshold: f64,
    pub objective: f64,
    pub iterations: usize,
    pub converged: bool,
    pub schema_id: Option<String>,
    pub pca_ref: Option<String>,
}

/// Labels: `true` = hotspot (+1).
pub fn train_svm(x: &Matrix, labels: &[bool], params: &SvmParams) -> Result<SvmModel> {
    params.validate()?;
    if labels.len() != x.rows {
        return Err(Error::DimensionMismatch { expected: x.rows, got: labels.len() });
    }
    if x.data.iter().any(|v| !v.is_finite()) {
        return Err(Error::DegenerateInput("non-finite feature".into()));
    }
    let n_ht = labels.iter().filter(|&&l| l).count();
    let (c_ht, c_nht) = params.box_constraints(n_ht, labels.len() - n_ht)?;
    let y: Vec<f64> = labels.iter().map(|&l| if l { 1.0 } else { -1.0 }).collect();
    let c: Vec<f64> = labels.iter().map(|&l| if l { c_ht } else { c_nht }).collect();
    let max_iter = params.max_iter.unwrap_or((100 * x.rows).max(10_000_000));
    let sol = solve_dual(x, &y, &c, params.gamma, params.tol, max_iter, params.cache_mb);
    let sv: Vec<usize> = (0..x.rows).filter(|&i| sol.alpha[i] > 0.0).collect();
    Ok(SvmModel {
        version: SVM_FORMAT_VERSION,
        params: params.clone(),
        box_c: (c_ht, c_nht),
        support_vectors: x.select_rows(&sv),
        coef: sv.iter().map(|&i| y[i] * sol.alpha[i]).collect(),
        rho: sol.rho,
        threshold: 0.0,
        objective: sol.objective,
        iterations: sol.iterations,
        converged: sol.converged,
        schema_id: None,
        pca_ref: None,
    })
}

impl SvmModel {
    pub fn dim(&self) -> usize {
        self.support_vectors.cols
    }

    pub fn decision_row(&self, r: &[f64]) -> f64 {
        let g = self.params.gamma;
        self.support_vectors.iter_rows().zip(&self.coef).map(|(s, c)| c * rbf(s, r, g)).sum::<f64>() - self.rho
    }

    pub fn decision_values(&self, x: &Matrix) -> Result<Vec<f64>> {
        if x.rows > 0 && x.cols != self.dim() && !self.coef.is_empty() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: x.cols });
        }
        Ok((0..x.rows).into_par_iter().map(|i| self.decision_row(x.row(i))).collect())
    }

    pub fn predict(&self, x: &Matrix) -> Result<(Vec<bool>, Vec<f64>)> {
        let d = self.decision_values(x)?;
        Ok((d.iter().map(|&v| v > self.threshold).collect(), d))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("svm model serializes")
    }

    pub fn from_json(text: &str) -> Result<SvmModel> {
        let m: SvmModel = serde_json::from_str(text)?;
        if m.version != SVM_FORMAT_VERSION {
            return Err(Error::Parse(format!("unsupported svm model version {}", m.version)));
        }
        Ok(m)
    }
}

/// Mean per-column variance summed over columns; `gamma_scale / ref` is the
/// absolute gamma used by grid search. Invariant under orthonormal maps.
pub fn gamma_reference(x: &Matrix) -> f64 {
    if x.rows < 2 {
        return 1.0;
    }
    let n = x.rows as f64;
    let mut total = 0.0;
    for c in 0..x.cols {
        let mean = x.iter_rows().map(|r| r[c]).sum::<f64>() / n;
        total += x.iter_rows().map(|r| (r[c] - mean) * (r[c] - mean)).sum::<f64>() / (n - 1.0);
    }
    if total > 0.0 {
        total
    } else {
        1.0
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GridSpec {
    pub c: Vec<f64>,
    /// Gamma candidates as multiples of `1 / gamma_reference(x)`.
    pub gamma_scale: Vec<f64>,
    pub bias_ht: Vec<f64>,
    pub bias_nht: Vec<f64>,
    pub folds: usize,
    pub seed: u64,
    /// Target HT hit rate for operating-point selection.
    pub target_hit_rate: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            c: vec![1.0, 10.0, 100.0],
            gamma_scale: vec![0.5, 1.0, 2.0],
            bias_ht: vec![1.0],
            bias_nht: vec![1.0],
            folds: 3,
            seed: 7,
            target_hit_rate: 0.95,
        }
    }
}

impl GridSpec {
    pub fn validate(&self) -> Result<()> {
        if self.folds < 2 {
            return Err(Error::Config("grid search needs at least 2 folds".into()));
        }
        if self.c.is_empty() || self.gamma_scale.is_empty() || self.bias_ht.is_empty() || self.bias_nht.is_empty() {
            return Err(Error::Config("empty svm grid".into()));
        }
        Ok(())
    }

    /// `(gamma_scale, params)` for every grid point.
    pub fn points(&self, base: &SvmParams, gamma_ref: f64) -> Vec<(f64, SvmParams)> {
        let mut out = Vec::new();
        for &c in &self.c {
            for &g in &self.gamma_scale {
                for &bh in &self.bias_ht {
                    for &bn in &self.bias_nht {
                        out.push((g, SvmParams { c, gamma: g / gamma_ref, bias_ht: bh, bias_nht: bn, ..base.clone() }));
                    }
                }
            }
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridPoint {
    pub params: SvmParams,
    /// Gamma relative to `gamma_reference` of the searched data.
    pub gamma_scale: f64,
    pub ht_hit_rate: f64,
    pub fp_rate: f64,
    /// Standard deviation of the per-fold HT hit rate.
    pub fold_stddev: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridResult {
    pub points: Vec<GridPoint>,
    /// Indices into `points`, nondominated, ascending FP rate.
    pub pareto: Vec<usize>,
}

impl GridResult {
    pub const CSV_HEADER: [&'static str; 7] = ["C", "gamma", "bias_ht", "bias_nht", "ht_hit_rate", "fp_rate", "fold_stddev"];

    /// Pareto point whose HT hit rate is closest to `target`; lower FP on ties.
    pub fn operating_point(&self, target: f64) -> &GridPoint {
        let best = self
            .pareto
            .iter()
            .min_by(|&&a, &&b| {
                let (pa, pb) = (&self.points[a], &self.points[b]);
                (pa.ht_hit_rate - target).abs().total_cmp(&(pb.ht_hit_rate - target).abs()).then(pa.fp_rate.total_cmp(&pb.fp_rate))
            })
            .expect("grid result is nonempty");
        &self.points[*best]
    }
}

/// Points not dominated in (max hit rate, min FP rate), sorted by FP rate
/// then descending hit rate. Exact duplicates keep the lowest index.
pub fn pareto_front(points: &[GridPoint]) -> Vec<usize> {
    let mut front: Vec<usize> = (0..points.len())
        .filter(|&i| {
            let p = &points[i];
            !points.iter().enumerate().any(|(j, q)| {
                let dominates =
                    q.ht_hit_rate >= p.ht_hit_rate && q.fp_rate <= p.fp_rate && (q.ht_hit_rate > p.ht_hit_rate || q.fp_rate < p.fp_rate);
                let dup = j < i && q.ht_hit_rate == p.ht_hit_rate && q.fp_rate == p.fp_rate;
                dominates || dup
            })
        })
        .collect();
    front.sort_by(|&a, &b| {
        points[a].fp_rate.total_cmp(&points[b].fp_rate).then(points[b].ht_hit_rate.total_cmp(&points[a].ht_hit_rate)).then(a.cmp(&b))
    });
    front
}

/// Stratified fold index per row, shuffled within each class from `seed`.
pub fn stratified_folds(labels: &[bool], folds: usize, seed: u64) -> Vec<usize> {
    let mut out = vec![0; labels.len()];
    for (k, class) in [true, false].into_iter().enumerate() {
        let mut idx: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == class).collect();
        let mut rng = substream(seed, "folds", &k.to_string());
        idx.shuffle(&mut rng);
        for (r, i) in idx.into_iter().enumerate() {
            out[i] = r % folds;
        }
    }
    out
}

fn fold_eval(x: &Matrix, labels: &[bool], fold_of: &[usize], fold: usize, params: &SvmParams) -> Result<ConfusionCounts> {
    let train: Vec<usize> = (0..x.rows).filter(|&i| fold_of[i] != fold).collect();
    let test: Vec<usize> = (0..x.rows).filter(|&i| fold_of[i] == fold).collect();
    let ty: Vec<bool> = train.iter().map(|&i| labels[i]).collect();
    let model = train_svm(&x.select_rows(&train), &ty, params)?;
    let (pred, _) = model.predict(&x.select_rows(&test))?;
    let actual: Vec<bool> = test.iter().map(|&i| labels[i]).collect();
    Ok(ConfusionCounts::from_pairs(&actual, &pred))
}

/// Stratified k-fold cross validation over every grid point. Gamma values
/// are scaled by `gamma_reference(x)` of the full input.
pub fn grid_search(x: &Matrix, labels: &[bool], base: &SvmParams, grid: &GridSpec) -> Result<GridResult> {
    grid.validate()?;
    let fold_of = stratified_folds(labels, grid.folds, grid.seed);
    let params = grid.points(base, gamma_reference(x));
    let jobs: Vec<(usize, usize)> = (0..params.len()).flat_map(|p| (0..grid.folds).map(move |f| (p, f))).collect();
    let counts: Vec<ConfusionCounts> =
        jobs.par_iter().map(|&(p, f)| fold_eval(x, labels, &fold_of, f, &params[p].1)).collect::<Result<_>>()?;
    let points: Vec<GridPoint> = params
        .into_iter()
        .enumerate()
        .map(|(p, (gamma_scale, params))| {
            let per = &counts[p * grid.folds..(p + 1) * grid.folds];
            let hits: Vec<f64> = per.iter().map(|c| c.tp as f64 / (c.tp + c.fn_).max(1) as f64).collect();
            let fps: Vec<f64> = per.iter().map(|c| c.fp as f64 / c.total().max(1) as f64).collect();
            let k = grid.folds as f64;
            let mean_hit = hits.iter().sum::<f64>() / k;
            let var = hits.iter().map(|h| (h - mean_hit) * (h - mean_hit)).sum::<f64>() / k;
            GridPoint { params, gamma_scale, ht_hit_rate: mean_hit, fp_rate: fps.iter().sum::<f64>() / k, fold_stddev: var.sqrt() }
        })
        .collect();
    let pareto = pareto_front(&points);
    Ok(GridResult { points, pareto })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eq3_weights() {
        assert_eq!(class_weights(&[500, 500]).unwrap(), vec![1.0, 1.0]);
        assert_eq!(class_weights(&[10, 10, 10]).unwrap(), vec![1.0, 1.0, 1.0]);
        let w = class_weights(&[1932, 98068]).unwrap();
        assert!((w[0] - 25.87992).abs() < 1e-5);
        assert!((w[1] - 0.50985).abs() < 1e-5);
        assert!(matches!(class_weights(&[0, 3]), Err(Error::EmptyClass(0))));
    }

    #[test]
    fn symmetric_two_points() {
        let x = Matrix::from_rows(&[vec![0.0, 0.0], vec![2.0, 0.0]]).unwrap();
        let p = SvmParams { c: 10.0, gamma: 0.5, ..Default::default() };
        let m = train_svm(&x, &[true, false], &p).unwrap();
        assert!(m.decision_row(&[1.0, 0.3]).abs() < 1e-9);
        assert!(m.decision_row(&[0.0, 0.0]) > 0.0);
    }

    #[test]
    fn separable_blobs() {
        let mut rows = Vec::new();
        let mut labels = Vec::new();
        for i in 0..20 {
            let t = i as f64 * 0.1;
            rows.push(vec![t.sin(), t.cos()]);
            labels.push(true);
            rows.push(vec![5.0 + t.cos(), 5.0 + t.sin()]);
            labels.push(false);
        }
        let x = Matrix::from_rows(&rows).unwrap();
        let m = train_svm(&x, &labels, &SvmParams { c: 100.0, gamma: 0.5, ..Default::default() }).unwrap();
        assert!(m.converged);
        assert_eq!(m.predict(&x).unwrap().0, labels);
        let s: f64 = m.coef.iter().sum();
        assert!(s.abs() < 1e-6);
    }

    #[test]
    fn pareto_sorted_nondominated() {
        let pt = |h, f| GridPoint { params: SvmParams::default(), gamma_scale: 1.0, ht_hit_rate: h, fp_rate: f, fold_stddev: 0.0 };
        let pts = vec![pt(0.9, 0.3), pt(0.8, 0.1), pt(0.85, 0.35), pt(0.95, 0.5), pt(0.8, 0.1)];
        assert_eq!(pareto_front(&pts), vec![1, 0, 3]);
        let r = GridResult { pareto: pareto_front(&pts), points: pts };
        assert_eq!(r.operating_point(0.93).ht_hit_rate, 0.95);
    }

    #[test]
    fn folds_are_stratified() {
        let labels: Vec<bool> = (0..30).map(|i| i % 3 == 0).collect();
        let f = stratified_folds(&labels, 3, 1);
        for k in 0..3 {
            assert_eq!((0..30).filter(|&i| f[i] == k && labels[i]).count(), 10 / 3 + usize::from(k < 10 % 3));
        }
    }
}
