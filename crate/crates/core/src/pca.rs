//! Principal component analysis and per-column standardization.

use nalgebra::{DMatrix, SymmetricEigen};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::Matrix;

pub const PCA_FORMAT_VERSION: u32 = 1;

/// Zero-mean, unit-variance scaling fitted on training rows, followed by a
/// per-column weight. Constant columns keep a scale of 1.
///
/// A column may declare a missing-value marker: entries equal to it are left
/// out of the fit and map to `missing_value` (before weighting), so a far-off
/// sentinel does not swamp the spread of real measurements.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub mean: Vec<f64>,
    pub scale: Vec<f64>,
    pub missing: Vec<Option<f64>>,
    pub missing_value: f64,
    pub weight: Vec<f64>,
}

impl Standardizer {
    pub fn fit(x: &Matrix) -> Standardizer {
        Standardizer::fit_masked(x, &vec![None; x.cols], 0.0, &vec![1.0; x.cols])
    }

    pub fn fit_masked(x: &Matrix, missing: &[Option<f64>], missing_value: f64, weight: &[f64]) -> Standardizer {
        assert_eq!(missing.len(), x.cols);
        assert_eq!(weight.len(), x.cols);
        let present = |c: usize, v: f64| missing[c] != Some(v);
        let mut sum = vec![0.0; x.cols];
        let mut count = vec![0usize; x.cols];
        for r in x.iter_rows() {
            for (c, &v) in r.iter().enumerate() {
                if present(c, v) {
                    sum[c] += v;
                    count[c] += 1;
                }
            }
        }
        let mean: Vec<f64> = sum.iter().zip(&count).map(|(s, &n)| if n > 0 { s / n as f64 } else { 0.0 }).collect();
        let mut var = vec![0.0; x.cols];
        for r in x.iter_rows() {
            for (c, &v) in r.iter().enumerate() {
                if present(c, v) {
                    var[c] += (v - mean[c]) * (v - mean[c]);
                }
            }
        }
        let scale = var
            .iter()
            .zip(&count)
            .map(|(s, &n)| {
                let sd = if n > 1 { (s / (n - 1) as f64).sqrt() } else { 0.0 };
                if sd > 0.0 {
                    sd
                } else {
                    1.0
                }
            })
            .collect();
        Standardizer { mean, scale, missing: missing.to_vec(), missing_value, weight: weight.to_vec() }
    }

    pub fn apply(&self, x: &Matrix) -> Result<Matrix> {
        if x.cols != self.mean.len() {
            return Err(Error::DimensionMismatch { expected: self.mean.len(), got: x.cols });
        }
        let mut out = x.clone();
        for i in 0..out.rows {
            for (c, v) in out.row_mut(i).iter_mut().enumerate() {
                let z = if self.missing[c] == Some(*v) { self.missing_value } else { (*v - self.mean[c]) / self.scale[c] };
                *v = z * self.weight[c];
            }
        }
        Ok(out)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ComponentCount {
    Fixed(usize),
    /// Smallest k whose cumulative explained variance reaches the fraction.
    VarianceFraction(f64),
    /// All `min(rows - 1, cols)` components.
    Full,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PcaSpec {
    pub enabled: bool,
    pub components: ComponentCount,
}

impl Default for PcaSpec {
    fn default() -> Self {
        PcaSpec { enabled: true, components: ComponentCount::VarianceFraction(0.99) }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PcaModel {
    pub version: u32,
    pub mean: Vec<f64>,
    /// `k` orthonormal rows.
    pub components: Vec<Vec<f64>>,
    pub explained_variance: Vec<f64>,
    /// Sum of all covariance eigenvalues (the total data variance).
    pub total_variance: f64,
    pub k: usize,
}

fn distinct_rows(x: &Matrix) -> usize {
    let first = x.row(0);
    if x.iter_rows().any(|r| r != first) {
        2
    } else {
        1
    }
}

struct Eig {
    mean: Vec<f64>,
    vectors: Vec<Vec<f64>>,
    values: Vec<f64>,
    total: f64,
}

fn eigen(x: &Matrix) -> Result<Eig> {
    if x.rows < 2 || distinct_rows(x) < 2 {
        return Err(Error::DegenerateInput("need at least two distinct rows".into()));
    }
    let (n, d) = (x.rows, x.cols);
    let mut mean = vec![0.0; d];
    for r in x.iter_rows() {
        for (m, v) in mean.iter_mut().zip(r) {
            *m += v;
        }
    }
    mean.iter_mut().for_each(|m| *m /= n as f64);
    let centered = DMatrix::from_fn(n, d, |i, j| x.row(i)[j] - mean[j]);
    let cov = centered.tr_mul(&centered) / (n as f64 - 1.0);
    let total = cov.trace();
    let eig = SymmetricEigen::new(cov);
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]).then(a.cmp(&b)));
    let mut vectors = Vec::with_capacity(d);
    let mut values = Vec::with_capacity(d);
    for &c in &order {
        let mut v: Vec<f64> = eig.eigenvectors.column(c).iter().copied().collect();
        let mut big = 0;
        for (i, e) in v.iter().enumerate() {
            if e.abs() > v[big].abs() {
                big = i;
            }
        }
        if v[big] < 0.0 {
            v.iter_mut().for_each(|e| *e = -*e);
        }
        vectors.push(v);
        values.push(eig.eigenvalues[c].max(0.0));
    }
    Ok(Eig { mean, vectors, values, total })
}

/// Fits the top `k` components.
pub fn fit_pca(x: &Matrix, k: usize) -> Result<PcaModel> {
    let e = eigen(x)?;
    let max_k = (x.rows - 1).min(x.cols);
    if k > max_k {
        return Err(Error::DegenerateInput(format!("k = {k} exceeds min(rows - 1, cols) = {max_k}")));
    }
    Ok(PcaModel {
        version: PCA_FORMAT_VERSION,
        mean: e.mean,
        components: e.vectors.into_iter().take(k).collect(),
        explained_variance: e.values.into_iter().take(k).collect(),
        total_variance: e.total,
        k,
    })
}

/// Fits with the component count chosen by `count`.
pub fn fit_pca_count(x: &Matrix, count: ComponentCount) -> Result<PcaModel> {
    let e = eigen(x)?;
    let max_k = (x.rows - 1).min(x.cols);
    let k = match count {
        ComponentCount::Fixed(k) => k.min(max_k),
        ComponentCount::Full => max_k,
        ComponentCount::VarianceFraction(f) => {
            let target = f * e.values.iter().sum::<f64>();
            let mut acc = 0.0;
            let mut k = 0;
            while k < max_k && acc < target {
                acc += e.values[k];
                k += 1;
            }
            k.max(1)
        }
    };
    Ok(PcaModel {
        version: PCA_FORMAT_VERSION,
        mean: e.mean,
        components: e.vectors.into_iter().take(k).collect(),
        explained_variance: e.values.into_iter().take(k).collect(),
        total_variance: e.total,
        k,
    })
}

impl PcaModel {
    pub fn input_dim(&self) -> usize {
        self.mean.len()
    }

    /// `(row - mean) * components^T`.
    pub fn transform(&self, x: &Matrix) -> Result<Matrix> {
        if x.cols != self.input_dim() {
            return Err(Error::DimensionMismatch { expected: self.input_dim(), got: x.cols });
        }
        let k = self.k;
        let rows: Vec<Vec<f64>> = (0..x.rows)
            .into_par_iter()
            .map(|i| {
                let r = x.row(i);
                self.components.iter().map(|c| c.iter().zip(r).zip(&self.mean).map(|((c, v), m)| c * (v - m)).sum()).collect()
            })
            .collect();
        let mut data = Vec::with_capacity(x.rows * k);
        rows.into_iter().for_each(|r| data.extend(r));
        Matrix::new(x.rows, k, data)
    }

    /// Maps reduced rows back to the input space.
    pub fn reconstruct(&self, z: &Matrix) -> Result<Matrix> {
        if z.cols != self.k {
            return Err(Error::DimensionMismatch { expected: self.k, got: z.cols });
        }
        let d = self.input_dim();
        let mut out = Matrix::zeros(z.rows, d);
        for i in 0..z.rows {
            let zi = z.row(i).to_vec();
            let o = out.row_mut(i);
            o.copy_from_slice(&self.mean);
            for (c, w) in self.components.iter().zip(&zi) {
                for (v, cv) in o.iter_mut().zip(c) {
                    *v += w * cv;
                }
            }
        }
        Ok(out)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("pca model serializes")
    }

    pub fn from_json(text: &str) -> Result<PcaModel> {
        let m: PcaModel = serde_json::from_str(text)?;
        if m.version != PCA_FORMAT_VERSION {
            return Err(Error::Parse(format!("unsupported pca model version {}", m.version)));
        }
        Ok(m)
    }
}
