//! k-means partitioning and the per-cluster SVM ensemble.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::rng::substream;
use crate::svm::{train_svm, SvmModel, SvmParams};

fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Index of the nearest centroid; ties go to the lowest index.
pub fn nearest(centroids: &Matrix, r: &[f64]) -> usize {
    let mut best = 0;
    let mut bd = f64::INFINITY;
    for (i, c) in centroids.iter_rows().enumerate() {
        let d = dist2(c, r);
        if d < bd {
            bd = d;
            best = i;
        }
    }
    best
}

#[derive(Clone, Debug)]
pub struct KMeans {
    pub centroids: Matrix,
    pub assignment: Vec<usize>,
    /// Sum of squared distances after each assignment step.
    pub objective: Vec<f64>,
}

/// k-means++ seeding then Lloyd iterations until assignments settle or
/// `max_iter` is reached. Empty clusters take the point farthest from its
/// centroid in the currently largest cluster.
pub fn kmeans(x: &Matrix, k: usize, seed: u64, max_iter: usize) -> Result<KMeans> {
    if k == 0 {
        return Err(Error::Config("k must be at least 1".into()));
    }
    if x.rows < k {
        return Err(Error::DegenerateInput(format!("{} rows for {k} clusters", x.rows)));
    }
    let mut rng = substream(seed, "kmeans", &k.to_string());
    let mut chosen = vec![rng.random_range(0..x.rows)];
    let mut d: Vec<f64> = x.iter_rows().map(|r| dist2(r, x.row(chosen[0]))).collect();
    while chosen.len() < k {
        let total: f64 = d.iter().sum();
        let next = if total > 0.0 {
            let mut u = rng.random::<f64>() * total;
            let mut pick = x.rows - 1;
            for (i, di) in d.iter().enumerate() {
                if *di > 0.0 && u < *di {
                    pick = i;
                    break;
                }
                u -= di;
            }
            pick
        } else {
            (0..x.rows).find(|i| !chosen.contains(i)).unwrap()
        };
        chosen.push(next);
        for (i, di) in d.iter_mut().enumerate() {
            *di = di.min(dist2(x.row(i), x.row(next)));
        }
    }
    let mut centroids = x.select_rows(&chosen);
    let mut assignment = vec![usize::MAX; x.rows];
    let mut objective = Vec::new();
    for _ in 0..max_iter.max(1) {
        let new: Vec<usize> = x.iter_rows().map(|r| nearest(&centroids, r)).collect();
        objective.push(x.iter_rows().zip(&new).map(|(r, &c)| dist2(r, centroids.row(c))).sum());
        let changed = new != assignment;
        assignment = new;
        if !changed {
            break;
        }
        update_centroids(x, k, &mut assignment, &mut centroids);
    }
    Ok(KMeans { centroids, assignment, objective })
}

fn update_centroids(x: &Matrix, k: usize, assignment: &mut [usize], centroids: &mut Matrix) {
    loop {
        let mut sizes = vec![0usize; k];
        assignment.iter().for_each(|&a| sizes[a] += 1);
        let Some(empty) = sizes.iter().position(|&s| s == 0) else { break };
        let largest = (0..k).max_by(|&a, &b| sizes[a].cmp(&sizes[b]).then(b.cmp(&a))).unwrap();
        let far = (0..x.rows)
            .filter(|&i| assignment[i] == largest)
            .max_by(|&a, &b| dist2(x.row(a), centroids.row(largest)).total_cmp(&dist2(x.row(b), centroids.row(largest))).then(b.cmp(&a)))
            .unwrap();
        assignment[far] = empty;
        centroids.row_mut(empty).copy_from_slice(x.row(far));
    }
    let mut sums = Matrix::zeros(k, x.cols);
    let mut sizes = vec![0usize; k];
    for (r, &a) in x.iter_rows().zip(assignment.iter()) {
        sizes[a] += 1;
        sums.row_mut(a).iter_mut().zip(r).for_each(|(s, v)| *s += v);
    }
    for c in 0..k {
        let n = sizes[c] as f64;
        centroids.row_mut(c).iter_mut().zip(sums.row(c)).for_each(|(m, s)| *m = s / n);
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum ClusterModel {
    Svm(SvmModel),
    /// Single-class cluster: every routed row gets this label.
    Constant(bool),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClusteredModel {
    pub centroids: Matrix,
    pub models: Vec<ClusterModel>,
    /// Hotspot iff routed decision value > threshold.
    pub threshold: f64,
}

/// One SVM per k-means cluster, each with its own class weights.
pub fn train_clustered(x: &Matrix, labels: &[bool], k: usize, params: &SvmParams, seed: u64) -> Result<ClusteredModel> {
    let km = kmeans(x, k, seed, 100)?;
    let mut models = Vec::with_capacity(k);
    for c in 0..k {
        let idx: Vec<usize> = (0..x.rows).filter(|&i| km.assignment[i] == c).collect();
        let ly: Vec<bool> = idx.iter().map(|&i| labels[i]).collect();
        let n_ht = ly.iter().filter(|&&l| l).count();
        models.push(if n_ht == 0 || n_ht == ly.len() {
            ClusterModel::Constant(n_ht > 0)
        } else {
            ClusterModel::Svm(train_svm(&x.select_rows(&idx), &ly, params)?)
        });
    }
    Ok(ClusteredModel { centroids: km.centroids, models, threshold: 0.0 })
}

impl ClusteredModel {
    pub fn decision_values(&self, x: &Matrix) -> Result<Vec<f64>> {
        if x.rows > 0 && x.cols != self.centroids.cols {
            return Err(Error::DimensionMismatch { expected: self.centroids.cols, got: x.cols });
        }
        Ok(x.iter_rows()
            .map(|r| match &self.models[nearest(&self.centroids, r)] {
                ClusterModel::Svm(m) => m.decision_row(r),
                ClusterModel::Constant(l) => {
                    if *l {
                        1.0
                    } else {
                        -1.0
                    }
                }
            })
            .collect())
    }

    pub fn predict(&self, x: &Matrix) -> Result<(Vec<bool>, Vec<f64>)> {
        let d = self.decision_values(x)?;
        Ok((d.iter().map(|&v| v > self.threshold).collect(), d))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn blobs() -> Matrix {
        let mut rows = Vec::new();
        for i in 0..15 {
            let t = i as f64;
            rows.push(vec![(t * 0.7).sin(), (t * 1.3).cos()]);
            rows.push(vec![100.0 + (t * 0.9).cos(), 50.0 + (t * 0.4).sin()]);
        }
        Matrix::from_rows(&rows).unwrap()
    }

    #[test]
    fn separated_blobs_split() {
        let x = blobs();
        let km = kmeans(&x, 2, 3, 50).unwrap();
        for c in km.centroids.iter_rows() {
            assert!(c[0] < 2.0 || c[0] > 98.0);
        }
        assert_ne!(km.centroids.row(0)[0] > 50.0, km.centroids.row(1)[0] > 50.0);
        assert!(km.objective.windows(2).all(|w| w[1] <= w[0] + 1e-9));
    }

    #[test]
    fn every_cluster_nonempty() {
        let x = blobs();
        let km = kmeans(&x, 7, 1, 50).unwrap();
        for c in 0..7 {
            assert!(km.assignment.contains(&c));
        }
    }
}
