mod common;

use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::Rng;

use hotspot::cluster::{kmeans, train_clustered};
use hotspot::matrix::Matrix;
use hotspot::metrics::{compute_metrics, mcc, ConfusionCounts};
use hotspot::pca::{fit_pca, fit_pca_count, ComponentCount, PcaModel, Standardizer};
use hotspot::svm::{class_weights, grid_search, solve_dual, train_svm, GridSpec, SvmModel, SvmParams};

fn random_matrix(rng: &mut impl Rng, rows: usize, cols: usize) -> Matrix {
    Matrix::new(rows, cols, (0..rows * cols).map(|_| rng.random_range(-3.0..3.0)).collect()).unwrap()
}

/// Low-rank data plus a little noise so that a few components dominate.
fn structured(rng: &mut impl Rng, rows: usize, cols: usize, rank: usize) -> Matrix {
    let basis = random_matrix(rng, rank, cols);
    let mut data = Vec::with_capacity(rows * cols);
    for _ in 0..rows {
        let w: Vec<f64> = (0..rank).map(|_| rng.random_range(-2.0..2.0)).collect();
        for j in 0..cols {
            let v: f64 = (0..rank).map(|r| w[r] * basis.row(r)[j]).sum();
            data.push(v + rng.random_range(-0.01..0.01));
        }
    }
    Matrix::new(rows, cols, data).unwrap()
}

/// Two Gaussian blobs labeled by blob, with some overlap.
fn blobs(rng: &mut impl Rng, n: usize) -> (Matrix, Vec<bool>) {
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    for i in 0..n {
        let ht = i % 4 == 0;
        let c = if ht { 1.2 } else { -0.4 };
        rows.push(vec![c + rng.random_range(-1.0..1.0), c + rng.random_range(-1.0..1.0)]);
        labels.push(ht);
    }
    (Matrix::from_rows(&rows).unwrap(), labels)
}

fn max_abs_diff(a: &Matrix, b: &Matrix) -> f64 {
    a.data.iter().zip(&b.data).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

#[test]
fn full_rank_pca_reconstructs_exactly() {
    let mut rng = common::rng(50);
    let x = random_matrix(&mut rng, 50, 10);
    let m = fit_pca_count(&x, ComponentCount::Full).unwrap();
    assert_eq!(m.k, 10);
    let back = m.reconstruct(&m.transform(&x).unwrap()).unwrap();
    assert!(max_abs_diff(&x, &back) < 1e-10);
}

#[test]
fn explained_variance_matches_projected_variance() {
    let mut rng = common::rng(51);
    let x = structured(&mut rng, 80, 12, 3);
    let m = fit_pca(&x, 5).unwrap();
    let z = m.transform(&x).unwrap();
    for c in 0..m.k {
        let col: Vec<f64> = z.iter_rows().map(|r| r[c]).collect();
        let mean = col.iter().sum::<f64>() / col.len() as f64;
        let var = col.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (col.len() - 1) as f64;
        assert!((var - m.explained_variance[c]).abs() < 1e-9 * m.total_variance);
        assert!(mean.abs() < 1e-9);
    }
    assert!(m.explained_variance.windows(2).all(|w| w[0] >= w[1]));
    let frac: f64 = m.explained_variance[..3].iter().sum::<f64>() / m.total_variance;
    assert!(frac > 0.99);
    let k = fit_pca_count(&x, ComponentCount::VarianceFraction(0.99)).unwrap().k;
    assert!(k <= 3);
}

#[test]
fn components_are_orthonormal() {
    let mut rng = common::rng(52);
    let m = fit_pca(&random_matrix(&mut rng, 40, 8), 6).unwrap();
    for (i, a) in m.components.iter().enumerate() {
        for (j, b) in m.components.iter().enumerate() {
            let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
            assert!((dot - if i == j { 1.0 } else { 0.0 }).abs() < 1e-10);
        }
    }
}

#[test]
fn pca_rejects_degenerate_input_and_round_trips_json() {
    let same = Matrix::from_rows(&[vec![1.0, 2.0], vec![1.0, 2.0], vec![1.0, 2.0]]).unwrap();
    assert!(fit_pca(&same, 1).is_err());
    let mut rng = common::rng(53);
    let x = random_matrix(&mut rng, 6, 4);
    assert!(fit_pca(&x, 6).is_err());
    let m = fit_pca(&x, 3).unwrap();
    assert_eq!(PcaModel::from_json(&m.to_json()).unwrap(), m);
}

#[test]
fn standardizer_gives_zero_mean_unit_variance() {
    let mut rng = common::rng(54);
    let x = random_matrix(&mut rng, 30, 5);
    let z = Standardizer::fit(&x).apply(&x).unwrap();
    for c in 0..5 {
        let col: Vec<f64> = z.iter_rows().map(|r| r[c]).collect();
        let mean = col.iter().sum::<f64>() / 30.0;
        assert!(mean.abs() < 1e-12);
    }
}

#[test]
fn margin_support_vectors_sit_on_the_margin() {
    let mut rng = common::rng(60);
    let (x, labels) = blobs(&mut rng, 120);
    let params = SvmParams { c: 2.0, gamma: 0.7, tol: 1e-6, ..SvmParams::default() };
    let m = train_svm(&x, &labels, &params).unwrap();
    assert!(m.converged);
    let sum: f64 = m.coef.iter().sum();
    assert!(sum.abs() < 1e-8, "sum y_i a_i = {sum}");
    let (c_ht, c_nht) = m.box_c;
    let f = m.decision_values(&m.support_vectors).unwrap();
    let mut free = 0;
    for (coef, fv) in m.coef.iter().zip(&f) {
        let (y, a) = (coef.signum(), coef.abs());
        let cap = if y > 0.0 { c_ht } else { c_nht };
        assert!(a <= cap * (1.0 + 1e-12));
        if a < cap * (1.0 - 1e-6) {
            free += 1;
            assert!((y * fv - 1.0).abs() < 1e-3, "free SV margin {}", y * fv);
        } else {
            assert!(y * fv <= 1.0 + 1e-3);
        }
    }
    assert!(free > 0);
}

#[test]
fn dual_matches_brute_force_on_tiny_problems() {
    let mut rng = common::rng(61);
    for _ in 0..40 {
        let n = rng.random_range(2..=5);
        let x: Vec<Vec<f64>> = (0..n).map(|_| vec![rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)]).collect();
        let y: Vec<f64> = (0..n)
            .map(|i| {
                if i == 0 {
                    1.0
                } else if i == 1 {
                    -1.0
                } else if rng.random_bool(0.5) {
                    1.0
                } else {
                    -1.0
                }
            })
            .collect();
        let c: Vec<f64> = (0..n).map(|_| rng.random_range(0.1..5.0)).collect();
        let gamma = rng.random_range(0.2..2.0);
        let m = Matrix::from_rows(&x).unwrap();
        let sol = solve_dual(&m, &y, &c, gamma, 1e-8, 1_000_000, 1);
        let k: DMatrix<f64> = common::rbf_gram(&x, gamma);
        let ours = common::dual_objective(&sol.alpha, &y, &k);
        let best = common::brute_force_dual(&x, &y, &c, gamma);
        assert!((ours - best).abs() <= 1e-4 * best.abs().max(1.0), "{ours} vs {best}");
    }
}

#[test]
fn class_weights_are_balanced() {
    let w = class_weights(&[1932, 98068]).unwrap();
    assert!((w[0] - 25.879917).abs() < 1e-6);
    assert!((w[1] - 0.509850).abs() < 1e-6);
    assert!((w[0] * 1932.0 - w[1] * 98068.0).abs() < 1e-6);
    assert!(class_weights(&[0, 4]).is_err());
}

#[test]
fn svm_is_deterministic_and_serializes() {
    let mut rng = common::rng(62);
    let (x, labels) = blobs(&mut rng, 90);
    let params = SvmParams { c: 5.0, gamma: 0.5, ..SvmParams::default() };
    let a = train_svm(&x, &labels, &params).unwrap();
    let b = train_svm(&x, &labels, &params).unwrap();
    assert_eq!(a, b);
    assert_eq!(SvmModel::from_json(&a.to_json()).unwrap(), a);
}

#[test]
fn uniform_input_scaling_with_matched_gamma_keeps_predictions() {
    let mut rng = common::rng(63);
    let (x, labels) = blobs(&mut rng, 90);
    let params = SvmParams { c: 5.0, gamma: 0.5, tol: 1e-6, ..SvmParams::default() };
    let a = train_svm(&x, &labels, &params).unwrap();
    let s = 3.0;
    let xs = Matrix::new(x.rows, x.cols, x.data.iter().map(|v| v * s).collect()).unwrap();
    let b = train_svm(&xs, &labels, &SvmParams { gamma: 0.5 / (s * s), ..params.clone() }).unwrap();
    let fa = a.decision_values(&x).unwrap();
    let fb = b.decision_values(&xs).unwrap();
    assert!(fa.iter().zip(&fb).all(|(p, q)| (p - q).abs() < 1e-3));
}

#[test]
fn grid_search_reaches_the_target_hit_rate() {
    let mut rng = common::rng(64);
    let (x, labels) = blobs(&mut rng, 160);
    let grid = GridSpec { c: vec![1.0, 10.0, 100.0], gamma_scale: vec![0.5, 1.0, 2.0, 4.0], ..GridSpec::default() };
    let r = grid_search(&x, &labels, &SvmParams::default(), &grid).unwrap();
    assert_eq!(r.points.len(), 12);
    let op = r.operating_point(0.95);
    assert!(op.ht_hit_rate >= 0.85, "hit {}", op.ht_hit_rate);
    for w in r.pareto.windows(2) {
        assert!(r.points[w[0]].fp_rate <= r.points[w[1]].fp_rate);
        assert!(r.points[w[0]].ht_hit_rate < r.points[w[1]].ht_hit_rate);
    }
    assert_eq!(r, grid_search(&x, &labels, &SvmParams::default(), &grid).unwrap());
}

#[test]
fn mcc_equals_pearson_of_indicators() {
    let mut rng = common::rng(70);
    for _ in 0..200 {
        let n = rng.random_range(4..60);
        let actual: Vec<bool> = (0..n).map(|_| rng.random_bool(0.4)).collect();
        let pred: Vec<bool> = (0..n).map(|_| rng.random_bool(0.5)).collect();
        let c = ConfusionCounts::from_pairs(&actual, &pred);
        if c.tp + c.fn_ == 0 || c.tn + c.fp == 0 || c.tp + c.fp == 0 || c.tn + c.fn_ == 0 {
            continue;
        }
        assert!((mcc(&c) - common::pearson(&actual, &pred)).abs() < 1e-10);
    }
}

#[test]
fn metrics_identities_hold() {
    let c = ConfusionCounts { tp: 40, tn: 900, fp: 50, fn_: 10 };
    let m = compute_metrics(c);
    assert_eq!(m.ht_hit_rate, 0.8);
    assert!((m.fp_rate - 0.05).abs() < 1e-15);
    assert!((m.fn_rate - 0.01).abs() < 1e-15);
    assert!((m.total_error_rate - (m.fp_rate + m.fn_rate)).abs() < 1e-15);
    assert!((m.nht_hit_rate - 900.0 / 950.0).abs() < 1e-15);
    assert_eq!(m.max_delta_points(&m), 0.0);
}

#[test]
fn single_cluster_equals_single_svm() {
    let mut rng = common::rng(80);
    let (x, labels) = blobs(&mut rng, 100);
    let params = SvmParams { c: 3.0, gamma: 0.8, ..SvmParams::default() };
    let single = train_svm(&x, &labels, &params).unwrap();
    let clustered = train_clustered(&x, &labels, 1, &params, 5).unwrap();
    assert_eq!(clustered.decision_values(&x).unwrap(), single.decision_values(&x).unwrap());
}

#[test]
fn kmeans_objective_never_increases() {
    let mut rng = common::rng(81);
    let x = random_matrix(&mut rng, 200, 3);
    for k in [1, 3, 8] {
        let km = kmeans(&x, k, 9, 100).unwrap();
        assert!(km.objective.windows(2).all(|w| w[1] <= w[0] + 1e-9));
        assert!((0..k).all(|c| km.assignment.contains(&c)));
        let again = kmeans(&x, k, 9, 100).unwrap();
        assert_eq!(km.assignment, again.assignment);
    }
    assert!(kmeans(&x, 0, 1, 10).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn projection_never_expands_distances(seed in any::<u64>(), k in 1usize..6) {
        let mut rng = common::rng(seed);
        let x = random_matrix(&mut rng, 20, 6);
        let m = fit_pca(&x, k).unwrap();
        let z = m.transform(&x).unwrap();
        for i in 0..x.rows {
            for j in i + 1..x.rows {
                let dx: f64 = x.row(i).iter().zip(x.row(j)).map(|(a, b)| (a - b) * (a - b)).sum();
                let dz: f64 = z.row(i).iter().zip(z.row(j)).map(|(a, b)| (a - b) * (a - b)).sum();
                prop_assert!(dz <= dx * (1.0 + 1e-12) + 1e-12);
            }
        }
    }

    #[test]
    fn mcc_is_symmetric_and_bounded(tp in 0u64..50, tn in 0u64..50, fp in 0u64..50, fn_ in 0u64..50) {
        let a = mcc(&ConfusionCounts { tp, tn, fp, fn_ });
        let swapped = mcc(&ConfusionCounts { tp: tn, tn: tp, fp: fn_, fn_: fp });
        let transposed = mcc(&ConfusionCounts { tp, tn, fp: fn_, fn_: fp });
        prop_assert!((-1.0..=1.0).contains(&a));
        prop_assert!((a - swapped).abs() < 1e-12);
        prop_assert!((a - transposed).abs() < 1e-12);
    }
}
