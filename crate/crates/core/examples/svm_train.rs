//! Class-weighted RBF SVM: grid search with stratified folds, then a final
//! model at the operating point closest to the target hit rate.

use hotspot::matrix::Matrix;
use hotspot::metrics::{compute_metrics, ConfusionCounts};
use hotspot::svm::{class_weights, grid_search, train_svm, GridSpec, SvmParams};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    for i in 0..400 {
        let ht = i % 10 == 0;
        let r: f64 = if ht { rng.random_range(0.0..1.0) } else { rng.random_range(0.8..2.5) };
        let t: f64 = rng.random_range(0.0..std::f64::consts::TAU);
        rows.push(vec![r * t.cos(), r * t.sin()]);
        labels.push(ht);
    }
    let x = Matrix::from_rows(&rows).unwrap();
    let n_ht = labels.iter().filter(|&&l| l).count();
    println!("{n_ht} hotspots of {}; class weights {:?}", labels.len(), class_weights(&[n_ht, labels.len() - n_ht]).unwrap());

    let grid = GridSpec::default();
    let result = grid_search(&x, &labels, &SvmParams::default(), &grid).unwrap();
    for &i in &result.pareto {
        let p = &result.points[i];
        println!("  pareto C {:>6} gamma x{:<4} hit {:.3} fp {:.4}", p.params.c, p.gamma_scale, p.ht_hit_rate, p.fp_rate);
    }
    let op = result.operating_point(grid.target_hit_rate);
    let model = train_svm(&x, &labels, &op.params).unwrap();
    let (pred, _) = model.predict(&x).unwrap();
    let m = compute_metrics(ConfusionCounts::from_pairs(&labels, &pred));
    println!("{} support vectors, converged {}; training hit {:.3}, fp {:.4}", model.coef.len(), model.converged, m.ht_hit_rate, m.fp_rate);
}
