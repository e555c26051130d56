//! Principal components of correlated data, chosen by explained variance.

use hotspot::matrix::Matrix;
use hotspot::pca::{fit_pca_count, ComponentCount};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let rows: Vec<Vec<f64>> = (0..300)
        .map(|_| {
            let (a, b): (f64, f64) = (rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            (0..8).map(|j| a * (j as f64) + b * (8 - j) as f64 + rng.random_range(-0.05..0.05)).collect()
        })
        .collect();
    let x = Matrix::from_rows(&rows).unwrap();
    for count in [ComponentCount::VarianceFraction(0.99), ComponentCount::Fixed(3), ComponentCount::Full] {
        let m = fit_pca_count(&x, count).unwrap();
        let kept: f64 = m.explained_variance.iter().sum::<f64>() / m.total_variance;
        let back = m.reconstruct(&m.transform(&x).unwrap()).unwrap();
        let err = x.data.iter().zip(&back.data).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        println!("{count:?}: k = {}, variance kept {kept:.5}, max reconstruction error {err:.2e}", m.k);
    }
}
