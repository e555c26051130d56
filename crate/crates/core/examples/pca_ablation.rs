//! Metrics with and without PCA on the enhanced training set.

use hotspot::experiment::{fit_pipeline, pca_ablation_on, prepare, RunConfig, Tuning};
use hotspot::pca::{ComponentCount, PcaSpec};

fn main() {
    let mut cfg = RunConfig::default();
    cfg.split.train_layouts = 2;
    cfg.split.test_layouts = 1;
    cfg.split.htc_per_hotspot = 20;
    cfg.patgen.syn_pat_count = 20;
    cfg.sweep_counts = vec![20];
    let data = prepare(&cfg).unwrap();
    let enhanced = data.enhanced(cfg.patgen.syn_pat_count).unwrap();
    let off = PcaSpec { enabled: false, ..cfg.pca };
    let reference = fit_pipeline(&enhanced, &cfg, &off, Tuning::Grid(&cfg.grid)).unwrap();
    println!("{} input columns after filtering", reference.features.filter.keep.len());
    for count in [ComponentCount::VarianceFraction(0.99), ComponentCount::Full, ComponentCount::Fixed(10)] {
        let a = pca_ablation_on(&data, &cfg, count, Some(&reference)).unwrap();
        println!("{count:?}: {} components, max delta {:.2} points", a.kept, a.max_delta());
        for r in &a.rows {
            println!(
                "  {:<4} hit {:.3}/{:.3} fp {:.4}/{:.4}",
                r.dataset, r.with_pca.ht_hit_rate, r.without_pca.ht_hit_rate, r.with_pca.fp_rate, r.without_pca.fp_rate
            );
        }
    }
}
