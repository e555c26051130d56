//! k-means routing to one SVM per cluster, with and without enhancement.

use hotspot::experiment::{cluster_experiment_on, enhancement_on, prepare, RunConfig};

fn main() {
    let mut cfg = RunConfig::default();
    cfg.split.train_layouts = 2;
    cfg.split.test_layouts = 1;
    cfg.split.htc_per_hotspot = 40;
    cfg.patgen.syn_pat_count = 40;
    cfg.sweep_counts = vec![40];
    cfg.cluster_k = 4;
    let data = prepare(&cfg).unwrap();
    let (_, p0, p1) = enhancement_on(&data, &cfg, &cfg.pca).unwrap();
    let (plain, enhanced) = cluster_experiment_on(&data, &cfg, (&p0.operating, &p1.operating), cfg.cluster_k).unwrap();
    for (name, r) in [("non-enhanced", &plain), ("enhanced", &enhanced)] {
        println!(
            "{name:<13} k={} | ETC hit {:.3} fp {:.4} | HTC matched hit {:.3} fp {:.4}",
            r.model.models.len(),
            r.etc.ht_hit_rate,
            r.etc.fp_rate,
            r.htc_matched.ht_hit_rate,
            r.htc_matched.fp_rate
        );
    }
}
