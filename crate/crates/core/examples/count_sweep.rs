//! HTC error as the number of synthetic patterns per hotspot grows.

use hotspot::experiment::{run_count_sweep, spearman, RunConfig};

fn main() {
    let cfg = std::env::args().nth(1).map(|p| RunConfig::load(p).unwrap()).unwrap_or_else(|| {
        let mut cfg = RunConfig::default();
        cfg.split.train_layouts = 2;
        cfg.split.test_layouts = 1;
        cfg.split.htc_per_hotspot = 40;
        cfg.patgen.syn_pat_count = 40;
        cfg.sweep_counts = vec![0, 5, 10, 20, 40];
        cfg
    });
    let counts = cfg.sweep_counts.clone();
    let points = run_count_sweep(&cfg, &counts).unwrap();
    for p in &points {
        println!("count {:>3}: rows {:>5}, HTC total error {:.4}, fp {:.4}", p.count, p.train_rows, p.htc.total_error_rate, p.htc.fp_rate);
    }
    let xs: Vec<f64> = points.iter().map(|p| p.count as f64).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.htc.total_error_rate).collect();
    println!("spearman(count, error) = {:.3}", spearman(&xs, &ys));
}
