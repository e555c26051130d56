//! Enhanced versus non-enhanced training on a reduced corpus. Pass a config
//! path (JSON or TOML) to run at full scale.

use hotspot::experiment::{run_enhancement_experiment, RunConfig};

fn config() -> RunConfig {
    if let Some(p) = std::env::args().nth(1) {
        return RunConfig::load(p).unwrap();
    }
    let mut cfg = RunConfig::default();
    cfg.split.train_layouts = 2;
    cfg.split.test_layouts = 2;
    cfg.split.htc_per_hotspot = 40;
    cfg.patgen.syn_pat_count = 40;
    cfg.sweep_counts = vec![40];
    cfg
}

fn main() {
    let c = run_enhancement_experiment(&config()).unwrap();
    for r in [&c.non_enhanced, &c.enhanced] {
        println!(
            "{:<13} rows {:>5} | ETC hit {:.3} fp {:.4} mcc {:.3} | HTC hit {:.3} fp {:.4} | matched hit {:.3} fp {:.4}",
            r.name,
            r.train_rows,
            r.etc.ht_hit_rate,
            r.etc.fp_rate,
            r.etc.mcc,
            r.htc.ht_hit_rate,
            r.htc.fp_rate,
            r.htc_matched.ht_hit_rate,
            r.htc_matched.fp_rate
        );
    }
    println!("matched HTC false-positive ratio {:.3}", c.matched_fp_ratio());
}
