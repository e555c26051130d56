//! Confusion-matrix metrics with rates normalized by the test-set size.

use hotspot::metrics::{compute_metrics, ConfusionCounts, MetricsReport};

fn main() {
    let cases = [
        ("balanced", ConfusionCounts { tp: 45, tn: 40, fp: 10, fn_: 5 }),
        ("rare hotspots", ConfusionCounts { tp: 9, tn: 950, fp: 40, fn_: 1 }),
        ("all flagged", ConfusionCounts { tp: 10, tn: 0, fp: 990, fn_: 0 }),
    ];
    println!("{}", MetricsReport::CSV_HEADER.join(","));
    for (name, c) in cases {
        println!("{}", compute_metrics(c).csv_row(name).join(","));
    }
}
