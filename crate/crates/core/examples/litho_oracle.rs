//! Gaussian-blur lithography oracle: bridge threshold of two parallel
//! lines, per-corner defect counts and an aerial image dump.

use hotspot::experiment::RunConfig;
use hotspot::geom::{Point, Rect};
use hotspot::layout::PatternSnippet;
use hotspot::litho::{label_snippet, printed_contours, simulate_aerial, ProcessCorner};

fn lines(gap: i64) -> PatternSnippet {
    let mut s = PatternSnippet::new(&format!("gap-{gap}"), Point::new(0, 0), (320, 320));
    let lo = -gap / 2;
    s.polygons = vec![Rect::new(-160, lo - 84, 160, lo).to_polygon(1), Rect::new(-160, lo + gap, 160, lo + gap + 84).to_polygon(1)];
    s
}

fn main() {
    let cfg = RunConfig::default().oracle;
    for gap in (44..=64).step_by(2) {
        let out = label_snippet(&lines(gap), &cfg).unwrap();
        let per: Vec<String> = out.per_corner.iter().map(|d| format!("{}b/{}p", d.bridges, d.pinches)).collect();
        println!("gap {gap:>2} nm: {:?}  corners [{}]", out.label, per.join(" "));
    }

    let s = lines(52);
    let pc = printed_contours(&s, &cfg).unwrap();
    let band = pc.pv_band.iter().filter(|&&b| b).count();
    println!("gap 52: PV band {band} pixels of {}", pc.nx * pc.ny);

    let grid = simulate_aerial(&s, &cfg, ProcessCorner::NOMINAL).unwrap();
    let path = std::env::temp_dir().join("hotspot_gap52.pgm");
    grid.write_pgm(&path, 1.0).unwrap();
    println!("peak intensity {:.3}; image written to {}", grid.max(), path.display());
}
