//! Subcommand implementations behind the `hotspot` binary. Every command
//! writes its resolved config and digests next to its tables so a run
//! directory is self-describing.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::corpus::{corpus_digest, extract_snippets, label_all, layout_extent};
use crate::drc::check_layout;
use crate::error::{Error, Result};
use crate::experiment::{
    cluster_experiment_on, count_sweep_on, enhancement_on, fit_pipeline, load_or_generate_layouts, matched_operating_point,
    pca_ablation_on, prepare, spearman, Comparison, Dataset, Pipeline, PreparedData, RunConfig, Tuning,
};
use crate::ftp::{featurize_corpus, FeatureMatrix, RowMode};
use crate::geom::Rect;
use crate::io::{read_to_string, write_csv, write_json};
use crate::layout::{Label, PatternSnippet};
use crate::litho::LabelOutcome;
use crate::metrics::MetricsReport;
use crate::pca::{ComponentCount, PcaSpec};
use crate::svm::GridResult;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

/// A named table written as `<name>.csv` or `<name>.json` (an array of
/// objects; cells that parse as finite numbers become numbers).
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(name: &str, header: &[&str]) -> Table {
        Table { name: name.into(), header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn write(&self, dir: &Path, format: OutputFormat) -> Result<PathBuf> {
        match format {
            OutputFormat::Csv => {
                let path = dir.join(format!("{}.csv", self.name));
                let header: Vec<&str> = self.header.iter().map(String::as_str).collect();
                write_csv(&path, &header, &self.rows)?;
                Ok(path)
            }
            OutputFormat::Json => {
                let path = dir.join(format!("{}.json", self.name));
                let records: Vec<serde_json::Map<String, serde_json::Value>> = self
                    .rows
                    .iter()
                    .map(|r| {
                        self.header
                            .iter()
                            .zip(r)
                            .map(|(h, v)| {
                                let val = match v.parse::<f64>() {
                                    Ok(x) if x.is_finite() => serde_json::json!(x),
                                    _ => serde_json::Value::String(v.clone()),
                                };
                                (h.clone(), val)
                            })
                            .collect()
                    })
                    .collect();
                write_json(&path, &records)?;
                Ok(path)
            }
        }
    }
}

/// Output directory and format shared by all commands.
#[derive(Clone, Debug)]
pub struct RunContext {
    pub cfg: RunConfig,
    pub out: PathBuf,
    pub format: OutputFormat,
}

impl RunContext {
    pub fn new(cfg: RunConfig, out: impl Into<PathBuf>, format: OutputFormat) -> Result<RunContext> {
        cfg.validate()?;
        let out = out.into();
        std::fs::create_dir_all(&out).map_err(|e| Error::io(&out, e))?;
        Ok(RunContext { cfg, out, format })
    }

    fn table(&self, t: &Table) -> Result<PathBuf> {
        t.write(&self.out, self.format)
    }

    /// `config.json` and `digests.json`.
    fn manifest(&self, digests: &BTreeMap<String, String>) -> Result<Vec<PathBuf>> {
        let cfg_path = self.out.join("config.json");
        std::fs::write(&cfg_path, self.cfg.to_json() + "\n").map_err(|e| Error::io(&cfg_path, e))?;
        let mut d = digests.clone();
        d.insert("config".into(), self.cfg.hash());
        let dig_path = self.out.join("digests.json");
        write_json(&dig_path, &d)?;
        Ok(vec![cfg_path, dig_path])
    }
}

fn fmt(v: f64) -> String {
    format!("{v:.6}")
}

pub fn labels_table(name: &str, snippets: &[PatternSnippet], outcomes: &[LabelOutcome]) -> Table {
    let mut t = Table::new(name, &["pattern_id", "label", "defect_kind", "worst_corner"]);
    for (s, o) in snippets.iter().zip(outcomes) {
        let (label, kind) = match o.label {
            Label::Hotspot(k) => ("hotspot", k.as_str()),
            Label::NonHotspot => ("non_hotspot", ""),
        };
        let corner = o.worst_corner.map_or(String::new(), |c| c.to_string());
        t.rows.push(vec![s.id.clone(), label.into(), kind.into(), corner]);
    }
    t
}

/// Labels recorded on already-labeled snippets (no per-corner detail).
fn stored_labels_table(name: &str, snippets: &[PatternSnippet]) -> Table {
    let mut t = Table::new(name, &["pattern_id", "label", "defect_kind", "worst_corner"]);
    for s in snippets {
        let (label, kind) = match s.label {
            Some(Label::Hotspot(k)) => ("hotspot", k.as_str()),
            Some(Label::NonHotspot) => ("non_hotspot", ""),
            None => ("", ""),
        };
        t.rows.push(vec![s.id.clone(), label.into(), kind.into(), String::new()]);
    }
    t
}

pub fn features_table(name: &str, fm: &FeatureMatrix) -> Table {
    let mut header = vec!["pattern_id".to_string(), "fragment_id".to_string()];
    header.extend(fm.columns.iter().cloned());
    header.push("label".into());
    let mut t = Table { name: name.into(), header, rows: Vec::with_capacity(fm.len()) };
    for (i, r) in fm.x.iter_rows().enumerate() {
        let mut row = vec![fm.pattern_ids[i].clone(), fm.fragment_ids[i].to_string()];
        row.extend(r.iter().map(|v| v.to_string()));
        row.push(match fm.labels[i] {
            Some(true) => "1".into(),
            Some(false) => "0".into(),
            None => String::new(),
        });
        t.rows.push(row);
    }
    t
}

pub fn grid_table(name: &str, g: &GridResult) -> Table {
    let mut t = Table::new(name, &GridResult::CSV_HEADER);
    for p in &g.points {
        t.rows.push(vec![
            p.params.c.to_string(),
            p.params.gamma.to_string(),
            p.params.bias_ht.to_string(),
            p.params.bias_nht.to_string(),
            fmt(p.ht_hit_rate),
            fmt(p.fp_rate),
            fmt(p.fold_stddev),
        ]);
    }
    t
}

pub fn metrics_table(name: &str, rows: &[(&str, &MetricsReport)]) -> Table {
    let mut t = Table::new(name, &MetricsReport::CSV_HEADER);
    t.rows.extend(rows.iter().map(|(ds, m)| m.csv_row(ds)));
    t
}

pub fn comparison_table(c: &Comparison) -> Table {
    let mut t = Table::new("comparison", &Comparison::CSV_HEADER);
    t.rows = c.csv_rows();
    t
}

fn train_test_snippets(cfg: &RunConfig) -> Result<(Vec<PatternSnippet>, Vec<PatternSnippet>)> {
    let layouts = load_or_generate_layouts(cfg)?;
    let snips = |range: std::ops::Range<usize>| -> Vec<PatternSnippet> {
        range
            .flat_map(|i| {
                let extent = if cfg.layout_files.is_empty() {
                    layout_extent(&cfg.corpus, i)
                } else {
                    layouts[i].bbox().unwrap_or(Rect::new(0, 0, 0, 0))
                };
                extract_snippets(&layouts[i], &format!("L{i:02}"), extent, &cfg.snippets)
            })
            .collect()
    };
    let n = cfg.split.train_layouts.min(layouts.len());
    Ok((snips(0..n), snips(n..layouts.len())))
}

/// Layouts as JSON plus a DRC table per layout.
pub fn gen_corpus(ctx: &RunContext) -> Result<Vec<PathBuf>> {
    let layouts = load_or_generate_layouts(&ctx.cfg)?;
    let dir = ctx.out.join("layouts");
    std::fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
    let mut written = Vec::new();
    let mut inventory = Table::new("corpus", &["layout", "polygons", "drc_violations"]);
    for (i, l) in layouts.iter().enumerate() {
        let path = dir.join(format!("L{i:02}.json"));
        l.save(&path)?;
        written.push(path);
        let report = check_layout(&l.polygons, &ctx.cfg.deck);
        let mut t = Table::new(&format!("drc_L{i:02}"), &["kind", "x", "y", "measured", "required"]);
        for v in &report.violations {
            t.rows.push(vec![
                v.kind.as_str().into(),
                v.location.0.to_string(),
                v.location.1.to_string(),
                v.measured.to_string(),
                v.required.to_string(),
            ]);
        }
        written.push(ctx.table(&t)?);
        inventory.rows.push(vec![format!("L{i:02}"), l.polygons.len().to_string(), report.violations.len().to_string()]);
    }
    written.push(ctx.table(&inventory)?);
    let mut d = BTreeMap::new();
    d.insert("corpus".into(), corpus_digest(&layouts));
    written.extend(ctx.manifest(&d)?);
    Ok(written)
}

/// Oracle labels for the training and test snippets.
pub fn label(ctx: &RunContext) -> Result<Vec<PathBuf>> {
    let (mut train, mut test) = train_test_snippets(&ctx.cfg)?;
    let o_train = label_all(&mut train, &ctx.cfg.oracle)?;
    let o_test = label_all(&mut test, &ctx.cfg.oracle)?;
    let mut written =
        vec![ctx.table(&labels_table("labels_train", &train, &o_train))?, ctx.table(&labels_table("labels_etc", &test, &o_test))?];
    let mut d = BTreeMap::new();
    d.insert("corpus".into(), corpus_digest(&load_or_generate_layouts(&ctx.cfg)?));
    written.extend(ctx.manifest(&d)?);
    Ok(written)
}

/// Synthetic variants of the training hotspots and the HTC test set.
pub fn enhance(ctx: &RunContext) -> Result<Vec<PathBuf>> {
    let data = prepare(&ctx.cfg)?;
    let mut meta = Table::new("patgen_meta", &["pattern_id", "parent_id", "moves_applied", "max_abs_displacement_nm", "drc_attempts"]);
    for m in &data.synthetic_meta {
        meta.rows.push(vec![
            m.pattern_id.clone(),
            m.parent_id.clone(),
            m.moves_applied.to_string(),
            m.max_abs_displacement_nm.to_string(),
            m.drc_attempts.to_string(),
        ]);
    }
    let variants = ctx.out.join("synthetic.json");
    write_json(&variants, &data.synthetic.snippets)?;
    let mut written = vec![
        ctx.table(&meta)?,
        ctx.table(&stored_labels_table("labels_synthetic", &data.synthetic.snippets))?,
        ctx.table(&stored_labels_table("labels_htc", &data.htc.snippets))?,
        variants,
    ];
    written.extend(ctx.manifest(&data.digests())?);
    Ok(written)
}

/// Feature rows of the training and ETC snippets and the schema descriptor.
pub fn featurize(ctx: &RunContext, mode: RowMode) -> Result<Vec<PathBuf>> {
    let (mut train, mut test) = train_test_snippets(&ctx.cfg)?;
    label_all(&mut train, &ctx.cfg.oracle)?;
    label_all(&mut test, &ctx.cfg.oracle)?;
    let schema = &ctx.cfg.ftp;
    let a = featurize_corpus(&train, schema, mode)?;
    let b = featurize_corpus(&test, schema, mode)?;
    #[derive(Serialize)]
    struct SchemaDoc<'a> {
        schema_id: String,
        depth: usize,
        max_frag_len: i64,
        roi_nm: f64,
        sentinel: f64,
        weights: &'a crate::ftp::WeightProfile,
        include_orientation: bool,
        columns: Vec<String>,
    }
    let doc = SchemaDoc {
        schema_id: schema.schema_id(),
        depth: schema.depth,
        max_frag_len: schema.max_frag_len,
        roi_nm: schema.roi_nm,
        sentinel: schema.sentinel(),
        weights: &schema.weights,
        include_orientation: schema.include_orientation,
        columns: schema.columns(),
    };
    let schema_path = ctx.out.join("feature_schema.json");
    write_json(&schema_path, &doc)?;
    let mut written = vec![ctx.table(&features_table("features_train", &a))?, ctx.table(&features_table("features_etc", &b))?, schema_path];
    let mut d = BTreeMap::new();
    d.insert("corpus".into(), corpus_digest(&load_or_generate_layouts(&ctx.cfg)?));
    written.extend(ctx.manifest(&d)?);
    Ok(written)
}

/// Grid search and training on the enhanced set (or the original training
/// set with `baseline`); the pipeline is saved as `model.json`.
pub fn train(ctx: &RunContext, baseline: bool) -> Result<Vec<PathBuf>> {
    let data = prepare(&ctx.cfg)?;
    let set = if baseline { data.train.clone() } else { data.enhanced(ctx.cfg.patgen.syn_pat_count)? };
    let p = fit_pipeline(&set, &ctx.cfg, &ctx.cfg.pca, Tuning::Grid(&ctx.cfg.grid))?;
    let model = ctx.out.join("model.json");
    std::fs::write(&model, p.to_json() + "\n").map_err(|e| Error::io(&model, e))?;
    let mut written = vec![model];
    if let Some(g) = &p.grid {
        written.push(ctx.table(&grid_table("grid", g))?);
    }
    written.extend(ctx.manifest(&data.digests())?);
    Ok(written)
}

/// Metrics of a saved pipeline on ETC and HTC, plus the matched HTC point.
pub fn evaluate(ctx: &RunContext, model: &Path) -> Result<Vec<PathBuf>> {
    let p = Pipeline::from_json(&read_to_string(model)?)?;
    if p.model.schema_id.as_deref().is_some_and(|id| id != ctx.cfg.ftp.schema_id()) {
        return Err(Error::Config(format!("model was trained on feature schema {:?}", p.model.schema_id)));
    }
    let data = prepare(&ctx.cfg)?;
    let etc = p.evaluate(&data.etc)?;
    let htc = p.evaluate(&data.htc)?;
    let m = matched_operating_point(&p.decision_values(&data.htc.x)?, &data.htc.labels, ctx.cfg.matched_hit_rate);
    let mut matched = Table::new("htc_matched", &["target", "threshold", "ht_hit_rate", "fp_rate"]);
    matched.rows.push(vec![fmt(m.target), m.threshold.to_string(), fmt(m.ht_hit_rate), fmt(m.fp_rate)]);
    let mut written = vec![ctx.table(&metrics_table("metrics", &[("ETC", &etc), ("HTC", &htc)]))?, ctx.table(&matched)?];
    written.extend(ctx.manifest(&data.digests())?);
    Ok(written)
}

/// The enhancement experiment: both pipelines, their grids, metrics and
/// `comparison` table, and the two records as JSON.
pub fn experiment(ctx: &RunContext) -> Result<(Comparison, Vec<PathBuf>)> {
    let data = prepare(&ctx.cfg)?;
    let (cmp, p0, p1) = enhancement_on(&data, &ctx.cfg, &ctx.cfg.pca)?;
    let mut written = vec![ctx.table(&comparison_table(&cmp))?];
    for (name, p, r) in [("non_enhanced", &p0, &cmp.non_enhanced), ("enhanced", &p1, &cmp.enhanced)] {
        if let Some(g) = &p.grid {
            written.push(ctx.table(&grid_table(&format!("grid_{name}"), g))?);
        }
        written.push(ctx.table(&metrics_table(&format!("metrics_{name}"), &[("ETC", &r.etc), ("HTC", &r.htc)]))?);
    }
    let rec = ctx.out.join("records.json");
    write_json(&rec, &cmp)?;
    written.push(rec);
    written.extend(ctx.manifest(&data.digests())?);
    Ok((cmp, written))
}

fn enhanced_operating_point(data: &PreparedData, cfg: &RunConfig, pca: &PcaSpec) -> Result<Pipeline> {
    let enh: Dataset = data.enhanced(cfg.patgen.syn_pat_count)?;
    fit_pipeline(&enh, cfg, pca, Tuning::Grid(&cfg.grid))
}

/// HTC total error per synthetic count, with the Spearman correlation.
pub fn sweep(ctx: &RunContext) -> Result<Vec<PathBuf>> {
    let cfg = &ctx.cfg;
    let data = prepare(cfg)?;
    let fixed = if cfg.sweep_grid_search { None } else { Some(enhanced_operating_point(&data, cfg, &cfg.pca)?.operating) };
    let points = count_sweep_on(&data, cfg, &cfg.sweep_counts, fixed.as_ref())?;
    let mut t = Table::new("sweep", &["count", "train_rows", "ht_hit", "fp_rate", "fn_rate", "total_err", "mcc"]);
    for p in &points {
        let m = &p.htc;
        t.rows.push(vec![
            p.count.to_string(),
            p.train_rows.to_string(),
            fmt(m.ht_hit_rate),
            fmt(m.fp_rate),
            fmt(m.fn_rate),
            fmt(m.total_error_rate),
            fmt(m.mcc),
        ]);
    }
    let xs: Vec<f64> = points.iter().map(|p| p.count as f64).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.htc.total_error_rate).collect();
    let mut s = Table::new("sweep_summary", &["spearman"]);
    s.rows.push(vec![fmt(spearman(&xs, &ys))]);
    let mut written = vec![ctx.table(&t)?, ctx.table(&s)?];
    written.extend(ctx.manifest(&data.digests())?);
    Ok(written)
}

/// With-PCA versus without-PCA metrics at the configured component count
/// and at full rank.
pub fn pca_ablation(ctx: &RunContext) -> Result<Vec<PathBuf>> {
    let cfg = &ctx.cfg;
    let data = prepare(cfg)?;
    let off = PcaSpec { enabled: false, ..cfg.pca };
    let reference = enhanced_operating_point(&data, cfg, &off)?;
    let mut t = Table::new(
        "pca_ablation",
        &["components", "kept", "dataset", "d_ht_hit", "d_nht_hit", "d_fp_rate", "d_fn_rate", "d_total_err", "d_mcc"],
    );
    for comp in [cfg.pca.components, ComponentCount::Full] {
        let a = pca_ablation_on(&data, cfg, comp, Some(&reference))?;
        let label = match comp {
            ComponentCount::Fixed(k) => format!("fixed:{k}"),
            ComponentCount::VarianceFraction(f) => format!("variance:{f}"),
            ComponentCount::Full => "full".into(),
        };
        for r in &a.rows {
            let mut row = vec![label.clone(), a.kept.to_string(), r.dataset.clone()];
            row.extend(r.deltas.iter().map(|&d| fmt(d)));
            t.rows.push(row);
        }
    }
    let mut written = vec![ctx.table(&t)?];
    written.extend(ctx.manifest(&data.digests())?);
    Ok(written)
}

/// k-means clustered SVMs on the non-enhanced and enhanced sets.
pub fn cluster_experiment(ctx: &RunContext) -> Result<Vec<PathBuf>> {
    let cfg = &ctx.cfg;
    let data = prepare(cfg)?;
    let (_, p0, p1) = enhancement_on(&data, cfg, &cfg.pca)?;
    let (a, b) = cluster_experiment_on(&data, cfg, (&p0.operating, &p1.operating), cfg.cluster_k)?;
    let mut t = Table::new("cluster", &["model", "dataset", "ht_hit", "nht_hit", "fp_rate", "fn_rate", "total_err", "mcc"]);
    for (name, r) in [("non-enhanced", &a), ("enhanced", &b)] {
        for (ds, m) in [("ETC", &r.etc), ("HTC", &r.htc)] {
            let mut row = vec![name.to_string()];
            row.extend(m.csv_row(ds));
            t.rows.push(row);
        }
        let mut row = vec![name.to_string(), "HTC-matched".into(), fmt(r.htc_matched.ht_hit_rate), String::new()];
        row.extend([fmt(r.htc_matched.fp_rate), String::new(), String::new(), String::new()]);
        t.rows.push(row);
    }
    let mut written = vec![ctx.table(&t)?];
    written.extend(ctx.manifest(&data.digests())?);
    Ok(written)
}
