//! End-to-end runs: dataset construction, the enhanced versus non-enhanced
//! comparison, the synthetic-count sweep, the PCA ablation and the
//! clustered-model variant.

use std::collections::{BTreeMap, HashSet};
use std::path::Path;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::cluster::{train_clustered, ClusteredModel};
use crate::corpus::{corpus_digest, extract_snippets, gen_seed_corpus, label_all, layout_extent, CorpusSpec, SnippetSpec};
use crate::drc::RuleDeck;
use crate::error::{Error, Result};
use crate::ftp::{featurize_corpus, ColumnFilter, FtpSchema, RowMode, WeightProfile};
use crate::geom::Rect;
use crate::io::sha256_hex;
use crate::layout::{Layout, PatternSnippet};
use crate::litho::OracleConfig;
use crate::matrix::Matrix;
use crate::metrics::{compute_metrics, ConfusionCounts, MetricsReport};
use crate::patgen::{build_htc_testset, generate_synthetic_patterns, GenParams, VariantMeta};
use crate::pca::{fit_pca_count, ComponentCount, PcaModel, PcaSpec, Standardizer};
use crate::svm::{gamma_reference, grid_search, train_svm, GridPoint, GridResult, GridSpec, SvmModel, SvmParams};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SplitSpec {
    pub train_layouts: usize,
    pub test_layouts: usize,
    /// Fresh HTC variants per training hotspot.
    pub htc_per_hotspot: usize,
}

impl Default for SplitSpec {
    fn default() -> Self {
        SplitSpec { train_layouts: 4, test_layouts: 8, htc_per_hotspot: 200 }
    }
}

/// Feature scaling ahead of PCA and the SVM.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ScalingSpec {
    /// Zero-mean, unit-variance columns, then the schema's role weights.
    pub standardize: bool,
    /// Leave sentinel entries out of the fit and map them to
    /// `missing_value` standard deviations.
    pub sentinel_aware: bool,
    pub missing_value: f64,
}

impl Default for ScalingSpec {
    fn default() -> Self {
        ScalingSpec { standardize: true, sentinel_aware: true, missing_value: 1.0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    pub seed: u64,
    /// JSON layouts to use instead of the procedural generator; the first
    /// `split.train_layouts` train, the rest test.
    pub layout_files: Vec<String>,
    pub corpus: CorpusSpec,
    pub snippets: SnippetSpec,
    pub split: SplitSpec,
    pub deck: RuleDeck,
    pub oracle: OracleConfig,
    pub patgen: GenParams,
    pub ftp: FtpSchema,
    pub scaling: ScalingSpec,
    pub pca: PcaSpec,
    pub svm: SvmParams,
    pub grid: GridSpec,
    /// HT hit rate at which HTC false-positive rates are compared.
    pub matched_hit_rate: f64,
    pub sweep_counts: Vec<usize>,
    /// Run a grid search per sweep count; otherwise reuse the enhanced
    /// pipeline's operating point.
    pub sweep_grid_search: bool,
    pub cluster_k: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: 42,
            layout_files: Vec::new(),
            corpus: CorpusSpec::default(),
            snippets: SnippetSpec::default(),
            split: SplitSpec::default(),
            deck: RuleDeck::default(),
            oracle: OracleConfig { focus_half_width: Some(40.0), ..OracleConfig::default() },
            patgen: GenParams::default(),
            ftp: FtpSchema { weights: WeightProfile::decaying(0.3, 0.3, 4), ..FtpSchema::default() },
            scaling: ScalingSpec::default(),
            pca: PcaSpec::default(),
            svm: SvmParams::default(),
            grid: GridSpec { c: vec![10.0, 100.0, 1000.0], gamma_scale: vec![0.5, 1.0, 2.0, 4.0, 8.0], ..GridSpec::default() },
            matched_hit_rate: 0.95,
            sweep_counts: vec![0, 10, 20, 40, 80, 160, 200],
            sweep_grid_search: false,
            cluster_k: 10,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        self.deck.validate()?;
        self.oracle.validate()?;
        self.patgen.validate()?;
        self.ftp.validate()?;
        self.svm.validate()?;
        self.grid.validate()?;
        self.corpus.validate(&self.deck)?;
        if self.split.train_layouts == 0 || self.split.test_layouts == 0 {
            return Err(Error::Config("need at least one train and one test layout".into()));
        }
        if !self.layout_files.is_empty() && self.layout_files.len() != self.split.train_layouts + self.split.test_layouts {
            return Err(Error::Config("layout_files must list train_layouts + test_layouts files".into()));
        }
        if self.sweep_counts.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::Config("sweep_counts must be ascending".into()));
        }
        if !(self.matched_hit_rate > 0.0 && self.matched_hit_rate <= 1.0) {
            return Err(Error::Config("matched_hit_rate must be in (0, 1]".into()));
        }
        Ok(())
    }

    /// Reads JSON or, for a `.toml` extension, TOML.
    pub fn load(path: impl AsRef<Path>) -> Result<RunConfig> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let cfg: RunConfig = if path.extension().is_some_and(|e| e == "toml") {
            toml::from_str(&text).map_err(|e| Error::Config(e.to_string()))?
        } else {
            serde_json::from_str(&text)?
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn hash(&self) -> String {
        sha256_hex(serde_json::to_string(self).expect("config serializes").as_bytes())
    }

    /// Variants generated per hotspot: enough for every sweep count.
    pub fn variants_per_hotspot(&self) -> usize {
        self.sweep_counts.iter().copied().max().unwrap_or(0).max(self.patgen.syn_pat_count)
    }
}

/// Labeled snippets with their anchor feature rows.
#[derive(Clone, Debug)]
pub struct Dataset {
    pub snippets: Vec<PatternSnippet>,
    pub x: Matrix,
    pub labels: Vec<bool>,
}

impl Dataset {
    fn build(snippets: Vec<PatternSnippet>, schema: &FtpSchema) -> Result<Dataset> {
        if snippets.is_empty() {
            return Ok(Dataset { snippets, x: Matrix::zeros(0, schema.len()), labels: Vec::new() });
        }
        let fm = featurize_corpus(&snippets, schema, RowMode::Anchor)?;
        if fm.len() != snippets.len() {
            return Err(Error::DegenerateInput("snippet without an anchor fragment".into()));
        }
        let labels = fm.labels.iter().map(|l| l.expect("labeled")).collect();
        Ok(Dataset { snippets, x: fm.x, labels })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn hotspots(&self) -> usize {
        self.labels.iter().filter(|&&l| l).count()
    }

    pub fn digest(&self) -> String {
        let mut text = String::new();
        for (s, row) in self.snippets.iter().zip(self.x.iter_rows()) {
            text.push_str(&serde_json::to_string(s).expect("snippet serializes"));
            text.push_str(&serde_json::to_string(row).expect("row serializes"));
            text.push('\n');
        }
        sha256_hex(text.as_bytes())
    }

    pub fn select(&self, idx: &[usize]) -> Dataset {
        Dataset {
            snippets: idx.iter().map(|&i| self.snippets[i].clone()).collect(),
            x: self.x.select_rows(idx),
            labels: idx.iter().map(|&i| self.labels[i]).collect(),
        }
    }

    pub fn concat(&self, other: &Dataset) -> Result<Dataset> {
        let mut snippets = self.snippets.clone();
        snippets.extend(other.snippets.iter().cloned());
        let mut labels = self.labels.clone();
        labels.extend(&other.labels);
        Ok(Dataset { snippets, x: self.x.vstack(&other.x)?, labels })
    }
}

/// Everything the experiments train and test on.
#[derive(Clone, Debug)]
pub struct PreparedData {
    pub layouts: Vec<Layout>,
    pub corpus_digest: String,
    pub train: Dataset,
    pub etc: Dataset,
    /// Ids of the training hotspots that were enhanced, in order.
    pub hotspot_ids: Vec<String>,
    /// Variants ordered hotspot-major: hotspot `h`, variant `i` at
    /// `h * per_hotspot + i`.
    pub synthetic: Dataset,
    pub synthetic_meta: Vec<VariantMeta>,
    pub per_hotspot: usize,
    pub htc: Dataset,
    pub seconds: f64,
}

impl PreparedData {
    /// Original training rows plus the first `count` variants per hotspot.
    pub fn enhanced(&self, count: usize) -> Result<Dataset> {
        let count = count.min(self.per_hotspot);
        let idx: Vec<usize> = (0..self.hotspot_ids.len()).flat_map(|h| (0..count).map(move |i| h * self.per_hotspot + i)).collect();
        self.train.concat(&self.synthetic.select(&idx))
    }

    /// The same patterns featurized under another schema.
    pub fn refeaturize(&self, schema: &FtpSchema) -> Result<PreparedData> {
        let re = |d: &Dataset| Dataset::build(d.snippets.clone(), schema);
        Ok(PreparedData {
            train: re(&self.train)?,
            etc: re(&self.etc)?,
            synthetic: re(&self.synthetic)?,
            htc: re(&self.htc)?,
            ..self.clone()
        })
    }

    pub fn digests(&self) -> BTreeMap<String, String> {
        let mut m = BTreeMap::new();
        m.insert("corpus".into(), self.corpus_digest.clone());
        m.insert("train".into(), self.train.digest());
        m.insert("etc".into(), self.etc.digest());
        m.insert("synthetic".into(), self.synthetic.digest());
        m.insert("htc".into(), self.htc.digest());
        m
    }
}

pub fn load_or_generate_layouts(cfg: &RunConfig) -> Result<Vec<Layout>> {
    if cfg.layout_files.is_empty() {
        gen_seed_corpus(&cfg.corpus, &cfg.deck, cfg.seed, cfg.split.train_layouts + cfg.split.test_layouts)
    } else {
        cfg.layout_files.iter().map(Layout::load).collect()
    }
}

fn layout_snippets(cfg: &RunConfig, layouts: &[Layout], range: std::ops::Range<usize>) -> Vec<PatternSnippet> {
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
}

/// Builds the training, ETC, synthetic and HTC sets. Train/test hygiene
/// (no shared ids, no HTC geometry equal to a training pattern) is checked.
pub fn prepare(cfg: &RunConfig) -> Result<PreparedData> {
    cfg.validate()?;
    let t0 = Instant::now();
    let layouts = load_or_generate_layouts(cfg)?;
    let ntrain = cfg.split.train_layouts;
    let mut train = layout_snippets(cfg, &layouts, 0..ntrain);
    let mut etc = layout_snippets(cfg, &layouts, ntrain..layouts.len());
    label_all(&mut train, &cfg.oracle)?;
    label_all(&mut etc, &cfg.oracle)?;
    let hotspots: Vec<PatternSnippet> = train.iter().filter(|s| s.is_hotspot()).cloned().collect();
    if hotspots.is_empty() {
        return Err(Error::EmptyClass(0));
    }
    let per_hotspot = cfg.variants_per_hotspot();
    let gen = GenParams { syn_pat_count: per_hotspot.max(1), ..cfg.patgen.clone() };
    let variants: Vec<_> = {
        use rayon::prelude::*;
        hotspots
            .par_iter()
            .map(|h| generate_synthetic_patterns(h, &gen, &cfg.deck))
            .collect::<Vec<_>>()
            .into_iter()
            .flat_map(|v| v.into_iter().take(per_hotspot))
            .collect()
    };
    let synthetic_meta: Vec<VariantMeta> = variants.iter().map(|v| v.meta.clone()).collect();
    let mut synthetic: Vec<PatternSnippet> = variants.into_iter().map(|v| v.snippet).collect();
    label_all(&mut synthetic, &cfg.oracle)?;
    let train_keys: HashSet<_> = train.iter().chain(&synthetic).map(|s| s.geometry_key()).collect();
    let htc_gen = GenParams { syn_pat_count: cfg.split.htc_per_hotspot.max(1), ..cfg.patgen.clone() };
    let mut htc: Vec<PatternSnippet> = if cfg.split.htc_per_hotspot == 0 {
        Vec::new()
    } else {
        build_htc_testset(&hotspots, &htc_gen, &cfg.deck, &train_keys)?.into_iter().map(|v| v.snippet).collect()
    };
    label_all(&mut htc, &cfg.oracle)?;
    let train_ids: HashSet<&str> = train.iter().chain(&synthetic).map(|s| s.id.as_str()).collect();
    if htc.iter().chain(&etc).any(|s| train_ids.contains(s.id.as_str())) {
        return Err(Error::DegenerateInput("test pattern id also used for training".into()));
    }
    if htc.iter().any(|s| train_keys.contains(&s.geometry_key())) {
        return Err(Error::DegenerateInput("HTC pattern duplicates training geometry".into()));
    }
    let schema = &cfg.ftp;
    Ok(PreparedData {
        corpus_digest: corpus_digest(&layouts),
        layouts,
        hotspot_ids: hotspots.iter().map(|h| h.id.clone()).collect(),
        train: Dataset::build(train, schema)?,
        etc: Dataset::build(etc, schema)?,
        synthetic: Dataset::build(synthetic, schema)?,
        synthetic_meta,
        per_hotspot,
        htc: Dataset::build(htc, schema)?,
        seconds: t0.elapsed().as_secs_f64(),
    })
}

/// Column filter, scaling and optional PCA, fitted on training rows.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeatureTransform {
    pub filter: ColumnFilter,
    pub standardizer: Option<Standardizer>,
    pub pca: Option<PcaModel>,
}

impl FeatureTransform {
    /// Fits on `x` and returns the transformed training rows too.
    pub fn fit(x: &Matrix, schema: &FtpSchema, scaling: &ScalingSpec, pca: &PcaSpec) -> Result<(FeatureTransform, Matrix)> {
        let filter = ColumnFilter::fit(x);
        let mut z = filter.apply(x);
        let standardizer = if scaling.standardize {
            let pick = |v: Vec<Option<f64>>| filter.keep.iter().map(|&c| v.get(c).copied().flatten()).collect::<Vec<_>>();
            let weights = schema.column_weights();
            let weight: Vec<f64> = filter.keep.iter().map(|&c| weights.get(c).copied().unwrap_or(1.0)).collect();
            let missing = if scaling.sentinel_aware { pick(schema.column_sentinels()) } else { vec![None; filter.keep.len()] };
            let s = Standardizer::fit_masked(&z, &missing, scaling.missing_value, &weight);
            z = s.apply(&z)?;
            Some(s)
        } else {
            None
        };
        let pca = if pca.enabled {
            let p = fit_pca_count(&z, pca.components)?;
            z = p.transform(&z)?;
            Some(p)
        } else {
            None
        };
        Ok((FeatureTransform { filter, standardizer, pca }, z))
    }

    pub fn apply(&self, x: &Matrix) -> Result<Matrix> {
        if x.cols != self.filter.source_cols {
            return Err(Error::DimensionMismatch { expected: self.filter.source_cols, got: x.cols });
        }
        let mut z = self.filter.apply(x);
        if let Some(s) = &self.standardizer {
            z = s.apply(&z)?;
        }
        if let Some(p) = &self.pca {
            z = p.transform(&z)?;
        }
        Ok(z)
    }
}

/// Feature transform and an SVM at a grid-selected operating point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Pipeline {
    pub features: FeatureTransform,
    pub grid: Option<GridResult>,
    pub operating: GridPoint,
    pub model: SvmModel,
}

impl Pipeline {
    pub fn transform(&self, x: &Matrix) -> Result<Matrix> {
        self.features.apply(x)
    }

    pub fn decision_values(&self, x: &Matrix) -> Result<Vec<f64>> {
        self.model.decision_values(&self.transform(x)?)
    }

    pub fn evaluate(&self, d: &Dataset) -> Result<MetricsReport> {
        let (pred, _) = self.model.predict(&self.transform(&d.x)?)?;
        Ok(compute_metrics(ConfusionCounts::from_pairs(&d.labels, &pred)))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("pipeline serializes")
    }

    pub fn from_json(text: &str) -> Result<Pipeline> {
        let p: Pipeline = serde_json::from_str(text)?;
        if p.model.version != crate::svm::SVM_FORMAT_VERSION {
            return Err(Error::Parse(format!("unsupported svm model version {}", p.model.version)));
        }
        Ok(p)
    }
}

/// How the SVM hyperparameters are chosen.
#[derive(Clone, Debug)]
pub enum Tuning<'a> {
    /// Grid search; operating point closest to the target hit rate.
    Grid(&'a GridSpec),
    /// Reuse a point, rescaling gamma to the new data.
    Fixed(&'a GridPoint),
}

pub fn fit_pipeline(d: &Dataset, cfg: &RunConfig, pca: &PcaSpec, tuning: Tuning) -> Result<Pipeline> {
    let (features, z) = FeatureTransform::fit(&d.x, &cfg.ftp, &cfg.scaling, pca)?;
    let (grid, operating) = match tuning {
        Tuning::Grid(g) => {
            let r = grid_search(&z, &d.labels, &cfg.svm, g)?;
            let op = r.operating_point(g.target_hit_rate).clone();
            (Some(r), op)
        }
        Tuning::Fixed(p) => {
            let mut op = p.clone();
            op.params.gamma = p.gamma_scale / gamma_reference(&z);
            (None, op)
        }
    };
    let mut model = train_svm(&z, &d.labels, &operating.params)?;
    model.schema_id = Some(cfg.ftp.schema_id());
    model.pca_ref = features.pca.as_ref().map(|p| sha256_hex(p.to_json().as_bytes()));
    Ok(Pipeline { features, grid, operating, model })
}

/// HTC comparison at a fixed HT hit rate: the threshold is lowered until at
/// least `target` of the hotspots are flagged.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatchedPoint {
    pub target: f64,
    pub threshold: f64,
    pub ht_hit_rate: f64,
    pub fp_rate: f64,
}

pub fn matched_operating_point(decision: &[f64], labels: &[bool], target: f64) -> MatchedPoint {
    let mut ht: Vec<f64> = decision.iter().zip(labels).filter(|(_, &l)| l).map(|(&d, _)| d).collect();
    ht.sort_by(|a, b| b.total_cmp(a));
    let n_ht = ht.len();
    let total = decision.len().max(1) as f64;
    if n_ht == 0 {
        return MatchedPoint { target, threshold: f64::INFINITY, ht_hit_rate: 0.0, fp_rate: 0.0 };
    }
    let k = ((target * n_ht as f64).ceil() as usize).clamp(1, n_ht);
    let t = ht[k - 1];
    let hit = ht.iter().filter(|&&d| d >= t).count() as f64 / n_ht as f64;
    let fp = decision.iter().zip(labels).filter(|(&d, &l)| !l && d >= t).count() as f64 / total;
    MatchedPoint { target, threshold: t, ht_hit_rate: hit, fp_rate: fp }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRecord {
    pub name: String,
    pub config_hash: String,
    pub digests: BTreeMap<String, String>,
    pub train_rows: usize,
    pub train_hotspots: usize,
    pub operating_point: GridPoint,
    pub etc: MetricsReport,
    pub htc: MetricsReport,
    pub htc_matched: MatchedPoint,
    pub seconds: f64,
}

fn record(name: &str, cfg: &RunConfig, data: &PreparedData, train: &Dataset, p: &Pipeline, t0: Instant) -> Result<ExperimentRecord> {
    let htc_dec = p.decision_values(&data.htc.x)?;
    Ok(ExperimentRecord {
        name: name.to_string(),
        config_hash: cfg.hash(),
        digests: data.digests(),
        train_rows: train.len(),
        train_hotspots: train.hotspots(),
        operating_point: p.operating.clone(),
        etc: p.evaluate(&data.etc)?,
        htc: p.evaluate(&data.htc)?,
        htc_matched: matched_operating_point(&htc_dec, &data.htc.labels, cfg.matched_hit_rate),
        seconds: t0.elapsed().as_secs_f64(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub non_enhanced: ExperimentRecord,
    pub enhanced: ExperimentRecord,
}

impl Comparison {
    /// Enhanced over non-enhanced HTC false-positive rate at the matched
    /// hit rate.
    pub fn matched_fp_ratio(&self) -> f64 {
        self.enhanced.htc_matched.fp_rate / self.non_enhanced.htc_matched.fp_rate
    }

    pub const CSV_HEADER: [&'static str; 9] =
        ["dataset", "model", "ht_hit", "nht_hit", "fp_rate", "fn_rate", "total_err", "mcc", "train_rows"];

    /// `comparison.csv` rows: ETC and HTC per model, then the matched HTC point.
    pub fn csv_rows(&self) -> Vec<Vec<String>> {
        let mut rows = Vec::new();
        for (ds, pick) in [("ETC", 0), ("HTC", 1)] {
            for r in [&self.non_enhanced, &self.enhanced] {
                let m = if pick == 0 { &r.etc } else { &r.htc };
                let mut row = vec![ds.to_string(), r.name.clone()];
                row.extend(m.values().iter().map(|v| format!("{v:.6}")));
                row.push(r.train_rows.to_string());
                rows.push(row);
            }
        }
        for r in [&self.non_enhanced, &self.enhanced] {
            let m = &r.htc_matched;
            rows.push(vec![
                "HTC-matched".into(),
                r.name.clone(),
                format!("{:.6}", m.ht_hit_rate),
                String::new(),
                format!("{:.6}", m.fp_rate),
                String::new(),
                String::new(),
                String::new(),
                r.train_rows.to_string(),
            ]);
        }
        rows
    }
}

/// Trains both pipelines, each with its own grid search, on the prepared data.
pub fn enhancement_on(data: &PreparedData, cfg: &RunConfig, pca: &PcaSpec) -> Result<(Comparison, Pipeline, Pipeline)> {
    let t0 = Instant::now();
    let base = &data.train;
    let p0 = fit_pipeline(base, cfg, pca, Tuning::Grid(&cfg.grid))?;
    let r0 = record("non-enhanced", cfg, data, base, &p0, t0)?;
    let t1 = Instant::now();
    let enh = data.enhanced(cfg.patgen.syn_pat_count)?;
    let p1 = fit_pipeline(&enh, cfg, pca, Tuning::Grid(&cfg.grid))?;
    let r1 = record("enhanced", cfg, data, &enh, &p1, t1)?;
    Ok((Comparison { non_enhanced: r0, enhanced: r1 }, p0, p1))
}

pub fn run_enhancement_experiment(cfg: &RunConfig) -> Result<Comparison> {
    let data = prepare(cfg)?;
    Ok(enhancement_on(&data, cfg, &cfg.pca)?.0)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub count: usize,
    pub train_rows: usize,
    pub htc: MetricsReport,
}

/// HTC error per synthetic count. Training sets are nested: the variants
/// used at a count are a prefix of those used at any larger count. With
/// `fixed`, every count reuses that operating point (gamma rescaled).
pub fn count_sweep_on(data: &PreparedData, cfg: &RunConfig, counts: &[usize], fixed: Option<&GridPoint>) -> Result<Vec<SweepPoint>> {
    if counts.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::Config("sweep counts must be ascending".into()));
    }
    counts
        .iter()
        .map(|&count| {
            let train = data.enhanced(count)?;
            let tuning = match fixed {
                Some(p) => Tuning::Fixed(p),
                None => Tuning::Grid(&cfg.grid),
            };
            let p = fit_pipeline(&train, cfg, &cfg.pca, tuning)?;
            Ok(SweepPoint { count, train_rows: train.len(), htc: p.evaluate(&data.htc)? })
        })
        .collect()
}

pub fn run_count_sweep(cfg: &RunConfig, counts: &[usize]) -> Result<Vec<SweepPoint>> {
    let data = prepare(cfg)?;
    let fixed = if cfg.sweep_grid_search {
        None
    } else {
        let enh = data.enhanced(cfg.patgen.syn_pat_count)?;
        Some(fit_pipeline(&enh, cfg, &cfg.pca, Tuning::Grid(&cfg.grid))?.operating)
    };
    count_sweep_on(&data, cfg, counts, fixed.as_ref())
}

/// Spearman rank correlation with average ranks for ties.
pub fn spearman(x: &[f64], y: &[f64]) -> f64 {
    fn ranks(v: &[f64]) -> Vec<f64> {
        let mut idx: Vec<usize> = (0..v.len()).collect();
        idx.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
        let mut r = vec![0.0; v.len()];
        let mut i = 0;
        while i < idx.len() {
            let mut j = i;
            while j + 1 < idx.len() && v[idx[j + 1]] == v[idx[i]] {
                j += 1;
            }
            let avg = (i + j) as f64 / 2.0 + 1.0;
            for k in i..=j {
                r[idx[k]] = avg;
            }
            i = j + 1;
        }
        r
    }
    let (rx, ry) = (ranks(x), ranks(y));
    let n = x.len() as f64;
    let (mx, my) = (rx.iter().sum::<f64>() / n, ry.iter().sum::<f64>() / n);
    let cov: f64 = rx.iter().zip(&ry).map(|(a, b)| (a - mx) * (b - my)).sum();
    let vx: f64 = rx.iter().map(|a| (a - mx) * (a - mx)).sum();
    let vy: f64 = ry.iter().map(|b| (b - my) * (b - my)).sum();
    if vx == 0.0 || vy == 0.0 {
        0.0
    } else {
        cov / (vx * vy).sqrt()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AblationRow {
    pub dataset: String,
    pub with_pca: MetricsReport,
    pub without_pca: MetricsReport,
    /// Absolute differences in points, CSV column order.
    pub deltas: [f64; 6],
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Ablation {
    pub components: ComponentCount,
    pub kept: usize,
    pub rows: Vec<AblationRow>,
}

impl Ablation {
    pub fn max_delta(&self) -> f64 {
        self.rows.iter().flat_map(|r| r.deltas).fold(0.0, f64::max)
    }
}

/// The enhanced pipeline with and without PCA. The PCA run reuses the
/// operating point chosen without PCA so that only the projection differs.
pub fn pca_ablation_on(data: &PreparedData, cfg: &RunConfig, components: ComponentCount, reference: Option<&Pipeline>) -> Result<Ablation> {
    let enh = data.enhanced(cfg.patgen.syn_pat_count)?;
    let off = PcaSpec { enabled: false, ..cfg.pca };
    let owned;
    let without = match reference {
        Some(p) => p,
        None => {
            owned = fit_pipeline(&enh, cfg, &off, Tuning::Grid(&cfg.grid))?;
            &owned
        }
    };
    let with = fit_pipeline(&enh, cfg, &PcaSpec { enabled: true, components }, Tuning::Fixed(&without.operating))?;
    let mut rows = Vec::new();
    for (name, d) in [("ETC", &data.etc), ("HTC", &data.htc)] {
        let (a, b) = (with.evaluate(d)?, without.evaluate(d)?);
        let mut deltas = [0.0; 6];
        for (k, (x, y)) in a.values().iter().zip(b.values()).enumerate() {
            deltas[k] = (x - y).abs() * 100.0;
        }
        rows.push(AblationRow { dataset: name.into(), with_pca: a, without_pca: b, deltas });
    }
    Ok(Ablation { components, kept: with.features.pca.as_ref().map_or(0, |p| p.k), rows })
}

#[derive(Clone, Debug)]
pub struct ClusteredRun {
    pub model: ClusteredModel,
    pub htc: MetricsReport,
    pub etc: MetricsReport,
    pub htc_matched: MatchedPoint,
}

/// Per-cluster SVMs on the pipeline's transformed features, at the given
/// operating point.
pub fn clustered_on(data: &PreparedData, cfg: &RunConfig, train: &Dataset, op: &GridPoint, k: usize) -> Result<ClusteredRun> {
    let (features, z) = FeatureTransform::fit(&train.x, &cfg.ftp, &cfg.scaling, &cfg.pca)?;
    let params = SvmParams { gamma: op.gamma_scale / gamma_reference(&z), ..op.params.clone() };
    let model = train_clustered(&z, &train.labels, k, &params, cfg.seed)?;
    let eval = |d: &Dataset| -> Result<(MetricsReport, Vec<f64>)> {
        let (pred, dec) = model.predict(&features.apply(&d.x)?)?;
        Ok((compute_metrics(ConfusionCounts::from_pairs(&d.labels, &pred)), dec))
    };
    let (htc, dec) = eval(&data.htc)?;
    let (etc, _) = eval(&data.etc)?;
    let htc_matched = matched_operating_point(&dec, &data.htc.labels, cfg.matched_hit_rate);
    Ok(ClusteredRun { model, htc, etc, htc_matched })
}

/// Clustered models on the non-enhanced and enhanced sets, each at the
/// operating point its single-model grid search selected.
pub fn cluster_experiment_on(
    data: &PreparedData,
    cfg: &RunConfig,
    ops: (&GridPoint, &GridPoint),
    k: usize,
) -> Result<(ClusteredRun, ClusteredRun)> {
    let a = clustered_on(data, cfg, &data.train, ops.0, k)?;
    let enh = data.enhanced(cfg.patgen.syn_pat_count)?;
    let b = clustered_on(data, cfg, &enh, ops.1, k)?;
    Ok((a, b))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spearman_basics() {
        assert!((spearman(&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0]) + 1.0).abs() < 1e-12);
        assert!((spearman(&[1.0, 2.0, 3.0, 4.0], &[1.0, 3.0, 2.0, 4.0]) - 0.8).abs() < 1e-12);
    }

    #[test]
    fn matched_point_reaches_target() {
        let dec = [3.0, 2.0, 1.0, 0.5, -1.0, 0.7];
        let lab = [true, true, true, false, true, false];
        let m = matched_operating_point(&dec, &lab, 0.75);
        assert_eq!(m.threshold, 1.0);
        assert_eq!(m.ht_hit_rate, 0.75);
        assert_eq!(m.fp_rate, 0.0);
        let m = matched_operating_point(&dec, &lab, 1.0);
        assert!((m.fp_rate - 2.0 / 6.0).abs() < 1e-12);
    }
}
