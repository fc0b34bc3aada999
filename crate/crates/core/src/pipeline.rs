//! Stage functions and the plan runner that chains them.

use crate::classify::{self, KnotType, DEFAULT_PROJECTIONS};
use crate::error::{Error, Result};
use crate::features::{self, SpikeWindow, DEFAULT_EPS_REL, DEFAULT_SPIKE_PERSISTENCE, DEFAULT_SPIKE_WIDTH};
use crate::geometry;
use crate::io::{self, FeatureRow, GeometryRow};
use crate::model::{interpolate, KnotEmbedding, DEFAULT_POINTS_PER_EDGE};
use crate::persistence::{self, Barcode};
use crate::sampler::{self, SamplerConfig, TrefoilPreset};
use crate::stats::{self, GroupBy, JoinedRecord, Method, Variable, DEFAULT_PAIRS};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::collections::{BTreeMap, HashMap};
use std::path::{Path, PathBuf};

pub const KNOTS_FILE: &str = "knots.jsonl";
pub const TREFOILS_FILE: &str = "trefoils.jsonl";
pub const CLASSIFIED_FILE: &str = "classified.jsonl";
pub const GEOMETRY_FILE: &str = "geometry.csv";
pub const BARCODES_FILE: &str = "barcodes.csv";
pub const FEATURES_FILE: &str = "features.csv";
pub const CORRELATIONS_FILE: &str = "correlations.csv";
pub const AVERAGES_FILE: &str = "averages.csv";
pub const MANIFEST_FILE: &str = "manifest.json";

/// Which knots to generate: per length either a plain count, or a quota per
/// knot type (samples are classified and kept until every quota is met).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentPlan {
    pub lengths: Vec<usize>,
    pub per_length_count: usize,
    #[serde(default)]
    pub per_type_count: Option<usize>,
    #[serde(default)]
    pub type_filter: Option<Vec<KnotType>>,
    pub seed: u64,
}

impl ExperimentPlan {
    pub fn validate(&self) -> Result<()> {
        if self.lengths.is_empty() {
            return Err(Error::InvalidArgument("lengths must be nonempty".into()));
        }
        if self.lengths.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidArgument("lengths must be strictly increasing".into()));
        }
        if self.per_length_count < 2 || self.per_type_count.is_some_and(|c| c < 2) {
            return Err(Error::InvalidArgument("counts must be at least 2".into()));
        }
        if self.per_type_count.is_some() && self.type_filter.as_ref().is_none_or(|f| f.is_empty()) {
            return Err(Error::InvalidArgument("per_type_count needs a nonempty type_filter".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenOptions {
    pub projections: usize,
    /// Give up on a quota after this many samples per length.
    pub max_samples: usize,
}

impl Default for GenOptions {
    fn default() -> Self {
        GenOptions {
            projections: DEFAULT_PROJECTIONS,
            max_samples: 100_000,
        }
    }
}

/// Generates the plan's knots, in length order then sample order.
pub fn generate(plan: &ExperimentPlan, opts: &GenOptions) -> Result<Vec<KnotEmbedding>> {
    plan.validate()?;
    let mut out = Vec::new();
    for &length in &plan.lengths {
        let cfg = SamplerConfig::new(length, plan.per_length_count, plan.seed);
        let Some(filter) = &plan.type_filter else {
            out.extend(sampler::sample_polygons(&cfg)?);
            continue;
        };
        let mut quota: BTreeMap<KnotType, usize> = filter
            .iter()
            .map(|&t| (t, plan.per_type_count.unwrap_or(usize::MAX)))
            .collect();
        let mut kept = 0usize;
        let target_total = if plan.per_type_count.is_some() { usize::MAX } else { plan.per_length_count };
        let mut next = 0usize;
        let batch = 64usize;
        'fill: while quota.values().any(|&q| q > 0) && kept < target_total {
            if next >= opts.max_samples {
                log::warn!(
                    "length {length}: stopped after {next} samples with unmet quotas {:?}",
                    quota.iter().filter(|(_, &q)| q > 0).map(|(t, q)| format!("{t}:{q}")).collect::<Vec<_>>()
                );
                break;
            }
            let knots = sampler::sample_batch(&cfg, next, batch.min(opts.max_samples - next))?;
            next += knots.len();
            let types: Vec<KnotType> = knots
                .par_iter()
                .map(|k| classify::classify(k, opts.projections, plan.seed))
                .collect::<Result<_>>()?;
            for (k, t) in knots.into_iter().zip(types) {
                if let Some(q) = quota.get_mut(&t) {
                    if *q > 0 {
                        *q -= 1;
                        kept += 1;
                        out.push(k.with_knot_type(Some(t)));
                        if kept >= target_total {
                            break 'fill;
                        }
                    }
                }
            }
        }
    }
    Ok(out)
}

pub fn generate_trefoils(presets: &[TrefoilPreset], edges: usize) -> Result<Vec<KnotEmbedding>> {
    presets
        .iter()
        .map(|&p| Ok(sampler::preset_trefoil(p, edges)?.with_knot_type(Some(KnotType::K3_1))))
        .collect()
}

/// Classifies every knot (existing labels are replaced).
pub fn classify_all(knots: &[KnotEmbedding], projections: usize, seed: u64) -> Result<Vec<KnotEmbedding>> {
    let types: Vec<KnotType> = knots
        .par_iter()
        .map(|k| classify::classify(k, projections, seed))
        .collect::<Result<_>>()?;
    Ok(knots.iter().zip(types).map(|(k, t)| k.clone().with_knot_type(Some(t))).collect())
}

pub fn measure_all(knots: &[KnotEmbedding]) -> Result<Vec<GeometryRow>> {
    knots
        .par_iter()
        .map(|k| {
            Ok(GeometryRow {
                id: k.id.clone(),
                length: k.length(),
                knot_type: k.knot_type,
                geometry: geometry::measure(k)?,
            })
        })
        .collect()
}

pub fn barcode_of(k: &KnotEmbedding, t_max: Option<f64>) -> Result<Barcode> {
    let cloud = interpolate(k, DEFAULT_POINTS_PER_EDGE)?;
    persistence::persistence(&persistence::distance_matrix(&cloud)?, t_max)
}

pub fn barcodes_all(knots: &[KnotEmbedding], t_max: Option<f64>) -> Result<Vec<(String, Barcode)>> {
    knots
        .par_iter()
        .map(|k| Ok((k.id.clone(), barcode_of(k, t_max)?)))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeatureOptions {
    pub filter_spike: bool,
    pub spike_width: f64,
    pub spike_persistence: f64,
    pub eps_rel: f64,
}

impl Default for FeatureOptions {
    fn default() -> Self {
        FeatureOptions {
            filter_spike: false,
            spike_width: DEFAULT_SPIKE_WIDTH,
            spike_persistence: DEFAULT_SPIKE_PERSISTENCE,
            eps_rel: DEFAULT_EPS_REL,
        }
    }
}

/// Features per barcode. Length and type come from `knots` when given; otherwise
/// the length is 0 and the type empty.
pub fn features_all(
    barcodes: &[(String, Barcode)],
    knots: Option<&[KnotEmbedding]>,
    opts: &FeatureOptions,
) -> Result<Vec<FeatureRow>> {
    let info: HashMap<&str, &KnotEmbedding> = knots
        .unwrap_or(&[])
        .iter()
        .map(|k| (k.id.as_str(), k))
        .collect();
    let spike = opts.filter_spike.then_some(SpikeWindow {
        width: opts.spike_width,
        max_persistence: opts.spike_persistence,
    });
    barcodes
        .iter()
        .map(|(id, b)| {
            let k = info.get(id.as_str());
            if knots.is_some() && k.is_none() {
                return Err(Error::InvalidArgument(format!("barcode {id} has no matching knot")));
            }
            Ok(FeatureRow {
                id: id.clone(),
                length: k.map_or(0, |k| k.length()),
                knot_type: k.and_then(|k| k.knot_type),
                features: features::features(b, spike, opts.eps_rel)?,
            })
        })
        .collect()
}

/// Joins features and geometry on knot id, in feature order.
pub fn join(features: &[FeatureRow], geometry: &[GeometryRow]) -> Result<Vec<JoinedRecord>> {
    let geo: HashMap<&str, &GeometryRow> = geometry.iter().map(|g| (g.id.as_str(), g)).collect();
    features
        .iter()
        .map(|f| {
            let g = geo
                .get(f.id.as_str())
                .ok_or_else(|| Error::InvalidArgument(format!("knot {} has features but no geometry", f.id)))?;
            Ok(JoinedRecord {
                id: f.id.clone(),
                length: if f.length > 0 { f.length } else { g.length },
                knot_type: f.knot_type.or(g.knot_type),
                features: f.features.clone(),
                geometry: g.geometry,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelateOptions {
    pub group_by: GroupBy,
    pub method: Method,
    pub pairs: Vec<(Variable, Variable)>,
    /// Features averaged per knot type and length.
    pub averages: Vec<Variable>,
}

impl Default for CorrelateOptions {
    fn default() -> Self {
        CorrelateOptions {
            group_by: GroupBy::Length,
            method: Method::Pearson,
            pairs: DEFAULT_PAIRS.to_vec(),
            averages: vec![Variable::I, Variable::MaxBar, Variable::NBars],
        }
    }
}

pub fn correlate(
    records: &[JoinedRecord],
    opts: &CorrelateOptions,
) -> (stats::CorrelationTable, Vec<stats::AverageRow>) {
    let table = stats::correlate_by_group(records, opts.group_by, &opts.pairs, opts.method);
    let averages = opts
        .averages
        .iter()
        .flat_map(|&v| stats::average_feature_by_type(records, v))
        .collect();
    (table, averages)
}

/// One pipeline step. File names are relative to the work directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "stage", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Stage {
    Gen {
        lengths: Vec<usize>,
        per_length_count: usize,
        #[serde(default)]
        per_type_count: Option<usize>,
        #[serde(default)]
        type_filter: Option<Vec<KnotType>>,
        #[serde(default)]
        max_samples: Option<usize>,
        #[serde(default)]
        output: Option<String>,
    },
    GenTrefoil {
        presets: Vec<TrefoilPreset>,
        edges: usize,
        #[serde(default)]
        output: Option<String>,
    },
    Classify {
        #[serde(default)]
        projections: Option<usize>,
        #[serde(default)]
        input: Option<String>,
        #[serde(default)]
        output: Option<String>,
    },
    Measure {
        #[serde(default)]
        input: Option<String>,
        #[serde(default)]
        output: Option<String>,
    },
    Ph {
        #[serde(default)]
        t_max: Option<f64>,
        #[serde(default)]
        input: Option<String>,
        #[serde(default)]
        output: Option<String>,
    },
    Features {
        #[serde(default)]
        filter_spike: bool,
        #[serde(default)]
        eps_rel: Option<f64>,
        #[serde(default)]
        barcodes: Option<String>,
        #[serde(default)]
        knots: Option<String>,
        #[serde(default)]
        output: Option<String>,
    },
    Correlate {
        #[serde(default)]
        group_by: Option<GroupBy>,
        #[serde(default)]
        method: Option<Method>,
        #[serde(default)]
        features: Option<String>,
        #[serde(default)]
        geometry: Option<String>,
        #[serde(default)]
        output: Option<String>,
        #[serde(default)]
        averages: Option<String>,
    },
}

impl Stage {
    pub fn name(&self) -> &'static str {
        match self {
            Stage::Gen { .. } => "gen",
            Stage::GenTrefoil { .. } => "gen-trefoil",
            Stage::Classify { .. } => "classify",
            Stage::Measure { .. } => "measure",
            Stage::Ph { .. } => "ph",
            Stage::Features { .. } => "features",
            Stage::Correlate { .. } => "correlate",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelinePlan {
    pub seed: u64,
    pub stages: Vec<Stage>,
    /// Work directory; the command line may override it.
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
}

impl PipelinePlan {
    pub fn from_json(text: &str) -> Result<PipelinePlan> {
        serde_json::from_str(text).map_err(|e| Error::Parse {
            path: "plan".into(),
            line: e.line(),
            message: e.to_string(),
        })
    }

    pub fn load(path: &Path) -> Result<PipelinePlan> {
        if !path.exists() {
            return Err(Error::MissingInput(path.to_path_buf()));
        }
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(format!("reading {}", path.display()), e))?;
        serde_json::from_str(&text).map_err(|e| Error::Parse {
            path: path.display().to_string(),
            line: e.line(),
            message: e.to_string(),
        })
    }
}

/// Input and output files of each stage, resolved against earlier stages.
#[derive(Debug, Clone)]
struct Resolved {
    stage: Stage,
    inputs: Vec<String>,
    outputs: Vec<String>,
}

fn resolve(plan: &PipelinePlan) -> Result<Vec<Resolved>> {
    let mut knots: Option<String> = None;
    let mut barcodes: Option<String> = None;
    let mut features: Option<String> = None;
    let mut geometry: Option<String> = None;
    let pick = |given: &Option<String>, current: &Option<String>, default: &str| {
        given.clone().or_else(|| current.clone()).unwrap_or_else(|| default.to_string())
    };
    let mut out = Vec::new();
    for stage in &plan.stages {
        let (inputs, outputs) = match stage {
            Stage::Gen { output, .. } => {
                let o = output.clone().unwrap_or_else(|| KNOTS_FILE.into());
                knots = Some(o.clone());
                (vec![], vec![o])
            }
            Stage::GenTrefoil { output, .. } => {
                let o = output.clone().unwrap_or_else(|| TREFOILS_FILE.into());
                knots = Some(o.clone());
                (vec![], vec![o])
            }
            Stage::Classify { input, output, .. } => {
                let i = pick(input, &knots, KNOTS_FILE);
                let o = output.clone().unwrap_or_else(|| CLASSIFIED_FILE.into());
                knots = Some(o.clone());
                (vec![i], vec![o])
            }
            Stage::Measure { input, output } => {
                let i = pick(input, &knots, KNOTS_FILE);
                let o = output.clone().unwrap_or_else(|| GEOMETRY_FILE.into());
                geometry = Some(o.clone());
                (vec![i], vec![o])
            }
            Stage::Ph { input, output, .. } => {
                let i = pick(input, &knots, KNOTS_FILE);
                let o = output.clone().unwrap_or_else(|| BARCODES_FILE.into());
                barcodes = Some(o.clone());
                (vec![i], vec![o])
            }
            Stage::Features {
                barcodes: b,
                knots: k,
                output,
                ..
            } => {
                let b = pick(b, &barcodes, BARCODES_FILE);
                let k = pick(k, &knots, KNOTS_FILE);
                let o = output.clone().unwrap_or_else(|| FEATURES_FILE.into());
                features = Some(o.clone());
                (vec![b, k], vec![o])
            }
            Stage::Correlate {
                features: f,
                geometry: g,
                output,
                averages,
                ..
            } => {
                let f = pick(f, &features, FEATURES_FILE);
                let g = pick(g, &geometry, GEOMETRY_FILE);
                let o = output.clone().unwrap_or_else(|| CORRELATIONS_FILE.into());
                let a = averages.clone().unwrap_or_else(|| AVERAGES_FILE.into());
                (vec![f, g], vec![o, a])
            }
        };
        out.push(Resolved {
            stage: stage.clone(),
            inputs,
            outputs,
        });
    }
    Ok(out)
}

fn run_stage(r: &Resolved, seed: u64, dir: &Path) -> Result<()> {
    let path = |name: &str| dir.join(name);
    for i in &r.inputs {
        if !path(i).exists() {
            return Err(Error::MissingInput(path(i)));
        }
    }
    match &r.stage {
        Stage::Gen {
            lengths,
            per_length_count,
            per_type_count,
            type_filter,
            max_samples,
            ..
        } => {
            let plan = ExperimentPlan {
                lengths: lengths.clone(),
                per_length_count: *per_length_count,
                per_type_count: *per_type_count,
                type_filter: type_filter.clone(),
                seed,
            };
            let mut opts = GenOptions::default();
            if let Some(m) = max_samples {
                opts.max_samples = *m;
            }
            io::write_knots(&path(&r.outputs[0]), &generate(&plan, &opts)?)
        }
        Stage::GenTrefoil { presets, edges, .. } => {
            io::write_knots(&path(&r.outputs[0]), &generate_trefoils(presets, *edges)?)
        }
        Stage::Classify { projections, .. } => {
            let knots = io::read_knots(&path(&r.inputs[0]))?;
            let out = classify_all(&knots, projections.unwrap_or(DEFAULT_PROJECTIONS), seed)?;
            io::write_knots(&path(&r.outputs[0]), &out)
        }
        Stage::Measure { .. } => {
            let knots = io::read_knots(&path(&r.inputs[0]))?;
            io::write_geometry(&path(&r.outputs[0]), &measure_all(&knots)?)
        }
        Stage::Ph { t_max, .. } => {
            let knots = io::read_knots(&path(&r.inputs[0]))?;
            io::write_barcodes(&path(&r.outputs[0]), &barcodes_all(&knots, *t_max)?)
        }
        Stage::Features {
            filter_spike, eps_rel, ..
        } => {
            let barcodes = io::read_barcodes(&path(&r.inputs[0]))?;
            let knots = io::read_knots(&path(&r.inputs[1]))?;
            let opts = FeatureOptions {
                filter_spike: *filter_spike,
                eps_rel: eps_rel.unwrap_or(DEFAULT_EPS_REL),
                ..FeatureOptions::default()
            };
            io::write_features(&path(&r.outputs[0]), &features_all(&barcodes, Some(&knots), &opts)?)
        }
        Stage::Correlate { group_by, method, .. } => {
            let features = io::read_features(&path(&r.inputs[0]))?;
            let geometry = io::read_geometry(&path(&r.inputs[1]))?;
            let opts = CorrelateOptions {
                group_by: group_by.unwrap_or(GroupBy::Length),
                method: method.unwrap_or(Method::Pearson),
                ..CorrelateOptions::default()
            };
            let (table, averages) = correlate(&join(&features, &geometry)?, &opts);
            io::write_correlations(&path(&r.outputs[0]), &table)?;
            io::write_averages(&path(&r.outputs[1]), &averages)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub stage: String,
    pub path: String,
    pub bytes: u64,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Manifest {
    pub seed: u64,
    pub files: Vec<ManifestEntry>,
}

pub fn sha256_file(path: &Path) -> Result<(u64, String)> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(format!("reading {}", path.display()), e))?;
    Ok((bytes.len() as u64, hex::encode(Sha256::digest(&bytes))))
}

/// Runs the plan's stages in order inside `dir`, then writes `manifest.json`.
/// With `resume`, stages whose outputs all exist are skipped.
pub fn run_plan(plan: &PipelinePlan, dir: &Path, resume: bool) -> Result<Manifest> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(format!("creating {}", dir.display()), e))?;
    let stages = resolve(plan)?;
    for r in &stages {
        let done = r.outputs.iter().all(|o| dir.join(o).exists());
        if resume && done {
            log::info!("stage {}: outputs present, skipped", r.stage.name());
            continue;
        }
        log::info!("stage {}: running", r.stage.name());
        run_stage(r, plan.seed, dir).map_err(|e| Error::Stage {
            stage: r.stage.name().to_string(),
            source: Box::new(e),
        })?;
    }
    let mut files = Vec::new();
    for r in &stages {
        for o in &r.outputs {
            let (bytes, sha256) = sha256_file(&dir.join(o))?;
            files.push(ManifestEntry {
                stage: r.stage.name().to_string(),
                path: o.clone(),
                bytes,
                sha256,
            });
        }
    }
    let manifest = Manifest { seed: plan.seed, files };
    let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    std::fs::write(dir.join(MANIFEST_FILE), text + "\n")
        .map_err(|e| Error::io(format!("writing {}", dir.join(MANIFEST_FILE).display()), e))?;
    Ok(manifest)
}
