//! Correlations, regressions and grouped averages over per-knot records.

use crate::classify::KnotType;
use crate::error::{Error, Result};
use crate::features::FeatureRecord;
use crate::geometry::GeometryRecord;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Sample Pearson correlation; `None` when undefined (fewer than 2 points or zero variance).
pub fn pearson(xs: &[f64], ys: &[f64]) -> Option<f64> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return None;
    }
    let (mx, my) = (mean(xs), mean(ys));
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (&x, &y) in xs.iter().zip(ys) {
        let (dx, dy) = (x - mx, y - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return None;
    }
    Some((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

/// Average ranks (ties share the mean rank).
fn ranks(xs: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..xs.len()).collect();
    idx.sort_by(|&a, &b| xs[a].total_cmp(&xs[b]));
    let mut out = vec![0.0; xs.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && xs[idx[j + 1]] == xs[idx[i]] {
            j += 1;
        }
        let r = (i + j) as f64 / 2.0 + 1.0;
        for &k in &idx[i..=j] {
            out[k] = r;
        }
        i = j + 1;
    }
    out
}

pub fn spearman(xs: &[f64], ys: &[f64]) -> Option<f64> {
    if xs.len() != ys.len() {
        return None;
    }
    pearson(&ranks(xs), &ranks(ys))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

/// Least-squares line through `points`.
pub fn linear_fit(points: &[(f64, f64)]) -> Result<LinearFit> {
    if points.len() < 2 {
        return Err(Error::InvalidArgument("linear fit needs at least 2 points".into()));
    }
    let xs: Vec<f64> = points.iter().map(|p| p.0).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1).collect();
    let (mx, my) = (mean(&xs), mean(&ys));
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidArgument("linear fit needs distinct x values".into()));
    }
    let sxy: f64 = points.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_tot: f64 = ys.iter().map(|y| (y - my) * (y - my)).sum();
    let ss_res: f64 = points.iter().map(|(x, y)| (y - slope * x - intercept).powi(2)).sum();
    let r_squared = if ss_tot == 0.0 { 1.0 } else { 1.0 - ss_res / ss_tot };
    Ok(LinearFit {
        slope,
        intercept,
        r_squared,
    })
}

/// Per-knot variables available to the correlation stage.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Variable {
    I,
    NBars,
    MaxBar,
    DeltaEps,
    RsRadius,
    RsVolume,
    HullVolume,
    Rg,
    Acn,
    Curvature,
    Torsion,
}

impl Variable {
    pub const ALL: [Variable; 11] = [
        Variable::I,
        Variable::NBars,
        Variable::MaxBar,
        Variable::DeltaEps,
        Variable::RsRadius,
        Variable::RsVolume,
        Variable::HullVolume,
        Variable::Rg,
        Variable::Acn,
        Variable::Curvature,
        Variable::Torsion,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Variable::I => "I",
            Variable::NBars => "n_bars",
            Variable::MaxBar => "max_bar",
            Variable::DeltaEps => "delta_eps",
            Variable::RsRadius => "rs_radius",
            Variable::RsVolume => "rs_volume",
            Variable::HullVolume => "hull_volume",
            Variable::Rg => "rg",
            Variable::Acn => "acn",
            Variable::Curvature => "curvature",
            Variable::Torsion => "torsion",
        }
    }

    pub fn value(self, r: &JoinedRecord) -> Option<f64> {
        let f = &r.features;
        let g = &r.geometry;
        Some(match self {
            Variable::I => f.integral_i,
            Variable::NBars => f.n_bars as f64,
            Variable::MaxBar => f.max_bar,
            Variable::DeltaEps => return f.delta_eps,
            Variable::RsRadius => g.rs_radius,
            Variable::RsVolume => g.rs_volume,
            Variable::HullVolume => g.hull_volume,
            Variable::Rg => g.rg,
            Variable::Acn => g.acn,
            Variable::Curvature => g.total_curvature,
            Variable::Torsion => g.total_torsion,
        })
    }
}

impl fmt::Display for Variable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Variable {
    type Err = Error;

    fn from_str(s: &str) -> Result<Variable> {
        let s = match s {
            "M" => "max_bar",
            "B" | "#B" => "n_bars",
            other => other,
        };
        Variable::ALL
            .iter()
            .copied()
            .find(|v| v.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown variable {s:?}")))
    }
}

/// The correlations reported by default.
pub const DEFAULT_PAIRS: [(Variable, Variable); 8] = [
    (Variable::I, Variable::RsVolume),
    (Variable::I, Variable::HullVolume),
    (Variable::I, Variable::Rg),
    (Variable::I, Variable::Acn),
    (Variable::MaxBar, Variable::HullVolume),
    (Variable::NBars, Variable::HullVolume),
    (Variable::I, Variable::Curvature),
    (Variable::I, Variable::Torsion),
];

/// Features and geometry of one knot, joined on its id.
#[derive(Debug, Clone, PartialEq)]
pub struct JoinedRecord {
    pub id: String,
    pub length: usize,
    pub knot_type: Option<KnotType>,
    pub features: FeatureRecord,
    pub geometry: GeometryRecord,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GroupBy {
    Length,
    KnotTypeLength,
}

impl FromStr for GroupBy {
    type Err = Error;

    fn from_str(s: &str) -> Result<GroupBy> {
        match s {
            "length" => Ok(GroupBy::Length),
            "knot_type" | "knot_type,length" | "knot_type_length" => Ok(GroupBy::KnotTypeLength),
            _ => Err(Error::InvalidArgument(format!("unknown grouping {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Pearson,
    Spearman,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationRow {
    pub length: usize,
    pub group: String,
    pub x: String,
    pub y: String,
    pub r: f64,
    pub n: usize,
}

pub type CorrelationTable = Vec<CorrelationRow>;

const ALL_TYPES: &str = "all";

fn group_label(t: Option<KnotType>) -> String {
    t.map_or_else(|| "unclassified".to_string(), |t| t.label().to_string())
}

/// One row per group and pair; groups with fewer than 2 usable records, or with
/// undefined correlation, are skipped.
pub fn correlate_by_group(
    records: &[JoinedRecord],
    group_by: GroupBy,
    pairs: &[(Variable, Variable)],
    method: Method,
) -> CorrelationTable {
    let mut groups: BTreeMap<(usize, String), Vec<&JoinedRecord>> = BTreeMap::new();
    for r in records {
        let label = match group_by {
            GroupBy::Length => ALL_TYPES.to_string(),
            GroupBy::KnotTypeLength => group_label(r.knot_type),
        };
        groups.entry((r.length, label)).or_default().push(r);
    }
    let mut rows = Vec::new();
    for ((length, label), members) in &groups {
        for &(x, y) in pairs {
            let (xs, ys): (Vec<f64>, Vec<f64>) = members
                .iter()
                .filter_map(|r| Some((x.value(r)?, y.value(r)?)))
                .unzip();
            if xs.len() < 2 {
                log::warn!("group ({length}, {label}) has fewer than 2 records for {x}/{y}; skipped");
                continue;
            }
            let r = match method {
                Method::Pearson => pearson(&xs, &ys),
                Method::Spearman => spearman(&xs, &ys),
            };
            match r {
                Some(r) => rows.push(CorrelationRow {
                    length: *length,
                    group: label.clone(),
                    x: x.name().to_string(),
                    y: y.name().to_string(),
                    r,
                    n: xs.len(),
                }),
                None => log::warn!("correlation of {x}/{y} undefined in group ({length}, {label}); skipped"),
            }
        }
    }
    rows
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AverageRow {
    pub knot_type: String,
    pub length: usize,
    pub feature: String,
    pub mean: f64,
    pub stderr: f64,
    pub n: usize,
}

/// Mean and standard error of a per-knot value, grouped by knot type and length.
pub fn average_by_type<'a, T: 'a>(
    items: impl IntoIterator<Item = &'a T>,
    key: impl Fn(&T) -> (Option<KnotType>, usize),
    value: impl Fn(&T) -> Option<f64>,
    feature: &str,
) -> Vec<AverageRow> {
    let mut groups: BTreeMap<(Option<KnotType>, usize), Vec<f64>> = BTreeMap::new();
    for it in items {
        if let Some(v) = value(it) {
            groups.entry(key(it)).or_default().push(v);
        }
    }
    groups
        .into_iter()
        .map(|((t, length), vs)| {
            let n = vs.len();
            let m = mean(&vs);
            let stderr = if n < 2 {
                0.0
            } else {
                let var = vs.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (n - 1) as f64;
                (var / n as f64).sqrt()
            };
            AverageRow {
                knot_type: group_label(t),
                length,
                feature: feature.to_string(),
                mean: m,
                stderr,
                n,
            }
        })
        .collect()
}

pub fn average_feature_by_type(records: &[JoinedRecord], feature: Variable) -> Vec<AverageRow> {
    average_by_type(records, |r| (r.knot_type, r.length), |r| feature.value(r), feature.name())
}
