//! File formats: knots as JSON Lines, everything tabular as CSV.
//!
//! Floating values are written in the shortest form that parses back to the
//! same value, so parse → write → parse is the identity.

use crate::classify::KnotType;
use crate::error::{Error, Result};
use crate::features::{BettiCurve, FeatureRecord};
use crate::geometry::GeometryRecord;
use crate::model::KnotEmbedding;
use crate::persistence::{Bar, Barcode, Scale};
use crate::stats::{AverageRow, CorrelationRow};
use crate::vec3::Vec3;
use serde::{Deserialize, Serialize};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

fn open(path: &Path) -> Result<File> {
    if !path.exists() {
        return Err(Error::MissingInput(path.to_path_buf()));
    }
    File::open(path).map_err(|e| Error::io(format!("opening {}", path.display()), e))
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(format!("creating {}", dir.display()), e))?;
    }
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Error::io(format!("creating {}", path.display()), e))
}

fn parse_error(source: &str, line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        path: source.to_string(),
        line,
        message: message.into(),
    }
}

#[derive(Serialize, Deserialize)]
struct KnotLine {
    id: String,
    seed: u64,
    length: usize,
    knot_type: Option<KnotType>,
    vertices: Vec<[f64; 3]>,
}

pub fn write_knots_to<W: Write>(mut w: W, knots: &[KnotEmbedding]) -> Result<()> {
    for k in knots {
        let line = KnotLine {
            id: k.id.clone(),
            seed: k.seed,
            length: k.length(),
            knot_type: k.knot_type,
            vertices: k.vertices.iter().map(|v| v.to_array()).collect(),
        };
        serde_json::to_writer(&mut w, &line).map_err(|e| Error::io("writing knots", e.into()))?;
        w.write_all(b"\n").map_err(|e| Error::io("writing knots", e))?;
    }
    w.flush().map_err(|e| Error::io("writing knots", e))
}

/// Reads knots; every record is validated. `source` names the input in errors.
pub fn read_knots_from<R: BufRead>(r: R, source: &str) -> Result<Vec<KnotEmbedding>> {
    let mut out = Vec::new();
    for (i, line) in r.lines().enumerate() {
        let line_no = i + 1;
        let line = line.map_err(|e| Error::io(format!("reading {source}"), e))?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: KnotLine = serde_json::from_str(&line).map_err(|e| parse_error(source, line_no, e.to_string()))?;
        if rec.length != rec.vertices.len() {
            return Err(parse_error(
                source,
                line_no,
                format!("length {} does not match {} vertices", rec.length, rec.vertices.len()),
            ));
        }
        let vertices = rec.vertices.iter().map(|&[x, y, z]| Vec3::new(x, y, z)).collect();
        let k = KnotEmbedding::new_unchecked(rec.id, vertices, rec.seed).with_knot_type(rec.knot_type);
        k.check().map_err(|e| parse_error(source, line_no, e.to_string()))?;
        out.push(k);
    }
    Ok(out)
}

pub fn write_knots(path: &Path, knots: &[KnotEmbedding]) -> Result<()> {
    write_knots_to(create(path)?, knots)
}

pub fn read_knots(path: &Path) -> Result<Vec<KnotEmbedding>> {
    read_knots_from(BufReader::new(open(path)?), &path.display().to_string())
}

fn type_field(t: Option<KnotType>) -> String {
    t.map_or_else(String::new, |t| t.label().to_string())
}

fn csv_writer<W: Write>(w: W, header: &[&str]) -> Result<csv::Writer<W>> {
    let mut wr = csv::WriterBuilder::new().from_writer(w);
    wr.write_record(header).map_err(csv_write_error)?;
    Ok(wr)
}

fn csv_write_error(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io("writing csv", io),
        other => Error::InvalidArgument(format!("csv: {other:?}")),
    }
}

/// CSV rows with their 1-based line numbers, after checking the header.
fn csv_rows<R: Read>(r: R, source: &str, header: &[&str]) -> Result<Vec<(usize, csv::StringRecord)>> {
    let mut rd = csv::ReaderBuilder::new().has_headers(true).flexible(false).from_reader(r);
    let got = rd.headers().map_err(|e| parse_error(source, 1, e.to_string()))?.clone();
    if got.iter().collect::<Vec<_>>() != header {
        return Err(parse_error(
            source,
            1,
            format!("expected columns {}, found {}", header.join(","), got.iter().collect::<Vec<_>>().join(",")),
        ));
    }
    let mut out = Vec::new();
    for rec in rd.records() {
        match rec {
            Ok(rec) => {
                let line = rec.position().map_or(0, |p| p.line() as usize);
                out.push((line, rec));
            }
            Err(e) => {
                let line = e.position().map_or(0, |p| p.line() as usize);
                let message = match e.kind() {
                    csv::ErrorKind::UnequalLengths { expected_len, len, .. } => {
                        format!("expected {expected_len} columns, found {len}")
                    }
                    _ => e.to_string(),
                };
                return Err(parse_error(source, line, message));
            }
        }
    }
    Ok(out)
}

struct Fields<'a> {
    rec: &'a csv::StringRecord,
    line: usize,
    source: &'a str,
    header: &'a [&'a str],
}

impl Fields<'_> {
    fn str(&self, i: usize) -> &str {
        &self.rec[i]
    }

    fn parse<T: std::str::FromStr>(&self, i: usize) -> Result<T>
    where
        T::Err: std::fmt::Display,
    {
        self.rec[i]
            .parse()
            .map_err(|e| parse_error(self.source, self.line, format!("column {}: {e}", self.header[i])))
    }

    fn knot_type(&self, i: usize) -> Result<Option<KnotType>> {
        if self.rec[i].is_empty() {
            Ok(None)
        } else {
            self.parse(i).map(Some)
        }
    }
}

fn read_table<R: Read, T>(
    r: R,
    source: &str,
    header: &[&str],
    mut row: impl FnMut(&Fields) -> Result<T>,
) -> Result<Vec<T>> {
    csv_rows(r, source, header)?
        .iter()
        .map(|(line, rec)| {
            row(&Fields {
                rec,
                line: *line,
                source,
                header,
            })
        })
        .collect()
}

/// Geometry of one knot as stored in `geometry.csv`.
#[derive(Debug, Clone, PartialEq)]
pub struct GeometryRow {
    pub id: String,
    pub length: usize,
    pub knot_type: Option<KnotType>,
    pub geometry: GeometryRecord,
}

pub const GEOMETRY_HEADER: [&str; 10] = [
    "id",
    "length",
    "knot_type",
    "rs_volume",
    "hull_volume",
    "rg",
    "curvature",
    "torsion",
    "acn",
    "rs_radius",
];

pub fn write_geometry_to<W: Write>(w: W, rows: &[GeometryRow]) -> Result<()> {
    let mut wr = csv_writer(w, &GEOMETRY_HEADER)?;
    for r in rows {
        let g = &r.geometry;
        wr.write_record([
            r.id.clone(),
            r.length.to_string(),
            type_field(r.knot_type),
            g.rs_volume.to_string(),
            g.hull_volume.to_string(),
            g.rg.to_string(),
            g.total_curvature.to_string(),
            g.total_torsion.to_string(),
            g.acn.to_string(),
            g.rs_radius.to_string(),
        ])
        .map_err(csv_write_error)?;
    }
    wr.flush().map_err(|e| Error::io("writing csv", e))
}

pub fn read_geometry_from<R: Read>(r: R, source: &str) -> Result<Vec<GeometryRow>> {
    read_table(r, source, &GEOMETRY_HEADER, |f| {
        Ok(GeometryRow {
            id: f.str(0).to_string(),
            length: f.parse(1)?,
            knot_type: f.knot_type(2)?,
            geometry: GeometryRecord {
                rs_volume: f.parse(3)?,
                hull_volume: f.parse(4)?,
                rg: f.parse(5)?,
                total_curvature: f.parse(6)?,
                total_torsion: f.parse(7)?,
                acn: f.parse(8)?,
                rs_radius: f.parse(9)?,
            },
        })
    })
}

pub fn write_geometry(path: &Path, rows: &[GeometryRow]) -> Result<()> {
    write_geometry_to(create(path)?, rows)
}

pub fn read_geometry(path: &Path) -> Result<Vec<GeometryRow>> {
    read_geometry_from(open(path)?, &path.display().to_string())
}

pub const BARCODE_HEADER: [&str; 4] = ["knot_id", "dim", "birth", "death"];

pub fn write_barcodes_to<W: Write>(w: W, barcodes: &[(String, Barcode)]) -> Result<()> {
    let mut wr = csv_writer(w, &BARCODE_HEADER)?;
    for (id, b) in barcodes {
        for (dim, bars) in [(0, &b.dim0), (1, &b.dim1)] {
            for bar in bars.iter() {
                wr.write_record([id.clone(), dim.to_string(), bar.birth.to_string(), bar.death.to_string()])
                    .map_err(csv_write_error)?;
            }
        }
    }
    wr.flush().map_err(|e| Error::io("writing csv", e))
}

/// Barcodes in order of first appearance. Values are in filtration-distance units.
pub fn read_barcodes_from<R: Read>(r: R, source: &str) -> Result<Vec<(String, Barcode)>> {
    let rows = read_table(r, source, &BARCODE_HEADER, |f| {
        let dim: usize = f.parse(1)?;
        if dim > 1 {
            return Err(parse_error(source, f.line, format!("unsupported dimension {dim}")));
        }
        let bar = Bar::new(f.parse(2)?, f.parse(3)?);
        if !(bar.birth <= bar.death) {
            return Err(parse_error(source, f.line, "birth exceeds death"));
        }
        Ok((f.str(0).to_string(), dim, bar))
    })?;
    let mut out: Vec<(String, Barcode)> = Vec::new();
    let mut index = std::collections::HashMap::new();
    for (id, dim, bar) in rows {
        let slot = *index.entry(id.clone()).or_insert_with(|| {
            out.push((id, Barcode::empty(Scale::Diameter)));
            out.len() - 1
        });
        let b = &mut out[slot].1;
        if dim == 0 {
            b.dim0.push(bar);
        } else {
            b.dim1.push(bar);
        }
    }
    Ok(out)
}

pub fn write_barcodes(path: &Path, barcodes: &[(String, Barcode)]) -> Result<()> {
    write_barcodes_to(create(path)?, barcodes)
}

pub fn read_barcodes(path: &Path) -> Result<Vec<(String, Barcode)>> {
    read_barcodes_from(open(path)?, &path.display().to_string())
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureRow {
    pub id: String,
    pub length: usize,
    pub knot_type: Option<KnotType>,
    pub features: FeatureRecord,
}

pub const FEATURE_HEADER: [&str; 8] = [
    "id",
    "length",
    "knot_type",
    "integral_I",
    "n_bars",
    "max_bar",
    "delta_eps",
    "spike_filtered",
];

pub fn write_features_to<W: Write>(w: W, rows: &[FeatureRow]) -> Result<()> {
    let mut wr = csv_writer(w, &FEATURE_HEADER)?;
    for r in rows {
        let f = &r.features;
        wr.write_record([
            r.id.clone(),
            r.length.to_string(),
            type_field(r.knot_type),
            f.integral_i.to_string(),
            f.n_bars.to_string(),
            f.max_bar.to_string(),
            f.delta_eps.map_or_else(String::new, |d| d.to_string()),
            f.spike_filtered.to_string(),
        ])
        .map_err(csv_write_error)?;
    }
    wr.flush().map_err(|e| Error::io("writing csv", e))
}

pub fn read_features_from<R: Read>(r: R, source: &str) -> Result<Vec<FeatureRow>> {
    read_table(r, source, &FEATURE_HEADER, |f| {
        Ok(FeatureRow {
            id: f.str(0).to_string(),
            length: f.parse(1)?,
            knot_type: f.knot_type(2)?,
            features: FeatureRecord {
                integral_i: f.parse(3)?,
                n_bars: f.parse(4)?,
                max_bar: f.parse(5)?,
                delta_eps: if f.str(6).is_empty() { None } else { Some(f.parse(6)?) },
                spike_filtered: f.parse(7)?,
            },
        })
    })
}

pub fn write_features(path: &Path, rows: &[FeatureRow]) -> Result<()> {
    write_features_to(create(path)?, rows)
}

pub fn read_features(path: &Path) -> Result<Vec<FeatureRow>> {
    read_features_from(open(path)?, &path.display().to_string())
}

pub const CORRELATION_HEADER: [&str; 6] = ["length", "group", "x", "y", "pearson_r", "n"];

pub fn write_correlations_to<W: Write>(w: W, rows: &[CorrelationRow]) -> Result<()> {
    let mut wr = csv_writer(w, &CORRELATION_HEADER)?;
    for r in rows {
        wr.write_record([
            r.length.to_string(),
            r.group.clone(),
            r.x.clone(),
            r.y.clone(),
            r.r.to_string(),
            r.n.to_string(),
        ])
        .map_err(csv_write_error)?;
    }
    wr.flush().map_err(|e| Error::io("writing csv", e))
}

pub fn read_correlations_from<R: Read>(r: R, source: &str) -> Result<Vec<CorrelationRow>> {
    read_table(r, source, &CORRELATION_HEADER, |f| {
        Ok(CorrelationRow {
            length: f.parse(0)?,
            group: f.str(1).to_string(),
            x: f.str(2).to_string(),
            y: f.str(3).to_string(),
            r: f.parse(4)?,
            n: f.parse(5)?,
        })
    })
}

pub fn write_correlations(path: &Path, rows: &[CorrelationRow]) -> Result<()> {
    write_correlations_to(create(path)?, rows)
}

pub fn read_correlations(path: &Path) -> Result<Vec<CorrelationRow>> {
    read_correlations_from(open(path)?, &path.display().to_string())
}

pub const AVERAGE_HEADER: [&str; 6] = ["knot_type", "length", "feature", "mean", "stderr", "n"];

pub fn write_averages_to<W: Write>(w: W, rows: &[AverageRow]) -> Result<()> {
    let mut wr = csv_writer(w, &AVERAGE_HEADER)?;
    for r in rows {
        wr.write_record([
            r.knot_type.clone(),
            r.length.to_string(),
            r.feature.clone(),
            r.mean.to_string(),
            r.stderr.to_string(),
            r.n.to_string(),
        ])
        .map_err(csv_write_error)?;
    }
    wr.flush().map_err(|e| Error::io("writing csv", e))
}

pub fn read_averages_from<R: Read>(r: R, source: &str) -> Result<Vec<AverageRow>> {
    read_table(r, source, &AVERAGE_HEADER, |f| {
        Ok(AverageRow {
            knot_type: f.str(0).to_string(),
            length: f.parse(1)?,
            feature: f.str(2).to_string(),
            mean: f.parse(3)?,
            stderr: f.parse(4)?,
            n: f.parse(5)?,
        })
    })
}

pub fn write_averages(path: &Path, rows: &[AverageRow]) -> Result<()> {
    write_averages_to(create(path)?, rows)
}

pub fn read_averages(path: &Path) -> Result<Vec<AverageRow>> {
    read_averages_from(open(path)?, &path.display().to_string())
}

/// Breakpoints `(t, value)` of a curve, for plotting.
pub fn write_curve_to<W: Write>(w: W, curve: &BettiCurve) -> Result<()> {
    let mut wr = csv_writer(w, &["t", "value"])?;
    for &(t, v) in &curve.breakpoints {
        wr.write_record([t.to_string(), v.to_string()]).map_err(csv_write_error)?;
    }
    wr.flush().map_err(|e| Error::io("writing csv", e))
}

pub fn write_curve(path: &Path, curve: &BettiCurve) -> Result<()> {
    write_curve_to(create(path)?, curve)
}
