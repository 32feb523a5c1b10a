//! File formats.
//!
//! * Signal CSV: a header row of channel names, then one row per time
//!   sample with one column per channel. UTF-8, `.` as decimal point.
//! * Station CSV: header `station_id,x,y`, one row per station.
//! * Graph JSON: see [`GraphDocument`].
//! * Curve CSV: header `method,tau,mean,sd,n_realizations`; undefined
//!   scales carry the literal `undefined` in `mean` and `sd`.

use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use ndarray::Array2;

use crate::bench::TimingReport;
use crate::curve::EntropyCurve;
use crate::error::{Error, Result};
use crate::graph::{GraphDocument, StationLayout, WeightedGraph};
use crate::signal::MultivariateSignal;

fn parse_err(line: u64, column: Option<usize>, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        column,
        message: message.into(),
    }
}

fn csv_err(e: csv::Error) -> Error {
    let line = e.position().map_or(0, |p| p.line());
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        csv::ErrorKind::UnequalLengths { expected_len, len, .. } => parse_err(
            line,
            None,
            format!("expected {expected_len} fields, found {len}"),
        ),
        csv::ErrorKind::Utf8 { err, .. } => parse_err(line, Some(err.field() + 1), "invalid UTF-8"),
        other => parse_err(line, None, format!("{other:?}")),
    }
}

fn looks_numeric(field: &str) -> bool {
    field.trim().parse::<f64>().is_ok()
}

/// Reads a headered signal CSV from any reader.
pub fn read_signal_csv<R: Read>(reader: R) -> Result<MultivariateSignal> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let header = rdr.headers().map_err(csv_err)?.clone();
    if header.is_empty() || (header.len() == 1 && header[0].is_empty()) {
        return Err(parse_err(1, None, "missing header row"));
    }
    if header.iter().all(looks_numeric) {
        return Err(parse_err(1, Some(1), "missing header row: first row is numeric"));
    }
    let labels: Vec<String> = header.iter().map(str::to_string).collect();
    let p = labels.len();
    let mut columns: Vec<Vec<f64>> = vec![Vec::new(); p];
    for rec in rdr.records() {
        let rec = rec.map_err(csv_err)?;
        let line = rec.position().map_or(0, |pos| pos.line());
        for (col, field) in rec.iter().enumerate() {
            let v: f64 = field
                .parse()
                .map_err(|_| parse_err(line, Some(col + 1), format!("not a number: {field:?}")))?;
            if !v.is_finite() {
                return Err(parse_err(line, Some(col + 1), "non-finite value"));
            }
            columns[col].push(v);
        }
    }
    let n = columns[0].len();
    if n < 2 {
        return Err(parse_err(
            1,
            None,
            format!("signal needs at least 2 samples, found {n}"),
        ));
    }
    let flat: Vec<f64> = columns.into_iter().flatten().collect();
    let values = Array2::from_shape_vec((p, n), flat).map_err(|e| Error::InvalidInput(e.to_string()))?;
    MultivariateSignal::with_labels(values, labels)
}

pub fn load_signal(path: &Path) -> Result<MultivariateSignal> {
    read_signal_csv(fs::File::open(path)?)
}

/// Writes a signal CSV. Values use Rust's shortest round-trip formatting,
/// so output is byte-stable and re-reads bit-exactly.
pub fn write_signal_csv<W: Write>(signal: &MultivariateSignal, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(signal.labels()).map_err(csv_err)?;
    let values = signal.values();
    let mut row = Vec::with_capacity(signal.channels());
    for t in 0..signal.len() {
        row.clear();
        row.extend((0..signal.channels()).map(|ch| values[[ch, t]].to_string()));
        w.write_record(&row).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

pub fn save_signal(signal: &MultivariateSignal, path: &Path) -> Result<()> {
    write_signal_csv(signal, fs::File::create(path)?)
}

pub fn read_station_csv<R: Read>(reader: R) -> Result<StationLayout> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let header = rdr.headers().map_err(csv_err)?.clone();
    if header.iter().collect::<Vec<_>>() != ["station_id", "x", "y"] {
        return Err(parse_err(1, None, "expected header `station_id,x,y`"));
    }
    let mut ids = Vec::new();
    let mut positions = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(csv_err)?;
        let line = rec.position().map_or(0, |pos| pos.line());
        let coord = |col: usize| -> Result<f64> {
            let v: f64 = rec[col]
                .parse()
                .map_err(|_| parse_err(line, Some(col + 1), format!("not a number: {:?}", &rec[col])))?;
            if v.is_finite() {
                Ok(v)
            } else {
                Err(parse_err(line, Some(col + 1), "non-finite coordinate"))
            }
        };
        positions.push((coord(1)?, coord(2)?));
        ids.push(rec[0].to_string());
    }
    if positions.is_empty() {
        return Err(parse_err(1, None, "no stations"));
    }
    StationLayout::new(ids, positions)
}

pub fn load_stations(path: &Path) -> Result<StationLayout> {
    read_station_csv(fs::File::open(path)?)
}

pub fn write_station_csv<W: Write>(layout: &StationLayout, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["station_id", "x", "y"]).map_err(csv_err)?;
    for (id, (x, y)) in layout.ids().iter().zip(layout.positions()) {
        w.write_record([id.clone(), x.to_string(), y.to_string()])
            .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

pub fn parse_graph_json(text: &str) -> Result<WeightedGraph> {
    let doc: GraphDocument = serde_json::from_str(text).map_err(|e| {
        parse_err(e.line() as u64, Some(e.column()), e.to_string())
    })?;
    WeightedGraph::try_from(doc)
}

pub fn load_graph(path: &Path) -> Result<WeightedGraph> {
    parse_graph_json(&fs::read_to_string(path)?)
}

pub fn graph_to_json(graph: &WeightedGraph) -> Result<String> {
    Ok(serde_json::to_string_pretty(&GraphDocument::from(graph))?)
}

/// Writes one or more curves as a single CSV table.
pub fn write_curves_csv<W: Write>(curves: &[EntropyCurve], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["method", "tau", "mean", "sd", "n_realizations"])
        .map_err(csv_err)?;
    for curve in curves {
        for r in &curve.records {
            let fmt = |v: Option<f64>| v.map_or_else(|| "undefined".to_string(), |x| x.to_string());
            w.write_record([
                curve.method.clone(),
                r.tau.to_string(),
                fmt(r.mean),
                fmt(r.sd),
                r.n_realizations.to_string(),
            ])
            .map_err(csv_err)?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Writes the records of a timing report, one row per (method, N) cell.
/// Refused cells leave `wall_time_s` empty.
pub fn write_timing_csv<W: Write>(report: &TimingReport, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record([
        "method",
        "n",
        "p",
        "m",
        "c",
        "wall_time_s",
        "pattern_count",
        "classical_count",
        "graph_bound",
        "outcome",
    ])
    .map_err(csv_err)?;
    for r in &report.records {
        let outcome = serde_json::to_value(r.outcome)?;
        w.write_record([
            r.method.label().to_string(),
            r.n.to_string(),
            r.p.to_string(),
            r.m.to_string(),
            r.c.to_string(),
            r.wall_time_s.map_or_else(String::new, |t| t.to_string()),
            r.pattern_count.clone(),
            r.classical_count.clone(),
            r.graph_bound.clone(),
            outcome.as_str().unwrap_or_default().to_string(),
        ])
        .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

/// Writes `value` as pretty JSON.
pub fn save_json<T: serde::Serialize>(value: &T, path: &Path) -> Result<()> {
    let mut f = fs::File::create(path)?;
    serde_json::to_writer_pretty(&mut f, value)?;
    f.write_all(b"\n")?;
    Ok(())
}
