//! CSV layouts for streams, step records, summaries and the sensitivity grid.
//!
//! Floats are written in Rust's shortest round-trip form, booleans as 0/1,
//! multi-output values joined with `;`. Nothing time-dependent is written, so
//! equal inputs give byte-identical files.

use std::path::Path;

use alternating_core::experiment::GridCell;
use alternating_core::metrics::RunSummary;
use alternating_core::prequential::{Selector, StepRecord};
use alternating_core::{Matrix, Stream};

use crate::error::{Error, Result};

fn writer(path: &Path) -> Result<csv::Writer<std::fs::File>> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(Error::io(dir))?;
    }
    csv::Writer::from_path(path).map_err(Error::csv(path))
}

fn write_rows<I, R>(path: &Path, header: &[&str], rows: I) -> Result<()>
where
    I: IntoIterator<Item = R>,
    R: IntoIterator<Item = String>,
{
    let mut w = writer(path)?;
    w.write_record(header).map_err(Error::csv(path))?;
    for row in rows {
        w.write_record(row.into_iter().collect::<Vec<_>>()).map_err(Error::csv(path))?;
    }
    w.flush().map_err(Error::io(path))
}

fn join(values: &[f64]) -> String {
    values.iter().map(f64::to_string).collect::<Vec<_>>().join(";")
}

fn join_usize(values: &[usize]) -> String {
    values.iter().map(usize::to_string).collect::<Vec<_>>().join(";")
}

fn bit(b: bool) -> String {
    if b { "1" } else { "0" }.to_string()
}

/// Columns `t, x1..xd, y` (or `y1..yk`), plus `eta_true` when given.
pub fn write_stream(path: &Path, stream: &Stream, eta: Option<&[f64]>) -> Result<()> {
    let (d, k) = (stream.input_dim(), stream.output_dim());
    let mut header: Vec<String> = vec!["t".into()];
    header.extend((1..=d).map(|j| format!("x{j}")));
    if k == 1 {
        header.push("y".into());
    } else {
        header.extend((1..=k).map(|j| format!("y{j}")));
    }
    if eta.is_some() {
        header.push("eta_true".into());
    }
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    let rows = (0..stream.len()).map(|t| {
        let mut row = vec![t.to_string()];
        row.extend(stream.inputs().row(t).iter().map(f64::to_string));
        row.extend(stream.targets().row(t).iter().map(f64::to_string));
        if let Some(e) = eta {
            row.push(e[t].to_string());
        }
        row
    });
    write_rows(path, &header, rows)
}

/// Reads a stream written by [`write_stream`] or any CSV with `x*` input
/// columns and `y`/`y*` target columns; `t` and `eta_true` are optional.
pub fn read_stream(path: &Path) -> Result<(Stream, Option<Vec<f64>>)> {
    let fail = |msg: String| Error::Format { path: path.to_path_buf(), msg };
    let mut rdr = csv::Reader::from_path(path).map_err(Error::csv(path))?;
    let header = rdr.headers().map_err(Error::csv(path))?.clone();
    let is_numbered = |h: &str, p: char| h.starts_with(p) && h.len() > 1 && h[1..].chars().all(|c| c.is_ascii_digit());
    let xs: Vec<usize> = header.iter().enumerate().filter(|(_, h)| is_numbered(h, 'x')).map(|(i, _)| i).collect();
    let ys: Vec<usize> = header.iter().enumerate().filter(|(_, h)| *h == "y" || is_numbered(h, 'y')).map(|(i, _)| i).collect();
    let eta_col = header.iter().position(|h| h == "eta_true");
    if xs.is_empty() || ys.is_empty() {
        return Err(fail("need at least one x<n> column and a y column".into()));
    }
    let (mut xdata, mut ydata, mut eta) = (Vec::new(), Vec::new(), Vec::new());
    let mut n = 0;
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(Error::csv(path))?;
        let num = |i: usize| -> Result<f64> {
            let v = rec.get(i).unwrap_or("");
            v.trim().parse::<f64>().map_err(|_| fail(format!("row {}: column {} is not a number: {v:?}", line + 1, &header[i])))
        };
        for &i in &xs {
            xdata.push(num(i)?);
        }
        for &i in &ys {
            ydata.push(num(i)?);
        }
        if let Some(i) = eta_col {
            eta.push(num(i)?);
        }
        n += 1;
    }
    if n == 0 {
        return Err(fail("no data rows".into()));
    }
    let stream = Stream::new(Matrix::from_vec(n, xs.len(), xdata)?, Matrix::from_vec(n, ys.len(), ydata)?)?;
    Ok((stream, eta_col.map(|_| eta)))
}

pub const RECORD_HEADER: [&str; 8] = ["index", "y_true", "y_pred", "err_L", "err_S", "q_bit", "reset", "selector"];

pub fn write_records(path: &Path, records: &[StepRecord]) -> Result<()> {
    let rows = records.iter().map(|r| {
        vec![
            r.index.to_string(),
            join(&r.y_true),
            join(&r.y_pred),
            r.err_l.to_string(),
            r.err_s.map_or_else(String::new, |e| e.to_string()),
            r.q_bit.map_or_else(String::new, bit),
            bit(r.reset),
            r.selector.as_str().to_string(),
        ]
    });
    write_rows(path, &RECORD_HEADER, rows)
}

/// The subset of a record CSV needed to rescore a run.
#[derive(Debug, Clone, PartialEq)]
pub struct RecordRow {
    pub index: usize,
    pub y_true: Vec<f64>,
    pub y_pred: Vec<f64>,
    pub reset: bool,
    pub selector: Selector,
}

pub fn read_records(path: &Path) -> Result<Vec<RecordRow>> {
    let fail = |msg: String| Error::Format { path: path.to_path_buf(), msg };
    let mut rdr = csv::Reader::from_path(path).map_err(Error::csv(path))?;
    let header = rdr.headers().map_err(Error::csv(path))?.clone();
    if header.iter().collect::<Vec<_>>() != RECORD_HEADER {
        return Err(fail(format!("unexpected header, want {}", RECORD_HEADER.join(","))));
    }
    let mut rows = Vec::new();
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(Error::csv(path))?;
        let bad = |what: &str| fail(format!("row {}: bad {what}", line + 1));
        let floats = |s: &str, what: &str| -> Result<Vec<f64>> {
            s.split(';').map(|v| v.parse::<f64>().map_err(|_| bad(what))).collect()
        };
        rows.push(RecordRow {
            index: rec[0].parse().map_err(|_| bad("index"))?,
            y_true: floats(&rec[1], "y_true")?,
            y_pred: floats(&rec[2], "y_pred")?,
            reset: match &rec[6] {
                "1" => true,
                "0" => false,
                _ => return Err(bad("reset")),
            },
            selector: rec[7].parse().map_err(|_| bad("selector"))?,
        });
    }
    Ok(rows)
}

/// One line of `per_stream.csv`.
#[derive(Debug, Clone, PartialEq)]
pub struct PerStreamRow {
    pub algorithm: String,
    pub stream_id: String,
    pub kind: String,
    pub mean_mape: f64,
    pub reset_indices: Vec<usize>,
}

pub fn write_per_stream(path: &Path, rows: &[PerStreamRow]) -> Result<()> {
    let rows = rows.iter().map(|r| {
        vec![
            r.algorithm.clone(),
            r.stream_id.clone(),
            r.kind.clone(),
            r.mean_mape.to_string(),
            r.reset_indices.len().to_string(),
            join_usize(&r.reset_indices),
        ]
    });
    write_rows(path, &["algorithm", "stream_id", "kind", "mean_mape", "n_resets", "reset_indices"], rows)
}

pub fn write_summary(path: &Path, summaries: &[RunSummary]) -> Result<()> {
    let rows = summaries.iter().map(|s| {
        vec![s.algorithm.clone(), s.n_streams.to_string(), s.mean.to_string(), s.sd.to_string(), s.total_resets.to_string()]
    });
    write_rows(path, &["algorithm", "n_streams", "mean_mape", "sd_mape", "total_resets"], rows)
}

/// Long format: one line per (δ, W, stream).
pub fn write_sensitivity(path: &Path, cells: &[GridCell], stream_ids: &[String]) -> Result<()> {
    let rows = cells.iter().flat_map(|c| {
        c.per_stream
            .iter()
            .zip(stream_ids)
            .map(move |(m, id)| vec![c.delta.to_string(), c.window.to_string(), id.clone(), m.to_string()])
    });
    write_rows(path, &["delta", "W", "stream_id", "mape"], rows)
}

/// One box-plot row per (δ, W) cell.
pub fn write_sensitivity_summary(path: &Path, cells: &[GridCell]) -> Result<()> {
    let rows = cells.iter().map(|c| {
        let s = &c.summary;
        vec![
            c.delta.to_string(),
            c.window.to_string(),
            s.n.to_string(),
            s.min.to_string(),
            s.q1.to_string(),
            s.median.to_string(),
            s.q3.to_string(),
            s.max.to_string(),
            s.mean.to_string(),
        ]
    });
    write_rows(path, &["delta", "W", "n", "min", "q1", "median", "q3", "max", "mean"], rows)
}
