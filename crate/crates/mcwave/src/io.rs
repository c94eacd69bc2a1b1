//! File formats: CSV matrices and signals, edge lists, run outputs.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use mcwave_core::spaces::{SignalTag, SpectralSignal};
use mcwave_core::{Matrix, WaveletCoefficients, WeightedGraph};

use crate::error::{AppError, AppResult};
use crate::experiment::{RateResult, RunMetadata, TrialRow};

fn reader(path: &Path) -> AppResult<csv::Reader<File>> {
    csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .flexible(true)
        .from_path(path)
        .map_err(|e| AppError::csv(path, e))
}

fn writer(path: &Path) -> AppResult<csv::Writer<File>> {
    csv::Writer::from_path(path).map_err(|e| AppError::csv(path, e))
}

/// Numeric rows of a headerless CSV file. Blank lines and `#` comments are skipped.
pub fn read_numeric_rows(path: &Path) -> AppResult<Vec<Vec<f64>>> {
    let mut out = Vec::new();
    for (line, rec) in reader(path)?.records().enumerate() {
        let rec = rec.map_err(|e| AppError::csv(path, e))?;
        let row = rec
            .iter()
            .map(|f| {
                f.parse::<f64>().map_err(|_| {
                    AppError::parse(path, format!("record {}: `{f}` is not a number", line + 1))
                })
            })
            .collect::<AppResult<Vec<_>>>()?;
        if !row.is_empty() {
            out.push(row);
        }
    }
    Ok(out)
}

pub fn read_matrix(path: &Path) -> AppResult<Matrix> {
    let rows = read_numeric_rows(path)?;
    if rows.is_empty() {
        return Err(AppError::parse(path, "matrix file is empty"));
    }
    Matrix::from_rows(&rows).map_err(|e| AppError::parse(path, e.to_string()))
}

pub fn write_matrix(path: &Path, m: &Matrix) -> AppResult<()> {
    let mut w = writer(path)?;
    for i in 0..m.rows() {
        w.write_record(m.row(i).iter().map(|v| v.to_string()))
            .map_err(|e| AppError::csv(path, e))?;
    }
    w.flush().map_err(|e| AppError::io(path, e))
}

/// A signal file: one value per line, or the first column of each record.
pub fn read_vector(path: &Path) -> AppResult<Vec<f64>> {
    let rows = read_numeric_rows(path)?;
    if rows.iter().any(|r| r.len() != 1) {
        return Err(AppError::parse(path, "expected one value per line"));
    }
    Ok(rows.into_iter().map(|r| r[0]).collect())
}

pub fn write_vector(path: &Path, v: &[f64]) -> AppResult<()> {
    let mut w = writer(path)?;
    for x in v {
        w.write_record([x.to_string()])
            .map_err(|e| AppError::csv(path, e))?;
    }
    w.flush().map_err(|e| AppError::io(path, e))
}

/// Spectral signal file with `lambda,coeff` records.
pub fn read_spectral_signal(path: &Path, tag: SignalTag) -> AppResult<SpectralSignal> {
    let rows = read_numeric_rows(path)?;
    if rows.iter().any(|r| r.len() != 2) {
        return Err(AppError::parse(path, "expected `lambda,coeff` records"));
    }
    let (l, c) = rows.into_iter().map(|r| (r[0], r[1])).unzip();
    SpectralSignal::new(l, c, tag).map_err(|e| AppError::parse(path, e.to_string()))
}

/// Edge list with one `i k w` triple per line (whitespace or comma separated).
/// Vertices are zero-based; the vertex count is `max index + 1` unless given.
/// Duplicate edges are rejected.
pub fn read_edge_list(path: &Path, vertices: Option<usize>) -> AppResult<WeightedGraph> {
    let file = File::open(path).map_err(|e| AppError::io(path, e))?;
    let mut edges = Vec::new();
    let mut seen = std::collections::HashSet::new();
    for (ln, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| AppError::io(path, e))?;
        let body = line.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let fields: Vec<&str> = body
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|s| !s.is_empty())
            .collect();
        let bad = |m: &str| AppError::parse(path, format!("line {}: {m}", ln + 1));
        if fields.len() != 3 {
            return Err(bad("expected `i k w`"));
        }
        let i: usize = fields[0].parse().map_err(|_| bad("bad vertex index"))?;
        let k: usize = fields[1].parse().map_err(|_| bad("bad vertex index"))?;
        let w: f64 = fields[2].parse().map_err(|_| bad("bad weight"))?;
        if !seen.insert((i.min(k), i.max(k))) {
            return Err(bad(&format!("duplicate edge {i} {k}")));
        }
        edges.push((i, k, w));
    }
    let n = vertices.unwrap_or_else(|| {
        edges
            .iter()
            .map(|&(i, k, _)| i.max(k) + 1)
            .max()
            .unwrap_or(0)
    });
    Ok(WeightedGraph::new(n, edges)?)
}

/// Wavelet coefficients as `j,k,value` records.
pub fn write_coefficients(path: &Path, c: &WaveletCoefficients) -> AppResult<()> {
    let mut w = writer(path)?;
    w.write_record(["j", "k", "value"])
        .map_err(|e| AppError::csv(path, e))?;
    for (j, row) in c.coeffs.iter().enumerate() {
        for (k, v) in row.iter().enumerate() {
            w.write_record([j.to_string(), k.to_string(), v.to_string()])
                .map_err(|e| AppError::csv(path, e))?;
        }
    }
    w.flush().map_err(|e| AppError::io(path, e))
}

pub fn write_rows(path: &Path, rows: &[TrialRow]) -> AppResult<()> {
    let file = File::create(path).map_err(|e| AppError::io(path, e))?;
    write_rows_to(file, rows).map_err(|e| AppError::csv(path, e))
}

/// Serializes rows with a header, which is written even when there are no rows.
pub fn write_rows_to<W: Write>(out: W, rows: &[TrialRow]) -> Result<(), csv::Error> {
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(out);
    w.write_record(["N", "trial", "tau", "err_h", "err_rho", "eff_rank", "seed"])?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_rows(path: &Path) -> AppResult<Vec<TrialRow>> {
    let mut r = csv::Reader::from_path(path).map_err(|e| AppError::csv(path, e))?;
    r.deserialize()
        .collect::<Result<Vec<TrialRow>, _>>()
        .map_err(|e| AppError::csv(path, e))
}

fn percent(q: f64) -> String {
    format!("q{}", (q * 100.0).round() as i64)
}

pub fn write_summary(path: &Path, result: &RateResult) -> AppResult<()> {
    let file = File::create(path).map_err(|e| AppError::io(path, e))?;
    write_summary_to(BufWriter::new(file), result).map_err(|e| AppError::csv(path, e))
}

/// Summary table; the fitted and theoretical slopes are repeated on every row.
pub fn write_summary_to<W: Write>(out: W, res: &RateResult) -> Result<(), csv::Error> {
    let (lo, hi) = (percent(res.band.0), percent(res.band.1));
    let mut w = csv::WriterBuilder::new().from_writer(out);
    w.write_record([
        "N".to_string(),
        "median_h".into(),
        format!("{lo}_h"),
        format!("{hi}_h"),
        "median_rho".into(),
        format!("{lo}_rho"),
        format!("{hi}_rho"),
        "tau".into(),
        "slope_h".into(),
        "theory_h".into(),
        "slope_rho".into(),
        "theory_rho".into(),
    ])?;
    for s in &res.summary {
        w.write_record([
            s.n.to_string(),
            s.median_h.to_string(),
            s.lo_h.to_string(),
            s.hi_h.to_string(),
            s.median_rho.to_string(),
            s.lo_rho.to_string(),
            s.hi_rho.to_string(),
            s.tau.to_string(),
            res.fit_h.slope.to_string(),
            res.fit_h.theoretical.to_string(),
            res.fit_rho.slope.to_string(),
            res.fit_rho.theoretical.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_metadata(path: &Path, meta: &RunMetadata) -> AppResult<()> {
    let text = toml::to_string_pretty(meta)
        .map_err(|e| AppError::parse(path, format!("metadata serialization: {e}")))?;
    std::fs::write(path, text).map_err(|e| AppError::io(path, e))
}
