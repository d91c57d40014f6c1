use std::fs::File;
use std::io::Write;
use std::path::Path;

use nalgebra::DMatrix;

use crate::tasks::Trace;
use crate::{Error, Result};

/// Writes labelled columns with a leading `t` column counting rows from 0.
pub fn emit_csv<S: AsRef<str>>(path: impl AsRef<Path>, labels: &[S], columns: &[Vec<f64>]) -> Result<()> {
    let len = columns.first().map_or(0, Vec::len);
    let t: Vec<f64> = (0..len).map(|k| k as f64).collect();
    let mut all_labels = vec!["t"];
    all_labels.extend(labels.iter().map(AsRef::as_ref));
    let mut all = Vec::with_capacity(columns.len() + 1);
    all.push(t.as_slice());
    all.extend(columns.iter().map(Vec::as_slice));
    write_columns(path.as_ref(), &all_labels, &all)
}

/// Writes each row of `m` (e.g. one neuron of an n×T state matrix) as a column.
pub fn emit_matrix<S: AsRef<str>>(path: impl AsRef<Path>, labels: &[S], m: &DMatrix<f64>) -> Result<()> {
    let columns: Vec<Vec<f64>> = m.row_iter().map(|r| r.iter().copied().collect()).collect();
    emit_csv(path, labels, &columns)
}

/// Writes a task trace as is; its first column serves as the time axis.
pub fn emit_trace(path: impl AsRef<Path>, trace: &Trace) -> Result<()> {
    let labels: Vec<&str> = trace.labels.iter().map(String::as_str).collect();
    let columns: Vec<&[f64]> = trace.columns.iter().map(Vec::as_slice).collect();
    write_columns(path.as_ref(), &labels, &columns)
}

fn write_columns(path: &Path, labels: &[&str], columns: &[&[f64]]) -> Result<()> {
    if labels.len() != columns.len() {
        return Err(Error::dim("csv labels", columns.len(), labels.len()));
    }
    let len = columns.first().map_or(0, |c| c.len());
    if let Some(c) = columns.iter().find(|c| c.len() != len) {
        return Err(Error::dim("csv column length", len, c.len()));
    }
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(file);
    w.write_record(labels)?;
    let mut row = Vec::with_capacity(columns.len());
    for k in 0..len {
        row.clear();
        row.extend(columns.iter().map(|c| c[k].to_string()));
        w.write_record(&row)?;
    }
    let mut file = w.into_inner().map_err(|e| Error::io(path, e.into_error()))?;
    file.flush().map_err(|e| Error::io(path, e))
}

/// Reads a numeric CSV with a header row. Returns the labels and columns.
pub fn read_csv(path: impl AsRef<Path>) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut r = csv::Reader::from_reader(file);
    let labels: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
    let mut columns = vec![Vec::new(); labels.len()];
    for (line, rec) in r.records().enumerate() {
        let rec = rec?;
        for (col, field) in columns.iter_mut().zip(rec.iter()) {
            let v = field
                .trim()
                .parse::<f64>()
                .map_err(|_| Error::Malformed(format!("{}: row {}: not a number: {field:?}", path.display(), line + 1)))?;
            col.push(v);
        }
    }
    Ok((labels, columns))
}
