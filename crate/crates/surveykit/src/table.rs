//! Microdata CSV files: UTF-8, comma separated, one header row.
//!
//! Columns are matched to the spec by name, in any order. The weight column is
//! optional on input (unit weights when absent) and always written last on
//! output. Cells hold category labels, never codes.

use std::io::{Read, Write};
use std::path::Path;

use surveykit_core::dataset::{CategoricalDataset, VariableSpec};
use surveykit_core::Error;

use crate::error::{AppError, AppResult};

pub const DEFAULT_WEIGHT_COLUMN: &str = "WEIGHT";

fn csv_error(e: csv::Error) -> AppError {
    AppError::Csv(e.to_string())
}

pub fn parse_dataset<R: Read>(
    reader: R,
    specs: Vec<VariableSpec>,
    weight_column: &str,
) -> AppResult<CategoricalDataset> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let header = rdr.headers().map_err(csv_error)?.clone();
    let mut column_of = vec![usize::MAX; specs.len()];
    let mut weight_at = None;
    for (c, name) in header.iter().enumerate() {
        if name == weight_column {
            if weight_at.replace(c).is_some() {
                return Err(Error::SchemaMismatch(format!("column {name:?} appears twice")).into());
            }
            continue;
        }
        let v = specs
            .iter()
            .position(|s| s.name() == name)
            .ok_or_else(|| Error::SchemaMismatch(format!("column {name:?} is not a declared variable")))?;
        if column_of[v] != usize::MAX {
            return Err(Error::SchemaMismatch(format!("column {name:?} appears twice")).into());
        }
        column_of[v] = c;
    }
    if let Some(v) = column_of.iter().position(|&c| c == usize::MAX) {
        return Err(Error::SchemaMismatch(format!("variable {:?} has no column", specs[v].name())).into());
    }

    let mut rows: Vec<Vec<String>> = Vec::new();
    let mut weights = Vec::new();
    for (row, record) in rdr.records().enumerate() {
        let record = record.map_err(csv_error)?;
        if record.len() != header.len() {
            return Err(Error::SchemaMismatch(format!(
                "row {row} has {} cells, expected {}",
                record.len(),
                header.len()
            ))
            .into());
        }
        rows.push(column_of.iter().map(|&c| record[c].to_string()).collect());
        let w = match weight_at {
            None => 1.0,
            Some(c) => {
                let cell = &record[c];
                if cell.is_empty() {
                    return Err(Error::MissingCell {
                        row,
                        variable: weight_column.to_string(),
                    }
                    .into());
                }
                let w: f64 = cell.parse().map_err(|_| {
                    Error::SchemaMismatch(format!("row {row}: weight {cell:?} is not a number"))
                })?;
                if !(w >= 0.0) || !w.is_finite() {
                    return Err(Error::NegativeWeight { row }.into());
                }
                w
            }
        };
        weights.push(w);
    }
    Ok(CategoricalDataset::from_labels(specs, rows, weights)?)
}

pub fn write_dataset<W: Write>(writer: W, d: &CategoricalDataset, weight_column: &str) -> AppResult<()> {
    let mut wtr = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(writer);
    let mut header: Vec<&str> = d.specs().iter().map(|s| s.name()).collect();
    header.push(weight_column);
    wtr.write_record(&header).map_err(csv_error)?;
    for i in 0..d.n_rows() {
        let mut record: Vec<String> = (0..d.n_vars()).map(|v| d.label(i, v).to_string()).collect();
        record.push(d.weights()[i].to_string());
        wtr.write_record(&record).map_err(csv_error)?;
    }
    wtr.flush().map_err(|e| AppError::Csv(e.to_string()))
}

pub fn read_dataset(path: &Path, specs: Vec<VariableSpec>, weight_column: &str) -> AppResult<CategoricalDataset> {
    let file = std::fs::File::open(path).map_err(|e| AppError::io(path, e))?;
    parse_dataset(std::io::BufReader::new(file), specs, weight_column)
}

pub fn save_dataset(path: &Path, d: &CategoricalDataset, weight_column: &str) -> AppResult<()> {
    let mut buf = Vec::new();
    write_dataset(&mut buf, d, weight_column)?;
    std::fs::write(path, buf).map_err(|e| AppError::io(path, e))
}
