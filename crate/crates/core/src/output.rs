//! CSV trajectory files.

use std::fs::File;
use std::io::{self, Read, Write};
use std::path::Path;

use thiserror::Error;

use crate::scenario::Trajectory;

pub const HEADER: [&str; 8] = ["t", "r", "y", "yf", "u", "mode", "active", "v"];

#[derive(Debug, Error)]
pub enum OutputError {
    #[error("I/O error: {0}")]
    Io(#[from] io::Error),
    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),
    #[error("trajectory is empty")]
    Empty,
    #[error("row {row}: {message}")]
    Malformed { row: usize, message: String },
}

/// Nine significant digits, printed in the shortest form that reads back to
/// the rounded value.
pub fn format_float(x: f64) -> String {
    if !x.is_finite() || x == 0.0 {
        return if x == 0.0 { "0".into() } else { x.to_string() };
    }
    let rounded: f64 = format!("{x:.8e}").parse().expect("formatted float parses");
    rounded.to_string()
}

/// Writes the trajectory as CSV to any writer.
pub fn write_csv_to<W: Write>(traj: &Trajectory, out: W) -> Result<(), OutputError> {
    if traj.is_empty() {
        return Err(OutputError::Empty);
    }
    let mut w = csv::Writer::from_writer(out);
    w.write_record(HEADER)?;
    for s in &traj.samples {
        w.write_record([
            format_float(s.t),
            format_float(s.r),
            format_float(s.y),
            format_float(s.yf),
            format_float(s.u),
            s.mode.bits().to_string(),
            s.active.map(|a| a.to_string()).unwrap_or_default(),
            s.v.map(format_float).unwrap_or_default(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_csv(traj: &Trajectory, path: impl AsRef<Path>) -> Result<(), OutputError> {
    let file = File::create(path)?;
    write_csv_to(traj, io::BufWriter::new(file))
}

/// One parsed CSV row.
#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub t: f64,
    pub r: f64,
    pub y: f64,
    pub yf: f64,
    pub u: f64,
    pub mode: u8,
    pub active: Option<usize>,
    pub v: Option<f64>,
}

pub fn read_csv_from<R: Read>(input: R) -> Result<Vec<Row>, OutputError> {
    let mut rd = csv::Reader::from_reader(input);
    let headers = rd.headers()?.clone();
    if headers.iter().ne(HEADER.iter().copied()) {
        return Err(OutputError::Malformed {
            row: 0,
            message: format!("unexpected header {headers:?}"),
        });
    }
    let mut rows = Vec::new();
    for (i, rec) in rd.records().enumerate() {
        let rec = rec?;
        let row = i + 1;
        let bad = |message: String| OutputError::Malformed { row, message };
        let num = |j: usize| -> Result<f64, OutputError> {
            rec[j]
                .parse::<f64>()
                .map_err(|_| bad(format!("{}: not a number: {:?}", HEADER[j], &rec[j])))
        };
        let opt = |j: usize| -> Result<Option<f64>, OutputError> {
            if rec[j].is_empty() {
                Ok(None)
            } else {
                num(j).map(Some)
            }
        };
        rows.push(Row {
            t: num(0)?,
            r: num(1)?,
            y: num(2)?,
            yf: num(3)?,
            u: num(4)?,
            mode: rec[5]
                .parse()
                .map_err(|_| bad(format!("mode: {:?}", &rec[5])))?,
            active: if rec[6].is_empty() {
                None
            } else {
                Some(
                    rec[6]
                        .parse()
                        .map_err(|_| bad(format!("active: {:?}", &rec[6])))?,
                )
            },
            v: opt(7)?,
        });
    }
    Ok(rows)
}

pub fn read_csv(path: impl AsRef<Path>) -> Result<Vec<Row>, OutputError> {
    read_csv_from(File::open(path)?)
}
