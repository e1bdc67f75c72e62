use std::io::{Read, Write};

use crate::text::display_bytes;

const HEADER: [&str; 6] = [
    "line_number",
    "content",
    "mod_count",
    "birth_ts",
    "commit_hashes",
    "timestamps",
];

/// One live line of a tracked file as written to its per-file CSV.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LineReport {
    pub line_number: usize,
    pub content: Vec<u8>,
    pub mod_count: usize,
    pub birth_ts: i64,
    pub commit_hashes: Vec<String>,
    pub timestamps: Vec<i64>,
}

pub fn write_line_reports<W: Write>(out: W, rows: &[LineReport]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(HEADER)?;
    for row in rows {
        let timestamps: Vec<String> = row.timestamps.iter().map(i64::to_string).collect();
        w.write_record([
            row.line_number.to_string().as_str(),
            &display_bytes(&row.content),
            &row.mod_count.to_string(),
            &row.birth_ts.to_string(),
            &row.commit_hashes.join("|"),
            &timestamps.join("|"),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, thiserror::Error)]
pub enum ReportReadError {
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("row {row}: bad field {field}: {value:?}")]
    BadField {
        row: usize,
        field: &'static str,
        value: String,
    },
}

pub fn read_line_reports<R: Read>(input: R) -> Result<Vec<LineReport>, ReportReadError> {
    let mut rdr = csv::Reader::from_reader(input);
    let mut rows = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let field = |idx: usize, name: &'static str| -> Result<&str, ReportReadError> {
            rec.get(idx).ok_or(ReportReadError::BadField {
                row: i,
                field: name,
                value: String::new(),
            })
        };
        let bad = |name: &'static str, value: &str| ReportReadError::BadField {
            row: i,
            field: name,
            value: value.to_string(),
        };
        let num = |idx: usize, name: &'static str| -> Result<i64, ReportReadError> {
            let v = field(idx, name)?;
            v.parse().map_err(|_| bad(name, v))
        };
        let split = |s: &str| -> Vec<String> {
            if s.is_empty() {
                Vec::new()
            } else {
                s.split('|').map(str::to_string).collect()
            }
        };
        let timestamps = split(field(5, "timestamps")?)
            .iter()
            .map(|t| t.parse().map_err(|_| bad("timestamps", t)))
            .collect::<Result<Vec<i64>, _>>()?;
        rows.push(LineReport {
            line_number: num(0, "line_number")? as usize,
            content: field(1, "content")?.as_bytes().to_vec(),
            mod_count: num(2, "mod_count")? as usize,
            birth_ts: num(3, "birth_ts")?,
            commit_hashes: split(field(4, "commit_hashes")?),
            timestamps,
        });
    }
    Ok(rows)
}
