use std::collections::HashMap;
use std::io::Read;
use std::path::Path;

use crate::classify::Pattern;

#[derive(Debug, thiserror::Error)]
pub enum LabelFileError {
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("label file has no {0:?} column")]
    MissingColumn(&'static str),
    #[error("row {row}: {message}")]
    BadRow { row: usize, message: String },
}

/// A label keyed by `(path, line_number)`.
pub type LabelRow = ((String, usize), Pattern);

/// Reads `(path, line_number, label)` triples from a CSV with a header row.
/// Other columns are ignored, so both override files and `labels.csv`
/// outputs are accepted.
pub fn read_label_file<R: Read>(input: R) -> Result<Vec<LabelRow>, LabelFileError> {
    let mut rdr = csv::Reader::from_reader(input);
    let headers = rdr.headers()?.clone();
    let col = |name: &'static str| {
        headers
            .iter()
            .position(|h| h.trim() == name)
            .ok_or(LabelFileError::MissingColumn(name))
    };
    let (pc, lc, bc) = (col("path")?, col("line_number")?, col("label")?);
    let mut out = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let row = i + 2;
        let get = |c: usize| rec.get(c).unwrap_or("").trim();
        let line: usize = get(lc).parse().map_err(|_| LabelFileError::BadRow {
            row,
            message: format!("bad line number {:?}", get(lc)),
        })?;
        let label: Pattern = get(bc).parse().map_err(|e| LabelFileError::BadRow {
            row,
            message: format!("{e}"),
        })?;
        out.push(((rec.get(pc).unwrap_or("").to_string(), line), label));
    }
    Ok(out)
}

/// Human labels that replace heuristic ones.
#[derive(Debug, Clone, Default)]
pub struct LabelOverrides {
    labels: HashMap<(String, usize), Pattern>,
}

impl LabelOverrides {
    pub fn load(path: &Path) -> Result<Self, LabelFileError> {
        let file = std::fs::File::open(path)?;
        Ok(LabelOverrides {
            labels: read_label_file(file)?.into_iter().collect(),
        })
    }

    pub fn get(&self, path: &str, line_number: usize) -> Option<Pattern> {
        self.labels.get(&(path.to_string(), line_number)).copied()
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }
}
