use std::collections::HashMap;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

const BUILTIN_TABLE: &str = include_str!("../../data/file_categories.txt");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum FileCategory {
    ProgrammingFile,
    AdministrativeFile,
}

impl FileCategory {
    pub fn as_str(self) -> &'static str {
        match self {
            FileCategory::ProgrammingFile => "programming",
            FileCategory::AdministrativeFile => "administrative",
        }
    }
}

#[derive(Debug, thiserror::Error)]
#[error("category table line {line}: {message}")]
pub struct TableError {
    pub line: usize,
    pub message: String,
}

/// Extension and file-name lookup table deciding programming vs
/// administrative files.
#[derive(Debug, Clone, Default)]
pub struct CategoryTable {
    by_name: HashMap<String, FileCategory>,
    by_ext: HashMap<String, FileCategory>,
}

impl CategoryTable {
    /// The table shipped in `data/file_categories.txt`.
    pub fn builtin() -> &'static CategoryTable {
        static TABLE: OnceLock<CategoryTable> = OnceLock::new();
        TABLE.get_or_init(|| CategoryTable::parse(BUILTIN_TABLE).expect("builtin table parses"))
    }

    pub fn parse(text: &str) -> Result<Self, TableError> {
        let mut table = CategoryTable::default();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |message: &str| TableError {
                line: idx + 1,
                message: message.to_string(),
            };
            let (pattern, category) = line
                .split_once('=')
                .ok_or_else(|| err("expected `pattern = category`"))?;
            let category = match category.trim().to_ascii_lowercase().as_str() {
                "programming" => FileCategory::ProgrammingFile,
                "administrative" => FileCategory::AdministrativeFile,
                other => return Err(err(&format!("unknown category {other:?}"))),
            };
            let pattern = pattern.trim().to_lowercase();
            if pattern.is_empty() {
                return Err(err("empty pattern"));
            }
            match pattern.strip_prefix('.') {
                Some(ext) if !ext.is_empty() && !ext.contains('.') => {
                    table.by_ext.insert(ext.to_string(), category);
                }
                _ => {
                    table.by_name.insert(pattern, category);
                }
            }
        }
        Ok(table)
    }

    /// Rules from `other` override rules already present.
    pub fn extend(&mut self, other: CategoryTable) {
        self.by_name.extend(other.by_name);
        self.by_ext.extend(other.by_ext);
    }

    pub fn categorize(&self, path: &str) -> FileCategory {
        let name = path
            .rsplit(['/', '\\'])
            .next()
            .unwrap_or(path)
            .to_lowercase();
        if let Some(&c) = self.by_name.get(&name) {
            return c;
        }
        if let Some((_, ext)) = name.rsplit_once('.') {
            if let Some(&c) = self.by_ext.get(ext) {
                return c;
            }
        }
        FileCategory::AdministrativeFile
    }
}

pub fn categorize_file(path: &str) -> FileCategory {
    CategoryTable::builtin().categorize(path)
}
