//! Rule-based labeling of hotspot line histories, plus the saturation and
//! agreement statistics used when labeling by hand.

mod labeling;
mod rules;

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::churn::FileCategory;
use crate::track::TrackedLine;

pub use labeling::{
    chao1, chao1_curve, cohens_kappa, Chao1Input, KappaError, KappaResult, SaturationPoint,
};

/// Hotspot patterns in rule precedence order. Ties between equally voted
/// labels go to the earlier variant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Pattern {
    FormattingPingPong,
    PinnedVersionBump,
    ConditionalVersionBump,
    DistroBump,
    ResourceIdModification,
    ServiceConfiguration,
    DependencySpecification,
    PathUpdate,
    DebugConfiguration,
    LicenseModification,
    MetadataChange,
    FunctionCallChange,
    LongLineChange,
    ExternalDataFluctuations,
    StepwiseRefactoring,
    NormalSoftwareEvolution,
    Unclassified,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum PatternCategory {
    ConfigurationManagement,
    DevelopmentEnvironment,
    CodeQualityAndStyle,
    Administrative,
    None,
}

impl Pattern {
    pub const ALL: [Pattern; 17] = [
        Pattern::FormattingPingPong,
        Pattern::PinnedVersionBump,
        Pattern::ConditionalVersionBump,
        Pattern::DistroBump,
        Pattern::ResourceIdModification,
        Pattern::ServiceConfiguration,
        Pattern::DependencySpecification,
        Pattern::PathUpdate,
        Pattern::DebugConfiguration,
        Pattern::LicenseModification,
        Pattern::MetadataChange,
        Pattern::FunctionCallChange,
        Pattern::LongLineChange,
        Pattern::ExternalDataFluctuations,
        Pattern::StepwiseRefactoring,
        Pattern::NormalSoftwareEvolution,
        Pattern::Unclassified,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Pattern::FormattingPingPong => "FormattingPingPong",
            Pattern::PinnedVersionBump => "PinnedVersionBump",
            Pattern::ConditionalVersionBump => "ConditionalVersionBump",
            Pattern::DistroBump => "DistroBump",
            Pattern::ResourceIdModification => "ResourceIdModification",
            Pattern::ServiceConfiguration => "ServiceConfiguration",
            Pattern::DependencySpecification => "DependencySpecification",
            Pattern::PathUpdate => "PathUpdate",
            Pattern::DebugConfiguration => "DebugConfiguration",
            Pattern::LicenseModification => "LicenseModification",
            Pattern::MetadataChange => "MetadataChange",
            Pattern::FunctionCallChange => "FunctionCallChange",
            Pattern::LongLineChange => "LongLineChange",
            Pattern::ExternalDataFluctuations => "ExternalDataFluctuations",
            Pattern::StepwiseRefactoring => "StepwiseRefactoring",
            Pattern::NormalSoftwareEvolution => "NormalSoftwareEvolution",
            Pattern::Unclassified => "Unclassified",
        }
    }

    pub fn category(self) -> PatternCategory {
        use Pattern::*;
        match self {
            PinnedVersionBump
            | ConditionalVersionBump
            | ResourceIdModification
            | ServiceConfiguration
            | DependencySpecification
            | ExternalDataFluctuations => PatternCategory::ConfigurationManagement,
            PathUpdate | DistroBump | DebugConfiguration => PatternCategory::DevelopmentEnvironment,
            FunctionCallChange | FormattingPingPong | LongLineChange | StepwiseRefactoring => {
                PatternCategory::CodeQualityAndStyle
            }
            LicenseModification | MetadataChange => PatternCategory::Administrative,
            NormalSoftwareEvolution | Unclassified => PatternCategory::None,
        }
    }

    /// True for the fifteen hotspot types (not evolution or unclassified).
    pub fn is_hotspot_type(self) -> bool {
        self.category() != PatternCategory::None
    }
}

impl fmt::Display for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown pattern label {0:?}")]
pub struct UnknownPattern(pub String);

impl FromStr for Pattern {
    type Err = UnknownPattern;

    /// Accepts the canonical name or a spaced form ("Pinned Version Bump"),
    /// case-insensitively.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let key: String = s
            .chars()
            .filter(|c| c.is_ascii_alphanumeric())
            .collect::<String>()
            .to_lowercase();
        Pattern::ALL
            .into_iter()
            .find(|p| p.name().to_lowercase() == key)
            .ok_or_else(|| UnknownPattern(s.to_string()))
    }
}

impl PatternCategory {
    pub fn name(self) -> &'static str {
        match self {
            PatternCategory::ConfigurationManagement => "ConfigurationManagement",
            PatternCategory::DevelopmentEnvironment => "DevelopmentEnvironment",
            PatternCategory::CodeQualityAndStyle => "CodeQualityAndStyle",
            PatternCategory::Administrative => "Administrative",
            PatternCategory::None => "None",
        }
    }
}

impl fmt::Display for PatternCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PatternLabel {
    pub pattern: Pattern,
    pub category: PatternCategory,
    pub confidence: f64,
}

impl PatternLabel {
    pub fn new(pattern: Pattern, confidence: f64) -> Self {
        PatternLabel {
            pattern,
            category: pattern.category(),
            confidence,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassifierConfig {
    /// Characters above which a line counts as long.
    pub long_line_threshold: usize,
    /// Largest word-level edit share still considered a small edit.
    pub long_line_edit_ratio: f64,
    pub refactor_window_days: f64,
}

impl Default for ClassifierConfig {
    fn default() -> Self {
        ClassifierConfig {
            long_line_threshold: 120,
            long_line_edit_ratio: 0.5,
            refactor_window_days: 14.0,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct RevisionPair<'a> {
    pub before: &'a [u8],
    pub after: &'a [u8],
    pub ts_before: i64,
    pub ts_after: i64,
    pub file_category: FileCategory,
    pub path: &'a str,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PairClassification {
    pub pattern: Pattern,
    /// Every rule that matched, in precedence order; the first one wins.
    pub matched: Vec<Pattern>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ClassifyError {
    #[error("before and after revisions are identical")]
    IdenticalRevisions,
    #[error("a line history needs at least two revisions, got {0}")]
    HistoryTooShort(usize),
}

pub fn classify_pair(
    pair: &RevisionPair<'_>,
    config: &ClassifierConfig,
) -> Result<PairClassification, ClassifyError> {
    if pair.before == pair.after {
        return Err(ClassifyError::IdenticalRevisions);
    }
    let before = String::from_utf8_lossy(pair.before);
    let after = String::from_utf8_lossy(pair.after);
    let matched = rules::matching_rules(&before, &after, pair.path, pair.file_category, config);
    let pattern = match matched.first() {
        Some(&p) => p,
        None if pair.file_category == FileCategory::ProgrammingFile => {
            Pattern::NormalSoftwareEvolution
        }
        None => Pattern::Unclassified,
    };
    Ok(PairClassification { pattern, matched })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LineClassification {
    pub label: PatternLabel,
    /// Pairwise winner per consecutive revision pair.
    pub pair_labels: Vec<Pattern>,
    /// Union of all rules that matched any pair.
    pub diagnostics: BTreeSet<Pattern>,
    /// Some revision restores the content from two revisions earlier.
    pub oscillation: bool,
}

pub fn classify_history(
    line: &TrackedLine,
    file_category: FileCategory,
    path: &str,
    config: &ClassifierConfig,
) -> Result<LineClassification, ClassifyError> {
    let history = &line.history;
    if history.len() < 2 {
        return Err(ClassifyError::HistoryTooShort(history.len()));
    }
    let mut pair_labels = Vec::with_capacity(history.len() - 1);
    let mut diagnostics = BTreeSet::new();
    for w in history.windows(2) {
        let pair = RevisionPair {
            before: &w[0].content,
            after: &w[1].content,
            ts_before: w[0].timestamp,
            ts_after: w[1].timestamp,
            file_category,
            path,
        };
        // A revision can differ only in its trailing newline.
        let pattern = match classify_pair(&pair, config) {
            Ok(c) => {
                diagnostics.extend(c.matched);
                c.pattern
            }
            Err(_) => Pattern::FormattingPingPong,
        };
        pair_labels.push(pattern);
    }

    let mut votes = [0usize; Pattern::ALL.len()];
    for &p in &pair_labels {
        votes[p as usize] += 1;
    }
    let (winner_idx, &winner_votes) = votes
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(&a.0)))
        .expect("non-empty vote table");
    let mut winner = Pattern::ALL[winner_idx];

    let window = config.refactor_window_days * 86_400.0;
    if winner == Pattern::NormalSoftwareEvolution && file_category == FileCategory::ProgrammingFile
    {
        let stepwise = (1..pair_labels.len()).any(|i| {
            pair_labels[i - 1] == Pattern::NormalSoftwareEvolution
                && pair_labels[i] == Pattern::NormalSoftwareEvolution
                && ((history[i + 1].timestamp - history[i].timestamp) as f64) <= window
        });
        if stepwise {
            winner = Pattern::StepwiseRefactoring;
            diagnostics.insert(Pattern::StepwiseRefactoring);
        }
    }
    let oscillation = history
        .windows(3)
        .any(|w| w[2].content == w[0].content && w[1].content != w[0].content);

    Ok(LineClassification {
        label: PatternLabel::new(winner, winner_votes as f64 / pair_labels.len() as f64),
        pair_labels,
        diagnostics,
        oscillation,
    })
}
