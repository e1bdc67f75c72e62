//! Candidate repository selection: inclusion criteria, popularity strata
//! and seeded stratified sampling.

mod github;

use chrono::{DateTime, Utc};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use github::{FetchError, GitHubClient, DEFAULT_API_URL};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RepoMeta {
    pub owner_and_name: String,
    pub stars: u64,
    pub forks: u64,
    pub total_commits: u64,
    pub created_at: DateTime<Utc>,
    /// Default-branch commits per six-month interval since creation.
    pub half_year_commit_buckets: Vec<u64>,
    pub archived: bool,
}

impl RepoMeta {
    pub fn popularity(&self) -> u64 {
        self.stars.max(self.forks)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct InclusionCriteria {
    pub min_stars_or_forks: u64,
    pub min_commits: u64,
    pub require_commit_every_half_year: bool,
}

impl Default for InclusionCriteria {
    fn default() -> Self {
        InclusionCriteria {
            min_stars_or_forks: 11,
            min_commits: 10_000,
            require_commit_every_half_year: true,
        }
    }
}

pub const FAIL_POPULARITY: &str = "min_stars_or_forks";
pub const FAIL_COMMITS: &str = "min_commits";
pub const FAIL_ACTIVITY: &str = "commit_every_half_year";

/// Whether `meta` meets every criterion, with the tags of those it misses.
pub fn passes_inclusion(
    meta: &RepoMeta,
    criteria: &InclusionCriteria,
) -> (bool, Vec<&'static str>) {
    let mut failed = Vec::new();
    if meta.popularity() < criteria.min_stars_or_forks {
        failed.push(FAIL_POPULARITY);
    }
    if meta.total_commits < criteria.min_commits {
        failed.push(FAIL_COMMITS);
    }
    if criteria.require_commit_every_half_year && meta.half_year_commit_buckets.contains(&0) {
        failed.push(FAIL_ACTIVITY);
    }
    (failed.is_empty(), failed)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Stratum {
    pub lower: u64,
    pub upper: u64,
}

impl std::fmt::Display for Stratum {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}-{}", self.lower, self.upper)
    }
}

pub const STRATA: [Stratum; 5] = [
    Stratum {
        lower: 11,
        upper: 100,
    },
    Stratum {
        lower: 101,
        upper: 1_000,
    },
    Stratum {
        lower: 1_001,
        upper: 10_000,
    },
    Stratum {
        lower: 10_001,
        upper: 100_000,
    },
    Stratum {
        lower: 100_001,
        upper: 1_000_000,
    },
];

pub fn assign_stratum(popularity: u64) -> Option<Stratum> {
    STRATA
        .into_iter()
        .find(|s| (s.lower..=s.upper).contains(&popularity))
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Sample {
    pub selected: Vec<RepoMeta>,
    /// Strata without a single candidate.
    pub empty_strata: Vec<Stratum>,
}

/// Draws up to `per_stratum` candidates from every stratum with a partial
/// Fisher-Yates shuffle seeded by `seed`. Strata are visited in ascending
/// order with one generator, so identical input yields identical output.
pub fn sample_stratified(
    candidates: &[(RepoMeta, Stratum)],
    per_stratum: usize,
    seed: u64,
) -> Sample {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sample = Sample::default();
    for stratum in STRATA {
        let mut pool: Vec<&RepoMeta> = candidates
            .iter()
            .filter(|(_, s)| *s == stratum)
            .map(|(m, _)| m)
            .collect();
        if pool.is_empty() {
            log::warn!("stratum {stratum} has no candidates");
            sample.empty_strata.push(stratum);
            continue;
        }
        let take = per_stratum.min(pool.len());
        for i in 0..take {
            let j = rng.random_range(i..pool.len());
            pool.swap(i, j);
        }
        sample
            .selected
            .extend(pool[..take].iter().map(|m| (*m).clone()));
    }
    sample
}
