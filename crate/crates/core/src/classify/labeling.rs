use std::collections::HashMap;
use std::hash::Hash;

use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Chao1Input {
    pub s_obs: u64,
    /// Labels seen exactly once.
    pub f1: u64,
    /// Labels seen exactly twice.
    pub f2: u64,
}

impl Chao1Input {
    pub fn from_frequencies<I: IntoIterator<Item = u64>>(freqs: I) -> Self {
        let mut input = Chao1Input {
            s_obs: 0,
            f1: 0,
            f2: 0,
        };
        for f in freqs.into_iter().filter(|&f| f > 0) {
            input.s_obs += 1;
            input.f1 += (f == 1) as u64;
            input.f2 += (f == 2) as u64;
        }
        input
    }
}

/// Estimated label richness. Uses `f1²/(2·f2)` when doubletons exist and the
/// bias-corrected `f1(f1−1)/(2(f2+1))` otherwise.
pub fn chao1(input: Chao1Input) -> f64 {
    let (s, f1, f2) = (input.s_obs as f64, input.f1 as f64, input.f2 as f64);
    if input.f2 > 0 {
        s + f1 * f1 / (2.0 * f2)
    } else {
        s + f1 * (f1 - 1.0).max(0.0) / (2.0 * (f2 + 1.0))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SaturationPoint {
    pub k: usize,
    pub s_obs: u64,
    pub s_est: f64,
}

/// Observed and estimated richness after each prefix of the label sequence.
pub fn chao1_curve<T: Eq + Hash>(labels: &[T]) -> Vec<SaturationPoint> {
    let mut freq: HashMap<&T, u64> = HashMap::new();
    let mut input = Chao1Input {
        s_obs: 0,
        f1: 0,
        f2: 0,
    };
    let mut out = Vec::with_capacity(labels.len());
    for (i, label) in labels.iter().enumerate() {
        let f = freq.entry(label).or_insert(0);
        *f += 1;
        match *f {
            1 => {
                input.s_obs += 1;
                input.f1 += 1;
            }
            2 => {
                input.f1 -= 1;
                input.f2 += 1;
            }
            3 => input.f2 -= 1,
            _ => {}
        }
        out.push(SaturationPoint {
            k: i + 1,
            s_obs: input.s_obs,
            s_est: chao1(input),
        });
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KappaResult {
    pub kappa: f64,
    pub observed_agreement: f64,
    pub expected_agreement: f64,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum KappaError {
    #[error("label lists differ in length ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("label lists are empty")]
    Empty,
    #[error("both raters used a single identical label but disagree; kappa is undefined")]
    DegenerateMarginals,
}

pub fn cohens_kappa<T: Eq + Hash>(a: &[T], b: &[T]) -> Result<KappaResult, KappaError> {
    if a.len() != b.len() {
        return Err(KappaError::LengthMismatch(a.len(), b.len()));
    }
    if a.is_empty() {
        return Err(KappaError::Empty);
    }
    let n = a.len() as f64;
    let agree = a.iter().zip(b).filter(|(x, y)| x == y).count() as f64;
    let mut marg: HashMap<&T, (u64, u64)> = HashMap::new();
    for x in a {
        marg.entry(x).or_default().0 += 1;
    }
    for y in b {
        marg.entry(y).or_default().1 += 1;
    }
    let p_o = agree / n;
    let p_e: f64 = marg
        .values()
        .map(|&(ca, cb)| (ca as f64 / n) * (cb as f64 / n))
        .sum();
    let kappa = if (1.0 - p_e).abs() < 1e-12 {
        if p_o == 1.0 {
            1.0
        } else {
            return Err(KappaError::DegenerateMarginals);
        }
    } else {
        (p_o - p_e) / (1.0 - p_e)
    };
    Ok(KappaResult {
        kappa,
        observed_agreement: p_o,
        expected_agreement: p_e,
    })
}
