//! Token-level evaluation: edit distance between token sequences and the
//! non-normalized word error rate (edit operations divided by reference
//! token count, so values above 1 are possible).

use std::fmt;
use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::corpus::TokenSequence;
use crate::error::{Error, Result};

/// Minimal number of token insertions, deletions, and substitutions turning
/// one sequence into the other. Symmetric; zero exactly on equal sequences.
/// Two-row dynamic programming, quadratic time (inputs are chunk-sized).
pub fn token_edit_distance(a: &TokenSequence, b: &TokenSequence) -> u64 {
    let n = b.len();
    let mut prev: Vec<u64> = (0..=n as u64).collect();
    let mut curr: Vec<u64> = vec![0; n + 1];
    for (i, ta) in a.iter().enumerate() {
        curr[0] = i as u64 + 1;
        for (j, tb) in b.iter().enumerate() {
            let sub = prev[j] + u64::from(ta != tb);
            curr[j + 1] = sub.min(prev[j + 1] + 1).min(curr[j] + 1);
        }
        std::mem::swap(&mut prev, &mut curr);
    }
    prev[n]
}

/// Word error rate of a hypothesis against a non-empty reference:
/// `token_edit_distance(hyp, reference) / |reference|`.
pub fn wer(hyp: &TokenSequence, reference: &TokenSequence) -> Result<f64> {
    if reference.is_empty() {
        return Err(Error::EmptyReference);
    }
    Ok(token_edit_distance(hyp, reference) as f64 / reference.len() as f64)
}

/// The do-nothing system: the noisy sequence scored as-is. Reported as
/// system "baseline" in every evaluation.
pub fn baseline_wer(noisy: &TokenSequence, reference: &TokenSequence) -> Result<f64> {
    wer(noisy, reference)
}

/// How per-document scores combine into one number.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Average {
    /// Pooled edit operations over pooled reference tokens (the default).
    Micro,
    /// Unweighted mean of per-document rates.
    Macro,
}

impl fmt::Display for Average {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Average::Micro => "micro",
            Average::Macro => "macro",
        })
    }
}

impl FromStr for Average {
    type Err = Error;

    fn from_str(s: &str) -> Result<Average> {
        match s {
            "micro" => Ok(Average::Micro),
            "macro" => Ok(Average::Macro),
            other => Err(Error::InvalidParameter(format!(
                "unknown averaging mode {other:?}, expected micro or macro"
            ))),
        }
    }
}

/// Corpus-level aggregate of (hypothesis, reference) pairs. `ref_tokens` and
/// `edit_ops` are always the pooled totals; under micro averaging `wer` is
/// exactly their ratio, under macro averaging it is the mean per-pair rate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WerAggregate {
    pub wer: f64,
    pub ref_tokens: u64,
    pub edit_ops: u64,
}

/// Scores every pair and combines them. Errors on an empty pair list or any
/// empty reference.
pub fn aggregate_wer(
    pairs: &[(TokenSequence, TokenSequence)],
    average: Average,
) -> Result<WerAggregate> {
    if pairs.is_empty() {
        return Err(Error::EmptyPairs);
    }
    let mut edit_ops = 0u64;
    let mut ref_tokens = 0u64;
    let mut rate_sum = 0.0f64;
    for (hyp, reference) in pairs {
        if reference.is_empty() {
            return Err(Error::EmptyReference);
        }
        let d = token_edit_distance(hyp, reference);
        edit_ops += d;
        ref_tokens += reference.len() as u64;
        rate_sum += d as f64 / reference.len() as f64;
    }
    let wer = match average {
        Average::Micro => edit_ops as f64 / ref_tokens as f64,
        Average::Macro => rate_sum / pairs.len() as f64,
    };
    Ok(WerAggregate { wer, ref_tokens, edit_ops })
}

/// One evaluated system within a report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalRow {
    pub system: String,
    pub wer: f64,
    pub ref_tokens: u64,
    pub edit_ops: u64,
}

/// Evaluation results for one corpus, one row per system.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub corpus: String,
    pub rows: Vec<EvalRow>,
}

fn csv_field(raw: &str) -> String {
    if raw.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", raw.replace('"', "\"\""))
    } else {
        raw.to_string()
    }
}

impl EvalReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("corpus,system,wer,ref_tokens,edit_ops\n");
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                csv_field(&self.corpus),
                csv_field(&r.system),
                r.wer,
                r.ref_tokens,
                r.edit_ops
            );
        }
        out
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}
