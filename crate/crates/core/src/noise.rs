//! Character-level noise models: substitution matrices with optional
//! insertion/deletion rates, built either synthetically (uniform) or from
//! aligned ground-truth/noisy text pairs, plus corruption sampling and
//! per-word likelihoods.

use std::collections::HashMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::Stream;

/// Ordered set of distinct characters. Row/column order of every confusion
/// matrix follows this order.
#[derive(Debug, Clone, PartialEq)]
pub struct Alphabet {
    chars: Vec<char>,
    ascii: [u32; 128],
    other: HashMap<char, u32>,
}

impl Alphabet {
    pub fn new(chars: impl IntoIterator<Item = char>) -> Result<Self> {
        let chars: Vec<char> = chars.into_iter().collect();
        let mut ascii = [u32::MAX; 128];
        let mut other = HashMap::new();
        for (i, &c) in chars.iter().enumerate() {
            let slot = if (c as u32) < 128 {
                let e = &mut ascii[c as usize];
                (*e != u32::MAX).then_some(()).map(|_| c)
            } else {
                other.insert(c, i as u32).map(|_| c)
            };
            if let Some(dup) = slot {
                return Err(Error::DuplicateAlphabetChar(dup));
            }
            if (c as u32) < 128 {
                ascii[c as usize] = i as u32;
            }
        }
        Ok(Alphabet { chars, ascii, other })
    }

    /// Builds an alphabet from arbitrary text: distinct characters, sorted.
    pub fn sorted_from(chars: impl IntoIterator<Item = char>) -> Alphabet {
        let mut cs: Vec<char> = chars.into_iter().collect();
        cs.sort_unstable();
        cs.dedup();
        Alphabet::new(cs).expect("sorted deduped chars are distinct")
    }

    pub fn len(&self) -> usize {
        self.chars.len()
    }

    pub fn is_empty(&self) -> bool {
        self.chars.is_empty()
    }

    pub fn chars(&self) -> &[char] {
        &self.chars
    }

    pub fn char_at(&self, i: usize) -> char {
        self.chars[i]
    }

    #[inline]
    pub fn index_of(&self, c: char) -> Option<usize> {
        if (c as u32) < 128 {
            let i = self.ascii[c as usize];
            (i != u32::MAX).then_some(i as usize)
        } else {
            self.other.get(&c).map(|&i| i as usize)
        }
    }

    pub fn contains(&self, c: char) -> bool {
        self.index_of(c).is_some()
    }
}

/// Interpolation weight toward the full noise model; 0 is the identity
/// channel, 1 the model as estimated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseLevel(f64);

impl NoiseLevel {
    pub fn new(gamma: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&gamma) {
            return Err(Error::InvalidParameter(format!(
                "noise level must be in [0, 1], got {gamma}"
            )));
        }
        Ok(NoiseLevel(gamma))
    }

    pub fn gamma(self) -> f64 {
        self.0
    }
}

/// Whether corruption draws only substitutions or the full
/// substitution/insertion/deletion process.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CorruptionMode {
    #[serde(rename = "substitution")]
    SubstitutionOnly,
    Full,
}

/// A character confusion channel: row-stochastic substitution matrix over an
/// alphabet, plus per-source-character insertion and deletion rates and an
/// insertion character distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfusionModel {
    alphabet: Alphabet,
    sub: Vec<f64>,
    cum_sub: Vec<f64>,
    p_insert: f64,
    p_delete: f64,
    insert_dist: Vec<f64>,
    insert_cum: Vec<f64>,
}

const ROW_SUM_TOL: f64 = 1e-9;

fn check_distribution(name: &str, row: &[f64], tol: f64) -> Result<()> {
    for &p in row {
        if !(p.is_finite() && (0.0..=1.0 + tol).contains(&p)) {
            return Err(Error::InvalidModel(format!("{name} has entry {p} outside [0, 1]")));
        }
    }
    let sum: f64 = row.iter().sum();
    if !(sum.is_finite() && (sum - 1.0).abs() <= tol) {
        return Err(Error::InvalidModel(format!("{name} sums to {sum}, expected 1")));
    }
    Ok(())
}

fn cumulative(row: &[f64]) -> Vec<f64> {
    let mut acc = 0.0;
    row.iter()
        .map(|&p| {
            acc += p;
            acc
        })
        .collect()
}

impl ConfusionModel {
    /// Strict constructor: every row and `insert_dist` must already sum to 1
    /// within 1e-9, and `p_insert + p_delete` must stay below 1.
    pub fn new(
        alphabet: Alphabet,
        rows: Vec<Vec<f64>>,
        p_insert: f64,
        p_delete: f64,
        insert_dist: Vec<f64>,
    ) -> Result<Self> {
        let n = alphabet.len();
        if n == 0 {
            return Err(Error::AlphabetTooSmall { got: 0, min: 1 });
        }
        if rows.len() != n {
            return Err(Error::InvalidModel(format!(
                "matrix has {} rows for an alphabet of {n}",
                rows.len()
            )));
        }
        let mut sub = Vec::with_capacity(n * n);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::InvalidModel(format!(
                    "row {i} has {} entries for an alphabet of {n}",
                    row.len()
                )));
            }
            check_distribution(&format!("substitution row {i}"), row, ROW_SUM_TOL)?;
            sub.extend_from_slice(row);
        }
        if insert_dist.len() != n {
            return Err(Error::InvalidModel(format!(
                "insert_dist has {} entries for an alphabet of {n}",
                insert_dist.len()
            )));
        }
        check_distribution("insert_dist", &insert_dist, ROW_SUM_TOL)?;
        for (name, p) in [("p_insert", p_insert), ("p_delete", p_delete)] {
            if !(p.is_finite() && (0.0..=1.0).contains(&p)) {
                return Err(Error::InvalidModel(format!("{name} is {p}, expected [0, 1]")));
            }
        }
        if p_insert + p_delete > 1.0 {
            return Err(Error::InvalidModel(format!(
                "p_insert + p_delete = {}, expected at most 1",
                p_insert + p_delete
            )));
        }
        Ok(Self::assemble(alphabet, sub, p_insert, p_delete, insert_dist))
    }

    fn assemble(
        alphabet: Alphabet,
        sub: Vec<f64>,
        p_insert: f64,
        p_delete: f64,
        insert_dist: Vec<f64>,
    ) -> Self {
        let n = alphabet.len();
        let mut cum_sub = Vec::with_capacity(n * n);
        for i in 0..n {
            cum_sub.extend(cumulative(&sub[i * n..(i + 1) * n]));
        }
        let insert_cum = cumulative(&insert_dist);
        ConfusionModel { alphabet, sub, cum_sub, p_insert, p_delete, insert_dist, insert_cum }
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    /// p(observed = column char | true = row char).
    pub fn sub_prob(&self, row: usize, col: usize) -> f64 {
        self.sub[row * self.alphabet.len() + col]
    }

    pub fn row(&self, row: usize) -> &[f64] {
        let n = self.alphabet.len();
        &self.sub[row * n..(row + 1) * n]
    }

    pub(crate) fn sub_flat(&self) -> &[f64] {
        &self.sub
    }

    pub fn p_insert(&self) -> f64 {
        self.p_insert
    }

    pub fn p_delete(&self) -> f64 {
        self.p_delete
    }

    pub fn insert_dist(&self) -> &[f64] {
        &self.insert_dist
    }

    fn sample_cum(&self, cum: &[f64], rng: &mut Stream) -> char {
        let r = rng.next_f64();
        let k = cum.partition_point(|&c| c <= r);
        self.alphabet.char_at(k.min(self.alphabet.len() - 1))
    }

    fn sample_row(&self, i: usize, rng: &mut Stream) -> char {
        let n = self.alphabet.len();
        let r = rng.next_f64();
        let row = &self.cum_sub[i * n..(i + 1) * n];
        let k = row.partition_point(|&c| c <= r);
        self.alphabet.char_at(k.min(n - 1))
    }

    /// Corrupts `w` into `out` (cleared first). Characters outside the
    /// alphabet are copied verbatim and consume no randomness.
    pub fn corrupt_into(
        &self,
        w: &str,
        mode: CorruptionMode,
        rng: &mut Stream,
        out: &mut String,
    ) {
        out.clear();
        let full = mode == CorruptionMode::Full;
        if full && rng.bernoulli(self.p_insert) {
            out.push(self.sample_cum(&self.insert_cum, rng));
        }
        for c in w.chars() {
            match self.alphabet.index_of(c) {
                None => out.push(c),
                Some(i) => {
                    if full && rng.bernoulli(self.p_delete) {
                        continue;
                    }
                    out.push(self.sample_row(i, rng));
                    if full && rng.bernoulli(self.p_insert) {
                        out.push(self.sample_cum(&self.insert_cum, rng));
                    }
                }
            }
        }
    }

    /// Mean off-diagonal mass `1 - p(c|c)` over the given characters,
    /// unweighted. `None` if none of them are in the alphabet.
    pub fn average_confusion(&self, chars: impl IntoIterator<Item = char>) -> Option<f64> {
        let mut sum = 0.0;
        let mut n = 0u64;
        for c in chars {
            if let Some(i) = self.alphabet.index_of(c) {
                sum += 1.0 - self.sub_prob(i, i);
                n += 1;
            }
        }
        (n > 0).then(|| sum / n as f64)
    }

    /// Like [`average_confusion`](Self::average_confusion) but weighting each
    /// character, e.g. by corpus frequency.
    pub fn weighted_average_confusion<I>(&self, weighted: I) -> Option<f64>
    where
        I: IntoIterator<Item = (char, f64)>,
    {
        let mut sum = 0.0;
        let mut wsum = 0.0;
        for (c, w) in weighted {
            if let Some(i) = self.alphabet.index_of(c) {
                sum += w * (1.0 - self.sub_prob(i, i));
                wsum += w;
            }
        }
        (wsum > 0.0).then(|| sum / wsum)
    }

    pub fn to_json(&self) -> String {
        let n = self.alphabet.len();
        let file = ModelFile {
            alphabet: self.alphabet.chars().iter().map(|c| c.to_string()).collect(),
            sub: (0..n).map(|i| self.row(i).to_vec()).collect(),
            p_insert: self.p_insert,
            p_delete: self.p_delete,
            insert_dist: self.insert_dist.clone(),
        };
        serde_json::to_string_pretty(&file).expect("model serializes")
    }

    /// Parses a model file. Rows may be off by up to 1e-6 (they are
    /// renormalized); anything worse is rejected.
    pub fn from_json(s: &str) -> Result<Self> {
        let file: ModelFile = serde_json::from_str(s)?;
        let mut chars = Vec::with_capacity(file.alphabet.len());
        for entry in &file.alphabet {
            let mut it = entry.chars();
            match (it.next(), it.next()) {
                (Some(c), None) => chars.push(c),
                _ => {
                    return Err(Error::InvalidModel(format!(
                        "alphabet entry {entry:?} is not a single character"
                    )))
                }
            }
        }
        let alphabet = Alphabet::new(chars)?;
        let rows = file
            .sub
            .iter()
            .enumerate()
            .map(|(i, row)| renormalize(&format!("substitution row {i}"), row))
            .collect::<Result<Vec<_>>>()?;
        let insert_dist = renormalize("insert_dist", &file.insert_dist)?;
        ConfusionModel::new(alphabet, rows, file.p_insert, file.p_delete, insert_dist)
    }

    pub fn write_json(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_json())?;
        Ok(())
    }

    pub fn read_json(path: &Path) -> Result<Self> {
        ConfusionModel::from_json(&fs::read_to_string(path)?)
    }
}

#[derive(Serialize, Deserialize)]
struct ModelFile {
    alphabet: Vec<String>,
    sub: Vec<Vec<f64>>,
    p_insert: f64,
    p_delete: f64,
    insert_dist: Vec<f64>,
}

fn renormalize(name: &str, row: &[f64]) -> Result<Vec<f64>> {
    check_distribution(name, row, 1e-6)?;
    let sum: f64 = row.iter().sum();
    Ok(row.iter().map(|&p| p / sum).collect())
}

/// Uniform channel: each character survives with probability `1 - epsilon`
/// and flips to each other character with probability `epsilon / (|A| - 1)`.
/// No insertions or deletions; `insert_dist` is uniform.
pub fn uniform_noise(alphabet: Alphabet, epsilon: f64) -> Result<ConfusionModel> {
    if alphabet.len() < 2 {
        return Err(Error::AlphabetTooSmall { got: alphabet.len(), min: 2 });
    }
    if !(epsilon.is_finite() && (0.0..1.0).contains(&epsilon)) {
        return Err(Error::InvalidParameter(format!(
            "epsilon must be in [0, 1), got {epsilon}"
        )));
    }
    let n = alphabet.len();
    let off = epsilon / (n - 1) as f64;
    let keep = 1.0 - epsilon;
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| if i == j { keep } else { off }).collect())
        .collect();
    let insert_dist = vec![1.0 / n as f64; n];
    ConfusionModel::new(alphabet, rows, 0.0, 0.0, insert_dist)
}

/// One ground-truth/noisy string pair used for model estimation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AlignedPair {
    pub gt: String,
    pub ocr: String,
}

impl AlignedPair {
    pub fn new(gt: impl Into<String>, ocr: impl Into<String>) -> Self {
        AlignedPair { gt: gt.into(), ocr: ocr.into() }
    }
}

/// Reads aligned pairs from a JSONL file of `{"gt", "ocr"}` records.
pub fn read_aligned_pairs(path: &Path) -> Result<Vec<AlignedPair>> {
    let raw = fs::read_to_string(path)?;
    let mut pairs = Vec::new();
    for (lineno, line) in raw.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let pair: AlignedPair = serde_json::from_str(line)
            .map_err(|e| Error::Corpus(format!("{}:{}: {e}", path.display(), lineno + 1)))?;
        pairs.push(pair);
    }
    Ok(pairs)
}

enum AlignEvent {
    Emit(char, char),
    Delete(char),
    Insert(char),
}

/// Character alignment by edit distance with unit costs. When several
/// optimal paths exist the backtrace prefers match, then substitution, then
/// deletion, then insertion.
fn align(gt: &[char], ocr: &[char], events: &mut Vec<AlignEvent>) {
    let m = gt.len();
    let n = ocr.len();
    let w = n + 1;
    let mut d = vec![0u32; (m + 1) * w];
    for (j, cell) in d.iter_mut().enumerate().take(n + 1) {
        *cell = j as u32;
    }
    for i in 1..=m {
        d[i * w] = i as u32;
        for j in 1..=n {
            let sub_cost = if gt[i - 1] == ocr[j - 1] { 0 } else { 1 };
            let best = (d[(i - 1) * w + j - 1] + sub_cost)
                .min(d[(i - 1) * w + j] + 1)
                .min(d[i * w + j - 1] + 1);
            d[i * w + j] = best;
        }
    }
    let (mut i, mut j) = (m, n);
    while i > 0 || j > 0 {
        let here = d[i * w + j];
        // A diagonal step is a match when the characters agree (cost 0) and
        // otherwise a substitution (cost 1); a match can never be the
        // costlier diagonal, so one test covers the preference order.
        let diagonal = i > 0 && j > 0 && {
            let diag = d[(i - 1) * w + j - 1];
            if gt[i - 1] == ocr[j - 1] { diag == here } else { diag + 1 == here }
        };
        if diagonal {
            events.push(AlignEvent::Emit(gt[i - 1], ocr[j - 1]));
            i -= 1;
            j -= 1;
        } else if i > 0 && d[(i - 1) * w + j] + 1 == here {
            events.push(AlignEvent::Delete(gt[i - 1]));
            i -= 1;
        } else {
            events.push(AlignEvent::Insert(ocr[j - 1]));
            j -= 1;
        }
    }
}

/// Estimates a confusion model from aligned pairs with additive smoothing.
///
/// The alphabet is the sorted union of characters on both sides. Substitution
/// rows are smoothed emission frequencies; characters never emitted keep an
/// identity row when smoothing is zero. Insertion and deletion rates are per
/// ground-truth character.
pub fn estimate_from_aligned(pairs: &[AlignedPair], smoothing: f64) -> Result<ConfusionModel> {
    if pairs.is_empty() {
        return Err(Error::EmptyPairs);
    }
    if !(smoothing.is_finite() && smoothing >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "smoothing must be non-negative, got {smoothing}"
        )));
    }
    let alphabet = Alphabet::sorted_from(
        pairs.iter().flat_map(|p| p.gt.chars().chain(p.ocr.chars())),
    );
    let n = alphabet.len();
    let mut sub_counts = vec![0u64; n * n];
    let mut ins_counts = vec![0u64; n];
    let mut deletions = 0u64;
    let mut insertions = 0u64;
    let mut gt_chars = 0u64;
    let mut events = Vec::new();
    for pair in pairs {
        let gt: Vec<char> = pair.gt.chars().collect();
        let ocr: Vec<char> = pair.ocr.chars().collect();
        gt_chars += gt.len() as u64;
        events.clear();
        align(&gt, &ocr, &mut events);
        for ev in &events {
            match *ev {
                AlignEvent::Emit(g, o) => {
                    let gi = alphabet.index_of(g).expect("gt char in alphabet");
                    let oi = alphabet.index_of(o).expect("ocr char in alphabet");
                    sub_counts[gi * n + oi] += 1;
                }
                AlignEvent::Delete(g) => {
                    let _ = alphabet.index_of(g).expect("gt char in alphabet");
                    deletions += 1;
                }
                AlignEvent::Insert(o) => {
                    let oi = alphabet.index_of(o).expect("ocr char in alphabet");
                    ins_counts[oi] += 1;
                    insertions += 1;
                }
            }
        }
    }
    if gt_chars == 0 {
        return Err(Error::InvalidParameter(
            "aligned pairs contain no ground-truth characters".into(),
        ));
    }
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            let emitted: u64 = sub_counts[i * n..(i + 1) * n].iter().sum();
            let denom = emitted as f64 + smoothing * n as f64;
            if denom == 0.0 {
                (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect()
            } else {
                (0..n)
                    .map(|j| (sub_counts[i * n + j] as f64 + smoothing) / denom)
                    .collect()
            }
        })
        .collect();
    let ins_denom = insertions as f64 + smoothing * n as f64;
    let insert_dist: Vec<f64> = if ins_denom == 0.0 {
        vec![1.0 / n as f64; n]
    } else {
        ins_counts.iter().map(|&c| (c as f64 + smoothing) / ins_denom).collect()
    };
    let p_insert = insertions as f64 / gt_chars as f64;
    let p_delete = deletions as f64 / gt_chars as f64;
    ConfusionModel::new(alphabet, rows, p_insert, p_delete, insert_dist)
}

/// Pulls the channel toward the identity: substitution matrix becomes
/// `gamma * M + (1 - gamma) * I`, insertion and deletion rates scale by
/// `gamma`, the insertion distribution is unchanged. `gamma = 1` returns the
/// model exactly; `gamma = 0` is the noiseless channel.
pub fn interpolate(model: &ConfusionModel, level: NoiseLevel) -> ConfusionModel {
    let g = level.gamma();
    let n = model.alphabet.len();
    let mut sub = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            let identity = if i == j { 1.0 } else { 0.0 };
            sub.push(g * model.sub[i * n + j] + (1.0 - g) * identity);
        }
    }
    ConfusionModel::assemble(
        model.alphabet.clone(),
        sub,
        g * model.p_insert,
        g * model.p_delete,
        model.insert_dist.clone(),
    )
}

/// Substitution-only likelihood `p(o | w)`: the product of per-position
/// confusion probabilities when the character counts match, else exactly 0.
/// Any character outside the alphabet zeroes the likelihood.
pub fn word_likelihood(o: &str, w: &str, model: &ConfusionModel) -> f64 {
    let n = model.alphabet.len();
    let mut oc = o.chars();
    let mut wc = w.chars();
    let mut p = 1.0;
    loop {
        match (wc.next(), oc.next()) {
            (None, None) => return p,
            (Some(wch), Some(och)) => {
                match (model.alphabet.index_of(wch), model.alphabet.index_of(och)) {
                    (Some(i), Some(j)) => p *= model.sub[i * n + j],
                    _ => return 0.0,
                }
            }
            _ => return 0.0,
        }
    }
}

/// Samples a corrupted form of `w`. See [`ConfusionModel::corrupt_into`] for
/// the draw discipline.
pub fn corrupt_word(
    w: &str,
    model: &ConfusionModel,
    mode: CorruptionMode,
    rng: &mut Stream,
) -> String {
    let mut out = String::with_capacity(w.len() + 2);
    model.corrupt_into(w, mode, rng, &mut out);
    out
}
