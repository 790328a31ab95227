//! Corpus ingestion: tokenization, vocabulary counting, numeric/alphabetic
//! partitioning, frequency-weighted sampling, and fixed-width chunking.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use unicode_general_category::{get_general_category, GeneralCategory};

use crate::error::{Error, Result};
use crate::rng::Stream;

/// One corpus document. Ids are unique within a corpus and define the
/// canonical processing order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Document {
    pub id: String,
    pub text: String,
}

impl Document {
    pub fn new(id: impl Into<String>, text: impl Into<String>) -> Self {
        Document { id: id.into(), text: text.into() }
    }
}

/// An ordered sequence of tokens. Tokens are never empty and contain no
/// whitespace, so joining with single spaces and re-tokenizing round-trips.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct TokenSequence(Vec<String>);

impl TokenSequence {
    pub fn new(tokens: Vec<String>) -> Self {
        debug_assert!(
            tokens.iter().all(|t| !t.is_empty() && !t.chars().any(char::is_whitespace)),
            "tokens must be non-empty and whitespace-free"
        );
        TokenSequence(tokens)
    }

    pub fn tokens(&self) -> &[String] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, String> {
        self.0.iter()
    }

    /// Single-space join; the inverse of [`tokenize`] up to whitespace runs.
    pub fn joined(&self) -> String {
        self.0.join(" ")
    }

    pub fn into_tokens(self) -> Vec<String> {
        self.0
    }

    /// Character length of [`joined`](Self::joined) without building it.
    pub fn joined_char_len(&self) -> usize {
        if self.0.is_empty() {
            return 0;
        }
        let chars: usize = self.0.iter().map(|t| t.chars().count()).sum();
        chars + self.0.len() - 1
    }
}

impl fmt::Display for TokenSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.joined())
    }
}

impl From<Vec<String>> for TokenSequence {
    fn from(tokens: Vec<String>) -> Self {
        TokenSequence::new(tokens)
    }
}

fn strippable(c: char) -> bool {
    !c.is_alphanumeric()
}

/// Splits on Unicode whitespace, then peels leading and trailing punctuation
/// (any non-alphanumeric character) off each piece into single-character
/// tokens. Interior punctuation stays attached, so "10,000.50" survives as
/// one token while "euros." becomes ["euros", "."].
pub fn tokenize(text: &str) -> TokenSequence {
    let mut out = Vec::new();
    for piece in text.split_whitespace() {
        let chars: Vec<char> = piece.chars().collect();
        let mut start = 0;
        let mut end = chars.len();
        while start < end && strippable(chars[start]) {
            out.push(chars[start].to_string());
            start += 1;
        }
        let mut tail = Vec::new();
        while end > start && strippable(chars[end - 1]) {
            tail.push(chars[end - 1]);
            end -= 1;
        }
        if start < end {
            out.push(chars[start..end].iter().collect());
        }
        out.extend(tail.into_iter().rev().map(String::from));
    }
    TokenSequence(out)
}

/// Token counts over a corpus, with the grand total cached.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Vocabulary {
    total: u64,
    entries: BTreeMap<String, u64>,
}

impl Vocabulary {
    /// Counts tokens across all documents. Documents are visited in id order.
    pub fn from_documents(docs: &[Document]) -> Vocabulary {
        let mut order: Vec<&Document> = docs.iter().collect();
        order.sort_by(|a, b| a.id.cmp(&b.id));
        let mut entries: BTreeMap<String, u64> = BTreeMap::new();
        let mut total = 0u64;
        for doc in order {
            for tok in tokenize(&doc.text).into_tokens() {
                *entries.entry(tok).or_insert(0) += 1;
                total += 1;
            }
        }
        Vocabulary { total, entries }
    }

    /// Builds a vocabulary from explicit counts. Zero counts are dropped.
    pub fn from_counts(counts: impl IntoIterator<Item = (String, u64)>) -> Vocabulary {
        let mut entries: BTreeMap<String, u64> = BTreeMap::new();
        let mut total = 0u64;
        for (w, c) in counts {
            if c == 0 {
                continue;
            }
            *entries.entry(w).or_insert(0) += c;
            total += c;
        }
        Vocabulary { total, entries }
    }

    pub fn count(&self, word: &str) -> u64 {
        self.entries.get(word).copied().unwrap_or(0)
    }

    /// Relative frequency `count / total`; 0 for unknown words or an empty
    /// vocabulary.
    pub fn frequency(&self, word: &str) -> f64 {
        if self.total == 0 {
            0.0
        } else {
            self.count(word) as f64 / self.total as f64
        }
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Entries in lexicographic word order.
    pub fn iter(&self) -> impl Iterator<Item = (&str, u64)> {
        self.entries.iter().map(|(w, &c)| (w.as_str(), c))
    }

    pub fn words(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    /// Every distinct character appearing in any word, sorted ascending.
    pub fn character_set(&self) -> Vec<char> {
        let mut chars: Vec<char> = self.entries.keys().flat_map(|w| w.chars()).collect();
        chars.sort_unstable();
        chars.dedup();
        chars
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("vocabulary serializes")
    }

    pub fn from_json(s: &str) -> Result<Vocabulary> {
        let v: Vocabulary = serde_json::from_str(s)?;
        let sum: u64 = v.entries.values().sum();
        if sum != v.total {
            return Err(Error::InvalidParameter(format!(
                "vocabulary total {} does not match entry sum {}",
                v.total, sum
            )));
        }
        if v.entries.values().any(|&c| c == 0) {
            return Err(Error::InvalidParameter("vocabulary counts must be positive".into()));
        }
        Ok(v)
    }

    pub fn write_json(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_json())?;
        Ok(())
    }

    pub fn read_json(path: &Path) -> Result<Vocabulary> {
        Vocabulary::from_json(&fs::read_to_string(path)?)
    }
}

/// Word class under the digit/letter partition rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WordClass {
    Numeric,
    Alpha,
    Other,
}

fn is_decimal_digit(c: char) -> bool {
    get_general_category(c) == GeneralCategory::DecimalNumber
}

/// A word is numeric if it contains at least one decimal digit, alphabetic if
/// it is non-empty and all letters. Everything else (punctuation tokens,
/// mixed symbol strings) is other.
pub fn classify(word: &str) -> WordClass {
    if word.chars().any(is_decimal_digit) {
        WordClass::Numeric
    } else if !word.is_empty() && word.chars().all(char::is_alphabetic) {
        WordClass::Alpha
    } else {
        WordClass::Other
    }
}

/// Vocabulary restriction selector used by sampling and complexity runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Subset {
    All,
    Numeric,
    Alpha,
}

impl Subset {
    pub fn matches(self, class: WordClass) -> bool {
        match self {
            Subset::All => true,
            Subset::Numeric => class == WordClass::Numeric,
            Subset::Alpha => class == WordClass::Alpha,
        }
    }

    pub fn admits(self, word: &str) -> bool {
        self.matches(classify(word))
    }
}

impl fmt::Display for Subset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Subset::All => "all",
            Subset::Numeric => "numeric",
            Subset::Alpha => "alpha",
        })
    }
}

impl std::str::FromStr for Subset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Subset> {
        match s {
            "all" => Ok(Subset::All),
            "numeric" => Ok(Subset::Numeric),
            "alpha" => Ok(Subset::Alpha),
            other => Err(Error::InvalidParameter(format!(
                "unknown subset {other:?}, expected all|numeric|alpha"
            ))),
        }
    }
}

/// The vocabulary split into numeric, alphabetic and other words, with the
/// probability mass each side carries.
#[derive(Debug, Clone, PartialEq)]
pub struct VocabPartition {
    pub numeric: std::collections::BTreeSet<String>,
    pub alpha: std::collections::BTreeSet<String>,
    pub other: std::collections::BTreeSet<String>,
    pub p_numeric: f64,
    pub p_alpha: f64,
    pub p_other: f64,
}

pub fn partition_vocabulary(vocab: &Vocabulary) -> VocabPartition {
    let mut part = VocabPartition {
        numeric: Default::default(),
        alpha: Default::default(),
        other: Default::default(),
        p_numeric: 0.0,
        p_alpha: 0.0,
        p_other: 0.0,
    };
    let mut masses = [0u64; 3];
    for (w, c) in vocab.iter() {
        let class = classify(w);
        let (set, slot) = match class {
            WordClass::Numeric => (&mut part.numeric, 0),
            WordClass::Alpha => (&mut part.alpha, 1),
            WordClass::Other => (&mut part.other, 2),
        };
        set.insert(w.to_string());
        masses[slot] += c;
    }
    if vocab.total() > 0 {
        let total = vocab.total() as f64;
        part.p_numeric = masses[0] as f64 / total;
        part.p_alpha = masses[1] as f64 / total;
        part.p_other = masses[2] as f64 / total;
    }
    part
}

/// Draws words proportionally to their counts, restricted to a subset and
/// renormalized over it. Built once, sampled many times.
pub struct WordSampler<'v> {
    words: Vec<&'v str>,
    cum: Vec<u64>,
    total: u64,
}

impl<'v> WordSampler<'v> {
    pub fn new(vocab: &'v Vocabulary, subset: Subset) -> Result<Self> {
        let mut words = Vec::new();
        let mut cum = Vec::new();
        let mut total = 0u64;
        for (w, c) in vocab.iter() {
            if subset.admits(w) {
                total += c;
                words.push(w);
                cum.push(total);
            }
        }
        if total == 0 {
            return Err(Error::EmptySubset(subset));
        }
        Ok(WordSampler { words, cum, total })
    }

    /// Exact categorical draw using integer counts; no floating-point
    /// renormalization error.
    pub fn sample(&self, rng: &mut Stream) -> &'v str {
        let r = rng.next_below(self.total);
        let i = self.cum.partition_point(|&c| c <= r);
        self.words[i]
    }

    pub fn mass(&self) -> u64 {
        self.total
    }

    pub fn support_len(&self) -> usize {
        self.words.len()
    }
}

/// One-off draw; builds a throwaway sampler. Use [`WordSampler`] directly in
/// loops.
pub fn sample_word<'v>(vocab: &'v Vocabulary, subset: Subset, rng: &mut Stream) -> Result<&'v str> {
    Ok(WordSampler::new(vocab, subset)?.sample(rng))
}

/// Greedy packing of a token stream into chunks whose joined length stays
/// within `max_chars`. A token longer than `max_chars` becomes its own
/// over-long chunk rather than being split.
pub fn chunk_tokens(tokens: &[String], max_chars: usize) -> Vec<TokenSequence> {
    let mut chunks = Vec::new();
    let mut cur: Vec<String> = Vec::new();
    let mut cur_len = 0usize;
    for tok in tokens {
        let tok_len = tok.chars().count();
        let joined = if cur.is_empty() { tok_len } else { cur_len + 1 + tok_len };
        if !cur.is_empty() && joined > max_chars {
            chunks.push(TokenSequence(std::mem::take(&mut cur)));
            cur_len = tok_len;
        } else {
            cur_len = joined;
        }
        cur.push(tok.clone());
    }
    if !cur.is_empty() {
        chunks.push(TokenSequence(cur));
    }
    chunks
}

/// Tokenizes and chunks every document, in id order, into one flat list.
pub fn chunk_sequences(docs: &[Document], max_chars: usize) -> Vec<TokenSequence> {
    let mut order: Vec<&Document> = docs.iter().collect();
    order.sort_by(|a, b| a.id.cmp(&b.id));
    order
        .into_iter()
        .flat_map(|d| chunk_tokens(tokenize(&d.text).tokens(), max_chars))
        .collect()
}

/// Loads a corpus from either a directory of `.txt` files (id = file name) or
/// a JSONL file of `{"id", "text"}` records. Documents come back sorted by id
/// and ids must be unique.
pub fn load_corpus(path: &Path) -> Result<Vec<Document>> {
    let meta = fs::metadata(path)?;
    let mut docs = if meta.is_dir() {
        let mut docs = Vec::new();
        for entry in fs::read_dir(path)? {
            let entry = entry?;
            let p = entry.path();
            if p.is_file() && p.extension().and_then(|e| e.to_str()) == Some("txt") {
                let id = entry.file_name().to_string_lossy().into_owned();
                let text = fs::read_to_string(&p)
                    .map_err(|e| Error::Corpus(format!("{}: {e}", p.display())))?;
                docs.push(Document { id, text });
            }
        }
        docs
    } else {
        let raw = fs::read_to_string(path)?;
        let mut docs = Vec::new();
        for (lineno, line) in raw.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let doc: Document = serde_json::from_str(line).map_err(|e| {
                Error::Corpus(format!("{}:{}: {e}", path.display(), lineno + 1))
            })?;
            docs.push(doc);
        }
        docs
    };
    docs.sort_by(|a, b| a.id.cmp(&b.id));
    for pair in docs.windows(2) {
        if pair[0].id == pair[1].id {
            return Err(Error::DuplicateDocumentId(pair[0].id.clone()));
        }
    }
    Ok(docs)
}
