//! Noisy-channel decoders over a vocabulary: the optimal unigram decoder
//! (argmax of likelihood times prior, the decoder whose residual error the
//! complexity estimator measures) and a bigram beam-search decoder for
//! context-aware denoising.

use std::collections::HashMap;

use crate::corpus::{Document, TokenSequence, Vocabulary};
use crate::error::{Error, Result};
use crate::noise::{Alphabet, ConfusionModel};

/// Floor on log-probabilities; keeps impossible continuations representable
/// without -inf arithmetic.
pub const LOG_FLOOR: f64 = -745.0;

const OUT_OF_ALPHABET: u32 = u32::MAX;

/// Vocabulary words bucketed by character length, each bucket sorted by
/// descending prior then ascending word. Same-length lookup is the only
/// candidate enumeration the substitution-only likelihood permits.
#[derive(Debug, Clone, PartialEq)]
pub struct CandidateIndex {
    by_length: HashMap<usize, Vec<(String, f64)>>,
    words: usize,
}

impl CandidateIndex {
    pub fn from_vocabulary(vocab: &Vocabulary) -> CandidateIndex {
        let total = vocab.total() as f64;
        let mut grouped: HashMap<usize, Vec<(String, u64)>> = HashMap::new();
        for (w, c) in vocab.iter() {
            grouped.entry(w.chars().count()).or_default().push((w.to_string(), c));
        }
        let mut by_length = HashMap::with_capacity(grouped.len());
        let mut words = 0;
        for (len, mut entries) in grouped {
            entries.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
            words += entries.len();
            by_length.insert(
                len,
                entries.into_iter().map(|(w, c)| (w, c as f64 / total)).collect(),
            );
        }
        CandidateIndex { by_length, words }
    }

    /// Builds an index from explicit positive prior weights (not necessarily
    /// normalized). Duplicate words are rejected.
    pub fn from_priors(entries: impl IntoIterator<Item = (String, f64)>) -> Result<CandidateIndex> {
        let mut seen: HashMap<String, ()> = HashMap::new();
        let mut grouped: HashMap<usize, Vec<(String, f64)>> = HashMap::new();
        let mut words = 0;
        for (w, p) in entries {
            if !(p.is_finite() && p > 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "prior for {w:?} must be positive and finite, got {p}"
                )));
            }
            if seen.insert(w.clone(), ()).is_some() {
                return Err(Error::InvalidParameter(format!("duplicate word {w:?}")));
            }
            grouped.entry(w.chars().count()).or_default().push((w, p));
            words += 1;
        }
        let mut by_length = HashMap::with_capacity(grouped.len());
        for (len, mut entries) in grouped {
            entries.sort_by(|a, b| {
                b.1.partial_cmp(&a.1).expect("finite priors").then_with(|| a.0.cmp(&b.0))
            });
            by_length.insert(len, entries);
        }
        Ok(CandidateIndex { by_length, words })
    }

    /// Candidates of the given character length: `(word, prior)` in
    /// descending-prior, ascending-word order. Empty slice if none.
    pub fn bucket(&self, len: usize) -> &[(String, f64)] {
        self.by_length.get(&len).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn word_count(&self) -> usize {
        self.words
    }

    pub fn is_empty(&self) -> bool {
        self.words == 0
    }

    pub fn lengths(&self) -> impl Iterator<Item = usize> + '_ {
        self.by_length.keys().copied()
    }
}

struct EncodedBucket<'i> {
    words: Vec<&'i str>,
    priors: Vec<f64>,
    codes: Vec<u32>,
}

/// The unigram decoder with candidates pre-encoded against a model's
/// alphabet. Construction is O(vocabulary); each decode scans one length
/// bucket with flat-array arithmetic. Immutable and safe to share across
/// threads.
pub struct UnigramDenoiser<'i> {
    n: usize,
    sub: &'i [f64],
    alphabet: &'i Alphabet,
    buckets: HashMap<usize, EncodedBucket<'i>>,
}

impl<'i> UnigramDenoiser<'i> {
    pub fn new(index: &'i CandidateIndex, model: &'i ConfusionModel) -> Self {
        let alphabet = model.alphabet();
        let mut buckets = HashMap::with_capacity(index.by_length.len());
        for (&len, entries) in &index.by_length {
            let mut words = Vec::with_capacity(entries.len());
            let mut priors = Vec::with_capacity(entries.len());
            let mut codes = Vec::with_capacity(entries.len() * len);
            for (w, p) in entries {
                words.push(w.as_str());
                priors.push(*p);
                for c in w.chars() {
                    codes.push(
                        alphabet.index_of(c).map(|i| i as u32).unwrap_or(OUT_OF_ALPHABET),
                    );
                }
            }
            buckets.insert(len, EncodedBucket { words, priors, codes });
        }
        UnigramDenoiser { n: alphabet.len(), sub: model.sub_flat(), alphabet, buckets }
    }

    fn encode(&self, o: &str, buf: &mut Vec<u32>) -> bool {
        buf.clear();
        for c in o.chars() {
            match self.alphabet.index_of(c) {
                Some(i) => buf.push(i as u32),
                None => return false,
            }
        }
        true
    }

    #[inline]
    fn likelihood_at(&self, bucket: &EncodedBucket, k: usize, ocodes: &[u32]) -> f64 {
        let base = k * ocodes.len();
        let mut p = 1.0f64;
        for (pos, &oc) in ocodes.iter().enumerate() {
            let wc = bucket.codes[base + pos];
            if wc == OUT_OF_ALPHABET {
                return 0.0;
            }
            p *= self.sub[wc as usize * self.n + oc as usize];
            if p == 0.0 {
                return 0.0;
            }
        }
        p
    }

    /// Argmax of `likelihood * prior` over the same-length bucket. Ties break
    /// toward higher prior, then the lexicographically smaller word (the
    /// bucket order). All-zero scores fall back to the observation.
    pub fn denoise<'a>(&'a self, o: &'a str) -> &'a str {
        let mut buf = Vec::with_capacity(o.len());
        self.denoise_with(o, &mut buf)
    }

    /// Like [`denoise`](Self::denoise) but reusing a scratch buffer;
    /// the hot-loop entry point.
    pub fn denoise_with<'a>(&'a self, o: &'a str, buf: &mut Vec<u32>) -> &'a str {
        if !self.encode(o, buf) {
            return o;
        }
        let Some(bucket) = self.buckets.get(&buf.len()) else {
            return o;
        };
        let mut best_score = 0.0f64;
        let mut best: Option<&str> = None;
        for k in 0..bucket.words.len() {
            let score = self.likelihood_at(bucket, k, buf) * bucket.priors[k];
            if score > best_score {
                best_score = score;
                best = Some(bucket.words[k]);
            }
        }
        best.unwrap_or(o)
    }

    pub fn denoise_sequence(&self, seq: &TokenSequence) -> TokenSequence {
        let mut buf = Vec::new();
        TokenSequence::new(
            seq.iter().map(|t| self.denoise_with(t, &mut buf).to_string()).collect(),
        )
    }

    /// Beam decode of one sequence; returns the hypothesis and its total
    /// log-score. Per position the candidate pool is every same-length bucket
    /// word with nonzero likelihood plus the observed token as a floor-scored
    /// fallback. Hypotheses ending in the same word are merged keeping the
    /// best prefix.
    ///
    /// Log-score ties break by the linear one-step joint, then candidate
    /// prior, then word. The linear key matters: taking ln can collapse
    /// scores that differ in the last ulp, and without it a width-1 beam
    /// could disagree with the unigram argmax on such pairs.
    pub fn beam_decode_scored<'a>(
        &'a self,
        seq: &'a TokenSequence,
        prior: &BigramPrior,
        cfg: BeamConfig,
    ) -> (TokenSequence, f64) {
        struct Node<'w> {
            word: &'w str,
            score: f64,
            joint: f64,
            uniprior: f64,
            parent: usize,
        }

        if seq.is_empty() {
            return (TokenSequence::default(), 0.0);
        }
        let width = cfg.width();
        let mut layers: Vec<Vec<Node<'a>>> = Vec::with_capacity(seq.len());
        let mut ocodes: Vec<u32> = Vec::new();
        let mut viable: Vec<(usize, f64)> = Vec::new();
        for (pos, obs) in seq.iter().enumerate() {
            let obs = obs.as_str();
            viable.clear();
            let bucket = if self.encode(obs, &mut ocodes) {
                self.buckets.get(&ocodes.len())
            } else {
                None
            };
            if let Some(b) = bucket {
                for k in 0..b.words.len() {
                    let lik = self.likelihood_at(b, k, &ocodes);
                    if lik > 0.0 {
                        viable.push((k, lik));
                    }
                }
            }
            let mut ext: HashMap<&'a str, Node<'a>> = HashMap::new();
            let offer = |ext: &mut HashMap<&'a str, Node<'a>>, node: Node<'a>| {
                match ext.entry(node.word) {
                    std::collections::hash_map::Entry::Occupied(mut e) => {
                        let old = e.get();
                        if node.score > old.score
                            || (node.score == old.score && node.joint > old.joint)
                        {
                            e.insert(node);
                        }
                    }
                    std::collections::hash_map::Entry::Vacant(e) => {
                        e.insert(node);
                    }
                }
            };
            let parent_nodes: &[Node<'a>] =
                if pos == 0 { &[] } else { &layers[pos - 1] };
            // Position 0 extends a single virtual root with no word.
            for pi in 0..parent_nodes.len().max(1) {
                let (prev_word, prev_score) = match parent_nodes.get(pi) {
                    Some(p) => (Some(p.word), p.score),
                    None => (None, 0.0),
                };
                if let Some(b) = bucket {
                    for &(k, lik) in &viable {
                        let w = b.words[k];
                        let joint = lik * prior.conditional(w, prev_word);
                        let delta =
                            if joint > 0.0 { joint.ln().max(LOG_FLOOR) } else { LOG_FLOOR };
                        offer(
                            &mut ext,
                            Node {
                                word: w,
                                score: prev_score + delta,
                                joint,
                                uniprior: b.priors[k],
                                parent: pi,
                            },
                        );
                    }
                }
                offer(
                    &mut ext,
                    Node {
                        word: obs,
                        score: prev_score + LOG_FLOOR,
                        joint: 0.0,
                        uniprior: prior.unigram().frequency(obs),
                        parent: pi,
                    },
                );
            }
            let mut layer: Vec<Node<'a>> = ext.into_values().collect();
            layer.sort_unstable_by(|a, b| {
                b.score
                    .partial_cmp(&a.score)
                    .expect("finite scores")
                    .then_with(|| b.joint.partial_cmp(&a.joint).expect("finite joints"))
                    .then_with(|| b.uniprior.partial_cmp(&a.uniprior).expect("finite priors"))
                    .then_with(|| a.word.cmp(b.word))
            });
            layer.truncate(width);
            layers.push(layer);
        }
        let mut words = Vec::with_capacity(seq.len());
        let total = layers.last().expect("non-empty sequence")[0].score;
        let mut at = 0usize;
        for pos in (0..layers.len()).rev() {
            let node = &layers[pos][at];
            words.push(node.word.to_string());
            at = node.parent;
        }
        words.reverse();
        (TokenSequence::new(words), total)
    }
}

/// One-off decode of a single word; builds a throwaway denoiser. Use
/// [`UnigramDenoiser`] directly in loops.
pub fn denoise_word(o: &str, index: &CandidateIndex, model: &ConfusionModel) -> String {
    UnigramDenoiser::new(index, model).denoise(o).to_string()
}

/// Element-wise unigram decoding of a sequence; length-preserving.
pub fn denoise_sequence_unigram(
    seq: &TokenSequence,
    index: &CandidateIndex,
    model: &ConfusionModel,
) -> TokenSequence {
    UnigramDenoiser::new(index, model).denoise_sequence(seq)
}

/// Beam decoding with a bigram prior; see
/// [`UnigramDenoiser::beam_decode_scored`].
pub fn denoise_sequence_beam(
    seq: &TokenSequence,
    index: &CandidateIndex,
    model: &ConfusionModel,
    prior: &BigramPrior,
    cfg: BeamConfig,
) -> TokenSequence {
    UnigramDenoiser::new(index, model).beam_decode_scored(seq, prior, cfg).0
}

/// Bigram language model with linear backoff to the unigram distribution:
/// `p(w|prev) = λ·count(prev,w)/count(prev,·) + (1−λ)·p(w)`, and plain `p(w)`
/// when `prev` has no outgoing bigrams (or no context is given).
#[derive(Debug, Clone)]
pub struct BigramPrior {
    unigram: Vocabulary,
    follow: HashMap<String, FollowSet>,
    backoff: f64,
}

#[derive(Debug, Clone)]
struct FollowSet {
    total: u64,
    counts: HashMap<String, u64>,
}

impl BigramPrior {
    pub fn new(
        unigram: Vocabulary,
        bigrams: impl IntoIterator<Item = ((String, String), u64)>,
        backoff_weight: f64,
    ) -> Result<BigramPrior> {
        if !(backoff_weight.is_finite() && 0.0 < backoff_weight && backoff_weight < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "backoff weight must lie strictly between 0 and 1, got {backoff_weight}"
            )));
        }
        let mut follow: HashMap<String, FollowSet> = HashMap::new();
        for ((prev, word), count) in bigrams {
            if count == 0 {
                continue;
            }
            let set = follow
                .entry(prev)
                .or_insert_with(|| FollowSet { total: 0, counts: HashMap::new() });
            set.total += count;
            *set.counts.entry(word).or_insert(0) += count;
        }
        Ok(BigramPrior { unigram, follow, backoff: backoff_weight })
    }

    /// Counts unigrams and within-document consecutive pairs, visiting
    /// documents in id order.
    pub fn from_documents(docs: &[Document], backoff_weight: f64) -> Result<BigramPrior> {
        let unigram = Vocabulary::from_documents(docs);
        let mut order: Vec<&Document> = docs.iter().collect();
        order.sort_by(|a, b| a.id.cmp(&b.id));
        let mut pairs: HashMap<(String, String), u64> = HashMap::new();
        for doc in order {
            let tokens = crate::corpus::tokenize(&doc.text).into_tokens();
            for pair in tokens.windows(2) {
                *pairs.entry((pair[0].clone(), pair[1].clone())).or_insert(0) += 1;
            }
        }
        BigramPrior::new(unigram, pairs, backoff_weight)
    }

    pub fn conditional(&self, word: &str, prev: Option<&str>) -> f64 {
        let p_uni = self.unigram.frequency(word);
        match prev.and_then(|p| self.follow.get(p)) {
            None => p_uni,
            Some(set) => {
                let ml = set.counts.get(word).copied().unwrap_or(0) as f64 / set.total as f64;
                self.backoff * ml + (1.0 - self.backoff) * p_uni
            }
        }
    }

    pub fn unigram(&self) -> &Vocabulary {
        &self.unigram
    }

    pub fn backoff_weight(&self) -> f64 {
        self.backoff
    }
}

/// Beam width; defaults to 8.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BeamConfig {
    width: usize,
}

impl BeamConfig {
    pub fn new(width: usize) -> Result<BeamConfig> {
        if width == 0 {
            return Err(Error::InvalidParameter("beam width must be at least 1".into()));
        }
        Ok(BeamConfig { width })
    }

    pub fn width(self) -> usize {
        self.width
    }
}

impl Default for BeamConfig {
    fn default() -> Self {
        BeamConfig { width: 8 }
    }
}
