//! Denoising complexity: the probability that the optimal unigram decoder
//! fails to recover a word drawn from the corpus prior after one pass
//! through the substitution channel. Estimated by Monte Carlo with a
//! deterministic sharding scheme, checked against an exhaustive oracle on
//! small instances, and swept over noise levels.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::{CandidateIndex, UnigramDenoiser};
use crate::corpus::{Subset, Vocabulary, WordSampler};
use crate::error::{Error, Result};
use crate::noise::{interpolate, word_likelihood, ConfusionModel, CorruptionMode, NoiseLevel};
use crate::rng::{derive, Stream};

/// Cap on the number of observation strings `exhaustive_theta` may visit.
pub const ENUMERATION_LIMIT: u128 = 10_000_000;

/// One Monte Carlo (or closed-form) measurement of the word error
/// probability at a given noise level and word subset.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComplexityEstimate {
    pub theta: f64,
    pub std_error: f64,
    pub n_samples: u64,
    pub gamma: f64,
    pub subset: Subset,
    pub seed: u64,
}

/// Estimates per (noise level, subset) cell for one corpus and base model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub corpus: String,
    pub model: String,
    pub rows: Vec<ComplexityEstimate>,
}

/// Single-shard Monte Carlo estimate; see [`estimate_theta_sharded`].
/// The returned record carries `gamma = 1.0`, meaning the model exactly as
/// given; sweeps overwrite it with the grid value they interpolated at.
pub fn estimate_theta(
    vocab: &Vocabulary,
    model: &ConfusionModel,
    subset: Subset,
    n_samples: u64,
    seed: u64,
) -> Result<ComplexityEstimate> {
    estimate_theta_sharded(vocab, model, subset, n_samples, seed, 1)
}

/// Draws `n_samples` words from the subset-renormalized prior, corrupts each
/// with substitution-only noise, decodes against the full vocabulary, and
/// returns the error fraction with its Bernoulli standard error.
///
/// Sample `i` always uses the stream derived from `(seed, i)`, and shards
/// only partition the index range, so the result is bit-identical for every
/// shard count and thread schedule.
pub fn estimate_theta_sharded(
    vocab: &Vocabulary,
    model: &ConfusionModel,
    subset: Subset,
    n_samples: u64,
    seed: u64,
    shards: usize,
) -> Result<ComplexityEstimate> {
    if n_samples == 0 {
        return Err(Error::InvalidParameter("n_samples must be at least 1".into()));
    }
    if shards == 0 {
        return Err(Error::InvalidParameter("shard count must be at least 1".into()));
    }
    let sampler = WordSampler::new(vocab, subset)?;
    let index = CandidateIndex::from_vocabulary(vocab);
    let denoiser = UnigramDenoiser::new(&index, model);
    let shards = shards as u64;
    let ranges: Vec<(u64, u64)> = (0..shards)
        .map(|s| (s * n_samples / shards, (s + 1) * n_samples / shards))
        .collect();
    let errors: u64 = ranges
        .par_iter()
        .map(|&(lo, hi)| {
            let mut noisy = String::new();
            let mut codes: Vec<u32> = Vec::new();
            let mut errs = 0u64;
            for i in lo..hi {
                let mut rng = Stream::for_sample(seed, i);
                let w = sampler.sample(&mut rng);
                model.corrupt_into(w, CorruptionMode::SubstitutionOnly, &mut rng, &mut noisy);
                if denoiser.denoise_with(&noisy, &mut codes) != w {
                    errs += 1;
                }
            }
            errs
        })
        .sum();
    let n = n_samples as f64;
    let theta = errors as f64 / n;
    Ok(ComplexityEstimate {
        theta,
        std_error: (theta * (1.0 - theta) / n).sqrt(),
        n_samples,
        gamma: 1.0,
        subset,
        seed,
    })
}

/// Closed-form error probability: for every subset word, every observation
/// reachable by per-character substitution is enumerated, decoded by a plain
/// full-vocabulary scan, and its probability mass accumulated when the
/// decode misses. Characters outside the alphabet pass through unchanged and
/// are not varied. Insertion and deletion rates are ignored (substitution
/// regime). Errors out rather than visiting more than
/// [`ENUMERATION_LIMIT`] observations.
pub fn exhaustive_theta(vocab: &Vocabulary, model: &ConfusionModel, subset: Subset) -> Result<f64> {
    let alphabet = model.alphabet();
    let members: Vec<(&str, u64)> =
        vocab.iter().filter(|(w, _)| subset.admits(w)).collect();
    let subset_mass: u64 = members.iter().map(|(_, c)| c).sum();
    if subset_mass == 0 {
        return Err(Error::EmptySubset(subset));
    }

    let mut terms: u128 = 0;
    let base = alphabet.len() as u128;
    for (w, _) in &members {
        let varying = w.chars().filter(|&c| alphabet.index_of(c).is_some()).count() as u32;
        terms = terms.saturating_add(base.checked_pow(varying).unwrap_or(u128::MAX));
        if terms > ENUMERATION_LIMIT {
            return Err(Error::EnumerationTooLarge { terms, limit: ENUMERATION_LIMIT });
        }
    }

    // The decoder the observations are scored against: the same argmax,
    // priors, and tie order as the indexed decoder, expressed as a flat scan.
    let total = vocab.total() as f64;
    let mut scan: Vec<(&str, u64)> = vocab.iter().collect();
    scan.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
    let scan: Vec<(&str, f64)> =
        scan.into_iter().map(|(w, c)| (w, c as f64 / total)).collect();
    let decode = |o: &str| -> String {
        let mut best_score = 0.0f64;
        let mut best: Option<&str> = None;
        for (w, prior) in &scan {
            let score = word_likelihood(o, w, model) * prior;
            if score > best_score {
                best_score = score;
                best = Some(w);
            }
        }
        best.unwrap_or(o).to_string()
    };

    fn walk(
        pos: usize,
        wchars: &[char],
        widx: &[Option<usize>],
        model: &ConfusionModel,
        o: &mut String,
        p: f64,
        visit: &mut impl FnMut(&str, f64),
    ) {
        if pos == wchars.len() {
            visit(o, p);
            return;
        }
        match widx[pos] {
            None => {
                o.push(wchars[pos]);
                walk(pos + 1, wchars, widx, model, o, p, visit);
                o.pop();
            }
            Some(i) => {
                for j in 0..model.alphabet().len() {
                    let q = model.sub_prob(i, j);
                    if q == 0.0 {
                        continue;
                    }
                    o.push(model.alphabet().char_at(j));
                    walk(pos + 1, wchars, widx, model, o, p * q, visit);
                    o.pop();
                }
            }
        }
    }

    let mut theta = 0.0;
    for (w, c) in &members {
        let p_w = *c as f64 / subset_mass as f64;
        let wchars: Vec<char> = w.chars().collect();
        let widx: Vec<Option<usize>> =
            wchars.iter().map(|&ch| alphabet.index_of(ch)).collect();
        let mut err_mass = 0.0;
        let mut o = String::with_capacity(w.len());
        walk(0, &wchars, &widx, model, &mut o, 1.0, &mut |obs, p| {
            if decode(obs) != **w {
                err_mass += p;
            }
        });
        theta += p_w * err_mass;
    }
    Ok(theta)
}

/// Runs one Monte Carlo estimate per (subset, noise level) cell, each with
/// its own seed derived from the master seed so cells are independent.
/// Noise levels must be strictly increasing within [0, 1]; subsets must be
/// distinct. Rows are ordered subset-major, noise level ascending within.
#[allow(clippy::too_many_arguments)]
pub fn gamma_sweep(
    vocab: &Vocabulary,
    base_model: &ConfusionModel,
    gammas: &[f64],
    subsets: &[Subset],
    n_samples: u64,
    seed: u64,
    shards: usize,
    corpus_label: &str,
    model_label: &str,
) -> Result<SweepReport> {
    if gammas.is_empty() {
        return Err(Error::InvalidParameter("noise level grid is empty".into()));
    }
    if !gammas.windows(2).all(|p| p[0] < p[1]) {
        return Err(Error::InvalidParameter(
            "noise levels must be strictly increasing".into(),
        ));
    }
    if subsets.is_empty() {
        return Err(Error::InvalidParameter("subset list is empty".into()));
    }
    for (i, s) in subsets.iter().enumerate() {
        if subsets[..i].contains(s) {
            return Err(Error::InvalidParameter(format!("duplicate subset {s}")));
        }
    }
    let mut rows = Vec::with_capacity(subsets.len() * gammas.len());
    for (si, &subset) in subsets.iter().enumerate() {
        for (gi, &gamma) in gammas.iter().enumerate() {
            let level = NoiseLevel::new(gamma)?;
            let model = interpolate(base_model, level);
            let cell_seed = derive(seed, (si * gammas.len() + gi) as u64);
            let mut row =
                estimate_theta_sharded(vocab, &model, subset, n_samples, cell_seed, shards)?;
            row.gamma = gamma;
            rows.push(row);
        }
    }
    Ok(SweepReport {
        corpus: corpus_label.to_string(),
        model: model_label.to_string(),
        rows,
    })
}

fn csv_field(raw: &str) -> String {
    if raw.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", raw.replace('"', "\"\""))
    } else {
        raw.to_string()
    }
}

impl SweepReport {
    /// CSV with a fixed header; floats use the shortest round-trip form.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("corpus,model,subset,gamma,theta,std_error,n_samples,seed\n");
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{}",
                csv_field(&self.corpus),
                csv_field(&self.model),
                r.subset,
                r.gamma,
                r.theta,
                r.std_error,
                r.n_samples,
                r.seed
            );
        }
        out
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<SweepReport> {
        Ok(serde_json::from_str(text)?)
    }

    /// Self-contained 800x500 line chart, one polyline per subset, error
    /// probability against noise level.
    pub fn to_svg(&self) -> String {
        const W: f64 = 800.0;
        const H: f64 = 500.0;
        const LEFT: f64 = 70.0;
        const RIGHT: f64 = 770.0;
        const TOP: f64 = 30.0;
        const BOTTOM: f64 = 440.0;

        let ymax = self
            .rows
            .iter()
            .map(|r| r.theta)
            .fold(0.0f64, f64::max)
            .max(1e-3)
            * 1.05;
        let x = |g: f64| LEFT + g * (RIGHT - LEFT);
        let y = |t: f64| BOTTOM - (t / ymax) * (BOTTOM - TOP);

        let mut svg = String::new();
        let _ = writeln!(
            svg,
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" viewBox=\"0 0 {W} {H}\">"
        );
        let _ = writeln!(svg, "  <rect width=\"{W}\" height=\"{H}\" fill=\"white\"/>");
        let _ = writeln!(
            svg,
            "  <line x1=\"{LEFT}\" y1=\"{BOTTOM}\" x2=\"{RIGHT}\" y2=\"{BOTTOM}\" stroke=\"black\"/>"
        );
        let _ = writeln!(
            svg,
            "  <line x1=\"{LEFT}\" y1=\"{TOP}\" x2=\"{LEFT}\" y2=\"{BOTTOM}\" stroke=\"black\"/>"
        );
        for i in 0..=5 {
            let g = i as f64 / 5.0;
            let xi = x(g);
            let _ = writeln!(
                svg,
                "  <line x1=\"{xi:.2}\" y1=\"{BOTTOM}\" x2=\"{xi:.2}\" y2=\"{}\" stroke=\"black\"/>",
                BOTTOM + 5.0
            );
            let _ = writeln!(
                svg,
                "  <text x=\"{xi:.2}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\">{g:.1}</text>",
                BOTTOM + 20.0
            );
            let t = ymax * g;
            let yi = y(t);
            let _ = writeln!(
                svg,
                "  <line x1=\"{}\" y1=\"{yi:.2}\" x2=\"{LEFT}\" y2=\"{yi:.2}\" stroke=\"black\"/>",
                LEFT - 5.0
            );
            let _ = writeln!(
                svg,
                "  <text x=\"{}\" y=\"{:.2}\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"end\">{t:.3}</text>",
                LEFT - 8.0,
                yi + 4.0
            );
        }
        let _ = writeln!(
            svg,
            "  <text x=\"{:.2}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"14\" text-anchor=\"middle\">noise level</text>",
            (LEFT + RIGHT) / 2.0,
            H - 15.0
        );
        let _ = writeln!(
            svg,
            "  <text x=\"18\" y=\"{:.2}\" font-family=\"sans-serif\" font-size=\"14\" text-anchor=\"middle\" transform=\"rotate(-90 18 {:.2})\">error probability</text>",
            (TOP + BOTTOM) / 2.0,
            (TOP + BOTTOM) / 2.0
        );

        let palette = |s: Subset| match s {
            Subset::All => "#4363d8",
            Subset::Numeric => "#e6194b",
            Subset::Alpha => "#3cb44b",
        };
        let mut seen: Vec<Subset> = Vec::new();
        for r in &self.rows {
            if !seen.contains(&r.subset) {
                seen.push(r.subset);
            }
        }
        for (k, subset) in seen.iter().enumerate() {
            let pts: Vec<String> = self
                .rows
                .iter()
                .filter(|r| r.subset == *subset)
                .map(|r| format!("{:.2},{:.2}", x(r.gamma), y(r.theta)))
                .collect();
            let color = palette(*subset);
            let _ = writeln!(
                svg,
                "  <polyline points=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"2\"/>",
                pts.join(" ")
            );
            let ly = TOP + 10.0 + 18.0 * k as f64;
            let _ = writeln!(
                svg,
                "  <rect x=\"{}\" y=\"{:.2}\" width=\"12\" height=\"12\" fill=\"{color}\"/>",
                LEFT + 12.0,
                ly - 10.0
            );
            let _ = writeln!(
                svg,
                "  <text x=\"{}\" y=\"{ly:.2}\" font-family=\"sans-serif\" font-size=\"12\">{subset}</text>",
                LEFT + 30.0
            );
        }
        svg.push_str("</svg>\n");
        svg
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::noise::{uniform_noise, Alphabet};

    fn vocab(entries: &[(&str, u64)]) -> Vocabulary {
        Vocabulary::from_counts(entries.iter().map(|(w, c)| (w.to_string(), *c)))
    }

    fn two_word_symmetric() -> (Vocabulary, ConfusionModel) {
        let v = vocab(&[("a", 1), ("b", 1)]);
        let m = uniform_noise(Alphabet::new("ab".chars()).unwrap(), 0.2).unwrap();
        (v, m)
    }

    fn two_word_skewed() -> (Vocabulary, ConfusionModel) {
        let v = vocab(&[("a", 9), ("b", 1)]);
        let m = uniform_noise(Alphabet::new("ab".chars()).unwrap(), 0.2).unwrap();
        (v, m)
    }

    #[test]
    fn exhaustive_matches_hand_computed_values() {
        let (v, m) = two_word_symmetric();
        let t = exhaustive_theta(&v, &m, Subset::All).unwrap();
        assert!((t - 0.2).abs() < 1e-12, "symmetric: {t}");

        let (v, m) = two_word_skewed();
        let t = exhaustive_theta(&v, &m, Subset::All).unwrap();
        assert!((t - 0.1).abs() < 1e-12, "skewed: {t}");

        let v = vocab(&[("abc", 7)]);
        let m = uniform_noise(Alphabet::new("abc".chars()).unwrap(), 0.3).unwrap();
        let t = exhaustive_theta(&v, &m, Subset::All).unwrap();
        assert!(t.abs() < 1e-12, "singleton: {t}");
    }

    #[test]
    fn monte_carlo_brackets_the_exact_value() {
        let n = 100_000;
        for (v, m, exact) in [
            (two_word_symmetric().0, two_word_symmetric().1, 0.2),
            (two_word_skewed().0, two_word_skewed().1, 0.1),
        ] {
            let est = estimate_theta(&v, &m, Subset::All, n, 2024).unwrap();
            let sigma = (exact * (1.0 - exact) / n as f64).sqrt();
            assert!(
                (est.theta - exact).abs() < 3.0 * sigma,
                "theta {} vs exact {exact} (sigma {sigma})",
                est.theta
            );
            assert!((est.std_error
                - (est.theta * (1.0 - est.theta) / n as f64).sqrt())
            .abs()
                < 1e-15);
        }
    }

    #[test]
    fn zero_noise_level_is_exactly_zero() {
        let v = vocab(&[("cat", 3), ("cot", 1), ("dog", 2)]);
        let base = uniform_noise(Alphabet::sorted_from("catodg".chars()), 0.4).unwrap();
        let frozen = interpolate(&base, NoiseLevel::new(0.0).unwrap());
        let est = estimate_theta(&v, &frozen, Subset::All, 20_000, 7).unwrap();
        assert_eq!(est.theta, 0.0);
        let exact = exhaustive_theta(&v, &frozen, Subset::All).unwrap();
        assert_eq!(exact, 0.0);
    }

    #[test]
    fn sharding_is_bit_identical() {
        let v = vocab(&[("cat", 5), ("cot", 2), ("bat", 1), ("at", 4)]);
        let m = uniform_noise(Alphabet::sorted_from("catob".chars()), 0.25).unwrap();
        let one = estimate_theta_sharded(&v, &m, Subset::All, 10_001, 99, 1).unwrap();
        let four = estimate_theta_sharded(&v, &m, Subset::All, 10_001, 99, 4).unwrap();
        let sixteen = estimate_theta_sharded(&v, &m, Subset::All, 10_001, 99, 16).unwrap();
        assert_eq!(one.theta.to_bits(), four.theta.to_bits());
        assert_eq!(one.theta.to_bits(), sixteen.theta.to_bits());
    }

    #[test]
    fn monte_carlo_agrees_with_oracle_on_small_instances() {
        let mut rng = Stream::new(4242);
        let alphabet: Vec<char> = "abcde".chars().collect();
        for case in 0u64..6 {
            let size = 2 + rng.next_below(5) as usize;
            let mut entries = std::collections::BTreeMap::new();
            while entries.len() < size {
                let len = 1 + rng.next_below(3) as usize;
                let w: String = (0..len)
                    .map(|_| alphabet[rng.next_below(5) as usize])
                    .collect();
                entries.insert(w, 1 + rng.next_below(9));
            }
            let v = Vocabulary::from_counts(entries);
            let m = uniform_noise(
                Alphabet::new(alphabet.iter().copied()).unwrap(),
                0.05 + 0.3 * rng.next_f64(),
            )
            .unwrap();
            let exact = exhaustive_theta(&v, &m, Subset::All).unwrap();
            let n = 40_000;
            let est = estimate_theta(&v, &m, Subset::All, n, derive(11, case)).unwrap();
            let sigma = (exact * (1.0 - exact) / n as f64).sqrt().max(1e-9);
            assert!(
                (est.theta - exact).abs() < 4.0 * sigma,
                "case {case}: mc {} vs exact {exact}",
                est.theta
            );
        }
    }

    #[test]
    fn subset_decomposition_is_exact_for_the_oracle() {
        let v = vocab(&[("12", 2), ("34", 1), ("ab", 3), ("cd", 2), ("a1", 2)]);
        let m = uniform_noise(Alphabet::sorted_from("1234abcd".chars()), 0.2).unwrap();
        let part = crate::corpus::partition_vocabulary(&v);
        let all = exhaustive_theta(&v, &m, Subset::All).unwrap();
        let num = exhaustive_theta(&v, &m, Subset::Numeric).unwrap();
        let alpha = exhaustive_theta(&v, &m, Subset::Alpha).unwrap();
        // The only non-numeric, non-alpha mass here is none: "a1" is numeric.
        assert!(part.p_other.abs() < 1e-12);
        let mixed = part.p_numeric * num + part.p_alpha * alpha;
        assert!((all - mixed).abs() < 1e-12, "all {all} vs mixture {mixed}");
    }

    #[test]
    fn degradation_is_strictly_monotone_on_digit_strings() {
        let mut rng = Stream::new(5150);
        let digits: Vec<char> = "0123456789".chars().collect();
        let mut entries = std::collections::BTreeMap::new();
        while entries.len() < 10 {
            let w: String = (0..2).map(|_| digits[rng.next_below(10) as usize]).collect();
            entries.insert(w, 1 + rng.next_below(5));
        }
        let v = Vocabulary::from_counts(entries);
        let base = uniform_noise(Alphabet::new(digits.iter().copied()).unwrap(), 0.3).unwrap();
        let mut last = -1.0;
        for i in 1..=10 {
            let g = i as f64 / 10.0;
            let m = interpolate(&base, NoiseLevel::new(g).unwrap());
            let t = exhaustive_theta(&v, &m, Subset::All).unwrap();
            assert!(t > last, "gamma {g}: {t} not above {last}");
            last = t;
        }
    }

    #[test]
    fn enumeration_guard_trips() {
        let v = vocab(&[("0123456789", 1)]);
        let m = uniform_noise(Alphabet::sorted_from("0123456789".chars()), 0.1).unwrap();
        match exhaustive_theta(&v, &m, Subset::All) {
            Err(Error::EnumerationTooLarge { .. }) => {}
            other => panic!("expected enumeration guard, got {other:?}"),
        }
    }

    #[test]
    fn parameter_validation() {
        let (v, m) = two_word_symmetric();
        assert!(estimate_theta(&v, &m, Subset::All, 0, 1).is_err());
        assert!(estimate_theta_sharded(&v, &m, Subset::All, 10, 1, 0).is_err());
        assert!(estimate_theta(&v, &m, Subset::Numeric, 10, 1).is_err());
        assert!(gamma_sweep(&v, &m, &[], &[Subset::All], 10, 1, 1, "c", "m").is_err());
        assert!(gamma_sweep(&v, &m, &[0.5, 0.5], &[Subset::All], 10, 1, 1, "c", "m").is_err());
        assert!(gamma_sweep(&v, &m, &[0.2, 0.1], &[Subset::All], 10, 1, 1, "c", "m").is_err());
        assert!(
            gamma_sweep(&v, &m, &[0.5], &[Subset::All, Subset::All], 10, 1, 1, "c", "m").is_err()
        );
    }

    #[test]
    fn sweep_report_shape_and_zero_level() {
        let (v, m) = two_word_symmetric();
        let report = gamma_sweep(
            &v,
            &m,
            &[0.0],
            &[Subset::All],
            5_000,
            3,
            1,
            "tiny",
            "uniform",
        )
        .unwrap();
        assert_eq!(report.rows.len(), 1);
        assert_eq!(report.rows[0].theta, 0.0);
        assert_eq!(report.rows[0].gamma, 0.0);

        let report = gamma_sweep(
            &v,
            &m,
            &[0.5],
            &[Subset::All],
            100_000,
            17,
            1,
            "tiny",
            "uniform",
        )
        .unwrap();
        // Effective flip probability is 0.5 * 0.2.
        let exact = 0.1f64;
        let sigma = (exact * (1.0 - exact) / 100_000.0).sqrt();
        assert!((report.rows[0].theta - exact).abs() < 3.0 * sigma);
    }

    #[test]
    fn sweep_rows_follow_the_linear_trend() {
        let (v, m) = two_word_symmetric();
        let gammas: Vec<f64> = (1..=10).map(|i| i as f64 / 10.0).collect();
        let report = gamma_sweep(
            &v,
            &m,
            &gammas,
            &[Subset::All],
            50_000,
            21,
            1,
            "tiny",
            "uniform",
        )
        .unwrap();
        for row in &report.rows {
            let exact = 0.2 * row.gamma;
            let sigma = (exact * (1.0 - exact) / row.n_samples as f64).sqrt().max(1e-9);
            assert!(
                (row.theta - exact).abs() < 3.0 * sigma,
                "gamma {}: {} vs {exact}",
                row.gamma,
                row.theta
            );
        }
        // Distinct cells get distinct seeds.
        let mut seeds: Vec<u64> = report.rows.iter().map(|r| r.seed).collect();
        seeds.sort_unstable();
        seeds.dedup();
        assert_eq!(seeds.len(), report.rows.len());
    }

    #[test]
    fn csv_layout_is_frozen() {
        let report = SweepReport {
            corpus: "receipts, 2021".to_string(),
            model: "ocr".to_string(),
            rows: vec![ComplexityEstimate {
                theta: 0.25,
                std_error: 0.001,
                n_samples: 1000,
                gamma: 0.5,
                subset: Subset::Alpha,
                seed: 42,
            }],
        };
        assert_eq!(
            report.to_csv(),
            "corpus,model,subset,gamma,theta,std_error,n_samples,seed\n\
             \"receipts, 2021\",ocr,alpha,0.5,0.25,0.001,1000,42\n"
        );
    }

    #[test]
    fn json_round_trips_and_svg_has_one_line_per_subset() {
        let (v, m) = two_word_symmetric();
        let report = gamma_sweep(
            &v,
            &m,
            &[0.2, 0.8],
            &[Subset::All, Subset::Alpha],
            2_000,
            9,
            2,
            "tiny",
            "uniform",
        )
        .unwrap();
        let back = SweepReport::from_json(&report.to_json().unwrap()).unwrap();
        assert_eq!(back, report);

        let svg = report.to_svg();
        assert!(svg.starts_with("<svg"));
        assert_eq!(svg.matches("<polyline").count(), 2);
        assert!(svg.contains("width=\"800\""));
        assert!(svg.contains("height=\"500\""));
    }
}
