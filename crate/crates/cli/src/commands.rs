//! One function per subcommand. Commands load inputs, call into the library,
//! and write artifacts through the embedding helpers so every output records
//! the configuration that produced it.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::json;

use garble_core::channel::{BeamConfig, BigramPrior, CandidateIndex, UnigramDenoiser};
use garble_core::complexity::gamma_sweep;
use garble_core::corpus::{
    chunk_tokens, load_corpus, partition_vocabulary, tokenize, Subset, TokenSequence, Vocabulary,
};
use garble_core::metrics::{aggregate_wer, EvalReport, EvalRow};
use garble_core::noise::{
    estimate_from_aligned, interpolate, read_aligned_pairs, uniform_noise, Alphabet,
    ConfusionModel, CorruptionMode, NoiseLevel,
};
use garble_core::rng::{mix, Stream};

use crate::embed::{
    csv_with_config, emit, json_with_config, read_jsonl, svg_with_config, write_jsonl,
    CorruptRecord, HypRecord,
};
use crate::{
    CliError, ComplexityArgs, CorruptArgs, Decoder, DenoiseArgs, EvaluateArgs, Format, Mode,
    NoiseArgs, NoiseKind, StatsArgs,
};

fn stem(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

fn resolve_seed(seed: Option<u64>) -> u64 {
    seed.unwrap_or_else(|| {
        let nanos = std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_nanos() as u64)
            .unwrap_or(0);
        mix(nanos ^ ((std::process::id() as u64) << 32))
    })
}

/// Loads the model file, or builds uniform noise over the vocabulary's
/// characters. Returns the model and a short label for reports.
fn resolve_model(
    model: Option<&PathBuf>,
    epsilon: f64,
    vocab: &Vocabulary,
) -> Result<(ConfusionModel, String), CliError> {
    match model {
        Some(path) => Ok((ConfusionModel::read_json(path)?, stem(path))),
        None => {
            let alphabet = Alphabet::new(vocab.character_set())?;
            let model = uniform_noise(alphabet, epsilon)?;
            Ok((model, format!("uniform(eps={epsilon})")))
        }
    }
}

fn round9(x: f64) -> f64 {
    (x * 1e9).round() / 1e9
}

fn parse_f64(raw: &str) -> Result<f64, CliError> {
    raw.trim()
        .parse::<f64>()
        .map_err(|_| CliError::usage(format!("not a number: {raw:?}")))
}

/// "start:end:step" (inclusive, values rounded to 1e-9) or a single value.
fn parse_gammas(spec: &str) -> Result<Vec<f64>, CliError> {
    let parts: Vec<&str> = spec.split(':').collect();
    let values = match parts.as_slice() {
        [one] => vec![round9(parse_f64(one)?)],
        [start, end, step] => {
            let (start, end, step) = (parse_f64(start)?, parse_f64(end)?, parse_f64(step)?);
            if step <= 0.0 {
                return Err(CliError::usage("grid step must be positive"));
            }
            if end < start {
                return Err(CliError::usage("grid end is below its start"));
            }
            let mut values = Vec::new();
            for k in 0u32.. {
                let g = round9(start + f64::from(k) * step);
                if g > end + 1e-9 {
                    break;
                }
                values.push(g);
            }
            values
        }
        _ => {
            return Err(CliError::usage(
                "expected --gammas START:END:STEP or a single value",
            ))
        }
    };
    for &g in &values {
        if !(0.0..=1.0).contains(&g) {
            return Err(CliError::usage(format!("noise level {g} is outside [0, 1]")));
        }
    }
    Ok(values)
}

fn parse_subsets(spec: &str) -> Result<Vec<Subset>, CliError> {
    let mut subsets = Vec::new();
    for part in spec.split(',') {
        let subset: Subset = part
            .trim()
            .parse()
            .map_err(|e: garble_core::Error| CliError::usage(e.to_string()))?;
        if subsets.contains(&subset) {
            return Err(CliError::usage(format!("subset {subset} given twice")));
        }
        subsets.push(subset);
    }
    Ok(subsets)
}

fn csv_field(raw: &str) -> String {
    if raw.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", raw.replace('"', "\"\""))
    } else {
        raw.to_string()
    }
}

pub fn stats(args: StatsArgs) -> Result<(), CliError> {
    #[derive(Serialize)]
    struct StatsConfig {
        command: &'static str,
        corpus: String,
        format: String,
    }

    let docs = load_corpus(&args.corpus)?;
    if docs.is_empty() {
        eprintln!("warning: corpus {} has no documents", args.corpus.display());
    }
    let vocab = Vocabulary::from_documents(&docs);
    let part = partition_vocabulary(&vocab);
    let label = stem(&args.corpus);
    let cfg = StatsConfig {
        command: "stats",
        corpus: args.corpus.display().to_string(),
        format: args.format.to_string(),
    };

    let text = match args.format {
        Format::Csv => {
            let body = format!(
                "corpus,documents,vocab_size,numeric_vocab,alpha_vocab,p_numeric,p_alpha\n\
                 {},{},{},{},{},{},{}\n",
                csv_field(&label),
                docs.len(),
                vocab.len(),
                part.numeric.len(),
                part.alpha.len(),
                part.p_numeric,
                part.p_alpha
            );
            csv_with_config(&cfg, &body)
        }
        Format::Json => json_with_config(
            &cfg,
            json!({
                "corpus": label,
                "documents": docs.len(),
                "vocab_size": vocab.len(),
                "numeric_vocab": part.numeric.len(),
                "alpha_vocab": part.alpha.len(),
                "p_numeric": part.p_numeric,
                "p_alpha": part.p_alpha,
            }),
        ),
    };
    emit(args.out.as_deref(), &text)?;
    if let Some(path) = &args.vocab_out {
        vocab.write_json(path)?;
    }
    if let Some(path) = &args.out {
        println!(
            "{label}: {} documents, |V| = {} ({} numeric, {} alpha), \
             p_numeric = {:.4}, p_alpha = {:.4} -> {}",
            docs.len(),
            vocab.len(),
            part.numeric.len(),
            part.alpha.len(),
            part.p_numeric,
            part.p_alpha,
            path.display()
        );
    }
    Ok(())
}

pub fn noise(args: NoiseArgs) -> Result<(), CliError> {
    #[derive(Serialize)]
    struct NoiseConfig {
        command: &'static str,
        source: String,
        epsilon: Option<f64>,
        smoothing: Option<f64>,
    }

    let (model, cfg) = match &args.kind {
        NoiseKind::Uniform(u) => {
            let (alphabet, source) = match (&u.corpus, &u.alphabet) {
                (Some(path), None) => {
                    let docs = load_corpus(path)?;
                    let vocab = Vocabulary::from_documents(&docs);
                    (Alphabet::new(vocab.character_set())?, path.display().to_string())
                }
                (None, Some(chars)) => {
                    (Alphabet::new(chars.chars())?, format!("alphabet:{chars}"))
                }
                _ => unreachable!("clap enforces exactly one alphabet source"),
            };
            let model = uniform_noise(alphabet, u.epsilon)?;
            let cfg = NoiseConfig {
                command: "noise uniform",
                source,
                epsilon: Some(u.epsilon),
                smoothing: None,
            };
            (model, cfg)
        }
        NoiseKind::Estimate(e) => {
            let pairs = read_aligned_pairs(&e.pairs)?;
            let model = estimate_from_aligned(&pairs, e.smoothing)?;
            let cfg = NoiseConfig {
                command: "noise estimate",
                source: e.pairs.display().to_string(),
                epsilon: None,
                smoothing: Some(e.smoothing),
            };
            (model, cfg)
        }
    };

    let out = match &args.kind {
        NoiseKind::Uniform(u) => &u.out,
        NoiseKind::Estimate(e) => &e.out,
    };
    let mut file: serde_json::Value = serde_json::from_str(&model.to_json())?;
    file["config"] = serde_json::to_value(&cfg)?;
    let mut text = serde_json::to_string_pretty(&file)?;
    text.push('\n');
    emit(Some(out), &text)?;

    let avg = model
        .average_confusion(model.alphabet().chars().iter().copied())
        .unwrap_or(0.0);
    println!(
        "model over {} characters: average confusion {:.4}, p_insert {:.4}, p_delete {:.4} -> {}",
        model.alphabet().len(),
        avg,
        model.p_insert(),
        model.p_delete(),
        out.display()
    );
    Ok(())
}

pub fn complexity(args: ComplexityArgs) -> Result<(), CliError> {
    #[derive(Serialize)]
    struct ComplexityConfig {
        command: &'static str,
        corpus: String,
        model: String,
        gammas: Vec<f64>,
        subsets: Vec<Subset>,
        samples: u64,
        seed: u64,
    }

    if args.svg && args.out.is_none() {
        return Err(CliError::usage("--svg needs --out to derive the chart path"));
    }
    let docs = load_corpus(&args.corpus)?;
    let vocab = Vocabulary::from_documents(&docs);
    if vocab.is_empty() {
        return Err(CliError::data(format!(
            "corpus {} has no tokens",
            args.corpus.display()
        )));
    }
    let (model, model_label) = resolve_model(args.model.as_ref(), args.epsilon, &vocab)?;
    let gammas = parse_gammas(&args.gammas)?;
    let part = partition_vocabulary(&vocab);
    let subsets: Vec<Subset> = parse_subsets(&args.subsets)?
        .into_iter()
        .filter(|subset| {
            let keep = match subset {
                Subset::All => true,
                Subset::Numeric => !part.numeric.is_empty(),
                Subset::Alpha => !part.alpha.is_empty(),
            };
            if !keep {
                eprintln!("warning: subset {subset} is empty in this corpus; skipping");
            }
            keep
        })
        .collect();
    if subsets.is_empty() {
        return Err(CliError::data("every requested subset is empty".to_string()));
    }
    let seed = resolve_seed(args.seed);
    let label = args.label.clone().unwrap_or_else(|| stem(&args.corpus));

    let report = gamma_sweep(
        &vocab,
        &model,
        &gammas,
        &subsets,
        args.samples,
        seed,
        args.shards,
        &label,
        &model_label,
    )?;

    let cfg = ComplexityConfig {
        command: "complexity",
        corpus: args.corpus.display().to_string(),
        model: model_label,
        gammas,
        subsets: subsets.clone(),
        samples: args.samples,
        seed,
    };
    let text = match args.format {
        Format::Csv => csv_with_config(&cfg, &report.to_csv()),
        Format::Json => json_with_config(&cfg, serde_json::to_value(&report)?),
    };
    emit(args.out.as_deref(), &text)?;
    if args.svg {
        let path = args.out.as_ref().expect("checked above").with_extension("svg");
        emit(Some(&path), &svg_with_config(&cfg, &report.to_svg()))?;
    }
    if let Some(path) = &args.out {
        for subset in &subsets {
            if let Some(row) = report.rows.iter().rfind(|r| r.subset == *subset) {
                println!(
                    "{subset}: theta = {:.6} +/- {:.6} at gamma {}",
                    row.theta, row.std_error, row.gamma
                );
            }
        }
        println!("report (seed {seed}) -> {}", path.display());
    }
    Ok(())
}

pub fn corrupt(args: CorruptArgs) -> Result<(), CliError> {
    #[derive(Serialize)]
    struct CorruptConfig {
        command: &'static str,
        corpus: String,
        model: String,
        gamma: f64,
        mode: String,
        max_chars: usize,
        seed: u64,
    }

    let docs = load_corpus(&args.corpus)?;
    let vocab = Vocabulary::from_documents(&docs);
    let (base, model_label) = resolve_model(args.model.as_ref(), args.epsilon, &vocab)?;
    let model = interpolate(&base, NoiseLevel::new(args.gamma)?);
    let mode = match args.mode {
        Mode::Substitution => CorruptionMode::SubstitutionOnly,
        Mode::Full => CorruptionMode::Full,
    };
    let seed = resolve_seed(args.seed);

    let mut rng = Stream::new(seed);
    let mut noisy = String::new();
    let mut records = Vec::new();
    for doc in &docs {
        let tokens = tokenize(&doc.text);
        for (k, chunk) in chunk_tokens(tokens.tokens(), args.max_chars).iter().enumerate() {
            let mut noisy_tokens = Vec::with_capacity(chunk.len());
            for token in chunk.iter() {
                model.corrupt_into(token, mode, &mut rng, &mut noisy);
                noisy_tokens.push(noisy.clone());
            }
            records.push(CorruptRecord {
                id: doc.id.clone(),
                chunk_index: k as u32,
                reference: chunk.joined(),
                noisy: noisy_tokens.join(" "),
            });
        }
    }

    let cfg = CorruptConfig {
        command: "corrupt",
        corpus: args.corpus.display().to_string(),
        model: model_label,
        gamma: args.gamma,
        mode: args.mode.to_string(),
        max_chars: args.max_chars,
        seed,
    };
    write_jsonl(&args.out, &cfg, &records)?;
    println!(
        "corrupted {} documents into {} chunks (mode {}, gamma {}, seed {seed}) -> {}",
        docs.len(),
        records.len(),
        args.mode,
        args.gamma,
        args.out.display()
    );
    Ok(())
}

pub fn denoise(args: DenoiseArgs) -> Result<(), CliError> {
    #[derive(Serialize)]
    struct DenoiseConfig {
        command: &'static str,
        input: String,
        vocabulary: String,
        model: String,
        gamma: f64,
        mode: String,
        beam_width: Option<usize>,
        backoff: Option<f64>,
    }

    if args.beam_width == 0 {
        return Err(CliError::usage("--beam-width must be at least 1"));
    }
    if args.vocab.is_some() && args.mode == Decoder::Beam {
        return Err(CliError::usage(
            "beam mode needs --train for bigram counts; --vocab only supports unigram",
        ));
    }
    let (_, records) = read_jsonl::<CorruptRecord>(&args.input)?;

    let (vocab, train_docs, vocab_source) = match (&args.train, &args.vocab) {
        (Some(path), None) => {
            let docs = load_corpus(path)?;
            (Vocabulary::from_documents(&docs), Some(docs), path.display().to_string())
        }
        (None, Some(path)) => {
            (Vocabulary::read_json(path)?, None, path.display().to_string())
        }
        _ => unreachable!("clap enforces exactly one vocabulary source"),
    };
    if vocab.is_empty() {
        return Err(CliError::data("the vocabulary source has no tokens".to_string()));
    }
    let (base, model_label) = resolve_model(args.model.as_ref(), args.epsilon, &vocab)?;
    let model = interpolate(&base, NoiseLevel::new(args.gamma)?);
    let index = CandidateIndex::from_vocabulary(&vocab);
    let denoiser = UnigramDenoiser::new(&index, &model);
    let prior = match args.mode {
        Decoder::Beam => Some(BigramPrior::from_documents(
            train_docs.as_deref().expect("beam mode requires --train"),
            args.backoff,
        )?),
        Decoder::Unigram => None,
    };
    let beam_cfg = BeamConfig::new(args.beam_width)?;

    let mut out_records = Vec::with_capacity(records.len());
    for record in &records {
        let noisy = tokenize(&record.noisy);
        let hyp = match &prior {
            Some(prior) => denoiser.beam_decode_scored(&noisy, prior, beam_cfg).0,
            None => denoiser.denoise_sequence(&noisy),
        };
        out_records.push(HypRecord {
            id: record.id.clone(),
            chunk_index: record.chunk_index,
            hyp: hyp.joined(),
        });
    }

    let cfg = DenoiseConfig {
        command: "denoise",
        input: args.input.display().to_string(),
        vocabulary: vocab_source,
        model: model_label,
        gamma: args.gamma,
        mode: args.mode.to_string(),
        beam_width: (args.mode == Decoder::Beam).then_some(args.beam_width),
        backoff: (args.mode == Decoder::Beam).then_some(args.backoff),
    };
    write_jsonl(&args.out, &cfg, &out_records)?;
    println!(
        "denoised {} chunks with the {} decoder -> {}",
        out_records.len(),
        args.mode,
        args.out.display()
    );
    Ok(())
}

/// Per-document token streams: (reference, noisy, hypothesis).
type DocTokens<'a> = BTreeMap<&'a str, (Vec<String>, Vec<String>, Vec<String>)>;

pub fn evaluate(args: EvaluateArgs) -> Result<(), CliError> {
    #[derive(Serialize)]
    struct EvaluateConfig {
        command: &'static str,
        hyp: String,
        corruption: String,
        average: String,
    }

    let (hyp_cfg, hyps) = read_jsonl::<HypRecord>(&args.hyp)?;
    let (_, corruptions) = read_jsonl::<CorruptRecord>(&args.corruption)?;

    let mut reference: BTreeMap<(String, u32), &CorruptRecord> = BTreeMap::new();
    for record in &corruptions {
        let key = (record.id.clone(), record.chunk_index);
        if reference.insert(key, record).is_some() {
            return Err(CliError::data(format!(
                "duplicate chunk ({}, {}) in {}",
                record.id,
                record.chunk_index,
                args.corruption.display()
            )));
        }
    }
    let mut hypotheses: BTreeMap<(String, u32), &HypRecord> = BTreeMap::new();
    for record in &hyps {
        let key = (record.id.clone(), record.chunk_index);
        if !reference.contains_key(&key) {
            return Err(CliError::data(format!(
                "hypothesis for unknown chunk ({}, {})",
                record.id, record.chunk_index
            )));
        }
        if hypotheses.insert(key, record).is_some() {
            return Err(CliError::data(format!(
                "duplicate hypothesis for chunk ({}, {})",
                record.id, record.chunk_index
            )));
        }
    }
    if let Some(key) = reference.keys().find(|k| !hypotheses.contains_key(*k)) {
        return Err(CliError::data(format!(
            "no hypothesis for chunk ({}, {})",
            key.0, key.1
        )));
    }

    // Chunk order inside each document follows chunk_index; the map key
    // ordering gives that for free. Concatenated chunks form one token
    // sequence per document.
    let mut docs: DocTokens = BTreeMap::new();
    for ((id, _), corr) in &reference {
        let entry = docs.entry(id.as_str()).or_default();
        entry.0.extend(tokenize(&corr.reference).into_tokens());
        entry.1.extend(tokenize(&corr.noisy).into_tokens());
        let hyp = hypotheses[&(id.clone(), corr.chunk_index)];
        entry.2.extend(tokenize(&hyp.hyp).into_tokens());
    }
    let mut baseline_pairs = Vec::with_capacity(docs.len());
    let mut system_pairs = Vec::with_capacity(docs.len());
    for (_, (reference, noisy, hyp)) in docs {
        let reference = TokenSequence::new(reference);
        baseline_pairs.push((TokenSequence::new(noisy), reference.clone()));
        system_pairs.push((TokenSequence::new(hyp), reference));
    }
    let baseline = aggregate_wer(&baseline_pairs, args.average)?;
    let system = aggregate_wer(&system_pairs, args.average)?;

    let system_label = args
        .system
        .clone()
        .or_else(|| {
            hyp_cfg
                .as_ref()
                .and_then(|c| c.get("mode"))
                .and_then(|m| m.as_str())
                .map(String::from)
        })
        .unwrap_or_else(|| "system".to_string());
    let corpus_label = args.label.clone().unwrap_or_else(|| stem(&args.corruption));
    let report = EvalReport {
        corpus: corpus_label,
        rows: vec![
            EvalRow {
                system: "baseline".to_string(),
                wer: baseline.wer,
                ref_tokens: baseline.ref_tokens,
                edit_ops: baseline.edit_ops,
            },
            EvalRow {
                system: system_label.clone(),
                wer: system.wer,
                ref_tokens: system.ref_tokens,
                edit_ops: system.edit_ops,
            },
        ],
    };

    let cfg = EvaluateConfig {
        command: "evaluate",
        hyp: args.hyp.display().to_string(),
        corruption: args.corruption.display().to_string(),
        average: args.average.to_string(),
    };
    let text = match args.format {
        Format::Csv => csv_with_config(&cfg, &report.to_csv()),
        Format::Json => json_with_config(&cfg, serde_json::to_value(&report)?),
    };
    emit(args.out.as_deref(), &text)?;
    if args.out.is_some() {
        println!(
            "baseline wer {:.6} vs {system_label} wer {:.6} over {} reference tokens",
            baseline.wer, system.wer, baseline.ref_tokens
        );
    }
    Ok(())
}
