//! Measure how hard a text corpus is to denoise after character-level
//! corruption.
//!
//! The crate models OCR-style noise as a character confusion channel, denoises
//! with an optimal noisy-channel decoder over a corpus vocabulary, and
//! estimates the residual error rate of that decoder (the corpus's denoising
//! complexity) by Monte Carlo or exhaustive enumeration. Supporting pieces:
//! corpus ingestion and chunking, noise model estimation from aligned text,
//! sequence decoding with bigram context, and word error rate evaluation.

pub mod channel;
pub mod complexity;
pub mod corpus;
pub mod error;
pub mod metrics;
pub mod noise;
pub mod rng;

pub use channel::{BeamConfig, BigramPrior, CandidateIndex, UnigramDenoiser};
pub use complexity::{ComplexityEstimate, SweepReport};
pub use corpus::{Document, Subset, TokenSequence, Vocabulary};
pub use error::{Error, Result};
pub use noise::{Alphabet, AlignedPair, ConfusionModel, CorruptionMode, NoiseLevel};
