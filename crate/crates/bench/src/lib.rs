//! Shared fixtures for the criterion benches.

use threatfilter::{generate, split_corpus, train, CorpusSplit, Model, SynthConfig, TrainParams};

/// A synthetic corpus of about `size` messages split 75/25.
pub fn fixture_split(size: usize, seed: u64) -> CorpusSplit {
    let corpus = generate(&SynthConfig::scaled(size, seed)).expect("fixture corpus");
    split_corpus(&corpus, 0.75, seed).expect("fixture split")
}

pub fn fixture_model(split: &CorpusSplit) -> Model {
    train(&split.train, &TrainParams::default()).expect("fixture model")
}
