//! Naive Bayesian threat-email filtering with single-keyword, weighted
//! multi-keyword and keyword-context scoring.
//!
//! ```
//! use threatfilter::{generate, split_corpus, train, evaluate, ClassifierConfig, SynthConfig, TrainParams};
//!
//! let corpus = generate(&SynthConfig::scaled(200, 1)).unwrap();
//! let split = split_corpus(&corpus, 0.75, 1).unwrap();
//! let params = TrainParams::default();
//! let model = train(&split.train, &params).unwrap();
//! let ev = evaluate(&model, &split.test, &ClassifierConfig::default(), &params.pipeline, 1.0).unwrap();
//! assert!(ev.metrics.accuracy.unwrap() > 0.5);
//! ```

pub mod corpus;
pub mod error;
pub mod eval;
pub mod experiment;
pub mod model;
pub mod scoring;
pub mod select;
pub mod synth;
pub mod text;

pub use corpus::{load_corpus, parse_email, split_corpus, subsample, Class, CorpusSplit, Label, LabeledEmail, LoadedCorpus, RawEmail};
pub use error::{Error, Result};
pub use eval::{confusion, metrics, roc_curve, roc_thresholds, ConfusionCounts, MetricsReport, RocPoint, LAMBDA_PRESETS};
pub use experiment::{evaluate, evaluate_vectors, sweep, Evaluation, SweepAxis, SweepRow, SweepSpec};
pub use model::{train, train_from_vectors, FeatureCounts, Model, TokenProbability, TrainParams};
pub use scoring::{classify, context_match, score, score_bm, score_bmc, score_bs, Approach, Classifier, ClassifierConfig, FeatureScore, ScoreBreakdown};
pub use select::{cluster_features, information_gain, select_top_k, FeatureGroups, FeatureStats, RankedFeature, RankedFeatures};
pub use synth::{generate, write_corpus, SynthConfig};
pub use text::{extract_features, stem, tokenize, Feature, FeatureVector, Pipeline, Stem, StopList};
