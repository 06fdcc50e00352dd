//! Held-out evaluation and the data-size / feature-count sweeps.

use std::fmt;
use std::io::{self, Write};
use std::str::FromStr;

use rayon::prelude::*;

use crate::corpus::{split_corpus, subsample, Class, LabeledEmail};
use crate::error::{Error, Result};
use crate::eval::{confusion, metrics, ConfusionCounts, MetricsReport, METRICS_CSV_COLUMNS};
use crate::model::{train, Model, TrainParams};
use crate::scoring::{score, Approach, ClassifierConfig};
use crate::text::{FeatureVector, Pipeline};

/// Default fraction of each class used for training.
pub const DEFAULT_SPLIT: f64 = 0.75;

#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub confusion: ConfusionCounts,
    pub metrics: MetricsReport,
    /// Decision statistic and gold class per test message, in input order.
    pub scores: Vec<(f64, Class)>,
}

/// Scores pre-extracted test vectors.
pub fn evaluate_vectors(
    model: &Model,
    test: &[(FeatureVector, Class)],
    cfg: &ClassifierConfig,
    lambda: f64,
) -> Result<Evaluation> {
    let results: Vec<(Class, f64)> = test
        .par_iter()
        .map(|(fv, _)| {
            let b = score(model, fv, cfg, None);
            (b.verdict, b.decision_score(cfg.normalize))
        })
        .collect();
    let predictions: Vec<Class> = results.iter().map(|r| r.0).collect();
    let gold: Vec<Class> = test.iter().map(|t| t.1).collect();
    let c = confusion(&predictions, &gold)?;
    Ok(Evaluation {
        confusion: c,
        metrics: metrics(&c, lambda)?,
        scores: results.iter().map(|r| r.1).zip(gold).collect(),
    })
}

pub fn evaluate(
    model: &Model,
    test: &[LabeledEmail],
    cfg: &ClassifierConfig,
    pipeline: &Pipeline,
    lambda: f64,
) -> Result<Evaluation> {
    let vectors = extract_all(test, pipeline);
    evaluate_vectors(model, &vectors, cfg, lambda)
}

fn extract_all(emails: &[LabeledEmail], pipeline: &Pipeline) -> Vec<(FeatureVector, Class)> {
    emails
        .par_iter()
        .map(|e| (pipeline.extract(e.email()), e.class()))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepAxis {
    /// Number of messages drawn (stratified) before splitting.
    DataSize,
    /// Number of selected features.
    FeatureCount,
}

impl fmt::Display for SweepAxis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SweepAxis::DataSize => "data",
            SweepAxis::FeatureCount => "features",
        })
    }
}

impl FromStr for SweepAxis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "data" | "data_size" => Ok(SweepAxis::DataSize),
            "features" | "feature_count" => Ok(SweepAxis::FeatureCount),
            other => Err(Error::InvalidParameter(format!("unknown sweep axis {other:?}"))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SweepSpec {
    pub axis: SweepAxis,
    pub values: Vec<usize>,
    pub approaches: Vec<Approach>,
    pub seed: u64,
    pub split: f64,
    pub lambda: f64,
    /// Feature count used on the data-size axis.
    pub features: usize,
    /// Weights, threshold and normalization shared by every approach.
    pub base: ClassifierConfig,
    pub pipeline: Pipeline,
}

impl SweepSpec {
    pub fn new(axis: SweepAxis, values: Vec<usize>, approaches: Vec<Approach>, seed: u64) -> Self {
        SweepSpec {
            axis,
            values,
            approaches,
            seed,
            split: DEFAULT_SPLIT,
            lambda: 1.0,
            features: TrainParams::default().features,
            base: ClassifierConfig::default(),
            pipeline: Pipeline::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub axis: SweepAxis,
    pub value: usize,
    pub approach: Approach,
    pub seed: u64,
    pub n_train: usize,
    pub n_test: usize,
    pub confusion: ConfusionCounts,
    pub metrics: MetricsReport,
}

/// Rows ordered by axis value (input order), then approach (input order).
pub fn sweep(corpus: &[LabeledEmail], spec: &SweepSpec) -> Result<Vec<SweepRow>> {
    if spec.values.is_empty() {
        return Err(Error::InvalidParameter("no sweep values".into()));
    }
    if spec.approaches.is_empty() {
        return Err(Error::InvalidParameter("no approaches".into()));
    }
    if let Some(v) = spec.values.iter().find(|&&v| v == 0) {
        return Err(Error::InvalidParameter(format!("sweep value {v} must be positive")));
    }
    spec.base.validate()?;
    match spec.axis {
        SweepAxis::DataSize => sweep_data(corpus, spec),
        SweepAxis::FeatureCount => sweep_features(corpus, spec),
    }
}

fn rows_for(
    spec: &SweepSpec,
    value: usize,
    model: &Model,
    n_train: usize,
    test: &[(FeatureVector, Class)],
) -> Result<Vec<SweepRow>> {
    spec.approaches
        .iter()
        .map(|&approach| {
            let cfg = ClassifierConfig {
                approach,
                ..spec.base.clone()
            };
            let ev = evaluate_vectors(model, test, &cfg, spec.lambda)?;
            Ok(SweepRow {
                axis: spec.axis,
                value,
                approach,
                seed: spec.seed,
                n_train,
                n_test: test.len(),
                confusion: ev.confusion,
                metrics: ev.metrics,
            })
        })
        .collect()
}

fn sweep_data(corpus: &[LabeledEmail], spec: &SweepSpec) -> Result<Vec<SweepRow>> {
    if let Some(&v) = spec.values.iter().find(|&&v| v > corpus.len()) {
        return Err(Error::OutOfBounds(format!(
            "data size {v} exceeds corpus size {}",
            corpus.len()
        )));
    }
    let params = TrainParams {
        pipeline: spec.pipeline.clone(),
        features: spec.features,
    };
    let per_value: Vec<Result<Vec<SweepRow>>> = spec
        .values
        .par_iter()
        .map(|&size| {
            let sample = subsample(corpus, size, spec.seed)?;
            let split = split_corpus(&sample, spec.split, spec.seed)?;
            let model = train(&split.train, &params)?;
            let test = extract_all(&split.test, &spec.pipeline);
            rows_for(spec, size, &model, split.train.len(), &test)
        })
        .collect();
    flatten(per_value)
}

fn sweep_features(corpus: &[LabeledEmail], spec: &SweepSpec) -> Result<Vec<SweepRow>> {
    let split = split_corpus(corpus, spec.split, spec.seed)?;
    let params = TrainParams {
        pipeline: spec.pipeline.clone(),
        features: spec.values.iter().copied().max().unwrap_or(1),
    };
    let full = train(&split.train, &params)?;
    let available = full.library().len();
    if let Some(&v) = spec.values.iter().find(|&&v| v > available) {
        return Err(Error::OutOfBounds(format!(
            "feature count {v} exceeds the {available} candidate features"
        )));
    }
    let test = extract_all(&split.test, &spec.pipeline);
    let per_value: Vec<Result<Vec<SweepRow>>> = spec
        .values
        .par_iter()
        .map(|&k| {
            let mut model = full.clone();
            model.reselect(k, &spec.pipeline)?;
            rows_for(spec, k, &model, split.train.len(), &test)
        })
        .collect();
    flatten(per_value)
}

fn flatten(per_value: Vec<Result<Vec<SweepRow>>>) -> Result<Vec<SweepRow>> {
    let mut out = Vec::new();
    for rows in per_value {
        out.extend(rows?);
    }
    Ok(out)
}

/// Header of [`write_sweep_csv`].
pub fn sweep_csv_header() -> String {
    format!("axis,value,approach,seed,n_train,n_test,n_nn,n_nt,n_tn,n_tt,{METRICS_CSV_COLUMNS}")
}

pub fn write_sweep_csv<W: Write>(mut out: W, rows: &[SweepRow]) -> io::Result<()> {
    writeln!(out, "{}", sweep_csv_header())?;
    for r in rows {
        let c = &r.confusion;
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{}",
            r.axis,
            r.value,
            r.approach,
            r.seed,
            r.n_train,
            r.n_test,
            c.n_nn,
            c.n_nt,
            c.n_tn,
            c.n_tt,
            r.metrics.csv_fields()
        )?;
    }
    Ok(())
}
