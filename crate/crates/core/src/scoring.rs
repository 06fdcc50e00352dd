//! Threat scores over a message's selected features and the threshold verdict.
//!
//! All three approaches walk the selected features in rank order:
//!
//! * `Bs`: sum of token probabilities of the single-keyword features present.
//! * `Bm`: sum of token probability times arity weight over every present feature.
//! * `Bmc`: `w1 * p * W(arity)` for present features plus
//!   `w2 * match * p * Wc(arity)` for every feature whose constituent
//!   keywords partly or fully occur in the message.

use std::fmt;
use std::io::{self, Write};
use std::str::FromStr;

use crate::corpus::{Class, RawEmail};
use crate::error::{Error, Result};
use crate::model::Model;
use crate::select::FeatureGroups;
use crate::text::{Feature, FeatureVector, Pipeline};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Approach {
    /// single keywords
    Bs,
    /// weighted multiple keywords
    Bm,
    /// weighted multiple keywords with keyword context
    Bmc,
}

impl Approach {
    pub const ALL: [Approach; 3] = [Approach::Bs, Approach::Bm, Approach::Bmc];
}

impl fmt::Display for Approach {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Approach::Bs => "bs",
            Approach::Bm => "bm",
            Approach::Bmc => "bmc",
        })
    }
}

impl FromStr for Approach {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "bs" => Ok(Approach::Bs),
            "bm" => Ok(Approach::Bm),
            "bmc" => Ok(Approach::Bmc),
            other => Err(Error::InvalidParameter(format!("unknown approach {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassifierConfig {
    pub approach: Approach,
    /// Weight for features of arity 1, 2, 3.
    pub arity_weights: [f64; 3],
    /// Weight of the context term for features of arity 1, 2, 3.
    pub context_weights: [f64; 3],
    /// Factor on the keyword score.
    pub w1: f64,
    /// Factor on the context score.
    pub w2: f64,
    pub threshold: f64,
    /// Divide the total by the number of nonzero summands before thresholding.
    pub normalize: bool,
}

impl Default for ClassifierConfig {
    fn default() -> Self {
        ClassifierConfig {
            approach: Approach::Bmc,
            arity_weights: [1.0, 2.0, 3.0],
            context_weights: [1.0, 2.0, 3.0],
            w1: 1.0,
            w2: 0.5,
            threshold: 0.5,
            normalize: true,
        }
    }
}

impl ClassifierConfig {
    pub fn with_approach(approach: Approach) -> Self {
        ClassifierConfig {
            approach,
            ..ClassifierConfig::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let weights = self.arity_weights.iter().chain(&self.context_weights);
        let all = weights.chain([&self.w1, &self.w2]);
        if all.clone().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::InvalidParameter(
                "weights must be finite and nonnegative".into(),
            ));
        }
        if !self.threshold.is_finite() {
            return Err(Error::InvalidParameter("threshold must be finite".into()));
        }
        Ok(())
    }
}

/// One selected feature's part of the score.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureScore {
    pub feature: Feature,
    /// Token probability.
    pub token_score: f64,
    /// Arity weight applied to the keyword term.
    pub weight: f64,
    /// Fraction of constituent keywords found in the message.
    pub context_score: f64,
    pub context_weight: f64,
    /// Whether the full n-gram occurs in the message.
    pub present: bool,
    /// Keyword-term summand.
    pub keyword_term: f64,
    /// Context-term summand; always zero outside `Bmc`.
    pub context_term: f64,
    pub group: Option<usize>,
}

impl FeatureScore {
    pub fn contribution(&self) -> f64 {
        self.keyword_term + self.context_term
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScoreBreakdown {
    pub approach: Approach,
    /// Unnormalized score.
    pub total: f64,
    /// `total / terms`, or 0 when there are no terms.
    pub normalized: f64,
    /// Number of features with a nonzero contribution.
    pub terms: usize,
    pub per_feature: Vec<FeatureScore>,
    /// Sub-totals by feature group; empty when no groups were supplied.
    pub per_group: Vec<f64>,
    pub verdict: Class,
}

impl ScoreBreakdown {
    /// The statistic compared against the threshold.
    pub fn decision_score(&self, normalize: bool) -> f64 {
        if normalize {
            self.normalized
        } else {
            self.total
        }
    }
}

/// Fraction of `f`'s stems that occur as single-keyword features of `fv`.
pub fn context_match(f: &Feature, fv: &FeatureVector) -> f64 {
    let hits = f.stems().iter().filter(|s| fv.has_keyword(s)).count();
    hits as f64 / f.arity() as f64
}

/// Per-feature terms for `cfg.approach`, in selection rank order. Only
/// features with at least one nonzero summand are listed.
pub fn score_terms(model: &Model, fv: &FeatureVector, cfg: &ClassifierConfig) -> Vec<FeatureScore> {
    let mut out = Vec::new();
    for entry in model.selected().iter() {
        let f = &entry.feature;
        let arity = f.arity();
        let present = fv.contains(f);
        let (keyword_term, context_term, weight, context_score, context_weight) = match cfg.approach {
            Approach::Bs => {
                if arity != 1 || !present {
                    continue;
                }
                (model.token_prob(f).value(), 0.0, 1.0, 1.0, 0.0)
            }
            Approach::Bm => {
                if !present {
                    continue;
                }
                let w = cfg.arity_weights[arity - 1];
                (model.token_prob(f).value() * w, 0.0, w, 1.0, 0.0)
            }
            Approach::Bmc => {
                let cm = context_match(f, fv);
                if !present && cm == 0.0 {
                    continue;
                }
                let p = model.token_prob(f).value();
                let w = cfg.arity_weights[arity - 1];
                let cw = cfg.context_weights[arity - 1];
                let keyword = if present { cfg.w1 * (p * w) } else { 0.0 };
                (keyword, cfg.w2 * (cm * p * cw), w, cm, cw)
            }
        };
        out.push(FeatureScore {
            feature: f.clone(),
            token_score: model.token_prob(f).value(),
            weight,
            context_score,
            context_weight,
            present,
            keyword_term,
            context_term,
            group: None,
        });
    }
    out
}

fn sum_terms(terms: &[FeatureScore]) -> f64 {
    terms.iter().map(FeatureScore::contribution).sum()
}

/// Single-keyword score.
pub fn score_bs(model: &Model, fv: &FeatureVector) -> f64 {
    sum_terms(&score_terms(model, fv, &ClassifierConfig::with_approach(Approach::Bs)))
}

/// Weighted multi-keyword score.
pub fn score_bm(model: &Model, fv: &FeatureVector, cfg: &ClassifierConfig) -> f64 {
    let cfg = ClassifierConfig {
        approach: Approach::Bm,
        ..cfg.clone()
    };
    sum_terms(&score_terms(model, fv, &cfg))
}

/// Weighted multi-keyword score with keyword-context credit.
pub fn score_bmc(model: &Model, fv: &FeatureVector, cfg: &ClassifierConfig) -> f64 {
    let cfg = ClassifierConfig {
        approach: Approach::Bmc,
        ..cfg.clone()
    };
    sum_terms(&score_terms(model, fv, &cfg))
}

/// Scores a feature vector and applies the threshold. Ties go to Normal.
pub fn score(
    model: &Model,
    fv: &FeatureVector,
    cfg: &ClassifierConfig,
    groups: Option<&FeatureGroups>,
) -> ScoreBreakdown {
    let mut per_feature = score_terms(model, fv, cfg);
    let total = sum_terms(&per_feature);
    let terms = per_feature
        .iter()
        .filter(|t| t.contribution() != 0.0)
        .count();
    let normalized = if terms == 0 { 0.0 } else { total / terms as f64 };

    let mut per_group = Vec::new();
    if let Some(groups) = groups {
        per_group = vec![0.0; groups.len()];
        for t in per_feature.iter_mut() {
            t.group = groups.group_of(&t.feature);
            if let Some(g) = t.group {
                per_group[g] += t.contribution();
            }
        }
    }

    let stat = if cfg.normalize { normalized } else { total };
    let verdict = if stat > cfg.threshold {
        Class::Threat
    } else {
        Class::Normal
    };
    ScoreBreakdown {
        approach: cfg.approach,
        total,
        normalized,
        terms,
        per_feature,
        per_group,
        verdict,
    }
}

pub fn classify(
    model: &Model,
    email: &RawEmail,
    cfg: &ClassifierConfig,
    pipeline: &Pipeline,
    groups: Option<&FeatureGroups>,
) -> ScoreBreakdown {
    score(model, &pipeline.extract(email), cfg, groups)
}

/// Trained model, feature groups and configuration bundled for repeated use.
#[derive(Debug, Clone)]
pub struct Classifier {
    pub model: Model,
    pub groups: FeatureGroups,
    pub config: ClassifierConfig,
    pub pipeline: Pipeline,
}

impl Classifier {
    pub fn new(
        model: Model,
        config: ClassifierConfig,
        pipeline: Pipeline,
        groups: FeatureGroups,
    ) -> Result<Self> {
        config.validate()?;
        Ok(Classifier {
            model,
            groups,
            config,
            pipeline,
        })
    }

    pub fn classify(&self, email: &RawEmail) -> ScoreBreakdown {
        classify(&self.model, email, &self.config, &self.pipeline, Some(&self.groups))
    }
}

/// CSV header of [`write_breakdown_csv`].
pub const BREAKDOWN_CSV_HEADER: &str =
    "source_id,feature,arity,present,token_score,weight,context_score,context_weight,keyword_term,context_term,contribution,group";

/// One row per scored feature.
pub fn write_breakdown_csv<W: Write>(
    out: &mut W,
    source_id: &str,
    breakdown: &ScoreBreakdown,
) -> io::Result<()> {
    for t in &breakdown.per_feature {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            csv_field(source_id),
            t.feature,
            t.feature.arity(),
            t.present,
            t.token_score,
            t.weight,
            t.context_score,
            t.context_weight,
            t.keyword_term,
            t.context_term,
            t.contribution(),
            t.group.map(|g| g.to_string()).unwrap_or_default()
        )?;
    }
    Ok(())
}

pub(crate) fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::FeatureCounts;
    use std::collections::BTreeMap;

    fn f(words: &[&str]) -> Feature {
        Feature::from_words(words).unwrap()
    }

    /// Builds a model whose features have the requested clamped probabilities.
    /// With n_threat = n_normal = 100, hb = 100p and hg = 100(1-p) give p exactly
    /// for p in hundredths.
    fn model(features: &[(&[&str], u64)]) -> Model {
        let mut lib = BTreeMap::new();
        for (words, hb) in features {
            lib.insert(f(words), FeatureCounts { hb: *hb, hg: 100 - hb });
        }
        Model::from_counts(100, 100, lib, features.len(), "t".into()).unwrap()
    }

    fn fv(features: &[&[&str]]) -> FeatureVector {
        features.iter().map(|w| f(w)).collect()
    }

    #[test]
    fn bs_sums_keyword_probabilities() {
        let m = model(&[(&["bomb"], 80), (&["blast"], 60), (&["hotel"], 30), (&["unused"], 90)]);
        assert_eq!(score_bs(&m, &FeatureVector::new()), 0.0);
        assert!((score_bs(&m, &fv(&[&["bomb"]])) - 0.8).abs() < 1e-12);
        let s = score_bs(&m, &fv(&[&["bomb"], &["blast"], &["hotel"], &["other"]]));
        assert!((s - 1.7).abs() < 1e-12, "{s}");
    }

    #[test]
    fn bm_weights_by_arity() {
        let m = model(&[(&["bomb", "blast"], 70), (&["bomb"], 50)]);
        let cfg = ClassifierConfig::default();
        assert!((score_bm(&m, &fv(&[&["bomb", "blast"]]), &cfg) - 1.4).abs() < 1e-12);
        assert_eq!(score_bm(&m, &FeatureVector::new(), &cfg), 0.0);

        let unit = ClassifierConfig {
            arity_weights: [1.0; 3],
            ..cfg
        };
        let single = fv(&[&["bomb"]]);
        assert_eq!(score_bm(&m, &single, &unit), score_bs(&m, &single));
    }

    #[test]
    fn context_match_fraction() {
        let msg = fv(&[&["bomb"], &["hotel"], &["tomorrow"]]);
        assert_eq!(context_match(&f(&["bomb", "hotel"]), &msg), 1.0);
        assert_eq!(context_match(&f(&["bomb", "parliament", "noon"]), &msg), 1.0 / 3.0);
        assert_eq!(context_match(&f(&["quiet", "day"]), &msg), 0.0);
        // four-keyword case from the matching-percentage definition
        let hits = ["bomb", "hotel", "noon", "city"]
            .iter()
            .filter(|w| msg.has_keyword(&crate::text::Stem::new(**w).unwrap()))
            .count();
        assert_eq!(hits as f64 / 4.0, 0.5);
    }

    #[test]
    fn bmc_examples() {
        let m = model(&[(&["plant", "bomb", "hotel"], 80)]);
        let cfg = ClassifierConfig::default();
        let full = fv(&[&["plant", "bomb", "hotel"], &["plant"], &["bomb"], &["hotel"]]);
        assert!((score_bmc(&m, &full, &cfg) - 3.6).abs() < 1e-12);

        let m = model(&[(&["plant", "bomb", "hotel"], 90)]);
        let partial = fv(&[&["bomb"]]);
        assert!((score_bmc(&m, &partial, &cfg) - 0.45).abs() < 1e-12);

        let no_context = ClassifierConfig {
            w2: 0.0,
            w1: 1.0,
            ..cfg.clone()
        };
        assert_eq!(score_bmc(&m, &full, &no_context), score_bm(&m, &full, &cfg));
    }

    #[test]
    fn verdict_and_ties() {
        let m = model(&[(&["bomb"], 50)]);
        let cfg = ClassifierConfig::with_approach(Approach::Bs);
        let empty = score(&m, &FeatureVector::new(), &cfg, None);
        assert_eq!((empty.total, empty.normalized, empty.verdict), (0.0, 0.0, Class::Normal));

        let at_tau = score(&m, &fv(&[&["bomb"]]), &cfg, None);
        assert_eq!(at_tau.normalized, 0.5);
        assert_eq!(at_tau.verdict, Class::Normal);

        let m = model(&[(&["bomb"], 51)]);
        assert_eq!(score(&m, &fv(&[&["bomb"]]), &cfg, None).verdict, Class::Threat);
    }

    #[test]
    fn normalization_counts_nonzero_summands() {
        let m = model(&[(&["bomb", "blast"], 80), (&["bomb"], 60)]);
        let cfg = ClassifierConfig::default();
        let b = score(&m, &fv(&[&["bomb", "blast"], &["bomb"], &["blast"]]), &cfg, None);
        // one summand per feature, keyword and context parts together
        assert_eq!(b.terms, 2);
        assert!((b.normalized - b.total / 2.0).abs() < 1e-15);
        let raw = ClassifierConfig {
            normalize: false,
            threshold: 5.0,
            ..cfg
        };
        assert_eq!(score(&m, &fv(&[&["bomb"]]), &raw, None).verdict, Class::Normal);
    }

    #[test]
    fn config_validation() {
        assert!(ClassifierConfig::default().validate().is_ok());
        let bad = ClassifierConfig {
            w2: -1.0,
            ..ClassifierConfig::default()
        };
        assert!(bad.validate().is_err());
        let bad = ClassifierConfig {
            threshold: f64::NAN,
            ..ClassifierConfig::default()
        };
        assert!(bad.validate().is_err());
        assert_eq!("BMC".parse::<Approach>().unwrap(), Approach::Bmc);
        assert!("bx".parse::<Approach>().is_err());
    }
}
