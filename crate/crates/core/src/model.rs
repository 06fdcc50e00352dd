//! The feature-probability library: per-feature document counts per class,
//! class priors, Graham token probabilities, online updates and persistence.

use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use rayon::prelude::*;
use sha2::{Digest, Sha256};

use crate::corpus::{Class, LabeledEmail};
use crate::error::{Error, Result};
use crate::select::{
    cluster_features, select_top_k, FeatureGroups, FeatureStats, RankedFeature, RankedFeatures,
    DEFAULT_FEATURES,
};
use crate::text::{Feature, FeatureVector, Pipeline, Stem};

pub const P_MIN: f64 = 0.01;
pub const P_MAX: f64 = 0.99;
/// Probability assigned to a feature the library has never seen.
pub const P_UNSEEN: f64 = 0.4;

const MAGIC: &str = "threatfilter-model";
const FORMAT_VERSION: u32 = 1;
const SELECTED_MARKER: &str = "[selected]";

/// Number of threat (`hb`) and normal (`hg`) training emails containing a feature.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct FeatureCounts {
    pub hb: u64,
    pub hg: u64,
}

/// A token probability clamped to `[P_MIN, P_MAX]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct TokenProbability(f64);

impl TokenProbability {
    pub fn clamped(raw: f64) -> Self {
        TokenProbability(raw.clamp(P_MIN, P_MAX))
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrainParams {
    pub pipeline: Pipeline,
    /// How many features to keep after ranking.
    pub features: usize,
}

impl Default for TrainParams {
    fn default() -> Self {
        TrainParams {
            pipeline: Pipeline::default(),
            features: DEFAULT_FEATURES,
        }
    }
}

impl TrainParams {
    pub fn fingerprint(&self) -> String {
        fingerprint(&self.pipeline, self.features)
    }
}

fn pipeline_hash(pipeline: &Pipeline) -> String {
    let digest = Sha256::digest(pipeline.describe().as_bytes());
    hex::encode(&digest[..8])
}

/// `<pipeline hash>:k<features>`.
pub fn fingerprint(pipeline: &Pipeline, features: usize) -> String {
    format!("{}:k{}", pipeline_hash(pipeline), features)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Model {
    n_threat: u64,
    n_normal: u64,
    library: BTreeMap<Feature, FeatureCounts>,
    selected: RankedFeatures,
    fingerprint: String,
}

/// Document frequencies of every feature across a set of messages.
pub fn document_counts<'a, I>(vectors: I) -> HashMap<Feature, FeatureCounts>
where
    I: IntoParallelIterator<Item = (&'a FeatureVector, Class)>,
{
    vectors
        .into_par_iter()
        .fold(HashMap::new, |mut acc: HashMap<Feature, FeatureCounts>, (fv, class)| {
            for f in fv.features() {
                let c = acc.entry(f.clone()).or_default();
                match class {
                    Class::Threat => c.hb += 1,
                    Class::Normal => c.hg += 1,
                }
            }
            acc
        })
        .reduce(HashMap::new, |a, b| {
            if a.len() >= b.len() {
                merge(a, b)
            } else {
                merge(b, a)
            }
        })
}

fn merge(
    mut into: HashMap<Feature, FeatureCounts>,
    from: HashMap<Feature, FeatureCounts>,
) -> HashMap<Feature, FeatureCounts> {
    for (f, c) in from {
        let e = into.entry(f).or_default();
        e.hb += c.hb;
        e.hg += c.hg;
    }
    into
}

/// Extracts features from every message, counts document frequencies per
/// class, and ranks candidates by information gain.
pub fn train(corpus: &[LabeledEmail], params: &TrainParams) -> Result<Model> {
    params.pipeline.validate()?;
    let vectors: Vec<(FeatureVector, Class)> = corpus
        .par_iter()
        .map(|e| (params.pipeline.extract(e.email()), e.class()))
        .collect();
    train_from_vectors(&vectors, params)
}

pub fn train_from_vectors(vectors: &[(FeatureVector, Class)], params: &TrainParams) -> Result<Model> {
    let n_threat = vectors.iter().filter(|(_, c)| *c == Class::Threat).count() as u64;
    let n_normal = vectors.len() as u64 - n_threat;
    if n_threat == 0 || n_normal == 0 {
        return Err(Error::SingleClassCorpus);
    }
    let counts = document_counts(vectors.par_iter().map(|(fv, c)| (fv, *c)));
    let library: BTreeMap<Feature, FeatureCounts> = counts.into_iter().collect();
    Model::from_counts(n_threat, n_normal, library, params.features, params.fingerprint())
}

impl Model {
    /// Builds a model from precomputed counts and selects the top `features`.
    pub fn from_counts(
        n_threat: u64,
        n_normal: u64,
        library: BTreeMap<Feature, FeatureCounts>,
        features: usize,
        fingerprint: String,
    ) -> Result<Model> {
        if n_threat == 0 || n_normal == 0 {
            return Err(Error::SingleClassCorpus);
        }
        let mut model = Model {
            n_threat,
            n_normal,
            library,
            selected: RankedFeatures::default(),
            fingerprint,
        };
        model.selected = model.rank(features)?;
        Ok(model)
    }

    fn rank(&self, k: usize) -> Result<RankedFeatures> {
        let stats: Vec<FeatureStats> = self
            .library
            .iter()
            .map(|(f, c)| FeatureStats {
                feature: f.clone(),
                threat_docs: c.hb,
                normal_docs: c.hg,
            })
            .collect();
        select_top_k(&stats, k, self.n_threat, self.n_normal)
    }

    /// Re-runs feature selection against the current counts.
    pub fn reselect(&mut self, k: usize, pipeline: &Pipeline) -> Result<()> {
        self.selected = self.rank(k)?;
        self.fingerprint = fingerprint(pipeline, k);
        Ok(())
    }

    pub fn n_threat(&self) -> u64 {
        self.n_threat
    }

    pub fn n_normal(&self) -> u64 {
        self.n_normal
    }

    pub fn library(&self) -> &BTreeMap<Feature, FeatureCounts> {
        &self.library
    }

    pub fn counts(&self, f: &Feature) -> Option<FeatureCounts> {
        self.library.get(f).copied()
    }

    pub fn selected(&self) -> &RankedFeatures {
        &self.selected
    }

    pub fn fingerprint(&self) -> &str {
        &self.fingerprint
    }

    /// True if the model was trained with the same feature extraction settings.
    pub fn pipeline_matches(&self, pipeline: &Pipeline) -> bool {
        self.fingerprint.split(':').next() == Some(pipeline_hash(pipeline).as_str())
    }

    /// Fraction of training emails in `class`.
    pub fn prior(&self, class: Class) -> f64 {
        let n = match class {
            Class::Threat => self.n_threat,
            Class::Normal => self.n_normal,
        };
        n as f64 / (self.n_threat + self.n_normal) as f64
    }

    /// `b / (b + g)` with `b = hb / n_threat` and `g = hg / n_normal`, before
    /// clamping. `None` for a feature outside the library.
    pub fn raw_token_prob(&self, f: &Feature) -> Option<f64> {
        let c = self.library.get(f)?;
        let b = c.hb as f64 / self.n_threat as f64;
        let g = c.hg as f64 / self.n_normal as f64;
        if b + g == 0.0 {
            return None;
        }
        Some(b / (b + g))
    }

    pub fn token_prob(&self, f: &Feature) -> TokenProbability {
        match self.raw_token_prob(f) {
            Some(p) => TokenProbability::clamped(p),
            None => TokenProbability(P_UNSEEN),
        }
    }

    /// Counts a newly classified message. Every distinct feature gains one
    /// document in `assigned`'s column; unknown features are added.
    pub fn update_online(&mut self, fv: &FeatureVector, assigned: Class) {
        match assigned {
            Class::Threat => self.n_threat += 1,
            Class::Normal => self.n_normal += 1,
        }
        for f in fv.features() {
            let c = self.library.entry(f.clone()).or_default();
            match assigned {
                Class::Threat => c.hb += 1,
                Class::Normal => c.hg += 1,
            }
        }
    }

    /// Functional form of [`Model::update_online`].
    pub fn updated(mut self, fv: &FeatureVector, assigned: Class) -> Model {
        self.update_online(fv, assigned);
        self
    }

    /// k-means groups of the selected features.
    pub fn feature_groups(&self, k: usize, seed: u64, max_iter: usize) -> Result<FeatureGroups> {
        cluster_features(&self.selected, self.n_threat, self.n_normal, k, seed, max_iter)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
        let mut out = BufWriter::new(file);
        self.write_to(&mut out).map_err(|e| Error::io(path, e))?;
        out.flush().map_err(|e| Error::io(path, e))
    }

    pub fn write_to<W: Write>(&self, out: &mut W) -> std::io::Result<()> {
        writeln!(
            out,
            "{MAGIC}\t{FORMAT_VERSION}\t{}\t{}\t{}",
            self.n_threat, self.n_normal, self.fingerprint
        )?;
        for (f, c) in &self.library {
            writeln!(out, "{}\t{}\t{}\t{}", f.arity(), join_stems(f), c.hb, c.hg)?;
        }
        writeln!(out, "{SELECTED_MARKER}")?;
        for e in self.selected.iter() {
            writeln!(
                out,
                "{}\t{}\t{}\t{}\t{}",
                e.feature.arity(),
                join_stems(&e.feature),
                e.ig,
                e.threat_docs,
                e.normal_docs
            )?;
        }
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Model> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Model::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Model> {
        let bad = |msg: String| Error::ModelFormat(msg);
        let mut lines = text.lines().enumerate();
        let (_, header) = lines.next().ok_or_else(|| bad("empty file".into()))?;
        let fields: Vec<&str> = header.split('\t').collect();
        if fields.first() != Some(&MAGIC) {
            return Err(bad("missing header".into()));
        }
        if fields.len() != 5 {
            return Err(bad("malformed header".into()));
        }
        let version: u32 = fields[1]
            .parse()
            .map_err(|_| bad(format!("bad version {:?}", fields[1])))?;
        if version != FORMAT_VERSION {
            return Err(bad(format!(
                "version {version} not supported (expected {FORMAT_VERSION})"
            )));
        }
        let n_threat = parse_num(fields[2], 1)?;
        let n_normal = parse_num(fields[3], 1)?;
        let fingerprint = fields[4].to_string();
        if n_threat == 0 || n_normal == 0 {
            return Err(bad("both class counts must be positive".into()));
        }

        let mut library = BTreeMap::new();
        let mut in_selected = false;
        let mut ranked = Vec::new();
        for (i, line) in lines {
            let lineno = i + 1;
            if line == SELECTED_MARKER {
                in_selected = true;
                continue;
            }
            let (feature, rest) = parse_feature(line, lineno)?;
            if !in_selected {
                let [hb, hg] = rest[..] else {
                    return Err(bad(format!("line {lineno}: expected hb and hg")));
                };
                let c = FeatureCounts {
                    hb: parse_num(hb, lineno)?,
                    hg: parse_num(hg, lineno)?,
                };
                if c.hb > n_threat || c.hg > n_normal || c.hb + c.hg == 0 {
                    return Err(bad(format!("line {lineno}: counts out of range")));
                }
                if library.insert(feature, c).is_some() {
                    return Err(bad(format!("line {lineno}: duplicate feature")));
                }
            } else {
                let [ig, t, n] = rest[..] else {
                    return Err(bad(format!("line {lineno}: expected ig and counts")));
                };
                let ig: f64 = ig
                    .parse()
                    .map_err(|_| bad(format!("line {lineno}: bad ig {ig:?}")))?;
                if !library.contains_key(&feature) {
                    return Err(bad(format!("line {lineno}: selected feature not in library")));
                }
                ranked.push(RankedFeature {
                    feature,
                    ig,
                    threat_docs: parse_num(t, lineno)?,
                    normal_docs: parse_num(n, lineno)?,
                });
            }
        }
        if !in_selected {
            return Err(bad("missing selected section".into()));
        }
        let count = ranked.len();
        let selected = RankedFeatures::new(ranked);
        if selected.len() != count {
            return Err(bad("duplicate selected feature".into()));
        }
        Ok(Model {
            n_threat,
            n_normal,
            library,
            selected,
            fingerprint,
        })
    }
}

fn join_stems(f: &Feature) -> String {
    f.stems()
        .iter()
        .map(Stem::as_str)
        .collect::<Vec<_>>()
        .join("\t")
}

fn parse_num(s: &str, lineno: usize) -> Result<u64> {
    s.parse()
        .map_err(|_| Error::ModelFormat(format!("line {lineno}: bad number {s:?}")))
}

fn parse_feature(line: &str, lineno: usize) -> Result<(Feature, Vec<&str>)> {
    let mut parts = line.split('\t');
    let arity: usize = parts
        .next()
        .and_then(|a| a.parse().ok())
        .ok_or_else(|| Error::ModelFormat(format!("line {lineno}: bad arity")))?;
    if !(1..=3).contains(&arity) {
        return Err(Error::ModelFormat(format!("line {lineno}: bad arity {arity}")));
    }
    let mut stems = Vec::with_capacity(arity);
    for _ in 0..arity {
        let s = parts
            .next()
            .and_then(Stem::new)
            .ok_or_else(|| Error::ModelFormat(format!("line {lineno}: bad stem")))?;
        stems.push(s);
    }
    Ok((Feature::new(stems)?, parts.collect()))
}
