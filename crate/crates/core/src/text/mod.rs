//! Message to feature conversion: tokenization, stopword removal, Porter
//! stemming and contiguous 1/2/3-keyword n-grams with term frequencies.

mod porter;
mod stoplist;

use std::collections::BTreeMap;
use std::fmt;

use crate::corpus::RawEmail;
use crate::error::Error;

pub use stoplist::StopList;

/// Tokens shorter than this many characters are discarded.
pub const DEFAULT_MIN_TOKEN_LEN: usize = 4;

/// Longest n-gram emitted by default.
pub const DEFAULT_MAX_ARITY: usize = 3;

/// A lowercase stemmed keyword.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Stem(String);

impl Stem {
    /// Wraps an already-stemmed string. Returns `None` for empty input or
    /// input containing whitespace or punctuation.
    pub fn new(text: impl Into<String>) -> Option<Stem> {
        let text = text.into();
        if text.is_empty() || !text.chars().all(char::is_alphanumeric) {
            return None;
        }
        Some(Stem(text))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Stem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// An ordered tuple of one to three adjacent stems.
///
/// Ordering is lexicographic over the stems, so a feature sorts before any
/// longer feature it is a prefix of.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Feature(Vec<Stem>);

impl Feature {
    pub fn new(stems: Vec<Stem>) -> Result<Feature, Error> {
        if stems.is_empty() || stems.len() > DEFAULT_MAX_ARITY {
            return Err(Error::InvalidArity(stems.len()));
        }
        Ok(Feature(stems))
    }

    /// Builds a feature from string stems, e.g. `Feature::from_words(&["bomb", "blast"])`.
    pub fn from_words(words: &[&str]) -> Result<Feature, Error> {
        let stems = words
            .iter()
            .map(|w| Stem::new(*w).ok_or_else(|| Error::InvalidStem(w.to_string())))
            .collect::<Result<Vec<_>, _>>()?;
        Feature::new(stems)
    }

    pub fn unigram(stem: Stem) -> Feature {
        Feature(vec![stem])
    }

    pub fn arity(&self) -> usize {
        self.0.len()
    }

    pub fn stems(&self) -> &[Stem] {
        &self.0
    }
}

impl fmt::Display for Feature {
    /// Stems joined by single spaces.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, s) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            f.write_str(s.as_str())?;
        }
        Ok(())
    }
}

/// Term-frequency map of a single message.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FeatureVector {
    counts: BTreeMap<Feature, u32>,
}

impl FeatureVector {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds one occurrence of `feature`.
    pub fn add(&mut self, feature: Feature) {
        *self.counts.entry(feature).or_insert(0) += 1;
    }

    pub fn count(&self, feature: &Feature) -> u32 {
        self.counts.get(feature).copied().unwrap_or(0)
    }

    pub fn contains(&self, feature: &Feature) -> bool {
        self.counts.contains_key(feature)
    }

    /// Number of distinct features.
    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    /// Sum of all term frequencies.
    pub fn total_mass(&self) -> u64 {
        self.counts.values().map(|&c| c as u64).sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Feature, u32)> {
        self.counts.iter().map(|(f, &c)| (f, c))
    }

    pub fn features(&self) -> impl Iterator<Item = &Feature> {
        self.counts.keys()
    }

    /// True when `stem` occurs as an arity-1 feature.
    pub fn has_keyword(&self, stem: &Stem) -> bool {
        self.counts.contains_key(&Feature::unigram(stem.clone()))
    }
}

impl FromIterator<Feature> for FeatureVector {
    fn from_iter<I: IntoIterator<Item = Feature>>(iter: I) -> Self {
        let mut fv = FeatureVector::new();
        for f in iter {
            fv.add(f);
        }
        fv
    }
}

/// Settings for turning a message into features.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Pipeline {
    pub stops: StopList,
    /// Minimum token length in characters; 0 or 1 disables the length filter.
    pub min_token_len: usize,
    /// Whether the stoplist is applied at all.
    pub use_stoplist: bool,
    pub max_arity: usize,
}

impl Default for Pipeline {
    fn default() -> Self {
        Pipeline {
            stops: StopList::default(),
            min_token_len: DEFAULT_MIN_TOKEN_LEN,
            use_stoplist: true,
            max_arity: DEFAULT_MAX_ARITY,
        }
    }
}

impl Pipeline {
    pub fn validate(&self) -> Result<(), Error> {
        if !(1..=DEFAULT_MAX_ARITY).contains(&self.max_arity) {
            return Err(Error::InvalidArity(self.max_arity));
        }
        Ok(())
    }

    /// Stems of one text segment after length filtering and stopword removal.
    pub fn stem_sequence(&self, text: &str) -> Vec<Stem> {
        let tokens = tokenize_with_min_len(text, self.min_token_len);
        let tokens = if self.use_stoplist {
            remove_stopwords(tokens, &self.stops)
        } else {
            tokens
        };
        tokens.iter().map(|t| stem(t)).collect()
    }

    pub fn extract(&self, email: &RawEmail) -> FeatureVector {
        let mut fv = FeatureVector::new();
        for segment in [email.subject(), email.body()] {
            let stems = self.stem_sequence(segment);
            add_ngrams(&mut fv, &stems, self.max_arity);
        }
        fv
    }

    /// Canonical description of every setting that changes extracted features.
    pub fn describe(&self) -> String {
        format!(
            "min_token_len={};use_stoplist={};max_arity={};stoplist={}",
            self.min_token_len,
            self.use_stoplist,
            self.max_arity,
            self.stops.digest()
        )
    }
}

/// Splits on anything that is not a letter or digit, lowercases, and drops
/// tokens shorter than four characters and purely numeric tokens.
pub fn tokenize(text: &str) -> Vec<String> {
    tokenize_with_min_len(text, DEFAULT_MIN_TOKEN_LEN)
}

pub fn tokenize_with_min_len(text: &str, min_len: usize) -> Vec<String> {
    text.split(|c: char| !c.is_alphanumeric())
        .map(|t| {
            // some capitals lowercase to a letter plus a combining mark
            t.to_lowercase()
                .chars()
                .filter(|c| c.is_alphanumeric())
                .collect::<String>()
        })
        .filter(|t| !t.is_empty() && !t.chars().all(char::is_numeric))
        .filter(|t| t.chars().count() >= min_len)
        .collect()
}

pub fn remove_stopwords(tokens: Vec<String>, stops: &StopList) -> Vec<String> {
    tokens.into_iter().filter(|t| !stops.contains(t)).collect()
}

/// Porter stem of a lowercase word.
pub fn stem(word: &str) -> Stem {
    Stem(porter::stem(word))
}

fn add_ngrams(fv: &mut FeatureVector, stems: &[Stem], max_arity: usize) {
    for n in 1..=max_arity {
        for window in stems.windows(n) {
            fv.add(Feature(window.to_vec()));
        }
    }
}

/// Features of a message's subject and body. N-grams never span the two.
pub fn extract_features(email: &RawEmail, stops: &StopList, max_arity: usize) -> FeatureVector {
    Pipeline {
        stops: stops.clone(),
        max_arity,
        ..Pipeline::default()
    }
    .extract(email)
}

/// N-gram features of an already-stemmed sequence.
pub fn features_from_stems(stems: &[Stem], max_arity: usize) -> FeatureVector {
    let mut fv = FeatureVector::new();
    add_ngrams(&mut fv, stems, max_arity);
    fv
}
