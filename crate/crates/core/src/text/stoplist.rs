use std::collections::BTreeSet;
use std::io::BufRead;
use std::path::Path;

use sha2::{Digest, Sha256};

use crate::error::Error;

/// Built-in list of common English function words.
const DEFAULT_STOPWORDS: [&str; 50] = [
    "a", "about", "after", "all", "also", "an", "and", "any", "are", "as", "at", "be", "been",
    "but", "by", "can", "could", "for", "from", "had", "has", "have", "here", "how", "into",
    "is", "it", "its", "more", "of", "on", "only", "or", "other", "should", "some", "than",
    "that", "the", "their", "them", "then", "there", "these", "they", "this", "were", "what",
    "will", "with",
];

/// A set of lowercase stopwords; lookups are case-insensitive.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StopList {
    words: BTreeSet<String>,
}

impl Default for StopList {
    fn default() -> Self {
        StopList::from_words(DEFAULT_STOPWORDS)
    }
}

impl StopList {
    pub fn empty() -> Self {
        StopList {
            words: BTreeSet::new(),
        }
    }

    pub fn from_words<I, S>(words: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let words = words
            .into_iter()
            .map(|w| w.as_ref().trim().to_lowercase())
            .filter(|w| !w.is_empty())
            .collect();
        StopList { words }
    }

    /// One word per line; blank lines and anything after `#` are ignored.
    pub fn parse<R: BufRead>(reader: R) -> std::io::Result<Self> {
        let mut words = Vec::new();
        for line in reader.lines() {
            let line = line?;
            let word = line.split('#').next().unwrap_or("").trim();
            if !word.is_empty() {
                words.push(word.to_string());
            }
        }
        Ok(StopList::from_words(words))
    }

    pub fn load(path: &Path) -> Result<Self, Error> {
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        StopList::parse(std::io::BufReader::new(file)).map_err(|e| Error::io(path, e))
    }

    pub fn contains(&self, word: &str) -> bool {
        if word.chars().any(char::is_uppercase) {
            self.words.contains(&word.to_lowercase())
        } else {
            self.words.contains(word)
        }
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &str> {
        self.words.iter().map(String::as_str)
    }

    /// Short content hash, stable across runs.
    pub fn digest(&self) -> String {
        let mut h = Sha256::new();
        for w in &self.words {
            h.update(w.as_bytes());
            h.update(b"\n");
        }
        hex::encode(&h.finalize()[..8])
    }
}
