//! Message parsing, labeled corpora on disk, and stratified splits.

use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// A message split into header fields and body.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct RawEmail {
    headers: Vec<(String, String)>,
    subject: String,
    body: String,
    source_id: String,
}

impl RawEmail {
    /// Parses "Name: value" header lines followed by a blank line and the body.
    ///
    /// Parsing never fails. Headers are recognized only when the header block
    /// is terminated by a blank line; if a line that is neither a header nor a
    /// continuation shows up first, or the input ends, everything is body.
    /// CRLF line endings are normalized to LF.
    pub fn parse(raw: &str, source_id: impl Into<String>) -> RawEmail {
        let text = if raw.contains('\r') {
            raw.replace("\r\n", "\n")
        } else {
            raw.to_string()
        };
        let source_id = source_id.into();

        let mut headers: Vec<(String, String)> = Vec::new();
        let mut offset = 0;
        let body_start = loop {
            let Some(rel) = text[offset..].find('\n') else {
                break None;
            };
            let line = &text[offset..offset + rel];
            let next = offset + rel + 1;
            if line.is_empty() {
                break Some(next);
            }
            if line.starts_with([' ', '\t']) {
                let Some((_, value)) = headers.last_mut() else {
                    break None;
                };
                let cont = line.trim();
                if !cont.is_empty() {
                    if !value.is_empty() {
                        value.push(' ');
                    }
                    value.push_str(cont);
                }
            } else if let Some(field) = parse_header_line(line) {
                headers.push(field);
            } else {
                break None;
            }
            offset = next;
        };

        match body_start {
            Some(start) => {
                let body = text[start..].to_string();
                RawEmail::from_parts(headers, body, source_id)
            }
            None => RawEmail::from_parts(Vec::new(), text, source_id),
        }
    }

    pub fn from_parts(
        headers: Vec<(String, String)>,
        body: String,
        source_id: impl Into<String>,
    ) -> RawEmail {
        let subject = headers
            .iter()
            .find(|(n, _)| n.eq_ignore_ascii_case("subject"))
            .map(|(_, v)| v.clone())
            .unwrap_or_default();
        RawEmail {
            headers,
            subject,
            body,
            source_id: source_id.into(),
        }
    }

    /// Canonical text form: one "Name: value" line per header, a blank line,
    /// then the body. Parsing the rendering yields the same message.
    pub fn render(&self) -> String {
        let mut out = String::with_capacity(self.body.len() + 64);
        for (name, value) in &self.headers {
            out.push_str(name);
            out.push_str(": ");
            out.push_str(value);
            out.push('\n');
        }
        out.push('\n');
        out.push_str(&self.body);
        out
    }

    pub fn headers(&self) -> &[(String, String)] {
        &self.headers
    }

    /// First header with this name, compared case-insensitively.
    pub fn header(&self, name: &str) -> Option<&str> {
        self.headers
            .iter()
            .find(|(n, _)| n.eq_ignore_ascii_case(name))
            .map(|(_, v)| v.as_str())
    }

    pub fn subject(&self) -> &str {
        &self.subject
    }

    pub fn body(&self) -> &str {
        &self.body
    }

    pub fn source_id(&self) -> &str {
        &self.source_id
    }
}

fn parse_header_line(line: &str) -> Option<(String, String)> {
    let (name, value) = line.split_once(':')?;
    let valid_name = !name.is_empty() && name.bytes().all(|b| (b'!'..=b'~').contains(&b));
    valid_name.then(|| (name.to_string(), value.trim().to_string()))
}

/// Parses raw bytes, replacing invalid UTF-8 with U+FFFD.
pub fn parse_email(raw: &[u8], source_id: impl Into<String>) -> RawEmail {
    RawEmail::parse(&String::from_utf8_lossy(raw), source_id)
}

/// Gold label as stored on disk.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Label {
    Threat,
    Spam,
    Legitimate,
}

impl Label {
    pub const ALL: [Label; 3] = [Label::Threat, Label::Spam, Label::Legitimate];

    pub fn class(self) -> Class {
        match self {
            Label::Threat => Class::Threat,
            Label::Spam | Label::Legitimate => Class::Normal,
        }
    }

    pub fn dir_name(self) -> &'static str {
        match self {
            Label::Threat => "threat",
            Label::Spam => "spam",
            Label::Legitimate => "legitimate",
        }
    }

    fn stream(self) -> u64 {
        self as u64
    }
}

impl FromStr for Label {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "threat" => Ok(Label::Threat),
            "spam" => Ok(Label::Spam),
            "legitimate" => Ok(Label::Legitimate),
            other => Err(Error::InvalidParameter(format!("unknown label {other:?}"))),
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.dir_name())
    }
}

/// Binary class used for training and decisions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Class {
    Threat,
    Normal,
}

impl fmt::Display for Class {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Class::Threat => "threat",
            Class::Normal => "normal",
        })
    }
}

impl FromStr for Class {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "threat" => Ok(Class::Threat),
            "normal" => Ok(Class::Normal),
            other => Err(Error::InvalidParameter(format!("unknown class {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabeledEmail {
    email: RawEmail,
    label: Label,
}

impl LabeledEmail {
    pub fn new(email: RawEmail, label: Label) -> Self {
        LabeledEmail { email, label }
    }

    pub fn email(&self) -> &RawEmail {
        &self.email
    }

    pub fn label(&self) -> Label {
        self.label
    }

    pub fn class(&self) -> Class {
        self.label.class()
    }
}

/// Result of reading a corpus directory.
#[derive(Debug, Clone, Default)]
pub struct LoadedCorpus {
    pub emails: Vec<LabeledEmail>,
    /// Entries directly under the root that are not label directories.
    pub skipped: usize,
}

/// Reads `<root>/{threat,spam,legitimate}/*`, one message per file, ordered
/// by path. Missing label directories count as empty.
pub fn load_corpus(root: &Path) -> Result<LoadedCorpus> {
    if !root.is_dir() {
        return Err(Error::CorpusRootNotFound(root.to_path_buf()));
    }
    let mut entries = Vec::new();
    for entry in fs::read_dir(root).map_err(|e| Error::io(root, e))? {
        let entry = entry.map_err(|e| Error::io(root, e))?;
        entries.push(entry.path());
    }
    entries.sort();

    let mut out = LoadedCorpus::default();
    let mut files = Vec::new();
    for dir in entries {
        let label = dir
            .file_name()
            .and_then(|n| n.to_str())
            .and_then(|n| n.parse::<Label>().ok());
        match label {
            Some(label) if dir.is_dir() => {
                let mut dir_files = Vec::new();
                for entry in fs::read_dir(&dir).map_err(|e| Error::io(&dir, e))? {
                    let path = entry.map_err(|e| Error::io(&dir, e))?.path();
                    if path.is_file() {
                        dir_files.push(path);
                    }
                }
                dir_files.sort();
                files.extend(dir_files.into_iter().map(|p| (p, label)));
            }
            _ => out.skipped += 1,
        }
    }

    for (path, label) in files {
        let bytes = fs::read(&path).map_err(|e| Error::io(&path, e))?;
        let id = path
            .strip_prefix(root)
            .unwrap_or(&path)
            .to_string_lossy()
            .replace('\\', "/");
        out.emails
            .push(LabeledEmail::new(parse_email(&bytes, id), label));
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorpusSplit {
    pub train: Vec<LabeledEmail>,
    pub test: Vec<LabeledEmail>,
    pub ratio: f64,
    pub seed: u64,
}

/// Number of items from a class of `n` that go to the training side.
pub fn train_count(n: usize, ratio: f64) -> usize {
    // the epsilon absorbs products like 0.29 * 100 = 28.999999999999996
    ((ratio * n as f64 + 1e-9).floor() as usize).min(n)
}

/// Stratified split: each label is shuffled independently with a stream
/// keyed by `(seed, label)` and its first `floor(ratio * n)` members train.
pub fn split_corpus(corpus: &[LabeledEmail], ratio: f64, seed: u64) -> Result<CorpusSplit> {
    if corpus.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    if !(0.0..=1.0).contains(&ratio) {
        return Err(Error::InvalidRatio(ratio));
    }
    let mut train = Vec::with_capacity(corpus.len());
    let mut test = Vec::new();
    for label in Label::ALL {
        let mut members: Vec<&LabeledEmail> =
            corpus.iter().filter(|e| e.label() == label).collect();
        shuffle_for(&mut members, seed, label);
        let cut = train_count(members.len(), ratio);
        train.extend(members[..cut].iter().map(|e| (*e).clone()));
        test.extend(members[cut..].iter().map(|e| (*e).clone()));
    }
    Ok(CorpusSplit {
        train,
        test,
        ratio,
        seed,
    })
}

/// Stratified subsample of `size` messages, each label contributing
/// `floor(size * n_label / n)` members.
pub fn subsample(corpus: &[LabeledEmail], size: usize, seed: u64) -> Result<Vec<LabeledEmail>> {
    if corpus.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    if size == 0 || size > corpus.len() {
        return Err(Error::OutOfBounds(format!(
            "data size {size} outside 1..={}",
            corpus.len()
        )));
    }
    let fraction = size as f64 / corpus.len() as f64;
    let mut out = Vec::with_capacity(size);
    for label in Label::ALL {
        let mut members: Vec<&LabeledEmail> =
            corpus.iter().filter(|e| e.label() == label).collect();
        // distinct stream family from split_corpus
        shuffle_for(&mut members, seed ^ 0x5ab5_a3b1_e000_0000, label);
        let keep = train_count(members.len(), fraction);
        out.extend(members[..keep].iter().map(|e| (*e).clone()));
    }
    Ok(out)
}

fn shuffle_for<T>(items: &mut [T], seed: u64, label: Label) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(label.stream());
    items.shuffle(&mut rng);
}
