//! Seeded generator for a synthetic labeled corpus.
//!
//! Threat messages are assembled from templated phrase pools (threats of
//! violence against invented places, propaganda, recruitment); about a third
//! of them hide one or two threat sentences among ordinary ones. Normal
//! messages come from business, personal and spam pools whose stems are
//! disjoint from the threat templates. [`SynthConfig::ambiguity`] mixes in
//! harmless uses of threat vocabulary ("heart attack", "sales target") to
//! make the task harder. All names and places are invented and every
//! message carries an `X-Synthetic: yes` header.

use std::fs;
use std::path::Path;

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::corpus::{Label, LabeledEmail, RawEmail};
use crate::error::{Error, Result};

/// Upper bound on words per generated body.
pub const MAX_WORDS: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SynthConfig {
    pub threat: usize,
    pub spam: usize,
    pub legitimate: usize,
    pub seed: u64,
    /// Share of normal messages given one harmless sentence that uses
    /// threat vocabulary. At 0 the normal pools share no stems with the
    /// threat templates.
    pub ambiguity: f64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            threat: 1600,
            spam: 2700,
            legitimate: 2700,
            seed: 1,
            ambiguity: 0.0,
        }
    }
}

impl SynthConfig {
    /// Default class mix scaled to roughly `total` messages.
    pub fn scaled(total: usize, seed: u64) -> Self {
        let d = SynthConfig::default();
        let all = d.total();
        let part = |n: usize| (n * total + all / 2) / all;
        SynthConfig {
            threat: part(d.threat),
            spam: part(d.spam),
            legitimate: part(d.legitimate),
            seed,
            ambiguity: d.ambiguity,
        }
    }

    pub fn total(&self) -> usize {
        self.threat + self.spam + self.legitimate
    }

    fn count(&self, label: Label) -> usize {
        match label {
            Label::Threat => self.threat,
            Label::Spam => self.spam,
            Label::Legitimate => self.legitimate,
        }
    }
}

const GROUPS: &[&str] = &[
    "the Crimson Dawn brigade",
    "the Northern Shield cell",
    "our holy battalion",
    "the Iron Crescent front",
    "the martyrs of Velmora",
    "the Black Harbor network",
];

const TARGETS: &[&str] = &[
    "the central railway station",
    "the parliament building",
    "the grand hotel downtown",
    "the embassy compound",
    "the airport terminal",
    "the crowded market square",
    "the army barracks",
    "the police headquarters",
    "the city stadium",
    "the tourist ferry",
    "the water treatment plant",
    "the fuel depot",
];

const WEAPONS: &[&str] = &[
    "explosives",
    "a car bomb",
    "suicide vests",
    "rocket launchers",
    "automatic rifles",
    "detonators",
    "grenades",
    "a truck loaded with explosives",
];

const TIMES: &[&str] = &[
    "before dawn",
    "during the festival",
    "at nightfall",
    "at midnight",
    "when the convoy arrives",
    "during evening prayers",
    "on the anniversary",
];

const CITIES: &[&str] = &["Velmora", "Ostrava Nova", "Kessling", "Port Anselm", "Draviq", "Tamberlyn"];

const THREAT_SENTENCES: &[&str] = &[
    "We will attack {target} {time} and nobody will be spared.",
    "Our fighters have planted {weapon} inside {target}.",
    "The bomb will explode at {target} {time}.",
    "{group} will detonate {weapon} at {target}.",
    "Prepare {weapon} for the operation against {target}.",
    "The martyrdom operation against {target} is ready.",
    "Brothers, the jihad against the infidels continues in {city}.",
    "We swear to kill the soldiers guarding {target}.",
    "Blood will flow in the streets of {city} {time}.",
    "Infidel crusaders will burn when {weapon} hit {target}.",
    "Our mujahideen are armed with {weapon} and waiting for orders.",
    "The attack on {target} will be a lesson for the enemies of our faith.",
    "Send the money for {weapon} through the usual courier.",
    "Destroy {target} and kill every officer inside.",
    "Hostages will be executed if our demands are ignored.",
    "{group} claims the bombing of {target} in {city}.",
    "Join the holy war and become a martyr for the cause.",
    "The explosion at {target} was only the beginning.",
    "Recruit young brothers for the training camp near {city}.",
    "Our suicide bombers will strike {target} {time}.",
    "Smuggle {weapon} across the border before the attack.",
    "We will avenge our fallen martyrs with fire and blood.",
    "Kidnap the foreign engineers working near {target}.",
    "The weapons cache near {city} holds {weapon} for the strike.",
    "Death to the infidels, the blast will shake {city}.",
    "Assassinate the governor when he visits {target}.",
];

const THREAT_SUBJECTS: &[&str] = &[
    "the operation",
    "final warning",
    "instructions for the brothers",
    "message from {group}",
    "the day of vengeance",
    "orders for {city}",
    "the blessed attack",
    "warning to the infidels",
    "",
];

/// Neutral sentences occasionally mixed into threat messages.
const THREAT_FILLER: &[&str] = &[
    "Reply quickly and delete this message.",
    "Meet me at the usual place tomorrow.",
    "Greetings to the family.",
    "Do not use the phone.",
    "Write back after reading.",
];

const LEGIT_SENTENCES: &[&str] = &[
    "The quarterly budget review is scheduled for {day} afternoon.",
    "Please share the revised project proposal ahead of the review.",
    "Attached is the invoice for the consulting services last month.",
    "Our team finished the migration of the customer database.",
    "Could you confirm the room booking for the conference in {town}?",
    "The onboarding session for new employees starts on {day}.",
    "Thanks for the lovely dinner, the kids really enjoyed it.",
    "Mom asked whether you are coming home for the holidays.",
    "The contract draft needs approval from the legal department.",
    "We moved the product launch to the second week of the coming month.",
    "Please review the slides and share your comments.",
    "The library will be closed on {day} for maintenance.",
    "Remember to submit your expense reports by the end of the week.",
    "The new printer is located beside the kitchen.",
    "I uploaded the photos from the wedding to the shared folder.",
    "Our football club plays on {day} nights at the park.",
    "The supplier confirmed delivery of the replacement parts.",
    "Let us schedule a call to discuss the advertising strategy.",
    "The annual report shows steady growth in regional sales.",
    "Happy birthday, hope you have a wonderful year ahead.",
    "The school concert starts at six in the main hall.",
    "Please feed the cat while I am travelling.",
    "The board approved the hiring plan for the design team.",
    "Your appointment with the dentist is confirmed for {day}.",
    "Your sister phoned while you were out.",
    "The new branch opened beside the old bakery.",
    "The committee rejected the proposal by a narrow margin.",
    "Lunch is at the corner cafe after the meeting.",
    "We will share the policy handbook ahead of the audit.",
    "The riverside branch will be closed for the holiday.",
];

/// Threat vocabulary used in harmless senses.
const AMBIGUOUS_SENTENCES: &[&str] = &[
    "My uncle survived a heart attack last winter.",
    "The new movie was a bomb at the box office.",
    "We missed the sales target again this quarter.",
    "The fire drill is planned for {day} morning.",
    "Our striker will attack the left side of their defense.",
    "The comedian totally killed it on stage.",
    "That startup saw explosive growth last year.",
    "The chess club discussed an aggressive opening attack.",
    "Security staff will check badges at the station entrance.",
    "The hotel staff blew up balloons for the party.",
    "Farmers worry the drought will destroy the harvest.",
    "My phone battery died during the flight to {city}.",
    "This killer deal expires at midnight, act fast.",
];

const SPAM_SENTENCES: &[&str] = &[
    "Congratulations, you have won a free cruise to the islands.",
    "Buy cheap watches and designer handbags online today.",
    "Lose weight fast with our amazing herbal formula.",
    "Collect your lottery prize by replying with your bank details.",
    "Limited offer, refinance your mortgage at the lowest rates.",
    "Earn thousands of dollars with no experience needed.",
    "Discount pharmacy pills shipped discreetly worldwide.",
    "Click here to unsubscribe from our exclusive newsletter.",
    "Your account has been selected for a special reward.",
    "Hot singles want to chat with you tonight.",
    "Investment opportunity with guaranteed monthly returns.",
    "Buy today and receive a second bottle absolutely free.",
    "Increase your website traffic with our advertising package.",
];

const LEGIT_SUBJECTS: &[&str] = &[
    "meeting notes",
    "budget review",
    "hello from {town}",
    "project update",
    "weekend plans",
    "invoice attached",
    "quick question",
    "holiday schedule",
    "",
];

const SPAM_SUBJECTS: &[&str] = &[
    "you are a winner",
    "exclusive offer enclosed",
    "cheap meds",
    "urgent account notice",
    "earn cash fast",
    "free gift for you",
];

/// Place names used only in normal messages.
const TOWNS: &[&str] = &["Lindgrove", "Maplewick", "Eastford", "Harrowby"];

const DAYS: &[&str] = &["monday", "tuesday", "wednesday", "thursday", "friday", "saturday"];

const FIRST_NAMES: &[&str] = &["arlo", "brenna", "caspian", "delia", "ezra", "fenna", "galen", "hesper"];

fn fill(template: &str, rng: &mut ChaCha8Rng) -> String {
    let mut out = template.to_string();
    for (slot, pool) in [
        ("{group}", GROUPS),
        ("{target}", TARGETS),
        ("{weapon}", WEAPONS),
        ("{time}", TIMES),
        ("{city}", CITIES),
        ("{day}", DAYS),
        ("{town}", TOWNS),
    ] {
        while let Some(pos) = out.find(slot) {
            let value = pool.choose(rng).copied().unwrap_or_default();
            out.replace_range(pos..pos + slot.len(), value);
        }
    }
    out
}

fn word_count(s: &str) -> usize {
    s.split_whitespace().count()
}

/// Appends sentences drawn by `next` until `target` words, never exceeding [`MAX_WORDS`].
fn compose(rng: &mut ChaCha8Rng, target: usize, mut next: impl FnMut(&mut ChaCha8Rng) -> String) -> String {
    let mut body = String::new();
    let mut words = 0;
    loop {
        let sentence = next(rng);
        let n = word_count(&sentence);
        if words + n > MAX_WORDS || (words >= target && words > 0) {
            break;
        }
        if !body.is_empty() {
            body.push(' ');
        }
        body.push_str(&sentence);
        words += n;
    }
    body
}

fn threat_body(rng: &mut ChaCha8Rng) -> String {
    if rng.random_bool(CAMOUFLAGE_RATE) {
        return camouflaged_threat(rng);
    }
    let target = rng.random_range(12..90);
    compose(rng, target, |rng| {
        if rng.random_bool(0.12) {
            THREAT_FILLER.choose(rng).copied().unwrap_or_default().to_string()
        } else if rng.random_bool(0.08) {
            fill(LEGIT_SENTENCES.choose(rng).copied().unwrap_or_default(), rng)
        } else {
            fill(THREAT_SENTENCES.choose(rng).copied().unwrap_or_default(), rng)
        }
    })
}

/// Share of threat messages that hide one or two threat sentences among
/// ordinary ones.
const CAMOUFLAGE_RATE: f64 = 0.35;

fn camouflaged_threat(rng: &mut ChaCha8Rng) -> String {
    let cover = rng.random_range(3..8);
    let mut sentences: Vec<String> = (0..cover)
        .map(|_| fill(LEGIT_SENTENCES.choose(rng).copied().unwrap_or_default(), rng))
        .collect();
    for _ in 0..rng.random_range(1..=2) {
        let at = rng.random_range(0..=sentences.len());
        let threat = fill(THREAT_SENTENCES.choose(rng).copied().unwrap_or_default(), rng);
        sentences.insert(at, threat);
    }
    let mut body = String::new();
    for s in sentences {
        if word_count(&body) + word_count(&s) > MAX_WORDS {
            break;
        }
        if !body.is_empty() {
            body.push(' ');
        }
        body.push_str(&s);
    }
    body
}

fn with_ambiguous(rng: &mut ChaCha8Rng, body: String, rate: f64) -> String {
    if !rng.random_bool(rate) {
        return body;
    }
    let extra = fill(AMBIGUOUS_SENTENCES.choose(rng).copied().unwrap_or_default(), rng);
    if word_count(&body) + word_count(&extra) > MAX_WORDS {
        return body;
    }
    // insert at a sentence boundary
    let cuts: Vec<usize> = body.match_indices(". ").map(|(i, _)| i + 2).collect();
    let at = match cuts.choose(rng) {
        Some(&i) if rng.random_bool(0.5) => i,
        _ => body.len(),
    };
    let (head, tail) = body.split_at(at);
    if tail.is_empty() {
        format!("{head} {extra}")
    } else {
        format!("{head}{extra} {tail}")
    }
}

fn legit_body(rng: &mut ChaCha8Rng, ambiguity: f64) -> String {
    let target = rng.random_range(10..110);
    let greeting = format!("Hi {},", FIRST_NAMES.choose(rng).copied().unwrap_or_default());
    let body = compose(rng, target, |rng| {
        fill(LEGIT_SENTENCES.choose(rng).copied().unwrap_or_default(), rng)
    });
    format!("{greeting}\n{}", with_ambiguous(rng, body, ambiguity))
}

fn spam_body(rng: &mut ChaCha8Rng, ambiguity: f64) -> String {
    let target = rng.random_range(10..70);
    let body = compose(rng, target, |rng| {
        fill(SPAM_SENTENCES.choose(rng).copied().unwrap_or_default(), rng)
    });
    with_ambiguous(rng, body, ambiguity)
}

fn message(label: Label, index: usize, ambiguity: f64, rng: &mut ChaCha8Rng) -> RawEmail {
    let (subjects, body) = match label {
        Label::Threat => (THREAT_SUBJECTS, threat_body(rng)),
        Label::Spam => (SPAM_SUBJECTS, spam_body(rng, ambiguity)),
        Label::Legitimate => (LEGIT_SUBJECTS, legit_body(rng, ambiguity)),
    };
    let subject = fill(subjects.choose(rng).copied().unwrap_or_default(), rng);
    let sender = FIRST_NAMES.choose(rng).copied().unwrap_or_default();
    let headers = vec![
        ("From".to_string(), format!("{sender}{}@example.invalid", rng.random_range(1..100))),
        ("Subject".to_string(), subject),
        ("X-Synthetic".to_string(), "yes".to_string()),
    ];
    RawEmail::from_parts(headers, body, file_id(label, index))
}

fn file_id(label: Label, index: usize) -> String {
    format!("{}/{}_{:05}.eml", label.dir_name(), label.dir_name(), index)
}

/// Generates the corpus in memory, ordered threat, spam, legitimate.
pub fn generate(cfg: &SynthConfig) -> Result<Vec<LabeledEmail>> {
    if cfg.threat == 0 || cfg.spam + cfg.legitimate == 0 {
        return Err(Error::GeneratorNeedsBothClasses);
    }
    if !(0.0..=1.0).contains(&cfg.ambiguity) {
        return Err(Error::InvalidParameter(format!(
            "ambiguity {} is outside [0, 1]",
            cfg.ambiguity
        )));
    }
    let mut out = Vec::with_capacity(cfg.total());
    for label in Label::ALL {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        rng.set_stream(label as u64 + 16);
        for i in 0..cfg.count(label) {
            out.push(LabeledEmail::new(message(label, i, cfg.ambiguity, &mut rng), label));
        }
    }
    Ok(out)
}

/// Writes `<dir>/{threat,spam,legitimate}/<label>_NNNNN.eml` and returns
/// the number of files written.
pub fn write_corpus(dir: &Path, cfg: &SynthConfig) -> Result<usize> {
    let emails = generate(cfg)?;
    for label in Label::ALL {
        let sub = dir.join(label.dir_name());
        fs::create_dir_all(&sub).map_err(|e| Error::io(&sub, e))?;
    }
    for e in &emails {
        let path = dir.join(e.email().source_id());
        fs::write(&path, e.email().render()).map_err(|err| Error::io(&path, err))?;
    }
    Ok(emails.len())
}
