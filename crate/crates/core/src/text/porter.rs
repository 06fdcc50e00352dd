//! Porter's suffix-stripping stemmer.
//!
//! This follows Martin Porter's reference C implementation, which is what
//! produced the published `voc.txt`/`output.txt` word lists. It differs from
//! the 1980 description in two rules of step 2: `bli -> ble` replaces
//! `abli -> able`, and `logi -> log` is added.
//!
//! Words are handled as `char` sequences; only `a e i o u` (and `y` after a
//! consonant) count as vowels, so any other character is a consonant.

/// Stem a single lowercase word.
pub fn stem(word: &str) -> String {
    let mut s = Stemmer::new(word);
    s.run();
    s.finish()
}

struct Stemmer {
    b: Vec<char>,
    /// index of the last char of the current word
    k: usize,
    /// length of the stem in front of the suffix matched by `ends`
    stem_end: usize,
}

impl Stemmer {
    fn new(word: &str) -> Self {
        let b: Vec<char> = word.chars().collect();
        let k = b.len().saturating_sub(1);
        Stemmer { b, k, stem_end: 0 }
    }

    fn finish(mut self) -> String {
        if self.b.is_empty() {
            return String::new();
        }
        self.b.truncate(self.k + 1);
        self.b.into_iter().collect()
    }

    fn run(&mut self) {
        // strings of length 1 or 2 are left alone
        if self.b.len() <= 2 {
            return;
        }
        self.step1ab();
        if self.k > 0 {
            self.step1c();
            self.step2();
            self.step3();
            self.step4();
            self.step5();
        }
    }

    fn cons(&self, i: usize) -> bool {
        match self.b[i] {
            'a' | 'e' | 'i' | 'o' | 'u' => false,
            'y' => i == 0 || !self.cons(i - 1),
            _ => true,
        }
    }

    /// Measure of the stem: the m in [C](VC)^m[V], i.e. the number of
    /// vowel-to-consonant transitions.
    fn m(&self) -> usize {
        (1..self.stem_end)
            .filter(|&i| self.cons(i) && !self.cons(i - 1))
            .count()
    }

    fn vowel_in_stem(&self) -> bool {
        (0..self.stem_end).any(|i| !self.cons(i))
    }

    fn double_cons(&self, j: usize) -> bool {
        j >= 1 && self.b[j] == self.b[j - 1] && self.cons(j)
    }

    /// consonant-vowel-consonant ending at i, where the last consonant is not w, x or y
    fn cvc(&self, i: usize) -> bool {
        if i < 2 || !self.cons(i) || self.cons(i - 1) || !self.cons(i - 2) {
            return false;
        }
        !matches!(self.b[i], 'w' | 'x' | 'y')
    }

    fn ends(&mut self, suffix: &str) -> bool {
        let len = suffix.chars().count();
        if len > self.k + 1 {
            return false;
        }
        let start = self.k + 1 - len;
        if !self.b[start..=self.k].iter().copied().eq(suffix.chars()) {
            return false;
        }
        self.stem_end = start;
        true
    }

    fn set_to(&mut self, s: &str) {
        self.b.truncate(self.stem_end);
        self.b.extend(s.chars());
        self.k = self.b.len() - 1;
    }

    fn replace_if_measured(&mut self, s: &str) {
        if self.m() > 0 {
            self.set_to(s);
        }
    }

    fn step1ab(&mut self) {
        if self.b[self.k] == 's' {
            if self.ends("sses") {
                self.k -= 2;
            } else if self.ends("ies") {
                self.set_to("i");
            } else if self.b[self.k - 1] != 's' {
                self.k -= 1;
            }
        }
        if self.ends("eed") {
            if self.m() > 0 {
                self.k -= 1;
            }
        } else if (self.ends("ed") || self.ends("ing")) && self.vowel_in_stem() {
            self.k = self.stem_end - 1;
            if self.ends("at") {
                self.set_to("ate");
            } else if self.ends("bl") {
                self.set_to("ble");
            } else if self.ends("iz") {
                self.set_to("ize");
            } else if self.double_cons(self.k) {
                self.k -= 1;
                if matches!(self.b[self.k], 'l' | 's' | 'z') {
                    self.k += 1;
                }
            } else if self.m() == 1 && self.cvc(self.k) {
                self.set_to("e");
            }
        }
    }

    fn step1c(&mut self) {
        if self.ends("y") && self.vowel_in_stem() {
            self.b[self.k] = 'i';
        }
    }

    fn step2(&mut self) {
        let rules: &[(&str, &str)] = match self.b[self.k - 1] {
            'a' => &[("ational", "ate"), ("tional", "tion")],
            'c' => &[("enci", "ence"), ("anci", "ance")],
            'e' => &[("izer", "ize")],
            'l' => &[
                ("bli", "ble"),
                ("alli", "al"),
                ("entli", "ent"),
                ("eli", "e"),
                ("ousli", "ous"),
            ],
            'o' => &[("ization", "ize"), ("ation", "ate"), ("ator", "ate")],
            's' => &[
                ("alism", "al"),
                ("iveness", "ive"),
                ("fulness", "ful"),
                ("ousness", "ous"),
            ],
            't' => &[("aliti", "al"), ("iviti", "ive"), ("biliti", "ble")],
            'g' => &[("logi", "log")],
            _ => return,
        };
        self.apply_first(rules);
    }

    fn step3(&mut self) {
        let rules: &[(&str, &str)] = match self.b[self.k] {
            'e' => &[("icate", "ic"), ("ative", ""), ("alize", "al")],
            'i' => &[("iciti", "ic")],
            'l' => &[("ical", "ic"), ("ful", "")],
            's' => &[("ness", "")],
            _ => return,
        };
        self.apply_first(rules);
    }

    fn apply_first(&mut self, rules: &[(&str, &str)]) {
        for (suffix, replacement) in rules {
            if self.ends(suffix) {
                self.replace_if_measured(replacement);
                return;
            }
        }
    }

    fn step4(&mut self) {
        let suffixes: &[&str] = match self.b[self.k - 1] {
            'a' => &["al"],
            'c' => &["ance", "ence"],
            'e' => &["er"],
            'i' => &["ic"],
            'l' => &["able", "ible"],
            'n' => &["ant", "ement", "ment", "ent"],
            'o' => {
                if self.ends("ion")
                    && self.stem_end > 0
                    && matches!(self.b[self.stem_end - 1], 's' | 't')
                {
                    self.strip_if_long();
                    return;
                }
                &["ou"]
            }
            's' => &["ism"],
            't' => &["ate", "iti"],
            'u' => &["ous"],
            'v' => &["ive"],
            'z' => &["ize"],
            _ => return,
        };
        if suffixes.iter().any(|s| self.ends(s)) {
            self.strip_if_long();
        }
    }

    fn strip_if_long(&mut self) {
        if self.m() > 1 {
            self.k = self.stem_end - 1;
        }
    }

    fn step5(&mut self) {
        self.stem_end = self.k + 1;
        if self.b[self.k] == 'e' {
            let a = self.m();
            if a > 1 || (a == 1 && !self.cvc(self.k - 1)) {
                self.k -= 1;
            }
        }
        if self.b[self.k] == 'l' && self.double_cons(self.k) && self.m() > 1 {
            self.k -= 1;
        }
    }
}
