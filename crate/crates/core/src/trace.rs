//! Dependence alphabets and traces in Foata normal form.
//!
//! A trace is stored as its Foata normal form: a sequence of nonempty steps
//! (sets of pairwise independent letters) in which every letter of a step
//! depends on some letter of the previous step. Two traces are equal exactly
//! when their step sequences are equal.

use std::collections::{HashMap, HashSet, VecDeque};
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

/// Default cap on the number of letters of an alphabet.
pub const DEFAULT_MAX_LETTERS: usize = 10;

/// Index of a letter in its alphabet.
pub type Letter = u8;

/// A set of letters as a bit mask over letter indices.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LetterSet(pub u32);

impl LetterSet {
    pub const EMPTY: LetterSet = LetterSet(0);

    pub fn singleton(a: Letter) -> Self {
        LetterSet(1 << a)
    }

    pub fn contains(self, a: Letter) -> bool {
        self.0 & (1 << a) != 0
    }

    pub fn insert(&mut self, a: Letter) {
        self.0 |= 1 << a;
    }

    pub fn union(self, other: Self) -> Self {
        LetterSet(self.0 | other.0)
    }

    pub fn intersection(self, other: Self) -> Self {
        LetterSet(self.0 & other.0)
    }

    pub fn difference(self, other: Self) -> Self {
        LetterSet(self.0 & !other.0)
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn is_subset(self, other: Self) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    /// Letters in increasing index order.
    pub fn iter(self) -> impl Iterator<Item = Letter> {
        let bits = self.0;
        (0..32u8).filter(move |&a| bits & (1 << a) != 0)
    }
}

impl FromIterator<Letter> for LetterSet {
    fn from_iter<I: IntoIterator<Item = Letter>>(iter: I) -> Self {
        let mut s = LetterSet::EMPTY;
        for a in iter {
            s.insert(a);
        }
        s
    }
}

/// A finite alphabet with a reflexive, symmetric dependence relation.
#[derive(Debug, Clone)]
pub struct Alphabet {
    letters: Vec<String>,
    /// `dep[a]` is the set of letters dependent on `a`, `a` included.
    dep: Vec<LetterSet>,
    /// All steps, index 0 being the empty step.
    steps: Vec<LetterSet>,
    step_index: HashMap<LetterSet, u32>,
}

impl PartialEq for Alphabet {
    fn eq(&self, other: &Self) -> bool {
        self.letters == other.letters && self.dep == other.dep
    }
}

impl Eq for Alphabet {}

impl Alphabet {
    /// Builds an alphabet from its letters and the list of independent pairs.
    pub fn new<S: AsRef<str>>(letters: &[S], independent: &[(S, S)]) -> Result<Arc<Self>> {
        Self::with_cap(letters, independent, DEFAULT_MAX_LETTERS)
    }

    pub fn with_cap<S: AsRef<str>>(
        letters: &[S],
        independent: &[(S, S)],
        max_letters: usize,
    ) -> Result<Arc<Self>> {
        if letters.len() > max_letters.min(31) {
            return Err(Error::Resource {
                what: format!("alphabet of {} letters", letters.len()),
                limit: max_letters.min(31),
            });
        }
        let names: Vec<String> = letters.iter().map(|s| s.as_ref().to_string()).collect();
        let mut seen = HashSet::new();
        for n in &names {
            if n.is_empty() || n.chars().any(|c| c.is_whitespace() || "{},()ε".contains(c)) {
                return Err(Error::Alphabet(format!("invalid letter name `{n}`")));
            }
            if !seen.insert(n.clone()) {
                return Err(Error::Alphabet(format!("duplicate letter `{n}`")));
            }
        }
        let k = names.len();
        let full = if k == 0 { 0 } else { (1u32 << k) - 1 };
        let mut dep = vec![LetterSet(full); k];
        let lookup = |s: &str| -> Result<Letter> {
            names
                .iter()
                .position(|n| n == s)
                .map(|i| i as Letter)
                .ok_or_else(|| Error::Alphabet(format!("unknown letter `{s}`")))
        };
        for (x, y) in independent {
            let (a, b) = (lookup(x.as_ref())?, lookup(y.as_ref())?);
            if a == b {
                return Err(Error::Alphabet(format!(
                    "letter `{}` cannot be independent of itself",
                    names[a as usize]
                )));
            }
            dep[a as usize].0 &= !(1 << b);
            dep[b as usize].0 &= !(1 << a);
        }
        Ok(Arc::new(Self::from_parts(names, dep)))
    }

    /// The fully dependent alphabet (free monoid).
    pub fn free<S: AsRef<str>>(letters: &[S]) -> Result<Arc<Self>> {
        Self::new::<S>(letters, &[])
    }

    fn from_parts(letters: Vec<String>, dep: Vec<LetterSet>) -> Self {
        let k = letters.len();
        let mut steps = vec![LetterSet::EMPTY];
        for mask in 1u32..(1u32 << k) {
            let s = LetterSet(mask);
            if s.iter().all(|a| dep[a as usize].intersection(s) == LetterSet::singleton(a)) {
                steps.push(s);
            }
        }
        let step_index = steps.iter().enumerate().map(|(i, s)| (*s, i as u32)).collect();
        Alphabet { letters, dep, steps, step_index }
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn letters(&self) -> impl Iterator<Item = Letter> {
        0..self.letters.len() as Letter
    }

    pub fn all_letters(&self) -> LetterSet {
        self.letters().collect()
    }

    pub fn name(&self, a: Letter) -> &str {
        &self.letters[a as usize]
    }

    pub fn names(&self) -> &[String] {
        &self.letters
    }

    pub fn letter(&self, name: &str) -> Result<Letter> {
        self.letters
            .iter()
            .position(|n| n == name)
            .map(|i| i as Letter)
            .ok_or_else(|| Error::Alphabet(format!("unknown letter `{name}`")))
    }

    pub fn dependent(&self, a: Letter, b: Letter) -> bool {
        self.dep[a as usize].contains(b)
    }

    pub fn independent(&self, a: Letter, b: Letter) -> bool {
        !self.dependent(a, b)
    }

    /// Letters dependent on at least one letter of `s`.
    pub fn dependent_on(&self, s: LetterSet) -> LetterSet {
        s.iter().fold(LetterSet::EMPTY, |acc, a| acc.union(self.dep[a as usize]))
    }

    /// True when every letter of `x` is independent of every letter of `y`.
    pub fn sets_independent(&self, x: LetterSet, y: LetterSet) -> bool {
        self.dependent_on(x).intersection(y).is_empty()
    }

    /// Unordered independent pairs `(a, b)` with `a < b`.
    pub fn independent_pairs(&self) -> Vec<(Letter, Letter)> {
        let mut out = Vec::new();
        for a in self.letters() {
            for b in self.letters() {
                if a < b && self.independent(a, b) {
                    out.push((a, b));
                }
            }
        }
        out
    }

    pub fn is_step(&self, s: LetterSet) -> bool {
        self.step_index.contains_key(&s)
    }

    /// The relation A ▷ B: each letter of B depends on some letter of A.
    pub fn chains(&self, a: LetterSet, b: LetterSet) -> bool {
        b.is_subset(self.dependent_on(a))
    }

    /// Number of nonempty steps; step codes run over `1..=num_steps()`.
    pub fn num_steps(&self) -> u32 {
        (self.steps.len() - 1) as u32
    }

    /// Step for a code; code 0 is the empty step.
    pub fn step(&self, code: u32) -> LetterSet {
        self.steps[code as usize]
    }

    pub fn step_code(&self, s: LetterSet) -> Option<u32> {
        self.step_index.get(&s).copied()
    }

    /// Parses a linearization. Letter names are matched greedily, longest
    /// first; whitespace is ignored; `ε` denotes the empty word.
    pub fn parse_word(&self, text: &str) -> Result<Vec<Letter>> {
        let mut out = Vec::new();
        let mut rest = text.trim();
        if rest == "ε" {
            return Ok(out);
        }
        while !rest.is_empty() {
            if let Some(c) = rest.chars().next() {
                if c.is_whitespace() {
                    rest = &rest[c.len_utf8()..];
                    continue;
                }
            }
            let best = self
                .letters
                .iter()
                .enumerate()
                .filter(|(_, n)| rest.starts_with(n.as_str()))
                .max_by_key(|(_, n)| n.len());
            match best {
                Some((i, n)) => {
                    out.push(i as Letter);
                    rest = &rest[n.len()..];
                }
                None => {
                    return Err(Error::Alphabet(format!("unknown letter at `{rest}`")));
                }
            }
        }
        Ok(out)
    }

    /// Parses a trace given either as a linearization (`acbdab`) or as a
    /// step sequence (`{a,c}{b,d}`).
    pub fn parse_trace(self: &Arc<Self>, text: &str) -> Result<FoataWord> {
        let t = text.trim();
        if t.starts_with('{') {
            let word = self.parse_steps(t)?.into_iter().flat_map(|s| s.iter()).collect::<Vec<_>>();
            Ok(FoataWord::normalize(self, &word))
        } else {
            Ok(FoataWord::normalize(self, &self.parse_word(t)?))
        }
    }

    /// Parses `{a,c}{b}{}` into letter sets. Every set must be a step.
    pub fn parse_steps(&self, text: &str) -> Result<Vec<LetterSet>> {
        let mut out = Vec::new();
        let mut rest = text.trim();
        while !rest.is_empty() {
            let open = rest
                .strip_prefix('{')
                .ok_or_else(|| Error::Parse(format!("expected `{{` at `{rest}`")))?;
            let close = open
                .find('}')
                .ok_or_else(|| Error::Parse("unterminated step".to_string()))?;
            let mut s = LetterSet::EMPTY;
            for name in open[..close].split(',').map(str::trim).filter(|n| !n.is_empty()) {
                s.insert(self.letter(name)?);
            }
            if !self.is_step(s) {
                return Err(Error::Parse(format!(
                    "`{{{}}}` is not a set of pairwise independent letters",
                    &open[..close]
                )));
            }
            out.push(s);
            rest = open[close + 1..].trim_start();
        }
        Ok(out)
    }

    pub fn fmt_step(&self, s: LetterSet) -> String {
        let names: Vec<&str> = s.iter().map(|a| self.name(a)).collect();
        format!("{{{}}}", names.join(","))
    }

    pub fn fmt_word(&self, w: &[Letter]) -> String {
        if w.is_empty() {
            return "ε".to_string();
        }
        w.iter().map(|&a| self.name(a)).collect()
    }
}

/// A trace, represented by its Foata normal form.
#[derive(Clone)]
pub struct FoataWord {
    alphabet: Arc<Alphabet>,
    steps: Vec<LetterSet>,
}

impl PartialEq for FoataWord {
    fn eq(&self, other: &Self) -> bool {
        self.steps == other.steps
            && (Arc::ptr_eq(&self.alphabet, &other.alphabet) || self.alphabet == other.alphabet)
    }
}

impl Eq for FoataWord {}

impl std::hash::Hash for FoataWord {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.steps.hash(state);
    }
}

impl PartialOrd for FoataWord {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

/// Length-lexicographic on step sequences (step count first).
impl Ord for FoataWord {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.steps
            .len()
            .cmp(&other.steps.len())
            .then_with(|| self.step_codes().cmp(&other.step_codes()))
    }
}

impl fmt::Debug for FoataWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for FoataWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.steps.is_empty() {
            return f.write_str("ε");
        }
        for s in &self.steps {
            f.write_str(&self.alphabet.fmt_step(*s))?;
        }
        Ok(())
    }
}

impl FoataWord {
    /// The empty trace.
    pub fn empty(alphabet: &Arc<Alphabet>) -> Self {
        FoataWord { alphabet: alphabet.clone(), steps: Vec::new() }
    }

    /// Foata normal form of `[word]` by the level algorithm: an occurrence
    /// sits one level above the highest earlier occurrence it depends on.
    pub fn normalize(alphabet: &Arc<Alphabet>, word: &[Letter]) -> Self {
        let mut last = vec![0usize; alphabet.len()];
        let mut steps: Vec<LetterSet> = Vec::new();
        for &a in word {
            let level = alphabet.dep[a as usize].iter().map(|b| last[b as usize]).max().unwrap_or(0) + 1;
            last[a as usize] = level;
            if steps.len() < level {
                steps.push(LetterSet::EMPTY);
            }
            steps[level - 1].insert(a);
        }
        FoataWord { alphabet: alphabet.clone(), steps }
    }

    pub fn try_normalize(alphabet: &Arc<Alphabet>, word: &[Letter]) -> Result<Self> {
        if let Some(&a) = word.iter().find(|&&a| a as usize >= alphabet.len()) {
            return Err(Error::Alphabet(format!("letter index {a} out of range")));
        }
        Ok(Self::normalize(alphabet, word))
    }

    /// Wraps a step sequence that must already satisfy the ▷ chain.
    pub fn from_steps(alphabet: &Arc<Alphabet>, steps: Vec<LetterSet>) -> Result<Self> {
        for (i, s) in steps.iter().enumerate() {
            if s.is_empty() || !alphabet.is_step(*s) {
                return Err(Error::Invariant(format!("step {i} is not a nonempty step")));
            }
            if i > 0 && !alphabet.chains(steps[i - 1], *s) {
                return Err(Error::Invariant(format!("steps {} and {} are not chained", i - 1, i)));
            }
        }
        Ok(FoataWord { alphabet: alphabet.clone(), steps })
    }

    pub fn alphabet(&self) -> &Arc<Alphabet> {
        &self.alphabet
    }

    pub fn steps(&self) -> &[LetterSet] {
        &self.steps
    }

    pub fn step_codes(&self) -> Vec<u32> {
        self.steps.iter().map(|s| self.alphabet.step_code(*s).unwrap_or(0)).collect()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// Number of letters (length of any linearization).
    pub fn letter_count(&self) -> usize {
        self.steps.iter().map(|s| s.len()).sum()
    }

    /// The canonical linearization: steps in order, letters sorted.
    pub fn linearize(&self) -> Vec<Letter> {
        self.steps.iter().flat_map(|s| s.iter()).collect()
    }

    fn check_same(&self, other: &Self) -> Result<()> {
        if Arc::ptr_eq(&self.alphabet, &other.alphabet) || self.alphabet == other.alphabet {
            Ok(())
        } else {
            Err(Error::DomainMismatch("traces over different alphabets".into()))
        }
    }

    /// Trace product.
    pub fn concat(&self, other: &Self) -> Result<Self> {
        self.check_same(other)?;
        let mut w = self.linearize();
        w.extend(other.linearize());
        Ok(Self::normalize(&self.alphabet, &w))
    }

    /// Appends one letter.
    pub fn push(&self, a: Letter) -> Self {
        let mut w = self.linearize();
        w.push(a);
        Self::normalize(&self.alphabet, &w)
    }

    /// The unique `s` with `self · s = other`, if any.
    pub fn left_divide(&self, other: &Self) -> Option<Self> {
        self.check_same(other).ok()?;
        let mut rest = other.linearize();
        for a in self.linearize() {
            let pos = rest
                .iter()
                .enumerate()
                .take_while(|(_, &b)| b == a || self.alphabet.independent(a, b))
                .find(|(_, &b)| b == a)
                .map(|(i, _)| i)?;
            rest.remove(pos);
        }
        Some(Self::normalize(&self.alphabet, &rest))
    }

    pub fn prefix_le(&self, other: &Self) -> bool {
        self.left_divide(other).is_some()
    }

    /// Letters whose occurrence is maximal for the dependence order.
    pub fn maximal_letters(&self) -> LetterSet {
        let w = self.linearize();
        let mut out = LetterSet::EMPTY;
        for (i, &a) in w.iter().enumerate() {
            if !w[i + 1..].iter().any(|&b| self.alphabet.dependent(a, b)) {
                out.insert(a);
            }
        }
        out
    }

    /// A trace is prime when it has exactly one maximal occurrence.
    pub fn is_prime(&self) -> bool {
        self.maximal_letters().len() == 1
    }

    /// Every prefix of the trace, including the empty trace and itself.
    pub fn prefixes(&self) -> Vec<FoataWord> {
        let w = self.linearize();
        let n = w.len();
        // preds[j]: earlier dependent positions
        let preds: Vec<u64> = (0..n)
            .map(|j| {
                (0..j)
                    .filter(|&i| self.alphabet.dependent(w[i], w[j]))
                    .fold(0u64, |m, i| m | (1 << i))
            })
            .collect();
        let mut seen: HashSet<u64> = HashSet::from([0]);
        let mut queue = VecDeque::from([0u64]);
        let mut out = Vec::new();
        while let Some(ideal) = queue.pop_front() {
            let letters: Vec<Letter> = (0..n).filter(|&i| ideal & (1 << i) != 0).map(|i| w[i]).collect();
            out.push(Self::normalize(&self.alphabet, &letters));
            for j in 0..n {
                if ideal & (1 << j) == 0 && preds[j] & !ideal == 0 {
                    let next = ideal | (1 << j);
                    if seen.insert(next) {
                        queue.push_back(next);
                    }
                }
            }
        }
        out
    }
}

/// True when `u` and `v` denote the same trace.
pub fn trace_equiv(alphabet: &Arc<Alphabet>, u: &[Letter], v: &[Letter]) -> bool {
    FoataWord::normalize(alphabet, u) == FoataWord::normalize(alphabet, v)
}

/// All traces with at most `max_letters` letters, in length-lexicographic order.
pub fn all_traces(alphabet: &Arc<Alphabet>, max_letters: usize) -> Vec<FoataWord> {
    let mut out = vec![FoataWord::empty(alphabet)];
    let mut layer = vec![FoataWord::empty(alphabet)];
    for _ in 0..max_letters {
        let mut next: HashSet<FoataWord> = HashSet::new();
        for t in &layer {
            for a in alphabet.letters() {
                next.insert(t.push(a));
            }
        }
        let mut next: Vec<FoataWord> = next.into_iter().collect();
        next.sort();
        out.extend(next.iter().cloned());
        layer = next;
    }
    out.sort();
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ex1() -> Arc<Alphabet> {
        Alphabet::new(&["a", "b", "c", "d"], &[("a", "c"), ("b", "d"), ("c", "d")]).unwrap()
    }

    fn ab_indep() -> Arc<Alphabet> {
        Alphabet::new(&["a", "b"], &[("a", "b")]).unwrap()
    }

    fn word(al: &Arc<Alphabet>, s: &str) -> Vec<Letter> {
        al.parse_word(s).unwrap()
    }

    fn tr(al: &Arc<Alphabet>, s: &str) -> FoataWord {
        al.parse_trace(s).unwrap()
    }

    #[test]
    fn golden_normal_form() {
        let al = ex1();
        assert_eq!(tr(&al, "acbdab").to_string(), "{a,c}{b,d}{a}{b}");
    }

    #[test]
    fn empty_and_free() {
        let al = ex1();
        assert!(tr(&al, "").is_empty());
        assert_eq!(tr(&al, "").to_string(), "ε");
        let free = Alphabet::free(&["a", "b", "c"]).unwrap();
        assert_eq!(tr(&free, "abc").to_string(), "{a}{b}{c}");
    }

    #[test]
    fn chain_alphabet_by_linearizations() {
        // aDb, bDc, aIc: the only linearizations of [abc] are abc itself.
        let al = Alphabet::new(&["a", "b", "c"], &[("a", "c")]).unwrap();
        let t = tr(&al, "abc");
        assert_eq!(t.to_string(), "{a}{b}{c}");
        let perms = ["abc", "acb", "bac", "bca", "cab", "cba"];
        let equiv: Vec<_> = perms.iter().filter(|p| trace_equiv(&al, &word(&al, p), &word(&al, "abc"))).collect();
        assert_eq!(equiv, vec![&"abc"]);
    }

    #[test]
    fn unknown_letter() {
        let al = ab_indep();
        assert!(matches!(al.parse_word("abz"), Err(Error::Alphabet(_))));
        assert!(FoataWord::try_normalize(&al, &[0, 7]).is_err());
    }

    #[test]
    fn equivalence() {
        let al = ab_indep();
        assert!(trace_equiv(&al, &word(&al, "ab"), &word(&al, "ba")));
        let free = Alphabet::free(&["a", "b"]).unwrap();
        assert!(!trace_equiv(&free, &word(&free, "ab"), &word(&free, "ba")));
        let al = ex1();
        assert!(trace_equiv(&al, &word(&al, "acbdab"), &word(&al, "cabdab")));
    }

    #[test]
    fn concatenation() {
        let al = ab_indep();
        assert_eq!(tr(&al, "a").concat(&tr(&al, "ab")).unwrap().to_string(), "{a,b}{a}");
        assert_eq!(tr(&al, "aba").concat(&tr(&al, "ab")).unwrap().to_string(), "{a,b}{a,b}{a}");
        let t = tr(&al, "aab");
        assert_eq!(t.concat(&FoataWord::empty(&al)).unwrap(), t);
        assert_eq!(FoataWord::empty(&al).concat(&t).unwrap(), t);
        let other = ex1();
        assert!(matches!(t.concat(&tr(&other, "a")), Err(Error::DomainMismatch(_))));
    }

    #[test]
    fn prefix_and_division() {
        let al = ab_indep();
        let e = FoataWord::empty(&al);
        assert!(e.prefix_le(&tr(&al, "ab")));
        assert_eq!(tr(&al, "a").left_divide(&tr(&al, "ba")), Some(tr(&al, "b")));
        let free = Alphabet::free(&["a", "b"]).unwrap();
        assert!(!tr(&free, "b").prefix_le(&tr(&free, "ab")));
    }

    #[test]
    fn primes() {
        let al = ab_indep();
        assert!(tr(&al, "a").is_prime());
        assert!(!tr(&al, "ab").is_prime());
        assert!(!FoataWord::empty(&al).is_prime());
        // every occurrence of acbdab except the final b has a later dependent
        // occurrence (aDb, aDd, bDc), so the trace is prime
        let al = ex1();
        let t = tr(&al, "acbdab");
        assert!(t.is_prime());
        assert_eq!(t.maximal_letters(), LetterSet::singleton(al.letter("b").unwrap()));
        assert!(!tr(&al, "acbd").is_prime());
    }

    #[test]
    fn prefixes_of_small_trace() {
        let al = ab_indep();
        let ps: HashSet<String> = tr(&al, "ab").prefixes().iter().map(|t| t.to_string()).collect();
        assert_eq!(ps, HashSet::from(["ε", "{a}", "{b}", "{a,b}"].map(String::from)));
    }

    #[test]
    fn step_parsing() {
        let al = ab_indep();
        assert_eq!(tr(&al, "{a,b}{a}"), tr(&al, "aba"));
        let free = Alphabet::free(&["a", "b"]).unwrap();
        assert!(free.parse_steps("{a,b}").is_err());
    }

    #[test]
    fn alphabet_errors() {
        assert!(Alphabet::new(&["a", "a"], &[]).is_err());
        assert!(Alphabet::new(&["a"], &[("a", "a")]).is_err());
        assert!(Alphabet::new(&["a"], &[("a", "z")]).is_err());
        let many: Vec<String> = (0..11).map(|i| format!("x{i}")).collect();
        assert!(matches!(Alphabet::new::<String>(&many, &[]), Err(Error::Resource { .. })));
    }

    #[test]
    fn counts_traces() {
        // aIb: traces are pairs (i, j); with at most 2 letters: 1 + 2 + 3.
        assert_eq!(all_traces(&ab_indep(), 2).len(), 6);
    }
}
