//! Trace languages: recognizable languages as trace-closed letter automata,
//! level-regular languages as automata over Foata normal forms.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use super::{foata_automaton, parse_regex, Dfa, Domain, State, Sym};
use crate::error::{Error, Result};
use crate::trace::{Alphabet, FoataWord, LetterSet};

/// Checks the commutation diamond `δ(δ(q,a),b) = δ(δ(q,b),a)` for every
/// reachable state of the minimal automaton and every independent pair.
pub fn is_trace_closed(dfa: &Dfa) -> bool {
    let Domain::Letters(alphabet) = &dfa.domain else {
        return false;
    };
    let min = dfa.minimize();
    let pairs = alphabet.independent_pairs();
    (0..min.num_states() as State).all(|q| {
        pairs.iter().all(|&(a, b)| {
            let ab = min.run_from(q, &[a as Sym, b as Sym]);
            let ba = min.run_from(q, &[b as Sym, a as Sym]);
            ab == ba
        })
    })
}

/// A recognizable trace language, stored as the minimal DFA of the set of
/// all its linearizations.
#[derive(Clone, PartialEq)]
pub struct RecTraceLang {
    dfa: Dfa,
}

impl fmt::Debug for RecTraceLang {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "RecTraceLang({} states)", self.dfa.num_states())
    }
}

impl RecTraceLang {
    /// Wraps a letter automaton; fails unless its language is trace-closed.
    pub fn new(dfa: Dfa) -> Result<Self> {
        if !matches!(dfa.domain, Domain::Letters(_)) {
            return Err(Error::DomainMismatch(format!(
                "recognizable languages need a letters automaton, got {}",
                dfa.domain.describe()
            )));
        }
        if !is_trace_closed(&dfa) {
            return Err(Error::Invariant("automaton language is not closed under trace equivalence".into()));
        }
        Ok(RecTraceLang { dfa: dfa.minimize() })
    }

    pub fn from_regex(alphabet: &Arc<Alphabet>, text: &str) -> Result<Self> {
        Self::new(parse_regex(&Domain::letters(alphabet), text)?)
    }

    /// Finite language. States of the automaton are the sets of suffixes
    /// still to be read; reading a minimal letter removes it.
    pub fn from_traces(alphabet: &Arc<Alphabet>, traces: &[FoataWord]) -> Result<Self> {
        let mut start: Vec<FoataWord> = traces.to_vec();
        start.sort();
        start.dedup();
        let mut index: HashMap<Vec<FoataWord>, State> = HashMap::new();
        let mut sets = vec![start.clone()];
        index.insert(start, 0);
        let mut trans = Vec::new();
        let mut finals = Vec::new();
        let mut i = 0;
        while i < sets.len() {
            let set = sets[i].clone();
            finals.push(set.iter().any(FoataWord::is_empty));
            let mut out = Vec::new();
            for a in alphabet.letters() {
                let single = FoataWord::normalize(alphabet, &[a]);
                let mut next: Vec<FoataWord> = set.iter().filter_map(|t| single.left_divide(t)).collect();
                if next.is_empty() {
                    continue;
                }
                next.sort();
                next.dedup();
                let id = match index.get(&next) {
                    Some(&id) => id,
                    None => {
                        let id = sets.len() as State;
                        index.insert(next.clone(), id);
                        sets.push(next);
                        id
                    }
                };
                out.push((a as Sym, id));
            }
            trans.push(out);
            i += 1;
        }
        Self::new(Dfa { domain: Domain::letters(alphabet), trans, initial: 0, finals })
    }

    /// The whole trace monoid.
    pub fn full(alphabet: &Arc<Alphabet>) -> Self {
        RecTraceLang { dfa: Domain::letters(alphabet).universe().expect("letters universe").minimize() }
    }

    pub fn empty(alphabet: &Arc<Alphabet>) -> Self {
        RecTraceLang { dfa: Dfa::empty(Domain::letters(alphabet)) }
    }

    /// The language `{[ε]}`.
    pub fn epsilon(alphabet: &Arc<Alphabet>) -> Self {
        RecTraceLang { dfa: Dfa::epsilon(Domain::letters(alphabet)) }
    }

    pub fn alphabet(&self) -> &Arc<Alphabet> {
        self.dfa.domain.alphabet()
    }

    pub fn dfa(&self) -> &Dfa {
        &self.dfa
    }

    pub fn contains(&self, t: &FoataWord) -> bool {
        let w: Vec<Sym> = t.linearize().into_iter().map(Sym::from).collect();
        self.dfa.accepts(&w)
    }

    pub fn is_empty(&self) -> bool {
        self.dfa.is_empty()
    }

    pub fn union(&self, other: &Self) -> Result<Self> {
        Ok(RecTraceLang { dfa: self.dfa.union(&other.dfa)? })
    }

    pub fn intersect(&self, other: &Self) -> Result<Self> {
        Ok(RecTraceLang { dfa: self.dfa.intersect(&other.dfa)? })
    }

    pub fn complement(&self) -> Result<Self> {
        Ok(RecTraceLang { dfa: self.dfa.complement()? })
    }

    /// `t⁻¹L`: advance along any linearization of `t`.
    pub fn residual(&self, t: &FoataWord) -> Self {
        let w: Vec<Sym> = t.linearize().into_iter().map(Sym::from).collect();
        match self.dfa.run(&w) {
            Some(q) => RecTraceLang { dfa: self.dfa.with_initial(q).minimize() },
            None => RecTraceLang::empty(self.alphabet()),
        }
    }

    /// All distinct residuals `s⁻¹L`, in breadth-first discovery order. The
    /// empty residual is included when some trace leaves the language's
    /// prefix closure.
    pub fn residual_set(&self) -> Vec<Self> {
        let n = self.dfa.num_states();
        let letters = self.alphabet().len();
        let mut out: Vec<Self> = (0..n as State)
            .map(|q| RecTraceLang { dfa: self.dfa.with_initial(q).minimize() })
            .collect();
        let partial = self.dfa.trans.iter().any(|t| t.len() < letters);
        if partial && !self.is_empty() {
            out.push(RecTraceLang::empty(self.alphabet()));
        }
        out
    }

    /// Automaton over steps (empty step included) recognizing every step
    /// word whose image is in the language: a step moves along any
    /// linearization of its letters, the empty step is a self-loop.
    pub fn step_saturate(&self) -> Result<Dfa> {
        let alphabet = self.alphabet().clone();
        let domain = Domain::steps_with_empty(&alphabet);
        let mut trans = Vec::with_capacity(self.dfa.num_states());
        for q in 0..self.dfa.num_states() as State {
            let mut out = vec![(0, q)];
            for code in 1..=alphabet.num_steps() {
                let letters: Vec<Sym> = alphabet.step(code).iter().map(Sym::from).collect();
                let forward = self.dfa.run_from(q, &letters);
                let mut rev = letters.clone();
                rev.reverse();
                if forward != self.dfa.run_from(q, &rev) {
                    return Err(Error::Invariant("step evaluation depends on the letter order".into()));
                }
                if let Some(t) = forward {
                    out.push((code, t));
                }
            }
            trans.push(out);
        }
        Ok(Dfa { domain, trans, initial: self.dfa.initial, finals: self.dfa.finals.clone() })
    }

    /// Foata normal forms of the language's traces.
    pub fn foata_encoding(&self) -> Result<LevelRegLang> {
        let sat = self.step_saturate()?;
        let alphabet = self.alphabet().clone();
        let nonempty = sat.map_symbols(Domain::steps(&alphabet), |s| (s != 0).then_some(s));
        let restricted = Dfa {
            domain: nonempty.domain,
            trans: nonempty.trans,
            initial: sat.initial,
            finals: nonempty.finals,
        };
        let dfa = restricted.intersect(&foata_automaton(&alphabet))?;
        Ok(LevelRegLang { dfa })
    }
}

/// A level-regular trace language: a minimal DFA over nonempty steps whose
/// language is a set of Foata normal forms.
#[derive(Clone, PartialEq)]
pub struct LevelRegLang {
    dfa: Dfa,
}

impl fmt::Debug for LevelRegLang {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "LevelRegLang({} states)", self.dfa.num_states())
    }
}

impl LevelRegLang {
    /// Wraps a step automaton; fails unless it only accepts Foata words.
    pub fn new(dfa: Dfa) -> Result<Self> {
        let Domain::Steps { alphabet, with_empty: false } = &dfa.domain else {
            return Err(Error::DomainMismatch(format!(
                "level-regular languages need a steps-nonempty automaton, got {}",
                dfa.domain.describe()
            )));
        };
        let foata = foata_automaton(alphabet);
        if !dfa.is_subset_of(&foata)? {
            return Err(Error::Invariant("automaton accepts words that are not Foata normal forms".into()));
        }
        Ok(LevelRegLang { dfa: dfa.minimize() })
    }

    /// Regular expression over steps, intersected with the Foata words.
    pub fn from_regex(alphabet: &Arc<Alphabet>, text: &str) -> Result<Self> {
        let dfa = parse_regex(&Domain::steps(alphabet), text)?;
        Ok(LevelRegLang { dfa: dfa.intersect(&foata_automaton(alphabet))? })
    }

    pub fn from_traces(alphabet: &Arc<Alphabet>, traces: &[FoataWord]) -> Result<Self> {
        RecTraceLang::from_traces(alphabet, traces)?.foata_encoding()
    }

    /// All traces.
    pub fn foata(alphabet: &Arc<Alphabet>) -> Self {
        LevelRegLang { dfa: foata_automaton(alphabet).minimize() }
    }

    pub fn alphabet(&self) -> &Arc<Alphabet> {
        self.dfa.domain.alphabet()
    }

    pub fn dfa(&self) -> &Dfa {
        &self.dfa
    }

    pub fn contains(&self, t: &FoataWord) -> bool {
        self.dfa.accepts(&t.step_codes())
    }

    pub fn is_empty(&self) -> bool {
        self.dfa.is_empty()
    }

    pub fn union(&self, other: &Self) -> Result<Self> {
        Ok(LevelRegLang { dfa: self.dfa.union(&other.dfa)? })
    }

    pub fn intersect(&self, other: &Self) -> Result<Self> {
        Ok(LevelRegLang { dfa: self.dfa.intersect(&other.dfa)? })
    }

    /// Complement relative to the set of all traces.
    pub fn complement_in_foata(&self) -> Result<Self> {
        Ok(LevelRegLang { dfa: self.dfa.complement_within(&foata_automaton(self.alphabet()))? })
    }

    /// Elements as traces, up to `max_steps` steps.
    pub fn enumerate(&self, max_steps: usize) -> Vec<FoataWord> {
        let alphabet = self.alphabet().clone();
        self.dfa
            .enumerate_words(max_steps)
            .into_iter()
            .map(|w| {
                let steps: Vec<LetterSet> = w.iter().map(|&c| alphabet.step(c)).collect();
                FoataWord::from_steps(&alphabet, steps).expect("level-regular words are Foata")
            })
            .collect()
    }
}

/// Traces spelled by the step words of an automaton, decoded per word.
pub fn decode_steps(alphabet: &Arc<Alphabet>, word: &[Sym]) -> Result<FoataWord> {
    FoataWord::from_steps(alphabet, word.iter().map(|&c| alphabet.step(c)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trace::all_traces;

    fn ab() -> Arc<Alphabet> {
        Alphabet::new(&["a", "b"], &[("a", "b")]).unwrap()
    }

    fn tr(al: &Arc<Alphabet>, s: &str) -> FoataWord {
        al.parse_trace(s).unwrap()
    }

    /// `[(ab)^k]` for k ≤ n; agrees with `[(ab)*]` on traces of ≤ 2n letters.
    fn ab_star(al: &Arc<Alphabet>, n: usize) -> RecTraceLang {
        let traces: Vec<FoataWord> = (0..=n).map(|k| tr(al, &"ab".repeat(k))).collect();
        RecTraceLang::from_traces(al, &traces).unwrap()
    }

    #[test]
    fn trace_closure_detection() {
        let al = ab();
        let d = Domain::letters(&al);
        assert!(!is_trace_closed(&parse_regex(&d, "(ab)*").unwrap()));
        // (ab+ba)* contains abba but not aabb ≡ abab: not closed
        assert!(!is_trace_closed(&parse_regex(&d, "(ab+ba)*").unwrap()));
        assert!(is_trace_closed(&parse_regex(&d, "((a+b)(a+b))*").unwrap()));
        let free = Alphabet::free(&["a", "b"]).unwrap();
        assert!(is_trace_closed(&parse_regex(&Domain::letters(&free), "(ab)*a").unwrap()));
    }

    /// Oracle for trace-closure: membership is constant on every trace class
    /// of words up to length 6.
    #[test]
    fn trace_closure_agrees_with_small_words() {
        let al = ab();
        let d = Domain::letters(&al);
        for text in ["(ab)*", "(ab+ba)*", "((a+b)(a+b))*", "a*b*", "(a+b)*", "a*"] {
            let dfa = parse_regex(&d, text).unwrap();
            let mut class_verdicts: HashMap<FoataWord, bool> = HashMap::new();
            let mut closed = true;
            for len in 0..=6 {
                for bits in 0..(1u32 << len) {
                    let w: Vec<Sym> = (0..len).map(|i| (bits >> i) & 1).collect();
                    let letters: Vec<u8> = w.iter().map(|&x| x as u8).collect();
                    let t = FoataWord::normalize(&al, &letters);
                    let v = dfa.accepts(&w);
                    if *class_verdicts.entry(t).or_insert(v) != v {
                        closed = false;
                    }
                }
            }
            assert_eq!(closed, is_trace_closed(&dfa), "{text}");
        }
    }

    #[test]
    fn rejects_unclosed() {
        let al = ab();
        assert!(matches!(RecTraceLang::from_regex(&al, "(ab)*"), Err(Error::Invariant(_))));
    }

    #[test]
    fn saturation() {
        let al = ab();
        let l = ab_star(&al, 3);
        let sat = l.step_saturate().unwrap();
        let steps = |s: &str| -> Vec<Sym> {
            al.parse_steps(s).unwrap().iter().map(|x| al.step_code(*x).unwrap()).collect()
        };
        assert!(sat.accepts(&steps("{a,b}{a,b}")));
        assert!(sat.accepts(&steps("{a}{b}{b}{a}")));
        assert!(!sat.accepts(&steps("{a}")));
        assert!(sat.accepts(&[0, 0, 0]));
        let no_eps = RecTraceLang::from_traces(&al, &[tr(&al, "a")]).unwrap();
        assert!(!no_eps.step_saturate().unwrap().accepts(&[0, 0]));
    }

    #[test]
    fn encoding_of_ab_star() {
        let al = ab();
        let enc = ab_star(&al, 3).foata_encoding().unwrap();
        let direct = LevelRegLang::from_regex(&al, "{a,b}*").unwrap();
        for t in all_traces(&al, 6) {
            assert_eq!(enc.contains(&t), direct.contains(&t), "{t}");
        }
        assert!(direct.contains(&tr(&al, "abab")));
        assert!(!direct.contains(&tr(&al, "a")));
        let eps = RecTraceLang::epsilon(&al).foata_encoding().unwrap();
        assert_eq!(eps.enumerate(4), vec![FoataWord::empty(&al)]);
    }

    #[test]
    fn encoding_in_free_monoid_is_singleton_steps() {
        let free = Alphabet::free(&["a", "b"]).unwrap();
        let l = RecTraceLang::from_regex(&free, "(ab)*").unwrap();
        let enc = l.foata_encoding().unwrap();
        let words: Vec<String> = enc.enumerate(4).iter().map(|t| t.to_string()).collect();
        assert_eq!(words, vec!["ε", "{a}{b}", "{a}{b}{a}{b}"]);
    }

    #[test]
    fn encoding_membership_brute_force() {
        let al = Alphabet::new(&["a", "b", "c"], &[("a", "c")]).unwrap();
        // even number of b's; a and c commute
        let l = RecTraceLang::from_regex(&al, "((a+c)*b(a+c)*b)*(a+c)*").unwrap();
        let enc = l.foata_encoding().unwrap();
        for t in all_traces(&al, 6) {
            assert_eq!(enc.contains(&t), l.contains(&t), "{t}");
        }
    }

    #[test]
    fn residuals() {
        let al = ab();
        let l = RecTraceLang::from_traces(
            &al,
            &[tr(&al, "ab"), tr(&al, "abaa"), tr(&al, "aaa"), tr(&al, "aabbb")],
        )
        .unwrap();
        let r = l.residual(&tr(&al, "ab"));
        let expected = RecTraceLang::from_traces(&al, &[tr(&al, ""), tr(&al, "aa"), tr(&al, "abb")]).unwrap();
        assert_eq!(r, expected);
        assert_eq!(l.residual(&FoataWord::empty(&al)), l);
        let eps = RecTraceLang::epsilon(&al);
        let set = eps.residual_set();
        assert_eq!(set.len(), 2);
        assert!(set.contains(&eps));
        assert!(set.contains(&RecTraceLang::empty(&al)));
    }

    #[test]
    fn residual_set_is_bounded_by_states() {
        let al = ab();
        let l = ab_star(&al, 2);
        let set = l.residual_set();
        assert!(set.len() <= l.dfa().num_states() + 1);
        for t in all_traces(&al, 4) {
            assert!(set.contains(&l.residual(&t)));
        }
    }

    #[test]
    fn level_boolean_algebra() {
        let al = ab();
        let all = LevelRegLang::foata(&al);
        assert!(all.complement_in_foata().unwrap().is_empty());
        let l = LevelRegLang::from_regex(&al, "{a,b}*").unwrap();
        let u = l.union(&l.complement_in_foata().unwrap()).unwrap();
        assert_eq!(u, all);
        assert!(LevelRegLang::new(parse_regex(&Domain::steps(&al), "{a}{b}").unwrap()).is_err());
        let other = Alphabet::free(&["a", "b"]).unwrap();
        assert!(l.union(&LevelRegLang::foata(&other)).is_err());
    }

    /// Π_Foata⁻¹([(ab)*]·[(bc)*]) with full independence contains the words
    /// {a,b,c}^k {b,c}^j {b}^k and {a,b,c}^k {a,b}^j {b}^k.
    #[test]
    fn non_closure_witness() {
        let al = Alphabet::new(&["a", "b", "c"], &[("a", "b"), ("a", "c"), ("b", "c")]).unwrap();
        for k in 0..3 {
            for j in 0..3 {
                for (mid, word) in [("{b,c}", "bc"), ("{a,b}", "ab")] {
                    let u = tr(&al, &"ab".repeat(k + if word == "ab" { j } else { 0 }));
                    let v = tr(&al, &"bc".repeat(k + if word == "bc" { j } else { 0 }));
                    let st = u.concat(&v).unwrap();
                    let expected = format!("{}{}{}", "{a,b,c}".repeat(k), mid.repeat(j), "{b}".repeat(k));
                    let expected = if expected.is_empty() { "ε".to_string() } else { expected };
                    assert_eq!(st.to_string(), expected);
                }
            }
        }
    }
}
