//! Word-automatic relations over Foata normal forms.
//!
//! Tuples of traces are read synchronously: the Foata words are written on
//! parallel tracks, each padded with `#` at its tail, and the all-`#` column
//! never occurs. Symbols are tuple codes of a [`Domain::Tracks`] domain.

use std::collections::HashMap;
use std::sync::Arc;

use crate::automata::{cartesian, foata_automaton, Dfa, Domain, Nfa, State, Sym};
use crate::error::{Error, Result};
use crate::limits::check_states;
use crate::trace::{Alphabet, FoataWord};

/// Position-wise pairing of two words, padding the shorter one with `None`.
pub fn convolve<T: Copy>(u: &[T], v: &[T]) -> Vec<(Option<T>, Option<T>)> {
    (0..u.len().max(v.len())).map(|i| (u.get(i).copied(), v.get(i).copied())).collect()
}

/// Convolution of Foata words as tuple codes of `Domain::tracks(_, traces.len())`.
pub fn convolution(alphabet: &Arc<Alphabet>, traces: &[&FoataWord]) -> Vec<Sym> {
    let domain = Domain::tracks(alphabet, traces.len());
    let codes: Vec<Vec<u32>> = traces.iter().map(|t| t.step_codes()).collect();
    let len = codes.iter().map(Vec::len).max().unwrap_or(0);
    (0..len)
        .map(|i| {
            let comps: Vec<u32> = codes.iter().map(|c| c.get(i).copied().unwrap_or(0)).collect();
            domain.encode_tuple(&comps)
        })
        .collect()
}

/// Splits a convolution back into its per-track Foata words.
pub fn deconvolve(domain: &Domain, word: &[Sym]) -> Result<Vec<FoataWord>> {
    let alphabet = domain.alphabet().clone();
    let mut tracks: Vec<Vec<u32>> = vec![Vec::new(); domain.arity()];
    for &s in word {
        for (j, c) in domain.decode_tuple(s).into_iter().enumerate() {
            if c != 0 {
                tracks[j].push(c);
            }
        }
    }
    tracks
        .into_iter()
        .map(|codes| FoataWord::from_steps(&alphabet, codes.iter().map(|&c| alphabet.step(c)).collect()))
        .collect()
}

/// Per-track run state inside a track product.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
enum TrackRun {
    At(State),
    Padded,
}

/// Convolutions whose track `j` lies in the language of `langs[j]` (DFAs
/// over nonempty steps).
pub fn tracks_product(alphabet: &Arc<Alphabet>, langs: &[&Dfa]) -> Result<Dfa> {
    for l in langs {
        l.domain.check_same(&Domain::steps(alphabet))?;
    }
    let domain = Domain::tracks(alphabet, langs.len());
    let start: Vec<TrackRun> = langs.iter().map(|l| TrackRun::At(l.initial)).collect();
    let accepting = |runs: &[TrackRun]| {
        runs.iter().zip(langs).all(|(r, l)| match r {
            TrackRun::Padded => true,
            TrackRun::At(q) => l.is_final(*q),
        })
    };
    let mut index: HashMap<Vec<TrackRun>, State> = HashMap::from([(start.clone(), 0)]);
    let mut states = vec![start];
    let mut trans = Vec::new();
    let mut finals = Vec::new();
    let mut i = 0;
    while i < states.len() {
        let runs = states[i].clone();
        finals.push(accepting(&runs));
        // per track: list of (component, next run)
        let options: Vec<Vec<(u32, TrackRun)>> = runs
            .iter()
            .zip(langs)
            .map(|(r, l)| match r {
                TrackRun::Padded => vec![(0, TrackRun::Padded)],
                TrackRun::At(q) => {
                    let mut v: Vec<(u32, TrackRun)> = Vec::new();
                    if l.is_final(*q) {
                        v.push((0, TrackRun::Padded));
                    }
                    v.extend(l.trans[*q as usize].iter().map(|&(c, t)| (c, TrackRun::At(t))));
                    v
                }
            })
            .collect();
        let idx: Vec<Vec<u32>> = options.iter().map(|o| (0..o.len() as u32).collect()).collect();
        let mut out = Vec::new();
        for choice in cartesian(&idx) {
            let comps: Vec<u32> = choice.iter().enumerate().map(|(j, &k)| options[j][k as usize].0).collect();
            if comps.iter().all(|&c| c == 0) {
                continue;
            }
            let next: Vec<TrackRun> = choice.iter().enumerate().map(|(j, &k)| options[j][k as usize].1).collect();
            let id = match index.get(&next) {
                Some(&id) => id,
                None => {
                    let id = states.len() as State;
                    check_states(states.len() + 1, "track product")?;
                    index.insert(next.clone(), id);
                    states.push(next);
                    id
                }
            };
            out.push((domain.encode_tuple(&comps), id));
        }
        out.sort_unstable();
        trans.push(out);
        i += 1;
    }
    Ok(Dfa { domain, trans, initial: 0, finals }.minimize())
}

/// Removes track `j`. Columns that become all-padding can only occur at the
/// tail of a well-formed convolution and are read as ε.
pub fn project_out(dfa: &Dfa, j: usize) -> Result<Dfa> {
    let Domain::Tracks { alphabet, arity } = &dfa.domain else {
        return Err(Error::DomainMismatch("projection needs a track automaton".into()));
    };
    if j >= *arity {
        return Err(Error::Invariant(format!("track {j} out of range")));
    }
    let new_domain = Domain::tracks(alphabet, arity - 1);
    let n = dfa.num_states();
    let mut eps: Vec<Vec<State>> = vec![Vec::new(); n];
    let mut moves: Vec<Vec<(Sym, State)>> = vec![Vec::new(); n];
    for (q, out) in dfa.trans.iter().enumerate() {
        for &(s, t) in out {
            let mut comps = dfa.domain.decode_tuple(s);
            comps.remove(j);
            if comps.iter().all(|&c| c == 0) {
                eps[q].push(t);
            } else {
                moves[q].push((new_domain.encode_tuple(&comps), t));
            }
        }
    }
    let mut nfa = Nfa::new(new_domain);
    for q in 0..n {
        // ε-closure
        let mut seen = vec![false; n];
        let mut stack = vec![q as State];
        seen[q] = true;
        let mut fin = false;
        let mut out = Vec::new();
        while let Some(p) = stack.pop() {
            fin |= dfa.is_final(p);
            out.extend(moves[p as usize].iter().copied());
            for &r in &eps[p as usize] {
                if !seen[r as usize] {
                    seen[r as usize] = true;
                    stack.push(r);
                }
            }
        }
        let id = nfa.add_state(fin);
        for (s, t) in out {
            nfa.add_transition(id, s, t);
        }
    }
    nfa.initial.push(dfa.initial);
    Ok(nfa.determinize()?.minimize())
}

/// Inserts a new unconstrained track at position `j`: it carries any Foata
/// word, padded at its own tail.
pub fn insert_track(dfa: &Dfa, j: usize) -> Result<Dfa> {
    let Domain::Tracks { alphabet, arity } = &dfa.domain else {
        return Err(Error::DomainMismatch("cylindrification needs a track automaton".into()));
    };
    if j > *arity {
        return Err(Error::Invariant(format!("track position {j} out of range")));
    }
    let new_domain = Domain::tracks(alphabet, arity + 1);
    let steps = alphabet.num_steps();
    let n = dfa.num_states();
    let tail = n as State;
    let insert = |sym: Sym, c: u32| -> Sym {
        let mut comps = dfa.domain.decode_tuple(sym);
        comps.insert(j, c);
        new_domain.encode_tuple(&comps)
    };
    let alone = |c: u32| -> Sym {
        let mut comps = vec![0; arity + 1];
        comps[j] = c;
        new_domain.encode_tuple(&comps)
    };
    let mut trans: Vec<Vec<(Sym, State)>> = Vec::with_capacity(n + 1);
    for q in 0..n {
        let mut out = Vec::new();
        for &(s, t) in &dfa.trans[q] {
            for c in 0..=steps {
                out.push((insert(s, c), t));
            }
        }
        if dfa.finals[q] {
            for c in 1..=steps {
                out.push((alone(c), tail));
            }
        }
        out.sort_unstable();
        trans.push(out);
    }
    trans.push((1..=steps).map(|c| (alone(c), tail)).collect());
    let mut finals = dfa.finals.clone();
    finals.push(true);
    check_states(n + 1, "cylindrification")?;
    let raw = Dfa { domain: new_domain.clone(), trans, initial: dfa.initial, finals };
    raw.intersect(&new_domain.universe()?)
}

/// Reorders tracks: track `i` of the result is track `perm[i]` of the input.
pub fn permute_tracks(dfa: &Dfa, perm: &[usize]) -> Result<Dfa> {
    if perm.len() != dfa.domain.arity() {
        return Err(Error::Invariant("permutation length differs from arity".into()));
    }
    let domain = dfa.domain.clone();
    let trans = dfa
        .trans
        .iter()
        .map(|out| {
            let mut v: Vec<(Sym, State)> = out
                .iter()
                .map(|&(s, t)| {
                    let comps = domain.decode_tuple(s);
                    let new: Vec<u32> = perm.iter().map(|&p| comps[p]).collect();
                    (domain.encode_tuple(&new), t)
                })
                .collect();
            v.sort_unstable();
            v
        })
        .collect();
    Ok(Dfa { domain: domain.clone(), trans, initial: dfa.initial, finals: dfa.finals.clone() }.minimize())
}

/// Converts a one-track automaton to a step automaton (identical codes).
pub fn single_track_to_steps(dfa: &Dfa) -> Result<Dfa> {
    match &dfa.domain {
        Domain::Tracks { alphabet, arity: 1 } => Ok(Dfa { domain: Domain::steps(alphabet), ..dfa.clone() }),
        d => Err(Error::DomainMismatch(format!("expected tracks/1, got {}", d.describe()))),
    }
}

/// Converts a step automaton to a one-track automaton.
pub fn steps_to_single_track(dfa: &Dfa) -> Result<Dfa> {
    match &dfa.domain {
        Domain::Steps { alphabet, with_empty: false } => {
            Ok(Dfa { domain: Domain::tracks(alphabet, 1), ..dfa.clone() })
        }
        d => Err(Error::DomainMismatch(format!("expected steps-nonempty, got {}", d.describe()))),
    }
}

/// A binary word-automatic relation on Foata normal forms.
#[derive(Clone, Debug, PartialEq)]
pub struct SyncRelation {
    dfa: Dfa,
}

impl SyncRelation {
    /// Wraps a two-track automaton, checking that it only accepts
    /// convolutions of Foata words.
    pub fn new(dfa: Dfa) -> Result<Self> {
        if !matches!(dfa.domain, Domain::Tracks { arity: 2, .. }) {
            return Err(Error::DomainMismatch(format!(
                "relations need a tracks/2 automaton, got {}",
                dfa.domain.describe()
            )));
        }
        if !dfa.is_subset_of(&dfa.domain.universe()?)? {
            return Err(Error::Invariant("relation accepts ill-formed convolutions".into()));
        }
        Ok(SyncRelation { dfa: dfa.minimize() })
    }

    pub(crate) fn from_dfa_unchecked(dfa: Dfa) -> Self {
        SyncRelation { dfa }
    }

    pub fn empty(alphabet: &Arc<Alphabet>) -> Self {
        SyncRelation { dfa: Dfa::empty(Domain::tracks(alphabet, 2)) }
    }

    pub fn dfa(&self) -> &Dfa {
        &self.dfa
    }

    pub fn alphabet(&self) -> &Arc<Alphabet> {
        self.dfa.domain.alphabet()
    }

    /// `{u ⊗ v | u, v ∈ L}` for a language of step words.
    pub fn all_pairs(lang: &Dfa) -> Result<Self> {
        let alphabet = lang.domain.alphabet().clone();
        Ok(SyncRelation { dfa: tracks_product(&alphabet, &[lang, lang])? })
    }

    /// All pairs of traces.
    pub fn universe(alphabet: &Arc<Alphabet>) -> Result<Self> {
        Ok(SyncRelation { dfa: Domain::tracks(alphabet, 2).universe()?.minimize() })
    }

    /// `{w ⊗ w | w ∈ L}`.
    pub fn identity(lang: &Dfa) -> Result<Self> {
        let Domain::Steps { alphabet, with_empty: false } = &lang.domain else {
            return Err(Error::DomainMismatch("identity needs a steps-nonempty language".into()));
        };
        let domain = Domain::tracks(alphabet, 2);
        let trans = lang
            .trans
            .iter()
            .map(|out| {
                let mut v: Vec<(Sym, State)> =
                    out.iter().map(|&(c, t)| (domain.encode_tuple(&[c, c]), t)).collect();
                v.sort_unstable();
                v
            })
            .collect();
        let dfa = Dfa { domain, trans, initial: lang.initial, finals: lang.finals.clone() };
        Ok(SyncRelation { dfa: dfa.intersect(&dfa.domain.universe()?)? })
    }

    pub fn contains(&self, u: &FoataWord, v: &FoataWord) -> bool {
        self.dfa.accepts(&convolution(self.alphabet(), &[u, v]))
    }

    /// Domain of the relation, as a step automaton.
    pub fn project_left(&self) -> Result<Dfa> {
        single_track_to_steps(&project_out(&self.dfa, 1)?)
    }

    /// Image of the relation, as a step automaton.
    pub fn project_right(&self) -> Result<Dfa> {
        single_track_to_steps(&project_out(&self.dfa, 0)?)
    }

    pub fn restrict_left(&self, lang: &Dfa) -> Result<Self> {
        let alphabet = self.alphabet().clone();
        let any = foata_automaton(&alphabet);
        let cyl = tracks_product(&alphabet, &[lang, &any])?;
        Ok(SyncRelation { dfa: self.dfa.intersect(&cyl)? })
    }

    pub fn restrict_right(&self, lang: &Dfa) -> Result<Self> {
        let alphabet = self.alphabet().clone();
        let any = foata_automaton(&alphabet);
        let cyl = tracks_product(&alphabet, &[&any, lang])?;
        Ok(SyncRelation { dfa: self.dfa.intersect(&cyl)? })
    }

    pub fn union(&self, other: &Self) -> Result<Self> {
        Ok(SyncRelation { dfa: self.dfa.union(&other.dfa)? })
    }

    pub fn intersect(&self, other: &Self) -> Result<Self> {
        Ok(SyncRelation { dfa: self.dfa.intersect(&other.dfa)? })
    }

    /// Complement relative to all pairs of traces.
    pub fn complement(&self) -> Result<Self> {
        Ok(SyncRelation { dfa: self.dfa.complement()? })
    }

    pub fn is_empty(&self) -> bool {
        self.dfa.is_empty()
    }

    /// Converse relation.
    pub fn inverse(&self) -> Result<Self> {
        Ok(SyncRelation { dfa: permute_tracks(&self.dfa, &[1, 0])? })
    }

    /// Images of `u` with at most `max_letters` letters, by depth-first
    /// search along the right track.
    pub fn images_bounded(&self, u: &FoataWord, max_letters: usize) -> Vec<FoataWord> {
        let alphabet = self.alphabet().clone();
        let domain = &self.dfa.domain;
        let left = u.step_codes();
        let mut out = Vec::new();
        // (state, column, right codes, letters, right padded)
        let mut stack: Vec<(State, usize, Vec<u32>, usize, bool)> = vec![(self.dfa.initial, 0, Vec::new(), 0, false)];
        while let Some((q, i, right, letters, padded)) = stack.pop() {
            if i >= left.len() && self.dfa.is_final(q) {
                out.push(
                    FoataWord::from_steps(&alphabet, right.iter().map(|&c| alphabet.step(c)).collect())
                        .expect("relation tracks are Foata words"),
                );
            }
            let want_left = left.get(i).copied().unwrap_or(0);
            for &(s, t) in &self.dfa.trans[q as usize] {
                let l = domain.component(s, 0);
                let r = domain.component(s, 1);
                if l != want_left || (padded && r != 0) {
                    continue;
                }
                if r == 0 {
                    if i < left.len() {
                        stack.push((t, i + 1, right.clone(), letters, true));
                    }
                    continue;
                }
                let size = alphabet.step(r).len();
                if letters + size > max_letters {
                    continue;
                }
                let mut r2 = right.clone();
                r2.push(r);
                stack.push((t, i + 1, r2, letters + size, false));
            }
        }
        out.sort();
        out.dedup();
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automata::parse_regex;
    use crate::trace::all_traces;

    fn ab() -> Arc<Alphabet> {
        Alphabet::new(&["a", "b"], &[("a", "b")]).unwrap()
    }

    fn tr(al: &Arc<Alphabet>, s: &str) -> FoataWord {
        al.parse_trace(s).unwrap()
    }

    #[test]
    fn convolve_words() {
        assert_eq!(
            convolve(&['a', 'b'], &['a']),
            vec![(Some('a'), Some('a')), (Some('b'), None)]
        );
        assert!(convolve::<char>(&[], &[]).is_empty());
        let al = Alphabet::new(&["a", "b", "c"], &[("a", "c")]).unwrap();
        let u = tr(&al, "acb");
        let v = tr(&al, "ac");
        let d = Domain::tracks(&al, 2);
        let rendered: String = convolution(&al, &[&u, &v]).iter().map(|&s| d.fmt_sym(s)).collect();
        assert_eq!(rendered, "({a,c},{a,c})({b},#)");
    }

    #[test]
    fn all_pairs_of_foata() {
        let al = ab();
        let foata = foata_automaton(&al);
        let r = SyncRelation::all_pairs(&foata).unwrap();
        assert!(r.contains(&tr(&al, "a"), &tr(&al, "b")));
        assert!(r.contains(&tr(&al, "aba"), &tr(&al, "b")));
        // ({a},{b})({b},#): left word {a}{b} is not a Foata word
        let d = Domain::tracks(&al, 2);
        let a = al.step_code(crate::LetterSet(1)).unwrap();
        let b = al.step_code(crate::LetterSet(2)).unwrap();
        assert!(!r.dfa().accepts(&[d.encode_tuple(&[a, b]), d.encode_tuple(&[b, 0])]));
        let eps = SyncRelation::all_pairs(&crate::automata::Dfa::epsilon(Domain::steps(&al))).unwrap();
        assert!(eps.contains(&FoataWord::empty(&al), &FoataWord::empty(&al)));
        assert!(!eps.contains(&tr(&al, "a"), &FoataWord::empty(&al)));
    }

    #[test]
    fn all_pairs_by_enumeration() {
        let al = ab();
        let lang = parse_regex(&Domain::steps(&al), "{a,b}*({a}+ε)")
            .unwrap()
            .intersect(&foata_automaton(&al))
            .unwrap();
        let r = SyncRelation::all_pairs(&lang).unwrap();
        let traces = all_traces(&al, 4);
        for u in &traces {
            for v in &traces {
                let inl = |t: &FoataWord| lang.accepts(&t.step_codes());
                assert_eq!(r.contains(u, v), inl(u) && inl(v));
            }
        }
    }

    #[test]
    fn projections() {
        let al = ab();
        let lang = parse_regex(&Domain::steps(&al), "{a,b}*").unwrap();
        let id = SyncRelation::identity(&lang).unwrap();
        assert!(id.project_left().unwrap().equivalent(&lang).unwrap());
        assert!(id.project_right().unwrap().equivalent(&lang).unwrap());
        let all = SyncRelation::all_pairs(&lang).unwrap();
        assert!(all.project_right().unwrap().equivalent(&lang).unwrap());
        assert!(id.contains(&tr(&al, "abab"), &tr(&al, "abab")));
        assert!(!id.contains(&tr(&al, "a"), &tr(&al, "a")));
    }

    /// {u ⊗ v | |u| < |v|} over all Foata words, built by a hand-rolled
    /// automaton; projections are checked against enumeration.
    #[test]
    fn projections_of_shorter_than() {
        let al = ab();
        let foata = foata_automaton(&al);
        let all = SyncRelation::all_pairs(&foata).unwrap();
        // a word is shorter-than iff it ends with a column (#, x)
        let d = Domain::tracks(&al, 2);
        let mut nfa = Nfa::new(d.clone());
        let s0 = nfa.add_state(false);
        let s1 = nfa.add_state(true);
        nfa.initial.push(s0);
        for s in d.symbols() {
            let c = d.decode_tuple(s);
            if c[0] != 0 {
                nfa.add_transition(s0, s, s0);
            } else {
                nfa.add_transition(s0, s, s1);
                nfa.add_transition(s1, s, s1);
            }
        }
        let shorter = all.intersect(&SyncRelation::from_dfa_unchecked(nfa.determinize().unwrap())).unwrap();
        let left = shorter.project_left().unwrap();
        let right = shorter.project_right().unwrap();
        for t in all_traces(&al, 4) {
            if t.steps().len() <= 2 {
                // every Foata word has longer Foata extensions
                assert!(left.accepts(&t.step_codes()));
            }
            assert_eq!(right.accepts(&t.step_codes()), !t.is_empty(), "{t}");
        }
    }

    #[test]
    fn restriction_and_complement() {
        let al = ab();
        let foata = foata_automaton(&al);
        let all = SyncRelation::all_pairs(&foata).unwrap();
        let w = tr(&al, "ab");
        let single = crate::automata::LevelRegLang::from_traces(&al, std::slice::from_ref(&w)).unwrap();
        let right = all.restrict_left(single.dfa()).unwrap().project_right().unwrap();
        assert!(right.equivalent(&foata.minimize()).unwrap());
        let id = SyncRelation::identity(&foata).unwrap();
        assert!(id.intersect(&id.complement().unwrap()).unwrap().is_empty());
        assert!(id.union(&id.complement().unwrap()).unwrap().dfa().equivalent(all.dfa()).unwrap());
    }

    #[test]
    fn cylindrify_then_project_is_identity() {
        let al = ab();
        let lang = parse_regex(&Domain::steps(&al), "{a}{a}*").unwrap();
        let one = steps_to_single_track(&lang).unwrap();
        for j in 0..=1 {
            let two = insert_track(&one, j).unwrap();
            let back = project_out(&two, j).unwrap();
            assert!(back.equivalent(&one).unwrap());
        }
    }

    #[test]
    fn bounded_images() {
        let al = ab();
        let foata = foata_automaton(&al);
        let all = SyncRelation::all_pairs(&foata).unwrap();
        let imgs = all.images_bounded(&tr(&al, "a"), 2);
        assert_eq!(imgs.len(), all_traces(&al, 2).len());
    }
}
