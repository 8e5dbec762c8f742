//! Finite automata over explicit symbol domains.
//!
//! Symbols are `u32` codes whose meaning is fixed by the automaton's
//! [`Domain`]: letter indices, step codes (0 is the empty step), or padded
//! track tuples. DFAs are partial: a missing transition rejects.

mod lang;
mod regex;

use std::collections::{BTreeMap, HashMap, VecDeque};
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::limits::check_states;
use crate::trace::{Alphabet, LetterSet};

pub use lang::{decode_steps, is_trace_closed, LevelRegLang, RecTraceLang};
pub use regex::parse_regex;

pub type State = u32;
pub type Sym = u32;

/// What the symbols of an automaton stand for.
#[derive(Clone, Debug)]
pub enum Domain {
    /// Letters of the alphabet.
    Letters(Arc<Alphabet>),
    /// Steps by code; code 0 (the empty step) is legal only when `with_empty`.
    Steps { alphabet: Arc<Alphabet>, with_empty: bool },
    /// Padded tuples of nonempty steps, one component per track; component
    /// 0 is the padding mark and the all-padding column is excluded.
    Tracks { alphabet: Arc<Alphabet>, arity: usize },
}

impl PartialEq for Domain {
    fn eq(&self, other: &Self) -> bool {
        use Domain::*;
        let same = |x: &Arc<Alphabet>, y: &Arc<Alphabet>| Arc::ptr_eq(x, y) || x == y;
        match (self, other) {
            (Letters(a), Letters(b)) => same(a, b),
            (Steps { alphabet: a, with_empty: x }, Steps { alphabet: b, with_empty: y }) => x == y && same(a, b),
            (Tracks { alphabet: a, arity: x }, Tracks { alphabet: b, arity: y }) => x == y && same(a, b),
            _ => false,
        }
    }
}

impl Domain {
    pub fn letters(alphabet: &Arc<Alphabet>) -> Self {
        Domain::Letters(alphabet.clone())
    }

    pub fn steps(alphabet: &Arc<Alphabet>) -> Self {
        Domain::Steps { alphabet: alphabet.clone(), with_empty: false }
    }

    pub fn steps_with_empty(alphabet: &Arc<Alphabet>) -> Self {
        Domain::Steps { alphabet: alphabet.clone(), with_empty: true }
    }

    pub fn tracks(alphabet: &Arc<Alphabet>, arity: usize) -> Self {
        Domain::Tracks { alphabet: alphabet.clone(), arity }
    }

    pub fn alphabet(&self) -> &Arc<Alphabet> {
        match self {
            Domain::Letters(a) | Domain::Steps { alphabet: a, .. } | Domain::Tracks { alphabet: a, .. } => a,
        }
    }

    pub fn arity(&self) -> usize {
        match self {
            Domain::Tracks { arity, .. } => *arity,
            _ => 1,
        }
    }

    /// Number of codes per track component (steps plus the padding mark).
    pub fn track_base(&self) -> u32 {
        self.alphabet().num_steps() + 1
    }

    pub fn encode_tuple(&self, comps: &[u32]) -> Sym {
        let base = self.track_base();
        comps.iter().rev().fold(0, |acc, &c| acc * base + c)
    }

    pub fn decode_tuple(&self, sym: Sym) -> Vec<u32> {
        let base = self.track_base();
        let mut s = sym;
        (0..self.arity())
            .map(|_| {
                let c = s % base;
                s /= base;
                c
            })
            .collect()
    }

    /// Component `track` of a tuple symbol.
    pub fn component(&self, sym: Sym, track: usize) -> u32 {
        (sym / self.track_base().pow(track as u32)) % self.track_base()
    }

    pub fn contains(&self, sym: Sym) -> bool {
        match self {
            Domain::Letters(a) => (sym as usize) < a.len(),
            Domain::Steps { alphabet, with_empty } => sym <= alphabet.num_steps() && (*with_empty || sym != 0),
            Domain::Tracks { arity, .. } => {
                *arity > 0 && sym != 0 && sym < self.track_base().pow(*arity as u32)
            }
        }
    }

    /// All legal symbols in increasing order.
    pub fn symbols(&self) -> Vec<Sym> {
        match self {
            Domain::Letters(a) => (0..a.len() as Sym).collect(),
            Domain::Steps { alphabet, with_empty } => {
                let start = if *with_empty { 0 } else { 1 };
                (start..=alphabet.num_steps()).collect()
            }
            Domain::Tracks { arity, .. } => {
                if *arity == 0 {
                    Vec::new()
                } else {
                    (1..self.track_base().pow(*arity as u32)).collect()
                }
            }
        }
    }

    pub fn fmt_sym(&self, sym: Sym) -> String {
        match self {
            Domain::Letters(a) => a.name(sym as u8).to_string(),
            Domain::Steps { alphabet, .. } => alphabet.fmt_step(alphabet.step(sym)),
            Domain::Tracks { alphabet, .. } => {
                let parts: Vec<String> = self
                    .decode_tuple(sym)
                    .into_iter()
                    .map(|c| if c == 0 { "#".to_string() } else { alphabet.fmt_step(alphabet.step(c)) })
                    .collect();
                format!("({})", parts.join(","))
            }
        }
    }

    pub fn check_same(&self, other: &Domain) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::DomainMismatch(format!("{} vs {}", self.describe(), other.describe())))
        }
    }

    pub fn describe(&self) -> String {
        match self {
            Domain::Letters(_) => "letters".into(),
            Domain::Steps { with_empty: true, .. } => "steps".into(),
            Domain::Steps { with_empty: false, .. } => "steps-nonempty".into(),
            Domain::Tracks { arity, .. } => format!("tracks/{arity}"),
        }
    }

    /// The word universe of the domain. For track domains this is the set of
    /// well-formed convolutions of Foata normal forms.
    pub fn universe(&self) -> Result<Dfa> {
        match self {
            Domain::Letters(_) | Domain::Steps { .. } => {
                let trans = vec![self.symbols().into_iter().map(|s| (s, 0)).collect()];
                Ok(Dfa { domain: self.clone(), trans, initial: 0, finals: vec![true] })
            }
            Domain::Tracks { alphabet, arity } => convolution_universe(self, alphabet, *arity),
        }
    }
}

/// Per-track status: 0 = nothing read, 1..=S = last step, S+1 = padded.
fn convolution_universe(domain: &Domain, alphabet: &Arc<Alphabet>, arity: usize) -> Result<Dfa> {
    let steps = alphabet.num_steps();
    let padded = steps + 1;
    let mut index: HashMap<Vec<u32>, State> = HashMap::new();
    let mut states: Vec<Vec<u32>> = Vec::new();
    let mut trans: Vec<Vec<(Sym, State)>> = Vec::new();
    let start = vec![0u32; arity];
    index.insert(start.clone(), 0);
    states.push(start);
    let mut i = 0;
    while i < states.len() {
        let status = states[i].clone();
        let options: Vec<Vec<u32>> = status
            .iter()
            .map(|&st| {
                if st == padded {
                    vec![0]
                } else {
                    let mut v = vec![0];
                    v.extend((1..=steps).filter(|&d| st == 0 || alphabet.chains(alphabet.step(st), alphabet.step(d))));
                    v
                }
            })
            .collect();
        let mut out = Vec::new();
        for comps in cartesian(&options) {
            if comps.iter().all(|&c| c == 0) {
                continue;
            }
            let next: Vec<u32> = comps
                .iter()
                .map(|&c| if c == 0 { padded } else { c })
                .collect();
            let id = match index.get(&next) {
                Some(&id) => id,
                None => {
                    let id = states.len() as State;
                    check_states(states.len() + 1, "convolution universe")?;
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
    let finals = vec![true; states.len()];
    Ok(Dfa { domain: domain.clone(), trans, initial: 0, finals })
}

pub(crate) fn cartesian(options: &[Vec<u32>]) -> Vec<Vec<u32>> {
    let mut acc: Vec<Vec<u32>> = vec![Vec::new()];
    for opts in options {
        let mut next = Vec::with_capacity(acc.len() * opts.len());
        for prefix in &acc {
            for &o in opts {
                let mut v = prefix.clone();
                v.push(o);
                next.push(v);
            }
        }
        acc = next;
    }
    acc
}

/// Nondeterministic automaton without ε-moves.
#[derive(Clone, Debug)]
pub struct Nfa {
    pub domain: Domain,
    pub trans: Vec<Vec<(Sym, State)>>,
    pub initial: Vec<State>,
    pub finals: Vec<bool>,
}

impl Nfa {
    pub fn new(domain: Domain) -> Self {
        Nfa { domain, trans: Vec::new(), initial: Vec::new(), finals: Vec::new() }
    }

    pub fn add_state(&mut self, is_final: bool) -> State {
        self.trans.push(Vec::new());
        self.finals.push(is_final);
        (self.trans.len() - 1) as State
    }

    pub fn add_transition(&mut self, from: State, sym: Sym, to: State) {
        self.trans[from as usize].push((sym, to));
    }

    pub fn num_states(&self) -> usize {
        self.trans.len()
    }

    /// Subset construction.
    pub fn determinize(&self) -> Result<Dfa> {
        let mut start: Vec<State> = self.initial.clone();
        start.sort_unstable();
        start.dedup();
        let mut index: HashMap<Vec<State>, State> = HashMap::new();
        let mut sets: Vec<Vec<State>> = vec![start.clone()];
        index.insert(start, 0);
        let mut trans: Vec<Vec<(Sym, State)>> = Vec::new();
        let mut finals = Vec::new();
        let mut i = 0;
        while i < sets.len() {
            let set = sets[i].clone();
            finals.push(set.iter().any(|&q| self.finals[q as usize]));
            let mut by_sym: BTreeMap<Sym, Vec<State>> = BTreeMap::new();
            for &q in &set {
                for &(s, t) in &self.trans[q as usize] {
                    by_sym.entry(s).or_default().push(t);
                }
            }
            let mut out = Vec::with_capacity(by_sym.len());
            for (s, mut targets) in by_sym {
                targets.sort_unstable();
                targets.dedup();
                let id = match index.get(&targets) {
                    Some(&id) => id,
                    None => {
                        let id = sets.len() as State;
                        check_states(sets.len() + 1, "subset construction")?;
                        index.insert(targets.clone(), id);
                        sets.push(targets);
                        id
                    }
                };
                out.push((s, id));
            }
            trans.push(out);
            i += 1;
        }
        Ok(Dfa { domain: self.domain.clone(), trans, initial: 0, finals })
    }

    pub fn accepts(&self, word: &[Sym]) -> bool {
        let mut cur: Vec<State> = self.initial.clone();
        for &s in word {
            let mut next: Vec<State> = cur
                .iter()
                .flat_map(|&q| self.trans[q as usize].iter().filter(|(x, _)| *x == s).map(|(_, t)| *t))
                .collect();
            next.sort_unstable();
            next.dedup();
            cur = next;
        }
        cur.iter().any(|&q| self.finals[q as usize])
    }
}

/// How a product enumerates symbols.
#[derive(Clone, Copy, PartialEq, Eq)]
enum Pairing {
    /// Both sides must move.
    Both,
    /// Either side may move; the other goes to the implicit dead state.
    Either,
    /// Symbols come from the right side; the left may be dead.
    Right,
}

/// Deterministic, possibly partial automaton.
#[derive(Clone, Debug)]
pub struct Dfa {
    pub domain: Domain,
    /// Outgoing transitions per state, sorted by symbol.
    pub trans: Vec<Vec<(Sym, State)>>,
    pub initial: State,
    pub finals: Vec<bool>,
}

impl PartialEq for Dfa {
    /// Structural equality; on minimized automata this is language equality.
    fn eq(&self, other: &Self) -> bool {
        self.domain == other.domain
            && self.initial == other.initial
            && self.finals == other.finals
            && self.trans == other.trans
    }
}

impl Dfa {
    /// Builds a DFA from explicit parts, checking determinism and symbols.
    pub fn from_parts(domain: Domain, mut trans: Vec<Vec<(Sym, State)>>, initial: State, finals: Vec<bool>) -> Result<Self> {
        let n = trans.len();
        if finals.len() != n || (initial as usize) >= n.max(1) {
            return Err(Error::Invariant("state indices out of range".into()));
        }
        for (q, out) in trans.iter_mut().enumerate() {
            out.sort_unstable();
            for w in out.windows(2) {
                if w[0].0 == w[1].0 {
                    return Err(Error::Invariant(format!(
                        "state {q} has two transitions on {}",
                        domain.fmt_sym(w[0].0)
                    )));
                }
            }
            for &(s, t) in out.iter() {
                if !domain.contains(s) {
                    return Err(Error::DomainMismatch(format!("symbol {s} not in domain {}", domain.describe())));
                }
                if t as usize >= n {
                    return Err(Error::Invariant(format!("transition target {t} out of range")));
                }
            }
        }
        Ok(Dfa { domain, trans, initial, finals })
    }

    /// The empty language.
    pub fn empty(domain: Domain) -> Self {
        Dfa { domain, trans: vec![Vec::new()], initial: 0, finals: vec![false] }
    }

    /// The language `{ε}`.
    pub fn epsilon(domain: Domain) -> Self {
        Dfa { domain, trans: vec![Vec::new()], initial: 0, finals: vec![true] }
    }

    pub fn num_states(&self) -> usize {
        self.trans.len()
    }

    pub fn num_transitions(&self) -> usize {
        self.trans.iter().map(Vec::len).sum()
    }

    pub fn next(&self, q: State, sym: Sym) -> Option<State> {
        let out = &self.trans[q as usize];
        out.binary_search_by_key(&sym, |&(s, _)| s).ok().map(|i| out[i].1)
    }

    pub fn run_from(&self, q: State, word: &[Sym]) -> Option<State> {
        word.iter().try_fold(q, |q, &s| self.next(q, s))
    }

    pub fn run(&self, word: &[Sym]) -> Option<State> {
        self.run_from(self.initial, word)
    }

    pub fn accepts(&self, word: &[Sym]) -> bool {
        self.run(word).is_some_and(|q| self.finals[q as usize])
    }

    pub fn is_final(&self, q: State) -> bool {
        self.finals[q as usize]
    }

    pub fn with_initial(&self, q: State) -> Dfa {
        Dfa { initial: q, ..self.clone() }
    }

    pub fn to_nfa(&self) -> Nfa {
        Nfa {
            domain: self.domain.clone(),
            trans: self.trans.clone(),
            initial: vec![self.initial],
            finals: self.finals.clone(),
        }
    }

    fn reachable(&self) -> Vec<bool> {
        let mut seen = vec![false; self.num_states()];
        let mut stack = vec![self.initial];
        seen[self.initial as usize] = true;
        while let Some(q) = stack.pop() {
            for &(_, t) in &self.trans[q as usize] {
                if !seen[t as usize] {
                    seen[t as usize] = true;
                    stack.push(t);
                }
            }
        }
        seen
    }

    fn coreachable(&self) -> Vec<bool> {
        let n = self.num_states();
        let mut rev: Vec<Vec<State>> = vec![Vec::new(); n];
        for (q, out) in self.trans.iter().enumerate() {
            for &(_, t) in out {
                rev[t as usize].push(q as State);
            }
        }
        let mut live: Vec<bool> = self.finals.clone();
        let mut stack: Vec<State> = (0..n as State).filter(|&q| live[q as usize]).collect();
        while let Some(q) = stack.pop() {
            for &p in &rev[q as usize] {
                if !live[p as usize] {
                    live[p as usize] = true;
                    stack.push(p);
                }
            }
        }
        live
    }

    /// Canonical minimal DFA: trimmed, Moore partition refinement, states
    /// renumbered in breadth-first order.
    pub fn minimize(&self) -> Dfa {
        let reach = self.reachable();
        let live = self.coreachable();
        let useful: Vec<bool> = reach.iter().zip(&live).map(|(r, l)| *r && *l).collect();
        if !useful[self.initial as usize] {
            return Dfa::empty(self.domain.clone());
        }
        let n = self.num_states();
        let mut class: Vec<u32> = (0..n).map(|q| u32::from(self.finals[q])).collect();
        let mut count = {
            let mut c: Vec<u32> = (0..n).filter(|&q| useful[q]).map(|q| class[q]).collect();
            c.sort_unstable();
            c.dedup();
            c.len()
        };
        loop {
            let mut sigs: HashMap<(u32, Vec<(Sym, u32)>), u32> = HashMap::new();
            let mut next = vec![u32::MAX; n];
            for q in 0..n {
                if !useful[q] {
                    continue;
                }
                let sig: Vec<(Sym, u32)> = self.trans[q]
                    .iter()
                    .filter(|(_, t)| useful[*t as usize])
                    .map(|&(s, t)| (s, class[t as usize]))
                    .collect();
                let fresh = sigs.len() as u32;
                next[q] = *sigs.entry((class[q], sig)).or_insert(fresh);
            }
            let new_count = sigs.len();
            class = next;
            if new_count == count {
                break;
            }
            count = new_count;
        }
        // renumber in BFS order from the initial class
        let mut order: HashMap<u32, State> = HashMap::new();
        let mut rep: Vec<usize> = Vec::new();
        let mut queue = VecDeque::new();
        order.insert(class[self.initial as usize], 0);
        rep.push(self.initial as usize);
        queue.push_back(self.initial as usize);
        let mut trans: Vec<Vec<(Sym, State)>> = Vec::new();
        let mut finals = Vec::new();
        while let Some(q) = queue.pop_front() {
            finals.push(self.finals[q]);
            let mut out = Vec::new();
            for &(s, t) in &self.trans[q] {
                if !useful[t as usize] {
                    continue;
                }
                let c = class[t as usize];
                let id = match order.get(&c) {
                    Some(&id) => id,
                    None => {
                        let id = rep.len() as State;
                        order.insert(c, id);
                        rep.push(t as usize);
                        queue.push_back(t as usize);
                        id
                    }
                };
                out.push((s, id));
            }
            trans.push(out);
        }
        Dfa { domain: self.domain.clone(), trans, initial: 0, finals }
    }

    fn product(&self, other: &Dfa, pairing: Pairing, accept: impl Fn(bool, bool) -> bool) -> Result<Dfa> {
        self.domain.check_same(&other.domain)?;
        type Pair = (Option<State>, Option<State>);
        let mut index: HashMap<Pair, State> = HashMap::new();
        let mut pairs: Vec<Pair> = vec![(Some(self.initial), Some(other.initial))];
        index.insert(pairs[0], 0);
        let mut trans = Vec::new();
        let mut finals = Vec::new();
        let empty: Vec<(Sym, State)> = Vec::new();
        let mut i = 0;
        while i < pairs.len() {
            let (p, q) = pairs[i];
            let fp = p.is_some_and(|p| self.is_final(p));
            let fq = q.is_some_and(|q| other.is_final(q));
            finals.push(accept(fp, fq));
            let left = p.map_or(&empty, |p| &self.trans[p as usize]);
            let right = q.map_or(&empty, |q| &other.trans[q as usize]);
            let mut moves: Vec<(Sym, Pair)> = Vec::new();
            match pairing {
                Pairing::Both => {
                    for &(s, t) in left {
                        if let Some(u) = q.and_then(|q| other.next(q, s)) {
                            moves.push((s, (Some(t), Some(u))));
                        }
                    }
                }
                Pairing::Right => {
                    for &(s, u) in right {
                        moves.push((s, (p.and_then(|p| self.next(p, s)), Some(u))));
                    }
                }
                Pairing::Either => {
                    let mut syms: Vec<Sym> = left.iter().chain(right.iter()).map(|&(s, _)| s).collect();
                    syms.sort_unstable();
                    syms.dedup();
                    for s in syms {
                        moves.push((s, (p.and_then(|p| self.next(p, s)), q.and_then(|q| other.next(q, s)))));
                    }
                }
            }
            let mut out = Vec::with_capacity(moves.len());
            for (s, pair) in moves {
                let id = match index.get(&pair) {
                    Some(&id) => id,
                    None => {
                        let id = pairs.len() as State;
                        check_states(pairs.len() + 1, "product construction")?;
                        index.insert(pair, id);
                        pairs.push(pair);
                        id
                    }
                };
                out.push((s, id));
            }
            trans.push(out);
            i += 1;
        }
        Ok(Dfa { domain: self.domain.clone(), trans, initial: 0, finals }.minimize())
    }

    pub fn intersect(&self, other: &Dfa) -> Result<Dfa> {
        self.product(other, Pairing::Both, |a, b| a && b)
    }

    pub fn union(&self, other: &Dfa) -> Result<Dfa> {
        self.product(other, Pairing::Either, |a, b| a || b)
    }

    pub fn difference(&self, other: &Dfa) -> Result<Dfa> {
        self.product(other, Pairing::Either, |a, b| a && !b)
    }

    /// Complement relative to the domain's word universe.
    pub fn complement(&self) -> Result<Dfa> {
        self.complement_within(&self.domain.universe()?)
    }

    /// Complement relative to the language of `universe`.
    pub fn complement_within(&self, universe: &Dfa) -> Result<Dfa> {
        self.product(universe, Pairing::Right, |a, u| u && !a)
    }

    pub fn is_empty(&self) -> bool {
        let live = self.coreachable();
        !live[self.initial as usize]
    }

    pub fn is_subset_of(&self, other: &Dfa) -> Result<bool> {
        Ok(self.difference(other)?.is_empty())
    }

    pub fn equivalent(&self, other: &Dfa) -> Result<bool> {
        self.domain.check_same(&other.domain)?;
        Ok(self.minimize() == other.minimize())
    }

    /// Length-lexicographically least accepted word.
    pub fn shortest_word(&self) -> Option<Vec<Sym>> {
        let n = self.num_states();
        let mut parent: Vec<Option<(State, Sym)>> = vec![None; n];
        let mut seen = vec![false; n];
        let mut queue = VecDeque::from([self.initial]);
        seen[self.initial as usize] = true;
        while let Some(q) = queue.pop_front() {
            if self.is_final(q) {
                let mut word = Vec::new();
                let mut cur = q;
                while let Some((p, s)) = parent[cur as usize] {
                    word.push(s);
                    cur = p;
                }
                word.reverse();
                return Some(word);
            }
            for &(s, t) in &self.trans[q as usize] {
                if !seen[t as usize] {
                    seen[t as usize] = true;
                    parent[t as usize] = Some((q, s));
                    queue.push_back(t);
                }
            }
        }
        None
    }

    /// All accepted words of length at most `max_len`, length-lexicographic.
    pub fn enumerate_words(&self, max_len: usize) -> Vec<Vec<Sym>> {
        let live = self.coreachable();
        let mut out = Vec::new();
        let mut layer: Vec<(State, Vec<Sym>)> = vec![(self.initial, Vec::new())];
        for len in 0..=max_len {
            for (q, w) in &layer {
                if self.is_final(*q) {
                    out.push(w.clone());
                }
            }
            if len == max_len {
                break;
            }
            let mut next = Vec::new();
            for (q, w) in &layer {
                for &(s, t) in &self.trans[*q as usize] {
                    if live[t as usize] {
                        let mut w2 = w.clone();
                        w2.push(s);
                        next.push((t, w2));
                    }
                }
            }
            layer = next;
        }
        out
    }

    /// Renders a word of this domain.
    pub fn fmt_word(&self, word: &[Sym]) -> String {
        if word.is_empty() {
            return "ε".into();
        }
        word.iter().map(|&s| self.domain.fmt_sym(s)).collect()
    }

    /// Relabels symbols; `None` drops the transition.
    pub fn map_symbols(&self, domain: Domain, f: impl Fn(Sym) -> Option<Sym>) -> Nfa {
        Nfa {
            domain,
            trans: self
                .trans
                .iter()
                .map(|out| out.iter().filter_map(|&(s, t)| f(s).map(|s2| (s2, t))).collect())
                .collect(),
            initial: vec![self.initial],
            finals: self.finals.clone(),
        }
    }
}

/// The level automaton: accepts exactly the Foata normal forms. States are
/// the initial state 0 and one state per nonempty step (its code); all final.
pub fn foata_automaton(alphabet: &Arc<Alphabet>) -> Dfa {
    let steps = alphabet.num_steps();
    let mut trans = Vec::with_capacity(steps as usize + 1);
    trans.push((1..=steps).map(|c| (c, c)).collect());
    for a in 1..=steps {
        let from = alphabet.step(a);
        trans.push(
            (1..=steps)
                .filter(|&b| alphabet.chains(from, alphabet.step(b)))
                .map(|b| (b, b))
                .collect(),
        );
    }
    let finals = vec![true; steps as usize + 1];
    Dfa { domain: Domain::steps(alphabet), trans, initial: 0, finals }
}

/// Step codes of a letter-set sequence; fails on non-steps.
pub fn step_word(alphabet: &Alphabet, steps: &[LetterSet]) -> Result<Vec<Sym>> {
    steps
        .iter()
        .map(|s| alphabet.step_code(*s).ok_or_else(|| Error::Invariant("not a step".into())))
        .collect()
}
