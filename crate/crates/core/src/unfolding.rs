//! Concurrent automata, their unfoldings over the trace monoid compiled to
//! RTL systems, and first-order queries on the induced event structures.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use crate::automata::{Dfa, Domain, RecTraceLang, State, Sym};
use crate::error::{Error, Result};
use crate::fo::{check_assignment, Formula};
use crate::rtl::{compile, AutomaticPresentation, Edge, RtlRule, RtlSystem};
use crate::trace::{all_traces, Alphabet, FoataWord, Letter};

/// A finite automaton over a dependence alphabet; it is concurrent when
/// [`ConcurrentAutomaton::validate`] reports nothing.
#[derive(Clone, Debug)]
pub struct ConcurrentAutomaton {
    alphabet: Arc<Alphabet>,
    states: Vec<String>,
    trans: Vec<Vec<(Letter, usize)>>,
    initial: usize,
    finals: Vec<bool>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    /// Two `letter`-transitions leave `state`.
    Nondeterministic { state: String, letter: String },
    /// `state --ab--> q` without `state --ba--> q`.
    Diamond { state: String, a: String, b: String },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Nondeterministic { state, letter } => {
                write!(f, "state {state} has several {letter}-transitions")
            }
            Violation::Diamond { state, a, b } => {
                write!(f, "from {state}, {a}{b} reaches a state that {b}{a} does not")
            }
        }
    }
}

impl ConcurrentAutomaton {
    pub fn new(
        alphabet: &Arc<Alphabet>,
        states: &[&str],
        initial: &str,
        finals: &[&str],
        transitions: &[(&str, &str, &str)],
    ) -> Result<Self> {
        let states: Vec<String> = states.iter().map(|s| s.to_string()).collect();
        let idx = |name: &str| {
            states
                .iter()
                .position(|s| s == name)
                .ok_or_else(|| Error::Parse(format!("unknown state `{name}`")))
        };
        let mut trans = vec![Vec::new(); states.len()];
        for &(p, a, q) in transitions {
            let (p, q) = (idx(p)?, idx(q)?);
            trans[p].push((alphabet.letter(a)?, q));
        }
        for t in trans.iter_mut() {
            t.sort_unstable();
            t.dedup();
        }
        let mut fin = vec![false; states.len()];
        for f in finals {
            fin[idx(f)?] = true;
        }
        let initial = idx(initial)?;
        Ok(ConcurrentAutomaton { alphabet: alphabet.clone(), states, trans, initial, finals: fin })
    }

    pub fn alphabet(&self) -> &Arc<Alphabet> {
        &self.alphabet
    }

    pub fn states(&self) -> &[String] {
        &self.states
    }

    pub fn initial(&self) -> usize {
        self.initial
    }

    pub fn finals(&self) -> Vec<usize> {
        (0..self.states.len()).filter(|&q| self.finals[q]).collect()
    }

    pub fn transitions(&self) -> Vec<(usize, Letter, usize)> {
        self.trans.iter().enumerate().flat_map(|(p, out)| out.iter().map(move |&(a, q)| (p, a, q))).collect()
    }

    /// Same graph with another set of final states.
    pub fn with_finals(&self, finals: &[usize]) -> Self {
        let mut c = self.clone();
        c.finals = (0..self.states.len()).map(|q| finals.contains(&q)).collect();
        c
    }

    fn targets(&self, p: usize, a: Letter) -> Vec<usize> {
        self.trans[p].iter().filter(|t| t.0 == a).map(|t| t.1).collect()
    }

    fn next(&self, p: usize, a: Letter) -> Option<usize> {
        self.trans[p].iter().find(|t| t.0 == a).map(|t| t.1)
    }

    /// Violations of determinism and of the independence diamond.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        for p in 0..self.states.len() {
            for a in self.alphabet.letters() {
                if self.targets(p, a).len() > 1 {
                    out.push(Violation::Nondeterministic {
                        state: self.states[p].clone(),
                        letter: self.alphabet.name(a).to_string(),
                    });
                }
            }
        }
        for p in 0..self.states.len() {
            for (a, b) in self.alphabet.independent_pairs() {
                for (x, y) in [(a, b), (b, a)] {
                    let via = |first: Letter, second: Letter| -> BTreeSet<usize> {
                        self.targets(p, first).into_iter().flat_map(|m| self.targets(m, second)).collect()
                    };
                    if !via(x, y).is_subset(&via(y, x)) {
                        out.push(Violation::Diamond {
                            state: self.states[p].clone(),
                            a: self.alphabet.name(x).to_string(),
                            b: self.alphabet.name(y).to_string(),
                        });
                    }
                }
            }
        }
        out
    }

    fn check(&self) -> Result<()> {
        match self.validate().first() {
            None => Ok(()),
            Some(v) => Err(Error::Invariant(format!("not a concurrent automaton: {v}"))),
        }
    }

    fn letter_dfa(&self, from: usize, to: &[usize]) -> Dfa {
        let trans = self.trans.iter().map(|out| out.iter().map(|&(a, q)| (a as Sym, q as State)).collect()).collect();
        let finals = (0..self.states.len()).map(|q| to.contains(&q)).collect();
        Dfa { domain: Domain::letters(&self.alphabet), trans, initial: from as State, finals }
    }

    /// Traces labelling paths from `from` to a state of `to`.
    pub fn state_language(&self, from: usize, to: &[usize]) -> Result<RecTraceLang> {
        self.check()?;
        RecTraceLang::new(self.letter_dfa(from, to).minimize())
    }

    /// State reached by a trace from the initial state.
    pub fn run(&self, t: &FoataWord) -> Option<usize> {
        t.linearize().into_iter().try_fold(self.initial, |p, a| self.next(p, a))
    }

    /// The automaton whose states are the residuals of `rec`, with the empty
    /// residual kept as a sink.
    pub fn residual(rec: &RecTraceLang) -> Self {
        let alphabet = rec.alphabet().clone();
        let dfa = if rec.is_empty() { Dfa::empty(Domain::letters(&alphabet)) } else { rec.dfa().minimize() };
        let n = if rec.is_empty() { 0 } else { dfa.num_states() };
        let complete = dfa.trans.iter().all(|t| t.len() == alphabet.len()) && n > 0;
        let total = if complete { n } else { n + 1 };
        let sink = n;
        let mut trans = vec![Vec::new(); total];
        for p in 0..total {
            for a in alphabet.letters() {
                let q = if p < n { dfa.next(p as State, a as Sym).map_or(sink, |q| q as usize) } else { sink };
                trans[p].push((a, q));
            }
        }
        let mut finals = dfa.finals.clone();
        finals.resize(total, false);
        let states = (0..total).map(|q| if q == sink && !complete { "sink".to_string() } else { format!("r{q}") }).collect();
        let initial = if n == 0 { sink } else { dfa.initial as usize };
        ConcurrentAutomaton { alphabet, states, trans, initial, finals }
    }

    /// `grid`, `grid-tree` or `residual:(ab)*[:N]`.
    pub fn builtin(name: &str) -> Result<Self> {
        match name {
            "grid" => {
                let al = Alphabet::new(&["a", "b"], &[("a", "b")])?;
                Self::new(&al, &["p"], "p", &[], &[("p", "a", "p"), ("p", "b", "p")])
            }
            "grid-tree" => {
                let al = Alphabet::new(&["a", "b", "c"], &[("a", "b")])?;
                Self::new(&al, &["p"], "p", &[], &[("p", "a", "p"), ("p", "b", "p"), ("p", "c", "p")])
            }
            _ => {
                let Some(rest) = name.strip_prefix("residual:(ab)*") else {
                    return Err(Error::Parse(format!("unknown built-in automaton `{name}`")));
                };
                let k = match rest.strip_prefix(':') {
                    Some(n) => n.parse().map_err(|_| Error::Parse(format!("bad bound in `{name}`")))?,
                    None if rest.is_empty() => 3,
                    None => return Err(Error::Parse(format!("unknown built-in automaton `{name}`"))),
                };
                let al = Alphabet::new(&["a", "b"], &[("a", "b")])?;
                Ok(Self::residual(&ab_powers(&al, k)?))
            }
        }
    }
}

/// `{[(ab)^i] | i ≤ k}`: the recognizable truncations of `[(ab)*]`.
pub fn ab_powers(alphabet: &Arc<Alphabet>, k: usize) -> Result<RecTraceLang> {
    let a = alphabet.letter("a")?;
    let b = alphabet.letter("b")?;
    let traces: Vec<FoataWord> = (0..=k).map(|i| FoataWord::normalize(alphabet, &[a, b].repeat(i))).collect();
    RecTraceLang::from_traces(alphabet, &traces)
}

fn base_rules(a: &ConcurrentAutomaton) -> Result<Vec<RtlRule>> {
    let al = a.alphabet.clone();
    let eps = RecTraceLang::epsilon(&al);
    let mut rules = Vec::new();
    for x in al.letters() {
        let qa: Vec<usize> = (0..a.states.len()).filter(|&q| a.next(q, x).is_some()).collect();
        let ctx = a.state_language(a.initial, &qa)?;
        let rhs = RecTraceLang::from_traces(&al, &[FoataWord::normalize(&al, &[x])])?;
        rules.push(RtlRule::with_rec_context(al.name(x), &ctx, eps.clone(), rhs)?);
    }
    let ctx = a.state_language(a.initial, &a.finals())?;
    rules.push(RtlRule::with_rec_context("f", &ctx, eps.clone(), eps)?);
    Ok(rules)
}

fn reach_rules(a: &ConcurrentAutomaton, label: &str, restrict: Option<&RecTraceLang>) -> Result<Vec<RtlRule>> {
    let all: Vec<usize> = (0..a.states.len()).collect();
    let eps = RecTraceLang::epsilon(&a.alphabet);
    let mut rules = Vec::new();
    for q in 0..a.states.len() {
        let ctx = a.state_language(a.initial, &[q])?;
        if ctx.is_empty() {
            continue;
        }
        let mut rhs = a.state_language(q, &all)?;
        if let Some(l) = restrict {
            rhs = rhs.intersect(l)?;
        }
        rules.push(RtlRule::with_rec_context(label, &ctx, eps.clone(), rhs)?);
    }
    Ok(rules)
}

fn unfolding_labels(a: &ConcurrentAutomaton, extra: &[&str]) -> Result<Vec<String>> {
    let mut labels: Vec<String> = a.alphabet.names().to_vec();
    labels.push("f".into());
    labels.push("*".into());
    labels.extend(extra.iter().map(|s| s.to_string()));
    let set: BTreeSet<&String> = labels.iter().collect();
    if set.len() != labels.len() {
        return Err(Error::Parse("letter names clash with the labels f and * or with language names".into()));
    }
    Ok(labels)
}

/// The rules `[L(G,i,Q_a)]([ε]→a[a])`, `[L(G,i,F)]([ε]→f[ε])` and
/// `[L(G,i,q)]([ε]→*[L(G,q,Q)])`, whose graph is the unfolding with its
/// reachability relation.
pub fn unfold_rtl(a: &ConcurrentAutomaton) -> Result<RtlSystem> {
    a.check()?;
    let labels = unfolding_labels(a, &[])?;
    let mut rules = base_rules(a)?;
    rules.extend(reach_rules(a, "*", None)?);
    let refs: Vec<&str> = labels.iter().map(String::as_str).collect();
    RtlSystem::new(&a.alphabet, &refs, rules)
}

/// [`unfold_rtl`] plus one edge family per named recognizable language:
/// `x →L y` when `y = x·u` with `[u] ∈ L` along the automaton.
pub fn unfold_rtl_rec(a: &ConcurrentAutomaton, langs: &[(&str, RecTraceLang)]) -> Result<RtlSystem> {
    a.check()?;
    let names: Vec<&str> = langs.iter().map(|l| l.0).collect();
    let labels = unfolding_labels(a, &names)?;
    let mut rules = base_rules(a)?;
    rules.extend(reach_rules(a, "*", None)?);
    for (name, lang) in langs {
        rules.extend(reach_rules(a, name, Some(lang))?);
    }
    let refs: Vec<&str> = labels.iter().map(String::as_str).collect();
    RtlSystem::new(&a.alphabet, &refs, rules)
}

/// Edges of the unfolding with reachability among traces of at most `n`
/// letters, computed by running the automaton.
pub fn direct_unfolding_edges(a: &ConcurrentAutomaton, n: usize) -> BTreeSet<Edge> {
    let al = a.alphabet.clone();
    let reachable: Vec<(FoataWord, usize)> =
        all_traces(&al, n).into_iter().filter_map(|t| a.run(&t).map(|q| (t, q))).collect();
    let mut out = BTreeSet::new();
    for (t, q) in &reachable {
        for x in al.letters() {
            if t.letter_count() < n && a.next(*q, x).is_some() {
                out.insert((t.clone(), al.name(x).to_string(), t.push(x)));
            }
        }
        if a.finals[*q] {
            out.insert((t.clone(), "f".to_string(), t.clone()));
        }
        for (s, _) in &reachable {
            if t.prefix_le(s) {
                out.insert((t.clone(), "*".to_string(), s.clone()));
            }
        }
    }
    out
}

/// Relations of the event structure of a recognizable language.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum EsQuery {
    Prime(FoataWord),
    Le(FoataWord, FoataWord),
    Conflict(FoataWord, FoataWord),
    Label(String, FoataWord),
}

impl EsQuery {
    /// `prime t`, `le t1 t2`, `conflict t1 t2` or `label a t`.
    pub fn parse(alphabet: &Arc<Alphabet>, text: &str) -> Result<Self> {
        let words: Vec<&str> = text.split_whitespace().collect();
        let tr = |s: &str| alphabet.parse_trace(s);
        match words.as_slice() {
            ["prime", t] => Ok(EsQuery::Prime(tr(t)?)),
            ["le" | "<=", t, u] => Ok(EsQuery::Le(tr(t)?, tr(u)?)),
            ["conflict" | "#", t, u] => Ok(EsQuery::Conflict(tr(t)?, tr(u)?)),
            ["label", a, t] => {
                alphabet.letter(a)?;
                Ok(EsQuery::Label(a.to_string(), tr(t)?))
            }
            _ => Err(Error::Parse(format!("cannot parse query `{text}`"))),
        }
    }
}

/// `x` has a predecessor and no two distinct ones.
pub fn prime_formula(alphabet: &Alphabet, x: &str) -> Formula {
    let pred = |y: &str| Formula::any(alphabet.names().iter().map(|a| Formula::edge(a, y, x)).collect());
    let y = format!("{x}_p");
    let z = format!("{x}_q");
    Formula::exists(&y, pred(&y)).and(
        Formula::exists(&y, Formula::exists(&z, Formula::all(vec![Formula::eq(&y, &z).not(), pred(&y), pred(&z)])))
            .not(),
    )
}

/// The defining formula of a query, with free variables `x` (and `y`).
pub fn es_formula(alphabet: &Alphabet, q: &EsQuery) -> Formula {
    let px = prime_formula(alphabet, "x");
    let py = prime_formula(alphabet, "y");
    match q {
        EsQuery::Prime(_) => px,
        EsQuery::Le(..) => Formula::all(vec![px, py, Formula::edge("*", "x", "y")]),
        EsQuery::Conflict(..) => {
            let pz = prime_formula(alphabet, "z");
            let common = Formula::exists("z", Formula::all(vec![pz, Formula::edge("*", "x", "z"), Formula::edge("*", "y", "z")]));
            Formula::all(vec![px, py, common.not()])
        }
        EsQuery::Label(a, _) => px.and(Formula::exists("y", Formula::edge(a, "y", "x"))),
    }
}

/// Presentation of the unfolding of the residual automaton of `rec`.
pub fn es_presentation(rec: &RecTraceLang) -> Result<AutomaticPresentation> {
    compile(&unfold_rtl(&ConcurrentAutomaton::residual(rec))?)
}

/// Answers a query through the first-order interpretation.
pub fn es_query(pres: &AutomaticPresentation, q: &EsQuery) -> Result<(Formula, bool)> {
    let f = es_formula(pres.alphabet(), q);
    let mut assignment = Vec::new();
    match q {
        EsQuery::Prime(t) | EsQuery::Label(_, t) => assignment.push(("x".to_string(), t.clone())),
        EsQuery::Le(t, u) | EsQuery::Conflict(t, u) => {
            assignment.push(("x".to_string(), t.clone()));
            assignment.push(("y".to_string(), u.clone()));
        }
    }
    let holds = check_assignment(&f, pres, &assignment)?;
    Ok((f, holds))
}
