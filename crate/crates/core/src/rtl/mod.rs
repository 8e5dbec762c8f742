//! Recognizable trace rewriting with level-regular contexts, compiled to
//! word-automatic presentations over Foata normal forms.

pub mod gen;
pub mod minsky;

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::sync::Arc;

use crate::automata::{foata_automaton, Dfa, Domain, LevelRegLang, Nfa, RecTraceLang, State};
use crate::error::{Error, Result};
use crate::limits::check_states;
use crate::sync::SyncRelation;
use crate::trace::{all_traces, Alphabet, FoataWord, LetterSet};

pub use minsky::{compile_minsky, run_machine, run_minsky, HaltVerdict, MinskyInstr, MinskyMachine};

/// Largest letter bound accepted by the brute-force oracle.
pub const MAX_BRUTE_LETTERS: usize = 10;

/// `context · (lhs →label rhs)`.
#[derive(Clone, Debug)]
pub struct RtlRule {
    pub label: String,
    pub context: LevelRegLang,
    pub lhs: RecTraceLang,
    pub rhs: RecTraceLang,
}

impl RtlRule {
    pub fn new(label: &str, context: LevelRegLang, lhs: RecTraceLang, rhs: RecTraceLang) -> Self {
        RtlRule { label: label.to_string(), context, lhs, rhs }
    }

    /// Rule whose context is given as a recognizable language.
    pub fn with_rec_context(label: &str, context: &RecTraceLang, lhs: RecTraceLang, rhs: RecTraceLang) -> Result<Self> {
        Ok(Self::new(label, context.foata_encoding()?, lhs, rhs))
    }

    /// Rule rewriting anywhere: the context is every trace.
    pub fn anywhere(label: &str, lhs: RecTraceLang, rhs: RecTraceLang) -> Self {
        let alphabet = lhs.alphabet().clone();
        Self::new(label, LevelRegLang::foata(&alphabet), lhs, rhs)
    }
}

#[derive(Clone, Debug)]
pub struct RtlSystem {
    alphabet: Arc<Alphabet>,
    labels: Vec<String>,
    rules: Vec<RtlRule>,
}

impl RtlSystem {
    pub fn new(alphabet: &Arc<Alphabet>, labels: &[&str], rules: Vec<RtlRule>) -> Result<Self> {
        let labels: Vec<String> = labels.iter().map(|s| s.to_string()).collect();
        let mut seen = BTreeSet::new();
        for l in &labels {
            if l.is_empty() || l.contains([',', '(', ')', ' ']) {
                return Err(Error::Parse(format!("`{l}` cannot be a rule label")));
            }
            if !seen.insert(l) {
                return Err(Error::Parse(format!("duplicate label `{l}`")));
            }
        }
        for r in &rules {
            if !seen.contains(&r.label) {
                return Err(Error::UnknownLabel(r.label.clone()));
            }
            for other in [r.context.alphabet(), r.lhs.alphabet(), r.rhs.alphabet()] {
                if **other != **alphabet {
                    return Err(Error::DomainMismatch(format!("rule `{}` uses another alphabet", r.label)));
                }
            }
        }
        Ok(RtlSystem { alphabet: alphabet.clone(), labels, rules })
    }

    pub fn alphabet(&self) -> &Arc<Alphabet> {
        &self.alphabet
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn rules(&self) -> &[RtlRule] {
        &self.rules
    }

    /// The grid: `[(a+b)*]([ε]→a[a])`, `[(a+b)*]([ε]→b[b])` and the
    /// diagonal loop `{a,b}*([ε]→f[ε])` with `a` and `b` independent.
    pub fn alexbis() -> Self {
        let al = Alphabet::new(&["a", "b"], &[("a", "b")]).expect("valid alphabet");
        let tr = |s: &str| al.parse_trace(s).expect("valid trace");
        let single = |s: &str| RecTraceLang::from_traces(&al, &[tr(s)]).expect("finite language");
        let eps = RecTraceLang::epsilon(&al);
        let full = RecTraceLang::full(&al);
        let diagonal = LevelRegLang::from_regex(&al, "{a,b}*").expect("valid regex");
        let rules = vec![
            RtlRule::with_rec_context("a", &full, eps.clone(), single("a")).expect("encodable"),
            RtlRule::with_rec_context("b", &full, eps.clone(), single("b")).expect("encodable"),
            RtlRule::new("f", diagonal, eps.clone(), eps),
        ];
        RtlSystem::new(&al, &["a", "b", "f"], rules).expect("valid system")
    }

    /// Three independent letters: `[(abc)*]([ε]→a[abc])`,
    /// `[(abc)*(ac)*]([b]→b[ε])` and `[(abc)*(ac)*]([ac]→c[ε])`.
    pub fn alex() -> Self {
        let al = Alphabet::new(&["a", "b", "c"], &[("a", "b"), ("a", "c"), ("b", "c")]).expect("valid alphabet");
        let tr = |s: &str| al.parse_trace(s).expect("valid trace");
        let single = |s: &str| RecTraceLang::from_traces(&al, &[tr(s)]).expect("finite language");
        let eps = RecTraceLang::epsilon(&al);
        let abc = LevelRegLang::from_regex(&al, "{a,b,c}*").expect("valid regex");
        let abc_ac = LevelRegLang::from_regex(&al, "{a,b,c}*{a,c}*").expect("valid regex");
        let rules = vec![
            RtlRule::new("a", abc, eps.clone(), single("abc")),
            RtlRule::new("b", abc_ac.clone(), single("b"), eps.clone()),
            RtlRule::new("c", abc_ac, single("ac"), eps),
        ];
        RtlSystem::new(&al, &["a", "b", "c"], rules).expect("valid system")
    }

    pub fn builtin(name: &str) -> Result<Self> {
        match name {
            "alexbis" | "grid" => Ok(Self::alexbis()),
            "alex" => Ok(Self::alex()),
            _ => Err(Error::Parse(format!("unknown built-in system `{name}`"))),
        }
    }
}

/// Vertex language plus one synchronized relation per label.
#[derive(Clone)]
pub struct AutomaticPresentation {
    alphabet: Arc<Alphabet>,
    labels: Vec<String>,
    vertices: Dfa,
    relations: BTreeMap<String, SyncRelation>,
}

pub type Edge = (FoataWord, String, FoataWord);

/// A finite piece of a rewriting graph.
#[derive(Clone, Debug, Default)]
pub struct GraphFragment {
    pub vertices: Vec<FoataWord>,
    pub edges: Vec<(usize, String, usize)>,
    /// Set when exploration stopped on the vertex budget.
    pub truncated: bool,
}

impl AutomaticPresentation {
    pub fn new(alphabet: &Arc<Alphabet>, relations: BTreeMap<String, SyncRelation>) -> Result<Self> {
        let universe = SyncRelation::universe(alphabet)?;
        for (l, r) in &relations {
            if !r.dfa().is_subset_of(universe.dfa())? {
                return Err(Error::Invariant(format!("relation `{l}` leaves the Foata convolutions")));
            }
        }
        Ok(AutomaticPresentation {
            alphabet: alphabet.clone(),
            labels: relations.keys().cloned().collect(),
            vertices: foata_automaton(alphabet),
            relations,
        })
    }

    pub fn alphabet(&self) -> &Arc<Alphabet> {
        &self.alphabet
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn vertices(&self) -> &Dfa {
        &self.vertices
    }

    pub fn has_label(&self, label: &str) -> bool {
        self.relations.contains_key(label)
    }

    pub fn relation(&self, label: &str) -> Result<&SyncRelation> {
        self.relations.get(label).ok_or_else(|| Error::UnknownLabel(label.to_string()))
    }

    pub fn relations(&self) -> &BTreeMap<String, SyncRelation> {
        &self.relations
    }

    /// Adds or replaces a relation.
    pub fn with_relation(mut self, label: &str, rel: SyncRelation) -> Result<Self> {
        if !rel.dfa().is_subset_of(SyncRelation::universe(&self.alphabet)?.dfa())? {
            return Err(Error::Invariant(format!("relation `{label}` leaves the Foata convolutions")));
        }
        self.relations.insert(label.to_string(), rel);
        self.labels = self.relations.keys().cloned().collect();
        Ok(self)
    }

    /// Edges whose endpoints both have at most `n` letters.
    pub fn edges_bounded(&self, n: usize) -> BTreeSet<Edge> {
        let mut out = BTreeSet::new();
        for s in all_traces(&self.alphabet, n) {
            for (l, r) in &self.relations {
                for t in r.images_bounded(&s, n) {
                    out.insert((s.clone(), l.clone(), t));
                }
            }
        }
        out
    }

    /// Exact set of `label`-successors of `t`; empty for unknown labels.
    pub fn successors(&self, t: &FoataWord, label: &str) -> Result<LevelRegLang> {
        let Some(rel) = self.relations.get(label) else {
            return LevelRegLang::new(Dfa::empty(Domain::steps(&self.alphabet)));
        };
        let single = LevelRegLang::from_traces(&self.alphabet, std::slice::from_ref(t))?;
        LevelRegLang::new(rel.restrict_left(single.dfa())?.project_right()?)
    }

    /// Breadth-first exploration from `start` following `labels` (all labels
    /// if empty), visiting successors of at most `max_letters` letters in
    /// length-lexicographic order, up to `max_vertices` vertices.
    pub fn bounded_bfs(&self, start: &FoataWord, labels: &[&str], max_vertices: usize, max_letters: usize) -> Result<GraphFragment> {
        let labels: Vec<String> = if labels.is_empty() {
            self.labels.clone()
        } else {
            labels.iter().map(|s| s.to_string()).collect()
        };
        for l in &labels {
            self.relation(l)?;
        }
        let mut frag = GraphFragment::default();
        let mut index: HashMap<FoataWord, usize> = HashMap::new();
        index.insert(start.clone(), 0);
        frag.vertices.push(start.clone());
        let mut queue = VecDeque::from([0usize]);
        while let Some(i) = queue.pop_front() {
            let v = frag.vertices[i].clone();
            for l in &labels {
                for t in self.relations[l].images_bounded(&v, max_letters) {
                    let j = match index.get(&t) {
                        Some(&j) => j,
                        None => {
                            if frag.vertices.len() >= max_vertices {
                                frag.truncated = true;
                                continue;
                            }
                            let j = frag.vertices.len();
                            index.insert(t.clone(), j);
                            frag.vertices.push(t);
                            queue.push_back(j);
                            j
                        }
                    };
                    frag.edges.push((i, l.clone(), j));
                }
            }
        }
        Ok(frag)
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Hash)]
struct MergeState {
    /// Context automaton state, `None` once the context has been read.
    ctx: Option<State>,
    q: State,
    r: State,
    /// Letters inserted so far on each output track during the context.
    sb: LetterSet,
    sc: LetterSet,
    lpad: bool,
    rpad: bool,
}

/// `{⟨uv⟩ ⊗ ⟨uw⟩ | u ∈ ctx, v ∈ lhs, w ∈ rhs}`.
///
/// While the context step `A` is read, each output column is `A ∪ X` where
/// `X` holds letters of `v` (or `w`) placed at that level. A context step is
/// only allowed when it is independent of every letter inserted before it,
/// otherwise the inserted letter would sit at a higher level in the normal
/// form of the product.
pub fn merge_relation(ctx: &LevelRegLang, lhs: &RecTraceLang, rhs: &RecTraceLang) -> Result<SyncRelation> {
    let alphabet = ctx.alphabet().clone();
    if **lhs.alphabet() != *alphabet || **rhs.alphabet() != *alphabet {
        return Err(Error::DomainMismatch("rule languages over different alphabets".into()));
    }
    let c = ctx.dfa();
    let v = lhs.step_saturate()?;
    let w = rhs.step_saturate()?;
    let nsteps = alphabet.num_steps();
    let domain = Domain::tracks(&alphabet, 2);
    // ext[A]: (code of X, code of A ∪ X) for X disjoint from A with A ∪ X a step
    let ext: Vec<Vec<(u32, u32)>> = (0..=nsteps)
        .map(|a| {
            let a_set = alphabet.step(a);
            (0..=nsteps)
                .filter_map(|x| {
                    let x_set = alphabet.step(x);
                    let u = a_set.union(x_set);
                    (x_set.intersection(a_set).is_empty() && alphabet.is_step(u))
                        .then(|| (x, alphabet.step_code(u).expect("step")))
                })
                .collect()
        })
        .collect();

    let start = MergeState {
        ctx: Some(c.initial),
        q: v.initial,
        r: w.initial,
        sb: LetterSet::EMPTY,
        sc: LetterSet::EMPTY,
        lpad: false,
        rpad: false,
    };
    let mut nfa = Nfa::new(domain.clone());
    let mut index: HashMap<MergeState, State> = HashMap::new();
    let mut todo = vec![start];
    index.insert(start, nfa.add_state(false));
    nfa.initial.push(0);
    fn intern(
        st: MergeState,
        index: &mut HashMap<MergeState, State>,
        nfa: &mut Nfa,
        todo: &mut Vec<MergeState>,
    ) -> Result<State> {
        if let Some(&id) = index.get(&st) {
            return Ok(id);
        }
        check_states(nfa.num_states() + 1, "merge automaton")?;
        let id = nfa.add_state(false);
        index.insert(st, id);
        todo.push(st);
        Ok(id)
    }
    while let Some(st) = todo.pop() {
        let id = index[&st];
        let mut tail_from = None;
        match st.ctx {
            Some(p) => {
                for &(a, p2) in &c.trans[p as usize] {
                    let a_set = alphabet.step(a);
                    if !alphabet.sets_independent(a_set, st.sb) || !alphabet.sets_independent(a_set, st.sc) {
                        continue;
                    }
                    for &(x, ax) in &ext[a as usize] {
                        let Some(q2) = v.next(st.q, x) else { continue };
                        for &(y, ay) in &ext[a as usize] {
                            let Some(r2) = w.next(st.r, y) else { continue };
                            let next = MergeState {
                                ctx: Some(p2),
                                q: q2,
                                r: r2,
                                sb: st.sb.union(alphabet.step(x)),
                                sc: st.sc.union(alphabet.step(y)),
                                lpad: false,
                                rpad: false,
                            };
                            let to = intern(next, &mut index, &mut nfa, &mut todo)?;
                            nfa.add_transition(id, domain.encode_tuple(&[ax, ay]), to);
                        }
                    }
                }
                if c.is_final(p) {
                    tail_from = Some(MergeState { ctx: None, sb: LetterSet::EMPTY, sc: LetterSet::EMPTY, ..st });
                    if v.is_final(st.q) && w.is_final(st.r) {
                        nfa.finals[id as usize] = true;
                    }
                }
            }
            None => {
                tail_from = Some(st);
                if v.is_final(st.q) && w.is_final(st.r) {
                    nfa.finals[id as usize] = true;
                }
            }
        }
        if let Some(t) = tail_from {
            let track = |dfa: &Dfa, q: State, padded: bool| -> Vec<(u32, State, bool)> {
                let mut opts = vec![(0, q, true)];
                if !padded {
                    opts.extend((1..=nsteps).filter_map(|s| dfa.next(q, s).map(|q2| (s, q2, false))));
                }
                opts
            };
            for (l, q2, lp) in track(&v, t.q, t.lpad) {
                for (r, r2, rp) in track(&w, t.r, t.rpad) {
                    if l == 0 && r == 0 {
                        continue;
                    }
                    let next = MergeState { ctx: None, q: q2, r: r2, sb: LetterSet::EMPTY, sc: LetterSet::EMPTY, lpad: lp, rpad: rp };
                    let to = intern(next, &mut index, &mut nfa, &mut todo)?;
                    nfa.add_transition(id, domain.encode_tuple(&[l, r]), to);
                }
            }
        }
    }
    let dfa = nfa.determinize()?.intersect(&domain.universe()?)?;
    Ok(SyncRelation::from_dfa_unchecked(dfa))
}

/// Compiles every rule and unions relations per label.
pub fn compile(sys: &RtlSystem) -> Result<AutomaticPresentation> {
    let mut relations: BTreeMap<String, SyncRelation> =
        sys.labels.iter().map(|l| (l.clone(), SyncRelation::empty(&sys.alphabet))).collect();
    for rule in &sys.rules {
        let rel = merge_relation(&rule.context, &rule.lhs, &rule.rhs)?;
        let entry = relations.get_mut(&rule.label).expect("labels validated");
        *entry = entry.union(&rel)?;
    }
    AutomaticPresentation::new(&sys.alphabet, relations)
}

/// Edges of the rewriting graph between traces of at most `n` letters, read
/// off the definition: every factorisation `s = u·v` of every small trace.
pub fn brute_force_edges(sys: &RtlSystem, n: usize) -> Result<BTreeSet<Edge>> {
    if n > MAX_BRUTE_LETTERS {
        return Err(Error::Resource { what: "brute-force letter bound".into(), limit: MAX_BRUTE_LETTERS });
    }
    let traces = all_traces(&sys.alphabet, n);
    let rhs_members: Vec<Vec<&FoataWord>> =
        sys.rules.iter().map(|r| traces.iter().filter(|t| r.rhs.contains(t)).collect()).collect();
    let mut out = BTreeSet::new();
    for s in &traces {
        for u in s.prefixes() {
            let v = u.left_divide(s).expect("prefix divides");
            for (rule, rhs) in sys.rules.iter().zip(&rhs_members) {
                if !rule.context.contains(&u) || !rule.lhs.contains(&v) {
                    continue;
                }
                for w in rhs {
                    if u.letter_count() + w.letter_count() <= n {
                        out.insert((s.clone(), rule.label.clone(), u.concat(w)?));
                    }
                }
            }
        }
    }
    Ok(out)
}

/// The step-word language `⟨s⟩ ∥ t` exactly as first stated: words
/// `B_1…B_m` over all steps (∅ included) with `A_i ⊆ B_i` for `i ≤ p` and
/// `(B_1∖A_1)…(B_p∖A_p)B_{p+1}…B_m` a linearization of `t`.
pub fn parallel(s: &FoataWord, t: &FoataWord) -> Result<Dfa> {
    let alphabet = s.alphabet().clone();
    let tl = RecTraceLang::from_traces(&alphabet, std::slice::from_ref(t))?.step_saturate()?;
    let nsteps = alphabet.num_steps();
    let a = s.steps();
    let p = a.len();
    let domain = Domain::steps_with_empty(&alphabet);
    let mut nfa = Nfa::new(domain);
    // state (i, q) numbered i * |tl| + q
    let nq = tl.num_states();
    for i in 0..=p {
        for q in 0..nq {
            nfa.add_state(i == p && tl.is_final(q as State));
        }
    }
    let id = |i: usize, q: State| (i * nq) as State + q;
    for i in 0..=p {
        for q in 0..nq as State {
            for b in 0..=nsteps {
                let b_set = alphabet.step(b);
                let (rest, i2) = if i < p {
                    if !a[i].is_subset(b_set) {
                        continue;
                    }
                    (b_set.difference(a[i]), i + 1)
                } else {
                    (b_set, p)
                };
                let code = alphabet.step_code(rest).expect("subset of a step");
                if let Some(q2) = tl.next(q, code) {
                    nfa.add_transition(id(i, q), b, id(i2, q2));
                }
            }
        }
    }
    nfa.initial.push(id(0, tl.initial));
    Ok(nfa.determinize()?.minimize())
}
