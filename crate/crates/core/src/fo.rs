//! First-order logic over automatic presentations.
//!
//! A formula with free variables `x_1 … x_k` compiles to an automaton over
//! k-track convolutions of Foata words accepting exactly the satisfying
//! assignments. Each track pads independently at its own tail.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::sync::Arc;

use crate::automata::{foata_automaton, Dfa, Domain};
use crate::error::{Error, Result};
use crate::rtl::AutomaticPresentation;
use crate::sync::{convolution, deconvolve, insert_track, permute_tracks, project_out, steps_to_single_track, SyncRelation};
use crate::trace::{Alphabet, FoataWord};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Formula {
    Edge(String, String, String),
    Eq(String, String),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Exists(String, Box<Formula>),
    Forall(String, Box<Formula>),
}

impl Formula {
    pub fn edge(label: &str, x: &str, y: &str) -> Self {
        Formula::Edge(label.into(), x.into(), y.into())
    }

    pub fn eq(x: &str, y: &str) -> Self {
        Formula::Eq(x.into(), y.into())
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(self) -> Self {
        Formula::Not(Box::new(self))
    }

    pub fn and(self, other: Formula) -> Self {
        Formula::And(Box::new(self), Box::new(other))
    }

    pub fn or(self, other: Formula) -> Self {
        Formula::Or(Box::new(self), Box::new(other))
    }

    pub fn implies(self, other: Formula) -> Self {
        Formula::Implies(Box::new(self), Box::new(other))
    }

    pub fn exists(x: &str, body: Formula) -> Self {
        Formula::Exists(x.into(), Box::new(body))
    }

    pub fn forall(x: &str, body: Formula) -> Self {
        Formula::Forall(x.into(), Box::new(body))
    }

    /// Conjunction of a nonempty list.
    pub fn all(parts: Vec<Formula>) -> Self {
        parts.into_iter().reduce(Formula::and).expect("nonempty conjunction")
    }

    /// Disjunction of a nonempty list.
    pub fn any(parts: Vec<Formula>) -> Self {
        parts.into_iter().reduce(Formula::or).expect("nonempty disjunction")
    }

    pub fn parse(text: &str) -> Result<Self> {
        let tokens = tokenize(text)?;
        let mut p = Parser { tokens, pos: 0 };
        let f = p.implication()?;
        if p.pos != p.tokens.len() {
            return Err(Error::Parse(format!("unexpected `{}` in formula", p.tokens[p.pos])));
        }
        Ok(f)
    }

    pub fn free_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_free(&mut Vec::new(), &mut out);
        out
    }

    fn collect_free(&self, bound: &mut Vec<String>, out: &mut BTreeSet<String>) {
        let mut add = |v: &String, bound: &Vec<String>| {
            if !bound.contains(v) {
                out.insert(v.clone());
            }
        };
        match self {
            Formula::Edge(_, x, y) | Formula::Eq(x, y) => {
                add(x, bound);
                add(y, bound);
            }
            Formula::Not(f) => f.collect_free(bound, out),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
                a.collect_free(bound, out);
                b.collect_free(bound, out);
            }
            Formula::Exists(x, f) | Formula::Forall(x, f) => {
                bound.push(x.clone());
                f.collect_free(bound, out);
                bound.pop();
            }
        }
    }

    pub fn labels(&self) -> BTreeSet<String> {
        match self {
            Formula::Edge(l, _, _) => BTreeSet::from([l.clone()]),
            Formula::Eq(..) => BTreeSet::new(),
            Formula::Not(f) | Formula::Exists(_, f) | Formula::Forall(_, f) => f.labels(),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
                let mut s = a.labels();
                s.extend(b.labels());
                s
            }
        }
    }

    pub fn quantifier_depth(&self) -> usize {
        match self {
            Formula::Edge(..) | Formula::Eq(..) => 0,
            Formula::Not(f) => f.quantifier_depth(),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
                a.quantifier_depth().max(b.quantifier_depth())
            }
            Formula::Exists(_, f) | Formula::Forall(_, f) => 1 + f.quantifier_depth(),
        }
    }

    /// Renames bound variables so that no name is bound twice or both free
    /// and bound.
    pub fn rename_apart(&self) -> Formula {
        let mut used: BTreeSet<String> = self.free_vars();
        let mut env: HashMap<String, String> = HashMap::new();
        self.rename(&mut used, &mut env)
    }

    fn rename(&self, used: &mut BTreeSet<String>, env: &mut HashMap<String, String>) -> Formula {
        let v = |x: &String, env: &HashMap<String, String>| env.get(x).cloned().unwrap_or_else(|| x.clone());
        match self {
            Formula::Edge(l, x, y) => Formula::Edge(l.clone(), v(x, env), v(y, env)),
            Formula::Eq(x, y) => Formula::Eq(v(x, env), v(y, env)),
            Formula::Not(f) => f.rename(used, env).not(),
            Formula::And(a, b) => a.rename(used, env).and(b.rename(used, env)),
            Formula::Or(a, b) => a.rename(used, env).or(b.rename(used, env)),
            Formula::Implies(a, b) => a.rename(used, env).implies(b.rename(used, env)),
            Formula::Exists(x, f) | Formula::Forall(x, f) => {
                let mut fresh = x.clone();
                let mut i = 1;
                while used.contains(&fresh) {
                    fresh = format!("{x}_{i}");
                    i += 1;
                }
                used.insert(fresh.clone());
                let saved = env.insert(x.clone(), fresh.clone());
                let body = f.rename(used, env);
                match saved {
                    Some(s) => env.insert(x.clone(), s),
                    None => env.remove(x),
                };
                if matches!(self, Formula::Exists(..)) {
                    Formula::Exists(fresh, Box::new(body))
                } else {
                    Formula::Forall(fresh, Box::new(body))
                }
            }
        }
    }

    /// Variables in order of first occurrence.
    pub fn variable_order(&self) -> Vec<String> {
        fn walk(f: &Formula, out: &mut Vec<String>) {
            let mut push = |x: &String| {
                if !out.contains(x) {
                    out.push(x.clone());
                }
            };
            match f {
                Formula::Edge(_, x, y) | Formula::Eq(x, y) => {
                    push(x);
                    push(y);
                }
                Formula::Exists(x, b) | Formula::Forall(x, b) => {
                    push(x);
                    walk(b, out);
                }
                Formula::Not(b) => walk(b, out),
                Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
                    walk(a, out);
                    walk(b, out);
                }
            }
        }
        let mut out = Vec::new();
        walk(self, &mut out);
        out
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formula::Edge(l, x, y) => write!(f, "edge({l},{x},{y})"),
            Formula::Eq(x, y) => write!(f, "{x} = {y}"),
            Formula::Not(a) => write!(f, "!({a})"),
            Formula::And(a, b) => write!(f, "({a} & {b})"),
            Formula::Or(a, b) => write!(f, "({a} | {b})"),
            Formula::Implies(a, b) => write!(f, "({a} -> {b})"),
            Formula::Exists(x, a) => write!(f, "(E {x}. {a})"),
            Formula::Forall(x, a) => write!(f, "(A {x}. {a})"),
        }
    }
}

fn tokenize(text: &str) -> Result<Vec<String>> {
    let mut out = Vec::new();
    let chars: Vec<char> = text.chars().collect();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
        } else if c == '-' && chars.get(i + 1) == Some(&'>') {
            out.push("->".into());
            i += 2;
        } else if "()!&|=,.".contains(c) {
            out.push(c.to_string());
            i += 1;
        } else {
            let start = i;
            while i < chars.len() && !chars[i].is_whitespace() && !"()!&|=,.".contains(chars[i]) {
                if chars[i] == '-' && chars.get(i + 1) == Some(&'>') {
                    break;
                }
                i += 1;
            }
            out.push(chars[start..i].iter().collect());
        }
    }
    Ok(out)
}

struct Parser {
    tokens: Vec<String>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> Option<&str> {
        self.tokens.get(self.pos).map(String::as_str)
    }

    fn next(&mut self) -> Result<String> {
        let t = self.tokens.get(self.pos).cloned().ok_or_else(|| Error::Parse("unexpected end of formula".into()))?;
        self.pos += 1;
        Ok(t)
    }

    fn expect(&mut self, tok: &str) -> Result<()> {
        let t = self.next()?;
        if t == tok {
            Ok(())
        } else {
            Err(Error::Parse(format!("expected `{tok}`, found `{t}`")))
        }
    }

    fn var(&mut self) -> Result<String> {
        let t = self.next()?;
        let ok = t.chars().next().is_some_and(|c| c.is_alphabetic() || c == '_')
            && t.chars().all(|c| c.is_alphanumeric() || c == '_' || c == '\'');
        if ok {
            Ok(t)
        } else {
            Err(Error::Parse(format!("`{t}` is not a variable")))
        }
    }

    fn implication(&mut self) -> Result<Formula> {
        let left = self.disjunction()?;
        if self.peek() == Some("->") {
            self.pos += 1;
            let right = self.implication()?;
            return Ok(left.implies(right));
        }
        Ok(left)
    }

    fn disjunction(&mut self) -> Result<Formula> {
        let mut left = self.conjunction()?;
        while self.peek() == Some("|") {
            self.pos += 1;
            left = left.or(self.conjunction()?);
        }
        Ok(left)
    }

    fn conjunction(&mut self) -> Result<Formula> {
        let mut left = self.unary()?;
        while self.peek() == Some("&") {
            self.pos += 1;
            left = left.and(self.unary()?);
        }
        Ok(left)
    }

    fn is_quantifier(&self) -> bool {
        matches!(self.peek(), Some("E" | "A")) && self.tokens.get(self.pos + 2).map(String::as_str) == Some(".")
    }

    fn unary(&mut self) -> Result<Formula> {
        match self.peek() {
            Some("!") => {
                self.pos += 1;
                Ok(self.unary()?.not())
            }
            Some("(") => {
                self.pos += 1;
                let f = self.implication()?;
                self.expect(")")?;
                Ok(f)
            }
            Some("edge") if self.tokens.get(self.pos + 1).map(String::as_str) == Some("(") => {
                self.pos += 2;
                let label = self.next()?;
                if matches!(label.as_str(), "," | ")" | "(") {
                    return Err(Error::Parse("missing edge label".into()));
                }
                self.expect(",")?;
                let x = self.var()?;
                self.expect(",")?;
                let y = self.var()?;
                self.expect(")")?;
                Ok(Formula::Edge(label, x, y))
            }
            Some(_) if self.is_quantifier() => {
                let q = self.next()?;
                let x = self.var()?;
                self.expect(".")?;
                let body = self.implication()?;
                Ok(if q == "E" { Formula::exists(&x, body) } else { Formula::forall(&x, body) })
            }
            Some(_) => {
                let x = self.var()?;
                self.expect("=")?;
                let y = self.var()?;
                Ok(Formula::Eq(x, y))
            }
            None => Err(Error::Parse("unexpected end of formula".into())),
        }
    }
}

/// Automaton accepting the satisfying assignments of a formula, one track
/// per free variable.
#[derive(Clone, Debug)]
pub struct AssignmentAutomaton {
    pub vars: Vec<String>,
    pub dfa: Dfa,
}

impl AssignmentAutomaton {
    pub fn accepts(&self, assignment: &[(String, FoataWord)]) -> Result<bool> {
        let mut traces = Vec::with_capacity(self.vars.len());
        for v in &self.vars {
            let t = assignment
                .iter()
                .find(|(n, _)| n == v)
                .map(|(_, t)| t)
                .ok_or_else(|| Error::Invariant(format!("variable `{v}` unassigned")))?;
            traces.push(t);
        }
        Ok(self.dfa.accepts(&convolution(self.dfa.domain.alphabet(), &traces)))
    }
}

struct Compiler<'a> {
    pres: &'a AutomaticPresentation,
    alphabet: Arc<Alphabet>,
    rank: HashMap<String, usize>,
    universes: HashMap<usize, Dfa>,
}

impl Compiler<'_> {
    fn universe(&mut self, k: usize) -> Result<Dfa> {
        if let Some(u) = self.universes.get(&k) {
            return Ok(u.clone());
        }
        let u = Domain::tracks(&self.alphabet, k).universe()?.minimize();
        self.universes.insert(k, u.clone());
        Ok(u)
    }

    fn relation(&self, label: &str) -> Result<&SyncRelation> {
        match self.pres.relation(label) {
            Err(Error::UnknownLabel(_)) if label == "*" => Err(Error::ReachabilityNotAutomatic),
            r => r,
        }
    }

    /// Adds tracks so that `from` (sorted by rank) becomes `to`.
    fn widen(&self, dfa: Dfa, from: &[String], to: &[String]) -> Result<Dfa> {
        let mut dfa = dfa;
        let mut have: Vec<String> = from.to_vec();
        for (j, v) in to.iter().enumerate() {
            if have.get(j) != Some(v) {
                dfa = insert_track(&dfa, j)?;
                have.insert(j, v.clone());
            }
        }
        Ok(dfa)
    }

    fn merge_vars(&self, a: &[String], b: &[String]) -> Vec<String> {
        let mut all: Vec<String> = a.iter().chain(b).cloned().collect::<BTreeSet<_>>().into_iter().collect();
        all.sort_by_key(|v| self.rank[v]);
        all
    }

    fn compile(&mut self, f: &Formula) -> Result<(Vec<String>, Dfa)> {
        self.compile_inner(f).map_err(|e| match e {
            Error::Resource { what, limit } if !what.contains(" in `") => {
                Error::Resource { what: format!("{what} in `{f}`"), limit }
            }
            e => e,
        })
    }

    fn compile_inner(&mut self, f: &Formula) -> Result<(Vec<String>, Dfa)> {
        match f {
            Formula::Edge(l, x, y) => {
                let rel = self.relation(l)?.dfa().clone();
                if x == y {
                    let diag = SyncRelation::identity(&foata_automaton(&self.alphabet))?;
                    let d = rel.intersect(diag.dfa())?;
                    return Ok((vec![x.clone()], project_out(&d, 1)?));
                }
                if self.rank[x] < self.rank[y] {
                    Ok((vec![x.clone(), y.clone()], rel))
                } else {
                    Ok((vec![y.clone(), x.clone()], permute_tracks(&rel, &[1, 0])?))
                }
            }
            Formula::Eq(x, y) => {
                let foata = foata_automaton(&self.alphabet);
                if x == y {
                    return Ok((vec![x.clone()], steps_to_single_track(&foata)?.minimize()));
                }
                let mut vars = vec![x.clone(), y.clone()];
                vars.sort_by_key(|v| self.rank[v]);
                Ok((vars, SyncRelation::identity(&foata)?.dfa().clone()))
            }
            Formula::Not(a) => {
                let (vars, d) = self.compile(a)?;
                let u = self.universe(vars.len())?;
                Ok((vars, d.complement_within(&u)?))
            }
            Formula::And(a, b) | Formula::Or(a, b) => {
                let (va, da) = self.compile(a)?;
                let (vb, db) = self.compile(b)?;
                let vars = self.merge_vars(&va, &vb);
                let da = self.widen(da, &va, &vars)?;
                let db = self.widen(db, &vb, &vars)?;
                let d = if matches!(f, Formula::And(..)) { da.intersect(&db)? } else { da.union(&db)? };
                Ok((vars, d))
            }
            Formula::Implies(a, b) => self.compile(&Formula::Or(Box::new(Formula::Not(a.clone())), b.clone())),
            Formula::Exists(x, a) => {
                let (vars, d) = self.compile(a)?;
                match vars.iter().position(|v| v == x) {
                    Some(j) => {
                        let mut rest = vars.clone();
                        rest.remove(j);
                        Ok((rest, project_out(&d, j)?))
                    }
                    // the domain of traces is nonempty
                    None => Ok((vars, d)),
                }
            }
            Formula::Forall(x, a) => {
                let g = Formula::Not(Box::new(Formula::Exists(x.clone(), Box::new(Formula::Not(a.clone())))));
                self.compile(&g)
            }
        }
    }
}

/// Compiles `f` over `pres`. Tracks follow the first-occurrence order of the
/// free variables after renaming apart.
pub fn compile_formula(f: &Formula, pres: &AutomaticPresentation) -> Result<AssignmentAutomaton> {
    let g = f.rename_apart();
    let order = g.variable_order();
    let rank: HashMap<String, usize> = order.iter().enumerate().map(|(i, v)| (v.clone(), i)).collect();
    let mut c = Compiler { pres, alphabet: pres.alphabet().clone(), rank, universes: HashMap::new() };
    let (vars, dfa) = c.compile(&g)?;
    Ok(AssignmentAutomaton { vars, dfa: dfa.minimize() })
}

/// Truth value of a sentence.
pub fn decide(sentence: &Formula, pres: &AutomaticPresentation) -> Result<bool> {
    let free = sentence.free_vars();
    if !free.is_empty() {
        return Err(Error::Invariant(format!(
            "not a sentence: free variables {}",
            free.into_iter().collect::<Vec<_>>().join(", ")
        )));
    }
    Ok(compile_formula(sentence, pres)?.dfa.accepts(&[]))
}

/// Length-lexicographically least satisfying assignment.
pub fn witness(f: &Formula, pres: &AutomaticPresentation) -> Result<Option<Vec<(String, FoataWord)>>> {
    let a = compile_formula(f, pres)?;
    let Some(word) = a.dfa.shortest_word() else { return Ok(None) };
    let traces = deconvolve(&a.dfa.domain, &word)?;
    Ok(Some(a.vars.into_iter().zip(traces).collect()))
}

/// Whether the assignment satisfies `f`.
pub fn check_assignment(f: &Formula, pres: &AutomaticPresentation, assignment: &[(String, FoataWord)]) -> Result<bool> {
    compile_formula(f, pres)?.accepts(assignment)
}

/// Direct evaluation over a finite structure, for cross-checking.
pub fn naive_eval<V: Clone + PartialEq>(
    f: &Formula,
    domain: &[V],
    edge: &dyn Fn(&str, &V, &V) -> bool,
    env: &mut Vec<(String, V)>,
) -> bool {
    let get = |x: &str, env: &Vec<(String, V)>| -> V {
        env.iter().rev().find(|(n, _)| n == x).map(|(_, v)| v.clone()).expect("free variable bound in env")
    };
    match f {
        Formula::Edge(l, x, y) => edge(l, &get(x, env), &get(y, env)),
        Formula::Eq(x, y) => get(x, env) == get(y, env),
        Formula::Not(a) => !naive_eval(a, domain, edge, env),
        Formula::And(a, b) => naive_eval(a, domain, edge, env) && naive_eval(b, domain, edge, env),
        Formula::Or(a, b) => naive_eval(a, domain, edge, env) || naive_eval(b, domain, edge, env),
        Formula::Implies(a, b) => !naive_eval(a, domain, edge, env) || naive_eval(b, domain, edge, env),
        Formula::Exists(x, a) | Formula::Forall(x, a) => {
            let want = matches!(f, Formula::Exists(..));
            for v in domain {
                env.push((x.clone(), v.clone()));
                let r = naive_eval(a, domain, edge, env);
                env.pop();
                if r == want {
                    return want;
                }
            }
            !want
        }
    }
}
