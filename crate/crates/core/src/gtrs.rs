//! Ground term rewriting: configuration graphs, graph trees and the
//! decomposition of a configuration graph by term size.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::fmt;

use crate::error::{Error, Result};

pub type RankedAlphabet = BTreeMap<String, usize>;

/// A position: the path of child indices (from 1) from the root.
pub type Position = Vec<usize>;

pub fn fmt_position(p: &[usize]) -> String {
    if p.is_empty() {
        "ε".into()
    } else {
        p.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(".")
    }
}

/// `p ⊑ q`.
pub fn position_le(p: &[usize], q: &[usize]) -> bool {
    q.starts_with(p)
}

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Term {
    pub sym: String,
    pub args: Vec<Term>,
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.sym)?;
        if !self.args.is_empty() {
            write!(f, "(")?;
            for (i, a) in self.args.iter().enumerate() {
                if i > 0 {
                    write!(f, ",")?;
                }
                write!(f, "{a}")?;
            }
            write!(f, ")")?;
        }
        Ok(())
    }
}

/// Size first, then the printed form.
impl Ord for Term {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        (self.size(), self.to_string()).cmp(&(other.size(), other.to_string()))
    }
}

impl PartialOrd for Term {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Term {
    pub fn leaf(sym: &str) -> Self {
        Term { sym: sym.into(), args: Vec::new() }
    }

    pub fn node(sym: &str, args: Vec<Term>) -> Self {
        Term { sym: sym.into(), args }
    }

    /// Prefix notation, e.g. `c(s1(bot1),bot2)`, checked against `ranked`.
    pub fn parse(ranked: &RankedAlphabet, text: &str) -> Result<Self> {
        let chars: Vec<char> = text.chars().filter(|c| !c.is_whitespace()).collect();
        let mut pos = 0;
        let t = parse_term(&chars, &mut pos)?;
        if pos != chars.len() {
            return Err(Error::Parse(format!("trailing input in term `{text}`")));
        }
        t.check(ranked)?;
        Ok(t)
    }

    fn check(&self, ranked: &RankedAlphabet) -> Result<()> {
        match ranked.get(&self.sym) {
            None => Err(Error::Parse(format!("unknown symbol `{}`", self.sym))),
            Some(&n) if n != self.args.len() => Err(Error::Parse(format!(
                "symbol `{}` has arity {n}, used with {} arguments",
                self.sym,
                self.args.len()
            ))),
            _ => self.args.iter().try_for_each(|a| a.check(ranked)),
        }
    }

    pub fn size(&self) -> usize {
        1 + self.args.iter().map(Term::size).sum::<usize>()
    }

    /// All positions in prefix order.
    pub fn positions(&self) -> Vec<Position> {
        let mut out = vec![Vec::new()];
        for (i, a) in self.args.iter().enumerate() {
            for mut p in a.positions() {
                p.insert(0, i + 1);
                out.push(p);
            }
        }
        out
    }

    pub fn subterm(&self, p: &[usize]) -> Option<&Term> {
        match p.split_first() {
            None => Some(self),
            Some((&i, rest)) => self.args.get(i.checked_sub(1)?)?.subterm(rest),
        }
    }

    /// `t⟦p←s⟧`.
    pub fn replace(&self, p: &[usize], s: &Term) -> Option<Term> {
        match p.split_first() {
            None => Some(s.clone()),
            Some((&i, rest)) => {
                let mut t = self.clone();
                let child = t.args.get_mut(i.checked_sub(1)?)?;
                *child = child.replace(rest, s)?;
                Some(t)
            }
        }
    }
}

fn parse_term(chars: &[char], pos: &mut usize) -> Result<Term> {
    let start = *pos;
    while *pos < chars.len() && !"(),".contains(chars[*pos]) {
        *pos += 1;
    }
    if start == *pos {
        return Err(Error::Parse("expected a symbol".into()));
    }
    let sym: String = chars[start..*pos].iter().collect();
    let mut args = Vec::new();
    if chars.get(*pos) == Some(&'(') {
        *pos += 1;
        loop {
            args.push(parse_term(chars, pos)?);
            match chars.get(*pos) {
                Some(',') => *pos += 1,
                Some(')') => {
                    *pos += 1;
                    break;
                }
                _ => return Err(Error::Parse("expected `,` or `)`".into())),
            }
        }
    }
    Ok(Term { sym, args })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GtrsRule {
    pub label: String,
    pub lhs: Term,
    pub rhs: Term,
}

#[derive(Clone, Debug)]
pub struct Gtrs {
    pub ranked: RankedAlphabet,
    pub labels: Vec<String>,
    pub rules: Vec<GtrsRule>,
    pub initial: Term,
}

/// Explicitly listed labelled graph.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Graph {
    pub vertices: Vec<String>,
    pub edges: Vec<(usize, String, usize)>,
}

impl Graph {
    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.vertices.iter().position(|v| v == name)
    }

    /// `0 →a 1 →a … →a n`.
    pub fn semi_line(n: usize) -> Self {
        Graph {
            vertices: (0..=n).map(|i| i.to_string()).collect(),
            edges: (0..n).map(|i| (i, "a".to_string(), i + 1)).collect(),
        }
    }

    /// DOT text; `frontier` vertices are double circles.
    pub fn to_dot(&self, frontier: &BTreeSet<usize>) -> String {
        let mut s = String::from("digraph G {\n  node [shape=circle];\n");
        for (i, v) in self.vertices.iter().enumerate() {
            let shape = if frontier.contains(&i) { ", shape=doublecircle" } else { "" };
            s.push_str(&format!("  n{i} [label=\"{}\"{shape}];\n", v.replace('"', "\\\"")));
        }
        for (a, l, b) in &self.edges {
            s.push_str(&format!("  n{a} -> n{b} [label=\"{}\"];\n", l.replace('"', "\\\"")));
        }
        s.push_str("}\n");
        s
    }
}

/// Fragment of a configuration graph reached by breadth-first search.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GtrsFragment {
    pub terms: Vec<Term>,
    pub edges: Vec<(usize, String, usize)>,
    /// Vertices with an out-edge leading outside the fragment.
    pub open: Vec<bool>,
    pub truncated: bool,
}

impl GtrsFragment {
    pub fn to_graph(&self) -> Graph {
        Graph { vertices: self.terms.iter().map(Term::to_string).collect(), edges: self.edges.clone() }
    }
}

impl Gtrs {
    pub fn new(ranked: RankedAlphabet, labels: &[&str], rules: Vec<(&str, &str, &str)>, initial: &str) -> Result<Self> {
        let labels: Vec<String> = labels.iter().map(|s| s.to_string()).collect();
        let mut parsed = Vec::new();
        for (l, lhs, rhs) in rules {
            if !labels.iter().any(|x| x == l) {
                return Err(Error::UnknownLabel(l.into()));
            }
            let lhs = Term::parse(&ranked, lhs)?;
            let rhs = Term::parse(&ranked, rhs)?;
            if lhs == rhs {
                return Err(Error::Invariant(format!("rule {lhs} →{l} {rhs} has equal sides")));
            }
            parsed.push(GtrsRule { label: l.into(), lhs, rhs });
        }
        let initial = Term::parse(&ranked, initial)?;
        Ok(Gtrs { ranked, labels, rules: parsed, initial })
    }

    /// The grid as two unary towers under a binary root.
    pub fn grid() -> Self {
        let ranked: RankedAlphabet =
            [("c", 2), ("s1", 1), ("bot1", 0), ("s2", 1), ("bot2", 0)].iter().map(|(s, n)| (s.to_string(), *n)).collect();
        Gtrs::new(ranked, &["a", "b"], vec![("a", "bot1", "s1(bot1)"), ("b", "bot2", "s2(bot2)")], "c(bot1,bot2)")
            .expect("valid system")
    }

    /// The semi-line tree: `a` extends the current copy, `c` opens a new one.
    pub fn semi_line_tree() -> Self {
        let ranked: RankedAlphabet = [("s", 1), ("h", 1), ("zt", 0)].iter().map(|(s, n)| (s.to_string(), *n)).collect();
        Gtrs::new(ranked, &["a", "c"], vec![("a", "zt", "s(zt)"), ("c", "zt", "h(zt)")], "zt").expect("valid system")
    }

    pub fn builtin(name: &str) -> Result<Self> {
        match name {
            "grid" => Ok(Self::grid()),
            "semi-line-tree" => Ok(Self::semi_line_tree()),
            _ => Err(Error::Parse(format!("unknown built-in GTRS `{name}`"))),
        }
    }

    /// Largest size change caused by one rule.
    pub fn delta(&self) -> usize {
        self.rules.iter().map(|r| r.lhs.size().abs_diff(r.rhs.size())).max().unwrap_or(0)
    }

    /// One-step rewrites of `t`, by position then rule order.
    pub fn rewrite_edges(&self, t: &Term) -> Vec<(Position, String, Term)> {
        let mut out = Vec::new();
        for p in t.positions() {
            let sub = t.subterm(&p).expect("position of t");
            for r in &self.rules {
                if *sub == r.lhs {
                    out.push((p.clone(), r.label.clone(), t.replace(&p, &r.rhs).expect("position of t")));
                }
            }
        }
        out
    }

    /// Positions incident to a rewriting of `t`, in either direction.
    pub fn incident_positions(&self, t: &Term) -> Vec<Position> {
        t.positions()
            .into_iter()
            .filter(|p| {
                let sub = t.subterm(p).expect("position of t");
                self.rules.iter().any(|r| *sub == r.lhs || *sub == r.rhs)
            })
            .collect()
    }

    /// Breadth-first exploration from the initial term, successors taken in
    /// size-then-text order, keeping at most `budget` vertices.
    pub fn explore(&self, budget: usize) -> GtrsFragment {
        let mut index: HashMap<Term, usize> = HashMap::new();
        let mut frag = GtrsFragment { terms: Vec::new(), edges: Vec::new(), open: Vec::new(), truncated: false };
        if budget == 0 {
            frag.truncated = true;
            return frag;
        }
        index.insert(self.initial.clone(), 0);
        frag.terms.push(self.initial.clone());
        frag.open.push(false);
        let mut queue = VecDeque::from([0usize]);
        while let Some(i) = queue.pop_front() {
            let mut succ = self.rewrite_edges(&frag.terms[i]);
            succ.sort_by(|x, y| (&x.2, &x.1).cmp(&(&y.2, &y.1)));
            for (_, label, t) in succ {
                let j = match index.get(&t) {
                    Some(&j) => j,
                    None if frag.terms.len() < budget => {
                        let j = frag.terms.len();
                        index.insert(t.clone(), j);
                        frag.terms.push(t);
                        frag.open.push(false);
                        queue.push_back(j);
                        j
                    }
                    None => {
                        frag.open[i] = true;
                        frag.truncated = true;
                        continue;
                    }
                };
                frag.edges.push((i, label, j));
            }
        }
        frag
    }

    /// The ⊑-least incident position, when incident positions form a chain.
    pub fn min_rewrite_position(&self, t: &Term) -> Option<Position> {
        let ps = self.incident_positions(t);
        if !chain(&ps) {
            return None;
        }
        ps.into_iter().min_by_key(Vec::len)
    }

    /// Whether all incident positions of `t` are pairwise ⊑-comparable.
    pub fn check_positions_comparable(&self, t: &Term) -> bool {
        chain(&self.incident_positions(t))
    }

    /// Components of the explored graph minus `G_n`, with their frontiers.
    pub fn decompose(&self, n: usize, budget: usize) -> Decomposition {
        let frag = self.explore(budget);
        decompose_fragment(&frag, n)
    }
}

fn chain(ps: &[Position]) -> bool {
    ps.iter().all(|p| ps.iter().all(|q| position_le(p, q) || position_le(q, p)))
}

/// `tree(G, p0)` cut at copy-nesting `depth`: vertices are copy words
/// `p_1…p_k` with `1 ≤ k ≤ depth + 1`, written `p_1/…/p_k`; `c` edges leave
/// words of length at most `depth`. The empty word is left out.
pub fn tree_of(g: &Graph, p0: &str, depth: usize) -> Result<Graph> {
    let root = g.index_of(p0).ok_or_else(|| Error::Parse(format!("vertex `{p0}` not in graph")))?;
    let n = g.vertices.len();
    check_tree_size(n, depth)?;
    let mut words: Vec<Vec<usize>> = (0..n).map(|p| vec![p]).collect();
    let mut layer = words.clone();
    for _ in 0..depth {
        let mut next = Vec::new();
        for w in &layer {
            for p in 0..n {
                let mut v = w.clone();
                v.push(p);
                next.push(v);
            }
        }
        words.extend(next.iter().cloned());
        layer = next;
    }
    let index: HashMap<Vec<usize>, usize> = words.iter().enumerate().map(|(i, w)| (w.clone(), i)).collect();
    let mut edges = Vec::new();
    for (i, w) in words.iter().enumerate() {
        let (last, prefix) = w.split_last().expect("nonempty copy word");
        for (p, l, q) in &g.edges {
            if p == last {
                let mut v = prefix.to_vec();
                v.push(*q);
                edges.push((i, l.clone(), index[&v]));
            }
        }
        if w.len() <= depth {
            let mut v = w.clone();
            v.push(root);
            edges.push((i, "c".to_string(), index[&v]));
        }
    }
    let vertices = words
        .iter()
        .map(|w| w.iter().map(|&p| g.vertices[p].as_str()).collect::<Vec<_>>().join("/"))
        .collect();
    Ok(Graph { vertices, edges })
}

fn check_tree_size(n: usize, depth: usize) -> Result<()> {
    const LIMIT: usize = 200_000;
    let mut total = 0usize;
    let mut layer = n;
    for _ in 0..=depth {
        total = total.saturating_add(layer);
        layer = layer.saturating_mul(n);
    }
    if total > LIMIT {
        return Err(Error::Resource { what: "graph tree vertices".into(), limit: LIMIT });
    }
    Ok(())
}

#[derive(Clone, Debug)]
pub struct Component {
    /// Fragment vertex indices.
    pub vertices: Vec<usize>,
    pub frontier: Vec<usize>,
    pub signature: String,
    /// Exact canonical form (otherwise a colour-refinement hash).
    pub exact: bool,
    /// Touches a vertex whose out-edges were cut by the budget.
    pub truncated: bool,
}

#[derive(Clone, Debug)]
pub struct Decomposition {
    pub n: usize,
    pub fragment: GtrsFragment,
    pub components: Vec<Component>,
}

impl Decomposition {
    /// Number of distinct signatures among components not cut by the budget.
    pub fn signature_count(&self) -> usize {
        self.components.iter().filter(|c| !c.truncated).map(|c| &c.signature).collect::<BTreeSet<_>>().len()
    }
}

/// Largest component handled by the exact canonical labelling.
pub const EXACT_CANON_LIMIT: usize = 12;

pub fn decompose_fragment(frag: &GtrsFragment, n: usize) -> Decomposition {
    let size: Vec<usize> = frag.terms.iter().map(Term::size).collect();
    let (small, rest): (Vec<_>, Vec<_>) = frag.edges.iter().partition(|(s, _, t)| size[*s] < n || size[*t] < n);
    let touches_small: BTreeSet<usize> = small.iter().flat_map(|(s, _, t)| [*s, *t]).collect();
    // union-find over the remaining edges
    let mut parent: Vec<usize> = (0..frag.terms.len()).collect();
    fn find(parent: &mut [usize], x: usize) -> usize {
        let mut r = x;
        while parent[r] != r {
            r = parent[r];
        }
        let mut y = x;
        while parent[y] != r {
            let next = parent[y];
            parent[y] = r;
            y = next;
        }
        r
    }
    let mut in_rest = vec![false; frag.terms.len()];
    for (s, _, t) in &rest {
        in_rest[*s] = true;
        in_rest[*t] = true;
        let (a, b) = (find(&mut parent, *s), find(&mut parent, *t));
        if a != b {
            parent[a.max(b)] = a.min(b);
        }
    }
    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for v in 0..frag.terms.len() {
        if in_rest[v] {
            let r = find(&mut parent, v);
            groups.entry(r).or_default().push(v);
        }
    }
    let components = groups
        .into_values()
        .map(|vertices| {
            let set: BTreeSet<usize> = vertices.iter().copied().collect();
            let frontier: Vec<usize> = vertices.iter().copied().filter(|v| touches_small.contains(v)).collect();
            let local: HashMap<usize, usize> = vertices.iter().enumerate().map(|(i, &v)| (v, i)).collect();
            let edges: Vec<(usize, String, usize)> = rest
                .iter()
                .filter(|(s, _, _)| set.contains(s))
                .map(|(s, l, t)| (local[s], l.clone(), local[t]))
                .collect();
            let marks: Vec<bool> = vertices.iter().map(|v| touches_small.contains(v)).collect();
            let (signature, exact) = canonical_signature(vertices.len(), &edges, &marks);
            let truncated = vertices.iter().any(|&v| frag.open[v]);
            Component { vertices, frontier, signature, exact, truncated }
        })
        .collect();
    Decomposition { n, fragment: frag.clone(), components }
}

/// Canonical form of a labelled digraph with marked vertices: exact by
/// individualization and refinement up to [`EXACT_CANON_LIMIT`] vertices,
/// a colour-refinement digest beyond.
pub fn canonical_signature(n: usize, edges: &[(usize, String, usize)], marks: &[bool]) -> (String, bool) {
    let initial: Vec<u32> = marks.iter().map(|&m| m as u32).collect();
    let colors = refine(n, edges, initial);
    if n > EXACT_CANON_LIMIT {
        let mut hist: BTreeMap<u32, usize> = BTreeMap::new();
        for c in &colors {
            *hist.entry(*c).or_default() += 1;
        }
        let body: Vec<String> = hist.iter().map(|(c, k)| format!("{c}x{k}")).collect();
        return (format!("wl:{n}:{}:{}", edges.len(), body.join(",")), false);
    }
    let mut best: Option<String> = None;
    search(n, edges, marks, colors, &mut best);
    (best.expect("search visits a leaf"), true)
}

/// Colour refinement; colours are ranks of signatures, so the result does
/// not depend on vertex numbering.
fn refine(n: usize, edges: &[(usize, String, usize)], mut colors: Vec<u32>) -> Vec<u32> {
    loop {
        let sigs: Vec<(u32, Vec<(bool, &str, u32)>)> = (0..n)
            .map(|v| {
                let mut nb: Vec<(bool, &str, u32)> = edges
                    .iter()
                    .filter_map(|(s, l, t)| {
                        if *s == v {
                            Some((true, l.as_str(), colors[*t]))
                        } else if *t == v {
                            Some((false, l.as_str(), colors[*s]))
                        } else {
                            None
                        }
                    })
                    .collect();
                nb.sort();
                (colors[v], nb)
            })
            .collect();
        let mut distinct: Vec<&(u32, Vec<(bool, &str, u32)>)> = sigs.iter().collect();
        distinct.sort();
        distinct.dedup();
        let next: Vec<u32> = sigs.iter().map(|s| distinct.binary_search(&s).expect("present") as u32).collect();
        let old_classes = colors.iter().collect::<BTreeSet<_>>().len();
        let new_classes = distinct.len();
        colors = next;
        if new_classes == old_classes {
            return colors;
        }
    }
}

fn search(n: usize, edges: &[(usize, String, usize)], marks: &[bool], colors: Vec<u32>, best: &mut Option<String>) {
    let mut count: BTreeMap<u32, usize> = BTreeMap::new();
    for c in &colors {
        *count.entry(*c).or_default() += 1;
    }
    let Some((&cell, _)) = count.iter().find(|(_, &k)| k > 1) else {
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by_key(|&v| colors[v]);
        let mut pos = vec![0; n];
        for (i, &v) in order.iter().enumerate() {
            pos[v] = i;
        }
        let mut es: Vec<(usize, &str, usize)> = edges.iter().map(|(s, l, t)| (pos[*s], l.as_str(), pos[*t])).collect();
        es.sort();
        let m: String = order.iter().map(|&v| if marks[v] { '1' } else { '0' }).collect();
        let body: Vec<String> = es.iter().map(|(s, l, t)| format!("{s}-{l}-{t}")).collect();
        let form = format!("{n}|{m}|{}", body.join(" "));
        if best.as_ref().is_none_or(|b| form < *b) {
            *best = Some(form);
        }
        return;
    };
    for v in 0..n {
        if colors[v] != cell {
            continue;
        }
        let split: Vec<u32> = colors.iter().enumerate().map(|(u, &c)| 2 * c + u32::from(u != v)).collect();
        search(n, edges, marks, refine(n, edges, split), best);
    }
}
