//! JSON documents for every artifact, and presentation bundles on disk.

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::Arc;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::automata::{Dfa, Domain, LevelRegLang, RecTraceLang, State, Sym};
use crate::error::{Error, Result};
use crate::gtrs::{Graph, Gtrs, RankedAlphabet};
use crate::rtl::{AutomaticPresentation, RtlRule, RtlSystem};
use crate::sync::SyncRelation;
use crate::trace::{Alphabet, LetterSet};
use crate::unfolding::ConcurrentAutomaton;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AlphabetDoc {
    pub letters: Vec<String>,
    #[serde(default)]
    pub independent: Vec<(String, String)>,
}

impl AlphabetDoc {
    pub fn build(&self) -> Result<Arc<Alphabet>> {
        Alphabet::new(&self.letters, &self.independent)
    }

    pub fn of(alphabet: &Alphabet) -> Self {
        let independent = alphabet
            .independent_pairs()
            .into_iter()
            .map(|(a, b)| (alphabet.name(a).to_string(), alphabet.name(b).to_string()))
            .collect();
        AlphabetDoc { letters: alphabet.names().to_vec(), independent }
    }
}

/// Transitions carry symbols as JSON values: a letter name, an array of
/// letter names for a step, or an array of steps (`null` for padding) for a
/// track tuple.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AutomatonDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alphabet: Option<AlphabetDoc>,
    pub domain: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub arity: Option<usize>,
    pub states: Vec<String>,
    pub initial: String,
    pub finals: Vec<String>,
    pub transitions: Vec<(String, Value, String)>,
}

fn step_value(alphabet: &Alphabet, s: LetterSet) -> Value {
    Value::Array(s.iter().map(|a| Value::String(alphabet.name(a).to_string())).collect())
}

fn sym_value(domain: &Domain, sym: Sym) -> Value {
    let alphabet = domain.alphabet();
    match domain {
        Domain::Letters(_) => Value::String(alphabet.name(sym as u8).to_string()),
        Domain::Steps { .. } => step_value(alphabet, alphabet.step(sym)),
        Domain::Tracks { .. } => Value::Array(
            domain
                .decode_tuple(sym)
                .into_iter()
                .map(|c| if c == 0 { Value::Null } else { step_value(alphabet, alphabet.step(c)) })
                .collect(),
        ),
    }
}

fn value_step(alphabet: &Alphabet, v: &Value) -> Result<u32> {
    let items = v.as_array().ok_or_else(|| Error::Parse(format!("expected a step array, got {v}")))?;
    let mut s = LetterSet::EMPTY;
    for it in items {
        let name = it.as_str().ok_or_else(|| Error::Parse(format!("expected a letter name, got {it}")))?;
        s.insert(alphabet.letter(name)?);
    }
    alphabet
        .step_code(s)
        .ok_or_else(|| Error::Parse(format!("{} is not a step", alphabet.fmt_step(s))))
}

fn value_sym(domain: &Domain, v: &Value) -> Result<Sym> {
    let alphabet = domain.alphabet();
    let sym = match domain {
        Domain::Letters(_) => {
            let name = v.as_str().ok_or_else(|| Error::Parse(format!("expected a letter, got {v}")))?;
            alphabet.letter(name)? as Sym
        }
        Domain::Steps { .. } => value_step(alphabet, v)?,
        Domain::Tracks { arity, .. } => {
            let items = v.as_array().ok_or_else(|| Error::Parse(format!("expected a track tuple, got {v}")))?;
            if items.len() != *arity {
                return Err(Error::Parse(format!("track tuple {v} does not have {arity} components")));
            }
            let comps = items
                .iter()
                .map(|c| if c.is_null() { Ok(0) } else { value_step(alphabet, c) })
                .collect::<Result<Vec<u32>>>()?;
            domain.encode_tuple(&comps)
        }
    };
    if !domain.contains(sym) {
        return Err(Error::Parse(format!("symbol {v} not allowed in domain {}", domain.describe())));
    }
    Ok(sym)
}

impl AutomatonDoc {
    pub fn of(dfa: &Dfa, with_alphabet: bool) -> Self {
        let name = |q: usize| format!("q{q}");
        let (domain, arity) = match &dfa.domain {
            Domain::Tracks { arity, .. } => ("tracks".to_string(), Some(*arity)),
            d => (d.describe(), None),
        };
        AutomatonDoc {
            alphabet: with_alphabet.then(|| AlphabetDoc::of(dfa.domain.alphabet())),
            domain,
            arity,
            states: (0..dfa.num_states()).map(name).collect(),
            initial: name(dfa.initial as usize),
            finals: (0..dfa.num_states()).filter(|&q| dfa.finals[q]).map(name).collect(),
            transitions: dfa
                .trans
                .iter()
                .enumerate()
                .flat_map(|(p, out)| out.iter().map(move |&(s, q)| (p, s, q)))
                .map(|(p, s, q)| (name(p), sym_value(&dfa.domain, s), name(q as usize)))
                .collect(),
        }
    }

    /// Builds the automaton, over the embedded alphabet or `alphabet`.
    pub fn build(&self, alphabet: Option<&Arc<Alphabet>>) -> Result<Dfa> {
        let alphabet = match (&self.alphabet, alphabet) {
            (Some(doc), Some(given)) => {
                let own = doc.build()?;
                if *own != **given {
                    return Err(Error::DomainMismatch("automaton alphabet differs from the enclosing one".into()));
                }
                given.clone()
            }
            (Some(doc), None) => doc.build()?,
            (None, Some(given)) => given.clone(),
            (None, None) => return Err(Error::Parse("automaton needs an alphabet".into())),
        };
        let domain = match (self.domain.as_str(), self.arity) {
            ("letters", None) => Domain::letters(&alphabet),
            ("steps", None) => Domain::steps_with_empty(&alphabet),
            ("steps-nonempty", None) => Domain::steps(&alphabet),
            ("tracks", Some(k)) if k > 0 => Domain::tracks(&alphabet, k),
            (d, a) => return Err(Error::Parse(format!("unknown domain `{d}` (arity {a:?})"))),
        };
        let index: BTreeMap<&str, State> =
            self.states.iter().enumerate().map(|(i, s)| (s.as_str(), i as State)).collect();
        if index.len() != self.states.len() {
            return Err(Error::Parse("duplicate state names".into()));
        }
        let state = |s: &str| index.get(s).copied().ok_or_else(|| Error::Parse(format!("unknown state `{s}`")));
        let mut trans = vec![Vec::new(); self.states.len()];
        for (p, v, q) in &self.transitions {
            trans[state(p)? as usize].push((value_sym(&domain, v)?, state(q)?));
        }
        let mut finals = vec![false; self.states.len()];
        for f in &self.finals {
            finals[state(f)? as usize] = true;
        }
        Dfa::from_parts(domain, trans, state(&self.initial)?, finals)
    }
}

/// A trace language inside an RTL document.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum LangDoc {
    LevelRegular { automaton: AutomatonDoc },
    Recognizable { automaton: AutomatonDoc },
    Finite { traces: Vec<String> },
    /// Regular expression over letters; must denote a trace-closed language.
    Regex { regex: String },
}

impl LangDoc {
    pub fn recognizable(&self, alphabet: &Arc<Alphabet>) -> Result<RecTraceLang> {
        match self {
            LangDoc::Recognizable { automaton } => RecTraceLang::new(automaton.build(Some(alphabet))?),
            LangDoc::Finite { traces } => {
                let ts = traces.iter().map(|t| alphabet.parse_trace(t)).collect::<Result<Vec<_>>>()?;
                RecTraceLang::from_traces(alphabet, &ts)
            }
            LangDoc::Regex { regex } => RecTraceLang::from_regex(alphabet, regex),
            LangDoc::LevelRegular { .. } => {
                Err(Error::Invariant("a level-regular language was given where a recognizable one is needed".into()))
            }
        }
    }

    pub fn level_regular(&self, alphabet: &Arc<Alphabet>) -> Result<LevelRegLang> {
        match self {
            LangDoc::LevelRegular { automaton } => LevelRegLang::new(automaton.build(Some(alphabet))?),
            other => other.recognizable(alphabet)?.foata_encoding(),
        }
    }
}

/// A standalone recognizable language: the alphabet plus a [`LangDoc`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RecLangDoc {
    pub alphabet: AlphabetDoc,
    #[serde(flatten)]
    pub lang: LangDoc,
}

impl RecLangDoc {
    pub fn of(lang: &RecTraceLang) -> Self {
        RecLangDoc {
            alphabet: AlphabetDoc::of(lang.alphabet()),
            lang: LangDoc::Recognizable { automaton: AutomatonDoc::of(lang.dfa(), false) },
        }
    }

    pub fn build(&self) -> Result<RecTraceLang> {
        self.lang.recognizable(&self.alphabet.build()?)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RuleDoc {
    pub label: String,
    pub context: LangDoc,
    pub lhs: LangDoc,
    pub rhs: LangDoc,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RtlDoc {
    pub alphabet: AlphabetDoc,
    pub labels: Vec<String>,
    pub rules: Vec<RuleDoc>,
}

impl RtlDoc {
    pub fn of(sys: &RtlSystem) -> Self {
        let rules = sys
            .rules()
            .iter()
            .map(|r| RuleDoc {
                label: r.label.clone(),
                context: LangDoc::LevelRegular { automaton: AutomatonDoc::of(r.context.dfa(), false) },
                lhs: LangDoc::Recognizable { automaton: AutomatonDoc::of(r.lhs.dfa(), false) },
                rhs: LangDoc::Recognizable { automaton: AutomatonDoc::of(r.rhs.dfa(), false) },
            })
            .collect();
        RtlDoc { alphabet: AlphabetDoc::of(sys.alphabet()), labels: sys.labels().to_vec(), rules }
    }

    pub fn build(&self) -> Result<RtlSystem> {
        let alphabet = self.alphabet.build()?;
        let rules = self
            .rules
            .iter()
            .map(|r| {
                Ok(RtlRule::new(
                    &r.label,
                    r.context.level_regular(&alphabet)?,
                    r.lhs.recognizable(&alphabet)?,
                    r.rhs.recognizable(&alphabet)?,
                ))
            })
            .collect::<Result<Vec<_>>>()?;
        let labels: Vec<&str> = self.labels.iter().map(String::as_str).collect();
        RtlSystem::new(&alphabet, &labels, rules)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConcurrentDoc {
    pub alphabet: AlphabetDoc,
    pub states: Vec<String>,
    pub initial: String,
    pub finals: Vec<String>,
    pub transitions: Vec<(String, String, String)>,
}

impl ConcurrentDoc {
    pub fn of(a: &ConcurrentAutomaton) -> Self {
        let st = |q: usize| a.states()[q].clone();
        ConcurrentDoc {
            alphabet: AlphabetDoc::of(a.alphabet()),
            states: a.states().to_vec(),
            initial: st(a.initial()),
            finals: a.finals().into_iter().map(st).collect(),
            transitions: a
                .transitions()
                .into_iter()
                .map(|(p, l, q)| (st(p), a.alphabet().name(l).to_string(), st(q)))
                .collect(),
        }
    }

    pub fn build(&self) -> Result<ConcurrentAutomaton> {
        let alphabet = self.alphabet.build()?;
        let states: Vec<&str> = self.states.iter().map(String::as_str).collect();
        let finals: Vec<&str> = self.finals.iter().map(String::as_str).collect();
        let trans: Vec<(&str, &str, &str)> =
            self.transitions.iter().map(|(p, a, q)| (p.as_str(), a.as_str(), q.as_str())).collect();
        ConcurrentAutomaton::new(&alphabet, &states, &self.initial, &finals, &trans)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GtrsRuleDoc {
    pub label: String,
    pub lhs: String,
    pub rhs: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GtrsDoc {
    pub ranked: RankedAlphabet,
    pub labels: Vec<String>,
    pub initial: String,
    pub rules: Vec<GtrsRuleDoc>,
}

impl GtrsDoc {
    pub fn of(g: &Gtrs) -> Self {
        GtrsDoc {
            ranked: g.ranked.clone(),
            labels: g.labels.clone(),
            initial: g.initial.to_string(),
            rules: g
                .rules
                .iter()
                .map(|r| GtrsRuleDoc { label: r.label.clone(), lhs: r.lhs.to_string(), rhs: r.rhs.to_string() })
                .collect(),
        }
    }

    pub fn build(&self) -> Result<Gtrs> {
        let labels: Vec<&str> = self.labels.iter().map(String::as_str).collect();
        let rules = self.rules.iter().map(|r| (r.label.as_str(), r.lhs.as_str(), r.rhs.as_str())).collect();
        Gtrs::new(self.ranked.clone(), &labels, rules, &self.initial)
    }
}

/// A finite labelled graph; `frontier` marks vertices drawn double-circled.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphDoc {
    pub vertices: Vec<String>,
    pub edges: Vec<(String, String, String)>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub frontier: Vec<String>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub truncated: bool,
}

impl GraphDoc {
    pub fn of(g: &Graph) -> Self {
        GraphDoc {
            vertices: g.vertices.clone(),
            edges: g.edges.iter().map(|(s, l, t)| (g.vertices[*s].clone(), l.clone(), g.vertices[*t].clone())).collect(),
            ..Default::default()
        }
    }

    pub fn build(&self) -> Result<Graph> {
        let index: BTreeMap<&str, usize> = self.vertices.iter().enumerate().map(|(i, v)| (v.as_str(), i)).collect();
        if index.len() != self.vertices.len() {
            return Err(Error::Parse("duplicate vertex names".into()));
        }
        let v = |s: &str| index.get(s).copied().ok_or_else(|| Error::Parse(format!("unknown vertex `{s}`")));
        let edges = self.edges.iter().map(|(s, l, t)| Ok((v(s)?, l.clone(), v(t)?))).collect::<Result<Vec<_>>>()?;
        Ok(Graph { vertices: self.vertices.clone(), edges })
    }

    pub fn frontier_indices(&self) -> Result<std::collections::BTreeSet<usize>> {
        self.frontier
            .iter()
            .map(|f| {
                self.vertices.iter().position(|v| v == f).ok_or_else(|| Error::Parse(format!("unknown vertex `{f}`")))
            })
            .collect()
    }
}

pub const MANIFEST: &str = "manifest.json";
pub const BUNDLE_FORMAT: &str = "tracerw-bundle";

/// `manifest.json` of a presentation bundle directory.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Manifest {
    pub format: String,
    pub version: u32,
    pub alphabet: AlphabetDoc,
    pub vertices: String,
    /// Label to relation automaton file, relative to the bundle.
    pub relations: BTreeMap<String, String>,
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("documents serialize")
}

pub fn from_json<T: DeserializeOwned>(text: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    from_json(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    std::fs::write(path, to_json(value) + "\n").map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

/// Writes `pres` as a bundle directory and returns its manifest.
pub fn write_bundle(dir: &Path, pres: &AutomaticPresentation) -> Result<Manifest> {
    std::fs::create_dir_all(dir).map_err(|e| Error::Io(format!("{}: {e}", dir.display())))?;
    write_json(&dir.join("vertices.json"), &AutomatonDoc::of(pres.vertices(), false))?;
    let mut relations = BTreeMap::new();
    for (i, (label, rel)) in pres.relations().iter().enumerate() {
        let file = format!("relation-{i}.json");
        write_json(&dir.join(&file), &AutomatonDoc::of(rel.dfa(), false))?;
        relations.insert(label.clone(), file);
    }
    let manifest = Manifest {
        format: BUNDLE_FORMAT.into(),
        version: 1,
        alphabet: AlphabetDoc::of(pres.alphabet()),
        vertices: "vertices.json".into(),
        relations,
    };
    write_json(&dir.join(MANIFEST), &manifest)?;
    Ok(manifest)
}

pub fn read_bundle(dir: &Path) -> Result<AutomaticPresentation> {
    let manifest: Manifest = read_json(&dir.join(MANIFEST))?;
    if manifest.format != BUNDLE_FORMAT {
        return Err(Error::Parse(format!("not a presentation bundle: format `{}`", manifest.format)));
    }
    let alphabet = manifest.alphabet.build()?;
    let vertices = read_json::<AutomatonDoc>(&dir.join(&manifest.vertices))?.build(Some(&alphabet))?;
    let mut relations = BTreeMap::new();
    for (label, file) in &manifest.relations {
        let dfa = read_json::<AutomatonDoc>(&dir.join(file))?.build(Some(&alphabet))?;
        relations.insert(label.clone(), SyncRelation::new(dfa)?);
    }
    let pres = AutomaticPresentation::new(&alphabet, relations)?;
    if !pres.vertices().equivalent(&vertices)? {
        return Err(Error::Invariant("bundle vertex automaton is not the set of Foata normal forms".into()));
    }
    Ok(pres)
}
