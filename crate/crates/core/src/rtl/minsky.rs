//! Two-counter Minsky machines encoded as RTL systems.
//!
//! The configuration `(k, c1, c2)` is the trace `[⊥a ⊥b a^c1 b^c2 k]` over
//! the letters `⊥a, ⊥b, a, b, 1, …, n` where only `a, b` and `⊥a, ⊥b`
//! commute.

use std::collections::{HashSet, VecDeque};
use std::fmt;
use std::sync::Arc;

use super::{compile, AutomaticPresentation, RtlRule, RtlSystem};
use crate::automata::RecTraceLang;
use crate::error::{Error, Result};
use crate::fo::Formula;
use crate::trace::{Alphabet, FoataWord};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MinskyInstr {
    /// Increment counter, go to instruction.
    Inc { counter: u8, next: usize },
    /// If the counter is positive decrement it and go to `next`, else go to `zero`.
    Dec { counter: u8, next: usize, zero: usize },
    Halt,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MinskyMachine {
    instrs: Vec<MinskyInstr>,
}

/// Outcome of a bounded halting search.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HaltVerdict {
    HaltsAt(usize),
    NoHaltWithin(usize),
}

impl fmt::Display for HaltVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HaltVerdict::HaltsAt(d) => write!(f, "halts at depth {d}"),
            HaltVerdict::NoHaltWithin(_) => write!(f, "no halt within budget"),
        }
    }
}

/// The text format read by [`MinskyMachine::parse`].
impl fmt::Display for MinskyMachine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, ins) in self.instrs.iter().enumerate() {
            match ins {
                MinskyInstr::Inc { counter, next } => writeln!(f, "{}: inc {counter} {next}", i + 1)?,
                MinskyInstr::Dec { counter, next, zero } => writeln!(f, "{}: dec {counter} {next} {zero}", i + 1)?,
                MinskyInstr::Halt => writeln!(f, "{}: halt", i + 1)?,
            }
        }
        Ok(())
    }
}

impl MinskyMachine {
    /// Instructions `1..=n`; instruction `n` must be the only halt.
    pub fn new(instrs: Vec<MinskyInstr>) -> Result<Self> {
        let n = instrs.len();
        if n == 0 || instrs[n - 1] != MinskyInstr::Halt {
            return Err(Error::Parse("the last instruction must be `halt`".into()));
        }
        for (k, ins) in instrs.iter().enumerate() {
            let targets_ok = |t: usize| (1..=n).contains(&t);
            let ok = match *ins {
                MinskyInstr::Inc { counter, next } => (1..=2).contains(&counter) && targets_ok(next),
                MinskyInstr::Dec { counter, next, zero } => {
                    (1..=2).contains(&counter) && targets_ok(next) && targets_ok(zero)
                }
                MinskyInstr::Halt => k == n - 1,
            };
            if !ok {
                return Err(Error::Parse(format!("invalid instruction {}", k + 1)));
            }
        }
        Ok(MinskyMachine { instrs })
    }

    /// Lines `k: inc <1|2> <j>`, `k: dec <1|2> <j> <l>` and `n: halt`;
    /// `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries: Vec<(usize, MinskyInstr)> = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = || Error::Parse(format!("line {}: cannot parse `{line}`", lineno + 1));
            let (num, rest) = line.split_once(':').ok_or_else(err)?;
            let k: usize = num.trim().parse().map_err(|_| err())?;
            let words: Vec<&str> = rest.split_whitespace().collect();
            let nums: Vec<usize> = words.iter().skip(1).map(|w| w.parse()).collect::<Result<_, _>>().map_err(|_| err())?;
            let ins = match (words.first().copied(), nums.as_slice()) {
                (Some("inc"), &[c, j]) => MinskyInstr::Inc { counter: c as u8, next: j },
                (Some("dec"), &[c, j, l]) => MinskyInstr::Dec { counter: c as u8, next: j, zero: l },
                (Some("halt"), &[]) => MinskyInstr::Halt,
                _ => return Err(err()),
            };
            entries.push((k, ins));
        }
        entries.sort_by_key(|e| e.0);
        if entries.iter().enumerate().any(|(i, e)| e.0 != i + 1) {
            return Err(Error::Parse("instructions must be numbered 1..n without gaps".into()));
        }
        Self::new(entries.into_iter().map(|e| e.1).collect())
    }

    pub fn len(&self) -> usize {
        self.instrs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instrs.is_empty()
    }

    pub fn instrs(&self) -> &[MinskyInstr] {
        &self.instrs
    }

    pub fn alphabet(&self) -> Arc<Alphabet> {
        let mut letters: Vec<String> = vec!["⊥a".into(), "⊥b".into(), "a".into(), "b".into()];
        letters.extend((1..=self.len()).map(|k| k.to_string()));
        let pairs = [("a".to_string(), "b".to_string()), ("⊥a".to_string(), "⊥b".to_string())];
        Alphabet::with_cap(&letters, &pairs, letters.len()).expect("Minsky alphabet is valid")
    }

    /// Trace encoding of a configuration.
    pub fn encode(alphabet: &Arc<Alphabet>, k: usize, c1: usize, c2: usize) -> Result<FoataWord> {
        let mut w = vec![alphabet.letter("⊥a")?, alphabet.letter("⊥b")?];
        w.extend(std::iter::repeat_n(alphabet.letter("a")?, c1));
        w.extend(std::iter::repeat_n(alphabet.letter("b")?, c2));
        w.push(alphabet.letter(&k.to_string())?);
        FoataWord::try_normalize(alphabet, &w)
    }

    /// Runs the machine itself for at most `max_steps` steps.
    pub fn simulate(&self, max_steps: usize) -> HaltVerdict {
        let (mut k, mut c) = (1usize, [0usize; 2]);
        for step in 0..=max_steps {
            match self.instrs[k - 1] {
                MinskyInstr::Halt => return HaltVerdict::HaltsAt(step),
                MinskyInstr::Inc { counter, next } => {
                    c[counter as usize - 1] += 1;
                    k = next;
                }
                MinskyInstr::Dec { counter, next, zero } => {
                    let i = counter as usize - 1;
                    if c[i] > 0 {
                        c[i] -= 1;
                        k = next;
                    } else {
                        k = zero;
                    }
                }
            }
        }
        HaltVerdict::NoHaltWithin(max_steps)
    }
}

/// The rewriting system (labels `R`, `i`, `f`) and the halting sentence
/// `∃x∃y (x →i x ∧ y →f y ∧ x →* y)`.
///
/// The zero test rewrites `k` to `l` under the contexts `[⊥a⊥b b*]` and
/// `[⊥a⊥b a*]`, so that an empty counter is detected whatever the other
/// counter holds. The `f` loop sits on every trace ending with `n`.
pub fn compile_minsky(m: &MinskyMachine) -> Result<(RtlSystem, Formula)> {
    let al = m.alphabet();
    let single = |s: &[&str]| -> Result<RecTraceLang> {
        let letters = s.iter().map(|n| al.letter(n)).collect::<Result<Vec<_>>>()?;
        RecTraceLang::from_traces(&al, &[FoataWord::normalize(&al, &letters)])
    };
    let counter = |c: u8| if c == 1 { "a" } else { "b" };
    let bottom = |c: u8| if c == 1 { "⊥a" } else { "⊥b" };
    let mut rules = Vec::new();
    for (idx, ins) in m.instrs().iter().enumerate() {
        let k = (idx + 1).to_string();
        match *ins {
            MinskyInstr::Inc { counter: c, next } => {
                let j = next.to_string();
                rules.push(RtlRule::anywhere("R", single(&[&k])?, single(&[counter(c), &j])?));
            }
            MinskyInstr::Dec { counter: c, next, zero } => {
                let (j, l) = (next.to_string(), zero.to_string());
                rules.push(RtlRule::anywhere("R", single(&[counter(c), &k])?, single(&[&j])?));
                rules.push(RtlRule::anywhere("R", single(&[bottom(c), &k])?, single(&[bottom(c), &l])?));
                let other = counter(3 - c);
                let ctx = RecTraceLang::from_regex(&al, &format!("(⊥a⊥b+⊥b⊥a){other}*"))?;
                rules.push(RtlRule::with_rec_context("R", &ctx, single(&[&k])?, single(&[&l])?)?);
            }
            MinskyInstr::Halt => {
                rules.push(RtlRule::anywhere("f", single(&[&k])?, single(&[&k])?));
            }
        }
    }
    let start = RecTraceLang::from_traces(&al, &[MinskyMachine::encode(&al, 1, 0, 0)?])?;
    let eps = RecTraceLang::epsilon(&al);
    rules.push(RtlRule::with_rec_context("i", &start, eps.clone(), eps)?);
    let sys = RtlSystem::new(&al, &["R", "i", "f"], rules)?;
    let sentence = Formula::exists(
        "x",
        Formula::exists(
            "y",
            Formula::all(vec![Formula::edge("i", "x", "x"), Formula::edge("f", "y", "y"), Formula::edge("*", "x", "y")]),
        ),
    );
    Ok((sys, sentence))
}

/// Breadth-first search along `R` edges from the initial configuration,
/// visiting at most `budget` vertices, until a vertex carrying an `f` loop.
pub fn run_minsky(pres: &AutomaticPresentation, budget: usize) -> Result<HaltVerdict> {
    let al = pres.alphabet().clone();
    let r = pres.relation("R")?;
    let f = pres.relation("f")?;
    let start = MinskyMachine::encode(&al, 1, 0, 0)?;
    let mut seen: HashSet<FoataWord> = HashSet::from([start.clone()]);
    let mut queue = VecDeque::from([(start, 0usize)]);
    while let Some((v, d)) = queue.pop_front() {
        if f.contains(&v, &v) {
            return Ok(HaltVerdict::HaltsAt(d));
        }
        for t in r.images_bounded(&v, v.letter_count() + 1) {
            if seen.len() >= budget {
                return Ok(HaltVerdict::NoHaltWithin(budget));
            }
            if seen.insert(t.clone()) {
                queue.push_back((t, d + 1));
            }
        }
    }
    Ok(HaltVerdict::NoHaltWithin(budget))
}

/// Compiles the machine and runs the bounded search.
pub fn run_machine(m: &MinskyMachine, budget: usize) -> Result<HaltVerdict> {
    let (sys, _) = compile_minsky(m)?;
    run_minsky(&compile(&sys)?, budget)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fo::decide;

    #[test]
    fn parse_machine() {
        let m = MinskyMachine::parse("1: inc 1 2\n2: halt\n").unwrap();
        assert_eq!(m.instrs()[0], MinskyInstr::Inc { counter: 1, next: 2 });
        assert_eq!(MinskyMachine::parse(&m.to_string()).unwrap(), m);
        assert!(MinskyMachine::parse("1: inc 1 3\n2: halt").is_err());
        assert!(MinskyMachine::parse("1: halt\n2: halt").is_err());
        assert!(MinskyMachine::parse("1: jump 2\n2: halt").is_err());
        assert!(MinskyMachine::parse("2: halt").is_err());
    }

    #[test]
    fn configuration_encoding() {
        let m = MinskyMachine::parse("1: inc 1 2\n2: halt").unwrap();
        let al = m.alphabet();
        let t = MinskyMachine::encode(&al, 2, 1, 2).unwrap();
        assert_eq!(t.to_string(), "{⊥a,⊥b}{a,b}{b}{2}");
    }

    #[test]
    fn increment_then_halt() {
        let m = MinskyMachine::parse("1: inc 1 2\n2: halt").unwrap();
        assert_eq!(m.simulate(10), HaltVerdict::HaltsAt(1));
        let (sys, _) = compile_minsky(&m).unwrap();
        let pres = compile(&sys).unwrap();
        let al = sys.alphabet().clone();
        let start = MinskyMachine::encode(&al, 1, 0, 0).unwrap();
        let frag = pres.bounded_bfs(&start, &["R"], 10, 6).unwrap();
        assert!(frag.vertices.contains(&MinskyMachine::encode(&al, 2, 1, 0).unwrap()));
        assert_eq!(run_minsky(&pres, 100).unwrap(), HaltVerdict::HaltsAt(1));
    }

    #[test]
    fn looping_decrement() {
        let m = MinskyMachine::parse("1: dec 1 1 1\n2: halt").unwrap();
        assert_eq!(m.simulate(1000), HaltVerdict::NoHaltWithin(1000));
        assert_eq!(run_machine(&m, 10_000).unwrap().to_string(), "no halt within budget");
    }

    #[test]
    fn zero_test_with_other_counter_positive() {
        // 1: inc 2 → 2; 2: dec 1 → 3 else 3; 3: halt
        let m = MinskyMachine::parse("1: inc 2 2\n2: dec 1 3 3\n3: halt").unwrap();
        assert_eq!(m.simulate(10), HaltVerdict::HaltsAt(2));
        assert_eq!(run_machine(&m, 100).unwrap(), HaltVerdict::HaltsAt(2));
    }

    #[test]
    fn counting_machine_agrees_with_simulation() {
        let m = MinskyMachine::parse("1: inc 1 2\n2: inc 1 3\n3: dec 1 3 4\n4: inc 2 5\n5: dec 2 5 6\n6: halt").unwrap();
        let expected = m.simulate(100);
        assert_eq!(run_machine(&m, 1000).unwrap(), expected);
    }

    #[test]
    fn halting_sentence_is_rejected() {
        let m = MinskyMachine::parse("1: inc 1 2\n2: halt").unwrap();
        let (sys, sentence) = compile_minsky(&m).unwrap();
        let pres = compile(&sys).unwrap();
        let err = decide(&sentence, &pres).unwrap_err();
        assert_eq!(err.to_string(), "reachability relation not automatic for this system");
    }
}
