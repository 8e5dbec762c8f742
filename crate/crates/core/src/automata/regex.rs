//! Small regular-expression front end.
//!
//! Grammar: `alt := cat (('+' | '|') cat)*`, `cat := rep*`,
//! `rep := atom '*'*`, `atom := SYMBOL | '.' | 'ε' | '(' alt ')'`.
//! Over letter domains a symbol is a letter name (longest match); over step
//! domains it is a step written `{a,c}` (`{}` is the empty step). `.` is any
//! symbol of the domain.

use super::{Dfa, Domain, Nfa, State, Sym};
use crate::error::{Error, Result};

#[derive(Debug, Clone)]
enum Re {
    Eps,
    Sym(Vec<Sym>),
    Cat(Box<Re>, Box<Re>),
    Alt(Box<Re>, Box<Re>),
    Star(Box<Re>),
}

struct Parser<'a> {
    domain: &'a Domain,
    rest: &'a str,
}

impl<'a> Parser<'a> {
    fn skip_ws(&mut self) {
        self.rest = self.rest.trim_start();
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.rest.chars().next()
    }

    fn bump(&mut self, c: char) {
        self.rest = &self.rest[c.len_utf8()..];
    }

    fn alt(&mut self) -> Result<Re> {
        let mut left = self.cat()?;
        while let Some(c @ ('+' | '|')) = self.peek() {
            self.bump(c);
            let right = self.cat()?;
            left = Re::Alt(Box::new(left), Box::new(right));
        }
        Ok(left)
    }

    fn cat(&mut self) -> Result<Re> {
        let mut acc: Option<Re> = None;
        while let Some(c) = self.peek() {
            if matches!(c, '+' | '|' | ')') {
                break;
            }
            let r = self.rep()?;
            acc = Some(match acc {
                None => r,
                Some(l) => Re::Cat(Box::new(l), Box::new(r)),
            });
        }
        Ok(acc.unwrap_or(Re::Eps))
    }

    fn rep(&mut self) -> Result<Re> {
        let mut r = self.atom()?;
        while self.peek() == Some('*') {
            self.bump('*');
            r = Re::Star(Box::new(r));
        }
        Ok(r)
    }

    fn atom(&mut self) -> Result<Re> {
        let c = self.peek().ok_or_else(|| Error::Parse("unexpected end of expression".into()))?;
        match c {
            '(' => {
                self.bump('(');
                let r = self.alt()?;
                if self.peek() != Some(')') {
                    return Err(Error::Parse("missing `)`".into()));
                }
                self.bump(')');
                Ok(r)
            }
            'ε' => {
                self.bump('ε');
                Ok(Re::Eps)
            }
            '.' => {
                self.bump('.');
                Ok(Re::Sym(self.domain.symbols()))
            }
            '{' => {
                let Domain::Steps { alphabet, with_empty } = self.domain else {
                    return Err(Error::Parse("step symbols need a step domain".into()));
                };
                let close = self.rest.find('}').ok_or_else(|| Error::Parse("unterminated step".into()))?;
                let steps = alphabet.parse_steps(&self.rest[..=close])?;
                self.rest = &self.rest[close + 1..];
                let code = match steps.as_slice() {
                    [s] => alphabet.step_code(*s).unwrap_or(0),
                    [] => 0,
                    _ => unreachable!(),
                };
                if code == 0 && !with_empty {
                    return Err(Error::Parse("empty step not allowed in this domain".into()));
                }
                Ok(Re::Sym(vec![code]))
            }
            _ => {
                let Domain::Letters(alphabet) = self.domain else {
                    return Err(Error::Parse(format!("expected a step at `{}`", self.rest)));
                };
                let best = alphabet
                    .names()
                    .iter()
                    .enumerate()
                    .filter(|(_, n)| self.rest.starts_with(n.as_str()))
                    .max_by_key(|(_, n)| n.len());
                match best {
                    Some((i, n)) => {
                        self.rest = &self.rest[n.len()..];
                        Ok(Re::Sym(vec![i as Sym]))
                    }
                    None => Err(Error::Parse(format!("unknown letter at `{}`", self.rest))),
                }
            }
        }
    }
}

/// ε-NFA under construction.
struct Builder {
    eps: Vec<Vec<State>>,
    trans: Vec<Vec<(Sym, State)>>,
}

impl Builder {
    fn state(&mut self) -> State {
        self.eps.push(Vec::new());
        self.trans.push(Vec::new());
        (self.eps.len() - 1) as State
    }

    /// Thompson fragment; returns (entry, exit).
    fn build(&mut self, re: &Re) -> (State, State) {
        match re {
            Re::Eps => {
                let s = self.state();
                (s, s)
            }
            Re::Sym(syms) => {
                let (s, t) = (self.state(), self.state());
                for &x in syms {
                    self.trans[s as usize].push((x, t));
                }
                (s, t)
            }
            Re::Cat(a, b) => {
                let (s1, t1) = self.build(a);
                let (s2, t2) = self.build(b);
                self.eps[t1 as usize].push(s2);
                (s1, t2)
            }
            Re::Alt(a, b) => {
                let (s, t) = (self.state(), self.state());
                let (s1, t1) = self.build(a);
                let (s2, t2) = self.build(b);
                self.eps[s as usize].extend([s1, s2]);
                self.eps[t1 as usize].push(t);
                self.eps[t2 as usize].push(t);
                (s, t)
            }
            Re::Star(a) => {
                let s = self.state();
                let (s1, t1) = self.build(a);
                self.eps[s as usize].push(s1);
                self.eps[t1 as usize].push(s);
                (s, s)
            }
        }
    }

    fn closure(&self, q: State) -> Vec<State> {
        let mut seen = vec![false; self.eps.len()];
        let mut stack = vec![q];
        seen[q as usize] = true;
        let mut out = Vec::new();
        while let Some(p) = stack.pop() {
            out.push(p);
            for &r in &self.eps[p as usize] {
                if !seen[r as usize] {
                    seen[r as usize] = true;
                    stack.push(r);
                }
            }
        }
        out
    }
}

/// Compiles a regular expression to a minimal DFA over `domain`.
pub fn parse_regex(domain: &Domain, text: &str) -> Result<Dfa> {
    if matches!(domain, Domain::Tracks { .. }) {
        return Err(Error::Parse("regular expressions over track domains are not supported".into()));
    }
    let mut p = Parser { domain, rest: text };
    let re = p.alt()?;
    if p.peek().is_some() {
        return Err(Error::Parse(format!("trailing input `{}`", p.rest)));
    }
    let mut b = Builder { eps: Vec::new(), trans: Vec::new() };
    let (start, end) = b.build(&re);
    let n = b.eps.len();
    let mut nfa = Nfa::new(domain.clone());
    for _ in 0..n {
        nfa.add_state(false);
    }
    for q in 0..n as State {
        let cl = b.closure(q);
        nfa.finals[q as usize] = cl.contains(&end);
        for &p in &cl {
            for &(s, t) in &b.trans[p as usize] {
                nfa.add_transition(q, s, t);
            }
        }
    }
    nfa.initial.push(start);
    Ok(nfa.determinize()?.minimize())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trace::Alphabet;

    #[test]
    fn letters_and_operators() {
        let al = Alphabet::free(&["a", "b", "ab"]).unwrap();
        let d = Domain::letters(&al);
        let re = parse_regex(&d, "(a+b)*ab").unwrap();
        // longest match: `ab` is the letter ab
        assert!(re.accepts(&[0, 2]));
        assert!(!re.accepts(&[0, 0, 1]));
        let e = parse_regex(&d, "ε").unwrap();
        assert!(e.accepts(&[]));
        assert!(!e.accepts(&[0]));
    }

    #[test]
    fn steps() {
        let al = Alphabet::new(&["a", "b"], &[("a", "b")]).unwrap();
        let d = Domain::steps(&al);
        let re = parse_regex(&d, "{a,b}*").unwrap();
        let ab = al.step_code(crate::trace::LetterSet(3)).unwrap();
        assert!(re.accepts(&[ab, ab]));
        assert!(parse_regex(&d, "{}").is_err());
        assert!(parse_regex(&Domain::steps_with_empty(&al), "{}*").unwrap().accepts(&[0, 0]));
    }

    #[test]
    fn errors() {
        let al = Alphabet::free(&["a"]).unwrap();
        let d = Domain::letters(&al);
        assert!(parse_regex(&d, "(a").is_err());
        assert!(parse_regex(&d, "z").is_err());
        assert!(parse_regex(&d, "a)").is_err());
    }
}
