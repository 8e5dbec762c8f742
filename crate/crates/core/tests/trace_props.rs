use std::sync::Arc;

use proptest::prelude::*;
use tracerw::automata::foata_automaton;
use tracerw::trace::trace_equiv;
use tracerw::{Alphabet, FoataWord, Letter};

/// An alphabet of `n` letters with independence drawn from `bits`.
fn alphabet(n: usize, bits: u32) -> Arc<Alphabet> {
    let names: Vec<String> = (0..n).map(|i| ((b'a' + i as u8) as char).to_string()).collect();
    let mut pairs = Vec::new();
    let mut k = 0;
    for i in 0..n {
        for j in i + 1..n {
            if bits >> k & 1 == 1 {
                pairs.push((names[i].clone(), names[j].clone()));
            }
            k += 1;
        }
    }
    Alphabet::new(&names, &pairs).unwrap()
}

fn setup() -> impl Strategy<Value = (Arc<Alphabet>, Vec<Letter>, Vec<Letter>)> {
    (1usize..=5, any::<u32>()).prop_flat_map(|(n, bits)| {
        let al = alphabet(n, bits);
        let word = prop::collection::vec(0..n as Letter, 0..10);
        (Just(al), word.clone(), word)
    })
}

/// Letters can be reordered only across independent neighbours.
fn naive_equiv(al: &Alphabet, u: &[Letter], v: &[Letter]) -> bool {
    if u.len() != v.len() {
        return false;
    }
    let mut seen = std::collections::HashSet::from([u.to_vec()]);
    let mut stack = vec![u.to_vec()];
    while let Some(w) = stack.pop() {
        if w == v {
            return true;
        }
        for i in 0..w.len().saturating_sub(1) {
            if al.independent(w[i], w[i + 1]) {
                let mut x = w.clone();
                x.swap(i, i + 1);
                if seen.insert(x.clone()) {
                    stack.push(x);
                }
            }
        }
    }
    false
}

proptest! {
    #[test]
    fn normal_form_is_sound((al, u, _) in setup()) {
        let nf = FoataWord::normalize(&al, &u);
        prop_assert!(foata_automaton(&al).accepts(&nf.step_codes()));
        prop_assert!(naive_equiv(&al, &nf.linearize(), &u));
        prop_assert_eq!(FoataWord::normalize(&al, &nf.linearize()), nf);
    }

    #[test]
    fn equivalence_matches_swaps((al, u, v) in setup()) {
        let short = |w: &[Letter]| w[..w.len().min(7)].to_vec();
        let (u, v) = (short(&u), short(&v));
        prop_assert_eq!(trace_equiv(&al, &u, &v), naive_equiv(&al, &u, &v));
    }

    #[test]
    fn concatenation_is_a_congruence((al, u, v) in setup(), w in prop::collection::vec(0u8..5, 0..6)) {
        let w: Vec<Letter> = w.into_iter().filter(|&a| (a as usize) < al.len()).collect();
        let cat = |x: &[Letter], y: &[Letter]| [x, y].concat();
        let nu = FoataWord::normalize(&al, &u);
        let nv = FoataWord::normalize(&al, &v);
        let nw = FoataWord::normalize(&al, &w);
        prop_assert_eq!(nu.concat(&nw).unwrap(), FoataWord::normalize(&al, &cat(&u, &w)));
        if nu == nv {
            prop_assert_eq!(nw.concat(&nu).unwrap(), nw.concat(&nv).unwrap());
        }
    }

    #[test]
    fn left_division_cancels((al, u, v) in setup()) {
        let nu = FoataWord::normalize(&al, &u);
        let nv = FoataWord::normalize(&al, &v);
        let uv = nu.concat(&nv).unwrap();
        prop_assert_eq!(nu.left_divide(&uv), Some(nv.clone()));
        prop_assert!(nu.prefix_le(&uv));
        let vu = nv.concat(&nu).unwrap();
        let (u, v) = (&u[..u.len().min(4)], &v[..v.len().min(4)]);
        let (su, sv) = (FoataWord::normalize(&al, u), FoataWord::normalize(&al, v));
        if su.concat(&sv).unwrap() == sv.concat(&su).unwrap() {
            prop_assert!(naive_equiv(&al, &[u, v].concat(), &[v, u].concat()));
        }
    }

    #[test]
    fn primes_have_one_last_letter((al, u, _) in setup()) {
        let u = &u[..u.len().min(6)];
        let t = FoataWord::normalize(&al, u);
        // brute force: the trace ends with a unique letter among its linearizations
        let mut last = std::collections::BTreeSet::new();
        let mut seen = std::collections::HashSet::from([u.to_vec()]);
        let mut stack = vec![u.to_vec()];
        while let Some(w) = stack.pop() {
            if let Some(&a) = w.last() {
                last.insert(a);
            }
            for i in 0..w.len().saturating_sub(1) {
                if al.independent(w[i], w[i + 1]) {
                    let mut x = w.clone();
                    x.swap(i, i + 1);
                    if seen.insert(x.clone()) {
                        stack.push(x);
                    }
                }
            }
        }
        prop_assert_eq!(t.is_prime(), last.len() == 1);
    }
}
