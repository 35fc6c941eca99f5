//! Shared fixtures for unit tests: four small morphisms exercising every
//! branch of the case analysis.

use crate::algebra::{Elem, FiniteSemigroup, Morphism};
use crate::automaton::OrderedAutomaton;
use alloc::string::ToString;
use alloc::vec;
use alloc::vec::Vec;

/// Left-zero semigroup {α, β} with xy = x; a↦α, b↦β.
pub fn ra2() -> Morphism {
    let s = FiniteSemigroup::validate(
        vec!["α".to_string(), "β".to_string()],
        &[vec![0, 0], vec![1, 1]],
    )
    .unwrap();
    Morphism::new(s, &[('a', Elem(0)), ('b', Elem(1))]).unwrap()
}

/// Six-element semigroup on {α, β, αα, αβ, βα, ββ} with xyz = xy: a product
/// remembers the first letter and the first letter of the second factor.
pub fn psi6() -> Morphism {
    let names: Vec<_> = ["α", "β", "αα", "αβ", "βα", "ββ"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    // first letter of each element (0 = α, 1 = β)
    let first = [0usize, 1, 0, 0, 1, 1];
    let mut table = Vec::new();
    for x in 0..6 {
        let mut row = Vec::new();
        for &fy in &first {
            row.push(if x >= 2 { x } else { 2 + 2 * x + fy });
        }
        table.push(row);
    }
    let s = FiniteSemigroup::validate(names, &table).unwrap();
    Morphism::new(s, &[('a', Elem(0)), ('b', Elem(1))]).unwrap()
}

/// Reduces an exponent by the relation s^5 = s^3.
pub fn pow4_reduce(e: usize) -> usize {
    if e <= 4 {
        e
    } else {
        3 + (e - 3) % 2
    }
}

/// Monogenic semigroup {s, s², s³, s⁴} with s⁵ = s³; a↦s, b↦s².
pub fn pow4() -> Morphism {
    let names: Vec<_> = ["s", "s²", "s³", "s⁴"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    let mut table = Vec::new();
    for i in 1..=4usize {
        table.push((1..=4).map(|j| pow4_reduce(i + j) - 1).collect());
    }
    let s = FiniteSemigroup::validate(names, &table).unwrap();
    Morphism::new(s, &[('a', Elem(0)), ('b', Elem(1))]).unwrap()
}

/// The Klein four-group (ℤ/2ℤ)²; a↦(1,0), b↦(0,1).
/// Indices encode the two bits: 0=(0,0), 1=(1,0), 2=(0,1), 3=(1,1).
pub fn klein() -> Morphism {
    let names: Vec<_> = ["(0,0)", "(1,0)", "(0,1)", "(1,1)"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    let table = (0..4usize)
        .map(|i| (0..4).map(|j| i ^ j).collect())
        .collect::<Vec<Vec<_>>>();
    let s = FiniteSemigroup::validate(names, &table).unwrap();
    Morphism::new(s, &[('a', Elem(1)), ('b', Elem(2))]).unwrap()
}

/// All four fixture morphisms, for sweep-style tests.
pub fn all_fixtures() -> Vec<(&'static str, Morphism)> {
    vec![
        ("ra2", ra2()),
        ("psi6", psi6()),
        ("pow4", pow4()),
        ("klein", klein()),
    ]
}

/// The hand-built good automaton for [`ra2`]: states n_a, n_b predict the
/// next symbol; order n_b < n_a < f < ι.
pub fn good_ra2() -> OrderedAutomaton {
    OrderedAutomaton::build(
        &[("ι", 3), ("n_a", 1), ("n_b", 0), ("f", 2)],
        &['a', 'b'],
        &[
            ("ι", 'a', "n_a"),
            ("ι", 'b', "n_a"),
            ("ι", 'a', "n_b"),
            ("ι", 'b', "n_b"),
            ("ι", 'a', "f"),
            ("ι", 'b', "f"),
            ("n_a", 'a', "n_a"),
            ("n_a", 'a', "n_b"),
            ("n_a", 'a', "f"),
            ("n_b", 'b', "n_b"),
            ("n_b", 'b', "n_a"),
            ("n_b", 'b', "f"),
        ],
        "ι",
        &["f"],
        &["n_a", "n_b"],
    )
    .unwrap()
}

/// The hand-built good automaton for [`psi6`]: states n_xy predict the next
/// two symbols, with primed copies breaking up loops of odd origin.
/// If `merge_naa` is set, n'_aa is folded into n_aa, which breaks the
/// loop-image axiom (a ∈ L_{n_aa} but ψ(a) = α is not idempotent).
pub fn good_psi6(merge_naa: bool) -> OrderedAutomaton {
    let mut transitions = vec![
        ("n_aa", 'a', "n_ab"),
        ("n_aa", 'a', "n'_aa"),
        ("n'_aa", 'a', "n_aa"),
        ("n'_aa", 'a', "n_ab"),
        ("n_ab", 'a', "n_bb"),
        ("n_ab", 'a', "n_ba"),
        ("n_ab", 'a', "f"),
        ("n_bb", 'b', "n'_bb"),
        ("n'_bb", 'b', "n_bb"),
        ("n'_bb", 'b', "n_ba"),
        ("n'_bb", 'b', "f"),
        ("n_bb", 'b', "n_ba"),
        ("n_bb", 'b', "f"),
        ("n_ba", 'b', "n_ab"),
        ("n_ba", 'b', "n_aa"),
    ];
    for q in ["n_aa", "n_ba", "n_ab", "n_bb", "f"] {
        transitions.push(("ι", 'a', q));
        transitions.push(("ι", 'b', q));
    }
    let mut states = vec![
        ("n'_aa", 0),
        ("n'_bb", 1),
        ("n_aa", 2),
        ("n_ba", 3),
        ("n_ab", 4),
        ("n_bb", 5),
        ("f", 6),
        ("ι", 7),
    ];
    if merge_naa {
        states.retain(|(n, _)| *n != "n'_aa");
        for (p, _, q) in transitions.iter_mut() {
            if *p == "n'_aa" {
                *p = "n_aa";
            }
            if *q == "n'_aa" {
                *q = "n_aa";
            }
        }
        transitions.sort();
        transitions.dedup();
    }
    OrderedAutomaton::build(
        &states,
        &['a', 'b'],
        &transitions,
        "ι",
        &["f"],
        &["n_aa", "n_ab", "n_bb", "n_ba"],
    )
    .unwrap()
}

/// All words of length 1..=max over the morphism's alphabet.
pub fn words_up_to(phi: &Morphism, max: usize) -> Vec<Vec<char>> {
    let mut out: Vec<Vec<char>> = Vec::new();
    let mut level: Vec<Vec<char>> = vec![Vec::new()];
    for _ in 0..max {
        let mut next = Vec::new();
        for w in &level {
            for &a in phi.alphabet() {
                let mut w2 = w.clone();
                w2.push(a);
                next.push(w2);
            }
        }
        out.extend(next.iter().cloned());
        level = next;
    }
    out
}
