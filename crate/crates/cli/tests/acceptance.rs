//! End-to-end verification suite: one pass/fail line per criterion.

use std::collections::BTreeSet;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use seminaut::algebra::{Elem, Morphism, Side};
use seminaut::automaton::{Bounds, OrderedAutomaton, UpVerdict, UpWord};
use seminaut::ramsey::{
    default_heights, optimized_heights, split_word, tree_from_split, verify_fact_tree,
    verify_ramsey, Split,
};
use seminaut::rexpr::{
    check_good_expression, count_parses, finite_expressions, match_up_branch, omega_expression,
    parse_to_fact_tree, parse_unique, RExpr,
};
use seminaut::synthesis::{build_base_group, build_base_single_image, build_good, BuildReport};
use seminaut_cli::io::AutomatonFile;
use seminaut_cli::{fixtures, gen, io};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn fail(msg: impl Into<String>) -> Outcome {
    Err(msg.into())
}

/// All nonempty words over `alphabet` up to length `max_len`.
fn words_up_to(alphabet: &[char], max_len: usize) -> Vec<Vec<char>> {
    let mut out = Vec::new();
    let mut layer: Vec<Vec<char>> = vec![Vec::new()];
    for _ in 0..max_len {
        let mut next = Vec::new();
        for w in &layer {
            for &a in alphabet {
                let mut w2 = w.clone();
                w2.push(a);
                next.push(w2);
            }
        }
        out.extend(next.iter().cloned());
        layer = next;
    }
    out
}

/// All ultimately periodic words with prefix up to `max_u`, period 1..=`max_v`.
fn up_words(alphabet: &[char], max_u: usize, max_v: usize) -> Vec<UpWord> {
    let mut prefixes: Vec<Vec<char>> = vec![Vec::new()];
    prefixes.extend(words_up_to(alphabet, max_u));
    let periods = words_up_to(alphabet, max_v);
    let mut out = Vec::new();
    for u in &prefixes {
        for v in &periods {
            out.push(UpWord::new(u.clone(), v.clone()).expect("nonempty period"));
        }
    }
    out
}

fn random_word(alphabet: &[char], max_len: usize, rng: &mut ChaCha8Rng) -> Vec<char> {
    let len = rng.gen_range(1..=max_len);
    (0..len).map(|_| *alphabet.choose(rng).unwrap()).collect()
}

/// The automaton each fixture's expressions are computed on: the reduced
/// synthesized automaton where elimination is feasible, the compact
/// hand-built one for the six-element fixture (whose synthesized automaton
/// has thousands of states).
fn expression_automaton(name: &str, phi: &Morphism) -> OrderedAutomaton {
    if name == "psi6" {
        fixtures::good_psi6(false)
    } else {
        build_good(phi).expect("fixtures build").0.reduce()
    }
}

// ---------------------------------------------------------------------------
// criteria

/// Fixture algebra: power profile, ideals, derived alphabet, idempotents.
fn criterion_1() -> Outcome {
    let pow4 = fixtures::pow4();
    let sg = pow4.semigroup();
    let s = sg.element_by_name("s").unwrap();
    let s2 = sg.element_by_name("s²").unwrap();
    let p = sg.power_profile(s);
    if (p.k, p.ell, p.n) != (3, 2, 4) {
        return fail(format!(
            "power profile of s is ({}, {}, {})",
            p.k, p.ell, p.n
        ));
    }
    let ideal = sg.left_ideal(s2);
    let expect: BTreeSet<Elem> = ["s³", "s⁴"]
        .iter()
        .map(|n| sg.element_by_name(n).unwrap())
        .collect();
    if ideal != expect {
        return fail(format!("left ideal of s² is {ideal:?}"));
    }
    let (sub, _) = sg.restrict(&ideal).ok_or("ideal not product-closed")?;
    if !sub.is_group() {
        return fail("restriction to {s³, s⁴} is not a group");
    }
    let derived: BTreeSet<Elem> = pow4
        .derived_alphabet(s2, Side::Left)
        .map_err(|e| format!("derived alphabet: {e:?}"))?
        .into_iter()
        .map(|d| d.elem)
        .collect();
    if derived != expect {
        return fail(format!("derived alphabet for s² is {derived:?}"));
    }
    let psi6 = fixtures::psi6();
    let idem: BTreeSet<String> = psi6
        .semigroup()
        .idempotents()
        .into_iter()
        .map(|e| psi6.semigroup().name(e).to_string())
        .collect();
    let expect_idem: BTreeSet<String> = ["αα", "αβ", "βα", "ββ"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    if idem != expect_idem {
        return fail(format!("idempotents of the six-element fixture: {idem:?}"));
    }
    Ok("profile (3,2,4), ideal {s³,s⁴} is a group, 4 idempotents".to_string())
}

/// Base-case shapes: group automaton size, single-image wrap edge.
fn criterion_2() -> Outcome {
    let klein = fixtures::klein();
    let a = build_base_group(&klein).map_err(|e| format!("group base: {e:?}"))?;
    if a.state_count() != 5 {
        return fail(format!("group base has {} states", a.state_count()));
    }
    let sg = fixtures::pow4().semigroup().clone();
    let s = sg.element_by_name("s").unwrap();
    let phi = Morphism::new(sg, &[('a', s), ('b', s)]).unwrap();
    let b = build_base_single_image(&phi).map_err(|e| format!("single image: {e:?}"))?;
    if b.state_count() != 7 {
        return fail(format!("single-image base has {} states", b.state_count()));
    }
    let six = b.state_by_name("6").ok_or("no state named 6")?;
    let three = b.state_by_name("3").ok_or("no state named 3")?;
    if !b.successors(six, 'a').any(|q| q == three) {
        return fail("missing wrap edge 6 → 3");
    }
    Ok("group base 5 states; single-image base 7 states with wrap 6 → 3".to_string())
}

/// Synthesized automata are good: exact finite checks, exhaustive
/// ultimately-periodic checks at bounds (3, 3).
fn criterion_3() -> Outcome {
    let b = Bounds {
        max_len: 8,
        max_u: 3,
        max_v: 3,
    };
    let mut sizes = Vec::new();
    for (name, phi) in fixtures::all() {
        let (good, _) = build_good(&phi).map_err(|e| format!("{name}: build {e:?}"))?;
        let report = good.verify_goodness(&phi, b);
        if !report.is_good() {
            return fail(format!(
                "{name}: violations g1={:?} g2={:?} g3={:?} g4={:?}",
                report.g1, report.g2, report.g3, report.g4
            ));
        }
        sizes.push(format!("{name}={}", good.state_count()));
    }
    Ok(format!(
        "all four synthesized automata good ({})",
        sizes.join(", ")
    ))
}

/// Hand-built automata: the two-letter one is good; folding the primed
/// a-loop state breaks the loop-image axiom with witness "a".
fn criterion_4() -> Outcome {
    let b = Bounds {
        max_len: 8,
        max_u: 3,
        max_v: 3,
    };
    let left = io::load_json::<AutomatonFile>(Path::new("../../fixtures/ra2_automaton.json"))
        .map_err(|e| format!("load: {e:#}"))?
        .to_automaton()
        .map_err(|e| format!("decode: {e:#}"))?;
    let report = left.verify_goodness(&fixtures::ra2(), b);
    if !report.is_good() {
        return fail("hand-built two-letter automaton is not good");
    }
    let merged = io::load_json::<AutomatonFile>(Path::new("../../fixtures/psi6_automaton_merged.json"))
        .map_err(|e| format!("load: {e:#}"))?
        .to_automaton()
        .map_err(|e| format!("decode: {e:#}"))?;
    let report = merged.verify_goodness(&fixtures::psi6(), b);
    if report.g2.is_empty() {
        return fail("merged automaton unexpectedly satisfies the loop-image axiom");
    }
    let has_witness_a = report.g2.iter().any(|v| {
        matches!(v, seminaut::automaton::Violation::LoopImage { witness, .. }
            if witness == &['a'])
    });
    if !has_witness_a {
        return fail(format!(
            "loop-image violations lack witness \"a\": {:?}",
            report.g2
        ));
    }
    Ok("hand-built automaton good; merged mutation fails loop-image on \"a\"".to_string())
}

fn check_split(
    split: &Split,
    phi: &Morphism,
    w: &[char],
    level_bound: usize,
    what: &str,
) -> Result<(), String> {
    verify_ramsey(split, phi, w).map_err(|v| format!("{what}: not Ramsey: {v:?}"))?;
    let max = split.levels.iter().copied().max().unwrap_or(0);
    if max > level_bound {
        return Err(format!("{what}: level {max} exceeds bound {level_bound}"));
    }
    Ok(())
}

/// Ramsey splits on 1000 random words per fixture, with both the rank-order
/// heights (levels bounded by the state count) and the construction's
/// optimized heights (bounded by H₁ + H₂ + 2 over the children).
fn criterion_5() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for (name, phi) in fixtures::all() {
        let (good, report) = build_good(&phi).map_err(|e| format!("{name}: {e:?}"))?;
        let dh = default_heights(&good);
        let oh = optimized_heights(&report, &report.split_automaton)
            .map_err(|e| format!("{name}: heights {e:?}"))?;
        if let [c1, c2] = report.children.as_slice() {
            let bound = c1.states_good + c2.states_good + 2;
            if report.optimized_height > bound {
                return fail(format!(
                    "{name}: optimized height {} exceeds {bound}",
                    report.optimized_height
                ));
            }
        }
        for _ in 0..1000 {
            let w = random_word(phi.alphabet(), 200, &mut rng);
            let s = split_word(&good, &dh, &w).map_err(|e| format!("{name}: split {e:?}"))?;
            check_split(&s, &phi, &w, good.state_count(), name)?;
            let s = split_word(&report.split_automaton, &oh, &w)
                .map_err(|e| format!("{name}: optimized split {e:?}"))?;
            check_split(&s, &phi, &w, report.optimized_height, name)?;
        }
    }
    Ok("4000 words split Ramsey under both height assignments".to_string())
}

/// Factorization trees from splits and from expression parses all verify.
fn criterion_6() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut trees = 0usize;
    for (name, phi) in fixtures::all() {
        let (good, _) = build_good(&phi).map_err(|e| format!("{name}: {e:?}"))?;
        let dh = default_heights(&good);
        for _ in 0..1000 {
            let w = random_word(phi.alphabet(), 200, &mut rng);
            let s = split_word(&good, &dh, &w).map_err(|e| format!("{name}: split {e:?}"))?;
            let t = tree_from_split(&w, &s, &phi).map_err(|e| format!("{name}: tree {e:?}"))?;
            verify_fact_tree(&t, &phi, &w)
                .map_err(|v| format!("{name}: split tree invalid: {v:?}"))?;
            trees += 1;
        }
        let a = expression_automaton(name, &phi);
        let exprs = finite_expressions(&a, &phi).map_err(|e| format!("{name}: expr {e:?}"))?;
        for w in words_up_to(phi.alphabet(), 8) {
            let value = phi.eval(&w).unwrap();
            let e = exprs
                .get(&value)
                .ok_or_else(|| format!("{name}: no class expr"))?;
            let p = parse_unique(e, &w).map_err(|e| format!("{name}: parse {e:?}"))?;
            let t = parse_to_fact_tree(&p, &phi);
            verify_fact_tree(&t, &phi, &w)
                .map_err(|v| format!("{name}: parse tree invalid: {v:?}"))?;
            trees += 1;
        }
    }
    Ok(format!("{trees} factorization trees verified"))
}

fn check_expressions(
    name: &str,
    a: &OrderedAutomaton,
    phi: &Morphism,
    max_len: usize,
    max_u: usize,
    max_v: usize,
) -> Result<(), String> {
    let exprs = finite_expressions(a, phi).map_err(|e| format!("{name}: expr {e:?}"))?;
    for (s, e) in &exprs {
        let check = check_good_expression(e, phi, max_len);
        if !check.is_good() {
            return Err(format!("{name}: expression for {s:?} not good: {check:?}"));
        }
    }
    for w in words_up_to(phi.alphabet(), max_len) {
        let value = phi.eval(&w).unwrap();
        for (s, e) in &exprs {
            let n = count_parses(e, &w);
            let want = if *s == value { 1 } else { 0 };
            if n != want {
                return Err(format!(
                    "{name}: {:?} has {n} parses in the class of {s:?}",
                    w.iter().collect::<String>()
                ));
            }
        }
    }
    let omega = omega_expression(a, phi).map_err(|e| format!("{name}: omega {e:?}"))?;
    let branches: Vec<(&RExpr, &RExpr)> = omega
        .union_branches()
        .into_iter()
        .map(|b| match b.view() {
            seminaut::rexpr::ExprView::Concat(h, tail) => match tail.view() {
                seminaut::rexpr::ExprView::Omega(body) => Ok((h, body)),
                _ => Err(format!("{name}: branch tail is not an ω-power")),
            },
            _ => Err(format!("{name}: branch is not head · ω-power")),
        })
        .collect::<Result<_, _>>()?;
    for w in up_words(phi.alphabet(), max_u, max_v) {
        let mut ones = 0usize;
        for (h, body) in &branches {
            match match_up_branch(h, body, &w, phi) {
                UpVerdict::ExactlyOne => ones += 1,
                UpVerdict::Zero => {}
                v => {
                    return Err(format!(
                        "{name}: {} matches a branch with verdict {v:?}",
                        io::up_word_text(&w)
                    ))
                }
            }
        }
        if ones != 1 {
            return Err(format!(
                "{name}: {} matches {ones} branches",
                io::up_word_text(&w)
            ));
        }
    }
    Ok(())
}

/// Expressions partition the finite words by image, parse uniquely, pass the
/// goodness check, and the ω-expression matches every ultimately periodic
/// word in exactly one branch.
fn criterion_7() -> Outcome {
    for (name, phi) in fixtures::all() {
        let a = expression_automaton(name, &phi);
        check_expressions(name, &a, &phi, 8, 3, 3)?;
    }
    Ok("4 fixtures: partition of Σ^{≤8}, unique parses, unique ω-branches".to_string())
}

fn random_automaton(rng: &mut ChaCha8Rng) -> OrderedAutomaton {
    loop {
        let n = rng.gen_range(1..=6);
        let letters: Vec<char> = ['a', 'b'][..rng.gen_range(1..=2)].to_vec();
        let mut ranks: Vec<i64> = (0..n as i64).collect();
        ranks.shuffle(rng);
        let names: Vec<String> = (0..n).map(|i| format!("q{i}")).collect();
        let mut transitions = Vec::new();
        for p in 0..n {
            for &a in &letters {
                for q in 0..n {
                    if rng.gen_bool(0.35) {
                        transitions.push((p, a, q));
                    }
                }
            }
        }
        let finals: BTreeSet<usize> = (0..n).filter(|_| rng.gen_bool(0.4)).collect();
        let initial = rng.gen_range(0..n);
        if let Ok(a) = OrderedAutomaton::new(
            names,
            ranks,
            letters,
            &transitions,
            initial,
            finals,
            BTreeSet::new(),
        ) {
            return a;
        }
    }
}

/// The product-based ambiguity check agrees with brute-force run counting.
fn criterion_8() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut ambiguous = 0usize;
    for i in 0..20 {
        let a = random_automaton(&mut rng);
        let words = words_up_to(a.alphabet(), 6);
        let brute = words.iter().find(|w| a.count_runs_finite(w).unwrap() >= 2);
        match a.check_unambiguous_finite() {
            Ok(()) => {
                if let Some(w) = brute {
                    return fail(format!(
                        "automaton {i}: missed ambiguous word {:?}",
                        w.iter().collect::<String>()
                    ));
                }
            }
            Err(witness) => {
                ambiguous += 1;
                if a.count_runs_finite(&witness).unwrap() < 2 {
                    return fail(format!("automaton {i}: bogus witness {witness:?}"));
                }
                if let (Some(w), true) = (brute, witness.len() > 6) {
                    return fail(format!(
                        "automaton {i}: witness longer than brute-force find {w:?}"
                    ));
                }
            }
        }
    }
    Ok(format!("20 random automata agree ({ambiguous} ambiguous)"))
}

/// One generated instance through the whole pipeline at reduced bounds.
fn pipeline(phi: &Morphism, good: &OrderedAutomaton, report: &BuildReport) -> Result<(), String> {
    let check = good.verify_goodness(
        phi,
        Bounds {
            max_len: 6,
            max_u: 2,
            max_v: 2,
        },
    );
    if !check.is_good() {
        return Err(format!(
            "not good: {:?}",
            check.g1.first().or(check.g2.first())
        ));
    }
    let dh = default_heights(good);
    let oh = optimized_heights(report, &report.split_automaton)
        .map_err(|e| format!("heights: {e:?}"))?;
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..100 {
        let w = random_word(phi.alphabet(), 40, &mut rng);
        let s = split_word(good, &dh, &w).map_err(|e| format!("split: {e:?}"))?;
        check_split(&s, phi, &w, good.state_count(), "default")?;
        let s = split_word(&report.split_automaton, &oh, &w)
            .map_err(|e| format!("optimized split: {e:?}"))?;
        check_split(&s, phi, &w, report.optimized_height, "optimized")?;
    }
    check_expressions("instance", &good.reduce(), phi, 6, 2, 2)
}

/// Fifty generated morphisms pass goodness, splits, and expressions.
fn criterion_9() -> Outcome {
    // instances whose synthesized automaton is too large for the exact
    // checks are re-rolled deterministically, as in the sweep command
    const STATE_CAP: usize = 150;
    for i in 0..50u64 {
        let mut attempt = 0u64;
        let (phi, good, report, seed) = loop {
            let seed = (1 + i)
                .wrapping_mul(0x9e37_79b9_7f4a_7c15)
                .wrapping_add(attempt);
            attempt += 1;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let points = rng.gen_range(2..=3);
            let gens = rng.gen_range(1..=3);
            let Ok(phi) = gen::gen_morphism(points, gens, seed, 6) else {
                continue;
            };
            let Ok((good, report)) = build_good(&phi) else {
                continue;
            };
            if good.state_count() <= STATE_CAP {
                break (phi, good, report, seed);
            }
        };
        pipeline(&phi, &good, &report).map_err(|e| format!("instance {i} (seed {seed}): {e}"))?;
    }
    Ok("50 generated morphisms passed the full pipeline".to_string())
}

#[test]
fn acceptance() {
    let criteria: Vec<Criterion> = vec![
        ("criterion 1", criterion_1),
        ("criterion 2", criterion_2),
        ("criterion 3", criterion_3),
        ("criterion 4", criterion_4),
        ("criterion 5", criterion_5),
        ("criterion 6", criterion_6),
        ("criterion 7", criterion_7),
        ("criterion 8", criterion_8),
        ("criterion 9", criterion_9),
    ];
    let mut failures = Vec::new();
    for (label, run) in criteria {
        let outcome =
            catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|_| Err("panicked".to_string()));
        match outcome {
            Ok(detail) => println!("{label}: pass — {detail}"),
            Err(why) => {
                println!("{label}: FAIL — {why}");
                failures.push(label);
            }
        }
    }
    assert!(failures.is_empty(), "failed: {failures:?}");
}
