use super::*;
use crate::algebra::{Elem, FiniteSemigroup, Morphism};
use crate::automaton::Bounds;
use crate::testutil::*;
use alloc::vec;

fn bounds(max_len: usize) -> Bounds {
    Bounds {
        max_len,
        max_u: 3,
        max_v: 3,
    }
}

fn single_letter(phi: &Morphism, a: char) -> Morphism {
    Morphism::new(phi.semigroup().clone(), &[(a, phi.letter(a).unwrap())]).unwrap()
}

#[test]
fn block_letters_are_distinct() {
    let pool: Vec<char> = (0..80).map(block_letter).collect();
    let set: BTreeSet<char> = pool.iter().copied().collect();
    assert_eq!(set.len(), pool.len());
    assert_eq!(block_letter(0), 'α');
    assert_eq!(block_letter(1), 'β');
}

#[test]
fn chooses_expected_cases() {
    // pow4: S·s² = {s³, s⁴} is the smallest proper left ideal
    match choose_case(&pow4()).unwrap() {
        CaseDecision::LeftIdeal {
            c,
            inner,
            blocks,
            derived,
        } => {
            assert_eq!(pow4().semigroup().name(c), "s²");
            assert_eq!(inner.alphabet(), &['a']);
            let got: Vec<(String, String)> = derived
                .iter()
                .map(|d| {
                    (
                        pow4().semigroup().name(d.elem).to_string(),
                        d.witness.iter().collect(),
                    )
                })
                .collect();
            assert_eq!(
                got,
                vec![
                    ("s³".to_string(), "ab".to_string()),
                    ("s⁴".to_string(), "bb".to_string())
                ]
            );
            assert_eq!(blocks.alphabet(), &['α', 'β']);
            assert_eq!(blocks.letter('α').unwrap(), Elem(2));
        }
        other => panic!("expected LeftIdeal, got {other:?}"),
    }
    // ra2: left-zero, so x·S = {x} but S·x = S
    match choose_case(&ra2()).unwrap() {
        CaseDecision::RightIdeal { c, derived, .. } => {
            assert_eq!(ra2().semigroup().name(c), "α");
            assert_eq!(derived.len(), 1);
            assert_eq!(derived[0].witness, vec!['a', 'a']);
        }
        other => panic!("expected RightIdeal, got {other:?}"),
    }
    // psi6: S·α = {αα, αβ, βα, ββ} is proper; ties on |S·c| break to α
    match choose_case(&psi6()).unwrap() {
        CaseDecision::LeftIdeal { c, derived, .. } => {
            assert_eq!(psi6().semigroup().name(c), "α");
            assert_eq!(derived.len(), 4);
        }
        other => panic!("expected LeftIdeal, got {other:?}"),
    }
    assert!(matches!(
        choose_case(&klein()).unwrap(),
        CaseDecision::Group
    ));
}

#[test]
fn group_base_tracks_translations() {
    let phi = klein();
    let sg = phi.semigroup();
    let m = build_base_group(&phi).unwrap();
    assert_eq!(m.state_count(), 5);
    assert!(m.is_deterministic() && m.is_complete());
    assert_eq!(m.name(m.initial()), "ι");
    // from state s, the word w leads to s·phi(w); from ι, to phi(w)
    for w in words_up_to(&phi, 5) {
        let run = |mut q: usize| {
            for &a in &w {
                q = m.successors(q, a).next().unwrap();
            }
            q
        };
        assert_eq!(run(m.initial()), phi.eval(&w).unwrap().0);
        for s in sg.elements() {
            assert_eq!(run(s.0), sg.mul(s, phi.eval(&w).unwrap()).0);
        }
    }
    // the restricted loop/path languages map onto single elements s⁻¹t
    let all: BTreeSet<usize> = (0..m.state_count()).collect();
    for s in sg.elements() {
        for t in sg.elements() {
            let img = m.image_of_restricted_language(&phi, s.0, &all, t.0);
            // in the Klein group every element is its own inverse
            assert_eq!(img, BTreeSet::from([sg.mul(s, t)]));
        }
    }
    let report = m.verify_goodness(&phi, bounds(6));
    assert!(report.is_weakly_good(), "{report:?}");
}

#[test]
fn group_base_rejects_non_groups() {
    assert_eq!(build_base_group(&ra2()), Err(SynthesisError::NotAGroup));
}

#[test]
fn cyclic_group_base_is_weakly_good() {
    let table = (0..3usize)
        .map(|i| (0..3).map(|j| (i + j + 1) % 3).collect())
        .collect::<Vec<Vec<_>>>();
    let sg = FiniteSemigroup::validate_unnamed(&table).unwrap();
    let phi = Morphism::new(sg, &[('a', Elem(0))]).unwrap();
    let m = build_base_group(&phi).unwrap();
    assert_eq!(m.state_count(), 4);
    assert!(m.verify_goodness(&phi, bounds(6)).is_weakly_good());
}

#[test]
fn single_image_base_counts_modulo_idempotent_power() {
    // a ↦ s with s⁵ = s³: k = 3, n = 4, so 7 states with the wrap 6 -> 3
    let phi = single_letter(&pow4(), 'a');
    let m = build_base_single_image(&phi).unwrap();
    assert_eq!(m.state_count(), 7);
    assert!(m.is_deterministic() && m.is_complete());
    assert_eq!(m.successors(6, 'a').next(), Some(3));
    assert_eq!(m.rank(0), 6);
    let mut q = m.initial();
    for len in 1..=12usize {
        q = m.successors(q, 'a').next().unwrap();
        let expect = if len <= 6 { len } else { 3 + (len - 3) % 4 };
        assert_eq!(q, expect, "after {len} letters");
    }
    assert!(m.verify_goodness(&phi, bounds(8)).is_weakly_good());
}

#[test]
fn single_image_base_for_idempotent_is_two_states() {
    let phi = single_letter(&ra2(), 'a').restricted_to_generated();
    let m = build_base_single_image(&phi).unwrap();
    assert_eq!(m.state_count(), 2);
    assert_eq!(m.successors(1, 'a').next(), Some(1));
    assert!(m.verify_goodness(&phi, bounds(6)).is_weakly_good());
}

#[test]
fn single_image_base_rejects_multiple_images() {
    assert_eq!(
        build_base_single_image(&pow4()),
        Err(SynthesisError::MultipleImages)
    );
}

#[test]
fn left_composition_runs_follow_block_boundaries() {
    let phi = pow4();
    let c = phi.semigroup().element_by_name("s²").unwrap();
    let weak = build_inductive_left(&phi, c).unwrap();
    // "abbaab" factors into the blocks (ab)(baab); the unique accepting run
    // sits in a block-automaton state exactly at the block boundaries
    let runs = weak
        .accepting_runs_finite(&"abbaab".chars().collect::<Vec<_>>())
        .unwrap();
    assert_eq!(runs.len(), 1);
    let names: Vec<&str> = runs[0].states.iter().map(|&q| weak.name(q)).collect();
    assert_eq!(
        names,
        vec![
            "ι",
            "(ι,s,0)",
            "s³",
            "(s³,s²,0)",
            "(s³,s³,1)",
            "(s³,s⁴,f)",
            "f"
        ]
    );
    let report = weak.verify_goodness(&phi, bounds(6));
    assert!(report.is_weakly_good(), "{report:?}");
}

#[test]
fn left_composition_rejects_full_ideal() {
    // in a left-zero semigroup S·α = S
    let phi = ra2();
    assert!(matches!(
        build_inductive_left(&phi, Elem(0)),
        Err(SynthesisError::CaseInapplicable)
    ));
}

#[test]
fn right_composition_is_weakly_good() {
    let phi = ra2();
    let weak = build_inductive_right(&phi, Elem(0)).unwrap();
    // 3 block states + (3+1)·2·3 triples + 3 head states + the initial state
    assert_eq!(weak.state_count(), 31);
    let report = weak.verify_goodness(&phi, bounds(6));
    assert!(report.is_weakly_good(), "{report:?}");
}

#[test]
fn build_good_fixtures_pass_goodness() {
    for (name, phi) in all_fixtures() {
        let (good, report) = build_good(&phi).unwrap();
        let check = good.verify_goodness(&phi, bounds(6));
        assert!(check.is_good(), "{name}: {check:?}");
        assert_eq!(report.states_good, good.state_count(), "{name}");
        assert!(report.states_reduced <= report.states_weak, "{name}");
        // the automaton carrying the optimized heights is weakly good, so
        // splits along its unique runs are well defined
        let check = report.split_automaton.verify_goodness(&phi, bounds(6));
        assert!(check.is_weakly_good(), "{name}: {check:?}");
    }
}

#[test]
fn klein_good_automaton_has_six_states() {
    let (good, report) = build_good(&klein()).unwrap();
    assert_eq!(good.state_count(), 6);
    assert_eq!(report.case, CaseKind::Group);
    assert_eq!(report.optimized_height, 6);
}

#[test]
fn pow4_report_matches_case_tree() {
    let (good, report) = build_good(&pow4()).unwrap();
    assert_eq!(report.case, CaseKind::LeftIdeal);
    assert_eq!(report.chosen_c.as_deref(), Some("s²"));
    assert_eq!(report.children.len(), 2);
    // inner: a ↦ s alone regenerates the whole chain, a single-image case
    assert_eq!(report.children[0].case, CaseKind::SingleImage);
    assert_eq!(report.children[0].states_good, 8);
    // blocks: {s³, s⁴} is a 2-element group
    assert_eq!(report.children[1].case, CaseKind::Group);
    assert_eq!(report.children[1].states_good, 4);
    assert_eq!(
        report.derived_letters,
        vec![
            ('α', "s³".to_string(), "ab".to_string()),
            ('β', "s⁴".to_string(), "bb".to_string())
        ]
    );
    // optimized height is the sum of the children's state counts
    let (h1, h2) = (
        report.children[0].states_good,
        report.children[1].states_good,
    );
    assert_eq!(report.optimized_height, h1 + h2);
    assert!(good.state_count() <= report.states_weak);
}

#[test]
fn psi6_recursion_descends_through_right_ideals() {
    let (_, report) = build_good(&psi6()).unwrap();
    assert_eq!(report.case, CaseKind::LeftIdeal);
    assert_eq!(report.chosen_c.as_deref(), Some("α"));
    // blocks form a 4-element left-zero band, peeled by right ideals
    let mut r = &report.children[1];
    let mut sizes = vec![r.semigroup_size];
    while !r.children.is_empty() {
        assert_eq!(r.case, CaseKind::RightIdeal);
        r = &r.children[0];
        sizes.push(r.semigroup_size);
    }
    assert_eq!(sizes, vec![4, 3, 2, 1]);
    assert_eq!(r.case, CaseKind::SingleImage);
}

#[test]
fn heights_are_monotone_in_rank() {
    for (name, phi) in all_fixtures() {
        let (_, report) = build_good(&phi).unwrap();
        let sp = &report.split_automaton;
        let by_rank = sp.states_by_rank();
        let hs: Vec<usize> = by_rank
            .iter()
            .map(|&q| report.heights[sp.name(q)])
            .collect();
        assert!(hs.windows(2).all(|w| w[0] <= w[1]), "{name}: {hs:?}");
        assert_eq!(
            report.optimized_height,
            report.heights[sp.name(sp.initial())],
            "{name}"
        );
        assert_eq!(report.optimized_height, *hs.last().unwrap(), "{name}");
    }
}

#[test]
fn right_composition_case_bound_on_height() {
    let (_, report) = build_good(&ra2()).unwrap();
    assert_eq!(report.case, CaseKind::RightIdeal);
    let (h1, h2) = (
        report.children[0].states_good,
        report.children[1].states_good,
    );
    assert!(report.optimized_height <= h1 + h2 + 2);
}

#[test]
fn every_word_has_exactly_one_run_in_built_automata() {
    for (name, phi) in all_fixtures() {
        let (good, _) = build_good(&phi).unwrap();
        for w in words_up_to(&phi, 5) {
            assert_eq!(good.count_runs_finite(&w).unwrap(), 1, "{name}: {w:?}");
        }
    }
}
