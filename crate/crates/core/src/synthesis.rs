//! Inductive construction of a good automaton for an arbitrary morphism:
//! case dispatch on the ideal structure of the image semigroup, two base
//! cases (group, single image) and two inductive compositions, finished by
//! reduction and completion at every level.

use crate::algebra::{AlgebraError, DerivedLetter, Elem, Morphism, PowerProfile, Side};
use crate::automaton::OrderedAutomaton;
use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

/// Errors raised during automaton synthesis.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SynthesisError {
    /// The group base case needs a group.
    NotAGroup,
    /// The single-image base case needs exactly one letter image.
    MultipleImages,
    /// The requested inductive case does not apply to this morphism.
    CaseInapplicable,
    /// An underlying algebra operation failed.
    Algebra(AlgebraError),
}

impl fmt::Display for SynthesisError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SynthesisError::NotAGroup => write!(f, "image semigroup is not a group"),
            SynthesisError::MultipleImages => write!(f, "letters map to more than one element"),
            SynthesisError::CaseInapplicable => write!(f, "inductive case does not apply"),
            SynthesisError::Algebra(e) => write!(f, "{e}"),
        }
    }
}

impl From<AlgebraError> for SynthesisError {
    fn from(e: AlgebraError) -> Self {
        SynthesisError::Algebra(e)
    }
}

#[cfg(test)]
impl std::error::Error for SynthesisError {}

/// The letter used for the i-th block element: Greek first (matching the
/// usual presentation of block alphabets), then capitals and digits.
pub fn block_letter(i: usize) -> char {
    let greek = ('\u{3b1}'..='\u{3c9}').filter(|&c| c != 'ς');
    greek
        .chain('A'..='Z')
        .chain('0'..='9')
        .chain('a'..='z')
        .nth(i)
        .expect("block alphabet pool exhausted")
}

/// Which construction applies to a morphism (whose target has already been
/// restricted to the subsemigroup generated by the letter images), along
/// with the sub-problems of the inductive cases.
#[derive(Debug, Clone)]
pub enum CaseDecision {
    /// The image semigroup is a group.
    Group,
    /// All letters share one image, with its power structure.
    SingleImage {
        /// Power profile of the unique letter image.
        profile: PowerProfile,
    },
    /// Some image element `c` has a proper left ideal `Sc`: words factorize
    /// into blocks ending with a `c`-letter.
    LeftIdeal {
        /// The chosen element.
        c: Elem,
        /// The morphism restricted to the letters not mapping to `c`.
        inner: Morphism,
        /// The block morphism: fresh letters for the block values.
        blocks: Morphism,
        /// Block values with witness words.
        derived: Vec<DerivedLetter>,
    },
    /// Some image element `c` has a proper right ideal `cS`: words factorize
    /// into blocks starting with a `c`-letter.
    RightIdeal {
        /// The chosen element.
        c: Elem,
        /// The morphism restricted to the letters not mapping to `c`.
        inner: Morphism,
        /// The block morphism: fresh letters for the block values.
        blocks: Morphism,
        /// Block values with witness words.
        derived: Vec<DerivedLetter>,
    },
}

/// The case tag alone, for reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CaseKind {
    /// Group base case.
    Group,
    /// Single-image base case.
    SingleImage,
    /// Proper left ideal inductive case.
    LeftIdeal,
    /// Proper right ideal inductive case.
    RightIdeal,
}

impl fmt::Display for CaseKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CaseKind::Group => write!(f, "Group"),
            CaseKind::SingleImage => write!(f, "SingleImage"),
            CaseKind::LeftIdeal => write!(f, "LeftIdeal"),
            CaseKind::RightIdeal => write!(f, "RightIdeal"),
        }
    }
}

/// What happened at one level of the construction: the chosen case, sizes
/// before/after reduction and completion, sub-alphabet data, child reports,
/// and an optimized height assignment together with the automaton it is
/// assigned on.
#[derive(Debug, Clone, PartialEq)]
pub struct BuildReport {
    /// Which construction was used.
    pub case: CaseKind,
    /// Name of the chosen ideal element, for the inductive cases.
    pub chosen_c: Option<String>,
    /// Power profile, for the single-image base case.
    pub profile: Option<PowerProfile>,
    /// Size of the (generated) target semigroup at this level.
    pub semigroup_size: usize,
    /// Number of distinct letter images at this level.
    pub image_size: usize,
    /// States before reduction.
    pub states_weak: usize,
    /// States after reduction.
    pub states_reduced: usize,
    /// States of the final good automaton (reduction plus fresh sink).
    pub states_good: usize,
    /// Block letters: (letter, element name, witness word).
    pub derived_letters: Vec<(char, String, String)>,
    /// Reports of the recursive sub-builds (inner alphabet, then blocks).
    pub children: Vec<BuildReport>,
    /// The automaton the optimized heights are assigned on: the good
    /// automaton itself at base levels, the reduced automaton without the
    /// fresh sink at inductive levels (the sink has no safe height within
    /// the optimized bound, so splits there use the reduced automaton).
    pub split_automaton: OrderedAutomaton,
    /// Height of each state of `split_automaton` (monotone in rank).
    pub heights: BTreeMap<String, usize>,
    /// The maximal height (attained at the initial state).
    pub optimized_height: usize,
}

/// Picks the construction for `phi`, assuming its target has been restricted
/// to the subsemigroup generated by the letter images. Preference order:
/// single image, proper left ideal (minimal `|Sc|`, ties by element index),
/// proper right ideal (same rule on `|cS|`), group. One of them always
/// applies: a finite semigroup with no proper one-sided ideals is a group.
pub fn choose_case(phi: &Morphism) -> Result<CaseDecision, SynthesisError> {
    let sg = phi.semigroup();
    let image = phi.image();
    if image.len() == 1 {
        let s = *image.iter().next().unwrap();
        return Ok(CaseDecision::SingleImage {
            profile: sg.power_profile(s),
        });
    }
    if let Some(c) = pick_ideal(phi, Side::Left) {
        let (inner, blocks, derived) = ideal_subproblems(phi, c, Side::Left)?;
        return Ok(CaseDecision::LeftIdeal {
            c,
            inner,
            blocks,
            derived,
        });
    }
    if let Some(c) = pick_ideal(phi, Side::Right) {
        let (inner, blocks, derived) = ideal_subproblems(phi, c, Side::Right)?;
        return Ok(CaseDecision::RightIdeal {
            c,
            inner,
            blocks,
            derived,
        });
    }
    assert!(sg.is_group(), "no proper one-sided ideal forces a group");
    Ok(CaseDecision::Group)
}

fn pick_ideal(phi: &Morphism, side: Side) -> Option<Elem> {
    let sg = phi.semigroup();
    phi.image()
        .into_iter()
        .filter_map(|c| {
            let size = match side {
                Side::Left => sg.left_ideal(c).len(),
                Side::Right => sg.right_ideal(c).len(),
            };
            (size < sg.len()).then_some((size, c))
        })
        .min()
        .map(|(_, c)| c)
}

fn ideal_subproblems(
    phi: &Morphism,
    c: Elem,
    side: Side,
) -> Result<(Morphism, Morphism, Vec<DerivedLetter>), SynthesisError> {
    let derived = phi.derived_alphabet(c, side)?;
    let (sigma1, _) = phi.split_alphabet(c);
    let inner = phi.restrict_letters(&sigma1.into_iter().collect())?;
    let letter_map: Vec<(char, Elem)> = derived
        .iter()
        .enumerate()
        .map(|(i, d)| (block_letter(i), d.elem))
        .collect();
    let blocks = Morphism::new(phi.semigroup().clone(), &letter_map)?;
    Ok((inner, blocks, derived))
}

/// The group base case: states are the group elements plus a fresh initial
/// state; reading `a` multiplies by `phi(a)`. Deterministic, complete, and
/// weakly good; every loop maps to the unit.
pub fn build_base_group(phi: &Morphism) -> Result<OrderedAutomaton, SynthesisError> {
    let sg = phi.semigroup();
    if !sg.is_group() {
        return Err(SynthesisError::NotAGroup);
    }
    let mut names: Vec<String> = sg.names().to_vec();
    let mut init = String::from("ι");
    while names.contains(&init) {
        init.push('\'');
    }
    names.push(init);
    let iota = names.len() - 1;
    // element index order below the maximal ι
    let ranks: Vec<i64> = (0..names.len() as i64).collect();
    let mut transitions = Vec::new();
    for &a in phi.alphabet() {
        let e = phi.letter(a)?;
        transitions.push((iota, a, e.0));
        for s in sg.elements() {
            transitions.push((s.0, a, sg.mul(s, e).0));
        }
    }
    let body: BTreeSet<usize> = (0..iota).collect();
    Ok(OrderedAutomaton::new(
        names,
        ranks,
        phi.alphabet().to_vec(),
        &transitions,
        iota,
        body.clone(),
        body,
    )
    .expect("group base is a valid automaton"))
}

/// The single-image base case: with power profile `(k, l, n)` of the unique
/// image `s`, a path `0 -> 1 -> ... -> k+n-1` wrapping back to `k`, counting
/// word length modulo the idempotent power. Deterministic, complete, weakly
/// good.
pub fn build_base_single_image(phi: &Morphism) -> Result<OrderedAutomaton, SynthesisError> {
    let image = phi.image();
    if image.len() != 1 {
        return Err(SynthesisError::MultipleImages);
    }
    let s = *image.iter().next().unwrap();
    let PowerProfile { k, n, .. } = phi.semigroup().power_profile(s);
    let count = k + n;
    let names: Vec<String> = (0..count).map(|i| i.to_string()).collect();
    // ι = 0 is maximal; 1..k+n-1 below it in index order
    let mut ranks: Vec<i64> = (0..count).map(|i| i as i64 - 1).collect();
    ranks[0] = count as i64 - 1;
    let mut transitions = Vec::new();
    for &a in phi.alphabet() {
        for i in 0..count {
            let j = if i < count - 1 { i + 1 } else { k };
            transitions.push((i, a, j));
        }
    }
    let all: BTreeSet<usize> = (0..count).collect();
    Ok(OrderedAutomaton::new(
        names,
        ranks,
        phi.alphabet().to_vec(),
        &transitions,
        0,
        all.clone(),
        all,
    )
    .expect("single-image base is a valid automaton"))
}

// A good automaton for a sub-problem together with its build report.
struct Child {
    automaton: OrderedAutomaton,
    report: BuildReport,
}

// letter of the block alphabet realizing element `e`, if `e` is a block value
fn letter_for(blocks: &Morphism) -> BTreeMap<Elem, char> {
    blocks
        .alphabet()
        .iter()
        .map(|&l| (blocks.letter(l).expect("own alphabet"), l))
        .collect()
}

/// The proper-left-ideal composition: the block automaton runs over the
/// block values while the inner automaton scans the letters between a block
/// head and its closing `c`-letter. Weakly good; deterministic and complete
/// whenever both children are.
pub fn build_inductive_left(phi: &Morphism, c: Elem) -> Result<OrderedAutomaton, SynthesisError> {
    let phi = phi.restricted_to_generated();
    if phi.semigroup().left_ideal(c).len() == phi.semigroup().len() {
        return Err(SynthesisError::CaseInapplicable);
    }
    let (inner, blocks, _) = ideal_subproblems(&phi, c, Side::Left)?;
    let mut memo = BTreeMap::new();
    let a1 = build_child(&inner, &mut memo, measure(&phi))?;
    let a2 = build_child(&blocks, &mut memo, measure(&phi))?;
    Ok(compose_left(&phi, c, &a1.automaton, &a2.automaton, &blocks).0)
}

/// The proper-right-ideal composition: blocks start with a `c`-letter; the
/// automaton guesses block boundaries, which makes it non-deterministic but
/// still unambiguous. Weakly good.
pub fn build_inductive_right(phi: &Morphism, c: Elem) -> Result<OrderedAutomaton, SynthesisError> {
    let phi = phi.restricted_to_generated();
    let (inner, blocks, _) = ideal_subproblems(&phi, c, Side::Right)?;
    if phi.semigroup().right_ideal(c).len() == phi.semigroup().len() {
        return Err(SynthesisError::CaseInapplicable);
    }
    let mut memo = BTreeMap::new();
    let a1 = build_child(&inner, &mut memo, measure(&phi))?;
    let a2 = build_child(&blocks, &mut memo, measure(&phi))?;
    Ok(compose_right(&phi, c, &a1.automaton, &a2.automaton, &blocks).0)
}

// Case-1 state space: the block automaton's states, below them the triples
// (block state, accumulated element, inner state).
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum LState {
    Tr(usize, usize, usize),
    Q2(usize),
}

/// Composite state names interpolate child names, which may themselves be
/// composite; repeats get a "#k" suffix to keep names injective.
fn dedup_names(names: Vec<String>) -> Vec<String> {
    let mut seen: BTreeMap<String, usize> = BTreeMap::new();
    names
        .into_iter()
        .map(|n| {
            let count = seen.entry(n.clone()).or_insert(0);
            *count += 1;
            if *count == 1 {
                n
            } else {
                format!("{n}#{count}")
            }
        })
        .collect()
}

fn compose_left(
    phi: &Morphism,
    c: Elem,
    m1: &OrderedAutomaton,
    m2: &OrderedAutomaton,
    blocks: &Morphism,
) -> (OrderedAutomaton, Vec<usize>) {
    let sg = phi.semigroup();
    let (sigma1, sigma2) = phi.split_alphabet(c);
    let by_elem = letter_for(blocks);

    // ascending rank: triples keyed (inner rank, block-state index, element
    // index), then the block automaton's own order
    let mut order: Vec<LState> = Vec::new();
    for &p in &m1.states_by_rank() {
        for q in 0..m2.state_count() {
            for s in sg.elements() {
                order.push(LState::Tr(q, s.0, p));
            }
        }
    }
    for q in m2.states_by_rank() {
        order.push(LState::Q2(q));
    }
    let idx: BTreeMap<LState, usize> = order.iter().enumerate().map(|(i, &k)| (k, i)).collect();
    let names: Vec<String> = order
        .iter()
        .map(|k| match *k {
            LState::Q2(q) => m2.name(q).to_string(),
            LState::Tr(q, s, p) => {
                format!("({},{},{})", m2.name(q), sg.name(Elem(s)), m1.name(p))
            }
        })
        .collect();
    let names = dedup_names(names);
    let ranks: Vec<i64> = (0..order.len() as i64).collect();

    let mut transitions: Vec<(usize, char, usize)> = Vec::new();
    // enter a block: q -> (q, phi(a), ι₁)
    for q in 0..m2.state_count() {
        for &a in phi.alphabet() {
            let e = phi.letter(a).expect("own alphabet");
            transitions.push((
                idx[&LState::Q2(q)],
                a,
                idx[&LState::Tr(q, e.0, m1.initial())],
            ));
        }
    }
    for (&k, &i) in &idx {
        let LState::Tr(q, s, p) = k else { continue };
        // scan the block body in the inner automaton
        for &a in &sigma1 {
            let e = phi.letter(a).expect("own alphabet");
            let s2 = sg.mul(Elem(s), e);
            for p2 in m1.successors(p, a) {
                transitions.push((i, a, idx[&LState::Tr(q, s2.0, p2)]));
            }
        }
        // close the block: advance the block automaton on the block value
        if p == m1.initial() || m1.finals().contains(&p) {
            let b = sg.mul(Elem(s), c);
            if let Some(&l) = by_elem.get(&b) {
                for &a in &sigma2 {
                    for q2 in m2.successors(q, l) {
                        transitions.push((i, a, idx[&LState::Q2(q2)]));
                    }
                }
            }
        }
    }

    let ok2 = |q: usize| q == m2.initial() || m2.finals().contains(&q);
    let ok1 = |p: usize| p == m1.initial() || m1.finals().contains(&p);
    let mut finals = BTreeSet::new();
    let mut buchi = BTreeSet::new();
    for (&k, &i) in &idx {
        match k {
            LState::Q2(q) => {
                if m2.finals().contains(&q) {
                    finals.insert(i);
                }
                if m2.buchi().contains(&q) {
                    buchi.insert(i);
                }
            }
            LState::Tr(q, _, p) => {
                if ok2(q) && ok1(p) {
                    finals.insert(i);
                }
                if ok2(q) && m1.buchi().contains(&p) {
                    buchi.insert(i);
                }
            }
        }
    }

    // heights use the children's rank bijections: the class argument needs
    // every repeated level to pin down a single child state
    let h1 = m1.state_count();
    let heights: Vec<usize> = order
        .iter()
        .map(|k| match *k {
            LState::Q2(q) => h1 + m2.rank_position(q),
            LState::Tr(_, _, p) => m1.rank_position(p),
        })
        .collect();
    let initial = idx[&LState::Q2(m2.initial())];
    let automaton = OrderedAutomaton::new(
        names,
        ranks,
        phi.alphabet().to_vec(),
        &transitions,
        initial,
        finals,
        buchi,
    )
    .expect("left composition is a valid automaton");
    (automaton, heights)
}

// Case-2 state space: (q, c, ⊥) states lowest, then the triples, then the
// (q, ⊥, ⊥) states, then the fresh initial state.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum RState {
    CBot(usize),
    // block-state key: 0 encodes ⊥, i + 1 encodes block state i
    Tr(usize, usize, usize),
    QBot(usize),
    Init,
}

fn compose_right(
    phi: &Morphism,
    c: Elem,
    m1: &OrderedAutomaton,
    m2: &OrderedAutomaton,
    blocks: &Morphism,
) -> (OrderedAutomaton, Vec<usize>) {
    let sg = phi.semigroup();
    let (sigma1, sigma2) = phi.split_alphabet(c);
    let by_elem = letter_for(blocks);

    let mut order: Vec<RState> = Vec::new();
    for q in 0..m2.state_count() {
        order.push(RState::CBot(q));
    }
    for &p in &m1.states_by_rank() {
        for qk in 0..=m2.state_count() {
            for s in sg.elements() {
                order.push(RState::Tr(qk, s.0, p));
            }
        }
    }
    for q in m2.states_by_rank() {
        order.push(RState::QBot(q));
    }
    order.push(RState::Init);
    let idx: BTreeMap<RState, usize> = order.iter().enumerate().map(|(i, &k)| (k, i)).collect();
    let bot = "⊥";
    let names: Vec<String> = order
        .iter()
        .map(|k| match *k {
            RState::Init => format!("({bot},{bot},{bot})"),
            RState::CBot(q) => format!("({},{},{bot})", m2.name(q), sg.name(c)),
            RState::QBot(q) => format!("({},{bot},{bot})", m2.name(q)),
            RState::Tr(qk, s, p) => {
                let qn = if qk == 0 { bot } else { m2.name(qk - 1) };
                format!("({},{},{})", qn, sg.name(Elem(s)), m1.name(p))
            }
        })
        .collect();
    let names = dedup_names(names);
    let ranks: Vec<i64> = (0..order.len() as i64).collect();

    let succ2 = |q: usize, e: Elem| -> Vec<usize> {
        by_elem
            .get(&e)
            .map(|&l| m2.successors(q, l).collect())
            .unwrap_or_default()
    };

    let mut transitions: Vec<(usize, char, usize)> = Vec::new();
    // 1(a)/1(b): start the head segment, or declare it a single letter
    for &a in phi.alphabet() {
        let e = phi.letter(a).expect("own alphabet");
        transitions.push((
            idx[&RState::Init],
            a,
            idx[&RState::Tr(0, e.0, m1.initial())],
        ));
        transitions.push((idx[&RState::Init], a, idx[&RState::QBot(m2.initial())]));
    }
    for (&k, &i) in &idx {
        match k {
            // 2: open a block with a c-letter
            RState::QBot(q) => {
                for &a in &sigma2 {
                    transitions.push((i, a, idx[&RState::CBot(q)]));
                }
            }
            // 3(a)/3(b): read the letter after c, entering the inner scan or
            // closing a two-letter block
            RState::CBot(q) => {
                for &a in phi.alphabet() {
                    let e = sg.mul(c, phi.letter(a).expect("own alphabet"));
                    transitions.push((i, a, idx[&RState::Tr(q + 1, e.0, m1.initial())]));
                    for q2 in succ2(q, e) {
                        transitions.push((i, a, idx[&RState::QBot(q2)]));
                    }
                }
            }
            // 4/5: scan the block body; exit when the inner run accepts
            RState::Tr(qk, s, p) => {
                for &a in &sigma1 {
                    let e = phi.letter(a).expect("own alphabet");
                    let s2 = sg.mul(Elem(s), e);
                    for p2 in m1.successors(p, a) {
                        if !m1.finals().contains(&p2) {
                            transitions.push((i, a, idx[&RState::Tr(qk, s2.0, p2)]));
                        } else if qk == 0 {
                            transitions.push((i, a, idx[&RState::QBot(m2.initial())]));
                        } else {
                            for q2 in succ2(qk - 1, s2) {
                                transitions.push((i, a, idx[&RState::QBot(q2)]));
                            }
                        }
                    }
                }
            }
            RState::Init => {}
        }
    }

    let ok2 = |q: usize| q == m2.initial() || m2.finals().contains(&q);
    let mut finals = BTreeSet::new();
    let mut buchi = BTreeSet::new();
    for (&k, &i) in &idx {
        match k {
            RState::QBot(q) | RState::CBot(q) if ok2(q) => {
                finals.insert(i);
            }
            _ => {}
        }
        match k {
            RState::QBot(q) if m2.buchi().contains(&q) => {
                buchi.insert(i);
            }
            // block state ⊥, ι₂ or final
            RState::Tr(qk, _, p) if m1.buchi().contains(&p) && (qk == 0 || ok2(qk - 1)) => {
                buchi.insert(i);
            }
            _ => {}
        }
    }

    // heights use the children's rank bijections; a block-opening state can
    // only be revisited after climbing above the whole triple layer
    let (h1, h2) = (m1.state_count(), m2.state_count());
    let heights: Vec<usize> = order
        .iter()
        .map(|k| match *k {
            RState::CBot(_) => 1,
            RState::Tr(_, _, p) => 1 + m1.rank_position(p),
            RState::QBot(q) => 1 + h1 + m2.rank_position(q),
            RState::Init => h1 + h2 + 2,
        })
        .collect();
    let automaton = OrderedAutomaton::new(
        names,
        ranks,
        phi.alphabet().to_vec(),
        &transitions,
        idx[&RState::Init],
        finals,
        buchi,
    )
    .expect("right composition is a valid automaton");
    (automaton, heights)
}

fn measure(phi: &Morphism) -> (usize, usize) {
    (phi.semigroup().len(), phi.image().len())
}

type Memo = BTreeMap<(Vec<Vec<usize>>, Vec<(char, usize)>), (OrderedAutomaton, BuildReport)>;

fn build_child(
    phi: &Morphism,
    memo: &mut Memo,
    parent: (usize, usize),
) -> Result<Child, SynthesisError> {
    let (automaton, report) = build_good_inner(phi, memo, Some(parent))?;
    Ok(Child { automaton, report })
}

/// Builds a good automaton for an arbitrary morphism, together with a report
/// of the construction (case tree, sizes, optimized heights).
pub fn build_good(phi: &Morphism) -> Result<(OrderedAutomaton, BuildReport), SynthesisError> {
    let mut memo = Memo::new();
    build_good_inner(phi, &mut memo, None)
}

fn build_good_inner(
    phi: &Morphism,
    memo: &mut Memo,
    parent: Option<(usize, usize)>,
) -> Result<(OrderedAutomaton, BuildReport), SynthesisError> {
    let phi = phi.restricted_to_generated();
    let m = measure(&phi);
    if let Some(pm) = parent {
        assert!(
            m < pm,
            "recursion measure must strictly decrease: {m:?} vs {pm:?}"
        );
    }
    let key = (
        phi.semigroup().table_rows(),
        phi.alphabet()
            .iter()
            .map(|&a| (a, phi.letter(a).expect("own alphabet").0))
            .collect::<Vec<_>>(),
    );
    if let Some(hit) = memo.get(&key) {
        return Ok(hit.clone());
    }

    let decision = choose_case(&phi)?;
    let mut children = Vec::new();
    let mut derived_report = Vec::new();
    let (case, chosen_c, profile, weak, weak_heights) = match decision {
        CaseDecision::Group => (CaseKind::Group, None, None, build_base_group(&phi)?, None),
        CaseDecision::SingleImage { profile } => (
            CaseKind::SingleImage,
            None,
            Some(profile),
            build_base_single_image(&phi)?,
            None,
        ),
        CaseDecision::LeftIdeal {
            c,
            inner,
            blocks,
            derived,
        } => {
            let a1 = build_child(&inner, memo, m)?;
            let a2 = build_child(&blocks, memo, m)?;
            let (weak, heights) = compose_left(&phi, c, &a1.automaton, &a2.automaton, &blocks);
            derived_report = derived_table(&phi, &derived);
            children.push(a1.report);
            children.push(a2.report);
            (
                CaseKind::LeftIdeal,
                Some(phi.semigroup().name(c).to_string()),
                None,
                weak,
                Some(heights),
            )
        }
        CaseDecision::RightIdeal {
            c,
            inner,
            blocks,
            derived,
        } => {
            let a1 = build_child(&inner, memo, m)?;
            let a2 = build_child(&blocks, memo, m)?;
            let (weak, heights) = compose_right(&phi, c, &a1.automaton, &a2.automaton, &blocks);
            derived_report = derived_table(&phi, &derived);
            children.push(a1.report);
            children.push(a2.report);
            (
                CaseKind::RightIdeal,
                Some(phi.semigroup().name(c).to_string()),
                None,
                weak,
                Some(heights),
            )
        }
    };

    let reduced = weak.reduce();
    let good = reduced.weakly_good_to_good();

    // base cases keep the rank bijection on the good automaton; inductive
    // levels keep the composed heights, which only cover the sink-free
    // reduced automaton
    let (split_automaton, heights): (OrderedAutomaton, BTreeMap<String, usize>) = match weak_heights
    {
        None => {
            let hs = good
                .names()
                .iter()
                .enumerate()
                .map(|(q, n)| (n.clone(), good.rank_position(q)))
                .collect();
            (good.clone(), hs)
        }
        Some(hs) => {
            let by_name: BTreeMap<&String, usize> =
                weak.names().iter().zip(hs.iter().copied()).collect();
            let hs = reduced
                .names()
                .iter()
                .map(|n| (n.clone(), by_name[n]))
                .collect();
            (reduced.clone(), hs)
        }
    };
    let optimized_height = heights[split_automaton.name(split_automaton.initial())];

    let report = BuildReport {
        case,
        chosen_c,
        profile,
        semigroup_size: phi.semigroup().len(),
        image_size: phi.image().len(),
        states_weak: weak.state_count(),
        states_reduced: reduced.state_count(),
        states_good: good.state_count(),
        derived_letters: derived_report,
        children,
        split_automaton,
        heights,
        optimized_height,
    };
    memo.insert(key, (good.clone(), report.clone()));
    Ok((good, report))
}

fn derived_table(phi: &Morphism, derived: &[DerivedLetter]) -> Vec<(char, String, String)> {
    derived
        .iter()
        .enumerate()
        .map(|(i, d)| {
            (
                block_letter(i),
                phi.semigroup().name(d.elem).to_string(),
                d.witness.iter().collect(),
            )
        })
        .collect()
}

#[cfg(test)]
mod tests;
