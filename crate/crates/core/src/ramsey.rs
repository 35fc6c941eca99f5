//! Ramsey splits from accepting runs, optimized height assignments, and
//! Simon factorization trees with full condition checking.

use crate::algebra::{Elem, Morphism};
use crate::automaton::{OrderedAutomaton, UpMode, UpVerdict, UpWord};
use crate::synthesis::BuildReport;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

/// Errors raised by split and tree construction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RamseyError {
    /// The optimized heights need the build report of the automaton.
    MissingBuildReport,
    /// The automaton rejects the word, so there is no run to split along.
    NoAcceptingRun,
    /// The split is not Ramsey, with a violating pair.
    NotRamsey(RamseyViolation),
    /// Words must be nonempty.
    EmptyWord,
    /// The split does not line up with the word's positions.
    Misaligned,
}

impl fmt::Display for RamseyError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RamseyError::MissingBuildReport => {
                write!(f, "height optimization needs the build report")
            }
            RamseyError::NoAcceptingRun => write!(f, "no accepting run on the word"),
            RamseyError::NotRamsey(v) => write!(
                f,
                "split is not Ramsey: positions {} ~ {} at level {} map to a second element",
                v.i, v.j, v.level
            ),
            RamseyError::EmptyWord => write!(f, "word is empty"),
            RamseyError::Misaligned => write!(f, "split does not match the word length"),
        }
    }
}

#[cfg(test)]
impl std::error::Error for RamseyError {}

/// A pair of equivalent positions whose gap factor breaks the one-idempotent
/// rule of its class.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RamseyViolation {
    /// Earlier position of the pair.
    pub i: usize,
    /// Later position of the pair.
    pub j: usize,
    /// The class level.
    pub level: usize,
    /// Image of the gap factor w(i, j].
    pub got: Elem,
    /// The class element it should have matched, if one was established.
    pub expected: Option<Elem>,
}

/// A level for every state, monotone with respect to the rank order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HeightAssignment {
    levels: Vec<usize>,
    height: usize,
}

impl HeightAssignment {
    /// Wraps per-state levels; the height is their maximum.
    pub fn new(levels: Vec<usize>) -> HeightAssignment {
        let height = levels.iter().copied().max().unwrap_or(1);
        HeightAssignment { levels, height }
    }

    /// Level of state `q`.
    pub fn level(&self, q: usize) -> usize {
        self.levels[q]
    }

    /// The maximal level.
    pub fn height(&self) -> usize {
        self.height
    }
}

/// The strictly monotone bijection from the rank order onto 1..=|Q|.
pub fn default_heights(a: &OrderedAutomaton) -> HeightAssignment {
    HeightAssignment::new((0..a.state_count()).map(|q| a.rank_position(q)).collect())
}

/// The height assignment computed by the inductive construction, read off
/// the build report; usually far below |Q| on composed automata. It is
/// defined on the report's `split_automaton` and errors with
/// [`RamseyError::MissingBuildReport`] if `a` has states the report does
/// not cover (such as the completion sink).
pub fn optimized_heights(
    report: &BuildReport,
    a: &OrderedAutomaton,
) -> Result<HeightAssignment, RamseyError> {
    let levels = a
        .names()
        .iter()
        .map(|n| {
            report
                .heights
                .get(n)
                .copied()
                .ok_or(RamseyError::MissingBuildReport)
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(HeightAssignment::new(levels))
}

/// Levels over the positions of a word: one entry per position for finite
/// words; a stem plus a repeating cycle for ultimately periodic ones.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Split {
    /// σ(0), σ(1), ...; for ultimately periodic words the entries from
    /// `cycle_start` on repeat forever.
    pub levels: Vec<usize>,
    /// Start of the repeating part, if the word is ultimately periodic.
    pub cycle_start: Option<usize>,
    /// The height of the assignment that produced the split.
    pub height: usize,
}

impl Split {
    /// σ(i), unrolling the cycle if there is one.
    pub fn level_at(&self, i: usize) -> usize {
        if i < self.levels.len() {
            return self.levels[i];
        }
        let cs = self.cycle_start.expect("finite split indexed past its end");
        let cl = self.levels.len() - cs;
        self.levels[cs + (i - cs) % cl]
    }
}

/// The split σ(i) = h(q_i) along the unique accepting run on a finite word.
pub fn split_word(
    a: &OrderedAutomaton,
    h: &HeightAssignment,
    w: &[char],
) -> Result<Split, RamseyError> {
    if w.is_empty() {
        return Err(RamseyError::EmptyWord);
    }
    let runs = a
        .accepting_runs_finite(w)
        .map_err(|_| RamseyError::NoAcceptingRun)?;
    let run = runs.first().ok_or(RamseyError::NoAcceptingRun)?;
    Ok(Split {
        levels: run.states.iter().map(|&q| h.level(q)).collect(),
        cycle_start: None,
        height: h.height(),
    })
}

/// The split along an accepting lasso on an ultimately periodic word.
pub fn split_up_word(
    a: &OrderedAutomaton,
    h: &HeightAssignment,
    w: &UpWord,
) -> Result<Split, RamseyError> {
    let (verdict, run) = a
        .accepting_runs_up(w, UpMode::Exists)
        .map_err(|_| RamseyError::NoAcceptingRun)?;
    if verdict == UpVerdict::Zero {
        return Err(RamseyError::NoAcceptingRun);
    }
    let run = run.expect("non-zero verdict carries a run");
    Ok(Split {
        levels: run.states.iter().map(|&q| h.level(q)).collect(),
        cycle_start: run.cycle_start,
        height: h.height(),
    })
}

// Checks the one-idempotent-per-class rule over `count` positions whose
// letters come from `letter`. Classes are tracked with a monotonic stack:
// adjacent equivalent positions share a stack slot, and checking every
// consecutive gap is equivalent to checking all pairs (pair factors are
// products of consecutive gap factors of one idempotent).
fn check_levels(
    phi: &Morphism,
    count: usize,
    level: impl Fn(usize) -> usize,
    letter: impl Fn(usize) -> char,
) -> Result<(), RamseyViolation> {
    let sg = phi.semigroup();
    // (level, last position seen, established class element)
    let mut stack: Vec<(usize, usize, Option<Elem>)> = Vec::new();
    for j in 0..count {
        let lj = level(j);
        while stack.last().is_some_and(|&(l, _, _)| l < lj) {
            stack.pop();
        }
        match stack.last_mut() {
            Some((l, i, class)) if *l == lj => {
                let mut gap = None;
                for k in *i..j {
                    let e = phi.letter(letter(k)).expect("letters in alphabet");
                    gap = Some(match gap {
                        None => e,
                        Some(g) => sg.mul(g, e),
                    });
                }
                let gap = gap.expect("equivalent positions are distinct");
                let expected = class.unwrap_or(gap);
                if gap != expected || !sg.is_idempotent(gap) {
                    return Err(RamseyViolation {
                        i: *i,
                        j,
                        level: lj,
                        got: gap,
                        expected: *class,
                    });
                }
                *class = Some(expected);
                *i = j;
            }
            _ => stack.push((lj, j, None)),
        }
    }
    Ok(())
}

/// Checks that a split of a finite word is Ramsey: within every class of
/// equivalent positions, all gap factors map to one idempotent.
pub fn verify_ramsey(split: &Split, phi: &Morphism, w: &[char]) -> Result<(), RamseyViolation> {
    assert_eq!(
        split.levels.len(),
        w.len() + 1,
        "split aligned with the word"
    );
    check_levels(phi, split.levels.len(), |i| split.levels[i], |i| w[i])
}

fn verify_ramsey_up_unrolled(
    split: &Split,
    phi: &Morphism,
    w: &UpWord,
    unrollings: usize,
) -> Result<(), RamseyViolation> {
    let cs = split
        .cycle_start
        .expect("split of an ultimately periodic word");
    let cl = split.levels.len() - cs;
    let count = cs + unrollings * cl + 1;
    check_levels(phi, count, |i| split.level_at(i), |i| w.letter_at(i))
}

/// Checks that a split of an ultimately periodic word is Ramsey over the
/// stem plus two cycle unrollings; σ is periodic on the cycle and a gap
/// between consecutive equivalent positions never exceeds one period, so
/// two unrollings exhibit every gap factor.
pub fn verify_ramsey_up(split: &Split, phi: &Morphism, w: &UpWord) -> Result<(), RamseyViolation> {
    verify_ramsey_up_unrolled(split, phi, w, 2)
}

/// A Simon factorization tree: leaves are letters; internal nodes carry the
/// image of their yield; nodes of arity > 2 have equal idempotent children.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FactTree {
    /// A single letter.
    Leaf(char),
    /// An internal node over at least two children.
    Node {
        /// Image of the node's yield.
        label: Elem,
        /// Children, in word order.
        children: Vec<FactTree>,
    },
}

impl FactTree {
    /// The word spelled by the leaves, in order.
    pub fn yield_word(&self) -> Vec<char> {
        let mut out = Vec::new();
        self.collect_yield(&mut out);
        out
    }

    fn collect_yield(&self, out: &mut Vec<char>) {
        match self {
            FactTree::Leaf(a) => out.push(*a),
            FactTree::Node { children, .. } => {
                for c in children {
                    c.collect_yield(out);
                }
            }
        }
    }

    /// Image of the yield: the node label, or the letter image at a leaf.
    pub fn label(&self, phi: &Morphism) -> Elem {
        match self {
            FactTree::Leaf(a) => phi.letter(*a).expect("letter in alphabet"),
            FactTree::Node { label, .. } => *label,
        }
    }

    /// Edges on the longest root-to-leaf path; a leaf has height 0.
    pub fn height(&self) -> usize {
        match self {
            FactTree::Leaf(_) => 0,
            FactTree::Node { children, .. } => {
                1 + children.iter().map(FactTree::height).max().unwrap_or(0)
            }
        }
    }
}

/// How a factorization tree fails its invariants.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TreeViolation {
    /// The leaves do not spell the word.
    YieldMismatch {
        /// The word the tree should spell.
        expected: Vec<char>,
        /// What the leaves spell.
        actual: Vec<char>,
    },
    /// An internal node with fewer than two children.
    TooFewChildren,
    /// A node label differing from the image of its yield.
    LabelMismatch {
        /// The node's label.
        label: Elem,
        /// Image of the node's yield.
        actual: Elem,
    },
    /// A node of arity > 2 whose children do not all share one label.
    WideNodeChildrenDiffer,
    /// A node of arity > 2 whose shared child label is not idempotent.
    WideNodeNotIdempotent(Elem),
}

/// Checks all factorization-tree invariants against a word and morphism,
/// reporting the first violation found.
pub fn verify_fact_tree(tree: &FactTree, phi: &Morphism, w: &[char]) -> Result<(), TreeViolation> {
    let actual = tree.yield_word();
    if actual != w {
        return Err(TreeViolation::YieldMismatch {
            expected: w.to_vec(),
            actual,
        });
    }
    verify_tree_node(tree, phi)
}

fn verify_tree_node(tree: &FactTree, phi: &Morphism) -> Result<(), TreeViolation> {
    let FactTree::Node { label, children } = tree else {
        return Ok(());
    };
    if children.len() < 2 {
        return Err(TreeViolation::TooFewChildren);
    }
    let product = children
        .iter()
        .map(|c| c.label(phi))
        .reduce(|x, y| phi.semigroup().mul(x, y))
        .expect("at least two children");
    if product != *label {
        return Err(TreeViolation::LabelMismatch {
            label: *label,
            actual: product,
        });
    }
    if children.len() > 2 {
        let first = children[0].label(phi);
        if children.iter().any(|c| c.label(phi) != first) {
            return Err(TreeViolation::WideNodeChildrenDiffer);
        }
        if !phi.semigroup().is_idempotent(first) {
            return Err(TreeViolation::WideNodeNotIdempotent(first));
        }
    }
    for c in children {
        verify_tree_node(c, phi)?;
    }
    Ok(())
}

/// Builds a factorization tree for a finite word from a Ramsey split: the
/// maximal-level cut positions of each interval group the gaps of one class
/// into an idempotent node (absorbing boundary segments that share the
/// idempotent), with binary nodes combining the rest.
pub fn tree_from_split(w: &[char], split: &Split, phi: &Morphism) -> Result<FactTree, RamseyError> {
    if w.is_empty() {
        return Err(RamseyError::EmptyWord);
    }
    if split.levels.len() != w.len() + 1 {
        return Err(RamseyError::Misaligned);
    }
    verify_ramsey(split, phi, w).map_err(RamseyError::NotRamsey)?;
    Ok(build_tree(w, &split.levels, 0, w.len(), phi))
}

fn binary(phi: &Morphism, left: FactTree, right: FactTree) -> FactTree {
    let label = phi.semigroup().mul(left.label(phi), right.label(phi));
    FactTree::Node {
        label,
        children: vec![left, right],
    }
}

// Builds the tree for letters w[lo..hi] (positions lo..=hi of the split).
fn build_tree(w: &[char], levels: &[usize], lo: usize, hi: usize, phi: &Morphism) -> FactTree {
    if hi - lo == 1 {
        return FactTree::Leaf(w[lo]);
    }
    let top = (lo + 1..hi)
        .map(|p| levels[p])
        .max()
        .expect("interval has interior");
    let cuts: Vec<usize> = (lo + 1..hi).filter(|&p| levels[p] == top).collect();
    let mut bounds = vec![lo];
    bounds.extend(&cuts);
    bounds.push(hi);
    let mut segs: Vec<FactTree> = bounds
        .windows(2)
        .map(|b| build_tree(w, levels, b[0], b[1], phi))
        .collect();
    if cuts.len() >= 2 {
        // the cut positions are mutually equivalent, so the inner segments
        // all carry the class idempotent (guaranteed by verify_ramsey)
        let e = segs[1].label(phi);
        let last = segs.pop().expect("at least three segments");
        let first = segs.remove(0);
        let mut children = segs;
        let mut outer_left = Some(first);
        let mut outer_right = Some(last);
        if outer_left.as_ref().is_some_and(|t| t.label(phi) == e) {
            children.insert(0, outer_left.take().expect("checked"));
        }
        if outer_right.as_ref().is_some_and(|t| t.label(phi) == e) {
            children.push(outer_right.take().expect("checked"));
        }
        let mut tree = if children.len() >= 2 {
            FactTree::Node { label: e, children }
        } else {
            children.pop().expect("one inner segment")
        };
        if let Some(l) = outer_left {
            tree = binary(phi, l, tree);
        }
        if let Some(r) = outer_right {
            tree = binary(phi, tree, r);
        }
        tree
    } else {
        let mut it = segs.into_iter();
        let first = it.next().expect("nonempty interval");
        it.fold(first, |acc, s| binary(phi, acc, s))
    }
}
