//! Good rational expressions by state elimination: per-element expressions
//! for finite words, an ω-expression assembled from the repeated states,
//! goodness checking, and unambiguous parsing into factorization trees.

use crate::algebra::{Elem, FiniteSemigroup, Morphism};
use crate::automaton::{words_of_length, OrderedAutomaton, UpMode, UpVerdict, UpWord};
use crate::ramsey::FactTree;
use alloc::boxed::Box;
use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::rc::Rc;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

/// Errors raised by expression construction and parsing.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RExprError {
    /// Elimination needs a good automaton (structural axioms plus
    /// single-idempotent loop images).
    NotGood,
    /// Elimination needs a reduced automaton.
    NotReduced,
    /// The word has no parse.
    NoParse,
    /// The word has this many parses (two or more).
    Ambiguous(usize),
}

impl fmt::Display for RExprError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RExprError::NotGood => write!(f, "automaton is not good"),
            RExprError::NotReduced => write!(f, "automaton is not reduced"),
            RExprError::NoParse => write!(f, "word has no parse"),
            RExprError::Ambiguous(n) => write!(f, "word has {n} parses"),
        }
    }
}

#[cfg(test)]
impl std::error::Error for RExprError {}

#[derive(Debug, PartialEq, Eq)]
enum Op {
    Empty,
    Epsilon,
    Letter(char),
    Union(RExpr, RExpr),
    Concat(RExpr, RExpr),
    Plus(RExpr),
    Omega(RExpr),
}

#[derive(Debug, PartialEq, Eq)]
struct Node {
    op: Op,
    ann: Option<Elem>,
}

/// A rational expression over letters, with union, concatenation,
/// Kleene-plus, and a designated ω-power; ε is representable but never
/// produced by the constructions here. Each node may carry a semigroup
/// annotation: the common image of every word it denotes. Subterms are
/// reference-counted, so heavily shared expressions stay compact.
#[derive(Debug, Clone, Eq)]
pub struct RExpr {
    node: Rc<Node>,
}

impl PartialEq for RExpr {
    fn eq(&self, other: &RExpr) -> bool {
        // shared-subterm fast path keeps deep DAG comparisons linear
        Rc::ptr_eq(&self.node, &other.node) || *self.node == *other.node
    }
}

/// A borrowed view of the top constructor of an expression.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExprView<'a> {
    /// The empty language.
    Empty,
    /// The empty word.
    Epsilon,
    /// A single letter.
    Letter(char),
    /// Union of two alternatives.
    Union(&'a RExpr, &'a RExpr),
    /// Concatenation.
    Concat(&'a RExpr, &'a RExpr),
    /// One or more repetitions.
    Plus(&'a RExpr),
    /// Infinitely many repetitions.
    Omega(&'a RExpr),
}

impl RExpr {
    fn make(op: Op, ann: Option<Elem>) -> RExpr {
        RExpr {
            node: Rc::new(Node { op, ann }),
        }
    }

    /// The empty language.
    pub fn empty() -> RExpr {
        RExpr::make(Op::Empty, None)
    }

    /// The empty word.
    pub fn epsilon() -> RExpr {
        RExpr::make(Op::Epsilon, None)
    }

    /// A single letter.
    pub fn letter(a: char) -> RExpr {
        RExpr::make(Op::Letter(a), None)
    }

    /// Union of two alternatives.
    pub fn union(l: RExpr, r: RExpr) -> RExpr {
        RExpr::make(Op::Union(l, r), None)
    }

    /// Concatenation.
    pub fn concat(l: RExpr, r: RExpr) -> RExpr {
        RExpr::make(Op::Concat(l, r), None)
    }

    /// One or more repetitions.
    pub fn plus(e: RExpr) -> RExpr {
        RExpr::make(Op::Plus(e), None)
    }

    /// Infinitely many repetitions.
    pub fn omega(e: RExpr) -> RExpr {
        RExpr::make(Op::Omega(e), None)
    }

    /// The same expression annotated with the image of its words.
    pub fn annotated(&self, s: Elem) -> RExpr {
        RExpr {
            node: Rc::new(Node {
                op: self.clone_op(),
                ann: Some(s),
            }),
        }
    }

    fn clone_op(&self) -> Op {
        match self.view() {
            ExprView::Empty => Op::Empty,
            ExprView::Epsilon => Op::Epsilon,
            ExprView::Letter(a) => Op::Letter(a),
            ExprView::Union(l, r) => Op::Union(l.clone(), r.clone()),
            ExprView::Concat(l, r) => Op::Concat(l.clone(), r.clone()),
            ExprView::Plus(e) => Op::Plus(e.clone()),
            ExprView::Omega(e) => Op::Omega(e.clone()),
        }
    }

    /// The top constructor.
    pub fn view(&self) -> ExprView<'_> {
        match &self.node.op {
            Op::Empty => ExprView::Empty,
            Op::Epsilon => ExprView::Epsilon,
            Op::Letter(a) => ExprView::Letter(*a),
            Op::Union(l, r) => ExprView::Union(l, r),
            Op::Concat(l, r) => ExprView::Concat(l, r),
            Op::Plus(e) => ExprView::Plus(e),
            Op::Omega(e) => ExprView::Omega(e),
        }
    }

    /// The annotation, if any.
    pub fn annotation(&self) -> Option<Elem> {
        self.node.ann
    }

    /// Whether this is the empty-language constant.
    pub fn is_empty_expr(&self) -> bool {
        matches!(self.node.op, Op::Empty)
    }

    /// Whether the expression contains no ε node.
    pub fn epsilon_free(&self) -> bool {
        match self.view() {
            ExprView::Epsilon => false,
            ExprView::Empty | ExprView::Letter(_) => true,
            ExprView::Union(l, r) | ExprView::Concat(l, r) => l.epsilon_free() && r.epsilon_free(),
            ExprView::Plus(e) | ExprView::Omega(e) => e.epsilon_free(),
        }
    }

    /// Flattens nested top-level unions into the list of alternatives.
    pub fn union_branches(&self) -> Vec<&RExpr> {
        match self.view() {
            ExprView::Union(l, r) => {
                let mut out = l.union_branches();
                out.extend(r.union_branches());
                out
            }
            _ => vec![self],
        }
    }

    /// Renders the text syntax: `0`, `1`, `a`, `(E|E)`, `(E.E)`, `(E)+`,
    /// `(E)^w`, with annotations as `E:{element-name}`.
    pub fn to_text(&self, sg: &FiniteSemigroup) -> String {
        let mut out = String::new();
        self.write_text(&mut out, sg);
        out
    }

    fn write_text(&self, out: &mut String, sg: &FiniteSemigroup) {
        match self.view() {
            ExprView::Empty => out.push('0'),
            ExprView::Epsilon => out.push('1'),
            ExprView::Letter(a) => out.push(a),
            ExprView::Union(l, r) => {
                out.push('(');
                l.write_text(out, sg);
                out.push('|');
                r.write_text(out, sg);
                out.push(')');
            }
            ExprView::Concat(l, r) => {
                out.push('(');
                l.write_text(out, sg);
                out.push('.');
                r.write_text(out, sg);
                out.push(')');
            }
            ExprView::Plus(e) => {
                out.push('(');
                e.write_text(out, sg);
                out.push_str(")+");
            }
            ExprView::Omega(e) => {
                out.push('(');
                e.write_text(out, sg);
                out.push_str(")^w");
            }
        }
        if let Some(s) = self.annotation() {
            out.push_str(":{");
            out.push_str(sg.name(s));
            out.push('}');
        }
    }
}

/// Rewrites with the ∅ rules (∅⁺ ⇒ ∅, ∅·F ⇒ ∅, F·∅ ⇒ ∅, ∅∪F ⇒ F,
/// F∪∅ ⇒ F, and the ω analogue) to fixpoint; the result is `Empty` or
/// ∅-free. Annotations of surviving nodes are kept.
pub fn simplify_empty(e: &RExpr) -> RExpr {
    fn go(e: &RExpr, memo: &mut BTreeMap<usize, RExpr>) -> RExpr {
        let key = Rc::as_ptr(&e.node) as usize;
        if let Some(hit) = memo.get(&key) {
            return hit.clone();
        }
        let out = match e.view() {
            ExprView::Empty | ExprView::Epsilon | ExprView::Letter(_) => e.clone(),
            ExprView::Union(l, r) => {
                let (l, r) = (go(l, memo), go(r, memo));
                match (l.is_empty_expr(), r.is_empty_expr()) {
                    (true, true) => RExpr::empty(),
                    (true, false) => r,
                    (false, true) => l,
                    (false, false) => keep_ann(RExpr::union(l, r), e),
                }
            }
            ExprView::Concat(l, r) => {
                let (l, r) = (go(l, memo), go(r, memo));
                if l.is_empty_expr() || r.is_empty_expr() {
                    RExpr::empty()
                } else {
                    keep_ann(RExpr::concat(l, r), e)
                }
            }
            ExprView::Plus(b) => {
                let b = go(b, memo);
                if b.is_empty_expr() {
                    RExpr::empty()
                } else {
                    keep_ann(RExpr::plus(b), e)
                }
            }
            ExprView::Omega(b) => {
                let b = go(b, memo);
                if b.is_empty_expr() {
                    RExpr::empty()
                } else {
                    keep_ann(RExpr::omega(b), e)
                }
            }
        };
        memo.insert(key, out.clone());
        out
    }
    fn keep_ann(new: RExpr, old: &RExpr) -> RExpr {
        match old.annotation() {
            Some(s) => new.annotated(s),
            None => new,
        }
    }
    go(e, &mut BTreeMap::new())
}

// union of the non-empty parts, left-associated; Empty if none
fn union_parts(parts: Vec<RExpr>) -> RExpr {
    let mut it = parts.into_iter().filter(|p| !p.is_empty_expr());
    match it.next() {
        None => RExpr::empty(),
        Some(first) => it.fold(first, RExpr::union),
    }
}

/// The state-elimination table: expressions for the words leading from `p`
/// to `q` while staying inside the lowest-ranked states, split by image.
/// Entries are built on demand and memoized; subterms are shared.
pub struct ElimTable {
    automaton: OrderedAutomaton,
    phi: Morphism,
    /// states in ascending rank order; eliminating a prefix of this list
    /// restricts the intermediate states to a down-set
    order: Vec<usize>,
    /// the loop idempotent `e_q` of each state, if its loop language is
    /// nonempty
    loop_idem: Vec<Option<Elem>>,
    /// exact reachability `(p, prefix) -> {(q, image)}`, used to prune
    reach: BTreeMap<(usize, usize), BTreeSet<(usize, Elem)>>,
    memo: BTreeMap<(usize, usize, usize, Elem), RExpr>,
}

impl ElimTable {
    /// The expression for `F^s_{p,X,q}` where `X` is the first `prefix`
    /// states in rank order (a down-set). `Empty` when no such word exists.
    pub fn entry(&mut self, p: usize, prefix: usize, q: usize, s: Elem) -> RExpr {
        let key = (p, prefix, q, s);
        if let Some(hit) = self.memo.get(&key) {
            return hit.clone();
        }
        let out = if !self.reachable(p, prefix).contains(&(q, s)) {
            RExpr::empty()
        } else if prefix == 0 {
            let letters: Vec<RExpr> = self
                .automaton
                .alphabet()
                .to_vec()
                .into_iter()
                .filter(|&a| {
                    self.phi.letter(a).expect("own alphabet") == s
                        && self.automaton.successors(p, a).any(|t| t == q)
                })
                .map(|a| RExpr::letter(a).annotated(s))
                .collect();
            annotate(union_parts(letters), s)
        } else {
            // eliminate r: either avoid it, pass through once, or loop on it
            let r = self.order[prefix - 1];
            let sg = self.phi.semigroup().clone();
            let mut parts = vec![self.entry(p, prefix - 1, q, s)];
            let e_r = self.loop_idem[r];
            let looped = e_r.map(|e| self.entry(r, prefix - 1, r, e));
            for s1 in sg.elements() {
                for s2 in sg.elements() {
                    if sg.mul(s1, s2) == s {
                        let left = self.entry(p, prefix - 1, r, s1);
                        let right = self.entry(r, prefix - 1, q, s2);
                        if !left.is_empty_expr() && !right.is_empty_expr() {
                            parts.push(RExpr::concat(left, right).annotated(s));
                        }
                    }
                    if let (Some(e), Some(body)) = (e_r, &looped) {
                        if !body.is_empty_expr() && sg.mul(sg.mul(s1, e), s2) == s {
                            let left = self.entry(p, prefix - 1, r, s1);
                            let right = self.entry(r, prefix - 1, q, s2);
                            if !left.is_empty_expr() && !right.is_empty_expr() {
                                let mid = RExpr::plus(body.clone()).annotated(e);
                                let part = RExpr::concat(
                                    RExpr::concat(left, mid).annotated(sg.mul(s1, e)),
                                    right,
                                )
                                .annotated(s);
                                parts.push(part);
                            }
                        }
                    }
                }
            }
            annotate(union_parts(parts), s)
        };
        self.memo.insert(key, out.clone());
        out
    }

    /// The entries computed so far, keyed by `(p, prefix, q, s)`.
    pub fn computed(&self) -> impl Iterator<Item = (&(usize, usize, usize, Elem), &RExpr)> {
        self.memo.iter()
    }

    /// States in ascending rank order (the elimination order).
    pub fn order(&self) -> &[usize] {
        &self.order
    }

    /// The loop idempotent of a state, if its loop language is nonempty.
    pub fn loop_idempotent(&self, q: usize) -> Option<Elem> {
        self.loop_idem[q]
    }

    fn reachable(&mut self, p: usize, prefix: usize) -> &BTreeSet<(usize, Elem)> {
        if !self.reach.contains_key(&(p, prefix)) {
            let x: BTreeSet<usize> = self.order[..prefix].iter().copied().collect();
            let set = self
                .automaton
                .restricted_language_witnesses(&self.phi, p, &x)
                .into_keys()
                .collect();
            self.reach.insert((p, prefix), set);
        }
        &self.reach[&(p, prefix)]
    }
}

fn annotate(e: RExpr, s: Elem) -> RExpr {
    if e.is_empty_expr() {
        e
    } else {
        e.annotated(s)
    }
}

/// Builds the elimination table for a good, reduced automaton. Checks the
/// structural axioms and the loop-image axiom exactly; unambiguity is a
/// consequence of goodness and is checked separately by
/// [`check_good_expression`].
pub fn eliminate(a: &OrderedAutomaton, phi: &Morphism) -> Result<ElimTable, RExprError> {
    if a.reduce().state_count() != a.state_count() {
        return Err(RExprError::NotReduced);
    }
    // structural axioms: untouchable maximal initial state, single final
    // sink just below it
    let iota = a.initial();
    let max_rank = (0..a.state_count())
        .map(|q| a.rank(q))
        .max()
        .expect("nonempty");
    let single_final = a.finals().len() == 1;
    let f = a.finals().iter().next().copied();
    let structural = a.rank(iota) == max_rank
        && a.transitions().all(|(_, _, q)| q != iota)
        && single_final
        && f.is_some_and(|f| {
            a.transitions().all(|(p, _, _)| p != f)
                && (0..a.state_count()).all(|q| q == iota || q == f || a.rank(q) < a.rank(f))
        });
    if !structural {
        return Err(RExprError::NotGood);
    }
    let sg = phi.semigroup();
    let mut loop_idem = Vec::with_capacity(a.state_count());
    for q in 0..a.state_count() {
        let img = a.image_of_restricted_language(phi, q, &a.down_set(q), q);
        match img.len() {
            0 => loop_idem.push(None),
            1 => {
                let e = *img.iter().next().unwrap();
                if !sg.is_idempotent(e) {
                    return Err(RExprError::NotGood);
                }
                loop_idem.push(Some(e));
            }
            _ => return Err(RExprError::NotGood),
        }
    }
    Ok(ElimTable {
        automaton: a.clone(),
        phi: phi.clone(),
        order: a.states_by_rank(),
        loop_idem,
        reach: BTreeMap::new(),
        memo: BTreeMap::new(),
    })
}

/// One ε-free good expression per semigroup element `s` with a nonempty
/// preimage: the words from the initial state to the final sink through the
/// remaining states. Their languages partition Σ⁺ by image.
pub fn finite_expressions(
    a: &OrderedAutomaton,
    phi: &Morphism,
) -> Result<BTreeMap<Elem, RExpr>, RExprError> {
    let mut table = eliminate(a, phi)?;
    let n = a.state_count();
    let f = *a
        .finals()
        .iter()
        .next()
        .expect("good automata have a final sink");
    let mut out = BTreeMap::new();
    for s in phi.semigroup().elements() {
        let e = table.entry(a.initial(), n - 2, f, s);
        if !e.is_empty_expr() {
            out.insert(s, e);
        }
    }
    Ok(out)
}

/// The ω-expression: one branch per repeated state `r`, in ascending rank
/// order, of the form `H_r · (F^{e_r}_{r,↓r,r})^ω`. The head `H_r` cuts the
/// run at its first visit to `r` after its last visit to a state above `r`:
/// `H_r = F_{ι,↓r,r} ∪ ⋃_{u>r} F_{ι,Q∖{ι,f},u}·F_{u,↓r,r}`. Every infinite
/// word matches exactly one branch (the largest state its run repeats) with
/// exactly one factorization, because runs from ι are unique.
pub fn omega_expression(a: &OrderedAutomaton, phi: &Morphism) -> Result<RExpr, RExprError> {
    let mut table = eliminate(a, phi)?;
    let n = a.state_count();
    let elements: Vec<Elem> = phi.semigroup().elements().collect();
    let mut branches = Vec::new();
    for &r in &a.states_by_rank() {
        if !a.buchi().contains(&r) {
            continue;
        }
        let Some(e_r) = table.loop_idempotent(r) else {
            continue;
        };
        let below = a.rank_position(r) - 1;
        let body = table.entry(r, below, r, e_r);
        if body.is_empty_expr() {
            continue;
        }
        // the run reaches the cut either without ever climbing above r, or
        // through a last high state u followed by a descent avoiding r
        let mut parts: Vec<RExpr> = elements
            .iter()
            .map(|&s| table.entry(a.initial(), below, r, s))
            .collect();
        let highs: Vec<usize> = table.order()[a.rank_position(r)..].to_vec();
        for u in highs {
            for &s1 in &elements {
                let left = table.entry(a.initial(), n - 2, u, s1);
                if left.is_empty_expr() {
                    continue;
                }
                for &s2 in &elements {
                    let right = table.entry(u, below, r, s2);
                    if right.is_empty_expr() {
                        continue;
                    }
                    let s = phi.semigroup().mul(s1, s2);
                    parts.push(RExpr::concat(left.clone(), right).annotated(s));
                }
            }
        }
        let head = union_parts(parts);
        if head.is_empty_expr() {
            continue;
        }
        branches.push(RExpr::concat(head, RExpr::omega(body).annotated(e_r)));
    }
    Ok(union_parts(branches))
}

// ---------------------------------------------------------------------------
// parsing

/// One derivation of a word from an expression. Union choices are
/// transparent; `Plus` lists its iterations in order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParseTree {
    /// A letter matched by a letter node.
    Letter(char),
    /// The empty word matched by an ε node.
    Epsilon,
    /// A concatenation split.
    Concat(Box<ParseTree>, Box<ParseTree>),
    /// The iterations of a plus node, each nonempty in count.
    Plus(Vec<ParseTree>),
}

impl ParseTree {
    /// The parsed word.
    pub fn yield_word(&self) -> Vec<char> {
        match self {
            ParseTree::Letter(a) => vec![*a],
            ParseTree::Epsilon => Vec::new(),
            ParseTree::Concat(l, r) => {
                let mut w = l.yield_word();
                w.extend(r.yield_word());
                w
            }
            ParseTree::Plus(ts) => ts.iter().flat_map(|t| t.yield_word()).collect(),
        }
    }
}

// the expression DAG linearized with children before parents
struct Dag {
    nodes: Vec<RExpr>,
    kids: Vec<Vec<usize>>,
}

fn dag_of(e: &RExpr) -> (Dag, usize) {
    fn go(e: &RExpr, ids: &mut BTreeMap<usize, usize>, dag: &mut Dag) -> usize {
        let key = Rc::as_ptr(&e.node) as usize;
        if let Some(&id) = ids.get(&key) {
            return id;
        }
        let kids = match e.view() {
            ExprView::Union(l, r) | ExprView::Concat(l, r) => {
                vec![go(l, ids, dag), go(r, ids, dag)]
            }
            ExprView::Plus(b) | ExprView::Omega(b) => vec![go(b, ids, dag)],
            _ => Vec::new(),
        };
        let id = dag.nodes.len();
        dag.nodes.push(e.clone());
        dag.kids.push(kids);
        ids.insert(key, id);
        id
    }
    let mut dag = Dag {
        nodes: Vec::new(),
        kids: Vec::new(),
    };
    let root = go(e, &mut BTreeMap::new(), &mut dag);
    (dag, root)
}

// per node, the saturating number of parses of each span w[i..j); Plus
// iterations are counted with nonempty factors so the count stays finite
fn parse_counts(dag: &Dag, w: &[char]) -> Vec<Vec<Vec<usize>>> {
    let n = w.len();
    let mut counts: Vec<Vec<Vec<usize>>> = vec![vec![vec![0; n + 1]; n + 1]; dag.nodes.len()];
    for (id, e) in dag.nodes.iter().enumerate() {
        for i in 0..=n {
            for j in i..=n {
                counts[id][i][j] = match e.view() {
                    ExprView::Empty | ExprView::Omega(_) => 0,
                    ExprView::Epsilon => usize::from(i == j),
                    ExprView::Letter(a) => usize::from(j == i + 1 && w[i] == a),
                    ExprView::Union(..) => {
                        let (l, r) = (dag.kids[id][0], dag.kids[id][1]);
                        counts[l][i][j].saturating_add(counts[r][i][j])
                    }
                    ExprView::Concat(..) => {
                        let (l, r) = (dag.kids[id][0], dag.kids[id][1]);
                        (i..=j).fold(0usize, |acc, k| {
                            acc.saturating_add(counts[l][i][k].saturating_mul(counts[r][k][j]))
                        })
                    }
                    ExprView::Plus(_) => {
                        let b = dag.kids[id][0];
                        // last factor w[k..j) nonempty, prefix already split
                        let mut total = counts[b][i][j];
                        if j > i + 1 {
                            let pre = &counts[id][i];
                            for (x, row) in pre[i + 1..j].iter().zip(&counts[b][i + 1..j]) {
                                total = total.saturating_add(x.saturating_mul(row[j]));
                            }
                        }
                        total
                    }
                };
            }
        }
    }
    counts
}

/// The number of derivations of `w` from `E` (saturating). Plus iterations
/// count nonempty factors only, so expressions with ε bodies stay finite.
pub fn count_parses(e: &RExpr, w: &[char]) -> usize {
    let (dag, root) = dag_of(e);
    parse_counts(&dag, w)[root][0][w.len()]
}

/// The unique derivation of `w` from `E`; errors when there are zero or
/// several.
pub fn parse_unique(e: &RExpr, w: &[char]) -> Result<ParseTree, RExprError> {
    let (dag, root) = dag_of(e);
    let counts = parse_counts(&dag, w);
    match counts[root][0][w.len()] {
        0 => Err(RExprError::NoParse),
        1 => Ok(extract(&dag, &counts, root, 0, w.len())),
        n => Err(RExprError::Ambiguous(n)),
    }
}

// pre: counts[id][i][j] == 1
fn extract(dag: &Dag, counts: &[Vec<Vec<usize>>], id: usize, i: usize, j: usize) -> ParseTree {
    match dag.nodes[id].view() {
        ExprView::Letter(a) => ParseTree::Letter(a),
        ExprView::Epsilon => ParseTree::Epsilon,
        ExprView::Union(..) => {
            let (l, r) = (dag.kids[id][0], dag.kids[id][1]);
            if counts[l][i][j] == 1 {
                extract(dag, counts, l, i, j)
            } else {
                extract(dag, counts, r, i, j)
            }
        }
        ExprView::Concat(..) => {
            let (l, r) = (dag.kids[id][0], dag.kids[id][1]);
            let k = (i..=j)
                .find(|&k| counts[l][i][k].saturating_mul(counts[r][k][j]) == 1)
                .expect("a unique parse has a split");
            ParseTree::Concat(
                Box::new(extract(dag, counts, l, i, k)),
                Box::new(extract(dag, counts, r, k, j)),
            )
        }
        ExprView::Plus(_) => {
            let b = dag.kids[id][0];
            // exactly one term of the recurrence contributes: peel the last
            // factor off the back until only a single factor remains
            let mut parts = Vec::new();
            let mut end = j;
            loop {
                let split =
                    (i + 1..end).find(|&k| counts[id][i][k].saturating_mul(counts[b][k][end]) >= 1);
                match split {
                    Some(k) => {
                        parts.push(extract(dag, counts, b, k, end));
                        end = k;
                    }
                    None => {
                        parts.push(extract(dag, counts, b, i, end));
                        break;
                    }
                }
            }
            parts.reverse();
            ParseTree::Plus(parts)
        }
        ExprView::Empty | ExprView::Omega(_) => unreachable!("no parses"),
    }
}

/// Converts a derivation from a good expression into a factorization tree:
/// concatenations become binary nodes, plus nodes with k ≥ 2 iterations
/// become k-ary nodes sharing one idempotent label, single iterations
/// collapse. The derivation must be ε-free.
pub fn parse_to_fact_tree(t: &ParseTree, phi: &Morphism) -> FactTree {
    let label = |t: &ParseTree| {
        phi.eval(&t.yield_word())
            .expect("nonempty yield over the morphism's alphabet")
    };
    match t {
        ParseTree::Letter(a) => FactTree::Leaf(*a),
        ParseTree::Epsilon => panic!("derivation is not ε-free"),
        ParseTree::Concat(l, r) => FactTree::Node {
            label: label(t),
            children: vec![parse_to_fact_tree(l, phi), parse_to_fact_tree(r, phi)],
        },
        ParseTree::Plus(ts) if ts.len() == 1 => parse_to_fact_tree(&ts[0], phi),
        ParseTree::Plus(ts) => FactTree::Node {
            label: label(t),
            children: ts.iter().map(|t| parse_to_fact_tree(t, phi)).collect(),
        },
    }
}

// ---------------------------------------------------------------------------
// goodness checking

/// Outcome of checking the goodness conditions of an expression.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExprCheck {
    /// Annotated nodes (rendered) whose exact image set is not the
    /// annotation singleton, or whose language contains ε.
    pub annotation_violations: Vec<(String, BTreeSet<Elem>)>,
    /// Plus/ω nodes (rendered) whose image is not a single idempotent.
    pub iteration_violations: Vec<(String, BTreeSet<Elem>)>,
    /// Letters outside the morphism's alphabet.
    pub foreign_letters: BTreeSet<char>,
    /// A shortest word (within the bound) with two or more parses.
    pub ambiguity: Option<(Vec<char>, usize)>,
}

impl ExprCheck {
    /// All conditions hold.
    pub fn is_good(&self) -> bool {
        self.annotation_violations.is_empty()
            && self.iteration_violations.is_empty()
            && self.foreign_letters.is_empty()
            && self.ambiguity.is_none()
    }
}

/// Checks goodness: exact compositional image sets (annotated nodes must be
/// their singleton, plus/ω bodies a single idempotent) and bounded
/// unambiguity (every word up to `len_bound` has at most one parse).
pub fn check_good_expression(e: &RExpr, phi: &Morphism, len_bound: usize) -> ExprCheck {
    let sg = phi.semigroup();
    let (dag, _) = dag_of(e);
    let mut check = ExprCheck {
        annotation_violations: Vec::new(),
        iteration_violations: Vec::new(),
        foreign_letters: BTreeSet::new(),
        ambiguity: None,
    };
    // (image set, nullable) per node, children first
    let mut info: Vec<(BTreeSet<Elem>, bool)> = Vec::with_capacity(dag.nodes.len());
    for (id, node) in dag.nodes.iter().enumerate() {
        let entry = match node.view() {
            ExprView::Empty => (BTreeSet::new(), false),
            ExprView::Epsilon => (BTreeSet::new(), true),
            ExprView::Letter(a) => match phi.letter(a) {
                Ok(s) => (BTreeSet::from([s]), false),
                Err(_) => {
                    check.foreign_letters.insert(a);
                    (BTreeSet::new(), false)
                }
            },
            ExprView::Union(..) => {
                let (l, r) = (dag.kids[id][0], dag.kids[id][1]);
                let set = info[l].0.union(&info[r].0).copied().collect();
                (set, info[l].1 || info[r].1)
            }
            ExprView::Concat(..) => {
                let (l, r) = (dag.kids[id][0], dag.kids[id][1]);
                let mut set = BTreeSet::new();
                for &s in &info[l].0 {
                    for &t in &info[r].0 {
                        set.insert(sg.mul(s, t));
                    }
                }
                if info[l].1 {
                    set.extend(info[r].0.iter().copied());
                }
                if info[r].1 {
                    set.extend(info[l].0.iter().copied());
                }
                (set, info[l].1 && info[r].1)
            }
            ExprView::Plus(_) | ExprView::Omega(_) => {
                let b = dag.kids[id][0];
                (product_closure(sg, &info[b].0), info[b].1)
            }
        };
        info.push(entry);
    }
    for (id, node) in dag.nodes.iter().enumerate() {
        let (set, nullable) = &info[id];
        let rendered = || node.to_text(sg);
        if let Some(s) = node.annotation() {
            if *set != BTreeSet::from([s]) || *nullable {
                check.annotation_violations.push((rendered(), set.clone()));
            }
        }
        if matches!(node.view(), ExprView::Plus(_) | ExprView::Omega(_)) {
            let single_idem = set.len() == 1 && sg.is_idempotent(*set.iter().next().unwrap());
            if !single_idem {
                check.iteration_violations.push((rendered(), set.clone()));
            }
        }
    }
    'words: for len in 1..=len_bound {
        for w in words_of_length(phi.alphabet(), len) {
            let n = count_parses(e, &w);
            if n > 1 {
                check.ambiguity = Some((w, n));
                break 'words;
            }
        }
    }
    check
}

// all products of one or more factors from `set`
fn product_closure(sg: &FiniteSemigroup, set: &BTreeSet<Elem>) -> BTreeSet<Elem> {
    let mut out = set.clone();
    loop {
        let mut grew = false;
        for &s in &out.clone() {
            for &t in set {
                grew |= out.insert(sg.mul(s, t));
            }
        }
        if !grew {
            return out;
        }
    }
}

// ---------------------------------------------------------------------------
// ω-branch matching

// Glushkov position sets; `follow` is indexed by position
struct Gl {
    nullable: bool,
    first: BTreeSet<usize>,
    last: BTreeSet<usize>,
}

fn glushkov(e: &RExpr, letters: &mut Vec<char>, follow: &mut Vec<BTreeSet<usize>>) -> Gl {
    match e.view() {
        ExprView::Empty => Gl {
            nullable: false,
            first: BTreeSet::new(),
            last: BTreeSet::new(),
        },
        ExprView::Epsilon => Gl {
            nullable: true,
            first: BTreeSet::new(),
            last: BTreeSet::new(),
        },
        ExprView::Letter(a) => {
            let p = letters.len();
            letters.push(a);
            follow.push(BTreeSet::new());
            Gl {
                nullable: false,
                first: BTreeSet::from([p]),
                last: BTreeSet::from([p]),
            }
        }
        ExprView::Union(l, r) => {
            let l = glushkov(l, letters, follow);
            let r = glushkov(r, letters, follow);
            Gl {
                nullable: l.nullable || r.nullable,
                first: l.first.union(&r.first).copied().collect(),
                last: l.last.union(&r.last).copied().collect(),
            }
        }
        ExprView::Concat(l, r) => {
            let l = glushkov(l, letters, follow);
            let r = glushkov(r, letters, follow);
            for &p in &l.last {
                follow[p].extend(r.first.iter().copied());
            }
            let mut first = l.first.clone();
            if l.nullable {
                first.extend(r.first.iter().copied());
            }
            let mut last = r.last.clone();
            if r.nullable {
                last.extend(l.last.iter().copied());
            }
            Gl {
                nullable: l.nullable && r.nullable,
                first,
                last,
            }
        }
        ExprView::Plus(b) => {
            let b = glushkov(b, letters, follow);
            for &p in &b.last {
                follow[p].extend(b.first.iter().copied());
            }
            b
        }
        ExprView::Omega(_) => panic!("ω has no position automaton"),
    }
}

// partial DFA over position subsets; state 0 is the start
struct Dfa {
    delta: Vec<BTreeMap<char, usize>>,
    finals: Vec<bool>,
}

fn dfa_of(e: &RExpr) -> Dfa {
    let mut letters = Vec::new();
    let mut follow = Vec::new();
    let gl = glushkov(e, &mut letters, &mut follow);
    let step = |set: &BTreeSet<usize>, a: char| -> BTreeSet<usize> {
        set.iter()
            .flat_map(|&p| follow[p].iter().copied())
            .filter(|&q| letters[q] == a)
            .collect()
    };
    let alphabet: BTreeSet<char> = letters.iter().copied().collect();
    let mut sets: Vec<BTreeSet<usize>> = vec![BTreeSet::new()];
    let mut ids: BTreeMap<BTreeSet<usize>, usize> = BTreeMap::new();
    let mut delta: Vec<BTreeMap<char, usize>> = Vec::new();
    let mut finals = vec![gl.nullable];
    while delta.len() < sets.len() {
        let cur = delta.len();
        let mut row = BTreeMap::new();
        for &a in &alphabet {
            let next: BTreeSet<usize> = if cur == 0 {
                gl.first
                    .iter()
                    .copied()
                    .filter(|&p| letters[p] == a)
                    .collect()
            } else {
                step(&sets[cur], a)
            };
            if next.is_empty() {
                continue;
            }
            let id = match ids.get(&next) {
                Some(&id) => id,
                None => {
                    let id = sets.len();
                    ids.insert(next.clone(), id);
                    finals.push(next.intersection(&gl.last).next().is_some());
                    sets.push(next);
                    id
                }
            };
            row.insert(a, id);
        }
        delta.push(row);
    }
    Dfa { delta, finals }
}

/// How many ways `w` factors as `x · y₁y₂⋯` with `x ∈ 𝓛(F)` and every
/// `yᵢ ∈ 𝓛(G)` — the match count of one ω-expression branch `F · G^ω`,
/// decided exactly on the ultimately periodic word.
pub fn match_up_branch(f: &RExpr, g: &RExpr, w: &UpWord, phi: &Morphism) -> UpVerdict {
    let df = dfa_of(f);
    let dg = dfa_of(g);
    let nf = df.delta.len();
    // states: F-part, then (G-state, fresh) pairs; fresh marks the first
    // state of each new factor and carries the Büchi condition
    let gid = |q: usize, fresh: usize| nf + 2 * q + fresh;
    let total = nf + 2 * dg.delta.len();
    let names: Vec<String> = (0..nf)
        .map(|i| format!("F{i}"))
        .chain((0..dg.delta.len()).flat_map(|i| [format!("G{i}"), format!("G{i}'")]))
        .collect();
    let ranks: Vec<i64> = (0..total as i64).collect();
    let mut alphabet: BTreeSet<char> = phi.alphabet().iter().copied().collect();
    alphabet.extend(w.prefix().iter().copied());
    alphabet.extend(w.period().iter().copied());
    let mut transitions: Vec<(usize, char, usize)> = Vec::new();
    let open = |p: usize, transitions: &mut Vec<(usize, char, usize)>| {
        // a factor boundary: the next letter starts a fresh G factor
        for (&a, &q) in dg.delta[0].iter() {
            transitions.push((p, a, gid(q, 1)));
        }
    };
    for (p, row) in df.delta.iter().enumerate() {
        for (&a, &q) in row {
            transitions.push((p, a, q));
        }
        if df.finals[p] {
            open(p, &mut transitions);
        }
    }
    for (q, row) in dg.delta.iter().enumerate() {
        for fresh in 0..2 {
            for (&a, &q2) in row {
                transitions.push((gid(q, fresh), a, gid(q2, 0)));
            }
            if dg.finals[q] {
                open(gid(q, fresh), &mut transitions);
            }
        }
    }
    let buchi: BTreeSet<usize> = (0..dg.delta.len()).map(|q| gid(q, 1)).collect();
    let a = OrderedAutomaton::new(
        names,
        ranks,
        alphabet.into_iter().collect(),
        &transitions,
        0,
        BTreeSet::new(),
        buchi,
    )
    .expect("branch automaton is valid");
    let (verdict, _) = a
        .accepting_runs_up(w, UpMode::Unique)
        .expect("alphabet covers the word");
    verdict
}
