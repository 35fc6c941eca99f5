//! Ordered Büchi/finite automata: run search on finite and ultimately
//! periodic words, exact language-image analysis, reduction, and
//! verification of the four axioms making an automaton usable as a
//! factorization oracle.

use crate::algebra::{Elem, Morphism};
use alloc::collections::btree_map::Entry;
use alloc::collections::{BTreeMap, BTreeSet, VecDeque};
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

/// Errors raised while constructing or querying automata.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AutomatonError {
    /// Automata need at least one state.
    NoStates,
    /// Two states share a name.
    DuplicateStateName(String),
    /// Two states share a rank; the order must be total.
    DuplicateRank(i64),
    /// A state index is out of range.
    StateOutOfRange(usize),
    /// A state name does not exist.
    UnknownState(String),
    /// The alphabet is empty.
    EmptyAlphabet,
    /// A letter appears twice in the alphabet.
    DuplicateLetter(char),
    /// A letter outside the alphabet was used.
    UnknownLetter(char),
    /// Finite run search needs a nonempty word.
    EmptyWord,
    /// The period of an ultimately periodic word must be nonempty.
    EmptyPeriod,
}

impl fmt::Display for AutomatonError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AutomatonError::NoStates => write!(f, "automaton has no states"),
            AutomatonError::DuplicateStateName(n) => write!(f, "duplicate state name {n:?}"),
            AutomatonError::DuplicateRank(r) => write!(f, "duplicate rank {r}"),
            AutomatonError::StateOutOfRange(i) => write!(f, "state index {i} out of range"),
            AutomatonError::UnknownState(n) => write!(f, "unknown state {n:?}"),
            AutomatonError::EmptyAlphabet => write!(f, "alphabet is empty"),
            AutomatonError::DuplicateLetter(c) => write!(f, "duplicate letter {c:?}"),
            AutomatonError::UnknownLetter(c) => write!(f, "unknown letter {c:?}"),
            AutomatonError::EmptyWord => write!(f, "word is empty"),
            AutomatonError::EmptyPeriod => write!(f, "period is empty"),
        }
    }
}

#[cfg(test)]
impl std::error::Error for AutomatonError {}

/// An ultimately periodic word `u · v^ω` with nonempty period `v`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct UpWord {
    prefix: Vec<char>,
    period: Vec<char>,
}

impl UpWord {
    /// Builds `u · v^ω`; the period must be nonempty.
    pub fn new(prefix: Vec<char>, period: Vec<char>) -> Result<UpWord, AutomatonError> {
        if period.is_empty() {
            return Err(AutomatonError::EmptyPeriod);
        }
        Ok(UpWord { prefix, period })
    }

    /// The finite prefix `u` (possibly empty).
    pub fn prefix(&self) -> &[char] {
        &self.prefix
    }

    /// The period `v`.
    pub fn period(&self) -> &[char] {
        &self.period
    }

    /// The letter at position `i` (0-based).
    pub fn letter_at(&self, i: usize) -> char {
        if i < self.prefix.len() {
            self.prefix[i]
        } else {
            self.period[(i - self.prefix.len()) % self.period.len()]
        }
    }
}

impl fmt::Display for UpWord {
    /// Renders as `u(v)^w`, e.g. `ab(ba)^w`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.prefix {
            write!(f, "{c}")?;
        }
        write!(f, "(")?;
        for c in &self.period {
            write!(f, "{c}")?;
        }
        write!(f, ")^w")
    }
}

/// A run: the state sequence aligned with input positions. Finite runs list
/// every state; lasso runs repeat the suffix starting at `cycle_start`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunTrace {
    /// Visited states; `states[i]` is the state before reading letter `i`.
    pub states: Vec<usize>,
    /// For lasso runs, the index where the repeating cycle begins.
    pub cycle_start: Option<usize>,
    /// Whether the run is accepting.
    pub accepted: bool,
}

impl RunTrace {
    /// The state at input position `i`, unrolling the cycle if present.
    pub fn state_at(&self, i: usize) -> usize {
        match self.cycle_start {
            Some(c) if i >= self.states.len() || i >= c => {
                let len = self.states.len() - c;
                self.states[c + (i - c) % len]
            }
            _ => self.states[i],
        }
    }
}

/// Uniqueness verdict for runs on an ultimately periodic word.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UpVerdict {
    /// No accepting run.
    Zero,
    /// At least one accepting run (existence mode stops here).
    AtLeastOne,
    /// Exactly one accepting run.
    ExactlyOne,
    /// Two or more accepting runs.
    Many,
}

/// How precisely to count runs on an ultimately periodic word.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UpMode {
    /// Decide only whether an accepting run exists.
    Exists,
    /// Decide between zero, exactly one, and two or more.
    Unique,
}

/// Exhaustiveness bounds for the word-level checks: finite words up to
/// `max_len`, ultimately periodic words with `|u| <= max_u`, `|v| <= max_v`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Bounds {
    /// Maximum finite word length for enumeration-based checks.
    pub max_len: usize,
    /// Maximum prefix length of enumerated ultimately periodic words.
    pub max_u: usize,
    /// Maximum period length of enumerated ultimately periodic words.
    pub max_v: usize,
}

impl Default for Bounds {
    fn default() -> Self {
        Bounds {
            max_len: 8,
            max_u: 3,
            max_v: 3,
        }
    }
}

/// One reason an axiom fails; stored per axiom in [`GoodnessReport`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    /// Two accepting runs on the same finite word.
    AmbiguousFinite {
        /// A shortest ambiguous word.
        word: Vec<char>,
    },
    /// A finite word with no accepting run.
    NotUniversalFinite {
        /// A shortest rejected word.
        word: Vec<char>,
    },
    /// Two accepting runs on the same ultimately periodic word.
    AmbiguousUp {
        /// The offending word.
        word: UpWord,
    },
    /// An ultimately periodic word with no accepting run.
    NotUniversalUp {
        /// The offending word.
        word: UpWord,
    },
    /// A loop language maps outside a single idempotent.
    LoopImage {
        /// The state whose loop language misbehaves.
        state: usize,
        /// A loop word witnessing the violation.
        witness: Vec<char>,
        /// Its image: either not idempotent, or a second distinct image.
        elem: Elem,
    },
    /// A transition enters the initial state.
    EdgeIntoInitial {
        /// Source of the offending transition.
        source: usize,
        /// Its letter.
        letter: char,
    },
    /// A state ranks above the initial state.
    InitialNotMaximal {
        /// The offending state.
        above: usize,
    },
    /// There is not exactly one final state.
    FinalsNotSingleton {
        /// How many finals there are.
        count: usize,
    },
    /// The final state has an outgoing transition.
    EdgeOutOfFinal {
        /// Its letter.
        letter: char,
        /// Its target.
        target: usize,
    },
    /// A state other than the initial one ranks above the final state.
    FinalNotSecondMaximal {
        /// The offending state.
        state: usize,
    },
}

/// Verdicts of the four axioms, with counterexamples where applicable.
///
/// The axioms: (1) the automaton is unambiguous and universal over finite
/// and infinite words; (2) every loop language through lower states maps
/// into a single idempotent; (3) the initial state has no incoming edge and
/// maximal rank; (4) there is a single final sink ranked just below the
/// initial state.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GoodnessReport {
    /// Unambiguity/universality violations (exact on finite words, bounded
    /// on ultimately periodic ones).
    pub g1: Vec<Violation>,
    /// Loop-image violations.
    pub g2: Vec<Violation>,
    /// Initial-state violations.
    pub g3: Vec<Violation>,
    /// Final-state violations.
    pub g4: Vec<Violation>,
    /// Per state, the exact image set of its loop language.
    pub loop_images: BTreeMap<usize, BTreeSet<Elem>>,
}

impl GoodnessReport {
    /// All four axioms hold.
    pub fn is_good(&self) -> bool {
        self.is_weakly_good() && self.g4.is_empty()
    }

    /// The first three axioms hold.
    pub fn is_weakly_good(&self) -> bool {
        self.g1.is_empty() && self.g2.is_empty() && self.g3.is_empty()
    }
}

/// A finite automaton whose states carry an injective integer rank (a total
/// order), with both a final-state set for finite words and a Büchi set for
/// infinite words.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrderedAutomaton {
    names: Vec<String>,
    ranks: Vec<i64>,
    alphabet: Vec<char>,
    delta: BTreeMap<(usize, char), BTreeSet<usize>>,
    initial: usize,
    finals: BTreeSet<usize>,
    buchi: BTreeSet<usize>,
}

impl OrderedAutomaton {
    /// Validates and builds an automaton over state indices.
    pub fn new(
        names: Vec<String>,
        ranks: Vec<i64>,
        alphabet: Vec<char>,
        transitions: &[(usize, char, usize)],
        initial: usize,
        finals: BTreeSet<usize>,
        buchi: BTreeSet<usize>,
    ) -> Result<OrderedAutomaton, AutomatonError> {
        let n = names.len();
        if n == 0 {
            return Err(AutomatonError::NoStates);
        }
        if ranks.len() != n {
            return Err(AutomatonError::StateOutOfRange(ranks.len()));
        }
        let mut seen_names = BTreeSet::new();
        for name in &names {
            if !seen_names.insert(name.clone()) {
                return Err(AutomatonError::DuplicateStateName(name.clone()));
            }
        }
        let mut seen_ranks = BTreeSet::new();
        for &r in &ranks {
            if !seen_ranks.insert(r) {
                return Err(AutomatonError::DuplicateRank(r));
            }
        }
        if alphabet.is_empty() {
            return Err(AutomatonError::EmptyAlphabet);
        }
        let mut seen_letters = BTreeSet::new();
        for &a in &alphabet {
            if !seen_letters.insert(a) {
                return Err(AutomatonError::DuplicateLetter(a));
            }
        }
        if initial >= n {
            return Err(AutomatonError::StateOutOfRange(initial));
        }
        for &q in finals.iter().chain(buchi.iter()) {
            if q >= n {
                return Err(AutomatonError::StateOutOfRange(q));
            }
        }
        let mut delta: BTreeMap<(usize, char), BTreeSet<usize>> = BTreeMap::new();
        for &(p, a, q) in transitions {
            if p >= n {
                return Err(AutomatonError::StateOutOfRange(p));
            }
            if q >= n {
                return Err(AutomatonError::StateOutOfRange(q));
            }
            if !seen_letters.contains(&a) {
                return Err(AutomatonError::UnknownLetter(a));
            }
            delta.entry((p, a)).or_default().insert(q);
        }
        Ok(OrderedAutomaton {
            names,
            ranks,
            alphabet,
            delta,
            initial,
            finals,
            buchi,
        })
    }

    /// Name-based construction convenience.
    pub fn build(
        states: &[(&str, i64)],
        alphabet: &[char],
        transitions: &[(&str, char, &str)],
        initial: &str,
        finals: &[&str],
        buchi: &[&str],
    ) -> Result<OrderedAutomaton, AutomatonError> {
        let names: Vec<String> = states.iter().map(|(n, _)| String::from(*n)).collect();
        let ranks: Vec<i64> = states.iter().map(|(_, r)| *r).collect();
        let idx = |name: &str| -> Result<usize, AutomatonError> {
            names
                .iter()
                .position(|n| n == name)
                .ok_or_else(|| AutomatonError::UnknownState(String::from(name)))
        };
        let transitions: Vec<(usize, char, usize)> = transitions
            .iter()
            .map(|&(p, a, q)| Ok((idx(p)?, a, idx(q)?)))
            .collect::<Result<_, AutomatonError>>()?;
        let finals: BTreeSet<usize> = finals.iter().map(|n| idx(n)).collect::<Result<_, _>>()?;
        let buchi: BTreeSet<usize> = buchi.iter().map(|n| idx(n)).collect::<Result<_, _>>()?;
        let initial = idx(initial)?;
        OrderedAutomaton::new(
            names,
            ranks,
            alphabet.to_vec(),
            &transitions,
            initial,
            finals,
            buchi,
        )
    }

    /// Number of states.
    pub fn state_count(&self) -> usize {
        self.names.len()
    }

    /// State names, indexed by state.
    pub fn names(&self) -> &[String] {
        &self.names
    }

    /// Name of one state.
    pub fn name(&self, q: usize) -> &str {
        &self.names[q]
    }

    /// Looks a state up by name.
    pub fn state_by_name(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    /// Rank of a state; smaller means lower in the order.
    pub fn rank(&self, q: usize) -> i64 {
        self.ranks[q]
    }

    /// All ranks, indexed by state.
    pub fn ranks(&self) -> &[i64] {
        &self.ranks
    }

    /// The alphabet in declaration order.
    pub fn alphabet(&self) -> &[char] {
        &self.alphabet
    }

    /// The initial state.
    pub fn initial(&self) -> usize {
        self.initial
    }

    /// The final states.
    pub fn finals(&self) -> &BTreeSet<usize> {
        &self.finals
    }

    /// The Büchi (repeated) states.
    pub fn buchi(&self) -> &BTreeSet<usize> {
        &self.buchi
    }

    /// Successors of `q` on letter `a`, in ascending state index.
    pub fn successors(&self, q: usize, a: char) -> impl Iterator<Item = usize> + '_ {
        self.delta.get(&(q, a)).into_iter().flatten().copied()
    }

    /// All transitions, ordered by (source, letter, target).
    pub fn transitions(&self) -> impl Iterator<Item = (usize, char, usize)> + '_ {
        self.delta
            .iter()
            .flat_map(|(&(p, a), qs)| qs.iter().map(move |&q| (p, a, q)))
    }

    /// The states strictly below `q` in the rank order.
    pub fn down_set(&self, q: usize) -> BTreeSet<usize> {
        let r = self.ranks[q];
        (0..self.state_count())
            .filter(|&p| self.ranks[p] < r)
            .collect()
    }

    /// All states sorted by ascending rank.
    pub fn states_by_rank(&self) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.state_count()).collect();
        order.sort_by_key(|&q| self.ranks[q]);
        order
    }

    /// The 1-based position of `q` in the rank order: the unique monotone
    /// bijection onto `1..=|Q|`.
    pub fn rank_position(&self, q: usize) -> usize {
        let r = self.ranks[q];
        1 + self.ranks.iter().filter(|&&x| x < r).count()
    }

    /// Exactly one successor per (state, letter) pair.
    pub fn is_deterministic(&self) -> bool {
        (0..self.state_count()).all(|q| {
            self.alphabet
                .iter()
                .all(|&a| self.successors(q, a).count() <= 1)
        })
    }

    /// At least one successor per (state, letter) pair.
    pub fn is_complete(&self) -> bool {
        (0..self.state_count()).all(|q| {
            self.alphabet
                .iter()
                .all(|&a| self.successors(q, a).next().is_some())
        })
    }

    fn check_letters(&self, w: &[char]) -> Result<(), AutomatonError> {
        for &a in w {
            if !self.alphabet.contains(&a) {
                return Err(AutomatonError::UnknownLetter(a));
            }
        }
        Ok(())
    }

    /// All accepting runs on a nonempty finite word, in lexicographic order
    /// of their state-index sequences.
    pub fn accepting_runs_finite(&self, w: &[char]) -> Result<Vec<RunTrace>, AutomatonError> {
        if w.is_empty() {
            return Err(AutomatonError::EmptyWord);
        }
        self.check_letters(w)?;
        let n = w.len();
        let q_count = self.state_count();
        // can[i][q]: a run from q over w[i..] can end in a final state.
        // Pruning on it makes the search linear in the number of accepting
        // runs rather than of all runs.
        let mut can = vec![vec![false; q_count]; n + 1];
        for &f in &self.finals {
            can[n][f] = true;
        }
        for i in (0..n).rev() {
            for q in 0..q_count {
                can[i][q] = self.successors(q, w[i]).any(|r| can[i + 1][r]);
            }
        }
        let mut runs = Vec::new();
        if !can[0][self.initial] {
            return Ok(runs);
        }
        let mut path = vec![self.initial];
        self.dfs_runs(w, &can, &mut path, &mut runs);
        Ok(runs)
    }

    fn dfs_runs(
        &self,
        w: &[char],
        can: &[Vec<bool>],
        path: &mut Vec<usize>,
        runs: &mut Vec<RunTrace>,
    ) {
        let i = path.len() - 1;
        if i == w.len() {
            runs.push(RunTrace {
                states: path.clone(),
                cycle_start: None,
                accepted: true,
            });
            return;
        }
        let q = *path.last().unwrap();
        for r in self.successors(q, w[i]).collect::<Vec<_>>() {
            if can[i + 1][r] {
                path.push(r);
                self.dfs_runs(w, can, path, runs);
                path.pop();
            }
        }
    }

    /// Number of accepting runs on a finite word, saturating at `u64::MAX`.
    pub fn count_runs_finite(&self, w: &[char]) -> Result<u64, AutomatonError> {
        if w.is_empty() {
            return Err(AutomatonError::EmptyWord);
        }
        self.check_letters(w)?;
        let mut counts = vec![0u64; self.state_count()];
        counts[self.initial] = 1;
        for &a in w {
            let mut next = vec![0u64; self.state_count()];
            for (q, &c) in counts.iter().enumerate() {
                if c > 0 {
                    for r in self.successors(q, a) {
                        next[r] = next[r].saturating_add(c);
                    }
                }
            }
            counts = next;
        }
        Ok(self
            .finals
            .iter()
            .map(|&f| counts[f])
            .fold(0u64, u64::saturating_add))
    }

    // Product of the automaton with the position graph of w: nodes (q, i)
    // where i < |u| + |v|, reading letter i then moving to i+1 (wrapping the
    // last position back to |u|).
    fn up_positions(&self, w: &UpWord) -> usize {
        w.prefix().len() + w.period().len()
    }

    fn up_next_pos(&self, w: &UpWord, i: usize) -> usize {
        if i + 1 < self.up_positions(w) {
            i + 1
        } else {
            w.prefix().len()
        }
    }

    /// Decides acceptance of an ultimately periodic word: existence of an
    /// accepting run, or exact uniqueness. Returns one accepting lasso when
    /// there is one. Both modes are exact, not sampled.
    pub fn accepting_runs_up(
        &self,
        w: &UpWord,
        mode: UpMode,
    ) -> Result<(UpVerdict, Option<RunTrace>), AutomatonError> {
        self.check_letters(w.prefix())?;
        self.check_letters(w.period())?;
        let m = self.up_positions(w);
        let q_count = self.state_count();
        let node = |q: usize, i: usize| q * m + i;
        let mut adj: Vec<Vec<usize>> = vec![Vec::new(); q_count * m];
        for q in 0..q_count {
            for i in 0..m {
                let j = self.up_next_pos(w, i);
                for r in self.successors(q, w.letter_at(i)) {
                    adj[node(q, i)].push(node(r, j));
                }
            }
        }
        let start = node(self.initial, 0);
        let reachable = reachable_set(&adj, start);
        let (comp, _) = sccs(&adj);
        let cyclic = cyclic_components(&adj, &comp);
        // Accepting lasso: a reachable Büchi node inside a component with a
        // cycle (every node of such a component lies on a cycle).
        let target = (0..q_count * m)
            .find(|&v| reachable[v] && cyclic[comp[v]] && self.buchi.contains(&(v / m)));
        let Some(target) = target else {
            return Ok((UpVerdict::Zero, None));
        };
        let run = self.extract_lasso(&adj, start, target, m);

        if let UpMode::Exists = mode {
            return Ok((UpVerdict::AtLeastOne, Some(run)));
        }

        // Pair product with a sticky divergence bit, explored lazily from
        // the initial pair; two distinct accepting runs exist iff a reachable
        // cyclic component carries the bit and contains Büchi visits in both
        // coordinates. Laziness keeps the footprint at the number of
        // reachable pair nodes rather than |Q|²·m·2.
        let mut ids: BTreeMap<(usize, usize, usize, usize), usize> = BTreeMap::new();
        let mut nodes: Vec<(usize, usize, usize, usize)> = Vec::new();
        let mut padj: Vec<Vec<usize>> = Vec::new();
        ids.insert((self.initial, self.initial, 0, 0), 0);
        nodes.push((self.initial, self.initial, 0, 0));
        while padj.len() < nodes.len() {
            let (q1, q2, i, d) = nodes[padj.len()];
            let j = self.up_next_pos(w, i);
            let a = w.letter_at(i);
            let mut out = Vec::new();
            for r1 in self.successors(q1, a).collect::<Vec<_>>() {
                for r2 in self.successors(q2, a) {
                    let d2 = if r1 != r2 { 1 } else { d };
                    let key = (r1, r2, j, d2);
                    let next_id = nodes.len();
                    let id = *ids.entry(key).or_insert(next_id);
                    if id == next_id {
                        nodes.push(key);
                    }
                    out.push(id);
                }
            }
            padj.push(out);
        }
        let (pcomp, pncomp) = sccs(&padj);
        let pcyclic = cyclic_components(&padj, &pcomp);
        let mut comp_div = vec![false; pncomp];
        let mut comp_r1 = vec![false; pncomp];
        let mut comp_r2 = vec![false; pncomp];
        for (v, &(q1, q2, _, d)) in nodes.iter().enumerate() {
            if d == 1 {
                comp_div[pcomp[v]] = true;
            }
            if self.buchi.contains(&q1) {
                comp_r1[pcomp[v]] = true;
            }
            if self.buchi.contains(&q2) {
                comp_r2[pcomp[v]] = true;
            }
        }
        // Every explored node is reachable, so a cyclic component with the
        // needed marks yields two runs.
        let many = (0..pncomp).any(|c| pcyclic[c] && comp_div[c] && comp_r1[c] && comp_r2[c]);
        Ok(if many {
            (UpVerdict::Many, Some(run))
        } else {
            (UpVerdict::ExactlyOne, Some(run))
        })
    }

    fn extract_lasso(&self, adj: &[Vec<usize>], start: usize, target: usize, m: usize) -> RunTrace {
        let stem = bfs_path(adj, start, |v| v == target).expect("target is reachable");
        let cycle = bfs_cycle(adj, target).expect("target lies on a cycle");
        let mut states: Vec<usize> = stem[..stem.len() - 1].iter().map(|&v| v / m).collect();
        let cycle_start = states.len();
        states.push(target / m);
        states.extend(cycle[1..cycle.len() - 1].iter().map(|&v| v / m));
        RunTrace {
            states,
            cycle_start: Some(cycle_start),
            accepted: true,
        }
    }

    /// Exact image set `{phi(w) : w nonempty, run p -> q with intermediate
    /// states in X}`, by fixpoint over (state, element) pairs.
    pub fn image_of_restricted_language(
        &self,
        phi: &Morphism,
        p: usize,
        x: &BTreeSet<usize>,
        q: usize,
    ) -> BTreeSet<Elem> {
        self.restricted_language_witnesses(phi, p, x)
            .into_iter()
            .filter_map(|((r, s), _)| (r == q).then_some(s))
            .collect()
    }

    /// For every pair (end state r, element s) reachable from `p` by a
    /// nonempty word with intermediates in `X`, one shortest witness word
    /// (ties broken by letter order).
    pub fn restricted_language_witnesses(
        &self,
        phi: &Morphism,
        p: usize,
        x: &BTreeSet<usize>,
    ) -> BTreeMap<(usize, Elem), Vec<char>> {
        let mut best: BTreeMap<(usize, Elem), Vec<char>> = BTreeMap::new();
        let mut queue: VecDeque<(usize, Elem)> = VecDeque::new();
        for &a in phi.alphabet() {
            let Ok(e) = phi.letter(a) else { continue };
            for r in self.successors(p, a) {
                if let Entry::Vacant(slot) = best.entry((r, e)) {
                    slot.insert(vec![a]);
                    queue.push_back((r, e));
                }
            }
        }
        while let Some((r, s)) = queue.pop_front() {
            if !x.contains(&r) {
                continue; // r may only end a word, not continue one
            }
            let w = best[&(r, s)].clone();
            for &a in phi.alphabet() {
                let Ok(e) = phi.letter(a) else { continue };
                let s2 = phi.semigroup().mul(s, e);
                for r2 in self.successors(r, a) {
                    if let Entry::Vacant(slot) = best.entry((r2, s2)) {
                        let mut w2 = w.clone();
                        w2.push(a);
                        slot.insert(w2);
                        queue.push_back((r2, s2));
                    }
                }
            }
        }
        best
    }

    /// Exact unambiguity over finite words, via the self-product with a
    /// divergence bit; returns a shortest ambiguous word on failure.
    pub fn check_unambiguous_finite(&self) -> Result<(), Vec<char>> {
        let q_count = self.state_count();
        let node = |q1: usize, q2: usize, d: usize| (q1 * q_count + q2) * 2 + d;
        let start = node(self.initial, self.initial, 0);
        let mut parent: BTreeMap<usize, (usize, char)> = BTreeMap::new();
        let mut seen = vec![false; q_count * q_count * 2];
        seen[start] = true;
        let mut queue = VecDeque::from([start]);
        while let Some(v) = queue.pop_front() {
            let d = v % 2;
            let q2 = (v / 2) % q_count;
            let q1 = (v / 2) / q_count;
            if d == 1 && self.finals.contains(&q1) && self.finals.contains(&q2) {
                let mut word = Vec::new();
                let mut cur = v;
                while cur != start {
                    let (prev, a) = parent[&cur];
                    word.push(a);
                    cur = prev;
                }
                word.reverse();
                return Err(word);
            }
            for &a in &self.alphabet {
                for r1 in self.successors(q1, a) {
                    for r2 in self.successors(q2, a) {
                        let d2 = if r1 != r2 { 1 } else { d };
                        let v2 = node(r1, r2, d2);
                        if !seen[v2] {
                            seen[v2] = true;
                            parent.insert(v2, (v, a));
                            queue.push_back(v2);
                        }
                    }
                }
            }
        }
        Ok(())
    }

    /// Exact universality over nonempty finite words, via the subset
    /// construction; returns a shortest rejected word on failure.
    pub fn check_universal_finite(&self) -> Result<(), Vec<char>> {
        let start: BTreeSet<usize> = [self.initial].into_iter().collect();
        let mut seen: BTreeSet<BTreeSet<usize>> = [start.clone()].into_iter().collect();
        let mut queue: VecDeque<(BTreeSet<usize>, Vec<char>)> =
            VecDeque::from([(start, Vec::new())]);
        while let Some((set, word)) = queue.pop_front() {
            for &a in &self.alphabet {
                let next: BTreeSet<usize> =
                    set.iter().flat_map(|&q| self.successors(q, a)).collect();
                let mut word2 = word.clone();
                word2.push(a);
                if next.is_disjoint(&self.finals) {
                    return Err(word2);
                }
                if seen.insert(next.clone()) {
                    queue.push_back((next, word2));
                }
            }
        }
        Ok(())
    }

    /// Bounded universality (and optionally unambiguity) over ultimately
    /// periodic words with `|u| <= max_u`, `1 <= |v| <= max_v`.
    pub fn check_universal_up_bounded(
        &self,
        max_u: usize,
        max_v: usize,
        require_unique: bool,
    ) -> Result<(), (UpWord, UpVerdict)> {
        let mode = if require_unique {
            UpMode::Unique
        } else {
            UpMode::Exists
        };
        for lu in 0..=max_u {
            for u in words_of_length(&self.alphabet, lu) {
                for lv in 1..=max_v {
                    for v in words_of_length(&self.alphabet, lv) {
                        let w = UpWord::new(u.clone(), v).expect("period nonempty");
                        let (verdict, _) = self
                            .accepting_runs_up(&w, mode)
                            .expect("letters in alphabet");
                        match verdict {
                            UpVerdict::Zero | UpVerdict::Many => return Err((w, verdict)),
                            _ => {}
                        }
                    }
                }
            }
        }
        Ok(())
    }

    /// Checks all four axioms; violations become report entries.
    pub fn verify_goodness(&self, phi: &Morphism, bounds: Bounds) -> GoodnessReport {
        let mut g1 = Vec::new();
        if let Err(word) = self.check_unambiguous_finite() {
            g1.push(Violation::AmbiguousFinite { word });
        }
        if let Err(word) = self.check_universal_finite() {
            g1.push(Violation::NotUniversalFinite { word });
        }
        if let Err((word, verdict)) =
            self.check_universal_up_bounded(bounds.max_u, bounds.max_v, true)
        {
            g1.push(match verdict {
                UpVerdict::Zero => Violation::NotUniversalUp { word },
                _ => Violation::AmbiguousUp { word },
            });
        }

        let mut g2 = Vec::new();
        let mut loop_images = BTreeMap::new();
        for q in 0..self.state_count() {
            let down = self.down_set(q);
            let pairs = self.restricted_language_witnesses(phi, q, &down);
            let mut loops: Vec<(Elem, &Vec<char>)> = pairs
                .iter()
                .filter_map(|((r, s), w)| (*r == q).then_some((*s, w)))
                .collect();
            loop_images.insert(q, loops.iter().map(|&(s, _)| s).collect::<BTreeSet<Elem>>());
            // shortest witnesses first, ties by letter order
            let pos = |w: &Vec<char>| -> Vec<usize> {
                w.iter()
                    .map(|a| {
                        self.alphabet
                            .iter()
                            .position(|x| x == a)
                            .unwrap_or(usize::MAX)
                    })
                    .collect()
            };
            loops.sort_by_key(|(_, w)| (w.len(), pos(w)));
            if let Some(&(s, w)) = loops
                .iter()
                .find(|(s, _)| !phi.semigroup().is_idempotent(*s))
            {
                g2.push(Violation::LoopImage {
                    state: q,
                    witness: w.clone(),
                    elem: s,
                });
            } else if loops.iter().map(|&(s, _)| s).collect::<BTreeSet<_>>().len() > 1 {
                // all idempotent but not a singleton: report a word for the
                // second distinct image
                let first = loops[0].0;
                let (s, w) = loops.iter().find(|&&(s, _)| s != first).unwrap();
                g2.push(Violation::LoopImage {
                    state: q,
                    witness: (*w).clone(),
                    elem: *s,
                });
            }
        }

        let mut g3 = Vec::new();
        for (p, a, q) in self.transitions() {
            if q == self.initial {
                g3.push(Violation::EdgeIntoInitial {
                    source: p,
                    letter: a,
                });
            }
        }
        for q in 0..self.state_count() {
            if self.ranks[q] > self.ranks[self.initial] {
                g3.push(Violation::InitialNotMaximal { above: q });
            }
        }

        let mut g4 = Vec::new();
        if self.finals.len() != 1 {
            g4.push(Violation::FinalsNotSingleton {
                count: self.finals.len(),
            });
        } else {
            let f = *self.finals.iter().next().unwrap();
            for (p, a, q) in self.transitions() {
                if p == f {
                    g4.push(Violation::EdgeOutOfFinal {
                        letter: a,
                        target: q,
                    });
                }
            }
            for q in 0..self.state_count() {
                if q != f && q != self.initial && self.ranks[q] > self.ranks[f] {
                    g4.push(Violation::FinalNotSecondMaximal { state: q });
                }
            }
            if f != self.initial && self.ranks[f] > self.ranks[self.initial] {
                g4.push(Violation::FinalNotSecondMaximal { state: f });
            }
        }

        GoodnessReport {
            g1,
            g2,
            g3,
            g4,
            loop_images,
        }
    }

    /// Completes an automaton satisfying the first three axioms to one
    /// satisfying all four: adds a fresh sink `f`, duplicates every edge into
    /// an old final state as an edge into `f`, makes `f` the only final
    /// state, and reranks so that all states except the initial one sit
    /// below `f`. Finite and infinite languages are preserved.
    pub fn weakly_good_to_good(&self) -> OrderedAutomaton {
        let mut fname = String::from("f");
        while self.names.contains(&fname) {
            fname.push('\'');
        }
        let mut names = self.names.clone();
        names.push(fname);
        let f = names.len() - 1;

        let mut transitions: Vec<(usize, char, usize)> = self.transitions().collect();
        for (p, a, q) in self.transitions() {
            if self.finals.contains(&q) {
                transitions.push((p, a, f));
            }
        }

        // Dense ranks preserving the old order, with f squeezed in just
        // below the initial state.
        let mut order = self.states_by_rank();
        let init_pos = order.iter().position(|&q| q == self.initial).unwrap();
        order.insert(init_pos, f);
        let mut ranks = vec![0i64; names.len()];
        for (i, &q) in order.iter().enumerate() {
            ranks[q] = i as i64;
        }

        OrderedAutomaton::new(
            names,
            ranks,
            self.alphabet.clone(),
            &transitions,
            self.initial,
            [f].into_iter().collect(),
            self.buchi.clone(),
        )
        .expect("completion preserves validity")
    }

    /// Removes states that are not both reachable from the initial state and
    /// able to contribute to some accepting run (reach a final state, or
    /// reach a cycle through a Büchi state). The initial state is always
    /// kept. Languages are unchanged.
    pub fn reduce(&self) -> OrderedAutomaton {
        let q_count = self.state_count();
        let mut adj: Vec<Vec<usize>> = vec![Vec::new(); q_count];
        let mut radj: Vec<Vec<usize>> = vec![Vec::new(); q_count];
        for (p, _, q) in self.transitions() {
            adj[p].push(q);
            radj[q].push(p);
        }
        let reach = reachable_set(&adj, self.initial);
        // states on a cycle through a Büchi state
        let (comp, _) = sccs(&adj);
        let cyclic = cyclic_components(&adj, &comp);
        let lasso_cores: Vec<usize> = (0..q_count)
            .filter(|&q| self.buchi.contains(&q) && cyclic[comp[q]])
            .collect();
        let mut co = vec![false; q_count];
        let mut queue: VecDeque<usize> = VecDeque::new();
        for &q in self.finals.iter().chain(lasso_cores.iter()) {
            if !co[q] {
                co[q] = true;
                queue.push_back(q);
            }
        }
        while let Some(q) = queue.pop_front() {
            for &p in &radj[q] {
                if !co[p] {
                    co[p] = true;
                    queue.push_back(p);
                }
            }
        }

        let keep: Vec<usize> = (0..q_count)
            .filter(|&q| q == self.initial || (reach[q] && co[q]))
            .collect();
        let renum: BTreeMap<usize, usize> = keep.iter().enumerate().map(|(i, &q)| (q, i)).collect();
        let names = keep.iter().map(|&q| self.names[q].clone()).collect();
        let ranks = keep.iter().map(|&q| self.ranks[q]).collect();
        let transitions: Vec<(usize, char, usize)> = self
            .transitions()
            .filter_map(|(p, a, q)| Some((*renum.get(&p)?, a, *renum.get(&q)?)))
            .collect();
        let finals = self
            .finals
            .iter()
            .filter_map(|q| renum.get(q).copied())
            .collect();
        let buchi = self
            .buchi
            .iter()
            .filter_map(|q| renum.get(q).copied())
            .collect();
        OrderedAutomaton::new(
            names,
            ranks,
            self.alphabet.clone(),
            &transitions,
            renum[&self.initial],
            finals,
            buchi,
        )
        .expect("reduction preserves validity")
    }
}

/// All words of exactly length `len` over `alphabet`, in letter order.
pub fn words_of_length(alphabet: &[char], len: usize) -> Vec<Vec<char>> {
    let mut level: Vec<Vec<char>> = vec![Vec::new()];
    for _ in 0..len {
        let mut next = Vec::with_capacity(level.len() * alphabet.len());
        for w in &level {
            for &a in alphabet {
                let mut w2 = w.clone();
                w2.push(a);
                next.push(w2);
            }
        }
        level = next;
    }
    level
}

fn reachable_set(adj: &[Vec<usize>], start: usize) -> Vec<bool> {
    let mut seen = vec![false; adj.len()];
    seen[start] = true;
    let mut queue = VecDeque::from([start]);
    while let Some(v) = queue.pop_front() {
        for &w in &adj[v] {
            if !seen[w] {
                seen[w] = true;
                queue.push_back(w);
            }
        }
    }
    seen
}

// Iterative Tarjan; returns (component id per node, number of components).
fn sccs(adj: &[Vec<usize>]) -> (Vec<usize>, usize) {
    let n = adj.len();
    let mut index = vec![usize::MAX; n];
    let mut low = vec![0usize; n];
    let mut on_stack = vec![false; n];
    let mut stack: Vec<usize> = Vec::new();
    let mut comp = vec![usize::MAX; n];
    let mut next_index = 0usize;
    let mut ncomp = 0usize;
    let mut call: Vec<(usize, usize)> = Vec::new();
    for start in 0..n {
        if index[start] != usize::MAX {
            continue;
        }
        index[start] = next_index;
        low[start] = next_index;
        next_index += 1;
        stack.push(start);
        on_stack[start] = true;
        call.push((start, 0));
        while let Some(frame) = call.last_mut() {
            let (v, i) = (frame.0, frame.1);
            if i < adj[v].len() {
                frame.1 += 1;
                let w = adj[v][i];
                if index[w] == usize::MAX {
                    index[w] = next_index;
                    low[w] = next_index;
                    next_index += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    call.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
            } else {
                call.pop();
                if let Some(up) = call.last() {
                    let u = up.0;
                    low[u] = low[u].min(low[v]);
                }
                if low[v] == index[v] {
                    loop {
                        let w = stack.pop().unwrap();
                        on_stack[w] = false;
                        comp[w] = ncomp;
                        if w == v {
                            break;
                        }
                    }
                    ncomp += 1;
                }
            }
        }
    }
    (comp, ncomp)
}

// A component has a cycle iff it has more than one node or a self-loop.
fn cyclic_components(adj: &[Vec<usize>], comp: &[usize]) -> Vec<bool> {
    let ncomp = comp.iter().copied().max().map_or(0, |m| m + 1);
    let mut size = vec![0usize; ncomp];
    for &c in comp {
        size[c] += 1;
    }
    let mut cyclic: Vec<bool> = size.iter().map(|&s| s > 1).collect();
    for (v, succs) in adj.iter().enumerate() {
        if succs.contains(&v) {
            cyclic[comp[v]] = true;
        }
    }
    cyclic
}

// Shortest node path from `start` to a node satisfying `is_target`
// (inclusive of both endpoints; `start` itself may be the target).
fn bfs_path(
    adj: &[Vec<usize>],
    start: usize,
    is_target: impl Fn(usize) -> bool,
) -> Option<Vec<usize>> {
    let mut parent: BTreeMap<usize, usize> = BTreeMap::new();
    let mut seen = vec![false; adj.len()];
    seen[start] = true;
    let mut queue = VecDeque::from([start]);
    while let Some(v) = queue.pop_front() {
        if is_target(v) {
            let mut path = vec![v];
            let mut cur = v;
            while cur != start {
                cur = parent[&cur];
                path.push(cur);
            }
            path.reverse();
            return Some(path);
        }
        for &w in &adj[v] {
            if !seen[w] {
                seen[w] = true;
                parent.insert(w, v);
                queue.push_back(w);
            }
        }
    }
    None
}

// Shortest cycle v -> ... -> v of length >= 1 (both endpoints included).
fn bfs_cycle(adj: &[Vec<usize>], v: usize) -> Option<Vec<usize>> {
    adj[v]
        .iter()
        .filter_map(|&w| {
            let mut path = vec![v];
            path.extend(bfs_path(adj, w, |x| x == v)?);
            Some(path)
        })
        .min_by_key(|p| p.len())
}
