//! Finite semigroups, morphisms, idempotents, power structure, ideals and the
//! group test driving the case analysis of the automaton construction.

use alloc::collections::btree_map::Entry;
use alloc::collections::{BTreeMap, BTreeSet, VecDeque};
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

/// Index of a semigroup element. Names are presentation-only; all algorithms
/// work on dense indices so that products are O(1) table lookups.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Elem(pub usize);

impl fmt::Display for Elem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

/// Errors raised while validating or querying semigroups and morphisms.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AlgebraError {
    /// The multiplication table is not a square matrix of the right size.
    NotSquare {
        /// Offending row index (or the row count when the shape is wrong).
        row: usize,
        /// Expected row length.
        expected: usize,
        /// Actual row length.
        actual: usize,
    },
    /// A table entry is not a valid element index.
    OutOfRange {
        /// Row of the offending entry.
        row: usize,
        /// Column of the offending entry.
        col: usize,
        /// The invalid value.
        value: usize,
        /// Number of elements.
        size: usize,
    },
    /// Associativity fails on the given triple of element indices.
    NonAssociative(usize, usize, usize),
    /// Two elements share a name.
    DuplicateName(String),
    /// Name list and table size disagree.
    NameCountMismatch {
        /// Number of names supplied.
        names: usize,
        /// Number of table rows.
        rows: usize,
    },
    /// The table is empty: semigroups here have at least one element.
    Empty,
    /// A morphism needs a nonempty alphabet.
    EmptyAlphabet,
    /// The same letter appears twice in an alphabet.
    DuplicateLetter(char),
    /// A letter without an image (or outside the alphabet) was used.
    UnknownLetter(char),
    /// A letter image is not a valid element index.
    ImageOutOfRange(char, usize),
    /// Morphisms evaluate nonempty words only.
    EmptyWord,
    /// Splitting the alphabet around `c` left one side empty.
    DegenerateSplit,
    /// A generated subsemigroup needs at least one generator.
    EmptyGenerators,
}

impl fmt::Display for AlgebraError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AlgebraError::NotSquare {
                row,
                expected,
                actual,
            } => {
                write!(
                    f,
                    "table row {row} has length {actual}, expected {expected}"
                )
            }
            AlgebraError::OutOfRange {
                row,
                col,
                value,
                size,
            } => {
                write!(
                    f,
                    "table entry ({row},{col}) = {value} is not an index below {size}"
                )
            }
            AlgebraError::NonAssociative(i, j, k) => {
                write!(f, "associativity fails on the triple ({i},{j},{k})")
            }
            AlgebraError::DuplicateName(n) => write!(f, "duplicate element name {n:?}"),
            AlgebraError::NameCountMismatch { names, rows } => {
                write!(f, "{names} names given for a {rows}-element table")
            }
            AlgebraError::Empty => write!(f, "empty multiplication table"),
            AlgebraError::EmptyAlphabet => write!(f, "alphabet is empty"),
            AlgebraError::DuplicateLetter(c) => write!(f, "duplicate letter {c:?}"),
            AlgebraError::UnknownLetter(c) => write!(f, "unknown letter {c:?}"),
            AlgebraError::ImageOutOfRange(c, v) => {
                write!(f, "letter {c:?} maps to invalid element index {v}")
            }
            AlgebraError::EmptyWord => write!(f, "words must be nonempty"),
            AlgebraError::DegenerateSplit => {
                write!(f, "alphabet split is degenerate: one side is empty")
            }
            AlgebraError::EmptyGenerators => write!(f, "generator set is empty"),
        }
    }
}

#[cfg(test)]
impl std::error::Error for AlgebraError {}

/// Power structure of a single element `s`: the least pair `(k, ell)` with
/// `s^k = s^(k+ell)` and the least `n` with `s^n` idempotent.
///
/// Invariants: `k <= n < k + ell` and `ell` divides `n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PowerProfile {
    /// Start of the power cycle: least `k >= 1` with `s^k` recurring.
    pub k: usize,
    /// Cycle length: least `ell >= 1` with `s^k = s^(k+ell)`.
    pub ell: usize,
    /// Least `n >= 1` with `s^n` idempotent.
    pub n: usize,
}

/// A finite semigroup: named elements plus a full multiplication table that
/// has been checked to be total and associative.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteSemigroup {
    names: Vec<String>,
    // Row-major n*n table; entry i*n+j is the index of e_i * e_j.
    table: Vec<usize>,
}

impl FiniteSemigroup {
    /// Validates a named multiplication table: square shape, entries in
    /// range, and associativity for every triple (O(n^3)).
    pub fn validate(
        names: Vec<String>,
        table: &[Vec<usize>],
    ) -> Result<FiniteSemigroup, AlgebraError> {
        let n = table.len();
        if n == 0 {
            return Err(AlgebraError::Empty);
        }
        if names.len() != n {
            return Err(AlgebraError::NameCountMismatch {
                names: names.len(),
                rows: n,
            });
        }
        let mut seen = BTreeSet::new();
        for name in &names {
            if !seen.insert(name.clone()) {
                return Err(AlgebraError::DuplicateName(name.clone()));
            }
        }
        let mut flat = Vec::with_capacity(n * n);
        for (i, row) in table.iter().enumerate() {
            if row.len() != n {
                return Err(AlgebraError::NotSquare {
                    row: i,
                    expected: n,
                    actual: row.len(),
                });
            }
            for (j, &v) in row.iter().enumerate() {
                if v >= n {
                    return Err(AlgebraError::OutOfRange {
                        row: i,
                        col: j,
                        value: v,
                        size: n,
                    });
                }
                flat.push(v);
            }
        }
        let s = FiniteSemigroup { names, table: flat };
        for i in 0..n {
            for j in 0..n {
                let ij = s.raw(i, j);
                for k in 0..n {
                    if s.raw(ij, k) != s.raw(i, s.raw(j, k)) {
                        return Err(AlgebraError::NonAssociative(i, j, k));
                    }
                }
            }
        }
        Ok(s)
    }

    /// Like [`FiniteSemigroup::validate`] with elements named `e0, e1, ...`.
    pub fn validate_unnamed(table: &[Vec<usize>]) -> Result<FiniteSemigroup, AlgebraError> {
        let names = (0..table.len()).map(|i| alloc::format!("e{i}")).collect();
        FiniteSemigroup::validate(names, table)
    }

    #[inline]
    fn raw(&self, i: usize, j: usize) -> usize {
        self.table[i * self.names.len() + j]
    }

    /// Number of elements.
    pub fn len(&self) -> usize {
        self.names.len()
    }

    /// Semigroups are nonempty by construction.
    pub fn is_empty(&self) -> bool {
        false
    }

    /// The product of two elements.
    #[inline]
    pub fn mul(&self, a: Elem, b: Elem) -> Elem {
        Elem(self.raw(a.0, b.0))
    }

    /// Folds a nonempty sequence of elements with the product.
    pub fn eval<I: IntoIterator<Item = Elem>>(&self, elems: I) -> Option<Elem> {
        let mut it = elems.into_iter();
        let first = it.next()?;
        Some(it.fold(first, |acc, e| self.mul(acc, e)))
    }

    /// Name of an element.
    pub fn name(&self, e: Elem) -> &str {
        &self.names[e.0]
    }

    /// All element names in index order.
    pub fn names(&self) -> &[String] {
        &self.names
    }

    /// Looks an element up by name.
    pub fn element_by_name(&self, name: &str) -> Option<Elem> {
        self.names.iter().position(|n| n == name).map(Elem)
    }

    /// Iterates over all elements in index order.
    pub fn elements(&self) -> impl Iterator<Item = Elem> + '_ {
        (0..self.len()).map(Elem)
    }

    /// Row-major copy of the table, for serialization.
    pub fn table_rows(&self) -> Vec<Vec<usize>> {
        let n = self.len();
        (0..n)
            .map(|i| (0..n).map(|j| self.raw(i, j)).collect())
            .collect()
    }

    /// Whether `e * e = e`.
    pub fn is_idempotent(&self, e: Elem) -> bool {
        self.mul(e, e) == e
    }

    /// Exactly the elements `e` with `e * e = e`.
    pub fn idempotents(&self) -> BTreeSet<Elem> {
        self.elements().filter(|&e| self.is_idempotent(e)).collect()
    }

    /// `s^k` for `k >= 1`.
    pub fn power(&self, s: Elem, k: usize) -> Elem {
        assert!(k >= 1, "powers start at 1");
        let mut acc = s;
        for _ in 1..k {
            acc = self.mul(acc, s);
        }
        acc
    }

    /// The power structure of `s`; see [`PowerProfile`].
    pub fn power_profile(&self, s: Elem) -> PowerProfile {
        // Walk s, s^2, s^3, ... until a power repeats. The first repeated
        // value enters the cycle, which yields the lexicographically least
        // (k, ell): any smaller k has a power that never recurs.
        let mut seen: BTreeMap<Elem, usize> = BTreeMap::new();
        let mut cur = s;
        let mut exp = 1usize;
        let (k, ell) = loop {
            if let Some(&first) = seen.get(&cur) {
                break (first, exp - first);
            }
            seen.insert(cur, exp);
            cur = self.mul(cur, s);
            exp += 1;
        };
        let n = (1..k + ell)
            .find(|&m| self.is_idempotent(self.power(s, m)))
            .expect("a finite semigroup has an idempotent power within the cycle");
        debug_assert!(k <= n && n < k + ell && n % ell == 0);
        PowerProfile { k, ell, n }
    }

    /// The left ideal `Sc = { x * c : x in S }`.
    pub fn left_ideal(&self, c: Elem) -> BTreeSet<Elem> {
        self.elements().map(|x| self.mul(x, c)).collect()
    }

    /// The right ideal `cS = { c * x : x in S }`.
    pub fn right_ideal(&self, c: Elem) -> BTreeSet<Elem> {
        self.elements().map(|x| self.mul(c, x)).collect()
    }

    /// Whether the semigroup is a group.
    ///
    /// Decided by the ideal criterion (`sS = S = Ss` for every `s`) and
    /// cross-checked against an explicit unit-and-inverse search; the two
    /// routes must agree.
    pub fn is_group(&self) -> bool {
        let n = self.len();
        let by_ideals = self
            .elements()
            .all(|s| self.left_ideal(s).len() == n && self.right_ideal(s).len() == n);

        let by_unit = self.group_unit().is_some_and(|e| {
            self.elements().all(|s| {
                self.elements()
                    .any(|t| self.mul(s, t) == e && self.mul(t, s) == e)
            })
        });
        assert_eq!(by_ideals, by_unit, "group tests disagree");
        by_ideals
    }

    /// The unique idempotent acting as a two-sided unit, if there is one.
    pub fn group_unit(&self) -> Option<Elem> {
        let idem = self.idempotents();
        if idem.len() != 1 {
            return None;
        }
        let e = *idem.iter().next().unwrap();
        self.elements()
            .all(|s| self.mul(e, s) == s && self.mul(s, e) == s)
            .then_some(e)
    }

    /// Least product-closed superset of `generators`.
    pub fn generated_subsemigroup(
        &self,
        generators: &BTreeSet<Elem>,
    ) -> Result<BTreeSet<Elem>, AlgebraError> {
        if generators.is_empty() {
            return Err(AlgebraError::EmptyGenerators);
        }
        let mut closed = generators.clone();
        let mut frontier: Vec<Elem> = closed.iter().copied().collect();
        while let Some(x) = frontier.pop() {
            for &g in generators {
                for p in [self.mul(x, g), self.mul(g, x)] {
                    if closed.insert(p) {
                        frontier.push(p);
                    }
                }
            }
        }
        Ok(closed)
    }

    /// Restricts to a product-closed subset, renumbering elements densely.
    /// Returns the restricted semigroup and the old-to-new index map, or
    /// `None` when `subset` is not closed under the product.
    pub fn restrict(
        &self,
        subset: &BTreeSet<Elem>,
    ) -> Option<(FiniteSemigroup, BTreeMap<Elem, Elem>)> {
        if subset.is_empty() {
            return None;
        }
        let old: Vec<Elem> = subset.iter().copied().collect();
        let renum: BTreeMap<Elem, Elem> =
            old.iter().enumerate().map(|(i, &e)| (e, Elem(i))).collect();
        let mut table = Vec::with_capacity(old.len() * old.len());
        for &a in &old {
            for &b in &old {
                table.push(renum.get(&self.mul(a, b))?.0);
            }
        }
        let names = old.iter().map(|&e| self.names[e.0].clone()).collect();
        Some((FiniteSemigroup { names, table }, renum))
    }
}

/// Which side of the alphabet split a derived alphabet is computed for.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    /// Blocks end with a `c`-letter: elements of `phi(Sigma Sigma1* Sigma2)`.
    Left,
    /// Blocks start with a `c`-letter: elements of `phi(Sigma2 Sigma Sigma1*)`.
    Right,
}

/// An element of a derived alphabet together with one shortest word mapping
/// to it (ties broken by letter order).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DerivedLetter {
    /// The semigroup element this block letter stands for.
    pub elem: Elem,
    /// A shortest witness word over the original alphabet.
    pub witness: Vec<char>,
}

/// A morphism from nonempty words over a finite alphabet into a finite
/// semigroup, determined by the letter images.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Morphism {
    semigroup: FiniteSemigroup,
    alphabet: Vec<char>,
    map: BTreeMap<char, Elem>,
}

impl Morphism {
    /// Builds a morphism from `(letter, image)` pairs; the alphabet keeps the
    /// given order. Letters must be distinct and images valid.
    pub fn new(
        semigroup: FiniteSemigroup,
        letter_map: &[(char, Elem)],
    ) -> Result<Morphism, AlgebraError> {
        if letter_map.is_empty() {
            return Err(AlgebraError::EmptyAlphabet);
        }
        let mut alphabet = Vec::with_capacity(letter_map.len());
        let mut map = BTreeMap::new();
        for &(a, e) in letter_map {
            if e.0 >= semigroup.len() {
                return Err(AlgebraError::ImageOutOfRange(a, e.0));
            }
            if map.insert(a, e).is_some() {
                return Err(AlgebraError::DuplicateLetter(a));
            }
            alphabet.push(a);
        }
        Ok(Morphism {
            semigroup,
            alphabet,
            map,
        })
    }

    /// The target semigroup.
    pub fn semigroup(&self) -> &FiniteSemigroup {
        &self.semigroup
    }

    /// The alphabet, in declaration order.
    pub fn alphabet(&self) -> &[char] {
        &self.alphabet
    }

    /// Image of a single letter.
    pub fn letter(&self, a: char) -> Result<Elem, AlgebraError> {
        self.map
            .get(&a)
            .copied()
            .ok_or(AlgebraError::UnknownLetter(a))
    }

    /// Evaluates a nonempty word: left-to-right fold of letter images.
    pub fn eval(&self, w: &[char]) -> Result<Elem, AlgebraError> {
        let mut acc: Option<Elem> = None;
        for &a in w {
            let e = self.letter(a)?;
            acc = Some(match acc {
                None => e,
                Some(x) => self.semigroup.mul(x, e),
            });
        }
        acc.ok_or(AlgebraError::EmptyWord)
    }

    /// The image set of the alphabet.
    pub fn image(&self) -> BTreeSet<Elem> {
        self.map.values().copied().collect()
    }

    /// Restricts the target to the subsemigroup generated by the letter
    /// images, renumbering elements.
    pub fn restricted_to_generated(&self) -> Morphism {
        let gens = self.image();
        let closed = self
            .semigroup
            .generated_subsemigroup(&gens)
            .expect("alphabet is nonempty");
        let (sub, renum) = self
            .semigroup
            .restrict(&closed)
            .expect("generated set is closed");
        let letter_map: Vec<(char, Elem)> = self
            .alphabet
            .iter()
            .map(|&a| (a, renum[&self.map[&a]]))
            .collect();
        Morphism::new(sub, &letter_map).expect("restriction preserves validity")
    }

    /// Keeps only the letters in `keep` (same target semigroup).
    pub fn restrict_letters(&self, keep: &BTreeSet<char>) -> Result<Morphism, AlgebraError> {
        let letter_map: Vec<(char, Elem)> = self
            .alphabet
            .iter()
            .filter(|a| keep.contains(a))
            .map(|&a| (a, self.map[&a]))
            .collect();
        Morphism::new(self.semigroup.clone(), &letter_map)
    }

    /// Splits the alphabet around `c`: letters mapped to `c` versus the rest,
    /// in alphabet order.
    pub fn split_alphabet(&self, c: Elem) -> (Vec<char>, Vec<char>) {
        let mut sigma1 = Vec::new();
        let mut sigma2 = Vec::new();
        for &a in &self.alphabet {
            if self.map[&a] == c {
                sigma2.push(a);
            } else {
                sigma1.push(a);
            }
        }
        (sigma1, sigma2)
    }

    /// Index of a letter in the alphabet order, for tie-breaking.
    fn letter_pos(&self, a: char) -> usize {
        self.alphabet.iter().position(|&x| x == a).unwrap()
    }

    /// The derived block alphabet for element `c`.
    ///
    /// `Side::Left` yields the images of `Sigma Sigma1* Sigma2` (the letter
    /// images closed under right multiplication by `phi(Sigma1)`, then
    /// multiplied by `c`); `Side::Right` yields the images of
    /// `Sigma2 Sigma Sigma1*` (`c * phi(Sigma)` closed the same way). Each
    /// element carries one shortest witness word, ties by letter order.
    pub fn derived_alphabet(
        &self,
        c: Elem,
        side: Side,
    ) -> Result<Vec<DerivedLetter>, AlgebraError> {
        let (sigma1, sigma2) = self.split_alphabet(c);
        if sigma1.is_empty() || sigma2.is_empty() {
            return Err(AlgebraError::DegenerateSplit);
        }

        // BFS over partial-block images, expanding with Sigma1 letters in
        // alphabet order; the first visit of an element is its shortest,
        // letter-order-least witness.
        let mut best: BTreeMap<Elem, Vec<char>> = BTreeMap::new();
        let mut queue: VecDeque<(Elem, Vec<char>)> = VecDeque::new();
        match side {
            Side::Left => {
                for &a in &self.alphabet {
                    let e = self.map[&a];
                    if let Entry::Vacant(slot) = best.entry(e) {
                        slot.insert(alloc::vec![a]);
                        queue.push_back((e, alloc::vec![a]));
                    }
                }
            }
            Side::Right => {
                let c2 = sigma2[0];
                for &a in &self.alphabet {
                    let e = self.semigroup.mul(c, self.map[&a]);
                    if let Entry::Vacant(slot) = best.entry(e) {
                        slot.insert(alloc::vec![c2, a]);
                        queue.push_back((e, alloc::vec![c2, a]));
                    }
                }
            }
        }
        while let Some((e, w)) = queue.pop_front() {
            for &d in &sigma1 {
                let e2 = self.semigroup.mul(e, self.map[&d]);
                if let Entry::Vacant(slot) = best.entry(e2) {
                    let mut w2 = w.clone();
                    w2.push(d);
                    slot.insert(w2.clone());
                    queue.push_back((e2, w2));
                }
            }
        }

        let out: Vec<DerivedLetter> = match side {
            Side::Left => {
                // Append the closing Sigma2 letter; pick per element the
                // candidate with the shortest (then letter-order-least) word.
                let c2 = sigma2[0];
                let mut by_elem: BTreeMap<Elem, Vec<char>> = BTreeMap::new();
                for (x, wx) in &best {
                    let b = self.semigroup.mul(*x, c);
                    let mut w = wx.clone();
                    w.push(c2);
                    let better = match by_elem.get(&b) {
                        None => true,
                        Some(old) => {
                            let key = |w: &Vec<char>| {
                                (
                                    w.len(),
                                    w.iter().map(|&a| self.letter_pos(a)).collect::<Vec<_>>(),
                                )
                            };
                            key(&w) < key(old)
                        }
                    };
                    if better {
                        by_elem.insert(b, w);
                    }
                }
                by_elem
                    .into_iter()
                    .map(|(elem, witness)| DerivedLetter { elem, witness })
                    .collect()
            }
            Side::Right => best
                .into_iter()
                .map(|(elem, witness)| DerivedLetter { elem, witness })
                .collect(),
        };
        debug_assert!(out
            .iter()
            .all(|d| self.eval(&d.witness).ok() == Some(d.elem)));
        Ok(out)
    }
}

#[cfg(test)]
mod tests;
