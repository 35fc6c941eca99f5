//! File formats: JSON for semigroups, morphisms, and automata; DOT export;
//! text syntax for ultimately periodic words and annotated expressions.

use anyhow::{anyhow, bail, Context, Result};
use seminaut::algebra::{Elem, FiniteSemigroup, Morphism};
use seminaut::automaton::{GoodnessReport, OrderedAutomaton, UpWord};
use seminaut::ramsey::{FactTree, Split};
use seminaut::rexpr::{ParseTree, RExpr};
use seminaut::synthesis::BuildReport;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use std::collections::BTreeMap;

/// A semigroup on disk: element names and the multiplication table.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SemigroupFile {
    /// Element names, indexing the table.
    pub elements: Vec<String>,
    /// `table[i][j]` is the index of `elements[i] · elements[j]`.
    pub table: Vec<Vec<usize>>,
}

/// A morphism on disk; the semigroup is embedded so one file drives a build.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MorphismFile {
    /// The target semigroup.
    pub semigroup: SemigroupFile,
    /// The alphabet, in order.
    pub alphabet: Vec<char>,
    /// Letter images by element name.
    pub map: BTreeMap<char, String>,
}

/// One automaton state on disk.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StateFile {
    /// State name.
    pub name: String,
    /// Rank (injective; defines the state order).
    pub rank: i64,
}

/// An ordered automaton on disk.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AutomatonFile {
    /// States with their ranks.
    pub states: Vec<StateFile>,
    /// Name of the initial state.
    pub initial: String,
    /// Names of the final states (finite words).
    pub finals: Vec<String>,
    /// Names of the Büchi states (infinite words).
    pub buchi: Vec<String>,
    /// Transitions as (source, letter, target).
    pub transitions: Vec<(String, char, String)>,
}

impl SemigroupFile {
    /// Validates the table and builds the in-memory semigroup.
    pub fn to_semigroup(&self) -> Result<FiniteSemigroup> {
        FiniteSemigroup::validate(self.elements.clone(), &self.table)
            .map_err(|e| anyhow!("invalid semigroup: {e:?}"))
    }

    /// Serializes a semigroup.
    pub fn from_semigroup(sg: &FiniteSemigroup) -> SemigroupFile {
        SemigroupFile {
            elements: sg.names().to_vec(),
            table: sg.table_rows(),
        }
    }
}

impl MorphismFile {
    /// Validates and builds the in-memory morphism.
    pub fn to_morphism(&self) -> Result<Morphism> {
        let sg = self.semigroup.to_semigroup()?;
        let letters: Vec<(char, Elem)> = self
            .alphabet
            .iter()
            .map(|&a| {
                let name = self
                    .map
                    .get(&a)
                    .ok_or_else(|| anyhow!("letter '{a}' has no image"))?;
                let e = sg
                    .element_by_name(name)
                    .ok_or_else(|| anyhow!("unknown element '{name}'"))?;
                Ok((a, e))
            })
            .collect::<Result<_>>()?;
        Morphism::new(sg, &letters).map_err(|e| anyhow!("invalid morphism: {e:?}"))
    }

    /// Serializes a morphism.
    pub fn from_morphism(phi: &Morphism) -> MorphismFile {
        let sg = phi.semigroup();
        let map = phi
            .alphabet()
            .iter()
            .map(|&a| (a, sg.name(phi.letter(a).unwrap()).to_string()))
            .collect();
        MorphismFile {
            semigroup: SemigroupFile::from_semigroup(sg),
            alphabet: phi.alphabet().to_vec(),
            map,
        }
    }
}

impl AutomatonFile {
    /// Validates and builds the in-memory automaton.
    pub fn to_automaton(&self) -> Result<OrderedAutomaton> {
        let states: Vec<(&str, i64)> = self
            .states
            .iter()
            .map(|s| (s.name.as_str(), s.rank))
            .collect();
        let mut alphabet: Vec<char> = self.transitions.iter().map(|t| t.1).collect();
        alphabet.sort_unstable();
        alphabet.dedup();
        let transitions: Vec<(&str, char, &str)> = self
            .transitions
            .iter()
            .map(|(p, a, q)| (p.as_str(), *a, q.as_str()))
            .collect();
        let finals: Vec<&str> = self.finals.iter().map(String::as_str).collect();
        let buchi: Vec<&str> = self.buchi.iter().map(String::as_str).collect();
        OrderedAutomaton::build(
            &states,
            &alphabet,
            &transitions,
            &self.initial,
            &finals,
            &buchi,
        )
        .map_err(|e| anyhow!("invalid automaton: {e:?}"))
    }

    /// Serializes an automaton.
    pub fn from_automaton(a: &OrderedAutomaton) -> AutomatonFile {
        let names = |set: &std::collections::BTreeSet<usize>| -> Vec<String> {
            set.iter().map(|&q| a.name(q).to_string()).collect()
        };
        AutomatonFile {
            states: (0..a.state_count())
                .map(|q| StateFile {
                    name: a.name(q).to_string(),
                    rank: a.rank(q),
                })
                .collect(),
            initial: a.name(a.initial()).to_string(),
            finals: names(a.finals()),
            buchi: names(a.buchi()),
            transitions: a
                .transitions()
                .map(|(p, x, q)| (a.name(p).to_string(), x, a.name(q).to_string()))
                .collect(),
        }
    }
}

/// Escapes a string for a DOT label.
fn dot_escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

/// DOT rendering: labels "name:rank", finals double-circled, Büchi states
/// marked with a bold border.
pub fn automaton_dot(a: &OrderedAutomaton) -> String {
    let mut out = String::from("digraph automaton {\n  rankdir=LR;\n");
    for q in 0..a.state_count() {
        let label = dot_escape(&format!("{}:{}", a.name(q), a.rank(q)));
        let shape = if a.finals().contains(&q) {
            "doublecircle"
        } else {
            "circle"
        };
        let style = if a.buchi().contains(&q) {
            ", style=bold"
        } else {
            ""
        };
        out.push_str(&format!(
            "  q{q} [label=\"{label}\", shape={shape}{style}];\n"
        ));
    }
    out.push_str(&format!(
        "  start [shape=none, label=\"\"];\n  start -> q{};\n",
        a.initial()
    ));
    for (p, x, q) in a.transitions() {
        out.push_str(&format!(
            "  q{p} -> q{q} [label=\"{}\"];\n",
            dot_escape(&x.to_string())
        ));
    }
    out.push_str("}\n");
    out
}

/// DOT rendering of a factorization tree.
pub fn fact_tree_dot(tree: &FactTree, phi: &Morphism) -> String {
    fn visit(t: &FactTree, phi: &Morphism, next: &mut usize, out: &mut String) -> usize {
        let id = *next;
        *next += 1;
        match t {
            FactTree::Leaf(c) => {
                out.push_str(&format!(
                    "  n{id} [label=\"{}\", shape=plaintext];\n",
                    dot_escape(&c.to_string())
                ));
            }
            FactTree::Node { label, children } => {
                out.push_str(&format!(
                    "  n{id} [label=\"{}\", shape=ellipse];\n",
                    dot_escape(phi.semigroup().name(*label))
                ));
                for child in children {
                    let cid = visit(child, phi, next, out);
                    out.push_str(&format!("  n{id} -> n{cid};\n"));
                }
            }
        }
        id
    }
    let mut out = String::from("digraph tree {\n");
    visit(tree, phi, &mut 0, &mut out);
    out.push_str("}\n");
    out
}

/// Nested JSON for a factorization tree.
pub fn fact_tree_json(tree: &FactTree, phi: &Morphism) -> Value {
    match tree {
        FactTree::Leaf(c) => json!({ "leaf": c.to_string() }),
        FactTree::Node { label, children } => json!({
            "label": phi.semigroup().name(*label),
            "children": children.iter().map(|c| fact_tree_json(c, phi)).collect::<Vec<_>>(),
        }),
    }
}

/// Nested JSON for a parse tree.
pub fn parse_tree_json(tree: &ParseTree) -> Value {
    match tree {
        ParseTree::Letter(c) => json!({ "letter": c.to_string() }),
        ParseTree::Epsilon => json!({ "epsilon": true }),
        ParseTree::Concat(l, r) => {
            json!({ "concat": [parse_tree_json(l), parse_tree_json(r)] })
        }
        ParseTree::Plus(parts) => {
            json!({ "plus": parts.iter().map(parse_tree_json).collect::<Vec<_>>() })
        }
    }
}

/// JSON for a split: a plain level array for finite words, stem + cycle for
/// ultimately periodic ones.
pub fn split_json(split: &Split) -> Value {
    match split.cycle_start {
        None => json!(split.levels),
        Some(cs) => json!({
            "stem": split.levels[..cs],
            "cycle": split.levels[cs..],
            "height": split.height,
        }),
    }
}

/// JSON for a goodness report: per-axiom violation lists plus verdicts.
pub fn goodness_json(a: &OrderedAutomaton, report: &GoodnessReport) -> Value {
    let axis = |vs: &[seminaut::automaton::Violation]| -> Vec<String> {
        vs.iter().map(|v| format!("{v:?}")).collect()
    };
    json!({
        "good": report.is_good(),
        "weakly_good": report.is_weakly_good(),
        "g1": axis(&report.g1),
        "g2": axis(&report.g2),
        "g3": axis(&report.g3),
        "g4": axis(&report.g4),
        "loop_images": report
            .loop_images
            .iter()
            .map(|(q, img)| (a.name(*q).to_string(), img.len()))
            .collect::<BTreeMap<String, usize>>(),
    })
}

/// JSON for a build report: the case tree with per-level sizes and heights.
pub fn build_report_json(report: &BuildReport) -> Value {
    json!({
        "case": format!("{:?}", report.case),
        "chosen_c": report.chosen_c,
        "profile": report.profile.as_ref().map(|p| json!({ "k": p.k, "l": p.ell, "n": p.n })),
        "semigroup_size": report.semigroup_size,
        "image_size": report.image_size,
        "states_weak": report.states_weak,
        "states_reduced": report.states_reduced,
        "states_good": report.states_good,
        "derived_letters": report
            .derived_letters
            .iter()
            .map(|(a, e, w)| json!([a.to_string(), e, w]))
            .collect::<Vec<_>>(),
        "optimized_height": report.optimized_height,
        "heights": report.heights,
        "children": report.children.iter().map(build_report_json).collect::<Vec<_>>(),
    })
}

/// Parses a finite word; every character is a letter.
pub fn parse_word(text: &str) -> Vec<char> {
    text.chars().collect()
}

/// Parses `u(v)^w` into an ultimately periodic word; `u` may be empty.
pub fn parse_up_word(text: &str) -> Result<UpWord> {
    let open = text.find('(').ok_or_else(|| anyhow!("expected `u(v)^w`"))?;
    let rest = &text[open + 1..];
    let close = rest.find(')').ok_or_else(|| anyhow!("expected `u(v)^w`"))?;
    if &rest[close + 1..] != "^w" {
        bail!("expected `u(v)^w`, got trailing {:?}", &rest[close + 1..]);
    }
    let prefix: Vec<char> = text[..open].chars().collect();
    let period: Vec<char> = rest[..close].chars().collect();
    UpWord::new(prefix, period).map_err(|e| anyhow!("bad word: {e:?}"))
}

/// Renders an ultimately periodic word as `u(v)^w`.
pub fn up_word_text(w: &UpWord) -> String {
    format!(
        "{}({})^w",
        w.prefix().iter().collect::<String>(),
        w.period().iter().collect::<String>()
    )
}

struct ExprParser<'a> {
    chars: Vec<char>,
    pos: usize,
    sg: &'a FiniteSemigroup,
}

impl<'a> ExprParser<'a> {
    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek();
        self.pos += c.map_or(0, |_| 1);
        c
    }

    fn expect(&mut self, c: char) -> Result<()> {
        match self.bump() {
            Some(got) if got == c => Ok(()),
            got => bail!("expected '{c}' at {}, got {got:?}", self.pos),
        }
    }

    // E := atom [":{name}"]; atom := 0 | 1 | letter | (E|E) | (E.E) | (E)+ | (E)^w
    fn expr(&mut self) -> Result<RExpr> {
        let e = self.atom()?;
        if self.peek() == Some(':') {
            self.bump();
            self.expect('{')?;
            let mut name = String::new();
            while let Some(c) = self.peek() {
                if c == '}' {
                    break;
                }
                name.push(c);
                self.bump();
            }
            self.expect('}')?;
            let s = self
                .sg
                .element_by_name(&name)
                .ok_or_else(|| anyhow!("unknown element '{name}' in annotation"))?;
            return Ok(e.annotated(s));
        }
        Ok(e)
    }

    fn atom(&mut self) -> Result<RExpr> {
        match self.bump() {
            Some('0') => Ok(RExpr::empty()),
            Some('1') => Ok(RExpr::epsilon()),
            Some('(') => {
                let left = self.expr()?;
                match self.bump() {
                    Some('|') => {
                        let right = self.expr()?;
                        self.expect(')')?;
                        Ok(RExpr::union(left, right))
                    }
                    Some('.') => {
                        let right = self.expr()?;
                        self.expect(')')?;
                        Ok(RExpr::concat(left, right))
                    }
                    Some(')') => match self.bump() {
                        Some('+') => Ok(RExpr::plus(left)),
                        Some('^') => {
                            self.expect('w')?;
                            Ok(RExpr::omega(left))
                        }
                        got => bail!("expected '+' or '^w' after ')', got {got:?}"),
                    },
                    got => bail!("expected '|', '.', or ')' at {}, got {got:?}", self.pos),
                }
            }
            Some(c) if !"|.)+^:{}".contains(c) => Ok(RExpr::letter(c)),
            got => bail!("unexpected {got:?} at {}", self.pos),
        }
    }
}

/// Parses the expression text syntax, resolving annotation names in `sg`.
pub fn parse_expr(text: &str, sg: &FiniteSemigroup) -> Result<RExpr> {
    let mut p = ExprParser {
        chars: text.trim().chars().collect(),
        pos: 0,
        sg,
    };
    let e = p.expr()?;
    if p.pos != p.chars.len() {
        bail!("trailing input at {}", p.pos);
    }
    Ok(e)
}

/// Reads and deserializes a JSON file.
pub fn load_json<T: for<'de> Deserialize<'de>>(path: &std::path::Path) -> Result<T> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

/// Serializes a value and writes it as pretty JSON.
pub fn save_json<T: Serialize>(path: &std::path::Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    std::fs::write(path, text + "\n").with_context(|| format!("writing {}", path.display()))
}
