//! Command-line front end: build good automata from morphism files, verify
//! the goodness axioms, compute splits, trees, and expressions, generate
//! random instances, and run the end-to-end property sweep.

use anyhow::{anyhow, bail, Result};
use clap::{Parser, Subcommand, ValueEnum};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use seminaut::algebra::Morphism;
use seminaut::automaton::{Bounds, OrderedAutomaton, UpVerdict, UpWord};
use seminaut::ramsey::{
    default_heights, optimized_heights, split_up_word, split_word, tree_from_split, verify_ramsey,
    HeightAssignment,
};
use seminaut::rexpr::{
    check_good_expression, count_parses, finite_expressions, match_up_branch, omega_expression,
    parse_to_fact_tree, parse_unique, RExpr,
};
use seminaut::synthesis::{build_good, BuildReport};
use seminaut_cli::gen;
use seminaut_cli::io::{
    automaton_dot, build_report_json, fact_tree_dot, fact_tree_json, goodness_json, load_json,
    parse_expr, parse_tree_json, parse_up_word, parse_word, save_json, split_json, up_word_text,
    AutomatonFile, MorphismFile,
};
use serde_json::{json, Value};
use std::path::{Path, PathBuf};

/// Exit code for property violations.
const EXIT_VIOLATION: i32 = 1;
/// Exit code for unreadable or invalid input.
const EXIT_INPUT: i32 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Dot,
    Text,
}

#[derive(Parser)]
#[command(
    name = "seminaut",
    about = "Good automata, Ramsey splits, factorization trees, and \
             unambiguous expressions for finite semigroup morphisms"
)]
struct Cli {
    /// Maximum word length for exhaustive finite checks.
    #[arg(long, global = true, default_value_t = 8)]
    max_len: usize,

    /// Prefix and period length bounds for ultimately periodic checks.
    #[arg(long, global = true, num_args = 2, value_names = ["U", "V"],
          default_values_t = [3, 3])]
    up_bound: Vec<usize>,

    /// Use the optimized height assignment from the build report.
    #[arg(long, global = true)]
    optimize_heights: bool,

    /// Random seed (all randomness is derived from it).
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Directory for artifact files; stdout only if absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Stdout format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,

    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Build the good automaton for a morphism file.
    Build {
        /// Morphism JSON file.
        morphism: PathBuf,
    },
    /// Verify the goodness axioms of an automaton file against a morphism.
    Verify {
        /// Automaton JSON file.
        automaton: PathBuf,
        /// Morphism JSON file.
        morphism: PathBuf,
    },
    /// Compute the Ramsey split of a word along the built automaton's run.
    Split {
        /// Morphism JSON file.
        morphism: PathBuf,
        /// Finite word, e.g. `abbb`.
        #[arg(long, conflicts_with = "up_word")]
        word: Option<String>,
        /// Ultimately periodic word, e.g. `ab(ba)^w`.
        #[arg(long)]
        up_word: Option<String>,
        /// Split along this automaton file instead of building one.
        #[arg(long)]
        automaton: Option<PathBuf>,
    },
    /// Compute the factorization tree of a word.
    Tree {
        /// Morphism JSON file.
        morphism: PathBuf,
        /// Finite word.
        #[arg(long)]
        word: String,
        /// Split along this automaton file instead of building one.
        #[arg(long)]
        automaton: Option<PathBuf>,
    },
    /// Compile the per-element and ω-expressions of the built automaton.
    Expr {
        /// Morphism JSON file.
        morphism: PathBuf,
    },
    /// Parse a word against an expression file; print parse and tree.
    Parse {
        /// Morphism JSON file (for annotations and node labels).
        morphism: PathBuf,
        /// Expression text file.
        expression: PathBuf,
        /// Finite word.
        #[arg(long)]
        word: String,
    },
    /// Generate a random transformation-semigroup morphism.
    Gen {
        /// Number of points the maps act on.
        #[arg(long, default_value_t = 3)]
        points: usize,
        /// Number of generator maps (= alphabet size).
        #[arg(long, default_value_t = 2)]
        gens: usize,
        /// Cap on the closure size.
        #[arg(long, default_value_t = gen::DEFAULT_CAP)]
        cap: usize,
    },
    /// Run the randomized end-to-end property sweep.
    Sweep {
        /// Number of generated instances.
        #[arg(long, default_value_t = 50)]
        count: usize,
        /// Random words checked per instance.
        #[arg(long, default_value_t = 100)]
        words: usize,
    },
}

fn main() {
    let cli = Cli::parse();
    let code = match run(&cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            EXIT_INPUT
        }
    };
    std::process::exit(code);
}

fn bounds(cli: &Cli) -> Bounds {
    Bounds {
        max_len: cli.max_len,
        max_u: cli.up_bound[0],
        max_v: cli.up_bound[1],
    }
}

fn load_morphism(path: &Path) -> Result<Morphism> {
    load_json::<MorphismFile>(path)?.to_morphism()
}

fn out_path(cli: &Cli, name: &str) -> Option<PathBuf> {
    cli.out.as_ref().map(|d| d.join(name))
}

fn write_artifact(cli: &Cli, name: &str, text: &str) -> Result<()> {
    if let Some(path) = out_path(cli, name) {
        std::fs::create_dir_all(path.parent().unwrap())?;
        std::fs::write(&path, text)?;
    }
    Ok(())
}

fn emit(cli: &Cli, text: &str, jsonv: &Value, dot: Option<&str>) {
    match cli.format {
        Format::Text => println!("{text}"),
        Format::Json => println!("{}", serde_json::to_string_pretty(jsonv).unwrap()),
        Format::Dot => println!("{}", dot.unwrap_or("")),
    }
}

fn report_text(report: &BuildReport, indent: usize) -> String {
    let pad = "  ".repeat(indent);
    let case = match (&report.chosen_c, &report.profile) {
        (Some(c), _) => format!("{:?}({c})", report.case),
        (None, Some(p)) => format!("{:?}(k={}, l={}, n={})", report.case, p.k, p.ell, p.n),
        _ => format!("{:?}", report.case),
    };
    let mut out = format!(
        "{pad}{case}: |S|={} image={} states weak={} reduced={} good={} height={}\n",
        report.semigroup_size,
        report.image_size,
        report.states_weak,
        report.states_reduced,
        report.states_good,
        report.optimized_height,
    );
    for child in &report.children {
        out.push_str(&report_text(child, indent + 1));
    }
    out
}

/// The automaton/height pair a split is taken on: a user-supplied automaton
/// with rank heights, the built good automaton with rank heights, or the
/// report's split automaton with the optimized heights.
fn split_setup(
    cli: &Cli,
    phi: &Morphism,
    automaton: &Option<PathBuf>,
) -> Result<(OrderedAutomaton, HeightAssignment)> {
    if let Some(path) = automaton {
        if cli.optimize_heights {
            bail!("--optimize-heights needs a build report; drop --automaton");
        }
        let a = load_json::<AutomatonFile>(path)?.to_automaton()?;
        let h = default_heights(&a);
        return Ok((a, h));
    }
    let (good, report) = build_good(phi).map_err(|e| anyhow!("build failed: {e:?}"))?;
    if cli.optimize_heights {
        let a = report.split_automaton.clone();
        let h = optimized_heights(&report, &a).map_err(|e| anyhow!("heights: {e:?}"))?;
        Ok((a, h))
    } else {
        let h = default_heights(&good);
        Ok((good, h))
    }
}

fn run(cli: &Cli) -> Result<i32> {
    match &cli.cmd {
        Cmd::Build { morphism } => {
            let phi = load_morphism(morphism)?;
            let (good, report) = build_good(&phi).map_err(|e| anyhow!("build failed: {e:?}"))?;
            let auto_json = serde_json::to_string_pretty(&AutomatonFile::from_automaton(&good))?;
            let dot = automaton_dot(&good);
            let report_json = build_report_json(&report);
            write_artifact(cli, "automaton.json", &(auto_json.clone() + "\n"))?;
            write_artifact(cli, "automaton.dot", &dot)?;
            write_artifact(
                cli,
                "report.json",
                &(serde_json::to_string_pretty(&report_json)? + "\n"),
            )?;
            let text = format!(
                "built {} states over {} letters\n{}",
                good.state_count(),
                good.alphabet().len(),
                report_text(&report, 0)
            );
            emit(cli, text.trim_end(), &report_json, Some(&dot));
            Ok(0)
        }
        Cmd::Verify {
            automaton,
            morphism,
        } => {
            let a = load_json::<AutomatonFile>(automaton)?.to_automaton()?;
            let phi = load_morphism(morphism)?;
            for &x in a.alphabet() {
                if !phi.alphabet().contains(&x) {
                    bail!("automaton letter '{x}' is not in the morphism alphabet");
                }
            }
            let report = a.verify_goodness(&phi, bounds(cli));
            let jsonv = goodness_json(&a, &report);
            let verdict = if report.is_good() {
                "good".to_string()
            } else {
                let first = report
                    .g1
                    .iter()
                    .chain(&report.g2)
                    .chain(&report.g3)
                    .chain(&report.g4)
                    .next();
                format!("not good: {first:?}")
            };
            emit(cli, &verdict, &jsonv, None);
            write_artifact(
                cli,
                "goodness.json",
                &(serde_json::to_string_pretty(&jsonv)? + "\n"),
            )?;
            Ok(if report.is_good() { 0 } else { EXIT_VIOLATION })
        }
        Cmd::Split {
            morphism,
            word,
            up_word,
            automaton,
        } => {
            let phi = load_morphism(morphism)?;
            let (a, h) = split_setup(cli, &phi, automaton)?;
            let split = match (word, up_word) {
                (Some(w), None) => split_word(&a, &h, &parse_word(w)),
                (None, Some(w)) => split_up_word(&a, &h, &parse_up_word(w)?),
                _ => bail!("exactly one of --word or --up-word is required"),
            };
            match split {
                Ok(split) => {
                    let jsonv = split_json(&split);
                    emit(cli, &jsonv.to_string(), &jsonv, None);
                    write_artifact(cli, "split.json", &(jsonv.to_string() + "\n"))?;
                    Ok(0)
                }
                Err(e) => {
                    println!("split failed: {e:?}");
                    Ok(EXIT_VIOLATION)
                }
            }
        }
        Cmd::Tree {
            morphism,
            word,
            automaton,
        } => {
            let phi = load_morphism(morphism)?;
            let (a, h) = split_setup(cli, &phi, automaton)?;
            let w = parse_word(word);
            let tree = split_word(&a, &h, &w).and_then(|split| tree_from_split(&w, &split, &phi));
            match tree {
                Ok(tree) => {
                    let jsonv = fact_tree_json(&tree, &phi);
                    let dot = fact_tree_dot(&tree, &phi);
                    emit(cli, &jsonv.to_string(), &jsonv, Some(&dot));
                    write_artifact(
                        cli,
                        "tree.json",
                        &(serde_json::to_string_pretty(&jsonv)? + "\n"),
                    )?;
                    write_artifact(cli, "tree.dot", &dot)?;
                    Ok(0)
                }
                Err(e) => {
                    println!("tree failed: {e:?}");
                    Ok(EXIT_VIOLATION)
                }
            }
        }
        Cmd::Expr { morphism } => {
            let phi = load_morphism(morphism)?;
            let (good, _) = build_good(&phi).map_err(|e| anyhow!("build failed: {e:?}"))?;
            // retargeting finals onto the fresh sink can strand old sink
            // states, so reduce before elimination
            let a = good.reduce();
            let finite = finite_expressions(&a, &phi);
            let omega = omega_expression(&a, &phi);
            match (finite, omega) {
                (Ok(finite), Ok(omega)) => {
                    let sg = phi.semigroup();
                    let jsonv = json!({
                        "finite": finite
                            .iter()
                            .map(|(s, e)| (sg.name(*s).to_string(), e.to_text(sg)))
                            .collect::<std::collections::BTreeMap<_, _>>(),
                        "omega": omega.to_text(sg),
                    });
                    let mut text = String::new();
                    for (s, e) in &finite {
                        text.push_str(&format!("F_{} = {}\n", sg.name(*s), e.to_text(sg)));
                    }
                    text.push_str(&format!("G = {}", omega.to_text(sg)));
                    emit(cli, &text, &jsonv, None);
                    write_artifact(
                        cli,
                        "expr.json",
                        &(serde_json::to_string_pretty(&jsonv)? + "\n"),
                    )?;
                    Ok(0)
                }
                (Err(e), _) | (_, Err(e)) => {
                    println!("expressions failed: {e}");
                    Ok(EXIT_VIOLATION)
                }
            }
        }
        Cmd::Parse {
            morphism,
            expression,
            word,
        } => {
            let phi = load_morphism(morphism)?;
            let text = std::fs::read_to_string(expression)?;
            let e = parse_expr(&text, phi.semigroup())?;
            let w = parse_word(word);
            match parse_unique(&e, &w) {
                Ok(tree) => {
                    let fact = parse_to_fact_tree(&tree, &phi);
                    let jsonv = json!({
                        "parse": parse_tree_json(&tree),
                        "fact_tree": fact_tree_json(&fact, &phi),
                    });
                    let dot = fact_tree_dot(&fact, &phi);
                    emit(cli, &jsonv.to_string(), &jsonv, Some(&dot));
                    write_artifact(
                        cli,
                        "parse.json",
                        &(serde_json::to_string_pretty(&jsonv)? + "\n"),
                    )?;
                    Ok(0)
                }
                Err(err) => {
                    println!("parse failed: {err}");
                    Ok(EXIT_VIOLATION)
                }
            }
        }
        Cmd::Gen { points, gens, cap } => {
            let phi = gen::gen_morphism(*points, *gens, cli.seed, *cap)?;
            let file = MorphismFile::from_morphism(&phi);
            let jsonv = serde_json::to_value(&file)?;
            let text = format!(
                "seed {}: {} elements over {} letters",
                cli.seed,
                phi.semigroup().len(),
                phi.alphabet().len()
            );
            if let Some(path) = out_path(cli, "morphism.json") {
                std::fs::create_dir_all(path.parent().unwrap())?;
                save_json(&path, &file)?;
            }
            emit(cli, &text, &jsonv, None);
            Ok(0)
        }
        Cmd::Sweep { count, words } => sweep(cli, *count, *words),
    }
}

/// One sweep step; returns a violation description on failure.
fn sweep_instance(
    phi: &Morphism,
    good: &OrderedAutomaton,
    report: &BuildReport,
    b: Bounds,
    words: usize,
    rng: &mut ChaCha8Rng,
) -> Result<String, String> {
    let check = good.verify_goodness(phi, b);
    if !check.is_good() {
        return Err(format!("not good: {check:?}"));
    }

    // splits: default heights on the good automaton and optimized heights on
    // the report's split automaton must both be Ramsey within their bounds
    let setups = [
        (good.clone(), default_heights(good), good.state_count()),
        (
            report.split_automaton.clone(),
            optimized_heights(report, &report.split_automaton)
                .map_err(|e| format!("heights: {e:?}"))?,
            report.optimized_height,
        ),
    ];
    for _ in 0..words {
        let len = rng.gen_range(1..=40);
        let w: Vec<char> = (0..len)
            .map(|_| phi.alphabet()[rng.gen_range(0..phi.alphabet().len())])
            .collect();
        for (a, h, bound) in &setups {
            let split = split_word(a, h, &w).map_err(|e| format!("split: {e:?}"))?;
            verify_ramsey(&split, phi, &w).map_err(|v| format!("not Ramsey: {v:?}"))?;
            if split.levels.iter().any(|&l| l > *bound) {
                return Err(format!("split level above {bound} on {w:?}"));
            }
        }
    }

    // expressions on the reduced good automaton
    let a = good.reduce();
    let finite = finite_expressions(&a, phi).map_err(|e| format!("finite: {e}"))?;
    for e in finite.values() {
        let check = check_good_expression(e, phi, b.max_len);
        if !check.is_good() {
            return Err(format!("expression not good: {check:?}"));
        }
    }
    for len in 1..=b.max_len.min(4) {
        for w in seminaut::automaton::words_of_length(phi.alphabet(), len) {
            let s = phi.eval(&w).unwrap();
            let hits: usize = finite
                .iter()
                .map(|(t, e)| usize::from(*t == s) * count_parses(e, &w))
                .sum();
            let misses: usize = finite
                .iter()
                .map(|(t, e)| usize::from(*t != s) * count_parses(e, &w))
                .sum();
            if hits != 1 || misses != 0 {
                return Err(format!("partition broken on {w:?}"));
            }
        }
    }
    let omega = omega_expression(&a, phi).map_err(|e| format!("omega: {e}"))?;
    let branches: Vec<(RExpr, RExpr)> = omega
        .union_branches()
        .into_iter()
        .map(|br| match br.view() {
            seminaut::rexpr::ExprView::Concat(h, om) => match om.view() {
                seminaut::rexpr::ExprView::Omega(body) => (h.clone(), body.clone()),
                _ => unreachable!("branch tail is an ω-iteration"),
            },
            _ => unreachable!("branch is a concatenation"),
        })
        .collect();
    for ul in 0..=b.max_u {
        for vl in 1..=b.max_v {
            for u in seminaut::automaton::words_of_length(phi.alphabet(), ul) {
                for v in seminaut::automaton::words_of_length(phi.alphabet(), vl) {
                    let w = UpWord::new(u.clone(), v.clone()).unwrap();
                    let ones = branches
                        .iter()
                        .filter(|(h, g)| match_up_branch(h, g, &w, phi) == UpVerdict::ExactlyOne)
                        .count();
                    let bad = branches
                        .iter()
                        .filter(|(h, g)| {
                            !matches!(
                                match_up_branch(h, g, &w, phi),
                                UpVerdict::ExactlyOne | UpVerdict::Zero
                            )
                        })
                        .count();
                    if ones != 1 || bad != 0 {
                        return Err(format!("ω-match broken on {}", up_word_text(&w)));
                    }
                }
            }
        }
    }
    Ok(format!(
        "|S|={} states={} case={:?}",
        phi.semigroup().len(),
        good.state_count(),
        report.case
    ))
}

/// Instances whose synthesized automaton exceeds this are re-rolled: the
/// exact unambiguity and elimination checks are super-cubic in states, and
/// the recursion can reach thousands of states even for 6-element closures.
const SWEEP_STATE_CAP: usize = 150;

fn sweep(cli: &Cli, count: usize, words: usize) -> Result<i32> {
    println!("sweep: {count} instances, base seed {}", cli.seed);
    let b = bounds(cli);
    let mut failures = 0usize;
    for i in 0..count {
        // derive per-instance seeds; re-roll until the closure and the
        // synthesized automaton are small enough for the exact checks
        let mut attempt = 0u64;
        let (phi, good, report, inst_seed) = loop {
            let inst_seed = cli
                .seed
                .wrapping_add(1 + i as u64)
                .wrapping_mul(0x9e37_79b9_7f4a_7c15)
                .wrapping_add(attempt);
            attempt += 1;
            let mut rng = ChaCha8Rng::seed_from_u64(inst_seed);
            let points = rng.gen_range(2..=3);
            let gens = rng.gen_range(1..=3);
            let Ok(phi) = gen::gen_morphism(points, gens, inst_seed, 6) else {
                continue;
            };
            let Ok((good, report)) = build_good(&phi) else {
                continue;
            };
            if good.state_count() <= SWEEP_STATE_CAP {
                break (phi, good, report, inst_seed);
            }
        };
        let mut rng = ChaCha8Rng::seed_from_u64(inst_seed ^ 0xabcd);
        match sweep_instance(&phi, &good, &report, b, words, &mut rng) {
            Ok(info) => println!("instance {i:2} seed {inst_seed:20}: ok {info}"),
            Err(why) => {
                failures += 1;
                println!("instance {i:2} seed {inst_seed:20}: FAIL {why}");
            }
        }
    }
    if failures == 0 {
        println!("sweep passed");
        Ok(0)
    } else {
        println!("sweep failed: {failures}/{count} instances");
        Ok(EXIT_VIOLATION)
    }
}
