//! Random morphism generation via transformation semigroups: random
//! self-maps of a finite point set, closed under composition, so
//! associativity holds by construction.

use anyhow::{bail, Result};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use seminaut::algebra::{Elem, FiniteSemigroup, Morphism};
use std::collections::BTreeMap;

/// Default cap on the closure size.
pub const DEFAULT_CAP: usize = 64;

/// A self-map of {0, …, m−1}, written pointwise.
type SelfMap = Vec<usize>;

fn compose(f: &SelfMap, g: &SelfMap) -> SelfMap {
    // apply f first, then g, so the image of a word is read left to right
    f.iter().map(|&x| g[x]).collect()
}

fn map_name(f: &SelfMap) -> String {
    let body: Vec<String> = f.iter().map(|x| x.to_string()).collect();
    format!("⟨{}⟩", body.join(""))
}

/// Generates `gens` random self-maps of an `points`-point set and closes
/// them under composition; letters 'a', 'b', … map to the generators.
/// Deterministic per seed; fails with the closure size if it exceeds `cap`.
pub fn gen_morphism(points: usize, gens: usize, seed: u64, cap: usize) -> Result<Morphism> {
    if points == 0 || gens == 0 {
        bail!("need at least one point and one generator");
    }
    if gens > 26 {
        bail!("at most 26 generators (one per letter)");
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let generators: Vec<SelfMap> = (0..gens)
        .map(|_| (0..points).map(|_| rng.gen_range(0..points)).collect())
        .collect();

    // breadth-first closure under composition with the generators
    let mut index: BTreeMap<SelfMap, usize> = BTreeMap::new();
    let mut elems: Vec<SelfMap> = Vec::new();
    let mut queue: Vec<SelfMap> = Vec::new();
    for g in &generators {
        if !index.contains_key(g) {
            index.insert(g.clone(), elems.len());
            elems.push(g.clone());
            queue.push(g.clone());
        }
    }
    while let Some(f) = queue.pop() {
        for g in &generators {
            for h in [compose(&f, g), compose(g, &f)] {
                if !index.contains_key(&h) {
                    if elems.len() >= cap {
                        bail!("closure exceeds the cap of {cap} elements");
                    }
                    index.insert(h.clone(), elems.len());
                    elems.push(h.clone());
                    queue.push(h);
                }
            }
        }
    }

    let names: Vec<String> = elems.iter().map(map_name).collect();
    let table: Vec<Vec<usize>> = elems
        .iter()
        .map(|f| elems.iter().map(|g| index[&compose(f, g)]).collect())
        .collect();
    // associativity holds by construction but is still validated
    let sg = FiniteSemigroup::validate(names, &table)
        .map_err(|e| anyhow::anyhow!("generated table rejected: {e:?}"))?;
    let letters: Vec<(char, Elem)> = generators
        .iter()
        .enumerate()
        .map(|(i, g)| ((b'a' + i as u8) as char, Elem(index[g])))
        .collect();
    Morphism::new(sg, &letters).map_err(|e| anyhow::anyhow!("generated morphism: {e:?}"))
}
