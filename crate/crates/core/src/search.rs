//! Deterministic enumeration of group elements.

use std::collections::{HashMap, HashSet};

use crate::error::Result;
use crate::perm::Perm;
use crate::preset::Preset;
use crate::quotient::LevelAction;
use crate::word::{Syllable, Word};

/// The search alphabet: every generator power `x^e` with `e` in `1..m`
/// for a generator of declared order `m`, and `x^{±1}` otherwise; ordered
/// by generator index, then exponent.
pub fn alphabet(p: &Preset) -> Vec<Word> {
    let mut out = Vec::new();
    for g in 0..p.num_generators() {
        match p.generator_order(g) {
            Some(1) => {}
            Some(m) => out.extend((1..m as i32).map(|e| Word::from_syllables(vec![Syllable::new(g, e)]))),
            None => {
                out.push(Word::from_syllables(vec![Syllable::new(g, 1)]));
                out.push(Word::from_syllables(vec![Syllable::new(g, -1)]));
            }
        }
    }
    out
}

/// Reduced words in shortlex order: breadth-first by number of alphabet
/// letters, ties broken by the order letters were appended. Each reduced
/// form appears once, at its first depth.
pub struct ShortlexWords<'a> {
    p: &'a Preset,
    letters: Vec<Word>,
    layer: Vec<Word>,
    next: Vec<Word>,
    pos: usize,
    seen: HashSet<Word>,
    depth: usize,
    max_depth: usize,
}

impl<'a> ShortlexWords<'a> {
    pub fn new(p: &'a Preset, max_depth: usize) -> Self {
        let id = Word::identity();
        ShortlexWords {
            p,
            letters: alphabet(p),
            layer: vec![id.clone()],
            next: Vec::new(),
            pos: 0,
            seen: HashSet::from([id]),
            depth: 0,
            max_depth,
        }
    }
}

impl Iterator for ShortlexWords<'_> {
    type Item = Word;

    fn next(&mut self) -> Option<Word> {
        loop {
            if self.pos < self.layer.len() {
                let w = self.layer[self.pos].clone();
                self.pos += 1;
                if self.depth < self.max_depth {
                    for x in &self.letters {
                        let u = self.p.mul(&w, x);
                        if self.seen.insert(u.clone()) {
                            self.next.push(u);
                        }
                    }
                }
                return Some(w);
            }
            if self.next.is_empty() {
                return None;
            }
            self.layer = std::mem::take(&mut self.next);
            self.pos = 0;
            self.depth += 1;
        }
    }
}

/// All elements of `⟨gens⟩` when it has at most `max_elements` elements,
/// as words; elements are told apart exactly (level-`level` images only
/// bucket the comparisons). `None` if the bound is exceeded.
pub fn finite_closure(
    p: &Preset,
    gens: &[Word],
    level: usize,
    max_elements: usize,
    budget: u64,
) -> Result<Option<Vec<Word>>> {
    let act = LevelAction::new(p, level)?;
    let mut elems: Vec<Word> = vec![Word::identity()];
    let mut buckets: HashMap<Perm, Vec<usize>> = HashMap::new();
    buckets.insert(act.image(&Word::identity()), vec![0]);
    let mut i = 0;
    while i < elems.len() {
        for s in gens {
            let u = p.mul(&elems[i], s);
            let key = act.image(&u);
            let mut known = false;
            if let Some(ids) = buckets.get(&key) {
                for &j in ids {
                    if p.equal(&u, &elems[j], budget)? {
                        known = true;
                        break;
                    }
                }
            }
            if !known {
                if elems.len() >= max_elements {
                    return Ok(None);
                }
                buckets.entry(key).or_default().push(elems.len());
                elems.push(u);
            }
        }
        i += 1;
    }
    Ok(Some(elems))
}
