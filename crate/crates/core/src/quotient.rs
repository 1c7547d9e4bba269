//! Finite quotients `G/Stab_G(n)` as permutation groups on level `n`.

use std::collections::HashMap;

use num_bigint::BigUint;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::perm::Perm;
use crate::preset::Preset;
use crate::schreier::{orbits, StabChain};
use crate::tree::{level_size, level_vertices, Vertex};
use crate::word::{Syllable, Word};

/// Levels above this need an explicit override.
pub const DEFAULT_LEVEL_CAP_POINTS: usize = 1 << 12;

/// Generator images on the `d^n` level-`n` vertices in lexicographic order.
#[derive(Clone, Debug)]
pub struct LevelAction {
    level: usize,
    degree: usize,
    images: Vec<Perm>,
    inverses: Vec<Perm>,
}

impl LevelAction {
    pub fn new(p: &Preset, n: usize) -> Result<Self> {
        let d = p.degree();
        let points = level_size(d, n);
        if points > DEFAULT_LEVEL_CAP_POINTS {
            return Err(Error::Precondition(format!(
                "level {n} has {points} vertices, above the cap of {DEFAULT_LEVEL_CAP_POINTS}"
            )));
        }
        let verts = level_vertices(d, n)?;
        let images: Vec<Perm> = (0..p.num_generators())
            .map(|g| {
                let w = Word::gen(g);
                let im = verts.iter().map(|v| p.apply_to_vertex(&w, v).rank(d) as u32).collect();
                Perm::from_images_unchecked(im)
            })
            .collect();
        let inverses = images.iter().map(Perm::inverse).collect();
        Ok(LevelAction {
            level: n,
            degree: d,
            images,
            inverses,
        })
    }

    pub fn level(&self) -> usize {
        self.level
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn points(&self) -> usize {
        level_size(self.degree, self.level)
    }

    pub fn generator_images(&self) -> &[Perm] {
        &self.images
    }

    pub fn syllable_image(&self, s: Syllable) -> Perm {
        let base = if s.exp > 0 {
            &self.images[s.gen as usize]
        } else {
            &self.inverses[s.gen as usize]
        };
        let mut acc = base.clone();
        for _ in 1..s.exp.unsigned_abs() {
            acc = base.compose(&acc);
        }
        acc
    }

    /// Image of a word: the rightmost syllable acts first.
    pub fn image(&self, w: &Word) -> Perm {
        let mut acc = Perm::identity(self.points());
        for &s in w.syllables().iter().rev() {
            acc = self.syllable_image(s).compose(&acc);
        }
        acc
    }

    pub fn group(&self) -> StabChain {
        StabChain::new(self.points(), &self.images)
    }

    pub fn subgroup(&self, words: &[Word]) -> PermSubgroup {
        PermSubgroup::new(self.level, self.points(), words.iter().map(|w| self.image(w)).collect())
    }
}

/// A subgroup of a level quotient with its stabilizer chain.
#[derive(Clone, Debug)]
pub struct PermSubgroup {
    level: usize,
    gens: Vec<Perm>,
    chain: StabChain,
    points: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PermSubgroupReport {
    pub level: usize,
    pub order: String,
    pub orbit_sizes: Vec<usize>,
}

impl PermSubgroup {
    pub fn new(level: usize, points: usize, gens: Vec<Perm>) -> Self {
        let chain = StabChain::new(points, &gens);
        PermSubgroup {
            level,
            gens,
            chain,
            points,
        }
    }

    pub fn level(&self) -> usize {
        self.level
    }

    pub fn generators(&self) -> &[Perm] {
        &self.gens
    }

    pub fn chain(&self) -> &StabChain {
        &self.chain
    }

    pub fn order(&self) -> BigUint {
        self.chain.order()
    }

    pub fn contains(&self, g: &Perm) -> bool {
        if self.gens.is_empty() {
            return g.is_identity();
        }
        self.chain.contains(g)
    }

    /// Equality as subgroups, by mutual generator containment.
    pub fn same_as(&self, other: &PermSubgroup) -> bool {
        other.gens.iter().all(|g| self.contains(g)) && self.gens.iter().all(|g| other.contains(g))
    }

    pub fn orbit_sizes(&self) -> Vec<usize> {
        orbits(self.points, &self.gens).iter().map(Vec::len).collect()
    }

    pub fn report(&self) -> PermSubgroupReport {
        PermSubgroupReport {
            level: self.level,
            order: self.order().to_string(),
            orbit_sizes: self.orbit_sizes(),
        }
    }
}

pub fn level_action(p: &Preset, n: usize) -> Result<LevelAction> {
    LevelAction::new(p, n)
}

/// `|G / Stab_G(n)|`.
pub fn quotient_order(p: &Preset, n: usize) -> Result<BigUint> {
    Ok(LevelAction::new(p, n)?.group().order())
}

pub fn is_level_transitive(p: &Preset, n: usize) -> Result<bool> {
    let act = LevelAction::new(p, n)?;
    Ok(orbits(act.points(), act.generator_images()).len() == 1)
}

pub fn image_subgroup(p: &Preset, words: &[Word], n: usize) -> Result<PermSubgroup> {
    let act = LevelAction::new(p, n)?;
    Ok(PermSubgroup::new(n, act.points(), words.iter().map(|w| act.image(w)).collect()))
}

/// Index of the image of `⟨words⟩` in `G/Stab_G(n)`.
pub fn subgroup_index_in_quotient(p: &Preset, words: &[Word], n: usize) -> Result<BigUint> {
    let act = LevelAction::new(p, n)?;
    let whole = act.group().order();
    let sub = PermSubgroup::new(n, act.points(), words.iter().map(|w| act.image(w)).collect());
    Ok(whole / sub.order())
}

/// Transversal words `t_x` with `t_x(v) = x` over the orbit of `v`, in
/// breadth-first order by generator index.
pub fn orbit_transversal(p: &Preset, v: &Vertex) -> Vec<(Vertex, Word)> {
    let mut reps: Vec<(Vertex, Word)> = vec![(v.clone(), Word::identity())];
    let mut index: HashMap<Vertex, usize> = HashMap::from([(v.clone(), 0)]);
    let mut i = 0;
    while i < reps.len() {
        for g in 0..p.num_generators() {
            let s = Word::gen(g);
            let y = p.apply_to_vertex(&s, &reps[i].0);
            if !index.contains_key(&y) {
                let w = p.mul(&s, &reps[i].1);
                index.insert(y.clone(), reps.len());
                reps.push((y, w));
            }
        }
        i += 1;
    }
    reps
}

/// Schreier generators `t_{s(x)}^{-1} s t_x` of `Stab_G(v)`; they generate
/// the stabilizer in `G` itself, not only its level image.
pub fn point_stabilizer_words(p: &Preset, v: &Vertex) -> Vec<Word> {
    let reps = orbit_transversal(p, v);
    let index: HashMap<&Vertex, usize> = reps.iter().enumerate().map(|(i, (x, _))| (x, i)).collect();
    let mut out: Vec<Word> = Vec::new();
    for (x, t) in &reps {
        for g in 0..p.num_generators() {
            let s = Word::gen(g);
            let y = p.apply_to_vertex(&s, x);
            let ty = &reps[index[&y]].1;
            let w = p.product([&p.inv(ty), &s, t]);
            if !w.is_empty() && !out.contains(&w) {
                out.push(w);
            }
        }
    }
    out
}
