//! Finitely generated subgroups: fixed vertices, sections, rigid
//! stabilizers, index evidence and escaping conjugates.

use std::sync::Arc;

use num_bigint::BigUint;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::perm::Perm;
use crate::preset::Preset;
use crate::quotient::{LevelAction, PermSubgroup};
use crate::search::ShortlexWords;
use crate::tree::Vertex;
use crate::word::Word;

/// How faithfully a handle's generators describe the subgroup it names.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Approximation {
    /// The generators generate exactly the named subgroup.
    #[default]
    Exact,
    /// A subgroup of the named one, harvested by bounded search.
    Under,
    /// As `Under`, and the search stopped on its budget.
    Truncated,
}

#[derive(Clone, Debug)]
struct Membership {
    action: Arc<LevelAction>,
    image: Arc<PermSubgroup>,
}

/// A subgroup given by generator words, optionally with a level at which
/// membership is answered and, for certified finite subgroups, the full
/// element list.
#[derive(Clone, Debug)]
pub struct SubgroupHandle {
    gens: Vec<Word>,
    membership: Option<Membership>,
    elements: Option<Arc<Vec<Word>>>,
    approximation: Approximation,
}

impl SubgroupHandle {
    pub fn new(gens: Vec<Word>) -> Self {
        SubgroupHandle {
            gens: gens.into_iter().filter(|g| !g.is_empty()).collect(),
            membership: None,
            elements: None,
            approximation: Approximation::Exact,
        }
    }

    pub fn trivial() -> Self {
        Self::new(Vec::new())
    }

    /// Handle whose membership queries are answered in `G/Stab_G(level)`.
    pub fn with_membership_level(p: &Preset, gens: Vec<Word>, level: usize) -> Result<Self> {
        Self::new(gens).at_level(p, level)
    }

    pub fn at_level(mut self, p: &Preset, level: usize) -> Result<Self> {
        let action = Arc::new(LevelAction::new(p, level)?);
        let image = Arc::new(action.subgroup(&self.gens));
        self.membership = Some(Membership { action, image });
        Ok(self)
    }

    pub fn with_elements(mut self, elements: Vec<Word>) -> Self {
        self.elements = Some(Arc::new(elements));
        self
    }

    pub fn with_approximation(mut self, a: Approximation) -> Self {
        self.approximation = a;
        self
    }

    pub fn generators(&self) -> &[Word] {
        &self.gens
    }

    pub fn approximation(&self) -> Approximation {
        self.approximation
    }

    pub fn membership_level(&self) -> Option<usize> {
        self.membership.as_ref().map(|m| m.action.level())
    }

    pub fn image(&self) -> Option<&PermSubgroup> {
        self.membership.as_ref().map(|m| m.image.as_ref())
    }

    pub fn action(&self) -> Option<&LevelAction> {
        self.membership.as_ref().map(|m| m.action.as_ref())
    }

    /// Element list when the subgroup is certified finite.
    pub fn elements(&self) -> Option<&[Word]> {
        self.elements.as_deref().map(Vec::as_slice)
    }

    fn require_membership(&self) -> Result<&Membership> {
        self.membership
            .as_ref()
            .ok_or_else(|| Error::Precondition("subgroup has no membership level".into()))
    }

    /// Membership of the level image. `false` refutes membership outright;
    /// `true` is evidence at this level only.
    pub fn image_contains(&self, w: &Word) -> Result<bool> {
        let m = self.require_membership()?;
        Ok(m.image.contains(&m.action.image(w)))
    }

    /// Exact membership for certified finite subgroups.
    pub fn contains_exact(&self, p: &Preset, w: &Word, budget: u64) -> Result<Option<bool>> {
        let Some(elems) = &self.elements else {
            return Ok(None);
        };
        for e in elems.iter() {
            if p.equal(w, e, budget)? {
                return Ok(Some(true));
            }
        }
        Ok(Some(false))
    }

    /// `g H g^{-1}`, keeping the membership level.
    pub fn conjugate(&self, p: &Preset, g: &Word) -> Result<Self> {
        let gens = self.gens.iter().map(|h| p.conj(g, h)).collect();
        let mut out = SubgroupHandle::new(gens).with_approximation(self.approximation);
        if let Some(e) = &self.elements {
            out.elements = Some(Arc::new(e.iter().map(|h| p.conj(g, h)).collect()));
        }
        if let Some(l) = self.membership_level() {
            out = out.at_level(p, l)?;
        }
        Ok(out)
    }
}

fn fixes_all(p: &Preset, gens: &[Word], v: &Vertex) -> bool {
    gens.iter().all(|g| &p.apply_to_vertex(g, v) == v)
}

/// Level-`n` vertices fixed by every generator, in lexicographic order.
pub fn fixed_vertices(p: &Preset, h: &SubgroupHandle, n: usize) -> Vec<Vertex> {
    let mut layer = vec![Vertex::root()];
    for _ in 0..n {
        let mut next = Vec::new();
        for v in &layer {
            for x in 0..p.degree() as u8 {
                let c = v.child(x);
                if fixes_all(p, h.generators(), &c) {
                    next.push(c);
                }
            }
        }
        layer = next;
        if layer.is_empty() {
            break;
        }
    }
    layer
}

/// The prefix-closed set of fixed vertices of level `≤ depth`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FixedTree {
    pub depth: usize,
    /// `levels[k]` lists the fixed vertices of level `k`.
    pub levels: Vec<Vec<Vertex>>,
    /// Lexicographically least fixed vertex of the deepest non-empty level.
    pub deepest: Vertex,
}

impl FixedTree {
    pub fn contains(&self, v: &Vertex) -> bool {
        self.levels.get(v.level()).is_some_and(|l| l.binary_search(v).is_ok())
    }

    pub fn len(&self) -> usize {
        self.levels.iter().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

pub fn fixed_tree(p: &Preset, h: &SubgroupHandle, depth: usize) -> FixedTree {
    let mut levels = vec![vec![Vertex::root()]];
    for _ in 0..depth {
        let prev = levels.last().unwrap();
        let mut next = Vec::new();
        for v in prev {
            for x in 0..p.degree() as u8 {
                let c = v.child(x);
                if fixes_all(p, h.generators(), &c) {
                    next.push(c);
                }
            }
        }
        levels.push(next);
    }
    let deepest = levels
        .iter()
        .rev()
        .find_map(|l| l.first().cloned())
        .unwrap_or_else(Vertex::root);
    FixedTree { depth, levels, deepest }
}

/// Least `l ≤ max_level` at which `H` fixes no vertex.
pub fn minimal_non_fixing_level(p: &Preset, h: &SubgroupHandle, max_level: usize) -> Option<usize> {
    let tree = fixed_tree(p, h, max_level);
    tree.levels.iter().position(Vec::is_empty)
}

/// `(g_v)_{v ∈ L_k}` in lexicographic order, for `g ∈ Stab_G(k)`.
pub fn psi_sections(p: &Preset, g: &Word, k: usize) -> Result<Vec<Word>> {
    let mut layer = vec![g.clone()];
    for lvl in 0..k {
        let mut next = Vec::with_capacity(layer.len() * p.degree());
        for (i, u) in layer.iter().enumerate() {
            let (perm, secs) = p.sections1(u);
            if let Some(c) = perm.iter().enumerate().position(|(c, &x)| c != x as usize) {
                let v = Vertex::from_rank(i, lvl, p.degree()).child(c as u8);
                return Err(Error::NotInLevelStabilizer {
                    level: k,
                    vertex: v.to_string(),
                });
            }
            next.extend(secs);
        }
        layer = next;
    }
    Ok(layer)
}

/// Whether `g` fixes level `|v|` and has trivial section at every other
/// vertex of that level.
pub fn in_rigid_stabilizer(p: &Preset, g: &Word, v: &Vertex, budget: u64) -> Result<bool> {
    let mut cur = g.clone();
    for &x in v.letters() {
        if cur.is_empty() {
            return Ok(true);
        }
        let (perm, secs) = p.sections1(&cur);
        if perm.iter().enumerate().any(|(c, &y)| c != y as usize) {
            return Ok(false);
        }
        for (c, s) in secs.iter().enumerate() {
            if c != x as usize && !p.is_identity(s, budget)? {
                return Ok(false);
            }
        }
        cur = secs[x as usize].clone();
    }
    Ok(true)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum IndexEvidence {
    /// The index strictly increases over the last levels.
    InfiniteIndex,
    /// The index is constant over the last levels.
    FiniteIndex,
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct IndexProfile {
    /// `indices[n-1]` is the index of the level-`n` image.
    #[serde(serialize_with = "crate::decimal::many")]
    pub indices: Vec<BigUint>,
    pub evidence: IndexEvidence,
}

pub fn index_growth_profile(p: &Preset, h: &SubgroupHandle, n_max: usize) -> Result<IndexProfile> {
    if n_max < 1 {
        return Err(Error::Precondition("n_max must be at least 1".into()));
    }
    let mut indices = Vec::with_capacity(n_max);
    for n in 1..=n_max {
        let act = LevelAction::new(p, n)?;
        let whole = act.group().order();
        indices.push(whole / act.subgroup(h.generators()).order());
    }
    let evidence = match indices.as_slice() {
        [.., x, y, z] if x < y && y < z => IndexEvidence::InfiniteIndex,
        [.., y, z] if y == z => IndexEvidence::FiniteIndex,
        [.., y, z] if y < z => IndexEvidence::InfiniteIndex,
        _ => IndexEvidence::Inconclusive,
    };
    Ok(IndexProfile { indices, evidence })
}

/// A word `f` with `f γ f^{-1}` outside `H`, certified by the level-`n`
/// image; `None` when the shortlex search exhausts `budget` conjugators.
pub fn conjugate_escaping(
    p: &Preset,
    h: &SubgroupHandle,
    gamma: &Word,
    n: usize,
    budget: u64,
) -> Result<Option<Word>> {
    if gamma.is_empty() || p.is_identity(gamma, budget.max(1) * 1000)? {
        return Err(Error::Precondition("γ must be nontrivial".into()));
    }
    if let Some(l) = h.membership_level() {
        if l > n {
            return Err(Error::Precondition(format!("membership level {l} exceeds search level {n}")));
        }
    }
    let act = LevelAction::new(p, n)?;
    let image = act.subgroup(h.generators());
    Ok(escape_in(p, &act, &image, gamma, budget))
}

pub(crate) fn escape_in(p: &Preset, act: &LevelAction, image: &PermSubgroup, gamma: &Word, budget: u64) -> Option<Word> {
    let gi = act.image(gamma);
    for f in ShortlexWords::new(p, usize::MAX).take(budget as usize) {
        let fi = act.image(&f);
        let c: Perm = fi.conjugate(&gi);
        if !image.contains(&c) {
            return Some(f);
        }
    }
    None
}
