//! Pullback subgroups, level traps, Fix-based non-conjugacy and
//! conjugate-count bounds.

use std::collections::{HashMap, HashSet};

use num_bigint::BigUint;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use crate::budget::Budgets;
use crate::element::ElementOrder;
use crate::error::{Error, Result};
use crate::perm::Perm;
use crate::preset::Preset;
use crate::quotient::{point_stabilizer_words, LevelAction, PermSubgroup};
use crate::search::{finite_closure, ShortlexWords};
use crate::subgroup::{escape_in, fixed_vertices, Approximation, SubgroupHandle};
use crate::tree::{level_vertices, Vertex};
use crate::word::Word;

const MAX_DELTA_IMAGE: usize = 1 << 16;
const MAX_FINITE_DELTA: usize = 4096;

/// How pullback generators were tested against `Δ`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind", content = "level")]
pub enum SectionCheck {
    /// Against the certified element list of a finite `Δ`.
    Exact,
    /// In the level quotient only.
    AtLevel(usize),
}

/// Finitely many generators of `{ g ∈ Stab_G(k) : g_{0^k} ∈ Δ }`.
#[derive(Clone, Debug)]
pub struct Pullback {
    pub handle: SubgroupHandle,
    pub k: usize,
    pub level: usize,
    /// Level of the quotient in which cosets of the preimage were enumerated.
    pub coset_level: usize,
    pub section_check: SectionCheck,
    pub candidates: usize,
    /// Candidates whose section failed the exact test.
    pub dropped: usize,
    pub truncated: bool,
}

/// Quotient elements of `G/Stab_G(k)` with representative words.
fn quotient_elements(p: &Preset, act: &LevelAction) -> Vec<(Perm, Word)> {
    let mut reps = vec![(Perm::identity(act.points()), Word::identity())];
    let mut index: HashMap<Perm, usize> = HashMap::from([(reps[0].0.clone(), 0)]);
    let mut i = 0;
    while i < reps.len() {
        for (g, img) in act.generator_images().iter().enumerate() {
            let x = img.compose(&reps[i].0);
            if !index.contains_key(&x) {
                index.insert(x.clone(), reps.len());
                let w = p.mul(&Word::gen(g), &reps[i].1);
                reps.push((x, w));
            }
        }
        i += 1;
    }
    reps
}

/// Schreier generators of `Stab_G(k)`.
pub fn level_stabilizer_words(p: &Preset, k: usize) -> Result<Vec<Word>> {
    let act = LevelAction::new(p, k)?;
    let reps = quotient_elements(p, &act);
    let index: HashMap<&Perm, usize> = reps.iter().enumerate().map(|(i, (x, _))| (x, i)).collect();
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for (x, t) in &reps {
        for (g, img) in act.generator_images().iter().enumerate() {
            let y = img.compose(x);
            let ty = &reps[index[&y]].1;
            let w = p.product([&p.inv(ty), &Word::gen(g), t]);
            if !w.is_empty() && seen.insert(w.clone()) {
                out.push(w);
            }
        }
    }
    Ok(out)
}

fn perm_closure(gens: &[Perm], points: usize, cap: usize) -> Option<Vec<Perm>> {
    let id = Perm::identity(points);
    let mut elems = vec![id.clone()];
    let mut seen = HashSet::from([id]);
    let mut i = 0;
    while i < elems.len() {
        for g in gens {
            let x = g.compose(&elems[i]);
            if seen.insert(x.clone()) {
                if elems.len() >= cap {
                    return None;
                }
                elems.push(x);
            }
        }
        i += 1;
    }
    Some(elems)
}

fn coset_key(delta: &[Perm], x: &Perm) -> Perm {
    delta.iter().map(|d| d.compose(x)).min().expect("Δ contains the identity")
}

/// Generators of the pullback `(π_1 ∘ ψ_k)^{-1}(Δ)` with membership answered
/// at level `n`.
///
/// Cosets of the level preimage are enumerated in `Stab_G(k)` and its
/// Schreier generators harvested. For a certified finite `Δ` each one is
/// then kept only if its `0^k`-section is exactly in `Δ`, so the result
/// generates a subgroup of the true pullback; otherwise sections are
/// tested at `Δ`'s membership level.
pub fn pullback_subgroup(p: &Preset, delta: &SubgroupHandle, k: usize, n: usize, budgets: &Budgets) -> Result<Pullback> {
    if k >= n {
        return Err(Error::Precondition(format!("verification level {n} must exceed k = {k}")));
    }
    let zero = Vertex::zeros(k);
    let (check, coset_level) = match (delta.elements(), delta.membership_level()) {
        (Some(elems), _) => {
            let size = elems.len();
            let mut l = n;
            for cand in 1..=n {
                let act = LevelAction::new(p, cand)?;
                let imgs: Vec<Perm> = delta.generators().iter().map(|w| act.image(w)).collect();
                if perm_closure(&imgs, act.points(), size + 1).is_some_and(|e| e.len() == size) {
                    l = cand;
                    break;
                }
            }
            (SectionCheck::Exact, l)
        }
        (None, Some(l)) => (SectionCheck::AtLevel(l), l),
        (None, None) => {
            return Err(Error::Precondition("Δ needs a membership level or an element list".into()));
        }
    };
    let act_l = LevelAction::new(p, coset_level)?;
    let delta_imgs: Vec<Perm> = delta.generators().iter().map(|w| act_l.image(w)).collect();
    let delta_elems = perm_closure(&delta_imgs, act_l.points(), MAX_DELTA_IMAGE)
        .ok_or_else(|| Error::Precondition("image of Δ too large to enumerate cosets".into()))?;

    let stab = level_stabilizer_words(p, k)?;
    let phi = |g: &Word| act_l.image(&p.section_at(g, &zero));
    let ys: Vec<(Word, Perm)> = stab.into_iter().map(|y| {
        let im = phi(&y);
        (y, im)
    }).collect();

    let mut truncated = false;
    let mut steps = 0u64;
    let id = Perm::identity(act_l.points());
    let mut cosets: Vec<(Word, Perm)> = vec![(Word::identity(), id.clone())];
    let mut index: HashMap<Perm, usize> = HashMap::from([(coset_key(&delta_elems, &id), 0)]);
    let mut raw: Vec<Word> = Vec::new();
    let mut seen: HashSet<Word> = HashSet::new();
    let mut i = 0;
    'cosets: while i < cosets.len() {
        for (y, yi) in &ys {
            steps += 1;
            if steps > budgets.search {
                truncated = true;
                break 'cosets;
            }
            let x = cosets[i].1.compose(yi);
            let key = coset_key(&delta_elems, &x);
            match index.get(&key) {
                None => {
                    index.insert(key, cosets.len());
                    let w = p.mul(&cosets[i].0, y);
                    cosets.push((w, x));
                }
                Some(&j) => {
                    let s = p.product([&cosets[i].0, y, &p.inv(&cosets[j].0)]);
                    if !s.is_empty() && seen.insert(s.clone()) {
                        raw.push(s);
                    }
                }
            }
        }
        i += 1;
    }

    let candidates = raw.len();
    let mut dropped = 0;
    let act_k = LevelAction::new(p, k)?;
    let act_n = LevelAction::new(p, n)?;
    let buckets: HashMap<Perm, Vec<Word>> = match delta.elements() {
        Some(elems) => {
            let mut b: HashMap<Perm, Vec<Word>> = HashMap::new();
            for e in elems {
                b.entry(act_l.image(e)).or_default().push(e.clone());
            }
            b
        }
        None => HashMap::new(),
    };
    let mut kept: Vec<Word> = Vec::new();
    let mut kept_images: HashSet<Perm> = HashSet::new();
    for g in raw {
        if !act_k.image(&g).is_identity() {
            return Err(Error::Inconsistency("pullback generator moves level k".into()));
        }
        let s = p.section_at(&g, &zero);
        let ok = match check {
            SectionCheck::Exact => {
                let mut found = false;
                for e in buckets.get(&act_l.image(&s)).map(Vec::as_slice).unwrap_or(&[]) {
                    if p.equal(&s, e, budgets.identity_nodes)? {
                        found = true;
                        break;
                    }
                }
                found
            }
            SectionCheck::AtLevel(_) => delta.image_contains(&s)?,
        };
        if !ok {
            dropped += 1;
            continue;
        }
        let im = act_n.image(&g);
        if im.is_identity() || !kept_images.insert(im) {
            continue;
        }
        if kept.len() >= budgets.max_generators {
            truncated = true;
            break;
        }
        kept.push(g);
    }
    let approx = if truncated {
        Approximation::Truncated
    } else {
        Approximation::Under
    };
    let handle = SubgroupHandle::new(kept).with_approximation(approx).at_level(p, n)?;
    Ok(Pullback {
        handle,
        k,
        level: n,
        coset_level,
        section_check: check,
        candidates,
        dropped,
        truncated,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrapReport {
    pub k: usize,
    pub l: usize,
    /// Every generator fixes level `k`.
    pub fixes_level_k: bool,
    /// A generator index and a level-`k` vertex it moves.
    pub moved_witness: Option<(usize, Vertex)>,
    /// No vertex of level `k + l` is fixed.
    pub no_fixed_vertex: bool,
    pub fixed_witness: Option<Vertex>,
}

impl TrapReport {
    pub fn pass(&self) -> bool {
        self.fixes_level_k && self.no_fixed_vertex
    }
}

pub fn level_trap_check(p: &Preset, h: &SubgroupHandle, k: usize, l: usize) -> Result<TrapReport> {
    if l < 1 {
        return Err(Error::Precondition("l must be at least 1".into()));
    }
    let verts = level_vertices(p.degree(), k)?;
    let mut moved_witness = None;
    'gens: for (i, g) in h.generators().iter().enumerate() {
        for v in &verts {
            if &p.apply_to_vertex(g, v) != v {
                moved_witness = Some((i, v.clone()));
                break 'gens;
            }
        }
    }
    let fixed = fixed_vertices(p, h, k + l);
    Ok(TrapReport {
        k,
        l,
        fixes_level_k: moved_witness.is_none(),
        moved_witness,
        no_fixed_vertex: fixed.is_empty(),
        fixed_witness: fixed.into_iter().next(),
    })
}

/// One candidate `Δ` tried by [`trap_pipeline`].
#[derive(Clone, Debug)]
pub struct TrapAttempt {
    pub delta: Vec<Word>,
    /// `None` when `⟨Δ⟩` was not certified finite.
    pub delta_order: Option<usize>,
    pub pullback: Option<Pullback>,
    pub report: Option<TrapReport>,
}

#[derive(Clone, Debug)]
pub struct TrapOutcome {
    pub attempts: Vec<TrapAttempt>,
    /// Index of the first passing attempt.
    pub chosen: Option<usize>,
}

impl TrapOutcome {
    pub fn chosen(&self) -> Option<&TrapAttempt> {
        self.chosen.map(|i| &self.attempts[i])
    }
}

/// Builds `H ⊆ Stab_G(k)` fixing no vertex of level `k + l` from a finite
/// `Q`: candidate finite overgroups `Δ ⊇ Q` (first `Q`, then `Q` with one
/// more generator) are certified finite, pulled back, and trap-checked.
/// A finite `Δ` lies in a weakly maximal subgroup, whose pullback contains
/// this one and so fixes even fewer vertices.
pub fn trap_pipeline(p: &Preset, q: &[Word], k: usize, l: usize, budgets: &Budgets) -> Result<TrapOutcome> {
    let n = k + l;
    let mut cands: Vec<Vec<Word>> = vec![q.to_vec()];
    for g in p.generators() {
        let mut c = q.to_vec();
        c.push(g);
        cands.push(c);
    }
    let mut attempts = Vec::new();
    let mut q_order: Option<usize> = None;
    for delta in cands {
        let elems = finite_closure(p, &delta, n.max(3), MAX_FINITE_DELTA, budgets.identity_nodes)?;
        let Some(elems) = elems else {
            attempts.push(TrapAttempt {
                delta,
                delta_order: None,
                pullback: None,
                report: None,
            });
            continue;
        };
        // a generator already in Q adds nothing
        match q_order {
            Some(o) if o == elems.len() => continue,
            Some(_) => {}
            None => q_order = Some(elems.len()),
        }
        let order = elems.len();
        let handle = SubgroupHandle::new(delta.clone()).with_elements(elems);
        let pb = pullback_subgroup(p, &handle, k, n, budgets)?;
        let report = level_trap_check(p, &pb.handle, k, l)?;
        let pass = report.pass();
        attempts.push(TrapAttempt {
            delta,
            delta_order: Some(order),
            pullback: Some(pb),
            report: Some(report),
        });
        if pass {
            let chosen = Some(attempts.len() - 1);
            return Ok(TrapOutcome { attempts, chosen });
        }
    }
    Ok(TrapOutcome { attempts, chosen: None })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeparationWitness {
    pub level: usize,
    /// Which argument (0 or 1) fixes a vertex at that level.
    pub fixer: usize,
    pub vertex: Vertex,
}

/// A level where exactly one of the two subgroups fixes a vertex; as
/// `Fix(gHg⁻¹) = g·Fix(H)` and conjugation preserves levels, such a level
/// proves the subgroups are not conjugate.
pub fn fix_separation_witness(
    p: &Preset,
    hi: &SubgroupHandle,
    hj: &SubgroupHandle,
    depth: usize,
) -> Result<Option<SeparationWitness>> {
    if depth < 1 {
        return Err(Error::Precondition("depth must be at least 1".into()));
    }
    for t in 1..=depth {
        let fi = fixed_vertices(p, hi, t);
        let fj = fixed_vertices(p, hj, t);
        match (fi.first(), fj.first()) {
            (Some(v), None) => {
                return Ok(Some(SeparationWitness {
                    level: t,
                    fixer: 0,
                    vertex: v.clone(),
                }))
            }
            (None, Some(v)) => {
                return Ok(Some(SeparationWitness {
                    level: t,
                    fixer: 1,
                    vertex: v.clone(),
                }))
            }
            _ => {}
        }
    }
    Ok(None)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConjugateBound {
    pub count: usize,
    pub gamma: Option<Word>,
    pub gamma_order: Option<BigUint>,
    /// `f` with `f γ^{p^{e-1}} f^{-1}` outside `H`.
    pub conjugator: Option<Word>,
    /// `f γ^i f^{-1}` for the pairwise distinct conjugates found.
    pub witnesses: Vec<Word>,
}

fn prime_power(m: u64) -> Option<(u64, u32)> {
    if m < 2 {
        return None;
    }
    let pr = (2..=m).find(|d| m.is_multiple_of(*d))?;
    let mut x = m;
    let mut e = 0;
    while x.is_multiple_of(pr) {
        x /= pr;
        e += 1;
    }
    (x == 1).then_some((pr, e))
}

/// Lower bound on the number of conjugates of `H`, at level `n`: for `γ`
/// of prime-power order `p^e` whose order-`p` power is conjugated out of
/// `H` by `f`, the subgroups `(fγf⁻¹)^i H (fγf⁻¹)^{-i}` are compared as
/// level-`n` images. `γ` ranges over reduced words of length `≤ max_len`.
pub fn conjugate_count_lower_bound(
    p: &Preset,
    h: &SubgroupHandle,
    n: usize,
    max_len: usize,
    budgets: &Budgets,
) -> Result<ConjugateBound> {
    if let Some(l) = h.membership_level() {
        if l > n {
            return Err(Error::Precondition(format!("membership level {l} exceeds {n}")));
        }
    }
    let act = LevelAction::new(p, n)?;
    let himg = act.subgroup(h.generators());
    let mut best = ConjugateBound {
        count: 1,
        gamma: None,
        gamma_order: None,
        conjugator: None,
        witnesses: Vec::new(),
    };
    for gamma in ShortlexWords::new(p, max_len).skip(1) {
        let m = match p.element_order(&gamma, budgets.order_nodes) {
            Ok(ElementOrder::Finite(m)) => m,
            Ok(ElementOrder::Infinite) | Err(Error::Undecided { .. }) => continue,
            Err(e) => return Err(e),
        };
        let Some(m64) = m.to_u64().filter(|&m| m <= 1 << 12) else {
            continue;
        };
        let Some((pr, e)) = prime_power(m64) else {
            continue;
        };
        if m64 as usize <= best.count {
            continue;
        }
        let delta = p.pow(&gamma, pr.pow(e - 1) as i64);
        let Some(f) = escape_in(p, &act, &himg, &delta, budgets.search) else {
            continue;
        };
        let mut distinct: Vec<PermSubgroup> = Vec::new();
        let mut witnesses = Vec::new();
        let mut c = Word::identity();
        let fgf = p.conj(&f, &gamma);
        for _ in 0..m64 {
            let ci = act.image(&c);
            let conj: Vec<Perm> = himg.generators().iter().map(|x| ci.conjugate(x)).collect();
            let sub = PermSubgroup::new(n, act.points(), conj);
            if !distinct.iter().any(|d| d.same_as(&sub)) {
                distinct.push(sub);
                witnesses.push(c.clone());
            }
            c = p.mul(&fgf, &c);
        }
        if distinct.len() > best.count {
            best = ConjugateBound {
                count: distinct.len(),
                gamma: Some(gamma),
                gamma_order: Some(m),
                conjugator: Some(f),
                witnesses,
            };
        }
    }
    if best.gamma.is_none() {
        best.gamma_order = None;
    }
    Ok(best)
}

/// Finite-level parabolic approximation: `Stab_G(v·0^{n-|v|})` with
/// membership at level `n`.
pub fn parabolic_approximation(p: &Preset, v: &Vertex, n: usize) -> Result<SubgroupHandle> {
    if v.level() > n {
        return Err(Error::Precondition(format!("vertex {v} lies below level {n}")));
    }
    let point = v.concat(&Vertex::zeros(n - v.level()));
    SubgroupHandle::with_membership_level(p, point_stabilizer_words(p, &point), n)
}
