//! Staged construction of weakly-maximal approximations around a finite
//! subgroup `Q`, diagonalizing against an avoid list, and its replayable
//! certificate.

use serde::{Deserialize, Serialize};

use crate::budget::Budgets;
use crate::construction::parabolic_approximation;
use crate::error::{Error, Result};
use crate::perm::Perm;
use crate::preset::{Preset, PresetDef};
use crate::quotient::LevelAction;
use crate::rist::RistSearch;
use crate::schreier::{normal_closure, orbits, StabChain};
use crate::search::finite_closure;
use crate::subgroup::{in_rigid_stabilizer, SubgroupHandle};
use crate::tree::{level_vertices, vertex_leq, Vertex};
use crate::word::Word;

pub const CERTIFICATE_FORMAT: &str = "selfsim-wm-certificate/1";

const MAX_Q_ELEMENTS: usize = 4096;
const MAX_STAGE_LEVEL: usize = 12;
const STREAM_PER_VERTEX: usize = 256;

/// One subgroup to diagonalize against, with the level at which its
/// membership is decided.
#[derive(Clone, Debug)]
pub struct AvoidSpec {
    pub label: String,
    pub handle: SubgroupHandle,
}

impl AvoidSpec {
    /// Parses `parabolic:VERTEX@LEVEL` or `gens:w1;w2;...@LEVEL`.
    pub fn parse(p: &Preset, s: &str) -> Result<Self> {
        let (body, level) = s
            .rsplit_once('@')
            .ok_or_else(|| Error::Parse(format!("avoid entry {s:?} lacks @LEVEL")))?;
        let level: usize = level
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("bad level in avoid entry {s:?}")))?;
        let handle = if let Some(v) = body.strip_prefix("parabolic:") {
            parabolic_approximation(p, &Vertex::parse(v.trim(), p.degree())?, level)?
        } else if let Some(ws) = body.strip_prefix("gens:") {
            let gens = ws
                .split(';')
                .filter(|x| !x.trim().is_empty())
                .map(|x| p.parse_word(x))
                .collect::<Result<Vec<_>>>()?;
            SubgroupHandle::with_membership_level(p, gens, level)?
        } else {
            return Err(Error::Parse(format!("avoid entry {s:?}: expected parabolic: or gens:")));
        };
        Ok(AvoidSpec {
            label: s.to_string(),
            handle,
        })
    }

    fn entry(&self, p: &Preset) -> AvoidEntry {
        AvoidEntry {
            label: self.label.clone(),
            level: self.handle.membership_level().unwrap_or(0),
            generators: self.handle.generators().iter().map(|w| p.format_word(w)).collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AvoidEntry {
    pub label: String,
    pub level: usize,
    pub generators: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageRecord {
    pub k: usize,
    pub v: Vertex,
    pub w: String,
    pub u: Vertex,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WmCertificate {
    pub format: String,
    pub preset: PresetDef,
    pub fingerprint: String,
    pub q: Vec<String>,
    pub k1: usize,
    pub avoid: Vec<AvoidEntry>,
    pub stages: Vec<StageRecord>,
    pub verification_level: usize,
    pub budgets: Budgets,
    pub seed: u64,
}

impl WmCertificate {
    /// Canonical serialization: fixed key order, two-space indentation.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("certificates serialize")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

fn q_elements(p: &Preset, q: &[Word], budgets: &Budgets) -> Result<Vec<Word>> {
    finite_closure(p, q, 4, MAX_Q_ELEMENTS, budgets.identity_nodes)?
        .ok_or_else(|| Error::Precondition(format!("Q is not finite of order ≤ {MAX_Q_ELEMENTS}")))
}

/// Images of `Q`'s elements on level `k`, with `Q(x)` orbit lookups.
struct QLevel {
    images: Vec<Perm>,
    degree: usize,
    level: usize,
}

impl QLevel {
    fn new(p: &Preset, elems: &[Word], level: usize) -> Result<Self> {
        let act = LevelAction::new(p, level)?;
        Ok(QLevel {
            images: elems.iter().map(|e| act.image(e)).collect(),
            degree: p.degree(),
            level,
        })
    }

    fn orbit(&self, v: &Vertex) -> Vec<Vertex> {
        debug_assert_eq!(v.level(), self.level);
        let r = v.rank(self.degree);
        let mut out: Vec<Vertex> = self
            .images
            .iter()
            .map(|g| Vertex::from_rank(g.apply(r), self.level, self.degree))
            .collect();
        out.sort();
        out.dedup();
        out
    }
}

fn below_any(w: &Vertex, set: &[Vertex]) -> bool {
    set.iter().any(|s| vertex_leq(w, s))
}

/// Least level `k` with `Q ∩ Stab_G(k) = 1` and `Q` intransitive on `L_k`.
fn choose_k1(p: &Preset, elems: &[Word]) -> Result<usize> {
    for k in 1..=MAX_STAGE_LEVEL {
        let ql = QLevel::new(p, elems, k)?;
        let faithful = ql.images.iter().filter(|x| x.is_identity()).count() == 1;
        let points = ql.images.first().map(Perm::degree).unwrap_or(1);
        if faithful && orbits(points, &ql.images).len() > 1 {
            return Ok(k);
        }
    }
    Err(Error::Precondition(format!(
        "no level ≤ {MAX_STAGE_LEVEL} where Q acts faithfully and intransitively"
    )))
}

/// Least `k > prev` at which `Q` has more than one orbit on the level-`k`
/// vertices below `Q(u)`.
fn next_level(p: &Preset, elems: &[Word], prev: usize, u: &Vertex) -> Result<usize> {
    let qprev = QLevel::new(p, elems, u.level())?;
    let roots = qprev.orbit(u);
    for k in prev + 1..=MAX_STAGE_LEVEL {
        let ql = QLevel::new(p, elems, k)?;
        let slice: Vec<Vertex> = level_vertices(p.degree(), k)?
            .into_iter()
            .filter(|w| below_any(w, &roots))
            .collect();
        let first = ql.orbit(&slice[0]);
        if slice.iter().any(|w| first.binary_search(w).is_err()) {
            return Ok(k);
        }
    }
    Err(Error::Precondition(format!("Q is transitive below Q({u}) up to level {MAX_STAGE_LEVEL}")))
}

/// Runs the staged construction: one stage per avoid-list entry, each
/// choosing the lexicographically least valid vertex `v_i`, an element of
/// `Rist_G(v_i)` whose level image escapes `W_i`, and the least `u_i`.
pub fn build_certificate(
    p: &Preset,
    q: &[Word],
    avoid: &[AvoidSpec],
    verification_level: usize,
    budgets: &Budgets,
    seed: u64,
) -> Result<WmCertificate> {
    budgets.validate()?;
    let q: Vec<Word> = q.iter().filter(|w| !w.is_empty()).cloned().collect();
    let elems = q_elements(p, &q, budgets)?;
    if elems.len() < 2 {
        return Err(Error::Precondition(
            "Q is trivial: choosing k1 needs a nontrivial finite Q (try --gens a)".into(),
        ));
    }
    let k1 = choose_k1(p, &elems)?;
    let mut stages: Vec<StageRecord> = Vec::new();
    let mut search = RistSearch::new(p, budgets.search, budgets.identity_nodes);
    let mut prev: Option<(usize, Vertex)> = None;
    for (i, spec) in avoid.iter().enumerate() {
        let stage = i + 1;
        let fail = |reason: String| Error::StageFailure { stage, reason };
        let k = match &prev {
            None => k1,
            Some((pk, pu)) => next_level(p, &elems, *pk, pu).map_err(|e| fail(e.to_string()))?,
        };
        if k > verification_level {
            return Err(fail(format!("stage level {k} exceeds verification level {verification_level}")));
        }
        let ql = QLevel::new(p, &elems, k)?;
        let allowed_u: Vec<Vertex> = match &prev {
            None => level_vertices(p.degree(), k)?,
            Some((_, pu)) => {
                let roots = QLevel::new(p, &elems, pu.level())?.orbit(pu);
                level_vertices(p.degree(), k)?
                    .into_iter()
                    .filter(|w| below_any(w, &roots))
                    .collect()
            }
        };
        let mut chosen: Option<(Vertex, Word, Vertex)> = None;
        let mut rist_found = false;
        for v in level_vertices(p.degree(), k)? {
            let qv = ql.orbit(&v);
            let Some(u) = allowed_u.iter().find(|x| qv.binary_search(x).is_err()).cloned() else {
                continue;
            };
            search.refill(budgets.search);
            let mut hit: Option<Word> = None;
            let mut seen = 0usize;
            search.stream(&v, |w| {
                seen += 1;
                if !spec.handle.image_contains(w)? {
                    hit = Some(w.clone());
                    return Ok(false);
                }
                Ok(seen < STREAM_PER_VERTEX)
            })?;
            rist_found |= seen > 0;
            if let Some(w) = hit {
                chosen = Some((v, w, u));
                break;
            }
        }
        let Some((v, w, u)) = chosen else {
            let reason = if rist_found {
                format!("no rigid element escaping {} within budget", spec.label)
            } else {
                "no rigid stabilizer element found within budget".to_string()
            };
            return Err(fail(reason));
        };
        stages.push(StageRecord {
            k,
            v,
            w: p.format_word(&w),
            u: u.clone(),
        });
        prev = Some((k, u));
    }
    Ok(WmCertificate {
        format: CERTIFICATE_FORMAT.to_string(),
        preset: p.def().clone(),
        fingerprint: p.fingerprint().to_string(),
        q: q.iter().map(|w| p.format_word(w)).collect(),
        k1,
        avoid: avoid.iter().map(|a| a.entry(p)).collect(),
        stages,
        verification_level,
        budgets: *budgets,
        seed,
    })
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageCheck {
    pub stage: usize,
    /// `w_j` is a nontrivial element of `Rist_G(v_j)`.
    pub rigid: bool,
    /// Clause (1): the level image of `w_j` lies outside that of `W_j`.
    pub avoids: bool,
    /// Clause (2): normal closure of `w_1..w_j` equals `H_j ∩ Stab_G(k_1)`,
    /// verified in the quotient at `clause2_level`.
    pub normal_closure: bool,
    pub clause2_level: usize,
    /// Clause (3), nesting: `u_j ≤ Q(u_{j-1})`, `u_j ∉ Q(v_j)`.
    pub nesting: bool,
    /// Clause (3), fixing: every `q w_l q^{-1}` fixes all vertices below
    /// every `q'(u_j)` down to the verification level.
    pub fixing: bool,
}

impl StageCheck {
    pub fn pass(&self) -> bool {
        self.rigid && self.avoids && self.normal_closure && self.nesting && self.fixing
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CertificateReport {
    pub fingerprint: bool,
    /// `Q` is finite, `Q ∩ Stab_G(k_1) = 1`, and `Q` is intransitive on `L_{k_1}`.
    pub k1: bool,
    /// Formats, vertex levels, increasing `k_j`, one avoid entry per stage.
    pub structure: bool,
    pub stages: Vec<StageCheck>,
    pub verification_level: usize,
    pub problems: Vec<String>,
}

impl CertificateReport {
    pub fn pass(&self) -> bool {
        self.fingerprint && self.k1 && self.structure && self.stages.iter().all(StageCheck::pass)
    }
}

struct Parsed {
    q: Vec<Word>,
    ws: Vec<Word>,
    avoid: Vec<SubgroupHandle>,
}

fn parse_parts(p: &Preset, c: &WmCertificate) -> Result<Parsed> {
    let q = c.q.iter().map(|s| p.parse_word(s)).collect::<Result<Vec<_>>>()?;
    let ws = c.stages.iter().map(|s| p.parse_word(&s.w)).collect::<Result<Vec<_>>>()?;
    let mut avoid = Vec::new();
    for a in &c.avoid {
        let gens = a.generators.iter().map(|s| p.parse_word(s)).collect::<Result<Vec<_>>>()?;
        avoid.push(SubgroupHandle::with_membership_level(p, gens, a.level)?);
    }
    Ok(Parsed { q, ws, avoid })
}

/// Images on `L_{k1} ⊔ L_n`, level-`k1` points first.
struct Combined {
    k1: LevelAction,
    n: LevelAction,
}

impl Combined {
    fn image(&self, w: &Word) -> Perm {
        let a = self.k1.image(w);
        let b = self.n.image(w);
        let off = a.degree() as u32;
        let mut im: Vec<u32> = a.images().to_vec();
        im.extend(b.images().iter().map(|x| x + off));
        Perm::from_images(im).expect("disjoint union of permutations")
    }

    fn points(&self) -> usize {
        self.k1.points() + self.n.points()
    }
}

/// Replays every clause of a certificate from scratch. Only malformed
/// input is an error; failed checks are reported.
pub fn validate_certificate(c: &WmCertificate) -> Result<CertificateReport> {
    let mut rep = CertificateReport {
        verification_level: c.verification_level,
        ..Default::default()
    };
    let p = Preset::from_def(c.preset.clone())?;
    rep.fingerprint = p.fingerprint() == c.fingerprint;
    if !rep.fingerprint {
        rep.problems.push("preset fingerprint mismatch".into());
    }
    let parts = match parse_parts(&p, c) {
        Ok(x) => x,
        Err(e) => {
            rep.problems.push(format!("unreadable certificate data: {e}"));
            return Ok(rep);
        }
    };
    let budgets = c.budgets;
    let n = c.verification_level;

    let mut structure = c.format == CERTIFICATE_FORMAT;
    if !structure {
        rep.problems.push(format!("unknown format {:?}", c.format));
    }
    if c.stages.len() > c.avoid.len() {
        structure = false;
        rep.problems.push("more stages than avoid-list entries".into());
    }
    for (j, s) in c.stages.iter().enumerate() {
        if s.v.level() != s.k || s.u.level() != s.k || s.k > n {
            structure = false;
            rep.problems.push(format!("stage {}: vertex levels disagree with k = {}", j + 1, s.k));
        }
        if j == 0 && s.k != c.k1 {
            structure = false;
            rep.problems.push("first stage is not at level k1".into());
        }
        if j > 0 && s.k <= c.stages[j - 1].k {
            structure = false;
            rep.problems.push(format!("stage {}: levels do not increase", j + 1));
        }
    }
    rep.structure = structure;

    let elems = match finite_closure(&p, &parts.q, 4, MAX_Q_ELEMENTS, budgets.identity_nodes)? {
        Some(e) => e,
        None => {
            rep.problems.push("Q not certified finite".into());
            return Ok(rep);
        }
    };
    let ql1 = QLevel::new(&p, &elems, c.k1)?;
    let faithful = ql1.images.iter().filter(|x| x.is_identity()).count() == 1;
    let intransitive = orbits(ql1.images[0].degree(), &ql1.images).len() > 1;
    rep.k1 = elems.len() > 1 && faithful && intransitive;
    if !rep.k1 {
        rep.problems.push(format!("k1 = {} violates Q ∩ Stab(k1) = 1 or intransitivity", c.k1));
    }
    if !structure || n < c.k1 {
        return Ok(rep);
    }

    let comb = Combined {
        k1: LevelAction::new(&p, c.k1)?,
        n: LevelAction::new(&p, n)?,
    };
    let prefix: Vec<usize> = (0..comb.k1.points()).collect();
    let q_imgs: Vec<Perm> = parts.q.iter().map(|w| comb.image(w)).collect();

    for (j, s) in c.stages.iter().enumerate() {
        let w = &parts.ws[j];
        let mut chk = StageCheck {
            stage: j + 1,
            clause2_level: n,
            ..Default::default()
        };
        chk.rigid = !p.is_identity(w, budgets.identity_nodes)? && in_rigid_stabilizer(&p, w, &s.v, budgets.identity_nodes)?;
        chk.avoids = !parts.avoid[j].image_contains(w)?;

        let w_imgs: Vec<Perm> = parts.ws[..=j].iter().map(|x| comb.image(x)).collect();
        let mut h_imgs = q_imgs.clone();
        h_imgs.extend(w_imgs.iter().cloned());
        let chain = StabChain::with_base(comb.points(), &h_imgs, &prefix);
        let (_, nc) = normal_closure(comb.points(), &h_imgs, &w_imgs);
        chk.normal_closure = nc.order() == chain.stabilizer_order(prefix.len());

        let qk = QLevel::new(&p, &elems, s.k)?;
        let mut nesting = qk.orbit(&s.v).binary_search(&s.u).is_err();
        if j > 0 {
            let pu = &c.stages[j - 1].u;
            let roots = QLevel::new(&p, &elems, pu.level())?.orbit(pu);
            nesting &= below_any(&s.u, &roots);
        }
        chk.nesting = nesting;

        let roots = qk.orbit(&s.u);
        let mut fixing = true;
        'outer: for wl in &parts.ws[..=j] {
            for qe in &elems {
                let x = p.conj(qe, wl);
                for r in &roots {
                    if &p.apply_to_vertex(&x, r) != r || !p.portrait(&p.section_at(&x, r), n - s.k).is_trivial() {
                        fixing = false;
                        break 'outer;
                    }
                }
            }
        }
        chk.fixing = fixing;
        if !chk.pass() {
            rep.problems.push(format!("stage {} failed: {:?}", j + 1, chk));
        }
        rep.stages.push(chk);
    }
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::preset::grigorchuk_preset;

    #[test]
    fn trivial_q_rejected() {
        let g = grigorchuk_preset();
        let r = build_certificate(&g, &[], &[], 6, &Budgets::default(), 0);
        assert!(matches!(r, Err(Error::Precondition(_))));
    }

    #[test]
    fn empty_avoid_list_gives_empty_certificate() {
        let g = grigorchuk_preset();
        let a = g.parse_word("a").unwrap();
        let c = build_certificate(&g, &[a], &[], 6, &Budgets::default(), 0).unwrap();
        assert!(c.stages.is_empty());
        assert_eq!(c.k1, 2);
        assert!(validate_certificate(&c).unwrap().pass());
    }

    #[test]
    fn avoid_syntax() {
        let g = grigorchuk_preset();
        let a = AvoidSpec::parse(&g, "parabolic:01@5").unwrap();
        assert_eq!(a.handle.membership_level(), Some(5));
        let b = AvoidSpec::parse(&g, "gens:b;c@3").unwrap();
        assert_eq!(b.handle.generators().len(), 2);
        assert!(AvoidSpec::parse(&g, "parabolic:01").is_err());
        assert!(AvoidSpec::parse(&g, "other:1@2").is_err());
    }
}
