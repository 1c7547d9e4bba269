//! Producing elements of rigid stabilizers `Rist_G(v)`.
//!
//! At a first-level vertex `c`, candidates are products of one or two
//! conjugates of the branching generators. Deeper down, for `v = c·v'`, a
//! rigid element `X` at `c` is commuted with `F_c(r')`, where `r'` is rigid
//! at `v'` and `F_c` lifts a word to one fixing `c` with that word as its
//! `c`-section: the commutator is trivial off `T_c`, and inside `T_c` it is
//! `[X_c^m, r']`, which is rigid at `v'` once `X_c^m` fixes `v'`. Before
//! that, small powers of `F_c(r')` itself are tried.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::preset::Preset;
use crate::search::ShortlexWords;
use crate::subgroup::in_rigid_stabilizer;
use crate::tree::Vertex;
use crate::word::Word;

const CONJUGATOR_DEPTH: usize = 3;
const MAX_POWER: i64 = 256;
const MAX_LIFT_POWER: i64 = 8;

/// Search state shared across vertices: lift tables and first-level pools.
pub struct RistSearch<'a> {
    p: &'a Preset,
    /// Candidate tests left.
    budget: u64,
    identity_budget: u64,
    lifts: HashMap<u8, Vec<Word>>,
    first_level: HashMap<u8, Vec<Word>>,
    found: HashMap<Vertex, Word>,
}

impl<'a> RistSearch<'a> {
    pub fn new(p: &'a Preset, budget: u64, identity_budget: u64) -> Self {
        RistSearch {
            p,
            budget,
            identity_budget,
            lifts: HashMap::new(),
            first_level: HashMap::new(),
            found: HashMap::new(),
        }
    }

    pub fn remaining(&self) -> u64 {
        self.budget
    }

    /// Resets the candidate budget; caches are kept.
    pub fn refill(&mut self, budget: u64) {
        self.budget = budget;
    }

    fn spend(&mut self) -> bool {
        if self.budget == 0 {
            return false;
        }
        self.budget -= 1;
        true
    }

    fn is_rigid_nontrivial(&self, w: &Word, v: &Vertex) -> Result<bool> {
        if w.is_empty() || !in_rigid_stabilizer(self.p, w, v, self.identity_budget)? {
            return Ok(false);
        }
        Ok(!self.p.is_identity(w, self.identity_budget)?)
    }

    /// For each generator `x`, the shortlex-least word fixing `c` whose
    /// `c`-section equals `x`.
    pub fn lift_table(&mut self, c: u8) -> Result<Vec<Word>> {
        if let Some(t) = self.lifts.get(&c) {
            return Ok(t.clone());
        }
        let p = self.p;
        let mut table: Vec<Option<Word>> = vec![None; p.num_generators()];
        for u in ShortlexWords::new(p, usize::MAX) {
            if table.iter().all(Option::is_some) {
                break;
            }
            if !self.spend() {
                return Err(Error::Undecided { budget: 0 });
            }
            let (img, sec) = p.section_child(&u, c);
            if img != c {
                continue;
            }
            for (g, slot) in table.iter_mut().enumerate() {
                if slot.is_none() && p.equal(&sec, &Word::gen(g), self.identity_budget)? {
                    *slot = Some(u.clone());
                }
            }
        }
        let table: Vec<Word> = table.into_iter().map(|w| w.expect("filled above")).collect();
        self.lifts.insert(c, table.clone());
        Ok(table)
    }

    /// `F_c(w)`: fixes `c`, with `c`-section `w`.
    pub fn lift(&mut self, c: u8, w: &Word) -> Result<Word> {
        let table = self.lift_table(c)?;
        let parts: Vec<Word> = w
            .syllables()
            .iter()
            .map(|s| self.p.pow(&table[s.gen as usize], s.exp as i64))
            .collect();
        Ok(self.p.product(parts.iter()))
    }

    /// Lift along a whole vertex: fixes `v`, with `v`-section `w`.
    pub fn lift_to(&mut self, v: &Vertex, w: &Word) -> Result<Word> {
        let mut cur = w.clone();
        for &c in v.letters().iter().rev() {
            cur = self.lift(c, &cur)?;
        }
        Ok(cur)
    }

    fn first_level_pool(&self) -> Vec<Word> {
        let p = self.p;
        let mut pool: Vec<Word> = Vec::new();
        for g in ShortlexWords::new(p, CONJUGATOR_DEPTH) {
            for s in p.branching_generators() {
                for e in [s.clone(), p.inv(s)] {
                    let x = p.conj(&g, &e);
                    if !x.is_empty() && !pool.contains(&x) {
                        pool.push(x);
                    }
                }
            }
        }
        pool
    }

    /// Rigid elements at the first-level vertex `c`, in search order, up to
    /// `want` of them.
    fn first_level(&mut self, c: u8, want: usize) -> Result<Vec<Word>> {
        if let Some(f) = self.first_level.get(&c) {
            if f.len() >= want {
                return Ok(f[..want].to_vec());
            }
        }
        let v = Vertex::root().child(c);
        let pool = self.first_level_pool();
        let mut out: Vec<Word> = Vec::new();
        'search: for arity in 1..=2 {
            let n = pool.len();
            let count = if arity == 1 { n } else { n * n };
            for idx in 0..count {
                if !self.spend() {
                    break 'search;
                }
                let w = if arity == 1 {
                    pool[idx].clone()
                } else {
                    self.p.mul(&pool[idx / n], &pool[idx % n])
                };
                if !out.contains(&w) && self.is_rigid_nontrivial(&w, &v)? {
                    out.push(w);
                    if out.len() >= want {
                        break 'search;
                    }
                }
            }
        }
        self.first_level.insert(c, out.clone());
        Ok(out)
    }

    /// A nontrivial element of `Rist_G(v)`, or `None` once the budget runs out.
    pub fn find(&mut self, v: &Vertex) -> Result<Option<Word>> {
        if v.is_root() {
            return Err(Error::Precondition("the root has no proper rigid stabilizer search".into()));
        }
        if let Some(w) = self.found.get(v) {
            return Ok(Some(w.clone()));
        }
        let c = v.letters()[0];
        let res = if v.level() == 1 {
            self.first_level(c, 1)?.into_iter().next()
        } else {
            self.find_deep(v)?
        };
        if let Some(w) = &res {
            self.found.insert(v.clone(), w.clone());
        }
        Ok(res)
    }

    fn find_deep(&mut self, v: &Vertex) -> Result<Option<Word>> {
        let p = self.p;
        let c = v.letters()[0];
        let rest = Vertex::new(v.letters()[1..].to_vec(), p.degree())?;
        let Some(r) = self.find(&rest)? else {
            return Ok(None);
        };
        let xs = self.first_level(c, 4)?;
        if xs.is_empty() {
            return Ok(None);
        }
        let lifted_r = match self.lift(c, &r) {
            Ok(w) => w,
            Err(Error::Undecided { .. }) => return Ok(None),
            Err(e) => return Err(e),
        };
        // A lift often works on its own (its other sections can cancel in a
        // power), and keeps the section at `v` shallow.
        for m in 1..=MAX_LIFT_POWER {
            if !self.spend() {
                return Ok(None);
            }
            let cand = p.pow(&lifted_r, m);
            if self.is_rigid_nontrivial(&cand, v)? {
                return Ok(Some(cand));
            }
        }
        let conjugators: Vec<Word> = ShortlexWords::new(p, CONJUGATOR_DEPTH).collect();
        for x in &xs {
            let xc = p.section_child(x, c).1;
            for g in &conjugators {
                if !self.spend() {
                    return Ok(None);
                }
                let z = p.conj(g, &xc);
                let Some(m) = (1..=MAX_POWER).find(|&m| p.apply_to_vertex(&p.pow(&z, m), &rest) == rest) else {
                    continue;
                };
                let y = match self.lift(c, g) {
                    Ok(fg) => p.conj(&fg, x),
                    Err(Error::Undecided { .. }) => return Ok(None),
                    Err(e) => return Err(e),
                };
                let cand = p.comm(&p.pow(&y, m), &lifted_r);
                if self.is_rigid_nontrivial(&cand, v)? {
                    return Ok(Some(cand));
                }
            }
        }
        Ok(None)
    }

    /// Distinct rigid elements at `v`: the base element followed by its
    /// conjugates by lifts `F_v(g)` of shortlex words `g`. The caller stops
    /// the stream by returning `false`.
    pub fn stream(&mut self, v: &Vertex, mut visit: impl FnMut(&Word) -> Result<bool>) -> Result<bool> {
        let p = self.p;
        let Some(r) = self.find(v)? else {
            return Ok(false);
        };
        let mut seen: Vec<Word> = Vec::new();
        for g in ShortlexWords::new(p, usize::MAX) {
            if !self.spend() {
                return Ok(false);
            }
            let fg = match self.lift_to(v, &g) {
                Ok(w) => w,
                Err(Error::Undecided { .. }) => return Ok(false),
                Err(e) => return Err(e),
            };
            let w = p.conj(&fg, &r);
            if seen.contains(&w) {
                continue;
            }
            seen.push(w.clone());
            if !visit(&w)? {
                return Ok(true);
            }
        }
        Ok(false)
    }
}

/// A nontrivial element of `Rist_G(v)` within `budget` candidate tests.
pub fn rist_element_search(p: &Preset, v: &Vertex, budget: u64, identity_budget: u64) -> Result<Option<Word>> {
    RistSearch::new(p, budget, identity_budget).find(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::preset::{grigorchuk_preset, gupta_sidki_preset};

    fn v(s: &str) -> Vertex {
        s.parse().unwrap()
    }

    #[test]
    fn grigorchuk_lifts() {
        let g = grigorchuk_preset();
        let mut s = RistSearch::new(&g, 10_000, 100_000);
        let names = |t: Vec<Word>| t.iter().map(|w| g.format_word(w)).collect::<Vec<_>>();
        assert_eq!(names(s.lift_table(0).unwrap()), ["b", "a d a", "a b a", "a c a"]);
        assert_eq!(names(s.lift_table(1).unwrap()), ["a b a", "d", "b", "c"]);
    }

    #[test]
    fn finds_rigid_elements() {
        let g = grigorchuk_preset();
        for s in ["0", "1", "11", "010", "1000"] {
            let w = rist_element_search(&g, &v(s), 20_000, 1_000_000).unwrap().unwrap();
            assert!(in_rigid_stabilizer(&g, &w, &v(s), 0).unwrap(), "{s}");
            assert!(!g.is_identity(&w, 0).unwrap());
        }
        let gs = gupta_sidki_preset();
        for s in ["0", "2", "12"] {
            let w = rist_element_search(&gs, &v(s), 20_000, 1_000_000).unwrap().unwrap();
            assert!(in_rigid_stabilizer(&gs, &w, &v(s), 0).unwrap(), "{s}");
        }
    }

    #[test]
    fn zero_budget_finds_nothing() {
        let g = grigorchuk_preset();
        assert_eq!(rist_element_search(&g, &v("0"), 0, 1000).unwrap(), None);
    }
}
