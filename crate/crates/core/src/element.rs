//! Action, sections, the word problem, portraits and element orders.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::One;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::perm::Perm;
use crate::preset::Preset;
use crate::tree::Vertex;
use crate::word::{Syllable, Word};

const MAX_ORDER_DEPTH: usize = 2_000;

/// Result of [`Preset::element_order`].
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum ElementOrder {
    Finite(BigUint),
    /// Proven infinite: some section recurs as a section of a proper power
    /// of itself.
    Infinite,
}

impl fmt::Display for ElementOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ElementOrder::Finite(n) => write!(f, "{n}"),
            ElementOrder::Infinite => write!(f, "infinite"),
        }
    }
}

impl Preset {
    /// Root permutation and the `d` first-level sections of `w`.
    pub fn sections1(&self, w: &Word) -> (Vec<u8>, Vec<Word>) {
        let d = self.degree();
        let recs: Vec<_> = w.syllables().iter().map(|&s| self.syllable_rec(s)).collect();
        let mut perm = vec![0u8; d];
        let mut secs = Vec::with_capacity(d);
        let mut parts: Vec<&Word> = Vec::with_capacity(recs.len());
        for c in 0..d {
            parts.clear();
            let mut pos = c;
            for rec in recs.iter().rev() {
                parts.push(&rec.sections[pos]);
                pos = rec.perm[pos] as usize;
            }
            perm[c] = pos as u8;
            secs.push(self.reduce_iter(parts.iter().rev().flat_map(|p| p.syllables().iter().copied())));
        }
        (perm, secs)
    }

    /// Image of child `c` and the section of `w` there.
    pub fn section_child(&self, w: &Word, c: u8) -> (u8, Word) {
        let mut parts: Vec<Syllable> = Vec::new();
        let mut chunks: Vec<std::sync::Arc<crate::preset::SylRec>> = Vec::new();
        let mut pos = c as usize;
        let mut offsets = Vec::with_capacity(w.syllable_len());
        for &s in w.syllables().iter().rev() {
            let rec = self.syllable_rec(s);
            offsets.push(pos);
            pos = rec.perm[pos] as usize;
            chunks.push(rec);
        }
        for (rec, &p) in chunks.iter().zip(&offsets).rev() {
            parts.extend_from_slice(rec.sections[p].syllables());
        }
        (pos as u8, self.reduce_iter(parts))
    }

    pub fn root_perm(&self, w: &Word) -> Perm {
        let (p, _) = self.sections1(w);
        Perm::from_images_unchecked(p.into_iter().map(u32::from).collect())
    }

    /// Section `w_v`, following `(gh)_v = g_{h(v)} h_v`.
    pub fn section_at(&self, w: &Word, v: &Vertex) -> Word {
        let mut cur = w.clone();
        for &x in v.letters() {
            if cur.is_empty() {
                break;
            }
            cur = self.section_child(&cur, x).1;
        }
        cur
    }

    /// Image of `v` under `w`, computed letter by letter straight from the
    /// generator recursions (independently of the section machinery).
    pub fn apply_to_vertex(&self, w: &Word, v: &Vertex) -> Vertex {
        let mut letters = v.letters().to_vec();
        self.apply_word_in_place(w, &mut letters);
        Vertex::new(letters, self.degree()).expect("action preserves the alphabet")
    }

    fn apply_word_in_place(&self, w: &Word, v: &mut [u8]) {
        for s in w.syllables().iter().rev() {
            for _ in 0..s.exp.unsigned_abs() {
                self.apply_letter(s.gen as usize, s.exp > 0, v);
            }
        }
    }

    fn apply_letter(&self, g: usize, forward: bool, v: &mut [u8]) {
        let Some((head, tail)) = v.split_first_mut() else {
            return;
        };
        let sigma = self.generator_root_perm(g);
        if forward {
            let c = *head as usize;
            *head = sigma[c];
            self.apply_word_in_place(&self.generator_sections(g)[c], tail);
        } else {
            let c = sigma.iter().position(|&x| x == *head).expect("root perm is bijective");
            *head = c as u8;
            // (x^{-1})_{x(c)} = (x_c)^{-1}: undo the section letters left to right
            for s in self.generator_sections(g)[c].syllables() {
                for _ in 0..s.exp.unsigned_abs() {
                    self.apply_letter(s.gen as usize, s.exp < 0, tail);
                }
            }
        }
    }

    /// Decides whether `w` acts trivially on the whole tree.
    ///
    /// Recursion runs over sections with a shared visited set; a word met
    /// again while its subtree is still open imposes no new constraint, so
    /// a completed search proves every visited word trivial. On presets not
    /// marked contracting, `budget` bounds the number of expanded words.
    pub fn is_identity(&self, w: &Word, budget: u64) -> Result<bool> {
        if w.is_empty() {
            return Ok(true);
        }
        if let Some(b) = self.identity_cache_get(w) {
            return Ok(b);
        }
        let mut visited: HashSet<Word> = HashSet::new();
        visited.insert(w.clone());
        let mut stack = vec![w.clone()];
        let mut nodes = 0u64;
        while let Some(u) = stack.pop() {
            nodes += 1;
            if !self.is_contracting() && nodes > budget {
                return Err(Error::Undecided { budget });
            }
            let (perm, secs) = self.sections1(&u);
            if perm.iter().enumerate().any(|(i, &x)| i != x as usize) {
                self.identity_cache_put([w, &u], false);
                return Ok(false);
            }
            for s in secs {
                if s.is_empty() || visited.contains(&s) {
                    continue;
                }
                match self.identity_cache_get(&s) {
                    Some(true) => continue,
                    Some(false) => {
                        self.identity_cache_put([w], false);
                        return Ok(false);
                    }
                    None => {}
                }
                visited.insert(s.clone());
                stack.push(s);
            }
        }
        self.identity_cache_put(visited.iter(), true);
        Ok(true)
    }

    /// `is_identity(a b^{-1})`.
    pub fn equal(&self, a: &Word, b: &Word, budget: u64) -> Result<bool> {
        self.is_identity(&self.mul(a, &self.inv(b)), budget)
    }

    pub fn portrait(&self, w: &Word, depth: usize) -> Portrait {
        let d = self.degree();
        let mut decorations = Vec::with_capacity(depth);
        let mut layer = vec![w.clone()];
        let mut memo: HashMap<Word, (Vec<u8>, Vec<Word>)> = HashMap::new();
        for lvl in 0..depth {
            let mut perms = Vec::with_capacity(layer.len());
            let mut next = Vec::with_capacity(if lvl + 1 < depth { layer.len() * d } else { 0 });
            for u in &layer {
                if u.is_empty() {
                    perms.push((0..d as u8).collect::<Vec<_>>());
                    if lvl + 1 < depth {
                        next.extend(std::iter::repeat_n(Word::identity(), d));
                    }
                    continue;
                }
                let (p, s) = memo.entry(u.clone()).or_insert_with(|| self.sections1(u));
                perms.push(p.clone());
                if lvl + 1 < depth {
                    next.extend(s.iter().cloned());
                }
            }
            decorations.push(perms);
            layer = next;
        }
        Portrait {
            degree: d,
            depth,
            decorations,
        }
    }

    /// Least `m ≥ 1` with `w^m = 1`.
    ///
    /// With `r` the order of the root permutation, `w^r` fixes the first
    /// level and the order is `r · lcm` of the orders of its sections, one per
    /// cycle of the root permutation. A section recurring on the current
    /// path after a product of root orders `> 1` proves infinite order.
    pub fn element_order(&self, w: &Word, budget: u64) -> Result<ElementOrder> {
        let mut st = OrderState {
            memo: HashMap::new(),
            path: HashMap::new(),
            path_r: Vec::new(),
            nodes: 0,
            budget,
        };
        match self.order_rec(w, &mut st)? {
            OrderStep::Finite(n, _) => Ok(ElementOrder::Finite(n)),
            OrderStep::Infinite => Ok(ElementOrder::Infinite),
        }
    }

    fn order_rec(&self, w: &Word, st: &mut OrderState) -> Result<OrderStep> {
        if w.is_empty() {
            return Ok(OrderStep::Finite(BigUint::one(), usize::MAX));
        }
        if let Some(n) = st.memo.get(w) {
            return Ok(OrderStep::Finite(n.clone(), usize::MAX));
        }
        if let Some(&idx) = st.path.get(w) {
            let r: u64 = st.path_r[idx..].iter().product();
            return Ok(if r == 1 {
                OrderStep::Finite(BigUint::one(), idx)
            } else {
                OrderStep::Infinite
            });
        }
        st.nodes += 1;
        if st.nodes > st.budget || st.path_r.len() >= MAX_ORDER_DEPTH {
            return Err(Error::Undecided { budget: st.budget });
        }
        let root = self.root_perm(w);
        let r = root.order();
        let r64: u64 = r.iter_u64_digits().next().unwrap_or(1);
        let wr = self.pow(w, r64 as i64);
        let (_, secs) = self.sections1(&wr);
        let depth = st.path_r.len();
        st.path.insert(w.clone(), depth);
        st.path_r.push(r64);
        let mut acc = BigUint::one();
        let mut low = usize::MAX;
        let mut outcome = None;
        for cyc in cycle_representatives(&root) {
            match self.order_rec(&secs[cyc], st) {
                Ok(OrderStep::Finite(n, l)) => {
                    acc = acc.lcm(&n);
                    low = low.min(l);
                }
                Ok(OrderStep::Infinite) => {
                    outcome = Some(Ok(OrderStep::Infinite));
                    break;
                }
                Err(e) => {
                    outcome = Some(Err(e));
                    break;
                }
            }
        }
        st.path.remove(w);
        st.path_r.pop();
        if let Some(o) = outcome {
            return o;
        }
        let n = r * acc;
        // values depending on an open ancestor are provisional
        if low >= depth {
            st.memo.insert(w.clone(), n.clone());
            low = usize::MAX;
        }
        Ok(OrderStep::Finite(n, low))
    }
}

struct OrderState {
    memo: HashMap<Word, BigUint>,
    path: HashMap<Word, usize>,
    path_r: Vec<u64>,
    nodes: u64,
    budget: u64,
}

enum OrderStep {
    /// Order and the shallowest open path index it depends on.
    Finite(BigUint, usize),
    Infinite,
}

fn cycle_representatives(p: &Perm) -> Vec<usize> {
    let n = p.degree();
    let mut seen = vec![false; n];
    let mut reps = Vec::new();
    for i in 0..n {
        if seen[i] {
            continue;
        }
        reps.push(i);
        let mut j = i;
        while !seen[j] {
            seen[j] = true;
            j = p.apply(j);
        }
    }
    reps
}

/// Root permutations of all sections at levels `< depth`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Portrait {
    degree: usize,
    depth: usize,
    /// `decorations[k][rank(v)]` for `v` of level `k`.
    decorations: Vec<Vec<Vec<u8>>>,
}

impl Portrait {
    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn decoration(&self, v: &Vertex) -> &[u8] {
        &self.decorations[v.level()][v.rank(self.degree)]
    }

    pub fn is_trivial(&self) -> bool {
        self.decorations
            .iter()
            .flatten()
            .all(|p| p.iter().enumerate().all(|(i, &x)| i == x as usize))
    }

    /// Image of a vertex of level `≤ depth`, read off the decorations.
    pub fn apply(&self, v: &Vertex) -> Result<Vertex> {
        if v.level() > self.depth {
            return Err(Error::Precondition(format!(
                "vertex of level {} beyond portrait depth {}",
                v.level(),
                self.depth
            )));
        }
        let mut out = Vec::with_capacity(v.level());
        for k in 0..v.level() {
            let pre = v.prefix(k);
            out.push(self.decoration(&pre)[v.letters()[k] as usize]);
        }
        Vertex::new(out, self.degree)
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(PortraitJson::from(self)).expect("portraits serialize")
    }
}

#[derive(Serialize, Deserialize)]
struct PortraitJson {
    depth: usize,
    decorations: BTreeMap<String, Vec<u8>>,
}

impl From<&Portrait> for PortraitJson {
    fn from(p: &Portrait) -> Self {
        let mut decorations = BTreeMap::new();
        for (k, layer) in p.decorations.iter().enumerate() {
            for (i, perm) in layer.iter().enumerate() {
                decorations.insert(Vertex::from_rank(i, k, p.degree).to_string(), perm.clone());
            }
        }
        PortraitJson {
            depth: p.depth,
            decorations,
        }
    }
}

impl Serialize for Portrait {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        PortraitJson::from(self).serialize(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::preset::{grigorchuk_preset, gupta_sidki_preset};

    fn v(s: &str) -> Vertex {
        s.parse().unwrap()
    }

    #[test]
    fn generator_action() {
        let g = grigorchuk_preset();
        let w = |s: &str| g.parse_word(s).unwrap();
        assert_eq!(g.apply_to_vertex(&w("a"), &v("0")), v("1"));
        assert_eq!(g.apply_to_vertex(&w("d"), &v("01")), v("01"));
        assert_eq!(g.apply_to_vertex(&w("1"), &v("0110")), v("0110"));
        assert_eq!(g.apply_to_vertex(&w("b"), &v("00")), v("01"));
        assert_eq!(g.apply_to_vertex(&w("b"), &v("10")), v("10"));
    }

    #[test]
    fn section_examples() {
        let g = grigorchuk_preset();
        let w = |s: &str| g.parse_word(s).unwrap();
        assert_eq!(g.section_at(&w("b"), &v("1")), w("c"));
        assert_eq!(g.section_at(&w("c"), &v("1")), w("d"));
        assert_eq!(g.section_at(&w("a b a b"), &v("0")), w("c a"));
        assert_eq!(g.section_at(&w("a b a b"), &v("1")), w("a c"));
    }

    #[test]
    fn identity_examples() {
        let g = grigorchuk_preset();
        let w = |s: &str| g.parse_word(s).unwrap();
        assert!(g.is_identity(&w("a a"), 0).unwrap());
        assert!(g.is_identity(&w("b c d^-1"), 0).unwrap());
        assert!(!g.is_identity(&g.pow(&w("a b"), 8), 0).unwrap());
        assert!(g.is_identity(&g.pow(&w("a b"), 16), 0).unwrap());
        // the relation (ad)^4 is not in the rewriting table
        assert!(g.is_identity(&g.pow(&w("a d"), 4), 0).unwrap());
    }

    #[test]
    fn portrait_examples() {
        let g = grigorchuk_preset();
        let w = |s: &str| g.parse_word(s).unwrap();
        assert!(g.portrait(&Word::identity(), 3).is_trivial());
        let pb = g.portrait(&w("b"), 1);
        assert_eq!(pb.decoration(&Vertex::root()), &[0, 1]);
        let pa = g.portrait(&w("a"), 2);
        assert_eq!(pa.decoration(&Vertex::root()), &[1, 0]);
        assert_eq!(pa.decoration(&v("0")), &[0, 1]);
        assert_eq!(pa.decoration(&v("1")), &[0, 1]);
        let json = pa.to_json();
        assert_eq!(json["depth"], 2);
        assert_eq!(json["decorations"][""], serde_json::json!([1, 0]));
    }

    #[test]
    fn order_examples() {
        let g = grigorchuk_preset();
        let w = |s: &str| g.parse_word(s).unwrap();
        let fin = |n: u32| ElementOrder::Finite(BigUint::from(n));
        for s in ["a", "b", "c", "d"] {
            assert_eq!(g.element_order(&w(s), 10_000).unwrap(), fin(2));
        }
        assert_eq!(g.element_order(&w("a b"), 10_000).unwrap(), fin(16));
        assert_eq!(g.element_order(&w("a c"), 10_000).unwrap(), fin(8));
        assert_eq!(g.element_order(&w("a d"), 10_000).unwrap(), fin(4));
        assert_eq!(g.element_order(&Word::identity(), 1).unwrap(), fin(1));

        let gs = gupta_sidki_preset();
        assert_eq!(gs.element_order(&gs.parse_word("b").unwrap(), 10_000).unwrap(), fin(3));
    }

    #[test]
    fn infinite_order_detected() {
        // the adding machine t = (1, t)σ
        let def = crate::preset::PresetDef {
            name: "adding-machine".into(),
            degree: 2,
            generators: vec![crate::preset::GeneratorDef {
                name: "t".into(),
                root_perm: vec![1, 0],
                sections: vec!["1".into(), "t".into()],
            }],
            rules: vec![],
            branching: vec![],
            contracting: true,
        };
        let p = Preset::from_def(def).unwrap();
        let t = p.parse_word("t").unwrap();
        assert_eq!(p.element_order(&t, 1_000).unwrap(), ElementOrder::Infinite);
        assert!(!p.is_identity(&p.pow(&t, 64), 0).unwrap());
    }
}
