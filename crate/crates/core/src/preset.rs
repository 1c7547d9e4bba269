//! Self-similar group presets: wreath recursions, rewriting rules and
//! branching data, plus the shipped Grigorchuk and GGS families.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, RwLock};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::word::{format_word, tokenize, Syllable, Word};

/// Raw generator recursion as written in a group-definition file.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GeneratorDef {
    pub name: String,
    /// Image list of the root permutation on the children `0..d`.
    pub root_perm: Vec<usize>,
    /// Section word at each child, in word syntax.
    pub sections: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RuleDef {
    pub lhs: String,
    pub rhs: String,
}

/// The serializable group-definition document.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PresetDef {
    #[serde(default)]
    pub name: String,
    pub degree: usize,
    pub generators: Vec<GeneratorDef>,
    #[serde(default)]
    pub rules: Vec<RuleDef>,
    #[serde(default)]
    pub branching: Vec<String>,
    #[serde(default)]
    pub contracting: bool,
}

impl PresetDef {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    /// Canonical pretty-printed form; stable across runs.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("preset definitions always serialize")
    }

    /// SHA-256 of the compact canonical JSON, hex encoded.
    pub fn fingerprint(&self) -> String {
        let compact = serde_json::to_string(self).expect("preset definitions always serialize");
        hex::encode(Sha256::digest(compact.as_bytes()))
    }

    fn names(&self) -> Vec<String> {
        self.generators.iter().map(|g| g.name.clone()).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum IssueKind {
    InvalidDegree,
    EmptyName,
    DuplicateName,
    NotAPermutation,
    WrongSectionCount,
    UnknownSymbol,
    ParseError,
    LengthIncreasingRule,
    RuleNotARelation,
}

impl fmt::Display for IssueKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = serde_json::to_value(self).expect("issue kinds serialize");
        write!(f, "{}", s.as_str().unwrap_or("issue"))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Issue {
    pub kind: IssueKind,
    /// Where the problem sits, e.g. `generators[1].sections[0]`.
    pub location: String,
    pub detail: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub issues: Vec<Issue>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.issues.is_empty()
    }

    pub fn has(&self, kind: &IssueKind) -> bool {
        self.issues.iter().any(|i| &i.kind == kind)
    }

    fn push(&mut self, kind: IssueKind, location: impl Into<String>, detail: impl Into<String>) {
        self.issues.push(Issue {
            kind,
            location: location.into(),
            detail: detail.into(),
        });
    }
}

/// Checks every structural invariant of a definition and, when those hold,
/// that each rewriting rule is a relation of the group (within `budget`
/// recursion nodes). Never aborts early.
pub fn validate_preset(def: &PresetDef, budget: u64) -> ValidationReport {
    let mut report = validate_structure(def);
    if !report.is_valid() {
        return report;
    }
    // rules are checked against the bare wreath recursion, so that no rule
    // can vouch for itself during reduction
    let bare = PresetDef {
        rules: Vec::new(),
        contracting: false,
        ..def.clone()
    };
    let p = match Preset::compile(bare) {
        Ok(p) => p,
        Err(e) => {
            report.push(IssueKind::ParseError, "preset", e.to_string());
            return report;
        }
    };
    for (i, r) in def.rules.iter().enumerate() {
        let (Ok(l), Ok(rr)) = (p.parse_word(&r.lhs), p.parse_word(&r.rhs)) else {
            continue;
        };
        let rel = p.mul(&l, &p.inv(&rr));
        if let Ok(false) = p.is_identity(&rel, budget) {
            report.push(
                IssueKind::RuleNotARelation,
                format!("rules[{i}]"),
                format!("{} and {} act differently", r.lhs, r.rhs),
            );
        }
    }
    report
}

fn validate_structure(def: &PresetDef) -> ValidationReport {
    let mut report = ValidationReport::default();
    let d = def.degree;
    if !(2..=10).contains(&d) {
        report.push(
            IssueKind::InvalidDegree,
            "degree",
            format!("degree {d} outside the supported range 2..=10"),
        );
    }
    let names = def.names();
    for (i, g) in def.generators.iter().enumerate() {
        let loc = format!("generators[{i}]");
        if g.name.is_empty() || g.name == "1" || g.name.contains(|c: char| c.is_whitespace() || "^*()·".contains(c)) {
            report.push(IssueKind::EmptyName, format!("{loc}.name"), format!("unusable name {:?}", g.name));
        }
        if names[..i].contains(&g.name) {
            report.push(IssueKind::DuplicateName, format!("{loc}.name"), format!("{:?} declared twice", g.name));
        }
        let mut seen = vec![false; d];
        let bijective = g.root_perm.len() == d
            && g.root_perm.iter().all(|&x| x < d && !std::mem::replace(&mut seen[x], true));
        if !bijective {
            report.push(
                IssueKind::NotAPermutation,
                format!("{loc}.root_perm"),
                format!("{:?} is not a permutation of 0..{d}", g.root_perm),
            );
        }
        if g.sections.len() != d {
            report.push(
                IssueKind::WrongSectionCount,
                format!("{loc}.sections"),
                format!("expected {d} sections, found {}", g.sections.len()),
            );
        }
        for (c, s) in g.sections.iter().enumerate() {
            check_word(&mut report, s, &names, format!("{loc}.sections[{c}]"));
        }
    }
    for (i, r) in def.rules.iter().enumerate() {
        let l = check_word(&mut report, &r.lhs, &names, format!("rules[{i}].lhs"));
        let rr = check_word(&mut report, &r.rhs, &names, format!("rules[{i}].rhs"));
        if let (Some(l), Some(rr)) = (l, rr) {
            if rr > l {
                report.push(
                    IssueKind::LengthIncreasingRule,
                    format!("rules[{i}]"),
                    format!("rhs has {rr} letters, lhs only {l}"),
                );
            }
        }
    }
    for (i, b) in def.branching.iter().enumerate() {
        check_word(&mut report, b, &names, format!("branching[{i}]"));
    }
    report
}

fn check_word(report: &mut ValidationReport, s: &str, names: &[String], loc: String) -> Option<usize> {
    match tokenize(s, names) {
        Ok(toks) => Some(toks.iter().map(|(_, e)| e.unsigned_abs() as usize).sum()),
        Err(Error::UnknownSymbol(sym)) => {
            report.push(IssueKind::UnknownSymbol, loc, format!("undeclared generator {sym:?}"));
            None
        }
        Err(e) => {
            report.push(IssueKind::ParseError, loc, e.to_string());
            None
        }
    }
}

/// Level-1 recursion of a generator power `x^e`.
#[derive(Debug)]
pub(crate) struct SylRec {
    /// Child `c` is sent to `perm[c]`.
    pub perm: Vec<u8>,
    pub sections: Vec<Word>,
}

#[derive(Default)]
struct Caches {
    syllables: RwLock<HashMap<(u16, i32), Arc<SylRec>>>,
    identity: RwLock<HashMap<Word, bool>>,
}

const IDENTITY_CACHE_MAX_SYLLABLES: usize = 512;
const IDENTITY_CACHE_CAP: usize = 1 << 20;
const MAX_REWRITES_PER_LETTER: usize = 64;

/// A validated, compiled preset. Immutable apart from internal memo tables,
/// which only ever store results that are true of the group.
pub struct Preset {
    def: PresetDef,
    names: Vec<String>,
    degree: usize,
    perms: Vec<Vec<u8>>,
    sections: Vec<Vec<Word>>,
    orders: Vec<Option<u32>>,
    rules: Vec<(Vec<Syllable>, Vec<Syllable>)>,
    branching: Vec<Word>,
    fingerprint: String,
    caches: Caches,
}

impl fmt::Debug for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Preset")
            .field("name", &self.def.name)
            .field("degree", &self.degree)
            .field("generators", &self.names)
            .finish()
    }
}

impl Clone for Preset {
    fn clone(&self) -> Self {
        Preset::compile(self.def.clone()).expect("a compiled definition recompiles")
    }
}

impl Preset {
    /// Compiles a definition, rejecting it with the full issue list when any
    /// structural invariant fails.
    pub fn from_def(def: PresetDef) -> Result<Self> {
        let report = validate_structure(&def);
        if !report.is_valid() {
            let msgs: Vec<String> = report
                .issues
                .iter()
                .map(|i| format!("{} at {}: {}", i.kind, i.location, i.detail))
                .collect();
            return Err(Error::InvalidPreset(msgs.join("; ")));
        }
        Self::compile(def)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Self::from_def(PresetDef::from_json(text)?)
    }

    fn compile(def: PresetDef) -> Result<Self> {
        let names = def.names();
        let degree = def.degree;
        let n = names.len();
        let mut orders: Vec<Option<u32>> = vec![None; n];
        let mut other_rules = Vec::new();
        for r in &def.rules {
            let lhs = tokenize(&r.lhs, &names)?;
            let rhs = tokenize(&r.rhs, &names)?;
            let power_of = lhs.first().map(|t| t.0).filter(|&g| lhs.iter().all(|t| t.0 == g));
            match power_of {
                Some(g) if rhs.is_empty() => {
                    let m: i32 = lhs.iter().map(|t| t.1).sum();
                    if m != 0 {
                        let m = m.unsigned_abs();
                        orders[g] = Some(match orders[g] {
                            Some(o) => num_integer::gcd(o, m),
                            None => m,
                        });
                    }
                }
                _ => other_rules.push((lhs, rhs)),
            }
        }
        let mut p = Preset {
            fingerprint: def.fingerprint(),
            names,
            degree,
            perms: def
                .generators
                .iter()
                .map(|g| g.root_perm.iter().map(|&x| x as u8).collect())
                .collect(),
            sections: Vec::new(),
            orders,
            rules: Vec::new(),
            branching: Vec::new(),
            caches: Caches::default(),
            def,
        };
        // rule sides are normalized against generator orders only, so that
        // matching happens on canonical syllables
        let rules: Vec<_> = other_rules
            .into_iter()
            .map(|(l, r)| (p.collect_syllables(&l), p.collect_syllables(&r)))
            .filter(|(l, _)| !l.is_empty())
            .collect();
        p.rules = rules;
        let mut sections = Vec::with_capacity(n);
        for g in &p.def.generators {
            let secs: Result<Vec<Word>> = g.sections.iter().map(|s| p.parse_word(s)).collect();
            sections.push(secs?);
        }
        p.sections = sections;
        p.branching = p
            .def
            .branching
            .iter()
            .map(|s| p.parse_word(s))
            .collect::<Result<_>>()?;
        Ok(p)
    }

    fn collect_syllables(&self, toks: &[(usize, i32)]) -> Vec<Syllable> {
        let mut out: Vec<Syllable> = Vec::new();
        for &(g, e) in toks {
            let e = self.normalize_exp(g as u16, e);
            if e == 0 {
                continue;
            }
            match out.last_mut() {
                Some(top) if top.gen as usize == g => {
                    let e2 = self.normalize_exp(top.gen, top.exp + e);
                    if e2 == 0 {
                        out.pop();
                    } else {
                        top.exp = e2;
                    }
                }
                _ => out.push(Syllable::new(g, e)),
            }
        }
        out
    }

    pub fn def(&self) -> &PresetDef {
        &self.def
    }

    pub fn name(&self) -> &str {
        &self.def.name
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn num_generators(&self) -> usize {
        self.names.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn fingerprint(&self) -> &str {
        &self.fingerprint
    }

    pub fn is_contracting(&self) -> bool {
        self.def.contracting
    }

    /// Declared order of a generator (from an `x^m -> 1` rule).
    pub fn generator_order(&self, g: usize) -> Option<u32> {
        self.orders[g]
    }

    pub fn generator_root_perm(&self, g: usize) -> &[u8] {
        &self.perms[g]
    }

    pub fn generator_sections(&self, g: usize) -> &[Word] {
        &self.sections[g]
    }

    pub fn generators(&self) -> Vec<Word> {
        (0..self.num_generators()).map(Word::gen).collect()
    }

    pub fn branching_generators(&self) -> &[Word] {
        &self.branching
    }

    pub fn parse_word(&self, s: &str) -> Result<Word> {
        let toks = tokenize(s, &self.names)?;
        Ok(self.reduce_iter(toks.into_iter().map(|(g, e)| Syllable::new(g, e))))
    }

    pub fn format_word(&self, w: &Word) -> String {
        format_word(w, &self.names)
    }

    fn normalize_exp(&self, g: u16, e: i32) -> i32 {
        match self.orders[g as usize] {
            Some(m) => e.rem_euclid(m as i32),
            None => e,
        }
    }

    /// Canonical form: adjacent powers collected, exponents reduced modulo
    /// declared generator orders, rewriting rules applied to exhaustion.
    pub fn reduce(&self, w: &Word) -> Word {
        self.reduce_iter(w.syllables().iter().copied())
    }

    pub fn reduce_iter(&self, syls: impl IntoIterator<Item = Syllable>) -> Word {
        let syls = syls.into_iter();
        let mut out: Vec<Syllable> = Vec::with_capacity(syls.size_hint().0);
        let mut rewrites = 0usize;
        let mut cap = 0usize;
        for s in syls {
            cap += MAX_REWRITES_PER_LETTER;
            self.push_syllable(&mut out, s, &mut rewrites, cap);
        }
        Word::from_syllables(out)
    }

    // `out` is irreducible before each call, so any new rule match must end
    // at the top syllable.
    fn push_syllable(&self, out: &mut Vec<Syllable>, s: Syllable, rewrites: &mut usize, cap: usize) {
        let e = self.normalize_exp(s.gen, s.exp);
        if e == 0 {
            return;
        }
        match out.last_mut() {
            Some(top) if top.gen == s.gen => {
                let e2 = self.normalize_exp(s.gen, top.exp + e);
                if e2 == 0 {
                    out.pop();
                    return;
                }
                top.exp = e2;
            }
            _ => out.push(Syllable { gen: s.gen, exp: e }),
        }
        if self.rules.is_empty() || *rewrites >= cap {
            return;
        }
        for (lhs, rhs) in &self.rules {
            if out.len() >= lhs.len() && out[out.len() - lhs.len()..] == lhs[..] {
                *rewrites += 1;
                out.truncate(out.len() - lhs.len());
                for &r in rhs {
                    self.push_syllable(out, r, rewrites, cap);
                }
                return;
            }
        }
    }

    pub fn mul(&self, a: &Word, b: &Word) -> Word {
        self.reduce_iter(a.syllables().iter().chain(b.syllables()).copied())
    }

    pub fn product<'a>(&self, words: impl IntoIterator<Item = &'a Word>) -> Word {
        self.reduce_iter(words.into_iter().flat_map(|w| w.syllables().iter().copied()))
    }

    pub fn inv(&self, w: &Word) -> Word {
        self.reduce_iter(w.syllables().iter().rev().map(|s| Syllable { gen: s.gen, exp: -s.exp }))
    }

    pub fn pow(&self, w: &Word, e: i64) -> Word {
        let base = if e < 0 { self.inv(w) } else { w.clone() };
        let mut acc = Word::identity();
        let mut sq = base;
        let mut k = e.unsigned_abs();
        while k > 0 {
            if k & 1 == 1 {
                acc = self.mul(&acc, &sq);
            }
            k >>= 1;
            if k > 0 {
                sq = self.mul(&sq, &sq);
            }
        }
        acc
    }

    /// `g h g^{-1}`.
    pub fn conj(&self, g: &Word, h: &Word) -> Word {
        self.product([g, h, &self.inv(g)])
    }

    /// `[g, h] = g h g^{-1} h^{-1}`.
    pub fn comm(&self, g: &Word, h: &Word) -> Word {
        self.product([g, h, &self.inv(g), &self.inv(h)])
    }

    /// Level-1 recursion of `x^e` for a single syllable, memoized.
    pub(crate) fn syllable_rec(&self, s: Syllable) -> Arc<SylRec> {
        let key = (s.gen, s.exp);
        if let Some(r) = self.caches.syllables.read().unwrap().get(&key) {
            return r.clone();
        }
        let rec = Arc::new(self.compute_syllable_rec(s));
        self.caches.syllables.write().unwrap().insert(key, rec.clone());
        rec
    }

    fn compute_syllable_rec(&self, s: Syllable) -> SylRec {
        let d = self.degree;
        let g = s.gen as usize;
        let sigma = &self.perms[g];
        let mut perm: Vec<u8> = (0..d as u8).collect();
        let mut secs: Vec<Vec<Syllable>> = vec![Vec::new(); d];
        if s.exp > 0 {
            // x^e at c: x_{σ^{e-1}(c)} ⋯ x_{σ(c)} x_c
            for c in 0..d {
                let mut pos = c;
                let mut parts: Vec<&Word> = Vec::new();
                for _ in 0..s.exp {
                    parts.push(&self.sections[g][pos]);
                    pos = sigma[pos] as usize;
                }
                perm[c] = pos as u8;
                secs[c] = parts.iter().rev().flat_map(|w| w.syllables().iter().copied()).collect();
            }
        } else {
            let mut sigma_inv = vec![0u8; d];
            for (c, &x) in sigma.iter().enumerate() {
                sigma_inv[x as usize] = c as u8;
            }
            // x^{-1} at c: (x_{σ^{-1}(c)})^{-1}
            for c in 0..d {
                let mut pos = c;
                let mut parts: Vec<Syllable> = Vec::new();
                for _ in 0..s.exp.unsigned_abs() {
                    let pre = sigma_inv[pos] as usize;
                    parts.extend(
                        self.sections[g][pre]
                            .syllables()
                            .iter()
                            .rev()
                            .map(|y| Syllable { gen: y.gen, exp: -y.exp }),
                    );
                    pos = pre;
                }
                perm[c] = pos as u8;
                secs[c] = parts;
            }
        }
        SylRec {
            perm,
            sections: secs.into_iter().map(|s| self.reduce_iter(s)).collect(),
        }
    }

    pub(crate) fn identity_cache_get(&self, w: &Word) -> Option<bool> {
        self.caches.identity.read().unwrap().get(w).copied()
    }

    pub(crate) fn identity_cache_put<'a>(&self, words: impl IntoIterator<Item = &'a Word>, value: bool) {
        let mut cache = self.caches.identity.write().unwrap();
        if cache.len() > IDENTITY_CACHE_CAP {
            cache.clear();
        }
        for w in words {
            if w.syllable_len() <= IDENTITY_CACHE_MAX_SYLLABLES {
                cache.insert(w.clone(), value);
            }
        }
    }
}

/// The first Grigorchuk group acting on the binary tree.
pub fn grigorchuk_preset() -> Preset {
    let gen = |name: &str, perm: [usize; 2], s0: &str, s1: &str| GeneratorDef {
        name: name.into(),
        root_perm: perm.to_vec(),
        sections: vec![s0.into(), s1.into()],
    };
    let rule = |l: &str, r: &str| RuleDef {
        lhs: l.into(),
        rhs: r.into(),
    };
    let def = PresetDef {
        name: "grigorchuk".into(),
        degree: 2,
        generators: vec![
            gen("a", [1, 0], "1", "1"),
            gen("b", [0, 1], "a", "c"),
            gen("c", [0, 1], "a", "d"),
            gen("d", [0, 1], "1", "b"),
        ],
        rules: vec![
            rule("a^2", "1"),
            rule("b^2", "1"),
            rule("c^2", "1"),
            rule("d^2", "1"),
            rule("b c", "d"),
            rule("c b", "d"),
            rule("b d", "c"),
            rule("d b", "c"),
            rule("c d", "b"),
            rule("d c", "b"),
        ],
        branching: vec!["a b a b".into()],
        contracting: true,
    };
    Preset::from_def(def).expect("shipped preset is valid")
}

fn normalize_vector(d: usize, e: &[i64]) -> Vec<usize> {
    e.iter().map(|&x| x.rem_euclid(d as i64) as usize).collect()
}

/// The GGS group with defining vector `e` (entries taken modulo `d`):
/// `a` rotates the children `i -> i+1 mod d`, and
/// `b = (a^{e_1}, ..., a^{e_{d-1}}, b)` fixes the first level.
pub fn ggs_preset(d: usize, e: &[i64]) -> Result<Preset> {
    crate::tree::check_degree(d)?;
    if d > 10 {
        return Err(Error::Precondition(format!("degree {d} exceeds the supported maximum of 10")));
    }
    if e.is_empty() || e.len() != d - 1 {
        return Err(Error::Precondition(format!(
            "defining vector must have d-1 = {} entries, found {}",
            d - 1,
            e.len()
        )));
    }
    let eps = normalize_vector(d, e);
    let pow = |k: usize| if k == 0 { "1".to_string() } else if k == 1 { "a".into() } else { format!("a^{k}") };
    let mut b_sections: Vec<String> = eps.iter().map(|&k| pow(k)).collect();
    b_sections.push("b".into());
    let name = if d == 3 && eps == [1, 2] {
        "gupta-sidki".to_string()
    } else {
        let parts: Vec<String> = eps.iter().map(|x| x.to_string()).collect();
        format!("ggs-{d}-{}", parts.join("."))
    };
    let def = PresetDef {
        name,
        degree: d,
        generators: vec![
            GeneratorDef {
                name: "a".into(),
                root_perm: (0..d).map(|i| (i + 1) % d).collect(),
                sections: vec!["1".into(); d],
            },
            GeneratorDef {
                name: "b".into(),
                root_perm: (0..d).collect(),
                sections: b_sections,
            },
        ],
        rules: vec![
            RuleDef {
                lhs: format!("a^{d}"),
                rhs: "1".into(),
            },
            RuleDef {
                lhs: format!("b^{d}"),
                rhs: "1".into(),
            },
        ],
        branching: vec!["a b a^-1 b^-1".into()],
        contracting: true,
    };
    Preset::from_def(def)
}

/// Gupta–Sidki group: `ggs_preset(3, [1, -1])`.
pub fn gupta_sidki_preset() -> Preset {
    ggs_preset(3, &[1, -1]).expect("shipped preset is valid")
}

/// Second Grigorchuk group: `ggs_preset(4, [1, 0, 1])`.
pub fn second_grigorchuk_preset() -> Preset {
    ggs_preset(4, &[1, 0, 1]).expect("shipped preset is valid")
}

/// Syntactic regular-branch criterion on a GGS defining vector: `d` prime and
/// the entries neither all zero nor all non-zero, or `E = (1, -1)`.
pub fn regular_branch_vector_check(d: usize, e: &[i64]) -> bool {
    if d < 2 || e.len() != d - 1 {
        return false;
    }
    let eps = normalize_vector(d, e);
    if eps.len() == 2 && eps[0] == 1 && eps[1] == d - 1 {
        return true;
    }
    let zeros = eps.iter().filter(|&&x| x == 0).count();
    is_prime(d) && zeros > 0 && zeros < eps.len()
}

fn is_prime(n: usize) -> bool {
    n >= 2 && (2..).take_while(|k| k * k <= n).all(|k| !n.is_multiple_of(k))
}

/// Resolves a built-in preset name: `grigorchuk`, `gupta-sidki`,
/// `second-grigorchuk`, or `ggs:<d>:<e1>,<e2>,...`.
pub fn builtin_preset(name: &str) -> Result<Preset> {
    match name {
        "grigorchuk" => Ok(grigorchuk_preset()),
        "gupta-sidki" => Ok(gupta_sidki_preset()),
        "second-grigorchuk" => Ok(second_grigorchuk_preset()),
        other => {
            let rest = other
                .strip_prefix("ggs:")
                .ok_or_else(|| Error::Parse(format!("unknown preset {other:?}")))?;
            let (d, e) = rest
                .split_once(':')
                .ok_or_else(|| Error::Parse(format!("expected ggs:<d>:<e1>,...; got {other:?}")))?;
            let d: usize = d.parse().map_err(|_| Error::Parse(format!("bad degree in {other:?}")))?;
            let e: Vec<i64> = e
                .split(',')
                .map(|x| x.trim().parse().map_err(|_| Error::Parse(format!("bad entry {x:?}"))))
                .collect::<Result<_>>()?;
            ggs_preset(d, &e)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grigorchuk_recursions() {
        let p = grigorchuk_preset();
        let b = p.parse_word("b").unwrap();
        let c = p.parse_word("c").unwrap();
        assert_eq!(p.generator_sections(1)[1], c);
        assert!(p.generator_sections(3)[0].is_empty());
        assert_eq!(p.generator_root_perm(0), &[1, 0]);
        assert_eq!(p.generator_sections(3)[1], b);
        assert_eq!(p.generator_order(2), Some(2));
    }

    #[test]
    fn grigorchuk_reduction_table() {
        let p = grigorchuk_preset();
        let w = |s: &str| p.parse_word(s).unwrap();
        assert_eq!(w("b c"), w("d"));
        assert_eq!(w("b c d"), Word::identity());
        assert_eq!(w("a a"), Word::identity());
        assert_eq!(w("b^-1"), w("b"));
        assert_eq!(w("a b c a"), w("a d a"));
        assert_eq!(p.format_word(&w("a b a b")), "a b a b");
    }

    #[test]
    fn ggs_sections() {
        let gs = gupta_sidki_preset();
        let a = gs.parse_word("a").unwrap();
        assert_eq!(gs.generator_sections(1)[0], a);
        assert_eq!(gs.generator_sections(1)[1], gs.parse_word("a^2").unwrap());
        assert_eq!(gs.generator_sections(1)[2], gs.parse_word("b").unwrap());
        assert_eq!(gs.generator_root_perm(0), &[1, 2, 0]);
        assert_eq!(gs.parse_word("a^-1").unwrap(), gs.parse_word("a^2").unwrap());

        let d2 = ggs_preset(2, &[1]).unwrap();
        assert_eq!(d2.def().generators[1].sections, vec!["a", "b"]);

        let g2 = second_grigorchuk_preset();
        assert_eq!(g2.def().generators[1].sections, vec!["a", "1", "a", "b"]);
        assert!(ggs_preset(3, &[]).is_err());
        assert!(ggs_preset(3, &[1, 1, 1]).is_err());
    }

    #[test]
    fn regular_branch_criterion() {
        assert!(regular_branch_vector_check(5, &[1, 0, 0, 0]));
        assert!(!regular_branch_vector_check(5, &[1, 1, 1, 1]));
        assert!(!regular_branch_vector_check(5, &[0, 0, 0, 0]));
        assert!(regular_branch_vector_check(3, &[1, -1]));
        assert!(!regular_branch_vector_check(4, &[1, 0, 1]));
    }

    #[test]
    fn validation_reports_each_violation() {
        assert!(validate_preset(grigorchuk_preset().def(), 10_000).is_valid());
        let mut def = grigorchuk_preset().def().clone();
        def.generators[1].sections[0] = "z".into();
        def.generators[2].root_perm = vec![0, 0];
        let r = validate_preset(&def, 10_000);
        assert!(r.has(&IssueKind::UnknownSymbol));
        assert!(r.has(&IssueKind::NotAPermutation));
        assert!(Preset::from_def(def).is_err());
    }

    #[test]
    fn validation_catches_false_rules() {
        let mut def = grigorchuk_preset().def().clone();
        def.rules.push(RuleDef {
            lhs: "a b".into(),
            rhs: "b".into(),
        });
        let r = validate_preset(&def, 10_000);
        assert!(r.has(&IssueKind::RuleNotARelation));
    }

    #[test]
    fn canonical_json_is_stable() {
        for p in [grigorchuk_preset(), gupta_sidki_preset(), second_grigorchuk_preset()] {
            let text = p.def().to_json();
            let again = Preset::from_json(&text).unwrap();
            assert_eq!(again.def().to_json(), text);
            assert_eq!(again.fingerprint(), p.fingerprint());
        }
    }

    #[test]
    fn builtin_names() {
        assert_eq!(builtin_preset("ggs:4:1,0,1").unwrap().def(), second_grigorchuk_preset().def());
        assert!(builtin_preset("nope").is_err());
    }
}
