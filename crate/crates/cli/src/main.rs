//! `selfsim`: batch front end for exact computation in self-similar groups.

mod report;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use selfsim::construction::{
    conjugate_count_lower_bound, fix_separation_witness, level_trap_check, parabolic_approximation,
    pullback_subgroup, trap_pipeline, TrapOutcome,
};
use selfsim::quotient::{image_subgroup, is_level_transitive, point_stabilizer_words, quotient_order};
use selfsim::rist::rist_element_search;
use selfsim::search::finite_closure;
use selfsim::subgroup::{
    conjugate_escaping, fixed_tree, in_rigid_stabilizer, index_growth_profile, minimal_non_fixing_level, psi_sections,
    SubgroupHandle,
};
use selfsim::tree::level_vertices;
use selfsim::{
    build_certificate, builtin_preset, validate_certificate, validate_preset, AvoidSpec, Budgets, ElementOrder, Error,
    Preset, PresetDef, Vertex, WmCertificate, Word,
};
use serde::{Deserialize, Serialize};
use serde_json::json;

use report::{render, Envelope, Failure, Format, Report};

const MAX_FINITE: usize = 4096;

#[derive(Parser)]
#[command(name = "selfsim", version)]
#[command(about = "Exact computation in self-similar groups acting on rooted trees")]
struct Cli {
    #[command(flatten)]
    run: RunArgs,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Default)]
struct RunArgs {
    /// Built-in preset (grigorchuk, gupta-sidki, second-grigorchuk, ggs:D:E1,E2,..) or a definition file
    #[arg(long, global = true)]
    preset: Option<String>,

    /// Output format
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,

    /// Seed recorded in every report
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Default verification level for quotient checks
    #[arg(long = "verification-level", global = true)]
    verification_level: Option<usize>,

    /// Nodes per identity test on non-contracting presets
    #[arg(long, global = true)]
    identity_budget: Option<u64>,

    /// Nodes per element-order computation
    #[arg(long, global = true)]
    order_budget: Option<u64>,

    /// Candidates per search
    #[arg(long, global = true)]
    search_budget: Option<u64>,

    /// Cap on harvested generators
    #[arg(long, global = true)]
    max_generators: Option<usize>,

    /// JSON run configuration supplying defaults for the flags above
    #[arg(long, global = true, env = "SELFSIM_CONFIG")]
    config: Option<PathBuf>,
}

/// Defaults for a run; flags override.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct RunConfig {
    preset: String,
    verification_level: usize,
    budgets: Budgets,
    seed: u64,
    format: Format,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            preset: "grigorchuk".into(),
            verification_level: 6,
            budgets: Budgets::default(),
            seed: 0,
            format: Format::Text,
        }
    }
}

impl RunArgs {
    fn resolve(&self) -> Result<RunConfig, Failure> {
        let mut cfg = match &self.config {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| Failure::usage(format!("config {}: {e}", path.display())))?;
                serde_json::from_str(&text).map_err(|e| Failure::usage(format!("config {}: {e}", path.display())))?
            }
            None => RunConfig::default(),
        };
        if let Some(p) = &self.preset {
            cfg.preset = p.clone();
        }
        if let Some(f) = self.format {
            cfg.format = f;
        }
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if let Some(n) = self.verification_level {
            cfg.verification_level = n;
        }
        if let Some(b) = self.identity_budget {
            cfg.budgets.identity_nodes = b;
        }
        if let Some(b) = self.order_budget {
            cfg.budgets.order_nodes = b;
        }
        if let Some(b) = self.search_budget {
            cfg.budgets.search = b;
        }
        if let Some(b) = self.max_generators {
            cfg.budgets.max_generators = b;
        }
        cfg.budgets.validate().map_err(|e| Failure::usage(e.to_string()))?;
        Ok(cfg)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Inspect and validate group definitions
    #[command(subcommand)]
    Group(GroupCmd),
    /// Elements: action, sections, orders, portraits, word problem
    #[command(subcommand)]
    Elem(ElemCmd),
    /// Finite level quotients G/Stab(n)
    #[command(subcommand)]
    Quotient(QuotientCmd),
    /// Subgroups: fixed vertices, sections, rigid stabilizers, indices
    #[command(subcommand)]
    Sub(SubCmd),
    /// Weakly maximal approximations and certificates
    #[command(subcommand)]
    Wm(WmCmd),
}

#[derive(Subcommand)]
enum GroupCmd {
    /// Print the preset definition and fingerprint
    Show,
    /// Check a definition (the given file, else --preset)
    Validate { file: Option<PathBuf> },
}

#[derive(Subcommand)]
enum ElemCmd {
    /// Image of a vertex
    Apply { word: String, vertex: String },
    /// Section at a vertex
    Section { word: String, vertex: String },
    /// Order of an element
    Order { word: String },
    /// Portrait to a depth
    Portrait {
        word: String,
        #[arg(long, default_value_t = 3)]
        depth: usize,
    },
    /// Word problem: is the element trivial
    Identity { word: String },
}

#[derive(Subcommand)]
enum QuotientCmd {
    /// |G/Stab(n)|
    Order { level: usize },
    /// Transitivity on level n
    Transitive { level: usize },
    /// Index of the image of ⟨gens⟩ in G/Stab(n)
    Index {
        #[arg(long)]
        gens: String,
        level: usize,
    },
    /// Generators of the vertex stabilizer Stab(v)
    Stab { vertex: String },
}

#[derive(Subcommand)]
enum SubCmd {
    /// Vertices fixed by ⟨gens⟩, level by level down to a depth
    Fix {
        #[arg(long)]
        gens: String,
        level: usize,
    },
    /// Least level where ⟨gens⟩ fixes no vertex
    Fixlevel {
        #[arg(long)]
        gens: String,
        #[arg(long, default_value_t = 8)]
        max: usize,
    },
    /// Sections at the level-k vertices of a level-k stabilizer element
    Psi { word: String, level: usize },
    /// Is the element in Rist(v)
    Rist { word: String, vertex: String },
    /// Index growth of ⟨gens⟩ over levels 1..n
    Profile {
        #[arg(long)]
        gens: String,
        level: usize,
    },
    /// A conjugate of γ outside ⟨gens⟩, witnessed at a level
    Escape {
        #[arg(long)]
        gens: String,
        gamma: String,
        #[arg(long)]
        level: Option<usize>,
    },
}

#[derive(Subcommand)]
enum WmCmd {
    /// Nontrivial element of Rist(v)
    RistSearch { vertex: String },
    /// Preimage of Δ under the first level-k section
    Pullback {
        /// Generators of Δ
        #[arg(long)]
        gens: String,
        #[arg(long)]
        k: usize,
        /// Membership level for Δ; without it Δ must be certified finite
        #[arg(long)]
        delta_level: Option<usize>,
        /// Level the harvest is deduplicated at (default k+1)
        #[arg(long)]
        level: Option<usize>,
    },
    /// Level-trap construction for a finite Q (or a direct check with --check)
    Trap {
        #[arg(long)]
        gens: String,
        #[arg(long)]
        k: usize,
        #[arg(long, default_value_t = 1)]
        l: usize,
        /// Check ⟨gens⟩ itself instead of building from Q = ⟨gens⟩
        #[arg(long)]
        check: bool,
    },
    /// Staged certificate for finite Q against an avoid list
    Build {
        /// Generators of Q
        #[arg(long)]
        gens: String,
        /// Avoid entry: parabolic:VERTEX@LEVEL or gens:w1;w2@LEVEL (repeatable)
        #[arg(long = "avoid")]
        avoid: Vec<String>,
        /// Write the certificate here instead of stdout
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Replay every clause of a certificate
    Validate { file: PathBuf },
    /// Level where exactly one of two subgroups fixes a vertex
    Separate {
        /// Subgroup: w1,w2 | parabolic:V@L | trap:Q@K
        first: String,
        second: String,
        #[arg(long, default_value_t = 4)]
        depth: usize,
    },
    /// Lower bound on the number of conjugates of a subgroup
    Conjbound {
        /// Subgroup: w1,w2 | parabolic:V@L | trap:Q@K
        subgroup: String,
        #[arg(long)]
        level: Option<usize>,
        #[arg(long, default_value_t = 4)]
        max_len: usize,
    },
}

fn load_preset(src: &str) -> Result<Preset, Failure> {
    match builtin_preset(src) {
        Ok(p) => Ok(p),
        Err(builtin) => {
            let path = Path::new(src);
            if !path.exists() {
                return Err(Failure::usage(format!("{builtin}; no file {src:?} either")));
            }
            Ok(Preset::from_json(&std::fs::read_to_string(path)?)?)
        }
    }
}

fn load_def(src: &str) -> Result<PresetDef, Failure> {
    match builtin_preset(src) {
        Ok(p) => Ok(p.def().clone()),
        Err(_) => Ok(PresetDef::from_json(&std::fs::read_to_string(src)?)?),
    }
}

struct Ctx {
    p: Preset,
    cfg: RunConfig,
}

impl Ctx {
    fn word(&self, s: &str) -> Result<Word, Failure> {
        Ok(self.p.parse_word(s)?)
    }

    fn words(&self, s: &str) -> Result<Vec<Word>, Failure> {
        s.split(',').filter(|x| !x.trim().is_empty()).map(|x| self.word(x)).collect()
    }

    fn vertex(&self, s: &str) -> Result<Vertex, Failure> {
        Ok(Vertex::parse(s, self.p.degree())?)
    }

    fn fmt(&self, w: &Word) -> String {
        self.p.format_word(w)
    }

    fn fmts(&self, ws: &[Word]) -> Vec<String> {
        ws.iter().map(|w| self.fmt(w)).collect()
    }

    fn finite(&self, gens: &[Word]) -> Result<Option<Vec<Word>>, Failure> {
        Ok(finite_closure(&self.p, gens, 4, MAX_FINITE, self.cfg.budgets.identity_nodes)?)
    }

    /// `w1,w2` | `parabolic:V@L` | `trap:Q@K`.
    fn subgroup(&self, spec: &str) -> Result<SubgroupHandle, Failure> {
        if let Some(rest) = spec.strip_prefix("parabolic:") {
            let (v, l) = split_level(rest)?;
            return Ok(parabolic_approximation(&self.p, &self.vertex(v)?, l)?);
        }
        if let Some(rest) = spec.strip_prefix("trap:") {
            let (q, k) = split_level(rest)?;
            let out = trap_pipeline(&self.p, &self.words(q)?, k, 1, &self.cfg.budgets)?;
            let chosen = out
                .chosen()
                .and_then(|a| a.pullback.as_ref())
                .ok_or_else(|| Failure::from(Error::StageFailure {
                    stage: 1,
                    reason: format!("no candidate Δ passed the level trap at k = {k}"),
                }))?;
            return Ok(chosen.handle.clone());
        }
        let gens = self.words(spec)?;
        Ok(SubgroupHandle::with_membership_level(&self.p, gens, self.cfg.verification_level)?)
    }
}

fn split_level(s: &str) -> Result<(&str, usize), Failure> {
    let (a, l) = s
        .rsplit_once('@')
        .ok_or_else(|| Failure::usage(format!("{s:?}: expected ...@LEVEL")))?;
    let l = l.trim().parse().map_err(|_| Failure::usage(format!("{s:?}: bad level")))?;
    Ok((a, l))
}

fn order_json(o: &ElementOrder) -> serde_json::Value {
    match o {
        ElementOrder::Finite(n) => json!(n.to_string()),
        ElementOrder::Infinite => json!("infinite"),
    }
}

fn group_cmd(cmd: &GroupCmd, cfg: &RunConfig) -> Result<(Report, String), Failure> {
    match cmd {
        GroupCmd::Show => {
            let p = load_preset(&cfg.preset)?;
            let def = p.def();
            let mut text = format!("{} (degree {}, fingerprint {})\n", p.name(), def.degree, p.fingerprint());
            for g in &def.generators {
                text += &format!("  {} = {:?} ({})\n", g.name, g.root_perm, g.sections.join(", "));
            }
            for r in &def.rules {
                text += &format!("  {} -> {}\n", r.lhs, if r.rhs.is_empty() { "1" } else { &r.rhs });
            }
            text += &format!("  branching: {}", def.branching.join(", "));
            Ok((Report::new(text, serde_json::to_value(def)?), p.fingerprint().to_string()))
        }
        GroupCmd::Validate { file } => {
            let def = match file {
                Some(f) => PresetDef::from_json(&std::fs::read_to_string(f)?)?,
                None => load_def(&cfg.preset)?,
            };
            let rep = validate_preset(&def, cfg.budgets.identity_nodes);
            let text = if rep.is_valid() {
                "valid".to_string()
            } else {
                rep.issues
                    .iter()
                    .map(|i| format!("{} at {}: {}", i.kind, i.location, i.detail))
                    .collect::<Vec<_>>()
                    .join("\n")
            };
            Ok((Report::check(rep.is_valid(), text, serde_json::to_value(&rep)?), def.fingerprint()))
        }
    }
}

fn elem_cmd(cx: &Ctx, cmd: &ElemCmd) -> Result<Report, Failure> {
    let p = &cx.p;
    let b = &cx.cfg.budgets;
    Ok(match cmd {
        ElemCmd::Apply { word, vertex } => {
            let img = p.apply_to_vertex(&cx.word(word)?, &cx.vertex(vertex)?);
            Report::new(format!("{img}"), json!({ "image": img }))
        }
        ElemCmd::Section { word, vertex } => {
            let s = cx.fmt(&p.section_at(&cx.word(word)?, &cx.vertex(vertex)?));
            Report::new(s.clone(), json!({ "section": s }))
        }
        ElemCmd::Order { word } => match p.element_order(&cx.word(word)?, b.order_nodes) {
            Ok(o) => Report::new(o.to_string(), json!({ "order": order_json(&o) })),
            Err(Error::Undecided { budget }) => {
                Report::undecided("undecided", json!({ "order": null, "budget": budget }))
            }
            Err(e) => return Err(e.into()),
        },
        ElemCmd::Portrait { word, depth } => {
            let por = p.portrait(&cx.word(word)?, *depth);
            let mut lines = Vec::new();
            for n in 0..*depth {
                for v in level_vertices(p.degree(), n)? {
                    let d = por.decoration(&v);
                    if d.iter().enumerate().any(|(i, &x)| x as usize != i) {
                        let label = if v.is_root() { "root".to_string() } else { v.to_string() };
                        lines.push(format!("{label}: {d:?}"));
                    }
                }
            }
            if lines.is_empty() {
                lines.push(format!("trivial to depth {depth}"));
            }
            Report::new(lines.join("\n"), por.to_json())
        }
        ElemCmd::Identity { word } => match p.is_identity(&cx.word(word)?, b.identity_nodes) {
            Ok(t) => Report::check(t, t.to_string(), json!({ "identity": t })),
            Err(Error::Undecided { budget }) => {
                Report::undecided("undecided", json!({ "identity": null, "budget": budget }))
            }
            Err(e) => return Err(e.into()),
        },
    })
}

fn quotient_cmd(cx: &Ctx, cmd: &QuotientCmd) -> Result<Report, Failure> {
    let p = &cx.p;
    Ok(match cmd {
        QuotientCmd::Order { level } => {
            let o = quotient_order(p, *level)?.to_string();
            Report::new(o.clone(), json!({ "level": level, "order": o }))
        }
        QuotientCmd::Transitive { level } => {
            let t = is_level_transitive(p, *level)?;
            Report::check(t, t.to_string(), json!({ "level": level, "transitive": t }))
        }
        QuotientCmd::Index { gens, level } => {
            let gens = cx.words(gens)?;
            let img = image_subgroup(p, &gens, *level)?;
            let total = quotient_order(p, *level)?;
            let idx = (&total / img.order()).to_string();
            Report::new(
                idx.clone(),
                json!({ "level": level, "index": idx, "image": img.report(), "quotient_order": total.to_string() }),
            )
        }
        QuotientCmd::Stab { vertex } => {
            let v = cx.vertex(vertex)?;
            let gens = cx.fmts(&point_stabilizer_words(p, &v));
            let img = image_subgroup(p, &point_stabilizer_words(p, &v), v.level().max(1))?;
            let index = (&quotient_order(p, v.level().max(1))? / img.order()).to_string();
            Report::new(
                format!("index {index}\n{}", gens.join("\n")),
                json!({ "vertex": v, "orbit_size": index, "generators": gens }),
            )
        }
    })
}

fn sub_cmd(cx: &Ctx, cmd: &SubCmd) -> Result<Report, Failure> {
    let p = &cx.p;
    let b = &cx.cfg.budgets;
    Ok(match cmd {
        SubCmd::Fix { gens, level } => {
            let h = SubgroupHandle::new(cx.words(gens)?);
            let t = fixed_tree(p, &h, *level);
            let last = t.levels.last().cloned().unwrap_or_default();
            let text = if last.is_empty() {
                format!("no fixed vertex at level {level} (deepest fixed: {})", show_vertex(&t.deepest))
            } else {
                last.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(" ")
            };
            Report::new(text, serde_json::to_value(&t)?)
        }
        SubCmd::Fixlevel { gens, max } => {
            let h = SubgroupHandle::new(cx.words(gens)?);
            match minimal_non_fixing_level(p, &h, *max) {
                Some(l) => Report::new(l.to_string(), json!({ "level": l })),
                None => Report::check(false, format!("fixes a vertex at every level up to {max}"), json!({ "level": null })),
            }
        }
        SubCmd::Psi { word, level } => match psi_sections(p, &cx.word(word)?, *level) {
            Ok(s) => {
                let s = cx.fmts(&s);
                let verts = level_vertices(p.degree(), *level)?;
                let text = verts.iter().zip(&s).map(|(v, w)| format!("{v}: {w}")).collect::<Vec<_>>().join("\n");
                Report::new(text, json!({ "level": level, "sections": s }))
            }
            Err(Error::NotInLevelStabilizer { level, vertex }) => Report::check(
                false,
                format!("not in Stab({level}): moves {vertex}"),
                json!({ "level": level, "moved": vertex }),
            ),
            Err(e) => return Err(e.into()),
        },
        SubCmd::Rist { word, vertex } => {
            match in_rigid_stabilizer(p, &cx.word(word)?, &cx.vertex(vertex)?, b.identity_nodes) {
                Ok(t) => Report::check(t, t.to_string(), json!({ "rigid": t })),
                Err(Error::Undecided { budget }) => {
                    Report::undecided("undecided", json!({ "rigid": null, "budget": budget }))
                }
                Err(e) => return Err(e.into()),
            }
        }
        SubCmd::Profile { gens, level } => {
            let h = SubgroupHandle::new(cx.words(gens)?);
            let prof = index_growth_profile(p, &h, *level)?;
            let text = format!(
                "{} ({:?})",
                prof.indices.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" "),
                prof.evidence
            );
            Report::new(text, serde_json::to_value(&prof)?)
        }
        SubCmd::Escape { gens, gamma, level } => {
            let n = level.unwrap_or(cx.cfg.verification_level);
            let h = SubgroupHandle::with_membership_level(p, cx.words(gens)?, n)?;
            match conjugate_escaping(p, &h, &cx.word(gamma)?, n, b.search)? {
                Some(f) => Report::new(cx.fmt(&f), json!({ "conjugator": cx.fmt(&f), "level": n })),
                None => Report::undecided("not found within budget", json!({ "conjugator": null, "level": n })),
            }
        }
    })
}

fn show_vertex(v: &Vertex) -> String {
    if v.is_root() {
        "root".into()
    } else {
        v.to_string()
    }
}

fn trap_json(cx: &Ctx, out: &TrapOutcome) -> serde_json::Value {
    let attempts: Vec<_> = out
        .attempts
        .iter()
        .map(|a| {
            json!({
                "delta": cx.fmts(&a.delta),
                "delta_order": a.delta_order,
                "generators": a.pullback.as_ref().map(|pb| cx.fmts(pb.handle.generators())),
                "report": a.report,
            })
        })
        .collect();
    json!({ "attempts": attempts, "chosen": out.chosen })
}

fn wm_cmd(cx: &Ctx, cmd: &WmCmd) -> Result<Report, Failure> {
    let p = &cx.p;
    let b = &cx.cfg.budgets;
    Ok(match cmd {
        WmCmd::RistSearch { vertex } => {
            let v = cx.vertex(vertex)?;
            match rist_element_search(p, &v, b.search, b.identity_nodes)? {
                Some(w) => Report::new(cx.fmt(&w), json!({ "vertex": v, "element": cx.fmt(&w) })),
                None => Report::undecided("not found within budget", json!({ "vertex": v, "element": null })),
            }
        }
        WmCmd::Pullback {
            gens,
            k,
            delta_level,
            level,
        } => {
            let gens = cx.words(gens)?;
            let delta = match delta_level {
                Some(l) => SubgroupHandle::with_membership_level(p, gens, *l)?,
                None => {
                    let elems = cx.finite(&gens)?.ok_or_else(|| {
                        Failure::usage("Δ is not certified finite; pass --delta-level for a membership level")
                    })?;
                    SubgroupHandle::new(gens).with_elements(elems)
                }
            };
            let n = level.unwrap_or(k + 1);
            let pb = pullback_subgroup(p, &delta, *k, n, b)?;
            let g = cx.fmts(pb.handle.generators());
            let text = format!(
                "{} generators (coset level {}, {} candidates{})\n{}",
                g.len(),
                pb.coset_level,
                pb.candidates,
                if pb.truncated { ", truncated" } else { "" },
                g.join("\n")
            );
            Report::new(
                text,
                json!({
                    "k": pb.k, "level": pb.level, "coset_level": pb.coset_level,
                    "section_check": pb.section_check, "candidates": pb.candidates,
                    "dropped": pb.dropped, "truncated": pb.truncated,
                    "approximation": pb.handle.approximation(), "generators": g,
                }),
            )
        }
        WmCmd::Trap { gens, k, l, check } => {
            let gens = cx.words(gens)?;
            if *check {
                let rep = level_trap_check(p, &SubgroupHandle::new(gens), *k, *l)?;
                let text = format!(
                    "fixes level {k}: {}\nno fixed vertex at level {}: {}",
                    rep.fixes_level_k,
                    k + l,
                    rep.no_fixed_vertex
                );
                Report::check(rep.pass(), text, serde_json::to_value(&rep)?)
            } else {
                let out = trap_pipeline(p, &gens, *k, *l, b)?;
                let text = match out.chosen() {
                    Some(a) => format!(
                        "pass with Δ = ⟨{}⟩ of order {}: {} generators",
                        cx.fmts(&a.delta).join(", "),
                        a.delta_order.unwrap_or(0),
                        a.pullback.as_ref().map_or(0, |pb| pb.handle.generators().len())
                    ),
                    None => format!("no candidate Δ passed ({} tried)", out.attempts.len()),
                };
                Report::check(out.chosen.is_some(), text, trap_json(cx, &out))
            }
        }
        WmCmd::Build { gens, avoid, out } => {
            let q = cx.words(gens)?;
            let avoid = avoid
                .iter()
                .map(|a| AvoidSpec::parse(p, a))
                .collect::<selfsim::Result<Vec<_>>>()?;
            let cert = build_certificate(p, &q, &avoid, cx.cfg.verification_level, b, cx.cfg.seed)?;
            let text = cert.to_json();
            match out {
                Some(path) => {
                    std::fs::write(path, &text)?;
                    Report::new(
                        format!("wrote {}-stage certificate to {}", cert.stages.len(), path.display()),
                        json!({ "stages": cert.stages.len(), "path": path }),
                    )
                }
                None => Report::new(text, serde_json::to_value(&cert)?),
            }
        }
        WmCmd::Validate { .. } => unreachable!("handled before the preset is loaded"),
        WmCmd::Separate { first, second, depth } => {
            let hi = cx.subgroup(first)?;
            let hj = cx.subgroup(second)?;
            match fix_separation_witness(p, &hi, &hj, *depth)? {
                Some(w) => Report::new(
                    format!("not conjugate: level {}, only subgroup {} fixes {}", w.level, w.fixer + 1, w.vertex),
                    serde_json::to_value(&w)?,
                ),
                None => Report::check(false, "inconclusive", json!({ "witness": null, "depth": depth })),
            }
        }
        WmCmd::Conjbound { subgroup, level, max_len } => {
            let h = cx.subgroup(subgroup)?;
            let n = level.or(h.membership_level()).unwrap_or(cx.cfg.verification_level);
            let bound = conjugate_count_lower_bound(p, &h, n, *max_len, b)?;
            let gamma = bound.gamma.as_ref().map(|g| cx.fmt(g));
            let text = match &gamma {
                Some(g) => format!("{} (γ = {g}, level {n})", bound.count),
                None => format!("{} (no escaping γ found)", bound.count),
            };
            Report::new(
                text,
                json!({
                    "count": bound.count,
                    "gamma": gamma,
                    "gamma_order": bound.gamma_order.as_ref().map(|o| o.to_string()),
                    "conjugator": bound.conjugator.as_ref().map(|f| cx.fmt(f)),
                    "witnesses": cx.fmts(&bound.witnesses),
                    "level": n,
                }),
            )
        }
    })
}

fn validate_cmd(file: &Path) -> Result<(Report, WmCertificate), Failure> {
    let cert = WmCertificate::from_json(&std::fs::read_to_string(file)?)?;
    let rep = validate_certificate(&cert)?;
    let mut text = vec![
        format!("fingerprint: {}", ok(rep.fingerprint)),
        format!("k1 = {}: {}", cert.k1, ok(rep.k1)),
        format!("structure: {}", ok(rep.structure)),
    ];
    for s in &rep.stages {
        text.push(format!(
            "stage {}: rigid {}, (1) {}, (2) {} [verified at level {}], (3) nesting {}, fixing {}",
            s.stage,
            ok(s.rigid),
            ok(s.avoids),
            ok(s.normal_closure),
            s.clause2_level,
            ok(s.nesting),
            ok(s.fixing)
        ));
    }
    text.push(if rep.pass() { "certificate valid".into() } else { "certificate INVALID".into() });
    Ok((Report::check(rep.pass(), text.join("\n"), serde_json::to_value(&rep)?), cert))
}

fn ok(b: bool) -> &'static str {
    if b {
        "pass"
    } else {
        "FAIL"
    }
}

fn command_name(c: &Command) -> String {
    let (a, b) = match c {
        Command::Group(g) => ("group", match g {
            GroupCmd::Show => "show",
            GroupCmd::Validate { .. } => "validate",
        }),
        Command::Elem(e) => ("elem", match e {
            ElemCmd::Apply { .. } => "apply",
            ElemCmd::Section { .. } => "section",
            ElemCmd::Order { .. } => "order",
            ElemCmd::Portrait { .. } => "portrait",
            ElemCmd::Identity { .. } => "identity",
        }),
        Command::Quotient(q) => ("quotient", match q {
            QuotientCmd::Order { .. } => "order",
            QuotientCmd::Transitive { .. } => "transitive",
            QuotientCmd::Index { .. } => "index",
            QuotientCmd::Stab { .. } => "stab",
        }),
        Command::Sub(s) => ("sub", match s {
            SubCmd::Fix { .. } => "fix",
            SubCmd::Fixlevel { .. } => "fixlevel",
            SubCmd::Psi { .. } => "psi",
            SubCmd::Rist { .. } => "rist",
            SubCmd::Profile { .. } => "profile",
            SubCmd::Escape { .. } => "escape",
        }),
        Command::Wm(w) => ("wm", match w {
            WmCmd::RistSearch { .. } => "rist-search",
            WmCmd::Pullback { .. } => "pullback",
            WmCmd::Trap { .. } => "trap",
            WmCmd::Build { .. } => "build",
            WmCmd::Validate { .. } => "validate",
            WmCmd::Separate { .. } => "separate",
            WmCmd::Conjbound { .. } => "conjbound",
        }),
    };
    format!("{a} {b}")
}

fn run(cli: &Cli) -> Result<i32, Failure> {
    let cfg = cli.run.resolve()?;
    let name = command_name(&cli.command);
    let (rep, preset_name, fingerprint, level) = match &cli.command {
        Command::Group(g) => {
            let (rep, fp) = group_cmd(g, &cfg)?;
            (rep, cfg.preset.clone(), fp, cfg.verification_level)
        }
        Command::Wm(WmCmd::Validate { file }) => {
            // the certificate carries its own preset
            let (rep, cert) = validate_cmd(file)?;
            (rep, cert.preset.name.clone(), cert.fingerprint.clone(), cert.verification_level)
        }
        cmd => {
            let cx = Ctx {
                p: load_preset(&cfg.preset)?,
                cfg: cfg.clone(),
            };
            let rep = match cmd {
                Command::Elem(c) => elem_cmd(&cx, c)?,
                Command::Quotient(c) => quotient_cmd(&cx, c)?,
                Command::Sub(c) => sub_cmd(&cx, c)?,
                Command::Wm(c) => wm_cmd(&cx, c)?,
                Command::Group(_) => unreachable!(),
            };
            (rep, cx.p.name().to_string(), cx.p.fingerprint().to_string(), cfg.verification_level)
        }
    };
    let env = Envelope {
        command: &name,
        preset: &preset_name,
        fingerprint: &fingerprint,
        seed: cfg.seed,
        budgets: &cfg.budgets,
        verification_level: level,
    };
    println!("{}", render(cfg.format, &env, &rep));
    Ok(rep.exit_code())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    match run(&cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(f) => {
            eprintln!("error: {f}");
            if f.code == report::EXIT_USAGE {
                eprintln!("see `selfsim --help` and `selfsim <group> <command> --help`");
            }
            ExitCode::from(f.code as u8)
        }
    }
}
