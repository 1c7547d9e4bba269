//! Acceptance criteria, one line each. Every criterion runs even when an
//! earlier one fails; the test fails at the end if any did.

mod common;

use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use selfsim::construction::{
    conjugate_count_lower_bound, fix_separation_witness, parabolic_approximation, trap_pipeline, TrapOutcome,
};
use selfsim::quotient::{image_subgroup, is_level_transitive, quotient_order, LevelAction};
use selfsim::rist::RistSearch;
use selfsim::subgroup::{fixed_vertices, in_rigid_stabilizer, minimal_non_fixing_level, SubgroupHandle};
use selfsim::{
    build_certificate, grigorchuk_preset, gupta_sidki_preset, regular_branch_vector_check, validate_certificate,
    AvoidSpec, Budgets, ElementOrder, Preset, Vertex, Word,
};

const SEED: u64 = 20_240_601;
const BUDGET: u64 = 1_000_000;

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn word(p: &Preset, s: &str) -> Word {
    p.parse_word(s).unwrap()
}

/// 1. is_identity agrees with depth-12 portrait triviality on 1000 words.
fn word_problem() -> Outcome {
    let g = grigorchuk_preset();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let relators = ["a b a b a b a b a b a b a b a b", "a d a d a d a d", "a c a c a c a c a c a c a c a c", "b c d"];
    let (mut disagree, mut trivial) = (0, 0);
    for i in 0..1000 {
        let w = if i % 2 == 0 {
            let len = rng.gen_range(0..=20);
            common::random_word(&g, &mut rng, len)
        } else {
            // conjugated relators: trivial elements that reduction does not see
            let ulen = rng.gen_range(0..=6);
            let u = common::random_word(&g, &mut rng, ulen);
            let r = word(&g, relators[rng.gen_range(0..relators.len())]);
            let w = g.conj(&u, &r);
            if w.letter_len() > 20 {
                common::random_word(&g, &mut rng, 20)
            } else {
                w
            }
        };
        let exact = g.is_identity(&w, BUDGET).map_err(|e| e.to_string())?;
        let portrait = g.portrait(&w, 12).is_trivial();
        trivial += exact as usize;
        disagree += (exact != portrait) as usize;
    }
    ensure(disagree == 0, || format!("{disagree} disagreements"))?;
    Ok(format!("1000 words, {trivial} trivial, 0 disagreements"))
}

/// 2. Orders of the generators and of ab, ac, ad, against the oracle.
fn known_orders() -> Outcome {
    let g = grigorchuk_preset();
    let fixtures = [("a", 2u64), ("b", 2), ("c", 2), ("d", 2), ("a b", 16), ("a c", 8), ("a d", 4)];
    for (w, want) in fixtures {
        let wd = word(&g, w);
        let oracle = common::perm_order(&common::oracle_perm(&g, &wd, 12));
        ensure(oracle == want, || format!("oracle gives {oracle} for {w}"))?;
        let got = g.element_order(&wd, 200_000).map_err(|e| e.to_string())?;
        ensure(got == ElementOrder::Finite(want.into()), || format!("order({w}) = {got}"))?;
    }
    Ok("a,b,c,d:2 ab:16 ac:8 ad:4".into())
}

/// 3. |G/Stab(n)| for n = 1..6, divisibility chain, level transitivity.
fn quotient_ladder() -> Outcome {
    let g = grigorchuk_preset();
    let mut orders = Vec::new();
    for n in 1..=6 {
        orders.push(quotient_order(&g, n).map_err(|e| e.to_string())?);
        ensure(is_level_transitive(&g, n).map_err(|e| e.to_string())?, || format!("not transitive at {n}"))?;
    }
    for w in orders.windows(2) {
        ensure(&w[1] % &w[0] == 0u32.into(), || format!("{} does not divide {}", w[0], w[1]))?;
    }
    Ok(orders.iter().map(|o| o.to_string()).collect::<Vec<_>>().join(" "))
}

/// 4. Rigid elements at 0 and 1 lie in K ∩ Stab(1), with sections in K,
/// at levels 3, 4, 5.
fn regular_branch() -> Outcome {
    let g = grigorchuk_preset();
    let k_gens: Vec<Word> = ["a b a b", "a b a d a b a d", "b a d a b a d a"].iter().map(|s| word(&g, s)).collect();
    let mut search = RistSearch::new(&g, 20_000, BUDGET);
    let mut samples: Vec<(Vertex, Word)> = Vec::new();
    for v in ["0", "1"] {
        let v: Vertex = v.parse().unwrap();
        let mut found = Vec::new();
        search
            .stream(&v, |w| {
                found.push(w.clone());
                Ok(found.len() < 6)
            })
            .map_err(|e| e.to_string())?;
        ensure(!found.is_empty(), || format!("no rigid element at {v}"))?;
        samples.extend(found.into_iter().map(|w| (v.clone(), w)));
    }
    for n in 3..=5 {
        let k_img = image_subgroup(&g, &k_gens, n).map_err(|e| e.to_string())?;
        let k_below = image_subgroup(&g, &k_gens, n - 1).map_err(|e| e.to_string())?;
        let act = LevelAction::new(&g, n).unwrap();
        let act_below = LevelAction::new(&g, n - 1).unwrap();
        for (v, w) in &samples {
            ensure(in_rigid_stabilizer(&g, w, v, BUDGET).unwrap(), || format!("not rigid at {v}"))?;
            ensure(k_img.contains(&act.image(w)), || format!("level {n}: element at {v} outside K"))?;
            let s = g.section_at(w, v);
            ensure(k_below.contains(&act_below.image(&s)), || format!("level {n}: section at {v} outside K"))?;
        }
    }
    Ok(format!("{} rigid elements inside K ∩ Stab(1) at levels 3,4,5", samples.len()))
}

fn trap_bytes(g: &Preset, out: &TrapOutcome) -> String {
    let chosen = out.chosen().map(|a| {
        serde_json::json!({
            "delta": a.delta.iter().map(|w| g.format_word(w)).collect::<Vec<_>>(),
            "generators": a.pullback.as_ref().map(|pb| pb.handle.generators().iter().map(|w| g.format_word(w)).collect::<Vec<_>>()),
            "report": a.report,
        })
    });
    serde_json::to_string_pretty(&chosen).unwrap()
}

fn trap_for(k: usize) -> Result<(TrapOutcome, Duration), String> {
    let g = grigorchuk_preset();
    let t = Instant::now();
    let out = trap_pipeline(&g, &[word(&g, "a")], k, 1, &Budgets::default()).map_err(|e| e.to_string())?;
    Ok((out, t.elapsed()))
}

/// 5. Q = ⟨a⟩, k = 1, 2, 3: the pipeline's H passes the level trap with l = 1.
fn level_trap() -> Outcome {
    let mut notes = Vec::new();
    for k in 1..=3 {
        let (out, took) = trap_for(k)?;
        ensure(took < Duration::from_secs(60), || format!("k={k} took {took:?}"))?;
        let a = out.chosen().ok_or_else(|| format!("k={k}: no candidate passed"))?;
        let rep = a.report.as_ref().unwrap();
        ensure(rep.fixes_level_k && rep.no_fixed_vertex, || format!("k={k}: {rep:?}"))?;
        notes.push(format!("k={k} {:.1}s", took.as_secs_f64()));
    }
    Ok(notes.join(", "))
}

fn certificate() -> Result<selfsim::WmCertificate, String> {
    let g = grigorchuk_preset();
    let avoid: Vec<AvoidSpec> = ["parabolic:00@6", "parabolic:01@6", "parabolic:10@6"]
        .iter()
        .map(|s| AvoidSpec::parse(&g, s).map_err(|e| e.to_string()))
        .collect::<Result<_, _>>()?;
    build_certificate(&g, &[word(&g, "a")], &avoid, 6, &Budgets::default(), SEED).map_err(|e| e.to_string())
}

/// 6. Three-stage certificate for Q = ⟨a⟩; every clause validates.
fn certificate_round_trip() -> Outcome {
    let cert = certificate()?;
    ensure(cert.stages.len() >= 3, || format!("{} stages", cert.stages.len()))?;
    let rep = validate_certificate(&cert).map_err(|e| e.to_string())?;
    ensure(rep.pass(), || format!("{:?}", rep.problems))?;
    ensure(rep.stages.iter().all(|s| s.clause2_level >= 4), || "clause (2) level below 4".into())?;
    let shape: Vec<String> = cert.stages.iter().map(|s| format!("({},{},{})", s.k, s.v, s.u)).collect();
    Ok(format!("{} stages {}, clause (2) verified at level {}", cert.stages.len(), shape.join(" "), rep.verification_level))
}

/// 7. Fix(gHg⁻¹) = g·Fix(H) on 200 random pairs, depth 4.
fn fix_equivariance() -> Outcome {
    let g = grigorchuk_preset();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 7);
    let stabilizing = ["b", "c", "d", "a b a", "a c a", "a d a"];
    let mut nonempty = 0;
    for _ in 0..200 {
        let ngens = rng.gen_range(1..=3);
        let gens: Vec<Word> = (0..ngens)
            .map(|_| {
                if rng.gen_bool(0.6) {
                    // products of level-1 stabilizer generators fix more
                    let m = rng.gen_range(1..=4);
                    let parts: Vec<Word> = (0..m).map(|_| word(&g, stabilizing[rng.gen_range(0..stabilizing.len())])).collect();
                    g.product(parts.iter())
                } else {
                    let len = rng.gen_range(1..=8);
                    common::random_word(&g, &mut rng, len)
                }
            })
            .collect();
        let len = rng.gen_range(0..=10);
        let x = common::random_word(&g, &mut rng, len);
        let h = SubgroupHandle::new(gens);
        let hc = SubgroupHandle::new(h.generators().iter().map(|w| g.conj(&x, w)).collect());
        let fix = fixed_vertices(&g, &h, 4);
        nonempty += !fix.is_empty() as usize;
        let mut moved: Vec<Vertex> = fix.iter().map(|v| g.apply_to_vertex(&x, v)).collect();
        moved.sort();
        ensure(fixed_vertices(&g, &hc, 4) == moved, || format!("mismatch for conjugator {}", g.format_word(&x)))?;
    }
    Ok(format!("200 pairs, {nonempty} with nonempty level-4 fixed sets, 0 failures"))
}

/// 8. The k = 1 and k = 2 constructions are told apart by fixed vertices.
fn non_conjugacy() -> Outcome {
    let g = grigorchuk_preset();
    let h = |k| -> Result<SubgroupHandle, String> {
        let (out, _) = trap_for(k)?;
        let a = out.chosen().ok_or_else(|| format!("k={k}: no construction"))?;
        Ok(a.pullback.as_ref().unwrap().handle.clone())
    };
    let (h1, h2) = (h(1)?, h(2)?);
    let w = fix_separation_witness(&g, &h1, &h2, 4)
        .map_err(|e| e.to_string())?
        .ok_or("inconclusive")?;
    Ok(format!("witness level {}, only H_{} fixes {}", w.level, w.fixer + 1, w.vertex))
}

/// 9. The parabolic approximation at 0 (level 3) has ≥ 2 distinct conjugates.
fn conjugate_count() -> Outcome {
    let g = grigorchuk_preset();
    let h = parabolic_approximation(&g, &"0".parse().unwrap(), 3).map_err(|e| e.to_string())?;
    let b = conjugate_count_lower_bound(&g, &h, 3, 4, &Budgets::default()).map_err(|e| e.to_string())?;
    ensure(b.count >= 2, || format!("bound {}", b.count))?;
    // exact image comparison of the conjugates f·H·f⁻¹, pairwise
    let mut images = Vec::new();
    for f in &b.witnesses {
        let conj: Vec<Word> = h.generators().iter().map(|x| g.conj(f, x)).collect();
        images.push(image_subgroup(&g, &conj, 3).unwrap());
    }
    ensure(images.len() == b.count, || "witness count differs from the bound".into())?;
    for i in 0..images.len() {
        for j in i + 1..images.len() {
            ensure(!images[i].same_as(&images[j]), || format!("conjugates {i} and {j} coincide"))?;
        }
    }
    let gamma = b.gamma.as_ref().map(|x| g.format_word(x)).unwrap_or_default();
    Ok(format!("bound {} via γ = {gamma}", b.count))
}

/// 10. Gupta–Sidki checks.
fn ggs_suite() -> Outcome {
    let gs = gupta_sidki_preset();
    for n in 1..=4 {
        ensure(is_level_transitive(&gs, n).unwrap(), || format!("not transitive at {n}"))?;
    }
    let ob = gs.element_order(&word(&gs, "b"), 200_000).map_err(|e| e.to_string())?;
    ensure(ob == ElementOrder::Finite(3u32.into()), || format!("order(b) = {ob}"))?;
    ensure(regular_branch_vector_check(3, &[1, -1]), || "vector check false".into())?;
    let l = minimal_non_fixing_level(&gs, &SubgroupHandle::new(vec![word(&gs, "a")]), 6);
    ensure(l == Some(1), || format!("minimal non-fixing level {l:?}"))?;
    Ok("transitive 1..4, order(b)=3, branch check true, fixlevel(⟨a⟩)=1".into())
}

/// 11. Reruns of 5 and 6 are byte-identical.
fn determinism() -> Outcome {
    let g = grigorchuk_preset();
    for k in 1..=3 {
        let a = trap_bytes(&g, &trap_for(k)?.0);
        let b = trap_bytes(&g, &trap_for(k)?.0);
        ensure(a == b, || format!("trap output for k={k} differs"))?;
    }
    let a = certificate()?.to_json();
    let b = certificate()?.to_json();
    ensure(a == b, || "certificates differ".into())?;
    Ok(format!("trap outputs and certificate ({} bytes) identical", a.len()))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome, u64); 11] = [
        ("word-problem consistency", word_problem, 30),
        ("known orders", known_orders, 5),
        ("quotient ladder", quotient_ladder, 60),
        ("regular-branch evidence", regular_branch, 60),
        ("level trap, k = 1..3", level_trap, 180),
        ("certificate round-trip", certificate_round_trip, 120),
        ("fix-equivariance", fix_equivariance, 30),
        ("non-conjugacy ladder", non_conjugacy, 30),
        ("conjugate-count bound", conjugate_count, 30),
        ("GGS suite", ggs_suite, 60),
        ("determinism", determinism, 600),
    ];
    let mut failed = 0;
    for (i, (name, run, limit)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let mut res = run();
        let took = t.elapsed();
        if res.is_ok() && took > Duration::from_secs(*limit) {
            res = Err(format!("over the {limit}s limit"));
        }
        match &res {
            Ok(detail) => println!("criterion {:>2} PASS [{:>7.2}s] {name}: {detail}", i + 1, took.as_secs_f64()),
            Err(why) => {
                failed += 1;
                println!("criterion {:>2} FAIL [{:>7.2}s] {name}: {why}", i + 1, took.as_secs_f64());
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
