mod common;

use std::sync::OnceLock;

use proptest::prelude::*;
use selfsim::construction::fix_separation_witness;
use selfsim::quotient::{image_subgroup, quotient_order, LevelAction};
use selfsim::rist::RistSearch;
use selfsim::schreier::StabChain;
use selfsim::subgroup::{fixed_vertices, in_rigid_stabilizer, psi_sections, SubgroupHandle};
use selfsim::tree::{level_vertices, vertex_leq};
use selfsim::{grigorchuk_preset, gupta_sidki_preset, ElementOrder, Perm, Preset, Vertex, Word};

const BUDGET: u64 = 1_000_000;

fn grig() -> &'static Preset {
    static G: OnceLock<Preset> = OnceLock::new();
    G.get_or_init(grigorchuk_preset)
}

fn gs() -> &'static Preset {
    static G: OnceLock<Preset> = OnceLock::new();
    G.get_or_init(gupta_sidki_preset)
}

fn word_of(p: &Preset, letters: &[(usize, bool)]) -> Word {
    let names = p.names();
    let s: Vec<String> = letters
        .iter()
        .map(|&(g, neg)| format!("{}^{}", names[g % names.len()], if neg { -1 } else { 1 }))
        .collect();
    p.parse_word(&s.join(" ")).unwrap()
}

fn letters(max: usize) -> impl Strategy<Value = Vec<(usize, bool)>> {
    prop::collection::vec((0usize..4, any::<bool>()), 0..=max)
}

fn vertex(d: usize, max: usize) -> impl Strategy<Value = Vertex> {
    prop::collection::vec(0..d as u8, 0..=max).prop_map(move |x| Vertex::new(x, d).unwrap())
}

/// A preset and a word over it: Grigorchuk or Gupta–Sidki.
fn preset_word(max: usize) -> impl Strategy<Value = (&'static Preset, Word)> {
    (any::<bool>(), letters(max)).prop_map(|(which, l)| {
        let p = if which { grig() } else { gs() };
        (p, word_of(p, &l))
    })
}

fn suffix(p: &Preset, seed: &[u8]) -> Vertex {
    Vertex::new(seed.iter().map(|x| x % p.degree() as u8).collect(), p.degree()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn action_law((p, g) in preset_word(10), h in letters(10), x in prop::collection::vec(0u8..6, 0..8)) {
        let h = word_of(p, &h);
        let v = suffix(p, &x);
        prop_assert_eq!(p.apply_to_vertex(&p.mul(&g, &h), &v), p.apply_to_vertex(&g, &p.apply_to_vertex(&h, &v)));
    }

    #[test]
    fn section_cocycle((p, g) in preset_word(8), h in letters(8), x in prop::collection::vec(0u8..6, 0..4)) {
        let h = word_of(p, &h);
        let v = suffix(p, &x);
        let lhs = p.section_at(&p.mul(&g, &h), &v);
        let rhs = p.mul(&p.section_at(&g, &p.apply_to_vertex(&h, &v)), &p.section_at(&h, &v));
        prop_assert!(p.equal(&lhs, &rhs, BUDGET).unwrap());
    }

    #[test]
    fn portrait_agrees_with_action((p, g) in preset_word(12), x in prop::collection::vec(0u8..6, 0..6), extra in 0usize..3) {
        let v = suffix(p, &x);
        let por = p.portrait(&g, v.level() + extra);
        prop_assert_eq!(por.apply(&v).unwrap(), p.apply_to_vertex(&g, &v));
        prop_assert!(por.apply(&v.concat(&Vertex::zeros(extra + 1))).is_err());
    }

    #[test]
    fn inverse_law((p, g) in preset_word(12), x in prop::collection::vec(0u8..6, 0..8)) {
        let v = suffix(p, &x);
        let gi = p.inv(&g);
        prop_assert_eq!(p.apply_to_vertex(&gi, &p.apply_to_vertex(&g, &v)), v);
        let unreduced = Word::from_syllables(g.syllables().iter().chain(gi.syllables()).cloned().collect());
        prop_assert!(p.is_identity(&unreduced, BUDGET).unwrap());
    }

    #[test]
    fn word_syntax_round_trips((p, g) in preset_word(12)) {
        prop_assert_eq!(p.parse_word(&p.format_word(&g)).unwrap(), g);
    }

    #[test]
    fn torsion_orders_kill_level_images((p, g) in preset_word(8)) {
        let ElementOrder::Finite(n) = p.element_order(&g, 200_000).unwrap() else {
            return Err(TestCaseError::fail("both presets are torsion"));
        };
        let n: i64 = n.try_into().unwrap();
        let act = LevelAction::new(p, 5).unwrap();
        let img = act.image(&g);
        prop_assert!(img.pow(n).is_identity());
        // and the order is a power of the residue characteristic
        let q = p.degree() as i64;
        let mut m = n;
        while m % q == 0 { m /= q; }
        prop_assert_eq!(m, 1);
    }

    #[test]
    fn quotient_images_divide((p, g) in preset_word(8), h in letters(8), n in 1usize..4) {
        let h = word_of(p, &h);
        let small = image_subgroup(p, &[g.clone(), h.clone()], n).unwrap().order();
        let big = image_subgroup(p, &[g, h], n + 1).unwrap().order();
        prop_assert_eq!(&big % &small, 0u32.into());
        prop_assert_eq!(quotient_order(p, n).unwrap() % &small, 0u32.into());
        prop_assert_eq!(quotient_order(p, n + 1).unwrap() % quotient_order(p, n).unwrap(), 0u32.into());
    }

    #[test]
    fn fix_is_equivariant((p, g) in preset_word(8), h1 in letters(6), h2 in letters(6), n in 1usize..5) {
        let h = SubgroupHandle::new(vec![word_of(p, &h1), word_of(p, &h2)]);
        let conj = SubgroupHandle::new(h.generators().iter().map(|x| p.conj(&g, x)).collect());
        let mut moved: Vec<Vertex> = fixed_vertices(p, &h, n).iter().map(|v| p.apply_to_vertex(&g, v)).collect();
        moved.sort();
        prop_assert_eq!(fixed_vertices(p, &conj, n), moved);
        prop_assert!(fix_separation_witness(p, &h, &conj, n).unwrap().is_none());
    }

    #[test]
    fn psi_reassembles((p, w) in preset_word(8), k in 1usize..3, x in prop::collection::vec(0u8..6, 0..4)) {
        // w^m with m the order of w's level-k image lies in Stab(k)
        let m = LevelAction::new(p, k).unwrap().image(&w).order();
        let g = p.pow(&w, i64::try_from(m).unwrap());
        let sections = psi_sections(p, &g, k).unwrap();
        let tail = suffix(p, &x);
        for (v, s) in level_vertices(p.degree(), k).unwrap().iter().zip(&sections) {
            prop_assert_eq!(p.apply_to_vertex(&g, &v.concat(&tail)), v.concat(&p.apply_to_vertex(s, &tail)));
        }
    }

    #[test]
    fn rigid_elements_are_supported_below_their_vertex(idx in 0usize..4, x in letters(6)) {
        let (p, v, r) = &rigid_samples()[idx];
        let g = word_of(p, &x);
        let y = p.conj(&g, r);
        let gv = p.apply_to_vertex(&g, v);
        prop_assert!(in_rigid_stabilizer(p, &y, &gv, BUDGET).unwrap());
        for u in level_vertices(p.degree(), 5).unwrap() {
            if !vertex_leq(&u, &gv) {
                prop_assert_eq!(p.apply_to_vertex(&y, &u), u);
            }
        }
    }

    #[test]
    fn vertex_encodings_round_trip(v in vertex(3, 8)) {
        prop_assert_eq!(Vertex::from_rank(v.rank(3), v.level(), 3), v.clone());
        prop_assert_eq!(Vertex::parse(&v.to_string(), 3).unwrap(), v.clone());
        for k in 0..=v.level() {
            prop_assert!(vertex_leq(&v, &v.prefix(k)));
        }
    }

    #[test]
    fn schreier_sims_counts_the_closure(imgs in prop::collection::vec(Just((0u32..6).collect::<Vec<_>>()).prop_shuffle(), 1..4)) {
        let gens: Vec<Perm> = imgs.iter().map(|x| Perm::from_images(x.clone()).unwrap()).collect();
        let chain = StabChain::new(6, &gens);
        prop_assert_eq!(chain.order(), common::closure_size(&imgs).into());
        for g in &gens {
            prop_assert!(chain.contains(g));
        }
    }
}

/// Rigid elements found once: (preset, vertex, element).
fn rigid_samples() -> &'static [(&'static Preset, Vertex, Word)] {
    static S: OnceLock<Vec<(&'static Preset, Vertex, Word)>> = OnceLock::new();
    S.get_or_init(|| {
        let mut out = Vec::new();
        for (p, v) in [(grig(), "0"), (grig(), "10"), (gs(), "2"), (gs(), "01")] {
            let v: Vertex = Vertex::parse(v, p.degree()).unwrap();
            let w = RistSearch::new(p, 20_000, BUDGET).find(&v).unwrap().unwrap();
            out.push((p, v, w));
        }
        out
    })
}
