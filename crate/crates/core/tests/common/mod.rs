//! Test helpers: seeded random words and hand-written tree actions that
//! share no code with the library's recursion tables.
#![allow(dead_code)]

use std::collections::HashSet;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use selfsim::{Preset, Word};

/// Random word of `len` letters over the preset's generators, with
/// exponents ±1 (or 1 when the generator has order 2).
pub fn random_word(p: &Preset, rng: &mut ChaCha8Rng, len: usize) -> Word {
    let names = p.names();
    let mut parts = Vec::with_capacity(len);
    for _ in 0..len {
        let g = rng.gen_range(0..names.len());
        let e = if p.generator_order(g) == Some(2) || rng.gen_bool(0.5) { 1 } else { -1 };
        parts.push(format!("{}^{}", names[g], e));
    }
    p.parse_word(&parts.join(" ")).unwrap()
}

/// Unit letters `(generator, ±1)` of a word, leftmost first.
fn letters(p: &Preset, w: &Word) -> Vec<(usize, i32)> {
    let mut out = Vec::new();
    for s in w.syllables() {
        let g = s.gen as usize;
        let e = match p.generator_order(g) {
            Some(m) => s.exp.rem_euclid(m as i32),
            None => s.exp,
        };
        out.extend(std::iter::repeat_n((g, e.signum()), e.unsigned_abs() as usize));
    }
    out
}

/// Grigorchuk generator `g` (a, b, c, d = 0..3) on a binary string.
pub fn grig_gen(g: usize, x: &mut [u8]) {
    let mut g = g;
    for i in 0..x.len() {
        match g {
            0 => {
                x[i] ^= 1;
                return;
            }
            1 => g = if x[i] == 0 { 0 } else { 2 },
            2 => g = if x[i] == 0 { 0 } else { 3 },
            3 => {
                if x[i] == 0 {
                    return;
                }
                g = 1;
            }
            _ => unreachable!(),
        }
    }
}

/// Gupta–Sidki: a = cyclic shift; b = (a, a⁻¹, b). `e` is ±1.
pub fn gs_gen(g: usize, e: i32, x: &mut [u8]) {
    for i in 0..x.len() {
        if g == 0 {
            x[i] = ((x[i] as i32 + e).rem_euclid(3)) as u8;
            return;
        }
        match x[i] {
            0 => {
                if let Some(y) = x.get_mut(i + 1) {
                    *y = ((*y as i32 + e).rem_euclid(3)) as u8;
                }
                return;
            }
            1 => {
                if let Some(y) = x.get_mut(i + 1) {
                    *y = ((*y as i32 - e).rem_euclid(3)) as u8;
                }
                return;
            }
            _ => {}
        }
    }
}

/// Oracle action of a word on a vertex (digit string), rightmost first.
pub fn oracle_apply(p: &Preset, w: &Word, v: &[u8]) -> Vec<u8> {
    let mut x = v.to_vec();
    for (g, e) in letters(p, w).into_iter().rev() {
        match p.degree() {
            2 => grig_gen(g, &mut x),
            3 => gs_gen(g, e, &mut x),
            _ => panic!("no oracle for degree {}", p.degree()),
        }
    }
    x
}

fn rank(x: &[u8], d: usize) -> usize {
    x.iter().fold(0, |r, &c| r * d + c as usize)
}

fn unrank(mut r: usize, n: usize, d: usize) -> Vec<u8> {
    let mut x = vec![0u8; n];
    for i in (0..n).rev() {
        x[i] = (r % d) as u8;
        r /= d;
    }
    x
}

/// Level-`n` permutation of a word, via the oracle action.
pub fn oracle_perm(p: &Preset, w: &Word, n: usize) -> Vec<u32> {
    let d = p.degree();
    let size = d.pow(n as u32);
    (0..size).map(|r| rank(&oracle_apply(p, w, &unrank(r, n, d)), d) as u32).collect()
}

pub fn perm_order(perm: &[u32]) -> u64 {
    let mut seen = vec![false; perm.len()];
    let mut l: u64 = 1;
    for s in 0..perm.len() {
        if seen[s] {
            continue;
        }
        let mut len = 0u64;
        let mut x = s;
        while !seen[x] {
            seen[x] = true;
            x = perm[x] as usize;
            len += 1;
        }
        l = num_integer::lcm(l, len);
    }
    l
}

/// Size of the permutation group generated by `gens`, by exhaustive closure.
pub fn closure_size(gens: &[Vec<u32>]) -> usize {
    let n = gens[0].len();
    let id: Vec<u32> = (0..n as u32).collect();
    let mut seen: HashSet<Vec<u32>> = HashSet::from([id.clone()]);
    let mut frontier = vec![id];
    while let Some(x) = frontier.pop() {
        for g in gens {
            let y: Vec<u32> = x.iter().map(|&i| g[i as usize]).collect();
            if seen.insert(y.clone()) {
                frontier.push(y);
            }
        }
    }
    seen.len()
}
