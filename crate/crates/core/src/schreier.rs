//! Deterministic Schreier–Sims stabilizer chains for permutation groups.

use num_bigint::BigUint;
use num_traits::One;

use crate::perm::Perm;

#[derive(Clone, Debug)]
struct ChainLevel {
    point: usize,
    /// Strong generators fixing every earlier base point.
    gens: Vec<Perm>,
    orbit: Vec<usize>,
    /// `transversal[x]` maps the base point to `x`, for `x` in the orbit.
    transversal: Vec<Option<Perm>>,
}

impl ChainLevel {
    fn new(point: usize, n: usize) -> Self {
        let mut lvl = ChainLevel {
            point,
            gens: Vec::new(),
            orbit: Vec::new(),
            transversal: vec![None; n],
        };
        lvl.rebuild_orbit(n);
        lvl
    }

    fn rebuild_orbit(&mut self, n: usize) {
        self.transversal = vec![None; n];
        self.transversal[self.point] = Some(Perm::identity(n));
        self.orbit = vec![self.point];
        let mut i = 0;
        while i < self.orbit.len() {
            let x = self.orbit[i];
            for g in &self.gens {
                let y = g.apply(x);
                if self.transversal[y].is_none() {
                    let u = g.compose(self.transversal[x].as_ref().unwrap());
                    self.transversal[y] = Some(u);
                    self.orbit.push(y);
                }
            }
            i += 1;
        }
    }
}

/// A base and strong generating set, built deterministically: generators
/// are processed in the given order and new base points are always the
/// least moved point.
#[derive(Clone, Debug)]
pub struct StabChain {
    n: usize,
    levels: Vec<ChainLevel>,
}

impl StabChain {
    pub fn new(n: usize, gens: &[Perm]) -> Self {
        Self::with_base(n, gens, &[])
    }

    /// Chain whose base starts with `prefix`, so that the subgroup fixing
    /// `prefix[..m]` pointwise is available as [`StabChain::stabilizer_gens`].
    pub fn with_base(n: usize, gens: &[Perm], prefix: &[usize]) -> Self {
        let mut chain = StabChain {
            n,
            levels: prefix.iter().map(|&p| ChainLevel::new(p, n)).collect(),
        };
        let gens: Vec<Perm> = gens.iter().filter(|g| !g.is_identity()).cloned().collect();
        if gens.is_empty() {
            return chain;
        }
        for g in &gens {
            chain.ensure_moves_base(g);
        }
        for g in &gens {
            chain.levels[0].gens.push(g.clone());
        }
        // level l receives the generators fixing base[..l]
        for l in 1..chain.levels.len() {
            let fixed: Vec<usize> = chain.levels[..l].iter().map(|x| x.point).collect();
            let sub: Vec<Perm> = gens
                .iter()
                .filter(|g| fixed.iter().all(|&b| g.apply(b) == b))
                .cloned()
                .collect();
            chain.levels[l].gens = sub;
        }
        for l in 0..chain.levels.len() {
            chain.levels[l].rebuild_orbit(n);
        }
        chain.complete(chain.levels.len() - 1);
        chain
    }

    fn ensure_moves_base(&mut self, g: &Perm) {
        if self.levels.iter().all(|l| g.apply(l.point) == l.point) {
            let p = g.first_moved().expect("non-identity");
            self.levels.push(ChainLevel::new(p, self.n));
        }
    }

    fn complete(&mut self, start: usize) {
        let mut i = start as isize;
        'outer: while i >= 0 {
            let iu = i as usize;
            let orbit = self.levels[iu].orbit.clone();
            let gens = self.levels[iu].gens.clone();
            for &beta in &orbit {
                for g in &gens {
                    let gb = g.apply(beta);
                    let u_beta = self.levels[iu].transversal[beta].as_ref().unwrap();
                    let u_gb = self.levels[iu].transversal[gb].as_ref().unwrap();
                    let gu = g.compose(u_beta);
                    if &gu == u_gb {
                        continue;
                    }
                    let sg = u_gb.inverse().compose(&gu);
                    let (h, j) = self.strip_from(sg, iu + 1);
                    let stuck = j < self.levels.len();
                    if !stuck && h.is_identity() {
                        continue;
                    }
                    let j = if stuck {
                        j
                    } else {
                        let p = h.first_moved().unwrap();
                        self.levels.push(ChainLevel::new(p, self.n));
                        self.levels.len() - 1
                    };
                    for l in iu + 1..=j {
                        self.levels[l].gens.push(h.clone());
                        self.levels[l].rebuild_orbit(self.n);
                    }
                    i = j as isize;
                    continue 'outer;
                }
            }
            i -= 1;
        }
    }

    /// Sifts `g` from level `start`; returns the residue and the first level
    /// where sifting stopped (`levels.len()` if it went through).
    fn strip_from(&self, mut g: Perm, start: usize) -> (Perm, usize) {
        for (l, lvl) in self.levels.iter().enumerate().skip(start) {
            let beta = g.apply(lvl.point);
            match &lvl.transversal[beta] {
                Some(u) => g = u.inverse().compose(&g),
                None => return (g, l),
            }
        }
        (g, self.levels.len())
    }

    pub fn degree(&self) -> usize {
        self.n
    }

    pub fn contains(&self, g: &Perm) -> bool {
        let (h, j) = self.strip_from(g.clone(), 0);
        j == self.levels.len() && h.is_identity()
    }

    /// Adds a generator, returning `false` if it was already a member.
    pub fn extend(&mut self, g: &Perm) -> bool {
        if self.contains(g) {
            return false;
        }
        self.ensure_moves_base(g);
        self.levels[0].gens.push(g.clone());
        self.levels[0].rebuild_orbit(self.n);
        self.complete(0);
        true
    }

    pub fn order(&self) -> BigUint {
        self.levels
            .iter()
            .fold(BigUint::one(), |acc, l| acc * BigUint::from(l.orbit.len()))
    }

    pub fn base(&self) -> Vec<usize> {
        self.levels.iter().map(|l| l.point).collect()
    }

    pub fn orbit_sizes(&self) -> Vec<usize> {
        self.levels.iter().map(|l| l.orbit.len()).collect()
    }

    pub fn strong_generators(&self) -> &[Perm] {
        self.levels.first().map(|l| l.gens.as_slice()).unwrap_or(&[])
    }

    /// Generators of the pointwise stabilizer of the first `m` base points.
    pub fn stabilizer_gens(&self, m: usize) -> Vec<Perm> {
        if m >= self.levels.len() {
            // everything below the last level is trivial
            return Vec::new();
        }
        self.levels[m].gens.clone()
    }

    pub fn stabilizer_order(&self, m: usize) -> BigUint {
        self.levels
            .iter()
            .skip(m)
            .fold(BigUint::one(), |acc, l| acc * BigUint::from(l.orbit.len()))
    }

    pub fn is_trivial(&self) -> bool {
        self.levels.iter().all(|l| l.orbit.len() == 1)
    }
}

/// Orbits of the group generated by `gens` on `0..n`, each sorted, ordered
/// by least element.
pub fn orbits(n: usize, gens: &[Perm]) -> Vec<Vec<usize>> {
    let mut seen = vec![false; n];
    let mut out = Vec::new();
    for s in 0..n {
        if seen[s] {
            continue;
        }
        seen[s] = true;
        let mut orb = vec![s];
        let mut i = 0;
        while i < orb.len() {
            let x = orb[i];
            for g in gens {
                let y = g.apply(x);
                if !seen[y] {
                    seen[y] = true;
                    orb.push(y);
                }
            }
            i += 1;
        }
        orb.sort_unstable();
        out.push(orb);
    }
    out
}

/// Generators of the normal closure of `sub` in the group generated by
/// `gens`, together with its chain.
pub fn normal_closure(n: usize, gens: &[Perm], sub: &[Perm]) -> (Vec<Perm>, StabChain) {
    let mut ncg: Vec<Perm> = Vec::new();
    let mut chain = StabChain::new(n, &[]);
    for s in sub {
        if chain.extend(s) {
            ncg.push(s.clone());
        }
    }
    let mut i = 0;
    while i < ncg.len() {
        for g in gens {
            let c = g.conjugate(&ncg[i]);
            if chain.extend(&c) {
                ncg.push(c);
            }
        }
        i += 1;
    }
    (ncg, chain)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(v: &[u32]) -> Perm {
        Perm::from_images(v.to_vec()).unwrap()
    }

    #[test]
    fn symmetric_groups() {
        let cyc = p(&[1, 2, 3, 4, 0]);
        let tr = p(&[1, 0, 2, 3, 4]);
        let c = StabChain::new(5, &[cyc.clone(), tr.clone()]);
        assert_eq!(c.order(), BigUint::from(120u32));
        let c2 = StabChain::new(5, std::slice::from_ref(&cyc));
        assert_eq!(c2.order(), BigUint::from(5u32));
        assert!(!c2.contains(&tr));
        assert!(c2.contains(&cyc.pow(3)));
    }

    #[test]
    fn dihedral_and_extend() {
        let r = p(&[1, 2, 3, 0]);
        let s = p(&[0, 3, 2, 1]);
        let mut c = StabChain::new(4, std::slice::from_ref(&r));
        assert_eq!(c.order(), BigUint::from(4u32));
        assert!(c.extend(&s));
        assert_eq!(c.order(), BigUint::from(8u32));
        assert!(!c.extend(&r.compose(&s)));
    }

    #[test]
    fn base_prefix_stabilizer() {
        let r = p(&[1, 2, 3, 0]);
        let s = p(&[0, 3, 2, 1]);
        let c = StabChain::with_base(4, &[r, s.clone()], &[0]);
        assert_eq!(c.stabilizer_order(1), BigUint::from(2u32));
        let st = StabChain::new(4, &c.stabilizer_gens(1));
        assert!(st.contains(&s));
    }

    #[test]
    fn normal_closure_in_s4() {
        let a = p(&[1, 2, 3, 0]);
        let b = p(&[1, 0, 2, 3]);
        let dbl = p(&[1, 0, 3, 2]);
        let (_, nc) = normal_closure(4, &[a, b], &[dbl]);
        assert_eq!(nc.order(), BigUint::from(4u32));
    }
}
