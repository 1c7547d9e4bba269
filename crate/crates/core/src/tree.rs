//! Vertices of the d-regular rooted tree and the descendance order.
//!
//! A vertex is a finite sequence of letters in `0..d`; the root is the empty
//! sequence. Vertices of one level are enumerated in lexicographic order, which
//! coincides with the order of their base-d rank.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Vertex(Vec<u8>);

impl Vertex {
    pub fn root() -> Self {
        Vertex(Vec::new())
    }

    pub fn new(letters: Vec<u8>, degree: usize) -> Result<Self> {
        if letters.iter().any(|&x| x as usize >= degree) {
            return Err(Error::InvalidVertex {
                vertex: letters.iter().map(|x| x.to_string()).collect(),
                degree,
            });
        }
        Ok(Vertex(letters))
    }

    /// Parses the digit-string form ("" is the root).
    pub fn parse(s: &str, degree: usize) -> Result<Self> {
        let s = s.trim();
        let mut letters = Vec::with_capacity(s.len());
        for ch in s.chars() {
            match ch.to_digit(10) {
                Some(x) if (x as usize) < degree => letters.push(x as u8),
                _ => {
                    return Err(Error::InvalidVertex {
                        vertex: s.to_string(),
                        degree,
                    })
                }
            }
        }
        Ok(Vertex(letters))
    }

    /// The all-zeros vertex of level `k`.
    pub fn zeros(k: usize) -> Self {
        Vertex(vec![0; k])
    }

    pub fn level(&self) -> usize {
        self.0.len()
    }

    pub fn letters(&self) -> &[u8] {
        &self.0
    }

    pub fn into_letters(self) -> Vec<u8> {
        self.0
    }

    pub fn is_root(&self) -> bool {
        self.0.is_empty()
    }

    pub fn child(&self, x: u8) -> Self {
        let mut v = self.0.clone();
        v.push(x);
        Vertex(v)
    }

    pub fn concat(&self, suffix: &Vertex) -> Self {
        let mut v = self.0.clone();
        v.extend_from_slice(&suffix.0);
        Vertex(v)
    }

    pub fn prefix(&self, k: usize) -> Self {
        Vertex(self.0[..k.min(self.0.len())].to_vec())
    }

    /// True iff `self` lies in the subtree rooted at `v` (v is a prefix of self).
    pub fn is_below(&self, v: &Vertex) -> bool {
        vertex_leq(self, v)
    }

    /// Lexicographic rank among the vertices of its level.
    pub fn rank(&self, degree: usize) -> usize {
        self.0.iter().fold(0, |acc, &x| acc * degree + x as usize)
    }

    pub fn from_rank(mut rank: usize, level: usize, degree: usize) -> Self {
        let mut v = vec![0u8; level];
        for slot in v.iter_mut().rev() {
            *slot = (rank % degree) as u8;
            rank /= degree;
        }
        Vertex(v)
    }
}

impl fmt::Display for Vertex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for x in &self.0 {
            write!(f, "{x}")?;
        }
        Ok(())
    }
}

impl fmt::Debug for Vertex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "\"{self}\"")
    }
}

impl FromStr for Vertex {
    type Err = Error;

    /// Degree-agnostic parse (digits 0-9); callers check the degree.
    fn from_str(s: &str) -> Result<Self> {
        Vertex::parse(s, 10)
    }
}

impl Serialize for Vertex {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Vertex {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

pub fn check_degree(d: usize) -> Result<()> {
    if d < 2 {
        Err(Error::InvalidDegree(d))
    } else {
        Ok(())
    }
}

/// Number of vertices on level `n`.
pub fn level_size(d: usize, n: usize) -> usize {
    d.pow(n as u32)
}

/// All `d^n` vertices of level `n`, lexicographically ordered.
pub fn level_vertices(d: usize, n: usize) -> Result<Vec<Vertex>> {
    check_degree(d)?;
    Ok((0..level_size(d, n))
        .map(|r| Vertex::from_rank(r, n, d))
        .collect())
}

/// `w <= v` in the tree order: `w` lies in the subtree `T_v`.
pub fn vertex_leq(w: &Vertex, v: &Vertex) -> bool {
    w.0.starts_with(&v.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(s: &str) -> Vertex {
        Vertex::parse(s, 3).unwrap()
    }

    #[test]
    fn enumerates_levels() {
        assert_eq!(level_vertices(2, 0).unwrap(), vec![Vertex::root()]);
        let l2: Vec<String> = level_vertices(2, 2)
            .unwrap()
            .iter()
            .map(|x| x.to_string())
            .collect();
        assert_eq!(l2, ["00", "01", "10", "11"]);
        let l1: Vec<String> = level_vertices(3, 1)
            .unwrap()
            .iter()
            .map(|x| x.to_string())
            .collect();
        assert_eq!(l1, ["0", "1", "2"]);
        assert_eq!(level_vertices(1, 2), Err(Error::InvalidDegree(1)));
    }

    #[test]
    fn descendance_order() {
        assert!(vertex_leq(&v("010"), &v("01")));
        assert!(!vertex_leq(&v("01"), &v("010")));
        assert!(!vertex_leq(&v("10"), &v("0")));
        assert!(vertex_leq(&v("2"), &Vertex::root()));
    }

    #[test]
    fn rank_roundtrip() {
        for d in 2..5 {
            for n in 0..5 {
                for (i, x) in level_vertices(d, n).unwrap().iter().enumerate() {
                    assert_eq!(x.rank(d), i);
                }
            }
        }
    }

    #[test]
    fn rejects_out_of_range_letters() {
        assert!(Vertex::parse("012", 2).is_err());
        assert!(Vertex::parse("0a", 3).is_err());
        assert!(Vertex::new(vec![0, 2], 2).is_err());
    }
}
