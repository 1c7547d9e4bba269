//! Group words: products of generator powers.
//!
//! A [`Word`] is stored as a sequence of syllables `(generator, exponent)`.
//! Words produced by a [`Preset`](crate::Preset) are always in its canonical
//! reduced form, so structural equality is a cheap (sufficient, not necessary)
//! test for equality of group elements.

use crate::error::{Error, Result};

#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct Syllable {
    pub gen: u16,
    pub exp: i32,
}

impl Syllable {
    pub fn new(gen: usize, exp: i32) -> Self {
        Syllable {
            gen: gen as u16,
            exp,
        }
    }
}

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug, Default)]
pub struct Word(Vec<Syllable>);

impl Word {
    pub fn identity() -> Self {
        Word(Vec::new())
    }

    pub fn gen(g: usize) -> Self {
        Word(vec![Syllable::new(g, 1)])
    }

    /// Wraps syllables without reducing them. Callers that need canonical
    /// form pass the result through `Preset::reduce`.
    pub fn from_syllables(s: Vec<Syllable>) -> Self {
        Word(s)
    }

    pub fn syllables(&self) -> &[Syllable] {
        &self.0
    }

    pub fn into_syllables(self) -> Vec<Syllable> {
        self.0
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Number of generator letters, counting `x^e` as `|e|` letters.
    pub fn letter_len(&self) -> usize {
        self.0.iter().map(|s| s.exp.unsigned_abs() as usize).sum()
    }

    pub fn syllable_len(&self) -> usize {
        self.0.len()
    }
}

/// Splits word syntax into `(name, exponent)` tokens.
///
/// Tokens are separated by whitespace, `*` or `·`; each token is a generator
/// name with an optional `^e` exponent (e.g. `a b^-1 a^2`). The strings `""`
/// and `"1"` denote the empty word. When every generator name is a single
/// character, a token such as `abab` that is not itself a name is split into
/// one-character names.
pub fn tokenize(s: &str, names: &[String]) -> Result<Vec<(usize, i32)>> {
    let single_letter = names.iter().all(|n| n.chars().count() == 1);
    let lookup = |name: &str| names.iter().position(|n| n == name);
    let mut out = Vec::new();
    for raw in s.split(|c: char| c.is_whitespace() || c == '*' || c == '·') {
        if raw.is_empty() || raw == "1" {
            continue;
        }
        let (name, exp) = match raw.split_once('^') {
            Some((n, e)) => {
                let e: i32 = e
                    .trim_start_matches('(')
                    .trim_end_matches(')')
                    .parse()
                    .map_err(|_| Error::Parse(format!("bad exponent in {raw:?}")))?;
                (n, e)
            }
            None => (raw, 1),
        };
        if let Some(g) = lookup(name) {
            out.push((g, exp));
        } else if single_letter && !name.is_empty() {
            let chars: Vec<char> = name.chars().collect();
            for (i, ch) in chars.iter().enumerate() {
                let g = lookup(&ch.to_string()).ok_or_else(|| Error::UnknownSymbol(ch.to_string()))?;
                // the exponent binds to the last letter only: "ab^2" = a b^2
                out.push((g, if i + 1 == chars.len() { exp } else { 1 }));
            }
        } else {
            return Err(Error::UnknownSymbol(name.to_string()));
        }
    }
    Ok(out)
}

/// Prints a word in the file-format syntax; the identity prints as `1`.
pub fn format_word(w: &Word, names: &[String]) -> String {
    if w.is_empty() {
        return "1".to_string();
    }
    let parts: Vec<String> = w
        .syllables()
        .iter()
        .map(|s| {
            let name = &names[s.gen as usize];
            if s.exp == 1 {
                name.clone()
            } else {
                format!("{name}^{}", s.exp)
            }
        })
        .collect();
    parts.join(" ")
}
