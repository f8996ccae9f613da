//! Words in free groups and enumeration of conjugacy classes.
//!
//! A letter is encoded as `2 * generator + inverse`, so the total order on
//! letters is `a < A < b < B < ...` where uppercase denotes the inverse.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest supported rank (letters are displayed as `a..z`).
pub const MAX_RANK: usize = 26;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Letter(u16);

impl Letter {
    pub fn new(generator: usize, inverse: bool) -> Self {
        Letter((2 * generator + inverse as usize) as u16)
    }

    pub fn generator(self) -> usize {
        (self.0 / 2) as usize
    }

    pub fn is_inverse(self) -> bool {
        self.0 % 2 == 1
    }

    pub fn inverse(self) -> Self {
        Letter(self.0 ^ 1)
    }

    pub fn code(self) -> usize {
        self.0 as usize
    }

    pub fn from_code(code: usize) -> Self {
        Letter(code as u16)
    }
}

impl fmt::Display for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let base = if self.is_inverse() { b'A' } else { b'a' };
        write!(f, "{}", (base + self.generator() as u8) as char)
    }
}

/// A nonempty cyclically reduced word.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Word {
    letters: Vec<Letter>,
}

impl Word {
    /// Wraps letters that are already cyclically reduced.
    pub fn from_reduced(letters: Vec<Letter>) -> Result<Self> {
        if letters.is_empty() {
            return Err(Error::IdentityWord);
        }
        if !is_cyclically_reduced(&letters) {
            return Err(Error::InvalidArgument(format!(
                "{} is not cyclically reduced",
                display_letters(&letters)
            )));
        }
        Ok(Word { letters })
    }

    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    /// Smallest generator count able to spell the word.
    pub fn min_rank(&self) -> usize {
        self.letters.iter().map(|l| l.generator() + 1).max().unwrap_or(0)
    }

    pub fn inverse(&self) -> Word {
        Word {
            letters: self.letters.iter().rev().map(|l| l.inverse()).collect(),
        }
    }

    pub fn rotate(&self, k: usize) -> Word {
        let mut letters = self.letters.clone();
        let n = letters.len();
        letters.rotate_left(k % n);
        Word { letters }
    }

    /// Least cyclic rotation.
    pub fn canonical(&self) -> Word {
        let n = self.len();
        let best = (1..n).fold(0, |best, k| {
            if rotation_less(&self.letters, k, best) {
                k
            } else {
                best
            }
        });
        self.rotate(best)
    }

    pub fn is_canonical(&self) -> bool {
        (1..self.len()).all(|k| !rotation_less(&self.letters, k, 0))
    }

    /// `self^n` for n >= 1.
    pub fn power(&self, n: usize) -> Word {
        assert!(n >= 1);
        Word {
            letters: self.letters.repeat(n),
        }
    }

    /// Cyclic core of the free product `self * other`.
    pub fn mul(&self, other: &Word) -> Result<Word> {
        let mut raw = self.letters.clone();
        raw.extend_from_slice(&other.letters);
        cyclic_reduce(&raw)
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&display_letters(&self.letters))
    }
}

impl FromStr for Word {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let letters = parse_letters(s)?;
        cyclic_reduce(&letters)
    }
}

impl Serialize for Word {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Word {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

fn display_letters(letters: &[Letter]) -> String {
    letters.iter().map(|l| l.to_string()).collect()
}

/// Parses `aB` style strings; whitespace is ignored.
pub fn parse_letters(s: &str) -> Result<Vec<Letter>> {
    s.chars()
        .filter(|c| !c.is_whitespace())
        .map(|c| match c {
            'a'..='z' => Ok(Letter::new(c as usize - 'a' as usize, false)),
            'A'..='Z' => Ok(Letter::new(c as usize - 'A' as usize, true)),
            _ => Err(Error::WordParse(s.to_string())),
        })
        .collect()
}

// compares rotation k against rotation j
fn rotation_less(w: &[Letter], k: usize, j: usize) -> bool {
    let n = w.len();
    for i in 0..n {
        let (x, y) = (w[(k + i) % n], w[(j + i) % n]);
        if x != y {
            return x < y;
        }
    }
    false
}

pub fn is_reduced(letters: &[Letter]) -> bool {
    letters.windows(2).all(|p| p[1] != p[0].inverse())
}

pub fn is_cyclically_reduced(letters: &[Letter]) -> bool {
    is_reduced(letters)
        && match (letters.first(), letters.last()) {
            (Some(f), Some(l)) => letters.len() == 1 || *l != f.inverse(),
            _ => true,
        }
}

/// Free reduction followed by cyclic reduction; fails on the identity.
pub fn cyclic_reduce(raw: &[Letter]) -> Result<Word> {
    let mut stack: Vec<Letter> = Vec::with_capacity(raw.len());
    for &l in raw {
        if stack.last() == Some(&l.inverse()) {
            stack.pop();
        } else {
            stack.push(l);
        }
    }
    let (mut lo, mut hi) = (0, stack.len());
    while hi - lo >= 2 && stack[hi - 1] == stack[lo].inverse() {
        lo += 1;
        hi -= 1;
    }
    if lo == hi {
        return Err(Error::IdentityWord);
    }
    Ok(Word {
        letters: stack[lo..hi].to_vec(),
    })
}

/// Conjugacy-class representative: cyclic core, then least rotation.
pub fn conjugacy_representative(raw: &[Letter]) -> Result<Word> {
    Ok(cyclic_reduce(raw)?.canonical())
}

/// One canonical representative per conjugacy class of each length
/// `1..=max_len`, ordered by length then lexicographically.
pub fn enumerate_conjugacy_classes(rank: usize, max_len: usize) -> Result<Vec<Word>> {
    if !(1..=MAX_RANK).contains(&rank) {
        return Err(Error::InvalidArgument(format!("rank {rank} not in 1..={MAX_RANK}")));
    }
    let mut out = Vec::new();
    let mut buf = Vec::with_capacity(max_len);
    for n in 1..=max_len {
        extend_reduced(rank, n, &mut buf, &mut out);
    }
    Ok(out)
}

fn extend_reduced(rank: usize, n: usize, buf: &mut Vec<Letter>, out: &mut Vec<Word>) {
    if buf.len() == n {
        if is_cyclically_reduced(buf) {
            let w = Word {
                letters: buf.clone(),
            };
            if w.is_canonical() {
                out.push(w);
            }
        }
        return;
    }
    for code in 0..2 * rank {
        let l = Letter::from_code(code);
        if buf.last().is_some_and(|p| *p == l.inverse()) {
            continue;
        }
        // prune: a canonical word never starts later than its first letter
        if let Some(first) = buf.first() {
            if l < *first {
                continue;
            }
        }
        buf.push(l);
        extend_reduced(rank, n, buf, out);
        buf.pop();
    }
}

/// Number of conjugacy classes of cyclic length exactly `n`, by exhaustive
/// search over all `(2r)^n` letter strings.
pub fn conjugacy_count_oracle(rank: usize, n: usize) -> u64 {
    use std::collections::BTreeSet;
    let alphabet = 2 * rank;
    let total = (alphabet as u64).pow(n as u32);
    let mut seen: BTreeSet<Vec<usize>> = BTreeSet::new();
    let mut digits = vec![0usize; n];
    for mut idx in 0..total {
        for d in digits.iter_mut() {
            *d = (idx % alphabet as u64) as usize;
            idx /= alphabet as u64;
        }
        let cyclic_ok = (0..n).all(|i| digits[(i + 1) % n] != (digits[i] ^ 1)) || n == 1;
        if !cyclic_ok {
            continue;
        }
        let key = (0..n)
            .map(|k| {
                let mut r = digits.clone();
                r.rotate_left(k);
                r
            })
            .min()
            .unwrap();
        seen.insert(key);
    }
    seen.len() as u64
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(s: &str) -> Word {
        s.parse().unwrap()
    }

    #[test]
    fn reduce_examples() {
        assert_eq!(w("abBa").to_string(), "aa");
        assert_eq!(w("Aba").to_string(), "b");
        assert_eq!(w("abAB").to_string(), "abAB");
        assert!(matches!("aA".parse::<Word>(), Err(Error::IdentityWord)));
        assert!(matches!("".parse::<Word>(), Err(Error::IdentityWord)));
    }

    #[test]
    fn canonical_is_least_rotation() {
        assert_eq!(w("bAa").to_string(), "b");
        assert_eq!(w("Bab").canonical().to_string(), "a");
        assert_eq!(w("bab").canonical().to_string(), "abb");
        assert_eq!(w("BaB").canonical().to_string(), "aBB");
    }

    // necklace count through the Möbius-free totient sum
    fn necklace_formula(r: u64, n: u64) -> u64 {
        let phi = |m: u64| (1..=m).filter(|k| gcd(*k, m) == 1).count() as u64;
        let c = |d: u64| {
            let sign = if d.is_multiple_of(2) { 2 } else { 0 };
            (2 * r - 1).pow(d as u32) + 1 + (r - 1) * sign
        };
        let s: u64 = (1..=n).filter(|d| n.is_multiple_of(*d)).map(|d| phi(n / d) * c(d)).sum();
        s / n
    }

    fn gcd(a: u64, b: u64) -> u64 {
        if b == 0 {
            a
        } else {
            gcd(b, a % b)
        }
    }

    #[test]
    fn small_counts() {
        assert_eq!(conjugacy_count_oracle(2, 1), 4);
        assert_eq!(conjugacy_count_oracle(2, 2), 8);
        assert_eq!(conjugacy_count_oracle(3, 2), necklace_formula(3, 2));
        let e = enumerate_conjugacy_classes(2, 2).unwrap();
        assert_eq!(e.len(), 12);
        assert_eq!(e.iter().filter(|x| x.len() == 1).count(), 4);
    }

    #[test]
    fn enumeration_matches_oracles() {
        for rank in 2..=3 {
            let e = enumerate_conjugacy_classes(rank, 6).unwrap();
            for n in 1..=6 {
                let got = e.iter().filter(|x| x.len() == n).count() as u64;
                assert_eq!(got, conjugacy_count_oracle(rank, n), "rank {rank} n {n}");
                assert_eq!(got, necklace_formula(rank as u64, n as u64));
            }
        }
    }

    #[test]
    fn enumeration_sorted_and_deterministic() {
        let a = enumerate_conjugacy_classes(2, 5).unwrap();
        let b = enumerate_conjugacy_classes(2, 5).unwrap();
        assert_eq!(a, b);
        for p in a.windows(2) {
            assert!((p[0].len(), p[0].letters()) < (p[1].len(), p[1].letters()));
        }
    }

    #[test]
    fn inverse_classes_distinct() {
        let e = enumerate_conjugacy_classes(2, 3).unwrap();
        assert!(e.contains(&w("aab")));
        assert!(e.contains(&w("aab").inverse().canonical()));
        assert_ne!(w("aab"), w("aab").inverse().canonical());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn raw(rank: usize) -> impl Strategy<Value = Vec<Letter>> {
            prop::collection::vec((0..2 * rank).prop_map(Letter::from_code), 0..14)
        }

        proptest! {
            #[test]
            fn conjugates_share_representative(u in raw(3), c in raw(3), k in 0usize..20) {
                let Ok(core) = cyclic_reduce(&u) else { return Ok(()); };
                let mut conj: Vec<Letter> = c.clone();
                conj.extend_from_slice(&u);
                conj.extend(c.iter().rev().map(|l| l.inverse()));
                let other = cyclic_reduce(&conj).unwrap().rotate(k);
                prop_assert_eq!(core.canonical(), other.canonical());
            }

            #[test]
            fn reduce_is_idempotent(u in raw(2)) {
                if let Ok(x) = cyclic_reduce(&u) {
                    prop_assert!(is_cyclically_reduced(x.letters()));
                    prop_assert_eq!(cyclic_reduce(x.letters()).unwrap(), x);
                }
            }
        }
    }
}
