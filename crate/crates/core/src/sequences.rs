//! Positive integer sequences, the generator actions, the dual sequence `R`
//! and exact continued fractions.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::ser::SerializeStruct;
use serde::{Deserialize, Serialize, Serializer};

use crate::error::{Error, Result};

/// A finite sequence of integers >= 1. The empty sequence is written ε.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<u32>", into = "Vec<u32>")]
pub struct Sequence(Vec<u32>);

impl Sequence {
    pub fn new(entries: Vec<u32>) -> Result<Self> {
        if entries.contains(&0) {
            return Err(Error::ZeroEntry);
        }
        Ok(Sequence(entries))
    }

    pub fn empty() -> Self {
        Sequence(Vec::new())
    }

    pub fn entries(&self) -> &[u32] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<u32> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// 1-based access.
    pub fn get(&self, pos: usize) -> Option<u32> {
        pos.checked_sub(1).and_then(|i| self.0.get(i).copied())
    }

    pub fn in_w2(&self) -> bool {
        self.0.iter().all(|&x| x >= 2)
    }

    pub fn sum(&self) -> u64 {
        self.0.iter().map(|&x| x as u64).sum()
    }

    pub fn reverse(&self) -> Sequence {
        Sequence(self.0.iter().rev().copied().collect())
    }

    pub fn concat(&self, other: &Sequence) -> Sequence {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        Sequence(v)
    }

    pub(crate) fn from_vec_unchecked(v: Vec<u32>) -> Self {
        debug_assert!(!v.contains(&0));
        Sequence(v)
    }
}

impl TryFrom<Vec<u32>> for Sequence {
    type Error = Error;
    fn try_from(v: Vec<u32>) -> Result<Self> {
        Sequence::new(v)
    }
}

impl From<Sequence> for Vec<u32> {
    fn from(s: Sequence) -> Self {
        s.0
    }
}

impl fmt::Display for Sequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "ε");
        }
        write!(f, "(")?;
        for (i, x) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{x}")?;
        }
        write!(f, ")")
    }
}

impl FromStr for Sequence {
    type Err = Error;

    /// Comma separated integers; an empty string is ε.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.is_empty() {
            return Ok(Sequence::empty());
        }
        let v = s
            .split(',')
            .map(|t| {
                t.trim()
                    .parse::<u32>()
                    .map_err(|e| Error::Precondition(format!("bad entry {t:?}: {e}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Sequence::new(v)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Letter {
    Alpha,
    Beta,
    Gamma,
}

impl fmt::Display for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Letter::Alpha => "α",
            Letter::Beta => "β",
            Letter::Gamma => "γ",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    W,
    W2,
}

pub fn act(letter: Letter, side: Side, a: &Sequence) -> Sequence {
    let mut v = a.0.clone();
    match (letter, side) {
        (Letter::Alpha, Side::Left) => {
            if let Some(x) = v.last_mut() {
                *x += 1;
            }
        }
        (Letter::Alpha, Side::Right) => {
            if let Some(x) = v.first_mut() {
                *x += 1;
            }
        }
        (Letter::Beta, Side::Left) => v.push(1),
        (Letter::Beta, Side::Right) => v.insert(0, 1),
        (Letter::Gamma, Side::Left) => v.push(2),
        (Letter::Gamma, Side::Right) => v.insert(0, 2),
    }
    Sequence(v)
}

/// A word in the free monoid, written outermost letter first.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct MonoidWord(pub Vec<Letter>);

impl MonoidWord {
    pub fn letters(&self) -> &[Letter] {
        &self.0
    }

    pub fn valid_for_w2(&self) -> bool {
        !self.0.contains(&Letter::Beta)
    }

    /// Applies the word to ε as left actions, innermost letter first.
    pub fn apply(&self) -> Sequence {
        self.0
            .iter()
            .rev()
            .fold(Sequence::empty(), |s, &l| act(l, Side::Left, &s))
    }
}

impl fmt::Display for MonoidWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for l in &self.0 {
            write!(f, "{l}")?;
        }
        Ok(())
    }
}

pub fn decompose(a: &Sequence, mode: Mode) -> Result<MonoidWord> {
    if mode == Mode::W2 && !a.in_w2() {
        return Err(Error::NotInW2(a.to_string()));
    }
    let (floor, pop) = match mode {
        Mode::W => (1, Letter::Beta),
        Mode::W2 => (2, Letter::Gamma),
    };
    let mut v = a.0.clone();
    let mut word = Vec::new();
    while let Some(x) = v.last_mut() {
        if *x > floor {
            *x -= 1;
            word.push(Letter::Alpha);
        } else {
            v.pop();
            word.push(pop);
        }
    }
    Ok(MonoidWord(word))
}

/// Association between positions of `a` and positions of `R(a)`, 1-based.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PositionAssoc(pub BTreeSet<(usize, usize)>);

impl PositionAssoc {
    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.0.iter().copied()
    }

    pub fn transpose(&self) -> PositionAssoc {
        PositionAssoc(self.0.iter().map(|&(i, j)| (j, i)).collect())
    }

    pub fn contains(&self, i: usize, j: usize) -> bool {
        self.0.contains(&(i, j))
    }

    /// Right-hand positions associated with some left position in `lo..=hi`.
    pub fn image(&self, lo: usize, hi: usize) -> BTreeSet<usize> {
        self.0
            .iter()
            .filter(|(i, _)| (lo..=hi).contains(i))
            .map(|&(_, j)| j)
            .collect()
    }
}

fn r_w2(a: &[u32]) -> (Vec<u32>, BTreeSet<(usize, usize)>) {
    let mut assoc = BTreeSet::new();
    if a.is_empty() {
        return (Vec::new(), assoc);
    }
    // peel from the end, then replay from the innermost letter
    let mut v = a.to_vec();
    let mut peeled = Vec::new();
    while let Some(x) = v.last_mut() {
        if *x > 2 {
            *x -= 1;
            peeled.push(Letter::Alpha);
        } else {
            v.pop();
            peeled.push(Letter::Gamma);
        }
    }
    let mut letters = peeled.into_iter().rev();
    let first = letters.next();
    debug_assert_eq!(first, Some(Letter::Gamma));
    let mut seq = vec![2u32];
    let mut rseq = vec![2u32];
    assoc.insert((1, 1));
    for l in letters {
        let (ll, rl) = (seq.len(), rseq.len());
        match l {
            Letter::Alpha => {
                *seq.last_mut().unwrap() += 1;
                rseq.push(2);
                assoc.insert((ll, rl + 1));
            }
            _ => {
                seq.push(2);
                *rseq.last_mut().unwrap() += 1;
                assoc.insert((ll + 1, rl));
            }
        }
    }
    debug_assert_eq!(seq, a);
    (rseq, assoc)
}

/// The dual sequence `R(a)` with its position association.
pub fn r_dual(a: &Sequence) -> (Sequence, PositionAssoc) {
    let mut out = Vec::new();
    let mut assoc = BTreeSet::new();
    let mut offset_a = 0;
    for (ci, chunk) in a.0.split(|&x| x == 1).enumerate() {
        if ci > 0 {
            out.push(1);
            offset_a += 1;
            assoc.insert((offset_a, out.len()));
        }
        let (rr, asc) = r_w2(chunk);
        let offset_r = out.len();
        assoc.extend(asc.into_iter().map(|(i, j)| (i + offset_a, j + offset_r)));
        out.extend(rr);
        offset_a += chunk.len();
    }
    (Sequence(out), PositionAssoc(assoc))
}

pub fn r(a: &Sequence) -> Sequence {
    r_dual(a).0
}

/// Exact rational number in lowest terms.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Rational(BigRational);

impl Rational {
    pub fn new(n: i64, q: i64) -> Self {
        Rational(BigRational::new(n.into(), q.into()))
    }

    pub fn from_big(r: BigRational) -> Self {
        Rational(r)
    }

    pub fn numer(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denom(&self) -> &BigInt {
        self.0.denom()
    }

    pub fn as_big(&self) -> &BigRational {
        &self.0
    }

    pub fn abs(&self) -> Rational {
        Rational(self.0.abs())
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.denom().is_one() {
            write!(f, "{}", self.0.numer())
        } else {
            write!(f, "{}/{}", self.0.numer(), self.0.denom())
        }
    }
}

impl Serialize for Rational {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("Rational", 2)?;
        match (self.numer().to_i64(), self.denom().to_i64()) {
            (Some(n), Some(q)) => {
                st.serialize_field("n", &n)?;
                st.serialize_field("q", &q)?;
            }
            _ => {
                st.serialize_field("n", &self.numer().to_string())?;
                st.serialize_field("q", &self.denom().to_string())?;
            }
        }
        st.end()
    }
}

/// `[a_1, ..., a_k] = a_1 - 1/(a_2 - 1/(... - 1/a_k))`.
pub fn cf_eval(a: &Sequence) -> Result<Rational> {
    if a.is_empty() {
        return Err(Error::Empty);
    }
    if !a.in_w2() {
        return Err(Error::NotInW2(a.to_string()));
    }
    let mut it = a.0.iter().rev();
    let mut v = BigRational::from_integer(BigInt::from(*it.next().unwrap()));
    for &x in it {
        v = BigRational::from_integer(BigInt::from(x)) - v.recip();
    }
    Ok(Rational(v))
}

/// Hirzebruch-Jung expansion of n/q, n > q >= 1, gcd(n, q) = 1.
pub fn hj_expansion(n: i64, q: i64) -> Result<Sequence> {
    if !(n > q && q >= 1) || gcd(n, q) != 1 {
        return Err(Error::BadFraction { n, q });
    }
    let (mut n, mut q) = (n, q);
    let mut out = Vec::new();
    while q > 0 {
        let a = (n + q - 1) / q;
        out.push(a as u32);
        (n, q) = (q, a * q - n);
    }
    Ok(Sequence(out))
}

fn gcd(mut a: i64, mut b: i64) -> i64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a.abs()
}
