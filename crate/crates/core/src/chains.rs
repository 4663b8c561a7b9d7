//! Chain graphs: blow-up and blow-down, type T recognition, discrepancies.

use std::fmt;
use std::fmt::Write as _;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sequences::{Rational, Sequence};

/// A chain of rational curves; weight `c` at a node means self-intersection `-c`.
/// Positions are 1-based throughout.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<u32>", into = "Vec<u32>")]
pub struct ChainGraph(Vec<u32>);

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum TKind {
    NotT,
    FirstKind,
    SecondKind,
}

impl TKind {
    pub fn is_t(self) -> bool {
        self != TKind::NotT
    }
}

impl ChainGraph {
    pub fn new(weights: Vec<u32>) -> Result<Self> {
        if weights.contains(&0) {
            return Err(Error::ZeroEntry);
        }
        Ok(ChainGraph(weights))
    }

    pub fn weights(&self) -> &[u32] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_minimal(&self) -> bool {
        !self.0.contains(&1)
    }

    pub fn minus_one_positions(&self) -> Vec<usize> {
        (1..=self.len()).filter(|&p| self.0[p - 1] == 1).collect()
    }

    pub fn as_sequence(&self) -> Sequence {
        Sequence::from_vec_unchecked(self.0.clone())
    }

    /// Sub-chain on positions `lo..=hi`.
    pub fn slice(&self, lo: usize, hi: usize) -> ChainGraph {
        ChainGraph(self.0[lo - 1..hi].to_vec())
    }

    pub fn blow_up(&self, gap: usize) -> Result<ChainGraph> {
        let len = self.len();
        if gap == 0 || gap >= len {
            return Err(Error::GapOutOfRange { gap, len });
        }
        let mut v = Vec::with_capacity(len + 1);
        v.extend_from_slice(&self.0[..gap]);
        v[gap - 1] += 1;
        v.push(1);
        v.push(self.0[gap] + 1);
        v.extend_from_slice(&self.0[gap + 1..]);
        Ok(ChainGraph(v))
    }

    pub fn blow_down(&self, pos: usize) -> Result<ChainGraph> {
        let len = self.len();
        if pos == 0 || pos > len {
            return Err(Error::PositionOutOfRange { pos, len });
        }
        let weight = self.0[pos - 1];
        if weight != 1 {
            return Err(Error::NotMinusOne { pos, weight });
        }
        let mut v = self.0.clone();
        let i = pos - 1;
        for k in [i.wrapping_sub(1), i + 1] {
            if k < len {
                if v[k] == 1 {
                    return Err(Error::DegenerateBlowDown { pos });
                }
                v[k] -= 1;
            }
        }
        v.remove(i);
        Ok(ChainGraph(v))
    }

    /// Blows down the leftmost -1 node until none is left.
    pub fn contract_minimal(&self) -> Result<ChainGraph> {
        let mut c = self.clone();
        while let Some(i) = c.0.iter().position(|&x| x == 1) {
            c = c.blow_down(i + 1)?;
        }
        Ok(c)
    }

    pub fn type_t_kind(&self) -> TKind {
        t_kind(&self.0)
    }

    /// Solves `-c_i d_i + d_{i-1} + d_{i+1} = c_i - 2` exactly.
    pub fn discrepancies(&self) -> Result<Vec<Rational>> {
        if self.is_empty() {
            return Err(Error::Empty);
        }
        if !self.is_minimal() {
            return Err(Error::HasMinusOne);
        }
        let n = self.len();
        let int = |x: i64| BigRational::from_integer(BigInt::from(x));
        // forward elimination on the tridiagonal system (off-diagonals are 1)
        let mut diag: Vec<BigRational> = Vec::with_capacity(n);
        let mut rhs: Vec<BigRational> = Vec::with_capacity(n);
        for (i, &c) in self.0.iter().enumerate() {
            let mut d = int(-(c as i64));
            let mut b = int(c as i64 - 2);
            if i > 0 {
                let m = diag[i - 1].recip();
                d -= &m;
                b -= &rhs[i - 1] * &m;
            }
            diag.push(d);
            rhs.push(b);
        }
        let mut x = vec![BigRational::zero(); n];
        for i in (0..n).rev() {
            let mut b = rhs[i].clone();
            if i + 1 < n {
                b -= &x[i + 1];
            }
            x[i] = b / &diag[i];
        }
        Ok(x.into_iter().map(Rational::from_big).collect())
    }

    pub fn to_dot(&self) -> String {
        let mut s = String::from("graph chain {\n");
        for (i, w) in self.0.iter().enumerate() {
            let _ = writeln!(s, "  n{} [label=\"-{}\"];", i + 1, w);
        }
        for i in 1..self.len() {
            let _ = writeln!(s, "  n{} -- n{};", i, i + 1);
        }
        s.push_str("}\n");
        s
    }
}

/// Peels the end-extension moves off `c` without allocating.
pub(crate) fn t_kind(c: &[u32]) -> TKind {
    let (mut lo, mut hi) = (0, c.len());
    // pending decrements of the current first and last entries
    let (mut df, mut dl) = (0i64, 0i64);
    let mut kind = TKind::FirstKind;
    loop {
        match hi - lo {
            0 => return TKind::NotT,
            1 => {
                return if c[lo] as i64 - df - dl == 4 { kind } else { TKind::NotT };
            }
            _ => {}
        }
        let f = c[lo] as i64 - df;
        let l = c[hi - 1] as i64 - dl;
        if f == 3 && l == 3 && c[lo + 1..hi - 1].iter().all(|&x| x == 2) {
            return kind;
        }
        if f == 2 && l >= 3 {
            lo += 1;
            df = 0;
            dl += 1;
        } else if l == 2 && f >= 3 {
            hi -= 1;
            dl = 0;
            df += 1;
        } else {
            return TKind::NotT;
        }
        kind = TKind::SecondKind;
    }
}

impl TryFrom<Vec<u32>> for ChainGraph {
    type Error = Error;
    fn try_from(v: Vec<u32>) -> Result<Self> {
        ChainGraph::new(v)
    }
}

impl From<ChainGraph> for Vec<u32> {
    fn from(c: ChainGraph) -> Self {
        c.0
    }
}

impl From<Sequence> for ChainGraph {
    fn from(s: Sequence) -> Self {
        ChainGraph(s.into_vec())
    }
}

impl fmt::Display for ChainGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.as_sequence().fmt(f)
    }
}

impl FromStr for ChainGraph {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(s.parse::<Sequence>()?.into())
    }
}
