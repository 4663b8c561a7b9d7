//! Triangulated polygons with a distinguished vertex `v0`.
//!
//! Vertices are `0..n`, `0` is the distinguished vertex; every triangle is
//! stored with its indices in ascending order.

use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Triangle = [usize; 3];

pub fn tri(a: usize, b: usize, c: usize) -> Triangle {
    let mut t = [a, b, c];
    t.sort_unstable();
    t
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawSubdivision")]
pub struct Subdivision {
    n: usize,
    triangles: BTreeSet<Triangle>,
}

#[derive(Deserialize)]
struct RawSubdivision {
    n: usize,
    triangles: Vec<Triangle>,
}

impl TryFrom<RawSubdivision> for Subdivision {
    type Error = Error;
    fn try_from(r: RawSubdivision) -> Result<Self> {
        Subdivision::new(r.n, r.triangles)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Law {
    Dot,
    Star,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FactorMode {
    Irreducible,
    Primary,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IsoMode {
    Strict,
    V0Reflection,
}

/// A factor occupying the labelled vertices `lo..=hi`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Factor {
    pub lo: usize,
    pub hi: usize,
    pub shape: Subdivision,
}

/// Four triangles `{root, x_i, x_{i+1}}` with apex `spokes[2]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Fan {
    pub root: usize,
    pub spokes: [usize; 5],
}

impl Fan {
    pub fn apex(&self) -> usize {
        self.spokes[2]
    }

    pub fn triangles(&self) -> [Triangle; 4] {
        let (r, x) = (self.root, self.spokes);
        [tri(r, x[0], x[1]), tri(r, x[1], x[2]), tri(r, x[2], x[3]), tri(r, x[3], x[4])]
    }

    pub fn vertices(&self) -> Vec<usize> {
        let mut v: Vec<usize> = self.spokes.to_vec();
        v.push(self.root);
        v.sort_unstable();
        v
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct CanonicalForm {
    pub n: usize,
    pub triangles: Vec<Triangle>,
    pub labels: Vec<u32>,
}

pub fn is_valid(n: usize, triangles: &BTreeSet<Triangle>) -> bool {
    if n < 2 {
        return false;
    }
    if n == 2 {
        return triangles.is_empty();
    }
    if triangles.len() != n - 2 {
        return false;
    }
    if triangles
        .iter()
        .any(|t| !(t[0] < t[1] && t[1] < t[2] && t[2] < n))
    {
        return false;
    }
    // peel ears of the current polygon; only a triangulation peels completely
    let mut poly: Vec<usize> = (0..n).collect();
    let mut left = triangles.clone();
    while poly.len() > 3 {
        let m = poly.len();
        let ear = (0..m).find(|&i| {
            left.contains(&tri(poly[(i + m - 1) % m], poly[i], poly[(i + 1) % m]))
        });
        match ear {
            Some(i) => {
                left.remove(&tri(poly[(i + m - 1) % m], poly[i], poly[(i + 1) % m]));
                poly.remove(i);
            }
            None => return false,
        }
    }
    left.len() == 1 && left.contains(&tri(poly[0], poly[1], poly[2]))
}

impl Subdivision {
    pub fn new(n: usize, triangles: impl IntoIterator<Item = Triangle>) -> Result<Self> {
        let triangles: BTreeSet<Triangle> =
            triangles.into_iter().map(|t| tri(t[0], t[1], t[2])).collect();
        if !is_valid(n, &triangles) {
            return Err(Error::InvalidSubdivision(format!(
                "{n} vertices, triangles {:?}",
                triangles
            )));
        }
        Ok(Subdivision { n, triangles })
    }

    pub(crate) fn from_parts(n: usize, triangles: BTreeSet<Triangle>) -> Self {
        debug_assert!(is_valid(n, &triangles), "{n} {triangles:?}");
        Subdivision { n, triangles }
    }

    pub fn digon() -> Self {
        Subdivision { n: 2, triangles: BTreeSet::new() }
    }

    /// All triangles at `v0`: the fan with `k` labelled vertices.
    pub fn fan_at_v0(k: usize) -> Self {
        let triangles = (1..k).map(|i| [0, i, i + 1]).collect();
        Subdivision { n: k + 1, triangles }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn triangles(&self) -> &BTreeSet<Triangle> {
        &self.triangles
    }

    pub fn contains(&self, t: Triangle) -> bool {
        self.triangles.contains(&t)
    }

    pub fn validate(&self) -> bool {
        is_valid(self.n, &self.triangles)
    }

    /// `{v_{i-1}, v_i, v_{i+1}}` is a triangle.
    pub fn has_consecutive(&self, i: usize) -> bool {
        i >= 1 && i + 1 < self.n && self.contains([i - 1, i, i + 1])
    }

    /// Middle vertices of triangles with three consecutive vertices.
    pub fn ears(&self) -> Vec<usize> {
        (1..self.n.saturating_sub(1))
            .filter(|&i| self.has_consecutive(i))
            .collect()
    }

    pub fn interior_triangles(&self) -> Vec<Triangle> {
        self.triangles
            .iter()
            .filter(|t| is_interior(t))
            .copied()
            .collect()
    }

    /// Ranges `(lo, hi)` of the irreducible factors.
    pub fn irreducible_ranges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        let mut lo = 1;
        for i in 1..self.n.saturating_sub(1) {
            if self.contains([0, i, i + 1]) {
                out.push((lo, i));
                lo = i + 1;
            }
        }
        out.push((lo, self.n - 1));
        out
    }

    /// Ranges of the primary factors of the irreducible factor `lo..=hi`.
    pub fn primary_ranges(&self, lo: usize, hi: usize) -> Vec<(usize, usize)> {
        let xs: BTreeSet<usize> = self
            .triangles
            .iter()
            .filter(|t| t[0] == 0 && lo <= t[1] && t[2] <= hi)
            .flat_map(|t| [t[1], t[2]])
            .collect();
        if xs.is_empty() {
            return vec![(lo, hi)];
        }
        let xs: Vec<usize> = xs.into_iter().collect();
        xs.windows(2).map(|w| (w[0], w[1])).collect()
    }

    /// Ranges of all primary factors, left to right.
    pub fn all_primary_ranges(&self) -> Vec<(usize, usize)> {
        self.irreducible_ranges()
            .into_iter()
            .flat_map(|(lo, hi)| self.primary_ranges(lo, hi))
            .collect()
    }

    /// The block on labelled vertices `lo..=hi` as a subdivision of its own.
    pub fn restrict(&self, lo: usize, hi: usize) -> Subdivision {
        let map = |v: usize| if v == 0 { 0 } else { v - lo + 1 };
        let triangles = self
            .triangles
            .iter()
            .filter(|t| t.iter().all(|&v| v == 0 || (lo..=hi).contains(&v)))
            .map(|t| tri(map(t[0]), map(t[1]), map(t[2])))
            .collect();
        Subdivision::from_parts(hi - lo + 2, triangles)
    }

    pub fn factorize(&self, mode: FactorMode) -> Vec<Factor> {
        let ranges = match mode {
            FactorMode::Irreducible => self.irreducible_ranges(),
            FactorMode::Primary => self.primary_ranges(1, self.n - 1),
        };
        ranges
            .into_iter()
            .map(|(lo, hi)| Factor { lo, hi, shape: self.restrict(lo, hi) })
            .collect()
    }

    /// First and last vertex of every irreducible factor, together with the
    /// vertices where primary factors meet.
    pub fn splitting_vertices(&self) -> BTreeSet<usize> {
        let mut s = BTreeSet::new();
        for (lo, hi) in self.irreducible_ranges() {
            s.insert(lo);
            s.insert(hi);
            for (p, q) in self.primary_ranges(lo, hi) {
                s.insert(p);
                s.insert(q);
            }
        }
        s
    }

    pub fn reflect(&self) -> Subdivision {
        let n = self.n;
        let m = |v: usize| if v == 0 { 0 } else { n - v };
        let triangles = self
            .triangles
            .iter()
            .map(|t| tri(m(t[0]), m(t[1]), m(t[2])))
            .collect();
        Subdivision { n, triangles }
    }

    pub fn neighbours(&self, v: usize) -> BTreeSet<usize> {
        self.triangles
            .iter()
            .filter(|t| t.contains(&v))
            .flat_map(|t| t.iter().copied())
            .filter(|&w| w != v)
            .collect()
    }

    /// The triangle on edge `{p, q}` other than `not`.
    pub fn across(&self, p: usize, q: usize, not: Triangle) -> Option<Triangle> {
        self.triangles
            .iter()
            .find(|t| t.contains(&p) && t.contains(&q) && **t != not)
            .copied()
    }

    pub fn find_fans(&self) -> Vec<Fan> {
        let mut out = Vec::new();
        for r in 0..self.n {
            let nb: Vec<usize> = self.neighbours(r).into_iter().collect();
            if nb.len() < 5 {
                continue;
            }
            for w in nb.windows(5) {
                if !(r < w[0] || r > w[4]) {
                    continue;
                }
                let fan = Fan { root: r, spokes: [w[0], w[1], w[2], w[3], w[4]] };
                let ts = fan.triangles();
                if ts.iter().all(|t| self.contains(*t))
                    && !is_interior(&ts[1])
                    && !is_interior(&ts[2])
                {
                    out.push(fan);
                }
            }
        }
        out
    }

    pub fn canonicalize(&self, labels: &[u32], mode: IsoMode) -> CanonicalForm {
        let a = CanonicalForm {
            n: self.n,
            triangles: self.triangles.iter().copied().collect(),
            labels: labels.to_vec(),
        };
        if mode == IsoMode::Strict {
            return a;
        }
        let b = CanonicalForm {
            n: self.n,
            triangles: self.reflect().triangles.into_iter().collect(),
            labels: labels.iter().rev().copied().collect(),
        };
        a.min(b)
    }
}

pub fn is_interior(t: &Triangle) -> bool {
    t[0] > 0 && t[0] + 1 < t[1] && t[1] + 1 < t[2]
}

pub fn compose(s1: &Subdivision, s2: &Subdivision, law: Law) -> Result<Subdivision> {
    let (n1, n2) = (s1.n, s2.n);
    if law == Law::Star && (n1 < 3 || n2 < 3) {
        return Err(Error::InvalidSubdivision(
            "star product needs two blocks with triangles".into(),
        ));
    }
    let shift = match law {
        Law::Dot => n1 - 1,
        Law::Star => n1 - 2,
    };
    let m = |v: usize| if v == 0 { 0 } else { v + shift };
    let mut triangles = s1.triangles.clone();
    triangles.extend(s2.triangles.iter().map(|t| tri(m(t[0]), m(t[1]), m(t[2]))));
    let n = match law {
        Law::Dot => {
            triangles.insert([0, n1 - 1, n1]);
            n1 + n2 - 1
        }
        Law::Star => n1 + n2 - 2,
    };
    Ok(Subdivision::from_parts(n, triangles))
}

/// `i + (k + 1 - j)` for `v_i = min W`, `v_j = max W`, `k + 1 = n`.
pub fn height(n: usize, w: &[usize]) -> Result<usize> {
    if w.is_empty() || w.contains(&0) {
        return Err(Error::BadHeightSet);
    }
    let lo = *w.iter().min().unwrap();
    let hi = *w.iter().max().unwrap();
    Ok(lo + n - hi)
}

fn triangulate(lo: usize, hi: usize, memo: &mut HashMap<(usize, usize), Vec<Vec<Triangle>>>) -> Vec<Vec<Triangle>> {
    if hi - lo < 2 {
        return vec![Vec::new()];
    }
    if let Some(v) = memo.get(&(lo, hi)) {
        return v.clone();
    }
    let mut out = Vec::new();
    for k in lo + 1..hi {
        let left = triangulate(lo, k, memo);
        let right = triangulate(k, hi, memo);
        for l in &left {
            for r in &right {
                let mut t = Vec::with_capacity(l.len() + r.len() + 1);
                t.extend_from_slice(l);
                t.extend_from_slice(r);
                t.push([lo, k, hi]);
                out.push(t);
            }
        }
    }
    memo.insert((lo, hi), out.clone());
    out
}

/// All triangulations of the `n`-gon, in a fixed order.
pub fn triangulations(n: usize) -> Vec<Subdivision> {
    if n < 2 {
        return Vec::new();
    }
    let mut memo = HashMap::new();
    let mut all: Vec<Subdivision> = triangulate(0, n - 1, &mut memo)
        .into_iter()
        .map(|ts| Subdivision::from_parts(n, ts.into_iter().collect()))
        .collect();
    all.sort();
    all
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sub(n: usize, ts: &[Triangle]) -> Subdivision {
        Subdivision::new(n, ts.iter().copied()).unwrap()
    }

    fn quad_t() -> Subdivision {
        sub(4, &[[0, 1, 3], [1, 2, 3]])
    }

    #[test]
    fn validity() {
        assert!(quad_t().validate());
        assert!(Subdivision::new(2, []).is_ok());
        assert!(Subdivision::new(4, [[0, 1, 3]]).is_err());
        assert!(Subdivision::new(4, [[0, 1, 2], [1, 2, 3]]).is_err());
        assert!(Subdivision::new(5, [[0, 1, 3], [1, 2, 4], [0, 3, 4]]).is_err());
    }

    #[test]
    fn products() {
        let d = Subdivision::digon();
        assert_eq!(compose(&d, &d, Law::Dot).unwrap(), sub(3, &[[0, 1, 2]]));
        assert_eq!(
            compose(&quad_t(), &d, Law::Dot).unwrap(),
            sub(5, &[[0, 1, 3], [1, 2, 3], [0, 3, 4]])
        );
        assert_eq!(
            compose(&quad_t(), &quad_t(), Law::Star).unwrap(),
            sub(6, &[[0, 1, 3], [1, 2, 3], [0, 3, 5], [3, 4, 5]])
        );
    }

    #[test]
    fn factors() {
        let f = Subdivision::fan_at_v0(4).factorize(FactorMode::Irreducible);
        assert_eq!(f.len(), 4);
        assert!(f.iter().all(|x| x.shape == Subdivision::digon()));
        let s = sub(5, &[[0, 1, 3], [1, 2, 3], [0, 3, 4]]);
        let f = s.factorize(FactorMode::Irreducible);
        assert_eq!(f.iter().map(|x| (x.lo, x.hi)).collect::<Vec<_>>(), vec![(1, 3), (4, 4)]);
        assert_eq!(f[0].shape, quad_t());
        let s = sub(6, &[[0, 1, 3], [1, 2, 3], [0, 3, 5], [3, 4, 5]]);
        assert_eq!(s.irreducible_ranges(), vec![(1, 5)]);
        let p = s.factorize(FactorMode::Primary);
        assert_eq!(p.len(), 2);
        assert!(p.iter().all(|x| x.shape == quad_t()));
    }

    #[test]
    fn interior() {
        let h = sub(6, &[[0, 1, 5], [1, 2, 3], [1, 3, 5], [3, 4, 5]]);
        assert_eq!(h.interior_triangles(), vec![[1, 3, 5]]);
        assert!(quad_t().interior_triangles().is_empty());
        assert!(Subdivision::fan_at_v0(4).interior_triangles().is_empty());
    }

    #[test]
    fn splitting() {
        assert_eq!(quad_t().splitting_vertices(), [1, 3].into());
        assert_eq!(Subdivision::fan_at_v0(4).splitting_vertices(), [1, 2, 3, 4].into());
        let s = sub(5, &[[0, 1, 3], [1, 2, 3], [0, 3, 4]]);
        assert_eq!(s.splitting_vertices(), [1, 3, 4].into());
    }

    #[test]
    fn fans() {
        let p = sub(
            9,
            &[[0, 1, 4], [1, 2, 3], [1, 3, 4], [0, 4, 5], [0, 5, 6], [0, 6, 8], [6, 7, 8]],
        );
        assert_eq!(p.find_fans(), vec![Fan { root: 0, spokes: [1, 4, 5, 6, 8] }]);
        assert!(quad_t().find_fans().is_empty());
        let pent = sub(5, &[[0, 1, 4], [1, 2, 3], [1, 3, 4]]);
        assert!(pent.find_fans().is_empty());
    }

    #[test]
    fn heights() {
        assert_eq!(height(10, &[3, 4, 5, 6, 7]).unwrap(), 6);
        assert_eq!(height(10, &[5]).unwrap(), 10);
        assert_eq!(height(6, &[1, 2, 3, 4, 5]).unwrap(), 2);
        assert!(height(6, &[0, 1]).is_err());
    }

    #[test]
    fn canonical() {
        let q = quad_t();
        assert_eq!(q.reflect(), q);
        let c = q.canonicalize(&[2, 2, 2], IsoMode::V0Reflection);
        assert_eq!(c.triangles, vec![[0, 1, 3], [1, 2, 3]]);
        let f = Subdivision::fan_at_v0(3);
        assert_eq!(
            f.canonicalize(&[2, 2, 2], IsoMode::Strict),
            f.canonicalize(&[2, 2, 2], IsoMode::V0Reflection)
        );
    }

    #[test]
    fn catalan() {
        let cat = [1, 1, 2, 5, 14, 42, 132, 429];
        for n in 3..=9 {
            assert_eq!(triangulations(n).len(), cat[n - 2]);
        }
    }

    #[test]
    fn json_shape() {
        let j = serde_json::to_string(&quad_t()).unwrap();
        assert_eq!(j, r#"{"n":4,"triangles":[[0,1,3],[1,2,3]]}"#);
        let back: Subdivision = serde_json::from_str(&j).unwrap();
        assert_eq!(back, quad_t());
        assert!(serde_json::from_str::<Subdivision>(r#"{"n":4,"triangles":[[0,1,3]]}"#).is_err());
    }
}
