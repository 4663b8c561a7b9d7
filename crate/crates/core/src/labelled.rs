//! Labelled subdivisions: degrees, saturation, the family of T-shapes and
//! membership in the sets S, M and P.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::chains::ChainGraph;
use crate::error::{Error, Result};
use crate::polygon::{triangulations, tri, Fan, Subdivision, Triangle};
use crate::sequences::{r, Sequence};

/// A subdivision with labels on `v_1 .. v_{n-1}`; `v0` is never labelled.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawLabelled", into = "RawLabelled")]
pub struct LabelledSubdivision {
    shape: Subdivision,
    labels: Sequence,
}

#[derive(Serialize, Deserialize)]
struct RawLabelled {
    #[serde(flatten)]
    shape: Subdivision,
    labels: Sequence,
}

impl TryFrom<RawLabelled> for LabelledSubdivision {
    type Error = Error;
    fn try_from(r: RawLabelled) -> Result<Self> {
        LabelledSubdivision::new(r.shape, r.labels)
    }
}

impl From<LabelledSubdivision> for RawLabelled {
    fn from(l: LabelledSubdivision) -> Self {
        RawLabelled { shape: l.shape, labels: l.labels }
    }
}

/// A T-subdivision together with its central vertex.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TSubdivision {
    #[serde(flatten)]
    pub element: LabelledSubdivision,
    pub central: usize,
}

/// `labels = α^ell (core) α^r`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TFactorDecomposition {
    pub ell: u32,
    pub core: Sequence,
    pub r: u32,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "condition", rename_all = "snake_case")]
pub enum PViolation {
    InteriorTriangle { triangle: Triangle },
    Unsaturated { vertex: usize },
    SmallLabelInFactor { vertex: usize },
    LabelOneAtEnd { vertex: usize },
    LabelOneNeighbourNotT { vertex: usize },
    LabelOneFactorsTooSmall { vertex: usize },
}

impl PViolation {
    /// 1 to 4, the failing condition of the P criterion.
    pub fn condition(&self) -> u8 {
        match self {
            PViolation::InteriorTriangle { .. } => 1,
            PViolation::Unsaturated { .. } => 2,
            PViolation::SmallLabelInFactor { .. } => 3,
            _ => 4,
        }
    }
}

impl fmt::Display for PViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PViolation::InteriorTriangle { triangle } => {
                write!(f, "interior triangle {triangle:?}")
            }
            PViolation::Unsaturated { vertex } => write!(f, "v{vertex} unsaturated"),
            PViolation::SmallLabelInFactor { vertex } => {
                write!(f, "label < 2 in the irreducible factor starting at v{vertex}")
            }
            PViolation::LabelOneAtEnd { vertex } => write!(f, "label 1 at end vertex v{vertex}"),
            PViolation::LabelOneNeighbourNotT { vertex } => {
                write!(f, "a neighbour factor of v{vertex} is not a T-shape")
            }
            PViolation::LabelOneFactorsTooSmall { vertex } => {
                write!(f, "both neighbour factors of v{vertex} have at most 4 vertices")
            }
        }
    }
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn find(&mut self, mut x: usize) -> usize {
        while self.0[x] != x {
            self.0[x] = self.0[self.0[x]];
            x = self.0[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (a, b) = (self.find(a), self.find(b));
        self.0[a] = b;
    }
}

impl LabelledSubdivision {
    pub fn new(shape: Subdivision, labels: Sequence) -> Result<Self> {
        if labels.len() + 1 != shape.n() {
            return Err(Error::LabelCount { labels: labels.len(), vertices: shape.n() });
        }
        Ok(LabelledSubdivision { shape, labels })
    }

    pub fn shape(&self) -> &Subdivision {
        &self.shape
    }

    pub fn labels(&self) -> &Sequence {
        &self.labels
    }

    pub fn n(&self) -> usize {
        self.shape.n()
    }

    /// Label of `v_i`, `i >= 1`.
    pub fn label(&self, i: usize) -> u32 {
        self.labels.entries()[i - 1]
    }

    fn has_one(&self, t: &Triangle) -> bool {
        t.iter().any(|&v| v > 0 && self.label(v) == 1)
    }

    /// `deg(v_i)` at index `i - 1`.
    pub fn degrees(&self) -> Vec<u32> {
        let ts: Vec<Triangle> = self.shape.triangles().iter().copied().collect();
        let mut uf = UnionFind((0..ts.len()).collect());
        let mut by_edge: HashMap<(usize, usize), usize> = HashMap::new();
        for (k, t) in ts.iter().enumerate() {
            for (a, b) in [(t[0], t[1]), (t[0], t[2]), (t[1], t[2])] {
                if let Some(&o) = by_edge.get(&(a, b)) {
                    if self.has_one(t) || self.has_one(&ts[o]) {
                        uf.union(k, o);
                    }
                } else {
                    by_edge.insert((a, b), k);
                }
            }
        }
        let mut classes: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); self.n()];
        for (k, t) in ts.iter().enumerate() {
            let c = uf.find(k);
            for &v in t {
                classes[v].insert(c);
            }
        }
        classes[1..].iter().map(|s| s.len() as u32).collect()
    }

    pub fn defects(&self) -> Vec<i64> {
        self.degrees()
            .iter()
            .zip(self.labels.entries())
            .map(|(&d, &a)| a as i64 - d as i64)
            .collect()
    }

    /// Membership in S.
    pub fn is_admissible(&self) -> bool {
        self.defects().iter().all(|&d| d >= 0)
    }

    /// Membership in M.
    pub fn in_m(&self) -> bool {
        self.labels.in_w2() && self.is_admissible()
    }

    pub fn saturated(&self, i: usize) -> bool {
        let deg = self.degrees();
        let split = self.shape.splitting_vertices();
        self.saturated_with(i, &deg, &split)
    }

    fn saturated_with(&self, i: usize, deg: &[u32], split: &BTreeSet<usize>) -> bool {
        if self.label(i) == deg[i - 1] {
            return true;
        }
        if split.contains(&i) {
            let left_ok = i == 1 || self.label(i - 1) != 1;
            let right_ok = i + 1 >= self.n() || self.label(i + 1) != 1;
            if left_ok && right_ok {
                return true;
            }
        }
        self.shape.has_consecutive(i)
    }

    pub fn unsaturated(&self) -> Vec<usize> {
        let deg = self.degrees();
        let split = self.shape.splitting_vertices();
        (1..self.n())
            .filter(|&i| !self.saturated_with(i, &deg, &split))
            .collect()
    }

    pub fn restrict(&self, lo: usize, hi: usize) -> LabelledSubdivision {
        LabelledSubdivision {
            shape: self.shape.restrict(lo, hi),
            labels: Sequence::from_vec_unchecked(self.labels.entries()[lo - 1..hi].to_vec()),
        }
    }

    /// Label-1 vertices `j` for which `{v0, v_j}` is not an irreducible factor.
    pub fn bad_ones(&self) -> Vec<usize> {
        let irr = self.shape.irreducible_ranges();
        (1..self.n())
            .filter(|&j| self.label(j) == 1 && !irr.contains(&(j, j)))
            .collect()
    }

    /// Fans with label-1 apex whose other labelled vertices carry labels >= 2.
    pub fn label_one_fans(&self, apex: usize) -> Vec<Fan> {
        self.shape
            .find_fans()
            .into_iter()
            .filter(|f| {
                f.apex() == apex
                    && self.label(apex) == 1
                    && f.vertices()
                        .iter()
                        .all(|&v| v == 0 || v == apex || self.label(v) >= 2)
            })
            .collect()
    }

    pub fn p_violation(&self) -> Option<PViolation> {
        if let Some(t) = self.shape.interior_triangles().first() {
            return Some(PViolation::InteriorTriangle { triangle: *t });
        }
        if let Some(&v) = self.unsaturated().first() {
            return Some(PViolation::Unsaturated { vertex: v });
        }
        let irr = self.shape.irreducible_ranges();
        for &(lo, hi) in &irr {
            if hi > lo && self.labels.entries()[lo - 1..hi].iter().any(|&x| x < 2) {
                return Some(PViolation::SmallLabelInFactor { vertex: lo });
            }
        }
        let prim = self.shape.all_primary_ranges();
        for j in 1..self.n() {
            if self.label(j) != 1 {
                continue;
            }
            if j == 1 || j + 1 == self.n() {
                return Some(PViolation::LabelOneAtEnd { vertex: j });
            }
            let left = prim
                .iter()
                .filter(|p| (p.0..=p.1).contains(&(j - 1)))
                .max_by_key(|p| p.1);
            let right = prim
                .iter()
                .filter(|p| (p.0..=p.1).contains(&(j + 1)))
                .min_by_key(|p| p.0);
            let (Some(&(l0, l1)), Some(&(r0, r1))) = (left, right) else {
                return Some(PViolation::LabelOneNeighbourNotT { vertex: j });
            };
            let sl = self.shape.restrict(l0, l1);
            let sr = self.shape.restrict(r0, r1);
            if t_shape(&sl).is_none() || t_shape(&sr).is_none() {
                return Some(PViolation::LabelOneNeighbourNotT { vertex: j });
            }
            if sl.n() <= 4 && sr.n() <= 4 {
                return Some(PViolation::LabelOneFactorsTooSmall { vertex: j });
            }
        }
        None
    }

    pub fn in_p(&self) -> bool {
        self.is_admissible() && self.p_violation().is_none()
    }

    /// Conditions 1 to 3 of the P criterion.
    pub fn p_conditions_123(&self) -> bool {
        self.p_violation().is_none_or(|v| v.condition() == 4)
    }

    pub fn is_good(&self) -> bool {
        let ones: Vec<usize> = (1..self.n()).filter(|&j| self.label(j) == 1).collect();
        for &j in &ones {
            let ok = self.shape.find_fans().iter().any(|f| {
                f.apex() == j && (!f.vertices().contains(&0) || f.root == 0)
            });
            if !ok {
                return false;
            }
        }
        if let Some(PViolation::LabelOneAtEnd { .. })
        | Some(PViolation::LabelOneNeighbourNotT { .. })
        | Some(PViolation::LabelOneFactorsTooSmall { .. }) = self.p_violation()
        {
            return false;
        }
        match crate::moves::violating_vertex(self) {
            Some(v) => ones.iter().all(|&j| j <= v.j),
            None => true,
        }
    }

    pub fn canonical(&self, mode: crate::polygon::IsoMode) -> crate::polygon::CanonicalForm {
        self.shape.canonicalize(self.labels.entries(), mode)
    }
}

/// Central vertex if `s` is a T-shape.
pub fn t_shape(s: &Subdivision) -> Option<usize> {
    let ears = s.ears();
    if ears.len() != 1 {
        return None;
    }
    let central = ears[0];
    let plain = LabelledSubdivision {
        shape: s.clone(),
        labels: Sequence::from_vec_unchecked(vec![2; s.n() - 1]),
    };
    let mut lab = plain.degrees();
    lab[central - 1] = 2;
    if lab.iter().any(|&x| x < 2) {
        return None;
    }
    let chain = ChainGraph::from(r(&Sequence::from_vec_unchecked(lab)));
    chain.type_t_kind().is_t().then_some(central)
}

fn quad() -> Subdivision {
    Subdivision::from_parts(4, [[0, 1, 3], [1, 2, 3]].into_iter().collect())
}

/// New `v0`, old vertices shifted up by one, triangle `{v0, v1, v_max}` added.
pub fn rule_one(s: &Subdivision, central: usize) -> (Subdivision, usize) {
    let n = s.n();
    let mut ts: BTreeSet<Triangle> = s
        .triangles()
        .iter()
        .map(|t| [t[0] + 1, t[1] + 1, t[2] + 1])
        .collect();
    ts.insert([0, 1, n]);
    (Subdivision::from_parts(n + 1, ts), central + 1)
}

/// The mirror image of [`rule_one`] under the reflection fixing `v0`.
pub fn rule_two(s: &Subdivision, central: usize) -> (Subdivision, usize) {
    let (t, c) = rule_one(&s.reflect(), s.n() - central);
    (t.reflect(), t.n() - c)
}

/// All T-shapes with at most `max_n` vertices, generated from the quad.
pub fn t_shapes_inductive(max_n: usize) -> BTreeSet<(Subdivision, usize)> {
    let mut out = BTreeSet::new();
    if max_n < 4 {
        return out;
    }
    let mut frontier = vec![(quad(), 2)];
    while let Some((s, c)) = frontier.pop() {
        if !out.insert((s.clone(), c)) {
            continue;
        }
        if s.n() < max_n {
            frontier.push(rule_one(&s, c));
            frontier.push(rule_two(&s, c));
        }
    }
    out
}

fn tsub_labels_ok(ls: &LabelledSubdivision, central: usize) -> bool {
    let deg = ls.degrees();
    (1..ls.n()).all(|i| {
        if i == central {
            deg[i - 1] <= ls.label(i)
        } else {
            deg[i - 1] == ls.label(i)
        }
    })
}

/// The T-subdivision of a type T chain, built by the two inductive rules.
pub fn t_subdivision_for(c: &ChainGraph) -> Result<TSubdivision> {
    if !c.type_t_kind().is_t() {
        return Err(Error::NotTypeT(c.to_string()));
    }
    // peel down to the first kind, remembering which end was extended
    let mut steps = Vec::new();
    let mut w = c.weights().to_vec();
    loop {
        let n = w.len();
        if ChainGraph::new(w.clone()).unwrap().type_t_kind() == crate::chains::TKind::FirstKind {
            break;
        }
        if w[0] == 2 && w[n - 1] >= 3 {
            w.remove(0);
            *w.last_mut().unwrap() -= 1;
            steps.push(false);
        } else {
            w.pop();
            w[0] -= 1;
            steps.push(true);
        }
    }
    let (mut s, mut central) = (quad(), 2);
    for &first_rule in steps.iter().rev() {
        (s, central) = if first_rule {
            rule_one(&s, central)
        } else {
            rule_two(&s, central)
        };
    }
    let element = LabelledSubdivision::new(s, r(&c.as_sequence()))?;
    if !tsub_labels_ok(&element, central) {
        return Err(Error::Invariant(format!("T-subdivision for {c} has wrong degrees")));
    }
    Ok(TSubdivision { element, central })
}

/// Every triangulation with exactly one ear whose non-central vertices have
/// defect 0 for the labels `R(c)`.
pub fn t_subdivision_search(c: &ChainGraph) -> Vec<TSubdivision> {
    let labels = r(&c.as_sequence());
    let n = labels.len() + 1;
    let mut out = Vec::new();
    for s in triangulations(n) {
        let ears = s.ears();
        if ears.len() != 1 {
            continue;
        }
        let ls = LabelledSubdivision { shape: s, labels: labels.clone() };
        if tsub_labels_ok(&ls, ears[0]) {
            out.push(TSubdivision { element: ls, central: ears[0] });
        }
    }
    out
}

pub fn characterize_t_factor(ls: &LabelledSubdivision) -> Result<TFactorDecomposition> {
    if t_shape(ls.shape()).is_none() {
        return Err(Error::Precondition("shape is not a T-shape".into()));
    }
    if !ls.unsaturated().is_empty() {
        return Err(Error::Precondition("unsaturated vertex".into()));
    }
    let d = ls.defects();
    let (first, last) = (d[0], d[d.len() - 1]);
    if first < 0 || last < 0 {
        return Err(Error::Inadmissible);
    }
    let mut core = ls.labels.entries().to_vec();
    core[0] -= first as u32;
    *core.last_mut().unwrap() -= last as u32;
    let core = Sequence::new(core)?;
    if !core.in_w2() || !ChainGraph::from(r(&core)).type_t_kind().is_t() {
        return Err(Error::Precondition(format!("core {core} is not dual to a T-chain")));
    }
    Ok(TFactorDecomposition { ell: last as u32, core, r: first as u32 })
}

pub(crate) fn tri_with(t: Triangle, a: usize, b: usize) -> bool {
    t.contains(&a) && t.contains(&b)
}

pub(crate) fn relabel(t: Triangle, f: impl Fn(usize) -> usize) -> Triangle {
    tri(f(t[0]), f(t[1]), f(t[2]))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ls(n: usize, ts: &[Triangle], labels: &[u32]) -> LabelledSubdivision {
        LabelledSubdivision::new(
            Subdivision::new(n, ts.iter().copied()).unwrap(),
            Sequence::new(labels.to_vec()).unwrap(),
        )
        .unwrap()
    }

    fn p9() -> LabelledSubdivision {
        ls(
            9,
            &[[0, 1, 4], [1, 2, 3], [1, 3, 4], [0, 4, 5], [0, 5, 6], [0, 6, 8], [6, 7, 8]],
            &[3, 2, 2, 2, 1, 2, 2, 2],
        )
    }

    const QUAD: [Triangle; 2] = [[0, 1, 3], [1, 2, 3]];
    const PENT_V1: [Triangle; 3] = [[0, 1, 4], [1, 2, 3], [1, 3, 4]];

    #[test]
    fn degree_examples() {
        assert_eq!(ls(4, &QUAD, &[2, 2, 2]).degrees(), vec![2, 1, 2]);
        assert_eq!(ls(4, &QUAD, &[2, 1, 2]).degrees(), vec![1, 1, 1]);
        assert_eq!(ls(2, &[], &[4]).degrees(), vec![0]);
    }

    #[test]
    fn saturation_examples() {
        assert!(!ls(5, &PENT_V1, &[3, 2, 3, 2]).saturated(3));
        assert!(ls(4, &QUAD, &[2, 3, 2]).saturated(2));
        assert!(ls(2, &[], &[5]).saturated(1));
    }

    #[test]
    fn t_shape_examples() {
        assert_eq!(t_shape(&Subdivision::new(4, QUAD).unwrap()), Some(2));
        assert_eq!(t_shape(&Subdivision::new(4, [[0, 1, 2], [0, 2, 3]]).unwrap()), None);
        assert_eq!(t_shape(&Subdivision::new(5, PENT_V1).unwrap()), Some(2));
    }

    #[test]
    fn t_subdivision_examples() {
        let t = t_subdivision_for(&"4".parse().unwrap()).unwrap();
        assert_eq!(t.element, ls(4, &QUAD, &[2, 2, 2]));
        assert_eq!(t.central, 2);
        let t = t_subdivision_for(&"5,2".parse().unwrap()).unwrap();
        assert_eq!(t.element, ls(5, &[[0, 1, 4], [1, 2, 4], [2, 3, 4]], &[2, 2, 2, 3]));
        assert_eq!(t.central, 3);
        let t = t_subdivision_for(&"2,5".parse().unwrap()).unwrap();
        assert_eq!(t.element, ls(5, &PENT_V1, &[3, 2, 2, 2]));
        assert_eq!(t.central, 2);
        assert!(t_subdivision_for(&"2,3".parse().unwrap()).is_err());
    }

    #[test]
    fn characterize_examples() {
        let d = characterize_t_factor(&ls(4, &QUAD, &[3, 2, 3])).unwrap();
        assert_eq!((d.ell, d.core.entries(), d.r), (1, &[2, 2, 2][..], 1));
        let d = characterize_t_factor(&ls(5, &[[0, 1, 4], [1, 2, 4], [2, 3, 4]], &[2, 2, 2, 4]))
            .unwrap();
        assert_eq!((d.ell, d.core.entries(), d.r), (1, &[2, 2, 2, 3][..], 0));
        let d = characterize_t_factor(&ls(4, &QUAD, &[2, 2, 2])).unwrap();
        assert_eq!((d.ell, d.r), (0, 0));
    }

    #[test]
    fn p_membership() {
        assert!(ls(2, &[], &[3]).in_p());
        let hex = ls(6, &[[0, 1, 5], [1, 2, 3], [1, 3, 5], [3, 4, 5]], &[3, 2, 3, 2, 3]);
        assert_eq!(
            hex.p_violation(),
            Some(PViolation::InteriorTriangle { triangle: [1, 3, 5] })
        );
        assert!(p9().in_p());
    }

    #[test]
    fn goodness() {
        assert!(ls(4, &QUAD, &[2, 2, 2]).is_good());
        assert!(p9().is_good());
        let broken = ls(
            9,
            &[[0, 1, 4], [1, 2, 3], [1, 3, 4], [4, 5, 6], [0, 4, 6], [0, 6, 8], [6, 7, 8]],
            &[3, 2, 2, 2, 1, 2, 2, 2],
        );
        assert!(!broken.is_good());
    }

    #[test]
    fn json_round_trip() {
        let x = p9();
        let j = serde_json::to_string(&x).unwrap();
        assert!(j.starts_with(r#"{"n":9,"triangles":[[0,1,4],"#));
        assert!(j.ends_with(r#""labels":[3,2,2,2,1,2,2,2]}"#));
        let back: LabelledSubdivision = serde_json::from_str(&j).unwrap();
        assert_eq!(back, x);
    }
}
