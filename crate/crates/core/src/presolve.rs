//! P-resolutions as a chain with marked intervals, their enumeration, the
//! corresponding P-elements and the comparison with M.

use std::collections::{BTreeMap, BTreeSet, HashSet, VecDeque};
use std::fmt;

use num_traits::One;
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use crate::chains::{t_kind, ChainGraph, TKind};
use crate::error::{Error, Result};
use crate::labelled::{t_shape, t_subdivision_for, LabelledSubdivision};
use crate::moves::f_run;
use crate::polygon::{compose, triangulations, CanonicalForm, IsoMode, Law, Subdivision};
use crate::sequences::{cf_eval, r, r_dual, Rational, Sequence};

/// Environment variable overriding the blow-up depth of [`enumerate_gj`].
pub const MAX_BLOWUPS_ENV: &str = "PRESOLVE_MAX_BLOWUPS";

/// A chain with disjoint marked intervals (1-based, inclusive).
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Gj {
    pub chain: ChainGraph,
    pub j_intervals: Vec<(usize, usize)>,
}

impl Gj {
    pub fn new(chain: ChainGraph, mut j_intervals: Vec<(usize, usize)>) -> Self {
        j_intervals.sort();
        Gj { chain, j_intervals }
    }

    fn in_j(&self, pos: usize) -> bool {
        self.j_intervals.iter().any(|&(lo, hi)| (lo..=hi).contains(&pos))
    }

    /// Weight-2 nodes outside J with no neighbour in J.
    pub fn k_set(&self) -> Vec<usize> {
        let len = self.chain.len();
        (1..=len)
            .filter(|&p| {
                self.chain.weights()[p - 1] == 2
                    && !self.in_j(p)
                    && !(p > 1 && self.in_j(p - 1))
                    && !(p < len && self.in_j(p + 1))
            })
            .collect()
    }

    /// The T-chains of J and the `A_k` chains formed by runs of K.
    pub fn singular_points(&self) -> Vec<SingularPoint> {
        let mut out: Vec<(usize, SingularPoint)> = self
            .j_intervals
            .iter()
            .map(|&(lo, hi)| (lo, SingularPoint { kind: PointKind::T, chain: self.chain.slice(lo, hi) }))
            .collect();
        let k = self.k_set();
        let mut i = 0;
        while i < k.len() {
            let mut e = i;
            while e + 1 < k.len() && k[e + 1] == k[e] + 1 {
                e += 1;
            }
            out.push((k[i], SingularPoint { kind: PointKind::A, chain: self.chain.slice(k[i], k[e]) }));
            i = e + 1;
        }
        out.sort_by_key(|x| x.0);
        out.into_iter().map(|x| x.1).collect()
    }
}

impl Serialize for Gj {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("Gj", 3)?;
        st.serialize_field("chain", &self.chain)?;
        let j: Vec<[usize; 2]> = self.j_intervals.iter().map(|&(a, b)| [a, b]).collect();
        st.serialize_field("J", &j)?;
        st.serialize_field("K", &self.k_set())?;
        st.end()
    }
}

impl fmt::Display for Gj {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}, J = {{", self.chain)?;
        for (i, (lo, hi)) in self.j_intervals.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "[{lo},{hi}]")?;
        }
        write!(f, "}}")
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum PointKind {
    T,
    A,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SingularPoint {
    #[serde(rename = "type")]
    pub kind: PointKind,
    pub chain: ChainGraph,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum GjInvalid {
    BadInterval { lo: usize, hi: usize },
    NotSeparated { lo: usize },
    NotTypeT { lo: usize, hi: usize },
    MinusOneInJ { pos: usize },
    MinusOneAtEnd { pos: usize },
    MinusOneNeighbourOutsideJ { pos: usize },
    Discrepancy { pos: usize, sum: Rational },
    NoSecondKind { pos: usize },
    NotContractible,
}

impl fmt::Display for GjInvalid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GjInvalid::BadInterval { lo, hi } => write!(f, "bad interval {lo}-{hi}"),
            GjInvalid::NotSeparated { lo } => write!(f, "interval at {lo} overlaps or touches its predecessor"),
            GjInvalid::NotTypeT { lo, hi } => write!(f, "interval {lo}-{hi} is not a T-chain"),
            GjInvalid::MinusOneInJ { pos } => write!(f, "-1 node {pos} lies in J"),
            GjInvalid::MinusOneAtEnd { pos } => write!(f, "-1 node {pos} at the chain end"),
            GjInvalid::MinusOneNeighbourOutsideJ { pos } => {
                write!(f, "-1 node {pos} has a neighbour outside J")
            }
            GjInvalid::Discrepancy { sum, .. } => write!(f, "discrepancy {sum} ≤ 1"),
            GjInvalid::NoSecondKind { pos } => {
                write!(f, "-1 node {pos} touches no T-chain of the second kind")
            }
            GjInvalid::NotContractible => write!(f, "chain does not contract to a minimal chain"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum GjVerdict {
    Valid,
    Invalid(GjInvalid),
}

impl GjVerdict {
    pub fn is_valid(&self) -> bool {
        *self == GjVerdict::Valid
    }
}

impl fmt::Display for GjVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GjVerdict::Valid => write!(f, "Valid"),
            GjVerdict::Invalid(why) => write!(f, "Invalid({why})"),
        }
    }
}

/// How a -1 node between two T-chains is judged.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MinusOneRule {
    /// `|d_left| + |d_right| > 1` for the adjacent end discrepancies.
    Discrepancy,
    /// At least one adjacent T-chain is of the second kind.
    Literal,
}

fn check_structure(chain: &ChainGraph, js: &[(usize, usize)]) -> std::result::Result<Vec<Option<usize>>, GjInvalid> {
    let len = chain.len();
    let mut owner = vec![None; len + 2];
    let mut prev_hi = 0;
    for (k, &(lo, hi)) in js.iter().enumerate() {
        if lo == 0 || hi < lo || hi > len {
            return Err(GjInvalid::BadInterval { lo, hi });
        }
        if k > 0 && lo <= prev_hi + 1 {
            return Err(GjInvalid::NotSeparated { lo });
        }
        prev_hi = hi;
        for (p, slot) in owner.iter_mut().enumerate().take(hi + 1).skip(lo) {
            if chain.weights()[p - 1] == 1 {
                return Err(GjInvalid::MinusOneInJ { pos: p });
            }
            *slot = Some(k);
        }
        if !chain.slice(lo, hi).type_t_kind().is_t() {
            return Err(GjInvalid::NotTypeT { lo, hi });
        }
    }
    Ok(owner)
}

pub fn validate_gj_with(chain: &ChainGraph, j_intervals: &[(usize, usize)], rule: MinusOneRule) -> GjVerdict {
    let mut js = j_intervals.to_vec();
    js.sort();
    let owner = match check_structure(chain, &js) {
        Ok(o) => o,
        Err(e) => return GjVerdict::Invalid(e),
    };
    let len = chain.len();
    for pos in chain.minus_one_positions() {
        if pos == 1 || pos == len {
            return GjVerdict::Invalid(GjInvalid::MinusOneAtEnd { pos });
        }
        let (Some(l), Some(rr)) = (owner[pos - 1], owner[pos + 1]) else {
            return GjVerdict::Invalid(GjInvalid::MinusOneNeighbourOutsideJ { pos });
        };
        let left = chain.slice(js[l].0, js[l].1);
        let right = chain.slice(js[rr].0, js[rr].1);
        match rule {
            MinusOneRule::Discrepancy => {
                let dl = left.discrepancies().expect("T-chains are minimal");
                let dr = right.discrepancies().expect("T-chains are minimal");
                let sum = Rational::from_big(
                    dl.last().unwrap().abs().as_big() + dr.first().unwrap().abs().as_big(),
                );
                if sum.as_big() <= &num_rational::BigRational::one() {
                    return GjVerdict::Invalid(GjInvalid::Discrepancy { pos, sum });
                }
            }
            MinusOneRule::Literal => {
                if left.type_t_kind() != TKind::SecondKind && right.type_t_kind() != TKind::SecondKind {
                    return GjVerdict::Invalid(GjInvalid::NoSecondKind { pos });
                }
            }
        }
    }
    if chain.contract_minimal().is_err() {
        return GjVerdict::Invalid(GjInvalid::NotContractible);
    }
    GjVerdict::Valid
}

pub fn validate_gj(chain: &ChainGraph, j_intervals: &[(usize, usize)]) -> GjVerdict {
    validate_gj_with(chain, j_intervals, MinusOneRule::Discrepancy)
}

/// Sets of separated T-intervals avoiding -1 nodes and covering every
/// neighbour of a -1 node.
pub fn j_candidates(chain: &ChainGraph) -> Vec<Vec<(usize, usize)>> {
    let w = chain.weights();
    let len = w.len();
    let next_to_minus_one = |p: usize| (p > 1 && w[p - 2] == 1) || (p < len && w[p] == 1);
    let mut out = Vec::new();
    let hopeless = (1..=len).any(|p| w[p - 1] == 1 && (p == 1 || p == len || w[p - 2] == 1 || w[p] == 1));
    if hopeless {
        return out;
    }
    let mut acc = Vec::new();
    fn rec(
        start: usize,
        len: usize,
        w: &[u32],
        must: &dyn Fn(usize) -> bool,
        acc: &mut Vec<(usize, usize)>,
        out: &mut Vec<Vec<(usize, usize)>>,
    ) {
        if start > len {
            out.push(acc.clone());
            return;
        }
        // node `start` outside J
        if w[start - 1] == 1 || !must(start) {
            rec(start + 1, len, w, must, acc, out);
        }
        if w[start - 1] == 1 {
            return;
        }
        for hi in start..=len {
            if w[hi - 1] == 1 {
                break;
            }
            if !t_kind(&w[start - 1..hi]).is_t() {
                continue;
            }
            if hi < len && w[hi] != 1 && must(hi + 1) {
                continue;
            }
            acc.push((start, hi));
            rec(hi + 2, len, w, must, acc, out);
            acc.pop();
        }
    }
    rec(1, len, w, &next_to_minus_one, &mut acc, &mut out);
    out
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GjSearch {
    pub results: Vec<Gj>,
    pub cap: usize,
    /// Blow-up depth of each result.
    pub depths: Vec<usize>,
    pub warnings: Vec<String>,
}

/// Default blow-up depth: `len(a) + 1`, or the value of `PRESOLVE_MAX_BLOWUPS`.
pub fn blowup_cap(a: &Sequence) -> usize {
    std::env::var(MAX_BLOWUPS_ENV)
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .unwrap_or(a.len() + 1)
}

pub fn enumerate_gj(a: &Sequence) -> Result<GjSearch> {
    enumerate_gj_with(a, blowup_cap(a), MinusOneRule::Discrepancy)
}

/// Breadth-first search over interior blow-ups of `R(a)`.
pub fn enumerate_gj_with(a: &Sequence, cap: usize, rule: MinusOneRule) -> Result<GjSearch> {
    if a.is_empty() {
        return Err(Error::Empty);
    }
    if !a.in_w2() {
        return Err(Error::NotInW2(a.to_string()));
    }
    let root = ChainGraph::from(r(a));
    let mut seen: HashSet<ChainGraph> = HashSet::from([root.clone()]);
    let mut queue = VecDeque::from([(root, 0usize)]);
    let mut found = Vec::new();
    while let Some((c, depth)) = queue.pop_front() {
        for js in j_candidates(&c) {
            if validate_gj_with(&c, &js, rule).is_valid() {
                found.push((depth, Gj::new(c.clone(), js)));
            }
        }
        if depth < cap {
            for g in 1..c.len() {
                let next = c.blow_up(g).expect("gap in range");
                if seen.insert(next.clone()) {
                    queue.push_back((next, depth + 1));
                }
            }
        }
    }
    found.sort_by(|x, y| (x.1.chain.len(), &x.1).cmp(&(y.1.chain.len(), &y.1)));
    let mut warnings = Vec::new();
    if found.iter().any(|(d, _)| *d == cap) && cap > 0 {
        warnings.push(format!(
            "valid configuration found at the blow-up cap {cap}; raise {MAX_BLOWUPS_ENV} to check completeness"
        ));
    }
    Ok(GjSearch {
        depths: found.iter().map(|x| x.0).collect(),
        results: found.into_iter().map(|x| x.1).collect(),
        cap,
        warnings,
    })
}

/// The P-element of a valid configuration.
pub fn p_from_gj(gj: &Gj) -> Result<LabelledSubdivision> {
    if let GjVerdict::Invalid(why) = validate_gj(&gj.chain, &gj.j_intervals) {
        return Err(Error::InvalidGj(why.to_string()));
    }
    let (b, assoc) = r_dual(&gj.chain.as_sequence());
    let len = b.len();
    // (first, last, T-chain) blocks in positions of b
    let mut blocks: Vec<(usize, usize, Option<ChainGraph>)> = Vec::new();
    let mut covered = vec![false; len + 1];
    for &(lo, hi) in &gj.j_intervals {
        let h = assoc.image(lo, hi);
        let (h0, h1) = (*h.first().unwrap(), *h.last().unwrap());
        if h.len() != h1 - h0 + 1 {
            return Err(Error::Invariant(format!("image of [{lo},{hi}] is not an interval")));
        }
        for c in covered.iter_mut().take(h1 + 1).skip(h0) {
            *c = true;
        }
        blocks.push((h0, h1, Some(gj.chain.slice(lo, hi))));
    }
    let mut i = 1;
    while i <= len {
        if covered[i] {
            i += 1;
            continue;
        }
        let mut e = i;
        while e < len && !covered[e + 1] {
            e += 1;
        }
        blocks.push((i, e, None));
        i = e + 1;
    }
    blocks.sort_by_key(|x| (x.0, x.1));
    let mut shape: Option<Subdivision> = None;
    let mut prev_hi = 0;
    for (m0, m1, t) in blocks {
        let piece = match t {
            None => Subdivision::fan_at_v0(m1 - m0 + 1),
            Some(tc) => t_subdivision_for(&tc)?.element.shape().clone(),
        };
        if piece.n() != m1 - m0 + 2 {
            return Err(Error::Invariant("block size does not match its T-subdivision".into()));
        }
        shape = Some(match shape {
            None => piece,
            Some(s) if prev_hi >= m0 => compose(&s, &piece, Law::Star)?,
            Some(s) => compose(&s, &piece, Law::Dot)?,
        });
        prev_hi = m1;
    }
    LabelledSubdivision::new(shape.expect("nonempty chain"), b)
}

/// Reads the configuration back off a P-element.
pub fn gj_from_p(ls: &LabelledSubdivision) -> Result<Gj> {
    if let Some(v) = ls.p_violation() {
        return Err(Error::NotInP(v.to_string()));
    }
    let (c, assoc) = r_dual(ls.labels());
    let c = c.entries();
    let mut js = Vec::new();
    for (p0, p1) in ls.shape().all_primary_ranges() {
        if p0 == p1 {
            continue;
        }
        let factor = ls.restrict(p0, p1);
        if t_shape(factor.shape()).is_none() {
            return Err(Error::NotInP(format!("primary factor {p0}-{p1} is not a T-shape")));
        }
        let d = factor.defects();
        let mut core = factor.labels().entries().to_vec();
        core[0] -= d[0] as u32;
        *core.last_mut().unwrap() -= d[d.len() - 1] as u32;
        let tc = r(&Sequence::new(core)?);
        if !ChainGraph::from(tc.clone()).type_t_kind().is_t() {
            return Err(Error::NotInP(format!("core of factor {p0}-{p1} is not dual to a T-chain")));
        }
        let tc = tc.entries();
        let k = tc.len();
        let found = (0..=c.len().saturating_sub(k)).find(|&s| {
            &c[s..s + k] == tc && {
                let h: Vec<usize> = assoc
                    .pairs()
                    .filter(|&(_, jj)| (s + 1..=s + k).contains(&jj))
                    .map(|(i, _)| i)
                    .collect::<BTreeSet<_>>()
                    .into_iter()
                    .collect();
                h == (p0..=p1).collect::<Vec<_>>()
            }
        });
        match found {
            Some(s) => js.push((s + 1, s + k)),
            None => return Err(Error::NotInP(format!("factor {p0}-{p1} has no matching interval"))),
        }
    }
    Ok(Gj::new(ChainGraph::new(c.to_vec())?, js))
}

/// Admissible labelled triangulations for `a`, one per isomorphism class.
pub fn enumerate_m(a: &Sequence, mode: IsoMode) -> Result<Vec<LabelledSubdivision>> {
    if a.is_empty() {
        return Err(Error::Empty);
    }
    if !a.in_w2() {
        return Err(Error::NotInW2(a.to_string()));
    }
    let mut classes: BTreeMap<CanonicalForm, LabelledSubdivision> = BTreeMap::new();
    for s in triangulations(a.len() + 1) {
        let ls = LabelledSubdivision::new(s, a.clone())?;
        if ls.is_admissible() {
            let key = ls.canonical(mode);
            classes.entry(key).or_insert(ls);
        }
    }
    Ok(classes.into_values().collect())
}

pub fn verify_blowdown(p_labels: &Sequence, a: &Sequence) -> bool {
    ChainGraph::from(r(p_labels))
        .contract_minimal()
        .is_ok_and(|c| c == ChainGraph::from(r(a)))
}

#[derive(Clone, Debug, Serialize)]
pub struct PResolutionReport {
    #[serde(flatten)]
    pub gj: Gj,
    pub labels: Sequence,
    pub subdivision: Subdivision,
    pub singular_points: Vec<SingularPoint>,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct BijectionCertificate {
    pub m_count: usize,
    pub gj_count: usize,
    pub paired: usize,
    pub unpaired_reason: Vec<String>,
    pub blowdown_verified: usize,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

impl BijectionCertificate {
    pub fn holds(&self) -> bool {
        self.m_count == self.gj_count
            && self.paired == self.m_count
            && self.blowdown_verified == self.paired
            && self.unpaired_reason.is_empty()
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ComponentsReport {
    pub singularity: Rational,
    pub components: Vec<PResolutionReport>,
    pub certificate: BijectionCertificate,
}

/// P-resolutions of the singularity with minimal resolution `Γ(R(a))`,
/// cross-checked against M.
pub fn components(a: &Sequence, mode: IsoMode) -> Result<ComponentsReport> {
    let singularity = cf_eval(a)?;
    let m = enumerate_m(a, mode)?;
    let search = enumerate_gj(a)?;
    let mut cert = BijectionCertificate { m_count: m.len(), warnings: search.warnings.clone(), ..Default::default() };

    let mut p_classes: BTreeMap<CanonicalForm, PResolutionReport> = BTreeMap::new();
    for gj in &search.results {
        let p = p_from_gj(gj)?;
        if !p.in_p() {
            return Err(Error::Invariant(format!("P-element of {gj} fails the P criterion")));
        }
        p_classes.entry(p.canonical(mode)).or_insert_with(|| PResolutionReport {
            gj: gj.clone(),
            labels: p.labels().clone(),
            subdivision: p.shape().clone(),
            singular_points: gj.singular_points(),
        });
    }
    cert.gj_count = p_classes.len();

    let mut images: BTreeMap<CanonicalForm, usize> = BTreeMap::new();
    for (idx, x) in m.iter().enumerate() {
        match f_run(x) {
            Ok(run) => {
                let key = run.result.canonical(mode);
                if !run.result.in_p() {
                    cert.unpaired_reason.push(format!("M-element {idx}: F stopped outside P"));
                } else if !p_classes.contains_key(&key) {
                    cert.unpaired_reason.push(format!("M-element {idx}: F image not among the P-elements"));
                } else if let Some(prev) = images.insert(key, idx) {
                    cert.unpaired_reason.push(format!("M-elements {prev} and {idx} have the same F image"));
                } else {
                    cert.paired += 1;
                    if verify_blowdown(run.result.labels(), a) {
                        cert.blowdown_verified += 1;
                    }
                }
            }
            Err(e) => cert.unpaired_reason.push(format!("M-element {idx}: {e}")),
        }
    }
    let mut components: Vec<PResolutionReport> = p_classes.into_values().collect();
    components.sort_by(|x, y| (x.gj.chain.len(), &x.gj).cmp(&(y.gj.chain.len(), &y.gj)));
    Ok(ComponentsReport { singularity, components, certificate: cert })
}
