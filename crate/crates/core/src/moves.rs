//! The moves B1, B2a, B2b and the maps F and G.

use std::collections::BTreeSet;
use std::fmt;

use serde::Serialize;

use crate::chains::ChainGraph;
use crate::error::{Error, Result};
use crate::labelled::{relabel, tri_with, LabelledSubdivision};
use crate::polygon::{height, tri, triangulations, Fan, Subdivision, Triangle};
use crate::sequences::{r, r_dual, Sequence};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum MoveKind {
    B1,
    B2a,
    B2b,
}

/// Where the new 2 goes relative to the label-1 entry.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum B2Side {
    Before,
    After,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MoveRecord {
    pub kind: MoveKind,
    /// 1 interior triangle, 2 unsaturated vertex, 3 label 1.
    pub case: u8,
    pub j: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub e: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub f: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub side: Option<B2Side>,
    pub before: LabelledSubdivision,
    pub after: LabelledSubdivision,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct NoValidRewiring {
    pub j: usize,
    pub case: u8,
    pub input: LabelledSubdivision,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub labels_out: Option<Sequence>,
    pub violated: Vec<String>,
}

impl fmt::Display for NoValidRewiring {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "no valid rewiring at v{} (case {}) for labels {}: {}",
            self.j,
            self.case,
            self.input.labels(),
            self.violated.join("; ")
        )
    }
}

impl std::error::Error for NoValidRewiring {}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum Height {
    Finite(usize),
    Infinite,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct Measure {
    pub interior: usize,
    pub unsaturated: usize,
    pub bad_ones: usize,
    pub first_interior_height: Height,
    pub first_fan_height: Height,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Step {
    Fixed,
    Moved(Box<LabelledSubdivision>, Box<MoveRecord>),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Run {
    pub result: LabelledSubdivision,
    pub trace: Vec<MoveRecord>,
}

/// The vertex F acts on and the reasons it was selected.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub j: usize,
    pub interior: Option<Triangle>,
    pub unsaturated: bool,
    pub bad_one: bool,
}

pub fn b1_label(a: &Sequence, j: usize, e: u32) -> Result<Sequence> {
    let aj = a
        .get(j)
        .ok_or(Error::PositionOutOfRange { pos: j, len: a.len() })?;
    if aj < 3 || e < 2 || e + 1 > aj {
        return Err(Error::Precondition(format!("B1 needs a_j >= 3 and 2 <= e <= a_j - 1, got a_j = {aj}, e = {e}")));
    }
    let f = aj + 1 - e;
    let v = a.entries();
    let mut out = v[..j - 1].to_vec();
    out.extend([e, 2, 1, 2, f]);
    out.extend_from_slice(&v[j..]);
    Sequence::new(out)
}

pub fn b2_label(a: &Sequence, j: usize, side: B2Side) -> Result<Sequence> {
    let len = a.len();
    if a.get(j) != Some(1) {
        return Err(Error::Precondition(format!("B2 needs a_{j} = 1")));
    }
    let mut v = a.entries().to_vec();
    match side {
        B2Side::Before => {
            if j >= len {
                return Err(Error::PositionOutOfRange { pos: j + 1, len });
            }
            v[j] += 1;
            v.insert(j - 1, 2);
        }
        B2Side::After => {
            if j < 2 {
                return Err(Error::PositionOutOfRange { pos: 0, len });
            }
            v[j - 2] += 1;
            v.insert(j, 2);
        }
    }
    Sequence::new(v)
}

fn label_one_fan_triangles(ls: &LabelledSubdivision) -> BTreeSet<Triangle> {
    let fans = ls.shape().find_fans();
    let mut out = BTreeSet::new();
    for f in fans {
        let j = f.apex();
        if ls.label(j) == 1
            && f.vertices().iter().all(|&v| v == 0 || v == j || ls.label(v) >= 2)
        {
            out.extend(f.triangles());
        }
    }
    out
}

/// Smallest `j` that is the middle of an interior triangle (ignoring the
/// triangles of fans around label-1 vertices), unsaturated, or a label-1
/// vertex not split off as a digon.
pub fn violating_vertex(ls: &LabelledSubdivision) -> Option<Violation> {
    let fan_tris = label_one_fan_triangles(ls);
    let interior: Vec<Triangle> = ls
        .shape()
        .interior_triangles()
        .into_iter()
        .filter(|t| !fan_tris.contains(t))
        .collect();
    let unsat: BTreeSet<usize> = ls.unsaturated().into_iter().collect();
    let bad: BTreeSet<usize> = ls.bad_ones().into_iter().collect();
    (1..ls.n()).find_map(|j| {
        let v = Violation {
            j,
            interior: interior.iter().find(|t| t[1] == j).copied(),
            unsaturated: unsat.contains(&j),
            bad_one: bad.contains(&j),
        };
        (v.interior.is_some() || v.unsaturated || v.bad_one).then_some(v)
    })
}

fn fan_height(n: usize, f: &Fan) -> Height {
    let w: Vec<usize> = f.vertices().into_iter().filter(|&v| v != 0).collect();
    height(n, &w).map_or(Height::Infinite, Height::Finite)
}

/// Interior triangles belonging to fans around label-1 vertices are not
/// counted; F never acts on them.
pub fn measure(ls: &LabelledSubdivision) -> Measure {
    let n = ls.n();
    let fan_tris = label_one_fan_triangles(ls);
    let interior: Vec<Triangle> = ls
        .shape()
        .interior_triangles()
        .into_iter()
        .filter(|t| !fan_tris.contains(t))
        .collect();
    let bad = ls.bad_ones();
    let first_interior_height = interior
        .first()
        .map_or(Height::Infinite, |t| Height::Finite(height(n, t).unwrap()));
    let first_fan_height = bad
        .first()
        .and_then(|&j| ls.label_one_fans(j).first().map(|f| fan_height(n, f)))
        .unwrap_or(Height::Infinite);
    Measure {
        interior: interior.len(),
        unsaturated: ls.unsaturated().len(),
        bad_ones: bad.len(),
        first_interior_height,
        first_fan_height,
    }
}

/// Is `after` one interior blow-up of `before`?
pub fn is_single_blow_up(before: &ChainGraph, after: &ChainGraph) -> bool {
    after.len() == before.len() + 1
        && (1..before.len()).any(|g| before.blow_up(g).as_ref() == Ok(after))
}

fn build(n: usize, ts: BTreeSet<Triangle>, labels: Vec<u32>) -> std::result::Result<LabelledSubdivision, String> {
    if ts.iter().any(|t| t[0] == t[1] || t[1] == t[2]) {
        return Err("degenerate triangle".into());
    }
    let shape = Subdivision::new(n, ts).map_err(|e| e.to_string())?;
    let labels = Sequence::new(labels).map_err(|e| e.to_string())?;
    LabelledSubdivision::new(shape, labels).map_err(|e| e.to_string())
}

struct B1Out {
    ls: LabelledSubdivision,
    e: u32,
    f: u32,
}

/// B1 on the triangle `{p, j, q}`, `p < j < q`: `v_j` becomes five vertices
/// labelled `(e, 2, 1, 2, f)`; the triangle across `{p, q}` supplies the root
/// of the new fan.
fn b1_geometry(
    ls: &LabelledSubdivision,
    j: usize,
    p: usize,
    q: usize,
    f_from_degree: bool,
) -> std::result::Result<B1Out, String> {
    let s = ls.shape();
    let t = tri(p, j, q);
    let tp = s.across(p, q, t).ok_or("no triangle across {p, q}")?;
    let root = tp.into_iter().find(|&v| v != p && v != q).unwrap();
    let at_j: Vec<Triangle> = s
        .triangles()
        .iter()
        .filter(|x| x.contains(&j) && **x != t)
        .copied()
        .collect();
    let left: BTreeSet<Triangle> = at_j
        .iter()
        .filter(|x| x.iter().all(|&v| (p..=j).contains(&v)))
        .copied()
        .collect();
    let right = at_j.len() - left.len();
    let aj = ls.label(j);
    let (e, f) = if f_from_degree {
        let f = right as u32 + 1;
        ((aj + 1).saturating_sub(f), f)
    } else {
        let e = left.len() as u32 + 1;
        (e, (aj + 1).saturating_sub(e))
    };
    if e < 2 || f < 2 {
        return Err(format!("e = {e}, f = {f} below 2"));
    }
    let m = |v: usize| if v > j { v + 4 } else { v };
    let u = [j, j + 1, j + 2, j + 3, j + 4];
    let mut ts = BTreeSet::new();
    for x in s.triangles() {
        if *x == t || *x == tp {
            continue;
        }
        if x.contains(&j) {
            let side = if left.contains(x) { u[0] } else { u[4] };
            ts.insert(relabel(*x, |v| if v == j { side } else { m(v) }));
        } else {
            ts.insert(relabel(*x, m));
        }
    }
    let (pp, qq, rr) = (m(p), m(q), m(root));
    ts.extend([
        tri(pp, u[0], u[1]),
        tri(u[3], u[4], qq),
        tri(rr, pp, u[1]),
        tri(rr, u[1], u[2]),
        tri(rr, u[2], u[3]),
        tri(rr, u[3], qq),
    ]);
    let labels = b1_label(ls.labels(), j, e).map_err(|e| e.to_string())?;
    let out = build(ls.n() + 4, ts, labels.into_vec())?;
    Ok(B1Out { ls: out, e, f })
}

/// B2 on the fan around the label-1 vertex `j`. A root below the spokes gives
/// B2a (new 2 after `j`), a root above gives B2b (new 2 before `j`).
fn b2_geometry(
    ls: &LabelledSubdivision,
    j: usize,
    fan: &Fan,
) -> std::result::Result<(LabelledSubdivision, MoveKind, B2Side), String> {
    let s = ls.shape();
    let (rt, x) = (fan.root, fan.spokes);
    if rt < x[0] {
        let outer = s
            .across(rt, x[4], tri(rt, x[3], x[4]))
            .ok_or("no triangle across {root, x5}")?;
        let so = outer.into_iter().find(|&v| v != rt && v != x[4]).unwrap();
        let m = |v: usize| if v <= j { v } else { v + 1 };
        let w = j + 1;
        let removed = [tri(rt, x[1], x[2]), tri(rt, x[2], x[3]), tri(rt, x[3], x[4]), outer];
        let mut ts: BTreeSet<Triangle> = s
            .triangles()
            .iter()
            .filter(|t| !removed.contains(t))
            .map(|t| relabel(*t, m))
            .collect();
        let (so, rt, x2, x3, x4, x5) = (m(so), m(rt), m(x[1]), m(x[2]), m(x[3]), m(x[4]));
        ts.extend([tri(so, rt, x2), tri(so, x2, x3), tri(so, x3, w), tri(so, w, x5), tri(w, x4, x5)]);
        let labels = b2_label(ls.labels(), j, B2Side::After).map_err(|e| e.to_string())?;
        Ok((build(ls.n() + 1, ts, labels.into_vec())?, MoveKind::B2a, B2Side::After))
    } else {
        let outer = s
            .across(rt, x[0], tri(rt, x[0], x[1]))
            .ok_or("no triangle across {root, x1}")?;
        let so = outer.into_iter().find(|&v| v != rt && v != x[0]).unwrap();
        let m = |v: usize| if v < j { v } else { v + 1 };
        let w = j;
        let removed = [tri(rt, x[0], x[1]), tri(rt, x[1], x[2]), tri(rt, x[2], x[3]), outer];
        let mut ts: BTreeSet<Triangle> = s
            .triangles()
            .iter()
            .filter(|t| !removed.contains(t))
            .map(|t| relabel(*t, m))
            .collect();
        let (so, rt, x1, x2, x3, x4) = (m(so), m(rt), m(x[0]), m(x[1]), m(x[2]), m(x[3]));
        ts.extend([tri(so, x1, w), tri(so, w, x3), tri(so, x3, x4), tri(so, x4, rt), tri(x1, x2, w)]);
        let labels = b2_label(ls.labels(), j, B2Side::Before).map_err(|e| e.to_string())?;
        Ok((build(ls.n() + 1, ts, labels.into_vec())?, MoveKind::B2b, B2Side::Before))
    }
}

#[derive(Clone)]
struct Candidate {
    out: LabelledSubdivision,
    kind: MoveKind,
    e: Option<u32>,
    f: Option<u32>,
    side: Option<B2Side>,
    apex: usize,
}

/// Failed postconditions of a proposed move; empty when all hold.
fn postcondition_failures(
    before: &LabelledSubdivision,
    before_measure: &Measure,
    c: &Candidate,
    old_fan: Option<&Fan>,
) -> Vec<String> {
    let mut bad = Vec::new();
    if !c.out.is_admissible() {
        bad.push("output not admissible".to_string());
        return bad;
    }
    if measure(&c.out) >= *before_measure {
        bad.push("measure did not decrease".to_string());
    }
    let rb = ChainGraph::from(r(before.labels()));
    let ra = ChainGraph::from(r(c.out.labels()));
    if !is_single_blow_up(&rb, &ra) {
        bad.push("dual chain is not a single blow-up".to_string());
    }
    let fans = c.out.label_one_fans(c.apex);
    match old_fan {
        None => {
            if fans.is_empty() {
                bad.push(format!("no fan around the new label-1 vertex v{}", c.apex));
            }
        }
        Some(of) => {
            let old_h = fan_height(before.n(), of);
            let ok = fans
                .iter()
                .any(|f| f.root == 0 || fan_height(c.out.n(), f) < old_h);
            if !ok && c.out.bad_ones().contains(&c.apex) {
                bad.push("fan height did not decrease".to_string());
            }
        }
    }
    bad
}

/// Largest polygon the fallback search will enumerate.
const SEARCH_LIMIT: usize = 12;

fn fallback_search(
    before: &LabelledSubdivision,
    before_measure: &Measure,
    label_options: &[(Sequence, Candidate)],
    old_fan: Option<&Fan>,
) -> Option<(Candidate, usize)> {
    let n = label_options.first()?.0.len() + 1;
    if n > SEARCH_LIMIT {
        return None;
    }
    let mut survivors = Vec::new();
    for (labels, proto) in label_options {
        for s in triangulations(n) {
            let Ok(out) = LabelledSubdivision::new(s, labels.clone()) else {
                continue;
            };
            let c = Candidate { out, ..proto.clone() };
            if postcondition_failures(before, before_measure, &c, old_fan).is_empty() {
                survivors.push(c);
            }
        }
    }
    let count = survivors.len();
    survivors.sort_by(|a, b| a.out.cmp(&b.out));
    survivors.into_iter().next().map(|c| (c, count))
}

fn no_rewiring(ls: &LabelledSubdivision, j: usize, case: u8, labels_out: Option<Sequence>, violated: Vec<String>) -> Error {
    Error::NoValidRewiring(Box::new(NoValidRewiring {
        j,
        case,
        input: ls.clone(),
        labels_out,
        violated,
    }))
}

pub fn f_step(ls: &LabelledSubdivision) -> Result<Step> {
    if !ls.is_admissible() {
        return Err(Error::Inadmissible);
    }
    if ls.p_conditions_123() {
        return Ok(Step::Fixed);
    }
    let Some(v) = violating_vertex(ls) else {
        return Ok(Step::Fixed);
    };
    let j = v.j;
    let mut old_fan = None;
    let (case, proposal): (u8, std::result::Result<Candidate, String>) = if let Some(t) = v.interior {
        if ls.label(j) < 3 || t.iter().any(|&x| x > 0 && ls.label(x) == 1) {
            return Ok(Step::Fixed);
        }
        (1, b1_candidate(ls, j, t[0], t[2], false))
    } else if v.unsaturated {
        let s = ls.shape();
        let a = s
            .triangles()
            .iter()
            .find(|t| tri_with(**t, j - 1, j) && t[2] > j)
            .map(|t| b1_candidate(ls, j, j - 1, t[2], true));
        let b = || {
            s.triangles()
                .iter()
                .find(|t| j + 1 < ls.n() && tri_with(**t, j, j + 1) && t[0] < j)
                .map(|t| b1_candidate(ls, j, t[0], j + 1, false))
        };
        match a.or_else(b) {
            Some(c) => (2, c),
            None => {
                return Err(no_rewiring(
                    ls,
                    j,
                    2,
                    None,
                    vec!["no triangle {v_{j-1}, v_j, v_k} with k > j or {v_j, v_{j+1}, v_k} with k < j".into()],
                ))
            }
        }
    } else {
        let fans = ls.label_one_fans(j);
        let Some(fan) = fans.first() else {
            return Ok(Step::Fixed);
        };
        old_fan = Some(*fan);
        let c = b2_geometry(ls, j, fan).map(|(out, kind, side)| Candidate {
            out,
            kind,
            e: None,
            f: None,
            side: Some(side),
            apex: if kind == MoveKind::B2a { j } else { j + 1 },
        });
        (3, c)
    };

    let before_measure = measure(ls);
    let mut notes = Vec::new();
    let chosen = match proposal {
        Ok(c) => {
            let fails = postcondition_failures(ls, &before_measure, &c, old_fan.as_ref());
            if fails.is_empty() {
                Some(c)
            } else {
                notes.push(format!("explicit rewiring rejected: {}", fails.join("; ")));
                None
            }
        }
        Err(why) => {
            notes.push(format!("explicit rewiring unavailable: {why}"));
            None
        }
    };
    let chosen = match chosen {
        Some(c) => c,
        None => {
            let options = label_options(ls, j, case);
            match fallback_search(ls, &before_measure, &options, old_fan.as_ref()) {
                Some((c, count)) => {
                    notes.push(format!("fallback search over triangulations, {count} survivors"));
                    c
                }
                None => {
                    let labels_out = options.first().map(|o| o.0.clone());
                    return Err(no_rewiring(ls, j, case, labels_out, notes));
                }
            }
        }
    };
    let record = MoveRecord {
        kind: chosen.kind,
        case,
        j,
        e: chosen.e,
        f: chosen.f,
        side: chosen.side,
        before: ls.clone(),
        after: chosen.out.clone(),
        notes,
    };
    Ok(Step::Moved(Box::new(chosen.out), Box::new(record)))
}

fn b1_candidate(ls: &LabelledSubdivision, j: usize, p: usize, q: usize, f_from_degree: bool) -> std::result::Result<Candidate, String> {
    b1_geometry(ls, j, p, q, f_from_degree).map(|o| Candidate {
        out: o.ls,
        kind: MoveKind::B1,
        e: Some(o.e),
        f: Some(o.f),
        side: None,
        apex: j + 2,
    })
}

fn label_options(ls: &LabelledSubdivision, j: usize, case: u8) -> Vec<(Sequence, Candidate)> {
    let mut out = Vec::new();
    let dummy = |labels: &Sequence| {
        LabelledSubdivision::new(Subdivision::fan_at_v0(labels.len()), labels.clone()).unwrap()
    };
    if case == 3 {
        for (side, kind) in [(B2Side::After, MoveKind::B2a), (B2Side::Before, MoveKind::B2b)] {
            if let Ok(l) = b2_label(ls.labels(), j, side) {
                let apex = if side == B2Side::After { j } else { j + 1 };
                let c = Candidate { out: dummy(&l), kind, e: None, f: None, side: Some(side), apex };
                out.push((l, c));
            }
        }
    } else {
        let aj = ls.label(j);
        for e in 2..aj {
            if let Ok(l) = b1_label(ls.labels(), j, e) {
                let c = Candidate {
                    out: dummy(&l),
                    kind: MoveKind::B1,
                    e: Some(e),
                    f: Some(aj + 1 - e),
                    side: None,
                    apex: j + 2,
                };
                out.push((l, c));
            }
        }
    }
    out
}

/// Default bound on the number of F-steps: `(len - 1)` B1 moves plus
/// `len^2` B2 moves, with some room for intermediate growth.
pub fn step_bound(ls: &LabelledSubdivision) -> usize {
    let k = ls.labels().len();
    k.saturating_sub(1) + k * k + 1
}

pub fn f_run(ls: &LabelledSubdivision) -> Result<Run> {
    let bound = step_bound(ls);
    let mut cur = ls.clone();
    let mut trace = Vec::new();
    loop {
        match f_step(&cur)? {
            Step::Fixed => return Ok(Run { result: cur, trace }),
            Step::Moved(next, rec) => {
                if trace.len() >= bound {
                    return Err(Error::IterationBound(bound));
                }
                trace.push(*rec);
                cur = *next;
            }
        }
    }
}

/// Position of the label-1 entry whose image is the rightmost -1 node of the
/// dual chain.
pub fn rightmost_minus_one(labels: &Sequence) -> Option<usize> {
    let (c, assoc) = r_dual(labels);
    let node = (1..=c.len()).rev().find(|&p| c.get(p) == Some(1))?;
    let found = assoc
        .pairs()
        .filter(|&(i, jj)| jj == node && labels.get(i) == Some(1))
        .map(|(i, _)| i)
        .next();
    found
}

fn inverse_b1(y: &LabelledSubdivision, j: usize) -> Option<LabelledSubdivision> {
    let n = y.n();
    if j < 3 || j + 2 >= n || y.label(j - 1) != 2 || y.label(j + 1) != 2 {
        return None;
    }
    let (e, f) = (y.label(j - 2), y.label(j + 2));
    if e < 2 || f < 2 {
        return None;
    }
    let s = y.shape();
    let u = [j - 2, j - 1, j, j + 1, j + 2];
    for fan in s.find_fans() {
        let x = fan.spokes;
        if x[1] != u[1] || x[2] != u[2] || x[3] != u[3] {
            continue;
        }
        let (p, q, rt) = (x[0], x[4], fan.root);
        let (t1, t2) = (tri(p, u[0], u[1]), tri(u[3], u[4], q));
        if !s.contains(t1) || !s.contains(t2) {
            continue;
        }
        let removed: Vec<Triangle> = fan.triangles().into_iter().chain([t1, t2]).collect();
        let m = |v: usize| if v < u[0] { v } else if v <= u[4] { u[0] } else { v - 4 };
        let mut ts: BTreeSet<Triangle> = BTreeSet::new();
        for t in s.triangles() {
            if removed.contains(t) {
                continue;
            }
            if t.iter().any(|&v| (u[1]..=u[3]).contains(&v)) {
                return None;
            }
            ts.insert(relabel(*t, m));
        }
        ts.insert(tri(m(p), u[0], m(q)));
        ts.insert(tri(m(p), m(q), m(rt)));
        let mut labels = y.labels().entries()[..u[0] - 1].to_vec();
        labels.push(e + f - 1);
        labels.extend_from_slice(&y.labels().entries()[u[4]..]);
        if let Ok(x) = build(n - 4, ts, labels) {
            return Some(x);
        }
    }
    None
}

fn inverse_b2a(y: &LabelledSubdivision, j: usize) -> Option<LabelledSubdivision> {
    let n = y.n();
    if j < 2 || j + 2 >= n || y.label(j + 1) != 2 || y.label(j - 1) < 2 {
        return None;
    }
    let s = y.shape();
    let w = j + 1;
    for fan in s.find_fans() {
        let x = fan.spokes;
        if x[2] != j || x[3] != w {
            continue;
        }
        let (so, rt, x2, x5) = (fan.root, x[0], x[1], x[4]);
        let last = tri(w, j + 2, x5);
        if !s.contains(last) {
            continue;
        }
        let removed: Vec<Triangle> = fan.triangles().into_iter().chain([last]).collect();
        let m = |v: usize| if v < w { v } else { v - 1 };
        let mut ts = BTreeSet::new();
        for t in s.triangles() {
            if removed.contains(t) {
                continue;
            }
            if t.contains(&w) {
                return None;
            }
            ts.insert(relabel(*t, m));
        }
        let (rt, x2, x3, x4, x5, so) = (m(rt), m(x2), j, m(j + 2), m(x5), m(so));
        ts.extend([tri(rt, x2, x3), tri(rt, x3, x4), tri(rt, x4, x5), tri(so, rt, x5)]);
        let mut labels = y.labels().entries().to_vec();
        labels.remove(w - 1);
        labels[j - 2] -= 1;
        if let Ok(x) = build(n - 1, ts, labels) {
            return Some(x);
        }
    }
    None
}

fn inverse_b2b(y: &LabelledSubdivision, j: usize) -> Option<LabelledSubdivision> {
    let n = y.n();
    if j < 3 || j + 1 >= n || y.label(j - 1) != 2 || y.label(j + 1) < 2 {
        return None;
    }
    let s = y.shape();
    let w = j - 1;
    for fan in s.find_fans() {
        let x = fan.spokes;
        if x[1] != w || x[2] != j {
            continue;
        }
        let (so, x1, x4, rt) = (fan.root, x[0], x[3], x[4]);
        let Some(t) = s.across(x1, w, tri(so, x1, w)) else {
            continue;
        };
        let x2 = t.into_iter().find(|&v| v != x1 && v != w).unwrap();
        if !(x1 < x2 && x2 < w) {
            continue;
        }
        let removed: Vec<Triangle> = fan.triangles().into_iter().chain([t]).collect();
        let m = |v: usize| if v < w { v } else { v - 1 };
        let mut ts = BTreeSet::new();
        for t in s.triangles() {
            if removed.contains(t) {
                continue;
            }
            if t.contains(&w) {
                return None;
            }
            ts.insert(relabel(*t, m));
        }
        let (so, x1, x2, x3, x4, rt) = (m(so), m(x1), m(x2), m(j), m(x4), m(rt));
        ts.extend([tri(rt, x1, x2), tri(rt, x2, x3), tri(rt, x3, x4), tri(so, x1, rt)]);
        let mut labels = y.labels().entries().to_vec();
        labels[j] -= 1;
        labels.remove(w - 1);
        if let Ok(x) = build(n - 1, ts, labels) {
            return Some(x);
        }
    }
    None
}

/// Undo the move that produced the rightmost -1 node, if `y` is the image
/// of such a move under F.
pub fn g_step(y: &LabelledSubdivision) -> Result<Option<(LabelledSubdivision, MoveRecord)>> {
    let Some(j) = rightmost_minus_one(y.labels()) else {
        return Ok(None);
    };
    let candidates = [inverse_b1(y, j), inverse_b2a(y, j), inverse_b2b(y, j)];
    for x in candidates.into_iter().flatten() {
        if !x.is_admissible() {
            continue;
        }
        if let Ok(Step::Moved(out, rec)) = f_step(&x) {
            if *out == *y {
                return Ok(Some((x, *rec)));
            }
        }
    }
    Ok(None)
}

pub fn g_run(y: &LabelledSubdivision) -> Result<Run> {
    let bound = step_bound(y) + y.n();
    let mut cur = y.clone();
    let mut trace = Vec::new();
    while let Some((x, rec)) = g_step(&cur)? {
        if trace.len() >= bound {
            return Err(Error::IterationBound(bound));
        }
        trace.push(rec);
        cur = x;
    }
    Ok(Run { result: cur, trace })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seq(v: &[u32]) -> Sequence {
        Sequence::new(v.to_vec()).unwrap()
    }

    fn ls(n: usize, ts: &[Triangle], labels: &[u32]) -> LabelledSubdivision {
        LabelledSubdivision::new(Subdivision::new(n, ts.iter().copied()).unwrap(), seq(labels)).unwrap()
    }

    #[test]
    fn b1_labels() {
        assert_eq!(b1_label(&seq(&[3, 2, 3, 2]), 3, 2).unwrap(), seq(&[3, 2, 2, 2, 1, 2, 2, 2]));
        assert_eq!(b1_label(&seq(&[4]), 1, 2).unwrap(), seq(&[2, 2, 1, 2, 3]));
        assert!(b1_label(&seq(&[2]), 1, 2).is_err());
        let before = ChainGraph::from(r(&seq(&[3, 2, 3, 2])));
        let after = ChainGraph::from(r(&seq(&[3, 2, 2, 2, 1, 2, 2, 2])));
        assert_eq!(before.blow_up(2).unwrap(), after);
    }

    #[test]
    fn b2_labels() {
        let a = seq(&[3, 2, 2, 2, 1, 2, 2, 2]);
        let b = b2_label(&a, 5, B2Side::After).unwrap();
        assert_eq!(b, seq(&[3, 2, 2, 3, 1, 2, 2, 2, 2]));
        assert_eq!(r(&b), seq(&[2, 5, 2, 1, 5]));
        assert_eq!(b2_label(&seq(&[2, 1, 2]), 2, B2Side::Before).unwrap(), seq(&[2, 2, 1, 3]));
    }

    #[test]
    fn f_examples() {
        let pent = ls(5, &[[0, 1, 4], [1, 2, 3], [1, 3, 4]], &[3, 2, 3, 2]);
        match f_step(&pent).unwrap() {
            Step::Moved(out, rec) => {
                assert_eq!(rec.case, 2);
                assert_eq!(rec.j, 3);
                assert_eq!(out.labels(), &seq(&[3, 2, 2, 2, 1, 2, 2, 2]));
            }
            Step::Fixed => panic!("expected a move"),
        }
        let q = ls(4, &[[0, 1, 3], [1, 2, 3]], &[2, 2, 2]);
        assert_eq!(f_step(&q).unwrap(), Step::Fixed);
        let fan = LabelledSubdivision::new(Subdivision::fan_at_v0(4), seq(&[2, 5, 3, 2])).unwrap();
        assert_eq!(f_step(&fan).unwrap(), Step::Fixed);
        let q = ls(4, &[[0, 1, 3], [1, 2, 3]], &[2, 3, 2]);
        let run = f_run(&q).unwrap();
        assert_eq!(run.result, q);
        assert!(run.trace.is_empty());
    }

    #[test]
    fn f_reaches_worked_element() {
        let pent = ls(5, &[[0, 1, 4], [1, 2, 3], [1, 3, 4]], &[3, 2, 3, 2]);
        let run = f_run(&pent).unwrap();
        let p9 = ls(
            9,
            &[[0, 1, 4], [1, 2, 3], [1, 3, 4], [0, 4, 5], [0, 5, 6], [0, 6, 8], [6, 7, 8]],
            &[3, 2, 2, 2, 1, 2, 2, 2],
        );
        assert_eq!(run.result, p9);
        let back = g_run(&p9).unwrap();
        assert_eq!(back.result, pent);
    }

    #[test]
    fn hexagon_one_step() {
        let hex = ls(6, &[[0, 1, 5], [1, 2, 3], [1, 3, 5], [3, 4, 5]], &[3, 2, 3, 2, 3]);
        let Step::Moved(out, rec) = f_step(&hex).unwrap() else {
            panic!("expected a move")
        };
        assert_eq!(rec.case, 1);
        assert!(out.in_p());
    }

    #[test]
    fn rightmost() {
        assert_eq!(rightmost_minus_one(&seq(&[3, 2, 2, 2, 1, 2, 2, 2])), Some(5));
        assert_eq!(rightmost_minus_one(&seq(&[2, 2])), None);
    }
}
