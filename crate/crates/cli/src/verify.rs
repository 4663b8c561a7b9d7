//! The property suite behind `presolve verify`.

use presolve_core::chains::ChainGraph;
use presolve_core::labelled::LabelledSubdivision;
use presolve_core::moves::{f_run, g_run, g_step, measure};
use presolve_core::polygon::{triangulations, IsoMode};
use presolve_core::presolve::{components, enumerate_gj, gj_from_p, p_from_gj, verify_blowdown};
use presolve_core::sequences::{cf_eval, r, r_dual, Sequence};
use serde::Serialize;

#[derive(Debug, Default, Serialize)]
pub struct Summary {
    pub sequences: usize,
    pub m_elements: usize,
    pub p_elements: usize,
    pub moves: usize,
    pub failures: Vec<String>,
}

fn bounded(max_len: usize, max_entry: u32) -> Vec<Sequence> {
    let mut out = Vec::new();
    let mut cur = Vec::new();
    fn rec(max_len: usize, max_entry: u32, cur: &mut Vec<u32>, out: &mut Vec<Sequence>) {
        if cur.len() == max_len {
            return;
        }
        for x in 2..=max_entry {
            cur.push(x);
            out.push(Sequence::new(cur.clone()).unwrap());
            rec(max_len, max_entry, cur, out);
            cur.pop();
        }
    }
    rec(max_len, max_entry, &mut cur, &mut out);
    out
}

fn check_sequence(a: &Sequence, s: &mut Summary) {
    let mut fail = |m: String| s.failures.push(format!("{a}: {m}"));
    let (b, assoc) = r_dual(a);
    if r(&b) != *a {
        fail("R is not an involution".into());
    }
    if r(&a.reverse()) != b.reverse() {
        fail("R does not commute with reversal".into());
    }
    if assoc.transpose() != r_dual(&b).1 {
        fail("association is not symmetric".into());
    }
    if let (Ok(x), Ok(y)) = (cf_eval(a), cf_eval(&b)) {
        if x.numer() != y.numer() || x.numer() - x.denom() != *y.denom() {
            fail(format!("duality fails: {x} vs {y}"));
        }
    }
}

fn check_p_side(a: &Sequence, s: &mut Summary) {
    let search = match enumerate_gj(a) {
        Ok(x) => x,
        Err(e) => return s.failures.push(format!("{a}: {e}")),
    };
    for w in &search.warnings {
        s.failures.push(format!("{a}: {w}"));
    }
    for gj in &search.results {
        s.p_elements += 1;
        match p_from_gj(gj) {
            Ok(p) => {
                if !p.in_p() {
                    s.failures.push(format!("{gj}: not in P"));
                }
                if !verify_blowdown(p.labels(), a) {
                    s.failures.push(format!("{gj}: labels do not contract to R(a)"));
                }
                if gj_from_p(&p).ok().as_ref() != Some(gj) {
                    s.failures.push(format!("{gj}: round trip fails"));
                }
            }
            Err(e) => s.failures.push(format!("{gj}: {e}")),
        }
    }
    for mode in [IsoMode::Strict, IsoMode::V0Reflection] {
        match components(a, mode) {
            Ok(rep) if rep.certificate.holds() => {}
            Ok(rep) => s.failures.push(format!("{a} ({mode:?}): certificate {:?}", rep.certificate)),
            Err(e) => s.failures.push(format!("{a} ({mode:?}): {e}")),
        }
    }
}

fn check_f(a: &Sequence, s: &mut Summary) {
    for shape in triangulations(a.len() + 1) {
        let x = LabelledSubdivision::new(shape, a.clone()).expect("label count matches");
        if !x.is_admissible() {
            continue;
        }
        s.m_elements += 1;
        let run = match f_run(&x) {
            Ok(run) => run,
            Err(e) => {
                s.failures.push(format!("{a}: {e}"));
                continue;
            }
        };
        let mut cur = x.clone();
        for rec in &run.trace {
            s.moves += 1;
            if !cur.is_good() {
                s.failures.push(format!("{a}: intermediate {} is not good", cur.labels()));
            }
            if measure(&rec.after) >= measure(&cur) {
                s.failures.push(format!("{a}: measure did not drop at v{}", rec.j));
            }
            let before = ChainGraph::from(r(cur.labels()));
            let after = ChainGraph::from(r(rec.after.labels()));
            if !after.minus_one_positions().into_iter().any(|p| after.blow_down(p).ok() == Some(before.clone())) {
                s.failures.push(format!("{a}: move at v{} is not one blow-up", rec.j));
            }
            if g_step(&rec.after).ok().flatten().map(|g| g.0) != Some(cur.clone()) {
                s.failures.push(format!("{a}: G does not undo the move at v{}", rec.j));
            }
            cur = rec.after.clone();
        }
        if !run.result.in_p() {
            s.failures.push(format!("{a}: F stopped outside P"));
        }
        if g_run(&run.result).map(|g| g.result).ok() != Some(x) {
            s.failures.push(format!("{a}: G does not return to the start"));
        }
    }
}

pub fn run(max_len: usize, max_entry: u32) -> Summary {
    let mut s = Summary::default();
    for a in bounded(max_len, max_entry) {
        s.sequences += 1;
        check_sequence(&a, &mut s);
        check_p_side(&a, &mut s);
        check_f(&a, &mut s);
    }
    s
}
