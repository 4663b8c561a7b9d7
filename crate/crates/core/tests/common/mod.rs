#![allow(dead_code)]

use presolve_core::Sequence;

/// All sequences with entries in `min..` and entry-sum at most `max_sum`,
/// the empty one included.
pub fn sequences(max_sum: u32, min: u32) -> Vec<Sequence> {
    let mut out = vec![Sequence::empty()];
    let mut cur = Vec::new();
    fn rec(rest: u32, min: u32, cur: &mut Vec<u32>, out: &mut Vec<Sequence>) {
        for x in min..=rest {
            cur.push(x);
            out.push(Sequence::new(cur.clone()).unwrap());
            rec(rest - x, min, cur, out);
            cur.pop();
        }
    }
    rec(max_sum, min, &mut cur, &mut out);
    out
}

/// Sequences in W2 with bounded length and entries.
pub fn bounded_w2(max_len: usize, max_entry: u32) -> Vec<Sequence> {
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

pub fn seq(s: &str) -> Sequence {
    s.parse().unwrap()
}
