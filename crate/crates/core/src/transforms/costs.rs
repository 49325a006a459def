//! Operation counts without touching data.
//!
//! The counted operations of every algorithm depend only on the tree, the
//! parameters and which delta heads equal one, so the recursions can be
//! replayed on sizes alone and memoized. This makes full length sweeps at
//! n = 15 cheap.

use std::collections::HashMap;

use super::{OpCounter, RunParams, Transform};
use crate::error::{range, Result};
use crate::field::Fe;
use crate::precomp::PrecompTable;
use crate::redtree::ReductionTree;

#[derive(Clone, Copy, PartialEq, Eq, Hash)]
enum Key {
    Newton(usize, usize),
    L2X(usize, usize, usize, usize),
    X2L(usize, usize, usize),
    Monomial(usize, usize),
}

fn times(o: OpCounter, k: usize) -> OpCounter {
    OpCounter { additions: o.additions * k as u64, multiplications: o.multiplications * k as u64 }
}

fn adds(k: usize) -> OpCounter {
    OpCounter { additions: k as u64, multiplications: 0 }
}

/// Memoized operation counts for one precomputed table.
pub struct CostModel<'a> {
    table: &'a PrecompTable,
    memo: HashMap<Key, OpCounter>,
}

impl<'a> CostModel<'a> {
    pub fn new(table: &'a PrecompTable) -> CostModel<'a> {
        CostModel { table, memo: HashMap::new() }
    }

    /// Counts that `Transform::run` would report for these parameters.
    pub fn cost(&mut self, t: Transform, p: &RunParams) -> Result<OpCounter> {
        let n = self.table.n();
        let size = 1usize << n;
        let root = ReductionTree::ROOT;
        let ell = p.ell;
        if ell == 0 || ell > size {
            return Err(range(format!("length {ell} outside 1..=2^{n}")));
        }
        Ok(match t {
            Transform::N2X | Transform::X2N => self.newton(root, ell),
            Transform::L2X => {
                if p.b > 1 || p.c > ell || p.c + p.b > size || p.c + p.b == 0 {
                    return Err(range("L2X parameters out of range"));
                }
                self.l2x(root, p.c, ell, p.b)
            }
            Transform::X2L => {
                if p.c == 0 || p.c > size {
                    return Err(range("X2L parameters out of range"));
                }
                self.x2l(root, p.c, ell)
            }
            Transform::X2M | Transform::M2X => self.monomial(root, ell),
            Transform::Taylor | Transform::TaylorInverse => {
                if p.t < 2 {
                    return Err(range("block size must be at least 2"));
                }
                taylor_cost(p.t, ell)
            }
        })
    }

    fn newton(&mut self, v: usize, ell: usize) -> OpCounter {
        let tree = self.table.tree();
        let Some((va, vd)) = tree.children(v) else {
            return if ell == 2 { OpCounter { additions: 1, multiplications: 1 } } else { OpCounter::default() };
        };
        let key = Key::Newton(v, ell);
        if let Some(&o) = self.memo.get(&key) {
            return o;
        }
        let d = tree.d(v);
        let s = 1 << d;
        let l1 = ell.div_ceil(s) - 1;
        let l2 = ell - s * l1;
        let l2p = s.min(ell);
        let mut o = times(self.newton(va, s), l1);
        o += adds(l1 * d);
        o += self.newton(va, l2);
        o += times(self.newton(vd, l1 + 1), l2);
        if l2p > l2 {
            o += times(self.newton(vd, l1), l2p - l2);
        }
        self.memo.insert(key, o);
        o
    }

    fn l2x(&mut self, v: usize, c: usize, ell: usize, b: usize) -> OpCounter {
        let tree = self.table.tree();
        let Some((va, vd)) = tree.children(v) else {
            let (a, m) = match (c, ell, b) {
                (2, _, _) => (2, 1),
                (1, 2, 1) => (2, 1),
                (0 | 1, 2, _) => (1, 1),
                _ => (0, 0),
            };
            return OpCounter { additions: a, multiplications: m };
        };
        let key = Key::L2X(v, c, ell, b);
        if let Some(&o) = self.memo.get(&key) {
            return o;
        }
        let d = tree.d(v);
        let s = 1 << d;
        let (c1, c2) = (c / s, c % s);
        let (l1, l2) = (ell / s, ell % s);
        let l2p = s.min(ell);
        let bp = (b + c2).min(1);
        let (sm, tm) = (c2.min(l2), c2.max(l2));
        let full_rows = (c1 + bp).saturating_sub(1);
        let mut o = times(self.l2x(va, s, s, 0), full_rows);
        o += adds(full_rows * d);
        if bp == 0 {
            o += self.l2x(va, s, s, 0);
        }
        if tm > c2 {
            o += times(self.l2x(vd, c1, l1 + 1, bp), tm - c2);
        }
        if l2p > tm {
            o += times(self.l2x(vd, c1, l1, bp), l2p - tm);
        }
        if bp == 1 {
            o += self.l2x(va, c2, l2p, b);
        }
        if sm > 0 {
            o += times(self.l2x(vd, c1 + 1, l1 + 1, 0), sm);
        }
        if c2 > sm {
            o += times(self.l2x(vd, c1 + 1, l1, 0), c2 - sm);
        }
        self.memo.insert(key, o);
        o
    }

    fn x2l(&mut self, v: usize, c: usize, ell: usize) -> OpCounter {
        let tree = self.table.tree();
        let Some((va, vd)) = tree.children(v) else {
            let (a, m) = match (c, ell) {
                (2, 2) => (2, 1),
                (1, 2) => (1, 1),
                _ => (0, 0),
            };
            return OpCounter { additions: a, multiplications: m };
        };
        let key = Key::X2L(v, c, ell);
        if let Some(&o) = self.memo.get(&key) {
            return o;
        }
        let d = tree.d(v);
        let s = 1 << d;
        let c1 = c.div_ceil(s) - 1;
        let c2 = c - s * c1;
        let (l1, l2) = (ell / s, ell % s);
        let l2p = s.min(ell);
        let mut o = OpCounter::default();
        if l2 > 0 {
            o += times(self.x2l(vd, c1 + 1, l1 + 1), l2);
        }
        if l2p > l2 {
            o += times(self.x2l(vd, c1 + 1, l1), l2p - l2);
        }
        o += times(self.x2l(va, s, l2p), c1);
        o += adds(c1 * d);
        o += self.x2l(va, c2, l2p);
        self.memo.insert(key, o);
        o
    }

    fn monomial(&mut self, v: usize, ell: usize) -> OpCounter {
        if ell <= 2 {
            return OpCounter::default();
        }
        let tree = self.table.tree();
        let Some((va, vd)) = tree.children(v) else {
            return OpCounter::default();
        };
        let key = Key::Monomial(v, ell);
        if let Some(&o) = self.memo.get(&key) {
            return o;
        }
        let s = 1 << tree.d(v);
        let l1 = ell.div_ceil(s) - 1;
        let l2 = ell - s * l1;
        let l2p = s.min(ell);
        let mut o = times(self.monomial(va, s), l1);
        o += self.monomial(va, l2);
        o += times(self.monomial(vd, l1 + 1), l2);
        if l2p > l2 {
            o += times(self.monomial(vd, l1), l2p - l2);
        }
        if l1 != 0 && self.table.vertex(v).delta_head != Fe::ONE {
            o.multiplications += ((l1 - 1) * (s + 1) + l2) as u64;
        }
        o += taylor_cost(s, ell);
        self.memo.insert(key, o);
        o
    }
}

/// Additions of the Taylor expansion (and of its inverse).
pub fn taylor_cost(t: usize, ell: usize) -> OpCounter {
    let blocks = ell.div_ceil(t);
    let levels = if blocks <= 1 { 0 } else { (usize::BITS - (blocks - 1).leading_zeros()) as usize };
    let mut total = 0;
    for k in 0..levels {
        let bk = t << k;
        let l1 = ell / (2 * bk);
        let l2 = ell - 2 * bk * l1;
        total += l1 * bk + l2.saturating_sub(bk);
    }
    adds(total)
}
