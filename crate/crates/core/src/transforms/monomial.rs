use super::{check_vertex, OpCounter, StridedView};
use crate::error::{range, Error, Result};
use crate::field::{Fe, Field};
use crate::precomp::PrecompTable;

fn check_taylor(t: usize, ell: usize, a: &StridedView) -> Result<()> {
    if t < 2 {
        return Err(range(format!("block size t = {t} must be at least 2")));
    }
    if a.len() < ell {
        return Err(range(format!("view of length {} shorter than {ell}", a.len())));
    }
    Ok(())
}

fn taylor_levels(t: usize, ell: usize) -> usize {
    let blocks = ell.div_ceil(t);
    if blocks <= 1 {
        0
    } else {
        (usize::BITS - (blocks - 1).leading_zeros()) as usize
    }
}

/// Expansion of the first `ell` coefficients in powers of x^t - x.
pub fn taylor_expand(t: usize, ell: usize, a: &mut StridedView, ops: &mut OpCounter) -> Result<()> {
    check_taylor(t, ell, a)?;
    for k in (0..taylor_levels(t, ell)).rev() {
        taylor_level(t, k, ell, a, ops, false);
    }
    Ok(())
}

/// Inverse of `taylor_expand`.
pub fn taylor_inverse(t: usize, ell: usize, a: &mut StridedView, ops: &mut OpCounter) -> Result<()> {
    check_taylor(t, ell, a)?;
    for k in 0..taylor_levels(t, ell) {
        taylor_level(t, k, ell, a, ops, true);
    }
    Ok(())
}

fn taylor_level(t: usize, k: usize, ell: usize, a: &mut StridedView, ops: &mut OpCounter, ascending: bool) {
    let bk = t << k;
    let l1 = ell / (2 * bk);
    let l2 = ell - 2 * bk * l1;
    let mut step = |a: &mut StridedView, i: usize, j: usize| {
        let dst = 2 * bk * i + (1 << k) + j;
        let src = bk * (2 * i + 1) + j;
        a.set(dst, ops.add(a.get(dst), a.get(src)));
    };
    let tail = l2.saturating_sub(bk);
    for i in 0..=l1 {
        let len = if i < l1 { bk } else { tail };
        if ascending {
            for j in 0..len {
                step(a, i, j);
            }
        } else {
            for j in (0..len).rev() {
                step(a, i, j);
            }
        }
    }
}

/// Multiply a_i by w^i for i >= 1, using at most 2 len - 3 multiplications.
pub fn scale_by_powers(f: &Field, a: &mut StridedView, w: Fe, ops: &mut OpCounter) -> Result<()> {
    if w.is_zero() {
        return Err(Error::Domain("scaling by powers of zero".into()));
    }
    if w == Fe::ONE || a.len() < 2 {
        return Ok(());
    }
    let mut p = w;
    a.set(1, ops.mul(f, a.get(1), p));
    for i in 2..a.len() {
        p = ops.mul(f, p, w);
        a.set(i, ops.mul(f, a.get(i), p));
    }
    Ok(())
}

fn check(table: &PrecompTable, v: usize, ell: usize, a: &StridedView) -> Result<()> {
    let nv = check_vertex(table, v, None)?;
    if ell == 0 || ell > 1 << nv {
        return Err(range(format!("length {ell} outside 1..=2^{nv}")));
    }
    if a.len() < ell {
        return Err(range(format!("view of length {} shorter than {ell}", a.len())));
    }
    Ok(())
}

/// LCH to monomial coefficients of F(beta_{v,0} x).
pub fn x2m(table: &PrecompTable, v: usize, ell: usize, a: &mut StridedView, ops: &mut OpCounter) -> Result<()> {
    check(table, v, ell, a)?;
    x2m_rec(table, v, ell, a, ops);
    Ok(())
}

/// Monomial coefficients of F(beta_{v,0} x) to LCH.
pub fn m2x(table: &PrecompTable, v: usize, ell: usize, a: &mut StridedView, ops: &mut OpCounter) -> Result<()> {
    check(table, v, ell, a)?;
    m2x_rec(table, v, ell, a, ops);
    Ok(())
}

/// Row i (1 <= i <= l1) scaled by w^i; the last row has only l2 entries.
fn scale_rows(f: &Field, w: Fe, s: usize, l1: usize, l2: usize, a: &mut StridedView, ops: &mut OpCounter) {
    if l1 == 0 || w == Fe::ONE {
        return;
    }
    let mut p = w;
    for i in 1..l1 {
        for j in 0..s {
            a.set(s * i + j, ops.mul(f, a.get(s * i + j), p));
        }
        p = ops.mul(f, p, w);
    }
    for j in 0..l2 {
        a.set(s * l1 + j, ops.mul(f, a.get(s * l1 + j), p));
    }
}

fn x2m_rec(table: &PrecompTable, v: usize, ell: usize, a: &mut StridedView, ops: &mut OpCounter) {
    if ell <= 2 {
        return;
    }
    let tree = table.tree();
    let Some((va, vd)) = tree.children(v) else {
        return;
    };
    let s = 1 << tree.d(v);
    let l1 = ell.div_ceil(s) - 1;
    let l2 = ell - s * l1;
    let l2p = s.min(ell);
    for i in 0..l1 {
        x2m_rec(table, va, s, &mut a.sub(s * i, 1, s), ops);
    }
    x2m_rec(table, va, l2, &mut a.sub(s * l1, 1, l2), ops);
    for j in 0..l2 {
        x2m_rec(table, vd, l1 + 1, &mut a.sub(j, s, l1 + 1), ops);
    }
    for j in l2..l2p {
        x2m_rec(table, vd, l1, &mut a.sub(j, s, l1), ops);
    }
    scale_rows(table.field(), table.vertex(v).delta_head_inv, s, l1, l2, a, ops);
    taylor_inverse(s, ell, a, ops).expect("valid Taylor parameters");
}

fn m2x_rec(table: &PrecompTable, v: usize, ell: usize, a: &mut StridedView, ops: &mut OpCounter) {
    if ell <= 2 {
        return;
    }
    let tree = table.tree();
    let Some((va, vd)) = tree.children(v) else {
        return;
    };
    let s = 1 << tree.d(v);
    let l1 = ell.div_ceil(s) - 1;
    let l2 = ell - s * l1;
    let l2p = s.min(ell);
    taylor_expand(s, ell, a, ops).expect("valid Taylor parameters");
    scale_rows(table.field(), table.vertex(v).delta_head, s, l1, l2, a, ops);
    for j in 0..l2 {
        m2x_rec(table, vd, l1 + 1, &mut a.sub(j, s, l1 + 1), ops);
    }
    for j in l2..l2p {
        m2x_rec(table, vd, l1, &mut a.sub(j, s, l1), ops);
    }
    for i in 0..l1 {
        m2x_rec(table, va, s, &mut a.sub(s * i, 1, s), ops);
    }
    m2x_rec(table, va, l2, &mut a.sub(s * l1, 1, l2), ops);
}
