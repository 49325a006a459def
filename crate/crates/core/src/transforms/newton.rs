use super::{check_vertex, update_shifts, OpCounter, StridedView};
use crate::error::{range, Result};
use crate::field::Fe;
use crate::precomp::PrecompTable;

fn check(table: &PrecompTable, v: usize, phi_vec: &[Fe], ell: usize, a: &StridedView) -> Result<()> {
    let nv = check_vertex(table, v, Some(phi_vec))?;
    if ell == 0 || ell > 1 << nv {
        return Err(range(format!("length {ell} outside 1..=2^{nv}")));
    }
    if a.len() < ell {
        return Err(range(format!("view of length {} shorter than {ell}", a.len())));
    }
    Ok(())
}

/// Newton basis at lambda + omega_i to the LCH basis, first `ell` coefficients.
pub fn n2x(
    table: &PrecompTable,
    v: usize,
    phi_vec: &[Fe],
    ell: usize,
    a: &mut StridedView,
    ops: &mut OpCounter,
) -> Result<()> {
    check(table, v, phi_vec, ell, a)?;
    n2x_rec(table, v, phi_vec, ell, a, ops);
    Ok(())
}

/// LCH basis to the Newton basis at lambda + omega_i.
pub fn x2n(
    table: &PrecompTable,
    v: usize,
    phi_vec: &[Fe],
    ell: usize,
    a: &mut StridedView,
    ops: &mut OpCounter,
) -> Result<()> {
    check(table, v, phi_vec, ell, a)?;
    x2n_rec(table, v, phi_vec, ell, a, ops);
    Ok(())
}

struct Split {
    s: usize,
    l1: usize,
    l2: usize,
    l2p: usize,
}

fn split(d: usize, ell: usize) -> Split {
    let s = 1 << d;
    let l1 = ell.div_ceil(s) - 1;
    Split { s, l1, l2: ell - s * l1, l2p: s.min(ell) }
}

fn n2x_rec(table: &PrecompTable, v: usize, phi: &[Fe], ell: usize, a: &mut StridedView, ops: &mut OpCounter) {
    let tree = table.tree();
    let Some((va, vd)) = tree.children(v) else {
        if ell == 2 {
            let p = ops.mul(table.field(), phi[0], a.get(1));
            a.set(0, ops.add(a.get(0), p));
        }
        return;
    };
    let d = tree.d(v);
    let Split { s, l1, l2, l2p } = split(d, ell);
    let mut mu = phi[..d].to_vec();
    let nu = &phi[d..];
    for i in 0..l1 {
        n2x_rec(table, va, &mu, s, &mut a.sub(s * i, 1, s), ops);
        update_shifts(table, v, i, &mut mu, ops);
    }
    n2x_rec(table, va, &mu, l2, &mut a.sub(s * l1, 1, l2), ops);
    for j in 0..l2 {
        n2x_rec(table, vd, nu, l1 + 1, &mut a.sub(j, s, l1 + 1), ops);
    }
    for j in l2..l2p {
        n2x_rec(table, vd, nu, l1, &mut a.sub(j, s, l1), ops);
    }
}

fn x2n_rec(table: &PrecompTable, v: usize, phi: &[Fe], ell: usize, a: &mut StridedView, ops: &mut OpCounter) {
    let tree = table.tree();
    let Some((va, vd)) = tree.children(v) else {
        if ell == 2 {
            let p = ops.mul(table.field(), phi[0], a.get(1));
            a.set(0, ops.add(a.get(0), p));
        }
        return;
    };
    let d = tree.d(v);
    let Split { s, l1, l2, l2p } = split(d, ell);
    let nu = &phi[d..];
    for j in 0..l2 {
        x2n_rec(table, vd, nu, l1 + 1, &mut a.sub(j, s, l1 + 1), ops);
    }
    for j in l2..l2p {
        x2n_rec(table, vd, nu, l1, &mut a.sub(j, s, l1), ops);
    }
    let mut mu = phi[..d].to_vec();
    for i in 0..l1 {
        x2n_rec(table, va, &mu, s, &mut a.sub(s * i, 1, s), ops);
        update_shifts(table, v, i, &mut mu, ops);
    }
    x2n_rec(table, va, &mu, l2, &mut a.sub(s * l1, 1, l2), ops);
}
