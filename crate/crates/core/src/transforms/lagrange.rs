use super::{check_vertex, update_shifts, OpCounter, StridedView};
use crate::error::{range, Result};
use crate::field::Fe;
use crate::precomp::PrecompTable;

fn check_view(nv: usize, a: &StridedView) -> Result<()> {
    if a.len() != 1 << nv {
        return Err(range(format!("view of length {} where 2^{nv} is required", a.len())));
    }
    Ok(())
}

/// Mixed Lagrange/LCH input to LCH coefficients.
///
/// On entry a_0..a_{c-1} hold values f_i and a_c..a_{ell-1} hold LCH
/// coefficients h_i; entries from `ell` on are zeroed. On exit a_0..a_{c-1}
/// hold h_0..h_{c-1} and, when b = 1, a_c holds f_c. The rest is scratch.
#[allow(clippy::too_many_arguments)]
pub fn l2x(
    table: &PrecompTable,
    v: usize,
    phi_vec: &[Fe],
    c: usize,
    ell: usize,
    b: usize,
    a: &mut StridedView,
    ops: &mut OpCounter,
) -> Result<()> {
    let nv = check_vertex(table, v, Some(phi_vec))?;
    check_view(nv, a)?;
    if b > 1 {
        return Err(range(format!("b = {b} must be 0 or 1")));
    }
    if ell == 0 || ell > 1 << nv || c > ell || c + b > 1 << nv || c + b == 0 {
        return Err(range(format!("parameters c = {c}, ell = {ell}, b = {b} out of range for n = {nv}")));
    }
    for i in ell..a.len() {
        a.set(i, Fe::ZERO);
    }
    l2x_rec(table, v, phi_vec, c, ell, b, a, ops);
    Ok(())
}

/// Mixed LCH to Lagrange: from h_0..h_{ell-1} produce f_0..f_{c-1}.
///
/// On entry a_0..a_{ell-1} hold h_i; entries from `ell` on are zeroed.
pub fn x2l(
    table: &PrecompTable,
    v: usize,
    phi_vec: &[Fe],
    c: usize,
    ell: usize,
    a: &mut StridedView,
    ops: &mut OpCounter,
) -> Result<()> {
    let nv = check_vertex(table, v, Some(phi_vec))?;
    check_view(nv, a)?;
    if ell == 0 || ell > 1 << nv || c == 0 || c > 1 << nv {
        return Err(range(format!("parameters c = {c}, ell = {ell} out of range for n = {nv}")));
    }
    for i in ell..a.len() {
        a.set(i, Fe::ZERO);
    }
    x2l_rec(table, v, phi_vec, c, ell, a, ops);
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn l2x_rec(
    table: &PrecompTable,
    v: usize,
    phi: &[Fe],
    c: usize,
    ell: usize,
    b: usize,
    a: &mut StridedView,
    ops: &mut OpCounter,
) {
    let tree = table.tree();
    let f = table.field();
    let Some((va, vd)) = tree.children(v) else {
        match (c, ell, b) {
            (2, _, _) => {
                a.set(1, ops.add(a.get(0), a.get(1)));
                let p = ops.mul(f, phi[0], a.get(1));
                a.set(0, ops.add(a.get(0), p));
            }
            (1, 2, 1) => {
                let w = ops.mul(f, phi[0], a.get(1));
                a.set(1, ops.add(a.get(0), a.get(1)));
                a.set(0, ops.add(a.get(0), w));
            }
            (0 | 1, 2, _) => {
                let p = ops.mul(f, phi[0], a.get(1));
                a.set(0, ops.add(a.get(0), p));
            }
            (1, 1, 1) => a.set(1, a.get(0)),
            _ => {}
        }
        return;
    };
    let d = tree.d(v);
    let s = 1 << d;
    let col = 1 << (tree.n_v(v) - d);
    let (c1, c2) = (c / s, c % s);
    let (l1, l2) = (ell / s, ell % s);
    let l2p = s.min(ell);
    let bp = (b + c2).min(1);
    let (sm, tm) = (c2.min(l2), c2.max(l2));
    let mut mu = phi[..d].to_vec();
    let nu = &phi[d..];

    for i in 0..(c1 + bp).saturating_sub(1) {
        l2x_rec(table, va, &mu, s, s, 0, &mut a.sub(s * i, 1, s), ops);
        update_shifts(table, v, i, &mut mu, ops);
    }
    if bp == 0 {
        l2x_rec(table, va, &mu, s, s, 0, &mut a.sub(s * (c1 - 1), 1, s), ops);
    }
    for j in c2..tm {
        l2x_rec(table, vd, nu, c1, l1 + 1, bp, &mut a.sub(j, s, col), ops);
    }
    for j in tm..l2p {
        l2x_rec(table, vd, nu, c1, l1, bp, &mut a.sub(j, s, col), ops);
    }
    if bp == 1 {
        l2x_rec(table, va, &mu, c2, l2p, b, &mut a.sub(s * c1, 1, s), ops);
    }
    for j in 0..sm {
        l2x_rec(table, vd, nu, c1 + 1, l1 + 1, 0, &mut a.sub(j, s, col), ops);
    }
    for j in sm..c2 {
        l2x_rec(table, vd, nu, c1 + 1, l1, 0, &mut a.sub(j, s, col), ops);
    }
}

fn x2l_rec(table: &PrecompTable, v: usize, phi: &[Fe], c: usize, ell: usize, a: &mut StridedView, ops: &mut OpCounter) {
    let tree = table.tree();
    let f = table.field();
    let Some((va, vd)) = tree.children(v) else {
        match (c, ell) {
            (2, 2) => {
                let p = ops.mul(f, phi[0], a.get(1));
                a.set(0, ops.add(a.get(0), p));
                a.set(1, ops.add(a.get(0), a.get(1)));
            }
            (1, 2) => {
                let p = ops.mul(f, phi[0], a.get(1));
                a.set(0, ops.add(a.get(0), p));
            }
            (2, 1) => a.set(1, a.get(0)),
            _ => {}
        }
        return;
    };
    let d = tree.d(v);
    let s = 1 << d;
    let col = 1 << (tree.n_v(v) - d);
    let c1 = c.div_ceil(s) - 1;
    let c2 = c - s * c1;
    let (l1, l2) = (ell / s, ell % s);
    let l2p = s.min(ell);
    let nu = &phi[d..];
    for j in 0..l2 {
        x2l_rec(table, vd, nu, c1 + 1, l1 + 1, &mut a.sub(j, s, col), ops);
    }
    for j in l2..l2p {
        x2l_rec(table, vd, nu, c1 + 1, l1, &mut a.sub(j, s, col), ops);
    }
    let mut mu = phi[..d].to_vec();
    for i in 0..c1 {
        x2l_rec(table, va, &mu, s, l2p, &mut a.sub(s * i, 1, s), ops);
        update_shifts(table, v, i, &mut mu, ops);
    }
    x2l_rec(table, va, &mu, c2, l2p, &mut a.sub(s * c1, 1, s), ops);
}
