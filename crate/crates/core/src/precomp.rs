//! Per-vertex data consumed by the transforms: the vertex bases beta_v, the
//! prefix sums sigma_{v,i}, the stored phi values and the delta heads.

use crate::basisgen::{alpha_of, delta_of};
use crate::error::{Error, Result};
use crate::field::{Fe, Field};
use crate::redtree::{validate, ReductionTree};

/// Tables for one vertex. Internal-only fields are empty (or one) at leaves.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VertexTable {
    pub basis: Vec<Fe>,
    /// 1 / beta_{v,0}.
    pub head_inv: Fe,
    /// sigma_{v,i} for i < n_v - d_v.
    pub sigma: Vec<Fe>,
    /// phi_alpha[i][u] = phi_v(first_leaf + u, sigma_{v,i}) for u < d_v.
    pub phi_alpha: Vec<Vec<Fe>>,
    /// beta_{v_delta,0}.
    pub delta_head: Fe,
    pub delta_head_inv: Fe,
}

#[derive(Clone, Debug)]
pub struct PrecompTable {
    field: Field,
    tree: ReductionTree,
    verts: Vec<VertexTable>,
}

/// beta_v for every vertex, indexed like the tree arena.
pub fn compute_vertex_bases(f: &Field, tree: &ReductionTree, beta: &[Fe]) -> Result<Vec<Vec<Fe>>> {
    if !validate(f, tree, beta) {
        return Err(Error::InvalidTree(format!("{tree} is not a reduction tree for the given basis")));
    }
    let mut out = vec![Vec::new(); tree.len()];
    out[0] = beta.to_vec();
    for v in 0..tree.len() {
        if let Some((a, d)) = tree.children(v) {
            let dv = tree.d(v);
            out[a] = alpha_of(&out[v], dv)?;
            out[d] = delta_of(f, &out[v], dv)?;
        }
    }
    Ok(out)
}

/// phi_v(u, lambda) for a leaf index u below v, by direct recursion.
pub fn phi(f: &Field, tree: &ReductionTree, bases: &[Vec<Fe>], v: usize, u: usize, lambda: Fe) -> Result<Fe> {
    let node = tree.node(v);
    if u < node.first_leaf || u >= node.first_leaf + node.leaves {
        return Err(Error::Range(format!("leaf {u} is not below vertex {v}")));
    }
    let q = f.div(lambda, bases[v][0])?;
    match tree.children(v) {
        None => Ok(q),
        Some((a, _)) if u < tree.node(a).first_leaf + tree.n_v(a) => phi(f, tree, bases, a, u, lambda),
        Some((_, d)) => phi(f, tree, bases, d, u, f.pow2k(q, tree.d(v) as u32) + q),
    }
}

impl PrecompTable {
    pub fn build(f: &Field, tree: &ReductionTree, beta: &[Fe]) -> Result<PrecompTable> {
        let bases = compute_vertex_bases(f, tree, beta)?;
        let mut verts = Vec::with_capacity(tree.len());
        for v in 0..tree.len() {
            let basis = bases[v].clone();
            let head_inv = f.inv(basis[0])?;
            let mut vt = VertexTable {
                basis,
                head_inv,
                sigma: Vec::new(),
                phi_alpha: Vec::new(),
                delta_head: Fe::ONE,
                delta_head_inv: Fe::ONE,
            };
            if let Some((_, dchild)) = tree.children(v) {
                let d = tree.d(v);
                let first = tree.node(v).first_leaf;
                let mut acc = Fe::ZERO;
                for &b in &vt.basis[d..] {
                    acc += b;
                    vt.sigma.push(acc);
                }
                for &s in &vt.sigma {
                    let row = (0..d)
                        .map(|u| phi(f, tree, &bases, v, first + u, s))
                        .collect::<Result<Vec<_>>>()?;
                    vt.phi_alpha.push(row);
                }
                vt.delta_head = bases[dchild][0];
                vt.delta_head_inv = f.inv(vt.delta_head)?;
            }
            verts.push(vt);
        }
        Ok(PrecompTable { field: *f, tree: tree.clone(), verts })
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn tree(&self) -> &ReductionTree {
        &self.tree
    }

    pub fn n(&self) -> usize {
        self.tree.n()
    }

    pub fn vertex(&self, v: usize) -> &VertexTable {
        &self.verts[v]
    }

    pub fn bases(&self) -> Vec<Vec<Fe>> {
        self.verts.iter().map(|vt| vt.basis.clone()).collect()
    }

    /// Total number of stored phi values.
    pub fn phi_entries(&self) -> usize {
        self.verts.iter().map(|vt| vt.phi_alpha.iter().map(Vec::len).sum::<usize>()).sum()
    }

    /// (phi_root(u, lambda)) for leaves u = 0..n.
    pub fn initial_phi_vector(&self, lambda: Fe) -> Vec<Fe> {
        let bases = self.bases();
        (0..self.n())
            .map(|u| phi(&self.field, &self.tree, &bases, 0, u, lambda).expect("validated table"))
            .collect()
    }
}
