//! Reduction trees: full binary trees whose first child is the alpha child and
//! second child the delta child.
//!
//! Vertices live in a preorder arena with the root at index 0. Leaves read
//! left to right are numbered 0..n and leaf i corresponds to beta_i.

use std::collections::BTreeSet;
use std::fmt;

use crate::basisgen::{alpha_of, delta_of};
use crate::error::{Error, Result};
use crate::field::{Fe, Field};

pub const MAX_ENUMERATION: usize = 10;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Node {
    /// (alpha, delta) children of an internal vertex.
    pub children: Option<(usize, usize)>,
    /// n_v, the number of leaves below v.
    pub leaves: usize,
    /// Index of the leftmost leaf below v.
    pub first_leaf: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReductionTree {
    nodes: Vec<Node>,
}

impl ReductionTree {
    pub fn leaf() -> ReductionTree {
        ReductionTree { nodes: vec![Node { children: None, leaves: 1, first_leaf: 0 }] }
    }

    /// The tree with `alpha` as alpha-subtree and `delta` as delta-subtree of a new root.
    pub fn join(alpha: &ReductionTree, delta: &ReductionTree) -> ReductionTree {
        let mut nodes = Vec::with_capacity(alpha.len() + delta.len() + 1);
        nodes.push(Node { children: None, leaves: alpha.n() + delta.n(), first_leaf: 0 });
        let a = copy_subtree(&mut nodes, alpha, 0, 0);
        let d = copy_subtree(&mut nodes, delta, 0, alpha.n());
        nodes[0].children = Some((a, d));
        ReductionTree { nodes }
    }

    /// Build top-down, choosing d_v = split(n_v) at every vertex with n_v >= 2.
    pub fn from_rule(n: usize, split: &dyn Fn(usize) -> usize) -> ReductionTree {
        fn rec(nodes: &mut Vec<Node>, n: usize, first: usize, split: &dyn Fn(usize) -> usize) -> usize {
            let id = nodes.len();
            nodes.push(Node { children: None, leaves: n, first_leaf: first });
            if n > 1 {
                let d = split(n);
                assert!(d >= 1 && d < n, "split rule returned {d} for {n} leaves");
                let a = rec(nodes, d, first, split);
                let b = rec(nodes, n - d, first + d, split);
                nodes[id].children = Some((a, b));
            }
            id
        }
        let mut nodes = Vec::with_capacity(2 * n);
        rec(&mut nodes, n.max(1), 0, split);
        ReductionTree { nodes }
    }

    pub const ROOT: usize = 0;

    /// Number of leaves.
    pub fn n(&self) -> usize {
        self.nodes[0].leaves
    }

    /// Number of vertices.
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn node(&self, v: usize) -> &Node {
        &self.nodes[v]
    }

    pub fn is_leaf(&self, v: usize) -> bool {
        self.nodes[v].children.is_none()
    }

    pub fn children(&self, v: usize) -> Option<(usize, usize)> {
        self.nodes[v].children
    }

    pub fn n_v(&self, v: usize) -> usize {
        self.nodes[v].leaves
    }

    /// d_v, the leaf count of the alpha child; 0 at leaves.
    pub fn d(&self, v: usize) -> usize {
        self.nodes[v].children.map_or(0, |(a, _)| self.nodes[a].leaves)
    }

    pub fn internal_vertices(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.len()).filter(|&v| !self.is_leaf(v))
    }

    /// The set of values taken by d over all vertices.
    pub fn d_image(&self) -> BTreeSet<usize> {
        (0..self.len()).map(|v| self.d(v)).collect()
    }

    pub fn subtree(&self, v: usize) -> ReductionTree {
        let mut nodes = Vec::new();
        copy_subtree(&mut nodes, self, v, 0);
        ReductionTree { nodes }
    }

    pub fn parse(s: &str) -> Result<ReductionTree> {
        fn rec(b: &[u8], pos: &mut usize) -> Option<ReductionTree> {
            match b.get(*pos)? {
                b'*' => {
                    *pos += 1;
                    Some(ReductionTree::leaf())
                }
                b'(' => {
                    *pos += 1;
                    let a = rec(b, pos)?;
                    if b.get(*pos)? != &b',' {
                        return None;
                    }
                    *pos += 1;
                    let d = rec(b, pos)?;
                    if b.get(*pos)? != &b')' {
                        return None;
                    }
                    *pos += 1;
                    Some(ReductionTree::join(&a, &d))
                }
                _ => None,
            }
        }
        let compact: Vec<u8> = s.bytes().filter(|c| !c.is_ascii_whitespace()).collect();
        let mut pos = 0;
        match rec(&compact, &mut pos) {
            Some(t) if pos == compact.len() => Ok(t),
            _ => Err(Error::Parse(format!("bad tree `{s}`"))),
        }
    }
}

fn copy_subtree(nodes: &mut Vec<Node>, src: &ReductionTree, v: usize, first: usize) -> usize {
    let id = nodes.len();
    let n = src.nodes[v];
    nodes.push(Node { children: None, leaves: n.leaves, first_leaf: first });
    if let Some((a, d)) = n.children {
        let ca = copy_subtree(nodes, src, a, first);
        let cd = copy_subtree(nodes, src, d, first + src.nodes[a].leaves);
        nodes[id].children = Some((ca, cd));
    }
    id
}

impl fmt::Display for ReductionTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn rec(t: &ReductionTree, v: usize, f: &mut fmt::Formatter<'_>) -> fmt::Result {
            match t.children(v) {
                None => f.write_str("*"),
                Some((a, d)) => {
                    f.write_str("(")?;
                    rec(t, a, f)?;
                    f.write_str(",")?;
                    rec(t, d, f)?;
                    f.write_str(")")
                }
            }
        }
        rec(self, 0, f)
    }
}

/// Whether `tree` is a reduction tree for `beta`.
pub fn validate(f: &Field, tree: &ReductionTree, beta: &[Fe]) -> bool {
    fn rec(f: &Field, t: &ReductionTree, v: usize, beta: &[Fe]) -> bool {
        if t.n_v(v) != beta.len() {
            return false;
        }
        let Some((a, dv)) = t.children(v) else {
            return true;
        };
        let d = t.n_v(a);
        if beta[0].is_zero() || !f.degree().is_multiple_of(d as u32) {
            return false;
        }
        let inv0 = f.inv(beta[0]).expect("nonzero");
        let sub_ok = beta[..d]
            .iter()
            .all(|&b| f.in_subfield(f.mul(b, inv0), d as u32).unwrap_or(false));
        if !sub_ok {
            return false;
        }
        let (Ok(alpha), Ok(delta)) = (alpha_of(beta, d), delta_of(f, beta, d)) else {
            return false;
        };
        rec(f, t, a, &alpha) && rec(f, t, dv, &delta)
    }
    !beta.is_empty() && rec(f, tree, 0, beta)
}

/// The comb: every alpha child is a leaf.
pub fn build_trivial(n: usize) -> ReductionTree {
    ReductionTree::from_rule(n, &|_| 1)
}

pub fn cantor_split(n: usize) -> usize {
    n.next_power_of_two() / 2
}

/// d_v = 2^(ceil(log2 n_v) - 1) throughout.
pub fn build_cantor_tree(n: usize) -> ReductionTree {
    ReductionTree::from_rule(n, &cantor_split)
}

fn check_degree_set(degrees: &[usize]) -> Result<()> {
    if !degrees.contains(&1) {
        return Err(Error::Domain("degree set must contain 1".into()));
    }
    Ok(())
}

/// d_v = max { i in I : i < n_v }.
pub fn build_max_tree(n: usize, degrees: &[usize]) -> Result<ReductionTree> {
    check_degree_set(degrees)?;
    Ok(ReductionTree::from_rule(n, &|nv| {
        degrees.iter().copied().filter(|&i| i < nv).max().unwrap()
    }))
}

/// d_v minimizes max(i, n_v - i) over I, ties broken towards the largest i.
pub fn build_balanced_tree(n: usize, degrees: &[usize]) -> Result<ReductionTree> {
    check_degree_set(degrees)?;
    Ok(ReductionTree::from_rule(n, &|nv| {
        degrees
            .iter()
            .copied()
            .filter(|&i| i >= 1 && i < nv)
            .min_by_key(|&i| (i.max(nv - i), std::cmp::Reverse(i)))
            .unwrap()
    }))
}

/// Cantor-shaped outer tree over ceil(n/t) blocks with block i replaced by `base_trees[i]`.
pub fn graft_cantor_tree(t: usize, n: usize, base_trees: &[ReductionTree]) -> Result<ReductionTree> {
    if t == 0 || n == 0 {
        return Err(Error::Domain("graft needs t >= 1 and n >= 1".into()));
    }
    let blocks = n.div_ceil(t);
    if base_trees.len() != blocks {
        return Err(Error::InvalidTree(format!("expected {blocks} base trees, got {}", base_trees.len())));
    }
    for (i, bt) in base_trees.iter().enumerate() {
        let want = (n - i * t).min(t);
        if bt.n() != want {
            return Err(Error::InvalidTree(format!("base tree {i} has {} leaves, expected {want}", bt.n())));
        }
    }
    let outer = build_cantor_tree(blocks);
    fn rec(outer: &ReductionTree, v: usize, bases: &[ReductionTree]) -> ReductionTree {
        match outer.children(v) {
            None => bases[outer.node(v).first_leaf].clone(),
            Some((a, d)) => ReductionTree::join(&rec(outer, a, bases), &rec(outer, d, bases)),
        }
    }
    Ok(rec(&outer, 0, base_trees))
}

/// Every full binary tree with n leaves, each exactly once.
pub fn enumerate_trees(n: usize) -> Result<Vec<ReductionTree>> {
    if n == 0 || n > MAX_ENUMERATION {
        return Err(Error::Range(format!("tree enumeration supports 1..={MAX_ENUMERATION} leaves, got {n}")));
    }
    let mut by_size: Vec<Vec<ReductionTree>> = vec![Vec::new(), vec![ReductionTree::leaf()]];
    for k in 2..=n {
        let mut out = Vec::new();
        for d in 1..k {
            for a in &by_size[d] {
                for b in &by_size[k - d] {
                    out.push(ReductionTree::join(a, b));
                }
            }
        }
        by_size.push(out);
    }
    Ok(by_size.swap_remove(n))
}

/// Named tree construction strategies.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TreeStrategy {
    Trivial,
    Cantor,
    Max(Vec<usize>),
    Balanced(Vec<usize>),
    Graft(usize),
    Explicit(ReductionTree),
}

fn parse_degree_list(s: &str) -> Result<Vec<usize>> {
    s.split('-')
        .map(|p| {
            p.trim_end_matches('!')
                .parse::<usize>()
                .map_err(|_| Error::Parse(format!("bad degree list `{s}`")))
        })
        .collect()
}

impl TreeStrategy {
    pub fn parse(s: &str) -> Result<TreeStrategy> {
        let s = s.trim();
        if s.starts_with('(') || s == "*" {
            return Ok(TreeStrategy::Explicit(ReductionTree::parse(s)?));
        }
        let (name, arg) = match s.split_once(':') {
            Some((a, b)) => (a, Some(b)),
            None => (s, None),
        };
        match (name, arg) {
            ("trivial", None) => Ok(TreeStrategy::Trivial),
            ("cantor", None) => Ok(TreeStrategy::Cantor),
            ("max", Some(a)) => Ok(TreeStrategy::Max(parse_degree_list(a)?)),
            ("balanced", Some(a)) => Ok(TreeStrategy::Balanced(parse_degree_list(a)?)),
            ("graft", Some(a)) => a
                .parse()
                .ok()
                .filter(|&t| t > 0)
                .map(TreeStrategy::Graft)
                .ok_or_else(|| Error::Parse(format!("bad graft block size `{a}`"))),
            _ => Err(Error::Parse(format!(
                "unknown tree strategy `{s}` (expected trivial, cantor, max:<tower>, balanced:<tower>, graft:<t> or an explicit tree)"
            ))),
        }
    }

    pub fn build(&self, n: usize) -> Result<ReductionTree> {
        match self {
            TreeStrategy::Trivial => Ok(build_trivial(n)),
            TreeStrategy::Cantor => Ok(build_cantor_tree(n)),
            TreeStrategy::Max(i) => build_max_tree(n, i),
            TreeStrategy::Balanced(i) => build_balanced_tree(n, i),
            TreeStrategy::Graft(t) => {
                let bases: Vec<ReductionTree> =
                    (0..n.div_ceil(*t)).map(|i| build_trivial((n - i * t).min(*t))).collect();
                graft_cantor_tree(*t, n, &bases)
            }
            TreeStrategy::Explicit(tree) => {
                if tree.n() != n {
                    return Err(Error::InvalidTree(format!("explicit tree has {} leaves, expected {n}", tree.n())));
                }
                Ok(tree.clone())
            }
        }
    }
}

impl fmt::Display for TreeStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let list = |v: &[usize]| v.iter().map(|d| d.to_string()).collect::<Vec<_>>().join("-");
        match self {
            TreeStrategy::Trivial => f.write_str("trivial"),
            TreeStrategy::Cantor => f.write_str("cantor"),
            TreeStrategy::Max(i) => write!(f, "max:{}", list(i)),
            TreeStrategy::Balanced(i) => write!(f, "balanced:{}", list(i)),
            TreeStrategy::Graft(t) => write!(f, "graft:{t}"),
            TreeStrategy::Explicit(t) => write!(f, "{t}"),
        }
    }
}
