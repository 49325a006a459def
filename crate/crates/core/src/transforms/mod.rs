//! In-place basis conversions with operation counting.
//!
//! The recursive algorithms operate on strided views of a coefficient buffer.
//! Every field addition and multiplication on buffer data or on the shift
//! vectors is counted; precomputation and vector copies are not.

mod costs;
mod lagrange;
mod monomial;
mod newton;

use std::fmt;
use std::str::FromStr;

pub use costs::{taylor_cost, CostModel};
pub use lagrange::{l2x, x2l};
pub use monomial::{m2x, scale_by_powers, taylor_expand, taylor_inverse, x2m};
pub use newton::{n2x, x2n};

use crate::error::{range, Error, Result};
use crate::field::{Fe, Field};
use crate::precomp::PrecompTable;

/// Counted field operations.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub struct OpCounter {
    pub additions: u64,
    pub multiplications: u64,
}

impl OpCounter {
    pub(crate) fn add(&mut self, a: Fe, b: Fe) -> Fe {
        self.additions += 1;
        a + b
    }

    pub(crate) fn mul(&mut self, f: &Field, a: Fe, b: Fe) -> Fe {
        self.multiplications += 1;
        f.mul(a, b)
    }
}

impl std::ops::AddAssign for OpCounter {
    fn add_assign(&mut self, o: OpCounter) {
        self.additions += o.additions;
        self.multiplications += o.multiplications;
    }
}

/// A stride-addressed window into a coefficient buffer.
pub struct StridedView<'a> {
    data: &'a mut [Fe],
    base: usize,
    stride: usize,
    len: usize,
}

impl<'a> StridedView<'a> {
    pub fn new(data: &'a mut [Fe], base: usize, stride: usize, len: usize) -> Result<StridedView<'a>> {
        if len > 0 && base + (len - 1) * stride >= data.len() {
            return Err(range(format!(
                "view (base {base}, stride {stride}, length {len}) exceeds buffer of length {}",
                data.len()
            )));
        }
        Ok(StridedView { data, base, stride, len })
    }

    pub fn full(data: &'a mut [Fe]) -> StridedView<'a> {
        let len = data.len();
        StridedView { data, base: 0, stride: 1, len }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn get(&self, i: usize) -> Fe {
        debug_assert!(i < self.len);
        self.data[self.base + i * self.stride]
    }

    #[inline]
    pub fn set(&mut self, i: usize, x: Fe) {
        debug_assert!(i < self.len);
        self.data[self.base + i * self.stride] = x;
    }

    /// Entries start, start + step, ... (len of them), in view coordinates.
    pub fn sub(&mut self, start: usize, step: usize, len: usize) -> StridedView<'_> {
        debug_assert!(len == 0 || start + (len - 1) * step < self.len);
        StridedView {
            base: self.base + start * self.stride,
            stride: self.stride * step,
            len,
            data: self.data,
        }
    }

    pub fn to_vec(&self) -> Vec<Fe> {
        (0..self.len).map(|i| self.get(i)).collect()
    }
}

/// Index of the lowest zero bit of i.
pub fn ruler_delta(i: usize) -> usize {
    (!i).trailing_zeros() as usize
}

/// mu <- mu + phi_v(., sigma_{v, Delta(i)}), counting d_v additions.
pub(crate) fn update_shifts(table: &PrecompTable, v: usize, i: usize, mu: &mut [Fe], ops: &mut OpCounter) {
    let row = &table.vertex(v).phi_alpha[ruler_delta(i)];
    for (m, &p) in mu.iter_mut().zip(row) {
        *m = ops.add(*m, p);
    }
}

pub(crate) fn check_vertex(table: &PrecompTable, v: usize, phi_vec: Option<&[Fe]>) -> Result<usize> {
    if v >= table.tree().len() {
        return Err(range(format!("vertex {v} does not exist")));
    }
    let nv = table.tree().n_v(v);
    if let Some(p) = phi_vec {
        if p.len() != nv {
            return Err(range(format!("phi vector has length {}, expected {nv}", p.len())));
        }
    }
    if nv >= usize::BITS as usize {
        return Err(range("vertex too large"));
    }
    Ok(nv)
}

/// The polynomial bases handled by `convert`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum PolyBasis {
    Monomial,
    Newton,
    Lagrange,
    Lch,
}

impl PolyBasis {
    pub const ALL: [PolyBasis; 4] = [PolyBasis::Monomial, PolyBasis::Newton, PolyBasis::Lagrange, PolyBasis::Lch];
}

impl FromStr for PolyBasis {
    type Err = Error;

    fn from_str(s: &str) -> Result<PolyBasis> {
        match s {
            "monomial" => Ok(PolyBasis::Monomial),
            "newton" => Ok(PolyBasis::Newton),
            "lagrange" => Ok(PolyBasis::Lagrange),
            "lch" => Ok(PolyBasis::Lch),
            _ => Err(Error::Parse(format!("unknown polynomial basis `{s}`"))),
        }
    }
}

impl fmt::Display for PolyBasis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PolyBasis::Monomial => "monomial",
            PolyBasis::Newton => "newton",
            PolyBasis::Lagrange => "lagrange",
            PolyBasis::Lch => "lch",
        })
    }
}

/// Output of `convert`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Converted {
    pub coeffs: Vec<Fe>,
    /// Counted operations of the core algorithms.
    pub ops: OpCounter,
    /// Multiplications spent on the x -> beta_0 x substitution.
    pub twist_multiplications: u64,
}

fn check_ell(table: &PrecompTable, ell: usize) -> Result<()> {
    let n = table.n();
    if ell == 0 || n >= usize::BITS as usize || ell > 1usize << n {
        return Err(range(format!("length {ell} outside 1..=2^{n}")));
    }
    Ok(())
}

fn to_lch(table: &PrecompTable, from: PolyBasis, lambda: Fe, coeffs: &mut Vec<Fe>, out: &mut Converted) -> Result<()> {
    let ell = coeffs.len();
    let root = crate::redtree::ReductionTree::ROOT;
    match from {
        PolyBasis::Lch => {}
        PolyBasis::Newton => {
            let phi = table.initial_phi_vector(lambda);
            n2x(table, root, &phi, ell, &mut StridedView::full(coeffs), &mut out.ops)?;
        }
        PolyBasis::Lagrange => {
            let phi = table.initial_phi_vector(lambda);
            coeffs.resize(1 << table.n(), Fe::ZERO);
            l2x(table, root, &phi, ell, ell, 0, &mut StridedView::full(coeffs), &mut out.ops)?;
            coeffs.truncate(ell);
        }
        PolyBasis::Monomial => {
            let mut twist = OpCounter::default();
            scale_by_powers(table.field(), &mut StridedView::full(coeffs), table.vertex(root).basis[0], &mut twist)?;
            out.twist_multiplications += twist.multiplications;
            m2x(table, root, ell, &mut StridedView::full(coeffs), &mut out.ops)?;
        }
    }
    Ok(())
}

fn from_lch(table: &PrecompTable, to: PolyBasis, lambda: Fe, coeffs: &mut Vec<Fe>, out: &mut Converted) -> Result<()> {
    let ell = coeffs.len();
    let root = crate::redtree::ReductionTree::ROOT;
    match to {
        PolyBasis::Lch => {}
        PolyBasis::Newton => {
            let phi = table.initial_phi_vector(lambda);
            x2n(table, root, &phi, ell, &mut StridedView::full(coeffs), &mut out.ops)?;
        }
        PolyBasis::Lagrange => {
            let phi = table.initial_phi_vector(lambda);
            coeffs.resize(1 << table.n(), Fe::ZERO);
            x2l(table, root, &phi, ell, ell, &mut StridedView::full(coeffs), &mut out.ops)?;
            coeffs.truncate(ell);
        }
        PolyBasis::Monomial => {
            x2m(table, root, ell, &mut StridedView::full(coeffs), &mut out.ops)?;
            let mut twist = OpCounter::default();
            scale_by_powers(table.field(), &mut StridedView::full(coeffs), table.vertex(root).head_inv, &mut twist)?;
            out.twist_multiplications += twist.multiplications;
        }
    }
    Ok(())
}

/// Convert the first `coeffs.len()` coefficients from one basis to another.
///
/// Newton and Lagrange bases are taken at the shifted points lambda + omega_i;
/// `lambda` is ignored for monomial/LCH pairs. Conversions not involving the
/// LCH basis pass through it.
pub fn convert(table: &PrecompTable, from: PolyBasis, to: PolyBasis, lambda: Fe, coeffs: &[Fe]) -> Result<Converted> {
    check_ell(table, coeffs.len())?;
    let mut out = Converted { coeffs: Vec::new(), ops: OpCounter::default(), twist_multiplications: 0 };
    let mut buf = coeffs.to_vec();
    if from != to {
        to_lch(table, from, lambda, &mut buf, &mut out)?;
        from_lch(table, to, lambda, &mut buf, &mut out)?;
    }
    out.coeffs = buf;
    Ok(out)
}

/// The individually exposed algorithms, for counting and the CLI.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Transform {
    N2X,
    X2N,
    L2X,
    X2L,
    X2M,
    M2X,
    Taylor,
    TaylorInverse,
}

impl Transform {
    pub const ALL: [Transform; 8] = [
        Transform::N2X,
        Transform::X2N,
        Transform::L2X,
        Transform::X2L,
        Transform::X2M,
        Transform::M2X,
        Transform::Taylor,
        Transform::TaylorInverse,
    ];

    /// The six tree-driven conversions.
    pub const CONVERSIONS: [Transform; 6] =
        [Transform::N2X, Transform::X2N, Transform::L2X, Transform::X2L, Transform::X2M, Transform::M2X];

    pub fn name(self) -> &'static str {
        match self {
            Transform::N2X => "n2x",
            Transform::X2N => "x2n",
            Transform::L2X => "l2x",
            Transform::X2L => "x2l",
            Transform::X2M => "x2m",
            Transform::M2X => "m2x",
            Transform::Taylor => "taylor",
            Transform::TaylorInverse => "taylor_inverse",
        }
    }

    /// Run at the root on `buf` (length 2^n for L2X/X2L, `ell` otherwise).
    ///
    /// `c` and `b` apply to L2X/X2L; `t` is the Taylor block size.
    pub fn run(self, table: &PrecompTable, params: &RunParams, buf: &mut [Fe]) -> Result<OpCounter> {
        let mut ops = OpCounter::default();
        let root = crate::redtree::ReductionTree::ROOT;
        let ell = params.ell;
        let needed = match self {
            Transform::L2X | Transform::X2L => 1usize << table.n(),
            _ => ell,
        };
        if buf.len() != needed {
            return Err(range(format!("{} needs a buffer of length {needed}, got {}", self.name(), buf.len())));
        }
        let mut view = StridedView::full(buf);
        match self {
            Transform::N2X | Transform::X2N | Transform::L2X | Transform::X2L => {
                let phi = table.initial_phi_vector(params.lambda);
                match self {
                    Transform::N2X => n2x(table, root, &phi, ell, &mut view, &mut ops)?,
                    Transform::X2N => x2n(table, root, &phi, ell, &mut view, &mut ops)?,
                    Transform::L2X => l2x(table, root, &phi, params.c, ell, params.b, &mut view, &mut ops)?,
                    _ => x2l(table, root, &phi, params.c, ell, &mut view, &mut ops)?,
                }
            }
            Transform::X2M => x2m(table, root, ell, &mut view, &mut ops)?,
            Transform::M2X => m2x(table, root, ell, &mut view, &mut ops)?,
            Transform::Taylor => taylor_expand(params.t, ell, &mut view, &mut ops)?,
            Transform::TaylorInverse => taylor_inverse(params.t, ell, &mut view, &mut ops)?,
        }
        Ok(ops)
    }
}

impl FromStr for Transform {
    type Err = Error;

    fn from_str(s: &str) -> Result<Transform> {
        Transform::ALL
            .into_iter()
            .find(|t| t.name() == s)
            .ok_or_else(|| Error::Parse(format!("unknown transform `{s}`")))
    }
}

impl fmt::Display for Transform {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Parameters for `Transform::run`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RunParams {
    pub ell: usize,
    pub c: usize,
    pub b: usize,
    pub t: usize,
    pub lambda: Fe,
}

impl RunParams {
    /// c = ell, b = 0, t = 2, lambda = 0.
    pub fn new(ell: usize) -> RunParams {
        RunParams { ell, c: ell, b: 0, t: 2, lambda: Fe::ZERO }
    }
}
