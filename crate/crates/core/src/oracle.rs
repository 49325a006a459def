//! Dense ground truth: basis polynomials built from their defining products,
//! change of basis by exact linear algebra, and closed-form count bounds.

use std::fmt;
use std::str::FromStr;

use crate::basisgen::{alpha_of, delta_of, enumerate_point};
use crate::error::{range, Error, Result};
use crate::field::{Fe, Field};
use crate::transforms::PolyBasis;

/// Largest dimension the oracle accepts.
pub const MAX_ORACLE_N: usize = 8;

/// Polynomial with monomial coefficients, low degree first, no trailing zeros.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct DensePoly {
    coeffs: Vec<Fe>,
}

impl DensePoly {
    pub fn new(mut coeffs: Vec<Fe>) -> DensePoly {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        DensePoly { coeffs }
    }

    pub fn zero() -> DensePoly {
        DensePoly::default()
    }

    pub fn constant(c: Fe) -> DensePoly {
        DensePoly::new(vec![c])
    }

    /// x + a.
    pub fn linear(a: Fe) -> DensePoly {
        DensePoly::new(vec![a, Fe::ONE])
    }

    pub fn coeffs(&self) -> &[Fe] {
        &self.coeffs
    }

    /// Coefficient of x^i (zero past the degree).
    pub fn coeff(&self, i: usize) -> Fe {
        self.coeffs.get(i).copied().unwrap_or(Fe::ZERO)
    }

    /// None for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn scale(&self, f: &Field, c: Fe) -> DensePoly {
        DensePoly::new(self.coeffs.iter().map(|&a| f.mul(a, c)).collect())
    }
}

impl fmt::Display for DensePoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        let terms: Vec<String> = self
            .coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(i, c)| match i {
                0 => c.to_string(),
                1 => format!("{c}*x"),
                _ => format!("{c}*x^{i}"),
            })
            .collect();
        f.write_str(&terms.join(" + "))
    }
}

pub fn poly_add(p: &DensePoly, q: &DensePoly) -> DensePoly {
    let n = p.coeffs.len().max(q.coeffs.len());
    DensePoly::new((0..n).map(|i| p.coeff(i) + q.coeff(i)).collect())
}

pub fn poly_mul(f: &Field, p: &DensePoly, q: &DensePoly) -> DensePoly {
    if p.is_zero() || q.is_zero() {
        return DensePoly::zero();
    }
    let mut out = vec![Fe::ZERO; p.coeffs.len() + q.coeffs.len() - 1];
    for (i, &a) in p.coeffs.iter().enumerate() {
        if a.is_zero() {
            continue;
        }
        for (j, &b) in q.coeffs.iter().enumerate() {
            out[i + j] += f.mul(a, b);
        }
    }
    DensePoly::new(out)
}

pub fn poly_eval(f: &Field, p: &DensePoly, x0: Fe) -> Fe {
    p.coeffs.iter().rev().fold(Fe::ZERO, |acc, &c| f.mul(acc, x0) + c)
}

/// p(q(x)).
pub fn poly_compose(f: &Field, p: &DensePoly, q: &DensePoly) -> DensePoly {
    p.coeffs
        .iter()
        .rev()
        .fold(DensePoly::zero(), |acc, &c| poly_add(&poly_mul(f, &acc, q), &DensePoly::constant(c)))
}

/// p(x - lambda), which equals p(x + lambda).
pub fn poly_shift(f: &Field, p: &DensePoly, lambda: Fe) -> DensePoly {
    poly_compose(f, p, &DensePoly::linear(lambda))
}

/// p(w x).
pub fn poly_twist(f: &Field, p: &DensePoly, w: Fe) -> DensePoly {
    let mut pw = Fe::ONE;
    let mut out = Vec::with_capacity(p.coeffs.len());
    for &c in &p.coeffs {
        out.push(f.mul(c, pw));
        pw = f.mul(pw, w);
    }
    DensePoly::new(out)
}

/// Kinds of basis polynomial built by `basis_poly`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BasisKind {
    Lagrange,
    Newton,
    Lch,
}

fn check_n(beta: &[Fe]) -> Result<usize> {
    let n = beta.len();
    if n > MAX_ORACLE_N {
        return Err(range(format!("oracle supports n <= {MAX_ORACLE_N}, got {n}")));
    }
    Ok(n)
}

fn points(beta: &[Fe]) -> Result<Vec<Fe>> {
    (0..1u64 << beta.len()).map(|i| enumerate_point(beta, i)).collect()
}

/// prod over j in js of (x - w_j) / (w_i - w_j).
fn normalized_product(f: &Field, pts: &[Fe], i: usize, js: impl Iterator<Item = usize>) -> Result<DensePoly> {
    let mut p = DensePoly::constant(Fe::ONE);
    let mut denom = Fe::ONE;
    for j in js {
        p = poly_mul(f, &p, &DensePoly::linear(pts[j]));
        denom = f.mul(denom, pts[i] + pts[j]);
    }
    Ok(p.scale(f, f.inv(denom)?))
}

/// The i-th Lagrange, Newton or LCH basis polynomial for the subspace spanned by beta.
pub fn basis_poly(f: &Field, kind: BasisKind, beta: &[Fe], i: usize) -> Result<DensePoly> {
    let n = check_n(beta)?;
    if i >= 1 << n {
        return Err(range(format!("index {i} outside 0..2^{n}")));
    }
    let pts = points(beta)?;
    match kind {
        BasisKind::Lagrange => normalized_product(f, &pts, i, (0..1 << n).filter(|&j| j != i)),
        BasisKind::Newton => normalized_product(f, &pts, i, 0..i),
        BasisKind::Lch => {
            let mut p = DensePoly::constant(Fe::ONE);
            for k in 0..n {
                if i >> k & 1 == 1 {
                    p = poly_mul(f, &p, &normalized_product(f, &pts, 1 << k, 0..1 << k)?);
                }
            }
            Ok(p)
        }
    }
}

/// Dense square matrix, row major.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BasisMatrix {
    n: usize,
    data: Vec<Fe>,
}

impl BasisMatrix {
    pub fn zero(n: usize) -> BasisMatrix {
        BasisMatrix { n, data: vec![Fe::ZERO; n * n] }
    }

    pub fn identity(n: usize) -> BasisMatrix {
        let mut m = BasisMatrix::zero(n);
        for i in 0..n {
            m.set(i, i, Fe::ONE);
        }
        m
    }

    /// Column i holds the first n monomial coefficients of cols[i].
    pub fn from_columns(cols: &[DensePoly]) -> BasisMatrix {
        let n = cols.len();
        let mut m = BasisMatrix::zero(n);
        for (j, p) in cols.iter().enumerate() {
            for i in 0..n {
                m.set(i, j, p.coeff(i));
            }
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> Fe {
        self.data[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, x: Fe) {
        self.data[i * self.n + j] = x;
    }

    pub fn mul_vec(&self, f: &Field, x: &[Fe]) -> Vec<Fe> {
        (0..self.n)
            .map(|i| (0..self.n).fold(Fe::ZERO, |acc, j| acc + f.mul(self.get(i, j), x[j])))
            .collect()
    }
}

/// Solve mat * x = rhs by Gaussian elimination.
pub fn solve(f: &Field, mat: &BasisMatrix, rhs: &[Fe]) -> Result<Vec<Fe>> {
    let n = mat.dim();
    if rhs.len() != n {
        return Err(range(format!("right-hand side has length {}, expected {n}", rhs.len())));
    }
    let mut a = mat.data.clone();
    let mut b = rhs.to_vec();
    for col in 0..n {
        let piv = (col..n).find(|&r| !a[r * n + col].is_zero()).ok_or(Error::Singular)?;
        if piv != col {
            for k in 0..n {
                a.swap(piv * n + k, col * n + k);
            }
            b.swap(piv, col);
        }
        let inv = f.inv(a[col * n + col])?;
        for k in col..n {
            a[col * n + k] = f.mul(a[col * n + k], inv);
        }
        b[col] = f.mul(b[col], inv);
        for r in 0..n {
            let factor = a[r * n + col];
            if r == col || factor.is_zero() {
                continue;
            }
            for k in col..n {
                let t = f.mul(factor, a[col * n + k]);
                a[r * n + k] += t;
            }
            let t = f.mul(factor, b[col]);
            b[r] += t;
        }
    }
    Ok(b)
}

/// Solve an upper triangular system given by graded columns (deg cols[i] = i).
fn solve_graded(f: &Field, cols: &[DensePoly], target: &DensePoly) -> Result<Vec<Fe>> {
    let ell = cols.len();
    if target.degree().is_some_and(|d| d >= ell) {
        return Err(range("target degree exceeds the basis"));
    }
    let mut rem: Vec<Fe> = (0..ell).map(|i| target.coeff(i)).collect();
    let mut out = vec![Fe::ZERO; ell];
    for i in (0..ell).rev() {
        let lead = cols[i].coeff(i);
        if lead.is_zero() {
            return Err(Error::Singular);
        }
        let c = f.div(rem[i], lead)?;
        out[i] = c;
        if !c.is_zero() {
            for (k, &p) in cols[i].coeffs().iter().enumerate().take(i + 1) {
                rem[k] += f.mul(c, p);
            }
        }
    }
    Ok(out)
}

/// Basis polynomials for one basis and shift, built once and reused.
#[derive(Clone, Debug)]
pub struct Oracle {
    field: Field,
    beta: Vec<Fe>,
    lambda: Fe,
    points: Vec<Fe>,
    /// N_i(x - lambda).
    newton: Vec<DensePoly>,
    /// L_i(x - lambda).
    lagrange: Vec<DensePoly>,
    lch: Vec<DensePoly>,
    /// X_i(beta_0 x).
    lch_twisted: Vec<DensePoly>,
}

/// Bases understood by the oracle, including the twisted LCH basis.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum OracleBasis {
    Monomial,
    Newton,
    Lagrange,
    Lch,
    TwistedLch,
}

impl From<PolyBasis> for OracleBasis {
    fn from(b: PolyBasis) -> OracleBasis {
        match b {
            PolyBasis::Monomial => OracleBasis::Monomial,
            PolyBasis::Newton => OracleBasis::Newton,
            PolyBasis::Lagrange => OracleBasis::Lagrange,
            PolyBasis::Lch => OracleBasis::Lch,
        }
    }
}

impl Oracle {
    pub fn new(f: &Field, beta: &[Fe], lambda: Fe) -> Result<Oracle> {
        let n = check_n(beta)?;
        if beta.is_empty() || beta[0].is_zero() {
            return Err(Error::Domain("basis must be nonempty with nonzero first entry".into()));
        }
        let size = 1 << n;
        let build = |kind| -> Result<Vec<DensePoly>> { (0..size).map(|i| basis_poly(f, kind, beta, i)).collect() };
        let shift = |v: Vec<DensePoly>| -> Vec<DensePoly> { v.iter().map(|p| poly_shift(f, p, lambda)).collect() };
        let lch = build(BasisKind::Lch)?;
        let lch_twisted = lch.iter().map(|p| poly_twist(f, p, beta[0])).collect();
        let pts = points(beta)?;
        Ok(Oracle {
            field: *f,
            beta: beta.to_vec(),
            lambda,
            points: pts.iter().map(|&w| w + lambda).collect(),
            newton: shift(build(BasisKind::Newton)?),
            lagrange: shift(build(BasisKind::Lagrange)?),
            lch,
            lch_twisted,
        })
    }

    pub fn beta(&self) -> &[Fe] {
        &self.beta
    }

    pub fn lambda(&self) -> Fe {
        self.lambda
    }

    /// The evaluation points lambda + omega_j.
    pub fn points(&self) -> &[Fe] {
        &self.points
    }

    fn graded(&self, kind: OracleBasis, ell: usize) -> Vec<DensePoly> {
        match kind {
            OracleBasis::Monomial => (0..ell)
                .map(|i| {
                    let mut c = vec![Fe::ZERO; i + 1];
                    c[i] = Fe::ONE;
                    DensePoly::new(c)
                })
                .collect(),
            OracleBasis::Newton => self.newton[..ell].to_vec(),
            OracleBasis::Lch => self.lch[..ell].to_vec(),
            OracleBasis::TwistedLch => self.lch_twisted[..ell].to_vec(),
            OracleBasis::Lagrange => unreachable!("Lagrange basis is not graded"),
        }
    }

    /// The polynomial F of degree < ell with the given coefficients.
    pub fn polynomial(&self, kind: OracleBasis, coeffs: &[Fe]) -> Result<DensePoly> {
        let f = &self.field;
        let ell = coeffs.len();
        if ell == 0 || ell > self.points.len() {
            return Err(range(format!("length {ell} outside 1..=2^{}", self.beta.len())));
        }
        if kind == OracleBasis::Lagrange {
            if ell == self.points.len() {
                return Ok(self
                    .lagrange
                    .iter()
                    .zip(coeffs)
                    .fold(DensePoly::zero(), |acc, (p, &c)| poly_add(&acc, &p.scale(f, c))));
            }
            // The unique F of degree < ell with F(lambda + omega_j) = f_j, j < ell.
            let mut m = BasisMatrix::zero(ell);
            for j in 0..ell {
                let mut pw = Fe::ONE;
                for i in 0..ell {
                    m.set(j, i, pw);
                    pw = f.mul(pw, self.points[j]);
                }
            }
            return Ok(DensePoly::new(solve(f, &m, coeffs)?));
        }
        Ok(self
            .graded(kind, ell)
            .iter()
            .zip(coeffs)
            .fold(DensePoly::zero(), |acc, (p, &c)| poly_add(&acc, &p.scale(f, c))))
    }

    /// First `ell` coefficients of `p` (of degree < ell) on the target basis.
    pub fn coefficients(&self, kind: OracleBasis, p: &DensePoly, ell: usize) -> Result<Vec<Fe>> {
        if kind == OracleBasis::Lagrange {
            return Ok(self.points[..ell].iter().map(|&x| poly_eval(&self.field, p, x)).collect());
        }
        solve_graded(&self.field, &self.graded(kind, ell), p)
    }

    /// Convert the first ell = coeffs.len() coefficients between bases.
    pub fn convert(&self, from: OracleBasis, to: OracleBasis, coeffs: &[Fe]) -> Result<Vec<Fe>> {
        if from == to {
            return Ok(coeffs.to_vec());
        }
        let p = self.polynomial(from, coeffs)?;
        self.coefficients(to, &p, coeffs.len())
    }

    /// Solve the mixed Lagrange/LCH system for l2x.
    ///
    /// `inputs` holds f_0..f_{c-1} then h_c..h_{ell-1}. Returns h_0..h_{c-1},
    /// followed by f_c when b = 1.
    pub fn l2x_mixed(&self, c: usize, ell: usize, b: usize, inputs: &[Fe]) -> Result<Vec<Fe>> {
        let f = &self.field;
        let size = self.points.len();
        if b > 1 || c > ell || ell > size || c + b == 0 || c + b > size || inputs.len() != ell {
            return Err(range(format!("mixed parameters c = {c}, ell = {ell}, b = {b} out of range")));
        }
        // Unknowns: h_0..h_{c-1} (LCH columns), then f_c..f_{size-1} (shifted Lagrange columns).
        let mut cols: Vec<DensePoly> = self.lch[..c].to_vec();
        cols.extend(self.lagrange[c..].iter().cloned());
        let m = BasisMatrix::from_columns(&cols);
        let mut rhs = DensePoly::zero();
        for j in 0..c {
            rhs = poly_add(&rhs, &self.lagrange[j].scale(f, inputs[j]));
        }
        for i in c..ell {
            rhs = poly_add(&rhs, &self.lch[i].scale(f, inputs[i]));
        }
        let rhs: Vec<Fe> = (0..size).map(|i| rhs.coeff(i)).collect();
        let x = solve(f, &m, &rhs)?;
        Ok(x[..c + b].to_vec())
    }
}

/// One-shot conversion; see `Oracle::convert`.
pub fn oracle_convert(
    f: &Field,
    from: OracleBasis,
    to: OracleBasis,
    beta: &[Fe],
    lambda: Fe,
    coeffs: &[Fe],
) -> Result<Vec<Fe>> {
    Oracle::new(f, beta, lambda)?.convert(from, to, coeffs)
}

/// One-shot mixed solve; see `Oracle::l2x_mixed`.
pub fn oracle_l2x_mixed(f: &Field, beta: &[Fe], lambda: Fe, c: usize, ell: usize, b: usize, inputs: &[Fe]) -> Result<Vec<Fe>> {
    Oracle::new(f, beta, lambda)?.l2x_mixed(c, ell, b, inputs)
}

/// Check the three factorizations of L, N and X for split position d:
/// B_{beta, 2^d i + j} = B_{delta, i}(q(x)) * B_{alpha, j}(x - omega_{gamma, i}),
/// with q = (x/beta_0)^{2^d} - x/beta_0 and no shift for X.
pub fn check_factorization(f: &Field, beta: &[Fe], d: usize) -> Result<bool> {
    let n = check_n(beta)?;
    if d == 0 || d >= n {
        return Err(range(format!("split position {d} outside 1..{n}")));
    }
    let alpha = alpha_of(beta, d)?;
    let gamma = &beta[d..];
    let delta = delta_of(f, beta, d)?;
    let b0_inv = f.inv(beta[0])?;
    let mut q = vec![Fe::ZERO; (1 << d) + 1];
    q[1] = b0_inv;
    q[1 << d] = f.pow2k(b0_inv, d as u32);
    let q = DensePoly::new(q);
    for kind in [BasisKind::Lagrange, BasisKind::Newton, BasisKind::Lch] {
        for i in 0..1usize << (n - d) {
            let outer = poly_compose(f, &basis_poly(f, kind, &delta, i)?, &q);
            let shift = enumerate_point(gamma, i as u64)?;
            for j in 0..1usize << d {
                let mut inner = basis_poly(f, kind, &alpha, j)?;
                if kind != BasisKind::Lch {
                    inner = poly_shift(f, &inner, shift);
                }
                if poly_mul(f, &outer, &inner) != basis_poly(f, kind, beta, (i << d) + j)? {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

/// Closed-form operation count bounds.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BoundId {
    NewtonAdd,
    NewtonMul,
    LagrangeAdd,
    LagrangeMul,
    MonomialAdd,
    MonomialMul,
    CantorNewtonAdd,
    CantorMonomialAdd,
    TaylorAdd,
    L2xAdd,
    L2xMul,
    X2lAdd,
    X2lMul,
}

impl BoundId {
    pub const ALL: [BoundId; 13] = [
        BoundId::NewtonAdd,
        BoundId::NewtonMul,
        BoundId::LagrangeAdd,
        BoundId::LagrangeMul,
        BoundId::MonomialAdd,
        BoundId::MonomialMul,
        BoundId::CantorNewtonAdd,
        BoundId::CantorMonomialAdd,
        BoundId::TaylorAdd,
        BoundId::L2xAdd,
        BoundId::L2xMul,
        BoundId::X2lAdd,
        BoundId::X2lMul,
    ];

    pub fn name(self) -> &'static str {
        match self {
            BoundId::NewtonAdd => "newton_add",
            BoundId::NewtonMul => "newton_mul",
            BoundId::LagrangeAdd => "lagrange_add",
            BoundId::LagrangeMul => "lagrange_mul",
            BoundId::MonomialAdd => "monomial_add",
            BoundId::MonomialMul => "monomial_mul",
            BoundId::CantorNewtonAdd => "cantor_newton_add",
            BoundId::CantorMonomialAdd => "cantor_monomial_add",
            BoundId::TaylorAdd => "taylor_add",
            BoundId::L2xAdd => "l2x_add",
            BoundId::L2xMul => "l2x_mul",
            BoundId::X2lAdd => "x2l_add",
            BoundId::X2lMul => "x2l_mul",
        }
    }
}

impl FromStr for BoundId {
    type Err = Error;

    fn from_str(s: &str) -> Result<BoundId> {
        BoundId::ALL
            .into_iter()
            .find(|b| b.name() == s)
            .ok_or_else(|| Error::Parse(format!("unknown bound id `{s}`")))
    }
}

impl fmt::Display for BoundId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Inputs to the bound formulas. Only the fields a formula uses are read.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BoundParams {
    pub ell: u64,
    pub c: u64,
    pub b: u64,
    pub n: u64,
    pub t: u64,
}

impl BoundParams {
    /// c = ell, b = 0, t = 2, n = ceil(log2 ell).
    pub fn new(ell: u64) -> BoundParams {
        BoundParams { ell, c: ell, b: 0, n: ceil_log2(ell).max(1) as u64, t: 2 }
    }
}

/// ceil(log2 x) for x >= 1, and 0 for x = 0.
pub fn ceil_log2(x: u64) -> i64 {
    if x <= 1 {
        0
    } else {
        (u64::BITS - (x - 1).leading_zeros()) as i64
    }
}

/// Largest integer not exceeding the closed form.
pub fn bound(id: BoundId, p: &BoundParams) -> Result<i64> {
    if p.ell == 0 {
        return Err(range("bounds need ell >= 1"));
    }
    let ell = p.ell as i64;
    let k = ceil_log2(p.ell);
    let half = ell / 2;
    let lagrange_small = |m: u64, mul: bool| -> i64 {
        let m = m as i64;
        let km = ceil_log2(m as u64);
        let factor = if mul { km - 1 } else { 3 * km - 1 };
        ((m - 1) * factor).div_euclid(2) + ell - 1
    };
    let big_mul = || (1i64 << (p.n - 1)) * p.n as i64;
    let big_add = || (1i64 << (p.n - 1)) * (3 * p.n as i64 - 2) + 1;
    let check_mixed = |cb: u64| -> Result<()> {
        if cb == 0 || p.n == 0 || p.n > 62 {
            return Err(range("mixed bounds need c + b >= 1 and 1 <= n <= 62"));
        }
        Ok(())
    };
    Ok(match id {
        BoundId::NewtonAdd => ell * (k - 1) + 1,
        BoundId::NewtonMul => half * k,
        BoundId::LagrangeAdd => half * (3 * k + 1),
        BoundId::LagrangeMul => half * (k + 1),
        BoundId::MonomialAdd => half * (k * (k - 1) / 2),
        BoundId::MonomialMul => half * (3 * k - 4) + 1,
        BoundId::CantorNewtonAdd => ((3 * ell - 2) * k).div_euclid(4),
        BoundId::CantorMonomialAdd => half * k * ceil_log2(ceil_log2(p.ell.max(2)) as u64),
        BoundId::TaylorAdd => {
            if p.t < 2 {
                return Err(range("taylor bound needs t >= 2"));
            }
            half * ceil_log2(p.ell.div_ceil(p.t))
        }
        BoundId::L2xAdd => {
            check_mixed(p.c + p.b)?;
            lagrange_small(p.c + p.b, false).min(big_add())
        }
        BoundId::L2xMul => {
            check_mixed(p.c + p.b)?;
            lagrange_small(p.c + p.b, true).min(big_mul())
        }
        BoundId::X2lAdd => {
            check_mixed(p.c)?;
            lagrange_small(p.c, false).min(big_add())
        }
        BoundId::X2lMul => {
            check_mixed(p.c)?;
            lagrange_small(p.c, true).min(big_mul())
        }
    })
}

/// `bound` looked up by name.
pub fn bound_by_name(id: &str, p: &BoundParams) -> Result<i64> {
    bound(id.parse()?, p)
}
