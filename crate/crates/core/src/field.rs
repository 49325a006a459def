//! Arithmetic in GF(2^m), m <= 32.
//!
//! Elements are bit patterns (bit i is the coefficient of x^i) reduced modulo
//! a fixed irreducible polynomial. Subfields are never represented separately:
//! GF(2^d) is the set of ambient elements fixed by the d-th Frobenius power.

use std::fmt;
use std::ops::{Add, AddAssign};
use std::str::FromStr;

use crate::error::{divisibility, Error, Result};

pub const MAX_DEGREE: u32 = 32;

/// A field element as a bit vector.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Fe(pub u32);

impl Fe {
    pub const ZERO: Fe = Fe(0);
    pub const ONE: Fe = Fe(1);

    pub fn is_zero(self) -> bool {
        self.0 == 0
    }
}

impl fmt::Debug for Fe {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Fe({:#x})", self.0)
    }
}

impl fmt::Display for Fe {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:x}", self.0)
    }
}

impl FromStr for Fe {
    type Err = Error;

    fn from_str(s: &str) -> Result<Fe> {
        let t = s.trim();
        let t = t
            .strip_prefix("0x")
            .or_else(|| t.strip_prefix("0X"))
            .unwrap_or(t);
        u32::from_str_radix(t, 16)
            .map(Fe)
            .map_err(|_| Error::Parse(format!("bad field element `{s}`")))
    }
}

// Addition in characteristic 2 is XOR.
#[allow(clippy::suspicious_arithmetic_impl)]
impl Add for Fe {
    type Output = Fe;

    fn add(self, rhs: Fe) -> Fe {
        Fe(self.0 ^ rhs.0)
    }
}

#[allow(clippy::suspicious_op_assign_impl)]
impl AddAssign for Fe {
    fn add_assign(&mut self, rhs: Fe) {
        self.0 ^= rhs.0;
    }
}

fn clmul(a: u32, b: u32) -> u64 {
    let a = a as u64;
    let mut b = b;
    let mut r = 0u64;
    let mut shift = 0;
    while b != 0 {
        let tz = b.trailing_zeros();
        shift += tz;
        b >>= tz;
        r ^= a << shift;
        b >>= 1;
        shift += 1;
    }
    r
}

/// Reduce a polynomial of degree < 2m modulo `modulus` (degree m).
fn reduce(mut x: u64, modulus: u64, m: u32) -> u64 {
    while x >> m != 0 {
        let top = 63 - x.leading_zeros();
        x ^= modulus << (top - m);
    }
    x
}

fn mulmod(a: u64, b: u64, modulus: u64, m: u32) -> u64 {
    reduce(clmul(a as u32, b as u32), modulus, m)
}

fn poly_degree(p: u64) -> i32 {
    63 - p.leading_zeros() as i32
}

fn poly_gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        while a != 0 && poly_degree(a) >= poly_degree(b) {
            a ^= b << (poly_degree(a) - poly_degree(b));
        }
        std::mem::swap(&mut a, &mut b);
    }
    a
}

fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut p = 2;
    while p * p <= n {
        if n.is_multiple_of(p) {
            out.push(p);
            while n.is_multiple_of(p) {
                n /= p;
            }
        }
        p += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

/// Rabin's test: x^(2^m) = x mod f and gcd(x^(2^(m/p)) - x, f) = 1 for primes p | m.
pub fn is_irreducible(modulus: u64, m: u32) -> bool {
    if m == 0 || m > MAX_DEGREE || poly_degree(modulus) != m as i32 {
        return false;
    }
    let frob = |k: u32| {
        let mut x = reduce(2, modulus, m);
        for _ in 0..k {
            x = mulmod(x, x, modulus, m);
        }
        x
    };
    let x = reduce(2, modulus, m);
    if frob(m) != x {
        return false;
    }
    prime_factors(m as u64)
        .into_iter()
        .all(|p| poly_gcd(frob(m / p as u32) ^ x, modulus) == 1)
}

/// The smallest irreducible polynomial of degree m, as a bit pattern.
pub fn smallest_irreducible(m: u32) -> Result<u64> {
    if m == 0 || m > MAX_DEGREE {
        return Err(Error::Domain(format!("unsupported field degree {m}")));
    }
    let top = 1u64 << m;
    (0..top)
        .map(|low| top | low)
        .find(|&p| is_irreducible(p, m))
        .ok_or_else(|| Error::Domain(format!("no irreducible polynomial of degree {m}")))
}

/// The ambient field GF(2^m).
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct Field {
    degree: u32,
    modulus: u64,
    gamma: Fe,
}

impl Field {
    /// GF(2^m) with the lexicographically smallest irreducible modulus.
    pub fn new(m: u32) -> Result<Field> {
        Field::with_modulus(m, smallest_irreducible(m)?)
    }

    pub fn with_modulus(m: u32, modulus: u64) -> Result<Field> {
        if m == 0 || m > MAX_DEGREE {
            return Err(Error::Domain(format!("unsupported field degree {m}")));
        }
        if !is_irreducible(modulus, m) {
            return Err(Error::Domain(format!(
                "modulus {modulus:#x} is not an irreducible polynomial of degree {m}"
            )));
        }
        let mut f = Field { degree: m, modulus, gamma: Fe::ONE };
        f.gamma = f.find_primitive();
        Ok(f)
    }

    /// Parse `<m>:0x<hex>` or a bare degree `<m>`.
    pub fn parse(spec: &str) -> Result<Field> {
        let bad = || Error::Parse(format!("bad field spec `{spec}` (expected <m>:0x<modulus>)"));
        match spec.trim().split_once(':') {
            None => Field::new(spec.trim().parse().map_err(|_| bad())?),
            Some((m, p)) => {
                let m: u32 = m.trim().parse().map_err(|_| bad())?;
                let p = p.trim();
                let p = p.strip_prefix("0x").or_else(|| p.strip_prefix("0X")).ok_or_else(bad)?;
                let modulus = u64::from_str_radix(p, 16).map_err(|_| bad())?;
                Field::with_modulus(m, modulus)
            }
        }
    }

    pub fn spec_string(&self) -> String {
        format!("{}:0x{:X}", self.degree, self.modulus)
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    /// Number of elements, 2^m.
    pub fn size(&self) -> u64 {
        1u64 << self.degree
    }

    /// The canonical primitive element.
    pub fn primitive(&self) -> Fe {
        self.gamma
    }

    pub fn elem(&self, bits: u32) -> Result<Fe> {
        if (bits as u64) >> self.degree != 0 {
            return Err(Error::Domain(format!(
                "{bits:#x} is not an element of GF(2^{})",
                self.degree
            )));
        }
        Ok(Fe(bits))
    }

    pub fn parse_elem(&self, s: &str) -> Result<Fe> {
        self.elem(s.parse::<Fe>()?.0)
    }

    pub fn add(&self, a: Fe, b: Fe) -> Fe {
        a + b
    }

    pub fn mul(&self, a: Fe, b: Fe) -> Fe {
        Fe(mulmod(a.0 as u64, b.0 as u64, self.modulus, self.degree) as u32)
    }

    pub fn square(&self, a: Fe) -> Fe {
        self.mul(a, a)
    }

    pub fn pow(&self, a: Fe, mut e: u64) -> Fe {
        let mut base = a;
        let mut acc = Fe::ONE;
        while e != 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.square(base);
            e >>= 1;
        }
        acc
    }

    /// a^(2^m - 2).
    pub fn inv(&self, a: Fe) -> Result<Fe> {
        if a.is_zero() {
            return Err(Error::Domain("zero has no inverse".into()));
        }
        Ok(self.pow(a, self.size() - 2))
    }

    pub fn div(&self, a: Fe, b: Fe) -> Result<Fe> {
        Ok(self.mul(a, self.inv(b)?))
    }

    /// a^(2^d) by repeated squaring.
    pub fn pow2k(&self, a: Fe, d: u32) -> Fe {
        (0..d % self.degree).fold(a, |x, _| self.square(x))
    }

    fn check_divides(&self, d: u32) -> Result<()> {
        if d == 0 || !self.degree.is_multiple_of(d) {
            return Err(divisibility(format!(
                "{d} does not divide the field degree {}",
                self.degree
            )));
        }
        Ok(())
    }

    pub fn in_subfield(&self, a: Fe, d: u32) -> Result<bool> {
        self.check_divides(d)?;
        Ok(self.pow2k(a, d) == a)
    }

    /// Relative trace from GF(2^e) down to GF(2^s).
    pub fn trace_rel(&self, a: Fe, s: u32, e: u32) -> Result<Fe> {
        self.check_divides(e)?;
        if s == 0 || !e.is_multiple_of(s) {
            return Err(divisibility(format!("{s} does not divide {e}")));
        }
        if !self.in_subfield(a, e)? {
            return Err(Error::Domain(format!("{a} is not in GF(2^{e})")));
        }
        let mut acc = Fe::ZERO;
        let mut x = a;
        for _ in 0..e / s {
            acc += x;
            x = self.pow2k(x, s);
        }
        Ok(acc)
    }

    /// gamma^((2^m - 1) / (2^d - 1)), a generator of GF(2^d)*.
    pub fn subfield_generator(&self, d: u32) -> Result<Fe> {
        self.check_divides(d)?;
        let e = (self.size() - 1) / ((1u64 << d) - 1);
        Ok(self.pow(self.gamma, e))
    }

    fn find_primitive(&self) -> Fe {
        let order = self.size() - 1;
        let cofactors: Vec<u64> = prime_factors(order).into_iter().map(|p| order / p).collect();
        (1..self.size())
            .map(|g| Fe(g as u32))
            .find(|&g| cofactors.iter().all(|&c| self.pow(g, c) != Fe::ONE))
            .expect("multiplicative group is cyclic")
    }

    /// All elements in increasing bit order.
    pub fn elements(&self) -> impl Iterator<Item = Fe> {
        (0..self.size()).map(|x| Fe(x as u32))
    }
}

impl fmt::Display for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.spec_string())
    }
}
