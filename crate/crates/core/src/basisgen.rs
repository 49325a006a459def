//! Subspace bases: enumeration, the alpha/delta maps, and the Cantor, generalized
//! Cantor and tower-product constructions.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{divisibility, range, Error, Result};
use crate::field::{Fe, Field};

/// omega_i: the sum of beta_k over the set bits k of i.
pub fn enumerate_point(beta: &[Fe], i: u64) -> Result<Fe> {
    if beta.len() < 64 && i >> beta.len() != 0 {
        return Err(range(format!("index {i} outside 0..2^{}", beta.len())));
    }
    Ok(beta
        .iter()
        .enumerate()
        .filter(|(k, _)| (i >> k) & 1 == 1)
        .fold(Fe::ZERO, |acc, (_, &b)| acc + b))
}

fn check_split(n: usize, d: usize) -> Result<()> {
    if d == 0 || d >= n {
        return Err(range(format!("split point {d} outside 1..{n}")));
    }
    Ok(())
}

/// The prefix (beta_0, ..., beta_{d-1}).
pub fn alpha_of(beta: &[Fe], d: usize) -> Result<Vec<Fe>> {
    check_split(beta.len(), d)?;
    Ok(beta[..d].to_vec())
}

/// delta_i = (beta_{d+i}/beta_0)^(2^d) - beta_{d+i}/beta_0.
pub fn delta_of(f: &Field, beta: &[Fe], d: usize) -> Result<Vec<Fe>> {
    check_split(beta.len(), d)?;
    let inv0 = f.inv(beta[0])?;
    Ok(beta[d..]
        .iter()
        .map(|&b| {
            let q = f.mul(b, inv0);
            f.pow2k(q, d as u32) + q
        })
        .collect())
}

/// GF(2)-rank of the entries equals their number.
pub fn is_independent(beta: &[Fe]) -> bool {
    // xor basis indexed by leading bit
    let mut pivots = [0u32; 32];
    for &b in beta {
        let mut x = b.0;
        while x != 0 {
            let top = 31 - x.leading_zeros() as usize;
            if pivots[top] == 0 {
                pivots[top] = x;
                break;
            }
            x ^= pivots[top];
        }
        if x == 0 {
            return false;
        }
    }
    true
}

/// Comma-separated lowercase hex.
pub fn format_basis(beta: &[Fe]) -> String {
    beta.iter().map(|b| b.to_string()).collect::<Vec<_>>().join(",")
}

pub fn parse_basis(f: &Field, s: &str) -> Result<Vec<Fe>> {
    let beta = s
        .split(',')
        .map(|t| f.parse_elem(t))
        .collect::<Result<Vec<_>>>()?;
    if !is_independent(&beta) {
        return Err(Error::Domain(format!("basis `{s}` is not linearly independent")));
    }
    Ok(beta)
}

/// An element of GF(2^e) with trace one down to GF(2^s), found by scanning
/// powers of the generator of GF(2^e) for nonzero trace and rescaling.
fn trace_preimage(f: &Field, s: u32, e: u32) -> Result<(Fe, Fe)> {
    let g = f.subfield_generator(e)?;
    let mut z = Fe::ONE;
    for _ in 0..(1u64 << e) {
        let tr = f.trace_rel(z, s, e)?;
        if !tr.is_zero() {
            return Ok((z, tr));
        }
        z = f.mul(z, g);
    }
    Err(Error::Domain(format!("trace GF(2^{e}) -> GF(2^{s}) vanishes")))
}

/// Extend a basis `theta` of GF(2^t)/GF(2) to a basis of GF(q^(2^m_levels))/GF(2), q = 2^t.
pub fn construct_gen_cantor(f: &Field, m_levels: u32, t: u32, theta: &[Fe]) -> Result<Vec<Fe>> {
    if t == 0 || theta.len() != t as usize {
        return Err(range(format!("theta must have exactly t = {t} entries")));
    }
    if m_levels > 5 {
        return Err(range(format!("m_levels = {m_levels} too large")));
    }
    let top = t << m_levels;
    if !f.degree().is_multiple_of(top) {
        return Err(divisibility(format!(
            "generalized Cantor basis needs 2^{m_levels}*{t} = {top} to divide the field degree {}",
            f.degree()
        )));
    }
    for &th in theta {
        if !f.in_subfield(th, t)? {
            return Err(Error::Domain(format!("theta entry {th} is not in GF(2^{t})")));
        }
    }
    if !is_independent(theta) {
        return Err(Error::Domain("theta is not linearly independent".into()));
    }
    let (z0, tr) = trace_preimage(f, t, top)?;
    let scale = f.mul(f.inv(tr)?, z0);
    let n = top as usize;
    let t = t as usize;
    let mut beta = vec![Fe::ZERO; n];
    for i in 0..t {
        beta[n - t + i] = f.mul(theta[i], scale);
    }
    for i in (0..n - t).rev() {
        let b = beta[i + t];
        beta[i] = f.pow2k(b, t as u32) + b;
    }
    Ok(beta)
}

/// The Cantor basis of dimension n: built at the next power of two and truncated.
pub fn construct_cantor(f: &Field, n: usize) -> Result<Vec<Fe>> {
    if n == 0 {
        return Err(range("dimension must be positive"));
    }
    let levels = n.next_power_of_two().trailing_zeros();
    if !f.degree().is_multiple_of(1 << levels) {
        return Err(divisibility(format!(
            "Cantor basis of dimension {n} needs 2^{levels} to divide the field degree {}",
            f.degree()
        )));
    }
    let mut beta = construct_gen_cantor(f, levels, 1, &[Fe::ONE])?;
    beta.truncate(n);
    Ok(beta)
}

/// (1, theta) with theta in GF(2^(2s)) of trace one over GF(2^s).
pub fn make_quadratic_trace_basis(f: &Field, s: u32) -> Result<(Fe, Fe)> {
    if s == 0 || !f.degree().is_multiple_of(2 * s) {
        return Err(divisibility(format!(
            "quadratic extension of GF(2^{s}) needs {} to divide the field degree {}",
            2 * s,
            f.degree()
        )));
    }
    let (z, tr) = trace_preimage(f, s, 2 * s)?;
    Ok((Fe::ONE, f.mul(f.inv(tr)?, z)))
}

/// (1, xi, ..., xi^(e/s - 1)) with xi the generator of GF(2^e).
pub fn subfield_basis_powers(f: &Field, s: u32, e: u32) -> Result<Vec<Fe>> {
    if s == 0 || !e.is_multiple_of(s) {
        return Err(divisibility(format!("{s} does not divide {e}")));
    }
    let xi = f.subfield_generator(e)?;
    let mut out = Vec::with_capacity((e / s) as usize);
    let mut x = Fe::ONE;
    for _ in 0..e / s {
        out.push(x);
        x = f.mul(x, xi);
    }
    Ok(out)
}

/// A tower GF(2) = GF(2^n_0) < ... < GF(2^n_m) with a basis for each step.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TowerSpec {
    pub degrees: Vec<u32>,
    pub level_bases: Vec<Vec<Fe>>,
    /// Whether level k uses the trace-one quadratic basis.
    pub trace_one: Vec<bool>,
}

impl TowerSpec {
    fn check_degrees(f: &Field, degrees: &[u32]) -> Result<()> {
        if degrees.len() < 2 || degrees[0] != 1 {
            return Err(Error::Domain("tower must start at 1 and have at least two degrees".into()));
        }
        for w in degrees.windows(2) {
            if w[1] <= w[0] || w[1] % w[0] != 0 {
                return Err(divisibility(format!("tower step {} -> {} is not a proper divisor chain", w[0], w[1])));
            }
        }
        let top = *degrees.last().unwrap();
        if !f.degree().is_multiple_of(top) {
            return Err(divisibility(format!(
                "tower top degree {top} does not divide the field degree {}",
                f.degree()
            )));
        }
        Ok(())
    }

    /// Default level bases; levels flagged in `trace_one` must be quadratic.
    pub fn new(f: &Field, degrees: &[u32], trace_one: &[bool]) -> Result<TowerSpec> {
        Self::check_degrees(f, degrees)?;
        if trace_one.len() != degrees.len() - 1 {
            return Err(range("one trace flag per tower level"));
        }
        let mut level_bases = Vec::new();
        for (k, w) in degrees.windows(2).enumerate() {
            if trace_one[k] {
                if w[1] != 2 * w[0] {
                    return Err(Error::Domain(format!(
                        "trace-one basis requested for non-quadratic step {} -> {}",
                        w[0], w[1]
                    )));
                }
                let (a, b) = make_quadratic_trace_basis(f, w[0])?;
                level_bases.push(vec![a, b]);
            } else {
                level_bases.push(subfield_basis_powers(f, w[0], w[1])?);
            }
        }
        Ok(TowerSpec { degrees: degrees.to_vec(), level_bases, trace_one: trace_one.to_vec() })
    }

    /// Explicit level bases, checked for membership and independence.
    pub fn with_bases(f: &Field, degrees: &[u32], level_bases: Vec<Vec<Fe>>) -> Result<TowerSpec> {
        Self::check_degrees(f, degrees)?;
        if level_bases.len() != degrees.len() - 1 {
            return Err(range("one basis per tower level"));
        }
        for (k, w) in degrees.windows(2).enumerate() {
            let lb = &level_bases[k];
            if lb.len() != (w[1] / w[0]) as usize {
                return Err(range(format!("level {k} basis needs {} entries", w[1] / w[0])));
            }
            for &x in lb {
                if !f.in_subfield(x, w[1])? {
                    return Err(Error::Domain(format!("{x} is not in GF(2^{})", w[1])));
                }
            }
            // independent over GF(2^n_k) iff the products with a GF(2)-basis of
            // GF(2^n_k) are GF(2)-independent
            let sub = subfield_basis_powers(f, 1, w[0])?;
            let prods: Vec<Fe> = lb.iter().flat_map(|&x| sub.iter().map(move |&z| (x, z))).map(|(x, z)| f.mul(x, z)).collect();
            if !is_independent(&prods) {
                return Err(Error::Domain(format!("level {k} basis is dependent over GF(2^{})", w[0])));
            }
        }
        let trace_one = vec![false; level_bases.len()];
        Ok(TowerSpec { degrees: degrees.to_vec(), level_bases, trace_one })
    }

    /// Parse `1-2!-4-12`; a `!` after n_(k+1) requests the trace-one basis for level k.
    pub fn parse(f: &Field, s: &str) -> Result<TowerSpec> {
        let mut degrees = Vec::new();
        let mut flags = Vec::new();
        for (idx, part) in s.split('-').enumerate() {
            let (num, bang) = match part.strip_suffix('!') {
                Some(p) => (p, true),
                None => (part, false),
            };
            let d: u32 = num
                .trim()
                .parse()
                .map_err(|_| Error::Parse(format!("bad tower spec `{s}`")))?;
            if idx == 0 && bang {
                return Err(Error::Parse(format!("bad tower spec `{s}`: `!` on the base degree")));
            }
            if idx > 0 {
                flags.push(bang);
            }
            degrees.push(d);
        }
        TowerSpec::new(f, &degrees, &flags)
    }

    pub fn top(&self) -> u32 {
        *self.degrees.last().unwrap()
    }

    /// Degrees below the top, the admissible values of d for tree strategies.
    pub fn split_degrees(&self) -> Vec<usize> {
        self.degrees[..self.degrees.len() - 1].iter().map(|&d| d as usize).collect()
    }
}

impl fmt::Display for TowerSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, d) in self.degrees.iter().enumerate() {
            if k > 0 {
                f.write_str("-")?;
            }
            write!(f, "{d}")?;
            if k > 0 && self.trace_one[k - 1] {
                f.write_str("!")?;
            }
        }
        Ok(())
    }
}

/// beta_i = prod_k theta_{k, i_k} over the mixed-radix digits of i.
pub fn construct_tower_basis(f: &Field, tower: &TowerSpec, n: usize) -> Result<Vec<Fe>> {
    if n == 0 || n > tower.top() as usize {
        return Err(range(format!("dimension {n} outside 1..={}", tower.top())));
    }
    Ok((0..n)
        .map(|i| {
            let mut rest = i;
            let mut acc = Fe::ONE;
            for lb in &tower.level_bases {
                let radix = lb.len();
                acc = f.mul(acc, lb[rest % radix]);
                rest /= radix;
            }
            acc
        })
        .collect())
}

/// n elements drawn from a seeded generator, redrawn until independent.
pub fn random_basis(f: &Field, n: usize, seed: u64) -> Result<Vec<Fe>> {
    if n == 0 || n > f.degree() as usize {
        return Err(range(format!("random basis dimension {n} outside 1..={}", f.degree())));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mask = (f.size() - 1) as u32;
    loop {
        let beta: Vec<Fe> = (0..n).map(|_| Fe(rng.random::<u32>() & mask)).collect();
        if is_independent(&beta) {
            return Ok(beta);
        }
    }
}

/// beta_0 = 1 and beta_i = beta_{i+1}^2 + beta_{i+1}.
pub fn is_cantor_basis(f: &Field, beta: &[Fe]) -> bool {
    beta.first() == Some(&Fe::ONE) && beta.windows(2).all(|w| w[0] == f.square(w[1]) + w[1])
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn binom_odd(j: usize, r: usize) -> bool {
        r & !j == 0
    }

    fn gen_cantor_props(f: &Field, t: u32, m: u32, beta: &[Fe], theta: &[Fe]) {
        let tt = t as usize;
        let top = 1usize << m;
        assert_eq!(beta.len(), top * tt);
        let frob = |x: Fe, r: usize| f.pow2k(x, t * r as u32);
        // 1: binomial sums
        for j in 0..top.min(5) {
            for i in 0..(top - j) * tt {
                let s = (0..=j)
                    .filter(|&r| binom_odd(j, r))
                    .fold(Fe::ZERO, |acc, r| acc + frob(beta[i + j * tt], r));
                assert_eq!(beta[i], s, "binomial j={j} i={i}");
            }
        }
        // 2: delta relation at strides 2^k t
        for k in 0..m as usize {
            let st = (1 << k) * tt;
            for i in 0..(top - (1 << k)) * tt {
                assert_eq!(beta[i], frob(beta[i + st], 1 << k) + beta[i + st]);
            }
        }
        // 3: prefix is theta
        assert_eq!(&beta[..tt], theta);
        // 4: subfield prefixes
        for k in 0..m {
            for &b in &beta[..(1usize << k) * tt] {
                assert!(f.in_subfield(b, t << k).unwrap());
            }
        }
        // 5: independence
        assert!(is_independent(beta));
    }

    #[test]
    fn cantor_basis_recognized() {
        let f = Field::new(16).unwrap();
        assert!(is_cantor_basis(&f, &construct_cantor(&f, 11).unwrap()));
        assert!(!is_cantor_basis(&f, &random_basis(&f, 4, 1).unwrap()));
        assert!(!is_cantor_basis(&f, &[]));
    }

    #[test]
    fn enumerate_examples() {
        let f = Field::new(8).unwrap();
        let beta = random_basis(&f, 4, 1).unwrap();
        assert_eq!(enumerate_point(&beta, 0).unwrap(), Fe::ZERO);
        assert_eq!(enumerate_point(&beta, 1).unwrap(), beta[0]);
        assert_eq!(enumerate_point(&beta, 3).unwrap(), beta[0] + beta[1]);
        assert_eq!(enumerate_point(&[Fe::ONE, Fe(7)], 2).unwrap(), Fe(7));
        assert!(enumerate_point(&beta, 16).is_err());
    }

    #[test]
    fn enumeration_is_bijective() {
        let f = Field::new(12).unwrap();
        for n in 1..=12 {
            let beta = random_basis(&f, n, n as u64).unwrap();
            let mut pts: Vec<Fe> = (0..1u64 << n).map(|i| enumerate_point(&beta, i).unwrap()).collect();
            pts.sort();
            pts.dedup();
            assert_eq!(pts.len(), 1 << n);
        }
    }

    #[test]
    fn alpha_delta_examples() {
        let f = Field::new(8).unwrap();
        let (a, b, c) = (Fe(3), Fe(5), Fe(9));
        assert_eq!(alpha_of(&[a, b, c], 2).unwrap(), vec![a, b]);
        assert_eq!(alpha_of(&[a, b], 1).unwrap(), vec![a]);
        assert!(alpha_of(&[a, b], 2).is_err());
        assert!(delta_of(&f, &[a, b], 0).is_err());
        let g = Fe(0x53);
        assert_eq!(delta_of(&f, &[Fe::ONE, g], 1).unwrap(), vec![f.mul(g, g) + g]);
    }

    #[test]
    fn cantor_delta_is_prefix() {
        let f = Field::new(16).unwrap();
        let beta = construct_cantor(&f, 16).unwrap();
        for d in [1, 2, 4, 8] {
            assert_eq!(delta_of(&f, &beta, d).unwrap(), beta[..16 - d].to_vec());
        }
    }

    #[test]
    fn independence_examples() {
        assert!(is_independent(&[Fe(1), Fe(6)]));
        assert!(!is_independent(&[Fe(5), Fe(5)]));
        assert!(!is_independent(&[Fe(3), Fe(5), Fe(6)]));
        assert!(!is_independent(&[Fe(0)]));
    }

    #[test]
    fn cantor_small_cases() {
        let f4 = Field::new(2).unwrap();
        assert_eq!(construct_cantor(&f4, 1).unwrap(), vec![Fe::ONE]);
        let b = construct_cantor(&f4, 2).unwrap();
        assert_eq!(f4.mul(b[1], b[1]) + b[1], Fe::ONE);
        // the two roots of y^2 + y = 1 by scan
        let roots: Vec<Fe> = f4.elements().filter(|&y| f4.mul(y, y) + y == Fe::ONE).collect();
        assert!(roots.contains(&b[1]));

        let f16 = Field::new(4).unwrap();
        let b = construct_cantor(&f16, 4).unwrap();
        assert_eq!(b[0], Fe::ONE);
        for i in 0..3 {
            assert_eq!(b[i], f16.mul(b[i + 1], b[i + 1]) + b[i + 1]);
        }
        assert!(is_independent(&b));
        assert!(f16.in_subfield(b[1], 2).unwrap());
        assert_eq!(b[0], f16.pow2k(b[2], 2) + b[2]);
        assert!(construct_cantor(&Field::new(12).unwrap(), 5).is_err());
        assert!(construct_cantor(&Field::new(12).unwrap(), 4).is_ok());
    }

    #[test]
    fn gen_cantor_properties() {
        let f8 = Field::new(8).unwrap();
        let f16 = Field::new(16).unwrap();
        for m in 0..=3 {
            let b = construct_gen_cantor(&f8, m, 1, &[Fe::ONE]).unwrap();
            gen_cantor_props(&f8, 1, m, &b, &[Fe::ONE]);
        }
        for f in [f8, f16] {
            let theta = subfield_basis_powers(&f, 1, 2).unwrap();
            for m in 0..=2 {
                let b = construct_gen_cantor(&f, m, 2, &theta).unwrap();
                gen_cantor_props(&f, 2, m, &b, &theta);
            }
        }
        let theta = subfield_basis_powers(&f16, 1, 4).unwrap();
        let b = construct_gen_cantor(&f16, 2, 4, &theta).unwrap();
        gen_cantor_props(&f16, 4, 2, &b, &theta);
        assert!(construct_gen_cantor(&Field::new(12).unwrap(), 2, 2, &subfield_basis_powers(&f8, 1, 2).unwrap()).is_err());
        assert!(construct_gen_cantor(&f8, 1, 2, &[Fe::ONE, Fe::ONE]).is_err());
    }

    #[test]
    fn tower_examples() {
        let f = Field::new(4).unwrap();
        let tw = TowerSpec::new(&f, &[1, 2, 4], &[false, false]).unwrap();
        let b = construct_tower_basis(&f, &tw, 4).unwrap();
        assert_eq!(b[0], f.mul(tw.level_bases[0][0], tw.level_bases[1][0]));
        assert_eq!(b[3], f.mul(tw.level_bases[0][1], tw.level_bases[1][1]));
        let single = TowerSpec::new(&f, &[1, 4], &[false]).unwrap();
        assert_eq!(construct_tower_basis(&f, &single, 4).unwrap(), single.level_bases[0]);
    }

    #[test]
    fn tower_parse_round_trip() {
        let f = Field::new(12).unwrap();
        for s in ["1-12", "1-2-4-12", "1-2!-4!-12", "1-3-6!-12"] {
            assert_eq!(TowerSpec::parse(&f, s).unwrap().to_string(), s);
        }
        assert!(TowerSpec::parse(&f, "1-4!-12").is_err());
        assert!(TowerSpec::parse(&f, "1-5").is_err());
        assert!(TowerSpec::parse(&f, "2-4").is_err());
        assert!(TowerSpec::parse(&f, "1-2-x").is_err());
    }

    #[test]
    fn towers_of_gf4096_are_independent() {
        let f = Field::new(12).unwrap();
        let towers: &[&[u32]] = &[
            &[1, 12],
            &[1, 2, 12],
            &[1, 3, 12],
            &[1, 4, 12],
            &[1, 6, 12],
            &[1, 2, 4, 12],
            &[1, 2, 6, 12],
            &[1, 3, 6, 12],
        ];
        for degs in towers {
            let tw = TowerSpec::new(&f, degs, &vec![false; degs.len() - 1]).unwrap();
            for n in 1..=12 {
                assert!(is_independent(&construct_tower_basis(&f, &tw, n).unwrap()), "{degs:?} n={n}");
            }
            // explicit bases pass the checks
            TowerSpec::with_bases(&f, degs, tw.level_bases.clone()).unwrap();
        }
    }

    #[test]
    fn quadratic_trace_basis() {
        let f = Field::new(12).unwrap();
        for s in [1, 2, 3, 6] {
            let (one, th) = make_quadratic_trace_basis(&f, s).unwrap();
            assert_eq!(one, Fe::ONE);
            assert_eq!(f.trace_rel(th, s, 2 * s).unwrap(), Fe::ONE);
            assert!(!f.in_subfield(th, s).unwrap());
        }
        assert!(make_quadratic_trace_basis(&f, 4).is_err());
    }

    #[test]
    fn subfield_powers() {
        let f = Field::new(12).unwrap();
        assert_eq!(subfield_basis_powers(&f, 4, 4).unwrap(), vec![Fe::ONE]);
        let b = subfield_basis_powers(&f, 1, 2).unwrap();
        assert_eq!(b.len(), 2);
        assert!(is_independent(&b));
        assert_eq!(f.mul(b[1], b[1]), b[1] + Fe::ONE);
        assert_eq!(subfield_basis_powers(&f, 2, 12).unwrap().len(), 6);
        assert!(subfield_basis_powers(&f, 5, 10).is_err());
    }

    #[test]
    fn random_basis_is_deterministic() {
        let f = Field::new(12).unwrap();
        assert_eq!(random_basis(&f, 6, 9).unwrap(), random_basis(&f, 6, 9).unwrap());
        assert!(random_basis(&f, 13, 0).is_err());
    }

    #[test]
    fn basis_text_round_trip() {
        let f = Field::new(8).unwrap();
        let b = construct_cantor(&f, 8).unwrap();
        assert_eq!(parse_basis(&f, &format_basis(&b)).unwrap(), b);
        assert!(parse_basis(&f, "1,1").is_err());
        assert!(parse_basis(&f, "1,100").is_err());
    }

    proptest! {
        #[test]
        fn prop_delta_preserves_independence(seed in any::<u64>(), n in 2usize..=10) {
            let f = Field::new(13).unwrap();
            let beta = random_basis(&f, n, seed).unwrap();
            let delta = delta_of(&f, &beta, 1).unwrap();
            prop_assert_eq!(delta.len(), n - 1);
            prop_assert!(is_independent(&delta));
        }

        #[test]
        fn prop_tower_delta_independent(seed in any::<u64>(), n in 2usize..=12) {
            let f = Field::new(12).unwrap();
            let tw = TowerSpec::new(&f, &[1, 2, 4, 12], &[false; 3]).unwrap();
            let beta = construct_tower_basis(&f, &tw, n).unwrap();
            let w = f.elem((seed % 4095 + 1) as u32).unwrap();
            let scaled: Vec<Fe> = beta.iter().map(|&b| f.mul(b, w)).collect();
            for d in [1usize, 2, 4] {
                if d < n {
                    prop_assert!(is_independent(&delta_of(&f, &scaled, d).unwrap()));
                }
            }
        }
    }
}
