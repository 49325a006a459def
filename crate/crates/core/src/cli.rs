//! Command-line driver: basis construction, oracle verification, operation
//! count CSV and bound checks.

use std::ffi::OsString;
use std::fmt;
use std::fs;
use std::ops::RangeInclusive;
use std::path::PathBuf;
use std::str::FromStr;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::basisgen::{
    construct_cantor, construct_gen_cantor, construct_tower_basis, format_basis, is_cantor_basis, parse_basis,
    random_basis, subfield_basis_powers, TowerSpec,
};
use crate::error::{range, Error, Result};
use crate::field::{Fe, Field};
use crate::oracle::{bound, BoundId, BoundParams, Oracle, OracleBasis};
use crate::precomp::PrecompTable;
use crate::redtree::{enumerate_trees, validate, ReductionTree, TreeStrategy};
use crate::transforms::{convert, CostModel, OpCounter, PolyBasis, RunParams, Transform};

/// Largest n accepted by `verify`.
pub const MAX_VERIFY_N: usize = 6;
/// Largest n accepted by `counts` and `bounds`.
pub const MAX_COUNT_N: usize = 24;

const INPUT_SEED: u64 = 0x5eed;

#[derive(Parser, Debug)]
#[command(name = "binconv", version, about = "Polynomial basis conversions over binary fields")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Print the basis, one hex element per line.
    Construct(ConfigArgs),
    /// Compare every conversion with the dense oracle and check round trips.
    Verify(ConfigArgs),
    /// Operation counts as CSV, one row per length.
    Counts(ConfigArgs),
    /// Check operation counts against the closed-form bounds.
    Bounds(BoundsArgs),
    /// Validate the configured tree, or list every tree shape with --list.
    Trees(TreesArgs),
}

/// Flags shared by all subcommands.
#[derive(Args, Debug, Clone, PartialEq, Eq)]
pub struct ConfigArgs {
    /// Field as `<m>` or `<m>:0x<modulus>`.
    #[arg(long, default_value = "16")]
    pub field: String,
    /// cantor | gencantor:<t> | tower:<spec> | random:<seed> | comma-separated hex list.
    #[arg(long, default_value = "cantor")]
    pub basis: String,
    /// Dimension (defaults to the length of an explicit basis).
    #[arg(long)]
    pub n: Option<usize>,
    /// trivial | cantor | max:<degrees> | balanced:<degrees> | graft:<t> | explicit tree.
    #[arg(long, default_value = "trivial")]
    pub tree: String,
    /// n2x, x2n, l2x, x2l, x2m, m2x, taylor, taylor_inverse, convert:<from>:<to>, or all (bounds only).
    #[arg(long, default_value = "n2x")]
    pub transform: String,
    /// Length range `a..=b`, `a..b` or `a` (default 1..=2^n).
    #[arg(long)]
    pub ell: Option<String>,
    /// Shift in hex.
    #[arg(long, default_value = "0")]
    pub lambda: String,
    /// Lagrange count for l2x/x2l (default ell).
    #[arg(long)]
    pub c: Option<usize>,
    /// Extra output flag for l2x.
    #[arg(long, default_value_t = 0)]
    pub b: usize,
    /// Taylor block size.
    #[arg(long, default_value_t = 2)]
    pub t: usize,
    /// run (instrumented transforms) or model (memoized count replay).
    #[arg(long, default_value = "run")]
    pub engine: String,
    /// Write output here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct BoundsArgs {
    #[command(flatten)]
    config: ConfigArgs,
    /// Comma-separated bound ids to check instead of all applicable ones.
    #[arg(long)]
    bound: Option<String>,
}

#[derive(Args, Debug)]
struct TreesArgs {
    #[command(flatten)]
    config: ConfigArgs,
    /// List every tree shape for n with its validity.
    #[arg(long)]
    list: bool,
}

#[derive(Parser, Debug)]
#[command(name = "config")]
struct ConfigOnly {
    #[command(flatten)]
    args: ConfigArgs,
}

/// Where the basis comes from.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum BasisSource {
    Cantor,
    GenCantor(u32),
    Tower(TowerSpec),
    Random(u64),
    Explicit(Vec<Fe>),
}

impl BasisSource {
    pub fn parse(f: &Field, s: &str) -> Result<BasisSource> {
        let s = s.trim();
        if s == "cantor" {
            return Ok(BasisSource::Cantor);
        }
        if let Some(t) = s.strip_prefix("gencantor:") {
            return t
                .parse()
                .ok()
                .filter(|&t| t > 0)
                .map(BasisSource::GenCantor)
                .ok_or_else(|| Error::Parse(format!("bad generalized Cantor block size `{t}`")));
        }
        if let Some(spec) = s.strip_prefix("tower:") {
            return Ok(BasisSource::Tower(TowerSpec::parse(f, spec)?));
        }
        if let Some(seed) = s.strip_prefix("random:") {
            return seed
                .parse()
                .map(BasisSource::Random)
                .map_err(|_| Error::Parse(format!("bad random seed `{seed}`")));
        }
        Ok(BasisSource::Explicit(parse_basis(f, s)?))
    }

    pub fn build(&self, f: &Field, n: usize) -> Result<Vec<Fe>> {
        match self {
            BasisSource::Cantor => construct_cantor(f, n),
            BasisSource::GenCantor(t) => {
                let mut levels = 0;
                while ((*t as usize) << levels) < n {
                    levels += 1;
                }
                let theta = subfield_basis_powers(f, 1, *t)?;
                let mut beta = construct_gen_cantor(f, levels, *t, &theta)?;
                beta.truncate(n);
                Ok(beta)
            }
            BasisSource::Tower(tw) => construct_tower_basis(f, tw, n),
            BasisSource::Random(seed) => random_basis(f, n, *seed),
            BasisSource::Explicit(beta) => {
                if beta.len() != n {
                    return Err(range(format!("explicit basis has {} entries, expected {n}", beta.len())));
                }
                Ok(beta.clone())
            }
        }
    }
}

impl fmt::Display for BasisSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BasisSource::Cantor => f.write_str("cantor"),
            BasisSource::GenCantor(t) => write!(f, "gencantor:{t}"),
            BasisSource::Tower(tw) => write!(f, "tower:{tw}"),
            BasisSource::Random(s) => write!(f, "random:{s}"),
            BasisSource::Explicit(b) => f.write_str(&format_basis(b)),
        }
    }
}

/// A single algorithm or a composed conversion.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TransformSpec {
    Core(Transform),
    Convert(PolyBasis, PolyBasis),
    All,
}

impl FromStr for TransformSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<TransformSpec> {
        if s == "all" {
            return Ok(TransformSpec::All);
        }
        if let Some(rest) = s.strip_prefix("convert:") {
            let (a, b) = rest
                .split_once(':')
                .ok_or_else(|| Error::Parse(format!("expected convert:<from>:<to>, got `{s}`")))?;
            return Ok(TransformSpec::Convert(a.parse()?, b.parse()?));
        }
        Ok(TransformSpec::Core(s.parse()?))
    }
}

impl fmt::Display for TransformSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TransformSpec::Core(t) => write!(f, "{t}"),
            TransformSpec::Convert(a, b) => write!(f, "convert:{a}:{b}"),
            TransformSpec::All => f.write_str("all"),
        }
    }
}

/// How operation counts are obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Engine {
    Run,
    Model,
}

impl FromStr for Engine {
    type Err = Error;

    fn from_str(s: &str) -> Result<Engine> {
        match s {
            "run" => Ok(Engine::Run),
            "model" => Ok(Engine::Model),
            _ => Err(Error::Parse(format!("unknown engine `{s}` (expected run or model)"))),
        }
    }
}

impl fmt::Display for Engine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Engine::Run => "run",
            Engine::Model => "model",
        })
    }
}

/// A validated configuration.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RunConfig {
    pub field: Field,
    pub basis: BasisSource,
    pub n: usize,
    pub tree: TreeStrategy,
    pub transform: TransformSpec,
    pub ell: RangeInclusive<usize>,
    pub lambda: Fe,
    pub c: Option<usize>,
    pub b: usize,
    pub t: usize,
    pub engine: Engine,
    pub out: Option<PathBuf>,
}

fn parse_ell(s: &str, max: usize) -> Result<RangeInclusive<usize>> {
    let num = |x: &str| x.trim().parse::<usize>().map_err(|_| Error::Parse(format!("bad length range `{s}`")));
    let r = if let Some((a, b)) = s.split_once("..=") {
        num(a)?..=num(b)?
    } else if let Some((a, b)) = s.split_once("..") {
        let hi = num(b)?;
        if hi == 0 {
            return Err(Error::Parse(format!("empty length range `{s}`")));
        }
        num(a)?..=hi - 1
    } else {
        let v = num(s)?;
        v..=v
    };
    if *r.start() == 0 || r.start() > r.end() || *r.end() > max {
        return Err(range(format!("length range `{s}` must lie within 1..={max}")));
    }
    Ok(r)
}

impl RunConfig {
    pub fn from_args(a: &ConfigArgs) -> Result<RunConfig> {
        let field = Field::parse(&a.field)?;
        let basis = BasisSource::parse(&field, &a.basis)?;
        let n = match (a.n, &basis) {
            (Some(n), _) => n,
            (None, BasisSource::Explicit(b)) => b.len(),
            (None, _) => return Err(Error::Parse("--n is required for this basis source".into())),
        };
        if n == 0 || n > field.degree() as usize {
            return Err(range(format!("n = {n} outside 1..={}", field.degree())));
        }
        let max_ell = if n < usize::BITS as usize { 1usize << n } else { usize::MAX };
        let ell = match &a.ell {
            Some(s) => parse_ell(s, max_ell)?,
            None => 1..=max_ell,
        };
        if a.b > 1 {
            return Err(range("--b must be 0 or 1"));
        }
        Ok(RunConfig {
            field,
            basis,
            n,
            tree: TreeStrategy::parse(&a.tree)?,
            transform: a.transform.parse()?,
            ell,
            lambda: field.parse_elem(&a.lambda)?,
            c: a.c,
            b: a.b,
            t: a.t,
            engine: a.engine.parse()?,
            out: a.out.clone(),
        })
    }

    /// Parse the flag string produced by `Display`.
    pub fn parse(s: &str) -> Result<RunConfig> {
        let argv = std::iter::once("config").chain(s.split_whitespace());
        let parsed = ConfigOnly::try_parse_from(argv).map_err(|e| Error::Parse(first_line(&e.to_string())))?;
        RunConfig::from_args(&parsed.args)
    }

    pub fn to_args(&self) -> Vec<String> {
        let mut v = vec![
            "--field".into(),
            self.field.spec_string(),
            "--basis".into(),
            self.basis.to_string(),
            "--n".into(),
            self.n.to_string(),
            "--tree".into(),
            self.tree.to_string(),
            "--transform".into(),
            self.transform.to_string(),
            "--ell".into(),
            format!("{}..={}", self.ell.start(), self.ell.end()),
            "--lambda".into(),
            self.lambda.to_string(),
        ];
        if let Some(c) = self.c {
            v.extend(["--c".into(), c.to_string()]);
        }
        v.extend([
            "--b".into(),
            self.b.to_string(),
            "--t".into(),
            self.t.to_string(),
            "--engine".into(),
            self.engine.to_string(),
        ]);
        if let Some(p) = &self.out {
            v.extend(["--out".into(), p.display().to_string()]);
        }
        v
    }

    pub fn beta(&self) -> Result<Vec<Fe>> {
        self.basis.build(&self.field, self.n)
    }

    pub fn reduction_tree(&self) -> Result<ReductionTree> {
        self.tree.build(self.n)
    }

    /// Basis, tree and precomputed table; fails if the tree is invalid.
    pub fn table(&self) -> Result<(Vec<Fe>, PrecompTable)> {
        let beta = self.beta()?;
        let tree = self.reduction_tree()?;
        let table = PrecompTable::build(&self.field, &tree, &beta)?;
        Ok((beta, table))
    }
}

impl fmt::Display for RunConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_args().join(" "))
    }
}

fn first_line(s: &str) -> String {
    let line = s.lines().find(|l| !l.trim().is_empty()).unwrap_or("invalid arguments");
    line.trim_start_matches("error: ").trim().to_string()
}

fn random_elems(rng: &mut ChaCha8Rng, f: &Field, len: usize) -> Vec<Fe> {
    let mask = (f.size() - 1) as u32;
    (0..len).map(|_| Fe(rng.random::<u32>() & mask)).collect()
}

/// One verification outcome.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Check {
    pub name: String,
    pub tree: String,
    pub ell: usize,
    pub lambda: Fe,
    pub pass: bool,
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let status = if self.pass { "PASS" } else { "FAIL" };
        write!(f, "{},{},{},{},{status}", self.name, self.tree, self.ell, self.lambda)
    }
}

const CORE_CHECKS: [(Transform, OracleBasis, OracleBasis); 6] = [
    (Transform::N2X, OracleBasis::Newton, OracleBasis::Lch),
    (Transform::X2N, OracleBasis::Lch, OracleBasis::Newton),
    (Transform::L2X, OracleBasis::Lagrange, OracleBasis::Lch),
    (Transform::X2L, OracleBasis::Lch, OracleBasis::Lagrange),
    (Transform::X2M, OracleBasis::TwistedLch, OracleBasis::Monomial),
    (Transform::M2X, OracleBasis::Monomial, OracleBasis::TwistedLch),
];

const ROUND_TRIPS: [(Transform, Transform); 6] = [
    (Transform::N2X, Transform::X2N),
    (Transform::X2N, Transform::N2X),
    (Transform::X2L, Transform::L2X),
    (Transform::L2X, Transform::X2L),
    (Transform::M2X, Transform::X2M),
    (Transform::X2M, Transform::M2X),
];

fn run_core(table: &PrecompTable, t: Transform, lambda: Fe, input: &[Fe]) -> Result<Vec<Fe>> {
    let ell = input.len();
    let mut buf = input.to_vec();
    if matches!(t, Transform::L2X | Transform::X2L) {
        buf.resize(1 << table.n(), Fe::ZERO);
    }
    let p = RunParams { lambda, ..RunParams::new(ell) };
    t.run(table, &p, &mut buf)?;
    buf.truncate(ell);
    Ok(buf)
}

/// Oracle and round-trip checks for several trees over one basis.
///
/// Inputs are drawn once per (lambda, ell) from `seed`, so the oracle work is
/// shared by all tables.
pub fn verify_tables(
    tables: &[&PrecompTable],
    beta: &[Fe],
    lambdas: &[Fe],
    ells: RangeInclusive<usize>,
    seed: u64,
) -> Result<Vec<Check>> {
    let Some(first) = tables.first() else {
        return Ok(Vec::new());
    };
    let f = *first.field();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    for &lambda in lambdas {
        let oracle = Oracle::new(&f, beta, lambda)?;
        for ell in ells.clone() {
            let mut expected = Vec::new();
            for (t, from, to) in CORE_CHECKS {
                let x = random_elems(&mut rng, &f, ell);
                let y = oracle.convert(from, to, &x)?;
                expected.push((t.name().to_string(), x, y, None));
            }
            for from in PolyBasis::ALL {
                for to in PolyBasis::ALL {
                    if from == to {
                        continue;
                    }
                    let x = random_elems(&mut rng, &f, ell);
                    let y = oracle.convert(from.into(), to.into(), &x)?;
                    expected.push((format!("convert:{from}:{to}"), x, y, Some((from, to))));
                }
            }
            let trips: Vec<Vec<Fe>> = ROUND_TRIPS.iter().map(|_| random_elems(&mut rng, &f, ell)).collect();
            for table in tables {
                let tree = table.tree().to_string();
                let mut push = |name: String, pass: bool| {
                    out.push(Check { name, tree: tree.clone(), ell, lambda, pass });
                };
                for (i, (name, x, y, pair)) in expected.iter().enumerate() {
                    let got = match pair {
                        None => run_core(table, CORE_CHECKS[i].0, lambda, x)?,
                        Some((from, to)) => convert(table, *from, *to, lambda, x)?.coeffs,
                    };
                    push(name.clone(), &got == y);
                }
                for ((a, b), x) in ROUND_TRIPS.iter().zip(&trips) {
                    let mid = run_core(table, *a, lambda, x)?;
                    let back = run_core(table, *b, lambda, &mid)?;
                    push(format!("roundtrip:{a}/{b}"), &back == x);
                }
            }
        }
    }
    Ok(out)
}

/// Counted operations for one length.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Measurement {
    pub ops: OpCounter,
    pub twist_multiplications: u64,
}

fn twist_cost(w: Fe, ell: usize) -> u64 {
    if w == Fe::ONE || ell < 2 {
        0
    } else {
        2 * ell as u64 - 3
    }
}

fn lch_leg(b: PolyBasis, into: bool) -> Option<Transform> {
    match (b, into) {
        (PolyBasis::Lch, _) => None,
        (PolyBasis::Newton, true) => Some(Transform::N2X),
        (PolyBasis::Newton, false) => Some(Transform::X2N),
        (PolyBasis::Lagrange, true) => Some(Transform::L2X),
        (PolyBasis::Lagrange, false) => Some(Transform::X2L),
        (PolyBasis::Monomial, true) => Some(Transform::M2X),
        (PolyBasis::Monomial, false) => Some(Transform::X2M),
    }
}

/// Measures counts with either engine.
pub struct Meter<'a> {
    table: &'a PrecompTable,
    model: CostModel<'a>,
    engine: Engine,
    rng: ChaCha8Rng,
}

impl<'a> Meter<'a> {
    pub fn new(table: &'a PrecompTable, engine: Engine) -> Meter<'a> {
        Meter { table, model: CostModel::new(table), engine, rng: ChaCha8Rng::seed_from_u64(INPUT_SEED) }
    }

    fn core(&mut self, t: Transform, p: &RunParams) -> Result<OpCounter> {
        match self.engine {
            Engine::Model => self.model.cost(t, p),
            Engine::Run => {
                let len = match t {
                    Transform::L2X | Transform::X2L => 1 << self.table.n(),
                    _ => p.ell,
                };
                let mut buf = random_elems(&mut self.rng, self.table.field(), len);
                t.run(self.table, p, &mut buf)
            }
        }
    }

    pub fn measure(&mut self, spec: TransformSpec, p: &RunParams) -> Result<Measurement> {
        match spec {
            TransformSpec::Core(t) => Ok(Measurement { ops: self.core(t, p)?, twist_multiplications: 0 }),
            TransformSpec::Convert(from, to) => {
                let ell = p.ell;
                if self.engine == Engine::Run {
                    let x = random_elems(&mut self.rng, self.table.field(), ell);
                    let r = convert(self.table, from, to, p.lambda, &x)?;
                    return Ok(Measurement { ops: r.ops, twist_multiplications: r.twist_multiplications });
                }
                let mut m = Measurement::default();
                if from == to {
                    return Ok(m);
                }
                let root = self.table.vertex(ReductionTree::ROOT);
                let base = RunParams { c: ell, b: 0, ..*p };
                if let Some(t) = lch_leg(from, true) {
                    m.ops += self.model.cost(t, &base)?;
                }
                if let Some(t) = lch_leg(to, false) {
                    m.ops += self.model.cost(t, &base)?;
                }
                if from == PolyBasis::Monomial {
                    m.twist_multiplications += twist_cost(root.basis[0], ell);
                }
                if to == PolyBasis::Monomial {
                    m.twist_multiplications += twist_cost(root.head_inv, ell);
                }
                Ok(m)
            }
            TransformSpec::All => Err(Error::Unsupported("`all` is only accepted by the bounds command".into())),
        }
    }
}

/// Which counter a bound applies to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Counter {
    Additions,
    Multiplications,
}

/// A bound attached to a transform: a closed form, or exactly zero.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BoundRule {
    Formula(BoundId),
    ZeroMultiplications,
}

impl BoundRule {
    pub fn name(&self) -> String {
        match self {
            BoundRule::Formula(id) => id.to_string(),
            BoundRule::ZeroMultiplications => "zero_mul".into(),
        }
    }

    pub fn counter(&self) -> Counter {
        match self {
            BoundRule::Formula(id) if id.name().ends_with("_add") => Counter::Additions,
            _ => Counter::Multiplications,
        }
    }

    pub fn value(&self, p: &BoundParams) -> Result<i64> {
        match self {
            BoundRule::Formula(id) => bound(*id, p),
            BoundRule::ZeroMultiplications => Ok(0),
        }
    }
}

/// True if d_v = 2^(ceil(log2 n_v) - 1) at every internal vertex.
pub fn is_cantor_shaped(tree: &ReductionTree) -> bool {
    tree.internal_vertices()
        .all(|v| tree.d(v) == tree.n_v(v).next_power_of_two() / 2)
}

/// Bounds that apply to a transform with the given parameters.
pub fn applicable_bounds(t: Transform, p: &RunParams, cantor_tree: bool, cantor_basis: bool) -> Vec<BoundRule> {
    use BoundId::*;
    let mut v: Vec<BoundRule> = match t {
        Transform::N2X | Transform::X2N => vec![NewtonAdd, NewtonMul],
        Transform::L2X => vec![L2xAdd, L2xMul],
        Transform::X2L => vec![X2lAdd, X2lMul],
        Transform::X2M | Transform::M2X => vec![MonomialAdd, MonomialMul],
        Transform::Taylor | Transform::TaylorInverse => vec![TaylorAdd],
    }
    .into_iter()
    .map(BoundRule::Formula)
    .collect();
    let full_lagrange = p.c == p.ell && p.b == 0;
    match t {
        Transform::N2X | Transform::X2N if cantor_tree => v.push(BoundRule::Formula(CantorNewtonAdd)),
        Transform::L2X | Transform::X2L if full_lagrange => {
            v.push(BoundRule::Formula(LagrangeAdd));
            v.push(BoundRule::Formula(LagrangeMul));
        }
        Transform::X2M | Transform::M2X => {
            if cantor_tree {
                v.push(BoundRule::Formula(CantorMonomialAdd));
            }
            if cantor_basis {
                v.push(BoundRule::ZeroMultiplications);
            }
        }
        _ => {}
    }
    v
}

/// Worst slack of one (transform, bound) pair over a length sweep.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BoundReport {
    pub transform: Transform,
    pub rule: String,
    pub worst_slack: i64,
    pub at_ell: usize,
    pub count: u64,
    pub bound: i64,
}

/// Sweep `ells` and compare counts with the applicable bounds (or `only`).
pub fn check_bounds(
    table: &PrecompTable,
    transforms: &[Transform],
    ells: RangeInclusive<usize>,
    c: Option<usize>,
    base: &RunParams,
    engine: Engine,
    only: Option<&[BoundId]>,
) -> Result<Vec<BoundReport>> {
    let cantor_tree = is_cantor_shaped(table.tree());
    let cantor_basis = is_cantor_basis(table.field(), &table.vertex(ReductionTree::ROOT).basis);
    let mut meter = Meter::new(table, engine);
    let mut reports: Vec<BoundReport> = Vec::new();
    for &t in transforms {
        let mut worst: Vec<Option<BoundReport>> = Vec::new();
        for ell in ells.clone() {
            let p = RunParams { ell, c: c.unwrap_or(ell), ..*base };
            let mut rules = applicable_bounds(t, &p, cantor_tree, cantor_basis);
            if let Some(ids) = only {
                for id in ids {
                    if !rules.contains(&BoundRule::Formula(*id)) {
                        return Err(Error::Unsupported(format!("bound {id} does not apply to {t}")));
                    }
                }
                rules.retain(|r| matches!(r, BoundRule::Formula(id) if ids.contains(id)));
            }
            if worst.is_empty() {
                worst = vec![None; rules.len()];
            }
            let m = meter.measure(TransformSpec::Core(t), &p)?;
            let bp = BoundParams {
                ell: ell as u64,
                c: p.c as u64,
                b: p.b as u64,
                n: table.n() as u64,
                t: p.t as u64,
            };
            for (slot, rule) in worst.iter_mut().zip(&rules) {
                let count = match rule.counter() {
                    Counter::Additions => m.ops.additions,
                    Counter::Multiplications => m.ops.multiplications,
                };
                let b = rule.value(&bp)?;
                let slack = b - count as i64;
                if slot.as_ref().is_none_or(|r| slack < r.worst_slack) {
                    *slot = Some(BoundReport { transform: t, rule: rule.name(), worst_slack: slack, at_ell: ell, count, bound: b });
                }
            }
        }
        reports.extend(worst.into_iter().flatten());
    }
    Ok(reports)
}

struct Outcome {
    text: String,
    status: i32,
    failure: Option<String>,
}

impl Outcome {
    fn ok(text: String) -> Outcome {
        Outcome { text, status: 0, failure: None }
    }
}

fn header(cmd: &str, cfg: &RunConfig, beta: &[Fe], tree: Option<&ReductionTree>) -> String {
    let mut s = format!("# binconv {cmd}\n# config: {cfg}\n# basis: {}\n", format_basis(beta));
    if let Some(t) = tree {
        s += &format!("# tree: {t}\n");
    }
    s
}

fn cmd_construct(cfg: &RunConfig) -> Result<Outcome> {
    let beta = cfg.beta()?;
    Ok(Outcome::ok(beta.iter().map(|b| format!("{b}\n")).collect()))
}

fn cmd_verify(cfg: &RunConfig) -> Result<Outcome> {
    if cfg.n > MAX_VERIFY_N {
        return Err(range(format!("verify needs n <= {MAX_VERIFY_N}, got {}", cfg.n)));
    }
    let (beta, table) = cfg.table()?;
    let mut rng = ChaCha8Rng::seed_from_u64(INPUT_SEED);
    let mut lambdas = vec![Fe::ZERO];
    if cfg.lambda != Fe::ZERO {
        lambdas.push(cfg.lambda);
    }
    lambdas.extend(random_elems(&mut rng, &cfg.field, 2));
    let checks = verify_tables(&[&table], &beta, &lambdas, cfg.ell.clone(), INPUT_SEED)?;
    let mut text = header("verify", cfg, &beta, Some(table.tree()));
    text += "check,tree,ell,lambda,status\n";
    for c in &checks {
        text += &format!("{c}\n");
    }
    let failed = checks.iter().filter(|c| !c.pass).count();
    text += &format!("# {} checks, {failed} failed\n", checks.len());
    let failure = (failed > 0).then(|| format!("{failed} of {} checks failed", checks.len()));
    Ok(Outcome { text, status: i32::from(failed > 0), failure })
}

fn base_params(cfg: &RunConfig) -> RunParams {
    RunParams { ell: 0, c: cfg.c.unwrap_or(0), b: cfg.b, t: cfg.t, lambda: cfg.lambda }
}

fn cmd_counts(cfg: &RunConfig) -> Result<Outcome> {
    if cfg.n > MAX_COUNT_N {
        return Err(range(format!("counts needs n <= {MAX_COUNT_N}, got {}", cfg.n)));
    }
    let (beta, table) = cfg.table()?;
    let twist = matches!(cfg.transform, TransformSpec::Convert(a, b) if a == PolyBasis::Monomial || b == PolyBasis::Monomial);
    let mut meter = Meter::new(&table, cfg.engine);
    let mut text = header("counts", cfg, &beta, Some(table.tree()));
    text += if twist { "ell,additions,multiplications,twist_multiplications\n" } else { "ell,additions,multiplications\n" };
    let base = base_params(cfg);
    for ell in cfg.ell.clone() {
        let p = RunParams { ell, c: cfg.c.unwrap_or(ell), ..base };
        let m = meter.measure(cfg.transform, &p)?;
        text += &format!("{ell},{},{}", m.ops.additions, m.ops.multiplications);
        if twist {
            text += &format!(",{}", m.twist_multiplications);
        }
        text.push('\n');
    }
    Ok(Outcome::ok(text))
}

fn cmd_bounds(cfg: &RunConfig, only: Option<&str>) -> Result<Outcome> {
    if cfg.n > MAX_COUNT_N {
        return Err(range(format!("bounds needs n <= {MAX_COUNT_N}, got {}", cfg.n)));
    }
    let transforms: Vec<Transform> = match cfg.transform {
        TransformSpec::Core(t) => vec![t],
        TransformSpec::All => Transform::ALL.to_vec(),
        TransformSpec::Convert(..) => {
            return Err(Error::Unsupported("bounds apply to single transforms, not composed conversions".into()))
        }
    };
    let ids: Option<Vec<BoundId>> = only.map(|s| s.split(',').map(str::parse).collect()).transpose()?;
    let (beta, table) = cfg.table()?;
    let base = base_params(cfg);
    let reports = check_bounds(&table, &transforms, cfg.ell.clone(), cfg.c, &base, cfg.engine, ids.as_deref())?;
    let mut text = header("bounds", cfg, &beta, Some(table.tree()));
    text += "transform,bound,worst_slack,at_ell,count,bound_value\n";
    for r in &reports {
        text += &format!("{},{},{},{},{},{}\n", r.transform, r.rule, r.worst_slack, r.at_ell, r.count, r.bound);
    }
    let failure = reports.iter().find(|r| r.worst_slack < 0).map(|r| {
        format!("{} exceeds {} at ell={} ({} > {})", r.transform, r.rule, r.at_ell, r.count, r.bound)
    });
    Ok(Outcome { text, status: i32::from(failure.is_some()), failure })
}

fn cmd_trees(cfg: &RunConfig, list: bool) -> Result<Outcome> {
    let beta = cfg.beta()?;
    if list {
        let mut text = header("trees", cfg, &beta, None);
        text += "tree,d_image,valid\n";
        for t in enumerate_trees(cfg.n)? {
            let img: Vec<String> = t.d_image().iter().map(|d| d.to_string()).collect();
            text += &format!("{t},{},{}\n", img.join("-"), validate(&cfg.field, &t, &beta));
        }
        return Ok(Outcome::ok(text));
    }
    let tree = cfg.reduction_tree()?;
    if validate(&cfg.field, &tree, &beta) {
        Ok(Outcome::ok(format!("valid {tree}\n")))
    } else {
        Err(Error::InvalidTree(format!("{tree} is not a reduction tree for the basis")))
    }
}

fn dispatch(cmd: Command) -> Result<(Outcome, Option<PathBuf>)> {
    let args = match &cmd {
        Command::Construct(a) | Command::Verify(a) | Command::Counts(a) => a,
        Command::Bounds(a) => &a.config,
        Command::Trees(a) => &a.config,
    };
    let cfg = RunConfig::from_args(args)?;
    if matches!(cfg.transform, TransformSpec::All) && !matches!(cmd, Command::Bounds(_)) {
        return Err(Error::Unsupported("`--transform all` is only accepted by the bounds command".into()));
    }
    let outcome = match &cmd {
        Command::Construct(_) => cmd_construct(&cfg)?,
        Command::Verify(_) => cmd_verify(&cfg)?,
        Command::Counts(_) => cmd_counts(&cfg)?,
        Command::Bounds(a) => cmd_bounds(&cfg, a.bound.as_deref())?,
        Command::Trees(a) => cmd_trees(&cfg, a.list)?,
    };
    Ok((outcome, cfg.out))
}

/// Entry point; returns the process exit status.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            print!("{e}");
            return 0;
        }
        Err(e) => {
            eprintln!("ERROR: {}", first_line(&e.to_string()));
            return 2;
        }
    };
    match dispatch(cli.command) {
        Ok((outcome, out)) => {
            let written = match out {
                Some(path) => fs::write(&path, &outcome.text)
                    .map_err(|e| format!("cannot write {}: {e}", path.display())),
                None => {
                    print!("{}", outcome.text);
                    Ok(())
                }
            };
            if let Err(msg) = written {
                eprintln!("ERROR: {msg}");
                return 1;
            }
            if let Some(msg) = outcome.failure {
                eprintln!("ERROR: {msg}");
            }
            outcome.status
        }
        Err(e) => {
            eprintln!("ERROR: {}", first_line(&e.to_string()));
            1
        }
    }
}
