//! One PASS/FAIL line per acceptance criterion, written to stderr.

use std::collections::BTreeSet;
use std::io::Write;
use std::ops::RangeInclusive;

use binconv::basisgen::{
    construct_cantor, construct_gen_cantor, construct_tower_basis, is_independent, random_basis,
    subfield_basis_powers, TowerSpec,
};
use binconv::cli::{check_bounds, verify_tables, BasisSource, Engine};
use binconv::oracle::{check_factorization, Oracle};
use binconv::precomp::PrecompTable;
use binconv::redtree::{
    build_cantor_tree, build_max_tree, build_trivial, enumerate_trees, validate, ReductionTree, TreeStrategy,
};
use binconv::transforms::{CostModel, OpCounter, RunParams, Transform};
use binconv::{Fe, Field};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// All comparisons are exact field or integer equalities.
const TOLERANCE: u64 = 0;
/// Instances per (transform pair, ell) in the round-trip sweep.
const ROUND_TRIP_INSTANCES: usize = 100;
/// Lengths tested exhaustively in the round-trip sweep up to this n; sampled above.
const ROUND_TRIP_EXHAUSTIVE_N: usize = 6;

struct Outcome {
    pass: bool,
    /// Checks that cannot hold for the given inputs (documented, not regressions).
    unattainable: usize,
    failures: usize,
    detail: String,
}

impl Outcome {
    fn new(failures: usize, checks: usize, extra: &str) -> Outcome {
        let mut detail = format!("{checks} checks, {failures} failed");
        if !extra.is_empty() {
            detail += "; ";
            detail += extra;
        }
        Outcome { pass: failures == 0 && checks > 0, unattainable: 0, failures: if checks == 0 { 1 } else { failures }, detail }
    }
}

fn field(m: u32) -> Field {
    Field::new(m).unwrap()
}

fn rand_vec(rng: &mut ChaCha8Rng, f: &Field, len: usize) -> Vec<Fe> {
    let mask = (f.size() - 1) as u32;
    (0..len).map(|_| Fe(rng.random::<u32>() & mask)).collect()
}

fn run(table: &PrecompTable, t: Transform, p: &RunParams, input: &[Fe]) -> Vec<Fe> {
    let mut buf = input.to_vec();
    if matches!(t, Transform::L2X | Transform::X2L) {
        buf.resize(1 << table.n(), Fe::ZERO);
    }
    t.run(table, p, &mut buf).unwrap();
    buf.truncate(input.len());
    buf
}

fn valid_tables(f: &Field, beta: &[Fe], strategies: &[&str]) -> Vec<PrecompTable> {
    let n = beta.len();
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for s in strategies {
        let tree = TreeStrategy::parse(s).unwrap().build(n).unwrap();
        if seen.insert(tree.to_string()) && validate(f, &tree, beta) {
            out.push(PrecompTable::build(f, &tree, beta).unwrap());
        }
    }
    out
}

const STRATEGIES: [&str; 5] = ["trivial", "cantor", "max:1-2-4", "balanced:1-2-4", "graft:2"];

fn oracle_equivalence() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let (mut checks, mut failures, mut configs, mut skipped) = (0, 0, 0, 0);
    // GF(2^8) cannot hold the 1-2-4-12 tower; 1-2-4-8 stands in.
    for (m, tower) in [(12, "tower:1-2-4-12"), (8, "tower:1-2-4-8")] {
        let f = field(m);
        for n in 1..=6 {
            for src in ["random:17", "cantor", tower, "gencantor:2"] {
                let Ok(beta) = BasisSource::parse(&f, src).unwrap().build(&f, n) else {
                    skipped += 1;
                    continue;
                };
                let tables = valid_tables(&f, &beta, &STRATEGIES);
                let refs: Vec<&PrecompTable> = tables.iter().collect();
                let mut lambdas = vec![Fe::ZERO];
                lambdas.extend(rand_vec(&mut rng, &f, 2));
                let res = verify_tables(&refs, &beta, &lambdas, 1..=1 << n, rng.random()).unwrap();
                configs += tables.len();
                checks += res.len();
                failures += res.iter().filter(|c| !c.pass).count();
            }
        }
    }
    Outcome::new(failures, checks, &format!("{configs} basis/tree pairs, {skipped} basis sources not constructible"))
}

fn mixed_l2x() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let (mut checks, mut failures) = (0, 0);
    for (m, src) in [(12, "random:5"), (8, "cantor"), (12, "tower:1-2-4-12")] {
        let f = field(m);
        for n in 1..=5 {
            let beta = BasisSource::parse(&f, src).unwrap().build(&f, n).unwrap();
            let tables = valid_tables(&f, &beta, &["trivial", "cantor", "max:1-2-4"]);
            let lambda = rand_vec(&mut rng, &f, 1)[0];
            let oracle = Oracle::new(&f, &beta, lambda).unwrap();
            let size = 1usize << n;
            for ell in 1..=size {
                for c in 0..=ell {
                    for b in 0..=1 {
                        if b + c == 0 || b + c > size {
                            continue;
                        }
                        let input = rand_vec(&mut rng, &f, ell);
                        let want = oracle.l2x_mixed(c, ell, b, &input).unwrap();
                        for t in &tables {
                            let p = RunParams { ell, c, b, t: 2, lambda };
                            let mut buf = input.clone();
                            buf.resize(size, Fe::ZERO);
                            Transform::L2X.run(t, &p, &mut buf).unwrap();
                            checks += 1;
                            failures += usize::from(buf[..c + b] != want[..]);
                        }
                    }
                }
            }
        }
    }
    Outcome::new(failures, checks, "")
}

fn sampled_lengths(n: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let size = 1usize << n;
    if n <= ROUND_TRIP_EXHAUSTIVE_N {
        return (1..=size).collect();
    }
    let mut s = BTreeSet::new();
    for k in 0..=n {
        let p = 1usize << k;
        s.extend([p - 1, p, p + 1].into_iter().filter(|&x| x >= 1 && x <= size));
    }
    for _ in 0..8 {
        s.insert(rng.random_range(1..=size));
    }
    s.into_iter().collect()
}

fn round_trips() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let pairs = [
        (Transform::N2X, Transform::X2N),
        (Transform::X2N, Transform::N2X),
        (Transform::X2L, Transform::L2X),
        (Transform::L2X, Transform::X2L),
        (Transform::M2X, Transform::X2M),
        (Transform::X2M, Transform::M2X),
        (Transform::Taylor, Transform::TaylorInverse),
        (Transform::TaylorInverse, Transform::Taylor),
    ];
    let (mut checks, mut failures, mut lengths) = (0, 0, 0);
    for (m, src, strategy) in [(16, "cantor", "cantor"), (16, "random:9", "trivial"), (12, "tower:1-2-4-12", "max:1-2-4")] {
        let f = field(m);
        for n in 1..=10 {
            let beta = BasisSource::parse(&f, src).unwrap().build(&f, n).unwrap();
            let tree = TreeStrategy::parse(strategy).unwrap().build(n).unwrap();
            let table = PrecompTable::build(&f, &tree, &beta).unwrap();
            for ell in sampled_lengths(n, &mut rng) {
                lengths += 1;
                for (a, b) in pairs {
                    for i in 0..ROUND_TRIP_INSTANCES {
                        let lambda = rand_vec(&mut rng, &f, 1)[0];
                        let p = RunParams { lambda, t: 2 << (i % 3), ..RunParams::new(ell) };
                        let x = rand_vec(&mut rng, &f, ell);
                        let back = run(&table, b, &p, &run(&table, a, &p, &x));
                        checks += 1;
                        failures += usize::from(back != x);
                    }
                }
            }
        }
    }
    Outcome::new(failures, checks, &format!("{lengths} (basis, n, ell) cases, exhaustive ell up to n={ROUND_TRIP_EXHAUSTIVE_N}"))
}

/// Sweep n = 1..=15 over the Cantor basis of GF(2^16); `keep` selects bound names.
fn bound_sweep(trees: &[&str], keep: &dyn Fn(&str) -> bool) -> Outcome {
    let f = field(16);
    let (mut checks, mut failures) = (0, 0);
    let mut worst: Option<(i64, String)> = None;
    for n in 1..=15 {
        let beta = construct_cantor(&f, n).unwrap();
        for s in trees {
            let tree = TreeStrategy::parse(s).unwrap().build(n).unwrap();
            let table = PrecompTable::build(&f, &tree, &beta).unwrap();
            // Instrumented runs up to n = 10, replayed counts above.
            let engine = if n <= 10 { Engine::Run } else { Engine::Model };
            let base = RunParams::new(1);
            let reports = check_bounds(&table, &Transform::ALL, 1..=1 << n, None, &base, engine, None).unwrap();
            for r in reports.iter().filter(|r| keep(&r.rule)) {
                checks += 1;
                if r.worst_slack < -(TOLERANCE as i64) {
                    failures += 1;
                }
                if worst.as_ref().is_none_or(|(w, _)| r.worst_slack < *w) {
                    worst = Some((r.worst_slack, format!("{} {} n={n} tree={s} ell={}", r.transform, r.rule, r.at_ell)));
                }
            }
        }
    }
    let (w, at) = worst.unwrap_or((0, String::new()));
    Outcome::new(failures, checks, &format!("minimum slack {w} at {at}"))
}

fn general_bounds() -> Outcome {
    bound_sweep(&["trivial", "cantor"], &|r| !r.starts_with("cantor_") && r != "zero_mul")
}

fn cantor_bounds() -> Outcome {
    bound_sweep(&["cantor"], &|r| r.starts_with("cantor_") || r == "zero_mul")
}

fn sweep_adds(table: &PrecompTable, t: Transform, ells: RangeInclusive<usize>) -> Vec<OpCounter> {
    let mut model = CostModel::new(table);
    ells.map(|ell| model.cost(t, &RunParams::new(ell)).unwrap()).collect()
}

const TOWER_TUPLES: [&str; 7] = ["1-2-12", "1-3-12", "1-4-12", "1-6-12", "1-2-4-12", "1-2-6-12", "1-3-6-12"];

/// Tuple with every quadratic level marked trace-one, if it has any.
fn daggered(spec: &str) -> Option<String> {
    let degs: Vec<u32> = spec.split('-').map(|d| d.parse().unwrap()).collect();
    let mut out = degs[0].to_string();
    let mut any = false;
    for w in degs.windows(2) {
        out += &format!("-{}", w[1]);
        if w[1] == 2 * w[0] {
            out.push('!');
            any = true;
        }
    }
    any.then_some(out)
}

fn strategy_comparisons() -> Outcome {
    let (mut checks, mut failures, mut unattainable) = (0, 0, 0);
    let mut notes = Vec::new();

    let f16 = field(16);
    let beta = construct_cantor(&f16, 15).unwrap();
    let triv = PrecompTable::build(&f16, &build_trivial(15), &beta).unwrap();
    let cant = PrecompTable::build(&f16, &build_cantor_tree(15), &beta).unwrap();
    for t in [Transform::N2X, Transform::X2N, Transform::L2X, Transform::X2L] {
        let a = sweep_adds(&triv, t, 1..=1 << 15);
        let b = sweep_adds(&cant, t, 1..=1 << 15);
        let bad = a.iter().zip(&b).filter(|(x, y)| x.additions < y.additions).count();
        checks += 1;
        if bad > 0 {
            failures += 1;
            notes.push(format!("{t}: trivial < cantor at {bad} lengths"));
        }
    }

    let f = field(12);
    let n = 12;
    for spec in TOWER_TUPLES {
        let tw = TowerSpec::parse(&f, spec).unwrap();
        let beta = construct_tower_basis(&f, &tw, n).unwrap();
        let max = build_max_tree(n, &tw.split_degrees()).unwrap();
        let tmax = PrecompTable::build(&f, &max, &beta).unwrap();
        let ttriv = PrecompTable::build(&f, &build_trivial(n), &beta).unwrap();
        for t in Transform::ALL {
            let a = sweep_adds(&tmax, t, 1..=1 << n);
            let b = sweep_adds(&ttriv, t, 1..=1 << n);
            let bad = a.iter().zip(&b).filter(|(x, y)| x.additions > y.additions).count();
            checks += 1;
            if bad > 0 {
                failures += 1;
                notes.push(format!("{spec} {t}: max > trivial at {bad} lengths"));
            }
        }
        let Some(dag) = daggered(spec) else { continue };
        let twd = TowerSpec::parse(&f, &dag).unwrap();
        let beta_d = construct_tower_basis(&f, &twd, n).unwrap();
        if beta_d == beta {
            // The default level bases already have trace one, so both tuples give the same basis.
            checks += 2;
            unattainable += 2;
            notes.push(format!("{dag}: unattainable, basis identical to {spec}"));
            continue;
        }
        let td = PrecompTable::build(&f, &max, &beta_d).unwrap();
        for t in [Transform::X2M, Transform::M2X] {
            let plain = sweep_adds(&tmax, t, 1..=1 << n);
            let dagg = sweep_adds(&td, t, 1..=1 << n);
            let fewer = plain.iter().zip(&dagg).any(|(x, y)| y.multiplications < x.multiplications);
            checks += 1;
            if !fewer {
                failures += 1;
                notes.push(format!("{dag} {t}: no length with fewer multiplications"));
            }
        }
    }
    let extra = if notes.is_empty() { String::new() } else { notes.join("; ") };
    let mut o = Outcome::new(failures, checks, &extra);
    if unattainable > 0 {
        o.pass = false;
        o.unattainable = unattainable;
        o.detail = format!("{unattainable} unattainable, {}", o.detail);
    }
    o
}

fn cantor_shaped_image(img: &BTreeSet<usize>) -> bool {
    img.iter().all(|&d| d == 0 || d.is_power_of_two())
}

fn tree_characterization() -> Outcome {
    let (mut checks, mut failures) = (0, 0);
    let f8 = field(8);
    for n in 1..=6 {
        let beta = construct_cantor(&f8, n).unwrap();
        for t in enumerate_trees(n).unwrap() {
            checks += 1;
            failures += usize::from(validate(&f8, &t, &beta) != cantor_shaped_image(&t.d_image()));
        }
    }
    let f13 = field(13);
    for seed in 0..4 {
        for n in 1..=6 {
            let beta = random_basis(&f13, n, seed).unwrap();
            for t in enumerate_trees(n).unwrap() {
                let expect = t.d_image().iter().all(|&d| d <= 1);
                checks += 1;
                failures += usize::from(validate(&f13, &t, &beta) != expect);
            }
        }
    }
    Outcome::new(failures, checks, "")
}

fn gen_cantor_ok(f: &Field, t: u32, m: u32, beta: &[Fe], theta: &[Fe]) -> bool {
    let tt = t as usize;
    let top = 1usize << m;
    let frob = |x: Fe, r: usize| f.pow2k(x, t * r as u32);
    let binomial = (0..top).all(|j| {
        (0..(top - j) * tt).all(|i| {
            let s = (0..=j).filter(|&r| r & !j == 0).fold(Fe::ZERO, |acc, r| acc + frob(beta[i + j * tt], r));
            beta[i] == s
        })
    });
    let recursion = (0..m as usize).all(|k| {
        let st = (1 << k) * tt;
        (0..(top - (1 << k)) * tt).all(|i| beta[i] == frob(beta[i + st], 1 << k) + beta[i + st])
    });
    let prefix = beta[..tt] == *theta;
    let subfields = (0..m).all(|k| beta[..(1usize << k) * tt].iter().all(|&b| f.in_subfield(b, t << k).unwrap()));
    beta.len() == top * tt && binomial && recursion && prefix && subfields && is_independent(beta)
}

fn construction_properties() -> Outcome {
    let (mut checks, mut failures) = (0, 0);
    for f in [field(8), field(16)] {
        for (t, max_m) in [(1, 3), (2, 2)] {
            let theta = if t == 1 { vec![Fe::ONE] } else { subfield_basis_powers(&f, 1, t).unwrap() };
            for m in 0..=max_m {
                let beta = construct_gen_cantor(&f, m, t, &theta).unwrap();
                checks += 1;
                failures += usize::from(!gen_cantor_ok(&f, t, m, &beta, &theta));
            }
        }
    }

    let f12 = field(12);
    for spec in ["1-2!-12", "1-2!-4!-12", "1-2!-6-12!", "1-3-6!-12", "1-3-6-12!", "1-6-12!"] {
        let tw = TowerSpec::parse(&f12, spec).unwrap();
        let quad: Vec<usize> = tw
            .degrees
            .windows(2)
            .zip(&tw.trace_one)
            .filter(|(_, &q)| q)
            .map(|(w, _)| w[0] as usize)
            .collect();
        for n in 2..=12 {
            let beta = construct_tower_basis(&f12, &tw, n).unwrap();
            let tree = build_max_tree(n, &tw.split_degrees()).unwrap();
            let table = PrecompTable::build(&f12, &tree, &beta).unwrap();
            for v in tree.internal_vertices().filter(|&v| quad.contains(&tree.d(v))) {
                checks += 1;
                failures += usize::from(table.vertex(v).delta_head != Fe::ONE);
            }
        }
    }
    let f16 = field(16);
    for n in 2..=15 {
        let beta = construct_cantor(&f16, n).unwrap();
        let tree = build_cantor_tree(n);
        let table = PrecompTable::build(&f16, &tree, &beta).unwrap();
        for v in tree.internal_vertices() {
            checks += 1;
            failures += usize::from(table.vertex(v).delta_head != Fe::ONE);
        }
    }

    let f8 = field(8);
    for n in 1..=7 {
        let beta = construct_cantor(&f8, n).unwrap();
        for t in enumerate_trees(n).unwrap().into_iter().filter(|t| validate(&f8, t, &beta)) {
            checks += 1;
            failures += usize::from(PrecompTable::build(&f8, &t, &beta).unwrap().phi_entries() != n * (n - 1) / 2);
        }
    }
    for n in [12, 15] {
        let beta = construct_cantor(&f16, n).unwrap();
        for t in [build_trivial(n), build_cantor_tree(n)] {
            checks += 1;
            failures += usize::from(PrecompTable::build(&f16, &t, &beta).unwrap().phi_entries() != n * (n - 1) / 2);
        }
    }
    Outcome::new(failures, checks, "")
}

fn factorization() -> Outcome {
    let (mut checks, mut failures) = (0, 0);
    for (m, src) in [(8, "cantor"), (12, "tower:1-2-4-12"), (13, "random:21"), (12, "gencantor:2")] {
        let f = field(m);
        for n in 2..=5 {
            let Ok(beta) = BasisSource::parse(&f, src).unwrap().build(&f, n) else { continue };
            for d in 1..n {
                let root = ReductionTree::join(&build_trivial(d), &build_trivial(n - d));
                if !validate(&f, &root, &beta) {
                    continue;
                }
                checks += 1;
                failures += usize::from(!check_factorization(&f, &beta, d).unwrap());
            }
        }
    }
    Outcome::new(failures, checks, "")
}

type Criterion = fn() -> Outcome;

#[test]
fn acceptance() {
    let criteria: [(&str, Criterion); 9] = [
        ("oracle_equivalence", oracle_equivalence),
        ("mixed_l2x", mixed_l2x),
        ("round_trips", round_trips),
        ("count_bounds", general_bounds),
        ("cantor_sharpenings", cantor_bounds),
        ("strategy_comparisons", strategy_comparisons),
        ("tree_characterization", tree_characterization),
        ("construction_properties", construction_properties),
        ("factorization", factorization),
    ];
    let outcomes: Vec<(usize, &str, Outcome, f64)> = std::thread::scope(|s| {
        let handles: Vec<_> = criteria
            .iter()
            .enumerate()
            .map(|(i, (name, f))| {
                s.spawn(move || {
                    let start = std::time::Instant::now();
                    let o = f();
                    (i + 1, *name, o, start.elapsed().as_secs_f64())
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().unwrap()).collect()
    });
    let mut failed = Vec::new();
    for (i, name, o, secs) in &outcomes {
        let status = if o.pass { "PASS" } else { "FAIL" };
        // Written past the test harness capture so the report always shows.
        writeln!(std::io::stderr(), "criterion {i} {name}: {status} (tol={TOLERANCE}, {secs:.1}s) {}", o.detail).unwrap();
        if o.failures > 0 {
            failed.push(*name);
        }
    }
    // Only unattainable sub-checks may keep a criterion from passing.
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
    assert!(outcomes.iter().all(|(_, _, o, _)| o.pass || o.unattainable > 0));
}
