//! One line per acceptance criterion. Extended items need `TAXI_LONG_RUN=1`.

use std::str::FromStr;
use std::time::{Duration, Instant};

use num_bigint::BigUint;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use taxiwalk::almbound::{alm_bound_from_matrix, alm_upper_bound, build_transfer_matrix, PowerIteration};
use taxiwalk::bounds::{check_consistency, DEFAULT_PRECISION};
use taxiwalk::bridgecount::{
    bridge_lower_bound, bridge_table, bridges_from_irreducible, enumerate_irreducible_bridges,
    irreducible_from_bridges, irreducible_lower_bound,
};
use taxiwalk::contourlab::{peierls_tail, sweep, tail_start, SweepMode, CHECKS};
use taxiwalk::gjbound::{
    avoiding_counts, avoiding_counts_gj, brute_force_polygons, count_avoiding_brute, count_avoiding_words,
    enumerate_taxi_polygons, gj_bound_from_polygons, MistakeSet,
};
use taxiwalk::reference::{self, TAXI_WALK_COUNTS};
use taxiwalk::walkcount::{fibonacci, subadditive_upper_bound, taxi_walk_table};
use taxiwalk::{BoundReport, CountTable, Decimal};

type Outcome = Result<String, String>;

struct Suite {
    failed: Vec<&'static str>,
    long_run: bool,
    jobs: usize,
    reports: Vec<BoundReport>,
}

impl Suite {
    fn new() -> Self {
        Suite {
            failed: Vec::new(),
            long_run: std::env::var("TAXI_LONG_RUN").is_ok_and(|v| v == "1"),
            jobs: std::thread::available_parallelism().map_or(1, |n| n.get()),
            reports: Vec::new(),
        }
    }

    fn run(&mut self, name: &'static str, f: impl FnOnce(&mut Self) -> Outcome) {
        let start = Instant::now();
        let outcome = f(self);
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS {name} ({secs:.1}s): {detail}"),
            Err(why) => {
                println!("FAIL {name} ({secs:.1}s): {why}");
                self.failed.push(name);
            }
        }
    }

    fn extended(&mut self, name: &'static str, f: impl FnOnce(&mut Self) -> Outcome) {
        if self.long_run {
            self.run(name, f);
        } else {
            println!("SKIP {name}: long run, set TAXI_LONG_RUN=1");
        }
    }
}

fn ensure(ok: bool, why: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(why())
    }
}

fn at_most(value: &Decimal, limit: &str) -> bool {
    *value <= Decimal::from_str(limit).expect("reference decimal")
}

fn published(max_n: usize) -> CountTable {
    let mut t = CountTable::new("taxi_walks");
    t.insert(0, BigUint::from(1u32));
    for (i, &c) in TAXI_WALK_COUNTS.iter().take(max_n).enumerate() {
        t.insert(i + 1, BigUint::from(c));
    }
    t
}

fn walk_table_matches(suite: &Suite, max_n: usize, limit: Duration) -> Outcome {
    let start = Instant::now();
    let table = taxi_walk_table(max_n, suite.jobs).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    let diff = table.mismatches(&published(max_n));
    ensure(diff.is_empty(), || format!("mismatches {diff:?}"))?;
    ensure(elapsed <= limit, || format!("took {elapsed:?}, limit {limit:?}"))?;
    Ok(format!("c_{max_n} = {} with {} workers", table.get(max_n).unwrap(), suite.jobs))
}

fn subadditive(suite: &mut Suite) -> Outcome {
    let b = subadditive_upper_bound(&reference::taxi_walk_table(), 60, DEFAULT_PRECISION).map_err(|e| e.to_string())?;
    let best = b.best().clone();
    ensure(at_most(&best.value, reference::SUBADDITIVE_UPPER_60), || format!("mu < {}", best.value))?;
    ensure(at_most(&best.lambda_value, reference::SUBADDITIVE_LAMBDA_60), || {
        format!("lambda < {}", best.lambda_value)
    })?;
    let line = format!("mu < {}, lambda < {}", best.value, best.lambda_value);
    suite.reports.push(best);
    Ok(line)
}

fn bridges(suite: &mut Suite) -> Outcome {
    let b = bridge_table(40, suite.jobs).map_err(|e| e.to_string())?;
    let get = |n: usize| b.get(n).unwrap().clone();
    ensure(get(0) == BigUint::from(1u32) && get(1) == BigUint::from(1u32), || "b_0, b_1 != 1".into())?;
    for total in 0..=30 {
        for n in 0..=total {
            let m = total - n;
            ensure(get(total) >= get(n) * get(m), || format!("b_{total} < b_{n} b_{m}"))?;
        }
    }
    let c = published(40);
    for n in 1..=40 {
        ensure(&get(n) <= c.get(n).unwrap(), || format!("b_{n} > c_{n}"))?;
    }
    let report = bridge_lower_bound(&b, 40, DEFAULT_PRECISION).map_err(|e| e.to_string())?;
    let line = format!("b_40 = {}, mu > {}", get(40), report.value);
    suite.reports.push(report);
    Ok(line)
}

fn irreducible(suite: &mut Suite) -> Outcome {
    let order = 20;
    let b = bridge_table(2 * order, suite.jobs).map_err(|e| e.to_string())?;
    let a = irreducible_from_bridges(&b, 2 * order).map_err(|e| e.to_string())?;
    for n in 1..=order {
        let direct = enumerate_irreducible_bridges(n).map_err(|e| e.to_string())?;
        ensure(&direct == a.get(n).unwrap(), || format!("a_{n}: inversion {} vs enumeration {direct}", a.get(n).unwrap()))?;
    }
    // Counts are unsigned, so a negative coefficient would already have failed the inversion.
    let back = bridges_from_irreducible(&a, 2 * order).map_err(|e| e.to_string())?;
    let diff = back.mismatches(&b);
    ensure(diff.is_empty(), || format!("round trip differs at {diff:?}"))?;
    let root = irreducible_lower_bound(&a, 1e-12, DEFAULT_PRECISION).map_err(|e| e.to_string())?;
    let line = format!("a_1..a_{order} agree, round trip exact to order {}, mu > {}", 2 * order, root.report.value);
    suite.reports.push(root.report);
    Ok(line)
}

fn alm(suite: &mut Suite) -> Outcome {
    let c = published(40);
    let best_lower = suite.reports.iter().filter(|r| !r.is_upper()).map(|r| r.value.clone()).max();
    let ceiling = Decimal::from_str(reference::GOLDEN_RATIO_UPPER).unwrap();
    let mut lines = Vec::new();
    for (m, n) in [(1, 2), (2, 4), (4, 12), (8, 28)] {
        let matrix = build_transfer_matrix(m, n, suite.jobs).map_err(|e| e.to_string())?;
        ensure(&matrix.total() == c.get(n).unwrap(), || format!("A({m},{n}) totals {}", matrix.total()))?;
        let report = alm_upper_bound(m, n, suite.jobs, DEFAULT_PRECISION).map_err(|e| e.to_string())?;
        // A single-column window only certifies sqrt(c_2) = 2, weaker than the golden ratio.
        if m > 1 {
            ensure(report.value <= ceiling, || format!("A({m},{n}) bound {} above {ceiling}", report.value))?;
            if let Some(lo) = &best_lower {
                ensure(report.value >= *lo, || format!("A({m},{n}) bound {} below {lo}", report.value))?;
            }
        }
        lines.push(format!("({m},{n}) {}", report.value));
        suite.reports.push(report);
    }
    let matrix = build_transfer_matrix(2, 6, suite.jobs).map_err(|e| e.to_string())?;
    let perm: Vec<usize> = (0..matrix.dim()).rev().collect();
    let permuted = matrix.permuted(&perm).map_err(|e| e.to_string())?;
    let cfg = PowerIteration::default();
    let plain = alm_bound_from_matrix(&matrix, &cfg, 10).map_err(|e| e.to_string())?;
    let shuffled = alm_bound_from_matrix(&permuted, &cfg, 10).map_err(|e| e.to_string())?;
    ensure(plain.value == shuffled.value, || format!("(2,6) {} vs permuted {}", plain.value, shuffled.value))?;
    Ok(format!("totals equal c_n; bounds {}; (2,6) invariant at {}", lines.join(", "), plain.value))
}

fn random_mistakes(rng: &mut ChaCha8Rng) -> MistakeSet {
    let count = rng.gen_range(1..=4);
    let words: Vec<String> = (0..count)
        .map(|_| {
            let len = rng.gen_range(2..=6);
            (0..len).map(|_| if rng.gen_bool(0.5) { 's' } else { 't' }).collect()
        })
        .collect();
    MistakeSet::from_words(&words, "random").unwrap().reduced()
}

fn goulden_jackson(suite: &mut Suite) -> Outcome {
    let tt = MistakeSet::double_turn();
    let counts = avoiding_counts(&tt, 30);
    for (n, l) in counts.iter().enumerate() {
        ensure(*l == fibonacci(n + 2), || format!("l_{n} = {l}, expected f_{}", n + 2))?;
    }
    for n in 1..=16 {
        let brute = count_avoiding_brute(&tt, n).map_err(|e| e.to_string())?;
        ensure(counts[n] == BigUint::from(brute), || format!("l_{n} brute force {brute}"))?;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for trial in 0..20 {
        let m = random_mistakes(&mut rng);
        let gj = avoiding_counts_gj(&m, 24).map_err(|e| e.to_string())?;
        ensure(gj == avoiding_counts(&m, 24), || format!("engines disagree on random set {trial}"))?;
    }
    let polygons = enumerate_taxi_polygons(24, suite.jobs).map_err(|e| e.to_string())?;
    let oracle = brute_force_polygons(24);
    ensure(polygons.words().eq(oracle.words()), || {
        format!("{} polygons vs {} from closed-walk oracle", polygons.len(), oracle.len())
    })?;
    let taxi = MistakeSet::taxi(&polygons);
    let c = published(40);
    for n in 1..40 {
        let l = count_avoiding_words(&taxi, n);
        ensure(c.get(n + 1).unwrap() <= &(l.clone() * 2u32), || format!("c_{} > 2 l_{n}", n + 1))?;
    }
    let report = gj_bound_from_polygons(&polygons, 400, DEFAULT_PRECISION).map_err(|e| e.to_string())?;
    let line = format!("{} polygons up to 24, c_(n+1) <= 2 l_n for n < 40, mu < {}", polygons.len(), report.value);
    suite.reports.push(report);
    Ok(line)
}

fn consistency(suite: &mut Suite) -> Outcome {
    check_consistency(&suite.reports).map_err(|e| e.to_string())?;
    let upper = suite.reports.iter().filter(|r| r.is_upper()).map(|r| &r.value).min().unwrap();
    let lower = suite.reports.iter().filter(|r| !r.is_upper()).map(|r| &r.value).max().unwrap();
    Ok(format!("{} bounds, {lower} < mu < {upper}", suite.reports.len()))
}

fn contour(suite: &mut Suite) -> Outcome {
    let start = Instant::now();
    let report = sweep(3, 1, SweepMode::Exhaustive, suite.jobs).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    for name in CHECKS {
        let t = &report.checks[name];
        ensure(t.fail == 0, || format!("{name} failed {} times, e.g. {:?}", t.fail, report.counterexamples.first()))?;
    }
    ensure(elapsed <= Duration::from_secs(60), || format!("took {elapsed:?}"))?;
    Ok(format!("{} configurations, {} checks clean", report.configurations, CHECKS.len()))
}

fn tail(_: &mut Suite) -> Outcome {
    let mut cases = 0;
    for mu in [1.0, 1.2, 1.4, 1.5, 1.55, 1.58746] {
        for lambda in [1.0, 2.0, 4.0, 5.3506, 8.0, 12.0] {
            if mu * mu * mu * mu / (1.0 + lambda) > 0.99 {
                continue;
            }
            for m in 1..=40 {
                let t = peierls_tail(mu, lambda, m).map_err(|e| e.to_string())?;
                let rel = (t.tail - t.partial_sum).abs() / t.tail;
                ensure(rel <= 1e-12, || format!("mu={mu} lambda={lambda} m={m}: relative gap {rel:e}"))?;
                cases += 1;
            }
        }
    }
    // mu = 1, lambda = 1 gives r = 1/2 and tail 2^(1 - L).
    for (m, start, value) in [(1, 1, 1.0), (2, 2, 0.5), (3, 3, 0.25), (4, 3, 0.25), (5, 4, 0.125), (10, 8, 1.0 / 128.0)] {
        let t = peierls_tail(1.0, 1.0, m).map_err(|e| e.to_string())?;
        ensure(tail_start(m) == start && t.start == start, || format!("m={m}: L = {}", t.start))?;
        ensure(t.tail == value, || format!("m={m}: tail {} expected {value}", t.tail))?;
    }
    Ok(format!("{cases} grid cases within 1e-12, r = 1/2 exact"))
}

fn extended_walks(suite: &mut Suite) -> Outcome {
    walk_table_matches(suite, 60, Duration::MAX)
}

fn extended_bridges(suite: &mut Suite) -> Outcome {
    let b = bridge_table(60, suite.jobs).map_err(|e| e.to_string())?;
    let b60 = b.get(60).unwrap().clone();
    ensure(b60 == BigUint::from(reference::BRIDGES_60), || format!("b_60 = {b60}"))?;
    let a = irreducible_from_bridges(&b, 60).map_err(|e| e.to_string())?;
    let root = irreducible_lower_bound(&a, 1e-12, DEFAULT_PRECISION).map_err(|e| e.to_string())?;
    let (mu, lambda) = (root.report.value.to_string(), root.report.lambda_value.to_string());
    ensure(mu == reference::IRREDUCIBLE_LOWER_60 && lambda == reference::IRREDUCIBLE_LAMBDA_60, || {
        format!("irreducible mu > {mu}, lambda > {lambda}")
    })?;
    Ok(format!("b_60 = {b60}, mu > {mu}, lambda > {lambda}"))
}

fn extended_alm(suite: &mut Suite) -> Outcome {
    let report = alm_upper_bound(20, 60, suite.jobs, DEFAULT_PRECISION).map_err(|e| e.to_string())?;
    ensure(at_most(&report.value, reference::ALM_UPPER_20_60), || format!("A(20,60) mu < {}", report.value))?;
    Ok(format!("A(20,60) mu < {}", report.value))
}

fn extended_polygons(suite: &mut Suite) -> Outcome {
    let polygons = enumerate_taxi_polygons(48, suite.jobs).map_err(|e| e.to_string())?;
    let le44 = polygons.truncated(44);
    ensure(le44.len() == reference::POLYGONS_UP_TO_44, || format!("{} polygons up to 44", le44.len()))?;
    let report = gj_bound_from_polygons(&le44, 802, DEFAULT_PRECISION).map_err(|e| e.to_string())?;
    ensure(at_most(&report.value, reference::GJ_UPPER_802), || format!("l_802 mu < {}", report.value))?;
    ensure(at_most(&report.lambda_value, reference::GJ_LAMBDA_802), || format!("lambda < {}", report.lambda_value))?;
    ensure(polygons.len() == reference::POLYGONS_UP_TO_48, || {
        format!("{} polygons up to 48, published {}", polygons.len(), reference::POLYGONS_UP_TO_48)
    })?;
    Ok(format!("{} and {} polygons, mu < {}", le44.len(), polygons.len(), report.value))
}

fn main() {
    let mut suite = Suite::new();
    suite.run("table1_walk_counts_to_40", |s| walk_table_matches(s, 40, Duration::from_secs(300)));
    suite.run("subadditive_bound_60", subadditive);
    suite.run("bridges", bridges);
    suite.run("irreducible_bridges", irreducible);
    suite.run("alm_transfer_matrix", alm);
    suite.run("goulden_jackson", goulden_jackson);
    suite.run("cross_method_consistency", consistency);
    suite.run("contour_lab_n3_m1_exhaustive", contour);
    suite.run("peierls_tail", tail);
    suite.extended("extended_walk_counts_to_60", extended_walks);
    suite.extended("extended_bridges_60", extended_bridges);
    suite.extended("extended_alm_20_60", extended_alm);
    suite.extended("extended_polygons_and_l802", extended_polygons);
    if !suite.failed.is_empty() {
        eprintln!("failed: {:?}", suite.failed);
        std::process::exit(1);
    }
}
