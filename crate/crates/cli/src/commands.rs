use std::time::Instant;

use clap::ValueEnum;
use num_bigint::BigUint;
use serde_json::{json, Value};
use taxiwalk::almbound::{self, PowerIteration};
use taxiwalk::bounds::check_consistency;
use taxiwalk::bridgecount::{self, bridge_lower_bound, irreducible_from_bridges, irreducible_lower_bound};
use taxiwalk::contourlab::{self, SweepMode};
use taxiwalk::gjbound::{self, MistakeSet, PolygonSet};
use taxiwalk::walkcount::{count_taxi_walks, subadditive_upper_bound};
use taxiwalk::{reference, BoundReport, CountTable};

use crate::cache::Cache;
use crate::error::{CliError, CliResult};
use crate::output::Output;

/// Settings shared by every subcommand.
pub struct Ctx {
    pub jobs: usize,
    pub precision: u32,
    pub cache: Cache,
    pub long_run: bool,
}

impl Ctx {
    pub fn validate(&self) -> CliResult<()> {
        if self.jobs == 0 {
            return Err(CliError::Usage("--jobs must be at least 1".into()));
        }
        if !(3..=60).contains(&self.precision) {
            return Err(CliError::Usage("--precision must lie in 3..=60".into()));
        }
        Ok(())
    }

    /// Prints the cost banner for expensive work and refuses it without `--long-run`.
    pub fn gate(&self, what: &str, estimate: Option<String>) -> CliResult<()> {
        let Some(cost) = estimate else { return Ok(()) };
        eprintln!("long run: {what}; estimated cost {cost} with {} job(s)", self.jobs);
        if self.long_run {
            Ok(())
        } else {
            Err(CliError::NeedsLongRun(what.to_string()))
        }
    }
}

fn human_seconds(s: f64) -> String {
    if s < 120.0 {
        format!("~{s:.0} s")
    } else if s < 7200.0 {
        format!("~{:.0} min", s / 60.0)
    } else {
        format!("~{:.1} h", s / 3600.0)
    }
}

/// Rough single-core throughput of the walk enumerator.
const WALKS_PER_SECOND: f64 = 3.0e7;

fn enumeration_cost(n: usize, jobs: usize) -> Option<String> {
    (n > 44).then(|| {
        let walks = 1.5874f64.powi(n as i32) * 1.5;
        human_seconds(walks / WALKS_PER_SECOND / jobs as f64)
    })
}

fn table_rows(t: &CountTable, from: usize, to: usize) -> (Vec<Value>, String, String) {
    let mut rows = Vec::new();
    let mut text = String::new();
    let mut csv = String::from("n,count\n");
    for (n, v) in t.iter().filter(|(n, _)| (from..=to).contains(n)) {
        rows.push(json!({ "n": n, "count": v.to_string() }));
        text.push_str(&format!("{n:>3}  {v}\n"));
        csv.push_str(&format!("{n},{v}\n"));
    }
    (rows, text, csv)
}

fn report_text(r: &BoundReport) -> String {
    let dir = if r.is_upper() { "<" } else { ">" };
    let params: Vec<String> = r.parameters.iter().map(|(k, v)| format!("{k}={v}")).collect();
    format!(
        "{:<20} mu {dir} {}   lambda {dir} {}   ({})\n",
        r.method,
        r.value,
        r.lambda_value,
        params.join(", ")
    )
}

/// Compares freshly computed values against the cached table and the
/// published counts; any disagreement is a violation.
fn verify_walks(fresh: &CountTable, cached: Option<&CountTable>) -> CliResult<()> {
    let published = reference::taxi_walk_table();
    for (label, other) in [("published table", Some(&published)), ("cached table", cached)] {
        let Some(other) = other else { continue };
        if let Some((n, a, b)) = fresh.mismatches(other).into_iter().next() {
            return Err(CliError::Violation(format!("c_{n} = {a} disagrees with the {label} value {b}")));
        }
    }
    Ok(())
}

pub fn walks_table(ctx: &Ctx, max_n: usize) -> CliResult<Output> {
    if max_n == 0 {
        return Err(CliError::Usage("--max-n must be at least 1".into()));
    }
    ctx.gate(&format!("enumerating taxi walks up to n = {max_n}"), enumeration_cost(max_n, ctx.jobs))?;
    let cached = ctx.cache.load_table("taxi_walks")?;
    let mut fresh = CountTable::new("taxi_walks");
    for n in 0..=max_n {
        fresh.insert(n, count_taxi_walks(n, ctx.jobs)?);
    }
    verify_walks(&fresh, cached.as_ref())?;
    let mut merged = fresh.clone();
    if let Some(c) = &cached {
        merged.merge_missing(c);
    }
    let path = ctx.cache.save_table(&merged, "taxi_walks")?;
    let (rows, text, csv) = table_rows(&fresh, 1, max_n);
    Ok(Output::new(
        "walks table",
        json!({ "max_n": max_n, "rows": rows, "cache": path.display().to_string() }),
        text,
    )
    .with_csv(csv))
}

/// Cached counts, topped up with the published table.
fn walk_counts(ctx: &Ctx) -> CliResult<CountTable> {
    let published = reference::taxi_walk_table();
    let Some(mut t) = ctx.cache.load_table("taxi_walks")? else { return Ok(published) };
    verify_walks(&t, None)?;
    if let Some((n, a, b)) = t.mismatches(&published).into_iter().next() {
        return Err(CliError::Violation(format!("cached c_{n} = {a} disagrees with the published {b}")));
    }
    t.merge_missing(&published);
    Ok(t)
}

pub fn walks_bound(ctx: &Ctx, n: usize) -> CliResult<Output> {
    let table = walk_counts(ctx)?;
    let b = subadditive_upper_bound(&table, n, ctx.precision)?;
    let mut reports = vec![b.plain.clone()];
    reports.extend(b.shifted.clone());
    let text: String = reports.iter().map(report_text).collect();
    Ok(Output::new("walks bound", json!({ "bounds": reports, "best": b.best() }), text))
}

fn bridge_table(ctx: &Ctx, max_n: usize) -> CliResult<CountTable> {
    let cached = ctx.cache.load_table("bridges")?;
    if let Some(c) = &cached {
        if (0..=max_n).all(|n| c.contains(n)) {
            return Ok(c.clone());
        }
    }
    let mut fresh = CountTable::new("bridges");
    for n in 0..=max_n {
        let value = match cached.as_ref().and_then(|c| c.get(n).ok()) {
            Some(v) => v.clone(),
            None => bridgecount::count_bridges(n, ctx.jobs)?,
        };
        fresh.insert(n, value);
    }
    if max_n >= 60 && fresh.get(60)? != &BigUint::from(reference::BRIDGES_60) {
        return Err(CliError::Violation(format!("b_60 = {} disagrees with the published value", fresh.get(60)?)));
    }
    let walks = reference::taxi_walk_table();
    for (n, b) in fresh.iter() {
        if let Ok(c) = walks.get(n) {
            if b > c {
                return Err(CliError::Violation(format!("b_{n} = {b} exceeds c_{n} = {c}")));
            }
        }
    }
    if let Some(c) = &cached {
        fresh.merge_missing(c);
    }
    ctx.cache.save_table(&fresh, "bridges")?;
    Ok(fresh)
}

pub fn bridges_table(ctx: &Ctx, max_n: usize) -> CliResult<Output> {
    ctx.gate(&format!("enumerating bridges up to n = {max_n}"), enumeration_cost(max_n, ctx.jobs))?;
    let t = bridge_table(ctx, max_n)?;
    let (rows, text, csv) = table_rows(&t, 0, max_n);
    let mut out = Output::new("bridges table", json!({ "max_n": max_n, "rows": rows }), text).with_csv(csv);
    if max_n >= 1 {
        let r = bridge_lower_bound(&t, max_n, ctx.precision)?;
        out.text.push_str(&report_text(&r));
        out.body.insert("bound".into(), serde_json::to_value(&r)?);
    }
    Ok(out)
}

pub fn bridges_irreducible(ctx: &Ctx, order: usize, tolerance: f64) -> CliResult<Output> {
    ctx.gate(&format!("enumerating bridges up to n = {order}"), enumeration_cost(order, ctx.jobs))?;
    let bridges = bridge_table(ctx, order)?;
    let a = irreducible_from_bridges(&bridges, order)?;
    let root = irreducible_lower_bound(&a, tolerance, ctx.precision)?;
    let (rows, mut text, csv) = table_rows(&a, 1, order);
    text.push_str(&report_text(&root.report));
    Ok(Output::new(
        "bridges irreducible",
        json!({ "order": order, "irreducible": rows, "bound": root.report }),
        text,
    )
    .with_csv(csv))
}

pub fn alm(ctx: &Ctx, m: usize, n: usize, save_matrix: bool) -> CliResult<Output> {
    let estimate = (n > 40 || m > 14).then(|| enumeration_cost(n.max(45), ctx.jobs).unwrap_or_default());
    ctx.gate(&format!("Alm transfer matrix A({m},{n})"), estimate)?;
    let started = Instant::now();
    let matrix = almbound::build_transfer_matrix(m, n, ctx.jobs)?;
    if n <= 60 {
        let c_n = reference::taxi_walk_table().get(n)?.clone();
        if matrix.total() != c_n {
            return Err(CliError::Violation(format!("matrix entries sum to {} but c_{n} = {c_n}", matrix.total())));
        }
    }
    let saved = if save_matrix {
        ctx.cache.prepare()?;
        let path = ctx.cache.path(&format!("alm_m{m}_n{n}.csv"));
        matrix.save_csv(&path)?;
        Some(path.display().to_string())
    } else {
        None
    };
    let report = almbound::alm_bound_from_matrix(&matrix, &PowerIteration::default(), ctx.precision)?;
    let text = report_text(&report);
    Ok(Output::new(
        "alm",
        json!({
            "m": m,
            "n": n,
            "dim": matrix.dim(),
            "nonzeros": matrix.nonzeros(),
            "total": matrix.total().to_string(),
            "matrix_csv": saved,
            "seconds": started.elapsed().as_secs_f64(),
            "bound": report,
        }),
        text,
    )
    .with_csv(matrix.to_csv()))
}

fn polygons(ctx: &Ctx, max_len: usize) -> CliResult<PolygonSet> {
    if let Some(p) = ctx.cache.load_polygons(max_len)? {
        return Ok(p);
    }
    let p = gjbound::enumerate_taxi_polygons(max_len, ctx.jobs)?;
    if max_len == 44 && p.len() != reference::POLYGONS_UP_TO_44 {
        return Err(CliError::Violation(format!("{} polygons of length <= 44, expected {}", p.len(), reference::POLYGONS_UP_TO_44)));
    }
    ctx.cache.save_polygons(&p)?;
    Ok(p)
}

fn polygon_cost(max_len: usize, jobs: usize) -> Option<String> {
    (max_len > 44).then(|| human_seconds(10.0 * 5.5f64.powf((max_len as f64 - 48.0) / 4.0) / jobs as f64))
}

pub fn gj_polygons(ctx: &Ctx, max_len: usize) -> CliResult<Output> {
    ctx.gate(&format!("enumerating taxi polygons up to length {max_len}"), polygon_cost(max_len, ctx.jobs))?;
    let p = polygons(ctx, max_len)?;
    let by_len = p.count_by_length();
    let mut text = String::new();
    let mut csv = String::from("length,count\n");
    for (l, c) in &by_len {
        text.push_str(&format!("{l:>3}  {c}\n"));
        csv.push_str(&format!("{l},{c}\n"));
    }
    text.push_str(&format!("total {}\n", p.len()));
    let by_len: serde_json::Map<String, Value> = by_len.iter().map(|(l, c)| (l.to_string(), json!(c))).collect();
    Ok(Output::new(
        "gj polygons",
        json!({ "max_len": max_len, "total": p.len(), "by_length": by_len }),
        text,
    )
    .with_csv(csv))
}

fn automaton_cost(polygon_max: usize, n: usize, jobs: usize) -> Option<String> {
    (polygon_max > 40 || n > 1000).then(|| {
        let states = 10.0 * 5.5f64.powf((polygon_max as f64 - 20.0) / 4.0);
        human_seconds(states * n as f64 * (n as f64 / 64.0 + 1.0) * 1.0e-8 + polygon_cost(polygon_max, jobs).map_or(0.0, |_| 60.0))
    })
}

pub fn gj_count(ctx: &Ctx, polygon_max: usize, n: usize) -> CliResult<Output> {
    ctx.gate(&format!("counting words avoiding polygons <= {polygon_max} to n = {n}"), automaton_cost(polygon_max, n, ctx.jobs))?;
    let p = polygons(ctx, polygon_max)?;
    let m = MistakeSet::taxi(&p);
    let l_n = gjbound::count_avoiding_words(&m, n);
    let text = format!("l_{n} = {l_n}\n");
    Ok(Output::new(
        "gj count",
        json!({ "polygon_max": polygon_max, "n": n, "mistakes": m.len(), "l_n": l_n.to_string() }),
        text,
    ))
}

pub fn gj_bound(ctx: &Ctx, polygon_max: usize, n: usize) -> CliResult<Output> {
    ctx.gate(&format!("Goulden-Jackson bound with polygons <= {polygon_max} at n = {n}"), automaton_cost(polygon_max, n, ctx.jobs))?;
    let p = polygons(ctx, polygon_max)?;
    let r = gjbound::gj_bound_from_polygons(&p, n, ctx.precision)?;
    Ok(Output::new("gj bound", json!({ "bound": r }), report_text(&r)))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Preset {
    /// Minutes on a laptop.
    Desk,
    /// The published headline bounds; needs --long-run.
    Extended,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Method {
    Subadditive,
    Bridge,
    Irreducible,
    Alm,
    Gj,
}

struct PresetParams {
    walks_n: usize,
    bridges_n: usize,
    alm: (usize, usize),
    gj: (usize, usize),
}

impl Preset {
    fn params(self) -> PresetParams {
        match self {
            Preset::Desk => PresetParams { walks_n: 60, bridges_n: 30, alm: (8, 28), gj: (28, 400) },
            Preset::Extended => PresetParams { walks_n: 60, bridges_n: 60, alm: (20, 60), gj: (44, 802) },
        }
    }
}

pub fn bounds_summary(ctx: &Ctx, preset: Preset, methods: &[Method]) -> CliResult<Output> {
    if methods.is_empty() {
        return Err(CliError::Usage("--methods needs at least one method".into()));
    }
    let p = preset.params();
    if preset == Preset::Extended {
        ctx.gate("extended bound summary", Some("several days for bridges and A(20,60); ~20 min for the Goulden-Jackson bound".into()))?;
    }
    let mut reports: Vec<BoundReport> = Vec::new();
    let mut timings = serde_json::Map::new();
    for &method in methods {
        let started = Instant::now();
        match method {
            Method::Subadditive => {
                let table = walk_counts(ctx)?;
                reports.push(subadditive_upper_bound(&table, p.walks_n, ctx.precision)?.plain);
            }
            Method::Bridge => {
                let b = bridge_table(ctx, p.bridges_n)?;
                reports.push(bridge_lower_bound(&b, p.bridges_n, ctx.precision)?);
            }
            Method::Irreducible => {
                let b = bridge_table(ctx, p.bridges_n)?;
                let a = irreducible_from_bridges(&b, p.bridges_n)?;
                reports.push(irreducible_lower_bound(&a, 1e-12, ctx.precision)?.report);
            }
            Method::Alm => reports.push(almbound::alm_upper_bound(p.alm.0, p.alm.1, ctx.jobs, ctx.precision)?),
            Method::Gj => {
                let polys = polygons(ctx, p.gj.0)?;
                reports.push(gjbound::gj_bound_from_polygons(&polys, p.gj.1, ctx.precision)?);
            }
        }
        timings.insert(format!("{method:?}").to_lowercase(), json!(started.elapsed().as_secs_f64()));
    }
    let mut text: String = reports.iter().map(report_text).collect();
    if let Err(e) = check_consistency(&reports) {
        eprintln!("bound reports at the failure:\n{text}");
        return Err(CliError::Violation(e.to_string()));
    }
    let upper = reports.iter().filter(|r| r.is_upper()).min_by(|a, b| a.value.cmp(&b.value));
    let lower = reports.iter().filter(|r| !r.is_upper()).max_by(|a, b| a.value.cmp(&b.value));
    let window = json!({
        "mu_lower": lower.map(|r| r.value.to_string()),
        "mu_upper": upper.map(|r| r.value.to_string()),
        "lambda_lower": lower.map(|r| r.lambda_value.to_string()),
        "lambda_upper": upper.map(|r| r.lambda_value.to_string()),
    });
    let show = |r: Option<&BoundReport>, f: fn(&BoundReport) -> String| r.map_or("-".to_string(), f);
    text.push_str(&format!(
        "window: {} < mu < {}, {} < lambda < {}\n",
        show(lower, |r| r.value.to_string()),
        show(upper, |r| r.value.to_string()),
        show(lower, |r| r.lambda_value.to_string()),
        show(upper, |r| r.lambda_value.to_string()),
    ));
    Ok(Output::new(
        "bounds summary",
        json!({
            "preset": format!("{preset:?}").to_lowercase(),
            "bounds": reports,
            "window": window,
            "consistent": true,
            "seconds": timings,
        }),
        text,
    ))
}

pub fn contour_check(ctx: &Ctx, n: usize, m: usize, exhaustive: bool, samples: usize, seed: u64) -> CliResult<Output> {
    if m < 1 || n <= m {
        return Err(CliError::Usage(format!("need n > m >= 1, got n = {n}, m = {m}")));
    }
    if n > contourlab::MAX_RADIUS {
        return Err(CliError::Usage(format!("n is limited to {}", contourlab::MAX_RADIUS)));
    }
    let mode = if exhaustive {
        SweepMode::Exhaustive
    } else {
        if samples == 0 {
            return Err(CliError::Usage("--samples must be at least 1".into()));
        }
        SweepMode::Sampled { samples, seed }
    };
    if exhaustive {
        let total = contourlab::count_configurations(n, m)?;
        let estimate = (total > 20_000_000).then(|| human_seconds(total as f64 * 8e-6 / ctx.jobs as f64));
        ctx.gate(&format!("exhaustive sweep over {total} configurations"), estimate)?;
    }
    let report = contourlab::sweep(n, m, mode, ctx.jobs)?;
    let body = serde_json::to_value(&report)?;
    let mut out = Output::new("contour check", body, String::new());
    out.text = out.render(crate::output::Format::Json)?;
    if !report.all_passed() {
        print!("{}", out.text);
        let failing: Vec<&String> = report.checks.iter().filter(|(_, t)| t.fail > 0).map(|(k, _)| k).collect();
        return Err(CliError::Violation(format!("checks failed: {failing:?}")));
    }
    Ok(out)
}

pub fn contour_tail(mu: f64, lambda: f64, m: usize) -> CliResult<Output> {
    if m == 0 {
        return Err(CliError::Usage("--m must be at least 1".into()));
    }
    let r = contourlab::peierls_tail(mu, lambda, m)?;
    let text = format!(
        "r = {:.12}\nL = {}\ntail = {:.6e}\npartial sum = {:.6e}\nbelow 1/3: {}\nminimal m: {}\n",
        r.ratio, r.start, r.tail, r.partial_sum, r.below_third, r.minimal_m
    );
    Ok(Output::new("contour tail", serde_json::to_value(&r)?, text))
}
