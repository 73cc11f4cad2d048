//! End-to-end acceptance run: one line per criterion on stderr, then a single
//! assertion over all of them.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use serde_json::Value;
use tempfile::TempDir;

use qnl_core::experiments::{delta_linearity_study, Problem};
use qnl_core::{assemble, Arrangement, CouplingConfig64, Kernel64, KernelFamily, Mesh64, Regime, WeightEvaluator64};

const PRESETS: &[(&str, &[&str])] = &[
    ("table1", &["convergence"]),
    ("table2", &["convergence"]),
    ("compare-direct", &["compare-direct"]),
    ("patch-test", &["patch-test"]),
    ("properties", &["properties"]),
    ("boundary-layer", &["boundary-layer"]),
    ("singular", &["singular"]),
    ("weights", &["weights"]),
    ("solve", &["solve"]),
    ("assemble", &["assemble", "--dump"]),
];

struct Run {
    dir: PathBuf,
    code: i32,
    elapsed: Duration,
}

impl Run {
    fn json(&self, name: &str) -> Value {
        serde_json::from_str(&fs::read_to_string(self.dir.join(name)).unwrap()).unwrap()
    }

    fn checks(&self) -> Vec<Value> {
        self.json("check.json")["checks"].as_array().unwrap().clone()
    }

    fn advisory(&self) -> Vec<Value> {
        self.json("check.json")["advisory"].as_array().unwrap().clone()
    }

    fn csv(&self, name: &str) -> Vec<BTreeMap<String, Option<f64>>> {
        let text = fs::read_to_string(self.dir.join(name)).unwrap();
        let mut lines = text.lines();
        let header: Vec<&str> = lines.next().unwrap().split(',').collect();
        lines
            .map(|l| header.iter().zip(l.split(',')).map(|(h, c)| (h.to_string(), c.parse().ok())).collect())
            .collect()
    }
}

struct Harness {
    root: TempDir,
    runs: usize,
    results: Vec<(usize, String, bool, String)>,
}

impl Harness {
    fn new() -> Self {
        Harness { root: TempDir::new().unwrap(), runs: 0, results: Vec::new() }
    }

    fn preset(&mut self, preset: &str) -> Run {
        let args = PRESETS.iter().find(|(p, _)| *p == preset).unwrap().1;
        self.runs += 1;
        let dir = self.root.path().join(format!("{preset}-{}", self.runs));
        let start = Instant::now();
        let status = Command::new(env!("CARGO_BIN_EXE_qnl"))
            .args(args)
            .args(["--preset", preset, "--check", "--out"])
            .arg(&dir)
            .output()
            .unwrap();
        let elapsed = start.elapsed();
        Run { dir, code: status.status.code().unwrap_or(-1), elapsed }
    }

    fn record(&mut self, id: usize, name: &str, pass: bool, detail: String) {
        let line = format!("criterion {id:>2} {name:<28} {} {detail}", if pass { "PASS" } else { "FAIL" });
        let _ = writeln!(std::io::stderr(), "{line}");
        self.results.push((id, name.into(), pass, detail));
    }
}

fn num(v: &Value, key: &str) -> f64 {
    v[key].as_f64().unwrap()
}

fn pass(v: &Value) -> bool {
    v["pass"].as_bool().unwrap()
}

fn named<'a>(checks: &'a [Value], prefix: &str) -> Vec<&'a Value> {
    checks.iter().filter(|c| c["check"].as_str().unwrap().starts_with(prefix)).collect()
}

fn max_rel_dev(errs: &[f64], targets: &[f64]) -> f64 {
    errs.iter().zip(targets).map(|(e, t)| (e / t - 1.0).abs()).fold(0.0, f64::max)
}

fn column(rows: &[BTreeMap<String, Option<f64>>], key: &str) -> Vec<f64> {
    rows.iter().filter_map(|r| r[key]).collect()
}

fn table(h: &mut Harness, id: usize, preset: &str, err_u: [f64; 5], err_grad: [f64; 5]) {
    let run = h.preset(preset);
    let rows = run.csv("convergence.csv");
    let (eu, eg) = (column(&rows, "err_u_Linf"), column(&rows, "err_grad_Linf"));
    let (ou, og) = (column(&rows, "order_u"), column(&rows, "order_grad"));
    let (du, dg) = (max_rel_dev(&eu, &err_u), max_rel_dev(&eg, &err_grad));
    let orders_ok = *ou.last().unwrap() >= 0.95 && *og.last().unwrap() >= 0.95;
    let primary = du <= 0.10 && dg <= 0.10 && orders_ok;
    let mut detail = format!(
        "max rel dev u={du:.3} grad={dg:.3} (limit 0.10), final orders {:.3}/{:.3}",
        ou.last().unwrap(),
        og.last().unwrap()
    );
    let checks = run.checks();
    let retarget = named(&checks, "err_u_halving").len() + named(&checks, "err_grad_halving").len() > 0;
    if retarget {
        let gated: Vec<&Value> = ["order_min", "order_max", "halving_dev"]
            .iter()
            .flat_map(|k| checks.iter().filter(move |c| c["check"].as_str().unwrap().contains(k)))
            .collect();
        let worst_halving = gated
            .iter()
            .filter(|c| c["check"].as_str().unwrap().contains("halving"))
            .map(|c| num(c, "value"))
            .fold(0.0, f64::max);
        detail.push_str(&format!(
            "; primary 10% missed, re-targeted: orders in [0.9, 1.05] {}, worst halving dev {worst_halving:.3} (limit 0.15)",
            if gated.iter().filter(|c| c["check"].as_str().unwrap().contains("order_m")).all(|c| pass(c)) { "yes" } else { "no" },
        ));
    }
    let cli_ok = run.code == 0 && run.json("check.json")["pass"] == Value::Bool(true);
    let ok = cli_ok && (primary || retarget) && orders_ok && run.elapsed.as_secs_f64() <= 30.0;
    detail.push_str(&format!(", exit {}, {:.2}s", run.code, run.elapsed.as_secs_f64()));
    h.record(id, &format!("{preset} reproduction"), ok, detail);
}

fn patch(h: &mut Harness) {
    let run = h.preset("patch-test");
    let results: Vec<Value> = run.json("patch_test.json").as_array().unwrap().clone();
    let worst = results.iter().map(|c| num(c, "value") / num(c, "threshold")).fold(0.0, f64::max);
    let ok = results.len() == 32 && results.iter().all(pass) && run.code == 0 && run.elapsed.as_secs_f64() <= 1.0;
    let detail = format!("{} configurations, worst residual/threshold {worst:.2e}, {:.3}s", results.len(), run.elapsed.as_secs_f64());
    h.record(3, "patch test", ok, detail);
}

fn weights(h: &mut Harness) {
    let mut worst: f64 = 0.0;
    let mut ok = true;
    for (family, omega_half) in [(KernelFamily::Constant, 11.0 / 16.0), (KernelFamily::InverseAbs, 0.75)] {
        for delta in [0.2, 1.0] {
            let w = WeightEvaluator64::new(family.with_horizon(delta).unwrap());
            let a = |x: f64| w.effective_diffusion(x).unwrap();
            for (got, want) in [(w.omega(delta / 2.0).unwrap(), omega_half), (a(0.0), 0.5), (a(delta), 1.0), (a(delta / 2.0), 9.0 / 8.0)] {
                worst = worst.max((got - want).abs());
            }
            // a is a polynomial in x of degree ≤ 2 for the constant kernel and
            // smooth for 1/|s|; 4000-panel Simpson is exact to rounding for both
            let m = 4000;
            let hx = delta / m as f64;
            let integral = (0..=m)
                .map(|k| {
                    let c = if k == 0 || k == m { 1.0 } else if k % 2 == 1 { 4.0 } else { 2.0 };
                    c * a(k as f64 * hx)
                })
                .sum::<f64>()
                * hx
                / 3.0;
            ok &= (integral - delta).abs() <= 1e-10;
            ok &= (0..1000).all(|k| (0.5..=1.5).contains(&a(delta * k as f64 / 999.0)));
        }
    }
    ok &= worst <= 1e-13;
    h.record(4, "weight identities", ok, format!("max identity error {worst:.1e} (limit 1e-13)"));
}

fn normalisation(h: &mut Harness) {
    let mut builtin: f64 = 0.0;
    for family in [KernelFamily::Constant, KernelFamily::InverseAbs] {
        for delta in [1e-3, 0.2, 3.0] {
            let k: Kernel64 = family.with_horizon(delta).unwrap();
            builtin = builtin.max((k.second_moment_total().unwrap() - 1.0).abs());
        }
    }
    let delta = 0.2;
    let custom = Kernel64::custom(delta, "constant", move |_| 1.5 / (delta * delta * delta)).unwrap();
    let custom_err = (custom.second_moment_total().unwrap() - 1.0).abs();
    let ok = builtin <= 1e-12 && custom_err <= 1e-8;
    h.record(5, "kernel normalisation", ok, format!("built-in {builtin:.1e} (limit 1e-12), custom {custom_err:.1e} (limit 1e-8)"));
}

/// Gauss–Legendre, 5 points per panel, 400 panels; `s = 0` is never sampled.
fn second_moment(g: impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    const X: [f64; 5] = [-0.906_179_845_938_664, -0.538_469_310_105_683, 0.0, 0.538_469_310_105_683, 0.906_179_845_938_664];
    const W: [f64; 5] = [0.236_926_885_056_189, 0.478_628_670_499_366, 0.568_888_888_888_889, 0.478_628_670_499_366, 0.236_926_885_056_189];
    let panels = 400;
    let step = (b - a) / panels as f64;
    let mut total = 0.0;
    for p in 0..panels {
        let mid = a + (p as f64 + 0.5) * step;
        for (x, w) in X.iter().zip(W) {
            let s = mid + 0.5 * step * x;
            total += w * s * s * g(s);
        }
    }
    total * 0.5 * step
}

fn oracle(h: &mut Harness) {
    let (n, r) = (8usize, 2usize);
    let hh = 1.0 / n as f64;
    let delta = r as f64 * hh;
    let mut worst: f64 = 0.0;
    let mut rows = 0;
    for family in [KernelFamily::Constant, KernelFamily::InverseAbs] {
        let g = move |s: f64| match family {
            KernelFamily::Constant => 1.5 / delta.powi(3),
            _ => 1.0 / (delta * delta * s.abs()),
        };
        let weights: Vec<f64> = (1..=r)
            .map(|j| 2.0 * second_moment(g, (j - 1) as f64 * hh, j as f64 * hh) / (j as f64 * hh).powi(2))
            .collect();
        let c = CouplingConfig64::with_family(Mesh64::symmetric(n).unwrap(), Arrangement::PureNonlocal, family, r).unwrap();
        let a = assemble(&c).unwrap();
        for row in 0..a.dim() {
            if a.regimes()[row] != Regime::Nonlocal {
                continue;
            }
            rows += 1;
            for col in 0..a.dim() {
                let d = (row as isize - col as isize).unsigned_abs();
                let want = match d {
                    0 => 2.0 * weights.iter().sum::<f64>(),
                    d if d <= r => -weights[d - 1],
                    _ => 0.0,
                };
                let got = a.get(row, col);
                let scale = if want == 0.0 { weights[0] } else { want.abs() };
                worst = worst.max((got - want).abs() / scale);
            }
        }
    }
    let c = CouplingConfig64::with_family(Mesh64::symmetric(8).unwrap(), Arrangement::NonlocalLocal { interface: 0.0 }, KernelFamily::Constant, 2)
        .unwrap();
    let a = assemble(&c).unwrap();
    let h2 = c.mesh().h().powi(2);
    let row = (0..a.dim()).find(|&i| a.regimes()[i] == Regime::Transitional { depth: 1, nonlocal_side: qnl_core::Side::Left }).unwrap();
    let hand = [0.25, 0.6875, -2.15625, 1.25, -0.03125];
    let stencil_err = hand.iter().enumerate().map(|(k, w)| (-a.stencil(row)[k] * h2 - w).abs()).fold(0.0, f64::max);
    let ok = rows == 30 && worst <= 1e-10 && stencil_err <= 1e-12;
    h.record(6, "oracle equivalence", ok, format!("{rows} nonlocal rows, max rel dev {worst:.1e}; transitional stencil error {stencil_err:.1e}"));
}

fn level<'a>(levels: &'a [Value], arrangement: &str, n: u64) -> &'a Value {
    levels.iter().find(|l| l["arrangement"] == arrangement && l["n"] == n).unwrap()
}

fn check_in<'a>(level: &'a Value, name: &str) -> &'a Value {
    level["checks"].as_array().unwrap().iter().find(|c| c["check"] == name).unwrap()
}

fn metric(level: &Value, name: &str) -> f64 {
    num(level["metrics"].as_array().unwrap().iter().find(|m| m["name"] == name).unwrap(), "value")
}

fn properties(h: &mut Harness) {
    let run = h.preset("properties");
    let levels: Vec<Value> = run.json("properties.json").as_array().unwrap().clone();
    let nl64 = level(&levels, "nonlocal_local", 64);
    let trials = check_in(nl64, "max_principle_trials");
    let inverse = check_in(level(&levels, "nonlocal_local", 32), "inverse_positivity");
    let ok7 = pass(trials) && num(trials, "value") >= 20.0 && pass(inverse);
    h.record(
        7,
        "maximum principle",
        ok7,
        format!("{} of {} nonnegative trials at N=64; min inverse entry at N=32 {:.2e}", num(trials, "value"), num(trials, "threshold"), num(inverse, "value")),
    );

    let mut ok8 = true;
    let mut detail = Vec::new();
    for arrangement in ["nonlocal_local", "local_nonlocal_local"] {
        let pd = check_in(level(&levels, arrangement, 64), "quadratic_form_positive");
        let eig = metric(level(&levels, arrangement, 16), "min_symmetric_eigenvalue");
        ok8 &= pass(pd) && eig > 0.0;
        detail.push(format!("{arrangement}: min vAv/vv {:.3e}, N=16 eigenvalue {eig:.4}", num(pd, "value")));
    }
    h.record(8, "positive definiteness", ok8, detail.join("; "));
}

fn compare_direct(h: &mut Harness) {
    let run = h.preset("compare-direct");
    let rows = run.csv("compare_direct.csv");
    let compat = column(&rows, "err_grad_compatible");
    let direct = column(&rows, "err_grad_direct");
    let orders: Vec<f64> = compat.windows(2).map(|w| (w[0] / w[1]).log2()).collect();
    let last3 = &orders[orders.len() - 3..];
    let ratio = direct[4] / direct[1];
    let ok = last3.iter().all(|o| (0.9..=1.1).contains(o)) && ratio >= 0.5 && run.code == 0 && run.elapsed.as_secs_f64() <= 60.0;
    let fmt: Vec<String> = orders.iter().map(|o| format!("{o:.3}")).collect();
    h.record(
        9,
        "direct scheme divergence",
        ok,
        format!("compatible grad orders [{}] (last three gated), direct err ratio N=800/N=100 {ratio:.3}", fmt.join(", ")),
    );
}

fn boundary_layer(h: &mut Harness) {
    let run = h.preset("boundary-layer");
    let metrics: Vec<Value> = run.json("boundary_layer_metrics.json").as_array().unwrap().clone();
    let get = |name: &str| -> Vec<f64> { metrics.iter().filter(|m| m["name"].as_str().unwrap().starts_with(name)).map(|m| num(m, "value")).collect() };
    let (m1, m2) = (get("m1["), get("m2["));
    let below = m1.iter().zip(&m2).all(|(a, b)| a < b);
    let ratios: Vec<f64> = m1.windows(2).map(|w| w[1] / w[0]).collect();
    let halving = ratios.iter().all(|r| (r / 0.5 - 1.0).abs() <= 0.25);
    let ok = below && halving && run.code == 0;
    h.record(10, "boundary layer removal", ok, format!("m1 [{}] < m2 [{}]; m1 ratios {ratios:.4?}", sci(&m1), sci(&m2)));
}

fn sci(v: &[f64]) -> String {
    v.iter().map(|x| format!("{x:.3e}")).collect::<Vec<_>>().join(", ")
}

fn delta_linearity(h: &mut Harness) {
    let mut ok = true;
    let mut detail = Vec::new();
    for family in [KernelFamily::Constant, KernelFamily::InverseAbs] {
        let rows = delta_linearity_study(&Problem::quartic(), family, &[2, 4, 8], 800).unwrap();
        let growth: Vec<f64> = rows.iter().filter_map(|r| r.growth_u).collect();
        ok &= growth.iter().all(|g| (2.0 / 1.5..=2.0 * 1.5).contains(g));
        detail.push(format!("{}: err_u growth per doubling {growth:.3?}", family.name()));
    }
    h.record(11, "delta linearity", ok, detail.join("; ") + " (allowed [1.333, 3.0])");
}

fn read_tree(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    fs::read_dir(dir).unwrap().map(|e| e.unwrap()).map(|e| (e.file_name().into_string().unwrap(), fs::read(e.path()).unwrap())).collect()
}

fn determinism(h: &mut Harness) {
    let mut differing = Vec::new();
    let mut files = 0;
    for (preset, _) in PRESETS {
        let (a, b) = (h.preset(preset), h.preset(preset));
        let (ta, tb) = (read_tree(&a.dir), read_tree(&b.dir));
        files += ta.len();
        if ta != tb || a.code != b.code {
            differing.push(*preset);
        }
    }
    let ok = differing.is_empty();
    h.record(12, "determinism", ok, format!("{} presets, {files} files compared, differing: {differing:?}", PRESETS.len()));
}

#[test]
fn acceptance_criteria() {
    let mut h = Harness::new();
    table(&mut h, 1, "table1", [1.56e-2, 8.07e-3, 4.10e-3, 2.06e-3, 1.04e-3], [1.91e-2, 9.61e-3, 4.82e-3, 2.42e-3, 1.21e-3]);
    table(&mut h, 2, "table2", [1.19e-2, 6.19e-3, 3.14e-3, 1.59e-3, 7.97e-4], [1.80e-2, 9.13e-3, 4.59e-3, 2.30e-3, 1.15e-3]);
    patch(&mut h);
    weights(&mut h);
    normalisation(&mut h);
    oracle(&mut h);
    properties(&mut h);
    compare_direct(&mut h);
    boundary_layer(&mut h);
    delta_linearity(&mut h);
    determinism(&mut h);
    let failed: Vec<String> = h.results.iter().filter(|r| !r.2).map(|r| format!("{} {}", r.0, r.1)).collect();
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}

#[test]
fn advisory_entries_do_not_gate() {
    let mut h = Harness::new();
    let run = h.preset("table2");
    assert_eq!(run.code, 0);
    assert!(run.advisory().iter().any(|c| !pass(c)));
    assert!(run.checks().iter().all(pass));
}
