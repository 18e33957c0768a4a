//! Acceptance criteria, one PASS/FAIL line each.

mod common;

use std::fs;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::Command as Process;
use std::time::Instant;

use common::*;
use homspec::{execute, Command, ExperimentConfig, Report};

type Outcome = Result<String, String>;

fn run(command: Command, cfg: &ExperimentConfig, tag: &str) -> Result<Report, String> {
    let dir = scratch(tag);
    let result = execute(command, cfg, 1, &dir).map(|r| r.0).map_err(|e| format!("{tag}: {e}"));
    let _ = fs::remove_dir_all(dir);
    result
}

fn ensure(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok { Ok(()) } else { Err(msg.into()) }
}

fn check(report: &Report, name: &str) -> Result<String, String> {
    let c = report.check(name).ok_or_else(|| format!("{} has no check {name}", report.command))?;
    ensure(c.passed, format!("{name}: {}", c.detail))?;
    Ok(c.detail.clone())
}

fn slope(report: &Report, label: &str) -> Result<f64, String> {
    report
        .slopes
        .iter()
        .find(|s| s.label == label)
        .and_then(|s| s.slope)
        .ok_or_else(|| format!("no fitted slope {label}"))
}

fn g0(report: &Report, row: usize, col: usize) -> f64 {
    let t = report.table("cell").unwrap();
    t.rows
        .iter()
        .find(|r| r[1] == "g0" && r[2] == row.to_string() && r[3] == col.to_string())
        .map(|r| r[4].parse().unwrap())
        .unwrap()
}

/// Sup errors of one (s, tau) block, in ladder order.
fn ladder(report: &Report, s: f64, tau: f64) -> Vec<f64> {
    let t = report.table("rates").unwrap();
    let (cs, ct, ce) = (t.column("s").unwrap(), t.column("tau").unwrap(), t.column("sup_error").unwrap());
    t.rows
        .iter()
        .filter(|r| r[cs] == s.to_string() && r[ct] == tau.to_string())
        .map(|r| r[ce].parse().unwrap())
        .collect()
}

fn relative_change(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs())
}

fn rates_config(name: &str, s: f64, taus: &[f64]) -> ExperimentConfig {
    let mut cfg = load(name);
    cfg.rates.s = vec![s];
    cfg.rates.taus = taus.to_vec();
    cfg
}

fn effective_scalar() -> Outcome {
    let cfg = load("scalar_d1");
    let start = Instant::now();
    let report = run(Command::Cell, &cfg, "c1")?;
    let elapsed = start.elapsed().as_secs_f64();
    let value = g0(&report, 0, 0);
    let err = (value - 3f64.sqrt() / 2.0).abs();
    ensure(err <= 1e-6, format!("g0 = {value}, error {err:e}"))?;
    ensure(elapsed < 1.0, format!("took {elapsed:.2} s"))?;
    Ok(format!("g0 = {value:.12} (error {err:.1e}) in {elapsed:.3} s"))
}

fn voigt_reuss_random() -> Outcome {
    let mut worst: f64 = 0.0;
    for seed in 0..10u64 {
        let d = 1 + (seed % 2) as usize;
        let n = 1 + ((seed / 2) % 2) as usize;
        let m = n + ((seed / 4) % 2) as usize;
        let cfg = ExperimentConfig::from_toml(&random_toml(100 + seed, d, n, m)).map_err(|e| e.to_string())?;
        let start = Instant::now();
        let report = run(Command::Cell, &cfg, &format!("c2-{seed}"))?;
        let elapsed = start.elapsed().as_secs_f64();
        check(&report, "voigt_reuss").map_err(|e| format!("seed {seed} (d={d}, n={n}, m={m}): {e}"))?;
        check(&report, "g0_positive")?;
        ensure(elapsed < 30.0, format!("seed {seed} took {elapsed:.1} s"))?;
        worst = worst.max(elapsed);
    }
    Ok(format!("10 random coefficients, slowest {worst:.2} s"))
}

fn correction_vanishes() -> Outcome {
    let mut parts = Vec::new();
    for name in ["real_d2", "divfree_d2", "scalar_d1"] {
        let mut cfg = load(name);
        cfg.germ.directions = 64;
        let report = run(Command::Germ, &cfg, &format!("c3-{name}"))?;
        check(&report, "correction_vanishes")?;
        let ratio = report.details["max_correction_ratio"].as_f64().unwrap();
        parts.push(format!("{name} {ratio:.1e}"));
    }
    // the generic coefficient must not satisfy the same identity
    let generic = run(Command::Germ, &load("generic_d2"), "c3-generic")?;
    let ratio = generic.details["max_correction_ratio"].as_f64().unwrap();
    ensure(ratio > 1e-3, format!("generic |G|/|S| only {ratio:e}"))?;
    Ok(format!("max |G|/|S|: {}; generic {ratio:.3}", parts.join(", ")))
}

fn threshold() -> Outcome {
    let mut parts = Vec::new();
    for name in ["scalar_d1", "generic_d2"] {
        let report = run(Command::Threshold, &load(name), &format!("c4-{name}"))?;
        for c in &report.checks {
            ensure(c.passed, format!("{name} {}: {}", c.name, c.detail))?;
        }
        parts.push(format!("{name} {} checks", report.checks.len()));
    }
    Ok(parts.join(", "))
}

fn generic_rate(report: &Report) -> Outcome {
    let s = slope(report, "slope_s5_tau1")?;
    ensure(s >= 0.85, format!("slope {s:.4}"))?;
    ensure(ladder(report, 5.0, 1.0).len() >= 5, "fewer than 5 rungs")?;
    Ok(format!("generic d=2, s=5: slope {s:.4}"))
}

fn scalar_rate(report: &Report) -> Outcome {
    let s = slope(report, "slope_s6_tau1")?;
    ensure((s - 2.0).abs() <= 0.2, format!("slope {s:.4}"))?;
    Ok(format!("scalar d=1, s=6: slope {s:.4}"))
}

fn tau_growth(generic: &Report, scalar: &Report) -> Outcome {
    let a = check(generic, "tau_growth_s5")?;
    let b = check(scalar, "tau_growth_s6")?;
    Ok(format!("generic {a}; scalar {b}"))
}

fn evolution() -> Outcome {
    let cfg = load("scalar_d1");
    let start = Instant::now();
    let report = run(Command::Evolve, &cfg, "c8")?;
    check(&report, "unitarity")?;
    let s = slope(&report, "evolve_tau1")?;
    ensure(s >= 1.8, format!("slope {s:.4}"))?;
    let constant = ExperimentConfig::from_toml(&constant_toml(1.7)).unwrap();
    let exact = run(Command::Evolve, &constant, "c8-constant")?;
    let detail = check(&exact, "constant_exact")?;
    let elapsed = start.elapsed().as_secs_f64();
    ensure(elapsed < 600.0, format!("took {elapsed:.1} s"))?;
    Ok(format!("slope {s:.4}, unitarity ok, constant g {detail}, {elapsed:.1} s"))
}

/// Compares the fitted slope and the fitted rungs of two rate runs.
fn compare_rates(base: &Report, other: &Report, s: f64, what: &str) -> Result<f64, String> {
    let label = format!("slope_s{s}_tau1");
    let mut worst = relative_change(slope(base, &label)?, slope(other, &label)?);
    let (a, b) = (ladder(base, s, 1.0), ladder(other, s, 1.0));
    for (x, y) in a.iter().zip(&b).skip(a.len().saturating_sub(5)) {
        worst = worst.max(relative_change(*x, *y));
    }
    ensure(worst < 0.05, format!("{what} changed by {:.2}%", 100.0 * worst))?;
    Ok(worst)
}

fn robustness(generic: &Report, scalar: &Report) -> Outcome {
    let mut parts = Vec::new();

    let base = g0(&run(Command::Cell, &load("scalar_d1"), "c9-g0")?, 0, 0);
    let mut wide = load("scalar_d1");
    wide.truncation.cell *= 2.0;
    let doubled = g0(&run(Command::Cell, &wide, "c9-g0-wide")?, 0, 0);
    let change = relative_change(base, doubled);
    ensure(change < 0.05, format!("g0 changed by {change:e}"))?;
    parts.push(format!("g0 {change:.1e}"));

    for (name, s, base) in [("scalar_d1", 6.0, scalar), ("generic_d2", 5.0, generic)] {
        let mut cutoff = rates_config(name, s, &[1.0]);
        cutoff.truncation.cell *= 2.0;
        cutoff.truncation.fiber = cutoff.truncation.fiber.map(|f| 2.0 * f);
        let c = compare_rates(base, &run(Command::Rates, &cutoff, &format!("c9-{name}-cut"))?, s, &format!("{name} cutoff"))?;

        let mut grid = rates_config(name, s, &[1.0]);
        grid.brillouin.resolution *= 2;
        grid.brillouin.radial *= 2;
        grid.brillouin.angular *= 2;
        let g = compare_rates(base, &run(Command::Rates, &grid, &format!("c9-{name}-grid"))?, s, &format!("{name} grid"))?;
        parts.push(format!("{name} cutoff {:.2}% grid {:.2}%", 100.0 * c, 100.0 * g));
    }
    Ok(parts.join(", "))
}

fn cli_rates(threads: usize, tag: &str) -> Result<String, String> {
    let dir = scratch(tag);
    let out = Process::new(env!("CARGO_BIN_EXE_homspec"))
        .arg("rates")
        .arg("--config")
        .arg(config_path("scalar_d1"))
        .arg("--out")
        .arg(&dir)
        .arg("--threads")
        .arg(threads.to_string())
        .output()
        .map_err(|e| e.to_string())?;
    ensure(out.status.success(), format!("exit {:?}: {}", out.status.code(), String::from_utf8_lossy(&out.stderr)))?;
    let csv = fs::read_to_string(dir.join("rates.csv")).map_err(|e| e.to_string())?;
    let _ = fs::remove_dir_all(dir);
    Ok(csv)
}

fn determinism() -> Outcome {
    let first = cli_rates(1, "c10-a")?;
    let second = cli_rates(1, "c10-b")?;
    ensure(first == second, "two single-threaded runs differ")?;
    let parallel = cli_rates(4, "c10-c")?;
    let values = |text: &str| -> Vec<String> { text.lines().map(|l| l.split(',').nth(8).unwrap_or("").to_string()).collect() };
    ensure(values(&first) == values(&parallel), "threads = 4 changed the sup errors")?;
    Ok(format!("{} records identical across runs and thread counts", first.lines().count() - 1))
}

fn main() {
    let mut results: Vec<(usize, &str, Outcome)> = Vec::new();
    let mut record = |n: usize, name: &'static str, f: &dyn Fn() -> Outcome| {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|_| Err("panicked".into()));
        let outcome = outcome.map(|d| format!("{d} [{:.1} s]", start.elapsed().as_secs_f64()));
        let line = match &outcome {
            Ok(d) => format!("[PASS] criterion {n}: {name}: {d}"),
            Err(e) => format!("[FAIL] criterion {n}: {name}: {e}"),
        };
        println!("{line}");
        results.push((n, name, outcome));
    };

    record(1, "effective coefficient of 1 + 0.5 cos", &effective_scalar);
    record(2, "Voigt-Reuss bracket", &voigt_reuss_random);
    record(3, "vanishing first-order correction", &correction_vanishes);
    record(4, "threshold approximation", &threshold);

    let generic = run(Command::Rates, &rates_config("generic_d2", 5.0, &[1.0, 8.0]), "rates-generic");
    let scalar = run(Command::Rates, &rates_config("scalar_d1", 6.0, &[1.0, 8.0]), "rates-scalar");
    let both = |f: &dyn Fn(&Report, &Report) -> Outcome| match (&generic, &scalar) {
        (Ok(g), Ok(s)) => f(g, s),
        (Err(e), _) | (_, Err(e)) => Err(e.clone()),
    };
    record(5, "generic rate", &|| both(&|g, _| generic_rate(g)));
    record(6, "improved rate with vanishing correction", &|| both(&|_, s| scalar_rate(s)));
    record(7, "growth in tau", &|| both(&tau_growth));
    record(8, "Cauchy problem", &evolution);
    record(9, "resolution robustness", &|| both(&robustness));
    record(10, "determinism", &determinism);

    let failed: Vec<usize> = results.iter().filter(|r| r.2.is_err()).map(|r| r.0).collect();
    println!("{} of {} criteria passed", results.len() - failed.len(), results.len());
    if !failed.is_empty() {
        std::process::exit(1);
    }
}
