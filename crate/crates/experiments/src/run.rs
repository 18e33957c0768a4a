//! The experiment commands.

use std::time::Instant;

use homspec_core::cauchy::{truncated_gaussian, truncated_power};
use homspec_core::cell::{CELL_RESIDUAL_TOL, SpecialCases};
use homspec_core::lattice::duality_defect;
use homspec_core::linalg::{hermitian_defect, min_eigenvalue, spectral_norm};
use homspec_core::threshold::geometric_ladder;
use homspec_core::{
    detect_special_cases, direction_data, homogenize, loglog_slope, solve_cauchy, sup_errors, threshold_residual,
    unit_directions, CMat, CauchyProblem, CellSolution, EffectiveData, ErrorQuery, FiberModel, FrequencySet,
    PeriodicOperator, SampleMode, TimeProfile, ThresholdWindow,
};
use num_complex::Complex64;
use serde_json::json;

use crate::config::{DataSpec, ExperimentConfig};
use crate::error::Result;
use crate::output::{num, Check, Report, SlopeEntry, Table};

/// Values at or below this are exact zeros for the rate fits.
pub const EXACT_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Command {
    Validate,
    Cell,
    Germ,
    Rates,
    Interp,
    Threshold,
    Evolve,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Validate => "validate",
            Command::Cell => "cell",
            Command::Germ => "germ",
            Command::Rates => "rates",
            Command::Interp => "interp",
            Command::Threshold => "threshold",
            Command::Evolve => "evolve",
        }
    }
}

pub fn run(command: Command, cfg: &ExperimentConfig) -> Result<Report> {
    match command {
        Command::Validate => validate(cfg),
        Command::Cell => cell(cfg),
        Command::Germ => germ(cfg),
        Command::Rates => rates(cfg),
        Command::Interp => interp(cfg),
        Command::Threshold => threshold(cfg),
        Command::Evolve => evolve(cfg),
    }
}

/// Operator, cell solution and fiber model shared by the commands.
pub struct Setup {
    pub op: PeriodicOperator,
    pub cell: CellSolution,
    pub eff: EffectiveData,
    pub special: SpecialCases,
    pub fiber_freq: FrequencySet,
}

impl Setup {
    pub fn new(cfg: &ExperimentConfig) -> Result<Self> {
        let op = cfg.build_operator()?;
        let freq = op.lattice().truncate(cfg.truncation.cell_radius())?;
        let (cell, eff) = homogenize(&op, &freq)?;
        let special = detect_special_cases(&op, &cell, &eff);
        let fiber_freq = op.lattice().truncate(cfg.truncation.fiber_radius())?;
        Ok(Setup { op, cell, eff, special, fiber_freq })
    }

    pub fn model(&self) -> FiberModel {
        FiberModel::new(&self.op, &self.fiber_freq, &self.eff)
    }

    fn order(&self) -> f64 {
        f64::from(self.op.order())
    }

    /// Decay exponent in `eps` expected for the Sobolev exponent `s`.
    pub fn predicted_exponent(&self, s: f64) -> f64 {
        let p = self.order();
        if self.special.correction_vanishes() {
            (s / (p + 1.0)).min(2.0)
        } else {
            (s / (2.0 * p + 1.0)).min(1.0)
        }
    }
}

fn matrix_rows(cfg: &ExperimentConfig, table: &mut Table, name: &str, m: &CMat) {
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            let z = m[(i, j)];
            table.push(vec![cfg.id.clone(), name.into(), i.to_string(), j.to_string(), num(z.re), num(z.im)]);
        }
    }
}

fn validate(cfg: &ExperimentConfig) -> Result<Report> {
    let op = cfg.build_operator()?;
    let lat = op.lattice();
    let d = lat.dim();
    let mut report = Report::new("validate");
    let defect = duality_defect(lat);
    report.checks.push(Check::new("lattice_duality", defect < 1e-10, format!("max defect {defect:e}")));
    let product = lat.cell_volume() * lat.dual_cell_volume();
    let target = (2.0 * std::f64::consts::PI).powi(d as i32);
    let rel = (product - target).abs() / target;
    report.checks.push(Check::new("cell_volumes", rel < 1e-12, format!("relative defect {rel:e}")));

    let sym = op.symbol();
    report.checks.push(Check::new(
        "symbol_ellipticity",
        sym.alpha0() > 1e-10 * sym.alpha1(),
        format!("alpha0 {:e}, alpha1 {:e}", sym.alpha0(), sym.alpha1()),
    ));
    let cert = op.coefficient().certificate().clone();
    report.checks.push(Check::new(
        "coefficient_positive",
        cert.min_eigenvalue > 0.0,
        format!("eigenvalues in [{:e}, {:e}] on {} points per axis", cert.min_eigenvalue, cert.max_eigenvalue, cert.resolution),
    ));
    let res = 8usize;
    let mut worst: f64 = 0.0;
    for idx in 0..res.pow(d as u32) {
        let mut rest = idx;
        let frac: Vec<f64> = (0..d)
            .map(|_| {
                let j = rest % res;
                rest /= res;
                (j as f64 + 0.37) / res as f64
            })
            .collect();
        worst = worst.max(hermitian_defect(&op.coefficient().eval(&lat.primal_vector(&frac))));
    }
    report.checks.push(Check::new("coefficient_hermitian", worst < 1e-13, format!("max defect {worst:e}")));

    let cutoff = cfg.truncation.cell_radius();
    let needed = 2.0 * op.coefficient().max_frequency_norm();
    report.checks.push(Check::new(
        "cell_cutoff",
        cutoff > needed,
        format!("cutoff {cutoff} against 2 max|c| = {needed}"),
    ));

    let setup = Setup::new(cfg)?;
    let window = ThresholdWindow::new(&setup.op, cfg.threshold.window_factor)?;
    let origin = setup.model().fiber(&vec![0.0; d]);
    let structure = origin.verify_threshold_structure(&window);
    report.checks.push(Check::new(
        "threshold_structure",
        structure.is_ok(),
        structure.err().map_or_else(|| "ok".to_string(), |e| e.to_string()),
    ));

    let mut table = Table::new("validate", &["config_id", "key", "value"]);
    let values = [
        ("dim", d as f64),
        ("order", setup.order()),
        ("n", setup.op.n() as f64),
        ("m", setup.op.m() as f64),
        ("alpha0", sym.alpha0()),
        ("alpha1", sym.alpha1()),
        ("g_min_eigenvalue", cert.min_eigenvalue),
        ("g_max_eigenvalue", cert.max_eigenvalue),
        ("inradius", lat.inradius()),
        ("delta", window.delta),
        ("t0", window.t0),
        ("cell_frequencies", setup.cell.frequencies().len() as f64),
        ("fiber_frequencies", setup.fiber_freq.len() as f64),
    ];
    for (k, v) in values {
        table.push(vec![cfg.id.clone(), k.into(), num(v)]);
    }
    report.tables.push(table);
    report.details = json!({ "window": {
        "delta": window.delta, "t0": window.t0, "c0": window.c0, "c1": window.c1,
        "gap_lower_bound": window.gap_lower_bound, "c_dp": window.c_dp,
    }});
    Ok(report)
}

fn special_json(s: &SpecialCases) -> serde_json::Value {
    json!({
        "divergence_free_columns": s.divergence_free_columns,
        "square_symbol": s.square_symbol,
        "g0_is_reuss": s.g0_is_reuss,
        "g0_is_voigt": s.g0_is_voigt,
        "tilde_constant": s.tilde_constant,
        "real_scalar": s.real_scalar,
        "lambda_zero": s.lambda_zero,
        "voigt_distance": s.voigt_distance,
        "reuss_distance": s.reuss_distance,
        "consistent": s.consistent,
        "correction_vanishes": s.correction_vanishes(),
    })
}

fn cell(cfg: &ExperimentConfig) -> Result<Report> {
    let setup = Setup::new(cfg)?;
    let eff = &setup.eff;
    let mut report = Report::new("cell");
    let residual = setup.cell.residual();
    report.checks.push(Check::new("cell_residual", residual <= CELL_RESIDUAL_TOL, format!("residual {residual:e}")));
    let (upper, lower) = eff.bracketing_gaps();
    let tol = -1e-9 * spectral_norm(eff.voigt());
    report.checks.push(Check::new(
        "voigt_reuss",
        upper >= tol && lower >= tol,
        format!("min eig(voigt - g0) = {upper:e}, min eig(g0 - reuss) = {lower:e}"),
    ));
    report.checks.push(Check::new(
        "special_cases_consistent",
        setup.special.consistent,
        "consequences of the detected structure hold",
    ));
    report.checks.push(Check::new(
        "g0_positive",
        min_eigenvalue(eff.g0()) > 0.0,
        format!("min eigenvalue {:e}", min_eigenvalue(eff.g0())),
    ));

    let mut table = Table::new("cell", &["config_id", "quantity", "row", "col", "re", "im"]);
    matrix_rows(cfg, &mut table, "g0", eff.g0());
    matrix_rows(cfg, &mut table, "voigt", eff.voigt());
    matrix_rows(cfg, &mut table, "reuss", eff.reuss());
    report.tables.push(table);
    report.details = json!({
        "residual": residual,
        "bracketing": { "upper_gap": upper, "lower_gap": lower },
        "tilde_oscillation": eff.tilde_oscillation(),
        "special_cases": special_json(&setup.special),
        "cell_frequencies": setup.cell.frequencies().len(),
    });
    Ok(report)
}

fn theta_header(d: usize, prefix: &str) -> Vec<String> {
    (1..=d).map(|i| format!("{prefix}{i}")).collect()
}

fn germ(cfg: &ExperimentConfig) -> Result<Report> {
    let setup = Setup::new(cfg)?;
    let d = setup.op.dim();
    let dirs = unit_directions(d, cfg.germ.directions);
    let data = direction_data(&setup.op, &setup.cell, &setup.eff, &dirs)?;
    let mut report = Report::new("germ");

    let mut header = vec!["config_id".to_string()];
    header.extend(theta_header(d, "theta_"));
    header.extend(["s_min", "s_max", "s_norm", "g_norm", "ratio"].map(String::from));
    let mut table = Table { name: "germ".into(), header, rows: Vec::new() };
    let mut max_ratio: f64 = 0.0;
    let mut min_germ = f64::INFINITY;
    for dd in &data {
        let ev = homspec_core::linalg::hermitian_eigenvalues(&dd.germ);
        let ratio = dd.correction_ratio();
        max_ratio = max_ratio.max(ratio);
        min_germ = min_germ.min(ev[0]);
        let mut row = vec![cfg.id.clone()];
        row.extend(dd.theta.iter().map(|x| num(*x)));
        row.extend([ev[0], ev[ev.len() - 1], spectral_norm(&dd.germ), spectral_norm(&dd.correction), ratio].map(num));
        table.push(row);
    }
    report.tables.push(table);
    report.checks.push(Check::new("germ_positive", min_germ > 0.0, format!("min eigenvalue {min_germ:e}")));

    // G is odd in theta
    let mut odd_defect: f64 = 0.0;
    for a in &data {
        if let Some(b) = data.iter().find(|b| a.theta.iter().zip(&b.theta).all(|(x, y)| (x + y).abs() < 1e-12)) {
            odd_defect = odd_defect.max(spectral_norm(&(&a.correction + &b.correction)) / spectral_norm(&a.germ));
        }
    }
    report.checks.push(Check::new("correction_odd", odd_defect <= 1e-9, format!("max relative defect {odd_defect:e}")));
    if setup.special.correction_vanishes() {
        report.checks.push(Check::new(
            "correction_vanishes",
            max_ratio <= 1e-9,
            format!("max |G|/|S| = {max_ratio:e} over {} directions", data.len()),
        ));
    }
    report.details = json!({
        "directions": data.len(),
        "max_correction_ratio": max_ratio,
        "special_cases": special_json(&setup.special),
    });
    Ok(report)
}

/// Uniform sup grid plus a geometric radial refinement down to `eps_min / 8`.
pub fn sup_points(cfg: &ExperimentConfig, op: &PeriodicOperator, eps_min: f64) -> Result<Vec<Vec<f64>>> {
    let b = &cfg.brillouin;
    let lat = op.lattice();
    let dirs = unit_directions(lat.dim(), b.angular);
    let grid = lat
        .sample_brillouin(b.resolution, SampleMode::SupGrid)?
        .with_radial_refinement(eps_min / 8.0, lat.inradius(), b.radial, &dirs);
    Ok(grid.points)
}

fn record_header(d: usize) -> Vec<String> {
    let mut h: Vec<String> = ["config_id", "d", "p", "n", "m", "s", "tau", "eps", "sup_error"].map(String::from).to_vec();
    h.extend(theta_header(d, "argmax_k"));
    h.extend(["cutoff", "wall_ms"].map(String::from));
    h
}

/// Sup errors on the configured grid, one per query.
struct Sweep {
    queries: Vec<ErrorQuery>,
    values: Vec<homspec_core::SupError>,
    wall_ms: f64,
}

fn sweep(cfg: &ExperimentConfig, setup: &Setup, queries: Vec<ErrorQuery>) -> Result<Sweep> {
    let eps_min = queries.iter().map(|q| q.eps).fold(f64::INFINITY, f64::min);
    let points = sup_points(cfg, &setup.op, eps_min)?;
    let model = setup.model();
    let start = Instant::now();
    let values = sup_errors(&model, &points, &queries);
    let wall_ms = if cfg.record_timing { start.elapsed().as_secs_f64() * 1e3 } else { 0.0 };
    Ok(Sweep { queries, values, wall_ms })
}

fn push_records(cfg: &ExperimentConfig, setup: &Setup, sw: &Sweep, table: &mut Table) {
    let op = &setup.op;
    for (q, r) in sw.queries.iter().zip(&sw.values) {
        let mut row = vec![
            cfg.id.clone(),
            op.dim().to_string(),
            op.order().to_string(),
            op.n().to_string(),
            op.m().to_string(),
            num(q.s),
            num(q.tau),
            num(q.eps),
            num(r.value),
        ];
        row.extend(r.k.iter().map(|x| num(*x)));
        row.extend([num(setup.fiber_freq.cutoff()), num(sw.wall_ms)]);
        table.push(row);
    }
}

fn ladder_queries(eps: &[f64], tau: f64, s: f64) -> Vec<ErrorQuery> {
    eps.iter().map(|&e| ErrorQuery { tau, eps: e, s }).collect()
}

/// Slope check of one ladder against the expected exponent.
fn rate_check(label: &str, predicted: f64, tol: f64, fit: Option<homspec_core::SlopeFit>, constant: bool) -> Check {
    match fit {
        Some(f) if f.exact => Check::new(label, true, "all values below the exactness floor"),
        Some(f) if constant => Check::new(label, false, format!("constant coefficient gave slope {:.4}", f.slope)),
        Some(f) => Check::new(
            label,
            f.slope >= predicted - tol,
            format!("slope {:.4} against predicted {predicted:.4} - {tol}", f.slope),
        ),
        None => Check::new(label, false, "not enough points for a fit"),
    }
}

fn rates(cfg: &ExperimentConfig) -> Result<Report> {
    let setup = Setup::new(cfg)?;
    let eps = cfg.ladder.values();
    let exponents = cfg.rate_exponents();
    let mut queries = Vec::new();
    for &s in &exponents {
        for &tau in &cfg.rates.taus {
            queries.extend(ladder_queries(&eps, tau, s));
        }
    }
    let sw = sweep(cfg, &setup, queries)?;
    let mut table = Table { name: "rates".into(), header: record_header(setup.op.dim()), rows: Vec::new() };
    push_records(cfg, &setup, &sw, &mut table);

    let mut report = Report::new("rates");
    let p = setup.order();
    let vanishes = setup.special.correction_vanishes();
    let constant = setup.op.coefficient().is_constant();
    let max = sw.values.iter().map(|v| v.value).fold(0.0, f64::max);
    report.checks.push(Check::new("sup_error_range", max <= 2.0 + 1e-12, format!("max sup error {max:e}")));
    if constant {
        report.checks.push(Check::new("constant_exact", max < 1e-9, format!("max sup error {max:e}")));
    }
    let n_eps = eps.len();
    let mut block = 0;
    let mut ladders = Vec::new();
    for &s in &exponents {
        for &tau in &cfg.rates.taus {
            let ys: Vec<f64> = sw.values[block * n_eps..(block + 1) * n_eps].iter().map(|v| v.value).collect();
            block += 1;
            let fit = loglog_slope(&eps, &ys, cfg.rates.tail, EXACT_FLOOR);
            let label = format!("slope_s{s}_tau{tau}");
            report.slopes.push(SlopeEntry::new(label.clone(), fit));
            if tau != 0.0 {
                let predicted = setup.predicted_exponent(s);
                // the G = 0 endpoint has a two-sided target
                if vanishes && s == 2.0 * p + 2.0 && !constant {
                    let ok = fit.is_some_and(|f| f.exact || (f.slope - 2.0).abs() <= 0.2);
                    let slope = fit.map_or(f64::NAN, |f| f.slope);
                    report.checks.push(Check::new(label, ok, format!("slope {slope:.4} against 2 +- 0.2")));
                } else {
                    report.checks.push(rate_check(&label, predicted, 0.15, fit, constant));
                }
            }
            ladders.push((s, tau, ys));
        }
    }
    // error growth in tau, compared on the asymptotic rungs
    let tail = cfg.rates.tail.min(n_eps);
    for &s in &exponents {
        let at = |tau: f64| ladders.iter().find(|l| l.0 == s && l.1 == tau).map(|l| &l.2);
        if let (Some(one), Some(eight)) = (at(1.0), at(8.0)) {
            let ratio = one[n_eps - tail..]
                .iter()
                .zip(&eight[n_eps - tail..])
                .filter(|(a, _)| **a > EXACT_FLOOR)
                .map(|(a, b)| b / a)
                .fold(0.0, f64::max);
            report.checks.push(Check::new(
                format!("tau_growth_s{s}"),
                ratio <= 12.0,
                format!("max sup(tau = 8) / sup(tau = 1) = {ratio:.4}"),
            ));
        }
    }
    report.tables.push(table);
    report.details = json!({
        "eps": eps,
        "points": sup_points(cfg, &setup.op, eps[n_eps - 1])?.len(),
        "fiber_frequencies": setup.fiber_freq.len(),
        "correction_vanishes": vanishes,
    });
    Ok(report)
}

fn interp(cfg: &ExperimentConfig) -> Result<Report> {
    let setup = Setup::new(cfg)?;
    let eps = cfg.ladder.values();
    let exponents = cfg.interp_exponents();
    let tau = cfg.interp.tau;
    let queries: Vec<ErrorQuery> = exponents.iter().flat_map(|&s| ladder_queries(&eps, tau, s)).collect();
    let sw = sweep(cfg, &setup, queries)?;
    let mut records = Table { name: "interp".into(), header: record_header(setup.op.dim()), rows: Vec::new() };
    push_records(cfg, &setup, &sw, &mut records);

    let mut report = Report::new("interp");
    let constant = setup.op.coefficient().is_constant();
    let mut table = Table::new("interp_table", &["config_id", "s", "predicted", "observed", "passed"]);
    let n_eps = eps.len();
    for (i, &s) in exponents.iter().enumerate() {
        let ys: Vec<f64> = sw.values[i * n_eps..(i + 1) * n_eps].iter().map(|v| v.value).collect();
        let fit = loglog_slope(&eps, &ys, cfg.rates.tail, EXACT_FLOOR);
        let predicted = setup.predicted_exponent(s);
        let label = format!("interp_s{s}");
        let check = rate_check(&label, predicted, 0.15, fit, constant);
        let observed = fit.map_or(String::new(), |f| if f.exact { "exact".into() } else { num(f.slope) });
        table.push(vec![cfg.id.clone(), num(s), num(predicted), observed, check.passed.to_string()]);
        report.slopes.push(SlopeEntry::new(label, fit));
        report.checks.push(check);
        if s == 0.0 {
            let max = ys.iter().copied().fold(0.0, f64::max);
            report.checks.push(Check::new("trivial_bound", max <= 2.0 + 1e-12, format!("max error {max:e} at s = 0")));
        }
    }
    report.tables.push(records);
    report.tables.push(table);
    report.details = json!({ "eps": eps, "tau": tau, "correction_vanishes": setup.special.correction_vanishes() });
    Ok(report)
}

fn threshold(cfg: &ExperimentConfig) -> Result<Report> {
    let setup = Setup::new(cfg)?;
    let op = &setup.op;
    let d = op.dim();
    let p = setup.order();
    let t = &cfg.threshold;
    let window = ThresholdWindow::new(op, t.window_factor)?;
    let model = setup.model();
    model.fiber(&vec![0.0; d]).verify_threshold_structure(&window)?;
    let dirs = unit_directions(d, t.directions);
    let data = direction_data(op, &setup.cell, &setup.eff, &dirs)?;
    let ladder = geometric_ladder(window.t0, t.ratio, t.rungs);

    let mut header = vec!["config_id".to_string(), "direction".to_string()];
    header.extend(theta_header(d, "theta_"));
    header.extend(["t", "projection_error", "residual", "residual_without_correction", "eigenvalue_ratio"].map(String::from));
    let mut table = Table { name: "threshold".into(), header, rows: Vec::new() };
    let mut report = Report::new("threshold");
    let mut worst = [f64::INFINITY; 3];
    let mut mismatch: f64 = 0.0;
    let mut exact_residual = true;
    for (i, dd) in data.iter().enumerate() {
        let r = threshold_residual(&model, &window, dd, &ladder, t.tail)?;
        for row in &r.rows {
            let mut out = vec![cfg.id.clone(), i.to_string()];
            out.extend(dd.theta.iter().map(|x| num(*x)));
            out.extend([row.t, row.projection_error, row.residual, row.residual_without_correction, row.eigenvalue_ratio].map(num));
            table.push(out);
            exact_residual &= row.residual <= 1e-10 * row.t.powf(2.0 * p);
        }
        let slope = |f: Option<homspec_core::SlopeFit>| f.map_or(f64::NEG_INFINITY, |f| if f.exact { f64::INFINITY } else { f.slope });
        worst[0] = worst[0].min(slope(r.projection_slope));
        worst[1] = worst[1].min(slope(r.residual_slope));
        worst[2] = worst[2].min(slope(r.residual_without_correction_slope));
        mismatch = mismatch.max(r.eigenvalue_mismatch());
        report.slopes.push(SlopeEntry::new(format!("projection_dir{i}"), r.projection_slope));
        report.slopes.push(SlopeEntry::new(format!("residual_dir{i}"), r.residual_slope));
        report.slopes.push(SlopeEntry::new(format!("residual_without_correction_dir{i}"), r.residual_without_correction_slope));
    }
    report.tables.push(table);
    report.checks.push(Check::new("projection_slope", worst[0] >= 0.9, format!("min slope {:.4} against 0.9", worst[0])));
    report.checks.push(Check::new(
        "projection_slope_order",
        worst[0] >= p - 0.2,
        format!("min slope {:.4} against p - 0.2 = {}", worst[0], p - 0.2),
    ));
    let target = 2.0 * p + 2.0 - 0.3;
    report.checks.push(Check::new(
        "residual_slope",
        exact_residual || worst[1] >= target,
        format!("min slope {:.4} against {target}", worst[1]),
    ));
    let target = 2.0 * p + 1.0 - 0.2;
    report.checks.push(Check::new(
        "residual_without_correction_slope",
        exact_residual || worst[2] >= target,
        format!("min slope {:.4} against {target}", worst[2]),
    ));
    report.checks.push(Check::new(
        "eigenvalue_limit",
        mismatch < 0.01,
        format!("max relative gap to the germ eigenvalue {mismatch:e} at the last rung"),
    ));
    report.details = json!({
        "t0": window.t0, "delta": window.delta, "ladder": ladder, "directions": data.len(),
        "min_slopes": { "projection": worst[0], "residual": worst[1], "residual_without_correction": worst[2] },
    });
    Ok(report)
}

type Data = Box<dyn Fn(&[f64]) -> Vec<Complex64> + Sync>;

fn spectral_data(spec: &DataSpec, band_limit: f64) -> Data {
    match spec {
        DataSpec::Gaussian { sigma, .. } => Box::new(truncated_gaussian(*sigma, band_limit, spec.direction())),
        DataSpec::Power { power, .. } => Box::new(truncated_power(*power, band_limit, spec.direction())),
    }
}

fn evolve(cfg: &ExperimentConfig) -> Result<Report> {
    let Some(spec) = &cfg.evolve else {
        return Err(crate::error::ExperimentError::ConfigInvalid("evolve needs an [evolve] table".into()));
    };
    let setup = Setup::new(cfg)?;
    let op = &setup.op;
    let model = setup.model();
    let initial = spectral_data(&spec.initial, spec.band_limit);
    let source = spec.source.as_ref().map(|s| (spectral_data(&s.profile, spec.band_limit), TimeProfile::Harmonic { omega: s.omega }));
    let eps = spec.ladder.values();
    let predicted = setup.predicted_exponent(spec.sobolev);

    let header = [
        "config_id", "d", "p", "n", "m", "s", "tau", "eps", "norm_phi", "norm_u_eps", "norm_u0", "error", "data_norm",
        "source_norm", "bound_scale", "bound_constant", "points", "time_steps", "duhamel_change", "wall_ms",
    ];
    let mut table = Table::new("evolve", &header);
    let mut report = Report::new("evolve");
    let mut unitarity: f64 = 0.0;
    let mut max_error: f64 = 0.0;
    let constant = op.coefficient().is_constant();
    let smooth = spec.initial.is_smooth() && spec.source.as_ref().is_none_or(|s| s.profile.is_smooth());
    let mut decreasing = true;
    for &tau in &spec.taus {
        let problem = CauchyProblem {
            initial: initial.as_ref(),
            source: source.as_ref().map(|(f, prof)| (f.as_ref() as &(dyn Fn(&[f64]) -> Vec<Complex64> + Sync), *prof)),
            band_limit: spec.band_limit,
            tau,
            time_steps: spec.time_steps,
            xi_step: spec.xi_step,
            sobolev: spec.sobolev,
        };
        let mut errs = Vec::with_capacity(eps.len());
        for &e in &eps {
            let start = Instant::now();
            let r = solve_cauchy(&model, &problem, e)?;
            let wall_ms = if cfg.record_timing { start.elapsed().as_secs_f64() * 1e3 } else { 0.0 };
            let bound_scale = (1.0 + tau.abs()) * e.powf(predicted) * (r.data_norm + r.source_norm);
            table.push(vec![
                cfg.id.clone(),
                op.dim().to_string(),
                op.order().to_string(),
                op.n().to_string(),
                op.m().to_string(),
                num(spec.sobolev),
                num(tau),
                num(e),
                num(r.norm_phi),
                num(r.norm_u_eps),
                num(r.norm_u0),
                num(r.error),
                num(r.data_norm),
                num(r.source_norm),
                num(bound_scale),
                num(r.error / bound_scale),
                r.points.to_string(),
                r.time_steps.to_string(),
                num(r.duhamel_change),
                num(wall_ms),
            ]);
            if source.is_none() {
                unitarity = unitarity.max((r.norm_u_eps - r.norm_phi).abs()).max((r.norm_u0 - r.norm_phi).abs());
            }
            max_error = max_error.max(r.error);
            errs.push(r.error);
        }
        decreasing &= errs.windows(2).all(|w| w[1] < w[0]);
        let fit = loglog_slope(&eps, &errs, 0, EXACT_FLOOR);
        let label = format!("evolve_tau{tau}");
        report.slopes.push(SlopeEntry::new(label.clone(), fit));
        if smooth && tau != 0.0 {
            let tol = if predicted >= 2.0 { 0.2 } else { 0.15 };
            report.checks.push(rate_check(&label, predicted, tol, fit, constant));
        }
    }
    if source.is_none() {
        report.checks.push(Check::new("unitarity", unitarity <= 1e-8, format!("max | ||u|| - ||phi|| | = {unitarity:e}")));
    }
    if constant {
        report.checks.push(Check::new("constant_exact", max_error <= 1e-9, format!("max error {max_error:e}")));
    }
    report.tables.push(table);
    report.details = json!({
        "eps": eps,
        "predicted_exponent": predicted,
        "smooth_data": smooth,
        "error_decreasing": decreasing,
    });
    Ok(report)
}
