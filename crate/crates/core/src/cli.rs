//! Command-line surface.
//!
//! Every subcommand resolves a [`ScenarioConfig`] from `--config` (if any),
//! built-in defaults and flags, runs, writes its report to `--out` and the
//! resolved config to `<out>.config.json`. Running the same subcommand with
//! `--config <out>.config.json` rewrites both files byte for byte.
//!
//! Exit codes: 0 success, 1 invalid input or a failed check, 2 infeasible
//! instance or a generator that breaks its contract. Errors are reported on
//! stderr as `ERROR <code> <message>`.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::assignment::{evaluate_impact, solve_assignment};
use crate::dist::ProxyScaling;
use crate::error::{Error, Result};
use crate::estimators::{fit_proxy_scaling_empirical, hat_tau_a, hat_tau_b, hat_tau_c, Method};
use crate::io::{
    self, fmt_num, fmt_opt, AssignSection, EstimateSection, ExperimentSection, InduceShiftSection, PermutationData,
    ScenarioConfig, Table,
};
use crate::mc::{
    run_finite_sample_experiment, run_permutation_benchmark, run_theorem1_experiment, run_theorem2_experiment,
    BenchmarkData, ExperimentConfig, FiniteSampleConfig, MseReport, PermutationConfig, ScalingMode, BENCH_METHODS,
};
use crate::rng::stream_rng;
use crate::samples::LabeledRow;
use crate::shift::{permute_covariates, validate_generator};

#[derive(Debug, Parser)]
#[command(name = "proxyshift", about = "Prediction under random distribution shift with proxy outcomes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Args)]
struct Common {
    /// Scenario config (JSON).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Report path; the resolved config goes to `<out>.config.json`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overrides the config seed.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// MSE of the three predictors under symmetric shifts vs. the error formula.
    VerifyTheorem1(Common),
    /// MSE ordering when only the proxy marginal shifts.
    VerifyTheorem2(Common),
    /// Scaled sampling variances of the plug-in estimators vs. their limits.
    FiniteSample(Common),
    /// MSE and R² curves under covariate permutation.
    BenchPermutation(Common),
    /// Predicts Y2 for target rows from two training periods.
    Estimate {
        #[command(flatten)]
        common: Common,
        /// A, B or C
        #[arg(long)]
        method: Option<Method>,
        /// Period -2 rows (`period,x,y1,y2`)
        #[arg(long)]
        train_m2: Option<String>,
        /// Period -1 rows, Y2 blank
        #[arg(long)]
        train_m1: Option<String>,
        /// Period 0 rows to predict
        #[arg(long)]
        target: Option<String>,
    },
    /// Draws shifted joints, or permutes covariates of a dataset.
    InduceShift(Common),
    /// Capacity-constrained placement of units into locations.
    Assign {
        #[command(flatten)]
        common: Common,
        /// `unit,<location>...` predicted weights
        #[arg(long)]
        weights: Option<String>,
        /// `location,capacity`
        #[arg(long)]
        capacities: Option<String>,
        /// `unit,group`; units sharing a group share a location
        #[arg(long)]
        groups: Option<String>,
        /// True weights, same layout as --weights; adds `impact` to stdout
        #[arg(long)]
        truth: Option<String>,
    },
    /// Moment checks of a shift generator.
    ValidateGenerator(Common),
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::VerifyTheorem1(_) => "verify-theorem1",
            Command::VerifyTheorem2(_) => "verify-theorem2",
            Command::FiniteSample(_) => "finite-sample",
            Command::BenchPermutation(_) => "bench-permutation",
            Command::Estimate { .. } => "estimate",
            Command::InduceShift(_) => "induce-shift",
            Command::Assign { .. } => "assign",
            Command::ValidateGenerator(_) => "validate-generator",
        }
    }

    fn common(&self) -> &Common {
        match self {
            Command::VerifyTheorem1(c)
            | Command::VerifyTheorem2(c)
            | Command::FiniteSample(c)
            | Command::BenchPermutation(c)
            | Command::InduceShift(c)
            | Command::ValidateGenerator(c) => c,
            Command::Estimate { common, .. } | Command::Assign { common, .. } => common,
        }
    }
}

/// What a run produced besides its files.
struct Outcome {
    failed_checks: usize,
    total_checks: usize,
    /// Lines for stdout.
    summary: Vec<String>,
}

impl Outcome {
    fn plain() -> Self {
        Outcome { failed_checks: 0, total_checks: 0, summary: Vec::new() }
    }

    fn checks(flags: impl IntoIterator<Item = bool>) -> Self {
        let flags: Vec<bool> = flags.into_iter().collect();
        Outcome { failed_checks: flags.iter().filter(|&&p| !p).count(), total_checks: flags.len(), summary: Vec::new() }
    }
}

/// Parses `argv` (including the program name), runs, and returns the exit
/// code. Never panics on bad input.
pub fn run_cli<I, S>(argv: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return 0;
            }
            let first = e.to_string().lines().next().unwrap_or("").trim_start_matches("error: ").to_string();
            eprintln!("ERROR usage {first}");
            eprint!("{}", e.render());
            return 1;
        }
    };
    match run(&cli.command) {
        Ok(o) => {
            for line in &o.summary {
                println!("{line}");
            }
            if o.failed_checks > 0 {
                eprintln!("ERROR check_failed {} of {} checks outside tolerance", o.failed_checks, o.total_checks);
                1
            } else {
                0
            }
        }
        Err(e) => {
            eprintln!("ERROR {} {}", e.code(), e);
            e.exit_code()
        }
    }
}

fn sidecar_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".config.json");
    PathBuf::from(s)
}

fn resolve(cmd: &Command) -> Result<(ScenarioConfig, PathBuf)> {
    let common = cmd.common();
    let mut cfg = match &common.config {
        Some(p) => ScenarioConfig::load(p)?,
        None => ScenarioConfig::default(),
    };
    if let Some(c) = &cfg.command {
        if c != cmd.name() {
            return Err(Error::Config(format!("config was resolved for `{c}`, not `{}`", cmd.name())));
        }
    }
    cfg.command = Some(cmd.name().into());
    if let Some(s) = common.seed {
        cfg.seed = Some(s);
    }
    cfg.require_seed()?;
    if let Some(o) = &common.out {
        cfg.out = Some(o.to_string_lossy().into_owned());
    }
    let out = cfg.out.clone().ok_or_else(|| Error::Config("an output path is required: pass --out".into()))?;
    match cmd {
        Command::VerifyTheorem1(_) => {
            cfg.experiment.get_or_insert_with(ExperimentSection::theorem1_default);
        }
        Command::VerifyTheorem2(_) => {
            cfg.experiment.get_or_insert_with(ExperimentSection::theorem2_default);
        }
        Command::FiniteSample(_) => {
            cfg.finite_sample.get_or_insert_with(Default::default);
        }
        Command::BenchPermutation(_) => {
            cfg.permutation.get_or_insert_with(Default::default);
        }
        Command::InduceShift(_) => {
            cfg.induce_shift.get_or_insert_with(Default::default);
        }
        Command::ValidateGenerator(_) => {
            cfg.validate_generator.get_or_insert_with(Default::default);
        }
        Command::Estimate { method, train_m2, train_m1, target, .. } => {
            let prev = cfg.estimate.take();
            let pick = |flag: &Option<String>, old: Option<&String>, name: &str| {
                flag.clone()
                    .or_else(|| old.cloned())
                    .ok_or_else(|| Error::Config(format!("estimate needs --{name}")))
            };
            cfg.estimate = Some(EstimateSection {
                method: method
                    .or(prev.as_ref().map(|e| e.method))
                    .ok_or_else(|| Error::Config("estimate needs --method".into()))?,
                train_m2: pick(train_m2, prev.as_ref().map(|e| &e.train_m2), "train-m2")?,
                train_m1: pick(train_m1, prev.as_ref().map(|e| &e.train_m1), "train-m1")?,
                target: pick(target, prev.as_ref().map(|e| &e.target), "target")?,
                scaling: prev.map(|e| e.scaling).unwrap_or_default(),
            });
        }
        Command::Assign { weights, capacities, groups, truth, .. } => {
            let prev = cfg.assign.take();
            let need = |flag: &Option<String>, old: Option<&String>, name: &str| {
                flag.clone()
                    .or_else(|| old.cloned())
                    .ok_or_else(|| Error::Config(format!("assign needs --{name}")))
            };
            cfg.assign = Some(AssignSection {
                weights: need(weights, prev.as_ref().map(|a| &a.weights), "weights")?,
                capacities: need(capacities, prev.as_ref().map(|a| &a.capacities), "capacities")?,
                groups: groups.clone().or_else(|| prev.as_ref().and_then(|a| a.groups.clone())),
                truth: truth.clone().or_else(|| prev.as_ref().and_then(|a| a.truth.clone())),
            });
        }
    }
    Ok((cfg, PathBuf::from(out)))
}

fn run(cmd: &Command) -> Result<Outcome> {
    let (cfg, out) = resolve(cmd)?;
    let seed = cfg.require_seed()?;
    let (table, outcome) = match cmd {
        Command::VerifyTheorem1(_) | Command::VerifyTheorem2(_) => {
            let sec = cfg.experiment.as_ref().expect("resolved");
            let mut ec = ExperimentConfig::new(sec.joint.resolve()?, sec.shift_m2, sec.shift_m1, sec.n_reps, seed);
            ec.x_weighting = sec.x_weighting;
            ec.scaling = sec.scaling;
            let report = if matches!(cmd, Command::VerifyTheorem1(_)) {
                run_theorem1_experiment(&ec)?
            } else {
                run_theorem2_experiment(&ec)?
            };
            mse_table(&report)
        }
        Command::FiniteSample(_) => finite_sample(&cfg, seed)?,
        Command::BenchPermutation(_) => bench_permutation(&cfg, seed)?,
        Command::Estimate { .. } => estimate(cfg.estimate.as_ref().expect("resolved"))?,
        Command::InduceShift(_) => {
            let (t, o) = induce_shift(cfg.induce_shift.as_ref().expect("resolved"), seed, &out)?;
            cfg.save(&sidecar_path(&out))?;
            if let Some(t) = t {
                t.save(&out)?;
            }
            return Ok(o);
        }
        Command::Assign { .. } => assign(cfg.assign.as_ref().expect("resolved"))?,
        Command::ValidateGenerator(_) => {
            let sec = cfg.validate_generator.as_ref().expect("resolved");
            let report = validate_generator(&sec.spec, &sec.joint.resolve()?, sec.n_draws, &mut stream_rng(seed, 0))?;
            let mut t = Table::new(&["statistic", "x", "x2", "cells", "estimate", "se", "expected", "pass"]);
            for c in &report.checks {
                t.push(vec![
                    serde_json::to_value(c.statistic).expect("enum serialises").as_str().unwrap_or_default().to_string(),
                    c.x.to_string(),
                    c.x2.map(|v| v.to_string()).unwrap_or_default(),
                    c.cells.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(";"),
                    fmt_num(c.estimate),
                    fmt_num(c.se),
                    fmt_opt(c.expected),
                    fmt_pass(c.pass),
                ]);
            }
            (t, Outcome::checks(report.checks.iter().filter_map(|c| c.pass)))
        }
    };
    table.save(&out)?;
    cfg.save(&sidecar_path(&out))?;
    Ok(outcome)
}

fn fmt_pass(p: Option<bool>) -> String {
    p.map(|b| b.to_string()).unwrap_or_default()
}

fn mse_table(report: &MseReport) -> (Table, Outcome) {
    let mut t = Table::new(&["method", "empirical_mse", "mc_se", "theory_total", "pass"]);
    for m in &report.methods {
        t.push(vec![
            m.method.name().into(),
            fmt_num(m.empirical_mse),
            fmt_num(m.mc_standard_error),
            fmt_opt(m.theoretical.as_ref().map(|b| b.total())),
            fmt_pass(m.pass),
        ]);
    }
    // ordering rows: paired difference MSE(C) - MSE(other)
    for o in &report.ordering {
        t.push(vec![
            format!("C-{}", o.other.name()),
            fmt_num(o.mean_difference),
            fmt_num(o.se),
            String::new(),
            o.pass.to_string(),
        ]);
    }
    let flags = report.methods.iter().filter_map(|m| m.pass).chain(report.ordering.iter().map(|o| o.pass));
    (t, Outcome::checks(flags))
}

fn finite_sample(cfg: &ScenarioConfig, seed: u64) -> Result<(Table, Outcome)> {
    let sec = cfg.finite_sample.as_ref().expect("resolved");
    let joint = sec.joint.resolve()?;
    let x = joint
        .alphabet()
        .x_index(&sec.x)
        .ok_or_else(|| Error::Config(format!("covariate {:?} is not in the joint", sec.x)))?;
    let fc = FiniteSampleConfig {
        joint,
        x,
        n_m2: sec.n_m2,
        n_m1: sec.n_m1,
        n_reps: sec.n_reps,
        seed,
        linear_proxy_beta: sec.linear_proxy_beta,
        assert_linear_proxy: sec.assert_linear_proxy,
    };
    let r = run_finite_sample_experiment(&fc)?;
    let mut t = Table::new(&["method", "metric", "value", "mc_se", "reference", "pass"]);
    for row in &r.rows {
        t.push(vec![
            row.method.name().into(),
            "n_var".into(),
            fmt_num(row.n_var.mean),
            fmt_num(row.n_var.se),
            fmt_opt(row.oracle),
            fmt_pass(row.pass),
        ]);
    }
    if let Some(b) = &r.proxy_bias {
        t.push(vec![
            Method::B.name().into(),
            "bias".into(),
            fmt_num(b.empirical.mean),
            fmt_num(b.empirical.se),
            fmt_num(b.population),
            String::new(),
        ]);
    }
    Ok((t, Outcome::checks(r.rows.iter().filter_map(|row| row.pass))))
}

fn bench_permutation(cfg: &ScenarioConfig, seed: u64) -> Result<(Table, Outcome)> {
    let sec = cfg.permutation.as_ref().expect("resolved");
    let data = match &sec.data {
        PermutationData::ProxyStrengths(s) => BenchmarkData::ProxyStrengths(s.clone()),
        PermutationData::Joint(j) => BenchmarkData::Joint(j.resolve()?),
        PermutationData::Dataset(path) => {
            let s = io::load_dataset(Path::new(path))?;
            let rows: Vec<LabeledRow> = s
                .rows()
                .iter()
                .filter_map(|r| Some(LabeledRow { x: r.x, y1: r.y1?, y2: r.y2? }))
                .collect();
            BenchmarkData::Rows(s.alphabet_arc().clone(), rows)
        }
    };
    let pc = PermutationConfig { data, shift_grid: sec.shift_grid.clone(), n_splits: sec.n_splits, n_rows: sec.n_rows, seed };
    let r = run_permutation_benchmark(&pc)?;
    let mut t = Table::new(&["proxy_strength", "shift", "method", "metric", "value", "mc_se"]);
    for p in &r.points {
        let head = || vec![fmt_opt(p.proxy_strength), fmt_num(p.shift)];
        for (k, m) in BENCH_METHODS.iter().enumerate() {
            for (metric, v) in [("mse", p.mse[k]), ("r2", p.r2[k])] {
                let mut row = head();
                row.extend([m.to_string(), metric.into(), fmt_num(v.mean), fmt_num(v.se)]);
                t.push(row);
            }
        }
        for (m, v) in [("C-A", p.c_minus_a), ("C-B_scaled", p.c_minus_b)] {
            let mut row = head();
            row.extend([m.to_string(), "mse_diff".into(), fmt_num(v.mean), fmt_num(v.se)]);
            t.push(row);
        }
    }
    Ok((t, Outcome::plain()))
}

fn estimate(sec: &EstimateSection) -> Result<(Table, Outcome)> {
    let paths = [Path::new(&sec.train_m2), Path::new(&sec.train_m1), Path::new(&sec.target)];
    let sets = io::load_datasets(&paths)?;
    let train = sets[0].concat(&sets[1])?;
    let target = &sets[2];
    let (table, flagged) = match sec.method {
        Method::A => (hat_tau_a(&train)?, None),
        Method::B => {
            let scaling = match sec.scaling {
                ScalingMode::Fitted => fit_proxy_scaling_empirical(&train)?,
                ScalingMode::Identity => ProxyScaling::identity(),
            };
            (hat_tau_b(&train, &scaling)?, None)
        }
        Method::C => {
            let h = hat_tau_c(&train)?;
            (h.table, Some(h.flagged))
        }
    };
    let mut t = Table::new(&["x", "prediction", "flagged"]);
    for r in target.rows() {
        let f = flagged.as_ref().is_some_and(|f| f[r.x]);
        t.push(vec![target.alphabet().x_labels()[r.x].clone(), fmt_num(table.get(r.x)), f.to_string()]);
    }
    let mut o = Outcome::plain();
    if let Some(f) = &flagged {
        let n = f.iter().filter(|&&b| b).count();
        if n > 0 {
            o.summary.push(format!("flagged {n} covariate values with empty first-stage cells"));
        }
    }
    Ok((t, o))
}

fn induce_shift(sec: &InduceShiftSection, seed: u64, out: &Path) -> Result<(Option<Table>, Outcome)> {
    match sec {
        InduceShiftSection::Joint { joint, spec, n_draws } => {
            let base = joint.resolve()?;
            let a = base.alphabet();
            let mut t = Table::new(&["draw", "x", "y1", "y2", "probability"]);
            for d in 0..*n_draws {
                let (_, shifted) = spec.sample(&base, &mut stream_rng(seed, d as u64))?;
                for x in 0..shifted.nx() {
                    for (c, p) in shifted.row(x).iter().enumerate() {
                        let (i, j) = (c / a.n2(), c % a.n2());
                        t.push(vec![
                            d.to_string(),
                            a.x_labels()[x].clone(),
                            a.y1_levels()[i].label.clone(),
                            a.y2_levels()[j].label.clone(),
                            fmt_num(*p),
                        ]);
                    }
                }
            }
            Ok((Some(t), Outcome::plain()))
        }
        InduceShiftSection::Dataset { path, fraction, rounds } => {
            let s = io::load_dataset(Path::new(path))?;
            let permuted = permute_covariates(&s, *fraction, *rounds, &mut stream_rng(seed, 0))?;
            io::save_dataset(&permuted, out)?;
            Ok((None, Outcome::plain()))
        }
    }
}

fn assign(sec: &AssignSection) -> Result<(Table, Outcome)> {
    let inst = io::load_assignment_instance(
        Path::new(&sec.weights),
        Path::new(&sec.capacities),
        sec.groups.as_deref().map(Path::new),
    )?;
    let a = solve_assignment(&inst)?;
    let t = io::assignment_table(&inst, &a);
    let mut o = Outcome::plain();
    o.summary.push(format!("objective {}", fmt_num(a.objective)));
    if let Some(p) = &sec.truth {
        let truth = io::load_truth(Path::new(p), &inst)?;
        o.summary.push(format!("impact {}", fmt_num(evaluate_impact(&a, &truth)?)));
    }
    Ok((t, o))
}
