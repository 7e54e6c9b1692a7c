use std::time::Instant;

use cascade_synth::format::{csv_row, round_json, sig};
use cascade_synth::prob::DEFAULT_SIZE_GUARD;
use cascade_synth::regions::{
    general_cascade_rates, minimize_rates, rate_triple, scatter_empirical_rate, scatter_gap, scatter_relay_region,
    task_region, variation_rates, Layout, Variation,
};
use cascade_synth::synth::{
    cascade_experiment, eavesdropper_independence_test, relay_scheme_experiment, sample_cascade, sample_codebook,
    softcover_experiment, superposition_softcover_experiment, CascadeSystem, ExperimentReport, RelayRates, Sweep,
    SYSTEM_TOLERANCE, VERSION,
};
use cascade_synth::{AuxiliaryCoupling, OptimizerConfig, RatePoint, RegionFrontier};
use serde::Serialize;
use serde_json::json;

use crate::config::{
    echo, load, require_three_node, EavesdropConfig, OptimizeConfig, RegionConfig, RelayConfig, SimulateConfig,
    SoftcoverConfig, SweepSpec,
};
use crate::failure::Failure;
use crate::output::write;
use crate::{Cli, Command, RegionArgs, RegionCommand, SimulateCommand, SoftcoverCommand};

pub fn run(cli: &Cli) -> Result<(), Failure> {
    let start = Instant::now();
    let result = match &cli.command {
        Command::Region(RegionCommand::Task(a)) => region(cli, a, false, start),
        Command::Region(RegionCommand::ScatterRelay(a)) => region(cli, a, true, start),
        Command::Region(RegionCommand::Optimize(a)) => optimize(cli, load(&a.config)?, start),
        Command::Simulate(SimulateCommand::Cascade(a)) => simulate(cli, load(&a.config)?, false, start),
        Command::Simulate(SimulateCommand::LongCascade(a)) => simulate(cli, load(&a.config)?, true, start),
        Command::Softcover(SoftcoverCommand::Single(a)) => softcover(cli, load(&a.config)?, false, start),
        Command::Softcover(SoftcoverCommand::Superposition(a)) => softcover(cli, load(&a.config)?, true, start),
        Command::Relay(a) => relay(cli, load(&a.config)?, start),
        Command::EavesdropTest(a) => eavesdrop(cli, load(&a.config)?, start),
    };
    if cli.timing {
        log::info!("wall clock {:.3} s", start.elapsed().as_secs_f64());
    }
    result
}

fn resolve_seed(cli: &Cli, config: Option<u64>) -> Result<u64, Failure> {
    cli.seed
        .or(config)
        .ok_or_else(|| Failure::config("a seed is required: pass --seed or set `seed` in the config"))
}

fn resolve_guard(cli: &Cli, config: Option<u64>) -> u64 {
    cli.guard.or(config).unwrap_or(DEFAULT_SIZE_GUARD as u64)
}

fn resolve_sweep(cli: &Cli, spec: &mut SweepSpec) -> Result<Sweep, Failure> {
    let seed = resolve_seed(cli, spec.seed)?;
    let guard = resolve_guard(cli, spec.guard);
    spec.seed = Some(seed);
    spec.guard = Some(guard);
    Ok(Sweep::new(spec.n_list.clone(), spec.trials, seed, guard as u128))
}

fn to_json<T: Serialize>(v: &T) -> serde_json::Value {
    serde_json::to_value(v).expect("configs serialize")
}

fn pretty(v: &serde_json::Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("values serialize");
    s.push('\n');
    s
}

/// JSON document: command, version, verbatim config, rounded result.
fn document(command: &str, config: serde_json::Value, mut result: serde_json::Value, cli: &Cli, start: Instant) -> String {
    round_json(&mut result);
    let mut doc = json!({
        "command": command,
        "version": VERSION,
        "config": config,
        "result": result,
    });
    if cli.timing {
        doc["wall_clock_seconds"] = json!(start.elapsed().as_secs_f64());
    }
    pretty(&doc)
}

fn region(cli: &Cli, args: &RegionArgs, scatter: bool, start: Instant) -> Result<(), Failure> {
    let mut config: RegionConfig = match &args.config {
        Some(p) => load(p)?,
        None => RegionConfig::default(),
    };
    if args.m.is_some() {
        config.m = args.m;
    }
    let m = config.m.ok_or_else(|| Failure::config("region commands need --m or `m` in the config"))?;
    let (command, stem) = if scatter {
        ("region scatter-relay", "region-scatter-relay")
    } else {
        ("region task", "region-task")
    };
    let frontier: RegionFrontier = if scatter {
        scatter_relay_region(m)?
    } else {
        task_region(m)?
    };
    log::info!(
        "{command} m={m}: {} corners from {} generated",
        frontier.corners().len(),
        frontier.generated()
    );
    let mut result = frontier.to_json_value();
    if scatter {
        let min_sum = frontier
            .corners()
            .iter()
            .map(|c| c.coords.iter().sum::<f64>())
            .fold(f64::INFINITY, f64::min);
        let gap = scatter_gap(m)?;
        log::info!("minimum sum rate {}, gap at a=m-1 {}", sig(min_sum), sig(gap));
        result["min_sum_rate"] = json!(min_sum);
        result["empirical_coordination_rate"] = json!(scatter_empirical_rate(m));
        result["gap_at_a_m_minus_1"] = json!(gap);
    }
    let cfg_json = to_json(&config);
    write(
        cli,
        stem,
        || frontier.to_csv(),
        || document(command, cfg_json, result, cli, start),
        &echo(&config)?,
    )
}

fn optimize(cli: &Cli, mut config: OptimizeConfig, start: Instant) -> Result<(), Failure> {
    config.seed = Some(resolve_seed(cli, config.seed)?);
    let target = config.target.target()?;
    let o = &config.optimizer;
    let cfg = OptimizerConfig {
        restarts: o.restarts,
        grid_resolution: o.grid_resolution,
        max_iterations: o.max_iterations,
        seed: config.seed.unwrap_or_default(),
        tolerance: o.tolerance,
    };
    let (aux, rates) = minimize_rates(&target, config.weights, config.cards.map(|[u, v]| (u, v)), config.functional, &cfg)?;
    let objective: f64 = config.weights.iter().zip(rates.to_vec()).map(|(w, r)| w * r).sum();
    log::info!(
        "optimum R0={} R1={} R2={} objective {}",
        sig(rates.r0),
        sig(rates.r1()),
        sig(rates.r2()),
        sig(objective)
    );
    let joint = aux.joint();
    let result = json!({
        "objective": objective,
        "rates": rates.to_vec(),
        "coupling": {
            "names": joint.names(),
            "shape": joint.vars().iter().map(|v| v.card).collect::<Vec<_>>(),
            "data": (0..joint.num_states()).map(|i| joint.prob_at(i)).collect::<Vec<_>>(),
        },
    });
    let csv = || {
        let mut s = csv_row(["objective", "R0", "R1", "R2"]);
        s.push_str(&csv_row([objective, rates.r0, rates.r1(), rates.r2()].map(sig)));
        s
    };
    let cfg_json = to_json(&config);
    write(
        cli,
        "region-optimize",
        csv,
        || document("region optimize", cfg_json, result, cli, start),
        &echo(&config)?,
    )
}

fn finish_report(cli: &Cli, mut report: ExperimentReport, config: serde_json::Value, echo_text: &str, stem: &str, start: Instant) -> Result<(), Failure> {
    for s in &report.summary {
        log::info!(
            "n={} mean tv {} (stderr {}, best {} at seed {})",
            s.n,
            sig(s.mean),
            sig(s.stderr),
            sig(s.best),
            s.best_seed
        );
    }
    report.config = config;
    if cli.timing {
        report.wall_clock_seconds = Some(start.elapsed().as_secs_f64());
    }
    write(cli, stem, || report.to_csv(), || report.to_json(), echo_text)
}

fn log_margin(rates: &[f64], floors: &[f64]) {
    let fmt = |v: &[f64]| v.iter().map(|x| sig(*x)).collect::<Vec<_>>().join(", ");
    log::info!("rates ({}) against floors ({})", fmt(rates), fmt(floors));
}

fn simulate(cli: &Cli, mut config: SimulateConfig, long: bool, start: Instant) -> Result<(), Failure> {
    let sweep = resolve_sweep(cli, &mut config.sweep)?;
    let coupling = config.coupling.cascade_coupling()?;
    let floors = if long {
        if !matches!(coupling.layout(), Layout::Cascade { .. }) {
            return Err(Failure::config("simulate long-cascade needs a coupling over X, Y1..Yk, U1..Uk"));
        }
        general_cascade_rates(&coupling, SYSTEM_TOLERANCE)?
    } else {
        require_three_node(&coupling)?;
        rate_triple(&coupling)?
    };
    let r = config.rates.resolve(&floors.to_vec())?;
    log_margin(&r, &floors.to_vec());
    let rates = RatePoint::new(r[0], r[1..].to_vec())?;
    let report = cascade_experiment(&coupling, &rates, &sweep)?;
    let stem = if long { "simulate-long-cascade" } else { "simulate-cascade" };
    finish_report(cli, report, to_json(&config), &echo(&config)?, stem, start)
}

fn softcover(cli: &Cli, mut config: SoftcoverConfig, superposition: bool, start: Instant) -> Result<(), Failure> {
    let sweep = resolve_sweep(cli, &mut config.sweep)?;
    let report = if superposition {
        let [ra, rb] = config.rates[..] else {
            return Err(Failure::config("superposition soft covering needs rates = [R_a, R_b]"));
        };
        let pmf = config
            .pmf
            .pmf
            .as_ref()
            .ok_or_else(|| Failure::config("superposition soft covering needs a pmf table over X, U, V"))?
            .build()?;
        superposition_softcover_experiment(&pmf, (ra, rb), &sweep)?
    } else {
        let [rate] = config.rates[..] else {
            return Err(Failure::config("single-layer soft covering needs rates = [R]"));
        };
        softcover_experiment(&config.pmf.codeword_law()?, rate, &sweep)?
    };
    log_margin(&report.rates, &report.rate_floors);
    let stem = if superposition {
        "softcover-superposition"
    } else {
        "softcover-single"
    };
    finish_report(cli, report, to_json(&config), &echo(&config)?, stem, start)
}

fn relay(cli: &Cli, mut config: RelayConfig, start: Instant) -> Result<(), Failure> {
    let sweep = resolve_sweep(cli, &mut config.sweep)?;
    if config.rates.r0.is_some() {
        return Err(Failure::config("the relay scheme has no r0; use r01 and r02 for common randomness"));
    }
    let coupling: AuxiliaryCoupling = config.coupling.relay_coupling()?;
    let bounds = variation_rates(&coupling, Variation::Thm4Relay, SYSTEM_TOLERANCE)?;
    let floors = [0.0, bounds.point.r1(), bounds.point.r2()];
    let r = config.rates.resolve(&floors)?;
    log_margin(&r[1..], &floors[1..]);
    let rates = RelayRates {
        r1: r[1],
        r2: r[2],
        r01: config.r01,
        r02: config.r02,
    };
    let report = relay_scheme_experiment(&coupling, rates, &sweep)?;
    finish_report(cli, report, to_json(&config), &echo(&config)?, "relay", start)
}

const MONTE_CARLO_NOTE: &str = "Monte-Carlo estimate of the message/sequence contingency table only; full-block total variation is not estimated from samples";

fn eavesdrop(cli: &Cli, mut config: EavesdropConfig, start: Instant) -> Result<(), Failure> {
    let seed = resolve_seed(cli, config.seed)?;
    let guard = resolve_guard(cli, config.guard);
    config.seed = Some(seed);
    config.guard = Some(guard);
    let coupling = config.coupling.cascade_coupling()?;
    let floors = match coupling.layout() {
        Layout::ThreeNode => rate_triple(&coupling)?,
        _ => general_cascade_rates(&coupling, SYSTEM_TOLERANCE)?,
    };
    let r = config.rates.resolve(&floors.to_vec())?;
    log_margin(&r, &floors.to_vec());
    let rates = RatePoint::new(r[0], r[1..].to_vec())?;
    let codebook = sample_codebook(&coupling, config.n, &rates, seed, guard as u128)?;
    let system = CascadeSystem::new(coupling, codebook)?;
    let samples = sample_cascade(&system, config.samples, seed)?;
    let test = eavesdropper_independence_test(&samples, config.significance)?;
    log::info!(
        "G = {} on {} degrees of freedom, p = {}{}",
        sig(test.statistic),
        test.degrees_of_freedom,
        sig(test.p_value),
        if test.inconclusive { " (inconclusive)" } else { "" }
    );
    let csv = || {
        let mut s = csv_row([
            "n",
            "samples",
            "rows",
            "cols",
            "statistic",
            "degrees_of_freedom",
            "p_value",
            "significance",
            "reject",
            "inconclusive",
        ]);
        s.push_str(&csv_row([
            config.n.to_string(),
            test.samples.to_string(),
            test.rows.to_string(),
            test.cols.to_string(),
            sig(test.statistic),
            test.degrees_of_freedom.to_string(),
            sig(test.p_value),
            sig(test.significance),
            test.reject.to_string(),
            test.inconclusive.to_string(),
        ]));
        s
    };
    let result = json!({ "test": test, "rates": r, "notes": [MONTE_CARLO_NOTE] });
    let cfg_json = to_json(&config);
    write(
        cli,
        "eavesdrop-test",
        csv,
        || document("eavesdrop-test", cfg_json, result, cli, start),
        &echo(&config)?,
    )
}
