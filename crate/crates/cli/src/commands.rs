use fibsnake::events::{Event, EventQuery};
use fibsnake::kasteleyn::{correlation_report, partition_function, sector_measure, SectorWeights};
use fibsnake::lattice::{brute_force_partition_pair, Params, PureMeasure, TorusShape};
use fibsnake::limits::{
    arc_geometry, cylinder_correlation, occupation_from_beta, plane_correlation, ArcGeometry,
    CylinderKernelSpec, PlaneKernelSpec,
};
use fibsnake::ring::{
    all_states, conditioned_rate, conditioned_transition, generator_table, km_kernel, markov_check,
    noncollision_det, spacetime_correlation, stationary_prob, traffic, RateParams, WalkerConfig,
};
use fibsnake::simulate::{
    estimate_many, unit_mean_martingale_at, Dynamics, PathRecord, SimSpec, StartLaw,
};
use fibsnake::verify::{run_suite, CriterionReport, Suite, VerifyOptions};
use fibsnake::Error;
use serde::Serialize;

use crate::config::enumeration_cap;
use crate::output::{fmt17, Outcome, Table};
use crate::{
    Command, CorrelateArgs, LimitCommand, PartitionArgs, RingCommand, SimArgs, SimCommand,
    VerifyArgs,
};

#[derive(Debug)]
pub enum CommandError {
    Usage(String),
    Library(Error),
}

impl From<Error> for CommandError {
    fn from(e: Error) -> Self {
        CommandError::Library(e)
    }
}

type CmdResult = Result<Outcome, CommandError>;

pub fn dispatch(command: &Command) -> CmdResult {
    match command {
        Command::Partition(a) => partition(a),
        Command::Correlate(a) => correlate(a),
        Command::Limit { command } => limit(command),
        Command::Ring { command } => ring(command),
        Command::Sim { command } => sim(command),
        Command::Verify(a) => verify(a),
    }
}

fn cap() -> Result<usize, CommandError> {
    enumeration_cap().map_err(CommandError::Usage)
}

#[derive(Serialize)]
struct SectorRow {
    theta1: u8,
    theta2: u8,
    c: f64,
    log_abs_det: f64,
    det_phase: [f64; 2],
    /// `C_θ det K_θ / Z`.
    share: f64,
}

#[derive(Serialize)]
struct BruteForce {
    generalised: f64,
    coarse: f64,
    residual: f64,
    tolerance: f64,
    passed: bool,
}

#[derive(Serialize)]
struct PartitionResult {
    shape: TorusShape,
    params: Params,
    z: f64,
    sectors: Vec<SectorRow>,
    check: Option<BruteForce>,
}

fn partition(a: &PartitionArgs) -> CmdResult {
    let shape = a.shape.shape()?;
    let params = a.weights.params();
    let z = partition_function(shape, &params)?;
    let w = SectorWeights::compute(shape, &params)?;
    let sectors = fibsnake::kasteleyn::ThetaSector::ALL
        .iter()
        .enumerate()
        .map(|(i, s)| SectorRow {
            theta1: s.theta1,
            theta2: s.theta2,
            c: w.c[i],
            log_abs_det: w.dets[i].log_abs,
            det_phase: [w.dets[i].phase.re, w.dets[i].phase.im],
            share: w.lambda(i).re,
        })
        .collect();
    let check = if a.check {
        let (generalised, coarse) = brute_force_partition_pair(shape, &params, cap()?)?;
        let residual = (z - generalised).abs().max((z - coarse).abs()) / z.abs().max(1.0);
        Some(BruteForce {
            generalised,
            coarse,
            residual,
            tolerance: a.tol,
            passed: residual <= a.tol,
        })
    } else {
        None
    };
    let breach = check.as_ref().is_some_and(|c| !c.passed);
    let result = PartitionResult {
        shape,
        params,
        z,
        sectors,
        check,
    };
    Ok(Outcome::new("partition", &result).breach(breach))
}

#[derive(Serialize)]
struct CorrelateResult {
    shape: TorusShape,
    params: Params,
    events: Vec<Event>,
    theta2: Option<u8>,
    value: f64,
    sectors: Vec<SectorContribution>,
    words: usize,
    check: Option<ExhaustiveCheck>,
}

#[derive(Serialize)]
struct SectorContribution {
    theta1: u8,
    theta2: u8,
    contribution: [f64; 2],
}

#[derive(Serialize)]
struct ExhaustiveCheck {
    exhaustive: f64,
    residual: f64,
    tolerance: f64,
    passed: bool,
}

fn correlate(a: &CorrelateArgs) -> CmdResult {
    let shape = a.shape.shape()?;
    let params = a.weights.params();
    let query = EventQuery::new(a.events.clone());
    let (value, sectors, words) = match a.theta2 {
        Some(t2) => (sector_measure(t2, shape, &params, &query)?, Vec::new(), 0),
        None => {
            let r = correlation_report(shape, &params, &query)?;
            let sectors = r
                .sectors
                .iter()
                .map(|s| SectorContribution {
                    theta1: s.sector.theta1,
                    theta2: s.sector.theta2,
                    contribution: [s.contribution.re, s.contribution.im],
                })
                .collect();
            (r.value, sectors, r.words.len())
        }
    };
    let check = if a.check {
        let exhaustive = PureMeasure::new(shape, &params, cap()?)?.probability(&a.events);
        let residual = (value - exhaustive).abs();
        Some(ExhaustiveCheck {
            exhaustive,
            residual,
            tolerance: a.tol,
            passed: residual <= a.tol,
        })
    } else {
        None
    };
    let breach = check.as_ref().is_some_and(|c| !c.passed);
    let result = CorrelateResult {
        shape,
        params,
        events: a.events.clone(),
        theta2: a.theta2,
        value,
        sectors,
        words,
        check,
    };
    Ok(Outcome::new("correlate", &result).breach(breach))
}

#[derive(Serialize)]
struct ArcResult {
    beta: f64,
    gamma: f64,
    delta: f64,
    geometry: ArcGeometry,
    /// Right steps per column for parity 0 and 1 of `w^n = ±1`.
    occupation: Option<[Option<usize>; 2]>,
}

fn limit(command: &LimitCommand) -> CmdResult {
    match command {
        LimitCommand::Cylinder {
            ell,
            n,
            gamma,
            delta,
            events,
        } => {
            let spec = CylinderKernelSpec::new(*ell, *n, *gamma, *delta)?;
            let value = cylinder_correlation(&spec, &EventQuery::new(events.clone()))?;
            Ok(Outcome::new(
                "limit cylinder",
                &serde_json::json!({
                    "ell": ell, "n": n, "gamma": gamma, "delta": delta,
                    "events": events, "value": value,
                }),
            ))
        }
        LimitCommand::Plane {
            tau,
            gamma,
            delta,
            events,
            tol,
        } => {
            let mut spec = PlaneKernelSpec::new(*tau, *gamma, *delta)?;
            if let Some(t) = tol {
                spec = spec.with_tol(*t);
            }
            let (value, error) = plane_correlation(&spec, &EventQuery::new(events.clone()))?;
            Ok(Outcome::new(
                "limit plane",
                &serde_json::json!({
                    "tau": tau, "gamma": gamma, "delta": delta,
                    "events": events, "value": value, "error_estimate": error,
                }),
            ))
        }
        LimitCommand::Arc {
            beta,
            gamma,
            delta,
            n,
        } => {
            if 4.0 * gamma * delta > 1.0 || *gamma < 0.0 || *delta < 0.0 {
                return Err(Error::OutsideRegime.into());
            }
            let result = ArcResult {
                beta: *beta,
                gamma: *gamma,
                delta: *delta,
                geometry: arc_geometry(*beta, *gamma, *delta),
                occupation: n.map(|n| {
                    [0, 1].map(|parity| occupation_from_beta(*beta, *gamma, *delta, n, parity))
                }),
            };
            Ok(Outcome::new("limit arc", &result))
        }
    }
}

fn walkers(n: usize, list: &str) -> Result<WalkerConfig, CommandError> {
    let positions = list
        .split(',')
        .map(|p| {
            p.trim()
                .parse::<usize>()
                .map_err(|_| CommandError::Usage(format!("bad site '{p}' in '{list}'")))
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(WalkerConfig::new(n, positions)?)
}

fn ring(command: &RingCommand) -> CmdResult {
    match command {
        RingCommand::Kernel {
            n,
            ell,
            x,
            y,
            time,
            rates,
        } => {
            let r = rates.rates()?;
            if *n == 0 {
                return Err(CommandError::Usage("n must be positive".into()));
            }
            let value = km_kernel(*n, *ell, r, *x, *y, *time);
            Ok(Outcome::new(
                "ring kernel",
                &serde_json::json!({
                    "n": n, "ell": ell, "x": x, "y": y, "time": time,
                    "rates": r, "value": value,
                }),
            ))
        }
        RingCommand::Transition {
            n,
            from,
            to,
            time,
            rates,
        } => {
            let r = rates.rates()?;
            let (x, y) = (walkers(*n, from)?, walkers(*n, to)?);
            let survival = noncollision_det(&x, &y, r, *time)?;
            let conditioned = conditioned_transition(&x, &y, r, *time)?;
            Ok(Outcome::new(
                "ring transition",
                &serde_json::json!({
                    "from": x, "to": y, "time": time, "rates": r,
                    "noncollision": survival, "conditioned": conditioned,
                }),
            ))
        }
        RingCommand::Stationary { n, ell } => {
            let states = all_states(*n, *ell)?;
            let mut table = Table::new(&["state", "probability", "traffic"]);
            let mut rows = Vec::new();
            for s in &states {
                let p = stationary_prob(s);
                table.push(vec![s.to_string(), fmt17(p), traffic(s).to_string()]);
                rows.push(serde_json::json!({
                    "state": s, "probability": p, "traffic": traffic(s),
                }));
            }
            let total: f64 = states.iter().map(stationary_prob).sum();
            Ok(Outcome::new(
                "ring stationary",
                &serde_json::json!({ "n": n, "ell": ell, "total": total, "states": rows }),
            )
            .with_table(table))
        }
        RingCommand::Rates { n, state, rates } => {
            let r = rates.rates()?;
            let h = walkers(*n, state)?;
            let mut rows = Vec::new();
            let mut total = 0.0;
            for (j, &pos) in h.positions().iter().enumerate() {
                let up = conditioned_rate(&h, j, true, r);
                let down = conditioned_rate(&h, j, false, r);
                total += up + down;
                rows.push(serde_json::json!({
                    "walker": j, "site": pos, "up": up, "down": down,
                }));
            }
            Ok(Outcome::new(
                "ring rates",
                &serde_json::json!({ "state": h, "rates": r, "total": total, "walkers": rows }),
            ))
        }
        RingCommand::Correlate {
            n,
            ell,
            events,
            rates,
        } => {
            let r = rates.rates()?;
            let value = spacetime_correlation(*ell, *n, r, events)?;
            Ok(Outcome::new(
                "ring correlate",
                &serde_json::json!({
                    "n": n, "ell": ell, "rates": r, "events": events, "value": value,
                }),
            ))
        }
        RingCommand::CheckGenerator { n, ell, rates, tol } => {
            let r = rates.rates()?;
            let rows = generator_table(*n, *ell, r)?;
            let worst = rows.iter().map(|row| row.residual).fold(0.0, f64::max);
            let mut table = Table::new(&["state", "lhs", "rhs", "residual"]);
            for row in &rows {
                table.push(vec![
                    row.state.to_string(),
                    fmt17(row.lhs),
                    fmt17(row.rhs),
                    fmt17(row.residual),
                ]);
            }
            Ok(Outcome::new(
                "ring check-generator",
                &serde_json::json!({
                    "n": n, "ell": ell, "rates": r, "max_residual": worst,
                    "tolerance": tol, "passed": worst <= *tol, "states": rows,
                }),
            )
            .with_table(table)
            .breach(worst > *tol))
        }
        RingCommand::Markov {
            n,
            ell,
            times,
            rates,
            tol,
        } => {
            let r = rates.rates()?;
            let t: Vec<f64> = times
                .split(',')
                .map(|s| s.trim().parse::<f64>())
                .collect::<Result<_, _>>()
                .map_err(|_| CommandError::Usage(format!("bad times '{times}'")))?;
            let [t1, t2, t3] = t[..] else {
                return Err(CommandError::Usage("expected three times".into()));
            };
            let report = markov_check(*ell, *n, r, [t1, t2, t3])?;
            let breach = report.residual > *tol;
            Ok(Outcome::new(
                "ring markov",
                &serde_json::json!({
                    "n": n, "ell": ell, "rates": r, "times": [t1, t2, t3],
                    "report": report, "tolerance": tol, "passed": !breach,
                }),
            )
            .breach(breach))
        }
    }
}

#[derive(Serialize)]
struct StateEstimate {
    state: WalkerConfig,
    estimate: f64,
    stderr: f64,
}

fn sim(command: &SimCommand) -> CmdResult {
    let (dynamics, a) = match command {
        SimCommand::Free(a) => (Dynamics::Free, a),
        SimCommand::Conditioned(a) => (Dynamics::Conditioned, a),
        SimCommand::Asep(a) => (Dynamics::Asep, a),
    };
    let spec = sim_spec(dynamics, a)?;
    let name = format!("sim {dynamics:?}").to_lowercase();
    let ell = match &spec.start {
        StartLaw::Fixed(x) => x.ell(),
        StartLaw::Stationary { ell, .. } | StartLaw::Uniform { ell, .. } => *ell,
    };
    if a.paths == 1 {
        let table_states = spec.start_distribution()?;
        let path = spec.replica(a.seed, 0, &table_states);
        let mut table = Table::new(&["time", "particle", "dir"]);
        for j in &path.jumps {
            table.push(vec![
                fmt17(j.time),
                j.particle.to_string(),
                j.dir.to_string(),
            ]);
        }
        let final_positions = path.positions_at(path.horizon);
        return Ok(Outcome::new(
            &name,
            &serde_json::json!({
                "seed": a.seed, "path": path, "final_positions": final_positions,
            }),
        )
        .with_table(table));
    }
    let states = all_states(a.n, ell)?;
    let sv = states.clone();
    let rates = spec.rates;
    let horizon = spec.horizon;
    let extra = |p: &PathRecord| -> f64 {
        match dynamics {
            Dynamics::Free => p.tau.is_none() as u8 as f64,
            Dynamics::Asep => unit_mean_martingale_at(p, rates, horizon).expect("exclusion path"),
            Dynamics::Conditioned => 1.0,
        }
    };
    let reps = estimate_many(
        |p| {
            let y = p.final_config();
            let mut v: Vec<f64> = sv
                .iter()
                .map(|s| (Some(s) == y.as_ref()) as u8 as f64)
                .collect();
            v.push(extra(p));
            v
        },
        states.len() + 1,
        &spec,
        a.paths,
        a.seed,
    )?;
    let mut table = Table::new(&["state", "estimate", "stderr"]);
    let mut rows = Vec::new();
    for (s, r) in states.iter().zip(&reps) {
        table.push(vec![s.to_string(), fmt17(r.estimate), fmt17(r.stderr)]);
        rows.push(StateEstimate {
            state: s.clone(),
            estimate: r.estimate,
            stderr: r.stderr,
        });
    }
    let last = reps[states.len()];
    let extra_name = match dynamics {
        Dynamics::Free => "survival",
        Dynamics::Asep => "martingale_mean",
        Dynamics::Conditioned => "total",
    };
    Ok(Outcome::new(
        &name,
        &serde_json::json!({
            "seed": a.seed, "paths": a.paths, "horizon": horizon, "rates": rates,
            "start": spec.start, "final_state": rows,
            extra_name: { "estimate": last.estimate, "stderr": last.stderr },
        }),
    )
    .with_table(table))
}

fn sim_spec(dynamics: Dynamics, a: &SimArgs) -> Result<SimSpec, CommandError> {
    let start = match (&a.start, a.stationary, a.uniform) {
        (Some(s), None, None) => StartLaw::Fixed(walkers(a.n, s)?),
        (None, Some(ell), None) => StartLaw::Stationary { n: a.n, ell },
        (None, None, Some(ell)) => StartLaw::Uniform { n: a.n, ell },
        _ => {
            return Err(CommandError::Usage(
                "give exactly one of --start, --stationary, --uniform".into(),
            ))
        }
    };
    if !(a.horizon >= 0.0 && a.horizon.is_finite()) {
        return Err(CommandError::Usage(format!("bad horizon {}", a.horizon)));
    }
    let rates: RateParams = a.rates.rates()?;
    Ok(SimSpec {
        dynamics,
        start,
        rates,
        horizon: a.horizon,
    })
}

#[derive(Serialize)]
struct VerifyResult {
    suite: Suite,
    seed: u64,
    mc_paths: u64,
    passed: bool,
    criteria: Vec<CriterionReport>,
}

fn verify(a: &VerifyArgs) -> CmdResult {
    let suite: Suite = a
        .suite
        .parse()
        .map_err(|e: Error| CommandError::Usage(e.to_string()))?;
    let opts = VerifyOptions {
        seed: a.seed,
        mc_paths: a.mc_paths,
    };
    let criteria = run_suite(suite, &opts);
    for r in &criteria {
        eprintln!("{}", r.line());
    }
    let passed = criteria.iter().all(|r| r.passed);
    let mut table = Table::new(&[
        "criterion",
        "name",
        "check",
        "measured",
        "tolerance",
        "passed",
        "unattainable",
    ]);
    for r in &criteria {
        for c in &r.checks {
            table.push(vec![
                r.id.to_string(),
                r.name.clone(),
                c.name.clone(),
                fmt17(c.measured),
                fmt17(c.tolerance),
                c.passed.to_string(),
                c.unattainable.to_string(),
            ]);
        }
    }
    let result = VerifyResult {
        suite,
        seed: a.seed,
        mc_paths: a.mc_paths,
        passed,
        criteria,
    };
    Ok(Outcome::new("verify", &result)
        .with_table(table)
        .breach(!passed))
}
