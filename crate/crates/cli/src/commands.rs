use crate::output::{csv_float, emit, json_string};
use crate::parse::{self, FSource};
use crate::{BcArg, ClassifyArgs, Cli, CliError, Command, CurvesArgs, Format, IntegrateArgs, OracleArgs, RodArgs, RodCommand, ScanArgs};
use serde_json::{json, Value};
use std::f64::consts::PI;
use varstab::classify::{classify_dirichlet, classify_neumann, ClassifyOptions, StabilityVerdict, Verdict};
use varstab::conjugate::{conjugate_points, fd_negative_count, inborn_eigenvalues, SlBc, SlProblem};
use varstab::par::Execution;
use varstab::phase::{integrate_ivp, BoundaryCondition, Guess, ProblemSpec, ShootOptions, Shooter, Trajectory};
use varstab::rod::{curve_grid, enumerate_equilibria, length_curves, shooting_census, RodParams};

pub fn run(cli: &Cli) -> Result<i32, CliError> {
    let out = cli.output.as_deref();
    match &cli.command {
        Command::Classify(a) => classify(a, out),
        Command::Oracle(a) => oracle(a, out),
        Command::Rod { command } => match command {
            RodCommand::Enumerate(a) => rod_enumerate(a, out),
            RodCommand::Curves(a) => rod_curves(a, out),
            RodCommand::Scan(a) => rod_scan(a, out),
        },
        Command::Integrate(a) => integrate(a, out),
    }
}

fn positive(x: f64, what: &str) -> Result<(), CliError> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(CliError::Usage(format!("{what} must be positive, got {x}")))
    }
}

fn verdict_value(v: &StabilityVerdict) -> serde_json::Map<String, Value> {
    match serde_json::to_value(v).expect("verdicts serialise") {
        Value::Object(m) => m,
        _ => unreachable!("a struct serialises to an object"),
    }
}

fn oracle_summary(traj: &Trajectory, bc: SlBc) -> Value {
    let report = SlProblem::from_trajectory(traj, bc).and_then(|p| {
        let r = conjugate_points(&p)?;
        Ok((r, fd_negative_count(&p, 400).ok()))
    });
    match report {
        Ok((r, fd)) => json!({
            "points": r.points,
            "index": r.index,
            "b_is_conjugate": r.b_is_conjugate,
            "verdict": r.verdict(),
            "fd_negative_count": fd,
        }),
        Err(e) => json!({ "error": e.to_string() }),
    }
}

fn solution_value(
    x: f64,
    traj: &Trajectory,
    spec: &ProblemSpec,
    copts: &ClassifyOptions,
    with_oracle: bool,
) -> Result<(Value, Verdict), CliError> {
    let neumann = matches!(spec.bc, BoundaryCondition::Neumann);
    let v = if neumann { classify_neumann(traj, copts)? } else { classify_dirichlet(traj, copts)? };
    let mut m = verdict_value(&v);
    let (t0, p0) = traj.start_state();
    let (t1, p1) = traj.end_state();
    m.insert("solution".into(), json!({ "parameter": x, "theta_a": t0, "p_a": p0, "theta_b": t1, "p_b": p1, "energy": traj.energy() }));
    if with_oracle {
        let bc = if neumann { SlBc::Neumann } else { SlBc::Dirichlet };
        m.insert("oracle".into(), oracle_summary(traj, bc));
    }
    Ok((Value::Object(m), v.verdict))
}

fn classify(args: &ClassifyArgs, out: Option<&std::path::Path>) -> Result<i32, CliError> {
    positive(args.tol, "--tol")?;
    if !(args.band >= 0.0) || !(args.root_tol >= 0.0) {
        return Err(CliError::Usage("--band and --root-tol must be non-negative".into()));
    }
    let pot = parse::potential(&args.potential)?;
    let (a, b) = parse::interval(&args.interval)?;
    let periodic = pot.period();
    let spec = match (&args.neumann, &args.dirichlet) {
        (Some(n), None) => ProblemSpec::neumann(pot, a, b, parse::neumann(n)?)?,
        (None, Some(d)) => {
            let (ta, tb) = parse::dirichlet(d)?;
            ProblemSpec::dirichlet(pot, a, b, ta, tb)?
        }
        _ => return Err(CliError::Usage("give exactly one of --neumann or --dirichlet".into())),
    };
    let neumann = matches!(spec.bc, BoundaryCondition::Neumann);
    if neumann && args.guess_p0.is_some() {
        return Err(CliError::Usage("--guess-p0 applies to --dirichlet; use --guess-theta0".into()));
    }
    if !neumann && args.guess_theta0.is_some() {
        return Err(CliError::Usage("--guess-theta0 applies to --neumann; use --guess-p0".into()));
    }
    let sopts = ShootOptions { tol: args.tol, xtol: args.root_tol, ..Default::default() };
    let copts = ClassifyOptions { marginal_band: args.band };
    let shooter = Shooter::new(&spec, sopts);

    let guess = match (&args.bracket, args.guess_theta0.or(args.guess_p0)) {
        (Some(br), _) => {
            let (lo, hi) = parse::interval(br)?;
            Some(Guess::Bracket(lo, hi))
        }
        (None, Some(g)) => Some(Guess::Point(g)),
        (None, None) => None,
    };
    if let Some(g) = guess {
        let (x, traj) = shooter.solve(g)?;
        let (value, verdict) = solution_value(x, &traj, &spec, &copts, args.oracle)?;
        emit(&json_string(value), out)?;
        return Ok(verdict.exit_code());
    }

    let (lo, hi) = match &args.scan_range {
        Some(r) => parse::interval(r)?,
        None if neumann && periodic.is_some() => (-PI, PI),
        None if neumann => (-5.0, 5.0),
        None => (-20.0, 20.0),
    };
    if args.scan_cells == 0 {
        return Err(CliError::Usage("--scan-cells must be at least 1".into()));
    }
    let scan = shooter.scan(lo, hi, args.scan_cells, Execution::default());
    let mut code = 0;
    let mut sols = Vec::new();
    for (x, traj) in &scan.solutions {
        // θ(a) = π and −π describe the same periodic solution
        if neumann && periodic.is_some() && args.scan_range.is_none() && *x >= PI - 1e-12 {
            continue;
        }
        let (value, verdict) = solution_value(*x, traj, &spec, &copts, args.oracle)?;
        code = code.max(verdict.exit_code());
        sols.push(value);
    }
    if sols.is_empty() {
        return Err(varstab::Error::NoRoot(format!("no solution found on [{lo}, {hi}] with {} cells", args.scan_cells)).into());
    }
    let failures: Vec<Value> = scan.failures.iter().map(|(x, e)| json!({ "parameter": x, "error": e.to_string() })).collect();
    emit(&json_string(json!({ "solutions": sols, "failures": failures })), out)?;
    Ok(code)
}

fn oracle(args: &OracleArgs, out: Option<&std::path::Path>) -> Result<i32, CliError> {
    let bc = match args.bc {
        BcArg::Dirichlet => SlBc::Dirichlet,
        BcArg::Neumann => SlBc::Neumann,
    };
    if args.fd_cells < 16 {
        return Err(CliError::Usage("--fd-cells must be at least 16".into()));
    }
    let (a, b) = parse::interval(&args.interval)?;
    let problem = match (&args.f, &args.potential) {
        (Some(f), None) => match parse::f_source(f)? {
            FSource::Constant(c) => SlProblem::constant(c, a, b, bc)?,
            FSource::Table(path) => {
                let (s, f) = parse::read_table(&path)?;
                SlProblem::tabulated(s, f, bc)?
            }
        },
        (None, Some(p)) => {
            let pot = parse::potential(p)?;
            let (Some(t0), Some(p0)) = (args.theta0, args.p0) else {
                return Err(CliError::Usage("--potential needs --theta0 and --p0".into()));
            };
            let traj = integrate_ivp(&pot, t0, p0, (a, b), 1e-10)?;
            SlProblem::from_trajectory(&traj, bc)?
        }
        _ => return Err(CliError::Usage("give --f or --potential".into())),
    };
    let report = conjugate_points(&problem)?;
    let fd = fd_negative_count(&problem, args.fd_cells)?;
    let inborn = inborn_eigenvalues(problem.f(problem.a), problem.width(), bc, args.k_max);
    let verdict = report.verdict();
    let value = json!({
        "bc": bc,
        "interval": [problem.a, problem.b],
        "points": report.points,
        "signs_at_points": report.signs_at_points,
        "index": report.index,
        "b_is_conjugate": report.b_is_conjugate,
        "verdict": verdict,
        "fd_negative_count": fd,
        "inborn_eigenvalues": inborn,
    });
    emit(&json_string(value), out)?;
    Ok(verdict.exit_code())
}

fn exec(sequential: bool) -> Execution {
    if sequential {
        Execution::Sequential
    } else {
        Execution::default()
    }
}

fn rod_enumerate(args: &RodArgs, out: Option<&std::path::Path>) -> Result<i32, CliError> {
    let params = RodParams::new(args.m, args.v).map_err(|e| CliError::Usage(e.to_string()))?;
    let eqs = enumerate_equilibria(&params, exec(args.sequential))?;
    let text = match args.format {
        Format::Json => {
            let rows: Vec<Value> = eqs
                .iter()
                .map(|q| {
                    json!({
                        "category": q.category.name(),
                        "k": q.k,
                        "e": q.e,
                        "theta0": q.theta0,
                        "energy": q.energy,
                        "verdict": q.verdict.verdict,
                        "theorem": q.verdict.theorem,
                    })
                })
                .collect();
            json_string(Value::Array(rows))
        }
        Format::Csv => {
            let mut s = String::from("category,k,e,theta0,energy,verdict,theorem\n");
            for q in &eqs {
                s.push_str(&format!(
                    "{},{},{},{},{},{},{}\n",
                    q.category.name(),
                    q.k,
                    csv_float(q.e),
                    csv_float(q.theta0),
                    csv_float(q.energy),
                    q.verdict.verdict,
                    q.verdict.theorem
                ));
            }
            s
        }
    };
    emit(&text, out)?;
    Ok(0)
}

fn rod_curves(args: &CurvesArgs, out: Option<&std::path::Path>) -> Result<i32, CliError> {
    positive(args.v, "--v")?;
    if args.emax_grid == 0 {
        return Err(CliError::Usage("--emax-grid must be at least 1".into()));
    }
    let table = length_curves(args.v, &curve_grid(args.v, args.emax_grid), args.k_max);
    emit(&table.to_csv(), out)?;
    Ok(0)
}

fn rod_scan(args: &ScanArgs, out: Option<&std::path::Path>) -> Result<i32, CliError> {
    let params = RodParams::new(args.m, args.v).map_err(|e| CliError::Usage(e.to_string()))?;
    if args.cells == 0 {
        return Err(CliError::Usage("--cells must be at least 1".into()));
    }
    let census = shooting_census(&params, args.cells, exec(args.sequential))?;
    let rows: Vec<Value> = census
        .iter()
        .map(|c| {
            json!({
                "theta0": c.theta0,
                "e": c.e,
                "energy": c.energy,
                "verdict": c.verdict.verdict,
                "theorem": c.verdict.theorem,
            })
        })
        .collect();
    emit(&json_string(Value::Array(rows)), out)?;
    Ok(0)
}

fn integrate(args: &IntegrateArgs, out: Option<&std::path::Path>) -> Result<i32, CliError> {
    positive(args.tol, "--tol")?;
    if args.samples == 0 {
        return Err(CliError::Usage("--samples must be at least 1".into()));
    }
    let pot = parse::potential(&args.potential)?;
    let (a, b) = parse::interval(&args.interval)?;
    let traj = integrate_ivp(&pot, args.theta0, args.p0, (a, b), args.tol)?;
    let mut s = String::from("s,theta,p\n");
    for x in traj.samples(args.samples) {
        s.push_str(&format!("{},{},{}\n", csv_float(x.s), csv_float(x.theta), csv_float(x.p)));
    }
    emit(&s, out)?;
    if let Some(path) = &args.events {
        let ev = serde_json::to_value(traj.events()).expect("events serialise");
        std::fs::write(path, json_string(ev))?;
    }
    Ok(0)
}
