//! Implementations of the five subcommands.

use crate::json17::to_json_17;
use crate::manifest::RunManifest;
use crate::{
    ClassifyArgs, CliError, ContinueArgs, FamilyArg, FindArgs, GenericityArgs, SimMode,
    SimulateArgs, TolArgs,
};
use gameform::classify::{classify_point, multistart, MultistartOutcome, NewtonOptions, Tolerances};
use gameform::dynamics::{
    flow_rk4, gradient_play_discrete, time_average_observable, write_trajectory_csv, Observable,
    StepSizes, Trajectory,
};
use gameform::games::{parse_game_config, GameDefinition, JointPoint};
use gameform::linalg::l2_norm;
use gameform::perturb::{
    continuation as run_continuation, genericity_sample, ContinuationStatus, FamilySpec,
    MultistartSpec,
};
use gameform::BlockDims;
use serde::Serialize;
use std::path::Path;
use std::process::ExitCode;

fn load_game(path: &Path) -> Result<GameDefinition, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::validation(format!("cannot read {}: {e}", path.display())))?;
    Ok(parse_game_config(&text)?)
}

fn parse_csv_floats(text: &str, what: &str) -> Result<Vec<f64>, CliError> {
    text.split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| CliError::validation(format!("{what}: `{s}` is not a number")))
        })
        .collect()
}

fn parse_point(game: &GameDefinition, text: &str, what: &str) -> Result<JointPoint, CliError> {
    let flat = parse_csv_floats(text, what)?;
    let dims = game.dims();
    if flat.len() != dims.total() {
        return Err(CliError::validation(format!(
            "{what}: expected {} coordinates for dims ({}, {}), got {}",
            dims.total(),
            dims.m1(),
            dims.m2(),
            flat.len()
        )));
    }
    Ok(JointPoint::from_flat(dims, &flat))
}

fn parse_pair(text: &str, what: &str) -> Result<(f64, f64), CliError> {
    let v = parse_csv_floats(text, what)?;
    if v.len() != 2 {
        return Err(CliError::validation(format!("{what}: expected exactly two values")));
    }
    Ok((v[0], v[1]))
}

impl TolArgs {
    fn resolve(&self) -> Tolerances {
        let mut t = Tolerances::default();
        if let Some(v) = self.tol_omega {
            t.tol_omega = v;
        }
        if let Some(v) = self.tol_psd {
            t.tol_psd = v;
        }
        if let Some(v) = self.tol_pd {
            t.tol_pd = v;
        }
        if let Some(v) = self.tol_det {
            t.tol_det = v;
        }
        if let Some(v) = self.tol_re {
            t.tol_re = v;
        }
        t
    }
}

pub fn classify(args: ClassifyArgs) -> Result<ExitCode, CliError> {
    let game = load_game(&args.game)?;
    let point = parse_point(&game, &args.point, "--point")?;
    let report = classify_point(&game, &point, &args.tols.resolve())?;
    println!("{}", to_json_17(&report));
    Ok(ExitCode::SUCCESS)
}

#[derive(Serialize)]
struct FindFooter {
    n_seeds: usize,
    n_converged: usize,
    n_unconverged: usize,
    n_escaped: usize,
}

#[derive(Serialize)]
struct FindOutput<'a> {
    reports: &'a [gameform::classify::CriticalPointReport],
    footer: FindFooter,
}

pub fn find(args: FindArgs) -> Result<ExitCode, CliError> {
    let game = load_game(&args.game)?;
    let (lo, hi) = parse_pair(&args.r#box, "--box")?;
    let out: MultistartOutcome = multistart(
        &game,
        lo,
        hi,
        args.seeds,
        args.rng_seed,
        &NewtonOptions::default(),
        &args.tols.resolve(),
    )?;
    let doc = FindOutput {
        reports: &out.reports,
        footer: FindFooter {
            n_seeds: out.n_seeds,
            n_converged: out.n_converged,
            n_unconverged: out.n_unconverged,
            n_escaped: out.n_escaped,
        },
    };
    println!("{}", to_json_17(&doc));
    Ok(ExitCode::SUCCESS)
}

#[derive(Serialize)]
struct SimulationSummary {
    time_average: Vec<f64>,
    final_observable: Vec<f64>,
    final_point: JointPoint,
    initial_norm: f64,
    final_norm: f64,
    iterations_completed: usize,
    truncated_at: Option<usize>,
}

pub fn simulate(args: SimulateArgs) -> Result<ExitCode, CliError> {
    let game = load_game(&args.game)?;
    let x0 = parse_point(&game, &args.x0, "--x0")?;
    let observable = match &args.observable {
        Some(name) => Some(Observable::by_name(name, &game)?),
        None => None,
    };

    let mut manifest = RunManifest::new("simulate", &args.game.display().to_string());
    manifest.param("x0", &args.x0).param("record_every", args.record_every);
    if let Some(name) = &args.observable {
        manifest.param("observable", name);
    }

    let traj: Trajectory = match args.mode {
        SimMode::Discrete => {
            let gamma_text = args
                .gamma
                .as_deref()
                .ok_or_else(|| CliError::validation("discrete mode requires --gamma"))?;
            if args.iters.is_none() {
                return Err(CliError::validation("discrete mode requires --iters"));
            }
            if args.dt.is_some() || args.t_final.is_some() {
                return Err(CliError::validation(
                    "--dt/--t-final only apply to rk4 mode",
                ));
            }
            let rates = parse_csv_floats(gamma_text, "--gamma")?;
            let steps = match rates.as_slice() {
                [g] => StepSizes::uniform(*g)?,
                [g1, g2] => StepSizes::new(*g1, *g2)?,
                _ => return Err(CliError::validation("--gamma expects G or G1,G2")),
            };
            let iters = args.iters.unwrap();
            manifest
                .param("mode", "discrete")
                .param("gamma1", steps.gamma1)
                .param("gamma2", steps.gamma2)
                .param("iters", iters);
            gradient_play_discrete(&game, &x0, steps, iters, args.record_every)?
        }
        SimMode::Rk4 => {
            let dt =
                args.dt.ok_or_else(|| CliError::validation("rk4 mode requires --dt"))?;
            let t_final = args
                .t_final
                .ok_or_else(|| CliError::validation("rk4 mode requires --t-final"))?;
            if args.gamma.is_some() || args.iters.is_some() {
                return Err(CliError::validation("--gamma/--iters only apply to discrete mode"));
            }
            manifest.param("mode", "rk4").param("dt", dt).param("t_final", t_final);
            flow_rk4(&game, &x0, dt, t_final, args.record_every)?
        }
    };

    let file = std::fs::File::create(&args.out)
        .map_err(|e| CliError::validation(format!("cannot create {}: {e}", args.out.display())))?;
    write_trajectory_csv(&traj, observable.as_ref(), std::io::BufWriter::new(file))?;
    manifest.write_next_to(&args.out)?;

    if args.summary {
        let obs = observable.unwrap_or(Observable::Identity);
        let summary = SimulationSummary {
            time_average: time_average_observable(&traj, &obs),
            final_observable: obs.apply(traj.final_point()),
            final_point: traj.final_point().clone(),
            initial_norm: l2_norm(&traj.points[0].to_flat()),
            final_norm: l2_norm(&traj.final_point().to_flat()),
            iterations_completed: *traj.steps.last().expect("non-empty"),
            truncated_at: traj.nonfinite_at,
        };
        println!("{}", to_json_17(&summary));
    }

    // a trajectory cut short by non-finite values is a numerical failure,
    // though the truncated CSV above is still written for inspection
    if let Some(k) = traj.nonfinite_at {
        return Err(CliError::Numerical(format!(
            "trajectory became non-finite at iteration {k}"
        )));
    }
    Ok(ExitCode::SUCCESS)
}

pub fn continuation(args: ContinueArgs) -> Result<ExitCode, CliError> {
    let game = load_game(&args.game)?;
    let pert = load_game(&args.perturb)?;
    let x0 = parse_point(&game, &args.x0, "--x0")?;
    let path = run_continuation(
        &game,
        &pert,
        &x0,
        args.t_max,
        args.steps,
        &NewtonOptions::default(),
        &args.tols.resolve(),
    )?;
    println!("{}", to_json_17(&path));
    if matches!(path.status, ContinuationStatus::CorrectorFailed { .. }) {
        return Err(CliError::Numerical("continuation corrector failed".into()));
    }
    Ok(ExitCode::SUCCESS)
}

pub fn genericity(args: GenericityArgs) -> Result<ExitCode, CliError> {
    let dims_v = parse_csv_floats(&args.dims, "--dims")?;
    if dims_v.len() != 2 || dims_v.iter().any(|v| v.fract() != 0.0 || *v < 1.0) {
        return Err(CliError::validation("--dims expects two positive integers M1,M2"));
    }
    let dims = BlockDims::new(dims_v[0] as usize, dims_v[1] as usize)?;
    let spec = match args.family {
        FamilyArg::RandomQuadraticPd => FamilySpec::RandomQuadraticPd { dims },
        FamilyArg::RandomPolynomial => FamilySpec::RandomPolynomial {
            dims,
            degree: args.degree,
            coeff_scale: args.coeff_scale,
        },
    };
    let (lo, hi) = parse_pair(&args.r#box, "--box")?;
    let ms = MultistartSpec {
        box_lo: lo,
        box_hi: hi,
        n_seeds: args.seeds,
        newton: NewtonOptions::default(),
    };
    let stats = genericity_sample(&spec, args.n, args.rng_seed, &ms, &args.tols.resolve())?;
    println!("{}", to_json_17(&stats));
    if args.strict && stats.n_degenerate > 0 {
        eprintln!("strict mode: {} degenerate critical points found", stats.n_degenerate);
        return Ok(ExitCode::from(1));
    }
    Ok(ExitCode::SUCCESS)
}
