//! Subcommand implementations. Each returns the text to print and the exit
//! code instead of printing, so tests can drive them in-process.

use std::fmt::Write;
use std::path::Path;
use std::time::Instant;

use llp_match_core::csmp::{run_constrained, Run, Solution, SolveOptions};
use llp_match_core::gen::generate;
use llp_match_core::llp::Schedule;
use llp_match_core::oracle::{classify, minimum_stable, rank_vector, Class, OracleError};
use llp_match_core::sim::{check_message_bounds, simulate, AdvanceMode, SchedulerMode, SimConfig, SimError, SimOutcome};
use llp_match_core::ties::{run_strongly_stable, run_superstable};
use llp_match_core::{compile_constraints, solve_constrained, Constraint, Matching, PreferenceProfile, SolveError};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::format::{parse_instance, write_instance, FormatError, Instance};
use crate::report::{instance_digest, Outcome, OutputFormat, RenderOptions, ReportError, RunReport};
use crate::{AdvanceArg, Algorithm, Command, OutputArgs, ScheduleArg, SchedulerArg};

pub const EXIT_OK: u8 = 0;
pub const EXIT_ERROR: u8 = 1;
pub const EXIT_NONEXISTENT: u8 = 2;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Output {
    pub stdout: String,
    pub stderr: String,
    pub code: u8,
}

impl Output {
    pub fn success(stdout: String) -> Self {
        Output {
            stdout,
            stderr: String::new(),
            code: EXIT_OK,
        }
    }

    pub fn failure(stderr: String) -> Self {
        Output {
            stdout: String::new(),
            stderr,
            code: EXIT_ERROR,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{path}: {source}")]
    Format { path: String, source: FormatError },
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    Report(#[from] ReportError),
    #[error("{0}")]
    Usage(String),
}

pub fn execute(command: Command) -> Output {
    let result = match command {
        Command::Solve {
            path,
            algorithm,
            trace,
            seed,
            schedule,
            staleness,
            output,
        } => cmd_solve(&path, algorithm, trace, seed, schedule, staleness, &output),
        Command::Simulate {
            path,
            seeds,
            seed,
            scheduler,
            advance_mode,
            trace,
            output,
        } => cmd_simulate(&path, seeds, seed, scheduler, advance_mode, trace, &output),
        Command::Generate {
            n,
            tie_density,
            constraints,
            seed,
        } => cmd_generate(n, tie_density, constraints, seed).map(Output::success),
        Command::Verify {
            path,
            seed,
            seeds,
            format,
        } => cmd_verify(&path, seed, seeds, format),
    };
    result.unwrap_or_else(|e| Output::failure(format!("error: {e}\n")))
}

pub fn load(path: &Path) -> Result<Instance, CliError> {
    let shown = path.display().to_string();
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: shown.clone(),
        source,
    })?;
    parse_instance(&text).map_err(|source| CliError::Format { path: shown, source })
}

fn no_constraints(instance: &Instance, algorithm: Algorithm) -> Result<(), CliError> {
    if instance.constraints.is_empty() {
        Ok(())
    } else {
        Err(CliError::Usage(format!(
            "the {} solver takes no constraints; use --algorithm constrained or super",
            algorithm.name()
        )))
    }
}

/// Breaks every tie by a seeded shuffle within its group.
fn break_ties(profile: &PreferenceProfile, seed: u64) -> PreferenceProfile {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    profile.break_ties_with(|group| group.shuffle(&mut rng))
}

/// Runs one solver. Errors are bad input; nonexistence is an outcome.
pub fn solve_instance(
    instance: &Instance,
    algorithm: Algorithm,
    schedule: Schedule,
    seed: u64,
) -> Result<RunReport, CliError> {
    let profile = &instance.profile;
    let constraints = &instance.constraints;
    let options = SolveOptions {
        schedule,
        ..SolveOptions::default()
    };
    let start = Instant::now();
    let run: Run = match algorithm {
        Algorithm::Stable => {
            no_constraints(instance, algorithm)?;
            let mut run = run_constrained(profile, &[], options)?;
            if let Err(SolveError::NoConstrainedStableMarriage { man }) = run.outcome {
                run.outcome = Err(SolveError::NoStableMarriage { man });
            }
            run
        }
        Algorithm::Constrained => run_constrained(profile, constraints, options)?,
        Algorithm::Super => run_superstable(profile, constraints, schedule)?,
        Algorithm::Strong => {
            no_constraints(instance, algorithm)?;
            run_strongly_stable(profile)
        }
        Algorithm::Weak => {
            let rank_free = constraints.iter().all(|c| matches!(c, Constraint::Forbid { .. }));
            if !profile.is_strict() && !rank_free {
                return Err(CliError::Usage(String::from(
                    "with ties the weak solver accepts only forbid constraints, since breaking ties changes ranks",
                )));
            }
            let mut run = run_constrained(&break_ties(profile, seed), constraints, options)?;
            if let Ok(solution) = &mut run.outcome {
                solution.ranks = solution.matching.rank_vector(profile);
            }
            run
        }
    };
    let wall = start.elapsed();
    let outcome = match run.outcome {
        Ok(solution) => Outcome::Matched {
            matching: solution.matching,
            ranks: solution.ranks,
        },
        Err(e) if e.is_nonexistence() => Outcome::Nonexistent(e.to_string()),
        Err(e) => return Err(e.into()),
    };
    Ok(RunReport {
        digest: instance_digest(instance),
        solver: algorithm.name(),
        seed: (algorithm == Algorithm::Weak).then_some(seed),
        outcome,
        steps: run.trace.len(),
        trace: run.trace,
        log: Vec::new(),
        counters: None,
        wall,
    })
}

fn exit_code(report: &RunReport) -> u8 {
    if report.is_matched() {
        EXIT_OK
    } else {
        EXIT_NONEXISTENT
    }
}

fn cmd_solve(
    path: &Path,
    algorithm: Algorithm,
    trace: bool,
    seed: u64,
    schedule: ScheduleArg,
    staleness: usize,
    output: &OutputArgs,
) -> Result<Output, CliError> {
    let instance = load(path)?;
    let schedule = match schedule {
        ScheduleArg::Sequential => Schedule::Sequential,
        ScheduleArg::Parallel => Schedule::Parallel { seed },
        ScheduleArg::Stale => Schedule::Stale { seed, staleness },
    };
    let report = solve_instance(&instance, algorithm, schedule, seed)?;
    let options = RenderOptions {
        format: output.format,
        trace,
        timing: output.timing,
    };
    Ok(Output {
        stdout: report.render(&instance.profile, options)?,
        stderr: String::new(),
        code: exit_code(&report),
    })
}

/// Simulator runs for `seeds`, in seed order.
pub fn simulate_seeds(
    instance: &Instance,
    seeds: std::ops::Range<u64>,
    scheduler: SchedulerMode,
    advance_mode: AdvanceMode,
    record_log: bool,
) -> Vec<(u64, Result<RunReport, SimError>)> {
    let digest = instance_digest(instance);
    seeds
        .into_par_iter()
        .map(|seed| {
            let config = SimConfig {
                seed,
                scheduler,
                advance_mode,
                record_log,
            };
            let start = Instant::now();
            let result = simulate(&instance.profile, &instance.constraints, config).map(|sim| {
                let outcome = match sim.outcome {
                    SimOutcome::Matched { matching, ranks } => Outcome::Matched { matching, ranks },
                    SimOutcome::NoConstrainedStableMarriage { man } => Outcome::Nonexistent(
                        SolveError::NoConstrainedStableMarriage { man }.to_string(),
                    ),
                };
                RunReport {
                    digest: digest.clone(),
                    solver: "simulate",
                    seed: Some(seed),
                    outcome,
                    steps: sim.steps,
                    trace: Vec::new(),
                    log: sim.log,
                    counters: Some(sim.counters),
                    wall: start.elapsed(),
                }
            });
            (seed, result)
        })
        .collect()
}

fn same_outcome(a: &Outcome, b: &Result<Solution, SolveError>) -> bool {
    match (a, b) {
        (Outcome::Matched { matching, .. }, Ok(s)) => *matching == s.matching,
        (Outcome::Nonexistent(_), Err(e)) => e.is_nonexistence(),
        _ => false,
    }
}

fn cmd_simulate(
    path: &Path,
    seeds: u64,
    first: u64,
    scheduler: SchedulerArg,
    advance_mode: AdvanceArg,
    trace: bool,
    output: &OutputArgs,
) -> Result<Output, CliError> {
    let instance = load(path)?;
    let scheduler = match scheduler {
        SchedulerArg::Random => SchedulerMode::Random,
        SchedulerArg::Adversarial => SchedulerMode::Adversarial,
    };
    let advance_mode = match advance_mode {
        AdvanceArg::ProposeSkipped => AdvanceMode::ProposeSkipped,
        AdvanceArg::SkipSilently => AdvanceMode::SkipSilently,
        AdvanceArg::Literal => AdvanceMode::Literal,
    };
    let expected = solve_constrained(&instance.profile, &instance.constraints);
    if let Err(e) = &expected {
        if !e.is_nonexistence() {
            return Err(CliError::Solve(e.clone()));
        }
    }
    let runs = simulate_seeds(&instance, first..first + seeds, scheduler, advance_mode, trace);
    let options = RenderOptions {
        format: output.format,
        trace,
        timing: output.timing,
    };
    let n = instance.profile.n();
    let edges = compile_constraints(&instance.profile, &instance.constraints)
        .map_err(SolveError::from)?
        .edge_count();
    let (mut agree, mut bounds_ok) = (0, 0);
    let mut stdout = String::new();
    let mut stderr = String::new();
    for (seed, result) in &runs {
        match result {
            Ok(report) => {
                stdout.push_str(&report.render(&instance.profile, options)?);
                stdout.push('\n');
                if same_outcome(&report.outcome, &expected) {
                    agree += 1;
                } else {
                    let _ = writeln!(stderr, "seed {seed}: outcome differs from the sequential solver");
                }
                let counters = report.counters.expect("simulator reports carry counters");
                match check_message_bounds(&counters, n, counters.propose_fail, edges) {
                    Ok(()) => bounds_ok += 1,
                    Err(v) => {
                        let _ = writeln!(stderr, "seed {seed}: {v}");
                    }
                }
            }
            Err(e) => {
                let _ = writeln!(stderr, "seed {seed}: {e}");
            }
        }
    }
    let total = runs.len();
    let sep = match output.format {
        OutputFormat::Text => ' ',
        OutputFormat::Machine => '=',
    };
    let _ = writeln!(stdout, "runs{sep}{total}");
    let _ = writeln!(stdout, "agree{sep}{agree}/{total}");
    let _ = writeln!(stdout, "bounds_ok{sep}{bounds_ok}/{total}");
    let code = if agree != total || bounds_ok != total {
        EXIT_ERROR
    } else if expected.is_err() {
        EXIT_NONEXISTENT
    } else {
        EXIT_OK
    };
    Ok(Output { stdout, stderr, code })
}

fn cmd_generate(n: usize, tie_density: f64, constraints: usize, seed: u64) -> Result<String, CliError> {
    if n == 0 {
        return Err(CliError::Usage(String::from("--n must be at least 1")));
    }
    if !(0.0..=1.0).contains(&tie_density) {
        return Err(CliError::Usage(String::from("--tie-density must lie in [0, 1]")));
    }
    let (profile, constraints) = generate(n, tie_density, constraints, seed);
    Ok(write_instance(&Instance { profile, constraints }))
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Verdict {
    Agree(String),
    Disagree(String),
    /// The solver found nothing, which this check cannot refute.
    Inconclusive(String),
    Skipped(String),
}

fn describe(m: &Option<Matching>) -> String {
    m.as_ref().map_or_else(|| String::from("none"), Matching::to_string)
}

fn against_minimum(report: &RunReport, expected: &Option<Matching>) -> Verdict {
    let found = match &report.outcome {
        Outcome::Matched { matching, .. } => Some(matching.clone()),
        Outcome::Nonexistent(_) => None,
    };
    if found == *expected {
        Verdict::Agree(describe(&found))
    } else {
        Verdict::Disagree(format!("solver {} oracle {}", describe(&found), describe(expected)))
    }
}

fn verify_solver(instance: &Instance, algorithm: Algorithm, seed: u64) -> Result<Verdict, CliError> {
    let profile = &instance.profile;
    let constraints = &instance.constraints;
    let report = match solve_instance(instance, algorithm, Schedule::Sequential, seed) {
        Ok(report) => report,
        Err(e @ (CliError::Usage(_) | CliError::Solve(_))) => return Ok(Verdict::Skipped(e.to_string())),
        Err(e) => return Err(e),
    };
    report.validate(profile)?;
    Ok(match algorithm {
        Algorithm::Stable => against_minimum(&report, &minimum_stable(profile, &[], Class::Classic)?),
        Algorithm::Constrained => against_minimum(&report, &minimum_stable(profile, constraints, Class::Classic)?),
        Algorithm::Super => against_minimum(&report, &minimum_stable(profile, constraints, Class::Super)?),
        Algorithm::Strong => {
            let expected = minimum_stable(profile, &[], Class::Strong)?;
            match (&report.outcome, &expected) {
                (Outcome::Matched { matching, ranks }, Some(least)) => {
                    if classify(matching, profile, &[]).strongly_stable && ranks.to_vec() == rank_vector(least, profile)
                    {
                        Verdict::Agree(matching.to_string())
                    } else {
                        Verdict::Disagree(format!("solver {matching} oracle {least}"))
                    }
                }
                (Outcome::Nonexistent(_), None) => Verdict::Agree(String::from("none")),
                _ => against_minimum(&report, &expected),
            }
        }
        Algorithm::Weak => match &report.outcome {
            Outcome::Matched { matching, .. } => {
                if classify(matching, profile, constraints).is(Class::Weak) {
                    Verdict::Agree(matching.to_string())
                } else {
                    Verdict::Disagree(format!("{matching} is not weakly stable"))
                }
            }
            Outcome::Nonexistent(_) => match minimum_stable(profile, constraints, Class::Weak)? {
                None => Verdict::Agree(String::from("none")),
                Some(_) if constraints.is_empty() => Verdict::Disagree(String::from("solver found none")),
                // A different tie-break may still succeed.
                Some(_) => Verdict::Inconclusive(String::from("none for this tie-break")),
            },
        },
    })
}

fn verify_simulator(instance: &Instance, seeds: std::ops::Range<u64>) -> Result<Verdict, CliError> {
    let profile = &instance.profile;
    if !profile.is_strict() {
        return Ok(Verdict::Skipped(String::from("the protocol needs strict preferences")));
    }
    let expected = minimum_stable(profile, &instance.constraints, Class::Classic)?;
    let runs = simulate_seeds(instance, seeds, SchedulerMode::Random, AdvanceMode::ProposeSkipped, false);
    let total = runs.len();
    let mut agree = 0;
    for (seed, result) in runs {
        let report = result?;
        if against_minimum(&report, &expected) == Verdict::Agree(describe(&expected)) {
            agree += 1;
        } else {
            return Ok(Verdict::Disagree(format!("seed {seed}: oracle {}", describe(&expected))));
        }
    }
    Ok(Verdict::Agree(format!("{} in {agree}/{total} runs", describe(&expected))))
}

fn cmd_verify(path: &Path, seed: u64, seeds: u64, format: OutputFormat) -> Result<Output, CliError> {
    let instance = load(path)?;
    let n = instance.profile.n();
    if n > llp_match_core::oracle::MAX_N {
        return Err(OracleError::TooLarge { n }.into());
    }
    let mut verdicts = Vec::new();
    for algorithm in [
        Algorithm::Stable,
        Algorithm::Constrained,
        Algorithm::Super,
        Algorithm::Strong,
        Algorithm::Weak,
    ] {
        verdicts.push((algorithm.name(), verify_solver(&instance, algorithm, seed)?));
    }
    verdicts.push(("simulate", verify_simulator(&instance, seed..seed + seeds)?));

    let mut stdout = String::new();
    let mut all_agree = true;
    for (name, verdict) in &verdicts {
        let (word, detail) = match verdict {
            Verdict::Agree(d) => ("agree", d),
            Verdict::Disagree(d) => {
                all_agree = false;
                ("disagree", d)
            }
            Verdict::Inconclusive(d) => ("inconclusive", d),
            Verdict::Skipped(d) => ("skipped", d),
        };
        let _ = match format {
            OutputFormat::Text => writeln!(stdout, "{name} {word}: {detail}"),
            OutputFormat::Machine => writeln!(stdout, "{name}={word}\n{name}.detail={detail}"),
        };
    }
    let _ = match format {
        OutputFormat::Text => writeln!(stdout, "{}", if all_agree { "all agree" } else { "disagreement" }),
        OutputFormat::Machine => writeln!(stdout, "all_agree={all_agree}"),
    };
    Ok(Output {
        stdout,
        stderr: String::new(),
        code: if all_agree { EXIT_OK } else { EXIT_ERROR },
    })
}
