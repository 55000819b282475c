//! Command dispatch: turns a validated configuration into a [`RunReport`].

use std::time::Instant;

use crate::config::RunConfig;
use crate::cournot::{nash_closed_form, two_alien_counterexample};
use crate::equilibrium::{
    construct_nash_from_fixed_point, find_symmetric_fixed_point, solve_nash_profile,
    solve_nash_symmetric, verify_equivalence, ConstructOptions, FixedPointOptions, NashOptions,
    SolverOptions,
};
use crate::error::{Error, Result};
use crate::game::{probe_unimodality, validate_group1_symmetry, GameDefinition, SYMMETRY_TOL};
use crate::minimax::{check_sion, check_sion_at, maximin_at, NestedTolerances, SionStatus};
use crate::report::{Command, CommandResult, RunReport, Timing, Verdict, VERSION};

pub fn solver_options(cfg: &RunConfig) -> SolverOptions {
    let t = &cfg.tolerances;
    let o = &cfg.options;
    let nested = NestedTolerances {
        inner_xtol: t.xtol,
        outer_xtol: t.outer_xtol,
    };
    SolverOptions {
        nash: NashOptions {
            init_group1: o.init_group1,
            init_alien: o.init_alien,
            damping: o.damping,
            max_iter: o.max_iter,
            xtol: t.xtol,
            residual_tol: t.nash_tol,
            ..NashOptions::default()
        },
        fixed_point: FixedPointOptions {
            tol: t.value_tol,
            nested,
            ..FixedPointOptions::default()
        },
        construct: ConstructOptions {
            xtol: t.xtol,
            transfer_tol: t.outer_xtol,
            residual_tol: t.nash_tol,
        },
        validation_samples: o.validation_samples,
        seed: cfg.seed,
    }
}

struct Outcome {
    verdict: Verdict,
    result: Option<CommandResult>,
    failures: Vec<String>,
    warnings: Vec<String>,
}

impl Outcome {
    fn new(result: CommandResult) -> Self {
        Self {
            verdict: Verdict::Pass,
            result: Some(result),
            failures: Vec::new(),
            warnings: Vec::new(),
        }
    }

    fn fail(&mut self, msg: impl Into<String>) {
        self.verdict = Verdict::Fail;
        self.failures.push(msg.into());
    }
}

/// Runs one command. Configuration and usage problems come back as `Err`;
/// numerical faults are recorded in the report with a `fault` verdict.
pub fn run_command(cmd: Command, cfg: &RunConfig) -> Result<RunReport> {
    let start = Instant::now();
    let mut cfg = cfg.clone();
    cfg.warnings.clear();
    let game = cfg.build_game()?;
    let outcome = match dispatch(cmd, &cfg, &game) {
        Ok(o) => o,
        Err(e) if e.is_solver_fault() => Outcome {
            verdict: Verdict::Fault,
            result: None,
            failures: vec![e.to_string()],
            warnings: Vec::new(),
        },
        Err(e) => return Err(e),
    };
    let mut warnings = cfg.warnings.clone();
    warnings.extend(outcome.warnings);
    Ok(RunReport {
        version: VERSION.to_string(),
        command: cmd,
        game: game.label().to_string(),
        config: cfg,
        verdict: outcome.verdict,
        result: outcome.result,
        failures: outcome.failures,
        warnings,
        timing: Timing {
            elapsed_ms: start.elapsed().as_secs_f64() * 1e3,
        },
    })
}

fn is_symmetric(game: &GameDefinition, cfg: &RunConfig) -> Result<bool> {
    if !game.declared_symmetric() {
        return Ok(false);
    }
    let check = validate_group1_symmetry(game, cfg.options.validation_samples, cfg.seed)?;
    Ok(check.max_deviation <= SYMMETRY_TOL)
}

fn dispatch(cmd: Command, cfg: &RunConfig, game: &GameDefinition) -> Result<Outcome> {
    let opts = solver_options(cfg);
    let mut out = match cmd {
        Command::Nash => nash(cfg, game, &opts),
        Command::Maximin => maximin(cfg, game, &opts),
        Command::Fixedpoint => fixedpoint(cfg, game, &opts),
        Command::Verify => {
            let report = verify_equivalence(game, cfg.tolerances.nash_tol, &opts)?;
            let mut out = Outcome::new(CommandResult::Verify { report: report.clone() });
            for entry in report.structure.iter().chain(&report.theorem1.checks).chain(&report.theorem2.checks) {
                if !entry.pass {
                    out.fail(format!("check {} failed (gap {:.3e}, tol {:.3e})", entry.name, entry.gap, entry.tol));
                }
            }
            out.warnings.extend(report.theorem1.diagnostics.iter().cloned());
            out.warnings.extend(report.theorem2.diagnostics.iter().cloned());
            Ok(out)
        }
        Command::Counterexample => counterexample(cfg, game, &opts),
    }?;
    if matches!(cmd, Command::Maximin | Command::Fixedpoint | Command::Verify) {
        let samples = cfg.options.validation_samples.min(SHAPE_SAMPLES);
        out.warnings.extend(probe_unimodality(game, samples, cfg.seed)?);
    }
    Ok(out)
}

/// Profiles sampled for the quasi-concavity probe.
const SHAPE_SAMPLES: usize = 50;

fn nash(cfg: &RunConfig, game: &GameDefinition, opts: &SolverOptions) -> Result<Outcome> {
    let closed_form = cfg.is_cournot().map(|p| nash_closed_form(p).x);
    let mut out = if is_symmetric(game, cfg)? {
        let eq = solve_nash_symmetric(game, &opts.nash)?;
        let profile = eq.profile(game.n());
        let payoffs = game.payoffs_at(profile.as_slice())?;
        let converged = eq.converged;
        let mut out = Outcome::new(CommandResult::Nash {
            profile: profile.into_vec(),
            payoffs,
            symmetric: Some(eq.clone()),
            general: None,
            closed_form,
        });
        if !converged {
            out.fail(format!(
                "best-response iteration did not converge (residual {:.3e} after {} iterations)",
                eq.residual, eq.iterations
            ));
        }
        if eq.at_boundary {
            out.warnings.push("a best response lies on the interval boundary".into());
        }
        if eq.plateau {
            out.warnings.push("plateau detected in a best response".into());
        }
        out
    } else {
        let eq = solve_nash_profile(game, &opts.nash)?;
        let mut out = Outcome::new(CommandResult::Nash {
            profile: eq.profile.as_slice().to_vec(),
            payoffs: eq.payoffs.clone(),
            symmetric: None,
            general: Some(eq.clone()),
            closed_form,
        });
        out.warnings.push("group 1 is not symmetric; every player was iterated".into());
        if !eq.converged {
            out.fail(format!(
                "best-response iteration did not converge (residual {:.3e} after {} iterations)",
                eq.residual, eq.iterations
            ));
        }
        out
    };
    if let (Some(cf), Some(CommandResult::Nash { profile, .. })) = (closed_form, &out.result) {
        let dev = cf.iter().zip(profile).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        if dev > cfg.tolerances.nash_tol {
            out.warnings.push(format!(
                "numeric equilibrium differs from the interior closed form by {dev:e}"
            ));
        }
    }
    Ok(out)
}

fn maximin(cfg: &RunConfig, game: &GameDefinition, opts: &SolverOptions) -> Result<Outcome> {
    let nested = opts.fixed_point.nested;
    let value_tol = cfg.tolerances.value_tol;
    let group1 = 0..game.alien();
    let (pinning, pairs) = match cfg.options.pinning {
        Some(p) => {
            if !game.group1_interval().contains(p) {
                return Err(Error::Config(format!(
                    "at `options.pinning`: {p} lies outside the group-1 interval"
                )));
            }
            let pairs = group1.map(|i| check_sion(game, i, p, value_tol, &nested)).collect::<Result<Vec<_>>>()?;
            (Some(p), pairs)
        }
        None if is_symmetric(game, cfg)? => {
            let p = solve_nash_symmetric(game, &opts.nash)?.group1_strategy;
            let pairs = group1.map(|i| check_sion(game, i, p, value_tol, &nested)).collect::<Result<Vec<_>>>()?;
            (Some(p), pairs)
        }
        None => {
            let base = solve_nash_profile(game, &opts.nash)?.profile;
            let pairs = group1.map(|i| check_sion_at(game, i, &base, value_tol, &nested)).collect::<Result<Vec<_>>>()?;
            (None, pairs)
        }
    };
    let mut out = Outcome::new(CommandResult::Maximin {
        pinning,
        pairs: pairs.clone(),
    });
    for p in &pairs {
        if !p.weak_duality_ok {
            out.fail(format!("player {}: maximin value exceeds minimax value by {:.3e}", p.player + 1, -p.gap));
        }
        match p.status {
            SionStatus::Holds => {}
            SionStatus::Fails => out.fail(format!(
                "player {}: maximin and minimax values differ by {:.3e}",
                p.player + 1,
                p.gap
            )),
            SionStatus::InconclusiveBoundary => out.warnings.push(format!(
                "player {}: an outer optimum lies on the interval boundary",
                p.player + 1
            )),
        }
        if p.plateau {
            out.warnings.push(format!("player {}: plateau detected", p.player + 1));
        }
    }
    Ok(out)
}

fn fixedpoint(cfg: &RunConfig, game: &GameDefinition, opts: &SolverOptions) -> Result<Outcome> {
    let fp = find_symmetric_fixed_point(game, &opts.fixed_point)?;
    let constructed = construct_nash_from_fixed_point(game, fp.s, &opts.construct)?;
    let profile = constructed.equilibrium.profile(game.n());
    let payoffs = game.payoffs_at(profile.as_slice())?;
    let mut out = Outcome::new(CommandResult::Fixedpoint {
        fixed_point: fp.clone(),
        constructed: constructed.clone(),
        profile: profile.into_vec(),
        payoffs,
    });
    if fp.residual > opts.fixed_point.tol {
        out.fail(format!("fixed-point residual {:.3e} exceeds {:.3e}", fp.residual, opts.fixed_point.tol));
    }
    if constructed.transfer_gap > opts.construct.transfer_tol {
        out.fail(format!(
            "alien strategies disagree by {:.3e} (tolerance {:.3e})",
            constructed.transfer_gap, opts.construct.transfer_tol
        ));
    }
    if constructed.equilibrium.residual > cfg.tolerances.nash_tol {
        out.fail(format!(
            "constructed profile is not a Nash equilibrium (residual {:.3e})",
            constructed.equilibrium.residual
        ));
    }
    if fp.at_boundary {
        out.warnings.push("fixed point lies on the interval boundary".into());
    }
    Ok(out)
}

fn counterexample(cfg: &RunConfig, game: &GameDefinition, opts: &SolverOptions) -> Result<Outcome> {
    let params = cfg.is_cournot().ok_or_else(|| {
        Error::Config("at `game`: the counterexample command needs a cournot4 game".into())
    })?;
    let cf = two_alien_counterexample(params).map_err(|e| Error::Config(format!("at `game.cournot4`: {e}")))?;

    let eq = solve_nash_profile(game, &opts.nash)?;
    let nested = opts.fixed_point.nested;
    let lower = maximin_at(game, 0, &eq.profile, &nested)?;
    let numeric_gap = (eq.profile[0] - lower.arg).abs();
    let conclusion = if cf.equivalence_fails {
        format!(
            "equivalence fails: firm A's maximin output against D is {:.10} but its Nash output is {:.10}",
            cf.maximin, cf.nash_group1
        )
    } else {
        "equivalence holds for these parameters".to_string()
    };
    let mut out = Outcome::new(CommandResult::Counterexample {
        closed_form: cf.clone(),
        numeric_nash: Some(eq.profile.as_slice().to_vec()),
        numeric_maximin: Some(lower.arg),
        numeric_gap: Some(numeric_gap),
        conclusion: conclusion.clone(),
    });
    if !eq.converged {
        out.warnings.push(format!("per-player iteration did not converge (residual {:.3e})", eq.residual));
    }
    if (numeric_gap - cf.gap).abs() > cfg.tolerances.nash_tol {
        out.warnings.push(format!(
            "numeric gap {numeric_gap:e} differs from the closed form {:.3e}",
            cf.gap
        ));
    }
    if cf.equivalence_fails {
        out.fail(conclusion);
    }
    Ok(out)
}
