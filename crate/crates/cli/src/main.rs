use std::fs::File;
use std::io::BufWriter;
use std::path::Path;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::error::ErrorKind;
use clap::{CommandFactory, Parser};
use fdp_equicorr::asymptotics::{bh_closed_form, law_for_regime, MixtureCdf, Regime};
use fdp_equicorr::experiment::{
    rate_study, run_with_workers, Check, ExperimentConfig, ExperimentSummary, Mode,
};
use fdp_equicorr::model::{sample, RhoSequence, RngStream};
use fdp_equicorr::oracle::{transform, OracleParams};
use fdp_equicorr::procedures::ThresholdProcedure;
use fdp_equicorr::VERSION;

mod args;
mod config_file;
mod report;

use args::{
    Cli, Command, FlagMap, MixtureArgs, OracleArgs, ProcedureKind, RateStudyArgs, RhoArgs, RunArgs,
    SimulateArgs, TheoryArgs,
};
use report::{ClosedForm, ConfigEcho, RateStudyEntry, RateStudyFile, SummaryFile, TheoryReport};

/// Exit status when `--check` finds a tolerance violation.
const CHECK_FAILED: u8 = 3;

fn usage(msg: impl std::fmt::Display) -> ! {
    Cli::command().error(ErrorKind::ValueValidation, msg).exit()
}

fn procedure(mix: &MixtureArgs) -> ThresholdProcedure {
    let p = match mix.procedure {
        ProcedureKind::Bh => match mix.alpha {
            Some(alpha) => ThresholdProcedure::Bh { alpha },
            None => usage("--alpha is required with --procedure bh"),
        },
        ProcedureKind::Fixed => match mix.threshold {
            Some(t) => ThresholdProcedure::FixedThreshold { t },
            None => usage("--threshold is required with --procedure fixed"),
        },
    };
    if let Err(e) = p.validate() {
        usage(e);
    }
    p
}

fn rho_sequence(rho: &RhoArgs) -> RhoSequence {
    let seq = if let Some(spec) = &rho.rho_power {
        let parsed = spec
            .split_once(',')
            .and_then(|(c, g)| Some((c.trim().parse().ok()?, g.trim().parse().ok()?)));
        match parsed {
            Some((c, gamma)) => RhoSequence::PowerLaw { c, gamma },
            None => usage(format!("--rho-power expects `c,gamma`, got `{spec}`")),
        }
    } else if let Some(theta) = rho.theta {
        RhoSequence::ThetaOverM { theta }
    } else {
        match rho.rho {
            None | Some(0.0) => RhoSequence::ThetaOverM { theta: 0.0 },
            Some(r) if r > 0.0 && r < 1.0 => RhoSequence::Fixed { rho: r },
            Some(r) => usage(format!(
                "--rho must lie in [0, 1), got {r}; use --theta for rho_m = theta/m"
            )),
        }
    };
    if let Err(e) = seq.validate() {
        usage(e);
    }
    seq
}

fn experiment_config(
    m: usize,
    mix: &MixtureArgs,
    rho_seq: RhoSequence,
    mode: Mode,
    run: &RunArgs,
) -> ExperimentConfig {
    let config = ExperimentConfig {
        m,
        pi0: mix.pi0,
        mu: mix.mu,
        rho_seq,
        mode,
        procedure: procedure(mix),
        replicates: run.replicates,
        seed: run.seed,
        m_grid: None,
    };
    if let Err(e) = config.validate() {
        usage(e);
    }
    config
}

fn theory(args: &TheoryArgs) -> Result<ExitCode> {
    let procedure = procedure(&args.mixture);
    let cdf = MixtureCdf::new(args.mixture.pi0, args.mixture.mu).unwrap_or_else(|e| usage(e));
    let regime = if args.case_ii {
        Regime::CaseII
    } else {
        if args.theta < -1.0 {
            usage(format!("--theta must be >= -1, got {}", args.theta));
        }
        Regime::CaseI { theta: args.theta }
    };
    let law = law_for_regime(&cdf, &procedure, regime)?;
    let c2 = law.c_t * law.c_t;
    let theta = if args.case_ii { 0.0 } else { args.theta };
    let closed_form = match procedure {
        ThresholdProcedure::Bh { alpha } => {
            let cf = bh_closed_form(cdf.pi0, alpha, law.t_star);
            Some(ClosedForm {
                sigma2_t: cf.sigma2,
                c2_t: cf.c2,
                variance: if args.case_ii {
                    cf.c2
                } else {
                    cf.sigma2 + theta * cf.c2
                },
                rel_err_sigma2_t: ((law.sigma2_t - cf.sigma2) / cf.sigma2).abs(),
                rel_err_c2_t: ((c2 - cf.c2) / cf.c2).abs(),
            })
        }
        ThresholdProcedure::FixedThreshold { .. } => None,
    };
    let flags = args.echo();
    let out = TheoryReport {
        version: VERSION,
        command: "theory",
        flags: flags.clone(),
        procedure,
        regime,
        t_star: law.t_star,
        center: law.center,
        c_t: law.c_t,
        c2_t: c2,
        sigma2_t: law.sigma2_t,
        variance: law.variance,
        rate: law.rate_exponent_description.clone(),
        variance_case_i: law.sigma2_t + theta * c2,
        variance_case_ii: c2,
        closed_form,
    };
    println!("{}", serde_json::to_string_pretty(&out)?);
    if let Some(dir) = &args.out {
        report::ensure_dir(dir)?;
        report::write_json(&dir.join("theory.json"), &out)?;
        write_config_echo(dir, "theory", &flags, None)?;
    }
    Ok(ExitCode::SUCCESS)
}

fn write_config_echo(
    dir: &Path,
    command: &'static str,
    flags: &FlagMap,
    experiment: Option<&ExperimentConfig>,
) -> Result<()> {
    let echo = ConfigEcho {
        version: VERSION,
        command,
        flags,
        experiment,
    };
    report::write_json(&dir.join("config.json"), &echo)
}

fn report_checks(checks: &[Check], enforce: bool) -> ExitCode {
    let failed: Vec<&Check> = checks.iter().filter(|c| !c.passed).collect();
    for c in &failed {
        eprintln!("check {} failed: {} > {}", c.name, c.value, c.bound);
    }
    if enforce && !failed.is_empty() {
        ExitCode::from(CHECK_FAILED)
    } else {
        ExitCode::SUCCESS
    }
}

fn describe(s: &ExperimentSummary) {
    let opt = |v: Option<f64>| v.map_or("-".to_string(), |x| format!("{x:.4}"));
    eprintln!(
        "m={} rho_m={} R={} mean_fdp={:.6} var_scaled={} theory={} ratio={} ks={}",
        s.m,
        s.rho_m,
        s.replicates,
        s.mean_fdp,
        opt(s.var_scaled),
        opt(s.theory_variance),
        opt(s.variance_ratio),
        opt(s.ks_statistic),
    );
    if let Some(note) = &s.theory_note {
        eprintln!("warning: no asymptotic law: {note}");
    }
}

/// Shared tail of `simulate` and `oracle`.
fn run_single(
    command: &'static str,
    config: &ExperimentConfig,
    flags: &FlagMap,
    run: &RunArgs,
    dump_sample: bool,
) -> Result<ExitCode> {
    let summary = run_with_workers(config, run.workers)?;
    let dir = &run.out;
    report::ensure_dir(dir)?;
    report::write_csv(&dir.join("replicates.csv"), &summary.records)?;
    let checks = summary.checks();
    report::write_json(
        &dir.join("summary.json"),
        &SummaryFile {
            version: VERSION,
            command,
            config,
            summary: &summary,
            checks: checks.clone(),
        },
    )?;
    write_config_echo(dir, command, flags, Some(config))?;
    if dump_sample {
        let params = config.model_params()?;
        let mut s = sample(&params, RngStream::new(config.seed, 0))?;
        if config.mode == Mode::Oracle {
            s = transform(&s, &OracleParams::new(params)?)?;
        }
        let path = dir.join("sample.csv");
        let file = File::create(&path).with_context(|| format!("creating {}", path.display()))?;
        s.write_csv(BufWriter::new(file))?;
    }
    describe(&summary);
    eprintln!("wrote {}", dir.display());
    Ok(report_checks(&checks, run.check))
}

fn simulate(args: &SimulateArgs) -> Result<ExitCode> {
    let seq = rho_sequence(&args.rho);
    let mode = if args.oracle {
        if !matches!(seq, RhoSequence::Fixed { .. }) {
            usage("--oracle needs a fixed --rho in (0, 1)");
        }
        Mode::Oracle
    } else {
        Mode::Plain
    };
    let config = experiment_config(args.m, &args.mixture, seq, mode, &args.run);
    run_single(
        "simulate",
        &config,
        &args.echo(),
        &args.run,
        args.dump_sample,
    )
}

fn oracle(args: &OracleArgs) -> Result<ExitCode> {
    if !(args.rho > 0.0 && args.rho < 1.0) {
        usage(format!("--rho must lie in (0, 1), got {}", args.rho));
    }
    let seq = RhoSequence::Fixed { rho: args.rho };
    let config = experiment_config(args.m, &args.mixture, seq, Mode::Oracle, &args.run);
    run_single("oracle", &config, &args.echo(), &args.run, args.dump_sample)
}

fn rate(args: &RateStudyArgs) -> Result<ExitCode> {
    let grid = &args.m_grid;
    if grid.len() < 3 {
        usage(format!(
            "--m-grid needs at least 3 values, got {}",
            grid.len()
        ));
    }
    if grid.windows(2).any(|w| w[0] >= w[1]) {
        usage("--m-grid must be strictly increasing");
    }
    let seq = rho_sequence(&args.rho);
    let mut config = experiment_config(
        grid[grid.len() - 1],
        &args.mixture,
        seq,
        Mode::Plain,
        &args.run,
    );
    for &m in grid {
        if let Err(e) = config.params_at(m) {
            usage(format!("m = {m}: {e}"));
        }
    }
    config.m_grid = Some(grid.clone());

    let results = rate_study(&config, args.run.workers)?;
    let dir = &args.run.out;
    report::ensure_dir(dir)?;
    report::write_csv(
        &dir.join("rate_study.csv"),
        results.iter().map(|(row, _)| row),
    )?;
    let checks = results.last().map(|(_, s)| s.checks()).unwrap_or_default();
    let rows = results
        .iter()
        .map(|(row, s)| RateStudyEntry {
            row,
            center: s.center,
            mc_se_variance: s.mc_se_variance,
            theory: s.theory.as_ref(),
            theory_note: s.theory_note.as_deref(),
        })
        .collect();
    report::write_json(
        &dir.join("rate_study.json"),
        &RateStudyFile {
            version: VERSION,
            command: "rate-study",
            config: &config,
            rows,
            checks: checks.clone(),
        },
    )?;
    write_config_echo(dir, "rate-study", &args.echo(), Some(&config))?;
    for (_, s) in &results {
        describe(s);
    }
    eprintln!("wrote {}", dir.display());
    Ok(report_checks(&checks, args.run.check))
}

fn main() -> ExitCode {
    let argv = match config_file::expand(std::env::args_os().collect()) {
        Ok(a) => a,
        Err(e) => usage(format!("{e:#}")),
    };
    let cli = Cli::parse_from(argv);
    let result = match &cli.command {
        Command::Theory(a) => theory(a),
        Command::Simulate(a) => simulate(a),
        Command::RateStudy(a) => rate(a),
        Command::Oracle(a) => oracle(a),
    };
    result.unwrap_or_else(|e| {
        eprintln!("error: {} failed: {e:#}", cli.command.name());
        ExitCode::FAILURE
    })
}
