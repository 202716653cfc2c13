use std::path::PathBuf;
use std::process::ExitCode;

use acdc_harness::config::ExperimentConfig;
use acdc_harness::error::HarnessResult;
use acdc_harness::oracle::{default_cases, degeneracy_curve, run_oracle_grid};
use acdc_harness::presets::{self, PROPORTIONS};
use acdc_harness::report::{curve_csv, emit_report, oracle_csv, pit_csv, pit_markdown, write_file};
use acdc_harness::study::{run_coverage_study, run_pit_study, CoverageReport, PitStudy};
use clap::{Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "acdc", about = "Coverage studies for approximate confidence distribution samplers")]
struct Cli {
    /// Base seed, overriding the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Number of replicates R.
    #[arg(long, global = true)]
    replicates: Option<usize>,
    /// Simulations per sampler run N.
    #[arg(long = "mc-size", global = true)]
    mc_size: Option<usize>,
    /// Output directory.
    #[arg(long, global = true, default_value = "results")]
    out: PathBuf,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one study from a TOML config.
    Run { config: PathBuf },
    /// Cauchy table rows.
    CoverageCauchy {
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=5))]
        setting: Option<u8>,
        #[arg(long)]
        proportion: Option<f64>,
    },
    /// Ricker table rows.
    CoverageRicker {
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=5))]
        setting: Option<u8>,
        #[arg(long)]
        proportion: Option<f64>,
    },
    /// Uniformity of H_n(theta0) across replicates.
    Pit {
        #[arg(long, value_enum, default_value_t = PitModel::All)]
        model: PitModel,
    },
    /// Normal-mean sampler check against the closed form, plus the acceptance-rate curve.
    OracleNormal,
}

#[derive(Clone, Copy, ValueEnum)]
enum PitModel {
    Normal,
    Scale,
    Misspecified,
    All,
}

impl Cli {
    fn apply(&self, mut cfg: ExperimentConfig) -> ExperimentConfig {
        if let Some(s) = self.seed {
            cfg.seed = s;
            cfg.sampler.seed = None;
        }
        if let Some(r) = self.replicates {
            cfg.replicates = r;
        }
        if let Some(n) = self.mc_size {
            cfg.sampler.n_sims = n;
        }
        cfg
    }
}

fn tables(
    cli: &Cli,
    stem: &str,
    settings: Vec<usize>,
    proportions: Vec<f64>,
    build: fn(usize, f64) -> HarnessResult<ExperimentConfig>,
) -> HarnessResult<()> {
    let mut reports: Vec<CoverageReport> = Vec::new();
    for s in settings {
        for &p in &proportions {
            let cfg = cli.apply(build(s, p)?);
            eprintln!("running {} (R={}, N={})", cfg.setting, cfg.replicates, cfg.sampler.n_sims);
            let report = run_coverage_study(&cfg)?;
            for arm in &report.arms {
                if let Some(e) = &arm.error {
                    eprintln!("  {:7} failed: {e}", arm.arm.label());
                    continue;
                }
                eprintln!(
                    "  {:7} coverage {:.3} (se {:.3}) median size {:.4}",
                    arm.arm.label(),
                    arm.coverage,
                    arm.coverage_se,
                    arm.median_size
                );
            }
            reports.push(report);
        }
    }
    let (csv, md) = emit_report(&reports, &cli.out, stem)?;
    println!("{}\n{}", csv.display(), md.display());
    Ok(())
}

fn write_pit(cli: &Cli, stem: &str, studies: &[PitStudy]) -> HarnessResult<()> {
    let csv = cli.out.join(format!("{stem}.csv"));
    let md = cli.out.join(format!("{stem}.md"));
    write_file(&csv, &pit_csv(studies))?;
    write_file(&md, &pit_markdown(studies))?;
    println!("{}\n{}", csv.display(), md.display());
    Ok(())
}

fn run(cli: &Cli) -> HarnessResult<()> {
    let settings = |s: Option<u8>| s.map_or_else(|| (1..=5).collect(), |s| vec![s as usize]);
    let proportions = |p: Option<f64>| p.map_or_else(|| PROPORTIONS.to_vec(), |p| vec![p]);
    match &cli.command {
        Command::Run { config } => {
            let cfg = cli.apply(ExperimentConfig::load(config)?);
            let stem = cfg.output.clone().unwrap_or_else(|| cfg.setting.clone());
            if cfg.pit.is_some() {
                write_pit(cli, &stem, &[run_pit_study(&cfg)?])
            } else {
                let (csv, md) = emit_report(&[run_coverage_study(&cfg)?], &cli.out, &stem)?;
                println!("{}\n{}", csv.display(), md.display());
                Ok(())
            }
        }
        Command::CoverageCauchy { setting, proportion } => tables(
            cli,
            "coverage_cauchy",
            settings(*setting),
            proportions(*proportion),
            presets::cauchy_setting,
        ),
        Command::CoverageRicker { setting, proportion } => tables(
            cli,
            "coverage_ricker",
            settings(*setting),
            proportions(*proportion),
            presets::ricker_setting,
        ),
        Command::Pit { model } => {
            let cfgs = match model {
                PitModel::Normal => vec![presets::pit_normal()],
                PitModel::Scale => vec![presets::pit_scale()],
                PitModel::Misspecified => vec![presets::pit_misspecified()],
                PitModel::All => vec![presets::pit_normal(), presets::pit_scale(), presets::pit_misspecified()],
            };
            let mut studies = Vec::new();
            for cfg in cfgs {
                let cfg = cli.apply(cfg);
                eprintln!("running {} (R={})", cfg.setting, cfg.replicates);
                let study = run_pit_study(&cfg)?;
                eprintln!("  KS {:.4} vs {:.4}", study.report.ks, study.report.critical);
                studies.push(study);
            }
            write_pit(cli, "pit", &studies)
        }
        Command::OracleNormal => {
            let mut cases = default_cases();
            if let Some(n) = cli.mc_size {
                cases.iter_mut().for_each(|c| c.n_sims = Some(n));
            }
            let rows = run_oracle_grid(&cases, cli.seed.unwrap_or(presets::DEFAULT_SEED))?;
            let a = cli.out.join("oracle_normal.csv");
            let b = cli.out.join("acceptance_curve.csv");
            write_file(&a, &oracle_csv(&rows))?;
            write_file(&b, &curve_csv(&degeneracy_curve()?))?;
            println!("{}\n{}", a.display(), b.display());
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let pool = rayon::ThreadPoolBuilder::new().num_threads(cli.jobs.unwrap_or(0)).build();
    let result = match pool {
        Ok(pool) => pool.install(|| run(&cli)),
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::FAILURE;
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
