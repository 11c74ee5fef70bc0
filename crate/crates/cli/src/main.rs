//! `mmc`: run, study and self-check moving morphable component optimizations.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use mmc_core::driver::{self, Design, IterationRecord, RunResult};
use mmc_core::io::{self as mio, HistorySummary, RunConfig};

#[derive(Parser, Debug)]
#[command(name = "mmc", version, about = "Multi-resolution topology optimization with moving morphable components")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Optimize one configuration.
    Run(Common),
    /// Optimize the configured problem at every ratio in `study.ratios`.
    Study(Common),
    /// Run the built-in invariant checks.
    Check(Common),
}

#[derive(Args, Debug, Clone)]
struct Common {
    /// TOML configuration; defaults apply when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory (overrides `run.output_dir`).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write zero timings so repeated runs give identical files.
    #[arg(long)]
    deterministic: bool,
    /// Worker threads (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
    /// Iteration cap (overrides `run.max_iterations`).
    #[arg(long)]
    max_iters: Option<usize>,
}

const EXIT_CAPPED: u8 = 2;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn dispatch(cmd: Command) -> Result<ExitCode> {
    match cmd {
        Command::Run(c) => {
            let (cfg, out) = prepare(&c)?;
            run(&cfg, &out)
        }
        Command::Study(c) => {
            let (cfg, out) = prepare(&c)?;
            study(&cfg, &out)
        }
        Command::Check(c) => {
            let cfg = load_config(&c)?;
            check(&cfg)
        }
    }
}

fn load_config(c: &Common) -> Result<RunConfig> {
    let mut cfg = match &c.config {
        Some(path) => {
            let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            mio::parse_config(&text).with_context(|| format!("in {}", path.display()))?
        }
        None => RunConfig::default(),
    };
    if c.deterministic {
        cfg.run.deterministic = true;
    }
    if let Some(n) = c.max_iters {
        cfg.run.max_iterations = n;
    }
    if let Some(out) = &c.out {
        cfg.run.output_dir = out.to_string_lossy().into_owned();
    }
    cfg.validate()?;
    if let Some(n) = c.threads {
        if n == 0 {
            bail!("--threads must be at least 1");
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().context("configuring the thread pool")?;
    }
    Ok(cfg)
}

fn prepare(c: &Common) -> Result<(RunConfig, PathBuf)> {
    let cfg = load_config(c)?;
    let out = PathBuf::from(&cfg.run.output_dir);
    fs::create_dir_all(&out).with_context(|| format!("creating {}", out.display()))?;
    fs::write(out.join("config.toml"), cfg.to_toml()?)?;
    Ok((cfg, out))
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path).with_context(|| format!("creating {}", path.display()))?))
}

fn write_components_file(path: &Path, design: &Design) -> Result<()> {
    let mut w = create(path)?;
    mio::write_components(&mut w, design)?;
    w.flush()?;
    Ok(())
}

fn run(cfg: &RunConfig, out: &Path) -> Result<ExitCode> {
    let problem = cfg.problem_def()?;
    let settings = cfg.run_settings();
    let initial = cfg.initial_design(&problem, &settings)?;
    write_components_file(&out.join("components_initial.txt"), &initial)?;
    let every = cfg.run.snapshot_every;
    let snapshots = out.join("snapshots");
    if every > 0 {
        fs::create_dir_all(&snapshots)?;
    }
    let mut snapshot_error = None;
    let result = driver::run_from(&problem, &settings, initial, |rec: &IterationRecord, design: &Design| {
        eprintln!("{:5} C = {:<12.6} V/V_D = {:.5}", rec.index, rec.compliance, rec.volume_fraction);
        if every > 0 && rec.index % every == 0 && snapshot_error.is_none() {
            let path = snapshots.join(format!("components_{:05}.txt", rec.index));
            snapshot_error = write_components_file(&path, design).err();
        }
    })?;
    if let Some(e) = snapshot_error {
        return Err(e);
    }
    write_outputs(cfg, out, &result)?;
    let post = result.c_post.map_or("NA".into(), |c| format!("{c:.6}"));
    let err = result.relative_error.map_or("NA".into(), |e| format!("{:.2}%", 100.0 * e));
    println!(
        "{} iterations, converged {}, c_obj {:.6}, c_post {post}, relative error {err}",
        result.iterations(),
        result.converged,
        result.c_obj
    );
    Ok(if result.converged { ExitCode::SUCCESS } else { ExitCode::from(EXIT_CAPPED) })
}

fn write_outputs(cfg: &RunConfig, out: &Path, result: &RunResult) -> Result<()> {
    let summary = HistorySummary::from_result(result);
    let mut w = create(&out.join("history.csv"))?;
    mio::write_history(&mut w, &result.records, &summary, cfg.run.deterministic)?;
    w.flush()?;
    if !cfg.run.deterministic {
        let mut w = create(&out.join("timings.csv"))?;
        mio::write_timings(&mut w, &result.records)?;
        w.flush()?;
    }
    write_components_file(&out.join("components_final.txt"), &result.design)?;
    let alpha_min = cfg.regularization.alpha_min;
    if result.grid.dim() == 2 {
        let mut w = create(&out.join("design.pgm"))?;
        mio::write_pgm(&mut w, &result.nodal_heaviside, &result.grid, alpha_min)?;
        w.flush()?;
    } else {
        let mut w = create(&out.join("design.vtk"))?;
        mio::write_vtk(&mut w, &result.grid, "heaviside", &result.nodal_heaviside)?;
        w.flush()?;
    }
    Ok(())
}

fn study(cfg: &RunConfig, out: &Path) -> Result<ExitCode> {
    let problem = cfg.problem_def()?;
    let settings = cfg.run_settings();
    let mut w = create(&out.join("study.csv"))?;
    writeln!(w, "ratio,iterations,converged,c_obj,c_post,relative_error")?;
    let mut all_converged = true;
    for &ratio in &cfg.study.ratios {
        let mut p = problem.clone();
        p.ratio = ratio;
        let initial = cfg.initial_design(&p, &settings)?;
        let r = driver::run_from(&p, &settings, initial, |_, _| {})
            .with_context(|| format!("optimizing at ratio {ratio}"))?;
        let row = driver::StudyRow::from_result(&r);
        all_converged &= row.converged;
        writeln!(
            w,
            "{},{},{},{},{},{}",
            row.ratio, row.iterations, row.converged, row.c_obj, row.c_post, row.relative_error
        )?;
        w.flush()?;
        println!(
            "ratio {:3}: {} iterations, c_obj {:.6}, c_post {:.6}, relative error {:.2}%",
            row.ratio,
            row.iterations,
            row.c_obj,
            row.c_post,
            100.0 * row.relative_error
        );
    }
    Ok(if all_converged { ExitCode::SUCCESS } else { ExitCode::from(EXIT_CAPPED) })
}

fn check(cfg: &RunConfig) -> Result<ExitCode> {
    let outcomes = driver::invariant_checks(cfg.run.seed)?;
    let mut failed = 0;
    for o in &outcomes {
        println!("{} {:<18} {}", if o.passed { "PASS" } else { "FAIL" }, o.name, o.detail);
        failed += usize::from(!o.passed);
    }
    println!("{} of {} checks passed", outcomes.len() - failed, outcomes.len());
    Ok(if failed == 0 { ExitCode::SUCCESS } else { ExitCode::FAILURE })
}
