//! `cic`: rate-region bounds for finite-state compound interference
//! channels.

use clap::{Parser, ValueEnum};
use compound_ic::bounds::{bound_value, evaluate_gaussian, inner_region, outer_region, EvaluatedSystem};
use compound_ic::det::{evaluate_det, DetSystem, DiscreteDist};
use compound_ic::gap::certify_evaluated;
use compound_ic::io::{parse_channel, region_csv, region_svg, sig9, ChannelSpec};
use compound_ic::rebalance::{check_conditional, check_projected, rebalance_trace, CHECK_TOL};
use compound_ic::suite::{run_all, SuiteConfig};
use compound_ic::{Error, Result};
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Command {
    /// Inner and outer regions as CSV plus an SVG overlay.
    Region,
    /// Gap report with six-decimal deltas.
    Gap,
    /// The seeded property suite; exits nonzero on any failure.
    Verify,
    /// Optimal omega-free certificate for one direction.
    DualCert,
    /// Rebalancing steps for a supplied lifted rate vector.
    RebalanceDemo,
}

#[derive(Debug, Parser)]
#[command(name = "cic", version, about = "Inner and outer bounds for compound interference channels")]
struct Cli {
    #[arg(long, value_enum)]
    command: Command,
    /// Channel file (TOML).
    #[arg(long)]
    channel: Option<PathBuf>,
    /// Number of support directions, at least 3.
    #[arg(long, default_value_t = 37, value_parser = clap::value_parser!(u32).range(3..))]
    directions: u32,
    /// Output directory for written artifacts.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Seed for the randomized suites.
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Direction `a,b` for `dual-cert`.
    #[arg(long, value_parser = parse_pair, allow_hyphen_values = true)]
    direction: Option<(f64, f64)>,
    /// Comma-separated lifted rate vector for `rebalance-demo`: user 1
    /// levels 0..=N then user 2 levels 0..=N.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    vector: Option<Vec<f64>>,
    /// Include the one-bit gap criterion in `verify`.
    #[arg(long)]
    with_gap: bool,
}

fn parse_pair(s: &str) -> std::result::Result<(f64, f64), String> {
    let (a, b) = s.split_once(',').ok_or("expected `a,b`")?;
    let p = |x: &str| x.trim().parse::<f64>().map_err(|e| format!("`{x}`: {e}"));
    Ok((p(a)?, p(b)?))
}

fn load(path: Option<&Path>) -> Result<EvaluatedSystem> {
    let path = path.ok_or_else(|| Error::InvalidInput("--channel is required for this command".into()))?;
    let src = fs::read_to_string(path)?;
    let spec = parse_channel(&src).map_err(|e| match e {
        Error::Parse { line, column, message } => {
            Error::Parse { line, column, message: format!("{}: {message}", path.display()) }
        }
        e => e,
    })?;
    match spec {
        ChannelSpec::Gaussian(ch) => evaluate_gaussian(&ch),
        ChannelSpec::Deterministic(ch) => {
            let dist = DiscreteDist::uniform(&ch);
            evaluate_det(&DetSystem::new(ch, dist)?)
        }
    }
}

fn write(out: &Path, name: &str, body: &str) -> Result<()> {
    fs::create_dir_all(out)?;
    fs::write(out.join(name), body)?;
    Ok(())
}

fn region(cli: &Cli) -> Result<String> {
    let ev = load(cli.channel.as_deref())?;
    let dirs = cli.directions as usize;
    let inner = inner_region(&ev, dirs, true)?;
    let outer = outer_region(&ev, dirs, true)?;
    let out = cli.out.clone().unwrap_or_else(|| PathBuf::from("."));
    write(&out, "inner.csv", &region_csv(&inner, "inner"))?;
    write(&out, "outer.csv", &region_csv(&outer, "outer"))?;
    write(&out, "region.svg", &region_svg(&inner, &outer))?;
    Ok(format!(
        "inner: {} vertices, area {}\nouter: {} vertices, area {}\nwrote inner.csv, outer.csv, region.svg to {}\n",
        inner.vertices.len(),
        sig9(inner.area()),
        outer.vertices.len(),
        sig9(outer.area()),
        out.display()
    ))
}

fn gap(cli: &Cli) -> Result<String> {
    let ev = load(cli.channel.as_deref())?;
    let report = certify_evaluated(&ev, cli.directions as usize)?.report.render();
    if let Some(out) = &cli.out {
        write(out, "gap.txt", &report)?;
    }
    Ok(report)
}

fn dual_cert(cli: &Cli) -> Result<String> {
    let ev = load(cli.channel.as_deref())?;
    let (a, b) = cli.direction.ok_or_else(|| Error::InvalidInput("--direction a,b is required".into()))?;
    let bv = bound_value(&ev, a, b)
        .map_err(|e| Error::InvalidInput(format!("direction ({a}, {b}): {e}")))?;
    let mut s = format!("direction a={} b={}\n", sig9(a), sig9(b));
    for (tag, l) in bv.certificate.tags.iter().zip(&bv.certificate.lambda) {
        if *l != 0.0 {
            let _ = writeln!(s, "lambda {tag} = {}", sig9(*l));
        }
    }
    let _ = writeln!(s, "c_in = {}\nc_out = {}", sig9(bv.c_in), sig9(bv.c_out));
    Ok(s)
}

fn rebalance_demo(cli: &Cli) -> Result<String> {
    let x = cli.vector.clone().ok_or_else(|| Error::InvalidInput("--vector is required".into()))?;
    if x.len() < 4 || x.len() % 2 != 0 {
        return Err(Error::InvalidInput(format!("vector length {} is not 2(N+1)", x.len())));
    }
    let n = x.len() / 2 - 1;
    let ev = match &cli.channel {
        Some(p) => Some(load(Some(p))?),
        None => None,
    };
    if let Some(ev) = &ev {
        if ev.n_states() != n {
            return Err(Error::InvalidInput(format!("vector has {n} states, channel has {}", ev.n_states())));
        }
        check_projected(&x, &ev.sys, &ev.inner, CHECK_TOL)?;
    }
    let (y, steps) = rebalance_trace(&x, n)?;
    let fmt = |v: &[f64]| v.iter().map(|c| sig9(*c)).collect::<Vec<_>>().join(",");
    let mut s = format!("input  {}\n", fmt(&x));
    for st in &steps {
        let _ = writeln!(s, "  {st}");
    }
    let _ = writeln!(s, "output {}", fmt(&y));
    if let Some(ev) = &ev {
        check_conditional(&y, &ev.sys, &ev.inner, CHECK_TOL)?;
        s.push_str("output satisfies the guarded system\n");
    }
    Ok(s)
}

fn verify(cli: &Cli) -> Result<(String, bool)> {
    let cfg = SuiteConfig { seed: cli.seed, directions: cli.directions as usize, gap: cli.with_gap };
    let outcomes = run_all(cfg)?;
    let mut s = String::new();
    for o in &outcomes {
        let _ = writeln!(s, "{o}");
    }
    if let Some(out) = &cli.out {
        write(out, "verify.txt", &s)?;
    }
    Ok((s, outcomes.iter().all(|o| o.passed)))
}

fn run(cli: &Cli) -> Result<(String, bool)> {
    match cli.command {
        Command::Region => region(cli).map(|s| (s, true)),
        Command::Gap => gap(cli).map(|s| (s, true)),
        Command::Verify => verify(cli),
        Command::DualCert => dual_cert(cli).map(|s| (s, true)),
        Command::RebalanceDemo => rebalance_demo(cli).map(|s| (s, true)),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok((s, ok)) => {
            print!("{s}");
            if ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
