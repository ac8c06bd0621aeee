use std::fs::{self, File};
use std::io::{BufReader, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use lnmix::distributions::derive_seed;
use lnmix::draws::Draws;
use lnmix::gb2::{run_gb2_chain, Gb2ChainConfig};
use lnmix::inference::{build_report, Grid, ReportOptions};
use lnmix::model::{simulate_grouped, GroupedData};
use lnmix::persist::{write_atomic, write_json_atomic};
use lnmix::rjmcmc::{run_chain, PriorConfig, RunConfig};

use crate::spec::{read_toml, SimulationSpec};
use crate::{ChainArgs, FitArgs, FitGb2Args, ReportArgs, SimulateArgs};

pub fn simulate(args: &SimulateArgs) -> Result<()> {
    let spec: SimulationSpec = read_toml(&args.spec)?;
    let dgp = spec.dgp.to_dgp().context("invalid [dgp] table")?;
    let sim = simulate_grouped(&dgp, spec.n, spec.groups, args.seed)?;
    write_atomic(&args.out, |out| sim.data.write_csv(out))?;
    if !args.no_raw {
        let raw_path = args.raw.clone().unwrap_or_else(|| args.out.with_extension("raw.csv"));
        write_atomic(&raw_path, |out| {
            writeln!(out, "income")?;
            for x in &sim.raw {
                writeln!(out, "{x}")?;
            }
            Ok(())
        })?;
    }
    eprintln!(
        "wrote {} ({} groups, n = {}, hash {})",
        args.out.display(),
        sim.data.groups(),
        sim.data.n_total(),
        sim.data.content_hash()
    );
    Ok(())
}

fn read_data(path: &Path) -> Result<GroupedData> {
    let file = File::open(path).with_context(|| format!("opening data {}", path.display()))?;
    GroupedData::read_csv(BufReader::new(file)).with_context(|| format!("reading data {}", path.display()))
}

fn chain_seeds(args: &ChainArgs) -> Result<Vec<u64>> {
    if args.chains == 0 {
        bail!("--chains must be at least 1");
    }
    Ok(if args.chains == 1 {
        vec![args.seed]
    } else {
        (0..args.chains).map(|i| derive_seed(args.seed, i)).collect()
    })
}

/// Run one chain per seed on its own thread. Nothing is written unless every
/// chain succeeds.
fn run_chains<F>(args: &ChainArgs, seeds: &[u64], run: F) -> Result<()>
where
    F: Fn(u64) -> lnmix::Result<Draws> + Sync,
{
    let results: Vec<lnmix::Result<Draws>> = std::thread::scope(|s| {
        let run = &run;
        let handles: Vec<_> = seeds.iter().map(|&seed| s.spawn(move || run(seed))).collect();
        handles.into_iter().map(|h| h.join().expect("chain thread panicked")).collect()
    });
    let mut chains = Vec::with_capacity(results.len());
    for (i, r) in results.into_iter().enumerate() {
        chains.push(r.with_context(|| format!("chain {} (seed {})", i + 1, seeds[i]))?);
    }
    fs::create_dir_all(&args.out).with_context(|| format!("creating {}", args.out.display()))?;
    for (i, draws) in chains.iter().enumerate() {
        let path = chain_path(&args.out, i);
        draws.write(&path)?;
        for w in &draws.meta.warnings {
            eprintln!("warning (chain {}): {w}", i + 1);
        }
        eprintln!(
            "chain {}: seed {}, {} draws in {:.1}s -> {}",
            i + 1,
            draws.meta.seed,
            draws.len(),
            draws.meta.wall_time_secs,
            path.display()
        );
    }
    Ok(())
}

fn chain_path(dir: &Path, i: usize) -> PathBuf {
    dir.join(format!("chain-{}.csv", i + 1))
}

pub fn fit(args: &FitArgs) -> Result<()> {
    let data = read_data(&args.chain.data)?;
    let prior: PriorConfig = match &args.prior {
        Some(p) => read_toml(p)?,
        None => PriorConfig::default(),
    };
    prior.validate()?;
    let base = RunConfig {
        iterations: args.chain.iterations,
        burn_in: args.chain.burn_in,
        thin: args.chain.thin,
        seed: args.chain.seed,
        initial_r: args.initial_r,
        fixed_r: args.fixed_r,
        prior_only: false,
        check_invariants: args.check_invariants,
    };
    base.validate(&prior)?;
    let seeds = chain_seeds(&args.chain)?;
    run_chains(&args.chain, &seeds, |seed| run_chain(&data, &prior, &RunConfig { seed, ..base.clone() }))
}

pub fn fit_gb2(args: &FitGb2Args) -> Result<()> {
    let data = read_data(&args.chain.data)?;
    let mut base: Gb2ChainConfig = match &args.config {
        Some(p) => read_toml(p)?,
        None => Gb2ChainConfig::default(),
    };
    base.iterations = args.chain.iterations;
    base.burn_in = args.chain.burn_in;
    base.thin = args.chain.thin;
    if let Some(step) = args.step_size {
        base.step_sizes = [step; 4];
    }
    if args.no_adapt {
        base.adapt = false;
    }
    base.validate()?;
    let seeds = chain_seeds(&args.chain)?;
    run_chains(&args.chain, &seeds, |seed| run_gb2_chain(&data, &Gb2ChainConfig { seed, ..base.clone() }))
}

pub fn report(args: &ReportArgs) -> Result<()> {
    let data = read_data(&args.data)?;
    let chains = args
        .draws
        .iter()
        .map(|p| Draws::read(p).with_context(|| format!("reading draws {}", p.display())))
        .collect::<Result<Vec<_>>>()?;
    let draws = Draws::pool(chains)?;
    let grid = args
        .grid
        .as_deref()
        .map(str::parse::<Grid>)
        .transpose()
        .context("invalid --grid")?;
    let options = ReportOptions {
        condition_r: args.condition_r,
        grid,
    };
    let out = build_report(&draws, &data, &options)?;

    fs::create_dir_all(&args.out).with_context(|| format!("creating {}", args.out.display()))?;
    write_json_atomic(&args.out.join("summary.json"), &out.report)?;
    write_atomic(&args.out.join("gini_draws.csv"), |w| {
        writeln!(w, "gini")?;
        for g in &out.gini_draws {
            writeln!(w, "{g}")?;
        }
        Ok(())
    })?;
    write_atomic(&args.out.join("r_posterior.csv"), |w| {
        writeln!(w, "R,probability")?;
        for (r, p) in out.r_posterior.probabilities() {
            writeln!(w, "{r},{p}")?;
        }
        Ok(())
    })?;
    if let Some(pred) = &out.predictive {
        write_atomic(&args.out.join("predictive.csv"), |w| {
            writeln!(w, "x,density")?;
            for (x, d) in pred {
                writeln!(w, "{x},{d}")?;
            }
            Ok(())
        })?;
    }
    for w in &out.report.warnings {
        eprintln!("warning: {w}");
    }
    let g = &out.report.gini;
    eprintln!(
        "{} draws; Gini mean {:.4} (95% [{:.4}, {:.4}]); R mode {}",
        out.report.draws,
        g.mean,
        g.ci95[0],
        g.ci95[1],
        out.r_posterior.mode()
    );
    Ok(())
}
