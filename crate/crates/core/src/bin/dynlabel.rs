use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use dynlabel::algo::grid::GridStorage;
use dynlabel::augment::AugmentPolicy;
use dynlabel::bench::format::{read_instance, read_trace, write_instance, write_trace};
use dynlabel::bench::gen::{generate, GenSpec, ModelKind};
use dynlabel::bench::plot::plot_data;
use dynlabel::bench::run::{read_records, run, write_records, RunOptions};
use dynlabel::bench::trace::{make_trace, TraceModel, TraceSpec};
use dynlabel::bench::verify::{verify, VerifyOptions};
use dynlabel::bench::{Algo, Instance, SolverConfig, Trace};
use dynlabel::{Error, Scale};

#[derive(Parser)]
#[command(name = "dynlabel", version, about = "Dynamic independent sets of map labels")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate an instance.
    Gen {
        #[arg(long, default_value = "uniform")]
        model: ModelKind,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Decimal exponent of the coordinate scale.
        #[arg(long, default_value_t = 3)]
        scale: u32,
        /// Emit rectangles with widths uniform in [1, max-width].
        #[arg(long)]
        max_width: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Generate an update trace for an instance.
    Trace {
        #[arg(long)]
        instance: PathBuf,
        /// insertion-only, deletion-only or mixed.
        #[arg(long, default_value = "mixed")]
        model: TraceModel,
        /// Number of updates.
        #[arg(long = "N", visible_alias = "updates")]
        updates: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Generative model of the instance, used for fresh insertions.
        #[arg(long, default_value = "uniform")]
        gen_model: ModelKind,
        /// Seed the instance was generated with; defaults to --seed.
        #[arg(long)]
        gen_seed: Option<u64>,
        /// Width bound for inserted rectangles.
        #[arg(long)]
        max_width: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Replay a trace and emit per-step records.
    Run {
        #[command(flatten)]
        input: Input,
        #[command(flatten)]
        solver: SolverArgs,
        /// Add the exact optimum and the ratio to the records.
        #[arg(long)]
        with_opt: bool,
        #[arg(long, default_value_t = dynlabel::oracle::DEFAULT_CAP)]
        opt_cap: usize,
        /// Compute the optimum on every n-th step only.
        #[arg(long, default_value_t = 1)]
        opt_every: usize,
        /// Time a rebuild from scratch after each step.
        #[arg(long)]
        recompute_baseline: bool,
        #[arg(long, default_value_t = 1)]
        recompute_every: usize,
        /// Leading steps applied untimed and left out of the records.
        #[arg(long, default_value_t = 0)]
        warmup: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Replay a trace and check all invariants after every step.
    Verify {
        #[command(flatten)]
        input: Input,
        #[command(flatten)]
        solver: SolverArgs,
        /// Check the approximation bound while at most this many labels are live.
        #[arg(long, default_value_t = VerifyOptions::default().opt_cap)]
        opt_cap: usize,
    },
    /// Split a records file into one series file per algorithm.
    PlotData {
        #[arg(long)]
        records: Vec<PathBuf>,
        #[arg(long)]
        out_dir: PathBuf,
    },
}

#[derive(clap::Args)]
struct Input {
    #[arg(long)]
    instance: PathBuf,
    /// Trace file; an empty trace is used when omitted.
    #[arg(long)]
    trace: Option<PathBuf>,
}

#[derive(clap::Args)]
struct SolverArgs {
    /// One or more algorithms, comma separated.
    #[arg(long, value_delimiter = ',', required = true)]
    algo: Vec<String>,
    /// Shifting parameter of grid-k and g-grid-k.
    #[arg(long, default_value_t = 2)]
    k: usize,
    #[arg(long, value_enum, default_value_t = AugmentArg::Local)]
    augment: AugmentArg,
    #[arg(long, value_enum, default_value_t = StorageArg::Hashed)]
    storage: StorageArg,
}

#[derive(Clone, Copy, ValueEnum)]
enum AugmentArg {
    Local,
    Full,
}

#[derive(Clone, Copy, ValueEnum)]
enum StorageArg {
    Hashed,
    Dense,
}

impl SolverArgs {
    fn configs(&self, scale: Scale) -> Result<Vec<SolverConfig>> {
        self.algo
            .iter()
            .map(|name| {
                let mut cfg = SolverConfig::new(Algo::parse(name, self.k)?, scale);
                cfg.augment = match self.augment {
                    AugmentArg::Local => AugmentPolicy::Local,
                    AugmentArg::Full => AugmentPolicy::Full,
                };
                cfg.storage = match self.storage {
                    StorageArg::Hashed => GridStorage::Hashed,
                    StorageArg::Dense => GridStorage::Dense,
                };
                Ok(cfg)
            })
            .collect()
    }
}

fn open(path: &Path) -> Result<BufReader<File>> {
    let f = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    Ok(BufReader::new(f))
}

fn output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => {
            let f = File::create(p).with_context(|| format!("creating {}", p.display()))?;
            Box::new(BufWriter::new(f))
        }
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn load(input: &Input) -> Result<(Instance, Trace)> {
    let inst = read_instance(open(&input.instance)?)
        .with_context(|| format!("reading {}", input.instance.display()))?;
    let trace = match &input.trace {
        Some(p) => read_trace(open(p)?, &inst.scale, inst.mode)
            .with_context(|| format!("reading {}", p.display()))?,
        None => Trace::default(),
    };
    Ok((inst, trace))
}

/// Runs the command; `Ok(false)` signals an invariant violation.
fn execute(cli: Cli) -> Result<bool> {
    match cli.cmd {
        Cmd::Gen {
            model,
            n,
            seed,
            scale,
            max_width,
            out,
        } => {
            let mut spec = GenSpec::new(model, n, seed);
            spec.scale = Scale::new(scale)?;
            spec.max_width = max_width;
            let mut w = output(out.as_deref())?;
            write_instance(&mut w, &generate(&spec))?;
            w.flush()?;
        }
        Cmd::Trace {
            instance,
            model,
            updates,
            seed,
            gen_model,
            gen_seed,
            max_width,
            out,
        } => {
            let inst = read_instance(open(&instance)?)
                .with_context(|| format!("reading {}", instance.display()))?;
            let mut source = GenSpec::new(gen_model, inst.labels.len(), gen_seed.unwrap_or(seed));
            source.max_width = max_width;
            let spec = TraceSpec {
                model,
                updates,
                seed,
                source,
            };
            let trace = make_trace(&inst, &spec)?;
            let mut w = output(out.as_deref())?;
            write_trace(&mut w, &trace, &inst.scale, inst.mode)?;
            w.flush()?;
        }
        Cmd::Run {
            input,
            solver,
            with_opt,
            opt_cap,
            opt_every,
            recompute_baseline,
            recompute_every,
            warmup,
            out,
        } => {
            let (inst, trace) = load(&input)?;
            let opts = RunOptions {
                with_opt,
                opt_cap,
                opt_every,
                recompute_baseline,
                recompute_every,
                warmup,
            };
            let runs = solver
                .configs(inst.scale)?
                .iter()
                .map(|cfg| run(&inst, &trace, cfg, &opts))
                .collect::<dynlabel::Result<Vec<_>>>()?;
            let mut w = output(out.as_deref())?;
            write_records(&mut w, &runs)?;
            w.flush()?;
        }
        Cmd::Verify {
            input,
            solver,
            opt_cap,
        } => {
            let (inst, trace) = load(&input)?;
            let opts = VerifyOptions { opt_cap };
            let mut ok = true;
            for cfg in solver.configs(inst.scale)? {
                let report = verify(&inst, &trace, &cfg, &opts)?;
                println!("{}: {report}", cfg.algo);
                ok &= report.is_ok();
            }
            return Ok(ok);
        }
        Cmd::PlotData { records, out_dir } => {
            let mut all = Vec::new();
            for p in &records {
                all.extend(
                    read_records(open(p)?).with_context(|| format!("reading {}", p.display()))?,
                );
            }
            std::fs::create_dir_all(&out_dir)
                .with_context(|| format!("creating {}", out_dir.display()))?;
            for p in plot_data(&all, &out_dir)? {
                println!("{}", p.display());
            }
        }
    }
    Ok(true)
}

fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<Error>() {
        Some(Error::Format { .. }) => 3,
        Some(Error::CapExceeded { .. }) => 4,
        _ => 1,
    }
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
