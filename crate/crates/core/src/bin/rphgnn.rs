use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use rphgnn::cli::{cmd_bench, cmd_ledger, cmd_precompute, cmd_synth, cmd_train, RunManifest, ARCHIVE_FILE, RUN_MANIFEST_FILE};
use rphgnn::relations::Scheme;
use rphgnn::squashing::{RpStrategy, DEFAULT_P_SPARSE};
use rphgnn::synth::{academic_toy, SynthConfig};
use rphgnn::{Error, Result};

#[derive(Parser)]
#[command(name = "rphgnn", version, about = "Heterogeneous graph pre-computation and training")]
struct Cli {
    /// Worker threads; 1 gives bit-reproducible runs.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a planted-signal dataset (or the four-type toy graph).
    Synth {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 1.0)]
        signal: f64,
        #[arg(long, default_value_t = 2000)]
        papers: usize,
        #[arg(long, default_value_t = 5)]
        classes: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Write the small academic schema instead.
        #[arg(long)]
        toy: bool,
    },
    /// Pre-compute group tensors for the target type.
    Precompute {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        #[command(flatten)]
        pre: PrecomputeFlags,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Train the encoder on an archive.
    Train {
        #[arg(long)]
        archive: PathBuf,
        /// Run manifest; defaults to the one next to the archive.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        labels: Option<PathBuf>,
        #[arg(long)]
        split: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        train: TrainFlags,
    },
    /// Pre-compute and train in one go.
    Run {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        pre: PrecomputeFlags,
        #[command(flatten)]
        train: TrainFlags,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Print the provenance ledger of the target type.
    Ledger {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        target: Option<String>,
        #[arg(long, default_value = "even-odd", value_parser = parse_scheme)]
        scheme: Scheme,
        #[arg(long, default_value_t = 2)]
        iterations: usize,
        /// Also write ledger.md and ledger.json here.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        json: bool,
    },
    /// Time one epoch per iteration count.
    Bench {
        #[arg(long)]
        archive: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, value_delimiter = ',', default_value = "1,2,4,8")]
        ks: Vec<usize>,
        #[arg(long, default_value_t = 3)]
        repeats: usize,
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        train: TrainFlags,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum RpKind {
    Sparse,
    Gaussian,
}

#[derive(Args)]
struct PrecomputeFlags {
    #[arg(long, value_parser = parse_scheme)]
    scheme: Option<Scheme>,
    #[arg(long)]
    iterations: Option<usize>,
    #[arg(long)]
    target: Option<String>,
    #[arg(long)]
    rp: Option<RpKind>,
    /// Zero probability of sparse projection weights.
    #[arg(long)]
    psp: Option<f64>,
    #[arg(long)]
    relation_cap: Option<usize>,
}

#[derive(Args)]
struct TrainFlags {
    /// Hidden dimension of the encoder.
    #[arg(long)]
    dim: Option<usize>,
    #[arg(long)]
    lr: Option<f64>,
    #[arg(long)]
    batch_size: Option<usize>,
    #[arg(long)]
    patience: Option<usize>,
    #[arg(long)]
    max_epochs: Option<usize>,
    #[arg(long)]
    dropout_input: Option<f64>,
    #[arg(long)]
    dropout_hidden: Option<f64>,
    /// Training seed; the archive's seeds are fixed by its manifest.
    #[arg(long)]
    train_seed: Option<u64>,
}

fn parse_scheme(s: &str) -> std::result::Result<Scheme, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

impl PrecomputeFlags {
    fn apply(&self, run: &mut RunManifest) {
        let p = &mut run.precompute;
        if let Some(s) = self.scheme {
            p.scheme = s;
        }
        if let Some(k) = self.iterations {
            p.iterations = k;
        }
        if let Some(t) = &self.target {
            p.target = t.clone();
        }
        match (self.rp, self.psp) {
            (Some(RpKind::Gaussian), _) => p.rp.strategy = RpStrategy::Gaussian,
            (Some(RpKind::Sparse), psp) => {
                p.rp.strategy = RpStrategy::Sparse {
                    p_sp: psp.unwrap_or(DEFAULT_P_SPARSE),
                }
            }
            (None, Some(psp)) => p.rp.strategy = RpStrategy::Sparse { p_sp: psp },
            (None, None) => {}
        }
        if let Some(cap) = self.relation_cap {
            p.relation_cap = (cap > 0).then_some(cap);
        }
    }
}

impl TrainFlags {
    fn apply(&self, run: &mut RunManifest) {
        let (e, t) = (&mut run.encoder, &mut run.train);
        if let Some(d) = self.dim {
            e.hidden_dim = d;
        }
        if let Some(p) = self.dropout_input {
            e.dropout_input = p;
        }
        if let Some(p) = self.dropout_hidden {
            e.dropout_hidden = p;
        }
        if let Some(lr) = self.lr {
            t.lr = lr;
        }
        if let Some(b) = self.batch_size {
            t.batch_size = b;
        }
        if let Some(p) = self.patience {
            t.patience = p;
        }
        if let Some(m) = self.max_epochs {
            t.max_epochs = m;
            if self.patience.is_none() && t.patience > m {
                log::info!("patience lowered from {} to --max-epochs {m}", t.patience);
                t.patience = m;
            }
        }
        if let Some(s) = self.train_seed {
            t.seed = s;
        }
    }
}

fn print_json<T: Serialize>(value: &T) -> Result<()> {
    println!("{}", serde_json::to_string_pretty(value)?);
    Ok(())
}

fn new_run(graph: &Path, out: &Path, config: Option<&Path>, seed: Option<u64>) -> Result<RunManifest> {
    let mut run = match config {
        Some(c) => RunManifest::load(c)?,
        None => RunManifest::for_graph(graph, out)?,
    };
    run.graph = graph.to_path_buf();
    run.out_dir = out.to_path_buf();
    Ok(match seed {
        Some(s) => run.with_seed(s),
        None => run,
    })
}

fn archive_run(archive: &Path, config: Option<PathBuf>, out: Option<PathBuf>) -> Result<RunManifest> {
    let config = config.unwrap_or_else(|| archive.with_file_name(RUN_MANIFEST_FILE));
    let mut run = RunManifest::load(&config)?;
    if let Some(out) = out {
        run.out_dir = out;
    }
    Ok(run)
}

fn run(cli: Cli) -> Result<()> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::Config(e.to_string()))?;
    }
    match cli.command {
        Command::Synth {
            out,
            signal,
            papers,
            classes,
            seed,
            toy,
        } => {
            if toy {
                academic_toy().write(&out)
            } else {
                cmd_synth(
                    &out,
                    &SynthConfig {
                        signal,
                        papers,
                        classes,
                        seed,
                        ..Default::default()
                    },
                )
            }
        }
        Command::Precompute {
            graph,
            out,
            config,
            pre,
            seed,
        } => {
            let mut run = new_run(&graph, &out, config.as_deref(), seed)?;
            pre.apply(&mut run);
            print_json(&cmd_precompute(&run)?)
        }
        Command::Train {
            archive,
            config,
            labels,
            split,
            out,
            train,
        } => {
            let mut run = archive_run(&archive, config, out)?;
            train.apply(&mut run);
            print_json(&cmd_train(&archive, labels.as_deref(), split.as_deref(), &run)?)
        }
        Command::Run {
            graph,
            out,
            pre,
            train,
            seed,
        } => {
            let mut run = new_run(&graph, &out, None, seed)?;
            pre.apply(&mut run);
            train.apply(&mut run);
            cmd_precompute(&run)?;
            print_json(&cmd_train(&out.join(ARCHIVE_FILE), None, None, &run)?)
        }
        Command::Ledger {
            graph,
            target,
            scheme,
            iterations,
            out,
            json,
        } => {
            let ledger = cmd_ledger(&graph, target.as_deref(), scheme, iterations, out.as_deref())?;
            if json {
                println!("{}", ledger.to_json()?);
            } else {
                print!("{}", ledger.to_markdown(ledger.compact_is_unambiguous()));
            }
            Ok(())
        }
        Command::Bench {
            archive,
            config,
            ks,
            repeats,
            out,
            train,
        } => {
            let mut run = archive_run(&archive, config, out)?;
            train.apply(&mut run);
            print_json(&cmd_bench(&archive, &run, &ks, repeats)?)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 3 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
