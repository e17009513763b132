use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use dscep::bench::{self, BenchConfig, BenchError, ExperimentReport, Role};
use dscep::streamgen::{generate, read_stream, replay, GenConfig};

#[derive(Parser)]
#[command(name = "dscep", version, about = "Distributed semantic CEP over RDF streams")]
struct Cli {
    /// Broker address used by operator, client and replay roles.
    #[arg(long, global = true, env = "DSCEP_BROKER", default_value = bench::DEFAULT_BROKER)]
    broker: String,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate a tweet stream and its KB.
    Gen {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value = "stream.jsonl")]
        out_stream: PathBuf,
        #[arg(long, default_value = "kb.nt")]
        out_kb: PathBuf,
    },
    /// Publish a stream file to the broker.
    Replay {
        #[arg(long)]
        stream: PathBuf,
        #[arg(long, default_value_t = 25_000.0)]
        rate: f64,
        #[arg(long, default_value = bench::SOURCE_TOPIC)]
        topic: String,
    },
    /// Run one role from its config file.
    Launch {
        #[arg(value_enum)]
        role: RoleArg,
        #[arg(long)]
        config: PathBuf,
    },
    /// Run a benchmark step and write CSV reports.
    Bench {
        #[arg(value_enum)]
        step: Step,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value = "report.csv")]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        runs: Option<usize>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum RoleArg {
    Broker,
    Operator,
    Client,
    Kbservice,
    Gen,
    Replay,
}

impl From<RoleArg> for Role {
    fn from(r: RoleArg) -> Self {
        match r {
            RoleArg::Broker => Role::Broker,
            RoleArg::Operator => Role::Operator,
            RoleArg::Client => Role::Client,
            RoleArg::Kbservice => Role::KbService,
            RoleArg::Gen => Role::Gen,
            RoleArg::Replay => Role::Replay,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Step {
    Step1,
    Step2,
    Step3,
}

fn write(report: &ExperimentReport, out: &std::path::Path) -> Result<(), BenchError> {
    for p in report.write(out)? {
        println!("wrote {}", p.display());
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), BenchError> {
    match cli.cmd {
        Cmd::Gen { config, seed, out_stream, out_kb } => {
            let mut cfg = match config {
                Some(p) => GenConfig::from_toml(&std::fs::read_to_string(p)?).map_err(BenchError::Config)?,
                None => GenConfig::default(),
            };
            if let Some(s) = seed {
                cfg.seed = s;
            }
            cfg.validate().map_err(BenchError::Config)?;
            let data = generate(&cfg);
            data.write_stream(std::io::BufWriter::new(create(&out_stream)?))?;
            data.write_kb(std::io::BufWriter::new(create(&out_kb)?))?;
            println!("{} events, {} stream triples, {} KB triples", data.events.len(), data.stream_triples(), data.kb.len());
        }
        Cmd::Replay { stream, rate, topic } => {
            let lines = read_stream(&stream)?;
            let bus = dscep::bus::RemoteBus::connect(&cli.broker)?;
            let r = replay(&lines, rate, &topic, &bus)?;
            println!("{} events, {} triples in {:.2?}: {:.0} triples/s", r.events, r.triples, r.duration, r.achieved_rate);
        }
        Cmd::Launch { role, config } => bench::launch(role.into(), &config, &cli.broker)?,
        Cmd::Bench { step, config, out, seed, runs } => {
            let mut cfg = match config {
                Some(p) => BenchConfig::load(&p)?,
                None => BenchConfig::default(),
            };
            cfg.seed = seed.unwrap_or(cfg.seed);
            cfg.runs = runs.unwrap_or(cfg.runs);
            let result = match step {
                Step::Step1 => bench::run_step1(&cfg),
                Step::Step2 => bench::run_step2(&cfg).map(|o| {
                    println!(
                        "mono median {:.1} ms, dag median {:.1} ms, reduction {:.1}%",
                        o.mono_median_millis, o.dag_median_millis, o.speedup_pct
                    );
                    println!("window time: KB stages {:.3} ms, stream-only stages {:.3} ms", o.kb_mean_millis, o.stream_only_mean_millis);
                    o.report
                }),
                Step::Step3 => bench::run_step3(&cfg).inspect(|r| {
                    print!("{}", r.sweep_csv());
                }),
            };
            match result {
                Ok(report) => write(&report, &out)?,
                Err(e) => {
                    if let Some(partial) = e.report() {
                        write(partial, &out)?;
                    }
                    return Err(e);
                }
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("dscep: {e}");
            ExitCode::FAILURE
        }
    }
}

fn create(path: &std::path::Path) -> std::io::Result<std::fs::File> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    std::fs::File::create(path)
}
