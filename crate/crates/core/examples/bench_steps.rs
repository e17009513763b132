//! The three benchmark experiments on a small configuration. Use the
//! `dscep bench` subcommand for full-size runs.

use dscep::bench::{run_step1, run_step2, run_step3, BenchConfig, Step3Config};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut cfg = BenchConfig { runs: 1, ..BenchConfig::default() };
    cfg.gen.tweet_count = 600;
    cfg.step3 = Step3Config { scales: vec![4.0, 2.0, 1.0], noise_factors: vec![1, 4], windows: 2, tweets: 600 };

    let step1 = run_step1(&cfg)?;
    print!("{}", step1.summary_csv());

    let step2 = run_step2(&cfg)?;
    println!(
        "step2: mono {:.1} ms, dag {:.1} ms, KB stages {:.3} ms/window, stream-only {:.3} ms/window",
        step2.mono_median_millis, step2.dag_median_millis, step2.kb_mean_millis, step2.stream_only_mean_millis
    );

    let step3 = run_step3(&cfg)?;
    print!("{}", step3.sweep_csv());
    Ok(())
}
