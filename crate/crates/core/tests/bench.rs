//! Experiment runner: pipelines, steps, reports and shipped configs.

mod common;

use std::path::Path;

use common::oracle::Naive;
use dscep::bench::{self, pipeline, queries, Access, BenchConfig, KbChoice, Step3Config, REPORT_HEADER, SUMMARY_HEADER};
use dscep::engine::{evaluate_window, KbAccessMode, LocalKb};
use dscep::operator::{cut_windows, OperatorConfig, Properties, WindowKind};
use dscep::query::parse_query;
use dscep::streamgen::{generate, GenConfig};

fn small_gen() -> GenConfig {
    GenConfig { tweet_count: 150, artists: 30, shows: 15, others: 40, cities: 10, countries: 5, noise_triples: 200, ..GenConfig::default() }
}

fn small() -> BenchConfig {
    BenchConfig {
        runs: 2,
        window_triples: 400,
        gen: small_gen(),
        step3: Step3Config { scales: vec![2.0, 1.0], noise_factors: vec![1, 3], windows: 2, tweets: 200 },
        ..BenchConfig::default()
    }
}

#[test]
fn builtin_pipelines_parse() {
    for (name, modes) in [("q15", &[Access::Local, Access::Service][..]), ("q16", &[Access::Local, Access::Service]), ("cquery1-mono", &[Access::Local]), ("cquery1-dag", &[Access::Local])] {
        for &m in modes {
            let p = pipeline(name, m, 1000).unwrap();
            assert!(!p.stages.is_empty());
        }
    }
    assert!(pipeline("cquery1-dag", Access::Service, 1000).is_err());
    assert!(pipeline("q99", Access::Local, 1000).is_err());
    let dag = pipeline("cquery1-dag", Access::Local, 1000).unwrap();
    let kb: Vec<&str> = dag.stages.iter().filter(|s| s.touches_kb).map(|s| s.id).collect();
    assert_eq!(kb, ["A", "B"]);
}

#[test]
fn shipped_node_configs_match_builtin_dag() {
    let dir = tempfile::tempdir().unwrap();
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("configs");
    for sub in ["cquery1-dag", "cquery1-mono"] {
        std::fs::create_dir_all(dir.path().join(sub)).unwrap();
        for entry in std::fs::read_dir(root.join(sub)).unwrap() {
            let entry = entry.unwrap();
            std::fs::copy(entry.path(), dir.path().join(sub).join(entry.file_name())).unwrap();
        }
    }
    std::fs::create_dir_all(dir.path().join("data")).unwrap();
    std::fs::write(dir.path().join("data/kb.nt"), generate(&small_gen()).kb_ntriples()).unwrap();

    let dag = pipeline("cquery1-dag", Access::Local, 1000).unwrap();
    for stage in &dag.stages {
        let props = Properties::load(&dir.path().join(format!("cquery1-dag/op{}.conf", stage.id))).unwrap();
        let cfg = OperatorConfig::from_properties(&props).unwrap();
        assert_eq!(cfg.id, stage.id);
        assert_eq!(cfg.inputs, stage.inputs);
        assert_eq!(cfg.output, stage.output);
        assert_eq!(cfg.window, stage.window);
        assert_eq!(*cfg.query, *stage.query, "stage {}", stage.id);
        assert_eq!(matches!(cfg.kb, KbAccessMode::LocalMerge(_)), stage.touches_kb);
    }
    let mono = pipeline("cquery1-mono", Access::Local, 1000).unwrap();
    let cfg = OperatorConfig::from_properties(&Properties::load(&dir.path().join("cquery1-mono/op.conf")).unwrap()).unwrap();
    assert_eq!(*cfg.query, *mono.stages[0].query);
    for f in ["broker.conf", "kbservice.conf", "gen.conf", "replay.conf"] {
        Properties::load(&root.join(f)).unwrap();
    }
}

#[test]
fn shipped_bench_toml_is_the_default() {
    let text = std::fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("configs/bench.toml")).unwrap();
    assert_eq!(BenchConfig::from_toml(&text).unwrap(), BenchConfig::default());
    assert!(BenchConfig::from_toml("runz = 3").is_err());
    assert!(BenchConfig::from_toml("runs = 0").is_err());
    assert_eq!(BenchConfig::from_toml("kb = \"full\"").unwrap().kb, KbChoice::Full);
}

#[test]
fn q15_matches_naive_count_per_window() {
    let data = generate(&GenConfig { tweet_count: 40, ..small_gen() });
    let query = parse_query(&queries::full(queries::Q15_LOCAL)).unwrap();
    let kb = KbAccessMode::LocalMerge(LocalKb::from_ntriples(data.kb_ntriples(), false).unwrap());
    let windows = cut_windows(data.events.iter().cloned(), WindowKind::Count { max_triples: 300 });
    let mut total = 0;
    for w in &windows {
        let got = evaluate_window(&query, w, &kb).unwrap();
        let want = Naive::new(w, &data.kb).run(&query);
        let want_len = match want {
            dscep::engine::QueryOutput::Construct(g) => g.len(),
            _ => unreachable!(),
        };
        assert_eq!(got.len(), want_len, "window {}", w.seq);
        total += want_len;
    }
    assert!(total > 0);
}

#[test]
fn step1_modes_agree_in_four_sections() {
    let report = bench::run_step1(&small()).unwrap();
    let names: Vec<&str> = report.summary.iter().map(|s| s.pipeline.as_str()).collect();
    assert_eq!(names, ["q15-local", "q15-service", "q16-local", "q16-service"]);
    assert_eq!(report.summary[0].digest, report.summary[1].digest);
    assert_eq!(report.summary[2].digest, report.summary[3].digest);
    assert_ne!(report.summary[0].digest, report.summary[2].digest);
    assert!(report.rows.iter().any(|(p, m)| p == "q15-service" && m.kb_triples_touched > 0));
}

#[test]
fn step2_digests_agree_and_rows_cover_all_stages() {
    let out = bench::run_step2(&small()).unwrap();
    assert_eq!(out.report.summary.len(), 4);
    assert!(out.report.summary.iter().all(|s| s.digest == out.digest));
    let ops: std::collections::BTreeSet<&str> = out.report.rows.iter().map(|(_, m)| m.operator_id.as_str()).collect();
    assert_eq!(ops.into_iter().collect::<Vec<_>>(), ["A", "B", "C", "D", "E", "F", "G", "cquery1"]);
    assert!(out.kb_mean_millis > out.stream_only_mean_millis);
    // Per-window rows come from one run of each pipeline.
    let windows_a = out.report.rows.iter().filter(|(_, m)| m.operator_id == "A").count();
    let windows_mono = out.report.rows.iter().filter(|(_, m)| m.operator_id == "cquery1").count();
    assert_eq!(windows_a, windows_mono);
}

#[test]
fn step3_sweeps_have_anchor_and_shape() {
    let report = bench::run_step3(&small()).unwrap();
    let used: Vec<_> = report.sweep.iter().filter(|r| r.sweep == "used").collect();
    let total: Vec<_> = report.sweep.iter().filter(|r| r.sweep == "total").collect();
    assert_eq!(used.len(), 4);
    assert_eq!(total.len(), 4);
    assert!(used.iter().all(|r| r.used_size == r.total_size));
    for sub in ["A", "B"] {
        let sizes: Vec<usize> = used.iter().filter(|r| r.subquery == sub).map(|r| r.used_size).collect();
        assert!(sizes[0] > sizes[1], "{sub}: {sizes:?}");
        let t: Vec<_> = total.iter().filter(|r| r.subquery == sub).collect();
        assert_eq!(t[0].used_size, t[0].total_size);
        assert_eq!(t[1].total_size, 3 * t[1].used_size);
    }
}

#[test]
fn report_files_have_fixed_headers() {
    let dir = tempfile::tempdir().unwrap();
    let report = bench::run_step1(&BenchConfig { runs: 1, ..small() }).unwrap();
    let written = report.write(&dir.path().join("r.csv")).unwrap();
    assert_eq!(written.len(), 2);
    let main = std::fs::read_to_string(&written[0]).unwrap();
    assert_eq!(main.lines().next(), Some(REPORT_HEADER));
    assert_eq!(main.lines().count(), report.rows.len() + 1);
    assert!(main.lines().skip(1).all(|l| l.starts_with("step1,") && l.split(',').count() == 8));
    let summary = std::fs::read_to_string(dir.path().join("r.summary.csv")).unwrap();
    assert_eq!(summary.lines().next(), Some(SUMMARY_HEADER));
}

#[test]
fn digest_ignores_order() {
    let data = generate(&small_gen());
    let mut triples = data.kb.clone();
    let d1 = bench::digest_triples(&triples);
    triples.reverse();
    assert_eq!(d1, bench::digest_triples(&triples));
    triples.pop();
    assert_ne!(d1, bench::digest_triples(&triples));
}
