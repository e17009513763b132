use std::collections::BTreeMap;
use std::sync::Arc;

use super::pipeline::{pipeline, run_pipeline, Access, Pipeline, PipelineRun, Stage};
use super::queries::{self, full};
use super::report::{mean, median, ExperimentReport, SummaryRow, SweepRow};
use super::{BenchConfig, BenchError, KbChoice};
use crate::engine::{Engine, KbAccessMode, LocalKb};
use crate::kb::{extract_used_kb, TripleStore};
use crate::operator::{cut_windows, Window, WindowKind};
use crate::query::{parse_query, Query};
use crate::rdf::{serialize_ntriple, Term, Triple};
use crate::streamgen::vocab::{NOISE, RES};
use crate::streamgen::{generate, GenConfig, Generated, StreamLine};

/// Generated data plus the views every step needs.
struct Data {
    generated: Generated,
    lines: Vec<StreamLine>,
    text: Arc<str>,
    store: TripleStore,
}

impl Data {
    fn new(cfg: &GenConfig) -> Result<Self, BenchError> {
        let generated = generate(cfg);
        let lines = generated.events.iter().map(StreamLine::from_event).collect();
        let text: Arc<str> = generated.kb_ntriples().into();
        let store = TripleStore::load_canonical(&text)?;
        Ok(Data { generated, lines, text, store })
    }

    fn windows(&self, max_triples: usize) -> Vec<Window> {
        cut_windows(self.generated.events.iter().cloned(), WindowKind::Count { max_triples })
    }
}

fn ntriples(store: &TripleStore) -> String {
    let mut lines: Vec<String> = store.triples().map(|t| serialize_ntriple(&t)).collect();
    lines.sort_unstable();
    lines.join("\n") + "\n"
}

fn abort(report: &ExperimentReport, e: BenchError) -> BenchError {
    let mut report = report.clone();
    report.failure = Some(e.to_string());
    BenchError::Aborted { report: Box::new(report), source: Box::new(e) }
}

fn record(report: &mut ExperimentReport, run: &PipelineRun, keep_rows: bool) {
    if keep_rows {
        report.rows.extend(run.measurements.iter().map(|m| (run.pipeline.clone(), m.clone())));
    }
    report.summary.push(SummaryRow { pipeline: run.pipeline.clone(), wall_millis: run.wall_millis, digest: run.digest.clone() });
}

/// KB for each KB-touching stage: the whole KB, or what the stage's query
/// uses over the windows it will see.
fn stage_kbs(p: &Pipeline, data: &Data, cfg: &BenchConfig, choice: KbChoice) -> Result<BTreeMap<String, LocalKb>, BenchError> {
    let windows = data.windows(cfg.window_triples);
    let mut out = BTreeMap::new();
    for s in p.stages.iter().filter(|s| s.touches_kb) {
        let kb = match choice {
            KbChoice::Full => LocalKb::from_ntriples(data.text.clone(), cfg.kb_reload)?,
            KbChoice::Used => {
                let used = extract_used_kb(&data.store, &s.query, &windows)?;
                log::info!("{} stage {}: used KB {} of {} triples", p.name, s.id, used.len(), data.store.len());
                LocalKb::from_ntriples(ntriples(&used), cfg.kb_reload)?
            }
        };
        out.insert(s.id.to_string(), kb);
    }
    Ok(out)
}

fn local_kb_for(kbs: &BTreeMap<String, LocalKb>) -> impl Fn(&Stage) -> KbAccessMode + '_ {
    |s: &Stage| kbs.get(s.id).cloned().map_or(KbAccessMode::None, KbAccessMode::LocalMerge)
}

/// Q15 and Q16 analogs, each with the KB merged locally and reached as a
/// service; one report section per combination. Both modes see the whole
/// KB and must agree.
pub fn run_step1(cfg: &BenchConfig) -> Result<ExperimentReport, BenchError> {
    cfg.validate()?;
    let mut report = ExperimentReport::new("step1");
    let data = Data::new(&cfg.gen_config())?;
    let service = crate::kb::serve(Arc::new(data.store.clone()), "127.0.0.1:0")?;
    let endpoints = BTreeMap::from([("kb".to_string(), service.local_addr().to_string())]);
    let local = LocalKb::from_ntriples(data.text.clone(), cfg.kb_reload)?;

    let mut result = Ok(());
    'outer: for name in ["q15", "q16"] {
        let mut digests = Vec::new();
        for access in [Access::Local, Access::Service] {
            let run = pipeline(name, access, cfg.window_triples).and_then(|p| {
                let kb_for = |_: &Stage| match access {
                    Access::Local => KbAccessMode::LocalMerge(local.clone()),
                    Access::Service => KbAccessMode::RemoteService(endpoints.clone()),
                };
                run_pipeline(&p, &data.lines, &kb_for, cfg.engines, cfg.rate)
            });
            match run {
                Ok(run) => {
                    record(&mut report, &run, true);
                    digests.push(run.digest);
                }
                Err(e) => {
                    result = Err(abort(&report, e));
                    break 'outer;
                }
            }
        }
        if digests[0] != digests[1] {
            let detail = format!("{name}: local {} vs service {}", digests[0], digests[1]);
            report.failure = Some(detail.clone());
            result = Err(BenchError::DigestMismatch { detail, report: Box::new(report.clone()) });
            break;
        }
    }
    service.shutdown();
    result.map(|_| report)
}

#[derive(Debug, Clone)]
pub struct Step2Outcome {
    pub report: ExperimentReport,
    pub mono_median_millis: f64,
    pub dag_median_millis: f64,
    /// Wall-time reduction of the decomposed pipeline, in percent of mono.
    pub speedup_pct: f64,
    /// Mean window time of the stages without KB access (C to G).
    pub stream_only_mean_millis: f64,
    /// Mean window time of the KB-touching stages (A and B).
    pub kb_mean_millis: f64,
    pub digest: String,
}

/// The correlation query as one operator and as the seven-stage DAG, on the
/// same stream, `runs` times each with alternating order. Per-window rows
/// come from each pipeline's first run.
pub fn run_step2(cfg: &BenchConfig) -> Result<Step2Outcome, BenchError> {
    cfg.validate()?;
    let mut report = ExperimentReport::new("step2");
    let data = Data::new(&cfg.gen_config())?;
    let mono = pipeline("cquery1-mono", Access::Local, cfg.window_triples)?;
    let dag = pipeline("cquery1-dag", Access::Local, cfg.window_triples)?;
    let mono_kbs = stage_kbs(&mono, &data, cfg, cfg.kb)?;
    let dag_kbs = stage_kbs(&dag, &data, cfg, cfg.kb)?;

    let mut walls: BTreeMap<&str, Vec<f64>> = BTreeMap::new();
    for r in 0..cfg.runs {
        let order = if r % 2 == 0 { [(&mono, &mono_kbs), (&dag, &dag_kbs)] } else { [(&dag, &dag_kbs), (&mono, &mono_kbs)] };
        for (p, kbs) in order {
            let run = run_pipeline(p, &data.lines, &local_kb_for(kbs), cfg.engines, cfg.rate).map_err(|e| abort(&report, e))?;
            log::info!("step2 run {r} {}: {:.1} ms, digest {}", p.name, run.wall_millis, &run.digest[..12]);
            record(&mut report, &run, r < 2);
            walls.entry(if std::ptr::eq(p, &mono) { "mono" } else { "dag" }).or_default().push(run.wall_millis);
        }
    }

    let digest = report.summary[0].digest.clone();
    if let Some(other) = report.summary.iter().find(|s| s.digest != digest) {
        let detail = format!("{} gave {} where {} gave {digest}", other.pipeline, other.digest, report.summary[0].pipeline);
        report.failure = Some(detail.clone());
        return Err(BenchError::DigestMismatch { detail, report: Box::new(report) });
    }
    let mono_median_millis = median(&walls["mono"]);
    let dag_median_millis = median(&walls["dag"]);
    let stream_only_mean_millis = report.mean_eval(&dag.name, &["C", "D", "E", "F", "G"]).unwrap_or(0.0);
    let kb_mean_millis = report.mean_eval(&dag.name, &["A", "B"]).unwrap_or(0.0);
    Ok(Step2Outcome {
        speedup_pct: (mono_median_millis - dag_median_millis) / mono_median_millis * 100.0,
        report,
        mono_median_millis,
        dag_median_millis,
        stream_only_mean_millis,
        kb_mean_millis,
        digest,
    })
}

fn scaled(base: &GenConfig, scale: f64) -> GenConfig {
    let s = |n: usize| ((n as f64 * scale).round() as usize).max(1);
    GenConfig {
        artists: s(base.artists),
        shows: s(base.shows),
        others: s(base.others),
        cities: s(base.cities),
        countries: s(base.countries),
        ..base.clone()
    }
}

fn noise(n: usize) -> impl Iterator<Item = Triple> {
    (0..n).map(|i| {
        Triple::new(
            Term::iri(format!("{RES}noise/extra/{i}")),
            Term::iri(NOISE),
            Term::typed(i.to_string(), crate::rdf::vocab::XSD_INTEGER),
        )
    })
}

/// Mean per-window evaluation time with `kb_text` reloaded for every window.
fn timed_windows(query: &Arc<Query>, kb_text: String, windows: &[Window], label: &str, report: &mut ExperimentReport) -> Result<f64, BenchError> {
    let mut engine = Engine::new(query.clone(), KbAccessMode::LocalMerge(LocalKb::from_ntriples(kb_text, true)?))?;
    let mut times = Vec::with_capacity(windows.len());
    for w in windows {
        let r = engine.evaluate(w)?;
        times.push(r.eval_millis);
        report.rows.push((
            label.to_string(),
            crate::operator::Measurement {
                operator_id: label.rsplit('/').next().unwrap_or(label).to_string(),
                window_seq: w.seq,
                triples: w.triple_count,
                eval_millis: r.eval_millis,
                kb_triples_touched: r.kb_triples_touched,
                engine_id: 0,
            },
        ));
    }
    Ok(mean(&times))
}

/// Per-window cost of the two KB-touching subqueries under per-window KB
/// reload, timed over the first `step3.windows` windows. The used KB is what
/// a subquery touches over the whole generated stream. Sweep `used` loads
/// only the used KB of data generated with shrinking entity pools; sweep
/// `total` pads one fixed used KB with unrelated triples.
pub fn run_step3(cfg: &BenchConfig) -> Result<ExperimentReport, BenchError> {
    cfg.validate()?;
    let mut report = ExperimentReport::new("step3");
    let subqueries: Vec<(&str, Arc<Query>)> = vec![
        ("A", Arc::new(parse_query(&full(queries::DAG_A))?)),
        ("B", Arc::new(parse_query(&full(queries::DAG_B))?)),
    ];
    let base = GenConfig { tweet_count: cfg.step3.tweets, ..cfg.gen_config() };
    let n = cfg.step3.windows;

    let mut scales = cfg.step3.scales.clone();
    scales.sort_by(|a, b| b.total_cmp(a));
    for scale in scales {
        let data = Data::new(&scaled(&base, scale)).map_err(|e| abort(&report, e))?;
        let all = data.windows(cfg.window_triples);
        let windows = &all[..n.min(all.len())];
        for (id, q) in &subqueries {
            let point = (|| {
                let used = extract_used_kb(&data.store, q, &all)?;
                let label = format!("used-x{scale}/{id}");
                let millis = timed_windows(q, ntriples(&used), windows, &label, &mut report)?;
                Ok::<_, BenchError>((used.len(), millis))
            })();
            let (size, millis) = point.map_err(|e| abort(&report, e))?;
            report.sweep.push(SweepRow { sweep: "used".into(), subquery: id.to_string(), used_size: size, total_size: size, mean_window_millis: millis });
        }
    }

    let data = Data::new(&base).map_err(|e| abort(&report, e))?;
    let all = data.windows(cfg.window_triples);
    let windows = &all[..n.min(all.len())];
    for (id, q) in &subqueries {
        let used = extract_used_kb(&data.store, q, &all).map_err(|e| abort(&report, e.into()))?;
        let used_text = ntriples(&used);
        for &factor in &cfg.step3.noise_factors {
            let extra = used.len() * (factor - 1);
            let mut text = used_text.clone();
            for t in noise(extra) {
                text.push_str(&serialize_ntriple(&t));
                text.push('\n');
            }
            let label = format!("total-x{factor}/{id}");
            let millis = timed_windows(q, text, windows, &label, &mut report).map_err(|e| abort(&report, e))?;
            report.sweep.push(SweepRow {
                sweep: "total".into(),
                subquery: id.to_string(),
                used_size: used.len(),
                total_size: used.len() + extra,
                mean_window_millis: millis,
            });
        }
    }
    Ok(report)
}
