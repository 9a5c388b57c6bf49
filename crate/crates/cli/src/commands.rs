//! One function per `--command`, each producing an [`Artifact`].

use rayon::prelude::*;
use serde_json::{json, Map, Value};

use asep_sixvertex::asep::{evolve_asep, SNAPSHOT_HEADER};
use asep_sixvertex::convergence::bounded::strictly_decreasing;
use asep_sixvertex::convergence::experiment::steps_for;
use asep_sixvertex::convergence::report::write_config_header;
use asep_sixvertex::convergence::{
    bad_event_survey, bounded_agreement_check, run_convergence_experiment, BoundedConfig, ConvergenceConfig,
    ConvergenceReport,
};
use asep_sixvertex::lattice::asep_config_from_initial;
use asep_sixvertex::sixvertex::offset::{evolve_offset_direct, evolve_offset_graph, OffsetState, OFFSET_HEADER};
use asep_sixvertex::sixvertex::{offset::write_offset_rows, sample_path_ensemble};
use asep_sixvertex::timegraph::{sample_continuous_graph, sample_discrete_graph};
use asep_sixvertex::{RngStream, Window};

use crate::config::{Command, Engine, Format, Settings};

type Fallible<T> = Result<T, String>;

fn lib<T>(r: asep_sixvertex::Result<T>) -> Fallible<T> {
    r.map_err(|e| e.to_string())
}

/// Machine-readable result of a command.
pub enum Artifact {
    /// Echoed configuration, CSV rows (with their header) and trailing notes.
    Table { config: Value, csv: Vec<u8>, notes: Vec<String> },
    Report(ConvergenceReport),
}

impl Artifact {
    pub fn render(&self, format: Format) -> Fallible<Vec<u8>> {
        let mut out = Vec::new();
        match (self, format) {
            (Artifact::Report(r), Format::Csv) => lib(r.write_csv(&mut out))?,
            (Artifact::Report(r), Format::Json) => lib(r.write_json(&mut out))?,
            (Artifact::Table { config, csv, notes }, Format::Csv) => {
                lib(write_config_header(config, &mut out))?;
                out.extend_from_slice(csv);
                for n in notes {
                    out.extend_from_slice(format!("# {n}\n").as_bytes());
                }
            }
            (Artifact::Table { config, csv, notes }, Format::Json) => {
                let doc = json!({ "config": config, "rows": csv_to_json(csv)?, "notes": notes });
                serde_json::to_writer_pretty(&mut out, &doc).map_err(|e| e.to_string())?;
                out.push(b'\n');
            }
        }
        Ok(out)
    }

    /// Pass/fail lines for stderr.
    pub fn summary(&self) -> Vec<String> {
        match self {
            Artifact::Report(r) => r
                .checks
                .iter()
                .map(|c| format!("{}: {} ({})", c.name, if c.passed { "pass" } else { "FAIL" }, c.detail))
                .collect(),
            Artifact::Table { notes, .. } => notes.clone(),
        }
    }
}

/// Rows as objects keyed by column, with numeric cells as numbers.
fn csv_to_json(bytes: &[u8]) -> Fallible<Value> {
    let mut reader = csv::Reader::from_reader(bytes);
    let header = reader.headers().map_err(|e| e.to_string())?.clone();
    let mut rows = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(|e| e.to_string())?;
        let mut obj = Map::new();
        for (k, v) in header.iter().zip(rec.iter()) {
            let cell = if let Ok(i) = v.parse::<i64>() {
                json!(i)
            } else if let Some(f) = v.parse::<f64>().ok().filter(|f| f.is_finite()) {
                json!(f)
            } else if v.is_empty() {
                Value::Null
            } else {
                json!(v)
            };
            obj.insert(k.to_string(), cell);
        }
        rows.push(Value::Object(obj));
    }
    Ok(Value::Array(rows))
}

fn writer() -> csv::Writer<Vec<u8>> {
    csv::Writer::from_writer(Vec::new())
}

fn finish(w: csv::Writer<Vec<u8>>) -> Fallible<Vec<u8>> {
    w.into_inner().map_err(|e| e.to_string())
}

fn base_config(s: &Settings) -> Map<String, Value> {
    let mut m = Map::new();
    m.insert("command".into(), json!(s.command));
    m.insert("seed".into(), json!(s.seed));
    m.insert("replicas".into(), json!(s.replicas));
    m.insert("phi".into(), json!(s.phi_text));
    m
}

pub fn run(s: &Settings) -> Fallible<Artifact> {
    match s.command {
        Command::SampleEnsemble => sample_ensemble(s),
        Command::SimAsep => sim_asep(s),
        Command::SimOffset => sim_offset(s),
        Command::Converge => converge(s),
        Command::BoundCheck => bound_check(s),
        Command::BadEvents => bad_events(s),
    }
}

fn data_stream(seed: u64, replica: usize) -> RngStream {
    RngStream::new(seed, 0).child(0).child(replica as u64)
}

fn sample_ensemble(s: &Settings) -> Fallible<Artifact> {
    let (d1, d2) = s.deltas()?;
    let n = s.size;
    let ensembles = (0..s.replicas)
        .into_par_iter()
        .map(|k| {
            let phi = s.phi.realize(n, data_stream(s.seed, k))?;
            sample_path_ensemble(d1, d2, &phi, n, RngStream::new(s.seed, 5).child(k as u64))
        })
        .collect::<asep_sixvertex::Result<Vec<_>>>();
    let ensembles = lib(ensembles)?;
    let mut w = writer();
    let bit = |b: bool| if b { "1" } else { "0" };
    w.write_record(["replica", "x", "y", "in_left", "in_bottom", "out_right", "out_top"]).map_err(|e| e.to_string())?;
    for (k, e) in ensembles.iter().enumerate() {
        for (x, y, v) in e.vertices() {
            w.write_record([
                &k.to_string(),
                &x.to_string(),
                &y.to_string(),
                bit(v.in_left()),
                bit(v.in_bottom()),
                bit(v.out_right()),
                bit(v.out_top()),
            ])
            .map_err(|e| e.to_string())?;
        }
    }
    let mut config = base_config(s);
    config.insert("delta1".into(), json!(d1));
    config.insert("delta2".into(), json!(d2));
    config.insert("size".into(), json!(n));
    Ok(Artifact::Table { config: Value::Object(config), csv: finish(w)?, notes: Vec::new() })
}

fn sim_asep(s: &Settings) -> Fallible<Artifact> {
    let (m, n) = (s.m[0], s.n[0]);
    let window = lib(Window::symmetric(m, n))?;
    let horizon = s.times.iter().copied().fold(0.0, f64::max);
    // Data must cover [1 - len, len]; the window is then filled from it.
    let len = ((m + 1).min(n)) as usize;
    let runs = (0..s.replicas)
        .into_par_iter()
        .map(|k| {
            let phi = s.phi.realize(len, data_stream(s.seed, k))?;
            let config = asep_config_from_initial(&phi.extended(len)?, window)?;
            let graph = sample_continuous_graph(s.left, s.right, window, horizon, RngStream::new(s.seed, 6).child(k as u64))?;
            evolve_asep(&config, &graph, horizon, &s.times)
        })
        .collect::<asep_sixvertex::Result<Vec<_>>>();
    let runs = lib(runs)?;
    let mut w = writer();
    w.write_record(SNAPSHOT_HEADER).map_err(|e| e.to_string())?;
    for (k, traj) in runs.iter().enumerate() {
        lib(traj.write_csv_rows(k as u64, &mut w))?;
    }
    let mut config = base_config(s);
    config.insert("L".into(), json!(s.left));
    config.insert("R".into(), json!(s.right));
    config.insert("window".into(), json!([-m, n]));
    config.insert("times".into(), json!(s.times));
    Ok(Artifact::Table { config: Value::Object(config), csv: finish(w)?, notes: Vec::new() })
}

/// Query times as step counts: given directly when the vertex weights are
/// explicit, otherwise `floor(t / eps)`.
fn offset_steps(s: &Settings) -> Fallible<Vec<u64>> {
    let steps: Vec<u64> = if s.explicit_deltas() {
        s.times
            .iter()
            .map(|&t| if t.fract() == 0.0 { Ok(t as u64) } else { Err(format!("times: expected whole steps, got {t}")) })
            .collect::<Fallible<_>>()?
    } else {
        s.times.iter().map(|&t| steps_for(t, s.epsilons[0])).collect()
    };
    if steps.contains(&0) {
        return Err("times: every query must be at least one step".into());
    }
    Ok(steps)
}

fn sim_offset(s: &Settings) -> Fallible<Artifact> {
    if s.engine == Engine::Ensemble {
        return Err("engine: sim-offset supports direct or graph".into());
    }
    let (d1, d2) = s.deltas()?;
    let steps = offset_steps(s)?;
    let horizon = *steps.iter().max().expect("times are nonempty");
    let len = 2 * horizon as usize + 64;
    let runs = (0..s.replicas)
        .into_par_iter()
        .map(|k| {
            let phi = s.phi.realize(len, data_stream(s.seed, k))?;
            let start = OffsetState::initial(&phi);
            let stream = RngStream::new(s.seed, 7).child(k as u64);
            let states = match s.engine {
                Engine::Graph => {
                    let w = Window::new(-(horizon as i64), (len + horizon as usize) as i64)?;
                    let graph = sample_discrete_graph(d1, d2, w, horizon, stream)?;
                    evolve_offset_graph(&start, &graph, &phi, horizon)?
                }
                Engine::Direct | Engine::Ensemble => evolve_offset_direct(&start, d1, d2, &phi, horizon, stream)?,
            };
            Ok(states.into_iter().filter(|st| steps.contains(&st.time)).collect::<Vec<_>>())
        })
        .collect::<asep_sixvertex::Result<Vec<_>>>();
    let runs = lib(runs)?;
    let mut w = writer();
    w.write_record(OFFSET_HEADER).map_err(|e| e.to_string())?;
    for (k, states) in runs.iter().enumerate() {
        lib(write_offset_rows(states, k as u64, &mut w))?;
    }
    let mut config = base_config(s);
    config.insert("delta1".into(), json!(d1));
    config.insert("delta2".into(), json!(d2));
    config.insert("steps".into(), json!(steps));
    config.insert("engine".into(), json!(s.engine));
    Ok(Artifact::Table { config: Value::Object(config), csv: finish(w)?, notes: Vec::new() })
}

fn converge(s: &Settings) -> Fallible<Artifact> {
    let cfg = ConvergenceConfig {
        left: s.left,
        right: s.right,
        phi: s.phi.clone(),
        tags: s.tags.clone(),
        times: s.times.clone(),
        set: s.set.clone(),
        x: s.x,
        r: s.r,
        epsilons: s.epsilons.clone(),
        replicas: s.replicas,
        seed: s.seed,
        reference_m: s.m[0],
        reference_n: s.n[0],
        engine: s.engine.into(),
    };
    Ok(Artifact::Report(lib(run_convergence_experiment(&cfg))?))
}

fn bound_check(s: &Settings) -> Fallible<Artifact> {
    let cfg = BoundedConfig {
        model: s.model.into(),
        left: s.left,
        right: s.right,
        phi: s.phi.clone(),
        horizon: s.times.iter().copied().fold(0.0, f64::max),
        epsilon: s.epsilons[0],
        factor: s.factor,
        replicas: s.replicas,
        seed: s.seed,
    };
    let schedule: Vec<(i64, i64)> = s.m.iter().copied().zip(s.n.iter().copied()).collect();
    let rows = lib(bounded_agreement_check(&cfg, &schedule))?;
    let mut w = writer();
    w.write_record(["m", "n", "central_lo", "central_hi", "disagreements", "replicas", "frequency", "sigma"])
        .map_err(|e| e.to_string())?;
    for r in &rows {
        w.write_record([
            r.m.to_string(),
            r.n.to_string(),
            r.central[0].to_string(),
            r.central[1].to_string(),
            r.disagreements.to_string(),
            r.replicas.to_string(),
            format!("{:.10}", r.frequency),
            format!("{:.10}", r.sigma),
        ])
        .map_err(|e| e.to_string())?;
    }
    let mut config = cfg.to_json();
    config["schedule"] = json!(schedule);
    let verdict = if strictly_decreasing(&rows) { "pass" } else { "FAIL" };
    let notes = vec![format!("check strictly_decreasing: {verdict}")];
    Ok(Artifact::Table { config, csv: finish(w)?, notes })
}

fn bad_events(s: &Settings) -> Fallible<Artifact> {
    let t = s.times.iter().copied().fold(0.0, f64::max);
    let mut surveys = Vec::new();
    for &eps in &s.epsilons {
        for (&m, &n) in s.m.iter().zip(&s.n) {
            eprintln!("bad-events: eps={eps} M={m} N={n}");
            surveys.push(lib(bad_event_survey(s.left, s.right, &s.phi, eps, (m, n), t, &s.tags, s.replicas, s.seed))?);
        }
    }
    let mut w = writer();
    w.write_record([
        "epsilon", "m", "n", "horizon", "replicas", "event1", "event2", "event3", "event4", "bound2", "bound3", "bound4",
        "clean", "disagreements",
    ])
    .map_err(|e| e.to_string())?;
    let mut notes = Vec::new();
    for v in &surveys {
        let mut rec = vec![v.epsilon.to_string(), v.m.to_string(), v.n.to_string(), v.horizon.to_string(), v.replicas.to_string()];
        rec.extend(v.frequencies.iter().map(|f| format!("{f:.10}")));
        rec.extend(v.bounds.iter().map(|b| format!("{b:.10}")));
        rec.push(v.clean.to_string());
        rec.push(v.disagreements.to_string());
        w.write_record(&rec).map_err(|e| e.to_string())?;
        let ok = v.within_bounds() && v.disagreements == 0;
        notes.push(format!(
            "check eps={} M={} N={}: {}",
            v.epsilon,
            v.m,
            v.n,
            if ok { "pass" } else { "FAIL" }
        ));
    }
    let mut config = base_config(s);
    config.insert("L".into(), json!(s.left));
    config.insert("R".into(), json!(s.right));
    config.insert("epsilons".into(), json!(s.epsilons));
    config.insert("deltas".into(), json!(s.epsilons.iter().map(|e| [e * s.left, e * s.right]).collect::<Vec<_>>()));
    config.insert("M".into(), json!(s.m));
    config.insert("N".into(), json!(s.n));
    config.insert("t".into(), json!(t));
    config.insert("tags".into(), json!(s.tags));
    Ok(Artifact::Table { config: Value::Object(config), csv: finish(w)?, notes })
}
