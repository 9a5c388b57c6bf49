//! Monte Carlo comparison of the offset six-vertex model at `delta = eps (L, R)`
//! with the ASEP, for tagged positions and for the current.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::asep::{current_of, evolve_asep};
use crate::error::{check_rates, check_vertex_param, invalid, Error, Result};
use crate::lattice::{asep_config_from_initial, InitialDataSpec, Window};
use crate::rng::RngStream;
use crate::sixvertex::ensemble::sample_path_ensemble;
use crate::sixvertex::offset::{advance_offset_direct, step_graph_events, OffsetState};
use crate::timegraph::{sample_continuous_graph, sample_discrete_graph};

use super::report::ConvergenceReport;
use super::stats::{binomial_radius, ks_critical, ks_distance};

/// Which realization of the six-vertex model produces the samples.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OffsetEngine {
    /// The one-step law of the offset particle system.
    Direct,
    /// Replay of a sampled discrete time graph.
    Graph,
    /// Path ensembles; currents come from the height function.
    Ensemble,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceConfig {
    pub left: f64,
    pub right: f64,
    pub phi: InitialDataSpec,
    pub tags: Vec<i64>,
    pub times: Vec<f64>,
    /// Optional site set `S` for the joint event "every queried position lies in `S`".
    pub set: Option<Vec<i64>>,
    pub x: i64,
    pub r: i64,
    pub epsilons: Vec<f64>,
    pub replicas: usize,
    pub seed: u64,
    /// The ASEP reference lives on `[-reference_m, reference_n]`.
    pub reference_m: i64,
    pub reference_n: i64,
    pub engine: OffsetEngine,
}

impl Default for ConvergenceConfig {
    fn default() -> Self {
        Self {
            left: 0.3,
            right: 1.0,
            phi: InitialDataSpec::Step,
            tags: vec![-1],
            times: vec![1.0],
            set: None,
            x: 0,
            r: 1,
            epsilons: vec![0.2, 0.1, 0.05, 0.025],
            replicas: 100_000,
            seed: 1,
            reference_m: 64,
            reference_n: 64,
            engine: OffsetEngine::Direct,
        }
    }
}

/// `floor(t / eps)`, robust to the rounding of `t / eps`.
pub fn steps_for(t: f64, eps: f64) -> u64 {
    (t / eps + 1e-9).floor() as u64
}

impl ConvergenceConfig {
    pub fn validate(&self) -> Result<()> {
        check_rates(self.left, self.right)?;
        if self.replicas == 0 {
            return invalid("replicas must be at least 1");
        }
        if self.tags.is_empty() || self.times.is_empty() {
            return invalid("at least one tag and one time are required");
        }
        if self.times.iter().any(|&t| !(t > 0.0 && t.is_finite())) {
            return invalid("times must be positive");
        }
        if self.r < 1 {
            return invalid(format!("r must be >= 1, got {}", self.r));
        }
        if self.reference_m < 1 || self.reference_n < 1 {
            return invalid("reference window bounds must be positive");
        }
        for &eps in &self.epsilons {
            if !(eps > 0.0) {
                return invalid(format!("epsilon must be positive, got {eps}"));
            }
            check_vertex_param(&format!("delta1 = eps L at eps={eps}"), eps * self.left)?;
            check_vertex_param(&format!("delta2 = eps R at eps={eps}"), eps * self.right)?;
            if self.times.iter().any(|&t| steps_for(t, eps) == 0) {
                return invalid(format!("epsilon {eps} exceeds a query time"));
            }
        }
        Ok(())
    }

    /// `(tag, time)` queries in a fixed order: tags outer, times inner.
    pub fn queries(&self) -> Vec<(i64, f64)> {
        self.tags.iter().flat_map(|&g| self.times.iter().map(move |&t| (g, t))).collect()
    }

    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "L": self.left,
            "R": self.right,
            "phi": self.phi.describe(),
            "tags": self.tags,
            "times": self.times,
            "set": self.set,
            "x": self.x,
            "r": self.r,
            "epsilons": self.epsilons,
            "deltas": self.epsilons.iter().map(|e| [e * self.left, e * self.right]).collect::<Vec<_>>(),
            "steps": self.epsilons.iter().map(|&e| self.times.iter().map(|&t| steps_for(t, e)).collect::<Vec<_>>()).collect::<Vec<_>>(),
            "replicas": self.replicas,
            "seed": self.seed,
            "reference_window": [-self.reference_m, self.reference_n],
            "engine": self.engine,
        })
    }

    fn data_stream(&self, replica: usize) -> RngStream {
        RngStream::new(self.seed, 0).child(0).child(replica as u64)
    }
}

/// Samples of one model: for each replica, the queried positions (in the
/// order of [`ConvergenceConfig::queries`]) and the current indicators
/// `1[J >= r]` per time.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ModelSamples {
    pub positions: Vec<Vec<i64>>,
    pub current_at_least_r: Vec<Vec<bool>>,
    /// Replicas where the height-function current and the tagged-particle
    /// form disagreed (ensemble engine only).
    pub identity_violations: u64,
}

impl ModelSamples {
    /// Samples of query `q` across replicas.
    pub fn column(&self, q: usize) -> Vec<i64> {
        self.positions.iter().map(|row| row[q]).collect()
    }

    pub fn current_frequency(&self, time_index: usize) -> f64 {
        let n = self.current_at_least_r.len() as f64;
        self.current_at_least_r.iter().filter(|c| c[time_index]).count() as f64 / n
    }

    fn collect(rows: Vec<(Vec<i64>, Vec<bool>, bool)>) -> Self {
        let mut out = ModelSamples::default();
        for (p, c, ok) in rows {
            out.positions.push(p);
            out.current_at_least_r.push(c);
            out.identity_violations += (!ok) as u64;
        }
        out
    }
}

/// ASEP tagged positions `X_tag(t)` and current indicators on the reference window.
pub fn sample_asep(cfg: &ConvergenceConfig) -> Result<ModelSamples> {
    cfg.validate()?;
    let window = Window::symmetric(cfg.reference_m, cfg.reference_n)?;
    let horizon = cfg.times.iter().cloned().fold(0.0, f64::max);
    let len = (cfg.reference_m + 1).min(cfg.reference_n) as usize;
    let queries = cfg.queries();
    let root = RngStream::new(cfg.seed, 1);
    let rows: Result<Vec<_>> = (0..cfg.replicas)
        .into_par_iter()
        .map(|k| {
            let phi = cfg.phi.realize(len, cfg.data_stream(k))?;
            let config = asep_config_from_initial(&phi, window)?;
            let graph = sample_continuous_graph(cfg.left, cfg.right, window, horizon, root.child(k as u64))?;
            let tr = evolve_asep(&config, &graph, horizon, &cfg.times)?;
            let positions = queries
                .iter()
                .map(|&(tag, t)| tr.at(t).and_then(|c| c.position_of_tag(tag)))
                .collect::<Result<Vec<_>>>()?;
            let currents = cfg
                .times
                .iter()
                .map(|&t| tr.at(t).map(|c| current_of(c, cfg.x) >= cfg.r))
                .collect::<Result<Vec<_>>>()?;
            Ok((positions, currents, true))
        })
        .collect();
    Ok(ModelSamples::collect(rows?))
}

/// Offset positions `q_tag(floor(t / eps))` and current indicators
/// `1[H(x + T, T) >= r]` (ensemble) or `1[q_{-r}(T) > x]` (other engines).
pub fn sample_offset(cfg: &ConvergenceConfig, eps: f64) -> Result<ModelSamples> {
    cfg.validate()?;
    let (d1, d2) = (eps * cfg.left, eps * cfg.right);
    check_vertex_param("delta1", d1)?;
    check_vertex_param("delta2", d2)?;
    let mut step_times: Vec<u64> = cfg.times.iter().map(|&t| steps_for(t, eps)).collect();
    let horizon = *step_times.iter().max().expect("times are nonempty");
    step_times.sort_unstable();
    let queries = cfg.queries();
    let margin = cfg.reference_m.max(cfg.reference_n) as usize;
    let e_index = cfg.epsilons.iter().position(|&e| e == eps).unwrap_or(cfg.epsilons.len()) as u64;
    let root = RngStream::new(cfg.seed, 2).child(e_index);
    let rows: Result<Vec<_>> = (0..cfg.replicas)
        .into_par_iter()
        .map(|k| {
            let stream = root.child(k as u64);
            let mut snapshots: Vec<(u64, OffsetState)> = Vec::with_capacity(step_times.len());
            let mut heights = Vec::new();
            let mut identity_ok = true;
            match cfg.engine {
                OffsetEngine::Direct | OffsetEngine::Graph => {
                    let len = 2 * horizon as usize + margin;
                    let phi = cfg.phi.realize(len, cfg.data_stream(k))?;
                    let mut state = OffsetState::initial(&phi);
                    if cfg.engine == OffsetEngine::Direct {
                        for (i, &s) in step_times.iter().enumerate() {
                            let todo = s - state.time;
                            advance_offset_direct(&mut state, d1, d2, &phi, todo, stream.child(i as u64))?;
                            snapshots.push((s, state.clone()));
                        }
                    } else {
                        let window = Window::new(-(horizon as i64), len as i64 + horizon as i64)?;
                        let graph = sample_discrete_graph(d1, d2, window, horizon, stream)?;
                        let phi = phi.extended(horizon as usize)?;
                        for &s in &step_times {
                            while state.time < s {
                                let t = state.time + 1;
                                step_graph_events(&mut state, phi.y_bit(t as usize), graph.events_at(t));
                            }
                            snapshots.push((s, state.clone()));
                        }
                    }
                }
                OffsetEngine::Ensemble => {
                    let n = 2 * horizon as usize + 32 + cfg.x.unsigned_abs() as usize;
                    let phi = cfg.phi.realize(n, cfg.data_stream(k))?;
                    let e = sample_path_ensemble(d1, d2, &phi, n, stream)?;
                    for &s in &step_times {
                        let c = e.offset_particles(s as usize)?;
                        let state = OffsetState { time: s, positions: c.positions().iter().copied().collect(), n_blue: c.blue_count() };
                        let h = e.height_function(cfg.x + s as i64, s as usize)?;
                        let tagged = state.position_of_tag(-cfg.r).is_some_and(|q| q > cfg.x);
                        identity_ok &= (h >= cfg.r) == tagged;
                        heights.push((s, h >= cfg.r));
                        snapshots.push((s, state));
                    }
                }
            }
            let at = |s: u64| &snapshots.iter().find(|(t, _)| *t == s).expect("recorded step").1;
            let positions = queries
                .iter()
                .map(|&(tag, t)| at(steps_for(t, eps)).position_of_tag(tag).ok_or(Error::MissingTag(tag)))
                .collect::<Result<Vec<_>>>()?;
            let currents = cfg
                .times
                .iter()
                .map(|&t| {
                    let s = steps_for(t, eps);
                    match heights.iter().find(|(u, _)| *u == s) {
                        Some(&(_, h)) => h,
                        None => at(s).position_of_tag(-cfg.r).is_some_and(|q| q > cfg.x),
                    }
                })
                .collect();
            Ok((positions, currents, identity_ok))
        })
        .collect();
    Ok(ModelSamples::collect(rows?))
}

fn in_set(set: &[i64], row: &[i64]) -> bool {
    row.iter().all(|p| set.contains(p))
}

/// Runs the ASEP reference once and the offset model at every epsilon.
pub fn run_convergence_experiment(cfg: &ConvergenceConfig) -> Result<ConvergenceReport> {
    cfg.validate()?;
    let mut report = ConvergenceReport::new(cfg.to_json());
    let asep = sample_asep(cfg)?;
    let n = cfg.replicas;
    let queries = cfg.queries();
    for (ti, &t) in cfg.times.iter().enumerate() {
        let p = asep.current_frequency(ti);
        report.push(None, &format!("p_asep:t={t}"), p, binomial_radius(p, n, 1.96), n as u64);
    }
    for (q, &(tag, t)) in queries.iter().enumerate() {
        let col = asep.column(q);
        let mean = col.iter().sum::<i64>() as f64 / n as f64;
        report.push(None, &format!("mean:tag={tag}:t={t}"), mean, 0.0, n as u64);
    }
    let asep_set = cfg.set.as_ref().map(|s| asep.positions.iter().filter(|row| in_set(s, row)).count() as f64 / n as f64);
    if let Some(p) = asep_set {
        report.push(None, "set_asep", p, binomial_radius(p, n, 1.96), n as u64);
    }

    let mut ks_series: Vec<Vec<(f64, f64)>> = vec![Vec::new(); queries.len()];
    let mut gap_series: Vec<Vec<(f64, f64)>> = vec![Vec::new(); cfg.times.len()];
    for &eps in &cfg.epsilons {
        let off = sample_offset(cfg, eps)?;
        let radius = ks_critical(0.05, n, n);
        for (q, &(tag, t)) in queries.iter().enumerate() {
            let (a, b) = (off.column(q), asep.column(q));
            let d = ks_distance(&a, &b)?;
            ks_series[q].push((d, radius));
            report.push(Some(eps), &format!("ks:tag={tag}:t={t}"), d, radius, n as u64);
            let mean = a.iter().sum::<i64>() as f64 / n as f64;
            report.push(Some(eps), &format!("mean:tag={tag}:t={t}"), mean, 0.0, n as u64);
        }
        for (ti, &t) in cfg.times.iter().enumerate() {
            let pe = off.current_frequency(ti);
            let pa = asep.current_frequency(ti);
            let r = 1.96 * (pe * (1.0 - pe) / n as f64 + pa * (1.0 - pa) / n as f64).sqrt();
            report.push(Some(eps), &format!("p_eps:t={t}"), pe, binomial_radius(pe, n, 1.96), n as u64);
            report.push(Some(eps), &format!("current_gap:t={t}"), (pe - pa).abs(), r, n as u64);
            gap_series[ti].push(((pe - pa).abs(), r));
        }
        if cfg.engine == OffsetEngine::Ensemble {
            report.push(Some(eps), "identity_violations", off.identity_violations as f64, 0.0, n as u64);
        }
        if let (Some(s), Some(pa)) = (&cfg.set, asep_set) {
            let pe = off.positions.iter().filter(|row| in_set(s, row)).count() as f64 / n as f64;
            let r = 1.96 * (pe * (1.0 - pe) / n as f64 + pa * (1.0 - pa) / n as f64).sqrt();
            report.push(Some(eps), "set_gap", (pe - pa).abs(), r, n as u64);
        }
    }
    for (q, &(tag, t)) in queries.iter().enumerate() {
        let (ok, detail) = non_increasing(&ks_series[q]);
        report.check(&format!("ks_non_increasing:tag={tag}:t={t}"), ok, detail);
    }
    for (ti, &t) in cfg.times.iter().enumerate() {
        let (ok, detail) = non_increasing(&gap_series[ti]);
        report.check(&format!("current_gap_non_increasing:t={t}"), ok, detail);
    }
    if cfg.engine == OffsetEngine::Ensemble {
        let total: f64 = report.rows_named("identity_violations").map(|r| r.value).sum();
        report.check("height_identity", total == 0.0, format!("{total} violating replicas"));
    }
    Ok(report)
}

/// Each value may exceed its predecessor by at most twice the larger radius.
pub fn non_increasing(series: &[(f64, f64)]) -> (bool, String) {
    let mut ok = true;
    for w in series.windows(2) {
        let slack = 2.0 * w[0].1.max(w[1].1);
        ok &= w[1].0 <= w[0].0 + slack;
    }
    let values: Vec<String> = series.iter().map(|(v, _)| format!("{v:.4}")).collect();
    (ok, values.join(" -> "))
}

/// One row of the tail-bound comparison.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailRow {
    pub k: i64,
    pub empirical: f64,
    pub bound: f64,
    pub sigma: f64,
    pub violated: bool,
}

/// Compares `P[p_{-r}(T) = k + T]` with `(tR)^k / k!` for `k >= 0` and with
/// `(tL)^|k| / |k|!` for `k < 0`, allowing three binomial standard errors.
pub fn tail_bound_check(samples: &[i64], t: f64, left: f64, right: f64, steps: u64, ks: std::ops::RangeInclusive<i64>) -> Vec<TailRow> {
    let n = samples.len();
    ks.map(|k| {
        let target = k + steps as i64;
        let empirical = samples.iter().filter(|&&p| p == target).count() as f64 / n as f64;
        let rate = if k >= 0 { t * right } else { t * left };
        let m = k.unsigned_abs();
        let bound = (1..=m).fold(1.0, |acc, i| acc * rate / i as f64);
        let b = bound.min(1.0);
        let sigma = (b * (1.0 - b) / n as f64).sqrt();
        TailRow { k, empirical, bound, sigma, violated: empirical > bound + 3.0 * sigma }
    })
    .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn steps_rounding() {
        assert_eq!(steps_for(1.0, 0.1), 10);
        assert_eq!(steps_for(1.0, 0.025), 40);
        assert_eq!(steps_for(0.7, 0.1), 7);
        assert_eq!(steps_for(1.0, 0.3), 3);
    }

    #[test]
    fn validation() {
        let mut c = ConvergenceConfig { replicas: 10, ..Default::default() };
        assert!(c.validate().is_ok());
        c.right = c.left;
        assert!(c.validate().is_err());
        let c = ConvergenceConfig { epsilons: vec![2.0], replicas: 10, ..Default::default() };
        let err = c.validate().unwrap_err().to_string();
        assert!(err.contains("delta2"), "{err}");
        let c = ConvergenceConfig { replicas: 0, ..Default::default() };
        assert!(c.validate().is_err());
    }

    #[test]
    fn tail_rows() {
        let rows = tail_bound_check(&[10, 10, 11, 9], 1.0, 0.3, 1.0, 10, -1..=4);
        assert_eq!(rows[1].k, 0);
        assert_eq!(rows[1].bound, 1.0);
        assert!((rows[1].empirical - 0.5).abs() < 1e-15);
        assert!((rows[0].bound - 0.3).abs() < 1e-15);
        assert!((rows[5].bound - 1.0 / 24.0).abs() < 1e-15);
        assert!(!rows[1].violated);
    }

    #[test]
    fn small_experiment_is_reproducible() {
        let cfg = ConvergenceConfig { replicas: 500, epsilons: vec![0.2, 0.1], reference_m: 16, reference_n: 16, ..Default::default() };
        let a = run_convergence_experiment(&cfg).unwrap();
        let b = run_convergence_experiment(&cfg).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.rows_named("ks:tag=-1:t=1").count(), 2);
    }

    #[test]
    fn engines_agree_in_law() {
        let base = ConvergenceConfig { replicas: 20_000, epsilons: vec![0.2], reference_m: 16, reference_n: 16, ..Default::default() };
        let direct = sample_offset(&base, 0.2).unwrap();
        let graph = sample_offset(&ConvergenceConfig { engine: OffsetEngine::Graph, ..base.clone() }, 0.2).unwrap();
        let ens = sample_offset(&ConvergenceConfig { engine: OffsetEngine::Ensemble, ..base.clone() }, 0.2).unwrap();
        let crit = ks_critical(0.001, 20_000, 20_000);
        assert!(ks_distance(&direct.column(0), &graph.column(0)).unwrap() < crit);
        assert!(ks_distance(&direct.column(0), &ens.column(0)).unwrap() < crit);
        assert_eq!(ens.identity_violations, 0);
    }
}
