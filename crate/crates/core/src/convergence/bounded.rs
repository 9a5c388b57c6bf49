//! Coupled comparison of `[-M, N]`-bounded models with a reference on a
//! window `factor` times larger, driven by one shared time graph.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::asep::Lattice;
use crate::error::{check_rates, check_vertex_param, invalid, Result};
use crate::lattice::{asep_config_from_initial, InitialDataSpec, Window};
use crate::rng::RngStream;
use crate::sixvertex::offset::{step_graph_events, OffsetState};
use crate::timegraph::{sample_continuous_graph, sample_discrete_graph};

use super::experiment::steps_for;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundedModel {
    Asep,
    SixVertex,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundedConfig {
    pub model: BoundedModel,
    pub left: f64,
    pub right: f64,
    pub phi: InitialDataSpec,
    /// Continuous horizon; the six-vertex model runs `floor(horizon / eps)` steps.
    pub horizon: f64,
    pub epsilon: f64,
    /// Reference window is `[-factor M, factor N]`.
    pub factor: i64,
    pub replicas: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundedRow {
    pub m: i64,
    pub n: i64,
    pub central: [i64; 2],
    pub disagreements: u64,
    pub replicas: u64,
    pub frequency: f64,
    /// One binomial standard error.
    pub sigma: f64,
}

impl BoundedConfig {
    pub fn validate(&self) -> Result<()> {
        check_rates(self.left, self.right)?;
        if !(self.horizon > 0.0) {
            return invalid("horizon must be positive");
        }
        if self.factor < 1 {
            return invalid("reference factor must be at least 1");
        }
        if self.replicas == 0 {
            return invalid("replicas must be at least 1");
        }
        if self.model == BoundedModel::SixVertex {
            check_vertex_param("delta1", self.epsilon * self.left)?;
            check_vertex_param("delta2", self.epsilon * self.right)?;
            if steps_for(self.horizon, self.epsilon) == 0 {
                return invalid("horizon shorter than one step");
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "model": self.model,
            "L": self.left,
            "R": self.right,
            "phi": self.phi.describe(),
            "horizon": self.horizon,
            "epsilon": self.epsilon,
            "deltas": [self.epsilon * self.left, self.epsilon * self.right],
            "factor": self.factor,
            "replicas": self.replicas,
            "seed": self.seed,
        })
    }

    /// Central comparison window for bounds `(m, n)`.
    pub fn central(&self, m: i64, n: i64) -> Window {
        let div = match self.model {
            BoundedModel::Asep => 32,
            BoundedModel::SixVertex => 2,
        };
        Window { lo: -(m / div), hi: n / div }
    }
}

fn asep_disagrees(cfg: &BoundedConfig, m: i64, n: i64, stream: RngStream) -> Result<bool> {
    let reference = Window::symmetric(cfg.factor * m, cfg.factor * n)?;
    let bounded = Window::symmetric(m, n)?;
    let central = cfg.central(m, n);
    let len = (reference.hi).min(1 - reference.lo) as usize;
    let phi = cfg.phi.realize(len, stream.child(0))?;
    let config = asep_config_from_initial(&phi, reference)?;
    let graph = sample_continuous_graph(cfg.left, cfg.right, reference, cfg.horizon, stream.child(1))?;
    let mut full = Lattice::new(&config);
    let mut cut = Lattice::new(&config);
    for e in graph.events() {
        full.apply(e.i, e.j);
        if bounded.contains(e.i) {
            cut.apply(e.i, e.j);
        }
        // Only the two sites of this event can have changed.
        for s in [e.i, e.j] {
            if central.contains(s) && full.occupant(s) != cut.occupant(s) {
                return Ok(true);
            }
        }
    }
    Ok(false)
}

fn central_view(s: &OffsetState, w: Window) -> Vec<(usize, i64)> {
    s.positions.iter().copied().enumerate().filter(|&(_, p)| w.contains(p)).collect()
}

fn sixvertex_disagrees(cfg: &BoundedConfig, m: i64, n: i64, stream: RngStream) -> Result<bool> {
    let reference = Window::symmetric(cfg.factor * m, cfg.factor * n)?;
    let central = cfg.central(m, n);
    let steps = steps_for(cfg.horizon, cfg.epsilon);
    let len = (cfg.factor * m.max(n)) as usize + steps as usize + 1;
    let phi = cfg.phi.realize(len, stream.child(0))?;
    let graph = sample_discrete_graph(cfg.epsilon * cfg.left, cfg.epsilon * cfg.right, reference, steps, stream.child(1))?;
    let cut_graph = graph.restricted_to(Window::symmetric(m, n)?);
    let mut full = OffsetState::initial(&phi);
    let mut cut = full.clone();
    for t in 1..=steps {
        let enters = phi.y_bit(t as usize);
        step_graph_events(&mut full, enters, graph.events_at(t));
        step_graph_events(&mut cut, enters, cut_graph.events_at(t));
        if central_view(&full, central) != central_view(&cut, central) {
            return Ok(true);
        }
    }
    Ok(false)
}

/// For every `(M, N)` of the schedule, the frequency of replicas in which
/// the bounded model and the reference differ on the central window at
/// some time up to the horizon.
pub fn bounded_agreement_check(cfg: &BoundedConfig, schedule: &[(i64, i64)]) -> Result<Vec<BoundedRow>> {
    cfg.validate()?;
    let mut rows = Vec::with_capacity(schedule.len());
    for (idx, &(m, n)) in schedule.iter().enumerate() {
        if m < 1 || n < 1 {
            return invalid(format!("bounds must be positive, got M={m}, N={n}"));
        }
        let root = RngStream::new(cfg.seed, 3).child(idx as u64);
        let flags: Result<Vec<bool>> = (0..cfg.replicas)
            .into_par_iter()
            .map(|k| {
                let s = root.child(k as u64);
                match cfg.model {
                    BoundedModel::Asep => asep_disagrees(cfg, m, n, s),
                    BoundedModel::SixVertex => sixvertex_disagrees(cfg, m, n, s),
                }
            })
            .collect();
        let disagreements = flags?.iter().filter(|&&d| d).count() as u64;
        let frequency = disagreements as f64 / cfg.replicas as f64;
        let c = cfg.central(m, n);
        rows.push(BoundedRow {
            m,
            n,
            central: [c.lo, c.hi],
            disagreements,
            replicas: cfg.replicas as u64,
            frequency,
            sigma: (frequency * (1.0 - frequency) / cfg.replicas as f64).sqrt(),
        });
    }
    Ok(rows)
}

/// Whether each frequency falls below its predecessor by more than two
/// standard errors of the difference.
pub fn strictly_decreasing(rows: &[BoundedRow]) -> bool {
    rows.windows(2).all(|w| {
        let noise = (w[0].sigma.powi(2) + w[1].sigma.powi(2)).sqrt();
        w[0].frequency - w[1].frequency > 2.0 * noise
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(model: BoundedModel, factor: i64) -> BoundedConfig {
        BoundedConfig {
            model,
            left: 0.3,
            right: 1.0,
            phi: InitialDataSpec::Bernoulli { b1: 0.5, b2: 0.5 },
            horizon: 4.0,
            epsilon: 0.2,
            factor,
            replicas: 200,
            seed: 9,
        }
    }

    #[test]
    fn identical_graphs_never_disagree() {
        for model in [BoundedModel::Asep, BoundedModel::SixVertex] {
            let rows = bounded_agreement_check(&cfg(model, 1), &[(4, 4)]).unwrap();
            assert_eq!(rows[0].disagreements, 0);
        }
    }

    #[test]
    fn tiny_bounds_disagree_often() {
        let rows = bounded_agreement_check(&cfg(BoundedModel::SixVertex, 8), &[(2, 2)]).unwrap();
        assert!(rows[0].frequency > 0.1, "{rows:?}");
    }

    #[test]
    fn central_windows() {
        let c = cfg(BoundedModel::Asep, 8);
        assert_eq!(c.central(64, 64), Window { lo: -2, hi: 2 });
        assert_eq!(c.central(16, 16), Window { lo: 0, hi: 0 });
        let c = cfg(BoundedModel::SixVertex, 8);
        assert_eq!(c.central(16, 16), Window { lo: -8, hi: 8 });
    }

    #[test]
    fn decreasing_check() {
        let row = |f: f64| BoundedRow { m: 1, n: 1, central: [0, 0], disagreements: 0, replicas: 10_000, frequency: f, sigma: (f * (1.0 - f) / 1e4).sqrt() };
        assert!(strictly_decreasing(&[row(0.5), row(0.2), row(0.01)]));
        assert!(!strictly_decreasing(&[row(0.5), row(0.495)]));
    }
}
