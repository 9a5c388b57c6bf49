//! ASEP evolution through the Harris graph, a per-particle clock oracle, and
//! the current observable.

use std::io::Write;

use crate::error::{check_rates, invalid, Result};
use crate::lattice::{Color, ParticleConfig, Window};
use crate::rng::RngStream;
use crate::timegraph::{find_inactive_sites, ContinuousEvent, ContinuousTimeGraph};

/// Snapshots of one ASEP run at the requested times.
#[derive(Debug, Clone, PartialEq)]
pub struct AsepTrajectory {
    pub initial: ParticleConfig,
    /// `(time, configuration)` in increasing time order.
    pub snapshots: Vec<(f64, ParticleConfig)>,
    pub horizon: f64,
}

impl AsepTrajectory {
    pub fn at(&self, t: f64) -> Result<&ParticleConfig> {
        if t == 0.0 {
            if let Some((_, c)) = self.snapshots.iter().find(|(s, _)| *s == 0.0) {
                return Ok(c);
            }
            return Ok(&self.initial);
        }
        self.snapshots
            .iter()
            .find(|(s, _)| *s == t)
            .map(|(_, c)| c)
            .ok_or_else(|| crate::error::Error::InvalidArgument(format!("time {t} was not recorded")))
    }

    /// Rows `replica_id,time,tag,position,color`.
    pub fn write_csv_rows<W: Write>(&self, replica: u64, w: &mut csv::Writer<W>) -> Result<()> {
        for (t, c) in &self.snapshots {
            for (tag, pos, color) in c.iter() {
                w.write_record([replica.to_string(), t.to_string(), tag.to_string(), pos.to_string(), color.as_str().to_string()])?;
            }
        }
        Ok(())
    }
}

pub const SNAPSHOT_HEADER: [&str; 5] = ["replica_id", "time", "tag", "position", "color"];

fn sorted_queries(query_times: &[f64], horizon: f64) -> Result<Vec<f64>> {
    let mut q = query_times.to_vec();
    for &t in &q {
        if !(t >= 0.0 && t <= horizon) {
            return invalid(format!("query time {t} outside [0, {horizon}]"));
        }
    }
    q.sort_by(f64::total_cmp);
    q.dedup();
    Ok(q)
}

/// Occupation map with particle indices, covering one window.
pub(crate) struct Lattice {
    window: Window,
    slot: Vec<u32>,
    positions: Vec<i64>,
    n_blue: usize,
}

const EMPTY: u32 = u32::MAX;

impl Lattice {
    pub(crate) fn new(config: &ParticleConfig) -> Self {
        let window = config.window();
        let mut slot = vec![EMPTY; window.len()];
        for (k, &p) in config.positions().iter().enumerate() {
            slot[(p - window.lo) as usize] = k as u32;
        }
        Self { window, slot, positions: config.positions().to_vec(), n_blue: config.blue_count() }
    }

    #[inline]
    fn index(&self, site: i64) -> Option<usize> {
        self.window.contains(site).then(|| (site - self.window.lo) as usize)
    }

    /// Index of the particle at `site`, if any.
    #[inline]
    pub(crate) fn occupant(&self, site: i64) -> Option<u32> {
        self.index(site).map(|k| self.slot[k]).filter(|&k| k != EMPTY)
    }

    /// Applies `(t; i, j)`; returns whether a particle moved.
    #[inline]
    pub(crate) fn apply(&mut self, i: i64, j: i64) -> bool {
        let (Some(a), Some(b)) = (self.index(i), self.index(j)) else {
            return false;
        };
        let k = self.slot[a];
        if k == EMPTY || self.slot[b] != EMPTY {
            return false;
        }
        self.slot[a] = EMPTY;
        self.slot[b] = k;
        self.positions[k as usize] = j;
        true
    }

    pub(crate) fn config(&self) -> ParticleConfig {
        ParticleConfig::from_parts_unchecked(self.window, self.positions.clone(), self.n_blue)
    }
}

fn run_events<'a>(
    config: &ParticleConfig,
    events: impl Iterator<Item = &'a ContinuousEvent>,
    queries: &[f64],
) -> Vec<(f64, ParticleConfig)> {
    let mut lat = Lattice::new(config);
    let mut snapshots = Vec::with_capacity(queries.len());
    let mut q = queries.iter().peekable();
    for e in events {
        while let Some(&&t) = q.peek() {
            if t < e.t {
                snapshots.push((t, lat.config()));
                q.next();
            } else {
                break;
            }
        }
        if q.peek().is_none() {
            break;
        }
        lat.apply(e.i, e.j);
    }
    for &t in q {
        snapshots.push((t, lat.config()));
    }
    snapshots
}

/// Applies the graph's events in time order; a particle at `i` moves to `j`
/// when `j` is empty. Destinations outside the configuration window block.
pub fn evolve_asep(
    config: &ParticleConfig,
    graph: &ContinuousTimeGraph,
    horizon: f64,
    query_times: &[f64],
) -> Result<AsepTrajectory> {
    if horizon > graph.horizon() {
        return invalid(format!("horizon {horizon} exceeds graph horizon {}", graph.horizon()));
    }
    if !graph.window().covers(&config.window()) {
        return invalid("configuration window must lie inside the graph window");
    }
    let queries = sorted_queries(query_times, horizon)?;
    let snapshots = run_events(config, graph.events().iter().take_while(|e| e.t <= horizon), &queries);
    Ok(AsepTrajectory { initial: config.clone(), snapshots, horizon })
}

/// Same result as [`evolve_asep`], computed by cutting the lattice at the
/// graph's inactive sites and evolving every piece on its own.
pub fn evolve_asep_partitioned(
    config: &ParticleConfig,
    graph: &ContinuousTimeGraph,
    horizon: f64,
    query_times: &[f64],
) -> Result<AsepTrajectory> {
    if horizon > graph.horizon() {
        return invalid(format!("horizon {horizon} exceeds graph horizon {}", graph.horizon()));
    }
    let w = config.window();
    if !graph.window().covers(&w) {
        return invalid("configuration window must lie inside the graph window");
    }
    let queries = sorted_queries(query_times, horizon)?;
    let mut cuts: Vec<i64> = find_inactive_sites(graph, horizon)?
        .into_iter()
        .filter(|&s| s > w.lo && s <= w.hi)
        .collect();
    cuts.insert(0, w.lo);
    cuts.push(w.hi + 1);

    let mut pieces: Vec<Vec<(f64, ParticleConfig)>> = Vec::new();
    for span in cuts.windows(2) {
        let piece_window = Window::new(span[0], span[1] - 1)?;
        let piece = config.restricted(piece_window);
        let events = graph
            .events()
            .iter()
            .take_while(|e| e.t <= horizon)
            .filter(|e| piece_window.contains(e.i));
        pieces.push(run_events(&piece, events, &queries));
    }
    let snapshots = queries
        .iter()
        .enumerate()
        .map(|(q, &t)| {
            let positions: Vec<i64> = pieces.iter().flat_map(|p| p[q].1.positions().iter().copied()).collect();
            (t, ParticleConfig::from_parts_unchecked(w, positions, config.blue_count()))
        })
        .collect();
    Ok(AsepTrajectory { initial: config.clone(), snapshots, horizon })
}

/// Per-particle exponential clocks simulated directly (Gillespie): each
/// particle rings at total rate `L + R` and jumps right with probability
/// `R / (L + R)`. Jumps leaving the window are blocked.
///
/// `L = R = 0` is accepted here and leaves the configuration frozen.
pub fn evolve_asep_naive(
    config: &ParticleConfig,
    left: f64,
    right: f64,
    horizon: f64,
    query_times: &[f64],
    stream: RngStream,
) -> Result<AsepTrajectory> {
    if !(left == 0.0 && right == 0.0) {
        check_rates(left, right)?;
    }
    let queries = sorted_queries(query_times, horizon)?;
    let mut lat = Lattice::new(config);
    let n = lat.positions.len();
    let total = n as f64 * (left + right);
    let mut snapshots = Vec::with_capacity(queries.len());
    let mut q = queries.iter().peekable();
    if total > 0.0 {
        let mut rng = stream.rng();
        let mut t = 0.0;
        loop {
            t += rng.exponential(total);
            while let Some(&&s) = q.peek() {
                if s < t {
                    snapshots.push((s, lat.config()));
                    q.next();
                } else {
                    break;
                }
            }
            if q.peek().is_none() {
                break;
            }
            let k = ((rng.uniform() * n as f64) as usize).min(n - 1);
            let from = lat.positions[k];
            let to = if rng.uniform() * (left + right) < right { from + 1 } else { from - 1 };
            lat.apply(from, to);
        }
    }
    for &s in q {
        snapshots.push((s, lat.config()));
    }
    Ok(AsepTrajectory { initial: config.clone(), snapshots, horizon })
}

/// `J_t(x)`: blue particles right of `x` minus red particles at or left of
/// `x` at time `t`.
pub fn asep_current(traj: &AsepTrajectory, x: i64, t: f64) -> Result<i64> {
    Ok(current_of(traj.at(t)?, x))
}

/// The current of a single tagged configuration (colors mark the initial side).
pub fn current_of(c: &ParticleConfig, x: i64) -> i64 {
    c.iter()
        .map(|(_, p, color)| match color {
            Color::Blue => (p > x) as i64,
            Color::Red => -((p <= x) as i64),
        })
        .sum()
}
