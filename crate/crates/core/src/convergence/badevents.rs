//! The four events outside of which the bounded six-vertex model and the
//! nearest-neighbor bridge process coincide.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{check_rates, invalid, Result};
use crate::lattice::{InitialData, InitialDataSpec, Window};
use crate::rng::RngStream;
use crate::sixvertex::offset::{advance_offset_graph, OffsetState};
use crate::timegraph::{alter_graph, restrict_graph, sample_discrete_graph, DiscreteTimeGraph};

use super::experiment::steps_for;
use super::tildeq::evolve_tilde_q;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct BadEventFlags {
    /// Some queried tag starts at or left of `-T` (or does not exist).
    pub initial_escape: bool,
    /// Some instruction at a time in `[1, M]` with source in `[-M, N]`.
    pub early_window_event: bool,
    /// Some instruction at a time in `[1, T]` with source `i` in `[-M, N]`
    /// and destination `j >= i + 2`.
    pub long_jump: bool,
    /// Two distinct instructions at one time in `[1, T]`, both sourced in
    /// `[-M, N]`.
    pub simultaneous_pair: bool,
}

impl BadEventFlags {
    pub fn any(&self) -> bool {
        self.initial_escape || self.early_window_event || self.long_jump || self.simultaneous_pair
    }
}

/// Initial ASEP position of `tag`, if it exists within the first `limit`
/// data indices.
pub fn initial_position(phi: &InitialData, tag: i64, limit: usize) -> Option<i64> {
    let phi = phi.extended(limit).ok()?;
    if tag < 0 {
        // Tag -k is the k-th occupied site counting leftward from 0.
        let k = (-tag) as usize;
        (1..=limit).filter(|&s| phi.y_bit(s)).nth(k - 1).map(|s| 1 - s as i64)
    } else {
        (1..=limit).filter(|&p| phi.x_bit(p)).nth(tag as usize).map(|p| p as i64)
    }
}

pub fn detect_bad_events(
    graph: &DiscreteTimeGraph,
    phi: &InitialData,
    m: i64,
    n: i64,
    horizon: u64,
    tags: &[i64],
) -> Result<BadEventFlags> {
    let w = Window::symmetric(m, n)?;
    let mut flags = BadEventFlags::default();
    let limit = (horizon as usize + 1).max(phi.len());
    flags.initial_escape = tags
        .iter()
        .any(|&tag| initial_position(phi, tag, limit).is_none_or(|x| x <= -(horizon as i64)));
    let mut last_time = 0u64;
    let mut count_at_time = 0u32;
    for e in graph.events().iter().filter(|e| w.contains(e.i) && e.t >= 1 && e.t <= horizon) {
        if e.t as i64 <= m {
            flags.early_window_event = true;
        }
        if e.j >= e.i + 2 {
            flags.long_jump = true;
        }
        if e.t == last_time {
            count_at_time += 1;
        } else {
            last_time = e.t;
            count_at_time = 1;
        }
        if count_at_time >= 2 {
            flags.simultaneous_pair = true;
        }
    }
    Ok(flags)
}

/// One replica of the coupling: the `[-M, N]`-bounded offset model driven
/// by `graph`, and the bridge process driven by the altered bounded graph.
#[derive(Debug, Clone, PartialEq)]
pub struct CoupledOutcome {
    pub flags: BadEventFlags,
    /// `(tag, offset position, bridge position)` at the horizon.
    pub positions: Vec<(i64, Option<i64>, Option<i64>)>,
}

impl CoupledOutcome {
    pub fn agree(&self) -> bool {
        self.positions.iter().all(|(_, a, b)| a == b)
    }
}

pub fn coupled_outcome(
    graph: &DiscreteTimeGraph,
    phi: &InitialData,
    m: i64,
    n: i64,
    horizon: u64,
    tags: &[i64],
) -> Result<CoupledOutcome> {
    if horizon > graph.horizon() {
        return invalid("graph horizon shorter than the coupling horizon");
    }
    let flags = detect_bad_events(graph, phi, m, n, horizon, tags)?;
    let bounded = restrict_graph(graph, m, n)?;
    let mut last = OffsetState::initial(phi);
    advance_offset_graph(&mut last, &bounded, phi, horizon)?;
    let bridge = evolve_tilde_q(&alter_graph(&bounded), phi, m, n, horizon, &[horizon])?;
    let config = &bridge[0].config;
    let positions = tags
        .iter()
        .map(|&tag| (tag, last.position_of_tag(tag), config.position_of_tag(tag).ok()))
        .collect();
    Ok(CoupledOutcome { flags, positions })
}

/// Bounds on the probabilities of events 2, 3 and 4 for `delta = eps (L, R)`.
pub fn bad_event_bounds(m: i64, n: i64, left: f64, right: f64, eps: f64, t: f64) -> [f64; 3] {
    let width = (m + n + 1) as f64;
    [
        m as f64 * width * (right + left) * eps,
        width * right * right * eps * t,
        width * width * (right + left).powi(2) * eps * t,
    ]
}

/// Frequencies of the four bad events over graphs sampled on `[-M, N]`,
/// and how often the coupling fails on the replicas where none occurs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BadEventSurvey {
    pub epsilon: f64,
    pub m: i64,
    pub n: i64,
    pub horizon: u64,
    pub replicas: usize,
    /// Events 1 to 4 in order.
    pub frequencies: [f64; 4],
    /// Bounds for events 2 to 4.
    pub bounds: [f64; 3],
    /// Replicas with no bad event.
    pub clean: usize,
    /// Clean replicas on which the two processes differ.
    pub disagreements: usize,
}

impl BadEventSurvey {
    /// One binomial standard error of event `e` (2, 3 or 4) under its bound.
    pub fn sigma(&self, e: usize) -> f64 {
        let b = self.bounds[e - 2].min(1.0);
        (b * (1.0 - b) / self.replicas as f64).sqrt()
    }

    /// Events 2 to 4 stay below their bounds up to three standard errors.
    pub fn within_bounds(&self) -> bool {
        (2..=4).all(|e| self.frequencies[e - 1] <= self.bounds[e - 2] + 3.0 * self.sigma(e))
    }
}

/// Runs [`detect_bad_events`] on `replicas` graphs at `delta = eps (L, R)`
/// up to `T = floor(t / eps)`, and [`coupled_outcome`] on the clean ones.
#[allow(clippy::too_many_arguments)]
pub fn bad_event_survey(
    left: f64,
    right: f64,
    phi: &InitialDataSpec,
    eps: f64,
    (m, n): (i64, i64),
    t: f64,
    tags: &[i64],
    replicas: usize,
    seed: u64,
) -> Result<BadEventSurvey> {
    check_rates(left, right)?;
    if replicas == 0 {
        return invalid("replicas must be at least 1");
    }
    let horizon = steps_for(t, eps);
    if horizon == 0 {
        return invalid(format!("epsilon {eps} exceeds the time {t}"));
    }
    let w = Window::symmetric(m, n)?;
    let len = 2 * horizon as usize + (m + n) as usize + 8;
    let root = RngStream::new(seed, 4).child(eps.to_bits()).child(((m as u64) << 32) | n as u64);
    let rows: Result<Vec<(BadEventFlags, Option<bool>)>> = (0..replicas)
        .into_par_iter()
        .map(|k| {
            let s = root.child(k as u64);
            let phi = phi.realize(len, s.child(0))?;
            let g = sample_discrete_graph(eps * left, eps * right, w, horizon, s.child(1))?;
            let f = detect_bad_events(&g, &phi, m, n, horizon, tags)?;
            let agree = if f.any() { None } else { Some(coupled_outcome(&g, &phi, m, n, horizon, tags)?.agree()) };
            Ok((f, agree))
        })
        .collect();
    let rows = rows?;
    let freq = |pred: fn(&BadEventFlags) -> bool| rows.iter().filter(|r| pred(&r.0)).count() as f64 / replicas as f64;
    Ok(BadEventSurvey {
        epsilon: eps,
        m,
        n,
        horizon,
        replicas,
        frequencies: [
            freq(|f| f.initial_escape),
            freq(|f| f.early_window_event),
            freq(|f| f.long_jump),
            freq(|f| f.simultaneous_pair),
        ],
        bounds: bad_event_bounds(m, n, left, right, eps, t),
        clean: rows.iter().filter(|r| r.1.is_some()).count(),
        disagreements: rows.iter().filter(|r| r.1 == Some(false)).count(),
    })
}
