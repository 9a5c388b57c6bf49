//! The offset particle system `q_i(t) = p_i(t) - t`, evolved either directly
//! from its one-step law or by replaying a discrete time graph.

use std::collections::VecDeque;
use std::io::Write;

use crate::error::{check_vertex_param, invalid, Result};
use crate::lattice::{Color, InitialData, ParticleConfig, Window};
use crate::rng::{RngStream, StreamRng};
use crate::timegraph::{DiscreteEvent, DiscreteTimeGraph};

/// Offset configuration at integer time `t`.
///
/// Particles are stored left to right; the first `n_blue` are blue. Tags
/// follow the configuration convention (`-n_blue` for the leftmost).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct OffsetState {
    pub time: u64,
    pub positions: VecDeque<i64>,
    pub n_blue: usize,
}

impl OffsetState {
    /// Time-0 state: red particles at every `p` with `phi_p^(x) = 1`, over
    /// the stored prefix of `phi`.
    pub fn initial(phi: &InitialData) -> Self {
        let positions = (1..=phi.len()).filter(|&p| phi.x_bit(p)).map(|p| p as i64).collect();
        Self { time: 0, positions, n_blue: 0 }
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn position_of_tag(&self, tag: i64) -> Option<i64> {
        let idx = tag + self.n_blue as i64;
        (idx >= 0).then(|| self.positions.get(idx as usize).copied()).flatten()
    }

    /// As a tagged configuration; the window spans the entry site `1 - t`
    /// and every particle.
    pub fn config(&self) -> ParticleConfig {
        let entry = 1 - self.time as i64;
        let lo = self.positions.front().map_or(entry, |&p| p.min(entry));
        let hi = self.positions.back().map_or(lo, |&p| p.max(lo));
        ParticleConfig::from_parts_unchecked(Window { lo, hi }, self.positions.iter().copied().collect(), self.n_blue)
    }

    fn check_invariants(&self) {
        debug_assert!(self.positions.iter().zip(self.positions.iter().skip(1)).all(|(a, b)| a < b));
        debug_assert!(self.n_blue <= self.positions.len());
    }
}

/// Random decisions of the direct dynamics.
pub trait JumpChoices {
    /// Left jump with probability `p`.
    fn left(&mut self, p: f64) -> bool;
    /// Capped geometric displacement: `P[j] = (1-q) q^j` for `j < cap` and
    /// `P[cap] = q^cap`; `None` means no cap.
    fn right(&mut self, q: f64, cap: Option<u64>) -> u64;
}

impl JumpChoices for StreamRng {
    fn left(&mut self, p: f64) -> bool {
        self.bernoulli(p)
    }
    fn right(&mut self, q: f64, cap: Option<u64>) -> u64 {
        self.capped_geometric(q, cap)
    }
}

/// Jump instructions of the graph dynamics at step `t`.
pub trait JumpInstructions {
    /// Whether `(t; site, site - 1)` is an instruction.
    fn left_event(&mut self, t: u64, site: i64) -> bool;
    /// The destination `j > site` of a right instruction from `site`, if any.
    fn right_event(&mut self, t: u64, site: i64) -> Option<i64>;
}

/// Looks instructions up in a sampled graph.
pub struct GraphInstructions<'a> {
    graph: &'a DiscreteTimeGraph,
    t: u64,
    slice: &'a [DiscreteEvent],
}

impl<'a> GraphInstructions<'a> {
    pub fn new(graph: &'a DiscreteTimeGraph) -> Self {
        Self { graph, t: 0, slice: &[] }
    }

    fn at(&mut self, t: u64, site: i64) -> &'a [DiscreteEvent] {
        if t != self.t {
            self.t = t;
            self.slice = self.graph.events_at(t);
        }
        let a = self.slice.partition_point(|e| e.i < site);
        let b = a + self.slice[a..].iter().take_while(|e| e.i == site).count();
        &self.slice[a..b]
    }
}

impl JumpInstructions for GraphInstructions<'_> {
    fn left_event(&mut self, t: u64, site: i64) -> bool {
        self.at(t, site).iter().any(|e| e.j == site - 1)
    }
    fn right_event(&mut self, t: u64, site: i64) -> Option<i64> {
        self.at(t, site).iter().find(|e| e.j > site).map(|e| e.j)
    }
}

/// Landing site of a jump from `i` toward `j > i`: the minimal `m` in
/// `[i, j]` such that `m + 1` was occupied before the step, or `j`.
pub fn try_jump(previous: &ParticleConfig, i: i64, j: i64) -> Result<i64> {
    if j <= i {
        return invalid(format!("try_jump needs j > i, got i={i}, j={j}"));
    }
    let next = previous.positions().iter().copied().find(|&p| p > i);
    Ok(land(j, next))
}

/// `next` is the nearest occupied site right of `i` before the step.
#[inline]
fn land(j: i64, next: Option<i64>) -> i64 {
    match next {
        Some(s) if s <= j + 1 => s - 1,
        _ => j,
    }
}

/// One step of the direct dynamics, in place. Particles are updated left to
/// right: a newly entering blue particle first, then the existing ones.
pub fn step_direct<C: JumpChoices>(state: &mut OffsetState, delta1: f64, delta2: f64, enters: bool, choices: &mut C) {
    let t = state.time + 1;
    let mut start = 0;
    if enters {
        let site = 1 - t as i64;
        // The entering particle may reach the site just left of the
        // previous leftmost particle.
        let cap = state.positions.front().map(|&f| (f - site - 1) as u64);
        let j = choices.right(delta2, cap);
        state.positions.push_front(site + j as i64);
        state.n_blue += 1;
        start = 1;
    }
    for k in start..state.positions.len() {
        let prev = state.positions[k];
        let cap = state.positions.get(k + 1).map(|&np| (np - prev - 1) as u64);
        let left_blocked = k > 0 && state.positions[k - 1] == prev - 1;
        state.positions[k] = if !left_blocked && choices.left(delta1) {
            prev - 1
        } else {
            prev + choices.right(delta2, cap) as i64
        };
    }
    state.time = t;
    state.check_invariants();
}

/// One step driven by jump instructions, in place.
pub fn step_graph<I: JumpInstructions>(state: &mut OffsetState, enters: bool, instr: &mut I) {
    let t = state.time + 1;
    let mut start = 0;
    if enters {
        let site = 1 - t as i64;
        let next = state.positions.front().copied();
        let landing = instr.right_event(t, site).map_or(site, |j| land(j, next));
        state.positions.push_front(landing);
        state.n_blue += 1;
        start = 1;
    }
    for k in start..state.positions.len() {
        let prev = state.positions[k];
        if instr.left_event(t, prev) {
            let blocked = k > 0 && state.positions[k - 1] == prev - 1;
            if !blocked {
                state.positions[k] = prev - 1;
                continue;
            }
        }
        if let Some(j) = instr.right_event(t, prev) {
            state.positions[k] = land(j, state.positions.get(k + 1).copied());
        }
    }
    state.time = t;
    state.check_invariants();
}

/// [`step_graph`] for a sampled graph, visiting only the particles that
/// hold an instruction. `events` are the instructions of step `t`, sorted
/// by source.
pub fn step_graph_events(state: &mut OffsetState, enters: bool, events: &[DiscreteEvent]) {
    let t = state.time + 1;
    let at = |site: i64| {
        let a = events.partition_point(|e| e.i < site);
        let group = &events[a..a + events[a..].iter().take_while(|e| e.i == site).count()];
        let left = group.iter().any(|e| e.j == site - 1);
        let right = group.iter().find(|e| e.j > site).map(|e| e.j);
        (left, right)
    };
    let mut start = 0;
    if enters {
        let site = 1 - t as i64;
        let next = state.positions.front().copied();
        let landing = at(site).1.map_or(site, |j| land(j, next));
        state.positions.push_front(landing);
        state.n_blue += 1;
        start = 1;
    }
    // Particles are visited left to right; `done` is the first index not yet
    // processed, so a particle that just moved onto a source site is skipped.
    let mut done = start;
    let mut k_from = 0;
    while k_from < events.len() {
        let site = events[k_from].i;
        k_from += events[k_from..].iter().take_while(|e| e.i == site).count();
        let Ok(k) = state.positions.binary_search(&site) else { continue };
        if k < done {
            continue;
        }
        done = k + 1;
        let (left, right) = at(site);
        if left {
            let blocked = k > 0 && state.positions[k - 1] == site - 1;
            if !blocked {
                state.positions[k] = site - 1;
                continue;
            }
        }
        if let Some(j) = right {
            state.positions[k] = land(j, state.positions.get(k + 1).copied());
        }
    }
    state.time = t;
    state.check_invariants();
}

fn entry_bits(phi: &InitialData, from: u64, steps: u64) -> Result<Vec<bool>> {
    let last = (from + steps) as usize;
    let phi = phi.extended(last)?;
    Ok((from + 1..=from + steps).map(|t| phi.y_bit(t as usize)).collect())
}

/// Advances `state` by `steps` direct steps, returning every intermediate
/// state (the starting one included).
pub fn evolve_offset_direct(
    state: &OffsetState,
    delta1: f64,
    delta2: f64,
    phi: &InitialData,
    steps: u64,
    stream: RngStream,
) -> Result<Vec<OffsetState>> {
    check_vertex_param("delta1", delta1)?;
    check_vertex_param("delta2", delta2)?;
    let bits = entry_bits(phi, state.time, steps)?;
    let mut rng = stream.rng();
    let mut cur = state.clone();
    let mut out = Vec::with_capacity(steps as usize + 1);
    out.push(cur.clone());
    for &b in &bits {
        step_direct(&mut cur, delta1, delta2, b, &mut rng);
        out.push(cur.clone());
    }
    Ok(out)
}

/// Like [`evolve_offset_direct`] but keeps only the final state.
pub fn advance_offset_direct(
    state: &mut OffsetState,
    delta1: f64,
    delta2: f64,
    phi: &InitialData,
    steps: u64,
    stream: RngStream,
) -> Result<()> {
    check_vertex_param("delta1", delta1)?;
    check_vertex_param("delta2", delta2)?;
    let bits = entry_bits(phi, state.time, steps)?;
    let mut rng = stream.rng();
    for &b in &bits {
        step_direct(state, delta1, delta2, b, &mut rng);
    }
    Ok(())
}

/// Replays a discrete time graph for `steps` steps; deterministic.
pub fn evolve_offset_graph(
    state: &OffsetState,
    graph: &DiscreteTimeGraph,
    phi: &InitialData,
    steps: u64,
) -> Result<Vec<OffsetState>> {
    if state.time + steps > graph.horizon() {
        return invalid(format!(
            "graph horizon {} is shorter than {} steps",
            graph.horizon(),
            state.time + steps
        ));
    }
    let bits = entry_bits(phi, state.time, steps)?;
    let mut cur = state.clone();
    let mut out = Vec::with_capacity(steps as usize + 1);
    out.push(cur.clone());
    for &b in &bits {
        let events = graph.events_at(cur.time + 1);
        step_graph_events(&mut cur, b, events);
        out.push(cur.clone());
    }
    Ok(out)
}

/// In-place form of [`evolve_offset_graph`].
pub fn advance_offset_graph(state: &mut OffsetState, graph: &DiscreteTimeGraph, phi: &InitialData, steps: u64) -> Result<()> {
    if state.time + steps > graph.horizon() {
        return invalid(format!(
            "graph horizon {} is shorter than {} steps",
            graph.horizon(),
            state.time + steps
        ));
    }
    for b in entry_bits(phi, state.time, steps)? {
        let t = state.time + 1;
        step_graph_events(state, b, graph.events_at(t));
    }
    Ok(())
}

pub const OFFSET_HEADER: [&str; 5] = ["replica", "t", "tag", "q", "color"];

/// Rows `replica,t,tag,q,color` for each state.
pub fn write_offset_rows<W: Write>(states: &[OffsetState], replica: u64, w: &mut csv::Writer<W>) -> Result<()> {
    for s in states {
        for (k, q) in s.positions.iter().enumerate() {
            let tag = k as i64 - s.n_blue as i64;
            let color = if k < s.n_blue { Color::Blue } else { Color::Red };
            w.write_record([replica.to_string(), s.time.to_string(), tag.to_string(), q.to_string(), color.as_str().to_string()])?;
        }
    }
    Ok(())
}
