//! The nearest-neighbor process driven by the altered graph, which bridges
//! the bounded six-vertex model and the bounded ASEP.

use std::collections::HashMap;

use crate::asep::Lattice;
use crate::error::{invalid, Result};
use crate::lattice::{asep_config_from_initial, InitialData, ParticleConfig, Window};
use crate::timegraph::{AlteredTimeGraph, DiscreteEvent};

/// Configuration of the process at an integer time.
#[derive(Debug, Clone, PartialEq)]
pub struct TildeQState {
    pub config: ParticleConfig,
    pub time: u64,
    pub m: i64,
    pub n: i64,
}

/// Window on which the process is represented: it covers the entry sites
/// of every blue particle entering within `steps`, the bounded region plus
/// one site on each side, and the stored data.
pub fn tilde_q_window(phi: &InitialData, m: i64, n: i64, steps: u64) -> Window {
    let reach = (phi.len() as i64).max(steps as i64 + 1).max(m + 2).max(n + 2);
    Window { lo: 1 - reach, hi: reach }
}

/// Starts from the ASEP initial configuration, stays frozen through time
/// `M`, and afterwards applies every event `(t; i, j)` that shares no site
/// with another event at time `t`, provided a particle sits at `i` and `j`
/// is empty at time `t - 1`. Conflicting events move nothing.
///
/// Returns the states at `query_times` (sorted, each `<= steps`).
pub fn evolve_tilde_q(
    graph: &AlteredTimeGraph,
    phi: &InitialData,
    m: i64,
    n: i64,
    steps: u64,
    query_times: &[u64],
) -> Result<Vec<TildeQState>> {
    let bounded = Window::symmetric(m, n)?;
    if graph.events().iter().any(|e| !bounded.contains(e.i)) {
        return invalid(format!("graph is not [-{m}, {n}]-bounded"));
    }
    if steps > graph.horizon() {
        return invalid(format!("graph horizon {} is shorter than {steps} steps", graph.horizon()));
    }
    let mut queries = query_times.to_vec();
    queries.sort_unstable();
    queries.dedup();
    if queries.last().is_some_and(|&t| t > steps) {
        return invalid(format!("query time beyond {steps} steps"));
    }
    let window = tilde_q_window(phi, m, n, steps);
    let initial = asep_config_from_initial(phi, window)?;
    let mut lat = Lattice::new(&initial);
    let mut out = Vec::with_capacity(queries.len());
    let mut q = queries.iter().peekable();
    let snapshot = |lat: &Lattice, t: u64| TildeQState { config: lat.config(), time: t, m, n };
    let mut uses: HashMap<i64, u32> = HashMap::new();
    for t in 0..=steps {
        if t > m.max(0) as u64 {
            let events = graph.events_at(t);
            if !events.is_empty() {
                apply_step(&mut lat, events, &mut uses);
            }
        }
        while q.peek().is_some_and(|&&s| s == t) {
            out.push(snapshot(&lat, t));
            q.next();
        }
    }
    Ok(out)
}

fn apply_step(lat: &mut Lattice, events: &[DiscreteEvent], uses: &mut HashMap<i64, u32>) {
    uses.clear();
    for e in events {
        *uses.entry(e.i).or_insert(0) += 1;
        *uses.entry(e.j).or_insert(0) += 1;
    }
    // An event is free when each of its two sites is used by it alone.
    // Free events touch disjoint site pairs, so applying them one by one
    // equals applying them simultaneously against time t - 1.
    for e in events {
        if uses[&e.i] == 1 && uses[&e.j] == 1 {
            lat.apply(e.i, e.j);
        }
    }
}
