//! Jump-instruction graphs.
//!
//! A time graph is a set of triplets `(t; i, j)`: at time `t`, a particle at
//! site `i` (if any) tries to jump to site `j`. The continuous graph carries
//! Poisson clocks per site and drives the ASEP; the discrete graph carries
//! one Bernoulli left trial and one geometric right trial per site and step
//! and drives the offset six-vertex model.

use std::cmp::Ordering;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{check_rates, check_vertex_param, invalid, Result};
use crate::lattice::Window;
use crate::rng::{capped_geometric_from_uniform, RngStream};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContinuousEvent {
    pub t: f64,
    pub i: i64,
    pub j: i64,
}

impl ContinuousEvent {
    /// Total order by `(t, i, j)`; deterministic even for equal times.
    pub fn order(&self, other: &Self) -> Ordering {
        self.t
            .total_cmp(&other.t)
            .then(self.i.cmp(&other.i))
            .then(self.j.cmp(&other.j))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct DiscreteEvent {
    pub t: u64,
    pub i: i64,
    pub j: i64,
}

/// Harris graph of the ASEP on a finite window up to a horizon.
#[derive(Debug, Clone, PartialEq)]
pub struct ContinuousTimeGraph {
    events: Vec<ContinuousEvent>,
    window: Window,
    horizon: f64,
    left_rate: f64,
    right_rate: f64,
}

/// Discrete time graph of the offset six-vertex model.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteTimeGraph {
    events: Vec<DiscreteEvent>,
    window: Window,
    horizon: u64,
    delta1: f64,
    delta2: f64,
}

/// Discrete graph whose long right jumps were shortened to one site.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AlteredTimeGraph {
    events: Vec<DiscreteEvent>,
    window: Window,
    horizon: u64,
}

/// Poisson clocks of rate `right` (to `i+1`) and `left` (to `i-1`) at every
/// site of `window`, on `(0, horizon]`.
pub fn sample_continuous_graph(
    left: f64,
    right: f64,
    window: Window,
    horizon: f64,
    stream: RngStream,
) -> Result<ContinuousTimeGraph> {
    check_rates(left, right)?;
    if !(horizon > 0.0 && horizon.is_finite()) {
        return invalid(format!("horizon must be positive, got {horizon}"));
    }
    let mut rng = stream.rng();
    let mut events = Vec::with_capacity(((left + right) * horizon * window.len() as f64 * 1.2) as usize + 8);
    for i in window.sites() {
        for (rate, j) in [(right, i + 1), (left, i - 1)] {
            if rate <= 0.0 {
                continue;
            }
            let mut t = rng.exponential(rate);
            while t <= horizon {
                events.push(ContinuousEvent { t, i, j });
                t += rng.exponential(rate);
            }
        }
    }
    events.sort_unstable_by(ContinuousEvent::order);
    Ok(ContinuousTimeGraph { events, window, horizon, left_rate: left, right_rate: right })
}

/// For every site `i` of `window` and step `t` in `1..=horizon`: a left
/// instruction `(t; i, i-1)` with probability `delta1`, and independently a
/// right instruction `(t; i, i+k)` with probability `(1-delta2) delta2^k`.
///
/// Each `(t, i)` consumes exactly two uniforms: one for the left trial, one
/// decoding "no right jump / offset k" by inverse CDF.
pub fn sample_discrete_graph(
    delta1: f64,
    delta2: f64,
    window: Window,
    horizon: u64,
    stream: RngStream,
) -> Result<DiscreteTimeGraph> {
    check_vertex_param("delta1", delta1)?;
    check_vertex_param("delta2", delta2)?;
    if horizon == 0 {
        return invalid("discrete horizon must be >= 1");
    }
    let mut rng = stream.rng();
    let expected = (delta1 + delta2) * horizon as f64 * window.len() as f64;
    let mut events = Vec::with_capacity((expected * 1.2) as usize + 8);
    for t in 1..=horizon {
        for i in window.sites() {
            let ul = rng.uniform();
            let ur = rng.uniform();
            if ul < delta1 {
                events.push(DiscreteEvent { t, i, j: i - 1 });
            }
            if let Some(k) = right_offset_from_uniform(ur, delta2) {
                events.push(DiscreteEvent { t, i, j: i + k as i64 });
            }
        }
    }
    Ok(DiscreteTimeGraph { events, window, horizon, delta1, delta2 })
}

/// `None` with probability `1 - delta2`, else `k >= 1` with probability
/// `(1 - delta2) delta2^k`.
pub fn right_offset_from_uniform(u: f64, delta2: f64) -> Option<u64> {
    if u < 1.0 - delta2 {
        return None;
    }
    // Rescale the top delta2-slice of [0,1) to a fresh uniform; given an
    // event, k - 1 is geometric with P[k - 1 >= m] = delta2^m.
    let v = ((u - (1.0 - delta2)) / delta2).clamp(0.0, 1.0 - f64::EPSILON);
    Some(1 + capped_geometric_from_uniform(v, delta2, None))
}

impl ContinuousTimeGraph {
    /// Builds a graph from explicit events; checks the structural invariants.
    pub fn from_events(
        mut events: Vec<ContinuousEvent>,
        window: Window,
        horizon: f64,
        left_rate: f64,
        right_rate: f64,
    ) -> Result<Self> {
        for e in &events {
            if (e.i - e.j).abs() != 1 {
                return invalid(format!("continuous event ({}; {}, {}) is not nearest-neighbor", e.t, e.i, e.j));
            }
            if !(e.t > 0.0 && e.t <= horizon) {
                return invalid(format!("event time {} outside (0, {horizon}]", e.t));
            }
            if !window.contains(e.i) {
                return invalid(format!("event source {} outside window", e.i));
            }
        }
        events.sort_unstable_by(ContinuousEvent::order);
        if events.windows(2).any(|w| w[0].t == w[1].t) {
            return invalid("continuous event times must be pairwise distinct");
        }
        Ok(Self { events, window, horizon, left_rate, right_rate })
    }

    pub fn events(&self) -> &[ContinuousEvent] {
        &self.events
    }

    pub fn window(&self) -> Window {
        self.window
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn rates(&self) -> (f64, f64) {
        (self.left_rate, self.right_rate)
    }

    /// Events whose source lies in `w`.
    pub fn restricted_to(&self, w: Window) -> Self {
        Self {
            events: self.events.iter().filter(|e| w.contains(e.i)).copied().collect(),
            window: w,
            ..*self
        }
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["t", "i", "j"])?;
        for e in &self.events {
            w.write_record([format!("{:.17e}", e.t), e.i.to_string(), e.j.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }

    /// Replays a CSV written by [`Self::write_csv`].
    pub fn read_csv<R: Read>(input: R, window: Window, horizon: f64, left: f64, right: f64) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(input);
        let events = rdr.deserialize().collect::<std::result::Result<Vec<ContinuousEvent>, _>>()?;
        Self::from_events(events, window, horizon, left, right)
    }
}

impl DiscreteTimeGraph {
    pub fn from_events(
        mut events: Vec<DiscreteEvent>,
        window: Window,
        horizon: u64,
        delta1: f64,
        delta2: f64,
    ) -> Result<Self> {
        events.sort_unstable();
        for e in &events {
            if !(1..=horizon).contains(&e.t) {
                return invalid(format!("event time {} outside [1, {horizon}]", e.t));
            }
            if e.j != e.i - 1 && e.j <= e.i {
                return invalid(format!("event ({}; {}, {}) is neither left nor right", e.t, e.i, e.j));
            }
            if !window.contains(e.i) {
                return invalid(format!("event source {} outside window", e.i));
            }
        }
        for w in events.windows(2) {
            let same_site = w[0].t == w[1].t && w[0].i == w[1].i;
            if same_site && (w[0].j > w[0].i) == (w[1].j > w[1].i) {
                return invalid(format!("two {} events at ({}, {})", if w[0].j > w[0].i { "right" } else { "left" }, w[0].t, w[0].i));
            }
        }
        Ok(Self { events, window, horizon, delta1, delta2 })
    }

    pub fn events(&self) -> &[DiscreteEvent] {
        &self.events
    }

    pub fn window(&self) -> Window {
        self.window
    }

    pub fn horizon(&self) -> u64 {
        self.horizon
    }

    pub fn params(&self) -> (f64, f64) {
        (self.delta1, self.delta2)
    }

    /// Events of step `t`, sorted by source.
    pub fn events_at(&self, t: u64) -> &[DiscreteEvent] {
        step_slice(&self.events, t)
    }

    pub fn restricted_to(&self, w: Window) -> Self {
        Self {
            events: self.events.iter().filter(|e| w.contains(e.i)).copied().collect(),
            window: w,
            ..*self
        }
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        write_discrete_csv(&self.events, out)
    }

    pub fn read_csv<R: Read>(input: R, window: Window, horizon: u64, delta1: f64, delta2: f64) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(input);
        let events = rdr.deserialize().collect::<std::result::Result<Vec<DiscreteEvent>, _>>()?;
        Self::from_events(events, window, horizon, delta1, delta2)
    }
}

impl AlteredTimeGraph {
    pub fn events(&self) -> &[DiscreteEvent] {
        &self.events
    }

    pub fn window(&self) -> Window {
        self.window
    }

    pub fn horizon(&self) -> u64 {
        self.horizon
    }

    pub fn events_at(&self, t: u64) -> &[DiscreteEvent] {
        step_slice(&self.events, t)
    }

    pub fn restricted_to(&self, w: Window) -> Self {
        Self {
            events: self.events.iter().filter(|e| w.contains(e.i)).copied().collect(),
            window: w,
            ..*self
        }
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        write_discrete_csv(&self.events, out)
    }
}

fn step_slice(events: &[DiscreteEvent], t: u64) -> &[DiscreteEvent] {
    let a = events.partition_point(|e| e.t < t);
    let b = events.partition_point(|e| e.t <= t);
    &events[a..b]
}

fn write_discrete_csv<W: Write>(events: &[DiscreteEvent], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["t", "i", "j"])?;
    for e in events {
        w.write_record([e.t.to_string(), e.i.to_string(), e.j.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

/// Graphs that can be cut down to the sources in a window.
pub trait Restrictable: Sized {
    fn graph_window(&self) -> Window;
    fn restricted_to(&self, w: Window) -> Self;
}

impl Restrictable for ContinuousTimeGraph {
    fn graph_window(&self) -> Window {
        self.window
    }
    fn restricted_to(&self, w: Window) -> Self {
        ContinuousTimeGraph::restricted_to(self, w)
    }
}

impl Restrictable for DiscreteTimeGraph {
    fn graph_window(&self) -> Window {
        self.window
    }
    fn restricted_to(&self, w: Window) -> Self {
        DiscreteTimeGraph::restricted_to(self, w)
    }
}

impl Restrictable for AlteredTimeGraph {
    fn graph_window(&self) -> Window {
        self.window
    }
    fn restricted_to(&self, w: Window) -> Self {
        AlteredTimeGraph::restricted_to(self, w)
    }
}

/// `[-M, N]`-bounded graph: keeps exactly the events with source in `[-M, N]`.
pub fn restrict_graph<G: Restrictable>(graph: &G, m: i64, n: i64) -> Result<G> {
    let w = Window::symmetric(m, n)?;
    if !graph.graph_window().covers(&w) {
        let gw = graph.graph_window();
        return invalid(format!("graph window [{}, {}] does not cover [-{m}, {n}]", gw.lo, gw.hi));
    }
    Ok(graph.restricted_to(w))
}

/// Replaces every `(t; i, j)` with `j > i + 1` by `(t; i, i + 1)`.
pub fn alter_graph(d: &DiscreteTimeGraph) -> AlteredTimeGraph {
    let mut events: Vec<DiscreteEvent> = d
        .events
        .iter()
        .map(|e| if e.j > e.i + 1 { DiscreteEvent { j: e.i + 1, ..*e } } else { *e })
        .collect();
    // Shortening keeps the (t, i) order and left stays before right.
    debug_assert!(events.windows(2).all(|w| w[0] <= w[1]));
    events.sort_unstable();
    AlteredTimeGraph { events, window: d.window, horizon: d.horizon }
}

/// Maps each `(t'; i, j)` to `(eps * t'; i, j)`.
pub fn rescale_graph(d: &AlteredTimeGraph, eps: f64) -> Result<Vec<ContinuousEvent>> {
    if !(eps > 0.0) {
        return invalid(format!("epsilon must be positive, got {eps}"));
    }
    Ok(d.events.iter().map(|e| ContinuousEvent { t: eps * e.t as f64, i: e.i, j: e.j }).collect())
}

/// Sites `i` strictly inside the graph window such that no site of
/// `{i-1, i, i+1}` has a clock ring in `[0, horizon]`.
pub fn find_inactive_sites(graph: &ContinuousTimeGraph, horizon: f64) -> Result<Vec<i64>> {
    if horizon > graph.horizon {
        return invalid(format!("horizon {horizon} exceeds graph horizon {}", graph.horizon));
    }
    let w = graph.window;
    let mut rings = vec![false; w.len()];
    for e in graph.events.iter().take_while(|e| e.t <= horizon) {
        rings[(e.i - w.lo) as usize] = true;
    }
    Ok((w.lo + 1..w.hi)
        .filter(|&i| {
            let k = (i - w.lo) as usize;
            !rings[k - 1] && !rings[k] && !rings[k + 1]
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(lo: i64, hi: i64) -> Window {
        Window::new(lo, hi).unwrap()
    }

    #[test]
    fn continuous_invariants() {
        let g = sample_continuous_graph(0.4, 1.0, w(-20, 20), 3.0, RngStream::new(1, 2)).unwrap();
        assert!(!g.events().is_empty());
        for e in g.events() {
            assert_eq!((e.i - e.j).abs(), 1);
            assert!(e.t > 0.0 && e.t <= 3.0);
            assert!(g.window().contains(e.i));
        }
        assert!(g.events().windows(2).all(|p| p[0].t < p[1].t));
    }

    #[test]
    fn zero_left_rate_has_no_left_events() {
        let g = sample_continuous_graph(0.0, 1.0, w(-50, 50), 2.0, RngStream::new(3, 0)).unwrap();
        assert!(g.events().iter().all(|e| e.j == e.i + 1));
    }

    #[test]
    fn continuous_argument_errors() {
        let s = RngStream::new(0, 0);
        assert!(sample_continuous_graph(0.4, 1.0, w(0, 1), 0.0, s).is_err());
        assert!(sample_continuous_graph(0.0, 0.0, w(0, 1), 1.0, s).is_err());
        assert!(sample_continuous_graph(1.0, 0.5, w(0, 1), 1.0, s).is_err());
    }

    #[test]
    fn continuous_counts_and_voids() {
        // Oracle: a site's ring count on (0,1] is Poisson(1.4); mean 1.4,
        // variance 1.4; void probability e^{-1.4}.
        let n = 100_000u64;
        let root = RngStream::new(77, 0);
        let mut total = 0u64;
        let mut voids = 0u64;
        for r in 0..n {
            let g = sample_continuous_graph(0.4, 1.0, w(0, 0), 1.0, root.child(r)).unwrap();
            total += g.events().len() as u64;
            voids += g.events().is_empty() as u64;
        }
        let mean = total as f64 / n as f64;
        assert!((mean - 1.4).abs() <= 3.0 * (1.4f64 / n as f64).sqrt(), "mean {mean}");
        let p0 = (-1.4f64).exp();
        let f0 = voids as f64 / n as f64;
        assert!((f0 - p0).abs() <= 3.0 * (p0 * (1.0 - p0) / n as f64).sqrt(), "void {f0} vs {p0}");
    }

    #[test]
    fn discrete_empty_when_params_vanish() {
        let g = sample_discrete_graph(0.0, 0.0, w(-10, 10), 20, RngStream::new(4, 4)).unwrap();
        assert!(g.events().is_empty());
    }

    #[test]
    fn discrete_argument_errors() {
        let s = RngStream::new(0, 0);
        assert!(sample_discrete_graph(1.0, 0.1, w(0, 1), 3, s).is_err());
        assert!(sample_discrete_graph(0.1, 1.0, w(0, 1), 3, s).is_err());
        assert!(sample_discrete_graph(-0.1, 0.1, w(0, 1), 3, s).is_err());
        assert!(sample_discrete_graph(0.1, 0.1, w(0, 1), 0, s).is_err());
    }

    #[test]
    fn discrete_right_offset_law() {
        // delta2 = 0.5: P[none] = 0.5, P[k=1] = 0.25, P[some] = 0.5.
        let n = 100_000usize;
        let g = sample_discrete_graph(0.3, 0.5, w(0, 0), n as u64, RngStream::new(8, 1)).unwrap();
        let mut rights = vec![0usize; 64];
        let mut lefts = 0usize;
        for t in 1..=n as u64 {
            let es = g.events_at(t);
            assert!(es.iter().filter(|e| e.j < e.i).count() <= 1);
            assert!(es.iter().filter(|e| e.j > e.i).count() <= 1);
            lefts += es.iter().filter(|e| e.j == e.i - 1).count();
            for e in es.iter().filter(|e| e.j > e.i) {
                rights[(e.j - e.i) as usize] += 1;
            }
        }
        let sigma = |p: f64| 3.0 * (p * (1.0 - p) / n as f64).sqrt();
        let freq = |c: usize| c as f64 / n as f64;
        let some: usize = rights.iter().sum();
        assert!((freq(some) - 0.5).abs() <= sigma(0.5));
        assert!((freq(rights[1]) - 0.25).abs() <= sigma(0.25));
        assert!((freq(rights[2]) - 0.125).abs() <= sigma(0.125));
        assert!((freq(lefts) - 0.3).abs() <= sigma(0.3));
    }

    #[test]
    fn some_right_event_probability_equals_delta2() {
        // Oracle: sum_{k>=1} (1-d) d^k = d.
        for d in [0.05f64, 0.2, 0.7] {
            let series: f64 = (1..2000).map(|k| (1.0 - d) * d.powi(k)).sum();
            assert!((series - d).abs() < 1e-12);
            let n = 100_000u64;
            let g = sample_discrete_graph(0.0, d, w(0, 0), n, RngStream::new(12, (d * 100.0) as u64)).unwrap();
            let f = g.events().len() as f64 / n as f64;
            assert!((f - d).abs() <= 3.0 * (d * (1.0 - d) / n as f64).sqrt(), "d={d}: {f}");
        }
    }

    #[test]
    fn right_offset_decoding() {
        assert_eq!(right_offset_from_uniform(0.49, 0.5), None);
        assert_eq!(right_offset_from_uniform(0.5, 0.5), Some(1));
        assert_eq!(right_offset_from_uniform(0.74, 0.5), Some(1));
        assert_eq!(right_offset_from_uniform(0.76, 0.5), Some(2));
        assert_eq!(right_offset_from_uniform(0.99, 0.0), None);
    }

    fn discrete(events: &[(u64, i64, i64)], win: Window, horizon: u64) -> DiscreteTimeGraph {
        let es = events.iter().map(|&(t, i, j)| DiscreteEvent { t, i, j }).collect();
        DiscreteTimeGraph::from_events(es, win, horizon, 0.1, 0.1).unwrap()
    }

    #[test]
    fn restriction_examples() {
        let (m, n) = (3i64, 4i64);
        let g = discrete(&[(1, -m - 1, -m), (1, 0, 1), (2, n + 1, n + 2)], w(-10, 10), 5);
        let r = restrict_graph(&g, m, n).unwrap();
        assert_eq!(r.events(), &[DiscreteEvent { t: 1, i: 0, j: 1 }]);
        assert_eq!(restrict_graph(&r, m, n).unwrap(), r);

        let g = discrete(&[(1, -3, -4), (1, 0, 1), (2, 4, 6)], w(-3, 4), 5);
        assert_eq!(restrict_graph(&g, 3, 4).unwrap().events(), g.events());
        assert!(restrict_graph(&g, 5, 4).is_err());
    }

    #[test]
    fn alteration_examples() {
        let g = discrete(&[(3, 5, 9), (3, 6, 7), (3, 7, 6)], w(0, 10), 5);
        let a = alter_graph(&g);
        assert_eq!(
            a.events(),
            &[
                DiscreteEvent { t: 3, i: 5, j: 6 },
                DiscreteEvent { t: 3, i: 6, j: 7 },
                DiscreteEvent { t: 3, i: 7, j: 6 }
            ]
        );
        assert!(a.events().iter().all(|e| (e.i - e.j).abs() == 1));
    }

    #[test]
    fn rescaling() {
        let g = discrete(&[(7, 0, 1)], w(0, 1), 10);
        let a = alter_graph(&g);
        assert_eq!(rescale_graph(&a, 1.0).unwrap()[0].t, 7.0);
        assert!((rescale_graph(&a, 0.1).unwrap()[0].t - 0.7).abs() < 1e-15);
        assert!(rescale_graph(&a, 0.0).is_err());
    }

    #[test]
    fn rescaled_counts_match_original_steps() {
        // Oracle: count of originals with t' in [1, floor(t / eps)].
        let eps = 0.1;
        let t = 1.35;
        for r in 0..50 {
            let g = sample_discrete_graph(0.03, 0.1, w(-3, 3), 30, RngStream::new(5, r)).unwrap();
            let a = alter_graph(&g);
            let scaled = rescale_graph(&a, eps).unwrap();
            let last = (t / eps).floor() as u64;
            let direct = a.events().iter().filter(|e| e.t >= 1 && e.t <= last).count();
            let counted = scaled.iter().filter(|e| e.t <= t + 1e-12).count();
            assert_eq!(direct, counted);
        }
    }

    #[test]
    fn inactive_sites_examples() {
        let empty = ContinuousTimeGraph::from_events(vec![], w(-3, 3), 1.0, 0.4, 1.0).unwrap();
        assert_eq!(find_inactive_sites(&empty, 1.0).unwrap(), vec![-2, -1, 0, 1, 2]);

        let one = ContinuousTimeGraph::from_events(vec![ContinuousEvent { t: 0.5, i: 0, j: 1 }], w(-4, 4), 1.0, 0.4, 1.0).unwrap();
        assert_eq!(find_inactive_sites(&one, 1.0).unwrap(), vec![-3, -2, 2, 3]);
        // Before the ring everything is inactive.
        assert_eq!(find_inactive_sites(&one, 0.25).unwrap(), vec![-3, -2, -1, 0, 1, 2, 3]);
        assert!(find_inactive_sites(&one, 2.0).is_err());
    }

    #[test]
    fn csv_replay() {
        let g = sample_continuous_graph(0.4, 1.0, w(-5, 5), 1.0, RngStream::new(9, 9)).unwrap();
        let mut buf = Vec::new();
        g.write_csv(&mut buf).unwrap();
        let back = ContinuousTimeGraph::read_csv(&buf[..], g.window(), 1.0, 0.4, 1.0).unwrap();
        assert_eq!(back, g);

        let d = sample_discrete_graph(0.2, 0.4, w(-5, 5), 6, RngStream::new(9, 9)).unwrap();
        let mut buf = Vec::new();
        d.write_csv(&mut buf).unwrap();
        assert!(String::from_utf8(buf.clone()).unwrap().starts_with("t,i,j\n"));
        let back = DiscreteTimeGraph::read_csv(&buf[..], d.window(), 6, 0.2, 0.4).unwrap();
        assert_eq!(back, d);
    }

    #[test]
    fn from_events_validation() {
        let e = |t, i, j| DiscreteEvent { t, i, j };
        assert!(DiscreteTimeGraph::from_events(vec![e(1, 0, 1), e(1, 0, 3)], w(0, 3), 2, 0.1, 0.1).is_err());
        assert!(DiscreteTimeGraph::from_events(vec![e(1, 0, 0)], w(0, 3), 2, 0.1, 0.1).is_err());
        assert!(DiscreteTimeGraph::from_events(vec![e(3, 0, 1)], w(0, 3), 2, 0.1, 0.1).is_err());
        assert!(DiscreteTimeGraph::from_events(vec![e(1, 0, -1), e(1, 0, 2)], w(0, 3), 2, 0.1, 0.1).is_ok());
        let c = |t, i, j| ContinuousEvent { t, i, j };
        assert!(ContinuousTimeGraph::from_events(vec![c(0.5, 0, 2)], w(0, 3), 1.0, 0.1, 1.0).is_err());
        assert!(ContinuousTimeGraph::from_events(vec![c(0.5, 0, 1), c(0.5, 2, 3)], w(0, 3), 1.0, 0.1, 1.0).is_err());
    }

    #[test]
    fn activity_probability() {
        // Oracle: site 0 is active iff one of the 3 sites {-1,0,1} rings,
        // each silent with probability e^{-T(L+R)}.
        let (l, r, t) = (0.4, 1.0, 1.0);
        let n = 100_000u64;
        let root = RngStream::new(31, 0);
        let active = (0..n)
            .filter(|&k| {
                let g = sample_continuous_graph(l, r, w(-1, 1), t, root.child(k)).unwrap();
                find_inactive_sites(&g, t).unwrap().is_empty()
            })
            .count();
        let p = 1.0 - (-3.0 * t * (l + r)).exp();
        let f = active as f64 / n as f64;
        assert!((f - p).abs() <= 3.0 * (p * (1.0 - p) / n as f64).sqrt(), "{f} vs {p}");
    }

    fn binomial_pmf(n: u64, p: f64) -> Vec<f64> {
        let mut out = vec![0.0; n as usize + 1];
        let mut c = 1.0f64;
        for k in 0..=n {
            out[k as usize] = c * p.powi(k as i32) * (1.0 - p).powi((n - k) as i32);
            c = c * (n - k) as f64 / (k + 1) as f64;
        }
        out
    }

    #[test]
    fn rescaled_counts_approach_poisson() {
        // Exact oracle: the site-0 count is Bin(n, eps L) + Bin(n, eps R) with
        // n = floor(t / eps); its distance to Poisson(t(L+R)) must shrink with
        // eps, and the sampled counts must follow the binomial law.
        let (l, r, t) = (0.4, 1.0, 1.0);
        let poisson: Vec<f64> = (0..40)
            .scan(1.0f64, |acc, k| {
                let v = *acc;
                *acc *= t * (l + r) / (k + 1) as f64;
                Some(v * (-t * (l + r)).exp())
            })
            .collect();
        let mut distances = Vec::new();
        for (eps, seed) in [(0.1, 1u64), (0.01, 2)] {
            let steps = (t / eps + 1e-9).floor() as u64;
            let (a, b) = (binomial_pmf(steps, eps * l), binomial_pmf(steps, eps * r));
            let mut exact = vec![0.0; 40];
            for (i, pa) in a.iter().enumerate() {
                for (j, pb) in b.iter().enumerate() {
                    if i + j < 40 {
                        exact[i + j] += pa * pb;
                    }
                }
            }
            distances.push(exact.iter().zip(&poisson).map(|(x, y)| (x - y).abs()).sum::<f64>() / 2.0);

            let n = 20_000u64;
            let mut counts = vec![0u64; 40];
            let root = RngStream::new(seed, 5);
            for k in 0..n {
                let g = sample_discrete_graph(eps * l, eps * r, w(0, 0), steps, root.child(k)).unwrap();
                let scaled = rescale_graph(&alter_graph(&g), eps).unwrap();
                let c = scaled.iter().filter(|e| e.t <= t + 1e-12).count();
                counts[c.min(39)] += 1;
            }
            for (c, p) in counts.iter().zip(&exact).take(6) {
                let f = *c as f64 / n as f64;
                assert!((f - p).abs() <= 4.0 * (p * (1.0 - p) / n as f64).sqrt() + 1e-9, "eps={eps}: {f} vs {p}");
            }
        }
        assert!(distances[1] < distances[0] / 5.0, "{distances:?}");
    }
}
