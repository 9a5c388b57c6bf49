//! Exact laws of short offset trajectories by exhaustive enumeration of the
//! random choices of one step.
//!
//! Right displacements are enumerated up to a bound `B`; any branch moving
//! a particle more than `B` sites to the right is lumped into an overflow
//! outcome. Both the direct and the graph dynamics then describe the same
//! event, so their laws can be compared exactly, overflow mass included.

use std::collections::{BTreeMap, HashMap};

use crate::error::{check_vertex_param, Result};
use crate::lattice::InitialData;
use crate::sixvertex::offset::{step_direct, step_graph, JumpChoices, JumpInstructions, OffsetState};

/// A trajectory `(q(1), ..., q(T))`, or the overflow bucket.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum TrajectoryKey {
    Within(Vec<Vec<i64>>),
    Overflow,
}

/// Replays one step with scripted choices, odometer style.
struct Script {
    prefix: Vec<usize>,
    taken: Vec<(usize, usize)>,
    prob: f64,
    bound: u64,
    delta1: f64,
    delta2: f64,
}

impl Script {
    fn pick(&mut self, probs: &[f64]) -> usize {
        // Only nonzero options are enumerated.
        let live: Vec<usize> = (0..probs.len()).filter(|&k| probs[k] > 0.0).collect();
        let pos = self.taken.len();
        let choice = if pos < self.prefix.len() { self.prefix[pos] } else { 0 };
        self.taken.push((choice, live.len()));
        self.prob *= probs[live[choice]];
        live[choice]
    }

    /// Next prefix in odometer order, or `None` when exhausted.
    fn advance(mut self) -> Option<Vec<usize>> {
        while let Some((c, n)) = self.taken.pop() {
            if c + 1 < n {
                let mut next: Vec<usize> = self.taken.iter().map(|&(c, _)| c).collect();
                next.push(c + 1);
                return Some(next);
            }
        }
        None
    }
}

impl JumpChoices for Script {
    fn left(&mut self, p: f64) -> bool {
        self.pick(&[p, 1.0 - p]) == 0
    }

    fn right(&mut self, q: f64, cap: Option<u64>) -> u64 {
        let b = self.bound;
        let mut probs: Vec<f64> = Vec::new();
        match cap {
            Some(c) if c <= b => {
                for j in 0..c {
                    probs.push((1.0 - q) * q.powi(j as i32));
                }
                probs.push(q.powi(c as i32));
            }
            _ => {
                for j in 0..=b {
                    probs.push((1.0 - q) * q.powi(j as i32));
                }
                // Lumped tail: any displacement above the bound.
                probs.push(q.powi(b as i32 + 1));
            }
        }
        self.pick(&probs) as u64
    }
}

impl JumpInstructions for Script {
    fn left_event(&mut self, _t: u64, _site: i64) -> bool {
        let p = self.delta1;
        self.pick(&[p, 1.0 - p]) == 0
    }

    fn right_event(&mut self, _t: u64, site: i64) -> Option<i64> {
        let (d, b) = (self.delta2, self.bound);
        let mut probs = vec![1.0 - d];
        for k in 1..=b {
            probs.push((1.0 - d) * d.powi(k as i32));
        }
        // Offsets above the bound share one branch; the landing site then
        // decides whether the outcome is exact or overflowed.
        probs.push(d.powi(b as i32 + 1));
        match self.pick(&probs) {
            0 => None,
            k => Some(site + k as i64),
        }
    }
}

/// Law of the next state: `None` stands for the overflow outcome.
pub type Kernel = Vec<(Option<OffsetState>, f64)>;

/// Which one-step dynamics to enumerate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Dynamics {
    Direct,
    Graph,
}

fn overflowed(before: &OffsetState, after: &OffsetState, bound: u64) -> bool {
    let entered = after.n_blue - before.n_blue;
    if entered == 1 {
        let site = 1 - after.time as i64;
        if after.positions[0] - site > bound as i64 {
            return true;
        }
    }
    before
        .positions
        .iter()
        .zip(after.positions.iter().skip(entered))
        .any(|(a, b)| b - a > bound as i64)
}

/// Exact one-step law from `state`.
pub fn one_step_kernel(state: &OffsetState, dynamics: Dynamics, delta1: f64, delta2: f64, enters: bool, bound: u64) -> Kernel {
    let mut law: BTreeMap<Option<OffsetState>, f64> = BTreeMap::new();
    let mut prefix = Some(Vec::new());
    while let Some(p) = prefix {
        let mut script = Script { prefix: p, taken: Vec::new(), prob: 1.0, bound, delta1, delta2 };
        let mut next = state.clone();
        match dynamics {
            Dynamics::Direct => step_direct(&mut next, delta1, delta2, enters, &mut script),
            Dynamics::Graph => step_graph(&mut next, enters, &mut script),
        }
        let key = (!overflowed(state, &next, bound)).then_some(next);
        *law.entry(key).or_insert(0.0) += script.prob;
        prefix = script.advance();
    }
    law.into_iter().collect()
}

/// Exact law of `(q(1), ..., q(steps))` started from `state`.
pub fn trajectory_law(
    state: &OffsetState,
    dynamics: Dynamics,
    delta1: f64,
    delta2: f64,
    phi: &InitialData,
    steps: u64,
    bound: u64,
) -> Result<BTreeMap<TrajectoryKey, f64>> {
    check_vertex_param("delta1", delta1)?;
    check_vertex_param("delta2", delta2)?;
    let phi = phi.extended((state.time + steps) as usize)?;
    let mut memo: HashMap<OffsetState, Kernel> = HashMap::new();
    let mut frontier: Vec<(Vec<OffsetState>, f64)> = vec![(vec![state.clone()], 1.0)];
    let mut overflow = 0.0;
    for _ in 0..steps {
        let mut next = Vec::new();
        for (path, p) in frontier {
            let last = path.last().expect("nonempty path");
            let enters = phi.y_bit(last.time as usize + 1);
            let kernel = memo
                .entry(last.clone())
                .or_insert_with(|| one_step_kernel(last, dynamics, delta1, delta2, enters, bound));
            for (s, q) in kernel.iter() {
                match s {
                    None => overflow += p * q,
                    Some(s) => {
                        let mut longer = path.clone();
                        longer.push(s.clone());
                        next.push((longer, p * q));
                    }
                }
            }
        }
        frontier = next;
    }
    let mut law = BTreeMap::new();
    for (path, p) in frontier {
        let key = TrajectoryKey::Within(path[1..].iter().map(|s| s.positions.iter().copied().collect()).collect());
        *law.entry(key).or_insert(0.0) += p;
    }
    law.insert(TrajectoryKey::Overflow, overflow);
    Ok(law)
}

/// Key of a sampled trajectory `states[0..=T]` under the same bound.
pub fn trajectory_key(states: &[OffsetState], bound: u64) -> TrajectoryKey {
    if states.windows(2).any(|w| overflowed(&w[0], &w[1], bound)) {
        return TrajectoryKey::Overflow;
    }
    TrajectoryKey::Within(states[1..].iter().map(|s| s.positions.iter().copied().collect()).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::make_step_initial;

    fn total(k: &Kernel) -> f64 {
        k.iter().map(|(_, p)| p).sum()
    }

    #[test]
    fn kernels_are_probability_laws() {
        let s = OffsetState { time: 2, positions: [-1, 0, 4].into_iter().collect(), n_blue: 1 };
        for d in [Dynamics::Direct, Dynamics::Graph] {
            for enters in [false, true] {
                let k = one_step_kernel(&s, d, 0.25, 0.5, enters, 6);
                assert!((total(&k) - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn free_particle_kernel() {
        let s = OffsetState { time: 0, positions: [0].into_iter().collect(), n_blue: 0 };
        let k = one_step_kernel(&s, Dynamics::Direct, 0.1, 0.2, false, 8);
        let p = |q: i64| k.iter().find(|(s, _)| s.as_ref().is_some_and(|s| s.positions[0] == q)).unwrap().1;
        assert!((p(-1) - 0.1).abs() < 1e-15);
        assert!((p(0) - 0.72).abs() < 1e-15);
        assert!((p(1) - 0.144).abs() < 1e-15);
    }

    #[test]
    fn direct_and_graph_kernels_agree() {
        let states = [
            OffsetState { time: 0, positions: [].into_iter().collect(), n_blue: 0 },
            OffsetState { time: 1, positions: [0].into_iter().collect(), n_blue: 1 },
            OffsetState { time: 2, positions: [-1, 0, 2].into_iter().collect(), n_blue: 2 },
            OffsetState { time: 2, positions: [-1, 3, 4].into_iter().collect(), n_blue: 1 },
        ];
        for s in &states {
            for enters in [false, true] {
                let a = one_step_kernel(s, Dynamics::Direct, 0.25, 0.5, enters, 5);
                let b = one_step_kernel(s, Dynamics::Graph, 0.25, 0.5, enters, 5);
                assert_eq!(a.len(), b.len(), "{s:?}");
                for ((sa, pa), (sb, pb)) in a.iter().zip(&b) {
                    assert_eq!(sa, sb);
                    assert!((pa - pb).abs() < 1e-12, "{s:?}: {pa} vs {pb}");
                }
            }
        }
    }

    #[test]
    fn short_trajectory_laws_agree() {
        let phi = make_step_initial(2).unwrap();
        let s0 = OffsetState::initial(&phi);
        let a = trajectory_law(&s0, Dynamics::Direct, 0.3, 0.4, &phi, 2, 4).unwrap();
        let b = trajectory_law(&s0, Dynamics::Graph, 0.3, 0.4, &phi, 2, 4).unwrap();
        assert_eq!(a.keys().collect::<Vec<_>>(), b.keys().collect::<Vec<_>>());
        for (k, p) in &a {
            assert!((p - b[k]).abs() < 1e-12);
        }
        assert!((a.values().sum::<f64>() - 1.0).abs() < 1e-12);
    }
}
