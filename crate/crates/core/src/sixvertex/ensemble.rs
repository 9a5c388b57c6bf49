//! Path ensembles of the stochastic six-vertex model on a triangle.

use std::io::Write;

use crate::error::{check_vertex_param, invalid, Error, Result};
use crate::lattice::{InitialData, ParticleConfig, Window};
use crate::rng::RngStream;

pub const IN_LEFT: u8 = 1;
pub const IN_BOTTOM: u8 = 2;
pub const OUT_RIGHT: u8 = 4;
pub const OUT_TOP: u8 = 8;
/// The path on the incoming left edge emanated from the x-axis.
pub const IN_LEFT_RED: u8 = 16;
pub const IN_BOTTOM_RED: u8 = 32;
pub const OUT_RIGHT_RED: u8 = 64;
pub const OUT_TOP_RED: u8 = 128;

/// Arrow configuration at one vertex, with path colors packed in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Vertex(pub u8);

impl Vertex {
    #[inline]
    pub fn has(self, bit: u8) -> bool {
        self.0 & bit != 0
    }
    pub fn in_left(self) -> bool {
        self.has(IN_LEFT)
    }
    pub fn in_bottom(self) -> bool {
        self.has(IN_BOTTOM)
    }
    pub fn out_right(self) -> bool {
        self.has(OUT_RIGHT)
    }
    pub fn out_top(self) -> bool {
        self.has(OUT_TOP)
    }
}

/// One edge state: occupied, and if so whether the path is red.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
struct Edge {
    on: bool,
    red: bool,
}

/// Resolves one vertex from its incoming edges and a uniform `u`.
///
/// Vertical-only input goes up with probability `delta1`; horizontal-only
/// input continues right with probability `delta2`. When both edges carry
/// paths, the left one exits on top and the bottom one exits right, so the
/// paths touch but do not cross.
#[inline]
fn resolve(left: Edge, bottom: Edge, u: f64, delta1: f64, delta2: f64) -> (Vertex, Edge, Edge) {
    let mut bits = 0u8;
    if left.on {
        bits |= IN_LEFT | if left.red { IN_LEFT_RED } else { 0 };
    }
    if bottom.on {
        bits |= IN_BOTTOM | if bottom.red { IN_BOTTOM_RED } else { 0 };
    }
    let (right, top) = match (left.on, bottom.on) {
        (false, false) => (Edge::default(), Edge::default()),
        (true, true) => (bottom, left),
        (false, true) => {
            if u < delta1 {
                (Edge::default(), bottom)
            } else {
                (bottom, Edge::default())
            }
        }
        (true, false) => {
            if u < delta2 {
                (left, Edge::default())
            } else {
                (Edge::default(), left)
            }
        }
    };
    if right.on {
        bits |= OUT_RIGHT | if right.red { OUT_RIGHT_RED } else { 0 };
    }
    if top.on {
        bits |= OUT_TOP | if top.red { OUT_TOP_RED } else { 0 };
    }
    (Vertex(bits), right, top)
}

/// Samples the triangle `{x, y >= 1, x + y <= n}` diagonal by diagonal,
/// handing each resolved vertex to `visit`. Keeps only the current frontier.
///
/// One uniform is drawn per vertex, in diagonal order and within a diagonal
/// by increasing `x`.
pub fn sweep_vertices<F: FnMut(usize, usize, Vertex)>(
    delta1: f64,
    delta2: f64,
    phi: &InitialData,
    n: usize,
    stream: RngStream,
    mut visit: F,
) -> Result<()> {
    check_vertex_param("delta1", delta1)?;
    check_vertex_param("delta2", delta2)?;
    if n < 2 {
        return invalid(format!("triangle size must be at least 2, got {n}"));
    }
    if phi.len() < n {
        return invalid(format!("initial data has {} entries but the triangle needs {n}", phi.len()));
    }
    let mut rng = stream.rng();
    // row_out[y]: right-going edge leaving the last resolved vertex of row y.
    // col_out[x]: up-going edge leaving the last resolved vertex of column x.
    let mut row_out: Vec<Edge> = (0..=n).map(|y| Edge { on: y >= 1 && phi.y_bit(y), red: false }).collect();
    let mut col_out: Vec<Edge> = (0..=n).map(|x| Edge { on: x >= 1 && phi.x_bit(x), red: true }).collect();
    for d in 2..=n {
        for x in 1..d {
            let y = d - x;
            let u = rng.uniform();
            let (v, right, top) = resolve(row_out[y], col_out[x], u, delta1, delta2);
            row_out[y] = right;
            col_out[x] = top;
            visit(x, y, v);
        }
    }
    Ok(())
}

/// A full arrow configuration on the triangle of size `n`.
#[derive(Debug, Clone, PartialEq)]
pub struct PathEnsemble {
    n: usize,
    arrows: Vec<Vertex>,
    boundary: InitialData,
}

pub fn sample_path_ensemble(
    delta1: f64,
    delta2: f64,
    phi: &InitialData,
    n: usize,
    stream: RngStream,
) -> Result<PathEnsemble> {
    let mut arrows = vec![Vertex::default(); n * n];
    sweep_vertices(delta1, delta2, phi, n, stream, |x, y, v| arrows[(y - 1) * n + (x - 1)] = v)?;
    Ok(PathEnsemble { n, arrows, boundary: phi.clone() })
}

impl PathEnsemble {
    pub fn size(&self) -> usize {
        self.n
    }

    pub fn boundary(&self) -> &InitialData {
        &self.boundary
    }

    pub fn contains(&self, x: usize, y: usize) -> bool {
        x >= 1 && y >= 1 && x + y <= self.n
    }

    /// Arrows at `(x, y)`; `None` outside the triangle.
    pub fn vertex(&self, x: usize, y: usize) -> Option<Vertex> {
        self.contains(x, y).then(|| self.arrows[(y - 1) * self.n + (x - 1)])
    }

    /// Vertices in row-major order `(x, y, arrows)`.
    pub fn vertices(&self) -> impl Iterator<Item = (usize, usize, Vertex)> + '_ {
        (1..self.n).flat_map(move |y| (1..=self.n - y).map(move |x| (x, y, self.arrows[(y - 1) * self.n + (x - 1)])))
    }

    /// Number of blue paths crossing row `y` strictly right of column `x`
    /// minus the number of red paths crossing it at or left of `x`. A path
    /// crosses row `y` at column `c` when it leaves `(c, y)` upward.
    ///
    /// Only the columns `1..=n-y` of the triangle are observed.
    pub fn height_function(&self, x: i64, y: usize) -> Result<i64> {
        if y == 0 || y >= self.n {
            return invalid(format!("row {y} outside [1, {}]", self.n - 1));
        }
        let mut h = 0;
        for c in 1..=self.n - y {
            let v = self.arrows[(y - 1) * self.n + (c - 1)];
            if !v.out_top() {
                continue;
            }
            let red = v.has(OUT_TOP_RED);
            if !red && c as i64 > x {
                h += 1;
            } else if red && c as i64 <= x {
                h -= 1;
            }
        }
        Ok(h)
    }

    /// Particles at time `t`: site `p` is occupied when a path enters
    /// `(p, t + 1)` from below. Red paths emanate from the x-axis.
    ///
    /// Fails when a blue path has already left the observed part of the
    /// triangle, since tags could no longer be assigned.
    pub fn extract_particles(&self, t: usize) -> Result<ParticleConfig> {
        if t + 1 >= self.n {
            return invalid(format!("time {t} outside [0, {}]", self.n.saturating_sub(2)));
        }
        let hi = self.n - t.max(1);
        let mut blue = Vec::new();
        let mut red = Vec::new();
        for p in 1..=hi {
            let (on, is_red) = if t == 0 {
                (self.boundary.x_bit(p), true)
            } else {
                let v = self.arrows[(t - 1) * self.n + (p - 1)];
                (v.out_top(), v.has(OUT_TOP_RED))
            };
            if on {
                if is_red { &mut red } else { &mut blue }.push(p as i64);
            }
        }
        let entered = (1..=t).filter(|&s| self.boundary.y_bit(s)).count();
        if blue.len() != entered {
            return Err(Error::InvalidArgument(format!(
                "{} of {entered} blue paths are visible at time {t}; enlarge the triangle",
                blue.len()
            )));
        }
        if blue.last().zip(red.first()).is_some_and(|(b, r)| b > r) {
            return invalid("blue path right of a red path");
        }
        let n_blue = blue.len();
        blue.extend(red);
        ParticleConfig::new(Window::new(1, hi as i64)?, blue, n_blue)
    }

    /// Particles at time `t` in offset coordinates `q = p - t`.
    pub fn offset_particles(&self, t: usize) -> Result<ParticleConfig> {
        Ok(self.extract_particles(t)?.shifted(-(t as i64)))
    }

    /// Rows `x,y,in_left,in_bottom,out_right,out_top`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["x", "y", "in_left", "in_bottom", "out_right", "out_top"])?;
        for (x, y, v) in self.vertices() {
            let b = |f: bool| (f as u8).to_string();
            w.write_record([x.to_string(), y.to_string(), b(v.in_left()), b(v.in_bottom()), b(v.out_right()), b(v.out_top())])?;
        }
        w.flush()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{make_step_initial, sample_bernoulli_initial, BitPair};
    use std::collections::HashMap;

    fn check_structure(e: &PathEnsemble) {
        let n = e.size();
        for (x, y, v) in e.vertices() {
            assert_eq!(v.in_left() as u8 + v.in_bottom() as u8, v.out_right() as u8 + v.out_top() as u8);
            if x == 1 {
                assert_eq!(v.in_left(), e.boundary().y_bit(y));
            } else {
                assert_eq!(v.in_left(), e.vertex(x - 1, y).unwrap().out_right());
            }
            if y == 1 {
                assert_eq!(v.in_bottom(), e.boundary().x_bit(x));
            } else {
                assert_eq!(v.in_bottom(), e.vertex(x, y - 1).unwrap().out_top());
            }
            assert!(x + y <= n);
        }
    }

    #[test]
    fn structure_on_random_data() {
        for k in 0..50 {
            let phi = sample_bernoulli_initial(0.6, 0.4, 20, RngStream::new(k, 1)).unwrap();
            let e = sample_path_ensemble(0.3, 0.6, &phi, 20, RngStream::new(k, 2)).unwrap();
            check_structure(&e);
        }
    }

    #[test]
    fn argument_errors() {
        let phi = make_step_initial(5).unwrap();
        assert!(sample_path_ensemble(0.3, 0.5, &phi, 6, RngStream::new(0, 0)).is_err());
        assert!(sample_path_ensemble(1.0, 0.5, &phi, 5, RngStream::new(0, 0)).is_err());
        let e = sample_path_ensemble(0.3, 0.5, &phi, 5, RngStream::new(0, 0)).unwrap();
        assert!(e.extract_particles(4).is_err());
        assert!(e.height_function(0, 0).is_err());
        assert!(e.height_function(0, 5).is_err());
    }

    #[test]
    fn zero_parameters_hand_enumeration() {
        // delta1 = delta2 = 0: a vertical-only input always turns right and a
        // horizontal-only input always turns up. On n = 4 with step data the
        // path from (1,1) turns up at once; every later path meets it.
        let phi = make_step_initial(4).unwrap();
        let e = sample_path_ensemble(0.0, 0.0, &phi, 4, RngStream::new(0, 0)).unwrap();
        let ups: Vec<(usize, usize)> = e.vertices().filter(|(_, _, v)| v.out_top()).map(|(x, y, _)| (x, y)).collect();
        assert_eq!(ups, vec![(1, 1), (1, 2), (2, 2), (1, 3)]);
        // Time 1: one particle at p = 1; time 2: at p = 1, 2.
        assert_eq!(e.extract_particles(1).unwrap().positions(), &[1]);
        assert_eq!(e.extract_particles(2).unwrap().positions(), &[1, 2]);
    }

    #[test]
    fn single_path_goes_straight_with_delta1() {
        let phi = InitialData::explicit(vec![BitPair::new(true, false), BitPair::new(false, false), BitPair::new(false, false)]).unwrap();
        let n = 100_000u64;
        let root = RngStream::new(4, 0);
        let ups = (0..n)
            .filter(|&k| sample_path_ensemble(0.5, 0.3, &phi, 3, root.child(k)).unwrap().vertex(1, 1).unwrap().out_top())
            .count();
        let f = ups as f64 / n as f64;
        assert!((f - 0.5).abs() <= 3.0 * (0.25 / n as f64).sqrt(), "{f}");
    }

    #[test]
    fn t0_particles_are_red_data() {
        let phi = InitialData::explicit(vec![
            BitPair::new(true, false),
            BitPair::new(false, true),
            BitPair::new(true, true),
            BitPair::new(false, false),
        ])
        .unwrap();
        let e = sample_path_ensemble(0.3, 0.3, &phi, 4, RngStream::new(1, 0)).unwrap();
        let c = e.extract_particles(0).unwrap();
        assert_eq!(c.positions(), &[1, 3]);
        assert_eq!(c.blue_count(), 0);
        let step = sample_path_ensemble(0.3, 0.3, &make_step_initial(4).unwrap(), 4, RngStream::new(1, 0)).unwrap();
        assert!(step.extract_particles(0).unwrap().is_empty());
    }

    #[test]
    fn particle_count_is_conserved() {
        for k in 0..100 {
            let phi = sample_bernoulli_initial(0.5, 0.5, 40, RngStream::new(k, 3)).unwrap();
            let e = sample_path_ensemble(0.2, 0.3, &phi, 40, RngStream::new(k, 4)).unwrap();
            for t in 1..5 {
                let c = e.extract_particles(t).unwrap();
                let entered = (1..=t).filter(|&s| phi.y_bit(s)).count();
                assert_eq!(c.blue_count(), entered);
                // Reds are seen only within columns 1..=n-t.
                assert!(c.red_count() <= (1..40).filter(|&p| phi.x_bit(p)).count());
            }
        }
    }

    #[test]
    fn height_function_examples() {
        let phi = make_step_initial(30).unwrap();
        let e = sample_path_ensemble(0.3, 0.5, &phi, 30, RngStream::new(2, 2)).unwrap();
        assert_eq!(e.height_function(30, 1).unwrap(), 0);
        for y in 1..6 {
            let blues = e.extract_particles(y).unwrap().len() as i64;
            assert_eq!(e.height_function(0, y).unwrap(), blues);
        }
    }

    #[test]
    fn height_function_matches_tagged_positions() {
        for k in 0..300 {
            let phi = sample_bernoulli_initial(0.7, 0.4, 30, RngStream::new(k, 8)).unwrap();
            let e = sample_path_ensemble(0.2, 0.4, &phi, 30, RngStream::new(k, 9)).unwrap();
            for t in 1..8usize {
                let c = e.extract_particles(t).unwrap();
                for x in -2..4i64 {
                    let big_x = x + t as i64;
                    let h = e.height_function(big_x, t).unwrap();
                    for r in 1..=c.blue_count() as i64 {
                        assert_eq!(h >= r, c.position_of_tag(-r).unwrap() > big_x);
                    }
                }
            }
        }
    }

    #[test]
    fn exit_frequencies() {
        let (d1, d2) = (0.3, 0.5);
        let phi = make_step_initial(20).unwrap();
        let mut counts: HashMap<(bool, bool), (u64, u64)> = HashMap::new();
        let root = RngStream::new(6, 0);
        for k in 0..5_000 {
            let e = sample_path_ensemble(d1, d2, &phi, 20, root.child(k)).unwrap();
            for (x, y, v) in e.vertices() {
                if x < 2 || y < 2 {
                    continue;
                }
                let c = counts.entry((v.in_left(), v.in_bottom())).or_default();
                c.0 += 1;
                c.1 += v.out_top() as u64;
            }
        }
        let check = |key: (bool, bool), p_up: f64| {
            let (n, up) = counts[&key];
            let f = up as f64 / n as f64;
            assert!((f - p_up).abs() <= 3.0 * (p_up * (1.0 - p_up) / n as f64).sqrt() + 1e-12, "{key:?}: {f}");
        };
        check((false, true), d1);
        check((true, false), 1.0 - d2);
        check((true, true), 1.0);
        check((false, false), 0.0);
    }

    #[test]
    fn sweep_matches_stored_ensemble() {
        let phi = make_step_initial(15).unwrap();
        let e = sample_path_ensemble(0.2, 0.6, &phi, 15, RngStream::new(3, 3)).unwrap();
        let mut seen = 0;
        sweep_vertices(0.2, 0.6, &phi, 15, RngStream::new(3, 3), |x, y, v| {
            assert_eq!(e.vertex(x, y), Some(v));
            seen += 1;
        })
        .unwrap();
        assert_eq!(seen, 15 * 14 / 2);
    }

    #[test]
    fn csv_export() {
        let phi = make_step_initial(3).unwrap();
        let e = sample_path_ensemble(0.0, 0.0, &phi, 3, RngStream::new(0, 0)).unwrap();
        let mut buf = Vec::new();
        e.write_csv(&mut buf).unwrap();
        let s = String::from_utf8(buf).unwrap();
        assert_eq!(s, "x,y,in_left,in_bottom,out_right,out_top\n1,1,1,0,0,1\n2,1,0,0,0,0\n1,2,1,1,1,1\n");
    }
}
