//! Lattice windows, initial-data processes and tagged particle configurations.

use serde::{Deserialize, Serialize};

use crate::error::{check_probability, invalid, Error, Result};
use crate::rng::RngStream;

/// Closed integer interval `[lo, hi]` of lattice sites.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Window {
    pub lo: i64,
    pub hi: i64,
}

impl Window {
    pub fn new(lo: i64, hi: i64) -> Result<Self> {
        if lo > hi {
            return invalid(format!("empty window [{lo}, {hi}]"));
        }
        Ok(Self { lo, hi })
    }

    /// `[-m, n]`.
    pub fn symmetric(m: i64, n: i64) -> Result<Self> {
        Self::new(-m, n)
    }

    #[inline]
    pub fn contains(&self, site: i64) -> bool {
        self.lo <= site && site <= self.hi
    }

    pub fn covers(&self, other: &Window) -> bool {
        self.lo <= other.lo && other.hi <= self.hi
    }

    #[allow(clippy::len_without_is_empty)]
    pub fn len(&self) -> usize {
        (self.hi - self.lo + 1) as usize
    }

    pub fn sites(&self) -> std::ops::RangeInclusive<i64> {
        self.lo..=self.hi
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Color {
    /// Started at a site `<= 0` (ASEP) or entered through the y-axis (vertex model).
    Blue,
    /// Started at a site `> 0` (ASEP) or entered through the x-axis (vertex model).
    Red,
}

impl Color {
    pub fn as_str(&self) -> &'static str {
        match self {
            Color::Blue => "blue",
            Color::Red => "red",
        }
    }
}

/// How an [`InitialData`] sequence was produced.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum GeneratorKind {
    Step,
    DoubleBernoulli { b1: f64, b2: f64 },
    Explicit,
}

/// One boundary entry `phi(i) = (phi_i^(x), phi_i^(y))`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct BitPair {
    pub x: bool,
    pub y: bool,
}

impl BitPair {
    pub fn new(x: bool, y: bool) -> Self {
        Self { x, y }
    }
}

/// The boundary process `phi = (phi(1), phi(2), ...)` shared by the ASEP and
/// the vertex model, held as a finite prefix.
///
/// Step and double-sided Bernoulli data can be extended past the stored
/// prefix; explicit data are empty beyond it; Bernoulli entries are drawn sequentially from a fixed stream, so
/// an extension reproduces exactly what a longer initial sample would have
/// contained.
#[derive(Debug, Clone, PartialEq)]
pub struct InitialData {
    entries: Vec<BitPair>,
    kind: GeneratorKind,
    source: Option<RngStream>,
}

/// Step data: every `phi(i) = (0, 1)`.
pub fn make_step_initial(n: usize) -> Result<InitialData> {
    if n == 0 {
        return invalid("step initial data needs n >= 1");
    }
    Ok(InitialData {
        entries: vec![BitPair::new(false, true); n],
        kind: GeneratorKind::Step,
        source: None,
    })
}

/// Double-sided `(b1, b2)`-Bernoulli data: `phi_i^(y) ~ Bernoulli(b1)` and
/// `phi_i^(x) ~ Bernoulli(b2)`, all independent.
pub fn sample_bernoulli_initial(b1: f64, b2: f64, n: usize, stream: RngStream) -> Result<InitialData> {
    check_probability("b1", b1)?;
    check_probability("b2", b2)?;
    if n == 0 {
        return invalid("Bernoulli initial data needs n >= 1");
    }
    let mut data = InitialData {
        entries: Vec::with_capacity(n),
        kind: GeneratorKind::DoubleBernoulli { b1, b2 },
        source: Some(stream),
    };
    data.draw_bernoulli_until(n);
    Ok(data)
}

impl InitialData {
    pub fn explicit(entries: Vec<BitPair>) -> Result<Self> {
        if entries.is_empty() {
            return invalid("explicit initial data must be nonempty");
        }
        Ok(Self { entries, kind: GeneratorKind::Explicit, source: None })
    }

    pub fn kind(&self) -> GeneratorKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[BitPair] {
        &self.entries
    }

    /// `phi(i)` for `i >= 1`.
    pub fn get(&self, i: usize) -> Option<BitPair> {
        if i == 0 {
            None
        } else {
            self.entries.get(i - 1).copied()
        }
    }

    /// `phi_i^(x)`; false beyond the stored prefix.
    pub fn x_bit(&self, i: usize) -> bool {
        self.get(i).is_some_and(|b| b.x)
    }

    /// `phi_i^(y)`; false beyond the stored prefix.
    pub fn y_bit(&self, i: usize) -> bool {
        self.get(i).is_some_and(|b| b.y)
    }

    /// Returns data covering at least `n` indices, extending with the
    /// generator when needed.
    pub fn extended(&self, n: usize) -> Result<InitialData> {
        if n <= self.len() {
            return Ok(self.clone());
        }
        let mut out = self.clone();
        match self.kind {
            GeneratorKind::Step => out.entries.resize(n, BitPair::new(false, true)),
            GeneratorKind::Explicit => out.entries.resize(n, BitPair::default()),
            GeneratorKind::DoubleBernoulli { .. } if self.source.is_some() => out.draw_bernoulli_until(n),
            _ => {
                return invalid(format!(
                    "initial data of length {} cannot be extended to {n} (no generator)",
                    self.len()
                ))
            }
        }
        Ok(out)
    }

    fn draw_bernoulli_until(&mut self, n: usize) {
        let (GeneratorKind::DoubleBernoulli { b1, b2 }, Some(stream)) = (self.kind, self.source) else {
            unreachable!("only Bernoulli data draws from a stream");
        };
        // Two uniforms (four 32-bit words) per index.
        let mut rng = stream.rng_at(4 * self.entries.len() as u128);
        while self.entries.len() < n {
            let y = rng.bernoulli(b1);
            let x = rng.bernoulli(b2);
            self.entries.push(BitPair::new(x, y));
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(&InitialDataJson::from(self))?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let wire: InitialDataJson = serde_json::from_str(s)?;
        wire.try_into()
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct InitialDataJson {
    kind: String,
    b1: Option<f64>,
    b2: Option<f64>,
    bits: Vec<[u8; 2]>,
}

impl From<&InitialData> for InitialDataJson {
    fn from(d: &InitialData) -> Self {
        let (kind, b1, b2) = match d.kind {
            GeneratorKind::Step => ("step", None, None),
            GeneratorKind::DoubleBernoulli { b1, b2 } => ("bernoulli", Some(b1), Some(b2)),
            GeneratorKind::Explicit => ("explicit", None, None),
        };
        Self {
            kind: kind.to_string(),
            b1,
            b2,
            bits: d.entries.iter().map(|b| [b.x as u8, b.y as u8]).collect(),
        }
    }
}

impl TryFrom<InitialDataJson> for InitialData {
    type Error = Error;

    fn try_from(w: InitialDataJson) -> Result<Self> {
        let mut entries = Vec::with_capacity(w.bits.len());
        for [x, y] in w.bits {
            if x > 1 || y > 1 {
                return invalid(format!("initial data bits must be 0 or 1, got [{x},{y}]"));
            }
            entries.push(BitPair::new(x == 1, y == 1));
        }
        if entries.is_empty() {
            return invalid("initial data must contain at least one entry");
        }
        let kind = match w.kind.as_str() {
            "step" => {
                if entries.iter().any(|b| b.x || !b.y) {
                    return invalid("step initial data must have every entry equal to [0,1]");
                }
                GeneratorKind::Step
            }
            "bernoulli" => {
                let (Some(b1), Some(b2)) = (w.b1, w.b2) else {
                    return invalid("Bernoulli initial data needs b1 and b2");
                };
                check_probability("b1", b1)?;
                check_probability("b2", b2)?;
                GeneratorKind::DoubleBernoulli { b1, b2 }
            }
            "explicit" => GeneratorKind::Explicit,
            other => return invalid(format!("unknown initial data kind {other:?}")),
        };
        Ok(Self { entries, kind, source: None })
    }
}

/// Recipe for initial data of any requested length.
#[derive(Debug, Clone, PartialEq)]
pub enum InitialDataSpec {
    Step,
    Bernoulli { b1: f64, b2: f64 },
    Given(InitialData),
}

impl InitialDataSpec {
    /// Parses `step`, `bernoulli:b1,b2` or `file:PATH` (a JSON file as
    /// written by [`InitialData::to_json`]).
    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "step" {
            return Ok(Self::Step);
        }
        if let Some(rest) = s.strip_prefix("bernoulli:") {
            let parts: Vec<&str> = rest.split(',').collect();
            let [a, b] = parts.as_slice() else {
                return invalid(format!("phi: expected bernoulli:b1,b2, got {s:?}"));
            };
            let parse = |name: &str, v: &str| {
                v.trim().parse::<f64>().map_err(|_| Error::InvalidArgument(format!("phi: {name} is not a number: {v:?}")))
            };
            let (b1, b2) = (parse("b1", a)?, parse("b2", b)?);
            check_probability("b1", b1)?;
            check_probability("b2", b2)?;
            return Ok(Self::Bernoulli { b1, b2 });
        }
        if let Some(path) = s.strip_prefix("file:") {
            let text = std::fs::read_to_string(path)?;
            return Ok(Self::Given(InitialData::from_json(&text)?));
        }
        invalid(format!("phi: expected step, bernoulli:b1,b2 or file:PATH, got {s:?}"))
    }

    /// Data with at least `n` entries; Bernoulli bits come from `stream`.
    pub fn realize(&self, n: usize, stream: RngStream) -> Result<InitialData> {
        match self {
            Self::Step => make_step_initial(n.max(1)),
            Self::Bernoulli { b1, b2 } => sample_bernoulli_initial(*b1, *b2, n.max(1), stream),
            Self::Given(d) => d.extended(n),
        }
    }

    pub fn describe(&self) -> String {
        match self {
            Self::Step => "step".into(),
            Self::Bernoulli { b1, b2 } => format!("bernoulli:{b1},{b2}"),
            Self::Given(d) => format!("given:{}", d.len()),
        }
    }
}

/// Ordered, tagged and colored particles inside a window.
///
/// Blue particles always sit to the left of red ones, and tags are
/// consecutive: the rightmost blue particle has tag -1 and the leftmost red
/// one tag 0. Tags and colors are therefore determined by the number of blue
/// particles.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ParticleConfig {
    window: Window,
    positions: Vec<i64>,
    n_blue: usize,
}

impl ParticleConfig {
    pub fn new(window: Window, positions: Vec<i64>, n_blue: usize) -> Result<Self> {
        if n_blue > positions.len() {
            return invalid(format!("{n_blue} blue particles but only {} positions", positions.len()));
        }
        if positions.windows(2).any(|w| w[0] >= w[1]) {
            return invalid("particle positions must be strictly increasing");
        }
        if let (Some(&first), Some(&last)) = (positions.first(), positions.last()) {
            if !window.contains(first) || !window.contains(last) {
                return invalid(format!("positions fall outside window [{}, {}]", window.lo, window.hi));
            }
        }
        Ok(Self { window, positions, n_blue })
    }

    pub fn empty(window: Window) -> Self {
        Self { window, positions: Vec::new(), n_blue: 0 }
    }

    pub(crate) fn from_parts_unchecked(window: Window, positions: Vec<i64>, n_blue: usize) -> Self {
        debug_assert!(positions.windows(2).all(|w| w[0] < w[1]));
        debug_assert!(n_blue <= positions.len());
        Self { window, positions, n_blue }
    }

    pub fn window(&self) -> Window {
        self.window
    }

    pub fn positions(&self) -> &[i64] {
        &self.positions
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    /// `N`: the number of blue particles.
    pub fn blue_count(&self) -> usize {
        self.n_blue
    }

    pub fn red_count(&self) -> usize {
        self.positions.len() - self.n_blue
    }

    #[inline]
    pub fn tag_at(&self, index: usize) -> i64 {
        index as i64 - self.n_blue as i64
    }

    #[inline]
    pub fn color_at(&self, index: usize) -> Color {
        if index < self.n_blue {
            Color::Blue
        } else {
            Color::Red
        }
    }

    pub fn index_of_tag(&self, tag: i64) -> Result<usize> {
        let idx = tag + self.n_blue as i64;
        if idx < 0 || idx >= self.positions.len() as i64 {
            return Err(Error::MissingTag(tag));
        }
        Ok(idx as usize)
    }

    pub fn position_of_tag(&self, tag: i64) -> Result<i64> {
        Ok(self.positions[self.index_of_tag(tag)?])
    }

    pub fn min_tag(&self) -> i64 {
        -(self.n_blue as i64)
    }

    pub fn is_occupied(&self, site: i64) -> bool {
        self.positions.binary_search(&site).is_ok()
    }

    /// `(tag, position, color)` left to right.
    pub fn iter(&self) -> impl Iterator<Item = (i64, i64, Color)> + '_ {
        self.positions
            .iter()
            .enumerate()
            .map(|(k, &p)| (self.tag_at(k), p, self.color_at(k)))
    }

    /// Occupation bits of the sites in `w`, left to right.
    pub fn occupancy(&self, w: Window) -> Vec<bool> {
        w.sites().map(|s| self.is_occupied(s)).collect()
    }

    /// Particles whose positions lie in `w`, keeping their tags.
    pub fn restricted(&self, w: Window) -> ParticleConfig {
        let start = self.positions.partition_point(|&p| p < w.lo);
        let end = self.positions.partition_point(|&p| p <= w.hi);
        let n_blue = self.n_blue.saturating_sub(start).min(end - start);
        ParticleConfig { window: w, positions: self.positions[start..end].to_vec(), n_blue }
    }

    /// Same particles shifted by `delta` sites (window shifted too).
    pub fn shifted(&self, delta: i64) -> ParticleConfig {
        ParticleConfig {
            window: Window { lo: self.window.lo + delta, hi: self.window.hi + delta },
            positions: self.positions.iter().map(|p| p + delta).collect(),
            n_blue: self.n_blue,
        }
    }
}

/// ASEP initial configuration: site `i > 0` holds a red particle iff
/// `phi_i^(x) = 1`, site `i <= 0` a blue one iff `phi_{1-i}^(y) = 1`.
///
/// The window must cover `[1 - len(phi), len(phi)]`; if it reaches further,
/// the data are extended through their generator.
pub fn asep_config_from_initial(phi: &InitialData, window: Window) -> Result<ParticleConfig> {
    let len = phi.len() as i64;
    if !window.covers(&Window { lo: 1 - len, hi: len }) {
        return invalid(format!(
            "window [{}, {}] does not cover [{}, {}]",
            window.lo,
            window.hi,
            1 - len,
            len
        ));
    }
    let needed = window.hi.max(1 - window.lo).max(0) as usize;
    let phi = phi.extended(needed)?;
    let mut positions = Vec::new();
    for site in window.lo..=window.hi.min(0) {
        if phi.y_bit((1 - site) as usize) {
            positions.push(site);
        }
    }
    let n_blue = positions.len();
    for site in window.lo.max(1)..=window.hi {
        if phi.x_bit(site as usize) {
            positions.push(site);
        }
    }
    Ok(ParticleConfig::from_parts_unchecked(window, positions, n_blue))
}
