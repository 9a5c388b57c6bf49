//! Command-line flags, the JSON config file, and their merge into a
//! validated [`Settings`].

use std::path::PathBuf;

use clap::{Parser, ValueEnum};
use serde::{Deserialize, Serialize};

use asep_sixvertex::convergence::{BoundedModel, OffsetEngine};
use asep_sixvertex::InitialDataSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Path ensembles on a triangle, one row per vertex.
    SampleEnsemble,
    /// ASEP snapshots from the graphical construction.
    SimAsep,
    /// Offset six-vertex particle system.
    SimOffset,
    /// Six-vertex vs ASEP convergence report.
    Converge,
    /// Bounded vs reference disagreement along an (M, N) schedule.
    BoundCheck,
    /// Bad-event frequencies and the coupling identity.
    BadEvents,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Engine {
    Direct,
    Graph,
    Ensemble,
}

impl From<Engine> for OffsetEngine {
    fn from(e: Engine) -> Self {
        match e {
            Engine::Direct => OffsetEngine::Direct,
            Engine::Graph => OffsetEngine::Graph,
            Engine::Ensemble => OffsetEngine::Ensemble,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Model {
    Asep,
    SixVertex,
}

impl From<Model> for BoundedModel {
    fn from(m: Model) -> Self {
        match m {
            Model::Asep => BoundedModel::Asep,
            Model::SixVertex => BoundedModel::SixVertex,
        }
    }
}

/// Every option is optional so that flags can be layered over `--config`.
/// The same struct is read from the JSON file, keyed by flag name.
#[derive(Debug, Clone, Default, Parser, Deserialize)]
#[command(name = "asep-sixvertex", version, about = "ASEP and stochastic six-vertex simulation")]
#[serde(deny_unknown_fields)]
pub struct Options {
    #[arg(long, value_enum)]
    pub command: Option<Command>,
    /// Left jump rate.
    #[arg(long = "L")]
    #[serde(rename = "L")]
    pub left: Option<f64>,
    /// Right jump rate.
    #[arg(long = "R")]
    #[serde(rename = "R")]
    pub right: Option<f64>,
    #[arg(long)]
    pub delta1: Option<f64>,
    #[arg(long)]
    pub delta2: Option<f64>,
    #[arg(long, value_delimiter = ',')]
    pub epsilons: Option<Vec<f64>>,
    /// Left window bounds, comma separated.
    #[arg(long = "M", value_delimiter = ',')]
    #[serde(rename = "M")]
    pub m: Option<Vec<i64>>,
    /// Right window bounds, comma separated.
    #[arg(long = "N", value_delimiter = ',')]
    #[serde(rename = "N")]
    pub n: Option<Vec<i64>>,
    #[arg(long)]
    pub replicas: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// step, bernoulli:b1,b2 or file:PATH.
    #[arg(long)]
    pub phi: Option<String>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub tags: Option<Vec<i64>>,
    #[arg(long, value_delimiter = ',')]
    pub times: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub set: Option<Vec<i64>>,
    /// Level of the current.
    #[arg(long, allow_hyphen_values = true)]
    pub x: Option<i64>,
    /// Threshold of the current.
    #[arg(long)]
    pub r: Option<i64>,
    /// Triangle size for sample-ensemble.
    #[arg(long)]
    pub size: Option<usize>,
    #[arg(long, value_enum)]
    pub engine: Option<Engine>,
    #[arg(long, value_enum)]
    pub model: Option<Model>,
    /// Reference window multiple for bound-check.
    #[arg(long)]
    pub factor: Option<i64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Worker threads; results do not depend on it.
    #[arg(long)]
    pub threads: Option<usize>,
    /// JSON file with any of the options above; flags take precedence.
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
}

macro_rules! overlay {
    ($top:expr, $base:expr, $($f:ident),*) => {
        Options { $($f: $top.$f.or($base.$f),)* config: None }
    };
}

impl Options {
    /// Fields set in `self` win over those in `base`.
    pub fn over(self, base: Options) -> Options {
        overlay!(
            self, base, command, left, right, delta1, delta2, epsilons, m, n, replicas, seed, phi, tags, times, set, x, r,
            size, engine, model, factor, out, format, threads
        )
    }

    /// Flags merged over the config file named by `--config`, if any.
    pub fn resolve_file(self) -> Result<Options, String> {
        let Some(path) = self.config.clone() else { return Ok(self) };
        let text = std::fs::read_to_string(&path).map_err(|e| format!("config: cannot read {}: {e}", path.display()))?;
        let file: Options = serde_json::from_str(&text).map_err(|e| format!("config: {}: {e}", path.display()))?;
        Ok(self.over(file))
    }
}

/// Options after defaults and validation.
#[derive(Debug, Clone)]
pub struct Settings {
    pub command: Command,
    pub left: f64,
    pub right: f64,
    pub delta1: Option<f64>,
    pub delta2: Option<f64>,
    pub epsilons: Vec<f64>,
    pub m: Vec<i64>,
    pub n: Vec<i64>,
    pub replicas: usize,
    pub seed: u64,
    pub phi: InitialDataSpec,
    pub phi_text: String,
    pub tags: Vec<i64>,
    pub times: Vec<f64>,
    pub set: Option<Vec<i64>>,
    pub x: i64,
    pub r: i64,
    pub size: usize,
    pub engine: Engine,
    pub model: Model,
    pub factor: i64,
    pub out: Option<PathBuf>,
    pub format: Format,
    pub threads: Option<usize>,
}

fn check_unit(name: &str, v: Option<f64>) -> Result<(), String> {
    match v {
        Some(p) if !(0.0..1.0).contains(&p) => Err(format!("{name} must lie in [0,1), got {p}")),
        _ => Ok(()),
    }
}

impl Settings {
    pub fn from_options(o: Options) -> Result<Settings, String> {
        let command = o.command.ok_or("command: missing (use --command or the config file)")?;
        check_unit("δ1", o.delta1)?;
        check_unit("δ2", o.delta2)?;
        let left = o.left.unwrap_or(0.3);
        let right = o.right.unwrap_or(1.0);
        if !(left >= 0.0 && left.is_finite()) {
            return Err(format!("L must be a finite rate >= 0, got {left}"));
        }
        if !(right > left && right.is_finite()) {
            return Err(format!("R must exceed L, got L={left}, R={right}"));
        }
        let epsilons = o.epsilons.unwrap_or_else(|| vec![0.2, 0.1, 0.05, 0.025]);
        if epsilons.is_empty() {
            return Err("epsilons: at least one value is required".into());
        }
        for &e in &epsilons {
            if !(e > 0.0) {
                return Err(format!("epsilons: values must be positive, got {e}"));
            }
        }
        let m = o.m.unwrap_or_else(|| vec![64]);
        let n = o.n.unwrap_or_else(|| vec![64]);
        if m.is_empty() || m.iter().any(|&v| v < 1) {
            return Err(format!("M: values must be positive integers, got {m:?}"));
        }
        if n.is_empty() || n.iter().any(|&v| v < 1) {
            return Err(format!("N: values must be positive integers, got {n:?}"));
        }
        if m.len() != n.len() {
            return Err(format!("N: expected {} values to pair with M, got {}", m.len(), n.len()));
        }
        let replicas = o.replicas.unwrap_or(match command {
            Command::SampleEnsemble | Command::SimAsep | Command::SimOffset => 1,
            Command::Converge | Command::BadEvents => 10_000,
            Command::BoundCheck => 1000,
        });
        if replicas == 0 {
            return Err("replicas must be at least 1".into());
        }
        let phi_text = o.phi.unwrap_or_else(|| "step".into());
        let phi = InitialDataSpec::parse(&phi_text).map_err(|e| format!("phi: {e}"))?;
        let times = o.times.unwrap_or_else(|| vec![1.0]);
        if times.is_empty() || times.iter().any(|&t| !(t > 0.0 && t.is_finite())) {
            return Err(format!("times: values must be positive, got {times:?}"));
        }
        let tags = o.tags.unwrap_or_else(|| vec![-1]);
        if tags.is_empty() {
            return Err("tags: at least one tag is required".into());
        }
        let size = o.size.unwrap_or(40);
        if size < 2 {
            return Err(format!("size must be at least 2, got {size}"));
        }
        let factor = o.factor.unwrap_or(8);
        if factor < 1 {
            return Err(format!("factor must be at least 1, got {factor}"));
        }
        if o.threads == Some(0) {
            return Err("threads must be at least 1".into());
        }
        Ok(Settings {
            command,
            left,
            right,
            delta1: o.delta1,
            delta2: o.delta2,
            epsilons,
            m,
            n,
            replicas,
            seed: o.seed.unwrap_or(1),
            phi,
            phi_text,
            tags,
            times,
            set: o.set,
            x: o.x.unwrap_or(0),
            r: o.r.unwrap_or(1),
            size,
            engine: o.engine.unwrap_or(Engine::Direct),
            model: o.model.unwrap_or(Model::Asep),
            factor,
            out: o.out,
            format: o.format.unwrap_or(Format::Csv),
            threads: o.threads,
        })
    }

    /// Vertex weights: explicit `--delta1/--delta2`, else the first epsilon
    /// times `(L, R)`.
    pub fn deltas(&self) -> Result<(f64, f64), String> {
        let eps = self.epsilons[0];
        let d1 = self.delta1.unwrap_or(eps * self.left);
        let d2 = self.delta2.unwrap_or(eps * self.right);
        check_unit("δ1", Some(d1))?;
        check_unit("δ2", Some(d2))?;
        Ok((d1, d2))
    }

    pub fn explicit_deltas(&self) -> bool {
        self.delta1.is_some() || self.delta2.is_some()
    }
}
