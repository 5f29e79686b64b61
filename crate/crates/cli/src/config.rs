//! Experiment configuration: task registry, flags and per-task defaults.

use std::path::PathBuf;

use clap::{Args, ValueEnum};
use reverse_shannon::io::{load_channel, ChannelSpec};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Task {
    /// Classical capacity max_p I(X;Y) and max output entropy (alternating maximization with a dual gap).
    Capacity,
    /// Wyner common information min I(XY;W) over X - W - Y for the joint p(x)N(y|x).
    Wyner,
    /// Minimal shared randomness versus communication without feedback (Wyner tradeoff).
    TradeoffCurve,
    /// Type-class feedback simulation Monte Carlo: message and randomness rates, joint statistics.
    CrstSim,
    /// Random output partition of a flat channel certified by exact max total variation.
    FlatPartition,
    /// Entanglement-assisted capacity C_E = max_ρ I(R;B).
    Ce,
    /// C_E, Q_E, extremal output entropies and the entanglement-spread requirement.
    ChannelProfile,
    /// Feedback simulation rates ½I(R;B) qubits + ½I(E;B) ebits at a given input.
    FeedbackRates,
    /// Embezzling-state fidelity for extracting a k-dimensional maximally entangled state.
    Embezzle,
    /// Schur-Weyl block masses Tr Π_λ ρ^{⊗n} with exponential sandwich bounds.
    SchurMasses,
    /// Random-split decoupling fidelity of a flat isometry over the divisors of D_B.
    DecouplingSweep,
}

impl Task {
    pub fn name(self) -> String {
        self.to_possible_value().map(|v| v.get_name().to_owned()).unwrap_or_default()
    }

    pub fn description(self) -> String {
        self.to_possible_value()
            .and_then(|v| v.get_help().map(|h| h.to_string()))
            .unwrap_or_default()
    }

    fn needs_channel(self) -> Option<&'static str> {
        use Task::*;
        match self {
            Capacity | Wyner | TradeoffCurve | CrstSim => Some("classical"),
            FlatPartition => Some("unweighted"),
            Ce | ChannelProfile | FeedbackRates => Some("quantum"),
            Embezzle | SchurMasses | DecouplingSweep => None,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    /// Only for tradeoff-curve.
    Csv,
}

/// Command-line flags. Unset numeric flags take the task default, which is
/// then echoed in the report.
#[derive(Clone, Debug, Default, Args)]
pub struct RunArgs {
    #[arg(long, value_enum)]
    pub task: Option<Task>,
    /// JSON channel file (see the README for the format).
    #[arg(long)]
    pub channel: Option<PathBuf>,
    /// Block length, tensor power, or Schmidt rank N (embezzle).
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub eps: Option<f64>,
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub restarts: Option<usize>,
    #[arg(long)]
    pub tol: Option<f64>,
    /// Number of grid points for curves.
    #[arg(long)]
    pub grid: Option<usize>,
    #[arg(long)]
    pub trials: Option<usize>,
    /// Partition oversampling γ (flat-partition).
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Auxiliary alphabet size (wyner, tradeoff-curve).
    #[arg(long)]
    pub w_size: Option<usize>,
    /// Entangled dimension to embezzle.
    #[arg(long)]
    pub k: Option<usize>,
    /// Input distribution or spectrum, comma separated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub input: Option<Vec<f64>>,
    /// Report path; stdout if omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

/// Fully resolved configuration, echoed in every report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub task: Task,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub channel: Option<ChannelSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub restarts: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trials: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub w_size: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub input: Option<Vec<f64>>,
    pub format: Format,
}

impl ExperimentConfig {
    /// A bare config with every optional field unset.
    pub fn new(task: Task) -> Self {
        Self {
            task,
            channel: None,
            n: None,
            eps: None,
            delta: None,
            seed: 0,
            restarts: None,
            tol: None,
            grid: None,
            trials: None,
            gamma: None,
            w_size: None,
            k: None,
            input: None,
            format: Format::Json,
        }
    }

    pub fn from_args(a: &RunArgs) -> Result<Self, CliError> {
        let task = a.task.ok_or_else(|| CliError::validation("--task is required"))?;
        let channel = match &a.channel {
            Some(p) => Some(load_channel(p).map_err(|e| CliError::validation(format!("{}: {e}", p.display())))?.0),
            None => None,
        };
        let cfg = Self {
            task,
            channel,
            n: a.n,
            eps: a.eps,
            delta: a.delta,
            seed: a.seed,
            restarts: a.restarts,
            tol: a.tol,
            grid: a.grid,
            trials: a.trials,
            gamma: a.gamma,
            w_size: a.w_size,
            k: a.k,
            input: a.input.clone(),
            format: a.format,
        };
        cfg.resolve()
    }

    /// Fills task defaults and checks ranges.
    pub fn resolve(mut self) -> Result<Self, CliError> {
        use Task::*;
        let t = self.task;
        match t.needs_channel() {
            Some(kind) if self.channel.is_none() => {
                return Err(CliError::validation(format!("task {} needs a {kind} --channel", t.name())));
            }
            None if self.channel.is_some() && t != DecouplingSweep => {
                return Err(CliError::validation(format!("task {} takes no channel", t.name())));
            }
            _ => {}
        }
        if self.format == Format::Csv && t != TradeoffCurve {
            return Err(CliError::validation("--format csv is only available for tradeoff-curve"));
        }
        let def = |v: &mut Option<f64>, d: f64| {
            v.get_or_insert(d);
        };
        let defu = |v: &mut Option<usize>, d: usize| {
            v.get_or_insert(d);
        };
        match t {
            Capacity => def(&mut self.tol, 1e-9),
            Wyner => {
                def(&mut self.tol, 1e-9);
                defu(&mut self.restarts, 8);
            }
            TradeoffCurve => defu(&mut self.grid, 6),
            CrstSim => {
                defu(&mut self.n, 200);
                def(&mut self.eps, 0.1);
                defu(&mut self.trials, 100);
            }
            FlatPartition => {
                def(&mut self.eps, 0.25);
                defu(&mut self.restarts, 100);
            }
            Ce | ChannelProfile => {
                def(&mut self.tol, 1e-9);
                defu(&mut self.restarts, 4);
            }
            FeedbackRates => {}
            Embezzle => {
                defu(&mut self.n, 1 << 16);
                defu(&mut self.k, 2);
            }
            SchurMasses => {
                defu(&mut self.n, 4);
                if self.input.is_none() {
                    return Err(CliError::validation("schur-masses needs --input with the spectrum of ρ"));
                }
            }
            DecouplingSweep => {
                defu(&mut self.n, 4);
                defu(&mut self.trials, 100);
            }
        }
        self.check_ranges()?;
        Ok(self)
    }

    fn check_ranges(&self) -> Result<(), CliError> {
        let pos = |name: &str, v: Option<f64>| match v {
            Some(x) if !(x > 0.0 && x.is_finite()) => Err(CliError::validation(format!("--{name} must be positive, got {x}"))),
            _ => Ok(()),
        };
        pos("eps", self.eps)?;
        pos("delta", self.delta)?;
        pos("tol", self.tol)?;
        pos("gamma", self.gamma)?;
        for (name, v) in [("n", self.n), ("restarts", self.restarts), ("grid", self.grid), ("trials", self.trials), ("w-size", self.w_size), ("k", self.k)] {
            if v == Some(0) {
                return Err(CliError::validation(format!("--{name} must be at least 1")));
            }
        }
        if let Some(e) = self.eps {
            if e >= 1.0 && matches!(self.task, Task::CrstSim | Task::FlatPartition) {
                return Err(CliError::validation(format!("--eps must be below 1, got {e}")));
            }
        }
        if self.task == Task::DecouplingSweep && self.channel.is_none() && self.n.is_some_and(|n| n > 6) {
            return Err(CliError::validation("decoupling-sweep supports GHZ powers n ≤ 6"));
        }
        Ok(())
    }
}
