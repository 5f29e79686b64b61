//! Task execution. Every task is a pure function of the resolved config.

use reverse_shannon::classical::{ClassicalChannel, Distribution};
use reverse_shannon::crst::{
    capacity, crst_monte_carlo, max_output_entropy, tradeoff_csv, tradeoff_curve, wyner_common_information,
    ProtocolSpec,
};
use reverse_shannon::flat::{find_good_partition, UnweightedChannel};
use reverse_shannon::io::Channel;
use reverse_shannon::qrates::{entanglement_assisted_capacity, qrst_feedback_rates, ChannelProfile};
use reverse_shannon::quantum::{DensityMatrix, QuantumChannel};
use reverse_shannon::schur::{block_masses, decoupling_sweep, typical_partition_mass, verify_flat, FlatIsometry};
use reverse_shannon::spread::embezzle_fidelity;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::config::{ExperimentConfig, Task};
use crate::error::{CliError, ExitKind};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Ok,
    NotConverged,
    CertificationFailed,
}

impl Status {
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Ok => 0,
            Status::NotConverged => ExitKind::NoConvergence.code(),
            Status::CertificationFailed => ExitKind::Certification.code(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TaskOutput {
    pub results: Value,
    pub status: Status,
    /// Why the status is not `Ok`.
    pub diagnostic: Option<String>,
    /// Curve rows for `--format csv`.
    pub csv: Option<String>,
}

impl TaskOutput {
    fn ok(results: Value) -> Self {
        Self { results, status: Status::Ok, diagnostic: None, csv: None }
    }

    fn flag(mut self, failed: bool, status: Status, why: impl Into<String>) -> Self {
        if failed && self.status == Status::Ok {
            self.status = status;
            self.diagnostic = Some(why.into());
        }
        self
    }
}

fn to_value<T: Serialize>(t: &T) -> Result<Value, CliError> {
    serde_json::to_value(t).map_err(|e| CliError::io(e.to_string()))
}

fn channel(cfg: &ExperimentConfig) -> Result<Channel, CliError> {
    let spec = cfg.channel.as_ref().ok_or_else(|| CliError::validation("no channel given"))?;
    Ok(spec.build()?)
}

fn classical(cfg: &ExperimentConfig) -> Result<ClassicalChannel, CliError> {
    let ch = channel(cfg)?;
    ch.as_classical()
        .ok_or_else(|| CliError::validation(format!("task {} needs a classical channel, got {}", cfg.task.name(), ch.kind())))
}

fn unweighted(cfg: &ExperimentConfig) -> Result<UnweightedChannel, CliError> {
    match channel(cfg)? {
        Channel::Unweighted(u) => Ok(u),
        other => Err(CliError::validation(format!("task {} needs an unweighted channel, got {}", cfg.task.name(), other.kind()))),
    }
}

fn quantum(cfg: &ExperimentConfig) -> Result<QuantumChannel, CliError> {
    match channel(cfg)? {
        Channel::Quantum(q) => Ok(q),
        other => Err(CliError::validation(format!("task {} needs a quantum channel, got {}", cfg.task.name(), other.kind()))),
    }
}

fn input_distribution(cfg: &ExperimentConfig, size: usize) -> Result<Distribution, CliError> {
    match &cfg.input {
        Some(p) if p.len() != size => {
            Err(CliError::validation(format!("--input has {} entries but the channel has {size} inputs", p.len())))
        }
        Some(p) => Ok(Distribution::new(p.clone())?),
        None => Ok(Distribution::uniform(size)),
    }
}

fn input_state(cfg: &ExperimentConfig, d: usize) -> Result<DensityMatrix, CliError> {
    match &cfg.input {
        Some(p) if p.len() != d => Err(CliError::validation(format!("--input has {} entries for dimension {d}", p.len()))),
        Some(p) => Ok(DensityMatrix::diagonal(p)?),
        None => Ok(DensityMatrix::maximally_mixed(d)),
    }
}

fn req<T: Copy>(v: Option<T>, name: &str) -> Result<T, CliError> {
    v.ok_or_else(|| CliError::validation(format!("missing --{name}")))
}

pub fn run_task(cfg: &ExperimentConfig) -> Result<TaskOutput, CliError> {
    match cfg.task {
        Task::Capacity => run_capacity(cfg),
        Task::Wyner => run_wyner(cfg),
        Task::TradeoffCurve => run_tradeoff(cfg),
        Task::CrstSim => run_crst_sim(cfg),
        Task::FlatPartition => run_flat_partition(cfg),
        Task::Ce => run_ce(cfg),
        Task::ChannelProfile => run_profile(cfg),
        Task::FeedbackRates => run_feedback_rates(cfg),
        Task::Embezzle => run_embezzle(cfg),
        Task::SchurMasses => run_schur_masses(cfg),
        Task::DecouplingSweep => run_decoupling(cfg),
    }
}

fn run_capacity(cfg: &ExperimentConfig) -> Result<TaskOutput, CliError> {
    let ch = classical(cfg)?;
    let tol = req(cfg.tol, "tol")?;
    let c = capacity(&ch, tol)?;
    let h = max_output_entropy(&ch, tol)?;
    Ok(TaskOutput::ok(json!({ "capacity": to_value(&c)?, "max_output_entropy": to_value(&h)? })))
}

fn run_wyner(cfg: &ExperimentConfig) -> Result<TaskOutput, CliError> {
    let ch = classical(cfg)?;
    let p = input_distribution(cfg, ch.input_size())?;
    let j = ch.joint(&p)?;
    let w = cfg.w_size.unwrap_or_else(|| reverse_shannon::crst::default_w_size(&j));
    let r = wyner_common_information(&j, w, req(cfg.tol, "tol")?, req(cfg.restarts, "restarts")?, cfg.seed)?;
    let infeasible = !r.value.is_finite();
    Ok(TaskOutput::ok(json!({ "wyner": to_value(&r)?, "mutual_information": ch.mutual_information(&p)? }))
        .flag(infeasible, Status::NotConverged, "no start reproduced the joint distribution"))
}

fn run_tradeoff(cfg: &ExperimentConfig) -> Result<TaskOutput, CliError> {
    let ch = classical(cfg)?;
    let p = input_distribution(cfg, ch.input_size())?;
    let i = ch.mutual_information(&p)?;
    let hy = ch.output_distribution(&p)?.entropy();
    let points = req(cfg.grid, "grid")?;
    let grid: Vec<f64> = if hy - i < 1e-9 || points == 1 {
        vec![i]
    } else {
        (0..points).map(|k| i + (hy - i) * k as f64 / (points - 1) as f64).collect()
    };
    let curve = tradeoff_curve(&ch, &p, &grid, cfg.w_size, cfg.seed)?;
    let uncertified = curve.non_feedback.iter().filter(|pt| !pt.certified).count();
    let csv = tradeoff_csv(&curve.non_feedback);
    let mut out = TaskOutput::ok(to_value(&curve)?).flag(
        uncertified > 0,
        Status::CertificationFailed,
        format!("{uncertified} grid points without a certified auxiliary variable"),
    );
    out.csv = Some(csv);
    Ok(out)
}

fn run_crst_sim(cfg: &ExperimentConfig) -> Result<TaskOutput, CliError> {
    let ch = classical(cfg)?;
    let p = input_distribution(cfg, ch.input_size())?;
    let j = ch.joint(&p)?;
    let summary = crst_monte_carlo(
        ProtocolSpec::Feedback(&ch),
        &p,
        req(cfg.n, "n")?,
        req(cfg.eps, "eps")?,
        req(cfg.trials, "trials")?,
        cfg.seed,
    )?;
    Ok(TaskOutput::ok(json!({
        "summary": to_value(&summary)?,
        "mutual_information": ch.mutual_information(&p)?,
        "conditional_entropy": j.entropy() - p.entropy(),
    })))
}

fn run_flat_partition(cfg: &ExperimentConfig) -> Result<TaskOutput, CliError> {
    let g = unweighted(cfg)?;
    let eps = req(cfg.eps, "eps")?;
    let gamma = cfg.gamma.unwrap_or_else(|| 2.0 * (2.0 * g.edges() as f64).ln() / (eps * eps));
    let cert = find_good_partition(&g, eps, gamma, req(cfg.restarts, "restarts")?, cfg.seed)?;
    Ok(TaskOutput::ok(json!({ "gamma": gamma, "certificate": to_value(&cert)? })))
}

fn run_ce(cfg: &ExperimentConfig) -> Result<TaskOutput, CliError> {
    let ch = quantum(cfg)?;
    let r = entanglement_assisted_capacity(&ch, req(cfg.tol, "tol")?, req(cfg.restarts, "restarts")?, cfg.seed);
    Ok(TaskOutput::ok(json!({
        "c_e": r.value,
        "q_e": 0.5 * r.value,
        "gap": r.gap,
        "iterations": r.iterations,
        "converged": r.converged,
        "restart_values": r.restart_values,
        "argmax_spectrum": r.argmax.spectrum(),
    }))
    .flag(!r.converged, Status::NotConverged, format!("duality gap {:.3e} above tolerance", r.gap)))
}

fn run_profile(cfg: &ExperimentConfig) -> Result<TaskOutput, CliError> {
    let ch = quantum(cfg)?;
    let p = ChannelProfile::compute(&ch, req(cfg.tol, "tol")?, req(cfg.restarts, "restarts")?, cfg.seed)?;
    Ok(TaskOutput::ok(to_value(&p)?)
        .flag(!p.converged, Status::NotConverged, "an optimizer did not certify its optimum")
        .flag(!p.consistent, Status::CertificationFailed, format!("duality defect {:.3e}", p.duality_defect)))
}

fn run_feedback_rates(cfg: &ExperimentConfig) -> Result<TaskOutput, CliError> {
    let ch = quantum(cfg)?;
    let rho = input_state(cfg, ch.d_in())?;
    let r = qrst_feedback_rates(&ch, &rho)?;
    let hb = ch.apply(&rho)?.entropy();
    Ok(TaskOutput::ok(json!({ "rates": to_value(&r)?, "output_entropy": hb })))
}

fn run_embezzle(cfg: &ExperimentConfig) -> Result<TaskOutput, CliError> {
    let r = embezzle_fidelity(req(cfg.n, "n")?, req(cfg.k, "k")?)?;
    Ok(TaskOutput::ok(to_value(&r)?))
}

fn run_schur_masses(cfg: &ExperimentConfig) -> Result<TaskOutput, CliError> {
    let spectrum = cfg.input.as_ref().ok_or_else(|| CliError::validation("missing --input"))?;
    let rho = DensityMatrix::diagonal(spectrum)?;
    let n = req(cfg.n, "n")?;
    let table = block_masses(&rho, n)?;
    let typical = cfg.delta.map(|d| typical_partition_mass(&rho, n, d)).transpose()?;
    let sum_ok = (table.total - 1.0).abs() <= 1e-9;
    Ok(TaskOutput::ok(json!({ "masses": to_value(&table)?, "typical": to_value(&typical)? }))
        .flag(!sum_ok, Status::CertificationFailed, format!("block masses sum to {}", table.total))
        .flag(!table.sandwich_ok, Status::CertificationFailed, "a block mass violates the sandwich bounds"))
}

fn run_decoupling(cfg: &ExperimentConfig) -> Result<TaskOutput, CliError> {
    let v = match &cfg.channel {
        Some(_) => {
            let ch = quantum(cfg)?;
            FlatIsometry::new(ch.stinespring(), ch.d_out(), ch.d_env())?
        }
        None => FlatIsometry::ghz_copy().tensor_power(req(cfg.n, "n")?)?,
    };
    let flat = verify_flat(&v)?;
    if !flat.flat {
        return Err(CliError::validation(format!(
            "isometry is not flat (marginal deviation {:.3e})",
            flat.max_deviation
        )));
    }
    let sweep = decoupling_sweep(&v, req(cfg.trials, "trials")?, cfg.seed)?;
    let out = json!({
        "d_r": v.d_a(),
        "d_b": v.d_b(),
        "d_e": v.d_e(),
        "flat_deviation": flat.max_deviation,
        "sweep": to_value(&sweep)?,
    });
    Ok(TaskOutput::ok(out).flag(!sweep.monotone, Status::CertificationFailed, "fidelity is not monotone in D_M"))
}
