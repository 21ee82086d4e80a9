//! `qdouble run --config <path>`: one protocol from a JSON experiment config.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use qdouble::group::solvable_chain;
use qdouble::lattice::standard_open_ribbon;
use qdouble::model::ribbon::{apply_anyonic, fxicpi, LocalIndices};
use qdouble::model::QuantumDouble;
use qdouble::protocols::charge::{charge_measurement_circuit, charge_peak_amplitudes, LABEL_KEY};
use qdouble::protocols::gadgets::GadgetMode;
use qdouble::protocols::prepare::{self, preparation_circuit, run_preparation, BaseCase};
use qdouble::protocols::ribbon::{
    check_size, deterministic_ribbon_circuit, lattice_state, probabilistic_ribbon_circuit, I_KEY, J_KEY,
};
use qdouble::rep::AnyonModel;
use qdouble::sim::{Policy, Runner};
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::common::{self, usage};
use crate::report::Report;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProtocolName {
    Prepare,
    Ribbon,
    ChargeAdaptive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Base {
    AncillaSyndrome,
    DirectSyndrome,
    VertexStage,
}

impl From<Base> for BaseCase {
    fn from(b: Base) -> Self {
        match b {
            Base::AncillaSyndrome => BaseCase::AncillaSyndrome,
            Base::DirectSyndrome => BaseCase::DirectSyndrome,
            Base::VertexStage => BaseCase::VertexStage,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RibbonMode {
    Probabilistic,
    Deterministic,
}

/// Protocol parameters; each protocol reads only its own fields.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Params {
    /// `prepare`: base case of the recursion.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub base: Option<Base>,
    /// `ribbon`: anyon label (index or description such as `(e, standard)`).
    /// `charge-adaptive`: label of a pair created along the standard open ribbon
    /// before measuring.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    /// `ribbon`: probabilistic or deterministic stage.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode: Option<RibbonMode>,
    /// `charge-adaptive`: `plaquette`, `vertex` or `boundary`.
    #[serde(default, rename = "loop", skip_serializing_if = "Option::is_none")]
    pub loop_: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// `Z<d>`, `S<n>`, `D<n>` or a path to a multiplication-table file.
    pub group: String,
    /// `RxC`.
    pub lattice: String,
    pub protocol: ProtocolName,
    #[serde(default)]
    pub params: Params,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "one")]
    pub shots: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
}

fn one() -> usize {
    1
}

pub fn load(path: &Path) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| usage(format!("reading {}: {e}", path.display())))?;
    let cfg: ExperimentConfig =
        serde_json::from_str(&text).map_err(|e| usage(format!("config {}: {e}", path.display())))?;
    if cfg.shots == 0 {
        return Err(usage("shots must be positive"));
    }
    Ok(cfg)
}

pub fn run(cfg: &ExperimentConfig) -> Result<Report> {
    let qd = common::model(common::group(&cfg.group)?, common::lattice(&cfg.lattice)?)?;
    let mut rep = Report::new("run", serde_json::to_value(cfg).context("config echo")?);
    match cfg.protocol {
        ProtocolName::Prepare => run_prepare(cfg, &qd, &mut rep)?,
        ProtocolName::Ribbon => run_ribbon(cfg, &qd, &mut rep)?,
        ProtocolName::ChargeAdaptive => run_charge(cfg, &qd, &mut rep)?,
    }
    Ok(rep)
}

fn run_prepare(cfg: &ExperimentConfig, qd: &QuantumDouble, rep: &mut Report) -> Result<()> {
    let base: BaseCase = cfg.params.base.unwrap_or(Base::AncillaSyndrome).into();
    let chain = solvable_chain(&qd.group)?;
    common::reserve("preparation", prepare::peak_amplitudes(&chain, &qd.lattice, base))?;
    let oracle = qd.ground_state_oracle()?;
    let pc = preparation_circuit(qd, base)?;
    let mut fidelity = f64::INFINITY;
    let mut bad_m = 0;
    for i in 0..cfg.shots as u64 {
        let seed = common::shot_seed(cfg.seed, i);
        let out = run_preparation(qd, &pc, Policy::seeded(seed))?;
        let f = out.state.fidelity(&oracle)?;
        fidelity = fidelity.min(f);
        bad_m += out.m_sums.iter().filter(|&&m| m != 0).count();
        rep.runs.push(json!({
            "shot": i,
            "seed": seed,
            "fidelity": f,
            "m_sums": out.m_sums,
            "measurements": out.record.len(),
        }));
        rep.stat("quantum_depth", out.report.quantum_depth);
        rep.stat("adaptive_rounds", out.report.adaptive_rounds);
    }
    rep.stat("fidelity", fidelity);
    rep.check_min("fidelity with the oracle", 1.0 - 1e-9, fidelity);
    rep.check_max("nonzero vertex-stage sums", 0.0, bad_m as f64);
    Ok(())
}

fn run_ribbon(cfg: &ExperimentConfig, qd: &QuantumDouble, rep: &mut Report) -> Result<()> {
    check_size(qd).map_err(|e| usage(e.to_string()))?;
    let n = qd.d() as u128;
    common::reserve("ribbon circuit", qd.register_len().saturating_mul(n * n))?;
    let model = AnyonModel::new(&qd.group, None)?;
    let label = match &cfg.params.label {
        Some(s) => common::label(&model, s)?,
        None => *model.labels().last().expect("labels"),
    };
    let r = standard_open_ribbon(&qd.lattice, 0, 0, qd.lattice.cols)?;
    let psi = qd.ground_state_oracle()?;
    let mode = cfg.params.mode.unwrap_or(RibbonMode::Deterministic);
    let rc = match mode {
        RibbonMode::Probabilistic => probabilistic_ribbon_circuit(qd, &model, label, &r, GadgetMode::Direct)?,
        RibbonMode::Deterministic => deterministic_ribbon_circuit(qd, &model, label, &r, GadgetMode::Direct, &psi)?,
    };
    rep.stat("label", model.describe(label));
    let groups = Runner::run_shots(&rc.circuit, psi.clone(), cfg.shots, cfg.seed)?;
    let (want_det, _) = fxicpi(qd, &model, &psi, label, &r)?;
    let mut histogram = BTreeMap::new();
    let mut fidelity = f64::INFINITY;
    for g in groups {
        let idx = LocalIndices { i: g.record[I_KEY] as usize, j: g.record[J_KEY] as usize, ip: 0, jp: 0 };
        let want = match mode {
            RibbonMode::Deterministic => want_det.clone(),
            RibbonMode::Probabilistic => {
                let mut w = apply_anyonic(qd, &model, &psi, label, idx, &r)?;
                w.normalize();
                w
            }
        };
        let f = lattice_state(qd, &rc, g.state)?.fidelity(&want)?;
        fidelity = fidelity.min(f);
        *histogram.entry(format!("({},{})", idx.i, idx.j)).or_insert(0usize) += g.count;
    }
    let report = rc.circuit.depth_report();
    rep.stat("outcomes", histogram);
    rep.stat("fidelity", fidelity);
    rep.stat("quantum_depth", report.quantum_depth);
    rep.stat("adaptive_rounds", report.adaptive_rounds);
    if mode == RibbonMode::Deterministic {
        rep.stat("correction_region", &rc.region);
    }
    rep.check_min("fidelity with the direct operator", 1.0 - 1e-9, fidelity);
    Ok(())
}

fn run_charge(cfg: &ExperimentConfig, qd: &QuantumDouble, rep: &mut Report) -> Result<()> {
    common::reserve("charge measurement", charge_peak_amplitudes(qd))?;
    let model = AnyonModel::new(&qd.group, None)?;
    let sigma = common::find_loop(qd, cfg.params.loop_.as_deref().unwrap_or("boundary"))?;
    let mut psi = qd.ground_state_oracle()?;
    if let Some(s) = &cfg.params.label {
        let a = common::label(&model, s)?;
        let r = standard_open_ribbon(&qd.lattice, 0, 0, qd.lattice.cols)?;
        psi = fxicpi(qd, &model, &psi, a, &r)?.0;
    }
    let cc = charge_measurement_circuit(qd, &model, &sigma, GadgetMode::Direct)?;
    let mut histogram = BTreeMap::new();
    let mut completion = 0;
    for g in Runner::run_shots(&cc.circuit, psi, cfg.shots, cfg.seed)? {
        match cc.labels.get(g.record[LABEL_KEY] as usize) {
            Some(&a) => *histogram.entry(model.describe(a)).or_insert(0usize) += g.count,
            None => completion += g.count,
        }
    }
    let report = cc.circuit.depth_report();
    rep.stat("histogram", histogram);
    rep.stat("quantum_depth", report.quantum_depth);
    rep.stat("adaptive_rounds", report.adaptive_rounds);
    rep.check_max("completion outcomes", 0.0, completion as f64);
    Ok(())
}
