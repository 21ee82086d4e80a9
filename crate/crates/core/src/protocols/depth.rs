//! Depth certificates: static depth reports across a size sweep.

use std::fmt;

use crate::error::{Error, Result};
use crate::group::{solvable_chain, FiniteGroup};
use crate::lattice::{closed_region_boundary, square_lattice, standard_open_ribbon, Rect};
use crate::model::QuantumDouble;
use crate::rep::AnyonModel;
use crate::sim::{AdaptiveCircuit, DepthReport, OperatorHandle, SiteId};

use super::ccu::ccu_circuit;
use super::charge::charge_measurement_circuit;
use super::gadgets::{cyclic_gadget, CyclicGadget, GadgetMode};
use super::monotone::GroupGates;
use super::prepare::{compile_preparation, BaseCase};
use super::ribbon::probabilistic_ribbon_circuit;

/// Largest gate support accepted as local.
pub const SUPPORT_BOUND: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Size {
    Lattice(usize, usize),
    Length(usize),
}

impl fmt::Display for Size {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Size::Lattice(r, c) => write!(f, "{r}x{c}"),
            Size::Length(n) => write!(f, "{n}"),
        }
    }
}

fn parse_size(s: &str) -> Result<Size> {
    let bad = || Error::UsageError(format!("bad size '{s}'"));
    match s.split_once('x') {
        Some((r, c)) => Ok(Size::Lattice(r.trim().parse().map_err(|_| bad())?, c.trim().parse().map_err(|_| bad())?)),
        None => Ok(Size::Length(s.trim().parse().map_err(|_| bad())?)),
    }
}

/// Parses `a..b` (inclusive) or a comma list. Lattice ranges `r0xc0..r1xc1`
/// enumerate every `r × c` in the box, row-major.
pub fn parse_sweep(s: &str) -> Result<Vec<Size>> {
    let out: Vec<Size> = if let Some((a, b)) = s.split_once("..") {
        match (parse_size(a)?, parse_size(b)?) {
            (Size::Length(a), Size::Length(b)) => (a..=b).map(Size::Length).collect(),
            (Size::Lattice(r0, c0), Size::Lattice(r1, c1)) => (r0..=r1)
                .flat_map(|r| (c0..=c1).map(move |c| Size::Lattice(r, c)))
                .collect(),
            _ => return Err(Error::UsageError(format!("mixed size kinds in '{s}'"))),
        }
    } else {
        s.split(',').map(parse_size).collect::<Result<_>>()?
    };
    if out.is_empty() {
        return Err(Error::UsageError(format!("empty sweep '{s}'")));
    }
    Ok(out)
}

#[derive(Debug, Clone)]
pub enum Protocol {
    /// Ground-state preparation on `r × c` lattices.
    Prepare { group: FiniteGroup, base: BaseCase },
    /// Probabilistic anyonic ribbon of length `L` on a `1 × L` lattice.
    Ribbon { group: FiniteGroup },
    /// Charge measurement around a `1 × w` rectangle inside a `3 × (w + 2)` lattice.
    Charge { group: FiniteGroup },
    /// Cyclic gadget on `n` qudits.
    Gadget { kind: CyclicGadget, d: usize, mode: GadgetMode },
    /// `CCU` with `L` controls.
    Ccu { group: FiniteGroup, mode: GadgetMode },
    /// Sequential `CX` ladder `x_{k+1} += x_k` on `n` qudits, the non-constant baseline.
    Ladder { d: usize },
}

impl Protocol {
    pub fn name(&self) -> String {
        match self {
            Protocol::Prepare { .. } => "prepare".into(),
            Protocol::Ribbon { .. } => "ribbon".into(),
            Protocol::Charge { .. } => "charge".into(),
            Protocol::Gadget { kind, .. } => format!("gadget-{}", kind.name()),
            Protocol::Ccu { .. } => "gadget-CCU".into(),
            Protocol::Ladder { .. } => "ladder".into(),
        }
    }

    /// Default sweep used by the certificates.
    pub fn default_sweep(&self) -> Vec<Size> {
        match self {
            Protocol::Prepare { .. } => parse_sweep("1x1..2x3").expect("sweep"),
            Protocol::Ribbon { .. } | Protocol::Ccu { .. } => (2..=5).map(Size::Length).collect(),
            Protocol::Charge { .. } => (1..=4).map(Size::Length).collect(),
            Protocol::Gadget { .. } | Protocol::Ladder { .. } => (2..=6).map(Size::Length).collect(),
        }
    }

    /// Compiles the protocol at one size (no amplitudes are allocated).
    pub fn circuit(&self, size: Size) -> Result<AdaptiveCircuit> {
        let len = |s: Size| match s {
            Size::Length(n) => Ok(n),
            Size::Lattice(..) => Err(Error::UsageError(format!("{} takes integer sizes", self.name()))),
        };
        match self {
            Protocol::Prepare { group, base } => {
                let Size::Lattice(r, c) = size else {
                    return Err(Error::UsageError("prepare takes lattice sizes RxC".into()));
                };
                let qd = QuantumDouble::new(group.clone(), square_lattice(r, c)?);
                Ok(compile_preparation(&qd, *base)?.circuit)
            }
            Protocol::Ribbon { group } => {
                let l = len(size)?;
                let qd = QuantumDouble::new(group.clone(), square_lattice(1, l)?);
                let model = AnyonModel::new(group, None)?;
                let label = *model.labels().last().expect("labels");
                let r = standard_open_ribbon(&qd.lattice, 0, 0, l)?;
                Ok(probabilistic_ribbon_circuit(&qd, &model, label, &r, GadgetMode::Teleported)?.circuit)
            }
            Protocol::Charge { group } => {
                let w = len(size)?;
                let qd = QuantumDouble::new(group.clone(), square_lattice(3, w + 2)?);
                let model = AnyonModel::new(group, None)?;
                let sigma = closed_region_boundary(&qd.lattice, Rect { r0: 1, c0: 1, r1: 2, c1: w + 1 })?;
                Ok(charge_measurement_circuit(&qd, &model, &sigma, GadgetMode::Teleported)?.circuit)
            }
            Protocol::Gadget { kind, d, mode } => Ok(cyclic_gadget(*kind, *d, len(size)?, *mode)?.circuit),
            Protocol::Ccu { group, mode } => {
                let chain = solvable_chain(group)?;
                let gates = GroupGates::new(&chain, *mode)?;
                Ok(ccu_circuit(&gates, len(size)?)?.0)
            }
            Protocol::Ladder { d } => Ok(cx_ladder(*d, len(size)?)),
        }
    }
}

/// `x_{k+1} ← x_{k+1} + x_k` for `k = 1 … n-1`, in sequence.
pub fn cx_ladder(d: usize, n: usize) -> AdaptiveCircuit {
    let mut c = AdaptiveCircuit::new(n as u32);
    for k in 1..n as u32 {
        c.unitary(OperatorHandle::perm_fn("CX", &[(SiteId(k - 1), d), (SiteId(k), d)], |x| {
            vec![x[0], (x[0] + x[1]) % d]
        }));
    }
    c
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DepthRow {
    pub size: Size,
    pub report: DepthReport,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DepthCertificate {
    pub protocol: String,
    pub rows: Vec<DepthRow>,
    pub depth_constant: bool,
    pub rounds_constant: bool,
    pub support_bounded: bool,
}

impl DepthCertificate {
    pub fn passed(&self) -> bool {
        self.depth_constant && self.rounds_constant && self.support_bounded
    }
}

/// Compiles the protocol at every size and checks that quantum depth and adaptive
/// rounds are constant and gate supports stay within [`SUPPORT_BOUND`].
pub fn depth_certificate(protocol: &Protocol, sweep: &[Size]) -> Result<DepthCertificate> {
    if sweep.is_empty() {
        return Err(Error::UsageError("empty sweep".into()));
    }
    let rows = sweep
        .iter()
        .map(|&size| Ok(DepthRow { size, report: protocol.circuit(size)?.depth_report() }))
        .collect::<Result<Vec<_>>>()?;
    let first = rows[0].report;
    Ok(DepthCertificate {
        protocol: protocol.name(),
        depth_constant: rows.iter().all(|r| r.report.quantum_depth == first.quantum_depth),
        rounds_constant: rows.iter().all(|r| r.report.adaptive_rounds == first.adaptive_rounds),
        support_bounded: rows.iter().all(|r| r.report.max_support <= SUPPORT_BOUND),
        rows,
    })
}
