//! Adaptive topological charge measurement on closed ribbons.
//!
//! With `U(h) = CU^h_σ` (a representation of `G` on the target edges for fixed
//! controls) the charge projector reads
//! `K^{(C,π)} = Σ_j P^{c_j} (d_π/|E(C)|) Σ_{d ∈ E(C)} χ̄_π(d) U(p_j d p_j^{-1})`.
//! The circuit computes the holonomy into `Y`, measures its class, couples a
//! register `A` uniform over `E(C)` through `CCU`, measures `A` with the
//! isotypic projectors of `E(C)` and uncouples it again.

use crate::error::{Error, Result};
use crate::group::solvable_chain;
use crate::lattice::Ribbon;
use crate::model::QuantumDouble;
use crate::rep::{AnyonLabel, AnyonModel, CMatrix};
use crate::sim::{
    amp_cap, AdaptiveCircuit, DepthReport, DiscardMode, MeasureSpec, OperatorHandle, OutcomeRecord, Policy, Runner, SiteId,
    StateVector, C64,
};

use super::ccu::{append_ccu_anchored, CcuSites};
use super::gadgets::GadgetMode;
use super::monotone::{inversion_gates, GroupGates};

pub const CLASS_KEY: &str = "chg/class";
pub const LABEL_KEY: &str = "chg/label";

#[derive(Clone)]
pub struct ChargeCircuit {
    pub circuit: AdaptiveCircuit,
    /// Output qudit of each edge.
    pub outputs: Vec<SiteId>,
    /// Outcome `k` of [`LABEL_KEY`] is `labels[k]`; `labels.len()` is the completion.
    pub labels: Vec<AnyonLabel>,
}

#[derive(Debug, Clone)]
pub struct ChargeOutcome {
    pub label: AnyonLabel,
    pub probability: f64,
    /// Normalized posterior on `qd.register()`.
    pub state: StateVector,
    pub record: OutcomeRecord,
    pub report: DepthReport,
}

/// Largest register touched: the lattice plus `Y` and `A`.
pub fn charge_peak_amplitudes(qd: &QuantumDouble) -> u128 {
    let n = qd.d() as u128;
    qd.register_len() * n * n
}

/// Householder reflection taking `|e⟩` to the uniform state on `E(C)`.
fn uniform_prep(n: usize, centralizer: &[usize]) -> Option<CMatrix> {
    if centralizer.len() == 1 {
        return None;
    }
    let s = 1.0 / (centralizer.len() as f64).sqrt();
    let mut w = vec![0.0; n];
    w[0] = 1.0;
    for &d in centralizer {
        w[d] -= s;
    }
    let nw: f64 = w.iter().map(|x| x * x).sum();
    Some(CMatrix::from_fn(n, n, |a, b| {
        let id = if a == b { 1.0 } else { 0.0 };
        C64::new(id - 2.0 * w[a] * w[b] / nw, 0.0)
    }))
}

/// Matrix-coefficient basis of `E(C)` inside `C[G]`, grouped by label, with the
/// complement of `E(C)` labeled `completion`.
fn isotypic_spec(
    qd: &QuantumDouble,
    model: &AnyonModel,
    labels: &[AnyonLabel],
    class: usize,
) -> Result<MeasureSpec> {
    let n = qd.d();
    let c = &model.classes.classes[class];
    let ne = c.centralizer.len() as f64;
    let mut vectors = Vec::with_capacity(n);
    let mut tags = Vec::with_capacity(n);
    for (k, &a) in labels.iter().enumerate() {
        if a.class != class {
            continue;
        }
        let pi = model.irrep(a);
        let s = (pi.dim as f64 / ne).sqrt();
        for r in 0..pi.dim {
            for col in 0..pi.dim {
                let mut v = vec![C64::new(0.0, 0.0); n];
                for &d in &c.centralizer {
                    v[d] = pi.gamma(d)[(r, col)] * s;
                }
                vectors.push(v);
                tags.push(k);
            }
        }
    }
    for g in 0..n {
        if !c.in_centralizer(g) {
            let mut v = vec![C64::new(0.0, 0.0); n];
            v[g] = C64::new(1.0, 0.0);
            vectors.push(v);
            tags.push(labels.len());
        }
    }
    MeasureSpec::basis(vectors, tags)
}

/// Compiles the adaptive charge measurement on a closed ribbon.
pub fn charge_measurement_circuit(
    qd: &QuantumDouble,
    model: &AnyonModel,
    sigma: &Ribbon,
    mode: GadgetMode,
) -> Result<ChargeCircuit> {
    if !sigma.closed {
        return Err(Error::NotClosed);
    }
    sigma.validate(&qd.lattice).map_err(|e| Error::UnsupportedRibbon(e.to_string()))?;
    for (ci, c) in model.classes.classes.iter().enumerate() {
        let total: usize = model.centralizer_irreps[ci].iter().map(|p| p.dim * p.dim).sum();
        if total != c.centralizer.len() {
            return Err(Error::IncompleteLabels);
        }
    }
    let g = qd.group.clone();
    let n = g.order();
    let e = g.identity();
    let labels = model.labels();
    let nclasses = model.classes.classes.len();
    let chain = solvable_chain(&g)?;
    let gates = GroupGates::new(&chain, mode)?;

    let ne_edges = qd.lattice.num_edges();
    let mut circ = AdaptiveCircuit::new(ne_edges as u32);
    let mut out: Vec<SiteId> = (0..ne_edges).map(|k| qd.edge_site(k).0).collect();
    let invert = |circ: &mut AdaptiveCircuit, out: &[SiteId]| {
        let inv: Vec<SiteId> = sigma
            .y
            .iter()
            .filter(|y| y.inverted)
            .map(|y| y.edge)
            .chain(sigma.x.iter().filter(|x| x.inverted).map(|x| x.edge))
            .map(|k| out[k])
            .collect();
        for op in inversion_gates(&g, &inv) {
            circ.unitary(op);
        }
    };
    invert(&mut circ, &out);

    // Y ← holonomy, class measured
    let y0 = circ.alloc_basis(n, e);
    let ysite = if sigma.y.is_empty() {
        y0
    } else {
        let mut s: Vec<SiteId> = sigma.y.iter().map(|y| out[y.edge]).collect();
        s.push(y0);
        let s = gates.cx_product_into(&mut circ, &s, "chg/Y")?;
        for (y, &site) in sigma.y.iter().zip(&s) {
            out[y.edge] = site;
        }
        *s.last().expect("Y")
    };
    let cd = model.classes.clone();
    circ.measure(CLASS_KEY, vec![ysite], MeasureSpec::grouped(n, move |y| cd.class_of(y).0));

    // A uniform over E(C)
    let a = circ.alloc_basis(n, e);
    let mut preps = Vec::with_capacity(nclasses);
    for c in &model.classes.classes {
        preps.push(match uniform_prep(n, &c.centralizer) {
            Some(m) => Some(OperatorHandle::dense("uniform E(C)", &[(a, n)], m)?),
            None => None,
        });
    }
    let prep_gate = |circ: &mut AdaptiveCircuit, a: SiteId, name: &str| {
        let ops: Vec<Option<OperatorHandle>> = preps
            .iter()
            .map(|p| p.as_ref().map(|o| o.remapped(&|_| a)))
            .collect();
        circ.adaptive(name, vec![a], vec![CLASS_KEY.into()], move |rec| ops[rec[CLASS_KEY] as usize].clone());
    };
    prep_gate(&mut circ, a, "A<-E(C)");

    // E: A ← p_j A p_j^{-1} with j the position of Y in its class
    let conj_gate = |ysite: SiteId, a: SiteId, inverse: bool| {
        let (g, cd) = (g.clone(), model.classes.clone());
        OperatorHandle::perm_fn(if inverse { "E^-1" } else { "E" }, &[(ysite, n), (a, n)], move |x| {
            let (c, j) = cd.class_of(x[0]);
            let p = cd.classes[c].transversal[j];
            let p = if inverse { g.inv(p) } else { p };
            vec![x[0], g.conj(p, x[1])]
        })
    };
    let anchors: Vec<usize> = sigma.x.iter().map(|x| x.anchor).collect();
    let couple = |circ: &mut AdaptiveCircuit, out: &mut Vec<SiteId>, a: SiteId, inverse: bool, tag: &str| {
        circ.unitary(conj_gate(ysite, a, false));
        if inverse {
            for op in inversion_gates(&g, &[a]) {
                circ.unitary(op);
            }
        }
        let cs = append_ccu_anchored(
            circ,
            &gates,
            &CcuSites {
                a,
                c: sigma.y.iter().map(|y| out[y.edge]).collect(),
                b: sigma.x.iter().map(|x| out[x.edge]).collect(),
            },
            &anchors,
            tag,
        )?;
        for (y, &site) in sigma.y.iter().zip(&cs.c) {
            out[y.edge] = site;
        }
        for (x, &site) in sigma.x.iter().zip(&cs.b) {
            out[x.edge] = site;
        }
        if inverse {
            for op in inversion_gates(&g, &[cs.a]) {
                circ.unitary(op);
            }
        }
        circ.unitary(conj_gate(ysite, cs.a, true));
        Ok::<SiteId, Error>(cs.a)
    };
    let a = couple(&mut circ, &mut out, a, false, "chg/CCU")?;

    let specs = (0..nclasses)
        .map(|c| isotypic_spec(qd, model, &labels, c))
        .collect::<Result<Vec<_>>>()?;
    circ.measure_adaptive(LABEL_KEY, vec![a], vec![CLASS_KEY.into()], move |rec| {
        specs[rec[CLASS_KEY] as usize].clone()
    });

    let a = couple(&mut circ, &mut out, a, true, "chg/CCUd")?;
    prep_gate(&mut circ, a, "A->e");
    circ.discard(a, DiscardMode::Expect(basis_vec(n, e)));

    if !sigma.y.is_empty() {
        let mut s: Vec<SiteId> = sigma.y.iter().map(|y| out[y.edge]).collect();
        s.push(ysite);
        let s = gates.cx_product_into_dagger(&mut circ, &s, "chg/Yd")?;
        for (y, &site) in sigma.y.iter().zip(&s) {
            out[y.edge] = site;
        }
        circ.discard(*s.last().expect("Y"), DiscardMode::Expect(basis_vec(n, e)));
    } else {
        circ.discard(ysite, DiscardMode::Expect(basis_vec(n, e)));
    }
    invert(&mut circ, &out);
    Ok(ChargeCircuit {
        circuit: circ,
        outputs: out,
        labels,
    })
}

fn basis_vec(d: usize, k: usize) -> Vec<C64> {
    let mut v = vec![C64::new(0.0, 0.0); d];
    v[k] = C64::new(1.0, 0.0);
    v
}

fn check_size(qd: &QuantumDouble) -> Result<()> {
    let peak = charge_peak_amplitudes(qd);
    if peak > amp_cap() as u128 {
        return Err(Error::TooLarge(peak, amp_cap()));
    }
    Ok(())
}

fn on_register(qd: &QuantumDouble, cc: &ChargeCircuit, mut s: StateVector) -> Result<StateVector> {
    s.reorder(&cc.outputs)?;
    Ok(StateVector::from_parts(qd.register(), s.amplitudes().to_vec()))
}

fn outcome_label(cc: &ChargeCircuit, rec: &OutcomeRecord) -> Result<AnyonLabel> {
    cc.labels.get(rec[LABEL_KEY] as usize).copied().ok_or(Error::CompletionOutcome)
}

/// Samples one outcome of the adaptive measurement.
pub fn measure_charge_adaptive(
    qd: &QuantumDouble,
    model: &AnyonModel,
    psi: &StateVector,
    sigma: &Ribbon,
    seed: u64,
) -> Result<ChargeOutcome> {
    check_size(qd)?;
    let cc = charge_measurement_circuit(qd, model, sigma, GadgetMode::Direct)?;
    let r = Runner::run_with(&cc.circuit, psi.clone(), Policy::seeded(seed))?;
    Ok(ChargeOutcome {
        label: outcome_label(&cc, &r.record)?,
        probability: r.branch_probability,
        state: on_register(qd, &cc, r.state)?,
        record: r.record,
        report: r.report,
    })
}

/// Every outcome of the adaptive measurement with positive probability, by exact
/// enumeration of the branches.
pub fn adaptive_charge_distribution(
    qd: &QuantumDouble,
    cc: &ChargeCircuit,
    psi: &StateVector,
) -> Result<Vec<ChargeOutcome>> {
    check_size(qd)?;
    let report = cc.circuit.depth_report();
    Runner::branches(&cc.circuit, psi.clone(), 1e-15)?
        .into_iter()
        .map(|b| {
            Ok(ChargeOutcome {
                label: outcome_label(cc, &b.record)?,
                probability: b.probability,
                state: on_register(qd, cc, b.state)?,
                record: b.record,
                report,
            })
        })
        .collect()
}
