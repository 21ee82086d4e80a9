//! Adaptive constant-depth anyonic ribbon operators on standard open ribbons.
//!
//! The probabilistic stage realizes one Kraus operator
//! `F^{(C,π);((i,j),(1,1))}` per outcome pair `(i, j)`:
//!
//! 1. `Y ← ŷ_L` (product of the y readings), then `Y = p_i k` is split into `(I, K)`
//!    and `I` is measured.
//! 2. `J ← Γ_π^{-1}(k) |1⟩` and `J` is measured, then `Y` is uncomputed.
//! 3. `CCU` with control `c_i^{-1}` multiplies the x readings. It commutes with
//!    the projections onto `ŷ_L`, so running it last keeps the register small.
//!
//! The deterministic stage returns the local indices to the origin with
//! `A^{p_i^{-1}}` at the start vertex and a unitary found by Uhlmann's theorem
//! for the irrep index.

use crate::error::{Error, Result};
use crate::group::solvable_chain;
use crate::lattice::{Face, Ribbon, RibbonKind};
use crate::model::ribbon::{apply_anyonic, LocalIndices};
use crate::model::QuantumDouble;
use crate::rep::{AnyonLabel, AnyonModel};
use crate::sim::{
    amp_cap, AdaptiveCircuit, DepthReport, DiscardMode, MeasureSpec, OperatorHandle, OutcomeRecord, Policy, Runner, SiteId,
    StateVector, C64,
};

use super::ccu::{append_ccu, CcuSites};
use super::gadgets::GadgetMode;
use super::monotone::{inversion_gates, GroupGates};

pub const I_KEY: &str = "rib/i";
pub const J_KEY: &str = "rib/j";

/// Residual below which a local correction is accepted.
pub const UHLMANN_TOL: f64 = 1e-9;

/// A compiled ribbon circuit whose outputs are the lattice edges.
#[derive(Clone)]
pub struct RibbonCircuit {
    pub circuit: AdaptiveCircuit,
    /// Output qudit of each edge.
    pub outputs: Vec<SiteId>,
    /// Edges of the irrep-index correction (empty for the probabilistic stage).
    pub region: Vec<usize>,
    /// Largest Uhlmann residual among the corrections.
    pub residual: f64,
    /// Whether the local indices are returned to the origin.
    pub deterministic: bool,
}

/// Outcome of one run.
#[derive(Debug, Clone)]
pub struct RibbonRun {
    /// Normalized output on `qd.register()`.
    pub state: StateVector,
    /// Local indices `(u, v)` of the realized operator.
    pub indices: LocalIndices,
    pub record: OutcomeRecord,
    pub report: DepthReport,
}

fn identity_perm(d: usize, f: impl Fn(usize) -> usize) -> bool {
    (0..d).all(|x| f(x) == x)
}

/// `TooLarge` unless a ribbon circuit on `qd` fits under the amplitude cap. The
/// bound `|G|²` per lattice amplitude covers the `Y`, `A` and `(K, J)` ancillas.
pub fn check_size(qd: &QuantumDouble) -> Result<()> {
    let n = qd.d() as u128;
    let peak = qd.register_len().saturating_mul(n * n);
    if peak > amp_cap() as u128 {
        return Err(Error::TooLarge(peak, amp_cap()));
    }
    Ok(())
}

/// Probabilistic stage on a standard open ribbon.
pub fn probabilistic_ribbon_circuit(
    qd: &QuantumDouble,
    model: &AnyonModel,
    label: AnyonLabel,
    r: &Ribbon,
    mode: GadgetMode,
) -> Result<RibbonCircuit> {
    if r.kind != RibbonKind::StandardOpen {
        return Err(Error::UnsupportedRibbon(format!("{:?} ribbons have no adaptive circuit", r.kind)));
    }
    r.validate(&qd.lattice).map_err(|e| Error::UnsupportedRibbon(e.to_string()))?;
    let g = qd.group.clone();
    let n = g.order();
    let e = g.identity();
    let class = model.class(label).clone();
    let pi = model.irrep(label).clone();
    let (nc, ne, dp) = (class.size(), class.centralizer.len(), pi.dim);
    let chain = solvable_chain(&g)?;
    let gates = GroupGates::new(&chain, mode)?;

    let ne_edges = qd.lattice.num_edges();
    let mut circ = AdaptiveCircuit::new(ne_edges as u32);
    let mut out: Vec<SiteId> = (0..ne_edges).map(|k| qd.edge_site(k).0).collect();
    let inverted: Vec<SiteId> = r
        .y
        .iter()
        .filter(|y| y.inverted)
        .map(|y| y.edge)
        .chain(r.x.iter().filter(|x| x.inverted).map(|x| x.edge))
        .map(|k| out[k])
        .collect();
    for op in inversion_gates(&g, &inverted) {
        circ.unitary(op);
    }

    // Y ← y_1 ⋯ y_L, then Y = p_i k ≡ (i, k)
    let mut s: Vec<SiteId> = r.y.iter().map(|y| out[y.edge]).collect();
    s.push(circ.alloc_basis(n, e));
    let s = gates.cx_product_into(&mut circ, &s, "rib/Y")?;
    for (y, &site) in r.y.iter().zip(&s) {
        out[y.edge] = site;
    }
    let ysite = *s.last().expect("Y");
    let cl = class.clone();
    let gg = g.clone();
    let coset = move |x: usize| {
        let (i, k) = cl.position(&gg, x);
        i * ne + cl.centralizer.binary_search(&k).expect("centralizer element")
    };
    circ.unitary(OperatorHandle::perm_fn("coset", &[(ysite, n)], |x| vec![coset(x[0])]));
    let ik = circ.split(ysite, &[nc, ne]);
    circ.measure(I_KEY, vec![ik[0]], MeasureSpec::computational(nc));
    circ.discard(ik[0], DiscardMode::Traced);

    // J ← Γ^{-1}(k)|1⟩, measured
    let jq = circ.alloc_basis(dp, 0);
    let k_site = ik[1];
    let mut mats = Vec::with_capacity(ne);
    for &k in &class.centralizer {
        mats.push(OperatorHandle::dense("Gamma^-1", &[(jq, dp)], pi.gamma_inv(k))?);
    }
    circ.unitary(OperatorHandle::controlled("C-Gamma^-1", &[(k_site, ne)], |c| Some(mats[c[0]].clone())));
    circ.measure(J_KEY, vec![jq], MeasureSpec::computational(dp));
    circ.discard(jq, DiscardMode::Traced);

    // Y uncomputed
    let iq = circ.alloc_basis(nc, 0);
    circ.adaptive("I<-i", vec![iq], vec![I_KEY.into()], move |rec| {
        let i = rec[I_KEY];
        (i != 0).then(|| OperatorHandle::x_pow(iq, nc, i))
    });
    let yq = circ.merge(vec![iq, k_site]);
    let (cl, gg) = (class.clone(), g.clone());
    circ.unitary(OperatorHandle::perm_fn("coset^-1", &[(yq, n)], |x| {
        let (i, k) = (x[0] / ne, x[0] % ne);
        vec![gg.mul(cl.transversal[i], cl.centralizer[k])]
    }));
    let mut s: Vec<SiteId> = r.y.iter().map(|y| out[y.edge]).collect();
    s.push(yq);
    let s = gates.cx_product_into_dagger(&mut circ, &s, "rib/Yd")?;
    for (y, &site) in r.y.iter().zip(&s) {
        out[y.edge] = site;
    }
    circ.discard(*s.last().expect("Y"), DiscardMode::Expect(basis_vec(n, e)));

    // A = c_i^{-1}, CCU, A uncomputed
    let a = circ.alloc_basis(n, e);
    let swap_gate = |circ: &mut AdaptiveCircuit, a: SiteId, name: &str| {
        let (g, cl) = (g.clone(), class.clone());
        circ.adaptive(name, vec![a], vec![I_KEY.into()], move |rec| {
            let t = g.inv(cl.elements[rec[I_KEY] as usize]);
            let f = |x: usize| if x == 0 { t } else if x == t { 0 } else { x };
            if identity_perm(n, f) {
                return None;
            }
            Some(OperatorHandle::perm_fn("prep c^-1", &[(a, n)], |x| vec![f(x[0])]))
        });
    };
    swap_gate(&mut circ, a, "A<-c_i^-1");
    let cs = append_ccu(
        &mut circ,
        &gates,
        &CcuSites {
            a,
            c: r.y.iter().map(|y| out[y.edge]).collect(),
            b: r.x.iter().map(|x| out[x.edge]).collect(),
        },
        "rib/CCU",
    )?;
    for (y, &site) in r.y.iter().zip(&cs.c) {
        out[y.edge] = site;
    }
    for (x, &site) in r.x.iter().zip(&cs.b) {
        out[x.edge] = site;
    }
    swap_gate(&mut circ, cs.a, "A->e");
    circ.discard(cs.a, DiscardMode::Expect(basis_vec(n, e)));

    let inverted: Vec<SiteId> = r
        .y
        .iter()
        .filter(|y| y.inverted)
        .map(|y| y.edge)
        .chain(r.x.iter().filter(|x| x.inverted).map(|x| x.edge))
        .map(|k| out[k])
        .collect();
    for op in inversion_gates(&g, &inverted) {
        circ.unitary(op);
    }
    Ok(RibbonCircuit {
        circuit: circ,
        outputs: out,
        region: Vec::new(),
        residual: 0.0,
        deterministic: false,
    })
}

fn basis_vec(d: usize, k: usize) -> Vec<C64> {
    let mut v = vec![C64::new(0.0, 0.0); d];
    v[k] = C64::new(1.0, 0.0);
    v
}

/// Candidate regions for the irrep-index correction, smallest first.
fn candidate_regions(qd: &QuantumDouble, r: &Ribbon) -> Vec<Vec<usize>> {
    let lat = &qd.lattice;
    let mut out: Vec<Vec<usize>> = Vec::new();
    for s in [r.s0, r.s1] {
        let star = lat.incident(s.vertex);
        let plaq: Vec<usize> = match s.face {
            Face::Plaquette(p) => lat.plaquettes[p].steps.iter().map(|st| st.edge).collect(),
            Face::Outer => Vec::new(),
        };
        let mut both = star.clone();
        both.extend(plaq.iter().filter(|e| !star.contains(e)));
        for mut reg in [star, plaq, both] {
            reg.sort_unstable();
            if !reg.is_empty() && !out.contains(&reg) {
                out.push(reg);
            }
        }
    }
    out.sort_by_key(|reg| reg.len());
    out
}

/// Full circuit for `F^{(C,π)}_ξ` on the state `psi` (a ground state in the
/// intended use). The irrep-index corrections are computed from `psi`.
pub fn deterministic_ribbon_circuit(
    qd: &QuantumDouble,
    model: &AnyonModel,
    label: AnyonLabel,
    r: &Ribbon,
    mode: GadgetMode,
    psi: &StateVector,
) -> Result<RibbonCircuit> {
    let mut rc = probabilistic_ribbon_circuit(qd, model, label, r, mode)?;
    rc.deterministic = true;
    let g = qd.group.clone();
    let class = model.class(label).clone();
    let dp = model.irrep(label).dim;
    let out = rc.outputs.clone();
    let remap = move |s: SiteId| out[s.0 as usize];

    // i: A^{p_i^{-1}} at the start vertex
    let v0 = r.s0.vertex;
    let mut vops = Vec::with_capacity(class.size());
    for &p in &class.transversal {
        vops.push(qd.vertex_op(v0, g.inv(p))?.remapped(&remap));
    }
    let star: Vec<SiteId> = qd.lattice.incident(v0).iter().map(|&k| remap(qd.edge_site(k).0)).collect();
    rc.circuit.adaptive("A^{p_i^-1}", star, vec![I_KEY.into()], move |rec| {
        let i = rec[I_KEY] as usize;
        (i != 0).then(|| vops[i].clone())
    });

    // j: Uhlmann unitaries carrying F^{((1,j),(1,1))}ψ to F^{((1,1),(1,1))}ψ
    if dp > 1 {
        let image = |j: usize| -> Result<StateVector> {
            let mut s = apply_anyonic(qd, model, psi, label, LocalIndices { i: 0, j, ip: 0, jp: 0 }, r)?;
            let n2 = s.norm_sqr() / psi.norm_sqr();
            if n2 < 1e-18 {
                return Err(Error::ZeroImage(n2));
            }
            s.normalize();
            Ok(s)
        };
        let target = image(0)?;
        let sources = (1..dp).map(image).collect::<Result<Vec<_>>>()?;
        let mut found = None;
        for reg in candidate_regions(qd, r) {
            let sites: Vec<SiteId> = reg.iter().map(|&k| qd.edge_site(k).0).collect();
            let mut ws = vec![None];
            let mut worst: f64 = 0.0;
            for src in &sources {
                match src.uhlmann_unitary(&target, &sites) {
                    Ok((w, res)) => {
                        worst = worst.max(res);
                        ws.push(Some(w.remapped(&remap)));
                    }
                    Err(Error::TooLarge(_, _)) => {
                        worst = f64::INFINITY;
                        break;
                    }
                    Err(e) => return Err(e),
                }
                if worst > UHLMANN_TOL {
                    break;
                }
            }
            if worst <= UHLMANN_TOL {
                found = Some((reg, ws, worst));
                break;
            }
        }
        let Some((reg, ws, worst)) = found else {
            return Err(Error::UnsupportedRibbon("no local irrep-index correction near the endpoints".into()));
        };
        let support: Vec<SiteId> = reg.iter().map(|&k| remap(qd.edge_site(k).0)).collect();
        rc.circuit.adaptive("W_j", support, vec![J_KEY.into()], move |rec| ws[rec[J_KEY] as usize].clone());
        rc.region = reg;
        rc.residual = worst;
    }
    Ok(rc)
}

fn indices(rec: &OutcomeRecord, deterministic: bool) -> LocalIndices {
    if deterministic {
        return LocalIndices::ORIGIN;
    }
    LocalIndices {
        i: rec[I_KEY] as usize,
        j: rec[J_KEY] as usize,
        ip: 0,
        jp: 0,
    }
}

/// Output state on the lattice register, sites reordered to edge order.
pub fn lattice_state(qd: &QuantumDouble, rc: &RibbonCircuit, mut s: StateVector) -> Result<StateVector> {
    s.reorder(&rc.outputs)?;
    Ok(StateVector::from_parts(qd.register(), s.amplitudes().to_vec()))
}

/// Runs a compiled ribbon circuit once.
pub fn run_ribbon(qd: &QuantumDouble, rc: &RibbonCircuit, psi: &StateVector, policy: Policy) -> Result<RibbonRun> {
    check_size(qd)?;
    let res = Runner::run_with(&rc.circuit, psi.clone(), policy)?;
    Ok(RibbonRun {
        state: lattice_state(qd, rc, res.state)?,
        indices: indices(&res.record, rc.deterministic),
        record: res.record,
        report: res.report,
    })
}

/// One probabilistic application: the output is `F^{(C,π);(u,v)}ψ` normalized,
/// with `(u, v)` reported in the result.
pub fn apply_ribbon_adaptive(
    qd: &QuantumDouble,
    model: &AnyonModel,
    psi: &StateVector,
    label: AnyonLabel,
    r: &Ribbon,
    seed: u64,
) -> Result<RibbonRun> {
    let rc = probabilistic_ribbon_circuit(qd, model, label, r, GadgetMode::Direct)?;
    run_ribbon(qd, &rc, psi, Policy::seeded(seed))
}

/// One deterministic application on a ground state: the output is
/// `F^{(C,π)}_ξ ψ` normalized for every outcome.
pub fn apply_ribbon_deterministic(
    qd: &QuantumDouble,
    model: &AnyonModel,
    psi: &StateVector,
    label: AnyonLabel,
    r: &Ribbon,
    seed: u64,
) -> Result<RibbonRun> {
    let rc = deterministic_ribbon_circuit(qd, model, label, r, GadgetMode::Direct, psi)?;
    run_ribbon(qd, &rc, psi, Policy::seeded(seed))
}
