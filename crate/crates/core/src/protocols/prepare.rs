//! Adaptive constant-depth preparation of the quantum double ground state.
//!
//! Each chain stage `G ⊵ H` with `G/H = ⟨aH⟩ ≅ Z_d` uses a vertex register `A`
//! (dimension `d`), an edge register `B` (dimension `d`) and an edge register `C`
//! holding the ground state over `H`. Edge values are identified via
//! `|a^j h⟩ ≡ |j⟩ ⊗ |h⟩`. The last stage is cyclic and is prepared by syndrome
//! measurement plus a Pauli correction.

use crate::error::{Error, Result};
use crate::group::{solvable_chain, ChainStage, CosetSplit, SolvableChain};
use crate::lattice::{dual_tree, spanning_tree, Face, PlanarLattice};
use crate::model::{OneForm, QuantumDouble, ZeroForm};
use crate::sim::{
    amp_cap, AdaptiveCircuit, DepthReport, DiscardMode, MeasureSpec, OutcomeRecord, OperatorHandle, Policy, Runner,
    SiteId, StateVector, C64,
};

use super::monotone::check_split;

/// How the cyclic last stage is prepared.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BaseCase {
    /// Plaquette holonomies accumulated into one ancilla per plaquette, which is then
    /// measured. Depth does not depend on the lattice size.
    AncillaSyndrome,
    /// Plaquette holonomies measured directly on the four plaquette edges, in two
    /// checkerboard layers.
    DirectSyndrome,
    /// The generic vertex stage with trivial `H`.
    VertexStage,
}

/// A compiled preparation circuit.
pub struct PrepCircuit {
    pub circuit: AdaptiveCircuit,
    /// Output qudit of each edge, dimension `|G|`.
    pub outputs: Vec<SiteId>,
    /// Prefixes of the vertex stages, outermost first, with their quotient order.
    pub vertex_stages: Vec<(String, usize)>,
    pub peak_amplitudes: u128,
}

pub struct PrepResult {
    /// Edge register in the layout of [`QuantumDouble::register`].
    pub state: StateVector,
    pub report: DepthReport,
    pub record: OutcomeRecord,
    /// `Σ_v m(v) mod d` for every vertex stage, outermost first.
    pub m_sums: Vec<i64>,
}

fn z_d_step(d: usize, sign: i64) -> impl Fn(&[usize]) -> Vec<usize> {
    move |x| vec![x[0], ((x[1] as i64 + sign * x[0] as i64).rem_euclid(d as i64)) as usize]
}

/// Cyclic stage in the coordinates `j` of `a^j`; relabels to local indices at the end.
fn cyclic_base(
    circ: &mut AdaptiveCircuit,
    stage: &ChainStage,
    lat: &PlanarLattice,
    base: BaseCase,
    prefix: &str,
) -> Vec<SiteId> {
    let d = stage.d();
    let edges: Vec<SiteId> = (0..lat.num_edges()).map(|_| circ.alloc_plus(d)).collect();
    let np = lat.num_plaquettes();
    let flux_key = |p: usize| format!("{prefix}/f{p}");
    match base {
        BaseCase::AncillaSyndrome => {
            // Rows top-down and columns left-to-right keep every edge's gate order
            // (bottom before top, right before left) with one live ancilla.
            for r in (0..lat.rows).rev() {
                for c in 0..lat.cols {
                    let p = lat.plaquette(r, c);
                    let anc = circ.alloc_basis(d, 0);
                    for s in lat.plaquettes[p].steps {
                        let sign = if s.forward { 1 } else { -1 };
                        circ.unitary(OperatorHandle::perm_fn(
                            "CX",
                            &[(edges[s.edge], d), (anc, d)],
                            z_d_step(d, sign),
                        ));
                    }
                    circ.measure(&flux_key(p), vec![anc], MeasureSpec::computational(d));
                    circ.discard(anc, DiscardMode::Traced);
                }
            }
        }
        BaseCase::DirectSyndrome => {
            for parity in 0..2 {
                for r in 0..lat.rows {
                    for c in 0..lat.cols {
                        if (r + c) % 2 != parity {
                            continue;
                        }
                        let p = lat.plaquette(r, c);
                        let steps = lat.plaquettes[p].steps;
                        let sites = steps.iter().map(|s| edges[s.edge]).collect();
                        let n = d.pow(4);
                        let spec = MeasureSpec::grouped(n, |i| {
                            let mut x = [0usize; 4];
                            crate::sim::decode(i, &[d; 4], &mut x);
                            let f: i64 =
                                steps.iter().zip(x).map(|(s, v)| if s.forward { v as i64 } else { -(v as i64) }).sum();
                            f.rem_euclid(d as i64) as usize
                        });
                        circ.measure(&flux_key(p), sites, spec);
                    }
                }
            }
        }
        BaseCase::VertexStage => unreachable!("handled by the vertex stage"),
    }
    // Fluxes are pushed leaf-first along the dual tree onto the outer face.
    let tree = dual_tree(lat);
    let sign_in = |p: usize, e: usize| -> i64 {
        let s = lat.plaquettes[p].steps.iter().find(|s| s.edge == e).expect("edge of plaquette");
        if s.forward {
            1
        } else {
            -1
        }
    };
    let signs: Vec<(i64, Option<(usize, i64)>)> = (0..np)
        .map(|p| {
            let (q, e) = tree.parent[p];
            let up = match q {
                Face::Plaquette(q) => Some((q, sign_in(q, e))),
                Face::Outer => None,
            };
            (sign_in(p, e), up)
        })
        .collect();
    let order = tree.order.clone();
    let tree_edges: Vec<usize> = tree.parent.iter().map(|t| t.1).collect();
    let reads: Vec<String> = (0..np).map(flux_key).collect();
    let writes: Vec<String> = tree_edges.iter().map(|e| format!("{prefix}/x{e}")).collect();
    let (pf, d64, te) = (prefix.to_string(), d as i64, tree_edges.clone());
    circ.classical("flux-correction", reads, writes, move |rec| {
        let mut flux: Vec<i64> = (0..np).map(|p| rec[&format!("{pf}/f{p}")]).collect();
        let mut out = Vec::with_capacity(np);
        for &p in order.iter().rev() {
            let (sp, up) = signs[p];
            let c = (-flux[p] * sp).rem_euclid(d64);
            flux[p] = 0;
            if let Some((q, sq)) = up {
                flux[q] = (flux[q] + sq * c).rem_euclid(d64);
            }
            out.push((format!("{pf}/x{}", te[p]), c));
        }
        out
    });
    for &e in &tree_edges {
        let (key, site) = (format!("{prefix}/x{e}"), edges[e]);
        circ.adaptive("X-fix", vec![site], vec![key.clone()], move |rec| {
            Some(OperatorHandle::x_pow(site, d, rec[&key]))
        });
    }
    relabel_cyclic(circ, &stage.split, edges)
}

fn relabel_cyclic(circ: &mut AdaptiveCircuit, split: &CosetSplit, edges: Vec<SiteId>) -> Vec<SiteId> {
    let d = split.quotient_order;
    if (0..d).all(|j| split.merge(j, 0) == j) {
        return edges;
    }
    for &s in &edges {
        circ.unitary(OperatorHandle::perm_fn("relabel", &[(s, d)], |x| vec![split.merge(x[0], 0)]));
    }
    edges
}

/// One vertex stage over `stages[0]`; `c` holds the ground state over `H` (absent when
/// `H` is trivial).
fn vertex_stage(
    circ: &mut AdaptiveCircuit,
    stage: &ChainStage,
    lat: &PlanarLattice,
    c: Option<Vec<SiteId>>,
    prefix: &str,
) -> Result<Vec<SiteId>> {
    let (d, sp) = (stage.d(), stage.split.clone());
    let hn = sp.h_order();
    let g = stage.group.clone();
    let a = sp.generator;
    let tree = spanning_tree(lat, 0)?;
    let mut b: Vec<Option<SiteId>> = vec![None; lat.num_edges()];
    let m_key = |v: usize| format!("{prefix}/m{v}");
    // Rows top-down, columns right-to-left: each edge sees its head's gate before its
    // tail's, and only one vertex qudit is live at a time.
    for r in (0..=lat.rows).rev() {
        for col in (0..=lat.cols).rev() {
            let v = lat.vertex(r, col);
            let av = circ.alloc_plus(d);
            let mut plan: Vec<(usize, i64)> = Vec::new();
            if col > 0 {
                plan.push((lat.horizontal(r, col - 1), 1));
            }
            if col < lat.cols {
                plan.push((lat.horizontal(r, col), -1));
            }
            if r > 0 {
                plan.push((lat.vertical(r - 1, col), 1));
            }
            if r < lat.rows {
                plan.push((lat.vertical(r, col), -1));
            }
            for &(e, sign) in &plan {
                let be = *b[e].get_or_insert_with(|| circ.alloc_basis(d, 0));
                let name = if sign > 0 { "CX" } else { "CX^-1" };
                circ.unitary(OperatorHandle::perm_fn(name, &[(av, d), (be, d)], z_d_step(d, sign)));
            }
            if let Some(c) = &c {
                for &(e, sign) in &plan {
                    if sign < 0 {
                        let (gg, sub) = (g.clone(), sp.subgroup.clone());
                        let spc = sp.clone();
                        circ.unitary(OperatorHandle::perm_fn("W", &[(av, d), (c[e], hn)], move |x| {
                            let aj = gg.pow(a, x[0] as i64);
                            vec![x[0], spc.h_pos(gg.conj(aj, sub[x[1]])).expect("normal subgroup")]
                        }));
                    }
                }
            }
            circ.measure(&m_key(v), vec![av], MeasureSpec::x_basis(d));
            circ.discard(av, DiscardMode::Traced);
        }
    }
    let nv = lat.num_vertices();
    let ne = lat.num_edges();
    let reads: Vec<String> = (0..nv).map(m_key).collect();
    let mut writes: Vec<String> = (0..ne).map(|e| format!("{prefix}/z{e}")).collect();
    writes.push(format!("{prefix}/msum"));
    let (pf, d64) = (prefix.to_string(), d as i64);
    let signs = tree.signs.clone();
    circ.classical("tree-phase", reads, writes, move |rec| {
        let m: Vec<i64> = (0..nv).map(|v| rec[&format!("{pf}/m{v}")]).collect();
        let mut out: Vec<(String, i64)> = (0..ne)
            .map(|e| {
                let z: i64 = (0..nv).map(|v| m[v] * signs[v][e] as i64).sum();
                (format!("{pf}/z{e}"), z.rem_euclid(d64))
            })
            .collect();
        out.push((format!("{pf}/msum"), m.iter().sum::<i64>().rem_euclid(d64)));
        out
    });
    let b: Vec<SiteId> = b.into_iter().map(|s| s.expect("every edge has a head")).collect();
    for (e, &be) in b.iter().enumerate() {
        let key = format!("{prefix}/z{e}");
        circ.adaptive("Z-fix", vec![be], vec![key.clone()], move |rec| {
            Some(OperatorHandle::z_pow(be, d, -rec[&key]))
        });
    }
    let mut out = Vec::with_capacity(ne);
    for e in 0..ne {
        let (site, joint) = match &c {
            Some(c) => (circ.merge(vec![b[e], c[e]]), d * hn),
            None => (b[e], d),
        };
        let spc = sp.clone();
        let relabel = OperatorHandle::perm_fn("E^dag", &[(site, joint)], move |x| {
            vec![spc.merge(x[0] / hn, x[0] % hn)]
        });
        if (0..joint).any(|i| sp.merge(i / hn, i % hn) != i) {
            circ.unitary(relabel);
        }
        out.push(site);
    }
    Ok(out)
}

fn compile_stages(
    circ: &mut AdaptiveCircuit,
    stages: &[ChainStage],
    lat: &PlanarLattice,
    base: BaseCase,
    prefix: &str,
    vertex_stages: &mut Vec<(String, usize)>,
) -> Result<Vec<SiteId>> {
    let stage = &stages[0];
    if stages.len() == 1 && base != BaseCase::VertexStage {
        return Ok(cyclic_base(circ, stage, lat, base, &format!("{prefix}.base")));
    }
    let c = if stages.len() > 1 {
        Some(compile_stages(circ, &stages[1..], lat, base, &format!("{prefix}.H"), vertex_stages)?)
    } else {
        None
    };
    let pf = format!("{prefix}.v");
    let out = vertex_stage(circ, stage, lat, c, &pf)?;
    vertex_stages.insert(0, (pf, stage.d()));
    Ok(out)
}

/// Largest number of amplitudes held at any point of the compiled circuit.
pub fn peak_amplitudes(chain: &SolvableChain, lat: &PlanarLattice, base: BaseCase) -> u128 {
    let ne = lat.num_edges() as u32;
    let mut peak = 1u128;
    for (i, st) in chain.stages.iter().enumerate() {
        let n = st.group.order() as u128;
        let d = st.d() as u128;
        let last = i + 1 == chain.stages.len();
        let extra = if last && base == BaseCase::DirectSyndrome { 1 } else { d };
        peak = peak.max(n.saturating_pow(ne).saturating_mul(extra));
    }
    peak
}

/// Compiles the preparation circuit for `qd`. Fails with `NotSolvable`,
/// `NonSplitExtension` or `TooLarge`.
pub fn preparation_circuit(qd: &QuantumDouble, base: BaseCase) -> Result<PrepCircuit> {
    let pc = compile_preparation(qd, base)?;
    if pc.peak_amplitudes > amp_cap() as u128 {
        return Err(Error::TooLarge(pc.peak_amplitudes, amp_cap()));
    }
    Ok(pc)
}

/// As [`preparation_circuit`] without the size guard; compiling never allocates
/// amplitudes.
pub fn compile_preparation(qd: &QuantumDouble, base: BaseCase) -> Result<PrepCircuit> {
    let chain = solvable_chain(&qd.group)?;
    check_split(&chain)?;
    let peak = peak_amplitudes(&chain, &qd.lattice, base);
    let mut circuit = AdaptiveCircuit::new(0);
    let mut vertex_stages = Vec::new();
    let outputs = if chain.stages.is_empty() {
        (0..qd.lattice.num_edges()).map(|_| circuit.alloc_basis(1, 0)).collect()
    } else {
        compile_stages(&mut circuit, &chain.stages, &qd.lattice, base, "prep", &mut vertex_stages)?
    };
    Ok(PrepCircuit {
        circuit,
        outputs,
        vertex_stages,
        peak_amplitudes: peak,
    })
}

/// Runs the compiled preparation with Born sampling from `seed`.
pub fn prepare_ground_state(qd: &QuantumDouble, seed: u64, base: BaseCase) -> Result<PrepResult> {
    let pc = preparation_circuit(qd, base)?;
    run_preparation(qd, &pc, Policy::seeded(seed))
}

pub fn run_preparation(qd: &QuantumDouble, pc: &PrepCircuit, policy: Policy) -> Result<PrepResult> {
    let empty = StateVector::from_parts(Vec::new(), vec![C64::new(1.0, 0.0)]);
    let r = Runner::run_onto(&pc.circuit, empty, &pc.outputs, policy)?;
    let state = StateVector::from_parts(qd.register(), r.state.amplitudes().to_vec());
    let m_sums = pc.vertex_stages.iter().map(|(pf, _)| r.record[&format!("{pf}/msum")]).collect();
    Ok(PrepResult {
        state,
        report: r.report,
        record: r.record,
        m_sums,
    })
}

/// Splits an exact form `η' = dφ` over `G` into `θ` over `Z_d` (vertex exponents) and an
/// exact form `η` over `H` (local indices) with `η'(e) = a^{θ(e^+)} η(e) a^{-θ(e^-)}`.
pub fn exact_form_split(qd: &QuantumDouble, split: &CosetSplit, eta_prime: &[usize]) -> Result<(ZeroForm, OneForm)> {
    let g = &qd.group;
    let phi = qd.exactness_witness(eta_prime)?;
    let theta: ZeroForm = phi.iter().map(|&x| split.split(x).0).collect();
    let psi: Vec<usize> = phi.iter().map(|&x| split.h_element(x)).collect();
    let eta = qd
        .lattice
        .edges
        .iter()
        .map(|e| {
            let h = g.mul(psi[e.head], g.inv(psi[e.tail]));
            split.h_pos(h).ok_or_else(|| Error::NotExact(format!("{} is not in H", g.label(h))))
        })
        .collect::<Result<OneForm>>()?;
    Ok((theta, eta))
}

/// Inverse of [`exact_form_split`].
pub fn exact_form_merge(qd: &QuantumDouble, split: &CosetSplit, theta: &[usize], eta: &[usize]) -> OneForm {
    let g = &qd.group;
    let a = split.generator;
    qd.lattice
        .edges
        .iter()
        .zip(eta)
        .map(|(e, &h)| {
            let up = g.pow(a, theta[e.head] as i64);
            let down = g.pow(a, -(theta[e.tail] as i64));
            g.mul(g.mul(up, split.subgroup[h]), down)
        })
        .collect()
}

/// Outcome keys of the vertex measurements of a stage.
pub fn m_values(record: &OutcomeRecord, prefix: &str, nv: usize) -> Vec<i64> {
    (0..nv).map(|v| record[&format!("{prefix}/m{v}")]).collect()
}
