//! Group-product unitaries `U_A^G` for monotone exponent matrices, compiled by
//! recursion along a solvable chain onto the cyclic gadgets.

use crate::error::{Error, Result};
use crate::group::{ChainStage, FiniteGroup, SolvableChain};
use crate::sim::{AdaptiveCircuit, OperatorHandle, SiteId};

use super::gadgets::{apply_cyclic, CyclicGadget, GadgetMode};

/// An `n × n` matrix over `{-1, 0, 1}` whose rows are monotone: along each row
/// the nonzero entries are all `-1` before all `+1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MonotoneMatrix {
    rows: Vec<Vec<i8>>,
}

/// Shapes the compiler knows how to reduce.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Structure {
    Identity,
    /// `V`: row `i` is `1` on columns `0..=i`.
    PartialProducts,
    /// `V†`: row `i` is `-1` at `i-1` and `1` at `i`.
    PartialProductsInverse,
    /// `CX^⇐_{C_{L+1} → C^L}`: row `i < L` is `1` at `i` and `L`; the last row is `e_L`.
    RightFanout,
}

impl MonotoneMatrix {
    pub fn new(rows: Vec<Vec<i8>>) -> Result<MonotoneMatrix> {
        let n = rows.len();
        for (i, r) in rows.iter().enumerate() {
            if r.len() != n {
                return Err(Error::NotMonotone(format!("row {i} has length {} in a {n}x{n} matrix", r.len())));
            }
            if let Some(v) = r.iter().find(|v| !(-1..=1).contains(*v)) {
                return Err(Error::NotMonotone(format!("row {i} has entry {v}")));
            }
            let nz: Vec<i8> = r.iter().copied().filter(|&v| v != 0).collect();
            if nz.windows(2).any(|w| w[0] == 1 && w[1] == -1) {
                return Err(Error::NotMonotone(format!("row {i} = {r:?} switches from +1 to -1")));
            }
        }
        Ok(MonotoneMatrix { rows })
    }

    pub fn identity(n: usize) -> MonotoneMatrix {
        MonotoneMatrix {
            rows: (0..n).map(|i| (0..n).map(|k| i8::from(i == k)).collect()).collect(),
        }
    }

    pub fn partial_products(n: usize) -> MonotoneMatrix {
        MonotoneMatrix {
            rows: (0..n).map(|i| (0..n).map(|k| i8::from(k <= i)).collect()).collect(),
        }
    }

    pub fn partial_products_inverse(n: usize) -> MonotoneMatrix {
        MonotoneMatrix {
            rows: (0..n)
                .map(|i| {
                    (0..n)
                        .map(|k| if k == i { 1 } else if k + 1 == i { -1 } else { 0 })
                        .collect()
                })
                .collect(),
        }
    }

    /// Right multiplication of the first `n - 1` entries by the last one.
    pub fn right_fanout(n: usize) -> MonotoneMatrix {
        MonotoneMatrix {
            rows: (0..n)
                .map(|i| (0..n).map(|k| i8::from(k == i || k == n - 1)).collect())
                .collect(),
        }
    }

    pub fn n(&self) -> usize {
        self.rows.len()
    }

    pub fn rows(&self) -> &[Vec<i8>] {
        &self.rows
    }

    /// `Γ_A^G(g_1..g_n)_i = ∏_k g_k^{A_{i,k}}`.
    pub fn gamma(&self, g: &FiniteGroup, xs: &[usize]) -> Vec<usize> {
        self.rows
            .iter()
            .map(|r| {
                r.iter().zip(xs).fold(g.identity(), |acc, (&e, &x)| match e {
                    1 => g.mul(acc, x),
                    -1 => g.mul(acc, g.inv(x)),
                    _ => acc,
                })
            })
            .collect()
    }

    /// Whether `Γ_A^G` is a bijection, by enumeration (`|G|^n ≤ 2^20`).
    pub fn is_bijective(&self, g: &FiniteGroup) -> Result<bool> {
        let n = self.n();
        let total = (g.order() as u128).pow(n as u32);
        if total > 1 << 20 {
            return Err(Error::TooLarge(total, 1 << 20));
        }
        let dims = vec![g.order(); n];
        let mut seen = vec![false; total as usize];
        let mut xs = vec![0; n];
        for i in 0..total as usize {
            crate::sim::decode(i, &dims, &mut xs);
            let y = crate::sim::encode(&self.gamma(g, &xs), &dims);
            if seen[y] {
                return Ok(false);
            }
            seen[y] = true;
        }
        Ok(true)
    }

    pub fn structure(&self) -> Option<Structure> {
        let n = self.n();
        [
            (Structure::Identity, MonotoneMatrix::identity(n)),
            (Structure::PartialProducts, MonotoneMatrix::partial_products(n)),
            (Structure::PartialProductsInverse, MonotoneMatrix::partial_products_inverse(n)),
            (Structure::RightFanout, MonotoneMatrix::right_fanout(n)),
        ]
        .into_iter()
        .find(|(_, m)| m == self)
        .map(|(s, _)| s)
    }
}

fn group_perm(name: &str, sites: &[SiteId], dim: usize, f: impl Fn(usize) -> usize) -> Vec<OperatorHandle> {
    sites
        .iter()
        .map(|&s| OperatorHandle::perm_fn(name, &[(s, dim)], |x| vec![f(x[0])]))
        .collect()
}

/// `S|g⟩ = |g^{-1}⟩` on each site.
pub fn inversion_gates(g: &FiniteGroup, sites: &[SiteId]) -> Vec<OperatorHandle> {
    group_perm("S", sites, g.order(), |x| g.inv(x))
}

/// `|J⟩|h⟩ ↦ |J⟩|a^{sJ} h a^{-sJ}⟩` on a split pair.
fn conj_gate(stage: &ChainStage, j: SiteId, h: SiteId, sign: i64) -> OperatorHandle {
    let g = &stage.group;
    let sp = &stage.split;
    let a = sp.generator;
    OperatorHandle::perm_fn(
        if sign > 0 { "W" } else { "W^dag" },
        &[(j, sp.quotient_order), (h, sp.h_order())],
        |x| {
            let c = g.pow(a, sign * x[0] as i64);
            let y = g.mul(g.mul(c, sp.subgroup[x[1]]), g.inv(c));
            vec![x[0], sp.h_pos(y).expect("normal subgroup")]
        },
    )
}

/// Checks that every stage splits: `a^d = e`.
pub fn check_split(chain: &SolvableChain) -> Result<()> {
    for st in &chain.stages {
        let ad = st.group.pow(st.generator(), st.d() as i64);
        if ad != st.group.identity() {
            return Err(Error::NonSplitExtension(ad));
        }
    }
    Ok(())
}

/// Appends `U_A^{G_s}` on `sites` (each of dimension `|G_s|`) using stages `s..`.
/// Returns the qudits holding the output.
pub fn compile_structure(
    circ: &mut AdaptiveCircuit,
    structure: Structure,
    stages: &[ChainStage],
    sites: &[SiteId],
    mode: GadgetMode,
    prefix: &str,
) -> Result<Vec<SiteId>> {
    let Some(stage) = stages.first() else {
        return Ok(sites.to_vec());
    };
    if structure == Structure::Identity {
        return Ok(sites.to_vec());
    }
    let sp = &stage.split;
    let (d, hn, go) = (sp.quotient_order, sp.h_order(), stage.group.order());
    let n = sites.len();
    let cyclic = match structure {
        Structure::PartialProducts => CyclicGadget::PartialSum,
        Structure::PartialProductsInverse => CyclicGadget::SuccessiveDifference,
        Structure::RightFanout => CyclicGadget::MultitargetCx,
        Structure::Identity => unreachable!(),
    };
    let pfx = format!("{prefix}.{}", stage.group.order());
    if hn == 1 {
        for op in group_perm("E", sites, go, |g| sp.split(g).0) {
            circ.unitary(op);
        }
        let out = apply_cyclic(circ, cyclic, d, sites, mode, &pfx)?;
        for op in group_perm("E^dag", &out, go, |j| sp.merge(j, 0)) {
            circ.unitary(op);
        }
        return Ok(out);
    }
    // E: |g⟩ ↦ |j⟩|h⟩ with g = a^j h
    let mut js = Vec::with_capacity(n);
    let mut hs = Vec::with_capacity(n);
    for (op, &s) in group_perm("E", sites, go, |g| {
        let (j, hp) = sp.split(g);
        j * hn + hp
    })
    .into_iter()
    .zip(sites)
    {
        circ.unitary(op);
        let parts = circ.split(s, &[d, hn]);
        js.push(parts[0]);
        hs.push(parts[1]);
    }
    let rest = &stages[1..];
    match structure {
        Structure::PartialProducts => {
            // Π_{m≤i} a^{j_m} h_m = (Π_{m≤i} a^{J_m} h_m a^{-J_m}) a^{J_i}
            js = apply_cyclic(circ, cyclic, d, &js, mode, &pfx)?;
            for m in 0..n {
                circ.unitary(conj_gate(stage, js[m], hs[m], 1));
            }
            hs = compile_structure(circ, structure, rest, &hs, mode, &pfx)?;
            for m in 0..n {
                circ.unitary(conj_gate(stage, js[m], hs[m], -1));
            }
        }
        Structure::PartialProductsInverse => {
            for m in 0..n {
                circ.unitary(conj_gate(stage, js[m], hs[m], 1));
            }
            hs = compile_structure(circ, structure, rest, &hs, mode, &pfx)?;
            for m in 0..n {
                circ.unitary(conj_gate(stage, js[m], hs[m], -1));
            }
            js = apply_cyclic(circ, cyclic, d, &js, mode, &pfx)?;
        }
        Structure::RightFanout => {
            // a^{j_i} h_i a^{j_n} h_n = a^{j_i + j_n} (a^{-j_n} h_i a^{j_n}) h_n
            for m in 0..n - 1 {
                circ.unitary(conj_gate(stage, js[m], hs[m], 1));
            }
            js = apply_cyclic(circ, cyclic, d, &js, mode, &pfx)?;
            for m in 0..n - 1 {
                circ.unitary(conj_gate(stage, js[m], hs[m], -1));
            }
            hs = compile_structure(circ, structure, rest, &hs, mode, &pfx)?;
        }
        Structure::Identity => unreachable!(),
    }
    let mut out = Vec::with_capacity(n);
    for m in 0..n {
        let s = circ.merge(vec![js[m], hs[m]]);
        circ.unitary(OperatorHandle::perm_fn("E^dag", &[(s, go)], |x| {
            vec![sp.merge(x[0] / hn, x[0] % hn)]
        }));
        out.push(s);
    }
    Ok(out)
}

/// Appends `U_A^G` for a monotone `A`.
pub fn compile_monotone(
    circ: &mut AdaptiveCircuit,
    a: &MonotoneMatrix,
    chain: &SolvableChain,
    sites: &[SiteId],
    mode: GadgetMode,
    prefix: &str,
) -> Result<Vec<SiteId>> {
    check_split(chain)?;
    if sites.len() != a.n() {
        return Err(Error::SupportOutOfRange(format!("{} sites for a {}x{} matrix", sites.len(), a.n(), a.n())));
    }
    let structure = a
        .structure()
        .ok_or_else(|| Error::UnsupportedMatrix(format!("{:?}", a.rows())))?;
    compile_structure(circ, structure, &chain.stages, sites, mode, prefix)
}

/// A standalone group-register circuit.
#[derive(Clone)]
pub struct GroupCircuit {
    pub circuit: AdaptiveCircuit,
    pub inputs: Vec<SiteId>,
    pub outputs: Vec<SiteId>,
    pub dim: usize,
}

/// `U_A^G` on qudits `q0..q{n-1}` of dimension `|G|`.
pub fn monotone_unitary(a: &MonotoneMatrix, chain: &SolvableChain, mode: GadgetMode) -> Result<GroupCircuit> {
    let g = &chain.stages.first().ok_or(Error::NotSolvable(1))?.group;
    let n = a.n();
    let inputs: Vec<SiteId> = (0..n as u32).map(SiteId).collect();
    let mut circuit = AdaptiveCircuit::new(n as u32);
    let outputs = compile_monotone(&mut circuit, a, chain, &inputs, mode, "M")?;
    Ok(GroupCircuit {
        circuit,
        inputs,
        outputs,
        dim: g.order(),
    })
}

/// Group multiplication gates built from `V`, `V†`, `CX^⇐` and `S`.
pub struct GroupGates<'a> {
    pub chain: &'a SolvableChain,
    pub mode: GadgetMode,
}

impl<'a> GroupGates<'a> {
    pub fn new(chain: &'a SolvableChain, mode: GadgetMode) -> Result<GroupGates<'a>> {
        check_split(chain)?;
        if chain.stages.is_empty() {
            return Err(Error::NotSolvable(1));
        }
        Ok(GroupGates { chain, mode })
    }

    pub fn group(&self) -> &FiniteGroup {
        &self.chain.stages[0].group
    }

    fn run(&self, circ: &mut AdaptiveCircuit, s: Structure, sites: &[SiteId], prefix: &str) -> Result<Vec<SiteId>> {
        compile_structure(circ, s, &self.chain.stages, sites, self.mode, prefix)
    }

    /// `V|y⟩ = |ŷ_1, …, ŷ_L⟩` with `ŷ_j = y_1 ⋯ y_j`.
    pub fn v(&self, circ: &mut AdaptiveCircuit, sites: &[SiteId], prefix: &str) -> Result<Vec<SiteId>> {
        self.run(circ, Structure::PartialProducts, sites, prefix)
    }

    pub fn v_dagger(&self, circ: &mut AdaptiveCircuit, sites: &[SiteId], prefix: &str) -> Result<Vec<SiteId>> {
        self.run(circ, Structure::PartialProductsInverse, sites, prefix)
    }

    /// `CX^⇐_{C_{L+1} → C^L}`: `g_i ← g_i g_{L+1}`; the control is the last site.
    pub fn cx_right_fanout(&self, circ: &mut AdaptiveCircuit, sites: &[SiteId], prefix: &str) -> Result<Vec<SiteId>> {
        self.run(circ, Structure::RightFanout, sites, prefix)
    }

    /// `(CX^⇐)† = S_{C_{L+1}} CX^⇐ S_{C_{L+1}}`: `g_i ← g_i g_{L+1}^{-1}`.
    pub fn cx_right_fanout_dagger(
        &self,
        circ: &mut AdaptiveCircuit,
        sites: &[SiteId],
        prefix: &str,
    ) -> Result<Vec<SiteId>> {
        let g = self.group();
        circ.unitary(inversion_gates(g, &sites[sites.len() - 1..]).remove(0));
        let out = self.cx_right_fanout(circ, sites, prefix)?;
        circ.unitary(inversion_gates(g, &out[out.len() - 1..]).remove(0));
        Ok(out)
    }

    /// `CX^⇒_{C_{L+1} → C^L} = S^{⊗(L+1)} CX^⇐ S^{⊗(L+1)}`: `g_i ← g_{L+1} g_i`.
    pub fn cx_left_fanout(&self, circ: &mut AdaptiveCircuit, sites: &[SiteId], prefix: &str) -> Result<Vec<SiteId>> {
        let g = self.group();
        for op in inversion_gates(g, sites) {
            circ.unitary(op);
        }
        let out = self.cx_right_fanout(circ, sites, prefix)?;
        for op in inversion_gates(g, &out) {
            circ.unitary(op);
        }
        Ok(out)
    }

    /// `g_i ← g_{L+1}^{-1} g_i`: inversions on the targets around `CX^⇐`.
    pub fn cx_left_fanout_dagger(
        &self,
        circ: &mut AdaptiveCircuit,
        sites: &[SiteId],
        prefix: &str,
    ) -> Result<Vec<SiteId>> {
        let g = self.group();
        let t = sites.len() - 1;
        for op in inversion_gates(g, &sites[..t]) {
            circ.unitary(op);
        }
        let out = self.cx_right_fanout(circ, sites, prefix)?;
        for op in inversion_gates(g, &out[..t]) {
            circ.unitary(op);
        }
        Ok(out)
    }

    /// `CX^⇒_{C^L → C_{L+1}} = V† CX^⇒_{C_L → C_{L+1}} V`: `g_{L+1} ← (g_1 ⋯ g_L) g_{L+1}`.
    pub fn cx_product_into(&self, circ: &mut AdaptiveCircuit, sites: &[SiteId], prefix: &str) -> Result<Vec<SiteId>> {
        self.product_into(circ, sites, prefix, false)
    }

    /// Adjoint of [`GroupGates::cx_product_into`]: `g_{L+1} ← (g_1 ⋯ g_L)^{-1} g_{L+1}`.
    pub fn cx_product_into_dagger(
        &self,
        circ: &mut AdaptiveCircuit,
        sites: &[SiteId],
        prefix: &str,
    ) -> Result<Vec<SiteId>> {
        self.product_into(circ, sites, prefix, true)
    }

    fn product_into(&self, circ: &mut AdaptiveCircuit, sites: &[SiteId], prefix: &str, inverse: bool) -> Result<Vec<SiteId>> {
        let g = self.group().clone();
        let (t, c) = sites.split_last().expect("target site");
        let mut y = self.v(circ, c, &format!("{prefix}/v"))?;
        let last = *y.last().expect("at least one control");
        let n = g.order();
        let name = if inverse { "CX=>^dag" } else { "CX=>" };
        circ.unitary(OperatorHandle::perm_fn(name, &[(last, n), (*t, n)], |x| {
            let c = if inverse { g.inv(x[0]) } else { x[0] };
            vec![x[0], g.mul(c, x[1])]
        }));
        y = self.v_dagger(circ, &y, &format!("{prefix}/vd"))?;
        y.push(*t);
        Ok(y)
    }
}
