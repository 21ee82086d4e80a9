//! `CCU_{A C^L → B^L} = V† CW† CX^⇒_{A → B^L} CW V`.

use crate::error::Result;
use crate::group::FiniteGroup;
use crate::sim::{AdaptiveCircuit, OperatorHandle, SiteId};

use super::monotone::GroupGates;

/// Qudits of a controlled `CU^h` after compilation (site ids change under teleportation).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CcuSites {
    pub a: SiteId,
    pub c: Vec<SiteId>,
    pub b: Vec<SiteId>,
}

/// `CW_{C^L → B^L} = ∏_j CX^⇐_{C_j → B_{j+1}}` (or its adjoint), one layer of
/// disjoint two-qudit gates.
pub fn cw_layer(g: &FiniteGroup, c: &[SiteId], b: &[SiteId], adjoint: bool) -> Vec<OperatorHandle> {
    let n = g.order();
    (0..c.len().saturating_sub(1))
        .map(|j| {
            OperatorHandle::perm_fn(if adjoint { "CW^dag" } else { "CW" }, &[(c[j], n), (b[j + 1], n)], |x| {
                let y = if adjoint { g.inv(x[0]) } else { x[0] };
                vec![x[0], g.mul(y, x[1])]
            })
        })
        .collect()
}

/// Appends `CCU`: `|h⟩|y⟩|x⟩ ↦ |h⟩|y⟩|h x_1, ŷ_1^{-1} h ŷ_1 x_2, …, ŷ_{L-1}^{-1} h ŷ_{L-1} x_L⟩`.
pub fn append_ccu(
    circ: &mut AdaptiveCircuit,
    gates: &GroupGates,
    sites: &CcuSites,
    prefix: &str,
) -> Result<CcuSites> {
    let anchors: Vec<usize> = (0..sites.b.len()).collect();
    append_ccu_anchored(circ, gates, sites, &anchors, prefix)
}

/// `CCU` with arbitrary anchors: `x_k ← ŷ_{a_k}^{-1} h ŷ_{a_k} x_k`, `ŷ_0 = e`.
/// Targets sharing an anchor take one conjugation gate each.
pub fn append_ccu_anchored(
    circ: &mut AdaptiveCircuit,
    gates: &GroupGates,
    sites: &CcuSites,
    anchors: &[usize],
    prefix: &str,
) -> Result<CcuSites> {
    let g = gates.group().clone();
    let n = g.order();
    if sites.b.is_empty() {
        return Ok(sites.clone());
    }
    let c = if sites.c.is_empty() {
        Vec::new()
    } else {
        gates.v(circ, &sites.c, &format!("{prefix}/V"))?
    };
    let conj_layer = |circ: &mut AdaptiveCircuit, b: &[SiteId], adjoint: bool| {
        for (k, &a) in anchors.iter().enumerate() {
            if a == 0 {
                continue;
            }
            circ.unitary(OperatorHandle::perm_fn(if adjoint { "CW^dag" } else { "CW" }, &[(c[a - 1], n), (b[k], n)], |x| {
                let y = if adjoint { g.inv(x[0]) } else { x[0] };
                vec![x[0], g.mul(y, x[1])]
            }));
        }
    };
    conj_layer(circ, &sites.b, false);
    let mut fan: Vec<SiteId> = sites.b.clone();
    fan.push(sites.a);
    let mut fan = gates.cx_left_fanout(circ, &fan, &format!("{prefix}/X"))?;
    let a = fan.pop().expect("control");
    conj_layer(circ, &fan, true);
    let c = if c.is_empty() {
        c
    } else {
        gates.v_dagger(circ, &c, &format!("{prefix}/Vd"))?
    };
    Ok(CcuSites { a, c, b: fan })
}

/// `CCU` as a standalone circuit: `A = q0`, `C^L = q1..qL`, `B^L = q{L+1}..q{2L}`.
pub fn ccu_circuit(gates: &GroupGates, l: usize) -> Result<(AdaptiveCircuit, CcuSites, CcuSites)> {
    let ins = CcuSites {
        a: SiteId(0),
        c: (1..=l as u32).map(SiteId).collect(),
        b: (l as u32 + 1..=2 * l as u32).map(SiteId).collect(),
    };
    let mut circ = AdaptiveCircuit::new(2 * l as u32 + 1);
    let outs = append_ccu(&mut circ, gates, &ins, "CCU")?;
    Ok((circ, ins, outs))
}

/// The defining map of `CCU` on basis values.
pub fn ccu_target(g: &FiniteGroup, h: usize, y: &[usize], x: &[usize]) -> Vec<usize> {
    let mut yh = g.identity();
    let mut out = Vec::with_capacity(x.len());
    for (k, &xk) in x.iter().enumerate() {
        out.push(g.mul(g.conj(g.inv(yh), h), xk));
        if k < y.len() {
            yh = g.mul(yh, y[k]);
        }
    }
    out
}
