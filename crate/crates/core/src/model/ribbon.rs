//! Basic and anyonic ribbon operators.

use crate::error::{Error, Result};
use crate::lattice::Ribbon;
use crate::rep::{AnyonLabel, AnyonModel};
use crate::sim::{OperatorHandle, SiteId, StateVector, C64, ONE, ZERO};

use super::QuantumDouble;

/// Group value of an edge as the ribbon reads it.
pub fn read(qd: &QuantumDouble, x: usize, inverted: bool) -> usize {
    if inverted {
        qd.group.inv(x)
    } else {
        x
    }
}

fn check_ribbon(qd: &QuantumDouble, r: &Ribbon) -> Result<()> {
    r.validate(&qd.lattice)
        .map_err(|e| Error::UnsupportedRibbon(e.to_string()))
}

/// Support of a ribbon operator: y edges, then x edges.
pub fn ribbon_support(qd: &QuantumDouble, r: &Ribbon) -> Vec<(SiteId, usize)> {
    r.support().into_iter().map(|e| qd.edge_site(e)).collect()
}

/// Partial products `ŷ_0 = e, ŷ_k = y_1 ⋯ y_k` from the y digits.
fn prefix_products(qd: &QuantumDouble, r: &Ribbon, digits: &[usize]) -> Vec<usize> {
    let g = &qd.group;
    let mut yh = vec![g.identity()];
    for (k, y) in r.y.iter().enumerate() {
        let v = read(qd, digits[k], y.inverted);
        yh.push(g.mul(yh[k], v));
    }
    yh
}

/// `CU^h`: left-multiplies the reading of each x edge by `ŷ_a^{-1} h ŷ_a`.
fn transform_x(qd: &QuantumDouble, r: &Ribbon, h: usize, digits: &[usize], yh: &[usize]) -> Vec<usize> {
    let g = &qd.group;
    let ly = r.y.len();
    let mut out = digits.to_vec();
    for (k, x) in r.x.iter().enumerate() {
        let c = g.mul(g.mul(g.inv(yh[x.anchor]), h), yh[x.anchor]);
        let v = g.mul(c, read(qd, digits[ly + k], x.inverted));
        out[ly + k] = read(qd, v, x.inverted);
    }
    out
}

/// `F^{h,g}_ξ`.
pub fn ribbon_op(qd: &QuantumDouble, r: &Ribbon, h: usize, g: usize) -> Result<OperatorHandle> {
    check_ribbon(qd, r)?;
    if h >= qd.d() || g >= qd.d() {
        return Err(Error::ElementNotInGroup(h.max(g)));
    }
    let ly = r.y.len();
    let name = format!("F^{{{},{}}}", qd.group.label(h), qd.group.label(g));
    Ok(OperatorHandle::partial_perm_fn(&name, &ribbon_support(qd, r), |d| {
        let yh = prefix_products(qd, r, d);
        if yh[ly] != g {
            return None;
        }
        Some(transform_x(qd, r, h, d, &yh))
    }))
}

/// The factors `P^g` (diagonal on the y edges) and `CU^h` (permutation) with
/// `F^{h,g} = P^g CU^h`.
pub fn ribbon_factors(
    qd: &QuantumDouble,
    r: &Ribbon,
    h: usize,
    g: usize,
) -> Result<(OperatorHandle, OperatorHandle)> {
    check_ribbon(qd, r)?;
    let sup = ribbon_support(qd, r);
    let ly = r.y.len();
    let p = OperatorHandle::diag_fn("P^g", &sup[..ly], |d| {
        if prefix_products(qd, r, d)[ly] == g {
            ONE
        } else {
            ZERO
        }
    });
    let cu = OperatorHandle::perm_fn("CU^h", &sup, |d| {
        let yh = prefix_products(qd, r, d);
        transform_x(qd, r, h, d, &yh)
    });
    Ok((p, cu))
}

/// Local degrees of freedom `((i, j), (i', j'))`, zero-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LocalIndices {
    pub i: usize,
    pub j: usize,
    pub ip: usize,
    pub jp: usize,
}

impl LocalIndices {
    pub const ORIGIN: LocalIndices = LocalIndices { i: 0, j: 0, ip: 0, jp: 0 };
}

/// Terms of `F^{(C,π);((i,j),(i',j'))} = (d_π/|E(C)|) Σ_k Γ_π^{-1}(k)_{j,j'} F^{c_i^{-1}, p_i k p_{i'}^{-1}}`.
pub fn anyonic_terms(
    qd: &QuantumDouble,
    model: &AnyonModel,
    label: AnyonLabel,
    idx: LocalIndices,
    r: &Ribbon,
) -> Result<Vec<(C64, OperatorHandle)>> {
    let g = &qd.group;
    let class = model.class(label);
    let pi = model.irrep(label);
    if idx.i >= class.size() || idx.ip >= class.size() || idx.j >= pi.dim || idx.jp >= pi.dim {
        return Err(Error::InvalidRibbonSpec(format!("local indices {idx:?} out of range")));
    }
    let scale = pi.dim as f64 / class.centralizer.len() as f64;
    let h = g.inv(class.elements[idx.i]);
    let mut out = Vec::new();
    for &k in &class.centralizer {
        let c = pi.gamma_inv(k)[(idx.j, idx.jp)] * scale;
        if c.norm() < 1e-15 {
            continue;
        }
        let gg = g.mul(g.mul(class.transversal[idx.i], k), g.inv(class.transversal[idx.ip]));
        out.push((c, ribbon_op(qd, r, h, gg)?));
    }
    Ok(out)
}

/// `F^{(C,π);(u,v)} ψ`, unnormalized.
pub fn apply_anyonic(
    qd: &QuantumDouble,
    model: &AnyonModel,
    psi: &StateVector,
    label: AnyonLabel,
    idx: LocalIndices,
    r: &Ribbon,
) -> Result<StateVector> {
    psi.combination(&anyonic_terms(qd, model, label, idx, r)?)
}

/// `F^{(C,π)}_ξ ψ` normalized, with the squared norm of the image relative to `‖ψ‖²`.
pub fn fxicpi(
    qd: &QuantumDouble,
    model: &AnyonModel,
    psi: &StateVector,
    label: AnyonLabel,
    r: &Ribbon,
) -> Result<(StateVector, f64)> {
    let mut out = apply_anyonic(qd, model, psi, label, LocalIndices::ORIGIN, r)?;
    let n2 = out.norm_sqr() / psi.norm_sqr();
    if n2 < 1e-18 {
        return Err(Error::ZeroImage(n2));
    }
    out.normalize();
    Ok((out, n2))
}

/// Terms of `a^{x,y}_{s_0} = (d_π/|E(C)|) Σ_{k ∈ E(C)} Γ_π^{-1}(k)_{x,y} A^k_{s_0}`.
pub fn label_change_terms(
    qd: &QuantumDouble,
    model: &AnyonModel,
    label: AnyonLabel,
    x: usize,
    y: usize,
    vertex: usize,
) -> Result<Vec<(C64, OperatorHandle)>> {
    let class = model.class(label);
    let pi = model.irrep(label);
    if x >= pi.dim || y >= pi.dim {
        return Err(Error::InvalidRibbonSpec(format!("irrep indices ({x}, {y}) out of range")));
    }
    let scale = pi.dim as f64 / class.centralizer.len() as f64;
    class
        .centralizer
        .iter()
        .map(|&k| Ok((pi.gamma_inv(k)[(x, y)] * scale, qd.vertex_op(vertex, k)?)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::FiniteGroup;
    use crate::lattice::{square_lattice, standard_open_ribbon};

    #[test]
    fn two_step_conjugation() {
        let g = FiniteGroup::symmetric(3).unwrap();
        let qd = QuantumDouble::new(g.clone(), square_lattice(1, 2).unwrap());
        let r = standard_open_ribbon(&qd.lattice, 0, 0, 2).unwrap();
        let t = g.find("(1 2)").unwrap();
        let c = g.find("(1 2 3)").unwrap();
        // readings y = ((1 2 3), e), x = (e, e); y and x are stored inverted
        let digits = [g.inv(c), 0, 0, 0];
        let f = ribbon_op(&qd, &r, t, c).unwrap();
        let crate::sim::Body::Permutation(map) = &f.body else { panic!() };
        let idx = crate::sim::encode(&digits, &[6; 4]);
        let mut out = [0; 4];
        crate::sim::decode(map[idx] as usize, &[6; 4], &mut out);
        let x1 = g.inv(out[2]);
        let x2 = g.inv(out[3]);
        assert_eq!(x1, t);
        assert_eq!(x2, g.find("(1 3)").unwrap());
    }
}
