//! Overlap identities behind the depth lower bound, and the search for unitary
//! combinations of anyonic ribbon operators.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use crate::error::Result;
use crate::lattice::{standard_open_ribbon, Ribbon};
use crate::rep::{max_abs, AnyonLabel, AnyonModel, CMatrix};
use crate::sim::{OperatorHandle, StateVector, C64};

use super::ribbon::{anyonic_terms, apply_anyonic, LocalIndices};
use super::QuantumDouble;

#[derive(Debug, Clone)]
pub struct KoReport {
    pub k: usize,
    pub norm_o: f64,
    pub norm_ko: f64,
    pub overlap: C64,
    /// `Γ_π(k^{-1})_{1,1}`.
    pub predicted: C64,
    /// Whether some `r ∈ E(C)` has `|Γ_π(r)_{1,1}| < 1`.
    pub k_property: bool,
}

impl KoReport {
    pub fn deviation(&self) -> f64 {
        (self.overlap - self.predicted)
            .norm()
            .max((self.norm_o - 1.0).abs())
            .max((self.norm_ko - 1.0).abs())
    }
}

/// `⟨O_ξΨ, A^k_{s_1} O_ξΨ⟩` with `O_ξ = √(|E(C)||G|/d_π) F_ξ^{(C,π)}` on the ground state.
pub fn kolemma_check(
    qd: &QuantumDouble,
    model: &AnyonModel,
    label: AnyonLabel,
    ribbon: &Ribbon,
    psi: &StateVector,
    k: usize,
) -> Result<KoReport> {
    let class = model.class(label);
    let pi = model.irrep(label);
    let scale = (class.centralizer.len() as f64 * qd.d() as f64 / pi.dim as f64).sqrt();
    let mut o = apply_anyonic(qd, model, psi, label, LocalIndices::ORIGIN, ribbon)?;
    o.scale(C64::new(scale, 0.0));
    let mut ko = o.clone();
    ko.apply(&qd.vertex_op(ribbon.s1.vertex, k)?)?;
    let k_property = class.centralizer.iter().any(|&r| pi.gamma(r)[(0, 0)].norm() < 1.0 - 1e-12);
    Ok(KoReport {
        k,
        norm_o: o.norm_sqr().sqrt(),
        norm_ko: ko.norm_sqr().sqrt(),
        overlap: o.inner(&ko)?,
        predicted: pi.gamma(qd.group.inv(k))[(0, 0)],
        k_property,
    })
}

#[derive(Debug, Clone)]
pub struct CombinationReport {
    /// Best `Σ_k (|Σ_{j,j'} m_{j,j'} Γ_π^{-1}(k)_{j,j'}| - |E(C)|/d_π)²` found.
    pub residual: f64,
    pub coefficients: CMatrix,
    pub restarts: usize,
    /// `‖F†F - I‖_max` of the induced operator on a one-plaquette ribbon, when
    /// the residual is below `1e-8`.
    pub simulator_defect: Option<f64>,
}

fn objective(gammas: &[CMatrix], target: f64, m: &CMatrix) -> f64 {
    gammas
        .iter()
        .map(|g| (m.component_mul(g).sum().norm() - target).powi(2))
        .sum()
}

/// Levenberg–Marquardt from a starting point, in real coordinates.
fn refine(gammas: &[CMatrix], target: f64, mut m: CMatrix, iters: usize) -> (CMatrix, f64) {
    let d = m.nrows();
    let np = 2 * d * d;
    let mut lambda = 1e-3;
    let mut f = objective(gammas, target, &m);
    for _ in 0..iters {
        let mut jac = DMatrix::<f64>::zeros(gammas.len(), np);
        let mut res = DVector::<f64>::zeros(gammas.len());
        for (r, g) in gammas.iter().enumerate() {
            let z = m.component_mul(g).sum();
            let a = z.norm().max(1e-300);
            res[r] = a - target;
            for (q, gv) in g.iter().enumerate() {
                // d|z|/d Re m = Re(z̄ g)/|z|, d|z|/d Im m = Re(z̄ i g)/|z|
                let w = z.conj() * gv / a;
                jac[(r, 2 * q)] = w.re;
                jac[(r, 2 * q + 1)] = -w.im;
            }
        }
        let jt = jac.transpose();
        let jtj = &jt * &jac;
        let grad = &jt * &res;
        let mut improved = false;
        for _ in 0..10 {
            let a = &jtj + DMatrix::<f64>::identity(np, np) * lambda;
            let Some(step) = a.lu().solve(&(-&grad)) else { break };
            let mut trial = m.clone();
            for (q, t) in trial.iter_mut().enumerate() {
                *t += C64::new(step[2 * q], step[2 * q + 1]);
            }
            let ft = objective(gammas, target, &trial);
            if ft < f {
                m = trial;
                f = ft;
                lambda = (lambda * 0.3).max(1e-12);
                improved = true;
                break;
            }
            lambda *= 10.0;
        }
        if !improved || f < 1e-28 {
            break;
        }
    }
    (m, f)
}

/// Searches for `m` making `Σ_{j,j'} m_{j,j'} F_ξ^{(C,π);((1,j),(1,j'))}` unitary.
pub fn unitary_combination_search(
    qd: &QuantumDouble,
    model: &AnyonModel,
    label: AnyonLabel,
    restarts: usize,
    seed: u64,
) -> Result<CombinationReport> {
    let class = model.class(label);
    let pi = model.irrep(label);
    let target = class.centralizer.len() as f64 / pi.dim as f64;
    let gammas: Vec<CMatrix> = class.centralizer.iter().map(|&k| pi.gamma_inv(k)).collect();
    let d = pi.dim;
    let (best, residual, used) = if d == 1 {
        let m = CMatrix::from_element(1, 1, C64::new(target, 0.0));
        let r = objective(&gammas, target, &m);
        (m, r, 0)
    } else {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let mut best = (CMatrix::zeros(d, d), f64::INFINITY);
        for _ in 0..restarts {
            let start = CMatrix::from_fn(d, d, |_, _| {
                C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)) * target
            });
            let (m, f) = refine(&gammas, target, start, 200);
            if f < best.1 {
                best = (m, f);
            }
        }
        (best.0, best.1, restarts)
    };
    let simulator_defect = if residual < 1e-8 {
        Some(combination_defect(qd, model, label, &best)?)
    } else {
        None
    };
    Ok(CombinationReport {
        residual,
        coefficients: best,
        restarts: used,
        simulator_defect,
    })
}

/// Dense matrix of `Σ c_t O_t` on the joint support of the terms.
pub fn combination_matrix(terms: &[(C64, OperatorHandle)]) -> CMatrix {
    let n = terms[0].1.joint_dim();
    let mut out = CMatrix::zeros(n, n);
    for (c, op) in terms {
        out += op.to_matrix() * *c;
    }
    out
}

/// `‖F†F - I‖_max` for `F = Σ m_{j,j'} F^{(C,π);((1,j),(1,j'))}` on the one-plaquette ribbon.
pub fn combination_defect(qd: &QuantumDouble, model: &AnyonModel, label: AnyonLabel, m: &CMatrix) -> Result<f64> {
    let ribbon = standard_open_ribbon(&qd.lattice, 0, 0, 1)?;
    let mut terms = Vec::new();
    for j in 0..m.nrows() {
        for jp in 0..m.ncols() {
            let idx = LocalIndices { i: 0, j, ip: 0, jp };
            for (c, op) in anyonic_terms(qd, model, label, idx, &ribbon)? {
                terms.push((c * m[(j, jp)], op));
            }
        }
    }
    let f = combination_matrix(&terms);
    let n = f.nrows();
    Ok(max_abs(&(f.adjoint() * &f - CMatrix::identity(n, n))))
}
