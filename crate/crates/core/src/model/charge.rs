//! Topological charge projectors on closed ribbons.

use rand::Rng;

use crate::error::{Error, Result};
use crate::lattice::Ribbon;
use crate::rep::{AnyonLabel, AnyonModel};
use crate::sim::{OperatorHandle, SiteId, StateVector, C64};

use super::ribbon::{ribbon_op, ribbon_support};
use super::QuantumDouble;

/// `K_σ^{(C,π)} = (d_π/|E(C)|) Σ_{d ∈ E(C)} χ̄_π(d) Σ_j F_σ^{p_j d p_j^{-1}, p_j r_C p_j^{-1}}` for every label.
#[derive(Debug, Clone)]
pub struct ChargeFamily {
    pub labels: Vec<AnyonLabel>,
    pub terms: Vec<Vec<(C64, OperatorHandle)>>,
    pub support: Vec<(SiteId, usize)>,
}

/// `K_σ^{(D,C)} = Σ_j Σ_{d ∈ D} F_σ^{p_j d p_j^{-1}, p_j r_C p_j^{-1}}` for a set `D ⊆ E(C)`.
pub fn class_sum_terms(
    qd: &QuantumDouble,
    model: &AnyonModel,
    class: usize,
    dset: &[usize],
    sigma: &Ribbon,
) -> Result<Vec<(C64, OperatorHandle)>> {
    let g = &qd.group;
    let c = &model.classes.classes[class];
    let mut out = Vec::new();
    for (j, &p) in c.transversal.iter().enumerate() {
        for &d in dset {
            out.push((C64::new(1.0, 0.0), ribbon_op(qd, sigma, g.conj(p, d), c.elements[j])?));
        }
    }
    Ok(out)
}

impl ChargeFamily {
    pub fn new(qd: &QuantumDouble, model: &AnyonModel, sigma: &Ribbon) -> Result<ChargeFamily> {
        if !sigma.closed {
            return Err(Error::NotClosed);
        }
        for (ci, c) in model.classes.classes.iter().enumerate() {
            let total: usize = model.centralizer_irreps[ci].iter().map(|p| p.dim * p.dim).sum();
            if total != c.centralizer.len() {
                return Err(Error::IncompleteLabels);
            }
        }
        let g = &qd.group;
        let labels = model.labels();
        let mut terms = Vec::new();
        for &a in &labels {
            let c = model.class(a);
            let pi = model.irrep(a);
            let scale = pi.dim as f64 / c.centralizer.len() as f64;
            let mut t = Vec::new();
            for &d in &c.centralizer {
                let chi = pi.character(d)?.conj() * scale;
                for (j, &p) in c.transversal.iter().enumerate() {
                    t.push((chi, ribbon_op(qd, sigma, g.conj(p, d), c.elements[j])?));
                }
            }
            terms.push(t);
        }
        Ok(ChargeFamily {
            labels,
            terms,
            support: ribbon_support(qd, sigma),
        })
    }

    pub fn position(&self, a: AnyonLabel) -> Option<usize> {
        self.labels.iter().position(|&l| l == a)
    }

    /// `K^{(C,π)} ψ`, unnormalized.
    pub fn apply(&self, k: usize, psi: &StateVector) -> Result<StateVector> {
        psi.combination(&self.terms[k])
    }

    /// Born probabilities `⟨ψ|K_a|ψ⟩ / ⟨ψ|ψ⟩` and the unnormalized images `K_a ψ`.
    pub fn distribution(&self, psi: &StateVector) -> Result<(Vec<f64>, Vec<StateVector>)> {
        let n = psi.norm_sqr();
        let mut probs = Vec::new();
        let mut images = Vec::new();
        for k in 0..self.labels.len() {
            let t = self.apply(k, psi)?;
            probs.push(t.norm_sqr() / n);
            images.push(t);
        }
        Ok((probs, images))
    }

    /// Samples a label by the Born rule; returns `(label, posterior, probability)`.
    pub fn measure_direct(&self, psi: &StateVector, rng: &mut impl Rng) -> Result<(AnyonLabel, StateVector, f64)> {
        let (probs, images) = self.distribution(psi)?;
        let u: f64 = rng.gen();
        let mut acc = 0.0;
        let mut pick = probs.iter().rposition(|&p| p > 1e-15).unwrap_or(0);
        for (k, &p) in probs.iter().enumerate() {
            acc += p;
            if u < acc && p > 1e-15 {
                pick = k;
                break;
            }
        }
        let mut post = images[pick].clone();
        post.normalize();
        Ok((self.labels[pick], post, probs[pick]))
    }

    /// Largest violation of `K_a K_b = δ_{ab} K_a` and `Σ_a K_a = I` on the given states.
    pub fn projector_violation(&self, states: &[StateVector]) -> Result<f64> {
        let mut worst: f64 = 0.0;
        let diff = |a: &StateVector, b: &StateVector| -> f64 {
            a.amplitudes()
                .iter()
                .zip(b.amplitudes())
                .map(|(x, y)| (x - y).norm_sqr())
                .sum::<f64>()
                .sqrt()
        };
        for psi in states {
            let scale = psi.norm_sqr().sqrt();
            let images: Vec<StateVector> = (0..self.labels.len())
                .map(|k| self.apply(k, psi))
                .collect::<Result<_>>()?;
            let mut sum = psi.zeroed();
            for im in &images {
                sum.add_scaled(C64::new(1.0, 0.0), im);
            }
            worst = worst.max(diff(&sum, psi) / scale);
            for a in 0..self.labels.len() {
                for (b, imb) in images.iter().enumerate() {
                    let ab = self.apply(a, imb)?;
                    let d = if a == b {
                        diff(&ab, imb)
                    } else {
                        ab.norm_sqr().sqrt()
                    };
                    worst = worst.max(d / scale);
                }
            }
        }
        Ok(worst)
    }
}
