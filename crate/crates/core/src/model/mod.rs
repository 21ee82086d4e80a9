//! The quantum double model: site operators, ground states and Hamiltonian checks.
//!
//! The edge register places edge `e` at `SiteId(e)`, edge 0 most significant,
//! each with dimension `|G|`. An edge value `x` on an edge from `u` to `w` reads
//! `θ(w) θ(u)^{-1}` for an exact form `dθ`.

pub mod charge;
pub mod nogo;
pub mod ribbon;

use std::collections::HashSet;

use crate::error::{Error, Result};
use crate::group::FiniteGroup;
use crate::lattice::{spanning_tree, Face, PlanarLattice, Site, WalkStep};
use crate::sim::{amp_cap, encode, OperatorHandle, SiteId, StateVector, C64, ONE, ZERO};

/// Vertex labeling by group elements.
pub type ZeroForm = Vec<usize>;
/// Edge labeling by group elements.
pub type OneForm = Vec<usize>;

/// Largest number of zero-forms enumerated by the ground-state oracle.
pub const ORACLE_MAX_ENUM: u128 = 1 << 24;

#[derive(Debug, Clone)]
pub struct QuantumDouble {
    pub group: FiniteGroup,
    pub lattice: PlanarLattice,
}

impl QuantumDouble {
    pub fn new(group: FiniteGroup, lattice: PlanarLattice) -> QuantumDouble {
        QuantumDouble { group, lattice }
    }

    pub fn d(&self) -> usize {
        self.group.order()
    }

    pub fn edge_site(&self, e: usize) -> (SiteId, usize) {
        (SiteId(e as u32), self.d())
    }

    pub fn register(&self) -> Vec<(SiteId, usize)> {
        (0..self.lattice.num_edges()).map(|e| self.edge_site(e)).collect()
    }

    /// Number of amplitudes of the edge register.
    pub fn register_len(&self) -> u128 {
        (self.d() as u128).pow(self.lattice.num_edges() as u32)
    }

    fn check_register(&self) -> Result<()> {
        let n = self.register_len();
        if n > amp_cap() as u128 {
            return Err(Error::TooLarge(n, amp_cap()));
        }
        Ok(())
    }

    pub fn basis_state(&self, config: &[usize]) -> Result<StateVector> {
        self.check_register()?;
        StateVector::basis(self.register(), config)
    }

    /// Index of a configuration in the edge register.
    pub fn index_of(&self, config: &[usize]) -> usize {
        encode(config, &vec![self.d(); config.len()])
    }

    /// `A^a_v`: `x ↦ a x` on edges with head `v`, `x ↦ x a^{-1}` on edges with tail `v`.
    pub fn vertex_op(&self, v: usize, a: usize) -> Result<OperatorHandle> {
        if v >= self.lattice.num_vertices() {
            return Err(Error::InvalidSite(format!("vertex {v} out of range")));
        }
        if a >= self.d() {
            return Err(Error::ElementNotInGroup(a));
        }
        let inc = self.lattice.incident(v);
        let heads: Vec<bool> = inc.iter().map(|&e| self.lattice.edges[e].head == v).collect();
        let support: Vec<(SiteId, usize)> = inc.iter().map(|&e| self.edge_site(e)).collect();
        let g = &self.group;
        let ai = g.inv(a);
        Ok(OperatorHandle::perm_fn(
            &format!("A^{}_v{v}", g.label(a)),
            &support,
            |x| {
                x.iter()
                    .zip(&heads)
                    .map(|(&x, &h)| if h { g.mul(a, x) } else { g.mul(x, ai) })
                    .collect()
            },
        ))
    }

    /// Counterclockwise holonomy of a walk, later steps on the left.
    pub fn holonomy(&self, walk: &[WalkStep], values: &[usize]) -> usize {
        let g = &self.group;
        walk.iter().zip(values).fold(g.identity(), |acc, (s, &x)| {
            let step = if s.forward { x } else { g.inv(x) };
            g.mul(step, acc)
        })
    }

    /// `B^h_s`: projector onto holonomy `h` around the site's plaquette, based at its vertex.
    pub fn plaquette_op(&self, s: Site, h: usize) -> Result<OperatorHandle> {
        self.lattice.check_site(s)?;
        let Face::Plaquette(p) = s.face else {
            return Err(Error::InvalidSite("B^h needs a bounded plaquette".into()));
        };
        if h >= self.d() {
            return Err(Error::ElementNotInGroup(h));
        }
        let walk = self.lattice.walk_from(p, s.vertex)?;
        let support: Vec<(SiteId, usize)> = walk.iter().map(|w| self.edge_site(w.edge)).collect();
        Ok(OperatorHandle::diag_fn(
            &format!("B^{}_p{p}v{}", self.group.label(h), s.vertex),
            &support,
            |x| if self.holonomy(&walk, x) == h { ONE } else { ZERO },
        ))
    }

    /// Terms of `A_v = (1/|G|) Σ_g A^g_v`.
    pub fn vertex_projector_terms(&self, v: usize) -> Result<Vec<(C64, OperatorHandle)>> {
        let c = C64::new(1.0 / self.d() as f64, 0.0);
        (0..self.d()).map(|a| Ok((c, self.vertex_op(v, a)?))).collect()
    }

    /// `B_p = B^e` at the plaquette's lower-left corner.
    pub fn plaquette_projector(&self, p: usize) -> Result<OperatorHandle> {
        let v = self.lattice.plaquettes[p].corners[0];
        self.plaquette_op(
            Site {
                vertex: v,
                face: Face::Plaquette(p),
            },
            self.group.identity(),
        )
    }

    /// `dθ(e) = θ(head) θ(tail)^{-1}`.
    pub fn exterior_derivative(&self, theta: &[usize]) -> OneForm {
        let g = &self.group;
        self.lattice
            .edges
            .iter()
            .map(|e| g.mul(theta[e.head], g.inv(theta[e.tail])))
            .collect()
    }

    pub fn is_flat(&self, omega: &[usize]) -> bool {
        self.lattice.plaquettes.iter().all(|pl| {
            let vals: Vec<usize> = pl.steps.iter().map(|s| omega[s.edge]).collect();
            self.holonomy(&pl.steps, &vals) == self.group.identity()
        })
    }

    /// Action of the gauge transformation `Π_v A^{θ(v)}_v` on a configuration.
    pub fn gauge_action(&self, theta: &[usize], omega: &[usize]) -> OneForm {
        let g = &self.group;
        self.lattice
            .edges
            .iter()
            .zip(omega)
            .map(|(e, &x)| g.mul(g.mul(theta[e.head], x), g.inv(theta[e.tail])))
            .collect()
    }

    /// Builds `θ` with `θ(root) = e` by parallel transport along a spanning tree and
    /// checks `dθ = ω`.
    pub fn exactness_witness(&self, omega: &[usize]) -> Result<ZeroForm> {
        let g = &self.group;
        let tree = spanning_tree(&self.lattice, 0)?;
        let mut theta = vec![g.identity(); self.lattice.num_vertices()];
        let mut order: Vec<usize> = (0..self.lattice.num_vertices()).collect();
        order.sort_by_key(|&v| tree.paths[v].len());
        for &v in order.iter().skip(1) {
            let &e = tree.paths[v].last().expect("non-root path");
            let edge = self.lattice.edges[e];
            theta[v] = if edge.head == v {
                g.mul(omega[e], theta[edge.tail])
            } else {
                g.mul(g.inv(omega[e]), theta[edge.head])
            };
        }
        if self.exterior_derivative(&theta) != omega {
            return Err(Error::NotExact("parallel transport does not reproduce the form".into()));
        }
        Ok(theta)
    }

    /// All exact one-forms, deduplicated.
    pub fn exact_forms(&self) -> Result<Vec<OneForm>> {
        let nv = self.lattice.num_vertices();
        let n = self.d();
        let count = (n as u128).pow(nv as u32 - 1);
        if count > ORACLE_MAX_ENUM {
            return Err(Error::TooLarge(count, ORACLE_MAX_ENUM as usize));
        }
        let mut seen = HashSet::new();
        let mut out = Vec::new();
        let mut theta = vec![0usize; nv];
        for idx in 0..count as usize {
            let mut r = idx;
            for t in theta.iter_mut().skip(1) {
                *t = r % n;
                r /= n;
            }
            let w = self.exterior_derivative(&theta);
            if seen.insert(w.clone()) {
                out.push(w);
            }
        }
        out.sort();
        Ok(out)
    }

    /// Uniform superposition of all exact one-forms.
    pub fn ground_state_oracle(&self) -> Result<StateVector> {
        self.check_register()?;
        let forms = self.exact_forms()?;
        let a = C64::new(1.0 / (forms.len() as f64).sqrt(), 0.0);
        let mut amps = vec![ZERO; self.register_len() as usize];
        for w in &forms {
            amps[self.index_of(w)] = a;
        }
        Ok(StateVector::from_parts(self.register(), amps))
    }

    /// Every configuration of the edge register, as it is enumerated by index.
    fn for_each_config(&self, mut f: impl FnMut(&[usize])) {
        let ne = self.lattice.num_edges();
        let n = self.d();
        let mut x = vec![0usize; ne];
        let total = self.register_len();
        for _ in 0..total {
            f(&x);
            let mut k = ne;
            while k > 0 {
                k -= 1;
                x[k] += 1;
                if x[k] < n {
                    break;
                }
                x[k] = 0;
            }
        }
    }

    /// Trace of `Π_v A_v Π_p B_p`. Since the vertex projectors commute, their
    /// product is the average of `A^θ` over zero-forms, so the trace equals
    /// `|G|^{-|V|} Σ_{x flat} #{θ : A^θ x = x}`. The stabilizing `θ` are found by
    /// fixing `θ(root)` and propagating along a spanning tree.
    pub fn ground_space_dimension(&self) -> Result<f64> {
        let n = self.register_len();
        if n > ORACLE_MAX_ENUM {
            return Err(Error::TooLarge(n, ORACLE_MAX_ENUM as usize));
        }
        let g = &self.group;
        let nv = self.lattice.num_vertices();
        let tree = spanning_tree(&self.lattice, 0)?;
        let mut order: Vec<usize> = (0..nv).collect();
        order.sort_by_key(|&v| tree.paths[v].len());
        let mut fixed: u128 = 0;
        let mut theta = vec![0usize; nv];
        self.for_each_config(|x| {
            if !self.is_flat(x) {
                return;
            }
            for t0 in 0..g.order() {
                theta[0] = t0;
                for &v in order.iter().skip(1) {
                    let &e = tree.paths[v].last().unwrap();
                    let edge = self.lattice.edges[e];
                    // x = θ(head) x θ(tail)^{-1}
                    theta[v] = if edge.head == v {
                        g.conj(x[e], theta[edge.tail])
                    } else {
                        g.conj(g.inv(x[e]), theta[edge.head])
                    };
                }
                if self.gauge_action(&theta, x) == x {
                    fixed += 1;
                }
            }
        });
        Ok(fixed as f64 / (g.order() as f64).powi(nv as i32))
    }

    /// Trace of the stabilizer projector by applying it to every basis state.
    /// Only for registers of at most `max_dim` amplitudes.
    pub fn ground_space_dimension_dense(&self, max_dim: usize) -> Result<f64> {
        let n = self.register_len();
        if n > max_dim as u128 {
            return Err(Error::TooLarge(n, max_dim));
        }
        let mut tr = 0.0;
        for i in 0..n as usize {
            let mut amps = vec![ZERO; n as usize];
            amps[i] = ONE;
            let s = StateVector::from_parts(self.register(), amps);
            let s = self.apply_stabilizer_projector(&s)?;
            tr += s.amplitudes()[i].re;
        }
        Ok(tr)
    }

    /// `Π_v A_v Π_p B_p |ψ⟩`.
    pub fn apply_stabilizer_projector(&self, psi: &StateVector) -> Result<StateVector> {
        let mut s = psi.clone();
        for p in 0..self.lattice.num_plaquettes() {
            s.apply_unchecked(&self.plaquette_projector(p)?)?;
        }
        for v in 0..self.lattice.num_vertices() {
            s = s.combination(&self.vertex_projector_terms(v)?)?;
        }
        Ok(s)
    }

    /// `⟨ψ|H|ψ⟩` with `H = -Σ_v A_v - Σ_p B_p`, for normalized `ψ`.
    pub fn energy(&self, psi: &StateVector) -> Result<f64> {
        let mut e = 0.0;
        for v in 0..self.lattice.num_vertices() {
            let t = psi.combination(&self.vertex_projector_terms(v)?)?;
            e -= psi.inner(&t)?.re;
        }
        for p in 0..self.lattice.num_plaquettes() {
            let mut t = psi.clone();
            t.apply_unchecked(&self.plaquette_projector(p)?)?;
            e -= psi.inner(&t)?.re;
        }
        Ok(e / psi.norm_sqr())
    }

    /// Largest `‖Oψ - ψ‖` over all `A^g_v` and `B_p`, for normalized `ψ`.
    pub fn stabilizer_violation(&self, psi: &StateVector) -> Result<f64> {
        let mut worst: f64 = 0.0;
        let mut check = |op: OperatorHandle| -> Result<()> {
            let mut t = psi.clone();
            t.apply_unchecked(&op)?;
            let d: f64 = t
                .amplitudes()
                .iter()
                .zip(psi.amplitudes())
                .map(|(a, b)| (a - b).norm_sqr())
                .sum::<f64>()
                .sqrt();
            worst = worst.max(d);
            Ok(())
        };
        for v in 0..self.lattice.num_vertices() {
            for a in 0..self.d() {
                check(self.vertex_op(v, a)?)?;
            }
        }
        for p in 0..self.lattice.num_plaquettes() {
            check(self.plaquette_projector(p)?)?;
        }
        Ok(worst)
    }
}

/// Normalized copy of `ψ`.
pub fn normalized(mut psi: StateVector) -> StateVector {
    psi.normalize();
    psi
}
