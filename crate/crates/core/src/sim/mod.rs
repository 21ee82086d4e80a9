//! Dense state vectors over mixed-dimension qudits.
//!
//! Site 0 is the most significant digit of the amplitude index.

mod circuit;
mod op;

use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;

pub use circuit::{
    AdaptiveCircuit, Branch, DepthReport, DiscardMode, Instruction, MeasureChoice, OutcomeRecord, Policy, RunResult,
    Runner, ShotGroup,
};
pub use op::{decode, encode, joint_dim, omega, Body, OperatorHandle, SiteId, ANNIHILATE, DENSE_MAX_DIM};

use crate::error::{Error, Result};

pub type C64 = Complex64;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);

/// Default amplitude cap.
pub const DEFAULT_AMP_CAP: usize = 1 << 26;

/// Amplitude cap, overridable with `QDOUBLE_AMP_CAP`.
pub fn amp_cap() -> usize {
    std::env::var("QDOUBLE_AMP_CAP")
        .ok()
        .and_then(|v| v.parse().ok())
        .unwrap_or(DEFAULT_AMP_CAP)
}

fn check_cap(len: u128) -> Result<()> {
    let cap = amp_cap();
    if len > cap as u128 {
        Err(Error::TooLarge(len, cap))
    } else {
        Ok(())
    }
}

/// Projective measurement in an orthonormal basis of the joint support, with
/// basis vectors grouped into outcome labels. `vectors = None` is the computational basis.
#[derive(Debug, Clone)]
pub struct MeasureSpec {
    pub vectors: Option<Arc<Vec<Vec<C64>>>>,
    pub labels: Arc<Vec<usize>>,
    pub num_labels: usize,
}

impl MeasureSpec {
    pub fn computational(dim: usize) -> MeasureSpec {
        MeasureSpec {
            vectors: None,
            labels: Arc::new((0..dim).collect()),
            num_labels: dim,
        }
    }

    /// Computational basis grouped by `label(index)`.
    pub fn grouped(dim: usize, label: impl Fn(usize) -> usize) -> MeasureSpec {
        let labels: Vec<usize> = (0..dim).map(label).collect();
        let num_labels = labels.iter().max().map(|m| m + 1).unwrap_or(0);
        MeasureSpec {
            vectors: None,
            labels: Arc::new(labels),
            num_labels,
        }
    }

    /// Arbitrary basis; checked for orthonormality to 1e-9.
    pub fn basis(vectors: Vec<Vec<C64>>, labels: Vec<usize>) -> Result<MeasureSpec> {
        let n = vectors.len();
        if labels.len() != n || vectors.iter().any(|v| v.len() != n) {
            return Err(Error::BasisNotOrthonormal(f64::INFINITY));
        }
        let mut dev: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                let ip: C64 = vectors[i].iter().zip(&vectors[j]).map(|(a, b)| a.conj() * b).sum();
                let want = if i == j { 1.0 } else { 0.0 };
                dev = dev.max((ip - C64::new(want, 0.0)).norm());
            }
        }
        if dev > 1e-9 {
            return Err(Error::BasisNotOrthonormal(dev));
        }
        let num_labels = labels.iter().max().map(|m| m + 1).unwrap_or(0);
        Ok(MeasureSpec {
            vectors: Some(Arc::new(vectors)),
            labels: Arc::new(labels),
            num_labels,
        })
    }

    /// Eigenbasis of the generalized Pauli `X`: outcome `m` is `Σ_j ω^{-mj}|j⟩/√d`
    /// with eigenvalue `ω^m`.
    pub fn x_basis(d: usize) -> MeasureSpec {
        let s = 1.0 / (d as f64).sqrt();
        let v = (0..d)
            .map(|m| (0..d).map(|j| omega(d, -((m * j) as i64)) * s).collect())
            .collect();
        MeasureSpec::basis(v, (0..d).collect()).expect("Fourier basis")
    }
}

#[derive(Debug, Clone)]
pub struct StateVector {
    sites: Vec<(SiteId, usize)>,
    amps: Vec<C64>,
}

/// Iterates over base offsets of all blocks: indices whose digits on `skip`
/// positions are zero, plus `offset`.
fn for_each_base(dims: &[usize], strides: &[usize], skip: &[usize], offset: usize, mut f: impl FnMut(usize)) {
    let free: Vec<usize> = (0..dims.len()).filter(|p| !skip.contains(p)).collect();
    let mut digits = vec![0usize; free.len()];
    let mut base = offset;
    loop {
        f(base);
        let mut k = free.len();
        loop {
            if k == 0 {
                return;
            }
            k -= 1;
            let p = free[k];
            digits[k] += 1;
            base += strides[p];
            if digits[k] < dims[p] {
                break;
            }
            base -= strides[p] * dims[p];
            digits[k] = 0;
        }
    }
}

impl StateVector {
    pub fn from_parts(sites: Vec<(SiteId, usize)>, amps: Vec<C64>) -> StateVector {
        debug_assert_eq!(joint_dim(&sites.iter().map(|s| s.1).collect::<Vec<_>>()), amps.len());
        StateVector { sites, amps }
    }

    /// Computational basis state.
    pub fn basis(sites: Vec<(SiteId, usize)>, digits: &[usize]) -> Result<StateVector> {
        let dims: Vec<usize> = sites.iter().map(|s| s.1).collect();
        let n: u128 = dims.iter().map(|&d| d as u128).product();
        check_cap(n)?;
        let mut amps = vec![ZERO; n as usize];
        amps[encode(digits, &dims)] = ONE;
        Ok(StateVector { sites, amps })
    }

    /// Product of local states.
    pub fn product(sites: Vec<(SiteId, usize)>, locals: &[Vec<C64>]) -> Result<StateVector> {
        let mut st = StateVector {
            sites: Vec::new(),
            amps: vec![ONE],
        };
        for (s, v) in sites.into_iter().zip(locals) {
            st.alloc(s.0, s.1, v)?;
        }
        Ok(st)
    }

    pub fn sites(&self) -> &[(SiteId, usize)] {
        &self.sites
    }

    pub fn site_ids(&self) -> Vec<SiteId> {
        self.sites.iter().map(|s| s.0).collect()
    }

    pub fn dims(&self) -> Vec<usize> {
        self.sites.iter().map(|s| s.1).collect()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn amplitudes_mut(&mut self) -> &mut [C64] {
        &mut self.amps
    }

    pub fn len(&self) -> usize {
        self.amps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amps.is_empty()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn normalize(&mut self) -> f64 {
        let n2 = self.norm_sqr();
        if n2 > 0.0 {
            let s = 1.0 / n2.sqrt();
            self.amps.iter_mut().for_each(|a| *a *= s);
        }
        n2
    }

    pub fn scale(&mut self, c: C64) {
        self.amps.iter_mut().for_each(|a| *a *= c);
    }

    /// `self += c · other` (same layout).
    pub fn add_scaled(&mut self, c: C64, other: &StateVector) {
        for (a, b) in self.amps.iter_mut().zip(&other.amps) {
            *a += c * b;
        }
    }

    pub fn zeroed(&self) -> StateVector {
        StateVector {
            sites: self.sites.clone(),
            amps: vec![ZERO; self.amps.len()],
        }
    }

    pub fn position(&self, id: SiteId) -> Result<usize> {
        self.sites
            .iter()
            .position(|s| s.0 == id)
            .ok_or_else(|| Error::SupportOutOfRange(format!("site {id} not in register")))
    }

    pub fn dim_of(&self, id: SiteId) -> Result<usize> {
        Ok(self.sites[self.position(id)?].1)
    }

    pub fn strides(&self) -> Vec<usize> {
        let mut s = vec![1; self.sites.len()];
        for k in (0..self.sites.len().saturating_sub(1)).rev() {
            s[k] = s[k + 1] * self.sites[k + 1].1;
        }
        s
    }

    /// `⟨self|other⟩`; layouts must agree.
    pub fn inner(&self, other: &StateVector) -> Result<C64> {
        if self.sites != other.sites {
            return Err(Error::SupportOutOfRange("layout mismatch in inner product".into()));
        }
        Ok(self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum())
    }

    /// `|⟨self|other⟩|² / (‖self‖² ‖other‖²)`.
    pub fn fidelity(&self, other: &StateVector) -> Result<f64> {
        let ip = self.inner(other)?;
        Ok(ip.norm_sqr() / (self.norm_sqr() * other.norm_sqr()))
    }

    fn offsets(&self, positions: &[usize], strides: &[usize]) -> Vec<usize> {
        let dims: Vec<usize> = positions.iter().map(|&p| self.sites[p].1).collect();
        let n = joint_dim(&dims);
        let mut digits = vec![0; dims.len()];
        (0..n)
            .map(|i| {
                decode(i, &dims, &mut digits);
                digits.iter().zip(positions).map(|(&x, &p)| x * strides[p]).sum()
            })
            .collect()
    }

    fn resolve(&self, op: &OperatorHandle) -> Result<Vec<usize>> {
        let pos = op
            .support
            .iter()
            .map(|&s| self.position(s))
            .collect::<Result<Vec<_>>>()?;
        for (p, d) in pos.iter().zip(&op.dims) {
            if self.sites[*p].1 != *d {
                return Err(Error::SupportOutOfRange(format!(
                    "operator {} expects dimension {d} on {}",
                    op.name, self.sites[*p].0
                )));
            }
        }
        Ok(pos)
    }

    /// Applies a unitary handle.
    pub fn apply(&mut self, op: &OperatorHandle) -> Result<()> {
        let defect = match &op.body {
            Body::Permutation(_) | Body::Dense(_) | Body::Controlled { .. } => op.unitarity_defect(),
            Body::Diagonal(_) => op.unitarity_defect(),
        };
        if defect > 1e-9 {
            return Err(Error::NonUnitary(defect));
        }
        self.apply_unchecked(op)
    }

    /// Applies any linear handle without unitarity checks or renormalization.
    pub fn apply_unchecked(&mut self, op: &OperatorHandle) -> Result<()> {
        self.resolve(op)?;
        let strides = self.strides();
        let mut fixed = Vec::new();
        self.apply_body(op, &strides, &mut fixed)
    }

    /// Applies a linear handle, renormalizes and returns the squared norm of the image.
    pub fn apply_general(&mut self, op: &OperatorHandle) -> Result<f64> {
        let before = self.norm_sqr();
        self.apply_unchecked(op)?;
        let n2 = self.norm_sqr() / before;
        if n2 < 1e-18 {
            return Err(Error::ZeroImage(n2));
        }
        self.normalize();
        Ok(n2)
    }

    /// `Σ_i c_i O_i |ψ⟩` without renormalization.
    pub fn combination(&self, terms: &[(C64, OperatorHandle)]) -> Result<StateVector> {
        let mut out = self.zeroed();
        for (c, op) in terms {
            if *c == ZERO {
                continue;
            }
            let mut t = self.clone();
            t.apply_unchecked(op)?;
            out.add_scaled(*c, &t);
        }
        Ok(out)
    }

    fn apply_body(&mut self, op: &OperatorHandle, strides: &[usize], fixed: &mut Vec<(usize, usize)>) -> Result<()> {
        let dims = self.dims();
        match &op.body {
            Body::Controlled {
                controls,
                control_dims,
                branches,
            } => {
                let cpos = controls.iter().map(|&s| self.position(s)).collect::<Result<Vec<_>>>()?;
                let mut digits = vec![0; controls.len()];
                for (c, b) in branches.iter().enumerate() {
                    let Some(b) = b else { continue };
                    decode(c, control_dims, &mut digits);
                    let n0 = fixed.len();
                    fixed.extend(cpos.iter().copied().zip(digits.iter().copied()));
                    self.resolve(b)?;
                    self.apply_body(b, strides, fixed)?;
                    fixed.truncate(n0);
                }
                Ok(())
            }
            body => {
                let pos = self.resolve(op)?;
                let offs = self.offsets(&pos, strides);
                let mut skip = pos.clone();
                skip.extend(fixed.iter().map(|f| f.0));
                let offset: usize = fixed.iter().map(|&(p, x)| x * strides[p]).sum();
                let n = offs.len();
                let amps = &mut self.amps;
                match body {
                    Body::Permutation(map) => {
                        let mut tmp = vec![ZERO; n];
                        for_each_base(&dims, strides, &skip, offset, |base| {
                            tmp.iter_mut().for_each(|t| *t = ZERO);
                            for (i, &o) in offs.iter().enumerate() {
                                let m = map[i];
                                if m != ANNIHILATE {
                                    tmp[m as usize] = amps[base + o];
                                }
                            }
                            for (i, &o) in offs.iter().enumerate() {
                                amps[base + o] = tmp[i];
                            }
                        });
                    }
                    Body::Diagonal(diag) => {
                        for_each_base(&dims, strides, &skip, offset, |base| {
                            for (i, &o) in offs.iter().enumerate() {
                                amps[base + o] *= diag[i];
                            }
                        });
                    }
                    Body::Dense(m) => {
                        let mut tin = vec![ZERO; n];
                        for_each_base(&dims, strides, &skip, offset, |base| {
                            for (i, &o) in offs.iter().enumerate() {
                                tin[i] = amps[base + o];
                            }
                            for (r, &o) in offs.iter().enumerate() {
                                let mut acc = ZERO;
                                for (c, t) in tin.iter().enumerate() {
                                    acc += m[(r, c)] * t;
                                }
                                amps[base + o] = acc;
                            }
                        });
                    }
                    Body::Controlled { .. } => unreachable!(),
                }
                Ok(())
            }
        }
    }

    /// Label probabilities of a measurement on `sites`.
    pub fn measurement_probabilities(&self, sites: &[SiteId], spec: &MeasureSpec) -> Result<Vec<f64>> {
        let pos = sites.iter().map(|&s| self.position(s)).collect::<Result<Vec<_>>>()?;
        let strides = self.strides();
        let offs = self.offsets(&pos, &strides);
        let n = offs.len();
        if spec.labels.len() != n {
            return Err(Error::SupportOutOfRange(format!(
                "measurement spec of size {} on joint dimension {n}",
                spec.labels.len()
            )));
        }
        let mut probs = vec![0.0; spec.num_labels];
        let dims = self.dims();
        match &spec.vectors {
            None => for_each_base(&dims, &strides, &pos, 0, |base| {
                for (i, &o) in offs.iter().enumerate() {
                    probs[spec.labels[i]] += self.amps[base + o].norm_sqr();
                }
            }),
            Some(vs) => for_each_base(&dims, &strides, &pos, 0, |base| {
                for (i, v) in vs.iter().enumerate() {
                    let c: C64 = v.iter().zip(&offs).map(|(a, &o)| a.conj() * self.amps[base + o]).sum();
                    probs[spec.labels[i]] += c.norm_sqr();
                }
            }),
        }
        let total = self.norm_sqr();
        probs.iter_mut().for_each(|p| *p /= total);
        Ok(probs)
    }

    /// Projects onto outcome `label`, renormalizes, and returns its probability.
    pub fn project(&mut self, sites: &[SiteId], spec: &MeasureSpec, label: usize) -> Result<f64> {
        let pos = sites.iter().map(|&s| self.position(s)).collect::<Result<Vec<_>>>()?;
        let strides = self.strides();
        let offs = self.offsets(&pos, &strides);
        let dims = self.dims();
        let before = self.norm_sqr();
        let amps = &mut self.amps;
        match &spec.vectors {
            None => for_each_base(&dims, &strides, &pos, 0, |base| {
                for (i, &o) in offs.iter().enumerate() {
                    if spec.labels[i] != label {
                        amps[base + o] = ZERO;
                    }
                }
            }),
            Some(vs) => {
                let chosen: Vec<&Vec<C64>> = vs.iter().zip(spec.labels.iter()).filter(|(_, &l)| l == label).map(|(v, _)| v).collect();
                let mut out = vec![ZERO; offs.len()];
                for_each_base(&dims, &strides, &pos, 0, |base| {
                    out.iter_mut().for_each(|t| *t = ZERO);
                    for v in &chosen {
                        let c: C64 = v.iter().zip(&offs).map(|(a, &o)| a.conj() * amps[base + o]).sum();
                        for (t, a) in out.iter_mut().zip(v.iter()) {
                            *t += c * a;
                        }
                    }
                    for (t, &o) in out.iter().zip(&offs) {
                        amps[base + o] = *t;
                    }
                });
            }
        }
        let p = self.norm_sqr() / before;
        if p < 1e-18 {
            return Err(Error::ZeroProbabilityBranch);
        }
        self.normalize();
        Ok(p)
    }

    /// Born-rule measurement driven by a uniform draw `u ∈ [0, 1)`.
    pub fn measure_with_draw(&mut self, sites: &[SiteId], spec: &MeasureSpec, u: f64) -> Result<(usize, f64)> {
        let probs = self.measurement_probabilities(sites, spec)?;
        let mut acc = 0.0;
        let mut label = probs.iter().rposition(|&p| p > 1e-15).unwrap_or(0);
        for (l, &p) in probs.iter().enumerate() {
            acc += p;
            if u < acc && p > 1e-15 {
                label = l;
                break;
            }
        }
        let p = self.project(sites, spec, label)?;
        Ok((label, p))
    }

    /// Appends a site in the given local state as the least significant digit.
    pub fn alloc(&mut self, id: SiteId, dim: usize, local: &[C64]) -> Result<()> {
        if self.sites.iter().any(|s| s.0 == id) {
            return Err(Error::SupportOutOfRange(format!("site {id} already allocated")));
        }
        if local.len() != dim {
            return Err(Error::SupportOutOfRange(format!("initial state length {} for dimension {dim}", local.len())));
        }
        check_cap(self.amps.len() as u128 * dim as u128)?;
        let mut amps = Vec::with_capacity(self.amps.len() * dim);
        for a in &self.amps {
            for l in local {
                amps.push(a * l);
            }
        }
        self.amps = amps;
        self.sites.push((id, dim));
        Ok(())
    }

    /// Removes a site after projecting it onto `local`; fails unless the overlap
    /// has weight at least `1 - 1e-9`.
    pub fn discard_expect(&mut self, id: SiteId, local: &[C64]) -> Result<f64> {
        let p = self.position(id)?;
        let strides = self.strides();
        let dims = self.dims();
        let d = dims[p];
        let st = strides[p];
        let before = self.norm_sqr();
        let mut out = Vec::with_capacity(self.amps.len() / d);
        for_each_base(&dims, &strides, &[p], 0, |base| {
            let c: C64 = (0..d).map(|k| local[k].conj() * self.amps[base + k * st]).sum();
            out.push(c);
        });
        self.amps = out;
        self.sites.remove(p);
        let w = self.norm_sqr() / before;
        if w < 1.0 - 1e-9 {
            return Err(Error::AncillaNotDisentangled(1.0 - w));
        }
        self.normalize();
        Ok(w)
    }

    /// Removes a site that is in a product state with the rest, whatever that state is.
    pub fn discard_traced(&mut self, id: SiteId) -> Result<f64> {
        let rho = self.reduced_density(&[id])?;
        let eig = nalgebra::SymmetricEigen::new(rho);
        let (k, _) = eig
            .eigenvalues
            .iter()
            .enumerate()
            .fold((0, f64::MIN), |b, (i, &v)| if v > b.1 { (i, v) } else { b });
        let v: Vec<C64> = eig.eigenvectors.column(k).iter().copied().collect();
        self.discard_expect(id, &v)
    }

    /// Amplitudes as a `dim(sites) × dim(rest)` matrix, `sites` most significant in order.
    fn bipartition(&self, sites: &[SiteId]) -> Result<DMatrix<C64>> {
        let mut order = sites.to_vec();
        order.extend(self.site_ids().into_iter().filter(|s| !sites.contains(s)));
        let mut c = self.clone();
        c.reorder(&order)?;
        let ds: usize = sites.iter().map(|&s| self.dim_of(s)).product::<Result<usize>>()?;
        let rest = self.amps.len() / ds;
        Ok(DMatrix::from_row_slice(ds, rest, &c.amps))
    }

    /// Unitary `W` on `region` maximizing `|⟨target| W |self⟩|`, with the residual
    /// `‖W ψ − φ‖` for the normalized states. The residual vanishes exactly when
    /// both states have the same reduced state off the region.
    pub fn uhlmann_unitary(&self, target: &StateVector, region: &[SiteId]) -> Result<(OperatorHandle, f64)> {
        let support: Vec<(SiteId, usize)> =
            region.iter().map(|&s| Ok((s, self.dim_of(s)?))).collect::<Result<_>>()?;
        if target.sites != self.sites {
            return Err(Error::SupportOutOfRange("Uhlmann states on different registers".into()));
        }
        let n = joint_dim(&support.iter().map(|s| s.1).collect::<Vec<_>>());
        if n > DENSE_MAX_DIM {
            return Err(Error::TooLarge(n as u128, DENSE_MAX_DIM));
        }
        let ma = self.bipartition(region)? / C64::new(self.norm_sqr().sqrt(), 0.0);
        let mb = target.bipartition(region)? / C64::new(target.norm_sqr().sqrt(), 0.0);
        let k = &mb * ma.adjoint();
        let svd = k.svd(true, true);
        let w = svd.u.expect("u") * svd.v_t.expect("v_t");
        let residual = (&w * &ma - &mb).norm();
        Ok((OperatorHandle::dense("W", &support, w)?, residual))
    }

    /// Reduced density matrix on `sites` (in the given order).
    pub fn reduced_density(&self, sites: &[SiteId]) -> Result<DMatrix<C64>> {
        let pos = sites.iter().map(|&s| self.position(s)).collect::<Result<Vec<_>>>()?;
        let strides = self.strides();
        let offs = self.offsets(&pos, &strides);
        let n = offs.len();
        let mut rho = DMatrix::zeros(n, n);
        let dims = self.dims();
        for_each_base(&dims, &strides, &pos, 0, |base| {
            for i in 0..n {
                let ai = self.amps[base + offs[i]];
                if ai == ZERO {
                    continue;
                }
                for j in 0..n {
                    rho[(i, j)] += ai * self.amps[base + offs[j]].conj();
                }
            }
        });
        let t = self.norm_sqr();
        Ok(rho / C64::new(t, 0.0))
    }

    /// Reinterprets one site as several with the same total dimension (first new
    /// site most significant).
    pub fn split(&mut self, id: SiteId, into: &[(SiteId, usize)]) -> Result<()> {
        let p = self.position(id)?;
        let d: usize = into.iter().map(|s| s.1).product();
        if d != self.sites[p].1 {
            return Err(Error::SupportOutOfRange(format!("split of {id} into dimension {d}")));
        }
        self.sites.splice(p..p + 1, into.iter().copied());
        Ok(())
    }

    /// Merges sites into one (first most significant), moving them adjacent if needed.
    pub fn merge(&mut self, parts: &[SiteId], into: SiteId) -> Result<()> {
        let pos = parts.iter().map(|&s| self.position(s)).collect::<Result<Vec<_>>>()?;
        let adjacent = pos.windows(2).all(|w| w[1] == w[0] + 1);
        if !adjacent {
            let mut order: Vec<SiteId> = self.site_ids().into_iter().filter(|s| !parts.contains(s)).collect();
            let at = self.sites[..pos[0]].iter().filter(|s| !parts.contains(&s.0)).count();
            for (k, &s) in parts.iter().enumerate() {
                order.insert(at + k, s);
            }
            self.reorder(&order)?;
        }
        let p = self.position(parts[0])?;
        let d: usize = parts.iter().map(|&s| self.dim_of(s).unwrap()).product();
        self.sites.splice(p..p + parts.len(), [(into, d)]);
        Ok(())
    }

    /// Permutes the digit order of the register.
    pub fn reorder(&mut self, order: &[SiteId]) -> Result<()> {
        if order.len() != self.sites.len() {
            return Err(Error::SupportOutOfRange("reorder must list every site".into()));
        }
        let pos = order.iter().map(|&s| self.position(s)).collect::<Result<Vec<_>>>()?;
        if pos.iter().enumerate().all(|(i, &p)| i == p) {
            return Ok(());
        }
        let old_strides = self.strides();
        let new_sites: Vec<(SiteId, usize)> = pos.iter().map(|&p| self.sites[p]).collect();
        let new_dims: Vec<usize> = new_sites.iter().map(|s| s.1).collect();
        let mut out = vec![ZERO; self.amps.len()];
        let mut digits = vec![0; new_dims.len()];
        let mut src = 0usize;
        for o in out.iter_mut() {
            *o = self.amps[src];
            let mut k = new_dims.len();
            while k > 0 {
                k -= 1;
                digits[k] += 1;
                src += old_strides[pos[k]];
                if digits[k] < new_dims[k] {
                    break;
                }
                src -= old_strides[pos[k]] * new_dims[k];
                digits[k] = 0;
            }
        }
        self.amps = out;
        self.sites = new_sites;
        Ok(())
    }

    /// Debug dump: header with dimensions, then `index re im` for `|amp| > 1e-12`.
    pub fn dump(&self) -> String {
        let dims: Vec<String> = self.sites.iter().map(|s| s.1.to_string()).collect();
        let mut s = format!("dims {}\n", dims.join(" "));
        for (i, a) in self.amps.iter().enumerate() {
            if a.norm() > 1e-12 {
                s.push_str(&format!("{i} {:.17e} {:.17e}\n", a.re, a.im));
            }
        }
        s
    }
}
