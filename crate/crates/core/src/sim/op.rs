//! Structured linear operators on a subset of qudits.

use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::rep::CMatrix;

/// Largest joint dimension allowed for dense bodies.
pub const DENSE_MAX_DIM: usize = 4096;

/// Marker for an annihilated basis state in a partial permutation.
pub const ANNIHILATE: u32 = u32::MAX;

/// Stable identifier of a qudit in a register.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SiteId(pub u32);

impl std::fmt::Display for SiteId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "q{}", self.0)
    }
}

#[derive(Debug, Clone)]
pub enum Body {
    /// `|i⟩ ↦ |map[i]⟩`; entries equal to [`ANNIHILATE`] map to zero.
    Permutation(Arc<Vec<u32>>),
    Diagonal(Arc<Vec<Complex64>>),
    /// One optional branch per joint value of the control sites.
    Controlled {
        controls: Vec<SiteId>,
        control_dims: Vec<usize>,
        branches: Arc<Vec<Option<OperatorHandle>>>,
    },
    Dense(Arc<CMatrix>),
}

/// A linear operator with its support. For `Controlled` bodies, `support` lists the
/// controls followed by the union of branch supports.
#[derive(Debug, Clone)]
pub struct OperatorHandle {
    pub name: String,
    pub support: Vec<SiteId>,
    pub dims: Vec<usize>,
    pub body: Body,
}

/// Mixed-radix decoding, first digit most significant.
pub fn decode(mut idx: usize, dims: &[usize], out: &mut [usize]) {
    for k in (0..dims.len()).rev() {
        out[k] = idx % dims[k];
        idx /= dims[k];
    }
}

pub fn encode(digits: &[usize], dims: &[usize]) -> usize {
    digits.iter().zip(dims).fold(0, |acc, (&x, &d)| acc * d + x)
}

pub fn joint_dim(dims: &[usize]) -> usize {
    dims.iter().product()
}

impl OperatorHandle {
    pub fn joint_dim(&self) -> usize {
        joint_dim(&self.dims)
    }

    /// Permutation from a function on digit tuples.
    pub fn perm_fn(
        name: &str,
        support: &[(SiteId, usize)],
        f: impl Fn(&[usize]) -> Vec<usize>,
    ) -> OperatorHandle {
        Self::partial_perm_fn(name, support, |x| Some(f(x)))
    }

    /// Partial permutation; `None` annihilates the basis state.
    pub fn partial_perm_fn(
        name: &str,
        support: &[(SiteId, usize)],
        f: impl Fn(&[usize]) -> Option<Vec<usize>>,
    ) -> OperatorHandle {
        let dims: Vec<usize> = support.iter().map(|s| s.1).collect();
        let n = joint_dim(&dims);
        let mut digits = vec![0; dims.len()];
        let map = (0..n)
            .map(|i| {
                decode(i, &dims, &mut digits);
                match f(&digits) {
                    Some(out) => encode(&out, &dims) as u32,
                    None => ANNIHILATE,
                }
            })
            .collect();
        OperatorHandle {
            name: name.to_string(),
            support: support.iter().map(|s| s.0).collect(),
            dims,
            body: Body::Permutation(Arc::new(map)),
        }
    }

    pub fn diag_fn(name: &str, support: &[(SiteId, usize)], f: impl Fn(&[usize]) -> Complex64) -> OperatorHandle {
        let dims: Vec<usize> = support.iter().map(|s| s.1).collect();
        let n = joint_dim(&dims);
        let mut digits = vec![0; dims.len()];
        let diag = (0..n)
            .map(|i| {
                decode(i, &dims, &mut digits);
                f(&digits)
            })
            .collect();
        OperatorHandle {
            name: name.to_string(),
            support: support.iter().map(|s| s.0).collect(),
            dims,
            body: Body::Diagonal(Arc::new(diag)),
        }
    }

    pub fn dense(name: &str, support: &[(SiteId, usize)], m: CMatrix) -> Result<OperatorHandle> {
        let dims: Vec<usize> = support.iter().map(|s| s.1).collect();
        let n = joint_dim(&dims);
        if n > DENSE_MAX_DIM {
            return Err(Error::TooLarge(n as u128, DENSE_MAX_DIM));
        }
        if m.nrows() != n || m.ncols() != n {
            return Err(Error::SupportOutOfRange(format!(
                "dense matrix {}x{} on joint dimension {n}",
                m.nrows(),
                m.ncols()
            )));
        }
        Ok(OperatorHandle {
            name: name.to_string(),
            support: support.iter().map(|s| s.0).collect(),
            dims,
            body: Body::Dense(Arc::new(m)),
        })
    }

    /// Branch `f(c)` applied when the controls read the joint value `c`.
    pub fn controlled(
        name: &str,
        controls: &[(SiteId, usize)],
        f: impl Fn(&[usize]) -> Option<OperatorHandle>,
    ) -> OperatorHandle {
        let control_dims: Vec<usize> = controls.iter().map(|s| s.1).collect();
        let n = joint_dim(&control_dims);
        let mut digits = vec![0; control_dims.len()];
        let branches: Vec<Option<OperatorHandle>> = (0..n)
            .map(|i| {
                decode(i, &control_dims, &mut digits);
                f(&digits)
            })
            .collect();
        let mut support: Vec<SiteId> = controls.iter().map(|s| s.0).collect();
        let mut dims = control_dims.clone();
        for b in branches.iter().flatten() {
            for (s, d) in b.support.iter().zip(&b.dims) {
                if !support.contains(s) {
                    support.push(*s);
                    dims.push(*d);
                }
            }
        }
        OperatorHandle {
            name: name.to_string(),
            support,
            dims,
            body: Body::Controlled {
                controls: controls.iter().map(|s| s.0).collect(),
                control_dims,
                branches: Arc::new(branches),
            },
        }
    }

    /// Generalized Pauli `X^k`: `|j⟩ ↦ |j + k⟩`.
    pub fn x_pow(site: SiteId, d: usize, k: i64) -> OperatorHandle {
        let k = k.rem_euclid(d as i64) as usize;
        Self::perm_fn(&format!("X^{k}"), &[(site, d)], |x| vec![(x[0] + k) % d])
    }

    /// Generalized Pauli `Z^k`: `|j⟩ ↦ ω^{kj} |j⟩`.
    pub fn z_pow(site: SiteId, d: usize, k: i64) -> OperatorHandle {
        let k = k.rem_euclid(d as i64);
        Self::diag_fn(&format!("Z^{k}"), &[(site, d)], |x| omega(d, k * x[0] as i64))
    }

    /// `X^a Z^b` as one gate: `|j⟩ ↦ ω^{bj} |j + a⟩`.
    pub fn pauli(site: SiteId, d: usize, a: i64, b: i64) -> OperatorHandle {
        let a = a.rem_euclid(d as i64) as usize;
        let b = b.rem_euclid(d as i64);
        let mut m = CMatrix::zeros(d, d);
        for j in 0..d {
            m[((j + a) % d, j)] = omega(d, b * j as i64);
        }
        Self::dense(&format!("X^{a}Z^{b}"), &[(site, d)], m).expect("small dense")
    }

    /// `F = d^{-1/2} Σ ω^{kl} |k⟩⟨l|`, or its adjoint.
    pub fn fourier(site: SiteId, d: usize, adjoint: bool) -> OperatorHandle {
        let s = if adjoint { -1 } else { 1 };
        let m = CMatrix::from_fn(d, d, |k, l| omega(d, s * (k * l) as i64) / (d as f64).sqrt());
        Self::dense(if adjoint { "F^dag" } else { "F" }, &[(site, d)], m).expect("small dense")
    }

    /// Checks an operator for unitarity. Permutations must be total bijections.
    pub fn unitarity_defect(&self) -> f64 {
        match &self.body {
            Body::Permutation(map) => {
                let mut seen = vec![false; map.len()];
                for &m in map.iter() {
                    if m == ANNIHILATE || seen[m as usize] {
                        return 1.0;
                    }
                    seen[m as usize] = true;
                }
                0.0
            }
            Body::Diagonal(d) => d.iter().map(|z| (z.norm() - 1.0).abs()).fold(0.0, f64::max),
            Body::Dense(m) => {
                let n = m.nrows();
                crate::rep::max_abs(&(m.adjoint() * m.as_ref() - CMatrix::identity(n, n)))
            }
            Body::Controlled { branches, .. } => branches
                .iter()
                .map(|b| b.as_ref().map(|o| o.unitarity_defect()).unwrap_or(0.0))
                .fold(0.0, f64::max),
        }
    }

    /// Dense matrix of the operator on its joint support.
    pub fn to_matrix(&self) -> CMatrix {
        let n = self.joint_dim();
        let mut out = CMatrix::zeros(n, n);
        for col in 0..n {
            let mut v = vec![Complex64::new(0.0, 0.0); n];
            v[col] = Complex64::new(1.0, 0.0);
            let mut st = super::StateVector::from_parts(
                self.support.iter().copied().zip(self.dims.iter().copied()).collect(),
                v,
            );
            st.apply_unchecked(self).expect("own support");
            for row in 0..n {
                out[(row, col)] = st.amplitudes()[row];
            }
        }
        out
    }

    /// Adjoint (inverse for unitaries).
    pub fn adjoint(&self) -> OperatorHandle {
        let body = match &self.body {
            Body::Permutation(map) => {
                let mut inv = vec![ANNIHILATE; map.len()];
                for (i, &m) in map.iter().enumerate() {
                    if m != ANNIHILATE {
                        inv[m as usize] = i as u32;
                    }
                }
                Body::Permutation(Arc::new(inv))
            }
            Body::Diagonal(d) => Body::Diagonal(Arc::new(d.iter().map(|z| z.conj()).collect())),
            Body::Dense(m) => Body::Dense(Arc::new(m.adjoint())),
            Body::Controlled {
                controls,
                control_dims,
                branches,
            } => Body::Controlled {
                controls: controls.clone(),
                control_dims: control_dims.clone(),
                branches: Arc::new(branches.iter().map(|b| b.as_ref().map(|o| o.adjoint())).collect()),
            },
        };
        OperatorHandle {
            name: format!("{}^dag", self.name),
            support: self.support.clone(),
            dims: self.dims.clone(),
            body,
        }
    }

    /// The same operator on relabeled qudits.
    pub fn remapped(&self, f: &impl Fn(SiteId) -> SiteId) -> OperatorHandle {
        let body = match &self.body {
            Body::Controlled {
                controls,
                control_dims,
                branches,
            } => Body::Controlled {
                controls: controls.iter().map(|&s| f(s)).collect(),
                control_dims: control_dims.clone(),
                branches: Arc::new(branches.iter().map(|b| b.as_ref().map(|o| o.remapped(f))).collect()),
            },
            b => b.clone(),
        };
        OperatorHandle {
            name: self.name.clone(),
            support: self.support.iter().map(|&s| f(s)).collect(),
            dims: self.dims.clone(),
            body,
        }
    }

    pub fn renamed(mut self, name: &str) -> OperatorHandle {
        self.name = name.to_string();
        self
    }
}

/// `ω_d^k = exp(2πik/d)`.
pub fn omega(d: usize, k: i64) -> Complex64 {
    let k = k.rem_euclid(d as i64);
    Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * k as f64 / d as f64)
}
