//! Clifford gadgets over `Z_d`: partial sums, successive differences and the
//! multitarget CX, applied either directly or by gate teleportation.

use crate::error::{Error, Result};
use crate::sim::{
    amp_cap, omega, AdaptiveCircuit, DiscardMode, MeasureSpec, OperatorHandle, SiteId, StateVector, C64,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GadgetMode {
    /// One permutation gate.
    Direct,
    /// Resource state, Bell measurement, Pauli frame correction.
    Teleported,
}

/// An invertible integer matrix acting as `x ↦ Lx (mod d)`, with its inverse.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinearMap {
    pub fwd: Vec<Vec<i64>>,
    pub inv: Vec<Vec<i64>>,
}

fn mat_vec(m: &[Vec<i64>], x: &[i64], d: usize) -> Vec<i64> {
    m.iter()
        .map(|row| row.iter().zip(x).map(|(a, b)| a * b).sum::<i64>().rem_euclid(d as i64))
        .collect()
}

fn transpose(m: &[Vec<i64>]) -> Vec<Vec<i64>> {
    let n = m.len();
    (0..n).map(|i| (0..n).map(|j| m[j][i]).collect()).collect()
}

impl LinearMap {
    /// `U|j_1..j_n⟩ = |j_1, j_1+j_2, …, Σ j_k⟩`.
    pub fn partial_sum(n: usize) -> LinearMap {
        let fwd = (0..n).map(|i| (0..n).map(|k| i64::from(k <= i)).collect()).collect();
        let inv = (0..n)
            .map(|i| {
                (0..n)
                    .map(|k| if k == i { 1 } else if k + 1 == i { -1 } else { 0 })
                    .collect()
            })
            .collect();
        LinearMap { fwd, inv }
    }

    /// `Δ|j_1..j_n⟩ = |j_1, j_2-j_1, …, j_n-j_{n-1}⟩`.
    pub fn successive_difference(n: usize) -> LinearMap {
        let u = LinearMap::partial_sum(n);
        LinearMap { fwd: u.inv, inv: u.fwd }
    }

    pub fn n(&self) -> usize {
        self.fwd.len()
    }

    pub fn apply(&self, x: &[usize], d: usize) -> Vec<usize> {
        let xi: Vec<i64> = x.iter().map(|&v| v as i64).collect();
        mat_vec(&self.fwd, &xi, d).into_iter().map(|v| v as usize).collect()
    }

    pub fn gate(&self, name: &str, sites: &[SiteId], d: usize) -> OperatorHandle {
        let sup: Vec<(SiteId, usize)> = sites.iter().map(|&s| (s, d)).collect();
        OperatorHandle::perm_fn(name, &sup, |x| self.apply(x, d))
    }

    /// `U (X^r Z^s) U† = X^{Lr} Z^{L^{-T} s}` for the permutation `U: x ↦ Lx`.
    pub fn frame(&self, r: &[i64], s: &[i64], d: usize) -> (Vec<i64>, Vec<i64>) {
        (mat_vec(&self.fwd, r, d), mat_vec(&transpose(&self.inv), s, d))
    }
}

/// Tensor product of single-qudit `X^a Z^b` factors.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PauliString {
    pub d: usize,
    /// `(site, a, b)` for the factor `X^a Z^b`.
    pub factors: Vec<(SiteId, i64, i64)>,
}

impl PauliString {
    pub fn apply(&self, psi: &mut StateVector) -> Result<()> {
        for &(s, a, b) in &self.factors {
            psi.apply(&OperatorHandle::pauli(s, self.d, a, b))?;
        }
        Ok(())
    }

    pub fn sites(&self) -> Vec<SiteId> {
        self.factors.iter().map(|f| f.0).collect()
    }

    /// Eigenvalue measurement: outcome `r` means eigenvalue `ω^r`. Only pure
    /// `X`-type or pure `Z`-type strings are supported.
    pub fn measure_spec(&self) -> Result<MeasureSpec> {
        let d = self.d;
        let k = self.factors.len();
        let dims = vec![d; k];
        let mut digits = vec![0; k];
        let total = d.pow(k as u32);
        if self.factors.iter().all(|f| f.1 == 0) {
            let zs: Vec<i64> = self.factors.iter().map(|f| f.2).collect();
            return Ok(MeasureSpec::grouped(total, |i| {
                let mut digits = vec![0; k];
                crate::sim::decode(i, &dims, &mut digits);
                let v: i64 = zs.iter().zip(&digits).map(|(z, &x)| z * x as i64).sum();
                v.rem_euclid(d as i64) as usize
            }));
        }
        if self.factors.iter().any(|f| f.2 != 0) {
            return Err(Error::SupportOutOfRange("mixed Pauli string measurement".into()));
        }
        // product eigenbasis: m ↦ Σ_j ω^{-mj}|j⟩/√d has X-eigenvalue ω^m
        let xs: Vec<i64> = self.factors.iter().map(|f| f.1).collect();
        let s = (d as f64).powf(-0.5 * k as f64);
        let mut vectors = Vec::with_capacity(total);
        let mut labels = Vec::with_capacity(total);
        let mut ms = vec![0; k];
        for mi in 0..total {
            crate::sim::decode(mi, &dims, &mut ms);
            let v = (0..total)
                .map(|ji| {
                    crate::sim::decode(ji, &dims, &mut digits);
                    let e: i64 = ms.iter().zip(&digits).map(|(&m, &j)| (m * j) as i64).sum();
                    omega(d, -e) * s
                })
                .collect();
            vectors.push(v);
            let l: i64 = xs.iter().zip(&ms).map(|(a, &m)| a * m as i64).sum();
            labels.push(l.rem_euclid(d as i64) as usize);
        }
        MeasureSpec::basis(vectors, labels)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CyclicGadget {
    PartialSum,
    SuccessiveDifference,
    /// `x_i ← x_i + h` on `n` targets followed by the control `h`.
    MultitargetCx,
}

impl CyclicGadget {
    pub fn name(&self) -> &'static str {
        match self {
            CyclicGadget::PartialSum => "U",
            CyclicGadget::SuccessiveDifference => "Delta",
            CyclicGadget::MultitargetCx => "CX",
        }
    }

    /// Number of qudits the gadget acts on for parameter `n`.
    pub fn width(&self, n: usize) -> usize {
        match self {
            CyclicGadget::MultitargetCx => n + 1,
            _ => n,
        }
    }

    /// The defining action on a basis state.
    pub fn target(&self, d: usize, x: &[usize]) -> Vec<usize> {
        match self {
            CyclicGadget::PartialSum => LinearMap::partial_sum(x.len()).apply(x, d),
            CyclicGadget::SuccessiveDifference => LinearMap::successive_difference(x.len()).apply(x, d),
            CyclicGadget::MultitargetCx => {
                let (h, xs) = x.split_last().expect("control qudit");
                xs.iter().map(|v| (v + h) % d).chain([*h]).collect()
            }
        }
    }
}

/// The resource state `Φ_L = (I ⊗ U_L)|Φ⟩^{⊗n}` on registers `A^n B^n`.
#[derive(Debug, Clone)]
pub struct GadgetResource {
    pub kind: CyclicGadget,
    pub d: usize,
    pub a: Vec<SiteId>,
    pub b: Vec<SiteId>,
    /// All `2n` generators `T^X_k`, `T^Z_k`.
    pub stabilizers: Vec<PauliString>,
    /// The generators measured during preparation.
    pub measured: Vec<PauliString>,
}

fn linear_map(kind: CyclicGadget, n: usize) -> Result<LinearMap> {
    match kind {
        CyclicGadget::PartialSum => Ok(LinearMap::partial_sum(n)),
        CyclicGadget::SuccessiveDifference => Ok(LinearMap::successive_difference(n)),
        CyclicGadget::MultitargetCx => Err(Error::SupportOutOfRange(
            "the multitarget CX is teleported through the Fourier identity".into(),
        )),
    }
}

/// `T^X_k = X_{A_k} X^{L e_k}_B` and `T^Z_k = Z^{-1}_{A_k} Z^{L^{-T} e_k}_B`.
fn stabilizers(map: &LinearMap, d: usize, a: &[SiteId], b: &[SiteId]) -> (Vec<PauliString>, Vec<PauliString>) {
    let n = map.n();
    let mut xs = Vec::new();
    let mut zs = Vec::new();
    for k in 0..n {
        let mut fx = vec![(a[k], 1, 0)];
        let mut fz = vec![(a[k], 0, -1)];
        for l in 0..n {
            if map.fwd[l][k] != 0 {
                fx.push((b[l], map.fwd[l][k], 0));
            }
            if map.inv[k][l] != 0 {
                fz.push((b[l], 0, map.inv[k][l]));
            }
        }
        xs.push(PauliString { d, factors: fx });
        zs.push(PauliString { d, factors: fz });
    }
    (xs, zs)
}

/// Appends the preparation of `Φ_U` (from `|+⟩^{⊗2n}`, measuring every `T^Z_k`)
/// or `Φ_Δ` (from `|0⟩^{⊗2n}`, measuring every `T^X_k`), with the Pauli fixes
/// on `A_k`. Overlapping generators are measured in two parity passes.
pub fn prepare_resource(
    circ: &mut AdaptiveCircuit,
    kind: CyclicGadget,
    d: usize,
    n: usize,
    prefix: &str,
) -> Result<GadgetResource> {
    let map = linear_map(kind, n)?;
    let plus = kind == CyclicGadget::PartialSum;
    let mut a = Vec::new();
    let mut b = Vec::new();
    for _ in 0..n {
        a.push(if plus { circ.alloc_plus(d) } else { circ.alloc_basis(d, 0) });
        b.push(if plus { circ.alloc_plus(d) } else { circ.alloc_basis(d, 0) });
    }
    let (xs, zs) = stabilizers(&map, d, &a, &b);
    let measured = if plus { zs.clone() } else { xs.clone() };
    for parity in 0..2 {
        for (k, t) in measured.iter().enumerate().filter(|(k, _)| k % 2 == parity) {
            circ.measure(&format!("{prefix}/t{k}"), t.sites(), t.measure_spec()?);
        }
    }
    for (k, &ak) in a.iter().enumerate() {
        let key = format!("{prefix}/t{k}");
        let rk = key.clone();
        circ.adaptive("fix", vec![ak], vec![key], move |rec| {
            let r = rec[&rk];
            Some(if plus {
                OperatorHandle::x_pow(ak, d, r)
            } else {
                OperatorHandle::z_pow(ak, d, r)
            })
        });
    }
    let mut stabs = xs;
    stabs.extend(zs);
    Ok(GadgetResource {
        kind,
        d,
        a,
        b,
        stabilizers: stabs,
        measured,
    })
}

/// Basis `Φ^{(r,s)} = (X^r Z^s ⊗ I)|Φ⟩` on `(C, A)`, outcome `r·d + s`.
pub fn bell_spec(d: usize) -> MeasureSpec {
    let s = 1.0 / (d as f64).sqrt();
    let mut vectors = Vec::new();
    let mut labels = Vec::new();
    for r in 0..d {
        for z in 0..d {
            let mut v = vec![C64::new(0.0, 0.0); d * d];
            for a in 0..d {
                v[((a + r) % d) * d + a] = omega(d, (z * a) as i64) * s;
            }
            vectors.push(v);
            labels.push(r * d + z);
        }
    }
    MeasureSpec::basis(vectors, labels).expect("Bell basis")
}

/// Teleports `U_L` through `Φ_L`: returns the output qudits (the `B` register).
/// A Bell outcome `(r, s)` leaves `U (X^r Z^s)^† ψ` on `B`, fixed by `X^{Lr} Z^{L^{-T}s}`.
pub fn teleport_linear(
    circ: &mut AdaptiveCircuit,
    kind: CyclicGadget,
    d: usize,
    inputs: &[SiteId],
    prefix: &str,
) -> Result<Vec<SiteId>> {
    let n = inputs.len();
    let map = linear_map(kind, n)?;
    let res = prepare_resource(circ, kind, d, n, prefix)?;
    let bell = bell_spec(d);
    let bell_keys: Vec<String> = (0..n).map(|k| format!("{prefix}/bell{k}")).collect();
    for k in 0..n {
        circ.measure(&bell_keys[k], vec![inputs[k], res.a[k]], bell.clone());
    }
    let fx: Vec<String> = (0..n).map(|k| format!("{prefix}/fx{k}")).collect();
    let fz: Vec<String> = (0..n).map(|k| format!("{prefix}/fz{k}")).collect();
    {
        let (bk, fx, fz) = (bell_keys.clone(), fx.clone(), fz.clone());
        let writes = fx.iter().chain(&fz).cloned().collect();
        circ.classical("frame", bell_keys.clone(), writes, move |rec| {
            let r: Vec<i64> = bk.iter().map(|k| rec[k] / d as i64).collect();
            let s: Vec<i64> = bk.iter().map(|k| rec[k] % d as i64).collect();
            let (rx, sz) = map.frame(&r, &s, d);
            let mut out = Vec::new();
            for k in 0..n {
                out.push((fx[k].clone(), rx[k]));
                out.push((fz[k].clone(), sz[k]));
            }
            out
        });
    }
    for k in 0..n {
        let (bk, kx, kz) = (res.b[k], fx[k].clone(), fz[k].clone());
        circ.adaptive("frame-fix", vec![bk], vec![kx.clone(), kz.clone()], move |rec| {
            Some(OperatorHandle::pauli(bk, d, rec[&kx], rec[&kz]))
        });
    }
    for k in 0..n {
        let m = circ.merge(vec![inputs[k], res.a[k]]);
        circ.discard(m, DiscardMode::Traced);
    }
    Ok(res.b)
}

/// Applies `U` or `Δ` to `sites`; returns the qudits holding the output.
pub fn apply_linear_gadget(
    circ: &mut AdaptiveCircuit,
    kind: CyclicGadget,
    d: usize,
    sites: &[SiteId],
    mode: GadgetMode,
    prefix: &str,
) -> Result<Vec<SiteId>> {
    match mode {
        GadgetMode::Direct => {
            circ.unitary(linear_map(kind, sites.len())?.gate(kind.name(), sites, d));
            Ok(sites.to_vec())
        }
        GadgetMode::Teleported => teleport_linear(circ, kind, d, sites, prefix),
    }
}

/// `CX_{h → x^n}`. Teleported mode uses
/// `(F^{⊗n} ⊗ F†) Δ CX_{x_n → h} U (F^{⊗n} ⊗ F†)^†` with `U`, `Δ` teleported.
pub fn multitarget_cx(
    circ: &mut AdaptiveCircuit,
    d: usize,
    targets: &[SiteId],
    control: SiteId,
    mode: GadgetMode,
    prefix: &str,
) -> Result<(Vec<SiteId>, SiteId)> {
    if mode == GadgetMode::Direct {
        let mut sup: Vec<(SiteId, usize)> = targets.iter().map(|&s| (s, d)).collect();
        sup.push((control, d));
        circ.unitary(OperatorHandle::perm_fn("CX-fanout", &sup, |x| {
            CyclicGadget::MultitargetCx.target(d, x)
        }));
        return Ok((targets.to_vec(), control));
    }
    for &t in targets {
        circ.unitary(OperatorHandle::fourier(t, d, true));
    }
    circ.unitary(OperatorHandle::fourier(control, d, false));
    let x = teleport_linear(circ, CyclicGadget::PartialSum, d, targets, &format!("{prefix}/U"))?;
    let last = *x.last().expect("at least one target");
    circ.unitary(OperatorHandle::perm_fn("CX", &[(last, d), (control, d)], |v| {
        vec![v[0], (v[0] + v[1]) % d]
    }));
    let x = teleport_linear(circ, CyclicGadget::SuccessiveDifference, d, &x, &format!("{prefix}/D"))?;
    for &t in &x {
        circ.unitary(OperatorHandle::fourier(t, d, false));
    }
    circ.unitary(OperatorHandle::fourier(control, d, true));
    Ok((x, control))
}

/// Any cyclic gadget on `sites` (for the CX: targets then the control).
pub fn apply_cyclic(
    circ: &mut AdaptiveCircuit,
    kind: CyclicGadget,
    d: usize,
    sites: &[SiteId],
    mode: GadgetMode,
    prefix: &str,
) -> Result<Vec<SiteId>> {
    match kind {
        CyclicGadget::MultitargetCx => {
            let (c, t) = sites.split_last().expect("control qudit");
            let (mut x, h) = multitarget_cx(circ, d, t, *c, mode, prefix)?;
            x.push(h);
            Ok(x)
        }
        _ => apply_linear_gadget(circ, kind, d, sites, mode, prefix),
    }
}

/// A standalone circuit with its input and output qudits.
#[derive(Clone)]
pub struct GadgetCircuit {
    pub circuit: AdaptiveCircuit,
    pub inputs: Vec<SiteId>,
    pub outputs: Vec<SiteId>,
    pub dims: Vec<usize>,
}

/// Largest register the gadget touches when run on its inputs alone.
pub fn peak_amplitudes(kind: CyclicGadget, d: usize, n: usize, mode: GadgetMode) -> u128 {
    let w = kind.width(n);
    let peak = match mode {
        GadgetMode::Direct => w,
        GadgetMode::Teleported => w + 2 * n,
    };
    (d as u128).saturating_pow(peak as u32)
}

/// The gadget on qudits `q0..q{w-1}`. Compilation never allocates amplitudes;
/// see [`cyclic_gadget_checked`] for the size guard.
pub fn cyclic_gadget(kind: CyclicGadget, d: usize, n: usize, mode: GadgetMode) -> Result<GadgetCircuit> {
    if d < 2 || n < 1 {
        return Err(Error::SupportOutOfRange(format!("gadget needs d >= 2 and n >= 1 (got d={d}, n={n})")));
    }
    let w = kind.width(n);
    let inputs: Vec<SiteId> = (0..w as u32).map(SiteId).collect();
    let mut circuit = AdaptiveCircuit::new(w as u32);
    let outputs = apply_cyclic(&mut circuit, kind, d, &inputs, mode, kind.name())?;
    Ok(GadgetCircuit {
        circuit,
        inputs,
        outputs,
        dims: vec![d; w],
    })
}

/// As [`cyclic_gadget`], failing with `TooLarge` if running it would exceed the amplitude cap.
pub fn cyclic_gadget_checked(kind: CyclicGadget, d: usize, n: usize, mode: GadgetMode) -> Result<GadgetCircuit> {
    let amps = peak_amplitudes(kind, d, n, mode);
    if amps > amp_cap() as u128 {
        return Err(Error::TooLarge(amps, amp_cap()));
    }
    cyclic_gadget(kind, d, n, mode)
}
