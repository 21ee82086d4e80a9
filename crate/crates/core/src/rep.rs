//! Conjugacy classes, centralizers and unitary irreducible representations.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::group::FiniteGroup;

pub type CMatrix = DMatrix<Complex64>;

/// Largest entry modulus.
pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Tolerance used by irrep validation.
pub const IRREP_TOL: f64 = 1e-9;

/// A conjugacy class `C` with representative, centralizer and transversal.
#[derive(Debug, Clone)]
pub struct ConjugacyClass {
    /// `c_1 … c_{|C|}` in increasing index order; `c_1 = r_C`.
    pub elements: Vec<usize>,
    /// Sorted elements of `E(C)`, the centralizer of `r_C`.
    pub centralizer: Vec<usize>,
    /// `p_j` with `c_j = p_j r_C p_j^{-1}`, `p_1 = e`.
    pub transversal: Vec<usize>,
}

impl ConjugacyClass {
    pub fn representative(&self) -> usize {
        self.elements[0]
    }

    pub fn size(&self) -> usize {
        self.elements.len()
    }

    pub fn position_of(&self, c: usize) -> Option<usize> {
        self.elements.iter().position(|&x| x == c)
    }

    /// `g ↦ (j, k)` with `g = p_j k`, `k ∈ E(C)`.
    pub fn position(&self, g: &FiniteGroup, x: usize) -> (usize, usize) {
        let c = g.conj(x, self.representative());
        let j = self.position_of(c).expect("conjugate lies in the class");
        (j, g.mul(g.inv(self.transversal[j]), x))
    }

    pub fn in_centralizer(&self, k: usize) -> bool {
        self.centralizer.binary_search(&k).is_ok()
    }
}

/// All classes of a group plus the map `y ↦ (C(y), j(y))`.
#[derive(Debug, Clone)]
pub struct ClassData {
    pub classes: Vec<ConjugacyClass>,
    class_of: Vec<(usize, usize)>,
}

impl ClassData {
    /// `y ↦ (class index, j)` with `y = p_j r_C p_j^{-1}`.
    pub fn class_of(&self, y: usize) -> (usize, usize) {
        self.class_of[y]
    }

    pub fn max_class_size(&self) -> usize {
        self.classes.iter().map(|c| c.size()).max().unwrap_or(1)
    }
}

pub fn conjugacy_classes(g: &FiniteGroup) -> ClassData {
    let n = g.order();
    let mut class_of = vec![(usize::MAX, 0); n];
    let mut classes = Vec::new();
    for r in 0..n {
        if class_of[r].0 != usize::MAX {
            continue;
        }
        let mut elements: Vec<usize> = (0..n).map(|x| g.conj(x, r)).collect();
        elements.sort_unstable();
        elements.dedup();
        let transversal: Vec<usize> = elements
            .iter()
            .map(|&c| (0..n).find(|&x| g.conj(x, r) == c).unwrap())
            .collect();
        let centralizer: Vec<usize> = (0..n).filter(|&x| g.mul(x, r) == g.mul(r, x)).collect();
        let ci = classes.len();
        for (j, &c) in elements.iter().enumerate() {
            class_of[c] = (ci, j);
        }
        classes.push(ConjugacyClass {
            elements,
            centralizer,
            transversal,
        });
    }
    ClassData { classes, class_of }
}

/// A unitary irrep of a subgroup `K ≤ G` (possibly `K = G`), indexed by global element.
#[derive(Debug, Clone)]
pub struct Irrep {
    pub name: String,
    pub dim: usize,
    /// Sorted elements of `K` (global indices).
    pub elements: Vec<usize>,
    matrices: Vec<CMatrix>,
    lookup: Vec<Option<usize>>,
}

impl Irrep {
    /// Builds from matrices listed in the order of `elements`.
    pub fn new(name: &str, parent_order: usize, elements: Vec<usize>, matrices: Vec<CMatrix>) -> Irrep {
        let dim = matrices.first().map(|m| m.nrows()).unwrap_or(1);
        let mut lookup = vec![None; parent_order];
        for (i, &g) in elements.iter().enumerate() {
            lookup[g] = Some(i);
        }
        Irrep {
            name: name.to_string(),
            dim,
            elements,
            matrices,
            lookup,
        }
    }

    pub fn contains(&self, g: usize) -> bool {
        self.lookup.get(g).copied().flatten().is_some()
    }

    pub fn try_gamma(&self, g: usize) -> Result<&CMatrix> {
        self.lookup
            .get(g)
            .copied()
            .flatten()
            .map(|i| &self.matrices[i])
            .ok_or(Error::ElementNotInGroup(g))
    }

    /// `Γ(g)`; panics if `g` is outside the represented subgroup.
    pub fn gamma(&self, g: usize) -> &CMatrix {
        self.try_gamma(g).expect("element in irrep domain")
    }

    /// `Γ(g)^{-1} = Γ(g)^†`.
    pub fn gamma_inv(&self, g: usize) -> CMatrix {
        self.gamma(g).adjoint()
    }

    pub fn character(&self, g: usize) -> Result<Complex64> {
        Ok(self.try_gamma(g)?.trace())
    }

    pub fn is_trivial(&self) -> bool {
        self.dim == 1 && self.matrices.iter().all(|m| (m[(0, 0)] - Complex64::new(1.0, 0.0)).norm() < IRREP_TOL)
    }

    /// Copy with one matrix entry perturbed.
    pub fn perturbed(&self, elem_pos: usize, row: usize, col: usize, delta: Complex64) -> Irrep {
        let mut c = self.clone();
        c.matrices[elem_pos][(row, col)] += delta;
        c
    }
}

/// Outcome of [`verify_irrep`].
#[derive(Debug, Clone, PartialEq)]
pub struct IrrepReport {
    pub homomorphism: f64,
    pub unitarity: f64,
    pub schur: f64,
    pub max_violation: f64,
    pub failed: Option<String>,
}

impl IrrepReport {
    pub fn passed(&self) -> bool {
        self.failed.is_none()
    }
}

/// Checks homomorphism, unitarity and Schur orthogonality within [`IRREP_TOL`].
pub fn verify_irrep(g: &FiniteGroup, pi: &Irrep) -> IrrepReport {
    let els = &pi.elements;
    let mut hom: f64 = 0.0;
    let mut closed = true;
    for &a in els {
        for &b in els {
            match pi.try_gamma(g.mul(a, b)) {
                Ok(m) => hom = hom.max(max_abs(&(pi.gamma(a) * pi.gamma(b) - m))),
                Err(_) => closed = false,
            }
        }
    }
    let id = CMatrix::identity(pi.dim, pi.dim);
    let unit = els
        .iter()
        .map(|&a| max_abs(&(pi.gamma(a).adjoint() * pi.gamma(a) - &id)))
        .fold(0.0, f64::max);
    let mut schur: f64 = 0.0;
    let scale = els.len() as f64 / pi.dim as f64;
    for k in 0..pi.dim {
        for l in 0..pi.dim {
            for s in 0..pi.dim {
                for t in 0..pi.dim {
                    let sum: Complex64 = els.iter().map(|&a| pi.gamma(a)[(k, l)] * pi.gamma(a)[(s, t)].conj()).sum();
                    let want = if k == s && l == t { scale } else { 0.0 };
                    schur = schur.max((sum - Complex64::new(want, 0.0)).norm() / scale);
                }
            }
        }
    }
    let failed = if !closed {
        Some("closure".to_string())
    } else if hom > IRREP_TOL {
        Some("homomorphism".to_string())
    } else if unit > IRREP_TOL {
        Some("unitarity".to_string())
    } else if schur > IRREP_TOL {
        Some("schur orthogonality".to_string())
    } else {
        None
    };
    IrrepReport {
        homomorphism: hom,
        unitarity: unit,
        schur,
        max_violation: hom.max(unit).max(schur),
        failed,
    }
}

/// Cross-orthogonality and completeness of a full irrep set.
pub fn verify_irrep_set(g: &FiniteGroup, set: &[Irrep]) -> Result<f64> {
    let Some(first) = set.first() else {
        return Err(Error::IncompleteIrrepSet { got: 0, want: 0 });
    };
    let order = first.elements.len();
    let got: usize = set.iter().map(|p| p.dim * p.dim).sum();
    if got != order {
        return Err(Error::IncompleteIrrepSet { got, want: order });
    }
    let mut worst: f64 = 0.0;
    for p in set {
        let r = verify_irrep(g, p);
        if let Some(inv) = r.failed {
            return Err(Error::IrrepValidationFailure {
                invariant: format!("{}: {inv}", p.name),
                violation: r.max_violation,
            });
        }
        worst = worst.max(r.max_violation);
    }
    for (i, p) in set.iter().enumerate() {
        for q in &set[i + 1..] {
            let s: Complex64 = p
                .elements
                .iter()
                .map(|&a| p.character(a).unwrap() * q.character(a).unwrap().conj())
                .sum();
            let v = s.norm() / order as f64;
            if v > IRREP_TOL {
                return Err(Error::IrrepValidationFailure {
                    invariant: format!("character orthogonality {} vs {}", p.name, q.name),
                    violation: v,
                });
            }
            worst = worst.max(v);
        }
    }
    Ok(worst)
}

fn scalar(z: Complex64) -> CMatrix {
    CMatrix::from_element(1, 1, z)
}

fn root_of_unity(k: i64, n: usize) -> Complex64 {
    let t = 2.0 * std::f64::consts::PI * (k.rem_euclid(n as i64) as f64) / n as f64;
    Complex64::from_polar(1.0, t)
}

/// All characters of an abelian subgroup `elems ≤ g`.
pub fn abelian_characters(g: &FiniteGroup, elems: &[usize]) -> Result<Vec<Irrep>> {
    let mut elems = elems.to_vec();
    elems.sort_unstable();
    for &a in &elems {
        for &b in &elems {
            if g.mul(a, b) != g.mul(b, a) {
                return Err(Error::MissingIrreps(elems.len()));
            }
        }
    }
    let mut gens: Vec<usize> = Vec::new();
    let mut span = vec![0usize];
    while span.len() < elems.len() {
        let next = elems
            .iter()
            .copied()
            .filter(|x| !span.contains(x))
            .max_by_key(|&x| (g.element_order(x), std::cmp::Reverse(x)))
            .unwrap();
        gens.push(next);
        span = g.generated(&gens);
    }
    let orders: Vec<usize> = gens.iter().map(|&x| g.element_order(x)).collect();
    // Exponent words: BFS from the identity.
    let mut word: Vec<Option<Vec<usize>>> = vec![None; g.order()];
    word[0] = Some(vec![0; gens.len()]);
    let mut queue = std::collections::VecDeque::from([0usize]);
    while let Some(x) = queue.pop_front() {
        for (i, &s) in gens.iter().enumerate() {
            let y = g.mul(x, s);
            if word[y].is_none() {
                let mut w = word[x].clone().unwrap();
                w[i] += 1;
                word[y] = Some(w);
                queue.push_back(y);
            }
        }
    }
    let total: usize = orders.iter().product();
    let mut out = Vec::new();
    for code in 0..total {
        let mut a = Vec::with_capacity(gens.len());
        let mut c = code;
        for &o in orders.iter().rev() {
            a.push(c % o);
            c /= o;
        }
        a.reverse();
        let value = |x: usize| -> Complex64 {
            let w = word[x].as_ref().unwrap();
            w.iter()
                .zip(&a)
                .zip(&orders)
                .map(|((&e, &ai), &o)| root_of_unity((e * ai) as i64, o))
                .product()
        };
        let hom = elems
            .iter()
            .all(|&x| elems.iter().all(|&y| (value(x) * value(y) - value(g.mul(x, y))).norm() < 1e-9));
        if hom {
            let mats = elems.iter().map(|&x| scalar(value(x))).collect();
            out.push(Irrep::new(&format!("chi{}", out.len()), g.order(), elems.clone(), mats));
        }
    }
    if out.len() != elems.len() {
        return Err(Error::IncompleteIrrepSet {
            got: out.len(),
            want: elems.len(),
        });
    }
    Ok(out)
}

fn parse_cycles(label: &str, n: usize) -> Option<Vec<usize>> {
    let mut p: Vec<usize> = (0..n).collect();
    if label == "e" {
        return Some(p);
    }
    for cyc in label.split(')').filter(|s| !s.is_empty()) {
        let pts: Vec<usize> = cyc
            .trim_start_matches('(')
            .split_whitespace()
            .map(|t| t.parse::<usize>().ok().map(|v| v - 1))
            .collect::<Option<Vec<_>>>()?;
        for w in 0..pts.len() {
            p[pts[w]] = pts[(w + 1) % pts.len()];
        }
    }
    Some(p)
}

fn s3_irreps(g: &FiniteGroup) -> Result<Vec<Irrep>> {
    let perms: Vec<Vec<usize>> = (0..6)
        .map(|x| parse_cycles(g.label(x), 3).ok_or(Error::MissingIrreps(6)))
        .collect::<Result<_>>()?;
    let elems: Vec<usize> = (0..6).collect();
    let sign = |p: &Vec<usize>| {
        let moved = p.iter().enumerate().filter(|(i, &x)| *i != x).count();
        if moved == 2 {
            -1.0
        } else {
            1.0
        }
    };
    let s = 1.0 / 6f64.sqrt();
    let e1 = [(2.0f64 / 3.0).sqrt(), -s, -s];
    let e2 = [0.0, 1.0 / 2f64.sqrt(), -1.0 / 2f64.sqrt()];
    let basis = [e1, e2];
    let two = perms
        .iter()
        .map(|p| {
            // P(k) e_j = e_{k(j)}.
            let act = |v: &[f64; 3]| {
                let mut w = [0.0; 3];
                for j in 0..3 {
                    w[p[j]] += v[j];
                }
                w
            };
            CMatrix::from_fn(2, 2, |a, b| {
                let w = act(&basis[b]);
                Complex64::new((0..3).map(|i| basis[a][i] * w[i]).sum(), 0.0)
            })
        })
        .collect();
    Ok(vec![
        Irrep::new("trivial", 6, elems.clone(), (0..6).map(|_| scalar(Complex64::new(1.0, 0.0))).collect()),
        Irrep::new("sign", 6, elems.clone(), perms.iter().map(|p| scalar(Complex64::new(sign(p), 0.0))).collect()),
        Irrep::new("standard", 6, elems, two),
    ])
}

fn d4_irreps() -> Vec<Irrep> {
    let elems: Vec<usize> = (0..8).collect();
    let mut out = Vec::new();
    for (name, sr, ss) in [("trivial", 1.0, 1.0), ("chi_s", 1.0, -1.0), ("chi_r", -1.0, 1.0), ("chi_rs", -1.0, -1.0)] {
        let mats = elems
            .iter()
            .map(|&x| {
                let (k, m) = (x / 2, x % 2);
                scalar(Complex64::new(f64::powi(sr, k as i32) * f64::powi(ss, m as i32), 0.0))
            })
            .collect();
        out.push(Irrep::new(name, 8, elems.clone(), mats));
    }
    let c = |v: f64| Complex64::new(v, 0.0);
    let r = CMatrix::from_row_slice(2, 2, &[c(0.0), c(-1.0), c(1.0), c(0.0)]);
    let s = CMatrix::from_row_slice(2, 2, &[c(1.0), c(0.0), c(0.0), c(-1.0)]);
    let mats = elems
        .iter()
        .map(|&x| {
            let (k, m) = (x / 2, x % 2);
            let mut a = CMatrix::identity(2, 2);
            for _ in 0..k {
                a = &a * &r;
            }
            if m == 1 {
                a = &a * &s;
            }
            a
        })
        .collect();
    out.push(Irrep::new("standard", 8, elems, mats));
    out
}

/// Built-in complete irrep sets for abelian groups, `S3` and `D4`.
pub fn builtin_irreps(g: &FiniteGroup) -> Result<Vec<Irrep>> {
    let all: Vec<usize> = (0..g.order()).collect();
    let set = if g.is_abelian() {
        abelian_characters(g, &all)?
    } else if g.name() == "S3" {
        s3_irreps(g)?
    } else if g.name() == "D4" {
        d4_irreps()
    } else {
        return Err(Error::MissingIrreps(g.order()));
    };
    verify_irrep_set(g, &set)?;
    Ok(set)
}

/// Parses one irrep file block set: header `group=<file> dim=d name=<s>`, then `|G|`
/// blocks of `d` rows of `d` entries `re,im`.
pub fn parse_irrep_file(text: &str, g: &FiniteGroup) -> Result<Irrep> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (_, header) = lines.next().ok_or(Error::Parse {
        line: 1,
        msg: "missing header".into(),
    })?;
    let mut dim = None;
    let mut name = String::from("irrep");
    for tok in header.split_whitespace() {
        match tok.split_once('=') {
            Some(("dim", v)) => dim = v.parse::<usize>().ok(),
            Some(("name", v)) => name = v.to_string(),
            Some(("group", _)) => {}
            _ => {
                return Err(Error::Parse {
                    line: 1,
                    msg: format!("bad header token '{tok}'"),
                })
            }
        }
    }
    let d = dim.ok_or(Error::Parse {
        line: 1,
        msg: "missing dim".into(),
    })?;
    let mut mats = Vec::with_capacity(g.order());
    for _ in 0..g.order() {
        let mut m = CMatrix::zeros(d, d);
        for r in 0..d {
            let (ln, line) = lines.next().ok_or(Error::Parse {
                line: 0,
                msg: "truncated matrix block".into(),
            })?;
            let entries: Vec<&str> = line.split_whitespace().collect();
            if entries.len() != d {
                return Err(Error::Parse {
                    line: ln + 1,
                    msg: format!("expected {d} entries"),
                });
            }
            for (c, e) in entries.iter().enumerate() {
                let (re, im) = e.split_once(',').ok_or(Error::Parse {
                    line: ln + 1,
                    msg: format!("bad entry '{e}'"),
                })?;
                let p = |s: &str| {
                    s.parse::<f64>().map_err(|_| Error::Parse {
                        line: ln + 1,
                        msg: format!("bad number '{s}'"),
                    })
                };
                m[(r, c)] = Complex64::new(p(re)?, p(im)?);
            }
        }
        mats.push(m);
    }
    Ok(Irrep::new(&name, g.order(), (0..g.order()).collect(), mats))
}

/// An anyon type `(C, π)` as indices into an [`AnyonModel`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AnyonLabel {
    pub class: usize,
    pub irrep: usize,
}

/// Classes of `G` together with the irreps of every centralizer.
#[derive(Debug, Clone)]
pub struct AnyonModel {
    pub group: FiniteGroup,
    pub classes: ClassData,
    /// `centralizer_irreps[c]` lists the irreps of `E(C_c)`, trivial first.
    pub centralizer_irreps: Vec<Vec<Irrep>>,
}

impl AnyonModel {
    /// `group_irreps` is used for centralizers equal to `G`; abelian centralizers
    /// get generated characters.
    pub fn new(g: &FiniteGroup, group_irreps: Option<Vec<Irrep>>) -> Result<AnyonModel> {
        let classes = conjugacy_classes(g);
        let group_irreps = match group_irreps {
            Some(s) => Some(s),
            None => builtin_irreps(g).ok(),
        };
        let mut centralizer_irreps = Vec::new();
        for c in &classes.classes {
            let set = if c.centralizer.len() == g.order() {
                group_irreps.clone().ok_or(Error::MissingIrreps(g.order()))?
            } else {
                abelian_characters(g, &c.centralizer)?
            };
            centralizer_irreps.push(set);
        }
        Ok(AnyonModel {
            group: g.clone(),
            classes,
            centralizer_irreps,
        })
    }

    pub fn labels(&self) -> Vec<AnyonLabel> {
        self.centralizer_irreps
            .iter()
            .enumerate()
            .flat_map(|(c, s)| (0..s.len()).map(move |i| AnyonLabel { class: c, irrep: i }))
            .collect()
    }

    pub fn class(&self, a: AnyonLabel) -> &ConjugacyClass {
        &self.classes.classes[a.class]
    }

    pub fn irrep(&self, a: AnyonLabel) -> &Irrep {
        &self.centralizer_irreps[a.class][a.irrep]
    }

    pub fn trivial(&self) -> AnyonLabel {
        AnyonLabel { class: 0, irrep: 0 }
    }

    /// Finds the label with class containing `rep` and irrep named `name`.
    pub fn find(&self, rep: usize, name: &str) -> Option<AnyonLabel> {
        let (c, _) = self.classes.class_of(rep);
        self.centralizer_irreps[c]
            .iter()
            .position(|p| p.name == name)
            .map(|i| AnyonLabel { class: c, irrep: i })
    }

    pub fn describe(&self, a: AnyonLabel) -> String {
        let c = self.class(a);
        format!("({}, {})", self.group.label(c.representative()), self.irrep(a).name)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn s3_transposition_matrix() {
        let g = FiniteGroup::symmetric(3).unwrap();
        let irr = builtin_irreps(&g).unwrap();
        let m = irr[2].gamma(g.find("(1 2)").unwrap());
        let h = 3f64.sqrt() / 2.0;
        let want = [[-0.5, h], [h, 0.5]];
        for a in 0..2 {
            for b in 0..2 {
                assert!((m[(a, b)].re - want[a][b]).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn d4_complete() {
        let g = FiniteGroup::dihedral(4).unwrap();
        assert_eq!(builtin_irreps(&g).unwrap().len(), 5);
    }

    #[test]
    fn cycle_parse() {
        assert_eq!(parse_cycles("(1 2 3)", 3), Some(vec![1, 2, 0]));
    }
}
