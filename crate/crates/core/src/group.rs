//! Finite groups given by multiplication tables, cyclic coset splits and
//! solvable chains.

use std::collections::BTreeSet;
use std::fmt;
use std::path::Path;

use crate::error::{Error, Result};

/// Largest order for which exhaustive group-law validation runs.
pub const MAX_VALIDATED_ORDER: usize = 48;

/// A finite group as a multiplication table. Element 0 is the identity.
#[derive(Clone, PartialEq, Eq)]
pub struct FiniteGroup {
    n: usize,
    mul: Vec<usize>,
    inv: Vec<usize>,
    labels: Vec<String>,
    name: String,
}

impl fmt::Debug for FiniteGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FiniteGroup({}, order {})", self.name, self.n)
    }
}

/// Group constructors.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GroupKind {
    Cyclic(usize),
    Symmetric(usize),
    Dihedral(usize),
    FromTable(String),
}

impl GroupKind {
    /// Parses names like `Z3`, `S3`, `D4` or a file path.
    pub fn parse(s: &str) -> Result<GroupKind> {
        let t = s.trim();
        let num = |rest: &str| rest.parse::<usize>().ok();
        if let Some(d) = t.strip_prefix('Z').and_then(num) {
            return Ok(GroupKind::Cyclic(d));
        }
        if let Some(n) = t.strip_prefix('S').and_then(num) {
            return Ok(GroupKind::Symmetric(n));
        }
        if let Some(n) = t.strip_prefix('D').and_then(num) {
            return Ok(GroupKind::Dihedral(n));
        }
        if Path::new(t).exists() {
            return Ok(GroupKind::FromTable(t.to_string()));
        }
        Err(Error::Parse {
            line: 0,
            msg: format!("unknown group spec '{t}'"),
        })
    }
}

pub fn build_group(kind: &GroupKind) -> Result<FiniteGroup> {
    match kind {
        GroupKind::Cyclic(d) => FiniteGroup::cyclic(*d),
        GroupKind::Symmetric(n) => FiniteGroup::symmetric(*n),
        GroupKind::Dihedral(n) => FiniteGroup::dihedral(*n),
        GroupKind::FromTable(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| Error::Io(e.to_string()))?;
            FiniteGroup::parse_table(&text)
        }
    }
}

fn table_err(reason: impl Into<String>, triple: Option<(usize, usize, usize)>) -> Error {
    Error::TableNotAGroup {
        reason: reason.into(),
        triple,
    }
}

impl FiniteGroup {
    /// Validates a table and builds the group.
    pub fn from_table(rows: Vec<Vec<usize>>, labels: Option<Vec<String>>, name: &str) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(table_err("empty table", None));
        }
        if n > MAX_VALIDATED_ORDER {
            return Err(table_err(format!("order {n} exceeds {MAX_VALIDATED_ORDER}"), None));
        }
        let mut mul = Vec::with_capacity(n * n);
        for (g, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(table_err(format!("row {g} has {} entries", row.len()), None));
            }
            for &x in row {
                if x >= n {
                    return Err(table_err(format!("entry {x} out of range in row {g}"), None));
                }
            }
            mul.extend_from_slice(row);
        }
        for g in 0..n {
            if mul[g] != g || mul[g * n] != g {
                return Err(table_err(format!("index 0 is not an identity for {g}"), Some((0, g, 0))));
            }
        }
        let mut inv = vec![usize::MAX; n];
        for g in 0..n {
            match (0..n).find(|&h| mul[g * n + h] == 0) {
                Some(h) if mul[h * n + g] == 0 => inv[g] = h,
                _ => return Err(table_err(format!("element {g} has no two-sided inverse"), Some((g, 0, 0)))),
            }
        }
        for a in 0..n {
            for b in 0..n {
                let ab = mul[a * n + b];
                for c in 0..n {
                    if mul[ab * n + c] != mul[a * n + mul[b * n + c]] {
                        return Err(table_err("associativity fails", Some((a, b, c))));
                    }
                }
            }
        }
        let labels = match labels {
            Some(l) if l.len() == n => l,
            _ => (0..n).map(|g| g.to_string()).collect(),
        };
        Ok(FiniteGroup {
            n,
            mul,
            inv,
            labels,
            name: name.to_string(),
        })
    }

    /// Parses the text table format: first line `n`, then `n` rows, optional `# label`.
    pub fn parse_table(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty() && !l.trim_start().starts_with('#'));
        let (ln, first) = lines.next().ok_or(Error::Parse {
            line: 1,
            msg: "missing order line".into(),
        })?;
        let n: usize = first.trim().parse().map_err(|_| Error::Parse {
            line: ln + 1,
            msg: format!("bad order '{}'", first.trim()),
        })?;
        let mut rows = Vec::with_capacity(n);
        let mut labels = Vec::with_capacity(n);
        for (ln, line) in lines.by_ref().take(n) {
            let (body, label) = match line.split_once('#') {
                Some((b, l)) => (b, Some(l.trim().to_string())),
                None => (line, None),
            };
            let row = body
                .split_whitespace()
                .map(|t| {
                    t.parse::<usize>().map_err(|_| Error::Parse {
                        line: ln + 1,
                        msg: format!("bad entry '{t}'"),
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            labels.push(label.unwrap_or_else(|| rows.len().to_string()));
            rows.push(row);
        }
        if rows.len() != n {
            return Err(Error::Parse {
                line: 0,
                msg: format!("expected {n} rows, found {}", rows.len()),
            });
        }
        if let Some((ln, _)) = lines.next() {
            return Err(Error::Parse {
                line: ln + 1,
                msg: "trailing rows".into(),
            });
        }
        FiniteGroup::from_table(rows, Some(labels), "table")
    }

    /// Serializes to the text table format.
    pub fn to_table_text(&self) -> String {
        let mut s = format!("{}\n", self.n);
        for g in 0..self.n {
            let row: Vec<String> = (0..self.n).map(|h| self.mul(g, h).to_string()).collect();
            s.push_str(&row.join(" "));
            s.push_str(&format!(" # {}\n", self.labels[g]));
        }
        s
    }

    pub fn cyclic(d: usize) -> Result<Self> {
        if d == 0 {
            return Err(table_err("cyclic group of order 0", None));
        }
        let rows = (0..d).map(|a| (0..d).map(|b| (a + b) % d).collect()).collect();
        let labels = (0..d).map(|a| a.to_string()).collect();
        FiniteGroup::from_table(rows, Some(labels), &format!("Z{d}"))
    }

    /// Symmetric group with `(gh)(x) = g(h(x))`. Elements are ordered by the
    /// number of moved points, then by cycle notation.
    pub fn symmetric(n: usize) -> Result<Self> {
        if n == 0 || n > 4 {
            return Err(table_err(format!("symmetric({n}) unsupported"), None));
        }
        let mut perms = permutations(n);
        perms.sort_by_key(|p| (p.iter().enumerate().filter(|(i, &x)| *i != x).count(), cycle_notation(p)));
        let index = |p: &Vec<usize>| perms.iter().position(|q| q == p).unwrap();
        let rows = perms
            .iter()
            .map(|g| {
                perms
                    .iter()
                    .map(|h| index(&(0..n).map(|x| g[h[x]]).collect()))
                    .collect()
            })
            .collect();
        let labels = perms.iter().map(|p| cycle_notation(p)).collect();
        FiniteGroup::from_table(rows, Some(labels), &format!("S{n}"))
    }

    /// Dihedral group of order `2n`; element `r^k s^m` has index `2k + m`.
    pub fn dihedral(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(table_err(format!("dihedral({n}) unsupported"), None));
        }
        let idx = |k: usize, m: usize| 2 * (k % n) + m;
        let mut rows = Vec::with_capacity(2 * n);
        let mut labels = Vec::with_capacity(2 * n);
        for a in 0..2 * n {
            let (k, m) = (a / 2, a % 2);
            let row = (0..2 * n)
                .map(|b| {
                    let (l, t) = (b / 2, b % 2);
                    let rot = if m == 0 { k + l } else { k + n - l };
                    idx(rot, (m + t) % 2)
                })
                .collect();
            rows.push(row);
            labels.push(match (k, m) {
                (0, 0) => "e".to_string(),
                (0, 1) => "s".to_string(),
                (1, 0) => "r".to_string(),
                (1, 1) => "rs".to_string(),
                (k, 0) => format!("r^{k}"),
                (k, _) => format!("r^{k}s"),
            });
        }
        FiniteGroup::from_table(rows, Some(labels), &format!("D{n}"))
    }

    pub fn order(&self) -> usize {
        self.n
    }

    pub fn identity(&self) -> usize {
        0
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    #[inline]
    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.mul[a * self.n + b]
    }

    #[inline]
    pub fn inv(&self, a: usize) -> usize {
        self.inv[a]
    }

    /// `a b a^{-1}`.
    #[inline]
    pub fn conj(&self, a: usize, b: usize) -> usize {
        self.mul(self.mul(a, b), self.inv[a])
    }

    /// `a^k` for a signed exponent.
    pub fn pow(&self, a: usize, k: i64) -> usize {
        let base = if k < 0 { self.inv[a] } else { a };
        let mut r = 0;
        for _ in 0..k.unsigned_abs() {
            r = self.mul(r, base);
        }
        r
    }

    /// Product of a sequence, left to right.
    pub fn product(&self, xs: &[usize]) -> usize {
        xs.iter().fold(0, |acc, &x| self.mul(acc, x))
    }

    pub fn element_order(&self, a: usize) -> usize {
        let mut x = a;
        let mut k = 1;
        while x != 0 {
            x = self.mul(x, a);
            k += 1;
        }
        k
    }

    pub fn label(&self, a: usize) -> &str {
        &self.labels[a]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    /// Finds an element by its label.
    pub fn find(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    pub fn is_abelian(&self) -> bool {
        (0..self.n).all(|a| (0..self.n).all(|b| self.mul(a, b) == self.mul(b, a)))
    }

    /// Row `g` of the table.
    pub fn row(&self, g: usize) -> &[usize] {
        &self.mul[g * self.n..(g + 1) * self.n]
    }

    /// Subgroup generated by a set, as a sorted element list.
    pub fn generated(&self, gens: &[usize]) -> Vec<usize> {
        let mut set: BTreeSet<usize> = BTreeSet::from([0]);
        let mut frontier = vec![0];
        while let Some(x) = frontier.pop() {
            for &g in gens {
                let y = self.mul(x, g);
                if set.insert(y) {
                    frontier.push(y);
                }
            }
        }
        set.into_iter().collect()
    }

    /// Smallest normal subgroup containing `elems`.
    pub fn normal_closure(&self, elems: &[usize]) -> Vec<usize> {
        let gens: Vec<usize> = elems
            .iter()
            .flat_map(|&x| (0..self.n).map(move |g| (g, x)))
            .map(|(g, x)| self.conj(g, x))
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        self.generated(&gens)
    }

    pub fn is_subgroup(&self, elems: &[usize]) -> bool {
        elems.contains(&0)
            && elems
                .iter()
                .all(|&a| elems.iter().all(|&b| elems.contains(&self.mul(a, self.inv[b]))))
    }

    pub fn is_normal(&self, elems: &[usize]) -> bool {
        self.is_subgroup(elems)
            && (0..self.n).all(|g| elems.iter().all(|&h| elems.contains(&self.conj(g, h))))
    }

    /// All normal subgroups, each sorted, in lexicographic order.
    pub fn normal_subgroups(&self) -> Vec<Vec<usize>> {
        let closures: BTreeSet<Vec<usize>> = (0..self.n).map(|g| self.normal_closure(&[g])).collect();
        let mut all: BTreeSet<Vec<usize>> = closures.clone();
        all.insert(vec![0]);
        loop {
            let mut added = false;
            let current: Vec<Vec<usize>> = all.iter().cloned().collect();
            for a in &current {
                for b in &closures {
                    let mut u = a.clone();
                    u.extend_from_slice(b);
                    let j = self.normal_closure(&u);
                    if all.insert(j) {
                        added = true;
                    }
                }
            }
            if !added {
                break;
            }
        }
        all.into_iter().collect()
    }

    /// The subgroup `elems` as a standalone group; local index `i` is `elems[i]`.
    pub fn restrict(&self, elems: &[usize], name: &str) -> Result<FiniteGroup> {
        if elems.first() != Some(&0) {
            return Err(table_err("subgroup list must start with the identity", None));
        }
        let pos = |g: usize| elems.iter().position(|&x| x == g);
        let rows = elems
            .iter()
            .map(|&a| {
                elems
                    .iter()
                    .map(|&b| pos(self.mul(a, b)).ok_or_else(|| table_err("subgroup not closed", Some((a, b, 0)))))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        let labels = elems.iter().map(|&g| self.labels[g].clone()).collect();
        FiniteGroup::from_table(rows, Some(labels), name)
    }
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for pos in 0..n {
            let mut q: Vec<usize> = p.clone();
            q.insert(pos, n - 1);
            out.push(q);
        }
    }
    out
}

/// Cycle notation with 1-based points, e.g. `(1 2 3)`; identity is `e`.
pub fn cycle_notation(p: &[usize]) -> String {
    let mut seen = vec![false; p.len()];
    let mut s = String::new();
    for start in 0..p.len() {
        if seen[start] || p[start] == start {
            continue;
        }
        let mut cyc = vec![start + 1];
        seen[start] = true;
        let mut x = p[start];
        while x != start {
            seen[x] = true;
            cyc.push(x + 1);
            x = p[x];
        }
        let body: Vec<String> = cyc.iter().map(|c| c.to_string()).collect();
        s.push_str(&format!("({})", body.join(" ")));
    }
    if s.is_empty() {
        "e".to_string()
    } else {
        s
    }
}

/// The split `g = a^j h` of a group over a normal subgroup with cyclic quotient.
#[derive(Debug, Clone)]
pub struct CosetSplit {
    /// Sorted elements of `H`; position in this list is the local index of `h`.
    pub subgroup: Vec<usize>,
    pub generator: usize,
    pub quotient_order: usize,
    split: Vec<(usize, usize)>,
    merge: Vec<usize>,
}

impl CosetSplit {
    /// Builds the split; fails if the cosets `a^j H` do not exhaust `G`.
    pub fn new(g: &FiniteGroup, subgroup: &[usize], a: usize) -> Result<CosetSplit> {
        let mut h: Vec<usize> = subgroup.to_vec();
        h.sort_unstable();
        h.dedup();
        if !g.is_normal(&h) {
            return Err(Error::NotCyclicQuotient("subgroup is not normal".into()));
        }
        let n = g.order();
        if n % h.len() != 0 {
            return Err(Error::NotCyclicQuotient("index mismatch".into()));
        }
        let d = n / h.len();
        let mut split = vec![(usize::MAX, usize::MAX); n];
        let mut merge = vec![usize::MAX; n];
        let mut aj = 0;
        for j in 0..d {
            for (hp, &hh) in h.iter().enumerate() {
                let x = g.mul(aj, hh);
                if split[x].0 != usize::MAX {
                    return Err(Error::NotCyclicQuotient(format!(
                        "powers of the coset of {} do not enumerate G/H",
                        g.label(a)
                    )));
                }
                split[x] = (j, hp);
                merge[j * h.len() + hp] = x;
            }
            aj = g.mul(aj, a);
        }
        Ok(CosetSplit {
            subgroup: h,
            generator: a,
            quotient_order: d,
            split,
            merge,
        })
    }

    /// `g ↦ (j, local index of h)`.
    #[inline]
    pub fn split(&self, g: usize) -> (usize, usize) {
        self.split[g]
    }

    /// `(j, local h) ↦ a^j h`.
    #[inline]
    pub fn merge(&self, j: usize, hp: usize) -> usize {
        self.merge[j * self.subgroup.len() + hp]
    }

    /// The element `h` (as a group element) of the split.
    pub fn h_element(&self, g: usize) -> usize {
        self.subgroup[self.split[g].1]
    }

    pub fn h_order(&self) -> usize {
        self.subgroup.len()
    }

    /// Local index of an element of `H`.
    pub fn h_pos(&self, h: usize) -> Option<usize> {
        self.subgroup.binary_search(&h).ok()
    }
}

/// One stage `G_i ⊵ H_i` with cyclic quotient of order `d_i`.
#[derive(Debug, Clone)]
pub struct ChainStage {
    pub group: FiniteGroup,
    pub split: CosetSplit,
}

impl ChainStage {
    pub fn d(&self) -> usize {
        self.split.quotient_order
    }

    pub fn generator(&self) -> usize {
        self.split.generator
    }

    /// `H_i` as a standalone group (local indices match `split.subgroup` positions).
    pub fn subgroup_group(&self) -> FiniteGroup {
        self.group
            .restrict(&self.split.subgroup, &format!("{}'", self.group.name()))
            .expect("subgroup of a validated group")
    }
}

/// Chain `G = G_0 ⊵ G_1 ⊵ … ⊵ {e}`; stage `i+1` acts on `H_i` with local indices.
#[derive(Debug, Clone)]
pub struct SolvableChain {
    pub stages: Vec<ChainStage>,
}

impl SolvableChain {
    pub fn quotient_orders(&self) -> Vec<usize> {
        self.stages.iter().map(|s| s.d()).collect()
    }
}

/// Picks a normal subgroup with cyclic quotient, preferring split extensions (a coset
/// generator with `a^d = e`), then the largest quotient, then the lexicographically
/// smallest element set. The generator is the smallest-index valid one, split first.
/// Recurses to the trivial group.
pub fn solvable_chain(g: &FiniteGroup) -> Result<SolvableChain> {
    let mut stages = Vec::new();
    let mut cur = g.clone();
    while cur.order() > 1 {
        let mut best: Option<(bool, usize, Vec<usize>, usize)> = None;
        for h in cur.normal_subgroups() {
            if h.len() == cur.order() {
                continue;
            }
            let d = cur.order() / h.len();
            let valid: Vec<usize> = (0..cur.order())
                .filter(|&a| !h.contains(&a) && CosetSplit::new(&cur, &h, a).is_ok())
                .collect();
            let split_gen = valid.iter().copied().find(|&a| cur.pow(a, d as i64) == cur.identity());
            if let Some(a) = split_gen.or(valid.first().copied()) {
                let split = split_gen.is_some();
                let better = match &best {
                    None => true,
                    Some((bs, bd, bh, _)) => (split, d) > (*bs, *bd) || ((split, d) == (*bs, *bd) && h < *bh),
                };
                if better {
                    best = Some((split, d, h, a));
                }
            }
        }
        let (_, _, h, a) = best.ok_or(Error::NotSolvable(cur.order()))?;
        let split = CosetSplit::new(&cur, &h, a)?;
        let next = cur.restrict(&h, &format!("{}'", cur.name()))?;
        stages.push(ChainStage { group: cur, split });
        cur = next;
    }
    Ok(SolvableChain { stages })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cyclic_mul() {
        let g = FiniteGroup::cyclic(3).unwrap();
        assert_eq!(g.mul(1, 2), 0);
    }

    #[test]
    fn s3_labels() {
        let g = FiniteGroup::symmetric(3).unwrap();
        let l: Vec<&str> = (0..6).map(|i| g.label(i)).collect();
        assert_eq!(l, ["e", "(1 2)", "(1 3)", "(2 3)", "(1 2 3)", "(1 3 2)"]);
    }

    #[test]
    fn dihedral_relations() {
        let g = FiniteGroup::dihedral(4).unwrap();
        let (r, s) = (2, 1);
        assert_eq!(g.element_order(r), 4);
        assert_eq!(g.element_order(s), 2);
        assert_eq!(g.mul(g.mul(s, r), s), g.inv(r));
        assert_eq!(g.mul(r, s), 3);
    }

    #[test]
    fn table_round_trip() {
        let g = FiniteGroup::symmetric(3).unwrap();
        let h = FiniteGroup::parse_table(&g.to_table_text()).unwrap();
        assert_eq!(g.mul, h.mul);
        assert_eq!(g.labels, h.labels);
    }
}
