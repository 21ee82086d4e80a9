//! Planar square lattices with smooth boundaries, spanning trees and ribbons.
//!
//! Vertex `(r, c)` has index `r (cols + 1) + c` with `r = 0` the bottom row.
//! Horizontal edges point right and come first; vertical edges point up.

use std::collections::VecDeque;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Edge {
    pub tail: usize,
    pub head: usize,
}

/// One step of a plaquette walk: the edge and whether it is traversed along its orientation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WalkStep {
    pub edge: usize,
    pub forward: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Plaquette {
    /// Corners counterclockwise from the lower-left.
    pub corners: [usize; 4],
    /// `steps[i]` goes from `corners[i]` to `corners[(i + 1) % 4]`.
    pub steps: [WalkStep; 4],
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Face {
    Plaquette(usize),
    Outer,
}

/// A site `(v, p)` with `v` on the boundary of face `p`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Site {
    pub vertex: usize,
    pub face: Face,
}

#[derive(Debug, Clone)]
pub struct PlanarLattice {
    pub rows: usize,
    pub cols: usize,
    pub edges: Vec<Edge>,
    pub plaquettes: Vec<Plaquette>,
}

impl PlanarLattice {
    pub fn num_vertices(&self) -> usize {
        (self.rows + 1) * (self.cols + 1)
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn num_plaquettes(&self) -> usize {
        self.plaquettes.len()
    }

    pub fn vertex(&self, r: usize, c: usize) -> usize {
        r * (self.cols + 1) + c
    }

    pub fn coords(&self, v: usize) -> (usize, usize) {
        (v / (self.cols + 1), v % (self.cols + 1))
    }

    /// Edge from `(r, c)` to `(r, c + 1)`.
    pub fn horizontal(&self, r: usize, c: usize) -> usize {
        r * self.cols + c
    }

    /// Edge from `(r, c)` to `(r + 1, c)`.
    pub fn vertical(&self, r: usize, c: usize) -> usize {
        (self.rows + 1) * self.cols + r * (self.cols + 1) + c
    }

    pub fn plaquette(&self, r: usize, c: usize) -> usize {
        r * self.cols + c
    }

    /// Incident edges of `v` in increasing index order.
    pub fn incident(&self, v: usize) -> Vec<usize> {
        (0..self.edges.len())
            .filter(|&e| self.edges[e].tail == v || self.edges[e].head == v)
            .collect()
    }

    /// Faces on either side of an edge: `(left, right)` relative to its orientation.
    pub fn faces_of_edge(&self, e: usize) -> (Face, Face) {
        let mut left = Face::Outer;
        let mut right = Face::Outer;
        for (p, pl) in self.plaquettes.iter().enumerate() {
            for s in &pl.steps {
                if s.edge == e {
                    // Counterclockwise walks keep the plaquette on the left.
                    if s.forward {
                        left = Face::Plaquette(p);
                    } else {
                        right = Face::Plaquette(p);
                    }
                }
            }
        }
        (left, right)
    }

    /// Walk of plaquette `p` rotated to start at corner `v`.
    pub fn walk_from(&self, p: usize, v: usize) -> Result<Vec<WalkStep>> {
        let pl = &self.plaquettes[p];
        let i = pl
            .corners
            .iter()
            .position(|&c| c == v)
            .ok_or_else(|| Error::InvalidSite(format!("vertex {v} is not a corner of plaquette {p}")))?;
        Ok((0..4).map(|k| pl.steps[(i + k) % 4]).collect())
    }

    pub fn check_site(&self, s: Site) -> Result<()> {
        if s.vertex >= self.num_vertices() {
            return Err(Error::InvalidSite(format!("vertex {} out of range", s.vertex)));
        }
        if let Face::Plaquette(p) = s.face {
            if p >= self.plaquettes.len() || !self.plaquettes[p].corners.contains(&s.vertex) {
                return Err(Error::InvalidSite(format!("vertex {} not on plaquette {p}", s.vertex)));
            }
        }
        Ok(())
    }

    /// All sites `(v, p)` with `p` a bounded plaquette.
    pub fn sites(&self) -> Vec<Site> {
        let mut out = Vec::new();
        for (p, pl) in self.plaquettes.iter().enumerate() {
            for &v in &pl.corners {
                out.push(Site {
                    vertex: v,
                    face: Face::Plaquette(p),
                });
            }
        }
        out
    }

    /// The edge joining `u` and `w`, if any.
    pub fn edge_between(&self, u: usize, w: usize) -> Option<usize> {
        self.edges
            .iter()
            .position(|e| (e.tail == u && e.head == w) || (e.tail == w && e.head == u))
    }
}

pub fn square_lattice(rows: usize, cols: usize) -> Result<PlanarLattice> {
    if rows == 0 || cols == 0 {
        return Err(Error::InvalidSite("rows and cols must be at least 1".into()));
    }
    let mut lat = PlanarLattice {
        rows,
        cols,
        edges: Vec::new(),
        plaquettes: Vec::new(),
    };
    for r in 0..=rows {
        for c in 0..cols {
            lat.edges.push(Edge {
                tail: lat.vertex(r, c),
                head: lat.vertex(r, c + 1),
            });
        }
    }
    for r in 0..rows {
        for c in 0..=cols {
            lat.edges.push(Edge {
                tail: lat.vertex(r, c),
                head: lat.vertex(r + 1, c),
            });
        }
    }
    for r in 0..rows {
        for c in 0..cols {
            let corners = [
                lat.vertex(r, c),
                lat.vertex(r, c + 1),
                lat.vertex(r + 1, c + 1),
                lat.vertex(r + 1, c),
            ];
            let steps = [
                WalkStep {
                    edge: lat.horizontal(r, c),
                    forward: true,
                },
                WalkStep {
                    edge: lat.vertical(r, c + 1),
                    forward: true,
                },
                WalkStep {
                    edge: lat.horizontal(r + 1, c),
                    forward: false,
                },
                WalkStep {
                    edge: lat.vertical(r, c),
                    forward: false,
                },
            ];
            lat.plaquettes.push(Plaquette { corners, steps });
        }
    }
    Ok(lat)
}

/// Breadth-first tree with root paths and traversal signs.
#[derive(Debug, Clone)]
pub struct SpanningTreeData {
    pub root: usize,
    /// `paths[v]` lists the edges of `Γ_v` from the root to `v`.
    pub paths: Vec<Vec<usize>>,
    /// `signs[v][e] ∈ {+1, -1, 0}`.
    pub signs: Vec<Vec<i8>>,
}

pub fn spanning_tree(lat: &PlanarLattice, root: usize) -> Result<SpanningTreeData> {
    let nv = lat.num_vertices();
    if root >= nv {
        return Err(Error::InvalidSite(format!("root {root} out of range")));
    }
    let mut parent: Vec<Option<(usize, usize)>> = vec![None; nv];
    let mut seen = vec![false; nv];
    seen[root] = true;
    let mut order = vec![root];
    let mut q = VecDeque::from([root]);
    while let Some(u) = q.pop_front() {
        for e in lat.incident(u) {
            let Edge { tail, head } = lat.edges[e];
            let w = if tail == u { head } else { tail };
            if !seen[w] {
                seen[w] = true;
                parent[w] = Some((u, e));
                order.push(w);
                q.push_back(w);
            }
        }
    }
    if order.len() != nv {
        return Err(Error::Disconnected);
    }
    let ne = lat.num_edges();
    let mut paths = vec![Vec::new(); nv];
    let mut signs = vec![vec![0i8; ne]; nv];
    for &v in &order[1..] {
        let (u, e) = parent[v].unwrap();
        let mut p = paths[u].clone();
        p.push(e);
        let mut s = signs[u].clone();
        s[e] = if lat.edges[e].head == v { 1 } else { -1 };
        paths[v] = p;
        signs[v] = s;
    }
    Ok(SpanningTreeData { root, paths, signs })
}

/// Tree on the dual graph rooted at the outer face.
#[derive(Debug, Clone)]
pub struct DualTree {
    /// For each plaquette: the parent face and the shared edge.
    pub parent: Vec<(Face, usize)>,
    /// Plaquettes in breadth-first order from the outer face.
    pub order: Vec<usize>,
}

pub fn dual_tree(lat: &PlanarLattice) -> DualTree {
    let np = lat.num_plaquettes();
    let mut parent = vec![(Face::Outer, usize::MAX); np];
    let mut seen = vec![false; np];
    let mut order = Vec::new();
    let mut q = VecDeque::new();
    for e in 0..lat.num_edges() {
        let (l, r) = lat.faces_of_edge(e);
        for (a, b) in [(l, r), (r, l)] {
            if let (Face::Outer, Face::Plaquette(p)) = (a, b) {
                if !seen[p] {
                    seen[p] = true;
                    parent[p] = (Face::Outer, e);
                    order.push(p);
                    q.push_back(p);
                }
            }
        }
    }
    while let Some(p) = q.pop_front() {
        for s in lat.plaquettes[p].steps {
            let (l, r) = lat.faces_of_edge(s.edge);
            for f in [l, r] {
                if let Face::Plaquette(w) = f {
                    if !seen[w] {
                        seen[w] = true;
                        parent[w] = (Face::Plaquette(p), s.edge);
                        order.push(w);
                        q.push_back(w);
                    }
                }
            }
        }
    }
    DualTree { parent, order }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Triangle {
    Primary { edge: usize, face: Face },
    Dual { edge: usize, vertex: usize },
}

/// Control edge of a ribbon, read as the edge value or its inverse.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct YEdge {
    pub edge: usize,
    pub inverted: bool,
}

/// Target edge of a ribbon: left-multiplied by `ŷ_anchor^{-1} h ŷ_anchor` in its reading.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct XEdge {
    pub edge: usize,
    pub anchor: usize,
    pub inverted: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RibbonKind {
    StandardOpen,
    DualLoop,
    PlaquetteLoop,
    RegionBoundary,
}

#[derive(Debug, Clone)]
pub struct Ribbon {
    pub kind: RibbonKind,
    pub s0: Site,
    pub s1: Site,
    pub closed: bool,
    pub triangles: Vec<Triangle>,
    pub y: Vec<YEdge>,
    pub x: Vec<XEdge>,
}

impl Ribbon {
    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty() && self.x.is_empty()
    }

    /// Edges touched by the ribbon, y first.
    pub fn support(&self) -> Vec<usize> {
        let mut s: Vec<usize> = self.y.iter().map(|y| y.edge).collect();
        s.extend(self.x.iter().map(|x| x.edge));
        s
    }

    /// Structural checks: disjoint edges, anchors in range, closedness flag.
    pub fn validate(&self, lat: &PlanarLattice) -> Result<()> {
        lat.check_site(self.s0)?;
        lat.check_site(self.s1)?;
        let mut sup = self.support();
        let n = sup.len();
        sup.sort_unstable();
        sup.dedup();
        if sup.len() != n {
            return Err(Error::InvalidRibbonSpec("edge used twice".into()));
        }
        if sup.iter().any(|&e| e >= lat.num_edges()) {
            return Err(Error::InvalidRibbonSpec("edge out of range".into()));
        }
        if self.x.iter().any(|x| x.anchor > self.y.len()) {
            return Err(Error::InvalidRibbonSpec("anchor out of range".into()));
        }
        if self.closed != (self.s0 == self.s1) {
            return Err(Error::InvalidRibbonSpec(if self.closed {
                "closed ribbon with distinct end sites".into()
            } else {
                "open ribbon with s0 = s1".into()
            }));
        }
        for w in self.triangles.windows(2) {
            if !triangles_adjacent(lat, w[0], w[1]) {
                return Err(Error::InvalidRibbonSpec("non-contiguous triangle sequence".into()));
            }
        }
        Ok(())
    }
}

fn triangle_vertices(lat: &PlanarLattice, t: Triangle) -> Vec<usize> {
    match t {
        Triangle::Primary { edge, .. } | Triangle::Dual { edge, .. } => {
            vec![lat.edges[edge].tail, lat.edges[edge].head]
        }
    }
}

fn triangles_adjacent(lat: &PlanarLattice, a: Triangle, b: Triangle) -> bool {
    let va = triangle_vertices(lat, a);
    triangle_vertices(lat, b).iter().any(|v| va.contains(v))
}

/// Open ribbon along vertex row `row` from column `c0` to `c1`, plaquettes above it.
///
/// `y_k` is the horizontal edge between `u_{k-1}` and `u_k` read as
/// `θ(u_{k-1}) θ(u_k)^{-1}`; `x_{k+1}` is the vertical edge at `u_k` read with its
/// head at `u_k`.
pub fn standard_open_ribbon(lat: &PlanarLattice, row: usize, c0: usize, c1: usize) -> Result<Ribbon> {
    if row >= lat.rows || c1 > lat.cols || c0 >= c1 {
        return Err(Error::InvalidRibbonSpec(format!(
            "row {row}, columns {c0}..{c1} outside a {}x{} lattice",
            lat.rows, lat.cols
        )));
    }
    let mut y = Vec::new();
    let mut x = Vec::new();
    let mut triangles = Vec::new();
    for (k, c) in (c0..c1).enumerate() {
        let ve = lat.vertical(row, c);
        let he = lat.horizontal(row, c);
        x.push(XEdge {
            edge: ve,
            anchor: k,
            inverted: true,
        });
        y.push(YEdge {
            edge: he,
            inverted: true,
        });
        triangles.push(Triangle::Dual {
            edge: ve,
            vertex: lat.vertex(row, c),
        });
        triangles.push(Triangle::Primary {
            edge: he,
            face: Face::Plaquette(lat.plaquette(row, c)),
        });
    }
    let s0 = Site {
        vertex: lat.vertex(row, c0),
        face: if c0 == 0 {
            Face::Outer
        } else {
            Face::Plaquette(lat.plaquette(row, c0 - 1))
        },
    };
    let s1 = Site {
        vertex: lat.vertex(row, c1),
        face: Face::Plaquette(lat.plaquette(row, c1 - 1)),
    };
    let r = Ribbon {
        kind: RibbonKind::StandardOpen,
        s0,
        s1,
        closed: false,
        triangles,
        y,
        x,
    };
    r.validate(lat)?;
    Ok(r)
}

/// Closed dual loop around `v`: `F^{h,e}` acts as `A^h_v`.
pub fn closed_dual_loop(lat: &PlanarLattice, v: usize) -> Result<Ribbon> {
    if v >= lat.num_vertices() {
        return Err(Error::InvalidRibbonSpec(format!("vertex {v} out of range")));
    }
    let inc = lat.incident(v);
    let x = inc
        .iter()
        .map(|&e| XEdge {
            edge: e,
            anchor: 0,
            inverted: lat.edges[e].head != v,
        })
        .collect();
    let face = lat
        .plaquettes
        .iter()
        .position(|p| p.corners.contains(&v))
        .map(Face::Plaquette)
        .unwrap_or(Face::Outer);
    let s = Site { vertex: v, face };
    let r = Ribbon {
        kind: RibbonKind::DualLoop,
        s0: s,
        s1: s,
        closed: true,
        triangles: inc.iter().map(|&e| Triangle::Dual { edge: e, vertex: v }).collect(),
        y: Vec::new(),
        x,
    };
    r.validate(lat)?;
    Ok(r)
}

/// Reads a closed vertex cycle `w_0, w_1, …` (counterclockwise) as the clockwise
/// control chain: `y_k` is read as `θ(w'_{k-1}) θ(w'_k)^{-1}` where `w'` is the
/// reversed cycle. Returns the y chain and the vertex at each anchor.
fn clockwise_chain(lat: &PlanarLattice, ccw: &[usize]) -> (Vec<YEdge>, Vec<usize>) {
    let n = ccw.len();
    let cw: Vec<usize> = (0..n).map(|i| ccw[(n - i) % n]).collect();
    let mut y = Vec::with_capacity(n);
    for k in 1..=n {
        let prev = cw[k - 1];
        let cur = cw[k % n];
        let e = lat.edge_between(prev, cur).expect("adjacent cycle vertices");
        // θ(prev) θ(cur)^{-1} equals the edge value when prev is the head.
        y.push(YEdge {
            edge: e,
            inverted: lat.edges[e].head != prev,
        });
    }
    (y, cw)
}

/// Closed ribbon around plaquette `p` based at corner `v`: `F^{e,g}` acts as `B^g_{(v,p)}`.
pub fn plaquette_loop(lat: &PlanarLattice, p: usize, v: usize) -> Result<Ribbon> {
    if p >= lat.num_plaquettes() {
        return Err(Error::InvalidRibbonSpec(format!("plaquette {p} out of range")));
    }
    let pl = &lat.plaquettes[p];
    let i = pl
        .corners
        .iter()
        .position(|&c| c == v)
        .ok_or_else(|| Error::InvalidRibbonSpec(format!("vertex {v} not a corner of {p}")))?;
    let ccw: Vec<usize> = (0..4).map(|k| pl.corners[(i + k) % 4]).collect();
    let (y, _) = clockwise_chain(lat, &ccw);
    let s = Site {
        vertex: v,
        face: Face::Plaquette(p),
    };
    let r = Ribbon {
        kind: RibbonKind::PlaquetteLoop,
        s0: s,
        s1: s,
        closed: true,
        triangles: y
            .iter()
            .map(|e| Triangle::Primary {
                edge: e.edge,
                face: Face::Plaquette(p),
            })
            .collect(),
        y,
        x: Vec::new(),
    };
    r.validate(lat)?;
    Ok(r)
}

/// Rectangle of plaquettes `rows r0..r1`, `cols c0..c1` (half-open).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Rect {
    pub r0: usize,
    pub c0: usize,
    pub r1: usize,
    pub c1: usize,
}

/// Closed ribbon encircling a rectangle counterclockwise from its lower-left corner.
/// The control chain is the boundary cycle; targets are the edges leaving the
/// boundary vertices away from the region. Regions with interior vertices are rejected.
pub fn closed_region_boundary(lat: &PlanarLattice, rect: Rect) -> Result<Ribbon> {
    let Rect { r0, c0, r1, c1 } = rect;
    if r0 >= r1 || c0 >= c1 || r1 > lat.rows || c1 > lat.cols {
        return Err(Error::InvalidRibbonSpec(format!("rectangle {rect:?} outside the lattice")));
    }
    if r1 - r0 > 1 && c1 - c0 > 1 {
        return Err(Error::InvalidRibbonSpec("regions with interior vertices are unsupported".into()));
    }
    let mut ccw = Vec::new();
    for c in c0..c1 {
        ccw.push(lat.vertex(r0, c));
    }
    for r in r0..r1 {
        ccw.push(lat.vertex(r, c1));
    }
    for c in (c0 + 1..=c1).rev() {
        ccw.push(lat.vertex(r1, c));
    }
    for r in (r0 + 1..=r1).rev() {
        ccw.push(lat.vertex(r, c0));
    }
    let (y_chain, cw) = clockwise_chain(lat, &ccw);
    let loop_edges: Vec<usize> = y_chain.iter().map(|e| e.edge).collect();
    let inside = |e: usize| {
        let (l, r) = lat.faces_of_edge(e);
        [l, r].iter().any(|f| match f {
            Face::Plaquette(p) => {
                let (pr, pc) = (p / lat.cols, p % lat.cols);
                (r0..r1).contains(&pr) && (c0..c1).contains(&pc)
            }
            Face::Outer => false,
        })
    };
    let mut x = Vec::new();
    for (k, &w) in cw.iter().enumerate() {
        for e in lat.incident(w) {
            if loop_edges.contains(&e) || inside(e) {
                continue;
            }
            x.push(XEdge {
                edge: e,
                anchor: k,
                inverted: lat.edges[e].head != w,
            });
        }
    }
    let s = Site {
        vertex: lat.vertex(r0, c0),
        face: Face::Plaquette(lat.plaquette(r0, c0)),
    };
    let r = Ribbon {
        kind: RibbonKind::RegionBoundary,
        s0: s,
        s1: s,
        closed: true,
        triangles: Vec::new(),
        y: y_chain,
        x,
    };
    r.validate(lat)?;
    Ok(r)
}
