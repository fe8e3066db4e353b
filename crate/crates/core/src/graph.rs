//! Weighted graphs over a measure space, vertex functions, and the
//! Laplacian / Schrödinger operator acting on them.
//!
//! A [`WeightedGraph`] is a finite truncation of an infinite graph. Vertices
//! flagged in the boundary mask form the Dirichlet ghost layer: operator
//! outputs are only trusted at interior vertices. Graphs whose edges leave the
//! materialized vertex set (non-local kernels) carry an *exterior mass* per
//! vertex, the total weight of edges to vertices that were not materialized
//! and on which every function is taken to vanish.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::{self, Execution};

/// One unordered pair `{a, b}` with `a < b` and its weight.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub a: u32,
    pub b: u32,
    pub weight: f64,
}

/// Coordinates or other external identities attached to vertex indices.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum VertexLabels {
    None,
    /// The full box `[-radius, radius]^dim` in row-major order; coordinates
    /// are computed from the index.
    LatticeBox { dim: usize, radius: usize },
    /// Lattice points, flattened `dim` coordinates per vertex, sorted
    /// lexicographically (row-major order).
    Lattice { dim: usize, coords: Vec<i64> },
    /// Breadth-first tree ball: combinatorial distance to the root and parent
    /// index (the root is its own parent).
    Tree {
        degree: usize,
        depth: Vec<u32>,
        parent: Vec<u32>,
    },
    /// Radial quotient of a tree ball: vertex `k` is the sphere of radius `k`.
    Radial { degree: usize },
    Named(Vec<String>),
}

impl VertexLabels {
    pub fn dim(&self) -> Option<usize> {
        match self {
            VertexLabels::LatticeBox { dim, .. } | VertexLabels::Lattice { dim, .. } => Some(*dim),
            _ => None,
        }
    }

    /// Writes the lattice coordinates of `v` into `out`; false when the
    /// labels carry no coordinates.
    pub fn write_point(&self, v: usize, out: &mut [i64]) -> bool {
        match self {
            VertexLabels::LatticeBox { dim, radius } => {
                let side = 2 * radius + 1;
                let mut rest = v;
                for k in (0..*dim).rev() {
                    out[k] = (rest % side) as i64 - *radius as i64;
                    rest /= side;
                }
                true
            }
            VertexLabels::Lattice { dim, coords } => {
                out.copy_from_slice(&coords[v * dim..(v + 1) * dim]);
                true
            }
            _ => false,
        }
    }

    pub fn point(&self, v: usize) -> Option<Vec<i64>> {
        let mut p = vec![0i64; self.dim()?];
        self.write_point(v, &mut p);
        Some(p)
    }

    /// Index of a lattice point (binary search for explicit coordinates).
    pub fn index_of(&self, point: &[i64]) -> Option<usize> {
        match self {
            VertexLabels::LatticeBox { dim, radius } => {
                if point.len() != *dim {
                    return None;
                }
                let r = *radius as i64;
                let side = 2 * r + 1;
                let mut idx = 0i64;
                for &x in point {
                    if x.abs() > r {
                        return None;
                    }
                    idx = idx * side + x + r;
                }
                Some(idx as usize)
            }
            VertexLabels::Lattice { dim, coords } => {
                if point.len() != *dim {
                    return None;
                }
                let n = coords.len() / dim;
                let (mut lo, mut hi) = (0usize, n);
                while lo < hi {
                    let mid = (lo + hi) / 2;
                    match coords[mid * dim..(mid + 1) * dim].cmp(point) {
                        std::cmp::Ordering::Less => lo = mid + 1,
                        std::cmp::Ordering::Greater => hi = mid,
                        std::cmp::Ordering::Equal => return Some(mid),
                    }
                }
                None
            }
            _ => None,
        }
    }

    /// Distance from the model's root used for spheres and decay profiles:
    /// Euclidean norm on lattices, combinatorial distance on trees.
    pub fn radial_coordinate(&self, v: usize) -> Option<f64> {
        match self {
            VertexLabels::LatticeBox { .. } | VertexLabels::Lattice { .. } => {
                let c = self.point(v)?;
                Some(c.iter().map(|&x| (x * x) as f64).sum::<f64>().sqrt())
            }
            VertexLabels::Tree { depth, .. } => Some(depth[v] as f64),
            VertexLabels::Radial { .. } => Some(v as f64),
            _ => None,
        }
    }

    pub fn name(&self, v: usize) -> String {
        match self {
            VertexLabels::LatticeBox { .. } | VertexLabels::Lattice { .. } => {
                let c = self.point(v).unwrap_or_default();
                let parts: Vec<String> = c.iter().map(|x| x.to_string()).collect();
                parts.join(",")
            }
            VertexLabels::Named(names) => names[v].clone(),
            _ => v.to_string(),
        }
    }
}

/// Translation-invariant weights on the lattice box `[-radius, radius]^dim`:
/// `b(x, y) = w(|x_1 - y_1|, ..., |x_d - y_d|)` for `0 < ‖x - y‖_∞ ≤ cutoff`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LatticeKernel {
    pub dim: usize,
    pub radius: usize,
    pub cutoff: usize,
    /// Dense table over absolute offsets `[0, cutoff]^dim`, row-major.
    pub table: Vec<f64>,
}

impl LatticeKernel {
    pub fn side(&self) -> usize {
        2 * self.radius + 1
    }

    pub fn weight_abs(&self, abs_offset: &[usize]) -> f64 {
        let mut idx = 0usize;
        for &a in abs_offset {
            if a > self.cutoff {
                return 0.0;
            }
            idx = idx * (self.cutoff + 1) + a;
        }
        self.table[idx]
    }

    /// Box coordinates (shifted to `[0, side)`) of vertex `v`.
    pub fn unrank(&self, mut v: usize, out: &mut [usize]) {
        let side = self.side();
        for k in (0..self.dim).rev() {
            out[k] = v % side;
            v /= side;
        }
    }

    pub fn rank(&self, pos: &[usize]) -> usize {
        let side = self.side();
        pos.iter().fold(0, |acc, &p| acc * side + p)
    }

    fn for_each_neighbor<F: FnMut(usize, f64)>(&self, v: usize, mut f: F) {
        let d = self.dim;
        let side = self.side() as i64;
        let c = self.cutoff as i64;
        let mut pos = vec![0usize; d];
        self.unrank(v, &mut pos);
        let lo: Vec<i64> = pos.iter().map(|&p| (p as i64 - c).max(0)).collect();
        let hi: Vec<i64> = pos.iter().map(|&p| (p as i64 + c).min(side - 1)).collect();
        let mut cur = lo.clone();
        let mut abs = vec![0usize; d];
        loop {
            let mut is_self = true;
            for k in 0..d {
                abs[k] = (cur[k] - pos[k] as i64).unsigned_abs() as usize;
                if abs[k] != 0 {
                    is_self = false;
                }
            }
            if !is_self {
                let w = self.weight_abs(&abs);
                if w > 0.0 {
                    let u = cur.iter().fold(0i64, |acc, &p| acc * side + p) as usize;
                    f(u, w);
                }
            }
            // odometer
            let mut k = d;
            loop {
                if k == 0 {
                    return;
                }
                k -= 1;
                if cur[k] < hi[k] {
                    cur[k] += 1;
                    break;
                }
                cur[k] = lo[k];
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
enum EdgeStore {
    /// Edge list with one entry per unordered pair and a sorted adjacency
    /// index per vertex.
    Explicit {
        edges: Vec<Edge>,
        offsets: Vec<usize>,
        neighbors: Vec<u32>,
        edge_ids: Vec<u32>,
    },
    Kernel(LatticeKernel),
    /// Nearest-neighbour lattice box with unit weights.
    UnitLattice { dim: usize, radius: usize },
}

/// Symmetric nonnegative edge weights `b`, a strictly positive vertex measure
/// `m`, and a Dirichlet boundary mask, over the vertex set `0..n`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightedGraph {
    n: usize,
    store: EdgeStore,
    measure: Vec<f64>,
    boundary: Vec<bool>,
    exterior: Option<Vec<f64>>,
    labels: VertexLabels,
}

impl WeightedGraph {
    /// Builds and validates a graph from an undirected edge list.
    ///
    /// Rejects self-loops, negative or non-finite weights, duplicate pairs,
    /// non-positive measures, and a disconnected interior.
    pub fn from_edges(
        n: usize,
        edges: impl IntoIterator<Item = (usize, usize, f64)>,
        measure: Vec<f64>,
        boundary: Vec<bool>,
        labels: VertexLabels,
    ) -> Result<Self> {
        if measure.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: measure.len(),
            });
        }
        if boundary.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: boundary.len(),
            });
        }
        if n > u32::MAX as usize {
            return Err(Error::TooLarge {
                count: n,
                limit: u32::MAX as usize,
            });
        }
        for (v, &m) in measure.iter().enumerate() {
            if !(m > 0.0 && m.is_finite()) {
                return Err(Error::InvalidGraph(format!(
                    "vertex {v} has non-positive measure {m}"
                )));
            }
        }
        let mut list = Vec::new();
        for (x, y, w) in edges {
            if x >= n || y >= n {
                return Err(Error::InvalidGraph(format!(
                    "edge ({x}, {y}) references a vertex outside 0..{n}"
                )));
            }
            if x == y {
                return Err(Error::InvalidGraph(format!("self-loop at vertex {x}")));
            }
            if !(w >= 0.0 && w.is_finite()) {
                return Err(Error::InvalidGraph(format!(
                    "edge ({x}, {y}) has invalid weight {w}"
                )));
            }
            if w == 0.0 {
                continue;
            }
            let (a, b) = if x < y { (x, y) } else { (y, x) };
            list.push(Edge {
                a: a as u32,
                b: b as u32,
                weight: w,
            });
        }
        list.sort_by_key(|e| (e.a, e.b));
        for pair in list.windows(2) {
            if pair[0].a == pair[1].a && pair[0].b == pair[1].b {
                return Err(Error::InvalidGraph(format!(
                    "duplicate edge ({}, {})",
                    pair[0].a, pair[0].b
                )));
            }
        }
        let mut degree = vec![0usize; n + 1];
        for e in &list {
            degree[e.a as usize] += 1;
            degree[e.b as usize] += 1;
        }
        let mut offsets = vec![0usize; n + 1];
        for v in 0..n {
            offsets[v + 1] = offsets[v] + degree[v];
        }
        let mut fill = offsets.clone();
        let mut neighbors = vec![0u32; offsets[n]];
        let mut edge_ids = vec![0u32; offsets[n]];
        for (id, e) in list.iter().enumerate() {
            let (a, b) = (e.a as usize, e.b as usize);
            neighbors[fill[a]] = e.b;
            edge_ids[fill[a]] = id as u32;
            fill[a] += 1;
            neighbors[fill[b]] = e.a;
            edge_ids[fill[b]] = id as u32;
            fill[b] += 1;
        }
        // Edges are visited in (a, b) order, so each vertex's adjacency is
        // already sorted: smaller neighbours arrive as `b`-endpoints first.
        let graph = WeightedGraph {
            n,
            store: EdgeStore::Explicit {
                edges: list,
                offsets,
                neighbors,
                edge_ids,
            },
            measure,
            boundary,
            exterior: None,
            labels,
        };
        graph.check_interior_connected()?;
        Ok(graph)
    }

    /// Graph on the lattice box `[-radius, radius]^dim` with translation
    /// invariant weights, m ≡ 1, and the given boundary mask and exterior mass.
    pub fn from_kernel(
        kernel: LatticeKernel,
        boundary: Vec<bool>,
        exterior: Option<Vec<f64>>,
    ) -> Result<Self> {
        let n = kernel.side().pow(kernel.dim as u32);
        if boundary.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: boundary.len(),
            });
        }
        if let Some(ext) = &exterior {
            if ext.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: ext.len(),
                });
            }
            if ext.iter().any(|&k| !(k >= 0.0 && k.is_finite())) {
                return Err(Error::InvalidGraph("exterior mass must be finite and nonnegative".into()));
            }
        }
        if kernel.table.iter().any(|&w| !(w >= 0.0 && w.is_finite())) {
            return Err(Error::InvalidGraph("kernel weights must be finite and nonnegative".into()));
        }
        let graph = WeightedGraph {
            n,
            labels: VertexLabels::LatticeBox {
                dim: kernel.dim,
                radius: kernel.radius,
            },
            store: EdgeStore::Kernel(kernel),
            measure: vec![1.0; n],
            boundary,
            exterior,
        };
        graph.check_interior_connected()?;
        Ok(graph)
    }

    /// The box `[-radius, radius]^dim` with unit nearest-neighbour weights and
    /// m ≡ 1; the boundary mask is the outer layer `‖x‖_∞ = radius`.
    pub fn unit_lattice_box(dim: usize, radius: usize) -> Result<Self> {
        if dim == 0 || radius < 1 {
            return Err(Error::InvalidArgument("lattice box needs dim ≥ 1 and radius ≥ 1".into()));
        }
        let side = 2 * radius + 1;
        let n = side
            .checked_pow(dim as u32)
            .filter(|&n| n <= u32::MAX as usize)
            .ok_or(Error::TooLarge {
                count: usize::MAX,
                limit: u32::MAX as usize,
            })?;
        let labels = VertexLabels::LatticeBox { dim, radius };
        let mut boundary = vec![false; n];
        let mut p = vec![0i64; dim];
        for (v, b) in boundary.iter_mut().enumerate() {
            labels.write_point(v, &mut p);
            *b = p.iter().any(|x| x.unsigned_abs() as usize == radius);
        }
        Ok(WeightedGraph {
            n,
            store: EdgeStore::UnitLattice { dim, radius },
            measure: vec![1.0; n],
            boundary,
            exterior: None,
            labels,
        })
    }

    fn check_interior_connected(&self) -> Result<()> {
        let start = match (0..self.n).find(|&v| !self.boundary[v]) {
            Some(v) => v,
            None => return Err(Error::InvalidGraph("graph has no interior vertex".into())),
        };
        let interior = self.boundary.iter().filter(|b| !**b).count();
        if let EdgeStore::Kernel(k) = &self.store {
            // unit steps alone already connect the interior in the usual case
            let mut unit = vec![0usize; k.dim];
            unit[k.dim - 1] = 1;
            if k.cutoff >= 1 && k.weight_abs(&unit) > 0.0 {
                let reach = self.flood(start, |x, f| {
                    let mut pos = vec![0usize; k.dim];
                    k.unrank(x, &mut pos);
                    for j in 0..k.dim {
                        let mut e = vec![0usize; k.dim];
                        e[j] = 1;
                        if k.weight_abs(&e) <= 0.0 {
                            continue;
                        }
                        for step in [-1i64, 1] {
                            let q = pos[j] as i64 + step;
                            if q >= 0 && (q as usize) < k.side() {
                                let mut p2 = pos.clone();
                                p2[j] = q as usize;
                                f(k.rank(&p2));
                            }
                        }
                    }
                });
                if reach == interior {
                    return Ok(());
                }
            }
        }
        let count = self.flood(start, |x, f| self.for_each_neighbor(x, |y, _| f(y)));
        if count != interior {
            return Err(Error::InvalidGraph(format!(
                "interior is disconnected: reached {count} of {interior} interior vertices"
            )));
        }
        Ok(())
    }

    fn flood<N: Fn(usize, &mut dyn FnMut(usize))>(&self, start: usize, neighbors: N) -> usize {
        let mut seen = vec![false; self.n];
        let mut stack = vec![start];
        seen[start] = true;
        let mut count = 1usize;
        while let Some(x) = stack.pop() {
            neighbors(x, &mut |y| {
                if !self.boundary[y] && !seen[y] {
                    seen[y] = true;
                    count += 1;
                    stack.push(y);
                }
            });
        }
        count
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn measure(&self) -> &[f64] {
        &self.measure
    }

    pub fn boundary_mask(&self) -> &[bool] {
        &self.boundary
    }

    pub fn is_boundary(&self, v: usize) -> bool {
        self.boundary[v]
    }

    pub fn interior(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.n).filter(move |&v| !self.boundary[v])
    }

    pub fn labels(&self) -> &VertexLabels {
        &self.labels
    }

    /// Mass of edges to unmaterialized exterior vertices.
    pub fn exterior_mass(&self, v: usize) -> f64 {
        self.exterior.as_ref().map_or(0.0, |e| e[v])
    }

    pub fn has_exterior(&self) -> bool {
        self.exterior.is_some()
    }

    pub fn kernel(&self) -> Option<&LatticeKernel> {
        match &self.store {
            EdgeStore::Kernel(k) => Some(k),
            _ => None,
        }
    }

    /// Number of stored unordered pairs with positive weight.
    pub fn edge_count(&self) -> usize {
        match &self.store {
            EdgeStore::Explicit { edges, .. } => edges.len(),
            EdgeStore::Kernel(_) | EdgeStore::UnitLattice { .. } => {
                let mut total = 0usize;
                for x in 0..self.n {
                    self.for_each_neighbor(x, |_, _| total += 1);
                }
                total / 2
            }
        }
    }

    /// Explicit edge list, if the graph stores one.
    pub fn edges(&self) -> Option<&[Edge]> {
        match &self.store {
            EdgeStore::Explicit { edges, .. } => Some(edges),
            _ => None,
        }
    }

    /// Calls `f(y, b(x, y))` for every neighbour `y` of `x` with positive weight.
    #[inline]
    pub fn for_each_neighbor<F: FnMut(usize, f64)>(&self, x: usize, mut f: F) {
        match &self.store {
            EdgeStore::Explicit {
                edges,
                offsets,
                neighbors,
                edge_ids,
            } => {
                for k in offsets[x]..offsets[x + 1] {
                    f(neighbors[k] as usize, edges[edge_ids[k] as usize].weight);
                }
            }
            EdgeStore::Kernel(kernel) => kernel.for_each_neighbor(x, f),
            EdgeStore::UnitLattice { dim, radius } => {
                let side = 2 * radius + 1;
                let mut rest = x;
                let mut stride = 1usize;
                for _ in 0..*dim {
                    let p = rest % side;
                    rest /= side;
                    if p > 0 {
                        f(x - stride, 1.0);
                    }
                    if p + 1 < side {
                        f(x + stride, 1.0);
                    }
                    stride *= side;
                }
            }
        }
    }

    pub fn neighbor_count(&self, x: usize) -> usize {
        match &self.store {
            EdgeStore::Explicit { offsets, .. } => offsets[x + 1] - offsets[x],
            _ => {
                let mut c = 0;
                self.for_each_neighbor(x, |_, _| c += 1);
                c
            }
        }
    }

    /// `b(x, y)`, zero when not adjacent.
    pub fn weight(&self, x: usize, y: usize) -> f64 {
        match &self.store {
            EdgeStore::Explicit {
                edges,
                offsets,
                neighbors,
                edge_ids,
            } => {
                let adj = &neighbors[offsets[x]..offsets[x + 1]];
                match adj.binary_search(&(y as u32)) {
                    Ok(k) => edges[edge_ids[offsets[x] + k] as usize].weight,
                    Err(_) => 0.0,
                }
            }
            EdgeStore::Kernel(kernel) => {
                if x == y {
                    return 0.0;
                }
                let mut px = vec![0usize; kernel.dim];
                let mut py = vec![0usize; kernel.dim];
                kernel.unrank(x, &mut px);
                kernel.unrank(y, &mut py);
                let abs: Vec<usize> = px.iter().zip(&py).map(|(a, b)| a.abs_diff(*b)).collect();
                kernel.weight_abs(&abs)
            }
            EdgeStore::UnitLattice { dim, radius } => {
                let side = 2 * radius + 1;
                let (mut a, mut b) = (x, y);
                let mut diff = 0usize;
                for _ in 0..*dim {
                    diff += (a % side).abs_diff(b % side);
                    a /= side;
                    b /= side;
                }
                if diff == 1 {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }

    /// Weighted degree `Σ_y b(x, y)` over materialized neighbours.
    pub fn degree(&self, x: usize) -> f64 {
        let mut s = 0.0;
        self.for_each_neighbor(x, |_, w| s += w);
        s
    }

    /// Calls `f(x, y, b(x, y))` once per unordered pair with `x < y`.
    pub fn for_each_edge<F: FnMut(usize, usize, f64)>(&self, mut f: F) {
        match &self.store {
            EdgeStore::Explicit { edges, .. } => {
                for e in edges {
                    f(e.a as usize, e.b as usize, e.weight);
                }
            }
            _ => {
                for x in 0..self.n {
                    self.for_each_neighbor(x, |y, w| {
                        if x < y {
                            f(x, y, w)
                        }
                    });
                }
            }
        }
    }

    /// Vertices sharing at least one edge with the interior, plus the interior.
    pub fn interior_closure(&self) -> Vec<bool> {
        let mut mark = vec![false; self.n];
        for x in self.interior() {
            mark[x] = true;
            self.for_each_neighbor(x, |y, _| mark[y] = true);
        }
        mark
    }

    /// Checks the invariants that the constructors enforce, for graphs that
    /// arrive by other routes (deserialization).
    pub fn validate(&self) -> Result<()> {
        if self.measure.len() != self.n || self.boundary.len() != self.n {
            return Err(Error::InvalidGraph("inconsistent vertex arrays".into()));
        }
        if let Some(v) = self.measure.iter().position(|&m| !(m > 0.0 && m.is_finite())) {
            return Err(Error::InvalidGraph(format!("vertex {v} has non-positive measure")));
        }
        for x in 0..self.n {
            let mut bad = None;
            self.for_each_neighbor(x, |y, w| {
                if y == x || (self.weight(y, x) - w).abs() > 0.0 {
                    bad = Some(y);
                }
            });
            if let Some(y) = bad {
                return Err(Error::InvalidGraph(format!("asymmetric or self edge at ({x}, {y})")));
            }
        }
        self.check_interior_connected()
    }
}

/// Vertex potential `V`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Potential(pub Vec<f64>);

impl Potential {
    pub fn zero(n: usize) -> Self {
        Potential(vec![0.0; n])
    }

    pub fn constant(n: usize, c: f64) -> Self {
        Potential(vec![c; n])
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn check_finite(&self) -> Result<()> {
        match self.0.iter().position(|v| !v.is_finite()) {
            Some(v) => Err(Error::InvalidArgument(format!("potential is not finite at vertex {v}"))),
            None => Ok(()),
        }
    }
}

/// Real function on the vertices of a truncation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VertexFunction(pub Vec<f64>);

impl VertexFunction {
    pub fn zeros(n: usize) -> Self {
        VertexFunction(vec![0.0; n])
    }

    pub fn constant(n: usize, c: f64) -> Self {
        VertexFunction(vec![c; n])
    }

    pub fn indicator(n: usize, v: usize) -> Self {
        let mut f = vec![0.0; n];
        f[v] = 1.0;
        VertexFunction(f)
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        VertexFunction(self.0.iter().map(|&x| f(x)).collect())
    }

    pub fn support(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().enumerate().filter(|(_, v)| **v != 0.0).map(|(i, _)| i)
    }

    pub fn check_finite(&self) -> Result<()> {
        match self.0.iter().position(|v| !v.is_finite()) {
            Some(v) => Err(Error::InvalidArgument(format!("function is not finite at vertex {v}"))),
            None => Ok(()),
        }
    }
}

fn check_len(g: &WeightedGraph, len: usize) -> Result<()> {
    if len != g.len() {
        return Err(Error::DimensionMismatch {
            expected: g.len(),
            found: len,
        });
    }
    Ok(())
}

fn check_interior_support(g: &WeightedGraph, phi: &VertexFunction, context: &str) -> Result<()> {
    if let Some(v) = phi.support().find(|&v| g.is_boundary(v)) {
        return Err(Error::BoundarySupport {
            vertex: v,
            context: context.to_string(),
        });
    }
    Ok(())
}

/// `Δf(x) = (1/m(x)) [Σ_y b(x,y)(f(x) − f(y)) + κ(x) f(x)]`, where `κ` is the
/// exterior mass (zero for locally finite truncations).
///
/// Every entry is evaluated; entries at boundary vertices only see the
/// materialized part of the graph and are not meaningful.
pub fn apply_laplacian(g: &WeightedGraph, f: &VertexFunction) -> Result<VertexFunction> {
    apply_laplacian_with(Execution::preferred(), g, f)
}

pub fn apply_laplacian_with(
    exec: Execution,
    g: &WeightedGraph,
    f: &VertexFunction,
) -> Result<VertexFunction> {
    check_len(g, f.len())?;
    let fv = f.values();
    let mut out = vec![0.0; g.len()];
    exec::fill_indexed(exec, &mut out, |x| {
        let mut acc = g.exterior_mass(x) * fv[x];
        g.for_each_neighbor(x, |y, w| acc += w * (fv[x] - fv[y]));
        acc / g.measure[x]
    });
    Ok(VertexFunction(out))
}

/// `Hf = Δf + (V/m) f`.
pub fn apply_schrodinger(g: &WeightedGraph, v: &Potential, f: &VertexFunction) -> Result<VertexFunction> {
    check_len(g, v.0.len())?;
    let mut out = apply_laplacian(g, f)?;
    for (x, o) in out.0.iter_mut().enumerate() {
        *o += v.0[x] / g.measure[x] * f.0[x];
    }
    Ok(out)
}

/// `Q(φ) = ½ Σ_{x,y} b(x,y)(φ(x) − φ(y))² + Σ_x (V(x) + κ(x)) φ(x)²`,
/// so that `Q(φ) = Σ_x m(x) (Hφ)(x) φ(x)`
/// for `φ` supported in the interior.
pub fn quadratic_form(g: &WeightedGraph, v: &Potential, phi: &VertexFunction) -> Result<f64> {
    check_len(g, phi.len())?;
    check_len(g, v.0.len())?;
    check_interior_support(g, phi, "quadratic form argument")?;
    let p = phi.values();
    let mut edge_part = 0.0;
    g.for_each_edge(|x, y, w| {
        let d = p[x] - p[y];
        edge_part += w * d * d;
    });
    let mut diag = 0.0;
    for x in 0..g.len() {
        diag += (v.0[x] + g.exterior_mass(x)) * p[x] * p[x];
    }
    Ok(edge_part + diag)
}

/// `Σ_x m(x) f(x) g(x)`
pub fn inner_product(g: &WeightedGraph, a: &VertexFunction, b: &VertexFunction) -> Result<f64> {
    check_len(g, a.len())?;
    check_len(g, b.len())?;
    Ok((0..g.len()).map(|x| g.measure[x] * a.0[x] * b.0[x]).sum())
}

/// Both sides of the ground state transform
/// `Q(fφ) = ½ Σ b(x,y) f(x)f(y)(φ(x) − φ(y))² + Σ_x m(x) (f·Hf)(x) φ(x)²`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransformSides {
    pub lhs: f64,
    pub rhs: f64,
}

impl TransformSides {
    pub fn relative_gap(&self) -> f64 {
        (self.lhs - self.rhs).abs() / (self.lhs.abs() + 1.0)
    }
}

pub fn ground_state_transform_check(
    g: &WeightedGraph,
    v: &Potential,
    f: &VertexFunction,
    phi: &VertexFunction,
) -> Result<TransformSides> {
    check_len(g, f.len())?;
    check_len(g, phi.len())?;
    if let Some((x, &val)) = f.0.iter().enumerate().find(|(_, &val)| !(val > 0.0)) {
        return Err(Error::NotPositive { vertex: x, value: val });
    }
    check_interior_support(g, phi, "ground state transform test function")?;
    let product = VertexFunction(f.0.iter().zip(&phi.0).map(|(a, b)| a * b).collect());
    let lhs = quadratic_form(g, v, &product)?;

    let hf = apply_schrodinger(g, v, f)?;
    let (fv, p) = (f.values(), phi.values());
    let mut weighted = 0.0;
    g.for_each_edge(|x, y, w| {
        let d = p[x] - p[y];
        weighted += w * fv[x] * fv[y] * d * d;
    });
    let mut potential = 0.0;
    for x in 0..g.len() {
        potential += g.measure[x] * fv[x] * hf.0[x] * p[x] * p[x];
    }
    Ok(TransformSides {
        lhs,
        rhs: weighted + potential,
    })
}

/// `x ↦ max(u(x), v(x))`
pub fn pointwise_max(u: &VertexFunction, v: &VertexFunction) -> Result<VertexFunction> {
    if u.len() != v.len() {
        return Err(Error::DimensionMismatch {
            expected: u.len(),
            found: v.len(),
        });
    }
    Ok(VertexFunction(u.0.iter().zip(&v.0).map(|(a, b)| a.max(*b)).collect()))
}

/// Solves `Hu = −source` on the interior with zero boundary values, so that
/// `Hu ≤ 0` there. Fails when the Dirichlet form of `H` is not positive.
pub fn subharmonic_sample(g: &WeightedGraph, v: &Potential, source: &VertexFunction) -> Result<VertexFunction> {
    use crate::linalg::{envelope_size, lanczos_smallest, pcg, DirichletOperator, EnvelopeLdl, SolverConfig, SymOperator};
    check_len(g, v.0.len())?;
    check_len(g, source.len())?;
    v.check_finite()?;
    if let Some((x, &s)) = source.0.iter().enumerate().find(|(_, s)| !(**s >= 0.0)) {
        return Err(Error::InvalidArgument(format!("source is negative at vertex {x} ({s})")));
    }
    let exec = Execution::preferred();
    let op = DirichletOperator::with_exec(exec, g, &v.0)?;
    let smallest = || {
        let start = vec![1.0; op.dim()];
        lanczos_smallest(exec, &op, &start, 3000, 10).map(|o| o.theta)
    };
    let b: Vec<f64> = op.interior().iter().map(|&x| -g.measure[x] * source.0[x]).collect();
    let cfg = SolverConfig::default();
    let u = if envelope_size(&op) <= cfg.direct_limit {
        let f = EnvelopeLdl::factor(&op).map_err(|_| Error::NotPositiveOperator { eigenvalue: 0.0 })?;
        if f.negative_pivots() > 0 {
            return Err(Error::NotPositiveOperator { eigenvalue: smallest()? });
        }
        f.solve(&b)
    } else {
        let theta = smallest()?;
        if theta < 0.0 {
            return Err(Error::NotPositiveOperator { eigenvalue: theta });
        }
        pcg(exec, &op, &b, None, cfg.cg_tol, cfg.cg_max_iter)?.x
    };
    Ok(VertexFunction(op.to_global(&u)))
}

/// Result of [`edge_ratio_sup`]: the minimal admissible constant and where it
/// is attained.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EdgeRatio {
    pub constant: f64,
    pub argmax: Option<(usize, usize)>,
}

/// `sup_{b1(x,y) > 0} b1(x,y)|u(x)||u(y)| / (b2(x,y) v(x) v(y))`.
///
/// Returns `+∞` with the offending pair when some `b1`-edge has zero
/// `b2`-weight (and nonzero numerator).
pub fn edge_ratio_sup(
    b1: &WeightedGraph,
    u: &VertexFunction,
    b2: &WeightedGraph,
    v: &VertexFunction,
) -> Result<EdgeRatio> {
    edge_ratio_sup_within(b1, u, b2, v, |_, _| true)
}

/// [`edge_ratio_sup`] restricted to pairs accepted by `keep`.
pub fn edge_ratio_sup_within(
    b1: &WeightedGraph,
    u: &VertexFunction,
    b2: &WeightedGraph,
    v: &VertexFunction,
    keep: impl Fn(usize, usize) -> bool,
) -> Result<EdgeRatio> {
    check_len(b1, u.len())?;
    check_len(b1, b2.len())?;
    check_len(b2, v.len())?;
    if let Some((x, &val)) = v.0.iter().enumerate().find(|(_, &val)| !(val > 0.0)) {
        return Err(Error::NotPositive { vertex: x, value: val });
    }
    let mut best = EdgeRatio {
        constant: 0.0,
        argmax: None,
    };
    let mut infinite = None;
    b1.for_each_edge(|x, y, w1| {
        if infinite.is_some() || !keep(x, y) {
            return;
        }
        let num = w1 * u.0[x].abs() * u.0[y].abs();
        let w2 = b2.weight(x, y);
        if w2 <= 0.0 {
            if num > 0.0 {
                infinite = Some((x, y));
            }
            return;
        }
        let ratio = num / (w2 * v.0[x] * v.0[y]);
        if ratio > best.constant || best.argmax.is_none() {
            best = EdgeRatio {
                constant: ratio,
                argmax: Some((x, y)),
            };
        }
    });
    if let Some(pair) = infinite {
        return Ok(EdgeRatio {
            constant: f64::INFINITY,
            argmax: Some(pair),
        });
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path(weights: &[f64]) -> WeightedGraph {
        let n = weights.len() + 1;
        let edges = weights.iter().enumerate().map(|(i, &w)| (i, i + 1, w));
        let mut boundary = vec![false; n];
        boundary[0] = true;
        boundary[n - 1] = true;
        WeightedGraph::from_edges(n, edges, vec![1.0; n], boundary, VertexLabels::None).unwrap()
    }

    #[test]
    fn weighted_path_laplacian() {
        let g = path(&[2.0, 3.0]);
        let f = VertexFunction(vec![0.0, 1.0, 0.0]);
        let lf = apply_laplacian(&g, &f).unwrap();
        assert_eq!(lf.0[1], 5.0);
    }

    #[test]
    fn indicator_gives_degree_plus_potential() {
        let g = path(&[2.0, 3.0, 0.5]);
        let v = Potential(vec![0.0, -0.7, 0.0, 0.0]);
        let f = VertexFunction::indicator(4, 1);
        let hf = apply_schrodinger(&g, &v, &f).unwrap();
        assert!((hf.0[1] - (5.0 - 0.7)).abs() < 1e-15);
    }

    #[test]
    fn rejects_duplicate_pairs_and_bad_measure() {
        let dup = WeightedGraph::from_edges(
            3,
            vec![(0, 1, 1.0), (1, 0, 1.0), (1, 2, 1.0)],
            vec![1.0; 3],
            vec![false; 3],
            VertexLabels::None,
        );
        assert!(matches!(dup, Err(Error::InvalidGraph(_))));
        let bad_m = WeightedGraph::from_edges(
            2,
            vec![(0, 1, 1.0)],
            vec![1.0, 0.0],
            vec![false; 2],
            VertexLabels::None,
        );
        assert!(matches!(bad_m, Err(Error::InvalidGraph(_))));
    }

    #[test]
    fn rejects_disconnected_interior() {
        let g = WeightedGraph::from_edges(
            4,
            vec![(0, 1, 1.0), (2, 3, 1.0)],
            vec![1.0; 4],
            vec![false; 4],
            VertexLabels::None,
        );
        assert!(matches!(g, Err(Error::InvalidGraph(_))));
    }

    #[test]
    fn quadratic_form_rejects_boundary_support() {
        let g = path(&[1.0, 1.0]);
        let phi = VertexFunction(vec![1.0, 1.0, 0.0]);
        let err = quadratic_form(&g, &Potential::zero(3), &phi).unwrap_err();
        assert!(matches!(err, Error::BoundarySupport { vertex: 0, .. }));
    }

    #[test]
    fn green_formula_with_measure_and_potential() {
        let n = 7;
        let edges = vec![(0, 1, 0.3), (1, 2, 1.7), (2, 3, 0.9), (1, 4, 2.2), (4, 5, 0.4), (5, 6, 1.1), (2, 5, 0.6)];
        let m = vec![1.0, 0.4, 2.5, 1.0, 0.7, 3.1, 1.0];
        let mut boundary = vec![false; n];
        boundary[0] = true;
        boundary[3] = true;
        boundary[6] = true;
        let g = WeightedGraph::from_edges(n, edges, m.clone(), boundary, VertexLabels::None).unwrap();
        let v = Potential(vec![0.0, -0.3, 1.2, 0.0, 0.05, -0.8, 0.0]);
        let phi = VertexFunction(vec![0.0, 0.7, -1.3, 0.0, 2.1, 0.4, 0.0]);
        let q = quadratic_form(&g, &v, &phi).unwrap();
        let hphi = apply_schrodinger(&g, &v, &phi).unwrap();
        let rhs: f64 = (0..n).map(|x| m[x] * hphi.0[x] * phi.0[x]).sum();
        assert!((q - rhs).abs() < 1e-13 * q.abs().max(1.0));
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let g = path(&[1.0, 1.0]);
        let err = apply_laplacian(&g, &VertexFunction::zeros(2)).unwrap_err();
        assert!(matches!(err, Error::DimensionMismatch { expected: 3, found: 2 }));
    }

    #[test]
    fn edge_ratio_scaling() {
        let g = path(&[1.0, 2.0, 1.0]);
        let v = VertexFunction(vec![1.0, 0.5, 0.25, 0.125]);
        let r1 = edge_ratio_sup(&g, &v, &g, &v).unwrap();
        assert!((r1.constant - 1.0).abs() < 1e-15);
        let u = v.map(|x| 2.0 * x);
        let r4 = edge_ratio_sup(&g, &u, &g, &v).unwrap();
        assert!((r4.constant - 4.0).abs() < 1e-15);
    }

    #[test]
    fn edge_ratio_reports_missing_comparison_edge() {
        let g1 = path(&[1.0, 1.0]);
        let g2 = WeightedGraph::from_edges(
            3,
            vec![(0, 1, 1.0), (0, 2, 1.0)],
            vec![1.0; 3],
            vec![false, false, false],
            VertexLabels::None,
        )
        .unwrap();
        let one = VertexFunction::constant(3, 1.0);
        let r = edge_ratio_sup(&g1, &one, &g2, &one).unwrap();
        assert!(r.constant.is_infinite());
        assert_eq!(r.argmax, Some((1, 2)));
    }

    #[test]
    fn max_is_idempotent() {
        let u = VertexFunction(vec![1.0, -2.0, 3.0]);
        assert_eq!(pointwise_max(&u, &u).unwrap(), u);
        let lower = u.map(|x| x - 1.0);
        assert_eq!(pointwise_max(&u, &lower).unwrap(), u);
    }
}
