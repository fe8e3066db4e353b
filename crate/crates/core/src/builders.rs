//! Truncations of ℤ^d and regular trees, and file-based graphs.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fractional::FractionalSpec;
use crate::graph::{Potential, VertexLabels, WeightedGraph};
use crate::io;

pub const DEFAULT_VERTEX_LIMIT: usize = 30_000_000;

fn default_limit() -> usize {
    DEFAULT_VERTEX_LIMIT
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormKind {
    /// ℓ∞ box
    #[default]
    Box,
    /// ℓ1 ball
    L1,
    /// ℓ2 ball
    L2,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LatticeSpec {
    pub d: usize,
    pub radius: usize,
    #[serde(default)]
    pub norm: NormKind,
    /// Root point; the origin when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub root: Option<Vec<i64>>,
    #[serde(default = "default_limit")]
    pub max_vertices: usize,
}

impl LatticeSpec {
    pub fn new(d: usize, radius: usize) -> Self {
        LatticeSpec {
            d,
            radius,
            norm: NormKind::Box,
            root: None,
            max_vertices: DEFAULT_VERTEX_LIMIT,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.d < 1 {
            return Err(Error::InvalidArgument("lattice dimension must be at least 1".into()));
        }
        if self.radius < 1 {
            return Err(Error::InvalidArgument("lattice radius must be at least 1".into()));
        }
        if let Some(r) = &self.root {
            if r.len() != self.d {
                return Err(Error::InvalidArgument(format!(
                    "root has {} coordinates, expected {}",
                    r.len(),
                    self.d
                )));
            }
        }
        Ok(())
    }

    fn contains(&self, p: &[i64]) -> bool {
        let r = self.radius as i64;
        match self.norm {
            NormKind::Box => p.iter().all(|x| x.abs() <= r),
            NormKind::L1 => p.iter().map(|x| x.abs()).sum::<i64>() <= r,
            NormKind::L2 => p.iter().map(|x| x * x).sum::<i64>() <= r * r,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeSpec {
    pub degree: usize,
    pub radius: usize,
    #[serde(default = "default_limit")]
    pub max_vertices: usize,
}

impl TreeSpec {
    pub fn new(degree: usize, radius: usize) -> Self {
        TreeSpec {
            degree,
            radius,
            max_vertices: DEFAULT_VERTEX_LIMIT,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.degree < 2 {
            return Err(Error::InvalidArgument("tree degree must be at least 2".into()));
        }
        if self.radius < 2 {
            return Err(Error::InvalidArgument("tree radius must be at least 2".into()));
        }
        Ok(())
    }

    /// `|S_k|`: 1 for k = 0, else `d (d−1)^{k−1}`.
    pub fn sphere_size(&self, k: usize) -> f64 {
        if k == 0 {
            1.0
        } else {
            self.degree as f64 * ((self.degree - 1) as f64).powi(k as i32 - 1)
        }
    }

    pub fn vertex_count(&self) -> Option<usize> {
        let mut total: usize = 1;
        let mut sphere: usize = self.degree;
        for _ in 0..self.radius {
            total = total.checked_add(sphere)?;
            sphere = sphere.checked_mul(self.degree - 1)?;
        }
        Some(total)
    }
}

/// Any model the library can build, as read from a JSON spec file such as
/// `{"kind":"lattice","d":3,"radius":30}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModelSpec {
    Lattice(LatticeSpec),
    Tree(TreeSpec),
    /// Radial quotient of a tree ball (one vertex per sphere).
    TreeRadial(TreeSpec),
    File { edges: PathBuf, vertices: PathBuf },
    Fractional(FractionalSpec),
}

/// A built truncation with its root and the potential carried by the model
/// (zero except for file graphs).
#[derive(Clone, Debug)]
pub struct Model {
    pub spec: ModelSpec,
    pub graph: WeightedGraph,
    pub potential: Potential,
    pub root: usize,
}

impl ModelSpec {
    pub fn build(&self) -> Result<Model> {
        let (graph, potential, root) = match self {
            ModelSpec::Lattice(s) => {
                let g = build_lattice(s)?;
                let origin = vec![0i64; s.d];
                let root = s.root.as_deref().unwrap_or(&origin);
                let idx = g
                    .labels()
                    .index_of(root)
                    .ok_or_else(|| Error::InvalidArgument(format!("root {root:?} is outside the truncation")))?;
                let n = g.len();
                (g, Potential::zero(n), idx)
            }
            ModelSpec::Tree(s) => {
                let g = build_regular_tree(s)?;
                let n = g.len();
                (g, Potential::zero(n), 0)
            }
            ModelSpec::TreeRadial(s) => {
                let g = build_radial_tree(s)?;
                let n = g.len();
                (g, Potential::zero(n), 0)
            }
            ModelSpec::File { edges, vertices } => {
                let (g, v) = io::load_graph(edges, vertices)?;
                let root = g
                    .interior()
                    .next()
                    .ok_or_else(|| Error::InvalidGraph("graph has no interior vertex".into()))?;
                (g, v, root)
            }
            ModelSpec::Fractional(s) => {
                let (g, _) = crate::fractional::build_from_spec(s)?;
                let root = g
                    .labels()
                    .index_of(&vec![0i64; s.d])
                    .ok_or_else(|| Error::InvalidArgument("origin outside the box".into()))?;
                let n = g.len();
                (g, Potential::zero(n), root)
            }
        };
        Ok(Model {
            spec: self.clone(),
            graph,
            potential,
            root,
        })
    }

    /// The same model at another truncation radius, for exhaustion.
    pub fn with_radius(&self, radius: usize) -> Option<ModelSpec> {
        match self {
            ModelSpec::Lattice(s) => Some(ModelSpec::Lattice(LatticeSpec { radius, ..s.clone() })),
            ModelSpec::Tree(s) => Some(ModelSpec::Tree(TreeSpec { radius, ..s.clone() })),
            ModelSpec::TreeRadial(s) => Some(ModelSpec::TreeRadial(TreeSpec { radius, ..s.clone() })),
            ModelSpec::Fractional(s) => Some(ModelSpec::Fractional(FractionalSpec {
                box_radius: radius,
                ..s.clone()
            })),
            ModelSpec::File { .. } => None,
        }
    }

    pub fn radius(&self) -> Option<usize> {
        match self {
            ModelSpec::Lattice(s) => Some(s.radius),
            ModelSpec::Tree(s) | ModelSpec::TreeRadial(s) => Some(s.radius),
            ModelSpec::Fractional(s) => Some(s.box_radius),
            ModelSpec::File { .. } => None,
        }
    }

    /// Lattice dimension for ℤ^d-based models.
    pub fn lattice_dim(&self) -> Option<usize> {
        match self {
            ModelSpec::Lattice(s) => Some(s.d),
            ModelSpec::Fractional(s) => Some(s.d),
            _ => None,
        }
    }
}

/// Lattice points with norm at most `radius`, unit weights between points at
/// distance one, m ≡ 1. Boundary vertices are those with a lattice neighbour
/// outside the truncation. Points are indexed in row-major order.
pub fn build_lattice(spec: &LatticeSpec) -> Result<WeightedGraph> {
    spec.validate()?;
    let side = 2 * spec.radius + 1;
    let box_count = side.checked_pow(spec.d as u32).unwrap_or(usize::MAX);
    if spec.norm == NormKind::Box {
        if box_count > spec.max_vertices {
            return Err(Error::TooLarge {
                count: box_count,
                limit: spec.max_vertices,
            });
        }
        return WeightedGraph::unit_lattice_box(spec.d, spec.radius);
    }
    if box_count > spec.max_vertices.saturating_mul(1 << spec.d.min(20)) {
        return Err(Error::TooLarge {
            count: box_count,
            limit: spec.max_vertices,
        });
    }
    let d = spec.d;
    let r = spec.radius as i64;
    let mut coords = Vec::new();
    let mut p = vec![-r; d];
    let mut n = 0usize;
    'outer: loop {
        if spec.contains(&p) {
            coords.extend_from_slice(&p);
            n += 1;
            if n > spec.max_vertices {
                return Err(Error::TooLarge {
                    count: n,
                    limit: spec.max_vertices,
                });
            }
        }
        let mut k = d;
        loop {
            if k == 0 {
                break 'outer;
            }
            k -= 1;
            if p[k] < r {
                p[k] += 1;
                break;
            }
            p[k] = -r;
        }
    }
    let labels = VertexLabels::Lattice { dim: d, coords };
    let mut edges = Vec::with_capacity(n * d);
    let mut boundary = vec![false; n];
    let mut q = vec![0i64; d];
    for (v, flag) in boundary.iter_mut().enumerate() {
        labels.write_point(v, &mut p);
        for k in 0..d {
            for step in [-1i64, 1] {
                q.copy_from_slice(&p);
                q[k] += step;
                match labels.index_of(&q) {
                    Some(u) if step == 1 => edges.push((v, u, 1.0)),
                    Some(_) => {}
                    None => *flag = true,
                }
            }
        }
    }
    WeightedGraph::from_edges(n, edges, vec![1.0; n], boundary, labels)
}

/// Breadth-first ball of the `degree`-regular tree: the root has `degree`
/// children, every other non-leaf vertex `degree − 1`. Leaves (depth
/// `radius`) form the boundary.
pub fn build_regular_tree(spec: &TreeSpec) -> Result<WeightedGraph> {
    spec.validate()?;
    let n = spec.vertex_count().unwrap_or(usize::MAX);
    if n > spec.max_vertices {
        return Err(Error::TooLarge {
            count: n,
            limit: spec.max_vertices,
        });
    }
    let mut depth = Vec::with_capacity(n);
    let mut parent = Vec::with_capacity(n);
    let mut edges = Vec::with_capacity(n - 1);
    depth.push(0u32);
    parent.push(0u32);
    let mut level_start = 0usize;
    let mut level_end = 1usize;
    for k in 0..spec.radius {
        for v in level_start..level_end {
            let children = if k == 0 { spec.degree } else { spec.degree - 1 };
            for _ in 0..children {
                let c = depth.len();
                depth.push(k as u32 + 1);
                parent.push(v as u32);
                edges.push((v, c, 1.0));
            }
        }
        level_start = level_end;
        level_end = depth.len();
    }
    let boundary: Vec<bool> = depth.iter().map(|&k| k as usize == spec.radius).collect();
    WeightedGraph::from_edges(
        n,
        edges,
        vec![1.0; n],
        boundary,
        VertexLabels::Tree {
            degree: spec.degree,
            depth,
            parent,
        },
    )
}

/// Radial quotient of the tree ball: a path `0..=radius` with `m(k) = |S_k|`
/// and `b(k, k+1) = |S_{k+1}|`. Radial functions on the tree and functions on
/// the quotient have the same Laplacian and the same quadratic form.
pub fn build_radial_tree(spec: &TreeSpec) -> Result<WeightedGraph> {
    spec.validate()?;
    let n = spec.radius + 1;
    let measure: Vec<f64> = (0..n).map(|k| spec.sphere_size(k)).collect();
    let edges = (0..spec.radius).map(|k| (k, k + 1, spec.sphere_size(k + 1)));
    let mut boundary = vec![false; n];
    boundary[spec.radius] = true;
    WeightedGraph::from_edges(n, edges, measure, boundary, VertexLabels::Radial { degree: spec.degree })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_lattice_counts() {
        let g = build_lattice(&LatticeSpec::new(1, 2)).unwrap();
        assert_eq!((g.len(), g.edge_count()), (5, 4));
        let b: Vec<usize> = (0..5).filter(|&v| g.is_boundary(v)).collect();
        assert_eq!(b, vec![0, 4]);
        let g2 = build_lattice(&LatticeSpec::new(2, 1)).unwrap();
        assert_eq!((g2.len(), g2.edge_count()), (9, 12));
    }

    #[test]
    fn l1_and_l2_balls() {
        let mut s = LatticeSpec::new(2, 2);
        s.norm = NormKind::L1;
        let g = build_lattice(&s).unwrap();
        assert_eq!(g.len(), 13);
        for v in g.interior() {
            assert_eq!(g.neighbor_count(v), 4);
        }
        s.norm = NormKind::L2;
        assert_eq!(build_lattice(&s).unwrap().len(), 13);
        s.radius = 3;
        assert_eq!(build_lattice(&s).unwrap().len(), 29);
    }

    #[test]
    fn tree_counts() {
        let g = build_regular_tree(&TreeSpec::new(3, 2)).unwrap();
        assert_eq!(g.len(), 10);
        let spec = TreeSpec::new(3, 10);
        let g = build_regular_tree(&spec).unwrap();
        let VertexLabels::Tree { depth, .. } = g.labels() else { panic!() };
        for k in 1..=10u32 {
            let count = depth.iter().filter(|&&x| x == k).count();
            assert_eq!(count, 3 * 2usize.pow(k - 1));
        }
        for v in g.interior().skip(1) {
            assert_eq!(g.neighbor_count(v), 3);
        }
    }

    #[test]
    fn vertex_limit_guard() {
        let mut s = LatticeSpec::new(3, 50);
        s.max_vertices = 1000;
        assert!(matches!(build_lattice(&s), Err(Error::TooLarge { .. })));
    }

    #[test]
    fn spec_json_round_trip() {
        let s: ModelSpec = serde_json::from_str(r#"{"kind":"lattice","d":3,"radius":30}"#).unwrap();
        assert_eq!(s, ModelSpec::Lattice(LatticeSpec::new(3, 30)));
        let t: ModelSpec = serde_json::from_str(r#"{"kind":"tree","degree":3,"radius":5}"#).unwrap();
        assert_eq!(t, ModelSpec::Tree(TreeSpec::new(3, 5)));
    }
}
