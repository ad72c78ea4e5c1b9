//! Triangulated 2D domains with labeled boundary segments.
//!
//! The boundary of a mesh is a single counter-clockwise loop of edges, each
//! carrying one of three labels: the accessible segment `Gamma0` and the two
//! halves `Gamma11`, `Gamma12` of the inaccessible segment. Their union is
//! addressed through [`Region::Gamma1`].

mod disk;
mod io;

pub use disk::generate_disk_mesh;
pub use io::{read_mesh, read_mesh_from, write_mesh, write_mesh_to};

use std::collections::HashMap;

use thiserror::Error;

use crate::scalar::{real, Real};

#[derive(Debug, Error)]
pub enum MeshError {
    #[error("n_boundary must be at least 8, got {0}")]
    TooFewBoundaryNodes(usize),
    #[error("theta must lie strictly inside (0, 2*pi), got {0}")]
    ThetaOutOfRange(f64),
    #[error("n_boundary {n} leaves no edge for the accessible segment at theta {theta}")]
    NoRoomForGamma0 { n: usize, theta: f64 },
    #[error("vertex {0} has a non-finite coordinate")]
    NonFiniteVertex(usize),
    #[error("triangle {0} references vertex {1} out of range")]
    VertexIndexOutOfRange(usize, usize),
    #[error("triangle {triangle} is degenerate or clockwise (signed area {area})")]
    NonPositiveArea { triangle: usize, area: f64 },
    #[error("directed edge ({0}, {1}) appears in more than one triangle; mesh is non-conforming")]
    NonConforming(usize, usize),
    #[error("boundary edge ({0}, {1}) does not bound exactly one triangle")]
    BoundaryEdgeNotOnTriangle(usize, usize),
    #[error("topological boundary edge ({0}, {1}) missing from the boundary list")]
    BoundaryEdgeMissing(usize, usize),
    #[error("boundary edges do not form a single closed counter-clockwise loop")]
    BoundaryLoopBroken,
    #[error("vertex {0} belongs to no triangle")]
    OrphanVertex(usize),
    #[error("edges labeled {0:?} do not form one contiguous arc")]
    SegmentNotContiguous(SegmentLabel),
    #[error("segments Gamma11 and Gamma12 do not share a junction node")]
    DisconnectedGamma1,
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// A point in the plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point2<T> {
    pub x: T,
    pub y: T,
}

impl<T: Real> Point2<T> {
    pub fn new(x: T, y: T) -> Self {
        Point2 { x, y }
    }

    pub fn distance(&self, other: &Point2<T>) -> T {
        ((self.x - other.x).powi(2) + (self.y - other.y).powi(2)).sqrt()
    }

    /// Polar angle in [0, 2*pi).
    pub fn angle(&self) -> T {
        let a = self.y.atan2(self.x);
        if a < T::zero() {
            a + real::<T>(2.0) * T::from_f64(std::f64::consts::PI).unwrap()
        } else {
            a
        }
    }
}

/// Label of one boundary edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SegmentLabel {
    /// Accessible segment carrying the overdetermined data.
    Gamma0,
    /// First half of the inaccessible segment.
    Gamma11,
    /// Second half of the inaccessible segment.
    Gamma12,
}

impl SegmentLabel {
    pub const ALL: [SegmentLabel; 3] =
        [SegmentLabel::Gamma0, SegmentLabel::Gamma11, SegmentLabel::Gamma12];

    pub fn token(self) -> &'static str {
        match self {
            SegmentLabel::Gamma0 => "G0",
            SegmentLabel::Gamma11 => "G11",
            SegmentLabel::Gamma12 => "G12",
        }
    }

    pub fn from_token(s: &str) -> Option<Self> {
        match s {
            "G0" => Some(SegmentLabel::Gamma0),
            "G11" => Some(SegmentLabel::Gamma11),
            "G12" => Some(SegmentLabel::Gamma12),
            _ => None,
        }
    }
}

/// A boundary region: a single labeled segment or the union Gamma1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Region {
    Gamma0,
    Gamma11,
    Gamma12,
    /// The union Gamma11 ∪ Gamma12.
    Gamma1,
}

impl Region {
    pub fn contains(self, label: SegmentLabel) -> bool {
        match self {
            Region::Gamma0 => label == SegmentLabel::Gamma0,
            Region::Gamma11 => label == SegmentLabel::Gamma11,
            Region::Gamma12 => label == SegmentLabel::Gamma12,
            Region::Gamma1 => label != SegmentLabel::Gamma0,
        }
    }

    pub fn labels(self) -> &'static [SegmentLabel] {
        match self {
            Region::Gamma0 => &[SegmentLabel::Gamma0],
            Region::Gamma11 => &[SegmentLabel::Gamma11],
            Region::Gamma12 => &[SegmentLabel::Gamma12],
            Region::Gamma1 => &[SegmentLabel::Gamma11, SegmentLabel::Gamma12],
        }
    }
}

impl From<SegmentLabel> for Region {
    fn from(label: SegmentLabel) -> Self {
        match label {
            SegmentLabel::Gamma0 => Region::Gamma0,
            SegmentLabel::Gamma11 => Region::Gamma11,
            SegmentLabel::Gamma12 => Region::Gamma12,
        }
    }
}

/// One labeled edge of the boundary loop, directed counter-clockwise.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BoundaryEdge {
    pub a: usize,
    pub b: usize,
    pub label: SegmentLabel,
}

/// Immutable triangulation of a planar domain with a labeled boundary loop.
///
/// All triangles are counter-clockwise; construction validates conformity,
/// orientation, and the boundary loop, so every held instance is usable.
#[derive(Debug, Clone, PartialEq)]
pub struct TriMesh<T> {
    vertices: Vec<Point2<T>>,
    triangles: Vec<[usize; 3]>,
    boundary_edges: Vec<BoundaryEdge>,
    theta: Option<T>,
}

impl<T: Real> TriMesh<T> {
    pub fn new(
        vertices: Vec<Point2<T>>,
        triangles: Vec<[usize; 3]>,
        boundary_edges: Vec<BoundaryEdge>,
        theta: Option<T>,
    ) -> Result<Self, MeshError> {
        let mesh = TriMesh {
            vertices,
            triangles,
            boundary_edges,
            theta,
        };
        mesh.validate()?;
        Ok(mesh)
    }

    fn validate(&self) -> Result<(), MeshError> {
        for (i, p) in self.vertices.iter().enumerate() {
            if !p.x.is_finite() || !p.y.is_finite() {
                return Err(MeshError::NonFiniteVertex(i));
            }
        }

        let nv = self.vertices.len();
        let mut used = vec![false; nv];
        let mut directed: HashMap<(usize, usize), usize> = HashMap::new();
        for (t, tri) in self.triangles.iter().enumerate() {
            for &v in tri {
                if v >= nv {
                    return Err(MeshError::VertexIndexOutOfRange(t, v));
                }
                used[v] = true;
            }
            let area = self.signed_area(t);
            if !(area > T::zero()) {
                return Err(MeshError::NonPositiveArea {
                    triangle: t,
                    area: area.to_f64().unwrap_or(f64::NAN),
                });
            }
            for e in 0..3 {
                let key = (tri[e], tri[(e + 1) % 3]);
                let count = directed.entry(key).or_insert(0);
                *count += 1;
                if *count > 1 {
                    return Err(MeshError::NonConforming(key.0, key.1));
                }
            }
        }
        if let Some(v) = used.iter().position(|&u| !u) {
            if nv > 0 {
                return Err(MeshError::OrphanVertex(v));
            }
        }

        // The topological boundary: directed edges whose reverse is absent.
        let mut hull: Vec<(usize, usize)> = directed
            .keys()
            .filter(|&&(a, b)| !directed.contains_key(&(b, a)))
            .copied()
            .collect();
        hull.sort_unstable();
        let mut listed: Vec<(usize, usize)> =
            self.boundary_edges.iter().map(|e| (e.a, e.b)).collect();
        listed.sort_unstable();
        for &(a, b) in &listed {
            if hull.binary_search(&(a, b)).is_err() {
                return Err(MeshError::BoundaryEdgeNotOnTriangle(a, b));
            }
        }
        for &(a, b) in &hull {
            if listed.binary_search(&(a, b)).is_err() {
                return Err(MeshError::BoundaryEdgeMissing(a, b));
            }
        }
        if listed.len() != hull.len() {
            return Err(MeshError::BoundaryLoopBroken);
        }

        // Single closed loop in list order, each start node visited once.
        let k = self.boundary_edges.len();
        if k == 0 {
            return Err(MeshError::BoundaryLoopBroken);
        }
        let mut seen_start = vec![false; nv];
        for i in 0..k {
            let cur = &self.boundary_edges[i];
            let next = &self.boundary_edges[(i + 1) % k];
            if cur.b != next.a || seen_start[cur.a] {
                return Err(MeshError::BoundaryLoopBroken);
            }
            seen_start[cur.a] = true;
        }
        Ok(())
    }

    pub fn vertices(&self) -> &[Point2<T>] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn boundary_edges(&self) -> &[BoundaryEdge] {
        &self.boundary_edges
    }

    /// Segment-split angle used to generate a disk mesh; `None` for loaded
    /// meshes.
    pub fn theta(&self) -> Option<T> {
        self.theta
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn signed_area(&self, triangle: usize) -> T {
        let [i, j, k] = self.triangles[triangle];
        let (a, b, c) = (self.vertices[i], self.vertices[j], self.vertices[k]);
        ((b.x - a.x) * (c.y - a.y) - (c.x - a.x) * (b.y - a.y)) / real::<T>(2.0)
    }

    pub fn edge_length(&self, a: usize, b: usize) -> T {
        self.vertices[a].distance(&self.vertices[b])
    }

    /// Boundary edges belonging to a region, in loop order.
    pub fn region_edges(&self, region: Region) -> Vec<BoundaryEdge> {
        self.boundary_edges
            .iter()
            .filter(|e| region.contains(e.label))
            .copied()
            .collect()
    }

    /// Nodes of a region in counter-clockwise order, both junction endpoints
    /// included. Querying [`Region::Gamma1`] returns the `Gamma11` nodes
    /// followed by the `Gamma12` nodes with the shared junction listed once.
    pub fn boundary_nodes(&self, region: Region) -> Result<Vec<usize>, MeshError> {
        match region {
            Region::Gamma1 => {
                let first = self.contiguous_run(SegmentLabel::Gamma11)?;
                let second = self.contiguous_run(SegmentLabel::Gamma12)?;
                if first.is_empty() {
                    return Ok(second);
                }
                if second.is_empty() {
                    return Ok(first);
                }
                if first.last() != second.first() {
                    return Err(MeshError::DisconnectedGamma1);
                }
                let mut nodes = first;
                nodes.extend_from_slice(&second[1..]);
                Ok(nodes)
            }
            Region::Gamma0 => self.contiguous_run(SegmentLabel::Gamma0),
            Region::Gamma11 => self.contiguous_run(SegmentLabel::Gamma11),
            Region::Gamma12 => self.contiguous_run(SegmentLabel::Gamma12),
        }
    }

    fn contiguous_run(&self, label: SegmentLabel) -> Result<Vec<usize>, MeshError> {
        let k = self.boundary_edges.len();
        let total = self
            .boundary_edges
            .iter()
            .filter(|e| e.label == label)
            .count();
        if total == 0 {
            return Ok(Vec::new());
        }
        if total == k {
            // the whole loop carries one label; start anywhere
            let mut nodes: Vec<usize> = self.boundary_edges.iter().map(|e| e.a).collect();
            nodes.push(self.boundary_edges[0].a);
            return Ok(nodes);
        }
        let start = (0..k)
            .find(|&i| {
                self.boundary_edges[i].label == label
                    && self.boundary_edges[(i + k - 1) % k].label != label
            })
            .ok_or(MeshError::SegmentNotContiguous(label))?;
        let mut nodes = vec![self.boundary_edges[start].a];
        let mut i = start;
        let mut run = 0;
        while run < total {
            let e = &self.boundary_edges[i % k];
            if e.label != label {
                return Err(MeshError::SegmentNotContiguous(label));
            }
            nodes.push(e.b);
            run += 1;
            i += 1;
        }
        Ok(nodes)
    }

    /// Total length of the region's polygonal boundary.
    pub fn boundary_measure(&self, region: Region) -> T {
        self.boundary_edges
            .iter()
            .filter(|e| region.contains(e.label))
            .map(|e| self.edge_length(e.a, e.b))
            .sum()
    }

    /// Smallest interior angle over all triangles, in radians.
    pub fn min_interior_angle(&self) -> T {
        let mut worst = T::infinity();
        for tri in &self.triangles {
            for v in 0..3 {
                let p = self.vertices[tri[v]];
                let q = self.vertices[tri[(v + 1) % 3]];
                let r = self.vertices[tri[(v + 2) % 3]];
                let u = Point2::new(q.x - p.x, q.y - p.y);
                let w = Point2::new(r.x - p.x, r.y - p.y);
                let dot = u.x * w.x + u.y * w.y;
                let cross = u.x * w.y - u.y * w.x;
                let ang = cross.abs().atan2(dot);
                if ang < worst {
                    worst = ang;
                }
            }
        }
        worst
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_square() -> TriMesh<f64> {
        // two triangles, boundary loop 0->1->2->3->0
        let vertices = vec![
            Point2::new(0.0, 0.0),
            Point2::new(1.0, 0.0),
            Point2::new(1.0, 1.0),
            Point2::new(0.0, 1.0),
        ];
        let triangles = vec![[0, 1, 2], [0, 2, 3]];
        let boundary = vec![
            BoundaryEdge { a: 0, b: 1, label: SegmentLabel::Gamma11 },
            BoundaryEdge { a: 1, b: 2, label: SegmentLabel::Gamma12 },
            BoundaryEdge { a: 2, b: 3, label: SegmentLabel::Gamma0 },
            BoundaryEdge { a: 3, b: 0, label: SegmentLabel::Gamma0 },
        ];
        TriMesh::new(vertices, triangles, boundary, None).unwrap()
    }

    #[test]
    fn square_mesh_validates() {
        let mesh = unit_square();
        assert_eq!(mesh.vertex_count(), 4);
        assert!((mesh.boundary_measure(Region::Gamma0) - 2.0).abs() < 1e-15);
        assert!((mesh.boundary_measure(Region::Gamma1) - 2.0).abs() < 1e-15);
    }

    #[test]
    fn clockwise_triangle_rejected() {
        let vertices = vec![
            Point2::new(0.0, 0.0),
            Point2::new(1.0, 0.0),
            Point2::new(0.0, 1.0),
        ];
        let err = TriMesh::new(
            vertices,
            vec![[0, 2, 1]],
            vec![
                BoundaryEdge { a: 0, b: 2, label: SegmentLabel::Gamma0 },
                BoundaryEdge { a: 2, b: 1, label: SegmentLabel::Gamma0 },
                BoundaryEdge { a: 1, b: 0, label: SegmentLabel::Gamma0 },
            ],
            None,
        )
        .unwrap_err();
        assert!(matches!(err, MeshError::NonPositiveArea { .. }));
    }

    #[test]
    fn boundary_edge_off_triangle_rejected() {
        let vertices = vec![
            Point2::new(0.0, 0.0),
            Point2::new(1.0, 0.0),
            Point2::new(0.0, 1.0),
        ];
        let err = TriMesh::new(
            vertices,
            vec![[0, 1, 2]],
            vec![
                BoundaryEdge { a: 0, b: 1, label: SegmentLabel::Gamma0 },
                BoundaryEdge { a: 1, b: 0, label: SegmentLabel::Gamma0 },
            ],
            None,
        )
        .unwrap_err();
        assert!(matches!(
            err,
            MeshError::BoundaryEdgeNotOnTriangle(..) | MeshError::BoundaryEdgeMissing(..)
        ));
    }

    #[test]
    fn gamma1_union_nodes_share_junction_once() {
        let mesh = unit_square();
        let nodes = mesh.boundary_nodes(Region::Gamma1).unwrap();
        assert_eq!(nodes, vec![0, 1, 2]);
        let g0 = mesh.boundary_nodes(Region::Gamma0).unwrap();
        assert_eq!(g0, vec![2, 3, 0]);
    }

    #[test]
    fn empty_region_measures_zero() {
        let vertices = vec![
            Point2::new(0.0, 0.0),
            Point2::new(1.0, 0.0),
            Point2::new(0.0, 1.0),
        ];
        let mesh = TriMesh::new(
            vertices,
            vec![[0, 1, 2]],
            vec![
                BoundaryEdge { a: 0, b: 1, label: SegmentLabel::Gamma0 },
                BoundaryEdge { a: 1, b: 2, label: SegmentLabel::Gamma0 },
                BoundaryEdge { a: 2, b: 0, label: SegmentLabel::Gamma0 },
            ],
            None,
        )
        .unwrap();
        assert_eq!(mesh.boundary_measure(Region::Gamma1), 0.0);
        assert!(mesh.boundary_nodes(Region::Gamma11).unwrap().is_empty());
    }
}
