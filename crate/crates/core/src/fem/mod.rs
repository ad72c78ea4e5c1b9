//! P1 (continuous piecewise-linear) finite elements for mixed
//! Dirichlet/Neumann Laplace problems: assembly, constrained solves,
//! boundary traces, variational flux recovery, and boundary L2 norms.

mod assemble;
mod solve;

pub use assemble::{assemble_neumann_load, assemble_stiffness, local_stiffness};
pub use solve::{
    l2_boundary_norm, normal_derivative, solve_mixed_bvp, solve_mixed_bvp_with, trace, SolvedBvp,
};

use thiserror::Error;

use crate::mesh::{MeshError, Region, SegmentLabel, TriMesh};
use crate::scalar::Real;
use crate::sparse::SparseError;

#[derive(Debug, Error)]
pub enum FemError {
    #[error("field lives on {got:?}, expected {expected:?}")]
    RegionMismatch { expected: Region, got: Region },
    #[error("field nodes do not match the mesh boundary nodes of {0:?}")]
    FieldMeshMismatch(Region),
    #[error("fields are incompatible (different region or node set)")]
    IncompatibleFields,
    #[error("field value at node {0} is not finite")]
    NonFiniteValue(usize),
    #[error("segment {0:?} is assigned more than one boundary condition")]
    DuplicateAssignment(SegmentLabel),
    #[error("segment {0:?} has boundary edges but no boundary condition")]
    MissingAssignment(SegmentLabel),
    #[error("no Dirichlet segment: the pure-Neumann problem is singular")]
    NoDirichletSegment,
    #[error("region {0:?} has no boundary edges on this mesh")]
    EmptyRegion(Region),
    #[error("triangle {0} is degenerate")]
    DegenerateTriangle(usize),
    #[error("matrix dimension {got} does not match mesh vertex count {want}")]
    DimensionMismatch { got: usize, want: usize },
    #[error(
        "conjugate gradient stalled after {iterations} iterations \
         (relative residual {relative_residual:.3e})"
    )]
    SolveFailed {
        iterations: usize,
        relative_residual: f64,
    },
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error(transparent)]
    Sparse(#[from] SparseError),
}

/// Nodal scalar function on one labeled boundary region.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryField<T> {
    region: Region,
    node_ids: Vec<usize>,
    values: Vec<T>,
}

impl<T: Real> BoundaryField<T> {
    /// Samples a pointwise function at the region's boundary nodes.
    pub fn interpolate(
        mesh: &TriMesh<T>,
        region: Region,
        f: impl Fn(T, T) -> T,
    ) -> Result<Self, FemError> {
        let node_ids = mesh.boundary_nodes(region)?;
        let values = node_ids
            .iter()
            .map(|&i| {
                let p = mesh.vertices()[i];
                f(p.x, p.y)
            })
            .collect();
        Ok(BoundaryField {
            region,
            node_ids,
            values,
        })
    }

    /// Wraps explicit nodal values; they must match the region's node list.
    pub fn from_values(
        mesh: &TriMesh<T>,
        region: Region,
        values: Vec<T>,
    ) -> Result<Self, FemError> {
        let node_ids = mesh.boundary_nodes(region)?;
        if node_ids.len() != values.len() {
            return Err(FemError::FieldMeshMismatch(region));
        }
        if let Some(k) = values.iter().position(|v| !v.is_finite()) {
            return Err(FemError::NonFiniteValue(node_ids[k]));
        }
        Ok(BoundaryField {
            region,
            node_ids,
            values,
        })
    }

    pub fn constant(mesh: &TriMesh<T>, region: Region, c: T) -> Result<Self, FemError> {
        Self::interpolate(mesh, region, |_, _| c)
    }

    pub fn region(&self) -> Region {
        self.region
    }

    pub fn node_ids(&self) -> &[usize] {
        &self.node_ids
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [T] {
        &mut self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Same region and node set.
    pub fn is_compatible(&self, other: &Self) -> bool {
        self.region == other.region && self.node_ids == other.node_ids
    }

    /// Componentwise difference, used by stopping criteria and error norms.
    pub fn sub(&self, other: &Self) -> Result<Self, FemError> {
        if !self.is_compatible(other) {
            return Err(FemError::IncompatibleFields);
        }
        Ok(BoundaryField {
            region: self.region,
            node_ids: self.node_ids.clone(),
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| a - b)
                .collect(),
        })
    }

    /// Restriction to a sub-region (shares the junction nodes).
    pub fn restrict(&self, mesh: &TriMesh<T>, region: Region) -> Result<Self, FemError> {
        let node_ids = mesh.boundary_nodes(region)?;
        let values = node_ids
            .iter()
            .map(|id| {
                self.node_ids
                    .iter()
                    .position(|n| n == id)
                    .map(|k| self.values[k])
                    .ok_or(FemError::FieldMeshMismatch(region))
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(BoundaryField {
            region,
            node_ids,
            values,
        })
    }

    fn check_against(&self, mesh: &TriMesh<T>) -> Result<(), FemError> {
        let expected = mesh.boundary_nodes(self.region)?;
        if expected != self.node_ids {
            return Err(FemError::FieldMeshMismatch(self.region));
        }
        Ok(())
    }
}

/// Dirichlet or Neumann data on one region.
#[derive(Debug, Clone)]
pub enum BoundaryCondition<T> {
    Dirichlet(BoundaryField<T>),
    Neumann(BoundaryField<T>),
}

impl<T: Real> BoundaryCondition<T> {
    pub fn field(&self) -> &BoundaryField<T> {
        match self {
            BoundaryCondition::Dirichlet(f) | BoundaryCondition::Neumann(f) => f,
        }
    }

    pub fn region(&self) -> Region {
        self.field().region()
    }

    pub fn is_dirichlet(&self) -> bool {
        matches!(self, BoundaryCondition::Dirichlet(_))
    }
}

/// A well-posed mixed boundary-value problem: every labeled segment gets
/// exactly one condition and at least one segment is Dirichlet.
#[derive(Debug, Clone)]
pub struct MixedBvp<T> {
    conditions: Vec<BoundaryCondition<T>>,
}

impl<T: Real> MixedBvp<T> {
    pub fn new(conditions: Vec<BoundaryCondition<T>>) -> Result<Self, FemError> {
        let mut covered: Vec<SegmentLabel> = Vec::new();
        for cond in &conditions {
            for &label in cond.region().labels() {
                if covered.contains(&label) {
                    return Err(FemError::DuplicateAssignment(label));
                }
                covered.push(label);
            }
        }
        if !conditions.iter().any(|c| c.is_dirichlet()) {
            return Err(FemError::NoDirichletSegment);
        }
        Ok(MixedBvp { conditions })
    }

    pub fn conditions(&self) -> &[BoundaryCondition<T>] {
        &self.conditions
    }

    /// Right-hand side of the unconstrained weak form: the sum of the edge
    /// load integrals of every Neumann condition.
    pub fn neumann_load(&self, mesh: &TriMesh<T>) -> Result<Vec<T>, FemError> {
        let mut load = vec![T::zero(); mesh.vertex_count()];
        for cond in &self.conditions {
            if let BoundaryCondition::Neumann(g) = cond {
                let part = assemble_neumann_load(mesh, g.region(), g)?;
                for (acc, v) in load.iter_mut().zip(part) {
                    *acc += v;
                }
            }
        }
        Ok(load)
    }

    /// Prescribed nodal values; where a Dirichlet segment meets any other
    /// segment at a junction node, Dirichlet wins. Conditions are applied in
    /// order, so overlapping Dirichlet junction values resolve to the later
    /// condition.
    pub fn dirichlet_values(&self, mesh: &TriMesh<T>) -> Result<Vec<Option<T>>, FemError> {
        let mut constrained = vec![None; mesh.vertex_count()];
        for cond in &self.conditions {
            if let BoundaryCondition::Dirichlet(field) = cond {
                for (&id, &v) in field.node_ids().iter().zip(field.values()) {
                    constrained[id] = Some(v);
                }
            }
        }
        Ok(constrained)
    }

    fn check_against(&self, mesh: &TriMesh<T>) -> Result<(), FemError> {
        let mut covered: Vec<SegmentLabel> = Vec::new();
        for cond in &self.conditions {
            cond.field().check_against(mesh)?;
            covered.extend_from_slice(cond.region().labels());
        }
        for label in SegmentLabel::ALL {
            let has_edges = mesh
                .boundary_edges()
                .iter()
                .any(|e| e.label == label);
            if has_edges && !covered.contains(&label) {
                return Err(FemError::MissingAssignment(label));
            }
        }
        // at least one Dirichlet segment with edges on this mesh
        let live_dirichlet = self.conditions.iter().any(|c| {
            c.is_dirichlet()
                && c.region()
                    .labels()
                    .iter()
                    .any(|&l| mesh.boundary_edges().iter().any(|e| e.label == l))
        });
        if !live_dirichlet {
            return Err(FemError::NoDirichletSegment);
        }
        Ok(())
    }
}

/// Nodal solution over the whole mesh.
#[derive(Debug, Clone)]
pub struct FemSolution<'m, T> {
    mesh: &'m TriMesh<T>,
    nodal_values: Vec<T>,
}

impl<'m, T: Real> FemSolution<'m, T> {
    pub fn new(mesh: &'m TriMesh<T>, nodal_values: Vec<T>) -> Result<Self, FemError> {
        if nodal_values.len() != mesh.vertex_count() {
            return Err(FemError::DimensionMismatch {
                got: nodal_values.len(),
                want: mesh.vertex_count(),
            });
        }
        Ok(FemSolution { mesh, nodal_values })
    }

    pub fn mesh(&self) -> &'m TriMesh<T> {
        self.mesh
    }

    pub fn values(&self) -> &[T] {
        &self.nodal_values
    }

    pub fn value(&self, node: usize) -> T {
        self.nodal_values[node]
    }
}
