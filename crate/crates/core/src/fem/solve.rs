//! Constrained mixed solves and boundary post-processing.
//!
//! Dirichlet conditions are eliminated symmetrically (constrained unknowns
//! move to the right-hand side), which keeps the reduced system SPD for the
//! conjugate gradient solver. The normal derivative is recovered
//! variationally: the stiffness residual `r = K u - F` carries the boundary
//! flux weights, and a boundary mass solve on the requested segment turns
//! them into a nodal function.

use crate::mesh::{Region, TriMesh};
use crate::scalar::{real, Real};
use crate::sparse::{conjugate_gradient, CsrMatrix, SolveReport};

use super::{BoundaryField, FemSolution, FemError, MixedBvp};

/// Relative CG tolerance; floored well above machine precision so that
/// single-precision instantiations remain solvable.
fn cg_tolerance<T: Real>() -> T {
    real::<T>(1e-10).max(T::epsilon() * real::<T>(50.0))
}

/// A solved mixed problem together with the data needed for flux recovery.
pub struct SolvedBvp<'m, T> {
    pub solution: FemSolution<'m, T>,
    /// Assembled Neumann load of the unconstrained weak form.
    pub neumann_load: Vec<T>,
    pub report: SolveReport<T>,
}

/// Assembles and solves in one call.
pub fn solve_mixed_bvp<'m, T: Real>(
    mesh: &'m TriMesh<T>,
    bvp: &MixedBvp<T>,
) -> Result<FemSolution<'m, T>, FemError> {
    let stiffness = super::assemble_stiffness(mesh)?;
    Ok(solve_mixed_bvp_with(mesh, bvp, &stiffness)?.solution)
}

/// Solves a mixed problem against a pre-assembled stiffness matrix.
pub fn solve_mixed_bvp_with<'m, T: Real>(
    mesh: &'m TriMesh<T>,
    bvp: &MixedBvp<T>,
    stiffness: &CsrMatrix<T>,
) -> Result<SolvedBvp<'m, T>, FemError> {
    let nv = mesh.vertex_count();
    if stiffness.n() != nv {
        return Err(FemError::DimensionMismatch {
            got: stiffness.n(),
            want: nv,
        });
    }
    bvp.check_against(mesh)?;
    let neumann_load = bvp.neumann_load(mesh)?;
    let constrained = bvp.dirichlet_values(mesh)?;

    let mut position = vec![usize::MAX; nv];
    let mut free: Vec<usize> = Vec::new();
    for (i, c) in constrained.iter().enumerate() {
        if c.is_none() {
            position[i] = free.len();
            free.push(i);
        }
    }

    let mut nodal_values: Vec<T> = constrained
        .iter()
        .map(|c| c.unwrap_or(T::zero()))
        .collect();

    if free.is_empty() {
        let solution = FemSolution::new(mesh, nodal_values)?;
        return Ok(SolvedBvp {
            solution,
            neumann_load,
            report: SolveReport {
                iterations: 0,
                relative_residual: T::zero(),
                converged: true,
            },
        });
    }

    let mut rhs: Vec<T> = free.iter().map(|&i| neumann_load[i]).collect();
    let mut triplets: Vec<(usize, usize, T)> = Vec::with_capacity(stiffness.nnz());
    for (fi, &i) in free.iter().enumerate() {
        for (col, v) in stiffness.row(i) {
            match constrained[col] {
                Some(u) => rhs[fi] -= v * u,
                None => triplets.push((fi, position[col], v)),
            }
        }
    }
    let reduced = CsrMatrix::from_triplets(free.len(), &triplets)?;

    let (x, report) = conjugate_gradient(
        &reduced,
        &rhs,
        cg_tolerance::<T>(),
        10 * free.len().max(1),
    )?;
    if !report.converged {
        return Err(FemError::SolveFailed {
            iterations: report.iterations,
            relative_residual: report.relative_residual.to_f64().unwrap_or(f64::NAN),
        });
    }
    for (fi, &i) in free.iter().enumerate() {
        nodal_values[i] = x[fi];
    }

    let solution = FemSolution::new(mesh, nodal_values)?;
    Ok(SolvedBvp {
        solution,
        neumann_load,
        report,
    })
}

/// Restriction of a solution to the boundary nodes of a region.
pub fn trace<T: Real>(
    solution: &FemSolution<'_, T>,
    region: Region,
) -> Result<BoundaryField<T>, FemError> {
    let node_ids = solution.mesh().boundary_nodes(region)?;
    let values = node_ids.iter().map(|&i| solution.value(i)).collect();
    BoundaryField::from_values(solution.mesh(), region, values)
}

/// Variational recovery of the outward normal derivative on a region.
///
/// `stiffness` and `load` must be those of the solved problem. The residual
/// weights `r = K u - F` restricted to the region's nodes feed a boundary
/// mass solve `M v = r` on the region's edges (a tridiagonal SPD system).
pub fn normal_derivative<T: Real>(
    solution: &FemSolution<'_, T>,
    region: Region,
    stiffness: &CsrMatrix<T>,
    load: &[T],
) -> Result<BoundaryField<T>, FemError> {
    let mesh = solution.mesh();
    if stiffness.n() != mesh.vertex_count() || load.len() != mesh.vertex_count() {
        return Err(FemError::DimensionMismatch {
            got: stiffness.n().max(load.len()),
            want: mesh.vertex_count(),
        });
    }
    let node_ids = mesh.boundary_nodes(region)?;
    if node_ids.len() < 2 {
        return Err(FemError::EmptyRegion(region));
    }

    let ku = stiffness.spmv(solution.values())?;
    let rhs: Vec<T> = node_ids.iter().map(|&i| ku[i] - load[i]).collect();

    let m = node_ids.len();
    let third = real::<T>(1.0 / 3.0);
    let sixth = real::<T>(1.0 / 6.0);
    let mut diag = vec![T::zero(); m];
    let mut off = vec![T::zero(); m - 1];
    for i in 0..m - 1 {
        let len = mesh.edge_length(node_ids[i], node_ids[i + 1]);
        diag[i] += len * third;
        diag[i + 1] += len * third;
        off[i] = len * sixth;
    }
    let values = solve_tridiagonal(diag, off, rhs);
    BoundaryField::from_values(mesh, region, values)
}

/// Thomas algorithm for a symmetric positive-definite tridiagonal system.
fn solve_tridiagonal<T: Real>(mut diag: Vec<T>, off: Vec<T>, mut rhs: Vec<T>) -> Vec<T> {
    let n = diag.len();
    for i in 1..n {
        let w = off[i - 1] / diag[i - 1];
        diag[i] = diag[i] - w * off[i - 1];
        rhs[i] = rhs[i] - w * rhs[i - 1];
    }
    let mut x = vec![T::zero(); n];
    x[n - 1] = rhs[n - 1] / diag[n - 1];
    for i in (0..n - 1).rev() {
        x[i] = (rhs[i] - off[i] * x[i + 1]) / diag[i];
    }
    x
}

/// Piecewise-linear boundary L2 norm `sqrt(v^T M v)` over the field's
/// region, with the exact edge mass matrix (`L/3` diagonal, `L/6` coupling).
pub fn l2_boundary_norm<T: Real>(field: &BoundaryField<T>, mesh: &TriMesh<T>) -> T {
    let ids = field.node_ids();
    let vals = field.values();
    let third = real::<T>(1.0 / 3.0);
    let mut acc = T::zero();
    for i in 0..ids.len().saturating_sub(1) {
        let len = mesh.edge_length(ids[i], ids[i + 1]);
        let (a, b) = (vals[i], vals[i + 1]);
        acc += len * third * (a * a + b * b + a * b);
    }
    acc.sqrt()
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use crate::fem::{assemble_stiffness, BoundaryCondition};
    use crate::mesh::generate_disk_mesh;

    use super::*;

    fn dirichlet<T: Real>(f: BoundaryField<T>) -> BoundaryCondition<T> {
        BoundaryCondition::Dirichlet(f)
    }

    fn neumann<T: Real>(f: BoundaryField<T>) -> BoundaryCondition<T> {
        BoundaryCondition::Neumann(f)
    }

    #[test]
    fn constant_dirichlet_reproduced_everywhere() {
        let mesh = generate_disk_mesh::<f64>(16, PI / 2.0).unwrap();
        let c = 3.25;
        let bvp = MixedBvp::new(vec![
            dirichlet(BoundaryField::constant(&mesh, Region::Gamma0, c).unwrap()),
            dirichlet(BoundaryField::constant(&mesh, Region::Gamma1, c).unwrap()),
        ])
        .unwrap();
        let sol = solve_mixed_bvp(&mesh, &bvp).unwrap();
        for &v in sol.values() {
            assert!((v - c).abs() < 1e-9);
        }
    }

    #[test]
    fn linear_dirichlet_reproduced_exactly() {
        let mesh = generate_disk_mesh::<f64>(24, PI / 3.0).unwrap();
        let bvp = MixedBvp::new(vec![
            dirichlet(BoundaryField::interpolate(&mesh, Region::Gamma0, |x, _| x).unwrap()),
            dirichlet(BoundaryField::interpolate(&mesh, Region::Gamma1, |x, _| x).unwrap()),
        ])
        .unwrap();
        let sol = solve_mixed_bvp(&mesh, &bvp).unwrap();
        for (i, &v) in sol.values().iter().enumerate() {
            let x = mesh.vertices()[i].x;
            assert!((v - x).abs() < 1e-10, "node {i}: {v} vs {x}");
        }
    }

    #[test]
    fn constant_solution_has_zero_flux() {
        let mesh = generate_disk_mesh::<f64>(16, PI / 2.0).unwrap();
        let stiffness = assemble_stiffness(&mesh).unwrap();
        let c = 2.0;
        let bvp = MixedBvp::new(vec![
            dirichlet(BoundaryField::constant(&mesh, Region::Gamma0, c).unwrap()),
            dirichlet(BoundaryField::constant(&mesh, Region::Gamma1, c).unwrap()),
        ])
        .unwrap();
        let solved = solve_mixed_bvp_with(&mesh, &bvp, &stiffness).unwrap();
        let flux =
            normal_derivative(&solved.solution, Region::Gamma1, &stiffness, &solved.neumann_load)
                .unwrap();
        for &v in flux.values() {
            assert!(v.abs() < 1e-8, "flux {v}");
        }
    }

    #[test]
    fn trace_of_constant_is_constant() {
        let mesh = generate_disk_mesh::<f64>(8, PI / 2.0).unwrap();
        let sol = FemSolution::new(&mesh, vec![7.5; mesh.vertex_count()]).unwrap();
        let tr = trace(&sol, Region::Gamma1).unwrap();
        assert!(tr.values().iter().all(|&v| v == 7.5));
    }

    #[test]
    fn trace_restricts_nodal_x() {
        let mesh = generate_disk_mesh::<f64>(16, PI / 2.0).unwrap();
        let values: Vec<f64> = mesh.vertices().iter().map(|p| p.x).collect();
        let sol = FemSolution::new(&mesh, values).unwrap();
        let tr = trace(&sol, Region::Gamma1).unwrap();
        for (&id, &v) in tr.node_ids().iter().zip(tr.values()) {
            let angle = mesh.vertices()[id].angle();
            assert!((v - angle.cos()).abs() < 1e-14);
        }
        // union trace is the concatenation of the half traces
        let t11 = trace(&sol, Region::Gamma11).unwrap();
        let t12 = trace(&sol, Region::Gamma12).unwrap();
        let rebuilt: Vec<f64> = t11
            .values()
            .iter()
            .chain(t12.values()[1..].iter())
            .copied()
            .collect();
        assert_eq!(tr.values(), rebuilt.as_slice());
    }

    #[test]
    fn all_neumann_rejected() {
        let mesh = generate_disk_mesh::<f64>(8, PI / 2.0).unwrap();
        let bvp = MixedBvp::new(vec![
            neumann(BoundaryField::constant(&mesh, Region::Gamma0, 0.0).unwrap()),
            neumann(BoundaryField::constant(&mesh, Region::Gamma1, 0.0).unwrap()),
        ]);
        assert!(matches!(bvp, Err(FemError::NoDirichletSegment)));
    }

    #[test]
    fn missing_segment_rejected_at_solve() {
        let mesh = generate_disk_mesh::<f64>(8, PI / 2.0).unwrap();
        let bvp = MixedBvp::new(vec![dirichlet(
            BoundaryField::constant(&mesh, Region::Gamma0, 0.0).unwrap(),
        )])
        .unwrap();
        let err = solve_mixed_bvp(&mesh, &bvp).unwrap_err();
        assert!(matches!(err, FemError::MissingAssignment(_)));
    }

    #[test]
    fn l2_norm_of_constant_is_sqrt_measure() {
        let mesh = generate_disk_mesh::<f64>(32, PI / 3.0).unwrap();
        let one = BoundaryField::constant(&mesh, Region::Gamma1, 1.0).unwrap();
        let norm = l2_boundary_norm(&one, &mesh);
        let measure = mesh.boundary_measure(Region::Gamma1);
        assert!((norm - measure.sqrt()).abs() < 1e-12);
        let zero = BoundaryField::constant(&mesh, Region::Gamma1, 0.0).unwrap();
        assert_eq!(l2_boundary_norm(&zero, &mesh), 0.0);
    }

    #[test]
    fn tridiagonal_solver_matches_dense() {
        let diag = vec![4.0f64, 5.0, 6.0, 5.0];
        let off = vec![1.0, 2.0, 1.5];
        let x_true = [1.0, -2.0, 3.0, 0.5];
        // rhs = M x
        let rhs = vec![
            4.0 * 1.0 + 1.0 * -2.0,
            1.0 * 1.0 + 5.0 * -2.0 + 2.0 * 3.0,
            2.0 * -2.0 + 6.0 * 3.0 + 1.5 * 0.5,
            1.5 * 3.0 + 5.0 * 0.5,
        ];
        let x = solve_tridiagonal(diag, off, rhs);
        for (a, b) in x.iter().zip(&x_true) {
            assert!((a - b).abs() < 1e-12);
        }
    }
}
