//! P1 assembly: stiffness matrix and Neumann edge loads, both with exact
//! integration (no quadrature error for piecewise-linear data).

use crate::mesh::{Point2, Region, TriMesh};
use crate::scalar::{real, Real};
use crate::sparse::CsrMatrix;

use super::{BoundaryField, FemError};

/// Element stiffness of one counter-clockwise triangle:
/// `K_rs = (b_r b_s + c_r c_s) / (4 A)` with the usual shape-function
/// coefficients `b_r = y_s - y_t`, `c_r = x_t - x_s` (cyclic).
pub fn local_stiffness<T: Real>(a: Point2<T>, b: Point2<T>, c: Point2<T>) -> [[T; 3]; 3] {
    let area2 = (b.x - a.x) * (c.y - a.y) - (c.x - a.x) * (b.y - a.y);
    let bb = [b.y - c.y, c.y - a.y, a.y - b.y];
    let cc = [c.x - b.x, a.x - c.x, b.x - a.x];
    let scale = (real::<T>(2.0) * area2).recip();
    let mut k = [[T::zero(); 3]; 3];
    for r in 0..3 {
        for s in 0..3 {
            k[r][s] = (bb[r] * bb[s] + cc[r] * cc[s]) * scale;
        }
    }
    k
}

/// Assembles the global Laplace stiffness matrix. Row sums vanish (constants
/// are in the kernel) and the matrix is symmetric positive semidefinite.
pub fn assemble_stiffness<T: Real>(mesh: &TriMesh<T>) -> Result<CsrMatrix<T>, FemError> {
    let mut triplets = Vec::with_capacity(mesh.triangles().len() * 9);
    for (t, tri) in mesh.triangles().iter().enumerate() {
        if !(mesh.signed_area(t) > T::zero()) {
            return Err(FemError::DegenerateTriangle(t));
        }
        let v = mesh.vertices();
        let k = local_stiffness(v[tri[0]], v[tri[1]], v[tri[2]]);
        for r in 0..3 {
            for s in 0..3 {
                triplets.push((tri[r], tri[s], k[r][s]));
            }
        }
    }
    Ok(CsrMatrix::from_triplets(mesh.vertex_count(), &triplets)?)
}

/// Edge load vector of a piecewise-linear Neumann datum `g` on a region:
/// per edge of length `L` with endpoint values `(g1, g2)` the contributions
/// are `(L/6)(2 g1 + g2)` and `(L/6)(g1 + 2 g2)`.
pub fn assemble_neumann_load<T: Real>(
    mesh: &TriMesh<T>,
    region: Region,
    g: &BoundaryField<T>,
) -> Result<Vec<T>, FemError> {
    if g.region() != region {
        return Err(FemError::RegionMismatch {
            expected: region,
            got: g.region(),
        });
    }
    let expected = mesh.boundary_nodes(region)?;
    if expected != g.node_ids() {
        return Err(FemError::FieldMeshMismatch(region));
    }
    let mut load = vec![T::zero(); mesh.vertex_count()];
    let sixth = real::<T>(1.0 / 6.0);
    let two = real::<T>(2.0);
    let ids = g.node_ids();
    let vals = g.values();
    for i in 0..ids.len().saturating_sub(1) {
        let (a, b) = (ids[i], ids[i + 1]);
        let len = mesh.edge_length(a, b);
        let (ga, gb) = (vals[i], vals[i + 1]);
        load[a] += len * sixth * (two * ga + gb);
        load[b] += len * sixth * (ga + two * gb);
    }
    Ok(load)
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use crate::mesh::{generate_disk_mesh, Region};

    use super::*;

    #[test]
    fn unit_right_triangle_matches_analytic_matrix() {
        let k = local_stiffness::<f64>(
            Point2::new(0.0, 0.0),
            Point2::new(1.0, 0.0),
            Point2::new(0.0, 1.0),
        );
        let expect = [[1.0, -0.5, -0.5], [-0.5, 0.5, 0.0], [-0.5, 0.0, 0.5]];
        for r in 0..3 {
            for s in 0..3 {
                assert!(
                    (k[r][s] - expect[r][s]).abs() < 1e-12,
                    "K[{r}][{s}] = {}",
                    k[r][s]
                );
            }
        }
    }

    #[test]
    fn equilateral_triangle_matches_cotangent_formula() {
        let h = (3.0f64).sqrt() / 2.0;
        let k = local_stiffness(
            Point2::new(0.0, 0.0),
            Point2::new(1.0, 0.0),
            Point2::new(0.5, h),
        );
        let diag = 1.0 / 3.0f64.sqrt();
        let off = -1.0 / (2.0 * 3.0f64.sqrt());
        for r in 0..3 {
            for s in 0..3 {
                let expect = if r == s { diag } else { off };
                assert!((k[r][s] - expect).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn stiffness_rows_sum_to_zero() {
        let mesh = generate_disk_mesh::<f64>(24, PI / 3.0).unwrap();
        let k = assemble_stiffness(&mesh).unwrap();
        for i in 0..k.n() {
            let sum: f64 = k.row(i).map(|(_, v)| v).sum();
            assert!(sum.abs() < 1e-12, "row {i} sums to {sum}");
        }
        assert!(k.max_asymmetry() < 1e-14);
    }

    #[test]
    fn constant_neumann_load_splits_edge_lengths() {
        let mesh = generate_disk_mesh::<f64>(8, PI / 2.0).unwrap();
        let g = BoundaryField::constant(&mesh, Region::Gamma11, 1.0).unwrap();
        let load = assemble_neumann_load(&mesh, Region::Gamma11, &g).unwrap();
        let ids = mesh.boundary_nodes(Region::Gamma11).unwrap();
        let len = mesh.edge_length(ids[0], ids[1]);
        assert!((load[ids[0]] - len / 2.0).abs() < 1e-14);
        assert!((load[ids[1]] - len / 2.0).abs() < 1e-14);
        assert_eq!(load.iter().filter(|&&v| v != 0.0).count(), 2);
    }

    #[test]
    fn linear_neumann_load_is_exact() {
        // single edge, values (0, 1) -> loads (L/6, L/3)
        let mesh = generate_disk_mesh::<f64>(8, PI / 2.0).unwrap();
        let ids = mesh.boundary_nodes(Region::Gamma11).unwrap();
        let g = BoundaryField::from_values(&mesh, Region::Gamma11, vec![0.0, 1.0]).unwrap();
        let load = assemble_neumann_load(&mesh, Region::Gamma11, &g).unwrap();
        let len = mesh.edge_length(ids[0], ids[1]);
        assert!((load[ids[0]] - len / 6.0).abs() < 1e-14);
        assert!((load[ids[1]] - len / 3.0).abs() < 1e-14);
    }

    #[test]
    fn zero_neumann_gives_zero_load() {
        let mesh = generate_disk_mesh::<f64>(8, PI / 2.0).unwrap();
        let g = BoundaryField::constant(&mesh, Region::Gamma0, 0.0).unwrap();
        let load = assemble_neumann_load(&mesh, Region::Gamma0, &g).unwrap();
        assert!(load.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn label_mismatch_is_rejected() {
        let mesh = generate_disk_mesh::<f64>(8, PI / 2.0).unwrap();
        let g = BoundaryField::constant(&mesh, Region::Gamma0, 1.0).unwrap();
        let err = assemble_neumann_load(&mesh, Region::Gamma1, &g).unwrap_err();
        assert!(matches!(err, FemError::RegionMismatch { .. }));
    }
}
