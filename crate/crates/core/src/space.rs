//! Discontinuous piecewise-linear finite element space on a triangulation.
//!
//! Every triangle carries its own three nodal P1 basis functions (the
//! barycentric coordinates), so degrees of freedom never couple across
//! elements except through edge terms. Global dof `3 t + j` is local
//! function `j` on triangle `t`.

use crate::mesh::Mesh;
use crate::quadrature::{gauss_legendre_01, TriangleRule};

/// Default SIPG penalty, comfortably above the stability threshold for
/// linear elements; configurable per space.
pub const DEFAULT_SIGMA: f64 = 18.0;

/// Local basis size for linear elements.
pub const N_LOC: usize = 3;

/// Precomputed affine geometry of one triangle.
#[derive(Debug, Clone)]
pub struct ElementGeometry {
    pub verts: [(f64, f64); 3],
    pub area: f64,
    /// Constant gradients of the three nodal basis functions.
    pub grads: [(f64, f64); 3],
}

impl ElementGeometry {
    fn new(verts: [(f64, f64); 3]) -> Self {
        let [p0, p1, p2] = verts;
        let det = (p1.0 - p0.0) * (p2.1 - p0.1) - (p1.1 - p0.1) * (p2.0 - p0.0);
        let area = 0.5 * det;
        let grads = [
            ((p1.1 - p2.1) / det, (p2.0 - p1.0) / det),
            ((p2.1 - p0.1) / det, (p0.0 - p2.0) / det),
            ((p0.1 - p1.1) / det, (p1.0 - p0.0) / det),
        ];
        Self { verts, area, grads }
    }

    /// Barycentric coordinates of a physical point.
    pub fn barycentric(&self, x: (f64, f64)) -> [f64; 3] {
        let [p0, p1, p2] = self.verts;
        let det = 2.0 * self.area;
        let l1 = ((x.0 - p0.0) * (p2.1 - p0.1) - (x.1 - p0.1) * (p2.0 - p0.0)) / det;
        let l2 = ((p1.0 - p0.0) * (x.1 - p0.1) - (p1.1 - p0.1) * (x.0 - p0.0)) / det;
        [1.0 - l1 - l2, l1, l2]
    }
}

/// dG space: quadrature rules, penalty parameter and element geometry.
#[derive(Debug, Clone)]
pub struct DgSpace {
    pub n_tri: usize,
    pub n_dof: usize,
    /// SIPG penalty parameter sigma.
    pub sigma: f64,
    pub volume_rule: TriangleRule,
    /// Gauss nodes/weights on [0, 1] for edge integrals.
    pub edge_nodes: Vec<f64>,
    pub edge_weights: Vec<f64>,
    geometry: Vec<ElementGeometry>,
}

impl DgSpace {
    /// Space with the default rules: degree-5 volume quadrature (exact for
    /// the quartic nonlinearity against linear test functions) and 4-point
    /// Gauss edges.
    pub fn new(mesh: &Mesh, sigma: f64) -> Self {
        assert!(sigma > 0.0, "penalty parameter must be positive");
        let (edge_nodes, edge_weights) = gauss_legendre_01(4);
        let geometry = (0..mesh.n_triangles())
            .map(|t| ElementGeometry::new(mesh.vertex_coords(t)))
            .collect::<Vec<_>>();
        Self {
            n_tri: mesh.n_triangles(),
            n_dof: N_LOC * mesh.n_triangles(),
            sigma,
            volume_rule: TriangleRule::degree5(),
            edge_nodes,
            edge_weights,
            geometry,
        }
    }

    pub fn with_default_sigma(mesh: &Mesh) -> Self {
        Self::new(mesh, DEFAULT_SIGMA)
    }

    pub fn geometry(&self, t: usize) -> &ElementGeometry {
        &self.geometry[t]
    }

    pub fn global_dof(&self, t: usize, j: usize) -> usize {
        N_LOC * t + j
    }

    /// Element owning a global dof, and the local index within it.
    pub fn dof_location(&self, dof: usize) -> (usize, usize) {
        (dof / N_LOC, dof % N_LOC)
    }

    /// Value of the element-local linear interpolant at a physical point.
    pub fn value_at(&self, t: usize, coeffs: &[f64; 3], x: (f64, f64)) -> f64 {
        let l = self.geometry[t].barycentric(x);
        coeffs[0] * l[0] + coeffs[1] * l[1] + coeffs[2] * l[2]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{build_mesh, BoundaryKind, Rect};

    #[test]
    fn dof_count_and_geometry() {
        let mesh = build_mesh(Rect::unit_square(), 0.5, BoundaryKind::Neumann).unwrap();
        let space = DgSpace::with_default_sigma(&mesh);
        assert_eq!(space.n_dof, 3 * mesh.n_triangles());
        let total: f64 = (0..space.n_tri).map(|t| space.geometry(t).area).sum();
        assert!((total - 1.0).abs() < 1e-14);
    }

    #[test]
    fn gradients_reproduce_linear_functions() {
        let mesh = build_mesh(Rect::unit_square(), 0.5, BoundaryKind::Neumann).unwrap();
        let space = DgSpace::with_default_sigma(&mesh);
        // g(x, y) = 2x - 3y + 1 interpolated at the vertices must have the
        // exact constant gradient (2, -3) on every element.
        for t in 0..space.n_tri {
            let geo = space.geometry(t);
            let coeffs: Vec<f64> = geo.verts.iter().map(|v| 2.0 * v.0 - 3.0 * v.1 + 1.0).collect();
            let gx: f64 = (0..3).map(|j| coeffs[j] * geo.grads[j].0).sum();
            let gy: f64 = (0..3).map(|j| coeffs[j] * geo.grads[j].1).sum();
            assert!((gx - 2.0).abs() < 1e-13 && (gy + 3.0).abs() < 1e-13);
        }
    }

    #[test]
    fn barycentric_is_nodal() {
        let mesh = build_mesh(Rect::unit_square(), 0.5, BoundaryKind::Neumann).unwrap();
        let space = DgSpace::with_default_sigma(&mesh);
        for t in 0..space.n_tri {
            let geo = space.geometry(t);
            for (i, &v) in geo.verts.iter().enumerate() {
                let l = geo.barycentric(v);
                for (j, &lj) in l.iter().enumerate() {
                    let want = if i == j { 1.0 } else { 0.0 };
                    assert!((lj - want).abs() < 1e-13);
                }
            }
        }
    }
}
