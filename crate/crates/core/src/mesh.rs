//! Structured triangular meshes on rectangles.
//!
//! A rectangle is split into an `nx x ny` grid of cells, each cut along
//! the lower-left to upper-right diagonal into two triangles (the same
//! diagonal everywhere, so meshes are reproducible). Triangle `2k` is the
//! lower-right half of cell `k`, triangle `2k + 1` the upper-left half,
//! both with counter-clockwise vertex order.
//!
//! Interior edges carry the pair of owner triangles, the unit normal
//! pointing from `left` into `right`, and an assembly weight. Under
//! periodic boundary conditions every boundary edge is reclassified as an
//! interior edge whose `right` triangle is the wrapped neighbour on the
//! opposite side; both edges of a periodic pair stay in the list, each
//! with weight 1/2, so their summed contribution equals the single
//! topological edge of the torus. `right_shift` translates points of the
//! edge onto the partner edge for evaluating right-side traces.

use crate::error::Error;
use crate::Result;

/// Axis-aligned rectangular domain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect {
    pub x0: f64,
    pub x1: f64,
    pub y0: f64,
    pub y1: f64,
}

impl Rect {
    pub fn new(x0: f64, x1: f64, y0: f64, y1: f64) -> Self {
        Self { x0, x1, y0, y1 }
    }

    pub fn unit_square() -> Self {
        Self::new(0.0, 1.0, 0.0, 1.0)
    }

    pub fn width(&self) -> f64 {
        self.x1 - self.x0
    }

    pub fn height(&self) -> f64 {
        self.y1 - self.y0
    }

    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }
}

/// Boundary condition kind; the SIPG form has no boundary terms for
/// homogeneous Neumann conditions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundaryKind {
    Neumann,
    Periodic,
}

/// Interior edge between two triangles.
#[derive(Debug, Clone)]
pub struct InteriorEdge {
    /// Endpoint vertex indices (geometry of the left triangle's side).
    pub verts: (usize, usize),
    pub left: usize,
    pub right: usize,
    /// Edge length h_E.
    pub length: f64,
    /// Unit normal pointing from `left` into `right`.
    pub normal: (f64, f64),
    /// Assembly weight: 1 for ordinary edges, 1/2 for each member of a
    /// periodic pair.
    pub weight: f64,
    /// Translation mapping points on this edge onto the right triangle's
    /// copy of the edge; zero except for periodic pairs.
    pub right_shift: (f64, f64),
}

/// Boundary edge owned by a single triangle (Neumann meshes only).
#[derive(Debug, Clone)]
pub struct BoundaryEdge {
    pub verts: (usize, usize),
    pub triangle: usize,
    /// Outward unit normal.
    pub normal: (f64, f64),
}

/// Uniform triangulation of a rectangle.
#[derive(Debug, Clone)]
pub struct Mesh {
    pub domain: Rect,
    pub bc: BoundaryKind,
    pub nx: usize,
    pub ny: usize,
    /// Realized grid spacings (hx, hy): the requested spacing rounded to
    /// the nearest even division of each side.
    pub spacing: (f64, f64),
    pub vertices: Vec<(f64, f64)>,
    pub triangles: Vec<[usize; 3]>,
    pub interior_edges: Vec<InteriorEdge>,
    pub boundary_edges: Vec<BoundaryEdge>,
}

impl Mesh {
    pub fn n_triangles(&self) -> usize {
        self.triangles.len()
    }

    pub fn vertex_coords(&self, t: usize) -> [(f64, f64); 3] {
        let [a, b, c] = self.triangles[t];
        [self.vertices[a], self.vertices[b], self.vertices[c]]
    }

    pub fn triangle_area(&self, t: usize) -> f64 {
        let [p, q, r] = self.vertex_coords(t);
        0.5 * ((q.0 - p.0) * (r.1 - p.1) - (q.1 - p.1) * (r.0 - p.0))
    }
}

/// Build a structured triangulation with spacing as close to `h` as an
/// even division of each side allows.
pub fn build_mesh(domain: Rect, h: f64, bc: BoundaryKind) -> Result<Mesh> {
    let (w, ht) = (domain.width(), domain.height());
    if w <= 0.0 || ht <= 0.0 {
        return Err(Error::InvalidDomain(w, ht));
    }
    if h <= 0.0 || h > w || h > ht {
        return Err(Error::SpacingTooCoarse { h, side: w.min(ht) });
    }
    let nx = (w / h).round().max(1.0) as usize;
    let ny = (ht / h).round().max(1.0) as usize;
    build_grid(domain, nx, ny, bc)
}

/// Build a structured triangulation with explicit cell counts.
pub fn build_grid(domain: Rect, nx: usize, ny: usize, bc: BoundaryKind) -> Result<Mesh> {
    let (w, ht) = (domain.width(), domain.height());
    if w <= 0.0 || ht <= 0.0 {
        return Err(Error::InvalidDomain(w, ht));
    }
    let hx = w / nx as f64;
    let hy = ht / ny as f64;

    let mut vertices = Vec::with_capacity((nx + 1) * (ny + 1));
    for j in 0..=ny {
        for i in 0..=nx {
            vertices.push((domain.x0 + i as f64 * hx, domain.y0 + j as f64 * hy));
        }
    }
    let vid = |i: usize, j: usize| j * (nx + 1) + i;

    // Cell k = j * nx + i owns triangles 2k (lower) and 2k + 1 (upper).
    let mut triangles = Vec::with_capacity(2 * nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            let (a, b, c, d) = (vid(i, j), vid(i + 1, j), vid(i + 1, j + 1), vid(i, j + 1));
            triangles.push([a, b, c]);
            triangles.push([a, c, d]);
        }
    }
    let lower = |i: usize, j: usize| 2 * (j * nx + i);
    let upper = |i: usize, j: usize| 2 * (j * nx + i) + 1;

    let diag_len = (hx * hx + hy * hy).sqrt();
    let mut interior = Vec::new();
    let mut boundary = Vec::new();

    // Cell diagonals: lower triangle below, upper above; the normal of
    // the a -> c diagonal rotated left points into the upper triangle.
    let dn = (-hy / diag_len, hx / diag_len);
    for j in 0..ny {
        for i in 0..nx {
            interior.push(InteriorEdge {
                verts: (vid(i, j), vid(i + 1, j + 1)),
                left: lower(i, j),
                right: upper(i, j),
                length: diag_len,
                normal: dn,
                weight: 1.0,
                right_shift: (0.0, 0.0),
            });
        }
    }

    // Vertical edges between column i and i + 1: right side of the lower
    // triangle against the left side of the neighbouring upper triangle.
    for j in 0..ny {
        for i in 0..nx.saturating_sub(1) {
            interior.push(InteriorEdge {
                verts: (vid(i + 1, j), vid(i + 1, j + 1)),
                left: lower(i, j),
                right: upper(i + 1, j),
                length: hy,
                normal: (1.0, 0.0),
                weight: 1.0,
                right_shift: (0.0, 0.0),
            });
        }
    }

    // Horizontal edges between row j and j + 1.
    for j in 0..ny.saturating_sub(1) {
        for i in 0..nx {
            interior.push(InteriorEdge {
                verts: (vid(i, j + 1), vid(i + 1, j + 1)),
                left: upper(i, j),
                right: lower(i, j + 1),
                length: hx,
                normal: (0.0, 1.0),
                weight: 1.0,
                right_shift: (0.0, 0.0),
            });
        }
    }

    // Domain boundary, as boundary edges (Neumann) or wrapped periodic
    // pairs with half weight. Order: bottom, top, left, right.
    let mut add_boundary = |verts: (usize, usize),
                            tri: usize,
                            normal: (f64, f64),
                            wrapped: usize,
                            shift: (f64, f64),
                            length: f64| {
        match bc {
            BoundaryKind::Neumann => boundary.push(BoundaryEdge { verts, triangle: tri, normal }),
            BoundaryKind::Periodic => interior.push(InteriorEdge {
                verts,
                left: tri,
                right: wrapped,
                length,
                normal,
                weight: 0.5,
                right_shift: shift,
            }),
        }
    };

    for i in 0..nx {
        // Bottom edge of cell (i, 0): lower triangle; wraps to the top
        // side owned by the upper triangle of cell (i, ny - 1).
        add_boundary(
            (vid(i, 0), vid(i + 1, 0)),
            lower(i, 0),
            (0.0, -1.0),
            upper(i, ny - 1),
            (0.0, ht),
            hx,
        );
        // Top edge of cell (i, ny - 1): upper triangle; wraps to bottom.
        add_boundary(
            (vid(i, ny), vid(i + 1, ny)),
            upper(i, ny - 1),
            (0.0, 1.0),
            lower(i, 0),
            (0.0, -ht),
            hx,
        );
    }
    for j in 0..ny {
        // Left edge of cell (0, j): upper triangle; wraps to the right
        // side owned by the lower triangle of cell (nx - 1, j).
        add_boundary(
            (vid(0, j), vid(0, j + 1)),
            upper(0, j),
            (-1.0, 0.0),
            lower(nx - 1, j),
            (w, 0.0),
            hy,
        );
        // Right edge of cell (nx - 1, j): lower triangle; wraps to left.
        add_boundary(
            (vid(nx, j), vid(nx, j + 1)),
            lower(nx - 1, j),
            (1.0, 0.0),
            upper(0, j),
            (-w, 0.0),
            hy,
        );
    }

    Ok(Mesh {
        domain,
        bc,
        nx,
        ny,
        spacing: (hx, hy),
        vertices,
        triangles,
        interior_edges: interior,
        boundary_edges: boundary,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_square_neumann_counts() {
        let mesh = build_mesh(Rect::unit_square(), 0.5, BoundaryKind::Neumann).unwrap();
        assert_eq!((mesh.nx, mesh.ny), (2, 2));
        assert_eq!(mesh.n_triangles(), 8);
        assert_eq!(mesh.interior_edges.len(), 8);
        assert_eq!(mesh.boundary_edges.len(), 8);
    }

    #[test]
    fn unit_square_periodic_counts() {
        let mesh = build_mesh(Rect::unit_square(), 0.5, BoundaryKind::Periodic).unwrap();
        assert_eq!(mesh.n_triangles(), 8);
        assert_eq!(mesh.interior_edges.len(), 16, "all boundary edges paired");
        assert_eq!(mesh.boundary_edges.len(), 0);
    }

    #[test]
    fn grid_rounding_matches_nearest_divisor() {
        let mesh = build_mesh(Rect::unit_square(), 0.015, BoundaryKind::Neumann).unwrap();
        assert_eq!((mesh.nx, mesh.ny), (67, 67), "round(1 / 0.015) = 67");
        assert_eq!(mesh.n_triangles(), 8978);
        let (hx, hy) = mesh.spacing;
        assert!((hx - 1.0 / 67.0).abs() < 1e-15);
        assert!((hy - 1.0 / 67.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_coarse_spacing_and_bad_domain() {
        assert!(build_mesh(Rect::unit_square(), 2.0, BoundaryKind::Neumann).is_err());
        assert!(build_mesh(Rect::new(0.0, -1.0, 0.0, 1.0), 0.1, BoundaryKind::Neumann).is_err());
    }

    #[test]
    fn positive_areas_covering_domain() {
        for bc in [BoundaryKind::Neumann, BoundaryKind::Periodic] {
            let mesh = build_mesh(Rect::new(0.0, 2.0, 0.0, 1.5), 0.3, bc).unwrap();
            let mut total = 0.0;
            for t in 0..mesh.n_triangles() {
                let a = mesh.triangle_area(t);
                assert!(a > 0.0, "triangle {t} must have positive signed area");
                total += a;
            }
            let rel = (total - mesh.domain.area()).abs() / mesh.domain.area();
            assert!(rel < 1e-12, "areas must sum to the domain area, rel err {rel}");
        }
    }

    #[test]
    fn interior_edges_reference_distinct_triangles() {
        for bc in [BoundaryKind::Neumann, BoundaryKind::Periodic] {
            let mesh = build_mesh(Rect::unit_square(), 0.25, bc).unwrap();
            for e in &mesh.interior_edges {
                assert_ne!(e.left, e.right);
                assert!(e.length > 0.0);
                let n = (e.normal.0 * e.normal.0 + e.normal.1 * e.normal.1).sqrt();
                assert!((n - 1.0).abs() < 1e-14, "unit normal");
            }
        }
    }

    #[test]
    fn periodic_shift_lands_on_partner_edge() {
        let mesh = build_mesh(Rect::new(0.0, 2.0, 0.0, 1.0), 0.5, BoundaryKind::Periodic).unwrap();
        for e in mesh.interior_edges.iter().filter(|e| e.weight == 0.5) {
            let (va, vb) = (mesh.vertices[e.verts.0], mesh.vertices[e.verts.1]);
            let mid = (
                0.5 * (va.0 + vb.0) + e.right_shift.0,
                0.5 * (va.1 + vb.1) + e.right_shift.1,
            );
            // The shifted midpoint must lie on the right triangle's
            // boundary: barycentric coordinates in [0, 1] with one zero.
            let [p, q, r] = mesh.vertex_coords(e.right);
            let det = (q.0 - p.0) * (r.1 - p.1) - (q.1 - p.1) * (r.0 - p.0);
            let l1 = ((mid.0 - p.0) * (r.1 - p.1) - (mid.1 - p.1) * (r.0 - p.0)) / det;
            let l2 = ((q.0 - p.0) * (mid.1 - p.1) - (q.1 - p.1) * (mid.0 - p.0)) / det;
            let l0 = 1.0 - l1 - l2;
            for l in [l0, l1, l2] {
                assert!(l > -1e-12 && l < 1.0 + 1e-12);
            }
            assert!(
                [l0, l1, l2].iter().any(|l| l.abs() < 1e-12),
                "midpoint must sit on an edge of the wrapped triangle"
            );
        }
    }
}
