//! Independent oracles for the integration tests.
//!
//! Everything here re-derives results from the mesh data and the math,
//! deliberately avoiding the crate's assembly code paths: dense full
//! matrix loops, a 25-point triangle rule, 16-point Gauss tau
//! integration, and finite differences.

use acmor::mesh::Mesh;
use acmor::potential::Potential;
use acmor::quadrature::{gauss_legendre_01, TriangleRule};
use faer::{Col, Mat};

/// Constant gradient of local basis j on triangle t, from the vertex
/// coordinates alone.
pub fn oracle_grad(mesh: &Mesh, t: usize, j: usize) -> (f64, f64) {
    let [a, b, c] = mesh.vertex_coords(t);
    let verts = [a, b, c];
    let area2 = (b.0 - a.0) * (c.1 - a.1) - (b.1 - a.1) * (c.0 - a.0);
    // grad(lambda_j) = rot90(opposite edge) / (2 area)
    let p = verts[(j + 1) % 3];
    let q = verts[(j + 2) % 3];
    ((p.1 - q.1) / area2, (q.0 - p.0) / area2)
}

/// Value of local basis j at a physical point, via signed area ratios.
pub fn oracle_basis(mesh: &Mesh, t: usize, j: usize, x: (f64, f64)) -> f64 {
    let [a, b, c] = mesh.vertex_coords(t);
    let verts = [a, b, c];
    let tri_area = |p: (f64, f64), q: (f64, f64), r: (f64, f64)| {
        0.5 * ((q.0 - p.0) * (r.1 - p.1) - (q.1 - p.1) * (r.0 - p.0))
    };
    let total = tri_area(a, b, c);
    tri_area(x, verts[(j + 1) % 3], verts[(j + 2) % 3]) / total
}

/// Physical quadrature points and weights of the 25-point rule on
/// triangle t (weights include the element area).
pub fn oracle_quad_points(mesh: &Mesh, t: usize) -> Vec<((f64, f64), f64)> {
    let rule = TriangleRule::conical_product(5);
    let [a, b, c] = mesh.vertex_coords(t);
    let area = {
        let ar = 0.5 * ((b.0 - a.0) * (c.1 - a.1) - (b.1 - a.1) * (c.0 - a.0));
        ar
    };
    rule.points
        .iter()
        .zip(&rule.weights)
        .map(|(lam, w)| {
            let x = lam[0] * a.0 + lam[1] * b.0 + lam[2] * c.0;
            let y = lam[0] * a.1 + lam[1] * b.1 + lam[2] * c.1;
            ((x, y), w * area)
        })
        .collect()
}

/// Dense mass matrix by direct quadrature of basis products.
pub fn dense_mass(mesh: &Mesh) -> Mat<f64> {
    let n = 3 * mesh.n_triangles();
    let mut m = Mat::zeros(n, n);
    for t in 0..mesh.n_triangles() {
        let pts = oracle_quad_points(mesh, t);
        for i in 0..3 {
            for j in 0..3 {
                let mut acc = 0.0;
                for &(x, w) in &pts {
                    acc += w * oracle_basis(mesh, t, i, x) * oracle_basis(mesh, t, j, x);
                }
                m[(3 * t + i, 3 * t + j)] = acc;
            }
        }
    }
    m
}

/// Dense SIPG stiffness by direct evaluation of the bilinear form,
/// using 8-point Gauss edge quadrature.
pub fn dense_stiffness(mesh: &Mesh, sigma: f64, eps: f64) -> Mat<f64> {
    let n = 3 * mesh.n_triangles();
    let mut a = Mat::zeros(n, n);

    // Volume gradient terms.
    for t in 0..mesh.n_triangles() {
        let area = {
            let [p, q, r] = mesh.vertex_coords(t);
            0.5 * ((q.0 - p.0) * (r.1 - p.1) - (q.1 - p.1) * (r.0 - p.0))
        };
        for i in 0..3 {
            for j in 0..3 {
                let gi = oracle_grad(mesh, t, i);
                let gj = oracle_grad(mesh, t, j);
                a[(3 * t + i, 3 * t + j)] += eps * area * (gi.0 * gj.0 + gi.1 * gj.1);
            }
        }
    }

    // Edge terms over all pairs of the six coupled dofs.
    let (nodes, weights) = gauss_legendre_01(8);
    for edge in &mesh.interior_edges {
        let va = mesh.vertices[edge.verts.0];
        let vb = mesh.vertices[edge.verts.1];
        let h = edge.length;
        let nrm = edge.normal;

        // (global dof, side) with side 0 = left, 1 = right
        let coupled: Vec<(usize, usize)> = (0..3)
            .map(|k| (3 * edge.left + k, 0))
            .chain((0..3).map(|k| (3 * edge.right + k, 1)))
            .collect();

        let trace = |dof: usize, side: usize, x: (f64, f64)| -> f64 {
            let t = if side == 0 { edge.left } else { edge.right };
            if dof / 3 != t {
                return 0.0;
            }
            let xx = if side == 0 {
                x
            } else {
                (x.0 + edge.right_shift.0, x.1 + edge.right_shift.1)
            };
            oracle_basis(mesh, t, dof % 3, xx)
        };
        let grad_n = |dof: usize, side: usize| -> f64 {
            let t = if side == 0 { edge.left } else { edge.right };
            if dof / 3 != t {
                return 0.0;
            }
            let g = oracle_grad(mesh, t, dof % 3);
            g.0 * nrm.0 + g.1 * nrm.1
        };

        for &(di, _) in &coupled {
            for &(dj, _) in &coupled {
                let mut consistency = 0.0;
                let mut penalty = 0.0;
                for (s, w) in nodes.iter().zip(&weights) {
                    let x = (va.0 + s * (vb.0 - va.0), va.1 + s * (vb.1 - va.1));
                    let jump_i = trace(di, 0, x) - trace(di, 1, x);
                    let jump_j = trace(dj, 0, x) - trace(dj, 1, x);
                    let avg_i = 0.5 * (grad_n(di, 0) + grad_n(di, 1));
                    let avg_j = 0.5 * (grad_n(dj, 0) + grad_n(dj, 1));
                    consistency += w * h * (avg_j * jump_i + avg_i * jump_j);
                    penalty += w * jump_i * jump_j;
                }
                a[(di, dj)] += eps * edge.weight * (-consistency + sigma * penalty);
            }
        }
    }
    a
}

/// Dense nonlinear vector through the 25-point rule.
pub fn dense_nonlinear(mesh: &Mesh, u: &Col<f64>, potential: &Potential) -> Col<f64> {
    let n = 3 * mesh.n_triangles();
    let mut out = Col::zeros(n);
    for t in 0..mesh.n_triangles() {
        let pts = oracle_quad_points(mesh, t);
        for i in 0..3 {
            let mut acc = 0.0;
            for &(x, w) in &pts {
                let mut uh = 0.0;
                for j in 0..3 {
                    uh += u[3 * t + j] * oracle_basis(mesh, t, j, x);
                }
                acc += w * potential.derivative(uh) * oracle_basis(mesh, t, i, x);
            }
            out[3 * t + i] = acc;
        }
    }
    out
}

/// Dense AVF residual oracle: 25-point triangle rule and 16-point Gauss
/// integration of f along the segment (no closed form).
pub fn dense_avf_residual(
    mesh: &Mesh,
    sigma: f64,
    eps: f64,
    dt: f64,
    curr: &Col<f64>,
    next: &Col<f64>,
    potential: &Potential,
) -> Col<f64> {
    let n = 3 * mesh.n_triangles();
    let m = dense_mass(mesh);
    let a = dense_stiffness(mesh, sigma, eps);
    let (tau, tw) = gauss_legendre_01(16);

    let mut r = Col::zeros(n);
    for i in 0..n {
        let mut acc = 0.0;
        for j in 0..n {
            acc += m[(i, j)] * (next[j] - curr[j]) + 0.5 * dt * a[(i, j)] * (next[j] + curr[j]);
        }
        r[i] = acc;
    }
    for t in 0..mesh.n_triangles() {
        let pts = oracle_quad_points(mesh, t);
        for i in 0..3 {
            let mut acc = 0.0;
            for &(x, w) in &pts {
                let mut ua = 0.0;
                let mut ub = 0.0;
                for j in 0..3 {
                    let phi = oracle_basis(mesh, t, j, x);
                    ua += curr[3 * t + j] * phi;
                    ub += next[3 * t + j] * phi;
                }
                let mut line = 0.0;
                for (s, tww) in tau.iter().zip(&tw) {
                    line += tww * potential.derivative(s * ub + (1.0 - s) * ua);
                }
                acc += w * line * oracle_basis(mesh, t, i, x);
            }
            r[3 * t + i] += dt * acc;
        }
    }
    r
}

/// Central finite difference Jacobian of a vector function.
pub fn fd_jacobian<F: Fn(&Col<f64>) -> Col<f64>>(f: F, u: &Col<f64>, h: f64) -> Mat<f64> {
    let n = u.nrows();
    let probe = f(u);
    let m = probe.nrows();
    let mut jac = Mat::zeros(m, n);
    for j in 0..n {
        let mut up = u.clone();
        let mut dn = u.clone();
        up[j] += h;
        dn[j] -= h;
        let fp = f(&up);
        let fm = f(&dn);
        for i in 0..m {
            jac[(i, j)] = (fp[i] - fm[i]) / (2.0 * h);
        }
    }
    jac
}

/// Max absolute entry of a dense matrix difference.
pub fn max_abs_diff(a: &Mat<f64>, b: &Mat<f64>) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..a.nrows() {
        for j in 0..a.ncols() {
            worst = worst.max((a[(i, j)] - b[(i, j)]).abs());
        }
    }
    worst
}

/// Dense copy of a sparse matrix.
pub fn to_dense(m: faer::sparse::SparseColMatRef<'_, usize, f64>) -> Mat<f64> {
    m.to_dense()
}
