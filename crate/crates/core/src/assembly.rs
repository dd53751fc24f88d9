//! SIPG operator assembly for the full-order model.
//!
//! Assembled objects:
//! - mass matrix `M` (block diagonal, one 3x3 SPD block per element,
//!   stored with its per-block Cholesky factors);
//! - unit-diffusivity stiffness `A1` encoding the SIPG bilinear form at
//!   `eps = 1`: element gradient terms, the two symmetric consistency
//!   terms with averages and jumps on interior edges, and the
//!   `sigma / h_E` jump penalty. The form at any diffusivity is
//!   `eps * A1` (affine parameter dependence);
//! - nonlinear vectors and their block-diagonal Jacobians, including the
//!   AVF pair variants that integrate `f` along the segment between two
//!   states;
//! - the discrete Ginzburg-Landau energy.
//!
//! All loops run in a fixed order (elements ascending, then interior
//! edges ascending), so assembly is bitwise deterministic.

use faer::sparse::{SparseColMat, SymbolicSparseColMat, Triplet};
use faer::{Col, Mat};

use crate::error::Error;
use crate::mesh::{InteriorEdge, Mesh};
use crate::potential::{ClampPolicy, Potential};
use crate::rng::SplitMix64;
use crate::space::{DgSpace, N_LOC};
use crate::Result;

/// 3x3 element block.
pub type Block = [[f64; 3]; 3];

/// Block-diagonal mass matrix with per-block Cholesky factors
/// `M_K = L_K L_K^T` (so the global factor `R` with `M = R^T R` is
/// `R = L^T`, block by block).
#[derive(Debug, Clone)]
pub struct MassMatrix {
    blocks: Vec<Block>,
    chol: Vec<Block>,
}

impl MassMatrix {
    pub fn n_blocks(&self) -> usize {
        self.blocks.len()
    }

    pub fn dim(&self) -> usize {
        N_LOC * self.blocks.len()
    }

    pub fn block(&self, t: usize) -> &Block {
        &self.blocks[t]
    }

    /// `M x`.
    pub fn apply(&self, x: &Col<f64>) -> Col<f64> {
        let mut out = Col::zeros(self.dim());
        for (t, b) in self.blocks.iter().enumerate() {
            let o = N_LOC * t;
            for i in 0..N_LOC {
                out[o + i] = b[i][0] * x[o] + b[i][1] * x[o + 1] + b[i][2] * x[o + 2];
            }
        }
        out
    }

    /// `M^{-1} b` through the block factors.
    pub fn solve(&self, rhs: &Col<f64>) -> Col<f64> {
        let mut out = rhs.clone();
        for (t, l) in self.chol.iter().enumerate() {
            let o = N_LOC * t;
            let mut v = [out[o], out[o + 1], out[o + 2]];
            forward_sub3(l, &mut v);
            backward_sub3_t(l, &mut v);
            out[o] = v[0];
            out[o + 1] = v[1];
            out[o + 2] = v[2];
        }
        out
    }

    /// `R x` with `R = L^T` the upper Cholesky factor of `M`.
    pub fn apply_r(&self, x: &Col<f64>) -> Col<f64> {
        let mut out = Col::zeros(self.dim());
        for (t, l) in self.chol.iter().enumerate() {
            let o = N_LOC * t;
            for i in 0..N_LOC {
                // row i of L^T = column i of L
                let mut acc = 0.0;
                for j in i..N_LOC {
                    acc += l[j][i] * x[o + j];
                }
                out[o + i] = acc;
            }
        }
        out
    }

    /// `R^{-1} b`, i.e. backward substitution with `L^T`.
    pub fn solve_r(&self, rhs: &Col<f64>) -> Col<f64> {
        let mut out = rhs.clone();
        for (t, l) in self.chol.iter().enumerate() {
            let o = N_LOC * t;
            let mut v = [out[o], out[o + 1], out[o + 2]];
            backward_sub3_t(l, &mut v);
            out[o] = v[0];
            out[o + 1] = v[1];
            out[o + 2] = v[2];
        }
        out
    }

    /// Apply `R` to every column.
    pub fn apply_r_mat(&self, x: &Mat<f64>) -> Mat<f64> {
        let mut out = Mat::zeros(x.nrows(), x.ncols());
        for c in 0..x.ncols() {
            let col = self.apply_r(&x.col(c).to_owned());
            for r in 0..x.nrows() {
                out[(r, c)] = col[r];
            }
        }
        out
    }

    /// Apply `R^{-1}` to every column.
    pub fn solve_r_mat(&self, x: &Mat<f64>) -> Mat<f64> {
        let mut out = Mat::zeros(x.nrows(), x.ncols());
        for c in 0..x.ncols() {
            let col = self.solve_r(&x.col(c).to_owned());
            for r in 0..x.nrows() {
                out[(r, c)] = col[r];
            }
        }
        out
    }

    /// Weighted inner product `x^T M y`.
    pub fn inner(&self, x: &Col<f64>, y: &Col<f64>) -> f64 {
        let mut acc = 0.0;
        for (t, b) in self.blocks.iter().enumerate() {
            let o = N_LOC * t;
            for i in 0..N_LOC {
                let my = b[i][0] * y[o] + b[i][1] * y[o + 1] + b[i][2] * y[o + 2];
                acc += x[o + i] * my;
            }
        }
        acc
    }

    /// `|x|_M = sqrt(x^T M x)`.
    pub fn norm(&self, x: &Col<f64>) -> f64 {
        self.inner(x, x).max(0.0).sqrt()
    }

    /// Smallest eigenvalue of `M` by inverse power iteration (seeded, so
    /// deterministic). `|R^{-1}|_2 = lambda_min(M)^{-1/2}`.
    pub fn min_eigenvalue(&self) -> f64 {
        let n = self.dim();
        let mut rng = SplitMix64::new(0x5eed);
        let mut v = Col::from_fn(n, |_| rng.next_f64() - 0.5);
        let mut lambda = 0.0;
        for _ in 0..50 {
            let w = self.solve(&v);
            let norm = w.norm_l2();
            v = faer::Scale(1.0 / norm) * &w;
            lambda = self.inner(&v, &v);
        }
        lambda
    }

    /// Spectral norm of the inverse Cholesky factor.
    pub fn norm_r_inv(&self) -> f64 {
        1.0 / self.min_eigenvalue().sqrt()
    }

    /// Triplets of the full matrix (for composing sparse sums).
    pub fn triplets(&self, scale: f64, out: &mut Vec<Triplet<usize, usize, f64>>) {
        for (t, b) in self.blocks.iter().enumerate() {
            let o = N_LOC * t;
            for i in 0..N_LOC {
                for j in 0..N_LOC {
                    out.push(Triplet::new(o + i, o + j, scale * b[i][j]));
                }
            }
        }
    }
}

/// Block-diagonal matrix (nonlinear Jacobians).
#[derive(Debug, Clone)]
pub struct BlockDiagMatrix {
    pub blocks: Vec<Block>,
}

impl BlockDiagMatrix {
    pub fn dim(&self) -> usize {
        N_LOC * self.blocks.len()
    }

    pub fn apply(&self, x: &Col<f64>) -> Col<f64> {
        let mut out = Col::zeros(self.dim());
        for (t, b) in self.blocks.iter().enumerate() {
            let o = N_LOC * t;
            for i in 0..N_LOC {
                out[o + i] = b[i][0] * x[o] + b[i][1] * x[o + 1] + b[i][2] * x[o + 2];
            }
        }
        out
    }

    /// Dense apply to a tall matrix, one column at a time.
    pub fn apply_mat(&self, x: &Mat<f64>) -> Mat<f64> {
        let mut out = Mat::zeros(x.nrows(), x.ncols());
        for (t, b) in self.blocks.iter().enumerate() {
            let o = N_LOC * t;
            for c in 0..x.ncols() {
                for i in 0..N_LOC {
                    out[(o + i, c)] =
                        b[i][0] * x[(o, c)] + b[i][1] * x[(o + 1, c)] + b[i][2] * x[(o + 2, c)];
                }
            }
        }
        out
    }
}

fn chol3(b: &Block) -> Block {
    // Cholesky of a 3x3 SPD block, lower factor.
    let mut l = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..=i {
            let mut s = b[i][j];
            for k in 0..j {
                s -= l[i][k] * l[j][k];
            }
            if i == j {
                assert!(s > 0.0, "mass block must be positive definite");
                l[i][j] = s.sqrt();
            } else {
                l[i][j] = s / l[j][j];
            }
        }
    }
    l
}

fn forward_sub3(l: &Block, v: &mut [f64; 3]) {
    v[0] /= l[0][0];
    v[1] = (v[1] - l[1][0] * v[0]) / l[1][1];
    v[2] = (v[2] - l[2][0] * v[0] - l[2][1] * v[1]) / l[2][2];
}

fn backward_sub3_t(l: &Block, v: &mut [f64; 3]) {
    // Solve L^T x = v.
    v[2] /= l[2][2];
    v[1] = (v[1] - l[2][1] * v[2]) / l[1][1];
    v[0] = (v[0] - l[1][0] * v[1] - l[2][0] * v[2]) / l[0][0];
}

/// Mass matrix `M_ij = (phi_j, phi_i)` via element quadrature.
pub fn assemble_mass(mesh: &Mesh, space: &DgSpace) -> MassMatrix {
    let rule = &space.volume_rule;
    let mut blocks = Vec::with_capacity(mesh.n_triangles());
    for t in 0..mesh.n_triangles() {
        let area = space.geometry(t).area;
        let mut b = [[0.0; 3]; 3];
        for (lam, w) in rule.points.iter().zip(&rule.weights) {
            for i in 0..N_LOC {
                for j in 0..N_LOC {
                    b[i][j] += area * w * lam[i] * lam[j];
                }
            }
        }
        blocks.push(b);
    }
    let chol = blocks.iter().map(chol3).collect();
    MassMatrix { blocks, chol }
}

/// Local 6x6 SIPG edge matrix over dofs [left 0..3, right 3..6],
/// already scaled by the edge weight. `eps` scales the whole form.
fn edge_local_matrix(mesh: &Mesh, space: &DgSpace, edge: &InteriorEdge, eps: f64) -> [[f64; 6]; 6] {
    let gl = space.geometry(edge.left);
    let gr = space.geometry(edge.right);
    let (va, vb) = (mesh.vertices[edge.verts.0], mesh.vertices[edge.verts.1]);
    let n = edge.normal;
    let h_e = edge.length;
    let nq = space.edge_nodes.len();

    // Normal components of the constant gradients, and traces at the
    // edge quadrature points (right traces evaluated on the wrapped copy
    // of the edge for periodic pairs).
    let mut gn = [0.0; 6];
    for j in 0..N_LOC {
        gn[j] = gl.grads[j].0 * n.0 + gl.grads[j].1 * n.1;
        gn[3 + j] = gr.grads[j].0 * n.0 + gr.grads[j].1 * n.1;
    }
    let mut trace = vec![[0.0; 6]; nq];
    for (q, &s) in space.edge_nodes.iter().enumerate() {
        let x = (va.0 + s * (vb.0 - va.0), va.1 + s * (vb.1 - va.1));
        let ll = gl.barycentric(x);
        let lr = gr.barycentric((x.0 + edge.right_shift.0, x.1 + edge.right_shift.1));
        for j in 0..N_LOC {
            trace[q][j] = ll[j];
            trace[q][3 + j] = lr[j];
        }
    }

    let sign = |k: usize| if k < 3 { 1.0 } else { -1.0 };
    let mut local = [[0.0; 6]; 6];
    for q in 0..nq {
        let w = space.edge_weights[q];
        for i in 0..6 {
            let jump_i = sign(i) * trace[q][i];
            for j in 0..6 {
                let jump_j = sign(j) * trace[q][j];
                // -({grad u} . n, [v]) - ({grad v} . n, [u]) + (sigma/h)([u], [v])
                let consistency = -0.5 * h_e * w * (gn[j] * jump_i + gn[i] * jump_j);
                let penalty = space.sigma * w * jump_j * jump_i;
                local[i][j] += eps * edge.weight * (consistency + penalty);
            }
        }
    }
    local
}

/// Stiffness matrix of the SIPG form at diffusivity `eps`.
pub fn assemble_stiffness(mesh: &Mesh, space: &DgSpace, eps: f64) -> SparseColMat<usize, f64> {
    let mut trips: Vec<Triplet<usize, usize, f64>> = Vec::new();

    // Volume gradient terms; emit the full block so the sparsity pattern
    // always contains the element diagonal blocks.
    for t in 0..mesh.n_triangles() {
        let geo = space.geometry(t);
        let o = N_LOC * t;
        for i in 0..N_LOC {
            for j in 0..N_LOC {
                let v = eps
                    * geo.area
                    * (geo.grads[i].0 * geo.grads[j].0 + geo.grads[i].1 * geo.grads[j].1);
                trips.push(Triplet::new(o + i, o + j, v));
            }
        }
    }

    for edge in &mesh.interior_edges {
        let local = edge_local_matrix(mesh, space, edge, eps);
        let dofs = [
            N_LOC * edge.left,
            N_LOC * edge.left + 1,
            N_LOC * edge.left + 2,
            N_LOC * edge.right,
            N_LOC * edge.right + 1,
            N_LOC * edge.right + 2,
        ];
        for i in 0..6 {
            for j in 0..6 {
                trips.push(Triplet::new(dofs[i], dofs[j], local[i][j]));
            }
        }
    }

    SparseColMat::try_new_from_triplets(space.n_dof, space.n_dof, &trips)
        .expect("valid triplets by construction")
}

/// Unit-diffusivity stiffness `A1`; `A(eps) = eps * A1`.
pub fn assemble_stiffness_unit(mesh: &Mesh, space: &DgSpace) -> SparseColMat<usize, f64> {
    assemble_stiffness(mesh, space, 1.0)
}

/// Values of `u_h` at the volume quadrature points of element `t`.
#[inline]
fn values_at_quad(space: &DgSpace, coeffs: &[f64; 3]) -> Vec<f64> {
    space
        .volume_rule
        .points
        .iter()
        .map(|lam| coeffs[0] * lam[0] + coeffs[1] * lam[1] + coeffs[2] * lam[2])
        .collect()
}

#[inline]
fn element_coeffs(u: &Col<f64>, t: usize) -> [f64; 3] {
    let o = N_LOC * t;
    [u[o], u[o + 1], u[o + 2]]
}

/// One entry of the nonlinear vector: `int_K f(u_h) phi_i` on element `t`.
pub fn nonlinear_entry(
    space: &DgSpace,
    coeffs: &[f64; 3],
    t: usize,
    local_i: usize,
    potential: &Potential,
    clamp: ClampPolicy,
) -> Result<f64> {
    let area = space.geometry(t).area;
    let rule = &space.volume_rule;
    let mut acc = 0.0;
    for (lam, w) in rule.points.iter().zip(&rule.weights) {
        let v = coeffs[0] * lam[0] + coeffs[1] * lam[1] + coeffs[2] * lam[2];
        potential.check_domain(v, clamp, t)?;
        acc += area * w * potential.derivative(v) * lam[local_i];
    }
    Ok(acc)
}

/// Nonlinear vector `f_i(u) = (f(u_h), phi_i)`.
pub fn eval_nonlinear(
    u: &Col<f64>,
    potential: &Potential,
    mesh: &Mesh,
    space: &DgSpace,
    clamp: ClampPolicy,
) -> Result<Col<f64>> {
    check_dim(u.nrows(), space.n_dof)?;
    let rule = &space.volume_rule;
    let mut out = Col::zeros(space.n_dof);
    for t in 0..mesh.n_triangles() {
        let area = space.geometry(t).area;
        let coeffs = element_coeffs(u, t);
        let vals = values_at_quad(space, &coeffs);
        let o = N_LOC * t;
        for (q, lam) in rule.points.iter().enumerate() {
            potential.check_domain(vals[q], clamp, t)?;
            let fw = area * rule.weights[q] * potential.derivative(vals[q]);
            for i in 0..N_LOC {
                out[o + i] += fw * lam[i];
            }
        }
    }
    Ok(out)
}

/// Block-diagonal Jacobian `J_ij = int f'(u_h) phi_j phi_i`.
pub fn eval_nonlinear_jacobian(
    u: &Col<f64>,
    potential: &Potential,
    mesh: &Mesh,
    space: &DgSpace,
    clamp: ClampPolicy,
) -> Result<BlockDiagMatrix> {
    check_dim(u.nrows(), space.n_dof)?;
    let rule = &space.volume_rule;
    let mut blocks = Vec::with_capacity(mesh.n_triangles());
    for t in 0..mesh.n_triangles() {
        let area = space.geometry(t).area;
        let coeffs = element_coeffs(u, t);
        let vals = values_at_quad(space, &coeffs);
        let mut b = [[0.0; 3]; 3];
        for (q, lam) in rule.points.iter().enumerate() {
            potential.check_domain(vals[q], clamp, t)?;
            let fw = area * rule.weights[q] * potential.second_derivative(vals[q]);
            for i in 0..N_LOC {
                for j in 0..N_LOC {
                    b[i][j] += fw * lam[i] * lam[j];
                }
            }
        }
        blocks.push(b);
    }
    Ok(BlockDiagMatrix { blocks })
}

/// One entry of the AVF nonlinear vector between states `a` and `b`:
/// `int_K [int_0^1 f(tau b_h + (1-tau) a_h) dtau] phi_i`.
pub fn avf_nonlinear_entry(
    space: &DgSpace,
    coeffs_a: &[f64; 3],
    coeffs_b: &[f64; 3],
    t: usize,
    local_i: usize,
    potential: &Potential,
    clamp: ClampPolicy,
) -> Result<f64> {
    let area = space.geometry(t).area;
    let rule = &space.volume_rule;
    let mut acc = 0.0;
    for (lam, w) in rule.points.iter().zip(&rule.weights) {
        let va = coeffs_a[0] * lam[0] + coeffs_a[1] * lam[1] + coeffs_a[2] * lam[2];
        let vb = coeffs_b[0] * lam[0] + coeffs_b[1] * lam[1] + coeffs_b[2] * lam[2];
        potential.check_domain(va, clamp, t)?;
        potential.check_domain(vb, clamp, t)?;
        acc += area * w * potential.avf_line_integral(va, vb) * lam[local_i];
    }
    Ok(acc)
}

/// Gradient of [`avf_nonlinear_entry`] with respect to the three
/// coefficients of `b` on the element.
pub fn avf_nonlinear_entry_grad(
    space: &DgSpace,
    coeffs_a: &[f64; 3],
    coeffs_b: &[f64; 3],
    t: usize,
    local_i: usize,
    potential: &Potential,
    clamp: ClampPolicy,
) -> Result<[f64; 3]> {
    let area = space.geometry(t).area;
    let rule = &space.volume_rule;
    let mut grad = [0.0; 3];
    for (lam, w) in rule.points.iter().zip(&rule.weights) {
        let va = coeffs_a[0] * lam[0] + coeffs_a[1] * lam[1] + coeffs_a[2] * lam[2];
        let vb = coeffs_b[0] * lam[0] + coeffs_b[1] * lam[1] + coeffs_b[2] * lam[2];
        potential.check_domain(va, clamp, t)?;
        potential.check_domain(vb, clamp, t)?;
        let d = area * w * potential.avf_line_integral_db(va, vb) * lam[local_i];
        for j in 0..N_LOC {
            grad[j] += d * lam[j];
        }
    }
    Ok(grad)
}

/// AVF nonlinear vector between two coefficient vectors.
pub fn avf_nonlinear(
    a: &Col<f64>,
    b: &Col<f64>,
    potential: &Potential,
    mesh: &Mesh,
    space: &DgSpace,
    clamp: ClampPolicy,
) -> Result<Col<f64>> {
    check_dim(a.nrows(), space.n_dof)?;
    check_dim(b.nrows(), space.n_dof)?;
    let rule = &space.volume_rule;
    let mut out = Col::zeros(space.n_dof);
    for t in 0..mesh.n_triangles() {
        let area = space.geometry(t).area;
        let ca = element_coeffs(a, t);
        let cb = element_coeffs(b, t);
        let o = N_LOC * t;
        for (lam, w) in rule.points.iter().zip(&rule.weights) {
            let va = ca[0] * lam[0] + ca[1] * lam[1] + ca[2] * lam[2];
            let vb = cb[0] * lam[0] + cb[1] * lam[1] + cb[2] * lam[2];
            potential.check_domain(va, clamp, t)?;
            potential.check_domain(vb, clamp, t)?;
            let fw = area * w * potential.avf_line_integral(va, vb);
            for i in 0..N_LOC {
                out[o + i] += fw * lam[i];
            }
        }
    }
    Ok(out)
}

/// Block-diagonal Jacobian of [`avf_nonlinear`] with respect to `b`.
pub fn avf_nonlinear_jacobian(
    a: &Col<f64>,
    b: &Col<f64>,
    potential: &Potential,
    mesh: &Mesh,
    space: &DgSpace,
    clamp: ClampPolicy,
) -> Result<BlockDiagMatrix> {
    check_dim(a.nrows(), space.n_dof)?;
    check_dim(b.nrows(), space.n_dof)?;
    let rule = &space.volume_rule;
    let mut blocks = Vec::with_capacity(mesh.n_triangles());
    for t in 0..mesh.n_triangles() {
        let area = space.geometry(t).area;
        let ca = element_coeffs(a, t);
        let cb = element_coeffs(b, t);
        let mut blk = [[0.0; 3]; 3];
        for (lam, w) in rule.points.iter().zip(&rule.weights) {
            let va = ca[0] * lam[0] + ca[1] * lam[1] + ca[2] * lam[2];
            let vb = cb[0] * lam[0] + cb[1] * lam[1] + cb[2] * lam[2];
            potential.check_domain(va, clamp, t)?;
            potential.check_domain(vb, clamp, t)?;
            let fw = area * w * potential.avf_line_integral_db(va, vb);
            for i in 0..N_LOC {
                for j in 0..N_LOC {
                    blk[i][j] += fw * lam[i] * lam[j];
                }
            }
        }
        blocks.push(blk);
    }
    Ok(BlockDiagMatrix { blocks })
}

/// Discrete Ginzburg-Landau energy of Eq.-type
/// `E_h = (eps/2) sum_K |grad u|^2 + int F(u_h)
///        + sum_E (-({eps grad u}, [u]) + (sigma eps / 2 h_E)([u],[u]))`.
pub fn discrete_energy(
    u: &Col<f64>,
    mesh: &Mesh,
    space: &DgSpace,
    eps: f64,
    potential: &Potential,
) -> f64 {
    let rule = &space.volume_rule;
    let mut energy = 0.0;

    for t in 0..mesh.n_triangles() {
        let geo = space.geometry(t);
        let coeffs = element_coeffs(u, t);
        let gx: f64 = (0..N_LOC).map(|j| coeffs[j] * geo.grads[j].0).sum();
        let gy: f64 = (0..N_LOC).map(|j| coeffs[j] * geo.grads[j].1).sum();
        energy += 0.5 * eps * geo.area * (gx * gx + gy * gy);
        for (lam, w) in rule.points.iter().zip(&rule.weights) {
            let v = coeffs[0] * lam[0] + coeffs[1] * lam[1] + coeffs[2] * lam[2];
            energy += geo.area * w * potential.value(v);
        }
    }

    for edge in &mesh.interior_edges {
        let gl = space.geometry(edge.left);
        let gr = space.geometry(edge.right);
        let cl = element_coeffs(u, edge.left);
        let cr = element_coeffs(u, edge.right);
        let (va, vb) = (mesh.vertices[edge.verts.0], mesh.vertices[edge.verts.1]);
        let n = edge.normal;

        let mut avg_grad_n = 0.0;
        for j in 0..N_LOC {
            avg_grad_n += 0.5 * (cl[j] * (gl.grads[j].0 * n.0 + gl.grads[j].1 * n.1)
                + cr[j] * (gr.grads[j].0 * n.0 + gr.grads[j].1 * n.1));
        }

        let mut jump_int = 0.0;
        let mut jump_sq_int = 0.0;
        for (q, &s) in space.edge_nodes.iter().enumerate() {
            let x = (va.0 + s * (vb.0 - va.0), va.1 + s * (vb.1 - va.1));
            let ul = space.value_at(edge.left, &cl, x);
            let ur = space.value_at(
                edge.right,
                &cr,
                (x.0 + edge.right_shift.0, x.1 + edge.right_shift.1),
            );
            let jump = ul - ur;
            jump_int += space.edge_weights[q] * jump;
            jump_sq_int += space.edge_weights[q] * jump * jump;
        }

        energy += edge.weight
            * (-eps * avg_grad_n * edge.length * jump_int
                + 0.5 * space.sigma * eps * jump_sq_int);
    }

    energy
}

fn check_dim(got: usize, want: usize) -> Result<()> {
    if got == want {
        Ok(())
    } else {
        Err(Error::DimensionMismatch(format!(
            "coefficient vector has {got} entries, space has {want} dofs"
        )))
    }
}

/// Assembled full-order operators plus the symbolic machinery for
/// composing and factorizing Newton matrices on the fixed `A1` pattern.
pub struct FomOperators {
    pub mass: MassMatrix,
    symbolic: SymbolicSparseColMat<usize>,
    a1_vals: Vec<f64>,
    /// Value-array position of entry (3t+i, 3t+j) of each element block.
    elem_pos: Vec<[[usize; 3]; 3]>,
}

impl FomOperators {
    /// Assemble mass and stiffness and verify SIPG coercivity on 100
    /// seeded random vectors.
    pub fn new(mesh: &Mesh, space: &DgSpace) -> Result<Self> {
        let mass = assemble_mass(mesh, space);
        let a1 = assemble_stiffness_unit(mesh, space);
        let (symbolic, a1_vals) = a1.into_parts();

        let mut elem_pos = Vec::with_capacity(mesh.n_triangles());
        let col_ptr = symbolic.col_ptr();
        let row_idx = symbolic.row_idx();
        for t in 0..mesh.n_triangles() {
            let mut block = [[0usize; 3]; 3];
            for j in 0..N_LOC {
                let c = N_LOC * t + j;
                let rows = &row_idx[col_ptr[c]..col_ptr[c + 1]];
                for i in 0..N_LOC {
                    let r = N_LOC * t + i;
                    let k = rows.binary_search(&r).map_err(|_| {
                        Error::LinearSolve("stiffness pattern misses an element block".into())
                    })?;
                    block[i][j] = col_ptr[c] + k;
                }
            }
            elem_pos.push(block);
        }

        let ops = Self { mass, symbolic, a1_vals, elem_pos };
        ops.verify_coercivity()?;
        Ok(ops)
    }

    pub fn n_dof(&self) -> usize {
        self.symbolic.ncols()
    }

    /// View of `A1`.
    pub fn a1(&self) -> faer::sparse::SparseColMatRef<'_, usize, f64> {
        faer::sparse::SparseColMatRef::new(self.symbolic.as_ref(), &self.a1_vals)
    }

    /// Owned copy of `A1`.
    pub fn a1_owned(&self) -> SparseColMat<usize, f64> {
        SparseColMat::new(self.symbolic.clone(), self.a1_vals.clone())
    }

    /// `A1 x`.
    pub fn apply_a1(&self, x: &Col<f64>) -> Col<f64> {
        self.a1() * x
    }

    /// Compose `mass_scale * M + a1_scale * A1 + blocks` on the `A1`
    /// pattern (the pattern contains every element block).
    pub fn compose(
        &self,
        mass_scale: f64,
        a1_scale: f64,
        blocks: Option<(f64, &BlockDiagMatrix)>,
    ) -> SparseColMat<usize, f64> {
        let mut vals: Vec<f64> = self.a1_vals.iter().map(|v| a1_scale * v).collect();
        for (t, pos) in self.elem_pos.iter().enumerate() {
            let mb = self.mass.block(t);
            for i in 0..N_LOC {
                for j in 0..N_LOC {
                    vals[pos[i][j]] += mass_scale * mb[i][j];
                }
            }
            if let Some((s, bd)) = blocks {
                let b = &bd.blocks[t];
                for i in 0..N_LOC {
                    for j in 0..N_LOC {
                        vals[pos[i][j]] += s * b[i][j];
                    }
                }
            }
        }
        SparseColMat::new(self.symbolic.clone(), vals)
    }

    /// Coercivity check: `u^T A1 u >= 0` up to roundoff for 100 seeded
    /// random vectors, as a guard that sigma is above the stability
    /// threshold.
    fn verify_coercivity(&self) -> Result<()> {
        let n = self.n_dof();
        let a1 = self.a1();
        let mut rng = SplitMix64::new(0xc0e2);
        for trial in 0..100 {
            let u = Col::from_fn(n, |_| rng.next_f64() - 0.5);
            let au: Col<f64> = a1 * &u;
            let quad: f64 = (0..n).map(|i| u[i] * au[i]).sum();
            // Roundoff allowance at the scale of the quadratic form.
            let tol = 1e-12 * (u.norm_l2() * au.norm_l2()).max(1e-30);
            if quad < -tol {
                return Err(Error::LinearSolve(format!(
                    "SIPG form not coercive: u^T A1 u = {quad:.3e} on trial {trial}; increase sigma"
                )));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{build_mesh, BoundaryKind, Rect};

    fn small(bc: BoundaryKind) -> (Mesh, DgSpace) {
        let mesh = build_mesh(Rect::unit_square(), 0.25, bc).unwrap();
        let space = DgSpace::with_default_sigma(&mesh);
        (mesh, space)
    }

    #[test]
    fn mass_block_closed_form() {
        let (mesh, space) = small(BoundaryKind::Neumann);
        let mass = assemble_mass(&mesh, &space);
        for t in 0..mesh.n_triangles() {
            let area = space.geometry(t).area;
            let b = mass.block(t);
            for i in 0..3 {
                for j in 0..3 {
                    let want = area / 12.0 * if i == j { 2.0 } else { 1.0 };
                    assert!(
                        (b[i][j] - want).abs() < 1e-15,
                        "block ({i},{j}) = {} vs area/12 formula {want}",
                        b[i][j]
                    );
                }
            }
        }
    }

    #[test]
    fn constant_mass_energy_is_domain_area() {
        let (mesh, space) = small(BoundaryKind::Neumann);
        let mass = assemble_mass(&mesh, &space);
        let ones = Col::from_fn(space.n_dof, |_| 1.0);
        assert!((mass.inner(&ones, &ones) - 1.0).abs() < 1e-13);
    }

    #[test]
    fn mass_solve_roundtrip() {
        let (mesh, space) = small(BoundaryKind::Neumann);
        let mass = assemble_mass(&mesh, &space);
        let mut rng = SplitMix64::new(3);
        let x = Col::from_fn(space.n_dof, |_| rng.next_f64());
        let y = mass.solve(&mass.apply(&x));
        let err: Col<f64> = &y - &x;
        assert!(err.norm_l2() < 1e-11 * x.norm_l2());
        // |R x|^2 == x^T M x since M = R^T R
        let rx = mass.apply_r(&x);
        assert!((rx.norm_l2().powi(2) - mass.inner(&x, &x)).abs() < 1e-12);
        let back = mass.solve_r(&rx);
        let err: Col<f64> = &back - &x;
        assert!(err.norm_l2() < 1e-11 * x.norm_l2());
    }

    #[test]
    fn stiffness_kernel_contains_constants() {
        for bc in [BoundaryKind::Neumann, BoundaryKind::Periodic] {
            let (mesh, space) = small(bc);
            let a1 = assemble_stiffness_unit(&mesh, &space);
            let ones = Col::from_fn(space.n_dof, |_| 1.0);
            let au: Col<f64> = &a1 * &ones;
            let max = (0..space.n_dof).fold(0.0f64, |m, i| m.max(au[i].abs()));
            assert!(max < 1e-10, "constants in kernel, got max residual {max} ({bc:?})");
        }
    }

    #[test]
    fn stiffness_symmetric() {
        for bc in [BoundaryKind::Neumann, BoundaryKind::Periodic] {
            let (mesh, space) = small(bc);
            let a1 = assemble_stiffness_unit(&mesh, &space);
            let dense = a1.to_dense();
            let mut asym = 0.0f64;
            for i in 0..space.n_dof {
                for j in 0..space.n_dof {
                    asym = asym.max((dense[(i, j)] - dense[(j, i)]).abs());
                }
            }
            assert!(asym < 1e-13, "SIPG must assemble symmetric, asym = {asym}");
        }
    }

    #[test]
    fn periodic_row_sums_vanish() {
        let (mesh, space) = small(BoundaryKind::Periodic);
        let a1 = assemble_stiffness_unit(&mesh, &space);
        let dense = a1.to_dense();
        for i in 0..space.n_dof {
            let s: f64 = (0..space.n_dof).map(|j| dense[(i, j)]).sum();
            assert!(s.abs() < 1e-10, "row {i} sums to {s}");
        }
    }

    #[test]
    fn affine_dependence_on_eps() {
        let (mesh, space) = small(BoundaryKind::Neumann);
        let a1 = assemble_stiffness_unit(&mesh, &space);
        let eps = 0.037;
        let aeps = assemble_stiffness(&mesh, &space, eps);
        let (sym1, v1) = a1.into_parts();
        let (sym2, v2) = aeps.into_parts();
        assert_eq!(sym1.col_ptr(), sym2.col_ptr());
        assert_eq!(sym1.row_idx(), sym2.row_idx());
        for (a, b) in v1.iter().zip(v2.iter()) {
            let scale = a.abs().max(1e-30);
            assert!(
                (eps * a - b).abs() <= 1e-14 * eps * scale.max(1.0),
                "affine mismatch {a} vs {b}"
            );
        }
    }

    #[test]
    fn quartic_nonlinear_trivial_values() {
        let (mesh, space) = small(BoundaryKind::Neumann);
        let p = Potential::Quartic;
        for c in [0.0, 1.0] {
            let u = Col::from_fn(space.n_dof, |_| c);
            let f = eval_nonlinear(&u, &p, &mesh, &space, ClampPolicy::Clamp).unwrap();
            assert!(f.norm_l2() < 1e-14, "f(u = {c}) must vanish");
        }
    }

    #[test]
    fn jacobian_at_zero_is_minus_mass() {
        let (mesh, space) = small(BoundaryKind::Neumann);
        let p = Potential::Quartic;
        let u = Col::zeros(space.n_dof);
        let jac = eval_nonlinear_jacobian(&u, &p, &mesh, &space, ClampPolicy::Clamp).unwrap();
        let mass = assemble_mass(&mesh, &space);
        for t in 0..mesh.n_triangles() {
            for i in 0..3 {
                for j in 0..3 {
                    assert!(
                        (jac.blocks[t][i][j] + mass.block(t)[i][j]).abs() < 1e-14,
                        "f'(0) = -1 so J = -M"
                    );
                }
            }
        }
    }

    #[test]
    fn energy_trivial_values() {
        let (mesh, space) = small(BoundaryKind::Neumann);
        let p = Potential::Quartic;
        let ones = Col::from_fn(space.n_dof, |_| 1.0);
        assert!(discrete_energy(&ones, &mesh, &space, 0.01, &p).abs() < 1e-14);
        let zero = Col::zeros(space.n_dof);
        let e = discrete_energy(&zero, &mesh, &space, 0.01, &p);
        assert!((e - 0.25).abs() < 1e-14, "F(0) |Omega| = 1/4, got {e}");
    }

    #[test]
    fn compose_reproduces_mass_plus_a1() {
        let (mesh, space) = small(BoundaryKind::Periodic);
        let ops = FomOperators::new(&mesh, &space).unwrap();
        let k = ops.compose(1.0, 2.0, None);
        let mut rng = SplitMix64::new(11);
        let x = Col::from_fn(space.n_dof, |_| rng.next_f64() - 0.5);
        let mx = ops.mass.apply(&x);
        let ax: Col<f64> = faer::Scale(2.0) * &ops.apply_a1(&x);
        let want: Col<f64> = &mx + &ax;
        let got: Col<f64> = &k * &x;
        let diff: Col<f64> = &got - &want;
        assert!(diff.norm_l2() < 1e-12 * want.norm_l2());
    }

    #[test]
    fn min_eigenvalue_matches_block_formula() {
        // Uniform mesh: all blocks area/12 [[2,1,1],[1,2,1],[1,1,2]] with
        // smallest eigenvalue area/12.
        let (mesh, space) = small(BoundaryKind::Neumann);
        let mass = assemble_mass(&mesh, &space);
        let area = space.geometry(0).area;
        let lam = mass.min_eigenvalue();
        assert!(
            (lam - area / 12.0).abs() < 1e-12,
            "lambda_min = {lam} vs area/12 = {}",
            area / 12.0
        );
    }
}
