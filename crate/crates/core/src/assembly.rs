//! Sparse operators of the weak forms on Taylor-Hood spaces: masses,
//! stiffnesses, the divergence coupling, the skew-symmetric convection, load
//! vectors, Dirichlet elimination and the mean-constrained pressure solve.
//!
//! Scalar operators act on one velocity component (both components share the
//! same block); `expand_vector` produces the block-diagonal operator on the
//! full component-blocked vector space.

use crate::fespace::{BasisEval, FeSpace};
use crate::linalg::Triplets;
use crate::quadrature::QuadratureRule;
use crate::{DenseMatrix, Error, Real, Result, SparseMatrix};

/// Mass matrix on the scalar block of `space`.
pub fn assemble_mass_scalar(space: &FeSpace, quad: &QuadratureRule) -> SparseMatrix {
    let n = space.n_scalar_dofs();
    let nl = space.n_local();
    let mut t = Triplets::new(n, n);
    for el in 0..space.mesh.n_triangles() {
        let dofs = space.element_dofs(el);
        let mut local = [[0.0; 6]; 6];
        for (q, w) in quad.points.iter().zip(&quad.weights) {
            let e = space.eval(el, *q);
            for i in 0..nl {
                for j in 0..=i {
                    local[i][j] += w * e.values[i] * e.values[j] * e.det_j;
                }
            }
        }
        for i in 0..nl {
            for j in 0..=i {
                t.push(dofs[i], dofs[j], local[i][j]);
                if i != j {
                    t.push(dofs[j], dofs[i], local[i][j]);
                }
            }
        }
    }
    t.to_csr()
}

/// Stiffness matrix `(grad u, grad v)` on the scalar block (viscosity is
/// applied at use sites).
pub fn assemble_stiffness_scalar(space: &FeSpace, quad: &QuadratureRule) -> SparseMatrix {
    let n = space.n_scalar_dofs();
    let nl = space.n_local();
    let mut t = Triplets::new(n, n);
    for el in 0..space.mesh.n_triangles() {
        let dofs = space.element_dofs(el);
        let mut local = [[0.0; 6]; 6];
        for (q, w) in quad.points.iter().zip(&quad.weights) {
            let e = space.eval(el, *q);
            for i in 0..nl {
                for j in 0..=i {
                    let g = e.gradients[i][0] * e.gradients[j][0]
                        + e.gradients[i][1] * e.gradients[j][1];
                    local[i][j] += w * g * e.det_j;
                }
            }
        }
        for i in 0..nl {
            for j in 0..=i {
                t.push(dofs[i], dofs[j], local[i][j]);
                if i != j {
                    t.push(dofs[j], dofs[i], local[i][j]);
                }
            }
        }
    }
    t.to_csr()
}

/// Block-diagonal expansion of a scalar operator to `components` blocks.
pub fn expand_vector(scalar: &SparseMatrix, components: usize) -> SparseMatrix {
    let n = scalar.n_rows;
    let mut indptr = Vec::with_capacity(components * n + 1);
    let mut indices = Vec::with_capacity(components * scalar.nnz());
    let mut values = Vec::with_capacity(components * scalar.nnz());
    indptr.push(0);
    for c in 0..components {
        for i in 0..n {
            let (cols, vals) = scalar.row(i);
            for (col, v) in cols.iter().zip(vals) {
                indices.push(c * n + col);
                values.push(*v);
            }
            indptr.push(indices.len());
        }
    }
    SparseMatrix {
        n_rows: components * n,
        n_cols: components * scalar.n_cols,
        indptr,
        indices,
        values,
    }
}

/// Divergence coupling `B[l, c*n_s + j] = (q_l, d phi_j / d x_c)`; rows are
/// pressure dofs, columns component-blocked velocity dofs. Used transposed
/// (with a sign flip) as the discrete pressure gradient.
pub fn assemble_divergence(vel: &FeSpace, pres: &FeSpace, quad: &QuadratureRule) -> SparseMatrix {
    assert_eq!(vel.components, 2);
    let n_p = pres.n_scalar_dofs();
    let n_s = vel.n_scalar_dofs();
    let nl_v = vel.n_local();
    let nl_p = pres.n_local();
    let mut t = Triplets::new(n_p, 2 * n_s);
    for el in 0..vel.mesh.n_triangles() {
        let vdofs = vel.element_dofs(el);
        let pdofs = pres.element_dofs(el);
        let mut local = [[[0.0; 2]; 6]; 3];
        for (q, w) in quad.points.iter().zip(&quad.weights) {
            let ev = vel.eval(el, *q);
            let ep = pres.eval(el, *q);
            for l in 0..nl_p {
                for j in 0..nl_v {
                    for c in 0..2 {
                        local[l][j][c] += w * ep.values[l] * ev.gradients[j][c] * ev.det_j;
                    }
                }
            }
        }
        for l in 0..nl_p {
            for j in 0..nl_v {
                for c in 0..2 {
                    t.push(pdofs[l], c * n_s + vdofs[j], local[l][j][c]);
                }
            }
        }
    }
    t.to_csr()
}

/// Value and Jacobian of a component-blocked vector field on element `el`
/// at a prepared basis evaluation.
pub fn eval_vector_field(
    space: &FeSpace,
    coeffs: &[Real],
    el: usize,
    e: &BasisEval,
) -> ([Real; 2], [[Real; 2]; 2]) {
    let n_s = space.n_scalar_dofs();
    let dofs = space.element_dofs(el);
    let mut val = [0.0; 2];
    let mut jac = [[0.0; 2]; 2];
    for (k, &d) in dofs.iter().enumerate() {
        for c in 0..2 {
            let coef = coeffs[c * n_s + d];
            val[c] += coef * e.values[k];
            jac[c][0] += coef * e.gradients[k][0];
            jac[c][1] += coef * e.gradients[k][1];
        }
    }
    (val, jac)
}

/// Reusable assembler for the skew convection operator `C(w)` on the scalar
/// block: `C[i, j] = b(w, phi_j, phi_i)` with
/// `b(u, v, w) = 1/2 (u . grad v, w) - 1/2 (u . grad w, v)`.
/// Skew symmetry `C + C^T = 0` holds entrywise exactly because each element
/// contribution is antisymmetrized before scattering.
pub struct ConvectionAssembler {
    csr: SparseMatrix,
}

impl ConvectionAssembler {
    pub fn new(space: &FeSpace, quad: &QuadratureRule) -> Self {
        let zeros = vec![0.0; 2 * space.n_scalar_dofs()];
        let csr = assemble_convection_scalar(space, &zeros, quad);
        ConvectionAssembler { csr }
    }

    pub fn assemble(
        &mut self,
        space: &FeSpace,
        w: &[Real],
        quad: &QuadratureRule,
    ) -> &SparseMatrix {
        self.csr.zero_values();
        let nl = space.n_local();
        for el in 0..space.mesh.n_triangles() {
            let dofs = space.element_dofs(el);
            let mut adv = [[0.0; 6]; 6];
            for (q, wq) in quad.points.iter().zip(&quad.weights) {
                let e = space.eval(el, *q);
                let (wval, _) = eval_vector_field(space, w, el, &e);
                for i in 0..nl {
                    for j in 0..nl {
                        let conv = wval[0] * e.gradients[j][0] + wval[1] * e.gradients[j][1];
                        adv[i][j] += wq * conv * e.values[i] * e.det_j;
                    }
                }
            }
            for i in 0..nl {
                for j in 0..nl {
                    if i != j {
                        self.csr.add_at(dofs[i], dofs[j], 0.5 * (adv[i][j] - adv[j][i]));
                    }
                }
            }
        }
        &self.csr
    }
}

/// One-shot skew convection assembly (pattern included).
pub fn assemble_convection_scalar(
    space: &FeSpace,
    w: &[Real],
    quad: &QuadratureRule,
) -> SparseMatrix {
    let n = space.n_scalar_dofs();
    let nl = space.n_local();
    let mut t = Triplets::new(n, n);
    for el in 0..space.mesh.n_triangles() {
        let dofs = space.element_dofs(el);
        let mut adv = [[0.0; 6]; 6];
        for (q, wq) in quad.points.iter().zip(&quad.weights) {
            let e = space.eval(el, *q);
            let (wval, _) = eval_vector_field(space, w, el, &e);
            for i in 0..nl {
                for j in 0..nl {
                    let conv = wval[0] * e.gradients[j][0] + wval[1] * e.gradients[j][1];
                    adv[i][j] += wq * conv * e.values[i] * e.det_j;
                }
            }
        }
        for i in 0..nl {
            for j in 0..nl {
                // keep explicit zeros so the pattern is reusable
                t.push(dofs[i], dofs[j], 0.5 * (adv[i][j] - adv[j][i]));
            }
        }
    }
    t.to_csr()
}

/// Load vector `(f, phi_i)` on a vector space, component-blocked.
pub fn assemble_load_vector(
    space: &FeSpace,
    f: impl Fn(crate::mesh::Point) -> [Real; 2],
    quad: &QuadratureRule,
) -> Vec<Real> {
    assert_eq!(space.components, 2);
    let n_s = space.n_scalar_dofs();
    let nl = space.n_local();
    let mut load = vec![0.0; 2 * n_s];
    for el in 0..space.mesh.n_triangles() {
        let dofs = space.element_dofs(el);
        let [pa, pb, pc] = space.mesh.triangle_vertices(el);
        for (q, w) in quad.points.iter().zip(&quad.weights) {
            let e = space.eval(el, *q);
            let x = [
                q[0] * pa[0] + q[1] * pb[0] + q[2] * pc[0],
                q[0] * pa[1] + q[1] * pb[1] + q[2] * pc[1],
            ];
            let fv = f(x);
            for k in 0..nl {
                for c in 0..2 {
                    load[c * n_s + dofs[k]] += w * fv[c] * e.values[k] * e.det_j;
                }
            }
        }
    }
    load
}

/// Skew trilinear form `b(u, v, w)` evaluated by quadrature.
pub fn trilinear_skew(
    space: &FeSpace,
    u: &[Real],
    v: &[Real],
    w: &[Real],
    quad: &QuadratureRule,
) -> Real {
    let mut acc = 0.0;
    for el in 0..space.mesh.n_triangles() {
        for (q, wq) in quad.points.iter().zip(&quad.weights) {
            let e = space.eval(el, *q);
            let (uval, _) = eval_vector_field(space, u, el, &e);
            let (vval, vjac) = eval_vector_field(space, v, el, &e);
            let (wval, wjac) = eval_vector_field(space, w, el, &e);
            let mut s = 0.0;
            for c in 0..2 {
                let u_grad_v = uval[0] * vjac[c][0] + uval[1] * vjac[c][1];
                let u_grad_w = uval[0] * wjac[c][0] + uval[1] * wjac[c][1];
                s += 0.5 * (u_grad_v * wval[c] - u_grad_w * vval[c]);
            }
            acc += wq * s * e.det_j;
        }
    }
    acc
}

/// Equivalent convective form of the skew trilinear term for winds with
/// `u . n = 0` on the boundary: `(u . grad v, w) + 1/2 ((div u) v, w)`.
pub fn trilinear_conv_div(
    space: &FeSpace,
    u: &[Real],
    v: &[Real],
    w: &[Real],
    quad: &QuadratureRule,
) -> Real {
    let mut acc = 0.0;
    for el in 0..space.mesh.n_triangles() {
        for (q, wq) in quad.points.iter().zip(&quad.weights) {
            let e = space.eval(el, *q);
            let (uval, ujac) = eval_vector_field(space, u, el, &e);
            let (vval, vjac) = eval_vector_field(space, v, el, &e);
            let (wval, _) = eval_vector_field(space, w, el, &e);
            let div_u = ujac[0][0] + ujac[1][1];
            let mut s = 0.0;
            for c in 0..2 {
                let u_grad_v = uval[0] * vjac[c][0] + uval[1] * vjac[c][1];
                s += u_grad_v * wval[c] + 0.5 * div_u * vval[c] * wval[c];
            }
            acc += wq * s * e.det_j;
        }
    }
    acc
}

/// In-place symmetric Dirichlet elimination.
///
/// `nodes[k]` is constrained to `values[s][k]` for each attached system `s`
/// (several right-hand sides share one matrix). Constrained rows/columns are
/// zeroed with a unit diagonal; column contributions move to the rhs.
pub fn eliminate_dirichlet(
    k: &mut SparseMatrix,
    nodes: &[usize],
    systems: &mut [(&[Real], &mut [Real])],
) {
    let n = k.n_rows;
    let mut constrained = vec![false; n];
    let mut val_at: Vec<Vec<Real>> = vec![vec![0.0; n]; systems.len()];
    for (idx, &node) in nodes.iter().enumerate() {
        constrained[node] = true;
        for (s, (vals, _)) in systems.iter().enumerate() {
            val_at[s][node] = vals[idx];
        }
    }
    for r in 0..n {
        let lo = k.indptr[r];
        let hi = k.indptr[r + 1];
        if constrained[r] {
            for e in lo..hi {
                let c = k.indices[e];
                k.values[e] = if c == r { 1.0 } else { 0.0 };
            }
            for (s, (_, rhs)) in systems.iter_mut().enumerate() {
                rhs[r] = val_at[s][r];
            }
        } else {
            for e in lo..hi {
                let c = k.indices[e];
                if constrained[c] {
                    let kv = k.values[e];
                    for (s, (_, rhs)) in systems.iter_mut().enumerate() {
                        rhs[r] -= kv * val_at[s][c];
                    }
                    k.values[e] = 0.0;
                }
            }
        }
    }
}

/// Pressure Poisson operator with the zero-mean constraint enforced by a
/// rank-1 Lagrange multiplier row (`int q = 0`). The augmented matrix is
/// factorized once and reused every step.
pub struct MeanConstrainedPoisson {
    lu: crate::linalg::LuFactors<Real>,
    n: usize,
}

impl MeanConstrainedPoisson {
    /// `a_p` is the (singular, pure-Neumann) pressure stiffness; `weights`
    /// are the integrals of the pressure basis functions (mass row sums).
    pub fn new(a_p: &SparseMatrix, weights: &[Real]) -> Result<Self> {
        let n = a_p.n_rows;
        assert_eq!(weights.len(), n);
        let mut aug = DenseMatrix::zeros(n + 1, n + 1);
        for i in 0..n {
            let (cols, vals) = a_p.row(i);
            for (c, v) in cols.iter().zip(vals) {
                aug[(i, *c)] = *v;
            }
            aug[(i, n)] = weights[i];
            aug[(n, i)] = weights[i];
        }
        let lu = aug
            .lu()
            .map_err(|e| Error::Numerical(format!("pressure Poisson factorization failed: {e}")))?;
        Ok(MeanConstrainedPoisson { lu, n })
    }

    /// Solve `A_p p = rhs` subject to `sum_i w_i p_i = 0`.
    pub fn solve(&self, rhs: &[Real]) -> Result<Vec<Real>> {
        assert_eq!(rhs.len(), self.n);
        let mut b = rhs.to_vec();
        b.push(0.0);
        let mut x = self.lu.solve(&b)?;
        x.pop();
        Ok(x)
    }
}

/// All assembled operators of one Taylor-Hood discretization.
pub struct FemOperators {
    pub quad: QuadratureRule,
    /// scalar P2 mass/stiffness (one velocity component)
    pub m_s: SparseMatrix,
    pub a_s: SparseMatrix,
    /// vector expansions on the blocked velocity space
    pub m_u: SparseMatrix,
    pub a_u: SparseMatrix,
    /// pressure mass/stiffness
    pub m_p: SparseMatrix,
    pub a_p: SparseMatrix,
    /// divergence coupling (pressure x vector velocity)
    pub b_div: SparseMatrix,
    /// integrals of pressure basis functions (mass row sums)
    pub p_weights: Vec<Real>,
}

impl FemOperators {
    pub fn build(vel: &FeSpace, pres: &FeSpace) -> Self {
        let quad = QuadratureRule::degree5();
        let m_s = assemble_mass_scalar(vel, &quad);
        let a_s = assemble_stiffness_scalar(vel, &quad);
        let m_u = expand_vector(&m_s, 2);
        let a_u = expand_vector(&a_s, 2);
        let m_p = assemble_mass_scalar(pres, &quad);
        let a_p = assemble_stiffness_scalar(pres, &quad);
        let b_div = assemble_divergence(vel, pres, &quad);
        let ones = vec![1.0; m_p.n_rows];
        let p_weights = m_p.matvec(&ones);
        FemOperators { quad, m_s, a_s, m_u, a_u, m_p, a_p, b_div, p_weights }
    }

    /// L2 norm induced by a mass (or stiffness) matrix.
    pub fn norm(m: &SparseMatrix, x: &[Real]) -> Real {
        m.bilinear(x, x).max(0.0).sqrt()
    }

    /// Mean value of a pressure field.
    pub fn pressure_mean(&self, p: &[Real]) -> Real {
        let area: Real = self.p_weights.iter().sum();
        crate::linalg::dot(&self.p_weights, p) / area
    }
}
