//! Lagrange finite element spaces on triangle meshes: scalar/vector P1 and
//! P2, deterministic dof enumeration, basis evaluation and nodal
//! interpolation.
//!
//! Scalar dofs are numbered vertices first, then (for P2) edges sorted by
//! their vertex pair. Vector fields are stored component-blocked: the global
//! dof of component `c` at scalar node `s` is `c * n_scalar + s`.

use crate::mesh::{signed_area, BoundaryMarker, Mesh, Point};
use crate::{Error, Real, Result};
use std::collections::HashMap;
use std::sync::Arc;

pub const MAX_LOCAL: usize = 6;

/// Evaluation of the local basis at one reference point.
#[derive(Debug, Clone, Copy)]
pub struct BasisEval {
    /// Basis values; only the first `n_local` entries are meaningful.
    pub values: [Real; MAX_LOCAL],
    /// Physical gradients of the basis functions.
    pub gradients: [[Real; 2]; MAX_LOCAL],
    /// Jacobian determinant of the reference map (twice the triangle area).
    pub det_j: Real,
}

/// P1/P2 Lagrange space with 1 or 2 components.
#[derive(Debug, Clone)]
pub struct FeSpace {
    pub mesh: Arc<Mesh>,
    pub degree: usize,
    pub components: usize,
    n_scalar: usize,
    /// triangle -> scalar dofs (3 for P1, 6 for P2: vertices then opposite edges)
    element_dofs: Vec<[usize; MAX_LOCAL]>,
    n_local: usize,
    /// scalar dof -> position (vertex or edge midpoint)
    node_pos: Vec<Point>,
    /// scalar dof -> boundary marker under the precedence
    /// cylinder > wall > inflow > outflow
    node_marker: Vec<Option<BoundaryMarker>>,
}

fn marker_rank(m: BoundaryMarker) -> u8 {
    match m {
        BoundaryMarker::Cylinder => 3,
        BoundaryMarker::Wall => 2,
        BoundaryMarker::Inflow => 1,
        BoundaryMarker::Outflow => 0,
    }
}

impl FeSpace {
    pub fn new(mesh: Arc<Mesh>, degree: usize, components: usize) -> Result<Self> {
        if !(degree == 1 || degree == 2) {
            return Err(Error::Config(format!("unsupported FE degree {degree} (want 1 or 2)")));
        }
        if !(components == 1 || components == 2) {
            return Err(Error::Config(format!("unsupported component count {components}")));
        }
        let nv = mesh.n_vertices();
        // deterministic edge numbering: sorted vertex pairs
        let mut edge_ids: HashMap<(usize, usize), usize> = HashMap::new();
        let mut edges: Vec<(usize, usize)> = Vec::new();
        if degree == 2 {
            let mut all: Vec<(usize, usize)> = Vec::with_capacity(3 * mesh.n_triangles());
            for tri in &mesh.triangles {
                for k in 0..3 {
                    let (u, v) = (tri[k], tri[(k + 1) % 3]);
                    all.push((u.min(v), u.max(v)));
                }
            }
            all.sort_unstable();
            all.dedup();
            for (i, e) in all.iter().enumerate() {
                edge_ids.insert(*e, i);
            }
            edges = all;
        }
        let n_scalar = if degree == 1 { nv } else { nv + edges.len() };

        let n_local = if degree == 1 { 3 } else { 6 };
        let mut element_dofs = Vec::with_capacity(mesh.n_triangles());
        for tri in &mesh.triangles {
            let mut dofs = [usize::MAX; MAX_LOCAL];
            dofs[..3].copy_from_slice(tri);
            if degree == 2 {
                // local edge k is opposite vertex k
                for k in 0..3 {
                    let (u, v) = (tri[(k + 1) % 3], tri[(k + 2) % 3]);
                    dofs[3 + k] = nv + edge_ids[&(u.min(v), u.max(v))];
                }
            }
            element_dofs.push(dofs);
        }

        let mut node_pos = mesh.vertices.clone();
        if degree == 2 {
            node_pos.reserve(edges.len());
            for &(u, v) in &edges {
                let (a, b) = (mesh.vertices[u], mesh.vertices[v]);
                node_pos.push([0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])]);
            }
        }

        let mut node_marker: Vec<Option<BoundaryMarker>> = vec![None; n_scalar];
        let mut stamp = |node: usize, m: BoundaryMarker| {
            node_marker[node] = Some(match node_marker[node] {
                Some(old) if marker_rank(old) >= marker_rank(m) => old,
                _ => m,
            });
        };
        for be in &mesh.boundary_edges {
            stamp(be.a, be.marker);
            stamp(be.b, be.marker);
            if degree == 2 {
                let key = (be.a.min(be.b), be.a.max(be.b));
                stamp(nv + edge_ids[&key], be.marker);
            }
        }

        Ok(FeSpace { mesh, degree, components, n_scalar, element_dofs, n_local, node_pos, node_marker })
    }

    pub fn n_scalar_dofs(&self) -> usize {
        self.n_scalar
    }

    pub fn n_dofs(&self) -> usize {
        self.components * self.n_scalar
    }

    pub fn n_local(&self) -> usize {
        self.n_local
    }

    /// Scalar dofs of a triangle (vertices then opposite edges).
    pub fn element_dofs(&self, t: usize) -> &[usize] {
        &self.element_dofs[t][..self.n_local]
    }

    pub fn node_position(&self, scalar_dof: usize) -> Point {
        self.node_pos[scalar_dof]
    }

    pub fn node_marker(&self, scalar_dof: usize) -> Option<BoundaryMarker> {
        self.node_marker[scalar_dof]
    }

    /// Global dof of component `c` at scalar node `s`.
    pub fn dof(&self, c: usize, s: usize) -> usize {
        debug_assert!(c < self.components);
        c * self.n_scalar + s
    }

    /// Local basis values at a barycentric point.
    pub fn eval_values(&self, bary: [Real; 3]) -> [Real; MAX_LOCAL] {
        let [l0, l1, l2] = bary;
        let mut n = [0.0; MAX_LOCAL];
        if self.degree == 1 {
            n[0] = l0;
            n[1] = l1;
            n[2] = l2;
        } else {
            n[0] = l0 * (2.0 * l0 - 1.0);
            n[1] = l1 * (2.0 * l1 - 1.0);
            n[2] = l2 * (2.0 * l2 - 1.0);
            n[3] = 4.0 * l1 * l2;
            n[4] = 4.0 * l2 * l0;
            n[5] = 4.0 * l0 * l1;
        }
        n
    }

    /// Values and physical gradients on a concrete triangle.
    pub fn eval(&self, t: usize, bary: [Real; 3]) -> BasisEval {
        let [a, b, c] = self.mesh.triangle_vertices(t);
        let det_j = 2.0 * signed_area(a, b, c);
        // gradients of barycentric coordinates in physical space
        let gl = [
            [(b[1] - c[1]) / det_j, (c[0] - b[0]) / det_j],
            [(c[1] - a[1]) / det_j, (a[0] - c[0]) / det_j],
            [(a[1] - b[1]) / det_j, (b[0] - a[0]) / det_j],
        ];
        let values = self.eval_values(bary);
        let mut gradients = [[0.0; 2]; MAX_LOCAL];
        let [l0, l1, l2] = bary;
        if self.degree == 1 {
            gradients[..3].copy_from_slice(&gl);
        } else {
            for v in 0..3 {
                let lv = bary[v];
                for d in 0..2 {
                    gradients[v][d] = (4.0 * lv - 1.0) * gl[v][d];
                }
            }
            for d in 0..2 {
                gradients[3][d] = 4.0 * (l1 * gl[2][d] + l2 * gl[1][d]);
                gradients[4][d] = 4.0 * (l2 * gl[0][d] + l0 * gl[2][d]);
                gradients[5][d] = 4.0 * (l0 * gl[1][d] + l1 * gl[0][d]);
            }
        }
        BasisEval { values, gradients, det_j }
    }

    /// Nodal interpolation of a scalar function.
    pub fn interpolate_scalar(&self, f: impl Fn(Point) -> Real) -> Vec<Real> {
        assert_eq!(self.components, 1);
        self.node_pos.iter().map(|&p| f(p)).collect()
    }

    /// Nodal interpolation of a vector function (component-blocked result).
    pub fn interpolate_vector(&self, f: impl Fn(Point) -> [Real; 2]) -> Vec<Real> {
        assert_eq!(self.components, 2);
        let mut coeffs = vec![0.0; self.n_dofs()];
        for (s, &p) in self.node_pos.iter().enumerate() {
            let v = f(p);
            coeffs[s] = v[0];
            coeffs[self.n_scalar + s] = v[1];
        }
        coeffs
    }

    /// Scalar dofs whose node carries one of the given markers, sorted.
    pub fn boundary_scalar_dofs(&self, markers: &[BoundaryMarker]) -> Vec<usize> {
        (0..self.n_scalar)
            .filter(|&s| self.node_marker[s].is_some_and(|m| markers.contains(&m)))
            .collect()
    }

    /// Evaluate a scalar coefficient field at a physical point.
    pub fn eval_scalar_field(&self, coeffs: &[Real], p: Point) -> Option<Real> {
        let (t, bary) = self.mesh.find_triangle(p)?;
        let values = self.eval_values(bary);
        let dofs = self.element_dofs(t);
        Some(dofs.iter().zip(values.iter()).map(|(&d, &n)| coeffs[d] * n).sum())
    }
}

/// Builders for the benchmark pair: P2 vector velocity and P1 pressure.
pub fn taylor_hood(mesh: &Arc<Mesh>) -> Result<(FeSpace, FeSpace)> {
    let velocity = FeSpace::new(Arc::clone(mesh), 2, 2)?;
    let pressure = FeSpace::new(Arc::clone(mesh), 1, 1)?;
    Ok((velocity, pressure))
}
