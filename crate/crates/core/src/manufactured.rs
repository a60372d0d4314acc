//! Manufactured solutions on the unit square for convergence measurement,
//! plus quadrature-based error norms against an exact solution.
//!
//! The spatial field is the stream-function vortex
//! `psi = sin^2(pi x) sin^2(pi y)` (velocity = curl psi, divergence-free,
//! zero trace on the square boundary) with pressure `sin(pi x) cos(pi y)`
//! (zero mean). The time factor `g(t)` multiplies both fields and the
//! forcing is derived in closed form; a finite-difference oracle in the
//! tests guards the hand derivation.

use crate::assembly::eval_vector_field;
use crate::fespace::FeSpace;
use crate::mesh::Point;
use crate::quadrature::QuadratureRule;
use crate::Real;
use std::f64::consts::PI;

type VecFn = Box<dyn Fn(Point, Real) -> [Real; 2] + Send + Sync>;
type GradFn = Box<dyn Fn(Point, Real) -> [[Real; 2]; 2] + Send + Sync>;
type ScalFn = Box<dyn Fn(Point, Real) -> Real + Send + Sync>;

/// Closed-form solution of the momentum/continuity system with consistent
/// forcing `f = u_t + (u . grad) u - nu lap u + grad p`.
pub struct ManufacturedSolution {
    pub nu: Real,
    pub velocity: VecFn,
    pub velocity_gradient: GradFn,
    pub pressure: ScalFn,
    pub forcing: VecFn,
}

fn base_velocity(p: Point) -> [Real; 2] {
    let [x, y] = p;
    [
        PI * (PI * x).sin().powi(2) * (2.0 * PI * y).sin(),
        -PI * (2.0 * PI * x).sin() * (PI * y).sin().powi(2),
    ]
}

fn base_gradient(p: Point) -> [[Real; 2]; 2] {
    let [x, y] = p;
    let pi2 = PI * PI;
    [
        [
            pi2 * (2.0 * PI * x).sin() * (2.0 * PI * y).sin(),
            2.0 * pi2 * (PI * x).sin().powi(2) * (2.0 * PI * y).cos(),
        ],
        [
            -2.0 * pi2 * (2.0 * PI * x).cos() * (PI * y).sin().powi(2),
            -pi2 * (2.0 * PI * x).sin() * (2.0 * PI * y).sin(),
        ],
    ]
}

fn base_laplacian(p: Point) -> [Real; 2] {
    let [x, y] = p;
    let pi3 = PI * PI * PI;
    [
        2.0 * pi3 * (2.0 * PI * x).cos() * (2.0 * PI * y).sin()
            - 4.0 * pi3 * (PI * x).sin().powi(2) * (2.0 * PI * y).sin(),
        4.0 * pi3 * (2.0 * PI * x).sin() * (PI * y).sin().powi(2)
            - 2.0 * pi3 * (2.0 * PI * x).sin() * (2.0 * PI * y).cos(),
    ]
}

fn base_pressure(p: Point) -> Real {
    (PI * p[0]).sin() * (PI * p[1]).cos()
}

fn base_pressure_gradient(p: Point) -> [Real; 2] {
    let [x, y] = p;
    [PI * (PI * x).cos() * (PI * y).cos(), -PI * (PI * x).sin() * (PI * y).sin()]
}

/// Build the solution with time factor `g(t)` and its derivative `dg(t)`.
fn with_time_factor(
    nu: Real,
    g: impl Fn(Real) -> Real + Send + Sync + Copy + 'static,
    dg: impl Fn(Real) -> Real + Send + Sync + Copy + 'static,
) -> ManufacturedSolution {
    let velocity: VecFn = Box::new(move |p, t| {
        let u = base_velocity(p);
        let s = g(t);
        [s * u[0], s * u[1]]
    });
    let velocity_gradient: GradFn = Box::new(move |p, t| {
        let j = base_gradient(p);
        let s = g(t);
        [[s * j[0][0], s * j[0][1]], [s * j[1][0], s * j[1][1]]]
    });
    let pressure: ScalFn = Box::new(move |p, t| g(t) * base_pressure(p));
    let forcing: VecFn = Box::new(move |p, t| {
        let s = g(t);
        let sd = dg(t);
        let u = base_velocity(p);
        let j = base_gradient(p);
        let lap = base_laplacian(p);
        let gp = base_pressure_gradient(p);
        let mut f = [0.0; 2];
        for c in 0..2 {
            let conv = u[0] * j[c][0] + u[1] * j[c][1];
            f[c] = sd * u[c] + s * s * conv - nu * s * lap[c] + s * gp[c];
        }
        f
    });
    ManufacturedSolution { nu, velocity, velocity_gradient, pressure, forcing }
}

/// Steady vortex (`g = 1`); isolates spatial discretization error.
pub fn steady_vortex(nu: Real) -> ManufacturedSolution {
    with_time_factor(nu, |_| 1.0, |_| 0.0)
}

/// Vortex with `g(t) = cos(omega t)`; exercises the temporal error.
pub fn unsteady_vortex(nu: Real, omega: Real) -> ManufacturedSolution {
    with_time_factor(nu, move |t| (omega * t).cos(), move |t| -omega * (omega * t).sin())
}

/// L2 error of a vector coefficient field against the exact velocity.
pub fn velocity_l2_error(
    space: &FeSpace,
    coeffs: &[Real],
    ms: &ManufacturedSolution,
    t: Real,
    quad: &QuadratureRule,
) -> Real {
    let mut acc = 0.0;
    for el in 0..space.mesh.n_triangles() {
        let [pa, pb, pc] = space.mesh.triangle_vertices(el);
        for (q, w) in quad.points.iter().zip(&quad.weights) {
            let e = space.eval(el, *q);
            let (val, _) = eval_vector_field(space, coeffs, el, &e);
            let x = [
                q[0] * pa[0] + q[1] * pb[0] + q[2] * pc[0],
                q[0] * pa[1] + q[1] * pb[1] + q[2] * pc[1],
            ];
            let ex = (ms.velocity)(x, t);
            acc += w * ((val[0] - ex[0]).powi(2) + (val[1] - ex[1]).powi(2)) * e.det_j;
        }
    }
    acc.sqrt()
}

/// H1 seminorm error of a vector coefficient field.
pub fn velocity_h1_error(
    space: &FeSpace,
    coeffs: &[Real],
    ms: &ManufacturedSolution,
    t: Real,
    quad: &QuadratureRule,
) -> Real {
    let mut acc = 0.0;
    for el in 0..space.mesh.n_triangles() {
        let [pa, pb, pc] = space.mesh.triangle_vertices(el);
        for (q, w) in quad.points.iter().zip(&quad.weights) {
            let e = space.eval(el, *q);
            let (_, jac) = eval_vector_field(space, coeffs, el, &e);
            let x = [
                q[0] * pa[0] + q[1] * pb[0] + q[2] * pc[0],
                q[0] * pa[1] + q[1] * pb[1] + q[2] * pc[1],
            ];
            let ej = (ms.velocity_gradient)(x, t);
            let mut s = 0.0;
            for c in 0..2 {
                for d in 0..2 {
                    s += (jac[c][d] - ej[c][d]).powi(2);
                }
            }
            acc += w * s * e.det_j;
        }
    }
    acc.sqrt()
}

/// L2 error of a scalar coefficient field against the exact pressure.
pub fn pressure_l2_error(
    space: &FeSpace,
    coeffs: &[Real],
    ms: &ManufacturedSolution,
    t: Real,
    quad: &QuadratureRule,
) -> Real {
    let mut acc = 0.0;
    let nl = space.n_local();
    for el in 0..space.mesh.n_triangles() {
        let [pa, pb, pc] = space.mesh.triangle_vertices(el);
        let dofs = space.element_dofs(el);
        for (q, w) in quad.points.iter().zip(&quad.weights) {
            let e = space.eval(el, *q);
            let mut val = 0.0;
            for k in 0..nl {
                val += coeffs[dofs[k]] * e.values[k];
            }
            let x = [
                q[0] * pa[0] + q[1] * pb[0] + q[2] * pc[0],
                q[0] * pa[1] + q[1] * pb[1] + q[2] * pc[1],
            ];
            acc += w * (val - (ms.pressure)(x, t)).powi(2) * e.det_j;
        }
    }
    acc.sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Central finite differences as an independent oracle for the
    /// hand-derived gradient, Laplacian and forcing.
    #[test]
    fn forcing_matches_finite_difference_oracle() {
        let nu = 0.7;
        let omega = 2.0;
        let ms = unsteady_vortex(nu, omega);
        let hs = 1e-5;
        let pts = [[0.3, 0.45], [0.71, 0.12], [0.5, 0.5], [0.13, 0.88]];
        for &p in &pts {
            let t = 0.37;
            // u_t by FD in t
            let up = (ms.velocity)(p, t + hs);
            let um = (ms.velocity)(p, t - hs);
            let ut = [(up[0] - um[0]) / (2.0 * hs), (up[1] - um[1]) / (2.0 * hs)];
            // spatial derivatives by FD
            let u = |x: Point| (ms.velocity)(x, t);
            let uxp = u([p[0] + hs, p[1]]);
            let uxm = u([p[0] - hs, p[1]]);
            let uyp = u([p[0], p[1] + hs]);
            let uym = u([p[0], p[1] - hs]);
            let u0 = u(p);
            let grad_fd = [
                [(uxp[0] - uxm[0]) / (2.0 * hs), (uyp[0] - uym[0]) / (2.0 * hs)],
                [(uxp[1] - uxm[1]) / (2.0 * hs), (uyp[1] - uym[1]) / (2.0 * hs)],
            ];
            let grad = (ms.velocity_gradient)(p, t);
            for c in 0..2 {
                for d in 0..2 {
                    assert!((grad[c][d] - grad_fd[c][d]).abs() < 1e-5);
                }
            }
            let lap_fd = [
                (uxp[0] + uxm[0] + uyp[0] + uym[0] - 4.0 * u0[0]) / (hs * hs),
                (uxp[1] + uxm[1] + uyp[1] + uym[1] - 4.0 * u0[1]) / (hs * hs),
            ];
            let pr = |x: Point| (ms.pressure)(x, t);
            let gp_fd = [
                (pr([p[0] + hs, p[1]]) - pr([p[0] - hs, p[1]])) / (2.0 * hs),
                (pr([p[0], p[1] + hs]) - pr([p[0], p[1] - hs])) / (2.0 * hs),
            ];
            let f = (ms.forcing)(p, t);
            for c in 0..2 {
                let conv = u0[0] * grad_fd[c][0] + u0[1] * grad_fd[c][1];
                let f_fd = ut[c] + conv - nu * lap_fd[c] + gp_fd[c];
                assert!((f[c] - f_fd).abs() < 1e-4, "component {c}: {} vs {f_fd}", f[c]);
            }
        }
    }

    #[test]
    fn velocity_is_divergence_free_and_boundary_free() {
        let ms = steady_vortex(1.0);
        for &p in &[[0.2, 0.7], [0.55, 0.31], [0.9, 0.9]] {
            let j = (ms.velocity_gradient)(p, 0.0);
            assert!((j[0][0] + j[1][1]).abs() < 1e-12);
        }
        for &p in &[[0.0, 0.3], [1.0, 0.7], [0.4, 0.0], [0.8, 1.0]] {
            let u = (ms.velocity)(p, 0.0);
            assert!(u[0].abs() < 1e-12 && u[1].abs() < 1e-12);
        }
    }

    #[test]
    fn pressure_has_zero_mean_on_unit_square() {
        // int sin(pi x) cos(pi y) over the unit square is zero by symmetry in y
        let n = 400;
        let mut acc = 0.0;
        for i in 0..n {
            for j in 0..n {
                let x = (i as f64 + 0.5) / n as f64;
                let y = (j as f64 + 0.5) / n as f64;
                acc += base_pressure([x, y]);
            }
        }
        assert!(acc / ((n * n) as f64) < 1e-10);
    }

    #[test]
    fn interpolant_errors_vanish_for_in_space_fields() {
        use crate::mesh::generate_rect_mesh;
        use std::sync::Arc;
        // a solution whose velocity is quadratic lies in the P2 space exactly
        let mesh = Arc::new(generate_rect_mesh(1.0, 1.0, 0.25).unwrap());
        let space = FeSpace::new(Arc::clone(&mesh), 2, 2).unwrap();
        let quad = QuadratureRule::degree5();
        let ms = steady_vortex(1.0);
        let coeffs = space.interpolate_vector(|p| (ms.velocity)(p, 0.0));
        // interpolation error for the trig field shrinks with h at cubic rate
        let e_coarse = velocity_l2_error(&space, &coeffs, &ms, 0.0, &quad);
        assert!(e_coarse > 0.0);
        let fine = Arc::new(generate_rect_mesh(1.0, 1.0, 0.125).unwrap());
        let space_f = FeSpace::new(Arc::clone(&fine), 2, 2).unwrap();
        let coeffs_f = space_f.interpolate_vector(|p| (ms.velocity)(p, 0.0));
        let e_fine = velocity_l2_error(&space_f, &coeffs_f, &ms, 0.0, &quad);
        assert!(e_fine < e_coarse / 6.0, "coarse {e_coarse}, fine {e_fine}");
    }
}
