//! Benchmark functionals and diagnostics: drag/lift coefficients via the
//! volume-integral formulation, kinetic energy, pressure difference at the
//! cylinder, relative-error series and the spectral stability diagnostic.

use crate::assembly::{eval_vector_field, FemOperators};
use crate::fespace::FeSpace;
use crate::mesh::{BoundaryMarker, Point};
use crate::quadrature::QuadratureRule;
use crate::{Error, Real, Result, SparseMatrix};
use std::fmt::Write as _;

/// Cylinder diameter of the benchmark (m).
pub const CYLINDER_DIAMETER: Real = 0.1;
/// Mean inflow speed of the benchmark (m/s).
pub const MEAN_SPEED: Real = 1.0;
/// Default pressure-difference probes: front and rear cylinder points.
pub const PRESSURE_FRONT: Point = [0.15, 0.2];
pub const PRESSURE_BACK: Point = [0.25, 0.2];

/// Precomputed support for the drag/lift volume integrals: the test field is
/// 1 on cylinder dofs and 0 on every other dof, so only elements touching a
/// cylinder node contribute.
pub struct DragLiftEvaluator {
    support: Vec<usize>,
    /// scalar velocity dofs on the cylinder
    cyl_nodes: Vec<bool>,
    scale: Real,
}

impl DragLiftEvaluator {
    pub fn new(vel: &FeSpace) -> Result<Self> {
        let n_s = vel.n_scalar_dofs();
        let mut cyl_nodes = vec![false; n_s];
        let mut any = false;
        for s in 0..n_s {
            if vel.node_marker(s) == Some(BoundaryMarker::Cylinder) {
                cyl_nodes[s] = true;
                any = true;
            }
        }
        if !any {
            return Err(Error::Config("drag/lift requires a cylinder-marked boundary".into()));
        }
        let mut support = Vec::new();
        for el in 0..vel.mesh.n_triangles() {
            if vel.element_dofs(el).iter().any(|&d| cyl_nodes[d]) {
                support.push(el);
            }
        }
        let scale = -2.0 / (CYLINDER_DIAMETER * MEAN_SPEED * MEAN_SPEED);
        Ok(DragLiftEvaluator { support, cyl_nodes, scale })
    }

    /// Drag and lift coefficients of the state `(u, p)`:
    /// `c = -2/(D U^2) [ nu (grad u, grad v) + b(u, u, v) - (p, div v) ]`
    /// with `v` equal to the unit vector on the cylinder dofs and zero on all
    /// other dofs.
    pub fn drag_lift(
        &self,
        vel: &FeSpace,
        pres: &FeSpace,
        u: &[Real],
        p: &[Real],
        nu: Real,
        quad: &QuadratureRule,
    ) -> (Real, Real) {
        let nl = vel.n_local();
        let nlp = pres.n_local();
        let mut acc = [0.0; 2];
        for &el in &self.support {
            let vdofs = vel.element_dofs(el);
            let pdofs = pres.element_dofs(el);
            for (q, w) in quad.points.iter().zip(&quad.weights) {
                let e = vel.eval(el, *q);
                let (uval, ujac) = eval_vector_field(vel, u, el, &e);
                // scalar profile of the test field and its gradient
                let mut vv = 0.0;
                let mut gv = [0.0; 2];
                for k in 0..nl {
                    if self.cyl_nodes[vdofs[k]] {
                        vv += e.values[k];
                        gv[0] += e.gradients[k][0];
                        gv[1] += e.gradients[k][1];
                    }
                }
                let ep = pres.eval(el, *q);
                let mut pval = 0.0;
                for k in 0..nlp {
                    pval += p[pdofs[k]] * ep.values[k];
                }
                for c in 0..2 {
                    // v = vv * e_c: viscous + skew convection - pressure term
                    let visc = nu * (ujac[c][0] * gv[0] + ujac[c][1] * gv[1]);
                    let conv = 0.5 * (uval[0] * ujac[c][0] + uval[1] * ujac[c][1]) * vv
                        - 0.5 * (uval[0] * gv[0] + uval[1] * gv[1]) * uval[c];
                    let div_v = gv[c];
                    acc[c] += w * (visc + conv - pval * div_v) * e.det_j;
                }
            }
        }
        (self.scale * acc[0], self.scale * acc[1])
    }

    /// Test-field coefficient vectors (component-blocked) for the matrix
    /// route and the extension-invariance checks.
    pub fn test_fields(&self, vel: &FeSpace) -> (Vec<Real>, Vec<Real>) {
        let n_s = vel.n_scalar_dofs();
        let mut vd = vec![0.0; 2 * n_s];
        let mut vl = vec![0.0; 2 * n_s];
        for s in 0..n_s {
            if self.cyl_nodes[s] {
                vd[s] = 1.0;
                vl[n_s + s] = 1.0;
            }
        }
        (vd, vl)
    }
}

/// Drag/lift through assembled operators; an algebraically independent route
/// used as the oracle for the quadrature evaluator:
/// `c = -2/(D U^2) [ nu v^T A_u u + v^T C(u) u - p^T B v ]`.
pub fn drag_lift_via_operators(
    ops: &FemOperators,
    conv_scalar: &SparseMatrix,
    u: &[Real],
    p: &[Real],
    nu: Real,
    v_test: &[Real],
) -> Real {
    let n_s = ops.m_s.n_rows;
    let visc = nu * ops.a_u.bilinear(v_test, u);
    let mut conv = 0.0;
    for c in 0..2 {
        conv += conv_scalar.bilinear(&v_test[c * n_s..(c + 1) * n_s], &u[c * n_s..(c + 1) * n_s]);
    }
    let pres_term = crate::linalg::dot(p, &ops.b_div.matvec(v_test));
    -2.0 / (CYLINDER_DIAMETER * MEAN_SPEED * MEAN_SPEED) * (visc + conv - pres_term)
}

/// Kinetic energy `(1/2) u^T M_u u`.
pub fn kinetic_energy(u: &[Real], m_u: &SparseMatrix) -> Real {
    0.5 * m_u.bilinear(u, u)
}

/// Pressure difference `p(front) - p(back)`.
pub fn pressure_diff(pres: &FeSpace, p: &[Real], front: Point, back: Point) -> Result<Real> {
    let pf = pres
        .eval_scalar_field(p, front)
        .ok_or_else(|| Error::Config(format!("pressure probe {front:?} is outside the mesh")))?;
    let pb = pres
        .eval_scalar_field(p, back)
        .ok_or_else(|| Error::Config(format!("pressure probe {back:?} is outside the mesh")))?;
    Ok(pf - pb)
}

/// Relative L2 (mass-weighted) error; falls back to the absolute norm for a
/// vanishing reference.
pub fn relative_error(m: &SparseMatrix, test: &[Real], reference: &[Real]) -> Real {
    let diff: Vec<Real> = test.iter().zip(reference).map(|(a, b)| a - b).collect();
    let dn = FemOperators::norm(m, &diff);
    let rn = FemOperators::norm(m, reference);
    if rn > 0.0 {
        dn / rn
    } else {
        dn
    }
}

/// Spectral stability diagnostic `h^{-1} sqrt(lambda_{r+1})`.
pub fn stability_diagnostic(h: Real, eigenvalues: &[Real], r: usize) -> Result<Real> {
    if r >= eigenvalues.len() {
        return Err(Error::Config(format!(
            "diagnostic needs r < d, got r = {r} with d = {}",
            eigenvalues.len()
        )));
    }
    Ok(eigenvalues[r].max(0.0).sqrt() / h)
}

/// Per-step benchmark quantities, with relative errors when a reference
/// trajectory was supplied.
#[derive(Debug, Clone, Default)]
pub struct QuantitySeries {
    pub times: Vec<Real>,
    pub c_d: Vec<Real>,
    pub c_l: Vec<Real>,
    pub e_kin: Vec<Real>,
    pub dp: Vec<Real>,
    pub relerr_u: Vec<Real>,
    pub relerr_p: Vec<Real>,
}

impl QuantitySeries {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn push(&mut self, t: Real, cd: Real, cl: Real, ekin: Real, dp: Real) {
        self.times.push(t);
        self.c_d.push(cd);
        self.c_l.push(cl);
        self.e_kin.push(ekin);
        self.dp.push(dp);
    }

    pub fn all_finite(&self) -> bool {
        self.times
            .iter()
            .chain(&self.c_d)
            .chain(&self.c_l)
            .chain(&self.e_kin)
            .chain(&self.dp)
            .all(|v| v.is_finite())
    }

    /// Run CSV (`t,c_D,c_L,E_kin,dp`), shared by the full- and reduced-order
    /// pipelines so outputs diff directly.
    pub fn to_run_csv(&self, provenance: &str) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "# {provenance}");
        let _ = writeln!(s, "t,c_D,c_L,E_kin,dp");
        for i in 0..self.len() {
            let _ = writeln!(
                s,
                "{},{},{},{},{}",
                self.times[i], self.c_d[i], self.c_l[i], self.e_kin[i], self.dp[i]
            );
        }
        s
    }

    /// Report CSV with relative-error columns (empty when absent).
    pub fn to_report_csv(&self, provenance: &str) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "# {provenance}");
        let _ = writeln!(s, "t,cD,cL,Ekin,dp,relerr_u,relerr_p");
        for i in 0..self.len() {
            let eu = self.relerr_u.get(i).map(|v| v.to_string()).unwrap_or_default();
            let ep = self.relerr_p.get(i).map(|v| v.to_string()).unwrap_or_default();
            let _ = writeln!(
                s,
                "{},{},{},{},{},{},{}",
                self.times[i], self.c_d[i], self.c_l[i], self.e_kin[i], self.dp[i], eu, ep
            );
        }
        s
    }

    /// Index range (inclusive) of the final full lift period, detected from
    /// the last two ascending zero crossings of `c_L`. Falls back to the
    /// trailing quarter of the series when fewer than two crossings exist.
    pub fn final_period(&self) -> (usize, usize) {
        let n = self.len();
        let mut crossings = Vec::new();
        for i in 1..n {
            if self.c_l[i - 1] < 0.0 && self.c_l[i] >= 0.0 {
                crossings.push(i);
            }
        }
        match crossings.len() {
            0 | 1 => (3 * n / 4, n.saturating_sub(1)),
            k => (crossings[k - 2], crossings[k - 1]),
        }
    }

    /// Maxima over the final period and the final pressure difference.
    pub fn summary(&self) -> QuantitySummary {
        let (lo, hi) = self.final_period();
        let max_in = |v: &[Real]| v[lo..=hi].iter().fold(Real::NEG_INFINITY, |m, x| m.max(*x));
        QuantitySummary {
            c_d_max: max_in(&self.c_d),
            c_l_max: max_in(&self.c_l),
            dp_final: *self.dp.last().unwrap_or(&Real::NAN),
            period: (self.times[lo], self.times[hi]),
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct QuantitySummary {
    pub c_d_max: Real,
    pub c_l_max: Real,
    pub dp_final: Real,
    pub period: (Real, Real),
}

impl QuantitySummary {
    pub fn render(&self, diagnostic: Option<Real>) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "final period: [{}, {}] s", self.period.0, self.period.1);
        let _ = writeln!(s, "c_d_max = {}", self.c_d_max);
        let _ = writeln!(s, "c_l_max = {}", self.c_l_max);
        let _ = writeln!(s, "dp(T)   = {}", self.dp_final);
        if let Some(d) = diagnostic {
            let _ = writeln!(s, "h^-1 sqrt(lambda_r+1) = {d}");
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assembly::{assemble_convection_scalar, assemble_mass_scalar};
    use crate::fespace::taylor_hood;
    use crate::mesh::{generate_channel_mesh, generate_rect_mesh};
    use std::sync::Arc;

    #[test]
    fn zero_state_gives_zero_coefficients() {
        let mesh = Arc::new(generate_channel_mesh(0.1, 16).unwrap());
        let (vel, pres) = taylor_hood(&mesh).unwrap();
        let quad = QuadratureRule::degree5();
        let ev = DragLiftEvaluator::new(&vel).unwrap();
        let u = vec![0.0; vel.n_dofs()];
        let p = vec![0.0; pres.n_dofs()];
        let (cd, cl) = ev.drag_lift(&vel, &pres, &u, &p, 1e-3, &quad);
        assert_eq!((cd, cl), (0.0, 0.0));
    }

    #[test]
    fn missing_cylinder_marker_is_an_error() {
        let mesh = Arc::new(generate_rect_mesh(1.0, 1.0, 0.5).unwrap());
        let (vel, _) = taylor_hood(&mesh).unwrap();
        assert!(DragLiftEvaluator::new(&vel).is_err());
    }

    #[test]
    fn quadrature_route_matches_operator_route() {
        let mesh = Arc::new(generate_channel_mesh(0.08, 32).unwrap());
        let (vel, pres) = taylor_hood(&mesh).unwrap();
        let ops = FemOperators::build(&vel, &pres);
        let nu = 0.05;
        // any smooth state works: both routes evaluate the same functional
        let u = vel.interpolate_vector(|p| [p[1] * (0.41 - p[1]), 0.3 * (p[0] - 0.2)]);
        let p = pres.interpolate_scalar(|p| p[0] * p[0] - p[1]);
        let ev = DragLiftEvaluator::new(&vel).unwrap();
        let (cd, cl) = ev.drag_lift(&vel, &pres, &u, &p, nu, &ops.quad);
        let conv = assemble_convection_scalar(&vel, &u, &ops.quad);
        let (vd, vl) = ev.test_fields(&vel);
        let cd_m = drag_lift_via_operators(&ops, &conv, &u, &p, nu, &vd);
        let cl_m = drag_lift_via_operators(&ops, &conv, &u, &p, nu, &vl);
        assert!((cd - cd_m).abs() < 1e-10 * (1.0 + cd.abs()), "{cd} vs {cd_m}");
        assert!((cl - cl_m).abs() < 1e-10 * (1.0 + cl.abs()), "{cl} vs {cl_m}");
    }

    #[test]
    fn kinetic_energy_of_unit_field_is_half_area() {
        let mesh = Arc::new(generate_rect_mesh(1.0, 1.0, 0.25).unwrap());
        let (vel, pres) = taylor_hood(&mesh).unwrap();
        let quad = QuadratureRule::degree5();
        let m_s = assemble_mass_scalar(&vel, &quad);
        let m_u = crate::assembly::expand_vector(&m_s, 2);
        let u = vel.interpolate_vector(|_| [1.0, 0.0]);
        let e = kinetic_energy(&u, &m_u);
        assert!((e - 0.5).abs() < 1e-12);
        assert_eq!(kinetic_energy(&vec![0.0; vel.n_dofs()], &m_u), 0.0);
        // direct quadrature oracle
        let mut direct = 0.0;
        for el in 0..mesh.n_triangles() {
            for (q, w) in quad.points.iter().zip(&quad.weights) {
                let e = vel.eval(el, *q);
                let (val, _) = eval_vector_field(&vel, &u, el, &e);
                direct += 0.5 * w * (val[0] * val[0] + val[1] * val[1]) * e.det_j;
            }
        }
        assert!((e - direct).abs() < 1e-10);
        let _ = pres;
    }

    #[test]
    fn pressure_difference_probes() {
        let mesh = Arc::new(generate_channel_mesh(0.08, 32).unwrap());
        let (_, pres) = taylor_hood(&mesh).unwrap();
        let constant = pres.interpolate_scalar(|_| 4.2);
        let d = pressure_diff(&pres, &constant, PRESSURE_FRONT, PRESSURE_BACK).unwrap();
        assert!(d.abs() < 1e-12);
        let linear = pres.interpolate_scalar(|p| p[0]);
        let d2 = pressure_diff(&pres, &linear, PRESSURE_FRONT, PRESSURE_BACK).unwrap();
        assert!((d2 + 0.1).abs() < 1e-12);
        assert!(pressure_diff(&pres, &linear, [9.0, 9.0], PRESSURE_BACK).is_err());
    }

    #[test]
    fn diagnostic_arithmetic_and_errors() {
        let eigs = [1.0, 1e-4, 0.0];
        assert!((stability_diagnostic(0.1, &eigs, 1).unwrap() - 0.1).abs() < 1e-15);
        assert_eq!(stability_diagnostic(0.1, &eigs, 2).unwrap(), 0.0);
        assert!(stability_diagnostic(0.1, &eigs, 3).is_err());
    }

    #[test]
    fn relative_error_basics() {
        let mesh = Arc::new(generate_rect_mesh(1.0, 1.0, 0.5).unwrap());
        let (_, pres) = taylor_hood(&mesh).unwrap();
        let quad = QuadratureRule::degree5();
        let m = assemble_mass_scalar(&pres, &quad);
        let r = pres.interpolate_scalar(|p| p[0] + 1.0);
        assert_eq!(relative_error(&m, &r, &r), 0.0);
        let double: Vec<f64> = r.iter().map(|v| 2.0 * v).collect();
        assert!((relative_error(&m, &double, &r) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn final_period_from_lift_zero_crossings() {
        let mut qs = QuantitySeries::new();
        for i in 0..1000 {
            let t = i as f64 * 0.01;
            qs.push(t, 3.0 + 0.1 * (2.0 * t).cos(), (2.0 * t).sin(), 1.0, 2.5);
        }
        let (lo, hi) = qs.final_period();
        let period = qs.times[hi] - qs.times[lo];
        assert!((period - std::f64::consts::PI).abs() < 0.02, "period {period}");
        let s = qs.summary();
        assert!((s.c_l_max - 1.0).abs() < 1e-3);
        assert!((s.c_d_max - 3.1).abs() < 2e-3);
    }

    #[test]
    fn csv_schemas() {
        let mut qs = QuantitySeries::new();
        qs.push(0.5, 3.0, 1.0, 0.4, 2.4);
        qs.relerr_u.push(0.01);
        qs.relerr_p.push(0.02);
        let run = qs.to_run_csv("config=abc version=0");
        assert!(run.starts_with("# config=abc version=0\nt,c_D,c_L,E_kin,dp\n"));
        let report = qs.to_report_csv("config=abc version=0");
        assert!(report.contains("t,cD,cL,Ekin,dp,relerr_u,relerr_p"));
        assert!(report.contains("0.5,3,1,0.4,2.4,0.01,0.02"));
    }
}
