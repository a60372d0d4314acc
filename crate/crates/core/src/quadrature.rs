//! Quadrature on the reference triangle.

use crate::Real;

/// Symmetric quadrature rule in barycentric coordinates. Weights sum to the
/// reference-triangle area 1/2: `int_T f = sum_q w_q f(x_q) * |det J|` with
/// `|det J| = 2 * area(T)`.
#[derive(Debug, Clone)]
pub struct QuadratureRule {
    pub points: Vec<[Real; 3]>,
    pub weights: Vec<Real>,
    pub degree: usize,
}

impl QuadratureRule {
    /// Seven-point degree-5 rule (Radon). Exact for all convection
    /// integrands of the P2/P1 pair up to geometry error.
    pub fn degree5() -> Self {
        let s15 = (15.0 as Real).sqrt();
        let a = (6.0 + s15) / 21.0;
        let b = (6.0 - s15) / 21.0;
        let wa = (155.0 + s15) / 1200.0;
        let wb = (155.0 - s15) / 1200.0;
        let mut points = vec![[1.0 / 3.0; 3]];
        let mut weights = vec![9.0 / 40.0];
        for perm in sym3(a) {
            points.push(perm);
            weights.push(wa);
        }
        for perm in sym3(b) {
            points.push(perm);
            weights.push(wb);
        }
        for w in &mut weights {
            *w *= 0.5;
        }
        QuadratureRule { points, weights, degree: 5 }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// The three cyclic points `(a, a, 1-2a)` of a symmetric orbit.
fn sym3(a: Real) -> [[Real; 3]; 3] {
    let c = 1.0 - 2.0 * a;
    [[c, a, a], [a, c, a], [a, a, c]]
}
