//! Nodal polynomial machinery on the reference interval [-1, 1].
//!
//! An [`OperatorSet`] bundles everything the spatial kernels need for a given
//! order `p`: Gauss-Legendre solution points and weights, the nodal
//! differentiation matrix, interpolation vectors to the interval endpoints,
//! and the endpoint correction-function derivatives that recover the nodal
//! discontinuous Galerkin scheme. 2D operators are applied dimension by
//! dimension from these same 1D tables.

use crate::error::{Result, SolverError};
use crate::real::Real;

/// Legendre polynomial value and first derivative at `x`.
pub fn legendre_with_deriv<R: Real>(n: usize, x: R) -> (R, R) {
    let mut p_prev = R::one();
    let mut d_prev = R::zero();
    if n == 0 {
        return (p_prev, d_prev);
    }
    let mut p = x;
    let mut d = R::one();
    for k in 1..n {
        let kf = R::from_usize_exact(k);
        let a = (R::of(2.0) * kf + R::one()) / (kf + R::one());
        let b = kf / (kf + R::one());
        let p_next = a * x * p - b * p_prev;
        let d_next = d_prev + (R::of(2.0) * kf + R::one()) * p;
        p_prev = p;
        d_prev = d;
        p = p_next;
        d = d_next;
    }
    (p, d)
}

/// Roots of the Legendre polynomial of degree `n` with Gauss weights,
/// ascending. Exact for integrands of degree <= 2n - 1.
pub fn gauss_legendre<R: Real>(n: usize) -> (Vec<R>, Vec<R>) {
    assert!(n >= 1, "need at least one quadrature point");
    let mut points = vec![R::zero(); n];
    let mut weights = vec![R::zero(); n];
    let half = (n + 1) / 2;
    for i in 0..half {
        // Chebyshev-like initial guess, then Newton on P_n.
        let theta = std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5);
        let mut x = R::of(theta.cos());
        for _ in 0..100 {
            let (p, d) = legendre_with_deriv(n, x);
            let dx = p / d;
            x = x - dx;
            if dx.abs() <= R::epsilon() * R::of(2.0) {
                break;
            }
        }
        let (_, d) = legendre_with_deriv(n, x);
        let w = R::of(2.0) / ((R::one() - x * x) * d * d);
        points[i] = -x;
        weights[i] = w;
        points[n - 1 - i] = x;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        points[n / 2] = R::zero();
        let (_, d) = legendre_with_deriv(n, R::zero());
        weights[n / 2] = R::of(2.0) / (d * d);
    }
    (points, weights)
}

/// Barycentric weights for a node set.
fn barycentric_weights<R: Real>(points: &[R]) -> Vec<R> {
    let n = points.len();
    let mut w = vec![R::one(); n];
    for j in 0..n {
        for k in 0..n {
            if k != j {
                w[j] = w[j] / (points[j] - points[k]);
            }
        }
    }
    w
}

/// Nodal operator tables for order `p` on [-1, 1].
#[derive(Debug, Clone)]
pub struct OperatorSet<R> {
    /// Polynomial order of the approximation.
    pub p: usize,
    /// Nodes per direction, `p + 1`.
    pub n: usize,
    /// Gauss-Legendre solution points.
    pub points: Vec<R>,
    /// Quadrature weights (sum to 2).
    pub weights: Vec<R>,
    /// Differentiation matrix, row-major: `diff[i * n + j] = l_j'(x_i)`.
    pub diff: Vec<R>,
    /// Basis values at -1: `interp_left[j] = l_j(-1)`.
    pub interp_left: Vec<R>,
    /// Basis values at +1.
    pub interp_right: Vec<R>,
    /// Left DG correction-function derivative at the solution points.
    pub dg_left: Vec<R>,
    /// Right DG correction-function derivative at the solution points.
    pub dg_right: Vec<R>,
    bary: Vec<R>,
}

impl<R: Real> OperatorSet<R> {
    /// Build the operator tables for order `p >= 0`.
    pub fn new(p: usize) -> Self {
        let n = p + 1;
        let (points, weights) = gauss_legendre::<R>(n);
        let bary = barycentric_weights(&points);

        let mut diff = vec![R::zero(); n * n];
        for i in 0..n {
            let mut row_sum = R::zero();
            for j in 0..n {
                if i != j {
                    let d = bary[j] / (bary[i] * (points[i] - points[j]));
                    diff[i * n + j] = d;
                    row_sum += d;
                }
            }
            diff[i * n + i] = -row_sum;
        }

        let interp_left = interp_vector(&points, &bary, -R::one());
        let interp_right = interp_vector(&points, &bary, R::one());

        // Correction functions recovering nodal DG: the left one is
        // (-1)^p (L_p - L_{p+1}) / 2, the right one (L_p + L_{p+1}) / 2.
        let sign = if p % 2 == 0 { R::one() } else { -R::one() };
        let half = R::of(0.5);
        let mut dg_left = vec![R::zero(); n];
        let mut dg_right = vec![R::zero(); n];
        for i in 0..n {
            let (_, dp) = legendre_with_deriv(p, points[i]);
            let (_, dp1) = legendre_with_deriv(p + 1, points[i]);
            dg_left[i] = sign * half * (dp - dp1);
            dg_right[i] = half * (dp + dp1);
        }

        OperatorSet {
            p,
            n,
            points,
            weights,
            diff,
            interp_left,
            interp_right,
            dg_left,
            dg_right,
            bary,
        }
    }

    /// Value of the degree-`p` interpolant of `values` at `x`.
    pub fn eval_at(&self, values: &[R], x: R) -> R {
        assert_eq!(values.len(), self.n);
        let v = interp_vector(&self.points, &self.bary, x);
        dot(&v, values)
    }

    /// Traces of an element's nodal values at the two interval endpoints.
    pub fn interp_to_faces(&self, values: &[R]) -> Result<(R, R)> {
        if values.len() != self.n {
            return Err(SolverError::InvalidInput(format!(
                "expected {} nodal values, got {}",
                self.n,
                values.len()
            )));
        }
        Ok((dot(&self.interp_left, values), dot(&self.interp_right, values)))
    }

    /// Left/right correction-function values at `x`, for verification.
    pub fn correction_value(&self, x: R) -> (R, R) {
        let (lp, _) = legendre_with_deriv(self.p, x);
        let (lp1, _) = legendre_with_deriv(self.p + 1, x);
        let sign = if self.p % 2 == 0 { R::one() } else { -R::one() };
        let half = R::of(0.5);
        (sign * half * (lp - lp1), half * (lp + lp1))
    }

    /// Nodal derivative `sum_j D[i][j] values[j]` at node `i`.
    pub fn deriv_at_node(&self, values: &[R], i: usize) -> R {
        dot(&self.diff[i * self.n..(i + 1) * self.n], values)
    }
}

fn interp_vector<R: Real>(points: &[R], bary: &[R], x: R) -> Vec<R> {
    let n = points.len();
    for (j, &xj) in points.iter().enumerate() {
        if x == xj {
            let mut v = vec![R::zero(); n];
            v[j] = R::one();
            return v;
        }
    }
    let mut v = vec![R::zero(); n];
    let mut denom = R::zero();
    for j in 0..n {
        let t = bary[j] / (x - points[j]);
        v[j] = t;
        denom += t;
    }
    for t in v.iter_mut() {
        *t = *t / denom;
    }
    v
}

fn dot<R: Real>(a: &[R], b: &[R]) -> R {
    let mut s = R::zero();
    for (x, y) in a.iter().zip(b.iter()) {
        s += *x * *y;
    }
    s
}
