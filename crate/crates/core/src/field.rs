//! Nodal solution storage and the per-element viscosity field.

use crate::real::Real;

/// Per-element, per-variable nodal coefficients.
///
/// Layout is `[element][variable][node]` with the node index fastest, so the
/// derivative kernels work on contiguous slices.
#[derive(Debug, Clone, PartialEq)]
pub struct NodalField<R> {
    pub n_elems: usize,
    pub n_vars: usize,
    pub nodes_per_elem: usize,
    pub data: Vec<R>,
}

impl<R: Real> NodalField<R> {
    pub fn zeros(n_elems: usize, n_vars: usize, nodes_per_elem: usize) -> Self {
        NodalField {
            n_elems,
            n_vars,
            nodes_per_elem,
            data: vec![R::zero(); n_elems * n_vars * nodes_per_elem],
        }
    }

    #[inline]
    pub fn idx(&self, e: usize, k: usize, i: usize) -> usize {
        (e * self.n_vars + k) * self.nodes_per_elem + i
    }

    #[inline]
    pub fn at(&self, e: usize, k: usize, i: usize) -> R {
        self.data[self.idx(e, k, i)]
    }

    #[inline]
    pub fn set(&mut self, e: usize, k: usize, i: usize, v: R) {
        let idx = self.idx(e, k, i);
        self.data[idx] = v;
    }

    #[inline]
    pub fn elem_var(&self, e: usize, k: usize) -> &[R] {
        let start = (e * self.n_vars + k) * self.nodes_per_elem;
        &self.data[start..start + self.nodes_per_elem]
    }

    #[inline]
    pub fn elem_var_mut(&mut self, e: usize, k: usize) -> &mut [R] {
        let start = (e * self.n_vars + k) * self.nodes_per_elem;
        &mut self.data[start..start + self.nodes_per_elem]
    }

    /// Gather the state vector at one node.
    #[inline]
    pub fn state_at(&self, e: usize, i: usize, out: &mut [R]) {
        for k in 0..self.n_vars {
            out[k] = self.at(e, k, i);
        }
    }

    /// `self = a + scale * b`, shape-checked.
    pub fn assign_axpy(&mut self, a: &Self, scale: R, b: &Self) {
        debug_assert_eq!(a.data.len(), self.data.len());
        debug_assert_eq!(b.data.len(), self.data.len());
        for ((dst, &x), &y) in self.data.iter_mut().zip(&a.data).zip(&b.data) {
            *dst = x + scale * y;
        }
    }

    /// `self += scale * other`.
    pub fn axpy(&mut self, scale: R, other: &Self) {
        debug_assert_eq!(other.data.len(), self.data.len());
        for (dst, &y) in self.data.iter_mut().zip(&other.data) {
            *dst += scale * y;
        }
    }

    pub fn min_max_var(&self, k: usize) -> (R, R) {
        let mut lo = R::infinity();
        let mut hi = R::neg_infinity();
        for e in 0..self.n_elems {
            for &v in self.elem_var(e, k) {
                if v < lo {
                    lo = v;
                }
                if v > hi {
                    hi = v;
                }
            }
        }
        (lo, hi)
    }

    pub fn linf_var(&self, k: usize) -> R {
        let (lo, hi) = self.min_max_var(k);
        lo.abs().max(hi.abs())
    }

    pub fn has_nan(&self) -> bool {
        self.data.iter().any(|v| !v.is_finite())
    }
}

/// Element-wise constant, per-variable artificial viscosity, with the
/// parameters it was produced from.
#[derive(Debug, Clone)]
pub struct ViscosityField<R> {
    pub n_elems: usize,
    pub n_vars: usize,
    /// `mu[e * n_vars + k]`, nonnegative and capped at `mu_max`.
    pub mu: Vec<R>,
    pub c_mu: R,
    /// Sub-step size the defect was evaluated with.
    pub dt: R,
    /// Per-variable normalization (global range, floored).
    pub delta_u: Vec<R>,
    pub mu_max: R,
}

impl<R: Real> ViscosityField<R> {
    pub fn zeros(n_elems: usize, n_vars: usize) -> Self {
        ViscosityField {
            n_elems,
            n_vars,
            mu: vec![R::zero(); n_elems * n_vars],
            c_mu: R::zero(),
            dt: R::zero(),
            delta_u: vec![R::zero(); n_vars],
            mu_max: R::zero(),
        }
    }

    #[inline]
    pub fn at(&self, e: usize, k: usize) -> R {
        self.mu[e * self.n_vars + k]
    }

    /// Largest viscosity over variables in one element.
    pub fn elem_max(&self, e: usize) -> R {
        let mut m = R::zero();
        for k in 0..self.n_vars {
            m = m.max(self.at(e, k));
        }
        m
    }

    /// Largest viscosity of variable `k` over the mesh.
    pub fn max_var(&self, k: usize) -> R {
        let mut m = R::zero();
        for e in 0..self.n_elems {
            m = m.max(self.at(e, k));
        }
        m
    }

    pub fn is_zero(&self) -> bool {
        self.mu.iter().all(|&m| m == R::zero())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn indexing_layout() {
        let mut f = NodalField::<f64>::zeros(2, 3, 4);
        f.set(1, 2, 3, 7.0);
        assert_eq!(f.data[(1 * 3 + 2) * 4 + 3], 7.0);
        assert_eq!(f.elem_var(1, 2)[3], 7.0);
    }

    #[test]
    fn axpy_combines() {
        let mut a = NodalField::<f64>::zeros(1, 1, 2);
        a.data = vec![1.0, 2.0];
        let mut b = NodalField::<f64>::zeros(1, 1, 2);
        b.data = vec![10.0, 20.0];
        let mut out = NodalField::<f64>::zeros(1, 1, 2);
        out.assign_axpy(&a, 0.5, &b);
        assert_eq!(out.data, vec![6.0, 12.0]);
        out.axpy(1.0, &a);
        assert_eq!(out.data, vec![7.0, 14.0]);
    }

    #[test]
    fn viscosity_maxima() {
        let mut v = ViscosityField::<f64>::zeros(2, 2);
        v.mu = vec![0.1, 0.4, 0.2, 0.3];
        assert_eq!(v.elem_max(0), 0.4);
        assert_eq!(v.max_var(0), 0.2);
        assert_eq!(v.max_var(1), 0.4);
    }
}
