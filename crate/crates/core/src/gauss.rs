//! One-dimensional Gaussian rules built from their Jacobi matrices.
//!
//! Nodes come from the symmetric tridiagonal eigenproblem and are polished by
//! Newton steps on the three-term recurrence; weights use the Christoffel sum
//! `w = 1 / Σ p_j(x)^2` over the orthonormal polynomials, evaluated with
//! running rescaling so that far Laguerre nodes underflow to zero weight
//! instead of overflowing.

use alloc::vec::Vec;
use nalgebra::DMatrix;
#[allow(unused_imports)]
use num_traits::Float;

/// Nodes and weights of a one-dimensional rule, nodes ascending.
#[derive(Debug, Clone, PartialEq)]
pub struct Rule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl Rule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate(&self, mut f: impl FnMut(f64) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&x, &w)| w * f(x)).sum()
    }
}

const RESCALE: f64 = 1e100;
const LN_RESCALE: f64 = 230.258_509_299_404_56; // ln(1e100)

/// Orthonormal recurrence `b_{j+1} p_{j+1} = (x - a_j) p_j - b_j p_{j-1}`.
struct Jacobi<'a> {
    diag: &'a [f64],
    /// `off[j]` couples `p_j` and `p_{j+1}`.
    off: &'a [f64],
    mu0: f64,
}

impl Jacobi<'_> {
    /// Returns (q_K, q_K') up to a common positive factor, where q_K vanishes
    /// exactly at the nodes.
    fn top(&self, x: f64) -> (f64, f64) {
        let k = self.diag.len();
        let mut p_prev = 0.0;
        let mut d_prev = 0.0;
        let mut p = 1.0 / self.mu0.sqrt();
        let mut d = 0.0;
        for j in 0..k {
            let b_prev = if j == 0 { 0.0 } else { self.off[j - 1] };
            let q = (x - self.diag[j]) * p - b_prev * p_prev;
            let dq = p + (x - self.diag[j]) * d - b_prev * d_prev;
            // keep the last step unnormalised; it only fixes the root set
            let norm = if j + 1 < k { self.off[j] } else { 1.0 };
            p_prev = p;
            d_prev = d;
            p = q / norm;
            d = dq / norm;
            if p.abs() > RESCALE {
                p /= RESCALE;
                d /= RESCALE;
                p_prev /= RESCALE;
                d_prev /= RESCALE;
            }
        }
        (p, d)
    }

    /// Christoffel weight `1 / Σ_{j<K} p_j(x)^2`.
    fn weight(&self, x: f64) -> f64 {
        let k = self.diag.len();
        let mut p_prev = 0.0;
        let mut p = 1.0 / self.mu0.sqrt();
        let mut sum = p * p;
        let mut rescales = 0u32;
        for j in 0..k - 1 {
            let b_prev = if j == 0 { 0.0 } else { self.off[j - 1] };
            let q = ((x - self.diag[j]) * p - b_prev * p_prev) / self.off[j];
            p_prev = p;
            p = q;
            sum += p * p;
            if p.abs() > RESCALE {
                p /= RESCALE;
                p_prev /= RESCALE;
                sum /= RESCALE * RESCALE;
                rescales += 1;
            }
        }
        (-(2.0 * rescales as f64) * LN_RESCALE - sum.ln()).exp()
    }
}

fn from_jacobi(diag: &[f64], off: &[f64], mu0: f64) -> Rule {
    let k = diag.len();
    let mut jm = DMatrix::<f64>::zeros(k, k);
    for i in 0..k {
        jm[(i, i)] = diag[i];
        if i + 1 < k {
            jm[(i, i + 1)] = off[i];
            jm[(i + 1, i)] = off[i];
        }
    }
    let mut nodes: Vec<f64> = jm.symmetric_eigenvalues().iter().copied().collect();
    nodes.sort_by(|a, b| a.total_cmp(b));

    let jac = Jacobi { diag, off, mu0 };
    for x in nodes.iter_mut() {
        for _ in 0..3 {
            let (q, dq) = jac.top(*x);
            if dq == 0.0 || !dq.is_finite() {
                break;
            }
            let step = q / dq;
            if !step.is_finite() {
                break;
            }
            *x -= step;
            if step.abs() <= 4.0 * f64::EPSILON * x.abs().max(1e-300) {
                break;
            }
        }
    }
    let weights = nodes.iter().map(|&x| jac.weight(x)).collect();
    Rule { nodes, weights }
}

/// Gauss-Laguerre rule for `∫_0^∞ e^{-x} f(x) dx`; total weight 1.
pub fn laguerre(k: usize) -> Rule {
    assert!(k >= 1, "rule needs at least one node");
    let diag: Vec<f64> = (0..k).map(|j| 2.0 * j as f64 + 1.0).collect();
    let off: Vec<f64> = (1..k).map(|j| j as f64).collect();
    from_jacobi(&diag, &off, 1.0)
}

/// Gauss-Hermite rule for `∫ e^{-x^2} f(x) dx`; total weight √π.
pub fn hermite(k: usize) -> Rule {
    assert!(k >= 1, "rule needs at least one node");
    let diag = alloc::vec![0.0; k];
    let off: Vec<f64> = (1..k).map(|j| (j as f64 / 2.0).sqrt()).collect();
    from_jacobi(&diag, &off, core::f64::consts::PI.sqrt())
}

/// Gauss-Legendre rule on `[-1, 1]`; total weight 2.
pub fn legendre(k: usize) -> Rule {
    assert!(k >= 1, "rule needs at least one node");
    let diag = alloc::vec![0.0; k];
    let off: Vec<f64> = (1..k)
        .map(|j| {
            let j = j as f64;
            j / (4.0 * j * j - 1.0).sqrt()
        })
        .collect();
    from_jacobi(&diag, &off, 2.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn factorial(n: u32) -> f64 {
        (1..=n).map(f64::from).product()
    }

    #[test]
    fn laguerre_moments_exact_to_degree_2k_minus_1() {
        for k in [1usize, 2, 5, 10, 24] {
            let rule = laguerre(k);
            assert!((rule.weights.iter().sum::<f64>() - 1.0).abs() < 1e-14);
            for p in 0..(2 * k as u32) {
                let got = rule.integrate(|x| x.powi(p as i32));
                let want = factorial(p);
                assert!(((got - want) / want).abs() < 1e-12, "k={k} p={p}: {got} vs {want}");
            }
        }
    }

    #[test]
    fn large_laguerre_rule_stays_finite() {
        let rule = laguerre(200);
        assert!(rule.weights.iter().all(|w| w.is_finite() && *w >= 0.0));
        assert!((rule.weights.iter().sum::<f64>() - 1.0).abs() < 1e-13);
        let m20 = rule.integrate(|x| x.powi(20)) / factorial(20);
        assert!((m20 - 1.0).abs() < 1e-11);
    }

    #[test]
    fn hermite_and_legendre_moments() {
        let h = hermite(12);
        let sqrt_pi = core::f64::consts::PI.sqrt();
        assert!((h.integrate(|_| 1.0) - sqrt_pi).abs() < 1e-14);
        // ∫ x^4 e^{-x^2} = 3√π/4
        assert!((h.integrate(|x| x.powi(4)) - 0.75 * sqrt_pi).abs() < 1e-13);
        assert!(h.integrate(|x| x.powi(5)).abs() < 1e-13);

        let l = legendre(9);
        assert!((l.integrate(|_| 1.0) - 2.0).abs() < 1e-14);
        assert!((l.integrate(|x| x.powi(16)) - 2.0 / 17.0).abs() < 1e-14);
    }
}
