use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use super::{PolySymbol, Symbol};
use crate::quadrature::PhaseGrid;

type Evaluator = Arc<dyn Fn(&[Complex64]) -> Complex64 + Send + Sync>;
type DerivativeEvaluator = Arc<dyn Fn(&[Complex64], &[u32], &[u32]) -> Option<Complex64> + Send + Sync>;

/// Highest total derivative order a quasi symbol provides.
pub const MAX_DERIVATIVE_ORDER: u32 = 2;

/// Black-box symbol with declared growth order `ρ` and optional closed-form
/// derivatives up to order 2. Missing derivatives fall back to central
/// differences.
#[derive(Clone)]
pub struct QuasiSymbol {
    modes: usize,
    order: f64,
    eval: Evaluator,
    derivatives: Option<DerivativeEvaluator>,
    label: String,
}

impl fmt::Debug for QuasiSymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("QuasiSymbol")
            .field("modes", &self.modes)
            .field("order", &self.order)
            .field("label", &self.label)
            .field("closed_form_derivatives", &self.derivatives.is_some())
            .finish()
    }
}

impl QuasiSymbol {
    pub fn new(modes: usize, order: f64, eval: impl Fn(&[Complex64]) -> Complex64 + Send + Sync + 'static) -> Self {
        assert!(modes >= 1, "a symbol needs at least one mode");
        QuasiSymbol {
            modes,
            order,
            eval: Arc::new(eval),
            derivatives: None,
            label: String::new(),
        }
    }

    /// Closed-form `∂*^k ∂^l A`; returning `None` for some orders falls back
    /// to finite differences there.
    pub fn with_derivatives(
        mut self,
        d: impl Fn(&[Complex64], &[u32], &[u32]) -> Option<Complex64> + Send + Sync + 'static,
    ) -> Self {
        self.derivatives = Some(Arc::new(d));
        self
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn has_closed_form_derivatives(&self) -> bool {
        self.derivatives.is_some()
    }

    /// Wraps a polynomial, carrying its exact derivatives up to order 2.
    pub fn from_poly(poly: PolySymbol) -> Self {
        let p = Arc::new(poly);
        let p2 = p.clone();
        QuasiSymbol::new(p.modes(), p.degree() as f64, move |x| p.eval(x))
            .with_derivatives(move |x, k, l| Some(p2.derivative_at(x, k, l)))
            .with_label("polynomial")
    }

    /// Largest `|A| / (1 + ‖ψ‖₋)^ρ` over the grid nodes, with
    /// `‖ψ‖₋² = Σ |ψ_j|² / (1 + h_j)`.
    pub fn growth_constant(&self, grid: &PhaseGrid, h_spectrum: &[f64]) -> f64 {
        let mut worst: f64 = 0.0;
        let mut xi = alloc::vec![Complex64::new(0.0, 0.0); self.modes];
        for i in 0..grid.len() {
            grid.node_into(i, &mut xi);
            let minus = minus_norm(&xi, h_spectrum);
            worst = worst.max((self.eval)(&xi).norm() / (1.0 + minus).powf(self.order));
        }
        worst
    }
}

pub(crate) fn minus_norm(psi: &[Complex64], h_spectrum: &[f64]) -> f64 {
    psi.iter()
        .zip(h_spectrum)
        .map(|(z, h)| z.norm_sqr() / (1.0 + h))
        .sum::<f64>()
        .sqrt()
}

impl Symbol for QuasiSymbol {
    fn modes(&self) -> usize {
        self.modes
    }

    fn eval(&self, psi: &[Complex64]) -> Complex64 {
        (self.eval)(psi)
    }

    fn derivative(&self, psi: &[Complex64], conj: &[u32], holo: &[u32]) -> Option<Complex64> {
        let total: u32 = conj.iter().chain(holo).sum();
        if total == 0 {
            return Some((self.eval)(psi));
        }
        if total > MAX_DERIVATIVE_ORDER {
            return None;
        }
        if let Some(d) = &self.derivatives {
            if let Some(v) = d(psi, conj, holo) {
                return Some(v);
            }
        }
        let scale = 1.0 + psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let step = if total == 1 { 1e-5 } else { 1e-4 } * scale;
        Some(finite_difference(&*self.eval, psi, conj, holo, step))
    }

    fn order(&self) -> f64 {
        self.order
    }
}

/// Wirtinger derivative `∂*^conj ∂^holo f` by nested central differences:
/// `∂_ψ = (∂_x − i∂_y)/2`, `∂_{ψ*} = (∂_x + i∂_y)/2`.
pub fn finite_difference(
    f: &dyn Fn(&[Complex64]) -> Complex64,
    psi: &[Complex64],
    conj: &[u32],
    holo: &[u32],
    step: f64,
) -> Complex64 {
    let d = psi.len();
    let pick = (0..d)
        .find(|&j| conj[j] > 0)
        .map(|j| (j, true))
        .or_else(|| (0..d).find(|&j| holo[j] > 0).map(|j| (j, false)));
    let Some((j, is_conj)) = pick else {
        return f(psi);
    };
    let mut conj2: Vec<u32> = conj.to_vec();
    let mut holo2: Vec<u32> = holo.to_vec();
    if is_conj {
        conj2[j] -= 1;
    } else {
        holo2[j] -= 1;
    }
    let inner = |x: &[Complex64]| finite_difference(f, x, &conj2, &holo2, step);
    let shifted = |delta: Complex64| {
        let mut x = psi.to_vec();
        x[j] += delta;
        inner(&x)
    };
    let h = Complex64::new(step, 0.0);
    let ih = Complex64::new(0.0, step);
    let dx = (shifted(h) - shifted(-h)) / (2.0 * step);
    let dy = (shifted(ih) - shifted(-ih)) / (2.0 * step);
    let i = Complex64::new(0.0, 1.0);
    if is_conj {
        (dx + i * dy) * 0.5
    } else {
        (dx - i * dy) * 0.5
    }
}
