use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use super::quasi::minus_norm;
use super::{indices_of_total, Symbol};
use crate::error::{Error, Result};
use crate::fock::MultiIndex;
use crate::quadrature::PhaseGrid;

/// Sampling region and acceptance margins for [`ellipticity_check`].
#[derive(Debug, Clone, PartialEq)]
pub struct EllipticityOptions {
    /// Only nodes with `‖ψ‖₋` above this are inspected.
    pub threshold: f64,
    /// `h_j` in `‖ψ‖₋² = Σ |ψ_j|²/(1 + h_j)`; empty means all zero.
    pub h_spectrum: Vec<f64>,
    /// Pass needs `min Re A / ‖ψ‖₋^σ ≥ lower_margin`.
    pub lower_margin: f64,
    /// Pass needs every derivative constant `≤ derivative_margin`.
    pub derivative_margin: f64,
}

impl Default for EllipticityOptions {
    fn default() -> Self {
        EllipticityOptions {
            threshold: 2.0,
            h_spectrum: Vec::new(),
            lower_margin: 1e-3,
            derivative_margin: 1e3,
        }
    }
}

/// Worst constants seen on the sampled nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct EllipticityReport {
    pub sigma: f64,
    pub nodes_checked: usize,
    /// `min Re A(ψ) / ‖ψ‖₋^σ`
    pub lower_constant: f64,
    /// `(k, l, max ‖∂*^k ∂^l A‖ ‖ψ‖₋^{k+l} / |A|)` for `1 ≤ k + l ≤ 2`.
    pub derivative_constants: Vec<(u32, u32, f64)>,
    pub passed: bool,
}

/// Samples both ellipticity conditions of order `sigma` on the grid nodes
/// outside the threshold ball. Derivative norms are Frobenius norms over
/// all ordered index tuples.
pub fn ellipticity_check(
    symbol: &dyn Symbol,
    grid: &PhaseGrid,
    sigma: f64,
    options: &EllipticityOptions,
) -> Result<EllipticityReport> {
    let d = symbol.modes();
    if grid.modes() != d {
        return Err(Error::ModeCountMismatch {
            expected: d,
            found: grid.modes(),
        });
    }
    if !(sigma > 0.0 && sigma <= symbol.order()) {
        return Err(Error::InvalidConfig(format!(
            "ellipticity order {sigma} must lie in (0, {}]",
            symbol.order()
        )));
    }
    let h = if options.h_spectrum.is_empty() {
        vec![0.0; d]
    } else if options.h_spectrum.len() == d {
        options.h_spectrum.clone()
    } else {
        return Err(Error::ModeCountMismatch {
            expected: d,
            found: options.h_spectrum.len(),
        });
    };

    // ordered-tuple multiplicity k!/κ! for each multi-index
    let blocks: Vec<(u32, u32, Vec<Entry>)> = [(1u32, 0u32), (0, 1), (2, 0), (1, 1), (0, 2)]
        .into_iter()
        .map(|(k, l)| {
            let mut entries = Vec::new();
            for kap in indices_of_total(d, k as usize) {
                for lam in indices_of_total(d, l as usize) {
                    let mult = tuple_count(&kap) * tuple_count(&lam);
                    entries.push((kap.clone(), lam, mult));
                }
            }
            (k, l, entries)
        })
        .collect();

    let mut lower = f64::INFINITY;
    let mut worst = vec![0.0f64; blocks.len()];
    let mut checked = 0;
    let mut xi = vec![Complex64::new(0.0, 0.0); d];
    for i in 0..grid.len() {
        grid.node_into(i, &mut xi);
        let r = minus_norm(&xi, &h);
        if r <= options.threshold {
            continue;
        }
        checked += 1;
        let a = symbol.eval(&xi);
        lower = lower.min(a.re / r.powf(sigma));
        for (b, (k, l, entries)) in blocks.iter().enumerate() {
            let mut sq = 0.0;
            for (kap, lam, mult) in entries {
                let v = symbol
                    .derivative(&xi, kap.as_slice(), lam.as_slice())
                    .ok_or(Error::MissingDerivative {
                        order: (k + l) as usize,
                    })?;
                sq += mult * v.norm_sqr();
            }
            let c = sq.sqrt() * r.powi((k + l) as i32) / a.norm();
            worst[b] = worst[b].max(if c.is_nan() { f64::INFINITY } else { c });
        }
    }
    if checked == 0 {
        return Err(Error::InvalidConfig(format!(
            "no grid node lies outside the threshold {}",
            options.threshold
        )));
    }
    let derivative_constants: Vec<(u32, u32, f64)> =
        blocks.iter().zip(&worst).map(|((k, l, _), &c)| (*k, *l, c)).collect();
    let passed = lower >= options.lower_margin
        && derivative_constants
            .iter()
            .all(|&(_, _, c)| c <= options.derivative_margin);
    Ok(EllipticityReport {
        sigma,
        nodes_checked: checked,
        lower_constant: lower,
        derivative_constants,
        passed,
    })
}

type Entry = (MultiIndex, MultiIndex, f64);

fn tuple_count(m: &MultiIndex) -> f64 {
    let total: f64 = (1..=m.total() as u32).map(f64::from).product();
    total / m.factorial()
}
