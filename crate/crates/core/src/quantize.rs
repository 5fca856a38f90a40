//! Antiwick quantization `A ↦ Q(A)` and the coherent-state readouts of an
//! operator.
//!
//! `Q(ψ*^k ψ^l) = a^l a†^k`: annihilators on the left. For polynomials the
//! matrix is built from ladder products directly; anything else goes through
//! the phase-space integral
//!
//! `⟨m|Q(A)|n⟩ = ∫ e^{-ξ*ξ} A(ξ*, ξ) ξ^m ξ̄^n / √(m! n!) dμ(ξ)`.

use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use nalgebra::DMatrix;
use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::fock::{spectral_norm, CoherentAmplitude, FockBasis, FockOperator};
use crate::quadrature::{assemble, PhaseGrid, QuadratureSpec};
use crate::symbols::{PolySymbol, Symbol};

/// Largest `max |Q(1) − I|` the quadrature self-check accepts.
pub const IDENTITY_TOLERANCE: f64 = 1e-10;

/// Relative size of `Im A` below which a symbol counts as real on the grid.
const REAL_ON_GRID: f64 = 1e-12;

/// Exact `Q(A)` for a polynomial symbol on the padded basis.
///
/// Every entry is the exact matrix element of the untruncated operator.
/// Terms of total degree above the pad are refused because their products
/// would reach past the padded edge from the reported block.
pub fn quantize_poly(symbol: &PolySymbol, basis: &Arc<FockBasis>) -> Result<FockOperator> {
    let d = basis.modes();
    if symbol.modes() != d {
        return Err(Error::ModeCountMismatch {
            expected: d,
            found: symbol.modes(),
        });
    }
    let pad = basis.config().pad;
    if symbol.degree() > pad {
        return Err(Error::DegreeExceedsPad {
            degree: symbol.degree(),
            pad,
        });
    }
    let dim = basis.dim();
    let mut matrix = DMatrix::<Complex64>::zeros(dim, dim);
    let mut target = vec![0u32; d];
    for (k, l, c) in symbol.terms() {
        'columns: for (col, n) in basis.indices().iter().enumerate() {
            let mut value = c;
            for j in 0..d {
                let (nj, kj, lj) = (n.get(j), k.get(j), l.get(j));
                let top = nj + kj;
                if top < lj {
                    continue 'columns;
                }
                let mj = top - lj;
                target[j] = mj;
                // √((n+k)!/n!) √((n+k)!/m!), integer part kept exact
                let (lo, hi) = (nj.min(mj), nj.max(mj));
                let whole: f64 = ((hi + 1)..=top).map(f64::from).product();
                let root: f64 = ((lo + 1)..=hi).map(f64::from).product();
                value *= whole * root.sqrt();
            }
            if let Some(row) = basis.position(&crate::fock::MultiIndex::new(target.clone())) {
                matrix[(row, col)] += value;
            }
        }
    }
    if symbol.is_real() {
        Ok(FockOperator::hermitized(matrix, basis.clone()))
    } else {
        Ok(FockOperator::new(matrix, basis.clone()))
    }
}

/// Quadrature quantizer bound to one grid and basis. Construction runs the
/// `A = 1` self-check once.
#[derive(Debug, Clone)]
pub struct Quantizer<'g> {
    grid: &'g PhaseGrid,
    basis: Arc<FockBasis>,
    identity_defect: f64,
}

impl<'g> Quantizer<'g> {
    pub fn new(grid: &'g PhaseGrid, basis: &Arc<FockBasis>) -> Result<Self> {
        let one = assemble(grid, basis, |_| Complex64::new(1.0, 0.0))?;
        let dim = basis.dim();
        let mut defect: f64 = 0.0;
        for i in 0..dim {
            for j in 0..dim {
                let want = if i == j { 1.0 } else { 0.0 };
                defect = defect.max((one[(i, j)] - want).norm());
            }
        }
        if !(defect < IDENTITY_TOLERANCE) {
            let (required_radial, required_angular) = QuadratureSpec::required_for(basis.config().capacity());
            return Err(Error::QuadratureInsufficient {
                defect,
                required_radial,
                required_angular,
            });
        }
        Ok(Quantizer {
            grid,
            basis: basis.clone(),
            identity_defect: defect,
        })
    }

    /// `max |Q(1) − I|` over the padded basis.
    pub fn identity_defect(&self) -> f64 {
        self.identity_defect
    }

    pub fn basis(&self) -> &Arc<FockBasis> {
        &self.basis
    }

    pub fn grid(&self) -> &PhaseGrid {
        self.grid
    }

    /// `Q(A)` by quadrature. The result is flagged Hermitian when `A` is
    /// real at every node.
    pub fn quantize<S: Symbol + ?Sized>(&self, symbol: &S) -> Result<FockOperator> {
        if symbol.modes() != self.basis.modes() {
            return Err(Error::ModeCountMismatch {
                expected: self.basis.modes(),
                found: symbol.modes(),
            });
        }
        let matrix = assemble(self.grid, &self.basis, |xi| symbol.eval(xi))?;
        if real_on_grid(symbol, self.grid) {
            Ok(FockOperator::hermitized(matrix, self.basis.clone()))
        } else {
            Ok(FockOperator::new(matrix, self.basis.clone()))
        }
    }
}

pub(crate) fn real_on_grid<S: Symbol + ?Sized>(symbol: &S, grid: &PhaseGrid) -> bool {
    let mut xi = vec![Complex64::new(0.0, 0.0); grid.modes()];
    (0..grid.len()).all(|i| {
        grid.node_into(i, &mut xi);
        let v = symbol.eval(&xi);
        v.im.abs() <= REAL_ON_GRID * (1.0 + v.re.abs())
    })
}

/// `Q(A)` by quadrature, after the `A = 1` self-check on the same grid.
pub fn quantize_quadrature<S: Symbol + ?Sized>(
    symbol: &S,
    grid: &PhaseGrid,
    basis: &Arc<FockBasis>,
) -> Result<FockOperator> {
    Quantizer::new(grid, basis)?.quantize(symbol)
}

/// `⟨Ω_α|Q|Ω_β⟩` with unnormalized coherent vectors.
pub fn coherent_matrix_element(
    op: &FockOperator,
    alpha: &CoherentAmplitude,
    beta: &CoherentAmplitude,
) -> Result<Complex64> {
    let basis = op.basis();
    let a = basis.coherent_vector(alpha)?;
    let b = basis.coherent_vector(beta)?;
    let qb = &op.matrix * &b.vector.coeffs;
    Ok(a.vector.coeffs.dotc(&qb))
}

/// Wick symbol `⟨Ω_ψ|Q|Ω_ψ⟩ e^{-ψ*ψ}`.
pub fn wick_symbol_of(op: &FockOperator, psi: &CoherentAmplitude) -> Result<Complex64> {
    Ok(coherent_matrix_element(op, psi, psi)? * (-psi.norm_sq()).exp())
}

/// Outcome of [`norm_bound_check`].
#[derive(Debug, Clone, PartialEq)]
pub struct NormBoundReport {
    /// Largest singular value of the unpadded block.
    pub operator_norm: f64,
    /// `max |A|` over the grid nodes.
    pub symbol_sup: f64,
    /// `min Re A` over the grid nodes.
    pub symbol_inf: f64,
    /// Smallest eigenvalue of the Hermitian part of the unpadded block.
    pub min_rayleigh: f64,
    /// `operator_norm ≤ symbol_sup + tolerance`
    pub upper_holds: bool,
    /// `min_rayleigh ≥ symbol_inf − tolerance`
    pub lower_holds: bool,
}

/// Compares `Q` against the sup and inf of its symbol over the grid nodes.
pub fn norm_bound_check<S: Symbol + ?Sized>(
    symbol: &S,
    op: &FockOperator,
    grid: &PhaseGrid,
    tolerance: f64,
) -> Result<NormBoundReport> {
    if symbol.modes() != op.basis().modes() || grid.modes() != op.basis().modes() {
        return Err(Error::ModeCountMismatch {
            expected: op.basis().modes(),
            found: if grid.modes() != op.basis().modes() {
                grid.modes()
            } else {
                symbol.modes()
            },
        });
    }
    let mut sup: f64 = 0.0;
    let mut inf = f64::INFINITY;
    let mut xi = vec![Complex64::new(0.0, 0.0); grid.modes()];
    for i in 0..grid.len() {
        grid.node_into(i, &mut xi);
        let v = symbol.eval(&xi);
        sup = sup.max(v.norm());
        inf = inf.min(v.re);
    }
    let block = op.unpadded_block();
    let operator_norm = spectral_norm(&block);
    let herm = (&block + block.adjoint()) * Complex64::new(0.5, 0.0);
    let min_rayleigh = herm
        .symmetric_eigenvalues()
        .iter()
        .fold(f64::INFINITY, |acc, &e| acc.min(e));
    Ok(NormBoundReport {
        operator_norm,
        symbol_sup: sup,
        symbol_inf: inf,
        min_rayleigh,
        upper_holds: operator_norm <= sup + tolerance,
        lower_holds: min_rayleigh >= inf - tolerance,
    })
}

/// Samples of the wick symbol at the given points, for export.
pub fn wick_samples(op: &FockOperator, points: &[CoherentAmplitude]) -> Result<Vec<Complex64>> {
    points.iter().map(|p| wick_symbol_of(op, p)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{ModeConfig, MultiIndex};
    use crate::symbols::{antiwick_product, omega_transform, OmegaKernel, QuasiSymbol};

    fn z(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn basis(d: usize, cutoff: usize) -> Arc<FockBasis> {
        FockBasis::new(ModeConfig::new(d, cutoff).unwrap()).unwrap()
    }

    fn grid_for(b: &FockBasis, extra: usize) -> PhaseGrid {
        let (k, m) = QuadratureSpec::required_for(b.config().capacity() + extra);
        PhaseGrid::new(b.modes(), QuadratureSpec::polar(k, m).unwrap()).unwrap()
    }

    #[test]
    fn number_symbol_is_n_plus_one() {
        let b = basis(1, 5);
        let q = quantize_poly(&PolySymbol::number(1, 0), &b).unwrap();
        let block = q.unpadded_block();
        for i in 0..6 {
            for j in 0..6 {
                let want = if i == j { (i + 1) as f64 } else { 0.0 };
                assert_eq!(block[(i, j)], z(want, 0.0));
            }
        }
        assert!(q.is_hermitian());
    }

    #[test]
    fn constant_and_creation() {
        let b = basis(1, 6);
        let one = quantize_poly(&PolySymbol::constant(1, z(1.0, 0.0)), &b).unwrap();
        assert_eq!(one.matrix, DMatrix::identity(b.dim(), b.dim()));
        let cs = quantize_poly(&PolySymbol::psi_star(1, 0), &b).unwrap();
        assert_eq!(cs.matrix, b.creation(0).unwrap().matrix);
        let c = quantize_poly(&PolySymbol::psi(1, 0), &b).unwrap();
        assert_eq!(c.matrix, b.annihilation(0).unwrap().matrix);
        assert!(!c.is_hermitian());
    }

    #[test]
    fn ladder_product_oracle() {
        // ψ*² ψ ψ_2* ↦ a_1 a_1†² a_2† as explicit matrix products
        let b = basis(2, 6);
        let mut s = PolySymbol::zero(2);
        s.add_term(z(0.5, -0.25), MultiIndex::new(vec![2, 1]), MultiIndex::new(vec![1, 0]));
        let q = quantize_poly(&s, &b).unwrap();
        let a1 = b.annihilation(0).unwrap().matrix;
        let c1 = b.creation(0).unwrap().matrix;
        let c2 = b.creation(1).unwrap().matrix;
        let want = (&a1 * &c1 * &c1 * &c2) * z(0.5, -0.25);
        let k = b.unpadded_dim();
        let got = q.unpadded_block();
        let want = want.view((0, 0), (k, k)).into_owned();
        assert!((got - want).iter().all(|e| e.norm() < 1e-12));
    }

    #[test]
    fn degree_beyond_pad_is_refused() {
        let b = FockBasis::new(ModeConfig::with_pad(1, 6, 2).unwrap()).unwrap();
        let n = PolySymbol::number(1, 0);
        assert!(quantize_poly(&n, &b).is_ok());
        assert!(matches!(
            quantize_poly(&(&n * &n), &b),
            Err(Error::DegreeExceedsPad { degree: 4, pad: 2 })
        ));
    }

    #[test]
    fn quadrature_matches_polynomial() {
        let b = basis(1, 12);
        let g = grid_for(&b, 4);
        let quant = Quantizer::new(&g, &b).unwrap();
        assert!(quant.identity_defect() < 1e-12);
        let n = PolySymbol::number(1, 0);
        let mut s = &(&n * &n).scale(z(0.1, 0.0)) + &PolySymbol::psi(1, 0).scale(z(0.3, 0.2));
        s.add_term(z(-0.7, 0.0), MultiIndex::new(vec![3]), MultiIndex::new(vec![0]));
        for sym in [n.clone(), s] {
            let exact = quantize_poly(&sym, &b).unwrap();
            let quad = quant.quantize(&sym).unwrap();
            let worst = (exact.matrix - quad.matrix).iter().fold(0.0f64, |a, e| a.max(e.norm()));
            assert!(worst < 1e-10, "{worst}");
        }
    }

    #[test]
    fn gaussian_symbol_vacuum_element() {
        let b = basis(1, 8);
        let g = PhaseGrid::new(1, QuadratureSpec::polar(40, 80).unwrap()).unwrap();
        let a = QuasiSymbol::new(1, 0.0, |x| z((-x[0].norm_sqr()).exp(), 0.0));
        let q = quantize_quadrature(&a, &g, &b).unwrap();
        assert!((q.matrix[(0, 0)] - 0.5).norm() < 1e-12);
        assert!(q.is_hermitian());
        // diagonal is 2^{-(n+1)}
        assert!((q.matrix[(3, 3)] - 1.0 / 16.0).norm() < 1e-12);
        let rep = norm_bound_check(&a, &q, &g, 1e-12).unwrap();
        assert!(rep.upper_holds && (rep.operator_norm - 0.5).abs() < 1e-12);
    }

    #[test]
    fn coarse_grid_fails_self_check() {
        let b = basis(1, 12);
        let g = PhaseGrid::new(1, QuadratureSpec::polar(4, 8).unwrap()).unwrap();
        match Quantizer::new(&g, &b) {
            Err(Error::QuadratureInsufficient { required_radial, .. }) => assert_eq!(required_radial, 9),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn coherent_elements() {
        let b = basis(1, 30);
        let alpha = CoherentAmplitude::single(z(0.4, -0.3)).unwrap();
        let beta = CoherentAmplitude::single(z(-0.2, 0.5)).unwrap();
        let overlap = (alpha.as_slice()[0].conj() * beta.as_slice()[0]).exp();
        let id = FockOperator::identity(&b);
        assert!((coherent_matrix_element(&id, &alpha, &beta).unwrap() - overlap).norm() < 1e-13);
        let create = b.creation(0).unwrap();
        let want = alpha.as_slice()[0].conj() * overlap;
        assert!((coherent_matrix_element(&create, &alpha, &beta).unwrap() - want).norm() < 1e-13);
        let zero = CoherentAmplitude::single(z(0.0, 0.0)).unwrap();
        let q = quantize_poly(&PolySymbol::number(1, 0), &b).unwrap();
        assert_eq!(coherent_matrix_element(&q, &zero, &zero).unwrap(), q.matrix[(0, 0)]);
        let far = CoherentAmplitude::single(z(3.0, 0.0)).unwrap();
        assert!(matches!(
            coherent_matrix_element(&q, &far, &zero),
            Err(Error::OutsideSafeRadius { .. })
        ));
    }

    #[test]
    fn wick_symbols() {
        let b = basis(1, 40);
        let q = quantize_poly(&PolySymbol::number(1, 0), &b).unwrap();
        let origin = CoherentAmplitude::single(z(0.0, 0.0)).unwrap();
        assert!((wick_symbol_of(&q, &origin).unwrap() - 1.0).norm() < 1e-15);
        let a = b.annihilation(0).unwrap();
        let normal = b.creation(0).unwrap().compose(&a).unwrap();
        for p in [z(0.0, 0.0), z(0.5, 0.1), z(-1.0, 0.7), z(0.3, -1.2), z(1.5, 0.0)] {
            let psi = CoherentAmplitude::single(p).unwrap();
            let w = wick_symbol_of(&normal, &psi).unwrap();
            assert!((w - p.norm_sqr()).norm() < 1e-9);
            let w1 = wick_symbol_of(&FockOperator::identity(&b), &psi).unwrap();
            assert!((w1 - 1.0).norm() < 1e-9);
        }
    }

    #[test]
    fn wick_round_trip() {
        let b = basis(2, 30);
        let n1 = PolySymbol::number(2, 0);
        let mut a = &(&n1 * &PolySymbol::number(2, 1)) + &PolySymbol::psi(2, 1).scale(z(0.0, 0.4));
        a.add_term(z(0.2, 0.1), MultiIndex::new(vec![2, 0]), MultiIndex::new(vec![0, 1]));
        let q = quantize_poly(&a, &b).unwrap();
        let wick = omega_transform(&a, &OmegaKernel::Wick);
        for p in [
            [z(0.3, 0.1), z(-0.2, 0.4)],
            [z(0.0, 0.0), z(1.0, -0.5)],
            [z(-0.8, 0.2), z(0.1, 0.1)],
        ] {
            let psi = CoherentAmplitude::new(p.to_vec()).unwrap();
            let got = wick_symbol_of(&q, &psi).unwrap();
            assert!((got - wick.eval(&p)).norm() < 1e-9, "{got} {}", wick.eval(&p));
        }
    }

    #[test]
    fn product_formula_against_matrix_product() {
        let b = FockBasis::new(ModeConfig::with_pad(1, 10, 6).unwrap()).unwrap();
        let n = PolySymbol::number(1, 0);
        let x = &PolySymbol::psi(1, 0) + &PolySymbol::psi_star(1, 0);
        let pairs = [
            (PolySymbol::psi_star(1, 0), PolySymbol::psi(1, 0)),
            (n.clone(), n.clone()),
            (&n * &PolySymbol::psi_star(1, 0), &x * &x),
        ];
        for (p, c) in pairs {
            let prod = antiwick_product(&p, &c, 10);
            let lhs = quantize_poly(&prod, &b).unwrap().unpadded_block();
            let qp = quantize_poly(&p, &b).unwrap();
            let qc = quantize_poly(&c, &b).unwrap();
            let rhs = qp.compose(&qc).unwrap().unpadded_block();
            assert!((lhs - rhs).iter().all(|e| e.norm() < 1e-10));
        }
    }

    #[test]
    fn lower_bound_on_rayleigh_quotients() {
        let b = basis(1, 10);
        let g = grid_for(&b, 4);
        let n = PolySymbol::number(1, 0);
        let a = &(&(&n * &n) - &n.scale(z(2.0, 0.0))) + &PolySymbol::constant(1, z(3.0, 0.0));
        // (|ξ|² − 1)² + 2 ≥ 2
        let q = quantize_poly(&a, &b).unwrap();
        let rep = norm_bound_check(&a, &q, &g, 1e-9).unwrap();
        assert!(rep.lower_holds, "{rep:?}");
        assert!(rep.min_rayleigh >= 2.0 - 1e-9);
    }
}
