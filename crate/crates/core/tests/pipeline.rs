use std::sync::Arc;

use fockpath_core::fock::{FockBasis, FockOperator, ModeConfig};
use fockpath_core::propagator::{
    path_integral_direct, slice_operator, sliced_propagator_element, EvolutionJob, JobSymbol, SliceScheme,
};
use fockpath_core::quadrature::{PhaseGrid, QuadratureSpec};
use fockpath_core::quantize::{coherent_matrix_element, quantize_poly, Quantizer};
use fockpath_core::symbols::{omega_transform, OmegaKernel, PolySymbol};
use fockpath_core::{CoherentAmplitude, Complex64};
use nalgebra::DMatrix;

fn z(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn amp(a: Complex64) -> CoherentAmplitude {
    CoherentAmplitude::single(a).unwrap()
}

fn suite() -> Vec<PolySymbol> {
    let n = PolySymbol::number(1, 0);
    let x = &PolySymbol::psi(1, 0) + &PolySymbol::psi_star(1, 0);
    vec![
        n.clone(),
        &n + &(&n * &n).scale(z(0.1, 0.0)),
        &n + &x.scale(z(0.3, 0.0)),
    ]
}

fn job(symbol: PolySymbol, cutoff: usize, scheme: SliceScheme, n_list: Vec<usize>) -> EvolutionJob {
    EvolutionJob {
        symbol: symbol.into(),
        t: 1.0,
        n_list,
        alpha: amp(z(0.5, 0.0)),
        beta: amp(z(0.5, 0.0)),
        config: ModeConfig::new(1, cutoff).unwrap(),
        grid: QuadratureSpec::polar(60, 120).unwrap(),
        scheme,
    }
}

/// Symmetrically ordered `ψ*^k ψ^l`: the mean of every arrangement of `k`
/// creators and `l` annihilators.
fn symmetric_ordering(basis: &Arc<FockBasis>, symbol: &PolySymbol) -> DMatrix<Complex64> {
    let dim = basis.dim();
    let create = basis.creation(0).unwrap().matrix;
    let destroy = basis.annihilation(0).unwrap().matrix;
    let mut out = DMatrix::zeros(dim, dim);
    for (k, l, c) in symbol.terms() {
        let (k, l) = (k.get(0) as usize, l.get(0) as usize);
        let len = k + l;
        let mut sum = DMatrix::zeros(dim, dim);
        let mut count = 0.0;
        for mask in 0u32..(1 << len) {
            if mask.count_ones() as usize != k {
                continue;
            }
            let mut m = DMatrix::identity(dim, dim);
            for bit in 0..len {
                m = if mask & (1 << bit) != 0 {
                    m * &create
                } else {
                    m * &destroy
                };
            }
            sum += m;
            count += 1.0;
        }
        out += sum * (c / count);
    }
    out
}

fn block(m: &DMatrix<Complex64>, k: usize) -> DMatrix<Complex64> {
    m.view((0, 0), (k, k)).into_owned()
}

fn max_abs(m: &DMatrix<Complex64>) -> f64 {
    m.iter().fold(0.0f64, |a, e| a.max(e.norm()))
}

#[test]
fn weyl_symbols_reorder_to_the_same_operator() {
    let basis = FockBasis::new(ModeConfig::with_pad(1, 8, 6).unwrap()).unwrap();
    let k = basis.unpadded_dim();
    let n = PolySymbol::number(1, 0);
    let weyl = omega_transform(&n, &OmegaKernel::Weyl);
    assert_eq!(weyl, &n + &PolySymbol::constant(1, z(0.5, 0.0)));
    let x = &PolySymbol::psi(1, 0) + &PolySymbol::psi_star(1, 0).scale(z(0.0, 2.0));
    for a in [
        n.clone(),
        &(&n * &n) + &x,
        &(&n * &x) - &PolySymbol::constant(1, z(0.3, 0.0)),
    ] {
        let want = quantize_poly(&a, &basis).unwrap().matrix;
        let got = symmetric_ordering(&basis, &omega_transform(&a, &OmegaKernel::Weyl));
        assert!(max_abs(&(block(&got, k) - block(&want, k))) < 1e-9);
    }
}

#[test]
fn coherent_kernel_of_products_by_double_quadrature() {
    // ⟨Ω_α|Q(B)Q(C)|Ω_β⟩ = ∫∫ e^{ᾱξ₂} B(ξ₂) e^{ξ̄₂ξ₁} C(ξ₁) e^{ξ̄₁β} dμ dμ with Gaussian weights
    let basis = FockBasis::new(ModeConfig::new(1, 30).unwrap()).unwrap();
    let g = PhaseGrid::new(1, QuadratureSpec::polar(40, 80).unwrap()).unwrap();
    let n = PolySymbol::number(1, 0);
    let b_sym = &n + &PolySymbol::psi(1, 0).scale(z(0.5, -0.2));
    let c_sym = &(&PolySymbol::psi_star(1, 0) * &PolySymbol::psi_star(1, 0)) + &PolySymbol::constant(1, z(1.0, 0.0));
    let (al, be) = (z(0.3, -0.2), z(-0.4, 0.1));
    let nodes: Vec<(Complex64, f64)> = (0..g.len())
        .map(|i| {
            let (x, w) = g.node(i);
            (x[0], w)
        })
        .collect();
    let mut total = z(0.0, 0.0);
    for &(x2, w2) in &nodes {
        let mut inner = z(0.0, 0.0);
        for &(x1, w1) in &nodes {
            inner += w1 * (x2.conj() * x1).exp() * c_sym.eval(&[x1]) * (x1.conj() * be).exp();
        }
        total += w2 * (al.conj() * x2).exp() * b_sym.eval(&[x2]) * inner;
    }
    let qb = quantize_poly(&b_sym, &basis).unwrap();
    let qc = quantize_poly(&c_sym, &basis).unwrap();
    let product = qb.compose(&qc).unwrap();
    let want = coherent_matrix_element(&product, &amp(al), &amp(be)).unwrap();
    assert!((total - want).norm() < 1e-9, "{total} {want}");
}

#[test]
fn number_states_expand_over_coherent_states() {
    // ⟨Ω_α|n⟩ = ∫ e^{-|ψ|²} e^{ᾱψ} ψ̄ⁿ/√n! dμ(ψ)
    let g = PhaseGrid::new(1, QuadratureSpec::polar(30, 60).unwrap()).unwrap();
    let al = z(0.7, 0.4);
    for n in 0..=5u32 {
        let f: f64 = (1..=n).map(f64::from).product::<f64>().sqrt();
        let got = g
            .integrate(|x| (al.conj() * x[0]).exp() * x[0].conj().powu(n) / f)
            .unwrap();
        let want = al.conj().powu(n) / f;
        assert!((got - want).norm() < 1e-12);
    }
}

#[test]
fn path_integral_equals_operator_power() {
    let g = PhaseGrid::new(1, QuadratureSpec::polar(24, 48).unwrap()).unwrap();
    let basis = FockBasis::new(ModeConfig::new(1, 24).unwrap()).unwrap();
    let quant = Quantizer::new(&g, &basis).unwrap();
    let (al, be) = (amp(z(0.4, 0.0)), amp(z(0.4, 0.0)));
    for a in suite() {
        let sym = JobSymbol::Poly(a);
        for n in 1..=3usize {
            let direct = path_integral_direct(&sym, 0.5, n, &al, &be, &g).unwrap();
            let s = slice_operator(&sym, 0.5, n, SliceScheme::Exponential, &quant)
                .unwrap()
                .power(n);
            let op = coherent_matrix_element(&s, &al, &be).unwrap() * (-0.16f64).exp();
            assert!((direct - op).norm() < 1e-8, "n={n}: {direct} {op}");
        }
    }
}

#[test]
fn schemes_meet_at_first_order() {
    let ns = vec![8, 16, 32, 64];
    for a in suite() {
        let e = sliced_propagator_element(&job(a.clone(), 24, SliceScheme::Exponential, ns.clone())).unwrap();
        let r = sliced_propagator_element(&job(a, 24, SliceScheme::Resolvent, ns.clone())).unwrap();
        assert_eq!(e.exact_value, r.exact_value);
        let gaps: Vec<(usize, f64)> = ns
            .iter()
            .map(|n| (*n, (e.sliced_values[n] - r.sliced_values[n]).norm()))
            .collect();
        let fit = fockpath_core::fit_rate(&gaps).unwrap();
        assert!((fit.slope + 1.0).abs() < 0.15, "{fit:?}");
    }
}

#[test]
fn doubling_the_cutoff_stays_within_the_truncation_estimate() {
    for a in suite() {
        let small = sliced_propagator_element(&job(a.clone(), 12, SliceScheme::Exponential, vec![4, 8, 16])).unwrap();
        let large = sliced_propagator_element(&job(a, 24, SliceScheme::Exponential, vec![4, 8, 16])).unwrap();
        let est = small.truncation_report.estimate;
        assert!((small.exact_value - large.exact_value).norm() < est);
        for (n, v) in &small.sliced_values {
            let d = (v - large.sliced_values[n]).norm();
            assert!(d < est, "n={n}: change {d:e} vs estimate {est:e}");
        }
    }
}

#[test]
fn repeated_runs_are_bitwise_identical() {
    let a = suite().pop().unwrap();
    let first = sliced_propagator_element(&job(a.clone(), 12, SliceScheme::Resolvent, vec![2, 4, 8])).unwrap();
    let second = sliced_propagator_element(&job(a, 12, SliceScheme::Resolvent, vec![2, 4, 8])).unwrap();
    assert_eq!(first, second);
}

#[test]
fn identity_operator_has_unit_norm_bound() {
    let basis = FockBasis::new(ModeConfig::new(1, 6).unwrap()).unwrap();
    let g = PhaseGrid::new(1, QuadratureSpec::polar(12, 24).unwrap()).unwrap();
    let one = PolySymbol::constant(1, z(1.0, 0.0));
    let rep = fockpath_core::norm_bound_check(&one, &FockOperator::identity(&basis), &g, 1e-12).unwrap();
    assert!((rep.operator_norm - 1.0).abs() < 1e-14 && (rep.symbol_sup - 1.0).abs() < 1e-15);
}
