use std::sync::Arc;

use fockpath_core::fock::{spectral_norm, FockBasis, ModeConfig, MultiIndex};
use fockpath_core::propagator::{fit_rate, slice_operator, JobSymbol, SliceScheme};
use fockpath_core::quadrature::{PhaseGrid, QuadratureSpec};
use fockpath_core::quantize::{norm_bound_check, quantize_poly, wick_symbol_of, Quantizer};
use fockpath_core::symbols::{antiwick_product, omega_transform, parse_symbol, OmegaKernel, PolySymbol};
use fockpath_core::{CoherentAmplitude, Complex64};
use nalgebra::DMatrix;
use proptest::prelude::*;

fn z(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn coeff() -> impl Strategy<Value = Complex64> {
    (-1.0f64..1.0, -1.0f64..1.0).prop_map(|(a, b)| z(a, b))
}

fn amplitude(max: f64) -> impl Strategy<Value = Complex64> {
    (0.0f64..max, 0.0f64..std::f64::consts::TAU).prop_map(|(r, t)| Complex64::from_polar(r, t))
}

/// Single-mode polynomial with every monomial of degree `≤ max_degree`
/// present with probability about one half.
fn poly(max_degree: usize) -> impl Strategy<Value = PolySymbol> {
    let slots: Vec<(u32, u32)> = (0..=max_degree as u32)
        .flat_map(|k| (0..=max_degree as u32 - k).map(move |l| (k, l)))
        .collect();
    let n = slots.len();
    proptest::collection::vec((any::<bool>(), coeff()), n).prop_map(move |picks| {
        let mut p = PolySymbol::zero(1);
        for ((keep, c), &(k, l)) in picks.into_iter().zip(&slots) {
            if keep {
                p.add_term(c, MultiIndex::new(vec![k]), MultiIndex::new(vec![l]));
            }
        }
        p
    })
}

fn real_poly(max_degree: usize) -> impl Strategy<Value = PolySymbol> {
    poly(max_degree).prop_map(|p| &p + &p.conjugate())
}

fn max_abs(m: &DMatrix<Complex64>) -> f64 {
    m.iter().fold(0.0f64, |a, e| a.max(e.norm()))
}

fn grid_for(cap: usize) -> PhaseGrid {
    let (k, m) = QuadratureSpec::required_for(cap);
    PhaseGrid::new(1, QuadratureSpec::polar(k, m).unwrap()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn canonical_commutators(d in 1usize..=3, cutoff in 1usize..=8) {
        let b = FockBasis::new(ModeConfig::new(d, cutoff).unwrap()).unwrap();
        let k = b.unpadded_dim();
        for i in 0..d {
            for j in 0..d {
                let a = b.annihilation(i).unwrap();
                let c = b.creation(j).unwrap();
                let comm = a.commutator(&c).unwrap().unpadded_block();
                let want = if i == j { DMatrix::identity(k, k) } else { DMatrix::zeros(k, k) };
                prop_assert!(max_abs(&(comm - want)) <= 1e-13);
                let aa = a.commutator(&b.annihilation(j).unwrap()).unwrap();
                prop_assert!(max_abs(&aa.unpadded_block()) == 0.0);
                prop_assert_eq!(b.annihilation(j).unwrap().matrix, c.matrix.adjoint());
            }
        }
    }

    #[test]
    fn hermite_orthogonality(a in amplitude(1.2), bb in amplitude(1.2), m in 0usize..6, n in 0usize..6) {
        let basis = FockBasis::new(ModeConfig::new(1, 10).unwrap()).unwrap();
        let alpha = CoherentAmplitude::single(a).unwrap();
        let beta = CoherentAmplitude::single(bb).unwrap();
        let x = basis.hermite_monomial(&alpha, m).unwrap();
        let y = basis.hermite_monomial(&beta, n).unwrap();
        let got = fockpath_core::inner_product(&x, &y).unwrap();
        let want = if m == n {
            (a.conj() * bb).powu(n as u32) * (1..=n).map(|i| i as f64).product::<f64>()
        } else {
            z(0.0, 0.0)
        };
        prop_assert!((got - want).norm() <= 1e-10 * (1.0 + want.norm()));
    }

    #[test]
    fn coherent_overlap(a in amplitude(1.0), bb in amplitude(1.0)) {
        let basis = FockBasis::new(ModeConfig::new(1, 30).unwrap()).unwrap();
        let x = basis.coherent_vector(&CoherentAmplitude::single(a).unwrap()).unwrap();
        let y = basis.coherent_vector(&CoherentAmplitude::single(bb).unwrap()).unwrap();
        let got = fockpath_core::inner_product(&x.vector, &y.vector).unwrap();
        let want = (a.conj() * bb).exp();
        let bound = (x.vector.norm_sq() * y.tail_norm_sq).sqrt() + (y.vector.norm_sq() * x.tail_norm_sq).sqrt();
        prop_assert!((got - want).norm() <= bound + 1e-13);
    }

    #[test]
    fn polar_moments(k in 0usize..10, l in 0usize..10) {
        let g = PhaseGrid::new(1, QuadratureSpec::polar(10, 24).unwrap()).unwrap();
        let v = g.integrate(|x| x[0].conj().powu(k as u32) * x[0].powu(l as u32)).unwrap();
        if k == l {
            let f: f64 = (1..=k).map(|i| i as f64).product();
            prop_assert!((v - f).norm() <= 1e-12 * f);
        } else {
            prop_assert!(v.norm() <= 1e-13 * (1.0 + (k.max(l) as f64)).powi(2) * 10.0);
        }
    }

    #[test]
    fn omega_exponents_add(
        p in poly(4),
        u1 in -1.0f64..1.0, v1 in coeff(), w1 in coeff(),
        u2 in -1.0f64..1.0, v2 in coeff(), w2 in coeff(),
    ) {
        let k1 = OmegaKernel::Gaussian { u: z(u1, 0.0), v: v1, w: w1 };
        let k2 = OmegaKernel::Gaussian { u: z(u2, 0.0), v: v2, w: w2 };
        let twice = omega_transform(&omega_transform(&p, &k1), &k2);
        let once = omega_transform(&p, &k1.compose(&k2));
        prop_assert!(twice.max_difference(&once) <= 1e-12);
    }

    #[test]
    fn product_with_constant_is_scaling(p in poly(3), c in coeff()) {
        let k = PolySymbol::constant(1, c);
        prop_assert_eq!(antiwick_product(&k, &p, 6), p.scale(c));
        prop_assert_eq!(antiwick_product(&p, &k, 6), p.scale(c));
    }

    #[test]
    fn product_formula_matches_matrix_product(p in poly(3), q in poly(3)) {
        let basis = FockBasis::new(ModeConfig::with_pad(1, 8, 6).unwrap()).unwrap();
        let lhs = quantize_poly(&antiwick_product(&p, &q, 6), &basis).unwrap().unpadded_block();
        let rhs = quantize_poly(&p, &basis).unwrap().compose(&quantize_poly(&q, &basis).unwrap()).unwrap().unpadded_block();
        let scale = 1.0 + max_abs(&rhs);
        prop_assert!(max_abs(&(lhs - rhs)) <= 1e-10 * scale);
    }

    #[test]
    fn contraction_terms_drop_degree(p in poly(3), q in poly(3), order in 1usize..4) {
        let term = &antiwick_product(&p, &q, order) - &antiwick_product(&p, &q, order - 1);
        if !term.is_zero() {
            prop_assert!(term.degree() + 2 * order <= p.degree() + q.degree());
        }
    }

    #[test]
    fn real_symbols_give_hermitian_operators(p in real_poly(4)) {
        let basis = FockBasis::new(ModeConfig::new(1, 8).unwrap()).unwrap();
        let q = quantize_poly(&p, &basis).unwrap();
        prop_assert!(q.is_hermitian());
        prop_assert!(q.hermiticity_defect() <= 1e-12);
    }

    #[test]
    fn non_real_symbols_give_non_hermitian_operators(p in real_poly(4), k in 0u32..3, l in 0u32..3, c in coeff()) {
        prop_assume!(c.im.abs() > 0.05 || k != l);
        prop_assume!(c.norm() > 0.05);
        let mut a = p.clone();
        a.add_term(c * z(0.0, 1.0), MultiIndex::new(vec![k]), MultiIndex::new(vec![l]));
        a.add_term(c.conj() * z(0.0, 1.0), MultiIndex::new(vec![l]), MultiIndex::new(vec![k]));
        prop_assume!(!a.is_real());
        let basis = FockBasis::new(ModeConfig::new(1, 8).unwrap()).unwrap();
        let q = quantize_poly(&a, &basis).unwrap();
        prop_assert!(!q.is_hermitian());
        prop_assert!(q.hermiticity_defect() > 1e-6);
    }

    #[test]
    fn quadrature_agrees_with_ladder_products(p in poly(4)) {
        let basis = FockBasis::new(ModeConfig::new(1, 12).unwrap()).unwrap();
        let g = grid_for(basis.config().capacity() + 4);
        let quant = Quantizer::new(&g, &basis).unwrap();
        let exact = quantize_poly(&p, &basis).unwrap();
        let quad = quant.quantize(&p).unwrap();
        prop_assert!(max_abs(&(exact.matrix - quad.matrix)) <= 1e-10);
    }

    #[test]
    fn wick_symbol_round_trip(p in poly(4), a in amplitude(1.0)) {
        let basis: Arc<FockBasis> = FockBasis::new(ModeConfig::new(1, 40).unwrap()).unwrap();
        let q = quantize_poly(&p, &basis).unwrap();
        let psi = CoherentAmplitude::single(a).unwrap();
        let got = wick_symbol_of(&q, &psi).unwrap();
        let want = omega_transform(&p, &OmegaKernel::Wick).eval(&[a]);
        prop_assert!((got - want).norm() <= 1e-9 * (1.0 + want.norm()));
    }

    #[test]
    fn positivity(p in poly(2), c in 0.5f64..3.0) {
        // A = |p|² + c ≥ c everywhere
        let a = &(&p.conjugate() * &p) + &PolySymbol::constant(1, z(c, 0.0));
        let basis = FockBasis::new(ModeConfig::new(1, 8).unwrap()).unwrap();
        let q = quantize_poly(&a, &basis).unwrap();
        let g = grid_for(basis.config().capacity());
        let rep = norm_bound_check(&a, &q, &g, 1e-9).unwrap();
        prop_assert!(rep.min_rayleigh >= c - 1e-9, "{:?}", rep);
    }

    #[test]
    fn slices_contract(t in -3.0f64..3.0, n in 1usize..64, lin in -0.5f64..0.5, quart in 0.0f64..0.2) {
        let basis = FockBasis::new(ModeConfig::new(1, 8).unwrap()).unwrap();
        let g = PhaseGrid::new(1, QuadratureSpec::polar(40, 80).unwrap()).unwrap();
        let quant = Quantizer::new(&g, &basis).unwrap();
        let num = PolySymbol::number(1, 0);
        let x = &PolySymbol::psi(1, 0) + &PolySymbol::psi_star(1, 0);
        let a = &(&num + &(&num * &num).scale(z(quart, 0.0))) + &x.scale(z(lin, 0.0));
        let sym = JobSymbol::Poly(a);
        for scheme in [SliceScheme::Exponential, SliceScheme::Resolvent] {
            let s = slice_operator(&sym, t, n, scheme, &quant).unwrap();
            prop_assert!(spectral_norm(&s.unpadded_block()) <= 1.0 + 1e-9);
        }
    }

    #[test]
    fn text_form_round_trips(p in poly(4)) {
        let back = parse_symbol(&p.to_text(), 1).unwrap();
        prop_assert_eq!(back, p);
    }

    #[test]
    fn power_laws_fit_exactly(c in 0.01f64..10.0, rate in -3.0f64..-0.2, len in 3usize..8) {
        let pts: Vec<(usize, f64)> = (0..len).map(|i| {
            let n = 1usize << (i + 1);
            (n, c * (n as f64).powf(rate))
        }).collect();
        let fit = fit_rate(&pts).unwrap();
        prop_assert!((fit.slope - rate).abs() < 1e-9);
        prop_assert!(fit.residual < 1e-9);
    }
}
