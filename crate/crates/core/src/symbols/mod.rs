//! Phase-space symbols `A(ψ*, ψ)`.
//!
//! A [`PolySymbol`] stores `Σ c_{k,l} ψ*^k ψ^l` exactly; a [`QuasiSymbol`]
//! wraps an evaluator with a declared growth order. Both implement
//! [`Symbol`], which is what quadrature-based quantization consumes.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::ops::{Add, Mul, Neg, Sub};

use nalgebra::DMatrix;
use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::fock::MultiIndex;

mod ellipticity;
mod jet;
mod omega;
mod parametrix;
mod parse;
mod product;
mod quasi;

pub use ellipticity::{ellipticity_check, EllipticityOptions, EllipticityReport};
pub use omega::{omega_transform, OmegaKernel};
pub use parametrix::{parametrix_expansion, Parametrix, DEFAULT_FLOOR};
pub use parse::parse_symbol;
pub use product::antiwick_product;
pub use quasi::{finite_difference, QuasiSymbol};

/// A function on `ℂᵈ` usable as an antiwick symbol.
pub trait Symbol: Send + Sync {
    fn modes(&self) -> usize;

    fn eval(&self, psi: &[Complex64]) -> Complex64;

    /// `∂_{ψ*}^conj ∂_ψ^holo A` at `psi`, or `None` when that order is not
    /// available.
    fn derivative(&self, psi: &[Complex64], conj: &[u32], holo: &[u32]) -> Option<Complex64>;

    /// Declared growth order `ρ`.
    fn order(&self) -> f64;
}

impl<S: Symbol + ?Sized> Symbol for &S {
    fn modes(&self) -> usize {
        (**self).modes()
    }
    fn eval(&self, psi: &[Complex64]) -> Complex64 {
        (**self).eval(psi)
    }
    fn derivative(&self, psi: &[Complex64], conj: &[u32], holo: &[u32]) -> Option<Complex64> {
        (**self).derivative(psi, conj, holo)
    }
    fn order(&self) -> f64 {
        (**self).order()
    }
}

/// Which Wirtinger derivative to take.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Wirtinger {
    /// `∂_{ψ_j}`
    Holomorphic,
    /// `∂_{ψ*_j}`
    Antiholomorphic,
}

/// Exponent pair `(k, l)` of the monomial `ψ*^k ψ^l`.
pub type Monomial = (MultiIndex, MultiIndex);

/// Polynomial symbol `Σ c_{k,l} ψ*^k ψ^l`; zero coefficients are never stored.
#[derive(Debug, Clone, PartialEq)]
pub struct PolySymbol {
    modes: usize,
    terms: BTreeMap<Monomial, Complex64>,
}

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

fn falling(n: u32, k: u32) -> f64 {
    (0..k).map(|i| f64::from(n - i)).product()
}

fn powi(z: Complex64, k: u32) -> Complex64 {
    if k == 0 {
        c(1.0)
    } else {
        z.powu(k)
    }
}

impl PolySymbol {
    pub fn zero(modes: usize) -> Self {
        assert!(modes >= 1, "a symbol needs at least one mode");
        PolySymbol {
            modes,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(modes: usize, value: Complex64) -> Self {
        let mut s = Self::zero(modes);
        s.add_term(value, MultiIndex::zeros(modes), MultiIndex::zeros(modes));
        s
    }

    pub fn monomial(value: Complex64, conj: MultiIndex, holo: MultiIndex) -> Self {
        assert_eq!(conj.modes(), holo.modes(), "exponent lengths differ");
        let mut s = Self::zero(conj.modes());
        s.add_term(value, conj, holo);
        s
    }

    /// `ψ_j` (zero-based mode).
    pub fn psi(modes: usize, j: usize) -> Self {
        Self::monomial(c(1.0), MultiIndex::zeros(modes), MultiIndex::unit(modes, j))
    }

    /// `ψ*_j`
    pub fn psi_star(modes: usize, j: usize) -> Self {
        Self::monomial(c(1.0), MultiIndex::unit(modes, j), MultiIndex::zeros(modes))
    }

    /// `ψ*_j ψ_j`
    pub fn number(modes: usize, j: usize) -> Self {
        Self::monomial(c(1.0), MultiIndex::unit(modes, j), MultiIndex::unit(modes, j))
    }

    pub fn add_term(&mut self, value: Complex64, conj: MultiIndex, holo: MultiIndex) {
        assert!(
            conj.modes() == self.modes && holo.modes() == self.modes,
            "monomial has the wrong number of modes"
        );
        let key = (conj, holo);
        let entry = self.terms.entry(key.clone()).or_insert(c(0.0));
        *entry += value;
        if *entry == c(0.0) {
            self.terms.remove(&key);
        }
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn terms(&self) -> impl Iterator<Item = (&MultiIndex, &MultiIndex, Complex64)> + '_ {
        self.terms.iter().map(|((k, l), &v)| (k, l, v))
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, conj: &MultiIndex, holo: &MultiIndex) -> Complex64 {
        self.terms.get(&(conj.clone(), holo.clone())).copied().unwrap_or(c(0.0))
    }

    /// Largest `|k| + |l|` over stored terms; 0 for the zero symbol.
    pub fn degree(&self) -> usize {
        self.terms.keys().map(|(k, l)| k.total() + l.total()).max().unwrap_or(0)
    }

    pub fn conj_degree(&self) -> usize {
        self.terms.keys().map(|(k, _)| k.total()).max().unwrap_or(0)
    }

    pub fn holo_degree(&self) -> usize {
        self.terms.keys().map(|(_, l)| l.total()).max().unwrap_or(0)
    }

    /// Real-valued as a function: `c_{k,l} = conj(c_{l,k})`.
    pub fn is_real(&self) -> bool {
        let scale = self.terms.values().fold(0.0f64, |m, v| m.max(v.norm()));
        self.terms.iter().all(|((k, l), &v)| {
            let mirror = self.coefficient(l, k);
            (v - mirror.conj()).norm() <= 1e-12 * scale
        })
    }

    pub fn eval(&self, psi: &[Complex64]) -> Complex64 {
        assert_eq!(psi.len(), self.modes, "point has the wrong number of modes");
        self.terms
            .iter()
            .map(|((k, l), &v)| {
                let mut t = v;
                for j in 0..self.modes {
                    t *= powi(psi[j].conj(), k.get(j)) * powi(psi[j], l.get(j));
                }
                t
            })
            .sum()
    }

    /// `∂_{ψ*}^conj ∂_ψ^holo A` evaluated at `psi` without building the
    /// derivative symbol.
    pub fn derivative_at(&self, psi: &[Complex64], conj: &[u32], holo: &[u32]) -> Complex64 {
        let mut sum = c(0.0);
        'terms: for ((k, l), &v) in &self.terms {
            let mut t = v;
            for j in 0..self.modes {
                let (kj, lj) = (k.get(j), l.get(j));
                if kj < conj[j] || lj < holo[j] {
                    continue 'terms;
                }
                t *= falling(kj, conj[j]) * falling(lj, holo[j]);
                t *= powi(psi[j].conj(), kj - conj[j]) * powi(psi[j], lj - holo[j]);
            }
            sum += t;
        }
        sum
    }

    /// Exact partial derivative in mode `j` (zero-based).
    pub fn differentiate(&self, which: Wirtinger, j: usize) -> PolySymbol {
        let mut out = PolySymbol::zero(self.modes);
        for ((k, l), &v) in &self.terms {
            match which {
                Wirtinger::Antiholomorphic if k.get(j) > 0 => {
                    out.add_term(v * f64::from(k.get(j)), k.with(j, k.get(j) - 1), l.clone());
                }
                Wirtinger::Holomorphic if l.get(j) > 0 => {
                    out.add_term(v * f64::from(l.get(j)), k.clone(), l.with(j, l.get(j) - 1));
                }
                _ => {}
            }
        }
        out
    }

    /// `∂*^κ ∂^λ A` as a symbol.
    pub fn partial(&self, conj: &MultiIndex, holo: &MultiIndex) -> PolySymbol {
        let mut out = PolySymbol::zero(self.modes);
        for ((k, l), &v) in &self.terms {
            if let (Some(k2), Some(l2)) = (k.checked_sub(conj), l.checked_sub(holo)) {
                let mut f = 1.0;
                for j in 0..self.modes {
                    f *= falling(k.get(j), conj.get(j)) * falling(l.get(j), holo.get(j));
                }
                out.add_term(v * f, k2, l2);
            }
        }
        out
    }

    pub fn scale(&self, factor: Complex64) -> PolySymbol {
        let mut out = PolySymbol::zero(self.modes);
        if factor != c(0.0) {
            for ((k, l), &v) in &self.terms {
                out.add_term(v * factor, k.clone(), l.clone());
            }
        }
        out
    }

    /// Pointwise complex conjugate `conj(A)`.
    pub fn conjugate(&self) -> PolySymbol {
        let mut out = PolySymbol::zero(self.modes);
        for ((k, l), &v) in &self.terms {
            out.add_term(v.conj(), l.clone(), k.clone());
        }
        out
    }

    /// Drops every term whose total degree exceeds `max_degree`.
    pub fn truncate(&self, max_degree: usize) -> PolySymbol {
        let mut out = self.clone();
        out.terms.retain(|(k, l), _| k.total() + l.total() <= max_degree);
        out
    }

    /// `A'(ψ) = A(Mψ)`.
    pub fn substitute_linear(&self, m: &DMatrix<Complex64>) -> Result<PolySymbol> {
        let d = self.modes;
        if m.nrows() != d || m.ncols() != d {
            return Err(Error::ModeCountMismatch {
                expected: d,
                found: m.nrows(),
            });
        }
        // images of ψ_i and ψ*_i
        let holo: Vec<PolySymbol> = (0..d)
            .map(|i| {
                let mut s = PolySymbol::zero(d);
                for j in 0..d {
                    s = &s + &PolySymbol::psi(d, j).scale(m[(i, j)]);
                }
                s
            })
            .collect();
        let conj: Vec<PolySymbol> = holo.iter().map(PolySymbol::conjugate).collect();
        let mut out = PolySymbol::zero(d);
        for ((k, l), &v) in &self.terms {
            let mut t = PolySymbol::constant(d, v);
            for i in 0..d {
                for _ in 0..k.get(i) {
                    t = &t * &conj[i];
                }
                for _ in 0..l.get(i) {
                    t = &t * &holo[i];
                }
            }
            out = &out + &t;
        }
        Ok(out)
    }

    /// Largest coefficient difference.
    pub fn max_difference(&self, other: &PolySymbol) -> f64 {
        let diff = self - other;
        diff.terms.values().fold(0.0, |m, v| m.max(v.norm()))
    }

    /// Copy with every coefficient below `tol` in modulus removed.
    pub fn cleaned(&self, tol: f64) -> PolySymbol {
        let mut out = self.clone();
        out.terms.retain(|_, v| v.norm() > tol);
        out
    }
}

impl Add for &PolySymbol {
    type Output = PolySymbol;
    fn add(self, rhs: &PolySymbol) -> PolySymbol {
        assert_eq!(self.modes, rhs.modes, "mode counts differ");
        let mut out = self.clone();
        for ((k, l), &v) in &rhs.terms {
            out.add_term(v, k.clone(), l.clone());
        }
        out
    }
}

impl Sub for &PolySymbol {
    type Output = PolySymbol;
    fn sub(self, rhs: &PolySymbol) -> PolySymbol {
        self + &(-rhs)
    }
}

impl Neg for &PolySymbol {
    type Output = PolySymbol;
    fn neg(self) -> PolySymbol {
        self.scale(c(-1.0))
    }
}

/// Pointwise product of functions.
impl Mul for &PolySymbol {
    type Output = PolySymbol;
    fn mul(self, rhs: &PolySymbol) -> PolySymbol {
        assert_eq!(self.modes, rhs.modes, "mode counts differ");
        let mut out = PolySymbol::zero(self.modes);
        for ((k1, l1), &v1) in &self.terms {
            for ((k2, l2), &v2) in &rhs.terms {
                out.add_term(v1 * v2, k1.add(k2), l1.add(l2));
            }
        }
        out
    }
}

impl Symbol for PolySymbol {
    fn modes(&self) -> usize {
        self.modes
    }
    fn eval(&self, psi: &[Complex64]) -> Complex64 {
        PolySymbol::eval(self, psi)
    }
    fn derivative(&self, psi: &[Complex64], conj: &[u32], holo: &[u32]) -> Option<Complex64> {
        Some(self.derivative_at(psi, conj, holo))
    }
    fn order(&self) -> f64 {
        self.degree() as f64
    }
}

fn write_number(f: &mut fmt::Formatter<'_>, v: Complex64) -> fmt::Result {
    if v.im == 0.0 {
        write!(f, "{:?}", v.re)
    } else if v.re == 0.0 {
        write!(f, "{:?}*i", v.im)
    } else {
        write!(f, "({:?} + {:?}*i)", v.re, v.im)
    }
}

/// Writes the text form accepted by [`parse_symbol`].
impl fmt::Display for PolySymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (i, ((k, l), &v)) in self.terms.iter().enumerate() {
            if i > 0 {
                f.write_str(" + ")?;
            }
            write_number(f, v)?;
            for j in 0..self.modes {
                for (name, p) in [("cstar", k.get(j)), ("c", l.get(j))] {
                    match p {
                        0 => {}
                        1 => write!(f, "*{name}{}", j + 1)?,
                        _ => write!(f, "*{name}{}^{p}", j + 1)?,
                    }
                }
            }
        }
        Ok(())
    }
}

impl PolySymbol {
    pub fn to_text(&self) -> String {
        alloc::format!("{self}")
    }
}

/// All multi-indices over `modes` with total exactly `order`.
pub(crate) fn indices_of_total(modes: usize, order: usize) -> Vec<MultiIndex> {
    crate::fock::enumerate_multi_indices(modes, order)
        .into_iter()
        .filter(|m| m.total() == order)
        .collect()
}
