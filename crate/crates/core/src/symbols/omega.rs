use num_complex::Complex64;

use super::{PolySymbol, Wirtinger};

/// Gaussian kernel `ω(ψ*, ψ) = exp(u ψ*ψ + v ψ*ψ* + w ψψ)` of an
/// Agarwal-Wolf symbol.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OmegaKernel {
    /// `ω = 1`
    Antiwick,
    /// `ω = e^{-ψ*ψ}`
    Wick,
    /// `ω = e^{-ψ*ψ/2}`
    Weyl,
    /// `ω = e^{-(ψ*ψ* − ψψ)/4} e^{-ψ*ψ/2}`
    Left,
    /// `ω = e^{+(ψ*ψ* − ψψ)/4} e^{-ψ*ψ/2}`
    Right,
    /// `ω = e^{σψ*ψ} e^{-ψ*ψ/2}`
    Sigma(Complex64),
    /// `ω = e^{τ(ψ*ψ* − ψψ)} e^{-ψ*ψ/2}`
    Tau(Complex64),
    /// Raw exponents `(u, v, w)`.
    Gaussian { u: Complex64, v: Complex64, w: Complex64 },
}

impl OmegaKernel {
    /// `(u, v, w)`
    pub fn exponents(&self) -> (Complex64, Complex64, Complex64) {
        let r = |x: f64| Complex64::new(x, 0.0);
        match *self {
            OmegaKernel::Antiwick => (r(0.0), r(0.0), r(0.0)),
            OmegaKernel::Wick => (r(-1.0), r(0.0), r(0.0)),
            OmegaKernel::Weyl => (r(-0.5), r(0.0), r(0.0)),
            OmegaKernel::Left => (r(-0.5), r(-0.25), r(0.25)),
            OmegaKernel::Right => (r(-0.5), r(0.25), r(-0.25)),
            OmegaKernel::Sigma(s) => (s - 0.5, r(0.0), r(0.0)),
            OmegaKernel::Tau(t) => (r(-0.5), t, -t),
            OmegaKernel::Gaussian { u, v, w } => (u, v, w),
        }
    }

    /// True for kernels with `ψ*ψ*` or `ψψ` terms, whose transforms are
    /// coefficient-level only.
    pub fn is_formal(&self) -> bool {
        let (_, v, w) = self.exponents();
        v != Complex64::new(0.0, 0.0) || w != Complex64::new(0.0, 0.0)
    }

    /// Kernel whose exponents are the sum of both.
    pub fn compose(&self, other: &OmegaKernel) -> OmegaKernel {
        let (u1, v1, w1) = self.exponents();
        let (u2, v2, w2) = other.exponents();
        OmegaKernel::Gaussian {
            u: u1 + u2,
            v: v1 + v2,
            w: w1 + w2,
        }
    }
}

/// `A^ω = ω(∂_{ψ*}, −∂_ψ) A = exp(−u Σ∂*∂ + v Σ∂*² + w Σ∂²) A`, summed
/// until the series terminates.
pub fn omega_transform(symbol: &PolySymbol, kernel: &OmegaKernel) -> PolySymbol {
    let (u, v, w) = kernel.exponents();
    let d = symbol.modes();
    let generator = |a: &PolySymbol| -> PolySymbol {
        let mut out = PolySymbol::zero(d);
        for j in 0..d {
            let dc = a.differentiate(Wirtinger::Antiholomorphic, j);
            let dh = a.differentiate(Wirtinger::Holomorphic, j);
            out = &out + &dc.differentiate(Wirtinger::Holomorphic, j).scale(-u);
            out = &out + &dc.differentiate(Wirtinger::Antiholomorphic, j).scale(v);
            out = &out + &dh.differentiate(Wirtinger::Holomorphic, j).scale(w);
        }
        out
    };
    let mut result = symbol.clone();
    let mut term = symbol.clone();
    let mut k = 0.0;
    while !term.is_zero() {
        k += 1.0;
        term = generator(&term).scale(Complex64::new(1.0 / k, 0.0));
        result = &result + &term;
    }
    result
}
