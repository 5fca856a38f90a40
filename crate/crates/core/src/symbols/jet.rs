//! Truncated Taylor jets in `(δ*, δ)`, stored as polynomial symbols whose
//! coefficient of `δ*^k δ^l` is `∂*^k ∂^l A / (k! l!)`.

use num_complex::Complex64;

use super::{PolySymbol, Symbol};
use crate::error::{Error, Result};
use crate::fock::{enumerate_multi_indices, MultiIndex};

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Jet {
    poly: PolySymbol,
    /// Coefficients of total degree `≤ order` are exact.
    order: usize,
}

impl Jet {
    /// Jet of `symbol` at `psi` up to `order`, or up to the highest order
    /// the symbol provides if that is lower.
    pub fn of_symbol(symbol: &dyn Symbol, psi: &[Complex64], order: usize) -> Jet {
        let d = symbol.modes();
        let mut poly = PolySymbol::zero(d);
        let mut reached = order;
        'degrees: for total in 0..=order {
            let mut layer = PolySymbol::zero(d);
            for k in enumerate_multi_indices(d, total) {
                let rest = total - k.total();
                for l in enumerate_multi_indices(d, rest)
                    .into_iter()
                    .filter(|l| l.total() == rest)
                {
                    match symbol.derivative(psi, k.as_slice(), l.as_slice()) {
                        Some(v) => {
                            let w = v / (k.factorial() * l.factorial());
                            layer.add_term(w, k.clone(), l);
                        }
                        None => {
                            reached = total.saturating_sub(1);
                            break 'degrees;
                        }
                    }
                }
            }
            poly = &poly + &layer;
        }
        Jet { poly, order: reached }
    }

    pub fn constant(modes: usize, value: Complex64, order: usize) -> Jet {
        Jet {
            poly: PolySymbol::constant(modes, value),
            order,
        }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn value(&self) -> Complex64 {
        let z = MultiIndex::zeros(self.poly.modes());
        self.poly.coefficient(&z, &z)
    }

    /// `∂*^k ∂^l` at the expansion point, if within the exact order.
    pub fn derivative(&self, conj: &MultiIndex, holo: &MultiIndex) -> Option<Complex64> {
        if conj.total() + holo.total() > self.order {
            return None;
        }
        Some(self.poly.coefficient(conj, holo) * conj.factorial() * holo.factorial())
    }

    pub fn partial(&self, conj: &MultiIndex, holo: &MultiIndex) -> Jet {
        let drop = conj.total() + holo.total();
        Jet {
            poly: self.poly.partial(conj, holo),
            order: self.order.saturating_sub(drop),
        }
    }

    pub fn mul(&self, other: &Jet) -> Jet {
        let order = self.order.min(other.order);
        Jet {
            poly: (&self.poly.truncate(order) * &other.poly.truncate(order)).truncate(order),
            order,
        }
    }

    pub fn add(&self, other: &Jet) -> Jet {
        let order = self.order.min(other.order);
        Jet {
            poly: (&self.poly + &other.poly).truncate(order),
            order,
        }
    }

    pub fn scale(&self, s: Complex64) -> Jet {
        Jet {
            poly: self.poly.scale(s),
            order: self.order,
        }
    }

    /// `1/A` through the geometric series in `A/A(0) − 1`.
    pub fn recip(&self, floor: f64) -> Result<Jet> {
        let a0 = self.value();
        if !(a0.norm() >= floor) {
            return Err(Error::BelowFloor {
                value: a0.norm(),
                floor,
            });
        }
        let d = self.poly.modes();
        let inv0 = Complex64::new(1.0, 0.0) / a0;
        let eps = (&self.poly.scale(inv0) - &PolySymbol::constant(d, Complex64::new(1.0, 0.0))).truncate(self.order);
        let mut sum = PolySymbol::constant(d, Complex64::new(1.0, 0.0));
        let mut power = sum.clone();
        for k in 1..=self.order {
            power = (&power * &eps).truncate(self.order);
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            sum = &sum + &power.scale(Complex64::new(sign, 0.0));
        }
        Ok(Jet {
            poly: sum.scale(inv0),
            order: self.order,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reciprocal_jet_matches_closed_form() {
        // A = 1 + |ψ|², 1/A has ∂(1/A) = −ψ*/A², ∂*∂(1/A) = −1/A² + 2|ψ|²/A³
        let a = &PolySymbol::number(1, 0) + &PolySymbol::constant(1, Complex64::new(1.0, 0.0));
        let p = [Complex64::new(0.6, 0.3)];
        let jet = Jet::of_symbol(&a, &p, 4).recip(1e-6).unwrap();
        let s = 1.0 + p[0].norm_sqr();
        let one = MultiIndex::new(alloc::vec![1]);
        let zero = MultiIndex::new(alloc::vec![0]);
        assert!((jet.value() - 1.0 / s).norm() < 1e-15);
        assert!((jet.derivative(&zero, &one).unwrap() + p[0].conj() / (s * s)).norm() < 1e-15);
        let want = -1.0 / (s * s) + 2.0 * p[0].norm_sqr() / (s * s * s);
        assert!((jet.derivative(&one, &one).unwrap() - want).norm() < 1e-14);
    }
}
