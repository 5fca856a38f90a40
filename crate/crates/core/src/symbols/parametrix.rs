use alloc::sync::Arc;
use alloc::vec::Vec;

use num_complex::Complex64;

use super::jet::Jet;
use super::{indices_of_total, Symbol};
use crate::error::{Error, Result};
use crate::fock::MultiIndex;

/// Default lower bound on `|A|` before the parametrix refuses to divide.
pub const DEFAULT_FLOOR: f64 = 1e-6;

/// Parametrix `P = P₀ + … + P_N` of an elliptic symbol, with
///
/// `P₀ = 1/A`, `P_m = −A⁻¹ Σ_{n=1}^{m} Σ_{|κ|=n} (−1)ⁿ/κ! ∂*^κ A ∂^κ P_{m−n}`
///
/// so that the antiwick product of `A` and `P` is 1 through order `N`.
/// Terms are assembled pointwise on Taylor jets of `A`.
#[derive(Clone)]
pub struct Parametrix {
    symbol: Arc<dyn Symbol>,
    order: usize,
    floor: f64,
}

impl core::fmt::Debug for Parametrix {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("Parametrix")
            .field("order", &self.order)
            .field("floor", &self.floor)
            .finish()
    }
}

/// Builds the order-`order` parametrix. The symbol must provide derivatives
/// up to `2 * order`; quasi symbols stop at 2, so they allow `order ≤ 1`.
pub fn parametrix_expansion(symbol: Arc<dyn Symbol>, order: usize) -> Result<Parametrix> {
    let d = symbol.modes();
    let probe = alloc::vec![Complex64::new(0.0, 0.0); d];
    let needed = 2 * order;
    let jet = Jet::of_symbol(&*symbol, &probe, needed);
    if jet.order() < needed {
        return Err(Error::MissingDerivative { order: jet.order() + 1 });
    }
    Ok(Parametrix {
        symbol,
        order,
        floor: DEFAULT_FLOOR,
    })
}

impl Parametrix {
    pub fn with_floor(mut self, floor: f64) -> Self {
        self.floor = floor;
        self
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// Jet of `P` at `psi`, exact through `extra` derivative orders.
    fn jet(&self, psi: &[Complex64], extra: usize) -> Result<Jet> {
        let d = self.symbol.modes();
        let a = Jet::of_symbol(&*self.symbol, psi, 2 * self.order + extra);
        let inv = a.recip(self.floor)?;
        let zero = MultiIndex::zeros(d);
        let mut terms: Vec<Jet> = alloc::vec![inv.clone()];
        for m in 1..=self.order {
            let mut acc: Option<Jet> = None;
            for n in 1..=m {
                let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
                for kappa in indices_of_total(d, n) {
                    let da = a.partial(&kappa, &zero);
                    let dp = terms[m - n].partial(&zero, &kappa);
                    let t = da.mul(&dp).scale(Complex64::new(sign / kappa.factorial(), 0.0));
                    acc = Some(match acc {
                        None => t,
                        Some(s) => s.add(&t),
                    });
                }
            }
            let sum = acc.unwrap_or_else(|| Jet::constant(d, Complex64::new(0.0, 0.0), usize::MAX));
            terms.push(inv.mul(&sum).scale(Complex64::new(-1.0, 0.0)));
        }
        let mut total = terms[0].clone();
        for t in &terms[1..] {
            total = total.add(t);
        }
        Ok(total)
    }

    pub fn try_eval(&self, psi: &[Complex64]) -> Result<Complex64> {
        Ok(self.jet(psi, 0)?.value())
    }

    /// Individual terms `P₀, …, P_N` at `psi`.
    pub fn terms_at(&self, psi: &[Complex64]) -> Result<Vec<Complex64>> {
        let mut out = Vec::with_capacity(self.order + 1);
        let mut prev = Complex64::new(0.0, 0.0);
        for m in 0..=self.order {
            let partial = Parametrix {
                symbol: self.symbol.clone(),
                order: m,
                floor: self.floor,
            };
            let v = partial.try_eval(psi)?;
            out.push(v - prev);
            prev = v;
        }
        Ok(out)
    }
}

impl Symbol for Parametrix {
    fn modes(&self) -> usize {
        self.symbol.modes()
    }

    /// NaN where `|A|` is below the floor, so quadrature reports the node.
    fn eval(&self, psi: &[Complex64]) -> Complex64 {
        self.try_eval(psi).unwrap_or(Complex64::new(f64::NAN, f64::NAN))
    }

    fn derivative(&self, psi: &[Complex64], conj: &[u32], holo: &[u32]) -> Option<Complex64> {
        let k = MultiIndex::new(conj.to_vec());
        let l = MultiIndex::new(holo.to_vec());
        let extra = k.total() + l.total();
        let jet = self.jet(psi, extra).ok()?;
        jet.derivative(&k, &l)
    }

    fn order(&self) -> f64 {
        -self.symbol.order()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbols::{PolySymbol, QuasiSymbol};

    fn z(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn one_plus_n() -> PolySymbol {
        &PolySymbol::number(1, 0) + &PolySymbol::constant(1, z(1.0, 0.0))
    }

    #[test]
    fn first_correction_closed_form() {
        let p = parametrix_expansion(Arc::new(one_plus_n()), 1).unwrap();
        for psi in [z(0.0, 0.0), z(0.5, -0.3), z(2.0, 1.0)] {
            let s = 1.0 + psi.norm_sqr();
            let want = 1.0 / s - psi.norm_sqr() / (s * s * s);
            assert!((p.eval(&[psi]) - want).norm() < 1e-14);
        }
    }

    #[test]
    fn constant_symbol_inverts_exactly() {
        let p = parametrix_expansion(Arc::new(PolySymbol::constant(2, z(4.0, 0.0))), 3).unwrap();
        assert_eq!(p.eval(&[z(0.3, 0.1), z(1.0, -2.0)]), z(0.25, 0.0));
    }

    #[test]
    fn below_floor_is_refused() {
        let n = PolySymbol::number(1, 0);
        let p = parametrix_expansion(Arc::new(n), 0).unwrap();
        assert!(matches!(p.try_eval(&[z(0.0, 0.0)]), Err(Error::BelowFloor { .. })));
        assert!(p.eval(&[z(0.0, 0.0)]).re.is_nan());
    }

    #[test]
    fn quasi_symbols_allow_first_order_only() {
        let q = QuasiSymbol::from_poly(one_plus_n());
        assert!(parametrix_expansion(Arc::new(q.clone()), 1).is_ok());
        assert!(matches!(
            parametrix_expansion(Arc::new(q), 2),
            Err(Error::MissingDerivative { .. })
        ));
    }

    #[test]
    fn recurrence_closes_through_each_order() {
        // Σ_{n≤N} (−1)ⁿ/n! ∂*ⁿA · ∂ⁿ P^{(N−n)} = 1 exactly, P^{(M)} = P₀ + … + P_M
        let n = PolySymbol::number(1, 0);
        let a = &(&one_plus_n() + &(&n * &n).scale(z(0.1, 0.0))) + &PolySymbol::psi(1, 0).scale(z(0.0, 0.2));
        let a = Arc::new(a);
        let psi = [z(0.8, -0.5)];
        for order in 0..=3usize {
            let mut total = z(0.0, 0.0);
            for k in 0..=order {
                let p = parametrix_expansion(a.clone(), order - k).unwrap();
                let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
                let fact: f64 = (1..=k as u32).map(f64::from).product();
                let da = a.derivative_at(&psi, &[k as u32], &[0]);
                let dp = p.derivative(&psi, &[0], &[k as u32]).unwrap();
                total += da * dp * sign / fact;
            }
            assert!((total - 1.0).norm() < 1e-12, "order {order}: {total}");
        }
    }
}
