use num_complex::Complex64;

use super::{indices_of_total, PolySymbol};
use crate::fock::MultiIndex;

/// Antiwick symbol of `Q(B)Q(C)` through contraction order `order`:
///
/// `Σ_{n≤order} Σ_{|κ|=n} (−1)ⁿ/κ! ∂*^κ B · ∂^κ C`
///
/// Antiholomorphic derivatives land on the left factor. On polynomials the
/// sum is exact once `order ≥ min(deg* B, deg C)`.
pub fn antiwick_product(b: &PolySymbol, c: &PolySymbol, order: usize) -> PolySymbol {
    assert_eq!(b.modes(), c.modes(), "mode counts differ");
    let d = b.modes();
    let zero = MultiIndex::zeros(d);
    let last = order.min(b.conj_degree().min(c.holo_degree()));
    let mut out = PolySymbol::zero(d);
    for n in 0..=last {
        let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
        for kappa in indices_of_total(d, n) {
            let db = b.partial(&kappa, &zero);
            if db.is_zero() {
                continue;
            }
            let dc = c.partial(&zero, &kappa);
            if dc.is_zero() {
                continue;
            }
            let weight = sign / kappa.factorial();
            out = &out + &(&db * &dc).scale(Complex64::new(weight, 0.0));
        }
    }
    out
}
