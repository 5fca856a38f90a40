//! Truncated multi-mode Fock space in the occupation-number representation.
//!
//! The basis keeps every multi-index with total occupation at most
//! `cutoff + pad`. Operators are assembled on this padded basis and results
//! are read off on the leading unpadded block (total occupation at most
//! `cutoff`); the enumeration is total-degree first, so that block is a
//! prefix of the basis.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::gauss;

/// Largest basis dimension accepted by default. Dense matrices of this size
/// take about 270 MB.
pub const DEFAULT_MAX_DIMENSION: usize = 4096;

/// Tolerance for the Hermiticity flag on [`FockOperator`].
pub const HERMITIAN_TOLERANCE: f64 = 1e-12;

/// Number of modes, retained occupation, and the padding carried past it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeConfig {
    pub modes: usize,
    pub cutoff: usize,
    pub pad: usize,
    /// Upper bound on `‖α‖²` for coherent labels; defaults to `cutoff / 4`.
    pub safe_radius_sq: f64,
    pub max_dimension: usize,
}

impl ModeConfig {
    /// Config with the default padding `max(4, ⌈cutoff/4⌉)`.
    pub fn new(modes: usize, cutoff: usize) -> Result<Self> {
        Self::with_pad(modes, cutoff, Self::default_pad(cutoff))
    }

    pub fn with_pad(modes: usize, cutoff: usize, pad: usize) -> Result<Self> {
        let config = ModeConfig {
            modes,
            cutoff,
            pad,
            safe_radius_sq: cutoff as f64 / 4.0,
            max_dimension: DEFAULT_MAX_DIMENSION,
        };
        config.validate()?;
        Ok(config)
    }

    pub fn default_pad(cutoff: usize) -> usize {
        core::cmp::max(4, cutoff.div_ceil(4))
    }

    pub fn safe_radius_sq(mut self, radius_sq: f64) -> Result<Self> {
        if !(radius_sq.is_finite() && radius_sq >= 0.0) {
            return Err(Error::InvalidConfig(format!(
                "safe radius^2 must be finite and non-negative, got {radius_sq}"
            )));
        }
        self.safe_radius_sq = radius_sq;
        Ok(self)
    }

    pub fn max_dimension(mut self, limit: usize) -> Self {
        self.max_dimension = limit;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.modes == 0 {
            return Err(Error::InvalidConfig("at least one mode is required".into()));
        }
        Ok(())
    }

    /// Highest total occupation carried in the padded basis.
    pub fn capacity(&self) -> usize {
        self.cutoff + self.pad
    }

    /// `C(capacity + modes, modes)`, or `None` on overflow.
    pub fn dimension(&self) -> Option<usize> {
        binomial(self.capacity() + self.modes, self.modes)
    }

    pub fn unpadded_dimension(&self) -> Option<usize> {
        binomial(self.cutoff + self.modes, self.modes)
    }
}

fn binomial(n: usize, k: usize) -> Option<usize> {
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.checked_mul((n - i) as u128)? / (i as u128 + 1);
        if acc > usize::MAX as u128 {
            return None;
        }
    }
    Some(acc as usize)
}

/// Occupation numbers `(n_1, …, n_d)`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MultiIndex(Vec<u32>);

impl MultiIndex {
    pub fn new(occupations: Vec<u32>) -> Self {
        MultiIndex(occupations)
    }

    pub fn zeros(modes: usize) -> Self {
        MultiIndex(vec![0; modes])
    }

    pub fn unit(modes: usize, j: usize) -> Self {
        let mut m = Self::zeros(modes);
        m.0[j] = 1;
        m
    }

    pub fn modes(&self) -> usize {
        self.0.len()
    }

    pub fn total(&self) -> usize {
        self.0.iter().map(|&n| n as usize).sum()
    }

    pub fn as_slice(&self) -> &[u32] {
        &self.0
    }

    pub fn get(&self, j: usize) -> u32 {
        self.0[j]
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&n| n == 0)
    }

    /// `Π n_j!`
    pub fn factorial(&self) -> f64 {
        self.0
            .iter()
            .map(|&n| (1..=n).map(f64::from).product::<f64>())
            .product()
    }

    pub fn checked_sub(&self, other: &MultiIndex) -> Option<MultiIndex> {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(&a, &b)| a.checked_sub(b))
            .collect::<Option<Vec<_>>>()
            .map(MultiIndex)
    }

    pub fn add(&self, other: &MultiIndex) -> MultiIndex {
        MultiIndex(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub(crate) fn with(&self, j: usize, value: u32) -> MultiIndex {
        let mut m = self.clone();
        m.0[j] = value;
        m
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (i, n) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{n}")?;
        }
        f.write_str(")")
    }
}

/// All multi-indices over `modes` with total at most `max_total`, ordered by
/// total degree and lexicographically within a degree.
pub fn enumerate_multi_indices(modes: usize, max_total: usize) -> Vec<MultiIndex> {
    fn fill(prefix: &mut Vec<u32>, remaining_modes: usize, total: u32, out: &mut Vec<MultiIndex>) {
        if remaining_modes == 1 {
            prefix.push(total);
            out.push(MultiIndex(prefix.clone()));
            prefix.pop();
            return;
        }
        for first in 0..=total {
            prefix.push(first);
            fill(prefix, remaining_modes - 1, total - first, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    let mut prefix = Vec::with_capacity(modes);
    for total in 0..=max_total as u32 {
        fill(&mut prefix, modes, total, &mut out);
    }
    out
}

/// Enumerated truncated basis with ladder lookup tables.
#[derive(Debug, PartialEq)]
pub struct FockBasis {
    config: ModeConfig,
    indices: Vec<MultiIndex>,
    lookup: BTreeMap<MultiIndex, usize>,
    unpadded: usize,
    /// `raise[j][p]` = position of `n + e_j` for the index at `p`.
    raise: Vec<Vec<Option<usize>>>,
}

impl FockBasis {
    pub fn new(config: ModeConfig) -> Result<Arc<Self>> {
        config.validate()?;
        let dimension = config.dimension().unwrap_or(usize::MAX);
        if dimension > config.max_dimension {
            return Err(Error::DimensionOverflow {
                dimension,
                limit: config.max_dimension,
            });
        }
        let indices = enumerate_multi_indices(config.modes, config.capacity());
        debug_assert_eq!(indices.len(), dimension);
        let lookup: BTreeMap<_, _> = indices.iter().enumerate().map(|(p, n)| (n.clone(), p)).collect();
        let unpadded = indices.iter().take_while(|n| n.total() <= config.cutoff).count();
        let raise = (0..config.modes)
            .map(|j| {
                indices
                    .iter()
                    .map(|n| lookup.get(&n.with(j, n.get(j) + 1)).copied())
                    .collect()
            })
            .collect();
        Ok(Arc::new(FockBasis {
            config,
            indices,
            lookup,
            unpadded,
            raise,
        }))
    }

    pub fn config(&self) -> &ModeConfig {
        &self.config
    }

    pub fn modes(&self) -> usize {
        self.config.modes
    }

    pub fn dim(&self) -> usize {
        self.indices.len()
    }

    /// Dimension of the block with total occupation at most `cutoff`.
    pub fn unpadded_dim(&self) -> usize {
        self.unpadded
    }

    pub fn indices(&self) -> &[MultiIndex] {
        &self.indices
    }

    pub fn multi_index(&self, position: usize) -> &MultiIndex {
        &self.indices[position]
    }

    pub fn position(&self, index: &MultiIndex) -> Option<usize> {
        self.lookup.get(index).copied()
    }

    fn check_mode(&self, j: usize) -> Result<()> {
        if j >= self.modes() {
            return Err(Error::InvalidMode {
                index: j,
                modes: self.modes(),
            });
        }
        Ok(())
    }

    /// `a†_j` (zero-based mode); states pushed past the capacity are dropped.
    pub fn creation(self: &Arc<Self>, j: usize) -> Result<FockOperator> {
        self.check_mode(j)?;
        let dim = self.dim();
        let mut m = DMatrix::zeros(dim, dim);
        for (p, n) in self.indices.iter().enumerate() {
            if let Some(q) = self.raise[j][p] {
                m[(q, p)] = Complex64::new(f64::from(n.get(j) + 1).sqrt(), 0.0);
            }
        }
        Ok(FockOperator::new(m, self.clone()))
    }

    /// `a_j`, built as the adjoint of [`Self::creation`].
    pub fn annihilation(self: &Arc<Self>, j: usize) -> Result<FockOperator> {
        let c = self.creation(j)?;
        Ok(FockOperator::new(c.matrix.adjoint(), self.clone()))
    }

    pub fn vacuum(self: &Arc<Self>) -> FockVector {
        let mut v = DVector::zeros(self.dim());
        v[0] = Complex64::new(1.0, 0.0);
        FockVector::new(v, self.clone())
    }

    pub fn number_state(self: &Arc<Self>, index: &MultiIndex) -> Option<FockVector> {
        let p = self.position(index)?;
        let mut v = DVector::zeros(self.dim());
        v[p] = Complex64::new(1.0, 0.0);
        Some(FockVector::new(v, self.clone()))
    }

    /// `q⁺(α) v = Σ_j α_j a†_j v`, matrix-free.
    pub fn apply_creation_combination(&self, alpha: &[Complex64], v: &DVector<Complex64>) -> DVector<Complex64> {
        let mut out = DVector::zeros(self.dim());
        for (p, n) in self.indices.iter().enumerate() {
            let c = v[p];
            if c == Complex64::new(0.0, 0.0) {
                continue;
            }
            for (j, &a) in alpha.iter().enumerate() {
                if let Some(q) = self.raise[j][p] {
                    out[q] += a * c * f64::from(n.get(j) + 1).sqrt();
                }
            }
        }
        out
    }

    /// `q⁺(α)ⁿ Ω₀` for `n ≤ cutoff`.
    pub fn hermite_monomial(self: &Arc<Self>, alpha: &CoherentAmplitude, n: usize) -> Result<FockVector> {
        self.check_amplitude(alpha)?;
        if n > self.config.cutoff {
            return Err(Error::OrderExceedsCutoff {
                order: n,
                cutoff: self.config.cutoff,
            });
        }
        let mut v = self.vacuum().coeffs;
        for _ in 0..n {
            v = self.apply_creation_combination(alpha.as_slice(), &v);
        }
        Ok(FockVector::new(v, self.clone()))
    }

    fn check_amplitude(&self, alpha: &CoherentAmplitude) -> Result<()> {
        if alpha.modes() != self.modes() {
            return Err(Error::ModeCountMismatch {
                expected: self.modes(),
                found: alpha.modes(),
            });
        }
        Ok(())
    }

    /// `Ω_α = Σ_n αⁿ/√(n!) |n⟩` on the padded basis, with the squared norm of
    /// the discarded tail.
    pub fn coherent_vector(self: &Arc<Self>, alpha: &CoherentAmplitude) -> Result<CoherentVector> {
        self.check_amplitude(alpha)?;
        let norm_sq = alpha.norm_sq();
        if norm_sq > self.config.safe_radius_sq {
            return Err(Error::OutsideSafeRadius {
                norm_sq,
                limit: self.config.safe_radius_sq,
            });
        }
        Ok(self.coherent_vector_unchecked(alpha))
    }

    pub(crate) fn coherent_vector_unchecked(self: &Arc<Self>, alpha: &CoherentAmplitude) -> CoherentVector {
        let cap = self.config.capacity();
        // powers[j][k] = α_j^k / √(k!)
        let powers: Vec<Vec<Complex64>> = alpha
            .as_slice()
            .iter()
            .map(|&a| {
                let mut row = Vec::with_capacity(cap + 1);
                let mut t = Complex64::new(1.0, 0.0);
                row.push(t);
                for k in 1..=cap {
                    t = t * a / (k as f64).sqrt();
                    row.push(t);
                }
                row
            })
            .collect();
        let coeffs = DVector::from_iterator(
            self.dim(),
            self.indices.iter().map(|n| {
                n.as_slice()
                    .iter()
                    .enumerate()
                    .map(|(j, &k)| powers[j][k as usize])
                    .product::<Complex64>()
            }),
        );
        CoherentVector {
            vector: FockVector::new(coeffs, self.clone()),
            tail_norm_sq: coherent_tail(alpha.norm_sq(), cap),
        }
    }
}

/// `Σ_{N > capacity} rᴺ / N!`, the squared norm lost by truncating a coherent
/// vector with `‖α‖² = r`.
pub fn coherent_tail(r: f64, capacity: usize) -> f64 {
    if r == 0.0 {
        return 0.0;
    }
    // first term r^(c+1)/(c+1)! in log space
    let c1 = capacity as f64 + 1.0;
    let log_first = c1 * r.ln() - ln_factorial(capacity + 1);
    let mut term = log_first.exp();
    let mut total = 0.0;
    let mut n = c1;
    while term > 0.0 {
        total += term;
        n += 1.0;
        term *= r / n;
        if term < total * 1e-17 {
            break;
        }
    }
    total
}

fn ln_factorial(n: usize) -> f64 {
    (2..=n).map(|k| (k as f64).ln()).sum()
}

/// Complex label `α ∈ ℂᵈ` of a coherent state.
#[derive(Debug, Clone, PartialEq)]
pub struct CoherentAmplitude(Vec<Complex64>);

impl CoherentAmplitude {
    pub fn new(alpha: Vec<Complex64>) -> Result<Self> {
        if alpha.is_empty() {
            return Err(Error::InvalidConfig(
                "coherent amplitude needs at least one mode".into(),
            ));
        }
        if alpha.iter().any(|a| !(a.re.is_finite() && a.im.is_finite())) {
            return Err(Error::InvalidConfig("coherent amplitude has non-finite entries".into()));
        }
        Ok(CoherentAmplitude(alpha))
    }

    pub fn single(alpha: Complex64) -> Result<Self> {
        Self::new(vec![alpha])
    }

    pub fn modes(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.0
    }

    pub fn norm_sq(&self) -> f64 {
        self.0.iter().map(|a| a.norm_sqr()).sum()
    }

    /// `Σ_j conj(α_j) β_j`
    pub fn dot(&self, other: &CoherentAmplitude) -> Complex64 {
        self.0.iter().zip(&other.0).map(|(a, b)| a.conj() * b).sum()
    }

    /// Image under a linear mode map: `(cα)_i = Σ_j c_ij α_j`.
    pub fn mapped(&self, c: &DMatrix<Complex64>) -> Result<Self> {
        if c.nrows() != self.modes() || c.ncols() != self.modes() {
            return Err(Error::ModeCountMismatch {
                expected: self.modes(),
                found: c.nrows(),
            });
        }
        let v = c * DVector::from_column_slice(&self.0);
        Self::new(v.iter().copied().collect())
    }
}

/// A state on a truncated basis.
#[derive(Debug, Clone, PartialEq)]
pub struct FockVector {
    pub coeffs: DVector<Complex64>,
    basis: Arc<FockBasis>,
}

impl FockVector {
    pub fn new(coeffs: DVector<Complex64>, basis: Arc<FockBasis>) -> Self {
        assert_eq!(
            coeffs.len(),
            basis.dim(),
            "vector length must equal the basis dimension"
        );
        FockVector { coeffs, basis }
    }

    pub fn basis(&self) -> &Arc<FockBasis> {
        &self.basis
    }

    pub fn config(&self) -> &ModeConfig {
        self.basis.config()
    }

    pub fn norm_sq(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum()
    }

    /// Copy restricted to the unpadded block, zero elsewhere.
    pub fn unpadded(&self) -> FockVector {
        let mut v = self.coeffs.clone();
        for c in v.iter_mut().skip(self.basis.unpadded_dim()) {
            *c = Complex64::new(0.0, 0.0);
        }
        FockVector::new(v, self.basis.clone())
    }
}

/// `⟨x|y⟩`, antilinear in the left argument.
pub fn inner_product(x: &FockVector, y: &FockVector) -> Result<Complex64> {
    if x.config() != y.config() {
        return Err(Error::ConfigMismatch);
    }
    Ok(x.coeffs.dotc(&y.coeffs))
}

/// Truncated coherent vector plus the squared norm of the dropped tail.
#[derive(Debug, Clone, PartialEq)]
pub struct CoherentVector {
    pub vector: FockVector,
    pub tail_norm_sq: f64,
}

/// Dense operator on a truncated basis.
#[derive(Debug, Clone, PartialEq)]
pub struct FockOperator {
    pub matrix: DMatrix<Complex64>,
    basis: Arc<FockBasis>,
    hermitian: bool,
}

impl FockOperator {
    pub fn new(matrix: DMatrix<Complex64>, basis: Arc<FockBasis>) -> Self {
        assert!(
            matrix.nrows() == basis.dim() && matrix.ncols() == basis.dim(),
            "operator must be square over the basis"
        );
        FockOperator {
            matrix,
            basis,
            hermitian: false,
        }
    }

    pub fn identity(basis: &Arc<FockBasis>) -> Self {
        let dim = basis.dim();
        let mut op = Self::new(DMatrix::identity(dim, dim), basis.clone());
        op.hermitian = true;
        op
    }

    /// Replaces the matrix by `(M + M†)/2` and flags it Hermitian.
    pub(crate) fn hermitized(matrix: DMatrix<Complex64>, basis: Arc<FockBasis>) -> Self {
        let adjoint = matrix.adjoint();
        let mut op = Self::new((matrix + adjoint) * Complex64::new(0.5, 0.0), basis);
        op.hermitian = true;
        op
    }

    pub fn basis(&self) -> &Arc<FockBasis> {
        &self.basis
    }

    pub fn config(&self) -> &ModeConfig {
        self.basis.config()
    }

    /// `max |M - M†|`
    pub fn hermiticity_defect(&self) -> f64 {
        let n = self.matrix.nrows();
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in i..n {
                worst = worst.max((self.matrix[(i, j)] - self.matrix[(j, i)].conj()).norm());
            }
        }
        worst
    }

    /// Sets the Hermitian flag after checking the defect.
    pub fn mark_hermitian(mut self) -> Result<Self> {
        let defect = self.hermiticity_defect();
        if defect > HERMITIAN_TOLERANCE {
            return Err(Error::NotHermitian { defect });
        }
        self.hermitian = true;
        Ok(self)
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermitian
    }

    pub fn unpadded_block(&self) -> DMatrix<Complex64> {
        let k = self.basis.unpadded_dim();
        self.matrix.view((0, 0), (k, k)).into_owned()
    }

    pub fn compose(&self, other: &FockOperator) -> Result<FockOperator> {
        if self.config() != other.config() {
            return Err(Error::ConfigMismatch);
        }
        Ok(FockOperator::new(&self.matrix * &other.matrix, self.basis.clone()))
    }

    pub fn apply(&self, v: &FockVector) -> Result<FockVector> {
        if self.config() != v.config() {
            return Err(Error::ConfigMismatch);
        }
        Ok(FockVector::new(&self.matrix * &v.coeffs, self.basis.clone()))
    }

    /// `M^n` by repeated squaring.
    pub fn power(&self, n: usize) -> FockOperator {
        let dim = self.matrix.nrows();
        let mut result = DMatrix::identity(dim, dim);
        let mut base = self.matrix.clone();
        let mut e = n;
        while e > 0 {
            if e & 1 == 1 {
                result = &result * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        FockOperator::new(result, self.basis.clone())
    }

    /// `[A, B] = AB - BA`
    pub fn commutator(&self, other: &FockOperator) -> Result<FockOperator> {
        let ab = self.compose(other)?;
        let ba = other.compose(self)?;
        Ok(FockOperator::new(ab.matrix - ba.matrix, self.basis.clone()))
    }
}

/// Largest singular value of a dense complex matrix.
pub fn spectral_norm(m: &DMatrix<Complex64>) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.clone().singular_values().iter().fold(0.0f64, |acc, &s| acc.max(s))
}

/// Weighted diagnostic norm `∫ e^{-|ψ|²} (1 + ‖ψ‖₋)^s |Ψ(ψ*)|² dμ` with
/// `‖ψ‖₋² = Σ_j |ψ_j|²/(1 + h_j)` and `Ψ(ψ*) = ⟨Ω_ψ|x⟩`.
///
/// Integrated in per-mode polar coordinates; the radial variable `u = |ψ_j|`
/// uses composite Gauss-Legendre panels so that the `‖ψ‖₋^s` kink at the
/// origin does not spoil convergence in one mode.
pub fn sobolev_diagnostic_norm(x: &FockVector, s: f64, h_spectrum: &[f64]) -> Result<f64> {
    let basis = x.basis();
    let d = basis.modes();
    if h_spectrum.len() != d {
        return Err(Error::ModeCountMismatch {
            expected: d,
            found: h_spectrum.len(),
        });
    }
    if h_spectrum.iter().any(|h| !(h.is_finite() && *h >= 0.0)) {
        return Err(Error::InvalidConfig(
            "h spectrum must be finite and non-negative".into(),
        ));
    }
    let cap = basis.config().capacity();
    let upper = (cap as f64).sqrt() + 8.0;
    let panels = upper.ceil() as usize;
    let width = upper / panels as f64;
    let gl = gauss::legendre(16);
    let mut radial = Vec::with_capacity(panels * gl.len());
    for p in 0..panels {
        let a = p as f64 * width;
        for (&t, &w) in gl.nodes.iter().zip(&gl.weights) {
            let u = a + 0.5 * width * (t + 1.0);
            // dμ = e^{-u²} 2u du dθ/2π
            radial.push((u, 0.5 * width * w * 2.0 * u * (-u * u).exp()));
        }
    }
    let angles = 2 * cap + 2;
    let per_mode = radial.len() * angles;
    let nodes = per_mode
        .checked_pow(d as u32)
        .filter(|&n| n <= 20_000_000)
        .ok_or_else(|| Error::Infeasible(format!("diagnostic norm would need {per_mode}^{d} nodes")))?;

    // per-mode tables of ψ̄^k/√k! at each (radius, angle)
    let axis: Vec<(Complex64, f64)> = radial
        .iter()
        .flat_map(|&(u, w)| {
            (0..angles).map(move |a| {
                let theta = 2.0 * core::f64::consts::PI * a as f64 / angles as f64;
                (Complex64::from_polar(u, theta), w / angles as f64)
            })
        })
        .collect();
    let powers: Vec<Vec<Complex64>> = axis
        .iter()
        .map(|&(psi, _)| {
            let mut row = Vec::with_capacity(cap + 1);
            let mut t = Complex64::new(1.0, 0.0);
            row.push(t);
            for k in 1..=cap {
                t = t * psi.conj() / (k as f64).sqrt();
                row.push(t);
            }
            row
        })
        .collect();

    let mut sum = crate::quadrature::PairwiseSum::default();
    let mut digits = vec![0usize; d];
    for _ in 0..nodes {
        let mut weight = 1.0;
        let mut minus_sq = 0.0;
        for (j, &a) in digits.iter().enumerate() {
            weight *= axis[a].1;
            minus_sq += axis[a].0.norm_sqr() / (1.0 + h_spectrum[j]);
        }
        let psi_val: Complex64 = basis
            .indices()
            .iter()
            .zip(x.coeffs.iter())
            .map(|(n, c)| {
                let mono: Complex64 = n
                    .as_slice()
                    .iter()
                    .enumerate()
                    .map(|(j, &k)| powers[digits[j]][k as usize])
                    .product();
                c * mono
            })
            .sum();
        let factor = (1.0 + minus_sq.sqrt()).powf(s);
        sum.push(weight * factor * psi_val.norm_sqr());
        for j in (0..d).rev() {
            digits[j] += 1;
            if digits[j] < per_mode {
                break;
            }
            digits[j] = 0;
        }
    }
    Ok(sum.total())
}
