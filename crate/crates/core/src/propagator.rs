//! Time-sliced coherent-state propagators.
//!
//! The kernel `⟨Ω_α|e^{-iQ(A)t}|Ω_β⟩ e^{-β*β}` is approximated by
//! `⟨Ω_α|S_nⁿ|Ω_β⟩ e^{-β*β}` where `S_n = Q(e^{-iAt/n})` (exponential
//! slices) or `S_n = Q((1 + iAt/n)^{-1})` (resolvent slices), and compared
//! with the eigendecomposition of `Q(A)`.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::fock::{spectral_norm, CoherentAmplitude, FockBasis, FockOperator, ModeConfig};
use crate::quadrature::{PairwiseSum, PhaseGrid, QuadratureSpec};
use crate::quantize::{quantize_poly, real_on_grid, Quantizer};
use crate::symbols::{PolySymbol, QuasiSymbol, Symbol};

/// Largest accepted `max |M − M†|` for a generator.
pub const GENERATOR_HERMITIAN_TOLERANCE: f64 = 1e-10;

/// Largest accepted `max |c†c − I|` for a mode mixing.
pub const UNITARY_TOLERANCE: f64 = 1e-12;

/// Rate fits with an RMS residual at or above this are not trusted.
pub const MAX_FIT_RESIDUAL: f64 = 0.05;

/// Node pairs a direct path integral may visit.
pub const PATH_PAIR_LIMIT: usize = 500_000_000;

/// Slice symbol family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SliceScheme {
    /// `e^{-iAt/n}`
    Exponential,
    /// `(1 + iAt/n)^{-1}`
    Resolvent,
}

impl SliceScheme {
    /// Slice symbol value for symbol value `a` and step `ε = t/n`.
    pub fn apply(self, a: Complex64, step: f64) -> Complex64 {
        let i = Complex64::new(0.0, 1.0);
        match self {
            SliceScheme::Exponential => (-i * a * step).exp(),
            SliceScheme::Resolvent => Complex64::new(1.0, 0.0) / (Complex64::new(1.0, 0.0) + i * a * step),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            SliceScheme::Exponential => "exponential",
            SliceScheme::Resolvent => "resolvent",
        }
    }
}

/// Generator symbol of an evolution job.
#[derive(Debug, Clone)]
pub enum JobSymbol {
    Poly(PolySymbol),
    Quasi(QuasiSymbol),
}

impl From<PolySymbol> for JobSymbol {
    fn from(p: PolySymbol) -> Self {
        JobSymbol::Poly(p)
    }
}

impl From<QuasiSymbol> for JobSymbol {
    fn from(q: QuasiSymbol) -> Self {
        JobSymbol::Quasi(q)
    }
}

impl Symbol for JobSymbol {
    fn modes(&self) -> usize {
        match self {
            JobSymbol::Poly(p) => p.modes(),
            JobSymbol::Quasi(q) => q.modes(),
        }
    }

    fn eval(&self, psi: &[Complex64]) -> Complex64 {
        match self {
            JobSymbol::Poly(p) => p.eval(psi),
            JobSymbol::Quasi(q) => q.eval(psi),
        }
    }

    fn derivative(&self, psi: &[Complex64], conj: &[u32], holo: &[u32]) -> Option<Complex64> {
        match self {
            JobSymbol::Poly(p) => Symbol::derivative(p, psi, conj, holo),
            JobSymbol::Quasi(q) => q.derivative(psi, conj, holo),
        }
    }

    fn order(&self) -> f64 {
        match self {
            JobSymbol::Poly(p) => Symbol::order(p),
            JobSymbol::Quasi(q) => q.order(),
        }
    }
}

impl JobSymbol {
    /// `ψ ↦ A(c†ψ)`, the symbol seen after the mode mixing `ψ ↦ cψ`.
    pub fn mixed(&self, c: &DMatrix<Complex64>) -> Result<JobSymbol> {
        let inverse = c.adjoint();
        match self {
            JobSymbol::Poly(p) => Ok(JobSymbol::Poly(p.substitute_linear(&inverse)?)),
            JobSymbol::Quasi(q) => {
                let base = q.clone();
                let d = base.modes();
                let label = format!("{} (mixed)", base.label());
                Ok(JobSymbol::Quasi(
                    QuasiSymbol::new(d, base.order(), move |x| {
                        let y: Vec<Complex64> = (0..d).map(|i| (0..d).map(|j| inverse[(i, j)] * x[j]).sum()).collect();
                        base.eval(&y)
                    })
                    .with_label(label),
                ))
            }
        }
    }
}

/// The slice symbol `e^{-iAt/n}` or `(1 + iAt/n)^{-1}` as a quasi symbol of
/// order 0.
pub fn slice_symbol(symbol: &JobSymbol, t: f64, n: usize, scheme: SliceScheme) -> QuasiSymbol {
    let a = symbol.clone();
    let step = t / n as f64;
    QuasiSymbol::new(symbol.modes(), 0.0, move |x| scheme.apply(a.eval(x), step)).with_label(scheme.name())
}

/// `Q` of the slice symbol.
pub fn slice_operator(
    symbol: &JobSymbol,
    t: f64,
    n: usize,
    scheme: SliceScheme,
    quantizer: &Quantizer<'_>,
) -> Result<FockOperator> {
    if n == 0 {
        return Err(Error::InvalidConfig("slice count must be at least 1".into()));
    }
    ensure_real(symbol, quantizer.grid())?;
    quantizer.quantize(&slice_symbol(symbol, t, n, scheme))
}

fn ensure_real(symbol: &JobSymbol, grid: &PhaseGrid) -> Result<()> {
    let real = match symbol {
        JobSymbol::Poly(p) => p.is_real(),
        JobSymbol::Quasi(q) => real_on_grid(q, grid),
    };
    if real {
        Ok(())
    } else {
        Err(Error::NotReal)
    }
}

/// `Q(A)`: exact for polynomials, by quadrature otherwise.
pub fn generator(symbol: &JobSymbol, quantizer: &Quantizer<'_>) -> Result<FockOperator> {
    match symbol {
        JobSymbol::Poly(p) => quantize_poly(p, quantizer.basis()),
        JobSymbol::Quasi(q) => quantizer.quantize(q),
    }
}

/// `e^{-iQt}` through the eigendecomposition of the Hermitian matrix `Q`.
pub fn exact_propagator(q: &FockOperator, t: f64) -> Result<FockOperator> {
    let defect = q.hermiticity_defect();
    if !(defect < GENERATOR_HERMITIAN_TOLERANCE) {
        return Err(Error::NotHermitian { defect });
    }
    let basis = q.basis().clone();
    if t == 0.0 {
        let dim = basis.dim();
        return Ok(FockOperator::new(DMatrix::identity(dim, dim), basis));
    }
    let herm = (&q.matrix + q.matrix.adjoint()) * Complex64::new(0.5, 0.0);
    let eig = herm.symmetric_eigen();
    let phases = DVector::from_iterator(
        eig.eigenvalues.len(),
        eig.eigenvalues.iter().map(|&l| Complex64::new(0.0, -l * t).exp()),
    );
    let v = &eig.eigenvectors;
    let mut scaled = v.clone();
    for (j, mut col) in scaled.column_iter_mut().enumerate() {
        col *= phases[j];
    }
    Ok(FockOperator::new(scaled * v.adjoint(), basis))
}

/// Everything one time-slicing study needs.
#[derive(Debug, Clone)]
pub struct EvolutionJob {
    pub symbol: JobSymbol,
    pub t: f64,
    pub n_list: Vec<usize>,
    pub alpha: CoherentAmplitude,
    pub beta: CoherentAmplitude,
    pub config: ModeConfig,
    pub grid: QuadratureSpec,
    pub scheme: SliceScheme,
}

impl EvolutionJob {
    pub fn validate(&self) -> Result<()> {
        self.config.validate()?;
        self.grid.validate()?;
        let d = self.config.modes;
        for (what, found) in [
            ("symbol", self.symbol.modes()),
            ("alpha", self.alpha.modes()),
            ("beta", self.beta.modes()),
        ] {
            if found != d {
                return Err(Error::InvalidJob(format!(
                    "{what} has {found} mode(s), the basis has {d}"
                )));
            }
        }
        if !self.t.is_finite() {
            return Err(Error::InvalidJob(format!("time {} is not finite", self.t)));
        }
        if self.n_list.is_empty() {
            return Err(Error::InvalidJob("n_list is empty".into()));
        }
        if self.n_list[0] == 0 {
            return Err(Error::InvalidJob("slice counts must be at least 1".into()));
        }
        if self.n_list.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidJob("n_list must be strictly increasing".into()));
        }
        if let JobSymbol::Poly(p) = &self.symbol {
            if !p.is_real() {
                return Err(Error::NotReal);
            }
        }
        Ok(())
    }
}

/// Least-squares line through `(log n, log error)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateFit {
    pub slope: f64,
    pub intercept: f64,
    /// RMS of the fit residuals in log space.
    pub residual: f64,
    /// Number of trailing points used.
    pub points: usize,
}

impl RateFit {
    pub fn is_trusted(&self) -> bool {
        self.residual < MAX_FIT_RESIDUAL
    }
}

/// Fits the trailing `max(3, ⌈len/2⌉)` points of `(n, error)`.
pub fn fit_rate(points: &[(usize, f64)]) -> Result<RateFit> {
    if points.len() < 3 {
        return Err(Error::TooFewPoints(points.len()));
    }
    let used = 3.max(points.len().div_ceil(2));
    let tail = &points[points.len() - used..];
    if tail.iter().any(|&(n, e)| n == 0 || !(e > 0.0 && e.is_finite())) {
        return Err(Error::InvalidConfig(
            "rate fit needs positive slice counts and errors".into(),
        ));
    }
    let xs: Vec<f64> = tail.iter().map(|&(n, _)| (n as f64).ln()).collect();
    let ys: Vec<f64> = tail.iter().map(|&(_, e)| e.ln()).collect();
    let m = used as f64;
    let mx = xs.iter().sum::<f64>() / m;
    let my = ys.iter().sum::<f64>() / m;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| {
            let r = y - (intercept + slope * x);
            r * r
        })
        .sum();
    Ok(RateFit {
        slope,
        intercept,
        residual: (rss / m).sqrt(),
        points: used,
    })
}

/// Error sources that the slicing error cannot see.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncationReport {
    /// `‖Ω_α − P Ω_α‖`, the norm cut off by the padded basis.
    pub alpha_tail: f64,
    pub beta_tail: f64,
    /// `max |Q(1) − I|` of the grid; zero when no quadrature ran.
    pub identity_defect: f64,
    /// Rounding allowance for the matrix pipeline.
    pub rounding_floor: f64,
    /// Bound on the change of any reported kernel value from truncation,
    /// quadrature and rounding together.
    pub estimate: f64,
}

impl TruncationReport {
    fn new(
        alpha: &CoherentAmplitude,
        beta: &CoherentAmplitude,
        basis: &FockBasis,
        identity_defect: f64,
        n_max: usize,
    ) -> Self {
        let cap = basis.config().capacity();
        let alpha_tail = crate::fock::coherent_tail(alpha.norm_sq(), cap).sqrt();
        let beta_tail = crate::fock::coherent_tail(beta.norm_sq(), cap).sqrt();
        let na = (alpha.norm_sq()).exp().sqrt();
        let nb = (beta.norm_sq()).exp().sqrt();
        let gauss = (-beta.norm_sq()).exp();
        let steps = n_max.max(1) as f64;
        let rounding_floor = 64.0 * f64::EPSILON * basis.dim() as f64 * steps * na * nb * gauss;
        let estimate = gauss * (na * beta_tail + alpha_tail * nb + identity_defect * steps * na * nb) + rounding_floor;
        TruncationReport {
            alpha_tail,
            beta_tail,
            identity_defect,
            rounding_floor,
            estimate,
        }
    }
}

/// Sliced and exact kernels for each slice count of a job.
#[derive(Debug, Clone, PartialEq)]
pub struct PropagatorResult {
    pub exact_value: Complex64,
    pub sliced_values: BTreeMap<usize, Complex64>,
    pub errors: BTreeMap<usize, f64>,
    /// `None` when fewer than 3 slice counts ran or an error is zero.
    pub fitted_rate: Option<RateFit>,
    pub truncation_report: TruncationReport,
}

/// Runs the job: `⟨Ω_α|S_nⁿ|Ω_β⟩ e^{-β*β}` for every `n`, the exact kernel,
/// the errors and the fitted rate.
pub fn sliced_propagator_element(job: &EvolutionJob) -> Result<PropagatorResult> {
    job.validate()?;
    let basis = FockBasis::new(job.config)?;
    let a = basis.coherent_vector(&job.alpha)?.vector.coeffs;
    let b = basis.coherent_vector(&job.beta)?.vector.coeffs;
    let gauss = (-job.beta.norm_sq()).exp();
    let n_max = *job.n_list.last().unwrap_or(&1);

    if job.t == 0.0 {
        let value = (job.alpha.dot(&job.beta) - job.beta.norm_sq()).exp();
        let sliced_values = job.n_list.iter().map(|&n| (n, value)).collect();
        let errors = job.n_list.iter().map(|&n| (n, 0.0)).collect();
        return Ok(PropagatorResult {
            exact_value: value,
            sliced_values,
            errors,
            fitted_rate: None,
            truncation_report: TruncationReport::new(&job.alpha, &job.beta, &basis, 0.0, n_max),
        });
    }

    let grid = PhaseGrid::new(basis.modes(), job.grid)?;
    let quantizer = Quantizer::new(&grid, &basis)?;
    ensure_real(&job.symbol, &grid)?;
    let q = generator(&job.symbol, &quantizer)?;
    let u = exact_propagator(&q, job.t)?;
    let exact_value = a.dotc(&(&u.matrix * &b)) * gauss;

    let run = |n: usize| -> Result<Complex64> {
        let s = slice_operator(&job.symbol, job.t, n, job.scheme, &quantizer)?;
        let mut v = b.clone();
        for _ in 0..n {
            v = &s.matrix * v;
        }
        Ok(a.dotc(&v) * gauss)
    };
    #[cfg(feature = "parallel")]
    let values: Vec<Result<Complex64>> = {
        use rayon::prelude::*;
        job.n_list.par_iter().map(|&n| run(n)).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let values: Vec<Result<Complex64>> = job.n_list.iter().map(|&n| run(n)).collect();

    let mut sliced_values = BTreeMap::new();
    let mut errors = BTreeMap::new();
    let mut points = Vec::with_capacity(job.n_list.len());
    for (&n, v) in job.n_list.iter().zip(values) {
        let v = v?;
        let e = (v - exact_value).norm();
        sliced_values.insert(n, v);
        errors.insert(n, e);
        points.push((n, e));
    }
    Ok(PropagatorResult {
        exact_value,
        sliced_values,
        errors,
        fitted_rate: fit_rate(&points).ok(),
        truncation_report: TruncationReport::new(&job.alpha, &job.beta, &basis, quantizer.identity_defect(), n_max),
    })
}

/// Direct evaluation of the `n`-fold phase-space integral
///
/// `∫ Π_j e^{-ψ_j*ψ_j} e^{-iA(ψ_j)t/n} exp(Σ_{j=0}^{n} ψ_{j+1}*ψ_j) dμ(ψ_1) … dμ(ψ_n)`
///
/// with `ψ_0 = β`, `ψ_{n+1} = α`, times `e^{-β*β}`. The Gaussians are the
/// grid weights. The nested sums are carried out innermost first, one
/// integration variable at a time.
pub fn path_integral_direct<S: Symbol + ?Sized>(
    symbol: &S,
    t: f64,
    n: usize,
    alpha: &CoherentAmplitude,
    beta: &CoherentAmplitude,
    grid: &PhaseGrid,
) -> Result<Complex64> {
    let d = symbol.modes();
    for found in [alpha.modes(), beta.modes(), grid.modes()] {
        if found != d {
            return Err(Error::ModeCountMismatch { expected: d, found });
        }
    }
    if n == 0 {
        return Err(Error::InvalidConfig("slice count must be at least 1".into()));
    }
    let len = grid.len();
    let pairs = len
        .checked_mul(len)
        .and_then(|p| p.checked_mul(n - 1))
        .ok_or_else(|| Error::Infeasible(format!("{n} slices over {len} nodes")))?;
    if pairs > PATH_PAIR_LIMIT {
        return Err(Error::Infeasible(format!(
            "{pairs} node pairs exceed the limit {PATH_PAIR_LIMIT}"
        )));
    }
    let step = t / n as f64;
    let mut nodes = vec![Complex64::new(0.0, 0.0); len * d];
    let mut slice = Vec::with_capacity(len);
    for i in 0..len {
        let w = grid.node_into(i, &mut nodes[i * d..(i + 1) * d]);
        let v = SliceScheme::Exponential.apply(symbol.eval(&nodes[i * d..(i + 1) * d]), step) * w;
        if !(v.re.is_finite() && v.im.is_finite()) {
            return Err(Error::NonFinite { node: i });
        }
        slice.push(v);
    }
    let node = |i: usize| &nodes[i * d..(i + 1) * d];
    let conj_dot = |x: &[Complex64], y: &[Complex64]| -> Complex64 { x.iter().zip(y).map(|(p, q)| p.conj() * q).sum() };

    // v_1(i) = w_i S(ξ_i) e^{ξ_i* β}
    let mut v: Vec<Complex64> = (0..len)
        .map(|i| slice[i] * conj_dot(node(i), beta.as_slice()).exp())
        .collect();
    for _ in 1..n {
        let next = |k: usize| -> Complex64 {
            let mut s = PairwiseSum::<Complex64>::default();
            let xk = node(k);
            for (i, vi) in v.iter().enumerate() {
                s.push(conj_dot(xk, node(i)).exp() * vi);
            }
            slice[k] * s.total()
        };
        #[cfg(feature = "parallel")]
        let updated: Vec<Complex64> = {
            use rayon::prelude::*;
            (0..len).into_par_iter().map(next).collect()
        };
        #[cfg(not(feature = "parallel"))]
        let updated: Vec<Complex64> = (0..len).map(next).collect();
        v = updated;
    }
    let mut total = PairwiseSum::<Complex64>::default();
    let a: Vec<Complex64> = alpha.as_slice().to_vec();
    for (i, vi) in v.iter().enumerate() {
        total.push(conj_dot(&a, node(i)).exp() * vi);
    }
    Ok(total.total() * (-beta.norm_sq()).exp())
}

/// Both telescoping distances at one slice count, on the unpadded block.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TelescopingGap {
    /// `‖Q(A_{t/n})ⁿ − (1 + iQ(A)t/n)^{-n}‖`
    pub resolvent: f64,
    /// `‖Q(A_{t/n})ⁿ − Q(e^{-iAt/n})ⁿ‖`
    pub exponential: f64,
}

/// Operator-norm gaps between resolvent slices, the resolvent of the
/// generator and exponential slices.
pub fn telescoping_gap(symbol: &PolySymbol, t: f64, n: usize, quantizer: &Quantizer<'_>) -> Result<TelescopingGap> {
    if n == 0 {
        return Err(Error::InvalidConfig("slice count must be at least 1".into()));
    }
    if !symbol.is_real() {
        return Err(Error::NotReal);
    }
    if t == 0.0 {
        return Ok(TelescopingGap {
            resolvent: 0.0,
            exponential: 0.0,
        });
    }
    let basis = quantizer.basis();
    let job_symbol = JobSymbol::Poly(symbol.clone());
    let q = quantize_poly(symbol, basis)?;
    let r = slice_operator(&job_symbol, t, n, SliceScheme::Resolvent, quantizer)?.power(n);
    let e = slice_operator(&job_symbol, t, n, SliceScheme::Exponential, quantizer)?.power(n);
    let dim = basis.dim();
    let shifted = DMatrix::<Complex64>::identity(dim, dim) + &q.matrix * Complex64::new(0.0, t / n as f64);
    let inverse = shifted
        .try_inverse()
        .ok_or_else(|| Error::InvalidConfig("1 + iQt/n is singular".into()))?;
    let l = FockOperator::new(inverse, basis.clone()).power(n);
    let k = basis.unpadded_dim();
    let block = |m: &DMatrix<Complex64>| m.view((0, 0), (k, k)).into_owned();
    Ok(TelescopingGap {
        resolvent: spectral_norm(&(block(&r.matrix) - block(&l.matrix))),
        exponential: spectral_norm(&(block(&r.matrix) - block(&e.matrix))),
    })
}

/// Per-`n` mismatch between a job and its image under a unitary mode mixing.
#[derive(Debug, Clone, PartialEq)]
pub struct SubstitutionReport {
    pub mismatches: BTreeMap<usize, f64>,
    pub exact_mismatch: f64,
}

/// Runs `job` and the job with `A ↦ A∘c^{-1}`, `α ↦ cα`, `β ↦ cβ`, and
/// compares the kernels.
pub fn substitution_check(job: &EvolutionJob, c: &DMatrix<Complex64>) -> Result<SubstitutionReport> {
    let d = job.config.modes;
    if c.nrows() != d || c.ncols() != d {
        return Err(Error::ModeCountMismatch {
            expected: d,
            found: c.nrows().max(c.ncols()),
        });
    }
    let gram = c.adjoint() * c;
    let mut defect: f64 = 0.0;
    for i in 0..d {
        for j in 0..d {
            let want = if i == j { 1.0 } else { 0.0 };
            defect = defect.max((gram[(i, j)] - want).norm());
        }
    }
    if !(defect <= UNITARY_TOLERANCE) {
        return Err(Error::NotUnitary { defect });
    }
    let mixed = EvolutionJob {
        symbol: job.symbol.mixed(c)?,
        alpha: job.alpha.mapped(c)?,
        beta: job.beta.mapped(c)?,
        ..job.clone()
    };
    let plain = sliced_propagator_element(job)?;
    let image = sliced_propagator_element(&mixed)?;
    let mismatches = plain
        .sliced_values
        .iter()
        .map(|(&n, v)| (n, (v - image.sliced_values[&n]).norm()))
        .collect();
    Ok(SubstitutionReport {
        mismatches,
        exact_mismatch: (plain.exact_value - image.exact_value).norm(),
    })
}

/// Unitarity defect `max |U†U − I|` on the unpadded block.
pub fn unitarity_defect(u: &FockOperator) -> f64 {
    let block = u.unpadded_block();
    let k = block.nrows();
    let gram = block.adjoint() * &block;
    let mut worst: f64 = 0.0;
    for i in 0..k {
        for j in 0..k {
            let want = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((gram[(i, j)] - want).norm());
        }
    }
    worst
}
