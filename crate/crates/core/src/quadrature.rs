//! Gaussian-weighted quadrature over `ℂᵈ`, normalised so that
//! `∫ e^{-ξ*ξ} dμ = 1`.
//!
//! Grids are tensor products of one per-mode axis. The polar scheme uses
//! Gauss-Laguerre in `r²` times equispaced angles; the cartesian scheme uses
//! Gauss-Hermite in the real and imaginary parts.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;
use core::ops::Add;

use nalgebra::DMatrix;
use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::fock::{spectral_norm, FockBasis, ModeConfig};
use crate::gauss;

/// Hard cap on the number of tensor-product nodes.
pub const MAX_NODES: usize = 50_000_000;

const LEAF: usize = 4096;

/// Deterministic blocked pairwise summation: sequential inside blocks of
/// 4096 terms, binary-tree merge across blocks.
#[derive(Debug, Clone, Default)]
pub struct PairwiseSum<T = f64> {
    block: T,
    in_block: usize,
    stack: Vec<(u32, T)>,
}

impl<T: Copy + Default + Add<Output = T>> PairwiseSum<T> {
    pub fn push(&mut self, x: T) {
        self.block = self.block + x;
        self.in_block += 1;
        if self.in_block == LEAF {
            let mut level = 0;
            let mut acc = core::mem::take(&mut self.block);
            self.in_block = 0;
            while let Some(&(l, v)) = self.stack.last() {
                if l != level {
                    break;
                }
                self.stack.pop();
                acc = v + acc;
                level += 1;
            }
            self.stack.push((level, acc));
        }
    }

    pub fn total(&self) -> T {
        let mut acc = self.block;
        for &(_, v) in self.stack.iter().rev() {
            acc = v + acc;
        }
        acc
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    PolarLaguerre,
    CartesianHermite,
}

/// Per-mode rule orders. In the polar scheme `radial_order` counts
/// Gauss-Laguerre points in `r²` and `angular_order` equispaced angles; in
/// the cartesian scheme `radial_order` counts Gauss-Hermite points per real
/// axis and `angular_order` is unused.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QuadratureSpec {
    pub radial_order: usize,
    pub angular_order: usize,
    pub scheme: Scheme,
}

impl QuadratureSpec {
    pub fn polar(radial_order: usize, angular_order: usize) -> Result<Self> {
        let spec = QuadratureSpec {
            radial_order,
            angular_order,
            scheme: Scheme::PolarLaguerre,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn cartesian(order: usize) -> Result<Self> {
        let spec = QuadratureSpec {
            radial_order: order,
            angular_order: 2 * order,
            scheme: Scheme::CartesianHermite,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.radial_order == 0 {
            return Err(Error::InvalidQuadrature("radial order must be at least 1".into()));
        }
        if self.scheme == Scheme::PolarLaguerre && self.angular_order < 2 * self.radial_order {
            return Err(Error::InvalidQuadrature(format!(
                "angular order {} must be at least twice the radial order {}",
                self.angular_order, self.radial_order
            )));
        }
        Ok(())
    }

    /// Nodes on one mode's axis.
    pub fn axis_len(&self) -> usize {
        match self.scheme {
            Scheme::PolarLaguerre => self.radial_order * self.angular_order,
            Scheme::CartesianHermite => self.radial_order * self.radial_order,
        }
    }

    /// Smallest polar spec reproducing every moment `ξ^m ξ̄^n` with
    /// `|m|, |n| ≤ capacity` exactly.
    pub fn required_for(capacity: usize) -> (usize, usize) {
        let radial = (capacity + 2) / 2;
        (radial, (capacity + 1).max(2 * radial))
    }
}

/// Tensor-product phase-space grid whose weights already carry the Gaussian.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseGrid {
    spec: QuadratureSpec,
    modes: usize,
    axis: Vec<Complex64>,
    axis_weights: Vec<f64>,
    /// Polar scheme only: `r_i` and Laguerre weights.
    radii: Vec<f64>,
    radial_weights: Vec<f64>,
    len: usize,
}

impl PhaseGrid {
    pub fn new(modes: usize, spec: QuadratureSpec) -> Result<Self> {
        spec.validate()?;
        if modes == 0 {
            return Err(Error::InvalidConfig("at least one mode is required".into()));
        }
        let per_mode = spec.axis_len();
        let len = per_mode
            .checked_pow(modes as u32)
            .filter(|&n| n <= MAX_NODES)
            .ok_or_else(|| Error::Infeasible(format!("grid with {per_mode}^{modes} nodes exceeds {MAX_NODES}")))?;
        let mut axis = Vec::with_capacity(per_mode);
        let mut axis_weights = Vec::with_capacity(per_mode);
        let (mut radii, mut radial_weights) = (Vec::new(), Vec::new());
        match spec.scheme {
            Scheme::PolarLaguerre => {
                let rule = gauss::laguerre(spec.radial_order);
                let m = spec.angular_order;
                for (&x, &w) in rule.nodes.iter().zip(&rule.weights) {
                    let r = x.sqrt();
                    radii.push(r);
                    radial_weights.push(w);
                    for a in 0..m {
                        axis.push(Complex64::from_polar(r, angle(a, m)));
                        axis_weights.push(w / m as f64);
                    }
                }
            }
            Scheme::CartesianHermite => {
                let rule = gauss::hermite(spec.radial_order);
                for (&x, &wx) in rule.nodes.iter().zip(&rule.weights) {
                    for (&y, &wy) in rule.nodes.iter().zip(&rule.weights) {
                        axis.push(Complex64::new(x, y));
                        axis_weights.push(wx * wy / PI);
                    }
                }
            }
        }
        Ok(PhaseGrid {
            spec,
            modes,
            axis,
            axis_weights,
            radii,
            radial_weights,
            len,
        })
    }

    pub fn spec(&self) -> &QuadratureSpec {
        &self.spec
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Node `i` written into `out` (length `modes`); returns its weight.
    pub fn node_into(&self, i: usize, out: &mut [Complex64]) -> f64 {
        let per_mode = self.axis.len();
        let mut rest = i;
        let mut w = 1.0;
        for j in (0..self.modes).rev() {
            let a = rest % per_mode;
            rest /= per_mode;
            out[j] = self.axis[a];
            w *= self.axis_weights[a];
        }
        w
    }

    pub fn node(&self, i: usize) -> (Vec<Complex64>, f64) {
        let mut xi = vec![Complex64::new(0.0, 0.0); self.modes];
        let w = self.node_into(i, &mut xi);
        (xi, w)
    }

    pub fn weight_sum(&self) -> f64 {
        let mut s = PairwiseSum::default();
        for i in 0..self.len {
            let mut w = 1.0;
            let mut rest = i;
            for _ in 0..self.modes {
                w *= self.axis_weights[rest % self.axis.len()];
                rest /= self.axis.len();
            }
            s.push(w);
        }
        s.total()
    }

    /// `Σ_m w_m f(ξ_m)`, approximating `∫ e^{-ξ*ξ} f dμ`.
    pub fn integrate(&self, mut f: impl FnMut(&[Complex64]) -> Complex64) -> Result<Complex64> {
        let mut xi = vec![Complex64::new(0.0, 0.0); self.modes];
        let mut sum = PairwiseSum::<Complex64>::default();
        for i in 0..self.len {
            let w = self.node_into(i, &mut xi);
            let v = f(&xi);
            if !(v.re.is_finite() && v.im.is_finite()) {
                return Err(Error::NonFinite { node: i });
            }
            sum.push(v * w);
        }
        Ok(sum.total())
    }
}

fn angle(a: usize, m: usize) -> f64 {
    2.0 * PI * a as f64 / m as f64
}

fn ln_factorial(k: usize) -> f64 {
    (2..=k).map(|j| (j as f64).ln()).sum()
}

/// `⟨m|·|n⟩ = Σ w f(ξ) ξ^m ξ̄^n / √(m! n!)` over the full padded basis.
///
/// In the polar scheme the angular sums are done as a separable DFT per
/// radial tuple, so the cost is `K^d (M^d (2c+1) + D²)` instead of
/// `(KM)^d D²`.
pub(crate) fn assemble<F>(grid: &PhaseGrid, basis: &FockBasis, f: F) -> Result<DMatrix<Complex64>>
where
    F: Fn(&[Complex64]) -> Complex64 + Sync,
{
    if grid.modes() != basis.modes() {
        return Err(Error::ModeCountMismatch {
            expected: basis.modes(),
            found: grid.modes(),
        });
    }
    match grid.spec.scheme {
        Scheme::PolarLaguerre => assemble_polar(grid, basis, &f),
        Scheme::CartesianHermite => assemble_direct(grid, basis, &f),
    }
}

/// Radial tuples per work unit; fixed so that sequential and parallel
/// builds add partial matrices in the same order.
const RADIAL_CHUNK: usize = 8;

fn assemble_polar<F>(grid: &PhaseGrid, basis: &FockBasis, f: &F) -> Result<DMatrix<Complex64>>
where
    F: Fn(&[Complex64]) -> Complex64 + Sync,
{
    let d = grid.modes;
    let k = grid.spec.radial_order;
    let m = grid.spec.angular_order;
    let cap = basis.config().capacity();
    let freqs = 2 * cap + 1;
    let dim = basis.dim();

    // amp[i][c] = √w_i r_i^c / √(c!)
    let amp: Vec<Vec<f64>> = grid
        .radii
        .iter()
        .zip(&grid.radial_weights)
        .map(|(&r, &w)| {
            (0..=cap)
                .map(|c| {
                    if w == 0.0 {
                        0.0
                    } else {
                        (0.5 * w.ln() + c as f64 * r.ln() - 0.5 * ln_factorial(c)).exp()
                    }
                })
                .collect()
        })
        .collect();
    // twiddle[(q + cap) * m + a] = e^{i q θ_a} / M
    let mut twiddle = Vec::with_capacity(freqs * m);
    for q in -(cap as i64)..=cap as i64 {
        for a in 0..m {
            let phase = (q * a as i64).rem_euclid(m as i64) as f64;
            twiddle.push(Complex64::from_polar(1.0 / m as f64, 2.0 * PI * phase / m as f64));
        }
    }
    let freq_index: Vec<usize> = {
        let idx = basis.indices();
        let mut out = Vec::with_capacity(dim * dim);
        for p in idx {
            for q in idx {
                let mut flat = 0;
                for j in 0..d {
                    flat = flat * freqs + (p.get(j) as i64 - q.get(j) as i64 + cap as i64) as usize;
                }
                out.push(flat);
            }
        }
        out
    };

    let radial_tuples = k.pow(d as u32);
    let angular_tuples = m.pow(d as u32);
    let chunks = radial_tuples.div_ceil(RADIAL_CHUNK);

    let work = |chunk: usize| -> Result<DMatrix<Complex64>> {
        let mut acc = DMatrix::<Complex64>::zeros(dim, dim);
        let mut xi = vec![Complex64::new(0.0, 0.0); d];
        let mut radial = vec![0usize; d];
        let mut digits = vec![0usize; d];
        let mut values = vec![Complex64::new(0.0, 0.0); angular_tuples];
        let mut g = vec![0.0; dim];
        let start = chunk * RADIAL_CHUNK;
        let end = (start + RADIAL_CHUNK).min(radial_tuples);
        for t in start..end {
            let mut rest = t;
            for j in (0..d).rev() {
                radial[j] = rest % k;
                rest /= k;
            }
            for (ai, slot) in values.iter_mut().enumerate() {
                let mut rest = ai;
                let mut node = 0usize;
                for j in (0..d).rev() {
                    digits[j] = rest % m;
                    rest /= m;
                }
                for j in 0..d {
                    xi[j] = grid.axis[radial[j] * m + digits[j]];
                    node = node * (k * m) + radial[j] * m + digits[j];
                }
                let v = f(&xi);
                if !(v.re.is_finite() && v.im.is_finite()) {
                    return Err(Error::NonFinite { node });
                }
                *slot = v;
            }
            let spectrum = separable_dft(&values, d, m, freqs, &twiddle);
            for (p, n) in basis.indices().iter().enumerate() {
                g[p] = (0..d).map(|j| amp[radial[j]][n.get(j) as usize]).product();
            }
            for q in 0..dim {
                if g[q] == 0.0 {
                    continue;
                }
                for p in 0..dim {
                    let w = g[p] * g[q];
                    if w != 0.0 {
                        acc[(p, q)] += spectrum[freq_index[p * dim + q]] * w;
                    }
                }
            }
        }
        Ok(acc)
    };

    #[cfg(feature = "parallel")]
    let partials: Vec<Result<DMatrix<Complex64>>> = {
        use rayon::prelude::*;
        (0..chunks).into_par_iter().map(work).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let partials: Vec<Result<DMatrix<Complex64>>> = (0..chunks).map(work).collect();

    let mut total = DMatrix::<Complex64>::zeros(dim, dim);
    for part in partials {
        total += part?;
    }
    Ok(total)
}

/// Mean over each angle axis against `e^{i q θ}`, `q ∈ [-cap, cap]`; axes
/// are transformed last to first.
fn separable_dft(values: &[Complex64], d: usize, m: usize, freqs: usize, twiddle: &[Complex64]) -> Vec<Complex64> {
    let mut shape = vec![m; d];
    let mut data = values.to_vec();
    for axis in (0..d).rev() {
        let outer: usize = shape[..axis].iter().product();
        let inner: usize = shape[axis + 1..].iter().product();
        let mut out = vec![Complex64::new(0.0, 0.0); outer * freqs * inner];
        for o in 0..outer {
            for q in 0..freqs {
                let tw = &twiddle[q * m..(q + 1) * m];
                let dst = (o * freqs + q) * inner;
                for (a, &t) in tw.iter().enumerate() {
                    let src = (o * m + a) * inner;
                    for i in 0..inner {
                        out[dst + i] += data[src + i] * t;
                    }
                }
            }
        }
        shape[axis] = freqs;
        data = out;
    }
    data
}

fn assemble_direct<F>(grid: &PhaseGrid, basis: &FockBasis, f: &F) -> Result<DMatrix<Complex64>>
where
    F: Fn(&[Complex64]) -> Complex64 + Sync,
{
    let d = grid.modes;
    let cap = basis.config().capacity();
    let dim = basis.dim();
    let chunk_len = LEAF;
    let chunks = grid.len().div_ceil(chunk_len);

    let work = |chunk: usize| -> Result<DMatrix<Complex64>> {
        let mut acc = DMatrix::<Complex64>::zeros(dim, dim);
        let mut xi = vec![Complex64::new(0.0, 0.0); d];
        let mut g = vec![Complex64::new(0.0, 0.0); dim];
        let mut powers = vec![vec![Complex64::new(0.0, 0.0); cap + 1]; d];
        let start = chunk * chunk_len;
        let end = (start + chunk_len).min(grid.len());
        for node in start..end {
            let w = grid.node_into(node, &mut xi);
            let v = f(&xi);
            if !(v.re.is_finite() && v.im.is_finite()) {
                return Err(Error::NonFinite { node });
            }
            // √w_j ξ_j^c / √(c!) per mode, in log-magnitude form
            for j in 0..d {
                let z = xi[j];
                let r = z.norm();
                let theta = z.arg();
                let half_ln_w = 0.5 * w.ln() / d as f64;
                for c in 0..=cap {
                    powers[j][c] = if c > 0 && r == 0.0 {
                        Complex64::new(0.0, 0.0)
                    } else {
                        let ln_mag = half_ln_w + if c > 0 { c as f64 * r.ln() } else { 0.0 } - 0.5 * ln_factorial(c);
                        Complex64::from_polar(ln_mag.exp(), c as f64 * theta)
                    };
                }
            }
            for (p, n) in basis.indices().iter().enumerate() {
                g[p] = (0..d).map(|j| powers[j][n.get(j) as usize]).product();
            }
            for q in 0..dim {
                let gq = g[q].conj() * v;
                for p in 0..dim {
                    acc[(p, q)] += g[p] * gq;
                }
            }
        }
        Ok(acc)
    };

    #[cfg(feature = "parallel")]
    let partials: Vec<Result<DMatrix<Complex64>>> = {
        use rayon::prelude::*;
        (0..chunks).into_par_iter().map(work).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let partials: Vec<Result<DMatrix<Complex64>>> = (0..chunks).map(work).collect();

    let mut total = DMatrix::<Complex64>::zeros(dim, dim);
    for part in partials {
        total += part?;
    }
    Ok(total)
}

/// `‖Σ_m w_m |Ω_{ξ_m}⟩⟨Ω_{ξ_m}| − I‖` on the unpadded block.
pub fn plancherel_defect(grid: &PhaseGrid, config: &ModeConfig) -> Result<f64> {
    let basis = FockBasis::new(*config)?;
    let resolution = assemble(grid, &basis, |_| Complex64::new(1.0, 0.0))?;
    let k = basis.unpadded_dim();
    let block = resolution.view((0, 0), (k, k)).into_owned() - DMatrix::identity(k, k);
    Ok(spectral_norm(&block))
}
