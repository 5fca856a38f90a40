//! Antiwick quantization and time-sliced coherent-state propagators on
//! truncated bosonic Fock spaces.
//!
//! Builds without `std` when the `libm` feature is enabled; an allocator is
//! still required.

#![cfg_attr(not(feature = "std"), no_std)]
#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

#[cfg(not(any(feature = "std", feature = "libm")))]
compile_error!("enable either the `std` or the `libm` feature for float math");

pub mod error;
pub mod fock;
pub mod gauss;
pub mod propagator;
pub mod quadrature;
pub mod quantize;
pub mod symbols;

pub use error::{Error, Result};
pub use fock::{
    inner_product, sobolev_diagnostic_norm, CoherentAmplitude, CoherentVector, FockBasis, FockOperator, FockVector,
    ModeConfig, MultiIndex,
};
pub use num_complex::Complex64;
pub use propagator::{
    exact_propagator, fit_rate, path_integral_direct, slice_operator, sliced_propagator_element, substitution_check,
    telescoping_gap, EvolutionJob, JobSymbol, PropagatorResult, RateFit, SliceScheme, TelescopingGap, TruncationReport,
};
pub use quadrature::{plancherel_defect, PhaseGrid, QuadratureSpec, Scheme};
pub use quantize::{
    coherent_matrix_element, norm_bound_check, quantize_poly, quantize_quadrature, wick_symbol_of, NormBoundReport,
    Quantizer,
};
pub use symbols::{
    antiwick_product, ellipticity_check, omega_transform, parametrix_expansion, parse_symbol, OmegaKernel, PolySymbol,
    QuasiSymbol, Symbol,
};
