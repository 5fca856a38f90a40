//! Experiment configuration files.
//!
//! One experiment per TOML document. Top-level keys first, then the
//! `[modes]`, `[quadrature]` and `[tolerances]` tables. Unknown keys are
//! rejected everywhere.

use std::fmt;
use std::path::{Path, PathBuf};

use fockpath_core::fock::DEFAULT_MAX_DIMENSION;
use fockpath_core::{parse_symbol, CoherentAmplitude, Complex64, ModeConfig, PolySymbol, QuadratureSpec, SliceScheme};
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

/// Environment variable that relocates relative output directories.
pub const OUTPUT_ROOT_VAR: &str = "FOCKPATH_OUTPUT_ROOT";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    Propagate,
    Converge,
    SymbolRoundtrip,
    Plancherel,
    Substitute,
    QuantizeDump,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::Propagate => "propagate",
            ExperimentKind::Converge => "converge",
            ExperimentKind::SymbolRoundtrip => "symbol-roundtrip",
            ExperimentKind::Plancherel => "plancherel",
            ExperimentKind::Substitute => "substitute",
            ExperimentKind::QuantizeDump => "quantize-dump",
        }
    }

    fn evolves(self) -> bool {
        matches!(
            self,
            ExperimentKind::Propagate | ExperimentKind::Converge | ExperimentKind::Substitute
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SchemeName {
    #[default]
    Exponential,
    Resolvent,
}

impl From<SchemeName> for SliceScheme {
    fn from(s: SchemeName) -> Self {
        match s {
            SchemeName::Exponential => SliceScheme::Exponential,
            SchemeName::Resolvent => SliceScheme::Resolvent,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GridName {
    #[default]
    Polar,
    Cartesian,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModesSection {
    #[serde(default = "one")]
    pub count: usize,
    pub cutoff: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pad: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub safe_radius_sq: Option<f64>,
    #[serde(default = "default_max_dimension")]
    pub max_dimension: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadratureSection {
    #[serde(default)]
    pub scheme: GridName,
    pub radial: usize,
    /// Polar only. Defaults to `2 * radial`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub angular: Option<usize>,
}

/// Check limits. Every field has a default.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    pub rate_min: f64,
    pub rate_max: f64,
    pub fit_residual: f64,
    /// Largest allowed kernel error at the last `n` (propagate), if set.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_error: Option<f64>,
    pub quantize: f64,
    pub wick: f64,
    pub plancherel: f64,
    pub substitution: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            rate_min: -1.15,
            rate_max: -0.85,
            fit_residual: 0.05,
            max_error: None,
            quantize: 1e-10,
            wick: 1e-9,
            plancherel: 1e-8,
            substitution: 1e-7,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    #[serde(default = "default_symbol")]
    pub symbol: String,
    #[serde(default)]
    pub t: f64,
    #[serde(default)]
    pub n_list: Vec<usize>,
    #[serde(default)]
    pub scheme: SchemeName,
    /// `[re, im]` per mode; the origin when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<Vec<[f64; 2]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<Vec<[f64; 2]>>,
    /// Radial orders for the plancherel sweep.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<Vec<usize>>,
    /// Unitary mode mixing for `substitute`, rows of `[re, im]`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mixing: Option<Vec<Vec<[f64; 2]>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<String>,
    pub modes: ModesSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quadrature: Option<QuadratureSection>,
    #[serde(default)]
    pub tolerances: Tolerances,
}

fn one() -> usize {
    1
}

fn default_max_dimension() -> usize {
    DEFAULT_MAX_DIMENSION
}

fn default_symbol() -> String {
    "1".into()
}

/// Why a config was refused.
#[derive(Debug)]
pub enum ConfigError {
    Io(PathBuf, std::io::Error),
    Syntax(String),
    Invalid(String),
    /// Well formed, but too large or too coarse to run.
    Infeasible(String),
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConfigError::Io(p, e) => write!(f, "cannot read {}: {e}", p.display()),
            ConfigError::Syntax(m) => write!(f, "{m}"),
            ConfigError::Invalid(m) => write!(f, "invalid config: {m}"),
            ConfigError::Infeasible(m) => write!(f, "infeasible: {m}"),
        }
    }
}

impl std::error::Error for ConfigError {}

/// Everything a run needs, built from a config and checked.
#[derive(Debug, Clone)]
pub struct Plan {
    pub config: ExperimentConfig,
    pub modes: ModeConfig,
    pub symbol: PolySymbol,
    pub grid: QuadratureSpec,
    pub alpha: CoherentAmplitude,
    pub beta: CoherentAmplitude,
    pub mixing: Option<DMatrix<Complex64>>,
    /// Plancherel rows as `(K, M)`.
    pub sweep: Vec<QuadratureSpec>,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        toml::from_str(text).map_err(|e| ConfigError::Syntax(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Io(path.to_path_buf(), e))?;
        Self::from_toml(&text)
    }

    pub fn scheme_name(&self) -> &'static str {
        SliceScheme::from(self.scheme).name()
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Output directory: the configured path, else `runs/<stem>`; relative
    /// paths sit under `$FOCKPATH_OUTPUT_ROOT` when set.
    pub fn output_dir(&self, stem: &str) -> PathBuf {
        let dir = match &self.output {
            Some(o) => PathBuf::from(o),
            None => Path::new("runs").join(stem),
        };
        match std::env::var_os(OUTPUT_ROOT_VAR) {
            Some(root) if dir.is_relative() => PathBuf::from(root).join(dir),
            _ => dir,
        }
    }

    /// Static checks. Nothing is assembled.
    pub fn plan(&self) -> Result<Plan, ConfigError> {
        let invalid = |m: String| ConfigError::Invalid(m);
        let m = &self.modes;
        let pad = m.pad.unwrap_or_else(|| ModeConfig::default_pad(m.cutoff));
        let mut modes = ModeConfig::with_pad(m.count, m.cutoff, pad)
            .map_err(|e| invalid(e.to_string()))?
            .max_dimension(m.max_dimension);
        if let Some(r) = m.safe_radius_sq {
            modes = modes.safe_radius_sq(r).map_err(|e| invalid(e.to_string()))?;
        }
        match modes.dimension() {
            Some(dim) if dim <= modes.max_dimension => {}
            Some(dim) => {
                return Err(ConfigError::Infeasible(format!(
                    "basis dimension {dim} exceeds max_dimension {}",
                    modes.max_dimension
                )))
            }
            None => return Err(ConfigError::Infeasible("basis dimension overflows".into())),
        }

        let symbol = parse_symbol(&self.symbol, m.count).map_err(|e| invalid(format!("symbol: {e}")))?;
        if symbol.degree() > pad {
            return Err(invalid(format!(
                "symbol degree {} exceeds the pad {pad}",
                symbol.degree()
            )));
        }

        let grid = match &self.quadrature {
            Some(q) => grid_spec(q.scheme, q.radial, q.angular).map_err(|e| invalid(e.to_string()))?,
            None => {
                let (k, mm) = QuadratureSpec::required_for(modes.capacity() + symbol.degree());
                QuadratureSpec::polar(k, mm).expect("required_for is valid")
            }
        };

        let alpha = amplitude("alpha", self.alpha.as_deref(), m.count)?;
        let beta = amplitude("beta", self.beta.as_deref(), m.count)?;
        if !self.t.is_finite() {
            return Err(invalid(format!("t = {} is not finite", self.t)));
        }

        let kind = self.experiment;
        if kind.evolves() {
            if self.n_list.is_empty() {
                return Err(invalid("n_list is empty".into()));
            }
            if self.n_list[0] == 0 || self.n_list.windows(2).any(|w| w[0] >= w[1]) {
                return Err(invalid("n_list must be strictly increasing positive integers".into()));
            }
            if !symbol.is_real() {
                return Err(invalid("the generator symbol must be real".into()));
            }
            for (name, a) in [("alpha", &alpha), ("beta", &beta)] {
                if a.norm_sq() > modes.safe_radius_sq {
                    return Err(invalid(format!(
                        "|{name}|^2 = {} exceeds the safe radius^2 {}",
                        a.norm_sq(),
                        modes.safe_radius_sq
                    )));
                }
            }
            if self.t != 0.0 {
                check_grid_covers(&grid, modes.capacity())?;
            }
        }
        if kind == ExperimentKind::Converge && self.n_list.len() < 3 {
            return Err(invalid("converge needs at least 3 slice counts".into()));
        }
        if matches!(kind, ExperimentKind::SymbolRoundtrip | ExperimentKind::QuantizeDump) {
            check_grid_covers(&grid, modes.capacity() + symbol.degree())?;
        }

        let mixing = match (&self.mixing, kind) {
            (Some(rows), _) => Some(mixing_matrix(rows, m.count)?),
            (None, ExperimentKind::Substitute) => return Err(invalid("substitute needs a mixing matrix".into())),
            (None, _) => None,
        };

        let sweep = if kind == ExperimentKind::Plancherel {
            let base_m = self.quadrature.as_ref().and_then(|q| q.angular);
            let scheme = self.quadrature.as_ref().map(|q| q.scheme).unwrap_or_default();
            let radials = match &self.sweep {
                Some(s) if s.is_empty() => return Err(invalid("sweep is empty".into())),
                Some(s) => s.clone(),
                None => vec![grid.radial_order],
            };
            radials
                .iter()
                .map(|&k| {
                    let mm = base_m.map(|mm| mm.max(2 * k));
                    grid_spec(scheme, k, mm).map_err(|e| invalid(e.to_string()))
                })
                .collect::<Result<Vec<_>, _>>()?
        } else {
            Vec::new()
        };

        Ok(Plan {
            config: self.clone(),
            modes,
            symbol,
            grid,
            alpha,
            beta,
            mixing,
            sweep,
        })
    }
}

fn grid_spec(scheme: GridName, radial: usize, angular: Option<usize>) -> fockpath_core::Result<QuadratureSpec> {
    match scheme {
        GridName::Polar => QuadratureSpec::polar(radial, angular.unwrap_or(2 * radial)),
        GridName::Cartesian => QuadratureSpec::cartesian(radial),
    }
}

/// A polar grid below the exactness threshold for `capacity` is refused
/// before any matrix is built. Evolution needs the basis capacity (the
/// `Q(1) = I` check); exact quantization of a polynomial needs capacity
/// plus degree.
fn check_grid_covers(grid: &QuadratureSpec, capacity: usize) -> Result<(), ConfigError> {
    let (k, m) = QuadratureSpec::required_for(capacity);
    if grid.scheme == fockpath_core::Scheme::PolarLaguerre && (grid.radial_order < k || grid.angular_order < m) {
        return Err(ConfigError::Infeasible(format!(
            "quadrature ({}, {}) is too coarse for capacity {}; need radial >= {k} and angular >= {m}",
            grid.radial_order, grid.angular_order, capacity
        )));
    }
    Ok(())
}

fn amplitude(name: &str, values: Option<&[[f64; 2]]>, modes: usize) -> Result<CoherentAmplitude, ConfigError> {
    let v = match values {
        None => vec![Complex64::new(0.0, 0.0); modes],
        Some(v) if v.len() != modes => {
            return Err(ConfigError::Invalid(format!(
                "{name} has {} entries for {modes} mode(s)",
                v.len()
            )))
        }
        Some(v) => v.iter().map(|[re, im]| Complex64::new(*re, *im)).collect(),
    };
    CoherentAmplitude::new(v).map_err(|e| ConfigError::Invalid(format!("{name}: {e}")))
}

fn mixing_matrix(rows: &[Vec<[f64; 2]>], modes: usize) -> Result<DMatrix<Complex64>, ConfigError> {
    if rows.len() != modes || rows.iter().any(|r| r.len() != modes) {
        return Err(ConfigError::Invalid(format!("mixing must be {modes}x{modes}")));
    }
    Ok(DMatrix::from_fn(modes, modes, |i, j| {
        let [re, im] = rows[i][j];
        Complex64::new(re, im)
    }))
}
