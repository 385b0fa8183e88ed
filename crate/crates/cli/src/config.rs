//! JSON configuration shared by all subcommands. Every section is optional;
//! missing sections take the defaults below.

use std::path::Path;

use fraclab_core::kernel::{KernelSpec, Profile, RadialTable};
use fraclab_core::{ExteriorRule, QuadratureParams, TailMode};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Config {
    pub schema_version: u32,
    pub seed: u64,
    pub kernel: KernelConfig,
    pub grid: GridConfig,
    pub exterior: ExteriorConfig,
    pub quadrature: QuadratureConfig,
    pub solve: SolveConfig,
    pub manufacture: ManufactureConfig,
    pub ladder: LadderConfig,
    pub majorant: MajorantConfig,
    pub schauder: SchauderConfig,
    pub verify: VerifyConfig,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            seed: 0,
            kernel: KernelConfig::default(),
            grid: GridConfig::default(),
            exterior: ExteriorConfig::Zero {},
            quadrature: QuadratureConfig::default(),
            solve: SolveConfig::default(),
            manufacture: ManufactureConfig::default(),
            ladder: LadderConfig::default(),
            majorant: MajorantConfig::default(),
            schauder: SchauderConfig::default(),
            verify: VerifyConfig::default(),
        }
    }
}

impl Config {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Validation(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let config: Config = serde_json::from_str(text)
            .map_err(|e| CliError::Validation(format!("config line {}, column {}: {e}", e.line(), e.column())))?;
        if config.schema_version != SCHEMA_VERSION {
            return Err(CliError::Validation(format!(
                "unsupported schema_version {} (expected {SCHEMA_VERSION})",
                config.schema_version
            )));
        }
        Ok(config)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelConfig {
    pub n: usize,
    pub s: f64,
    pub a0: f64,
    #[serde(flatten)]
    pub form: KernelFormConfig,
}

impl Default for KernelConfig {
    fn default() -> Self {
        Self {
            n: 1,
            s: 1.5,
            a0: 1.0,
            form: KernelFormConfig::Pure {},
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "form", content = "params", rename_all = "snake_case")]
pub enum KernelFormConfig {
    Pure {},
    Perturbed { epsilon: f64, profile: ProfileConfig },
    Tabulated { radii: Vec<f64>, phi: Vec<f64> },
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProfileConfig {
    Rational,
    Gaussian,
}

impl KernelConfig {
    pub fn build(&self) -> Result<KernelSpec, CliError> {
        let spec = match &self.form {
            KernelFormConfig::Pure {} => KernelSpec::pure(self.n, self.s, self.a0),
            KernelFormConfig::Perturbed { epsilon, profile } => {
                let p = match profile {
                    ProfileConfig::Rational => Profile::Rational,
                    ProfileConfig::Gaussian => Profile::Gaussian,
                };
                KernelSpec::perturbed(self.n, self.s, self.a0, *epsilon, p)
            }
            KernelFormConfig::Tabulated { radii, phi } => {
                RadialTable::new(radii, phi).and_then(|t| KernelSpec::tabulated(self.n, self.s, self.a0, t))
            }
        };
        Ok(spec?)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridConfig {
    pub radius: f64,
    pub intervals: usize,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            radius: 2.0,
            intervals: 128,
        }
    }
}

impl GridConfig {
    pub fn validate(&self) -> Result<(), CliError> {
        if !(self.radius > 0.0 && self.radius.is_finite()) || self.intervals < 2 || self.intervals > 2048 {
            return Err(CliError::Validation(format!(
                "grid needs radius > 0 and 2 ≤ intervals ≤ 2048, got {} and {}",
                self.radius, self.intervals
            )));
        }
        Ok(())
    }
}

/// Exterior rule as `{"id": ..., "params": {...}}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "id", content = "params", rename_all = "snake_case")]
pub enum ExteriorConfig {
    Zero {},
    Gaussian { amp: f64, center: f64, width: f64 },
    Cosine { amp: f64, freq: f64, phase: f64 },
    ClampedAffine { intercept: f64, slope: f64, limit: f64 },
    CompactBump { amp: f64, center: f64, radius: f64 },
    Lorentzian { amp: f64, center: f64, width: f64 },
}

impl From<&ExteriorConfig> for ExteriorRule {
    fn from(c: &ExteriorConfig) -> Self {
        match *c {
            ExteriorConfig::Zero {} => ExteriorRule::Zero,
            ExteriorConfig::Gaussian { amp, center, width } => ExteriorRule::Gaussian { amp, center, width },
            ExteriorConfig::Cosine { amp, freq, phase } => ExteriorRule::Cosine { amp, freq, phase },
            ExteriorConfig::ClampedAffine {
                intercept,
                slope,
                limit,
            } => ExteriorRule::ClampedAffine {
                intercept,
                slope,
                limit,
            },
            ExteriorConfig::CompactBump { amp, center, radius } => ExteriorRule::CompactBump { amp, center, radius },
            ExteriorConfig::Lorentzian { amp, center, width } => ExteriorRule::Lorentzian { amp, center, width },
        }
    }
}

impl From<&ExteriorRule> for ExteriorConfig {
    fn from(r: &ExteriorRule) -> Self {
        match *r {
            ExteriorRule::Zero => ExteriorConfig::Zero {},
            ExteriorRule::Gaussian { amp, center, width } => ExteriorConfig::Gaussian { amp, center, width },
            ExteriorRule::Cosine { amp, freq, phase } => ExteriorConfig::Cosine { amp, freq, phase },
            ExteriorRule::ClampedAffine {
                intercept,
                slope,
                limit,
            } => ExteriorConfig::ClampedAffine {
                intercept,
                slope,
                limit,
            },
            ExteriorRule::CompactBump { amp, center, radius } => ExteriorConfig::CompactBump { amp, center, radius },
            ExteriorRule::Lorentzian { amp, center, width } => ExteriorConfig::Lorentzian { amp, center, width },
        }
    }
}

impl ExteriorConfig {
    pub fn build(&self) -> Result<ExteriorRule, CliError> {
        let rule = ExteriorRule::from(self);
        rule.validate()?;
        Ok(rule)
    }
}

/// Overrides for the grid-derived quadrature defaults.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct QuadratureConfig {
    pub near_radius: Option<f64>,
    pub far_radius: Option<f64>,
    pub nodes_near: Option<usize>,
    pub nodes_mid: Option<usize>,
    pub nodes_far: Option<usize>,
    pub tail_mode: Option<TailModeConfig>,
    pub taylor_terms: Option<usize>,
    pub panel_width: Option<f64>,
    pub interface_levels: Option<usize>,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TailModeConfig {
    AnalyticBound,
    ExtendedQuadrature,
}

impl QuadratureConfig {
    pub fn apply(&self, mut q: QuadratureParams) -> Result<QuadratureParams, CliError> {
        if let Some(v) = self.near_radius {
            q.near_radius = v;
        }
        if let Some(v) = self.far_radius {
            q.far_radius = v;
        }
        if let Some(v) = self.nodes_near {
            q.nodes_near = v;
        }
        if let Some(v) = self.nodes_mid {
            q.nodes_mid = v;
        }
        if let Some(v) = self.nodes_far {
            q.nodes_far = v;
        }
        if let Some(v) = self.tail_mode {
            q.tail_mode = match v {
                TailModeConfig::AnalyticBound => TailMode::AnalyticBound,
                TailModeConfig::ExtendedQuadrature => TailMode::ExtendedQuadrature,
            };
        }
        if let Some(v) = self.taylor_terms {
            q.taylor_terms = v;
        }
        if let Some(v) = self.panel_width {
            q.panel_width = v;
        }
        if let Some(v) = self.interface_levels {
            q.interface_levels = v;
        }
        q.validate()?;
        Ok(q)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolveConfig {
    pub rhs: RhsConfig,
    pub nonlinearity: NonlinearityConfig,
    pub tol: Option<f64>,
    pub max_iter: usize,
}

impl Default for SolveConfig {
    fn default() -> Self {
        Self {
            rhs: RhsConfig::Constant { value: 0.0 },
            nonlinearity: NonlinearityConfig::None,
            tol: None,
            max_iter: 30,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum RhsConfig {
    /// `f ≡ value`.
    Constant { value: f64 },
    /// `f = K u_exact` with `u_exact` the exterior rule extended inside.
    Manufactured,
}

/// Right-hand side `f(x, u) = coefficient·u + g(x)`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum NonlinearityConfig {
    None,
    Affine { coefficient: f64 },
    Cubic { coefficient: f64 },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ManufactureConfig {
    pub reference_intervals: usize,
}

impl Default for ManufactureConfig {
    fn default() -> Self {
        Self {
            reference_intervals: 512,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LadderConfig {
    pub k_max: usize,
    pub r_grid: Option<Vec<f64>>,
    /// Radius of the grid carrying `f = Ku`; defaults to `min(1, 0.999·R)`.
    pub rhs_radius: Option<f64>,
    pub rhs_intervals: usize,
    pub convention: ConventionConfig,
    pub source: LadderSource,
}

impl Default for LadderConfig {
    fn default() -> Self {
        Self {
            k_max: 12,
            r_grid: None,
            rhs_radius: None,
            rhs_intervals: 64,
            convention: ConventionConfig::WeightedS,
            source: LadderSource::Field,
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConventionConfig {
    WeightedS,
    UnweightedB1,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LadderSource {
    /// The exterior rule sampled on the grid.
    Field,
    /// The solution of the manufactured linear problem.
    Solution,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MajorantConfig {
    #[serde(rename = "C")]
    pub c: String,
    #[serde(rename = "C_f")]
    pub c_f: String,
    #[serde(rename = "A")]
    pub a: String,
    #[serde(rename = "M0")]
    pub m0: String,
    #[serde(rename = "K_max")]
    pub k_max: usize,
}

impl Default for MajorantConfig {
    fn default() -> Self {
        Self {
            c: "1".into(),
            c_f: "1".into(),
            a: "1".into(),
            m0: "1".into(),
            k_max: 25,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SchauderConfig {
    pub radii: Vec<f64>,
    pub alpha: f64,
    pub center: f64,
    pub rhs_intervals: usize,
}

impl Default for SchauderConfig {
    fn default() -> Self {
        Self {
            radii: vec![0.25, 0.5, 1.0],
            alpha: 0.3,
            center: 0.0,
            rhs_intervals: 64,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VerifyConfig {
    pub binomial_k_max: usize,
    pub chain_rule_pairs: usize,
    pub chain_rule_order: usize,
    pub reduction_draws: usize,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self {
            binomial_k_max: 300,
            chain_rule_pairs: 50,
            chain_rule_order: 6,
            reduction_draws: 200,
        }
    }
}
