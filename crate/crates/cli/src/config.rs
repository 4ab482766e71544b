use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::CliError;

/// Experiment description read from a TOML file. Unknown keys are rejected
/// in every section.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub model: ModelConfig,
    #[serde(default)]
    pub field: FieldConfig,
    #[serde(default)]
    pub sampler: SamplerConfig,
    #[serde(default)]
    pub output: OutputConfig,
    #[serde(default)]
    pub diagnostics: DiagnosticsConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub study: Option<StudyConfig>,
    #[serde(default)]
    pub equilibrium: EquilibriumConfig,
    #[serde(default)]
    pub prescribe: PrescribeConfig,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum KernelKind {
    Coulomb,
    Riesz,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub dim: usize,
    pub kernel: KernelKind,
    /// Riesz exponent; required for `riesz`, must be absent or 2 for `coulomb` in d >= 3.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default = "one")]
    pub beta: f64,
    pub n: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FieldKind {
    Quadratic,
    Power,
    Table,
    Prescribed,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FieldConfig {
    pub kind: FieldKind,
    /// Exponent of `v(r) = r^p` for `power`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    /// CSV with columns `r,V,dV` for `table`; relative paths resolve against the config file.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
    /// Radius of the uniform target ball for `prescribed`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target_radius: Option<f64>,
    /// Hinge radius `R` of `[|x|^2 - R]_+` for `prescribed`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hinge: Option<f64>,
}

impl Default for FieldConfig {
    fn default() -> Self {
        FieldConfig { kind: FieldKind::Quadratic, p: None, path: None, target_radius: None, hinge: None }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Algorithm {
    Mala,
    Metropolis,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScheduleKind {
    NSquared,
    Fixed,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InitKind {
    UniformBall,
    GibbsField,
    Stratified,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SamplerConfig {
    pub algorithm: Algorithm,
    pub step_size: f64,
    pub adapt: bool,
    /// Defaults to 0.574 for MALA and 0.234 for Metropolis.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target_acceptance: Option<f64>,
    /// Total sweeps, burn-in included.
    pub sweeps: usize,
    pub burn_in: usize,
    pub thin: usize,
    pub seed: u64,
    pub schedule: ScheduleKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta_n: Option<f64>,
    pub init: InitKind,
    /// Ball radius for `uniform-ball`, half width of the cube for `gibbs-field` and `stratified`.
    pub init_radius: f64,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        SamplerConfig {
            algorithm: Algorithm::Mala,
            step_size: 0.01,
            adapt: true,
            target_acceptance: None,
            sweeps: 10_000,
            burn_in: 2_000,
            thin: 10,
            seed: 0,
            schedule: ScheduleKind::NSquared,
            beta_n: None,
            init: InitKind::UniformBall,
            init_radius: 1.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: PathBuf,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig { dir: PathBuf::from("out") }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FmChoice {
    Auto,
    ExactLp,
    TruncatedTransport,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DiagnosticsConfig {
    pub ks: bool,
    pub fm: bool,
    pub fm_method: FmChoice,
    pub fm_max_atoms: usize,
    pub histogram_bins: usize,
}

impl Default for DiagnosticsConfig {
    fn default() -> Self {
        DiagnosticsConfig { ks: true, fm: true, fm_method: FmChoice::Auto, fm_max_atoms: 500, histogram_bins: 50 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StudyConfig {
    pub n_values: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EquilibriumConfig {
    /// Radii of the Euler-Lagrange check, spread over `[0, 2 R0]`.
    pub grid_points: usize,
    /// Rows of `density.csv`.
    pub density_points: usize,
}

impl Default for EquilibriumConfig {
    fn default() -> Self {
        EquilibriumConfig { grid_points: 200, density_points: 1001 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PrescribeConfig {
    pub target_radius: f64,
    pub hinge: f64,
    pub r_max: f64,
    pub table_points: usize,
    pub report_points: usize,
}

impl Default for PrescribeConfig {
    fn default() -> Self {
        PrescribeConfig { target_radius: 1.0, hinge: 2.0, r_max: 3.0, table_points: 30_001, report_points: 301 }
    }
}

fn one() -> f64 {
    1.0
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        let mut cfg = Self::from_toml(&text)?;
        // table paths are relative to the config file
        if let (Some(p), Some(base)) = (cfg.field.path.as_mut(), path.parent()) {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Hex SHA-256 of the resolved configuration text with `output.dir`
    /// blanked, so moving the outputs does not change the digest.
    pub fn digest(&self) -> String {
        let mut key = self.clone();
        key.output.dir = PathBuf::new();
        hex::encode(Sha256::digest(key.to_toml().as_bytes()))
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |msg: String| Err(CliError::Config(msg));
        let m = &self.model;
        if m.dim == 0 {
            return bad("model.dim must be >= 1".into());
        }
        if m.n == 0 {
            return bad("model.n must be >= 1".into());
        }
        if !(m.beta > 0.0 && m.beta.is_finite()) {
            return bad(format!("model.beta must be positive, got {}", m.beta));
        }
        match (m.kernel, m.alpha) {
            (KernelKind::Riesz, None) => return bad("model.alpha is required for the riesz kernel".into()),
            (KernelKind::Riesz, Some(a)) if !(a > 0.0 && a < m.dim as f64) => {
                return bad(format!("model.alpha must lie in (0, {}), got {a}", m.dim))
            }
            (KernelKind::Coulomb, Some(a)) if a != 2.0 || m.dim < 3 => {
                return bad("model.alpha is only allowed (as 2) for the coulomb kernel in dim >= 3".into())
            }
            _ => {}
        }
        let f = &self.field;
        let stray = |name: &str, present: bool| -> Result<(), CliError> {
            if present {
                Err(CliError::Config(format!("field.{name} does not apply to field kind {:?}", f.kind)))
            } else {
                Ok(())
            }
        };
        match f.kind {
            FieldKind::Quadratic => {
                stray("p", f.p.is_some())?;
                stray("path", f.path.is_some())?;
                stray("target_radius", f.target_radius.is_some())?;
                stray("hinge", f.hinge.is_some())?;
            }
            FieldKind::Power => {
                match f.p {
                    Some(p) if p > 0.0 && p.is_finite() => {}
                    _ => return bad("field.p must be a positive exponent for the power field".into()),
                }
                stray("path", f.path.is_some())?;
                stray("target_radius", f.target_radius.is_some())?;
                stray("hinge", f.hinge.is_some())?;
            }
            FieldKind::Table => {
                if f.path.is_none() {
                    return bad("field.path is required for the table field".into());
                }
                stray("p", f.p.is_some())?;
                stray("target_radius", f.target_radius.is_some())?;
                stray("hinge", f.hinge.is_some())?;
            }
            FieldKind::Prescribed => {
                let (Some(t), Some(h)) = (f.target_radius, f.hinge) else {
                    return bad("field.target_radius and field.hinge are required for the prescribed field".into());
                };
                if !(t > 0.0 && h > 0.0) {
                    return bad("field.target_radius and field.hinge must be positive".into());
                }
                stray("p", f.p.is_some())?;
                stray("path", f.path.is_some())?;
            }
        }
        let s = &self.sampler;
        if !(s.step_size > 0.0 && s.step_size.is_finite()) {
            return bad(format!("sampler.step_size must be positive, got {}", s.step_size));
        }
        if let Some(t) = s.target_acceptance {
            if !(t > 0.0 && t < 1.0) {
                return bad(format!("sampler.target_acceptance must lie in (0, 1), got {t}"));
            }
        }
        if s.thin == 0 {
            return bad("sampler.thin must be >= 1".into());
        }
        if s.burn_in > s.sweeps {
            return bad(format!("sampler.burn_in ({}) exceeds sampler.sweeps ({})", s.burn_in, s.sweeps));
        }
        match (s.schedule, s.beta_n) {
            (ScheduleKind::Fixed, Some(b)) if b > 0.0 && b.is_finite() => {}
            (ScheduleKind::Fixed, _) => return bad("sampler.beta_n must be positive for the fixed schedule".into()),
            (ScheduleKind::NSquared, Some(_)) => {
                return bad("sampler.beta_n only applies to the fixed schedule".into())
            }
            (ScheduleKind::NSquared, None) => {}
        }
        if !(s.init_radius > 0.0 && s.init_radius.is_finite()) {
            return bad(format!("sampler.init_radius must be positive, got {}", s.init_radius));
        }
        let d = &self.diagnostics;
        if d.histogram_bins == 0 {
            return bad("diagnostics.histogram_bins must be >= 1".into());
        }
        if d.fm_max_atoms < 2 {
            return bad("diagnostics.fm_max_atoms must be >= 2".into());
        }
        if let Some(study) = &self.study {
            if study.n_values.is_empty() || study.n_values.contains(&0) {
                return bad("study.n_values must be a non-empty list of positive integers".into());
            }
        }
        let e = &self.equilibrium;
        if e.grid_points < 2 || e.density_points < 2 {
            return bad("equilibrium.grid_points and equilibrium.density_points must be >= 2".into());
        }
        let p = &self.prescribe;
        if !(p.target_radius > 0.0 && p.hinge > 0.0 && p.r_max > 0.0) {
            return bad("prescribe.target_radius, hinge and r_max must be positive".into());
        }
        if p.table_points < 2 || p.report_points < 2 {
            return bad("prescribe.table_points and prescribe.report_points must be >= 2".into());
        }
        Ok(())
    }
}
