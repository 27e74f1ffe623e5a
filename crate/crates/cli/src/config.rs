use anyhow::{bail, Context, Result};
use ccpb_core::presets::EtaRule;
use ccpb_core::{BoundaryData, Grid, IonSystem, Model, SolverConfig};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelName {
    Ccpb,
    Pb,
}

impl From<ModelName> for Model {
    fn from(m: ModelName) -> Self {
        match m {
            ModelName::Ccpb => Model::Ccpb,
            ModelName::Pb => Model::Pb,
        }
    }
}

/// One named ion system; entries are `[valence, concentration]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpeciesSet {
    pub name: String,
    pub anions: Vec<[f64; 2]>,
    pub cations: Vec<[f64; 2]>,
}

impl SpeciesSet {
    pub fn system(&self) -> Result<IonSystem> {
        let pairs = |v: &[[f64; 2]]| v.iter().map(|p| (p[0], p[1])).collect::<Vec<_>>();
        IonSystem::from_pairs(&pairs(&self.anions), &pairs(&self.cations))
            .with_context(|| format!("species set `{}`", self.name))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum EtaRuleConfig {
    Zero,
    Const { value: f64 },
    /// `eta = coef * eps^power`
    Scaled { coef: f64, power: f64 },
}

impl From<EtaRuleConfig> for EtaRule {
    fn from(e: EtaRuleConfig) -> Self {
        match e {
            EtaRuleConfig::Zero => EtaRule::Zero,
            EtaRuleConfig::Const { value } => EtaRule::Const(value),
            EtaRuleConfig::Scaled { coef, power } => EtaRule::Scaled { coef, power },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum GridConfig {
    Uniform { cells: usize },
    /// `min_cell = min_cell_eps2 * eps^2`, interior spacing `interior_eps * eps`.
    Graded {
        min_cell_eps2: f64,
        growth: f64,
        interior_eps: f64,
    },
}

impl GridConfig {
    pub fn build(&self, eps: f64) -> Result<Grid> {
        Ok(match *self {
            GridConfig::Uniform { cells } => Grid::uniform(cells)?,
            GridConfig::Graded { min_cell_eps2, growth, interior_eps } => {
                Grid::graded(min_cell_eps2 * eps * eps, growth, (interior_eps * eps).min(0.5))?
            }
        })
    }
}

fn default_relax_c() -> f64 {
    0.5
}
fn default_tol() -> f64 {
    1e-6
}
fn default_max_iter() -> usize {
    2_000_000
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSection {
    /// Fixed relaxation weight; absent means `relax_c * eps^2`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s: Option<f64>,
    #[serde(default = "default_relax_c")]
    pub relax_c: f64,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
}

impl Default for SolverSection {
    fn default() -> Self {
        Self {
            s: None,
            relax_c: default_relax_c(),
            tol: default_tol(),
            max_iter: default_max_iter(),
        }
    }
}

impl SolverSection {
    pub fn solver_config(&self) -> SolverConfig {
        SolverConfig {
            relax_s: self.s,
            relax_c: self.relax_c,
            tol: self.tol,
            max_iter: self.max_iter,
            keep_history: false,
            ..Default::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub min: f64,
    pub max: f64,
    pub points: usize,
}

impl Default for SweepSection {
    fn default() -> Self {
        Self { min: 1e-3, max: 1e3, points: 200 }
    }
}

fn default_dir() -> String {
    "out".into()
}
fn default_precision() -> usize {
    6
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(default = "default_dir")]
    pub dir: String,
    /// Significant digits in CSV cells.
    #[serde(default = "default_precision")]
    pub precision: usize,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self { dir: default_dir(), precision: default_precision() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub name: String,
    pub models: Vec<ModelName>,
    pub phi_plus: f64,
    pub phi_minus: f64,
    #[serde(default)]
    pub eps: Vec<f64>,
    /// Explicit gamma values for `limits`; when empty the eta rule's limit is used.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub gammas: Vec<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub kappa: Vec<f64>,
    pub eta_rule: EtaRuleConfig,
    pub grid: GridConfig,
    #[serde(default)]
    pub solver: SolverSection,
    #[serde(default)]
    pub sweep: SweepSection,
    #[serde(default)]
    pub outputs: OutputSection,
    pub species: Vec<SpeciesSet>,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> Result<String> {
        Ok(toml::to_string(self)?)
    }

    pub fn validate(&self) -> Result<()> {
        if self.name.is_empty() || !self.name.chars().all(|c| c.is_ascii_alphanumeric() || "-_.".contains(c)) {
            bail!("config name `{}` must be non-empty and use only [A-Za-z0-9._-]", self.name);
        }
        if self.species.is_empty() {
            bail!("at least one species set is required");
        }
        for s in &self.species {
            s.system()?;
        }
        if let Some(e) = self.eps.iter().find(|e| !(**e > 0.0 && **e < 1.0)) {
            bail!("eps values must lie in (0, 1), got {e}");
        }
        if let Some(g) = self.gammas.iter().find(|g| !(g.is_finite() && **g >= 0.0)) {
            bail!("gamma values must be finite and non-negative, got {g}");
        }
        if let Some(k) = self.kappa.iter().find(|k| !(**k > 0.0 && **k < 1.0)) {
            bail!("kappa values must lie in (0, 1), got {k}");
        }
        if !self.phi_plus.is_finite() || !self.phi_minus.is_finite() {
            bail!("boundary potentials must be finite");
        }
        if self.outputs.precision == 0 || self.outputs.precision > 17 {
            bail!("precision must be between 1 and 17");
        }
        if !(self.sweep.min > 0.0 && self.sweep.max > self.sweep.min && self.sweep.points >= 2) {
            bail!("sweep needs 0 < min < max and at least 2 points");
        }
        Ok(())
    }

    pub fn eta_rule(&self) -> EtaRule {
        self.eta_rule.into()
    }

    pub fn boundary(&self, eps: f64) -> Result<BoundaryData> {
        Ok(self.eta_rule().boundary(self.phi_plus, self.phi_minus, eps)?)
    }

    /// Gammas for `limits`: the explicit list or the eta rule's limit.
    pub fn limit_gammas(&self) -> Result<Vec<f64>> {
        if !self.gammas.is_empty() {
            return Ok(self.gammas.clone());
        }
        match self.eta_rule().gamma() {
            Some(g) => Ok(vec![g]),
            None => bail!("eta/eps diverges for this eta rule; give explicit `gammas`"),
        }
    }

    pub fn sweep_gammas(&self) -> Vec<f64> {
        ccpb_core::limits::log_spaced(self.sweep.min, self.sweep.max, self.sweep.points)
    }
}
