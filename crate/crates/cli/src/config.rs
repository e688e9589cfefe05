use std::path::Path;
use std::str::FromStr;

use minlen::CatalogName;
use serde::Deserialize;

use crate::CliError;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateSpec {
    pub name: String,
    #[serde(default)]
    pub shape_args: Vec<f64>,
    #[serde(default)]
    pub seeds: Vec<u64>,
}

impl StateSpec {
    pub fn catalog_name(&self) -> Result<CatalogName, CliError> {
        CatalogName::from_str(&self.name).map_err(|e| CliError::Config(e.to_string()))
    }

    /// One `(seed)` per instance; deterministic states have a single `None`.
    pub fn instances(&self) -> Vec<Option<u64>> {
        if self.seeds.is_empty() {
            vec![None]
        } else {
            self.seeds.iter().map(|&s| Some(s)).collect()
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BinSpec {
    pub delta_k: f64,
    pub delta_x: f64,
    #[serde(default)]
    pub offset: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    /// Absolute part of the pass threshold.
    pub absolute: f64,
    /// Multiplier on the propagated quadrature error.
    pub error_multiplier: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { absolute: minlen::relations::BASE_TOL, error_multiplier: 4.0 }
    }
}

/// Raises the right-hand side of selected relations; used to exercise the
/// failure path.
#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Perturbation {
    pub relation_id: String,
    pub rhs_shift: f64,
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub beta_grid: Vec<f64>,
    pub sigma_grid: Vec<f64>,
    pub alpha_grid: Vec<f64>,
    pub states: Vec<StateSpec>,
    pub bins: Vec<BinSpec>,
    pub tolerances: Tolerances,
    pub perturbations: Vec<Perturbation>,
    pub output_path: Option<String>,
    pub format: Format,
}

impl Default for RunConfig {
    fn default() -> Self {
        let state = |name: &str, seeds: Vec<u64>| StateSpec { name: name.into(), shape_args: vec![], seeds };
        RunConfig {
            beta_grid: vec![1e-3, 0.1, 1.0],
            sigma_grid: vec![1.0],
            alpha_grid: vec![1.0, 1.25, 1.5, 2.0, 3.0],
            states: vec![
                state("uniform_q", vec![]),
                state("raised_cosine_q", vec![]),
                state("truncated_gaussian_q", vec![]),
                state("random_fourier_q", vec![1]),
            ],
            bins: vec![BinSpec { delta_k: 0.5, delta_x: 0.5, offset: 0.0 }],
            tolerances: Tolerances::default(),
            perturbations: vec![],
            output_path: None,
            format: Format::Json,
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<RunConfig, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |msg: String| Err(CliError::Config(msg));
        for (name, grid) in [("beta_grid", &self.beta_grid), ("sigma_grid", &self.sigma_grid), ("alpha_grid", &self.alpha_grid)] {
            if grid.is_empty() {
                return bad(format!("{name} is empty"));
            }
            if grid.iter().any(|v| !v.is_finite()) {
                return bad(format!("{name} has a non-finite entry"));
            }
        }
        if self.beta_grid.iter().any(|&b| b < 0.0) {
            return bad("beta must be >= 0".into());
        }
        if self.sigma_grid.iter().any(|&s| s <= 0.0) {
            return bad("sigma must be > 0".into());
        }
        if self.alpha_grid.iter().any(|&a| a < 1.0) {
            return bad("alpha must be >= 1".into());
        }
        if self.states.is_empty() {
            return bad("states is empty".into());
        }
        for s in &self.states {
            s.catalog_name()?;
        }
        if self.bins.is_empty() {
            return bad("bins is empty".into());
        }
        if self.bins.iter().any(|b| !(b.delta_k > 0.0 && b.delta_x > 0.0 && b.delta_k.is_finite() && b.delta_x.is_finite())) {
            return bad("bin widths must be positive".into());
        }
        let t = self.tolerances;
        if !(t.absolute >= 0.0 && t.error_multiplier >= 0.0 && t.absolute.is_finite() && t.error_multiplier.is_finite()) {
            return bad("tolerances must be finite and >= 0".into());
        }
        for p in &self.perturbations {
            if !minlen::RelationId::ALL.iter().any(|r| r.as_str() == p.relation_id) {
                return bad(format!("unknown relation id `{}`", p.relation_id));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_is_valid() {
        RunConfig::default().validate().unwrap();
    }

    #[test]
    fn partial_document_fills_defaults() {
        let c: RunConfig = serde_json::from_str(r#"{"beta_grid": [0.5], "format": "csv"}"#).unwrap();
        assert_eq!(c.beta_grid, vec![0.5]);
        assert_eq!(c.format, Format::Csv);
        assert_eq!(c.sigma_grid, RunConfig::default().sigma_grid);
    }

    #[test]
    fn rejects_empty_grid_and_unknown_state() {
        let mut c = RunConfig { alpha_grid: vec![], ..RunConfig::default() };
        assert!(c.validate().is_err());
        c.alpha_grid = vec![2.0];
        c.states[0].name = "square_q".into();
        assert!(c.validate().is_err());
        assert!(serde_json::from_str::<RunConfig>(r#"{"beta": [1]}"#).is_err());
    }
}
