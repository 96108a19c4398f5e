//! Pipeline configuration file (TOML). Every field has a default, so an
//! empty file or no file at all is valid.

use std::path::{Path, PathBuf};

use boardmap_core::graph::LayoutParams;
use boardmap_core::textgen::prompt_battery;
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum BackendKind {
    #[default]
    Surrogate,
    Remote,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GenerateConfig {
    pub backend: BackendKind,
    pub endpoint: Option<String>,
    pub num_lines: u32,
    pub batches: u32,
    pub max_chars_per_line: u32,
    pub temperature: f64,
    pub max_in_flight: usize,
    pub timeout_secs: u64,
    pub prompts: Vec<String>,
}

impl Default for GenerateConfig {
    fn default() -> Self {
        GenerateConfig {
            backend: BackendKind::Surrogate,
            endpoint: None,
            num_lines: 100,
            batches: 100,
            max_chars_per_line: 100,
            temperature: 1.0,
            max_in_flight: 4,
            timeout_secs: 120,
            prompts: prompt_battery(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub store: PathBuf,
    pub export: PathBuf,
    /// Narration template file; the bundled templates when absent.
    pub templates: Option<PathBuf>,
    pub seed: u64,
    pub generate: GenerateConfig,
    pub layout: LayoutParams,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            store: PathBuf::from("store"),
            export: PathBuf::from("export"),
            templates: None,
            seed: 0,
            generate: GenerateConfig::default(),
            layout: LayoutParams::default(),
        }
    }
}

impl PipelineConfig {
    pub fn load(path: &Path) -> Result<PipelineConfig, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Usage(format!("config {}: {e}", path.display())))?;
        PipelineConfig::parse(&text).map_err(|e| CliError::Usage(format!("config {}: {e}", path.display())))
    }

    pub fn parse(text: &str) -> Result<PipelineConfig, toml::de::Error> {
        toml::from_str(text)
    }

    /// Canonical text used for the manifest's config hash.
    pub fn canonical(&self) -> String {
        toml::to_string(self).unwrap_or_default()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_config_is_default() {
        assert_eq!(PipelineConfig::parse("").unwrap(), PipelineConfig::default());
    }

    #[test]
    fn overrides_and_unknown_keys() {
        let c = PipelineConfig::parse("seed = 5\n[generate]\nbackend = \"remote\"\nbatches = 2\n[layout]\niterations = 10\n").unwrap();
        assert_eq!(c.seed, 5);
        assert_eq!(c.generate.backend, BackendKind::Remote);
        assert_eq!(c.generate.batches, 2);
        assert_eq!(c.generate.num_lines, 100);
        assert_eq!(c.layout.iterations, 10);
        assert!(PipelineConfig::parse("sede = 5").is_err());
    }
}
