use std::path::Path;

use enn::net::in_sieve;
use enn::{EnnParams, SieveSpec, Tau};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

/// A trained network as persisted by `enn train`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelFile {
    pub tau: Tau,
    pub sieve: SieveSpec,
    pub params: EnnParams,
    pub risk: f64,
}

impl ModelFile {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let model: ModelFile = serde_json::from_str(&text).map_err(|e| CliError::parse(path, e))?;
        model.params.validate()?;
        if model.params.width() != model.sieve.r || model.params.dim() != Some(model.sieve.d) {
            return Err(CliError::parse(path, "parameter shapes do not match the sieve"));
        }
        if !in_sieve(&model.params, &model.sieve) {
            return Err(CliError::parse(path, "model parameters lie outside their sieve"));
        }
        Ok(model)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut text = serde_json::to_string_pretty(self).expect("model serializes");
        text.push('\n');
        std::fs::write(path, text).map_err(|e| CliError::io(path, e))
    }
}

/// `model.json` for a single tau, `model_tau0.9.json` style names otherwise.
pub fn model_file_name(tau: Tau, many: bool) -> String {
    if many {
        format!("model_tau{}.json", tau.value())
    } else {
        "model.json".to_string()
    }
}

pub fn predictions_file_name(tau: Tau, many: bool) -> String {
    if many {
        format!("predictions_tau{}.csv", tau.value())
    } else {
        "predictions.csv".to_string()
    }
}
