//! Optional TOML files for the simulation commands. Keys mirror the flag
//! names with `-` replaced by `_`; lists may be arrays or grid strings.

use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Deserialize;

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum ListValue<T> {
    Items(Vec<T>),
    Text(String),
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sim1File {
    pub n: Option<usize>,
    pub targets: Option<ListValue<f64>>,
    pub replications: Option<usize>,
    pub h: Option<f64>,
    pub point: Option<f64>,
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sim2File {
    pub n_list: Option<ListValue<usize>>,
    pub replications: Option<usize>,
    pub grid_h: Option<ListValue<f64>>,
    pub grid_order: Option<ListValue<usize>>,
    pub point: Option<f64>,
    pub eps: Option<f64>,
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoverageFile {
    pub n: Option<usize>,
    pub t: Option<u64>,
    pub h: Option<f64>,
    pub replications: Option<usize>,
    pub alpha: Option<f64>,
    pub seed: Option<u64>,
}

pub fn load<T: DeserializeOwned + Default>(path: Option<&Path>) -> CliResult<T> {
    let Some(path) = path else {
        return Ok(T::default());
    };
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Io(format!("cannot read {}: {e}", path.display())))?;
    toml::from_str(&text)
        .map_err(|e| CliError::Usage(format!("invalid config {}: {e}", path.display())))
}
