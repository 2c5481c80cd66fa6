// Copyright 2026 The cfpe Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

//! Experiment configuration: schema, presets, file loading and layering.
//!
//! Resolution order is built-in defaults, then a preset, then the config
//! file, then command-line flags. Layers are merged as JSON trees and the
//! result is deserialized once, so unknown keys are rejected wherever they
//! appear.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::CliError;
use crate::cavity::{CavityConfig, Vec3};
use crate::error::Error;
use crate::protocol::{PostSelectionConvention, DEFAULT_FOCK_DIM};
use crate::weakvalues::{PointerConfig, WeakValueOrdering};
use crate::zeno::ZenoModel;

/// Observables addressable from configuration files and flags.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ObservableName {
    PiI,
    PiIi,
    HI,
    HIi,
    Identity,
    FieldH,
    PiIN0,
    PiIN1,
    PiIiN0,
    PiIiN1,
}

impl ObservableName {
    pub const ALL: [ObservableName; 10] = [
        ObservableName::PiI,
        ObservableName::PiIi,
        ObservableName::HI,
        ObservableName::HIi,
        ObservableName::Identity,
        ObservableName::FieldH,
        ObservableName::PiIN0,
        ObservableName::PiIN1,
        ObservableName::PiIiN0,
        ObservableName::PiIiN1,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ObservableName::PiI => "pi-i",
            ObservableName::PiIi => "pi-ii",
            ObservableName::HI => "h-i",
            ObservableName::HIi => "h-ii",
            ObservableName::Identity => "identity",
            ObservableName::FieldH => "field-h",
            ObservableName::PiIN0 => "pi-i-n0",
            ObservableName::PiIN1 => "pi-i-n1",
            ObservableName::PiIiN0 => "pi-ii-n0",
            ObservableName::PiIiN1 => "pi-ii-n1",
        }
    }
}

impl fmt::Display for ObservableName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ObservableName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        ObservableName::ALL
            .into_iter()
            .find(|o| o.as_str() == s)
            .ok_or_else(|| Error::Parameter(format!("unknown observable '{s}'")))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct WeakvalsSection {
    pub convention: PostSelectionConvention,
    pub ordering: WeakValueOrdering,
    pub fock_dim: usize,
    /// Extra observables reported after the arm quadruple.
    pub operators: Vec<ObservableName>,
}

impl Default for WeakvalsSection {
    fn default() -> Self {
        WeakvalsSection {
            convention: PostSelectionConvention::ClaimConsistent,
            ordering: WeakValueOrdering::PostApre,
            fock_dim: DEFAULT_FOCK_DIM,
            operators: Vec::new(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PointerSection {
    pub convention: PostSelectionConvention,
    pub operator: ObservableName,
    pub g_values: Vec<f64>,
    pub grid_min: f64,
    pub grid_max: f64,
    pub samples: usize,
    pub sigma: f64,
    pub fock_dim: usize,
}

impl Default for PointerSection {
    fn default() -> Self {
        let p = PointerConfig::default();
        PointerSection {
            convention: PostSelectionConvention::ClaimConsistent,
            operator: ObservableName::PiIi,
            g_values: vec![0.1, 0.05, 0.025],
            grid_min: p.grid_min,
            grid_max: p.grid_max,
            samples: p.samples,
            sigma: p.sigma,
            fock_dim: DEFAULT_FOCK_DIM,
        }
    }
}

impl PointerSection {
    pub fn pointer(&self, g: f64) -> PointerConfig {
        PointerConfig {
            grid_min: self.grid_min,
            grid_max: self.grid_max,
            samples: self.samples,
            sigma: self.sigma,
            coupling_g: g,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ZenoSection {
    pub model: ZenoModel,
    pub cycles: usize,
    pub runs: usize,
    pub convention: PostSelectionConvention,
    pub interaction_dt: f64,
    /// N values for the survival curve.
    pub n_values: Vec<usize>,
}

impl Default for ZenoSection {
    fn default() -> Self {
        ZenoSection {
            model: ZenoModel::Interrogation,
            cycles: 100,
            runs: 10_000,
            convention: PostSelectionConvention::ClaimConsistent,
            interaction_dt: 0.0,
            n_values: vec![1, 2, 5, 10, 20, 50, 100],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CavitySection {
    pub length: f64,
    pub omega: f64,
    pub photon_momentum: Vec3,
    pub polarization: Vec3,
    pub electron_momentum: Vec3,
    pub electron_polarization: Vec3,
    pub position: Vec3,
    pub fock_dim: usize,
    /// Interaction times for the emission series.
    pub dt_values: Vec<f64>,
}

impl Default for CavitySection {
    fn default() -> Self {
        let c = CavityConfig::default();
        CavitySection {
            length: c.length,
            omega: c.omega,
            photon_momentum: c.photon_momentum,
            polarization: c.polarization,
            electron_momentum: c.electron_momentum,
            electron_polarization: c.electron_polarization,
            position: c.position,
            fock_dim: c.fock_dim,
            dt_values: vec![0.0, 1e-4, 1e-3, 1e-2, 0.1, 0.2, 0.5],
        }
    }
}

impl CavitySection {
    pub fn cavity(&self) -> CavityConfig {
        CavityConfig {
            length: self.length,
            omega: self.omega,
            photon_momentum: self.photon_momentum,
            polarization: self.polarization,
            electron_momentum: self.electron_momentum,
            electron_polarization: self.electron_polarization,
            position: self.position,
            fock_dim: self.fock_dim,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum CommandName {
    Weakvals,
    Pointer,
    Zeno,
    Cavity,
    Sweep,
}

impl CommandName {
    pub fn as_str(self) -> &'static str {
        match self {
            CommandName::Weakvals => "weakvals",
            CommandName::Pointer => "pointer",
            CommandName::Zeno => "zeno",
            CommandName::Cavity => "cavity",
            CommandName::Sweep => "sweep",
        }
    }

    pub fn uses_randomness(self) -> bool {
        matches!(self, CommandName::Zeno)
    }
}

/// Cartesian grid over configuration keys. Keys without a dot refer to the
/// swept command's own section; dotted keys (`cavity.length`) address any
/// section.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub command: CommandName,
    pub grid: BTreeMap<String, Vec<Value>>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub seed: Option<u64>,
    pub weakvals: WeakvalsSection,
    pub pointer: PointerSection,
    pub zeno: ZenoSection,
    pub cavity: CavitySection,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSection>,
}

/// Named starting points for the headline experiments.
#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Preset {
    /// Arm weak values with the claim-consistent post-selection.
    ArmWeakValues,
    /// Pointer shift against g for the arm-II energy.
    PointerShiftLaw,
    /// Interrogation-model recycling at N = 100.
    ZenoRecycling,
    /// Photon regeneration and emission in the cavity.
    CavityTransition,
}

impl Preset {
    pub fn as_str(self) -> &'static str {
        match self {
            Preset::ArmWeakValues => "arm-weak-values",
            Preset::PointerShiftLaw => "pointer-shift-law",
            Preset::ZenoRecycling => "zeno-recycling",
            Preset::CavityTransition => "cavity-transition",
        }
    }

    pub fn config(self) -> ExperimentConfig {
        let mut c = ExperimentConfig::default();
        match self {
            Preset::ArmWeakValues => {
                c.weakvals.operators = vec![ObservableName::Identity, ObservableName::FieldH];
            }
            Preset::PointerShiftLaw => {
                c.pointer.operator = ObservableName::HIi;
                c.pointer.g_values = vec![0.0, 0.1, 0.05, 0.025];
            }
            Preset::ZenoRecycling => {
                c.zeno.model = ZenoModel::Interrogation;
                c.zeno.cycles = 100;
                c.zeno.runs = 100_000;
                c.zeno.n_values = vec![1, 2, 10, 100, 1000];
            }
            Preset::CavityTransition => {
                c.cavity.dt_values = vec![0.0, 1e-5, 1e-4, 1e-3, 4e-3, 0.01, 0.1, 0.3, 0.6];
            }
        }
        c
    }
}

/// Reads a TOML or JSON config file into a JSON tree. A result record (JSON
/// with `experiment` and `config` keys) is accepted and its embedded config
/// is used.
pub fn load_layer(path: &Path) -> Result<Value, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    let is_json = path.extension().is_some_and(|e| e == "json");
    let value: Value = if is_json {
        serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?
    } else {
        toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?
    };
    if !value.is_object() {
        return Err(CliError::Config(format!("{}: top level must be a table", path.display())));
    }
    match (value.get("experiment"), value.get("config")) {
        (Some(_), Some(cfg)) => Ok(cfg.clone()),
        _ => Ok(value),
    }
}

/// Recursively overlays `top` onto `base`; tables merge, everything else is
/// replaced.
pub fn merge(base: &mut Value, top: Value) {
    match (base, top) {
        (Value::Object(b), Value::Object(t)) => {
            for (k, v) in t {
                match b.get_mut(&k) {
                    Some(slot) if slot.is_object() && v.is_object() => merge(slot, v),
                    _ => {
                        b.insert(k, v);
                    }
                }
            }
        }
        (slot, v) => *slot = v,
    }
}

/// Sets `path` (dot-separated) inside a JSON tree, creating tables as needed.
pub fn set_path(root: &mut Value, path: &str, value: Value) -> Result<(), CliError> {
    let mut cur = root;
    let parts: Vec<&str> = path.split('.').collect();
    for (i, part) in parts.iter().enumerate() {
        if part.is_empty() {
            return Err(CliError::Config(format!("empty component in key '{path}'")));
        }
        let obj = cur
            .as_object_mut()
            .ok_or_else(|| CliError::Config(format!("key '{path}' descends into a non-table value")))?;
        if i + 1 == parts.len() {
            obj.insert(part.to_string(), value);
            return Ok(());
        }
        cur = obj.entry(part.to_string()).or_insert_with(|| Value::Object(Default::default()));
    }
    Ok(())
}

pub fn to_value(cfg: &ExperimentConfig) -> Value {
    serde_json::to_value(cfg).expect("config serializes")
}

pub fn from_value(v: Value) -> Result<ExperimentConfig, CliError> {
    serde_json::from_value(v).map_err(|e| CliError::Config(format!("invalid configuration: {e}")))
}
