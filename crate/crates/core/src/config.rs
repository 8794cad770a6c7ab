//! Backend configuration files.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::gate::NativeGateSet;
use crate::noise::{CrosstalkModel, DepolarizingModel, NoiseProfile, QuasiStaticCoherentModel, SpamModel};
use crate::topology::TopologyGraph;
use crate::transpile::Pass;
use crate::Error;

/// Directory searched for `<preset>.toml` overrides before the built-in files.
pub const CONFIG_DIR_ENV: &str = "QARCH_CONFIG_DIR";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BackendConfig {
    pub name: String,
    /// Preset topology name or a path to a topology file.
    pub topology: String,
    pub native: String,
    #[serde(default = "default_passes")]
    pub passes: Vec<String>,
    #[serde(default)]
    pub spam: SpamModel,
    #[serde(default)]
    pub depolarizing: DepolarizingModel,
    #[serde(default)]
    pub coherent: QuasiStaticCoherentModel,
    #[serde(default)]
    pub crosstalk: CrosstalkModel,
}

fn default_passes() -> Vec<String> {
    Pass::DEFAULT.iter().map(|p| p.name().to_string()).collect()
}

/// (backend name, file stem, contents)
const PRESETS: [(&str, &str, &str); 4] = [
    ("ionq", "ionq-11", include_str!("../data/backends/ionq-11.toml")),
    (
        "ibm-melbourne",
        "ibm-melbourne-15",
        include_str!("../data/backends/ibm-melbourne-15.toml"),
    ),
    (
        "ibm-vigo",
        "ibm-vigo-5",
        include_str!("../data/backends/ibm-vigo-5.toml"),
    ),
    (
        "rigetti-aspen8",
        "rigetti-aspen8-31",
        include_str!("../data/backends/rigetti-aspen8-31.toml"),
    ),
];

impl BackendConfig {
    pub const PRESET_NAMES: [&'static str; 4] = ["ionq", "ibm-melbourne", "ibm-vigo", "rigetti-aspen8"];

    pub fn parse(text: &str) -> Result<Self, Error> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configs serialize")
    }

    pub fn load(path: &Path) -> Result<Self, Error> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        BackendConfig::parse(&text)
    }

    /// Looks up a preset by backend name or file stem. A file of the same
    /// stem in `$QARCH_CONFIG_DIR` takes precedence over the built-in copy.
    pub fn preset(name: &str) -> Result<Self, Error> {
        let (_, stem, text) = PRESETS
            .iter()
            .find(|(n, s, _)| *n == name || *s == name)
            .ok_or_else(|| Error::UnknownBackend(name.to_string()))?;
        if let Some(dir) = std::env::var_os(CONFIG_DIR_ENV) {
            let path = PathBuf::from(dir).join(format!("{stem}.toml"));
            if path.is_file() {
                return BackendConfig::load(&path);
            }
        }
        BackendConfig::parse(text)
    }

    pub fn preset_file_stem(name: &str) -> Option<&'static str> {
        PRESETS
            .iter()
            .find(|(n, s, _)| *n == name || *s == name)
            .map(|(_, s, _)| *s)
    }
}

/// A configuration with its references resolved.
#[derive(Debug, Clone, PartialEq)]
pub struct Backend {
    pub name: String,
    pub topology: TopologyGraph,
    pub native: NativeGateSet,
    pub passes: Vec<Pass>,
    pub spam: SpamModel,
    pub depolarizing: DepolarizingModel,
    pub coherent: QuasiStaticCoherentModel,
    pub crosstalk: CrosstalkModel,
}

impl Backend {
    pub fn from_config(cfg: &BackendConfig) -> Result<Self, Error> {
        let topology = if TopologyGraph::PRESET_NAMES.contains(&cfg.topology.as_str()) {
            TopologyGraph::preset(&cfg.topology)?
        } else {
            TopologyGraph::load(Path::new(&cfg.topology))?
        };
        let native = NativeGateSet::by_name(&cfg.native).ok_or_else(|| {
            Error::Config(format!("native set {:?} is not one of xx, zx, cz", cfg.native))
        })?;
        let passes = cfg
            .passes
            .iter()
            .map(|p| p.parse())
            .collect::<Result<Vec<Pass>, _>>()?;
        let backend = Backend {
            name: cfg.name.clone(),
            topology,
            native,
            passes,
            spam: cfg.spam,
            depolarizing: cfg.depolarizing,
            coherent: cfg.coherent,
            crosstalk: cfg.crosstalk,
        };
        backend.profile().validate()?;
        Ok(backend)
    }

    pub fn preset(name: &str) -> Result<Self, Error> {
        Backend::from_config(&BackendConfig::preset(name)?)
    }

    pub fn profile(&self) -> NoiseProfile {
        NoiseProfile {
            spam: self.spam,
            depol: self.depolarizing,
            coherent: self.coherent,
            crosstalk: self.crosstalk,
            topology: Some(self.topology.clone()),
        }
    }

    pub fn to_config(&self) -> BackendConfig {
        BackendConfig {
            name: self.name.clone(),
            topology: self.topology.name().to_string(),
            native: self.native.name.clone(),
            passes: self.passes.iter().map(|p| p.name().to_string()).collect(),
            spam: self.spam,
            depolarizing: self.depolarizing,
            coherent: self.coherent,
            crosstalk: self.crosstalk,
        }
    }

    /// Same backend with every noise channel switched off.
    pub fn noiseless(&self) -> Self {
        Backend {
            spam: SpamModel::default(),
            depolarizing: DepolarizingModel::default(),
            coherent: QuasiStaticCoherentModel::default(),
            crosstalk: CrosstalkModel::default(),
            ..self.clone()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_resolve() {
        for name in BackendConfig::PRESET_NAMES {
            let b = Backend::preset(name).unwrap();
            assert_eq!(b.name, name);
            let stem = BackendConfig::preset_file_stem(name).unwrap();
            assert_eq!(Backend::preset(stem).unwrap(), b);
        }
        assert!(matches!(Backend::preset("dwave"), Err(Error::UnknownBackend(_))));
    }

    #[test]
    fn toml_round_trip() {
        for name in BackendConfig::PRESET_NAMES {
            let cfg = BackendConfig::preset(name).unwrap();
            assert_eq!(BackendConfig::parse(&cfg.to_toml()).unwrap(), cfg);
        }
    }

    #[test]
    fn rejects_bad_configs() {
        let base = "name = \"x\"\ntopology = \"ibm-vigo-5\"\n";
        assert!(Backend::from_config(&BackendConfig::parse(&format!("{base}native = \"cnot\"")).unwrap()).is_err());
        assert!(BackendConfig::parse(&format!("{base}native = \"cz\"\nbogus = 1")).is_err());
        let cfg = BackendConfig::parse(&format!(
            "{base}native = \"cz\"\n[spam]\np_read_0 = 2.0\np_read_1 = 0.0"
        ))
        .unwrap();
        assert!(Backend::from_config(&cfg).is_err());
        let cfg = BackendConfig::parse("name = \"x\"\ntopology = \"nowhere.topo\"\nnative = \"cz\"").unwrap();
        assert!(Backend::from_config(&cfg).is_err());
    }

    #[test]
    fn default_pass_list() {
        let cfg = BackendConfig::parse("name = \"x\"\ntopology = \"ionq-11\"\nnative = \"xx\"").unwrap();
        assert_eq!(Backend::from_config(&cfg).unwrap().passes, Pass::DEFAULT.to_vec());
    }
}
