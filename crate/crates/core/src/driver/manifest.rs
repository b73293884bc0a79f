use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::DriverError;
use crate::checkers::{registry, ALL_IDS};
use crate::engine::EngineConfig;
use crate::frontend::ast::DeclId;
use crate::wpa::WpaConfig;

fn all_checkers() -> Vec<String> {
    ALL_IDS.iter().map(|s| s.to_string()).collect()
}

fn default_out() -> PathBuf {
    PathBuf::from("analyzer-out")
}

/// Project description read from `manifest.json`. Relative paths are taken
/// from the manifest's directory.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub units: Vec<PathBuf>,
    /// Defaults to `main` when empty and `main` exists.
    #[serde(default)]
    pub entries: Vec<DeclId>,
    #[serde(default = "all_checkers")]
    pub checkers: Vec<String>,
    #[serde(default)]
    pub engine: EngineConfig,
    #[serde(default)]
    pub wpa: WpaConfig,
    #[serde(default = "default_out")]
    pub out: PathBuf,
    #[serde(skip)]
    pub base_dir: PathBuf,
}

impl Manifest {
    pub fn load(path: &Path) -> Result<Manifest, DriverError> {
        let text = std::fs::read_to_string(path).map_err(|e| DriverError::Io(path.to_path_buf(), e))?;
        let mut m: Manifest =
            serde_json::from_str(&text).map_err(|e| DriverError::Manifest(format!("{}: {e}", path.display())))?;
        m.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        m.validate()?;
        Ok(m)
    }

    /// Manifest for units given directly, rooted at `base_dir`.
    pub fn for_units(base_dir: &Path, units: Vec<PathBuf>) -> Manifest {
        Manifest {
            units,
            entries: Vec::new(),
            checkers: all_checkers(),
            engine: EngineConfig::default(),
            wpa: WpaConfig::default(),
            out: default_out(),
            base_dir: base_dir.to_path_buf(),
        }
    }

    pub fn validate(&self) -> Result<(), DriverError> {
        if self.units.is_empty() {
            return Err(DriverError::Manifest("no units listed".into()));
        }
        let mut paths = BTreeSet::new();
        let mut names = BTreeSet::new();
        for u in &self.units {
            let p = self.unit_path(u);
            if !p.is_file() {
                return Err(DriverError::Manifest(format!("unit `{}` does not exist", p.display())));
            }
            if !paths.insert(p.canonicalize().unwrap_or(p.clone())) {
                return Err(DriverError::Manifest(format!("unit `{}` listed twice", u.display())));
            }
            if !names.insert(unit_name(u)) {
                return Err(DriverError::Manifest(format!("unit name `{}` used twice", unit_name(u))));
            }
        }
        registry(&self.checkers).map_err(DriverError::Manifest)?;
        if self.engine.path_budget == 0 {
            return Err(DriverError::Manifest("path_budget must be at least 1".into()));
        }
        Ok(())
    }

    pub fn unit_path(&self, u: &Path) -> PathBuf {
        self.base_dir.join(u)
    }

    pub fn out_dir(&self) -> PathBuf {
        self.base_dir.join(&self.out)
    }

    pub fn reports_dir(&self) -> PathBuf {
        self.out_dir().join("reports")
    }
}

/// Unit name of a source path: its file stem.
pub fn unit_name(path: &Path) -> String {
    path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
}
