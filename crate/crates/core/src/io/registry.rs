use std::path::Path;

use super::dataset::{load_csv, Dataset, LoadOptions};
use crate::error::{Error, Result};

/// Environment variable naming a directory with user-supplied copies of the
/// registered datasets (`<key>.csv`).
pub const DATA_DIR_ENV: &str = "ALPHACOMP_DATA_DIR";

/// A known real dataset. The data themselves are not shipped; a CSV with a
/// header row matching `labels` must be supplied.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegistryEntry {
    pub key: &'static str,
    pub name: &'static str,
    pub labels: &'static [&'static str],
    pub provenance: &'static str,
    /// Fitted α reported for this dataset in the literature.
    pub reference_alpha: f64,
}

const REGISTRY: [RegistryEntry; 4] = [
    RegistryEntry {
        key: "mammals",
        name: "Mammals",
        labels: &["water", "protein", "fat", "lactose", "ash"],
        provenance: "milk composition of 24 mammals (Hartigan 1975, Clustering Algorithms)",
        reference_alpha: 0.06,
    },
    RegistryEntry {
        key: "clams",
        name: "East Bay Clams",
        labels: &["dl", "dm", "ds"],
        provenance: "colour-size proportions of 20 East Bay clam colonies (Aitchison 1986)",
        reference_alpha: 0.28,
    },
    RegistryEntry {
        key: "oecd",
        name: "OECD",
        labels: &["PCINC", "AGR", "IND", "SER"],
        provenance: "per capita income and labour-force shares, 20 European OECD countries, 1960 (DASL)",
        reference_alpha: 0.14,
    },
    RegistryEntry {
        key: "grta",
        name: "GRTA",
        labels: &["Killed", "Seriously injured", "Slightly injured"],
        provenance: "monthly Greek road-accident casualty counts, Jan 2010 to Aug 2017",
        reference_alpha: -0.04,
    },
];

pub fn registry() -> &'static [RegistryEntry] {
    &REGISTRY
}

/// Case-insensitive lookup by key or display name.
pub fn lookup(name: &str) -> Option<&'static RegistryEntry> {
    let name = name.trim();
    REGISTRY
        .iter()
        .find(|e| e.key.eq_ignore_ascii_case(name) || e.name.eq_ignore_ascii_case(name))
}

impl RegistryEntry {
    pub fn file_name(&self) -> String {
        format!("{}.csv", self.key)
    }

    /// Check that a loaded dataset has this entry's columns, in order.
    pub fn validate(&self, data: &Dataset) -> Result<()> {
        let ok = data.component_labels.len() == self.labels.len()
            && data
                .component_labels
                .iter()
                .zip(self.labels)
                .all(|(a, b)| a.trim().eq_ignore_ascii_case(b));
        if !ok {
            return Err(Error::Config(format!(
                "{} expects columns {:?}, found {:?}",
                self.name, self.labels, data.component_labels
            )));
        }
        Ok(())
    }

    /// Load `<dir>/<key>.csv` with `opts`, validate it and attach the
    /// registry name and provenance.
    pub fn load(&self, dir: &Path, opts: &LoadOptions) -> Result<Dataset> {
        let mut data = load_csv(&dir.join(self.file_name()), opts)?;
        self.validate(&data)?;
        data.name = self.name.to_string();
        data.provenance = self.provenance.to_string();
        Ok(data)
    }
}
