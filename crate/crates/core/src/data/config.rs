//! Ingestion config: a versioned TOML document describing every column.
//!
//! ```toml
//! version = 1
//! default_kind = "numeric-raw"   # optional; unlisted columns are errors without it
//!
//! [[columns]]
//! name = "CustomerID"
//! kind = "id"
//!
//! [[columns]]
//! name = "MonthlyRevenue"
//! kind = "numeric-binned"
//! bins = "equal-width:8"         # or "quantile:4", or explicit edges [0.0, 10.0, 50.0]
//! missing = "fill-mode"          # or "drop-row", or { fill = 0.0 }
//!
//! [[columns]]
//! name = "Churn"
//! kind = "target"
//! ```

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const CONFIG_VERSION: u32 = 1;

/// Extra tables a run file may carry next to the data config.
pub const RUN_SECTIONS: [&str; 2] = ["smote", "evaluate"];

/// Suffix given to binned columns in processed output.
pub const BINNED_SUFFIX: &str = "_Bin";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ColumnKind {
    Id,
    Categorical,
    NumericBinned,
    NumericRaw,
    Target,
    /// Present in the input but excluded from the dataset.
    Ignore,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawBins", into = "RawBins")]
pub enum BinSpec {
    Edges(Vec<f64>),
    EqualWidth(usize),
    Quantile(usize),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
enum RawBins {
    Edges(Vec<f64>),
    Scheme(String),
}

impl TryFrom<RawBins> for BinSpec {
    type Error = String;

    fn try_from(raw: RawBins) -> std::result::Result<Self, String> {
        match raw {
            RawBins::Edges(edges) => {
                if edges.len() < 2 {
                    return Err("explicit bin edges need at least two values".into());
                }
                if edges.iter().any(|e| !e.is_finite()) || edges.windows(2).any(|w| w[0] >= w[1]) {
                    return Err(format!("bin edges must be finite and strictly increasing: {edges:?}"));
                }
                Ok(BinSpec::Edges(edges))
            }
            RawBins::Scheme(s) => {
                let (scheme, k) = s
                    .split_once(':')
                    .ok_or_else(|| format!("bin scheme `{s}` should look like equal-width:K"))?;
                let k: usize = k
                    .trim()
                    .parse()
                    .map_err(|_| format!("bin count in `{s}` is not a positive integer"))?;
                if k == 0 {
                    return Err(format!("bin count in `{s}` must be at least 1"));
                }
                match scheme.trim() {
                    "equal-width" => Ok(BinSpec::EqualWidth(k)),
                    "quantile" => Ok(BinSpec::Quantile(k)),
                    other => Err(format!("unknown bin scheme `{other}`")),
                }
            }
        }
    }
}

impl From<BinSpec> for RawBins {
    fn from(spec: BinSpec) -> Self {
        match spec {
            BinSpec::Edges(e) => RawBins::Edges(e),
            BinSpec::EqualWidth(k) => RawBins::Scheme(format!("equal-width:{k}")),
            BinSpec::Quantile(k) => RawBins::Scheme(format!("quantile:{k}")),
        }
    }
}

impl BinSpec {
    /// Number of bins this spec produces at most.
    pub fn max_bins(&self) -> usize {
        match self {
            BinSpec::Edges(e) => e.len() - 1,
            BinSpec::EqualWidth(k) | BinSpec::Quantile(k) => *k,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawMissing", into = "RawMissing")]
pub enum MissingPolicy {
    DropRow,
    FillValue(String),
    FillMode,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
enum RawMissing {
    Named(String),
    Fill { fill: FillValue },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
enum FillValue {
    Int(i64),
    Float(f64),
    Text(String),
}

impl TryFrom<RawMissing> for MissingPolicy {
    type Error = String;

    fn try_from(raw: RawMissing) -> std::result::Result<Self, String> {
        match raw {
            RawMissing::Named(s) => match s.as_str() {
                "drop-row" => Ok(MissingPolicy::DropRow),
                "fill-mode" => Ok(MissingPolicy::FillMode),
                other => Err(format!(
                    "unknown missing policy `{other}` (expected drop-row, fill-mode or {{ fill = ... }})"
                )),
            },
            RawMissing::Fill { fill } => Ok(MissingPolicy::FillValue(match fill {
                FillValue::Int(i) => i.to_string(),
                FillValue::Float(f) => f.to_string(),
                FillValue::Text(t) => t,
            })),
        }
    }
}

impl From<MissingPolicy> for RawMissing {
    fn from(policy: MissingPolicy) -> Self {
        match policy {
            MissingPolicy::DropRow => RawMissing::Named("drop-row".into()),
            MissingPolicy::FillMode => RawMissing::Named("fill-mode".into()),
            MissingPolicy::FillValue(v) => RawMissing::Fill {
                fill: FillValue::Text(v),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ColumnSpec {
    pub name: String,
    pub kind: ColumnKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bins: Option<BinSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub missing: Option<MissingPolicy>,
    /// Round synthetic values of this (discrete) column to the nearest level.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub round_synthetic: bool,
}

impl ColumnSpec {
    pub fn new(name: impl Into<String>, kind: ColumnKind) -> Self {
        Self {
            name: name.into(),
            kind,
            bins: None,
            missing: None,
            round_synthetic: false,
        }
    }

    /// Header name this column has after preprocessing.
    pub fn processed_name(&self) -> String {
        match self.kind {
            ColumnKind::NumericBinned => format!("{}{}", self.name, BINNED_SUFFIX),
            _ => self.name.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataConfig {
    pub version: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub default_kind: Option<ColumnKind>,
    pub columns: Vec<ColumnSpec>,
}

impl DataConfig {
    /// All columns numeric except `target`; any other listed kinds must be
    /// added by the caller.
    pub fn numeric_with_target(target: &str) -> Self {
        Self {
            version: CONFIG_VERSION,
            default_kind: Some(ColumnKind::NumericRaw),
            columns: vec![ColumnSpec::new(target, ColumnKind::Target)],
        }
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let config: DataConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    /// Parses a run file: the data config plus any of the extra `sections`
    /// (e.g. `smote`, `evaluate`), which come back untouched.
    pub fn from_run_toml_str(text: &str, sections: &[&str]) -> Result<(Self, toml::Table)> {
        let mut table: toml::Table = text
            .parse()
            .map_err(|e: toml::de::Error| Error::Config(e.to_string()))?;
        let mut extra = toml::Table::new();
        for name in sections {
            if let Some(v) = table.remove(*name) {
                if !v.is_table() {
                    return Err(Error::Config(format!("`{name}` must be a table")));
                }
                extra.insert((*name).to_owned(), v);
            }
        }
        let config: DataConfig = table
            .try_into()
            .map_err(|e: toml::de::Error| Error::Config(e.to_string()))?;
        config.validate()?;
        Ok((config, extra))
    }

    pub fn validate(&self) -> Result<()> {
        if self.version != CONFIG_VERSION {
            return Err(Error::Config(format!(
                "unsupported config version {} (expected {CONFIG_VERSION})",
                self.version
            )));
        }
        if matches!(self.default_kind, Some(ColumnKind::Id | ColumnKind::Target)) {
            return Err(Error::Config("default_kind cannot be id or target".into()));
        }
        let mut seen = HashSet::new();
        for col in &self.columns {
            if !seen.insert(col.name.as_str()) {
                return Err(Error::Config(format!("column `{}` listed twice", col.name)));
            }
            match (col.kind, &col.bins) {
                (ColumnKind::NumericBinned, None) => {
                    return Err(Error::Config(format!("binned column `{}` has no bins", col.name)))
                }
                (ColumnKind::NumericBinned, Some(_)) => {}
                (_, Some(_)) => {
                    return Err(Error::Config(format!(
                        "column `{}` has bins but is not numeric-binned",
                        col.name
                    )))
                }
                _ => {}
            }
        }
        let targets = self.columns.iter().filter(|c| c.kind == ColumnKind::Target).count();
        if targets != 1 {
            return Err(Error::Config(format!(
                "expected exactly one target column, found {targets}"
            )));
        }
        let ids = self.columns.iter().filter(|c| c.kind == ColumnKind::Id).count();
        if ids > 1 {
            return Err(Error::Config(format!("at most one id column allowed, found {ids}")));
        }
        Ok(())
    }

    pub fn target(&self) -> &ColumnSpec {
        self.columns
            .iter()
            .find(|c| c.kind == ColumnKind::Target)
            .expect("validated config has a target")
    }

    pub fn id(&self) -> Option<&ColumnSpec> {
        self.columns.iter().find(|c| c.kind == ColumnKind::Id)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = r#"
version = 1

[[columns]]
name = "id"
kind = "id"

[[columns]]
name = "revenue"
kind = "numeric-binned"
bins = "equal-width:4"
missing = "fill-mode"

[[columns]]
name = "tenure"
kind = "numeric-binned"
bins = [0.0, 6.0, 12.0]
missing = { fill = 3 }

[[columns]]
name = "churn"
kind = "target"
"#;

    #[test]
    fn parses_sample() {
        let c = DataConfig::from_toml_str(SAMPLE).unwrap();
        assert_eq!(c.columns.len(), 4);
        assert_eq!(c.columns[1].bins, Some(BinSpec::EqualWidth(4)));
        assert_eq!(c.columns[1].missing, Some(MissingPolicy::FillMode));
        assert_eq!(c.columns[2].bins, Some(BinSpec::Edges(vec![0.0, 6.0, 12.0])));
        assert_eq!(c.columns[2].missing, Some(MissingPolicy::FillValue("3".into())));
        assert_eq!(c.target().name, "churn");
        assert_eq!(c.columns[1].processed_name(), "revenue_Bin");
    }

    #[test]
    fn serialization_round_trips() {
        let c = DataConfig::from_toml_str(SAMPLE).unwrap();
        let again = DataConfig::from_toml_str(&c.to_toml_string()).unwrap();
        assert_eq!(c, again);
    }

    #[test]
    fn rejects_bad_configs() {
        let bad = [
            "version = 2\ncolumns = [{ name = \"t\", kind = \"target\" }]",
            "version = 1\ncolumns = [{ name = \"a\", kind = \"numeric-raw\" }]",
            "version = 1\ncolumns = [{ name = \"t\", kind = \"target\" }, { name = \"b\", kind = \"numeric-binned\", bins = [2.0, 1.0] }]",
            "version = 1\ncolumns = [{ name = \"t\", kind = \"target\" }, { name = \"b\", kind = \"numeric-binned\" }]",
            "version = 1\ncolumns = [{ name = \"t\", kind = \"target\" }, { name = \"t\", kind = \"numeric-raw\" }]",
            "version = 1\ncolumns = [{ name = \"t\", kind = \"target\" }, { name = \"b\", kind = \"numeric-binned\", bins = \"equal-width:0\" }]",
            "version = 1\ncolumns = [{ name = \"t\", kind = \"target\", colour = \"red\" }]",
            "version = 1\ncolumns = [{ name = \"t\", kind = \"target\", missing = \"guess\" }]",
        ];
        for text in bad {
            assert!(
                matches!(DataConfig::from_toml_str(text), Err(Error::Config(_))),
                "accepted: {text}"
            );
        }
    }

    #[test]
    fn run_file_sections_are_split_off() {
        let text = format!("{SAMPLE}\n[smote]\nnum_bins = 2\n");
        let (c, extra) = DataConfig::from_run_toml_str(&text, &["smote", "evaluate"]).unwrap();
        assert_eq!(c, DataConfig::from_toml_str(SAMPLE).unwrap());
        assert_eq!(extra["smote"]["num_bins"].as_integer(), Some(2));
        assert!(!extra.contains_key("evaluate"));
        assert!(DataConfig::from_run_toml_str(&text, &[]).is_err());
        assert!(DataConfig::from_run_toml_str(&format!("smote = 3\n{SAMPLE}"), &["smote"]).is_err());
    }
}
