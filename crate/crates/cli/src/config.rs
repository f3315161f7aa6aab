//! Pipeline configuration: one TOML file plus command-line overrides.

use std::path::{Path, PathBuf};

use mmconnect::damm::{DammConfig, ScoreScaling};
use mmconnect::localproj::{Aggregation, LpSpec};
use mmconnect::shocks::BvarConfig;
use mmconnect::tvpvar::TvpVarSpec;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use toml::{Table, Value};

use crate::error::CliError;

/// Moment layers the pipeline knows how to build, in canonical order.
pub const KNOWN_LAYERS: [&str; 4] = ["return", "vol", "skew", "kurt"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PipelineConfig {
    /// Master seed for every stochastic stage.
    pub seed: u64,
    /// Output directory; relative paths resolve against the config file.
    pub out: PathBuf,
    /// Worker threads, 0 for all cores.
    pub threads: usize,
    pub layers: Vec<String>,
    pub inputs: Inputs,
    pub nodes: Nodes,
    pub damm: DammSection,
    pub tvpvar: TvpVarSection,
    pub shocks: ShocksSection,
    pub lp: LpSection,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            seed: 20240101,
            out: PathBuf::from("out"),
            threads: 0,
            layers: KNOWN_LAYERS.iter().map(|s| s.to_string()).collect(),
            inputs: Inputs::default(),
            nodes: Nodes::default(),
            damm: DammSection::default(),
            tvpvar: TvpVarSection::default(),
            shocks: ShocksSection::default(),
            lp: LpSection::default(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Inputs {
    pub prices: Option<PathBuf>,
    /// Policy calendar, `date,decision`.
    pub events: Option<PathBuf>,
    pub surprises: Option<PathBuf>,
    #[serde(rename = "macro")]
    pub macro_data: Option<PathBuf>,
}

/// Node categories; nodes not listed as bonds are equities.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Nodes {
    pub bonds: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DammSection {
    pub components: usize,
    pub scaling: ScoreScaling,
    pub starts: usize,
    pub max_iterations: usize,
    pub rel_tolerance: f64,
    pub printed_moments: bool,
    /// Store `ln(Vol^{1/2})` in the vol column instead of the variance.
    pub log_vol: bool,
}

impl Default for DammSection {
    fn default() -> Self {
        let d = DammConfig::default();
        Self {
            components: d.components,
            scaling: d.scaling,
            starts: d.starts,
            max_iterations: d.max_iterations,
            rel_tolerance: d.rel_tolerance,
            printed_moments: d.printed_moments,
            log_vol: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TvpVarSection {
    pub lambda: f64,
    pub kappa: f64,
    pub gamma: f64,
    pub horizon: usize,
    /// Upper bound for BIC lag selection.
    pub p_max: usize,
    /// Fixed lag order; skips BIC selection when set.
    pub lags: Option<usize>,
}

impl Default for TvpVarSection {
    fn default() -> Self {
        let s = TvpVarSpec::new(1);
        Self {
            lambda: s.lambda,
            kappa: s.kappa,
            gamma: s.gamma,
            horizon: s.horizon,
            p_max: 5,
            lags: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ShocksSection {
    pub lags: usize,
    pub draws: usize,
    pub angles: usize,
    pub coefficient_precision: f64,
    pub scale_factor: f64,
}

impl Default for ShocksSection {
    fn default() -> Self {
        let b = BvarConfig::default();
        Self {
            lags: b.lags,
            draws: b.draws,
            angles: b.angles,
            coefficient_precision: b.coefficient_precision,
            scale_factor: b.scale_factor,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LpSection {
    pub h_max: usize,
    pub bands: Vec<f64>,
    pub aggregation: Aggregation,
    pub lagged_dependent: bool,
    pub controls: bool,
    /// Dependent indices: `projection`, a layer name, or `<layer>:<node>`
    /// for a node's net index.
    pub indices: Vec<String>,
}

impl Default for LpSection {
    fn default() -> Self {
        let s = LpSpec::default();
        let mut indices = vec!["projection".to_string()];
        indices.extend(KNOWN_LAYERS.iter().map(|s| s.to_string()));
        Self {
            h_max: s.h_max,
            bands: s.bands,
            aggregation: s.aggregation,
            lagged_dependent: s.lagged_dependent,
            controls: s.controls,
            indices,
        }
    }
}

/// Command-line adjustments applied on top of the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub threads: Option<usize>,
    pub layers: Vec<String>,
    /// `dotted.key=value` pairs; values parse as TOML, falling back to strings.
    pub set: Vec<String>,
}

fn parse_value(raw: &str) -> Value {
    format!("v = {raw}")
        .parse::<Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| Value::String(raw.to_string()))
}

fn set_dotted(table: &mut Table, key: &str, value: Value) -> Result<(), CliError> {
    let parts: Vec<&str> = key.split('.').collect();
    if parts.iter().any(|p| p.is_empty()) {
        return Err(CliError::config(format!("bad override key {key:?}")));
    }
    let mut cur = table;
    for p in &parts[..parts.len() - 1] {
        let entry = cur
            .entry(p.to_string())
            .or_insert_with(|| Value::Table(Table::new()));
        cur = entry
            .as_table_mut()
            .ok_or_else(|| CliError::config(format!("override {key}: {p} is not a table")))?;
    }
    cur.insert(parts[parts.len() - 1].to_string(), value);
    Ok(())
}

impl PipelineConfig {
    /// Reads `path`, applies `overrides` and validates the result. Relative
    /// input paths resolve against the directory holding the file.
    pub fn load(path: &Path, overrides: &Overrides) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::config(format!("cannot read config {}: {e}", path.display())))?;
        let mut table: Table = text
            .parse()
            .map_err(|e| CliError::config(format!("config {}: {e}", path.display())))?;
        for kv in &overrides.set {
            let (k, v) = kv
                .split_once('=')
                .ok_or_else(|| CliError::config(format!("override {kv:?} must be key=value")))?;
            set_dotted(&mut table, k.trim(), parse_value(v.trim()))?;
        }
        let mut cfg: PipelineConfig = serde_path_to_error::deserialize(Value::Table(table))
            .map_err(|e| {
                CliError::config(format!(
                    "config {}: field `{}`: {}",
                    path.display(),
                    e.path(),
                    e.inner()
                ))
            })?;
        let base = path.parent().unwrap_or(Path::new("."));
        let resolve = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        for p in [
            &mut cfg.inputs.prices,
            &mut cfg.inputs.events,
            &mut cfg.inputs.surprises,
            &mut cfg.inputs.macro_data,
        ]
        .into_iter()
        .flatten()
        {
            resolve(p);
        }
        resolve(&mut cfg.out);
        if let Some(seed) = overrides.seed {
            cfg.seed = seed;
        }
        if let Some(out) = &overrides.out {
            cfg.out = out.clone();
        }
        if let Some(threads) = overrides.threads {
            cfg.threads = threads;
        }
        if !overrides.layers.is_empty() {
            cfg.layers = overrides.layers.clone();
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.layers.is_empty() {
            return Err(CliError::config("at least one layer is required"));
        }
        for (i, l) in self.layers.iter().enumerate() {
            if !KNOWN_LAYERS.contains(&l.as_str()) {
                return Err(CliError::config(format!(
                    "unknown layer {l:?}; expected one of {KNOWN_LAYERS:?}"
                )));
            }
            if self.layers[..i].contains(l) {
                return Err(CliError::config(format!("layer {l:?} listed twice")));
            }
        }
        for (field, p) in [
            ("inputs.prices", &self.inputs.prices),
            ("inputs.events", &self.inputs.events),
            ("inputs.surprises", &self.inputs.surprises),
            ("inputs.macro", &self.inputs.macro_data),
        ] {
            if let Some(p) = p {
                if !p.is_file() {
                    return Err(CliError::config(format!(
                        "{field}: file {} does not exist",
                        p.display()
                    )));
                }
            }
        }
        self.damm_config()
            .validate()
            .map_err(|e| CliError::config(format!("damm: {e}")))?;
        self.tvpvar_spec(1, self.tvpvar.lags.unwrap_or(1))
            .validate()
            .map_err(|e| CliError::config(format!("tvpvar: {e}")))?;
        if self.tvpvar.p_max == 0 {
            return Err(CliError::config("tvpvar: p_max must be at least 1"));
        }
        self.bvar_config()
            .validate()
            .map_err(|e| CliError::config(format!("shocks: {e}")))?;
        self.lp_spec()
            .validate()
            .map_err(|e| CliError::config(format!("lp: {e}")))?;
        if self.lp.indices.is_empty() {
            return Err(CliError::config("lp: at least one index is required"));
        }
        Ok(())
    }

    pub fn damm_config(&self) -> DammConfig {
        let d = &self.damm;
        DammConfig {
            components: d.components,
            scaling: d.scaling,
            starts: d.starts,
            seed: self.seed,
            max_iterations: d.max_iterations,
            rel_tolerance: d.rel_tolerance,
            printed_moments: d.printed_moments,
        }
    }

    pub fn tvpvar_spec(&self, n: usize, lags: usize) -> TvpVarSpec {
        TvpVarSpec {
            n,
            lags,
            lambda: self.tvpvar.lambda,
            kappa: self.tvpvar.kappa,
            gamma: self.tvpvar.gamma,
            horizon: self.tvpvar.horizon,
        }
    }

    pub fn bvar_config(&self) -> BvarConfig {
        let s = &self.shocks;
        BvarConfig {
            lags: s.lags,
            draws: s.draws,
            angles: s.angles,
            seed: self.seed,
            coefficient_precision: s.coefficient_precision,
            scale_factor: s.scale_factor,
        }
    }

    pub fn lp_spec(&self) -> LpSpec {
        LpSpec {
            h_max: self.lp.h_max,
            bands: self.lp.bands.clone(),
            aggregation: self.lp.aggregation,
            lagged_dependent: self.lp.lagged_dependent,
            controls: self.lp.controls,
        }
    }

    /// SHA-256 of the resolved configuration, excluding the output directory
    /// and thread count so that relocated runs hash alike.
    pub fn hash(&self) -> String {
        let mut c = self.clone();
        c.out = PathBuf::new();
        c.threads = 0;
        let json = serde_json::to_vec(&c).expect("config serializes");
        Sha256::digest(&json)
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write(text: &str) -> (tempfile::TempDir, PathBuf) {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("run.toml");
        std::fs::write(&p, text).unwrap();
        (dir, p)
    }

    #[test]
    fn defaults_and_overrides() {
        let (_d, p) = write("seed = 5\n[tvpvar]\nhorizon = 10\n");
        let o = Overrides {
            set: vec![
                "tvpvar.lambda=0.98".into(),
                "lp.aggregation=\"mean\"".into(),
            ],
            seed: Some(9),
            ..Overrides::default()
        };
        let c = PipelineConfig::load(&p, &o).unwrap();
        assert_eq!(c.seed, 9);
        assert_eq!(c.tvpvar.horizon, 10);
        assert_eq!(c.tvpvar.lambda, 0.98);
        assert_eq!(c.lp.aggregation, Aggregation::Mean);
        assert_eq!(c.damm_config().seed, 9);
        assert_eq!(c.bvar_config().seed, 9);
    }

    #[test]
    fn unknown_field_names_path() {
        let (_d, p) = write("[tvpvar]\nlamda = 0.9\n");
        let e = PipelineConfig::load(&p, &Overrides::default()).unwrap_err();
        assert_eq!(e.exit_code(), 2);
        assert!(e.message.contains("tvpvar"), "{}", e.message);
        assert!(e.message.contains("lamda"), "{}", e.message);
    }

    #[test]
    fn out_of_range_rejected() {
        let (_d, p) = write("[tvpvar]\nkappa = 1.5\n");
        assert_eq!(
            PipelineConfig::load(&p, &Overrides::default())
                .unwrap_err()
                .exit_code(),
            2
        );
        let (_d, p) = write("layers = [\"return\", \"mean\"]\n");
        assert_eq!(
            PipelineConfig::load(&p, &Overrides::default())
                .unwrap_err()
                .exit_code(),
            2
        );
    }

    #[test]
    fn missing_referenced_file() {
        let (_d, p) = write("[inputs]\nprices = \"nope.csv\"\n");
        let e = PipelineConfig::load(&p, &Overrides::default()).unwrap_err();
        assert!(e.message.contains("nope.csv"));
    }

    #[test]
    fn hash_ignores_out() {
        let (_d, p) = write("seed = 1\n");
        let a = PipelineConfig::load(&p, &Overrides::default()).unwrap();
        let b = PipelineConfig::load(
            &p,
            &Overrides {
                out: Some("/tmp/elsewhere".into()),
                ..Overrides::default()
            },
        )
        .unwrap();
        assert_eq!(a.hash(), b.hash());
        let c = PipelineConfig::load(
            &p,
            &Overrides {
                seed: Some(2),
                ..Overrides::default()
            },
        )
        .unwrap();
        assert_ne!(a.hash(), c.hash());
    }
}
