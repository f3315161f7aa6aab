//! One function per subcommand. Each reads its inputs from the configured
//! files or from earlier artifacts in the output directory.

use std::collections::{BTreeMap, BTreeSet};
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use log::{info, warn};
use mmconnect::connectedness::{
    average_table, directional_indices, read_gfevd_long, read_net_index, read_total_index,
    write_gfevd_long, write_net_index, write_table, write_total_index, ConnectednessSeries,
    ConnectednessTable,
};
use mmconnect::damm::{extract_moment_panel, read_moments, write_moments};
use mmconnect::localproj::{
    align_inputs, build_dummies, lp_run, monthly_aggregate, write_heat, write_lp,
};
use mmconnect::network::{
    export_network, layer_weights, node_metrics, project_matrices, Category, MomentLayer,
    MultiLayerNetwork,
};
use mmconnect::shocks::{
    aggregate_surprises, decompose_shocks, fit_restricted_bvar, identify_signs, read_macro,
    read_shocks, read_surprises, write_shocks, MacroPanel,
};
use mmconnect::timeseries::{
    log_returns, read_events, read_prices, summary_stats, write_prices, write_summary,
};
use mmconnect::tvpvar::{fit_tvpvar, select_lag};
use nalgebra::DMatrix;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::PipelineConfig;
use crate::error::CliError;

/// Output directory bookkeeping for one invocation.
pub struct Run {
    pub cfg: PipelineConfig,
    pub command: &'static str,
    written: BTreeSet<String>,
}

#[derive(Serialize)]
struct Manifest<'a> {
    toolkit: &'static str,
    version: &'static str,
    command: &'a str,
    seed: u64,
    config_hash: String,
    layers: &'a [String],
    outputs: BTreeMap<&'a str, String>,
}

fn sha256_file(path: &Path) -> Result<String, CliError> {
    let bytes = std::fs::read(path)?;
    Ok(Sha256::digest(&bytes)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect())
}

fn open(path: &Path) -> Result<BufReader<File>, CliError> {
    if !path.is_file() {
        return Err(CliError::missing_input(path));
    }
    Ok(BufReader::new(File::open(path)?))
}

impl Run {
    pub fn new(cfg: PipelineConfig, command: &'static str) -> Result<Self, CliError> {
        std::fs::create_dir_all(&cfg.out)
            .map_err(|e| CliError::data(format!("cannot create {}: {e}", cfg.out.display())))?;
        Ok(Self {
            cfg,
            command,
            written: BTreeSet::new(),
        })
    }

    fn path(&self, name: &str) -> PathBuf {
        self.cfg.out.join(name)
    }

    fn create(&mut self, name: &str) -> Result<BufWriter<File>, CliError> {
        self.written.insert(name.to_string());
        Ok(BufWriter::new(File::create(self.path(name))?))
    }

    fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<(), CliError> {
        let mut w = self.create(name)?;
        serde_json::to_writer_pretty(&mut w, value)?;
        w.write_all(b"\n")?;
        w.flush()?;
        Ok(())
    }

    /// An artifact an earlier stage should have produced.
    fn artifact(&self, name: &str) -> Result<BufReader<File>, CliError> {
        open(&self.path(name))
    }

    fn required<'a>(&self, field: &str, path: &'a Option<PathBuf>) -> Result<&'a Path, CliError> {
        path.as_deref()
            .ok_or_else(|| CliError::config(format!("{field} is not set in the configuration")))
    }

    /// Writes `run_manifest.json` listing the SHA-256 of every output.
    pub fn finish(mut self) -> Result<(), CliError> {
        let mut outputs = BTreeMap::new();
        for name in &self.written {
            outputs.insert(name.as_str(), sha256_file(&self.path(name))?);
        }
        let manifest = Manifest {
            toolkit: "mmconnect",
            version: env!("CARGO_PKG_VERSION"),
            command: self.command,
            seed: self.cfg.seed,
            config_hash: self.cfg.hash(),
            layers: &self.cfg.layers,
            outputs,
        };
        let json = serde_json::to_string_pretty(&manifest)? + "\n";
        std::fs::write(self.path("run_manifest.json"), json)?;
        self.written.clear();
        Ok(())
    }
}

fn stage<T>(name: &'static str, f: impl FnOnce() -> Result<T, CliError>) -> Result<T, CliError> {
    info!("stage {name}: start");
    let out = f().map_err(|e| e.in_stage(name))?;
    info!("stage {name}: done");
    Ok(out)
}

/// Prices to returns, summary statistics and mixture moments.
pub fn cmd_moments(run: &mut Run) -> Result<(), CliError> {
    stage("moments", || {
        let prices_path = run
            .required("inputs.prices", &run.cfg.inputs.prices)?
            .to_path_buf();
        let prices = read_prices(open(&prices_path)?)?;
        let returns = log_returns(&prices)?;
        info!("{} series, {} returns", returns.n_series(), returns.len());
        let stats = summary_stats(&returns, None)?;
        write_summary(run.create("summary.csv")?, &stats)?;
        let as_panel = mmconnect::timeseries::PricePanel::new(
            returns.dates.clone(),
            returns.names.clone(),
            returns.values.clone(),
        )?;
        write_prices(run.create("returns.csv")?, &as_panel)?;
        let moments = extract_moment_panel::<f64>(&returns, &run.cfg.damm_config())?;
        for d in &moments.diagnostics {
            if !d.converged {
                warn!("mixture fit for {} stopped before convergence", d.series);
            }
        }
        write_moments(run.create("moments.csv")?, &moments, run.cfg.damm.log_vol)?;
        run.write_json("damm_fits.json", &moments.diagnostics)
    })
}

struct LayerData {
    dates: Vec<NaiveDate>,
    names: Vec<String>,
    values: DMatrix<f64>,
}

/// Per-layer TVP-VAR, GFEVD path and connectedness tables.
pub fn cmd_connect(run: &mut Run) -> Result<(), CliError> {
    stage("connect", || {
        let layers = run.cfg.layers.clone();
        let mut moments = None;
        for layer in &layers {
            let data = if layer == "return" {
                let p = read_prices(run.artifact("returns.csv")?)?;
                LayerData {
                    dates: p.dates,
                    names: p.names,
                    values: p.values,
                }
            } else {
                if moments.is_none() {
                    moments = Some(read_moments(run.artifact("moments.csv")?)?);
                }
                let m = moments.as_ref().expect("loaded above");
                let values = match layer.as_str() {
                    "vol" => m.vol.clone(),
                    "skew" => m.skew.clone(),
                    _ => m.kurt.clone(),
                };
                LayerData {
                    dates: m.dates.clone(),
                    names: m.names.clone(),
                    values,
                }
            };
            connect_layer(run, layer, &data)?;
        }
        Ok(())
    })
}

fn connect_layer(run: &mut Run, layer: &str, data: &LayerData) -> Result<(), CliError> {
    let n = data.names.len();
    let lags = match run.cfg.tvpvar.lags {
        Some(p) => p,
        None => select_lag(&data.values, run.cfg.tvpvar.p_max)?,
    };
    info!(
        "layer {layer}: TVP-VAR({lags}) on {} x {n}",
        data.values.nrows()
    );
    let fit = fit_tvpvar(&data.values, &run.cfg.tvpvar_spec(n, lags))
        .map_err(|e| CliError::from(e).prefixed(&format!("layer {layer}")))?;
    for w in &fit.diagnostics.warnings {
        warn!("layer {layer}: {w}");
    }
    let ds: Vec<DMatrix<f64>> = fit.gfevd_path()?.into_iter().map(|g| g.d).collect();
    let dates: Vec<NaiveDate> = fit.snapshots.iter().map(|s| data.dates[s.row]).collect();
    let series = ConnectednessSeries::from_shares(data.names.clone(), &ds)?;
    write_gfevd_long(
        run.create(&format!("gfevd_{layer}.csv"))?,
        &dates,
        &data.names,
        &ds,
    )?;
    write_total_index(
        run.create(&format!("total_index_{layer}.csv"))?,
        &dates,
        &series,
    )?;
    write_net_index(
        run.create(&format!("net_index_{layer}.csv"))?,
        &dates,
        &series,
    )?;
    write_table(
        run.create(&format!("table_{layer}.csv"))?,
        &average_table(data.names.clone(), &ds)?,
    )?;
    run.write_json(&format!("tvpvar_{layer}.json"), &fit.diagnostics)
}

fn mean_matrix(ds: &[&DMatrix<f64>]) -> DMatrix<f64> {
    let mut sum = DMatrix::zeros(ds[0].nrows(), ds[0].ncols());
    for d in ds {
        sum += *d;
    }
    sum / ds.len() as f64
}

#[derive(Serialize)]
struct WeightRow<'a> {
    date: String,
    layer: &'a str,
    density: f64,
    weight: f64,
}

/// Multi-layer network: static export and the per-date projection layer.
pub fn cmd_network(run: &mut Run) -> Result<(), CliError> {
    stage("network", || {
        let layers = run.cfg.layers.clone();
        let mut loaded = Vec::new();
        for layer in &layers {
            let (dates, names, ds) = read_gfevd_long(run.artifact(&format!("gfevd_{layer}.csv"))?)?;
            loaded.push((dates, names, ds));
        }
        let names = loaded[0].1.clone();
        if let Some(i) = loaded.iter().position(|l| l.1 != names) {
            return Err(CliError::data(format!(
                "layer {} lists different nodes from layer {}",
                layers[i], layers[0]
            )));
        }
        let mut common: BTreeSet<NaiveDate> = loaded[0].0.iter().copied().collect();
        for l in &loaded[1..] {
            let these: BTreeSet<NaiveDate> = l.0.iter().copied().collect();
            common = common.intersection(&these).copied().collect();
        }
        if common.is_empty() {
            return Err(CliError::data("layers share no dates"));
        }
        let dates: Vec<NaiveDate> = common.into_iter().collect();
        // Per layer, the share matrices on the common dates.
        let aligned: Vec<Vec<&DMatrix<f64>>> = loaded
            .iter()
            .map(|(ds_dates, _, ds)| {
                let pos: BTreeMap<NaiveDate, usize> =
                    ds_dates.iter().enumerate().map(|(i, d)| (*d, i)).collect();
                dates.iter().map(|d| &ds[pos[d]]).collect()
            })
            .collect();
        let bonds = &run.cfg.nodes.bonds;
        for b in bonds {
            if !names.contains(b) {
                warn!("configured bond node {b} is not in the data");
            }
        }
        let categories: Vec<Category> = names
            .iter()
            .map(|n| {
                if bonds.contains(n) {
                    Category::Bond
                } else {
                    Category::Equity
                }
            })
            .collect();

        // Static network from sample-average layers.
        let averages: Vec<DMatrix<f64>> = aligned.iter().map(|v| mean_matrix(v)).collect();
        let moment_layers = layers
            .iter()
            .zip(&averages)
            .map(|(l, d)| MomentLayer::from_shares(l.clone(), names.clone(), categories.clone(), d))
            .collect::<Result<Vec<_>, _>>()?;
        let net = MultiLayerNetwork::new(moment_layers)?;
        let avg_refs: Vec<&DMatrix<f64>> = averages.iter().collect();
        let projection_shares = project_matrices(&avg_refs, &net.weights)?;
        let mut metrics = BTreeMap::new();
        for (layer, d) in net.layers.iter().zip(&averages) {
            metrics.insert(
                layer.name.clone(),
                node_metrics(layer, &directional_indices(d), &names)?,
            );
        }
        metrics.insert(
            "projection".to_string(),
            node_metrics(
                &net.projection,
                &directional_indices(&projection_shares),
                &names,
            )?,
        );
        let doc = export_network(&net, &metrics);
        let mut w = run.create("network.json")?;
        doc.write(&mut w)?;
        w.write_all(b"\n")?;
        w.flush()?;
        write_table(
            run.create("table_projection.csv")?,
            &ConnectednessTable::from_shares(names.clone(), &projection_shares)?,
        )?;

        // Time-varying projection with per-date weights.
        let mut projected = Vec::with_capacity(dates.len());
        let mut weight_rows = Vec::with_capacity(dates.len() * layers.len());
        for (t, date) in dates.iter().enumerate() {
            let mats: Vec<&DMatrix<f64>> = aligned.iter().map(|v| v[t]).collect();
            let per_date = layers
                .iter()
                .zip(&mats)
                .map(|(l, d)| {
                    MomentLayer::from_shares(l.clone(), names.clone(), categories.clone(), d)
                })
                .collect::<Result<Vec<_>, _>>()?;
            let (dens, weights) = layer_weights(&per_date)?;
            for ((l, &d), &w) in layers.iter().zip(&dens).zip(&weights) {
                weight_rows.push(WeightRow {
                    date: date.to_string(),
                    layer: l,
                    density: d,
                    weight: w,
                });
            }
            projected.push(project_matrices(&mats, &weights)?);
        }
        let series = ConnectednessSeries::from_shares(names.clone(), &projected)?;
        write_total_index(run.create("total_index_projection.csv")?, &dates, &series)?;
        write_net_index(run.create("net_index_projection.csv")?, &dates, &series)?;
        let mut w = csv::Writer::from_writer(run.create("layer_weights.csv")?);
        for row in &weight_rows {
            w.serialize(row)
                .map_err(|e| CliError::data(e.to_string()))?;
        }
        w.flush()?;
        Ok(())
    })
}

#[derive(Serialize)]
struct ShockDiagnostics {
    draws: usize,
    angles: usize,
    tried: usize,
    accepted: usize,
    acceptance_rate: f64,
    posterior_dof: f64,
    flagged_months: Vec<String>,
}

/// Restricted BVAR, sign identification and the MP / information split.
pub fn cmd_shocks(run: &mut Run) -> Result<(), CliError> {
    stage("shocks", || {
        let sp = run
            .required("inputs.surprises", &run.cfg.inputs.surprises)?
            .to_path_buf();
        let mp = run
            .required("inputs.macro", &run.cfg.inputs.macro_data)?
            .to_path_buf();
        let events = read_surprises(open(&sp)?)?;
        let macro_panel = read_macro(open(&mp)?)?;
        let panel = aggregate_surprises(&events, &macro_panel.months)?;
        let bvar = run.cfg.bvar_config();
        let posterior = fit_restricted_bvar(&panel, &macro_panel, &bvar)?;
        let ident = identify_signs(&posterior, bvar.angles, bvar.seed)?;
        info!(
            "accepted {} of {} rotations ({:.1}%)",
            ident.accepted.len(),
            ident.tried,
            100.0 * ident.acceptance_rate()
        );
        let shocks = decompose_shocks(&ident, &panel)?;
        write_shocks(run.create("shocks.csv")?, &shocks)?;
        let diag = ShockDiagnostics {
            draws: bvar.draws,
            angles: bvar.angles,
            tried: ident.tried,
            accepted: ident.accepted.len(),
            acceptance_rate: ident.acceptance_rate(),
            posterior_dof: posterior.dof,
            flagged_months: shocks
                .months
                .iter()
                .zip(&shocks.flagged)
                .filter(|(_, &f)| f)
                .map(|(m, _)| m.to_string())
                .collect(),
        };
        run.write_json("shocks_diagnostics.json", &diag)
    })
}

fn index_series(run: &Run, selector: &str) -> Result<(Vec<NaiveDate>, Vec<f64>), CliError> {
    match selector.split_once(':') {
        Some((layer, node)) => Ok(read_net_index(
            run.artifact(&format!("net_index_{layer}.csv"))?,
            node,
        )?),
        None => Ok(read_total_index(
            run.artifact(&format!("total_index_{selector}.csv"))?,
        )?),
    }
}

/// Local projections of each configured index and the heat table.
pub fn cmd_lp(run: &mut Run) -> Result<(), CliError> {
    stage("lp", || {
        let shocks = read_shocks(run.artifact("shocks.csv")?)?;
        let ev = run
            .required("inputs.events", &run.cfg.inputs.events)?
            .to_path_buf();
        let calendar = read_events(open(&ev)?)?;
        let dummies = build_dummies(&calendar, &shocks)?;
        let spec = run.cfg.lp_spec();
        let macro_panel: Option<MacroPanel> = if spec.controls {
            let mp = run.required("inputs.macro", &run.cfg.inputs.macro_data)?;
            Some(read_macro(open(mp)?)?)
        } else {
            None
        };
        let mut results = Vec::new();
        for selector in run.cfg.lp.indices.clone() {
            let (dates, values) = index_series(run, &selector)?;
            let (months, monthly) = monthly_aggregate(&dates, &values, spec.aggregation)?;
            let input = align_inputs(&months, &monthly, &shocks, &dummies, macro_panel.as_ref())?;
            info!("index {selector}: {} aligned months", input.months.len());
            let res = lp_run(&selector, &input, &spec)?;
            if res.horizons.iter().any(|h| h.hac_fallback) {
                warn!("index {selector}: HAC fallback used at some horizons");
            }
            let file = format!("lp_{}.csv", selector.replace([':', '/'], "_"));
            write_lp(run.create(&file)?, &res)?;
            results.push(res);
        }
        write_heat(run.create("heat.csv")?, &results)?;
        Ok(())
    })
}

/// All stages in order; shock stages run only when their inputs are set.
pub fn cmd_pipeline(run: &mut Run) -> Result<(), CliError> {
    cmd_moments(run)?;
    cmd_connect(run)?;
    cmd_network(run)?;
    let inputs = &run.cfg.inputs;
    if inputs.surprises.is_none() || inputs.macro_data.is_none() {
        info!("no surprise or macro input configured; skipping shocks and lp");
        return Ok(());
    }
    cmd_shocks(run)?;
    if run.cfg.inputs.events.is_none() {
        info!("no policy calendar configured; skipping lp");
        return Ok(());
    }
    cmd_lp(run)
}
