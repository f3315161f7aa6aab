//! Seeded synthetic datasets with known ground truth.

mod prices;
mod shocks;

use std::fs::File;
use std::io::BufWriter;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub use prices::{gen_price_panel, PriceSynthConfig, PriceTruth, SyntheticPrices};
pub use shocks::{gen_shock_dataset, ShockSynthConfig, ShockTruth, SyntheticShocks};

#[derive(Debug, thiserror::Error)]
pub enum SynthError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("unstable VAR: companion spectral radius {radius:.4} >= 1")]
    Unstable { radius: f64 },
    #[error(transparent)]
    Timeseries(#[from] crate::timeseries::TimeseriesError),
    #[error(transparent)]
    Shocks(#[from] crate::shocks::ShocksError),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub(crate) fn rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}

/// Writes `prices.csv`, `fomc_events.csv` and `truth.json` into `dir`.
pub fn write_price_dataset(dir: &Path, data: &SyntheticPrices) -> Result<(), SynthError> {
    std::fs::create_dir_all(dir)?;
    crate::timeseries::write_prices(
        BufWriter::new(File::create(dir.join("prices.csv"))?),
        &data.panel,
    )?;
    crate::timeseries::write_events(
        BufWriter::new(File::create(dir.join("fomc_events.csv"))?),
        &data.events,
    )?;
    serde_json::to_writer_pretty(
        BufWriter::new(File::create(dir.join("truth.json"))?),
        &data.truth,
    )?;
    Ok(())
}

/// Writes `surprises.csv`, `macro.csv`, `fomc_events.csv` and `truth.json` into `dir`.
pub fn write_shock_dataset(dir: &Path, data: &SyntheticShocks) -> Result<(), SynthError> {
    std::fs::create_dir_all(dir)?;
    crate::shocks::write_surprises(
        BufWriter::new(File::create(dir.join("surprises.csv"))?),
        &data.surprises,
    )?;
    crate::shocks::write_macro(
        BufWriter::new(File::create(dir.join("macro.csv"))?),
        &data.macro_panel,
    )?;
    crate::timeseries::write_events(
        BufWriter::new(File::create(dir.join("fomc_events.csv"))?),
        &data.events,
    )?;
    serde_json::to_writer_pretty(
        BufWriter::new(File::create(dir.join("truth.json"))?),
        &data.truth,
    )?;
    Ok(())
}
