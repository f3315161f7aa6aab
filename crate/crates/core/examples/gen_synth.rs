//! Regenerates the bundled synthetic datasets:
//! `cargo run -p mmconnect --example gen_synth -- data/synth`

use std::path::PathBuf;

use mmconnect::synth::{
    gen_price_panel, gen_shock_dataset, write_price_dataset, write_shock_dataset, PriceSynthConfig,
    ShockSynthConfig,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let root = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| "data/synth".into());
    let prices = gen_price_panel(&PriceSynthConfig::default())?;
    write_price_dataset(&root.join("prices"), &prices)?;
    let shocks = gen_shock_dataset(&ShockSynthConfig::default())?;
    write_shock_dataset(&root.join("shocks"), &shocks)?;
    println!("wrote {}", root.display());
    Ok(())
}
