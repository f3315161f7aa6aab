//! Monetary-policy and information shocks from FOMC surprises via a
//! block-restricted Bayesian VAR and sign restrictions on the surprise block.

mod bvar;
mod decompose;
mod identify;
mod io;
mod panel;

pub use bvar::{
    fit_restricted_bvar, BvarConfig, BvarPosterior, ReducedFormDraw, N_MACRO, N_SURPRISE,
};
pub use decompose::{decompose_shocks, rescale_pair, ShockSeries, RECOMMENDED_ACCEPTED};
pub use identify::{
    cholesky2, identify_signs, rotate, satisfies_signs, Identification, StructuralDraw,
};
pub use io::{read_macro, read_shocks, read_surprises, write_macro, write_shocks, write_surprises};
pub use panel::{aggregate_surprises, MacroPanel, SurpriseEvent, SurprisePanel, MACRO_COLUMNS};

#[derive(Debug, thiserror::Error)]
pub enum ShocksError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("data error: {0}")]
    Data(String),
    #[error("need at least {needed} months, got {got}")]
    InsufficientData { needed: usize, got: usize },
    #[error("estimation failed: {0}")]
    Estimation(String),
    #[error("numerical error: {0}")]
    Numerical(String),
    #[error("identification failed: {0}")]
    Identification(String),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
