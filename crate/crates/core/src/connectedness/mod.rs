//! Pairwise, directional, net and total connectedness built from
//! row-normalized variance decompositions.
//!
//! Tables follow the published layout: rows are receivers, columns are
//! senders, entries are percent, and the directional margins are plain sums.
//! The `1/N`-scaled index form is available through [`ConnectednessTable::index_form`].

mod io;
mod table;

pub use io::{
    read_gfevd_long, read_net_index, read_total_index, write_gfevd_long, write_net_index,
    write_table, write_total_index,
};
pub use table::{
    average_table, directional_indices, local_table, pairwise_indices, total_index,
    ConnectednessSeries, ConnectednessTable, Directional,
};

#[derive(Debug, thiserror::Error)]
pub enum ConnectednessError {
    #[error("unknown node {0:?}")]
    UnknownNode(String),
    #[error("empty input: {0}")]
    Empty(String),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
