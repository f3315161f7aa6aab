use nalgebra::{DMatrix, DVector};

use super::ConnectednessError;
use crate::Real;

/// `(d_ij − d_ji, d_ij + d_ji)`.
pub fn pairwise_indices<T: Real>(d: &DMatrix<T>) -> (DMatrix<T>, DMatrix<T>) {
    let n = d.nrows();
    let net = DMatrix::from_fn(n, n, |i, j| d[(i, j)] - d[(j, i)]);
    let total = DMatrix::from_fn(n, n, |i, j| d[(i, j)] + d[(j, i)]);
    (net, total)
}

/// Per-node directional connectedness in percent (table convention).
#[derive(Debug, Clone, PartialEq)]
pub struct Directional<T: Real> {
    pub to: DVector<T>,
    pub from: DVector<T>,
    pub net: DVector<T>,
    pub total: DVector<T>,
}

/// A (possibly rectangular) block of a connectedness table in percent.
///
/// `from[i]` sums row `i` and `to[j]` sums column `j`, skipping the entry
/// where receiver and sender are the same node. Net values and the total
/// index only exist when rows and columns list the same nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct ConnectednessTable<T: Real> {
    pub receivers: Vec<String>,
    pub senders: Vec<String>,
    pub matrix: DMatrix<T>,
    pub from: DVector<T>,
    pub to: DVector<T>,
    pub net: Option<DVector<T>>,
    /// Mean of `from`; equals the total connectedness index for a full table.
    pub total: Option<T>,
}

impl<T: Real> ConnectednessTable<T> {
    /// Builds a table from a percent matrix with rows `receivers` and columns `senders`.
    pub fn from_percent(
        receivers: Vec<String>,
        senders: Vec<String>,
        matrix: DMatrix<T>,
    ) -> Result<Self, ConnectednessError> {
        if matrix.shape() != (receivers.len(), senders.len()) {
            return Err(ConnectednessError::Dimension(format!(
                "{}x{} matrix for {} receivers and {} senders",
                matrix.nrows(),
                matrix.ncols(),
                receivers.len(),
                senders.len()
            )));
        }
        if receivers.is_empty() || senders.is_empty() {
            return Err(ConnectednessError::Empty(
                "table needs at least one node".into(),
            ));
        }
        let from = DVector::from_fn(receivers.len(), |i, _| {
            (0..senders.len())
                .filter(|&j| senders[j] != receivers[i])
                .fold(T::zero(), |acc, j| acc + matrix[(i, j)])
        });
        let to = DVector::from_fn(senders.len(), |j, _| {
            (0..receivers.len())
                .filter(|&i| senders[j] != receivers[i])
                .fold(T::zero(), |acc, i| acc + matrix[(i, j)])
        });
        let square = receivers == senders;
        let net = square.then(|| &to - &from);
        let total = square.then(|| from.sum() / T::from_count(from.len()));
        Ok(Self {
            receivers,
            senders,
            matrix,
            from,
            to,
            net,
            total,
        })
    }

    /// Full table from row-normalized shares `d` (fractions).
    pub fn from_shares(names: Vec<String>, d: &DMatrix<T>) -> Result<Self, ConnectednessError> {
        let pct = d * T::c(100.0);
        Self::from_percent(names.clone(), names, pct)
    }

    /// `(To, From, Net)` divided by the number of nodes.
    pub fn index_form(&self) -> (DVector<T>, DVector<T>, Option<DVector<T>>) {
        let n = T::from_count(self.receivers.len().max(self.senders.len()));
        (
            &self.to / n,
            &self.from / n,
            self.net.as_ref().map(|v| v / n),
        )
    }

    pub fn directional(&self) -> Option<Directional<T>> {
        let net = self.net.clone()?;
        Some(Directional {
            total: &self.to + &self.from,
            to: self.to.clone(),
            from: self.from.clone(),
            net,
        })
    }
}

fn default_names(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("v{i}")).collect()
}

/// Total connectedness index in percent: the mean of the From column.
pub fn total_index<T: Real>(d: &DMatrix<T>) -> T {
    ConnectednessTable::from_shares(default_names(d.nrows()), d)
        .ok()
        .and_then(|t| t.total)
        .unwrap_or_else(T::zero)
}

pub fn directional_indices<T: Real>(d: &DMatrix<T>) -> Directional<T> {
    let n = d.nrows();
    match ConnectednessTable::from_shares(default_names(n), d)
        .ok()
        .and_then(|t| t.directional())
    {
        Some(dir) => dir,
        None => Directional {
            to: DVector::zeros(n),
            from: DVector::zeros(n),
            net: DVector::zeros(n),
            total: DVector::zeros(n),
        },
    }
}

/// Restricts a full table to `receivers × senders` without renormalizing.
pub fn local_table<T: Real>(
    table: &ConnectednessTable<T>,
    receivers: &[&str],
    senders: &[&str],
) -> Result<ConnectednessTable<T>, ConnectednessError> {
    let find = |names: &[String], key: &str| {
        names
            .iter()
            .position(|n| n == key)
            .ok_or_else(|| ConnectednessError::UnknownNode(key.to_string()))
    };
    if receivers.is_empty() || senders.is_empty() {
        return Err(ConnectednessError::Empty("subset must be nonempty".into()));
    }
    let rows = receivers
        .iter()
        .map(|r| find(&table.receivers, r))
        .collect::<Result<Vec<_>, _>>()?;
    let cols = senders
        .iter()
        .map(|s| find(&table.senders, s))
        .collect::<Result<Vec<_>, _>>()?;
    let matrix = DMatrix::from_fn(rows.len(), cols.len(), |i, j| {
        table.matrix[(rows[i], cols[j])]
    });
    ConnectednessTable::from_percent(
        receivers.iter().map(|s| s.to_string()).collect(),
        senders.iter().map(|s| s.to_string()).collect(),
        matrix,
    )
}

/// Elementwise mean of share matrices, returned as a full table.
pub fn average_table<T: Real>(
    names: Vec<String>,
    ds: &[DMatrix<T>],
) -> Result<ConnectednessTable<T>, ConnectednessError> {
    let first = ds
        .first()
        .ok_or_else(|| ConnectednessError::Empty("no dates to average".into()))?;
    if ds.iter().any(|d| d.shape() != first.shape()) {
        return Err(ConnectednessError::Dimension(
            "share matrices differ in shape".into(),
        ));
    }
    let mut sum = DMatrix::zeros(first.nrows(), first.ncols());
    for d in ds {
        sum += d;
    }
    ConnectednessTable::from_shares(names, &(sum / T::from_count(ds.len())))
}

/// Directional indices at every date.
#[derive(Debug, Clone, PartialEq)]
pub struct ConnectednessSeries<T: Real> {
    pub names: Vec<String>,
    /// Total index per date, percent.
    pub total: Vec<T>,
    /// `dates × N` matrices of node indices in percent.
    pub to: DMatrix<T>,
    pub from: DMatrix<T>,
    pub net: DMatrix<T>,
    pub node_total: DMatrix<T>,
}

impl<T: Real> ConnectednessSeries<T> {
    pub fn from_shares(names: Vec<String>, ds: &[DMatrix<T>]) -> Result<Self, ConnectednessError> {
        let n = names.len();
        let len = ds.len();
        let mut out = Self {
            names,
            total: Vec::with_capacity(len),
            to: DMatrix::zeros(len, n),
            from: DMatrix::zeros(len, n),
            net: DMatrix::zeros(len, n),
            node_total: DMatrix::zeros(len, n),
        };
        for (t, d) in ds.iter().enumerate() {
            if d.shape() != (n, n) {
                return Err(ConnectednessError::Dimension(format!(
                    "date {t}: {}x{} shares for {n} names",
                    d.nrows(),
                    d.ncols()
                )));
            }
            let table = ConnectednessTable::from_shares(out.names.clone(), d)?;
            out.total.push(table.total.unwrap_or_else(T::zero));
            let dir = table.directional().expect("full table is square");
            out.to.set_row(t, &dir.to.transpose());
            out.from.set_row(t, &dir.from.transpose());
            out.net.set_row(t, &dir.net.transpose());
            out.node_total.set_row(t, &dir.total.transpose());
        }
        Ok(out)
    }
}
