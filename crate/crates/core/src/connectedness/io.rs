use std::collections::BTreeMap;
use std::io::{Read, Write};

use chrono::NaiveDate;
use nalgebra::DMatrix;

use super::{ConnectednessError, ConnectednessSeries, ConnectednessTable};
use crate::Real;

fn pct<T: Real>(v: T) -> String {
    format!("{:.2}", v.f64())
}

/// Writes the pairwise block with a `From others` column, then `To others`
/// and `Net` rows. The bottom-right cell of the `To others` row holds the
/// total index.
pub fn write_table<T: Real, W: Write>(
    writer: W,
    table: &ConnectednessTable<T>,
) -> Result<(), ConnectednessError> {
    let mut w = csv::Writer::from_writer(writer);
    let mut header = vec![String::new()];
    header.extend(table.senders.iter().cloned());
    header.push("From others".into());
    w.write_record(&header)?;
    for (i, name) in table.receivers.iter().enumerate() {
        let mut row = vec![name.clone()];
        row.extend(table.matrix.row(i).iter().map(|&v| pct(v)));
        row.push(pct(table.from[i]));
        w.write_record(&row)?;
    }
    let mut to = vec!["To others".to_string()];
    to.extend(table.to.iter().map(|&v| pct(v)));
    to.push(table.total.map(pct).unwrap_or_default());
    w.write_record(&to)?;
    if let Some(net) = &table.net {
        let mut row = vec!["Net".to_string()];
        row.extend(net.iter().map(|&v| pct(v)));
        row.push(String::new());
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

fn check_dates<T: Real>(
    dates: &[NaiveDate],
    series: &ConnectednessSeries<T>,
) -> Result<(), ConnectednessError> {
    if dates.len() != series.total.len() {
        return Err(ConnectednessError::Dimension(format!(
            "{} dates for {} index values",
            dates.len(),
            series.total.len()
        )));
    }
    Ok(())
}

/// `date,total`
pub fn write_total_index<T: Real, W: Write>(
    writer: W,
    dates: &[NaiveDate],
    series: &ConnectednessSeries<T>,
) -> Result<(), ConnectednessError> {
    check_dates(dates, series)?;
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["date", "total"])?;
    for (d, v) in dates.iter().zip(&series.total) {
        w.write_record([d.to_string(), v.f64().to_string()])?;
    }
    w.flush()?;
    Ok(())
}

/// `date,node,net`
pub fn write_net_index<T: Real, W: Write>(
    writer: W,
    dates: &[NaiveDate],
    series: &ConnectednessSeries<T>,
) -> Result<(), ConnectednessError> {
    check_dates(dates, series)?;
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["date", "node", "net"])?;
    for (t, d) in dates.iter().enumerate() {
        for (j, name) in series.names.iter().enumerate() {
            w.write_record([
                d.to_string(),
                name.clone(),
                series.net[(t, j)].f64().to_string(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// `date,from,to,share` where `share = d_ij` with sender `j` and receiver `i`.
pub fn write_gfevd_long<T: Real, W: Write>(
    writer: W,
    dates: &[NaiveDate],
    names: &[String],
    ds: &[DMatrix<T>],
) -> Result<(), ConnectednessError> {
    if dates.len() != ds.len() {
        return Err(ConnectednessError::Dimension(format!(
            "{} dates for {} tables",
            dates.len(),
            ds.len()
        )));
    }
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["date", "from", "to", "share"])?;
    for (date, d) in dates.iter().zip(ds) {
        for (i, to) in names.iter().enumerate() {
            for (j, from) in names.iter().enumerate() {
                w.write_record([
                    date.to_string(),
                    from.clone(),
                    to.clone(),
                    d[(i, j)].f64().to_string(),
                ])?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

/// Inverse of [`write_gfevd_long`]. Node order follows first appearance.
pub fn read_gfevd_long<R: Read>(
    reader: R,
) -> Result<(Vec<NaiveDate>, Vec<String>, Vec<DMatrix<f64>>), ConnectednessError> {
    let mut rdr = csv::Reader::from_reader(reader);
    let headers = rdr.headers()?.clone();
    if headers.iter().map(str::trim).collect::<Vec<_>>() != ["date", "from", "to", "share"] {
        return Err(ConnectednessError::Parse(
            "header must be date,from,to,share".into(),
        ));
    }
    let mut names: Vec<String> = Vec::new();
    let mut cells: BTreeMap<NaiveDate, Vec<(String, String, f64)>> = BTreeMap::new();
    for (k, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let line = k + 2;
        let date = NaiveDate::parse_from_str(rec[0].trim(), "%Y-%m-%d")
            .map_err(|e| ConnectednessError::Parse(format!("line {line}: {e}")))?;
        let share: f64 = rec[3]
            .trim()
            .parse()
            .map_err(|e| ConnectednessError::Parse(format!("line {line}: {e}")))?;
        for name in [&rec[1], &rec[2]] {
            if !names.iter().any(|n| n == name) {
                names.push(name.to_string());
            }
        }
        cells
            .entry(date)
            .or_default()
            .push((rec[1].to_string(), rec[2].to_string(), share));
    }
    let n = names.len();
    let index = |s: &str| names.iter().position(|n| n == s).expect("name registered");
    let mut dates = Vec::with_capacity(cells.len());
    let mut ds = Vec::with_capacity(cells.len());
    for (date, entries) in cells {
        if entries.len() != n * n {
            return Err(ConnectednessError::Parse(format!(
                "date {date}: {} entries for {n} nodes",
                entries.len()
            )));
        }
        let mut d = DMatrix::from_element(n, n, f64::NAN);
        for (from, to, share) in entries {
            d[(index(&to), index(&from))] = share;
        }
        if d.iter().any(|v| v.is_nan()) {
            return Err(ConnectednessError::Parse(format!(
                "date {date}: duplicate or missing pairs"
            )));
        }
        dates.push(date);
        ds.push(d);
    }
    Ok((dates, names, ds))
}

fn parse_cell<T: std::str::FromStr>(cell: &str, line: usize) -> Result<T, ConnectednessError> {
    cell.trim()
        .parse()
        .map_err(|_| ConnectednessError::Parse(format!("line {line}: bad value {cell:?}")))
}

fn parse_day(cell: &str, line: usize) -> Result<NaiveDate, ConnectednessError> {
    NaiveDate::parse_from_str(cell.trim(), "%Y-%m-%d")
        .map_err(|e| ConnectednessError::Parse(format!("line {line}: bad date {cell:?}: {e}")))
}

/// Reads `date,total`.
pub fn read_total_index<R: Read>(
    reader: R,
) -> Result<(Vec<NaiveDate>, Vec<f64>), ConnectednessError> {
    let mut rdr = csv::Reader::from_reader(reader);
    if rdr.headers()?.iter().map(str::trim).collect::<Vec<_>>() != ["date", "total"] {
        return Err(ConnectednessError::Parse(
            "header must be date,total".into(),
        ));
    }
    let mut dates = Vec::new();
    let mut values = Vec::new();
    for (k, rec) in rdr.records().enumerate() {
        let rec = rec?;
        dates.push(parse_day(&rec[0], k + 2)?);
        values.push(parse_cell(&rec[1], k + 2)?);
    }
    Ok((dates, values))
}

/// Reads the `net` path of one node from `date,node,net`.
pub fn read_net_index<R: Read>(
    reader: R,
    node: &str,
) -> Result<(Vec<NaiveDate>, Vec<f64>), ConnectednessError> {
    let mut rdr = csv::Reader::from_reader(reader);
    if rdr.headers()?.iter().map(str::trim).collect::<Vec<_>>() != ["date", "node", "net"] {
        return Err(ConnectednessError::Parse(
            "header must be date,node,net".into(),
        ));
    }
    let mut dates = Vec::new();
    let mut values = Vec::new();
    for (k, rec) in rdr.records().enumerate() {
        let rec = rec?;
        if rec[1].trim() == node {
            dates.push(parse_day(&rec[0], k + 2)?);
            values.push(parse_cell(&rec[2], k + 2)?);
        }
    }
    if dates.is_empty() {
        return Err(ConnectednessError::UnknownNode(node.to_string()));
    }
    Ok((dates, values))
}
