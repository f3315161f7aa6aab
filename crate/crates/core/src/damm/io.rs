use std::collections::BTreeMap;
use std::io::{Read, Write};

use chrono::NaiveDate;
use nalgebra::DMatrix;

use super::{DammError, MomentPanel};
use crate::Real;

/// Moment paths as read back from `moments.csv`, each `T × N`.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentTable {
    pub dates: Vec<NaiveDate>,
    pub names: Vec<String>,
    pub vol: DMatrix<f64>,
    pub skew: DMatrix<f64>,
    pub kurt: DMatrix<f64>,
}

/// Writes `date,series,vol,skew,kurt` in date-major order. With `log_vol`
/// the vol column holds `ln(Vol^{1/2})`, otherwise the variance.
pub fn write_moments<T: Real, W: Write>(
    writer: W,
    panel: &MomentPanel<T>,
    log_vol: bool,
) -> Result<(), DammError> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["date", "series", "vol", "skew", "kurt"])?;
    let vol = if log_vol {
        panel.log_vol()
    } else {
        panel.vol.clone()
    };
    for (t, d) in panel.dates.iter().enumerate() {
        for (i, name) in panel.names.iter().enumerate() {
            w.write_record([
                d.format("%Y-%m-%d").to_string(),
                name.clone(),
                format!("{}", vol[(t, i)].f64()),
                format!("{}", panel.skew[(t, i)].f64()),
                format!("{}", panel.kurt[(t, i)].f64()),
            ])?;
        }
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

/// Reads the long format back into a balanced panel; series keep their
/// first-seen order and every date must list every series once.
pub fn read_moments<R: Read>(reader: R) -> Result<MomentTable, DammError> {
    let mut rdr = csv::Reader::from_reader(reader);
    let headers = rdr.headers()?.clone();
    if headers.iter().map(str::trim).collect::<Vec<_>>()
        != ["date", "series", "vol", "skew", "kurt"]
    {
        return Err(DammError::Parse(
            "moments header must be date,series,vol,skew,kurt".into(),
        ));
    }
    let mut names: Vec<String> = Vec::new();
    let mut rows: BTreeMap<NaiveDate, BTreeMap<usize, [f64; 3]>> = BTreeMap::new();
    for (k, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let line = k + 2;
        let date = NaiveDate::parse_from_str(rec[0].trim(), "%Y-%m-%d")
            .map_err(|e| DammError::Parse(format!("line {line}: bad date {:?}: {e}", &rec[0])))?;
        let name = rec[1].trim();
        let idx = match names.iter().position(|n| n == name) {
            Some(i) => i,
            None => {
                names.push(name.to_string());
                names.len() - 1
            }
        };
        let mut v = [0.0; 3];
        for (slot, cell) in v.iter_mut().zip(rec.iter().skip(2)) {
            *slot = cell
                .trim()
                .parse()
                .map_err(|_| DammError::Parse(format!("line {line}: bad value {cell:?}")))?;
        }
        if rows.entry(date).or_default().insert(idx, v).is_some() {
            return Err(DammError::Parse(format!(
                "line {line}: duplicate {name} on {date}"
            )));
        }
    }
    let n = names.len();
    if let Some((d, _)) = rows.iter().find(|(_, r)| r.len() != n) {
        return Err(DammError::Parse(format!(
            "date {d} does not list all {n} series"
        )));
    }
    let t_len = rows.len();
    let mut out = [
        DMatrix::zeros(t_len, n),
        DMatrix::zeros(t_len, n),
        DMatrix::zeros(t_len, n),
    ];
    for (t, r) in rows.values().enumerate() {
        for (&i, v) in r {
            for k in 0..3 {
                out[k][(t, i)] = v[k];
            }
        }
    }
    let [vol, skew, kurt] = out;
    Ok(MomentTable {
        dates: rows.into_keys().collect(),
        names,
        vol,
        skew,
        kurt,
    })
}
