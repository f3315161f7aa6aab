use std::io::{Read, Write};

use nalgebra::DMatrix;

use super::{MacroPanel, ShockSeries, ShocksError, SurpriseEvent, MACRO_COLUMNS};
use crate::timeseries::{parse_date, YearMonth};

fn check_header(
    rdr: &mut csv::StringRecord,
    expected: &[&str],
    file: &str,
) -> Result<(), ShocksError> {
    let got: Vec<&str> = rdr.iter().map(str::trim).collect();
    if got != expected {
        return Err(ShocksError::Data(format!(
            "{file} header must be {}, got {}",
            expected.join(","),
            got.join(",")
        )));
    }
    Ok(())
}

fn number(s: &str, line: usize) -> Result<f64, ShocksError> {
    s.trim()
        .parse()
        .map_err(|e| ShocksError::Data(format!("line {line}: bad number {s:?}: {e}")))
}

/// `date,fff_surprise,spx_surprise`
pub fn read_surprises<R: Read>(reader: R) -> Result<Vec<SurpriseEvent>, ShocksError> {
    let mut rdr = csv::Reader::from_reader(reader);
    check_header(
        &mut rdr.headers()?.clone(),
        &["date", "fff_surprise", "spx_surprise"],
        "surprises",
    )?;
    let mut out = Vec::new();
    for (k, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let line = k + 2;
        out.push(SurpriseEvent {
            date: parse_date(&rec[0], line).map_err(|e| ShocksError::Data(e.to_string()))?,
            fff: number(&rec[1], line)?,
            spx: number(&rec[2], line)?,
        });
    }
    Ok(out)
}

pub fn write_surprises<W: Write>(writer: W, events: &[SurpriseEvent]) -> Result<(), ShocksError> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["date", "fff_surprise", "spx_surprise"])?;
    for e in events {
        w.write_record([e.date.to_string(), e.fff.to_string(), e.spx.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

/// `month,gs1,spx,cpi,ebp,indpro`
pub fn read_macro<R: Read>(reader: R) -> Result<MacroPanel, ShocksError> {
    let mut rdr = csv::Reader::from_reader(reader);
    let mut header = vec!["month"];
    header.extend(MACRO_COLUMNS);
    check_header(&mut rdr.headers()?.clone(), &header, "macro")?;
    let mut months = Vec::new();
    let mut vals = Vec::new();
    for (k, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let line = k + 2;
        months.push(
            rec[0]
                .parse::<YearMonth>()
                .map_err(|e| ShocksError::Data(format!("line {line}: {e}")))?,
        );
        for j in 1..=5 {
            vals.push(number(&rec[j], line)?);
        }
    }
    if months.windows(2).any(|w| w[1] != w[0].succ()) {
        return Err(ShocksError::Data("macro months must be consecutive".into()));
    }
    Ok(MacroPanel {
        values: DMatrix::from_row_slice(months.len(), 5, &vals),
        months,
    })
}

pub fn write_macro<W: Write>(writer: W, panel: &MacroPanel) -> Result<(), ShocksError> {
    let mut w = csv::Writer::from_writer(writer);
    let mut header = vec!["month"];
    header.extend(MACRO_COLUMNS);
    w.write_record(&header)?;
    for (t, m) in panel.months.iter().enumerate() {
        let mut row = vec![m.to_string()];
        row.extend(panel.values.row(t).iter().map(|v| v.to_string()));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// `month,s_total,s_mp,s_if,n_accepted`
pub fn write_shocks<W: Write>(writer: W, shocks: &ShockSeries) -> Result<(), ShocksError> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["month", "s_total", "s_mp", "s_if", "n_accepted"])?;
    for t in 0..shocks.months.len() {
        w.write_record([
            shocks.months[t].to_string(),
            shocks.total[t].to_string(),
            shocks.mp[t].to_string(),
            shocks.info[t].to_string(),
            shocks.n_accepted.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_shocks<R: Read>(reader: R) -> Result<ShockSeries, ShocksError> {
    let mut rdr = csv::Reader::from_reader(reader);
    check_header(
        &mut rdr.headers()?.clone(),
        &["month", "s_total", "s_mp", "s_if", "n_accepted"],
        "shocks",
    )?;
    let mut s = ShockSeries {
        months: Vec::new(),
        total: Vec::new(),
        mp: Vec::new(),
        info: Vec::new(),
        n_accepted: 0,
        flagged: Vec::new(),
    };
    for (k, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let line = k + 2;
        s.months.push(
            rec[0]
                .parse::<YearMonth>()
                .map_err(|e| ShocksError::Data(format!("line {line}: {e}")))?,
        );
        s.total.push(number(&rec[1], line)?);
        s.mp.push(number(&rec[2], line)?);
        s.info.push(number(&rec[3], line)?);
        s.n_accepted = rec[4]
            .trim()
            .parse()
            .map_err(|e| ShocksError::Data(format!("line {line}: bad count: {e}")))?;
        s.flagged.push(false);
    }
    Ok(s)
}
