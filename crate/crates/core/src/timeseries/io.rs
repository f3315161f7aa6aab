//! CSV readers and writers for price panels, event calendars and summaries.

use std::io::{Read, Write};

use chrono::NaiveDate;

use super::{
    align_calendars, Decision, EventCalendar, PolicyEvent, PricePanel, RawSeries, SummaryStats,
    TimeseriesError,
};

pub(crate) fn parse_date(s: &str, line: usize) -> Result<NaiveDate, TimeseriesError> {
    NaiveDate::parse_from_str(s.trim(), "%Y-%m-%d")
        .map_err(|e| TimeseriesError::Parse(format!("line {line}: bad date {s:?}: {e}")))
}

/// Reads `date,<name1>,…,<nameN>`; empty cells mark non-trading days and the
/// result is aligned on the common calendar.
pub fn read_prices<R: Read>(reader: R) -> Result<PricePanel, TimeseriesError> {
    let mut rdr = csv::Reader::from_reader(reader);
    let headers = rdr.headers()?.clone();
    if headers.len() < 2 || headers.get(0).map(str::trim) != Some("date") {
        return Err(TimeseriesError::Parse(
            "price header must be date,<name1>,...".into(),
        ));
    }
    let mut series: Vec<RawSeries> = headers
        .iter()
        .skip(1)
        .map(|n| RawSeries {
            name: n.trim().to_string(),
            observations: Vec::new(),
        })
        .collect();
    for (k, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let line = k + 2;
        let date = parse_date(&rec[0], line)?;
        for (j, cell) in rec.iter().skip(1).enumerate() {
            let cell = cell.trim();
            if cell.is_empty() || cell.eq_ignore_ascii_case("na") {
                continue;
            }
            let v: f64 = cell
                .parse()
                .map_err(|_| TimeseriesError::Parse(format!("line {line}: bad value {cell:?}")))?;
            series[j].observations.push((date, v));
        }
    }
    align_calendars(&series)
}

pub fn write_prices<W: Write>(writer: W, panel: &PricePanel) -> Result<(), TimeseriesError> {
    let mut w = csv::Writer::from_writer(writer);
    let mut header = vec!["date".to_string()];
    header.extend(panel.names.iter().cloned());
    w.write_record(&header)?;
    for (t, d) in panel.dates.iter().enumerate() {
        let mut row = vec![d.format("%Y-%m-%d").to_string()];
        row.extend((0..panel.n_series()).map(|j| format!("{}", panel.values[(t, j)])));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// Reads `date,decision`.
pub fn read_events<R: Read>(reader: R) -> Result<EventCalendar, TimeseriesError> {
    let mut rdr = csv::Reader::from_reader(reader);
    let headers = rdr.headers()?.clone();
    if headers.iter().map(str::trim).collect::<Vec<_>>() != ["date", "decision"] {
        return Err(TimeseriesError::Parse(
            "event header must be date,decision".into(),
        ));
    }
    let mut events = Vec::new();
    for (k, rec) in rdr.records().enumerate() {
        let rec = rec?;
        events.push(PolicyEvent {
            date: parse_date(&rec[0], k + 2)?,
            decision: rec[1].parse::<Decision>()?,
        });
    }
    EventCalendar::new(events)
}

pub fn write_events<W: Write>(writer: W, calendar: &EventCalendar) -> Result<(), TimeseriesError> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["date", "decision"])?;
    for e in calendar.events() {
        w.write_record([
            e.date.format("%Y-%m-%d").to_string(),
            e.decision.as_str().to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_summary<W: Write>(writer: W, stats: &SummaryStats) -> Result<(), TimeseriesError> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record([
        "series",
        "mean",
        "std",
        "max",
        "min",
        "skewness",
        "kurtosis",
        "adf_stat",
        "adf_pvalue",
        "jb_stat",
        "jb_pvalue",
    ])?;
    for s in &stats.series {
        w.write_record([
            s.name.clone(),
            format!("{:.4}", s.mean),
            format!("{:.4}", s.std),
            format!("{:.4}", s.max),
            format!("{:.4}", s.min),
            format!("{:.4}", s.skewness),
            format!("{:.4}", s.kurtosis),
            format!("{:.4}", s.adf_stat),
            format!("{:.4}", s.adf_pvalue),
            format!("{:.4}", s.jb_stat),
            format!("{:.4}", s.jb_pvalue),
        ])?;
    }
    w.flush()?;
    Ok(())
}
