use std::io::Write;

use super::{heat_cells, LpError, LpResult, REGIMES};

fn cell(v: f64, identified: bool) -> String {
    if identified && v.is_finite() {
        format!("{v}")
    } else {
        "NA".to_string()
    }
}

/// Writes `lp_<index>.csv`: per-regime coefficient, standard error and
/// p-value, followed by the band limits at each level.
pub fn write_lp<W: Write>(writer: W, result: &LpResult) -> Result<(), LpError> {
    let mut w = csv::Writer::from_writer(writer);
    let Some(first) = result.horizons.first() else {
        return Err(LpError::Data("no horizons to write".into()));
    };
    let mut header = vec!["h".to_string()];
    for r in REGIMES {
        header.extend([format!("coef_{r}"), format!("se_{r}"), format!("p_{r}")]);
    }
    for r in REGIMES {
        for b in &first.bands {
            let pct = (b.level * 100.0).round() as u32;
            header.extend([format!("band{pct}_lo_{r}"), format!("band{pct}_hi_{r}")]);
        }
    }
    w.write_record(&header)?;
    for hz in &result.horizons {
        let mut row = vec![hz.h.to_string()];
        for r in 0..REGIMES.len() {
            let j = hz.regime(r);
            let id = hz.identified[j];
            row.extend([cell(hz.coef[j], id), cell(hz.se[j], id), cell(hz.p[j], id)]);
        }
        for r in 0..REGIMES.len() {
            let j = hz.regime(r);
            for b in &hz.bands {
                row.extend([
                    cell(b.lo[j], hz.identified[j]),
                    cell(b.hi[j], hz.identified[j]),
                ]);
            }
        }
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// Writes `heat.csv` rows `node,h,regime,s` for every result.
pub fn write_heat<W: Write>(writer: W, results: &[LpResult]) -> Result<(), LpError> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["node", "h", "regime", "s"])?;
    for res in results {
        for c in heat_cells(res) {
            w.write_record([
                c.node,
                c.h.to_string(),
                c.regime.to_string(),
                format!("{}", c.s),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}
