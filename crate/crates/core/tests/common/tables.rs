//! Published projection-layer tables, typed in as printed.

use mmconnect::connectedness::{local_table, ConnectednessTable};
use nalgebra::DMatrix;

pub const TOL: f64 = 0.02;

pub const NODES: [&str; 9] = [
    "GBIG", "GBIC", "GBIF", "TBI", "CBI", "KCTI", "KCEI", "ESGI", "MEI",
];
pub const BONDS: [&str; 5] = ["GBIG", "GBIC", "GBIF", "TBI", "CBI"];
pub const EQUITIES: [&str; 4] = ["KCTI", "KCEI", "ESGI", "MEI"];

#[rustfmt::skip]
pub const PROJECTION: [f64; 81] = [
    24.66, 22.17, 18.46, 14.29, 12.42,  1.97,  2.32,  1.93,  1.79,
    21.69, 25.14, 18.79, 13.07, 13.20,  1.90,  2.30,  2.17,  1.73,
    19.80, 20.46, 27.22, 12.37, 10.98,  2.23,  2.52,  2.61,  1.81,
    16.60, 16.07, 12.94, 32.92, 12.42,  2.30,  2.44,  2.58,  1.73,
    14.03, 15.67, 11.37, 13.01, 36.52,  2.08,  2.64,  2.50,  2.17,
     2.47,  2.74,  2.65,  2.90,  2.75, 55.36, 12.17, 11.73,  7.24,
     2.88,  3.03,  2.70,  3.11,  3.60, 12.02, 53.93, 11.19,  7.56,
     3.30,  3.78,  3.70,  3.40,  3.37,  9.72,  9.99, 49.97, 12.78,
     2.80,  3.21,  2.80,  3.16,  2.94,  7.52,  8.75, 14.81, 54.02,
];

/// Printed margins of one table. `net` and `total` are absent for the
/// cross-market blocks.
pub struct Margins {
    pub name: &'static str,
    pub receivers: &'static [&'static str],
    pub senders: &'static [&'static str],
    pub from: &'static [f64],
    pub to: &'static [f64],
    pub net: Option<&'static [f64]>,
    pub total: Option<f64>,
}

pub const PUBLISHED: [Margins; 5] = [
    Margins {
        name: "projection",
        receivers: &NODES,
        senders: &NODES,
        from: &[
            75.34, 74.86, 72.78, 67.08, 63.48, 44.64, 46.07, 50.03, 45.98,
        ],
        to: &[
            83.57, 87.12, 73.40, 65.31, 61.67, 39.73, 43.12, 49.52, 36.81,
        ],
        net: Some(&[8.23, 12.26, 0.62, -1.77, -1.81, -4.91, -2.94, -0.51, -9.17]),
        total: Some(60.03),
    },
    Margins {
        name: "bond x bond",
        receivers: &BONDS,
        senders: &BONDS,
        from: &[67.34, 66.75, 63.61, 58.03, 54.08],
        to: &[72.12, 74.37, 61.56, 52.74, 49.02],
        net: Some(&[4.78, 7.62, -2.05, -5.29, -5.06]),
        total: Some(61.962),
    },
    Margins {
        name: "equity x equity",
        receivers: &EQUITIES,
        senders: &EQUITIES,
        from: &[31.14, 30.77, 32.49, 31.08],
        to: &[29.26, 30.91, 37.73, 27.58],
        net: Some(&[-1.88, 0.14, 5.24, -3.5]),
        total: Some(31.37),
    },
    Margins {
        name: "bond to equity",
        receivers: &EQUITIES,
        senders: &BONDS,
        from: &[13.51, 15.32, 17.55, 14.91],
        to: &[11.45, 12.76, 11.85, 12.57, 12.66],
        net: None,
        total: None,
    },
    Margins {
        name: "equity to bond",
        receivers: &BONDS,
        senders: &EQUITIES,
        from: &[8.01, 8.1, 9.17, 9.05, 9.39],
        to: &[10.48, 12.22, 11.79, 9.23],
        net: None,
        total: None,
    },
];

pub fn projection_table() -> ConnectednessTable<f64> {
    let names: Vec<String> = NODES.iter().map(|s| s.to_string()).collect();
    ConnectednessTable::from_percent(
        names.clone(),
        names,
        DMatrix::from_row_slice(9, 9, &PROJECTION),
    )
    .unwrap()
}

fn compare(label: &str, got: &[f64], want: &[f64], worst: &mut f64) -> Result<(), String> {
    if got.len() != want.len() {
        return Err(format!(
            "{label}: {} values, expected {}",
            got.len(),
            want.len()
        ));
    }
    for (k, (g, w)) in got.iter().zip(want).enumerate() {
        let dev = (g - w).abs();
        *worst = worst.max(dev);
        if dev > TOL {
            return Err(format!("{label}[{k}]: computed {g:.4}, printed {w}"));
        }
    }
    Ok(())
}

/// Recomputes every printed margin from the typed matrix and returns the
/// largest absolute deviation.
pub fn check_published() -> Result<f64, String> {
    let full = projection_table();
    let mut worst = 0.0f64;
    for m in &PUBLISHED {
        let t = local_table(&full, m.receivers, m.senders).map_err(|e| e.to_string())?;
        compare(
            &format!("{} from", m.name),
            t.from.as_slice(),
            m.from,
            &mut worst,
        )?;
        compare(&format!("{} to", m.name), t.to.as_slice(), m.to, &mut worst)?;
        match (m.net, &t.net) {
            (Some(want), Some(got)) => {
                compare(&format!("{} net", m.name), got.as_slice(), want, &mut worst)?
            }
            (None, None) => {}
            _ => return Err(format!("{}: net presence differs", m.name)),
        }
        match (m.total, t.total) {
            (Some(want), Some(got)) => {
                compare(&format!("{} total", m.name), &[got], &[want], &mut worst)?
            }
            (None, None) => {}
            _ => return Err(format!("{}: total presence differs", m.name)),
        }
    }
    Ok(worst)
}

#[allow(dead_code)]
/// `(node, printed full From, printed within From + cross From)` for every receiver.
pub fn block_sums() -> Vec<(&'static str, f64, f64)> {
    let blocks = [
        (&PUBLISHED[1], &PUBLISHED[4]),
        (&PUBLISHED[2], &PUBLISHED[3]),
    ];
    let mut out = Vec::new();
    for (within, cross) in blocks {
        for (k, r) in within.receivers.iter().enumerate() {
            let i = NODES.iter().position(|n| n == r).unwrap();
            out.push((*r, PUBLISHED[0].from[i], within.from[k] + cross.from[k]));
        }
    }
    out
}
