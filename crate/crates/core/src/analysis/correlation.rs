use std::io::Write;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::series::{align, PowerSeries};

/// Pairwise Pearson coefficients between named feeds.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorrelationMatrix {
    pub labels: Vec<String>,
    /// Row-major, symmetric, unit diagonal.
    pub values: Vec<Vec<f64>>,
}

impl CorrelationMatrix {
    pub fn get(&self, a: &str, b: &str) -> Option<f64> {
        let i = self.labels.iter().position(|l| l == a)?;
        let j = self.labels.iter().position(|l| l == b)?;
        Some(self.values[i][j])
    }

    /// Labeled square matrix: header `,a,b,...`, one row per feed.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let e = |e: csv::Error| Error::Io(std::io::Error::other(e));
        let mut header = vec![String::new()];
        header.extend(self.labels.iter().cloned());
        w.write_record(&header).map_err(e)?;
        for (label, row) in self.labels.iter().zip(&self.values) {
            let mut rec = vec![label.clone()];
            rec.extend(row.iter().map(|v| v.to_string()));
            w.write_record(&rec).map_err(e)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Pearson correlation of paired samples.
///
/// `None` when fewer than two pairs exist; `Err(0)`/`Err(1)` names the side
/// that is constant.
pub fn pearson(pairs: &[(f64, f64)]) -> Option<Result<f64, usize>> {
    if pairs.len() < 2 {
        return None;
    }
    let n = pairs.len() as f64;
    let (mx, my) = pairs
        .iter()
        .fold((0.0, 0.0), |(a, b), (x, y)| (a + x, b + y));
    let (mx, my) = (mx / n, my / n);
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in pairs {
        let (dx, dy) = (x - mx, y - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 {
        return Some(Err(0));
    }
    if syy == 0.0 {
        return Some(Err(1));
    }
    Some(Ok((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0)))
}

/// Correlates every pair of feeds over their aligned, jointly present samples.
pub fn correlation_matrix(feeds: &[(&str, &PowerSeries)]) -> Result<CorrelationMatrix> {
    if feeds.len() < 2 {
        return Err(Error::InvalidParameter("need at least two feeds".into()));
    }
    let n = feeds.len();
    let mut values = vec![vec![1.0; n]; n];
    for i in 0..n {
        for j in i + 1..n {
            let (a, b) = align(feeds[i].1, feeds[j].1)?;
            let pairs: Vec<(f64, f64)> = a
                .values()
                .iter()
                .zip(b.values())
                .filter_map(|(x, y)| Some(((*x)?, (*y)?)))
                .collect();
            let r = match pearson(&pairs) {
                None => return Err(Error::NoOverlap),
                Some(Err(0)) => return Err(Error::UndefinedCorrelation(feeds[i].0.to_string())),
                Some(Err(_)) => return Err(Error::UndefinedCorrelation(feeds[j].0.to_string())),
                Some(Ok(r)) => r,
            };
            values[i][j] = r;
            values[j][i] = r;
        }
    }
    Ok(CorrelationMatrix {
        labels: feeds.iter().map(|(l, _)| l.to_string()).collect(),
        values,
    })
}
