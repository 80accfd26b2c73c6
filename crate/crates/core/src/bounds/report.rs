//! Report export and the fits used to test growth orders and constants.

use std::collections::BTreeSet;
use std::io::Write;

use serde::{Deserialize, Serialize};

use super::BoundReport;
use crate::{Error, Result};

/// Shortest round-trip text for a float, scientific outside `[1e-4, 1e15)`.
pub(crate) fn fmt_f64(x: f64) -> String {
    let a = x.abs();
    if x == 0.0 || !x.is_finite() || (1e-4..1e15).contains(&a) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

/// Rows `bound, <params>, value, empirical, ratio, pass, constant_mode,
/// log_base, notes`; parameter columns are the sorted union over the batch.
pub fn write_reports_csv<W: Write>(reports: &[BoundReport], out: W) -> Result<()> {
    let keys: BTreeSet<&str> = reports.iter().flat_map(|r| r.bound.params.keys().map(String::as_str)).collect();
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
    let mut header = vec!["bound"];
    header.extend(keys.iter().copied());
    header.extend(["value", "empirical", "ratio", "pass", "constant_mode", "log_base", "notes"]);
    w.write_record(&header)?;
    for r in reports {
        let mut row = vec![r.bound.name.clone()];
        row.extend(keys.iter().map(|k| r.bound.params.get(*k).map(|v| fmt_f64(*v)).unwrap_or_default()));
        row.push(fmt_f64(r.bound.value));
        row.push(fmt_f64(r.empirical));
        row.push(fmt_f64(r.ratio));
        row.push(r.pass.map(|p| p.to_string()).unwrap_or_default());
        row.push(r.bound.constant_mode.as_str().to_string());
        row.push(r.bound.log_base.as_str().to_string());
        row.push(r.bound.notes.clone());
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn reports_to_json(reports: &[BoundReport]) -> serde_json::Value {
    serde_json::to_value(reports).expect("reports serialize")
}

/// Least squares slope of `log y` against `log x`, with its `r²`.
pub fn fit_exponent(points: &[(f64, f64)]) -> Result<(f64, f64)> {
    if points.len() < 3 {
        return Err(Error::OutOfRange(format!("need at least 3 points (got {})", points.len())));
    }
    if let Some(p) = points.iter().find(|(x, y)| !(*x > 0.0 && *y > 0.0 && x.is_finite() && y.is_finite())) {
        return Err(Error::OutOfRange(format!("points must be positive and finite (got {p:?})")));
    }
    let n = points.len() as f64;
    let (lx, ly): (Vec<f64>, Vec<f64>) = points.iter().map(|(x, y)| (x.ln(), y.ln())).unzip();
    let (mx, my) = (lx.iter().sum::<f64>() / n, ly.iter().sum::<f64>() / n);
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx <= 1e-24 * lx.iter().map(|x| x * x).sum::<f64>().max(1.0) {
        return Err(Error::OutOfRange("abscissae are degenerate".into()));
    }
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let syy: f64 = ly.iter().map(|y| (y - my).powi(2)).sum();
    let ss_res: f64 = lx.iter().zip(&ly).map(|(x, y)| (y - my - slope * (x - mx)).powi(2)).sum();
    let r2 = if syy > 0.0 { 1.0 - ss_res / syy } else { 1.0 };
    Ok((slope, r2))
}

/// Smallest constant `C` with `empirical ≤ C·value` over a grid, and the
/// same fit on every other grid point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FittedConstant {
    pub full: f64,
    pub half: f64,
    pub points: usize,
}

impl FittedConstant {
    /// Finite, positive, and within a factor 2 between the two fits.
    pub fn is_stable(&self) -> bool {
        self.full.is_finite() && self.full > 0.0 && self.half > 0.0 && self.full / self.half <= 2.0
    }
}

/// `pairs` are `(bound value, empirical)`.
pub fn fit_constant(pairs: &[(f64, f64)]) -> Result<FittedConstant> {
    if pairs.len() < 2 {
        return Err(Error::OutOfRange(format!("need at least 2 grid points (got {})", pairs.len())));
    }
    if let Some(p) = pairs.iter().find(|(v, e)| !(*v > 0.0 && *e >= 0.0 && v.is_finite() && e.is_finite())) {
        return Err(Error::OutOfRange(format!("bound values must be positive (got {p:?})")));
    }
    let fit = |it: &mut dyn Iterator<Item = &(f64, f64)>| it.map(|(v, e)| e / v).fold(0.0, f64::max);
    Ok(FittedConstant { full: fit(&mut pairs.iter()), half: fit(&mut pairs.iter().step_by(2)), points: pairs.len() })
}
