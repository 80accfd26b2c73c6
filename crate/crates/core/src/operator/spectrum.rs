//! Spectra of discretized operators and the Schatten, plunge and counting
//! functionals evaluated on them.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::discretize::{discretize, DiscreteOperator, OperatorMeta, Resolution};
use super::eigen::symmetric_eigenvalues;
use crate::geometry::Domain;
use crate::{Error, Result};

/// Tolerance on eigenvalues outside `[0, 1]` before clipping is flagged.
pub const TOL_PSD: f64 = 1e-8;
/// Products below this are dropped from tensor spectra.
pub const PRODUCT_FLOOR: f64 = 1e-14;
/// Relative threshold perturbation of the sensitivity companions.
pub const SENSITIVITY: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    /// Non-increasing, clipped to `[0, 1]`.
    pub values: Vec<f64>,
    /// `(min, max)` of the raw eigenvalues before clipping.
    pub raw_extremes: (f64, f64),
    /// Raised when some raw eigenvalue lies further than `TOL_PSD` outside `[0, 1]`.
    pub clip_flag: bool,
    pub source: String,
    pub meta: Option<OperatorMeta>,
}

impl Spectrum {
    /// Sorts, clips and flags raw eigenvalues.
    pub fn from_raw(mut raw: Vec<f64>, source: impl Into<String>, meta: Option<OperatorMeta>) -> Self {
        raw.sort_by(|a, b| b.total_cmp(a));
        let raw_extremes = match (raw.last(), raw.first()) {
            (Some(&lo), Some(&hi)) => (lo, hi),
            _ => (0.0, 0.0),
        };
        let clip_flag = raw_extremes.0 < -TOL_PSD || raw_extremes.1 > 1.0 + TOL_PSD;
        let values = raw.into_iter().map(|x| x.clamp(0.0, 1.0)).collect();
        Self { values, raw_extremes, clip_flag, source: source.into(), meta }
    }

    /// A spectrum given directly by its values (e.g. a model spectrum).
    pub fn synthetic(values: Vec<f64>) -> Self {
        Self::from_raw(values, "synthetic", None)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn trace(&self) -> f64 {
        self.values.iter().sum()
    }

    /// `index,lambda` rows, 1-based.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["index", "lambda"])?;
        for (k, v) in self.values.iter().enumerate() {
            w.write_record([(k + 1).to_string(), format!("{v:e}")])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("spectrum serializes")
    }
}

/// Full eigendecomposition of the Nyström matrix.
pub fn spectrum(op: &DiscreteOperator) -> Result<Spectrum> {
    let raw = symmetric_eigenvalues(op.matrix.clone(), op.n())?;
    Ok(Spectrum::from_raw(raw, "nystrom", Some(op.meta.clone())))
}

/// `(Σ λ^p)^{1/p}` over arbitrary non-negative values; `p = ∞` gives the maximum.
pub fn schatten_values(values: &[f64], p: f64) -> Result<f64> {
    if p.is_nan() || p <= 0.0 {
        return Err(Error::OutOfRange(format!("Schatten exponent must be positive (got {p})")));
    }
    if p.is_infinite() {
        return Ok(values.iter().copied().fold(0.0, f64::max));
    }
    Ok(values.iter().map(|x| x.powf(p)).sum::<f64>().powf(1.0 / p))
}

/// `‖T‖_p`.
pub fn schatten(spec: &Spectrum, p: f64) -> Result<f64> {
    schatten_values(&spec.values, p)
}

/// `‖T − T²‖_p^p = Σ (λ − λ²)^p`.
pub fn plunge_norm(spec: &Spectrum, p: f64) -> Result<f64> {
    if !(p > 0.0 && p.is_finite()) {
        return Err(Error::OutOfRange(format!("plunge exponent must be positive and finite (got {p})")));
    }
    Ok(spec.values.iter().map(|l| (l - l * l).max(0.0).powf(p)).sum())
}

fn plunge_raw(values: &[f64], eps: f64) -> usize {
    values.iter().filter(|&&l| eps < l && l < 1.0 - eps).count()
}

fn above_raw(values: &[f64], eps: f64) -> usize {
    values.iter().filter(|&&l| l > eps).count()
}

/// `M_ε = #{λ ∈ (ε, 1 − ε)}`.
pub fn count_plunge(spec: &Spectrum, eps: f64) -> Result<usize> {
    if !(eps > 0.0 && eps < 0.5) {
        return Err(Error::OutOfRange(format!("plunge threshold must lie in (0, 1/2) (got {eps})")));
    }
    Ok(plunge_raw(&spec.values, eps))
}

/// `N_ε = #{λ > ε}`.
pub fn count_above(spec: &Spectrum, eps: f64) -> Result<usize> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::OutOfRange(format!("threshold must lie in (0, 1) (got {eps})")));
    }
    Ok(above_raw(&spec.values, eps))
}

/// A count together with the counts at `ε(1 ∓ 1e-6)`, exposing eigenvalues
/// that sit on the threshold.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SensitiveCount {
    pub count: usize,
    pub at_lower_eps: usize,
    pub at_upper_eps: usize,
}

impl SensitiveCount {
    pub fn is_stable(&self) -> bool {
        self.count == self.at_lower_eps && self.count == self.at_upper_eps
    }
}

pub fn count_plunge_sensitive(spec: &Spectrum, eps: f64) -> Result<SensitiveCount> {
    Ok(SensitiveCount {
        count: count_plunge(spec, eps)?,
        at_lower_eps: plunge_raw(&spec.values, eps * (1.0 - SENSITIVITY)),
        at_upper_eps: plunge_raw(&spec.values, eps * (1.0 + SENSITIVITY)),
    })
}

pub fn count_above_sensitive(spec: &Spectrum, eps: f64) -> Result<SensitiveCount> {
    Ok(SensitiveCount {
        count: count_above(spec, eps)?,
        at_lower_eps: above_raw(&spec.values, eps * (1.0 - SENSITIVITY)),
        at_upper_eps: above_raw(&spec.values, eps * (1.0 + SENSITIVITY)),
    })
}

/// `(2π)^{-d} |F| |S|`, the trace of `T_{F,S}`.
pub fn trace_mass(f: &Domain, s: &Domain) -> f64 {
    (2.0 * std::f64::consts::PI).powi(-(f.dim() as i32)) * f.volume() * s.volume()
}

/// `|Σλ − (2π)^{-d}|F||S|| / ((2π)^{-d}|F||S|)`.
pub fn trace_residual(f: &Domain, s: &Domain, spec: &Spectrum) -> f64 {
    let mass = trace_mass(f, s);
    (spec.trace() - mass).abs() / mass
}

/// Spectrum of `T_{Q_1,Q_2}` for cubes of sides `δ_1`, `δ_2` in dimension
/// `d`: the kernel factorizes over coordinates, so the eigenvalues are all
/// `d`-fold products of the 1D eigenvalues for `([0, δ_1], [−δ_2/2, δ_2/2])`.
/// Products at or below `PRODUCT_FLOOR` are dropped.
pub fn cube_pair_spectrum(delta1: f64, delta2: f64, d: usize, res: &Resolution) -> Result<Spectrum> {
    if d == 0 {
        return Err(Error::OutOfRange("dimension must be at least 1".into()));
    }
    if !(delta1 > 0.0 && delta2 > 0.0 && delta1.is_finite() && delta2.is_finite()) {
        return Err(Error::OutOfRange(format!("cube sides must be positive (got {delta1}, {delta2})")));
    }
    let f = Domain::interval(0.0, delta1)?;
    let s = Domain::symmetric_interval(delta2 / 2.0)?;
    let one = spectrum(&discretize(&f, &s, res)?)?;
    if d == 1 {
        return Ok(one);
    }
    let base: Vec<f64> = one.values.iter().copied().filter(|&v| v > PRODUCT_FLOOR).collect();
    let mut out = Vec::new();
    products(&base, d, 1.0, &mut out);
    let mut spec = Spectrum::from_raw(out, format!("tensor_product_d{d}"), one.meta);
    spec.clip_flag |= one.clip_flag;
    Ok(spec)
}

/// Every ordered index tuple is a distinct eigenvalue; `base` is sorted
/// non-increasing, so each loop stops at the first product below the floor.
fn products(base: &[f64], depth: usize, acc: f64, out: &mut Vec<f64>) {
    if depth == 0 {
        out.push(acc);
        return;
    }
    for &v in base {
        let next = acc * v;
        if next <= PRODUCT_FLOOR {
            break;
        }
        products(base, depth - 1, next, out);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn syn(v: &[f64]) -> Spectrum {
        Spectrum::synthetic(v.to_vec())
    }

    #[test]
    fn clipping_and_flags() {
        let s = Spectrum::from_raw(vec![0.1, 1.0 + 3e-9, 0.5], "t", None);
        assert_eq!(s.values, vec![1.0, 0.5, 0.1]);
        assert!(!s.clip_flag);
        let s = Spectrum::from_raw(vec![0.3, -1e-5], "t", None);
        assert_eq!(s.values, vec![0.3, 0.0]);
        assert!(s.clip_flag);
        assert_eq!(s.raw_extremes, (-1e-5, 0.3));
    }

    #[test]
    fn schatten_examples() {
        assert_eq!(schatten(&syn(&[1.0, 1.0, 1.0]), 1.0).unwrap(), 3.0);
        assert!((schatten(&syn(&[0.25]), 0.5).unwrap() - 0.25).abs() < 1e-16);
        assert_eq!(schatten(&syn(&[0.2, 0.7]), f64::INFINITY).unwrap(), 0.7);
        assert!(schatten(&syn(&[0.2]), 0.0).is_err());
        let s = syn(&[0.9, 0.6, 0.33, 0.1, 0.01]);
        let ps = [0.25, 0.5, 1.0, 2.0, 4.0, f64::INFINITY];
        for w in ps.windows(2) {
            assert!(schatten(&s, w[0]).unwrap() >= schatten(&s, w[1]).unwrap() - 1e-15);
        }
    }

    #[test]
    fn plunge_examples() {
        for p in [0.1, 0.5, 1.0, 3.0] {
            assert_eq!(plunge_norm(&syn(&[1.0, 0.0]), p).unwrap(), 0.0);
        }
        assert_eq!(plunge_norm(&syn(&[0.5]), 1.0).unwrap(), 0.25);
        let s = syn(&[0.99, 0.7, 0.5, 0.2, 0.0]);
        let inside = s.values.iter().filter(|&&l| l > 0.0 && l < 1.0).count();
        assert!(plunge_norm(&s, 1.0).unwrap() <= 0.25 * inside as f64);
    }

    #[test]
    fn counting_examples() {
        let s = syn(&[0.9, 0.5, 0.1]);
        assert_eq!(count_plunge(&s, 0.2).unwrap(), 1);
        assert_eq!(count_plunge(&s, 0.05).unwrap(), 3);
        assert_eq!(count_plunge(&s, 0.1).unwrap(), 1);
        assert_eq!(count_above(&s, 0.5).unwrap(), 1);
        assert_eq!(count_above(&s, 1e-300).unwrap(), 3);
        assert!(count_plunge(&s, 0.5).is_err());
        assert!(count_above(&s, 1.0).is_err());
        let c = count_plunge_sensitive(&s, 0.1).unwrap();
        // At ε(1 − 1e-6) both 0.1 and 0.9 fall strictly inside.
        assert_eq!((c.count, c.at_lower_eps, c.at_upper_eps), (1, 3, 1));
        assert!(!c.is_stable());
        let s = syn(&[0.9, 0.4, 0.3, 0.0]);
        let eps = 0.35;
        let positive = s.values.iter().filter(|&&l| l > 0.0).count();
        let below = s.values.iter().filter(|&&l| l > 0.0 && l <= eps).count();
        assert_eq!(count_above(&s, eps).unwrap() + below, positive);
    }

    #[test]
    fn trace_residual_of_exact_mass() {
        let f = Domain::interval(0.0, 1.0).unwrap();
        let s = Domain::symmetric_interval(4.0 * PI).unwrap();
        assert_eq!(trace_residual(&f, &s, &syn(&[1.0, 1.0, 1.0, 0.5, 0.5])), 0.0);
    }

    #[test]
    fn one_dimensional_trace_and_convergence() {
        let f = Domain::interval(0.0, 1.0).unwrap();
        let s = Domain::symmetric_interval(4.0 * PI).unwrap();
        let spec = spectrum(&discretize(&f, &s, &Resolution::nodes(600)).unwrap()).unwrap();
        assert!(trace_residual(&f, &s, &spec) < 1e-6);
        assert!((spec.trace() - 4.0).abs() < 4e-6);
        let fine = spectrum(&discretize(&f, &s, &Resolution::nodes(1200)).unwrap()).unwrap();
        for k in 0..20 {
            assert!((spec.values[k] - fine.values[k]).abs() < 1e-8);
        }
        let mut prev = f64::INFINITY;
        for n in [16, 32, 64, 128] {
            let r = trace_residual(&f, &s, &spectrum(&discretize(&f, &s, &Resolution::nodes(n)).unwrap()).unwrap());
            assert!(r <= prev + 1e-9, "n={n}: {r} > {prev}");
            prev = r;
        }
    }

    #[test]
    fn disk_frequency_trace() {
        let f = Domain::unit_cube(2, 1.0).unwrap();
        let s = Domain::ball(vec![0.0, 0.0], 1.0).unwrap().dilate(8.0).unwrap();
        let spec = spectrum(&discretize(&f, &s, &Resolution::default()).unwrap()).unwrap();
        assert!((spec.trace() - 16.0 / PI).abs() < 1e-4);
        assert!(!spec.clip_flag);
    }

    #[test]
    fn cube_pair_matches_direct_computation() {
        let res = Resolution::default();
        let one = cube_pair_spectrum(2.0, 16.0, 1, &res).unwrap();
        let f = Domain::interval(0.0, 2.0).unwrap();
        let s = Domain::symmetric_interval(8.0).unwrap();
        let direct = spectrum(&discretize(&f, &s, &res).unwrap()).unwrap();
        for (a, b) in one.values.iter().zip(&direct.values) {
            assert!((a - b).abs() <= 1e-10);
        }
        let two = cube_pair_spectrum(2.0, 16.0, 2, &res).unwrap();
        assert!((two.trace() - one.trace().powi(2)).abs() < 1e-9);
        assert!(two.values.windows(2).all(|w| w[0] >= w[1]));
        assert!(cube_pair_spectrum(2.0, 16.0, 0, &res).is_err());
    }
}
