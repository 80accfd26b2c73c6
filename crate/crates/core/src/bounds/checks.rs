//! Inequalities checked directly on spectra: the Chebyshev count bound, the
//! one-half crossing window, the `N_ε` window and the synthesis inequality.

use serde::{Deserialize, Serialize};

use super::formulas::{bound_main2, log_factor_h};
use super::{BoundReport, BoundValue, ConstantMode, LogBase};
use crate::geometry::{Domain, DomainStats};
use crate::operator::{count_above, count_plunge, plunge_norm, trace_mass, Spectrum};
use crate::{Error, Result};

/// `M_ε ≤ 2^p ε^{-p} ‖T − T²‖_p^p`.
pub fn cheby_count_check(spec: &Spectrum, eps: f64, p: f64) -> Result<BoundReport> {
    let m = count_plunge(spec, eps)?;
    let value = 2f64.powf(p) * eps.powf(-p) * plunge_norm(spec, p)?;
    let b = BoundValue::new("cheby", &[("eps", eps), ("p", p)], value, ConstantMode::Exact, LogBase::Natural)
        .with_note(&spec.source);
    Ok(b.report(m as f64, 1.0))
}

/// `a!·A1·p^{-a} + A2·p^{-1}`: the bound on `‖T − T²‖_p^p` implied by
/// `M_ε ≤ A1 ln(1/ε)^a + A2 ln(1/ε)` for all `ε ∈ (0, 1/2)`.
pub fn lemma1_transform(a1: f64, a2: f64, a: u32, p: f64) -> Result<f64> {
    if !(p > 0.0 && p <= 1.0) {
        return Err(Error::OutOfRange(format!("p must lie in (0, 1] (got {p})")));
    }
    if a == 0 || a1 < 0.0 || a2 < 0.0 {
        return Err(Error::OutOfRange(format!("need a >= 1 and A1, A2 >= 0 (got {a}, {a1}, {a2})")));
    }
    let factorial: f64 = (1..=a).map(f64::from).product();
    Ok(factorial * a1 * p.powi(-(a as i32)) + a2 / p)
}

/// Indices `(n_upper, n_lower)` with `λ_n ≤ 1/2` for `n ≥ n_upper` and
/// `λ_n ≥ 1/2` for `n ≤ n_lower`; the slack `max{2 tr(T − T²), 1}` is
/// rounded up.
pub fn crossing_window(trace: f64, plunge_trace: f64) -> Result<(i64, i64)> {
    if !(trace >= 0.0 && plunge_trace >= 0.0 && trace.is_finite() && plunge_trace.is_finite()) {
        return Err(Error::OutOfRange(format!(
            "trace {trace} and plunge trace {plunge_trace} must be finite and non-negative"
        )));
    }
    let c = trace.ceil() as i64;
    let w = (2.0 * plunge_trace).max(1.0).ceil() as i64;
    Ok((c + w, c - w))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CrossingCheck {
    pub trace: f64,
    pub plunge_trace: f64,
    pub n_upper: i64,
    pub n_lower: i64,
    /// `λ_{n_upper}`, zero past the end of the spectrum.
    pub lambda_upper: f64,
    /// `λ_{n_lower}`, absent when `n_lower < 1`.
    pub lambda_lower: Option<f64>,
    pub pass: bool,
}

/// Evaluates the crossing window of a spectrum against its own eigenvalues.
pub fn crossing_check(spec: &Spectrum) -> Result<CrossingCheck> {
    let trace = spec.trace();
    let plunge_trace = plunge_norm(spec, 1.0)?;
    let (n_upper, n_lower) = crossing_window(trace, plunge_trace)?;
    let at = |n: i64| spec.values.get(n as usize - 1).copied().unwrap_or(0.0);
    let lambda_upper = at(n_upper.max(1));
    let lambda_lower = (n_lower >= 1).then(|| at(n_lower));
    let pass = lambda_upper <= 0.5 && lambda_lower.is_none_or(|l| l >= 0.5);
    Ok(CrossingCheck { trace, plunge_trace, n_upper, n_lower, lambda_upper, lambda_lower, pass })
}

/// Predicted range of `N_ε`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NWindow {
    /// `C·H(F,S)`.
    pub h: f64,
    pub h1: f64,
    pub h2: f64,
    /// `C·` plunge-count bound at `min{ε, 1 − ε}`.
    pub m_bound: f64,
    pub constant: f64,
    pub lo: f64,
    pub hi: f64,
}

impl NWindow {
    pub fn contains(&self, n: usize) -> bool {
        let n = n as f64;
        self.lo <= n && n <= self.hi
    }
}

/// `[H_2 − 1 − M, H_1 + 1 + M]` with `H_{1,2} = ⌈(2π)^{-d}|F||S|⌉ ± max{2H, 1}`,
/// where `H(F,S)` and `M` carry the implied constant `constant`.
pub fn n_eps_window(
    f: &Domain,
    s: &Domain,
    stats_f: &DomainStats,
    stats_s: &DomainStats,
    eps: f64,
    constant: f64,
) -> Result<NWindow> {
    if f.dim() != s.dim() {
        return Err(Error::DimensionMismatch { expected: f.dim(), got: s.dim() });
    }
    if !(constant > 0.0 && constant.is_finite()) {
        return Err(Error::OutOfRange(format!("constant must be positive (got {constant})")));
    }
    let m_bound = constant * bound_main2(stats_f, stats_s, eps)?.value;
    let h = constant * log_factor_h(stats_f, stats_s)?;
    let c = trace_mass(f, s).ceil();
    let slack = (2.0 * h).max(1.0);
    let (h1, h2) = (c + slack, c - slack);
    Ok(NWindow { h, h1, h2, m_bound, constant, lo: h2 - 1.0 - m_bound, hi: h1 + 1.0 + m_bound })
}

/// `p = 1/(2 log2(1/ε))`.
pub fn synthesis_exponent(eps: f64) -> Result<f64> {
    if !(eps > 0.0 && eps < 0.5) {
        return Err(Error::OutOfRange(format!("ε must lie in (0, 1/2) (got {eps})")));
    }
    Ok(0.5 / (1.0 / eps).log2())
}

/// `M_ε(whole) ≤ 2 ε^{-p} Σ_Q ‖T_Q − T_Q²‖_p^p` at `p = synthesis_exponent(ε)`,
/// for components discretized on the same nodes as the whole domain.
pub fn synthesis_check(components: &[Spectrum], whole: &Spectrum, eps: f64) -> Result<BoundReport> {
    if components.is_empty() {
        return Err(Error::GridMismatch("no component spectra".into()));
    }
    for (i, c) in components.iter().enumerate() {
        match (&c.meta, &whole.meta) {
            (Some(a), Some(b)) if a.n != b.n || a.s != b.s => {
                return Err(Error::GridMismatch(format!(
                    "component {i}: {} nodes against S = {:?}, whole: {} nodes against S = {:?}",
                    a.n, a.s, b.n, b.s
                )));
            }
            (Some(_), None) | (None, Some(_)) => {
                return Err(Error::GridMismatch(format!("component {i}: discretization metadata missing")));
            }
            _ if c.len() != whole.len() => {
                return Err(Error::GridMismatch(format!(
                    "component {i} has {} eigenvalues, whole has {}",
                    c.len(),
                    whole.len()
                )));
            }
            _ => {}
        }
    }
    let p = synthesis_exponent(eps)?;
    let sum = components.iter().map(|c| plunge_norm(c, p)).sum::<Result<f64>>()?;
    let value = 2.0 * eps.powf(-p) * sum;
    let m = count_plunge(whole, eps)?;
    let b = BoundValue::new(
        "synthesis",
        &[("components", components.len() as f64), ("eps", eps), ("p", p)],
        value,
        ConstantMode::Exact,
        LogBase::Base2,
    );
    Ok(b.report(m as f64, 1.0))
}

/// `N_ε` compared against a window.
pub fn window_report(spec: &Spectrum, window: &NWindow, eps: f64) -> Result<(usize, bool)> {
    let n = count_above(spec, eps)?;
    Ok((n, window.contains(n)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::KappaProvenance;
    use crate::operator::{discretize, spectrum, Resolution};
    use approx::assert_relative_eq;

    fn syn(v: &[f64]) -> Spectrum {
        Spectrum::synthetic(v.to_vec())
    }

    #[test]
    fn cheby_examples() {
        let r = cheby_count_check(&syn(&[0.5]), 0.25, 1.0).unwrap();
        assert_eq!((r.empirical, r.bound.value, r.pass), (1.0, 2.0, Some(true)));
        let r = cheby_count_check(&syn(&[1.0, 1.0, 0.0]), 0.1, 0.5).unwrap();
        assert_eq!((r.empirical, r.bound.value, r.pass), (0.0, 0.0, Some(true)));
    }

    #[test]
    fn transform_examples() {
        assert_eq!(lemma1_transform(1.0, 1.0, 1, 1.0).unwrap(), 2.0);
        let (a1, a2) = (0.3, 1.7);
        assert_relative_eq!(lemma1_transform(a1, a2, 2, 0.5).unwrap(), 2.0 * a1 * 4.0 + 2.0 * a2);
        assert!(lemma1_transform(1.0, 1.0, 1, 1.5).is_err());
        assert!(lemma1_transform(1.0, 1.0, 0, 0.5).is_err());
    }

    /// `p ∫_0^{1/2} χ_{(t, 1−t)}(x) t^{p−1} dt` by midpoint rule in
    /// `v = (2t)^p`, which absorbs the weight: `dv ∝ p t^{p−1} dt`.
    fn indicator_integral(x: f64, p: f64, m: usize) -> f64 {
        let h = 1.0 / m as f64;
        let inside = (0..m)
            .filter(|&j| {
                let t = 0.5 * ((j as f64 + 0.5) * h).powf(1.0 / p);
                t < x && x < 1.0 - t
            })
            .count();
        0.5f64.powf(p) * inside as f64 * h
    }

    #[test]
    fn scalar_inequality_on_grid() {
        let m = 20_000;
        for i in 0..40 {
            let x = (i as f64 + 0.5) / 40.0;
            for j in 0..25 {
                let p = 0.04 * (j + 1) as f64;
                let lhs = (x - x * x).powf(p);
                let rhs = indicator_integral(x, p, m);
                // One midpoint cell of the indicator carries the error.
                assert!(lhs <= rhs + 0.5f64.powf(p) / m as f64, "x={x} p={p}: {lhs} > {rhs}");
            }
        }
    }

    #[test]
    fn transform_dominates_saturating_spectra() {
        // A spectrum with M_ε as close to A1 ln(1/ε)^a + A2 ln(1/ε) as an
        // integer count allows: plunge eigenvalues at λ_k with
        // min{λ, 1−λ} = t_k, where t_k solves A1 ln(1/t)^a + A2 ln(1/t) = k.
        for (a1, a2, a) in [(1.0, 0.0, 1), (0.5, 2.0, 2), (0.2, 1.0, 3)] {
            let g = |t: f64| a1 * (1.0 / t).ln().powi(a) + a2 * (1.0 / t).ln();
            let h = |s: f64| a1 * s.powi(a) + a2 * s;
            let mut vals = Vec::new();
            for k in 1..400 {
                // Solve h(s) = k for s = ln(1/t) >= ln 2 by bisection.
                let (mut lo, mut hi) = (std::f64::consts::LN_2, 700.0);
                if h(lo) >= k as f64 {
                    continue;
                }
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    if h(mid) < k as f64 {
                        lo = mid
                    } else {
                        hi = mid
                    }
                }
                let t = (-hi).exp();
                vals.push(if k % 2 == 0 { t } else { 1.0 - t });
            }
            let spec = syn(&vals);
            for eps in [0.3, 0.1, 0.01, 1e-4] {
                let count = count_plunge(&spec, eps).unwrap() as f64;
                assert!(count <= g(eps) + 1e-9);
            }
            for j in 1..=10 {
                let p = 0.1 * j as f64;
                let norm = plunge_norm(&spec, p).unwrap();
                assert!(norm <= lemma1_transform(a1, a2, a as u32, p).unwrap(), "a={a} p={p}");
            }
        }
    }

    #[test]
    fn crossing_window_examples() {
        assert_eq!(crossing_window(10.2, 1.3).unwrap(), (14, 8));
        assert_eq!(crossing_window(7.0, 0.0).unwrap(), (8, 6));
        assert!(crossing_window(-1.0, 0.0).is_err());
    }

    #[test]
    fn crossing_check_on_model_spectra() {
        let c = crossing_check(&syn(&[1.0, 1.0, 1.0, 0.0])).unwrap();
        assert_eq!((c.n_upper, c.n_lower), (4, 2));
        assert!(c.pass);
        let c = crossing_check(&syn(&[0.9])).unwrap();
        assert_eq!(c.lambda_lower, None);
        assert!(c.pass);
        let spec = spectrum(
            &discretize(
                &Domain::interval(0.0, 1.0).unwrap(),
                &Domain::symmetric_interval(40.0).unwrap(),
                &Resolution::default(),
            )
            .unwrap(),
        )
        .unwrap();
        assert!(crossing_check(&spec).unwrap().pass);
    }

    #[test]
    fn window_contains_trace_and_has_stated_width() {
        let f = Domain::unit_cube(2, 1.0).unwrap();
        let s = Domain::ball(vec![0.0, 0.0], 20.0).unwrap();
        let (sf, ss) = (f.stats().unwrap(), s.stats().unwrap());
        assert_eq!(sf.kappa_provenance, KappaProvenance::Exact);
        for eps in [0.1, 0.5, 0.9] {
            for c in [1.0, 1e-3] {
                let w = n_eps_window(&f, &s, &sf, &ss, eps, c).unwrap();
                let mass = trace_mass(&f, &s);
                assert!(w.lo <= mass && mass <= w.hi);
                let width = 2.0 + 2.0 * (2.0 * w.h).max(1.0) + 2.0 * w.m_bound;
                assert_relative_eq!(w.hi - w.lo, width, max_relative = 1e-14);
            }
        }
        assert!(n_eps_window(&f, &s, &sf, &ss, 1.0, 1.0).is_err());
    }

    #[test]
    fn synthesis_single_component_is_cheby() {
        let spec = syn(&[0.99, 0.7, 0.4, 0.05, 0.001]);
        for eps in [0.1, 0.01] {
            let s = synthesis_check(std::slice::from_ref(&spec), &spec, eps).unwrap();
            let p = synthesis_exponent(eps).unwrap();
            let c = cheby_count_check(&spec, eps, p).unwrap();
            // 2^p ≤ 2 since p ≤ 1/2.
            assert!(c.bound.value <= s.bound.value);
            assert_eq!(s.empirical, c.empirical);
            assert_eq!(s.pass, Some(true));
        }
    }

    #[test]
    fn synthesis_rejects_mismatched_grids() {
        let s = Domain::symmetric_interval(8.0).unwrap();
        let a =
            spectrum(&discretize(&Domain::interval(0.0, 1.0).unwrap(), &s, &Resolution::nodes(40)).unwrap()).unwrap();
        let b =
            spectrum(&discretize(&Domain::interval(0.0, 2.0).unwrap(), &s, &Resolution::nodes(50)).unwrap()).unwrap();
        assert!(matches!(synthesis_check(std::slice::from_ref(&a), &b, 0.1), Err(Error::GridMismatch(_))));
        assert!(matches!(synthesis_check(&[], &b, 0.1), Err(Error::GridMismatch(_))));
        assert!(matches!(synthesis_check(&[syn(&[0.5; 40])], &a, 0.1), Err(Error::GridMismatch(_))));
    }
}
