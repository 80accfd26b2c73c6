//! Closed-form bounds. The multiscale estimates use base-2 logarithms; the
//! one-dimensional interval results default to natural logarithms.

use std::f64::consts::PI;

use super::{BoundValue, ConstantMode, LogBase};
use crate::geometry::{DomainStats, KappaProvenance};
use crate::{Error, Result};

fn check_eps_half(eps: f64) -> Result<()> {
    if eps > 0.0 && eps < 0.5 {
        Ok(())
    } else {
        Err(Error::OutOfRange(format!("ε must lie in (0, 1/2) (got {eps})")))
    }
}

fn check_eps_unit(eps: f64) -> Result<()> {
    if eps > 0.0 && eps < 1.0 {
        Ok(())
    } else {
        Err(Error::OutOfRange(format!("ε must lie in (0, 1) (got {eps})")))
    }
}

fn check_pair(f: &DomainStats, s: &DomainStats) -> Result<()> {
    if f.dim != s.dim {
        return Err(Error::DimensionMismatch { expected: f.dim, got: s.dim });
    }
    for (name, st) in [("F", f), ("S", s)] {
        if !(st.boundary_area > 0.0 && st.kappa > 0.0 && st.kappa <= 1.0) {
            return Err(Error::OutOfRange(format!(
                "{name}: boundary measure {} and κ {} must be positive with κ <= 1",
                st.boundary_area, st.kappa
            )));
        }
    }
    Ok(())
}

fn kappa_note(b: BoundValue, f: &DomainStats, s: Option<&DomainStats>) -> BoundValue {
    let estimated = f.kappa_provenance == KappaProvenance::Estimated
        || s.is_some_and(|s| s.kappa_provenance == KappaProvenance::Estimated);
    if estimated {
        b.with_note("uses an estimated Ahlfors constant")
    } else {
        b
    }
}

/// Shape of the main estimate at `l = log2(1/ε)`.
fn main_shape(f: &DomainStats, s: &DomainStats, l: f64) -> f64 {
    let hh = f.boundary_area * s.boundary_area;
    let big_l = hh.log2();
    let d = f.dim as i32;
    (f.boundary_area / f.kappa) * (s.boundary_area / s.kappa) * (big_l * l.powi(d) + big_l.powi(3) * l)
}

fn check_main_hypothesis(f: &DomainStats, s: &DomainStats) -> Result<()> {
    check_pair(f, s)?;
    let hh = f.boundary_area * s.boundary_area;
    let need = 64f64.powi(f.dim as i32 - 1);
    if hh < need {
        return Err(Error::Hypothesis(format!("boundary measure product {hh} is below 64^(d-1) = {need}")));
    }
    Ok(())
}

fn main_params(f: &DomainStats, s: &DomainStats, eps: f64) -> [(&'static str, f64); 6] {
    [
        ("d", f.dim as f64),
        ("eps", eps),
        ("h_f", f.boundary_area),
        ("h_s", s.boundary_area),
        ("kappa_f", f.kappa),
        ("kappa_s", s.kappa),
    ]
}

/// Plunge-count estimate
/// `(H_F/κ_F)(H_S/κ_S)·{log(H_F H_S)·log(1/ε)^d + log(H_F H_S)^3·log(1/ε)}`,
/// base-2 logs, shape only.
pub fn bound_main1(f: &DomainStats, s: &DomainStats, eps: f64) -> Result<BoundValue> {
    check_main_hypothesis(f, s)?;
    check_eps_half(eps)?;
    let value = main_shape(f, s, (1.0 / eps).log2());
    Ok(kappa_note(
        BoundValue::new("main1", &main_params(f, s, eps), value, ConstantMode::ShapeOnly, LogBase::Base2),
        f,
        Some(s),
    ))
}

/// Deviation of `N_ε` from `(2π)^{-d}|F||S|`: `bound_main1` at `min{ε, 1 − ε}`.
pub fn bound_main2(f: &DomainStats, s: &DomainStats, eps: f64) -> Result<BoundValue> {
    check_main_hypothesis(f, s)?;
    check_eps_unit(eps)?;
    let e0 = eps.min(1.0 - eps);
    let value = main_shape(f, s, (1.0 / e0).log2());
    Ok(kappa_note(
        BoundValue::new("main2", &main_params(f, s, eps), value, ConstantMode::ShapeOnly, LogBase::Base2),
        f,
        Some(s),
    ))
}

/// Earlier estimate `(H_F/κ_F)(H_S/κ_S)·log(H_F H_S/(κ_F ε))^{2d(1+α)+1}`.
pub fn bound_mrs(f: &DomainStats, s: &DomainStats, eps: f64, alpha: f64) -> Result<BoundValue> {
    check_pair(f, s)?;
    check_eps_half(eps)?;
    if !(alpha > 0.0 && alpha <= 0.5) {
        return Err(Error::OutOfRange(format!("α must lie in (0, 1/2] (got {alpha})")));
    }
    let hh = f.boundary_area * s.boundary_area;
    if hh < 1.0 {
        return Err(Error::Hypothesis(format!("boundary measure product {hh} is below 1")));
    }
    let d = f.dim as f64;
    let exponent = 2.0 * d * (1.0 + alpha) + 1.0;
    let value =
        (f.boundary_area / f.kappa) * (s.boundary_area / s.kappa) * (hh / (f.kappa * eps)).log2().powf(exponent);
    let mut params = main_params(f, s, eps).to_vec();
    params.push(("alpha", alpha));
    Ok(kappa_note(BoundValue::new("mrs", &params, value, ConstantMode::ShapeOnly, LogBase::Base2), f, Some(s)))
}

/// Cube pair estimate
/// `log(δ1δ2)^d·log(1/ε)^d + (δ1δ2)^{d−1}·log(δ1δ2)·log(1/ε)`, base 2.
pub fn bound_cube_pair(delta1: f64, delta2: f64, eps: f64, d: usize) -> Result<BoundValue> {
    check_eps_half(eps)?;
    if d == 0 {
        return Err(Error::OutOfRange("dimension must be at least 1".into()));
    }
    let p = delta1 * delta2;
    if !(delta1 > 0.0 && delta2 > 0.0 && p >= 16.0) {
        return Err(Error::Hypothesis(format!("δ1·δ2 = {p} must be at least 16")));
    }
    let (lp, l) = (p.log2(), (1.0 / eps).log2());
    let di = d as i32;
    let value = lp.powi(di) * l.powi(di) + p.powi(di - 1) * lp * l;
    Ok(BoundValue::new(
        "cube_pair",
        &[("d", d as f64), ("delta1", delta1), ("delta2", delta2), ("eps", eps)],
        value,
        ConstantMode::ShapeOnly,
        LogBase::Base2,
    ))
}

/// Estimate for a domain against a frequency cube of side `δ`:
/// `δ^{d−1}(H/κ)[log(1/ε)^d + log(δ^{d−1}H)²·log(1/ε)]`, base 2.
pub fn bound_stage1(delta_q0: f64, f: &DomainStats, eps: f64) -> Result<BoundValue> {
    check_eps_half(eps)?;
    if !(delta_q0 > 0.0 && f.boundary_area > 0.0 && f.kappa > 0.0 && f.kappa <= 1.0) {
        return Err(Error::OutOfRange(format!(
            "cube side {delta_q0}, boundary measure {} and κ {} must be positive",
            f.boundary_area, f.kappa
        )));
    }
    let di = f.dim as i32;
    let m = delta_q0.powi(di - 1) * f.boundary_area;
    let need = 32f64.powi(di - 1);
    if m < need {
        return Err(Error::Hypothesis(format!("δ^(d-1)·H = {m} is below 32^(d-1) = {need}")));
    }
    let l = (1.0 / eps).log2();
    let value = delta_q0.powi(di - 1) * (f.boundary_area / f.kappa) * (l.powi(di) + m.log2().powi(2) * l);
    Ok(kappa_note(
        BoundValue::new(
            "stage1",
            &[
                ("d", f.dim as f64),
                ("delta_q0", delta_q0),
                ("eps", eps),
                ("h_f", f.boundary_area),
                ("kappa_f", f.kappa),
            ],
            value,
            ConstantMode::ShapeOnly,
            LogBase::Base2,
        ),
        f,
        None,
    ))
}

/// Explicit interval-pair bound `(2/π²)·log(50W/π + 25)·log(5/(ε(1−ε))) + 7`.
pub fn bound_karnik_1d(w: f64, eps: f64, base: LogBase) -> Result<f64> {
    if !(w >= 2.0 * PI && w.is_finite()) {
        return Err(Error::OutOfRange(format!("W must be at least 2π (got {w})")));
    }
    check_eps_unit(eps)?;
    Ok(2.0 / (PI * PI) * base.log(50.0 * w / PI + 25.0) * base.log(5.0 / (eps * (1.0 - eps))) + 7.0)
}

/// `10·exp(−(k − ⌈W/π⌉ − 6)/(c1·ln(W + c2)))` for `k ≥ ⌈W/π⌉`.
pub fn decay_bound_1d(k: usize, w: f64, c1: f64, c2: f64) -> Result<f64> {
    if !(w > 0.0 && w.is_finite()) {
        return Err(Error::OutOfRange(format!("W must be positive (got {w})")));
    }
    if !(c1 > 0.0 && c2 > 0.0 && w + c2 > 1.0) {
        return Err(Error::OutOfRange(format!("need c1, c2 > 0 and W + c2 > 1 (got {c1}, {c2})")));
    }
    let k0 = (w / PI).ceil();
    if (k as f64) < k0 {
        return Err(Error::OutOfRange(format!("k = {k} is below ⌈W/π⌉ = {k0}")));
    }
    Ok(10.0 * (-(k as f64 - k0 - 6.0) / (c1 * (w + c2).ln())).exp())
}

/// `E_d(ε, r) = max{r^{d−1} log(r/ε)^{5/2}, log(r/ε)^{5d/2}}`, base 2.
pub fn bound_cube_convex_ed(eps: f64, r: f64, d: usize) -> Result<f64> {
    check_eps_half(eps)?;
    if !(r >= 1.0 && r.is_finite()) || d == 0 {
        return Err(Error::OutOfRange(format!("need r >= 1 and d >= 1 (got r = {r}, d = {d})")));
    }
    let l = (r / eps).log2();
    let d = d as f64;
    Ok((r.powf(d - 1.0) * l.powf(2.5)).max(l.powf(2.5 * d)))
}

/// Leading Landau–Widom term `(2/π²)·log W·log(1/ε − 1)`.
pub fn landau_widom(w: f64, eps: f64, base: LogBase) -> Result<f64> {
    if !(w > 1.0 && w.is_finite()) {
        return Err(Error::OutOfRange(format!("W must exceed 1 (got {w})")));
    }
    check_eps_half(eps)?;
    Ok(2.0 / (PI * PI) * base.log(w) * base.log(1.0 / eps - 1.0))
}

/// `H(F,S) = H_F H_S/(κ_F κ_S)·log(H_F H_S)^3`, base 2, shape only.
pub fn log_factor_h(f: &DomainStats, s: &DomainStats) -> Result<f64> {
    check_pair(f, s)?;
    let hh = f.boundary_area * s.boundary_area;
    Ok(hh / (f.kappa * s.kappa) * hh.log2().powi(3))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn stats(dim: usize, h: f64, kappa: f64) -> DomainStats {
        DomainStats { dim, volume: 1.0, boundary_area: h, kappa, kappa_provenance: KappaProvenance::Exact }
    }

    fn log_grid() -> Vec<f64> {
        (1..=40).map(|k| 0.5 * 0.75f64.powi(k)).collect()
    }

    #[test]
    fn main1_at_hypothesis_boundary() {
        let (f, s) = (stats(2, 8.0, 0.5), stats(2, 8.0, 0.25));
        for eps in [0.1f64, 0.01, 1e-5] {
            let l = (1.0 / eps).log2();
            let want = 16.0 * 32.0 * (6.0 * l * l + 216.0 * l);
            assert_relative_eq!(bound_main1(&f, &s, eps).unwrap().value, want, max_relative = 1e-14);
        }
        assert!(matches!(bound_main1(&stats(2, 7.9, 1.0), &s, 0.1), Err(Error::Hypothesis(_))));
        assert!(bound_main1(&f, &s, 0.5).is_err());
    }

    #[test]
    fn main1_near_one_half_tends_to_the_l_equals_one_value() {
        let (f, s) = (stats(2, 16.0, 1.0), stats(2, 16.0, 1.0));
        let v = bound_main1(&f, &s, 0.5 - 1e-12).unwrap().value;
        let big_l = 256f64.log2();
        assert_relative_eq!(v, 256.0 * (big_l + big_l.powi(3)), max_relative = 1e-9);
    }

    #[test]
    fn main1_doubling_boundaries() {
        let eps = 0.03;
        let v1 = bound_main1(&stats(2, 10.0, 0.7), &stats(2, 20.0, 0.9), eps).unwrap().value;
        let v2 = bound_main1(&stats(2, 20.0, 0.7), &stats(2, 40.0, 0.9), eps).unwrap().value;
        let l = (1.0 / eps).log2();
        let (a, b) = (200f64.log2(), 800f64.log2());
        let factor = 4.0 * (b * l * l + b.powi(3) * l) / (a * l * l + a.powi(3) * l);
        assert!((v2 / v1 - factor).abs() < 1e-12);
    }

    #[test]
    fn main2_symmetry_and_agreement() {
        let (f, s) = (stats(2, 12.0, 0.8), stats(2, 30.0, 1.0));
        for eps in [0.01, 0.25, 0.4] {
            let m1 = bound_main1(&f, &s, eps).unwrap().value;
            assert_eq!(bound_main2(&f, &s, eps).unwrap().value, m1);
            assert_relative_eq!(bound_main2(&f, &s, 1.0 - eps).unwrap().value, m1, max_relative = 1e-12);
        }
        let half = bound_main2(&f, &s, 0.5).unwrap().value;
        assert_relative_eq!(half, bound_main1(&f, &s, 0.5 - 1e-13).unwrap().value, max_relative = 1e-9);
        assert!(bound_main2(&f, &s, 1.0).is_err());
    }

    #[test]
    fn mrs_exponent_and_orderings() {
        let (f, s) = (stats(2, 1.0, 1.0), stats(2, 1.0, 1.0));
        // With unit measures the value is log2(1/ε)^{2d(1+α)+1}.
        assert_relative_eq!(bound_mrs(&f, &s, 0.25, 0.5).unwrap().value, 2f64.powi(7), max_relative = 1e-14);
        let (f, s) = (stats(2, 9.0, 0.6), stats(2, 14.0, 0.9));
        let mut prev = f64::INFINITY;
        for eps in [1e-2, 1e-4, 1e-8, 1e-16, 1e-32] {
            let r = bound_main1(&f, &s, eps).unwrap().value / bound_mrs(&f, &s, eps, 0.5).unwrap().value;
            assert!(r < prev);
            prev = r;
        }
        assert!(prev < 1e-3);
        assert!(bound_mrs(&f, &s, 0.1, 0.5).unwrap().value > bound_mrs(&f, &s, 0.1, 0.25).unwrap().value);
        assert!(bound_mrs(&f, &s, 0.1, 0.0).is_err());
        assert!(bound_mrs(&f, &s, 0.1, 0.6).is_err());
    }

    #[test]
    fn cube_pair_values() {
        for eps in [0.1f64, 0.001] {
            let l = (1.0 / eps).log2();
            assert_relative_eq!(bound_cube_pair(4.0, 4.0, eps, 1).unwrap().value, 8.0 * l, max_relative = 1e-14);
        }
        assert!(matches!(bound_cube_pair(3.0, 5.0, 0.1, 2), Err(Error::Hypothesis(_))));
        // d = 2, ε fixed: the polynomial term takes over as δ1δ2 grows.
        let l = 10f64.log2();
        let terms = |p: f64| (p.log2().powi(2) * l * l, p * p.log2() * l);
        let (a, b) = terms(16.0);
        assert!(a > b * 0.5);
        let (a, b) = terms(4096.0);
        assert!(b > 10.0 * a);
    }

    #[test]
    fn stage1_substitution_and_scaling() {
        let f = stats(2, 32.0, 0.5);
        for eps in [0.1f64, 0.01] {
            let l = (1.0 / eps).log2();
            let want = 32.0 / 0.5 * (l * l + 25.0 * l);
            assert_relative_eq!(bound_stage1(1.0, &f, eps).unwrap().value, want, max_relative = 1e-14);
        }
        // Q0 -> Q0/t, F -> tF.
        for t in [0.25, 3.0, 10.0] {
            let g = stats(2, 40.0 * t, 0.7);
            let a = bound_stage1(2.0, &stats(2, 40.0, 0.7), 0.05).unwrap().value;
            let b = bound_stage1(2.0 / t, &g, 0.05).unwrap().value;
            assert_relative_eq!(a, b, max_relative = 1e-13);
        }
        assert!(matches!(bound_stage1(0.5, &f, 0.1), Err(Error::Hypothesis(_))));
    }

    #[test]
    fn stage1_dominates_cube_pair_for_cubes() {
        // Spatial cube of side a (H = 4a, κ = 1) against a frequency cube of side δ.
        for a in [4.0, 8.0, 32.0] {
            for delta in [4.0, 16.0, 64.0] {
                for eps in [0.1, 1e-3] {
                    let st = stats(2, 4.0 * a, 1.0);
                    let s1 = bound_stage1(delta, &st, eps).unwrap().value;
                    let cp = bound_cube_pair(a, delta, eps, 2).unwrap().value;
                    assert!(s1 >= cp, "a={a} δ={delta} ε={eps}: {s1} < {cp}");
                }
            }
        }
    }

    #[test]
    fn karnik_value_and_symmetry() {
        let v = bound_karnik_1d(2.0 * PI, 0.01, LogBase::Natural).unwrap();
        assert!((v - 13.09).abs() < 0.01, "{v}");
        for eps in [0.001, 0.1, 0.3] {
            let a = bound_karnik_1d(64.0, eps, LogBase::Natural).unwrap();
            assert_relative_eq!(a, bound_karnik_1d(64.0, 1.0 - eps, LogBase::Natural).unwrap(), max_relative = 1e-12);
        }
        let b2 = bound_karnik_1d(2.0 * PI, 0.01, LogBase::Base2).unwrap();
        assert_relative_eq!(b2 - 7.0, (v - 7.0) / std::f64::consts::LN_2.powi(2), max_relative = 1e-13);
        assert!(bound_karnik_1d(6.0, 0.1, LogBase::Natural).is_err());
    }

    #[test]
    fn decay_bound_shape() {
        let w = 20.0 * PI;
        assert_eq!(decay_bound_1d(26, w, 1.0, 1.0).unwrap(), 10.0);
        let vals: Vec<f64> = (20..80).map(|k| decay_bound_1d(k, w, 0.7, 2.0).unwrap()).collect();
        assert!(vals.windows(2).all(|p| p[1] < p[0]));
        assert!(decay_bound_1d(19, w, 1.0, 1.0).is_err());
    }

    #[test]
    fn ed_branches() {
        let (eps, l) = (0.01, |r: f64| (r / 0.01f64).log2());
        assert_eq!(bound_cube_convex_ed(eps, 5.0, 1).unwrap(), l(5.0).powf(2.5));
        let big = 1e6;
        assert_eq!(bound_cube_convex_ed(eps, big, 2).unwrap(), big * l(big).powf(2.5));
        assert_eq!(bound_cube_convex_ed(eps, 2.0, 2).unwrap(), l(2.0).powf(5.0));
        // Crossover: r = log2(r/ε)^{5/2} for d = 2, located by bisection.
        let g = |r: f64| r - l(r).powf(2.5);
        let (mut lo, mut hi) = (1e3, 1e6);
        assert!(g(lo) < 0.0 && g(hi) > 0.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if g(mid) < 0.0 {
                lo = mid
            } else {
                hi = mid
            }
        }
        let a = bound_cube_convex_ed(eps, lo, 2).unwrap();
        assert_relative_eq!(a, lo * l(lo).powf(2.5), max_relative = 1e-9);
        assert_relative_eq!(a, l(lo).powf(5.0), max_relative = 1e-9);
    }

    #[test]
    fn landau_widom_identities() {
        let w = 37.0;
        let a = landau_widom(w, 0.01, LogBase::Natural).unwrap();
        assert_relative_eq!(landau_widom(w * w, 0.01, LogBase::Natural).unwrap(), 2.0 * a, max_relative = 1e-14);
        assert!(landau_widom(w, 0.5 - 1e-12, LogBase::Natural).unwrap() < 1e-10);
        assert!(landau_widom(1.0, 0.1, LogBase::Natural).is_err());
    }

    #[test]
    fn shape_bounds_are_monotone() {
        let eps = log_grid();
        for h in [8.0, 20.0, 100.0] {
            let (f, s) = (stats(2, h, 0.8), stats(2, 10.0, 0.9));
            let mut prev = [0.0; 3];
            for &e in &eps {
                let cur = [
                    bound_main1(&f, &s, e).unwrap().value,
                    bound_mrs(&f, &s, e, 0.3).unwrap().value,
                    bound_stage1(4.0, &f, e).unwrap().value,
                ];
                for i in 0..3 {
                    assert!(cur[i] >= prev[i]);
                }
                prev = cur;
            }
        }
        for &e in &eps {
            let mut prev = [0.0; 4];
            for h in [8.0, 9.0, 16.0, 50.0, 400.0] {
                let (f, s) = (stats(2, h, 0.8), stats(2, 10.0, 0.9));
                let cur = [
                    bound_main1(&f, &s, e).unwrap().value,
                    bound_main1(&s, &f, e).unwrap().value,
                    bound_mrs(&f, &s, e, 0.5).unwrap().value,
                    bound_stage1(1.0, &stats(2, 4.0 * h, 0.8), e).unwrap().value,
                ];
                for i in 0..4 {
                    assert!(cur[i] >= prev[i]);
                }
                prev = cur;
            }
            let mut prev = 0.0;
            for p in [16.0, 32.0, 64.0, 512.0] {
                let v = bound_cube_pair(p, 1.0, e, 2).unwrap().value;
                assert!(v >= prev);
                prev = v;
            }
        }
    }
}
