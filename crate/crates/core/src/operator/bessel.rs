//! Bessel function of the first kind of order one.
//!
//! Three bands, each accurate to about 1e-14 absolute:
//! * `|x| <= 8`: power series (largest term below 1e2, so cancellation is mild);
//! * `8 < |x| <= 25`: Miller backward recurrence normalized by
//!   `J_0 + 2 Σ J_{2k} = 1`;
//! * `|x| > 25`: Hankel asymptotic expansion, truncated at its smallest term
//!   (which is below `e^{-2|x|}`).

use std::f64::consts::{FRAC_PI_4, PI};

const SERIES_MAX: f64 = 8.0;
const MILLER_MAX: f64 = 25.0;

/// `J_1(x) / x`, continuous at zero with value 1/2.
pub fn j1_over_x(x: f64) -> f64 {
    let ax = x.abs();
    if ax <= SERIES_MAX {
        series_over_x(ax)
    } else {
        j1(ax) / ax
    }
}

/// `J_1(x)`; odd in `x`.
pub fn j1(x: f64) -> f64 {
    let ax = x.abs();
    let v = if ax <= SERIES_MAX {
        ax * series_over_x(ax)
    } else if ax <= MILLER_MAX {
        miller(ax)
    } else {
        asymptotic(ax)
    };
    if x < 0.0 {
        -v
    } else {
        v
    }
}

/// `Σ_k (-1)^k (x/2)^{2k} / (2 k! (k+1)!)`.
fn series_over_x(x: f64) -> f64 {
    let q = -0.25 * x * x;
    let mut term = 0.5;
    let mut sum = term;
    for k in 1..60 {
        term *= q / (k as f64 * (k + 1) as f64);
        sum += term;
        if term.abs() < 1e-17 * sum.abs() {
            break;
        }
    }
    sum
}

fn miller(x: f64) -> f64 {
    // Start well above x so the discarded minimal solution is negligible.
    let n = 2 * (x as usize + 20);
    let (mut next, mut cur) = (0.0_f64, 1e-30_f64);
    let mut j1v = 0.0;
    let mut norm = 0.0;
    for k in (1..=n).rev() {
        let prev = 2.0 * k as f64 / x * cur - next;
        next = cur;
        cur = prev;
        // `cur` now holds J_{k-1}.
        if k - 1 == 1 {
            j1v = cur;
        }
        if (k - 1) % 2 == 0 {
            norm += if k == 1 { cur } else { 2.0 * cur };
        }
        if cur.abs() > 1e250 {
            cur *= 1e-250;
            next *= 1e-250;
            j1v *= 1e-250;
            norm *= 1e-250;
        }
    }
    j1v / norm
}

fn asymptotic(x: f64) -> f64 {
    let mu = 4.0;
    let mut term = 1.0_f64;
    let (mut p, mut q) = (1.0, 0.0);
    for k in 1..200 {
        let next = term * (mu - ((2 * k - 1) * (2 * k - 1)) as f64) / (k as f64 * 8.0 * x);
        if next.abs() >= term.abs() {
            break;
        }
        term = next;
        // Terms alternate between P and Q with sign pattern (+, +, -, -, ...).
        let sign = if (k / 2) % 2 == 0 { 1.0 } else { -1.0 };
        if k % 2 == 0 {
            p += sign * term;
        } else {
            q += sign * term;
        }
    }
    let chi = x - 3.0 * FRAC_PI_4;
    (2.0 / (PI * x)).sqrt() * (p * chi.cos() - q * chi.sin())
}
