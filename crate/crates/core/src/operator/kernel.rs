//! Closed-form kernels `k_S(z) = (2π)^{-d} ∫_S e^{i z·ξ} dξ` of the band
//! limiting projection `B_S`, for frequency domains centred at the origin.
//!
//! Translating `S` by `ξ_0` multiplies the kernel by the unimodular phase
//! `e^{i z·ξ_0}`, a unitary conjugation that leaves the spectrum unchanged,
//! so `S` is always centred first and the kernel stays real.

use std::f64::consts::PI;

use super::bessel::j1_over_x;
use crate::geometry::{Domain, Primitive};
use crate::{Error, Result};

/// Below this argument the removable singularity is handled by a series.
const SMALL_ARG: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq)]
pub enum BandKernel {
    /// `S = [-W, W]^d` (d = 1 for an interval).
    Cube { dim: usize, half_width: f64 },
    /// `S` = planar disk of radius `r`.
    Disk { radius: f64 },
}

/// `sin(W z) / (π z)` with limit `W / π`.
fn sinc_kernel(w: f64, z: f64) -> f64 {
    let u = w * z;
    if u.abs() < SMALL_ARG {
        w / PI * (1.0 - u * u / 6.0)
    } else {
        u.sin() / (PI * z)
    }
}

impl BandKernel {
    pub fn new(s: &Domain) -> Result<Self> {
        match s.primitive() {
            Primitive::Interval { a, b } => Ok(Self::Cube { dim: 1, half_width: 0.5 * (b - a) }),
            Primitive::Cube { center, side } => Ok(Self::Cube { dim: center.len(), half_width: 0.5 * side }),
            Primitive::Ball { center, radius } if center.len() == 1 => Ok(Self::Cube { dim: 1, half_width: radius }),
            Primitive::Ball { center, radius } if center.len() == 2 => Ok(Self::Disk { radius }),
            Primitive::Ball { center, .. } => Err(Error::Unsupported(format!(
                "frequency ball in dimension {} (only d <= 2 has a closed-form kernel)",
                center.len()
            ))),
            Primitive::Union { .. } => Err(Error::Unsupported("dyadic-union frequency domain".into())),
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Self::Cube { dim, .. } => *dim,
            Self::Disk { .. } => 2,
        }
    }

    /// Largest frequency magnitude per coordinate.
    pub fn bandwidth(&self) -> f64 {
        match self {
            Self::Cube { half_width, .. } => *half_width,
            Self::Disk { radius } => *radius,
        }
    }

    /// Value at the diagonal, `(2π)^{-d} |S|`.
    pub fn at_zero(&self) -> f64 {
        match self {
            Self::Cube { dim, half_width } => (half_width / PI).powi(*dim as i32),
            Self::Disk { radius } => radius * radius / (4.0 * PI),
        }
    }

    pub fn eval(&self, z: &[f64]) -> f64 {
        match self {
            Self::Cube { half_width, .. } => z.iter().map(|&zi| sinc_kernel(*half_width, zi)).product(),
            Self::Disk { radius } => {
                let rho = (z[0] * z[0] + z[1] * z[1]).sqrt();
                let u = radius * rho;
                // r J_1(r ρ) / (2π ρ) = r^2/(2π) · J_1(u)/u; the ratio has no
                // singularity, and below SMALL_ARG its series is 1/2 - u^2/16.
                let ratio = if u < SMALL_ARG { 0.5 - u * u / 16.0 } else { j1_over_x(u) };
                radius * radius / (2.0 * PI) * ratio
            }
        }
    }
}

/// Kernel of `B_S` at `z`.
pub fn band_kernel(s: &Domain, z: &[f64]) -> Result<f64> {
    let k = BandKernel::new(s)?;
    if z.len() != k.dim() {
        return Err(Error::DimensionMismatch { expected: k.dim(), got: z.len() });
    }
    Ok(k.eval(z))
}
