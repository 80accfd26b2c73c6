//! Sampled surrogate for the Ahlfors regularity constant of a planar boundary.
//!
//! The estimate is `min H_1(∂Ω ∩ B(x, r)) / r` over sampled boundary points `x`
//! and a geometric grid of radii in `(0, H_1(∂Ω)]`. Being a minimum over a
//! subset of the admissible pairs, it bounds the true constant from above.

use std::f64::consts::PI;

use super::{Domain, Primitive, Segment};
use crate::{Error, Result};

/// Octaves spanned by the radius grid below the maximal radius.
const RADIUS_OCTAVES: f64 = 12.0;

/// Length of `seg ∩ B(x, r)` (closed disk).
pub fn segment_disk_length(seg: &Segment, x: [f64; 2], r: f64) -> f64 {
    let dx = seg.b[0] - seg.a[0];
    let dy = seg.b[1] - seg.a[1];
    let px = seg.a[0] - x[0];
    let py = seg.a[1] - x[1];
    let a = dx * dx + dy * dy;
    if a == 0.0 {
        return 0.0;
    }
    let b = dx * px + dy * py;
    let c = px * px + py * py - r * r;
    let disc = b * b - a * c;
    if disc <= 0.0 {
        return 0.0;
    }
    let s = disc.sqrt();
    let t0 = ((-b - s) / a).clamp(0.0, 1.0);
    let t1 = ((-b + s) / a).clamp(0.0, 1.0);
    (t1 - t0) * a.sqrt()
}

fn radius_grid(r_max: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![r_max];
    }
    (0..n).map(|j| r_max * 2f64.powf(-RADIUS_OCTAVES * j as f64 / (n - 1) as f64)).collect()
}

/// Arc length of a circle of radius `big_r` inside a disk of radius `r`
/// centred on the circle.
fn circle_arc_in_disk(big_r: f64, r: f64) -> f64 {
    if r >= 2.0 * big_r {
        2.0 * PI * big_r
    } else {
        4.0 * big_r * (r / (2.0 * big_r)).asin()
    }
}

pub(super) fn estimate_primitive(p: &Primitive, n_samples: usize, n_radii: usize) -> Result<f64> {
    if p.dim() != 2 {
        return Err(Error::Unsupported(format!(
            "Ahlfors estimate is implemented for d = 2 only (got d = {})",
            p.dim()
        )));
    }
    if n_samples < 8 || n_radii == 0 {
        return Err(Error::OutOfRange(format!(
            "need at least 8 boundary samples and one radius (got {n_samples}, {n_radii})"
        )));
    }
    let r_max = p.boundary_area()?;
    let radii = radius_grid(r_max, n_radii);
    if let Primitive::Ball { radius, .. } = p {
        // Rotation invariance: every boundary point sees the same profile.
        return Ok(radii.iter().map(|&r| circle_arc_in_disk(*radius, r) / r).fold(f64::INFINITY, f64::min));
    }
    let segments = p.boundary_segments()?;
    let total: f64 = segments.iter().map(Segment::length).sum();
    let mut points: Vec<[f64; 2]> = segments.iter().flat_map(|s| [s.a, s.b]).collect();
    let mut offset = 0.0;
    for s in &segments {
        let len = s.length();
        let step = total / n_samples as f64;
        let mut pos = (0.5 * step - offset).rem_euclid(step);
        while pos < len {
            points.push(s.point_at(pos / len));
            pos += step;
        }
        offset = (offset + len) % step;
    }
    let mut best = f64::INFINITY;
    for x in &points {
        for &r in &radii {
            let covered: f64 = segments.iter().map(|s| segment_disk_length(s, *x, r)).sum();
            best = best.min(covered / r);
        }
    }
    Ok(best)
}

/// Upper-bounding estimate of `κ_{∂Ω}` for a planar domain.
pub fn ahlfors_estimate(domain: &Domain, n_boundary_samples: usize, n_radii: usize) -> Result<f64> {
    estimate_primitive(&domain.primitive(), n_boundary_samples, n_radii)
}
