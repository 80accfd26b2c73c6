//! Spatial and frequency domains.
//!
//! Every domain is treated as a closed set. Wrappers (`Dilated`, `Translated`)
//! are kept structurally for serialization but are folded into a
//! [`Primitive`] before any measure or predicate is evaluated.

mod ahlfors;
mod spec;
mod union;

use std::f64::consts::PI;

pub use ahlfors::{ahlfors_estimate, segment_disk_length};
pub use spec::DomainSpec;
pub use union::Segment;

use serde::{Deserialize, Serialize};

use crate::dyadic::DyadicCube;
use crate::{Error, Result};

/// Closed axis-aligned box.
#[derive(Clone, Debug, PartialEq)]
pub struct Aabb {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl Aabb {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Self {
        debug_assert_eq!(lo.len(), hi.len());
        Self { lo, hi }
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn volume(&self) -> f64 {
        self.lo.iter().zip(&self.hi).map(|(l, h)| h - l).product()
    }

    pub fn extent(&self) -> f64 {
        self.lo.iter().zip(&self.hi).map(|(l, h)| h - l).fold(0.0, f64::max)
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.iter().zip(self.lo.iter().zip(&self.hi)).all(|(v, (l, h))| *l <= *v && *v <= *h)
    }

    fn map(&self, f: impl Fn(usize, f64) -> f64) -> Aabb {
        let a: Vec<f64> = self.lo.iter().enumerate().map(|(i, &v)| f(i, v)).collect();
        let b: Vec<f64> = self.hi.iter().enumerate().map(|(i, &v)| f(i, v)).collect();
        let lo = a.iter().zip(&b).map(|(x, y)| x.min(*y)).collect();
        let hi = a.iter().zip(&b).map(|(x, y)| x.max(*y)).collect();
        Aabb::new(lo, hi)
    }

    /// Closed-set intersection volume with another box (zero when they only touch).
    fn overlap_volume(&self, other: &Aabb) -> f64 {
        let mut v = 1.0;
        for i in 0..self.dim() {
            let w = self.hi[i].min(other.hi[i]) - self.lo[i].max(other.lo[i]);
            if w <= 0.0 {
                return 0.0;
            }
            v *= w;
        }
        v
    }

    fn intersects(&self, other: &Aabb) -> bool {
        (0..self.dim()).all(|i| self.lo[i] <= other.hi[i] && other.lo[i] <= self.hi[i])
    }
}

/// Classification of a closed cube against a closed domain.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    Subset,
    Disjoint,
    Straddles,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KappaProvenance {
    Exact,
    Estimated,
}

/// Measures and boundary regularity data of a domain.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DomainStats {
    pub dim: usize,
    pub volume: f64,
    pub boundary_area: f64,
    pub kappa: f64,
    pub kappa_provenance: KappaProvenance,
}

/// A bounded closed region of `R^d`.
#[derive(Clone, Debug, PartialEq)]
pub enum Domain {
    Interval { a: f64, b: f64 },
    AxisCube { center: Vec<f64>, side: f64 },
    Ball { center: Vec<f64>, radius: f64 },
    DyadicUnion { dim: usize, cubes: Vec<DyadicCube> },
    Dilated { t: f64, inner: Box<Domain> },
    Translated { v: Vec<f64>, inner: Box<Domain> },
}

/// A domain with all wrappers folded in.
#[derive(Clone, Debug, PartialEq)]
pub enum Primitive {
    Interval {
        a: f64,
        b: f64,
    },
    Cube {
        center: Vec<f64>,
        side: f64,
    },
    Ball {
        center: Vec<f64>,
        radius: f64,
    },
    /// `shift + scale * (union of dyadic cubes)`.
    Union {
        dim: usize,
        scale: f64,
        shift: Vec<f64>,
        cubes: Vec<DyadicCube>,
    },
}

fn finite(xs: &[f64]) -> bool {
    xs.iter().all(|x| x.is_finite())
}

impl Domain {
    pub fn interval(a: f64, b: f64) -> Result<Self> {
        if !(a.is_finite() && b.is_finite() && a < b) {
            return Err(Error::InvalidDomain(format!("interval [{a}, {b}] is empty or unbounded")));
        }
        Ok(Domain::Interval { a, b })
    }

    /// The symmetric interval `[-w, w]`.
    pub fn symmetric_interval(w: f64) -> Result<Self> {
        Self::interval(-w, w)
    }

    pub fn cube(center: Vec<f64>, side: f64) -> Result<Self> {
        if center.is_empty() || !finite(&center) || !(side.is_finite() && side > 0.0) {
            return Err(Error::InvalidDomain(format!("axis cube needs dim >= 1 and positive side (got side {side})")));
        }
        Ok(Domain::AxisCube { center, side })
    }

    /// `[0, side]^d`.
    pub fn unit_cube(dim: usize, side: f64) -> Result<Self> {
        Self::cube(vec![side / 2.0; dim], side)
    }

    pub fn ball(center: Vec<f64>, radius: f64) -> Result<Self> {
        if center.is_empty() || !finite(&center) || !(radius.is_finite() && radius > 0.0) {
            return Err(Error::InvalidDomain(format!("ball needs dim >= 1 and positive radius (got radius {radius})")));
        }
        Ok(Domain::Ball { center, radius })
    }

    /// Finite union of dyadic cubes; members must have pairwise disjoint interiors.
    pub fn dyadic_union(dim: usize, cubes: Vec<DyadicCube>) -> Result<Self> {
        if dim == 0 || cubes.is_empty() {
            return Err(Error::InvalidDomain("dyadic union needs at least one cube".into()));
        }
        if let Some(q) = cubes.iter().find(|q| q.dim() != dim) {
            return Err(Error::DimensionMismatch { expected: dim, got: q.dim() });
        }
        for (i, p) in cubes.iter().enumerate() {
            if let Some(q) = cubes[i + 1..].iter().find(|q| p.interiors_overlap(q)) {
                return Err(Error::InvalidDomain(format!("dyadic union members {p:?} and {q:?} overlap")));
            }
        }
        Ok(Domain::DyadicUnion { dim, cubes })
    }

    pub fn dilate(&self, t: f64) -> Result<Self> {
        if !(t.is_finite() && t > 0.0) {
            return Err(Error::OutOfRange(format!("dilation factor must be positive, got {t}")));
        }
        Ok(Domain::Dilated { t, inner: Box::new(self.clone()) })
    }

    pub fn translate(&self, v: Vec<f64>) -> Result<Self> {
        if v.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: v.len() });
        }
        if !finite(&v) {
            return Err(Error::InvalidDomain("non-finite translation".into()));
        }
        Ok(Domain::Translated { v, inner: Box::new(self.clone()) })
    }

    pub fn dim(&self) -> usize {
        match self {
            Domain::Interval { .. } => 1,
            Domain::AxisCube { center, .. } | Domain::Ball { center, .. } => center.len(),
            Domain::DyadicUnion { dim, .. } => *dim,
            Domain::Dilated { inner, .. } | Domain::Translated { inner, .. } => inner.dim(),
        }
    }

    pub fn primitive(&self) -> Primitive {
        match self {
            Domain::Interval { a, b } => Primitive::Interval { a: *a, b: *b },
            Domain::AxisCube { center, side } => Primitive::Cube { center: center.clone(), side: *side },
            Domain::Ball { center, radius } => Primitive::Ball { center: center.clone(), radius: *radius },
            Domain::DyadicUnion { dim, cubes } => {
                Primitive::Union { dim: *dim, scale: 1.0, shift: vec![0.0; *dim], cubes: cubes.clone() }
            }
            Domain::Dilated { t, inner } => inner.primitive().affine(*t, None),
            Domain::Translated { v, inner } => inner.primitive().affine(1.0, Some(v)),
        }
    }

    pub fn volume(&self) -> f64 {
        self.primitive().volume()
    }

    /// `H_{d-1}(∂Ω)`; for `d = 1` the counting-measure convention `H_0(∂[a,b]) = 2`.
    pub fn boundary_area(&self) -> Result<f64> {
        self.primitive().boundary_area()
    }

    pub fn bbox(&self) -> Aabb {
        self.primitive().bbox()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        self.primitive().contains(x)
    }

    /// Exact classification of a closed box against the closed domain.
    pub fn relation_box(&self, b: &Aabb) -> Result<Relation> {
        if b.dim() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: b.dim() });
        }
        Ok(self.primitive().relation(b))
    }

    pub fn cube_relation(&self, cube: &DyadicCube) -> Result<Relation> {
        self.relation_box(&cube.aabb())
    }

    /// `κ_{∂Ω}` with its provenance.
    pub fn kappa(&self) -> Result<(f64, KappaProvenance)> {
        self.primitive().kappa()
    }

    pub fn stats(&self) -> Result<DomainStats> {
        let (kappa, kappa_provenance) = self.kappa()?;
        Ok(DomainStats {
            dim: self.dim(),
            volume: self.volume(),
            boundary_area: self.boundary_area()?,
            kappa,
            kappa_provenance,
        })
    }

    /// Exposed boundary as line segments (d = 2 polygonal domains only).
    pub fn boundary_segments(&self) -> Result<Vec<Segment>> {
        self.primitive().boundary_segments()
    }
}

/// Volume of the unit ball in `R^d`.
pub fn unit_ball_volume(d: usize) -> f64 {
    match d {
        0 => 1.0,
        1 => 2.0,
        _ => 2.0 * PI / d as f64 * unit_ball_volume(d - 2),
    }
}

impl Primitive {
    pub fn dim(&self) -> usize {
        match self {
            Primitive::Interval { .. } => 1,
            Primitive::Cube { center, .. } | Primitive::Ball { center, .. } => center.len(),
            Primitive::Union { dim, .. } => *dim,
        }
    }

    /// `x -> t x + v`.
    fn affine(self, t: f64, v: Option<&Vec<f64>>) -> Primitive {
        let add = |i: usize, x: f64| x + v.map_or(0.0, |v| v[i]);
        match self {
            Primitive::Interval { a, b } => Primitive::Interval { a: add(0, t * a), b: add(0, t * b) },
            Primitive::Cube { center, side } => Primitive::Cube {
                center: center.iter().enumerate().map(|(i, &c)| add(i, t * c)).collect(),
                side: t * side,
            },
            Primitive::Ball { center, radius } => Primitive::Ball {
                center: center.iter().enumerate().map(|(i, &c)| add(i, t * c)).collect(),
                radius: t * radius,
            },
            Primitive::Union { dim, scale, shift, cubes } => Primitive::Union {
                dim,
                scale: t * scale,
                shift: shift.iter().enumerate().map(|(i, &s)| add(i, t * s)).collect(),
                cubes,
            },
        }
    }

    fn union_box(scale: f64, shift: &[f64], q: &DyadicCube) -> Aabb {
        let b = q.aabb();
        b.map(|i, x| shift[i] + scale * x)
    }

    pub fn volume(&self) -> f64 {
        match self {
            Primitive::Interval { a, b } => b - a,
            Primitive::Cube { center, side } => side.powi(center.len() as i32),
            Primitive::Ball { center, radius } => {
                let d = center.len();
                unit_ball_volume(d) * radius.powi(d as i32)
            }
            Primitive::Union { dim, scale, cubes, .. } => {
                scale.powi(*dim as i32) * cubes.iter().map(DyadicCube::volume).sum::<f64>()
            }
        }
    }

    pub fn boundary_area(&self) -> Result<f64> {
        Ok(match self {
            Primitive::Interval { .. } => 2.0,
            Primitive::Cube { center, side } => {
                let d = center.len();
                if d == 1 {
                    2.0
                } else {
                    2.0 * d as f64 * side.powi(d as i32 - 1)
                }
            }
            Primitive::Ball { center, radius } => {
                let d = center.len();
                if d == 1 {
                    2.0
                } else {
                    d as f64 * unit_ball_volume(d) * radius.powi(d as i32 - 1)
                }
            }
            Primitive::Union { dim, scale, cubes, .. } => {
                if *dim == 1 {
                    union::exposed_point_count(cubes) as f64
                } else {
                    scale.powi(*dim as i32 - 1) * union::exposed_face_area(cubes)
                }
            }
        })
    }

    pub fn bbox(&self) -> Aabb {
        match self {
            Primitive::Interval { a, b } => Aabb::new(vec![*a], vec![*b]),
            Primitive::Cube { center, side } => Aabb::new(
                center.iter().map(|c| c - side / 2.0).collect(),
                center.iter().map(|c| c + side / 2.0).collect(),
            ),
            Primitive::Ball { center, radius } => {
                Aabb::new(center.iter().map(|c| c - radius).collect(), center.iter().map(|c| c + radius).collect())
            }
            Primitive::Union { dim, scale, shift, cubes } => {
                let mut lo = vec![f64::INFINITY; *dim];
                let mut hi = vec![f64::NEG_INFINITY; *dim];
                for q in cubes {
                    let b = Self::union_box(*scale, shift, q);
                    for i in 0..*dim {
                        lo[i] = lo[i].min(b.lo[i]);
                        hi[i] = hi[i].max(b.hi[i]);
                    }
                }
                Aabb::new(lo, hi)
            }
        }
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        match self {
            Primitive::Interval { a, b } => *a <= x[0] && x[0] <= *b,
            Primitive::Cube { center, side } => center.iter().zip(x).all(|(c, v)| (v - c).abs() <= side / 2.0),
            Primitive::Ball { center, radius } => {
                center.iter().zip(x).map(|(c, v)| (v - c) * (v - c)).sum::<f64>() <= radius * radius
            }
            Primitive::Union { scale, shift, cubes, .. } => {
                cubes.iter().any(|q| Self::union_box(*scale, shift, q).contains(x))
            }
        }
    }

    pub fn relation(&self, b: &Aabb) -> Relation {
        match self {
            Primitive::Interval { .. } | Primitive::Cube { .. } => {
                let me = self.bbox();
                if !me.intersects(b) {
                    Relation::Disjoint
                } else if (0..b.dim()).all(|i| me.lo[i] <= b.lo[i] && b.hi[i] <= me.hi[i]) {
                    Relation::Subset
                } else {
                    Relation::Straddles
                }
            }
            Primitive::Ball { center, radius } => {
                let mut near = 0.0;
                let mut far = 0.0;
                for (i, &c) in center.iter().enumerate() {
                    let dn = if c < b.lo[i] {
                        b.lo[i] - c
                    } else if c > b.hi[i] {
                        c - b.hi[i]
                    } else {
                        0.0
                    };
                    let df = (c - b.lo[i]).abs().max((b.hi[i] - c).abs());
                    near += dn * dn;
                    far += df * df;
                }
                let r2 = radius * radius;
                if near > r2 {
                    Relation::Disjoint
                } else if far <= r2 {
                    Relation::Subset
                } else {
                    Relation::Straddles
                }
            }
            Primitive::Union { scale, shift, cubes, .. } => {
                let mut any = false;
                let mut covered = 0.0;
                for q in cubes {
                    let qb = Self::union_box(*scale, shift, q);
                    if qb.intersects(b) {
                        any = true;
                        covered += qb.overlap_volume(b);
                    }
                }
                if !any {
                    Relation::Disjoint
                } else if covered >= b.volume() {
                    Relation::Subset
                } else {
                    Relation::Straddles
                }
            }
        }
    }

    pub fn kappa(&self) -> Result<(f64, KappaProvenance)> {
        use KappaProvenance::*;
        let d = self.dim();
        match self {
            Primitive::Interval { .. } => Ok((1.0, Exact)),
            _ if d == 1 => Ok((1.0, Exact)),
            // A connected closed boundary curve meets every ball B(x, r), x on the
            // curve, in length >= 2r unless the ball swallows the whole curve, in
            // which case the ratio is H_1/r >= 1, attained at the maximal radius.
            Primitive::Cube { .. } | Primitive::Ball { .. } if d == 2 => Ok((1.0, Exact)),
            // Spherical caps: area π r^2 for r <= 2R, whole sphere beyond.
            Primitive::Ball { .. } if d == 3 => Ok((1.0, Exact)),
            Primitive::Cube { .. } => {
                // Small balls at a corner see d orthant-pieces of (d-1)-balls.
                let corner = d as f64 * unit_ball_volume(d - 1) / 2f64.powi(d as i32 - 1);
                Ok((corner.min(1.0), Estimated))
            }
            Primitive::Union { .. } if d == 2 => {
                let k = ahlfors::estimate_primitive(self, 512, 64)?;
                Ok((k, Estimated))
            }
            _ => Err(Error::Unsupported(format!("regularity constant for {self:?} in dimension {d}"))),
        }
    }

    pub fn boundary_segments(&self) -> Result<Vec<Segment>> {
        match self {
            Primitive::Cube { center, side } if center.len() == 2 => {
                let h = side / 2.0;
                let (cx, cy) = (center[0], center[1]);
                let p = [[cx - h, cy - h], [cx + h, cy - h], [cx + h, cy + h], [cx - h, cy + h]];
                Ok((0..4).map(|i| Segment { a: p[i], b: p[(i + 1) % 4] }).collect())
            }
            Primitive::Union { dim: 2, scale, shift, cubes } => Ok(union::exposed_segments(cubes)
                .into_iter()
                .map(|s| Segment {
                    a: [shift[0] + scale * s.a[0], shift[1] + scale * s.a[1]],
                    b: [shift[0] + scale * s.b[0], shift[1] + scale * s.b[1]],
                })
                .collect()),
            _ => Err(Error::Unsupported(format!("boundary segments of {self:?}"))),
        }
    }
}
