use serde::{Deserialize, Serialize};

use super::Domain;
use crate::dyadic::DyadicCube;
use crate::{Error, Result};

/// JSON form of a [`Domain`], e.g.
/// `{"shape":"ball","dim":2,"center":[0,0],"radius":8.0}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case", deny_unknown_fields)]
pub enum DomainSpec {
    Interval {
        a: f64,
        b: f64,
    },
    #[serde(alias = "cube")]
    AxisCube {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        dim: Option<usize>,
        center: Vec<f64>,
        side: f64,
    },
    Ball {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        dim: Option<usize>,
        center: Vec<f64>,
        radius: f64,
    },
    DyadicUnion {
        dim: usize,
        cubes: Vec<DyadicCube>,
    },
    Dilated {
        t: f64,
        inner: Box<DomainSpec>,
    },
    Translated {
        v: Vec<f64>,
        inner: Box<DomainSpec>,
    },
}

fn check_dim(dim: Option<usize>, center: &[f64]) -> Result<()> {
    match dim {
        Some(d) if d != center.len() => Err(Error::DimensionMismatch { expected: d, got: center.len() }),
        _ => Ok(()),
    }
}

impl TryFrom<&DomainSpec> for Domain {
    type Error = Error;

    fn try_from(spec: &DomainSpec) -> Result<Domain> {
        match spec {
            DomainSpec::Interval { a, b } => Domain::interval(*a, *b),
            DomainSpec::AxisCube { dim, center, side } => {
                check_dim(*dim, center)?;
                Domain::cube(center.clone(), *side)
            }
            DomainSpec::Ball { dim, center, radius } => {
                check_dim(*dim, center)?;
                Domain::ball(center.clone(), *radius)
            }
            DomainSpec::DyadicUnion { dim, cubes } => Domain::dyadic_union(*dim, cubes.clone()),
            DomainSpec::Dilated { t, inner } => Domain::try_from(inner.as_ref())?.dilate(*t),
            DomainSpec::Translated { v, inner } => Domain::try_from(inner.as_ref())?.translate(v.clone()),
        }
    }
}

impl From<&Domain> for DomainSpec {
    fn from(d: &Domain) -> Self {
        match d {
            Domain::Interval { a, b } => DomainSpec::Interval { a: *a, b: *b },
            Domain::AxisCube { center, side } => {
                DomainSpec::AxisCube { dim: Some(center.len()), center: center.clone(), side: *side }
            }
            Domain::Ball { center, radius } => {
                DomainSpec::Ball { dim: Some(center.len()), center: center.clone(), radius: *radius }
            }
            Domain::DyadicUnion { dim, cubes } => DomainSpec::DyadicUnion { dim: *dim, cubes: cubes.clone() },
            Domain::Dilated { t, inner } => DomainSpec::Dilated { t: *t, inner: Box::new(inner.as_ref().into()) },
            Domain::Translated { v, inner } => {
                DomainSpec::Translated { v: v.clone(), inner: Box::new(inner.as_ref().into()) }
            }
        }
    }
}

impl Serialize for Domain {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        DomainSpec::from(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for Domain {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let spec = DomainSpec::deserialize(d)?;
        Domain::try_from(&spec).map_err(serde::de::Error::custom)
    }
}
