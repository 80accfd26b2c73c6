//! Nyström discretization `M_ij = √(w_i w_j) k_S(x_i − x_j)` of
//! `T_{F,S} = B_S P_F B_S`, whose nonzero spectrum equals that of the integral
//! operator with kernel `k_S(x − y)` on `L²(F)`.

use std::io::{Read, Write};
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::kernel::BandKernel;
use super::quadrature::Quadrature;
use crate::geometry::{Domain, Primitive};
use crate::{Error, Result};

/// Smallest admissible matrix.
pub const MIN_NODES: usize = 16;

/// Quadrature resolution. Unset fields are chosen from the bandwidth `Ω` of
/// `S` (largest frequency per coordinate) and the extent `L` of `F`:
/// * d = 1: `max(600, ceil(Ω L) + 32)` Gauss nodes;
/// * d >= 2, box `F`: `ceil(0.75 Ω L) + 16` nodes per coordinate;
/// * other `F`: cells of `cell_order^d` nodes at the same node density.
///
/// Automatic choices are reduced until the node count fits `max_nodes`
/// (flagged as `capped`); explicit choices exceeding it are an error.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Resolution {
    pub nodes_per_dim: Option<usize>,
    pub cells_per_dim: Option<usize>,
    pub cell_order: usize,
    pub boundary_depth: usize,
    pub max_nodes: usize,
}

impl Default for Resolution {
    fn default() -> Self {
        Self { nodes_per_dim: None, cells_per_dim: None, cell_order: 6, boundary_depth: 4, max_nodes: 4096 }
    }
}

impl Resolution {
    pub fn nodes(n: usize) -> Self {
        Self { nodes_per_dim: Some(n), ..Self::default() }
    }

    /// Same settings with every node and cell count doubled per coordinate.
    pub fn refined(&self, op: &OperatorMeta) -> Self {
        let mut r = self.clone();
        match op.scheme {
            Scheme::Tensor { nodes_per_dim } => r.nodes_per_dim = Some(2 * nodes_per_dim),
            Scheme::CellGrid { cells_per_dim, .. } => r.cells_per_dim = Some(2 * cells_per_dim),
            Scheme::Custom => {}
        }
        r.max_nodes = r.max_nodes.max(op.n << op.f.dim());
        r
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Scheme {
    Tensor { nodes_per_dim: usize },
    CellGrid { cells_per_dim: usize, cell_order: usize, boundary_depth: usize },
    Custom,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OperatorMeta {
    pub f: Domain,
    pub s: Domain,
    pub n: usize,
    pub scheme: Scheme,
    pub capped: bool,
}

#[derive(Clone, Debug)]
pub struct DiscreteOperator {
    pub quadrature: Quadrature,
    /// Row-major, exactly symmetric.
    pub matrix: Vec<f64>,
    pub meta: OperatorMeta,
}

/// Automatic Gauss nodes per coordinate for bandwidth `omega` over extent `len`.
pub fn default_nodes_per_dim(omega: f64, len: f64, d: usize) -> usize {
    if d == 1 {
        600.max((omega * len).ceil() as usize + 32)
    } else {
        (0.75 * omega * len).ceil() as usize + 16
    }
}

fn too_small(n: usize) -> Error {
    Error::Resolution(format!("resolution too small: {n} nodes (need at least {MIN_NODES})"))
}

fn too_large(n: usize, cap: usize) -> Error {
    Error::Resolution(format!("{n} nodes exceed the matrix cap {cap}"))
}

fn build_quadrature(f: &Primitive, omega: f64, res: &Resolution) -> Result<(Quadrature, Scheme, bool)> {
    let d = f.dim();
    let bbox = f.bbox();
    let len = bbox.extent();
    let cap = res.max_nodes;
    if matches!(f, Primitive::Interval { .. } | Primitive::Cube { .. })
        || (matches!(f, Primitive::Ball { .. }) && d == 1)
    {
        let (n, capped) = match res.nodes_per_dim {
            Some(n) => {
                if n.pow(d as u32) > cap {
                    return Err(too_large(n.pow(d as u32), cap));
                }
                (n, false)
            }
            None => {
                let want = default_nodes_per_dim(omega, len, d);
                let fit = (cap as f64).powf(1.0 / d as f64).floor() as usize;
                // Guard against powf rounding just below an exact root.
                let fit = if (fit + 1).pow(d as u32) <= cap { fit + 1 } else { fit };
                (want.min(fit), want > fit)
            }
        };
        let q = Quadrature::tensor(&bbox, n);
        if q.len() < MIN_NODES {
            return Err(too_small(q.len()));
        }
        return Ok((q, Scheme::Tensor { nodes_per_dim: n }, capped));
    }
    if res.cell_order == 0 {
        return Err(Error::Resolution("cell order must be positive".into()));
    }
    let build = |cells: usize| Quadrature::cell_grid(f, cells, res.cell_order, res.boundary_depth);
    let (q, cells, capped) = match res.cells_per_dim {
        Some(c) => {
            let q = build(c.max(1));
            if q.len() > cap {
                return Err(too_large(q.len(), cap));
            }
            (q, c.max(1), false)
        }
        None => {
            let want = default_nodes_per_dim(omega, len, d).div_ceil(res.cell_order).max(2);
            let mut cells = want;
            let mut q = build(cells);
            while q.len() > cap && cells > 1 {
                cells -= 1;
                q = build(cells);
            }
            if q.len() > cap {
                return Err(too_large(q.len(), cap));
            }
            (q, cells, cells < want)
        }
    };
    if q.len() < MIN_NODES {
        return Err(too_small(q.len()));
    }
    let scheme =
        Scheme::CellGrid { cells_per_dim: cells, cell_order: res.cell_order, boundary_depth: res.boundary_depth };
    Ok((q, scheme, capped))
}

/// Symmetric Nyström matrix for a given quadrature; rows are assembled in
/// parallel, each a pure function of the nodes.
pub fn assemble(kernel: &BandKernel, q: &Quadrature) -> Vec<f64> {
    let n = q.len();
    let d = q.dim;
    let sw: Vec<f64> = q.weights.iter().map(|w| w.sqrt()).collect();
    let mut m = vec![0.0; n * n];
    m.par_chunks_mut(n).enumerate().for_each(|(i, row)| {
        let xi = q.point(i);
        let mut z = vec![0.0; d];
        for j in 0..=i {
            if sw[i] == 0.0 || sw[j] == 0.0 {
                continue;
            }
            let xj = q.point(j);
            for k in 0..d {
                z[k] = xi[k] - xj[k];
            }
            row[j] = sw[i] * sw[j] * kernel.eval(&z);
        }
    });
    for i in 0..n {
        for j in 0..i {
            m[j * n + i] = m[i * n + j];
        }
    }
    m
}

/// Discretizes `T_{F,S}` with an automatically or explicitly chosen rule.
pub fn discretize(f: &Domain, s: &Domain, res: &Resolution) -> Result<DiscreteOperator> {
    let kernel = BandKernel::new(s)?;
    if kernel.dim() != f.dim() {
        return Err(Error::DimensionMismatch { expected: f.dim(), got: kernel.dim() });
    }
    if f.volume() <= 0.0 {
        return Err(Error::InvalidDomain("spatial domain has zero volume".into()));
    }
    let (q, scheme, capped) = build_quadrature(&f.primitive(), kernel.bandwidth(), res)?;
    let matrix = assemble(&kernel, &q);
    let meta = OperatorMeta { f: f.clone(), s: s.clone(), n: q.len(), scheme, capped };
    Ok(DiscreteOperator { quadrature: q, matrix, meta })
}

/// Operators for several spatial domains on one node set: the rule `q` with
/// weights masked by each domain's indicator.
pub fn discretize_shared(domains: &[Domain], s: &Domain, q: &Quadrature) -> Result<Vec<DiscreteOperator>> {
    domains
        .iter()
        .map(|f| {
            if f.dim() != q.dim {
                return Err(Error::DimensionMismatch { expected: q.dim, got: f.dim() });
            }
            DiscreteOperator::from_quadrature(f, s, q.masked(&f.primitive()))
        })
        .collect()
}

impl DiscreteOperator {
    /// Operator on a caller-supplied node set, e.g. a shared grid whose
    /// weights were masked by an indicator (zero weights are allowed).
    pub fn from_quadrature(f: &Domain, s: &Domain, q: Quadrature) -> Result<Self> {
        let kernel = BandKernel::new(s)?;
        if kernel.dim() != q.dim || f.dim() != q.dim {
            return Err(Error::DimensionMismatch { expected: q.dim, got: kernel.dim() });
        }
        if q.len() < MIN_NODES {
            return Err(too_small(q.len()));
        }
        if q.weights.iter().any(|w| !(*w >= 0.0 && w.is_finite())) {
            return Err(Error::Resolution("quadrature weights must be finite and non-negative".into()));
        }
        let matrix = assemble(&kernel, &q);
        let meta = OperatorMeta { f: f.clone(), s: s.clone(), n: q.len(), scheme: Scheme::Custom, capped: false };
        Ok(Self { quadrature: q, matrix, meta })
    }

    pub fn n(&self) -> usize {
        self.meta.n
    }

    pub fn max_asymmetry(&self) -> f64 {
        let n = self.n();
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in 0..i {
                worst = worst.max((self.matrix[i * n + j] - self.matrix[j * n + i]).abs());
            }
        }
        worst
    }

    /// Flat binary: the dimension as a little-endian `u64`, then the matrix
    /// as little-endian `f64`, row-major.
    pub fn write_binary(&self, path: &Path) -> Result<()> {
        let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
        out.write_all(&(self.n() as u64).to_le_bytes())?;
        for x in &self.matrix {
            out.write_all(&x.to_le_bytes())?;
        }
        out.flush()?;
        Ok(())
    }
}

/// Reads a matrix written by [`DiscreteOperator::write_binary`].
pub fn read_binary(path: &Path) -> Result<(usize, Vec<f64>)> {
    let mut bytes = Vec::new();
    std::fs::File::open(path)?.read_to_end(&mut bytes)?;
    if bytes.len() < 8 {
        return Err(Error::Resolution("matrix dump shorter than its header".into()));
    }
    let n = u64::from_le_bytes(bytes[..8].try_into().expect("8-byte header")) as usize;
    let body = &bytes[8..];
    if body.len() != n * n * 8 {
        return Err(Error::Resolution(format!("matrix dump holds {} bytes, expected {}", body.len(), n * n * 8)));
    }
    let m = body.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk"))).collect();
    Ok((n, m))
}
